//! Scenario files: a cast of agents and a script of events, in JSON.
//!
//! Events run in order; after each one the network drains and the escrow
//! desk adjudicates, so every event sees a quiet world. Events referring
//! to escrow cases name them by the `label` of the event that opened them.
//! `assert_*` events freeze expectations into the script itself, which is
//! how shipped scenarios prove their own arithmetic.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use bonds_core::bond::{AgentId, Day, Lot};
use bonds_core::{ExerciseStyle, InstrumentSpec, OracleEventKind, ScheduledAmount};

#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub struct Scenario {
    pub agents: Vec<AgentId>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub escrow_agent: Option<AgentId>,
    #[serde(skip_serializing_if = "ScenarioConfig::is_default", default)]
    pub config: ScenarioConfig,
    /// Facts the oracle holds before the first event.
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub oracle: Vec<FactSpec>,
    pub events: Vec<Event>,
}

#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub struct ScenarioConfig {
    /// Quick-ratio window in days.
    #[serde(default = "default_delta")]
    pub delta: Day,
    /// Current-ratio window in days.
    #[serde(rename = "Delta", default = "default_big_delta")]
    pub big_delta: Day,
    /// Message delivery order across pairs.
    #[serde(default)]
    pub delivery: DeliveryMode,
}

fn default_delta() -> Day {
    90
}

fn default_big_delta() -> Day {
    360
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        ScenarioConfig {
            delta: default_delta(),
            big_delta: default_big_delta(),
            delivery: DeliveryMode::Fifo,
        }
    }
}

impl ScenarioConfig {
    fn is_default(&self) -> bool {
        *self == ScenarioConfig::default()
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Debug, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DeliveryMode {
    #[default]
    Fifo,
    /// Seeded random interleaving across pairs; per-pair order holds.
    Shuffled,
}

/// One oracle fact, as written in a scenario file.
#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub struct FactSpec {
    pub kind: OracleEventKind,
    pub subject: AgentId,
    pub day: Day,
    /// Present for rate readings, absent for plain attestations.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub amount: Option<u64>,
}

/// An exact rational, written as numerator and denominator.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub struct RateSpec {
    pub num: u64,
    pub den: u64,
}

#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub struct Event {
    #[serde(flatten)]
    pub kind: EventKind,
    /// If set, the acting agent's local date must equal this when the
    /// event runs; a cheap way to keep scripts honest about time.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub at: Option<Day>,
    /// Name for this event; how escrow cases are referred to later.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub label: Option<String>,
    /// When false, a failure is recorded in the trace and the run goes on.
    #[serde(skip_serializing_if = "is_true", default = "yes")]
    pub must_succeed: bool,
}

fn yes() -> bool {
    true
}

#[allow(clippy::trivially_copy_pass_by_ref)]
fn is_true(b: &bool) -> bool {
    *b
}

impl From<EventKind> for Event {
    fn from(kind: EventKind) -> Self {
        Event {
            kind,
            at: None,
            label: None,
            must_succeed: true,
        }
    }
}

#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
#[serde(tag = "action", rename_all = "snake_case")]
pub enum EventKind {
    Mint {
        actor: AgentId,
        count: u64,
        maturity: Day,
    },
    AdvanceDate {
        actor: AgentId,
        to: Day,
    },
    AdvanceAll {
        to: Day,
    },
    Propose {
        from: AgentId,
        to: AgentId,
        #[serde(skip_serializing_if = "Vec::is_empty", default)]
        give: Vec<Lot>,
        #[serde(skip_serializing_if = "Vec::is_empty", default)]
        want: Vec<Lot>,
    },
    Accept {
        actor: AgentId,
        from: AgentId,
    },
    Reject {
        actor: AgentId,
        from: AgentId,
    },
    /// Plan an instrument and play it out: obligated mints, then the
    /// proposer's swap goes on the wire.
    Instrument {
        spec: InstrumentSpec,
    },
    /// Synonym of `accept`, for scripts that read like term sheets.
    AcceptInstrument {
        actor: AgentId,
        from: AgentId,
    },
    DepositEscrow {
        depositor: AgentId,
        beneficiary: AgentId,
        lots: Vec<Lot>,
        release_day: Day,
    },
    CancelEscrow {
        actor: AgentId,
        case: String,
    },
    OpenCollateral {
        depositor: AgentId,
        beneficiary: AgentId,
        reference: AgentId,
        lots: Vec<Lot>,
        #[serde(skip_serializing_if = "Option::is_none", default)]
        expiry: Option<Day>,
    },
    OpenGuarantee {
        depositor: AgentId,
        beneficiary: AgentId,
        reference: AgentId,
        lots: Vec<Lot>,
        #[serde(skip_serializing_if = "Option::is_none", default)]
        expiry: Option<Day>,
    },
    OpenOption {
        holder: AgentId,
        writer: AgentId,
        style: ExerciseStyle,
        premium: Vec<Lot>,
        strike: Vec<Lot>,
        underlying: Vec<Lot>,
        exercise_deadline: Day,
        establish_by: Day,
    },
    DepositOptionLeg {
        actor: AgentId,
        case: String,
    },
    Exercise {
        actor: AgentId,
        case: String,
    },
    OpenInsurance {
        insurer: AgentId,
        insured: AgentId,
        subject: AgentId,
        payout: Vec<Lot>,
        reserves: Vec<Lot>,
        expiry: Day,
    },
    OpenCds {
        seller: AgentId,
        buyer: AgentId,
        reference: AgentId,
        reserves: Vec<Lot>,
        premiums: Vec<ScheduledAmount>,
        expiry: Day,
    },
    PayPremium {
        case: String,
        day: Day,
    },
    OpenLetterOfCredit {
        bank: AgentId,
        buyer: AgentId,
        seller: AgentId,
        subject: AgentId,
        payment: Vec<Lot>,
        reimbursement: Vec<Lot>,
    },
    DepositLocReimbursement {
        case: String,
    },
    OpenCreditLine {
        lender: AgentId,
        borrower: AgentId,
        limit: u64,
        rate: RateSpec,
        coin_maturity: Day,
        schedule: Vec<Day>,
        expiry: Day,
    },
    Draw {
        case: String,
        amount: u64,
    },
    Repay {
        case: String,
        amount: u64,
    },
    OracleSet {
        kind: OracleEventKind,
        subject: AgentId,
        day: Day,
        #[serde(skip_serializing_if = "Option::is_none", default)]
        amount: Option<u64>,
    },
    /// The actor's holdings must equal exactly these lots.
    AssertHolding {
        actor: AgentId,
        holdings: Vec<Lot>,
    },
    /// The actor's raw liquidity counts must match exactly.
    AssertRatios {
        actor: AgentId,
        cash_assets: u64,
        quick_assets: u64,
        current_assets: u64,
        current_liabilities: u64,
    },
    AssertCirculation {
        #[serde(skip_serializing_if = "Option::is_none", default)]
        total: Option<u64>,
        /// Every agent must hold exactly this many foreign bonds.
        #[serde(skip_serializing_if = "Option::is_none", default)]
        foreign_each: Option<u64>,
        #[serde(skip_serializing_if = "Option::is_none", default)]
        foreign: Option<std::collections::BTreeMap<AgentId, u64>>,
        #[serde(skip_serializing_if = "Option::is_none", default)]
        outstanding: Option<std::collections::BTreeMap<AgentId, u64>>,
    },
}

impl EventKind {
    /// The agent a record should be attributed to, if one stands out.
    pub fn actor(&self) -> Option<&AgentId> {
        match self {
            EventKind::Mint { actor, .. }
            | EventKind::AdvanceDate { actor, .. }
            | EventKind::Accept { actor, .. }
            | EventKind::Reject { actor, .. }
            | EventKind::AcceptInstrument { actor, .. }
            | EventKind::CancelEscrow { actor, .. }
            | EventKind::DepositOptionLeg { actor, .. }
            | EventKind::Exercise { actor, .. }
            | EventKind::AssertHolding { actor, .. }
            | EventKind::AssertRatios { actor, .. } => Some(actor),
            EventKind::Propose { from, .. } => Some(from),
            EventKind::DepositEscrow { depositor, .. } => Some(depositor),
            EventKind::OpenCollateral { depositor, .. }
            | EventKind::OpenGuarantee { depositor, .. } => Some(depositor),
            EventKind::OpenOption { holder, .. } => Some(holder),
            EventKind::OpenInsurance { insurer, .. } => Some(insurer),
            EventKind::OpenCds { seller, .. } => Some(seller),
            EventKind::OpenLetterOfCredit { bank, .. } => Some(bank),
            EventKind::OpenCreditLine { lender, .. } => Some(lender),
            EventKind::Instrument { spec } => Some(instrument_proposer(spec)),
            EventKind::AdvanceAll { .. }
            | EventKind::PayPremium { .. }
            | EventKind::DepositLocReimbursement { .. }
            | EventKind::Draw { .. }
            | EventKind::Repay { .. }
            | EventKind::OracleSet { .. }
            | EventKind::AssertCirculation { .. } => None,
        }
    }
}

fn instrument_proposer(spec: &InstrumentSpec) -> &AgentId {
    match spec {
        InstrumentSpec::SymmetricMutualCredit { p, .. } => p,
        InstrumentSpec::ZeroCouponLoan { lender, .. } => lender,
        InstrumentSpec::BalloonLoan { lender, .. } => lender,
        InstrumentSpec::FixedPaymentLoan { lender, .. } => lender,
        InstrumentSpec::SaleOfDebt { seller, .. } => seller,
        InstrumentSpec::ForwardContract { p, .. } => p,
        InstrumentSpec::InterestRateSwap { fixed_payer, .. } => fixed_payer,
    }
}

#[derive(Debug, thiserror::Error)]
pub enum ScenarioError {
    #[error("scenario is not valid JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("scenario has no agents")]
    NoAgents,
    #[error("agent {0} appears twice")]
    DuplicateAgent(AgentId),
}

pub fn parse_scenario(text: &str) -> Result<Scenario, ScenarioError> {
    let scenario: Scenario = serde_json::from_str(text)?;
    if scenario.agents.is_empty() {
        return Err(ScenarioError::NoAgents);
    }
    let mut seen = BTreeSet::new();
    for agent in scenario.agents.iter().chain(scenario.escrow_agent.iter()) {
        if !seen.insert(agent) {
            return Err(ScenarioError::DuplicateAgent(agent.clone()));
        }
    }
    Ok(scenario)
}

/// A fully connected mutual-credit economy: every pair of the `n` agents
/// issues and swaps `k` bonds maturing day 0, then the script asserts the
/// book: `n * (n-1) * k` bonds in circulation, `(n-1) * k` foreign bonds
/// per agent.
pub fn generate_mutual_credit(n: u64, k: u64) -> Scenario {
    let width = n.to_string().len();
    let name = |i: u64| AgentId::new(format!("a{:0width$}", i));
    let agents: Vec<AgentId> = (1..=n).map(name).collect();
    let mut events: Vec<Event> = Vec::new();
    for i in 0..agents.len() {
        for j in (i + 1)..agents.len() {
            events.push(
                EventKind::Instrument {
                    spec: InstrumentSpec::SymmetricMutualCredit {
                        p: agents[i].clone(),
                        q: agents[j].clone(),
                        k,
                        maturity: 0,
                    },
                }
                .into(),
            );
            events.push(
                EventKind::AcceptInstrument {
                    actor: agents[j].clone(),
                    from: agents[i].clone(),
                }
                .into(),
            );
        }
    }
    events.push(
        EventKind::AssertCirculation {
            total: Some(n * (n - 1) * k),
            foreign_each: Some((n - 1) * k),
            foreign: None,
            outstanding: None,
        }
        .into(),
    );
    Scenario {
        agents,
        escrow_agent: None,
        config: ScenarioConfig::default(),
        oracle: Vec::new(),
        events,
    }
}
