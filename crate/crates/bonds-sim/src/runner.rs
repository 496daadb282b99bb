//! Drives a scenario: executes each scripted event, drains the network,
//! lets the escrow desk adjudicate, and streams one trace record per
//! observable step to the caller's sink.
//!
//! Checks are layered on request: a serial-exact conservation audit after
//! every record, a kernel shadow replaying the run for the correct-run
//! verdict, or both. The final conservation audit always runs.

use std::collections::BTreeMap;
use std::io;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use bonds_core::bond::{normalize_lots, AgentId, Day, Lot};
use bonds_core::liquidity::{circulation, ratios, LiquidityConfig};
use bonds_core::{
    check_correct_run, plan_instrument, CaseId, OracleFact, OracleValue, Rate, Verdict,
};

use crate::scenario::{DeliveryMode, Event, EventKind, RateSpec, Scenario, ScenarioConfig};
use crate::shadow::{KernelShadow, LotsView};
use crate::trace::TraceRecord;
use crate::world::{DeliveryOrder, DeliveryOutcome, World};

#[derive(Clone, Copy, PartialEq, Eq, Debug, Default)]
pub enum CheckMode {
    /// Final conservation audit only.
    #[default]
    None,
    /// Conservation audited after every record too.
    Conservation,
    /// Kernel shadow and correct-run verdict.
    CorrectRun,
    /// Everything.
    All,
}

impl CheckMode {
    fn per_record_conservation(self) -> bool {
        matches!(self, CheckMode::Conservation | CheckMode::All)
    }

    fn correct_run(self) -> bool {
        matches!(self, CheckMode::CorrectRun | CheckMode::All)
    }
}

#[derive(Clone, Copy, Debug)]
pub struct RunOptions {
    pub seed: u64,
    pub check: CheckMode,
    /// Stop after emitting the record with this sequence number.
    pub stop_after: Option<u64>,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions {
            seed: 42,
            check: CheckMode::None,
            stop_after: None,
        }
    }
}

pub struct RunOutcome {
    pub world: World,
    pub records: u64,
    /// Correct-run verdict, when that check ran to the end.
    pub verdict: Option<Verdict>,
    pub stopped_early: bool,
    pub config: ScenarioConfig,
}

#[derive(Debug, thiserror::Error)]
pub enum RunFailure {
    #[error("scenario setup failed: {0}")]
    Setup(String),
    #[error("writing the trace failed: {0}")]
    Io(#[from] io::Error),
    #[error("event at record {seq} ({action}) failed: {error}")]
    Event {
        seq: u64,
        action: String,
        error: String,
    },
    #[error("assertion at record {seq} failed: {detail}")]
    AssertFailed { seq: u64, detail: String },
    #[error("conservation violated{}: {detail}", seq.map(|s| format!(" at record {s}")).unwrap_or_default())]
    Conservation { seq: Option<u64>, detail: String },
    #[error("incorrect run: class {class} left hanging from snapshot {suffix_start}")]
    CorrectRun { class: String, suffix_start: usize },
    #[error("kernel shadow failed: {0}")]
    Shadow(String),
}

pub fn run_scenario(
    scenario: &Scenario,
    options: RunOptions,
    sink: &mut dyn FnMut(&TraceRecord) -> io::Result<()>,
) -> Result<RunOutcome, RunFailure> {
    let delivery = match scenario.config.delivery {
        DeliveryMode::Fifo => DeliveryOrder::GlobalFifo,
        DeliveryMode::Shuffled => {
            DeliveryOrder::Shuffled(Box::new(ChaCha8Rng::seed_from_u64(options.seed)))
        }
    };
    let mut world = World::new(&scenario.agents, scenario.escrow_agent.clone(), delivery)
        .map_err(|e| RunFailure::Setup(e.to_string()))?;
    for fact in &scenario.oracle {
        world.assert_fact(OracleFact {
            kind: fact.kind,
            subject: fact.subject.clone(),
            day: fact.day,
            value: fact
                .amount
                .map(OracleValue::Amount)
                .unwrap_or(OracleValue::Flag),
        });
    }
    let shadow = options
        .check
        .correct_run()
        .then(|| KernelShadow::new(&world));
    let mut runner = Runner {
        world,
        shadow,
        labels: BTreeMap::new(),
        config: scenario.config,
        seq: 0,
        stop_after: options.stop_after,
        stopped: false,
        per_record_conservation: options.check.per_record_conservation(),
        sink,
    };

    for event in &scenario.events {
        runner.run_event(event)?;
        if runner.stopped {
            break;
        }
    }

    let records = runner.seq;
    let stopped_early = runner.stopped;
    let Runner { world, shadow, .. } = runner;

    if let Err(v) = world.audit() {
        return Err(RunFailure::Conservation {
            seq: None,
            detail: v.to_string(),
        });
    }
    let mut verdict = None;
    if let Some(shadow) = shadow {
        if !stopped_early {
            let trace = shadow
                .finish(&world)
                .map_err(|e| RunFailure::Shadow(e.to_string()))?;
            verdict =
                Some(check_correct_run(&trace).map_err(|e| RunFailure::Shadow(e.to_string()))?);
        }
    }
    Ok(RunOutcome {
        world,
        records,
        verdict,
        stopped_early,
        config: scenario.config,
    })
}

struct Runner<'a> {
    world: World,
    shadow: Option<KernelShadow>,
    /// Escrow cases by the label of the event that opened them.
    labels: BTreeMap<String, CaseId>,
    config: ScenarioConfig,
    seq: u64,
    stop_after: Option<u64>,
    stopped: bool,
    per_record_conservation: bool,
    sink: &'a mut dyn FnMut(&TraceRecord) -> io::Result<()>,
}

impl Runner<'_> {
    fn emit(
        &mut self,
        actor: Option<&AgentId>,
        action: &str,
        label: Option<&String>,
        params: Value,
        result: Value,
    ) -> Result<(), RunFailure> {
        let day = actor
            .and_then(|a| self.world.ledgers().get(a))
            .map(|l| l.local_date())
            .unwrap_or(0);
        let record = TraceRecord {
            seq: self.seq,
            day,
            actor: actor
                .map(|a| a.to_string())
                .unwrap_or_else(|| "*".to_string()),
            action: action.to_string(),
            label: label.cloned(),
            params,
            result,
            world_hash: self.world.world_hash(),
        };
        (self.sink)(&record)?;
        if self.per_record_conservation {
            if let Err(v) = self.world.audit() {
                return Err(RunFailure::Conservation {
                    seq: Some(self.seq),
                    detail: v.to_string(),
                });
            }
        }
        if self.stop_after == Some(self.seq) {
            self.stopped = true;
        }
        self.seq += 1;
        Ok(())
    }

    fn event_error(&self, action: &str, error: impl ToString) -> RunFailure {
        RunFailure::Event {
            seq: self.seq,
            action: action.to_string(),
            error: error.to_string(),
        }
    }

    fn resolve_case(&self, name: &str, action: &str) -> Result<CaseId, RunFailure> {
        if let Some(id) = self.labels.get(name) {
            return Ok(*id);
        }
        if let Ok(id) = name.parse::<CaseId>() {
            return Ok(id);
        }
        Err(self.event_error(action, format!("unknown escrow case label: {name}")))
    }

    /// Parameters of a scripted event, as written, minus the action tag.
    fn params_of(kind: &EventKind) -> Value {
        let mut value = serde_json::to_value(kind).expect("event kinds serialize");
        if let Value::Object(map) = &mut value {
            map.remove("action");
        }
        value
    }

    fn action_name(kind: &EventKind) -> String {
        match serde_json::to_value(kind).expect("event kinds serialize") {
            Value::Object(map) => match map.get("action") {
                Some(Value::String(s)) => s.clone(),
                _ => "event".to_string(),
            },
            _ => "event".to_string(),
        }
    }

    /// Snapshot for shadow diffing around escrow activity, if shadowing.
    fn escrow_before(&self) -> Option<LotsView> {
        self.shadow
            .as_ref()
            .map(|_| KernelShadow::lots_view(&self.world))
    }

    fn escrow_sync(&mut self, before: Option<LotsView>) -> Result<(), RunFailure> {
        if let (Some(shadow), Some(before)) = (self.shadow.as_mut(), before) {
            shadow
                .sync_escrow(&before, &self.world)
                .map_err(|e| RunFailure::Shadow(e.to_string()))?;
        }
        Ok(())
    }

    fn run_event(&mut self, event: &Event) -> Result<(), RunFailure> {
        let action = Self::action_name(&event.kind);
        if let (Some(at), Some(actor)) = (event.at, event.kind.actor()) {
            let day = self
                .world
                .ledgers()
                .get(actor)
                .map(|l| l.local_date())
                .ok_or_else(|| self.event_error(&action, format!("no such agent: {actor}")))?;
            if day != at {
                return Err(self.event_error(
                    &action,
                    format!("{actor} is at day {day}, the script expects day {at}"),
                ));
            }
        }
        match self.apply_event(event, &action) {
            Ok(()) => {}
            Err(RunFailure::Event { error, .. }) if !event.must_succeed => {
                let actor = event.kind.actor().cloned();
                self.emit(
                    actor.as_ref(),
                    &action,
                    event.label.as_ref(),
                    Self::params_of(&event.kind),
                    json!({ "error": error }),
                )?;
            }
            Err(RunFailure::AssertFailed { detail, .. }) if !event.must_succeed => {
                let actor = event.kind.actor().cloned();
                self.emit(
                    actor.as_ref(),
                    &action,
                    event.label.as_ref(),
                    Self::params_of(&event.kind),
                    json!({ "ok": false, "detail": detail }),
                )?;
            }
            Err(e) => return Err(e),
        }
        if self.stopped {
            return Ok(());
        }
        self.drain()?;
        if self.stopped {
            return Ok(());
        }
        self.tick()
    }

    fn drain(&mut self) -> Result<(), RunFailure> {
        loop {
            let outcome = match self.world.deliver_next() {
                Ok(Some(outcome)) => outcome,
                Ok(None) => return Ok(()),
                Err(e) => return Err(self.event_error("deliver", e)),
            };
            match outcome {
                DeliveryOutcome::Answered {
                    proposal,
                    by,
                    class,
                    response,
                } => {
                    let kind = match &response {
                        bonds_core::trade::TradeResponse::Accept { .. } => "accepted",
                        bonds_core::trade::TradeResponse::Decline { .. } => "declined",
                        bonds_core::trade::TradeResponse::DeclineWithMenu { .. } => {
                            "declined_with_menu"
                        }
                    };
                    let menu = match &response {
                        bonds_core::trade::TradeResponse::DeclineWithMenu { menu, .. } => {
                            Some(serde_json::to_value(menu).expect("bonds serialize"))
                        }
                        _ => None,
                    };
                    let mut result = json!({ "class": class_name(class), "response": kind });
                    if let Some(menu) = menu {
                        result["menu"] = menu;
                    }
                    self.emit(
                        Some(&by.clone()),
                        "deliver",
                        None,
                        json!({ "proposal": proposal }),
                        result,
                    )?;
                }
                DeliveryOutcome::Deferred { proposal, by } => {
                    self.emit(
                        Some(&by.clone()),
                        "deliver",
                        None,
                        json!({ "proposal": proposal }),
                        json!({ "class": "normal", "response": "pending" }),
                    )?;
                }
                DeliveryOutcome::Settled {
                    proposal,
                    by,
                    remembered,
                    outcome,
                } => {
                    let completed =
                        matches!(outcome, bonds_core::trade::SettleOutcome::Completed { .. });
                    if let Some(shadow) = self.shadow.as_mut() {
                        shadow
                            .on_settle(&remembered, completed)
                            .map_err(|e| RunFailure::Shadow(e.to_string()))?;
                    }
                    let result = match outcome {
                        bonds_core::trade::SettleOutcome::Completed { received } => {
                            json!({ "outcome": "completed", "received": received.as_lots() })
                        }
                        bonds_core::trade::SettleOutcome::Declined { menu } => {
                            if menu.is_empty() {
                                json!({ "outcome": "declined" })
                            } else {
                                json!({ "outcome": "declined", "menu": menu })
                            }
                        }
                    };
                    self.emit(
                        Some(&by.clone()),
                        "settle",
                        None,
                        json!({ "proposal": proposal }),
                        result,
                    )?;
                }
            }
            if self.stopped {
                return Ok(());
            }
        }
    }

    fn tick(&mut self) -> Result<(), RunFailure> {
        if self.world.escrow_agent().is_none() {
            return Ok(());
        }
        let before = self.escrow_before();
        let events = self
            .world
            .tick_escrow()
            .map_err(|e| self.event_error("escrow_tick", e))?;
        self.escrow_sync(before)?;
        if events.is_empty() {
            return Ok(());
        }
        let agent = self.world.escrow_agent().cloned();
        self.emit(
            agent.as_ref(),
            "escrow_tick",
            None,
            json!({}),
            json!({ "events": events }),
        )?;
        Ok(())
    }

    fn mint_step(
        &mut self,
        actor: &AgentId,
        count: u64,
        maturity: Day,
        label: Option<&String>,
    ) -> Result<(), RunFailure> {
        let receipt = self
            .world
            .mint(actor, count, maturity)
            .map_err(|e| self.event_error("mint", e))?;
        if let Some(shadow) = self.shadow.as_mut() {
            shadow
                .on_mint(actor, count, maturity)
                .map_err(|e| RunFailure::Shadow(e.to_string()))?;
        }
        self.emit(
            Some(actor),
            "mint",
            label,
            json!({ "count": count, "maturity": maturity }),
            json!({ "first_serial": receipt.first_serial }),
        )
    }

    fn propose_step(
        &mut self,
        from: &AgentId,
        to: &AgentId,
        give: &[Lot],
        want: &[Lot],
        label: Option<&String>,
    ) -> Result<(), RunFailure> {
        let proposal = self
            .world
            .propose(from, to, give, want)
            .map_err(|e| self.event_error("propose", e))?;
        if let Some(shadow) = self.shadow.as_mut() {
            shadow
                .on_propose(&proposal)
                .map_err(|e| RunFailure::Shadow(e.to_string()))?;
        }
        self.emit(
            Some(from),
            "propose",
            label,
            json!({ "to": to, "give": give, "want": want }),
            json!({ "proposal": proposal.id }),
        )
    }

    fn open_result(&mut self, event: &Event, case: CaseId) -> Result<(), RunFailure> {
        if let Some(label) = &event.label {
            self.labels.insert(label.clone(), case);
        }
        let actor = event.kind.actor().cloned();
        self.emit(
            actor.as_ref(),
            &Self::action_name(&event.kind),
            event.label.as_ref(),
            Self::params_of(&event.kind),
            json!({ "case": case }),
        )
    }

    fn apply_event(&mut self, event: &Event, action: &str) -> Result<(), RunFailure> {
        let label = event.label.as_ref();
        match &event.kind {
            EventKind::Mint {
                actor,
                count,
                maturity,
            } => self.mint_step(actor, *count, *maturity, label),
            EventKind::AdvanceDate { actor, to } => {
                self.world
                    .advance(actor, *to)
                    .map_err(|e| self.event_error(action, e))?;
                if let Some(shadow) = self.shadow.as_mut() {
                    shadow
                        .on_advance(actor, *to)
                        .map_err(|e| RunFailure::Shadow(e.to_string()))?;
                }
                self.emit(Some(actor), action, label, json!({ "to": to }), json!({}))
            }
            EventKind::AdvanceAll { to } => {
                let moved = self.world.advance_all(*to);
                if let Some(shadow) = self.shadow.as_mut() {
                    for agent in &moved {
                        shadow
                            .on_advance(agent, *to)
                            .map_err(|e| RunFailure::Shadow(e.to_string()))?;
                    }
                }
                self.emit(
                    None,
                    action,
                    label,
                    json!({ "to": to }),
                    json!({ "advanced": moved }),
                )
            }
            EventKind::Propose {
                from,
                to,
                give,
                want,
            } => self.propose_step(from, to, give, want, label),
            EventKind::Accept { actor, from } | EventKind::AcceptInstrument { actor, from } => {
                let id = self
                    .world
                    .accept_pending(actor, from)
                    .map_err(|e| self.event_error(action, e))?;
                self.emit(
                    Some(actor),
                    "accept",
                    label,
                    json!({ "from": from }),
                    json!({ "proposal": id }),
                )
            }
            EventKind::Reject { actor, from } => {
                let id = self
                    .world
                    .reject_pending(actor, from)
                    .map_err(|e| self.event_error(action, e))?;
                self.emit(
                    Some(actor),
                    "reject",
                    label,
                    json!({ "from": from }),
                    json!({ "proposal": id }),
                )
            }
            EventKind::Instrument { spec } => {
                let plan = plan_instrument(spec).map_err(|e| self.event_error(action, e))?;
                self.emit(
                    Some(&plan.proposer.clone()),
                    action,
                    label,
                    Self::params_of(&event.kind),
                    json!({
                        "proposer": plan.proposer,
                        "counterparty": plan.counterparty,
                        "mints": plan.mints.len(),
                    }),
                )?;
                for mo in &plan.mints {
                    if self.stopped {
                        return Ok(());
                    }
                    self.mint_step(&mo.agent.clone(), mo.count, mo.maturity, label)?;
                }
                if self.stopped {
                    return Ok(());
                }
                self.propose_step(
                    &plan.proposer.clone(),
                    &plan.counterparty.clone(),
                    &plan.swap.give,
                    &plan.swap.want,
                    label,
                )
            }
            EventKind::DepositEscrow {
                depositor,
                beneficiary,
                lots,
                release_day,
            } => {
                let before = self.escrow_before();
                let case = self
                    .world
                    .open_timed_release(depositor, beneficiary, lots, *release_day)
                    .map_err(|e| self.event_error(action, e))?;
                self.escrow_sync(before)?;
                self.open_result(event, case)
            }
            EventKind::CancelEscrow { actor, case } => {
                let case = self.resolve_case(case, action)?;
                let before = self.escrow_before();
                let events = self
                    .world
                    .cancel_timed_release(case, actor)
                    .map_err(|e| self.event_error(action, e))?;
                self.escrow_sync(before)?;
                self.emit(
                    Some(actor),
                    action,
                    label,
                    json!({ "case": case }),
                    json!({ "events": events }),
                )
            }
            EventKind::OpenCollateral {
                depositor,
                beneficiary,
                reference,
                lots,
                expiry,
            }
            | EventKind::OpenGuarantee {
                depositor,
                beneficiary,
                reference,
                lots,
                expiry,
            } => {
                let guarantee = matches!(event.kind, EventKind::OpenGuarantee { .. });
                let before = self.escrow_before();
                let case = self
                    .world
                    .open_adjudicated(guarantee, depositor, beneficiary, reference, lots, *expiry)
                    .map_err(|e| self.event_error(action, e))?;
                self.escrow_sync(before)?;
                self.open_result(event, case)
            }
            EventKind::OpenOption {
                holder,
                writer,
                style,
                premium,
                strike,
                underlying,
                exercise_deadline,
                establish_by,
            } => {
                let case = self
                    .world
                    .open_option(
                        holder,
                        writer,
                        *style,
                        premium,
                        strike,
                        underlying,
                        *exercise_deadline,
                        *establish_by,
                    )
                    .map_err(|e| self.event_error(action, e))?;
                self.open_result(event, case)
            }
            EventKind::DepositOptionLeg { actor, case } => {
                let case = self.resolve_case(case, action)?;
                let before = self.escrow_before();
                let events = self
                    .world
                    .deposit_option_leg(case, actor)
                    .map_err(|e| self.event_error(action, e))?;
                self.escrow_sync(before)?;
                self.emit(
                    Some(actor),
                    action,
                    label,
                    json!({ "case": case }),
                    json!({ "events": events }),
                )
            }
            EventKind::Exercise { actor, case } => {
                let case = self.resolve_case(case, action)?;
                let before = self.escrow_before();
                let events = self
                    .world
                    .exercise_option(case, actor)
                    .map_err(|e| self.event_error(action, e))?;
                self.escrow_sync(before)?;
                self.emit(
                    Some(actor),
                    action,
                    label,
                    json!({ "case": case }),
                    json!({ "events": events }),
                )
            }
            EventKind::OpenInsurance {
                insurer,
                insured,
                subject,
                payout,
                reserves,
                expiry,
            } => {
                let before = self.escrow_before();
                let case = self
                    .world
                    .open_insurance(insurer, insured, subject, payout, reserves, *expiry)
                    .map_err(|e| self.event_error(action, e))?;
                self.escrow_sync(before)?;
                self.open_result(event, case)
            }
            EventKind::OpenCds {
                seller,
                buyer,
                reference,
                reserves,
                premiums,
                expiry,
            } => {
                let before = self.escrow_before();
                let case = self
                    .world
                    .open_cds(seller, buyer, reference, reserves, premiums, *expiry)
                    .map_err(|e| self.event_error(action, e))?;
                self.escrow_sync(before)?;
                self.open_result(event, case)
            }
            EventKind::PayPremium { case, day } => {
                let case = self.resolve_case(case, action)?;
                let before = self.escrow_before();
                let events = self
                    .world
                    .pay_premium(case, *day)
                    .map_err(|e| self.event_error(action, e))?;
                self.escrow_sync(before)?;
                self.emit(
                    None,
                    action,
                    label,
                    json!({ "case": case, "day": day }),
                    json!({ "events": events }),
                )
            }
            EventKind::OpenLetterOfCredit {
                bank,
                buyer,
                seller,
                subject,
                payment,
                reimbursement,
            } => {
                let before = self.escrow_before();
                let case = self
                    .world
                    .open_letter_of_credit(bank, buyer, seller, subject, payment, reimbursement)
                    .map_err(|e| self.event_error(action, e))?;
                self.escrow_sync(before)?;
                self.open_result(event, case)
            }
            EventKind::DepositLocReimbursement { case } => {
                let case = self.resolve_case(case, action)?;
                let before = self.escrow_before();
                let events = self
                    .world
                    .deposit_loc_reimbursement(case)
                    .map_err(|e| self.event_error(action, e))?;
                self.escrow_sync(before)?;
                self.emit(
                    None,
                    action,
                    label,
                    json!({ "case": case }),
                    json!({ "events": events }),
                )
            }
            EventKind::OpenCreditLine {
                lender,
                borrower,
                limit,
                rate,
                coin_maturity,
                schedule,
                expiry,
            } => {
                let RateSpec { num, den } = *rate;
                if den == 0 {
                    return Err(self.event_error(action, "rate denominator is zero"));
                }
                let before = self.escrow_before();
                let case = self
                    .world
                    .open_credit_line(
                        lender,
                        borrower,
                        *limit,
                        Rate::new(num, den),
                        *coin_maturity,
                        schedule,
                        *expiry,
                    )
                    .map_err(|e| self.event_error(action, e))?;
                self.escrow_sync(before)?;
                self.open_result(event, case)
            }
            EventKind::Draw { case, amount } => {
                let case = self.resolve_case(case, action)?;
                let before = self.escrow_before();
                let events = self
                    .world
                    .draw(case, *amount)
                    .map_err(|e| self.event_error(action, e))?;
                self.escrow_sync(before)?;
                self.emit(
                    None,
                    action,
                    label,
                    json!({ "case": case, "amount": amount }),
                    json!({ "events": events }),
                )
            }
            EventKind::Repay { case, amount } => {
                let case = self.resolve_case(case, action)?;
                let before = self.escrow_before();
                let events = self
                    .world
                    .repay(case, *amount)
                    .map_err(|e| self.event_error(action, e))?;
                self.escrow_sync(before)?;
                self.emit(
                    None,
                    action,
                    label,
                    json!({ "case": case, "amount": amount }),
                    json!({ "events": events }),
                )
            }
            EventKind::OracleSet {
                kind,
                subject,
                day,
                amount,
            } => {
                self.world.assert_fact(OracleFact {
                    kind: *kind,
                    subject: subject.clone(),
                    day: *day,
                    value: amount.map(OracleValue::Amount).unwrap_or(OracleValue::Flag),
                });
                self.emit(None, action, label, Self::params_of(&event.kind), json!({}))
            }
            EventKind::AssertHolding { actor, holdings } => {
                let held = self
                    .world
                    .ledger(actor)
                    .map_err(|e| self.event_error(action, e))?
                    .holdings()
                    .as_lots();
                let expected = normalize_lots(holdings);
                if held != expected {
                    return Err(RunFailure::AssertFailed {
                        seq: self.seq,
                        detail: format!(
                            "{actor} holds {}, expected {}",
                            lots_summary(&held),
                            lots_summary(&expected)
                        ),
                    });
                }
                self.emit(
                    Some(actor),
                    action,
                    label,
                    Self::params_of(&event.kind),
                    json!({ "ok": true }),
                )
            }
            EventKind::AssertRatios {
                actor,
                cash_assets,
                quick_assets,
                current_assets,
                current_liabilities,
            } => {
                let snap = self.world.snapshot();
                let config = LiquidityConfig {
                    delta: self.config.delta,
                    big_delta: self.config.big_delta,
                };
                let report =
                    ratios(&snap, actor, &config).map_err(|e| self.event_error(action, e))?;
                let got = (
                    report.cash_assets,
                    report.quick_assets,
                    report.current_assets,
                    report.current_liabilities,
                );
                let expected = (
                    *cash_assets,
                    *quick_assets,
                    *current_assets,
                    *current_liabilities,
                );
                if got != expected {
                    return Err(RunFailure::AssertFailed {
                        seq: self.seq,
                        detail: format!(
                            "{actor} ratios (cash, quick, current, liabilities) are {got:?}, expected {expected:?}"
                        ),
                    });
                }
                self.emit(
                    Some(actor),
                    action,
                    label,
                    Self::params_of(&event.kind),
                    json!({ "ok": true }),
                )
            }
            EventKind::AssertCirculation {
                total,
                foreign_each,
                foreign,
                outstanding,
            } => {
                let snap = self.world.snapshot();
                let report = circulation(&snap);
                if let Some(total) = total {
                    if report.total != *total {
                        return Err(RunFailure::AssertFailed {
                            seq: self.seq,
                            detail: format!(
                                "total circulation is {}, expected {total}",
                                report.total
                            ),
                        });
                    }
                }
                if let Some(each) = foreign_each {
                    for (agent, held) in &report.foreign_held {
                        if held != each {
                            return Err(RunFailure::AssertFailed {
                                seq: self.seq,
                                detail: format!(
                                    "{agent} holds {held} foreign bonds, expected {each}"
                                ),
                            });
                        }
                    }
                }
                for (expected, actual, what) in [
                    (foreign, &report.foreign_held, "foreign holdings"),
                    (outstanding, &report.outstanding, "outstanding issue"),
                ] {
                    if let Some(expected) = expected {
                        for (agent, count) in expected {
                            let got = actual.get(agent).copied().unwrap_or(0);
                            if got != *count {
                                return Err(RunFailure::AssertFailed {
                                    seq: self.seq,
                                    detail: format!("{what} of {agent} is {got}, expected {count}"),
                                });
                            }
                        }
                    }
                }
                self.emit(
                    None,
                    action,
                    label,
                    Self::params_of(&event.kind),
                    json!({ "ok": true }),
                )
            }
        }
    }
}

fn class_name(class: bonds_core::trade::TradeClass) -> &'static str {
    match class {
        bonds_core::trade::TradeClass::Payment => "payment",
        bonds_core::trade::TradeClass::Redemption => "redemption",
        bonds_core::trade::TradeClass::Normal => "normal",
    }
}

fn lots_summary(lots: &[Lot]) -> String {
    if lots.is_empty() {
        return "nothing".to_string();
    }
    lots.iter()
        .map(|l| format!("{}x({}@{})", l.count, l.issuer, l.maturity))
        .collect::<Vec<_>>()
        .join(" + ")
}

// Re-exported for the report command: what one agent's world looks like.
pub fn world_report(world: &World, at_seq: Option<u64>) -> Value {
    let mut agents = serde_json::Map::new();
    for (agent, ledger) in world.ledgers() {
        agents.insert(
            agent.to_string(),
            json!({
                "local_date": ledger.local_date(),
                "minted": ledger.next_serial(),
                "holdings": ledger.holdings().as_lots(),
            }),
        );
    }
    let snap = world.snapshot();
    let report = circulation(&snap);
    let mut pending: Vec<Value> = Vec::new();
    for proposal in world.iter_inbox() {
        pending.push(json!({
            "proposal": proposal.id,
            "from": proposal.from,
            "to": proposal.to,
            "offered": proposal.offered.as_lots(),
            "want": proposal.want,
        }));
    }
    let escrow: Vec<Value> = world
        .escrow_case_summaries()
        .into_iter()
        .map(|(id, kind, closed, lots)| {
            json!({ "case": id, "kind": kind, "closed": closed, "holds": lots })
        })
        .collect();
    let mut out = json!({
        "agents": agents,
        "pending_trades": pending,
        "escrow_cases": escrow,
        "circulation": {
            "total": report.total,
            "outstanding": report.outstanding,
            "foreign_held": report.foreign_held,
        },
    });
    if let Some(seq) = at_seq {
        out["at_seq"] = json!(seq);
    }
    out
}
