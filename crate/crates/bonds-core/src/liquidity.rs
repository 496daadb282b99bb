//! Liquidity analytics: who could pay whom, and when.
//!
//! All quantities derive from one counting function: how many bonds issued
//! by `p` with maturity on or before `t` does `q` hold. An agent's own
//! bonds never count as its assets (debt to oneself is void), and every
//! horizon is measured on the asset holder's own local date, because no
//! other calendar exists.
//!
//! Custody rules for counting:
//!
//! - bonds locked in an outstanding trade proposal still count as the
//!   *proposer's* assets (they come back on decline, or buy something of
//!   agreed value on accept);
//! - bonds parked in escrow count as nobody's assets, but they remain the
//!   issuer's liability and stay in circulation.
//!
//! Ratios are reported as raw integer numerators over a liability
//! denominator, never as floats; rendering is the caller's business.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;
use core::fmt;

use crate::bond::{AgentId, BondMultiset, Day, Serial};
use crate::escrow::Rate;
use crate::ledger::AgentLedger;

/// Windows for the quick and current horizons, in days past the agent's
/// local date.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct LiquidityConfig {
    /// Quick horizon: debt becoming money soon.
    pub delta: Day,
    /// Current horizon: debt becoming money within the accounting period.
    pub big_delta: Day,
}

impl Default for LiquidityConfig {
    fn default() -> Self {
        LiquidityConfig {
            delta: 90,
            big_delta: 360,
        }
    }
}

/// A still snapshot of everything that holds bonds, assembled from parts
/// so that callers decide exactly which custody exists.
#[derive(Clone, Default, Debug)]
pub struct LiquiditySnapshot {
    agents: BTreeMap<AgentId, AgentView>,
    /// Bonds locked in proposals, attributed to their proposer.
    proposals: Vec<(AgentId, BondMultiset)>,
    /// Bonds in escrow custody: no one's asset.
    escrow: Vec<BondMultiset>,
}

#[derive(Clone, Debug)]
struct AgentView {
    local_date: Day,
    minted: Serial,
    holdings: BondMultiset,
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub enum LiquidityError {
    UnknownAgent { agent: AgentId },
}

impl fmt::Display for LiquidityError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LiquidityError::UnknownAgent { agent } => write!(f, "no such agent: {agent}"),
        }
    }
}

impl core::error::Error for LiquidityError {}

impl LiquiditySnapshot {
    pub fn new() -> Self {
        LiquiditySnapshot::default()
    }

    pub fn add_agent(
        &mut self,
        owner: AgentId,
        local_date: Day,
        minted: Serial,
        holdings: BondMultiset,
    ) {
        self.agents.insert(
            owner,
            AgentView {
                local_date,
                minted,
                holdings,
            },
        );
    }

    pub fn add_proposal(&mut self, proposer: AgentId, bonds: BondMultiset) {
        if !bonds.is_empty() {
            self.proposals.push((proposer, bonds));
        }
    }

    pub fn add_escrow(&mut self, bonds: BondMultiset) {
        if !bonds.is_empty() {
            self.escrow.push(bonds);
        }
    }

    /// Snapshot a plain world of ledgers with no other custody.
    pub fn from_ledgers<'a>(ledgers: impl IntoIterator<Item = &'a AgentLedger>) -> Self {
        let mut snap = LiquiditySnapshot::new();
        for ledger in ledgers {
            snap.add_agent(
                ledger.owner().clone(),
                ledger.local_date(),
                ledger.next_serial(),
                ledger.holdings().clone(),
            );
        }
        snap
    }

    pub fn local_date(&self, agent: &AgentId) -> Result<Day, LiquidityError> {
        self.agents
            .get(agent)
            .map(|v| v.local_date)
            .ok_or_else(|| LiquidityError::UnknownAgent {
                agent: agent.clone(),
            })
    }

    pub fn agent_ids(&self) -> impl Iterator<Item = &AgentId> {
        self.agents.keys()
    }

    /// The holder's asset multisets: ledger holdings plus anything it has
    /// locked into its own proposals.
    fn assets_of<'s>(&'s self, holder: &AgentId) -> impl Iterator<Item = &'s BondMultiset> + 's {
        let own = self.agents.get(holder).map(|v| &v.holdings).into_iter();
        let holder = holder.clone();
        own.chain(
            self.proposals
                .iter()
                .filter(move |(p, _)| *p == holder)
                .map(|(_, b)| b),
        )
    }
}

/// Bonds issued by `issuer`, maturing on or before `through`, counted as
/// the assets of `holder`. Zero when holder and issuer coincide.
pub fn nu(snapshot: &LiquiditySnapshot, issuer: &AgentId, through: Day, holder: &AgentId) -> u64 {
    if issuer == holder {
        return 0;
    }
    snapshot
        .assets_of(holder)
        .map(|b| b.count_issuer_through(issuer, through))
        .sum()
}

/// Raw liquidity counts for one agent: three asset windows over one
/// liability denominator. Kept as integers so nothing is rounded away.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct RatioReport {
    /// Foreign bonds already money today.
    pub cash_assets: u64,
    /// Foreign bonds money within `delta`.
    pub quick_assets: u64,
    /// Foreign bonds money within `big_delta`.
    pub current_assets: u64,
    /// Own bonds falling due within `big_delta`, wherever they sit.
    pub current_liabilities: u64,
}

impl RatioReport {
    fn over(&self, numerator: u64) -> Option<Rate> {
        if self.current_liabilities == 0 {
            None
        } else {
            Some(Rate::new(numerator, self.current_liabilities))
        }
    }

    /// `None` means the agent owes nothing within the horizon, so every
    /// ratio is vacuously perfect and no number exists.
    pub fn cash_ratio(&self) -> Option<Rate> {
        self.over(self.cash_assets)
    }

    pub fn quick_ratio(&self) -> Option<Rate> {
        self.over(self.quick_assets)
    }

    pub fn current_ratio(&self) -> Option<Rate> {
        self.over(self.current_assets)
    }
}

/// Compute the three asset windows and the liability denominator for one
/// agent, on that agent's own calendar.
pub fn ratios(
    snapshot: &LiquiditySnapshot,
    agent: &AgentId,
    config: &LiquidityConfig,
) -> Result<RatioReport, LiquidityError> {
    let today = snapshot.local_date(agent)?;
    let quick_cut = today.saturating_add(config.delta);
    let current_cut = today.saturating_add(config.big_delta);

    let mut cash = 0u64;
    let mut quick = 0u64;
    let mut current = 0u64;
    for bonds in snapshot.assets_of(agent) {
        for run in bonds.runs() {
            if run.issuer == *agent {
                continue;
            }
            if run.maturity <= current_cut {
                current += run.count;
                if run.maturity <= quick_cut {
                    quick += run.count;
                    if run.maturity <= today {
                        cash += run.count;
                    }
                }
            }
        }
    }

    // Everything this agent issued that falls due within the horizon,
    // whoever holds it: other ledgers, locked proposals, escrow.
    let mut liabilities = 0u64;
    for holder in snapshot.agents.keys() {
        liabilities += nu(snapshot, agent, current_cut, holder);
    }
    for bonds in &snapshot.escrow {
        liabilities += bonds.count_issuer_through(agent, current_cut);
    }

    Ok(RatioReport {
        cash_assets: cash,
        quick_assets: quick,
        current_assets: current,
        current_liabilities: liabilities,
    })
}

/// How much of each issuer's paper is out of its hands, and how much
/// foreign paper each agent holds.
#[derive(Clone, PartialEq, Eq, Default, Debug)]
pub struct CirculationReport {
    /// Per issuer: bonds it minted that are not (effectively) back in its
    /// own holdings.
    pub outstanding: BTreeMap<AgentId, u64>,
    /// Per holder: foreign bonds among its effective assets.
    pub foreign_held: BTreeMap<AgentId, u64>,
    /// Total outstanding across all issuers.
    pub total: u64,
}

/// Count circulation across the whole snapshot. Bonds in escrow stay in
/// circulation (the issuer's promise is still out there); bonds an issuer
/// locked into its own proposal do not (they are effectively its own).
pub fn circulation(snapshot: &LiquiditySnapshot) -> CirculationReport {
    let mut report = CirculationReport::default();
    for (owner, view) in &snapshot.agents {
        let mut own_back = view.holdings.count_issuer_through(owner, Day::MAX);
        let mut foreign = view.holdings.len() - own_back;
        for (proposer, bonds) in &snapshot.proposals {
            if proposer == owner {
                let own_in_proposal = bonds.count_issuer_through(owner, Day::MAX);
                own_back += own_in_proposal;
                foreign += bonds.len() - own_in_proposal;
            }
        }
        report
            .outstanding
            .insert(owner.clone(), view.minted - own_back);
        report.foreign_held.insert(owner.clone(), foreign);
    }
    report.total = report.outstanding.values().sum();
    report
}
