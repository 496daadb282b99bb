//! A shadow of the run in kernel terms, for correctness checking.
//!
//! The simulator moves bonds through wires, inboxes, and escrow cases; the
//! kernel knows none of that. This module replays every run as the kernel
//! sees it: agents will transaction classes, enabled transactions execute
//! atomically, and nothing else happens. The mapping:
//!
//! - a proposal publishes the proposer's will for the class the trade
//!   would commit as;
//! - the commit happens when the response settles: remaining guards gain
//!   transient wills and the class executes as one machine step;
//! - a decline retracts the proposer's will;
//! - escrow movements become swaps with the escrow agent, who stands in
//!   for case custody, willed transiently on both sides.
//!
//! In the shadow, bonds locked in proposals or cases still sit with their
//! owner-to-be, so shadow ledgers and world ledgers agree whenever the
//! wire is quiet; [`KernelShadow::finish`] checks exactly that.

use std::collections::BTreeMap;

use bonds_core::bond::{AgentId, Day, Lot};
use bonds_core::trade::TradeProposal;
use bonds_core::{
    execute_volitional, Configuration, GuardedTxn, KernelError, RunTrace, StepAction, TraceStep,
    TransactionClass, TxnSpec, VolitionError,
};

use crate::world::World;

/// Effective holdings per agent, at lot granularity. Proposal custody
/// counts for the proposer, escrow custody for the escrow agent.
pub type LotsView = BTreeMap<AgentId, BTreeMap<(AgentId, Day), i64>>;

#[derive(Debug, thiserror::Error)]
pub enum ShadowError {
    #[error("kernel refused a mirrored step: {0}")]
    Kernel(KernelError),
    #[error("volition bookkeeping failed: {0}")]
    Volition(VolitionError),
    #[error("shadow diverged from the world at {agent}: {detail}")]
    Diverged { agent: AgentId, detail: String },
}

impl From<KernelError> for ShadowError {
    fn from(e: KernelError) -> Self {
        ShadowError::Kernel(e)
    }
}

impl From<VolitionError> for ShadowError {
    fn from(e: VolitionError) -> Self {
        ShadowError::Volition(e)
    }
}

pub struct KernelShadow {
    config: Configuration,
    trace: RunTrace,
    /// Class willed per outstanding proposal, for retraction on decline.
    willed: BTreeMap<u64, TransactionClass>,
}

impl KernelShadow {
    /// Mirror a fresh world: same agents, empty ledgers, empty wills.
    pub fn new(world: &World) -> Self {
        let mut config = Configuration::new();
        for agent in world.ledgers().keys() {
            config.insert_agent(bonds_core::AgentLedger::new(agent.clone()));
        }
        let trace = RunTrace {
            initial: config.clone(),
            steps: Vec::new(),
        };
        KernelShadow {
            config,
            trace,
            willed: BTreeMap::new(),
        }
    }

    fn push(&mut self, action: StepAction) {
        self.trace.steps.push(TraceStep {
            action,
            after: self.config.clone(),
        });
    }

    /// Add `class` to an agent's volition set if absent.
    fn will(&mut self, agent: &AgentId, class: &TransactionClass) -> Result<(), ShadowError> {
        let state = self
            .config
            .agents
            .get_mut(agent)
            .ok_or_else(|| KernelError::UnknownAgent {
                agent: agent.clone(),
            })?;
        if state.volition.wills(class) {
            return Ok(());
        }
        state.volition.change(core::slice::from_ref(class), &[])?;
        self.push(StepAction::ChangeVolition {
            agent: agent.clone(),
        });
        Ok(())
    }

    /// Drop `class` from an agent's volition set if present.
    fn unwill(&mut self, agent: &AgentId, class: &TransactionClass) -> Result<(), ShadowError> {
        let state = self
            .config
            .agents
            .get_mut(agent)
            .ok_or_else(|| KernelError::UnknownAgent {
                agent: agent.clone(),
            })?;
        if !state.volition.wills(class) {
            return Ok(());
        }
        state.volition.change(&[], core::slice::from_ref(class))?;
        self.push(StepAction::ChangeVolition {
            agent: agent.clone(),
        });
        Ok(())
    }

    /// Will whatever guards are missing, then execute as one machine step.
    fn execute(&mut self, spec: TxnSpec) -> Result<(), ShadowError> {
        let gt = GuardedTxn::new(spec);
        let class = gt.class();
        let guards: Vec<AgentId> = gt.spec().guards().into_iter().cloned().collect();
        for guard in guards {
            self.will(&guard, &class)?;
        }
        execute_volitional(&gt, &mut self.config)?;
        self.push(StepAction::Machine(class));
        Ok(())
    }

    pub fn on_mint(
        &mut self,
        issuer: &AgentId,
        count: u64,
        maturity: Day,
    ) -> Result<(), ShadowError> {
        self.execute(TxnSpec::Mint {
            issuer: issuer.clone(),
            count,
            maturity,
        })
    }

    pub fn on_advance(&mut self, agent: &AgentId, to_day: Day) -> Result<(), ShadowError> {
        self.execute(TxnSpec::AdvanceDate {
            agent: agent.clone(),
            to_day,
        })
    }

    /// The class a proposal would commit as, judged against shadow state:
    /// a strict payment, a redemption the kernel would accept, or a swap.
    fn commit_class(&self, p: &TradeProposal) -> TransactionClass {
        let give = p.offered.as_lots();
        let from_state = self.config.agents.get(&p.from);
        if p.want.is_empty() {
            let strict = !give.is_empty()
                && from_state.is_some_and(|s| {
                    give.iter()
                        .all(|l| l.issuer == p.to && l.maturity <= s.ledger.local_date())
                });
            if strict {
                return TxnSpec::pay(p.from.clone(), p.to.clone(), give).class();
            }
            return TxnSpec::swap(p.from.clone(), give, p.to.clone(), Vec::new()).class();
        }
        if give.len() == 1
            && give[0].count == 1
            && give[0].issuer == p.to
            && p.want.len() == 1
            && p.want[0].count == 1
        {
            let coin_maturity = give[0].maturity;
            let holder_ok = from_state.is_some_and(|s| {
                coin_maturity <= s.ledger.local_date()
                    && s.ledger
                        .holdings()
                        .first_exact(&p.to, coin_maturity)
                        .is_some()
            });
            let issuer_ok = self.config.agents.get(&p.to).is_some_and(|s| {
                s.ledger
                    .holdings()
                    .first_exact(&p.want[0].issuer, p.want[0].maturity)
                    .is_some()
            });
            if holder_ok && issuer_ok {
                return TransactionClass::Redeem {
                    holder: p.from.clone(),
                    issuer: p.to.clone(),
                    coin_maturity,
                    wanted: p.want[0].clone(),
                };
            }
        }
        TxnSpec::swap(p.from.clone(), give, p.to.clone(), p.want.clone()).class()
    }

    /// A proposal went out: the proposer publishes its will.
    pub fn on_propose(&mut self, p: &TradeProposal) -> Result<(), ShadowError> {
        let class = self.commit_class(p);
        self.will(&p.from, &class)?;
        self.willed.insert(p.id, class);
        Ok(())
    }

    /// A response settled (`completed`) or came back declined.
    pub fn on_settle(
        &mut self,
        remembered: &TradeProposal,
        completed: bool,
    ) -> Result<(), ShadowError> {
        let old = self.willed.remove(&remembered.id);
        if !completed {
            if let Some(class) = old {
                self.unwill(&remembered.from, &class)?;
            }
            return Ok(());
        }
        let fresh = self.commit_class(remembered);
        if let Some(class) = old {
            if class != fresh {
                // The world moved since the proposal; the published will
                // follows the trade that actually commits.
                self.unwill(&remembered.from, &class)?;
            }
        }
        let spec = match fresh {
            TransactionClass::Pay { payer, payee, lots } => TxnSpec::Pay { payer, payee, lots },
            TransactionClass::Redeem {
                holder,
                issuer,
                coin_maturity,
                wanted,
            } => TxnSpec::Redeem {
                holder,
                issuer,
                coin_maturity,
                wanted,
            },
            TransactionClass::Swap { a, x, b, y } => TxnSpec::Swap { a, x, b, y },
            other => unreachable!("trades never commit as {other:?}"),
        };
        self.execute(spec)
    }

    /// Lot-level view of the world as the shadow models it. Only valid
    /// when the wire is quiet.
    pub fn lots_view(world: &World) -> LotsView {
        debug_assert!(world.wire_is_quiet(), "views compare only at quiescence");
        let mut view = LotsView::new();
        let mut add = |owner: &AgentId, issuer: &AgentId, maturity: Day, count: i64| {
            *view
                .entry(owner.clone())
                .or_default()
                .entry((issuer.clone(), maturity))
                .or_insert(0) += count;
        };
        for (agent, ledger) in world.ledgers() {
            for run in ledger.holdings().runs() {
                add(agent, &run.issuer, run.maturity, run.count as i64);
            }
        }
        for proposal in world.iter_inbox() {
            for run in proposal.offered.runs() {
                add(&proposal.from, &run.issuer, run.maturity, run.count as i64);
            }
        }
        if let Some(esc) = world.escrow_agent() {
            let esc = esc.clone();
            for (_, _, bonds) in world.escrow_custody() {
                for run in bonds.runs() {
                    add(&esc, &run.issuer, run.maturity, run.count as i64);
                }
            }
        }
        view
    }

    /// Mirror whatever an escrow operation (or tick) did: fresh mints
    /// first, then every movement as a swap through the escrow agent.
    pub fn sync_escrow(&mut self, before: &LotsView, world: &World) -> Result<(), ShadowError> {
        let after = Self::lots_view(world);
        let hub = match world.escrow_agent() {
            Some(h) => h.clone(),
            // No escrow desk means nothing can have happened.
            None => return Ok(()),
        };

        // Net new bonds per (issuer, maturity) are mints by that issuer.
        let mut totals: BTreeMap<(AgentId, Day), i64> = BTreeMap::new();
        for holdings in after.values() {
            for (key, count) in holdings {
                *totals.entry(key.clone()).or_insert(0) += count;
            }
        }
        for holdings in before.values() {
            for (key, count) in holdings {
                *totals.entry(key.clone()).or_insert(0) -= count;
            }
        }
        let mut minted: BTreeMap<(AgentId, Day), i64> = BTreeMap::new();
        for ((issuer, maturity), delta) in totals {
            debug_assert!(delta >= 0, "bonds never vanish");
            if delta > 0 {
                self.on_mint(&issuer, delta as u64, maturity)?;
                minted.insert((issuer, maturity), delta);
            }
        }

        // Outflows and inflows per agent, fresh mints credited to their
        // issuer before differencing.
        let empty = BTreeMap::new();
        let agents: Vec<AgentId> = world.ledgers().keys().cloned().collect();
        let mut outflows: Vec<(AgentId, Vec<Lot>)> = Vec::new();
        let mut inflows: Vec<(AgentId, Vec<Lot>)> = Vec::new();
        for agent in &agents {
            if *agent == hub {
                continue;
            }
            let b = before.get(agent).unwrap_or(&empty);
            let a = after.get(agent).unwrap_or(&empty);
            // Fresh mints are credited to the issuer below, so their keys
            // matter even when the paper never rests in the issuer's ledger.
            let mut keys: Vec<&(AgentId, Day)> = b
                .keys()
                .chain(a.keys())
                .chain(minted.keys().filter(|k| k.0 == *agent))
                .collect();
            keys.sort();
            keys.dedup();
            let mut out = Vec::new();
            let mut inn = Vec::new();
            for key in keys {
                let mut held = *b.get(key).unwrap_or(&0);
                if key.0 == *agent {
                    held += minted.get(key).copied().unwrap_or(0);
                }
                let now = *a.get(key).unwrap_or(&0);
                if now < held {
                    out.push(Lot::new(key.0.clone(), key.1, (held - now) as u64));
                } else if now > held {
                    inn.push(Lot::new(key.0.clone(), key.1, (now - held) as u64));
                }
            }
            if !out.is_empty() {
                outflows.push((agent.clone(), out));
            }
            if !inn.is_empty() {
                inflows.push((agent.clone(), inn));
            }
        }
        // All surrenders first, so the hub can cover every award.
        for (agent, lots) in outflows {
            self.execute(TxnSpec::swap(agent, lots, hub.clone(), Vec::new()))?;
        }
        for (agent, lots) in inflows {
            self.execute(TxnSpec::swap(hub.clone(), lots, agent, Vec::new()))?;
        }
        Ok(())
    }

    /// Check shadow ledgers against the world and hand back the kernel
    /// trace for the correct-run verdict.
    pub fn finish(self, world: &World) -> Result<RunTrace, ShadowError> {
        let view = Self::lots_view(world);
        let empty = BTreeMap::new();
        for (agent, state) in &self.config.agents {
            let expect = view.get(agent).unwrap_or(&empty);
            let mut got: BTreeMap<(AgentId, Day), i64> = BTreeMap::new();
            for run in state.ledger.holdings().runs() {
                *got.entry((run.issuer.clone(), run.maturity)).or_insert(0) += run.count as i64;
            }
            let expect: BTreeMap<_, _> = expect
                .iter()
                .filter(|(_, c)| **c != 0)
                .map(|(k, c)| (k.clone(), *c))
                .collect();
            if got != expect {
                return Err(ShadowError::Diverged {
                    agent: agent.clone(),
                    detail: format!("shadow holds {got:?}, world implies {expect:?}"),
                });
            }
        }
        Ok(self.trace)
    }
}
