//! Volitional execution: willing, enabledness, discharge, and trace checks.
//!
//! Concrete transactions are grouped into *classes*: a class keeps the
//! parameters an agent would consent to (who, which lots, which maturities)
//! and forgets incidental detail (which serials; for date advances, the
//! target day). Agents consent by adding classes to a volition set. A
//! guarded transaction may fire only when its machine preconditions hold and
//! every guard currently wills its class; firing *discharges* the class from
//! every agent's volition set at once, so one consent authorizes one
//! execution.
//!
//! The checkers treat a finite run as a sequence of configuration snapshots
//! and ask whether any class was left hanging: still enabled at the end of
//! the trace and never executed after the last moment it was disabled.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::vec::Vec;
use core::fmt;

use crate::bond::{normalize_lots, AgentId, BondMultiset, Day, Lot};
use crate::ledger::{apply_pay, apply_redeem, apply_swap, AgentLedger, TxnError};

/// A concrete transaction at lot granularity, before guard bookkeeping.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Debug)]
pub enum TxnSpec {
    Mint {
        issuer: AgentId,
        count: u64,
        maturity: Day,
    },
    AdvanceDate {
        agent: AgentId,
        to_day: Day,
    },
    /// Pairwise exchange: `x` moves from `a` to `b`, `y` the other way.
    /// Constructed so that `a < b`; use [`TxnSpec::swap`].
    Swap {
        a: AgentId,
        x: Vec<Lot>,
        b: AgentId,
        y: Vec<Lot>,
    },
    Pay {
        payer: AgentId,
        payee: AgentId,
        lots: Vec<Lot>,
    },
    Redeem {
        holder: AgentId,
        issuer: AgentId,
        coin_maturity: Day,
        wanted: Lot,
    },
}

impl TxnSpec {
    /// Build a swap in normal form: parties ordered, lots normalized.
    pub fn swap(p: AgentId, x: Vec<Lot>, q: AgentId, y: Vec<Lot>) -> TxnSpec {
        let (x, y) = (normalize_lots(&x), normalize_lots(&y));
        if p <= q {
            TxnSpec::Swap { a: p, x, b: q, y }
        } else {
            TxnSpec::Swap {
                a: q,
                x: y,
                b: p,
                y: x,
            }
        }
    }

    /// Swap described by concrete bond multisets; serials are forgotten.
    pub fn swap_of_bonds(p: AgentId, x: &BondMultiset, q: AgentId, y: &BondMultiset) -> TxnSpec {
        TxnSpec::swap(p, x.as_lots(), q, y.as_lots())
    }

    pub fn pay(payer: AgentId, payee: AgentId, lots: Vec<Lot>) -> TxnSpec {
        TxnSpec::Pay {
            payer,
            payee,
            lots: normalize_lots(&lots),
        }
    }

    /// Agents whose ledgers the transaction touches.
    pub fn participants(&self) -> Vec<&AgentId> {
        match self {
            TxnSpec::Mint { issuer, .. } => [issuer].into(),
            TxnSpec::AdvanceDate { agent, .. } => [agent].into(),
            TxnSpec::Swap { a, b, .. } => [a, b].into(),
            TxnSpec::Pay { payer, payee, .. } => [payer, payee].into(),
            TxnSpec::Redeem { holder, issuer, .. } => [holder, issuer].into(),
        }
    }

    /// Agents whose consent the transaction needs. Date advances are
    /// unguarded; payments and redemptions bind only their initiator, since
    /// nobody may refuse their own matured debt.
    pub fn guards(&self) -> Vec<&AgentId> {
        match self {
            TxnSpec::Mint { issuer, .. } => [issuer].into(),
            TxnSpec::AdvanceDate { .. } => Vec::new(),
            TxnSpec::Swap { a, b, .. } => [a, b].into(),
            TxnSpec::Pay { payer, .. } => [payer].into(),
            TxnSpec::Redeem { holder, .. } => [holder].into(),
        }
    }

    /// The equivalence class this transaction belongs to.
    pub fn class(&self) -> TransactionClass {
        match self {
            TxnSpec::Mint {
                issuer,
                count,
                maturity,
            } => TransactionClass::Mint {
                issuer: issuer.clone(),
                count: *count,
                maturity: *maturity,
            },
            TxnSpec::AdvanceDate { agent, .. } => TransactionClass::AdvanceDate {
                agent: agent.clone(),
            },
            TxnSpec::Swap { a, x, b, y } => TransactionClass::Swap {
                a: a.clone(),
                x: normalize_lots(x),
                b: b.clone(),
                y: normalize_lots(y),
            },
            TxnSpec::Pay { payer, payee, lots } => TransactionClass::Pay {
                payer: payer.clone(),
                payee: payee.clone(),
                lots: normalize_lots(lots),
            },
            TxnSpec::Redeem {
                holder,
                issuer,
                coin_maturity,
                wanted,
            } => TransactionClass::Redeem {
                holder: holder.clone(),
                issuer: issuer.clone(),
                coin_maturity: *coin_maturity,
                wanted: wanted.clone(),
            },
        }
    }
}

/// What an agent consents to: a transaction up to incidental detail. All
/// date advances by one agent share a class; swaps, payments, and
/// redemptions are identified by their lot shapes, never by serials.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Debug)]
pub enum TransactionClass {
    Mint {
        issuer: AgentId,
        count: u64,
        maturity: Day,
    },
    AdvanceDate {
        agent: AgentId,
    },
    Swap {
        a: AgentId,
        x: Vec<Lot>,
        b: AgentId,
        y: Vec<Lot>,
    },
    Pay {
        payer: AgentId,
        payee: AgentId,
        lots: Vec<Lot>,
    },
    Redeem {
        holder: AgentId,
        issuer: AgentId,
        coin_maturity: Day,
        wanted: Lot,
    },
}

impl TransactionClass {
    pub fn participants(&self) -> Vec<&AgentId> {
        match self {
            TransactionClass::Mint { issuer, .. } => [issuer].into(),
            TransactionClass::AdvanceDate { agent } => [agent].into(),
            TransactionClass::Swap { a, b, .. } => [a, b].into(),
            TransactionClass::Pay { payer, payee, .. } => [payer, payee].into(),
            TransactionClass::Redeem { holder, issuer, .. } => [holder, issuer].into(),
        }
    }

    pub fn guards(&self) -> Vec<&AgentId> {
        match self {
            TransactionClass::Mint { issuer, .. } => [issuer].into(),
            TransactionClass::AdvanceDate { .. } => Vec::new(),
            TransactionClass::Swap { a, b, .. } => [a, b].into(),
            TransactionClass::Pay { payer, .. } => [payer].into(),
            TransactionClass::Redeem { holder, .. } => [holder].into(),
        }
    }
}

/// The set of classes one agent currently consents to.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct VolitionSet {
    owner: AgentId,
    willed: BTreeSet<TransactionClass>,
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub enum VolitionError {
    /// `add` and `remove` name the same class.
    AddRemoveOverlap { class: TransactionClass },
    /// The change would leave the set exactly as it is.
    NoChange,
}

impl fmt::Display for VolitionError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            VolitionError::AddRemoveOverlap { .. } => {
                f.write_str("a class appears in both add and remove")
            }
            VolitionError::NoChange => f.write_str("volition change is a no-op"),
        }
    }
}

impl core::error::Error for VolitionError {}

impl VolitionSet {
    pub fn new(owner: AgentId) -> Self {
        VolitionSet {
            owner,
            willed: BTreeSet::new(),
        }
    }

    pub fn owner(&self) -> &AgentId {
        &self.owner
    }

    pub fn wills(&self, class: &TransactionClass) -> bool {
        self.willed.contains(class)
    }

    pub fn iter(&self) -> impl Iterator<Item = &TransactionClass> {
        self.willed.iter()
    }

    pub fn is_empty(&self) -> bool {
        self.willed.is_empty()
    }

    /// Apply a volition change. Re-adding a previously discharged class is
    /// legal (consent can be renewed); a change that alters nothing is not.
    /// An agent may will classes it does not participate in; such consent is
    /// simply discharged along with everyone else's.
    pub fn change(
        &mut self,
        add: &[TransactionClass],
        remove: &[TransactionClass],
    ) -> Result<(), VolitionError> {
        for class in add {
            if remove.contains(class) {
                return Err(VolitionError::AddRemoveOverlap {
                    class: class.clone(),
                });
            }
        }
        let mut next = self.willed.clone();
        for class in remove {
            next.remove(class);
        }
        for class in add {
            next.insert(class.clone());
        }
        if next == self.willed {
            return Err(VolitionError::NoChange);
        }
        self.willed = next;
        Ok(())
    }

    /// Unconditionally drop a class (used by discharge).
    fn discharge(&mut self, class: &TransactionClass) {
        self.willed.remove(class);
    }
}

/// One agent's full state: volition plus ledger.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct AgentState {
    pub volition: VolitionSet,
    pub ledger: AgentLedger,
}

impl AgentState {
    pub fn new(ledger: AgentLedger) -> Self {
        AgentState {
            volition: VolitionSet::new(ledger.owner().clone()),
            ledger,
        }
    }
}

/// A configuration: every agent's state at one instant.
#[derive(Clone, PartialEq, Eq, Default, Debug)]
pub struct Configuration {
    pub agents: BTreeMap<AgentId, AgentState>,
}

impl Configuration {
    pub fn new() -> Self {
        Configuration::default()
    }

    pub fn insert_agent(&mut self, ledger: AgentLedger) {
        self.agents
            .insert(ledger.owner().clone(), AgentState::new(ledger));
    }

    pub fn state(&self, agent: &AgentId) -> Option<&AgentState> {
        self.agents.get(agent)
    }

    /// Restrict to a subset of agents (for interleaving projections).
    pub fn restricted_to(&self, keep: &BTreeSet<AgentId>) -> Configuration {
        Configuration {
            agents: self
                .agents
                .iter()
                .filter(|(id, _)| keep.contains(*id))
                .map(|(id, st)| (id.clone(), st.clone()))
                .collect(),
        }
    }
}

/// A transaction together with its guard set, fixed by its kind.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct GuardedTxn {
    spec: TxnSpec,
}

impl GuardedTxn {
    pub fn new(spec: TxnSpec) -> Self {
        GuardedTxn { spec }
    }

    pub fn spec(&self) -> &TxnSpec {
        &self.spec
    }

    pub fn class(&self) -> TransactionClass {
        self.spec.class()
    }
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub enum KernelError {
    UnknownAgent {
        agent: AgentId,
    },
    /// Machine preconditions fail or some guard does not will the class.
    NotEnabled {
        class: TransactionClass,
    },
    /// Machine execution failed despite the enabledness check; carries the
    /// underlying ledger error.
    Machine(TxnError),
}

impl fmt::Display for KernelError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            KernelError::UnknownAgent { agent } => write!(f, "no such agent: {agent}"),
            KernelError::NotEnabled { class } => {
                write!(f, "transaction is not enabled: {class:?}")
            }
            KernelError::Machine(e) => e.fmt(f),
        }
    }
}

impl core::error::Error for KernelError {}

fn state_of<'c>(config: &'c Configuration, agent: &AgentId) -> Result<&'c AgentState, KernelError> {
    config
        .agents
        .get(agent)
        .ok_or_else(|| KernelError::UnknownAgent {
            agent: agent.clone(),
        })
}

/// Machine preconditions of a whole class: can *some* member run? Serial
/// choice never matters; for date advances some larger day always exists.
pub fn class_machine_enabled(
    class: &TransactionClass,
    config: &Configuration,
) -> Result<bool, KernelError> {
    match class {
        TransactionClass::Mint { issuer, count, .. } => {
            state_of(config, issuer)?;
            Ok(*count > 0)
        }
        TransactionClass::AdvanceDate { agent } => {
            state_of(config, agent)?;
            Ok(true)
        }
        TransactionClass::Swap { a, x, b, y } => {
            let sa = state_of(config, a)?;
            let sb = state_of(config, b)?;
            if x.is_empty() && y.is_empty() {
                return Ok(false);
            }
            Ok(sa.ledger.holdings().select_lots(x).is_ok()
                && sb.ledger.holdings().select_lots(y).is_ok())
        }
        TransactionClass::Pay { payer, payee, lots } => {
            let sp = state_of(config, payer)?;
            state_of(config, payee)?;
            if payer == payee || lots.is_empty() {
                return Ok(false);
            }
            let ok = lots
                .iter()
                .all(|l| &l.issuer == payee && l.maturity <= sp.ledger.local_date())
                && sp.ledger.holdings().select_lots(lots).is_ok();
            Ok(ok)
        }
        TransactionClass::Redeem {
            holder,
            issuer,
            coin_maturity,
            wanted,
        } => {
            let sh = state_of(config, holder)?;
            let si = state_of(config, issuer)?;
            if holder == issuer {
                return Ok(false);
            }
            let coin_ok = *coin_maturity <= sh.ledger.local_date()
                && sh
                    .ledger
                    .holdings()
                    .first_exact(issuer, *coin_maturity)
                    .is_some();
            let wanted_ok = si
                .ledger
                .holdings()
                .first_exact(&wanted.issuer, wanted.maturity)
                .is_some();
            Ok(coin_ok && wanted_ok)
        }
    }
}

/// Is this concrete guarded transaction enabled: do its machine
/// preconditions hold and does every guard will its class?
pub fn is_enabled(gt: &GuardedTxn, config: &Configuration) -> Result<bool, KernelError> {
    let machine = match gt.spec() {
        // The concrete target day matters here even though the class
        // forgets it.
        TxnSpec::AdvanceDate { agent, to_day } => {
            *to_day > state_of(config, agent)?.ledger.local_date()
        }
        _ => class_machine_enabled(&gt.class(), config)?,
    };
    if !machine {
        return Ok(false);
    }
    let class = gt.class();
    for guard in gt.spec().guards() {
        if !state_of(config, guard)?.volition.wills(&class) {
            return Ok(false);
        }
    }
    Ok(true)
}

fn with_two_ledgers<T>(
    config: &mut Configuration,
    a: &AgentId,
    b: &AgentId,
    f: impl FnOnce(&mut AgentLedger, &mut AgentLedger) -> Result<T, TxnError>,
) -> Result<T, KernelError> {
    let mut sa = config
        .agents
        .remove(a)
        .ok_or_else(|| KernelError::UnknownAgent { agent: a.clone() })?;
    let Some(mut sb) = config.agents.remove(b) else {
        config.agents.insert(a.clone(), sa);
        return Err(KernelError::UnknownAgent { agent: b.clone() });
    };
    let out = f(&mut sa.ledger, &mut sb.ledger);
    config.agents.insert(a.clone(), sa);
    config.agents.insert(b.clone(), sb);
    out.map_err(KernelError::Machine)
}

/// Execute an enabled guarded transaction and discharge its class from
/// every agent's volition set. Not-enabled transactions are rejected with
/// the configuration untouched.
pub fn execute_volitional(gt: &GuardedTxn, config: &mut Configuration) -> Result<(), KernelError> {
    if !is_enabled(gt, config)? {
        return Err(KernelError::NotEnabled { class: gt.class() });
    }
    match gt.spec() {
        TxnSpec::Mint {
            issuer,
            count,
            maturity,
        } => {
            let st = config.agents.get_mut(issuer).expect("checked");
            st.ledger
                .mint(*count, *maturity)
                .map_err(KernelError::Machine)?;
        }
        TxnSpec::AdvanceDate { agent, to_day } => {
            let st = config.agents.get_mut(agent).expect("checked");
            st.ledger
                .advance_date(*to_day)
                .map_err(KernelError::Machine)?;
        }
        TxnSpec::Swap { a, x, b, y } => {
            let xl = x.clone();
            let yl = y.clone();
            with_two_ledgers(config, a, b, move |la, lb| {
                let (xs, _) = la.holdings().select_lots(&xl)?;
                let (ys, _) = lb.holdings().select_lots(&yl)?;
                apply_swap(la, lb, &xs, &ys)
            })?;
        }
        TxnSpec::Pay { payer, payee, lots } => {
            let lots = lots.clone();
            with_two_ledgers(config, payer, payee, move |lp, lq| {
                apply_pay(lp, lq, &lots).map(|_| ())
            })?;
        }
        TxnSpec::Redeem {
            holder,
            issuer,
            coin_maturity,
            wanted,
        } => {
            let cm = *coin_maturity;
            let issuer_id = issuer.clone();
            let wanted = wanted.clone();
            with_two_ledgers(config, holder, issuer, move |lh, li| {
                let coin = lh
                    .holdings()
                    .first_exact(&issuer_id, cm)
                    .ok_or(TxnError::EmptyTransfer)?;
                let target = li
                    .holdings()
                    .first_exact(&wanted.issuer, wanted.maturity)
                    .ok_or(TxnError::EmptyTransfer)?;
                apply_redeem(lh, li, &coin, &target).map(|_| ())
            })?;
        }
    }
    let class = gt.class();
    for st in config.agents.values_mut() {
        st.volition.discharge(&class);
    }
    Ok(())
}

/// One recorded transition: either one agent changed its volition set, or a
/// member of some class executed.
#[derive(Clone, PartialEq, Eq, Debug)]
pub enum StepAction {
    ChangeVolition { agent: AgentId },
    Machine(TransactionClass),
}

/// A transition plus the configuration right after it.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct TraceStep {
    pub action: StepAction,
    pub after: Configuration,
}

/// A finite run: initial configuration and its transitions.
#[derive(Clone, PartialEq, Eq, Default, Debug)]
pub struct RunTrace {
    pub initial: Configuration,
    pub steps: Vec<TraceStep>,
}

/// Outcome of a correctness check over a finite trace.
#[derive(Clone, PartialEq, Eq, Debug)]
pub enum Verdict {
    Correct,
    /// Some class stayed enabled from snapshot `suffix_start` through the
    /// end of the trace with no member executed in that suffix: an agreed,
    /// possible transaction was left hanging.
    Violation {
        class: TransactionClass,
        suffix_start: usize,
    },
}

/// A structurally bad trace (distinct from an incorrect run).
#[derive(Clone, PartialEq, Eq, Debug)]
pub enum TraceError {
    /// Snapshot `index` does not cover the same agents as the initial one.
    InconsistentAgents { index: usize },
    /// A machine step fired while not enabled in the preceding snapshot.
    StepNotEnabled {
        index: usize,
        class: TransactionClass,
    },
    /// A machine step left its class in some volition set.
    MissingDischarge {
        index: usize,
        class: TransactionClass,
    },
    /// A volition change touched a ledger.
    LedgerChangedOnVolition { index: usize },
    /// Interleaving inputs share an agent.
    OverlappingAgents { agent: AgentId },
    /// The interleaved trace does not project onto its components.
    BadProjection { index: usize },
    /// Steps left over or missing after matching both components.
    StepCountMismatch,
    /// A machine step's participants span both components.
    SplitStep { index: usize },
}

impl fmt::Display for TraceError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TraceError::InconsistentAgents { index } => {
                write!(f, "snapshot {index} changes the agent population")
            }
            TraceError::StepNotEnabled { index, .. } => {
                write!(f, "step {index} executed while not enabled")
            }
            TraceError::MissingDischarge { index, .. } => {
                write!(f, "step {index} did not discharge its class")
            }
            TraceError::LedgerChangedOnVolition { index } => {
                write!(f, "volition-only step {index} changed a ledger")
            }
            TraceError::OverlappingAgents { agent } => {
                write!(f, "agent {agent} appears in both component runs")
            }
            TraceError::BadProjection { index } => {
                write!(
                    f,
                    "interleaved snapshot {index} does not project onto its components"
                )
            }
            TraceError::StepCountMismatch => f.write_str("interleaving drops or invents steps"),
            TraceError::SplitStep { index } => {
                write!(f, "step {index} involves agents from both components")
            }
        }
    }
}

impl core::error::Error for TraceError {}

fn class_enabled(class: &TransactionClass, config: &Configuration) -> bool {
    let machine = class_machine_enabled(class, config).unwrap_or(false);
    machine
        && class.guards().iter().all(|g| {
            config
                .agents
                .get(*g)
                .map(|st| st.volition.wills(class))
                .unwrap_or(false)
        })
}

fn snapshots(trace: &RunTrace) -> Vec<&Configuration> {
    let mut out = Vec::with_capacity(trace.steps.len() + 1);
    out.push(&trace.initial);
    out.extend(trace.steps.iter().map(|s| &s.after));
    out
}

/// Check a finite run for hanging obligations.
///
/// An empty trace is vacuously correct. Otherwise every class that was ever
/// willed (or executed) is examined: if it is enabled in the final snapshot
/// and no member executed after the last snapshot in which it was disabled,
/// the run is reported as a violation, naming the smallest offending class
/// and the snapshot index where its hanging suffix begins. Traces whose
/// steps are themselves illegal (executing a disabled transaction, skipping
/// discharge, a volition step that moves bonds) are errors, not verdicts.
pub fn check_correct_run(trace: &RunTrace) -> Result<Verdict, TraceError> {
    if trace.initial.agents.is_empty() && trace.steps.is_empty() {
        return Ok(Verdict::Correct);
    }
    let snaps = snapshots(trace);
    let population: BTreeSet<&AgentId> = trace.initial.agents.keys().collect();
    for (i, snap) in snaps.iter().enumerate() {
        if snap.agents.keys().collect::<BTreeSet<_>>() != population {
            return Err(TraceError::InconsistentAgents { index: i });
        }
    }
    // Step legality.
    for (i, step) in trace.steps.iter().enumerate() {
        let pre = snaps[i];
        let post = snaps[i + 1];
        match &step.action {
            StepAction::ChangeVolition { .. } => {
                let ledgers_equal = pre
                    .agents
                    .iter()
                    .all(|(id, st)| post.agents[id].ledger == st.ledger);
                if !ledgers_equal {
                    return Err(TraceError::LedgerChangedOnVolition { index: i + 1 });
                }
            }
            StepAction::Machine(class) => {
                if !class_enabled(class, pre) {
                    return Err(TraceError::StepNotEnabled {
                        index: i + 1,
                        class: class.clone(),
                    });
                }
                if post.agents.values().any(|st| st.volition.wills(class)) {
                    return Err(TraceError::MissingDischarge {
                        index: i + 1,
                        class: class.clone(),
                    });
                }
            }
        }
    }
    // Universe: everything ever willed or executed.
    let mut universe: BTreeSet<TransactionClass> = BTreeSet::new();
    for snap in &snaps {
        for st in snap.agents.values() {
            universe.extend(st.volition.iter().cloned());
        }
    }
    for step in &trace.steps {
        if let StepAction::Machine(class) = &step.action {
            universe.insert(class.clone());
        }
    }
    let last = snaps.len() - 1;
    for class in universe {
        if !class_enabled(&class, snaps[last]) {
            continue;
        }
        let last_disabled = (0..=last).rev().find(|j| !class_enabled(&class, snaps[*j]));
        let last_taken = trace
            .steps
            .iter()
            .enumerate()
            .rev()
            .find(|(_, s)| matches!(&s.action, StepAction::Machine(c) if *c == class))
            .map(|(j, _)| j + 1); // step j produces snapshot j + 1
        let hanging = match (last_taken, last_disabled) {
            (None, _) => true,
            (Some(t), Some(d)) => t <= d,
            (Some(_), None) => false,
        };
        if hanging {
            return Ok(Verdict::Violation {
                class,
                suffix_start: last_disabled.map_or(0, |d| d + 1),
            });
        }
    }
    Ok(Verdict::Correct)
}

fn action_side(
    action: &StepAction,
    left: &BTreeSet<AgentId>,
    right: &BTreeSet<AgentId>,
    index: usize,
) -> Result<bool, TraceError> {
    let agents: Vec<&AgentId> = match action {
        StepAction::ChangeVolition { agent } => [agent].into(),
        StepAction::Machine(class) => class.participants(),
    };
    let in_left = agents.iter().any(|a| left.contains(*a));
    let in_right = agents.iter().any(|a| right.contains(*a));
    match (in_left, in_right) {
        (true, false) => Ok(true),
        (false, true) => Ok(false),
        _ => Err(TraceError::SplitStep { index }),
    }
}

fn union(a: &Configuration, b: &Configuration) -> Configuration {
    let mut agents = a.agents.clone();
    agents.extend(b.agents.iter().map(|(id, st)| (id.clone(), st.clone())));
    Configuration { agents }
}

/// Merge two runs over disjoint agent sets by strict alternation, starting
/// with `left`. Each merged snapshot is the union of one snapshot from each
/// component.
pub fn interleave_round_robin(left: &RunTrace, right: &RunTrace) -> Result<RunTrace, TraceError> {
    let la: BTreeSet<AgentId> = left.initial.agents.keys().cloned().collect();
    for agent in right.initial.agents.keys() {
        if la.contains(agent) {
            return Err(TraceError::OverlappingAgents {
                agent: agent.clone(),
            });
        }
    }
    let mut merged = RunTrace {
        initial: union(&left.initial, &right.initial),
        steps: Vec::new(),
    };
    let mut cur_left = &left.initial;
    let mut cur_right = &right.initial;
    let (mut i, mut j) = (0, 0);
    let mut take_left = true;
    while i < left.steps.len() || j < right.steps.len() {
        let from_left = if take_left {
            i < left.steps.len()
        } else {
            j >= right.steps.len()
        };
        if from_left {
            cur_left = &left.steps[i].after;
            merged.steps.push(TraceStep {
                action: left.steps[i].action.clone(),
                after: union(cur_left, cur_right),
            });
            i += 1;
        } else {
            cur_right = &right.steps[j].after;
            merged.steps.push(TraceStep {
                action: right.steps[j].action.clone(),
                after: union(cur_left, cur_right),
            });
            j += 1;
        }
        take_left = !take_left;
    }
    Ok(merged)
}

/// Verify that `merged` is a genuine interleaving of two runs over disjoint
/// agent sets — every merged snapshot projects onto one snapshot of each
/// component, in order, each step advancing exactly one side — and then
/// return the correctness verdict of the merged run.
pub fn check_interleaving(
    left: &RunTrace,
    right: &RunTrace,
    merged: &RunTrace,
) -> Result<Verdict, TraceError> {
    let la: BTreeSet<AgentId> = left.initial.agents.keys().cloned().collect();
    let ra: BTreeSet<AgentId> = right.initial.agents.keys().cloned().collect();
    for agent in &ra {
        if la.contains(agent) {
            return Err(TraceError::OverlappingAgents {
                agent: agent.clone(),
            });
        }
    }
    if merged.initial != union(&left.initial, &right.initial) {
        return Err(TraceError::BadProjection { index: 0 });
    }
    let (mut i, mut j) = (0usize, 0usize);
    for (k, step) in merged.steps.iter().enumerate() {
        let goes_left = action_side(&step.action, &la, &ra, k + 1)?;
        if goes_left {
            if i >= left.steps.len() || left.steps[i].action != step.action {
                return Err(TraceError::StepCountMismatch);
            }
            i += 1;
        } else {
            if j >= right.steps.len() || right.steps[j].action != step.action {
                return Err(TraceError::StepCountMismatch);
            }
            j += 1;
        }
        let expect_left = if i == 0 {
            &left.initial
        } else {
            &left.steps[i - 1].after
        };
        let expect_right = if j == 0 {
            &right.initial
        } else {
            &right.steps[j - 1].after
        };
        if step.after.restricted_to(&la) != *expect_left
            || step.after.restricted_to(&ra) != *expect_right
        {
            return Err(TraceError::BadProjection { index: k + 1 });
        }
    }
    if i != left.steps.len() || j != right.steps.len() {
        return Err(TraceError::StepCountMismatch);
    }
    check_correct_run(merged)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn id(s: &str) -> AgentId {
        AgentId::new(s)
    }

    fn two_agent_config(k: u64) -> Configuration {
        let mut config = Configuration::new();
        let mut p = AgentLedger::new("p");
        p.mint(k, 0).unwrap();
        let mut q = AgentLedger::new("q");
        q.mint(k, 0).unwrap();
        config.insert_agent(p);
        config.insert_agent(q);
        config
    }

    fn mutual_credit_swap(k: u64) -> GuardedTxn {
        GuardedTxn::new(TxnSpec::swap(
            id("p"),
            vec![Lot::new("p", 0, k)],
            id("q"),
            vec![Lot::new("q", 0, k)],
        ))
    }

    fn will(config: &mut Configuration, agent: &str, class: &TransactionClass) {
        config
            .agents
            .get_mut(&id(agent))
            .unwrap()
            .volition
            .change(std::slice::from_ref(class), &[])
            .unwrap();
    }

    #[test]
    fn swap_classes_ignore_serials_and_advance_ignores_target() {
        let mut x1 = BondMultiset::new();
        x1.push_run(crate::bond::BondRun {
            issuer: id("p"),
            maturity: 0,
            first_serial: 0,
            count: 2,
        });
        let mut x2 = BondMultiset::new();
        x2.push_run(crate::bond::BondRun {
            issuer: id("p"),
            maturity: 0,
            first_serial: 40,
            count: 2,
        });
        let y = BondMultiset::new();
        let c1 = TxnSpec::swap_of_bonds(id("p"), &x1, id("q"), &y).class();
        let c2 = TxnSpec::swap_of_bonds(id("p"), &x2, id("q"), &y).class();
        assert_eq!(c1, c2);
        // Party order does not matter either.
        let c3 = TxnSpec::swap(id("q"), vec![], id("p"), vec![Lot::new("p", 0, 2)]).class();
        assert_eq!(c1, c3);

        let a1 = TxnSpec::AdvanceDate {
            agent: id("p"),
            to_day: 5,
        }
        .class();
        let a2 = TxnSpec::AdvanceDate {
            agent: id("p"),
            to_day: 99,
        }
        .class();
        assert_eq!(a1, a2);
    }

    #[test]
    fn enabled_needs_every_guard() {
        let mut config = two_agent_config(10);
        let gt = mutual_credit_swap(10);
        assert!(!is_enabled(&gt, &config).unwrap());
        will(&mut config, "p", &gt.class());
        // One guard willing is not enough.
        assert!(!is_enabled(&gt, &config).unwrap());
        will(&mut config, "q", &gt.class());
        assert!(is_enabled(&gt, &config).unwrap());
    }

    #[test]
    fn execute_discharges_everywhere() {
        let mut config = two_agent_config(10);
        let gt = mutual_credit_swap(10);
        will(&mut config, "p", &gt.class());
        will(&mut config, "q", &gt.class());
        execute_volitional(&gt, &mut config).unwrap();
        assert_eq!(
            config.agents[&id("p")]
                .ledger
                .holdings()
                .count_exact(&id("q"), 0),
            10
        );
        assert_eq!(
            config.agents[&id("q")]
                .ledger
                .holdings()
                .count_exact(&id("p"), 0),
            10
        );
        assert!(config.agents.values().all(|st| st.volition.is_empty()));
        // Re-execution without renewed consent is rejected.
        let err = execute_volitional(&gt, &mut config).unwrap_err();
        assert!(matches!(err, KernelError::NotEnabled { .. }));
    }

    #[test]
    fn third_party_volition_is_discharged_too() {
        let mut config = two_agent_config(5);
        config.insert_agent(AgentLedger::new("r"));
        let gt = mutual_credit_swap(5);
        for agent in ["p", "q", "r"] {
            will(&mut config, agent, &gt.class());
        }
        execute_volitional(&gt, &mut config).unwrap();
        assert!(config.agents[&id("r")].volition.is_empty());
    }

    #[test]
    fn failed_execution_changes_nothing() {
        let mut config = two_agent_config(10);
        let gt = mutual_credit_swap(11); // more than either side holds
        will(&mut config, "p", &gt.class());
        will(&mut config, "q", &gt.class());
        let before = config.clone();
        let err = execute_volitional(&gt, &mut config).unwrap_err();
        assert!(matches!(err, KernelError::NotEnabled { .. }));
        assert_eq!(config, before);
    }

    #[test]
    fn change_volition_rejects_noops_and_allows_rewilling() {
        let mut v = VolitionSet::new(id("p"));
        let class = mutual_credit_swap(1).class();
        v.change(std::slice::from_ref(&class), &[]).unwrap();
        assert_eq!(
            v.change(std::slice::from_ref(&class), &[]),
            Err(VolitionError::NoChange)
        );
        assert_eq!(
            v.change(std::slice::from_ref(&class), std::slice::from_ref(&class)),
            Err(VolitionError::AddRemoveOverlap {
                class: class.clone()
            })
        );
        v.change(&[], std::slice::from_ref(&class)).unwrap();
        // A discharged (or retracted) class may be willed again.
        v.change(std::slice::from_ref(&class), &[]).unwrap();
        assert!(v.wills(&class));
    }

    #[test]
    fn unguarded_advance_executes_without_consent() {
        let mut config = two_agent_config(1);
        let gt = GuardedTxn::new(TxnSpec::AdvanceDate {
            agent: id("p"),
            to_day: 9,
        });
        assert!(is_enabled(&gt, &config).unwrap());
        execute_volitional(&gt, &mut config).unwrap();
        assert_eq!(config.agents[&id("p")].ledger.local_date(), 9);
        // Non-increasing target: the concrete transaction is disabled.
        let gt = GuardedTxn::new(TxnSpec::AdvanceDate {
            agent: id("p"),
            to_day: 9,
        });
        assert!(!is_enabled(&gt, &config).unwrap());
    }

    fn trace_of(config: Configuration, script: &[(&str, Option<TransactionClass>)]) -> RunTrace {
        // Tiny driver: ("will:p", class) adds consent, (_, None) unused.
        let mut current = config;
        let mut trace = RunTrace {
            initial: current.clone(),
            steps: Vec::new(),
        };
        for (what, class) in script {
            match *what {
                "exec" => {
                    let class = class.clone().unwrap();
                    // Execute via a synthetic spec matching the class.
                    let spec = match class.clone() {
                        TransactionClass::Swap { a, x, b, y } => TxnSpec::Swap { a, x, b, y },
                        TransactionClass::Mint {
                            issuer,
                            count,
                            maturity,
                        } => TxnSpec::Mint {
                            issuer,
                            count,
                            maturity,
                        },
                        other => panic!("not driven in tests: {other:?}"),
                    };
                    execute_volitional(&GuardedTxn::new(spec), &mut current).unwrap();
                    trace.steps.push(TraceStep {
                        action: StepAction::Machine(class),
                        after: current.clone(),
                    });
                }
                will_tag => {
                    let agent = will_tag.strip_prefix("will:").unwrap();
                    let class = class.clone().unwrap();
                    current
                        .agents
                        .get_mut(&id(agent))
                        .unwrap()
                        .volition
                        .change(&[class], &[])
                        .unwrap();
                    trace.steps.push(TraceStep {
                        action: StepAction::ChangeVolition { agent: id(agent) },
                        after: current.clone(),
                    });
                }
            }
        }
        trace
    }

    #[test]
    fn empty_trace_is_correct() {
        let trace = RunTrace::default();
        assert_eq!(check_correct_run(&trace).unwrap(), Verdict::Correct);
    }

    #[test]
    fn hanging_agreed_swap_is_a_violation() {
        let class = mutual_credit_swap(10).class();
        let trace = trace_of(
            two_agent_config(10),
            &[
                ("will:p", Some(class.clone())),
                ("will:q", Some(class.clone())),
            ],
        );
        let verdict = check_correct_run(&trace).unwrap();
        // Enabled from snapshot 2 (both consents present) to the end.
        assert_eq!(
            verdict,
            Verdict::Violation {
                class,
                suffix_start: 2
            }
        );
    }

    #[test]
    fn executed_swap_makes_the_run_correct() {
        let class = mutual_credit_swap(10).class();
        let trace = trace_of(
            two_agent_config(10),
            &[
                ("will:p", Some(class.clone())),
                ("will:q", Some(class.clone())),
                ("exec", Some(class)),
            ],
        );
        assert_eq!(check_correct_run(&trace).unwrap(), Verdict::Correct);
    }

    #[test]
    fn consent_that_becomes_impossible_is_not_a_violation() {
        // p wills a swap but q never holds the wanted bonds.
        let mut config = two_agent_config(10);
        let gt = GuardedTxn::new(TxnSpec::swap(
            id("p"),
            vec![Lot::new("p", 0, 10)],
            id("q"),
            vec![Lot::new("q", 77, 3)],
        ));
        let class = gt.class();
        will(&mut config, "p", &class);
        will(&mut config, "q", &class);
        let trace = RunTrace {
            initial: config.clone(),
            steps: Vec::new(),
        };
        assert_eq!(check_correct_run(&trace).unwrap(), Verdict::Correct);
    }

    #[test]
    fn illegal_step_is_an_error_not_a_verdict() {
        let mut config = two_agent_config(10);
        let class = mutual_credit_swap(10).class();
        // Fabricate an execution that never had consent.
        let mut after = config.clone();
        let gt = mutual_credit_swap(10);
        will(&mut after, "p", &gt.class());
        will(&mut after, "q", &gt.class());
        execute_volitional(&gt, &mut after).unwrap();
        will(&mut config, "p", &class); // pre-state has only p's consent
        let trace = RunTrace {
            initial: config,
            steps: vec![TraceStep {
                action: StepAction::Machine(class.clone()),
                after,
            }],
        };
        assert_eq!(
            check_correct_run(&trace).unwrap_err(),
            TraceError::StepNotEnabled { index: 1, class }
        );
    }

    fn solo_run(name: &str, k: u64) -> RunTrace {
        // One agent mints twice; machine steps only.
        let mut config = Configuration::new();
        config.insert_agent(AgentLedger::new(name));
        let mut trace = RunTrace {
            initial: config.clone(),
            steps: Vec::new(),
        };
        for _ in 0..2 {
            let spec = TxnSpec::Mint {
                issuer: id(name),
                count: k,
                maturity: 0,
            };
            let gt = GuardedTxn::new(spec);
            config
                .agents
                .get_mut(&id(name))
                .unwrap()
                .volition
                .change(&[gt.class()], &[])
                .unwrap();
            trace.steps.push(TraceStep {
                action: StepAction::ChangeVolition { agent: id(name) },
                after: config.clone(),
            });
            execute_volitional(&gt, &mut config).unwrap();
            trace.steps.push(TraceStep {
                action: StepAction::Machine(gt.class()),
                after: config.clone(),
            });
        }
        trace
    }

    #[test]
    fn round_robin_interleaving_checks_out() {
        let left = solo_run("p", 3);
        let right = solo_run("q", 5);
        let merged = interleave_round_robin(&left, &right).unwrap();
        assert_eq!(merged.steps.len(), left.steps.len() + right.steps.len());
        assert_eq!(
            check_interleaving(&left, &right, &merged).unwrap(),
            Verdict::Correct
        );
    }

    #[test]
    fn interleaving_rejects_shared_agents_and_tampering() {
        let left = solo_run("p", 3);
        assert_eq!(
            interleave_round_robin(&left, &left).unwrap_err(),
            TraceError::OverlappingAgents { agent: id("p") }
        );
        let right = solo_run("q", 5);
        let mut merged = interleave_round_robin(&left, &right).unwrap();
        merged.steps.pop();
        assert_eq!(
            check_interleaving(&left, &right, &merged).unwrap_err(),
            TraceError::StepCountMismatch
        );
    }

    proptest::proptest! {
        /// Guard soundness: a swap with any guard's consent missing never
        /// executes, whatever the holdings look like.
        #[test]
        fn swap_without_full_consent_never_fires(
            k in 1u64..20,
            p_wills in proptest::bool::ANY,
            q_wills in proptest::bool::ANY,
        ) {
            proptest::prop_assume!(!(p_wills && q_wills));
            let mut config = two_agent_config(k);
            let gt = mutual_credit_swap(k);
            if p_wills {
                will(&mut config, "p", &gt.class());
            }
            if q_wills {
                will(&mut config, "q", &gt.class());
            }
            let before = config.clone();
            let refused = matches!(
                execute_volitional(&gt, &mut config),
                Err(KernelError::NotEnabled { .. })
            );
            proptest::prop_assert!(refused, "swap fired without full consent");
            proptest::prop_assert_eq!(config, before);
        }
    }
}
