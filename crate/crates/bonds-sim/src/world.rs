//! The simulated world: every agent's ledger, the message network between
//! them, the escrow desk, and the oracle, with bookkeeping for auditing
//! and hashing the whole state.
//!
//! Custody discipline: every bond is in exactly one place at any instant.
//! Either it sits in some agent's ledger, or it is locked inside a trade
//! proposal (on the wire or waiting in a recipient's inbox), or it rides
//! in a response headed back, or it is parked in an escrow case. The
//! conservation audit enumerates all of these.
//!
//! Messages between a given ordered pair of agents arrive in the order
//! sent; across pairs the delivery order is either global FIFO or a seeded
//! shuffle, so runs are deterministic either way.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

use bonds_core::audit::{audit_conservation, ConservationViolation, Custody};
use bonds_core::bond::{AgentId, BondMultiset, Day, Lot, Serial};
use bonds_core::escrow::Ledgers;
use bonds_core::ledger::MintReceipt;
use bonds_core::trade::{
    accept_trade, classify_trade, decline_trade, propose_trade, respond_auto, settle_response,
    AutoOutcome, ProposalId, SettleOutcome, TradeClass, TradeError, TradeProposal, TradeResponse,
};
use bonds_core::{
    AgentLedger, CaseId, EscrowError, EscrowEvent, EscrowManager, ExerciseStyle, LiquiditySnapshot,
    Oracle, OracleFact, Rate, ScheduledAmount, TxnError,
};

/// How the network picks the next message to deliver.
pub enum DeliveryOrder {
    /// Strictly in the order messages were sent.
    GlobalFifo,
    /// A random pair queue each time, per-pair order preserved.
    Shuffled(Box<ChaCha8Rng>),
}

/// A message in flight between two agents.
#[derive(Clone, PartialEq, Eq, Debug)]
pub enum Message {
    Proposal(TradeProposal),
    Response(TradeResponse),
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Envelope {
    /// Global send order, for FIFO delivery.
    pub stamp: u64,
    pub from: AgentId,
    pub to: AgentId,
    pub msg: Message,
}

/// What happened when one message was delivered.
#[derive(Clone, PartialEq, Eq, Debug)]
pub enum DeliveryOutcome {
    /// A proposal was answered mechanically by its recipient.
    Answered {
        proposal: ProposalId,
        by: AgentId,
        class: TradeClass,
        response: TradeResponse,
    },
    /// A normal trade was parked in the recipient's inbox for a decision.
    Deferred { proposal: ProposalId, by: AgentId },
    /// A response reached the proposer and the trade settled.
    Settled {
        proposal: ProposalId,
        by: AgentId,
        remembered: TradeProposal,
        outcome: SettleOutcome,
    },
}

#[derive(Debug, thiserror::Error)]
pub enum WorldError {
    #[error("no such agent: {0}")]
    UnknownAgent(AgentId),
    #[error("duplicate agent: {0}")]
    DuplicateAgent(AgentId),
    #[error("no escrow agent configured")]
    NoEscrow,
    #[error("no pending proposal from {from} to {to}")]
    NoPendingProposal { from: AgentId, to: AgentId },
    #[error("unknown proposal id {0}")]
    UnknownProposal(ProposalId),
    #[error("{0}")]
    Txn(#[from] TxnError),
    #[error("{0}")]
    Trade(#[from] TradeError),
    #[error("{0}")]
    Escrow(#[from] EscrowError),
}

/// Per-ledger SHA-256 digests, cached and folded by XOR into one word.
struct WorldHash {
    digests: BTreeMap<AgentId, [u8; 32]>,
    dirty: BTreeSet<AgentId>,
    acc: [u8; 32],
}

impl WorldHash {
    fn new() -> Self {
        WorldHash {
            digests: BTreeMap::new(),
            dirty: BTreeSet::new(),
            acc: [0; 32],
        }
    }

    fn mark(&mut self, agent: &AgentId) {
        self.dirty.insert(agent.clone());
    }

    fn mark_all(&mut self, ledgers: &Ledgers) {
        for agent in ledgers.keys() {
            self.dirty.insert(agent.clone());
        }
    }

    fn digest_ledger(ledger: &AgentLedger) -> [u8; 32] {
        let mut h = Sha256::new();
        // 0xff never occurs in UTF-8, so it separates names unambiguously.
        h.update(ledger.owner().as_str().as_bytes());
        h.update([0xff]);
        h.update(ledger.local_date().to_le_bytes());
        h.update(ledger.next_serial().to_le_bytes());
        for run in ledger.holdings().runs() {
            h.update(run.issuer.as_str().as_bytes());
            h.update([0xff]);
            h.update(run.maturity.to_le_bytes());
            h.update(run.first_serial.to_le_bytes());
            h.update(run.count.to_le_bytes());
        }
        h.finalize().into()
    }

    fn current(&mut self, ledgers: &Ledgers) -> String {
        let dirty = std::mem::take(&mut self.dirty);
        for agent in dirty {
            let ledger = ledgers.get(&agent).expect("dirty agent has a ledger");
            let fresh = Self::digest_ledger(ledger);
            if let Some(old) = self.digests.insert(agent, fresh) {
                for (a, o) in self.acc.iter_mut().zip(old) {
                    *a ^= o;
                }
            }
            for (a, n) in self.acc.iter_mut().zip(fresh) {
                *a ^= n;
            }
        }
        let mut out = String::with_capacity(64);
        for byte in self.acc {
            use std::fmt::Write;
            write!(out, "{byte:02x}").expect("writing to a String");
        }
        out
    }
}

pub struct World {
    ledgers: Ledgers,
    escrow: Option<EscrowManager>,
    oracle: Oracle,
    /// The proposer's copy of each unsettled proposal; bookkeeping, not
    /// custody (the live bonds travel in the message).
    outstanding: BTreeMap<ProposalId, TradeProposal>,
    /// Delivered normal trades awaiting the recipient's decision.
    inbox: BTreeMap<AgentId, Vec<TradeProposal>>,
    /// In-flight messages, FIFO per ordered pair.
    queues: BTreeMap<(AgentId, AgentId), VecDeque<Envelope>>,
    delivery: DeliveryOrder,
    next_stamp: u64,
    next_proposal: ProposalId,
    hash: WorldHash,
}

impl World {
    pub fn new(
        agents: &[AgentId],
        escrow_agent: Option<AgentId>,
        delivery: DeliveryOrder,
    ) -> Result<Self, WorldError> {
        let mut ledgers = Ledgers::new();
        let mut all: Vec<AgentId> = agents.to_vec();
        if let Some(e) = &escrow_agent {
            if !all.contains(e) {
                all.push(e.clone());
            }
        }
        for agent in &all {
            if ledgers
                .insert(agent.clone(), AgentLedger::new(agent.clone()))
                .is_some()
            {
                return Err(WorldError::DuplicateAgent(agent.clone()));
            }
        }
        let mut hash = WorldHash::new();
        hash.mark_all(&ledgers);
        Ok(World {
            ledgers,
            escrow: escrow_agent.map(EscrowManager::new),
            oracle: Oracle::new(),
            outstanding: BTreeMap::new(),
            inbox: BTreeMap::new(),
            queues: BTreeMap::new(),
            delivery,
            next_stamp: 0,
            next_proposal: 1,
            hash,
        })
    }

    pub fn ledgers(&self) -> &Ledgers {
        &self.ledgers
    }

    pub fn ledger(&self, agent: &AgentId) -> Result<&AgentLedger, WorldError> {
        self.ledgers
            .get(agent)
            .ok_or_else(|| WorldError::UnknownAgent(agent.clone()))
    }

    pub fn escrow_agent(&self) -> Option<&AgentId> {
        self.escrow.as_ref().map(|e| e.agent())
    }

    pub fn oracle(&self) -> &Oracle {
        &self.oracle
    }

    pub fn iter_inbox(&self) -> impl Iterator<Item = &TradeProposal> {
        self.inbox.values().flatten()
    }

    pub fn iter_wire(&self) -> impl Iterator<Item = &Envelope> {
        self.queues.values().flatten()
    }

    pub fn escrow_custody(&self) -> Vec<(CaseId, &'static str, &BondMultiset)> {
        self.escrow
            .as_ref()
            .map(|e| e.custody())
            .unwrap_or_default()
    }

    pub fn escrow_case_summaries(&self) -> Vec<(CaseId, &'static str, bool, Vec<Lot>)> {
        let Some(esc) = &self.escrow else {
            return Vec::new();
        };
        esc.custody()
            .into_iter()
            .map(|(id, kind, bonds)| {
                (
                    id,
                    kind,
                    esc.is_closed(id).unwrap_or(false),
                    bonds.as_lots(),
                )
            })
            .collect()
    }

    fn ledger_mut(&mut self, agent: &AgentId) -> Result<&mut AgentLedger, WorldError> {
        self.hash.mark(agent);
        self.ledgers
            .get_mut(agent)
            .ok_or_else(|| WorldError::UnknownAgent(agent.clone()))
    }

    /// Hex digest of all ledgers; cheap when little changed since last call.
    pub fn world_hash(&mut self) -> String {
        self.hash.current(&self.ledgers)
    }

    // ---- basic volitional actions ----------------------------------------

    pub fn mint(
        &mut self,
        agent: &AgentId,
        count: u64,
        maturity: Day,
    ) -> Result<MintReceipt, WorldError> {
        Ok(self.ledger_mut(agent)?.mint(count, maturity)?)
    }

    pub fn advance(&mut self, agent: &AgentId, to: Day) -> Result<(), WorldError> {
        Ok(self.ledger_mut(agent)?.advance_date(to)?)
    }

    /// Advance every agent whose clock is behind `to`; returns who moved.
    pub fn advance_all(&mut self, to: Day) -> Vec<AgentId> {
        let mut moved = Vec::new();
        for (agent, ledger) in self.ledgers.iter_mut() {
            if ledger.local_date() < to {
                ledger.advance_date(to).expect("strictly later day");
                self.hash.mark(agent);
                moved.push(agent.clone());
            }
        }
        moved
    }

    // ---- the trade protocol over the network -----------------------------

    fn enqueue(&mut self, from: AgentId, to: AgentId, msg: Message) {
        let stamp = self.next_stamp;
        self.next_stamp += 1;
        self.queues
            .entry((from.clone(), to.clone()))
            .or_default()
            .push_back(Envelope {
                stamp,
                from,
                to,
                msg,
            });
    }

    pub fn propose(
        &mut self,
        from: &AgentId,
        to: &AgentId,
        give: &[Lot],
        want: &[Lot],
    ) -> Result<TradeProposal, WorldError> {
        self.ledger(to)?;
        let id = self.next_proposal;
        let proposal = propose_trade(self.ledger_mut(from)?, to, id, give, want)?;
        self.next_proposal += 1;
        self.outstanding.insert(id, proposal.clone());
        self.enqueue(
            from.clone(),
            to.clone(),
            Message::Proposal(proposal.clone()),
        );
        Ok(proposal)
    }

    fn pending_position(&self, actor: &AgentId, from: &AgentId) -> Result<usize, WorldError> {
        self.inbox
            .get(actor)
            .and_then(|list| list.iter().position(|p| &p.from == from))
            .ok_or_else(|| WorldError::NoPendingProposal {
                from: from.clone(),
                to: actor.clone(),
            })
    }

    /// Accept the oldest waiting proposal from `from`; on failure the
    /// proposal stays queued where it was.
    pub fn accept_pending(
        &mut self,
        actor: &AgentId,
        from: &AgentId,
    ) -> Result<ProposalId, WorldError> {
        let pos = self.pending_position(actor, from)?;
        let proposal = self.inbox.get_mut(actor).expect("checked").remove(pos);
        let id = proposal.id;
        match accept_trade(proposal, self.ledger_mut(actor)?) {
            Ok(response) => {
                self.enqueue(actor.clone(), from.clone(), Message::Response(response));
                Ok(id)
            }
            Err((proposal, err)) => {
                self.inbox
                    .get_mut(actor)
                    .expect("checked")
                    .insert(pos, proposal);
                Err(err.into())
            }
        }
    }

    /// Decline the oldest waiting proposal from `from`.
    pub fn reject_pending(
        &mut self,
        actor: &AgentId,
        from: &AgentId,
    ) -> Result<ProposalId, WorldError> {
        let pos = self.pending_position(actor, from)?;
        let proposal = self.inbox.get_mut(actor).expect("checked").remove(pos);
        let id = proposal.id;
        let response = decline_trade(proposal);
        self.enqueue(actor.clone(), from.clone(), Message::Response(response));
        Ok(id)
    }

    fn next_envelope(&mut self) -> Option<Envelope> {
        let key = match &mut self.delivery {
            DeliveryOrder::GlobalFifo => self
                .queues
                .iter()
                .filter(|(_, q)| !q.is_empty())
                .min_by_key(|(_, q)| q.front().expect("nonempty").stamp)
                .map(|(k, _)| k.clone())?,
            DeliveryOrder::Shuffled(rng) => {
                let nonempty: Vec<_> = self
                    .queues
                    .iter()
                    .filter(|(_, q)| !q.is_empty())
                    .map(|(k, _)| k.clone())
                    .collect();
                if nonempty.is_empty() {
                    return None;
                }
                nonempty[rng.gen_range(0..nonempty.len())].clone()
            }
        };
        let envelope = self.queues.get_mut(&key).expect("chosen key").pop_front();
        if self.queues.get(&key).is_some_and(|q| q.is_empty()) {
            self.queues.remove(&key);
        }
        envelope
    }

    /// Deliver one message, if any are in flight. Proposals are answered
    /// mechanically where the protocol dictates and parked otherwise;
    /// responses settle against the proposer's remembered copy.
    pub fn deliver_next(&mut self) -> Result<Option<DeliveryOutcome>, WorldError> {
        let Some(envelope) = self.next_envelope() else {
            return Ok(None);
        };
        match envelope.msg {
            Message::Proposal(proposal) => {
                let id = proposal.id;
                let by = envelope.to.clone();
                let class = classify_trade(&proposal, self.ledger(&by)?);
                match respond_auto(proposal, self.ledger_mut(&by)?) {
                    Ok(AutoOutcome::Responded(response)) => {
                        self.enqueue(
                            by.clone(),
                            envelope.from,
                            Message::Response(response.clone()),
                        );
                        Ok(Some(DeliveryOutcome::Answered {
                            proposal: id,
                            by,
                            class,
                            response,
                        }))
                    }
                    Ok(AutoOutcome::Deferred(proposal)) => {
                        self.inbox.entry(by.clone()).or_default().push(proposal);
                        Ok(Some(DeliveryOutcome::Deferred { proposal: id, by }))
                    }
                    Err((_, err)) => Err(err.into()),
                }
            }
            Message::Response(response) => {
                let id = response.id();
                let by = envelope.to.clone();
                let remembered = self
                    .outstanding
                    .remove(&id)
                    .ok_or(WorldError::UnknownProposal(id))?;
                let outcome = settle_response(self.ledger_mut(&by)?, &remembered, response)?;
                Ok(Some(DeliveryOutcome::Settled {
                    proposal: id,
                    by,
                    remembered,
                    outcome,
                }))
            }
        }
    }

    pub fn wire_is_quiet(&self) -> bool {
        self.queues.values().all(|q| q.is_empty())
    }

    // ---- oracle and escrow ----------------------------------------------

    pub fn assert_fact(&mut self, fact: OracleFact) {
        self.oracle.assert_fact(fact);
    }

    fn escrow_parts(&mut self) -> Result<(&mut EscrowManager, &mut Ledgers), WorldError> {
        // Anything the escrow desk does may touch several ledgers; recompute
        // them all rather than guessing which.
        self.hash.mark_all(&self.ledgers);
        match &mut self.escrow {
            Some(esc) => Ok((esc, &mut self.ledgers)),
            None => Err(WorldError::NoEscrow),
        }
    }

    pub fn open_timed_release(
        &mut self,
        depositor: &AgentId,
        beneficiary: &AgentId,
        lots: &[Lot],
        release_day: Day,
    ) -> Result<CaseId, WorldError> {
        let (esc, ledgers) = self.escrow_parts()?;
        Ok(esc.open_timed_release(ledgers, depositor, beneficiary, lots, release_day)?)
    }

    pub fn cancel_timed_release(
        &mut self,
        case: CaseId,
        by: &AgentId,
    ) -> Result<Vec<EscrowEvent>, WorldError> {
        let (esc, ledgers) = self.escrow_parts()?;
        Ok(esc.cancel_timed_release(ledgers, case, by)?)
    }

    #[allow(clippy::too_many_arguments)]
    pub fn open_adjudicated(
        &mut self,
        guarantee: bool,
        depositor: &AgentId,
        beneficiary: &AgentId,
        reference: &AgentId,
        lots: &[Lot],
        expiry: Option<Day>,
    ) -> Result<CaseId, WorldError> {
        let (esc, ledgers) = self.escrow_parts()?;
        Ok(if guarantee {
            esc.open_guarantee(ledgers, depositor, beneficiary, reference, lots, expiry)?
        } else {
            esc.open_collateral(ledgers, depositor, beneficiary, reference, lots, expiry)?
        })
    }

    #[allow(clippy::too_many_arguments)]
    pub fn open_option(
        &mut self,
        holder: &AgentId,
        writer: &AgentId,
        style: ExerciseStyle,
        premium: &[Lot],
        strike: &[Lot],
        underlying: &[Lot],
        exercise_deadline: Day,
        establish_by: Day,
    ) -> Result<CaseId, WorldError> {
        let (esc, ledgers) = self.escrow_parts()?;
        Ok(esc.open_option(
            ledgers,
            holder,
            writer,
            style,
            premium,
            strike,
            underlying,
            exercise_deadline,
            establish_by,
        )?)
    }

    pub fn deposit_option_leg(
        &mut self,
        case: CaseId,
        by: &AgentId,
    ) -> Result<Vec<EscrowEvent>, WorldError> {
        let (esc, ledgers) = self.escrow_parts()?;
        Ok(esc.deposit_option_leg(ledgers, case, by)?)
    }

    pub fn exercise_option(
        &mut self,
        case: CaseId,
        by: &AgentId,
    ) -> Result<Vec<EscrowEvent>, WorldError> {
        let (esc, ledgers) = self.escrow_parts()?;
        Ok(esc.exercise_option(ledgers, case, by)?)
    }

    #[allow(clippy::too_many_arguments)]
    pub fn open_insurance(
        &mut self,
        insurer: &AgentId,
        insured: &AgentId,
        subject: &AgentId,
        payout: &[Lot],
        reserves: &[Lot],
        expiry: Day,
    ) -> Result<CaseId, WorldError> {
        let (esc, ledgers) = self.escrow_parts()?;
        Ok(esc.open_insurance(ledgers, insurer, insured, subject, payout, reserves, expiry)?)
    }

    #[allow(clippy::too_many_arguments)]
    pub fn open_cds(
        &mut self,
        seller: &AgentId,
        buyer: &AgentId,
        reference: &AgentId,
        reserves: &[Lot],
        premiums: &[ScheduledAmount],
        expiry: Day,
    ) -> Result<CaseId, WorldError> {
        let (esc, ledgers) = self.escrow_parts()?;
        Ok(esc.open_cds(
            ledgers, seller, buyer, reference, reserves, premiums, expiry,
        )?)
    }

    pub fn pay_premium(&mut self, case: CaseId, day: Day) -> Result<Vec<EscrowEvent>, WorldError> {
        let (esc, ledgers) = self.escrow_parts()?;
        Ok(esc.pay_premium(ledgers, case, day)?)
    }

    #[allow(clippy::too_many_arguments)]
    pub fn open_letter_of_credit(
        &mut self,
        bank: &AgentId,
        buyer: &AgentId,
        seller: &AgentId,
        subject: &AgentId,
        payment: &[Lot],
        reimbursement: &[Lot],
    ) -> Result<CaseId, WorldError> {
        let (esc, ledgers) = self.escrow_parts()?;
        Ok(esc.open_letter_of_credit(
            ledgers,
            bank,
            buyer,
            seller,
            subject,
            payment,
            reimbursement,
        )?)
    }

    pub fn deposit_loc_reimbursement(
        &mut self,
        case: CaseId,
    ) -> Result<Vec<EscrowEvent>, WorldError> {
        let (esc, ledgers) = self.escrow_parts()?;
        Ok(esc.deposit_loc_reimbursement(ledgers, case)?)
    }

    #[allow(clippy::too_many_arguments)]
    pub fn open_credit_line(
        &mut self,
        lender: &AgentId,
        borrower: &AgentId,
        limit: u64,
        rate: Rate,
        coin_maturity: Day,
        schedule: &[Day],
        expiry: Day,
    ) -> Result<CaseId, WorldError> {
        let (esc, ledgers) = self.escrow_parts()?;
        Ok(esc.open_credit_line(
            ledgers,
            lender,
            borrower,
            limit,
            rate,
            coin_maturity,
            schedule,
            expiry,
        )?)
    }

    pub fn draw(&mut self, case: CaseId, amount: u64) -> Result<Vec<EscrowEvent>, WorldError> {
        let (esc, ledgers) = self.escrow_parts()?;
        Ok(esc.draw(ledgers, case, amount)?)
    }

    pub fn repay(&mut self, case: CaseId, amount: u64) -> Result<Vec<EscrowEvent>, WorldError> {
        let (esc, ledgers) = self.escrow_parts()?;
        Ok(esc.repay(ledgers, case, amount)?)
    }

    /// Let the escrow desk adjudicate everything that is ready. Idempotent:
    /// a second call right after does nothing.
    pub fn tick_escrow(&mut self) -> Result<Vec<EscrowEvent>, WorldError> {
        if self.escrow.is_none() {
            return Ok(Vec::new());
        }
        let oracle = self.oracle.clone();
        let (esc, ledgers) = self.escrow_parts()?;
        Ok(esc.tick(ledgers, &oracle)?)
    }

    // ---- audit and analytics --------------------------------------------

    /// Serial-exact conservation audit over every custody location.
    pub fn audit(&self) -> Result<(), ConservationViolation> {
        let minted: BTreeMap<AgentId, Serial> = self
            .ledgers
            .iter()
            .map(|(a, l)| (a.clone(), l.next_serial()))
            .collect();
        let mut custody: Vec<Custody<'_>> = Vec::new();
        for (agent, ledger) in &self.ledgers {
            custody.push(Custody {
                location: format!("ledger:{agent}"),
                bonds: ledger.holdings(),
            });
        }
        for proposal in self.iter_inbox() {
            custody.push(Custody {
                location: format!("inbox:{}:{}", proposal.to, proposal.id),
                bonds: &proposal.offered,
            });
        }
        for envelope in self.iter_wire() {
            match &envelope.msg {
                Message::Proposal(p) => custody.push(Custody {
                    location: format!("wire:proposal:{}", p.id),
                    bonds: &p.offered,
                }),
                Message::Response(r) => match r {
                    TradeResponse::Accept { id, bonds } => custody.push(Custody {
                        location: format!("wire:accept:{id}"),
                        bonds,
                    }),
                    TradeResponse::Decline { id, returned }
                    | TradeResponse::DeclineWithMenu { id, returned, .. } => {
                        custody.push(Custody {
                            location: format!("wire:decline:{id}"),
                            bonds: returned,
                        })
                    }
                },
            }
        }
        for (case, kind, bonds) in self.escrow_custody() {
            custody.push(Custody {
                location: format!("escrow:{kind}:{case}"),
                bonds,
            });
        }
        audit_conservation(&minted, &custody)
    }

    /// Snapshot for liquidity analytics. Locked proposal bonds count as the
    /// proposer's; response bonds in flight count for whoever they are
    /// headed to; escrow custody counts as nobody's.
    pub fn snapshot(&self) -> LiquiditySnapshot {
        let mut snap = LiquiditySnapshot::new();
        for (agent, ledger) in &self.ledgers {
            snap.add_agent(
                agent.clone(),
                ledger.local_date(),
                ledger.next_serial(),
                ledger.holdings().clone(),
            );
        }
        for proposal in self.iter_inbox() {
            snap.add_proposal(proposal.from.clone(), proposal.offered.clone());
        }
        for envelope in self.iter_wire() {
            match &envelope.msg {
                Message::Proposal(p) => snap.add_proposal(p.from.clone(), p.offered.clone()),
                Message::Response(r) => match r {
                    TradeResponse::Accept { bonds, .. } => {
                        snap.add_proposal(envelope.to.clone(), bonds.clone())
                    }
                    TradeResponse::Decline { returned, .. }
                    | TradeResponse::DeclineWithMenu { returned, .. } => {
                        snap.add_proposal(envelope.to.clone(), returned.clone())
                    }
                },
            }
        }
        for (_, _, bonds) in self.escrow_custody() {
            snap.add_escrow(bonds.clone());
        }
        snap
    }
}
