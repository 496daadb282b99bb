//! Escrow: a neutral agent holding bonds under explicit case rules.
//!
//! The escrow agent is an ordinary agent with a ledger and a local date;
//! `d_e*` below means that date. Bonds put in escrow leave their owner's
//! holdings and sit in per-case custody, so audits see exactly where they
//! are. Every case resolves by rule, never by discretion:
//!
//! - timed release: hold until a day, then hand over (cancellable strictly
//!   before that day, first action wins);
//! - collateral and guarantee: hand to the beneficiary on an attested
//!   default of the reference debtor, back to the depositor on attested
//!   fulfilment or expiry;
//! - option: both sides deposit within a window (else unwound); the holder
//!   may exercise, American style any day up to the deadline, European
//!   style exactly on it; unexercised, the writer keeps the premium;
//! - insurance: the insurer's reserves must cover the promised payout from
//!   day one; an attested claim event pays out, expiry returns reserves;
//! - credit default swap: reserves go to the protection buyer on the
//!   reference agent's default, else back to the seller at expiry, while
//!   premiums are forwarded as they are paid;
//! - letter of credit: attested delivery releases the bank's payment to the
//!   seller against the buyer's reimbursement paper, blocking (not
//!   failing) while that paper is missing;
//! - credit line: the lender parks coins up to a limit; draws hand coins
//!   out against freshly minted principal and per-date interest, repayments
//!   put coins back, expiry returns the undrawn rest.
//!
//! External truths (defaults, deliveries, claims, reference rates) enter
//! through an [`Oracle`]. A fact dated `d` can drive a case only once
//! `d_e* >= d`: the escrow cannot act on news from its own future.
//! [`EscrowManager::tick`] applies every due rule; it is deterministic and
//! idempotent, so callers may tick as often as they like.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use num_rational::Ratio;

use crate::bond::{normalize_lots, AgentId, BondMultiset, Day, Lot, SelectError};
use crate::instruments::ScheduledAmount;
use crate::ledger::{AgentLedger, TxnError};

/// Interest rate as an exact fraction (no floating point anywhere).
pub type Rate = Ratio<u64>;

/// How an option may be exercised relative to its deadline.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum ExerciseStyle {
    American,
    European,
}

/// The kinds of external fact the oracle can attest.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Debug)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum OracleEventKind {
    /// The subject failed to honor obligations.
    Default,
    /// The subject honored them.
    Fulfilled,
    /// Goods reached the subject.
    Delivery,
    /// The insured-against event happened to the subject.
    Claim,
    /// A reference amount (e.g. a floating rate reading) for the subject.
    Rate,
}

/// Payload of a fact: a plain attestation or a number.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum OracleValue {
    Flag,
    Amount(u64),
}

/// One attested external fact, dated on the oracle's own calendar.
#[derive(Clone, PartialEq, Eq, Debug)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct OracleFact {
    pub kind: OracleEventKind,
    pub subject: AgentId,
    pub day: Day,
    pub value: OracleValue,
}

/// An append-only store of attested facts.
#[derive(Clone, Default, Debug)]
pub struct Oracle {
    facts: Vec<OracleFact>,
}

impl Oracle {
    pub fn new() -> Self {
        Oracle::default()
    }

    /// Record a fact. Exact duplicates are ignored; facts are never
    /// retracted.
    pub fn assert_fact(&mut self, fact: OracleFact) {
        if !self.facts.contains(&fact) {
            self.facts.push(fact);
        }
    }

    pub fn facts(&self) -> &[OracleFact] {
        &self.facts
    }

    /// Earliest fact of this kind about this subject dated on or before
    /// `day`.
    pub fn first_on_or_before(
        &self,
        kind: OracleEventKind,
        subject: &AgentId,
        day: Day,
    ) -> Option<&OracleFact> {
        self.facts
            .iter()
            .filter(|f| f.kind == kind && f.subject == *subject && f.day <= day)
            .min_by_key(|f| f.day)
    }

    /// The reference amount attested for this subject exactly on `day`.
    pub fn amount_at(&self, subject: &AgentId, day: Day) -> Option<u64> {
        self.facts.iter().find_map(|f| match f {
            OracleFact {
                kind: OracleEventKind::Rate,
                subject: s,
                day: d,
                value: OracleValue::Amount(a),
            } if s == subject && *d == day => Some(*a),
            _ => None,
        })
    }
}

pub type CaseId = u64;

/// The rule a case runs under, together with its current custody.
#[derive(Clone, PartialEq, Eq, Debug)]
pub enum EscrowCase {
    TimedRelease {
        depositor: AgentId,
        beneficiary: AgentId,
        release_day: Day,
        held: BondMultiset,
    },
    Collateral {
        depositor: AgentId,
        beneficiary: AgentId,
        reference: AgentId,
        expiry: Option<Day>,
        held: BondMultiset,
    },
    /// Like collateral, but posted by a third party on the reference
    /// debtor's behalf.
    Guarantee {
        depositor: AgentId,
        beneficiary: AgentId,
        reference: AgentId,
        expiry: Option<Day>,
        held: BondMultiset,
    },
    Option {
        holder: AgentId,
        writer: AgentId,
        style: ExerciseStyle,
        premium: Vec<Lot>,
        strike: Vec<Lot>,
        underlying: Vec<Lot>,
        exercise_deadline: Day,
        establish_by: Day,
        /// Premium plus strike, once the holder deposits.
        holder_leg: Option<BondMultiset>,
        /// The underlying, once the writer deposits.
        writer_leg: Option<BondMultiset>,
    },
    Insurance {
        insurer: AgentId,
        insured: AgentId,
        /// Whose claim event triggers the payout.
        subject: AgentId,
        payout: Vec<Lot>,
        expiry: Day,
        reserves: BondMultiset,
    },
    Cds {
        seller: AgentId,
        buyer: AgentId,
        reference: AgentId,
        premiums: Vec<ScheduledAmount>,
        paid: BTreeSet<Day>,
        expiry: Day,
        reserves: BondMultiset,
    },
    LetterOfCredit {
        bank: AgentId,
        buyer: AgentId,
        seller: AgentId,
        /// Whose delivery attestation releases the payment.
        subject: AgentId,
        reimbursement: Vec<Lot>,
        payment: BondMultiset,
        reimbursement_held: Option<BondMultiset>,
        blocked_announced: bool,
    },
    CreditLine {
        lender: AgentId,
        borrower: AgentId,
        limit: u64,
        rate: Rate,
        /// Maturity of the parked lender coins (and of repayments).
        coin_maturity: Day,
        /// Interest due dates; each draw owes interest on the still-future
        /// ones.
        schedule: Vec<Day>,
        /// Principal maturity and end of the line.
        expiry: Day,
        drawn: u64,
        held: BondMultiset,
    },
}

/// What happened inside the escrow, for logs and traces.
#[derive(Clone, PartialEq, Eq, Debug)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum EscrowEventKind {
    Released { to: AgentId },
    Cancelled { to: AgentId },
    Forfeited { to: AgentId },
    ReturnedToDepositor { to: AgentId },
    Established,
    Unwound,
    Exercised,
    OptionExpired,
    ClaimPaid { to: AgentId },
    InsuranceExpired { to: AgentId },
    PremiumForwarded { day: Day, to: AgentId },
    DefaultPaid { to: AgentId },
    CdsExpired { to: AgentId },
    DeliveryHonored { seller: AgentId, bank: AgentId },
    BlockedOnReimbursement,
    Drawn { amount: u64 },
    Repaid { amount: u64 },
    LineExpired { returned: u64 },
}

#[derive(Clone, PartialEq, Eq, Debug)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct EscrowEvent {
    pub case: CaseId,
    /// The escrow agent's local date when this happened.
    pub day: Day,
    pub kind: EscrowEventKind,
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub enum EscrowError {
    UnknownAgent {
        agent: AgentId,
    },
    UnknownCase {
        case: CaseId,
    },
    CaseClosed {
        case: CaseId,
    },
    WrongParty {
        case: CaseId,
        agent: AgentId,
    },
    WrongCaseKind {
        case: CaseId,
    },
    Short(SelectError),
    Txn(TxnError),
    ZeroAmount,
    SameParty {
        agent: AgentId,
    },
    /// Insurance reserves do not cover the promised payout.
    InsufficientReserves,
    /// Premium day not in the agreed schedule.
    NotInSchedule {
        day: Day,
    },
    AlreadyPaid {
        day: Day,
    },
    /// Action attempted at or past its deadline.
    WindowClosed {
        deadline: Day,
        today: Day,
    },
    /// Option legs not all deposited yet.
    NotEstablished,
    /// European exercise must land exactly on the deadline.
    WrongExerciseDay {
        deadline: Day,
        today: Day,
    },
    AlreadyDeposited {
        case: CaseId,
    },
    /// Draw past the undrawn limit.
    OverLimit {
        available: u64,
        requested: u64,
    },
    /// Rate times amount must be a whole number of bonds.
    FractionalInterest {
        amount: u64,
    },
    RepayTooMuch {
        drawn: u64,
        requested: u64,
    },
    /// Deposited lots disagree with the declared shape.
    LotMismatch,
}

impl fmt::Display for EscrowError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EscrowError::UnknownAgent { agent } => write!(f, "no such agent: {agent}"),
            EscrowError::UnknownCase { case } => write!(f, "no such case: {case}"),
            EscrowError::CaseClosed { case } => write!(f, "case {case} is closed"),
            EscrowError::WrongParty { case, agent } => {
                write!(f, "{agent} is not a party to case {case}")
            }
            EscrowError::WrongCaseKind { case } => {
                write!(f, "case {case} does not support this action")
            }
            EscrowError::Short(e) => write!(f, "deposit not covered: {e}"),
            EscrowError::Txn(e) => e.fmt(f),
            EscrowError::ZeroAmount => f.write_str("amount must be positive"),
            EscrowError::SameParty { agent } => write!(f, "{agent} on both sides"),
            EscrowError::InsufficientReserves => {
                f.write_str("reserves do not cover the promised payout")
            }
            EscrowError::NotInSchedule { day } => {
                write!(f, "day {day} is not a scheduled premium date")
            }
            EscrowError::AlreadyPaid { day } => write!(f, "premium for day {day} already paid"),
            EscrowError::WindowClosed { deadline, today } => {
                write!(f, "window closed on day {deadline} (today is {today})")
            }
            EscrowError::NotEstablished => f.write_str("not all legs are deposited"),
            EscrowError::WrongExerciseDay { deadline, today } => {
                write!(
                    f,
                    "European exercise must be on day {deadline}, today is {today}"
                )
            }
            EscrowError::AlreadyDeposited { case } => {
                write!(f, "leg already deposited for case {case}")
            }
            EscrowError::OverLimit {
                available,
                requested,
            } => {
                write!(f, "draw of {requested} exceeds available {available}")
            }
            EscrowError::FractionalInterest { amount } => {
                write!(f, "rate times {amount} is not a whole number of bonds")
            }
            EscrowError::RepayTooMuch { drawn, requested } => {
                write!(f, "repaying {requested} with only {drawn} drawn")
            }
            EscrowError::LotMismatch => f.write_str("lots disagree with the declared shape"),
        }
    }
}

impl core::error::Error for EscrowError {}

impl From<SelectError> for EscrowError {
    fn from(e: SelectError) -> Self {
        EscrowError::Short(e)
    }
}

impl From<TxnError> for EscrowError {
    fn from(e: TxnError) -> Self {
        EscrowError::Txn(e)
    }
}

#[derive(Clone, PartialEq, Eq, Debug)]
struct CaseRecord {
    kind: EscrowCase,
    closed: bool,
}

pub type Ledgers = BTreeMap<AgentId, AgentLedger>;

/// All open cases of one escrow agent, keyed by case id. The manager never
/// holds bonds outside a case and never moves them except by rule.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct EscrowManager {
    agent: AgentId,
    next_case: CaseId,
    cases: BTreeMap<CaseId, CaseRecord>,
}

fn ledger_mut<'a>(
    ledgers: &'a mut Ledgers,
    id: &AgentId,
) -> Result<&'a mut AgentLedger, EscrowError> {
    ledgers
        .get_mut(id)
        .ok_or_else(|| EscrowError::UnknownAgent { agent: id.clone() })
}

fn ledger_ref<'a>(ledgers: &'a Ledgers, id: &AgentId) -> Result<&'a AgentLedger, EscrowError> {
    ledgers
        .get(id)
        .ok_or_else(|| EscrowError::UnknownAgent { agent: id.clone() })
}

impl EscrowManager {
    pub fn new(agent: AgentId) -> Self {
        EscrowManager {
            agent,
            next_case: 0,
            cases: BTreeMap::new(),
        }
    }

    pub fn agent(&self) -> &AgentId {
        &self.agent
    }

    pub fn case(&self, id: CaseId) -> Option<&EscrowCase> {
        self.cases.get(&id).map(|r| &r.kind)
    }

    pub fn is_closed(&self, id: CaseId) -> Option<bool> {
        self.cases.get(&id).map(|r| r.closed)
    }

    pub fn case_ids(&self) -> impl Iterator<Item = CaseId> + '_ {
        self.cases.keys().copied()
    }

    /// Every bond currently in escrow custody, by case and compartment.
    /// This is the audit surface: these locations plus the ledgers and any
    /// in-flight proposals must account for every serial ever minted.
    pub fn custody(&self) -> Vec<(CaseId, &'static str, &BondMultiset)> {
        let mut out = Vec::new();
        for (id, rec) in &self.cases {
            match &rec.kind {
                EscrowCase::TimedRelease { held, .. }
                | EscrowCase::Collateral { held, .. }
                | EscrowCase::Guarantee { held, .. }
                | EscrowCase::CreditLine { held, .. } => {
                    if !held.is_empty() {
                        out.push((*id, "held", held));
                    }
                }
                EscrowCase::Option {
                    holder_leg,
                    writer_leg,
                    ..
                } => {
                    if let Some(b) = holder_leg {
                        if !b.is_empty() {
                            out.push((*id, "holder_leg", b));
                        }
                    }
                    if let Some(b) = writer_leg {
                        if !b.is_empty() {
                            out.push((*id, "writer_leg", b));
                        }
                    }
                }
                EscrowCase::Insurance { reserves, .. } | EscrowCase::Cds { reserves, .. } => {
                    if !reserves.is_empty() {
                        out.push((*id, "reserves", reserves));
                    }
                }
                EscrowCase::LetterOfCredit {
                    payment,
                    reimbursement_held,
                    ..
                } => {
                    if !payment.is_empty() {
                        out.push((*id, "payment", payment));
                    }
                    if let Some(b) = reimbursement_held {
                        if !b.is_empty() {
                            out.push((*id, "reimbursement", b));
                        }
                    }
                }
            }
        }
        out
    }

    /// The escrow agent's own local date; every deadline is judged
    /// against this clock and no other.
    pub fn today(&self, ledgers: &Ledgers) -> Result<Day, EscrowError> {
        Ok(ledger_ref(ledgers, &self.agent)?.local_date())
    }

    fn fresh_case(&mut self, kind: EscrowCase) -> CaseId {
        let id = self.next_case;
        self.next_case += 1;
        self.cases.insert(
            id,
            CaseRecord {
                kind,
                closed: false,
            },
        );
        id
    }

    fn open_case_mut(&mut self, id: CaseId) -> Result<&mut EscrowCase, EscrowError> {
        let rec = self
            .cases
            .get_mut(&id)
            .ok_or(EscrowError::UnknownCase { case: id })?;
        if rec.closed {
            return Err(EscrowError::CaseClosed { case: id });
        }
        Ok(&mut rec.kind)
    }

    pub fn open_timed_release(
        &mut self,
        ledgers: &mut Ledgers,
        depositor: &AgentId,
        beneficiary: &AgentId,
        lots: &[Lot],
        release_day: Day,
    ) -> Result<CaseId, EscrowError> {
        if depositor == beneficiary {
            return Err(EscrowError::SameParty {
                agent: depositor.clone(),
            });
        }
        self.today(ledgers)?;
        let held = ledger_mut(ledgers, depositor)?.withdraw_lots(lots)?;
        if held.is_empty() {
            return Err(EscrowError::ZeroAmount);
        }
        Ok(self.fresh_case(EscrowCase::TimedRelease {
            depositor: depositor.clone(),
            beneficiary: beneficiary.clone(),
            release_day,
            held,
        }))
    }

    /// Cancel a timed release. Allowed only strictly before the release
    /// day on the escrow's clock: once the day has come, the transfer is
    /// the case's fate even if the tick has not run yet.
    pub fn cancel_timed_release(
        &mut self,
        ledgers: &mut Ledgers,
        case: CaseId,
        by: &AgentId,
    ) -> Result<Vec<EscrowEvent>, EscrowError> {
        let today = self.today(ledgers)?;
        let kind = self.open_case_mut(case)?;
        let EscrowCase::TimedRelease {
            depositor,
            release_day,
            held,
            ..
        } = kind
        else {
            return Err(EscrowError::WrongCaseKind { case });
        };
        if by != depositor {
            return Err(EscrowError::WrongParty {
                case,
                agent: by.clone(),
            });
        }
        if today >= *release_day {
            return Err(EscrowError::WindowClosed {
                deadline: *release_day,
                today,
            });
        }
        let bonds = core::mem::take(held);
        let to = depositor.clone();
        ledger_mut(ledgers, &to)?.deposit(bonds);
        self.cases.get_mut(&case).expect("exists").closed = true;
        Ok(vec![EscrowEvent {
            case,
            day: today,
            kind: EscrowEventKind::Cancelled { to },
        }])
    }

    #[allow(clippy::too_many_arguments)]
    fn open_adjudicated(
        &mut self,
        ledgers: &mut Ledgers,
        depositor: &AgentId,
        beneficiary: &AgentId,
        reference: &AgentId,
        lots: &[Lot],
        expiry: Option<Day>,
        guarantee: bool,
    ) -> Result<CaseId, EscrowError> {
        if depositor == beneficiary {
            return Err(EscrowError::SameParty {
                agent: depositor.clone(),
            });
        }
        self.today(ledgers)?;
        let held = ledger_mut(ledgers, depositor)?.withdraw_lots(lots)?;
        if held.is_empty() {
            return Err(EscrowError::ZeroAmount);
        }
        let kind = if guarantee {
            EscrowCase::Guarantee {
                depositor: depositor.clone(),
                beneficiary: beneficiary.clone(),
                reference: reference.clone(),
                expiry,
                held,
            }
        } else {
            EscrowCase::Collateral {
                depositor: depositor.clone(),
                beneficiary: beneficiary.clone(),
                reference: reference.clone(),
                expiry,
                held,
            }
        };
        Ok(self.fresh_case(kind))
    }

    /// Post collateral: returned on attested fulfilment (or expiry),
    /// forfeited to the beneficiary on attested default of `reference`.
    pub fn open_collateral(
        &mut self,
        ledgers: &mut Ledgers,
        depositor: &AgentId,
        beneficiary: &AgentId,
        reference: &AgentId,
        lots: &[Lot],
        expiry: Option<Day>,
    ) -> Result<CaseId, EscrowError> {
        self.open_adjudicated(
            ledgers,
            depositor,
            beneficiary,
            reference,
            lots,
            expiry,
            false,
        )
    }

    /// Post a guarantee on someone else's obligation; adjudicated exactly
    /// like collateral.
    pub fn open_guarantee(
        &mut self,
        ledgers: &mut Ledgers,
        depositor: &AgentId,
        beneficiary: &AgentId,
        reference: &AgentId,
        lots: &[Lot],
        expiry: Option<Day>,
    ) -> Result<CaseId, EscrowError> {
        self.open_adjudicated(
            ledgers,
            depositor,
            beneficiary,
            reference,
            lots,
            expiry,
            true,
        )
    }

    /// Open an option shell; both legs still have to be deposited via
    /// [`Self::deposit_option_leg`] before `establish_by` passes.
    #[allow(clippy::too_many_arguments)]
    pub fn open_option(
        &mut self,
        ledgers: &Ledgers,
        holder: &AgentId,
        writer: &AgentId,
        style: ExerciseStyle,
        premium: &[Lot],
        strike: &[Lot],
        underlying: &[Lot],
        exercise_deadline: Day,
        establish_by: Day,
    ) -> Result<CaseId, EscrowError> {
        if holder == writer {
            return Err(EscrowError::SameParty {
                agent: holder.clone(),
            });
        }
        ledger_ref(ledgers, holder)?;
        ledger_ref(ledgers, writer)?;
        self.today(ledgers)?;
        let premium = normalize_lots(premium);
        let strike = normalize_lots(strike);
        let underlying = normalize_lots(underlying);
        if premium.is_empty() || strike.is_empty() || underlying.is_empty() {
            return Err(EscrowError::ZeroAmount);
        }
        Ok(self.fresh_case(EscrowCase::Option {
            holder: holder.clone(),
            writer: writer.clone(),
            style,
            premium,
            strike,
            underlying,
            exercise_deadline,
            establish_by,
            holder_leg: None,
            writer_leg: None,
        }))
    }

    /// Deposit one side of an option: the holder puts in premium plus
    /// strike, the writer the underlying.
    pub fn deposit_option_leg(
        &mut self,
        ledgers: &mut Ledgers,
        case: CaseId,
        by: &AgentId,
    ) -> Result<Vec<EscrowEvent>, EscrowError> {
        let today = self.today(ledgers)?;
        let kind = self.open_case_mut(case)?;
        let EscrowCase::Option {
            holder,
            writer,
            premium,
            strike,
            underlying,
            establish_by,
            holder_leg,
            writer_leg,
            ..
        } = kind
        else {
            return Err(EscrowError::WrongCaseKind { case });
        };
        if today > *establish_by {
            return Err(EscrowError::WindowClosed {
                deadline: *establish_by,
                today,
            });
        }
        let (slot, lots) = if by == holder {
            let mut lots = premium.clone();
            lots.extend(strike.iter().cloned());
            (&mut *holder_leg, normalize_lots(&lots))
        } else if by == writer {
            (&mut *writer_leg, underlying.clone())
        } else {
            return Err(EscrowError::WrongParty {
                case,
                agent: by.clone(),
            });
        };
        if slot.is_some() {
            return Err(EscrowError::AlreadyDeposited { case });
        }
        let bonds = ledger_mut(ledgers, by)?.withdraw_lots(&lots)?;
        *slot = Some(bonds);
        let established = holder_leg.is_some() && writer_leg.is_some();
        Ok(if established {
            vec![EscrowEvent {
                case,
                day: today,
                kind: EscrowEventKind::Established,
            }]
        } else {
            Vec::new()
        })
    }

    /// Holder exercises: the underlying changes hands against the strike,
    /// and the writer pockets the premium.
    pub fn exercise_option(
        &mut self,
        ledgers: &mut Ledgers,
        case: CaseId,
        by: &AgentId,
    ) -> Result<Vec<EscrowEvent>, EscrowError> {
        let today = self.today(ledgers)?;
        let kind = self.open_case_mut(case)?;
        let EscrowCase::Option {
            holder,
            writer,
            style,
            exercise_deadline,
            holder_leg,
            writer_leg,
            ..
        } = kind
        else {
            return Err(EscrowError::WrongCaseKind { case });
        };
        if by != holder {
            return Err(EscrowError::WrongParty {
                case,
                agent: by.clone(),
            });
        }
        let (Some(_), Some(_)) = (holder_leg.as_ref(), writer_leg.as_ref()) else {
            return Err(EscrowError::NotEstablished);
        };
        match style {
            ExerciseStyle::American => {
                if today > *exercise_deadline {
                    return Err(EscrowError::WindowClosed {
                        deadline: *exercise_deadline,
                        today,
                    });
                }
            }
            ExerciseStyle::European => {
                if today != *exercise_deadline {
                    return Err(EscrowError::WrongExerciseDay {
                        deadline: *exercise_deadline,
                        today,
                    });
                }
            }
        }
        let premium_and_strike = holder_leg.take().expect("checked");
        let underlying_bonds = writer_leg.take().expect("checked");
        let (holder_id, writer_id) = (holder.clone(), writer.clone());
        ledger_mut(ledgers, &holder_id)?.deposit(underlying_bonds);
        ledger_mut(ledgers, &writer_id)?.deposit(premium_and_strike);
        self.cases.get_mut(&case).expect("exists").closed = true;
        Ok(vec![EscrowEvent {
            case,
            day: today,
            kind: EscrowEventKind::Exercised,
        }])
    }

    /// Open an insurance policy. The reserves must already cover the
    /// promised payout; a policy that cannot pay is refused at birth.
    #[allow(clippy::too_many_arguments)]
    pub fn open_insurance(
        &mut self,
        ledgers: &mut Ledgers,
        insurer: &AgentId,
        insured: &AgentId,
        subject: &AgentId,
        payout: &[Lot],
        reserve_lots: &[Lot],
        expiry: Day,
    ) -> Result<CaseId, EscrowError> {
        if insurer == insured {
            return Err(EscrowError::SameParty {
                agent: insurer.clone(),
            });
        }
        self.today(ledgers)?;
        let payout = normalize_lots(payout);
        if payout.is_empty() {
            return Err(EscrowError::ZeroAmount);
        }
        let reserves = ledger_mut(ledgers, insurer)?.withdraw_lots(reserve_lots)?;
        if reserves.select_lots(&payout).is_err() {
            // Put the reserves back; the case never existed.
            let bonds = reserves;
            ledger_mut(ledgers, insurer)?.deposit(bonds);
            return Err(EscrowError::InsufficientReserves);
        }
        Ok(self.fresh_case(EscrowCase::Insurance {
            insurer: insurer.clone(),
            insured: insured.clone(),
            subject: subject.clone(),
            payout,
            expiry,
            reserves,
        }))
    }

    /// Open a credit default swap: the seller's reserves are parked up
    /// front, premiums arrive via [`Self::pay_premium`].
    #[allow(clippy::too_many_arguments)]
    pub fn open_cds(
        &mut self,
        ledgers: &mut Ledgers,
        seller: &AgentId,
        buyer: &AgentId,
        reference: &AgentId,
        reserve_lots: &[Lot],
        premiums: &[ScheduledAmount],
        expiry: Day,
    ) -> Result<CaseId, EscrowError> {
        if seller == buyer {
            return Err(EscrowError::SameParty {
                agent: seller.clone(),
            });
        }
        self.today(ledgers)?;
        let mut prev = None;
        for p in premiums {
            if p.count == 0 {
                return Err(EscrowError::ZeroAmount);
            }
            if prev.map(|d| p.day <= d).unwrap_or(false) {
                return Err(EscrowError::NotInSchedule { day: p.day });
            }
            prev = Some(p.day);
        }
        let reserves = ledger_mut(ledgers, seller)?.withdraw_lots(reserve_lots)?;
        if reserves.is_empty() {
            return Err(EscrowError::ZeroAmount);
        }
        Ok(self.fresh_case(EscrowCase::Cds {
            seller: seller.clone(),
            buyer: buyer.clone(),
            reference: reference.clone(),
            premiums: premiums.to_vec(),
            paid: BTreeSet::new(),
            expiry,
            reserves,
        }))
    }

    /// Pay one scheduled premium in buyer-issued bonds maturing that day;
    /// the escrow forwards them to the seller at once.
    pub fn pay_premium(
        &mut self,
        ledgers: &mut Ledgers,
        case: CaseId,
        day: Day,
    ) -> Result<Vec<EscrowEvent>, EscrowError> {
        let today = self.today(ledgers)?;
        let kind = self.open_case_mut(case)?;
        let EscrowCase::Cds {
            seller,
            buyer,
            premiums,
            paid,
            ..
        } = kind
        else {
            return Err(EscrowError::WrongCaseKind { case });
        };
        let Some(entry) = premiums.iter().find(|p| p.day == day) else {
            return Err(EscrowError::NotInSchedule { day });
        };
        if paid.contains(&day) {
            return Err(EscrowError::AlreadyPaid { day });
        }
        let lot = Lot::new(buyer.clone(), day, entry.count);
        let (buyer_id, seller_id) = (buyer.clone(), seller.clone());
        let bonds = ledger_mut(ledgers, &buyer_id)?.withdraw_lots(&[lot])?;
        ledger_mut(ledgers, &seller_id)?.deposit(bonds);
        let EscrowCase::Cds { paid, .. } = self.open_case_mut(case)? else {
            unreachable!()
        };
        paid.insert(day);
        Ok(vec![EscrowEvent {
            case,
            day: today,
            kind: EscrowEventKind::PremiumForwarded { day, to: seller_id },
        }])
    }

    /// Open a letter of credit: the bank parks the payment now; the buyer
    /// deposits reimbursement paper via
    /// [`Self::deposit_loc_reimbursement`].
    #[allow(clippy::too_many_arguments)]
    pub fn open_letter_of_credit(
        &mut self,
        ledgers: &mut Ledgers,
        bank: &AgentId,
        buyer: &AgentId,
        seller: &AgentId,
        subject: &AgentId,
        payment_lots: &[Lot],
        reimbursement: &[Lot],
    ) -> Result<CaseId, EscrowError> {
        if bank == seller || bank == buyer || buyer == seller {
            return Err(EscrowError::SameParty {
                agent: bank.clone(),
            });
        }
        self.today(ledgers)?;
        let reimbursement = normalize_lots(reimbursement);
        if reimbursement.is_empty() {
            return Err(EscrowError::ZeroAmount);
        }
        ledger_ref(ledgers, buyer)?;
        ledger_ref(ledgers, seller)?;
        let payment = ledger_mut(ledgers, bank)?.withdraw_lots(payment_lots)?;
        if payment.is_empty() {
            return Err(EscrowError::ZeroAmount);
        }
        Ok(self.fresh_case(EscrowCase::LetterOfCredit {
            bank: bank.clone(),
            buyer: buyer.clone(),
            seller: seller.clone(),
            subject: subject.clone(),
            reimbursement,
            payment,
            reimbursement_held: None,
            blocked_announced: false,
        }))
    }

    /// The buyer parks the reimbursement paper the letter requires.
    pub fn deposit_loc_reimbursement(
        &mut self,
        ledgers: &mut Ledgers,
        case: CaseId,
    ) -> Result<Vec<EscrowEvent>, EscrowError> {
        self.today(ledgers)?;
        let kind = self.open_case_mut(case)?;
        let EscrowCase::LetterOfCredit {
            buyer,
            reimbursement,
            reimbursement_held,
            ..
        } = kind
        else {
            return Err(EscrowError::WrongCaseKind { case });
        };
        if reimbursement_held.is_some() {
            return Err(EscrowError::AlreadyDeposited { case });
        }
        let lots = reimbursement.clone();
        let buyer_id = buyer.clone();
        let bonds = ledger_mut(ledgers, &buyer_id)?.withdraw_lots(&lots)?;
        let EscrowCase::LetterOfCredit {
            reimbursement_held, ..
        } = self.open_case_mut(case)?
        else {
            unreachable!()
        };
        *reimbursement_held = Some(bonds);
        Ok(Vec::new())
    }

    /// Open a credit line: the lender parks `limit` coins, all of one
    /// maturity, to be drawn against principal-plus-interest paper.
    #[allow(clippy::too_many_arguments)]
    pub fn open_credit_line(
        &mut self,
        ledgers: &mut Ledgers,
        lender: &AgentId,
        borrower: &AgentId,
        limit: u64,
        rate: Rate,
        coin_maturity: Day,
        schedule: &[Day],
        expiry: Day,
    ) -> Result<CaseId, EscrowError> {
        if lender == borrower {
            return Err(EscrowError::SameParty {
                agent: lender.clone(),
            });
        }
        if limit == 0 {
            return Err(EscrowError::ZeroAmount);
        }
        let mut prev = None;
        for d in schedule {
            if prev.map(|p| *d <= p).unwrap_or(false) || *d > expiry {
                return Err(EscrowError::NotInSchedule { day: *d });
            }
            prev = Some(*d);
        }
        self.today(ledgers)?;
        ledger_ref(ledgers, borrower)?;
        let held = ledger_mut(ledgers, lender)?.withdraw_lots(&[Lot::new(
            lender.clone(),
            coin_maturity,
            limit,
        )])?;
        Ok(self.fresh_case(EscrowCase::CreditLine {
            lender: lender.clone(),
            borrower: borrower.clone(),
            limit,
            rate,
            coin_maturity,
            schedule: schedule.to_vec(),
            expiry,
            drawn: 0,
            held,
        }))
    }

    /// Draw on the line: the borrower issues principal due at expiry plus
    /// interest on every still-future schedule date, hands that paper to
    /// the lender, and receives coins from custody. The rate must divide
    /// the draw into whole bonds.
    pub fn draw(
        &mut self,
        ledgers: &mut Ledgers,
        case: CaseId,
        amount: u64,
    ) -> Result<Vec<EscrowEvent>, EscrowError> {
        let today = self.today(ledgers)?;
        let kind = self.open_case_mut(case)?;
        let EscrowCase::CreditLine {
            lender,
            borrower,
            limit,
            rate,
            coin_maturity,
            schedule,
            expiry,
            drawn,
            held,
        } = kind
        else {
            return Err(EscrowError::WrongCaseKind { case });
        };
        if amount == 0 {
            return Err(EscrowError::ZeroAmount);
        }
        let available = *limit - *drawn;
        if amount > available {
            return Err(EscrowError::OverLimit {
                available,
                requested: amount,
            });
        }
        let interest = *rate * amount;
        if !interest.is_integer() {
            return Err(EscrowError::FractionalInterest { amount });
        }
        let interest = interest.to_integer();
        let future_dates: Vec<Day> = schedule.iter().copied().filter(|d| *d > today).collect();
        let (lender_id, borrower_id) = (lender.clone(), borrower.clone());
        let (expiry_day, coin_day) = (*expiry, *coin_maturity);

        // Mint and collect the borrower's paper first; only then move
        // coins, so a failure leaves custody untouched.
        let borrower_ledger = ledger_mut(ledgers, &borrower_id)?;
        let mut paper_lots = vec![Lot::new(borrower_id.clone(), expiry_day, amount)];
        borrower_ledger.mint(amount, expiry_day)?;
        if interest > 0 {
            for d in &future_dates {
                borrower_ledger.mint(interest, *d)?;
                paper_lots.push(Lot::new(borrower_id.clone(), *d, interest));
            }
        }
        let paper = borrower_ledger.withdraw_lots(&normalize_lots(&paper_lots))?;
        let coins = held.select_lots(&[Lot::new(lender_id.clone(), coin_day, amount)])?;
        *held = coins.1;
        *drawn += amount;
        ledger_mut(ledgers, &lender_id)?.deposit(paper);
        ledger_mut(ledgers, &borrower_id)?.deposit(coins.0);
        Ok(vec![EscrowEvent {
            case,
            day: today,
            kind: EscrowEventKind::Drawn { amount },
        }])
    }

    /// Repay part of the drawn principal: coins come back into custody,
    /// and the lender hands the matching principal paper back to the
    /// borrower. Interest already issued stays owed.
    pub fn repay(
        &mut self,
        ledgers: &mut Ledgers,
        case: CaseId,
        amount: u64,
    ) -> Result<Vec<EscrowEvent>, EscrowError> {
        let today = self.today(ledgers)?;
        let kind = self.open_case_mut(case)?;
        let EscrowCase::CreditLine {
            lender,
            borrower,
            rate: _,
            coin_maturity,
            expiry,
            drawn,
            ..
        } = kind
        else {
            return Err(EscrowError::WrongCaseKind { case });
        };
        if amount == 0 {
            return Err(EscrowError::ZeroAmount);
        }
        if amount > *drawn {
            return Err(EscrowError::RepayTooMuch {
                drawn: *drawn,
                requested: amount,
            });
        }
        let (lender_id, borrower_id) = (lender.clone(), borrower.clone());
        let (expiry_day, coin_day) = (*expiry, *coin_maturity);
        let coins = ledger_mut(ledgers, &borrower_id)?.withdraw_lots(&[Lot::new(
            lender_id.clone(),
            coin_day,
            amount,
        )])?;
        let paper = match ledger_mut(ledgers, &lender_id)?.withdraw_lots(&[Lot::new(
            borrower_id.clone(),
            expiry_day,
            amount,
        )]) {
            Ok(p) => p,
            Err(e) => {
                // Undo the coin withdrawal; nothing moved.
                ledger_mut(ledgers, &borrower_id)?.deposit(coins);
                return Err(e.into());
            }
        };
        ledger_mut(ledgers, &borrower_id)?.deposit(paper);
        let EscrowCase::CreditLine { drawn, held, .. } = self.open_case_mut(case)? else {
            unreachable!()
        };
        held.absorb(coins);
        *drawn -= amount;
        Ok(vec![EscrowEvent {
            case,
            day: today,
            kind: EscrowEventKind::Repaid { amount },
        }])
    }

    /// Apply every rule that is due on the escrow's clock. Deterministic
    /// (cases in id order) and idempotent (a second tick with nothing new
    /// returns no events).
    pub fn tick(
        &mut self,
        ledgers: &mut Ledgers,
        oracle: &Oracle,
    ) -> Result<Vec<EscrowEvent>, EscrowError> {
        let today = self.today(ledgers)?;
        let ids: Vec<CaseId> = self.cases.keys().copied().collect();
        let mut events = Vec::new();
        for id in ids {
            let rec = self.cases.get_mut(&id).expect("listed");
            if rec.closed {
                continue;
            }
            let mut close = true;
            match &mut rec.kind {
                EscrowCase::TimedRelease {
                    beneficiary,
                    release_day,
                    held,
                    ..
                } => {
                    if today >= *release_day {
                        let bonds = core::mem::take(held);
                        let to = beneficiary.clone();
                        ledger_mut(ledgers, &to)?.deposit(bonds);
                        events.push(EscrowEvent {
                            case: id,
                            day: today,
                            kind: EscrowEventKind::Released { to },
                        });
                    } else {
                        close = false;
                    }
                }
                EscrowCase::Collateral {
                    depositor,
                    beneficiary,
                    reference,
                    expiry,
                    held,
                }
                | EscrowCase::Guarantee {
                    depositor,
                    beneficiary,
                    reference,
                    expiry,
                    held,
                } => {
                    let horizon = expiry.map_or(today, |e| e.min(today));
                    let default =
                        oracle.first_on_or_before(OracleEventKind::Default, reference, horizon);
                    let fulfilled =
                        oracle.first_on_or_before(OracleEventKind::Fulfilled, reference, today);
                    // Earliest fact wins; a dead heat goes to the default,
                    // the reading that protects the beneficiary.
                    let verdict = match (default, fulfilled) {
                        (Some(d), Some(f)) if f.day < d.day => Some(false),
                        (Some(_), _) => Some(true),
                        (None, Some(_)) => Some(false),
                        (None, None) => None,
                    };
                    match verdict {
                        Some(true) => {
                            let bonds = core::mem::take(held);
                            let to = beneficiary.clone();
                            ledger_mut(ledgers, &to)?.deposit(bonds);
                            events.push(EscrowEvent {
                                case: id,
                                day: today,
                                kind: EscrowEventKind::Forfeited { to },
                            });
                        }
                        Some(false) => {
                            let bonds = core::mem::take(held);
                            let to = depositor.clone();
                            ledger_mut(ledgers, &to)?.deposit(bonds);
                            events.push(EscrowEvent {
                                case: id,
                                day: today,
                                kind: EscrowEventKind::ReturnedToDepositor { to },
                            });
                        }
                        None => {
                            if expiry.is_some_and(|e| today >= e) {
                                let bonds = core::mem::take(held);
                                let to = depositor.clone();
                                ledger_mut(ledgers, &to)?.deposit(bonds);
                                events.push(EscrowEvent {
                                    case: id,
                                    day: today,
                                    kind: EscrowEventKind::ReturnedToDepositor { to },
                                });
                            } else {
                                close = false;
                            }
                        }
                    }
                }
                EscrowCase::Option {
                    holder,
                    writer,
                    premium,
                    exercise_deadline,
                    establish_by,
                    holder_leg,
                    writer_leg,
                    ..
                } => {
                    let established = holder_leg.is_some() && writer_leg.is_some();
                    if !established && today > *establish_by {
                        // One-sided past the window: hand back whatever
                        // arrived.
                        if let Some(bonds) = holder_leg.take() {
                            let to = holder.clone();
                            ledger_mut(ledgers, &to)?.deposit(bonds);
                        }
                        if let Some(bonds) = writer_leg.take() {
                            let to = writer.clone();
                            ledger_mut(ledgers, &to)?.deposit(bonds);
                        }
                        events.push(EscrowEvent {
                            case: id,
                            day: today,
                            kind: EscrowEventKind::Unwound,
                        });
                    } else if established && today > *exercise_deadline {
                        // Expired unexercised: underlying returns, the
                        // writer keeps the premium, the strike returns.
                        let both = holder_leg.take().expect("established");
                        let underlying_bonds = writer_leg.take().expect("established");
                        let (premium_bonds, strike_bonds) =
                            both.select_lots(premium).map_err(EscrowError::Short)?;
                        let (holder_id, writer_id) = (holder.clone(), writer.clone());
                        ledger_mut(ledgers, &writer_id)?.deposit(underlying_bonds);
                        ledger_mut(ledgers, &writer_id)?.deposit(premium_bonds);
                        ledger_mut(ledgers, &holder_id)?.deposit(strike_bonds);
                        events.push(EscrowEvent {
                            case: id,
                            day: today,
                            kind: EscrowEventKind::OptionExpired,
                        });
                    } else {
                        close = false;
                    }
                }
                EscrowCase::Insurance {
                    insurer,
                    insured,
                    subject,
                    payout,
                    expiry,
                    reserves,
                } => {
                    let horizon = (*expiry).min(today);
                    if let Some(_claim) =
                        oracle.first_on_or_before(OracleEventKind::Claim, subject, horizon)
                    {
                        // A claim inside the policy term beats expiry even
                        // on the same tick.
                        let all = core::mem::take(reserves);
                        let (paid, rest) = all.select_lots(payout).map_err(EscrowError::Short)?;
                        let (insured_id, insurer_id) = (insured.clone(), insurer.clone());
                        ledger_mut(ledgers, &insured_id)?.deposit(paid);
                        ledger_mut(ledgers, &insurer_id)?.deposit(rest);
                        events.push(EscrowEvent {
                            case: id,
                            day: today,
                            kind: EscrowEventKind::ClaimPaid { to: insured_id },
                        });
                    } else if today >= *expiry {
                        let bonds = core::mem::take(reserves);
                        let to = insurer.clone();
                        ledger_mut(ledgers, &to)?.deposit(bonds);
                        events.push(EscrowEvent {
                            case: id,
                            day: today,
                            kind: EscrowEventKind::InsuranceExpired { to },
                        });
                    } else {
                        close = false;
                    }
                }
                EscrowCase::Cds {
                    seller,
                    buyer,
                    reference,
                    expiry,
                    reserves,
                    ..
                } => {
                    let horizon = (*expiry).min(today);
                    if oracle
                        .first_on_or_before(OracleEventKind::Default, reference, horizon)
                        .is_some()
                    {
                        let bonds = core::mem::take(reserves);
                        let to = buyer.clone();
                        ledger_mut(ledgers, &to)?.deposit(bonds);
                        events.push(EscrowEvent {
                            case: id,
                            day: today,
                            kind: EscrowEventKind::DefaultPaid { to },
                        });
                    } else if today >= *expiry {
                        let bonds = core::mem::take(reserves);
                        let to = seller.clone();
                        ledger_mut(ledgers, &to)?.deposit(bonds);
                        events.push(EscrowEvent {
                            case: id,
                            day: today,
                            kind: EscrowEventKind::CdsExpired { to },
                        });
                    } else {
                        close = false;
                    }
                }
                EscrowCase::LetterOfCredit {
                    bank,
                    seller,
                    subject,
                    payment,
                    reimbursement_held,
                    blocked_announced,
                    ..
                } => {
                    let delivered = oracle
                        .first_on_or_before(OracleEventKind::Delivery, subject, today)
                        .is_some();
                    if delivered && reimbursement_held.is_some() {
                        let pay = core::mem::take(payment);
                        let reimb = reimbursement_held.take().expect("checked");
                        let (seller_id, bank_id) = (seller.clone(), bank.clone());
                        ledger_mut(ledgers, &seller_id)?.deposit(pay);
                        ledger_mut(ledgers, &bank_id)?.deposit(reimb);
                        events.push(EscrowEvent {
                            case: id,
                            day: today,
                            kind: EscrowEventKind::DeliveryHonored {
                                seller: seller_id,
                                bank: bank_id,
                            },
                        });
                    } else {
                        if delivered && !*blocked_announced {
                            *blocked_announced = true;
                            events.push(EscrowEvent {
                                case: id,
                                day: today,
                                kind: EscrowEventKind::BlockedOnReimbursement,
                            });
                        }
                        close = false;
                    }
                }
                EscrowCase::CreditLine {
                    lender,
                    limit,
                    expiry,
                    drawn,
                    held,
                    ..
                } => {
                    if today >= *expiry {
                        let bonds = core::mem::take(held);
                        let returned = bonds.len();
                        // Custody always carries exactly the undrawn part.
                        debug_assert_eq!(returned, *limit - *drawn);
                        let to = lender.clone();
                        ledger_mut(ledgers, &to)?.deposit(bonds);
                        events.push(EscrowEvent {
                            case: id,
                            day: today,
                            kind: EscrowEventKind::LineExpired { returned },
                        });
                    } else {
                        close = false;
                    }
                }
            }
            if close {
                rec.closed = true;
            }
        }
        Ok(events)
    }
}
