//! Financial instruments compiled down to mints plus one bond swap.
//!
//! Every instrument here is a promise structure: who mints which bonds at
//! which maturities, and one atomic exchange that puts the paper in the
//! right hands. Planning is pure; executing a plan is the caller's job
//! (mint the obligations, then run the swap through the trade protocol).
//! Nothing is eager: an [`InstrumentPlan`] can be inspected, priced, or
//! thrown away without touching a ledger.
//!
//! Repos and currency swaps are two such exchanges in sequence, the second
//! reversing bonds from the first; [`two_leg_sequence`] validates the pair.
//! Interest-rate swaps can instead settle period by period for the net
//! difference; see [`periodic_settlements`].

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::bond::{normalize_lots, AgentId, Day, Lot};
use crate::trade::SwapSpec;

/// An amount of unit bonds due on a given day.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ScheduledAmount {
    pub day: Day,
    pub count: u64,
}

/// How the buyer pays in a sale of debt: with freshly minted own bonds, or
/// with bonds already in hand.
#[derive(Clone, PartialEq, Eq, Debug)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum DebtPayment {
    MintFresh { count: u64, maturity: Day },
    FromHoldings { lots: Vec<Lot> },
}

/// The instruments this module knows how to plan.
#[derive(Clone, PartialEq, Eq, Debug)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(tag = "kind", rename_all = "snake_case"))]
pub enum InstrumentSpec {
    /// Both sides issue `k` bonds maturing the same day and exchange them:
    /// money created pairwise from nothing but mutual trust.
    SymmetricMutualCredit {
        p: AgentId,
        q: AgentId,
        k: u64,
        maturity: Day,
    },
    /// `principal` lender bonds (maturing `funding_maturity`, typically
    /// already money) buy a single repayment of `repayment` borrower bonds
    /// due `due`. The discount `repayment - principal` is the interest.
    ZeroCouponLoan {
        lender: AgentId,
        borrower: AgentId,
        principal: u64,
        repayment: u64,
        funding_maturity: Day,
        due: Day,
    },
    /// Interest installments along the way, the whole principal at the end.
    BalloonLoan {
        lender: AgentId,
        borrower: AgentId,
        principal: u64,
        funding_maturity: Day,
        interest: Vec<ScheduledAmount>,
        principal_due: Day,
    },
    /// Level installments that amortize principal and interest together.
    FixedPaymentLoan {
        lender: AgentId,
        borrower: AgentId,
        principal: u64,
        funding_maturity: Day,
        payments: Vec<ScheduledAmount>,
    },
    /// The seller parts with bonds issued by a third agent; the debtor is
    /// not asked and does not need to be: its obligation is unchanged.
    SaleOfDebt {
        seller: AgentId,
        buyer: AgentId,
        debtor: AgentId,
        sold: Vec<Lot>,
        payment: DebtPayment,
    },
    /// Exchange today of bonds that both mature on `delivery`.
    ForwardContract {
        p: AgentId,
        q: AgentId,
        p_amount: u64,
        q_amount: u64,
        delivery: Day,
    },
    /// Two payment schedules over the same dates: one agreed in advance,
    /// one read off a reference rate (resolve it first; see
    /// [`resolve_variable_leg`]).
    InterestRateSwap {
        fixed_payer: AgentId,
        variable_payer: AgentId,
        fixed: Vec<ScheduledAmount>,
        variable: Vec<ScheduledAmount>,
    },
}

/// Bonds a party must mint before the exchange can settle.
#[derive(Clone, PartialEq, Eq, Debug)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct MintObligation {
    pub agent: AgentId,
    pub count: u64,
    pub maturity: Day,
}

/// A planned instrument: obligations to mint, then one swap proposed by
/// `proposer` to `counterparty` (`swap.give` from the proposer's side).
#[derive(Clone, PartialEq, Eq, Debug)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct InstrumentPlan {
    pub proposer: AgentId,
    pub counterparty: AgentId,
    pub mints: Vec<MintObligation>,
    pub swap: SwapSpec,
}

/// One leg of a two-leg instrument: an exchange scheduled for a day.
#[derive(Clone, PartialEq, Eq, Debug)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct LegPlan {
    pub at: Day,
    pub plan: InstrumentPlan,
}

/// What ties the two legs together.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum TwoLegKind {
    /// Sale with a committed repurchase: the second leg returns exactly the
    /// bonds sold in the first, against a (usually higher) price.
    Repo,
    /// Exchange now, exact reversal later.
    CurrencySwap,
}

#[derive(Clone, PartialEq, Eq, Debug)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TwoLegPlan {
    pub kind: TwoLegKind,
    pub first: LegPlan,
    pub second: LegPlan,
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub enum InstrumentError {
    SameParty {
        agent: AgentId,
    },
    ZeroAmount,
    /// A loan must cost something: repayment below or at principal.
    NoDiscount {
        principal: u64,
        repayment: u64,
    },
    EmptySchedule,
    /// Schedule days must strictly increase.
    UnorderedSchedule {
        day: Day,
    },
    /// An installment falls after the final principal date.
    BeyondFinal {
        day: Day,
        last: Day,
    },
    /// The debtor of a sold bond must be a stranger to the sale.
    DebtorIsParty {
        agent: AgentId,
    },
    /// A sold lot was not issued by the named debtor.
    NotDebtorIssue {
        lot: Lot,
    },
    /// The two legs of a swap must name matching payment dates.
    ScheduleMismatch,
    /// No reference amount known for a settlement day.
    MissingRate {
        day: Day,
    },
    /// This operation applies to a different instrument kind.
    WrongKind,
    /// The second leg would settle before the first.
    LegsOutOfOrder {
        first: Day,
        second: Day,
    },
    /// The second leg does not reverse the first leg's bonds as the kind
    /// requires.
    SecondLegMismatch,
}

impl fmt::Display for InstrumentError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            InstrumentError::SameParty { agent } => {
                write!(f, "{agent} appears on both sides")
            }
            InstrumentError::ZeroAmount => f.write_str("amounts must be positive"),
            InstrumentError::NoDiscount {
                principal,
                repayment,
            } => write!(
                f,
                "repayment {repayment} does not exceed principal {principal}"
            ),
            InstrumentError::EmptySchedule => f.write_str("payment schedule is empty"),
            InstrumentError::UnorderedSchedule { day } => {
                write!(f, "schedule days must strictly increase (at day {day})")
            }
            InstrumentError::BeyondFinal { day, last } => {
                write!(
                    f,
                    "installment on day {day} falls after final payment day {last}"
                )
            }
            InstrumentError::DebtorIsParty { agent } => {
                write!(f, "debtor {agent} cannot be a party to the sale")
            }
            InstrumentError::NotDebtorIssue { lot } => {
                write!(
                    f,
                    "sold lot {}x({}, {}) was not issued by the debtor",
                    lot.count, lot.issuer, lot.maturity
                )
            }
            InstrumentError::ScheduleMismatch => {
                f.write_str("fixed and variable legs name different dates")
            }
            InstrumentError::MissingRate { day } => {
                write!(f, "no reference amount for day {day}")
            }
            InstrumentError::WrongKind => f.write_str("operation applies to another instrument"),
            InstrumentError::LegsOutOfOrder { first, second } => {
                write!(f, "second leg (day {second}) precedes first (day {first})")
            }
            InstrumentError::SecondLegMismatch => {
                f.write_str("second leg does not reverse the first leg's bonds")
            }
        }
    }
}

impl core::error::Error for InstrumentError {}

fn check_distinct(a: &AgentId, b: &AgentId) -> Result<(), InstrumentError> {
    if a == b {
        return Err(InstrumentError::SameParty { agent: a.clone() });
    }
    Ok(())
}

fn check_schedule(schedule: &[ScheduledAmount]) -> Result<(), InstrumentError> {
    if schedule.is_empty() {
        return Err(InstrumentError::EmptySchedule);
    }
    let mut prev: Option<Day> = None;
    for entry in schedule {
        if entry.count == 0 {
            return Err(InstrumentError::ZeroAmount);
        }
        if let Some(p) = prev {
            if entry.day <= p {
                return Err(InstrumentError::UnorderedSchedule { day: entry.day });
            }
        }
        prev = Some(entry.day);
    }
    Ok(())
}

fn schedule_lots(issuer: &AgentId, schedule: &[ScheduledAmount]) -> Vec<Lot> {
    schedule
        .iter()
        .map(|s| Lot::new(issuer.clone(), s.day, s.count))
        .collect()
}

/// Compile an instrument into mint obligations and a single swap. The plan
/// is from the first-named party's seat: the lender, seller, or `p`
/// proposes the exchange.
pub fn plan_instrument(spec: &InstrumentSpec) -> Result<InstrumentPlan, InstrumentError> {
    match spec {
        InstrumentSpec::SymmetricMutualCredit { p, q, k, maturity } => {
            check_distinct(p, q)?;
            if *k == 0 {
                return Err(InstrumentError::ZeroAmount);
            }
            Ok(InstrumentPlan {
                proposer: p.clone(),
                counterparty: q.clone(),
                mints: vec![
                    MintObligation {
                        agent: p.clone(),
                        count: *k,
                        maturity: *maturity,
                    },
                    MintObligation {
                        agent: q.clone(),
                        count: *k,
                        maturity: *maturity,
                    },
                ],
                swap: SwapSpec::new(
                    vec![Lot::new(p.clone(), *maturity, *k)],
                    vec![Lot::new(q.clone(), *maturity, *k)],
                ),
            })
        }
        InstrumentSpec::ZeroCouponLoan {
            lender,
            borrower,
            principal,
            repayment,
            funding_maturity,
            due,
        } => {
            check_distinct(lender, borrower)?;
            if *principal == 0 || *repayment == 0 {
                return Err(InstrumentError::ZeroAmount);
            }
            if repayment <= principal {
                return Err(InstrumentError::NoDiscount {
                    principal: *principal,
                    repayment: *repayment,
                });
            }
            Ok(InstrumentPlan {
                proposer: lender.clone(),
                counterparty: borrower.clone(),
                mints: vec![
                    MintObligation {
                        agent: lender.clone(),
                        count: *principal,
                        maturity: *funding_maturity,
                    },
                    MintObligation {
                        agent: borrower.clone(),
                        count: *repayment,
                        maturity: *due,
                    },
                ],
                swap: SwapSpec::new(
                    vec![Lot::new(lender.clone(), *funding_maturity, *principal)],
                    vec![Lot::new(borrower.clone(), *due, *repayment)],
                ),
            })
        }
        InstrumentSpec::BalloonLoan {
            lender,
            borrower,
            principal,
            funding_maturity,
            interest,
            principal_due,
        } => {
            check_distinct(lender, borrower)?;
            if *principal == 0 {
                return Err(InstrumentError::ZeroAmount);
            }
            check_schedule(interest)?;
            if let Some(last) = interest.last() {
                if last.day > *principal_due {
                    return Err(InstrumentError::BeyondFinal {
                        day: last.day,
                        last: *principal_due,
                    });
                }
            }
            let mut mints = vec![MintObligation {
                agent: lender.clone(),
                count: *principal,
                maturity: *funding_maturity,
            }];
            let mut want = Vec::new();
            for s in interest {
                mints.push(MintObligation {
                    agent: borrower.clone(),
                    count: s.count,
                    maturity: s.day,
                });
                want.push(Lot::new(borrower.clone(), s.day, s.count));
            }
            mints.push(MintObligation {
                agent: borrower.clone(),
                count: *principal,
                maturity: *principal_due,
            });
            want.push(Lot::new(borrower.clone(), *principal_due, *principal));
            Ok(InstrumentPlan {
                proposer: lender.clone(),
                counterparty: borrower.clone(),
                mints,
                swap: SwapSpec::new(
                    vec![Lot::new(lender.clone(), *funding_maturity, *principal)],
                    want,
                ),
            })
        }
        InstrumentSpec::FixedPaymentLoan {
            lender,
            borrower,
            principal,
            funding_maturity,
            payments,
        } => {
            check_distinct(lender, borrower)?;
            if *principal == 0 {
                return Err(InstrumentError::ZeroAmount);
            }
            check_schedule(payments)?;
            let total: u64 = payments.iter().map(|s| s.count).sum();
            if total <= *principal {
                return Err(InstrumentError::NoDiscount {
                    principal: *principal,
                    repayment: total,
                });
            }
            let mut mints = vec![MintObligation {
                agent: lender.clone(),
                count: *principal,
                maturity: *funding_maturity,
            }];
            for s in payments {
                mints.push(MintObligation {
                    agent: borrower.clone(),
                    count: s.count,
                    maturity: s.day,
                });
            }
            Ok(InstrumentPlan {
                proposer: lender.clone(),
                counterparty: borrower.clone(),
                mints,
                swap: SwapSpec::new(
                    vec![Lot::new(lender.clone(), *funding_maturity, *principal)],
                    schedule_lots(borrower, payments),
                ),
            })
        }
        InstrumentSpec::SaleOfDebt {
            seller,
            buyer,
            debtor,
            sold,
            payment,
        } => {
            check_distinct(seller, buyer)?;
            if debtor == seller || debtor == buyer {
                return Err(InstrumentError::DebtorIsParty {
                    agent: debtor.clone(),
                });
            }
            let sold = normalize_lots(sold);
            if sold.is_empty() {
                return Err(InstrumentError::ZeroAmount);
            }
            for lot in &sold {
                if lot.issuer != *debtor {
                    return Err(InstrumentError::NotDebtorIssue { lot: lot.clone() });
                }
            }
            let (mints, price_lots) = match payment {
                DebtPayment::MintFresh { count, maturity } => {
                    if *count == 0 {
                        return Err(InstrumentError::ZeroAmount);
                    }
                    (
                        vec![MintObligation {
                            agent: buyer.clone(),
                            count: *count,
                            maturity: *maturity,
                        }],
                        vec![Lot::new(buyer.clone(), *maturity, *count)],
                    )
                }
                DebtPayment::FromHoldings { lots } => {
                    let lots = normalize_lots(lots);
                    if lots.is_empty() {
                        return Err(InstrumentError::ZeroAmount);
                    }
                    (Vec::new(), lots)
                }
            };
            Ok(InstrumentPlan {
                proposer: seller.clone(),
                counterparty: buyer.clone(),
                mints,
                swap: SwapSpec::new(sold, price_lots),
            })
        }
        InstrumentSpec::ForwardContract {
            p,
            q,
            p_amount,
            q_amount,
            delivery,
        } => {
            check_distinct(p, q)?;
            if *p_amount == 0 || *q_amount == 0 {
                return Err(InstrumentError::ZeroAmount);
            }
            Ok(InstrumentPlan {
                proposer: p.clone(),
                counterparty: q.clone(),
                mints: vec![
                    MintObligation {
                        agent: p.clone(),
                        count: *p_amount,
                        maturity: *delivery,
                    },
                    MintObligation {
                        agent: q.clone(),
                        count: *q_amount,
                        maturity: *delivery,
                    },
                ],
                swap: SwapSpec::new(
                    vec![Lot::new(p.clone(), *delivery, *p_amount)],
                    vec![Lot::new(q.clone(), *delivery, *q_amount)],
                ),
            })
        }
        InstrumentSpec::InterestRateSwap {
            fixed_payer,
            variable_payer,
            fixed,
            variable,
        } => {
            check_distinct(fixed_payer, variable_payer)?;
            check_schedule(fixed)?;
            check_schedule(variable)?;
            if fixed.len() != variable.len()
                || fixed.iter().zip(variable).any(|(a, b)| a.day != b.day)
            {
                return Err(InstrumentError::ScheduleMismatch);
            }
            let mut mints = Vec::new();
            for s in fixed {
                mints.push(MintObligation {
                    agent: fixed_payer.clone(),
                    count: s.count,
                    maturity: s.day,
                });
            }
            for s in variable {
                mints.push(MintObligation {
                    agent: variable_payer.clone(),
                    count: s.count,
                    maturity: s.day,
                });
            }
            Ok(InstrumentPlan {
                proposer: fixed_payer.clone(),
                counterparty: variable_payer.clone(),
                mints,
                swap: SwapSpec::new(
                    schedule_lots(fixed_payer, fixed),
                    schedule_lots(variable_payer, variable),
                ),
            })
        }
    }
}

/// Read the variable leg of a rate swap off a reference series: for each
/// settlement day the series must name the amount due.
pub fn resolve_variable_leg(
    days: &[Day],
    amount_at: impl Fn(Day) -> Option<u64>,
) -> Result<Vec<ScheduledAmount>, InstrumentError> {
    if days.is_empty() {
        return Err(InstrumentError::EmptySchedule);
    }
    let mut out = Vec::with_capacity(days.len());
    for day in days {
        let count = amount_at(*day).ok_or(InstrumentError::MissingRate { day: *day })?;
        if count == 0 {
            return Err(InstrumentError::ZeroAmount);
        }
        out.push(ScheduledAmount { day: *day, count });
    }
    check_schedule(&out)?;
    Ok(out)
}

/// Settle a rate swap date by date for the net difference only: on each
/// settlement day the side owing more issues the difference to the other.
/// Days where the legs tie produce no exchange and are omitted.
pub fn periodic_settlements(
    spec: &InstrumentSpec,
) -> Result<Vec<(Day, InstrumentPlan)>, InstrumentError> {
    let InstrumentSpec::InterestRateSwap {
        fixed_payer,
        variable_payer,
        fixed,
        variable,
    } = spec
    else {
        return Err(InstrumentError::WrongKind);
    };
    // Reuse the gross-plan validation.
    plan_instrument(spec)?;
    let mut out = Vec::new();
    for (f, v) in fixed.iter().zip(variable) {
        let (payer, payee, diff) = if f.count > v.count {
            (fixed_payer, variable_payer, f.count - v.count)
        } else if v.count > f.count {
            (variable_payer, fixed_payer, v.count - f.count)
        } else {
            continue;
        };
        out.push((
            f.day,
            InstrumentPlan {
                proposer: payer.clone(),
                counterparty: payee.clone(),
                mints: vec![MintObligation {
                    agent: payer.clone(),
                    count: diff,
                    maturity: f.day,
                }],
                swap: SwapSpec::new(vec![Lot::new(payer.clone(), f.day, diff)], Vec::new()),
            },
        ));
    }
    Ok(out)
}

/// Validate a two-leg sequence. The second leg must settle no earlier than
/// the first and must reverse the first leg's bonds: for a repo, the bonds
/// the proposer sold come back to it; for a currency swap, the entire
/// exchange is mirrored.
pub fn two_leg_sequence(
    kind: TwoLegKind,
    first: LegPlan,
    second: LegPlan,
) -> Result<TwoLegPlan, InstrumentError> {
    if second.at < first.at {
        return Err(InstrumentError::LegsOutOfOrder {
            first: first.at,
            second: second.at,
        });
    }
    // Same pair of parties on both legs, possibly with seats exchanged.
    let pair_ok = (first.plan.proposer == second.plan.proposer
        && first.plan.counterparty == second.plan.counterparty)
        || (first.plan.proposer == second.plan.counterparty
            && first.plan.counterparty == second.plan.proposer);
    if !pair_ok {
        return Err(InstrumentError::SecondLegMismatch);
    }
    // Express the second leg from the first proposer's seat.
    let (second_give, second_want) = if second.plan.proposer == first.plan.proposer {
        (&second.plan.swap.give, &second.plan.swap.want)
    } else {
        (&second.plan.swap.want, &second.plan.swap.give)
    };
    let reversed = match kind {
        // The sold bonds (first give) must be exactly what returns.
        TwoLegKind::Repo => *second_want == first.plan.swap.give,
        TwoLegKind::CurrencySwap => {
            *second_want == first.plan.swap.give && *second_give == first.plan.swap.want
        }
    };
    if !reversed {
        return Err(InstrumentError::SecondLegMismatch);
    }
    Ok(TwoLegPlan {
        kind,
        first,
        second,
    })
}
