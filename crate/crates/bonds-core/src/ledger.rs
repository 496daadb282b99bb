//! Per-agent ledgers and the five voluntary transitions.
//!
//! Every transition validates first and mutates only on success: on any
//! error the involved ledgers are bit-identical to their pre-states. A bond
//! counts as a coin for whoever holds it exactly when its maturity is at or
//! before that holder's local date; two agents may therefore disagree about
//! whether the same bond is money.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;
use core::fmt;

use crate::bond::{AgentId, Bond, BondMultiset, BondRun, Day, Lot, SelectError, Serial};

/// Transition failure; no ledger involved has been modified.
#[derive(Clone, PartialEq, Eq, Debug)]
pub enum TxnError {
    /// Mint of zero bonds.
    ZeroCount,
    /// Minting would exhaust the serial space; counts are never wrapped.
    SerialOverflow,
    /// Date advance must strictly increase the local date.
    DateNotAdvanced { current: Day, requested: Day },
    /// Pay with no lots, or swap with both sides empty.
    EmptyTransfer,
    /// Pay lots must all be issued by the payee.
    NotPayeeIssue { payee: AgentId, lot: Lot },
    /// The bond is not mature on the acting agent's calendar.
    Immature { maturity: Day, local_date: Day },
    /// Lot selection failed.
    Select(SelectError),
    /// A specific bond is not in the expected ledger.
    NotHeld { owner: AgentId, bond: Bond },
    /// The two ledgers of a pairwise transition must belong to different
    /// agents.
    SameParty { agent: AgentId },
}

impl fmt::Display for TxnError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TxnError::ZeroCount => f.write_str("mint count must be positive"),
            TxnError::SerialOverflow => f.write_str("issuer serial space exhausted"),
            TxnError::DateNotAdvanced { current, requested } => {
                write!(
                    f,
                    "local date must increase: {requested} is not after {current}"
                )
            }
            TxnError::EmptyTransfer => f.write_str("transfer moves no bonds"),
            TxnError::NotPayeeIssue { payee, lot } => {
                write!(f, "payment to {payee} with bonds issued by {}", lot.issuer)
            }
            TxnError::Immature {
                maturity,
                local_date,
            } => {
                write!(
                    f,
                    "bond matures day {maturity}, holder's date is {local_date}"
                )
            }
            TxnError::Select(e) => e.fmt(f),
            TxnError::NotHeld { owner, bond } => {
                write!(
                    f,
                    "{owner} does not hold {} serial {}",
                    bond.issuer, bond.serial
                )
            }
            TxnError::SameParty { agent } => {
                write!(f, "{agent} cannot be both sides of the transition")
            }
        }
    }
}

impl core::error::Error for TxnError {}

impl From<SelectError> for TxnError {
    fn from(e: SelectError) -> Self {
        TxnError::Select(e)
    }
}

/// Result of a mint: the serial range assigned.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct MintReceipt {
    pub issuer: AgentId,
    pub maturity: Day,
    pub first_serial: Serial,
    pub count: u64,
}

impl MintReceipt {
    pub fn bonds(&self) -> BondRun {
        BondRun {
            issuer: self.issuer.clone(),
            maturity: self.maturity,
            first_serial: self.first_serial,
            count: self.count,
        }
    }
}

/// One redeem: the surrendered coin and the bond received for it.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct RedeemReceipt {
    pub holder: AgentId,
    pub issuer: AgentId,
    pub surrendered: Bond,
    pub received: Bond,
}

/// An agent's complete local state: holdings, local date, and the next
/// serial to assign when minting.
#[derive(Clone, PartialEq, Eq, Debug)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct AgentLedger {
    owner: AgentId,
    holdings: BondMultiset,
    local_date: Day,
    next_serial: Serial,
}

impl AgentLedger {
    /// Fresh ledger: empty holdings, day 0, serials from 0.
    pub fn new(owner: impl Into<AgentId>) -> Self {
        AgentLedger {
            owner: owner.into(),
            holdings: BondMultiset::new(),
            local_date: 0,
            next_serial: 0,
        }
    }

    pub fn owner(&self) -> &AgentId {
        &self.owner
    }

    pub fn holdings(&self) -> &BondMultiset {
        &self.holdings
    }

    pub fn local_date(&self) -> Day {
        self.local_date
    }

    /// Serials handed out so far; also the total this agent ever minted.
    pub fn next_serial(&self) -> Serial {
        self.next_serial
    }

    /// Is `bond` money from this agent's point of view?
    pub fn is_coin(&self, bond: &Bond) -> bool {
        bond.maturity <= self.local_date
    }

    /// Mint `count` fresh bonds maturing on `maturity`, assigning the next
    /// contiguous serial range. Guarded by the issuer alone.
    pub fn mint(&mut self, count: u64, maturity: Day) -> Result<MintReceipt, TxnError> {
        if count == 0 {
            return Err(TxnError::ZeroCount);
        }
        let first = self.next_serial;
        let next = first.checked_add(count).ok_or(TxnError::SerialOverflow)?;
        let receipt = MintReceipt {
            issuer: self.owner.clone(),
            maturity,
            first_serial: first,
            count,
        };
        self.holdings.push_run(receipt.bonds());
        self.next_serial = next;
        Ok(receipt)
    }

    /// Strictly advance the local date. Unguarded: any agent may do this at
    /// any time, and agents' dates are never reconciled.
    pub fn advance_date(&mut self, to: Day) -> Result<(), TxnError> {
        if to <= self.local_date {
            return Err(TxnError::DateNotAdvanced {
                current: self.local_date,
                requested: to,
            });
        }
        self.local_date = to;
        Ok(())
    }

    /// Move the given lots out of the holdings as concrete bonds, all or
    /// nothing. This is the custody hand-off primitive: the returned bonds
    /// now live wherever the caller puts them (a proposal, an escrow case),
    /// and conservation audits count them there.
    pub fn withdraw_lots(&mut self, lots: &[Lot]) -> Result<BondMultiset, SelectError> {
        let (selected, remaining) = self.holdings.select_lots(lots)?;
        self.holdings = remaining;
        Ok(selected)
    }

    /// Take custody of concrete bonds, the inverse of [`Self::withdraw_lots`].
    pub fn deposit(&mut self, bonds: BondMultiset) {
        self.holdings.absorb(bonds);
    }

    /// Move bonds in without any check; used by transitions after validation.
    fn absorb(&mut self, bonds: BondMultiset) {
        self.holdings.absorb(bonds);
    }
}

/// Pay `lots` (which must be payee-issued coins mature on the payer's
/// calendar) from payer to payee. Guarded by the payer alone: one cannot
/// refuse one's own money back.
pub fn apply_pay(
    payer: &mut AgentLedger,
    payee: &mut AgentLedger,
    lots: &[Lot],
) -> Result<BondMultiset, TxnError> {
    if payer.owner == payee.owner {
        return Err(TxnError::SameParty {
            agent: payer.owner.clone(),
        });
    }
    if lots.iter().all(|l| l.count == 0) {
        return Err(TxnError::EmptyTransfer);
    }
    for lot in lots {
        if lot.issuer != payee.owner {
            return Err(TxnError::NotPayeeIssue {
                payee: payee.owner.clone(),
                lot: lot.clone(),
            });
        }
        if lot.maturity > payer.local_date {
            return Err(TxnError::Immature {
                maturity: lot.maturity,
                local_date: payer.local_date,
            });
        }
    }
    let (selected, remaining) = payer.holdings.select_lots(lots)?;
    payer.holdings = remaining;
    payee.absorb(selected.clone());
    Ok(selected)
}

/// Redeem one mature `coin` issued by `issuer_ledger`'s owner against any
/// single bond that issuer holds, `wanted` (which may itself be a bond the
/// redeemer issued). Guarded by the holder alone.
pub fn apply_redeem(
    holder: &mut AgentLedger,
    issuer_ledger: &mut AgentLedger,
    coin: &Bond,
    wanted: &Bond,
) -> Result<RedeemReceipt, TxnError> {
    if holder.owner == issuer_ledger.owner {
        return Err(TxnError::SameParty {
            agent: holder.owner.clone(),
        });
    }
    if coin.issuer != issuer_ledger.owner {
        return Err(TxnError::NotPayeeIssue {
            payee: issuer_ledger.owner.clone(),
            lot: Lot {
                issuer: coin.issuer.clone(),
                maturity: coin.maturity,
                count: 1,
            },
        });
    }
    if !holder.is_coin(coin) {
        return Err(TxnError::Immature {
            maturity: coin.maturity,
            local_date: holder.local_date,
        });
    }
    if !holder.holdings.contains_bond(coin) {
        return Err(TxnError::NotHeld {
            owner: holder.owner.clone(),
            bond: coin.clone(),
        });
    }
    if !issuer_ledger.holdings.contains_bond(wanted) {
        return Err(TxnError::NotHeld {
            owner: issuer_ledger.owner.clone(),
            bond: wanted.clone(),
        });
    }
    holder.holdings.remove_bond(coin).expect("checked above");
    issuer_ledger
        .holdings
        .remove_bond(wanted)
        .expect("checked above");
    holder.holdings.push_bond(wanted);
    issuer_ledger.holdings.push_bond(coin);
    Ok(RedeemReceipt {
        holder: holder.owner.clone(),
        issuer: issuer_ledger.owner.clone(),
        surrendered: coin.clone(),
        received: wanted.clone(),
    })
}

/// Atomically exchange exact bond multisets: `x` leaves `a` for `b`, `y`
/// leaves `b` for `a`. One side may be empty, not both. Guarded by both
/// parties; consent is the caller's concern.
pub fn apply_swap(
    a: &mut AgentLedger,
    b: &mut AgentLedger,
    x: &BondMultiset,
    y: &BondMultiset,
) -> Result<(), TxnError> {
    if a.owner == b.owner {
        return Err(TxnError::SameParty {
            agent: a.owner.clone(),
        });
    }
    if x.is_empty() && y.is_empty() {
        return Err(TxnError::EmptyTransfer);
    }
    if !a.holdings.contains_all(x) {
        let bond = x
            .iter_bonds()
            .find(|bd| !a.holdings.contains_bond(bd))
            .expect("some missing");
        return Err(TxnError::NotHeld {
            owner: a.owner.clone(),
            bond,
        });
    }
    if !b.holdings.contains_all(y) {
        let bond = y
            .iter_bonds()
            .find(|bd| !b.holdings.contains_bond(bd))
            .expect("some missing");
        return Err(TxnError::NotHeld {
            owner: b.owner.clone(),
            bond,
        });
    }
    a.holdings.remove_exact(x).expect("checked above");
    b.holdings.remove_exact(y).expect("checked above");
    a.absorb(y.clone());
    b.absorb(x.clone());
    Ok(())
}

/// Chain-redemption failure. `link` is the position of the first agent on
/// the path that lacks a usable bond of its successor.
#[derive(Clone, PartialEq, Eq, Debug)]
pub enum ChainError {
    EmptyPath,
    RepeatedAgent {
        agent: AgentId,
    },
    UnknownAgent {
        agent: AgentId,
    },
    /// `path[link]` holds no bond of `path[link + 1]` that is mature on the
    /// initiator's calendar.
    BrokenLink {
        link: usize,
        holder: AgentId,
        issuer: AgentId,
    },
}

impl fmt::Display for ChainError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ChainError::EmptyPath => f.write_str("redemption path is empty"),
            ChainError::RepeatedAgent { agent } => {
                write!(f, "agent {agent} appears twice on the path")
            }
            ChainError::UnknownAgent { agent } => write!(f, "no ledger for {agent}"),
            ChainError::BrokenLink {
                link,
                holder,
                issuer,
            } => {
                write!(f, "link {link}: {holder} holds no usable bond of {issuer}")
            }
        }
    }
}

impl core::error::Error for ChainError {}

/// Walk a debt chain `p_0, p_1, …, p_k` where each `p_i` holds a bond of
/// `p_{i+1}`: the initiator `p_0` redeems its `p_1`-coin for `p_1`'s
/// `p_2`-bond, then that for `p_2`'s `p_3`-bond, and so on. Exactly `k − 1`
/// redemptions run for a path of `k` links, and `p_0` ends holding a
/// `p_k`-coin. Every bond on the chain must be mature on `p_0`'s calendar,
/// since `p_0` surrenders each one in turn. The whole chain is validated
/// before any redeem executes; a broken link changes nothing.
pub fn chain_redeem(
    ledgers: &mut BTreeMap<AgentId, AgentLedger>,
    path: &[AgentId],
) -> Result<Vec<RedeemReceipt>, ChainError> {
    if path.is_empty() {
        return Err(ChainError::EmptyPath);
    }
    for (i, agent) in path.iter().enumerate() {
        if path[..i].contains(agent) {
            return Err(ChainError::RepeatedAgent {
                agent: agent.clone(),
            });
        }
        if !ledgers.contains_key(agent) {
            return Err(ChainError::UnknownAgent {
                agent: agent.clone(),
            });
        }
    }
    let initiator_date = ledgers[&path[0]].local_date();

    // Plan: pick, per link, the first bond of the successor held by the
    // predecessor that is mature for the initiator. Later links may depend
    // on bonds staying put, which validation-before-execution guarantees.
    let mut picks: Vec<Bond> = Vec::with_capacity(path.len().saturating_sub(1));
    for (i, window) in path.windows(2).enumerate() {
        let holder = &window[0];
        let issuer = &window[1];
        let bond = ledgers[holder]
            .holdings()
            .first_of_issuer(issuer, Some(initiator_date))
            .ok_or_else(|| ChainError::BrokenLink {
                link: i,
                holder: holder.clone(),
                issuer: issuer.clone(),
            })?;
        picks.push(bond);
    }

    let mut receipts = Vec::new();
    // picks[0] is p_0's own coin of p_1; each following pick is what p_0
    // takes next. The i-th redeem surrenders picks[i] to its issuer for
    // picks[i + 1].
    for i in 0..picks.len().saturating_sub(1) {
        let coin = picks[i].clone();
        let wanted = picks[i + 1].clone();
        let issuer = path[i + 1].clone();
        let initiator = path[0].clone();
        let mut holder_ledger = ledgers.remove(&initiator).expect("validated");
        let mut issuer_ledger = ledgers.remove(&issuer).expect("validated");
        let receipt = apply_redeem(&mut holder_ledger, &mut issuer_ledger, &coin, &wanted)
            .expect("chain validated before execution");
        ledgers.insert(initiator, holder_ledger);
        ledgers.insert(issuer, issuer_ledger);
        receipts.push(receipt);
    }
    Ok(receipts)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn id(s: &str) -> AgentId {
        AgentId::new(s)
    }

    #[test]
    fn mint_assigns_contiguous_serials() {
        let mut alice = AgentLedger::new("alice");
        let r1 = alice.mint(15, 0).unwrap();
        assert_eq!((r1.first_serial, r1.count), (0, 15));
        let r2 = alice.mint(3, 9).unwrap();
        assert_eq!((r2.first_serial, r2.count), (15, 3));
        // Oracle: replaying the mints as an enumeration yields serials 0..18
        // with no gap or repeat.
        let serials: Vec<Serial> = alice.holdings().iter_bonds().map(|b| b.serial).collect();
        assert_eq!(serials, (0..18).collect::<Vec<_>>());
        assert_eq!(alice.next_serial(), 18);
    }

    #[test]
    fn mint_rejects_zero_and_overflow() {
        let mut p = AgentLedger::new("p");
        assert_eq!(p.mint(0, 0), Err(TxnError::ZeroCount));
        p.mint(1, 0).unwrap();
        let before = p.clone();
        assert_eq!(p.mint(u64::MAX, 0), Err(TxnError::SerialOverflow));
        assert_eq!(p, before);
    }

    #[test]
    fn advance_must_strictly_increase() {
        let mut p = AgentLedger::new("p");
        p.advance_date(25).unwrap();
        assert_eq!(
            p.advance_date(25),
            Err(TxnError::DateNotAdvanced {
                current: 25,
                requested: 25
            })
        );
        // After advancing, a bond maturing day 25 is a coin for this holder.
        let bond = Bond {
            issuer: id("bob"),
            maturity: 25,
            serial: 0,
        };
        assert!(p.is_coin(&bond));
    }

    #[test]
    fn maturity_is_observer_relative() {
        let mut bob = AgentLedger::new("bob");
        bob.advance_date(25).unwrap();
        let diana = AgentLedger::new("diana");
        let bond = Bond {
            issuer: id("bob"),
            maturity: 25,
            serial: 0,
        };
        assert!(bob.is_coin(&bond));
        assert!(!diana.is_coin(&bond));
    }

    #[test]
    fn pay_moves_mature_payee_issue_only() {
        let mut alice = AgentLedger::new("alice");
        let mut bob = AgentLedger::new("bob");
        alice.mint(15, 0).unwrap();
        let mut carol = AgentLedger::new("carol");
        // Give bob 15 alice-coins to pay back with.
        let (coins, rest) = alice
            .holdings()
            .select_lots(&[Lot::new("alice", 0, 15)])
            .unwrap();
        alice.holdings = rest;
        bob.absorb(coins);

        let moved = apply_pay(&mut bob, &mut alice, &[Lot::new("alice", 0, 5)]).unwrap();
        assert_eq!(moved.len(), 5);
        assert_eq!(bob.holdings().count_exact(&id("alice"), 0), 10);
        assert_eq!(alice.holdings().count_exact(&id("alice"), 0), 5);

        // Wrong issuer: paying carol with alice-coins is not a payment.
        let err = apply_pay(&mut bob, &mut carol, &[Lot::new("alice", 0, 1)]).unwrap_err();
        assert!(matches!(err, TxnError::NotPayeeIssue { .. }));

        // Immature bonds cannot be paid.
        bob.mint(2, 40).unwrap();
        let err = apply_pay(&mut bob, &mut alice, &[Lot::new("bob", 40, 1)]).unwrap_err();
        assert!(matches!(err, TxnError::NotPayeeIssue { .. })); // not alice's issue either
        let mut bob2 = AgentLedger::new("bob2");
        bob2.mint(2, 40).unwrap();
        let err = apply_pay(&mut bob2, &mut alice, &[]).unwrap_err();
        assert_eq!(err, TxnError::EmptyTransfer);
    }

    #[test]
    fn pay_rejects_immature_payee_issue() {
        let mut diana = AgentLedger::new("diana");
        let mut frank = AgentLedger::new("frank");
        diana.mint(3, 10).unwrap();
        let (bonds, rest) = diana
            .holdings()
            .select_lots(&[Lot::new("diana", 10, 3)])
            .unwrap();
        diana.holdings = rest;
        frank.absorb(bonds);
        let before = (frank.clone(), diana.clone());
        let err = apply_pay(&mut frank, &mut diana, &[Lot::new("diana", 10, 3)]).unwrap_err();
        assert_eq!(
            err,
            TxnError::Immature {
                maturity: 10,
                local_date: 0
            }
        );
        assert_eq!((frank, diana), before);
    }

    #[test]
    fn swap_is_atomic_on_failure() {
        let mut a = AgentLedger::new("a");
        let mut b = AgentLedger::new("b");
        a.mint(3, 0).unwrap();
        b.mint(3, 0).unwrap();
        let x = a.holdings().clone();
        let mut y = b.holdings().clone();
        // Claim a bond b does not hold.
        y.push_run(BondRun {
            issuer: id("b"),
            maturity: 0,
            first_serial: 10,
            count: 1,
        });
        let (pa, pb) = (a.clone(), b.clone());
        let err = apply_swap(&mut a, &mut b, &x, &y).unwrap_err();
        assert!(matches!(err, TxnError::NotHeld { .. }));
        assert_eq!((a.clone(), b.clone()), (pa, pb));

        let y = b.holdings().clone();
        apply_swap(&mut a, &mut b, &x, &y).unwrap();
        assert_eq!(a.holdings().count_exact(&id("b"), 0), 3);
        assert_eq!(b.holdings().count_exact(&id("a"), 0), 3);
    }

    #[test]
    fn swap_one_sided_is_legal_but_not_both_empty() {
        let mut a = AgentLedger::new("a");
        let mut b = AgentLedger::new("b");
        a.mint(2, 0).unwrap();
        let x = a.holdings().clone();
        apply_swap(&mut a, &mut b, &x, &BondMultiset::new()).unwrap();
        assert!(a.holdings().is_empty());
        let err =
            apply_swap(&mut a, &mut b, &BondMultiset::new(), &BondMultiset::new()).unwrap_err();
        assert_eq!(err, TxnError::EmptyTransfer);
    }

    #[test]
    fn redeem_exchanges_single_bonds() {
        // Frank redeems one diana-coin against a bond diana holds; diana
        // gets her own coin back.
        let mut diana = AgentLedger::new("diana");
        let mut frank = AgentLedger::new("frank");
        diana.mint(1, 0).unwrap();
        frank.mint(1, 28).unwrap();
        let coin = Bond {
            issuer: id("diana"),
            maturity: 0,
            serial: 0,
        };
        let frank_bond = Bond {
            issuer: id("frank"),
            maturity: 28,
            serial: 0,
        };
        let x = diana.holdings().clone();
        let y = frank.holdings().clone();
        apply_swap(&mut diana, &mut frank, &x, &y).unwrap();
        // Now frank holds the diana-coin and diana holds the frank-bond.
        let receipt = apply_redeem(&mut frank, &mut diana, &coin, &frank_bond).unwrap();
        assert_eq!(receipt.surrendered, coin);
        assert_eq!(receipt.received, frank_bond);
        // The wanted bond may be the redeemer's own issue: frank just took
        // back his own bond, extinguishing mutual debt.
        assert!(frank.holdings().contains_bond(&frank_bond));
        assert!(diana.holdings().contains_bond(&coin));
    }

    #[test]
    fn redeem_requires_holder_maturity_and_presence() {
        let mut q = AgentLedger::new("q");
        let mut p = AgentLedger::new("p");
        q.mint(1, 5).unwrap();
        p.mint(1, 0).unwrap();
        let qcoin = Bond {
            issuer: id("q"),
            maturity: 5,
            serial: 0,
        };
        let pbond = Bond {
            issuer: id("p"),
            maturity: 0,
            serial: 0,
        };
        let x = q.holdings().clone();
        let y = BondMultiset::new();
        apply_swap(&mut q, &mut p, &x, &y).unwrap();
        // p holds an immature q-bond (p's date is 0 < 5): not yet a coin.
        let err = apply_redeem(&mut p, &mut q, &qcoin, &pbond).unwrap_err();
        assert_eq!(
            err,
            TxnError::Immature {
                maturity: 5,
                local_date: 0
            }
        );
        p.advance_date(5).unwrap();
        // Mature now, but q holds nothing to give in exchange.
        let err = apply_redeem(&mut p, &mut q, &qcoin, &pbond).unwrap_err();
        assert!(matches!(err, TxnError::NotHeld { .. }));
        // Move p's own bond over to q; then the redemption goes through.
        let x = p.holdings().clone();
        let pb = x.select_lots(&[Lot::new("p", 0, 1)]).unwrap().0;
        apply_swap(&mut p, &mut q, &pb, &BondMultiset::new()).unwrap();
        apply_redeem(&mut p, &mut q, &qcoin, &pbond).unwrap();
        assert!(p.holdings().contains_bond(&pbond));
        assert!(q.holdings().contains_bond(&qcoin));
    }

    fn chain_world(k: usize) -> (BTreeMap<AgentId, AgentLedger>, Vec<AgentId>) {
        // p_i holds one bond of p_{i+1}, all maturity 0.
        let path: Vec<AgentId> = (0..=k)
            .map(|i| AgentId::new(alloc::format!("p{i}")))
            .collect();
        let mut ledgers: BTreeMap<AgentId, AgentLedger> = path
            .iter()
            .map(|a| (a.clone(), AgentLedger::new(a.clone())))
            .collect();
        for i in 0..k {
            let issuer = path[i + 1].clone();
            let receipt = ledgers.get_mut(&issuer).unwrap().mint(1, 0).unwrap();
            let holder = path[i].clone();
            let mut moved = BondMultiset::new();
            moved.push_run(receipt.bonds());
            ledgers
                .get_mut(&issuer)
                .unwrap()
                .holdings
                .remove_exact(&moved)
                .unwrap();
            ledgers.get_mut(&holder).unwrap().absorb(moved);
        }
        (ledgers, path)
    }

    #[test]
    fn chain_redeem_walks_the_path() {
        // Three agents: exactly the two-redemption walk.
        let (mut ledgers, path) = chain_world(2);
        let receipts = chain_redeem(&mut ledgers, &path).unwrap();
        assert_eq!(receipts.len(), 1); // 2 links: picks p1-coin, takes p2-bond
        let end = &ledgers[&path[0]];
        assert_eq!(end.holdings().count_exact(&path[2], 0), 1);

        for k in 1..=6usize {
            let (mut ledgers, path) = chain_world(k);
            let receipts = chain_redeem(&mut ledgers, &path).unwrap();
            assert_eq!(receipts.len(), k - 1);
            let p0 = &ledgers[&path[0]];
            let last = path.last().unwrap();
            assert_eq!(p0.holdings().count_exact(last, 0), 1);
            assert!(p0.is_coin(&p0.holdings().first_of_issuer(last, None).unwrap()));
            // Every intermediate issuer got its own bond back.
            for i in 1..k {
                assert_eq!(ledgers[&path[i]].holdings().count_exact(&path[i], 0), 1);
            }
        }
    }

    #[test]
    fn broken_chain_changes_nothing() {
        let (mut ledgers, path) = chain_world(4);
        // Break link 2: remove p2's bond of p3.
        let bond = ledgers[&path[2]]
            .holdings()
            .first_of_issuer(&path[3], None)
            .unwrap();
        ledgers
            .get_mut(&path[2])
            .unwrap()
            .holdings
            .remove_bond(&bond)
            .unwrap();
        let before = ledgers.clone();
        let err = chain_redeem(&mut ledgers, &path).unwrap_err();
        assert_eq!(
            err,
            ChainError::BrokenLink {
                link: 2,
                holder: path[2].clone(),
                issuer: path[3].clone()
            }
        );
        assert_eq!(ledgers, before);
    }
}
