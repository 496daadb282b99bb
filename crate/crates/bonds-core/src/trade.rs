//! Two-phase trade protocol: propose, then respond exactly once.
//!
//! A proposal physically locks the offered bonds: they leave the proposer's
//! holdings and travel inside the [`TradeProposal`]. From then on every bond
//! is in exactly one place (a ledger, a proposal, or a response in flight),
//! so conservation can be audited at any instant.
//!
//! Two proposal shapes are answered mechanically, because refusing them is
//! refusing money:
//!
//! - *payment*: nothing is asked in return, so the offer is absorbed as is,
//!   whoever issued the bonds;
//! - *redemption*: a single bond issued by the recipient, already mature by
//!   the recipient's own local date, offered for a single bond. The issuer
//!   must honor its matured debt if it can; if it cannot supply the asked
//!   bond, it declines but must attach a menu of what it does hold.
//!
//! Everything else is deferred to the recipient's discretion.

use alloc::vec::Vec;
use core::fmt;

use crate::bond::{normalize_lots, AgentId, Bond, BondMultiset, Lot, SelectError};
use crate::ledger::AgentLedger;

/// Correlates a response with its proposal. Uniqueness is the caller's
/// concern (a simulator sequence number works).
pub type ProposalId = u64;

/// The lot-level shape of an exchange: what one side gives and wants back.
#[derive(Clone, PartialEq, Eq, Debug)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SwapSpec {
    pub give: Vec<Lot>,
    pub want: Vec<Lot>,
}

impl SwapSpec {
    pub fn new(give: Vec<Lot>, want: Vec<Lot>) -> Self {
        SwapSpec {
            give: normalize_lots(&give),
            want: normalize_lots(&want),
        }
    }
}

/// An outstanding proposal, carrying the locked offered bonds.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct TradeProposal {
    pub id: ProposalId,
    pub from: AgentId,
    pub to: AgentId,
    /// Concrete bonds moved out of the proposer's holdings.
    pub offered: BondMultiset,
    /// What the proposer asks in exchange; empty means a payment.
    pub want: Vec<Lot>,
}

/// The single reply a recipient gives to a proposal.
#[derive(Clone, PartialEq, Eq, Debug)]
pub enum TradeResponse {
    /// The exchange happened; `bonds` are the recipient's side, headed back
    /// to the proposer (empty for a payment).
    Accept { id: ProposalId, bonds: BondMultiset },
    /// The offer comes back untouched.
    Decline {
        id: ProposalId,
        returned: BondMultiset,
    },
    /// A redemption the issuer could not satisfy: the offer comes back with
    /// a menu of candidate bonds the issuer does hold, one per issuer, each
    /// the earliest maturity held. The menu is informational; nothing in it
    /// is reserved.
    DeclineWithMenu {
        id: ProposalId,
        returned: BondMultiset,
        menu: Vec<Bond>,
    },
}

impl TradeResponse {
    pub fn id(&self) -> ProposalId {
        match self {
            TradeResponse::Accept { id, .. }
            | TradeResponse::Decline { id, .. }
            | TradeResponse::DeclineWithMenu { id, .. } => *id,
        }
    }
}

/// How a proposal is answered: mechanically or at the recipient's
/// discretion.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum TradeClass {
    Payment,
    Redemption,
    Normal,
}

/// Result of the mechanical response pass.
#[derive(Clone, PartialEq, Eq, Debug)]
pub enum AutoOutcome {
    Responded(TradeResponse),
    /// A normal trade: the recipient must decide, so the proposal survives.
    Deferred(TradeProposal),
}

/// What the proposer learns when the response arrives.
#[derive(Clone, PartialEq, Eq, Debug)]
pub enum SettleOutcome {
    Completed {
        received: BondMultiset,
    },
    /// Declined; the menu is empty unless the recipient attached one.
    Declined {
        menu: Vec<Bond>,
    },
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub enum TradeError {
    SelfTrade {
        agent: AgentId,
    },
    /// Neither side would move any bond.
    EmptyProposal,
    /// The proposer does not hold what it offers.
    ShortOnOffer(SelectError),
    /// The recipient does not hold what is asked.
    ShortOnWant(SelectError),
    /// The proposal is addressed to someone else.
    WrongParty {
        expected: AgentId,
        got: AgentId,
    },
    /// The response does not match the remembered proposal.
    ResponseMismatch {
        id: ProposalId,
    },
}

impl fmt::Display for TradeError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TradeError::SelfTrade { agent } => write!(f, "{agent} cannot trade with itself"),
            TradeError::EmptyProposal => f.write_str("proposal moves no bonds in either direction"),
            TradeError::ShortOnOffer(e) => write!(f, "offer not covered: {e}"),
            TradeError::ShortOnWant(e) => write!(f, "want not covered: {e}"),
            TradeError::WrongParty { expected, got } => {
                write!(f, "proposal addressed to {expected}, handled by {got}")
            }
            TradeError::ResponseMismatch { id } => {
                write!(f, "response does not match proposal {id}")
            }
        }
    }
}

impl core::error::Error for TradeError {}

/// Open a proposal: move the offered lots out of the proposer's holdings
/// into the proposal. Asking without giving is legal; a proposal that moves
/// nothing either way is not.
pub fn propose_trade(
    proposer: &mut AgentLedger,
    to: &AgentId,
    id: ProposalId,
    give: &[Lot],
    want: &[Lot],
) -> Result<TradeProposal, TradeError> {
    if proposer.owner() == to {
        return Err(TradeError::SelfTrade { agent: to.clone() });
    }
    let give = normalize_lots(give);
    let want = normalize_lots(want);
    if give.is_empty() && want.is_empty() {
        return Err(TradeError::EmptyProposal);
    }
    let offered = proposer
        .withdraw_lots(&give)
        .map_err(TradeError::ShortOnOffer)?;
    Ok(TradeProposal {
        id,
        from: proposer.owner().clone(),
        to: to.clone(),
        offered,
        want,
    })
}

/// Classify a proposal from the recipient's point of view. Redemption is
/// judged against the *recipient's* local date: only the issuer's own clock
/// decides whether its paper has come due.
pub fn classify_trade(proposal: &TradeProposal, recipient: &AgentLedger) -> TradeClass {
    if proposal.want.is_empty() {
        return TradeClass::Payment;
    }
    let single_want = proposal.want.len() == 1 && proposal.want[0].count == 1;
    if single_want && proposal.offered.len() == 1 {
        let coin = proposal.offered.iter_bonds().next().expect("len checked");
        if coin.issuer == *recipient.owner() && coin.maturity <= recipient.local_date() {
            return TradeClass::Redemption;
        }
    }
    TradeClass::Normal
}

/// The decline menu: for every other issuer represented in the holdings,
/// the held bond with the earliest maturity, listed in issuer order. The
/// holder's own issue is omitted (offering an issuer its own paper back
/// answers nothing), and bonds locked in outstanding proposals are not in
/// the holdings, so they never appear.
pub fn build_menu(recipient: &AgentLedger) -> Vec<Bond> {
    let mut best: alloc::collections::BTreeMap<AgentId, Bond> = alloc::collections::BTreeMap::new();
    for run in recipient.holdings().runs() {
        if run.issuer == *recipient.owner() {
            continue;
        }
        let candidate = Bond {
            issuer: run.issuer.clone(),
            maturity: run.maturity,
            serial: run.first_serial,
        };
        match best.get(&run.issuer) {
            Some(b) if (b.maturity, b.serial) <= (candidate.maturity, candidate.serial) => {}
            _ => {
                best.insert(run.issuer.clone(), candidate);
            }
        }
    }
    best.into_values().collect()
}

/// Accept a proposal: the recipient hands over the wanted lots and absorbs
/// the offer. On failure the proposal is handed back untouched along with
/// the error, so its bonds are never stranded.
#[allow(clippy::result_large_err)]
pub fn accept_trade(
    proposal: TradeProposal,
    recipient: &mut AgentLedger,
) -> Result<TradeResponse, (TradeProposal, TradeError)> {
    if proposal.to != *recipient.owner() {
        let err = TradeError::WrongParty {
            expected: proposal.to.clone(),
            got: recipient.owner().clone(),
        };
        return Err((proposal, err));
    }
    let bonds = match recipient.withdraw_lots(&proposal.want) {
        Ok(b) => b,
        Err(e) => return Err((proposal, TradeError::ShortOnWant(e))),
    };
    let id = proposal.id;
    recipient.deposit(proposal.offered);
    Ok(TradeResponse::Accept { id, bonds })
}

/// Decline a proposal, sending the offered bonds back as they came.
pub fn decline_trade(proposal: TradeProposal) -> TradeResponse {
    TradeResponse::Decline {
        id: proposal.id,
        returned: proposal.offered,
    }
}

/// Mechanical response pass: payments are absorbed, redemptions are honored
/// or declined-with-menu, and anything else is left for the recipient to
/// decide.
#[allow(clippy::result_large_err)]
pub fn respond_auto(
    proposal: TradeProposal,
    recipient: &mut AgentLedger,
) -> Result<AutoOutcome, (TradeProposal, TradeError)> {
    if proposal.to != *recipient.owner() {
        let err = TradeError::WrongParty {
            expected: proposal.to.clone(),
            got: recipient.owner().clone(),
        };
        return Err((proposal, err));
    }
    match classify_trade(&proposal, recipient) {
        TradeClass::Payment => {
            let id = proposal.id;
            recipient.deposit(proposal.offered);
            Ok(AutoOutcome::Responded(TradeResponse::Accept {
                id,
                bonds: BondMultiset::new(),
            }))
        }
        TradeClass::Redemption => {
            let lot = &proposal.want[0];
            if recipient
                .holdings()
                .first_exact(&lot.issuer, lot.maturity)
                .is_some()
            {
                match accept_trade(proposal, recipient) {
                    Ok(resp) => Ok(AutoOutcome::Responded(resp)),
                    Err(e) => Err(e),
                }
            } else {
                let menu = build_menu(recipient);
                Ok(AutoOutcome::Responded(TradeResponse::DeclineWithMenu {
                    id: proposal.id,
                    returned: proposal.offered,
                    menu,
                }))
            }
        }
        TradeClass::Normal => Ok(AutoOutcome::Deferred(proposal)),
    }
}

/// Settle a response against the proposer's remembered copy of the
/// proposal. Accepted: the received bonds must cover exactly the wanted
/// lots. Declined: the very same bonds must come back, serial for serial.
pub fn settle_response(
    proposer: &mut AgentLedger,
    remembered: &TradeProposal,
    response: TradeResponse,
) -> Result<SettleOutcome, TradeError> {
    if response.id() != remembered.id {
        return Err(TradeError::ResponseMismatch { id: response.id() });
    }
    match response {
        TradeResponse::Accept { bonds, .. } => {
            if bonds.as_lots() != remembered.want {
                return Err(TradeError::ResponseMismatch { id: remembered.id });
            }
            let received = bonds.clone();
            proposer.deposit(bonds);
            Ok(SettleOutcome::Completed { received })
        }
        TradeResponse::Decline { returned, .. } => {
            if !returned.same_bonds(&remembered.offered) {
                return Err(TradeError::ResponseMismatch { id: remembered.id });
            }
            proposer.deposit(returned);
            Ok(SettleOutcome::Declined { menu: Vec::new() })
        }
        TradeResponse::DeclineWithMenu { returned, menu, .. } => {
            if !returned.same_bonds(&remembered.offered) {
                return Err(TradeError::ResponseMismatch { id: remembered.id });
            }
            proposer.deposit(returned);
            Ok(SettleOutcome::Declined { menu })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn id(s: &str) -> AgentId {
        AgentId::new(s)
    }

    fn funded(name: &str, mints: &[(u64, u64)]) -> AgentLedger {
        let mut ledger = AgentLedger::new(name);
        for (count, maturity) in mints {
            ledger.mint(*count, *maturity).unwrap();
        }
        ledger
    }

    /// Give `holder` `count` bonds freshly minted by `issuer`.
    fn hand_over(issuer: &mut AgentLedger, holder: &mut AgentLedger, count: u64, maturity: u64) {
        issuer.mint(count, maturity).unwrap();
        let lot = vec![Lot::new(issuer.owner().clone(), maturity, count)];
        let bonds = issuer.withdraw_lots(&lot).unwrap();
        holder.deposit(bonds);
    }

    #[test]
    fn propose_locks_the_offer() {
        let mut alice = funded("alice", &[(10, 0)]);
        let proposal = propose_trade(
            &mut alice,
            &id("bob"),
            1,
            &[Lot::new("alice", 0, 4)],
            &[Lot::new("bob", 0, 4)],
        )
        .unwrap();
        assert_eq!(alice.holdings().len(), 6);
        assert_eq!(proposal.offered.len(), 4);
        // Shortfall: untouched ledger, no proposal.
        let err =
            propose_trade(&mut alice, &id("bob"), 2, &[Lot::new("alice", 0, 7)], &[]).unwrap_err();
        assert!(matches!(err, TradeError::ShortOnOffer(_)));
        assert_eq!(alice.holdings().len(), 6);
    }

    #[test]
    fn empty_both_ways_is_rejected_but_pure_request_is_not() {
        let mut alice = funded("alice", &[(1, 0)]);
        assert_eq!(
            propose_trade(&mut alice, &id("bob"), 1, &[], &[]).unwrap_err(),
            TradeError::EmptyProposal
        );
        let proposal =
            propose_trade(&mut alice, &id("bob"), 2, &[], &[Lot::new("bob", 5, 2)]).unwrap();
        assert!(proposal.offered.is_empty());
        let bob = funded("bob", &[(5, 5)]);
        assert_eq!(classify_trade(&proposal, &bob), TradeClass::Normal);
    }

    #[test]
    fn classification_covers_the_three_shapes() {
        let mut alice = funded("alice", &[(5, 0)]);
        let mut bob = funded("bob", &[(5, 0), (3, 9)]);
        hand_over(&mut bob, &mut alice, 2, 0);

        // Want empty: payment, whoever issued the bonds.
        let p = propose_trade(&mut alice, &id("bob"), 1, &[Lot::new("alice", 0, 2)], &[]).unwrap();
        assert_eq!(classify_trade(&p, &bob), TradeClass::Payment);

        // Single mature bob-issued coin for a single bond: redemption.
        let p = propose_trade(
            &mut alice,
            &id("bob"),
            2,
            &[Lot::new("bob", 0, 1)],
            &[Lot::new("alice", 0, 1)],
        )
        .unwrap();
        assert_eq!(classify_trade(&p, &bob), TradeClass::Redemption);

        // Same shape but the coin is not yet mature on bob's clock: normal.
        hand_over(&mut bob, &mut alice, 1, 9);
        let p = propose_trade(
            &mut alice,
            &id("bob"),
            3,
            &[Lot::new("bob", 9, 1)],
            &[Lot::new("alice", 0, 1)],
        )
        .unwrap();
        assert_eq!(classify_trade(&p, &bob), TradeClass::Normal);

        // Two bonds given, or more than one wanted: normal.
        let p = propose_trade(
            &mut alice,
            &id("bob"),
            4,
            &[Lot::new("bob", 0, 1), Lot::new("alice", 0, 1)],
            &[Lot::new("alice", 0, 1)],
        )
        .unwrap();
        assert_eq!(classify_trade(&p, &bob), TradeClass::Normal);
    }

    #[test]
    fn payment_is_absorbed_even_for_third_party_bonds() {
        let mut alice = funded("alice", &[(1, 0)]);
        let mut carol = funded("carol", &[(0, 0); 0]);
        hand_over(&mut carol, &mut alice, 3, 0);
        let mut bob = funded("bob", &[(1, 0)]);
        let p = propose_trade(&mut alice, &id("bob"), 7, &[Lot::new("carol", 0, 3)], &[]).unwrap();
        let remembered = p.clone();
        let outcome = respond_auto(p, &mut bob).unwrap();
        let AutoOutcome::Responded(resp) = outcome else {
            panic!("payment must respond")
        };
        assert_eq!(bob.holdings().count_exact(&id("carol"), 0), 3);
        let settled = settle_response(&mut alice, &remembered, resp).unwrap();
        assert_eq!(
            settled,
            SettleOutcome::Completed {
                received: BondMultiset::new()
            }
        );
        assert_eq!(alice.holdings().count_exact(&id("carol"), 0), 0);
    }

    #[test]
    fn satisfiable_redemption_is_honored() {
        // frank holds a mature diana-coin and wants his own bond back.
        let mut diana = AgentLedger::new("diana");
        let mut frank = AgentLedger::new("frank");
        hand_over(&mut diana, &mut frank, 1, 0);
        hand_over(&mut frank, &mut diana, 1, 28);

        let p = propose_trade(
            &mut frank,
            &id("diana"),
            1,
            &[Lot::new("diana", 0, 1)],
            &[Lot::new("frank", 28, 1)],
        )
        .unwrap();
        let remembered = p.clone();
        let AutoOutcome::Responded(resp) = respond_auto(p, &mut diana).unwrap() else {
            panic!("redemption must respond")
        };
        assert!(matches!(resp, TradeResponse::Accept { .. }));
        settle_response(&mut frank, &remembered, resp).unwrap();
        assert_eq!(frank.holdings().count_exact(&id("frank"), 28), 1);
        assert_eq!(diana.holdings().count_exact(&id("diana"), 0), 1);
    }

    #[test]
    fn unsatisfiable_redemption_returns_offer_with_menu() {
        let mut bob = funded("bob", &[(1, 0), (2, 9)]);
        let mut alice = AgentLedger::new("alice");
        let coin = bob.withdraw_lots(&[Lot::new("bob", 0, 1)]).unwrap();
        alice.deposit(coin);
        // Stock bob with two other issuers, several maturities each.
        let mut carol = AgentLedger::new("carol");
        let mut dave = AgentLedger::new("dave");
        hand_over(&mut carol, &mut bob, 1, 7);
        hand_over(&mut carol, &mut bob, 1, 3);
        hand_over(&mut dave, &mut bob, 2, 1);

        let p = propose_trade(
            &mut alice,
            &id("bob"),
            9,
            &[Lot::new("bob", 0, 1)],
            &[Lot::new("alice", 0, 1)], // bob holds no alice paper
        )
        .unwrap();
        let remembered = p.clone();
        let AutoOutcome::Responded(resp) = respond_auto(p, &mut bob).unwrap() else {
            panic!("redemption must respond")
        };
        let TradeResponse::DeclineWithMenu { ref menu, .. } = resp else {
            panic!("expected a menu, got {resp:?}")
        };
        // One entry per foreign issuer, earliest maturity, issuer order;
        // bob's own bonds stay out.
        assert_eq!(
            menu.iter()
                .map(|b| (b.issuer.as_str(), b.maturity))
                .collect::<Vec<_>>(),
            vec![("carol", 3), ("dave", 1)]
        );
        let settled = settle_response(&mut alice, &remembered, resp).unwrap();
        assert!(matches!(settled, SettleOutcome::Declined { ref menu } if menu.len() == 2));
        // The very coin came back.
        assert_eq!(
            alice.holdings().first_exact(&id("bob"), 0),
            Some(Bond {
                issuer: id("bob"),
                maturity: 0,
                serial: 0
            })
        );
    }

    #[test]
    fn normal_trades_defer_and_accept_or_decline_cleanly() {
        let mut alice = funded("alice", &[(5, 0)]);
        let mut bob = funded("bob", &[(5, 0)]);
        let p = propose_trade(
            &mut alice,
            &id("bob"),
            1,
            &[Lot::new("alice", 0, 5)],
            &[Lot::new("bob", 0, 5)],
        )
        .unwrap();
        let remembered = p.clone();
        let AutoOutcome::Deferred(p) = respond_auto(p, &mut bob).unwrap() else {
            panic!("normal trade must defer")
        };
        let resp = accept_trade(p, &mut bob).unwrap();
        settle_response(&mut alice, &remembered, resp).unwrap();
        assert_eq!(alice.holdings().count_exact(&id("bob"), 0), 5);
        assert_eq!(bob.holdings().count_exact(&id("alice"), 0), 5);

        // Decline path: everything returns to the proposer.
        let p = propose_trade(
            &mut bob,
            &id("alice"),
            2,
            &[Lot::new("alice", 0, 2)],
            &[Lot::new("bob", 0, 2)],
        )
        .unwrap();
        let remembered = p.clone();
        let resp = decline_trade(p);
        settle_response(&mut bob, &remembered, resp).unwrap();
        assert_eq!(bob.holdings().count_exact(&id("alice"), 0), 5);
    }

    #[test]
    fn failed_accept_returns_the_proposal_intact() {
        let mut alice = funded("alice", &[(2, 0)]);
        let mut bob = funded("bob", &[(1, 0)]);
        let p = propose_trade(
            &mut alice,
            &id("bob"),
            1,
            &[Lot::new("alice", 0, 2)],
            &[Lot::new("bob", 0, 2)], // bob only has 1
        )
        .unwrap();
        let before = bob.clone();
        let (back, err) = accept_trade(p, &mut bob).unwrap_err();
        assert!(matches!(err, TradeError::ShortOnWant(_)));
        assert_eq!(bob, before);
        assert_eq!(back.offered.len(), 2);
        // The proposer can still be made whole by a decline.
        let remembered = back.clone();
        settle_response(&mut alice, &remembered, decline_trade(back)).unwrap();
        assert_eq!(alice.holdings().len(), 2);
    }

    #[test]
    fn settlement_rejects_mismatched_responses() {
        let mut alice = funded("alice", &[(3, 0)]);
        let p = propose_trade(&mut alice, &id("bob"), 5, &[Lot::new("alice", 0, 3)], &[]).unwrap();
        let wrong_id = TradeResponse::Accept {
            id: 6,
            bonds: BondMultiset::new(),
        };
        assert_eq!(
            settle_response(&mut alice, &p, wrong_id).unwrap_err(),
            TradeError::ResponseMismatch { id: 6 }
        );
        // A decline returning different bonds than were offered.
        let mut foreign = AgentLedger::new("mallory");
        foreign.mint(3, 0).unwrap();
        let substitute = foreign.withdraw_lots(&[Lot::new("mallory", 0, 3)]).unwrap();
        let bad = TradeResponse::Decline {
            id: 5,
            returned: substitute,
        };
        assert!(settle_response(&mut alice, &p, bad).is_err());
        assert!(alice.holdings().is_empty());
    }

    proptest::proptest! {
        /// Propose then decline is the identity on the proposer's ledger.
        #[test]
        fn propose_decline_roundtrip(counts in proptest::collection::vec(1u64..6, 1..4)) {
            let mut alice = AgentLedger::new("alice");
            let mut lots = Vec::new();
            for (m, c) in counts.iter().enumerate() {
                alice.mint(*c, m as u64).unwrap();
                lots.push(Lot::new("alice", m as u64, *c));
            }
            let before = alice.clone();
            let p = propose_trade(&mut alice, &id("bob"), 1, &lots, &[]).unwrap();
            let remembered = p.clone();
            settle_response(&mut alice, &remembered, decline_trade(p)).unwrap();
            proptest::prop_assert_eq!(alice, before);
        }
    }
}
