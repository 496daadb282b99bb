//! Serial-exact conservation audit.
//!
//! Bonds are created only by minting and never destroyed, so at any instant
//! the bonds of issuer `p` found across *all* custody locations (agent
//! ledgers, in-flight trade proposals, escrow cases) must be exactly the
//! serials `0..minted_p`, each held in exactly one place. This module checks
//! that from scratch; it trusts nothing but the multisets it is handed.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::bond::{AgentId, BondMultiset, Serial};

/// A named custody location to audit.
pub struct Custody<'a> {
    pub location: String,
    pub bonds: &'a BondMultiset,
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub enum ConservationViolation {
    /// A bond names an issuer with no minted-count entry.
    UnknownIssuer { issuer: AgentId, location: String },
    /// A serial at or past the issuer's next unminted serial.
    UnmintedSerial {
        issuer: AgentId,
        serial: Serial,
        location: String,
    },
    /// The same serial is held in two places at once.
    DuplicateSerial {
        issuer: AgentId,
        serial: Serial,
        locations: (String, String),
    },
    /// Count across all custody differs from the minted count; some bond
    /// has leaked or vanished.
    CountMismatch {
        issuer: AgentId,
        minted: u64,
        located: u64,
    },
}

impl fmt::Display for ConservationViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConservationViolation::UnknownIssuer { issuer, location } => {
                write!(f, "bond of unknown issuer {issuer} in {location}")
            }
            ConservationViolation::UnmintedSerial {
                issuer,
                serial,
                location,
            } => {
                write!(f, "{issuer} serial {serial} in {location} was never minted")
            }
            ConservationViolation::DuplicateSerial {
                issuer,
                serial,
                locations,
            } => write!(
                f,
                "{issuer} serial {serial} held in both {} and {}",
                locations.0, locations.1
            ),
            ConservationViolation::CountMismatch {
                issuer,
                minted,
                located,
            } => {
                write!(f, "{issuer}: minted {minted} bonds but located {located}")
            }
        }
    }
}

impl core::error::Error for ConservationViolation {}

/// Verify that every issuer's bonds are conserved: located multiset equals
/// the minted multiset exactly, serial by serial.
///
/// `minted` maps each issuer to its next unassigned serial (equivalently,
/// its lifetime mint count). All bond-bearing locations must be listed in
/// `custody`; report the first violation in deterministic order.
pub fn audit_conservation(
    minted: &BTreeMap<AgentId, Serial>,
    custody: &[Custody<'_>],
) -> Result<(), ConservationViolation> {
    // (first_serial, count, custody index) intervals per issuer.
    let mut intervals: BTreeMap<&AgentId, Vec<(Serial, u64, usize)>> = BTreeMap::new();
    for (pos, place) in custody.iter().enumerate() {
        for run in place.bonds.runs() {
            if !minted.contains_key(&run.issuer) {
                return Err(ConservationViolation::UnknownIssuer {
                    issuer: run.issuer.clone(),
                    location: place.location.clone(),
                });
            }
            intervals
                .entry(&run.issuer)
                .or_default()
                .push((run.first_serial, run.count, pos));
        }
    }
    for (issuer, next_serial) in minted {
        let mut list = intervals.remove(issuer).unwrap_or_default();
        list.sort();
        let mut located: u64 = 0;
        let mut prev_end: Serial = 0;
        let mut prev_pos: usize = 0;
        for (i, (first, count, pos)) in list.iter().enumerate() {
            let end = first + count;
            if end > *next_serial {
                return Err(ConservationViolation::UnmintedSerial {
                    issuer: issuer.clone(),
                    serial: (*next_serial).max(*first),
                    location: custody[*pos].location.clone(),
                });
            }
            if i > 0 && *first < prev_end {
                return Err(ConservationViolation::DuplicateSerial {
                    issuer: issuer.clone(),
                    serial: *first,
                    locations: (
                        custody[prev_pos].location.clone(),
                        custody[*pos].location.clone(),
                    ),
                });
            }
            located += count;
            prev_end = end;
            prev_pos = *pos;
        }
        if located != *next_serial {
            return Err(ConservationViolation::CountMismatch {
                issuer: issuer.clone(),
                minted: *next_serial,
                located,
            });
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bond::BondRun;
    use alloc::string::ToString;

    fn id(s: &str) -> AgentId {
        AgentId::new(s)
    }

    fn set(runs: &[(&str, u64, u64, u64)]) -> BondMultiset {
        let mut m = BondMultiset::new();
        for (issuer, maturity, first, count) in runs {
            m.push_run(BondRun {
                issuer: id(issuer),
                maturity: *maturity,
                first_serial: *first,
                count: *count,
            });
        }
        m
    }

    fn custody<'a>(places: &'a [(&str, &'a BondMultiset)]) -> Vec<Custody<'a>> {
        places
            .iter()
            .map(|(name, bonds)| Custody {
                location: name.to_string(),
                bonds,
            })
            .collect()
    }

    #[test]
    fn balanced_world_passes() {
        let minted = BTreeMap::from([(id("p"), 10), (id("q"), 4)]);
        let a = set(&[("p", 0, 0, 6), ("q", 3, 0, 4)]);
        let b = set(&[("p", 0, 6, 4)]);
        audit_conservation(&minted, &custody(&[("a", &a), ("b", &b)])).unwrap();
    }

    #[test]
    fn missing_bond_is_a_count_mismatch() {
        let minted = BTreeMap::from([(id("p"), 10)]);
        let a = set(&[("p", 0, 0, 9)]);
        let err = audit_conservation(&minted, &custody(&[("a", &a)])).unwrap_err();
        assert_eq!(
            err,
            ConservationViolation::CountMismatch {
                issuer: id("p"),
                minted: 10,
                located: 9
            }
        );
    }

    #[test]
    fn duplicated_serial_is_caught_across_locations() {
        let minted = BTreeMap::from([(id("p"), 10)]);
        let a = set(&[("p", 0, 0, 6)]);
        let b = set(&[("p", 0, 5, 5)]);
        let err = audit_conservation(&minted, &custody(&[("a", &a), ("b", &b)])).unwrap_err();
        assert!(matches!(
            err,
            ConservationViolation::DuplicateSerial { serial: 5, .. }
        ));
    }

    #[test]
    fn forged_serial_is_caught() {
        let minted = BTreeMap::from([(id("p"), 3)]);
        let a = set(&[("p", 0, 0, 3), ("p", 0, 7, 1)]);
        let err = audit_conservation(&minted, &custody(&[("a", &a)])).unwrap_err();
        assert!(matches!(
            err,
            ConservationViolation::UnmintedSerial { serial: 7, .. }
        ));
    }

    #[test]
    fn unknown_issuer_is_caught() {
        let minted = BTreeMap::new();
        let a = set(&[("ghost", 0, 0, 1)]);
        let err = audit_conservation(&minted, &custody(&[("a", &a)])).unwrap_err();
        assert!(matches!(err, ConservationViolation::UnknownIssuer { .. }));
    }
}
