//! Bond identities and ordered bond multisets.
//!
//! Holdings are stored as runs of consecutive serials sharing one issuer and
//! maturity. A run is pure compression: every operation still moves
//! individual unit bonds with exact serials, and scan order (insertion order,
//! serial order within a run) is exactly the order the bonds arrived in.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

/// Logical day number on some agent's local calendar.
pub type Day = u64;

/// Per-issuer serial number; serials are assigned contiguously from 0.
pub type Serial = u64;

/// Opaque, totally ordered, printable agent identifier.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(transparent))]
pub struct AgentId(String);

impl AgentId {
    pub fn new(name: impl Into<String>) -> Self {
        AgentId(name.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for AgentId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for AgentId {
    fn from(s: &str) -> Self {
        AgentId::new(s)
    }
}

/// One unit bond: a promise by `issuer`, redeemable once the holder's local
/// date reaches `maturity`.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Bond {
    pub issuer: AgentId,
    pub maturity: Day,
    pub serial: Serial,
}

/// A request for `count` bonds of one issuer and one exact maturity.
/// Lots never carry serials; which serials satisfy a lot is decided by
/// scanning holdings in canonical order.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Lot {
    pub issuer: AgentId,
    pub maturity: Day,
    pub count: u64,
}

impl Lot {
    pub fn new(issuer: impl Into<AgentId>, maturity: Day, count: u64) -> Self {
        Lot {
            issuer: issuer.into(),
            maturity,
            count,
        }
    }
}

/// Aggregate a lot list into multiset-normal form: counts merged per
/// `(issuer, maturity)`, sorted, zero counts dropped. Two lot lists denote
/// the same bond multiset iff their normal forms are equal.
pub fn normalize_lots(lots: &[Lot]) -> Vec<Lot> {
    let mut sorted: Vec<Lot> = lots.iter().filter(|l| l.count > 0).cloned().collect();
    sorted.sort();
    let mut out: Vec<Lot> = Vec::new();
    for lot in sorted {
        match out.last_mut() {
            Some(prev) if prev.issuer == lot.issuer && prev.maturity == lot.maturity => {
                prev.count += lot.count;
            }
            _ => out.push(lot),
        }
    }
    out
}

/// `count` bonds of one issuer and maturity with consecutive serials
/// starting at `first_serial`.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct BondRun {
    pub issuer: AgentId,
    pub maturity: Day,
    pub first_serial: Serial,
    pub count: u64,
}

impl BondRun {
    pub fn of(bond: &Bond) -> Self {
        BondRun {
            issuer: bond.issuer.clone(),
            maturity: bond.maturity,
            first_serial: bond.serial,
            count: 1,
        }
    }

    /// One past the last serial in the run.
    pub fn end_serial(&self) -> Serial {
        self.first_serial + self.count
    }

    pub fn contains_serial(&self, s: Serial) -> bool {
        s >= self.first_serial && s < self.end_serial()
    }
}

/// Lot selection failure; the scanned holdings are left untouched.
#[derive(Clone, PartialEq, Eq, Debug)]
pub enum SelectError {
    /// A lot asked for zero bonds.
    EmptyLot { lot: Lot },
    /// Fewer matching bonds than the lot requested. Maturity matching is
    /// exact; near misses do not count.
    Shortfall { lot: Lot, available: u64 },
}

impl fmt::Display for SelectError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SelectError::EmptyLot { lot } => {
                write!(
                    f,
                    "lot of {} maturing day {} requests zero bonds",
                    lot.issuer, lot.maturity
                )
            }
            SelectError::Shortfall { lot, available } => write!(
                f,
                "need {} bonds of {} maturing day {}, only {} held",
                lot.count, lot.issuer, lot.maturity, available
            ),
        }
    }
}

impl core::error::Error for SelectError {}

/// An ordered multiset of unit bonds.
///
/// Order is canonical scan order: runs in insertion order, serials ascending
/// within a run. Selection takes the first matching bonds in this order, so
/// partial takes consume the front of a run.
#[derive(Clone, PartialEq, Eq, Default, Debug)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(transparent))]
pub struct BondMultiset {
    runs: Vec<BondRun>,
}

impl BondMultiset {
    pub fn new() -> Self {
        BondMultiset { runs: Vec::new() }
    }

    pub fn is_empty(&self) -> bool {
        self.runs.is_empty()
    }

    /// Total number of bonds.
    pub fn len(&self) -> u64 {
        self.runs.iter().map(|r| r.count).sum()
    }

    pub fn runs(&self) -> &[BondRun] {
        &self.runs
    }

    /// Append a run, coalescing with the tail when the serials continue it.
    pub fn push_run(&mut self, run: BondRun) {
        if run.count == 0 {
            return;
        }
        if let Some(last) = self.runs.last_mut() {
            if last.issuer == run.issuer
                && last.maturity == run.maturity
                && last.end_serial() == run.first_serial
            {
                last.count += run.count;
                return;
            }
        }
        self.runs.push(run);
    }

    pub fn push_bond(&mut self, bond: &Bond) {
        self.push_run(BondRun::of(bond));
    }

    /// Append every run of `other`, preserving its order.
    pub fn absorb(&mut self, other: BondMultiset) {
        for run in other.runs {
            self.push_run(run);
        }
    }

    /// Expand to individual bonds in canonical order.
    pub fn iter_bonds(&self) -> impl Iterator<Item = Bond> + '_ {
        self.runs.iter().flat_map(|r| {
            (r.first_serial..r.end_serial()).map(move |serial| Bond {
                issuer: r.issuer.clone(),
                maturity: r.maturity,
                serial,
            })
        })
    }

    /// Bonds of `issuer` with maturity exactly `maturity`.
    pub fn count_exact(&self, issuer: &AgentId, maturity: Day) -> u64 {
        self.runs
            .iter()
            .filter(|r| &r.issuer == issuer && r.maturity == maturity)
            .map(|r| r.count)
            .sum()
    }

    /// Bonds of `issuer` with maturity at or before `cutoff`.
    pub fn count_issuer_through(&self, issuer: &AgentId, cutoff: Day) -> u64 {
        self.runs
            .iter()
            .filter(|r| &r.issuer == issuer && r.maturity <= cutoff)
            .map(|r| r.count)
            .sum()
    }

    pub fn contains_bond(&self, bond: &Bond) -> bool {
        self.runs.iter().any(|r| {
            r.issuer == bond.issuer && r.maturity == bond.maturity && r.contains_serial(bond.serial)
        })
    }

    /// First bond of `issuer` in canonical order, optionally capped by
    /// maturity. This is the deterministic pick used for redemptions.
    pub fn first_of_issuer(&self, issuer: &AgentId, max_maturity: Option<Day>) -> Option<Bond> {
        self.runs
            .iter()
            .find(|r| &r.issuer == issuer && max_maturity.is_none_or(|cap| r.maturity <= cap))
            .map(|r| Bond {
                issuer: r.issuer.clone(),
                maturity: r.maturity,
                serial: r.first_serial,
            })
    }

    /// First bond matching issuer and exact maturity in canonical order.
    pub fn first_exact(&self, issuer: &AgentId, maturity: Day) -> Option<Bond> {
        self.runs
            .iter()
            .find(|r| &r.issuer == issuer && r.maturity == maturity)
            .map(|r| Bond {
                issuer: r.issuer.clone(),
                maturity: r.maturity,
                serial: r.first_serial,
            })
    }

    /// Select bonds for `lots`, all or nothing.
    ///
    /// Each lot is satisfied by the first `count` bonds with that issuer and
    /// exact maturity in canonical order. On success returns
    /// `(selected, remaining)`; on failure the receiver is unchanged and the
    /// error names the first unsatisfiable lot. Lots are processed in the
    /// given order against holdings net of earlier lots in the same call.
    pub fn select_lots(&self, lots: &[Lot]) -> Result<(BondMultiset, BondMultiset), SelectError> {
        let mut remaining = self.clone();
        let mut selected = BondMultiset::new();
        for lot in lots {
            if lot.count == 0 {
                return Err(SelectError::EmptyLot { lot: lot.clone() });
            }
            let available = remaining.count_exact(&lot.issuer, lot.maturity);
            if available < lot.count {
                return Err(SelectError::Shortfall {
                    lot: lot.clone(),
                    available,
                });
            }
            let mut needed = lot.count;
            let mut kept: Vec<BondRun> = Vec::with_capacity(remaining.runs.len());
            for run in remaining.runs.drain(..) {
                if needed == 0 || run.issuer != lot.issuer || run.maturity != lot.maturity {
                    kept.push(run);
                    continue;
                }
                let take = needed.min(run.count);
                selected.push_run(BondRun {
                    issuer: run.issuer.clone(),
                    maturity: run.maturity,
                    first_serial: run.first_serial,
                    count: take,
                });
                needed -= take;
                if take < run.count {
                    kept.push(BondRun {
                        issuer: run.issuer,
                        maturity: run.maturity,
                        first_serial: run.first_serial + take,
                        count: run.count - take,
                    });
                }
            }
            remaining.runs = kept;
        }
        Ok((selected, remaining))
    }

    /// Check that every bond of `other` (exact serials) is present.
    pub fn contains_all(&self, other: &BondMultiset) -> bool {
        other.runs.iter().all(|want| {
            let mut missing = want.count;
            for run in &self.runs {
                if run.issuer != want.issuer || run.maturity != want.maturity {
                    continue;
                }
                let lo = run.first_serial.max(want.first_serial);
                let hi = run.end_serial().min(want.end_serial());
                if lo < hi {
                    missing = missing.saturating_sub(hi - lo);
                }
            }
            missing == 0
        })
    }

    /// Remove exactly the bonds of `other` (exact serials), or leave the
    /// receiver untouched and report the first bond that is not held.
    pub fn remove_exact(&mut self, other: &BondMultiset) -> Result<(), Bond> {
        if !self.contains_all(other) {
            for bond in other.iter_bonds() {
                if !self.contains_bond(&bond) {
                    return Err(bond);
                }
            }
            unreachable!("contains_all and per-bond scan disagree");
        }
        for want in &other.runs {
            let mut rebuilt: Vec<BondRun> = Vec::with_capacity(self.runs.len());
            for run in self.runs.drain(..) {
                if run.issuer != want.issuer || run.maturity != want.maturity {
                    rebuilt.push(run);
                    continue;
                }
                let lo = run.first_serial.max(want.first_serial);
                let hi = run.end_serial().min(want.end_serial());
                if lo >= hi {
                    rebuilt.push(run);
                    continue;
                }
                if run.first_serial < lo {
                    rebuilt.push(BondRun {
                        issuer: run.issuer.clone(),
                        maturity: run.maturity,
                        first_serial: run.first_serial,
                        count: lo - run.first_serial,
                    });
                }
                if hi < run.end_serial() {
                    rebuilt.push(BondRun {
                        issuer: run.issuer.clone(),
                        maturity: run.maturity,
                        first_serial: hi,
                        count: run.end_serial() - hi,
                    });
                }
            }
            self.runs = rebuilt;
        }
        Ok(())
    }

    /// Remove one specific bond.
    pub fn remove_bond(&mut self, bond: &Bond) -> Result<(), Bond> {
        let mut single = BondMultiset::new();
        single.push_bond(bond);
        self.remove_exact(&single)
    }

    /// Serial-insensitive equality: same bonds per `(issuer, maturity)`.
    pub fn same_lots(&self, other: &BondMultiset) -> bool {
        self.as_lots() == other.as_lots()
    }

    /// Exact-serial equality regardless of run fragmentation or order.
    pub fn same_bonds(&self, other: &BondMultiset) -> bool {
        if self.len() != other.len() {
            return false;
        }
        self.contains_all(other)
    }

    /// Aggregate to normalized lots (for reports and class keys).
    pub fn as_lots(&self) -> Vec<Lot> {
        let raw: Vec<Lot> = self
            .runs
            .iter()
            .map(|r| Lot {
                issuer: r.issuer.clone(),
                maturity: r.maturity,
                count: r.count,
            })
            .collect();
        normalize_lots(&raw)
    }
}

impl FromIterator<Bond> for BondMultiset {
    fn from_iter<I: IntoIterator<Item = Bond>>(iter: I) -> Self {
        let mut out = BondMultiset::new();
        for bond in iter {
            out.push_bond(&bond);
        }
        out
    }
}
