//! Peer-issued unit bonds.
//!
//! A bond `(issuer, maturity, serial)` is a transferable unit IOU. There is
//! no global clock: each agent keeps a local date and classifies a bond as a
//! *coin* (spendable money) exactly when its maturity is on or before that
//! local date. Everything else in this crate is built on five voluntary
//! ledger transitions: mint, date advance, swap, pay, and redeem.
//!
//! Modules, bottom to top:
//!
//! - [`bond`]: bond identities, ordered bond multisets, lot selection.
//! - [`ledger`]: per-agent ledgers and the five transitions.
//! - [`audit`]: serial-exact conservation audit across custody locations.
//! - [`volition`]: transaction classes, willing/discharge, enabledness, and
//!   trace checkers for correctness and interleaving.
//! - [`trade`]: the two-phase propose/respond protocol with automatic
//!   payment and redemption handling.
//! - [`instruments`]: loans, forwards, swaps-of-schedules, and sales of
//!   debt, all expressed as planned mints plus one bond swap.
//! - [`escrow`]: a third-party agent holding bonds under timed, optioned,
//!   insured, or credit-line cases.
//! - [`liquidity`]: maturity-window counts, cash/quick/current ratios, and
//!   circulation totals.
//!
//! The crate is `no_std` (with `alloc`); anything that touches files,
//! clocks, or randomness lives in the companion simulator crate.

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod audit;
pub mod bond;
pub mod escrow;
pub mod instruments;
pub mod ledger;
pub mod liquidity;
pub mod trade;
pub mod volition;

pub use bond::{AgentId, Bond, BondMultiset, BondRun, Day, Lot, SelectError, Serial};
pub use escrow::{
    CaseId, EscrowCase, EscrowError, EscrowEvent, EscrowEventKind, EscrowManager, ExerciseStyle,
    Oracle, OracleEventKind, OracleFact, OracleValue, Rate,
};
pub use instruments::{
    periodic_settlements, plan_instrument, resolve_variable_leg, two_leg_sequence, DebtPayment,
    InstrumentError, InstrumentPlan, InstrumentSpec, LegPlan, MintObligation, ScheduledAmount,
    TwoLegKind, TwoLegPlan,
};
pub use ledger::{
    apply_pay, apply_redeem, apply_swap, chain_redeem, AgentLedger, ChainError, MintReceipt,
    RedeemReceipt, TxnError,
};
pub use liquidity::{
    circulation, nu, ratios, CirculationReport, LiquidityConfig, LiquidityError, LiquiditySnapshot,
    RatioReport,
};
pub use trade::{
    accept_trade, build_menu, classify_trade, decline_trade, propose_trade, respond_auto,
    settle_response, AutoOutcome, ProposalId, SettleOutcome, SwapSpec, TradeClass, TradeError,
    TradeProposal, TradeResponse,
};
pub use volition::{
    check_correct_run, check_interleaving, execute_volitional, interleave_round_robin, is_enabled,
    AgentState, Configuration, GuardedTxn, KernelError, RunTrace, StepAction, TraceStep,
    TransactionClass, TxnSpec, Verdict, VolitionError, VolitionSet,
};
