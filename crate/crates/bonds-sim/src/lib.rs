//! Deterministic multiagent simulator for peer-issued unit bonds.
//!
//! [`bonds_core`] holds the pure protocol: ledgers, guarded transactions,
//! trades, instruments, escrow and liquidity analytics. This crate adds the
//! machinery to run whole economies:
//!
//! - [`world`]: agents, in-flight messages with pluggable delivery order,
//!   an incremental world hash and a full-custody conservation audit;
//! - [`scenario`]: a JSON script format plus a mutual-credit generator;
//! - [`runner`]: executes a scenario and streams one trace record per step;
//! - [`shadow`]: replays a run as guarded volitional transactions to earn a
//!   correct-run verdict;
//! - [`trace`] and [`render`]: the JSONL trace format, diffing, and
//!   human-readable views.
//!
//! Runs are reproducible: the same scenario and seed yield byte-identical
//! traces.

pub mod render;
pub mod runner;
pub mod scenario;
pub mod shadow;
pub mod trace;
pub mod world;

pub use render::{table_header, write_rendered, OutputFormat};
pub use runner::{run_scenario, world_report, CheckMode, RunFailure, RunOptions, RunOutcome};
pub use scenario::{generate_mutual_credit, parse_scenario, Event, EventKind, Scenario};
pub use shadow::{KernelShadow, ShadowError};
pub use trace::{diff_traces, read_trace, write_record, TraceDiff, TraceRecord};
pub use world::{DeliveryOrder, DeliveryOutcome, World, WorldError};
