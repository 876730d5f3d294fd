//! Slotted-time model of a cache-enabled mobile device offloading tasks to an
//! MEC server, together with a drift-plus-penalty scheduler and closed-form
//! evaluators for its long-run behaviour.
//!
//! The crate is `no_std` (it needs `alloc`). Enable the `std` feature to get
//! `std::error::Error` on [`Error`].
//!
//! Module map:
//! - [`catalog`]: content catalog, Zipf popularity, most-popular cache.
//! - [`workload`]: Bernoulli arrivals and task composition.
//! - [`dynamics`]: per-slot queue / processor state machine.
//! - [`policy`]: feasible actions and scheduling policies.
//! - [`engine`]: the simulation loop and run metrics.
//! - [`analysis`]: closed-form expectations, regimes and bounds.

#![cfg_attr(not(feature = "std"), no_std)]
#![deny(unsafe_code)]
#![warn(missing_docs)]

extern crate alloc;

pub mod analysis;
pub mod catalog;
pub mod dynamics;
pub mod engine;
mod error;
pub mod policy;
pub mod stats;
pub mod workload;

pub use analysis::{
    classify_regime, drift_constant, expected_dct, expected_dlt, optimality_gap_bound, Regime,
    RegimeReport, SlotMeans,
};
pub use catalog::{zipf_popularity, CacheConfig, ContentCatalog};
pub use dynamics::{Action, Model, SystemParams, SystemState, TaskProfile};
pub use engine::{run_simulation, RunConfig, RunMetrics};
pub use error::{Error, Result};
pub use policy::{PolicyKind, PolicySpec};
pub use workload::{KRange, Task, Workload, WorkloadConfig};
