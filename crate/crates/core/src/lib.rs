//! History-informed particle swarm optimization (ALMI-PSO).
//!
//! The crate contains the optimizer itself ([`optimizer`]), the preserved
//! history it learns from ([`history`]), the stable-tendency benchmark suite
//! with rotated variants ([`benchmark`]), cross-run aggregation and
//! nonparametric tests ([`stats`]), exponential-smoothing models with
//! optimizer- and grid-based parameter fitting ([`smoothing`]), and the
//! seeded batch harness used by the `almi` command-line tool ([`harness`]).

// Negated comparisons are how NaN inputs get rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod benchmark;
pub mod error;
pub mod harness;
pub mod history;
pub mod io;
pub mod objective;
pub mod optimizer;
pub mod particle;
pub mod smoothing;
pub mod stats;

pub use error::{Error, Result};
pub use history::{PreservedEntry, PreservedHistory, WeightFunction};
pub use objective::{Bounds, Objective, ObjectiveFunction};
pub use optimizer::{baseline_pso, optimize, OptimizerConfig, RunSummary};
pub use particle::Particle;
