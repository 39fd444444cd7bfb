//! Simulation laboratory for preferential attachment graphs driven by an
//! edge-step function.
//!
//! The process starts from a single vertex with a loop. At every later step
//! `s` a coin with success probability `f(s)` decides between adding a new
//! vertex attached to a degree-proportional target (vertex step) and adding
//! an edge between two independent degree-proportional targets (edge step).
//! Loops and parallel edges are kept, so the graph at time `t` always has
//! exactly `t` edges and total degree `2t`.
//!
//! The crate provides:
//!
//! * [`step_function`]: the driving functions `f` and their analytic
//!   profiles (running sums, inverse thresholds, degree growth products).
//! * [`multigraph`]: the mutable multigraph with constant-time
//!   degree-proportional sampling, plus its loop-free simplification.
//! * [`generator`]: direct simulation of the process and grid snapshots.
//! * [`coupling`]: the shared source of randomness. One doubly labeled tree
//!   is grown once and collapsed under any number of edge-step functions,
//!   which couples the resulting graphs on one probability space.
//! * [`stats`]: triangles, cherries, clustering, clique lower bounds,
//!   diameter and degree statistics of a snapshot.
//! * [`experiments`]: replicated Monte Carlo drivers that check
//!   concentration bands, scaling exponents, coupling identities and
//!   monotonicity properties.

pub mod coupling;
mod dsu;
pub mod error;
pub mod experiments;
pub mod generator;
pub mod multigraph;
pub mod stats;
pub mod step_function;
pub mod streams;

pub use error::Error;
pub use generator::{generate, generate_grid, Trajectory};
pub use multigraph::{MultiGraph, SimpleGraph};
pub use stats::{full_report, StatsOptions, StatsReport};
pub use step_function::{AnalyticProfile, EdgeStepFunction};

/// Convenient alias for fallible operations in this crate.
pub type Result<T> = std::result::Result<T, Error>;
