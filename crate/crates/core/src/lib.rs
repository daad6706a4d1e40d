//! Spatial preferential attachment graphs on the unit torus, and
//! discrete-time SIR contagion over them.
//!
//! * [`geometry`]: torus metric, ball volumes, uniform sampling.
//! * [`generator`]: original and modified SPA generation, expected degrees.
//! * [`contagion`]: per-vertex transmission probabilities (scenarios A, B).
//! * [`sir`]: the SIR process, potential infection graphs, coupling.
//! * [`analysis`]: jump-length bounds, critical times, power-law and
//!   log-log fits.
//! * [`config`], [`experiment`], [`verify`]: the batch harness behind the
//!   `spa-sir` binary.

pub mod analysis;
pub mod config;
pub mod contagion;
pub mod edgelist;
pub mod experiment;
pub mod generator;
pub mod geometry;
pub mod seeding;
pub mod sir;
pub mod verify;

pub use contagion::{ContagionModel, ContagionScenario, ScenarioKind};
pub use generator::{generate, Edge, SpaGraph, SpaParams, Variant};
pub use geometry::{MetricConfig, Norm, Point};
pub use sir::{run_sir, InfectionConfig, InfectionOutcome, Origin};
