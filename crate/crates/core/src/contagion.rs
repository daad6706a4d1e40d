//! Per-step transmission probabilities for the two contact scenarios.
//!
//! A vertex making on average `κ` contacts with a neighbour per step, each
//! transmitting with probability `τ`, infects that neighbour with
//! probability `β = 1 - e^{-τκ}`.
//!
//! * Scenario A: a vertex spreads `T` contacts over its expected in-degree,
//!   so `κ_A(v) = T / E[deg⁻(v)]`.
//! * Scenario B: contacts scale with degree, leaving `κ_B = T / ⟨deg⁻⟩`
//!   with `⟨deg⁻⟩ = A2 / (1 - A1)` for every vertex.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::generator::{expected_in_degree_closed, expected_in_degree_exact, SpaGraph};

/// Expected degrees at or below this give `β_A = 1`, the `E → 0⁺` limit.
pub const DEFAULT_DEGREE_FLOOR: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ContagionError {
    #[error("transmission probability per contact must lie in [0, 1], got {0}")]
    InvalidTau(f64),
    #[error("contacts per step must be non-negative, got {0}")]
    InvalidContacts(f64),
    #[error("mean degree is undefined for A2 = 0")]
    ZeroA2,
    #[error("empirical mean degree is zero; scenario B is undefined on an edgeless graph")]
    EdgelessGraph,
    #[error("unknown scenario `{0}` (expected `A` or `B`)")]
    UnknownScenario(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ScenarioKind {
    /// Fixed total contacts per step.
    A,
    /// Contacts proportional to degree.
    B,
}

impl fmt::Display for ScenarioKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ScenarioKind::A => "A",
            ScenarioKind::B => "B",
        })
    }
}

impl FromStr for ScenarioKind {
    type Err = ContagionError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "A" | "a" => Ok(ScenarioKind::A),
            "B" | "b" => Ok(ScenarioKind::B),
            other => Err(ContagionError::UnknownScenario(other.to_string())),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContagionScenario {
    kind: ScenarioKind,
    tau: f64,
    contacts: f64,
}

impl ContagionScenario {
    pub fn new(kind: ScenarioKind, tau: f64, contacts: f64) -> Result<Self, ContagionError> {
        if !(0.0..=1.0).contains(&tau) {
            return Err(ContagionError::InvalidTau(tau));
        }
        if contacts.is_nan() || contacts < 0.0 {
            return Err(ContagionError::InvalidContacts(contacts));
        }
        Ok(Self { kind, tau, contacts })
    }

    /// Scenario with `τ = 1` and `T = γ`.
    pub fn with_gamma(kind: ScenarioKind, gamma: f64) -> Result<Self, ContagionError> {
        Self::new(kind, 1.0, gamma)
    }

    pub fn kind(&self) -> ScenarioKind {
        self.kind
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn contacts(&self) -> f64 {
        self.contacts
    }

    /// Contagiousness `γ = τ·T`.
    pub fn gamma(&self) -> f64 {
        self.tau * self.contacts
    }
}

/// `1 - e^{-τκ}`.
#[inline]
pub fn beta_from_contacts(tau: f64, kappa: f64) -> f64 {
    -(-tau * kappa).exp_m1()
}

/// Which expected in-degree scenario A divides by.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DegreeEstimate {
    /// `(A2/A1)·((n/i)^{A1} - 1)`.
    #[default]
    Closed,
    /// The finite sum of sphere volumes.
    Exact,
}

/// Which mean degree scenario B divides by.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum MeanDegree {
    /// `A2 / (1 - A1)`.
    #[default]
    Asymptotic,
    /// `|E| / n` of the graph at hand.
    Empirical,
}

/// Options for mapping a scenario onto per-vertex probabilities.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContagionModel {
    pub degree_estimate: DegreeEstimate,
    pub mean_degree: MeanDegree,
    pub degree_floor: f64,
}

impl Default for ContagionModel {
    fn default() -> Self {
        Self {
            degree_estimate: DegreeEstimate::default(),
            mean_degree: MeanDegree::default(),
            degree_floor: DEFAULT_DEGREE_FLOOR,
        }
    }
}

impl ContagionModel {
    fn expected_degree(&self, i: usize, graph: &SpaGraph) -> f64 {
        let p = graph.params();
        match self.degree_estimate {
            DegreeEstimate::Closed => expected_in_degree_closed(i, p.n, p.a1, p.a2),
            DegreeEstimate::Exact => expected_in_degree_exact(i, p.n, p.a1, p.a2),
        }
    }

    /// Scenario A probability for vertex `i`, ignoring the scenario tag.
    pub fn beta_a(&self, i: usize, graph: &SpaGraph, sc: &ContagionScenario) -> f64 {
        let expected = self.expected_degree(i, graph);
        if expected <= self.degree_floor {
            return 1.0;
        }
        beta_from_contacts(sc.tau, sc.contacts / expected)
    }

    /// Scenario B probability, shared by every vertex of `graph`.
    pub fn beta_b(&self, graph: &SpaGraph, sc: &ContagionScenario) -> Result<f64, ContagionError> {
        let mean = match self.mean_degree {
            MeanDegree::Asymptotic => {
                let p = graph.params();
                if p.a2 == 0.0 {
                    return Err(ContagionError::ZeroA2);
                }
                p.a2 / (1.0 - p.a1)
            }
            MeanDegree::Empirical => {
                let mean = graph.mean_in_degree();
                if mean == 0.0 {
                    return Err(ContagionError::EdgelessGraph);
                }
                mean
            }
        };
        Ok(beta_from_contacts(sc.tau, sc.contacts / mean))
    }

    /// Transmission probability of every vertex, indexed by `i - 1`.
    pub fn vertex_betas(&self, graph: &SpaGraph, sc: &ContagionScenario) -> Result<Vec<f64>, ContagionError> {
        match sc.kind {
            ScenarioKind::A => Ok((1..=graph.n()).map(|i| self.beta_a(i, graph, sc)).collect()),
            ScenarioKind::B => Ok(vec![self.beta_b(graph, sc)?; graph.n()]),
        }
    }
}

/// Scenario A probability of vertex `i` under the default model.
pub fn beta_a(i: usize, graph: &SpaGraph, sc: &ContagionScenario) -> f64 {
    ContagionModel::default().beta_a(i, graph, sc)
}

/// Scenario B probability `1 - exp(-τT(1 - A1)/A2)`.
pub fn beta_b(sc: &ContagionScenario, a1: f64, a2: f64) -> Result<f64, ContagionError> {
    if a2 == 0.0 {
        return Err(ContagionError::ZeroA2);
    }
    Ok(beta_from_contacts(sc.tau, sc.contacts * (1.0 - a1) / a2))
}
