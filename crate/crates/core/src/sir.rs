//! Discrete-time SIR on the undirected view of an SPA graph.
//!
//! Every infected vertex is infectious for exactly one step and then
//! recovers for good. During its step it attempts each neighbour that was
//! susceptible when the step began, succeeding with its own probability β.
//!
//! Attempts draw from a counter-based stream keyed by `(seed, infector,
//! target)` (see [`crate::seeding::pair_uniform`]). Because an ordered pair
//! is examined at most once per run, the same draws define a potential
//! infection graph whose BFS layers from the origin coincide with the
//! infection's time layers.

use std::collections::VecDeque;

use thiserror::Error;

use crate::contagion::{ContagionError, ContagionModel, ContagionScenario};
use crate::generator::SpaGraph;
use crate::seeding::pair_uniform;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SirError {
    #[error("origin vertex {origin} is outside 1..={n}")]
    OriginOutOfRange { origin: usize, n: usize },
    #[error("expected {expected} transmission probabilities, found {found}")]
    BetaCount { expected: usize, found: usize },
    #[error(transparent)]
    Contagion(#[from] ContagionError),
}

/// Where the infection starts.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Origin {
    /// Vertex 1, the first to arrive.
    Oldest,
    /// A vertex chosen uniformly with the run's seed.
    UniformRandom,
    Index(usize),
}

impl Origin {
    /// Resolves to a concrete vertex. Random origins use the draw attached
    /// to the reserved pair `(0, 0)`, which no edge can occupy.
    pub fn resolve(self, n: usize, seed: u64) -> Result<usize, SirError> {
        match self {
            Origin::Oldest => Ok(1),
            Origin::UniformRandom => Ok(1 + ((pair_uniform(seed, 0, 0) * n as f64) as usize).min(n - 1)),
            Origin::Index(i) if (1..=n).contains(&i) => Ok(i),
            Origin::Index(i) => Err(SirError::OriginOutOfRange { origin: i, n }),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InfectionConfig {
    pub origin: Origin,
    pub scenario: ContagionScenario,
    pub seed: u64,
    pub max_steps: Option<u32>,
}

/// Undirected adjacency in compressed rows, vertices `1..=n`.
#[derive(Debug, Clone)]
pub struct Neighbourhoods {
    offsets: Vec<usize>,
    targets: Vec<u32>,
}

impl Neighbourhoods {
    pub fn new(graph: &SpaGraph) -> Self {
        let n = graph.n();
        let mut counts = vec![0usize; n + 2];
        for e in graph.edges() {
            counts[e.from + 1] += 1;
            counts[e.to + 1] += 1;
        }
        for k in 1..counts.len() {
            counts[k] += counts[k - 1];
        }
        let offsets = counts.clone();
        let mut fill = counts;
        let mut targets = vec![0u32; 2 * graph.edges().len()];
        for e in graph.edges() {
            targets[fill[e.from]] = e.to as u32;
            fill[e.from] += 1;
            targets[fill[e.to]] = e.from as u32;
            fill[e.to] += 1;
        }
        Self { offsets, targets }
    }

    #[inline]
    pub fn of(&self, v: usize) -> impl Iterator<Item = usize> + '_ {
        self.targets[self.offsets[v]..self.offsets[v + 1]].iter().map(|&u| u as usize)
    }

    pub fn degree(&self, v: usize) -> usize {
        self.offsets[v + 1] - self.offsets[v]
    }
}

/// A successful transmission attempt.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Transmission {
    pub from: usize,
    pub to: usize,
    pub length: f64,
    /// Whether this edge is the recorded infector of `to`. Among several
    /// successful infectors in one step the oldest is recorded.
    pub tree: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct InfectionOutcome {
    pub origin: usize,
    /// Infection step per vertex, indexed by `i - 1`.
    pub infection_time: Vec<Option<u32>>,
    /// Recorded infector per vertex, indexed by `i - 1`.
    pub infector: Vec<Option<usize>>,
    /// Every successful attempt, in the order they happened.
    pub transmissions: Vec<Transmission>,
    /// Steps until no vertex was infected.
    pub duration: u32,
    pub attack_size: usize,
    pub longest_jump: f64,
    /// Largest torus distance from the origin over ever-infected vertices.
    pub max_displacement: f64,
    /// Set when `max_steps` stopped the run with vertices still infected.
    pub truncated: bool,
}

impl InfectionOutcome {
    pub fn infection_time_of(&self, v: usize) -> Option<u32> {
        self.infection_time[v - 1]
    }

    /// Vertices infected at or before step `t`, ascending.
    pub fn infected_by(&self, t: u32) -> Vec<usize> {
        (1..=self.infection_time.len()).filter(|&v| matches!(self.infection_time[v - 1], Some(s) if s <= t)).collect()
    }
}

/// Runs SIR with the default contagion model.
pub fn run_sir(graph: &SpaGraph, cfg: &InfectionConfig) -> Result<InfectionOutcome, SirError> {
    run_sir_with_model(graph, cfg, &ContagionModel::default())
}

pub fn run_sir_with_model(
    graph: &SpaGraph,
    cfg: &InfectionConfig,
    model: &ContagionModel,
) -> Result<InfectionOutcome, SirError> {
    let betas = model.vertex_betas(graph, &cfg.scenario)?;
    let origin = cfg.origin.resolve(graph.n(), cfg.seed)?;
    run_sir_with_betas(graph, &Neighbourhoods::new(graph), &betas, origin, cfg.seed, cfg.max_steps)
}

/// Runs SIR with explicit per-vertex probabilities (`betas[i - 1]`).
pub fn run_sir_with_betas(
    graph: &SpaGraph,
    adjacency: &Neighbourhoods,
    betas: &[f64],
    origin: usize,
    seed: u64,
    max_steps: Option<u32>,
) -> Result<InfectionOutcome, SirError> {
    let n = graph.n();
    if betas.len() != n {
        return Err(SirError::BetaCount { expected: n, found: betas.len() });
    }
    if !(1..=n).contains(&origin) {
        return Err(SirError::OriginOutOfRange { origin, n });
    }

    let mut infection_time: Vec<Option<u32>> = vec![None; n];
    let mut infector: Vec<Option<usize>> = vec![None; n];
    let mut transmissions = Vec::new();
    infection_time[origin - 1] = Some(0);

    let mut current = vec![origin];
    let mut next = Vec::new();
    let mut step = 0u32;
    let mut truncated = false;

    while !current.is_empty() {
        if max_steps.is_some_and(|cap| step >= cap) {
            truncated = true;
            break;
        }
        let next_time = step + 1;
        // Ascending order makes the oldest successful infector the first.
        for &v in &current {
            let beta = betas[v - 1];
            for u in adjacency.of(v) {
                let status = infection_time[u - 1];
                if status.is_some_and(|s| s != next_time) {
                    continue;
                }
                if pair_uniform(seed, v, u) < beta {
                    let first = status.is_none();
                    if first {
                        infection_time[u - 1] = Some(next_time);
                        infector[u - 1] = Some(v);
                        next.push(u);
                    }
                    transmissions.push(Transmission { from: v, to: u, length: graph.distance(v, u), tree: first });
                }
            }
        }
        next.sort_unstable();
        std::mem::swap(&mut current, &mut next);
        next.clear();
        step += 1;
    }

    let attack_size = infection_time.iter().filter(|t| t.is_some()).count();
    let longest_jump = transmissions.iter().map(|t| t.length).fold(0.0, f64::max);
    let max_displacement = (1..=n)
        .filter(|&v| infection_time[v - 1].is_some())
        .map(|v| graph.distance(origin, v))
        .fold(0.0, f64::max);

    Ok(InfectionOutcome {
        origin,
        infection_time,
        infector,
        transmissions,
        duration: step,
        attack_size,
        longest_jump,
        max_displacement,
        truncated,
    })
}

/// Directed percolation of the undirected SPA graph: ordered pair `(a, b)`
/// is occupied with probability `β(a)`.
#[derive(Debug, Clone)]
pub struct PotentialInfectionGraph<'g> {
    base: &'g SpaGraph,
    occupied: Vec<(usize, usize)>,
    out_offsets: Vec<usize>,
    out_targets: Vec<u32>,
}

impl<'g> PotentialInfectionGraph<'g> {
    pub fn base(&self) -> &'g SpaGraph {
        self.base
    }

    /// Occupied ordered pairs: per edge in insertion order, `(min, max)`
    /// before `(max, min)`.
    pub fn occupied(&self) -> &[(usize, usize)] {
        &self.occupied
    }

    pub fn is_occupied(&self, from: usize, to: usize) -> bool {
        self.out(from).any(|v| v == to)
    }

    pub fn out(&self, v: usize) -> impl Iterator<Item = usize> + '_ {
        self.out_targets[self.out_offsets[v]..self.out_offsets[v + 1]].iter().map(|&u| u as usize)
    }

    pub fn longest_edge(&self) -> f64 {
        longest_edge(self.base, self.occupied.iter().copied())
    }
}

/// Potential infection graph under the default contagion model.
pub fn build_potential_graph<'g>(
    graph: &'g SpaGraph,
    scenario: &ContagionScenario,
    seed: u64,
) -> Result<PotentialInfectionGraph<'g>, SirError> {
    let betas = ContagionModel::default().vertex_betas(graph, scenario)?;
    build_potential_graph_with_betas(graph, &betas, seed)
}

/// Occupies `(a, b)` iff the pair's uniform draw is below `betas[a - 1]`,
/// the same rule [`run_sir_with_betas`] applies to an attempt.
pub fn build_potential_graph_with_betas<'g>(
    graph: &'g SpaGraph,
    betas: &[f64],
    seed: u64,
) -> Result<PotentialInfectionGraph<'g>, SirError> {
    let n = graph.n();
    if betas.len() != n {
        return Err(SirError::BetaCount { expected: n, found: betas.len() });
    }
    let mut occupied = Vec::new();
    for e in graph.edges() {
        let (lo, hi) = (e.to, e.from);
        for (a, b) in [(lo, hi), (hi, lo)] {
            if pair_uniform(seed, a, b) < betas[a - 1] {
                occupied.push((a, b));
            }
        }
    }
    let mut out_offsets = vec![0usize; n + 2];
    for &(a, _) in &occupied {
        out_offsets[a + 1] += 1;
    }
    for k in 1..out_offsets.len() {
        out_offsets[k] += out_offsets[k - 1];
    }
    let mut fill = out_offsets.clone();
    let mut out_targets = vec![0u32; occupied.len()];
    for &(a, b) in &occupied {
        out_targets[fill[a]] = b as u32;
        fill[a] += 1;
    }
    Ok(PotentialInfectionGraph { base: graph, occupied, out_offsets, out_targets })
}

/// The part of a potential infection graph within `t` directed hops of an
/// origin.
#[derive(Debug, Clone, PartialEq)]
pub struct InfectionGraph {
    /// Hop distance per vertex (indexed by `i - 1`), `None` beyond `t`.
    pub hops: Vec<Option<u32>>,
    /// Occupied pairs `(a, b)` with `hops(b) = hops(a) + 1`: every edge along
    /// which `b` is first reached.
    pub edges: Vec<(usize, usize)>,
}

impl InfectionGraph {
    pub fn vertices(&self) -> Vec<usize> {
        (1..=self.hops.len()).filter(|&v| self.hops[v - 1].is_some()).collect()
    }
}

pub fn infection_graph_at(pg: &PotentialInfectionGraph<'_>, origin: usize, t: u32) -> InfectionGraph {
    let n = pg.base.n();
    let mut hops: Vec<Option<u32>> = vec![None; n];
    hops[origin - 1] = Some(0);
    let mut queue = VecDeque::from([origin]);
    while let Some(v) = queue.pop_front() {
        let h = hops[v - 1].expect("queued vertices have a hop count");
        if h == t {
            continue;
        }
        for u in pg.out(v) {
            if hops[u - 1].is_none() {
                hops[u - 1] = Some(h + 1);
                queue.push_back(u);
            }
        }
    }
    let mut edges = Vec::new();
    for v in 1..=n {
        let Some(h) = hops[v - 1] else { continue };
        for u in pg.out(v) {
            if hops[u - 1] == Some(h + 1) {
                edges.push((v, u));
            }
        }
    }
    InfectionGraph { hops, edges }
}

/// Longest torus length among `edges` (vertex pairs of `graph`); 0 if none.
pub fn longest_edge(graph: &SpaGraph, edges: impl IntoIterator<Item = (usize, usize)>) -> f64 {
    edges.into_iter().map(|(a, b)| graph.distance(a, b)).fold(0.0, f64::max)
}
