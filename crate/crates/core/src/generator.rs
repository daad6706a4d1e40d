//! Spatial preferential attachment (SPA) graphs on the unit torus.
//!
//! Vertices arrive one per time step at uniform positions and are numbered
//! by birth time `1..=n`. On arrival at time `t`, vertex `v_t` links to
//! every older `v_i` whose sphere of influence at time `t` contains it.
//! Edges therefore always point from younger to older vertices.
//!
//! The sphere volume is either the original in-degree driven rule
//! `min((A1·deg⁻(v_i) + A2) / t, 1)` or the modified, birth-time driven
//! rule `min(A2 / (t^{1-A1} · i^{A1}), 1)`.

use std::fmt;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::geometry::{GeometryError, MetricConfig};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GraphError {
    #[error("A1 must lie in (0, 1), got {0}")]
    InvalidA1(f64),
    #[error("A2 must be finite and non-negative, got {0}")]
    InvalidA2(f64),
    #[error("graph must have at least one vertex")]
    Empty,
    #[error("vertex count {0} exceeds the supported maximum")]
    TooLarge(usize),
    #[error("unknown SPA variant `{0}` (expected `original` or `modified`)")]
    UnknownVariant(String),
    #[error("edge {from} -> {to} must point from a younger to an older vertex within 1..={n}")]
    InvalidEdge { from: usize, to: usize, n: usize },
    #[error("expected {expected} position coordinates, found {found}")]
    PositionCount { expected: usize, found: usize },
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Variant {
    /// Sphere volume driven by the realized in-degree.
    Original,
    /// Sphere volume driven by birth time (the expected in-degree).
    Modified,
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Variant::Original => "original",
            Variant::Modified => "modified",
        })
    }
}

impl FromStr for Variant {
    type Err = GraphError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "original" => Ok(Variant::Original),
            "modified" => Ok(Variant::Modified),
            other => Err(GraphError::UnknownVariant(other.to_string())),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpaParams {
    pub a1: f64,
    pub a2: f64,
    pub n: usize,
    pub metric: MetricConfig,
    pub variant: Variant,
    pub seed: u64,
}

impl SpaParams {
    pub fn validate(&self) -> Result<(), GraphError> {
        if !(self.a1 > 0.0 && self.a1 < 1.0) {
            return Err(GraphError::InvalidA1(self.a1));
        }
        if !(self.a2.is_finite() && self.a2 >= 0.0) {
            return Err(GraphError::InvalidA2(self.a2));
        }
        if self.n == 0 {
            return Err(GraphError::Empty);
        }
        if self.n > u32::MAX as usize - 1 {
            return Err(GraphError::TooLarge(self.n));
        }
        Ok(())
    }
}

/// Directed edge from the younger vertex `from` to the older vertex `to`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Edge {
    pub from: usize,
    pub to: usize,
}

/// An immutable SPA graph. Vertex ids are birth times `1..=n`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpaGraph {
    params: SpaParams,
    positions: Vec<f64>,
    edges: Vec<Edge>,
    in_degree: Vec<u32>,
}

impl SpaGraph {
    /// Assembles a graph from explicit positions (flattened, `n·d` values)
    /// and edges. Structure is validated; sphere containment is not (see
    /// [`crate::verify::check_sphere_containment`]).
    pub fn from_parts(params: SpaParams, positions: Vec<f64>, edges: Vec<Edge>) -> Result<Self, GraphError> {
        params.validate()?;
        let n = params.n;
        let d = params.metric.dim();
        if positions.len() != n * d {
            return Err(GraphError::PositionCount { expected: n * d, found: positions.len() });
        }
        if let Some((index, &value)) = positions.iter().enumerate().find(|(_, c)| !(0.0..1.0).contains(*c)) {
            return Err(GeometryError::CoordinateOutOfRange { index: index % d, value }.into());
        }
        let mut in_degree = vec![0u32; n];
        for e in &edges {
            if !(e.to >= 1 && e.from > e.to && e.from <= n) {
                return Err(GraphError::InvalidEdge { from: e.from, to: e.to, n });
            }
            in_degree[e.to - 1] += 1;
        }
        Ok(Self { params, positions, edges, in_degree })
    }

    pub fn params(&self) -> &SpaParams {
        &self.params
    }

    pub fn metric(&self) -> &MetricConfig {
        &self.params.metric
    }

    pub fn n(&self) -> usize {
        self.params.n
    }

    /// Position of vertex `i` (birth time, 1-based).
    #[inline]
    pub fn position(&self, i: usize) -> &[f64] {
        let d = self.params.metric.dim();
        &self.positions[(i - 1) * d..i * d]
    }

    /// All coordinates, vertex-major.
    pub fn positions(&self) -> &[f64] {
        &self.positions
    }

    /// Edges in insertion order: by arrival time, then by target.
    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn in_degree(&self, i: usize) -> u32 {
        self.in_degree[i - 1]
    }

    /// In-degrees indexed by `i - 1`.
    pub fn in_degrees(&self) -> &[u32] {
        &self.in_degree
    }

    pub fn mean_in_degree(&self) -> f64 {
        self.edges.len() as f64 / self.n() as f64
    }

    /// Torus distance between vertices `a` and `b`.
    #[inline]
    pub fn distance(&self, a: usize, b: usize) -> f64 {
        self.params.metric.distance(self.position(a), self.position(b))
    }

    pub fn edge_length(&self, e: Edge) -> f64 {
        self.distance(e.from, e.to)
    }
}

/// `min((A1·in_deg + A2) / t, 1)`.
#[inline]
pub fn sphere_volume_original(in_deg: u32, t: usize, a1: f64, a2: f64) -> f64 {
    ((a1 * in_deg as f64 + a2) / t as f64).min(1.0)
}

/// `min(A2 / (t^{1-A1} · i^{A1}), 1)`.
#[inline]
pub fn sphere_volume_modified(i: usize, t: usize, a1: f64, a2: f64) -> f64 {
    debug_assert!(1 <= i && i <= t);
    (a2 / ((t as f64).powf(1.0 - a1) * (i as f64).powf(a1))).min(1.0)
}

/// Exact expected in-degree of `v_i` in the modified model: the sum of its
/// sphere volumes over arrival times `i+1..=n`.
pub fn expected_in_degree_exact(i: usize, n: usize, a1: f64, a2: f64) -> f64 {
    (i + 1..=n).map(|k| sphere_volume_modified(i, k, a1, a2)).sum()
}

/// Closed-form expected in-degree `(A2/A1)·((n/i)^{A1} - 1)`. Differs from
/// [`expected_in_degree_exact`] by less than `A2/A1` when no term clamps.
pub fn expected_in_degree_closed(i: usize, n: usize, a1: f64, a2: f64) -> f64 {
    (a2 / a1) * ((n as f64 / i as f64).powf(a1) - 1.0)
}

/// True when a point at torus distance `dist` lies inside a sphere of
/// volume `volume`. A clamped volume of 1 covers the whole torus.
#[inline]
pub fn sphere_contains(metric: &MetricConfig, volume: f64, dist: f64) -> bool {
    volume >= 1.0 || dist <= metric.radius_for_volume(volume)
}

/// Per-vertex sphere volumes during generation.
pub(crate) struct SphereRule {
    variant: Variant,
    a1: f64,
    a2: f64,
}

impl SphereRule {
    pub(crate) fn new(params: &SpaParams) -> Self {
        Self { variant: params.variant, a1: params.a1, a2: params.a2 }
    }

    /// Volume of `S(v_i, t)` given the current in-degree of `v_i`.
    #[inline]
    pub(crate) fn volume(&self, i: usize, t: usize, in_deg: u32) -> f64 {
        match self.variant {
            Variant::Original => sphere_volume_original(in_deg, t, self.a1, self.a2),
            Variant::Modified => sphere_volume_modified(i, t, self.a1, self.a2),
        }
    }
}

/// Draws the `n` vertex positions in birth order. Position of `v_t` is the
/// only random draw of step `t`.
pub(crate) fn draw_positions(params: &SpaParams) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let mut positions = Vec::with_capacity(params.n * params.metric.dim());
    for _ in 0..params.n {
        positions.extend(params.metric.sample_uniform(&mut rng).into_coords());
    }
    positions
}

/// Uniform cell grid over the torus with `cells_per_axis^d` buckets.
struct CellGrid {
    dim: usize,
    cells_per_axis: usize,
    buckets: Vec<Vec<u32>>,
    offsets: Vec<Vec<isize>>,
}

impl CellGrid {
    fn new(dim: usize, cells_per_axis: usize) -> Self {
        let total = cells_per_axis.pow(dim as u32);
        let offsets = (0..3usize.pow(dim as u32))
            .map(|mut code| {
                (0..dim)
                    .map(|_| {
                        let o = (code % 3) as isize - 1;
                        code /= 3;
                        o
                    })
                    .collect()
            })
            .collect();
        Self { dim, cells_per_axis, buckets: vec![Vec::new(); total], offsets }
    }

    fn side(&self) -> f64 {
        1.0 / self.cells_per_axis as f64
    }

    #[inline]
    fn axis_cell(&self, c: f64) -> usize {
        ((c * self.cells_per_axis as f64) as usize).min(self.cells_per_axis - 1)
    }

    fn cell_of(&self, coords: &[f64]) -> usize {
        coords.iter().rev().fold(0, |acc, &c| acc * self.cells_per_axis + self.axis_cell(c))
    }

    fn insert(&mut self, coords: &[f64], vertex: u32) {
        let cell = self.cell_of(coords);
        self.buckets[cell].push(vertex);
    }

    /// Calls `visit` for every vertex in the 3^d block of cells around
    /// `coords`. Requires at least three cells per axis so no cell repeats.
    fn for_each_near(&self, coords: &[f64], mut visit: impl FnMut(u32)) {
        let k = self.cells_per_axis as isize;
        let home: Vec<isize> = coords.iter().map(|&c| self.axis_cell(c) as isize).collect();
        for offset in &self.offsets {
            let mut cell = 0usize;
            for axis in (0..self.dim).rev() {
                let idx = (home[axis] + offset[axis]).rem_euclid(k) as usize;
                cell = cell * self.cells_per_axis + idx;
            }
            for &v in &self.buckets[cell] {
                visit(v);
            }
        }
    }
}

/// Largest cells-per-axis count worth allocating for `n` vertices.
fn max_cells_per_axis(n: usize, dim: usize) -> usize {
    let budget = (4 * n).max(64) as f64;
    budget.powf(1.0 / dim as f64).floor().max(1.0) as usize
}

/// Cells per axis such that the cell side is at least `radius`.
fn cells_for_radius(radius: f64, cap: usize) -> usize {
    if radius <= 0.0 {
        return cap;
    }
    // Slack keeps fp rounding at cell boundaries from dropping neighbours.
    let k = (1.0 / (radius * (1.0 + 1e-9))).floor();
    if k < 1.0 {
        1
    } else {
        (k as usize).min(cap)
    }
}

/// Generates an SPA graph using a spatial grid index.
///
/// The grid's cell side always covers the largest sphere radius among the
/// existing vertices, so every vertex whose sphere can contain the newcomer
/// lies in the 3^d block of cells around it. The grid is rebuilt with finer
/// cells once that radius has halved, and with coarser cells if (original
/// variant) it grows past the cell side.
pub fn generate(params: &SpaParams) -> Result<SpaGraph, GraphError> {
    params.validate()?;
    let n = params.n;
    let metric = params.metric;
    let d = metric.dim();
    let rule = SphereRule::new(params);
    let positions = draw_positions(params);
    let pos = |i: usize| &positions[(i - 1) * d..i * d];

    let cap = max_cells_per_axis(n, d);
    let mut in_degree = vec![0u32; n];
    let mut max_in_degree = 0u32;
    let mut edges = Vec::new();
    let mut grid: Option<CellGrid> = None;
    let mut candidates: Vec<usize> = Vec::new();

    for t in 2..=n {
        let max_volume = match params.variant {
            Variant::Original => sphere_volume_original(max_in_degree, t, params.a1, params.a2),
            Variant::Modified => sphere_volume_modified(1, t, params.a1, params.a2),
        };
        let max_radius = if max_volume >= 1.0 { f64::INFINITY } else { metric.radius_for_volume(max_volume) };
        let wanted = cells_for_radius(max_radius, cap);

        let usable = match &grid {
            Some(g) => wanted >= g.cells_per_axis && wanted < 2 * g.cells_per_axis,
            None => false,
        };
        if !usable {
            grid = if wanted >= 3 {
                // Growing radii (original variant) get headroom to avoid
                // rebuilding on every degree increment.
                let k = match &grid {
                    Some(g) if wanted < g.cells_per_axis => cells_for_radius(max_radius * 1.5, cap).max(1),
                    _ => wanted,
                };
                if k >= 3 {
                    let mut g = CellGrid::new(d, k);
                    for i in 1..t {
                        g.insert(pos(i), i as u32);
                    }
                    Some(g)
                } else {
                    None
                }
            } else {
                None
            };
        }

        let here = pos(t);
        candidates.clear();
        match &grid {
            Some(g) => {
                debug_assert!(g.side() >= max_radius);
                g.for_each_near(here, |v| candidates.push(v as usize));
                candidates.sort_unstable();
            }
            None => candidates.extend(1..t),
        }

        for &i in &candidates {
            let volume = rule.volume(i, t, in_degree[i - 1]);
            if sphere_contains(&metric, volume, metric.distance(here, pos(i))) {
                edges.push(Edge { from: t, to: i });
            }
        }
        for e in edges.iter().rev().take_while(|e| e.from == t) {
            in_degree[e.to - 1] += 1;
            max_in_degree = max_in_degree.max(in_degree[e.to - 1]);
        }

        if let Some(g) = grid.as_mut() {
            g.insert(here, t as u32);
        }
    }

    Ok(SpaGraph { params: *params, positions, edges, in_degree })
}

/// Quadratic reference generator: tests every older vertex at every
/// arrival. Shares the position stream with [`generate`], so both produce
/// the same edge list for the same parameters.
pub fn generate_brute_force(params: &SpaParams) -> Result<SpaGraph, GraphError> {
    params.validate()?;
    let metric = params.metric;
    let rule = SphereRule::new(params);
    let positions = draw_positions(params);
    let d = metric.dim();
    let mut in_degree = vec![0u32; params.n];
    let mut edges = Vec::new();
    for t in 2..=params.n {
        let here = &positions[(t - 1) * d..t * d];
        let mut linked = Vec::new();
        for i in 1..t {
            let volume = rule.volume(i, t, in_degree[i - 1]);
            let dist = metric.distance(here, &positions[(i - 1) * d..i * d]);
            if sphere_contains(&metric, volume, dist) {
                linked.push(i);
            }
        }
        for i in linked {
            in_degree[i - 1] += 1;
            edges.push(Edge { from: t, to: i });
        }
    }
    Ok(SpaGraph { params: *params, positions, edges, in_degree })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Norm;

    fn params(n: usize, dim: usize, norm: Norm, variant: Variant, seed: u64) -> SpaParams {
        SpaParams { a1: 0.5, a2: 1.0, n, metric: MetricConfig::new(dim, norm).unwrap(), variant, seed }
    }

    #[test]
    fn original_volume_examples() {
        assert_eq!(sphere_volume_original(0, 1, 0.5, 1.0), 1.0);
        assert!((sphere_volume_original(0, 10, 0.5, 1.0) - 0.1).abs() < 1e-15);
        assert!((sphere_volume_original(4, 100, 0.5, 1.0) - 0.03).abs() < 1e-15);
    }

    #[test]
    fn modified_volume_examples() {
        assert!((sphere_volume_modified(10, 10, 0.5, 1.0) - 0.1).abs() < 1e-15);
        assert!((sphere_volume_modified(1, 100, 0.5, 1.0) - 0.1).abs() < 1e-15);
        assert_eq!(sphere_volume_modified(1, 1, 0.5, 2.0), 1.0);
    }

    #[test]
    fn expected_degree_examples() {
        assert_eq!(expected_in_degree_exact(100, 100, 0.5, 1.0), 0.0);
        assert_eq!(expected_in_degree_closed(100, 100, 0.5, 1.0), 0.0);
        assert!((expected_in_degree_closed(1, 100, 0.5, 1.0) - 18.0).abs() < 1e-12);
        assert!((expected_in_degree_closed(10, 2000, 0.5, 1.0) - 2.0 * (200f64.sqrt() - 1.0)).abs() < 1e-12);

        // 99-term sum, accumulated independently.
        let mut sum = 0.0;
        for k in 2..=100 {
            sum += 1.0 / (k as f64).sqrt();
        }
        let exact = expected_in_degree_exact(1, 100, 0.5, 1.0);
        assert!((exact - sum).abs() < 1e-12);
        assert!((exact - 18.0).abs() < 2.0);
    }

    #[test]
    fn exact_expected_degree_is_nonincreasing_in_birth_time() {
        let values: Vec<f64> = (1..=200).map(|i| expected_in_degree_exact(i, 200, 0.5, 1.0)).collect();
        assert!(values.windows(2).all(|w| w[0] >= w[1]));
    }

    #[test]
    fn closed_form_error_is_below_a2_over_a1() {
        for &(a1, a2) in &[(0.5, 1.0), (0.3, 0.7), (0.8, 0.2), (0.9, 0.05)] {
            for &n in &[50usize, 500, 3000] {
                for i in 1..=n {
                    // Skip sums with clamped terms.
                    if sphere_volume_modified(i, i + 1, a1, a2) >= 1.0 {
                        continue;
                    }
                    let exact = expected_in_degree_exact(i, n, a1, a2);
                    let closed = expected_in_degree_closed(i, n, a1, a2);
                    assert!((exact - closed).abs() < a2 / a1, "a1={a1} a2={a2} n={n} i={i}");
                }
            }
        }
    }

    #[test]
    fn single_vertex_graph() {
        let g = generate(&params(1, 2, Norm::L2, Variant::Modified, 3)).unwrap();
        assert_eq!(g.n(), 1);
        assert!(g.edges().is_empty());
    }

    #[test]
    fn invalid_parameters_are_rejected() {
        let mut p = params(10, 1, Norm::L2, Variant::Modified, 0);
        p.a1 = 1.0;
        assert_eq!(generate(&p), Err(GraphError::InvalidA1(1.0)));
        p.a1 = 0.5;
        p.a2 = -1.0;
        assert!(generate(&p).is_err());
        p.a2 = 1.0;
        p.n = 0;
        assert_eq!(generate(&p), Err(GraphError::Empty));
    }

    #[test]
    fn grid_matches_brute_force() {
        for variant in [Variant::Modified, Variant::Original] {
            for (dim, norm) in [(1, Norm::L2), (2, Norm::Infinity), (2, Norm::L2), (3, Norm::L1)] {
                for seed in 0..3 {
                    let p = params(1500, dim, norm, variant, seed);
                    let fast = generate(&p).unwrap();
                    let slow = generate_brute_force(&p).unwrap();
                    assert_eq!(fast, slow, "{variant} d={dim} {norm:?} seed={seed}");
                }
            }
        }
    }

    #[test]
    fn large_a2_keeps_whole_torus_spheres() {
        // With A2 large every sphere covers the torus for a while.
        let p = SpaParams { a2: 20.0, ..params(300, 2, Norm::L2, Variant::Original, 4) };
        assert_eq!(generate(&p).unwrap(), generate_brute_force(&p).unwrap());
        let g = generate(&SpaParams { a2: 20.0, ..params(30, 1, Norm::L2, Variant::Modified, 4) }).unwrap();
        // v_2 arrives inside every sphere when A2/(2^{1/2}) >= 1.
        assert!(g.edges().contains(&Edge { from: 2, to: 1 }));
    }

    #[test]
    fn generation_is_deterministic() {
        let p = params(800, 2, Norm::L2, Variant::Modified, 11);
        assert_eq!(generate(&p).unwrap(), generate(&p).unwrap());
        let q = SpaParams { seed: 12, ..p };
        assert_ne!(generate(&p).unwrap().positions(), generate(&q).unwrap().positions());
    }

    #[test]
    fn edges_respect_spheres_and_degrees() {
        for variant in [Variant::Modified, Variant::Original] {
            let g = generate(&params(3000, 2, Norm::Infinity, variant, 21)).unwrap();
            let mut deg = vec![0u32; g.n()];
            let mut seen_before: Vec<u32> = vec![0; g.n()];
            for e in g.edges() {
                assert!(e.from > e.to && e.to >= 1);
                let volume = match variant {
                    Variant::Modified => sphere_volume_modified(e.to, e.from, 0.5, 1.0),
                    Variant::Original => sphere_volume_original(seen_before[e.to - 1], e.from, 0.5, 1.0),
                };
                assert!(sphere_contains(g.metric(), volume, g.edge_length(*e)));
                deg[e.to - 1] += 1;
                seen_before[e.to - 1] += 1;
            }
            assert_eq!(deg, g.in_degrees());
        }
    }

    #[test]
    fn from_parts_validates_structure() {
        let p = params(2, 1, Norm::L2, Variant::Modified, 0);
        assert!(SpaGraph::from_parts(p, vec![0.1, 0.3], vec![Edge { from: 2, to: 1 }]).is_ok());
        assert!(SpaGraph::from_parts(p, vec![0.1, 0.3], vec![Edge { from: 1, to: 2 }]).is_err());
        assert!(SpaGraph::from_parts(p, vec![0.1, 0.3], vec![Edge { from: 3, to: 1 }]).is_err());
        assert!(SpaGraph::from_parts(p, vec![0.1], vec![]).is_err());
        assert!(SpaGraph::from_parts(p, vec![0.1, 1.0], vec![]).is_err());
    }
}
