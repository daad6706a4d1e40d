//! Invariant and oracle checks behind `spa-sir verify`.
//!
//! Each check is self-contained, deterministic, and reports the seed that
//! reproduces a failure.

use std::fmt;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::analysis::{degree_threshold, fit_power_law, long_edge_prob_bound, phi_bound, FitMethod};
use crate::contagion::{beta_b, beta_from_contacts, ContagionModel, ContagionScenario, ScenarioKind};
use crate::generator::{
    expected_in_degree_closed, generate, generate_brute_force, sphere_contains, sphere_volume_modified,
    sphere_volume_original, Edge, SpaGraph, SpaParams, Variant,
};
use crate::geometry::{MetricConfig, Norm};
use crate::seeding::{derive_seed, tag};
use crate::sir::{
    build_potential_graph_with_betas, infection_graph_at, run_sir_with_betas, Neighbourhoods,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Level {
    /// Networks of at most 2000 vertices.
    Fast,
    /// Adds the 10⁵-vertex degree checks.
    Full,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckReport {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
    /// Seed reproducing the first failure, when one applies.
    pub seed: Option<u64>,
}

impl fmt::Display for CheckReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let status = if self.passed { "PASS" } else { "FAIL" };
        write!(f, "{status} {}: {}", self.name, self.detail)?;
        if let (false, Some(seed)) = (self.passed, self.seed) {
            write!(f, " (seed {seed})")?;
        }
        Ok(())
    }
}

fn pass(name: &'static str, detail: impl Into<String>) -> CheckReport {
    CheckReport { name, passed: true, detail: detail.into(), seed: None }
}

fn fail(name: &'static str, detail: impl Into<String>, seed: Option<u64>) -> CheckReport {
    CheckReport { name, passed: false, detail: detail.into(), seed }
}

/// An edge whose head's sphere did not contain its tail on arrival.
#[derive(Debug, Clone, PartialEq)]
pub struct ContainmentViolation {
    pub edge: Edge,
    pub distance: f64,
    pub radius: f64,
}

impl fmt::Display for ContainmentViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "edge {} -> {} has length {} beyond sphere radius {}",
            self.edge.from, self.edge.to, self.distance, self.radius
        )
    }
}

/// Checks every edge against the sphere of its head at the tail's arrival.
/// Original-variant volumes replay the in-degree accumulated from earlier
/// edges.
pub fn check_sphere_containment(graph: &SpaGraph) -> Result<(), ContainmentViolation> {
    let p = graph.params();
    let metric = graph.metric();
    let mut degree_so_far = vec![0u32; graph.n()];
    let mut edges = graph.edges().to_vec();
    edges.sort_by_key(|e| (e.from, e.to));
    for e in edges {
        let volume = match p.variant {
            Variant::Modified => sphere_volume_modified(e.to, e.from, p.a1, p.a2),
            Variant::Original => sphere_volume_original(degree_so_far[e.to - 1], e.from, p.a1, p.a2),
        };
        let distance = graph.edge_length(e);
        if !sphere_contains(metric, volume, distance) {
            return Err(ContainmentViolation { edge: e, distance, radius: metric.radius_for_volume(volume) });
        }
        degree_so_far[e.to - 1] += 1;
    }
    Ok(())
}

/// Probability mass function of a sum of independent Bernoulli variables,
/// by direct convolution.
pub fn poisson_binomial_pmf(probabilities: &[f64]) -> Vec<f64> {
    let mut pmf = vec![1.0];
    for &q in probabilities {
        let mut next = vec![0.0; pmf.len() + 1];
        for (k, &mass) in pmf.iter().enumerate() {
            next[k] += mass * (1.0 - q);
            next[k + 1] += mass * q;
        }
        pmf = next;
    }
    pmf
}

/// Pearson chi-squared goodness of fit of integer `samples` against `pmf`.
/// Adjacent outcomes are pooled until each bin expects at least 5 counts.
/// Returns `(statistic, degrees of freedom, p-value)`.
pub fn chi_squared_gof(samples: &[usize], pmf: &[f64]) -> (f64, usize, f64) {
    let total = samples.len() as f64;
    let mut counts = vec![0usize; pmf.len()];
    for &s in samples {
        counts[s.min(pmf.len() - 1)] += 1;
    }
    let mut bins: Vec<(f64, usize)> = Vec::new();
    let (mut expected, mut observed) = (0.0, 0usize);
    for (k, &mass) in pmf.iter().enumerate() {
        expected += mass * total;
        observed += counts[k];
        if expected >= 5.0 {
            bins.push((expected, observed));
            expected = 0.0;
            observed = 0;
        }
    }
    // Remaining tail mass joins the last bin.
    match bins.last_mut() {
        Some(last) => {
            last.0 += expected;
            last.1 += observed;
        }
        None => bins.push((expected, observed)),
    }
    let statistic: f64 = bins.iter().map(|&(e, o)| (o as f64 - e).powi(2) / e).sum();
    let dof = bins.len().saturating_sub(1).max(1);
    let p_value = 1.0 - ChiSquared::new(dof as f64).expect("positive dof").cdf(statistic);
    (statistic, dof, p_value)
}

fn modified(n: usize, dim: usize, norm: Norm, seed: u64) -> SpaParams {
    SpaParams { a1: 0.5, a2: 1.0, n, metric: MetricConfig::new(dim, norm).expect("valid"), variant: Variant::Modified, seed }
}

fn check_metric_axioms(master: u64) -> CheckReport {
    const NAME: &str = "torus metric axioms";
    let seed = derive_seed(master, &[tag("metric")]);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for d in 1..=3 {
        for norm in [Norm::L1, Norm::L2, Norm::Infinity] {
            let m = MetricConfig::new(d, norm).expect("valid");
            for _ in 0..10_000 {
                let (x, y, z) = (m.sample_uniform(&mut rng), m.sample_uniform(&mut rng), m.sample_uniform(&mut rng));
                let (xy, yx) = (m.distance(x.coords(), y.coords()), m.distance(y.coords(), x.coords()));
                let xz = m.distance(x.coords(), z.coords());
                let yz = m.distance(y.coords(), z.coords());
                if xy != yx || xz > xy + yz + 1e-12 || xy > m.diameter() + 1e-12 {
                    return fail(NAME, format!("violated for d={d} p={norm} at {x:?} {y:?} {z:?}"), Some(seed));
                }
            }
            for r in [1e-6, 1e-3, 0.1, 0.4] {
                let back = m.radius_for_volume(m.ball_volume(r));
                if ((back - r) / r).abs() >= 1e-12 {
                    return fail(NAME, format!("radius round trip {r} -> {back} for d={d} p={norm}"), None);
                }
            }
        }
    }
    pass(NAME, "symmetry, triangle inequality and radius/volume inversion on 90000 triples")
}

fn check_containment(level: Level, master: u64) -> CheckReport {
    const NAME: &str = "sphere containment";
    let n = if level == Level::Fast { 2000 } else { 10_000 };
    let mut checked = 0;
    for variant in [Variant::Modified, Variant::Original] {
        for (dim, norm) in [(1, Norm::Infinity), (2, Norm::L2), (3, Norm::L1)] {
            let seed = derive_seed(master, &[dim as u64, tag("contain")]);
            let params = SpaParams { variant, ..modified(n, dim, norm, seed) };
            let graph = match generate(&params) {
                Ok(g) => g,
                Err(e) => return fail(NAME, e.to_string(), Some(seed)),
            };
            if let Err(v) = check_sphere_containment(&graph) {
                return fail(NAME, format!("{variant} d={dim}: {v}"), Some(seed));
            }
            checked += graph.edges().len();
        }
    }
    pass(NAME, format!("{checked} edges inside their spheres at n={n}"))
}

fn check_oracle_equivalence(master: u64) -> CheckReport {
    const NAME: &str = "grid index = brute force";
    let cases: Vec<(Variant, usize, Norm, u64)> = [Variant::Modified, Variant::Original]
        .into_iter()
        .flat_map(|v| [(1, Norm::Infinity), (2, Norm::L2), (2, Norm::Infinity)].into_iter().map(move |(d, p)| (v, d, p)))
        .flat_map(|(v, d, p)| (0..3).map(move |k| (v, d, p, k)))
        .collect();
    let failures: Vec<(u64, String)> = cases
        .par_iter()
        .filter_map(|&(variant, dim, norm, k)| {
            let seed = derive_seed(master, &[k, dim as u64, tag("oracle")]);
            let params = SpaParams { variant, ..modified(2000, dim, norm, seed) };
            let fast = generate(&params).ok()?;
            let slow = generate_brute_force(&params).ok()?;
            (fast.edges() != slow.edges()).then(|| (seed, format!("{variant} d={dim} p={norm}")))
        })
        .collect();
    match failures.first() {
        None => pass(NAME, format!("{} graphs at n=2000 with identical edge lists", cases.len())),
        Some((seed, what)) => fail(NAME, format!("edge lists differ for {what}"), Some(*seed)),
    }
}

fn check_poisson_binomial(master: u64) -> CheckReport {
    const NAME: &str = "in-degree is Poisson-binomial";
    let (i, n, graphs) = (5usize, 500usize, 500u64);
    let probabilities: Vec<f64> = (i + 1..=n).map(|k| sphere_volume_modified(i, k, 0.5, 1.0)).collect();
    let pmf = poisson_binomial_pmf(&probabilities);
    let samples: Vec<usize> = (0..graphs)
        .into_par_iter()
        .map(|k| {
            let g = generate(&modified(n, 1, Norm::Infinity, derive_seed(master, &[k, tag("pbinom")]))).expect("valid");
            g.in_degree(i) as usize
        })
        .collect();
    let (statistic, dof, p_value) = chi_squared_gof(&samples, &pmf);
    let detail = format!("chi2={statistic:.2} dof={dof} p={p_value:.4} over {graphs} graphs");
    if p_value >= 0.01 {
        pass(NAME, detail)
    } else {
        fail(NAME, detail, Some(master))
    }
}

fn check_expected_degree(master: u64) -> CheckReport {
    const NAME: &str = "expected in-degree of vertex 10";
    let (i, n, graphs) = (10usize, 2000usize, 200u64);
    let samples: Vec<f64> = (0..graphs)
        .into_par_iter()
        .map(|k| {
            let g = generate(&modified(n, 1, Norm::Infinity, derive_seed(master, &[k, tag("degree")]))).expect("valid");
            g.in_degree(i) as f64
        })
        .collect();
    let (mean, se) = mean_and_se(&samples);
    let target = expected_in_degree_closed(i, n, 0.5, 1.0);
    let detail = format!("mean {mean:.3} vs closed form {target:.3} (SE {se:.3})");
    if (mean - target).abs() <= 2.0 + 3.0 * se {
        pass(NAME, detail)
    } else {
        fail(NAME, detail, Some(master))
    }
}

fn check_coupling(master: u64) -> CheckReport {
    const NAME: &str = "SIR layers = potential-graph BFS";
    let failures: Vec<u64> = (0..100u64)
        .into_par_iter()
        .filter_map(|k| {
            let seed = derive_seed(master, &[k, tag("couple")]);
            let graph = generate(&modified(500 + (k as usize % 4) * 500, 1 + (k as usize % 2), Norm::Infinity, seed)).ok()?;
            let kind = if k % 2 == 0 { ScenarioKind::A } else { ScenarioKind::B };
            let scenario = ContagionScenario::with_gamma(kind, [1.0, 10.0, 100.0][k as usize % 3]).ok()?;
            let betas = ContagionModel::default().vertex_betas(&graph, &scenario).ok()?;
            let origin = 1 + (seed % graph.n() as u64) as usize;
            let outcome = run_sir_with_betas(&graph, &Neighbourhoods::new(&graph), &betas, origin, seed, None).ok()?;
            let pg = build_potential_graph_with_betas(&graph, &betas, seed).ok()?;
            let reach = infection_graph_at(&pg, origin, u32::MAX);
            let mut taken: Vec<(usize, usize)> = outcome.transmissions.iter().map(|t| (t.from, t.to)).collect();
            taken.sort_unstable();
            (reach.hops != outcome.infection_time || reach.edges != taken).then_some(seed)
        })
        .collect();
    match failures.first() {
        None => pass(NAME, "100 trials with identical layers and transmission edges"),
        Some(&seed) => fail(NAME, "layers differ", Some(seed)),
    }
}

/// Empirical transmission frequency on a single edge against β.
pub fn two_vertex_frequency(kind: ScenarioKind, gamma: f64, runs: u64, master: u64) -> (f64, f64, f64) {
    let metric = MetricConfig::new(1, Norm::Infinity).expect("valid");
    let params = SpaParams { a1: 0.5, a2: 1.0, n: 2, metric, variant: Variant::Modified, seed: 0 };
    let graph = SpaGraph::from_parts(params, vec![0.1, 0.3], vec![Edge { from: 2, to: 1 }]).expect("valid");
    let scenario = ContagionScenario::with_gamma(kind, gamma).expect("valid");
    let betas = ContagionModel::default().vertex_betas(&graph, &scenario).expect("valid");
    let adjacency = Neighbourhoods::new(&graph);
    let hits = (0..runs)
        .into_par_iter()
        .filter(|&k| {
            let seed = derive_seed(master, &[k, tag("twovert")]);
            run_sir_with_betas(&graph, &adjacency, &betas, 1, seed, None).expect("valid").attack_size == 2
        })
        .count();
    let beta = betas[0];
    let freq = hits as f64 / runs as f64;
    let se = (beta * (1.0 - beta) / runs as f64).sqrt();
    (freq, beta, se)
}

fn check_two_vertex(master: u64) -> CheckReport {
    const NAME: &str = "single-edge transmission frequency";
    let mut parts = Vec::new();
    for kind in [ScenarioKind::A, ScenarioKind::B] {
        let (freq, beta, se) = two_vertex_frequency(kind, 1.0, 100_000, master);
        parts.push(format!("{kind}: {freq:.4} vs β={beta:.4}"));
        if (freq - beta).abs() > 3.0 * se {
            return fail(NAME, parts.join(", "), Some(master));
        }
    }
    pass(NAME, parts.join(", "))
}

fn check_probabilities() -> CheckReport {
    const NAME: &str = "transmission probabilities";
    let b = ContagionScenario::with_gamma(ScenarioKind::B, 1.0).expect("valid");
    let beta = beta_b(&b, 0.5, 1.0).expect("valid");
    if (beta - (1.0 - (-0.5f64).exp())).abs() > 1e-15 {
        return fail(NAME, format!("β_B(γ=1) = {beta}"), None);
    }
    for (tau, k1, k2) in [(0.2, 1.0, 3.0), (0.7, 0.1, 0.05), (1.0, 2.0, 2.0)] {
        let lhs = beta_from_contacts(tau, k1 + k2);
        let rhs = 1.0 - (1.0 - beta_from_contacts(tau, k1)) * (1.0 - beta_from_contacts(tau, k2));
        if ((lhs - rhs) / lhs).abs() > 1e-12 {
            return fail(NAME, format!("composition fails at τ={tau} κ=({k1},{k2})"), None);
        }
    }
    pass(NAME, "β_B value and exponential composition")
}

fn check_bounds() -> CheckReport {
    const NAME: &str = "long-edge bound decay";
    let metric = MetricConfig::new(1, Norm::Infinity).expect("valid");
    let b: Vec<f64> = [1e3, 1e6, 1e9].iter().map(|&n| long_edge_prob_bound(n, 0.5, 1.0, 10.0, &metric, 0.05)).collect();
    let detail = format!("bound at 1e3/1e6/1e9 = {:.4e}/{:.4e}/{:.4e}", b[0], b[1], b[2]);
    if (phi_bound(0.5, 1) - 0.1).abs() < 1e-15 && b[0] > b[1] && b[1] > b[2] && b[2] < 1e-2 {
        pass(NAME, detail)
    } else {
        fail(NAME, detail, None)
    }
}

fn check_mean_degree(master: u64) -> (CheckReport, Option<SpaGraph>) {
    const NAME: &str = "mean in-degree at n=1e5";
    let seed = derive_seed(master, &[tag("big")]);
    let graph = match generate(&modified(100_000, 1, Norm::Infinity, seed)) {
        Ok(g) => g,
        Err(e) => return (fail(NAME, e.to_string(), Some(seed)), None),
    };
    let mean = graph.mean_in_degree();
    let detail = format!("{mean:.4} (target 2)");
    let report = if (1.9..=2.1).contains(&mean) { pass(NAME, detail) } else { fail(NAME, detail, Some(seed)) };
    (report, Some(graph))
}

fn check_power_law(graph: &SpaGraph) -> CheckReport {
    const NAME: &str = "cumulative degree power law at n=1e5";
    let k_min = degree_threshold(graph.n());
    match fit_power_law(graph.in_degrees(), k_min, FitMethod::LeastSquares) {
        Ok(fit) if (1.7..=2.3).contains(&fit.exponent) => {
            pass(NAME, format!("exponent {:.3} above k={k_min} (R²={:.3})", fit.exponent, fit.r2))
        }
        Ok(fit) => fail(NAME, format!("exponent {:.3} outside [1.7, 2.3]", fit.exponent), Some(graph.params().seed)),
        Err(e) => fail(NAME, e.to_string(), Some(graph.params().seed)),
    }
}

pub fn mean_and_se(samples: &[f64]) -> (f64, f64) {
    let len = samples.len() as f64;
    let mean = samples.iter().sum::<f64>() / len;
    let var = samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (len - 1.0);
    (mean, (var / len).sqrt())
}

/// Runs every check of `level`. Reports come back in a fixed order.
pub fn run_checks(level: Level, master: u64) -> Vec<CheckReport> {
    let mut reports = vec![
        check_metric_axioms(master),
        check_containment(level, master),
        check_oracle_equivalence(master),
        check_expected_degree(master),
        check_poisson_binomial(master),
        check_probabilities(),
        check_two_vertex(master),
        check_coupling(master),
        check_bounds(),
    ];
    if level == Level::Full {
        let (mean_report, graph) = check_mean_degree(master);
        reports.push(mean_report);
        if let Some(graph) = graph {
            reports.push(check_power_law(&graph));
        }
    }
    reports
}
