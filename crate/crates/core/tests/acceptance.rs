//! Quantitative acceptance criteria. Runs as a plain binary so every
//! criterion prints one PASS/FAIL line; exits nonzero if any fails.

use std::process::ExitCode;
use std::time::Instant;

use rayon::prelude::*;

use spa_epidemic::analysis::{degree_threshold, fit_power_law, long_edge_prob_bound, loglog_regression, FitMethod};
use spa_epidemic::config::{ExperimentConfig, RawConfig, DEFAULT_MASTER_SEED};
use spa_epidemic::contagion::{ContagionModel, ContagionScenario, ScenarioKind};
use spa_epidemic::experiment::{collect_experiment, ExperimentRecord};
use spa_epidemic::generator::{expected_in_degree_closed, generate, generate_brute_force, SpaParams, Variant};
use spa_epidemic::geometry::{MetricConfig, Norm};
use spa_epidemic::seeding::{derive_seed, tag};
use spa_epidemic::sir::{build_potential_graph_with_betas, infection_graph_at, run_sir_with_betas, Neighbourhoods};
use spa_epidemic::verify::{mean_and_se, two_vertex_frequency};

const MASTER: u64 = DEFAULT_MASTER_SEED;

fn params(n: usize, seed: u64) -> SpaParams {
    SpaParams {
        a1: 0.5,
        a2: 1.0,
        n,
        metric: MetricConfig::new(1, Norm::Infinity).unwrap(),
        variant: Variant::Modified,
        seed,
    }
}

type Outcome = (bool, String);

fn expected_in_degree() -> Outcome {
    let samples: Vec<f64> = (0..200u64)
        .into_par_iter()
        .map(|k| generate(&params(2000, derive_seed(MASTER, &[k, tag("accdeg")]))).unwrap().in_degree(10) as f64)
        .collect();
    let (mean, se) = mean_and_se(&samples);
    let target = expected_in_degree_closed(10, 2000, 0.5, 1.0);
    let tol = 2.0 + 3.0 * se;
    ((mean - target).abs() <= tol, format!("mean {mean:.3} vs {target:.3}, |diff| {:.3} <= {tol:.3}", (mean - target).abs()))
}

fn mean_degree_and_power_law() -> (Outcome, Outcome) {
    let seed = derive_seed(MASTER, &[tag("acclarge")]);
    let graph = generate(&params(100_000, seed)).unwrap();
    let mean = graph.mean_in_degree();
    let mean_outcome = ((1.9..=2.1).contains(&mean), format!("mean in-degree {mean:.4} in [1.9, 2.1]"));
    let k_min = degree_threshold(graph.n());
    let fit = fit_power_law(graph.in_degrees(), k_min, FitMethod::LeastSquares);
    let fit_outcome = match fit {
        Ok(fit) => (
            (1.7..=2.3).contains(&fit.exponent),
            format!("exponent {:.3} in [1.7, 2.3] (k_min {k_min}, {} points, R² {:.3})", fit.exponent, fit.points, fit.r2),
        ),
        Err(e) => (false, e.to_string()),
    };
    (mean_outcome, fit_outcome)
}

fn oracle_equivalence() -> Outcome {
    let mismatched: Vec<u64> = (0..20u64)
        .into_par_iter()
        .map(|k| derive_seed(MASTER, &[k, tag("accoracle")]))
        .filter(|&seed| {
            let p = params(2000, seed);
            let mut fast = generate(&p).unwrap().edges().to_vec();
            let mut slow = generate_brute_force(&p).unwrap().edges().to_vec();
            fast.sort_unstable_by_key(|e| (e.from, e.to));
            slow.sort_unstable_by_key(|e| (e.from, e.to));
            fast != slow
        })
        .collect();
    (mismatched.is_empty(), format!("20 seeds at n=2000, mismatched seeds {mismatched:?}"))
}

fn coupling() -> Outcome {
    let mismatched: Vec<u64> = (0..100u64)
        .into_par_iter()
        .filter_map(|k| {
            let seed = derive_seed(MASTER, &[k, tag("acccouple")]);
            let graph = generate(&params(200 + 18 * k as usize, seed)).unwrap();
            let kind = if k % 2 == 0 { ScenarioKind::A } else { ScenarioKind::B };
            let gamma = [1.0, 10.0, 100.0][(k / 2) as usize % 3];
            let scenario = ContagionScenario::with_gamma(kind, gamma).unwrap();
            let betas = ContagionModel::default().vertex_betas(&graph, &scenario).unwrap();
            let origin = 1 + (seed % graph.n() as u64) as usize;
            let outcome = run_sir_with_betas(&graph, &Neighbourhoods::new(&graph), &betas, origin, seed, None).unwrap();
            let pg = build_potential_graph_with_betas(&graph, &betas, seed).unwrap();
            let reach = infection_graph_at(&pg, origin, u32::MAX);
            let mut taken: Vec<(usize, usize)> = outcome.transmissions.iter().map(|t| (t.from, t.to)).collect();
            taken.sort_unstable();
            (reach.hops != outcome.infection_time || reach.edges != taken).then_some(seed)
        })
        .collect();
    (mismatched.is_empty(), format!("100 trials at n in [200, 1982], mismatched seeds {mismatched:?}"))
}

fn two_vertex() -> Outcome {
    let mut ok = true;
    let mut parts = Vec::new();
    for kind in [ScenarioKind::A, ScenarioKind::B] {
        let (freq, beta, se) = two_vertex_frequency(kind, 1.0, 100_000, MASTER);
        ok &= (freq - beta).abs() <= 3.0 * se;
        parts.push(format!("{kind}: {freq:.5} vs β {beta:.5} (3 SE {:.5})", 3.0 * se));
    }
    (ok, parts.join("; "))
}

fn config(text: &str) -> ExperimentConfig {
    ExperimentConfig::resolve(RawConfig::parse(text).unwrap()).unwrap()
}

fn protocol_trend() -> Outcome {
    let cfg = config(
        "spa.n = [1000, 2000, 3000, 4000, 5000, 6000, 7000, 8000, 9000, 10000]\n\
         infection.scenarios = [\"A\"]\n\
         infection.gamma = [10]\n\
         infection.runs = 50\n\
         infection.graphs_per_cell = 1\n\
         infection.origin = \"oldest\"\n",
    );
    let records = collect_experiment(&cfg).unwrap();
    let points: Vec<(f64, f64)> = records.iter().map(|r| (r.n as f64, r.longest_jump)).collect();
    match loglog_regression(&points) {
        Ok(fit) => (
            (-1.2..=-0.1).contains(&fit.slope),
            format!(
                "slope {:.3} in [-1.2, -0.1], intercept {:.3}, R² {:.3}, {} runs used, {} without a jump",
                fit.slope, fit.intercept, fit.r2, fit.used, fit.excluded
            ),
        ),
        Err(e) => (false, e.to_string()),
    }
}

fn median(mut xs: Vec<f64>) -> f64 {
    xs.sort_by(f64::total_cmp);
    let m = xs.len() / 2;
    if xs.len().is_multiple_of(2) {
        (xs[m - 1] + xs[m]) / 2.0
    } else {
        xs[m]
    }
}

fn scenario_contrast() -> Outcome {
    let cfg = config(
        "spa.n = [5000, 10000]\n\
         infection.scenarios = [\"A\", \"B\"]\n\
         infection.gamma = [1, 100]\n\
         infection.runs = 50\n",
    );
    let records = collect_experiment(&cfg).unwrap();
    let med = |n: usize, scenario: &str, gamma: f64| {
        median(
            records
                .iter()
                .filter(|r: &&ExperimentRecord| r.n == n && r.scenario == scenario && r.gamma == gamma)
                .map(|r| r.longest_jump)
                .collect(),
        )
    };
    let mut ok = true;
    let mut parts = Vec::new();
    for n in [5000, 10000] {
        let gap_low = med(n, "B", 1.0) - med(n, "A", 1.0);
        let gap_high = med(n, "B", 100.0) - med(n, "A", 100.0);
        ok &= gap_low >= 0.0 && gap_high.abs() < gap_low;
        parts.push(format!("n={n}: gap(γ=1) {gap_low:.4}, gap(γ=100) {gap_high:.4}"));
    }
    (ok, parts.join("; "))
}

fn bound_behaviour() -> Outcome {
    let metric = MetricConfig::new(1, Norm::Infinity).unwrap();
    let b: Vec<f64> = [1e3, 1e6, 1e9].iter().map(|&n| long_edge_prob_bound(n, 0.5, 1.0, 10.0, &metric, 0.05)).collect();
    (b[0] > b[1] && b[1] > b[2] && b[2] < 1e-2, format!("bound {:.4e} > {:.4e} > {:.4e}, last < 1e-2", b[0], b[1], b[2]))
}

fn timed(name: &'static str, f: impl FnOnce() -> Outcome) -> (&'static str, Outcome, f64) {
    let start = Instant::now();
    let outcome = f();
    (name, outcome, start.elapsed().as_secs_f64())
}

fn main() -> ExitCode {
    let start = Instant::now();
    let (mean, power) = mean_degree_and_power_law();
    let large = start.elapsed().as_secs_f64();
    let results = [
        timed("expected in-degree of vertex 10", expected_in_degree),
        ("mean in-degree at n=1e5", mean, large),
        ("cumulative degree power law at n=1e5", power, large),
        timed("grid generator = brute force", oracle_equivalence),
        timed("SIR = potential-graph BFS", coupling),
        timed("single-edge transmission frequency", two_vertex),
        timed("longest jump shrinks with n", protocol_trend),
        timed("scenario contrast of median longest jump", scenario_contrast),
        timed("long-edge bound decay", bound_behaviour),
    ];

    let mut failures = 0;
    for (name, (ok, detail), secs) in &results {
        println!("{} {name}: {detail} [{secs:.1}s]", if *ok { "PASS" } else { "FAIL" });
        failures += usize::from(!ok);
    }
    println!("acceptance: {} passed, {failures} failed", results.len() - failures);
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
