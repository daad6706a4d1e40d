//! Outbreaks driven by the same pair draws at increasing γ.

use spa_epidemic::contagion::{ContagionModel, ContagionScenario, ScenarioKind};
use spa_epidemic::generator::{generate, SpaGraph, SpaParams, Variant};
use spa_epidemic::geometry::{MetricConfig, Norm};
use spa_epidemic::sir::{
    build_potential_graph_with_betas, longest_edge, run_sir_with_betas, InfectionOutcome, Neighbourhoods,
};

const GAMMAS: [f64; 6] = [0.5, 1.0, 3.0, 10.0, 30.0, 100.0];

struct Coupled {
    outcome: InfectionOutcome,
    /// Longest occupied pair leaving an infected vertex.
    reach_edge: f64,
}

fn sweep(seed: u64, kind: ScenarioKind) -> (SpaGraph, Vec<Coupled>) {
    let params = SpaParams {
        a1: 0.5,
        a2: 1.0,
        n: 1500,
        metric: MetricConfig::new(1, Norm::Infinity).unwrap(),
        variant: Variant::Modified,
        seed,
    };
    let graph = generate(&params).unwrap();
    let adjacency = Neighbourhoods::new(&graph);
    let run_seed = seed ^ 0x5eed;
    let runs = GAMMAS
        .iter()
        .map(|&gamma| {
            let scenario = ContagionScenario::with_gamma(kind, gamma).unwrap();
            let betas = ContagionModel::default().vertex_betas(&graph, &scenario).unwrap();
            let outcome = run_sir_with_betas(&graph, &adjacency, &betas, 1, run_seed, None).unwrap();
            let pg = build_potential_graph_with_betas(&graph, &betas, run_seed).unwrap();
            let infected = |v: usize| outcome.infection_time[v - 1].is_some();
            let reach_edge = longest_edge(&graph, (1..=graph.n()).filter(|&v| infected(v)).flat_map(|v| pg.out(v).map(move |u| (v, u))));
            Coupled { outcome, reach_edge }
        })
        .collect();
    (graph, runs)
}

#[test]
fn outbreaks_grow_with_gamma_under_shared_draws() {
    for trial in 0..50u64 {
        let kind = if trial % 2 == 0 { ScenarioKind::A } else { ScenarioKind::B };
        let (_, runs) = sweep(1000 + trial, kind);
        for pair in runs.windows(2) {
            let (low, high) = (&pair[0], &pair[1]);
            assert!(high.outcome.attack_size >= low.outcome.attack_size, "trial {trial}");
            assert!(high.outcome.max_displacement >= low.outcome.max_displacement, "trial {trial}");
            assert!(high.reach_edge >= low.reach_edge, "trial {trial}");
            for (v, t) in low.outcome.infection_time.iter().enumerate() {
                if let Some(t) = t {
                    let earlier = high.outcome.infection_time[v].is_some_and(|s| s <= *t);
                    assert!(earlier, "trial {trial} vertex {}", v + 1);
                }
            }
        }
    }
}

/// The longest traversed edge is not monotone: a larger γ can infect the far
/// end of a long edge before its near end, so the edge is never crossed.
#[test]
fn longest_jump_drops_only_when_the_target_is_reached_first() {
    let mut drops = 0;
    for trial in 0..50u64 {
        let kind = if trial % 2 == 0 { ScenarioKind::A } else { ScenarioKind::B };
        let (graph, runs) = sweep(1000 + trial, kind);
        for pair in runs.windows(2) {
            let (low, high) = (&pair[0].outcome, &pair[1].outcome);
            if high.longest_jump >= low.longest_jump {
                continue;
            }
            drops += 1;
            for t in low.transmissions.iter().filter(|t| t.length > high.longest_jump) {
                assert!(!high.transmissions.iter().any(|h| (h.from, h.to) == (t.from, t.to)));
                let from = high.infection_time[t.from - 1].unwrap();
                let to = high.infection_time[t.to - 1].unwrap();
                assert!(to <= from, "trial {trial}: {} -> {} skipped without reaching {} first", t.from, t.to, t.to);
                assert_eq!(graph.distance(t.from, t.to), t.length);
            }
        }
    }
    assert!(drops > 0, "no decrease observed in 250 coupled steps");
}
