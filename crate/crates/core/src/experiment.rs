//! Batch execution of the infection grid and the CSV files it produces.

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::analysis::{phi_bound, theta_bound, BoundParams};
use crate::config::{ExperimentConfig, GraphCell};
use crate::contagion::{ContagionError, ContagionScenario, ScenarioKind};
use crate::generator::{generate, GraphError, SpaGraph, SpaParams};
use crate::geometry::MetricConfig;
use crate::seeding::{derive_seed, tag};
use crate::sir::{run_sir_with_betas, InfectionOutcome, Neighbourhoods, SirError};

pub const EXPERIMENT_HEADER: &str =
    "n,variant,A1,A2,d,p,scenario,gamma,run,seed,origin,attack_size,duration,longest_jump,max_displacement";

pub const DETAIL_HEADER: &str = "vertex,infection_time,infector,edge_length";

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Contagion(#[from] ContagionError),
    #[error(transparent)]
    Sir(#[from] SirError),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// One row of the experiments CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentRecord {
    pub n: usize,
    pub variant: String,
    #[serde(rename = "A1")]
    pub a1: f64,
    #[serde(rename = "A2")]
    pub a2: f64,
    pub d: usize,
    pub p: String,
    pub scenario: String,
    pub gamma: f64,
    pub run: usize,
    pub seed: u64,
    pub origin: usize,
    pub attack_size: usize,
    pub duration: u32,
    pub longest_jump: f64,
    pub max_displacement: f64,
}

/// Seed of graph `graph_index` in graph cell `cell`.
pub fn graph_seed(master: u64, cell: usize, graph_index: usize) -> u64 {
    derive_seed(master, &[cell as u64, graph_index as u64, tag("graph")])
}

/// Seed of infection run `run` in infection cell `cell`.
pub fn run_seed(master: u64, cell: usize, run: usize) -> u64 {
    derive_seed(master, &[cell as u64, run as u64, tag("sir")])
}

fn spa_params(cell: &GraphCell, seed: u64) -> SpaParams {
    SpaParams { a1: cell.a1, a2: cell.a2, n: cell.n, metric: cell.metric, variant: cell.variant, seed }
}

/// Runs every cell of the grid and hands each record to `sink` in canonical
/// order (graph cell, scenario, γ, run). Runs of one cell execute in
/// parallel; the sink is called from the calling thread only.
pub fn run_experiment<F>(cfg: &ExperimentConfig, mut sink: F) -> Result<usize, ExperimentError>
where
    F: FnMut(&ExperimentRecord) -> Result<(), ExperimentError>,
{
    let mut rows = 0;
    let mut cell_index = 0;
    for (graph_cell_index, cell) in cfg.grid.cells().iter().enumerate() {
        let graphs = (0..cfg.graphs_per_cell)
            .into_par_iter()
            .map(|g| {
                let graph = generate(&spa_params(cell, graph_seed(cfg.master_seed, graph_cell_index, g)))?;
                let adjacency = Neighbourhoods::new(&graph);
                Ok((graph, adjacency))
            })
            .collect::<Result<Vec<_>, GraphError>>()?;

        for &kind in &cfg.scenarios {
            for &gamma in &cfg.gammas {
                let scenario = ContagionScenario::new(kind, cfg.tau, gamma / cfg.tau)?;
                let betas = graphs
                    .iter()
                    .map(|(graph, _)| cfg.model.vertex_betas(graph, &scenario))
                    .collect::<Result<Vec<_>, _>>()?;
                let records = (0..cfg.runs_per_cell())
                    .into_par_iter()
                    .map(|run| {
                        let g = run / cfg.runs_per_graph;
                        let (graph, adjacency) = &graphs[g];
                        let seed = run_seed(cfg.master_seed, cell_index, run);
                        let origin = cfg.origin.resolve(graph.n(), seed)?;
                        let outcome = run_sir_with_betas(graph, adjacency, &betas[g], origin, seed, cfg.max_steps)?;
                        Ok(record(cell, kind, gamma, run, seed, &outcome))
                    })
                    .collect::<Result<Vec<_>, SirError>>()?;
                for r in &records {
                    sink(r)?;
                    rows += 1;
                }
                cell_index += 1;
            }
        }
    }
    Ok(rows)
}

fn record(
    cell: &GraphCell,
    kind: ScenarioKind,
    gamma: f64,
    run: usize,
    seed: u64,
    outcome: &InfectionOutcome,
) -> ExperimentRecord {
    ExperimentRecord {
        n: cell.n,
        variant: cell.variant.to_string(),
        a1: cell.a1,
        a2: cell.a2,
        d: cell.metric.dim(),
        p: cell.metric.norm().to_string(),
        scenario: kind.to_string(),
        gamma,
        run,
        seed,
        origin: outcome.origin,
        attack_size: outcome.attack_size,
        duration: outcome.duration,
        longest_jump: outcome.longest_jump,
        max_displacement: outcome.max_displacement,
    }
}

/// Runs the grid and writes the experiments CSV, flushing after each row.
pub fn write_experiment<W: Write>(cfg: &ExperimentConfig, out: W) -> Result<usize, ExperimentError> {
    let mut writer = csv::WriterBuilder::new().has_headers(false).from_writer(out);
    writer.write_record(EXPERIMENT_HEADER.split(','))?;
    writer.flush()?;
    run_experiment(cfg, |r| {
        writer.serialize(r)?;
        writer.flush()?;
        Ok(())
    })
}

/// Runs the grid and collects the records.
pub fn collect_experiment(cfg: &ExperimentConfig) -> Result<Vec<ExperimentRecord>, ExperimentError> {
    let mut records = Vec::with_capacity(cfg.expected_rows());
    run_experiment(cfg, |r| {
        records.push(r.clone());
        Ok(())
    })?;
    Ok(records)
}

pub fn read_experiment<R: std::io::Read>(input: R) -> Result<Vec<ExperimentRecord>, ExperimentError> {
    let mut reader = csv::Reader::from_reader(input);
    Ok(reader.deserialize().collect::<Result<Vec<ExperimentRecord>, _>>()?)
}

/// Per-vertex infection detail: infected vertices in ascending order, with
/// the recorded infector and that tree edge's length (blank for the origin).
pub fn write_detail<W: Write>(graph: &SpaGraph, outcome: &InfectionOutcome, out: W) -> Result<(), ExperimentError> {
    let mut writer = csv::WriterBuilder::new().has_headers(false).from_writer(out);
    writer.write_record(DETAIL_HEADER.split(','))?;
    for v in 1..=graph.n() {
        let Some(time) = outcome.infection_time[v - 1] else { continue };
        let (infector, length) = match outcome.infector[v - 1] {
            Some(w) => (w.to_string(), graph.distance(w, v).to_string()),
            None => (String::new(), String::new()),
        };
        writer.write_record([v.to_string(), time.to_string(), infector, length])?;
    }
    writer.flush()?;
    Ok(())
}

/// One row of the bounds table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundRecord {
    pub n: f64,
    pub phi: f64,
    pub bound: f64,
    pub lambda: f64,
    pub m: f64,
    pub m1: f64,
    pub gamma: f64,
    pub phi_bound: f64,
    pub theta_bound: f64,
    /// `φ >= phi_bound`: the bound is not guaranteed to vanish.
    pub phi_exceeds_bound: bool,
}

/// Tabulates the long-edge bound over an `n` grid.
pub fn bound_table(ns: &[f64], a1: f64, a2: f64, gamma: f64, metric: &MetricConfig, phi: f64) -> Vec<BoundRecord> {
    let limit = phi_bound(a1, metric.dim());
    ns.iter()
        .map(|&n| {
            let b = BoundParams::evaluate(n, a1, a2, gamma, metric, phi);
            BoundRecord {
                n,
                phi,
                bound: b.bound,
                lambda: b.lambda,
                m: b.m,
                m1: b.m_1,
                gamma,
                phi_bound: limit,
                theta_bound: theta_bound(a1),
                phi_exceeds_bound: phi >= limit,
            }
        })
        .collect()
}

pub fn write_bounds<W: Write>(rows: &[BoundRecord], out: W) -> Result<(), ExperimentError> {
    let mut writer = csv::Writer::from_writer(out);
    for r in rows {
        writer.serialize(r)?;
    }
    writer.flush()?;
    Ok(())
}
