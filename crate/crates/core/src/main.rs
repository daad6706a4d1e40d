use std::fs::{self, File};
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use spa_epidemic::analysis::phi_bound;
use spa_epidemic::config::{ConfigError, ExperimentConfig, RawConfig, Scalar};
use spa_epidemic::contagion::ContagionScenario;
use spa_epidemic::edgelist::{read_edge_list, write_edge_list, EdgeListError};
use spa_epidemic::experiment::{bound_table, run_seed, write_bounds, write_detail, write_experiment, ExperimentError};
use spa_epidemic::generator::{generate, SpaGraph, SpaParams};
use spa_epidemic::sir::{run_sir_with_model, InfectionConfig};
use spa_epidemic::verify::{run_checks, Level};

#[derive(Parser)]
#[command(name = "spa-sir", version, about = "SIR contagion on spatial preferential attachment graphs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    overrides: Overrides,
}

#[derive(Subcommand)]
enum Command {
    /// Generate one graph (first value of each grid list) and write its edge list.
    Generate,
    /// Run one infection and write per-vertex detail.
    Infect {
        /// Read the graph from an edge-list file instead of generating it.
        #[arg(long)]
        graph: Option<PathBuf>,
        /// Run index, used to derive the infection seed.
        #[arg(long, default_value_t = 0)]
        run: usize,
    },
    /// Run the whole grid and write experiments.csv.
    Experiment,
    /// Tabulate the long-edge bound over `bounds.n` and write bounds.csv.
    Bounds,
    /// Run the invariant and oracle checks.
    Verify {
        #[arg(long, value_enum, default_value_t = VerifyLevel::Fast)]
        level: VerifyLevel,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum VerifyLevel {
    Fast,
    Full,
}

/// Flags mirroring the config keys; each one overrides the file.
#[derive(Args)]
struct Overrides {
    /// Config file of `section.key = value` lines.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Master seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_delimiter = ',')]
    n: Option<Vec<i64>>,
    #[arg(long, global = true, value_delimiter = ',')]
    a1: Option<Vec<f64>>,
    #[arg(long, global = true, value_delimiter = ',')]
    a2: Option<Vec<f64>>,
    #[arg(long, global = true, value_delimiter = ',')]
    d: Option<Vec<i64>>,
    /// Norm exponents: a number >= 1 or `inf`.
    #[arg(long, global = true, value_delimiter = ',')]
    p: Option<Vec<String>>,
    /// `original` or `modified`.
    #[arg(long, global = true, value_delimiter = ',')]
    variant: Option<Vec<String>>,
    /// `A` and/or `B`.
    #[arg(long, global = true, value_delimiter = ',')]
    scenarios: Option<Vec<String>>,
    #[arg(long, global = true, value_delimiter = ',')]
    gamma: Option<Vec<f64>>,
    #[arg(long, global = true)]
    tau: Option<f64>,
    /// `oldest`, `random` or a vertex index.
    #[arg(long, global = true)]
    origin: Option<String>,
    #[arg(long, global = true)]
    runs: Option<i64>,
    #[arg(long, global = true)]
    graphs_per_cell: Option<i64>,
    #[arg(long, global = true)]
    max_steps: Option<i64>,
    /// `closed` or `exact`.
    #[arg(long, global = true)]
    expected_degree: Option<String>,
    /// `asymptotic` or `empirical`.
    #[arg(long, global = true)]
    mean_degree: Option<String>,
    #[arg(long, global = true)]
    degree_floor: Option<f64>,
    #[arg(long, global = true, value_delimiter = ',')]
    bounds_n: Option<Vec<f64>>,
    #[arg(long, global = true)]
    phi: Option<f64>,
    #[arg(long, global = true)]
    bounds_gamma: Option<f64>,
}

impl Overrides {
    fn resolve(&self) -> Result<ExperimentConfig, ConfigError> {
        let mut raw = match &self.config {
            Some(path) => RawConfig::load(path)?,
            None => RawConfig::default(),
        };
        fn set<T: Clone>(slot: &mut Option<T>, value: &Option<T>) {
            if value.is_some() {
                slot.clone_from(value);
            }
        }
        set(&mut raw.seed.master, &self.seed);
        set(&mut raw.output.dir, &self.out);
        set(&mut raw.spa.n, &self.n);
        set(&mut raw.spa.a1, &self.a1);
        set(&mut raw.spa.a2, &self.a2);
        set(&mut raw.spa.d, &self.d);
        set(&mut raw.spa.p, &self.p.as_ref().map(|p| p.iter().cloned().map(Scalar::Text).collect()));
        set(&mut raw.spa.variant, &self.variant);
        set(&mut raw.infection.scenarios, &self.scenarios);
        set(&mut raw.infection.gamma, &self.gamma);
        set(&mut raw.infection.tau, &self.tau);
        set(&mut raw.infection.origin, &self.origin.clone().map(Scalar::Text));
        set(&mut raw.infection.runs, &self.runs);
        set(&mut raw.infection.graphs_per_cell, &self.graphs_per_cell);
        set(&mut raw.infection.max_steps, &self.max_steps);
        set(&mut raw.contagion.expected_degree, &self.expected_degree);
        set(&mut raw.contagion.mean_degree, &self.mean_degree);
        set(&mut raw.contagion.degree_floor, &self.degree_floor);
        set(&mut raw.bounds.n, &self.bounds_n);
        set(&mut raw.bounds.phi, &self.phi);
        set(&mut raw.bounds.gamma, &self.bounds_gamma);
        ExperimentConfig::resolve(raw)
    }
}

enum Failure {
    Verification(String),
    Config(String),
    Io(String),
}

impl Failure {
    fn io(path: &Path, err: impl std::fmt::Display) -> Self {
        Failure::Io(format!("{}: {err}", path.display()))
    }

    fn experiment(path: &Path, err: ExperimentError) -> Self {
        match err {
            ExperimentError::Io(_) | ExperimentError::Csv(_) => Failure::io(path, err),
            other => Failure::Config(other.to_string()),
        }
    }
}

impl From<ConfigError> for Failure {
    fn from(err: ConfigError) -> Self {
        Failure::Config(err.to_string())
    }
}

fn create(path: &Path) -> Result<BufWriter<File>, Failure> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| Failure::io(dir, e))?;
    }
    File::create(path).map(BufWriter::new).map_err(|e| Failure::io(path, e))
}

/// The graph described by the first value of every grid list, seeded with
/// the master seed itself.
fn first_graph(cfg: &ExperimentConfig) -> Result<SpaGraph, Failure> {
    let cell = cfg.grid.cells().into_iter().next().expect("grid lists are non-empty");
    let params = SpaParams {
        a1: cell.a1,
        a2: cell.a2,
        n: cell.n,
        metric: cell.metric,
        variant: cell.variant,
        seed: cfg.master_seed,
    };
    generate(&params).map_err(|e| Failure::Config(e.to_string()))
}

fn save_graph(graph: &SpaGraph, path: &Path) -> Result<(), Failure> {
    let mut out = create(path)?;
    write_edge_list(graph, &mut out).and_then(|_| out.flush()).map_err(|e| Failure::io(path, e))
}

fn cmd_generate(cfg: &ExperimentConfig) -> Result<(), Failure> {
    let graph = first_graph(cfg)?;
    let path = cfg.output_dir.join("graph.txt");
    save_graph(&graph, &path)?;
    println!(
        "n={} edges={} mean_in_degree={:.4} file={}",
        graph.n(),
        graph.edges().len(),
        graph.mean_in_degree(),
        path.display()
    );
    Ok(())
}

fn cmd_infect(cfg: &ExperimentConfig, graph_file: Option<&Path>, run: usize) -> Result<(), Failure> {
    let graph = match graph_file {
        Some(path) => {
            let file = File::open(path).map_err(|e| Failure::io(path, e))?;
            read_edge_list(BufReader::new(file)).map_err(|e| match e {
                EdgeListError::Io(e) => Failure::io(path, e),
                other => Failure::Config(format!("{}: {other}", path.display())),
            })?
        }
        None => {
            let graph = first_graph(cfg)?;
            save_graph(&graph, &cfg.output_dir.join("graph.txt"))?;
            graph
        }
    };
    let kind = cfg.scenarios[0];
    let gamma = cfg.gammas[0];
    let scenario = ContagionScenario::new(kind, cfg.tau, gamma / cfg.tau).map_err(|e| Failure::Config(e.to_string()))?;
    let seed = run_seed(cfg.master_seed, 0, run);
    let config = InfectionConfig { origin: cfg.origin, scenario, seed, max_steps: cfg.max_steps };
    let outcome = run_sir_with_model(&graph, &config, &cfg.model).map_err(|e| Failure::Config(e.to_string()))?;

    let run_id = format!("{kind}-gamma{gamma}-run{run}");
    let path = cfg.output_dir.join("infections").join(format!("{run_id}.csv"));
    let mut out = create(&path)?;
    write_detail(&graph, &outcome, &mut out).map_err(|e| Failure::experiment(&path, e))?;
    out.flush().map_err(|e| Failure::io(&path, e))?;
    println!(
        "origin={} attack_size={} duration={} longest_jump={} max_displacement={} truncated={} file={}",
        outcome.origin,
        outcome.attack_size,
        outcome.duration,
        outcome.longest_jump,
        outcome.max_displacement,
        outcome.truncated,
        path.display()
    );
    Ok(())
}

fn cmd_experiment(cfg: &ExperimentConfig) -> Result<(), Failure> {
    let path = cfg.output_dir.join("experiments.csv");
    let out = create(&path)?;
    let rows = write_experiment(cfg, out).map_err(|e| Failure::experiment(&path, e))?;
    println!("rows={rows} file={}", path.display());
    Ok(())
}

fn cmd_bounds(cfg: &ExperimentConfig) -> Result<(), Failure> {
    let cell = cfg.grid.cells().into_iter().next().expect("grid lists are non-empty");
    let d = cell.metric.dim();
    let phi = cfg.bound_phi(cell.a1, d);
    if phi >= phi_bound(cell.a1, d) {
        eprintln!("warning: phi={phi} is not below {}; the bound need not vanish", phi_bound(cell.a1, d));
    }
    let rows = bound_table(&cfg.bounds.n, cell.a1, cell.a2, cfg.bounds.gamma, &cell.metric, phi);
    let path = cfg.output_dir.join("bounds.csv");
    let mut out = create(&path)?;
    write_bounds(&rows, &mut out).map_err(|e| Failure::experiment(&path, e))?;
    out.flush().map_err(|e| Failure::io(&path, e))?;
    println!("rows={} file={}", rows.len(), path.display());
    Ok(())
}

fn cmd_verify(cfg: &ExperimentConfig, level: VerifyLevel) -> Result<(), Failure> {
    let level = match level {
        VerifyLevel::Fast => Level::Fast,
        VerifyLevel::Full => Level::Full,
    };
    let reports = run_checks(level, cfg.master_seed);
    let mut stdout = io::stdout().lock();
    for r in &reports {
        let _ = writeln!(stdout, "{r}");
    }
    let failed = reports.iter().filter(|r| !r.passed).count();
    if failed == 0 {
        Ok(())
    } else {
        Err(Failure::Verification(format!("{failed} of {} checks failed", reports.len())))
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    let cfg = cli.overrides.resolve()?;
    match cli.command {
        Command::Generate => cmd_generate(&cfg),
        Command::Infect { graph, run } => cmd_infect(&cfg, graph.as_deref(), run),
        Command::Experiment => cmd_experiment(&cfg),
        Command::Bounds => cmd_bounds(&cfg),
        Command::Verify { level } => cmd_verify(&cfg, level),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Verification(msg)) => {
            eprintln!("verification failed: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Config(msg)) => {
            eprintln!("configuration error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Io(msg)) => {
            eprintln!("I/O error: {msg}");
            ExitCode::from(3)
        }
    }
}
