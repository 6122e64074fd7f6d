use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use relsched::graph::{self, GraphFormat};
use relsched::harness::{brute_force_oracle, run_pipeline, OracleLimits};
use relsched::schedule::{schedule_from_json, schedule_to_json};
use relsched::{
    classify, random_platform, run_sweep, schedule_reliability, validate, Algorithm, ExperimentConfig, FaConfig,
    GeneratorConfig, MertConfig, Mode, ParameterRanges, Platform64, ReliabilityMaxima, TaskGraph64,
    Workload,
};

#[derive(Parser)]
#[command(name = "relsched", version, about = "Reliability- and energy-aware DAG scheduling")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a generated workflow and a random platform.
    Generate(GenerateArgs),
    /// Schedule one workflow on one platform.
    Schedule(ScheduleArgs),
    /// Run the eta sweep protocol and write CSV reports.
    Sweep(SweepArgs),
    /// Compare a heuristic against exhaustive search on a tiny instance.
    Oracle(OracleArgs),
    /// Re-check a schedule file against its workflow and platform.
    Validate(ValidateArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    Fft,
    Ge,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    NonFt,
    Ft,
}

#[derive(Args)]
struct GenerateArgs {
    #[arg(long, value_enum, default_value = "fft")]
    workload: Kind,
    #[arg(long, default_value_t = 5)]
    rho: u32,
    #[arg(long, short = 'm', default_value_t = 32)]
    processors: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, default_value_t = 1.0)]
    ccr: f64,
    #[arg(long, default_value_t = 1e-4)]
    freq_step: f64,
    /// Workflow output; `.dot` selects DOT, anything else JSON.
    #[arg(long)]
    graph: PathBuf,
    #[arg(long)]
    platform: Option<PathBuf>,
}

#[derive(Args)]
struct Constraint {
    /// Absolute reliability constraint.
    #[arg(long, conflicts_with = "eta")]
    r_req: Option<f64>,
    /// Constraint as a multiple of the best single-replica reliability.
    #[arg(long)]
    eta: Option<f64>,
}

impl Constraint {
    fn resolve(&self, graph: &TaskGraph64, platform: &Platform64) -> Result<f64> {
        match (self.r_req, self.eta) {
            (Some(r), _) => Ok(r),
            (None, Some(eta)) => Ok((eta * ReliabilityMaxima::compute(graph, platform).non_ft()).min(1.0)),
            (None, None) => bail!("pass --r-req or --eta"),
        }
    }
}

#[derive(Args)]
struct FaArgs {
    #[arg(long, default_value_t = 1e-5)]
    zeta: f64,
    /// Override the platform's frequency grid step.
    #[arg(long)]
    freq_step: Option<f64>,
    #[arg(long)]
    max_fa_iters: Option<usize>,
}

impl FaArgs {
    fn config(&self) -> FaConfig {
        FaConfig {
            zeta: self.zeta,
            max_iterations: self.max_fa_iters,
        }
    }
}

#[derive(Args)]
struct ScheduleArgs {
    #[arg(long)]
    graph: PathBuf,
    #[arg(long)]
    platform: PathBuf,
    #[command(flatten)]
    constraint: Constraint,
    #[arg(long, default_value = "mert")]
    algo: Algorithm,
    #[arg(long, default_value_t = 0.5)]
    alpha: f64,
    #[arg(long, default_value_t = 0)]
    ell: usize,
    /// Keep every replica at maximum frequency.
    #[arg(long)]
    no_fa: bool,
    #[command(flatten)]
    fa: FaArgs,
    /// Schedule JSON output; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// FA iteration trace CSV.
    #[arg(long)]
    trace: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    /// TOML experiment config; flags below override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, value_enum)]
    mode: Option<ModeArg>,
    #[arg(long, value_enum)]
    workload: Option<Kind>,
    #[arg(long)]
    rho: Option<u32>,
    /// Workflow file used for every instance instead of a generator.
    #[arg(long, conflicts_with_all = ["workload", "rho"])]
    graph: Option<PathBuf>,
    #[arg(long, short = 'm')]
    processors: Option<usize>,
    #[arg(long)]
    instances: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, value_delimiter = ',')]
    etas: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',')]
    algo: Option<Vec<Algorithm>>,
    #[arg(long, value_delimiter = ',')]
    alpha_grid: Option<Vec<f64>>,
    /// Fractions of the task count, rounded up.
    #[arg(long, value_delimiter = ',')]
    ell_grid: Option<Vec<f64>>,
    #[arg(long)]
    no_fa: bool,
    #[arg(long)]
    zeta: Option<f64>,
    #[arg(long)]
    freq_step: Option<f64>,
    #[arg(long)]
    max_fa_iters: Option<usize>,
    /// Row CSV output; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    aggregates: Option<PathBuf>,
    /// Wall-clock timings, kept out of the row CSV.
    #[arg(long)]
    timings: Option<PathBuf>,
}

#[derive(Args)]
struct OracleArgs {
    #[arg(long)]
    graph: PathBuf,
    #[arg(long)]
    platform: PathBuf,
    #[command(flatten)]
    constraint: Constraint,
    #[arg(long, default_value = "eafts")]
    algo: Algorithm,
    #[command(flatten)]
    fa: FaArgs,
}

#[derive(Args)]
struct ValidateArgs {
    #[arg(long)]
    graph: PathBuf,
    #[arg(long)]
    platform: PathBuf,
    #[arg(long)]
    schedule: PathBuf,
    /// Also require reliability at or above this value.
    #[arg(long)]
    r_req: Option<f64>,
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn write_or_stdout(path: Option<&Path>, f: impl FnOnce(&mut dyn Write) -> relsched::Result<()>) -> Result<()> {
    match path {
        Some(p) => {
            let mut file = io::BufWriter::new(fs::File::create(p).with_context(|| format!("creating {}", p.display()))?);
            f(&mut file)?;
            file.flush()?;
        }
        None => f(&mut io::stdout().lock())?,
    }
    Ok(())
}

fn load_graph(path: &Path) -> Result<TaskGraph64> {
    graph::load(path, GraphFormat::from_path(path)).with_context(|| format!("loading workflow {}", path.display()))
}

fn load_platform(path: &Path, freq_step: Option<f64>) -> Result<Platform64> {
    let mut p: Platform64 =
        serde_json::from_str(&read(path)?).with_context(|| format!("parsing platform {}", path.display()))?;
    if let Some(step) = freq_step {
        p.frequency_step = step;
    }
    p.validate()?;
    Ok(p)
}

fn generate(a: GenerateArgs) -> Result<()> {
    let cfg = GeneratorConfig {
        num_processors: a.processors,
        seed: a.seed,
        ccr: a.ccr,
        ..Default::default()
    };
    let g: TaskGraph64 = match a.workload {
        Kind::Fft => relsched::generate_fft(a.rho, &cfg)?,
        Kind::Ge => relsched::generate_ge(a.rho, &cfg)?,
    };
    graph::save(&g, &a.graph, GraphFormat::from_path(&a.graph))?;
    eprintln!("{} tasks ({} real), {} edges", g.len(), g.real_task_count(), g.edges().len());
    if let Some(path) = a.platform {
        let ranges = ParameterRanges {
            frequency_step: a.freq_step,
            ..Default::default()
        };
        let p: Platform64 = random_platform(a.processors, &ranges, a.seed)?;
        fs::write(&path, serde_json::to_string_pretty(&p)?)?;
    }
    Ok(())
}

fn schedule(a: ScheduleArgs) -> Result<()> {
    let g = load_graph(&a.graph)?;
    let p = load_platform(&a.platform, a.fa.freq_step)?;
    let r_req = a.constraint.resolve(&g, &p)?;
    let scenario = classify(&g, &p, r_req);
    eprintln!("r_req {r_req}: {scenario:?}");
    let fa_cfg = a.fa.config();
    let res = run_pipeline(
        a.algo,
        &g,
        &p,
        r_req,
        &MertConfig::new(a.alpha, a.ell),
        (!a.no_fa).then_some(&fa_cfg),
    )?;
    eprintln!(
        "makespan {} energy {} (before FA {}) reliability {}",
        res.makespan,
        res.energy,
        res.energy_before_fa,
        res.log_reliability.exp()
    );
    if let Some(rep) = &res.fa {
        eprintln!("FA: {} iterations, stop {:?}", rep.iterations, rep.stop);
        if let Some(path) = &a.trace {
            rep.write_trace_csv(fs::File::create(path)?)?;
        }
    }
    let json = schedule_to_json(&res.schedule, &g, &p)?;
    write_or_stdout(a.out.as_deref(), |w| Ok(writeln!(w, "{json}")?))
}

fn sweep(a: SweepArgs) -> Result<()> {
    let mut cfg: ExperimentConfig = match &a.config {
        Some(path) => toml::from_str(&read(path)?).with_context(|| format!("parsing {}", path.display()))?,
        None => ExperimentConfig::default(),
    };
    if let Some(m) = a.mode {
        cfg.mode = match m {
            ModeArg::NonFt => Mode::NonFt,
            ModeArg::Ft => Mode::Ft,
        };
    }
    if let Some(path) = a.graph {
        cfg.workload = Workload::File { path };
    } else if a.workload.is_some() || a.rho.is_some() {
        let rho = a.rho.unwrap_or(match cfg.workload {
            Workload::Fft { rho } | Workload::Ge { rho } => rho,
            Workload::File { .. } => 5,
        });
        cfg.workload = match a.workload.unwrap_or(match cfg.workload {
            Workload::Ge { .. } => Kind::Ge,
            _ => Kind::Fft,
        }) {
            Kind::Fft => Workload::Fft { rho },
            Kind::Ge => Workload::Ge { rho },
        };
    }
    if let Some(v) = a.processors {
        cfg.processors = v;
    }
    if let Some(v) = a.instances {
        cfg.instances = v;
    }
    if let Some(v) = a.seed {
        cfg.seed = v;
    }
    if a.etas.is_some() {
        cfg.etas = a.etas;
    }
    if a.algo.is_some() {
        cfg.algorithms = a.algo;
    }
    if let Some(v) = a.alpha_grid {
        cfg.mert_grid.alphas = v;
    }
    if let Some(v) = a.ell_grid {
        cfg.mert_grid.ell_fractions = v;
    }
    if a.no_fa {
        cfg.frequency_allocation = false;
    }
    if let Some(v) = a.zeta {
        cfg.fa.zeta = v;
    }
    if let Some(v) = a.freq_step {
        cfg.ranges.frequency_step = v;
    }
    if a.max_fa_iters.is_some() {
        cfg.fa.max_iterations = a.max_fa_iters;
    }

    let report = run_sweep(&cfg)?;
    if let Some(rs) = &report.resampling {
        eprintln!(
            "eta_max {}: kept {} of {} fresh instances{}",
            rs.eta_max,
            rs.kept,
            rs.attempts,
            if rs.exhausted { " (attempt limit reached)" } else { "" }
        );
    }
    if !report.energy_drops.is_empty() {
        eprintln!("{} cases where a larger eta ended with less energy", report.energy_drops.len());
    }
    if !report.skipped.is_empty() {
        eprintln!("{} runs skipped as inapplicable", report.skipped.len());
    }
    write_or_stdout(a.out.as_deref(), |w| report.write_csv(w))?;
    if let Some(p) = &a.aggregates {
        report.write_aggregates(fs::File::create(p)?)?;
    }
    if let Some(p) = &a.timings {
        report.write_timings(fs::File::create(p)?)?;
    }
    Ok(())
}

fn oracle(a: OracleArgs) -> Result<()> {
    let g = load_graph(&a.graph)?;
    let p = load_platform(&a.platform, a.fa.freq_step)?;
    let r_req = a.constraint.resolve(&g, &p)?;
    let opt = brute_force_oracle(&g, &p, r_req, &OracleLimits::default())?;
    let fa_cfg = a.fa.config();
    let heur = run_pipeline(a.algo, &g, &p, r_req, &MertConfig::default(), Some(&fa_cfg));
    match opt.energy {
        Some(e) => println!("oracle: feasible, energy {e}"),
        None => println!("oracle: infeasible (best reliability {})", opt.log_max.exp()),
    }
    match heur {
        Ok(h) => {
            let ratio = opt.energy.map(|e| h.energy / e);
            println!(
                "{}+fa: energy {} reliability {}{}",
                a.algo,
                h.energy,
                h.log_reliability.exp(),
                ratio.map(|r| format!(" ratio {r:.4}")).unwrap_or_default()
            );
        }
        Err(e) => println!("{}: {e}", a.algo),
    }
    Ok(())
}

fn validate_cmd(a: ValidateArgs) -> Result<()> {
    let g = load_graph(&a.graph)?;
    let p = load_platform(&a.platform, None)?;
    let s = schedule_from_json(&read(&a.schedule)?)?;
    validate(&s, &g, &p)?;
    let r = schedule_reliability(&s, &g, &p)?;
    if let Some(req) = a.r_req {
        if r < req {
            bail!("reliability {r} is below {req}");
        }
    }
    println!("valid: makespan {} reliability {r}", relsched::makespan(&s));
    Ok(())
}

fn main() -> Result<()> {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match Cli::parse().command {
        Command::Generate(a) => generate(a),
        Command::Schedule(a) => schedule(a),
        Command::Sweep(a) => sweep(a),
        Command::Oracle(a) => oracle(a),
        Command::Validate(a) => validate_cmd(a),
    }
}
