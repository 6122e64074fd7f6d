//! Seeded experiment sweeps over the reliability scaling factor `eta`.
//!
//! Each instance draws a workflow and a platform from per-instance seeds;
//! the constraint for a run is `r_req = eta * R_max(non-ft)`. Rows are
//! ordered by instance, then `eta`, then algorithm, independent of thread
//! scheduling. Wall-clock timings are kept apart from the rows so the main
//! CSV is reproducible byte for byte.

mod compare;
mod oracle;

use std::io::Write;
use std::path::PathBuf;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::frequency::{fa, FaConfig, FaReport};
use crate::graph::{generate_fft, generate_ge, load, GeneratorConfig, GraphFormat, TaskGraph};
use crate::platform::{random_platform, ParameterRanges, Platform};
use crate::scalar::Real;
use crate::schedule::{
    makespan, schedule_energy, schedule_log_reliability, validate, ConstraintScenario, ReliabilityMaxima, Schedule,
};
use crate::schedulers::{AllocationResult, Algorithm, MertConfig, MertGrid};

pub use compare::{compare_rule, Outcome, Selection};
pub use oracle::{brute_force_oracle, OracleLimits, OracleResult};

/// Version of the row CSV layout, written in its first column.
pub const CSV_SCHEMA: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Workload {
    Fft { rho: u32 },
    Ge { rho: u32 },
    /// A fixed workflow file; only the platform varies per instance.
    File { path: PathBuf },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    NonFt,
    Ft,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub workload: Workload,
    pub processors: usize,
    pub ranges: ParameterRanges,
    pub wcet_min: u32,
    pub wcet_max: u32,
    pub ccr: f64,
    pub seed: u64,
    pub instances: usize,
    pub mode: Mode,
    /// Overrides the mode's default `eta` grid.
    pub etas: Option<Vec<f64>>,
    /// Defaults to MERT and MR in non-ft mode, EAFTS, RR and MaxRe in ft mode.
    pub algorithms: Option<Vec<Algorithm>>,
    /// MERT family evaluated per run; the comparison rule picks one member.
    pub mert_grid: MertGrid,
    pub frequency_allocation: bool,
    pub fa: FaConfig,
    /// Fresh instances tried when collecting ft instances that reach `eta_max`.
    pub max_resample_attempts: usize,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            workload: Workload::Fft { rho: 5 },
            processors: 32,
            ranges: ParameterRanges::default(),
            wcet_min: 10,
            wcet_max: 100,
            ccr: 1.0,
            seed: 1,
            instances: 30,
            mode: Mode::NonFt,
            etas: None,
            algorithms: None,
            mert_grid: MertGrid::default(),
            frequency_allocation: true,
            fa: FaConfig::default(),
            max_resample_attempts: 1000,
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.instances == 0 {
            return Err(Error::InvalidParameter("instance count must be >= 1".into()));
        }
        if self.processors == 0 {
            return Err(Error::InvalidParameter("processor count must be >= 1".into()));
        }
        if let Some(etas) = &self.etas {
            if etas.is_empty() || etas.iter().any(|e| !(e.is_finite() && *e >= 0.0)) {
                return Err(Error::InvalidParameter("eta list must be non-empty and non-negative".into()));
            }
        }
        if self.mert_grid.alphas.is_empty() || self.mert_grid.ell_fractions.is_empty() {
            return Err(Error::InvalidParameter("MERT grid must be non-empty".into()));
        }
        Ok(())
    }

    pub fn algorithms(&self) -> Vec<Algorithm> {
        match (&self.algorithms, self.mode) {
            (Some(a), _) => a.clone(),
            (None, Mode::NonFt) => vec![Algorithm::Mert, Algorithm::Mr],
            (None, Mode::Ft) => vec![Algorithm::Eafts, Algorithm::Rr, Algorithm::MaxRe],
        }
    }

    fn generator(&self, seed: u64) -> GeneratorConfig {
        GeneratorConfig {
            num_processors: self.processors,
            seed,
            wcet_min: self.wcet_min,
            wcet_max: self.wcet_max,
            ccr: self.ccr,
        }
    }

    /// Graph and platform for draw `index`.
    pub fn instance(&self, index: usize) -> Result<Instance> {
        let seed = derive_seed(self.seed, 0, index as u64);
        let graph = match &self.workload {
            Workload::Fft { rho } => generate_fft(*rho, &self.generator(derive_seed(seed, 1, 0)))?,
            Workload::Ge { rho } => generate_ge(*rho, &self.generator(derive_seed(seed, 1, 0)))?,
            Workload::File { path } => load(path, GraphFormat::from_path(path))?,
        };
        if graph.num_processors() != self.processors {
            return Err(Error::InvalidParameter(format!(
                "workflow has costs for {} processors, config asks for {}",
                graph.num_processors(),
                self.processors
            )));
        }
        let platform = random_platform(self.processors, &self.ranges, derive_seed(seed, 2, 0))?;
        let maxima = ReliabilityMaxima::compute(&graph, &platform);
        Ok(Instance {
            index,
            seed,
            graph,
            platform,
            maxima,
        })
    }
}

/// Independent 64-bit seed for `(stream, index)` under `base`.
pub fn derive_seed(base: u64, stream: u64, index: u64) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(base);
    rng.set_stream(stream);
    rng.set_word_pos(u128::from(index) * 2);
    rng.gen()
}

/// `0.90..=0.99` step `0.01`, then `0.991..=0.999` step `0.001`.
pub fn non_ft_etas() -> Vec<f64> {
    (90..=99)
        .map(|k| f64::from(k) / 100.0)
        .chain((991..=999).map(|k| f64::from(k) / 1000.0))
        .collect()
}

/// `1.001, 1.002, ...` up to and including `eta_max` (within `1e-9`).
pub fn ft_etas(eta_max: f64) -> Vec<f64> {
    (1001..)
        .map(|k| f64::from(k) / 1000.0)
        .take_while(|&e| e <= eta_max + 1e-9)
        .collect()
}

pub struct Instance {
    pub index: usize,
    pub seed: u64,
    pub graph: TaskGraph<f64>,
    pub platform: Platform<f64>,
    pub maxima: ReliabilityMaxima<f64>,
}

impl Instance {
    pub fn r_req(&self, eta: f64) -> f64 {
        (eta * self.maxima.non_ft()).min(1.0)
    }

    pub fn scenario(&self, eta: f64) -> ConstraintScenario {
        self.maxima.classify(self.r_req(eta))
    }

    /// Largest grid `eta > 1` that is still fault-tolerant feasible, or 1.
    pub fn eta_max(&self) -> f64 {
        let mut best = 1.0;
        for k in 1001..=2000u32 {
            let eta = f64::from(k) / 1000.0;
            if self.scenario(eta) != ConstraintScenario::FaultTolerant {
                break;
            }
            best = eta;
        }
        best
    }
}

/// One allocation followed by optional frequency allocation.
#[derive(Clone, Debug)]
pub struct PipelineResult<T> {
    pub allocation: AllocationResult<T>,
    pub schedule: Schedule<T>,
    pub fa: Option<FaReport<T>>,
    pub makespan: T,
    pub energy: T,
    pub energy_before_fa: T,
    pub log_reliability: T,
}

/// Allocates, validates, runs FA when the allocation meets `r_req`, and
/// validates again.
pub fn run_pipeline<T: Real>(
    algorithm: Algorithm,
    graph: &TaskGraph<T>,
    platform: &Platform<T>,
    r_req: T,
    mert: &MertConfig,
    fa_config: Option<&FaConfig>,
) -> Result<PipelineResult<T>> {
    let allocation = algorithm.allocate(graph, platform, r_req, mert)?;
    validate(&allocation.schedule, graph, platform)?;
    let energy_before_fa = schedule_energy(&allocation.schedule, graph, platform);
    let log_alloc = schedule_log_reliability(&allocation.schedule, graph, platform)?;
    let meets = log_alloc >= r_req.ln() - T::log_slack() * T::from_count(graph.len());
    let (schedule, report) = match fa_config {
        Some(cfg) if meets => {
            let (s, r) = fa(&allocation.schedule, graph, platform, r_req, cfg)?;
            validate(&s, graph, platform)?;
            (s, Some(r))
        }
        _ => (allocation.schedule.clone(), None),
    };
    Ok(PipelineResult {
        makespan: makespan(&schedule),
        energy: schedule_energy(&schedule, graph, platform),
        log_reliability: schedule_log_reliability(&schedule, graph, platform)?,
        energy_before_fa,
        allocation,
        schedule,
        fa: report,
    })
}

/// One record per instance, `eta` and algorithm.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Row {
    pub schema: u32,
    pub instance: usize,
    pub seed: u64,
    pub eta: f64,
    pub r_req: f64,
    pub scenario: ConstraintScenario,
    pub algorithm: String,
    pub alpha: Option<f64>,
    pub ell: Option<usize>,
    /// The comparison rule found no member at or below the baseline energy.
    pub fallback: bool,
    pub makespan: f64,
    pub energy: f64,
    pub energy_before_fa: f64,
    pub reliability: f64,
    pub log_reliability: f64,
    pub meets_constraint: bool,
    pub replicas: usize,
    pub fa_iterations: usize,
    pub fa_stop: String,
    pub fa_safety_violations: usize,
    pub guard_hits: usize,
    pub unmet_targets: usize,
    pub empty_candidate_sets: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TimingRow {
    pub instance: usize,
    pub eta: f64,
    pub algorithm: String,
    pub runtime_ms: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AggregateRow {
    pub eta: f64,
    pub algorithm: String,
    pub instances: usize,
    pub makespan: f64,
    pub energy: f64,
    pub reliability: f64,
    pub replicas: f64,
    pub constraint_met: usize,
}

/// A later (larger) `eta` that ended with strictly less energy.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EnergyDrop {
    pub instance: usize,
    pub algorithm: String,
    pub eta_low: f64,
    pub eta_high: f64,
    pub energy_low: f64,
    pub energy_high: f64,
}

/// Outcome of collecting fault-tolerant instances.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Resampling {
    pub eta_max: f64,
    /// Instances used to pick `eta_max`; zero when `etas` was given.
    pub pilot: usize,
    pub attempts: usize,
    pub rejected: usize,
    pub kept: usize,
    /// The attempt limit ran out before enough instances were found.
    pub exhausted: bool,
}

#[derive(Clone, Debug, Default)]
pub struct ExperimentReport {
    pub rows: Vec<Row>,
    pub timings: Vec<TimingRow>,
    pub aggregates: Vec<AggregateRow>,
    pub energy_drops: Vec<EnergyDrop>,
    pub resampling: Option<Resampling>,
    /// `(instance, eta, algorithm)` runs skipped because the algorithm does
    /// not apply in the instance's setting.
    pub skipped: Vec<(usize, f64, String)>,
}

fn write_rows<W: Write, S: Serialize>(out: W, rows: &[S]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

impl ExperimentReport {
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        write_rows(out, &self.rows)
    }

    pub fn write_aggregates<W: Write>(&self, out: W) -> Result<()> {
        write_rows(out, &self.aggregates)
    }

    pub fn write_timings<W: Write>(&self, out: W) -> Result<()> {
        write_rows(out, &self.timings)
    }

    pub fn guard_hits(&self) -> usize {
        self.rows.iter().map(|r| r.guard_hits).sum()
    }
}

fn fa_columns(p: &PipelineResult<f64>) -> (usize, String, usize) {
    match &p.fa {
        Some(r) => (
            r.iterations,
            serde_json::to_value(r.stop)
                .ok()
                .and_then(|v| v.as_str().map(str::to_owned))
                .unwrap_or_default(),
            r.safety_violations,
        ),
        None => (0, "skipped".into(), 0),
    }
}

fn make_row(inst: &Instance, eta: f64, label: &str, p: &PipelineResult<f64>, mert: Option<(MertConfig, bool)>) -> Row {
    let r_req = inst.r_req(eta);
    let (fa_iterations, fa_stop, fa_safety_violations) = fa_columns(p);
    let d = &p.allocation.diagnostics;
    Row {
        schema: CSV_SCHEMA,
        instance: inst.index,
        seed: inst.seed,
        eta,
        r_req,
        scenario: inst.scenario(eta),
        algorithm: label.to_owned(),
        alpha: mert.map(|(c, _)| c.alpha),
        ell: mert.map(|(c, _)| c.ell),
        fallback: mert.is_some_and(|(_, f)| f),
        makespan: p.makespan,
        energy: p.energy,
        energy_before_fa: p.energy_before_fa,
        reliability: p.log_reliability.exp(),
        log_reliability: p.log_reliability,
        meets_constraint: p.log_reliability >= r_req.ln() - 1e-9,
        replicas: p.schedule.real_replica_count(),
        fa_iterations,
        fa_stop,
        fa_safety_violations,
        guard_hits: d.guard.total(),
        unmet_targets: d.unmet_targets,
        empty_candidate_sets: d.empty_candidate_sets,
    }
}

struct RunOutput {
    rows: Vec<Row>,
    timings: Vec<TimingRow>,
    skipped: Vec<(usize, f64, String)>,
}

fn label(a: Algorithm, fa: bool) -> String {
    if fa {
        format!("{a}+fa")
    } else {
        a.to_string()
    }
}

fn run_point(cfg: &ExperimentConfig, inst: &Instance, eta: f64, algorithms: &[Algorithm]) -> Result<RunOutput> {
    let r_req = inst.r_req(eta);
    let fa_cfg = cfg.frequency_allocation.then_some(&cfg.fa);
    let mut out = RunOutput {
        rows: Vec::new(),
        timings: Vec::new(),
        skipped: Vec::new(),
    };
    let mut baselines: Vec<Outcome<f64>> = Vec::new();
    let mut pending_mert = None;
    for &a in algorithms {
        let name = label(a, fa_cfg.is_some());
        let start = Instant::now();
        if a == Algorithm::Mert {
            let mut family = Vec::new();
            for mc in cfg.mert_grid.configs(inst.graph.len()) {
                match run_pipeline(a, &inst.graph, &inst.platform, r_req, &mc, fa_cfg) {
                    Ok(p) => family.push((mc, p)),
                    Err(Error::Scenario { .. }) => break,
                    Err(e) => return Err(e),
                }
            }
            record_time(&mut out, inst, eta, &name, start);
            if family.is_empty() {
                out.skipped.push((inst.index, eta, name));
            } else {
                pending_mert = Some((out.rows.len(), name, family));
            }
            continue;
        }
        match run_pipeline(a, &inst.graph, &inst.platform, r_req, &MertConfig::default(), fa_cfg) {
            Ok(p) => {
                record_time(&mut out, inst, eta, &name, start);
                if a == Algorithm::Mr {
                    baselines.push(Outcome {
                        energy: p.energy,
                        makespan: p.makespan,
                    });
                }
                out.rows.push(make_row(inst, eta, &name, &p, None));
            }
            Err(Error::Scenario { .. }) => out.skipped.push((inst.index, eta, name)),
            Err(e) => return Err(e),
        }
    }
    if let Some((at, name, family)) = pending_mert {
        let outcomes: Vec<Outcome<f64>> = family
            .iter()
            .map(|(_, p)| Outcome {
                energy: p.energy,
                makespan: p.makespan,
            })
            .collect();
        // without a baseline every member qualifies
        let reference = if baselines.is_empty() {
            vec![Outcome {
                energy: f64::INFINITY,
                makespan: 0.0,
            }]
        } else {
            baselines
        };
        let sel = compare_rule(&reference, &outcomes)?;
        let (mc, p) = &family[sel.selected];
        out.rows.insert(at, make_row(inst, eta, &name, p, Some((*mc, sel.fallback))));
    }
    Ok(out)
}

fn record_time(out: &mut RunOutput, inst: &Instance, eta: f64, name: &str, start: Instant) {
    out.timings.push(TimingRow {
        instance: inst.index,
        eta,
        algorithm: name.to_owned(),
        runtime_ms: start.elapsed().as_secs_f64() * 1e3,
    });
}

/// Instances and `eta` grid for ft mode: `eta_max` is the largest feasible
/// grid point over a pilot batch (or the largest configured `eta`), then
/// fresh instances are drawn until `instances` of them reach it.
pub fn collect_ft_instances(cfg: &ExperimentConfig) -> Result<(Vec<Instance>, Vec<f64>, Resampling)> {
    let (eta_max, pilot, etas) = match &cfg.etas {
        Some(etas) => {
            let max = etas.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            (max, 0, etas.clone())
        }
        None => {
            let pilot: Vec<f64> = (0..cfg.instances)
                .into_par_iter()
                .map(|i| cfg.instance(i).map(|inst| inst.eta_max()))
                .collect::<Result<_>>()?;
            let max = pilot.iter().copied().fold(1.0, f64::max);
            if max <= 1.0 {
                return Err(Error::InvalidParameter(
                    "no pilot instance admits a fault-tolerant constraint".into(),
                ));
            }
            (max, cfg.instances, ft_etas(max))
        }
    };
    let mut kept = Vec::new();
    let mut attempts = 0;
    while kept.len() < cfg.instances && attempts < cfg.max_resample_attempts {
        let inst = cfg.instance(pilot + attempts)?;
        attempts += 1;
        let ok = inst.scenario(eta_max) != ConstraintScenario::Infeasible;
        if ok {
            kept.push(inst);
        }
    }
    let info = Resampling {
        eta_max,
        pilot,
        attempts,
        rejected: attempts - kept.len(),
        kept: kept.len(),
        exhausted: kept.len() < cfg.instances,
    };
    if info.exhausted {
        log::warn!(
            "found {} of {} instances reaching eta_max {} in {} attempts",
            info.kept,
            cfg.instances,
            eta_max,
            attempts
        );
    }
    if kept.is_empty() {
        return Err(Error::InvalidParameter(format!(
            "no instance reaches eta_max {eta_max} in {attempts} attempts"
        )));
    }
    Ok((kept, etas, info))
}

/// Runs the full protocol for `cfg`.
pub fn run_sweep(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    cfg.validate()?;
    let algorithms = cfg.algorithms();
    let (instances, etas, resampling) = match cfg.mode {
        Mode::NonFt => {
            let instances = (0..cfg.instances)
                .into_par_iter()
                .map(|i| cfg.instance(i))
                .collect::<Result<Vec<_>>>()?;
            (instances, cfg.etas.clone().unwrap_or_else(non_ft_etas), None)
        }
        Mode::Ft => {
            let (i, e, r) = collect_ft_instances(cfg)?;
            (i, e, Some(r))
        }
    };
    let points: Vec<(usize, f64)> = (0..instances.len())
        .flat_map(|i| etas.iter().map(move |&e| (i, e)))
        .collect();
    let outputs = points
        .into_par_iter()
        .map(|(i, eta)| run_point(cfg, &instances[i], eta, &algorithms))
        .collect::<Result<Vec<_>>>()?;

    let mut report = ExperimentReport {
        resampling,
        ..Default::default()
    };
    for o in outputs {
        report.rows.extend(o.rows);
        report.timings.extend(o.timings);
        report.skipped.extend(o.skipped);
    }
    report.aggregates = aggregate(&report.rows, &etas);
    report.energy_drops = energy_drops(&report.rows);
    Ok(report)
}

fn aggregate(rows: &[Row], etas: &[f64]) -> Vec<AggregateRow> {
    let mut names: Vec<&str> = Vec::new();
    for r in rows {
        if !names.contains(&r.algorithm.as_str()) {
            names.push(&r.algorithm);
        }
    }
    let mut out = Vec::new();
    for &eta in etas {
        for &name in &names {
            let sel: Vec<&Row> = rows.iter().filter(|r| r.eta == eta && r.algorithm == name).collect();
            if sel.is_empty() {
                continue;
            }
            let k = sel.len() as f64;
            let mean = |f: fn(&Row) -> f64| sel.iter().map(|r| f(r)).sum::<f64>() / k;
            out.push(AggregateRow {
                eta,
                algorithm: name.to_owned(),
                instances: sel.len(),
                makespan: mean(|r| r.makespan),
                energy: mean(|r| r.energy),
                reliability: mean(|r| r.reliability),
                replicas: mean(|r| r.replicas as f64),
                constraint_met: sel.iter().filter(|r| r.meets_constraint).count(),
            });
        }
    }
    out
}

fn energy_drops(rows: &[Row]) -> Vec<EnergyDrop> {
    let mut out = Vec::new();
    for (i, a) in rows.iter().enumerate() {
        // the next row of the same instance and algorithm at a larger eta
        let next = rows[i + 1..]
            .iter()
            .filter(|b| b.instance == a.instance && b.algorithm == a.algorithm && b.eta > a.eta)
            .min_by(|x, y| x.eta.total_cmp(&y.eta));
        if let Some(b) = next {
            if b.energy < a.energy * (1.0 - 1e-12) {
                out.push(EnergyDrop {
                    instance: a.instance,
                    algorithm: a.algorithm.clone(),
                    eta_low: a.eta,
                    eta_high: b.eta,
                    energy_low: a.energy,
                    energy_high: b.energy,
                });
            }
        }
    }
    out
}
