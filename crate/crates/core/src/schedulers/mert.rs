//! Makespan- and energy-aware allocation under a reliability target.
//!
//! Tasks with the longest wait times (largest incoming communication plus
//! mean execution time) are placed by a blend of normalized finish time and
//! normalized execution time; all other tasks go to the cheapest processor
//! that meets their reliability target.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{argmin_by, check_dimensions, finish_plan, AllocationResult, Diagnostics, MaxFrequencyCosts};
use crate::error::{Error, Result};
use crate::graph::{TaskGraph, TaskId};
use crate::platform::Platform;
use crate::reliability::{up_rank, wait_times, ReliabilityPlan};
use crate::scalar::Real;
use crate::schedule::{earliest_start, ConstraintScenario, PartialSchedule, ReliabilityMaxima};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MertConfig {
    /// Weight of normalized finish time against normalized execution time.
    pub alpha: f64,
    /// How many of the longest-waiting tasks are placed by finish time.
    pub ell: usize,
}

impl MertConfig {
    pub fn new(alpha: f64, ell: usize) -> Self {
        Self { alpha, ell }
    }

    fn validate(&self, n: usize) -> Result<()> {
        if !(0.0..=1.0).contains(&self.alpha) {
            return Err(Error::InvalidParameter(format!("alpha {} outside [0, 1]", self.alpha)));
        }
        if self.ell > n {
            return Err(Error::InvalidParameter(format!("ell {} exceeds task count {n}", self.ell)));
        }
        Ok(())
    }
}

impl Default for MertConfig {
    fn default() -> Self {
        Self { alpha: 0.5, ell: 0 }
    }
}

/// Sweep grid over `alpha` and `ell`. `ell_fractions` are scaled by the task
/// count and rounded up.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MertGrid {
    pub alphas: Vec<f64>,
    pub ell_fractions: Vec<f64>,
}

impl Default for MertGrid {
    fn default() -> Self {
        Self {
            alphas: (0..=10).map(|i| f64::from(i) / 10.0).collect(),
            ell_fractions: vec![0.0, 0.25, 0.5, 0.75, 1.0],
        }
    }
}

impl MertGrid {
    /// Grid points in `(alpha, ell)` row-major order, duplicates of `ell` removed.
    pub fn configs(&self, n: usize) -> Vec<MertConfig> {
        let mut ells: Vec<usize> = self
            .ell_fractions
            .iter()
            .map(|f| ((f * n as f64) - 1e-9).ceil().clamp(0.0, n as f64) as usize)
            .collect();
        ells.dedup();
        self.alphas
            .iter()
            .flat_map(|&a| ells.iter().map(move |&l| MertConfig::new(a, l)))
            .collect()
    }
}

/// Tasks flagged for finish-time placement: the first `ell` by decreasing
/// wait time, ties broken by dispatch position.
fn finish_driven<T: Real>(graph: &TaskGraph<T>, positions: &[usize], ell: usize) -> Vec<bool> {
    let waits = wait_times(graph);
    let mut by_wait: Vec<TaskId> = graph.tasks().collect();
    by_wait.sort_by(|a, b| {
        waits[b.0]
            .partial_cmp(&waits[a.0])
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(positions[a.0].cmp(&positions[b.0]))
    });
    let mut flags = vec![false; graph.len()];
    for t in by_wait.into_iter().take(ell) {
        flags[t.0] = true;
    }
    flags
}

fn min_max<T: Real>(values: impl Iterator<Item = T>) -> (T, T) {
    values.fold((T::infinity(), T::neg_infinity()), |(lo, hi), v| (lo.min(v), hi.max(v)))
}

#[inline]
fn normalize<T: Real>(v: T, (lo, hi): (T, T)) -> T {
    if hi > lo {
        (v - lo) / (hi - lo)
    } else {
        T::zero()
    }
}

/// Non-fault-tolerant allocation; one replica per task.
pub fn mert<T: Real>(graph: &TaskGraph<T>, platform: &Platform<T>, r_req: T, cfg: &MertConfig) -> Result<AllocationResult<T>> {
    check_dimensions(graph, platform)?;
    cfg.validate(graph.len())?;
    let maxima = ReliabilityMaxima::compute(graph, platform);
    let scenario = maxima.classify(r_req);
    if scenario != ConstraintScenario::NonFaultTolerant {
        return Err(Error::Scenario {
            r_req: r_req.to_f64_lossy(),
            scenario,
        });
    }
    let plan = ReliabilityPlan::bounds(graph, platform, r_req, scenario)?;
    run(graph, platform, plan, &maxima, cfg, true)
}

/// Earliest-finish-time list scheduling in up-rank order, ignoring
/// reliability and energy.
pub fn eft<T: Real>(graph: &TaskGraph<T>, platform: &Platform<T>) -> Result<AllocationResult<T>> {
    check_dimensions(graph, platform)?;
    let maxima = ReliabilityMaxima::compute(graph, platform);
    let plan = ReliabilityPlan::from_maxima(maxima.task_log_non_ft.clone(), T::zero())?;
    run(graph, platform, plan, &maxima, &MertConfig::new(1.0, graph.len()), false)
}

fn run<T: Real>(
    graph: &TaskGraph<T>,
    platform: &Platform<T>,
    mut plan: ReliabilityPlan<T>,
    maxima: &ReliabilityMaxima<T>,
    cfg: &MertConfig,
    use_targets: bool,
) -> Result<AllocationResult<T>> {
    let m = platform.len();
    let costs = MaxFrequencyCosts::new(graph, platform);
    let ranks = up_rank(graph);
    let positions = ranks.positions();
    let flags = finish_driven(graph, &positions, cfg.ell);
    let alpha = T::lit(cfg.alpha);

    let mut partial = PartialSchedule::new(graph);
    let mut achieved = vec![T::zero(); graph.len()];
    let mut diag = Diagnostics::default();
    let mut finishes = vec![T::zero(); m];

    for &t in &ranks.order {
        let target = plan.next_target(t);
        let lr = &costs.log_rel[t.0];
        let mut delta: Vec<usize> = if use_targets {
            (0..m).filter(|&k| lr[k] >= target).collect()
        } else {
            (0..m).collect()
        };
        diag.candidate_counts.push(delta.len());
        if delta.is_empty() {
            diag.empty_candidate_sets += 1;
            delta.push(maxima.best_processor[t.0]);
        }

        let chosen = if flags[t.0] {
            for (k, slot) in finishes.iter_mut().enumerate() {
                *slot = earliest_start(t, k, &partial, graph)? + graph.wcet(t, k);
            }
            let f_range = min_max(finishes.iter().copied());
            let e_range = min_max(graph.wcet_row(t).iter().copied());
            argmin_by(delta.iter().copied(), |k| {
                alpha * normalize(finishes[k], f_range)
                    + (T::one() - alpha) * normalize(graph.wcet(t, k), e_range)
            })
        } else {
            argmin_by(delta.iter().copied(), |k| costs.energy[t.0][k])
        }
        .expect("candidate set is nonempty");

        partial.place(t, chosen, T::one(), graph)?;
        achieved[t.0] = lr[chosen];
        plan.record(t, lr[chosen]);
    }
    finish_plan(partial, achieved, Some(&plan), diag)
}

/// Runs [`mert`] at every grid point; results come back in grid order.
pub fn mert_sweep<T: Real>(
    graph: &TaskGraph<T>,
    platform: &Platform<T>,
    r_req: T,
    grid: &MertGrid,
) -> Result<Vec<(MertConfig, AllocationResult<T>)>> {
    grid.configs(graph.len())
        .into_par_iter()
        .map(|cfg| mert(graph, platform, r_req, &cfg).map(|r| (cfg, r)))
        .collect()
}
