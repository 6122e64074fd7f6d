//! Task ordering and the per-task reliability budget.
//!
//! The global constraint `r_req` is split into per-task bounds whose product
//! is `r_req`. While scheduling in rank order, each task's target is the
//! bound adjusted by how far the already placed tasks overshot their own
//! bounds, so placing every task at or above its target meets `r_req`.
//! Everything here is carried in natural-log space.

use std::cmp::Ordering;
use std::io::Write;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::{TaskGraph, TaskId};
use crate::platform::Platform;
use crate::scalar::Real;
use crate::schedule::{ConstraintScenario, ReliabilityMaxima};

/// Up-rank values and the resulting dispatch order.
#[derive(Clone, Debug, PartialEq)]
pub struct RankTable<T> {
    pub urv: Vec<T>,
    /// Tasks by decreasing up-rank, ties by ascending id.
    pub order: Vec<TaskId>,
}

impl<T: Real> RankTable<T> {
    /// Position of each task inside `order`.
    pub fn positions(&self) -> Vec<usize> {
        let mut pos = vec![0; self.order.len()];
        for (i, t) in self.order.iter().enumerate() {
            pos[t.0] = i;
        }
        pos
    }
}

/// `urv(v) = mean_wcet(v) + max over successors s of (w(v, s) + urv(s))`,
/// with the exit task contributing only its mean execution time.
pub fn up_rank<T: Real>(graph: &TaskGraph<T>) -> RankTable<T> {
    let mut urv = vec![T::zero(); graph.len()];
    for &t in graph.topological_order().iter().rev() {
        let tail = graph
            .successors(t)
            .iter()
            .map(|&(s, w)| w + urv[s.0])
            .fold(T::zero(), T::max);
        urv[t.0] = graph.mean_wcet(t) + tail;
    }
    let mut order: Vec<TaskId> = graph.tasks().collect();
    order.sort_by(|a, b| {
        urv[b.0]
            .partial_cmp(&urv[a.0])
            .unwrap_or(Ordering::Equal)
            .then(a.cmp(b))
    });
    RankTable { urv, order }
}

/// Largest incoming edge weight plus mean execution time; the entry task
/// contributes its mean execution time only.
pub fn wait_time<T: Real>(task: TaskId, graph: &TaskGraph<T>) -> T {
    let comm = graph
        .predecessors(task)
        .iter()
        .map(|&(_, w)| w)
        .fold(T::zero(), T::max);
    graph.mean_wcet(task) + comm
}

pub fn wait_times<T: Real>(graph: &TaskGraph<T>) -> Vec<T> {
    graph.tasks().map(|t| wait_time(t, graph)).collect()
}

/// Running target in log form: `sum(bounds[..=i]) - sum(achieved[..i])`.
#[inline]
pub fn target_log<T: Real>(prefix_bound_log_inclusive: T, prefix_achieved_log: T) -> T {
    prefix_bound_log_inclusive - prefix_achieved_log
}

/// Counts of budget-invariant breaches observed during a run.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct TargetGuard {
    /// Steps where the target exceeded the task's bound.
    pub target_above_bound: usize,
    /// Steps where achieved prefix reliability fell below the bound prefix.
    pub prefix_deficit: usize,
}

impl TargetGuard {
    pub fn total(&self) -> usize {
        self.target_above_bound + self.prefix_deficit
    }

    pub fn merge(&mut self, other: TargetGuard) {
        self.target_above_bound += other.target_above_bound;
        self.prefix_deficit += other.prefix_deficit;
    }
}

/// One allocation step as seen by the plan.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TargetRecord<T> {
    pub task: TaskId,
    pub log_bound: T,
    pub log_target: T,
    pub log_achieved: T,
}

/// Per-task bounds plus the running products that turn them into targets.
///
/// Single-owner accumulator: call [`next_target`](Self::next_target) then
/// [`record`](Self::record) for each task in dispatch order.
#[derive(Clone, Debug)]
pub struct ReliabilityPlan<T> {
    log_r_req: T,
    task_log_max: Vec<T>,
    log_max: T,
    log_bounds: Vec<T>,
    fallback: bool,
    prefix_bound: T,
    prefix_achieved: T,
    steps: usize,
    pending: Option<(TaskId, T)>,
    guard: TargetGuard,
    records: Vec<TargetRecord<T>>,
}

/// `1 - R_max` below this uses uniform bounds instead of the log ratio.
pub const NEAR_ONE: f64 = 1e-12;

impl<T: Real> ReliabilityPlan<T> {
    /// Bounds for `r_req` in the given setting.
    pub fn bounds(graph: &TaskGraph<T>, platform: &Platform<T>, r_req: T, scenario: ConstraintScenario) -> Result<Self> {
        let maxima = ReliabilityMaxima::compute(graph, platform);
        let per_task = match scenario {
            ConstraintScenario::NonFaultTolerant => maxima.task_log_non_ft,
            ConstraintScenario::FaultTolerant => maxima.task_log_ft,
            ConstraintScenario::Infeasible => {
                return Err(Error::Scenario {
                    r_req: r_req.to_f64_lossy(),
                    scenario,
                })
            }
        };
        let plan = Self::from_maxima(per_task, r_req)?;
        // r_req must not exceed the setting's maximum (rounding slack allowed)
        if plan.log_r_req > plan.log_max + T::log_slack() {
            return Err(Error::Scenario {
                r_req: r_req.to_f64_lossy(),
                scenario,
            });
        }
        Ok(plan)
    }

    /// Bounds from explicit per-task maximum log-reliabilities.
    ///
    /// `bound_i = r_req ^ (ln R_i,max / ln R_max)`; when `R_max` is within
    /// [`NEAR_ONE`] of one every bound becomes `r_req ^ (1 / n)`.
    pub fn from_maxima(task_log_max: Vec<T>, r_req: T) -> Result<Self> {
        let n = task_log_max.len();
        if n == 0 {
            return Err(Error::InvalidParameter("empty task set".into()));
        }
        if !(r_req >= T::zero() && r_req <= T::one()) {
            return Err(Error::InvalidParameter(format!("r_req {r_req} outside [0, 1]")));
        }
        let log_r_req = r_req.ln();
        let log_max: T = task_log_max.iter().copied().sum();
        let fallback = -log_max < T::lit(NEAR_ONE);
        let log_bounds = if fallback {
            vec![log_r_req / T::from_count(n); n]
        } else if log_r_req == T::neg_infinity() {
            task_log_max
                .iter()
                .map(|&l| if l.is_zero() { T::zero() } else { T::neg_infinity() })
                .collect()
        } else {
            task_log_max.iter().map(|&l| log_r_req * (l / log_max)).collect()
        };
        Ok(Self {
            log_r_req,
            task_log_max,
            log_max,
            log_bounds,
            fallback,
            prefix_bound: T::zero(),
            prefix_achieved: T::zero(),
            steps: 0,
            pending: None,
            guard: TargetGuard::default(),
            records: Vec::with_capacity(n),
        })
    }

    /// Every task gets the same bound `r_req ^ (1 / n)`.
    pub fn uniform(n: usize, r_req: T) -> Result<Self> {
        let mut plan = Self::from_maxima(vec![T::zero(); n], r_req)?;
        plan.log_bounds = vec![plan.log_r_req / T::from_count(n); n];
        plan.fallback = true;
        Ok(plan)
    }

    pub fn log_r_req(&self) -> T {
        self.log_r_req
    }

    pub fn log_bound(&self, task: TaskId) -> T {
        self.log_bounds[task.0]
    }

    pub fn log_bounds(&self) -> &[T] {
        &self.log_bounds
    }

    pub fn task_log_max(&self, task: TaskId) -> T {
        self.task_log_max[task.0]
    }

    pub fn log_max(&self) -> T {
        self.log_max
    }

    /// Whether the near-one fallback produced the bounds.
    pub fn used_fallback(&self) -> bool {
        self.fallback
    }

    pub fn guard(&self) -> TargetGuard {
        self.guard
    }

    pub fn records(&self) -> &[TargetRecord<T>] {
        &self.records
    }

    pub fn prefix_achieved_log(&self) -> T {
        self.prefix_achieved
    }

    /// Log-target for `task`, the next task in dispatch order.
    pub fn next_target(&mut self, task: TaskId) -> T {
        let bound = self.log_bounds[task.0];
        let target = target_log(self.prefix_bound + bound, self.prefix_achieved);
        if target > bound + self.slack() {
            self.guard.target_above_bound += 1;
            log::debug!("target above bound for {task}: {target} > {bound}");
        }
        self.pending = Some((task, target));
        target
    }

    /// Records the log-reliability reached by the task last passed to
    /// [`next_target`](Self::next_target).
    pub fn record(&mut self, task: TaskId, achieved_log: T) {
        let target = match self.pending.take() {
            Some((t, target)) if t == task => target,
            _ => target_log(self.prefix_bound + self.log_bounds[task.0], self.prefix_achieved),
        };
        let bound = self.log_bounds[task.0];
        self.prefix_bound = self.prefix_bound + bound;
        self.prefix_achieved = self.prefix_achieved + achieved_log;
        self.steps += 1;
        if self.prefix_achieved < self.prefix_bound - self.slack() {
            self.guard.prefix_deficit += 1;
            log::debug!(
                "prefix deficit after {task}: {} < {}",
                self.prefix_achieved,
                self.prefix_bound
            );
        }
        self.records.push(TargetRecord {
            task,
            log_bound: bound,
            log_target: target,
            log_achieved: achieved_log,
        });
    }

    fn slack(&self) -> T {
        T::log_slack() * T::from_count(self.steps + 1)
    }

    /// Writes the per-step bound/target/achieved trace as CSV.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["task", "bound", "target", "achieved", "log_bound", "log_target", "log_achieved"])?;
        for r in &self.records {
            w.write_record([
                r.task.0.to_string(),
                r.log_bound.exp().to_string(),
                r.log_target.exp().to_string(),
                r.log_achieved.exp().to_string(),
                r.log_bound.to_string(),
                r.log_target.to_string(),
                r.log_achieved.to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}
