//! Active-replication schedulers.
//!
//! Each task receives replicas one processor at a time, in a
//! scheduler-specific processor order, until its reliability reaches the
//! task's target.

use std::cmp::Ordering;

use super::{check_dimensions, finish_plan, AllocationResult, Diagnostics, MaxFrequencyCosts};
use crate::error::{Error, Result};
use crate::graph::TaskGraph;
use crate::platform::Platform;
use crate::reliability::{up_rank, ReliabilityPlan};
use crate::scalar::{failure_from_log, log_success_from_failure, Real};
use crate::schedule::{ConstraintScenario, PartialSchedule, ReliabilityMaxima};

#[derive(Clone, Copy, PartialEq, Eq)]
enum TargetRule {
    /// Running targets from the plan.
    Adaptive,
    /// Every task must reach its own bound.
    Fixed,
}

fn feasible_scenario<T: Real>(graph: &TaskGraph<T>, platform: &Platform<T>, r_req: T) -> Result<ConstraintScenario> {
    check_dimensions(graph, platform)?;
    let scenario = ReliabilityMaxima::compute(graph, platform).classify(r_req);
    if scenario == ConstraintScenario::Infeasible {
        return Err(Error::Scenario {
            r_req: r_req.to_f64_lossy(),
            scenario,
        });
    }
    Ok(scenario)
}

fn replicate<T: Real>(
    graph: &TaskGraph<T>,
    platform: &Platform<T>,
    mut plan: ReliabilityPlan<T>,
    rule: TargetRule,
    costs: &MaxFrequencyCosts<T>,
    processor_order: impl Fn(usize, &mut Vec<usize>),
) -> Result<AllocationResult<T>> {
    let m = platform.len();
    let ranks = up_rank(graph);
    let mut partial = PartialSchedule::new(graph);
    let mut achieved = vec![T::zero(); graph.len()];
    let mut diag = Diagnostics::default();
    let mut procs: Vec<usize> = Vec::with_capacity(m);

    for &t in &ranks.order {
        let adaptive = plan.next_target(t);
        let target = match rule {
            TargetRule::Adaptive => adaptive,
            TargetRule::Fixed => plan.log_bound(t),
        };
        procs.clear();
        procs.extend(0..m);
        processor_order(t.0, &mut procs);

        let mut failure = T::one();
        let mut task_log = T::neg_infinity();
        for &k in &procs {
            partial.place(t, k, T::one(), graph)?;
            failure = failure * failure_from_log(costs.log_rel[t.0][k]);
            task_log = log_success_from_failure(failure);
            if task_log >= target {
                break;
            }
        }
        if task_log < target {
            diag.unmet_targets += 1;
        }
        achieved[t.0] = task_log;
        plan.record(t, task_log);
    }
    finish_plan(partial, achieved, Some(&plan), diag)
}

/// Energy-aware fault-tolerant scheduling: processors in increasing order
/// of energy at maximum frequency, ties to the more reliable processor.
pub fn eafts<T: Real>(graph: &TaskGraph<T>, platform: &Platform<T>, r_req: T) -> Result<AllocationResult<T>> {
    let scenario = feasible_scenario(graph, platform, r_req)?;
    let plan = ReliabilityPlan::bounds(graph, platform, r_req, scenario)?;
    let costs = MaxFrequencyCosts::new(graph, platform);
    replicate(graph, platform, plan, TargetRule::Adaptive, &costs, |t, procs| {
        let (e, r) = (&costs.energy[t], &costs.log_rel[t]);
        procs.sort_by(|&a, &b| {
            e[a].partial_cmp(&e[b])
                .unwrap_or(Ordering::Equal)
                .then(r[b].partial_cmp(&r[a]).unwrap_or(Ordering::Equal))
                .then(a.cmp(&b))
        });
    })
}

fn by_reliability<T: Real>(costs: &MaxFrequencyCosts<T>) -> impl Fn(usize, &mut Vec<usize>) + '_ {
    move |t, procs| {
        let r = &costs.log_rel[t];
        procs.sort_by(|&a, &b| r[b].partial_cmp(&r[a]).unwrap_or(Ordering::Equal).then(a.cmp(&b)));
    }
}

/// Fixed per-task target `r_req^(1/n)`; replicas in decreasing reliability.
pub fn maxre<T: Real>(graph: &TaskGraph<T>, platform: &Platform<T>, r_req: T) -> Result<AllocationResult<T>> {
    feasible_scenario(graph, platform, r_req)?;
    let plan = ReliabilityPlan::uniform(graph.len(), r_req)?;
    let costs = MaxFrequencyCosts::new(graph, platform);
    replicate(graph, platform, plan, TargetRule::Fixed, &costs, by_reliability(&costs))
}

/// Like [`maxre`], but each target is recomputed from the reliability
/// already achieved, with unassigned tasks assumed at `r_req^(1/n)`.
pub fn rr<T: Real>(graph: &TaskGraph<T>, platform: &Platform<T>, r_req: T) -> Result<AllocationResult<T>> {
    feasible_scenario(graph, platform, r_req)?;
    let plan = ReliabilityPlan::uniform(graph.len(), r_req)?;
    let costs = MaxFrequencyCosts::new(graph, platform);
    replicate(graph, platform, plan, TargetRule::Adaptive, &costs, by_reliability(&costs))
}
