//! Processor allocation at maximum frequency.
//!
//! Every scheduler walks tasks in decreasing up-rank order and appends
//! replicas to processor queues. Frequencies are left at `1`; see
//! [`crate::frequency`] for scaling afterwards.

mod mert;
mod replication;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::TaskGraph;
use crate::platform::Platform;
use crate::reliability::{up_rank, TargetGuard, ReliabilityPlan, TargetRecord};
use crate::scalar::Real;
use crate::schedule::{PartialSchedule, ReliabilityMaxima, Schedule};

pub use mert::{eft, mert, mert_sweep, MertConfig, MertGrid};
pub use replication::{eafts, maxre, rr};

/// What a scheduler observed while placing tasks.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Diagnostics<T> {
    /// Per dispatch step bound, target and achieved log-reliability.
    pub targets: Vec<TargetRecord<T>>,
    /// Size of the feasible processor set per dispatch step (MERT only).
    pub candidate_counts: Vec<usize>,
    /// Steps where no processor met the target and the best one was used.
    pub empty_candidate_sets: usize,
    /// Steps where replication over every processor still missed the target.
    pub unmet_targets: usize,
    pub guard: TargetGuard,
    pub bounds_fallback: bool,
}

/// Allocation produced by a scheduler.
#[derive(Clone, Debug, PartialEq)]
pub struct AllocationResult<T> {
    pub schedule: Schedule<T>,
    /// Achieved log-reliability per task, indexed by task id.
    pub task_log_reliability: Vec<T>,
    pub diagnostics: Diagnostics<T>,
}

impl<T: Real> AllocationResult<T> {
    pub fn log_reliability(&self) -> T {
        self.task_log_reliability.iter().copied().sum()
    }

    pub fn reliability(&self) -> T {
        self.log_reliability().exp()
    }
}

/// Per task-processor reliability and energy at maximum frequency.
pub(crate) struct MaxFrequencyCosts<T> {
    pub log_rel: Vec<Vec<T>>,
    pub energy: Vec<Vec<T>>,
}

impl<T: Real> MaxFrequencyCosts<T> {
    pub fn new(graph: &TaskGraph<T>, platform: &Platform<T>) -> Self {
        let mut log_rel = Vec::with_capacity(graph.len());
        let mut energy = Vec::with_capacity(graph.len());
        for t in graph.tasks() {
            let (lr, e) = platform
                .processors
                .iter()
                .enumerate()
                .map(|(k, p)| {
                    let w = graph.wcet(t, k);
                    (p.log_reliability_at(w, T::one()), p.energy_at(w, T::one()))
                })
                .unzip();
            log_rel.push(lr);
            energy.push(e);
        }
        Self { log_rel, energy }
    }
}

pub(crate) fn check_dimensions<T: Real>(graph: &TaskGraph<T>, platform: &Platform<T>) -> Result<()> {
    if graph.num_processors() != platform.len() {
        return Err(Error::InvalidParameter(format!(
            "graph has costs for {} processors, platform has {}",
            graph.num_processors(),
            platform.len()
        )));
    }
    Ok(())
}

pub(crate) fn finish_plan<T: Real>(
    partial: PartialSchedule<T>,
    achieved: Vec<T>,
    plan: Option<&ReliabilityPlan<T>>,
    mut diagnostics: Diagnostics<T>,
) -> Result<AllocationResult<T>> {
    if let Some(plan) = plan {
        diagnostics.targets = plan.records().to_vec();
        diagnostics.guard = plan.guard();
        diagnostics.bounds_fallback = plan.used_fallback();
    }
    Ok(AllocationResult {
        schedule: partial.finish()?,
        task_log_reliability: achieved,
        diagnostics,
    })
}

/// Maximum Reliability: each task on the single processor with the highest
/// reliability at maximum frequency (lowest id on ties).
pub fn mr<T: Real>(graph: &TaskGraph<T>, platform: &Platform<T>) -> Result<AllocationResult<T>> {
    check_dimensions(graph, platform)?;
    let maxima = ReliabilityMaxima::compute(graph, platform);
    let ranks = up_rank(graph);
    let mut partial = PartialSchedule::new(graph);
    let mut achieved = vec![T::zero(); graph.len()];
    for &t in &ranks.order {
        let k = maxima.best_processor[t.0];
        partial.place(t, k, T::one(), graph)?;
        achieved[t.0] = maxima.task_log_non_ft[t.0];
    }
    finish_plan(partial, achieved, None, Diagnostics::default())
}

/// Scheduler selector used by the CLI and the harness.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Algorithm {
    Mert,
    Eafts,
    Mr,
    MaxRe,
    Rr,
}

impl Algorithm {
    pub const ALL: [Algorithm; 5] = [Algorithm::Mert, Algorithm::Eafts, Algorithm::Mr, Algorithm::MaxRe, Algorithm::Rr];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Mert => "mert",
            Algorithm::Eafts => "eafts",
            Algorithm::Mr => "mr",
            Algorithm::MaxRe => "maxre",
            Algorithm::Rr => "rr",
        }
    }

    /// Runs the allocation step. `Mert` uses `cfg`.
    pub fn allocate<T: Real>(
        self,
        graph: &TaskGraph<T>,
        platform: &Platform<T>,
        r_req: T,
        cfg: &MertConfig,
    ) -> Result<AllocationResult<T>> {
        match self {
            Algorithm::Mert => mert(graph, platform, r_req, cfg),
            Algorithm::Eafts => eafts(graph, platform, r_req),
            Algorithm::Mr => mr(graph, platform),
            Algorithm::MaxRe => maxre(graph, platform, r_req),
            Algorithm::Rr => rr(graph, platform, r_req),
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Algorithm::ALL
            .into_iter()
            .find(|a| a.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::InvalidParameter(format!("unknown algorithm '{s}'")))
    }
}

pub(crate) fn argmin_by<T: Real>(candidates: impl Iterator<Item = usize>, key: impl Fn(usize) -> T) -> Option<usize> {
    let mut best: Option<(usize, T)> = None;
    for k in candidates {
        let v = key(k);
        match best {
            Some((_, b)) if v >= b => {}
            _ => best = Some((k, v)),
        }
    }
    best.map(|(k, _)| k)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{augment, RawGraph, TaskId};
    use crate::platform::Processor;
    use crate::schedule::schedule_log_reliability;

    #[test]
    fn mr_reaches_non_ft_maximum() {
        let g: TaskGraph<f64> =
            crate::graph::generate_ge(6, &crate::graph::GeneratorConfig::default().with_processors(5)).unwrap();
        let pl = crate::platform::random_platform(5, &Default::default(), 4).unwrap();
        let res = mr(&g, &pl).unwrap();
        let max = ReliabilityMaxima::compute(&g, &pl);
        let got = schedule_log_reliability(&res.schedule, &g, &pl).unwrap();
        assert!((got - max.log_non_ft).abs() < 1e-15);
        assert_eq!(res.schedule.replica_count(), g.len());
    }

    fn proc(lambda0: f64) -> Processor<f64> {
        Processor {
            f_min: 0.3,
            p_static: 0.5,
            c: 1.0,
            alpha: 3.0,
            lambda0,
            d: 2.0,
        }
    }

    #[test]
    fn mr_argmin_and_tie_break() {
        let mut raw = RawGraph::new(2);
        raw.add_task("t", vec![100.0, 100.0]);
        let g = augment(raw).unwrap();
        let pl = Platform::new(vec![proc(1e-5), proc(2e-5)], 1e-4).unwrap();
        assert_eq!(mr(&g, &pl).unwrap().schedule.replicas(TaskId(1))[0].processor, 0);
        let pl = Platform::new(vec![proc(2e-5), proc(1e-5)], 1e-4).unwrap();
        assert_eq!(mr(&g, &pl).unwrap().schedule.replicas(TaskId(1))[0].processor, 1);
        let pl = Platform::new(vec![proc(1e-5), proc(1e-5)], 1e-4).unwrap();
        assert_eq!(mr(&g, &pl).unwrap().schedule.replicas(TaskId(1))[0].processor, 0);
    }

    #[test]
    fn algorithm_names_roundtrip() {
        for a in Algorithm::ALL {
            assert_eq!(a.name().parse::<Algorithm>().unwrap(), a);
        }
        assert!("ods".parse::<Algorithm>().is_err());
    }

    #[test]
    fn dimension_mismatch_is_rejected() {
        let mut raw = RawGraph::new(3);
        raw.add_task("t", vec![1.0; 3]);
        let g = augment(raw).unwrap();
        let pl = Platform::new(vec![proc(1e-5)], 1e-4).unwrap();
        assert!(mr(&g, &pl).is_err());
    }
}
