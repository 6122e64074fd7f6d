//! Frequency allocation after processor allocation.
//!
//! Starting from a schedule that meets the reliability constraint, FA
//! repeatedly picks the replica whose boundary frequency (the lowest grid
//! frequency that keeps the overall reliability at `r_req` with everything
//! else fixed) saves the most energy, and moves it halfway there.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{TaskGraph, TaskId};
use crate::platform::Platform;
use crate::scalar::{failure_from_log, log_success_from_failure, Real};
use crate::schedule::{schedule_energy, schedule_log_reliability, Schedule};

/// Iteration limits and accuracy for [`fa`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FaConfig {
    /// Stop once `R - r_req < zeta`.
    pub zeta: f64,
    /// Defaults to `10 * m * n`.
    pub max_iterations: Option<usize>,
}

impl Default for FaConfig {
    fn default() -> Self {
        Self {
            zeta: 1e-5,
            max_iterations: None,
        }
    }
}

/// Outcome of the boundary search for one replica.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Boundary<T> {
    /// Lowest grid frequency keeping the schedule at or above `r_req`.
    At(T),
    /// Even the lowest grid frequency keeps the schedule above `r_req`.
    Unconstrained(T),
}

impl<T: Copy> Boundary<T> {
    pub fn frequency(self) -> T {
        match self {
            Boundary::At(f) | Boundary::Unconstrained(f) => f,
        }
    }
}

/// One accepted FA move.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FaStep<T> {
    pub iteration: usize,
    pub task: TaskId,
    pub replica: usize,
    pub processor: usize,
    pub from: T,
    pub to: T,
    pub boundary: T,
    /// Energy saved by this move.
    pub energy_delta: T,
    pub energy: T,
    pub reliability: T,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FaStop {
    /// Reliability came within `zeta` of `r_req`.
    Converged,
    /// No replica offered a strict energy decrease.
    NoEnergyDecrease,
    /// The iteration cap was reached.
    IterationCap,
}

#[derive(Clone, Debug, PartialEq)]
pub struct FaReport<T> {
    pub iterations: usize,
    pub stop: FaStop,
    /// Iterations after which reliability fell below `r_req`; expected 0.
    pub safety_violations: usize,
    pub energy_before: T,
    pub energy_after: T,
    pub reliability_before: T,
    pub reliability_after: T,
    pub trace: Vec<FaStep<T>>,
}

impl<T: Real> FaReport<T> {
    pub fn cap_hit(&self) -> bool {
        self.stop == FaStop::IterationCap
    }

    pub fn write_trace_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record([
            "iteration",
            "task",
            "replica",
            "processor",
            "from",
            "to",
            "boundary",
            "energy_delta",
            "energy",
            "reliability",
        ])?;
        for s in &self.trace {
            w.write_record([
                s.iteration.to_string(),
                s.task.0.to_string(),
                s.replica.to_string(),
                s.processor.to_string(),
                s.from.to_string(),
                s.to.to_string(),
                s.boundary.to_string(),
                s.energy_delta.to_string(),
                s.energy.to_string(),
                s.reliability.to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

#[derive(Clone, Debug)]
struct Slot<T> {
    task: TaskId,
    replica: usize,
    processor: usize,
    wcet: T,
    k: usize,
    /// Upper bracket for the boundary index; boundaries only move up in
    /// frequency as the slack shrinks.
    cap: usize,
    log_fail: T,
}

/// Per-replica grid positions plus cached reliability aggregates.
#[derive(Clone, Debug)]
pub struct FaState<'a, T> {
    graph: &'a TaskGraph<T>,
    platform: &'a Platform<T>,
    log_r_req: T,
    slots: Vec<Slot<T>>,
    /// Sum of replica `ln q` per task.
    task_log_fail: Vec<T>,
    task_log: Vec<T>,
    total_log: T,
}

impl<'a, T: Real> FaState<'a, T> {
    pub fn new(schedule: &Schedule<T>, graph: &'a TaskGraph<T>, platform: &'a Platform<T>, r_req: T) -> Result<Self> {
        let log_r_req = r_req.ln();
        let total_log = schedule_log_reliability(schedule, graph, platform)?;
        let mut slots = Vec::new();
        let mut task_log_fail = vec![T::zero(); graph.len()];
        let mut task_log = vec![T::zero(); graph.len()];
        for t in graph.tasks() {
            let mut lf = T::zero();
            for (j, r) in schedule.replicas(t).iter().enumerate() {
                let wcet = graph.wcet(t, r.processor);
                let k = grid_index(platform, r.processor, r.frequency);
                let p = platform.processor(r.processor);
                let log_fail = failure_from_log(p.log_reliability_at(wcet, r.frequency)).ln();
                lf = lf + log_fail;
                if wcet.is_zero() {
                    continue;
                }
                slots.push(Slot {
                    task: t,
                    replica: j,
                    processor: r.processor,
                    wcet,
                    k,
                    cap: platform.grid_len(r.processor),
                    log_fail,
                });
            }
            task_log_fail[t.0] = lf;
            task_log[t.0] = log_success_from_failure(lf.exp());
        }
        Ok(Self {
            graph,
            platform,
            log_r_req,
            slots,
            task_log_fail,
            task_log,
            total_log,
        })
    }

    pub fn log_reliability(&self) -> T {
        self.total_log
    }

    fn frequency(&self, s: &Slot<T>, k: usize) -> T {
        self.platform.grid_frequency(s.processor, k)
    }

    fn exposure(&self, s: &Slot<T>, k: usize) -> T {
        self.platform
            .processor(s.processor)
            .fault_exposure(s.wcet, self.frequency(s, k))
    }

    fn energy(&self, s: &Slot<T>, k: usize) -> T {
        self.platform
            .processor(s.processor)
            .energy_at(s.wcet, self.frequency(s, k))
    }

    /// Largest admissible exposure for slot `i`, or `None` when any
    /// exposure keeps the schedule at or above `r_req`.
    fn exposure_limit(&self, i: usize) -> Option<T> {
        let s = &self.slots[i];
        let others = self.total_log - self.task_log[s.task.0];
        let need = self.log_r_req - others;
        if need == T::neg_infinity() {
            return None;
        }
        if need > T::zero() {
            return Some(T::zero());
        }
        let q_need = failure_from_log(need);
        let log_q_max = q_need.ln() - (self.task_log_fail[s.task.0] - s.log_fail);
        if log_q_max >= T::zero() {
            None
        } else {
            Some(-log_success_from_failure(log_q_max.exp()))
        }
    }

    /// Boundary grid index for slot `i`, never below its current index.
    fn boundary_index(&mut self, i: usize) -> (usize, bool) {
        let (k, cap) = (self.slots[i].k, self.slots[i].cap);
        let limit = match self.exposure_limit(i) {
            None => return (self.platform.grid_len(self.slots[i].processor), true),
            Some(x) => x,
        };
        let s = &self.slots[i];
        // largest index in [k, cap] with exposure <= limit; exposure grows with k
        let (mut lo, mut hi) = (k, cap.max(k));
        if self.exposure(s, hi) <= limit {
            lo = hi;
        } else {
            while hi - lo > 1 {
                let mid = lo + (hi - lo) / 2;
                if self.exposure(s, mid) <= limit {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
        }
        self.slots[i].cap = lo.max(k);
        (lo, false)
    }

    fn set_index(&mut self, i: usize, k: usize) {
        let s = &self.slots[i];
        let f = self.frequency(s, k);
        let log_fail = failure_from_log(self.platform.processor(s.processor).log_reliability_at(s.wcet, f)).ln();
        let t = s.task.0;
        let lf = self.task_log_fail[t] - s.log_fail + log_fail;
        let tl = log_success_from_failure(lf.exp());
        self.total_log = self.total_log - self.task_log[t] + tl;
        self.task_log_fail[t] = lf;
        self.task_log[t] = tl;
        let s = &mut self.slots[i];
        s.k = k;
        s.log_fail = log_fail;
    }

    /// Recomputes the running sum from per-task values to shed drift.
    fn resum(&mut self) {
        self.total_log = self.task_log.iter().copied().sum();
    }
}

fn grid_index<T: Real>(platform: &Platform<T>, processor: usize, f: T) -> usize {
    let k = ((T::one() - f) / platform.frequency_step + T::lit(1e-6)).floor();
    k.max(T::zero())
        .to_usize()
        .unwrap_or(0)
        .min(platform.grid_len(processor))
}

fn find_slot<T>(state: &FaState<'_, T>, task: TaskId, replica: usize) -> Option<usize> {
    state
        .slots
        .iter()
        .position(|s| s.task == task && s.replica == replica)
}

/// Boundary frequency of one replica with every other frequency fixed.
pub fn solve_boundary_frequency<T: Real>(
    schedule: &Schedule<T>,
    graph: &TaskGraph<T>,
    platform: &Platform<T>,
    r_req: T,
    task: TaskId,
    replica: usize,
) -> Result<Boundary<T>> {
    let r = schedule
        .replicas(task)
        .get(replica)
        .ok_or_else(|| Error::Contract(format!("task {task} has no replica {replica}")))?;
    if graph.wcet(task, r.processor).is_zero() {
        let f = platform.grid_frequency(r.processor, platform.grid_len(r.processor));
        return Ok(Boundary::Unconstrained(f));
    }
    let mut state = FaState::new(schedule, graph, platform, r_req)?;
    check_precondition(&state)?;
    let i = find_slot(&state, task, replica).expect("non-empty replica has a slot");
    let (k, free) = state.boundary_index(i);
    let f = state.frequency(&state.slots[i], k);
    Ok(if free { Boundary::Unconstrained(f) } else { Boundary::At(f) })
}

fn check_precondition<T: Real>(state: &FaState<'_, T>) -> Result<()> {
    let slack = T::log_slack() * T::from_count(state.graph.len());
    if state.total_log < state.log_r_req - slack {
        return Err(Error::Contract(format!(
            "schedule reliability {} is below r_req {}",
            state.total_log.exp(),
            state.log_r_req.exp()
        )));
    }
    Ok(())
}

/// Lowers replica frequencies while the schedule stays at or above `r_req`.
///
/// Returns the retimed schedule and a report with the full move trace.
pub fn fa<T: Real>(
    schedule: &Schedule<T>,
    graph: &TaskGraph<T>,
    platform: &Platform<T>,
    r_req: T,
    config: &FaConfig,
) -> Result<(Schedule<T>, FaReport<T>)> {
    if config.zeta.is_nan() || config.zeta <= 0.0 {
        return Err(Error::InvalidParameter(format!("zeta {} must be positive", config.zeta)));
    }
    let zeta = T::lit(config.zeta);
    let mut state = FaState::new(schedule, graph, platform, r_req)?;
    check_precondition(&state)?;
    let cap = config
        .max_iterations
        .unwrap_or(10 * platform.len() * graph.len());
    let energy_before = schedule_energy(schedule, graph, platform);
    let reliability_before = state.total_log.exp();
    let mut energy = energy_before;
    let mut trace = Vec::new();
    let mut safety_violations = 0;
    let slack = T::log_slack() * T::from_count(graph.len());

    let stop = loop {
        if state.total_log.exp() - r_req < zeta {
            break FaStop::Converged;
        }
        if trace.len() >= cap {
            log::warn!("FA reached its iteration cap of {cap}");
            break FaStop::IterationCap;
        }
        let mut best: Option<(usize, usize, T)> = None;
        for i in 0..state.slots.len() {
            let (kb, _) = state.boundary_index(i);
            let s = &state.slots[i];
            if kb <= s.k {
                continue;
            }
            let delta = state.energy(s, s.k) - state.energy(s, kb);
            if delta > T::zero() && best.is_none_or(|(_, _, d)| delta > d) {
                best = Some((i, kb, delta));
            }
        }
        let Some((i, kb, _)) = best else {
            break FaStop::NoEnergyDecrease;
        };
        let k = state.slots[i].k;
        let mut next = (k + kb) / 2;
        if next == k {
            next = kb;
        }
        let from = state.frequency(&state.slots[i], k);
        let e_old = state.energy(&state.slots[i], k);
        state.set_index(i, next);
        if trace.len() % 64 == 63 {
            state.resum();
        }
        let s = &state.slots[i];
        let saved = e_old - state.energy(s, next);
        energy = energy - saved;
        if state.total_log < state.log_r_req - slack {
            safety_violations += 1;
            log::warn!("FA step {} dropped reliability below r_req", trace.len());
        }
        trace.push(FaStep {
            iteration: trace.len(),
            task: s.task,
            replica: s.replica,
            processor: s.processor,
            from,
            to: state.frequency(s, next),
            boundary: state.frequency(s, kb),
            energy_delta: saved,
            energy,
            reliability: state.total_log.exp(),
        });
    };

    let mut out = schedule.clone();
    for s in &state.slots {
        out.set_frequency(s.task, s.replica, platform.grid_frequency(s.processor, s.k));
    }
    out.retime(graph)?;
    let reliability_after = schedule_log_reliability(&out, graph, platform)?.exp();
    let energy_after = schedule_energy(&out, graph, platform);
    Ok((
        out,
        FaReport {
            iterations: trace.len(),
            stop,
            safety_violations,
            energy_before,
            energy_after,
            reliability_before,
            reliability_after,
            trace,
        },
    ))
}
