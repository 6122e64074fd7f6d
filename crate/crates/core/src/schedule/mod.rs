//! Schedules, their timing recursion and evaluation metrics.
//!
//! Processor queues are append-only: a replica starts no earlier than the
//! finish of the previous replica dispatched to the same processor. A
//! successor waits for every replica of each predecessor; the communication
//! delay is charged per replica pair on distinct processors.

mod export;
mod sim;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{TaskGraph, TaskId};
use crate::platform::Platform;
use crate::scalar::{failure_from_log, log_success_from_failure, Real};

pub use export::{parse_schedule, schedule_from_json, schedule_to_json, ScheduleFile, ScheduleSummary};
pub use sim::{simulate, ReplicaTimes};

/// One copy of a task on one processor.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound(deserialize = "T: Real"))]
pub struct Replica<T> {
    pub task: TaskId,
    pub processor: usize,
    pub frequency: T,
    pub start: T,
    pub finish: T,
}

/// Task-to-replica mapping plus the dispatch order that fixes each
/// processor's queue.
#[derive(Clone, Debug, PartialEq)]
pub struct Schedule<T> {
    replicas: Vec<Vec<Replica<T>>>,
    order: Vec<TaskId>,
}

impl<T: Real> Schedule<T> {
    /// Builds a schedule from explicit replicas and a dispatch order.
    ///
    /// Times are taken as given; call [`Schedule::retime`] to derive them.
    pub fn from_parts(replicas: Vec<Vec<Replica<T>>>, order: Vec<TaskId>) -> Result<Self> {
        let n = replicas.len();
        let mut seen = vec![false; n];
        for &t in &order {
            if t.0 >= n || std::mem::replace(&mut seen[t.0], true) {
                return Err(Error::InvalidSchedule(format!("dispatch order repeats or overflows at {t}")));
            }
        }
        if let Some(i) = replicas.iter().position(|r| r.is_empty()) {
            return Err(Error::IncompleteSchedule(i));
        }
        if order.len() != n {
            return Err(Error::InvalidSchedule(format!(
                "dispatch order lists {} of {n} tasks",
                order.len()
            )));
        }
        for (i, reps) in replicas.iter().enumerate() {
            if reps.iter().any(|r| r.task.0 != i) {
                return Err(Error::InvalidSchedule(format!("replica list {i} holds a foreign task")));
            }
        }
        Ok(Self { replicas, order })
    }

    pub fn len(&self) -> usize {
        self.replicas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.replicas.is_empty()
    }

    pub fn replicas(&self, task: TaskId) -> &[Replica<T>] {
        &self.replicas[task.0]
    }

    pub fn all_replicas(&self) -> impl Iterator<Item = &Replica<T>> {
        self.replicas.iter().flatten()
    }

    pub fn replica_count(&self) -> usize {
        self.replicas.iter().map(Vec::len).sum()
    }

    /// Replicas on real tasks only (entry and exit excluded).
    pub fn real_replica_count(&self) -> usize {
        let n = self.replicas.len();
        self.replicas[1..n - 1].iter().map(Vec::len).sum()
    }

    pub fn order(&self) -> &[TaskId] {
        &self.order
    }

    pub fn set_frequency(&mut self, task: TaskId, index: usize, frequency: T) {
        self.replicas[task.0][index].frequency = frequency;
    }

    /// Replicas grouped per processor in dispatch order.
    pub fn processor_queues(&self, num_processors: usize) -> Vec<Vec<(TaskId, usize)>> {
        let mut queues = vec![Vec::new(); num_processors];
        for &t in &self.order {
            for (j, r) in self.replicas[t.0].iter().enumerate() {
                queues[r.processor].push((t, j));
            }
        }
        queues
    }

    /// Recomputes every start and finish from the current frequencies by
    /// replaying the dispatch order.
    pub fn retime(&mut self, graph: &TaskGraph<T>) -> Result<()> {
        let mut avail = vec![T::zero(); graph.num_processors()];
        let mut done = vec![false; self.replicas.len()];
        for idx in 0..self.order.len() {
            let task = self.order[idx];
            for j in 0..self.replicas[task.0].len() {
                let r = self.replicas[task.0][j];
                let start = ready_time(task, r.processor, &self.replicas, &done, &avail, graph)?;
                let finish = start + graph.wcet(task, r.processor) / r.frequency;
                avail[r.processor] = finish;
                let slot = &mut self.replicas[task.0][j];
                slot.start = start;
                slot.finish = finish;
            }
            done[task.0] = true;
        }
        Ok(())
    }
}

/// Start time of `task` on `processor` given the already dispatched replicas.
fn ready_time<T: Real>(
    task: TaskId,
    processor: usize,
    replicas: &[Vec<Replica<T>>],
    done: &[bool],
    avail: &[T],
    graph: &TaskGraph<T>,
) -> Result<T> {
    if task == graph.entry() {
        return Ok(T::zero());
    }
    let mut t = avail[processor];
    for &(pred, weight) in graph.predecessors(task) {
        if !done[pred.0] {
            return Err(Error::UnscheduledPredecessor {
                task: task.0,
                predecessor: pred.0,
            });
        }
        for r in &replicas[pred.0] {
            let comm = if r.processor == processor { T::zero() } else { weight };
            t = t.max(r.finish + comm);
        }
    }
    Ok(t)
}

/// A schedule under construction by a list scheduler.
#[derive(Clone, Debug)]
pub struct PartialSchedule<T> {
    replicas: Vec<Vec<Replica<T>>>,
    order: Vec<TaskId>,
    done: Vec<bool>,
    avail: Vec<T>,
    open: Option<TaskId>,
}

impl<T: Real> PartialSchedule<T> {
    pub fn new(graph: &TaskGraph<T>) -> Self {
        Self {
            replicas: vec![Vec::new(); graph.len()],
            order: Vec::with_capacity(graph.len()),
            done: vec![false; graph.len()],
            avail: vec![T::zero(); graph.num_processors()],
            open: None,
        }
    }

    /// Time at which `processor` finishes its last dispatched replica.
    pub fn available(&self, processor: usize) -> T {
        self.avail[processor]
    }

    pub fn replicas(&self, task: TaskId) -> &[Replica<T>] {
        &self.replicas[task.0]
    }

    pub fn is_scheduled(&self, task: TaskId) -> bool {
        self.done[task.0] || !self.replicas[task.0].is_empty()
    }

    /// Appends a replica of `task` on `processor` at `frequency` and returns
    /// it. All replicas of one task must be placed consecutively.
    pub fn place(&mut self, task: TaskId, processor: usize, frequency: T, graph: &TaskGraph<T>) -> Result<Replica<T>> {
        if self.open != Some(task) {
            if let Some(prev) = self.open.take() {
                self.done[prev.0] = true;
            }
            if self.is_scheduled(task) {
                return Err(Error::Contract(format!("task {task} was already closed")));
            }
            self.order.push(task);
            self.open = Some(task);
        }
        if self.replicas[task.0].iter().any(|r| r.processor == processor) {
            return Err(Error::DuplicateProcessor {
                task: task.0,
                processor,
            });
        }
        let start = ready_time(task, processor, &self.replicas, &self.done, &self.avail, graph)?;
        let finish = start + graph.wcet(task, processor) / frequency;
        self.avail[processor] = finish;
        let r = Replica {
            task,
            processor,
            frequency,
            start,
            finish,
        };
        self.replicas[task.0].push(r);
        Ok(r)
    }

    pub fn finish(self) -> Result<Schedule<T>> {
        Schedule::from_parts(self.replicas, self.order)
    }
}

/// Earliest start of `task` on `processor` after everything in `partial`.
pub fn earliest_start<T: Real>(task: TaskId, processor: usize, partial: &PartialSchedule<T>, graph: &TaskGraph<T>) -> Result<T> {
    let mut done = partial.done.clone();
    if let Some(open) = partial.open {
        if open != task {
            done[open.0] = true;
        }
    }
    ready_time(task, processor, &partial.replicas, &done, &partial.avail, graph)
}

/// Latest finish over all replicas.
pub fn makespan<T: Real>(schedule: &Schedule<T>) -> T {
    schedule
        .all_replicas()
        .map(|r| r.finish)
        .fold(T::zero(), T::max)
}

/// Natural log of a task's reliability under active replication.
pub fn task_log_reliability<T: Real>(replicas: &[Replica<T>], graph: &TaskGraph<T>, platform: &Platform<T>) -> Result<T> {
    if replicas.is_empty() {
        return Err(Error::Contract("task has no replicas".into()));
    }
    for (i, a) in replicas.iter().enumerate() {
        if replicas[..i].iter().any(|b| b.processor == a.processor) {
            return Err(Error::DuplicateProcessor {
                task: a.task.0,
                processor: a.processor,
            });
        }
    }
    let mut failure = T::one();
    for r in replicas {
        let p = platform.processor(r.processor);
        if r.frequency < p.f_min || r.frequency > T::one() {
            return Err(Error::InvalidFrequency {
                processor: r.processor,
                frequency: r.frequency.to_f64_lossy(),
                f_min: p.f_min.to_f64_lossy(),
            });
        }
        failure = failure * failure_from_log(p.log_reliability_at(graph.wcet(r.task, r.processor), r.frequency));
    }
    Ok(log_success_from_failure(failure))
}

/// `1 - prod(1 - R_replica)` over the task's replicas.
pub fn task_reliability<T: Real>(replicas: &[Replica<T>], graph: &TaskGraph<T>, platform: &Platform<T>) -> Result<T> {
    task_log_reliability(replicas, graph, platform).map(T::exp)
}

pub fn schedule_log_reliability<T: Real>(schedule: &Schedule<T>, graph: &TaskGraph<T>, platform: &Platform<T>) -> Result<T> {
    graph
        .tasks()
        .map(|t| task_log_reliability(schedule.replicas(t), graph, platform))
        .sum()
}

/// Product of task reliabilities, accumulated as a log-sum.
pub fn schedule_reliability<T: Real>(schedule: &Schedule<T>, graph: &TaskGraph<T>, platform: &Platform<T>) -> Result<T> {
    schedule_log_reliability(schedule, graph, platform).map(T::exp)
}

pub fn schedule_energy<T: Real>(schedule: &Schedule<T>, graph: &TaskGraph<T>, platform: &Platform<T>) -> T {
    schedule
        .all_replicas()
        .map(|r| platform.processor(r.processor).energy_at(graph.wcet(r.task, r.processor), r.frequency))
        .sum()
}

/// Which setting a reliability constraint falls into.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConstraintScenario {
    NonFaultTolerant,
    FaultTolerant,
    Infeasible,
}

/// Best achievable reliabilities at maximum frequency, per task and overall.
#[derive(Clone, Debug, PartialEq)]
pub struct ReliabilityMaxima<T> {
    /// Best single-processor log-reliability per task.
    pub task_log_non_ft: Vec<T>,
    /// Processor achieving `task_log_non_ft` (lowest id on ties).
    pub best_processor: Vec<usize>,
    /// Log-reliability with a replica on every processor, per task.
    pub task_log_ft: Vec<T>,
    pub log_non_ft: T,
    pub log_ft: T,
}

impl<T: Real> ReliabilityMaxima<T> {
    pub fn compute(graph: &TaskGraph<T>, platform: &Platform<T>) -> Self {
        let n = graph.len();
        let mut task_log_non_ft = Vec::with_capacity(n);
        let mut best_processor = Vec::with_capacity(n);
        let mut task_log_ft = Vec::with_capacity(n);
        for t in graph.tasks() {
            let mut best = (0, T::neg_infinity());
            let mut failure = T::one();
            for (k, p) in platform.processors.iter().enumerate() {
                let lr = p.log_reliability_at(graph.wcet(t, k), T::one());
                if lr > best.1 {
                    best = (k, lr);
                }
                failure = failure * failure_from_log(lr);
            }
            best_processor.push(best.0);
            task_log_non_ft.push(best.1);
            task_log_ft.push(log_success_from_failure(failure));
        }
        let log_non_ft = task_log_non_ft.iter().copied().sum();
        let log_ft = task_log_ft.iter().copied().sum();
        Self {
            task_log_non_ft,
            best_processor,
            task_log_ft,
            log_non_ft,
            log_ft,
        }
    }

    pub fn non_ft(&self) -> T {
        self.log_non_ft.exp()
    }

    pub fn ft(&self) -> T {
        self.log_ft.exp()
    }

    /// Boundaries are inclusive; the fault-tolerant test runs in log space
    /// so constraints above a maximum that rounds to `1.0` stay infeasible.
    pub fn classify(&self, r_req: T) -> ConstraintScenario {
        if r_req <= self.non_ft() {
            ConstraintScenario::NonFaultTolerant
        } else if r_req > T::zero() && r_req.ln() <= self.log_ft {
            ConstraintScenario::FaultTolerant
        } else {
            ConstraintScenario::Infeasible
        }
    }
}

pub fn classify<T: Real>(graph: &TaskGraph<T>, platform: &Platform<T>, r_req: T) -> ConstraintScenario {
    ReliabilityMaxima::compute(graph, platform).classify(r_req)
}

/// Checks a complete schedule against the model: replica sets, frequency
/// ranges, execution durations, processor exclusivity and precedence.
pub fn validate<T: Real>(schedule: &Schedule<T>, graph: &TaskGraph<T>, platform: &Platform<T>) -> Result<()> {
    if schedule.len() != graph.len() {
        return Err(Error::InvalidSchedule(format!(
            "schedule covers {} tasks, graph has {}",
            schedule.len(),
            graph.len()
        )));
    }
    let tol = |scale: T| T::lit(1e-9) * (T::one() + scale.abs());
    for t in graph.tasks() {
        let reps = schedule.replicas(t);
        if reps.is_empty() {
            return Err(Error::IncompleteSchedule(t.0));
        }
        task_log_reliability(reps, graph, platform)?;
        for r in reps {
            if r.processor >= platform.len() {
                return Err(Error::InvalidSchedule(format!("{t} uses unknown processor {}", r.processor)));
            }
            let expected = r.start + graph.wcet(t, r.processor) / r.frequency;
            if (r.finish - expected).abs() > tol(expected) {
                return Err(Error::InvalidSchedule(format!(
                    "{t} on processor {} finishes at {} instead of {expected}",
                    r.processor, r.finish
                )));
            }
            for &(pred, w) in graph.predecessors(t) {
                for p in schedule.replicas(pred) {
                    let comm = if p.processor == r.processor { T::zero() } else { w };
                    if r.start + tol(r.start) < p.finish + comm {
                        return Err(Error::InvalidSchedule(format!(
                            "{t} on processor {} starts at {} before data from {pred} arrives at {}",
                            r.processor,
                            r.start,
                            p.finish + comm
                        )));
                    }
                }
            }
        }
    }
    for (k, queue) in schedule.processor_queues(platform.len()).iter().enumerate() {
        for pair in queue.windows(2) {
            let a = schedule.replicas(pair[0].0)[pair[0].1];
            let b = schedule.replicas(pair[1].0)[pair[1].1];
            if b.start + tol(b.start) < a.finish {
                return Err(Error::InvalidSchedule(format!(
                    "{} and {} overlap on processor {k}",
                    a.task, b.task
                )));
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{augment, RawGraph};
    use crate::platform::Processor;
    use approx::assert_relative_eq;

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

    fn chain(weight: f64) -> TaskGraph<f64> {
        let mut raw = RawGraph::new(2);
        raw.add_task("a", vec![10.0, 10.0]);
        raw.add_task("b", vec![4.0, 4.0]);
        raw.add_edge(0, 1, weight);
        augment(raw).unwrap()
    }

    fn platform(m: usize) -> Platform<f64> {
        Platform::new((0..m).map(|_| proc(1e-5)).collect(), 1e-4).unwrap()
    }

    #[test]
    fn entry_starts_at_zero() {
        let g = chain(5.0);
        let partial = PartialSchedule::new(&g);
        assert_eq!(earliest_start(g.entry(), 1, &partial, &g).unwrap(), 0.0);
    }

    #[test]
    fn same_processor_skips_communication() {
        let g = chain(5.0);
        let mut ps = PartialSchedule::new(&g);
        ps.place(g.entry(), 0, 1.0, &g).unwrap();
        let a = ps.place(TaskId(1), 0, 1.0, &g).unwrap();
        assert_eq!(a.finish, 10.0);
        assert_eq!(earliest_start(TaskId(2), 0, &ps, &g).unwrap(), 10.0);
        assert_eq!(earliest_start(TaskId(2), 1, &ps, &g).unwrap(), 15.0);
    }

    #[test]
    fn unscheduled_predecessor_is_a_contract_error() {
        let g = chain(5.0);
        let ps = PartialSchedule::new(&g);
        assert!(matches!(
            earliest_start(TaskId(2), 0, &ps, &g),
            Err(Error::UnscheduledPredecessor { .. })
        ));
    }

    #[test]
    fn makespan_examples() {
        let mut raw = RawGraph::new(2);
        raw.add_task("t", vec![10.0, 14.0]);
        let g = augment(raw).unwrap();
        let mut ps = PartialSchedule::new(&g);
        ps.place(TaskId(0), 0, 1.0, &g).unwrap();
        ps.place(TaskId(1), 0, 1.0, &g).unwrap();
        let mut ft = ps.clone();
        ps.place(TaskId(2), 0, 1.0, &g).unwrap();
        assert_eq!(makespan(&ps.finish().unwrap()), 10.0);
        ft.place(TaskId(1), 1, 1.0, &g).unwrap();
        ft.place(TaskId(2), 0, 1.0, &g).unwrap();
        assert_eq!(makespan(&ft.finish().unwrap()), 14.0);

        let g = augment(RawGraph::<f64>::new(1)).unwrap();
        let mut ps = PartialSchedule::new(&g);
        ps.place(TaskId(0), 0, 1.0, &g).unwrap();
        ps.place(TaskId(1), 0, 1.0, &g).unwrap();
        assert_eq!(makespan(&ps.finish().unwrap()), 0.0);
    }

    #[test]
    fn incomplete_schedule_is_rejected() {
        let g = chain(1.0);
        let mut ps = PartialSchedule::new(&g);
        ps.place(TaskId(0), 0, 1.0, &g).unwrap();
        assert!(matches!(ps.finish(), Err(Error::IncompleteSchedule(_))));
    }

    fn replica(task: usize, processor: usize) -> Replica<f64> {
        Replica {
            task: TaskId(task),
            processor,
            frequency: 1.0,
            start: 0.0,
            finish: 0.0,
        }
    }

    /// Platform whose processor `k` has reliability `rel[k]` for a task of
    /// unit execution time at maximum frequency.
    fn rel_platform(rel: &[f64]) -> (TaskGraph<f64>, Platform<f64>) {
        let mut raw = RawGraph::new(rel.len());
        raw.add_task("t", vec![1.0; rel.len()]);
        let g = augment(raw).unwrap();
        let procs = rel.iter().map(|r| proc(-r.ln())).collect();
        (g, Platform::new(procs, 1e-4).unwrap())
    }

    #[test]
    fn task_reliability_examples() {
        let (g, pl) = rel_platform(&[0.9, 0.9]);
        assert_relative_eq!(task_reliability(&[replica(1, 0)], &g, &pl).unwrap(), 0.9, epsilon = 1e-14);
        assert_relative_eq!(
            task_reliability(&[replica(1, 0), replica(1, 1)], &g, &pl).unwrap(),
            0.99,
            epsilon = 1e-14
        );
        let (g, pl) = rel_platform(&[0.9, 0.99, 0.999]);
        let all = [replica(1, 0), replica(1, 1), replica(1, 2)];
        assert_relative_eq!(task_reliability(&all, &g, &pl).unwrap(), 0.999999, epsilon = 1e-13);
        assert!(matches!(
            task_reliability(&[replica(1, 0), replica(1, 0)], &g, &pl),
            Err(Error::DuplicateProcessor { .. })
        ));
    }

    #[test]
    fn schedule_reliability_of_two_tasks() {
        let mut raw = RawGraph::new(2);
        raw.add_task("a", vec![1.0, 1.0]);
        raw.add_task("b", vec![1.0, 1.0]);
        let g = augment(raw).unwrap();
        let pl = Platform::new(vec![proc(-(0.99f64).ln()), proc(-(0.98f64).ln())], 1e-4).unwrap();
        let mut ps = PartialSchedule::new(&g);
        ps.place(TaskId(0), 0, 1.0, &g).unwrap();
        ps.place(TaskId(1), 0, 1.0, &g).unwrap();
        ps.place(TaskId(2), 1, 1.0, &g).unwrap();
        ps.place(TaskId(3), 0, 1.0, &g).unwrap();
        let s = ps.finish().unwrap();
        assert_relative_eq!(schedule_reliability(&s, &g, &pl).unwrap(), 0.9702, epsilon = 1e-13);
    }

    #[test]
    fn zero_cost_schedule_is_perfectly_reliable_and_free() {
        let g = augment(RawGraph::<f64>::new(2)).unwrap();
        let pl = platform(2);
        let mut ps = PartialSchedule::new(&g);
        ps.place(TaskId(0), 1, 1.0, &g).unwrap();
        ps.place(TaskId(1), 0, 1.0, &g).unwrap();
        let s = ps.finish().unwrap();
        assert_eq!(schedule_reliability(&s, &g, &pl).unwrap(), 1.0);
        assert_eq!(schedule_energy(&s, &g, &pl), 0.0);
    }

    #[test]
    fn energy_sums_replicas() {
        let mut raw = RawGraph::new(2);
        raw.add_task("t", vec![10.0, 10.0]);
        let g = augment(raw).unwrap();
        let pl = platform(2);
        let mut ps = PartialSchedule::new(&g);
        ps.place(TaskId(0), 0, 1.0, &g).unwrap();
        ps.place(TaskId(1), 0, 1.0, &g).unwrap();
        ps.place(TaskId(1), 1, 0.5, &g).unwrap();
        ps.place(TaskId(2), 0, 1.0, &g).unwrap();
        let s = ps.finish().unwrap();
        assert_relative_eq!(schedule_energy(&s, &g, &pl), 27.5, epsilon = 1e-12);
    }

    #[test]
    fn classify_examples() {
        let (g, pl) = rel_platform(&[0.9, 0.8]);
        let max = ReliabilityMaxima::compute(&g, &pl);
        assert_eq!(max.classify(max.non_ft()), ConstraintScenario::NonFaultTolerant);
        assert_eq!(max.classify(0.95), ConstraintScenario::FaultTolerant);
        assert_eq!(max.classify(0.985), ConstraintScenario::Infeasible);
        assert_eq!(max.classify(1.0), ConstraintScenario::Infeasible);

        // a maximum that rounds to 1.0 in linear space still rejects 1.0
        let (g, pl) = rel_platform(&[1.0 - 1e-9; 4]);
        let max = ReliabilityMaxima::compute(&g, &pl);
        assert_eq!(max.ft(), 1.0);
        assert_eq!(classify(&g, &pl, 1.0), ConstraintScenario::Infeasible);
    }

    #[test]
    fn retime_matches_construction() {
        let g = chain(5.0);
        let mut ps = PartialSchedule::new(&g);
        ps.place(TaskId(0), 0, 1.0, &g).unwrap();
        ps.place(TaskId(1), 0, 1.0, &g).unwrap();
        ps.place(TaskId(2), 1, 1.0, &g).unwrap();
        ps.place(TaskId(3), 0, 1.0, &g).unwrap();
        let s = ps.finish().unwrap();
        let mut again = s.clone();
        again.retime(&g).unwrap();
        assert_eq!(s, again);
        validate(&s, &g, &platform(2)).unwrap();

        again.set_frequency(TaskId(1), 0, 0.5);
        again.retime(&g).unwrap();
        assert_eq!(again.replicas(TaskId(1))[0].finish, 20.0);
        assert_eq!(again.replicas(TaskId(2))[0].start, 25.0);
    }

    #[test]
    fn validate_catches_overlap_and_precedence() {
        let g = chain(5.0);
        let pl = platform(2);
        let mut ps = PartialSchedule::new(&g);
        ps.place(TaskId(0), 0, 1.0, &g).unwrap();
        ps.place(TaskId(1), 0, 1.0, &g).unwrap();
        ps.place(TaskId(2), 1, 1.0, &g).unwrap();
        ps.place(TaskId(3), 0, 1.0, &g).unwrap();
        let s = ps.finish().unwrap();
        let mut reps: Vec<Vec<Replica<f64>>> = g.tasks().map(|t| s.replicas(t).to_vec()).collect();
        reps[2][0].start = 12.0;
        reps[2][0].finish = 16.0;
        let bad = Schedule::from_parts(reps, s.order().to_vec()).unwrap();
        assert!(validate(&bad, &g, &pl).is_err());
    }
}
