//! Event-driven replay of a schedule.
//!
//! Processors pull replicas from their queues in dispatch order; a replica
//! starts once it heads its queue, its processor is idle, and every message
//! from every predecessor replica has arrived.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};
use crate::graph::{TaskGraph, TaskId};
use crate::platform::Platform;
use crate::scalar::Real;

use super::Schedule;

/// Simulated `(start, finish)` for each replica, indexed like
/// `schedule.replicas(task)`.
pub type ReplicaTimes<T> = Vec<Vec<(T, T)>>;

#[derive(Clone, Copy, Debug)]
enum Kind {
    Arrival,
    Finish,
}

#[derive(Clone, Copy, Debug)]
struct Event<T> {
    time: T,
    seq: u64,
    kind: Kind,
    task: TaskId,
    replica: usize,
}

impl<T: Real> PartialEq for Event<T> {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl<T: Real> Eq for Event<T> {}
impl<T: Real> PartialOrd for Event<T> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl<T: Real> Ord for Event<T> {
    // min-heap on (time, seq)
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .time
            .partial_cmp(&self.time)
            .unwrap_or(Ordering::Equal)
            .then_with(|| other.seq.cmp(&self.seq))
    }
}

struct Sim<'a, T: Real> {
    schedule: &'a Schedule<T>,
    graph: &'a TaskGraph<T>,
    queues: Vec<Vec<(TaskId, usize)>>,
    head: Vec<usize>,
    busy: Vec<bool>,
    pending: Vec<Vec<usize>>,
    times: ReplicaTimes<T>,
    heap: BinaryHeap<Event<T>>,
    seq: u64,
}

impl<'a, T: Real> Sim<'a, T> {
    fn push(&mut self, time: T, kind: Kind, task: TaskId, replica: usize) {
        self.seq += 1;
        self.heap.push(Event {
            time,
            seq: self.seq,
            kind,
            task,
            replica,
        });
    }

    fn try_start(&mut self, processor: usize, now: T) {
        if self.busy[processor] {
            return;
        }
        let Some(&(task, j)) = self.queues[processor].get(self.head[processor]) else {
            return;
        };
        if self.pending[task.0][j] > 0 {
            return;
        }
        let r = self.schedule.replicas(task)[j];
        let finish = now + self.graph.wcet(task, processor) / r.frequency;
        self.times[task.0][j] = (now, finish);
        self.busy[processor] = true;
        self.push(finish, Kind::Finish, task, j);
    }
}

/// Replays `schedule` as a discrete-event simulation and returns the
/// observed replica times. For a valid schedule these equal the analytic
/// timing recursion bit for bit.
pub fn simulate<T: Real>(schedule: &Schedule<T>, graph: &TaskGraph<T>, platform: &Platform<T>) -> Result<ReplicaTimes<T>> {
    let m = platform.len();
    let queues = schedule.processor_queues(m);
    let pending = graph
        .tasks()
        .map(|t| {
            let incoming: usize = graph
                .predecessors(t)
                .iter()
                .map(|&(p, _)| schedule.replicas(p).len())
                .sum();
            vec![incoming; schedule.replicas(t).len()]
        })
        .collect();
    let times = graph
        .tasks()
        .map(|t| vec![(T::nan(), T::nan()); schedule.replicas(t).len()])
        .collect();
    let mut sim = Sim {
        schedule,
        graph,
        queues,
        head: vec![0; m],
        busy: vec![false; m],
        pending,
        times,
        heap: BinaryHeap::new(),
        seq: 0,
    };

    for k in 0..m {
        sim.try_start(k, T::zero());
    }
    let mut finished = 0usize;
    while let Some(ev) = sim.heap.pop() {
        let now = ev.time;
        match ev.kind {
            Kind::Finish => {
                finished += 1;
                let r = schedule.replicas(ev.task)[ev.replica];
                let k = r.processor;
                sim.busy[k] = false;
                sim.head[k] += 1;
                for &(succ, w) in graph.successors(ev.task) {
                    for (j, s) in schedule.replicas(succ).iter().enumerate() {
                        let comm = if s.processor == k { T::zero() } else { w };
                        sim.push(now + comm, Kind::Arrival, succ, j);
                    }
                }
                sim.try_start(k, now);
            }
            Kind::Arrival => {
                sim.pending[ev.task.0][ev.replica] -= 1;
                let k = schedule.replicas(ev.task)[ev.replica].processor;
                sim.try_start(k, now);
            }
        }
    }
    let total = schedule.replica_count();
    if finished != total {
        return Err(Error::Deadlock(total - finished));
    }
    Ok(sim.times)
}
