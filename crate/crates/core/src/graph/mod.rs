//! Workflow DAGs with per-processor execution times.
//!
//! A [`TaskGraph`] is always augmented: task `0` is a zero-cost entry that
//! precedes every original source, and task `n - 1` is a zero-cost exit that
//! follows every original sink. Augmentation edges carry weight zero.

mod generate;
mod io;

use std::collections::HashSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;

pub use generate::{generate_fft, generate_ge, GeneratorConfig};
pub use io::{load, load_dot, load_json, parse_dot, parse_json, save, to_dot, to_json, GraphFormat};

/// Index of a task inside a [`TaskGraph`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct TaskId(pub usize);

impl TaskId {
    #[inline]
    pub fn index(self) -> usize {
        self.0
    }
}

impl fmt::Display for TaskId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "v{}", self.0)
    }
}

/// Directed, weighted dependency between two tasks.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Edge<T> {
    pub from: TaskId,
    pub to: TaskId,
    /// Communication time when the endpoints run on different processors.
    pub weight: T,
}

/// A DAG as supplied by a user or generator, before entry/exit augmentation.
#[derive(Clone, Debug, PartialEq)]
pub struct RawGraph<T> {
    pub num_processors: usize,
    pub names: Vec<String>,
    /// `wcet[task][processor]`, execution time at maximum frequency.
    pub wcet: Vec<Vec<T>>,
    pub edges: Vec<(usize, usize, T)>,
}

impl<T: Real> RawGraph<T> {
    pub fn new(num_processors: usize) -> Self {
        Self {
            num_processors,
            names: Vec::new(),
            wcet: Vec::new(),
            edges: Vec::new(),
        }
    }

    /// Appends a task and returns its raw index.
    pub fn add_task(&mut self, name: impl Into<String>, wcet: Vec<T>) -> usize {
        self.names.push(name.into());
        self.wcet.push(wcet);
        self.names.len() - 1
    }

    pub fn add_edge(&mut self, from: usize, to: usize, weight: T) {
        self.edges.push((from, to, weight));
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }
}

/// Augmented workflow DAG. Immutable once built.
#[derive(Clone, Debug, PartialEq)]
pub struct TaskGraph<T> {
    num_processors: usize,
    names: Vec<String>,
    wcet: Vec<Vec<T>>,
    edges: Vec<Edge<T>>,
    preds: Vec<Vec<(TaskId, T)>>,
    succs: Vec<Vec<(TaskId, T)>>,
    topo: Vec<TaskId>,
}

impl<T: Real> TaskGraph<T> {
    /// Total number of tasks including entry and exit.
    pub fn len(&self) -> usize {
        self.names.len()
    }

    /// Always false: an augmented graph holds at least entry and exit.
    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    /// Number of tasks excluding the entry and exit pseudo-tasks.
    pub fn real_task_count(&self) -> usize {
        self.len() - 2
    }

    pub fn num_processors(&self) -> usize {
        self.num_processors
    }

    pub fn entry(&self) -> TaskId {
        TaskId(0)
    }

    pub fn exit(&self) -> TaskId {
        TaskId(self.len() - 1)
    }

    pub fn tasks(&self) -> impl Iterator<Item = TaskId> + '_ {
        (0..self.len()).map(TaskId)
    }

    pub fn name(&self, task: TaskId) -> &str {
        &self.names[task.0]
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    #[inline]
    pub fn wcet(&self, task: TaskId, processor: usize) -> T {
        self.wcet[task.0][processor]
    }

    pub fn wcet_row(&self, task: TaskId) -> &[T] {
        &self.wcet[task.0]
    }

    pub fn wcet_matrix(&self) -> &[Vec<T>] {
        &self.wcet
    }

    /// Mean execution time over all processors.
    pub fn mean_wcet(&self, task: TaskId) -> T {
        let row = &self.wcet[task.0];
        row.iter().copied().sum::<T>() / T::from_count(row.len())
    }

    pub fn edges(&self) -> &[Edge<T>] {
        &self.edges
    }

    pub fn predecessors(&self, task: TaskId) -> &[(TaskId, T)] {
        &self.preds[task.0]
    }

    pub fn successors(&self, task: TaskId) -> &[(TaskId, T)] {
        &self.succs[task.0]
    }

    /// A topological order with entry first and exit last.
    pub fn topological_order(&self) -> &[TaskId] {
        &self.topo
    }

    /// Returns the graph as raw input; augmenting it again is a no-op.
    pub fn to_raw(&self) -> RawGraph<T> {
        RawGraph {
            num_processors: self.num_processors,
            names: self.names.clone(),
            wcet: self.wcet.clone(),
            edges: self
                .edges
                .iter()
                .map(|e| (e.from.0, e.to.0, e.weight))
                .collect(),
        }
    }

    /// Returns a copy with an extra processor column.
    pub fn with_extra_processor(&self, column: &[T]) -> Result<Self> {
        if column.len() != self.len() {
            return Err(Error::InvalidParameter(format!(
                "new processor column has {} entries for {} tasks",
                column.len(),
                self.len()
            )));
        }
        let mut raw = self.to_raw();
        raw.num_processors += 1;
        for (row, &v) in raw.wcet.iter_mut().zip(column) {
            row.push(v);
        }
        augment(raw)
    }
}

/// Adds the entry and exit pseudo-tasks and validates the result.
///
/// Input that is already augmented (task 0 is the sole source and the last
/// task the sole sink, both with zero cost everywhere) is accepted as is.
pub fn augment<T: Real>(raw: RawGraph<T>) -> Result<TaskGraph<T>> {
    validate_shape(&raw)?;
    check_acyclic(&raw)?;

    let n = raw.len();
    let zero_row = |row: &[T]| row.iter().all(|v| v.is_zero());
    let mut in_deg = vec![0usize; n];
    let mut out_deg = vec![0usize; n];
    for &(a, b, _) in &raw.edges {
        out_deg[a] += 1;
        in_deg[b] += 1;
    }
    let sources: Vec<usize> = (0..n).filter(|&i| in_deg[i] == 0).collect();
    let sinks: Vec<usize> = (0..n).filter(|&i| out_deg[i] == 0).collect();

    let already = n >= 2
        && sources == [0]
        && sinks == [n - 1]
        && zero_row(&raw.wcet[0])
        && zero_row(&raw.wcet[n - 1]);

    if already {
        check_real_costs(&raw, 1..n - 1)?;
        return Ok(build(raw));
    }
    check_real_costs(&raw, 0..n)?;

    let m = raw.num_processors;
    let mut names = Vec::with_capacity(n + 2);
    names.push("entry".to_string());
    names.extend(raw.names);
    names.push("exit".to_string());
    let mut wcet = Vec::with_capacity(n + 2);
    wcet.push(vec![T::zero(); m]);
    wcet.extend(raw.wcet);
    wcet.push(vec![T::zero(); m]);
    let exit = n + 1;
    let mut edges: Vec<(usize, usize, T)> = raw
        .edges
        .into_iter()
        .map(|(a, b, w)| (a + 1, b + 1, w))
        .collect();
    if n == 0 {
        edges.push((0, exit, T::zero()));
    }
    edges.extend(sources.iter().map(|&s| (0, s + 1, T::zero())));
    edges.extend(sinks.iter().map(|&s| (s + 1, exit, T::zero())));

    Ok(build(RawGraph {
        num_processors: m,
        names,
        wcet,
        edges,
    }))
}

fn validate_shape<T: Real>(raw: &RawGraph<T>) -> Result<()> {
    if raw.num_processors == 0 {
        return Err(Error::InvalidGraph("processor count must be at least 1".into()));
    }
    if raw.names.len() != raw.wcet.len() {
        return Err(Error::InvalidGraph(format!(
            "{} task names but {} wcet rows",
            raw.names.len(),
            raw.wcet.len()
        )));
    }
    for (i, row) in raw.wcet.iter().enumerate() {
        if row.len() != raw.num_processors {
            return Err(Error::WcetArity {
                task: raw.names[i].clone(),
                expected: raw.num_processors,
                found: row.len(),
            });
        }
    }
    let n = raw.len();
    let mut seen = HashSet::new();
    for &(a, b, w) in &raw.edges {
        if a >= n || b >= n {
            return Err(Error::InvalidGraph(format!(
                "edge ({a}, {b}) references a task outside 0..{n}"
            )));
        }
        if !w.is_finite() || w < T::zero() {
            return Err(Error::InvalidGraph(format!(
                "edge {} -> {} has invalid weight {w}",
                raw.names[a], raw.names[b]
            )));
        }
        if !seen.insert((a, b)) {
            return Err(Error::InvalidGraph(format!(
                "duplicate edge {} -> {}",
                raw.names[a], raw.names[b]
            )));
        }
    }
    Ok(())
}

fn check_real_costs<T: Real>(raw: &RawGraph<T>, range: std::ops::Range<usize>) -> Result<()> {
    for i in range {
        for &v in &raw.wcet[i] {
            if !v.is_finite() || v <= T::zero() {
                return Err(Error::InvalidGraph(format!(
                    "task {} has non-positive execution time {v}",
                    raw.names[i]
                )));
            }
        }
    }
    Ok(())
}

/// Rejects cyclic input, reporting one cycle by task name.
fn check_acyclic<T: Real>(raw: &RawGraph<T>) -> Result<()> {
    let n = raw.len();
    let mut succ = vec![Vec::new(); n];
    for &(a, b, _) in &raw.edges {
        succ[a].push(b);
    }
    // 0 = unvisited, 1 = on stack, 2 = done
    let mut state = vec![0u8; n];
    let mut parent = vec![usize::MAX; n];
    for root in 0..n {
        if state[root] != 0 {
            continue;
        }
        let mut stack = vec![(root, 0usize)];
        state[root] = 1;
        while let Some(&mut (node, ref mut next)) = stack.last_mut() {
            if *next < succ[node].len() {
                let child = succ[node][*next];
                *next += 1;
                match state[child] {
                    0 => {
                        state[child] = 1;
                        parent[child] = node;
                        stack.push((child, 0));
                    }
                    1 => {
                        let mut cycle = vec![child];
                        let mut cur = node;
                        while cur != child {
                            cycle.push(cur);
                            cur = parent[cur];
                        }
                        cycle.reverse();
                        // rotate so the witness starts at the back-edge target
                        cycle.rotate_right(1);
                        let mut names: Vec<String> =
                            cycle.iter().map(|&i| raw.names[i].clone()).collect();
                        names.push(raw.names[child].clone());
                        return Err(Error::Cycle(names));
                    }
                    _ => {}
                }
            } else {
                state[node] = 2;
                stack.pop();
            }
        }
    }
    Ok(())
}

fn build<T: Real>(raw: RawGraph<T>) -> TaskGraph<T> {
    let n = raw.len();
    let mut preds = vec![Vec::new(); n];
    let mut succs = vec![Vec::new(); n];
    let edges: Vec<Edge<T>> = raw
        .edges
        .iter()
        .map(|&(a, b, w)| Edge {
            from: TaskId(a),
            to: TaskId(b),
            weight: w,
        })
        .collect();
    for e in &edges {
        succs[e.from.0].push((e.to, e.weight));
        preds[e.to.0].push((e.from, e.weight));
    }

    // Kahn with a min-heap keeps the order deterministic; entry (0) has no
    // predecessors and exit (n-1) is the only sink, so they land at the ends.
    let mut in_deg: Vec<usize> = preds.iter().map(Vec::len).collect();
    let mut ready: std::collections::BinaryHeap<std::cmp::Reverse<usize>> = (0..n)
        .filter(|&i| in_deg[i] == 0)
        .map(std::cmp::Reverse)
        .collect();
    let mut topo = Vec::with_capacity(n);
    while let Some(std::cmp::Reverse(i)) = ready.pop() {
        topo.push(TaskId(i));
        for &(s, _) in &succs[i] {
            in_deg[s.0] -= 1;
            if in_deg[s.0] == 0 {
                ready.push(std::cmp::Reverse(s.0));
            }
        }
    }

    TaskGraph {
        num_processors: raw.num_processors,
        names: raw.names,
        wcet: raw.wcet,
        edges,
        preds,
        succs,
        topo,
    }
}
