//! Exhaustive minimum-energy search for tiny instances.
//!
//! Every task independently picks a non-empty processor subset and one grid
//! frequency per chosen processor. Energy and log-reliability are both
//! additive over tasks, so per-task Pareto frontiers are merged pairwise
//! instead of enumerating the full cross product.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::TaskGraph;
use crate::platform::Platform;
use crate::scalar::{failure_from_log, log_success_from_failure, Real};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct OracleLimits {
    pub max_tasks: usize,
    pub max_processors: usize,
    /// Grid frequencies per processor.
    pub max_grid_points: usize,
}

impl Default for OracleLimits {
    fn default() -> Self {
        Self {
            max_tasks: 6,
            max_processors: 3,
            max_grid_points: 16,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OracleResult<T> {
    /// Minimum energy over all assignments with reliability `>= r_req`.
    pub energy: Option<T>,
    pub log_reliability: Option<T>,
    /// Best log-reliability over every assignment.
    pub log_max: T,
}

impl<T> OracleResult<T> {
    pub fn feasible(&self) -> bool {
        self.energy.is_some()
    }
}

/// (energy, log-reliability) pairs, energy ascending, reliability strictly ascending.
type Frontier<T> = Vec<(T, T)>;

fn prune<T: Real>(mut points: Vec<(T, T)>) -> Frontier<T> {
    points.sort_by(|a, b| {
        a.0.partial_cmp(&b.0)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(b.1.partial_cmp(&a.1).unwrap_or(std::cmp::Ordering::Equal))
    });
    let mut out: Frontier<T> = Vec::new();
    for p in points {
        if out.last().is_none_or(|last| p.1 > last.1) {
            out.push(p);
        }
    }
    out
}

fn task_frontier<T: Real>(graph: &TaskGraph<T>, platform: &Platform<T>, task: crate::graph::TaskId) -> Frontier<T> {
    let m = platform.len();
    // per processor: (energy, ln q) at each grid frequency
    let per_proc: Vec<Vec<(T, T)>> = (0..m)
        .map(|k| {
            let p = platform.processor(k);
            let w = graph.wcet(task, k);
            (0..=platform.grid_len(k))
                .map(|g| {
                    let f = platform.grid_frequency(k, g);
                    (p.energy_at(w, f), failure_from_log(p.log_reliability_at(w, f)).ln())
                })
                .collect()
        })
        .collect();
    let mut points = Vec::new();
    for mask in 1u32..(1 << m) {
        let chosen: Vec<usize> = (0..m).filter(|k| mask & (1 << k) != 0).collect();
        let mut idx = vec![0usize; chosen.len()];
        loop {
            let (mut e, mut lq) = (T::zero(), T::zero());
            for (c, &k) in chosen.iter().enumerate() {
                let (ek, qk) = per_proc[k][idx[c]];
                e = e + ek;
                lq = lq + qk;
            }
            points.push((e, log_success_from_failure(lq.exp())));
            // odometer over the chosen processors' grids
            let mut c = 0;
            while c < idx.len() {
                idx[c] += 1;
                if idx[c] < per_proc[chosen[c]].len() {
                    break;
                }
                idx[c] = 0;
                c += 1;
            }
            if c == idx.len() {
                break;
            }
        }
    }
    prune(points)
}

/// Minimum energy at reliability `>= r_req` over every replica set and grid
/// frequency assignment, ignoring makespan.
pub fn brute_force_oracle<T: Real>(
    graph: &TaskGraph<T>,
    platform: &Platform<T>,
    r_req: T,
    limits: &OracleLimits,
) -> Result<OracleResult<T>> {
    let m = platform.len();
    let n = graph.real_task_count();
    let grid = (0..m).map(|k| platform.grid_len(k) + 1).max().unwrap_or(0);
    if n > limits.max_tasks || m > limits.max_processors || grid > limits.max_grid_points {
        return Err(Error::LimitsExceeded(format!(
            "oracle limited to {} tasks, {} processors, {} grid points; got {n}, {m}, {grid}",
            limits.max_tasks, limits.max_processors, limits.max_grid_points
        )));
    }
    if graph.num_processors() != m {
        return Err(Error::InvalidParameter("graph and platform processor counts differ".into()));
    }
    let frontiers: Vec<Frontier<T>> = graph
        .tasks()
        .filter(|&t| (0..m).any(|k| !graph.wcet(t, k).is_zero()))
        .map(|t| task_frontier(graph, platform, t))
        .collect();
    let log_r_req = r_req.ln();
    // suffix sums of per-task maxima bound what the remaining tasks can add
    let mut rest = vec![T::zero(); frontiers.len() + 1];
    for i in (0..frontiers.len()).rev() {
        rest[i] = rest[i + 1] + frontiers[i].last().map(|p| p.1).unwrap_or(T::zero());
    }
    let log_max = rest[0];
    let mut acc: Frontier<T> = vec![(T::zero(), T::zero())];
    for (i, f) in frontiers.iter().enumerate() {
        let mut next = Vec::with_capacity(acc.len() * f.len());
        for &(ea, la) in &acc {
            for &(eb, lb) in f {
                let l = la + lb;
                if l + rest[i + 1] >= log_r_req {
                    next.push((ea + eb, l));
                }
            }
        }
        acc = prune(next);
    }
    let best = acc.iter().find(|p| p.1 >= log_r_req).copied();
    Ok(OracleResult {
        energy: best.map(|p| p.0),
        log_reliability: best.map(|p| p.1),
        log_max,
    })
}
