//! Seeded FFT and Gaussian-elimination benchmark workflows.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{augment, RawGraph, TaskGraph};
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Cost distributions for generated workflows.
///
/// Execution times are uniform integers in `[wcet_min, wcet_max]`, drawn per
/// task and processor. Edge weights are uniform in `[0, 2 * ccr * mean]`,
/// where `mean` is the mean of the drawn execution times, so the expected
/// edge weight is `ccr` times the mean execution time.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GeneratorConfig {
    pub num_processors: usize,
    pub seed: u64,
    pub wcet_min: u32,
    pub wcet_max: u32,
    pub ccr: f64,
}

impl Default for GeneratorConfig {
    fn default() -> Self {
        Self {
            num_processors: 32,
            seed: 0,
            wcet_min: 10,
            wcet_max: 100,
            ccr: 1.0,
        }
    }
}

impl GeneratorConfig {
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_processors(mut self, m: usize) -> Self {
        self.num_processors = m;
        self
    }

    fn validate(&self) -> Result<()> {
        if self.num_processors == 0 {
            return Err(Error::InvalidParameter("num_processors must be >= 1".into()));
        }
        if self.wcet_min == 0 || self.wcet_min > self.wcet_max {
            return Err(Error::InvalidParameter(format!(
                "wcet range [{}, {}] must be positive and ordered",
                self.wcet_min, self.wcet_max
            )));
        }
        if !self.ccr.is_finite() || self.ccr < 0.0 {
            return Err(Error::InvalidParameter(format!("ccr {} must be >= 0", self.ccr)));
        }
        Ok(())
    }

    fn weigh<T: Real>(&self, names: Vec<String>, edges: Vec<(usize, usize)>) -> Result<TaskGraph<T>> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let m = self.num_processors;
        let wcet: Vec<Vec<T>> = names
            .iter()
            .map(|_| {
                (0..m)
                    .map(|_| T::lit(f64::from(rng.gen_range(self.wcet_min..=self.wcet_max))))
                    .collect()
            })
            .collect();
        let total: f64 = wcet.iter().flatten().map(|v| v.to_f64_lossy()).sum();
        let mean = total / (names.len() * m) as f64;
        let upper = 2.0 * self.ccr * mean;
        let edges = edges
            .into_iter()
            .map(|(a, b)| {
                let w = if upper > 0.0 { rng.gen_range(0.0..=upper) } else { 0.0 };
                (a, b, T::lit(w))
            })
            .collect();
        augment(RawGraph {
            num_processors: m,
            names,
            wcet,
            edges,
        })
    }
}

/// Recursive FFT workflow over `2^rho` points.
///
/// A binary tree of `2^(rho+1) - 1` recursive-call tasks splits the input
/// down to `2^rho` leaves, followed by `rho` butterfly stages of `2^rho`
/// tasks each; stage `s` task `j` reads tasks `j` and `j ^ 2^(s-1)` of the
/// previous stage. Real task count is `(2 + rho) * 2^rho - 1`.
pub fn generate_fft<T: Real>(rho: u32, cfg: &GeneratorConfig) -> Result<TaskGraph<T>> {
    if rho < 1 {
        return Err(Error::InvalidParameter("FFT rho must be >= 1".into()));
    }
    if rho > 20 {
        return Err(Error::InvalidParameter(format!("FFT rho {rho} is too large")));
    }
    cfg.validate()?;
    let width = 1usize << rho;
    let mut names = Vec::new();
    let mut edges = Vec::new();

    // tree level d holds 2^d nodes; node i at level d starts at 2^d - 1
    for d in 0..=rho {
        for i in 0..(1usize << d) {
            names.push(format!("rec{d}_{i}"));
            if d > 0 {
                let parent = (1usize << (d - 1)) - 1 + i / 2;
                let me = (1usize << d) - 1 + i;
                edges.push((parent, me));
            }
        }
    }
    let mut prev: Vec<usize> = (0..width).map(|i| width - 1 + i).collect();
    for s in 1..=rho {
        let base = names.len();
        let stride = 1usize << (s - 1);
        for j in 0..width {
            names.push(format!("bfly{s}_{j}"));
            edges.push((prev[j], base + j));
            edges.push((prev[j ^ stride], base + j));
        }
        prev = (base..base + width).collect();
    }
    cfg.weigh(names, edges)
}

/// Gaussian-elimination workflow on a `rho x rho` matrix.
///
/// Level `k` (1-based, `k < rho`) has one pivot task feeding `rho - k`
/// update tasks. The first update feeds the next pivot and update `j`
/// feeds update `j - 1` of the next level. Real task count is
/// `(rho^2 + rho - 2) / 2`.
pub fn generate_ge<T: Real>(rho: u32, cfg: &GeneratorConfig) -> Result<TaskGraph<T>> {
    if rho < 2 {
        return Err(Error::InvalidParameter("GE rho must be >= 2".into()));
    }
    if rho > 2048 {
        return Err(Error::InvalidParameter(format!("GE rho {rho} is too large")));
    }
    cfg.validate()?;
    let rho = rho as usize;
    let mut names = Vec::new();
    let mut edges = Vec::new();
    let mut prev_updates: Vec<usize> = Vec::new();
    for k in 1..rho {
        let pivot = names.len();
        names.push(format!("pivot{k}"));
        if let Some(&first) = prev_updates.first() {
            edges.push((first, pivot));
        }
        let mut updates = Vec::with_capacity(rho - k);
        for j in 0..rho - k {
            let u = names.len();
            names.push(format!("update{k}_{}", j + 1));
            edges.push((pivot, u));
            if let Some(&p) = prev_updates.get(j + 1) {
                edges.push((p, u));
            }
            updates.push(u);
        }
        prev_updates = updates;
    }
    cfg.weigh(names, edges)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg() -> GeneratorConfig {
        GeneratorConfig::default().with_processors(4).with_seed(7)
    }

    #[test]
    fn fft_small_counts() {
        for (rho, n) in [(1, 5), (3, 39), (5, 223)] {
            let g: TaskGraph<f64> = generate_fft(rho, &cfg()).unwrap();
            assert_eq!(g.real_task_count(), n, "rho={rho}");
        }
    }

    #[test]
    fn ge_small_counts() {
        for (rho, n) in [(2, 2), (5, 14), (20, 209)] {
            let g: TaskGraph<f64> = generate_ge(rho, &cfg()).unwrap();
            assert_eq!(g.real_task_count(), n, "rho={rho}");
        }
    }

    #[test]
    fn fft_has_single_source_and_wide_sink_layer() {
        let g: TaskGraph<f64> = generate_fft(3, &cfg()).unwrap();
        assert_eq!(g.successors(g.entry()).len(), 1);
        assert_eq!(g.predecessors(g.exit()).len(), 8);
    }

    #[test]
    fn ge_is_single_source_single_sink() {
        let g: TaskGraph<f64> = generate_ge(6, &cfg()).unwrap();
        assert_eq!(g.successors(g.entry()).len(), 1);
        assert_eq!(g.predecessors(g.exit()).len(), 1);
    }

    #[test]
    fn invalid_rho_is_rejected() {
        assert!(generate_fft::<f64>(0, &cfg()).is_err());
        assert!(generate_ge::<f64>(1, &cfg()).is_err());
    }

    #[test]
    fn costs_follow_config() {
        let g: TaskGraph<f64> = generate_ge(10, &cfg()).unwrap();
        for t in g.tasks().skip(1).take(g.real_task_count()) {
            for &w in g.wcet_row(t) {
                assert!((10.0..=100.0).contains(&w) && w.fract() == 0.0);
            }
        }
        let a: TaskGraph<f64> = generate_ge(10, &cfg()).unwrap();
        assert_eq!(a, g);
        let b: TaskGraph<f64> = generate_ge(10, &cfg().with_seed(8)).unwrap();
        assert_ne!(a, b);
    }

    #[test]
    fn edge_weights_track_ccr() {
        let mut c = cfg();
        c.ccr = 2.0;
        let g: TaskGraph<f64> = generate_fft(6, &c).unwrap();
        let real: Vec<f64> = g
            .edges()
            .iter()
            .filter(|e| e.from != g.entry() && e.to != g.exit())
            .map(|e| e.weight)
            .collect();
        let mean_w = real.iter().sum::<f64>() / real.len() as f64;
        // mean wcet is about 55, so the edge mean should sit near 110
        assert!((80.0..140.0).contains(&mean_w), "{mean_w}");
    }
}
