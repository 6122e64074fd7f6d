//! Heterogeneous DVFS processors: power, energy and transient-fault models.
//!
//! Frequencies are normalized so every processor tops out at `1`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// One processor's frequency range, power constants and fault constants.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound(deserialize = "T: Real"))]
pub struct Processor<T> {
    pub f_min: T,
    /// Frequency-independent power.
    pub p_static: T,
    /// Switching constant of the dynamic term `c * f^alpha`.
    pub c: T,
    pub alpha: T,
    /// Fault rate at maximum frequency.
    pub lambda0: T,
    /// Fault sensitivity to frequency scaling.
    pub d: T,
}

impl<T: Real> Processor<T> {
    pub fn validate(&self) -> Result<()> {
        let ok = self.f_min > T::zero()
            && self.f_min < T::one()
            && self.p_static > T::zero()
            && self.c > T::zero()
            && self.alpha > T::one()
            && self.lambda0 > T::zero()
            && self.d > T::zero();
        let finite = [self.f_min, self.p_static, self.c, self.alpha, self.lambda0, self.d]
            .iter()
            .all(|v| v.is_finite());
        if ok && finite {
            Ok(())
        } else {
            Err(Error::InvalidPlatform(format!("processor constants out of range: {self:?}")))
        }
    }

    fn check(&self, id: usize, f: T) -> Result<()> {
        if f >= self.f_min && f <= T::one() {
            Ok(())
        } else {
            Err(Error::InvalidFrequency {
                processor: id,
                frequency: f.to_f64_lossy(),
                f_min: self.f_min.to_f64_lossy(),
            })
        }
    }

    /// `p_static + c * f^alpha`; no range check.
    #[inline]
    pub fn power_at(&self, f: T) -> T {
        self.p_static + self.c * f.powf(self.alpha)
    }

    /// Energy of `wcet` units of work at frequency `f`; no range check.
    #[inline]
    pub fn energy_at(&self, wcet: T, f: T) -> T {
        if wcet.is_zero() {
            return T::zero();
        }
        self.power_at(f) * (wcet / f)
    }

    /// `lambda0 * 10^(d (1 - f) / (1 - f_min))`; no range check.
    #[inline]
    pub fn fault_rate_at(&self, f: T) -> T {
        let exponent = self.d * (T::one() - f) / (T::one() - self.f_min);
        self.lambda0 * T::lit(10.0).powf(exponent)
    }

    /// Expected fault count `lambda(f) * wcet / f`, i.e. `-ln(reliability)`.
    #[inline]
    pub fn fault_exposure(&self, wcet: T, f: T) -> T {
        if wcet.is_zero() {
            return T::zero();
        }
        self.fault_rate_at(f) * (wcet / f)
    }

    #[inline]
    pub fn log_reliability_at(&self, wcet: T, f: T) -> T {
        -self.fault_exposure(wcet, f)
    }
}

/// Processor set plus the discrete frequency grid used for scaling.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound(deserialize = "T: Real"))]
pub struct Platform<T> {
    pub processors: Vec<Processor<T>>,
    pub frequency_step: T,
}

impl<T: Real> Platform<T> {
    pub fn new(processors: Vec<Processor<T>>, frequency_step: T) -> Result<Self> {
        let p = Self {
            processors,
            frequency_step,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if self.processors.is_empty() {
            return Err(Error::InvalidPlatform("no processors".into()));
        }
        if !(self.frequency_step > T::zero() && self.frequency_step <= T::one()) {
            return Err(Error::InvalidPlatform(format!(
                "frequency step {} must lie in (0, 1]",
                self.frequency_step
            )));
        }
        for p in &self.processors {
            p.validate()?;
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.processors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.processors.is_empty()
    }

    #[inline]
    pub fn processor(&self, id: usize) -> &Processor<T> {
        &self.processors[id]
    }

    pub fn power(&self, id: usize, f: T) -> Result<T> {
        let p = &self.processors[id];
        p.check(id, f)?;
        Ok(p.power_at(f))
    }

    pub fn energy(&self, id: usize, wcet: T, f: T) -> Result<T> {
        let p = &self.processors[id];
        p.check(id, f)?;
        if wcet < T::zero() {
            return Err(Error::InvalidParameter(format!("negative execution time {wcet}")));
        }
        Ok(p.energy_at(wcet, f))
    }

    pub fn fault_rate(&self, id: usize, f: T) -> Result<T> {
        let p = &self.processors[id];
        p.check(id, f)?;
        Ok(p.fault_rate_at(f))
    }

    pub fn reliability(&self, id: usize, wcet: T, f: T) -> Result<T> {
        let p = &self.processors[id];
        p.check(id, f)?;
        if wcet < T::zero() {
            return Err(Error::InvalidParameter(format!("negative execution time {wcet}")));
        }
        Ok(p.log_reliability_at(wcet, f).exp())
    }

    /// Number of grid steps below `1` that stay at or above `f_min`.
    pub fn grid_len(&self, id: usize) -> usize {
        let span = (T::one() - self.processors[id].f_min) / self.frequency_step;
        // tolerate f_min values that sit on the grid up to rounding
        (span + T::lit(1e-9)).floor().to_usize().unwrap_or(0)
    }

    /// Frequency at grid index `k`: `1 - k * step`.
    #[inline]
    pub fn grid_frequency(&self, id: usize, k: usize) -> T {
        let f = T::one() - T::from_count(k) * self.frequency_step;
        f.max(self.processors[id].f_min)
    }

    /// Smallest grid frequency at or above `f`, clamped to the valid range.
    pub fn snap_up(&self, id: usize, f: T) -> T {
        let k = ((T::one() - f) / self.frequency_step + T::lit(1e-9)).floor();
        let k = k.max(T::zero()).to_usize().unwrap_or(0).min(self.grid_len(id));
        self.grid_frequency(id, k)
    }
}

/// Inclusive sampling ranges for [`random_platform`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ParameterRanges {
    pub p_static: (f64, f64),
    pub c: (f64, f64),
    pub f_min: (f64, f64),
    /// Upper clamp applied to sampled `f_min`, keeping `1 - f_min` away from 0.
    pub f_min_cap: f64,
    pub alpha: (f64, f64),
    pub lambda0: (f64, f64),
    pub d: (f64, f64),
    pub frequency_step: f64,
}

impl Default for ParameterRanges {
    fn default() -> Self {
        Self {
            p_static: (0.4, 0.8),
            c: (0.8, 1.3),
            f_min: (0.3, 1.0),
            f_min_cap: 0.9,
            alpha: (2.7, 3.0),
            lambda0: (1e-6, 1e-5),
            d: (1.0, 3.0),
            frequency_step: 1e-4,
        }
    }
}

impl ParameterRanges {
    fn validate(&self) -> Result<()> {
        let ranges = [
            ("p_static", self.p_static),
            ("c", self.c),
            ("f_min", self.f_min),
            ("alpha", self.alpha),
            ("lambda0", self.lambda0),
            ("d", self.d),
        ];
        for (name, (lo, hi)) in ranges {
            if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
                return Err(Error::InvalidParameter(format!("range {name} = [{lo}, {hi}] is empty")));
            }
        }
        if self.f_min.0 <= 0.0 || self.f_min_cap >= 1.0 || self.f_min.0 > self.f_min_cap {
            return Err(Error::InvalidParameter(format!(
                "f_min range [{}, {}] with cap {} leaves no valid value",
                self.f_min.0, self.f_min.1, self.f_min_cap
            )));
        }
        if self.alpha.0 <= 1.0 || self.p_static.0 <= 0.0 || self.c.0 <= 0.0 || self.lambda0.0 <= 0.0 || self.d.0 <= 0.0 {
            return Err(Error::InvalidParameter("power and fault constants must be positive, alpha > 1".into()));
        }
        if !(self.frequency_step > 0.0 && self.frequency_step <= 1.0) {
            return Err(Error::InvalidParameter(format!("frequency step {}", self.frequency_step)));
        }
        Ok(())
    }
}

fn sample(rng: &mut ChaCha8Rng, (lo, hi): (f64, f64)) -> f64 {
    if lo == hi {
        lo
    } else {
        rng.gen_range(lo..=hi)
    }
}

/// Draws `m` processors uniformly from `ranges`.
///
/// Sampled `f_min` is clamped to `f_min_cap` and rounded up onto the
/// frequency grid so the lowest frequency is itself a grid point.
pub fn random_platform<T: Real>(m: usize, ranges: &ParameterRanges, seed: u64) -> Result<Platform<T>> {
    if m == 0 {
        return Err(Error::InvalidParameter("processor count must be >= 1".into()));
    }
    ranges.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let step = ranges.frequency_step;
    let processors = (0..m)
        .map(|_| {
            let p_static = sample(&mut rng, ranges.p_static);
            let c = sample(&mut rng, ranges.c);
            let f_raw = sample(&mut rng, ranges.f_min).min(ranges.f_min_cap);
            let alpha = sample(&mut rng, ranges.alpha);
            let lambda0 = sample(&mut rng, ranges.lambda0);
            let d = sample(&mut rng, ranges.d);
            let k = ((1.0 - f_raw) / step + 1e-9).floor();
            let f_min = (1.0 - k * step).min(ranges.f_min_cap.max(step));
            Processor {
                f_min: T::lit(f_min),
                p_static: T::lit(p_static),
                c: T::lit(c),
                alpha: T::lit(alpha),
                lambda0: T::lit(lambda0),
                d: T::lit(d),
            }
        })
        .collect();
    Platform::new(processors, T::lit(step))
}
