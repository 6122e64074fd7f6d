//! Reliability- and energy-aware scheduling of DAG workflows on
//! heterogeneous DVFS multiprocessors.
//!
//! The crate is generic over the scalar type ([`Real`], implemented for
//! `f32` and `f64`); the aliases below fix it to `f64`, which the harness
//! and CLI use.
//!
//! ```
//! use relsched::{generate_fft, random_platform, mert, fa, FaConfig, GeneratorConfig, MertConfig, ReliabilityMaxima};
//!
//! let graph = generate_fft::<f64>(3, &GeneratorConfig::default().with_processors(8)).unwrap();
//! let platform = random_platform(8, &Default::default(), 7).unwrap();
//! let r_req = 0.95 * ReliabilityMaxima::compute(&graph, &platform).non_ft();
//! let alloc = mert(&graph, &platform, r_req, &MertConfig::default()).unwrap();
//! let (schedule, report) = fa(&alloc.schedule, &graph, &platform, r_req, &FaConfig::default()).unwrap();
//! assert!(report.reliability_after >= r_req);
//! assert!(report.energy_after <= report.energy_before);
//! # let _ = schedule;
//! ```

pub mod error;
pub mod frequency;
pub mod graph;
pub mod harness;
pub mod platform;
pub mod reliability;
pub mod scalar;
pub mod schedule;
pub mod schedulers;

pub use error::{Error, Result};
pub use frequency::{fa, solve_boundary_frequency, Boundary, FaConfig, FaReport, FaStep, FaStop};
pub use graph::{augment, generate_fft, generate_ge, GeneratorConfig, RawGraph, TaskId};
pub use harness::{run_sweep, ExperimentConfig, ExperimentReport, Mode, Workload};
pub use platform::{random_platform, ParameterRanges, Processor};
pub use reliability::{up_rank, ReliabilityPlan};
pub use scalar::Real;
pub use schedule::{classify, makespan, schedule_energy, schedule_reliability, simulate, validate, ConstraintScenario, ReliabilityMaxima, Replica};
pub use schedulers::{eafts, eft, maxre, mert, mert_sweep, mr, rr, AllocationResult, Algorithm, MertConfig, MertGrid};

pub type TaskGraph<T = f64> = graph::TaskGraph<T>;
pub type Platform<T = f64> = platform::Platform<T>;
pub type Schedule<T = f64> = schedule::Schedule<T>;

pub type TaskGraph64 = graph::TaskGraph<f64>;
pub type TaskGraph32 = graph::TaskGraph<f32>;
pub type Platform64 = platform::Platform<f64>;
pub type Platform32 = platform::Platform<f32>;
pub type Schedule64 = schedule::Schedule<f64>;
pub type Schedule32 = schedule::Schedule<f32>;
