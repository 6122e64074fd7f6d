use thiserror::Error;

use crate::schedule::ConstraintScenario;

/// Errors produced by model construction, scheduling and I/O.
#[derive(Debug, Error)]
pub enum Error {
    #[error("task graph contains a cycle: {}", .0.join(" -> "))]
    Cycle(Vec<String>),

    #[error("invalid task graph: {0}")]
    InvalidGraph(String),

    #[error("wcet row for task {task} has {found} entries, expected {expected} (one per processor)")]
    WcetArity {
        task: String,
        expected: usize,
        found: usize,
    },

    #[error("invalid platform: {0}")]
    InvalidPlatform(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("frequency {frequency} outside [{f_min}, 1] for processor {processor}")]
    InvalidFrequency {
        processor: usize,
        frequency: f64,
        f_min: f64,
    },

    #[error("task {task} depends on {predecessor}, which is not scheduled yet")]
    UnscheduledPredecessor { task: usize, predecessor: usize },

    #[error("schedule is incomplete: task {0} has no replica")]
    IncompleteSchedule(usize),

    #[error("task {task} has two replicas on processor {processor}")]
    DuplicateProcessor { task: usize, processor: usize },

    #[error("invalid schedule: {0}")]
    InvalidSchedule(String),

    #[error("reliability constraint {r_req} is not satisfiable in the requested setting ({scenario:?})")]
    Scenario {
        r_req: f64,
        scenario: ConstraintScenario,
    },

    #[error("precondition violated: {0}")]
    Contract(String),

    #[error("simulation deadlocked with {0} replicas unfinished")]
    Deadlock(usize),

    #[error("brute-force limits exceeded: {0}")]
    LimitsExceeded(String),

    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
