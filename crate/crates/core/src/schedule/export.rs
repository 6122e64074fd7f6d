//! JSON schedule records.
//!
//! ```json
//! {
//!   "schema": 1,
//!   "order": [0, 1, 2],
//!   "replicas": [{"task": 0, "processor": 0, "frequency": 1, "start": 0, "finish": 0}],
//!   "summary": {"makespan": 10, "energy": 15, "reliability": 0.999}
//! }
//! ```

use serde::{Deserialize, Serialize};

use super::{makespan, schedule_energy, schedule_reliability, Replica, Schedule};
use crate::error::{Error, Result};
use crate::graph::{TaskGraph, TaskId};
use crate::platform::Platform;
use crate::scalar::Real;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound(deserialize = "T: Real"))]
pub struct ScheduleSummary<T> {
    pub makespan: T,
    pub energy: T,
    pub reliability: T,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound(deserialize = "T: Real"))]
pub struct ScheduleFile<T> {
    pub schema: u32,
    pub order: Vec<TaskId>,
    pub replicas: Vec<Replica<T>>,
    pub summary: ScheduleSummary<T>,
}

impl<T: Real> ScheduleFile<T> {
    pub fn new(schedule: &Schedule<T>, graph: &TaskGraph<T>, platform: &Platform<T>) -> Result<Self> {
        Ok(Self {
            schema: 1,
            order: schedule.order().to_vec(),
            replicas: schedule.all_replicas().copied().collect(),
            summary: ScheduleSummary {
                makespan: makespan(schedule),
                energy: schedule_energy(schedule, graph, platform),
                reliability: schedule_reliability(schedule, graph, platform)?,
            },
        })
    }

    pub fn into_schedule(self) -> Result<Schedule<T>> {
        if self.schema != 1 {
            return Err(Error::InvalidSchedule(format!("unsupported schema {}", self.schema)));
        }
        let n = self.order.len();
        let mut grouped = vec![Vec::new(); n];
        for r in self.replicas {
            let slot = grouped
                .get_mut(r.task.0)
                .ok_or_else(|| Error::InvalidSchedule(format!("replica for unknown task {}", r.task)))?;
            slot.push(r);
        }
        Schedule::from_parts(grouped, self.order)
    }
}

pub fn schedule_to_json<T: Real>(schedule: &Schedule<T>, graph: &TaskGraph<T>, platform: &Platform<T>) -> Result<String> {
    let file = ScheduleFile::new(schedule, graph, platform)?;
    Ok(serde_json::to_string_pretty(&file).expect("schedule serializes"))
}

pub fn parse_schedule<T: Real>(text: &str) -> Result<ScheduleFile<T>> {
    serde_json::from_str(text).map_err(|e| Error::Parse {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })
}

pub fn schedule_from_json<T: Real>(text: &str) -> Result<Schedule<T>> {
    parse_schedule(text)?.into_schedule()
}
