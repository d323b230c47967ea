//! Sub-node task scheduling over simulated multi-resource workers.
//!
//! [`Scheduler`] is the live state machine: submit task sets, assign ready
//! tasks to workers, report completions. [`run_simulation`] drives it with a
//! discrete-event loop in integer microseconds, including automatic
//! allocation requests to a simulated job manager.

mod scheduler;
mod sim;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use scheduler::{Assignment, Scheduler, SubmitOutcome, WorkerState};
pub use sim::{run_simulation, EventKind, Trace, TraceEvent, Utilization};

/// Simulated time in microseconds.
pub type Micros = u64;

pub fn to_micros(seconds: f64) -> Micros {
    (seconds.max(0.0) * 1e6).round() as Micros
}

pub fn to_seconds(us: Micros) -> f64 {
    us as f64 / 1e6
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SchedError {
    #[error("duplicate task id {0:?}")]
    DuplicateId(String),
    #[error("dependency cycle among tasks {0:?}")]
    CycleDetected(Vec<String>),
    #[error("task {task:?} depends on unknown task {dependency:?}")]
    UnknownDependency { task: String, dependency: String },
    #[error("invalid task {0:?}: request must be positive in at least one dimension")]
    EmptyRequest(String),
    #[error("unknown task {0:?}")]
    UnknownTask(String),
    #[error("task {0:?} is not running")]
    NotRunning(String),
    #[error("worker capacity must be positive in at least one dimension")]
    EmptyWorker,
    #[error("{} task(s) can never run: {tasks:?}", tasks.len())]
    Starvation { tasks: Vec<String> },
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Resources {
    #[serde(default)]
    pub cpus: u32,
    #[serde(default)]
    pub accel: u32,
    #[serde(default)]
    pub memory: u64,
}

impl Resources {
    pub const fn new(cpus: u32, accel: u32, memory: u64) -> Self {
        Self { cpus, accel, memory }
    }

    pub const fn cpus(n: u32) -> Self {
        Self { cpus: n, accel: 0, memory: 0 }
    }

    pub fn is_zero(&self) -> bool {
        self.cpus == 0 && self.accel == 0 && self.memory == 0
    }

    pub fn fits_in(&self, free: &Resources) -> bool {
        self.cpus <= free.cpus && self.accel <= free.accel && self.memory <= free.memory
    }

    pub fn saturating_sub(&self, o: &Resources) -> Resources {
        Resources {
            cpus: self.cpus.saturating_sub(o.cpus),
            accel: self.accel.saturating_sub(o.accel),
            memory: self.memory.saturating_sub(o.memory),
        }
    }

    pub fn add(&self, o: &Resources) -> Resources {
        Resources { cpus: self.cpus + o.cpus, accel: self.accel + o.accel, memory: self.memory + o.memory }
    }

    /// Sum over dimensions of `self / capacity`, skipping dimensions the
    /// capacity lacks.
    pub fn normalized_l1(&self, capacity: &Resources) -> f64 {
        let mut s = 0.0;
        if capacity.cpus > 0 {
            s += f64::from(self.cpus) / f64::from(capacity.cpus);
        }
        if capacity.accel > 0 {
            s += f64::from(self.accel) / f64::from(capacity.accel);
        }
        if capacity.memory > 0 {
            s += self.memory as f64 / capacity.memory as f64;
        }
        s
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Task {
    pub id: String,
    #[serde(default)]
    pub resources: Resources,
    #[serde(default)]
    pub deps: Vec<String>,
    #[serde(default)]
    pub stage: String,
    /// Simulated run time, seconds.
    pub duration: f64,
}

impl Task {
    pub fn new(id: impl Into<String>, resources: Resources, duration: f64) -> Self {
        Self { id: id.into(), resources, deps: Vec::new(), stage: String::new(), duration }
    }

    pub fn with_deps<S: Into<String>>(mut self, deps: impl IntoIterator<Item = S>) -> Self {
        self.deps = deps.into_iter().map(Into::into).collect();
        self
    }

    pub fn with_stage(mut self, stage: impl Into<String>) -> Self {
        self.stage = stage.into();
        self
    }

    pub fn duration_us(&self) -> Micros {
        to_micros(self.duration)
    }
}

/// Input description of a worker; runtime state lives in [`WorkerState`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Worker {
    pub id: usize,
    pub capacity: Resources,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AllocState {
    Queued,
    Granted,
    Expired,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Allocation {
    pub workers: usize,
    pub shape: Resources,
    /// Seconds a granted worker accepts new tasks.
    pub walltime: f64,
    pub state: AllocState,
}

/// When and what to request from the job manager.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AllocPolicy {
    /// Request once ready work that fits `shape` exceeds this many
    /// (cpu + accel)-seconds.
    pub backlog_threshold: f64,
    pub shape: Resources,
    #[serde(default = "one")]
    pub workers_per_allocation: usize,
    pub walltime: f64,
    pub max_queued: usize,
    /// Seconds between request and grant.
    #[serde(default)]
    pub grant_delay: f64,
    /// Extra uniform random delay in `[0, grant_jitter)` seconds.
    #[serde(default)]
    pub grant_jitter: f64,
}

fn one() -> usize {
    1
}

impl AllocPolicy {
    pub fn allocation(&self) -> Allocation {
        Allocation {
            workers: self.workers_per_allocation,
            shape: self.shape,
            walltime: self.walltime,
            state: AllocState::Queued,
        }
    }
}
