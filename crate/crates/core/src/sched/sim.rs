use std::cmp::Ordering;
use std::collections::{BTreeMap, BinaryHeap};

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{
    to_micros, to_seconds, AllocPolicy, AllocState, Allocation, Micros, Resources, SchedError, Scheduler, Task, Worker,
};
use crate::seed;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EventKind {
    Submit,
    Ready,
    Assign,
    Start,
    Finish,
    AllocRequest,
    AllocGrant,
    WorkerExpire,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceEvent {
    /// Microseconds since simulation start.
    pub time: Micros,
    pub kind: EventKind,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub task: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub worker: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub alloc: Option<usize>,
    /// Stage tag, carried on submit events of tagged tasks.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub stage: Option<String>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Utilization {
    pub cpu: f64,
    pub accel: f64,
    pub memory: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trace {
    pub events: Vec<TraceEvent>,
    /// Seconds.
    pub makespan: f64,
    pub utilization: Utilization,
    pub allocations: Vec<Allocation>,
    /// Every worker that existed, including granted ones.
    pub workers: Vec<Worker>,
}

impl Trace {
    pub fn to_jsonl(&self) -> String {
        let mut s = String::new();
        for e in &self.events {
            s.push_str(&serde_json::to_string(e).expect("trace events serialize"));
            s.push('\n');
        }
        s
    }

    pub fn events_for(&self, task: &str) -> impl Iterator<Item = &TraceEvent> {
        let task = task.to_string();
        self.events.iter().filter(move |e| e.task.as_deref() == Some(task.as_str()))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Pending {
    Finish(String),
    Grant(usize),
    Expire(usize),
}

#[derive(Debug, PartialEq, Eq)]
struct Queued {
    time: Micros,
    seq: u64,
    what: Pending,
}

impl Ord for Queued {
    fn cmp(&self, o: &Self) -> Ordering {
        // min-heap on (time, seq): FIFO among equal times
        (o.time, o.seq).cmp(&(self.time, self.seq))
    }
}

impl PartialOrd for Queued {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}

struct Sim {
    sched: Scheduler,
    heap: BinaryHeap<Queued>,
    seq: u64,
    events: Vec<TraceEvent>,
    allocations: Vec<Allocation>,
    workers: Vec<Worker>,
    /// Spawn and vanish time per worker id.
    lifetimes: BTreeMap<usize, (Micros, Option<Micros>)>,
    worker_alloc: BTreeMap<usize, usize>,
    busy: [f64; 3],
}

impl Sim {
    fn push(&mut self, time: Micros, what: Pending) {
        self.seq += 1;
        self.heap.push(Queued { time, seq: self.seq, what });
    }

    fn log(&mut self, time: Micros, kind: EventKind, task: Option<&str>, worker: Option<usize>, alloc: Option<usize>) {
        self.events.push(TraceEvent { time, kind, task: task.map(str::to_string), worker, alloc, stage: None });
    }

    fn spawn(&mut self, id: usize, capacity: Resources, now: Micros) -> Result<(), SchedError> {
        self.sched.add_worker(id, capacity)?;
        self.workers.push(Worker { id, capacity });
        self.lifetimes.insert(id, (now, None));
        Ok(())
    }

    fn vanish(&mut self, id: usize, now: Micros) {
        if let Some(l) = self.lifetimes.get_mut(&id) {
            l.1 = Some(now);
        }
    }
}

/// Discrete-event simulation of `tasks` on `workers`, requesting more workers
/// through `policy` when given. Deterministic for fixed inputs and seed.
pub fn run_simulation(
    tasks: Vec<Task>,
    workers: &[Worker],
    policy: Option<&AllocPolicy>,
    seed: u64,
) -> Result<Trace, SchedError> {
    let mut rng = seed::rng(seed::derive(seed, "sched.grant"));
    let mut sim = Sim {
        sched: Scheduler::new(),
        heap: BinaryHeap::new(),
        seq: 0,
        events: Vec::new(),
        allocations: Vec::new(),
        workers: Vec::new(),
        lifetimes: BTreeMap::new(),
        worker_alloc: BTreeMap::new(),
        busy: [0.0; 3],
    };
    for w in workers {
        sim.spawn(w.id, w.capacity, 0)?;
    }
    let ids: Vec<(String, String)> = tasks.iter().map(|t| (t.id.clone(), t.stage.clone())).collect();
    let outcome = sim.sched.submit(tasks)?;
    for (id, stage) in &ids {
        sim.log(0, EventKind::Submit, Some(id), None, None);
        if !stage.is_empty() {
            sim.events.last_mut().expect("just logged").stage = Some(stage.clone());
        }
    }
    for id in &outcome.ready {
        sim.log(0, EventKind::Ready, Some(id), None, None);
    }

    let mut now: Micros = 0;
    let mut makespan: Micros = 0;
    loop {
        for a in sim.sched.schedule_tick() {
            let task = sim.sched.task(&a.task).expect("assigned task exists").clone();
            sim.log(now, EventKind::Assign, Some(&a.task), Some(a.worker), None);
            sim.log(now, EventKind::Start, Some(&a.task), Some(a.worker), None);
            let d = task.duration_us();
            let secs = to_seconds(d);
            sim.busy[0] += secs * f64::from(task.resources.cpus);
            sim.busy[1] += secs * f64::from(task.resources.accel);
            sim.busy[2] += secs * task.resources.memory as f64;
            sim.push(now + d, Pending::Finish(a.task));
        }
        if sim.sched.all_finished() {
            break;
        }
        if let Some(p) = policy {
            let queued = sim.allocations.iter().filter(|a| a.state == AllocState::Queued).count();
            for alloc in sim.sched.autoalloc_tick(p, queued) {
                let k = sim.allocations.len();
                sim.allocations.push(alloc);
                sim.log(now, EventKind::AllocRequest, None, None, Some(k));
                let jitter = if p.grant_jitter > 0.0 { rng.gen_range(0.0..p.grant_jitter) } else { 0.0 };
                sim.push(now + to_micros(p.grant_delay + jitter), Pending::Grant(k));
            }
        }
        let Some(first) = sim.heap.peek() else {
            let shapes: Vec<Resources> = policy.map(|p| vec![p.shape]).unwrap_or_default();
            let mut stuck = sim.sched.unplaceable(&shapes);
            if stuck.is_empty() {
                stuck = sim.sched.ready_ids();
            }
            if stuck.is_empty() {
                stuck = sim.sched.unfinished_ids();
            }
            return Err(SchedError::Starvation { tasks: stuck });
        };
        now = first.time;
        while sim.heap.peek().is_some_and(|q| q.time == now) {
            let q = sim.heap.pop().expect("peeked");
            match q.what {
                Pending::Finish(id) => {
                    let wid = sim.sched.running_on(&id);
                    let ready = sim.sched.complete(&id)?;
                    sim.log(now, EventKind::Finish, Some(&id), wid, None);
                    makespan = now;
                    for r in ready {
                        sim.log(now, EventKind::Ready, Some(&r), None, None);
                    }
                    if let Some(w) = wid {
                        if sim.sched.reap_worker(w) {
                            sim.vanish(w, now);
                        }
                    }
                }
                Pending::Grant(k) => {
                    sim.allocations[k].state = AllocState::Granted;
                    let (n, shape, wall) =
                        (sim.allocations[k].workers, sim.allocations[k].shape, sim.allocations[k].walltime);
                    for _ in 0..n {
                        let id = sim.lifetimes.keys().next_back().map_or(0, |k| k + 1);
                        sim.spawn(id, shape, now)?;
                        sim.worker_alloc.insert(id, k);
                        sim.log(now, EventKind::AllocGrant, None, Some(id), Some(k));
                        sim.push(now + to_micros(wall), Pending::Expire(id));
                    }
                }
                Pending::Expire(w) => {
                    sim.log(now, EventKind::WorkerExpire, None, Some(w), None);
                    if sim.sched.drain_worker(w) {
                        sim.vanish(w, now);
                    }
                    if let Some(&k) = sim.worker_alloc.get(&w) {
                        sim.allocations[k].state = AllocState::Expired;
                    }
                }
            }
        }
    }

    let span = to_seconds(makespan);
    let mut cap = [0.0f64; 3];
    for w in &sim.workers {
        let (start, end) = sim.lifetimes[&w.id];
        let end = end.unwrap_or(makespan).min(makespan);
        let alive = to_seconds(end.saturating_sub(start));
        cap[0] += alive * f64::from(w.capacity.cpus);
        cap[1] += alive * f64::from(w.capacity.accel);
        cap[2] += alive * w.capacity.memory as f64;
    }
    let frac = |b: f64, c: f64| if c > 0.0 { (b / c).clamp(0.0, 1.0) } else { 0.0 };
    Ok(Trace {
        events: sim.events,
        makespan: span,
        utilization: Utilization {
            cpu: frac(sim.busy[0], cap[0]),
            accel: frac(sim.busy[1], cap[1]),
            memory: frac(sim.busy[2], cap[2]),
        },
        allocations: sim.allocations,
        workers: sim.workers,
    })
}
