//! Trace replay checks and an exhaustive P||Cmax oracle.

use std::collections::{HashMap, HashSet};

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use vscreen_core::sched::{EventKind, Micros, Resources, Task, Trace, Worker};

/// Replay `trace` and check resource safety, dependency safety and event
/// ordering. Returns a description of the first violation.
pub fn check_trace(tasks: &[Task], trace: &Trace) -> Result<(), String> {
    let by_id: HashMap<&str, &Task> = tasks.iter().map(|t| (t.id.as_str(), t)).collect();
    let caps: HashMap<usize, Resources> = trace.workers.iter().map(|w| (w.id, w.capacity)).collect();
    let mut used: HashMap<usize, Resources> = HashMap::new();
    let mut finished: HashMap<&str, Micros> = HashMap::new();
    let mut started: HashSet<&str> = HashSet::new();
    let mut last = 0;
    for e in &trace.events {
        if e.time < last {
            return Err(format!("events out of order at {}", e.time));
        }
        last = e.time;
        let Some(id) = e.task.as_deref() else { continue };
        let t = by_id.get(id).ok_or_else(|| format!("unknown task {id}"))?;
        match e.kind {
            EventKind::Start => {
                for d in &t.deps {
                    match finished.get(d.as_str()) {
                        Some(&f) if f <= e.time => {}
                        _ => return Err(format!("{id} started before dependency {d} finished")),
                    }
                }
                let w = e.worker.ok_or("start without worker")?;
                let cap = caps.get(&w).ok_or_else(|| format!("unknown worker {w}"))?;
                let u = used.entry(w).or_default();
                *u = u.add(&t.resources);
                if !u.fits_in(cap) {
                    return Err(format!("worker {w} over capacity at {}", e.time));
                }
                started.insert(t.id.as_str());
            }
            EventKind::Finish => {
                if !started.contains(id) {
                    return Err(format!("{id} finished without starting"));
                }
                let w = e.worker.ok_or("finish without worker")?;
                let u = used.get_mut(&w).ok_or("finish on idle worker")?;
                *u = u.saturating_sub(&t.resources);
                finished.insert(t.id.as_str(), e.time);
            }
            _ => {}
        }
    }
    if finished.len() != tasks.len() {
        return Err(format!("{} of {} tasks finished", finished.len(), tasks.len()));
    }
    let u = trace.utilization;
    if ![u.cpu, u.accel, u.memory].iter().all(|x| (0.0..=1.0).contains(x)) {
        return Err("utilization outside [0,1]".into());
    }
    Ok(())
}

/// Optimal makespan for independent jobs on identical machines, by full
/// enumeration of job-to-machine maps.
pub fn brute_force_makespan(durations: &[u64], machines: usize) -> u64 {
    fn go(k: usize, d: &[u64], loads: &mut [u64], best: &mut u64) {
        if k == d.len() {
            *best = (*best).min(*loads.iter().max().unwrap_or(&0));
            return;
        }
        for m in 0..loads.len() {
            loads[m] += d[k];
            go(k + 1, d, loads, best);
            loads[m] -= d[k];
        }
    }
    let mut best = u64::MAX;
    go(0, durations, &mut vec![0; machines], &mut best);
    if durations.is_empty() {
        0
    } else {
        best
    }
}

pub fn single_core_workers(n: usize) -> Vec<Worker> {
    (0..n).map(|id| Worker { id, capacity: Resources::cpus(1) }).collect()
}

/// Random multi-resource task DAG plus a cluster that can run every task.
pub fn random_instance(rng: &mut ChaCha8Rng) -> (Vec<Task>, Vec<Worker>) {
    let nw = rng.gen_range(1..=4);
    let workers: Vec<Worker> = (0..nw)
        .map(|id| Worker {
            id,
            capacity: Resources::new(rng.gen_range(2..=8), rng.gen_range(0..=2), rng.gen_range(50..=200)),
        })
        .collect();
    let nt = rng.gen_range(0..=30);
    let mut tasks: Vec<Task> = Vec::new();
    for i in 0..nt {
        let host = workers[rng.gen_range(0..workers.len())].capacity;
        let accel = if host.accel > 0 && rng.gen_bool(0.4) { rng.gen_range(1..=host.accel) } else { 0 };
        let req = Resources::new(rng.gen_range(1..=host.cpus), accel, rng.gen_range(0..=host.memory));
        let mut t = Task::new(format!("t{i:03}"), req, f64::from(rng.gen_range(1..=40)) * 0.25);
        let ndeps = if i == 0 { 0 } else { rng.gen_range(0..=2usize.min(i)) };
        let mut deps: Vec<String> = (0..ndeps).map(|_| format!("t{:03}", rng.gen_range(0..i))).collect();
        deps.sort();
        deps.dedup();
        t.deps = deps;
        tasks.push(t);
    }
    (tasks, workers)
}
