use std::cmp::Reverse;
use std::collections::{BTreeMap, BTreeSet, HashMap};

use super::{AllocPolicy, Allocation, Micros, Resources, SchedError, Task};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Status {
    Waiting,
    Ready,
    Running(usize),
    Finished,
}

#[derive(Debug, Clone)]
struct Entry {
    task: Task,
    duration: Micros,
    status: Status,
    unfinished_deps: usize,
    dependents: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct WorkerState {
    pub id: usize,
    pub capacity: Resources,
    pub free: Resources,
    pub running: BTreeSet<String>,
    /// Draining workers take no new tasks and vanish once idle.
    pub draining: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Assignment {
    pub task: String,
    pub worker: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SubmitOutcome {
    pub submitted: Vec<String>,
    pub ready: Vec<String>,
}

/// LPT + best-fit scheduler state. One mutator at a time.
#[derive(Debug, Clone, Default)]
pub struct Scheduler {
    entries: Vec<Entry>,
    index: HashMap<String, usize>,
    ready: BTreeSet<(Reverse<Micros>, String)>,
    workers: BTreeMap<usize, WorkerState>,
    finished: usize,
}

impl Scheduler {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_worker(&mut self, id: usize, capacity: Resources) -> Result<(), SchedError> {
        if capacity.is_zero() {
            return Err(SchedError::EmptyWorker);
        }
        let w = WorkerState { id, capacity, free: capacity, running: BTreeSet::new(), draining: false };
        self.workers.insert(id, w);
        Ok(())
    }

    pub fn workers(&self) -> impl Iterator<Item = &WorkerState> {
        self.workers.values()
    }

    pub fn worker(&self, id: usize) -> Option<&WorkerState> {
        self.workers.get(&id)
    }

    pub fn next_worker_id(&self) -> usize {
        self.workers.keys().next_back().map_or(0, |k| k + 1)
    }

    pub fn task(&self, id: &str) -> Option<&Task> {
        self.index.get(id).map(|&i| &self.entries[i].task)
    }

    pub fn task_count(&self) -> usize {
        self.entries.len()
    }

    pub fn finished_count(&self) -> usize {
        self.finished
    }

    pub fn all_finished(&self) -> bool {
        self.finished == self.entries.len()
    }

    /// Ready, unassigned tasks in scheduling order.
    pub fn ready_ids(&self) -> Vec<String> {
        self.ready.iter().map(|(_, id)| id.clone()).collect()
    }

    pub fn unfinished_ids(&self) -> Vec<String> {
        let mut v: Vec<_> =
            self.entries.iter().filter(|e| e.status != Status::Finished).map(|e| e.task.id.clone()).collect();
        v.sort();
        v
    }

    /// Register tasks. Dependencies may point into the same submission or at
    /// previously submitted tasks.
    pub fn submit(&mut self, tasks: Vec<Task>) -> Result<SubmitOutcome, SchedError> {
        let mut local: HashMap<&str, usize> = HashMap::new();
        for (k, t) in tasks.iter().enumerate() {
            if t.resources.is_zero() {
                return Err(SchedError::EmptyRequest(t.id.clone()));
            }
            if self.index.contains_key(&t.id) || local.insert(&t.id, k).is_some() {
                return Err(SchedError::DuplicateId(t.id.clone()));
            }
        }
        for t in &tasks {
            for d in &t.deps {
                if !local.contains_key(d.as_str()) && !self.index.contains_key(d) {
                    return Err(SchedError::UnknownDependency { task: t.id.clone(), dependency: d.clone() });
                }
            }
        }
        // Kahn's algorithm restricted to the new tasks; old tasks cannot
        // depend on new ones, so any cycle lies inside the submission.
        let mut indeg: Vec<usize> =
            tasks.iter().map(|t| t.deps.iter().filter(|d| local.contains_key(d.as_str())).count()).collect();
        let mut children: Vec<Vec<usize>> = vec![Vec::new(); tasks.len()];
        for (k, t) in tasks.iter().enumerate() {
            for d in &t.deps {
                if let Some(&p) = local.get(d.as_str()) {
                    children[p].push(k);
                }
            }
        }
        let mut stack: Vec<usize> = (0..tasks.len()).filter(|&k| indeg[k] == 0).collect();
        let mut seen = 0;
        while let Some(k) = stack.pop() {
            seen += 1;
            for &c in &children[k] {
                indeg[c] -= 1;
                if indeg[c] == 0 {
                    stack.push(c);
                }
            }
        }
        if seen < tasks.len() {
            let mut ids: Vec<String> =
                (0..tasks.len()).filter(|&k| indeg[k] > 0).map(|k| tasks[k].id.clone()).collect();
            ids.sort();
            return Err(SchedError::CycleDetected(ids));
        }

        let base = self.entries.len();
        let mut out = SubmitOutcome::default();
        for t in tasks {
            let k = self.entries.len();
            self.index.insert(t.id.clone(), k);
            out.submitted.push(t.id.clone());
            let duration = t.duration_us();
            self.entries.push(Entry {
                task: t,
                duration,
                status: Status::Waiting,
                unfinished_deps: 0,
                dependents: Vec::new(),
            });
        }
        for k in base..self.entries.len() {
            let deps = self.entries[k].task.deps.clone();
            let mut unfinished = 0;
            for d in deps {
                let p = self.index[&d];
                if self.entries[p].status != Status::Finished {
                    unfinished += 1;
                    self.entries[p].dependents.push(k);
                }
            }
            self.entries[k].unfinished_deps = unfinished;
            if unfinished == 0 {
                self.make_ready(k);
                out.ready.push(self.entries[k].task.id.clone());
            }
        }
        Ok(out)
    }

    fn make_ready(&mut self, k: usize) {
        let e = &mut self.entries[k];
        e.status = Status::Ready;
        self.ready.insert((Reverse(e.duration), e.task.id.clone()));
    }

    /// Assign ready tasks, longest first, each to the feasible worker with the
    /// largest normalized free capacity. Afterwards no ready task fits any
    /// non-draining worker.
    pub fn schedule_tick(&mut self) -> Vec<Assignment> {
        let mut out = Vec::new();
        if self.workers.values().all(|w| w.draining) {
            return out;
        }
        let order: Vec<(Reverse<Micros>, String)> = self.ready.iter().cloned().collect();
        for key in order {
            let k = self.index[&key.1];
            let req = self.entries[k].task.resources;
            let mut best: Option<(f64, usize)> = None;
            for w in self.workers.values() {
                if w.draining || !req.fits_in(&w.free) {
                    continue;
                }
                let score = w.free.normalized_l1(&w.capacity);
                if best.is_none_or(|(s, _)| score > s) {
                    best = Some((score, w.id));
                }
            }
            if let Some((_, wid)) = best {
                let w = self.workers.get_mut(&wid).expect("worker exists");
                w.free = w.free.saturating_sub(&req);
                w.running.insert(key.1.clone());
                self.entries[k].status = Status::Running(wid);
                self.ready.remove(&key);
                out.push(Assignment { task: key.1, worker: wid });
            }
        }
        out
    }

    /// Mark a running task finished, release its reservation and return the
    /// dependents that became ready.
    pub fn complete(&mut self, id: &str) -> Result<Vec<String>, SchedError> {
        let k = *self.index.get(id).ok_or_else(|| SchedError::UnknownTask(id.to_string()))?;
        let Status::Running(wid) = self.entries[k].status else {
            return Err(SchedError::NotRunning(id.to_string()));
        };
        let req = self.entries[k].task.resources;
        if let Some(w) = self.workers.get_mut(&wid) {
            w.free = w.free.add(&req);
            w.running.remove(id);
        }
        self.entries[k].status = Status::Finished;
        self.finished += 1;
        let mut newly = Vec::new();
        for c in self.entries[k].dependents.clone() {
            self.entries[c].unfinished_deps -= 1;
            if self.entries[c].unfinished_deps == 0 {
                self.make_ready(c);
                newly.push(self.entries[c].task.id.clone());
            }
        }
        Ok(newly)
    }

    /// Stop giving `id` new work. Returns true if the worker is idle and was
    /// removed.
    pub fn drain_worker(&mut self, id: usize) -> bool {
        match self.workers.get_mut(&id) {
            Some(w) => {
                w.draining = true;
                if w.running.is_empty() {
                    self.workers.remove(&id);
                    true
                } else {
                    false
                }
            }
            None => false,
        }
    }

    /// Remove the worker if it is draining and idle.
    pub fn reap_worker(&mut self, id: usize) -> bool {
        if self.workers.get(&id).is_some_and(|w| w.draining && w.running.is_empty()) {
            self.workers.remove(&id);
            true
        } else {
            false
        }
    }

    pub fn running_on(&self, task: &str) -> Option<usize> {
        match self.entries[*self.index.get(task)?].status {
            Status::Running(w) => Some(w),
            _ => None,
        }
    }

    /// (cpu + accel)-seconds of ready, unassigned work that fits `shape`.
    pub fn pending_resource_seconds(&self, shape: &Resources) -> f64 {
        self.ready
            .iter()
            .map(|(_, id)| &self.entries[self.index[id]])
            .filter(|e| e.task.resources.fits_in(shape))
            .map(|e| (e.duration as f64 / 1e6) * f64::from(e.task.resources.cpus + e.task.resources.accel))
            .sum()
    }

    /// Emit one allocation request when the backlog exceeds the policy
    /// threshold and fewer than `max_queued` requests are outstanding.
    pub fn autoalloc_tick(&self, policy: &AllocPolicy, queued: usize) -> Vec<Allocation> {
        if queued < policy.max_queued && self.pending_resource_seconds(&policy.shape) > policy.backlog_threshold {
            vec![policy.allocation()]
        } else {
            Vec::new()
        }
    }

    /// Ready tasks that fit no live worker and no shape in `extra_shapes`.
    pub fn unplaceable(&self, extra_shapes: &[Resources]) -> Vec<String> {
        self.ready
            .iter()
            .filter(|(_, id)| {
                let req = self.entries[self.index[id]].task.resources;
                !self.workers.values().any(|w| req.fits_in(&w.capacity)) && !extra_shapes.iter().any(|s| req.fits_in(s))
            })
            .map(|(_, id)| id.clone())
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::super::AllocState;
    use super::*;

    fn unit(id: &str) -> Task {
        Task::new(id, Resources::cpus(1), 1.0)
    }

    #[test]
    fn submit_empty_and_chain() {
        let mut s = Scheduler::new();
        assert!(s.submit(vec![]).unwrap().ready.is_empty());
        let out = s.submit(vec![unit("a"), unit("b").with_deps(["a"]), unit("c").with_deps(["b"])]).unwrap();
        assert_eq!(out.ready, vec!["a"]);
        assert_eq!(s.ready_ids(), vec!["a"]);
    }

    #[test]
    fn submit_errors() {
        let mut s = Scheduler::new();
        let err = s.submit(vec![unit("a").with_deps(["b"]), unit("b").with_deps(["a"])]).unwrap_err();
        assert_eq!(err, SchedError::CycleDetected(vec!["a".into(), "b".into()]));
        assert_eq!(s.task_count(), 0);
        assert_eq!(s.submit(vec![unit("a"), unit("a")]).unwrap_err(), SchedError::DuplicateId("a".into()));
        s.submit(vec![unit("x")]).unwrap();
        assert_eq!(s.submit(vec![unit("x")]).unwrap_err(), SchedError::DuplicateId("x".into()));
        assert!(matches!(s.submit(vec![unit("y").with_deps(["nope"])]), Err(SchedError::UnknownDependency { .. })));
        assert!(matches!(s.submit(vec![Task::new("z", Resources::default(), 1.0)]), Err(SchedError::EmptyRequest(_))));
    }

    #[test]
    fn later_submission_depends_on_finished_task() {
        let mut s = Scheduler::new();
        s.add_worker(0, Resources::cpus(1)).unwrap();
        s.submit(vec![unit("a")]).unwrap();
        s.schedule_tick();
        s.complete("a").unwrap();
        let out = s.submit(vec![unit("b").with_deps(["a"])]).unwrap();
        assert_eq!(out.ready, vec!["b"]);
    }

    #[test]
    fn tick_is_lpt_and_best_fit() {
        let mut s = Scheduler::new();
        s.add_worker(0, Resources::cpus(2)).unwrap();
        s.add_worker(1, Resources::cpus(4)).unwrap();
        s.submit(vec![
            Task::new("short", Resources::cpus(1), 1.0),
            Task::new("long", Resources::cpus(2), 5.0),
            Task::new("mid", Resources::cpus(2), 3.0),
        ])
        .unwrap();
        let a = s.schedule_tick();
        // both workers fully free: tie goes to worker 0
        assert_eq!(a[0], Assignment { task: "long".into(), worker: 0 });
        assert_eq!(a[1], Assignment { task: "mid".into(), worker: 1 });
        assert_eq!(a[2], Assignment { task: "short".into(), worker: 1 });
        assert!(s.schedule_tick().is_empty());
    }

    #[test]
    fn tick_ties_break_by_lowest_task_id() {
        let mut s = Scheduler::new();
        s.add_worker(0, Resources::cpus(1)).unwrap();
        s.submit(vec![unit("b"), unit("a")]).unwrap();
        assert_eq!(s.schedule_tick()[0].task, "a");
    }

    #[test]
    fn tick_is_work_conserving_with_mixed_requests() {
        let mut s = Scheduler::new();
        s.add_worker(0, Resources::new(4, 1, 100)).unwrap();
        s.submit(vec![
            Task::new("gpu", Resources::new(1, 1, 10), 9.0),
            Task::new("gpu2", Resources::new(1, 1, 10), 8.0),
            Task::new("big", Resources::new(1, 0, 95), 7.0),
            Task::new("small", Resources::new(2, 0, 50), 1.0),
        ])
        .unwrap();
        let a = s.schedule_tick();
        let ids: Vec<_> = a.iter().map(|x| x.task.as_str()).collect();
        assert_eq!(ids, vec!["gpu", "small"]);
        let w = s.worker(0).unwrap();
        for id in s.ready_ids() {
            assert!(!s.task(&id).unwrap().resources.fits_in(&w.free));
        }
    }

    #[test]
    fn autoalloc_policy() {
        let policy = AllocPolicy {
            backlog_threshold: 100.0,
            shape: Resources::cpus(8),
            workers_per_allocation: 1,
            walltime: 60.0,
            max_queued: 2,
            grant_delay: 0.0,
            grant_jitter: 0.0,
        };
        let mut s = Scheduler::new();
        assert!(s.autoalloc_tick(&policy, 0).is_empty());
        s.submit((0..1000).map(|i| unit(&format!("t{i:04}"))).collect()).unwrap();
        assert!((s.pending_resource_seconds(&policy.shape) - 1000.0).abs() < 1e-9);
        let req = s.autoalloc_tick(&policy, 0);
        assert_eq!(req.len(), 1);
        assert_eq!(req[0].state, AllocState::Queued);
        assert!(s.autoalloc_tick(&policy, 2).is_empty());
    }
}
