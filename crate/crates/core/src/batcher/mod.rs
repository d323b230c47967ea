//! Size-class batching against an abstract device model.
//!
//! Ligands are bucketed by (heavy atoms, rotatable bonds). Each class gets a
//! fixed launch size: as many worst-case items of that class as fit in device
//! memory. A buffer is flushed when it reaches its launch size, or when its
//! oldest item has waited longer than the flush age.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::chem::Ligand;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum BatchError {
    #[error("ligand with {atoms} atoms and {rotbonds} rotatable bonds is outside every size class")]
    OutOfRange { atoms: usize, rotbonds: usize },
    #[error("worst-case item needs {item} memory units, device offers {available}")]
    ItemTooLarge { item: u64, available: u64 },
    #[error("invalid device model: {0}")]
    InvalidDevice(String),
    #[error("invalid class table: {0}")]
    InvalidClasses(String),
}

/// Abstract accelerator: memory budget plus a linear launch/service time model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeviceModel {
    pub memory_capacity: u64,
    pub mem_fixed: u64,
    pub mem_per_atom: u64,
    pub mem_per_rotbond: u64,
    /// Seconds per kernel launch.
    pub launch_overhead: f64,
    /// Seconds per item: `base + per_atom * atom_hi + per_rotbond * rotbond_hi`.
    pub service_base: f64,
    pub service_per_atom: f64,
    pub service_per_rotbond: f64,
}

impl Default for DeviceModel {
    /// Synthetic parameters, not calibrated against real hardware.
    fn default() -> Self {
        Self {
            memory_capacity: 16_000_000,
            mem_fixed: 1_000_000,
            mem_per_atom: 2_000,
            mem_per_rotbond: 8_000,
            launch_overhead: 0.010,
            service_base: 0.0002,
            service_per_atom: 0.00002,
            service_per_rotbond: 0.00005,
        }
    }
}

impl DeviceModel {
    pub fn validate(&self) -> Result<(), BatchError> {
        if self.memory_capacity <= self.mem_fixed {
            return Err(BatchError::InvalidDevice("memory_capacity must exceed mem_fixed".into()));
        }
        let times = [self.launch_overhead, self.service_base, self.service_per_atom, self.service_per_rotbond];
        if times.iter().any(|t| !(*t >= 0.0) || !t.is_finite()) {
            return Err(BatchError::InvalidDevice("time parameters must be finite and non-negative".into()));
        }
        Ok(())
    }

    /// Worst-case memory for one item of `class`.
    pub fn item_memory(&self, class: &SizeClass) -> u64 {
        self.mem_per_atom * class.atoms.1 as u64 + self.mem_per_rotbond * class.rotbonds.1 as u64
    }

    pub fn service_time(&self, class: &SizeClass) -> f64 {
        self.service_base
            + self.service_per_atom * class.atoms.1 as f64
            + self.service_per_rotbond * class.rotbonds.1 as f64
    }

    /// Simulated duration of one launch of `n` items.
    pub fn batch_time(&self, n: usize, class: &SizeClass) -> f64 {
        self.launch_overhead + n as f64 * self.service_time(class)
    }
}

/// Half-open descriptor box `[lo, hi)` over atoms and rotatable bonds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SizeClass {
    pub atoms: (usize, usize),
    pub rotbonds: (usize, usize),
}

impl SizeClass {
    pub fn new(atoms: (usize, usize), rotbonds: (usize, usize)) -> Self {
        Self { atoms, rotbonds }
    }

    pub fn contains(&self, atoms: usize, rotbonds: usize) -> bool {
        (self.atoms.0..self.atoms.1).contains(&atoms) && (self.rotbonds.0..self.rotbonds.1).contains(&rotbonds)
    }

    fn area(&self) -> u128 {
        (self.atoms.1 - self.atoms.0) as u128 * (self.rotbonds.1 - self.rotbonds.0) as u128
    }

    fn overlaps(&self, other: &SizeClass) -> bool {
        self.atoms.0 < other.atoms.1
            && other.atoms.0 < self.atoms.1
            && self.rotbonds.0 < other.rotbonds.1
            && other.rotbonds.0 < self.rotbonds.1
    }
}

/// Atoms {[1,20),[20,40),[40,80)} x rotatable bonds {[0,4),[4,12)}.
pub fn default_classes() -> Vec<SizeClass> {
    let mut v = Vec::new();
    for atoms in [(1, 20), (20, 40), (40, 80)] {
        for rot in [(0, 4), (4, 12)] {
            v.push(SizeClass::new(atoms, rot));
        }
    }
    v
}

/// Classes must be non-empty, pairwise disjoint and tile their bounding box.
pub fn validate_classes(classes: &[SizeClass]) -> Result<(), BatchError> {
    if classes.is_empty() {
        return Err(BatchError::InvalidClasses("no classes".into()));
    }
    for (i, c) in classes.iter().enumerate() {
        if c.atoms.0 >= c.atoms.1 || c.rotbonds.0 >= c.rotbonds.1 {
            return Err(BatchError::InvalidClasses(format!("class {i} is empty")));
        }
        for (j, d) in classes.iter().enumerate().skip(i + 1) {
            if c.overlaps(d) {
                return Err(BatchError::InvalidClasses(format!("classes {i} and {j} overlap")));
            }
        }
    }
    let lo_a = classes.iter().map(|c| c.atoms.0).min().unwrap_or(0);
    let hi_a = classes.iter().map(|c| c.atoms.1).max().unwrap_or(0);
    let lo_r = classes.iter().map(|c| c.rotbonds.0).min().unwrap_or(0);
    let hi_r = classes.iter().map(|c| c.rotbonds.1).max().unwrap_or(0);
    let covered: u128 = classes.iter().map(SizeClass::area).sum();
    if covered != SizeClass::new((lo_a, hi_a), (lo_r, hi_r)).area() {
        return Err(BatchError::InvalidClasses("classes leave gaps in their bounding box".into()));
    }
    Ok(())
}

pub fn size_class_of(atoms: usize, rotbonds: usize, classes: &[SizeClass]) -> Result<usize, BatchError> {
    classes.iter().position(|c| c.contains(atoms, rotbonds)).ok_or(BatchError::OutOfRange { atoms, rotbonds })
}

pub fn size_class(ligand: &Ligand, classes: &[SizeClass]) -> Result<usize, BatchError> {
    size_class_of(ligand.heavy_atoms, ligand.rotatable_bonds, classes)
}

/// Items of `class` per launch: `floor((capacity - fixed) / worst_case_item)`,
/// at least one.
pub fn target_batch_size(class: &SizeClass, dev: &DeviceModel) -> Result<usize, BatchError> {
    dev.validate()?;
    let available = dev.memory_capacity - dev.mem_fixed;
    let item = dev.item_memory(class);
    if item > available {
        return Err(BatchError::ItemTooLarge { item, available });
    }
    if item == 0 {
        return Err(BatchError::InvalidDevice("per-item memory is zero; batch size is unbounded".into()));
    }
    Ok(((available / item) as usize).max(1))
}

/// Items per second for launches of `n` items.
pub fn simulate_throughput(n: usize, class: &SizeClass, dev: &DeviceModel) -> f64 {
    n as f64 / dev.batch_time(n, class)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FlushReason {
    Full,
    Aged,
    Drain,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Batch {
    pub class: usize,
    pub items: Vec<String>,
    pub reason: FlushReason,
    /// Simulated time of the flush, seconds.
    pub time: f64,
}

/// Per-class FIFO buffers with fixed flush sizes.
#[derive(Debug, Clone)]
pub struct BatchQueue {
    classes: Vec<SizeClass>,
    targets: Vec<usize>,
    buffers: Vec<Vec<(String, f64)>>,
    max_age: f64,
}

impl BatchQueue {
    pub const DEFAULT_MAX_AGE: f64 = 1.0;

    pub fn new(classes: Vec<SizeClass>, dev: &DeviceModel) -> Result<Self, BatchError> {
        validate_classes(&classes)?;
        let targets = classes.iter().map(|c| target_batch_size(c, dev)).collect::<Result<Vec<_>, _>>()?;
        let buffers = vec![Vec::new(); classes.len()];
        Ok(Self { classes, targets, buffers, max_age: Self::DEFAULT_MAX_AGE })
    }

    pub fn with_max_age(mut self, seconds: f64) -> Self {
        self.max_age = seconds;
        self
    }

    pub fn classes(&self) -> &[SizeClass] {
        &self.classes
    }

    pub fn targets(&self) -> &[usize] {
        &self.targets
    }

    pub fn buffered(&self, class: usize) -> usize {
        self.buffers[class].len()
    }

    /// Buffer `id` at simulated time `now`; returns the batch if its class
    /// buffer reached the launch size.
    pub fn enqueue(&mut self, id: impl Into<String>, class: usize, now: f64) -> Option<Batch> {
        self.buffers[class].push((id.into(), now));
        if self.buffers[class].len() >= self.targets[class] {
            Some(self.take(class, FlushReason::Full, now))
        } else {
            None
        }
    }

    pub fn enqueue_ligand(&mut self, ligand: &Ligand, now: f64) -> Result<Option<Batch>, BatchError> {
        let class = size_class(ligand, &self.classes)?;
        Ok(self.enqueue(ligand.id.clone(), class, now))
    }

    /// Flush classes whose oldest item is older than the flush age.
    pub fn flush_aged(&mut self, now: f64) -> Vec<Batch> {
        (0..self.buffers.len())
            .filter(|&c| self.buffers[c].first().is_some_and(|(_, t)| now - t > self.max_age))
            .collect::<Vec<_>>()
            .into_iter()
            .map(|c| self.take(c, FlushReason::Aged, now))
            .collect()
    }

    pub fn drain(&mut self, now: f64) -> Vec<Batch> {
        (0..self.buffers.len())
            .filter(|&c| !self.buffers[c].is_empty())
            .collect::<Vec<_>>()
            .into_iter()
            .map(|c| self.take(c, FlushReason::Drain, now))
            .collect()
    }

    fn take(&mut self, class: usize, reason: FlushReason, now: f64) -> Batch {
        let items = std::mem::take(&mut self.buffers[class]).into_iter().map(|(id, _)| id).collect();
        Batch { class, items, reason, time: now }
    }
}

/// Stream `(id, class)` items arriving every `interarrival` seconds through a
/// queue, returning every batch in flush order.
pub fn batch_stream(
    queue: &mut BatchQueue,
    items: impl IntoIterator<Item = (String, usize)>,
    interarrival: f64,
) -> Vec<Batch> {
    let mut out = Vec::new();
    let mut now = 0.0;
    for (k, (id, class)) in items.into_iter().enumerate() {
        now = k as f64 * interarrival;
        out.extend(queue.flush_aged(now));
        out.extend(queue.enqueue(id, class, now));
    }
    out.extend(queue.drain(now));
    out
}
