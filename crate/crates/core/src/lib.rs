//! Desk-scale virtual-screening campaign runtime.
//!
//! The crate is organised by pipeline stage:
//!
//! * [`chem`]: SMILES parsing, size descriptors, toy 3D embedding
//! * [`codec`]: per-line dictionary compression of SMILES libraries
//! * [`dock`]: analytic pocket field, gradient-ascent docking, rescoring
//! * [`batcher`]: size-class batching against an abstract device model
//! * [`sched`]: multi-resource sub-node task scheduler and cluster simulator
//! * [`fep`]: maximum common substructure, pairing, adaptive-bias free energies
//! * [`tune`]: knob-space autotuning and Pareto extraction
//! * [`pipeline`]: campaign orchestration and reports

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod batcher;
pub mod chem;
pub mod codec;
pub mod dock;
pub mod fep;
pub mod geom;
pub mod pipeline;
pub mod sched;
pub mod seed;
pub mod tune;

pub use chem::{Conformer, Ligand, MolecularGraph};
pub use dock::{Pocket, Pose};
pub use fep::{CompoundPair, FreeEnergyResult, McsMapping};
pub use pipeline::{CampaignConfig, CampaignReport};
pub use sched::{Allocation, Task, Trace, Worker};
pub use tune::{KnobSpace, Observation};
