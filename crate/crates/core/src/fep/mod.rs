//! Relative and absolute binding free energies on toy alchemical models.
//!
//! Compounds are paired by maximum common substructure, each pair is
//! estimated with a flat-histogram adaptive-bias sampler over discrete
//! lambda states, and independent replicas are added until the standard
//! error reaches a target.

mod awh;
mod mcs;
mod pairing;
mod sem;

use thiserror::Error;

pub use awh::{awh_estimate, AlchemicalModel, AwhParams, AwhResult, BiasStage, LambdaState};
pub use mcs::{common_bond_count, mcs, McsMapping, MAX_MCS_ATOMS};
pub use pairing::{greedy_pairs, pair_compounds, CompoundPair};
pub use sem::{
    abfe_estimate, format_results, run_until_sem, sem, EnergySamples, FreeEnergyResult, Replica, ResultRow,
    SolvationTerms,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FepError {
    #[error("graph with {atoms} atoms exceeds the {limit}-atom limit")]
    TooLarge { atoms: usize, limit: usize },
    #[error("at least two ligands are needed, got {0}")]
    NotEnoughLigands(usize),
    #[error("non-finite energy in state {state} at x = {x}")]
    NonFiniteEnergy { state: usize, x: f64 },
    #[error("invalid alchemical model: {0}")]
    InvalidModel(String),
    #[error("too few steps: {steps} < {min}")]
    TooFewSteps { steps: usize, min: usize },
    #[error("empty sample set: {0}")]
    EmptySamples(&'static str),
    #[error("target standard error must be positive")]
    InvalidTarget,
}
