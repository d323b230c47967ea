//! Knob-space autotuning against quality and cost, with Pareto extraction.
//!
//! Configurations are vectors of indices into each knob's ordered domain.
//! [`suggest_next`] is a pure function of the history and a seed, so tuning
//! campaigns replay exactly.

mod objective;
mod surrogate;

use std::collections::HashSet;

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use objective::{evaluate, Objective, SyntheticSurface};
pub use surrogate::{
    candidate_pool, expected_improvement, suggest_next, Prediction, Surrogate, CANDIDATES, INITIAL_DESIGN,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TuneError {
    #[error("invalid config: {0}")]
    InvalidConfig(String),
    #[error("invalid knob space: {0}")]
    InvalidSpace(String),
    #[error("objective failed: {0}")]
    Objective(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Knob {
    pub name: String,
    /// Ordered domain. Enumerations use their ordinal.
    pub values: Vec<f64>,
}

impl Knob {
    pub fn new(name: &str, values: &[f64]) -> Self {
        Self { name: name.to_string(), values: values.to_vec() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KnobSpace {
    pub knobs: Vec<Knob>,
}

pub type Config = Vec<usize>;

impl KnobSpace {
    pub fn new(knobs: Vec<Knob>) -> Result<Self, TuneError> {
        let s = Self { knobs };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<(), TuneError> {
        if self.knobs.is_empty() {
            return Err(TuneError::InvalidSpace("no knobs".into()));
        }
        let mut names = HashSet::new();
        for k in &self.knobs {
            if k.values.is_empty() {
                return Err(TuneError::InvalidSpace(format!("knob {} has an empty domain", k.name)));
            }
            if !names.insert(k.name.as_str()) {
                return Err(TuneError::InvalidSpace(format!("duplicate knob {}", k.name)));
            }
        }
        Ok(())
    }

    /// Eleven docking-pipeline knobs with roughly 61 million combinations.
    pub fn default_space() -> Self {
        let k = Knob::new;
        Self {
            knobs: vec![
                k("restarts", &[1.0, 2.0, 3.0, 4.0, 6.0, 8.0, 12.0, 16.0]),
                k("diversity_delta", &[0.25, 0.5, 0.75, 1.0, 1.5, 2.0, 2.5, 3.0]),
                k("filter_top_k", &[1.0, 2.0, 3.0, 5.0, 8.0]),
                k("filter_threshold", &[-1.0, -0.5, 0.0, 0.25, 0.5, 1.0, 1.5, 2.0]),
                k("torsion_grid", &[0.0, 6.0, 12.0, 24.0, 36.0]),
                k("batch_classes", &[1.0, 2.0, 3.0, 6.0]),
                k("line_search_steps", &[50.0, 100.0, 200.0, 300.0, 500.0]),
                k("initial_step", &[0.1, 0.25, 0.5, 1.0]),
                k("step_shrink", &[0.3, 0.5, 0.7]),
                k("gradient_tolerance", &[1e-3, 1e-4, 1e-5, 1e-6]),
                k("max_start_attempts", &[1.0, 5.0, 10.0, 25.0, 50.0]),
            ],
        }
    }

    pub fn len(&self) -> usize {
        self.knobs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.knobs.is_empty()
    }

    /// Number of configurations, saturating at `u128::MAX`.
    pub fn cardinality(&self) -> u128 {
        self.knobs.iter().fold(1u128, |acc, k| acc.saturating_mul(k.values.len() as u128))
    }

    pub fn check(&self, config: &[usize]) -> Result<(), TuneError> {
        if config.len() != self.knobs.len() {
            return Err(TuneError::InvalidConfig(format!("{} values for {} knobs", config.len(), self.knobs.len())));
        }
        for (k, (&i, knob)) in config.iter().zip(&self.knobs).enumerate() {
            if i >= knob.values.len() {
                return Err(TuneError::InvalidConfig(format!(
                    "knob {k} ({}) index {i} outside 0..{}",
                    knob.name,
                    knob.values.len()
                )));
            }
        }
        Ok(())
    }

    pub fn value(&self, config: &[usize], name: &str) -> Option<f64> {
        let k = self.knobs.iter().position(|k| k.name == name)?;
        Some(self.knobs[k].values[config[k]])
    }

    /// Coordinates in `[0, 1]` per knob.
    pub fn normalize(&self, config: &[usize]) -> Vec<f64> {
        config
            .iter()
            .zip(&self.knobs)
            .map(|(&i, k)| if k.values.len() > 1 { i as f64 / (k.values.len() - 1) as f64 } else { 0.0 })
            .collect()
    }

    pub fn random_config<R: Rng>(&self, rng: &mut R) -> Config {
        self.knobs.iter().map(|k| rng.gen_range(0..k.values.len())).collect()
    }

    /// Every configuration in lexicographic order, when there are at most
    /// `limit` of them.
    pub fn enumerate(&self, limit: u128) -> Option<Vec<Config>> {
        if self.cardinality() > limit {
            return None;
        }
        let mut out = vec![vec![0; self.knobs.len()]];
        for (k, knob) in self.knobs.iter().enumerate() {
            out = out
                .into_iter()
                .flat_map(|c| {
                    (0..knob.values.len()).map(move |i| {
                        let mut c = c.clone();
                        c[k] = i;
                        c
                    })
                })
                .collect();
        }
        Some(out)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Observation {
    pub config: Config,
    /// Lower is better.
    pub quality: f64,
    /// Seconds.
    pub cost: f64,
}

fn dominates(a: &Observation, b: &Observation) -> bool {
    a.quality <= b.quality && a.cost <= b.cost && (a.quality < b.quality || a.cost < b.cost)
}

/// Non-dominated observations under (quality, cost), both minimized, sorted
/// by cost then quality, with repeated points collapsed.
pub fn pareto_front(history: &[Observation]) -> Vec<Observation> {
    let mut front: Vec<Observation> =
        history.iter().filter(|o| !history.iter().any(|p| dominates(p, o))).cloned().collect();
    front.sort_by(|a, b| a.cost.total_cmp(&b.cost).then(a.quality.total_cmp(&b.quality)));
    front.dedup_by(|a, b| a.cost == b.cost && a.quality == b.quality);
    front
}

/// `cost,quality,dominated` per observation, in history order.
pub fn front_csv(history: &[Observation]) -> String {
    let mut s = String::from("cost,quality,dominated\n");
    for o in history {
        let dominated = history.iter().any(|p| dominates(p, o));
        s.push_str(&format!("{},{},{}\n", o.cost, o.quality, dominated));
    }
    s
}

/// Suggest, evaluate and append `evals` times.
pub fn run_tuning<O: Objective + ?Sized>(
    space: &KnobSpace,
    objective: &O,
    evals: usize,
    budget: Option<f64>,
    seed: u64,
) -> Result<Vec<Observation>, TuneError> {
    let mut history = Vec::with_capacity(evals);
    for _ in 0..evals {
        let config = suggest_next(space, &history, budget, seed);
        history.push(evaluate(space, &config, objective)?);
    }
    Ok(history)
}

/// Uniform random configurations, skipping repeats while possible.
pub fn random_search<O: Objective + ?Sized>(
    space: &KnobSpace,
    objective: &O,
    evals: usize,
    seed: u64,
) -> Result<Vec<Observation>, TuneError> {
    let mut rng = crate::seed::rng(crate::seed::derive(seed, "tune.random"));
    let mut seen = HashSet::new();
    let mut history = Vec::with_capacity(evals);
    for _ in 0..evals {
        let mut c = space.random_config(&mut rng);
        for _ in 0..100 {
            if !seen.contains(&c) {
                break;
            }
            c = space.random_config(&mut rng);
        }
        seen.insert(c.clone());
        history.push(evaluate(space, &c, objective)?);
    }
    Ok(history)
}

pub fn best_quality(history: &[Observation]) -> Option<f64> {
    history.iter().map(|o| o.quality).min_by(f64::total_cmp)
}
