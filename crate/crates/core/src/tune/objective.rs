use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::{Config, KnobSpace, Observation, TuneError};
use crate::seed;

/// Something that scores a configuration as `(quality, cost)`.
pub trait Objective: Sync {
    fn observe(&self, space: &KnobSpace, config: &[usize]) -> Result<(f64, f64), TuneError>;
}

pub fn evaluate<O: Objective + ?Sized>(
    space: &KnobSpace,
    config: &[usize],
    objective: &O,
) -> Result<Observation, TuneError> {
    space.check(config)?;
    let (quality, cost) = objective.observe(space, config)?;
    if !quality.is_finite() || !(cost >= 0.0) || !cost.is_finite() {
        return Err(TuneError::Objective(format!("bad observation quality={quality} cost={cost}")));
    }
    Ok(Observation { config: config.to_vec(), quality, cost })
}

/// Separable quadratic bowl with one pairwise interaction, a linear cost
/// model and deterministic per-config noise. The minimum of the noiseless
/// quality is `floor` at `optimum`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticSurface {
    pub optimum: Config,
    pub weights: Vec<f64>,
    /// Coefficient of `d_0 * d_1`; kept below `2 sqrt(w_0 w_1)` in magnitude.
    pub interaction: f64,
    pub floor: f64,
    pub noise: f64,
    pub noise_seed: u64,
    pub cost_base: f64,
    pub cost_weights: Vec<f64>,
}

impl SyntheticSurface {
    pub fn new(space: &KnobSpace, seed: u64, noise: f64) -> Self {
        let mut rng = seed::rng(seed::derive(seed, "tune.surface"));
        let optimum = space.random_config(&mut rng);
        let weights: Vec<f64> = (0..space.len()).map(|_| rng.gen_range(0.5..2.0)).collect();
        let interaction = if space.len() >= 2 {
            let sign = if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
            sign * (weights[0] * weights[1]).sqrt()
        } else {
            0.0
        };
        let cost_weights = (0..space.len()).map(|_| rng.gen_range(0.0..2.0)).collect();
        Self { optimum, weights, interaction, floor: 1.0, noise, noise_seed: seed, cost_base: 1.0, cost_weights }
    }

    pub fn noiseless(&self, space: &KnobSpace, config: &[usize]) -> f64 {
        let z = space.normalize(config);
        let zs = space.normalize(&self.optimum);
        let d: Vec<f64> = z.iter().zip(&zs).map(|(a, b)| a - b).collect();
        let mut q = self.floor + d.iter().zip(&self.weights).map(|(x, w)| w * x * x).sum::<f64>();
        if d.len() >= 2 {
            q += self.interaction * d[0] * d[1];
        }
        q
    }

    pub fn cost(&self, space: &KnobSpace, config: &[usize]) -> f64 {
        let z = space.normalize(config);
        self.cost_base + z.iter().zip(&self.cost_weights).map(|(x, w)| w * x).sum::<f64>()
    }
}

impl Objective for SyntheticSurface {
    fn observe(&self, space: &KnobSpace, config: &[usize]) -> Result<(f64, f64), TuneError> {
        let mut q = self.noiseless(space, config);
        if self.noise > 0.0 {
            let label: Vec<String> = config.iter().map(usize::to_string).collect();
            let mut rng = seed::rng(seed::derive(self.noise_seed, &label.join(",")));
            let z: f64 = rng.sample(StandardNormal);
            q += self.noise * z;
        }
        Ok((q, self.cost(space, config)))
    }
}
