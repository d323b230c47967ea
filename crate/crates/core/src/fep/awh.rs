use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::FepError;
use crate::seed;

/// One alchemical state: `u(x) = stiffness/2 * (x - center)^2 + offset`, in kT.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LambdaState {
    pub center: f64,
    pub stiffness: f64,
    pub offset: f64,
}

impl LambdaState {
    pub fn energy(&self, x: f64) -> f64 {
        let d = x - self.center;
        0.5 * self.stiffness * d * d + self.offset
    }

    /// `-ln Z` of the state.
    pub fn free_energy(&self) -> f64 {
        self.offset - 0.5 * (2.0 * std::f64::consts::PI / self.stiffness).ln()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlchemicalModel {
    pub states: Vec<LambdaState>,
}

impl AlchemicalModel {
    pub fn new(states: Vec<LambdaState>) -> Result<Self, FepError> {
        let m = Self { states };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<(), FepError> {
        if self.states.len() < 2 {
            return Err(FepError::InvalidModel("need at least two lambda states".into()));
        }
        for (k, s) in self.states.iter().enumerate() {
            if !(s.stiffness > 0.0) || !s.stiffness.is_finite() || !s.center.is_finite() || !s.offset.is_finite() {
                return Err(FepError::InvalidModel(format!("state {k} is not a finite well")));
            }
        }
        Ok(())
    }

    /// Two identical unit wells.
    pub fn symmetric() -> Self {
        let s = LambdaState { center: 0.0, stiffness: 1.0, offset: 0.0 };
        Self { states: vec![s, s] }
    }

    /// Unit wells whose energies differ by `delta`.
    pub fn offset_wells(delta: f64) -> Self {
        Self {
            states: vec![
                LambdaState { center: 0.0, stiffness: 1.0, offset: 0.0 },
                LambdaState { center: 0.0, stiffness: 1.0, offset: delta },
            ],
        }
    }

    /// Centered harmonic wells with stiffness `k0` and `k1`.
    pub fn harmonic(k0: f64, k1: f64) -> Self {
        Self {
            states: vec![
                LambdaState { center: 0.0, stiffness: k0, offset: 0.0 },
                LambdaState { center: 0.0, stiffness: k1, offset: 0.0 },
            ],
        }
    }

    /// Linear interpolation of center and offset, geometric in stiffness,
    /// over `intervals` steps.
    pub fn interpolated(from: LambdaState, to: LambdaState, intervals: usize) -> Self {
        let n = intervals.max(1);
        let states = (0..=n)
            .map(|i| {
                let t = i as f64 / n as f64;
                LambdaState {
                    center: from.center + t * (to.center - from.center),
                    stiffness: from.stiffness * (to.stiffness / from.stiffness).powf(t),
                    offset: from.offset + t * (to.offset - from.offset),
                }
            })
            .collect();
        Self { states }
    }

    pub fn reversed(&self) -> Self {
        Self { states: self.states.iter().rev().copied().collect() }
    }

    /// Last state index `L`.
    pub fn last(&self) -> usize {
        self.states.len() - 1
    }

    /// `F_L - F_0`.
    pub fn exact_delta_f(&self) -> f64 {
        self.states[self.last()].free_energy() - self.states[0].free_energy()
    }

    fn energy(&self, state: usize, x: f64) -> Result<f64, FepError> {
        let u = self.states[state].energy(x);
        if u.is_finite() {
            Ok(u)
        } else {
            Err(FepError::NonFiniteEnergy { state, x })
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AwhParams {
    /// Production steps; each step is one coordinate move plus one lambda hop.
    pub steps: usize,
    pub burn_in: usize,
    pub initial_gamma: f64,
    pub final_gamma: f64,
    pub flatness: f64,
    /// Steps between flatness checks.
    pub check_interval: usize,
}

impl Default for AwhParams {
    fn default() -> Self {
        Self {
            steps: 200_000,
            burn_in: 1000,
            initial_gamma: 1.0,
            final_gamma: 1e-4,
            flatness: 0.8,
            check_interval: 100,
        }
    }
}

impl AwhParams {
    pub fn with_steps(steps: usize) -> Self {
        Self { steps, ..Self::default() }
    }
}

/// Bias snapshot taken when a stage ends.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BiasStage {
    pub step: usize,
    /// Update size used during the stage that just ended.
    pub gamma: f64,
    /// min/mean of the visit histogram at the transition.
    pub flatness: f64,
    pub bias: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AwhResult {
    /// `F_L - F_0` in kT.
    pub delta_f: f64,
    pub bias: Vec<f64>,
    pub history: Vec<BiasStage>,
    /// Update size dropped below the final threshold before the step budget ran out.
    pub converged: bool,
    pub steps: usize,
    pub x_step: f64,
    pub x_acceptance: f64,
}

/// Flat-histogram adaptive bias over discrete lambda states. The bias of the
/// current state is lowered by `gamma` on every visit; `gamma` halves each
/// time the visit histogram is flat. At convergence `g_l - g_0` tracks
/// `F_l - F_0`.
pub fn awh_estimate(model: &AlchemicalModel, params: &AwhParams, seed: u64) -> Result<AwhResult, FepError> {
    model.validate()?;
    let last = model.last();
    let min_steps = 10 * last * 100;
    if params.steps < min_steps {
        return Err(FepError::TooFewSteps { steps: params.steps, min: min_steps });
    }
    let mut rng = seed::rng(seed);
    let n = model.states.len();
    let mut x = model.states[0].center;
    let mut lam = 0usize;
    let mut u = model.energy(lam, x)?;
    let mut sigma = 1.0 / model.states[0].stiffness.sqrt();
    let mut g = vec![0.0; n];

    // burn-in: tune the coordinate step toward 40% acceptance
    let window = 100;
    let mut accepted = 0usize;
    for t in 1..=params.burn_in {
        if x_move(model, lam, &mut x, &mut u, sigma, &mut rng)? {
            accepted += 1;
        }
        lam_hop(model, &mut lam, x, &mut u, &g, &mut rng)?;
        if t % window == 0 {
            let rate = accepted as f64 / window as f64;
            sigma *= (2.0 * (rate - 0.4)).exp();
            accepted = 0;
        }
    }

    let mut gamma = params.initial_gamma;
    let mut hist = vec![0u64; n];
    let mut history = Vec::new();
    let mut moves_accepted = 0usize;
    let mut step = 0;
    while step < params.steps && gamma >= params.final_gamma {
        step += 1;
        if x_move(model, lam, &mut x, &mut u, sigma, &mut rng)? {
            moves_accepted += 1;
        }
        lam_hop(model, &mut lam, x, &mut u, &g, &mut rng)?;
        g[lam] -= gamma;
        hist[lam] += 1;
        if step % params.check_interval == 0 {
            let f = flatness(&hist);
            if f >= params.flatness {
                // keep g_0 = 0 so the bias stays bounded
                let g0 = g[0];
                g.iter_mut().for_each(|v| *v -= g0);
                history.push(BiasStage { step, gamma, flatness: f, bias: g.clone() });
                gamma *= 0.5;
                hist.iter_mut().for_each(|h| *h = 0);
            }
        }
    }
    let g0 = g[0];
    g.iter_mut().for_each(|v| *v -= g0);
    Ok(AwhResult {
        delta_f: g[last] - g[0],
        bias: g,
        history,
        converged: gamma < params.final_gamma,
        steps: step,
        x_step: sigma,
        x_acceptance: if step > 0 { moves_accepted as f64 / step as f64 } else { 0.0 },
    })
}

fn flatness(hist: &[u64]) -> f64 {
    let total: u64 = hist.iter().sum();
    if total == 0 {
        return 0.0;
    }
    let mean = total as f64 / hist.len() as f64;
    *hist.iter().min().expect("non-empty") as f64 / mean
}

fn x_move<R: Rng>(
    m: &AlchemicalModel,
    lam: usize,
    x: &mut f64,
    u: &mut f64,
    sigma: f64,
    rng: &mut R,
) -> Result<bool, FepError> {
    let z: f64 = rng.sample(StandardNormal);
    let nx = *x + sigma * z;
    let nu = m.energy(lam, nx)?;
    let accept = nu <= *u || rng.gen::<f64>() < (*u - nu).exp();
    if accept {
        *x = nx;
        *u = nu;
    }
    Ok(accept)
}

fn lam_hop<R: Rng>(
    m: &AlchemicalModel,
    lam: &mut usize,
    x: f64,
    u: &mut f64,
    g: &[f64],
    rng: &mut R,
) -> Result<(), FepError> {
    let up = rng.gen_bool(0.5);
    let target = match (up, *lam) {
        (true, l) if l < m.last() => l + 1,
        (false, l) if l > 0 => l - 1,
        _ => return Ok(()),
    };
    let nu = m.energy(target, x)?;
    let log_acc = -(nu - *u) + (g[target] - g[*lam]);
    if log_acc >= 0.0 || rng.gen::<f64>() < log_acc.exp() {
        *lam = target;
        *u = nu;
    }
    Ok(())
}
