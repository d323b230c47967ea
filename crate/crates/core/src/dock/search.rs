use std::f64::consts::PI;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::score::{DockingModel, PoseState};
use super::{rmsd, DockError, Pocket, Pose};
use crate::chem::Conformer;
use crate::geom::{self, Quat};
use crate::seed;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DockParams {
    pub restarts: usize,
    /// Minimum RMSD between a new start and every minimum found so far, and
    /// between any two returned poses.
    pub diversity_delta: f64,
    pub max_steps: usize,
    pub gradient_tolerance: f64,
    pub initial_step: f64,
    pub step_shrink: f64,
    pub armijo: f64,
    /// Start-sampling attempts per restart before a non-diverse start is
    /// accepted.
    pub max_start_attempts: usize,
}

impl Default for DockParams {
    fn default() -> Self {
        Self {
            restarts: 8,
            diversity_delta: 1.0,
            max_steps: 500,
            gradient_tolerance: 1e-6,
            initial_step: 0.5,
            step_shrink: 0.5,
            armijo: 1e-4,
            max_start_attempts: 50,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Ascent {
    pub state: PoseState,
    pub score: f64,
    pub steps: usize,
    /// Score function calls, gradient evaluations included.
    pub evaluations: usize,
    /// Score after every accepted step, starting with the initial score.
    pub history: Vec<f64>,
}

/// Steepest ascent along the unit gradient direction with Armijo
/// backtracking.
pub fn ascend(model: &DockingModel<'_>, start: PoseState, params: &DockParams) -> Ascent {
    let mut state = start;
    let (mut score, mut grad) = model.score_and_gradient(&state);
    let mut history = vec![score];
    let mut steps = 0;
    let mut evaluations = 1;
    while steps < params.max_steps {
        let gnorm = grad.iter().map(|g| g * g).sum::<f64>().sqrt();
        if !(gnorm >= params.gradient_tolerance) {
            break;
        }
        let dir: Vec<f64> = grad.iter().map(|g| g / gnorm).collect();
        let mut step = params.initial_step;
        let mut accepted = None;
        for _ in 0..60 {
            let trial = state.stepped(&dir, step);
            let s = model.score(&trial);
            evaluations += 1;
            if s >= score + params.armijo * step * gnorm {
                accepted = Some(trial);
                break;
            }
            step *= params.step_shrink;
        }
        let Some(next) = accepted else { break };
        state = next;
        (score, grad) = model.score_and_gradient(&state);
        evaluations += 1;
        history.push(score);
        steps += 1;
    }
    Ascent { state, score, steps, evaluations, history }
}

/// Uniformly distributed unit quaternion (Shoemake).
fn random_rotation<R: Rng>(rng: &mut R) -> Quat {
    let u1: f64 = rng.gen();
    let u2: f64 = rng.gen::<f64>() * 2.0 * PI;
    let u3: f64 = rng.gen::<f64>() * 2.0 * PI;
    let a = (1.0 - u1).sqrt();
    let b = u1.sqrt();
    geom::quat_normalize([a * u2.sin(), a * u2.cos(), b * u3.sin(), b * u3.cos()])
}

fn random_start<R: Rng>(rng: &mut R, pocket: &Pocket, torsions: usize) -> PoseState {
    let b = pocket.bounds;
    let translation = [0, 1, 2].map(|k| rng.gen_range(b.min[k]..b.max[k]));
    let rotation = random_rotation(rng);
    let torsions = (0..torsions).map(|_| rng.gen_range(-PI..PI)).collect();
    PoseState { translation, rotation, torsions }
}

/// Multi-start docking. Starts closer than `diversity_delta` (RMSD) to an
/// earlier minimum are resampled; the returned poses are pairwise at least
/// `diversity_delta` apart and sorted by geometric score, best first.
pub fn dock(conformer: &Conformer, pocket: &Pocket, params: &DockParams, seed: u64) -> Result<Vec<Pose>, DockError> {
    dock_with_stats(conformer, pocket, params, seed).map(|r| r.poses)
}

/// Docking output plus the work it took.
#[derive(Debug, Clone)]
pub struct DockRun {
    pub poses: Vec<Pose>,
    pub evaluations: usize,
}

pub fn dock_with_stats(
    conformer: &Conformer,
    pocket: &Pocket,
    params: &DockParams,
    seed: u64,
) -> Result<DockRun, DockError> {
    pocket.validate()?;
    if params.restarts == 0 {
        return Err(DockError::InvalidParams("restarts must be at least 1".into()));
    }
    if !(params.diversity_delta >= 0.0) {
        return Err(DockError::InvalidParams("diversity_delta must be non-negative".into()));
    }
    let model = DockingModel::new(conformer, pocket)?;
    let mut rng = seed::rng(seed);
    let mut minima: Vec<(Ascent, Vec<geom::Vec3>)> = Vec::with_capacity(params.restarts);
    for _ in 0..params.restarts {
        let mut start = random_start(&mut rng, pocket, model.torsion_count());
        for _ in 1..params.max_start_attempts {
            let xyz = model.coordinates(start.translation, start.rotation, &start.torsions);
            let clear = minima.iter().all(|(_, m)| rmsd(&xyz, m).map_or(true, |r| r >= params.diversity_delta));
            if clear {
                break;
            }
            start = random_start(&mut rng, pocket, model.torsion_count());
        }
        let result = ascend(&model, start, params);
        let xyz = model.coordinates(result.state.translation, result.state.rotation, &result.state.torsions);
        minima.push((result, xyz));
    }
    let mut order: Vec<usize> = (0..minima.len()).collect();
    order.sort_by(|&a, &b| minima[b].0.score.total_cmp(&minima[a].0.score).then(a.cmp(&b)));
    let mut kept: Vec<usize> = Vec::new();
    for i in order {
        let diverse =
            kept.iter().all(|&k| rmsd(&minima[i].1, &minima[k].1).map_or(true, |r| r >= params.diversity_delta));
        if diverse {
            kept.push(i);
        }
    }
    let evaluations = minima.iter().map(|(a, _)| a.evaluations).sum();
    let poses = kept
        .into_iter()
        .map(|i| {
            let a = &minima[i].0;
            Pose {
                ligand_id: conformer.ligand_id.clone(),
                translation: a.state.translation,
                rotation: a.state.rotation,
                torsions: a.state.torsions.clone(),
                geometric_score: a.score,
                rescore: None,
            }
        })
        .collect();
    Ok(DockRun { poses, evaluations })
}
