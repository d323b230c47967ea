use std::f64::consts::PI;

use rayon::prelude::*;

use crate::chem::{synth, Conformer, Ligand};
use crate::dock::{
    dock_with_stats, filter_poses, pose_coordinates, rescore, rmsd, DockError, DockParams, Pocket, Pose,
};
use crate::geom::Vec3;
use crate::seed;
use crate::tune::{KnobSpace, Objective, TuneError};

/// RMSD charged when the filter leaves a ligand without poses.
pub const MISSING_POSE_RMSD: f64 = 10.0;

/// Live tuning hook: docks a mini-corpus under the configured knobs and
/// reports mean best-pose RMSD against a high-effort reference run as
/// quality, and a simulated device time from the work performed as cost.
///
/// Knobs are looked up by name; absent knobs keep their default.
#[derive(Debug, Clone)]
pub struct PipelineObjective {
    pub pocket: Pocket,
    pub conformers: Vec<Conformer>,
    pub references: Vec<Vec<Vec3>>,
    pub seed: u64,
    /// Seconds per score evaluation.
    pub eval_time: f64,
    pub launch_overhead: f64,
}

impl PipelineObjective {
    /// Synthetic corpus of `count` ligands docked against `pocket`.
    pub fn synthetic(pocket: Pocket, count: usize, seed: u64) -> Result<Self, TuneError> {
        let err = |e: String| TuneError::Objective(e);
        let conformers = synth::generate(count, seed::derive(seed, "tune.corpus"))
            .into_iter()
            .enumerate()
            .map(|(i, s)| {
                let l = Ligand::from_smiles(format!("T{i:03}"), s).map_err(|e| err(e.to_string()))?;
                l.embed(seed::derive(seed, &l.id)).map_err(|e| err(e.to_string()))
            })
            .collect::<Result<Vec<_>, _>>()?;
        Self::new(pocket, conformers, seed)
    }

    pub fn new(pocket: Pocket, conformers: Vec<Conformer>, seed: u64) -> Result<Self, TuneError> {
        let reference = DockParams { restarts: 32, max_steps: 2000, gradient_tolerance: 1e-8, ..DockParams::default() };
        let references = conformers
            .par_iter()
            .map(|c| {
                let run = dock_with_stats(c, &pocket, &reference, seed::derive(seed, "tune.reference"))?;
                let best =
                    run.poses.first().ok_or_else(|| DockError::InvalidParams("reference run found no pose".into()))?;
                pose_coordinates(c, best)
            })
            .collect::<Result<Vec<_>, DockError>>()
            .map_err(|e| TuneError::Objective(e.to_string()))?;
        Ok(Self { pocket, conformers, references, seed, eval_time: 1e-6, launch_overhead: 0.01 })
    }

    fn params(space: &KnobSpace, config: &[usize]) -> (DockParams, usize, f64, usize, usize) {
        let get = |name: &str| space.value(config, name);
        let d = DockParams::default();
        let params = DockParams {
            restarts: get("restarts").map_or(d.restarts, |v| v.max(1.0) as usize),
            diversity_delta: get("diversity_delta").unwrap_or(d.diversity_delta),
            max_steps: get("line_search_steps").map_or(d.max_steps, |v| v as usize),
            gradient_tolerance: get("gradient_tolerance").unwrap_or(d.gradient_tolerance),
            initial_step: get("initial_step").unwrap_or(d.initial_step),
            step_shrink: get("step_shrink").unwrap_or(d.step_shrink),
            max_start_attempts: get("max_start_attempts").map_or(d.max_start_attempts, |v| v.max(1.0) as usize),
            ..d
        };
        let top_k = get("filter_top_k").map_or(3, |v| v.max(1.0) as usize);
        let threshold = get("filter_threshold").unwrap_or(f64::NEG_INFINITY);
        let grid = get("torsion_grid").map_or(0, |v| v as usize);
        let classes = get("batch_classes").map_or(1, |v| v.max(1.0) as usize);
        (params, top_k, threshold, grid, classes)
    }
}

fn snap(p: &mut Pose, grid: usize) {
    if grid > 0 {
        let step = 2.0 * PI / grid as f64;
        for t in &mut p.torsions {
            *t = (*t / step).round() * step;
        }
    }
}

impl Objective for PipelineObjective {
    fn observe(&self, space: &KnobSpace, config: &[usize]) -> Result<(f64, f64), TuneError> {
        let (params, top_k, threshold, grid, classes) = Self::params(space, config);
        let per_ligand = self
            .conformers
            .par_iter()
            .zip(&self.references)
            .map(|(c, reference)| {
                let run = dock_with_stats(c, &self.pocket, &params, seed::derive(self.seed, &c.ligand_id))?;
                let mut poses = run.poses;
                for p in &mut poses {
                    snap(p, grid);
                    p.rescore = Some(rescore(c, p, &self.pocket)?);
                }
                let kept = filter_poses(&poses, top_k, threshold);
                let best = kept.iter().max_by(|a, b| a.best_score().total_cmp(&b.best_score()));
                let dev = match best {
                    Some(p) => rmsd(&pose_coordinates(c, p)?, reference)?,
                    None => MISSING_POSE_RMSD,
                };
                Ok((dev, run.evaluations))
            })
            .collect::<Result<Vec<_>, DockError>>()
            .map_err(|e| TuneError::Objective(e.to_string()))?;
        let n = per_ligand.len().max(1) as f64;
        let quality = per_ligand.iter().map(|r| r.0).sum::<f64>() / n;
        let evaluations: usize = per_ligand.iter().map(|r| r.1).sum();
        // coarse class tables pad every item to a larger worst case
        let padding = 1.0 + 0.5 / classes as f64;
        let cost = evaluations as f64 * self.eval_time * padding + classes as f64 * self.launch_overhead;
        Ok((quality, cost))
    }
}
