//! Docking against an analytic pocket field.
//!
//! The pocket is a sum of Gaussian sites. The geometric score rewards ligand
//! atoms near steric sites and penalises clashes through a softplus ramp;
//! rescoring adds kind-matched hydrogen-bond and lipophilic terms. Poses are
//! found by gradient ascent from diverse random starts.

mod pocket;
mod score;
mod search;

pub use pocket::{Bounds, Pocket, Site, SiteKind};
pub use score::{geometric_score, pose_coordinates, rescore, DockingModel, PoseState, CLASH_SOFTNESS};
pub use search::{ascend, dock, dock_with_stats, Ascent, DockParams, DockRun};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geom::{self, Quat, Vec3};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DockError {
    #[error("conformer has {coordinates} coordinates but {elements} elements")]
    AtomCountMismatch { coordinates: usize, elements: usize },
    #[error("pose has {found} torsions, ligand has {expected} rotatable bonds")]
    TorsionCountMismatch { expected: usize, found: usize },
    #[error("pocket bounds are empty")]
    EmptyBounds,
    #[error("invalid pocket: {0}")]
    InvalidPocket(String),
    #[error("invalid docking parameters: {0}")]
    InvalidParams(String),
    #[error("coordinate sets differ in length ({0} vs {1})")]
    LengthMismatch(usize, usize),
}

/// Placement of a ligand: rigid transform of the centred conformer plus one
/// torsion angle per rotatable bond.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Pose {
    pub ligand_id: String,
    pub translation: Vec3,
    /// Unit quaternion `[w, x, y, z]`.
    pub rotation: Quat,
    pub torsions: Vec<f64>,
    pub geometric_score: f64,
    pub rescore: Option<f64>,
}

impl Pose {
    pub fn identity(ligand_id: impl Into<String>, translation: Vec3, torsions: usize) -> Self {
        Self {
            ligand_id: ligand_id.into(),
            translation,
            rotation: geom::QUAT_IDENTITY,
            torsions: vec![0.0; torsions],
            geometric_score: 0.0,
            rescore: None,
        }
    }

    /// Rescore when available, geometric score otherwise.
    pub fn best_score(&self) -> f64 {
        self.rescore.unwrap_or(self.geometric_score)
    }
}

/// Root-mean-square distance between corresponding atoms, no superposition.
pub fn rmsd(a: &[Vec3], b: &[Vec3]) -> Result<f64, DockError> {
    if a.len() != b.len() {
        return Err(DockError::LengthMismatch(a.len(), b.len()));
    }
    if a.is_empty() {
        return Ok(0.0);
    }
    let sum: f64 = a.iter().zip(b).map(|(p, q)| geom::norm2(geom::sub(*p, *q))).sum();
    Ok((sum / a.len() as f64).sqrt())
}

/// Keep poses scoring at least `min_score`, then the `keep_top` best of those.
/// Survivors keep their input order; equal scores favour the earlier pose.
pub fn filter_poses(poses: &[Pose], keep_top: usize, min_score: f64) -> Vec<Pose> {
    let mut idx: Vec<usize> = (0..poses.len()).filter(|&i| poses[i].geometric_score >= min_score).collect();
    if idx.len() > keep_top {
        let mut ranked = idx.clone();
        ranked.sort_by(|&a, &b| poses[b].geometric_score.total_cmp(&poses[a].geometric_score).then(a.cmp(&b)));
        ranked.truncate(keep_top);
        ranked.sort_unstable();
        idx = ranked;
    }
    idx.into_iter().map(|i| poses[i].clone()).collect()
}

/// Ligand score: the best pose's score.
pub fn ligand_score(poses: &[Pose]) -> Option<f64> {
    poses.iter().map(Pose::best_score).max_by(f64::total_cmp)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scored(s: &[f64]) -> Vec<Pose> {
        s.iter().map(|&v| Pose { geometric_score: v, ..Pose::identity("x", [0.0; 3], 0) }).collect()
    }

    fn scores(p: &[Pose]) -> Vec<f64> {
        p.iter().map(|p| p.geometric_score).collect()
    }

    #[test]
    fn filter_examples() {
        let p = scored(&[5.0, 3.0, 1.0]);
        assert!(filter_poses(&p, 0, f64::NEG_INFINITY).is_empty());
        assert_eq!(scores(&filter_poses(&p, 2, f64::NEG_INFINITY)), vec![5.0, 3.0]);
        let q = scored(&[1.0, 5.0, 3.0, 5.0]);
        assert_eq!(filter_poses(&q, usize::MAX, f64::NEG_INFINITY), q);
        assert_eq!(scores(&filter_poses(&q, 2, f64::NEG_INFINITY)), vec![5.0, 5.0]);
        assert_eq!(scores(&filter_poses(&q, 9, 3.0)), vec![5.0, 3.0, 5.0]);
    }

    #[test]
    fn rmsd_examples() {
        let a = vec![[0.0, 0.0, 0.0], [1.0, 2.0, 3.0], [-1.0, 0.5, 2.0]];
        assert_eq!(rmsd(&a, &a).unwrap(), 0.0);
        let shifted: Vec<Vec3> = a.iter().map(|p| geom::add(*p, [3.0, 4.0, 0.0])).collect();
        assert!((rmsd(&a, &shifted).unwrap() - 5.0).abs() < 1e-12);
        let mut one = a.clone();
        one[1] = geom::add(one[1], [0.0, 0.0, 2.0]);
        assert!((rmsd(&a, &one).unwrap() - 2.0 / 3f64.sqrt()).abs() < 1e-12);
        assert_eq!(rmsd(&a, &a[..2]), Err(DockError::LengthMismatch(3, 2)));
    }

    #[test]
    fn ligand_score_prefers_rescore() {
        let mut p = scored(&[1.0, 2.0]);
        assert_eq!(ligand_score(&p), Some(2.0));
        p[0].rescore = Some(4.0);
        assert_eq!(ligand_score(&p), Some(4.0));
        assert_eq!(ligand_score(&[]), None);
    }
}
