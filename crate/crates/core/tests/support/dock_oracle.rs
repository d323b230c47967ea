use std::f64::consts::PI;

use rand::Rng;
use vscreen_core::chem::{synth, Conformer, Ligand};
use vscreen_core::dock::{geometric_score, Bounds, DockingModel, Pocket, Pose, PoseState, Site, SiteKind};
use vscreen_core::geom;

/// Central differences of the score along every gradient coordinate.
pub fn fd_gradient(model: &DockingModel<'_>, state: &PoseState, h: f64) -> Vec<f64> {
    let dims = 6 + state.torsions.len();
    (0..dims)
        .map(|k| {
            let mut e = vec![0.0; dims];
            e[k] = 1.0;
            (model.score(&state.stepped(&e, h)) - model.score(&state.stepped(&e, -h))) / (2.0 * h)
        })
        .collect()
}

/// `|a - b| / max(|b|, floor)` in the Euclidean norm.
pub fn relative_error(a: &[f64], b: &[f64], floor: f64) -> f64 {
    let diff = a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt();
    let scale = b.iter().map(|y| y * y).sum::<f64>().sqrt();
    diff / scale.max(floor)
}

/// Random rigid placement inside the pocket bounds with random torsions.
pub fn random_state<R: Rng>(rng: &mut R, pocket: &Pocket, torsions: usize) -> PoseState {
    let b = pocket.bounds;
    let translation = [0, 1, 2].map(|k| rng.gen_range(b.min[k] * 0.6..b.max[k] * 0.6));
    let rv = [0, 1, 2].map(|_| rng.gen_range(-PI..PI));
    let rotation = geom::quat_from_rotvec(rv);
    PoseState { translation, rotation, torsions: (0..torsions).map(|_| rng.gen_range(-PI..PI)).collect() }
}

/// Embedded synthetic ligands with at least one rotatable bond.
pub fn flexible_conformers(count: usize, seed: u64) -> Vec<Conformer> {
    synth::generate(count * 4, seed)
        .into_iter()
        .enumerate()
        .filter_map(|(i, s)| {
            let l = Ligand::from_smiles(format!("F{i}"), s).ok()?;
            (l.rotatable_bonds > 0).then(|| l.embed(i as u64).ok()).flatten()
        })
        .take(count)
        .collect()
}

pub fn steric(center: [f64; 3], weight: f64, width: f64) -> Site {
    Site { center, weight, width, kind: SiteKind::Steric }
}

pub fn single_well() -> Pocket {
    Pocket {
        sites: vec![steric([0.7, -0.4, 0.2], 1.0, 2.0)],
        bounds: Bounds { min: [-4.0; 3], max: [4.0; 3] },
        clash_radius: 1.0,
        clash_penalty: 1.0,
    }
}

/// Zooming grid search over translation for a single-atom ligand.
pub fn grid_argmax(pocket: &Pocket, mut lo: [f64; 3], mut hi: [f64; 3]) -> [f64; 3] {
    let lig = Ligand::from_smiles("a", "C").unwrap().embed(0).unwrap();
    let score = |p: [f64; 3]| geometric_score(&lig, &Pose::identity("a", p, 0), pocket).unwrap();
    let mut best = lo;
    for _ in 0..12 {
        let n = 20;
        let mut best_s = f64::NEG_INFINITY;
        for i in 0..=n {
            for j in 0..=n {
                for k in 0..=n {
                    let p = [
                        lo[0] + (hi[0] - lo[0]) * i as f64 / n as f64,
                        lo[1] + (hi[1] - lo[1]) * j as f64 / n as f64,
                        lo[2] + (hi[2] - lo[2]) * k as f64 / n as f64,
                    ];
                    let s = score(p);
                    if s > best_s {
                        best_s = s;
                        best = p;
                    }
                }
            }
        }
        let half = [0, 1, 2].map(|d| (hi[d] - lo[d]) / n as f64 * 2.0);
        lo = [0, 1, 2].map(|d| best[d] - half[d]);
        hi = [0, 1, 2].map(|d| best[d] + half[d]);
    }
    best
}
