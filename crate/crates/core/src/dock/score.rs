use super::{DockError, Pocket, Pose, SiteKind};
use crate::chem::{Conformer, Element};
use crate::geom::{self, Quat, Vec3};

/// Softplus ramp width for the clash term (length units).
pub const CLASH_SOFTNESS: f64 = 0.1;

/// Below this argument softplus and sigmoid are under 1e-16 and skipped.
const NEGLIGIBLE: f64 = -37.0;

fn softplus(z: f64) -> f64 {
    z.max(0.0) + (-z.abs()).exp().ln_1p()
}

fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// Precomputed scoring context for one conformer in one pocket.
#[derive(Debug, Clone)]
pub struct DockingModel<'a> {
    pub conformer: &'a Conformer,
    pub pocket: &'a Pocket,
    centroid: Vec3,
    /// Atom pairs more than two bonds apart; only these can clash.
    clash_pairs: Vec<(usize, usize)>,
}

impl<'a> DockingModel<'a> {
    pub fn new(conformer: &'a Conformer, pocket: &'a Pocket) -> Result<Self, DockError> {
        let n = conformer.coordinates.len();
        if conformer.elements.len() != n {
            return Err(DockError::AtomCountMismatch { coordinates: n, elements: conformer.elements.len() });
        }
        let mut near = vec![false; n * n];
        let mut adj = vec![Vec::new(); n];
        for &[a, b] in &conformer.bonds {
            adj[a].push(b);
            adj[b].push(a);
        }
        for i in 0..n {
            for &j in &adj[i] {
                near[i * n + j] = true;
                for &k in &adj[j] {
                    near[i * n + k] = true;
                }
            }
        }
        let clash_pairs =
            (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).filter(|&(i, j)| !near[i * n + j]).collect();
        Ok(Self { conformer, pocket, centroid: geom::centroid(&conformer.coordinates), clash_pairs })
    }

    pub fn torsion_count(&self) -> usize {
        self.conformer.rotors.len()
    }

    pub fn local_coordinates(&self, torsions: &[f64]) -> Vec<Vec3> {
        local_coordinates(self.conformer, self.centroid, torsions)
    }

    pub fn coordinates(&self, translation: Vec3, rotation: Quat, torsions: &[f64]) -> Vec<Vec3> {
        place(self.local_coordinates(torsions), translation, rotation)
    }
}

/// Ligand-frame coordinates after applying torsions, centred on `centroid`.
fn local_coordinates(conformer: &Conformer, centroid: Vec3, torsions: &[f64]) -> Vec<Vec3> {
    let mut xyz = conformer.coordinates.clone();
    for (rotor, &angle) in conformer.rotors.iter().zip(torsions) {
        if angle == 0.0 {
            continue;
        }
        let origin = xyz[rotor.pivot];
        let axis = geom::sub(xyz[rotor.head], origin);
        let len = geom::norm(axis);
        if len < 1e-12 {
            continue;
        }
        let axis = geom::scale(axis, 1.0 / len);
        for &m in &rotor.moving {
            xyz[m] = geom::rotate_about(xyz[m], origin, axis, angle);
        }
    }
    xyz.iter_mut().for_each(|p| *p = geom::sub(*p, centroid));
    xyz
}

fn place(local: Vec<Vec3>, translation: Vec3, rotation: Quat) -> Vec<Vec3> {
    let m = geom::quat_to_matrix(rotation);
    local.into_iter().map(|p| geom::add(geom::mat_vec(&m, p), translation)).collect()
}

impl<'a> DockingModel<'a> {
    /// Geometric score of placed coordinates and its gradient per atom.
    pub fn score_coords(&self, xyz: &[Vec3], want_grad: bool) -> (f64, Vec<Vec3>) {
        let pocket = self.pocket;
        let mut grad = if want_grad { vec![[0.0; 3]; xyz.len()] } else { Vec::new() };
        let mut score = 0.0;
        for (i, &x) in xyz.iter().enumerate() {
            for site in pocket.sites.iter().filter(|s| s.kind == SiteKind::Steric) {
                let d = geom::sub(x, site.center);
                let s2 = site.width * site.width;
                let e = site.weight * (-geom::norm2(d) / (2.0 * s2)).exp();
                score += e;
                if want_grad {
                    grad[i] = geom::add(grad[i], geom::scale(d, -e / s2));
                }
            }
        }
        let lambda = pocket.clash_penalty;
        if lambda > 0.0 {
            let r = pocket.clash_radius;
            let far = r - NEGLIGIBLE * CLASH_SOFTNESS;
            let far2 = far * far;
            for &(i, j) in &self.clash_pairs {
                let d = geom::sub(xyz[i], xyz[j]);
                let len2 = geom::norm2(d);
                if len2 > far2 {
                    continue;
                }
                let len = len2.sqrt();
                let z = (r - len) / CLASH_SOFTNESS;
                score -= lambda * softplus(z);
                if want_grad && len > 1e-12 {
                    // d/dx_i softplus(z) = sigmoid(z) * (-1/s) * d/len
                    let g = geom::scale(d, lambda * sigmoid(z) / (CLASH_SOFTNESS * len));
                    grad[i] = geom::add(grad[i], g);
                    grad[j] = geom::sub(grad[j], g);
                }
            }
            let b = pocket.bounds;
            for (i, &x) in xyz.iter().enumerate() {
                for k in 0..3 {
                    let lo = (r - (x[k] - b.min[k])) / CLASH_SOFTNESS;
                    let hi = (r - (b.max[k] - x[k])) / CLASH_SOFTNESS;
                    if lo < NEGLIGIBLE && hi < NEGLIGIBLE {
                        continue;
                    }
                    score -= lambda * (softplus(lo) + softplus(hi));
                    if want_grad {
                        grad[i][k] += lambda * (sigmoid(lo) - sigmoid(hi)) / CLASH_SOFTNESS;
                    }
                }
            }
        }
        (score, grad)
    }

    /// Kind-matched bonus: hydrogen-bond sites pair with N/O atoms,
    /// lipophilic sites with carbon.
    pub fn interaction_bonus(&self, xyz: &[Vec3]) -> f64 {
        let mut bonus = 0.0;
        for (x, &el) in xyz.iter().zip(&self.conformer.elements) {
            for site in &self.pocket.sites {
                let matched = match site.kind {
                    SiteKind::Steric => false,
                    SiteKind::Hbond => matches!(el, Element::N | Element::O),
                    SiteKind::Lipophilic => el == Element::C,
                };
                if matched {
                    let d2 = geom::norm2(geom::sub(*x, site.center));
                    bonus += site.weight * (-d2 / (2.0 * site.width * site.width)).exp();
                }
            }
        }
        bonus
    }

    pub fn score(&self, state: &PoseState) -> f64 {
        self.score_coords(&self.coordinates(state.translation, state.rotation, &state.torsions), false).0
    }

    /// Score and gradient over `[translation (3), rotation vector (3),
    /// torsions]`, all analytic. Each torsion derivative is the torque of the
    /// moving side's atom gradients about the rotatable bond axis.
    pub fn score_and_gradient(&self, state: &PoseState) -> (f64, Vec<f64>) {
        let xyz = self.coordinates(state.translation, state.rotation, &state.torsions);
        let (score, atom_grad) = self.score_coords(&xyz, true);
        let mut g = Vec::with_capacity(6 + state.torsions.len());
        let force = atom_grad.iter().fold([0.0; 3], |acc, f| geom::add(acc, *f));
        let torque = xyz
            .iter()
            .zip(&atom_grad)
            .fold([0.0; 3], |acc, (x, f)| geom::add(acc, geom::cross(geom::sub(*x, state.translation), *f)));
        g.extend_from_slice(&force);
        g.extend_from_slice(&torque);
        for rotor in self.conformer.rotors.iter().take(state.torsions.len()) {
            let origin = xyz[rotor.pivot];
            let axis = geom::sub(xyz[rotor.head], origin);
            let len = geom::norm(axis);
            if len < 1e-12 {
                g.push(0.0);
                continue;
            }
            let t = rotor
                .moving
                .iter()
                .fold([0.0; 3], |acc, &m| geom::add(acc, geom::cross(geom::sub(xyz[m], origin), atom_grad[m])));
            g.push(geom::dot(axis, t) / len);
        }
        (score, g)
    }
}

/// Optimisation state of a pose.
#[derive(Debug, Clone, PartialEq)]
pub struct PoseState {
    pub translation: Vec3,
    pub rotation: Quat,
    pub torsions: Vec<f64>,
}

impl PoseState {
    /// Move along `dir` (same layout as the gradient) by `step`.
    pub fn stepped(&self, dir: &[f64], step: f64) -> Self {
        let translation = geom::add(self.translation, geom::scale([dir[0], dir[1], dir[2]], step));
        let spin = geom::quat_from_rotvec(geom::scale([dir[3], dir[4], dir[5]], step));
        let rotation = geom::quat_normalize(geom::quat_mul(spin, self.rotation));
        let torsions = self.torsions.iter().zip(&dir[6..]).map(|(t, d)| t + step * d).collect();
        Self { translation, rotation, torsions }
    }

    pub fn from_pose(p: &Pose) -> Self {
        Self { translation: p.translation, rotation: p.rotation, torsions: p.torsions.clone() }
    }
}

fn check(conformer: &Conformer, pose: &Pose) -> Result<(), DockError> {
    if pose.torsions.len() != conformer.rotors.len() {
        return Err(DockError::TorsionCountMismatch { expected: conformer.rotors.len(), found: pose.torsions.len() });
    }
    Ok(())
}

pub fn pose_coordinates(conformer: &Conformer, pose: &Pose) -> Result<Vec<Vec3>, DockError> {
    check(conformer, pose)?;
    let local = local_coordinates(conformer, geom::centroid(&conformer.coordinates), &pose.torsions);
    Ok(place(local, pose.translation, pose.rotation))
}

pub fn geometric_score(conformer: &Conformer, pose: &Pose, pocket: &Pocket) -> Result<f64, DockError> {
    check(conformer, pose)?;
    let model = DockingModel::new(conformer, pocket)?;
    Ok(model.score(&PoseState::from_pose(pose)))
}

/// Geometric score plus the kind-matched interaction bonus.
pub fn rescore(conformer: &Conformer, pose: &Pose, pocket: &Pocket) -> Result<f64, DockError> {
    check(conformer, pose)?;
    let model = DockingModel::new(conformer, pocket)?;
    let xyz = model.coordinates(pose.translation, pose.rotation, &pose.torsions);
    Ok(model.score_coords(&xyz, false).0 + model.interaction_bonus(&xyz))
}
