//! Deterministic toy 3D embedding: breadth-first placement on a diamond-like
//! lattice followed by spring relaxation. Stands in for a real conformer
//! generator; only plausibility and reproducibility matter downstream.

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::graph::{Element, MolecularGraph};
use super::rotatable_bond_indices;
use crate::geom::{self, Vec3};
use crate::seed;

pub const BOND_REST_LENGTH: f64 = 1.5;
pub const REPULSION_CUTOFF: f64 = 1.0;
pub const RELAX_ITERATIONS: usize = 200;
const RELAX_STEP: f64 = 0.1;
const REPULSION_STIFFNESS: f64 = 4.0;
const JITTER: f64 = 0.05;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EmbedError {
    #[error("graph is disconnected")]
    DisconnectedGraph,
}

/// Atoms moved by one torsion: rotation about `pivot -> head`, applied to
/// `moving` (which contains `head`, never `pivot`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Rotor {
    pub bond: usize,
    pub pivot: usize,
    pub head: usize,
    pub moving: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Conformer {
    pub ligand_id: String,
    pub coordinates: Vec<Vec3>,
    pub elements: Vec<Element>,
    pub bonds: Vec<[usize; 2]>,
    /// One rotor per rotatable bond, in bond order.
    pub rotors: Vec<Rotor>,
}

impl Conformer {
    pub fn with_id(mut self, id: impl Into<String>) -> Self {
        self.ligand_id = id.into();
        self
    }

    pub fn atom_count(&self) -> usize {
        self.coordinates.len()
    }

    pub fn min_pairwise_distance(&self) -> f64 {
        let mut best = f64::INFINITY;
        for i in 0..self.coordinates.len() {
            for j in i + 1..self.coordinates.len() {
                best = best.min(geom::dist(self.coordinates[i], self.coordinates[j]));
            }
        }
        best
    }
}

fn lattice_directions(sign: f64, degree: usize) -> Vec<Vec3> {
    if degree <= 4 {
        let k = sign / 3f64.sqrt();
        vec![[k, k, k], [k, -k, -k], [-k, k, -k], [-k, -k, k]]
    } else {
        vec![[1.0, 0.0, 0.0], [-1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, -1.0, 0.0], [0.0, 0.0, 1.0], [0.0, 0.0, -1.0]]
    }
}

pub fn embed_3d(graph: &MolecularGraph, seed: u64) -> Result<Conformer, EmbedError> {
    let n = graph.atom_count();
    let elements: Vec<Element> = graph.atoms().iter().map(|a| a.element).collect();
    if n == 0 {
        return Ok(Conformer {
            ligand_id: String::new(),
            coordinates: vec![],
            elements,
            bonds: vec![],
            rotors: vec![],
        });
    }
    if !graph.is_connected() {
        return Err(EmbedError::DisconnectedGraph);
    }
    let mut rng = seed::rng(seed);
    let mut pos: Vec<Option<Vec3>> = vec![None; n];
    let mut depth = vec![0usize; n];
    pos[0] = Some([0.0; 3]);
    let mut queue = std::collections::VecDeque::from([0usize]);
    while let Some(u) = queue.pop_front() {
        let pu = pos[u].expect("queued atoms are placed");
        let sign = if depth[u].is_multiple_of(2) { 1.0 } else { -1.0 };
        let mut free = lattice_directions(sign, graph.degree(u));
        // drop directions already taken by placed neighbours
        for v in graph.neighbors(u) {
            if let Some(pv) = pos[v] {
                let d = geom::sub(pv, pu);
                if let Some((k, _)) =
                    free.iter().enumerate().map(|(k, dir)| (k, geom::dot(*dir, d))).max_by(|a, b| a.1.total_cmp(&b.1))
                {
                    if free.len() > 1 {
                        free.remove(k);
                    }
                }
            }
        }
        let children: Vec<usize> = graph.neighbors(u).filter(|&v| pos[v].is_none()).collect();
        for v in children {
            let mut best: Option<(usize, f64)> = None;
            for (k, dir) in free.iter().enumerate() {
                let cand = geom::add(pu, geom::scale(*dir, BOND_REST_LENGTH));
                let clearance = pos.iter().flatten().map(|p| geom::dist(*p, cand)).fold(f64::INFINITY, f64::min);
                if best.is_none_or(|(_, c)| clearance > c + 1e-12) {
                    best = Some((k, clearance));
                }
            }
            let dir = match best {
                Some((k, _)) => {
                    let d = free[k];
                    if free.len() > 1 {
                        free.remove(k);
                    }
                    d
                }
                None => [sign, 0.0, 0.0],
            };
            let jitter =
                [rng.gen_range(-JITTER..JITTER), rng.gen_range(-JITTER..JITTER), rng.gen_range(-JITTER..JITTER)];
            pos[v] = Some(geom::add(geom::add(pu, geom::scale(dir, BOND_REST_LENGTH)), jitter));
            depth[v] = depth[u] + 1;
            queue.push_back(v);
        }
    }
    let mut coords: Vec<Vec3> = pos.into_iter().map(|p| p.expect("connected graph fully placed")).collect();
    relax(graph, &mut coords);
    let rotors = build_rotors(graph);
    let bonds = graph.bonds().iter().map(|b| [b.a, b.b]).collect();
    Ok(Conformer { ligand_id: String::new(), coordinates: coords, elements, bonds, rotors })
}

fn relax(graph: &MolecularGraph, coords: &mut [Vec3]) {
    let n = coords.len();
    let mut bonded = vec![false; n * n];
    for b in graph.bonds() {
        bonded[b.a * n + b.b] = true;
        bonded[b.b * n + b.a] = true;
    }
    let mut force = vec![[0.0; 3]; n];
    for _ in 0..RELAX_ITERATIONS {
        force.iter_mut().for_each(|f| *f = [0.0; 3]);
        for b in graph.bonds() {
            let d = geom::sub(coords[b.b], coords[b.a]);
            let len = geom::norm(d).max(1e-9);
            let f = geom::scale(d, (len - BOND_REST_LENGTH) / len);
            force[b.a] = geom::add(force[b.a], f);
            force[b.b] = geom::sub(force[b.b], f);
        }
        for i in 0..n {
            for j in i + 1..n {
                if bonded[i * n + j] {
                    continue;
                }
                let d = geom::sub(coords[j], coords[i]);
                let len = geom::norm(d);
                if len >= REPULSION_CUTOFF {
                    continue;
                }
                let dir = if len < 1e-9 {
                    // coincident atoms: separate along a fixed axis
                    [1.0, 0.0, 0.0]
                } else {
                    geom::scale(d, 1.0 / len)
                };
                let f = geom::scale(dir, REPULSION_STIFFNESS * (REPULSION_CUTOFF - len));
                force[i] = geom::sub(force[i], f);
                force[j] = geom::add(force[j], f);
            }
        }
        for (c, f) in coords.iter_mut().zip(&force) {
            *c = geom::add(*c, geom::scale(*f, RELAX_STEP));
        }
    }
}

fn build_rotors(graph: &MolecularGraph) -> Vec<Rotor> {
    rotatable_bond_indices(graph)
        .into_iter()
        .map(|bi| {
            let bond = graph.bonds()[bi];
            let side_b = graph.reachable_from(bond.b, Some(bi));
            let count_b = side_b.iter().filter(|&&s| s).count();
            let (pivot, head, side) = if count_b * 2 <= graph.atom_count() {
                (bond.a, bond.b, side_b)
            } else {
                (bond.b, bond.a, graph.reachable_from(bond.a, Some(bi)))
            };
            let moving = side.iter().enumerate().filter(|(_, &s)| s).map(|(i, _)| i).collect();
            Rotor { bond: bi, pivot, head, moving }
        })
        .collect()
}
