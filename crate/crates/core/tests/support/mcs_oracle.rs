//! Exhaustive maximum common connected substructure for tiny graphs.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use vscreen_core::chem::{Atom, Bond, BondOrder, Element, MolecularGraph};

/// Best (bonds, atoms) over all partial injective element-preserving maps
/// whose common bonds connect the mapped atoms, and the lexicographically
/// smallest sorted pair list attaining it.
pub fn brute_force_mcs(a: &MolecularGraph, b: &MolecularGraph) -> ((usize, usize), Vec<(usize, usize)>) {
    let na = a.atom_count();
    let mut map: Vec<Option<usize>> = vec![None; na];
    let mut used = vec![false; b.atom_count()];
    let mut best: ((usize, usize), Vec<(usize, usize)>) = ((0, 0), Vec::new());
    fn go(
        i: usize,
        a: &MolecularGraph,
        b: &MolecularGraph,
        map: &mut Vec<Option<usize>>,
        used: &mut Vec<bool>,
        best: &mut ((usize, usize), Vec<(usize, usize)>),
    ) {
        if i == a.atom_count() {
            if let Some(score) = evaluate(a, b, map) {
                let pairs: Vec<(usize, usize)> =
                    map.iter().enumerate().filter_map(|(x, m)| m.map(|y| (x, y))).collect();
                if score > best.0 || (score == best.0 && pairs < best.1) {
                    *best = (score, pairs);
                }
            }
            return;
        }
        for j in 0..b.atom_count() {
            if !used[j] && a.atoms()[i].element == b.atoms()[j].element {
                used[j] = true;
                map[i] = Some(j);
                go(i + 1, a, b, map, used, best);
                map[i] = None;
                used[j] = false;
            }
        }
        go(i + 1, a, b, map, used, best);
    }
    go(0, a, b, &mut map, &mut used, &mut best);
    best
}

fn evaluate(a: &MolecularGraph, b: &MolecularGraph, map: &[Option<usize>]) -> Option<(usize, usize)> {
    let atoms: Vec<usize> = (0..map.len()).filter(|&i| map[i].is_some()).collect();
    if atoms.is_empty() {
        return Some((0, 0));
    }
    let common: Vec<(usize, usize)> = a
        .bonds()
        .iter()
        .filter(|bd| match (map[bd.a], map[bd.b]) {
            (Some(x), Some(y)) => b.bond_between(x, y).is_some(),
            _ => false,
        })
        .map(|bd| (bd.a, bd.b))
        .collect();
    // connectivity of mapped atoms through common bonds
    let mut seen = vec![false; map.len()];
    let mut stack = vec![atoms[0]];
    seen[atoms[0]] = true;
    while let Some(v) = stack.pop() {
        for &(x, y) in &common {
            for (p, q) in [(x, y), (y, x)] {
                if p == v && !seen[q] {
                    seen[q] = true;
                    stack.push(q);
                }
            }
        }
    }
    if atoms.iter().all(|&i| seen[i]) {
        Some((common.len(), atoms.len()))
    } else {
        None
    }
}

/// Random graph over C/N/O with up to `max_atoms` atoms and at most
/// degree-4 atoms.
pub fn random_graph(rng: &mut ChaCha8Rng, max_atoms: usize) -> MolecularGraph {
    let n = rng.gen_range(1..=max_atoms);
    let elements = [Element::C, Element::C, Element::N, Element::O];
    let atoms: Vec<Atom> =
        (0..n).map(|_| Atom { element: elements[rng.gen_range(0..elements.len())], aromatic: false }).collect();
    let mut bonds = Vec::new();
    let mut deg = vec![0; n];
    for i in 0..n {
        for j in i + 1..n {
            if deg[i] < 4 && deg[j] < 4 && rng.gen_bool(0.45) {
                bonds.push(Bond { a: i, b: j, order: BondOrder::Single });
                deg[i] += 1;
                deg[j] += 1;
            }
        }
    }
    MolecularGraph::new(atoms, bonds).expect("valid random graph")
}
