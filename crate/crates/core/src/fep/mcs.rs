//! Exact maximum common connected substructure.
//!
//! Nodes of the search graph are oriented bond pairs `(a1->b1, a2->b2)` with
//! matching elements; two nodes are compatible when their atom maps agree and
//! stay injective. A clique is a common edge subgraph, and cliques are grown
//! only through nodes sharing an atom with the clique so the mapped subgraph
//! stays connected. Branch-and-bound uses a greedy colouring bound.

use fixedbitset::FixedBitSet;
use serde::{Deserialize, Serialize};

use super::FepError;
use crate::chem::MolecularGraph;

pub const MAX_MCS_ATOMS: usize = 64;

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct McsMapping {
    /// `(atom in a, atom in b)`, sorted by the first index.
    pub pairs: Vec<(usize, usize)>,
    pub bonds: usize,
}

impl McsMapping {
    pub fn atoms(&self) -> usize {
        self.pairs.len()
    }

    pub fn reversed(&self) -> McsMapping {
        let mut pairs: Vec<_> = self.pairs.iter().map(|&(i, j)| (j, i)).collect();
        pairs.sort_unstable();
        McsMapping { pairs, bonds: self.bonds }
    }
}

/// Bonds of `a` whose endpoints map onto a bond of `b`.
pub fn common_bond_count(a: &MolecularGraph, b: &MolecularGraph, pairs: &[(usize, usize)]) -> usize {
    let mut map = vec![usize::MAX; a.atom_count()];
    for &(i, j) in pairs {
        map[i] = j;
    }
    a.bonds()
        .iter()
        .filter(|bd| {
            let (x, y) = (map[bd.a], map[bd.b]);
            x != usize::MAX && y != usize::MAX && b.bond_between(x, y).is_some()
        })
        .count()
}

#[derive(Debug, Clone, Copy)]
struct Node {
    a: [usize; 2],
    b: [usize; 2],
}

/// (bonds, atoms), compared lexicographically.
type Score = (usize, usize);

struct Problem {
    na: usize,
    nb: usize,
    nodes: Vec<Node>,
    compat: Vec<FixedBitSet>,
    /// Nodes sharing an atom of `a` with node `k`.
    touches: Vec<FixedBitSet>,
    /// Nodes mapping atom `i` of `a`.
    covering: Vec<FixedBitSet>,
}

impl Problem {
    fn new(a: &MolecularGraph, b: &MolecularGraph) -> Self {
        let ea = a.atoms();
        let eb = b.atoms();
        let mut nodes = Vec::new();
        for ba in a.bonds() {
            for bb in b.bonds() {
                for (x, y) in [(bb.a, bb.b), (bb.b, bb.a)] {
                    if ea[ba.a].element == eb[x].element && ea[ba.b].element == eb[y].element {
                        nodes.push(Node { a: [ba.a, ba.b], b: [x, y] });
                    }
                }
            }
        }
        let n = nodes.len();
        let mut compat = vec![FixedBitSet::with_capacity(n); n];
        let mut touches = vec![FixedBitSet::with_capacity(n); n];
        let mut covering = vec![FixedBitSet::with_capacity(n); a.atom_count()];
        for (u, nu) in nodes.iter().enumerate() {
            for &i in &nu.a {
                covering[i].insert(u);
            }
            for (v, nv) in nodes.iter().enumerate().skip(u + 1) {
                let mut ok = true;
                let mut share = false;
                for p in 0..2 {
                    for q in 0..2 {
                        let same_a = nu.a[p] == nv.a[q];
                        if same_a != (nu.b[p] == nv.b[q]) {
                            ok = false;
                        }
                        share |= same_a;
                    }
                }
                if ok {
                    compat[u].insert(v);
                    compat[v].insert(u);
                }
                if share {
                    touches[u].insert(v);
                    touches[v].insert(u);
                }
            }
        }
        Self { na: a.atom_count(), nb: b.atom_count(), nodes, compat, touches, covering }
    }
}

/// Per-search constraints and result slot.
struct Search<'p> {
    p: &'p Problem,
    /// Atoms of `a` that must be mapped.
    required: Vec<usize>,
    /// Feasibility mode: stop at the first clique reaching this score.
    target: Option<Score>,
    best: Score,
    witness: Vec<usize>,
    done: bool,
    cover: Vec<u16>,
    atoms: usize,
}

impl<'p> Search<'p> {
    fn new(p: &'p Problem, required: Vec<usize>, target: Option<Score>) -> Self {
        Self { p, required, target, best: (0, 0), witness: Vec::new(), done: false, cover: vec![0; p.na], atoms: 0 }
    }

    fn push(&mut self, v: usize) {
        for &i in &self.p.nodes[v].a {
            if self.cover[i] == 0 {
                self.atoms += 1;
            }
            self.cover[i] += 1;
        }
    }

    fn pop(&mut self, v: usize) {
        for &i in &self.p.nodes[v].a {
            self.cover[i] -= 1;
            if self.cover[i] == 0 {
                self.atoms -= 1;
            }
        }
    }

    fn run(&mut self, allowed: &FixedBitSet) {
        let mut remaining = allowed.clone();
        let order: Vec<usize> = allowed.ones().collect();
        let mut clique = Vec::new();
        for v in order {
            if self.done {
                break;
            }
            if let Some(&r) = self.required.first() {
                // every admissible clique covers the first required atom, so
                // it suffices to start from nodes that map it
                if !self.p.covering[r].contains(v) {
                    continue;
                }
            }
            let mut u = remaining.clone();
            u.intersect_with(&self.p.compat[v]);
            let mut pset = u.clone();
            pset.intersect_with(&self.p.touches[v]);
            u.difference_with(&pset);
            let touch = self.p.touches[v].clone();
            clique.push(v);
            self.push(v);
            self.expand(&mut clique, pset, u, &touch);
            self.pop(v);
            clique.pop();
            remaining.set(v, false);
        }
    }

    fn record(&mut self, clique: &[usize]) {
        let score = (clique.len(), self.atoms);
        let reaches_target = self.target.is_some_and(|t| score >= t);
        let better = score > self.best;
        if !(better || reaches_target) {
            return;
        }
        if self.required.iter().any(|&r| self.cover[r] == 0) {
            return;
        }
        self.best = score;
        self.witness = clique.to_vec();
        if reaches_target {
            self.done = true;
        }
    }

    fn expand(&mut self, clique: &mut Vec<usize>, mut pset: FixedBitSet, dset: FixedBitSet, touch: &FixedBitSet) {
        self.record(clique);
        if self.done {
            return;
        }
        let mut pool = pset.clone();
        pool.union_with(&dset);
        if !self.required.iter().all(|&r| self.cover[r] > 0 || !pool.is_disjoint(&self.p.covering[r])) {
            return;
        }
        let (order, colours) = colour(&pool, &self.p.compat);
        let max_d = order.iter().zip(&colours).filter(|(v, _)| dset.contains(**v)).map(|(_, &c)| c).max().unwrap_or(0);
        let cap = self.p.na.min(self.p.nb);
        for k in (0..order.len()).rev() {
            let v = order[k];
            if !pset.contains(v) {
                continue;
            }
            let extra = colours[k].max(max_d);
            let bound = (clique.len() + extra, cap.min(self.atoms + extra));
            let beaten = match self.target {
                Some(t) => bound < t,
                None => bound <= self.best,
            };
            if beaten {
                return;
            }
            let mut u = pset.clone();
            u.union_with(&dset);
            u.intersect_with(&self.p.compat[v]);
            let mut t2 = touch.clone();
            t2.union_with(&self.p.touches[v]);
            let mut p2 = u.clone();
            p2.intersect_with(&t2);
            u.difference_with(&p2);
            clique.push(v);
            self.push(v);
            self.expand(clique, p2, u, &t2);
            self.pop(v);
            clique.pop();
            if self.done {
                return;
            }
            pset.set(v, false);
        }
    }
}

/// Greedy sequential colouring into independent sets of the compatibility
/// graph. Returns vertices by ascending colour with their colour numbers.
fn colour(pool: &FixedBitSet, compat: &[FixedBitSet]) -> (Vec<usize>, Vec<usize>) {
    let mut uncoloured = pool.clone();
    let mut order = Vec::with_capacity(pool.count_ones(..));
    let mut colours = Vec::with_capacity(order.capacity());
    let mut c = 0;
    while !uncoloured.is_clear() {
        c += 1;
        let mut q = uncoloured.clone();
        while let Some(v) = q.ones().next() {
            q.set(v, false);
            q.difference_with(&compat[v]);
            uncoloured.set(v, false);
            order.push(v);
            colours.push(c);
        }
    }
    (order, colours)
}

fn pairs_of(p: &Problem, clique: &[usize]) -> Vec<(usize, usize)> {
    let mut pairs: Vec<(usize, usize)> =
        clique.iter().flat_map(|&v| (0..2).map(move |k| (p.nodes[v].a[k], p.nodes[v].b[k]))).collect();
    pairs.sort_unstable();
    pairs.dedup();
    pairs
}

/// Nodes consistent with a partial decision over the first atoms of `a`.
fn admissible(p: &Problem, decided: &[Option<usize>]) -> FixedBitSet {
    let mut used_b = vec![false; p.nb];
    for j in decided.iter().flatten() {
        used_b[*j] = true;
    }
    let mut out = FixedBitSet::with_capacity(p.nodes.len());
    for (k, n) in p.nodes.iter().enumerate() {
        let ok = (0..2).all(|s| {
            let (i, j) = (n.a[s], n.b[s]);
            match decided.get(i) {
                Some(Some(d)) => *d == j,
                Some(None) => false,
                None => !used_b[j],
            }
        });
        if ok {
            out.insert(k);
        }
    }
    out
}

/// Maximum common connected substructure of `a` and `b` under element
/// matching. Maximizes mapped bonds, then mapped atoms; among optimal
/// mappings the lexicographically smallest sorted pair list is returned.
pub fn mcs(a: &MolecularGraph, b: &MolecularGraph) -> Result<McsMapping, FepError> {
    for g in [a, b] {
        if g.atom_count() > MAX_MCS_ATOMS {
            return Err(FepError::TooLarge { atoms: g.atom_count(), limit: MAX_MCS_ATOMS });
        }
    }
    let p = Problem::new(a, b);
    if p.nodes.is_empty() {
        let single = (0..a.atom_count())
            .find_map(|i| (0..b.atom_count()).find(|&j| a.atoms()[i].element == b.atoms()[j].element).map(|j| (i, j)));
        return Ok(McsMapping { pairs: single.into_iter().collect(), bonds: 0 });
    }

    let mut all = FixedBitSet::with_capacity(p.nodes.len());
    all.insert_range(..);
    let mut s = Search::new(&p, Vec::new(), None);
    s.run(&all);
    let opt = s.best;
    let mut witness = pairs_of(&p, &s.witness);

    // Fix atoms of `a` in index order to the smallest feasible partner,
    // re-checking optimality only for partners below the current witness.
    let mut decided: Vec<Option<usize>> = Vec::with_capacity(p.na);
    for i in 0..p.na {
        let current = witness.iter().find(|&&(x, _)| x == i).map(|&(_, j)| j);
        let limit = current.unwrap_or(p.nb);
        let nodes = &p.nodes;
        let mut candidates: Vec<usize> = p.covering[i]
            .ones()
            .flat_map(|k| (0..2).filter(move |&s| nodes[k].a[s] == i).map(move |s| nodes[k].b[s]))
            .filter(|&j| j < limit)
            .collect();
        candidates.sort_unstable();
        candidates.dedup();
        let mut chosen = current;
        for j in candidates {
            if decided.iter().flatten().any(|&d| d == j) {
                continue;
            }
            let mut trial = decided.clone();
            trial.push(Some(j));
            let allowed = admissible(&p, &trial);
            let required: Vec<usize> = trial.iter().enumerate().filter(|(_, d)| d.is_some()).map(|(x, _)| x).collect();
            let mut f = Search::new(&p, required, Some(opt));
            f.run(&allowed);
            if f.done {
                witness = pairs_of(&p, &f.witness);
                chosen = Some(j);
                break;
            }
        }
        decided.push(chosen);
    }
    debug_assert_eq!(common_bond_count(a, b, &witness), opt.0);
    Ok(McsMapping { pairs: witness, bonds: opt.0 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chem::parse_smiles;

    fn g(s: &str) -> MolecularGraph {
        parse_smiles(s).unwrap()
    }

    #[test]
    fn path_against_longer_path() {
        let m = mcs(&g("CC"), &g("CCC")).unwrap();
        assert_eq!((m.atoms(), m.bonds), (2, 1));
        assert_eq!(m.pairs, vec![(0, 0), (1, 1)]);
    }

    #[test]
    fn triangle_against_path() {
        let m = mcs(&g("C1CC1"), &g("CCC")).unwrap();
        assert_eq!((m.atoms(), m.bonds), (3, 2));
    }

    #[test]
    fn self_mapping_is_complete() {
        for s in ["c1ccccc1O", "CC(=O)NC", "C1CC2CCC1C2", "OCCN"] {
            let x = g(s);
            let m = mcs(&x, &x).unwrap();
            assert_eq!(m.atoms(), x.atom_count(), "{s}");
            assert_eq!(m.bonds, x.bond_count(), "{s}");
            assert_eq!(m.pairs, (0..x.atom_count()).map(|i| (i, i)).collect::<Vec<_>>());
        }
    }

    #[test]
    fn no_common_bond_falls_back_to_one_atom() {
        let m = mcs(&g("CO"), &g("NNO")).unwrap();
        assert_eq!(m.bonds, 0);
        assert_eq!(m.pairs, vec![(1, 2)]);
        assert!(mcs(&g("C"), &g("N")).unwrap().pairs.is_empty());
    }

    #[test]
    fn too_large_is_rejected() {
        let big = "C".repeat(65);
        assert!(matches!(mcs(&g(&big), &g("CC")), Err(FepError::TooLarge { .. })));
    }
}
