use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{mcs, FepError, McsMapping};
use crate::chem::Ligand;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CompoundPair {
    pub a: String,
    pub b: String,
    /// Atoms of `a` onto atoms of `b`.
    pub mapping: McsMapping,
    /// Heavy atoms outside the common core, summed over both ligands.
    pub perturbation: usize,
}

/// Greedy matching on a complete weighted graph: heaviest edges first, ties
/// broken by the (smaller id, larger id) pair. With an odd count the leftover
/// vertex is paired again with its heaviest neighbour (lowest id on ties).
/// Returned pairs are `(i, j)` with `ids[i] < ids[j]`.
pub fn greedy_pairs(ids: &[&str], weight: &[Vec<usize>]) -> Vec<(usize, usize)> {
    let n = ids.len();
    let ordered = |i: usize, j: usize| if ids[i] <= ids[j] { (i, j) } else { (j, i) };
    let mut edges: Vec<(usize, usize)> =
        (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).map(|(i, j)| ordered(i, j)).collect();
    edges.sort_by(|&(a, b), &(c, d)| {
        weight[c][d].cmp(&weight[a][b]).then_with(|| (ids[a], ids[b]).cmp(&(ids[c], ids[d])))
    });
    let mut used = vec![false; n];
    let mut out = Vec::new();
    for (i, j) in edges {
        if !used[i] && !used[j] {
            used[i] = true;
            used[j] = true;
            out.push((i, j));
        }
    }
    if let Some(l) = (0..n).find(|&k| !used[k]) {
        let best = (0..n)
            .filter(|&k| k != l)
            .max_by(|&x, &y| weight[l][x].cmp(&weight[l][y]).then_with(|| ids[y].cmp(ids[x])));
        if let Some(m) = best {
            out.push(ordered(l, m));
        }
    }
    out
}

/// Pair ligands for relative free-energy runs, weighting each candidate pair
/// by the size of its maximum common substructure.
pub fn pair_compounds(ligands: &[Ligand]) -> Result<Vec<CompoundPair>, FepError> {
    let n = ligands.len();
    if n < 2 {
        return Err(FepError::NotEnoughLigands(n));
    }
    let index: Vec<(usize, usize)> = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect();
    let maps: Vec<McsMapping> =
        index.par_iter().map(|&(i, j)| mcs(&ligands[i].graph, &ligands[j].graph)).collect::<Result<_, _>>()?;
    let mut weight = vec![vec![0; n]; n];
    let mut by_pair = std::collections::HashMap::new();
    for (&(i, j), m) in index.iter().zip(maps) {
        weight[i][j] = m.atoms();
        weight[j][i] = m.atoms();
        by_pair.insert((i, j), m);
    }
    let ids: Vec<&str> = ligands.iter().map(|l| l.id.as_str()).collect();
    Ok(greedy_pairs(&ids, &weight)
        .into_iter()
        .map(|(i, j)| {
            let mapping = if i < j { by_pair[&(i, j)].clone() } else { by_pair[&(j, i)].reversed() };
            let core = mapping.atoms();
            CompoundPair {
                a: ligands[i].id.clone(),
                b: ligands[j].id.clone(),
                perturbation: (ligands[i].heavy_atoms - core) + (ligands[j].heavy_atoms - core),
                mapping,
            }
        })
        .collect())
}
