use std::collections::HashSet;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Element {
    B,
    C,
    N,
    O,
    P,
    S,
    F,
    Cl,
    Br,
    I,
}

impl Element {
    pub fn symbol(self) -> &'static str {
        match self {
            Element::B => "B",
            Element::C => "C",
            Element::N => "N",
            Element::O => "O",
            Element::P => "P",
            Element::S => "S",
            Element::F => "F",
            Element::Cl => "Cl",
            Element::Br => "Br",
            Element::I => "I",
        }
    }

    /// Elements allowed as lowercase aromatic atoms.
    pub fn can_be_aromatic(self) -> bool {
        matches!(self, Element::B | Element::C | Element::N | Element::O | Element::P | Element::S)
    }
}

impl fmt::Display for Element {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.symbol())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Atom {
    pub element: Element,
    pub aromatic: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BondOrder {
    Single,
    Double,
    Triple,
    Aromatic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Bond {
    pub a: usize,
    pub b: usize,
    pub order: BondOrder,
}

impl Bond {
    pub fn other(&self, atom: usize) -> usize {
        if self.a == atom {
            self.b
        } else {
            self.a
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GraphError {
    #[error("bond {bond} references atom {atom}, graph has {atoms} atoms")]
    AtomOutOfRange { bond: usize, atom: usize, atoms: usize },
    #[error("bond {bond} joins atom {atom} to itself")]
    SelfBond { bond: usize, atom: usize },
    #[error("bond {bond} duplicates the pair ({a}, {b})")]
    DuplicateBond { bond: usize, a: usize, b: usize },
}

/// Heavy-atom molecular graph. Hydrogens are implicit.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MolecularGraph {
    atoms: Vec<Atom>,
    bonds: Vec<Bond>,
    ring_bonds: Vec<bool>,
    // (neighbour atom, bond index), in bond insertion order
    adjacency: Vec<Vec<(usize, usize)>>,
}

impl MolecularGraph {
    pub fn new(atoms: Vec<Atom>, bonds: Vec<Bond>) -> Result<Self, GraphError> {
        let n = atoms.len();
        let mut seen = HashSet::with_capacity(bonds.len());
        let mut adjacency = vec![Vec::new(); n];
        for (i, bond) in bonds.iter().enumerate() {
            for atom in [bond.a, bond.b] {
                if atom >= n {
                    return Err(GraphError::AtomOutOfRange { bond: i, atom, atoms: n });
                }
            }
            if bond.a == bond.b {
                return Err(GraphError::SelfBond { bond: i, atom: bond.a });
            }
            let key = (bond.a.min(bond.b), bond.a.max(bond.b));
            if !seen.insert(key) {
                return Err(GraphError::DuplicateBond { bond: i, a: key.0, b: key.1 });
            }
            adjacency[bond.a].push((bond.b, i));
            adjacency[bond.b].push((bond.a, i));
        }
        let ring_bonds = cyclic_bonds(n, bonds.len(), &adjacency);
        Ok(Self { atoms, bonds, ring_bonds, adjacency })
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn bonds(&self) -> &[Bond] {
        &self.bonds
    }

    /// Per-bond cycle membership flags, parallel to [`bonds`](Self::bonds).
    pub fn ring_bonds(&self) -> &[bool] {
        &self.ring_bonds
    }

    pub fn atom_count(&self) -> usize {
        self.atoms.len()
    }

    pub fn bond_count(&self) -> usize {
        self.bonds.len()
    }

    pub fn degree(&self, atom: usize) -> usize {
        self.adjacency[atom].len()
    }

    pub fn neighbors(&self, atom: usize) -> impl Iterator<Item = usize> + '_ {
        self.adjacency[atom].iter().map(|&(n, _)| n)
    }

    /// Neighbours paired with the index of the connecting bond.
    pub fn incident(&self, atom: usize) -> &[(usize, usize)] {
        &self.adjacency[atom]
    }

    pub fn bond_between(&self, a: usize, b: usize) -> Option<usize> {
        self.adjacency[a].iter().find(|&&(n, _)| n == b).map(|&(_, bi)| bi)
    }

    pub fn is_connected(&self) -> bool {
        if self.atoms.is_empty() {
            return true;
        }
        self.reachable_from(0, None).iter().all(|&r| r)
    }

    /// Atoms reachable from `start`, optionally ignoring one bond.
    pub fn reachable_from(&self, start: usize, skip_bond: Option<usize>) -> Vec<bool> {
        let mut seen = vec![false; self.atoms.len()];
        let mut stack = vec![start];
        seen[start] = true;
        while let Some(u) = stack.pop() {
            for &(v, bi) in &self.adjacency[u] {
                if Some(bi) == skip_bond || seen[v] {
                    continue;
                }
                seen[v] = true;
                stack.push(v);
            }
        }
        seen
    }
}

/// A bond lies on a cycle iff it is not a bridge. Iterative Tarjan lowlink so
/// long chains cannot overflow the stack.
fn cyclic_bonds(n: usize, m: usize, adjacency: &[Vec<(usize, usize)>]) -> Vec<bool> {
    let mut is_bridge = vec![false; m];
    let mut disc = vec![usize::MAX; n];
    let mut low = vec![0usize; n];
    let mut timer = 0usize;
    // frame: (vertex, bond used to enter, next adjacency cursor)
    let mut stack: Vec<(usize, usize, usize)> = Vec::new();
    for root in 0..n {
        if disc[root] != usize::MAX {
            continue;
        }
        disc[root] = timer;
        low[root] = timer;
        timer += 1;
        stack.push((root, usize::MAX, 0));
        while let Some(frame) = stack.last_mut() {
            let (u, parent_bond, cursor) = *frame;
            if cursor < adjacency[u].len() {
                frame.2 += 1;
                let (v, bi) = adjacency[u][cursor];
                if bi == parent_bond {
                    continue;
                }
                if disc[v] == usize::MAX {
                    disc[v] = timer;
                    low[v] = timer;
                    timer += 1;
                    stack.push((v, bi, 0));
                } else {
                    low[u] = low[u].min(disc[v]);
                }
            } else {
                stack.pop();
                if let Some(&(p, _, _)) = stack.last() {
                    low[p] = low[p].min(low[u]);
                    if low[u] > disc[p] {
                        is_bridge[parent_bond] = true;
                    }
                }
            }
        }
    }
    is_bridge.into_iter().map(|b| !b).collect()
}
