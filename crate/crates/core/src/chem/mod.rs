//! Molecular graphs from SMILES, size descriptors and toy 3D embedding.

mod embed;
mod graph;
pub mod library;
mod smiles;
pub mod synth;

pub use embed::{embed_3d, Conformer, EmbedError, Rotor, BOND_REST_LENGTH};
pub use graph::{Atom, Bond, BondOrder, Element, GraphError, MolecularGraph};
pub use library::{parse_library, LibraryError, LibraryRecord};
pub use smiles::{count_atom_tokens, parse_smiles, parse_smiles_bytes, SmilesError};

use serde::Serialize;

/// Indices of bonds that are single, acyclic and joint two non-terminal atoms.
pub fn rotatable_bond_indices(g: &MolecularGraph) -> Vec<usize> {
    g.bonds()
        .iter()
        .enumerate()
        .filter(|(i, b)| {
            b.order == BondOrder::Single && !g.ring_bonds()[*i] && g.degree(b.a) >= 2 && g.degree(b.b) >= 2
        })
        .map(|(i, _)| i)
        .collect()
}

pub fn rotatable_bonds(g: &MolecularGraph) -> usize {
    rotatable_bond_indices(g).len()
}

/// A parsed library entry with its size descriptors.
#[derive(Debug, Clone, Serialize)]
pub struct Ligand {
    pub id: String,
    pub smiles: String,
    #[serde(skip)]
    pub graph: MolecularGraph,
    pub heavy_atoms: usize,
    pub rotatable_bonds: usize,
}

impl Ligand {
    pub fn from_smiles(id: impl Into<String>, smiles: impl Into<String>) -> Result<Self, SmilesError> {
        let smiles = smiles.into();
        let graph = parse_smiles(&smiles)?;
        Ok(Self::from_graph(id, smiles, graph))
    }

    pub fn from_graph(id: impl Into<String>, smiles: String, graph: MolecularGraph) -> Self {
        Self { id: id.into(), heavy_atoms: graph.atom_count(), rotatable_bonds: rotatable_bonds(&graph), smiles, graph }
    }

    pub fn embed(&self, seed: u64) -> Result<Conformer, EmbedError> {
        embed_3d(&self.graph, seed).map(|c| c.with_id(self.id.clone()))
    }
}
