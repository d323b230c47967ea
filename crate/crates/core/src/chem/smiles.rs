//! Parser for the organic-subset SMILES dialect.
//!
//! Supported: organic-subset atoms `B C N O P S F Cl Br I`, aromatic
//! `b c n o p s`, explicit bonds `- = #`, branches and ring closures `1`-`9`
//! and `%nn`. Bracket atoms, charges, isotopes, stereo marks and the `.`
//! separator are rejected as unknown tokens. Positions in errors are 1-based
//! byte columns.

use thiserror::Error;

use super::graph::{Atom, Bond, BondOrder, Element, GraphError, MolecularGraph};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SmilesError {
    #[error("empty SMILES string")]
    Empty,
    #[error("unknown token {byte:#04x} at position {position}")]
    UnknownToken { position: usize, byte: u8 },
    #[error("unbalanced branch at position {position}")]
    UnbalancedBranch { position: usize },
    #[error("empty branch at position {position}")]
    EmptyBranch { position: usize },
    #[error("ring bond {label} opened at position {position} is never closed")]
    UnclosedRingBond { position: usize, label: u8 },
    #[error("bond symbol at position {position} is not between two atoms")]
    MisplacedBond { position: usize },
    #[error("ring closure at position {position} is invalid: {reason}")]
    InvalidRingBond { position: usize, reason: &'static str },
}

impl SmilesError {
    pub fn position(&self) -> usize {
        match *self {
            SmilesError::Empty => 0,
            SmilesError::UnknownToken { position, .. }
            | SmilesError::UnbalancedBranch { position }
            | SmilesError::EmptyBranch { position }
            | SmilesError::UnclosedRingBond { position, .. }
            | SmilesError::MisplacedBond { position }
            | SmilesError::InvalidRingBond { position, .. } => position,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Last {
    Start,
    Atom,
    Ring,
    Bond,
    Open,
    Close,
}

struct OpenRing {
    atom: usize,
    order: Option<BondOrder>,
    position: usize,
}

pub fn parse_smiles(text: &str) -> Result<MolecularGraph, SmilesError> {
    parse_smiles_bytes(text.as_bytes())
}

/// Byte-level entry point; never panics on arbitrary input.
pub fn parse_smiles_bytes(input: &[u8]) -> Result<MolecularGraph, SmilesError> {
    if input.is_empty() {
        return Err(SmilesError::Empty);
    }
    let mut atoms: Vec<Atom> = Vec::new();
    let mut bonds: Vec<Bond> = Vec::new();
    let mut prev: Option<usize> = None;
    let mut pending: Option<(BondOrder, usize)> = None;
    // kind of token preceding a pending bond symbol
    let mut before_bond = Last::Start;
    let mut branches: Vec<(usize, usize)> = Vec::new();
    let mut rings: Vec<Option<OpenRing>> = (0..100).map(|_| None).collect();
    let mut last = Last::Start;

    let mut i = 0;
    while i < input.len() {
        let position = i + 1;
        let c = input[i];
        let atom = match c {
            b'C' if input.get(i + 1) == Some(&b'l') => Some((Element::Cl, false, 2)),
            b'B' if input.get(i + 1) == Some(&b'r') => Some((Element::Br, false, 2)),
            b'B' => Some((Element::B, false, 1)),
            b'C' => Some((Element::C, false, 1)),
            b'N' => Some((Element::N, false, 1)),
            b'O' => Some((Element::O, false, 1)),
            b'P' => Some((Element::P, false, 1)),
            b'S' => Some((Element::S, false, 1)),
            b'F' => Some((Element::F, false, 1)),
            b'I' => Some((Element::I, false, 1)),
            b'b' => Some((Element::B, true, 1)),
            b'c' => Some((Element::C, true, 1)),
            b'n' => Some((Element::N, true, 1)),
            b'o' => Some((Element::O, true, 1)),
            b'p' => Some((Element::P, true, 1)),
            b's' => Some((Element::S, true, 1)),
            _ => None,
        };
        if let Some((element, aromatic, width)) = atom {
            let idx = atoms.len();
            atoms.push(Atom { element, aromatic });
            if let Some(p) = prev {
                let order = match pending.take() {
                    Some((o, _)) => o,
                    None => implicit_order(&atoms, p, idx),
                };
                bonds.push(Bond { a: p, b: idx, order });
            }
            pending = None;
            prev = Some(idx);
            last = Last::Atom;
            i += width;
            continue;
        }
        match c {
            b'-' | b'=' | b'#' => {
                if pending.is_some() || !matches!(last, Last::Atom | Last::Ring | Last::Close | Last::Open) {
                    return Err(SmilesError::MisplacedBond { position });
                }
                let order = match c {
                    b'-' => BondOrder::Single,
                    b'=' => BondOrder::Double,
                    _ => BondOrder::Triple,
                };
                before_bond = last;
                pending = Some((order, position));
                last = Last::Bond;
                i += 1;
            }
            b'(' => {
                if last == Last::Bond {
                    return Err(SmilesError::MisplacedBond { position: pending.map_or(position, |p| p.1) });
                }
                let Some(p) = prev else {
                    return Err(SmilesError::UnbalancedBranch { position });
                };
                if last == Last::Open {
                    return Err(SmilesError::EmptyBranch { position });
                }
                branches.push((p, position));
                last = Last::Open;
                i += 1;
            }
            b')' => {
                if last == Last::Bond {
                    return Err(SmilesError::MisplacedBond { position: pending.map_or(position, |p| p.1) });
                }
                if last == Last::Open {
                    return Err(SmilesError::EmptyBranch { position });
                }
                let Some((atom, _)) = branches.pop() else {
                    return Err(SmilesError::UnbalancedBranch { position });
                };
                prev = Some(atom);
                last = Last::Close;
                i += 1;
            }
            b'0'..=b'9' | b'%' => {
                let (label, width) = if c == b'%' {
                    match (input.get(i + 1), input.get(i + 2)) {
                        (Some(d1 @ b'0'..=b'9'), Some(d2 @ b'0'..=b'9')) => ((d1 - b'0') * 10 + (d2 - b'0'), 3),
                        _ => return Err(SmilesError::UnknownToken { position, byte: c }),
                    }
                } else {
                    (c - b'0', 1)
                };
                let ring_ok = matches!(last, Last::Atom | Last::Ring)
                    || (last == Last::Bond && matches!(before_bond, Last::Atom | Last::Ring));
                let Some(current) = prev.filter(|_| ring_ok) else {
                    return Err(SmilesError::InvalidRingBond { position, reason: "ring label must follow an atom" });
                };
                let explicit = pending.take().map(|(o, _)| o);
                match rings[label as usize].take() {
                    None => {
                        rings[label as usize] = Some(OpenRing { atom: current, order: explicit, position });
                    }
                    Some(open) => {
                        if open.atom == current {
                            return Err(SmilesError::InvalidRingBond { position, reason: "atom bonded to itself" });
                        }
                        if bonds
                            .iter()
                            .any(|b| (b.a == open.atom && b.b == current) || (b.a == current && b.b == open.atom))
                        {
                            return Err(SmilesError::InvalidRingBond { position, reason: "atoms already bonded" });
                        }
                        let order = match (open.order, explicit) {
                            (Some(a), Some(b)) if a != b => {
                                return Err(SmilesError::InvalidRingBond {
                                    position,
                                    reason: "conflicting bond orders",
                                })
                            }
                            (Some(a), _) | (None, Some(a)) => a,
                            (None, None) => implicit_order(&atoms, open.atom, current),
                        };
                        bonds.push(Bond { a: open.atom, b: current, order });
                    }
                }
                last = Last::Ring;
                i += width;
            }
            _ => return Err(SmilesError::UnknownToken { position, byte: c }),
        }
    }

    if let Some((_, position)) = pending {
        return Err(SmilesError::MisplacedBond { position });
    }
    if let Some(&(_, position)) = branches.last() {
        return Err(SmilesError::UnbalancedBranch { position });
    }
    if let Some(open) =
        rings.iter().enumerate().filter_map(|(label, r)| r.as_ref().map(|r| (label, r))).min_by_key(|(_, r)| r.position)
    {
        return Err(SmilesError::UnclosedRingBond { position: open.1.position, label: open.0 as u8 });
    }

    MolecularGraph::new(atoms, bonds).map_err(|e| match e {
        // unreachable for parser-built graphs; reported at the start for safety
        GraphError::AtomOutOfRange { .. } | GraphError::SelfBond { .. } | GraphError::DuplicateBond { .. } => {
            SmilesError::InvalidRingBond { position: 1, reason: "inconsistent bond table" }
        }
    })
}

fn implicit_order(atoms: &[Atom], a: usize, b: usize) -> BondOrder {
    if atoms[a].aromatic && atoms[b].aromatic {
        BondOrder::Aromatic
    } else {
        BondOrder::Single
    }
}

/// Count of atom tokens in a SMILES string, independent of the parser.
pub fn count_atom_tokens(text: &str) -> usize {
    let bytes = text.as_bytes();
    let mut i = 0;
    let mut n = 0;
    while i < bytes.len() {
        match bytes[i] {
            b'C' if bytes.get(i + 1) == Some(&b'l') => {
                n += 1;
                i += 2;
            }
            b'B' if bytes.get(i + 1) == Some(&b'r') => {
                n += 1;
                i += 2;
            }
            b'B' | b'C' | b'N' | b'O' | b'P' | b'S' | b'F' | b'I' | b'b' | b'c' | b'n' | b'o' | b'p' | b's' => {
                n += 1;
                i += 1;
            }
            _ => i += 1,
        }
    }
    n
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bond_set(g: &MolecularGraph) -> Vec<(usize, usize, BondOrder)> {
        g.bonds().iter().map(|b| (b.a, b.b, b.order)).collect()
    }

    #[test]
    fn ethanol() {
        let g = parse_smiles("CCO").unwrap();
        let elements: Vec<_> = g.atoms().iter().map(|a| a.element).collect();
        assert_eq!(elements, vec![Element::C, Element::C, Element::O]);
        assert_eq!(bond_set(&g), vec![(0, 1, BondOrder::Single), (1, 2, BondOrder::Single)]);
    }

    #[test]
    fn cyclopropane_is_all_ring() {
        let g = parse_smiles("C1CC1").unwrap();
        assert_eq!(g.atom_count(), 3);
        assert_eq!(g.bond_count(), 3);
        assert!(g.bonds().iter().all(|b| b.order == BondOrder::Single));
        assert!(g.ring_bonds().iter().all(|&r| r));
    }

    #[test]
    fn open_branch_at_end() {
        assert_eq!(parse_smiles("C("), Err(SmilesError::UnbalancedBranch { position: 2 }));
    }

    #[test]
    fn errors_carry_positions() {
        assert_eq!(parse_smiles("CC)"), Err(SmilesError::UnbalancedBranch { position: 3 }));
        assert_eq!(parse_smiles("C1CC"), Err(SmilesError::UnclosedRingBond { position: 2, label: 1 }));
        assert_eq!(parse_smiles("C[NH4+]"), Err(SmilesError::UnknownToken { position: 2, byte: b'[' }));
        assert_eq!(parse_smiles("C=(C)"), Err(SmilesError::MisplacedBond { position: 2 }));
        assert_eq!(parse_smiles("CC="), Err(SmilesError::MisplacedBond { position: 3 }));
        assert_eq!(parse_smiles("C()C"), Err(SmilesError::EmptyBranch { position: 3 }));
        assert_eq!(parse_smiles(""), Err(SmilesError::Empty));
        assert!(matches!(parse_smiles("C11"), Err(SmilesError::InvalidRingBond { position: 3, .. })));
        assert!(matches!(parse_smiles("C1C1"), Err(SmilesError::InvalidRingBond { .. })));
        assert!(matches!(parse_smiles("C=1CC#1"), Err(SmilesError::InvalidRingBond { .. })));
    }

    #[test]
    fn aromatic_and_two_letter_atoms() {
        let g = parse_smiles("c1ccccc1Cl").unwrap();
        assert_eq!(g.atom_count(), 7);
        assert_eq!(g.atoms()[6].element, Element::Cl);
        assert_eq!(g.bonds().iter().filter(|b| b.order == BondOrder::Aromatic).count(), 6);
        assert_eq!(g.bonds()[6].order, BondOrder::Single);
        let g = parse_smiles("BrCB").unwrap();
        assert_eq!(g.atoms().iter().map(|a| a.element).collect::<Vec<_>>(), vec![Element::Br, Element::C, Element::B]);
    }

    #[test]
    fn ring_bond_orders_and_percent_labels() {
        let g = parse_smiles("C=1CCCCC1").unwrap();
        assert_eq!(g.bonds().last().unwrap().order, BondOrder::Double);
        let g = parse_smiles("C%12CC%12").unwrap();
        assert_eq!(g.bond_count(), 3);
        let g = parse_smiles("C1CC=1").unwrap();
        assert_eq!(g.bonds().last().unwrap().order, BondOrder::Double);
    }

    #[test]
    fn branches_attach_to_branch_point() {
        let g = parse_smiles("CC(C)(C)O").unwrap();
        assert_eq!(
            bond_set(&g),
            vec![
                (0, 1, BondOrder::Single),
                (1, 2, BondOrder::Single),
                (1, 3, BondOrder::Single),
                (1, 4, BondOrder::Single)
            ]
        );
        let g = parse_smiles("CC(=O)N").unwrap();
        assert_eq!(g.bonds()[1].order, BondOrder::Double);
        assert_eq!(g.bonds()[2], Bond { a: 1, b: 3, order: BondOrder::Single });
    }

    #[test]
    fn token_count_helper() {
        assert_eq!(count_atom_tokens("CC(=O)Nc1ccc(Cl)cc1"), 11);
    }
}
