//! Seeded generator of drug-like organic-subset SMILES, used for demo
//! libraries, benchmarks and the codec training sample.

use rand::seq::SliceRandom;
use rand::Rng;

use super::{parse_smiles, rotatable_bonds};
use crate::seed;

struct RingTemplate {
    atoms: &'static [&'static str],
}

const RINGS: &[RingTemplate] = &[
    RingTemplate { atoms: &["c", "c", "c", "c", "c", "c"] },
    RingTemplate { atoms: &["c", "c", "c", "c", "c", "c"] },
    RingTemplate { atoms: &["c", "c", "c", "n", "c", "c"] },
    RingTemplate { atoms: &["c", "c", "n", "c", "n", "c"] },
    RingTemplate { atoms: &["c", "c", "c", "o", "c"] },
    RingTemplate { atoms: &["c", "c", "c", "s", "c"] },
    RingTemplate { atoms: &["c", "s", "c", "n", "c"] },
    RingTemplate { atoms: &["C", "C", "C", "N", "C", "C"] },
    RingTemplate { atoms: &["C", "C", "C", "O", "C", "C"] },
    RingTemplate { atoms: &["C", "C", "C", "C", "C", "C"] },
    RingTemplate { atoms: &["C", "C", "C", "C", "C"] },
    RingTemplate { atoms: &["C", "C", "N", "C", "C", "N"] },
    RingTemplate { atoms: &["C", "C", "C"] },
];

const LINKERS: &[&str] =
    &["", "", "C", "CC", "O", "N", "C(=O)N", "NC(=O)", "S(=O)(=O)N", "CO", "OC", "CN", "NC", "C(=O)", "CCN", "C=C"];

const SUBSTITUENTS: &[&str] = &[
    "F",
    "F",
    "Cl",
    "Br",
    "C",
    "C",
    "O",
    "N",
    "OC",
    "C(F)(F)F",
    "C#N",
    "C(=O)O",
    "C(=O)N",
    "N(C)C",
    "CC",
    "S(C)(=O)=O",
    "OCC",
    "C(C)C",
];

const CAPS: &[&str] = &["", "", "C", "CC", "CO", "N", "OC", "CC(C)", "NC(=O)C", "COC"];

fn ring_smiles<R: Rng>(rng: &mut R, label: u8, out: &mut String) {
    let t = RINGS.choose(rng).expect("non-empty table");
    let n = t.atoms.len();
    let subs = rng.gen_range(0..=2usize);
    // substituent positions: interior carbon atoms only
    let mut slots: Vec<usize> = (1..n - 1).filter(|&i| t.atoms[i] == "c" || t.atoms[i] == "C").collect();
    slots.shuffle(rng);
    slots.truncate(subs);
    for (i, atom) in t.atoms.iter().enumerate() {
        out.push_str(atom);
        if i == 0 || i == n - 1 {
            out.push(char::from(b'0' + label));
        }
        if slots.contains(&i) {
            out.push('(');
            out.push_str(SUBSTITUENTS.choose(rng).expect("non-empty table"));
            out.push(')');
        }
    }
}

/// One molecule; deterministic in `rng` state.
pub fn molecule<R: Rng>(rng: &mut R) -> String {
    let mut s = String::new();
    s.push_str(CAPS.choose(rng).expect("non-empty table"));
    let units = rng.gen_range(1..=3u8);
    for k in 0..units {
        if k > 0 {
            s.push_str(LINKERS.choose(rng).expect("non-empty table"));
        }
        ring_smiles(rng, k + 1, &mut s);
    }
    if rng.gen_bool(0.5) {
        s.push_str(SUBSTITUENTS.choose(rng).expect("non-empty table"));
    }
    s
}

/// `count` SMILES strings from `seed`, each inside the default batching
/// classes (fewer than 80 heavy atoms and 12 rotatable bonds).
pub fn generate(count: usize, seed: u64) -> Vec<String> {
    let mut rng = seed::rng(seed);
    (0..count)
        .map(|_| loop {
            let s = molecule(&mut rng);
            let g = parse_smiles(&s).expect("generated SMILES are valid");
            if g.atom_count() < 80 && rotatable_bonds(&g) < 12 {
                break s;
            }
        })
        .collect()
}

/// Library text (`SMILES<TAB>ID`) with ids `LIG000001`, ...
pub fn library_text(count: usize, seed: u64) -> String {
    let smiles = generate(count, seed);
    let ids: Vec<String> = (1..=count).map(|i| format!("LIG{i:06}")).collect();
    super::library::format_library(smiles.iter().map(String::as_str).zip(ids.iter().map(String::as_str)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chem::{parse_smiles, rotatable_bonds};

    #[test]
    fn generated_molecules_parse_and_fit_default_classes() {
        for s in generate(2000, 42) {
            let g = parse_smiles(&s).unwrap_or_else(|e| panic!("{s}: {e}"));
            assert!(g.is_connected(), "{s}");
            assert!((1..80).contains(&g.atom_count()), "{s}");
            assert!(rotatable_bonds(&g) < 12, "{s}");
        }
    }

    #[test]
    fn deterministic() {
        assert_eq!(generate(50, 9), generate(50, 9));
        assert_ne!(generate(50, 9), generate(50, 10));
    }
}
