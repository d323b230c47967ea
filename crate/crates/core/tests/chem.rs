use proptest::prelude::*;
use vscreen_core::chem::{
    count_atom_tokens, parse_library, parse_smiles, parse_smiles_bytes, rotatable_bonds, synth, Ligand,
};

const ALPHABET: &[u8] = b"CNOSPFIBrcnospl()[]=#-+@/\\%0123456789.";

fn smiles_like() -> impl Strategy<Value = Vec<u8>> {
    prop::collection::vec(prop::sample::select(ALPHABET), 0..80)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(2000))]

    #[test]
    fn parser_never_panics_on_bytes(bytes in prop::collection::vec(any::<u8>(), 0..=4096)) {
        let _ = parse_smiles_bytes(&bytes);
    }

    #[test]
    fn parser_errors_are_positioned(bytes in smiles_like()) {
        if let Err(e) = parse_smiles_bytes(&bytes) {
            prop_assert!(e.position() <= bytes.len());
        }
    }

    #[test]
    fn accepted_graphs_are_well_formed(bytes in smiles_like()) {
        if let Ok(g) = parse_smiles_bytes(&bytes) {
            let mut seen = std::collections::BTreeSet::new();
            for b in g.bonds() {
                let (a, c) = (b.a.min(b.b), b.a.max(b.b));
                prop_assert!(a != c && c < g.atom_count());
                prop_assert!(seen.insert((a, c)));
            }
            prop_assert!(rotatable_bonds(&g) <= g.bond_count());
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn corpus_atoms_match_tokens(seed in any::<u64>()) {
        for s in synth::generate(10, seed) {
            let g = parse_smiles(&s).unwrap();
            prop_assert_eq!(g.atom_count(), count_atom_tokens(&s));
        }
    }

    #[test]
    fn embedding_is_deterministic_and_spread(seed in any::<u64>()) {
        let s = &synth::generate(1, seed)[0];
        let lig = Ligand::from_smiles("x", s.as_str()).unwrap();
        let a = lig.embed(seed).unwrap();
        prop_assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&lig.embed(seed).unwrap()).unwrap());
        prop_assert_eq!(a.atom_count(), lig.heavy_atoms);
        prop_assert!(a.atom_count() < 2 || a.min_pairwise_distance() >= 0.5);
    }
}

#[test]
fn acyclic_or_terminal_graphs_have_no_rotors() {
    for s in ["C", "CC", "C1CCCCC1", "c1ccccc1", "C1CC2CCC1C2"] {
        assert_eq!(rotatable_bonds(&parse_smiles(s).unwrap()), 0, "{s}");
    }
}

#[test]
fn fixture_counts_match_reference_toolkit() {
    let text = include_str!("fixtures/rdkit_counts.tsv");
    let mut n = 0;
    for line in text.lines().skip(1) {
        let f: Vec<&str> = line.split('\t').collect();
        let g = parse_smiles(f[1]).unwrap();
        assert_eq!(g.atom_count().to_string(), f[2], "{}", f[0]);
        assert_eq!(g.bond_count().to_string(), f[3], "{}", f[0]);
        n += 1;
    }
    assert_eq!(n, 1000);
}

#[test]
fn library_records_round_trip() {
    let text = synth::library_text(50, 8);
    let recs = parse_library(&text).unwrap();
    assert_eq!(recs.len(), 50);
    assert!(parse_library("# header\nCCO\n").unwrap()[0].id.starts_with('L'));
}
