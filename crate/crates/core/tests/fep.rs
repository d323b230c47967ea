mod support;

use std::time::Instant;

use rand::Rng;
use rand_distr::{Distribution, Normal};
use support::mcs_oracle::{brute_force_mcs, random_graph};
use vscreen_core::chem::{synth, Ligand};
use vscreen_core::fep::{
    abfe_estimate, awh_estimate, common_bond_count, greedy_pairs, mcs, pair_compounds, run_until_sem, sem,
    AlchemicalModel, AwhParams, EnergySamples, SolvationTerms,
};
use vscreen_core::seed;

#[test]
fn mcs_matches_exhaustive_search_on_small_graphs() {
    let mut rng = seed::rng(2024);
    for k in 0..200 {
        let a = random_graph(&mut rng, 6);
        let b = random_graph(&mut rng, 6);
        let m = mcs(&a, &b).unwrap();
        let (score, pairs) = brute_force_mcs(&a, &b);
        assert_eq!((m.bonds, m.atoms()), score, "pair {k}");
        assert_eq!(m.pairs, pairs, "pair {k}");
        assert_eq!(common_bond_count(&a, &b, &m.pairs), m.bonds);
        let r = mcs(&b, &a).unwrap();
        assert_eq!((r.bonds, r.atoms()), (m.bonds, m.atoms()), "symmetry, pair {k}");
    }
}

#[test]
fn mcs_mapping_is_valid_on_drug_like_pairs() {
    let smiles = synth::generate(12, 77);
    let ligands: Vec<Ligand> =
        smiles.iter().enumerate().map(|(i, s)| Ligand::from_smiles(format!("S{i}"), s.as_str()).unwrap()).collect();
    let t = Instant::now();
    for w in ligands.windows(2) {
        let (a, b) = (&w[0].graph, &w[1].graph);
        let m = mcs(a, b).unwrap();
        let mut seen_b: Vec<usize> = m.pairs.iter().map(|p| p.1).collect();
        seen_b.sort_unstable();
        seen_b.dedup();
        assert_eq!(seen_b.len(), m.pairs.len());
        for &(i, j) in &m.pairs {
            assert_eq!(a.atoms()[i].element, b.atoms()[j].element);
        }
        assert_eq!(common_bond_count(a, b, &m.pairs), m.bonds);
        assert_eq!(mcs(b, a).unwrap().atoms(), m.atoms());
    }
    eprintln!("11 drug-like MCS pairs (both directions) in {:?}", t.elapsed());
}

#[test]
fn greedy_pairing_matches_exhaustive_on_four_ligands() {
    for smiles in [
        ["c1ccccc1CCO", "c1ccccc1CCN", "C1CCCCC1C(=O)O", "C1CCCCC1C(=O)N"],
        ["OCCOCCO", "c1ccncc1CCCN", "OCCOCCN", "c1ccncc1CCCS"],
    ] {
        let ligands: Vec<Ligand> =
            smiles.iter().enumerate().map(|(i, s)| Ligand::from_smiles(format!("L{i}"), *s).unwrap()).collect();
        let pairs = pair_compounds(&ligands).unwrap();
        let w = |i: usize, j: usize| mcs(&ligands[i].graph, &ligands[j].graph).unwrap().atoms();
        let matchings = [[(0, 1), (2, 3)], [(0, 2), (1, 3)], [(0, 3), (1, 2)]];
        let totals: Vec<usize> = matchings.iter().map(|m| m.iter().map(|&(i, j)| w(i, j)).sum()).collect();
        let best = *totals.iter().max().unwrap();
        let got: usize = pairs.iter().map(|p| p.mapping.atoms()).sum();
        assert_eq!(got, best, "{smiles:?}");
        if totals.iter().filter(|&&t| t == best).count() == 1 {
            let k = totals.iter().position(|&t| t == best).unwrap();
            let want: Vec<(String, String)> =
                matchings[k].iter().map(|&(i, j)| (format!("L{i}"), format!("L{j}"))).collect();
            let have: Vec<(String, String)> = pairs.iter().map(|p| (p.a.clone(), p.b.clone())).collect();
            let (mut want, mut have) = (want, have);
            want.sort();
            have.sort();
            assert_eq!(have, want);
        }
    }
}

#[test]
fn greedy_pairing_is_a_half_approximation() {
    let mut rng = seed::rng(5);
    for _ in 0..200 {
        let n = 2 * rng.gen_range(1..=4);
        let mut w = vec![vec![0usize; n]; n];
        for i in 0..n {
            for j in i + 1..n {
                let x = rng.gen_range(0..10);
                w[i][j] = x;
                w[j][i] = x;
            }
        }
        let names: Vec<String> = (0..n).map(|i| format!("x{i}")).collect();
        let ids: Vec<&str> = names.iter().map(String::as_str).collect();
        let got: usize = greedy_pairs(&ids, &w).iter().map(|&(i, j)| w[i][j]).sum();
        assert!(2 * got >= best_matching(&w, &mut vec![false; n]));
    }
}

fn best_matching(w: &[Vec<usize>], used: &mut Vec<bool>) -> usize {
    let Some(i) = used.iter().position(|u| !u) else { return 0 };
    used[i] = true;
    let mut best = 0;
    for j in 0..w.len() {
        if !used[j] {
            used[j] = true;
            best = best.max(w[i][j] + best_matching(w, used));
            used[j] = false;
        }
    }
    used[i] = false;
    best
}

fn awh_mean(model: &AlchemicalModel, seeds: u64) -> (f64, f64) {
    let vals: Vec<f64> =
        (0..seeds).map(|s| awh_estimate(model, &AwhParams::default(), seed::split(99, s)).unwrap().delta_f).collect();
    (vals.iter().sum::<f64>() / vals.len() as f64, sem(&vals))
}

#[test]
fn awh_recovers_analytic_free_energies() {
    for (name, model) in [
        ("symmetric", AlchemicalModel::symmetric()),
        ("offset", AlchemicalModel::offset_wells(2.0)),
        ("harmonic", AlchemicalModel::harmonic(1.0, 2.0)),
    ] {
        let exact = model.exact_delta_f();
        let (mean, se) = awh_mean(&model, 20);
        eprintln!("{name}: mean {mean:.4} exact {exact:.4} se {se:.4}");
        assert!((mean - exact).abs() <= 3.0 * se, "{name}: {mean} vs {exact} (se {se})");
    }
}

#[test]
fn awh_reversal_negates_estimate() {
    let model = AlchemicalModel::offset_wells(2.0);
    let (fwd, se_f) = awh_mean(&model, 20);
    let (rev, se_r) = awh_mean(&model.reversed(), 20);
    assert!((fwd + rev).abs() <= 3.0 * (se_f * se_f + se_r * se_r).sqrt(), "{fwd} vs {rev}");
}

#[test]
fn awh_multi_state_ladder() {
    let m = AlchemicalModel::interpolated(
        vscreen_core::fep::LambdaState { center: 0.0, stiffness: 1.0, offset: 0.0 },
        vscreen_core::fep::LambdaState { center: 1.0, stiffness: 4.0, offset: 1.5 },
        4,
    );
    let r = awh_estimate(&m, &AwhParams::with_steps(400_000), 8).unwrap();
    assert!(r.converged);
    assert!((r.delta_f - m.exact_delta_f()).abs() < 0.2, "{} vs {}", r.delta_f, m.exact_delta_f());
    assert!(r.history.iter().all(|s| s.flatness >= 0.8));
}

#[test]
fn coordinate_step_is_tuned() {
    let r = awh_estimate(&AlchemicalModel::symmetric(), &AwhParams::default(), 1).unwrap();
    assert!((0.3..=0.5).contains(&r.x_acceptance), "{}", r.x_acceptance);
}

#[test]
fn sem_controller_on_noisy_estimator() {
    let mut stops = Vec::new();
    for run in 0..100 {
        let r = run_until_sem(
            |s| {
                let mut rng = seed::rng(s);
                Ok(Normal::new(0.0, 0.5).unwrap().sample(&mut rng))
            },
            0.1,
            200,
            seed::split(31337, run),
        )
        .unwrap();
        assert!(r.target_met && r.sem <= 0.1 || !r.target_met);
        assert!(r.replicas >= 2);
        stops.push(r.replicas);
    }
    stops.sort_unstable();
    let median = stops[50];
    let in_band = stops.iter().filter(|&&n| (15..=60).contains(&n)).count();
    let at_two = stops.iter().filter(|&&n| n == 2).count();
    eprintln!("median {median}, in [15,60]: {in_band}, stopped at 2: {at_two}");
    assert!((15..=30).contains(&median), "median {median}");
    assert!((46..=76).contains(&in_band), "{in_band} of 100 in [15,60]");
}

#[test]
fn sem_controller_respects_cap() {
    for run in 0..100 {
        let r = run_until_sem(|s| Ok((s % 97) as f64), 0.01, 10, run).unwrap();
        assert!(r.sem <= 0.01 || !r.target_met);
        assert!(r.replicas <= 10);
    }
}

#[test]
fn abfe_is_linear_in_complex_energy() {
    let s = EnergySamples { complex: vec![-10.0, -12.0], receptor: vec![-4.0], ligand: vec![-1.0, -1.5] };
    let solv = SolvationTerms { complex: -2.0, receptor: -1.0, ligand: -0.5 };
    let base = abfe_estimate(&s, &solv).unwrap();
    let shifted = EnergySamples { complex: s.complex.iter().map(|e| e + 3.25).collect(), ..s.clone() };
    assert!((abfe_estimate(&shifted, &solv).unwrap() - base - 3.25).abs() < 1e-12);
}
