//! Acceptance suite: one line per criterion, exit status 1 if any fails.
//!
//! Runs as a plain binary (`harness = false`) so criteria execute one at a
//! time and their wall-clock limits are measured without contention.

mod support;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::Rng;
use rand_distr::{Distribution, Normal};
use support::dock_oracle::{fd_gradient, flexible_conformers, grid_argmax, random_state, relative_error, single_well};
use support::mcs_oracle::{brute_force_mcs, random_graph};
use support::sched_oracle::{brute_force_makespan, check_trace, random_instance, single_core_workers};
use vscreen_core::chem::{parse_smiles, parse_smiles_bytes, synth, Ligand};
use vscreen_core::codec::{default_dictionary, read_compressed_library, write_compressed_library};
use vscreen_core::dock::{dock, pose_coordinates, rmsd, DockParams, DockingModel, Pocket};
use vscreen_core::fep::{awh_estimate, common_bond_count, mcs, run_until_sem, sem, AlchemicalModel, AwhParams};
use vscreen_core::pipeline::{run_campaign, Funnel};
use vscreen_core::sched::{run_simulation, AllocPolicy, Resources, Task, Worker};
use vscreen_core::tune::{best_quality, pareto_front, random_search, run_tuning, KnobSpace, SyntheticSurface};
use vscreen_core::{geom, seed, CampaignConfig};

type Check = Result<String, String>;

/// Name, wall-clock limit in seconds, body.
type Criterion = (&'static str, u64, fn() -> Check);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn codec_round_trip() -> Check {
    let corpus = synth::generate(10_000, 20_240);
    let mut rng = seed::rng(77);
    let fuzzed: Vec<Vec<u8>> = (0..10_000)
        .map(|_| {
            let n = rng.gen_range(0..120);
            (0..n).map(|_| rng.gen_range(0u8..0x80)).filter(|&b| b != b'\n' && b != b'\r').collect()
        })
        .collect();
    let dict = default_dictionary();

    let packed = write_compressed_library(&corpus, &dict).map_err(|e| e.to_string())?;
    let back = read_compressed_library(&packed, &dict).map_err(|e| e.to_string())?;
    ensure(back.len() == corpus.len(), || format!("{} lines back from {}", back.len(), corpus.len()))?;
    for (i, (a, b)) in corpus.iter().zip(&back).enumerate() {
        ensure(a.as_bytes() == b.as_slice(), || format!("corpus line {i} differs"))?;
    }
    let raw: usize = corpus.iter().map(|l| l.len() + 1).sum();
    let ratio = raw as f64 / packed.len() as f64;
    ensure(ratio >= 1.5, || format!("compression ratio {ratio:.3} < 1.5"))?;

    let fz = write_compressed_library(&fuzzed, &dict).map_err(|e| e.to_string())?;
    let fz_back = read_compressed_library(&fz, &dict).map_err(|e| e.to_string())?;
    ensure(fz_back == fuzzed, || "fuzzed lines do not round-trip".into())?;
    Ok(format!("20000/20000 lines identical, ratio {ratio:.3}"))
}

fn parser_robustness() -> Check {
    const ALPHABET: &[u8] = b"CNOSPFIBrcnospl()[]=#-+@/\\%0123456789.H*";
    let mut rng = seed::rng(4242);
    let hook = std::panic::take_hook();
    std::panic::set_hook(Box::new(|_| {}));
    let mut crashes = 0;
    let mut accepted = 0;
    for k in 0..100_000 {
        let n = rng.gen_range(0..64);
        let bytes: Vec<u8> = if k % 2 == 0 {
            (0..n).map(|_| rng.gen()).collect()
        } else {
            (0..n).map(|_| ALPHABET[rng.gen_range(0..ALPHABET.len())]).collect()
        };
        match catch_unwind(|| parse_smiles_bytes(&bytes).is_ok()) {
            Ok(true) => accepted += 1,
            Ok(false) => {}
            Err(_) => crashes += 1,
        }
    }
    std::panic::set_hook(hook);
    ensure(crashes == 0, || format!("{crashes} crashes in 100000 inputs"))?;

    let fixture = include_str!("fixtures/rdkit_counts.tsv");
    let mut checked = 0;
    for line in fixture.lines().skip(1) {
        let f: Vec<&str> = line.split('\t').collect();
        let g = parse_smiles(f[1]).map_err(|e| format!("{}: {e}", f[0]))?;
        let (atoms, bonds): (usize, usize) = (f[2].parse().unwrap(), f[3].parse().unwrap());
        ensure(g.atom_count() == atoms && g.bond_count() == bonds, || {
            format!("{}: {}/{} vs reference {atoms}/{bonds}", f[0], g.atom_count(), g.bond_count())
        })?;
        checked += 1;
    }
    ensure(checked == 1000, || format!("fixture has {checked} molecules"))?;
    Ok(format!("0 crashes in 100000 inputs ({accepted} parsed), {checked}/1000 counts match"))
}

fn docking_correctness() -> Check {
    let pocket = Pocket::demo();
    let confs = flexible_conformers(20, 5);
    let mut rng = seed::rng(17);
    let mut worst: f64 = 0.0;
    for k in 0..100 {
        let c = &confs[k % confs.len()];
        let model = DockingModel::new(c, &pocket).map_err(|e| e.to_string())?;
        let state = random_state(&mut rng, &pocket, model.torsion_count());
        let (_, g) = model.score_and_gradient(&state);
        worst = worst.max(relative_error(&g, &fd_gradient(&model, &state, 1e-5), 1e-6));
    }
    ensure(worst < 1e-4, || format!("gradient relative error {worst:e}"))?;

    let well = single_well();
    let oracle = grid_argmax(&well, well.bounds.min, well.bounds.max);
    let atom = Ligand::from_smiles("a", "C").unwrap().embed(0).unwrap();
    let mut far: f64 = 0.0;
    for s in 0..10 {
        let poses =
            dock(&atom, &well, &DockParams { restarts: 1, ..DockParams::default() }, s).map_err(|e| e.to_string())?;
        let xyz = pose_coordinates(&atom, &poses[0]).map_err(|e| e.to_string())?;
        far = far.max(geom::dist(xyz[0], oracle));
    }
    ensure(far < 1e-4, || format!("single-well distance to oracle {far:e}"))?;

    let delta = 1.5;
    let params = DockParams { restarts: 4, diversity_delta: delta, max_steps: 200, ..DockParams::default() };
    let mut min_sep = f64::INFINITY;
    for s in 0..100u64 {
        let c = &confs[s as usize % confs.len()];
        let poses = dock(c, &pocket, &params, seed::split(303, s)).map_err(|e| e.to_string())?;
        let xyz: Vec<_> = poses.iter().map(|p| pose_coordinates(c, p).unwrap()).collect();
        for i in 0..xyz.len() {
            for j in i + 1..xyz.len() {
                let d = rmsd(&xyz[i], &xyz[j]).map_err(|e| e.to_string())?;
                min_sep = min_sep.min(d);
                ensure(d >= delta, || format!("run {s}: poses {i},{j} at RMSD {d:.4} < {delta}"))?;
            }
        }
    }
    Ok(format!("worst gradient error {worst:.2e}, oracle distance {far:.2e}, min pose separation {min_sep:.3}"))
}

fn scheduler() -> Check {
    let policy = AllocPolicy {
        backlog_threshold: 10.0,
        shape: Resources::cpus(4),
        workers_per_allocation: 2,
        walltime: 5.0,
        max_queued: 2,
        grant_delay: 1.0,
        grant_jitter: 0.5,
    };
    for s in 0..1000u64 {
        let mut rng = seed::rng(seed::split(7, s));
        let (tasks, workers) = random_instance(&mut rng);
        let p = (s % 4 == 0).then_some(&policy);
        let trace = run_simulation(tasks.clone(), &workers, p, s).map_err(|e| format!("sim {s}: {e}"))?;
        check_trace(&tasks, &trace).map_err(|e| format!("sim {s}: {e}"))?;
    }

    let mut rng = seed::rng(11);
    let mut worst: f64 = 0.0;
    for k in 0..500 {
        let n = rng.gen_range(1..=8);
        let m = rng.gen_range(1..=3);
        let d: Vec<u64> = (0..n).map(|_| rng.gen_range(1..=9)).collect();
        let tasks: Vec<Task> =
            d.iter().enumerate().map(|(i, &x)| Task::new(format!("j{i}"), Resources::cpus(1), x as f64)).collect();
        let trace = run_simulation(tasks, &single_core_workers(m), None, k).map_err(|e| e.to_string())?;
        let ratio = trace.makespan / brute_force_makespan(&d, m) as f64;
        worst = worst.max(ratio);
        ensure(ratio <= 2.0, || format!("{d:?} on {m} workers: ratio {ratio}"))?;
    }

    let workers: Vec<Worker> = (0..10).map(|id| Worker { id, capacity: Resources::cpus(8) }).collect();
    let unit: Vec<Task> = (0..1000).map(|i| Task::new(format!("t{i:04}"), Resources::cpus(1), 1.0)).collect();
    let trace = run_simulation(unit.clone(), &workers, None, 3).map_err(|e| e.to_string())?;
    ensure(trace.makespan == 13.0, || format!("makespan {}", trace.makespan))?;
    ensure(trace.utilization.cpu >= 0.96, || format!("cpu utilization {}", trace.utilization.cpu))?;

    let mut rng = seed::rng(42);
    let (tasks, workers) = random_instance(&mut rng);
    let a = run_simulation(tasks.clone(), &workers, Some(&policy), 9).map_err(|e| e.to_string())?;
    let b = run_simulation(tasks, &workers, Some(&policy), 9).map_err(|e| e.to_string())?;
    ensure(a.to_jsonl() == b.to_jsonl(), || "traces differ under the same seed".into())?;
    Ok(format!(
        "1000 traces safe, worst ratio to optimum {worst:.3}, example makespan {} s at cpu {:.4}, traces identical",
        trace.makespan, trace.utilization.cpu
    ))
}

fn maximum_common_substructure() -> Check {
    let mut rng = seed::rng(2024);
    for k in 0..200 {
        let a = random_graph(&mut rng, 6);
        let b = random_graph(&mut rng, 6);
        let m = mcs(&a, &b).map_err(|e| e.to_string())?;
        let (score, pairs) = brute_force_mcs(&a, &b);
        ensure((m.bonds, m.atoms()) == score, || format!("pair {k}: {:?} vs {score:?}", (m.bonds, m.atoms())))?;
        ensure(m.pairs == pairs, || format!("pair {k}: mapping differs"))?;
        ensure(common_bond_count(&a, &b, &m.pairs) == m.bonds, || format!("pair {k}: bond count"))?;
        let r = mcs(&b, &a).map_err(|e| e.to_string())?;
        ensure((r.bonds, r.atoms()) == (m.bonds, m.atoms()), || format!("pair {k}: not symmetric"))?;
    }
    Ok("200/200 pairs exact and symmetric".into())
}

fn free_energy() -> Check {
    let mut lines = Vec::new();
    for (name, model, exact) in [
        ("symmetric", AlchemicalModel::symmetric(), 0.0),
        ("offset", AlchemicalModel::offset_wells(2.0), 2.0),
        ("harmonic", AlchemicalModel::harmonic(1.0, 2.0), 0.5 * std::f64::consts::LN_2),
    ] {
        ensure((model.exact_delta_f() - exact).abs() < 1e-12, || {
            format!("{name}: closed form {}", model.exact_delta_f())
        })?;
        let vals = (0..20u64)
            .map(|s| awh_estimate(&model, &AwhParams::default(), seed::split(99, s)).map(|r| r.delta_f))
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| e.to_string())?;
        let mean = vals.iter().sum::<f64>() / 20.0;
        let se = sem(&vals);
        ensure((mean - exact).abs() <= 3.0 * se, || format!("{name}: mean {mean:.4} vs {exact:.4}, se {se:.4}"))?;
        lines.push(format!("{name} {mean:.3}±{se:.3}"));
    }
    let mut met = 0;
    for run in 0..100 {
        let r = run_until_sem(
            |s| Ok(Normal::new(0.0, 0.5).unwrap().sample(&mut seed::rng(s))),
            0.1,
            200,
            seed::split(31337, run),
        )
        .map_err(|e| e.to_string())?;
        ensure(r.target_met && r.sem <= 0.1 || !r.target_met, || format!("run {run}: sem {} flagged met", r.sem))?;
        met += usize::from(r.target_met);
    }
    Ok(format!("{}, SEM controller 100/100 ({met} met target)", lines.join(", ")))
}

fn autotuner() -> Check {
    let space = KnobSpace::default_space();
    let mut wins = 0;
    for s in 0..20 {
        let surface = SyntheticSurface::new(&space, seed::split(1000, s), 0.02);
        let bo = best_quality(&run_tuning(&space, &surface, 100, None, s).map_err(|e| e.to_string())?).unwrap();
        let rs = best_quality(&random_search(&space, &surface, 100, s).map_err(|e| e.to_string())?).unwrap();
        wins += usize::from(bo < rs);
    }
    ensure(wins >= 15, || format!("{wins}/20 wins"))?;
    for s in 0..10 {
        let surface = SyntheticSurface::new(&space, s, 0.05);
        let hist = random_search(&space, &surface, 200, s).map_err(|e| e.to_string())?;
        let front = pareto_front(&hist);
        for o in &hist {
            let on_front = front.iter().any(|f| f.cost == o.cost && f.quality == o.quality);
            let dominated = hist
                .iter()
                .any(|p| p.quality <= o.quality && p.cost <= o.cost && (p.quality < o.quality || p.cost < o.cost));
            ensure(on_front != dominated, || format!("seed {s}: front membership wrong"))?;
        }
    }
    Ok(format!("{wins}/20 wins over random search, Pareto fronts non-dominated"))
}

fn end_to_end() -> Check {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let lib = dir.path().join("library.smi");
    std::fs::write(&lib, synth::library_text(100, 2024)).map_err(|e| e.to_string())?;
    let mut cfg = CampaignConfig::new(lib);
    cfg.funnel = Funnel { shortlist: 0.2, fep: 0.5 };
    cfg.seed = 42;
    let a = run_campaign(&cfg).map_err(|e| e.to_string())?;
    let b = run_campaign(&cfg).map_err(|e| e.to_string())?;
    let r = &a.report;
    ensure(r.completed, || "campaign incomplete".into())?;
    let funnel = r.funnel();
    ensure(funnel.windows(2).all(|w| w[1] <= w[0]), || format!("funnel not monotone: {funnel:?}"))?;
    ensure(!r.top.is_empty() && r.top.iter().enumerate().all(|(i, l)| l.rank == i + 1), || "ranking malformed".into())?;
    ensure(a.report.to_json() == b.report.to_json(), || "report differs between reruns".into())?;
    ensure(a.trace.to_jsonl() == b.trace.to_jsonl(), || "trace differs between reruns".into())?;
    ensure(a.ranking_tsv == b.ranking_tsv && a.fep_tsv == b.fep_tsv, || "TSV outputs differ".into())?;
    let counts: Vec<String> = funnel.iter().map(usize::to_string).collect();
    Ok(format!("funnel {}, top {} ranked, reruns byte-identical", counts.join(" > "), r.top.len()))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 8] = [
        ("codec round-trip", 5, codec_round_trip),
        ("parser robustness", 60, parser_robustness),
        ("docking correctness", 30, docking_correctness),
        ("scheduler", 60, scheduler),
        ("maximum common substructure", 60, maximum_common_substructure),
        ("free energy", 120, free_energy),
        ("autotuner", 60, autotuner),
        ("end-to-end campaign", 300, end_to_end),
    ];
    let mut failed = 0;
    for (i, (name, limit, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|e| {
            let msg = e.downcast_ref::<String>().cloned().or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()));
            Err(format!("panicked: {}", msg.unwrap_or_default()))
        });
        let took = start.elapsed();
        let outcome = match outcome {
            Ok(_) if took > Duration::from_secs(*limit) => Err(format!("took {took:.1?}, limit {limit} s")),
            o => o,
        };
        let (tag, detail) = match &outcome {
            Ok(d) => ("PASS", d),
            Err(d) => {
                failed += 1;
                ("FAIL", d)
            }
        };
        println!("[{tag}] {}. {name} ({took:.1?}): {detail}", i + 1);
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
