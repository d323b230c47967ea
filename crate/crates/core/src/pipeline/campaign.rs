use std::collections::{BTreeMap, BTreeSet};

use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{kept, rank_ligands, CampaignConfig};
use crate::batcher::{batch_stream, size_class, Batch, BatchQueue};
use crate::chem::{parse_library, Conformer, Ligand};
use crate::codec::{self, Dictionary};
use crate::dock::{dock_with_stats, filter_poses, ligand_score, rescore, Pocket, Pose};
use crate::fep::{
    abfe_estimate, awh_estimate, format_results, pair_compounds, run_until_sem, AlchemicalModel, AwhParams,
    EnergySamples, FepError, FreeEnergyResult, LambdaState, ResultRow, SolvationTerms,
};
use crate::sched::{run_simulation, EventKind, Resources, Task, Trace};
use crate::seed;

#[derive(Debug, Error)]
pub enum CampaignError {
    #[error("config error: {0}")]
    Config(String),
    #[error("stage {stage} failed: {message}")]
    Stage { stage: String, message: String, partial: Box<CampaignReport> },
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct StageReport {
    pub stage: String,
    pub input: usize,
    pub output: usize,
    /// Scheduler tasks submitted for the stage.
    pub tasks: usize,
    /// Simulated seconds from the first start to the last finish.
    pub seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankedLigand {
    pub rank: usize,
    pub id: String,
    pub smiles: String,
    /// Best pose score.
    pub score: f64,
    /// Absolute binding free energy estimate, kT.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub dg: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub dg_sem: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct CampaignReport {
    pub seed: u64,
    pub stages: Vec<StageReport>,
    pub top: Vec<RankedLigand>,
    pub pairs: Vec<ResultRow>,
    /// Simulated seconds.
    pub makespan: f64,
    pub cpu_utilization: f64,
    pub accel_utilization: f64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub trace_path: Option<String>,
    pub completed: bool,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub failed_stage: Option<String>,
}

impl CampaignReport {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn stage(&self, name: &str) -> Option<&StageReport> {
        self.stages.iter().find(|s| s.stage == name)
    }

    /// Output counts along the funnel, in stage order.
    pub fn funnel(&self) -> Vec<usize> {
        self.stages.iter().map(|s| s.output).collect()
    }
}

#[derive(Debug, Clone)]
pub struct CampaignOutput {
    pub report: CampaignReport,
    pub trace: Trace,
    /// Full ranking: `rank, id, smiles, score, dg_kT, dg_sem_kT`.
    pub ranking_tsv: String,
    /// Relative free energies of the fep pairs.
    pub fep_tsv: String,
}

struct Docked {
    ligand: usize,
    poses: Vec<Pose>,
    score: f64,
}

struct Run<'c> {
    cfg: &'c CampaignConfig,
    report: CampaignReport,
}

impl Run<'_> {
    fn fail(&self, stage: &str, message: impl ToString) -> CampaignError {
        let mut partial = self.report.clone();
        partial.failed_stage = Some(stage.to_string());
        CampaignError::Stage { stage: stage.to_string(), message: message.to_string(), partial: Box::new(partial) }
    }

    fn record(&mut self, stage: &str, input: usize, output: usize) {
        self.report.stages.push(StageReport { stage: stage.to_string(), input, output, ..Default::default() });
    }

    fn seed(&self, stage: &str) -> u64 {
        seed::derive(self.cfg.seed, stage)
    }
}

/// Run a campaign end to end. Identical configs give identical outputs,
/// independent of thread count.
pub fn run_campaign(cfg: &CampaignConfig) -> Result<CampaignOutput, CampaignError> {
    cfg.validate()?;
    if cfg.threads > 0 {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(cfg.threads)
            .build()
            .map_err(|e| CampaignError::Config(e.to_string()))?;
        pool.install(|| execute(cfg))
    } else {
        execute(cfg)
    }
}

fn load_library(cfg: &CampaignConfig) -> Result<String, String> {
    let data = std::fs::read(&cfg.library).map_err(|e| format!("{}: {e}", cfg.library.display()))?;
    if !data.starts_with(codec::MAGIC) {
        return String::from_utf8(data).map_err(|e| e.to_string());
    }
    let dict = match &cfg.dictionary {
        Some(p) => {
            let bytes = std::fs::read(p).map_err(|e| format!("{}: {e}", p.display()))?;
            Dictionary::from_bytes(&bytes).map_err(|e| e.to_string())?
        }
        None => codec::default_dictionary(),
    };
    let lines = codec::read_compressed_library(&data, &dict).map_err(|e| e.to_string())?;
    let mut text = String::new();
    for l in lines {
        text.push_str(&String::from_utf8_lossy(&l));
        text.push('\n');
    }
    Ok(text)
}

fn execute(cfg: &CampaignConfig) -> Result<CampaignOutput, CampaignError> {
    let mut run = Run { cfg, report: CampaignReport { seed: cfg.seed, ..Default::default() } };
    let knobs = &cfg.knobs;

    let pocket = match &cfg.pocket {
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|e| run.fail("library", format!("{}: {e}", p.display())))?;
            Pocket::from_json(&text).map_err(|e| run.fail("library", e))?
        }
        None => Pocket::demo(),
    };

    // library: decompress and parse
    let text = load_library(cfg).map_err(|e| run.fail("library", e))?;
    let records = parse_library(&text).map_err(|e| run.fail("library", e))?;
    let ligands: Vec<Ligand> =
        records.iter().filter_map(|r| Ligand::from_smiles(r.id.clone(), r.smiles.clone()).ok()).collect();
    run.record("library", records.len(), ligands.len());

    // embed
    let embed_seed = run.seed("embed");
    let conformers: Vec<Option<Conformer>> =
        ligands.par_iter().map(|l| l.embed(seed::derive(embed_seed, &l.id)).ok()).collect();
    let embedded: Vec<usize> = (0..ligands.len()).filter(|&i| conformers[i].is_some()).collect();
    run.record("embed", ligands.len(), embedded.len());

    // dock through the batcher
    let mut queue = BatchQueue::new(knobs.classes.clone(), &knobs.device).map_err(|e| run.fail("dock", e))?;
    let batchable: Vec<usize> =
        embedded.iter().copied().filter(|&i| size_class(&ligands[i], &knobs.classes).is_ok()).collect();
    let items =
        batchable.iter().map(|&i| (ligands[i].id.clone(), size_class(&ligands[i], &knobs.classes).expect("filtered")));
    let batches = batch_stream(&mut queue, items, knobs.interarrival);
    let dock_seed = run.seed("dock");
    let docked: Vec<(usize, Vec<Pose>, usize)> = batchable
        .par_iter()
        .map(|&i| {
            let conf = conformers[i].as_ref().expect("embedded");
            dock_with_stats(conf, &pocket, &knobs.dock, seed::derive(dock_seed, &ligands[i].id))
                .map(|r| (i, r.poses, r.evaluations))
        })
        .collect::<Result<_, _>>()
        .map_err(|e| run.fail("dock", e))?;
    let docked: Vec<(usize, Vec<Pose>, usize)> = docked.into_iter().filter(|d| !d.1.is_empty()).collect();
    run.record("dock", embedded.len(), docked.len());

    // rescore every pose
    let rescored: Vec<(usize, Vec<Pose>)> = docked
        .par_iter()
        .map(|(i, poses, _)| {
            let conf = conformers[*i].as_ref().expect("embedded");
            let mut out = poses.clone();
            for p in &mut out {
                p.rescore = Some(rescore(conf, p, &pocket)?);
            }
            Ok((*i, out))
        })
        .collect::<Result<_, crate::dock::DockError>>()
        .map_err(|e| run.fail("rescore", e))?;
    run.record("rescore", docked.len(), rescored.len());

    // filter poses
    let threshold = knobs.filter_threshold.unwrap_or(f64::NEG_INFINITY);
    let filtered: Vec<Docked> = rescored
        .into_iter()
        .filter_map(|(ligand, poses)| {
            let poses = filter_poses(&poses, knobs.filter_top_k, threshold);
            ligand_score(&poses).map(|score| Docked { ligand, poses, score })
        })
        .collect();
    let pose_count: usize = filtered.iter().map(|d| d.poses.len()).sum();
    run.record("filter", docked.len(), filtered.len());

    // rank and shortlist
    let score_of: BTreeMap<&str, (usize, f64)> =
        filtered.iter().map(|d| (ligands[d.ligand].id.as_str(), (d.ligand, d.score))).collect();
    let ranking = rank_ligands(score_of.iter().map(|(id, (_, s))| (*id, *s)));
    let shortlist = kept(ranking.len(), cfg.funnel.shortlist);
    run.record("rank", filtered.len(), shortlist);

    // pair the top fraction by maximum common substructure
    let selected = kept(shortlist, cfg.funnel.fep);
    let chosen: Vec<&Ligand> = ranking[..selected].iter().map(|(id, _)| &ligands[score_of[id.as_str()].0]).collect();
    let pairs = if chosen.len() >= 2 {
        let owned: Vec<Ligand> = chosen.iter().map(|l| (*l).clone()).collect();
        pair_compounds(&owned).map_err(|e| run.fail("pair", e))?
    } else {
        Vec::new()
    };
    run.record("pair", shortlist, selected);

    // free energies: absolute per ligand, relative per pair
    let truth: BTreeMap<&str, f64> =
        chosen.iter().map(|l| (l.id.as_str(), toy_binding_free_energy(score_of[l.id.as_str()].1, l))).collect();
    let fep_seed = run.seed("fep");
    let abfe: Vec<FreeEnergyResult> = chosen
        .iter()
        .map(|l| {
            let s = seed::derive(fep_seed, &format!("abfe:{}", l.id));
            run_until_sem(
                |r| abfe_replica(l, score_of[l.id.as_str()].1, cfg.fep.abfe_samples, r),
                cfg.fep.target_sem,
                cfg.fep.max_replicas,
                s,
            )
        })
        .collect::<Result<_, FepError>>()
        .map_err(|e| run.fail("fep", e))?;
    let mut rows = Vec::new();
    for (k, p) in pairs.iter().enumerate() {
        let model = relative_model(truth[p.a.as_str()], truth[p.b.as_str()], p.perturbation);
        let params = AwhParams::with_steps(cfg.fep.awh_steps);
        let s = seed::derive(fep_seed, &format!("rbfe:{}:{}", p.a, p.b));
        let res = run_until_sem(|r| awh_estimate(&model, &params, r), cfg.fep.target_sem, cfg.fep.max_replicas, s)
            .map_err(|e| run.fail("fep", e))?;
        rows.push(ResultRow {
            pair_id: format!("P{:03}", k + 1),
            ligand_a: p.a.clone(),
            ligand_b: p.b.clone(),
            ddg: res.estimate,
            sem: res.sem,
            replicas: res.replicas,
            target_met: res.target_met,
        });
    }
    run.record("fep", selected, abfe.len());

    // final ranking: refined ligands by free energy, then the rest by score
    let mut refined: Vec<(usize, &FreeEnergyResult)> = (0..chosen.len()).map(|i| (i, &abfe[i])).collect();
    refined.sort_by(|a, b| a.1.estimate.total_cmp(&b.1.estimate).then_with(|| chosen[a.0].id.cmp(&chosen[b.0].id)));
    let mut final_rank: Vec<RankedLigand> = refined
        .iter()
        .map(|&(i, r)| {
            let l = chosen[i];
            (l, score_of[l.id.as_str()].1, Some((r.estimate, r.sem)))
        })
        .chain(ranking[selected..].iter().map(|(id, s)| (&ligands[score_of[id.as_str()].0], *s, None)))
        .enumerate()
        .map(|(k, (l, score, dg))| RankedLigand {
            rank: k + 1,
            id: l.id.clone(),
            smiles: l.smiles.clone(),
            score,
            dg: dg.map(|d| d.0),
            dg_sem: dg.map(|d| d.1),
        })
        .collect();
    run.record("final", abfe.len(), abfe.len());

    // schedule every stage on the simulated cluster
    let tasks = stage_tasks(cfg, &ligands, &batches, &docked, pose_count, &abfe, &rows, &chosen);
    let mut per_stage: BTreeMap<String, usize> = BTreeMap::new();
    for t in &tasks {
        *per_stage.entry(t.stage.clone()).or_default() += 1;
    }
    for s in &mut run.report.stages {
        s.tasks = per_stage.get(&s.stage).copied().unwrap_or(0);
    }
    let stage_of: BTreeMap<String, String> = tasks.iter().map(|t| (t.id.clone(), t.stage.clone())).collect();
    let trace = run_simulation(tasks, &cfg.cluster.workers, cfg.cluster.policy.as_ref(), run.seed("sched"))
        .map_err(|e| run.fail("sched", e))?;
    let mut span: BTreeMap<&str, (u64, u64)> = BTreeMap::new();
    for e in &trace.events {
        let Some(t) = &e.task else { continue };
        let stage = stage_of[t].as_str();
        let entry = span.entry(stage).or_insert((u64::MAX, 0));
        match e.kind {
            EventKind::Start => entry.0 = entry.0.min(e.time),
            EventKind::Finish => entry.1 = entry.1.max(e.time),
            _ => {}
        }
    }
    for s in &mut run.report.stages {
        if let Some(&(a, b)) = span.get(s.stage.as_str()) {
            s.seconds = crate::sched::to_seconds(b.saturating_sub(a));
        }
    }

    run.report.makespan = trace.makespan;
    run.report.cpu_utilization = trace.utilization.cpu;
    run.report.accel_utilization = trace.utilization.accel;
    run.report.pairs = rows.clone();
    run.report.completed = true;
    let ranking_tsv = ranking_tsv(&final_rank);
    final_rank.truncate(cfg.top_n);
    run.report.top = final_rank;
    Ok(CampaignOutput { report: run.report, trace, ranking_tsv, fep_tsv: format_results(&rows) })
}

/// Toy binding free energy, kT: docking score drives the gas-phase term,
/// size a small solvation penalty.
pub fn toy_binding_free_energy(score: f64, l: &Ligand) -> f64 {
    -AFFINITY_SCALE * score + SOLV_PENALTY * l.heavy_atoms as f64
}

const AFFINITY_SCALE: f64 = 0.4;
const SOLV_PENALTY: f64 = 0.03;
const RECEPTOR_ENERGY: f64 = -50.0;

fn solvation(l: &Ligand) -> SolvationTerms {
    let n = l.heavy_atoms as f64;
    SolvationTerms { complex: -0.05 * n, receptor: 0.0, ligand: -(0.05 + SOLV_PENALTY) * n }
}

/// One absolute replica: noisy phase energies whose means reproduce
/// [`toy_binding_free_energy`].
fn abfe_replica(l: &Ligand, score: f64, n: usize, seed: u64) -> Result<f64, FepError> {
    let mut rng = seed::rng(seed);
    let lig_mean = -0.5 * l.heavy_atoms as f64;
    let gas = -AFFINITY_SCALE * score;
    let draw = |mean: f64, sd: f64, rng: &mut rand_chacha::ChaCha8Rng| {
        let d = Normal::new(mean, sd).expect("positive sd");
        (0..n).map(|_| d.sample(rng)).collect::<Vec<f64>>()
    };
    let complex = draw(gas + RECEPTOR_ENERGY + lig_mean, 1.5, &mut rng);
    let receptor = draw(RECEPTOR_ENERGY, 1.5, &mut rng);
    let ligand = draw(lig_mean, 1.0, &mut rng);
    abfe_estimate(&EnergySamples { complex, receptor, ligand }, &solvation(l))
}

/// Lambda ladder whose exact free-energy difference is `dg_b - dg_a`; larger
/// perturbations get stiffer end states and more intermediate states.
pub fn relative_model(dg_a: f64, dg_b: f64, perturbation: usize) -> AlchemicalModel {
    let k1 = 1.0 + 0.1 * perturbation.min(20) as f64;
    let from = LambdaState { center: 0.0, stiffness: 1.0, offset: 0.0 };
    let to = LambdaState { center: 0.0, stiffness: k1, offset: dg_b - dg_a - 0.5 * k1.ln() };
    AlchemicalModel::interpolated(from, to, 1 + perturbation.min(20) / 4)
}

#[allow(clippy::too_many_arguments)]
fn stage_tasks(
    cfg: &CampaignConfig,
    ligands: &[Ligand],
    batches: &[Batch],
    docked: &[(usize, Vec<Pose>, usize)],
    poses: usize,
    abfe: &[FreeEnergyResult],
    rows: &[ResultRow],
    chosen: &[&Ligand],
) -> Vec<Task> {
    let knobs = &cfg.knobs;
    let cpu = Resources::cpus(1);
    let mut tasks = vec![Task::new("library", cpu, 1e-3 + 2e-5 * ligands.len() as f64).with_stage("library")];

    let mut embed_of: BTreeMap<&str, String> = BTreeMap::new();
    let mut embed_ids = Vec::new();
    for (k, chunk) in ligands.chunks(knobs.embed_chunk).enumerate() {
        let id = format!("embed/{k:04}");
        let atoms: usize = chunk.iter().map(|l| l.heavy_atoms).sum();
        for l in chunk {
            embed_of.insert(l.id.as_str(), id.clone());
        }
        tasks.push(Task::new(id.clone(), cpu, 1e-3 + 1e-4 * atoms as f64).with_deps(["library"]).with_stage("embed"));
        embed_ids.push(id);
    }

    let evals: BTreeMap<&str, usize> = docked.iter().map(|(i, _, e)| (ligands[*i].id.as_str(), *e)).collect();
    let scale = knobs.dock.restarts as f64;
    let mut rescore_ids = Vec::new();
    for (k, b) in batches.iter().enumerate() {
        let class = &knobs.classes[b.class];
        let id = format!("dock/c{}/{k:04}", b.class);
        let deps: BTreeSet<&String> = b.items.iter().map(|i| &embed_of[i.as_str()]).collect();
        let work: usize = b.items.iter().filter_map(|i| evals.get(i.as_str())).sum();
        let duration = knobs.device.batch_time(b.items.len(), class) * scale + 1e-7 * work as f64;
        tasks.push(
            Task::new(id.clone(), Resources::new(1, 1, 0), duration)
                .with_deps(deps.into_iter().cloned())
                .with_stage("dock"),
        );
        let rid = format!("rescore/{k:04}");
        tasks.push(
            Task::new(rid.clone(), cpu, 1e-4 * (b.items.len() * knobs.dock.restarts) as f64)
                .with_deps([id])
                .with_stage("rescore"),
        );
        rescore_ids.push(rid);
    }
    let filter_deps = if rescore_ids.is_empty() { embed_ids } else { rescore_ids };
    tasks.push(Task::new("filter", cpu, 1e-3 + 1e-5 * poses as f64).with_deps(filter_deps).with_stage("filter"));
    tasks.push(Task::new("rank", cpu, 1e-3 + 1e-5 * docked.len() as f64).with_deps(["filter"]).with_stage("rank"));
    let n = chosen.len();
    tasks.push(
        Task::new("pair", cpu, 1e-3 + 1e-3 * (n * n.saturating_sub(1) / 2) as f64)
            .with_deps(["rank"])
            .with_stage("pair"),
    );

    let mut fep_ids = Vec::new();
    for (l, r) in chosen.iter().zip(abfe) {
        for k in 0..r.replicas {
            let id = format!("fep/abfe/{}/r{k:02}", l.id);
            tasks.push(
                Task::new(id.clone(), cpu, 1e-4 * cfg.fep.abfe_samples as f64).with_deps(["rank"]).with_stage("fep"),
            );
            fep_ids.push(id);
        }
    }
    for row in rows {
        for k in 0..row.replicas {
            let id = format!("fep/rbfe/{}/r{k:02}", row.pair_id);
            tasks.push(
                Task::new(id.clone(), cpu, 5e-5 * cfg.fep.awh_steps as f64).with_deps(["pair"]).with_stage("fep"),
            );
            fep_ids.push(id);
        }
    }
    let final_deps = if fep_ids.is_empty() { vec!["pair".to_string()] } else { fep_ids };
    tasks.push(Task::new("final", cpu, 1e-3).with_deps(final_deps).with_stage("final"));
    tasks
}

fn ranking_tsv(rows: &[RankedLigand]) -> String {
    let mut s = String::from("rank\tid\tsmiles\tscore\tdg_kT\tdg_sem_kT\n");
    let opt = |v: Option<f64>| v.map_or_else(String::new, |x| format!("{x:.6}"));
    for r in rows {
        s.push_str(&format!("{}\t{}\t{}\t{:.6}\t{}\t{}\n", r.rank, r.id, r.smiles, r.score, opt(r.dg), opt(r.dg_sem)));
    }
    s
}
