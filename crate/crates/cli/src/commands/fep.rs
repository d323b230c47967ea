use std::collections::BTreeMap;
use std::path::PathBuf;

use anyhow::anyhow;
use vscreen_core::chem::{parse_library, Ligand};
use vscreen_core::fep::{
    awh_estimate, format_results, pair_compounds, run_until_sem, AlchemicalModel, AwhParams, ResultRow,
};
use vscreen_core::pipeline::{relative_model, toy_binding_free_energy};
use vscreen_core::seed;

use super::{read_text, write, Classify, Outcome};
use crate::Globals;

#[derive(clap::Args, Debug)]
pub struct Args {
    /// Ligands to pair, `SMILES<TAB>ID` per line.
    #[arg(long, short, required_unless_present = "check")]
    ligands: Option<PathBuf>,
    /// Docking scores, `id<TAB>score` per line (output of `vscreen dock`).
    #[arg(long)]
    scores: Option<PathBuf>,
    /// Run one analytic model instead: symmetric, offset or harmonic.
    #[arg(long, conflicts_with = "ligands")]
    check: Option<String>,
    #[arg(long, default_value_t = 0.1)]
    target_sem: f64,
    #[arg(long, default_value_t = 16)]
    max_replicas: usize,
    /// Production steps per replica.
    #[arg(long, default_value_t = 20_000)]
    steps: usize,
    /// Results TSV; stdout when omitted.
    #[arg(long, short)]
    output: Option<PathBuf>,
}

fn scores(path: &Option<PathBuf>) -> Result<BTreeMap<String, f64>, super::Failure> {
    let mut out = BTreeMap::new();
    if let Some(p) = path {
        for line in read_text(p)?.lines() {
            let mut f = line.split('\t');
            if let (Some(id), Some(s)) = (f.next(), f.next()) {
                if let Ok(v) = s.trim().parse::<f64>() {
                    out.insert(id.to_string(), v);
                }
            }
        }
    }
    Ok(out)
}

pub fn main(a: Args, g: &Globals) -> Outcome {
    let params = AwhParams::with_steps(a.steps);
    let mut rows = Vec::new();
    if let Some(kind) = &a.check {
        let model = match kind.as_str() {
            "symmetric" => AlchemicalModel::symmetric(),
            "offset" => AlchemicalModel::offset_wells(2.0),
            "harmonic" => AlchemicalModel::harmonic(1.0, 2.0),
            other => return Err(anyhow!("unknown check model {other:?}")).config(),
        };
        let r = run_until_sem(|s| awh_estimate(&model, &params, s), a.target_sem, a.max_replicas, g.seed()).stage()?;
        eprintln!("exact {:.6} kT", model.exact_delta_f());
        rows.push(ResultRow {
            pair_id: kind.clone(),
            ligand_a: "state0".into(),
            ligand_b: "stateL".into(),
            ddg: r.estimate,
            sem: r.sem,
            replicas: r.replicas,
            target_met: r.target_met,
        });
    } else {
        let path = a.ligands.as_ref().expect("clap enforces ligands or check");
        let records = parse_library(&read_text(path)?).config()?;
        let ligands: Vec<Ligand> = records
            .iter()
            .map(|r| Ligand::from_smiles(r.id.clone(), r.smiles.clone()))
            .collect::<Result<_, _>>()
            .config()?;
        let scores = scores(&a.scores)?;
        let dg: BTreeMap<&str, f64> = ligands
            .iter()
            .map(|l| (l.id.as_str(), toy_binding_free_energy(scores.get(&l.id).copied().unwrap_or(0.0), l)))
            .collect();
        let pairs = pair_compounds(&ligands).config()?;
        for (k, p) in pairs.iter().enumerate() {
            let model = relative_model(dg[p.a.as_str()], dg[p.b.as_str()], p.perturbation);
            let s = seed::derive(g.seed(), &format!("rbfe:{}:{}", p.a, p.b));
            let r = run_until_sem(|r| awh_estimate(&model, &params, r), a.target_sem, a.max_replicas, s).stage()?;
            rows.push(ResultRow {
                pair_id: format!("P{:03}", k + 1),
                ligand_a: p.a.clone(),
                ligand_b: p.b.clone(),
                ddg: r.estimate,
                sem: r.sem,
                replicas: r.replicas,
                target_met: r.target_met,
            });
        }
    }
    let tsv = format_results(&rows);
    match &a.output {
        Some(o) => write(o, tsv),
        None => {
            print!("{tsv}");
            Ok(())
        }
    }
}
