use std::path::PathBuf;

use rayon::prelude::*;
use vscreen_core::chem::{parse_library, Ligand};
use vscreen_core::dock::{dock, filter_poses, ligand_score, rescore, DockParams, Pocket, Pose};
use vscreen_core::seed;

use super::{read_json, read_text, write, Classify, Outcome};
use crate::Globals;

#[derive(clap::Args, Debug)]
pub struct Args {
    /// Library text, `SMILES<TAB>ID` per line.
    #[arg(long, short)]
    input: PathBuf,
    /// Pocket JSON; the demo pocket when omitted.
    #[arg(long)]
    pocket: Option<PathBuf>,
    /// Docking parameters as JSON; missing fields take defaults.
    #[arg(long)]
    params: Option<PathBuf>,
    /// Poses kept per ligand.
    #[arg(long, default_value_t = 3)]
    keep: usize,
    /// Write kept poses as JSONL.
    #[arg(long, short)]
    output: Option<PathBuf>,
}

pub fn main(a: Args, g: &Globals) -> Outcome {
    let pocket = match &a.pocket {
        Some(p) => Pocket::from_json(&read_text(p)?).config()?,
        None => Pocket::demo(),
    };
    let params: DockParams = a.params.as_deref().map(read_json).transpose()?.unwrap_or_default();
    let records = parse_library(&read_text(&a.input)?).config()?;
    let mut ligands = Vec::new();
    for r in &records {
        match Ligand::from_smiles(r.id.clone(), r.smiles.clone()) {
            Ok(l) => ligands.push(l),
            Err(e) => eprintln!("skipping {} (line {}): {e}", r.id, r.line),
        }
    }
    let base = seed::derive(g.seed(), "dock");
    let results: Vec<(String, Vec<Pose>)> = ligands
        .par_iter()
        .map(|l| -> anyhow::Result<(String, Vec<Pose>)> {
            let conf = l.embed(seed::derive(seed::derive(g.seed(), "embed"), &l.id))?;
            let mut poses = dock(&conf, &pocket, &params, seed::derive(base, &l.id))?;
            for p in &mut poses {
                p.rescore = Some(rescore(&conf, p, &pocket)?);
            }
            Ok((l.id.clone(), filter_poses(&poses, a.keep, f64::NEG_INFINITY)))
        })
        .collect::<anyhow::Result<_>>()
        .stage()?;
    println!("id\tscore\tposes");
    let mut jsonl = String::new();
    for (id, poses) in &results {
        let score = ligand_score(poses).map_or_else(|| "nan".to_string(), |s| format!("{s:.6}"));
        println!("{id}\t{score}\t{}", poses.len());
        for p in poses {
            jsonl.push_str(&serde_json::to_string(p).expect("poses serialize"));
            jsonl.push('\n');
        }
    }
    if let Some(o) = &a.output {
        write(o, jsonl)?;
    }
    Ok(())
}
