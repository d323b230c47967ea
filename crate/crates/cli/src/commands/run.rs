use std::path::PathBuf;

use anyhow::anyhow;
use vscreen_core::pipeline::{run_campaign, CampaignError, CampaignReport};
use vscreen_core::CampaignConfig;

use super::{write, Classify, Failure, Outcome, STAGE_FAILURE};
use crate::Globals;

#[derive(clap::Args, Debug)]
pub struct Args {
    /// Campaign config (JSON).
    config: PathBuf,
    /// Directory for report.json, ranking.tsv, fep.tsv and the trace.
    #[arg(long, short, default_value = "campaign_out")]
    out: PathBuf,
}

fn summary(r: &CampaignReport) {
    for s in &r.stages {
        println!("{:<8} {:>6} -> {:<6} tasks {:<5} {:.3} s", s.stage, s.input, s.output, s.tasks, s.seconds);
    }
    if r.completed {
        println!("makespan {:.3} s, cpu utilization {:.3}", r.makespan, r.cpu_utilization);
        for l in r.top.iter().take(5) {
            let dg = l.dg.map_or_else(|| "-".to_string(), |d| format!("{d:.3}"));
            println!("#{:<3} {:<12} score {:.4} dG {}", l.rank, l.id, l.score, dg);
        }
    }
}

pub fn main(a: Args, g: &Globals) -> Outcome {
    let mut cfg = CampaignConfig::load(&a.config).config()?;
    if let Some(seed) = g.seed_override {
        cfg.seed = seed;
    }
    std::fs::create_dir_all(&a.out).map_err(|e| anyhow!("{}: {e}", a.out.display())).config()?;
    let trace_path = g.trace.clone().unwrap_or_else(|| a.out.join("trace.jsonl"));
    match run_campaign(&cfg) {
        Ok(mut out) => {
            out.report.trace_path = Some(trace_path.display().to_string());
            write(&trace_path, out.trace.to_jsonl())?;
            write(&a.out.join("report.json"), out.report.to_json())?;
            write(&a.out.join("ranking.tsv"), &out.ranking_tsv)?;
            write(&a.out.join("fep.tsv"), &out.fep_tsv)?;
            summary(&out.report);
            Ok(())
        }
        Err(CampaignError::Config(m)) => Err(anyhow!(m)).config(),
        Err(CampaignError::Stage { stage, message, partial }) => {
            write(&a.out.join("report.json"), partial.to_json())?;
            summary(&partial);
            Err(Failure { code: STAGE_FAILURE, inner: anyhow!("stage {stage} failed: {message}") })
        }
    }
}
