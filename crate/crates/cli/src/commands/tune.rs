use std::path::PathBuf;

use anyhow::anyhow;
use clap::ValueEnum;
use vscreen_core::dock::Pocket;
use vscreen_core::pipeline::PipelineObjective;
use vscreen_core::tune::{front_csv, pareto_front, run_tuning, Objective, SyntheticSurface};
use vscreen_core::KnobSpace;

use super::{read_json, read_text, write, Classify, Outcome};
use crate::Globals;

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ObjectiveKind {
    Synthetic,
    Pipeline,
}

#[derive(clap::Args, Debug)]
pub struct Args {
    /// Knob space JSON; the default eleven-knob space when omitted.
    #[arg(long)]
    space: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "synthetic")]
    objective: ObjectiveKind,
    /// Cost ceiling for suggested configurations.
    #[arg(long)]
    budget_cost: Option<f64>,
    #[arg(long, default_value_t = 50)]
    evals: usize,
    /// Noise level of the synthetic surface.
    #[arg(long, default_value_t = 0.02)]
    noise: f64,
    /// Mini-corpus size for the pipeline objective.
    #[arg(long, default_value_t = 6)]
    corpus: usize,
    #[arg(long)]
    pocket: Option<PathBuf>,
    /// History as JSONL, one observation per line.
    #[arg(long, short)]
    out: PathBuf,
    /// Also write `cost,quality,dominated` CSV here.
    #[arg(long)]
    csv: Option<PathBuf>,
}

pub fn main(a: Args, g: &Globals) -> Outcome {
    let space = match &a.space {
        Some(p) => read_json::<KnobSpace>(p)?,
        None => KnobSpace::default_space(),
    };
    space.validate().config()?;
    if a.evals == 0 {
        return Err(anyhow!("--evals must be positive")).config();
    }
    let objective: Box<dyn Objective> = match a.objective {
        ObjectiveKind::Synthetic => Box::new(SyntheticSurface::new(&space, g.seed(), a.noise)),
        ObjectiveKind::Pipeline => {
            let pocket = match &a.pocket {
                Some(p) => Pocket::from_json(&read_text(p)?).config()?,
                None => Pocket::demo(),
            };
            Box::new(PipelineObjective::synthetic(pocket, a.corpus, g.seed()).stage()?)
        }
    };
    let history = run_tuning(&space, objective.as_ref(), a.evals, a.budget_cost, g.seed()).stage()?;
    let mut jsonl = String::new();
    for o in &history {
        jsonl.push_str(&serde_json::to_string(o).expect("observations serialize"));
        jsonl.push('\n');
    }
    write(&a.out, jsonl)?;
    if let Some(c) = &a.csv {
        write(c, front_csv(&history))?;
    }
    let front = pareto_front(&history);
    println!("evaluations {}, pareto front {}", history.len(), front.len());
    for o in &front {
        println!("cost {:.6} quality {:.6} config {:?}", o.cost, o.quality, o.config);
    }
    Ok(())
}
