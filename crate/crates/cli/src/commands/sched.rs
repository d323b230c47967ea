use std::path::PathBuf;

use vscreen_core::sched::{run_simulation, AllocPolicy, Task, Worker};

use super::{read_json, write, Classify, Outcome};
use crate::Globals;

#[derive(clap::Args, Debug)]
pub struct Args {
    /// JSON array of tasks.
    #[arg(long)]
    tasks: PathBuf,
    /// JSON array of workers.
    #[arg(long)]
    workers: PathBuf,
    /// Optional auto-allocation policy.
    #[arg(long)]
    policy: Option<PathBuf>,
}

pub fn main(a: Args, g: &Globals) -> Outcome {
    let tasks: Vec<Task> = read_json(&a.tasks)?;
    let workers: Vec<Worker> = read_json(&a.workers)?;
    let policy: Option<AllocPolicy> = a.policy.as_deref().map(read_json).transpose()?;
    let trace = run_simulation(tasks, &workers, policy.as_ref(), g.seed()).stage()?;
    if let Some(p) = &g.trace {
        write(p, trace.to_jsonl())?;
    }
    let summary = serde_json::json!({
        "makespan": trace.makespan,
        "utilization": trace.utilization,
        "events": trace.events.len(),
        "allocations": trace.allocations.len(),
    });
    println!("{}", serde_json::to_string_pretty(&summary).expect("summary serializes"));
    Ok(())
}
