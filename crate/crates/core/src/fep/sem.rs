use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{AwhResult, FepError};
use crate::seed;

/// Sample standard deviation over `sqrt(n)`; infinite below two values.
pub fn sem(values: &[f64]) -> f64 {
    let n = values.len();
    if n < 2 {
        return f64::INFINITY;
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    (var / n as f64).sqrt()
}

/// What a single replica reports back.
pub trait Replica {
    fn value(&self) -> f64;
    fn history_len(&self) -> usize {
        0
    }
}

impl Replica for f64 {
    fn value(&self) -> f64 {
        *self
    }
}

impl Replica for AwhResult {
    fn value(&self) -> f64 {
        self.delta_f
    }
    fn history_len(&self) -> usize {
        self.history.len()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FreeEnergyResult {
    /// Mean over replicas, kT.
    pub estimate: f64,
    pub sem: f64,
    pub replicas: usize,
    /// Bias stages summed over replicas.
    pub history_len: usize,
    pub target_met: bool,
    pub values: Vec<f64>,
}

/// Add independent replicas (replica `i` seeded with `split(seed, i)`) until
/// the standard error of the mean is at most `target_sem`, or until
/// `max_replicas` (at least two) have run.
pub fn run_until_sem<R, F>(
    estimator: F,
    target_sem: f64,
    max_replicas: usize,
    seed: u64,
) -> Result<FreeEnergyResult, FepError>
where
    R: Replica + Send,
    F: Fn(u64) -> Result<R, FepError> + Sync,
{
    if !(target_sem > 0.0) {
        return Err(FepError::InvalidTarget);
    }
    let max = max_replicas.max(2);
    let batch = rayon::current_num_threads().max(2);
    let mut values = Vec::new();
    let mut history_len = 0;
    while values.len() < max {
        let start = values.len();
        let end = (start + batch).min(max);
        // replicas run in parallel; the stopping rule scans them in index order
        let out: Vec<R> =
            (start..end).into_par_iter().map(|i| estimator(seed::split(seed, i as u64))).collect::<Result<_, _>>()?;
        for r in out {
            values.push(r.value());
            history_len += r.history_len();
            if values.len() >= 2 && sem(&values) <= target_sem {
                return Ok(finish(values, history_len, true));
            }
        }
    }
    let met = sem(&values) <= target_sem;
    Ok(finish(values, history_len, met))
}

fn finish(values: Vec<f64>, history_len: usize, target_met: bool) -> FreeEnergyResult {
    let estimate = values.iter().sum::<f64>() / values.len() as f64;
    FreeEnergyResult { estimate, sem: sem(&values), replicas: values.len(), history_len, target_met, values }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct EnergySamples {
    pub complex: Vec<f64>,
    pub receptor: Vec<f64>,
    pub ligand: Vec<f64>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct SolvationTerms {
    pub complex: f64,
    pub receptor: f64,
    pub ligand: f64,
}

/// Gas-phase interaction from mean energies plus the solvation difference.
pub fn abfe_estimate(samples: &EnergySamples, solvation: &SolvationTerms) -> Result<f64, FepError> {
    let mean = |v: &[f64], name: &'static str| {
        if v.is_empty() {
            Err(FepError::EmptySamples(name))
        } else {
            Ok(v.iter().sum::<f64>() / v.len() as f64)
        }
    };
    let gas =
        mean(&samples.complex, "complex")? - mean(&samples.receptor, "receptor")? - mean(&samples.ligand, "ligand")?;
    Ok(gas + (solvation.complex - solvation.receptor - solvation.ligand))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub pair_id: String,
    pub ligand_a: String,
    pub ligand_b: String,
    pub ddg: f64,
    pub sem: f64,
    pub replicas: usize,
    pub target_met: bool,
}

pub fn format_results(rows: &[ResultRow]) -> String {
    let mut s = String::from("pair_id\tligand_a\tligand_b\tddg_kT\tsem_kT\treplicas\tflag\n");
    for r in rows {
        let flag = if r.target_met { "ok" } else { "target_not_met" };
        s.push_str(&format!(
            "{}\t{}\t{}\t{:.6}\t{:.6}\t{}\t{}\n",
            r.pair_id, r.ligand_a, r.ligand_b, r.ddg, r.sem, r.replicas, flag
        ));
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sem_formula() {
        assert!((sem(&[1.0, 1.0, 4.0]) - 1.0).abs() < 1e-12);
        assert_eq!(sem(&[2.0, 2.0]), 0.0);
        assert!(sem(&[1.0]).is_infinite());
    }

    #[test]
    fn deterministic_estimator_stops_at_two() {
        let r = run_until_sem(|_| Ok(0.7), 0.01, 50, 1).unwrap();
        assert_eq!(r.replicas, 2);
        assert_eq!(r.sem, 0.0);
        assert!(r.target_met);
    }

    #[test]
    fn target_not_met_is_flagged() {
        let r = run_until_sem(|s| Ok((s % 1000) as f64), 1e-9, 5, 1).unwrap();
        assert_eq!(r.replicas, 5);
        assert!(!r.target_met);
        assert!(r.sem > 1e-9);
        assert_eq!(run_until_sem(|_| Ok(0.0), 0.0, 5, 1), Err(FepError::InvalidTarget));
    }

    #[test]
    fn abfe_arithmetic() {
        let zero = EnergySamples { complex: vec![0.0], receptor: vec![0.0], ligand: vec![0.0] };
        assert_eq!(abfe_estimate(&zero, &SolvationTerms::default()).unwrap(), 0.0);
        let s = EnergySamples { complex: vec![-10.0], receptor: vec![-4.0], ligand: vec![-1.0] };
        let solv = SolvationTerms { complex: -2.0, receptor: -1.0, ligand: -0.5 };
        assert!((abfe_estimate(&s, &solv).unwrap() + 5.5).abs() < 1e-12);
        let empty = EnergySamples { complex: vec![], ..s };
        assert_eq!(abfe_estimate(&empty, &solv), Err(FepError::EmptySamples("complex")));
    }
}
