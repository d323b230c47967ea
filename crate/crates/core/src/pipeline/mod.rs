//! Campaign orchestration: library ingestion through docking, batching,
//! scheduling and free-energy refinement, with a JSON report, a TSV ranking
//! and a JSONL scheduler trace.

mod campaign;
mod config;
mod objective;

use std::cmp::Ordering;

pub use campaign::{
    relative_model, run_campaign, toy_binding_free_energy, CampaignError, CampaignOutput, CampaignReport, RankedLigand,
    StageReport,
};
pub use config::{CampaignConfig, ClusterConfig, FepConfig, Funnel, StageKnobs};
pub use objective::PipelineObjective;

/// Survivors of a keep fraction: `ceil(n * keep)`, never more than `n`.
pub fn kept(n: usize, keep: f64) -> usize {
    if n == 0 {
        return 0;
    }
    let k = (n as f64 * keep - 1e-9).ceil().max(0.0) as usize;
    k.clamp(1, n)
}

/// Order ligands by score, best first; equal scores by ascending id.
pub fn rank_ligands<'a, I>(scores: I) -> Vec<(String, f64)>
where
    I: IntoIterator<Item = (&'a str, f64)>,
{
    let mut v: Vec<(String, f64)> = scores.into_iter().map(|(id, s)| (id.to_string(), s)).collect();
    v.sort_by(|a, b| match b.1.total_cmp(&a.1) {
        Ordering::Equal => a.0.cmp(&b.0),
        o => o,
    });
    v
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ids(v: &[(String, f64)]) -> Vec<&str> {
        v.iter().map(|(i, _)| i.as_str()).collect()
    }

    #[test]
    fn ranking_examples() {
        assert!(rank_ligands(std::iter::empty()).is_empty());
        assert_eq!(ids(&rank_ligands([("a", 1.0), ("b", 3.0), ("c", 2.0)])), ["b", "c", "a"]);
        assert_eq!(ids(&rank_ligands([("b", 1.0), ("a", 1.0)])), ["a", "b"]);
    }

    #[test]
    fn keep_arithmetic() {
        assert_eq!(kept(100, 0.2), 20);
        assert_eq!(kept(20, 0.5), 10);
        assert_eq!(kept(7, 1.0), 7);
        assert_eq!(kept(3, 0.01), 1);
        assert_eq!(kept(0, 0.5), 0);
        assert_eq!(kept(10, 0.3), 3);
    }
}
