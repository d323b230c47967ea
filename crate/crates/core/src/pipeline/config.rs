use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::CampaignError;
use crate::batcher::{default_classes, validate_classes, DeviceModel, SizeClass};
use crate::dock::DockParams;
use crate::sched::{AllocPolicy, Resources, Worker};

/// Keep fractions in `(0, 1]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Funnel {
    /// Fraction of ranked ligands kept after docking.
    #[serde(default = "one")]
    pub shortlist: f64,
    /// Fraction of the shortlist sent to free-energy refinement.
    #[serde(default = "one")]
    pub fep: f64,
}

impl Default for Funnel {
    fn default() -> Self {
        Self { shortlist: 1.0, fep: 1.0 }
    }
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StageKnobs {
    pub dock: DockParams,
    /// Poses kept per ligand after rescoring.
    pub filter_top_k: usize,
    /// Minimum geometric score for a pose to survive; none keeps all.
    pub filter_threshold: Option<f64>,
    pub device: DeviceModel,
    pub classes: Vec<SizeClass>,
    /// Simulated seconds between ligand arrivals at the batcher.
    pub interarrival: f64,
    /// Ligands per embedding task.
    pub embed_chunk: usize,
}

impl Default for StageKnobs {
    fn default() -> Self {
        Self {
            dock: DockParams::default(),
            filter_top_k: 3,
            filter_threshold: None,
            device: DeviceModel::default(),
            classes: default_classes(),
            interarrival: 0.001,
            embed_chunk: 32,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClusterConfig {
    pub workers: Vec<Worker>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub policy: Option<AllocPolicy>,
}

impl Default for ClusterConfig {
    fn default() -> Self {
        let node = Resources::new(8, 1, 64_000);
        Self { workers: (0..4).map(|id| Worker { id, capacity: node }).collect(), policy: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FepConfig {
    /// Requested standard error, kT.
    pub target_sem: f64,
    pub max_replicas: usize,
    /// Production steps per relative replica.
    pub awh_steps: usize,
    /// Energy samples per phase in one absolute replica.
    pub abfe_samples: usize,
}

impl Default for FepConfig {
    fn default() -> Self {
        Self { target_sem: 0.1, max_replicas: 16, awh_steps: 20_000, abfe_samples: 64 }
    }
}

/// Campaign description. Relative paths resolve against the directory of the
/// config file when loaded with [`CampaignConfig::load`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CampaignConfig {
    /// Plain `SMILES<TAB>ID` text or an `SMZC` container.
    pub library: PathBuf,
    /// Dictionary for compressed libraries; the built-in one when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dictionary: Option<PathBuf>,
    /// Pocket JSON; the demo pocket when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pocket: Option<PathBuf>,
    #[serde(default)]
    pub funnel: Funnel,
    #[serde(default)]
    pub knobs: StageKnobs,
    #[serde(default)]
    pub cluster: ClusterConfig,
    #[serde(default)]
    pub fep: FepConfig,
    #[serde(default)]
    pub seed: u64,
    /// Ligands listed in the report.
    #[serde(default = "ten")]
    pub top_n: usize,
    /// Worker threads, 0 for the ambient pool.
    #[serde(default)]
    pub threads: usize,
}

fn ten() -> usize {
    10
}

impl CampaignConfig {
    pub fn new(library: impl Into<PathBuf>) -> Self {
        Self {
            library: library.into(),
            dictionary: None,
            pocket: None,
            funnel: Funnel::default(),
            knobs: StageKnobs::default(),
            cluster: ClusterConfig::default(),
            fep: FepConfig::default(),
            seed: 0,
            top_n: 10,
            threads: 0,
        }
    }

    pub fn from_json(text: &str) -> Result<Self, CampaignError> {
        serde_json::from_str(text).map_err(|e| CampaignError::Config(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    /// Read, resolve relative paths and validate.
    pub fn load(path: &Path) -> Result<Self, CampaignError> {
        let text =
            std::fs::read_to_string(path).map_err(|e| CampaignError::Config(format!("{}: {e}", path.display())))?;
        let mut cfg = Self::from_json(&text)?;
        let base = path.parent().unwrap_or(Path::new(""));
        cfg.resolve(base);
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn resolve(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        fix(&mut self.library);
        self.dictionary.as_mut().map(fix);
        self.pocket.as_mut().map(fix);
    }

    pub fn validate(&self) -> Result<(), CampaignError> {
        let bad = |m: String| Err(CampaignError::Config(m));
        for (name, k) in [("shortlist", self.funnel.shortlist), ("fep", self.funnel.fep)] {
            if !(k > 0.0 && k <= 1.0) {
                return bad(format!("keep fraction {name} = {k} is outside (0, 1]"));
            }
        }
        let mut files = vec![&self.library];
        files.extend(self.dictionary.as_ref());
        files.extend(self.pocket.as_ref());
        for f in files {
            if !f.is_file() {
                return bad(format!("missing file {}", f.display()));
            }
        }
        let k = &self.knobs;
        if k.dock.restarts == 0 {
            return bad("dock.restarts must be at least 1".into());
        }
        if k.filter_top_k == 0 || k.embed_chunk == 0 {
            return bad("filter_top_k and embed_chunk must be positive".into());
        }
        if !(k.interarrival >= 0.0) {
            return bad("interarrival must be non-negative".into());
        }
        k.device.validate().map_err(|e| CampaignError::Config(e.to_string()))?;
        validate_classes(&k.classes).map_err(|e| CampaignError::Config(e.to_string()))?;
        if self.cluster.workers.is_empty() && self.cluster.policy.is_none() {
            return bad("cluster has no workers and no allocation policy".into());
        }
        if !(self.fep.target_sem > 0.0) || self.fep.abfe_samples == 0 {
            return bad("fep.target_sem and fep.abfe_samples must be positive".into());
        }
        Ok(())
    }
}
