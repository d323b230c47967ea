use serde::{Deserialize, Serialize};

use super::DockError;
use crate::geom::Vec3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SiteKind {
    Steric,
    Hbond,
    Lipophilic,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Site {
    pub center: Vec3,
    pub weight: f64,
    /// Gaussian width (sigma).
    pub width: f64,
    pub kind: SiteKind,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bounds {
    pub min: Vec3,
    pub max: Vec3,
}

impl Bounds {
    pub fn contains(&self, p: Vec3) -> bool {
        (0..3).all(|k| p[k] >= self.min[k] && p[k] <= self.max[k])
    }

    pub fn is_empty(&self) -> bool {
        (0..3).any(|k| !(self.max[k] > self.min[k]))
    }
}

/// Pocket definition; the JSON layout is the pocket file format.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Pocket {
    pub sites: Vec<Site>,
    pub bounds: Bounds,
    pub clash_radius: f64,
    pub clash_penalty: f64,
}

impl Pocket {
    pub fn validate(&self) -> Result<(), DockError> {
        if self.bounds.is_empty() {
            return Err(DockError::EmptyBounds);
        }
        if !(self.clash_penalty >= 0.0) || !(self.clash_radius >= 0.0) {
            return Err(DockError::InvalidPocket("clash radius and penalty must be non-negative".into()));
        }
        for (i, s) in self.sites.iter().enumerate() {
            if !(s.width > 0.0) {
                return Err(DockError::InvalidPocket(format!("site {i} has non-positive width")));
            }
            if !s.weight.is_finite() {
                return Err(DockError::InvalidPocket(format!("site {i} has non-finite weight")));
            }
            if !self.bounds.contains(s.center) {
                return Err(DockError::InvalidPocket(format!("site {i} lies outside the bounds")));
            }
        }
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self, DockError> {
        let p: Pocket = serde_json::from_str(text).map_err(|e| DockError::InvalidPocket(e.to_string()))?;
        p.validate()?;
        Ok(p)
    }

    /// Small demo pocket: a steric core flanked by one hydrogen-bond and one
    /// lipophilic site.
    pub fn demo() -> Self {
        let site = |center, weight, width, kind| Site { center, weight, width, kind };
        Pocket {
            sites: vec![
                site([0.0, 0.0, 0.0], 1.0, 2.0, SiteKind::Steric),
                site([3.0, 1.0, 0.0], 0.8, 1.5, SiteKind::Steric),
                site([-3.0, -1.0, 1.0], 0.8, 1.5, SiteKind::Steric),
                site([1.5, -2.0, 0.5], 0.6, 1.0, SiteKind::Hbond),
                site([-1.0, 2.0, -1.0], 0.5, 1.5, SiteKind::Lipophilic),
            ],
            bounds: Bounds { min: [-8.0; 3], max: [8.0; 3] },
            clash_radius: 1.2,
            clash_penalty: 1.0,
        }
    }
}
