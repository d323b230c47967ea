use std::collections::HashSet;

use rand::seq::SliceRandom;
use rand::Rng;
use statrs::distribution::{Continuous, ContinuousCDF, Normal};

use super::{Config, KnobSpace, Observation};
use crate::seed;

/// Space-filling suggestions before the surrogate takes over.
pub const INITIAL_DESIGN: usize = 8;
pub const CANDIDATES: usize = 1024;

/// Nadaraya-Watson regression with a Gaussian kernel over normalized knob
/// coordinates.
#[derive(Debug, Clone)]
pub struct Surrogate {
    points: Vec<Vec<f64>>,
    quality: Vec<f64>,
    cost: Vec<f64>,
    bandwidth: f64,
    residual: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Prediction {
    pub quality: f64,
    /// Leave-one-out residual spread of the quality fit.
    pub spread: f64,
    pub cost: f64,
}

fn dist2(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

impl Surrogate {
    pub fn fit(space: &KnobSpace, history: &[Observation]) -> Self {
        let points: Vec<Vec<f64>> = history.iter().map(|o| space.normalize(&o.config)).collect();
        let mut d: Vec<f64> = Vec::new();
        for i in 0..points.len() {
            for j in i + 1..points.len() {
                d.push(dist2(&points[i], &points[j]).sqrt());
            }
        }
        d.sort_by(f64::total_cmp);
        let median = if d.is_empty() { 1.0 } else { d[d.len() / 2] };
        let mut model = Self {
            points,
            quality: history.iter().map(|o| o.quality).collect(),
            cost: history.iter().map(|o| o.cost).collect(),
            bandwidth: if median > 0.0 { median } else { 1.0 },
            residual: 0.0,
        };
        model.residual = model.loo_residual();
        model
    }

    /// Root-mean-square leave-one-out residual of the quality fit.
    fn loo_residual(&self) -> f64 {
        let n = self.points.len();
        if n < 2 {
            return 0.0;
        }
        let h2 = 2.0 * self.bandwidth * self.bandwidth;
        let mut sse = 0.0;
        for i in 0..n {
            let (mut num, mut den) = (0.0, 0.0);
            for j in (0..n).filter(|&j| j != i) {
                let w = (-dist2(&self.points[i], &self.points[j]) / h2).exp();
                num += w * self.quality[j];
                den += w;
            }
            let pred = if den > 0.0 { num / den } else { self.quality.iter().sum::<f64>() / n as f64 };
            sse += (self.quality[i] - pred).powi(2);
        }
        (sse / n as f64).sqrt()
    }

    pub fn bandwidth(&self) -> f64 {
        self.bandwidth
    }

    pub fn predict(&self, x: &[f64]) -> Prediction {
        let h2 = 2.0 * self.bandwidth * self.bandwidth;
        let logits: Vec<f64> = self.points.iter().map(|p| -dist2(p, x) / h2).collect();
        // shift by the max so far-away queries keep non-zero weights
        let top = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let w: Vec<f64> = logits.iter().map(|l| (l - top).exp()).collect();
        let total: f64 = w.iter().sum();
        let q = w.iter().zip(&self.quality).map(|(a, b)| a * b).sum::<f64>() / total;
        let c = w.iter().zip(&self.cost).map(|(a, b)| a * b).sum::<f64>() / total;
        Prediction { quality: q, spread: self.residual, cost: c }
    }
}

/// Expected improvement below `best` for a minimized objective.
pub fn expected_improvement(best: f64, p: &Prediction) -> f64 {
    let gain = best - p.quality;
    if p.spread <= 0.0 {
        return gain.max(0.0);
    }
    let z = gain / p.spread;
    let n = Normal::standard();
    (gain * n.cdf(z) + p.spread * n.pdf(z)).max(0.0)
}

/// Next configuration to evaluate. The first few follow a seeded Latin
/// hypercube; after that, expected improvement over random and
/// near-incumbent candidates, restricted to predicted cost within `budget`.
/// Configurations already in `history` are never repeated while unseen ones
/// remain.
pub fn suggest_next(space: &KnobSpace, history: &[Observation], budget: Option<f64>, seed: u64) -> Config {
    let seen: HashSet<&Config> = history.iter().map(|o| &o.config).collect();
    let mut rng = seed::rng(seed::split(seed::derive(seed, "tune.suggest"), history.len() as u64));
    let fresh = |c: &Config| !seen.contains(c);

    if (space.cardinality() as usize as u128) == space.cardinality() && seen.len() as u128 >= space.cardinality() {
        // exhausted: repeat the incumbent
        return history
            .iter()
            .min_by(|a, b| a.quality.total_cmp(&b.quality))
            .map(|o| o.config.clone())
            .unwrap_or_else(|| vec![0; space.len()]);
    }

    if history.len() < INITIAL_DESIGN {
        let c = latin_row(space, history.len(), seed);
        if fresh(&c) {
            return c;
        }
        return random_unseen(space, &seen, &mut rng);
    }

    let model = Surrogate::fit(space, history);
    let incumbent = history.iter().min_by(|a, b| a.quality.total_cmp(&b.quality)).expect("non-empty history");
    let best = incumbent.quality;

    let cands = candidate_pool(space, history, seed);
    if cands.is_empty() {
        return random_unseen(space, &seen, &mut rng);
    }

    let preds: Vec<Prediction> = cands.iter().map(|c| model.predict(&space.normalize(c))).collect();
    let feasible: Vec<usize> = (0..cands.len()).filter(|&i| budget.is_none_or(|b| preds[i].cost <= b)).collect();
    if feasible.is_empty() {
        let i = (0..cands.len()).min_by(|&a, &b| preds[a].cost.total_cmp(&preds[b].cost)).expect("candidates");
        return cands[i].clone();
    }
    let ei: Vec<f64> = feasible.iter().map(|&i| expected_improvement(best, &preds[i])).collect();
    let (arg, top) =
        ei.iter().enumerate().fold((0, f64::NEG_INFINITY), |acc, (k, &v)| if v > acc.1 { (k, v) } else { acc });
    if top > 0.0 {
        return cands[feasible[arg]].clone();
    }
    // no candidate promises improvement: explore the emptiest region
    let pts: Vec<Vec<f64>> = history.iter().map(|o| space.normalize(&o.config)).collect();
    let far = feasible
        .iter()
        .map(|&i| {
            let x = space.normalize(&cands[i]);
            (i, pts.iter().map(|p| dist2(p, &x)).fold(f64::INFINITY, f64::min))
        })
        .fold((feasible[0], f64::NEG_INFINITY), |acc, (i, d)| if d > acc.1 { (i, d) } else { acc });
    cands[far.0].clone()
}

/// Unseen candidates for the surrogate step: alternately uniform samples and
/// perturbations of the incumbent, deterministic in `(history, seed)`.
pub fn candidate_pool(space: &KnobSpace, history: &[Observation], seed: u64) -> Vec<Config> {
    let seen: HashSet<&Config> = history.iter().map(|o| &o.config).collect();
    let mut rng = seed::rng(seed::split(seed::derive(seed, "tune.pool"), history.len() as u64));
    let incumbent = history.iter().min_by(|a, b| a.quality.total_cmp(&b.quality)).map(|o| o.config.clone());
    let mut cands: Vec<Config> = Vec::with_capacity(CANDIDATES);
    let mut unique: HashSet<Config> = HashSet::new();
    for k in 0..CANDIDATES * 4 {
        if cands.len() >= CANDIDATES {
            break;
        }
        let c = match &incumbent {
            Some(inc) if k % 2 == 1 => neighbour(space, inc, &mut rng),
            _ => space.random_config(&mut rng),
        };
        if !seen.contains(&c) && unique.insert(c.clone()) {
            cands.push(c);
        }
    }
    cands
}

/// Row `row` of an `INITIAL_DESIGN`-point Latin hypercube fixed by `seed`.
fn latin_row(space: &KnobSpace, row: usize, seed: u64) -> Config {
    let n = INITIAL_DESIGN;
    space
        .knobs
        .iter()
        .enumerate()
        .map(|(k, knob)| {
            let mut rng = seed::rng(seed::split(seed::derive(seed, "tune.lhs"), k as u64));
            let mut perm: Vec<usize> = (0..n).collect();
            perm.shuffle(&mut rng);
            let offsets: Vec<f64> = (0..n).map(|_| rng.gen::<f64>()).collect();
            let u = (perm[row % n] as f64 + offsets[row % n]) / n as f64;
            ((u * knob.values.len() as f64) as usize).min(knob.values.len() - 1)
        })
        .collect()
}

fn neighbour<R: Rng>(space: &KnobSpace, base: &[usize], rng: &mut R) -> Config {
    let mut c = base.to_vec();
    let moves = rng.gen_range(1..=2);
    for _ in 0..moves {
        let k = rng.gen_range(0..space.len());
        let n = space.knobs[k].values.len() as i64;
        if n < 2 {
            continue;
        }
        let step = *[-1i64, 1].choose(rng).expect("non-empty");
        c[k] = (c[k] as i64 + step).clamp(0, n - 1) as usize;
    }
    c
}

fn random_unseen<R: Rng>(space: &KnobSpace, seen: &HashSet<&Config>, rng: &mut R) -> Config {
    for _ in 0..10_000 {
        let c = space.random_config(rng);
        if !seen.contains(&c) {
            return c;
        }
    }
    if let Some(all) = space.enumerate(1 << 20) {
        if let Some(c) = all.into_iter().find(|c| !seen.contains(c)) {
            return c;
        }
    }
    space.random_config(rng)
}
