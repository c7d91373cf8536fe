use serde::{Deserialize, Serialize};

use crate::error::WalkError;

const SUM_TOL: f64 = 1e-10;

/// Normalized probability table over a contiguous window of sites.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Distribution {
    offset: i64,
    probs: Vec<f64>,
}

impl Distribution {
    pub fn new(offset: i64, probs: Vec<f64>) -> Result<Self, WalkError> {
        if probs.is_empty() {
            return Err(WalkError::Distribution("empty support".into()));
        }
        if let Some(p) = probs.iter().find(|p| !p.is_finite() || **p < 0.0) {
            return Err(WalkError::Distribution(format!("entry {p} is not a probability")));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > SUM_TOL {
            return Err(WalkError::Distribution(format!("sums to {total}")));
        }
        Ok(Self { offset, probs })
    }

    /// Normalizes nonnegative weights (counts, for instance).
    pub fn from_weights(offset: i64, weights: &[f64]) -> Result<Self, WalkError> {
        let total: f64 = weights.iter().sum();
        if !(total > 0.0) || !total.is_finite() {
            return Err(WalkError::Distribution(format!("weights sum to {total}")));
        }
        Self::new(offset, weights.iter().map(|w| w / total).collect())
    }

    pub fn point_mass(site: i64) -> Self {
        Self {
            offset: site,
            probs: vec![1.0],
        }
    }

    pub(crate) fn from_probs_unchecked(offset: i64, probs: Vec<f64>) -> Self {
        Self { offset, probs }
    }

    pub fn offset(&self) -> i64 {
        self.offset
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn last_site(&self) -> i64 {
        self.offset + self.probs.len() as i64 - 1
    }

    /// `(site, probability)` pairs in increasing site order.
    pub fn iter(&self) -> impl Iterator<Item = (i64, f64)> + '_ {
        self.probs
            .iter()
            .enumerate()
            .map(move |(i, &p)| (self.offset + i as i64, p))
    }

    /// Probability at `site`; zero outside the stored window.
    pub fn prob(&self, site: i64) -> f64 {
        let i = site - self.offset;
        if i < 0 || i as usize >= self.probs.len() {
            0.0
        } else {
            self.probs[i as usize]
        }
    }

    pub fn mean(&self) -> f64 {
        self.iter().map(|(x, p)| x as f64 * p).sum()
    }

    pub fn variance(&self) -> f64 {
        variance(self)
    }

    /// Most probable site; the leftmost one on ties.
    pub fn argmax(&self) -> i64 {
        let mut best = (self.offset, f64::NEG_INFINITY);
        for (x, p) in self.iter() {
            if p > best.1 {
                best = (x, p);
            }
        }
        best.0
    }
}

/// Second central moment `⟨x²⟩ − ⟨x⟩²`, evaluated as `Σ p (x − ⟨x⟩)²`.
pub fn variance(dist: &Distribution) -> f64 {
    let mean = dist.mean();
    dist.iter()
        .map(|(x, p)| {
            let d = x as f64 - mean;
            p * d * d
        })
        .sum()
}

/// Total-variation distance `½ Σ_x |a(x) − b(x)|` over the union of supports.
pub fn tv_distance(a: &Distribution, b: &Distribution) -> f64 {
    let lo = a.offset.min(b.offset);
    let hi = a.last_site().max(b.last_site());
    0.5 * (lo..=hi).map(|x| (a.prob(x) - b.prob(x)).abs()).sum::<f64>()
}
