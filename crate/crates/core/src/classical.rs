//! Classical random-walk baseline and the diabatic transition probability.

use serde::{Deserialize, Serialize};

use crate::coin::CoinAngle;
use crate::distribution::Distribution;
use crate::error::WalkError;

/// Unbiased-or-biased random walk; `bias` is the probability of a step to
/// the right.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RwSpec {
    steps: usize,
    bias: f64,
}

impl RwSpec {
    pub fn new(steps: usize, bias: f64) -> Result<Self, WalkError> {
        if !(0.0..=1.0).contains(&bias) {
            return Err(WalkError::Bias(bias));
        }
        Ok(Self { steps, bias })
    }

    pub fn fair(steps: usize) -> Self {
        Self { steps, bias: 0.5 }
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn bias(&self) -> f64 {
        self.bias
    }
}

/// Exact distribution after `steps` steps from the origin, by dynamic
/// programming over sites `−steps..=steps`.
pub fn rw_distribution(spec: &RwSpec) -> Distribution {
    let t = spec.steps;
    let (right, left) = (spec.bias, 1.0 - spec.bias);
    let mut probs = vec![0.0; 2 * t + 1];
    probs[t] = 1.0;
    for _ in 0..t {
        let mut next = vec![0.0; probs.len()];
        for (i, &p) in probs.iter().enumerate() {
            if p == 0.0 {
                continue;
            }
            if i > 0 {
                next[i - 1] += p * left;
            }
            if i + 1 < probs.len() {
                next[i + 1] += p * right;
            }
        }
        probs = next;
    }
    Distribution::from_probs_unchecked(-(t as i64), probs)
}

/// `D = cos²(2θ)`.
pub fn diabatic_probability(coin: CoinAngle) -> f64 {
    let c = (2.0 * coin.radians()).cos();
    c * c
}
