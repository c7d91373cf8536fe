//! Coin rotations and coin (polarization) states.
//!
//! The coin basis is ordered `(H, V)` everywhere: index 0 is `H`, which the
//! shift moves to the left, and index 1 is `V`, which moves to the right.

use std::f64::consts::FRAC_1_SQRT_2;
use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::WalkError;

/// Index of the `H` coin component.
pub const H: usize = 0;
/// Index of the `V` coin component.
pub const V: usize = 1;

const COIN_NORM_TOL: f64 = 1e-12;

/// Half-wave-plate angle θ of the coin, in degrees, within `[0°, 45°]`.
///
/// The endpoints give deterministic transport (θ = 0° never flips the coin,
/// θ = 45° always does); they are accepted and reported by
/// [`CoinAngle::is_degenerate`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoinAngle {
    theta_deg: f64,
}

impl CoinAngle {
    pub const HADAMARD: CoinAngle = CoinAngle { theta_deg: 22.5 };

    pub fn from_degrees(theta_deg: f64) -> Result<Self, WalkError> {
        if !theta_deg.is_finite() {
            return Err(WalkError::NonFinite("coin angle"));
        }
        if !(0.0..=45.0).contains(&theta_deg) {
            return Err(WalkError::CoinAngle(theta_deg));
        }
        Ok(Self { theta_deg })
    }

    pub fn degrees(self) -> f64 {
        self.theta_deg
    }

    pub fn radians(self) -> f64 {
        self.theta_deg.to_radians()
    }

    pub fn is_degenerate(self) -> bool {
        self.theta_deg == 0.0 || self.theta_deg == 45.0
    }

    pub fn matrix(self) -> [[f64; 2]; 2] {
        coin_matrix(self)
    }
}

impl fmt::Display for CoinAngle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}°", self.theta_deg)
    }
}

/// `C(θ) = [[cos 2θ, sin 2θ], [sin 2θ, −cos 2θ]]` in the `(H, V)` basis.
///
/// Real, symmetric, orthogonal, determinant −1 and its own inverse.
pub fn coin_matrix(coin: CoinAngle) -> [[f64; 2]; 2] {
    let (s, c) = (2.0 * coin.radians()).sin_cos();
    [[c, s], [s, -c]]
}

/// Normalized coin state `amp_h |H⟩ + amp_v |V⟩`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoinState {
    amp_h: Complex64,
    amp_v: Complex64,
}

impl CoinState {
    /// Validates `|h|² + |v|² = 1` within 1e-12.
    pub fn new(amp_h: Complex64, amp_v: Complex64) -> Result<Self, WalkError> {
        let norm = amp_h.norm_sqr() + amp_v.norm_sqr();
        if !norm.is_finite() {
            return Err(WalkError::NonFinite("coin amplitudes"));
        }
        if (norm - 1.0).abs() > COIN_NORM_TOL {
            return Err(WalkError::CoinNorm(norm));
        }
        Ok(Self { amp_h, amp_v })
    }

    /// Rescales arbitrary amplitudes to unit norm.
    pub fn normalized(amp_h: Complex64, amp_v: Complex64) -> Result<Self, WalkError> {
        let norm = (amp_h.norm_sqr() + amp_v.norm_sqr()).sqrt();
        if !norm.is_finite() {
            return Err(WalkError::NonFinite("coin amplitudes"));
        }
        if norm == 0.0 {
            return Err(WalkError::ZeroCoin);
        }
        Ok(Self {
            amp_h: amp_h / norm,
            amp_v: amp_v / norm,
        })
    }

    pub fn horizontal() -> Self {
        Self {
            amp_h: Complex64::new(1.0, 0.0),
            amp_v: Complex64::new(0.0, 0.0),
        }
    }

    pub fn vertical() -> Self {
        Self {
            amp_h: Complex64::new(0.0, 0.0),
            amp_v: Complex64::new(1.0, 0.0),
        }
    }

    /// `(|H⟩ − i|V⟩)/√2`, the state used for the walk experiments.
    pub fn antisymmetric() -> Self {
        Self {
            amp_h: Complex64::new(FRAC_1_SQRT_2, 0.0),
            amp_v: Complex64::new(0.0, -FRAC_1_SQRT_2),
        }
    }

    /// `(|H⟩ − |V⟩)/√2`.
    pub fn minus() -> Self {
        Self {
            amp_h: Complex64::new(FRAC_1_SQRT_2, 0.0),
            amp_v: Complex64::new(-FRAC_1_SQRT_2, 0.0),
        }
    }

    pub fn amp_h(&self) -> Complex64 {
        self.amp_h
    }

    pub fn amp_v(&self) -> Complex64 {
        self.amp_v
    }

    pub fn amplitudes(&self) -> [Complex64; 2] {
        [self.amp_h, self.amp_v]
    }
}
