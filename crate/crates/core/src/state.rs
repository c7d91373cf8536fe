use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::coin::CoinState;
use crate::error::WalkError;

const NORM_TOL: f64 = 1e-10;

/// Walker+coin amplitudes over a contiguous window of sites.
///
/// Row `i` holds the `(H, V)` amplitudes of site `offset + i`. Sites outside
/// the window carry zero amplitude.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PureState {
    offset: i64,
    amps: Vec<[Complex64; 2]>,
}

impl PureState {
    /// Builds a state from raw rows, checking the norm.
    pub fn from_rows(offset: i64, amps: Vec<[Complex64; 2]>) -> Result<Self, WalkError> {
        let state = Self { offset, amps };
        let norm = state.norm_sqr();
        if !norm.is_finite() || (norm - 1.0).abs() > NORM_TOL {
            return Err(WalkError::StateNorm(norm));
        }
        Ok(state)
    }

    pub(crate) fn from_rows_unchecked(offset: i64, amps: Vec<[Complex64; 2]>) -> Self {
        Self { offset, amps }
    }

    pub fn offset(&self) -> i64 {
        self.offset
    }

    pub fn rows(&self) -> &[[Complex64; 2]] {
        &self.amps
    }

    pub fn num_sites(&self) -> usize {
        self.amps.len()
    }

    /// Last stored site (inclusive).
    pub fn last_site(&self) -> i64 {
        self.offset + self.amps.len() as i64 - 1
    }

    pub fn sites(&self) -> impl Iterator<Item = i64> + '_ {
        (0..self.amps.len() as i64).map(move |i| self.offset + i)
    }

    /// Amplitude at `(site, coin)`; zero outside the stored window.
    pub fn amp(&self, site: i64, coin: usize) -> Complex64 {
        let i = site - self.offset;
        if i < 0 || i as usize >= self.amps.len() {
            return Complex64::new(0.0, 0.0);
        }
        self.amps[i as usize][coin]
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps
            .iter()
            .map(|r| r[0].norm_sqr() + r[1].norm_sqr())
            .sum()
    }

    pub fn inner(&self, other: &PureState) -> Complex64 {
        let lo = self.offset.max(other.offset);
        let hi = self.last_site().min(other.last_site());
        (lo..=hi)
            .map(|x| {
                self.amp(x, 0).conj() * other.amp(x, 0) + self.amp(x, 1).conj() * other.amp(x, 1)
            })
            .sum()
    }
}

/// All amplitude on `site`, coin components taken from `coin`.
pub fn make_initial(site: i64, coin: CoinState) -> PureState {
    PureState {
        offset: site,
        amps: vec![coin.amplitudes()],
    }
}
