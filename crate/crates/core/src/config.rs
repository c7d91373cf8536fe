use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::coin::{CoinAngle, CoinState};
use crate::error::WalkError;

/// Default upper bound on the number of steps a [`WalkConfig`] may request.
pub const DEFAULT_STEP_BUDGET: usize = 10_000;

/// A phase `e^{iφ}` picked up by every amplitude departing `site`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DefectSpec {
    site: i64,
    phase_deg: f64,
}

impl DefectSpec {
    /// The phase is reduced into `[0°, 360°)`.
    pub fn new(site: i64, phase_deg: f64) -> Result<Self, WalkError> {
        if !phase_deg.is_finite() {
            return Err(WalkError::NonFinite("defect phase"));
        }
        let mut phase = phase_deg.rem_euclid(360.0);
        // rem_euclid of a tiny negative value rounds up to 360
        if phase >= 360.0 {
            phase = 0.0;
        }
        Ok(Self {
            site,
            phase_deg: phase,
        })
    }

    pub fn site(&self) -> i64 {
        self.site
    }

    pub fn phase_deg(&self) -> f64 {
        self.phase_deg
    }

    pub fn phase_rad(&self) -> f64 {
        self.phase_deg.to_radians()
    }

    /// `e^{iφ}`; exactly `1` for a zero phase.
    pub fn phase_factor(&self) -> Complex64 {
        if self.phase_deg == 0.0 {
            Complex64::new(1.0, 0.0)
        } else {
            Complex64::from_polar(1.0, self.phase_rad())
        }
    }

    pub fn with_phase(&self, phase_deg: f64) -> Result<Self, WalkError> {
        Self::new(self.site, phase_deg)
    }
}

/// Everything needed for one walk run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WalkConfig {
    pub steps: usize,
    pub coin: CoinAngle,
    pub defect: Option<DefectSpec>,
    pub initial_site: i64,
    pub initial_coin: CoinState,
    pub step_budget: usize,
}

impl WalkConfig {
    /// A walk from `|0⟩ ⊗ (|H⟩ − i|V⟩)/√2` with no defect.
    pub fn new(steps: usize, coin: CoinAngle) -> Self {
        Self {
            steps,
            coin,
            defect: None,
            initial_site: 0,
            initial_coin: CoinState::antisymmetric(),
            step_budget: DEFAULT_STEP_BUDGET,
        }
    }

    pub fn with_defect(mut self, defect: DefectSpec) -> Self {
        self.defect = Some(defect);
        self
    }

    pub fn without_defect(mut self) -> Self {
        self.defect = None;
        self
    }

    pub fn with_initial(mut self, site: i64, coin: CoinState) -> Self {
        self.initial_site = site;
        self.initial_coin = coin;
        self
    }

    pub fn with_step_budget(mut self, budget: usize) -> Self {
        self.step_budget = budget;
        self
    }

    pub fn validate(&self) -> Result<(), WalkError> {
        if self.steps > self.step_budget {
            return Err(WalkError::StepBudget {
                steps: self.steps,
                budget: self.step_budget,
            });
        }
        Ok(())
    }

    /// Set when the coin sits at 0° or 45°, where the walk is deterministic
    /// transport.
    pub fn degenerate_coin(&self) -> bool {
        self.coin.is_degenerate()
    }

    /// Site whose occupation is tracked as the recurrence probability: the
    /// defect site if there is one, else the initial site.
    pub fn recurrence_site(&self) -> i64 {
        self.defect.map_or(self.initial_site, |d| d.site())
    }
}
