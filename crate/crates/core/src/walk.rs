//! Exact state-vector evolution of the defected walk and its observables.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::coin::{coin_matrix, CoinAngle};
use crate::config::{DefectSpec, WalkConfig};
use crate::distribution::{variance, Distribution};
use crate::error::WalkError;
use crate::state::{make_initial, PureState};

/// One walk step with its trigonometric factors precomputed.
#[derive(Debug, Clone, Copy)]
pub struct StepOperator {
    coin: [[f64; 2]; 2],
    defect: Option<(i64, Complex64)>,
}

impl StepOperator {
    pub fn new(coin: CoinAngle, defect: Option<&DefectSpec>) -> Self {
        Self {
            coin: coin_matrix(coin),
            defect: defect
                .filter(|d| d.phase_deg() != 0.0)
                .map(|d| (d.site(), d.phase_factor())),
        }
    }

    fn coin_rows(&self, rows: &mut [[Complex64; 2]]) {
        let [[a, b], [c, d]] = self.coin;
        for r in rows {
            let (h, v) = (r[0], r[1]);
            *r = [h * a + v * b, h * c + v * d];
        }
    }

    fn shift_rows(&self, offset: i64, rows: &[[Complex64; 2]]) -> (i64, Vec<[Complex64; 2]>) {
        let zero = Complex64::new(0.0, 0.0);
        let mut out = vec![[zero, zero]; rows.len() + 2];
        for (i, r) in rows.iter().enumerate() {
            let x = offset + i as i64;
            let (h, v) = match self.defect {
                Some((n, phase)) if n == x => (r[0] * phase, r[1] * phase),
                _ => (r[0], r[1]),
            };
            // H: x -> x-1 lands on new index i; V: x -> x+1 on new index i+2
            out[i][0] = h;
            out[i + 2][1] = v;
        }
        (offset - 1, out)
    }

    /// Applies the step to raw rows starting at `offset`, without any norm
    /// bookkeeping. Output covers one extra site on each side.
    pub fn apply_rows(&self, offset: i64, rows: &[[Complex64; 2]]) -> (i64, Vec<[Complex64; 2]>) {
        let mut coined = rows.to_vec();
        self.coin_rows(&mut coined);
        self.shift_rows(offset, &coined)
    }

    pub fn apply(&self, state: &PureState) -> PureState {
        let (offset, rows) = self.apply_rows(state.offset(), state.rows());
        PureState::from_rows_unchecked(offset, rows)
    }
}

/// `(1 ⊗ C(θ))`: the coin applied at every site. Support is unchanged.
pub fn apply_coin(state: &PureState, coin: CoinAngle) -> PureState {
    let op = StepOperator::new(coin, None);
    let mut rows = state.rows().to_vec();
    op.coin_rows(&mut rows);
    PureState::from_rows_unchecked(state.offset(), rows)
}

/// Conditional shift: `H` moves left, `V` moves right, and both components
/// departing the defect site pick up `e^{iφ}`. Storage grows by one site on
/// each side.
pub fn apply_shift(state: &PureState, defect: Option<&DefectSpec>) -> PureState {
    // the coin here is never used
    let op = StepOperator::new(CoinAngle::HADAMARD, defect);
    let (offset, rows) = op.shift_rows(state.offset(), state.rows());
    PureState::from_rows_unchecked(offset, rows)
}

/// Coin then shift.
pub fn step(state: &PureState, coin: CoinAngle, defect: Option<&DefectSpec>) -> PureState {
    StepOperator::new(coin, defect).apply(state)
}

/// `P(x) = |ψ(x,H)|² + |ψ(x,V)|²`.
pub fn position_distribution(state: &PureState) -> Distribution {
    let probs = state
        .rows()
        .iter()
        .map(|r| r[0].norm_sqr() + r[1].norm_sqr())
        .collect();
    Distribution::from_probs_unchecked(state.offset(), probs)
}

/// Per-step observables of one run, step 0 included.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryRecord {
    pub distributions: Vec<Distribution>,
    pub variances: Vec<f64>,
    pub recurrence: Vec<f64>,
    pub recurrence_site: i64,
    pub final_state: PureState,
}

impl TrajectoryRecord {
    pub fn final_distribution(&self) -> &Distribution {
        self.distributions.last().expect("trajectory includes step 0")
    }

    pub fn final_variance(&self) -> f64 {
        *self.variances.last().expect("trajectory includes step 0")
    }

    pub fn final_recurrence(&self) -> f64 {
        *self.recurrence.last().expect("trajectory includes step 0")
    }
}

pub fn evolve(config: &WalkConfig) -> Result<TrajectoryRecord, WalkError> {
    config.validate()?;
    let op = StepOperator::new(config.coin, config.defect.as_ref());
    let site = config.recurrence_site();

    let mut state = make_initial(config.initial_site, config.initial_coin);
    let mut distributions = Vec::with_capacity(config.steps + 1);
    distributions.push(position_distribution(&state));
    for _ in 0..config.steps {
        state = op.apply(&state);
        distributions.push(position_distribution(&state));
    }
    let variances = distributions.iter().map(variance).collect();
    let recurrence = distributions.iter().map(|d| d.prob(site)).collect();
    Ok(TrajectoryRecord {
        distributions,
        variances,
        recurrence,
        recurrence_site: site,
        final_state: state,
    })
}

/// Final-step summary of one sweep point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub parameter_deg: f64,
    pub variance: f64,
    pub recurrence: f64,
}

fn sweep<F>(values: &[f64], make: F) -> Result<Vec<SweepRow>, WalkError>
where
    F: Fn(f64) -> Result<WalkConfig, WalkError> + Sync,
{
    if values.is_empty() {
        return Err(WalkError::EmptyGrid);
    }
    values
        .par_iter()
        .map(|&value| {
            let record = evolve(&make(value)?)?;
            Ok(SweepRow {
                parameter_deg: value,
                variance: record.final_variance(),
                recurrence: record.final_recurrence(),
            })
        })
        .collect()
}

/// Final variance and recurrence for each defect phase (degrees); the defect
/// site comes from `base`.
pub fn sweep_phase(base: &WalkConfig, phases: &[f64]) -> Result<Vec<SweepRow>, WalkError> {
    let defect = base.defect.ok_or(WalkError::MissingDefect)?;
    sweep(phases, |phi| Ok(base.clone().with_defect(defect.with_phase(phi)?)))
}

/// Final variance and recurrence for each coin angle (degrees).
pub fn sweep_coin(base: &WalkConfig, angles: &[f64]) -> Result<Vec<SweepRow>, WalkError> {
    sweep(angles, |theta| {
        let mut cfg = base.clone();
        cfg.coin = CoinAngle::from_degrees(theta)?;
        Ok(cfg)
    })
}
