//! Measurement emulation: finite interference visibility, photon-count
//! sampling and Monte Carlo error bars.
//!
//! Visibility `v` is a coin-dephasing channel applied after every step,
//! `ρ → ((1+v)/2) ρ + ((1−v)/2) Z ρ Z` with `Z = diag(1, −1)` on the coin at
//! every site. Coherences between `H` and `V` shrink by `v`; everything else is
//! untouched, so a single-step interferometer shows fringe visibility `v`.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution as _};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::WalkConfig;
use crate::distribution::{tv_distance, variance, Distribution};
use crate::error::{EmulateError, WalkError};
use crate::state::{make_initial, PureState};
use crate::walk::{evolve, StepOperator};

pub const DEFAULT_COUNTS_PER_STEP: u64 = 18_000;
pub const DEFAULT_MC_REPS: usize = 1000;
pub const DEFAULT_VISIBILITY: f64 = 0.998;
/// Generator used for every draw. Repetition `r` reads stream `r` of a
/// generator seeded with `seed_from_u64(seed)`.
pub const RNG_ALGORITHM: &str = "ChaCha8Rng (rand_chacha 0.9), seed_from_u64(seed), stream = repetition index";

const TRACE_TOL: f64 = 1e-8;
// reps aggregated per parallel block; bounds memory without changing results
const REP_BLOCK: usize = 64;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmulationConfig {
    pub walk: WalkConfig,
    pub counts_per_step: u64,
    pub mc_reps: usize,
    pub visibility: f64,
    pub seed: u64,
}

impl EmulationConfig {
    pub fn new(walk: WalkConfig, seed: u64) -> Self {
        Self {
            walk,
            counts_per_step: DEFAULT_COUNTS_PER_STEP,
            mc_reps: DEFAULT_MC_REPS,
            visibility: DEFAULT_VISIBILITY,
            seed,
        }
    }

    pub fn validate(&self) -> Result<(), EmulateError> {
        if !(0.0..=1.0).contains(&self.visibility) {
            return Err(EmulateError::Visibility(self.visibility));
        }
        if self.counts_per_step == 0 {
            return Err(EmulateError::NonPositive("counts per step"));
        }
        if self.mc_reps == 0 {
            return Err(EmulateError::NonPositive("Monte Carlo repetitions"));
        }
        self.walk.validate()?;
        Ok(())
    }
}

/// Mixed walker+coin state over a contiguous window of sites, indexed like
/// [`PureState`]: `2·(site − offset) + coin`.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityState {
    offset: i64,
    rho: DMatrix<Complex64>,
}

impl DensityState {
    pub fn pure(state: &PureState) -> Self {
        let v: Vec<Complex64> = state.rows().iter().flat_map(|r| [r[0], r[1]]).collect();
        let n = v.len();
        let rho = DMatrix::from_fn(n, n, |i, j| v[i] * v[j].conj());
        Self {
            offset: state.offset(),
            rho,
        }
    }

    pub fn offset(&self) -> i64 {
        self.offset
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.rho
    }

    pub fn trace(&self) -> f64 {
        self.rho.diagonal().iter().map(|z| z.re).sum()
    }

    pub fn hermiticity_error(&self) -> f64 {
        let n = self.rho.nrows();
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in i..n {
                worst = worst.max((self.rho[(i, j)] - self.rho[(j, i)].conj()).norm());
            }
        }
        worst
    }

    pub fn min_eigenvalue(&self) -> f64 {
        SymmetricEigen::new(self.rho.clone())
            .eigenvalues
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min)
    }

    pub fn position_distribution(&self) -> Distribution {
        let probs = (0..self.rho.nrows() / 2)
            .map(|i| (self.rho[(2 * i, 2 * i)].re + self.rho[(2 * i + 1, 2 * i + 1)].re).max(0.0))
            .collect();
        Distribution::from_probs_unchecked(self.offset, probs)
    }

    /// `ρ → U ρ U†`, growing the window by one site on each side.
    fn unitary_step(&self, op: &StepOperator) -> Self {
        let n = self.rho.nrows();
        let m = n + 4;
        let apply = |col: Vec<Complex64>, offset: i64| -> Vec<Complex64> {
            let rows: Vec<[Complex64; 2]> = col.chunks(2).map(|c| [c[0], c[1]]).collect();
            let (_, out) = op.apply_rows(offset, &rows);
            out.into_iter().flat_map(|r| r).collect()
        };
        // A = U ρ, column by column
        let mut a = DMatrix::zeros(m, n);
        for j in 0..n {
            let col = apply(self.rho.column(j).iter().copied().collect(), self.offset);
            a.column_mut(j).copy_from_slice(&col);
        }
        // B = U A†, then U ρ U† = B†
        let a_dag = a.adjoint();
        let mut b = DMatrix::zeros(m, m);
        for j in 0..m {
            let col = apply(a_dag.column(j).iter().copied().collect(), self.offset);
            b.column_mut(j).copy_from_slice(&col);
        }
        Self {
            offset: self.offset - 1,
            rho: b.adjoint(),
        }
    }

    /// Scales every `H`–`V` coherence by `visibility`.
    pub fn dephase(&mut self, visibility: f64) {
        let n = self.rho.nrows();
        for j in 0..n {
            for i in 0..n {
                if i % 2 != j % 2 {
                    self.rho[(i, j)] *= visibility;
                }
            }
        }
    }
}

/// Density states after steps `0..=steps`, always via the density-matrix
/// route (no shortcut at `v = 1`).
pub fn evolve_density(walk: &WalkConfig, visibility: f64) -> Result<Vec<DensityState>, EmulateError> {
    if !(0.0..=1.0).contains(&visibility) {
        return Err(EmulateError::Visibility(visibility));
    }
    walk.validate()?;
    let op = StepOperator::new(walk.coin, walk.defect.as_ref());
    let mut rho = DensityState::pure(&make_initial(walk.initial_site, walk.initial_coin));
    let mut out = Vec::with_capacity(walk.steps + 1);
    out.push(rho.clone());
    for step in 1..=walk.steps {
        rho = rho.unitary_step(&op);
        rho.dephase(visibility);
        let trace = rho.trace();
        if (trace - 1.0).abs() > TRACE_TOL {
            return Err(EmulateError::TraceDrift { step, trace });
        }
        out.push(rho.clone());
    }
    Ok(out)
}

/// Per-step position distributions under finite visibility. At `v = 1` the
/// pure-state engine is used directly, so the output is bit-identical to
/// [`evolve`].
pub fn evolve_with_visibility(config: &EmulationConfig) -> Result<Vec<Distribution>, EmulateError> {
    config.validate()?;
    if config.visibility == 1.0 {
        return Ok(evolve(&config.walk)?.distributions);
    }
    Ok(evolve_density(&config.walk, config.visibility)?
        .iter()
        .map(DensityState::position_distribution)
        .collect())
}

/// One multinomial draw of `n` counts over the sites of `dist`, as a chain of
/// conditional binomials.
pub fn sample_counts_with<R: Rng + ?Sized>(dist: &Distribution, n: u64, rng: &mut R) -> Vec<u64> {
    let probs = dist.probs();
    let mut counts = vec![0u64; probs.len()];
    let Some(last) = probs.iter().rposition(|&p| p > 0.0) else {
        return counts;
    };
    let mut remaining = n;
    let mut mass_left = 1.0;
    for (i, &p) in probs.iter().enumerate().take(last) {
        if remaining == 0 {
            break;
        }
        if p > 0.0 {
            let q = (p / mass_left).clamp(0.0, 1.0);
            let k = Binomial::new(remaining, q)
                .expect("probability clamped into [0, 1]")
                .sample(rng);
            counts[i] = k;
            remaining -= k;
        }
        mass_left -= p;
    }
    counts[last] += remaining;
    counts
}

/// Multinomial draw with a fresh generator seeded from `seed` (stream 0).
pub fn sample_counts(dist: &Distribution, n: u64, seed: u64) -> Vec<u64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    sample_counts_with(dist, n, &mut rng)
}

fn rep_rng(seed: u64, rep: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(rep as u64);
    rng
}

/// Count-based estimates for one step.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepEstimate {
    pub step: usize,
    pub offset: i64,
    /// Counts of the first repetition, the emulated "measured" data.
    pub counts: Vec<u64>,
    /// Ideal (unit-visibility) distribution.
    pub theory: Distribution,
    /// Distribution the counts are drawn from.
    pub model: Distribution,
    pub prob_mean: Vec<f64>,
    pub prob_std: Option<Vec<f64>>,
    pub variance_mean: f64,
    pub variance_std: Option<f64>,
    pub recurrence_mean: f64,
    pub recurrence_std: Option<f64>,
    /// Distance between count-estimated and ideal distributions.
    pub tv_mean: f64,
    pub tv_std: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CountTable {
    pub seed: u64,
    pub rng_algorithm: String,
    pub counts_per_step: u64,
    pub mc_reps: usize,
    pub visibility: f64,
    pub recurrence_site: i64,
    pub steps: Vec<StepEstimate>,
    /// Per-repetition distance to the ideal distribution at the final step.
    pub final_tv_samples: Vec<f64>,
}

impl CountTable {
    pub fn final_step(&self) -> &StepEstimate {
        self.steps.last().expect("table includes step 0")
    }
}

struct RepSample {
    probs: Vec<Vec<f64>>,
    counts: Vec<Vec<u64>>,
    variance: Vec<f64>,
    recurrence: Vec<f64>,
    tv: Vec<f64>,
}

#[derive(Clone)]
struct Moments {
    sum: f64,
    sum_sq: f64,
}

impl Moments {
    fn new() -> Self {
        Self { sum: 0.0, sum_sq: 0.0 }
    }

    fn push(&mut self, x: f64) {
        self.sum += x;
        self.sum_sq += x * x;
    }

    fn mean(&self, n: usize) -> f64 {
        self.sum / n as f64
    }

    /// Sample standard deviation; absent for a single repetition.
    fn std(&self, n: usize) -> Option<f64> {
        (n > 1).then(|| {
            let mean = self.mean(n);
            ((self.sum_sq - n as f64 * mean * mean) / (n as f64 - 1.0))
                .max(0.0)
                .sqrt()
        })
    }
}

/// Repeats the count sampling `mc_reps` times per step and reports means and
/// standard deviations of `P(x)`, `σ²`, the recurrence probability and the
/// distance to the ideal distribution.
pub fn estimate_with_errors(config: &EmulationConfig) -> Result<CountTable, EmulateError> {
    config.validate()?;
    let model = evolve_with_visibility(config)?;
    let ideal = evolve(&config.walk)?;
    let site = config.walk.recurrence_site();
    let n = config.counts_per_step;

    let draw = |rep: usize| -> Result<RepSample, WalkError> {
        let mut rng = rep_rng(config.seed, rep);
        let mut sample = RepSample {
            probs: Vec::with_capacity(model.len()),
            counts: Vec::with_capacity(model.len()),
            variance: Vec::with_capacity(model.len()),
            recurrence: Vec::with_capacity(model.len()),
            tv: Vec::with_capacity(model.len()),
        };
        for (dist, theory) in model.iter().zip(&ideal.distributions) {
            let counts = sample_counts_with(dist, n, &mut rng);
            let weights: Vec<f64> = counts.iter().map(|&c| c as f64).collect();
            let est = Distribution::from_weights(dist.offset(), &weights)?;
            sample.variance.push(variance(&est));
            sample.recurrence.push(est.prob(site));
            sample.tv.push(tv_distance(&est, theory));
            sample.probs.push(est.probs().to_vec());
            sample.counts.push(counts);
        }
        Ok(sample)
    };

    let steps = model.len();
    let mut prob_m: Vec<Vec<Moments>> = model
        .iter()
        .map(|d| vec![Moments::new(); d.probs().len()])
        .collect();
    let mut var_m = vec![Moments::new(); steps];
    let mut rec_m = vec![Moments::new(); steps];
    let mut tv_m = vec![Moments::new(); steps];
    let mut first_counts: Vec<Vec<u64>> = Vec::new();
    let mut final_tv = Vec::with_capacity(config.mc_reps);

    for block_start in (0..config.mc_reps).step_by(REP_BLOCK) {
        let block_end = (block_start + REP_BLOCK).min(config.mc_reps);
        let samples: Vec<RepSample> = (block_start..block_end)
            .into_par_iter()
            .map(draw)
            .collect::<Result<_, _>>()?;
        for mut s in samples {
            for t in 0..steps {
                for (m, &p) in prob_m[t].iter_mut().zip(&s.probs[t]) {
                    m.push(p);
                }
                var_m[t].push(s.variance[t]);
                rec_m[t].push(s.recurrence[t]);
                tv_m[t].push(s.tv[t]);
            }
            final_tv.push(*s.tv.last().expect("at least step 0"));
            if first_counts.is_empty() {
                first_counts = std::mem::take(&mut s.counts);
            }
        }
    }

    let reps = config.mc_reps;
    let estimates = (0..steps)
        .map(|t| StepEstimate {
            step: t,
            offset: model[t].offset(),
            counts: first_counts[t].clone(),
            theory: ideal.distributions[t].clone(),
            model: model[t].clone(),
            prob_mean: prob_m[t].iter().map(|m| m.mean(reps)).collect(),
            prob_std: (reps > 1).then(|| prob_m[t].iter().filter_map(|m| m.std(reps)).collect()),
            variance_mean: var_m[t].mean(reps),
            variance_std: var_m[t].std(reps),
            recurrence_mean: rec_m[t].mean(reps),
            recurrence_std: rec_m[t].std(reps),
            tv_mean: tv_m[t].mean(reps),
            tv_std: tv_m[t].std(reps),
        })
        .collect();

    Ok(CountTable {
        seed: config.seed,
        rng_algorithm: RNG_ALGORITHM.to_string(),
        counts_per_step: n,
        mc_reps: reps,
        visibility: config.visibility,
        recurrence_site: site,
        steps: estimates,
        final_tv_samples: final_tv,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classical::{rw_distribution, RwSpec};
    use crate::coin::{CoinAngle, CoinState};
    use crate::config::DefectSpec;

    fn localized_walk(steps: usize) -> WalkConfig {
        WalkConfig::new(steps, CoinAngle::HADAMARD).with_defect(DefectSpec::new(0, 180.0).unwrap())
    }

    #[test]
    fn unit_visibility_is_bit_identical() {
        let mut cfg = EmulationConfig::new(localized_walk(10), 1);
        cfg.visibility = 1.0;
        let got = evolve_with_visibility(&cfg).unwrap();
        assert_eq!(got, evolve(&cfg.walk).unwrap().distributions);
    }

    #[test]
    fn density_route_matches_pure_route() {
        let walk = localized_walk(10);
        let states = evolve_density(&walk, 1.0).unwrap();
        let pure = evolve(&walk).unwrap();
        for (rho, dist) in states.iter().zip(&pure.distributions) {
            let d = rho.position_distribution();
            assert_eq!(d.offset(), dist.offset());
            for (a, b) in d.probs().iter().zip(dist.probs()) {
                assert!((a - b).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn full_dephasing_is_classical_diffusion() {
        let walk = WalkConfig::new(10, CoinAngle::HADAMARD);
        let states = evolve_density(&walk, 0.0).unwrap();
        for (t, rho) in states.iter().enumerate() {
            let d = rho.position_distribution();
            assert!((variance(&d) - t as f64).abs() < 1e-8);
            let rw = rw_distribution(&RwSpec::fair(t));
            assert!(tv_distance(&d, &rw) < 1e-12);
        }
    }

    #[test]
    fn channel_keeps_trace_and_positivity() {
        for v in [0.0, 0.3, 0.998] {
            let walk = localized_walk(6).with_initial(1, CoinState::minus());
            for rho in evolve_density(&walk, v).unwrap() {
                assert!((rho.trace() - 1.0).abs() < 1e-10);
                assert!(rho.hermiticity_error() < 1e-12);
                assert!(rho.min_eigenvalue() > -1e-10);
            }
        }
    }

    #[test]
    fn high_visibility_recurrence_stays_near_ideal() {
        let cfg = EmulationConfig::new(localized_walk(10), 0);
        let dists = evolve_with_visibility(&cfg).unwrap();
        let p0 = dists.last().unwrap().prob(0);
        // ideal 0.664, measured about 0.64
        assert!((0.62..0.67).contains(&p0), "{p0}");
    }

    #[test]
    fn invalid_configs() {
        let mut cfg = EmulationConfig::new(localized_walk(3), 0);
        cfg.visibility = 1.5;
        assert_eq!(cfg.validate(), Err(EmulateError::Visibility(1.5)));
        cfg.visibility = 0.9;
        cfg.mc_reps = 0;
        assert!(cfg.validate().is_err());
        cfg.mc_reps = 3;
        cfg.counts_per_step = 0;
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn point_mass_sampling() {
        let counts = sample_counts(&Distribution::point_mass(4), 100, 9);
        assert_eq!(counts, vec![100]);
        let d = Distribution::new(-2, vec![0.0, 0.0, 1.0, 0.0]).unwrap();
        assert_eq!(sample_counts(&d, 100, 3), vec![0, 0, 100, 0]);
    }

    #[test]
    fn fair_coin_fraction_converges() {
        let d = Distribution::new(0, vec![0.5, 0.5]).unwrap();
        for (n, seed) in [(10_000u64, 1u64), (1_000_000, 2)] {
            let c = sample_counts(&d, n, seed);
            assert_eq!(c.iter().sum::<u64>(), n);
            let frac = c[0] as f64 / n as f64;
            // five standard errors
            assert!((frac - 0.5).abs() < 5.0 * 0.5 / (n as f64).sqrt());
        }
    }

    #[test]
    fn sampling_is_seed_deterministic() {
        let d = evolve(&localized_walk(10)).unwrap().final_distribution().clone();
        assert_eq!(sample_counts(&d, 18_000, 5), sample_counts(&d, 18_000, 5));
        assert_ne!(sample_counts(&d, 18_000, 5), sample_counts(&d, 18_000, 6));
    }

    #[test]
    fn single_rep_has_no_error_bars() {
        let mut cfg = EmulationConfig::new(localized_walk(4), 7);
        cfg.mc_reps = 1;
        let table = estimate_with_errors(&cfg).unwrap();
        for s in &table.steps {
            assert!(s.prob_std.is_none() && s.variance_std.is_none());
            assert!(s.recurrence_std.is_none() && s.tv_std.is_none());
            assert_eq!(s.counts.iter().sum::<u64>(), cfg.counts_per_step);
        }
    }

    #[test]
    fn huge_counts_recover_exact_values() {
        let mut cfg = EmulationConfig::new(localized_walk(10), 11);
        cfg.visibility = 1.0;
        cfg.counts_per_step = 100_000_000;
        cfg.mc_reps = 64;
        let table = estimate_with_errors(&cfg).unwrap();
        let exact = evolve(&cfg.walk).unwrap();
        for (s, d) in table.steps.iter().zip(&exact.distributions) {
            assert!((s.variance_mean - variance(d)).abs() < 1e-3);
            assert!((s.recurrence_mean - d.prob(0)).abs() < 1e-3);
            for (m, p) in s.prob_mean.iter().zip(d.probs()) {
                assert!((m - p).abs() < 1e-3);
            }
        }
    }

    #[test]
    fn table_is_deterministic() {
        let mut cfg = EmulationConfig::new(localized_walk(6), 42);
        cfg.mc_reps = 150;
        let a = estimate_with_errors(&cfg).unwrap();
        let b = estimate_with_errors(&cfg).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.final_tv_samples.len(), 150);
    }
}
