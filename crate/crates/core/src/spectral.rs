//! Eigenstates of the one-step operator on a finite periodic lattice, and the
//! weight of an initial state on the localized ones.
//!
//! The lattice is centered on the defect: sites `n − h ..= n + h` with
//! `h = (L − 1)/2`, closed periodically. Vector index of `(site, coin)` is
//! `2·(site − first_site) + coin`.

use nalgebra::{linalg::Schur, DMatrix, DVector};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::coin::{coin_matrix, CoinAngle};
use crate::config::DefectSpec;
use crate::error::SpectralError;
use crate::state::PureState;

pub const MIN_SITES: usize = 33;
pub const DEFAULT_SITES: usize = 129;

const UNITARITY_TOL: f64 = 1e-8;
const RESIDUAL_TOL: f64 = 1e-8;
const DEGENERACY_TOL: f64 = 1e-10;
/// Phase-sweep points this close (degrees) to 45° or 135° are flagged.
const BOUNDARY_WINDOW_DEG: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LatticeSpec {
    num_sites: usize,
    coin: CoinAngle,
    defect: DefectSpec,
}

impl LatticeSpec {
    pub fn new(num_sites: usize, coin: CoinAngle, defect: DefectSpec) -> Result<Self, SpectralError> {
        if num_sites < MIN_SITES || num_sites % 2 == 0 {
            return Err(SpectralError::LatticeSize(num_sites));
        }
        Ok(Self {
            num_sites,
            coin,
            defect,
        })
    }

    pub fn num_sites(&self) -> usize {
        self.num_sites
    }

    pub fn coin(&self) -> CoinAngle {
        self.coin
    }

    pub fn defect(&self) -> DefectSpec {
        self.defect
    }

    pub fn dim(&self) -> usize {
        2 * self.num_sites
    }

    pub fn half_width(&self) -> i64 {
        (self.num_sites as i64 - 1) / 2
    }

    pub fn first_site(&self) -> i64 {
        self.defect.site() - self.half_width()
    }

    pub fn last_site(&self) -> i64 {
        self.defect.site() + self.half_width()
    }

    pub fn with_coin(&self, coin: CoinAngle) -> Self {
        Self { coin, ..*self }
    }

    pub fn with_defect(&self, defect: DefectSpec) -> Self {
        Self { defect, ..*self }
    }

    /// Same parameters on `2L + 1` sites.
    pub fn doubled(&self) -> Self {
        Self {
            num_sites: 2 * self.num_sites + 1,
            ..*self
        }
    }

    /// Vector index of `(site, coin)`, or `None` outside the window.
    pub fn index(&self, site: i64, coin: usize) -> Option<usize> {
        (self.first_site()..=self.last_site())
            .contains(&site)
            .then(|| 2 * (site - self.first_site()) as usize + coin)
    }

    /// Sites between `site` and the nearer edge of the window.
    pub fn seam_distance(&self, site: i64) -> i64 {
        (site - self.first_site()).min(self.last_site() - site)
    }

    /// Minimum seam distance for a state to count as far from the boundary.
    pub fn required_clearance(&self) -> i64 {
        self.num_sites as i64 / 4
    }

    /// Copies `state` onto the lattice. Every site carrying amplitude must be
    /// at least `L/4` sites from the seam.
    pub fn embed(&self, state: &PureState) -> Result<DVector<Complex64>, SpectralError> {
        let mut v = DVector::zeros(self.dim());
        for (site, row) in state.sites().zip(state.rows()) {
            if row[0].norm_sqr() == 0.0 && row[1].norm_sqr() == 0.0 {
                continue;
            }
            let distance = self.seam_distance(site);
            if distance < self.required_clearance() {
                return Err(SpectralError::BoundaryProximity {
                    site,
                    distance,
                    required: self.required_clearance(),
                });
            }
            let i = self.index(site, 0).expect("site inside window");
            v[i] = row[0];
            v[i + 1] = row[1];
        }
        Ok(v)
    }

    /// Reads a lattice vector back as walker+coin rows over the window.
    pub fn rows(&self, v: &DVector<Complex64>) -> Vec<[Complex64; 2]> {
        v.as_slice().chunks(2).map(|c| [c[0], c[1]]).collect()
    }

    /// Position marginal `P(x)` of a lattice vector, indexed from `first_site`.
    pub fn marginal(&self, v: &[Complex64]) -> Vec<f64> {
        v.chunks(2).map(|c| c[0].norm_sqr() + c[1].norm_sqr()).collect()
    }
}

/// Step operator `U` on the periodic lattice as a dense `2L × 2L` matrix.
pub fn build_step_unitary(spec: &LatticeSpec) -> DMatrix<Complex64> {
    let l = spec.num_sites;
    let dim = spec.dim();
    let coin = coin_matrix(spec.coin);
    let defect_index = (spec.defect.site() - spec.first_site()) as usize;
    let phase = spec.defect.phase_factor();

    let mut u = DMatrix::zeros(dim, dim);
    for i in 0..l {
        let factor = if i == defect_index {
            phase
        } else {
            Complex64::new(1.0, 0.0)
        };
        let left = (i + l - 1) % l;
        let right = (i + 1) % l;
        for c_in in 0..2 {
            let col = 2 * i + c_in;
            // coin out H moves left, V moves right
            u[(2 * left, col)] = factor * coin[0][c_in];
            u[(2 * right + 1, col)] = factor * coin[1][c_in];
        }
    }
    u
}

/// Full eigensystem of a unitary matrix; eigenvectors are the columns of
/// `eigenvectors` and are orthonormal.
#[derive(Debug, Clone)]
pub struct Eigensystem {
    pub eigenvalues: Vec<Complex64>,
    pub eigenvectors: DMatrix<Complex64>,
    /// Largest `‖U v − λ v‖` over all pairs.
    pub max_residual: f64,
}

pub fn unitarity_error(u: &DMatrix<Complex64>) -> f64 {
    let n = u.nrows();
    let prod = u.adjoint() * u;
    let mut worst: f64 = 0.0;
    for i in 0..n {
        for j in 0..n {
            let target = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((prod[(i, j)] - target).norm());
        }
    }
    worst
}

/// Diagonalizes a unitary matrix through its complex Schur form. For a normal
/// matrix the triangular factor is diagonal and the Schur vectors are
/// eigenvectors, which keeps degenerate eigenspaces orthonormal.
pub fn eigendecompose(u: &DMatrix<Complex64>) -> Result<Eigensystem, SpectralError> {
    if !u.is_square() {
        return Err(SpectralError::NotUnitary(f64::INFINITY));
    }
    let err = unitarity_error(u);
    if err > UNITARITY_TOL {
        return Err(SpectralError::NotUnitary(err));
    }
    let n = u.nrows();
    let schur = Schur::try_new(u.clone(), f64::EPSILON, 1000 * n.max(1)).ok_or(
        SpectralError::NonConvergence {
            residual: f64::INFINITY,
        },
    )?;
    let (q, t) = schur.unpack();
    let eigenvalues: Vec<Complex64> = (0..n).map(|k| t[(k, k)]).collect();

    let uq = u * &q;
    let mut max_residual: f64 = 0.0;
    for (k, &lambda) in eigenvalues.iter().enumerate() {
        let r = (uq.column(k) - q.column(k) * lambda).norm();
        max_residual = max_residual.max(r);
    }
    if !(max_residual <= RESIDUAL_TOL) {
        return Err(SpectralError::NonConvergence {
            residual: max_residual,
        });
    }
    Ok(Eigensystem {
        eigenvalues,
        eigenvectors: q,
        max_residual,
    })
}

/// Probability mass within `radius` sites of the defect required to call an
/// eigenvector localized.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LocalizationCriterion {
    pub radius: usize,
    pub mass_threshold: f64,
}

impl Default for LocalizationCriterion {
    fn default() -> Self {
        Self {
            radius: 10,
            mass_threshold: 0.99,
        }
    }
}

/// Position-marginal mass of `vec` within `radius` of the defect site.
pub fn mass_near_defect(spec: &LatticeSpec, vec: &[Complex64], radius: usize) -> f64 {
    let marginal = spec.marginal(vec);
    let center = spec.half_width() as usize;
    let lo = center.saturating_sub(radius);
    let hi = (center + radius).min(marginal.len() - 1);
    marginal[lo..=hi].iter().sum()
}

pub fn classify_localized(
    spec: &LatticeSpec,
    vec: &[Complex64],
    criterion: &LocalizationCriterion,
) -> bool {
    mass_near_defect(spec, vec, criterion.radius) >= criterion.mass_threshold
}

/// Inverse participation ratio `Σ_x P(x)²` of the position marginal.
pub fn inverse_participation(spec: &LatticeSpec, vec: &[Complex64]) -> f64 {
    spec.marginal(vec).iter().map(|p| p * p).sum()
}

#[derive(Debug, Clone)]
pub struct SpectralReport {
    pub lattice: LatticeSpec,
    pub criterion: LocalizationCriterion,
    pub eigenvalues: Vec<Complex64>,
    pub eigenvectors: DMatrix<Complex64>,
    pub localized: Vec<bool>,
    pub mass_near_defect: Vec<f64>,
    pub ipr: Vec<f64>,
    /// `|⟨v_k|ψ₀⟩|²` for every eigenvector.
    pub weights: Vec<f64>,
    /// Sum of `weights` over localized eigenvectors.
    pub overlap: f64,
    /// Two localized eigenvalues coincide within 1e-10.
    pub degenerate_localized: bool,
    pub max_residual: f64,
}

impl SpectralReport {
    pub fn localized_count(&self) -> usize {
        self.localized.iter().filter(|&&b| b).count()
    }

    pub fn localized_eigenvalues(&self) -> Vec<Complex64> {
        self.eigenvalues
            .iter()
            .zip(&self.localized)
            .filter(|(_, &loc)| loc)
            .map(|(&l, _)| l)
            .collect()
    }
}

/// Eigendecomposes the lattice step operator, classifies every eigenvector and
/// projects `initial` onto the localized subspace.
pub fn analyze(
    spec: &LatticeSpec,
    initial: &PureState,
    criterion: &LocalizationCriterion,
) -> Result<SpectralReport, SpectralError> {
    let psi = spec.embed(initial)?;
    let eig = eigendecompose(&build_step_unitary(spec))?;
    let n = eig.eigenvalues.len();

    let mut mass = Vec::with_capacity(n);
    let mut ipr = Vec::with_capacity(n);
    let mut weights = Vec::with_capacity(n);
    for k in 0..n {
        let col: Vec<Complex64> = eig.eigenvectors.column(k).iter().copied().collect();
        mass.push(mass_near_defect(spec, &col, criterion.radius));
        ipr.push(inverse_participation(spec, &col));
        weights.push(eig.eigenvectors.column(k).dotc(&psi).norm_sqr());
    }
    let localized: Vec<bool> = mass.iter().map(|&m| m >= criterion.mass_threshold).collect();
    let overlap: f64 = weights
        .iter()
        .zip(&localized)
        .filter(|(_, &loc)| loc)
        .map(|(w, _)| w)
        .sum();

    let loc_vals: Vec<Complex64> = (0..n)
        .filter(|&k| localized[k])
        .map(|k| eig.eigenvalues[k])
        .collect();
    let degenerate_localized = loc_vals.iter().enumerate().any(|(i, a)| {
        loc_vals[i + 1..]
            .iter()
            .any(|b| (a - b).norm() < DEGENERACY_TOL)
    });

    Ok(SpectralReport {
        lattice: *spec,
        criterion: *criterion,
        eigenvalues: eig.eigenvalues,
        eigenvectors: eig.eigenvectors,
        localized,
        mass_near_defect: mass,
        ipr,
        weights,
        overlap: overlap.min(1.0),
        degenerate_localized,
        max_residual: eig.max_residual,
    })
}

/// Overlap of `initial` with the localized eigenstates under the default
/// criterion (radius 10, mass 0.99).
pub fn overlap(spec: &LatticeSpec, initial: &PureState) -> Result<f64, SpectralError> {
    Ok(analyze(spec, initial, &LocalizationCriterion::default())?.overlap)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OverlapRow {
    pub parameter_deg: f64,
    pub overlap: f64,
    pub localized_count: usize,
    pub degenerate: bool,
    /// Phase within half a degree of 45° or 135°, where the number of
    /// localized states is not pinned down.
    pub boundary_point: bool,
}

fn overlap_sweep<F>(
    values: &[f64],
    initial: &PureState,
    criterion: &LocalizationCriterion,
    make: F,
    is_boundary: fn(f64) -> bool,
) -> Result<Vec<OverlapRow>, SpectralError>
where
    F: Fn(f64) -> Result<LatticeSpec, SpectralError> + Sync,
{
    if values.is_empty() {
        return Err(SpectralError::EmptyGrid);
    }
    values
        .par_iter()
        .map(|&value| {
            let report = analyze(&make(value)?, initial, criterion)?;
            Ok(OverlapRow {
                parameter_deg: value,
                overlap: report.overlap,
                localized_count: report.localized_count(),
                degenerate: report.degenerate_localized,
                boundary_point: is_boundary(value),
            })
        })
        .collect()
}

fn near_phase_boundary(phi: f64) -> bool {
    let phi = phi.rem_euclid(360.0);
    [45.0, 135.0, 225.0, 315.0]
        .iter()
        .any(|b| (phi - b).abs() < BOUNDARY_WINDOW_DEG)
}

pub fn sweep_overlap_phase(
    template: &LatticeSpec,
    initial: &PureState,
    phases: &[f64],
    criterion: &LocalizationCriterion,
) -> Result<Vec<OverlapRow>, SpectralError> {
    overlap_sweep(
        phases,
        initial,
        criterion,
        |phi| Ok(template.with_defect(template.defect.with_phase(phi)?)),
        near_phase_boundary,
    )
}

pub fn sweep_overlap_coin(
    template: &LatticeSpec,
    initial: &PureState,
    angles: &[f64],
    criterion: &LocalizationCriterion,
) -> Result<Vec<OverlapRow>, SpectralError> {
    overlap_sweep(
        angles,
        initial,
        criterion,
        |theta| Ok(template.with_coin(CoinAngle::from_degrees(theta)?)),
        |_| false,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coin::CoinState;
    use crate::state::make_initial;
    use crate::walk::{step, StepOperator};
    use std::f64::consts::FRAC_1_SQRT_2;

    fn lattice(theta: f64, phi: f64) -> LatticeSpec {
        LatticeSpec::new(
            DEFAULT_SITES,
            CoinAngle::from_degrees(theta).unwrap(),
            DefectSpec::new(0, phi).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn lattice_size_validation() {
        let pi = DefectSpec::new(0, 180.0).unwrap();
        assert!(LatticeSpec::new(31, CoinAngle::HADAMARD, pi).is_err());
        assert!(LatticeSpec::new(128, CoinAngle::HADAMARD, pi).is_err());
        let spec = LatticeSpec::new(33, CoinAngle::HADAMARD, pi).unwrap();
        assert_eq!((spec.first_site(), spec.last_site()), (-16, 16));
        assert_eq!(spec.doubled().num_sites(), 67);
    }

    #[test]
    fn small_flip_coin_matrix() {
        // below the lattice floor on purpose: build the matrix directly
        let spec = LatticeSpec {
            num_sites: 3,
            coin: CoinAngle::from_degrees(45.0).unwrap(),
            defect: DefectSpec::new(0, 0.0).unwrap(),
        };
        let u = build_step_unitary(&spec);
        assert_eq!(u.shape(), (6, 6));
        for j in 0..6 {
            let nonzero: Vec<_> = (0..6).filter(|&i| u[(i, j)].norm() > 1e-12).collect();
            assert_eq!(nonzero.len(), 1);
            assert!((u[(nonzero[0], j)].norm() - 1.0).abs() < 1e-15);
        }
        // θ = 45° swaps H and V: (site 1, H) -> coin V -> moves right to site 2
        assert!((u[(5, 2)] - Complex64::new(1.0, 0.0)).norm() < 1e-15);
        assert!(unitarity_error(&u) < 1e-15);
    }

    #[test]
    fn unitary_matches_walk_step() {
        let spec = lattice(22.5, 180.0);
        let u = build_step_unitary(&spec);
        assert!(unitarity_error(&u) < 1e-10);
        let op = StepOperator::new(spec.coin(), Some(&spec.defect()));
        let mut state = make_initial(0, CoinState::antisymmetric());
        let mut v = spec.embed(&state).unwrap();
        for _ in 0..10 {
            state = op.apply(&state);
            v = &u * v;
        }
        for (site, row) in state.sites().zip(state.rows()) {
            let i = spec.index(site, 0).unwrap();
            assert!((v[i] - row[0]).norm() < 1e-10);
            assert!((v[i + 1] - row[1]).norm() < 1e-10);
        }
    }

    #[test]
    fn eigendecompose_small_cases() {
        let eye = DMatrix::<Complex64>::identity(5, 5);
        let e = eigendecompose(&eye).unwrap();
        assert!(e.eigenvalues.iter().all(|l| (l - Complex64::new(1.0, 0.0)).norm() < 1e-12));

        let r = Complex64::new(FRAC_1_SQRT_2, 0.0);
        let h = DMatrix::from_row_slice(2, 2, &[r, r, r, -r]);
        let mut vals: Vec<f64> = eigendecompose(&h).unwrap().eigenvalues.iter().map(|l| l.re).collect();
        vals.sort_by(f64::total_cmp);
        assert!((vals[0] + 1.0).abs() < 1e-12 && (vals[1] - 1.0).abs() < 1e-12);

        let bad = DMatrix::from_element(2, 2, Complex64::new(1.0, 0.0));
        assert!(matches!(eigendecompose(&bad), Err(SpectralError::NotUnitary(_))));
    }

    #[test]
    fn eigensystem_invariants() {
        let spec = lattice(22.5, 135.0);
        let eig = eigendecompose(&build_step_unitary(&spec)).unwrap();
        assert!(eig.max_residual <= 1e-8);
        assert!(eig.eigenvalues.iter().all(|l| (l.norm() - 1.0).abs() < 1e-8));
        let gram = eig.eigenvectors.adjoint() * &eig.eigenvectors;
        let n = gram.nrows();
        for i in 0..n {
            for j in 0..n {
                let t = if i == j { 1.0 } else { 0.0 };
                assert!((gram[(i, j)] - t).norm() < 1e-8);
            }
        }
    }

    #[test]
    fn uniform_vector_is_extended() {
        let spec = lattice(22.5, 0.0);
        let amp = Complex64::new((1.0 / spec.dim() as f64).sqrt(), 0.0);
        let v = vec![amp; spec.dim()];
        let mass = mass_near_defect(&spec, &v, 10);
        assert!((mass - 21.0 / 129.0).abs() < 1e-12);
        assert!(!classify_localized(&spec, &v, &LocalizationCriterion::default()));
    }

    #[test]
    fn defect_free_lattice_has_no_localized_states() {
        let report = analyze(
            &lattice(22.5, 0.0),
            &make_initial(0, CoinState::minus()),
            &LocalizationCriterion::default(),
        )
        .unwrap();
        assert_eq!(report.localized_count(), 0);
        assert_eq!(report.overlap, 0.0);
    }

    #[test]
    fn completeness_of_weights() {
        let init = make_initial(3, CoinState::normalized(Complex64::new(0.3, 0.1), Complex64::new(-0.2, 0.7)).unwrap());
        let report = analyze(&lattice(30.0, 100.0), &init, &LocalizationCriterion::default()).unwrap();
        let total: f64 = report.weights.iter().sum();
        assert!((total - 1.0).abs() < 1e-8);
    }

    #[test]
    fn overlap_at_pi_phase() {
        // At φ = 180° the weight is the same for every coin state at the defect.
        let spec = lattice(22.5, 180.0);
        for coin in [CoinState::minus(), CoinState::antisymmetric(), CoinState::horizontal()] {
            let ov = overlap(&spec, &make_initial(0, coin)).unwrap();
            assert!((ov - 0.8).abs() < 1e-8, "{ov}");
        }
    }

    #[test]
    fn boundary_guard() {
        let spec = lattice(22.5, 180.0);
        let far = make_initial(spec.last_site() - 5, CoinState::horizontal());
        assert!(matches!(
            overlap(&spec, &far),
            Err(SpectralError::BoundaryProximity { .. })
        ));
        let edge = make_initial(32, CoinState::horizontal());
        assert!(overlap(&spec, &edge).is_ok());
    }

    #[test]
    fn embed_and_step_round_trip() {
        let spec = lattice(18.0, 60.0);
        let state = step(
            &make_initial(0, CoinState::antisymmetric()),
            spec.coin(),
            Some(&spec.defect()),
        );
        let v = build_step_unitary(&spec) * spec.embed(&make_initial(0, CoinState::antisymmetric())).unwrap();
        let rows = spec.rows(&v);
        for (site, row) in state.sites().zip(state.rows()) {
            let i = (site - spec.first_site()) as usize;
            assert!((rows[i][0] - row[0]).norm() < 1e-14);
            assert!((rows[i][1] - row[1]).norm() < 1e-14);
        }
    }

    #[test]
    fn sweep_rejects_empty_grid() {
        let init = make_initial(0, CoinState::minus());
        assert_eq!(
            sweep_overlap_phase(&lattice(22.5, 0.0), &init, &[], &LocalizationCriterion::default())
                .unwrap_err(),
            SpectralError::EmptyGrid
        );
        assert!(near_phase_boundary(45.2) && near_phase_boundary(-225.0) && !near_phase_boundary(90.0));
    }
}
