use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum WalkError {
    #[error("coin angle {0}° outside [0°, 45°]")]
    CoinAngle(f64),
    #[error("non-finite value for {0}")]
    NonFinite(&'static str),
    #[error("coin state not normalized: |h|²+|v|² = {0}")]
    CoinNorm(f64),
    #[error("coin state has zero norm")]
    ZeroCoin,
    #[error("state norm {0} deviates from 1")]
    StateNorm(f64),
    #[error("invalid distribution: {0}")]
    Distribution(String),
    #[error("{steps} steps exceeds the step budget of {budget}")]
    StepBudget { steps: usize, budget: usize },
    #[error("phase sweep requires a defect on the base configuration")]
    MissingDefect,
    #[error("parameter grid is empty")]
    EmptyGrid,
    #[error("random-walk bias {0} outside [0, 1]")]
    Bias(f64),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpectralError {
    #[error("lattice size {0} must be odd and at least {min}", min = crate::spectral::MIN_SITES)]
    LatticeSize(usize),
    #[error("matrix is not unitary: max |U†U - I| = {0:e}")]
    NotUnitary(f64),
    #[error("eigenroutine did not converge (worst residual {residual:e})")]
    NonConvergence { residual: f64 },
    #[error("initial state at site {site} is {distance} sites from the lattice seam, need at least {required}")]
    BoundaryProximity {
        site: i64,
        distance: i64,
        required: i64,
    },
    #[error("parameter grid is empty")]
    EmptyGrid,
    #[error(transparent)]
    Walk(#[from] WalkError),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EmulateError {
    #[error("visibility {0} outside [0, 1]")]
    Visibility(f64),
    #[error("{0} must be positive")]
    NonPositive(&'static str),
    #[error("trace drifted to {trace} at step {step}")]
    TraceDrift { step: usize, trace: f64 },
    #[error(transparent)]
    Walk(#[from] WalkError),
}
