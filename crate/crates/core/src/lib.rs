//! Discrete-time coined quantum walks on the line with a single-point phase
//! defect.
//!
//! The step operator is `U = (S_φn ⊗ |H⟩⟨H| + S†_φn ⊗ |V⟩⟨V|)(1 ⊗ C(θ))`:
//! the coin `C(θ)` acts first, then the `H` component moves one site left and
//! the `V` component one site right. Amplitudes departing the defect site `n`
//! pick up `e^{iφ}` regardless of their coin direction.
//!
//! - [`coin`], [`state`], [`config`]: domain types and initial states.
//! - [`walk`]: exact state-vector evolution and observables.
//! - [`spectral`]: eigenstates of the step operator on a periodic lattice.
//! - [`classical`]: random-walk baseline and the diabatic probability.
//! - [`emulate`]: finite-visibility evolution and photon-count statistics.

pub mod classical;
pub mod coin;
pub mod config;
pub mod distribution;
pub mod emulate;
pub mod error;
pub mod spectral;
pub mod state;
pub mod walk;

pub use coin::{coin_matrix, CoinAngle, CoinState};
pub use config::{DefectSpec, WalkConfig, DEFAULT_STEP_BUDGET};
pub use distribution::{tv_distance, variance, Distribution};
pub use error::{EmulateError, SpectralError, WalkError};
pub use state::{make_initial, PureState};

pub use num_complex::Complex64;
