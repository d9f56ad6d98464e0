//! Online kernel regression with the Azoury-Warmuth-Vovk forecaster and its
//! projected variants.
//!
//! * [`exact::ExactKawv`] solves the dual problem from scratch each round.
//! * [`taylor::TaylorForecaster`] runs the linear recursion of [`awv`] on a
//!   fixed Taylor basis of the Gaussian kernel.
//! * [`nystrom::NystromForecaster`] projects onto the span of a dictionary
//!   grown by leverage-score sampling.
//! * [`fogd::FogdForecaster`] is the random-feature gradient descent baseline.
//!
//! All of them implement [`Forecaster`]; [`harness`] drives them over
//! datasets and measures regret.

pub mod awv;
pub mod error;
pub mod exact;
pub mod fogd;
pub mod forecaster;
pub mod harness;
pub mod kernel;
pub mod linalg;
pub mod nystrom;
pub mod taylor;

pub use error::{Error, Result};
pub use forecaster::Forecaster;
pub use kernel::{effective_dimension, spectral_regret_bound, GramMatrix, KernelSpec};
