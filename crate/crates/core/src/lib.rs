//! Non-Gaussian component analysis.
//!
//! The centerpiece is [`lsngca`], which identifies the non-Gaussian index
//! space of a data set from least-squares estimates of the log-density
//! gradient ([`lsldg`]) followed by a single eigendecomposition. The
//! [`mipp`] and [`imak`] modules implement the two classic baselines,
//! [`dataset`] provides the synthetic benchmark generators and whitening,
//! and [`metrics`] scores estimated subspaces against a reference.
//!
//! All numerical code is generic over a [`Real`] scalar (`f32` or `f64`).
//! The `*64` / `*32` aliases below name the common instantiations.

pub mod dataset;
pub mod error;
pub mod imak;
pub mod linalg;
pub mod lsldg;
pub mod lsngca;
pub mod metrics;
pub mod mipp;
pub mod scalar;
pub mod subspace;

pub use dataset::{DataMatrix, GeneratorKind, SignalMatrix, Whitening};
pub use error::{NgcaError, Result};
pub use lsldg::{BasisSet, GradientModel, LsldgConfig, MomentPair};
pub use lsngca::{GammaMatrix, LsngcaConfig};
pub use metrics::SubspacePair;
pub use mipp::{BetaVector, IndexFunction, MippConfig, Profile};
pub use imak::{AlphaSolution, ImakConfig, ImakOutcome, KernelState};


pub use scalar::Real;
pub use subspace::{Frame, Subspace};

pub type DataMatrix64 = DataMatrix<f64>;
pub type DataMatrix32 = DataMatrix<f32>;
pub type SignalMatrix64 = SignalMatrix<f64>;
pub type Whitening64 = Whitening<f64>;
pub type Whitening32 = Whitening<f32>;
pub type GradientModel64 = GradientModel<f64>;
pub type GradientModel32 = GradientModel<f32>;
pub type Subspace64 = Subspace<f64>;
pub type Subspace32 = Subspace<f32>;
pub type GammaMatrix64 = GammaMatrix<f64>;
