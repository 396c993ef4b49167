//! Numerical and analytic characterization of the Chua memristor system
//!
//! ```text
//! x' = alpha (m0 - 1) x + alpha y - alpha m1 x^3 + alpha x0
//! y' = x - y + z
//! z' = beta y - gamma z
//! ```
//!
//! Finite-time Lyapunov exponents and Kaplan-Yorke dimensions are computed
//! from the variational equation ([`variational`], [`lyapunov`]); the
//! eigenvalues of the symmetrized Jacobian give dimension bounds and
//! convergence certificates ([`analytic`]); [`attractors`] probes
//! equilibrium neighborhoods to tell self-excited from hidden attractors.

pub mod analytic;
pub mod attractors;
pub mod error;
pub mod linalg3;
pub mod lyapunov;
pub mod model;
pub mod ode;
pub mod spectrum;
pub mod variational;

pub use analytic::{AnalyticReport, CertificateConfig, CertificateOutcome, Convergence, ConvergenceVerdict};
pub use attractors::{ClassificationConfig, ClassificationVerdict, ProbeOutcome, Verdict};
pub use error::{Error, Result};
pub use linalg3::{Matrix3, SymmetricSpectrum};
pub use lyapunov::{kaplan_yorke, AttractorSample, DimensionReport, SamplingConfig};
pub use model::{Equilibrium, EquilibriumLabel, Parameters, StateVector, System3};
pub use ode::{IntegratorConfig, Method, Trajectory};
pub use spectrum::{Exponents, OrderedExponents};
pub use variational::{FiniteTimeSpectrum, Route};

/// Version string embedded in reports.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
