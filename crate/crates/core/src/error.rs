use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// The state norm exceeded the configured divergence cutoff.
    #[error("solution diverged (|u| exceeded the blow-up norm) at t = {time}")]
    BlowUp { time: f64 },

    #[error("adaptive step size underflowed at t = {time}")]
    StepUnderflow { time: f64 },

    /// Fundamental matrix entries grew past 1e300; use the QR route instead.
    #[error("fundamental matrix overflowed at t = {time}")]
    Overflow { time: f64 },

    #[error("matrix is not symmetric (relative asymmetry {asymmetry:e})")]
    NotSymmetric { asymmetry: f64 },

    #[error("matrix is numerically singular")]
    Singular,

    #[error("change-of-basis matrix S is singular")]
    SingularS,

    #[error("equilibrium set is not a finite set of points: {0}")]
    DegenerateReduction(&'static str),

    #[error("equilibrium residual {residual:e} exceeds tolerance {tol:e}")]
    ResidualTooLarge { residual: f64, tol: f64 },

    #[error("requires alpha * m1 > 0, got {alpha_m1}")]
    AssumptionViolated { alpha_m1: f64 },

    #[error("attractor sample is empty: every seed or point failed")]
    EmptySample,

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

impl Error {
    /// True for failures that mean the trajectory is unbounded or the
    /// numerics broke down, as opposed to bad input.
    pub fn is_numerical(&self) -> bool {
        matches!(self, Error::BlowUp { .. } | Error::StepUnderflow { .. } | Error::Overflow { .. })
    }
}
