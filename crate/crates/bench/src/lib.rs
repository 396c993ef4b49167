//! Shared fixtures for the memdim-core benchmarks.

use memdim_core::{IntegratorConfig, Matrix3, Parameters, StateVector};

/// Chaotic double-scroll parameters.
pub const CHAOTIC: Parameters = Parameters::DOUBLE_SCROLL;

/// A parameter set with a global convergence certificate.
pub const CONVERGENT: Parameters = Parameters::new(0.5, -1.0, 2.0, 0.5, 1.0, 0.0);

/// A point on the chaotic attractor after a short transient.
pub const ON_ATTRACTOR: StateVector = StateVector::new(0.1, 0.0, 0.0);

pub fn integrator() -> IntegratorConfig {
    IntegratorConfig::default()
}

/// A fixed, well-conditioned non-symmetric matrix.
pub fn general_matrix() -> Matrix3 {
    Matrix3::from_rows([[2.0, -1.0, 0.5], [0.3, 1.5, -0.7], [-0.2, 0.4, 3.0]])
}

/// The symmetric part of [`general_matrix`].
pub fn symmetric_matrix() -> Matrix3 {
    let m = general_matrix();
    let mut rows = [[0.0; 3]; 3];
    for (i, row) in rows.iter_mut().enumerate() {
        for (j, v) in row.iter_mut().enumerate() {
            *v = 0.5 * (m[(i, j)] + m[(j, i)]);
        }
    }
    Matrix3::from_rows(rows)
}
