//! Finite-time Lyapunov exponents `(1/t) ln s_i(D phi^t(u0))` along a
//! trajectory, by two routes that share the same discrete tangent maps:
//!
//! * **svd**: multiply the per-step tangent maps into the fundamental matrix
//!   and read off its singular values. Definitional, but the matrix overflows
//!   for long horizons.
//! * **benettin**: advance a tangent triad, reorthonormalize it by QR every
//!   `qr_interval`, and keep the product of the triangular factors in a
//!   row-scaled logarithmic form. The singular values of that product are
//!   those of the fundamental matrix, so both routes agree to rounding while
//!   this one never overflows. The classical estimate (time average of
//!   `ln R_ii`) is reported alongside.
//!
//! Both routes accumulate `ln |det|` step by step, so `sum(les)` matches the
//! time average of `trace J` (Liouville) independently of conditioning.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg3::{log_singular_values, qr_positive, Matrix3};
use crate::model::{StateVector, System3};
use crate::ode::{drive, fixed_step_count, IntegratorConfig, Method};
use crate::spectrum::OrderedExponents;

pub use crate::ode::{flow, integrate, integrate_streaming, Trajectory};

/// Entry magnitude past which the fundamental matrix counts as overflowed.
pub const OVERFLOW_LIMIT: f64 = 1e300;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Route {
    Benettin,
    Svd,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FiniteTimeSpectrum {
    /// Horizon actually integrated.
    pub t: f64,
    pub u0: StateVector,
    /// Finite-time Lyapunov exponents, descending, units 1/time.
    pub les: OrderedExponents,
    pub route: Route,
    /// QR renormalizations (benettin) or integration steps (svd).
    pub steps: usize,
    pub integration_steps: usize,
    /// Time averages of `ln R_ii` (benettin only), descending.
    pub diagonal_les: Option<[f64; 3]>,
    /// `(1/t) * integral of trace J` along the computed trajectory.
    pub mean_trace: f64,
    pub final_state: StateVector,
}

impl FiniteTimeSpectrum {
    /// `sum(les) - mean_trace`; zero up to rounding by Liouville's formula.
    pub fn liouville_defect(&self) -> f64 {
        self.les.sum() - self.mean_trace
    }
}

/// `ln det(I + E)` without forming `1 + small` first.
fn log_det_one_plus(e: &Matrix3) -> f64 {
    (e.trace() + e.principal_minor_sum() + e.det()).ln_1p()
}

/// Fundamental matrix together with what was accumulated along the way.
#[derive(Clone, Copy, Debug)]
pub struct TangentFlow {
    pub matrix: Matrix3,
    pub log_abs_det: f64,
    pub trace_integral: f64,
    pub steps: usize,
    pub final_state: StateVector,
}

/// `D phi^t(u0)`, with the per-step `ln |det|` and `trace J` integrals.
pub fn tangent_flow<S: System3>(sys: &S, u0: StateVector, t: f64, cfg: &IntegratorConfig) -> Result<TangentFlow> {
    let mut matrix = Matrix3::identity();
    let mut log_abs_det = 0.0;
    let mut trace_integral = 0.0;
    let mut steps = 0;
    let final_state = drive(sys, u0, t, &[], cfg, true, |ev| {
        matrix = matrix + ev.step.increment * matrix;
        log_abs_det += log_det_one_plus(&ev.step.increment);
        trace_integral += ev.step.trace_integral;
        steps = ev.index;
        if !(matrix.max_abs() <= OVERFLOW_LIMIT) {
            return Err(Error::Overflow { time: ev.t });
        }
        Ok(())
    })?;
    Ok(TangentFlow { matrix, log_abs_det, trace_integral, steps, final_state })
}

/// `D phi^t(u0)`; the identity at `t = 0`.
pub fn fundamental_matrix<S: System3>(sys: &S, u0: StateVector, t: f64, cfg: &IntegratorConfig) -> Result<Matrix3> {
    tangent_flow(sys, u0, t, cfg).map(|f| f.matrix)
}

/// Finite-time exponents from the singular values of the fundamental matrix.
pub fn finite_time_les_svd<S: System3>(sys: &S, u0: StateVector, t: f64, cfg: &IntegratorConfig) -> Result<FiniteTimeSpectrum> {
    if !(t > 0.0) {
        return Err(Error::InvalidArgument(format!("horizon must be positive, got {t}")));
    }
    let f = tangent_flow(sys, u0, t, cfg)?;
    let logs = log_singular_values([0.0; 3], &f.matrix, f.log_abs_det);
    Ok(FiniteTimeSpectrum {
        t,
        u0,
        les: OrderedExponents::new(logs.map(|l| l / t)),
        route: Route::Svd,
        steps: f.steps,
        integration_steps: f.steps,
        diagonal_les: None,
        mean_trace: f.trace_integral / t,
        final_state: f.final_state,
    })
}

/// Product of upper-triangular QR factors, stored as `diag(exp(row_logs)) * w`
/// with every row of `w` scaled to unit max-norm.
#[derive(Clone, Copy, Debug)]
pub struct TriangularProduct {
    row_logs: [f64; 3],
    w: Matrix3,
    log_abs_det: f64,
    diag_logs: [f64; 3],
}

impl Default for TriangularProduct {
    fn default() -> Self {
        TriangularProduct { row_logs: [0.0; 3], w: Matrix3::identity(), log_abs_det: 0.0, diag_logs: [0.0; 3] }
    }
}

impl TriangularProduct {
    /// Replaces the product `P` by `r * P` for an upper-triangular `r` with
    /// positive diagonal.
    pub fn absorb(&mut self, r: &Matrix3) {
        let mut w = Matrix3::zeros();
        let mut row_logs = [0.0; 3];
        for i in 0..3 {
            let top = (i..3)
                .filter(|&k| r[(i, k)] != 0.0)
                .map(|k| r[(i, k)].abs().ln() + self.row_logs[k])
                .fold(f64::NEG_INFINITY, f64::max);
            let mut row = [0.0; 3];
            for k in i..3 {
                let rik = r[(i, k)];
                if rik == 0.0 {
                    continue;
                }
                let coef = rik.signum() * (rik.abs().ln() + self.row_logs[k] - top).exp();
                for (c, v) in row.iter_mut().enumerate() {
                    *v += coef * self.w[(k, c)];
                }
            }
            let s = row.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            row_logs[i] = top + s.ln();
            for (c, v) in row.iter().enumerate() {
                w[(i, c)] = v / s;
            }
        }
        for i in 0..3 {
            let l = r[(i, i)].ln();
            self.diag_logs[i] += l;
            self.log_abs_det += l;
        }
        self.w = w;
        self.row_logs = row_logs;
    }

    /// `ln s_i` of the accumulated product, descending.
    pub fn log_singular_values(&self) -> [f64; 3] {
        log_singular_values(self.row_logs, &self.w, self.log_abs_det)
    }

    /// Accumulated `ln R_ii`, in triad order.
    pub fn diagonal_logs(&self) -> [f64; 3] {
        self.diag_logs
    }

    pub fn log_abs_det(&self) -> f64 {
        self.log_abs_det
    }
}

fn sort_desc(mut v: [f64; 3]) -> [f64; 3] {
    v.sort_by(|a, b| b.total_cmp(a));
    v
}

/// Benettin exponents at every horizon in `horizons` from a single
/// integration. Horizons need not be sorted or distinct; the output follows
/// the input order, and repeated horizons give identical spectra.
pub fn finite_time_les_benettin_at<S: System3>(
    sys: &S,
    u0: StateVector,
    horizons: &[f64],
    cfg: &IntegratorConfig,
) -> Result<Vec<FiniteTimeSpectrum>> {
    cfg.validate()?;
    if horizons.is_empty() {
        return Ok(Vec::new());
    }
    if let Some(&bad) = horizons.iter().find(|&&t| !(t >= cfg.qr_interval && t.is_finite())) {
        return Err(Error::InvalidArgument(format!(
            "benettin horizon {bad} must be finite and at least qr_interval = {}",
            cfg.qr_interval
        )));
    }
    let mut stops: Vec<f64> = horizons.to_vec();
    stops.sort_by(f64::total_cmp);
    stops.dedup();
    let t_end = *stops.last().expect("nonempty");

    // fixed-step runs renormalize every `every` steps; adaptive ones once
    // `qr_interval` has elapsed since the last QR
    let every = match cfg.method {
        Method::FixedRk4 => {
            let h = t_end / fixed_step_count(t_end, cfg.dt) as f64;
            ((cfg.qr_interval / h).round() as usize).max(1)
        }
        Method::AdaptiveRk45 => usize::MAX,
    };

    let mut triad = Matrix3::identity();
    let mut product = TriangularProduct::default();
    let mut since_qr = 0usize;
    let mut last_qr_time = 0.0;
    let mut qr_count = 0usize;
    let mut trace_integral = 0.0;
    let mut at_stop: Vec<Option<FiniteTimeSpectrum>> = vec![None; stops.len()];

    drive(sys, u0, t_end, &stops, cfg, true, |ev| {
        triad = triad + ev.step.increment * triad;
        trace_integral += ev.step.trace_integral;
        since_qr += 1;
        let due = match cfg.method {
            Method::FixedRk4 => since_qr >= every,
            Method::AdaptiveRk45 => ev.t - last_qr_time >= cfg.qr_interval,
        };
        if due || ev.stop.is_some() {
            let (q, r) = qr_positive(&triad).map_err(|_| Error::Overflow { time: ev.t })?;
            product.absorb(&r);
            triad = q;
            since_qr = 0;
            last_qr_time = ev.t;
            qr_count += 1;
        }
        if let Some(k) = ev.stop {
            let t = ev.t;
            let logs = product.log_singular_values();
            at_stop[k] = Some(FiniteTimeSpectrum {
                t,
                u0,
                les: OrderedExponents::new(logs.map(|l| l / t)),
                route: Route::Benettin,
                steps: qr_count,
                integration_steps: ev.index,
                diagonal_les: Some(sort_desc(product.diagonal_logs().map(|l| l / t))),
                mean_trace: trace_integral / t,
                final_state: *ev.state,
            });
        }
        Ok(())
    })?;

    horizons
        .iter()
        .map(|t| {
            let k = stops.iter().position(|s| s == t).expect("horizon is a stop");
            at_stop[k].clone().ok_or(Error::InvalidArgument(format!("horizon {t} was not reached")))
        })
        .collect()
}

/// Benettin (QR-reorthonormalized) finite-time exponents at horizon `t`.
pub fn finite_time_les_benettin<S: System3>(
    sys: &S,
    u0: StateVector,
    t: f64,
    cfg: &IntegratorConfig,
) -> Result<FiniteTimeSpectrum> {
    let mut v = finite_time_les_benettin_at(sys, u0, &[t], cfg)?;
    Ok(v.remove(0))
}
