//! Explicit Runge-Kutta stepping for the state and its tangent flow.
//!
//! A tangent-carrying step advances the 12-component system `(u, V)` with
//! `V' = J(u) V`. Because the tangent part is linear, one step maps `V` to
//! `(I + E) V`, where `E` is built from the Jacobians at the Runge-Kutta
//! stage states. [`Step::increment`] returns that `E`, so callers can
//! propagate any number of tangent columns (or a full fundamental matrix)
//! along exactly the discrete trajectory the state follows.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg3::Matrix3;
use crate::model::{StateVector, System3};

pub const MIN_ADAPTIVE_STEP: f64 = 1e-14;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    FixedRk4,
    /// Dormand-Prince 5(4) with step-size control on the state.
    AdaptiveRk45,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IntegratorConfig {
    pub method: Method,
    /// Fixed step, or the initial step for the adaptive method.
    pub dt: f64,
    pub abs_tol: f64,
    pub rel_tol: f64,
    /// Time between QR reorthonormalizations of the tangent triad.
    pub qr_interval: f64,
    /// A state norm above this counts as divergence.
    pub blowup_norm: f64,
    /// Time between recorded trajectory samples.
    pub sample_stride: f64,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        IntegratorConfig {
            method: Method::FixedRk4,
            dt: 1e-3,
            abs_tol: 1e-9,
            rel_tol: 1e-9,
            qr_interval: 0.5,
            blowup_norm: 1e6,
            sample_stride: 1e-2,
        }
    }
}

impl IntegratorConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidArgument(msg));
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return bad(format!("dt must be positive, got {}", self.dt));
        }
        if !(self.qr_interval >= self.dt && self.qr_interval.is_finite()) {
            return bad(format!("qr_interval ({}) must be >= dt ({})", self.qr_interval, self.dt));
        }
        for (name, v) in [("abs_tol", self.abs_tol), ("rel_tol", self.rel_tol)] {
            if !(v > 0.0 && v <= 1e-2) {
                return bad(format!("{name} must lie in (0, 1e-2], got {v}"));
            }
        }
        if !(self.blowup_norm > 0.0) {
            return bad(format!("blowup_norm must be positive, got {}", self.blowup_norm));
        }
        if !(self.sample_stride > 0.0 && self.sample_stride.is_finite()) {
            return bad(format!("sample_stride must be positive, got {}", self.sample_stride));
        }
        Ok(())
    }
}

struct Tableau {
    stages: usize,
    a: [[f64; 7]; 7],
    b: [f64; 7],
    /// `b - b_hat`, the embedded error weights.
    e: [f64; 7],
}

const RK4: Tableau = Tableau {
    stages: 4,
    a: [
        [0.0; 7],
        [0.5, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
        [0.0, 0.5, 0.0, 0.0, 0.0, 0.0, 0.0],
        [0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0],
        [0.0; 7],
        [0.0; 7],
        [0.0; 7],
    ],
    b: [1.0 / 6.0, 1.0 / 3.0, 1.0 / 3.0, 1.0 / 6.0, 0.0, 0.0, 0.0],
    e: [0.0; 7],
};

const DOPRI5: Tableau = Tableau {
    stages: 7,
    a: [
        [0.0; 7],
        [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
        [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0, 0.0],
        [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0, 0.0],
        [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0, 0.0],
        [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0, 0.0],
        [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0],
    ],
    b: [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0],
    e: [
        71.0 / 57600.0,
        0.0,
        -71.0 / 16695.0,
        71.0 / 1920.0,
        -17253.0 / 339200.0,
        22.0 / 525.0,
        -1.0 / 40.0,
    ],
};

/// Result of one explicit step.
#[derive(Clone, Copy, Debug)]
pub struct Step {
    pub next: StateVector,
    /// `E` with tangent map `I + E`; zero when the tangent was not requested.
    pub increment: Matrix3,
    /// Quadrature of `trace J` over the step, same weights as the state.
    pub trace_integral: f64,
    /// Scaled RMS error estimate (adaptive tableau only).
    pub error: f64,
}

fn rk_step<S: System3>(sys: &S, tab: &Tableau, u: &StateVector, h: f64, tangent: bool, cfg: &IntegratorConfig) -> Step {
    let mut k = [StateVector::ORIGIN; 7];
    let mut kt = [Matrix3::zeros(); 7];
    let mut next = *u;
    let mut increment = Matrix3::zeros();
    let mut trace_integral = 0.0;
    let mut err = StateVector::ORIGIN;
    for i in 0..tab.stages {
        let mut stage = *u;
        let mut tangent_stage = Matrix3::identity();
        for j in 0..i {
            let aij = tab.a[i][j];
            if aij != 0.0 {
                stage = stage.axpy(h * aij, k[j]);
                if tangent {
                    tangent_stage = tangent_stage + kt[j].scale(h * aij);
                }
            }
        }
        k[i] = sys.vector_field(&stage);
        if tangent {
            let jac = sys.jacobian(&stage);
            kt[i] = jac * tangent_stage;
            if tab.b[i] != 0.0 {
                trace_integral += h * tab.b[i] * jac.trace();
                increment = increment + kt[i].scale(h * tab.b[i]);
            }
        }
        if tab.b[i] != 0.0 {
            next = next.axpy(h * tab.b[i], k[i]);
        }
        if tab.e[i] != 0.0 {
            err = err.axpy(h * tab.e[i], k[i]);
        }
    }
    let error = if tab.e.iter().any(|&v| v != 0.0) {
        let (a, b, e) = (u.to_array(), next.to_array(), err.to_array());
        let sum: f64 = (0..3)
            .map(|c| {
                let sc = cfg.abs_tol + cfg.rel_tol * a[c].abs().max(b[c].abs());
                (e[c] / sc).powi(2)
            })
            .sum();
        (sum / 3.0).sqrt()
    } else {
        0.0
    };
    Step { next, increment, trace_integral, error }
}

/// Number of fixed steps covering `[0, t]` with step at most `dt`
/// (an exact multiple of `dt` up to rounding gets exactly `t / dt` steps).
pub fn fixed_step_count(t: f64, dt: f64) -> usize {
    if t <= 0.0 {
        return 0;
    }
    let ratio = t / dt;
    let rounded = ratio.round();
    if rounded >= 1.0 && (ratio - rounded).abs() <= 1e-9 * ratio {
        rounded as usize
    } else {
        ratio.ceil() as usize
    }
}

/// What the driver reports after every accepted step.
pub struct StepEvent<'a> {
    pub index: usize,
    pub t: f64,
    pub state: &'a StateVector,
    pub step: &'a Step,
    /// Index into the `stops` slice when this step landed on a stop time.
    pub stop: Option<usize>,
}

fn check_bounded(u: &StateVector, t: f64, cfg: &IntegratorConfig) -> Result<()> {
    if !u.is_finite() || u.norm() > cfg.blowup_norm {
        Err(Error::BlowUp { time: t })
    } else {
        Ok(())
    }
}

/// Integrates from `u0` over `[0, t_end]`, calling `on_step` after every
/// accepted step. `stops` must be strictly increasing times in `(0, t_end]`;
/// steps are arranged to land on each of them.
pub fn drive<S, F>(
    sys: &S,
    u0: StateVector,
    t_end: f64,
    stops: &[f64],
    cfg: &IntegratorConfig,
    tangent: bool,
    mut on_step: F,
) -> Result<StateVector>
where
    S: System3,
    F: FnMut(StepEvent<'_>) -> Result<()>,
{
    cfg.validate()?;
    if !(t_end >= 0.0 && t_end.is_finite()) {
        return Err(Error::InvalidArgument(format!("integration time must be finite and >= 0, got {t_end}")));
    }
    if !u0.is_finite() {
        return Err(Error::NonFinite("initial state"));
    }
    check_bounded(&u0, 0.0, cfg)?;
    if stops.windows(2).any(|w| !(w[0] < w[1])) || stops.iter().any(|&s| !(s > 0.0 && s <= t_end)) {
        return Err(Error::InvalidArgument("stop times must be strictly increasing within (0, t_end]".into()));
    }
    match cfg.method {
        Method::FixedRk4 => {
            let n = fixed_step_count(t_end, cfg.dt);
            if n == 0 {
                return Ok(u0);
            }
            let h = t_end / n as f64;
            let stop_steps: Vec<usize> = stops.iter().map(|&s| ((s / h).round() as usize).clamp(1, n)).collect();
            let mut next_stop = 0;
            let mut u = u0;
            for index in 1..=n {
                let step = rk_step(sys, &RK4, &u, h, tangent, cfg);
                u = step.next;
                let t = index as f64 * h;
                check_bounded(&u, t, cfg)?;
                let mut stop = None;
                while next_stop < stop_steps.len() && stop_steps[next_stop] <= index {
                    stop = Some(next_stop);
                    next_stop += 1;
                }
                on_step(StepEvent { index, t, state: &u, step: &step, stop })?;
            }
            Ok(u)
        }
        Method::AdaptiveRk45 => {
            let mut u = u0;
            let mut t = 0.0;
            let mut h = cfg.dt.min(t_end);
            let mut index = 0;
            let mut next_stop = 0;
            while t < t_end {
                let target = stops.get(next_stop).copied().unwrap_or(t_end);
                let landing = t + h >= target;
                let h_try = if landing { target - t } else { h };
                let step = rk_step(sys, &DOPRI5, &u, h_try, tangent, cfg);
                let factor = if step.error == 0.0 { 5.0 } else { (0.9 * step.error.powf(-0.2)).clamp(0.2, 5.0) };
                if step.error <= 1.0 && step.next.is_finite() {
                    u = step.next;
                    t = if landing { target } else { t + h_try };
                    index += 1;
                    check_bounded(&u, t, cfg)?;
                    let stop = if landing && next_stop < stops.len() {
                        next_stop += 1;
                        Some(next_stop - 1)
                    } else {
                        None
                    };
                    on_step(StepEvent { index, t, state: &u, step: &step, stop })?;
                    // a truncated landing step says nothing about the step size the controller wants
                    if !landing {
                        h = h_try * factor;
                    }
                } else {
                    h = h_try * factor.min(0.9);
                }
                if h < MIN_ADAPTIVE_STEP {
                    return Err(Error::StepUnderflow { time: t });
                }
            }
            Ok(u)
        }
    }
}

/// Sampled solution `(t, u(t))`.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub samples: Vec<(f64, StateVector)>,
}

impl Trajectory {
    pub fn final_state(&self) -> Option<StateVector> {
        self.samples.last().map(|s| s.1)
    }
}

/// Like [`integrate`], but hands each sample to `on_sample` as soon as it is
/// computed, so a caller still has the samples up to a blow-up.
pub fn integrate_streaming<S, F>(sys: &S, u0: StateVector, t: f64, cfg: &IntegratorConfig, mut on_sample: F) -> Result<StateVector>
where
    S: System3,
    F: FnMut(f64, &StateVector),
{
    on_sample(0.0, &u0);
    let stride = cfg.sample_stride;
    let every = match cfg.method {
        Method::FixedRk4 if t > 0.0 => {
            let h = t / fixed_step_count(t, cfg.dt) as f64;
            ((stride / h).round() as usize).max(1)
        }
        _ => 1,
    };
    let mut next_sample = stride;
    drive(sys, u0, t, &[], cfg, false, |ev| {
        let last = ev.t >= t;
        let due = match cfg.method {
            Method::FixedRk4 => ev.index % every == 0,
            Method::AdaptiveRk45 => ev.t >= next_sample,
        };
        if due || last {
            on_sample(ev.t, ev.state);
            while next_sample <= ev.t {
                next_sample += stride;
            }
        }
        Ok(())
    })
}

/// Solution of `u' = f(u)` from `u0` over `[0, t]`, sampled every
/// `cfg.sample_stride` plus the final time. `t = 0` gives just `[(0, u0)]`.
pub fn integrate<S: System3>(sys: &S, u0: StateVector, t: f64, cfg: &IntegratorConfig) -> Result<Trajectory> {
    let mut samples = Vec::new();
    integrate_streaming(sys, u0, t, cfg, |t, u| samples.push((t, *u)))?;
    Ok(Trajectory { samples })
}

/// Final state `phi^t(u0)` without recording samples.
pub fn flow<S: System3>(sys: &S, u0: StateVector, t: f64, cfg: &IntegratorConfig) -> Result<StateVector> {
    drive(sys, u0, t, &[], cfg, false, |_| Ok(()))
}
