//! The Chua memristor vector field
//!
//! ```text
//! x' = alpha (m0 - 1) x + alpha y - alpha m1 x^3 + alpha x0
//! y' = x - y + z
//! z' = beta y - gamma z
//! ```
//!
//! together with its Jacobian, symmetrized Jacobian and equilibria.

use std::ops::{Add, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg3::{solve_cubic, CubicRoots, Matrix3};

/// A smooth autonomous vector field on R^3 with an analytic Jacobian.
///
/// The integration and exponent code is written against this trait, so it
/// works for any three-dimensional model, not just [`Parameters`].
pub trait System3: Sync {
    fn vector_field(&self, u: &StateVector) -> StateVector;
    fn jacobian(&self, u: &StateVector) -> Matrix3;
}

/// Point in phase space.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateVector {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl StateVector {
    pub const ORIGIN: StateVector = StateVector { x: 0.0, y: 0.0, z: 0.0 };

    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        StateVector { x, y, z }
    }

    pub const fn to_array(self) -> [f64; 3] {
        [self.x, self.y, self.z]
    }

    pub const fn from_array(a: [f64; 3]) -> Self {
        StateVector { x: a[0], y: a[1], z: a[2] }
    }

    pub fn norm(&self) -> f64 {
        (self.x * self.x + self.y * self.y + self.z * self.z).sqrt()
    }

    pub fn distance(&self, other: &StateVector) -> f64 {
        (*self - *other).norm()
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }

    pub fn scale(self, c: f64) -> Self {
        StateVector::new(c * self.x, c * self.y, c * self.z)
    }

    /// `self + h * v`
    pub fn axpy(self, h: f64, v: StateVector) -> Self {
        StateVector::new(self.x + h * v.x, self.y + h * v.y, self.z + h * v.z)
    }
}

impl Add for StateVector {
    type Output = StateVector;
    fn add(self, o: StateVector) -> StateVector {
        StateVector::new(self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl Sub for StateVector {
    type Output = StateVector;
    fn sub(self, o: StateVector) -> StateVector {
        StateVector::new(self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

/// The six model constants. Construction does not validate anything; only
/// the analytic estimates require `alpha * m1 > 0`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Parameters {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub m0: f64,
    pub m1: f64,
    pub x0: f64,
}

impl Default for Parameters {
    fn default() -> Self {
        Parameters::DOUBLE_SCROLL
    }
}

impl Parameters {
    /// Cubic Chua oscillator in its double-scroll regime
    /// (`x' = 10 (y + x/6 - x^3/16)`, `z' = -16 y`).
    pub const DOUBLE_SCROLL: Parameters =
        Parameters { alpha: 10.0, beta: -16.0, gamma: 0.0, m0: 7.0 / 6.0, m1: 1.0 / 16.0, x0: 0.0 };

    pub const NAMES: [&'static str; 6] = ["alpha", "beta", "gamma", "m0", "m1", "x0"];

    pub const fn new(alpha: f64, beta: f64, gamma: f64, m0: f64, m1: f64, x0: f64) -> Self {
        Parameters { alpha, beta, gamma, m0, m1, x0 }
    }

    pub fn is_finite(&self) -> bool {
        self.as_array().iter().all(|v| v.is_finite())
    }

    /// `alpha * m1 > 0`, the standing assumption of the eigenvalue bounds.
    pub fn leonov_applicable(&self) -> bool {
        self.alpha * self.m1 > 0.0
    }

    pub fn as_array(&self) -> [f64; 6] {
        [self.alpha, self.beta, self.gamma, self.m0, self.m1, self.x0]
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        let i = Self::NAMES.iter().position(|n| *n == name)?;
        Some(self.as_array()[i])
    }

    pub fn set(&mut self, name: &str, value: f64) -> Result<()> {
        let slot = match name {
            "alpha" => &mut self.alpha,
            "beta" => &mut self.beta,
            "gamma" => &mut self.gamma,
            "m0" => &mut self.m0,
            "m1" => &mut self.m1,
            "x0" => &mut self.x0,
            other => return Err(Error::InvalidArgument(format!("unknown parameter `{other}`"))),
        };
        *slot = value;
        Ok(())
    }

    /// `J(0)`: the Jacobian with the cubic term removed.
    pub fn jacobian_at_origin(&self) -> Matrix3 {
        let a = self.alpha;
        Matrix3::from_rows([[a * (self.m0 - 1.0), a, 0.0], [1.0, -1.0, 1.0], [0.0, self.beta, -self.gamma]])
    }
}

impl System3 for Parameters {
    fn vector_field(&self, u: &StateVector) -> StateVector {
        vector_field(self, u)
    }

    fn jacobian(&self, u: &StateVector) -> Matrix3 {
        jacobian(self, u)
    }
}

pub fn vector_field(p: &Parameters, u: &StateVector) -> StateVector {
    let StateVector { x, y, z } = *u;
    let a = p.alpha;
    StateVector::new(
        a * (p.m0 - 1.0) * x + a * y - a * p.m1 * x * x * x + a * p.x0,
        x - y + z,
        p.beta * y - p.gamma * z,
    )
}

/// `J(u) = J(0) - 3 alpha m1 x^2 e1 e1^T`.
pub fn jacobian(p: &Parameters, u: &StateVector) -> Matrix3 {
    let mut j = p.jacobian_at_origin();
    j.0[0][0] -= 3.0 * p.alpha * p.m1 * u.x * u.x;
    j
}

/// `(J(u) + J(u)^T) / 2`. Depends on `u` only through `x^2`.
pub fn symmetrized_jacobian(p: &Parameters, u: &StateVector) -> Matrix3 {
    let off01 = (p.alpha + 1.0) / 2.0;
    let off12 = (1.0 + p.beta) / 2.0;
    let a = p.alpha;
    Matrix3::from_rows([
        [a * (p.m0 - 1.0) - 3.0 * a * p.m1 * u.x * u.x, off01, 0.0],
        [off01, -1.0, off12],
        [0.0, off12, -p.gamma],
    ])
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EquilibriumLabel {
    Origin,
    Plus,
    Minus,
    /// Index in the sorted equilibrium list.
    Generic(usize),
}

impl std::fmt::Display for EquilibriumLabel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            EquilibriumLabel::Origin => f.write_str("origin"),
            EquilibriumLabel::Plus => f.write_str("plus"),
            EquilibriumLabel::Minus => f.write_str("minus"),
            EquilibriumLabel::Generic(k) => write!(f, "generic-{k}"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Equilibrium {
    pub point: StateVector,
    pub label: EquilibriumLabel,
}

/// Linear map x -> (x, ky x, kz x) from the reduced unknown back to phase
/// space, plus the reduced equation `-m1 x^3 + lin x + cst = 0`.
struct Reduction {
    ky: f64,
    kz: f64,
    lin: f64,
    cst: f64,
}

/// All equilibria, sorted ascending by x (ties by y, then z).
///
/// The second and third equations are used to eliminate y and z, leaving a
/// cubic in x. When `x0 = 0` the cubic factors as `x (lin - m1 x^2)` and the
/// roots are taken in closed form; otherwise the trigonometric/Cardano
/// solver is used with a Newton polish.
pub fn equilibria(p: &Parameters, tol: f64) -> Result<Vec<Equilibrium>> {
    if !(tol > 0.0) {
        return Err(Error::InvalidArgument(format!("equilibrium tolerance must be positive, got {tol}")));
    }
    if !p.is_finite() {
        return Err(Error::NonFinite("parameters"));
    }
    if p.alpha == 0.0 {
        return Err(Error::DegenerateReduction("alpha = 0 makes x' vanish identically"));
    }

    let reduction = if p.gamma != 0.0 {
        let ratio = p.beta / p.gamma;
        let k = 1.0 - ratio;
        if k == 0.0 {
            // beta = gamma forces x = 0, then y = z = -x0
            let point = StateVector::new(0.0, -p.x0, -p.x0);
            return finish(p, vec![point], tol);
        }
        Reduction { ky: 1.0 / k, kz: ratio / k, lin: p.m0 - 1.0 + 1.0 / k, cst: p.x0 }
    } else if p.beta != 0.0 {
        // z' = beta y forces y = 0, and then z = -x
        Reduction { ky: 0.0, kz: -1.0, lin: p.m0 - 1.0, cst: p.x0 }
    } else {
        return Err(Error::DegenerateReduction("beta = gamma = 0 leaves z undetermined"));
    };

    let xs = reduced_roots(p.m1, reduction.lin, reduction.cst)?;
    let points = xs
        .into_iter()
        .map(|x| {
            // `+ 0.0` normalizes negative zeros
            let y = reduction.ky * x + 0.0;
            let z = reduction.kz * x + 0.0;
            StateVector::new(x, y, z)
        })
        .collect();
    finish(p, points, tol)
}

fn reduced_roots(m1: f64, lin: f64, cst: f64) -> Result<Vec<f64>> {
    if m1 == 0.0 {
        return if lin != 0.0 {
            Ok(vec![-cst / lin])
        } else if cst == 0.0 {
            Err(Error::DegenerateReduction("linear reduced equation vanishes identically"))
        } else {
            Ok(Vec::new())
        };
    }
    if cst == 0.0 {
        let sq = lin / m1;
        return Ok(if sq > 0.0 {
            let r = sq.sqrt();
            vec![-r, 0.0, r]
        } else {
            vec![0.0]
        });
    }
    // monic form: x^3 - (lin/m1) x - cst/m1 = 0
    let roots = match solve_cubic(0.0, -lin / m1, -cst / m1) {
        CubicRoots::ThreeReal(r) => r.to_vec(),
        CubicRoots::OneReal { root, .. } => vec![root],
    };
    let mut out: Vec<f64> = Vec::with_capacity(3);
    for r in roots {
        if !out.iter().any(|q| (q - r).abs() <= 1e-12 * (1.0 + r.abs())) {
            out.push(r);
        }
    }
    Ok(out)
}

fn finish(p: &Parameters, mut points: Vec<StateVector>, tol: f64) -> Result<Vec<Equilibrium>> {
    points.sort_by(|a, b| a.x.total_cmp(&b.x).then(a.y.total_cmp(&b.y)).then(a.z.total_cmp(&b.z)));
    let symmetric_case = p.x0 == 0.0;
    let mut generic = 0;
    points
        .into_iter()
        .map(|point| {
            let residual = vector_field(p, &point).norm();
            if !(residual <= tol) {
                return Err(Error::ResidualTooLarge { residual, tol });
            }
            let label = if point == StateVector::ORIGIN {
                EquilibriumLabel::Origin
            } else if symmetric_case && point.x > 0.0 {
                EquilibriumLabel::Plus
            } else if symmetric_case && point.x < 0.0 {
                EquilibriumLabel::Minus
            } else {
                generic += 1;
                EquilibriumLabel::Generic(generic - 1)
            };
            Ok(Equilibrium { point, label })
        })
        .collect()
}
