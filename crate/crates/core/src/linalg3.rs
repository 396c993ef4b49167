//! Dense 3x3 kernels: closed-form symmetric eigenvalues, real cubic roots,
//! positive-diagonal QR and singular values.
//!
//! Everything here has a fixed operation count so that exponent computations
//! built on top of it are reproducible bit-for-bit between runs.

use std::f64::consts::PI;
use std::ops::{Add, Index, IndexMut, Mul, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Relative asymmetry accepted by [`sym_eigenvalues`].
pub const SYMMETRY_TOL: f64 = 1e-12;

/// Row-major 3x3 real matrix.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Matrix3(pub [[f64; 3]; 3]);

impl Default for Matrix3 {
    fn default() -> Self {
        Self::identity()
    }
}

impl Matrix3 {
    pub const fn zeros() -> Self {
        Matrix3([[0.0; 3]; 3])
    }

    pub const fn identity() -> Self {
        Matrix3([[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]])
    }

    pub const fn from_rows(rows: [[f64; 3]; 3]) -> Self {
        Matrix3(rows)
    }

    pub const fn diag(d: [f64; 3]) -> Self {
        Matrix3([[d[0], 0.0, 0.0], [0.0, d[1], 0.0], [0.0, 0.0, d[2]]])
    }

    pub fn from_cols(cols: [[f64; 3]; 3]) -> Self {
        Matrix3(cols).transpose()
    }

    pub fn col(&self, j: usize) -> [f64; 3] {
        [self.0[0][j], self.0[1][j], self.0[2][j]]
    }

    pub fn set_col(&mut self, j: usize, c: [f64; 3]) {
        for (i, v) in c.iter().enumerate() {
            self.0[i][j] = *v;
        }
    }

    pub fn transpose(&self) -> Self {
        let a = &self.0;
        Matrix3([
            [a[0][0], a[1][0], a[2][0]],
            [a[0][1], a[1][1], a[2][1]],
            [a[0][2], a[1][2], a[2][2]],
        ])
    }

    pub fn scale(&self, c: f64) -> Self {
        let mut out = *self;
        out.0.iter_mut().flatten().for_each(|v| *v *= c);
        out
    }

    pub fn mul_vec(&self, v: [f64; 3]) -> [f64; 3] {
        let a = &self.0;
        [
            a[0][0] * v[0] + a[0][1] * v[1] + a[0][2] * v[2],
            a[1][0] * v[0] + a[1][1] * v[1] + a[1][2] * v[2],
            a[2][0] * v[0] + a[2][1] * v[1] + a[2][2] * v[2],
        ]
    }

    pub fn trace(&self) -> f64 {
        self.0[0][0] + self.0[1][1] + self.0[2][2]
    }

    pub fn det(&self) -> f64 {
        let a = &self.0;
        a[0][0] * (a[1][1] * a[2][2] - a[1][2] * a[2][1])
            - a[0][1] * (a[1][0] * a[2][2] - a[1][2] * a[2][0])
            + a[0][2] * (a[1][0] * a[2][1] - a[1][1] * a[2][0])
    }

    /// Sum of the three principal 2x2 minors.
    pub fn principal_minor_sum(&self) -> f64 {
        let a = &self.0;
        (a[0][0] * a[1][1] - a[0][1] * a[1][0])
            + (a[0][0] * a[2][2] - a[0][2] * a[2][0])
            + (a[1][1] * a[2][2] - a[1][2] * a[2][1])
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.0.iter().flatten().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.0.iter().flatten().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().flatten().all(|v| v.is_finite())
    }

    /// Largest entrywise difference between the matrix and its transpose.
    pub fn asymmetry(&self) -> f64 {
        let a = &self.0;
        (a[0][1] - a[1][0])
            .abs()
            .max((a[0][2] - a[2][0]).abs())
            .max((a[1][2] - a[2][1]).abs())
    }

    /// `(A + A^T) / 2`, symmetric by construction.
    pub fn symmetric_part(&self) -> Self {
        let a = &self.0;
        let s01 = 0.5 * (a[0][1] + a[1][0]);
        let s02 = 0.5 * (a[0][2] + a[2][0]);
        let s12 = 0.5 * (a[1][2] + a[2][1]);
        Matrix3([
            [a[0][0], s01, s02],
            [s01, a[1][1], s12],
            [s02, s12, a[2][2]],
        ])
    }

    /// `A^T A`, exactly symmetric in floating point.
    pub fn gram(&self) -> Self {
        let mut g = Matrix3::zeros();
        for i in 0..3 {
            for j in i..3 {
                let v = (0..3).map(|k| self.0[k][i] * self.0[k][j]).sum::<f64>();
                g.0[i][j] = v;
                g.0[j][i] = v;
            }
        }
        g
    }

    pub fn inverse(&self) -> Option<Self> {
        let d = self.det();
        if d == 0.0 || !d.is_finite() {
            return None;
        }
        let a = &self.0;
        let cof = |r0: usize, r1: usize, c0: usize, c1: usize| a[r0][c0] * a[r1][c1] - a[r0][c1] * a[r1][c0];
        let adj = Matrix3([
            [cof(1, 2, 1, 2), -cof(0, 2, 1, 2), cof(0, 1, 1, 2)],
            [-cof(1, 2, 0, 2), cof(0, 2, 0, 2), -cof(0, 1, 0, 2)],
            [cof(1, 2, 0, 1), -cof(0, 2, 0, 1), cof(0, 1, 0, 1)],
        ]);
        Some(adj.scale(1.0 / d))
    }

    /// Second compound matrix: all 2x2 minors, rows and columns indexed by
    /// the pairs (0,1), (0,2), (1,2). Its spectral norm is `s1 * s2`.
    pub fn second_compound(&self) -> Self {
        const PAIRS: [(usize, usize); 3] = [(0, 1), (0, 2), (1, 2)];
        let a = &self.0;
        let mut c = Matrix3::zeros();
        for (r, &(i, j)) in PAIRS.iter().enumerate() {
            for (s, &(k, l)) in PAIRS.iter().enumerate() {
                c.0[r][s] = a[i][k] * a[j][l] - a[i][l] * a[j][k];
            }
        }
        c
    }
}

impl Index<(usize, usize)> for Matrix3 {
    type Output = f64;
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.0[i][j]
    }
}

impl IndexMut<(usize, usize)> for Matrix3 {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.0[i][j]
    }
}

impl Mul for Matrix3 {
    type Output = Matrix3;
    fn mul(self, rhs: Matrix3) -> Matrix3 {
        let mut out = Matrix3::zeros();
        for i in 0..3 {
            for j in 0..3 {
                out.0[i][j] = self.0[i][0] * rhs.0[0][j] + self.0[i][1] * rhs.0[1][j] + self.0[i][2] * rhs.0[2][j];
            }
        }
        out
    }
}

impl Add for Matrix3 {
    type Output = Matrix3;
    fn add(mut self, rhs: Matrix3) -> Matrix3 {
        for i in 0..3 {
            for j in 0..3 {
                self.0[i][j] += rhs.0[i][j];
            }
        }
        self
    }
}

impl Sub for Matrix3 {
    type Output = Matrix3;
    fn sub(mut self, rhs: Matrix3) -> Matrix3 {
        for i in 0..3 {
            for j in 0..3 {
                self.0[i][j] -= rhs.0[i][j];
            }
        }
        self
    }
}

pub(crate) fn dot(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

pub(crate) fn norm(a: [f64; 3]) -> f64 {
    dot(a, a).sqrt()
}

fn sort_desc(mut v: [f64; 3]) -> [f64; 3] {
    v.sort_by(|a, b| b.total_cmp(a));
    v
}

/// Eigenvalues of a symmetric 3x3 matrix, descending.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SymmetricSpectrum(pub [f64; 3]);

impl SymmetricSpectrum {
    pub fn values(&self) -> [f64; 3] {
        self.0
    }

    pub fn sum(&self) -> f64 {
        self.0.iter().sum()
    }
}

/// `det(m - lambda I)` and its derivative in `lambda`, evaluated on the
/// shifted matrix to keep accuracy near the roots.
fn char_poly_shifted(m: &Matrix3, lambda: f64) -> (f64, f64) {
    let shifted = *m - Matrix3::identity().scale(lambda);
    (shifted.det(), -shifted.principal_minor_sum())
}

fn newton_polish(m: &Matrix3, root: f64) -> f64 {
    let (p, dp) = char_poly_shifted(m, root);
    if p == 0.0 || dp == 0.0 || !dp.is_finite() {
        return root;
    }
    let candidate = root - p / dp;
    let (pc, _) = char_poly_shifted(m, candidate);
    if candidate.is_finite() && pc.abs() < p.abs() {
        candidate
    } else {
        root
    }
}

/// Closed-form (trigonometric) eigenvalues of a symmetric matrix with one
/// Newton polish per root, sorted descending.
pub fn sym_eigenvalues(m: &Matrix3) -> Result<SymmetricSpectrum> {
    let scale = m.max_abs();
    if !scale.is_finite() {
        return Err(Error::NonFinite("symmetric eigenvalue input"));
    }
    if scale == 0.0 {
        return Ok(SymmetricSpectrum([0.0; 3]));
    }
    let asym = m.asymmetry();
    if asym > SYMMETRY_TOL * scale {
        return Err(Error::NotSymmetric { asymmetry: asym / scale });
    }
    let b = m.symmetric_part().scale(1.0 / scale);
    let q = b.trace() / 3.0;
    let a = &b.0;
    let off = a[0][1] * a[0][1] + a[0][2] * a[0][2] + a[1][2] * a[1][2];
    let p2 = (a[0][0] - q).powi(2) + (a[1][1] - q).powi(2) + (a[2][2] - q).powi(2) + 2.0 * off;
    let p = (p2 / 6.0).sqrt();
    let roots = if p <= 1e-14 {
        // triple root: the midpoint of the (numerically) coincident cluster
        [q; 3]
    } else {
        let shifted = (b - Matrix3::identity().scale(q)).scale(1.0 / p);
        let r = (shifted.det() / 2.0).clamp(-1.0, 1.0);
        let phi = r.acos() / 3.0;
        let e1 = q + 2.0 * p * phi.cos();
        let e3 = q + 2.0 * p * (phi + 2.0 * PI / 3.0).cos();
        let e2 = 3.0 * q - e1 - e3;
        [newton_polish(&b, e1), newton_polish(&b, e2), newton_polish(&b, e3)]
    };
    Ok(SymmetricSpectrum(sort_desc(roots.map(|v| v * scale))))
}

/// Roots of a real monic cubic.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum CubicRoots {
    /// Three real roots, descending (repeated roots allowed).
    ThreeReal([f64; 3]),
    /// One real root and a complex-conjugate pair `re +- i*im`, `im > 0`.
    OneReal { root: f64, re: f64, im: f64 },
}

impl CubicRoots {
    /// Real parts of all three roots, descending.
    pub fn real_parts(&self) -> [f64; 3] {
        match *self {
            CubicRoots::ThreeReal(r) => r,
            CubicRoots::OneReal { root, re, .. } => sort_desc([root, re, re]),
        }
    }

    pub fn all_real(&self) -> bool {
        matches!(self, CubicRoots::ThreeReal(_))
    }
}

/// Discriminant of `x^3 + a2 x^2 + a1 x + a0`; positive iff three distinct
/// real roots.
pub fn cubic_discriminant(a2: f64, a1: f64, a0: f64) -> f64 {
    18.0 * a2 * a1 * a0 - 4.0 * a2.powi(3) * a0 + a2 * a2 * a1 * a1 - 4.0 * a1.powi(3) - 27.0 * a0 * a0
}

fn cubic_newton(a2: f64, a1: f64, a0: f64, x: f64) -> f64 {
    let eval = |x: f64| ((x + a2) * x + a1) * x + a0;
    let p = eval(x);
    let dp = (3.0 * x + 2.0 * a2) * x + a1;
    if p == 0.0 || dp == 0.0 {
        return x;
    }
    let candidate = x - p / dp;
    if candidate.is_finite() && eval(candidate).abs() < p.abs() {
        candidate
    } else {
        x
    }
}

/// Solves `x^3 + a2 x^2 + a1 x + a0 = 0` by the trigonometric method when
/// all roots are real and by Cardano otherwise, with one Newton polish per
/// real root.
pub fn solve_cubic(a2: f64, a1: f64, a0: f64) -> CubicRoots {
    let shift = a2 / 3.0;
    let p = a1 - a2 * a2 / 3.0;
    let q = 2.0 * a2.powi(3) / 27.0 - a2 * a1 / 3.0 + a0;
    let half_q = q / 2.0;
    let third_p = p / 3.0;
    let d = half_q * half_q + third_p.powi(3);
    if p == 0.0 && q == 0.0 {
        return CubicRoots::ThreeReal([-shift; 3]);
    }
    if d < 0.0 {
        let m = 2.0 * (-third_p).sqrt();
        let arg = (3.0 * q / (p * m)).clamp(-1.0, 1.0);
        let theta = arg.acos() / 3.0;
        let roots = [0.0, 1.0, 2.0].map(|k| m * (theta - 2.0 * PI * k / 3.0).cos() - shift);
        return CubicRoots::ThreeReal(sort_desc(roots.map(|r| cubic_newton(a2, a1, a0, r))));
    }
    let sd = d.sqrt();
    let t = (-half_q + sd).cbrt() + (-half_q - sd).cbrt();
    let r = cubic_newton(a2, a1, a0, t - shift);
    // deflate: x^3 + a2 x^2 + a1 x + a0 = (x - r)(x^2 + b x + c)
    let b = a2 + r;
    let c = a1 + r * b;
    let disc = b * b / 4.0 - c;
    if disc >= 0.0 {
        let s = disc.sqrt();
        let r2 = cubic_newton(a2, a1, a0, -b / 2.0 + s);
        let r3 = cubic_newton(a2, a1, a0, -b / 2.0 - s);
        CubicRoots::ThreeReal(sort_desc([r, r2, r3]))
    } else {
        CubicRoots::OneReal { root: r, re: -b / 2.0, im: (-disc).sqrt() }
    }
}

/// Eigenvalues of a general real matrix from its characteristic cubic.
pub fn eigenvalues(m: &Matrix3) -> CubicRoots {
    solve_cubic(-m.trace(), m.principal_minor_sum(), -m.det())
}

/// Discriminant of the characteristic cubic of `m`.
pub fn char_discriminant(m: &Matrix3) -> f64 {
    cubic_discriminant(-m.trace(), m.principal_minor_sum(), -m.det())
}

/// QR factorization by modified Gram-Schmidt with one reorthogonalization
/// pass. `R` has a strictly positive diagonal.
pub fn qr_positive(m: &Matrix3) -> Result<(Matrix3, Matrix3)> {
    let mut q = Matrix3::zeros();
    let mut r = Matrix3::zeros();
    for j in 0..3 {
        let mut v = m.col(j);
        for _pass in 0..2 {
            for i in 0..j {
                let qi = q.col(i);
                let proj = dot(qi, v);
                r.0[i][j] += proj;
                for k in 0..3 {
                    v[k] -= proj * qi[k];
                }
            }
        }
        let n = norm(v);
        if !(n > f64::MIN_POSITIVE) || !n.is_finite() {
            return Err(Error::Singular);
        }
        r.0[j][j] = n;
        q.set_col(j, v.map(|x| x / n));
    }
    Ok((q, r))
}

fn largest_gram_eigenvalue(m: &Matrix3) -> f64 {
    // gram() is exactly symmetric, so this cannot fail on finite input
    sym_eigenvalues(&m.gram()).map(|s| s.0[0].max(0.0)).unwrap_or(f64::NAN)
}

/// Singular values, descending.
///
/// `s1` comes from the largest eigenvalue of `m^T m`, `s1*s2` from the same
/// quantity for the second compound, and `s3 = |det m| / (s1*s2)`. Only
/// dominant eigenvalues are taken, so small singular values keep their
/// relative accuracy.
pub fn singular_values(m: &Matrix3) -> [f64; 3] {
    let s1 = largest_gram_eigenvalue(m).sqrt();
    let s12 = largest_gram_eigenvalue(&m.second_compound()).sqrt();
    let s2 = if s1 > 0.0 { s12 / s1 } else { 0.0 };
    let s3 = if s12 > 0.0 { m.det().abs() / s12 } else { 0.0 };
    sort_desc([s1, s2, s3])
}

/// Natural logs of the singular values of `diag(exp(row_logs)) * w`,
/// descending, given `log_abs_det = ln|det|` of that product.
///
/// This is how both exponent routes read off `ln s_i` without ever forming
/// the (possibly overflowing) product explicitly.
pub fn log_singular_values(row_logs: [f64; 3], w: &Matrix3, log_abs_det: f64) -> [f64; 3] {
    let top = row_logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut scaled = *w;
    for (i, row) in scaled.0.iter_mut().enumerate() {
        let f = (row_logs[i] - top).exp();
        row.iter_mut().for_each(|v| *v *= f);
    }
    let l1 = top + 0.5 * largest_gram_eigenvalue(&scaled).ln();

    let pair_logs = [row_logs[0] + row_logs[1], row_logs[0] + row_logs[2], row_logs[1] + row_logs[2]];
    let pair_top = pair_logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut compound = w.second_compound();
    for (r, row) in compound.0.iter_mut().enumerate() {
        let f = (pair_logs[r] - pair_top).exp();
        row.iter_mut().for_each(|v| *v *= f);
    }
    let l12 = pair_top + 0.5 * largest_gram_eigenvalue(&compound).ln();

    sort_desc([l1, l12 - l1, log_abs_det - l12])
}
