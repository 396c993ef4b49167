//! Independent reference implementations used by the integration tests.
#![allow(dead_code)]

use memdim_core::{Matrix3, Parameters, StateVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn uniform(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    lo + (hi - lo) * rng.random::<f64>()
}

pub fn random_matrix(rng: &mut ChaCha8Rng, scale: f64) -> Matrix3 {
    let mut m = Matrix3::zeros();
    for i in 0..3 {
        for j in 0..3 {
            m.0[i][j] = uniform(rng, -scale, scale);
        }
    }
    m
}

pub fn random_symmetric(rng: &mut ChaCha8Rng, scale: f64) -> Matrix3 {
    let mut m = random_matrix(rng, scale);
    for i in 0..3 {
        for j in 0..i {
            m.0[i][j] = m.0[j][i];
        }
    }
    m
}

pub fn random_state(rng: &mut ChaCha8Rng, r: f64) -> StateVector {
    StateVector::new(uniform(rng, -r, r), uniform(rng, -r, r), uniform(rng, -r, r))
}

/// Number of eigenvalues of symmetric `a` strictly below `shift`, from the
/// signs of the LDL^T pivots of `a - shift I`.
pub fn count_below(a: &Matrix3, shift: f64) -> usize {
    let m = |i: usize, j: usize| a.0[i][j] - if i == j { shift } else { 0.0 };
    let tiny = 1e-300;
    let mut d0 = m(0, 0);
    if d0 == 0.0 {
        d0 = -tiny;
    }
    let l10 = m(1, 0) / d0;
    let l20 = m(2, 0) / d0;
    let mut d1 = m(1, 1) - l10 * l10 * d0;
    if d1 == 0.0 {
        d1 = -tiny;
    }
    let l21 = (m(2, 1) - l20 * l10 * d0) / d1;
    let d2 = m(2, 2) - l20 * l20 * d0 - l21 * l21 * d1;
    [d0, d1, d2].iter().filter(|&&d| d < 0.0).count()
}

/// Eigenvalues of symmetric `a`, descending, by bisection on the inertia.
pub fn bisection_eigenvalues(a: &Matrix3) -> [f64; 3] {
    let bound = (0..3).map(|i| (0..3).map(|j| a.0[i][j].abs()).sum::<f64>()).fold(0.0, f64::max) + 1.0;
    let mut out = [0.0; 3];
    for (k, slot) in out.iter_mut().enumerate() {
        // k-th largest = (3 - k)-th smallest
        let target = 3 - k;
        let (mut lo, mut hi) = (-bound, bound);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid == lo || mid == hi {
                break;
            }
            if count_below(a, mid) >= target {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        *slot = 0.5 * (lo + hi);
    }
    out
}

/// Matrix exponential by scaling and squaring of a Taylor series.
pub fn expm(a: &Matrix3) -> Matrix3 {
    let norm = a.frobenius_norm();
    let mut s = 0;
    while norm / 2f64.powi(s) > 0.5 {
        s += 1;
    }
    let b = a.scale(1.0 / 2f64.powi(s));
    let mut term = Matrix3::identity();
    let mut sum = Matrix3::identity();
    for k in 1..30 {
        term = (term * b).scale(1.0 / k as f64);
        sum = sum + term;
    }
    for _ in 0..s {
        sum = sum * sum;
    }
    sum
}

pub fn fd_jacobian(p: &Parameters, u: &StateVector, h: f64) -> Matrix3 {
    let mut j = Matrix3::zeros();
    for c in 0..3 {
        let mut e = [0.0; 3];
        e[c] = h;
        let plus = memdim_core::model::vector_field(p, &(*u + StateVector::from_array(e))).to_array();
        let minus = memdim_core::model::vector_field(p, &(*u - StateVector::from_array(e))).to_array();
        for r in 0..3 {
            j.0[r][c] = (plus[r] - minus[r]) / (2.0 * h);
        }
    }
    j
}

/// Parameters drawn from a box with `alpha * m1 > 0`.
pub fn random_dissipative_parameters(rng: &mut ChaCha8Rng) -> Parameters {
    Parameters::new(
        uniform(rng, 0.1, 20.0),
        uniform(rng, -20.0, 20.0),
        uniform(rng, -2.0, 5.0),
        uniform(rng, -2.0, 3.0),
        uniform(rng, 0.01, 2.0),
        uniform(rng, -1.0, 1.0),
    )
}
