//! Eigenvalue-based estimates from the symmetrized Jacobian
//! `(S J S^-1 + (S J S^-1)^T) / 2`.
//!
//! With `alpha * m1 > 0` the Jacobian is `J(0)` minus a nonnegative multiple
//! of `e1 e1^T`, so (for `S = I`) every ordered eigenvalue `l_j(u)` is
//! dominated by `l_j(0)` and suprema over phase space are attained at
//! `x = 0`. For a general constant `S` the symmetrized matrix still depends
//! on `u` only through `x`, and suprema are taken over a finite x grid.
//!
//! The auxiliary function `V` of the dimension and convergence criteria is
//! fixed to zero.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg3::{char_discriminant, eigenvalues, sym_eigenvalues, CubicRoots, Matrix3, SymmetricSpectrum};
use crate::lyapunov::{entropy_upper_bound, kaplan_yorke};
use crate::model::{Parameters, StateVector};

/// Slack allowed by the domination check.
pub const DOMINATION_SLACK: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CertificateConfig {
    /// Constant change-of-basis matrix.
    pub s_matrix: Matrix3,
    /// Resolution of the grid over `s` in `[0, 1]`.
    pub s_step: f64,
    pub x_min: f64,
    pub x_max: f64,
    pub x_points: usize,
}

impl Default for CertificateConfig {
    fn default() -> Self {
        CertificateConfig { s_matrix: Matrix3::identity(), s_step: 1e-3, x_min: -10.0, x_max: 10.0, x_points: 4001 }
    }
}

impl CertificateConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.s_matrix.det().abs() > 1e-12) {
            return Err(Error::SingularS);
        }
        if !(self.x_min <= 0.0 && 0.0 <= self.x_max && self.x_min.is_finite() && self.x_max.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "x interval [{}, {}] must be finite and contain 0",
                self.x_min, self.x_max
            )));
        }
        if self.x_points < 2 {
            return Err(Error::InvalidArgument("x_points must be at least 2".into()));
        }
        if !(self.s_step > 0.0 && self.s_step <= 1.0) {
            return Err(Error::InvalidArgument(format!("s_step must lie in (0, 1], got {}", self.s_step)));
        }
        Ok(())
    }

    pub fn is_identity(&self) -> bool {
        self.s_matrix == Matrix3::identity()
    }

    /// Uniform grid over `[x_min, x_max]`, with `x = 0` always included.
    pub fn x_grid(&self) -> Vec<f64> {
        let n = self.x_points;
        let width = self.x_max - self.x_min;
        let mut g: Vec<f64> = (0..n).map(|k| self.x_min + width * k as f64 / (n - 1) as f64).collect();
        g.push(0.0);
        g.sort_by(f64::total_cmp);
        g.dedup();
        g
    }

    fn s_values(&self) -> Vec<f64> {
        let n = (1.0 / self.s_step).round() as usize;
        if ((n as f64) * self.s_step - 1.0).abs() < 1e-9 {
            (0..=n).map(|k| k as f64 / n as f64).collect()
        } else {
            let mut v: Vec<f64> = (0..).map(|k| k as f64 * self.s_step).take_while(|&s| s < 1.0).collect();
            v.push(1.0);
            v
        }
    }
}

fn require_leonov(p: &Parameters) -> Result<()> {
    if p.leonov_applicable() {
        Ok(())
    } else {
        Err(Error::AssumptionViolated { alpha_m1: p.alpha * p.m1 })
    }
}

/// Descending eigenvalues of the symmetrized `S J(u) S^-1`.
pub fn symmetrized_spectrum(p: &Parameters, u: &StateVector, s: &Matrix3) -> Result<SymmetricSpectrum> {
    if !(s.det().abs() > 1e-12) {
        return Err(Error::SingularS);
    }
    let s_inv = s.inverse().ok_or(Error::SingularS)?;
    let similar = *s * crate::model::jacobian(p, u) * s_inv;
    sym_eigenvalues(&similar.symmetric_part())
}

fn origin_spectrum(p: &Parameters, s: &Matrix3) -> Result<SymmetricSpectrum> {
    symmetrized_spectrum(p, &StateVector::ORIGIN, s)
}

/// Spectra along the x grid (they do not depend on y or z).
pub fn grid_spectra(p: &Parameters, cert: &CertificateConfig) -> Result<Vec<(f64, SymmetricSpectrum)>> {
    cert.validate()?;
    cert.x_grid()
        .into_iter()
        .map(|x| symmetrized_spectrum(p, &StateVector::new(x, 0.0, 0.0), &cert.s_matrix).map(|s| (x, s)))
        .collect()
}

fn grid_max(values: impl Iterator<Item = (f64, f64)>) -> (f64, f64) {
    values.fold((f64::NAN, f64::NEG_INFINITY), |best, (x, v)| if v > best.1 { (x, v) } else { best })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OriginDomination {
    pub holds: bool,
    /// `min over samples and j of l_j(0) - l_j(u)`; negative means violated.
    pub worst_margin: f64,
    pub worst_index: Option<usize>,
}

/// Checks `l_j(u) <= l_j(0)` (with [`DOMINATION_SLACK`]) for every sample.
pub fn check_origin_domination(p: &Parameters, samples: &[StateVector]) -> Result<OriginDomination> {
    require_leonov(p)?;
    let at_origin = origin_spectrum(p, &Matrix3::identity())?.0;
    let mut worst_margin = f64::INFINITY;
    let mut worst_index = None;
    for (i, u) in samples.iter().enumerate() {
        let here = symmetrized_spectrum(p, u, &Matrix3::identity())?.0;
        for j in 0..3 {
            let m = at_origin[j] - here[j];
            if m < worst_margin {
                worst_margin = m;
                worst_index = Some(i);
            }
        }
    }
    if samples.is_empty() {
        worst_margin = 0.0;
    }
    Ok(OriginDomination { holds: worst_margin >= -DOMINATION_SLACK, worst_margin, worst_index })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DimensionBound {
    pub value: f64,
    /// Grid point where the maximum was attained.
    pub attained_at_x: f64,
    /// True when the value comes from the exact `x = 0` reduction rather
    /// than a grid supremum.
    pub exact_reduction: bool,
}

/// Upper bound for the Lyapunov dimension of any compact invariant set:
/// Kaplan-Yorke of the symmetrized spectrum, maximized over phase space.
pub fn eigenvalue_dimension_bound(p: &Parameters, cert: &CertificateConfig) -> Result<DimensionBound> {
    require_leonov(p)?;
    cert.validate()?;
    if cert.is_identity() {
        let l0 = origin_spectrum(p, &cert.s_matrix)?;
        return Ok(DimensionBound { value: kaplan_yorke(&l0), attained_at_x: 0.0, exact_reduction: true });
    }
    let spectra = grid_spectra(p, cert)?;
    let (x, value) = grid_max(spectra.iter().map(|(x, s)| (*x, kaplan_yorke(s))));
    Ok(DimensionBound { value, attained_at_x: x, exact_reduction: false })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExactDimension {
    /// Kaplan-Yorke of the eigenvalues of `J(0)`; absent unless they are
    /// real and simple.
    pub value: Option<f64>,
    pub eigenvalues: CubicRoots,
    pub discriminant: f64,
    pub real_simple: bool,
    /// Symmetrized spectrum at the origin, for comparison.
    pub symmetrized: SymmetricSpectrum,
    /// Whether `eig J(0)` coincides with the symmetrized spectrum (to
    /// 1e-9 relative). They agree for normal `J(0)` only.
    pub matches_symmetrized: bool,
}

/// Exact Lyapunov dimension of invariant sets containing the origin
/// equilibrium, available when `J(0)` has simple real eigenvalues.
pub fn exact_dimension_at_origin(p: &Parameters) -> Result<ExactDimension> {
    let j0 = p.jacobian_at_origin();
    if !j0.is_finite() {
        return Err(Error::NonFinite("parameters"));
    }
    let roots = eigenvalues(&j0);
    let discriminant = char_discriminant(&j0);
    let symmetrized = sym_eigenvalues(&j0.symmetric_part())?;
    let (real_simple, value) = match roots {
        CubicRoots::ThreeReal(r) => {
            let scale = r.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            let sep = (r[0] - r[1]).min(r[1] - r[2]);
            let simple = discriminant > 0.0 && sep > 1e-9 * (1.0 + scale);
            (simple, simple.then(|| kaplan_yorke(&r)))
        }
        CubicRoots::OneReal { .. } => (false, None),
    };
    let rp = roots.real_parts();
    let tol = 1e-9 * (1.0 + symmetrized.0.iter().fold(0.0f64, |m, v| m.max(v.abs())));
    let matches_symmetrized = roots.all_real() && rp.iter().zip(symmetrized.0).all(|(a, b)| (a - b).abs() <= tol);
    Ok(ExactDimension { value, eigenvalues: roots, discriminant, real_simple, symmetrized, matches_symmetrized })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "outcome", rename_all = "kebab-case")]
pub enum CertificateOutcome {
    Certified {
        j: usize,
        /// Grid value of `s`; the certified bound is `j + s`.
        s: f64,
        bound: f64,
        /// Bisection estimate of where the supremum crosses zero, below `s`.
        threshold_s: f64,
        /// Grid supremum of `l_1 + ... + l_j + s l_{j+1}` at the winning `s`.
        sup_value: f64,
        /// Grid x attaining that supremum.
        sup_x: f64,
    },
    NoCertificate,
}

impl CertificateOutcome {
    pub fn bound(&self) -> Option<f64> {
        match self {
            CertificateOutcome::Certified { bound, .. } => Some(*bound),
            CertificateOutcome::NoCertificate => None,
        }
    }
}

fn weighted_sum(l: &[f64; 3], j: usize, s: f64) -> f64 {
    l[..j].iter().sum::<f64>() + s * l[j]
}

/// Smallest `j + s` (`j` in {1, 2}, `s` on the grid) for which the grid
/// supremum of `l_1 + ... + l_j + s l_{j+1}` is negative.
pub fn search_dimension_certificate(p: &Parameters, cert: &CertificateConfig) -> Result<CertificateOutcome> {
    let spectra = grid_spectra(p, cert)?;
    let sup = |j: usize, s: f64| grid_max(spectra.iter().map(|(x, l)| (*x, weighted_sum(&l.0, j, s))));
    let s_values = cert.s_values();
    for j in 1..=2 {
        let Some(k) = s_values.iter().position(|&s| sup(j, s).1 < 0.0) else {
            continue;
        };
        let s = s_values[k];
        let threshold_s = if k == 0 {
            s
        } else {
            let (mut lo, mut hi) = (s_values[k - 1], s);
            for _ in 0..60 {
                let mid = 0.5 * (lo + hi);
                if sup(j, mid).1 < 0.0 {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            hi
        };
        let (sup_x, sup_value) = sup(j, s);
        return Ok(CertificateOutcome::Certified { j, s, bound: j as f64 + s, threshold_s, sup_value, sup_x });
    }
    Ok(CertificateOutcome::NoCertificate)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Convergence {
    /// Every bounded solution tends to the set of equilibria.
    Converges,
    /// The sufficient condition fails; nothing is claimed.
    Inconclusive,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceVerdict {
    pub verdict: Convergence,
    /// `-sup(l_1 + l_2)`; positive iff the criterion holds.
    pub margin: f64,
    /// `l_1 + l_2` at the supremum.
    pub sum_top_two: f64,
    /// `trace - l_3` at the same point (equal to `sum_top_two` up to rounding).
    pub trace_minus_smallest: f64,
    pub sup_x: f64,
    pub exact_reduction: bool,
}

/// Global convergence criterion: `sup_u (l_1(u,S) + l_2(u,S)) < 0`.
pub fn convergence_certificate(p: &Parameters, cert: &CertificateConfig) -> Result<ConvergenceVerdict> {
    cert.validate()?;
    let (x, spectrum, exact_reduction) = if cert.is_identity() {
        require_leonov(p)?;
        (0.0, origin_spectrum(p, &cert.s_matrix)?, true)
    } else {
        let spectra = grid_spectra(p, cert)?;
        let (x, _) = grid_max(spectra.iter().map(|(x, l)| (*x, l.0[0] + l.0[1])));
        let l = spectra.iter().find(|(gx, _)| *gx == x).map(|(_, l)| *l).expect("grid point");
        (x, l, false)
    };
    let l = spectrum.0;
    let sum_top_two = l[0] + l[1];
    let trace_minus_smallest = spectrum.sum() - l[2];
    let verdict = if sum_top_two < 0.0 { Convergence::Converges } else { Convergence::Inconclusive };
    Ok(ConvergenceVerdict { verdict, margin: -sum_top_two, sum_top_two, trace_minus_smallest, sup_x: x, exact_reduction })
}

/// Which hypotheses held for the reported numbers.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Premises {
    pub alpha_m1_positive: bool,
    /// `x0 = 0`, so the origin is an equilibrium.
    pub origin_is_equilibrium: bool,
    pub jacobian_eigenvalues_real_simple: bool,
    pub jacobian_eigenvalues_match_symmetrized: bool,
    pub top_two_sum_negative: bool,
    pub s_is_identity: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnalyticReport {
    pub parameters: Parameters,
    /// Symmetrized spectrum at the origin.
    pub lambda0: SymmetricSpectrum,
    pub exact_dim: Option<f64>,
    pub bound_dim: f64,
    pub bound: DimensionBound,
    pub certificate: CertificateOutcome,
    pub converges: bool,
    pub convergence: ConvergenceVerdict,
    pub entropy_bound: f64,
    pub origin_eigenvalues: ExactDimension,
    pub premises: Premises,
    pub certificate_config: CertificateConfig,
}

/// Runs every analytic estimate. Requires `alpha * m1 > 0`.
pub fn analyze(p: &Parameters, cert: &CertificateConfig) -> Result<AnalyticReport> {
    require_leonov(p)?;
    cert.validate()?;
    let lambda0 = origin_spectrum(p, &cert.s_matrix)?;
    let origin_eigenvalues = exact_dimension_at_origin(p)?;
    let bound = eigenvalue_dimension_bound(p, cert)?;
    let certificate = search_dimension_certificate(p, cert)?;
    let convergence = convergence_certificate(p, cert)?;
    let entropy_bound = if cert.is_identity() {
        entropy_upper_bound(&lambda0)
    } else {
        grid_spectra(p, cert)?.iter().map(|(_, l)| entropy_upper_bound(l)).fold(0.0, f64::max)
    };
    let converges = convergence.verdict == Convergence::Converges;
    Ok(AnalyticReport {
        parameters: *p,
        lambda0,
        exact_dim: origin_eigenvalues.value,
        bound_dim: bound.value,
        bound,
        certificate,
        converges,
        convergence,
        entropy_bound,
        premises: Premises {
            alpha_m1_positive: true,
            origin_is_equilibrium: p.x0 == 0.0,
            jacobian_eigenvalues_real_simple: origin_eigenvalues.real_simple,
            jacobian_eigenvalues_match_symmetrized: origin_eigenvalues.matches_symmetrized,
            top_two_sum_negative: converges,
            s_is_identity: cert.is_identity(),
        },
        origin_eigenvalues,
        certificate_config: *cert,
    })
}
