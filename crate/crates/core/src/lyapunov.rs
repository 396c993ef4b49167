//! Kaplan-Yorke dimension of exponent spectra and its finite-time, set-level
//! and large-time (liminf) versions over a sampled invariant set.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{StateVector, System3};
use crate::ode::{drive, integrate_streaming, IntegratorConfig};
use crate::spectrum::{Exponents, OrderedExponents};
use crate::variational::finite_time_les_benettin_at;

/// Neumaier-compensated prefix sums.
fn prefix_sums(v: [f64; 3]) -> [f64; 3] {
    let mut out = [0.0; 3];
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for (i, x) in v.into_iter().enumerate() {
        let t = sum + x;
        if sum.abs() >= x.abs() {
            comp += (sum - t) + x;
        } else {
            comp += (x - t) + sum;
        }
        sum = t;
        out[i] = sum + comp;
    }
    out
}

/// Kaplan-Yorke dimension `j + (l_1 + ... + l_j) / |l_{j+1}|`, where `j` is
/// the largest `m` with a nonnegative partial sum `l_1 + ... + l_m`; 0 when
/// `j = 0` and 3 when `j = 3`.
pub fn kaplan_yorke<E: Exponents>(e: &E) -> f64 {
    // sorted again even though OrderedExponents already is; other Exponents
    // implementors make no ordering promise
    let v = OrderedExponents::new(e.exponents()).values();
    let sums = prefix_sums(v);
    let j = sums.iter().rposition(|&s| s >= 0.0).map_or(0, |i| i + 1);
    match j {
        0 => 0.0,
        3 => 3.0,
        _ => j as f64 + sums[j - 1] / v[j].abs(),
    }
}

/// Sum of the positive entries, an upper bound for entropy-type quantities
/// when fed a dominating spectrum.
pub fn entropy_upper_bound<E: Exponents>(e: &E) -> f64 {
    e.exponents().iter().map(|v| v.max(0.0)).sum()
}

/// Finite-time local dimension at `u0`: Kaplan-Yorke of the Benettin
/// exponents at horizon `t`.
pub fn local_dimension<S: System3>(sys: &S, u0: StateVector, t: f64, cfg: &IntegratorConfig) -> Result<f64> {
    let spec = crate::variational::finite_time_les_benettin(sys, u0, t, cfg)?;
    Ok(kaplan_yorke(&spec.les))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SampleSource {
    TrajectorySampling,
    UserSupplied,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeedFailure {
    pub seed: StateVector,
    pub error: String,
}

/// Finite set of points standing in for an invariant set.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AttractorSample {
    pub points: Vec<StateVector>,
    pub transient_skipped: f64,
    pub source: SampleSource,
    #[serde(default)]
    pub failures: Vec<SeedFailure>,
}

impl AttractorSample {
    pub fn user_supplied(points: Vec<StateVector>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::EmptySample);
        }
        if points.iter().any(|p| !p.is_finite()) {
            return Err(Error::NonFinite("attractor sample point"));
        }
        Ok(AttractorSample { points, transient_skipped: 0.0, source: SampleSource::UserSupplied, failures: Vec::new() })
    }

    /// Every `k`-th point so that at most `max_points` remain.
    pub fn thinned(&self, max_points: usize) -> AttractorSample {
        let n = self.points.len();
        if max_points == 0 || n <= max_points {
            return self.clone();
        }
        let step = n.div_ceil(max_points);
        AttractorSample { points: self.points.iter().step_by(step).copied().collect(), ..self.clone() }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SamplingConfig {
    pub t_transient: f64,
    pub t_sample: f64,
    pub stride: f64,
}

impl Default for SamplingConfig {
    fn default() -> Self {
        SamplingConfig { t_transient: 100.0, t_sample: 100.0, stride: 0.1 }
    }
}

/// Integrates every seed, drops `[0, t_transient]` and keeps states every
/// `stride` over the next `t_sample`. Seeds that diverge are recorded in
/// `failures` instead of failing the whole sample.
pub fn sample_attractor<S: System3>(
    sys: &S,
    seeds: &[StateVector],
    sampling: &SamplingConfig,
    cfg: &IntegratorConfig,
) -> Result<AttractorSample> {
    let SamplingConfig { t_transient, t_sample, stride } = *sampling;
    if !(t_transient > 0.0 && t_sample > 0.0 && stride > 0.0) {
        return Err(Error::InvalidArgument("t_transient, t_sample and stride must be positive".into()));
    }
    let sample_cfg = IntegratorConfig { sample_stride: stride, ..*cfg };
    let per_seed: Vec<Result<Vec<StateVector>>> = seeds
        .par_iter()
        .map(|&seed| {
            let start = drive(sys, seed, t_transient, &[], cfg, false, |_| Ok(()))?;
            let mut pts = Vec::new();
            integrate_streaming(sys, start, t_sample, &sample_cfg, |t, u| {
                if t > 0.0 {
                    pts.push(*u);
                }
            })?;
            Ok(pts)
        })
        .collect();

    let mut points = Vec::new();
    let mut failures = Vec::new();
    for (seed, res) in seeds.iter().zip(per_seed) {
        match res {
            Ok(p) => points.extend(p),
            Err(e) => failures.push(SeedFailure { seed: *seed, error: e.to_string() }),
        }
    }
    if points.is_empty() {
        return Err(Error::EmptySample);
    }
    Ok(AttractorSample { points, transient_skipped: t_transient, source: SampleSource::TrajectorySampling, failures })
}

/// Local result at one sample point.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PointDimension {
    pub point: StateVector,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub les: Option<[f64; 3]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dim: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LadderRung {
    pub t: f64,
    /// Set dimension: maximum local dimension at this horizon.
    pub dim: f64,
    /// Minimum of this and all later rungs.
    pub tail_min: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DimensionReport {
    pub horizon: f64,
    /// Per-point results at `horizon`.
    pub points: Vec<PointDimension>,
    pub max: f64,
    /// Index into `points` where `max` is attained.
    pub argmax: usize,
    /// Successful local dimensions at `horizon`, ascending.
    pub distribution: Vec<f64>,
    pub ladder: Vec<LadderRung>,
    /// Infimum of the ladder, a finite-horizon proxy for the liminf; not the
    /// limit itself.
    pub liminf_proxy: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub analytic_bound: Option<f64>,
}

impl DimensionReport {
    pub fn excluded(&self) -> usize {
        self.points.iter().filter(|p| p.dim.is_none()).count()
    }
}

/// Set dimensions over `horizons` (non-decreasing, positive) from one
/// integration per sample point. The report's per-point data is at the last
/// horizon. Points whose trajectory fails are excluded; only an all-failed
/// sample is an error.
pub fn dimension_report<S: System3>(
    sys: &S,
    sample: &AttractorSample,
    horizons: &[f64],
    cfg: &IntegratorConfig,
) -> Result<DimensionReport> {
    if sample.points.is_empty() {
        return Err(Error::EmptySample);
    }
    if horizons.is_empty() || horizons.iter().any(|&t| !(t > 0.0)) || horizons.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::InvalidArgument("horizons must be positive and non-decreasing".into()));
    }
    cfg.validate()?;
    let per_point: Vec<Result<Vec<[f64; 3]>>> = sample
        .points
        .par_iter()
        .map(|&u0| {
            finite_time_les_benettin_at(sys, u0, horizons, cfg).map(|v| v.into_iter().map(|s| s.les.values()).collect())
        })
        .collect();

    let ok: Vec<&Vec<[f64; 3]>> = per_point.iter().filter_map(|r| r.as_ref().ok()).collect();
    if ok.is_empty() {
        if let Some(Err(e)) = per_point.iter().find(|r| matches!(r, Err(e) if !e.is_numerical())) {
            return Err(e.clone());
        }
        return Err(Error::EmptySample);
    }

    let mut dims: Vec<f64> = horizons
        .iter()
        .enumerate()
        .map(|(k, _)| ok.iter().map(|v| kaplan_yorke(&v[k])).fold(f64::NEG_INFINITY, f64::max))
        .collect();
    let mut ladder: Vec<LadderRung> = Vec::with_capacity(dims.len());
    let mut tail = f64::INFINITY;
    for (k, &t) in horizons.iter().enumerate().rev() {
        tail = tail.min(dims[k]);
        ladder.push(LadderRung { t, dim: dims[k], tail_min: tail });
    }
    ladder.reverse();

    let last = horizons.len() - 1;
    let points: Vec<PointDimension> = sample
        .points
        .iter()
        .zip(&per_point)
        .map(|(&point, r)| match r {
            Ok(v) => PointDimension { point, les: Some(v[last]), dim: Some(kaplan_yorke(&v[last])), error: None },
            Err(e) => PointDimension { point, les: None, dim: None, error: Some(e.to_string()) },
        })
        .collect();
    let max = dims.pop().expect("nonempty horizons");
    let argmax = points.iter().position(|p| p.dim == Some(max)).expect("max is attained");
    let mut distribution: Vec<f64> = points.iter().filter_map(|p| p.dim).collect();
    distribution.sort_by(f64::total_cmp);

    Ok(DimensionReport {
        horizon: horizons[last],
        points,
        max,
        argmax,
        distribution,
        liminf_proxy: ladder[0].tail_min,
        ladder,
        analytic_bound: None,
    })
}

/// Finite-time set dimension: the largest local dimension over the sample.
pub fn set_dimension<S: System3>(sys: &S, sample: &AttractorSample, t: f64, cfg: &IntegratorConfig) -> Result<DimensionReport> {
    dimension_report(sys, sample, &[t], cfg)
}

/// `(t, set dimension at t)` for every horizon.
pub fn dimension_ladder<S: System3>(
    sys: &S,
    sample: &AttractorSample,
    horizons: &[f64],
    cfg: &IntegratorConfig,
) -> Result<Vec<LadderRung>> {
    dimension_report(sys, sample, horizons, cfg).map(|r| r.ladder)
}

pub const DEFAULT_LADDER: [f64; 7] = [2.0, 5.0, 10.0, 20.0, 50.0, 100.0, 200.0];

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn boundary_cases() {
        assert_eq!(kaplan_yorke(&[-1.0, -2.0, -3.0]), 0.0);
        assert_eq!(kaplan_yorke(&[3.0, 2.0, 1.0]), 3.0);
    }

    #[test]
    fn interior_value() {
        assert_eq!(kaplan_yorke(&[1.0, -0.5, -2.0]), 2.25);
        assert_eq!(kaplan_yorke(&[2.0, -1.0, -4.0]), 2.25);
    }

    #[test]
    fn zero_partial_sum_is_included() {
        // l1 + l2 = 0 exactly: j = 2 and d = 2
        assert_eq!(kaplan_yorke(&[1.0, -1.0, -3.0]), 2.0);
        assert_eq!(kaplan_yorke(&[0.0, -1.0, -3.0]), 1.0);
    }

    #[test]
    fn unsorted_input_is_sorted() {
        assert_eq!(kaplan_yorke(&[-2.0, 1.0, -0.5]), 2.25);
    }

    #[test]
    fn entropy_bound() {
        assert_eq!(entropy_upper_bound(&[-1.0, -2.0, -5.0]), 0.0);
        assert_eq!(entropy_upper_bound(&[2.0, 1.0, -5.0]), 3.0);
    }

    #[test]
    fn thinning() {
        let pts: Vec<_> = (0..10).map(|i| StateVector::new(i as f64, 0.0, 0.0)).collect();
        let s = AttractorSample::user_supplied(pts).unwrap();
        assert_eq!(s.thinned(3).points.len(), 3);
        assert_eq!(s.thinned(0).points.len(), 10);
        assert!(AttractorSample::user_supplied(vec![]).is_err());
    }
}
