//! Self-excited versus hidden attractors.
//!
//! An attractor is self-excited when its basin meets every neighborhood of
//! some equilibrium. Numerically we can only ever exhibit such a
//! neighborhood point, so the negative outcome is reported as
//! [`Verdict::HiddenCandidate`] and always carries a caveat.

use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg3::{eigenvalues, CubicRoots, Matrix3};
use crate::lyapunov::AttractorSample;
use crate::model::{Equilibrium, EquilibriumLabel, StateVector, System3};
use crate::ode::{integrate_streaming, IntegratorConfig, Trajectory};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ClassificationConfig {
    pub ball_radius: f64,
    /// Low-discrepancy sphere points per equilibrium, in addition to the
    /// unstable eigenvector directions.
    pub probes_per_equilibrium: usize,
    pub t_transient: f64,
    pub t_observe: f64,
    pub attractor_match_distance: f64,
    pub rng_seed: u64,
    /// Spacing of the observed states after the transient.
    pub observe_stride: f64,
}

impl Default for ClassificationConfig {
    fn default() -> Self {
        ClassificationConfig {
            ball_radius: 1e-2,
            probes_per_equilibrium: 64,
            t_transient: 100.0,
            t_observe: 50.0,
            attractor_match_distance: 0.1,
            rng_seed: 0,
            observe_stride: 0.05,
        }
    }
}

impl ClassificationConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = |v: f64| v > 0.0 && v.is_finite();
        if !positive(self.ball_radius) {
            return Err(Error::InvalidArgument(format!("ball_radius must be positive, got {}", self.ball_radius)));
        }
        if self.probes_per_equilibrium < 1 {
            return Err(Error::InvalidArgument("probes_per_equilibrium must be at least 1".into()));
        }
        if !(self.t_transient >= 0.0 && self.t_transient.is_finite()) || !positive(self.t_observe) {
            return Err(Error::InvalidArgument("t_transient must be >= 0 and t_observe > 0".into()));
        }
        if !positive(self.attractor_match_distance) || !positive(self.observe_stride) {
            return Err(Error::InvalidArgument("attractor_match_distance and observe_stride must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProbeKind {
    /// `+v` or `-v` for a real unstable eigenvector `v` of `J(u_eq)`.
    UnstableDirection,
    Sphere,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "outcome", rename_all = "kebab-case")]
pub enum ProbeOutcome {
    /// Came within the match distance of the sample after the transient
    /// and stayed bounded.
    Reached { distance: f64, time: f64 },
    Diverged { time: f64 },
    OtherAttractor { final_state: StateVector },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProbeRecord {
    pub index: usize,
    pub kind: ProbeKind,
    pub start: StateVector,
    pub outcome: ProbeOutcome,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EquilibriumProbes {
    pub equilibrium: Equilibrium,
    pub probes: Vec<ProbeRecord>,
}

impl EquilibriumProbes {
    pub fn first_match(&self) -> Option<usize> {
        self.probes.iter().position(|p| matches!(p.outcome, ProbeOutcome::Reached { .. }))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "kebab-case")]
pub enum Verdict {
    SelfExcited { label: EquilibriumLabel, equilibrium_index: usize, probe_index: usize },
    HiddenCandidate,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassificationVerdict {
    pub verdict: Verdict,
    pub equilibria: Vec<EquilibriumProbes>,
    /// Set whenever the verdict is not a positive certificate.
    pub caveat: bool,
}

impl ClassificationVerdict {
    /// The probe that justifies a `SelfExcited` verdict.
    pub fn witness(&self) -> Option<&ProbeRecord> {
        match self.verdict {
            Verdict::SelfExcited { equilibrium_index, probe_index, .. } => {
                self.equilibria.get(equilibrium_index)?.probes.get(probe_index)
            }
            Verdict::HiddenCandidate => None,
        }
    }
}

/// Radical inverse of `k` in `base`.
fn radical_inverse(mut k: u64, base: u64) -> f64 {
    let inv = 1.0 / base as f64;
    let mut f = inv;
    let mut r = 0.0;
    while k > 0 {
        r += f * (k % base) as f64;
        k /= base;
        f *= inv;
    }
    r
}

/// First `n` points of a randomly shifted Halton(2,3) sequence mapped to the
/// unit sphere. Longer sequences extend shorter ones.
pub fn sphere_points(n: usize, seed: u64) -> Vec<[f64; 3]> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (s1, s2): (f64, f64) = (rng.random(), rng.random());
    (0..n as u64)
        .map(|k| {
            let u = (radical_inverse(k + 1, 2) + s1).fract();
            let v = (radical_inverse(k + 1, 3) + s2).fract();
            let z = 1.0 - 2.0 * u;
            let r = (1.0 - z * z).max(0.0).sqrt();
            let phi = std::f64::consts::TAU * v;
            [r * phi.cos(), r * phi.sin(), z]
        })
        .collect()
}

/// Unit null vector of `m - lambda I`, via the largest cross product of rows.
fn eigenvector(m: &Matrix3, lambda: f64) -> Option<[f64; 3]> {
    let a = *m - Matrix3::identity().scale(lambda);
    let rows = a.0;
    let cross = |p: [f64; 3], q: [f64; 3]| [p[1] * q[2] - p[2] * q[1], p[2] * q[0] - p[0] * q[2], p[0] * q[1] - p[1] * q[0]];
    let best = [cross(rows[0], rows[1]), cross(rows[0], rows[2]), cross(rows[1], rows[2])]
        .into_iter()
        .max_by(|p, q| crate::linalg3::norm(*p).total_cmp(&crate::linalg3::norm(*q)))?;
    let n = crate::linalg3::norm(best);
    (n > 1e-300).then(|| best.map(|c| c / n))
}

/// Unit eigenvectors for the real positive eigenvalues of `j`, by
/// decreasing eigenvalue.
pub fn unstable_directions(j: &Matrix3) -> Vec<[f64; 3]> {
    let mut roots: Vec<f64> = match eigenvalues(j) {
        CubicRoots::ThreeReal(r) => r.to_vec(),
        CubicRoots::OneReal { root, .. } => vec![root],
    };
    roots.retain(|&l| l > 0.0);
    roots.sort_by(|a, b| b.total_cmp(a));
    roots.dedup();
    roots.into_iter().filter_map(|l| eigenvector(j, l)).collect()
}

/// Probe start points around `eq`: `+-v` for unstable directions, then the
/// shifted sphere sequence, all at distance `ball_radius`.
pub fn probe_starts<S: System3>(sys: &S, eq: &StateVector, cfg: &ClassificationConfig) -> Vec<(ProbeKind, StateVector)> {
    let r = cfg.ball_radius;
    let offset = |d: [f64; 3], s: f64| *eq + StateVector::from_array(d).scale(s * r);
    let mut starts = Vec::new();
    for v in unstable_directions(&sys.jacobian(eq)) {
        starts.push((ProbeKind::UnstableDirection, offset(v, 1.0)));
        starts.push((ProbeKind::UnstableDirection, offset(v, -1.0)));
    }
    for d in sphere_points(cfg.probes_per_equilibrium, cfg.rng_seed) {
        starts.push((ProbeKind::Sphere, offset(d, 1.0)));
    }
    starts
}

/// Uniform-grid index over the sample for nearest-neighbor queries within a
/// fixed radius.
struct PointIndex<'a> {
    points: &'a [StateVector],
    cell: f64,
    buckets: HashMap<[i64; 3], Vec<usize>>,
}

impl<'a> PointIndex<'a> {
    fn new(points: &'a [StateVector], cell: f64) -> Self {
        let mut buckets: HashMap<[i64; 3], Vec<usize>> = HashMap::new();
        for (i, p) in points.iter().enumerate() {
            buckets.entry(Self::key(p, cell)).or_default().push(i);
        }
        PointIndex { points, cell, buckets }
    }

    fn key(p: &StateVector, cell: f64) -> [i64; 3] {
        p.to_array().map(|c| (c / cell).floor() as i64)
    }

    /// Distance to the nearest sample point, if one lies within `cell`.
    fn nearest_within(&self, q: &StateVector) -> Option<f64> {
        let k = Self::key(q, self.cell);
        let mut best = f64::INFINITY;
        for dx in -1..=1 {
            for dy in -1..=1 {
                for dz in -1..=1 {
                    if let Some(ids) = self.buckets.get(&[k[0] + dx, k[1] + dy, k[2] + dz]) {
                        for &i in ids {
                            best = best.min(self.points[i].distance(q));
                        }
                    }
                }
            }
        }
        (best <= self.cell).then_some(best)
    }
}

fn observe_cfg(integ: &IntegratorConfig, cfg: &ClassificationConfig) -> IntegratorConfig {
    IntegratorConfig { sample_stride: cfg.observe_stride, ..*integ }
}

fn run_probe<S: System3>(
    sys: &S,
    start: StateVector,
    index: &PointIndex<'_>,
    cfg: &ClassificationConfig,
    integ: &IntegratorConfig,
) -> ProbeOutcome {
    let t_end = cfg.t_transient + cfg.t_observe;
    let mut best: Option<(f64, f64)> = None;
    let res = integrate_streaming(sys, start, t_end, &observe_cfg(integ, cfg), |t, u| {
        if t >= cfg.t_transient {
            if let Some(d) = index.nearest_within(u) {
                if best.is_none_or(|(bd, _)| d < bd) {
                    best = Some((d, t));
                }
            }
        }
    });
    match res {
        Err(Error::BlowUp { time }) | Err(Error::Overflow { time }) | Err(Error::StepUnderflow { time }) => {
            ProbeOutcome::Diverged { time }
        }
        Err(_) => ProbeOutcome::Diverged { time: f64::NAN },
        Ok(final_state) => match best {
            Some((distance, time)) => ProbeOutcome::Reached { distance, time },
            None => ProbeOutcome::OtherAttractor { final_state },
        },
    }
}

/// Probes the `ball_radius` neighborhood of every equilibrium and reports
/// whether some probe lands on `sample`.
///
/// All probes run (in parallel); the verdict is taken from the first match in
/// (equilibrium, probe) order, so it does not depend on scheduling.
pub fn classify<S: System3>(
    sys: &S,
    sample: &AttractorSample,
    equilibria: &[Equilibrium],
    cfg: &ClassificationConfig,
    integ: &IntegratorConfig,
) -> Result<ClassificationVerdict> {
    if sample.points.is_empty() {
        return Err(Error::EmptySample);
    }
    cfg.validate()?;
    integ.validate()?;
    let index = PointIndex::new(&sample.points, cfg.attractor_match_distance);

    let jobs: Vec<(usize, usize, ProbeKind, StateVector)> = equilibria
        .iter()
        .enumerate()
        .flat_map(|(e, eq)| {
            probe_starts(sys, &eq.point, cfg).into_iter().enumerate().map(move |(k, (kind, s))| (e, k, kind, s))
        })
        .collect();
    let outcomes: Vec<ProbeOutcome> = jobs.par_iter().map(|&(_, _, _, s)| run_probe(sys, s, &index, cfg, integ)).collect();

    let mut report: Vec<EquilibriumProbes> =
        equilibria.iter().map(|eq| EquilibriumProbes { equilibrium: *eq, probes: Vec::new() }).collect();
    for ((e, k, kind, start), outcome) in jobs.into_iter().zip(outcomes) {
        report[e].probes.push(ProbeRecord { index: k, kind, start, outcome });
    }

    let verdict = report
        .iter()
        .enumerate()
        .find_map(|(e, probes)| {
            probes.first_match().map(|k| Verdict::SelfExcited {
                label: probes.equilibrium.label,
                equilibrium_index: e,
                probe_index: k,
            })
        })
        .unwrap_or(Verdict::HiddenCandidate);
    let caveat = verdict == Verdict::HiddenCandidate;
    Ok(ClassificationVerdict { verdict, equilibria: report, caveat })
}

/// Full sampled path of one probe, for plotting.
pub fn probe_trajectory<S: System3>(
    sys: &S,
    start: StateVector,
    cfg: &ClassificationConfig,
    integ: &IntegratorConfig,
) -> Result<Trajectory> {
    let mut samples = Vec::new();
    integrate_streaming(sys, start, cfg.t_transient + cfg.t_observe, &observe_cfg(integ, cfg), |t, u| samples.push((t, *u)))?;
    Ok(Trajectory { samples })
}
