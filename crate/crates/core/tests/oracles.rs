mod common;

use common::*;
use memdim_core::analytic::{
    eigenvalue_dimension_bound, exact_dimension_at_origin, grid_spectra, search_dimension_certificate,
    symmetrized_spectrum, CertificateConfig, CertificateOutcome,
};
use memdim_core::attractors::{classify, ClassificationConfig, Verdict};
use memdim_core::linalg3::{eigenvalues, qr_positive, singular_values, sym_eigenvalues};
use memdim_core::lyapunov::{dimension_ladder, local_dimension, sample_attractor, set_dimension};
use memdim_core::model::{equilibria, jacobian, vector_field, EquilibriumLabel};
use memdim_core::variational::{
    finite_time_les_benettin, finite_time_les_svd, flow, fundamental_matrix, integrate, tangent_flow,
};
use memdim_core::*;

fn linear_stable() -> Parameters {
    Parameters::new(1.0, -1.0, 1.0, -1.0, 0.0, 0.0)
}

#[test]
fn jacobian_matches_central_differences() {
    let mut r = rng(11);
    for _ in 0..100 {
        let p = random_dissipative_parameters(&mut r);
        let u = random_state(&mut r, 3.0);
        let v = random_state(&mut r, 1.0);
        let h = 1e-6;
        let plus = vector_field(&p, &(u + v.scale(h)));
        let minus = vector_field(&p, &(u - v.scale(h)));
        let fd = (plus - minus).scale(0.5 / h);
        let jv = StateVector::from_array(jacobian(&p, &u).mul_vec(v.to_array()));
        let rel = fd.distance(&jv) / jv.norm().max(1.0);
        assert!(rel < 1e-5, "rel {rel} at {u:?}");
        let full = fd_jacobian(&p, &u, h);
        assert!((full - jacobian(&p, &u)).max_abs() < 1e-5 * (1.0 + jacobian(&p, &u).max_abs()));
    }
}

#[test]
fn offset_equilibria_have_small_residual() {
    let p = Parameters::new(10.0, 1.0, 1.0, 1.5, 0.2, 0.1);
    let eqs = equilibria(&p, 1e-10).unwrap();
    assert!(!eqs.is_empty());
    for e in &eqs {
        assert!(vector_field(&p, &e.point).norm() < 1e-10);
    }
}

#[test]
fn symmetric_eigenvalues_match_bisection() {
    let mut r = rng(1);
    for _ in 0..100 {
        let m = random_symmetric(&mut r, 5.0);
        let got = sym_eigenvalues(&m).unwrap().0;
        let want = bisection_eigenvalues(&m);
        for (g, w) in got.iter().zip(want) {
            assert!((g - w).abs() < 1e-10, "{got:?} vs {want:?}");
        }
    }
}

#[test]
fn qr_reconstructs_and_singular_values_match_gram_oracle() {
    let mut r = rng(2);
    for _ in 0..100 {
        let m = random_matrix(&mut r, 3.0);
        let (q, rr) = qr_positive(&m).unwrap();
        assert!((q * rr - m).frobenius_norm() < 1e-13 * m.frobenius_norm());
        let sv = singular_values(&m);
        let gram_eigs = bisection_eigenvalues(&m.gram());
        for (s, l) in sv.iter().zip(gram_eigs) {
            assert!((s - l.max(0.0).sqrt()).abs() < 1e-8 * sv[0], "{sv:?} vs {gram_eigs:?}");
        }
    }
}

#[test]
fn linear_flow_matches_matrix_exponential() {
    let p = linear_stable();
    let cfg = IntegratorConfig::default();
    let u0 = StateVector::new(0.7, -0.2, 0.4);
    let end = flow(&p, u0, 10.0, &cfg).unwrap();
    let want = StateVector::from_array(expm(&p.jacobian_at_origin().scale(10.0)).mul_vec(u0.to_array()));
    assert!(end.distance(&want) < 1e-8 * want.norm(), "{end:?} vs {want:?}");

    let phi = fundamental_matrix(&p, u0, 5.0, &cfg).unwrap();
    let e = expm(&p.jacobian_at_origin().scale(5.0));
    assert!((phi - e).max_abs() < 1e-8 * e.max_abs());
}

#[test]
fn liouville_formula_along_chaotic_trajectory() {
    let p = Parameters::DOUBLE_SCROLL;
    // the RK4 tangent map matches exp(integral of trace) to O(dt^4)
    let cfg = IntegratorConfig { dt: 2.5e-4, sample_stride: 2.5e-4, ..Default::default() };
    let u0 = StateVector::new(0.1, 0.0, 0.0);
    let t = 5.0;
    let f = tangent_flow(&p, u0, t, &cfg).unwrap();
    // composite Simpson on the sampled trajectory, independent of the RK weights
    let traj = integrate(&p, u0, t, &cfg).unwrap();
    let tr: Vec<f64> = traj.samples.iter().map(|(_, u)| jacobian(&p, u).trace()).collect();
    let n = tr.len() - 1;
    assert_eq!(n % 2, 0);
    let h = t / n as f64;
    let mut integral = tr[0] + tr[n];
    for (k, v) in tr.iter().enumerate().take(n).skip(1) {
        integral += if k % 2 == 1 { 4.0 * v } else { 2.0 * v };
    }
    integral *= h / 3.0;
    // det of the accumulated matrix loses digits to cancellation once
    // sigma_1 grows, so the per-step determinant product is used as well
    let det = f.log_abs_det.exp();
    assert!((det / integral.exp() - 1.0).abs() < 1e-8, "det {det} vs {}", integral.exp());
    assert!((f.matrix.det() / det - 1.0).abs() < 1e-6, "{} vs {det}", f.matrix.det());
}

#[test]
fn linear_exponents_converge_to_eigenvalues() {
    let cfg = IntegratorConfig::default();
    for (m0, gamma) in [(3.0, 0.5), (0.5, 2.0), (2.0, 3.0)] {
        let p = Parameters::new(1.0, 1.0, gamma, m0, 0.0, 0.0);
        let want = eigenvalues(&p.jacobian_at_origin()).real_parts();
        let got = finite_time_les_benettin(&p, StateVector::ORIGIN, 50.0, &cfg).unwrap().les.values();
        for (g, w) in got.iter().zip(want) {
            assert!((g - w).abs() < 1e-3, "{got:?} vs {want:?}");
        }
    }
}

#[test]
fn non_normal_linear_exponents_converge_slowly() {
    // eig J0 real and simple, J0 not normal: the error decays like 1/t
    let p = Parameters::new(2.0, 0.5, 3.0, 1.5, 0.0, 0.0);
    let e = exact_dimension_at_origin(&p).unwrap();
    assert!(e.real_simple && !e.matches_symmetrized);
    let want = e.eigenvalues.real_parts();
    let cfg = IntegratorConfig::default();
    let errs: Vec<f64> = [20.0, 200.0]
        .iter()
        .map(|&t| {
            let got = finite_time_les_benettin(&p, StateVector::ORIGIN, t, &cfg).unwrap().les.values();
            got.iter().zip(want).map(|(g, w)| (g - w).abs()).fold(0.0, f64::max)
        })
        .collect();
    assert!(errs[1] < errs[0] && errs[1] < 1e-2, "{errs:?}");
}

#[test]
fn routes_agree_on_chaotic_trajectories() {
    let p = Parameters::DOUBLE_SCROLL;
    let cfg = IntegratorConfig::default();
    let mut r = rng(4);
    for _ in 0..5 {
        let u0 = random_state(&mut r, 1.0);
        let a = finite_time_les_benettin(&p, u0, 20.0, &cfg).unwrap().les.values();
        let b = finite_time_les_svd(&p, u0, 20.0, &cfg).unwrap().les.values();
        for (x, y) in a.iter().zip(b) {
            assert!((x - y).abs() < 1e-6, "{a:?} vs {b:?}");
        }
    }
}

#[test]
fn stable_linear_local_dimension_is_zero() {
    let d = local_dimension(&linear_stable(), StateVector::new(1.0, 0.0, 0.0), 200.0, &Default::default()).unwrap();
    assert_eq!(d, 0.0);
}

#[test]
fn chaotic_local_dimension_between_two_and_bound() {
    let p = Parameters::DOUBLE_SCROLL;
    let cfg = IntegratorConfig::default();
    let on_attractor = flow(&p, StateVector::new(0.1, 0.0, 0.0), 100.0, &cfg).unwrap();
    let d = local_dimension(&p, on_attractor, 200.0, &cfg).unwrap();
    let bound = eigenvalue_dimension_bound(&p, &Default::default()).unwrap().value;
    assert!(d > 2.0 && d < 3.0 && d <= bound, "d {d} bound {bound}");
}

#[test]
fn periodic_orbit_samples_recur() {
    // a stable limit cycle (leading exponent near zero, the rest negative)
    let p = Parameters::new(10.0, -16.0, 0.2, 1.1, 1.0 / 16.0, 0.0);
    let cfg = IntegratorConfig::default();
    let sampling = SamplingConfig { t_transient: 200.0, t_sample: 50.0, stride: 0.01 };
    let sample = sample_attractor(&p, &[StateVector::new(0.1, 0.0, 0.0)], &sampling, &cfg).unwrap();
    let last = *sample.points.last().unwrap();
    let later = integrate(&p, last, 20.0, &IntegratorConfig { sample_stride: 0.01, ..cfg }).unwrap();
    for (_, u) in later.samples.iter().skip(1) {
        let d = sample.points.iter().map(|q| q.distance(u)).fold(f64::INFINITY, f64::min);
        assert!(d < 0.05, "point {u:?} is {d} away from the sampled orbit");
    }
}

#[test]
fn set_dimension_peaks_at_origin_equilibrium() {
    // J0 symmetric with simple real eigenvalues, origin unstable
    let p = Parameters::new(1.0, 1.0, 3.0, 2.0, 1.0, 0.0);
    let exact = exact_dimension_at_origin(&p).unwrap().value.unwrap();
    let eqs: Vec<StateVector> = equilibria(&p, 1e-10).unwrap().iter().map(|e| e.point).collect();
    assert_eq!(eqs.len(), 3);
    let sample = AttractorSample::user_supplied(eqs.clone()).unwrap();
    let report = set_dimension(&p, &sample, 100.0, &Default::default()).unwrap();
    assert!((report.max - exact).abs() < 0.05, "{} vs {exact}", report.max);
    assert_eq!(report.points[report.argmax].point, StateVector::ORIGIN);
}

#[test]
fn stable_ladders_decrease() {
    let cfg = IntegratorConfig::default();
    let convergent = Parameters::new(0.5, -1.0, 2.0, 0.5, 1.0, 0.0);
    let sample = AttractorSample::user_supplied(vec![StateVector::new(1.0, 1.0, 1.0)]).unwrap();
    let ladder = dimension_ladder(&convergent, &sample, &[2.0, 10.0, 50.0, 200.0], &cfg).unwrap();
    assert_eq!(ladder.last().unwrap().dim, 0.0);

    // normal J0 with all-negative spectrum
    let p = Parameters::new(1.0, 1.0, 3.0, -1.0, 0.0, 0.0);
    assert!(eigenvalues(&p.jacobian_at_origin()).real_parts()[0] < 0.0);
    let sample = AttractorSample::user_supplied(vec![StateVector::new(0.3, -0.2, 0.5)]).unwrap();
    let ladder = dimension_ladder(&p, &sample, &memdim_core::lyapunov::DEFAULT_LADDER, &cfg).unwrap();
    for w in ladder.windows(2) {
        assert!(w[0].dim + 1e-3 >= w[1].dim, "{ladder:?}");
    }
    assert_eq!(ladder.last().unwrap().dim, 0.0);
}

#[test]
fn diagonal_similarity_preserves_trace() {
    let mut r = rng(5);
    for _ in 0..100 {
        let p = random_dissipative_parameters(&mut r);
        let u = random_state(&mut r, 3.0);
        let s = Matrix3::diag([uniform(&mut r, 0.2, 5.0), uniform(&mut r, -5.0, -0.2), uniform(&mut r, 0.2, 5.0)]);
        let l = symmetrized_spectrum(&p, &u, &s).unwrap();
        let tr = jacobian(&p, &u).trace();
        assert!((l.sum() - tr).abs() < 1e-12 * (1.0 + tr.abs() + l.0[0].abs()), "{} vs {tr}", l.sum());
    }
}

#[test]
fn grid_suprema_sit_at_zero_for_identity_s() {
    let mut r = rng(6);
    let cert = CertificateConfig { x_points: 401, s_step: 1e-2, ..Default::default() };
    for _ in 0..20 {
        let p = random_dissipative_parameters(&mut r);
        let spectra = grid_spectra(&p, &cert).unwrap();
        let at_zero = spectra.iter().find(|(x, _)| *x == 0.0).unwrap().1;
        let ky0 = kaplan_yorke(&at_zero);
        assert!(spectra.iter().all(|(_, l)| kaplan_yorke(l) <= ky0));
        let eig_bound = eigenvalue_dimension_bound(&p, &cert).unwrap().value;
        assert_eq!(eig_bound, ky0);
        match search_dimension_certificate(&p, &cert).unwrap() {
            CertificateOutcome::Certified { bound, sup_x, .. } => {
                assert!(bound >= eig_bound - cert.s_step, "{bound} < {eig_bound}");
                assert_eq!(sup_x, 0.0);
            }
            CertificateOutcome::NoCertificate => assert!(eig_bound >= 3.0 - cert.s_step),
        }
    }
}

#[test]
fn unstable_manifold_of_origin_reaches_stable_equilibrium() {
    let p = Parameters::new(0.5, -1.0, 2.0, 0.5, 1.0, 0.0);
    let eqs = equilibria(&p, 1e-10).unwrap();
    let origin: Vec<_> = eqs.iter().filter(|e| e.label == EquilibriumLabel::Origin).copied().collect();
    let plus = eqs.iter().find(|e| e.label == EquilibriumLabel::Plus).unwrap();
    let sample = AttractorSample::user_supplied(vec![plus.point]).unwrap();
    let cfg = ClassificationConfig { probes_per_equilibrium: 8, t_transient: 100.0, t_observe: 10.0, ..Default::default() };
    let v = classify(&p, &sample, &origin, &cfg, &Default::default()).unwrap();
    assert!(matches!(v.verdict, Verdict::SelfExcited { label: EquilibriumLabel::Origin, .. }), "{:?}", v.verdict);
    assert!(!v.caveat);
}
