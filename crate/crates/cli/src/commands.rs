use std::path::PathBuf;

use memdim_core::analytic::{analyze, convergence_certificate, eigenvalue_dimension_bound};
use memdim_core::attractors::{classify, probe_trajectory};
use memdim_core::linalg3::{eigenvalues, CubicRoots};
use memdim_core::lyapunov::{dimension_report, entropy_upper_bound, sample_attractor, AttractorSample};
use memdim_core::model::{equilibria, Equilibrium};
use memdim_core::ode::integrate_streaming;
use memdim_core::variational::{finite_time_les_benettin_at, finite_time_les_svd};
use memdim_core::{kaplan_yorke, Error, FiniteTimeSpectrum, Parameters, Route, StateVector};
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{Format, RunConfig};
use crate::failure::{CmdResult, Failure};
use crate::output::{num, opt_num, write_json, CsvWriter, Table};

fn format_or(cfg: &RunConfig, default: Format) -> Format {
    cfg.output.format.unwrap_or(default)
}

pub fn simulate(cfg: &RunConfig) -> CmdResult<Vec<PathBuf>> {
    let dir = &cfg.output.dir;
    let s = &cfg.simulate;
    match format_or(cfg, Format::Csv) {
        Format::Csv => {
            let path = dir.join("trajectory.csv");
            let mut w = CsvWriter::create(&path, "simulate", cfg, &["t", "x", "y", "z"])?;
            let mut io_err = None;
            let res = integrate_streaming(&cfg.parameters, s.u0, s.t, &cfg.integrator, |t, u| {
                if io_err.is_none() {
                    io_err = w.row(&[num(t), num(u.x), num(u.y), num(u.z)]).err();
                }
            });
            let path = w.finish()?;
            if let Some(e) = io_err {
                return Err(e.into());
            }
            res.map_err(|e| partial(e, &path))?;
            Ok(vec![path])
        }
        Format::Json => {
            let mut samples = Vec::new();
            let res = integrate_streaming(&cfg.parameters, s.u0, s.t, &cfg.integrator, |t, u| samples.push((t, *u)));
            #[derive(Serialize)]
            struct Out<'a> {
                samples: &'a [(f64, StateVector)],
                #[serde(skip_serializing_if = "Option::is_none")]
                error: Option<String>,
            }
            let error = res.as_ref().err().map(|e| e.to_string());
            let path = write_json(dir, "trajectory", "simulate", cfg, &Out { samples: &samples, error })?;
            res.map_err(|e| partial(e, &path))?;
            Ok(vec![path])
        }
    }
}

fn partial(e: Error, path: &std::path::Path) -> Failure {
    match Failure::from(e) {
        Failure::Numerical(m) => Failure::Numerical(format!("{m}; partial trajectory kept in {}", path.display())),
        other => other,
    }
}

#[derive(Serialize)]
struct LyapunovResult {
    spectrum: FiniteTimeSpectrum,
    kaplan_yorke: f64,
    entropy_sum: f64,
    liouville_defect: f64,
    history: Vec<FiniteTimeSpectrum>,
}

pub fn lyapunov(cfg: &RunConfig) -> CmdResult<Vec<PathBuf>> {
    let l = &cfg.lyapunov;
    let p = &cfg.parameters;
    let mut horizons: Vec<f64> = l.history.iter().copied().filter(|&h| h < l.t).collect();
    horizons.push(l.t);
    let spectra = match l.route {
        Route::Benettin => finite_time_les_benettin_at(p, l.u0, &horizons, &cfg.integrator)?,
        Route::Svd => horizons
            .par_iter()
            .map(|&h| finite_time_les_svd(p, l.u0, h, &cfg.integrator))
            .collect::<Result<Vec<_>, _>>()?,
    };
    let spectrum = spectra.last().cloned().expect("at least one horizon");

    let mut table = Table::new(&["t", "l1", "l2", "l3", "kaplan_yorke", "entropy_sum", "mean_trace"]);
    for s in &spectra {
        let [a, b, c] = s.les.values();
        table.push(vec![
            num(s.t),
            num(a),
            num(b),
            num(c),
            num(kaplan_yorke(s)),
            num(entropy_upper_bound(s)),
            num(s.mean_trace),
        ]);
    }
    let result = LyapunovResult {
        kaplan_yorke: kaplan_yorke(&spectrum),
        entropy_sum: entropy_upper_bound(&spectrum),
        liouville_defect: spectrum.liouville_defect(),
        spectrum,
        history: spectra,
    };
    let dir = &cfg.output.dir;
    Ok(vec![
        write_json(dir, "lyapunov", "lyapunov", cfg, &result)?,
        table.write(dir, "lyapunov_history", format_or(cfg, Format::Csv), "lyapunov", cfg)?,
    ])
}

fn sample(cfg: &RunConfig) -> CmdResult<AttractorSample> {
    if cfg.dimension.seeds.is_empty() {
        return Err(Failure::Config("dimension.seeds is empty".into()));
    }
    Ok(sample_attractor(&cfg.parameters, &cfg.dimension.seeds, &cfg.sampling, &cfg.integrator)?)
}

#[derive(Serialize)]
struct SampleSummary<'a> {
    points: usize,
    used_points: usize,
    transient_skipped: f64,
    failures: &'a [memdim_core::lyapunov::SeedFailure],
}

pub fn dimension(cfg: &RunConfig) -> CmdResult<Vec<PathBuf>> {
    let d = &cfg.dimension;
    if d.horizons.is_empty() {
        return Err(Failure::Config("dimension.horizons is empty".into()));
    }
    let full = sample(cfg)?;
    let thin = full.thinned(d.max_points);
    let mut report = dimension_report(&cfg.parameters, &thin, &d.horizons, &cfg.integrator)?;
    report.analytic_bound = eigenvalue_dimension_bound(&cfg.parameters, &cfg.certificate).ok().map(|b| b.value);

    let mut table = Table::new(&["x", "y", "z", "l1", "l2", "l3", "dim", "error"]);
    for pt in &report.points {
        let les = pt.les.map(|l| l.map(num)).unwrap_or_default();
        table.push(vec![
            num(pt.point.x),
            num(pt.point.y),
            num(pt.point.z),
            les[0].clone(),
            les[1].clone(),
            les[2].clone(),
            opt_num(pt.dim),
            pt.error.clone().unwrap_or_default(),
        ]);
    }
    #[derive(Serialize)]
    struct Out<'a> {
        sample: SampleSummary<'a>,
        report: &'a memdim_core::DimensionReport,
    }
    let summary = SampleSummary {
        points: full.points.len(),
        used_points: thin.points.len(),
        transient_skipped: full.transient_skipped,
        failures: &full.failures,
    };
    let dir = &cfg.output.dir;
    Ok(vec![
        write_json(dir, "dimension", "dimension", cfg, &Out { sample: summary, report: &report })?,
        table.write(dir, "dimension_distribution", format_or(cfg, Format::Csv), "dimension", cfg)?,
    ])
}

pub fn bound(cfg: &RunConfig) -> CmdResult<Vec<PathBuf>> {
    let report = analyze(&cfg.parameters, &cfg.certificate)?;
    Ok(vec![write_json(&cfg.output.dir, "bound", "bound", cfg, &report)?])
}

pub fn converge(cfg: &RunConfig) -> CmdResult<Vec<PathBuf>> {
    let verdict = convergence_certificate(&cfg.parameters, &cfg.certificate)?;
    Ok(vec![write_json(&cfg.output.dir, "converge", "converge", cfg, &verdict)?])
}

pub fn classify_cmd(cfg: &RunConfig, dump_probes: bool) -> CmdResult<Vec<PathBuf>> {
    let eqs = equilibria(&cfg.parameters, cfg.equilibrium_tol)?;
    let sample = sample(cfg)?;
    let verdict = classify(&cfg.parameters, &sample, &eqs, &cfg.classification, &cfg.integrator)?;
    #[derive(Serialize)]
    struct Out<'a> {
        sample_points: usize,
        classification: &'a memdim_core::ClassificationVerdict,
    }
    let dir = &cfg.output.dir;
    let mut files =
        vec![write_json(dir, "classify", "classify", cfg, &Out { sample_points: sample.points.len(), classification: &verdict })?];
    if dump_probes {
        let mut w = CsvWriter::create(&dir.join("probes.csv"), "classify", cfg, &["equilibrium", "probe", "t", "x", "y", "z"])?;
        for (e, group) in verdict.equilibria.iter().enumerate() {
            let paths: Vec<_> = group
                .probes
                .par_iter()
                .map(|pr| probe_trajectory(&cfg.parameters, pr.start, &cfg.classification, &cfg.integrator))
                .collect();
            for (pr, path) in group.probes.iter().zip(paths) {
                // diverged probes have no complete path to plot
                let Ok(path) = path else { continue };
                for (t, u) in &path.samples {
                    w.row(&[e.to_string(), pr.index.to_string(), num(*t), num(u.x), num(u.y), num(u.z)])?;
                }
            }
        }
        files.push(w.finish()?);
    }
    Ok(files)
}

#[derive(Serialize)]
pub struct EquilibriumInfo {
    #[serde(flatten)]
    pub equilibrium: Equilibrium,
    pub eigenvalues: CubicRoots,
    pub stable: bool,
}

pub fn equilibrium_info(p: &Parameters, tol: f64) -> memdim_core::Result<Vec<EquilibriumInfo>> {
    Ok(equilibria(p, tol)?
        .into_iter()
        .map(|e| {
            let eigenvalues = eigenvalues(&memdim_core::model::jacobian(p, &e.point));
            let stable = eigenvalues.real_parts().iter().all(|&r| r < 0.0);
            EquilibriumInfo { equilibrium: e, eigenvalues, stable }
        })
        .collect())
}

pub fn equilibria_cmd(cfg: &RunConfig) -> CmdResult<Vec<PathBuf>> {
    let info = equilibrium_info(&cfg.parameters, cfg.equilibrium_tol)?;
    let dir = &cfg.output.dir;
    match format_or(cfg, Format::Json) {
        Format::Json => Ok(vec![write_json(dir, "equilibria", "equilibria", cfg, &info)?]),
        Format::Csv => {
            let mut table = Table::new(&["label", "x", "y", "z", "re1", "re2", "re3", "im", "stable"]);
            for e in &info {
                let re = e.eigenvalues.real_parts();
                let im = match e.eigenvalues {
                    CubicRoots::ThreeReal(_) => 0.0,
                    CubicRoots::OneReal { im, .. } => im,
                };
                let u = e.equilibrium.point;
                table.push(vec![
                    e.equilibrium.label.to_string(),
                    num(u.x),
                    num(u.y),
                    num(u.z),
                    num(re[0]),
                    num(re[1]),
                    num(re[2]),
                    num(im),
                    e.stable.to_string(),
                ]);
            }
            Ok(vec![table.write(dir, "equilibria", Format::Csv, "equilibria", cfg)?])
        }
    }
}
