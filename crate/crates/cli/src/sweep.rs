//! Parameter sweeps over one or two axes.
//!
//! Rows are computed in parallel chunks; the main thread is the only writer
//! of the append-only journal `sweep.journal.jsonl`. The table is written
//! from the journal once every grid point is present, sorted by index, so
//! an interrupted sweep resumed with `--resume` ends with the same bytes as
//! an uninterrupted one.

use std::collections::BTreeMap;
use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use memdim_core::analytic::{analyze, symmetrized_spectrum, CertificateOutcome};
use memdim_core::attractors::{classify, Verdict};
use memdim_core::lyapunov::{local_dimension, sample_attractor};
use memdim_core::model::equilibria;
use memdim_core::variational::flow;
use memdim_core::{Parameters, StateVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::{Format, RunConfig};
use crate::failure::{CmdResult, Failure};
use crate::output::{num, opt_num, Table};

pub const JOURNAL: &str = "sweep.journal.jsonl";

pub const COLUMNS: [&str; 20] = [
    "index",
    "alpha",
    "beta",
    "gamma",
    "m0",
    "m1",
    "x0",
    "n_equilibria",
    "lambda1",
    "lambda2",
    "lambda3",
    "bound_dim",
    "exact_dim",
    "certificate_dim",
    "convergence_margin",
    "converges",
    "numeric_dim",
    "verdict",
    "sample_points",
    "error",
];

#[derive(Serialize, Deserialize)]
struct Header {
    journal: String,
    version: String,
    config: RunConfig,
}

#[derive(Serialize, Deserialize)]
struct Entry {
    index: usize,
    fields: Vec<String>,
}

pub struct SweepOptions {
    pub resume: bool,
    /// Stop after this many new grid points (the rest waits for `--resume`).
    pub limit: Option<usize>,
}

pub fn grid(cfg: &RunConfig) -> Vec<Parameters> {
    let axes = &cfg.sweep.axes;
    let mut points = vec![cfg.parameters];
    for axis in axes {
        let values = axis.values();
        points = points
            .into_iter()
            .flat_map(|p| {
                values.iter().map(move |&v| {
                    let mut q = p;
                    q.set(&axis.parameter, v).expect("validated axis name");
                    q
                })
            })
            .collect();
    }
    points
}

/// One table row. Failures of individual estimates go to the error column;
/// the row is still produced.
pub fn row(index: usize, p: &Parameters, cfg: &RunConfig) -> Vec<String> {
    let mut errors: Vec<String> = Vec::new();
    let mut note = |what: &str, e: &dyn std::fmt::Display| errors.push(format!("{what}: {e}"));

    let n_eq = match equilibria(p, cfg.equilibrium_tol) {
        Ok(e) => Some(e),
        Err(e) => {
            note("equilibria", &e);
            None
        }
    };
    let lambda = match symmetrized_spectrum(p, &StateVector::ORIGIN, &cfg.certificate.s_matrix) {
        Ok(l) => l.0.map(num),
        Err(e) => {
            note("spectrum", &e);
            Default::default()
        }
    };
    let (mut bound, mut exact, mut cert, mut margin, mut converges) = Default::default();
    match analyze(p, &cfg.certificate) {
        Ok(r) => {
            bound = num(r.bound_dim);
            exact = opt_num(r.exact_dim);
            cert = match r.certificate {
                CertificateOutcome::Certified { bound, .. } => num(bound),
                CertificateOutcome::NoCertificate => "none".into(),
            };
            margin = num(r.convergence.margin);
            converges = r.converges.to_string();
        }
        Err(e) => note("analytic", &e),
    }

    let s = &cfg.sweep;
    let numeric = flow(p, s.u0, s.t_transient, &cfg.integrator)
        .and_then(|start| local_dimension(p, start, s.t_numeric, &cfg.integrator));
    let numeric_dim = match numeric {
        Ok(d) => num(d),
        Err(e) => {
            note("numeric", &e);
            String::new()
        }
    };

    let (mut verdict, mut sample_points) = ("skipped".to_string(), String::new());
    if s.classify {
        let outcome = n_eq.as_ref().ok_or_else(|| "no equilibria".to_string()).and_then(|eqs| {
            let sample = sample_attractor(p, &cfg.dimension.seeds, &cfg.sampling, &cfg.integrator).map_err(|e| e.to_string())?;
            let v = classify(p, &sample, eqs, &cfg.classification, &cfg.integrator).map_err(|e| e.to_string())?;
            Ok((v, sample.points.len()))
        });
        match outcome {
            Ok((v, n)) => {
                verdict = match v.verdict {
                    Verdict::SelfExcited { label, .. } => format!("self-excited:{label}"),
                    Verdict::HiddenCandidate => "hidden-candidate".into(),
                };
                sample_points = n.to_string();
            }
            Err(e) => {
                verdict = String::new();
                note("classify", &e);
            }
        }
    }

    let mut fields = vec![index.to_string()];
    fields.extend(p.as_array().map(num));
    fields.push(n_eq.map(|e| e.len().to_string()).unwrap_or_default());
    fields.extend(lambda);
    fields.extend([bound, exact, cert, margin, converges, numeric_dim, verdict, sample_points]);
    fields.push(errors.join("; "));
    debug_assert_eq!(fields.len(), COLUMNS.len());
    fields
}

fn read_journal(path: &Path, cfg: &RunConfig) -> CmdResult<BTreeMap<usize, Vec<String>>> {
    let mut done = BTreeMap::new();
    let file = match File::open(path) {
        Ok(f) => f,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(done),
        Err(e) => return Err(e.into()),
    };
    let mut lines = BufReader::new(file).lines();
    let Some(first) = lines.next().transpose()? else {
        return Ok(done);
    };
    let header: Header = serde_json::from_str(&first)
        .map_err(|e| Failure::Config(format!("{} has an unreadable header: {e}", path.display())))?;
    if header.config.without_output() != cfg.without_output() {
        return Err(Failure::Config(format!(
            "{} was written for a different config; remove it or drop --resume",
            path.display()
        )));
    }
    for line in lines {
        let line = line?;
        // a torn final line from an interrupted write is ignored
        if let Ok(entry) = serde_json::from_str::<Entry>(&line) {
            if entry.fields.len() == COLUMNS.len() {
                done.insert(entry.index, entry.fields);
            }
        }
    }
    Ok(done)
}

pub fn run(cfg: &RunConfig, opts: &SweepOptions) -> CmdResult<Vec<PathBuf>> {
    let axes = cfg.sweep.axes.len();
    if !(1..=2).contains(&axes) {
        return Err(Failure::Config(format!("sweep needs one or two axes, got {axes}")));
    }
    let dir = &cfg.output.dir;
    let journal_path = dir.join(JOURNAL);
    let points = grid(cfg);

    let mut done = if opts.resume { read_journal(&journal_path, cfg)? } else { BTreeMap::new() };
    let mut journal = if opts.resume && !done.is_empty() {
        let torn = std::fs::read(&journal_path)?.last() != Some(&b'\n');
        let mut f = OpenOptions::new().append(true).open(&journal_path)?;
        if torn {
            writeln!(f)?;
        }
        f
    } else {
        let mut f = File::create(&journal_path)?;
        let header = Header { journal: "memdim-sweep".into(), version: memdim_core::VERSION.into(), config: cfg.clone() };
        writeln!(f, "{}", serde_json::to_string(&header)?)?;
        f
    };

    let mut pending: Vec<usize> = (0..points.len()).filter(|k| !done.contains_key(k)).collect();
    if let Some(limit) = opts.limit {
        pending.truncate(limit);
    }
    let chunk = (rayon::current_num_threads() * 2).max(1);
    for ids in pending.chunks(chunk) {
        let rows: Vec<(usize, Vec<String>)> = ids.par_iter().map(|&k| (k, row(k, &points[k], cfg))).collect();
        for (index, fields) in rows {
            writeln!(journal, "{}", serde_json::to_string(&Entry { index, fields: fields.clone() })?)?;
            done.insert(index, fields);
        }
        journal.flush()?;
    }
    journal.sync_all()?;

    if done.len() < points.len() {
        eprintln!(
            "sweep paused at {}/{} grid points; rerun with --resume to continue",
            done.len(),
            points.len()
        );
        return Ok(vec![journal_path]);
    }
    let mut table = Table::new(&COLUMNS);
    for (_, fields) in done {
        table.push(fields);
    }
    let format = cfg.output.format.unwrap_or(Format::Csv);
    Ok(vec![table.write(dir, "sweep", format, "sweep", cfg)?, journal_path])
}
