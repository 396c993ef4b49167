//! Run configuration: built-in defaults, then a JSON file, then `MEMDIM_*`
//! environment variables, then command-line flags.

use std::path::{Path, PathBuf};

use memdim_core::analytic::CertificateConfig;
use memdim_core::lyapunov::DEFAULT_LADDER;
use memdim_core::{ClassificationConfig, IntegratorConfig, Parameters, Route, SamplingConfig, StateVector};
use serde::{Deserialize, Serialize};

use crate::failure::Failure;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

const DEFAULT_U0: StateVector = StateVector::new(0.1, 0.0, 0.0);

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimulateSection {
    pub u0: StateVector,
    pub t: f64,
}

impl Default for SimulateSection {
    fn default() -> Self {
        SimulateSection { u0: DEFAULT_U0, t: 100.0 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LyapunovSection {
    pub u0: StateVector,
    pub t: f64,
    pub route: Route,
    /// Extra horizons reported in the history table.
    pub history: Vec<f64>,
}

impl Default for LyapunovSection {
    fn default() -> Self {
        LyapunovSection { u0: DEFAULT_U0, t: 200.0, route: Route::Benettin, history: DEFAULT_LADDER.to_vec() }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DimensionSection {
    /// Initial conditions for attractor sampling (also used by `classify`).
    pub seeds: Vec<StateVector>,
    /// Ladder horizons; the last one is the reporting horizon.
    pub horizons: Vec<f64>,
    /// Thin the sample to at most this many points before computing local
    /// dimensions (0 keeps everything).
    pub max_points: usize,
}

impl Default for DimensionSection {
    fn default() -> Self {
        DimensionSection {
            seeds: vec![DEFAULT_U0, StateVector::new(-0.1, 0.0, 0.0)],
            horizons: vec![5.0, 10.0, 20.0, 50.0],
            max_points: 200,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepAxis {
    pub parameter: String,
    pub start: f64,
    pub stop: f64,
    pub count: usize,
}

impl SweepAxis {
    pub fn values(&self) -> Vec<f64> {
        if self.count == 1 {
            return vec![self.start];
        }
        let n = (self.count - 1) as f64;
        (0..self.count).map(|k| self.start + (self.stop - self.start) * (k as f64 / n)).collect()
    }
}

impl std::str::FromStr for SweepAxis {
    type Err = String;

    /// `name:start:stop:count`
    fn from_str(s: &str) -> Result<Self, String> {
        let parts: Vec<&str> = s.split(':').collect();
        let [parameter, start, stop, count] = parts[..] else {
            return Err(format!("axis `{s}` must look like name:start:stop:count"));
        };
        let num = |v: &str| v.trim().parse::<f64>().map_err(|e| format!("axis `{s}`: {e}"));
        Ok(SweepAxis {
            parameter: parameter.trim().to_string(),
            start: num(start)?,
            stop: num(stop)?,
            count: count.trim().parse().map_err(|e| format!("axis `{s}`: {e}"))?,
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepSection {
    pub axes: Vec<SweepAxis>,
    /// Start of the trajectory used for the numeric dimension column.
    pub u0: StateVector,
    pub t_transient: f64,
    /// Horizon of the numeric local dimension.
    pub t_numeric: f64,
    /// Also classify every grid point (slow).
    pub classify: bool,
}

impl Default for SweepSection {
    fn default() -> Self {
        SweepSection { axes: Vec::new(), u0: DEFAULT_U0, t_transient: 50.0, t_numeric: 20.0, classify: false }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputSection {
    /// Not embedded in outputs, so results do not depend on where they land.
    #[serde(skip_serializing)]
    pub dir: PathBuf,
    /// Format of tabular outputs; reports are always JSON.
    pub format: Option<Format>,
}

impl Default for OutputSection {
    fn default() -> Self {
        OutputSection { dir: PathBuf::from("."), format: None }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub parameters: Parameters,
    pub integrator: IntegratorConfig,
    pub certificate: CertificateConfig,
    pub classification: ClassificationConfig,
    pub sampling: SamplingConfig,
    pub simulate: SimulateSection,
    pub lyapunov: LyapunovSection,
    pub dimension: DimensionSection,
    pub sweep: SweepSection,
    pub output: OutputSection,
    pub equilibrium_tol: f64,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            parameters: Parameters::default(),
            integrator: IntegratorConfig::default(),
            certificate: CertificateConfig::default(),
            classification: ClassificationConfig::default(),
            sampling: SamplingConfig::default(),
            simulate: SimulateSection::default(),
            lyapunov: LyapunovSection::default(),
            dimension: DimensionSection::default(),
            sweep: SweepSection::default(),
            output: OutputSection::default(),
            equilibrium_tol: 1e-9,
        }
    }
}

fn config_error(msg: impl Into<String>) -> Failure {
    Failure::Config(msg.into())
}

impl RunConfig {
    /// Reads a JSON config; errors name the offending field and position.
    pub fn from_file(path: &Path) -> Result<Self, Failure> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| config_error(format!("cannot read config {}: {e}", path.display())))?;
        Self::from_json(&text).map_err(|e| config_error(format!("{}: {e}", path.display())))
    }

    pub fn from_json(text: &str) -> Result<Self, String> {
        let de = &mut serde_json::Deserializer::from_str(text);
        serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            if path == "." {
                e.inner().to_string()
            } else {
                format!("field `{path}`: {}", e.inner())
            }
        })
    }

    pub fn validate(&self) -> Result<(), Failure> {
        let p = &self.parameters;
        if !p.is_finite() {
            return Err(config_error("parameters must be finite"));
        }
        self.integrator.validate().map_err(|e| config_error(format!("integrator: {e}")))?;
        self.certificate.validate().map_err(|e| config_error(format!("certificate: {e}")))?;
        self.classification.validate().map_err(|e| config_error(format!("classification: {e}")))?;
        if !(self.equilibrium_tol > 0.0) {
            return Err(config_error("equilibrium_tol must be positive"));
        }
        let times = [
            ("simulate.t", self.simulate.t),
            ("lyapunov.t", self.lyapunov.t),
            ("sweep.t_transient", self.sweep.t_transient),
            ("sweep.t_numeric", self.sweep.t_numeric),
        ];
        for (name, t) in times {
            if !(t >= 0.0 && t.is_finite()) {
                return Err(config_error(format!("{name} must be finite and >= 0, got {t}")));
            }
        }
        for axis in &self.sweep.axes {
            if !Parameters::NAMES.contains(&axis.parameter.as_str()) {
                return Err(config_error(format!(
                    "sweep axis `{}` is not one of {}",
                    axis.parameter,
                    Parameters::NAMES.join(", ")
                )));
            }
            if !(axis.start.is_finite() && axis.stop.is_finite()) || axis.count == 0 {
                return Err(config_error(format!("sweep axis `{}` needs a finite range and count >= 1", axis.parameter)));
            }
        }
        Ok(())
    }

    /// The config with output location stripped, for comparing runs.
    pub fn without_output(&self) -> RunConfig {
        RunConfig { output: OutputSection::default(), ..self.clone() }
    }
}

pub fn parse_state(s: &str) -> Result<StateVector, String> {
    let v: Vec<f64> = s
        .split(',')
        .map(|c| c.trim().parse::<f64>().map_err(|e| format!("`{s}`: {e}")))
        .collect::<Result<_, _>>()?;
    match v[..] {
        [x, y, z] => Ok(StateVector::new(x, y, z)),
        _ => Err(format!("`{s}` must have three comma-separated components")),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn partial_json_keeps_defaults() {
        let c = RunConfig::from_json(r#"{"parameters": {"alpha": 3}, "simulate": {"t": 5}}"#).unwrap();
        assert_eq!(c.parameters.alpha, 3.0);
        assert_eq!(c.parameters.beta, Parameters::default().beta);
        assert_eq!(c.simulate.t, 5.0);
        assert_eq!(c.simulate.u0, DEFAULT_U0);
    }

    #[test]
    fn unknown_field_is_reported_with_path() {
        let err = RunConfig::from_json("{\n  \"parameters\": {\"alpah\": 3}\n}").unwrap_err();
        assert!(err.contains("parameters"), "{err}");
        assert!(err.contains("alpah") && err.contains("line 2"), "{err}");
    }

    #[test]
    fn axis_parsing_and_values() {
        let a: SweepAxis = "m0:0.5:1.5:3".parse().unwrap();
        assert_eq!(a.values(), vec![0.5, 1.0, 1.5]);
        assert!("m0:1:2".parse::<SweepAxis>().is_err());
        let one: SweepAxis = "alpha:2:9:1".parse().unwrap();
        assert_eq!(one.values(), vec![2.0]);
    }

    #[test]
    fn bad_axis_name_rejected() {
        let mut c = RunConfig::default();
        c.sweep.axes.push("delta:0:1:2".parse().unwrap());
        assert!(matches!(c.validate(), Err(Failure::Config(_))));
    }

    #[test]
    fn state_parsing() {
        assert_eq!(parse_state("1, -2,3e-1").unwrap(), StateVector::new(1.0, -2.0, 0.3));
        assert!(parse_state("1,2").is_err());
    }
}
