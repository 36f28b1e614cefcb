use netcox::calibration::Scenario;
use netcox::numeric::KernelShape;
use netcox::{Error, Result};
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Bandwidth {
    Value(f64),
    Keyword(String),
}

impl Bandwidth {
    /// `None` means automatic selection.
    pub fn value(&self) -> Result<Option<f64>> {
        match self {
            Bandwidth::Value(h) if *h > 0.0 && h.is_finite() => Ok(Some(*h)),
            Bandwidth::Value(h) => Err(Error::Config(format!("h={h} must be positive"))),
            Bandwidth::Keyword(s) if s == "auto" => Ok(None),
            Bandwidth::Keyword(s) => Err(Error::Config(format!("h must be a number or \"auto\", got {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum CovariateSpec {
    /// `X = 1` for every pair.
    Intercept,
    /// Static table `i,j,x_1,...`.
    File { path: PathBuf },
    /// `X = (1, max(ln d, 0), max(ln d, 0)^2)` from a table `i,j,minutes`.
    Distance { path: PathBuf },
}

/// Trip-log pipeline: the network and covariates come from a prior period,
/// the events from the analysis window.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TripConfig {
    pub trips: PathBuf,
    pub prior_trips: PathBuf,
    pub window_start: String,
    pub window_end: String,
    pub prior_window_start: String,
    pub prior_window_end: String,
    #[serde(default = "default_threshold")]
    pub threshold: usize,
    #[serde(default = "default_time_column")]
    pub time_column: String,
    #[serde(default = "default_origin_column")]
    pub origin_column: String,
    #[serde(default = "default_destination_column")]
    pub destination_column: String,
    #[serde(default = "default_duration_column")]
    pub duration_column: String,
    #[serde(default = "default_time_format")]
    pub time_format: String,
}

fn default_threshold() -> usize {
    10
}
fn default_time_column() -> String {
    "Start date".into()
}
fn default_origin_column() -> String {
    "Start station number".into()
}
fn default_destination_column() -> String {
    "End station number".into()
}
fn default_duration_column() -> String {
    "Duration".into()
}
fn default_time_format() -> String {
    "%Y-%m-%d %H:%M:%S".into()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub dims: Vec<usize>,
    #[serde(default = "yes")]
    pub torus: bool,
    pub delta: usize,
}

fn yes() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub output_dir: PathBuf,
    pub seed: u64,
    pub events: Option<PathBuf>,
    pub network: Option<PathBuf>,
    pub covariates: Option<CovariateSpec>,
    pub trips: Option<TripConfig>,
    /// Observation window length in time units for CSV inputs.
    pub horizon: Option<f64>,
    /// Length of one time unit in hours (trip logs only).
    pub unit_hours: f64,
    pub directed: bool,
    pub kernel: KernelShape,
    pub h: Bandwidth,
    pub h_grid: Vec<f64>,
    /// Prediction window as a multiple of `h`.
    pub prediction_window: f64,
    pub delta: Option<f64>,
    pub taper: Option<f64>,
    /// Known null value replacing the global estimate.
    pub reference: Option<Vec<f64>>,
    pub reps: usize,
    pub level: f64,
    pub scenario: Scenario,
    pub amplitudes: Vec<f64>,
    pub grid: Option<GridConfig>,
    /// Embedding dimension for partitions of arbitrary networks.
    pub mds_dim: usize,
    pub partition_delta: u32,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            output_dir: PathBuf::from("out"),
            seed: 0,
            events: None,
            network: None,
            covariates: None,
            trips: None,
            horizon: None,
            unit_hours: 1.0,
            directed: false,
            kernel: KernelShape::Epanechnikov,
            h: Bandwidth::Keyword("auto".into()),
            h_grid: vec![0.5, 0.8, 1.1, 1.4, 1.7, 2.0],
            prediction_window: 0.5,
            delta: None,
            taper: None,
            reference: None,
            reps: 200,
            level: 0.05,
            scenario: Scenario::null(40),
            amplitudes: vec![1.0],
            grid: None,
            mds_dim: 2,
            partition_delta: 2,
        }
    }
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text)
            .map_err(|e| Error::Config(format!("line {}, column {}: {e}", e.line(), e.column())))
    }

    /// Resolves relative input paths against `data_dir`.
    pub fn resolve(&mut self, data_dir: Option<&Path>) {
        let Some(dir) = data_dir else { return };
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = dir.join(&*p);
            }
        };
        for p in [&mut self.events, &mut self.network].into_iter().flatten() {
            fix(p);
        }
        match &mut self.covariates {
            Some(CovariateSpec::File { path }) | Some(CovariateSpec::Distance { path }) => fix(path),
            _ => {}
        }
        if let Some(t) = &mut self.trips {
            fix(&mut t.trips);
            fix(&mut t.prior_trips);
        }
    }

    pub fn validate(&self) -> Result<()> {
        let mut files: Vec<&Path> = [&self.events, &self.network].into_iter().flatten().map(PathBuf::as_path).collect();
        match &self.covariates {
            Some(CovariateSpec::File { path }) | Some(CovariateSpec::Distance { path }) => files.push(path),
            _ => {}
        }
        if let Some(t) = &self.trips {
            files.push(&t.trips);
            files.push(&t.prior_trips);
            if t.threshold == 0 {
                return Err(Error::Config("trips.threshold must be at least 1".into()));
            }
        }
        for f in files {
            if !f.is_file() {
                return Err(Error::Config(format!("input file {} does not exist", f.display())));
            }
        }
        self.h.value()?;
        if let Some(t) = self.horizon {
            if !(t > 0.0) {
                return Err(Error::Config(format!("horizon={t} must be positive")));
            }
        }
        if !(self.unit_hours > 0.0) {
            return Err(Error::Config("unit_hours must be positive".into()));
        }
        if self.h_grid.is_empty() || self.h_grid.iter().any(|&h| !(h > 0.0)) {
            return Err(Error::Config("h_grid must hold positive bandwidths".into()));
        }
        if !(self.level > 0.0 && self.level < 1.0) {
            return Err(Error::Config(format!("level={} must lie in (0, 1)", self.level)));
        }
        if !(self.prediction_window > 0.0) {
            return Err(Error::Config("prediction_window must be positive".into()));
        }
        Ok(())
    }
}
