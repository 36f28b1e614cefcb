use crate::config::{CovariateSpec, RunConfig, TripConfig};
use nalgebra::{dvector, DVector};
use netcox::bandwidth::{bandwidth_curve, BandwidthCurve, PredictionConfig};
use netcox::calibration::{run_calibration, Scenario};
use netcox::estimate::{fit_global, fit_path, DataView};
use netcox::goftest::{run_test_with_path, PathPoint, TestConfig, TestResult};
use netcox::io::{
    build_conservative_network, distance_covariates, ingest_events, median_minutes, read_covariates_csv,
    read_events_csv, read_network_csv, write_covariates_csv, write_events_csv, write_network_csv,
    write_partition_csv, write_path_csv, IngestConfig, TimeFormat, VertexRegistry,
};
use netcox::numeric::quadrature::uniform_grid;
use netcox::partition::{grid_chessboard, mds_partition, validate_partition, GridSpec};
use netcox::{CovariateField, DynamicNetwork, Error, EventLog, Kernel, Result, WeightFunction};
use serde::Serialize;
use std::collections::BTreeMap;
use std::fs::File;
use std::path::{Path, PathBuf};

/// Collects output files; all writes happen on the calling thread.
pub struct Outputs {
    dir: PathBuf,
    pub files: Vec<String>,
}

impl Outputs {
    pub fn new(dir: &Path) -> Result<Self> {
        std::fs::create_dir_all(dir)?;
        Ok(Self { dir: dir.to_path_buf(), files: Vec::new() })
    }

    pub fn write(&mut self, name: &str, bytes: &[u8]) -> Result<()> {
        std::fs::write(self.dir.join(name), bytes)?;
        self.files.push(name.to_string());
        Ok(())
    }

    pub fn json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<()> {
        let mut s = serde_json::to_string_pretty(value)?;
        s.push('\n');
        self.write(name, s.as_bytes())
    }

    fn with<F: FnOnce(&mut Vec<u8>) -> Result<()>>(&mut self, name: &str, f: F) -> Result<()> {
        let mut buf = Vec::new();
        f(&mut buf)?;
        self.write(name, &buf)
    }
}

pub struct Dataset {
    pub net: DynamicNetwork,
    pub cov: CovariateField,
    pub log: EventLog,
    pub registry: Option<VertexRegistry>,
}

fn open(p: &Path) -> Result<File> {
    File::open(p).map_err(|e| Error::Data(format!("{}: {e}", p.display())))
}

fn ingest_config(t: &TripConfig, start: &str, end: &str, cfg: &RunConfig) -> IngestConfig {
    IngestConfig {
        time_column: t.time_column.clone(),
        origin_column: t.origin_column.clone(),
        destination_column: t.destination_column.clone(),
        duration_column: Some(t.duration_column.clone()),
        time_format: TimeFormat::Pattern(t.time_format.clone()),
        window_start: start.into(),
        window_end: end.into(),
        unit_hours: cfg.unit_hours,
        directed: cfg.directed,
        max_skip_fraction: 0.01,
    }
}

fn load_trips(t: &TripConfig, cfg: &RunConfig) -> Result<Dataset> {
    let mut registry = VertexRegistry::new();
    let prior_cfg = ingest_config(t, &t.prior_window_start, &t.prior_window_end, cfg);
    let prior = ingest_events(open(&t.prior_trips)?, &prior_cfg, &mut registry)?;
    let main_cfg = ingest_config(t, &t.window_start, &t.window_end, cfg);
    let main = ingest_events(open(&t.trips)?, &main_cfg, &mut registry)?;
    log::info!(
        "{} stations, {} prior and {} window events ({} outside window, {} self-loops)",
        registry.len(),
        prior.log.total_count(),
        main.log.total_count(),
        main.outside_window,
        main.self_loops
    );
    let net = build_conservative_network(&prior.log, t.threshold, registry.len(), cfg.directed, main.log.horizon())?;
    let cov = distance_covariates(&median_minutes(&prior.durations), &net)?;
    Ok(Dataset { net, cov, log: main.log, registry: Some(registry) })
}

pub fn load(cfg: &RunConfig) -> Result<Dataset> {
    if let Some(t) = &cfg.trips {
        return load_trips(t, cfg);
    }
    let (Some(events), Some(network)) = (&cfg.events, &cfg.network) else {
        return Err(Error::Config("either trips or both events and network must be given".into()));
    };
    let horizon = cfg.horizon.ok_or_else(|| Error::Config("horizon is required for CSV inputs".into()))?;
    let net = read_network_csv(open(network)?, cfg.directed, horizon, None)?;
    let log = read_events_csv(open(events)?, horizon)?;
    let cov = match &cfg.covariates {
        None | Some(CovariateSpec::Intercept) => CovariateField::constant(dvector![1.0]),
        Some(CovariateSpec::File { path }) => read_covariates_csv(open(path)?)?,
        Some(CovariateSpec::Distance { path }) => {
            let table = read_covariates_csv(open(path)?)?;
            if table.dim() != 1 {
                return Err(Error::Config("distance table must have columns i,j,minutes".into()));
            }
            let minutes: BTreeMap<_, _> =
                net.pairs().filter_map(|p| table.try_eval(p, 0.0).map(|x| (p, x[0]))).collect();
            distance_covariates(&minutes, &net)?
        }
    };
    Ok(Dataset { net, cov, log, registry: None })
}

fn kernel(cfg: &RunConfig) -> Kernel {
    Kernel::new(cfg.kernel)
}

fn curve(cfg: &RunConfig, d: &Dataset) -> Result<BandwidthCurve> {
    let pc = PredictionConfig { window_factor: cfg.prediction_window, ..PredictionConfig::default() };
    bandwidth_curve(&d.net, &d.cov, &d.log, &cfg.h_grid, &pc)
}

/// The bandwidth for estimation and testing, running the prediction-error
/// selection when `h` is `auto`.
fn bandwidth(cfg: &RunConfig, d: &Dataset, out: &mut Outputs) -> Result<f64> {
    match cfg.h.value()? {
        Some(h) => Ok(h),
        None => {
            let c = curve(cfg, d)?;
            log::info!("selected h*={} (converted {})", c.h_star, c.h_converted);
            out.write("bandwidth.csv", c.to_csv().as_bytes())?;
            Ok(c.h_converted)
        }
    }
}

fn write_registry(d: &Dataset, out: &mut Outputs) -> Result<()> {
    if let Some(reg) = &d.registry {
        let mut s = String::from("index,id\n");
        for k in 0..reg.len() {
            s.push_str(&format!("{k},{}\n", reg.name(k).unwrap_or_default()));
        }
        out.write("vertices.csv", s.as_bytes())?;
    }
    Ok(())
}

pub fn simulate(cfg: &RunConfig, out: &mut Outputs) -> Result<()> {
    let (net, cov, log) = cfg.scenario.draw(cfg.seed)?;
    out.with("network.csv", |b| write_network_csv(&net, b))?;
    out.with("events.csv", |b| write_events_csv(&log, b))?;
    out.with("covariates.csv", |b| write_covariates_csv(&cov, &net, 0.0, b))?;
    let path = cfg.scenario.parameter_path()?;
    let mut s = String::from("t,theta_1,theta_2\n");
    for &t in &uniform_grid(0.0, cfg.scenario.horizon, cfg.scenario.horizon / 100.0) {
        let th = path.eval(t);
        s.push_str(&format!("{t},{},{}\n", th[0], th[1]));
    }
    out.write("truth.csv", s.as_bytes())
}

#[derive(Serialize)]
struct EstimateSummary {
    h: f64,
    theta_bar: Vec<f64>,
    global_iters: usize,
    grid_points: usize,
    failed_points: usize,
    events: usize,
    ignored_events: usize,
}

pub fn estimate(cfg: &RunConfig, out: &mut Outputs) -> Result<()> {
    let d = load(cfg)?;
    write_registry(&d, out)?;
    let h = bandwidth(cfg, &d, out)?;
    let view = DataView::new(&d.net, &d.cov, &d.log, h)?;
    let global = fit_global(&view)?;
    let t = d.net.horizon();
    if !(t > 2.0 * h) {
        return Err(Error::Config(format!("h={h} leaves no interior of [0, {t}]")));
    }
    let grid = uniform_grid(h, t - h, h / 4.0);
    let k = kernel(cfg);
    let fits = fit_path(&view, &grid, h, &k, &global.theta);
    let mut failed = 0;
    let points: Vec<PathPoint> = grid
        .iter()
        .zip(fits)
        .map(|(&t0, f)| match f {
            Ok(f) => PathPoint { t0, theta: Some(f.theta.iter().copied().collect()), converged: f.converged, iters: f.iters, weight: 1.0 },
            Err(e) => {
                log::warn!("fit at t0={t0} failed: {e}");
                failed += 1;
                PathPoint { t0, theta: None, converged: false, iters: 0, weight: 1.0 }
            }
        })
        .collect();
    out.with("path.csv", |b| write_path_csv(&points, view.q, b))?;
    out.json(
        "estimate.json",
        &EstimateSummary {
            h,
            theta_bar: global.theta.iter().copied().collect(),
            global_iters: global.iters,
            grid_points: grid.len(),
            failed_points: failed,
            events: view.event_count(),
            ignored_events: view.excluded_events,
        },
    )
}

pub fn test(cfg: &RunConfig, out: &mut Outputs) -> Result<TestResult> {
    let d = load(cfg)?;
    write_registry(&d, out)?;
    let h = bandwidth(cfg, &d, out)?;
    let t = d.net.horizon();
    let mut tc = TestConfig::new(h, t);
    tc.kernel = kernel(cfg);
    tc.weight = WeightFunction::new(cfg.delta.unwrap_or(h), cfg.taper.unwrap_or(h / 2.0), t);
    tc.reference = cfg.reference.clone().map(DVector::from_vec);
    let (result, points) = run_test_with_path(&d.net, &d.cov, &d.log, &tc)?;
    out.json("test_result.json", &result)?;
    out.write("test_result.csv", format!("{}\n{}\n", TestResult::csv_header(), result.csv_row()).as_bytes())?;
    out.with("path.csv", |b| write_path_csv(&points, d.cov.dim(), b))?;
    Ok(result)
}

pub fn bandwidth_cmd(cfg: &RunConfig, out: &mut Outputs) -> Result<()> {
    let d = load(cfg)?;
    write_registry(&d, out)?;
    let c = curve(cfg, &d)?;
    out.write("bandwidth.csv", c.to_csv().as_bytes())?;
    out.json("bandwidth.json", &c)
}

pub fn partition_check(cfg: &RunConfig, out: &mut Outputs) -> Result<bool> {
    let (p, net) = if let Some(g) = &cfg.grid {
        let spec = GridSpec::new(g.dims.clone(), g.torus)?;
        let net = spec.network(1.0)?;
        (grid_chessboard(&spec, 0.5, g.delta)?, net)
    } else {
        let d = load(cfg)?;
        let t = 0.5 * d.net.horizon();
        let m = mds_partition(&d.net, t, cfg.mds_dim, cfg.partition_delta)?;
        log::info!("embedding partition achieved delta={} with dims {:?}", m.achieved_delta, m.dims_used);
        (m.partition, d.net)
    };
    let report = validate_partition(&p, &net)?;
    if !report.ok {
        log::warn!("partition is not valid: worst violation {:?}", report.worst_violation);
    }
    out.with("partition.csv", |b| write_partition_csv(&p, b))?;
    out.json("partition_report.json", &report)?;
    Ok(report.ok)
}

#[derive(Serialize)]
struct CalibrationRow {
    amplitude: f64,
    n: usize,
    reps: usize,
    level: f64,
    rejections: usize,
    failures: usize,
    rejection_rate: f64,
    mean_z: f64,
    sd_z: f64,
}

pub fn mc_calibration(cfg: &RunConfig, out: &mut Outputs) -> Result<()> {
    let mut amps = vec![0.0];
    amps.extend(cfg.amplitudes.iter().copied().filter(|&a| a != 0.0));
    let mut rows = Vec::new();
    let mut table = String::from("amplitude,n,reps,level,rejections,failures,rejection_rate,mean_z,sd_z\n");
    let mut zs = String::from("amplitude,rep,z,p_value\n");
    for a in amps {
        let scen = Scenario { amplitude: a, ..cfg.scenario.clone() };
        let s = run_calibration(&scen, cfg.reps, cfg.level, cfg.seed)?;
        log::info!("amplitude {a}: rejection rate {} ({} failures)", s.rejection_rate, s.failures);
        table.push_str(&format!(
            "{a},{},{},{},{},{},{},{},{}\n",
            scen.n, s.reps, s.level, s.rejections, s.failures, s.rejection_rate, s.mean_z, s.sd_z
        ));
        for (k, r) in s.results.iter().enumerate() {
            match r {
                Some(r) => zs.push_str(&format!("{a},{k},{},{}\n", r.z, r.p_value)),
                None => zs.push_str(&format!("{a},{k},,\n")),
            }
        }
        rows.push(CalibrationRow {
            amplitude: a,
            n: scen.n,
            reps: s.reps,
            level: s.level,
            rejections: s.rejections,
            failures: s.failures,
            rejection_rate: s.rejection_rate,
            mean_z: s.mean_z,
            sd_z: s.sd_z,
        });
    }
    out.write("calibration.csv", table.as_bytes())?;
    out.write("calibration_z.csv", zs.as_bytes())?;
    out.json("calibration.json", &rows)
}
