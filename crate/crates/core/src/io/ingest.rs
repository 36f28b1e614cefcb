use crate::error::{Error, Result};
use crate::netcore::{DynamicNetwork, Pair};
use crate::simulate::{CovariateField, EventLog};
use chrono::NaiveDateTime;
use nalgebra::dvector;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, HashMap};
use std::io::Read;

/// Shift applied to repeated event times within one pair, in hours.
pub const TIE_NUDGE: f64 = 1e-7;

/// Maps external vertex ids to `0..n` in order of first appearance.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct VertexRegistry {
    ids: Vec<String>,
    #[serde(skip)]
    index: HashMap<String, usize>,
}

impl VertexRegistry {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn intern(&mut self, id: &str) -> usize {
        if let Some(&k) = self.index.get(id) {
            return k;
        }
        let k = self.ids.len();
        self.ids.push(id.to_string());
        self.index.insert(id.to_string(), k);
        k
    }

    pub fn get(&self, id: &str) -> Option<usize> {
        self.index.get(id).copied()
    }

    pub fn name(&self, k: usize) -> Option<&str> {
        self.ids.get(k).map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TimeFormat {
    EpochSeconds,
    /// A `chrono` pattern such as `%Y-%m-%d %H:%M:%S`, read as naive wall-clock time.
    Pattern(String),
}

impl TimeFormat {
    pub fn parse(&self, s: &str) -> Option<f64> {
        match self {
            TimeFormat::EpochSeconds => s.trim().parse().ok(),
            TimeFormat::Pattern(p) => {
                NaiveDateTime::parse_from_str(s.trim(), p).ok().map(|d| d.and_utc().timestamp_millis() as f64 / 1000.0)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IngestConfig {
    pub time_column: String,
    pub origin_column: String,
    pub destination_column: String,
    /// Trip duration in seconds, collected per pair when present.
    pub duration_column: Option<String>,
    pub time_format: TimeFormat,
    /// Window `[start, end)` in the same format as the time column.
    pub window_start: String,
    pub window_end: String,
    /// Length of one internal time unit in hours.
    pub unit_hours: f64,
    pub directed: bool,
    pub max_skip_fraction: f64,
}

impl IngestConfig {
    /// Column names of the Capital Bikeshare trip histories.
    pub fn bikeshare(window_start: &str, window_end: &str) -> Self {
        Self {
            time_column: "Start date".into(),
            origin_column: "Start station number".into(),
            destination_column: "End station number".into(),
            duration_column: Some("Duration".into()),
            time_format: TimeFormat::Pattern("%Y-%m-%d %H:%M:%S".into()),
            window_start: window_start.into(),
            window_end: window_end.into(),
            unit_hours: 1.0,
            directed: false,
            max_skip_fraction: 0.01,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Ingested {
    pub log: EventLog,
    pub rows: usize,
    pub skipped: usize,
    pub outside_window: usize,
    pub self_loops: usize,
    pub nudged: usize,
    /// Trip durations in seconds per pair.
    pub durations: BTreeMap<Pair, Vec<f64>>,
}

/// Reads a trip log, registering vertices on first appearance, and returns the
/// events inside the window with times in units since the window start.
///
/// Unparseable rows are skipped and counted; more than `max_skip_fraction`
/// of them is a data error. Self-loops are dropped. Repeated times within a
/// pair are separated by [`TIE_NUDGE`] hours.
pub fn ingest_events<R: Read>(input: R, cfg: &IngestConfig, registry: &mut VertexRegistry) -> Result<Ingested> {
    let start = cfg
        .time_format
        .parse(&cfg.window_start)
        .ok_or_else(|| Error::Config(format!("cannot parse window start {:?}", cfg.window_start)))?;
    let end = cfg
        .time_format
        .parse(&cfg.window_end)
        .ok_or_else(|| Error::Config(format!("cannot parse window end {:?}", cfg.window_end)))?;
    if !(end > start) || !(cfg.unit_hours > 0.0) {
        return Err(Error::Config("window must be nonempty and unit_hours positive".into()));
    }
    let scale = 3600.0 * cfg.unit_hours;
    let horizon = (end - start) / scale;
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).flexible(true).from_reader(input);
    let headers = rdr.headers()?.clone();
    let col = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::Config(format!("column {name:?} not found in header")))
    };
    let (ct, co, cd) = (col(&cfg.time_column)?, col(&cfg.origin_column)?, col(&cfg.destination_column)?);
    let cdur = cfg.duration_column.as_deref().map(col).transpose()?;
    let mut per_pair: BTreeMap<Pair, Vec<f64>> = BTreeMap::new();
    let mut durations: BTreeMap<Pair, Vec<f64>> = BTreeMap::new();
    let (mut rows, mut skipped, mut outside, mut loops) = (0usize, 0usize, 0usize, 0usize);
    for rec in rdr.records() {
        rows += 1;
        let Ok(rec) = rec else {
            skipped += 1;
            continue;
        };
        let parsed = (|| {
            let t = cfg.time_format.parse(rec.get(ct)?)?;
            let o = rec.get(co)?.to_string();
            let d = rec.get(cd)?.to_string();
            if o.is_empty() || d.is_empty() {
                return None;
            }
            let dur = match cdur {
                Some(c) => Some(rec.get(c)?.parse::<f64>().ok()?),
                None => None,
            };
            Some((t, o, d, dur))
        })();
        let Some((t, o, d, dur)) = parsed else {
            skipped += 1;
            continue;
        };
        if t < start || t >= end {
            outside += 1;
            continue;
        }
        if o == d {
            loops += 1;
            continue;
        }
        let p = Pair::new(registry.intern(&o), registry.intern(&d));
        let p = if cfg.directed { p } else { p.normalized() };
        per_pair.entry(p).or_default().push((t - start) / scale);
        if let Some(x) = dur {
            durations.entry(p).or_default().push(x);
        }
    }
    if rows > 0 && skipped as f64 > cfg.max_skip_fraction * rows as f64 {
        return Err(Error::Data(format!("{skipped} of {rows} rows could not be parsed")));
    }
    if skipped > 0 {
        log::warn!("{skipped} unparseable rows skipped");
    }
    let mut log = EventLog::new(horizon);
    let mut nudged = 0usize;
    for (p, mut ts) in per_pair {
        ts.sort_by(f64::total_cmp);
        for k in 1..ts.len() {
            if ts[k] <= ts[k - 1] {
                ts[k] = ts[k - 1] + TIE_NUDGE;
                nudged += 1;
            }
        }
        ts.retain(|&t| t <= horizon);
        log.set_times(p, ts)?;
    }
    Ok(Ingested { log, rows, skipped, outside_window: outside, self_loops: loops, nudged, durations })
}

/// Static network on `[0, horizon]` containing the pairs with at least
/// `threshold` events in `prior`.
pub fn build_conservative_network(
    prior: &EventLog,
    threshold: usize,
    n: usize,
    directed: bool,
    horizon: f64,
) -> Result<DynamicNetwork> {
    if threshold == 0 {
        return Err(Error::Config("threshold must be at least 1".into()));
    }
    let mut counts: BTreeMap<Pair, usize> = BTreeMap::new();
    for (p, ts) in prior.per_pair() {
        let key = if directed { p } else { p.normalized() };
        *counts.entry(key).or_default() += ts.len();
    }
    DynamicNetwork::static_network(
        n,
        directed,
        horizon,
        counts.into_iter().filter(|&(_, c)| c >= threshold).map(|(p, _)| p),
    )
}

/// `X = (1, max(ln d, 0), max(ln d, 0)^2)` from a typical trip duration `d` in minutes.
pub fn distance_covariates(minutes: &BTreeMap<Pair, f64>, net: &DynamicNetwork) -> Result<CovariateField> {
    let mut values = BTreeMap::new();
    for p in net.pairs() {
        let d = *minutes
            .get(&p)
            .ok_or_else(|| Error::Config(format!("no duration for active pair {p}")))?;
        if !(d > 0.0) {
            return Err(Error::Config(format!("duration {d} for {p} must be positive")));
        }
        let l = d.ln().max(0.0);
        values.insert(p, dvector![1.0, l, l * l]);
    }
    CovariateField::static_per_pair(3, values)
}

/// Median of each pair's durations, converted from seconds to minutes.
pub fn median_minutes(durations: &BTreeMap<Pair, Vec<f64>>) -> BTreeMap<Pair, f64> {
    durations
        .iter()
        .filter(|(_, v)| !v.is_empty())
        .map(|(p, v)| {
            let mut s = v.clone();
            s.sort_by(f64::total_cmp);
            let m = s.len();
            let med = if m % 2 == 1 { s[m / 2] } else { 0.5 * (s[m / 2 - 1] + s[m / 2]) };
            (*p, med / 60.0)
        })
        .collect()
}
