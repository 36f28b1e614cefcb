use crate::error::{Error, Result};
use crate::goftest::PathPoint;
use crate::netcore::{DynamicNetwork, Pair};
use crate::partition::PartitionAssignment;
use crate::simulate::{CovariateField, EventLog};
use nalgebra::DVector;
use std::collections::BTreeMap;
use std::io::{Read, Write};

fn reader<R: Read>(r: R) -> csv::Reader<R> {
    csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(r)
}

fn field<T: std::str::FromStr>(rec: &csv::StringRecord, k: usize, line: u64) -> Result<T> {
    rec.get(k)
        .and_then(|s| s.parse().ok())
        .ok_or_else(|| Error::Data(format!("line {line}: bad or missing column {}", k + 1)))
}

/// `i,j,start,end`, one row per activity interval.
pub fn write_network_csv<W: Write>(net: &DynamicNetwork, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["i", "j", "start", "end"])?;
    for (p, ivs) in net.activity() {
        for iv in ivs {
            w.write_record([p.i.to_string(), p.j.to_string(), iv.start.to_string(), iv.end.to_string()])?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Reads `i,j,start,end`; the vertex count defaults to the largest id plus one.
pub fn read_network_csv<R: Read>(input: R, directed: bool, horizon: f64, n: Option<usize>) -> Result<DynamicNetwork> {
    let mut rows = Vec::new();
    for (k, rec) in reader(input).records().enumerate() {
        let rec = rec?;
        let line = k as u64 + 2;
        rows.push((field::<usize>(&rec, 0, line)?, field::<usize>(&rec, 1, line)?, field(&rec, 2, line)?, field(&rec, 3, line)?));
    }
    let max_id = rows.iter().map(|r| r.0.max(r.1) + 1).max().unwrap_or(0);
    let n = n.unwrap_or(max_id);
    if max_id > n {
        return Err(Error::Data(format!("vertex id {} exceeds vertex count {n}", max_id - 1)));
    }
    let mut net = DynamicNetwork::new(n, directed, horizon)?;
    for (i, j, a, b) in rows {
        net.add_interval(Pair::new(i, j), a, b)?;
    }
    Ok(net)
}

/// `time,i,j` sorted by time, ties by pair.
pub fn write_events_csv<W: Write>(log: &EventLog, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["time", "i", "j"])?;
    for (t, p) in log.sorted_events() {
        w.write_record([t.to_string(), p.i.to_string(), p.j.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_events_csv<R: Read>(input: R, horizon: f64) -> Result<EventLog> {
    let mut per_pair: BTreeMap<Pair, Vec<f64>> = BTreeMap::new();
    for (k, rec) in reader(input).records().enumerate() {
        let rec = rec?;
        let line = k as u64 + 2;
        let t: f64 = field(&rec, 0, line)?;
        let p = Pair::new(field(&rec, 1, line)?, field(&rec, 2, line)?);
        per_pair.entry(p).or_default().push(t);
    }
    let mut log = EventLog::new(horizon);
    for (p, ts) in per_pair {
        log.set_times(p, ts)?;
    }
    Ok(log)
}

/// `i,j,k,m` with 0-based block type `k` and block number `m`.
pub fn write_partition_csv<W: Write>(p: &PartitionAssignment, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["i", "j", "k", "m"])?;
    for (pair, (k, m)) in &p.assign {
        w.write_record([pair.i.to_string(), pair.j.to_string(), k.to_string(), m.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_partition_csv<R: Read>(input: R) -> Result<BTreeMap<Pair, (usize, usize)>> {
    let mut out = BTreeMap::new();
    for (k, rec) in reader(input).records().enumerate() {
        let rec = rec?;
        let line = k as u64 + 2;
        let p = Pair::new(field(&rec, 0, line)?, field(&rec, 1, line)?);
        if out.insert(p, (field(&rec, 2, line)?, field(&rec, 3, line)?)).is_some() {
            return Err(Error::Data(format!("line {line}: pair {p} assigned twice")));
        }
    }
    Ok(out)
}

/// `t0,theta_1,...,theta_q,converged,iters,weight`; failed points have empty thetas.
pub fn write_path_csv<W: Write>(path: &[PathPoint], q: usize, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["t0".to_string()];
    header.extend((1..=q).map(|k| format!("theta_{k}")));
    header.extend(["converged".to_string(), "iters".to_string(), "weight".to_string()]);
    w.write_record(&header)?;
    for pt in path {
        let mut row = vec![pt.t0.to_string()];
        match &pt.theta {
            Some(th) => row.extend(th.iter().map(|v| v.to_string())),
            None => row.extend(std::iter::repeat_n(String::new(), q)),
        }
        row.push(pt.converged.to_string());
        row.push(pt.iters.to_string());
        row.push(pt.weight.to_string());
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

/// `i,j,x_1,...,x_q` with the covariate of every active pair of `net` at time `t`.
pub fn write_covariates_csv<W: Write>(cov: &CovariateField, net: &DynamicNetwork, t: f64, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["i".to_string(), "j".to_string()];
    header.extend((1..=cov.dim()).map(|k| format!("x_{k}")));
    w.write_record(&header)?;
    for p in net.pairs() {
        let x = cov.eval(p, t)?;
        let mut row = vec![p.i.to_string(), p.j.to_string()];
        row.extend(x.iter().map(|v| v.to_string()));
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

/// Reads a static per-pair covariate table `i,j,x_1,...,x_q`.
pub fn read_covariates_csv<R: Read>(input: R) -> Result<CovariateField> {
    let mut rdr = reader(input);
    let q = rdr.headers()?.len().checked_sub(2).filter(|&q| q > 0).ok_or_else(|| {
        Error::Data("covariate table needs columns i,j and at least one covariate".into())
    })?;
    let mut values = BTreeMap::new();
    for (k, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let line = k as u64 + 2;
        let p = Pair::new(field(&rec, 0, line)?, field(&rec, 1, line)?);
        let x = (0..q).map(|c| field(&rec, c + 2, line)).collect::<Result<Vec<f64>>>()?;
        values.insert(p, DVector::from_vec(x));
    }
    CovariateField::static_per_pair(q, values)
}
