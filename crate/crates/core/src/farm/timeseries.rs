use std::collections::BTreeMap;
use std::io::{BufReader, Read, Write};
use std::path::Path;

use crate::error::{Error, Result};

/// Per-unit quantities recorded for every converter, in column order.
pub const UNIT_QUANTITIES: [&str; 8] = ["p_pu", "q_pu", "v_pu", "i_pu", "vdc_pu", "theta_rad", "omega_pu", "limited_flag"];

/// Farm-level quantities, measured at the 400 kV connection point except
/// `vmv`.
pub const FARM_QUANTITIES: [&str; 3] = ["farm_p_pu", "farm_q_pu", "farm_vmv_pu"];

pub fn unit_channel(unit: usize, qty: &str) -> String {
    format!("unit{}_{qty}", unit + 1)
}

/// Uniformly sampled simulation output. Column-major: `data[c][k]` is
/// channel `c` at `t[k]`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct TimeSeries {
    pub t: Vec<f64>,
    pub names: Vec<String>,
    pub data: Vec<Vec<f64>>,
    pub meta: BTreeMap<String, String>,
}

impl TimeSeries {
    pub fn new(names: Vec<String>) -> Self {
        let data = vec![Vec::new(); names.len()];
        Self {
            t: Vec::new(),
            names,
            data,
            meta: BTreeMap::new(),
        }
    }

    /// Channel layout for `units` converters.
    pub fn for_units(units: usize) -> Self {
        let mut names: Vec<String> = (0..units)
            .flat_map(|k| UNIT_QUANTITIES.iter().map(move |q| unit_channel(k, q)))
            .collect();
        names.extend(FARM_QUANTITIES.iter().map(|s| s.to_string()));
        Self::new(names)
    }

    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }

    /// Number of `unit<k>_p_pu` channels.
    pub fn unit_count(&self) -> usize {
        self.names.iter().filter(|n| n.starts_with("unit") && n.ends_with("_p_pu")).count()
    }

    pub fn push(&mut self, t: f64, row: &[f64]) {
        debug_assert_eq!(row.len(), self.names.len());
        self.t.push(t);
        for (col, v) in self.data.iter_mut().zip(row) {
            col.push(*v);
        }
    }

    pub fn channel_index(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    pub fn get(&self, name: &str) -> Result<&[f64]> {
        self.channel_index(name)
            .map(|c| self.data[c].as_slice())
            .ok_or_else(|| Error::ChannelMissing(name.to_string()))
    }

    /// Sample spacing, or 0 for fewer than two samples.
    pub fn sample_interval(&self) -> f64 {
        if self.t.len() < 2 {
            0.0
        } else {
            self.t[1] - self.t[0]
        }
    }

    /// Every `factor`-th sample.
    pub fn decimate(&self, factor: usize) -> Self {
        let factor = factor.max(1);
        let pick = |v: &Vec<f64>| v.iter().step_by(factor).copied().collect::<Vec<_>>();
        Self {
            t: pick(&self.t),
            names: self.names.clone(),
            data: self.data.iter().map(pick).collect(),
            meta: self.meta.clone(),
        }
    }

    /// Copy holding only `channels`, in the given order.
    pub fn select(&self, channels: &[String]) -> Result<Self> {
        let mut data = Vec::with_capacity(channels.len());
        for c in channels {
            data.push(self.get(c)?.to_vec());
        }
        Ok(Self {
            t: self.t.clone(),
            names: channels.to_vec(),
            data,
            meta: self.meta.clone(),
        })
    }

    /// Index of the first sample with `t >= t0`.
    pub fn index_at(&self, t0: f64) -> usize {
        self.t.partition_point(|&t| t < t0 - 1e-9)
    }

    pub fn write_csv(&self, w: impl Write) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        let map = |e: csv::Error| Error::Io(e.to_string());
        let mut header = vec!["t_s".to_string()];
        header.extend(self.names.iter().cloned());
        out.write_record(&header).map_err(map)?;
        let mut row = Vec::with_capacity(header.len());
        for k in 0..self.t.len() {
            row.clear();
            row.push(fmt_num(self.t[k]));
            row.extend(self.data.iter().map(|c| fmt_num(c[k])));
            out.write_record(&row).map_err(map)?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn save_csv(&self, path: &Path) -> Result<()> {
        let f = std::fs::File::create(path)?;
        self.write_csv(std::io::BufWriter::new(f))
    }

    pub fn read_csv(r: impl Read) -> Result<Self> {
        let mut rd = csv::Reader::from_reader(BufReader::new(r));
        let map = |e: csv::Error| Error::Io(e.to_string());
        let header = rd.headers().map_err(map)?.clone();
        if header.get(0) != Some("t_s") {
            return Err(Error::Schema("timeseries CSV must start with a t_s column".into()));
        }
        let names: Vec<String> = header.iter().skip(1).map(str::to_string).collect();
        let mut ts = Self::new(names);
        let mut row = Vec::new();
        for rec in rd.records() {
            let rec = rec.map_err(map)?;
            row.clear();
            for field in rec.iter() {
                row.push(
                    field
                        .parse::<f64>()
                        .map_err(|e| Error::Schema(format!("bad number {field:?}: {e}")))?,
                );
            }
            if row.len() != ts.names.len() + 1 {
                return Err(Error::Schema("ragged timeseries CSV row".into()));
            }
            ts.push(row[0], &row[1..]);
        }
        Ok(ts)
    }

    pub fn load_csv(path: &Path) -> Result<Self> {
        let f = std::fs::File::open(path)?;
        Self::read_csv(f)
    }
}

/// Shortest representation that parses back to the same `f64`.
fn fmt_num(v: f64) -> String {
    format!("{v:?}")
}
