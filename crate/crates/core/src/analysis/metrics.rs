use serde::{Deserialize, Serialize};

use crate::electrical::GridEvent;
use crate::error::{Error, Result};
use crate::farm::TimeSeries;

/// Constant-RoCoF interval of a frequency ramp.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Ramp {
    pub t_start_s: f64,
    pub t_end_s: f64,
}

impl Ramp {
    /// The first frequency ramp in `events`, starting from `f_base`.
    pub fn from_events(events: &[GridEvent], f_base: f64) -> Option<Self> {
        events.iter().find_map(|e| match *e {
            GridEvent::Rocof {
                t_start_s,
                hz_per_s,
                f_end_hz,
            } if hz_per_s != 0.0 => Some(Self {
                t_start_s,
                t_end_s: t_start_s + ((f_end_hz - f_base) / hz_per_s).abs(),
            }),
            _ => None,
        })
    }

    /// Averaging window that skips the first 1.5 s of rotor transient and
    /// the last 0.1 s before the ramp stops.
    pub fn default_window(&self) -> (f64, f64) {
        (self.t_start_s + 1.5, self.t_end_s - 0.1)
    }
}

/// Mean rise of `channel` over `window` relative to its mean over the
/// half second before the ramp.
pub fn inertial_power(ts: &TimeSeries, channel: &str, ramp: &Ramp, window: Option<(f64, f64)>) -> Result<f64> {
    let (start, end) = window.unwrap_or_else(|| ramp.default_window());
    if !(start >= ramp.t_start_s && end <= ramp.t_end_s && start < end) {
        return Err(Error::InvalidWindow { start, end });
    }
    let p = ts.get(channel)?;
    let mean = |a: f64, b: f64| -> Option<f64> {
        let (i0, i1) = (ts.index_at(a), ts.index_at(b));
        (i1 > i0).then(|| p[i0..i1].iter().sum::<f64>() / (i1 - i0) as f64)
    };
    let pre = mean((ramp.t_start_s - 0.5).max(0.0), ramp.t_start_s).ok_or(Error::InvalidWindow {
        start: ramp.t_start_s - 0.5,
        end: ramp.t_start_s,
    })?;
    let during = mean(start, end).ok_or(Error::InvalidWindow { start, end })?;
    Ok(during - pre)
}

/// Divergence threshold relative to the peak magnitude of the reference
/// trace.
pub const DIVERGENCE_REL_TOL: f64 = 0.01;

/// Difference metrics between two runs of the same channel.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceComparison {
    pub channel: String,
    pub max_abs: f64,
    /// `|a - b| / |a|` in the 2-norm; not symmetric in its arguments.
    pub rel_l2: f64,
    /// Last time the traces differ by more than [`DIVERGENCE_REL_TOL`] of
    /// the peak of `a`; `None` if they never do.
    pub divergence_until_s: Option<f64>,
}

pub fn compare_traces(a: &TimeSeries, b: &TimeSeries, channel: &str) -> Result<TraceComparison> {
    if a.len() != b.len() {
        return Err(Error::AxisMismatch(format!("{} vs {} samples", a.len(), b.len())));
    }
    if let Some(k) = a.t.iter().zip(&b.t).position(|(x, y)| (x - y).abs() > 1e-9) {
        return Err(Error::AxisMismatch(format!("t = {} vs {} at sample {k}", a.t[k], b.t[k])));
    }
    let (xa, xb) = (a.get(channel)?, b.get(channel)?);
    let peak = xa.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let tol = DIVERGENCE_REL_TOL * peak;
    let mut max_abs = 0.0f64;
    let mut num = 0.0;
    let mut den = 0.0;
    let mut until = None;
    for ((t, x), y) in a.t.iter().zip(xa).zip(xb) {
        let d = (x - y).abs();
        max_abs = max_abs.max(d);
        num += d * d;
        den += x * x;
        if d > tol {
            until = Some(*t);
        }
    }
    let rel_l2 = if num == 0.0 { 0.0 } else { (num / den).sqrt() };
    Ok(TraceComparison {
        channel: channel.to_string(),
        max_abs,
        rel_l2,
        divergence_until_s: until,
    })
}
