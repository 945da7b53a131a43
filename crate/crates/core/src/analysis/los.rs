use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::farm::{unit_channel, TimeSeries};

/// Synchronism record of one unit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UnitLos {
    /// 1-based unit number, matching the channel names.
    pub unit: usize,
    pub pole_slips: u32,
    pub first_slip_s: Option<f64>,
    /// Largest excursion of the relative rotor angle from its initial value.
    pub max_delta_rad: f64,
    /// Sampled intervals with the current limiter engaged.
    pub limiter_intervals: Vec<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LosReport {
    pub units: Vec<UnitLos>,
    /// Units that slipped at least once, earliest first.
    pub slipped: Vec<usize>,
}

impl LosReport {
    pub fn lost_synchronism(&self) -> bool {
        !self.slipped.is_empty()
    }

    pub fn first_to_slip(&self) -> Option<usize> {
        self.slipped.first().copied()
    }

    pub fn total_slips(&self) -> u32 {
        self.units.iter().map(|u| u.pole_slips).sum()
    }

    /// Replace the sampled limiter intervals with ones captured at the
    /// solver rate.
    pub fn with_limiter_intervals(mut self, intervals: &[Vec<(f64, f64)>]) -> Self {
        for (u, iv) in self.units.iter_mut().zip(intervals) {
            u.limiter_intervals = iv.clone();
        }
        self
    }
}

/// Count pole slips from the unwrapped rotor angle relative to the grid.
///
/// A slip is counted each time the angle moves a further full turn away
/// from its value at the first sample.
pub fn detect_los(ts: &TimeSeries) -> Result<LosReport> {
    let n_units = ts.unit_count();
    let mut units = Vec::with_capacity(n_units);
    for k in 0..n_units {
        let theta = ts.get(&unit_channel(k, "theta_rad"))?;
        let theta0 = theta.first().copied().unwrap_or(0.0);
        let mut slips = 0u32;
        let mut first = None;
        let mut max_delta = 0.0f64;
        for (t, th) in ts.t.iter().zip(theta) {
            let d = (th - theta0).abs();
            max_delta = max_delta.max(d);
            let turns = (d / TAU).floor() as u32;
            if turns > slips {
                slips = turns;
                first.get_or_insert(*t);
            }
        }
        let limiter_intervals = match ts.get(&unit_channel(k, "limited_flag")) {
            Ok(flag) => flag_intervals(&ts.t, flag),
            Err(_) => Vec::new(),
        };
        units.push(UnitLos {
            unit: k + 1,
            pole_slips: slips,
            first_slip_s: first,
            max_delta_rad: max_delta,
            limiter_intervals,
        });
    }
    let mut slipped: Vec<&UnitLos> = units.iter().filter(|u| u.pole_slips > 0).collect();
    slipped.sort_by(|a, b| a.first_slip_s.partial_cmp(&b.first_slip_s).unwrap());
    let slipped = slipped.iter().map(|u| u.unit).collect();
    Ok(LosReport { units, slipped })
}

fn flag_intervals(t: &[f64], flag: &[f64]) -> Vec<(f64, f64)> {
    let mut out = Vec::new();
    let mut start = None;
    for (tk, f) in t.iter().zip(flag) {
        match (*f > 0.5, start) {
            (true, None) => start = Some(*tk),
            (false, Some(t0)) => {
                out.push((t0, *tk));
                start = None;
            }
            _ => {}
        }
    }
    if let (Some(t0), Some(t1)) = (start, t.last()) {
        out.push((t0, *t1));
    }
    out
}
