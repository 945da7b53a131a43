use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::electrical::ConverterTermination;
use crate::error::{Error, Result};
use crate::farm::FarmModel;
use crate::foundation::{change_base_complex, PerUnitBase};

/// How converters are represented during a scan.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScanMode {
    /// Converter branch and filter capacitor removed.
    #[default]
    Open,
    /// Converter branch replaced by its virtual impedance `rv + j lv`.
    Terminated,
}

/// Driving-point impedance of one bus over frequency.
///
/// A frequency at which the network admittance matrix is singular holds an
/// infinite impedance rather than failing the whole scan.
#[derive(Debug, Clone, PartialEq)]
pub struct ImpedanceScan {
    pub bus: String,
    pub base: PerUnitBase,
    pub freqs_hz: Vec<f64>,
    pub z: Vec<Complex64>,
}

impl ImpedanceScan {
    pub fn is_resonant(&self, i: usize) -> bool {
        !self.z[i].is_finite()
    }

    /// The same scan expressed on another power base.
    pub fn rebased(&self, base: &PerUnitBase) -> Result<Self> {
        let z = self
            .z
            .iter()
            .map(|z| {
                if z.is_finite() {
                    change_base_complex(*z, &self.base, base)
                } else {
                    Ok(*z)
                }
            })
            .collect::<Result<_>>()?;
        Ok(Self {
            bus: self.bus.clone(),
            base: *base,
            freqs_hz: self.freqs_hz.clone(),
            z,
        })
    }
}

/// `points` logarithmically spaced frequencies from `fmin` to `fmax`.
pub fn log_frequencies(fmin: f64, fmax: f64, points: usize) -> Result<Vec<f64>> {
    if !(fmin > 0.0) || !(fmax >= fmin) || points == 0 {
        return Err(Error::InvalidParameter(format!(
            "frequency range [{fmin}, {fmax}] Hz with {points} points"
        )));
    }
    if points == 1 {
        return Ok(vec![fmin]);
    }
    let (a, b) = (fmin.ln(), fmax.ln());
    Ok((0..points)
        .map(|k| (a + (b - a) * k as f64 / (points - 1) as f64).exp())
        .collect())
}

/// Impedance seen at `bus` with all sources shorted, on the farm base.
pub fn scan_impedance(model: &FarmModel, bus: &str, freqs_hz: &[f64], mode: ScanMode) -> Result<ImpedanceScan> {
    let node = model.network.node_index(bus).ok_or_else(|| Error::UnknownBus {
        name: bus.to_string(),
        available: model.network.node_names().join(", "),
    })?;
    if let Some(f) = freqs_hz.iter().find(|f| !(**f > 0.0)) {
        return Err(Error::InvalidParameter(format!("scan frequency {f} Hz must be > 0")));
    }
    if freqs_hz.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidParameter("scan frequencies must be strictly increasing".into()));
    }
    let termination = match mode {
        ScanMode::Open => ConverterTermination::Open,
        ScanMode::Terminated => ConverterTermination::Terminated(model.virtual_impedances()),
    };
    let f_base = model.base.f_base;
    let z = freqs_hz
        .par_iter()
        .map(|f| {
            model
                .network
                .driving_point_impedance(node, f / f_base, &termination)
                .unwrap_or(Complex64::new(f64::INFINITY, f64::INFINITY))
        })
        .collect();
    Ok(ImpedanceScan {
        bus: bus.to_string(),
        base: model.base,
        freqs_hz: freqs_hz.to_vec(),
        z,
    })
}
