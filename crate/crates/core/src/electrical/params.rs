use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Converter hardware of one 12 MW turbine, per-unit on its own rating.
/// Values reproduce the benchmark turbine converter data.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConverterParams {
    /// Rated power [MVA].
    pub s_base_mva: f64,
    /// Switching frequency [Hz].
    pub fsw_hz: f64,
    pub kmod: f64,
    pub vdc_nom_pu: f64,
    pub lf_pu: f64,
    pub rcf_pu: f64,
    pub cf_pu: f64,
    /// Dc capacitance as a stored-energy time constant: `H_dc = cdc * vdc^2 / 2`.
    pub cdc_pu: f64,
    /// Turbine transformer rating [MVA].
    pub st_mva: f64,
    /// Transformer resistance on its own rating [pu].
    pub rt_pu: f64,
    /// Transformer reactance on its own rating [pu].
    pub lt_pu: f64,
}

impl Default for ConverterParams {
    fn default() -> Self {
        Self {
            s_base_mva: 12.0,
            fsw_hz: 2950.0,
            kmod: 3f64.sqrt() / 2.0,
            vdc_nom_pu: 2.0,
            lf_pu: 0.1055776,
            rcf_pu: 0.003,
            cf_pu: 0.0757204,
            cdc_pu: 6.6654e-3,
            st_mva: 14.0,
            rt_pu: 0.0054,
            lt_pu: 0.1,
        }
    }
}

impl ConverterParams {
    /// Filter resistance, fixed at `lf / 20`.
    pub fn rf_pu(&self) -> f64 {
        self.lf_pu / 20.0
    }

    /// Sampling frequency of the discrete controller [Hz].
    pub fn fsamp_hz(&self) -> f64 {
        2.0 * self.fsw_hz
    }

    /// Transformer (r, x) re-based onto the converter rating.
    pub fn transformer_on_unit_base(&self) -> (f64, f64) {
        let k = self.s_base_mva / self.st_mva;
        (self.rt_pu * k, self.lt_pu * k)
    }

    /// Equivalent inertia constant of the energy stored in the dc capacitor
    /// at nominal voltage [s].
    pub fn dc_inertia_s(&self) -> f64 {
        0.5 * self.cdc_pu * self.vdc_nom_pu * self.vdc_nom_pu
    }

    pub fn validate(&self) -> Result<()> {
        let fields = [
            self.s_base_mva,
            self.fsw_hz,
            self.kmod,
            self.vdc_nom_pu,
            self.lf_pu,
            self.rcf_pu,
            self.cf_pu,
            self.cdc_pu,
            self.st_mva,
            self.rt_pu,
            self.lt_pu,
        ];
        if fields.iter().all(|v| v.is_finite() && *v > 0.0) && self.kmod <= 1.0 {
            Ok(())
        } else {
            Err(Error::InvalidParameter("converter parameters must be positive".into()))
        }
    }
}
