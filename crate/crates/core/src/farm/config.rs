//! Farm and control configuration as read from scenario files.
//!
//! Network data defaults are synthetic: they are calibrated so that the
//! series reactance from the grid source to a turbine PCC is about 0.63 pu
//! and the short-circuit ratio at the 66 kV bus is about 2, both on the
//! 420 MVA farm base.

use serde::{Deserialize, Serialize};

use crate::electrical::{ConverterParams, DcRegulator, ThevGrid};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CableConfig {
    /// Total series resistance on the farm base.
    pub r_pu: f64,
    pub x_pu: f64,
    /// Total shunt susceptance on the farm base.
    pub b_pu: f64,
    pub sections: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SeriesConfig {
    pub r_pu: f64,
    pub x_pu: f64,
}

/// Equivalent collector feeder of one string, on the string's own rating.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CollectorConfig {
    pub r_pu: f64,
    pub x_pu: f64,
    pub b_pu: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FarmConfig {
    #[serde(default = "default_s_base")]
    pub s_base_mva: f64,
    #[serde(default = "default_f_base")]
    pub f_base_hz: f64,
    #[serde(default = "default_strings")]
    pub strings: usize,
    #[serde(default = "default_turbines")]
    pub turbines_per_string: usize,
    #[serde(default)]
    pub grid: ThevGrid,
    #[serde(default = "default_cable")]
    pub hvac_cable: CableConfig,
    #[serde(default = "default_plant_transformer")]
    pub plant_transformer: SeriesConfig,
    /// One entry per string, or a single entry applied to every string.
    #[serde(default = "default_collectors")]
    pub collectors: Vec<CollectorConfig>,
    #[serde(default)]
    pub converter: ConverterParams,
    #[serde(default)]
    pub dc_regulator: DcRegulator,
    /// Loss tangent `rc * b` at nominal frequency of the cable and collector
    /// shunt capacitances, realized as a resistor in series with each one.
    /// Damps the lumped pi-section resonances in the kHz range.
    #[serde(default = "default_shunt_loss_tangent")]
    pub shunt_loss_tangent: f64,
}

fn default_shunt_loss_tangent() -> f64 {
    0.02
}
fn default_s_base() -> f64 {
    420.0
}
fn default_f_base() -> f64 {
    50.0
}
fn default_strings() -> usize {
    7
}
fn default_turbines() -> usize {
    5
}
fn default_cable() -> CableConfig {
    CableConfig {
        r_pu: 0.0115,
        x_pu: 0.225,
        b_pu: 0.12,
        sections: 10,
    }
}
fn default_plant_transformer() -> SeriesConfig {
    SeriesConfig { r_pu: 0.003, x_pu: 0.12 }
}
fn default_collectors() -> Vec<CollectorConfig> {
    vec![CollectorConfig {
        r_pu: 0.009,
        x_pu: 0.045,
        b_pu: 0.01,
    }]
}

impl Default for FarmConfig {
    fn default() -> Self {
        Self {
            s_base_mva: default_s_base(),
            f_base_hz: default_f_base(),
            strings: default_strings(),
            turbines_per_string: default_turbines(),
            grid: ThevGrid::default(),
            hvac_cable: default_cable(),
            plant_transformer: default_plant_transformer(),
            collectors: default_collectors(),
            converter: ConverterParams::default(),
            dc_regulator: DcRegulator::default(),
            shunt_loss_tangent: default_shunt_loss_tangent(),
        }
    }
}

impl FarmConfig {
    pub fn turbine_mva(&self) -> f64 {
        self.converter.s_base_mva
    }

    pub fn string_mva(&self) -> f64 {
        self.turbine_mva() * self.turbines_per_string as f64
    }

    /// Collector of string `s` (0-based).
    pub fn collector(&self, s: usize) -> CollectorConfig {
        if self.collectors.len() == 1 {
            self.collectors[0]
        } else {
            self.collectors[s]
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.strings == 0 || self.turbines_per_string == 0 {
            return Err(Error::Schema("farm needs at least one string and one turbine".into()));
        }
        let total = self.string_mva() * self.strings as f64;
        if (total - self.s_base_mva).abs() > 1e-9 * self.s_base_mva {
            return Err(Error::Schema(format!(
                "sum of unit ratings {total} MVA differs from farm base {} MVA",
                self.s_base_mva
            )));
        }
        if self.collectors.len() != 1 && self.collectors.len() != self.strings {
            return Err(Error::Schema(format!(
                "collectors must list 1 or {} entries, got {}",
                self.strings,
                self.collectors.len()
            )));
        }
        if self.hvac_cable.sections == 0 {
            return Err(Error::Schema("hvac_cable.sections must be >= 1".into()));
        }
        if !(self.f_base_hz > 0.0) {
            return Err(Error::Schema("f_base_hz must be > 0".into()));
        }
        if !(self.shunt_loss_tangent >= 0.0 && self.shunt_loss_tangent.is_finite()) {
            return Err(Error::Schema("shunt_loss_tangent must be >= 0".into()));
        }
        self.converter.validate()?;
        Ok(())
    }
}

/// Control settings shared by all units unless overridden.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ControlConfig {
    #[serde(default = "default_h")]
    pub h_s: f64,
    /// Damping ratio used to design the rotor gain; ignored when `kd` is set.
    #[serde(default = "default_zeta")]
    pub zeta: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kd: Option<f64>,
    #[serde(default = "default_lv")]
    pub lv_pu: f64,
    #[serde(default = "default_rv")]
    pub rv_pu: f64,
    #[serde(default = "default_imax")]
    pub i_max_pu: f64,
    #[serde(default = "default_true")]
    pub limiter: bool,
    #[serde(default = "default_kq")]
    pub kq: f64,
    #[serde(default = "default_vref")]
    pub v_ref_pu: f64,
    #[serde(default)]
    pub kpv: f64,
    #[serde(default = "default_kiv")]
    pub kiv: f64,
    #[serde(default = "default_wcc")]
    pub current_bandwidth_rad_s: f64,
    #[serde(default = "default_wlpf")]
    pub omega_lpf_rad_s: f64,
    /// Sample period of the digital controller. The solver step must divide
    /// it.
    #[serde(default = "default_ts")]
    pub sample_period_s: f64,
}

fn default_h() -> f64 {
    4.0
}
fn default_zeta() -> f64 {
    0.7
}
fn default_lv() -> f64 {
    0.25
}
fn default_rv() -> f64 {
    0.0125
}
fn default_imax() -> f64 {
    1.2
}
fn default_true() -> bool {
    true
}
fn default_kq() -> f64 {
    0.05
}
fn default_vref() -> f64 {
    1.0
}
fn default_kiv() -> f64 {
    30.0
}
fn default_wcc() -> f64 {
    150.0
}
fn default_wlpf() -> f64 {
    100.0
}
fn default_ts() -> f64 {
    5e-5
}

impl Default for ControlConfig {
    fn default() -> Self {
        Self {
            h_s: default_h(),
            zeta: default_zeta(),
            kd: None,
            lv_pu: default_lv(),
            rv_pu: default_rv(),
            i_max_pu: default_imax(),
            limiter: true,
            kq: default_kq(),
            v_ref_pu: default_vref(),
            kpv: 0.0,
            kiv: default_kiv(),
            current_bandwidth_rad_s: default_wcc(),
            omega_lpf_rad_s: default_wlpf(),
            sample_period_s: default_ts(),
        }
    }
}

/// Per-string deviation from the shared control settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UnitOverride {
    /// 1-based string index.
    pub string: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub h_s: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub zeta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kd: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UnitsConfig {
    /// Active power per string on the string rating; one entry applies to all.
    pub dispatch_pu: Vec<f64>,
    #[serde(default)]
    pub control: ControlConfig,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub overrides: Vec<UnitOverride>,
}

impl UnitsConfig {
    pub fn uniform(dispatch: f64) -> Self {
        Self {
            dispatch_pu: vec![dispatch],
            control: ControlConfig::default(),
            overrides: Vec::new(),
        }
    }

    pub fn string_dispatch(&self, strings: usize) -> Result<Vec<f64>> {
        let d = match self.dispatch_pu.len() {
            1 => vec![self.dispatch_pu[0]; strings],
            n if n == strings => self.dispatch_pu.clone(),
            n => {
                return Err(Error::Schema(format!(
                    "dispatch_pu must list 1 or {strings} entries, got {n}"
                )))
            }
        };
        if let Some(bad) = d.iter().find(|p| !(0.0..=1.0).contains(*p)) {
            return Err(Error::Schema(format!("dispatch {bad} pu outside [0, 1]")));
        }
        Ok(d)
    }

    pub fn validate(&self, strings: usize) -> Result<()> {
        self.string_dispatch(strings)?;
        if !(self.control.sample_period_s > 0.0 && self.control.sample_period_s.is_finite()) {
            return Err(Error::Schema(format!(
                "sample_period_s = {} must be > 0",
                self.control.sample_period_s
            )));
        }
        for o in &self.overrides {
            if o.string == 0 || o.string > strings {
                return Err(Error::Schema(format!("override for unknown string {}", o.string)));
            }
        }
        Ok(())
    }
}
