use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Dc voltage below which the link is considered collapsed [pu].
pub const DC_COLLAPSE_PU: f64 = 0.1;

/// One step of `cdc * dvdc/dt = i_mach - p_conv / vdc`.
///
/// `cdc` is the stored-energy time constant in seconds (no `omega_base`
/// scaling). Trapezoidal rule with one fixed-point pass on `p_conv / vdc`.
/// The returned collapse error carries `unit = 0`, `t = 0`; callers fill in
/// their own context.
pub fn dc_link_step(vdc: f64, p_conv: f64, i_mach: f64, cdc: f64, dt: f64) -> Result<f64> {
    if !(vdc > DC_COLLAPSE_PU) {
        return Err(Error::DcCollapse { unit: 0, t: 0.0, vdc });
    }
    let rate = |v: f64| (i_mach - p_conv / v) / cdc;
    let k0 = rate(vdc);
    let predicted = vdc + dt * k0;
    if !(predicted > DC_COLLAPSE_PU) {
        return Err(Error::DcCollapse {
            unit: 0,
            t: 0.0,
            vdc: predicted,
        });
    }
    let next = vdc + 0.5 * dt * (k0 + rate(predicted));
    if !(next > DC_COLLAPSE_PU) {
        return Err(Error::DcCollapse { unit: 0, t: 0.0, vdc: next });
    }
    Ok(next)
}

/// Machine-side current source with a PI dc-voltage regulator on top of the
/// dispatch feed-forward `p_ref / vdc_nom`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DcRegulator {
    pub enabled: bool,
    pub kp: f64,
    pub ki: f64,
}

impl Default for DcRegulator {
    fn default() -> Self {
        // 100 rad/s natural frequency, damping 0.7 on the 6.67 ms capacitor.
        Self {
            enabled: true,
            kp: 0.93,
            ki: 66.7,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct DcRegulatorState {
    pub integrator: f64,
    pub err_prev: f64,
}

impl DcRegulator {
    /// Machine current for the present dc voltage; updates the integrator.
    pub fn current(
        &self,
        i_dispatch: f64,
        vdc_ref: f64,
        vdc: f64,
        state: &mut DcRegulatorState,
        dt: f64,
    ) -> f64 {
        if !self.enabled {
            return i_dispatch;
        }
        let err = vdc_ref - vdc;
        state.integrator += 0.5 * dt * self.ki * (state.err_prev + err);
        state.err_prev = err;
        i_dispatch + self.kp * err + state.integrator
    }
}
