//! Grid-forming converter control chain.
//!
//! Synchronization uses a PI virtual rotor driven by the active-power error:
//! `omega = 1 + kd * e + integral(e) / (2H)`, with `e = p_ref - p_meas`.
//! The internal voltage magnitude comes from a PI excitation loop with a
//! reactive slope. The difference between internal and terminal voltage is
//! applied to a virtual admittance to form the current reference, which is
//! low-pass filtered, magnitude limited and tracked by a decoupled dq current
//! controller. All vectors handled here are in the unit's virtual-rotor frame
//! unless stated otherwise, and all quantities are on the unit's own base.
//!
//! The rotor angle `theta_vsc` is stored relative to the nominal synchronous
//! frame: it advances by `omega_base * (omega_vsc - 1) * dt` per step, which
//! is the absolute advance `omega_base * omega_vsc * dt` minus the frame's own.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::foundation::{rotate_frame, wrap_angle, DqVector, Frame};

/// Upper bound of the internal voltage magnitude.
pub const E_MAG_MAX: f64 = 1.5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GfcParams {
    /// Inertia constant [s].
    pub h: f64,
    /// Proportional gain of the virtual rotor [pu frequency / pu power].
    pub kd: f64,
    /// Virtual inductance [pu].
    pub lv: f64,
    /// Virtual resistance [pu].
    pub rv: f64,
    /// Current magnitude limit [pu].
    pub i_max: f64,
    pub limiter_enabled: bool,
    /// Reactive-power slope of the excitation loop [pu V / pu Q].
    pub kq: f64,
    pub v_ref: f64,
    pub kpv: f64,
    pub kiv: f64,
    pub kpc: f64,
    pub kic: f64,
    /// Filter inductance used for dq decoupling [pu].
    pub lf: f64,
    /// Cutoff of the current-reference low-pass filter [rad/s].
    pub omega_lpf: f64,
    /// Modulation constant [pu].
    pub kmod: f64,
    /// Nominal frequency [Hz].
    pub f_base: f64,
}

impl GfcParams {
    /// Default calibration for a converter with filter `lf`, `rf`.
    ///
    /// The current loop is tuned for a first-order closed-loop response at
    /// `omega_cc` rad/s (pole-zero cancellation of the filter).
    pub fn calibrated(lf: f64, rf: f64, f_base: f64) -> Self {
        let omega_cc = 150.0;
        let omega_base = 2.0 * PI * f_base;
        Self {
            h: 4.0,
            kd: 0.026,
            lv: 0.25,
            rv: 0.0125,
            i_max: 1.2,
            limiter_enabled: true,
            kq: 0.05,
            v_ref: 1.0,
            kpv: 0.0,
            kiv: 30.0,
            kpc: omega_cc * lf / omega_base,
            kic: omega_cc * rf,
            lf,
            omega_lpf: 100.0,
            kmod: 3f64.sqrt() / 2.0,
            f_base,
        }
    }

    pub fn omega_base(&self) -> f64 {
        2.0 * PI * self.f_base
    }

    /// Closed-loop current bandwidth implied by `kpc` [rad/s].
    pub fn current_bandwidth(&self) -> f64 {
        self.kpc * self.omega_base() / self.lf
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str| Err(Error::InvalidParameter(what.to_string()));
        if !(self.h > 0.0) {
            return bad("h must be > 0");
        }
        if !(self.i_max > 0.0) {
            return bad("i_max must be > 0");
        }
        if !(self.lv > 0.0) {
            return bad("lv must be > 0");
        }
        let gains = [
            self.kd,
            self.rv,
            self.kq,
            self.kpv,
            self.kiv,
            self.kpc,
            self.kic,
            self.lf,
        ];
        if gains.iter().any(|g| !(*g >= 0.0)) {
            return bad("gains must be >= 0");
        }
        if !(self.kmod > 0.0 && self.kmod <= 1.0) {
            return bad("kmod must lie in (0, 1]");
        }
        if !(self.omega_lpf > 0.0) {
            return bad("omega_lpf must be > 0");
        }
        if !(self.f_base > 0.0) {
            return bad("f_base must be > 0");
        }
        Ok(())
    }
}

/// First-order low-pass filter state with trapezoidal discretization.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LowPass {
    pub y: DqVector,
    pub u_prev: DqVector,
}

impl LowPass {
    pub fn settled(y: DqVector) -> Self {
        Self { y, u_prev: y }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GfcState {
    /// Rotor angle relative to the nominal synchronous frame, unwrapped [rad].
    pub theta_vsc: f64,
    /// Rotor speed [pu].
    pub omega_vsc: f64,
    pub inertia_integrator: f64,
    pub power_error_prev: f64,
    /// Internal voltage magnitude [pu].
    pub e_mag: f64,
    pub voltage_integrator: f64,
    pub voltage_error_prev: f64,
    pub lpf: LowPass,
    pub current_integrators: DqVector,
    pub current_error_prev: DqVector,
    /// Limiter engaged on the last step.
    pub limited: bool,
    /// Modulation clamp saturated on the last step.
    pub saturated: bool,
}

impl GfcState {
    /// Quiescent state aligned with the grid frame.
    pub fn new(unit: usize) -> Self {
        let f = Frame::Rotor(unit);
        Self {
            theta_vsc: 0.0,
            omega_vsc: 1.0,
            inertia_integrator: 0.0,
            power_error_prev: 0.0,
            e_mag: 1.0,
            voltage_integrator: 1.0,
            voltage_error_prev: 0.0,
            lpf: LowPass::settled(DqVector::zero(f)),
            current_integrators: DqVector::zero(f),
            current_error_prev: DqVector::zero(f),
            limited: false,
            saturated: false,
        }
    }

    pub fn frame(&self) -> Frame {
        self.lpf.y.frame
    }

    /// Rotor angle wrapped to (-pi, pi] for reporting.
    pub fn theta_wrapped(&self) -> f64 {
        wrap_angle(self.theta_vsc)
    }

    fn integrators_frozen(&self) -> bool {
        self.limited || self.saturated
    }
}

/// Advance the virtual rotor by one step.
pub fn inertial_step(p_ref: f64, p_meas: f64, state: &GfcState, params: &GfcParams, dt: f64) -> GfcState {
    let mut s = *state;
    let err = p_ref - p_meas;
    if !state.integrators_frozen() {
        s.inertia_integrator += 0.5 * dt * (state.power_error_prev + err) / (2.0 * params.h);
    }
    s.power_error_prev = err;
    s.omega_vsc = 1.0 + params.kd * err + s.inertia_integrator;
    s.theta_vsc += params.omega_base() * dt * (0.5 * (state.omega_vsc + s.omega_vsc) - 1.0);
    s
}

/// Advance the excitation loop; updates `e_mag`.
pub fn excitation_step(
    v_ref: f64,
    v_meas: f64,
    q_meas: f64,
    state: &GfcState,
    params: &GfcParams,
    dt: f64,
) -> GfcState {
    let mut s = *state;
    let err = v_ref - params.kq * q_meas - v_meas;
    if !state.integrators_frozen() {
        s.voltage_integrator += 0.5 * dt * params.kiv * (state.voltage_error_prev + err);
    }
    s.voltage_error_prev = err;
    let e = params.kpv * err + s.voltage_integrator;
    s.e_mag = e.clamp(0.0, E_MAG_MAX);
    if s.e_mag != e {
        s.voltage_integrator = s.e_mag - params.kpv * err;
    }
    s
}

/// Current reference from the quasi-static virtual admittance:
/// `(e - v_pcc) / (rv + j * omega * lv)`.
pub fn virtual_impedance_currents(
    e_dq: DqVector,
    v_pcc_dq: DqVector,
    params: &GfcParams,
    omega: f64,
) -> Result<DqVector> {
    let z = Complex64::new(params.rv, omega * params.lv);
    if z.norm() == 0.0 {
        return Err(Error::DegenerateAdmittance);
    }
    let i = (e_dq - v_pcc_dq).to_complex() / z;
    Ok(DqVector::from_complex(i, e_dq.frame))
}

/// One trapezoidal step of `y' = omega_lpf * (u - y)`.
pub fn lowpass_step(u: DqVector, state: &LowPass, omega_lpf: f64, dt: f64) -> LowPass {
    let a = 0.5 * omega_lpf * dt;
    let y = (state.y * (1.0 - a) + (state.u_prev + u) * a) * (1.0 / (1.0 + a));
    LowPass { y, u_prev: u }
}

/// Scale `i_ref` down to magnitude `i_max` when it exceeds it.
///
/// Magnitudes within a few ulps of `i_max` pass unchanged, so applying the
/// limiter to its own output is an exact no-op.
pub fn limit_current(i_ref: DqVector, i_max: f64) -> (DqVector, bool) {
    let mag = i_ref.magnitude();
    if mag <= i_max * (1.0 + 4.0 * f64::EPSILON) {
        (i_ref, false)
    } else {
        let kc_lim = mag / i_max;
        (i_ref * (1.0 / kc_lim), true)
    }
}

/// Decoupled dq current control. Returns the voltage command and the state
/// with updated current integrators.
pub fn current_control_step(
    i_ref: DqVector,
    i_meas: DqVector,
    v_pcc: DqVector,
    omega: f64,
    state: &GfcState,
    params: &GfcParams,
    dt: f64,
) -> (DqVector, GfcState) {
    let mut s = *state;
    let err = i_ref - i_meas;
    s.current_integrators =
        state.current_integrators + (state.current_error_prev + err) * (0.5 * dt * params.kic);
    s.current_error_prev = err;
    let decouple = DqVector::new(-omega * params.lf * i_meas.q, omega * params.lf * i_meas.d, i_meas.frame);
    let v_cmd = v_pcc + decouple + err * params.kpc + s.current_integrators;
    (v_cmd, s)
}

/// Clamp the voltage command magnitude at `kmod * vdc`.
pub fn modulation_clamp(v_cmd: DqVector, vdc: f64, kmod: f64) -> (DqVector, bool) {
    let limit = kmod * vdc.max(0.0);
    if limit <= 0.0 {
        return (DqVector::zero(v_cmd.frame), true);
    }
    let mag = v_cmd.magnitude();
    if mag <= limit {
        (v_cmd, false)
    } else {
        (v_cmd * (limit / mag), true)
    }
}

/// Linearization point for [`design_damping`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OperatingPoint {
    pub e: f64,
    pub v: f64,
    /// Total reactance between internal voltage and grid [pu].
    pub x_net: f64,
    pub delta0: f64,
}

impl OperatingPoint {
    /// Synchronizing coefficient dP/d(delta) [pu/rad].
    pub fn ks(&self) -> f64 {
        self.e * self.v * self.delta0.cos() / self.x_net
    }
}

/// Proportional rotor gain giving damping ratio `zeta` to the linearized
/// synchronization loop `delta' = omega_base * (-kd * ks * delta + x)`,
/// `x' = -ks * delta / (2H)`.
pub fn design_damping(zeta: f64, h: f64, op: &OperatingPoint, omega_base: f64) -> Result<f64> {
    if !(zeta > 0.0 && zeta <= 2.0) {
        return Err(Error::InvalidParameter(format!("zeta = {zeta} outside (0, 2]")));
    }
    if !(h > 0.0) {
        return Err(Error::InvalidParameter(format!("h = {h}")));
    }
    let ks = op.ks();
    if !(ks > 0.0) || !ks.is_finite() {
        return Err(Error::UnstableOperatingPoint { ks });
    }
    Ok(2.0 * zeta / (2.0 * h * omega_base * ks).sqrt())
}

/// Grid-frame measurements for one unit, on the unit's own base.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UnitMeasurement {
    /// Active power leaving the PCC [pu].
    pub p: f64,
    /// Reactive power delivered into the MV bus [pu].
    pub q_mv: f64,
    /// MV bus voltage magnitude [pu].
    pub v_mv: f64,
    pub v_pcc: DqVector,
    /// Converter-side filter current.
    pub i_conv: DqVector,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChainOutput {
    pub state: GfcState,
    /// Converter voltage command in the grid frame.
    pub v_vsc: DqVector,
    /// Current reference after limiting, rotor frame.
    pub i_ref: DqVector,
}

/// Run the full control chain for one step.
///
/// Order: virtual rotor, excitation, virtual admittance, low-pass,
/// limiter, current control, modulation clamp.
pub fn control_chain_step(
    p_ref: f64,
    meas: &UnitMeasurement,
    vdc: f64,
    state: &GfcState,
    params: &GfcParams,
    dt: f64,
) -> Result<ChainOutput> {
    let frame = state.frame();
    let s = inertial_step(p_ref, meas.p, state, params, dt);
    let s = excitation_step(params.v_ref, meas.v_mv, meas.q_mv, &s, params, dt);

    let v_pcc = rotate_frame(meas.v_pcc, s.theta_vsc, frame);
    let i_meas = rotate_frame(meas.i_conv, s.theta_vsc, frame);
    let e = DqVector::new(s.e_mag, 0.0, frame);
    let i_vi = virtual_impedance_currents(e, v_pcc, params, s.omega_vsc)?;

    let mut s = s;
    s.lpf = lowpass_step(i_vi, &state.lpf, params.omega_lpf, dt);
    let (i_ref, limited) = if params.limiter_enabled {
        limit_current(s.lpf.y, params.i_max)
    } else {
        (s.lpf.y, false)
    };

    let (v_cmd, mut s) = current_control_step(i_ref, i_meas, v_pcc, s.omega_vsc, &s, params, dt);
    let (v_out, saturated) = modulation_clamp(v_cmd, vdc, params.kmod);
    if saturated {
        s.current_integrators = state.current_integrators;
    }
    s.limited = limited;
    s.saturated = saturated;

    Ok(ChainOutput {
        state: s,
        v_vsc: rotate_frame(v_out, -s.theta_vsc, Frame::Grid),
        i_ref,
    })
}
