//! Per-unit bases and dq reference-frame algebra.
//!
//! Frame convention: a vector expressed in a frame is rotated *into* a frame
//! that leads it by `delta_theta` by multiplying `d + jq` with
//! `exp(-j * delta_theta)`. The d-axis of every converter frame is aligned
//! with that converter's internal voltage.

use std::f64::consts::PI;
use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Power, voltage and frequency bases for one per-unit system.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PerUnitBase {
    /// Three-phase power base [MVA].
    pub s_base: f64,
    /// Line-line rms voltage base [kV].
    pub v_base: f64,
    /// Frequency base [Hz].
    pub f_base: f64,
}

impl PerUnitBase {
    pub fn new(s_base: f64, v_base: f64, f_base: f64) -> Result<Self> {
        let base = Self {
            s_base,
            v_base,
            f_base,
        };
        base.validate()?;
        Ok(base)
    }

    pub fn validate(&self) -> Result<()> {
        let ok = |x: f64| x.is_finite() && x > 0.0;
        if ok(self.s_base) && ok(self.v_base) && ok(self.f_base) {
            Ok(())
        } else {
            Err(Error::InvalidBase(format!(
                "s_base = {}, v_base = {}, f_base = {}",
                self.s_base, self.v_base, self.f_base
            )))
        }
    }

    /// Impedance base [ohm].
    pub fn z_base(&self) -> f64 {
        self.v_base * self.v_base / self.s_base
    }

    /// Angular frequency base [rad/s].
    pub fn omega_base(&self) -> f64 {
        2.0 * PI * self.f_base
    }

    /// Same base at a different power rating.
    pub fn with_power(&self, s_base: f64) -> Result<Self> {
        Self::new(s_base, self.v_base, self.f_base)
    }
}

/// The 420 MVA farm base at the 66 kV collection level.
pub const FARM_BASE: PerUnitBase = PerUnitBase {
    s_base: 420.0,
    v_base: 66.0,
    f_base: 50.0,
};

/// Re-express a per-unit impedance on another base.
pub fn change_base(z: f64, from: &PerUnitBase, to: &PerUnitBase) -> Result<f64> {
    from.validate()?;
    to.validate()?;
    Ok(z * (to.s_base / from.s_base) * (from.v_base / to.v_base).powi(2))
}

/// Complex variant of [`change_base`].
pub fn change_base_complex(z: Complex64, from: &PerUnitBase, to: &PerUnitBase) -> Result<Complex64> {
    let k = change_base(1.0, from, to)?;
    Ok(z * k)
}

/// Thevenin reactance of a source with short-circuit power `scc_mva`
/// expressed on `base`.
pub fn thevenin_reactance(scc_mva: f64, base: &PerUnitBase) -> Result<f64> {
    base.validate()?;
    if !(scc_mva > 0.0) {
        return Err(Error::InvalidBase(format!("short-circuit power {scc_mva} MVA")));
    }
    Ok(base.s_base / scc_mva)
}

/// Reference frame a [`DqVector`] is expressed in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Frame {
    /// Synchronous frame rotating at the nominal grid frequency.
    Grid,
    /// Virtual-rotor frame of converter unit `k`.
    Rotor(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DqVector {
    pub d: f64,
    pub q: f64,
    pub frame: Frame,
}

impl DqVector {
    pub const fn new(d: f64, q: f64, frame: Frame) -> Self {
        Self { d, q, frame }
    }

    pub const fn zero(frame: Frame) -> Self {
        Self::new(0.0, 0.0, frame)
    }

    pub fn grid(d: f64, q: f64) -> Self {
        Self::new(d, q, Frame::Grid)
    }

    pub fn from_complex(z: Complex64, frame: Frame) -> Self {
        Self::new(z.re, z.im, frame)
    }

    pub fn from_polar(mag: f64, angle: f64, frame: Frame) -> Self {
        Self::new(mag * angle.cos(), mag * angle.sin(), frame)
    }

    pub fn to_complex(self) -> Complex64 {
        Complex64::new(self.d, self.q)
    }

    pub fn magnitude(self) -> f64 {
        self.d.hypot(self.q)
    }

    pub fn scale(self, k: f64) -> Self {
        Self::new(self.d * k, self.q * k, self.frame)
    }

    pub fn is_finite(self) -> bool {
        self.d.is_finite() && self.q.is_finite()
    }

    /// Re(self * conj(other)): active power for a voltage/current pair.
    pub fn dot(self, other: Self) -> f64 {
        self.d * other.d + self.q * other.q
    }

    /// Im(self * conj(other)): reactive power for a voltage/current pair.
    pub fn cross(self, other: Self) -> f64 {
        self.q * other.d - self.d * other.q
    }
}

impl Add for DqVector {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        debug_assert_eq!(self.frame, rhs.frame);
        Self::new(self.d + rhs.d, self.q + rhs.q, self.frame)
    }
}

impl Sub for DqVector {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        debug_assert_eq!(self.frame, rhs.frame);
        Self::new(self.d - rhs.d, self.q - rhs.q, self.frame)
    }
}

impl Neg for DqVector {
    type Output = Self;
    fn neg(self) -> Self {
        Self::new(-self.d, -self.q, self.frame)
    }
}

impl Mul<f64> for DqVector {
    type Output = Self;
    fn mul(self, k: f64) -> Self {
        self.scale(k)
    }
}

/// Rotate `v` into a frame leading its current frame by `delta_theta`,
/// i.e. multiply by `exp(-j * delta_theta)`, and tag the result with `into`.
pub fn rotate_frame(v: DqVector, delta_theta: f64, into: Frame) -> DqVector {
    let (s, c) = delta_theta.sin_cos();
    DqVector::new(v.d * c + v.q * s, v.q * c - v.d * s, into)
}

/// Magnitude and angle; the angle of the zero vector is 0.
pub fn magnitude_angle(v: DqVector) -> (f64, f64) {
    let mag = v.magnitude();
    if mag == 0.0 {
        (0.0, 0.0)
    } else {
        (mag, v.q.atan2(v.d))
    }
}

/// Wrap an angle to (-pi, pi].
pub fn wrap_angle(a: f64) -> f64 {
    let mut w = a.rem_euclid(2.0 * PI);
    if w > PI {
        w -= 2.0 * PI;
    }
    w
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn change_base_string_rating() {
        let farm = PerUnitBase::new(420.0, 66.0, 50.0).unwrap();
        let string = farm.with_power(60.0).unwrap();
        let z = change_base(0.63, &farm, &string).unwrap();
        // Oracle: equal ohmic value on both bases.
        let ohm = 0.63 * farm.z_base();
        assert_relative_eq!(z * string.z_base(), ohm, max_relative = 1e-12);
        assert_relative_eq!(z, 0.09, max_relative = 1e-12);
    }

    #[test]
    fn change_base_identity_and_thevenin() {
        let b = PerUnitBase::new(12.0, 0.69, 50.0).unwrap();
        assert_eq!(change_base(0.5, &b, &b).unwrap(), 0.5);
        let hv = PerUnitBase::new(420.0, 400.0, 50.0).unwrap();
        assert_relative_eq!(thevenin_reactance(3000.0, &hv).unwrap(), 0.14, max_relative = 1e-12);
    }

    #[test]
    fn invalid_base_rejected() {
        assert!(PerUnitBase::new(0.0, 66.0, 50.0).is_err());
        let bad = PerUnitBase {
            s_base: -1.0,
            v_base: 66.0,
            f_base: 50.0,
        };
        assert!(matches!(change_base(1.0, &FARM_BASE, &bad), Err(Error::InvalidBase(_))));
    }

    #[test]
    fn rotation_sign_convention() {
        let v = DqVector::grid(1.0, 0.0);
        let r = rotate_frame(v, 0.0, Frame::Grid);
        assert_eq!((r.d, r.q), (1.0, 0.0));
        // Into a frame leading by 90 degrees, a vector on the old d-axis
        // lies on the new negative q-axis.
        let r = rotate_frame(v, PI / 2.0, Frame::Rotor(0));
        assert!(r.d.abs() < 1e-15);
        assert_relative_eq!(r.q, -1.0, epsilon = 1e-15);
        assert_eq!(r.frame, Frame::Rotor(0));
    }

    #[test]
    fn magnitude_angle_cases() {
        let (m, a) = magnitude_angle(DqVector::grid(0.3, 0.4));
        assert_relative_eq!(m, 0.5, epsilon = 1e-15);
        assert_relative_eq!(a, (4.0f64).atan2(3.0), epsilon = 1e-15);
        assert_eq!(magnitude_angle(DqVector::grid(0.0, 0.0)), (0.0, 0.0));
        let (m, a) = magnitude_angle(DqVector::grid(-1.0, 0.0));
        assert_eq!(m, 1.0);
        assert_relative_eq!(a, PI);
    }

    #[test]
    fn wrap_angle_range() {
        assert_relative_eq!(wrap_angle(3.0 * PI), PI, epsilon = 1e-12);
        assert_relative_eq!(wrap_angle(-PI), PI, epsilon = 1e-12);
        assert_relative_eq!(wrap_angle(0.5), 0.5);
    }

    proptest! {
        #[test]
        fn rotation_preserves_norm(d in -10.0..10.0f64, q in -10.0..10.0f64, a in -20.0..20.0f64) {
            let v = DqVector::grid(d, q);
            let r = rotate_frame(v, a, Frame::Rotor(1));
            prop_assert!((r.magnitude() - v.magnitude()).abs() <= 1e-12 * v.magnitude().max(1.0));
            let back = rotate_frame(r, -a, Frame::Grid);
            prop_assert!((back.d - d).abs() < 1e-12 && (back.q - q).abs() < 1e-12);
        }

        #[test]
        fn change_base_round_trip(z in 1e-4..10.0f64, s1 in 1.0..1000.0f64, s2 in 1.0..1000.0f64,
                                  v1 in 0.4..500.0f64, v2 in 0.4..500.0f64) {
            let a = PerUnitBase::new(s1, v1, 50.0).unwrap();
            let b = PerUnitBase::new(s2, v2, 50.0).unwrap();
            let back = change_base(change_base(z, &a, &b).unwrap(), &b, &a).unwrap();
            prop_assert!((back - z).abs() <= 1e-12 * z);
        }
    }
}
