use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::foundation::{thevenin_reactance, PerUnitBase};

/// Timed disturbance of the grid Thevenin source.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum GridEvent {
    /// Step of the source angle by `jump_deg` at `t_s`.
    PhaseJump { t_s: f64, jump_deg: f64 },
    /// Linear frequency ramp starting at `t_start_s` until `f_end_hz`.
    Rocof {
        t_start_s: f64,
        hz_per_s: f64,
        f_end_hz: f64,
    },
    /// Step of the source voltage magnitude to `v_pu` at `t_s`.
    VStep { t_s: f64, v_pu: f64 },
}

impl GridEvent {
    pub fn start(&self) -> f64 {
        match *self {
            GridEvent::PhaseJump { t_s, .. } | GridEvent::VStep { t_s, .. } => t_s,
            GridEvent::Rocof { t_start_s, .. } => t_start_s,
        }
    }
}

/// Grid source sample at one instant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSample {
    pub v_mag: f64,
    /// Angle relative to the nominal synchronous frame [rad].
    pub theta: f64,
    pub freq: f64,
}

impl GridSample {
    pub fn phasor(&self) -> Complex64 {
        Complex64::from_polar(self.v_mag, self.theta)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Segment {
    event: GridEvent,
    start: f64,
    end: f64,
    f_start: f64,
}

/// Validated, time-ordered event list.
#[derive(Debug, Clone, PartialEq)]
pub struct GridSchedule {
    f_base: f64,
    v0: f64,
    segments: Vec<Segment>,
}

impl GridSchedule {
    pub fn new(events: &[GridEvent], f_base: f64, v0: f64) -> Result<Self> {
        let mut segments = Vec::with_capacity(events.len());
        let mut f = f_base;
        let mut last_end = f64::NEG_INFINITY;
        let mut last_start = f64::NEG_INFINITY;
        for ev in events {
            let start = ev.start();
            if !start.is_finite() || start < 0.0 {
                return Err(Error::Schema(format!("event time {start} must be finite and >= 0")));
            }
            let (end, f_next) = match *ev {
                GridEvent::PhaseJump { jump_deg, .. } => {
                    if !jump_deg.is_finite() {
                        return Err(Error::Schema("phase jump must be finite".into()));
                    }
                    (start, f)
                }
                GridEvent::VStep { v_pu, .. } => {
                    if !(v_pu >= 0.0 && v_pu.is_finite()) {
                        return Err(Error::Schema(format!("v_step to {v_pu} pu")));
                    }
                    (start, f)
                }
                GridEvent::Rocof {
                    hz_per_s, f_end_hz, ..
                } => {
                    if !(f_end_hz > 0.0) || !hz_per_s.is_finite() {
                        return Err(Error::Schema("rocof needs f_end_hz > 0 and finite rate".into()));
                    }
                    if hz_per_s == 0.0 {
                        (start, f)
                    } else {
                        let dur = (f_end_hz - f) / hz_per_s;
                        if dur < 0.0 {
                            return Err(Error::Schema(format!(
                                "rocof of {hz_per_s} Hz/s cannot reach {f_end_hz} Hz from {f} Hz"
                            )));
                        }
                        (start + dur, f_end_hz)
                    }
                }
            };
            if start < last_end || start == last_start {
                return Err(Error::Schema(format!("event at t = {start} s overlaps the previous one")));
            }
            segments.push(Segment {
                event: *ev,
                start,
                end,
                f_start: f,
            });
            f = f_next;
            last_end = end;
            last_start = start;
        }
        Ok(Self {
            f_base,
            v0,
            segments,
        })
    }

    /// Latest instant at which any event is active.
    pub fn last_event_time(&self) -> f64 {
        self.segments.last().map_or(0.0, |s| s.end)
    }

    /// Right-continuous evaluation: a step at `t` is included.
    pub fn sample(&self, t: f64) -> GridSample {
        self.eval(t, true)
    }

    /// Left limit: a step at exactly `t` is not yet applied.
    pub fn sample_left(&self, t: f64) -> GridSample {
        self.eval(t, false)
    }

    fn eval(&self, t: f64, right: bool) -> GridSample {
        let w = 2.0 * PI;
        let mut v = self.v0;
        let mut theta = 0.0;
        let mut f = self.f_base;
        let mut t_last = 0.0f64;
        for seg in &self.segments {
            let started = if right { t >= seg.start } else { t > seg.start };
            if !started {
                break;
            }
            theta += w * (f - self.f_base) * (seg.start - t_last).max(0.0);
            t_last = seg.start;
            match seg.event {
                GridEvent::PhaseJump { jump_deg, .. } => theta += jump_deg.to_radians(),
                GridEvent::VStep { v_pu, .. } => v = v_pu,
                GridEvent::Rocof { hz_per_s, .. } => {
                    let tau = (t.min(seg.end) - seg.start).max(0.0);
                    theta += w * ((seg.f_start - self.f_base) * tau + 0.5 * hz_per_s * tau * tau);
                    f = seg.f_start + hz_per_s * tau;
                    t_last = seg.start + tau;
                }
            }
        }
        theta += w * (f - self.f_base) * (t - t_last).max(0.0);
        GridSample { v_mag: v, theta, freq: f }
    }
}

/// Right-continuous waveform of the grid source under `events`.
pub fn grid_waveform(t: f64, events: &[GridEvent], f_base: f64) -> Result<GridSample> {
    Ok(GridSchedule::new(events, f_base, 1.0)?.sample(t))
}

/// Thevenin equivalent of the transmission grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ThevGrid {
    pub scc_mva: f64,
    pub v_nom_kv: f64,
    pub x_over_r: f64,
    /// Pre-event source voltage [pu].
    #[serde(default = "one")]
    pub v_pu: f64,
}

fn one() -> f64 {
    1.0
}

impl Default for ThevGrid {
    fn default() -> Self {
        Self {
            scc_mva: 3000.0,
            v_nom_kv: 400.0,
            x_over_r: 10.0,
            v_pu: 1.0,
        }
    }
}

impl ThevGrid {
    /// Source impedance on a base with power `s_base_mva`.
    pub fn impedance(&self, base: &PerUnitBase) -> Result<Complex64> {
        if !(self.x_over_r > 0.0) {
            return Err(Error::InvalidParameter("grid x_over_r must be > 0".into()));
        }
        let hv = PerUnitBase::new(base.s_base, self.v_nom_kv, base.f_base)?;
        let x = thevenin_reactance(self.scc_mva, &hv)?;
        Ok(Complex64::new(x / self.x_over_r, x))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn rocof_ramp_values() {
        let ev = [GridEvent::Rocof {
            t_start_s: 1.0,
            hz_per_s: -1.0,
            f_end_hz: 47.0,
        }];
        let s = GridSchedule::new(&ev, 50.0, 1.0).unwrap();
        assert_relative_eq!(s.sample(2.5).freq, 48.5, epsilon = 1e-12);
        assert_relative_eq!(s.sample(4.0).freq, 47.0, epsilon = 1e-12);
        assert_relative_eq!(s.sample(9.0).freq, 47.0, epsilon = 1e-12);
        assert_eq!(s.last_event_time(), 4.0);
        // Angle: -2 pi * 0.5 * 1 * tau^2 during the ramp, then linear.
        assert_relative_eq!(s.sample(2.0).theta, -PI, epsilon = 1e-12);
        assert_relative_eq!(s.sample(5.0).theta, -2.0 * PI * (4.5 + 3.0), epsilon = 1e-9);
    }

    #[test]
    fn theta_is_continuous_through_ramp_end() {
        let ev = [GridEvent::Rocof {
            t_start_s: 1.0,
            hz_per_s: -1.0,
            f_end_hz: 47.0,
        }];
        let s = GridSchedule::new(&ev, 50.0, 1.0).unwrap();
        let a = s.sample(4.0 - 1e-9).theta;
        let b = s.sample(4.0 + 1e-9).theta;
        assert!((a - b).abs() < 1e-6);
    }

    #[test]
    fn phase_jump_step() {
        let ev = [GridEvent::PhaseJump {
            t_s: 1.0,
            jump_deg: 15.0,
        }];
        let s = GridSchedule::new(&ev, 50.0, 1.0).unwrap();
        assert_eq!(s.sample_left(1.0).theta, 0.0);
        assert_relative_eq!(s.sample(1.0).theta, 15f64.to_radians());
        assert_relative_eq!(s.sample(3.0).theta, 15f64.to_radians());
    }

    #[test]
    fn no_events_flat() {
        let g = grid_waveform(12.3, &[], 50.0).unwrap();
        assert_eq!((g.v_mag, g.theta, g.freq), (1.0, 0.0, 50.0));
    }

    #[test]
    fn overlap_and_bad_ramps_rejected() {
        let ev = [
            GridEvent::Rocof {
                t_start_s: 1.0,
                hz_per_s: -1.0,
                f_end_hz: 47.0,
            },
            GridEvent::PhaseJump {
                t_s: 2.0,
                jump_deg: 10.0,
            },
        ];
        assert!(matches!(GridSchedule::new(&ev, 50.0, 1.0), Err(Error::Schema(_))));
        let ev = [GridEvent::Rocof {
            t_start_s: 1.0,
            hz_per_s: 1.0,
            f_end_hz: 47.0,
        }];
        assert!(GridSchedule::new(&ev, 50.0, 1.0).is_err());
        let ev = [
            GridEvent::VStep { t_s: 1.0, v_pu: 0.9 },
            GridEvent::PhaseJump { t_s: 1.0, jump_deg: 5.0 },
        ];
        assert!(GridSchedule::new(&ev, 50.0, 1.0).is_err());
    }

    #[test]
    fn sequential_events_compose() {
        let ev = [
            GridEvent::VStep { t_s: 0.5, v_pu: 0.95 },
            GridEvent::Rocof {
                t_start_s: 1.0,
                hz_per_s: 0.5,
                f_end_hz: 51.0,
            },
            GridEvent::PhaseJump { t_s: 4.0, jump_deg: -20.0 },
        ];
        let s = GridSchedule::new(&ev, 50.0, 1.0).unwrap();
        let g = s.sample(5.0);
        assert_eq!(g.v_mag, 0.95);
        assert_relative_eq!(g.freq, 51.0);
        let ramp = 2.0 * PI * 0.5 * 0.5 * 4.0;
        let after = 2.0 * PI * 1.0 * 2.0;
        assert_relative_eq!(g.theta, ramp + after - 20f64.to_radians(), epsilon = 1e-9);
    }

    #[test]
    fn thevenin_on_farm_base() {
        let z = ThevGrid::default().impedance(&crate::foundation::FARM_BASE).unwrap();
        assert_relative_eq!(z.im, 0.14, epsilon = 1e-12);
        assert_relative_eq!(z.re, 0.014, epsilon = 1e-12);
    }
}
