use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::init::init_steady_state;
use super::model::FarmModel;
use super::timeseries::{TimeSeries, UNIT_QUANTITIES};
use crate::control::{control_chain_step, GfcState, UnitMeasurement};
use crate::electrical::{dc_link_step, DcRegulatorState, DiscretePlant, GridEvent, GridSchedule, StateSpace};
use crate::error::{Error, Result};
use crate::foundation::{DqVector, Frame};

/// Converter-side state of one unit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UnitState {
    pub gfc: GfcState,
    /// Dc-link voltage [pu].
    pub vdc: f64,
    pub dc_reg: DcRegulatorState,
    /// Machine-side feed-forward current [pu].
    pub i_mach_ff: f64,
    /// Machine-side current held since the last control sample [pu].
    pub i_mach: f64,
    /// Converter voltage applied over the last step, grid frame.
    pub v_vsc: Complex64,
}

/// Complete simulation state at `t = step * dt`.
#[derive(Debug, Clone, PartialEq)]
pub struct SimState {
    pub step: u64,
    /// Network states: branch currents then node capacitor voltages.
    pub x: Vec<Complex64>,
    pub units: Vec<UnitState>,
}

/// Time-domain run settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    #[serde(default)]
    pub events: Vec<GridEvent>,
    pub t_end_s: f64,
    #[serde(default = "default_dt")]
    pub dt_s: f64,
    /// Record every n-th step.
    #[serde(default = "default_decimation")]
    pub decimation: usize,
}

fn default_dt() -> f64 {
    2.5e-5
}
fn default_decimation() -> usize {
    40
}

impl Scenario {
    pub fn new(events: Vec<GridEvent>, t_end_s: f64) -> Self {
        Self {
            events,
            t_end_s,
            dt_s: default_dt(),
            decimation: default_decimation(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt_s > 0.0 && self.dt_s.is_finite()) {
            return Err(Error::Schema(format!("dt_s = {} must be > 0", self.dt_s)));
        }
        if self.decimation == 0 {
            return Err(Error::Schema("decimation must be >= 1".into()));
        }
        let last = self.events.iter().map(GridEvent::start).fold(0.0, f64::max);
        if !(self.t_end_s > last) {
            return Err(Error::Schema(format!(
                "t_end_s = {} must exceed the last event time {last}",
                self.t_end_s
            )));
        }
        Ok(())
    }

    pub fn steps(&self) -> u64 {
        (self.t_end_s / self.dt_s).round() as u64
    }
}

/// Fixed-step solver bound to one model and event schedule.
///
/// The network advances every `dt`. The converter controls are sampled
/// every `control_every` steps and their outputs held in between, so the
/// control dynamics do not change when the solver step is refined.
#[derive(Debug, Clone)]
pub struct Simulator<'a> {
    pub model: &'a FarmModel,
    pub plant: DiscretePlant,
    pub schedule: GridSchedule,
    pub dt: f64,
    pub control_every: u64,
}

impl<'a> Simulator<'a> {
    pub fn new(model: &'a FarmModel, events: &[GridEvent], dt: f64) -> Result<Self> {
        let ss = StateSpace::new(&model.network, model.base.omega_base(), 1.0)?;
        let plant = DiscretePlant::new(ss, dt)?;
        let schedule = GridSchedule::new(events, model.base.f_base, model.grid.v_pu)?;
        let ts = model.control_period_s;
        let ratio = (ts / dt).round();
        if !(ratio >= 1.0) || (ratio * dt - ts).abs() > 1e-9 * ts {
            return Err(Error::InvalidParameter(format!(
                "solver step {dt} s must divide the control sample period {ts} s"
            )));
        }
        Ok(Self {
            model,
            plant,
            schedule,
            dt,
            control_every: ratio as u64,
        })
    }

    pub fn state_space(&self) -> &StateSpace {
        &self.plant.ss
    }

    pub fn initial_state(&self) -> Result<SimState> {
        init_steady_state(self.model)
    }

    pub fn time(&self, step: u64) -> f64 {
        step as f64 * self.dt
    }

    /// Controller measurements of unit `k` for network state `x`, on the
    /// unit base.
    pub fn measure(&self, x: &[Complex64], k: usize) -> UnitMeasurement {
        let ss = &self.plant.ss;
        let ix = &self.model.index.units[k];
        let scale = self.model.unit_scale(k);
        let v_pcc = ss.node_voltage(x, ix.pcc);
        let v_mv = ss.node_voltage(x, self.model.index.mv);
        UnitMeasurement {
            p: (v_pcc * x[ix.transformer].conj()).re / scale,
            q_mv: (v_mv * x[ix.collector].conj()).im / scale,
            v_mv: v_mv.norm(),
            v_pcc: DqVector::from_complex(v_pcc, Frame::Grid),
            i_conv: DqVector::from_complex(x[ix.filter] / scale, Frame::Grid),
        }
    }

    /// Grid source voltage at the start (right limit) and end (left limit)
    /// of step `n`.
    pub fn grid_inputs(&self, n: u64) -> (Complex64, Complex64) {
        (
            self.schedule.sample(self.time(n)).phasor(),
            self.schedule.sample_left(self.time(n + 1)).phasor(),
        )
    }

    /// Advance one step. On control samples the converter voltages are
    /// recomputed from the state at the start of the step; otherwise the
    /// previous ones are held. The dc links integrate every step.
    pub fn step(&self, state: &SimState) -> Result<SimState> {
        let model = self.model;
        let n = state.step;
        let t = self.time(n);
        let sample = n.is_multiple_of(self.control_every);
        let ts = self.dt * self.control_every as f64;
        let mut units = Vec::with_capacity(state.units.len());
        for (k, us) in state.units.iter().enumerate() {
            let unit = &model.units[k];
            let meas = self.measure(&state.x, k);
            let mut next = *us;
            if sample {
                let out = control_chain_step(unit.dispatch_pu, &meas, us.vdc, &us.gfc, &unit.gfc, ts)?;
                next.gfc = out.state;
                next.v_vsc = out.v_vsc.to_complex();
                next.i_mach = model
                    .dc_regulator
                    .current(us.i_mach_ff, unit.conv.vdc_nom_pu, us.vdc, &mut next.dc_reg, ts);
            }
            let p_conv = (next.v_vsc * meas.i_conv.to_complex().conj()).re;
            next.vdc = dc_link_step(us.vdc, p_conv, next.i_mach, unit.conv.cdc_pu, self.dt).map_err(|e| match e {
                Error::DcCollapse { vdc, .. } => Error::DcCollapse { unit: k, t, vdc },
                other => other,
            })?;
            units.push(next);
        }

        let n_src = model.network.sources.len();
        let mut u0 = vec![Complex64::new(0.0, 0.0); n_src];
        let (g0, g1) = self.grid_inputs(n);
        u0[model.index.grid_source] = g0;
        for (k, ix) in model.index.units.iter().enumerate() {
            u0[ix.source] = units[k].v_vsc;
        }
        let mut u1 = u0.clone();
        u1[model.index.grid_source] = g1;

        let mut x = vec![Complex64::new(0.0, 0.0); state.x.len()];
        self.plant.step(&state.x, &u0, &u1, &mut x);
        if let Some(i) = self.plant.diverged_state(&x) {
            return Err(Error::NumericalDivergence {
                t: self.time(n + 1),
                state: self.plant.ss.label(i).to_string(),
            });
        }
        Ok(SimState { step: n + 1, x, units })
    }

    /// Farm active and reactive power delivered to the grid at the 400 kV
    /// connection point, farm base.
    pub fn farm_power(&self, x: &[Complex64]) -> Complex64 {
        let v = self.plant.ss.node_voltage(x, self.model.index.poi);
        v * x[self.model.index.thevenin].conj()
    }

    /// One output row in [`TimeSeries::for_units`] layout.
    pub fn record(&self, state: &SimState, row: &mut Vec<f64>) {
        row.clear();
        let grid_theta = self.schedule.sample(self.time(state.step)).theta;
        let ss = &self.plant.ss;
        for (k, us) in state.units.iter().enumerate() {
            let ix = &self.model.index.units[k];
            let scale = self.model.unit_scale(k);
            let v_pcc = ss.node_voltage(&state.x, ix.pcc);
            let s = v_pcc * state.x[ix.transformer].conj() / scale;
            row.extend_from_slice(&[
                s.re,
                s.im,
                v_pcc.norm(),
                state.x[ix.filter].norm() / scale,
                us.vdc,
                us.gfc.theta_vsc - grid_theta,
                us.gfc.omega_vsc,
                if us.gfc.limited { 1.0 } else { 0.0 },
            ]);
        }
        debug_assert_eq!(row.len(), state.units.len() * UNIT_QUANTITIES.len());
        let s = self.farm_power(&state.x);
        row.push(s.re);
        row.push(s.im);
        row.push(ss.node_voltage(&state.x, self.model.index.mv).norm());
    }
}

/// Result of [`run`]. On abort `error` is set and `series` holds every
/// sample recorded before the failure.
#[derive(Debug, Clone, PartialEq)]
pub struct RunOutput {
    pub series: TimeSeries,
    /// Limiter-engaged intervals per unit at full solver rate [s].
    pub limiter_intervals: Vec<Vec<(f64, f64)>>,
    pub error: Option<Error>,
}

impl RunOutput {
    pub fn into_result(self) -> Result<TimeSeries> {
        match self.error {
            Some(e) => Err(e),
            None => Ok(self.series),
        }
    }
}

/// Simulate `scenario` from the model's steady state.
pub fn run(model: &FarmModel, scenario: &Scenario) -> RunOutput {
    let mut series = TimeSeries::for_units(model.units.len());
    series.meta.insert("level".into(), model.level.to_string());
    series.meta.insert("dt_s".into(), format!("{:?}", scenario.dt_s));
    let mut intervals = vec![Vec::new(); model.units.len()];
    let fail = |series, intervals, e| RunOutput {
        series,
        limiter_intervals: intervals,
        error: Some(e),
    };
    if let Err(e) = scenario.validate() {
        return fail(series, intervals, e);
    }
    let sim = match Simulator::new(model, &scenario.events, scenario.dt_s) {
        Ok(s) => s,
        Err(e) => return fail(series, intervals, e),
    };
    let mut state = match sim.initial_state() {
        Ok(s) => s,
        Err(e) => return fail(series, intervals, e),
    };

    let steps = scenario.steps();
    let mut row = Vec::with_capacity(series.names.len());
    let mut open: Vec<Option<f64>> = vec![None; model.units.len()];
    let mut error = None;
    for n in 0..=steps {
        if n % scenario.decimation as u64 == 0 {
            sim.record(&state, &mut row);
            series.push(sim.time(n), &row);
        }
        for (k, us) in state.units.iter().enumerate() {
            match (us.gfc.limited, open[k]) {
                (true, None) => open[k] = Some(sim.time(n)),
                (false, Some(t0)) => {
                    intervals[k].push((t0, sim.time(n)));
                    open[k] = None;
                }
                _ => {}
            }
        }
        if n == steps {
            break;
        }
        match sim.step(&state) {
            Ok(s) => state = s,
            Err(e) => {
                error = Some(e);
                break;
            }
        }
    }
    let t_last = sim.time(state.step);
    for (k, o) in open.iter().enumerate() {
        if let Some(t0) = o {
            intervals[k].push((*t0, t_last));
        }
    }
    RunOutput {
        series,
        limiter_intervals: intervals,
        error,
    }
}
