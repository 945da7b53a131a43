//! Steady-state initialization.
//!
//! In steady state the current loop tracks the virtual-impedance reference
//! exactly, so each converter looks like an internal voltage `E∠δ` behind
//! `rv + j lv` connected to its PCC. A Newton iteration on `(E, δ)` per unit
//! matches the active-power dispatch and the reactive-slope voltage law at
//! the 66 kV bus. Every controller state is then back-solved so that all
//! integrator inputs are zero.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use super::model::FarmModel;
use super::sim::{SimState, UnitState};
use crate::control::{GfcState, LowPass, E_MAG_MAX};
use crate::electrical::{BranchKind, DcRegulatorState, Network, StateSpace};
use crate::error::{Error, Result};
use crate::foundation::{rotate_frame, DqVector};

const MAX_ITER: usize = 40;
const TOL: f64 = 1e-12;

/// Converged phasor operating point.
#[derive(Debug, Clone, PartialEq)]
pub struct OperatingPoint {
    /// Internal voltage of each unit in the grid frame.
    pub e: Vec<Complex64>,
    /// Filter current of each unit on the farm base.
    pub i_filter: Vec<Complex64>,
    /// Converter terminal voltage of each unit.
    pub v_vsc: Vec<Complex64>,
    pub node_voltages: Vec<Complex64>,
    pub residual: f64,
    pub iterations: usize,
}

fn virtual_network(model: &FarmModel) -> Network {
    let mut net = model.network.clone();
    for br in net.branches.iter_mut() {
        if let BranchKind::Filter(k) = br.kind {
            let to_sys = 1.0 / model.unit_scale(k);
            br.r = model.units[k].gfc.rv * to_sys;
            br.x = model.units[k].gfc.lv * to_sys;
        }
    }
    net
}

fn sources(model: &FarmModel, z: &[f64]) -> Vec<Complex64> {
    let n = model.units.len();
    let mut u = vec![Complex64::new(0.0, 0.0); model.network.sources.len()];
    u[model.index.grid_source] = Complex64::new(model.grid.v_pu, 0.0);
    for (k, ix) in model.index.units.iter().enumerate() {
        u[ix.source] = Complex64::from_polar(z[k], z[n + k]);
    }
    u
}

fn residuals(model: &FarmModel, net: &Network, z: &[f64]) -> Result<Vec<f64>> {
    let n = model.units.len();
    let sol = net.solve_phasor(&sources(model, z), 1.0)?;
    let v_mv = sol.node_voltages[model.index.mv];
    let mut r = vec![0.0; 2 * n];
    for (k, ix) in model.index.units.iter().enumerate() {
        let u = &model.units[k];
        let scale = model.unit_scale(k);
        let v_pcc = sol.node_voltages[ix.pcc];
        let p = (v_pcc * sol.branch_currents[ix.transformer].conj()).re / scale;
        let q = (v_mv * sol.branch_currents[ix.collector].conj()).im / scale;
        r[k] = p - u.dispatch_pu;
        r[n + k] = u.gfc.v_ref - u.gfc.kq * q - v_mv.norm();
    }
    Ok(r)
}

/// Newton power flow for the model's dispatch.
pub fn solve_operating_point(model: &FarmModel) -> Result<OperatingPoint> {
    let n = model.units.len();
    let net = virtual_network(model);
    let mut z = vec![1.0; 2 * n];
    for k in 0..n {
        z[n + k] = 0.6 * model.units[k].dispatch_pu;
    }
    let infeasible = |reason: String, residual: f64| Error::InfeasibleDispatch { reason, residual };

    let mut r = residuals(model, &net, &z)?;
    let mut norm = r.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let mut iterations = 0;
    while norm > TOL && iterations < MAX_ITER {
        iterations += 1;
        let mut jac = DMatrix::<f64>::zeros(2 * n, 2 * n);
        for c in 0..2 * n {
            let h = 1e-7 * z[c].abs().max(1.0);
            let mut zp = z.clone();
            zp[c] += h;
            let rp = residuals(model, &net, &zp)?;
            for row in 0..2 * n {
                jac[(row, c)] = (rp[row] - r[row]) / h;
            }
        }
        let dz = jac
            .lu()
            .solve(&-DVector::from_column_slice(&r))
            .ok_or_else(|| infeasible("singular power-flow Jacobian".into(), norm))?;
        // Damped update keeps the first iterations from overshooting at high load.
        let step = dz.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        let alpha = if step > 0.3 { 0.3 / step } else { 1.0 };
        for (zi, d) in z.iter_mut().zip(dz.iter()) {
            *zi += alpha * d;
        }
        r = residuals(model, &net, &z)?;
        norm = r.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        if !norm.is_finite() {
            return Err(infeasible("power flow diverged".into(), norm));
        }
    }
    if norm > 1e-9 {
        return Err(infeasible(format!("power flow did not converge in {MAX_ITER} iterations"), norm));
    }

    let u = sources(model, &z);
    let sol = net.solve_phasor(&u, 1.0)?;
    for (node, v) in model.network.nodes.iter().zip(&sol.node_voltages) {
        let m = v.norm();
        if !(0.9..=1.1).contains(&m) {
            return Err(infeasible(format!("voltage {m:.4} pu at {} outside [0.9, 1.1]", node.name), norm));
        }
    }
    let mut e = Vec::with_capacity(n);
    let mut i_filter = Vec::with_capacity(n);
    let mut v_vsc = Vec::with_capacity(n);
    for (k, ix) in model.index.units.iter().enumerate() {
        let unit = &model.units[k];
        let i_f = sol.branch_currents[ix.filter];
        let i_unit = i_f.norm() / model.unit_scale(k);
        if unit.gfc.limiter_enabled && i_unit > unit.gfc.i_max {
            return Err(infeasible(
                format!("{} needs {i_unit:.3} pu current above the {} pu limit", unit.name, unit.gfc.i_max),
                norm,
            ));
        }
        if z[k] > E_MAG_MAX || z[k] <= 0.0 {
            return Err(infeasible(format!("{} internal voltage {:.3} pu out of range", unit.name, z[k]), norm));
        }
        let br = &model.network.branches[ix.filter];
        let vv = sol.node_voltages[ix.pcc] + Complex64::new(br.r, br.x) * i_f;
        let vmax = unit.conv.kmod * unit.conv.vdc_nom_pu;
        if vv.norm() > vmax {
            return Err(infeasible(format!("{} modulation limit exceeded", unit.name), norm));
        }
        e.push(u[ix.source]);
        i_filter.push(i_f);
        v_vsc.push(vv);
    }
    Ok(OperatingPoint {
        e,
        i_filter,
        v_vsc,
        node_voltages: sol.node_voltages,
        residual: norm,
        iterations,
    })
}

/// Equilibrium plant and controller state for the model's dispatch.
pub fn init_steady_state(model: &FarmModel) -> Result<SimState> {
    let op = solve_operating_point(model)?;
    let ss = StateSpace::new(&model.network, model.base.omega_base(), 1.0)?;
    let mut u = vec![Complex64::new(0.0, 0.0); model.network.sources.len()];
    u[model.index.grid_source] = Complex64::new(model.grid.v_pu, 0.0);
    for (k, ix) in model.index.units.iter().enumerate() {
        u[ix.source] = op.v_vsc[k];
    }
    let x = ss.steady_state(&u)?;

    let mut units = Vec::with_capacity(model.units.len());
    for (k, ix) in model.index.units.iter().enumerate() {
        let unit = &model.units[k];
        let scale = model.unit_scale(k);
        let theta = op.e[k].arg();
        let mut gfc = GfcState::new(k);
        let frame = gfc.frame();
        let i_f = DqVector::from_complex(x[ix.filter] / scale, crate::foundation::Frame::Grid);
        let v_pcc = DqVector::from_complex(ss.node_voltage(&x, ix.pcc), crate::foundation::Frame::Grid);
        let v_vsc = DqVector::from_complex(op.v_vsc[k], crate::foundation::Frame::Grid);
        let i_rot = rotate_frame(i_f, theta, frame);
        let v_pcc_rot = rotate_frame(v_pcc, theta, frame);
        let v_vsc_rot = rotate_frame(v_vsc, theta, frame);
        let lf = unit.gfc.lf;
        let decouple = DqVector::new(-lf * i_rot.q, lf * i_rot.d, frame);

        gfc.theta_vsc = theta;
        gfc.e_mag = op.e[k].norm();
        gfc.voltage_integrator = gfc.e_mag;
        gfc.lpf = LowPass::settled(i_rot);
        gfc.current_integrators = v_vsc_rot - v_pcc_rot - decouple;
        gfc.limited = false;

        let p_conv = (op.v_vsc[k] * (x[ix.filter] / scale).conj()).re;
        units.push(UnitState {
            gfc,
            vdc: unit.conv.vdc_nom_pu,
            dc_reg: DcRegulatorState::default(),
            i_mach_ff: p_conv / unit.conv.vdc_nom_pu,
            i_mach: p_conv / unit.conv.vdc_nom_pu,
            v_vsc: op.v_vsc[k],
        });
    }
    Ok(SimState { step: 0, x, units })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::farm::{FarmConfig, Level, UnitsConfig};

    #[test]
    fn zero_dispatch_is_aligned() {
        let m = FarmModel::build(&FarmConfig::default(), &UnitsConfig::uniform(0.0), Level::Saw).unwrap();
        let op = solve_operating_point(&m).unwrap();
        for e in &op.e {
            assert!(e.arg().abs() < 0.05, "angle {}", e.arg());
            assert!((e.norm() - 1.0).abs() < 0.1);
        }
    }

    #[test]
    fn dispatch_is_met() {
        let m = FarmModel::build(&FarmConfig::default(), &UnitsConfig::uniform(0.5), Level::Faw).unwrap();
        let op = solve_operating_point(&m).unwrap();
        assert!(op.residual < 1e-9);
        assert!(op.e[0].arg() > 0.0);
    }

    #[test]
    fn overload_is_infeasible() {
        let mut units = UnitsConfig::uniform(1.0);
        units.control.i_max_pu = 0.5;
        let m = FarmModel::build(&FarmConfig::default(), &units, Level::Faw).unwrap();
        assert!(matches!(init_steady_state(&m), Err(Error::InfeasibleDispatch { .. })));
    }
}
