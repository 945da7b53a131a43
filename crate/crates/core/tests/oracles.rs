//! Independent oracles for the network, the power flow and the damping
//! design.

use gfmsim::analysis::{scan_impedance, ScanMode};
use gfmsim::control::{design_damping, OperatingPoint};
use gfmsim::electrical::ConverterTermination;
use gfmsim::farm::{network_reactance_to_pcc, solve_operating_point, FarmConfig, FarmModel, Level, UnitsConfig};
use num_complex::Complex64;

mod common;
use common::{abcd_open_end, cable_network, eigen_zeta, lossless_config, J};

#[test]
fn ten_section_cable_matches_abcd_cascade_to_2khz() {
    let (r, x, b) = (0.0115, 0.225, 0.12);
    let net = cable_network(r, x, b, 10);
    let mut worst: f64 = 0.0;
    for k in 1..=400 {
        let f = 5.0 * k as f64;
        let ratio = f / 50.0;
        let oracle = abcd_open_end(r, x, b, 10, ratio);
        let Some(z) = net.driving_point_impedance(0, ratio, &ConverterTermination::Open) else {
            continue;
        };
        worst = worst.max((z - oracle).norm() / oracle.norm());
    }
    assert!(worst < 5e-3, "worst relative error {worst}");
}

#[test]
fn scan_reproduces_series_reactance_anchor() {
    let cfg = FarmConfig::default();
    let m = FarmModel::build(&cfg, &UnitsConfig::uniform(0.5), Level::Faw).unwrap();
    let s = scan_impedance(&m, "faw_pcc", &[50.0], ScanMode::Open).unwrap();
    let x = network_reactance_to_pcc(&cfg).unwrap();
    assert!((s.z[0].im - x).abs() < 1e-12);
    assert!((x - 0.63).abs() < 0.15 * 0.63, "x = {x}");
}

#[test]
fn farm_and_string_scans_differ() {
    let units = UnitsConfig::uniform(0.5);
    let cfg = FarmConfig::default();
    let faw = FarmModel::build(&cfg, &units, Level::Faw).unwrap();
    let saw = FarmModel::build(&cfg, &units, Level::Saw).unwrap();
    let freqs: Vec<f64> = (0..200).map(|k| 10.0 * 100f64.powf(k as f64 / 199.0)).collect();
    let a = scan_impedance(&faw, "faw_pcc", &freqs, ScanMode::Open).unwrap();
    let b = scan_impedance(&saw, "string1_pcc", &freqs, ScanMode::Open)
        .unwrap()
        .rebased(&saw.base.with_power(60.0).unwrap())
        .unwrap();
    let max_ratio = a
        .z
        .iter()
        .zip(&b.z)
        .filter(|(x, y)| x.is_finite() && y.is_finite())
        .map(|(x, y)| (x.norm() / y.norm()).max(y.norm() / x.norm()))
        .fold(0.0, f64::max);
    assert!(max_ratio > 1.5, "max ratio {max_ratio}");
}

#[test]
fn mv_short_circuit_ratio_near_two() {
    let m = FarmModel::build(&FarmConfig::default(), &UnitsConfig::uniform(0.5), Level::Faw).unwrap();
    let z = scan_impedance(&m, "mv", &[50.0], ScanMode::Open).unwrap().z[0];
    let scr = 1.0 / z.norm();
    assert!((scr - 2.0).abs() < 0.4, "scr = {scr}");
}

#[test]
fn operating_point_matches_two_bus_oracle() {
    let (cfg, units) = lossless_config();
    let lv = units.control.lv_pu;
    let xt = cfg.converter.lt_pu * cfg.converter.s_base_mva / cfg.converter.st_mva;
    let x_to_mv = cfg.plant_transformer.x_pu + cfg.hvac_cable.x_pu + cfg.s_base_mva / cfg.grid.scc_mva;
    let x_total = lv + xt + cfg.collectors[0].x_pu + x_to_mv;

    let m = FarmModel::build(&cfg, &units, Level::Faw).unwrap();
    let op = solve_operating_point(&m).unwrap();
    let (e, delta) = (op.e[0].norm(), op.e[0].arg());
    let p = e * delta.sin() / x_total;
    assert!((p - 0.7).abs() < 1e-6, "p = {p}");

    // Reactive-slope law at the 66 kV bus, evaluated on the oracle chain.
    let i = (op.e[0] - 1.0) / (J * x_total);
    let v_mv = 1.0 + J * x_to_mv * i;
    let q = (v_mv * i.conj()).im;
    let g = &m.units[0].gfc;
    assert!((g.v_ref - g.kq * q - v_mv.norm()).abs() < 1e-6);

    // Angle anchor: the same relation with the calibrated reactance.
    let expected = (0.7 * x_total / e).asin();
    assert!((delta - expected).abs() < 1e-6);
}

#[test]
fn saw_operating_points_match_two_bus_oracle() {
    let (cfg, mut units) = lossless_config();
    units.dispatch_pu = vec![1.0, 0.95, 0.9, 0.8, 0.7, 0.65, 0.6];
    let m = FarmModel::build(&cfg, &units, Level::Saw).unwrap();
    let op = solve_operating_point(&m).unwrap();
    // Each string sees the 66 kV bus through its own series reactance.
    let v_mv = op.node_voltages[m.index.mv];
    for (k, u) in m.units.iter().enumerate() {
        let scale = m.unit_scale(k);
        let xt = cfg.converter.lt_pu * cfg.converter.s_base_mva / cfg.converter.st_mva;
        let x_own = (u.gfc.lv + xt + cfg.collectors[0].x_pu) / scale;
        let p = (op.e[k] * v_mv.conj()).im / x_own / scale;
        assert!((p - u.dispatch_pu).abs() < 1e-6, "string {} p = {p}", k + 1);
    }
}

#[test]
fn losses_match_phasor_oracle() {
    let mut units = UnitsConfig::uniform(0.0);
    units.dispatch_pu = vec![1.0, 0.95, 0.9, 0.8, 0.7, 0.65, 0.6];
    let m = FarmModel::build(&FarmConfig::default(), &units, Level::Saw).unwrap();
    let op = solve_operating_point(&m).unwrap();

    // Re-solve the network with the converter voltages behind the real
    // filter, then account for every branch and capacitor independently.
    let mut src = vec![Complex64::new(0.0, 0.0); m.network.sources.len()];
    src[m.index.grid_source] = Complex64::new(m.grid.v_pu, 0.0);
    for (k, ix) in m.index.units.iter().enumerate() {
        src[ix.source] = op.v_vsc[k];
    }
    let sol = m.network.solve_phasor(&src, 1.0).unwrap();
    let mut losses = 0.0;
    for (br, i) in m.network.branches.iter().zip(&sol.branch_currents) {
        losses += br.r * i.norm_sqr();
    }
    for (node, v) in m.network.nodes.iter().zip(&sol.node_voltages) {
        if node.b != 0.0 {
            let ic = *v / (Complex64::new(node.rc, 0.0) + 1.0 / (J * node.b));
            losses += node.rc * ic.norm_sqr();
        }
    }
    let p_units: f64 = m
        .index
        .units
        .iter()
        .map(|ix| (src[ix.source] * sol.branch_currents[ix.filter].conj()).re)
        .sum();
    let poi = sol.node_voltages[m.index.poi];
    let p_farm = (poi * sol.branch_currents[m.index.thevenin].conj()).re;
    let grid_r = m.network.branches[m.index.thevenin].r;
    let thev_loss = grid_r * sol.branch_currents[m.index.thevenin].norm_sqr();
    assert!((p_units - (p_farm + losses - thev_loss)).abs() < 1e-9);
    // Net output is the mean dispatch less the losses inside the farm.
    let mean: f64 = units.dispatch_pu.iter().sum::<f64>() / 7.0;
    let p_pcc: f64 = m
        .index
        .units
        .iter()
        .map(|ix| (sol.node_voltages[ix.pcc] * sol.branch_currents[ix.transformer].conj()).re)
        .sum();
    assert!((p_pcc - mean).abs() < 1e-8, "pcc sum {p_pcc}");
    assert!(p_farm < mean && p_farm > mean - 0.05, "farm {p_farm}");
}

#[test]
fn damping_design_matches_eigenvalues() {
    let wb = 100.0 * std::f64::consts::PI;
    for &(zeta, h, x, d0) in &[(0.7, 4.0, 0.63, 0.0), (0.5, 3.0, 0.88, 0.3), (0.8, 5.0, 0.88, 0.5), (0.3, 2.0, 1.2, 0.9)] {
        let op = OperatingPoint {
            e: 1.0,
            v: 1.0,
            x_net: x,
            delta0: d0,
        };
        let kd = design_damping(zeta, h, &op, wb).unwrap();
        let z = eigen_zeta(h, kd, op.ks(), wb);
        assert!((z - zeta).abs() < 1e-6, "zeta {zeta} -> {z}");
    }
}
