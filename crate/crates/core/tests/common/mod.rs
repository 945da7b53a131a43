//! Oracles shared by the oracle and acceptance test targets.

#![allow(dead_code)]

use gfmsim::electrical::{build_hvac_cable, BranchKind, Network, Terminal};
use gfmsim::farm::{FarmConfig, UnitsConfig};
use nalgebra::Matrix2;
use num_complex::Complex64;

pub const J: Complex64 = Complex64::new(0.0, 1.0);

/// Driving-point impedance of a chain of pi sections with the far end open,
/// from the product of the section transmission matrices.
pub fn abcd_open_end(r: f64, x: f64, b: f64, n: usize, freq_ratio: f64) -> Complex64 {
    let z = Complex64::new(r / n as f64, x / n as f64 * freq_ratio);
    let y = J * b / n as f64 * freq_ratio;
    let one = Complex64::new(1.0, 0.0);
    let sec = [[one + z * y / 2.0, z], [y * (one + z * y / 4.0), one + z * y / 2.0]];
    let mut m = [[one, Complex64::new(0.0, 0.0)], [Complex64::new(0.0, 0.0), one]];
    for _ in 0..n {
        m = [
            [
                m[0][0] * sec[0][0] + m[0][1] * sec[1][0],
                m[0][0] * sec[0][1] + m[0][1] * sec[1][1],
            ],
            [
                m[1][0] * sec[0][0] + m[1][1] * sec[1][0],
                m[1][0] * sec[0][1] + m[1][1] * sec[1][1],
            ],
        ];
    }
    m[0][0] / m[1][0]
}

pub fn cable_network(r: f64, x: f64, b: f64, n: usize) -> Network {
    let sections = build_hvac_cable(r, x, b, n).unwrap();
    let mut net = Network::default();
    let nodes: Vec<usize> = (0..=n)
        .map(|k| {
            let left = if k > 0 { sections[k - 1].b_half } else { 0.0 };
            let right = sections.get(k).map_or(0.0, |s| s.b_half);
            net.add_node(format!("c{k}"), left + right, 0.0, None)
        })
        .collect();
    for (k, s) in sections.iter().enumerate() {
        net.add_branch(
            format!("s{k}"),
            BranchKind::Cable,
            Terminal::Node(nodes[k + 1]),
            Terminal::Node(nodes[k]),
            s.r,
            s.x,
        );
    }
    net
}

/// Farm reduced to a lossless series chain, so the power flow reduces to
/// `P = E V sin(delta) / X`.
pub fn lossless_config() -> (FarmConfig, UnitsConfig) {
    let mut cfg = FarmConfig::default();
    cfg.hvac_cable.r_pu = 0.0;
    cfg.hvac_cable.b_pu = 0.0;
    cfg.plant_transformer.r_pu = 0.0;
    cfg.collectors[0].r_pu = 0.0;
    cfg.collectors[0].b_pu = 0.0;
    cfg.converter.rt_pu = 1e-14;
    cfg.converter.cf_pu = 1e-14;
    cfg.grid.x_over_r = 1e14;
    cfg.shunt_loss_tangent = 0.0;
    let mut units = UnitsConfig::uniform(0.7);
    units.control.rv_pu = 0.0;
    (cfg, units)
}

/// Damping ratio of the oscillatory eigenpair of the linearized rotor loop.
pub fn eigen_zeta(h: f64, kd: f64, ks: f64, wb: f64) -> f64 {
    let a = Matrix2::new(-wb * kd * ks, wb, -ks / (2.0 * h), 0.0);
    let ev = a.complex_eigenvalues();
    let l = if ev[0].im.abs() >= ev[1].im.abs() { ev[0] } else { ev[1] };
    -l.re / l.norm()
}
