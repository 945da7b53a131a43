//! Damping gain for a target damping ratio of the linearized swing mode,
//! across grid strengths.

use gfmsim::control::{design_damping, OperatingPoint};

fn main() -> gfmsim::Result<()> {
    let wb = 100.0 * std::f64::consts::PI;
    let h = 4.0;
    for x_net in [0.4, 0.63, 0.9, 1.2] {
        let op = OperatingPoint {
            e: 1.0,
            v: 1.0,
            x_net,
            delta0: 0.4,
        };
        for zeta in [0.3, 0.7] {
            let kd = design_damping(zeta, h, &op, wb)?;
            let wn = (op.ks() * wb / (2.0 * h)).sqrt();
            println!("x {x_net:.2} pu, zeta {zeta}: kd {kd:.4}, natural frequency {:.2} Hz", wn / (2.0 * std::f64::consts::PI));
        }
    }
    Ok(())
}
