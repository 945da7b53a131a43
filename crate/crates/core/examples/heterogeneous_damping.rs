//! Strings with different inertia and damping ratio after a phase jump:
//! peak power and settling time per string.

use gfmsim::electrical::GridEvent;
use gfmsim::farm::{run, FarmConfig, FarmModel, Level, Scenario, UnitOverride, UnitsConfig};

fn main() -> gfmsim::Result<()> {
    let mut units = UnitsConfig::uniform(0.8);
    units.control.limiter = false;
    units.overrides = (1..=7)
        .map(|k| UnitOverride {
            string: k,
            h_s: Some(3.0 + (k - 1) as f64 / 3.0),
            zeta: Some(0.45 + 0.05 * k as f64),
            kd: None,
        })
        .collect();
    let model = FarmModel::build(&FarmConfig::default(), &units, Level::Saw)?;
    let t_jump = 1.0;
    let ts = run(&model, &Scenario::new(vec![GridEvent::PhaseJump { t_s: t_jump, jump_deg: -15.0 }], 6.0))
        .into_result()?;
    for (k, o) in units.overrides.iter().enumerate() {
        let p = ts.get(&format!("unit{}_p_pu", k + 1))?;
        let last = *p.last().unwrap();
        let peak = p.iter().cloned().fold(f64::MIN, f64::max);
        let settle = ts
            .t
            .iter()
            .zip(p)
            .filter(|(_, v)| (*v - last).abs() > 0.01 * last)
            .map(|(t, _)| t - t_jump)
            .fold(0.0, f64::max);
        println!(
            "string {}: H {:.2} s, zeta {:.2}, peak {peak:.3} pu, within 1% after {settle:.2} s",
            k + 1,
            o.h_s.unwrap(),
            o.zeta.unwrap()
        );
    }
    Ok(())
}
