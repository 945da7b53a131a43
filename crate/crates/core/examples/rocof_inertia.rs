//! Inertial power drawn from an aggregated farm by a -1 Hz/s frequency ramp,
//! for two inertia constants.

use gfmsim::analysis::{inertial_power, Ramp};
use gfmsim::electrical::GridEvent;
use gfmsim::farm::{run, FarmConfig, FarmModel, Level, Scenario, UnitsConfig};

fn main() -> gfmsim::Result<()> {
    let cfg = FarmConfig::default();
    let events = vec![GridEvent::Rocof {
        t_start_s: 1.0,
        hz_per_s: -1.0,
        f_end_hz: 47.0,
    }];
    let ramp = Ramp::from_events(&events, cfg.f_base_hz).expect("event list holds a ramp");
    for h in [4.0, 2.0] {
        let mut units = UnitsConfig::uniform(0.5);
        units.control.h_s = h;
        units.control.limiter = false;
        let model = FarmModel::build(&cfg, &units, Level::Faw)?;
        let ts = run(&model, &Scenario::new(events.clone(), 5.0)).into_result()?;
        let p = inertial_power(&ts, "farm_p_pu", &ramp, None)?;
        println!("H = {h} s: inertial power {p:.4} pu, 2H|df/dt|/f0 = {:.4} pu", 2.0 * h / cfg.f_base_hz);
    }
    Ok(())
}
