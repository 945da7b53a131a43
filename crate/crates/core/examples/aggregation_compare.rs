//! Farm-aggregated versus string-aggregated response to a 15 degree phase
//! jump, with equal and with unequal dispatch across the strings.

use gfmsim::analysis::compare_traces;
use gfmsim::electrical::GridEvent;
use gfmsim::farm::{run, FarmConfig, FarmModel, Level, Scenario, UnitsConfig};

fn main() -> gfmsim::Result<()> {
    let cfg = FarmConfig::default();
    let scenario = Scenario::new(vec![GridEvent::PhaseJump { t_s: 1.0, jump_deg: -15.0 }], 5.0);
    for dispatch in [vec![0.9], vec![1.0, 1.0, 0.95, 0.9, 0.85, 0.8, 0.8]] {
        let mut units = UnitsConfig::uniform(0.0);
        units.dispatch_pu = dispatch.clone();
        units.control.limiter = false;
        let faw = run(&FarmModel::build(&cfg, &units, Level::Faw)?, &scenario).into_result()?;
        let saw = run(&FarmModel::build(&cfg, &units, Level::Saw)?, &scenario).into_result()?;
        println!("dispatch {dispatch:?}");
        for ch in ["farm_p_pu", "farm_q_pu"] {
            let c = compare_traces(&faw, &saw, ch)?;
            println!("  {ch}: rel_l2 {:.2e}, max |diff| {:.2e}", c.rel_l2, c.max_abs);
        }
        for k in 1..=saw.unit_count() {
            let vdc = saw.get(&format!("unit{k}_vdc_pu"))?;
            let min = vdc.iter().cloned().fold(f64::MAX, f64::min);
            println!("  string {k}: minimum dc-link voltage {min:.4} pu");
        }
    }
    Ok(())
}
