//! Sweep of phase-jump size with a current limit of 1.2 pu, comparing which
//! strings slip against the aggregated farm at the same mean dispatch.

use gfmsim::analysis::detect_los;
use gfmsim::electrical::GridEvent;
use gfmsim::farm::{run, FarmConfig, FarmModel, Level, Scenario, UnitsConfig};

fn main() -> gfmsim::Result<()> {
    let cfg = FarmConfig::default();
    let mut units = UnitsConfig::uniform(0.0);
    units.dispatch_pu = vec![1.0, 0.95, 0.9, 0.8, 0.7, 0.65, 0.6];
    let saw = FarmModel::build(&cfg, &units, Level::Saw)?;
    let faw = FarmModel::build(&cfg, &units, Level::Faw)?;
    for deg in [-20.0, -40.0, -50.0, -60.0] {
        let sc = Scenario::new(vec![GridEvent::PhaseJump { t_s: 0.5, jump_deg: deg }], 4.0);
        let rs = detect_los(&run(&saw, &sc).into_result()?)?;
        let rf = detect_los(&run(&faw, &sc).into_result()?)?;
        println!(
            "{deg:>5} deg: strings slipped {:?}, aggregate slipped: {}",
            rs.slipped,
            rf.lost_synchronism()
        );
    }
    Ok(())
}
