//! The circular current limiter on a few references, then the limiter
//! activity of an aggregated farm during a large phase jump.

use gfmsim::control::limit_current;
use gfmsim::electrical::GridEvent;
use gfmsim::farm::{run, FarmConfig, FarmModel, Level, Scenario, UnitsConfig};
use gfmsim::foundation::DqVector;

fn main() -> gfmsim::Result<()> {
    for (d, q) in [(0.8, 0.3), (1.5, 0.0), (1.2, -1.2)] {
        let (out, limited) = limit_current(DqVector::grid(d, q), 1.2);
        println!("({d}, {q}) -> ({:.4}, {:.4}), |i| {:.4}, limited {limited}", out.d, out.q, out.magnitude());
    }

    let mut units = UnitsConfig::uniform(0.9);
    units.control.limiter = true;
    let model = FarmModel::build(&FarmConfig::default(), &units, Level::Faw)?;
    let ts = run(&model, &Scenario::new(vec![GridEvent::PhaseJump { t_s: 0.2, jump_deg: -40.0 }], 2.0))
        .into_result()?;
    let i = ts.get("unit1_i_pu")?;
    let flags = ts.get("unit1_limited_flag")?;
    let peak = i.iter().cloned().fold(0.0, f64::max);
    let active = flags.iter().filter(|f| **f > 0.0).count() as f64 * ts.sample_interval();
    println!("40 degree jump at 0.9 pu: peak current {peak:.3} pu, limiter active for {active:.3} s");
    Ok(())
}
