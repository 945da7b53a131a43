//! Driving-point impedance at the aggregate and at one string terminal,
//! each on its own rating.

use gfmsim::analysis::{log_frequencies, scan_impedance, ScanMode};
use gfmsim::farm::{FarmConfig, FarmModel, Level, UnitsConfig};

fn main() -> gfmsim::Result<()> {
    let cfg = FarmConfig::default();
    let units = UnitsConfig::uniform(0.5);
    let faw = FarmModel::build(&cfg, &units, Level::Faw)?;
    let saw = FarmModel::build(&cfg, &units, Level::Saw)?;
    let freqs = log_frequencies(10.0, 2000.0, 12)?;
    let a = scan_impedance(&faw, "faw_pcc", &freqs, ScanMode::Open)?;
    let b = scan_impedance(&saw, "string1_pcc", &freqs, ScanMode::Open)?
        .rebased(&saw.base.with_power(saw.units[0].rating_mva)?)?;
    println!("{:>9} {:>12} {:>12}", "f [Hz]", "|Z| faw_pcc", "|Z| string1");
    for ((f, za), zb) in freqs.iter().zip(&a.z).zip(&b.z) {
        println!("{f:>9.1} {:>12.4} {:>12.4}", za.norm(), zb.norm());
    }
    let mv = scan_impedance(&faw, "mv", &[cfg.f_base_hz], ScanMode::Open)?;
    println!("short-circuit ratio at the 66 kV bus: {:.3}", 1.0 / mv.z[0].norm());
    Ok(())
}
