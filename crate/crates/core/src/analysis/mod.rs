//! Post-processing of simulation output and frequency scans of the passive
//! network. Everything here is a pure function of its inputs.

mod los;
mod metrics;
mod scan;

pub use los::{detect_los, LosReport, UnitLos};
pub use metrics::{compare_traces, inertial_power, Ramp, TraceComparison, DIVERGENCE_REL_TOL};
pub use scan::{log_frequencies, scan_impedance, ImpedanceScan, ScanMode};
