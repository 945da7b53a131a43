//! Farm assembly at the three aggregation levels, steady-state
//! initialization and the fixed-step time-domain solver.

pub mod config;
pub mod init;
pub mod model;
pub mod sim;
pub mod timeseries;

pub use config::{CableConfig, CollectorConfig, ControlConfig, FarmConfig, SeriesConfig, UnitOverride, UnitsConfig};
pub use init::{init_steady_state, solve_operating_point};
pub use model::{network_reactance_to_pcc, FarmModel, Level, UnitModel};
pub use sim::{run, RunOutput, Scenario, SimState, Simulator, UnitState};
pub use timeseries::{unit_channel, TimeSeries};
