//! Passive plant: converter filter, transformers, collector and export
//! cables, the grid Thevenin source and the converter dc link.

pub mod cable;
pub mod dc;
pub mod grid;
pub mod network;
pub mod params;

pub use cable::{aggregate_collector, build_hvac_cable, CollectorBranch, PiSection};
pub use dc::{dc_link_step, DcRegulator, DcRegulatorState, DC_COLLAPSE_PU};
pub use grid::{grid_waveform, GridEvent, GridSample, GridSchedule, ThevGrid};
pub use network::{
    Branch, BranchKind, ConverterTermination, DiscretePlant, Network, Node, PhasorSolution, StateSpace,
    Terminal,
};
pub use params::ConverterParams;
