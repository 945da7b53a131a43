//! JSON scenario files.
//!
//! A scenario bundles the farm description, the per-string control and
//! dispatch, a list of grid events and solver settings. Unknown keys are
//! rejected everywhere so that a typo cannot silently fall back to a
//! default.
//!
//! ```json
//! {
//!   "name": "phase jump",
//!   "units": { "dispatch_pu": [0.9], "control": { "limiter": false } },
//!   "events": [ { "type": "phase_jump", "t_s": 1.0, "jump_deg": 15.0 } ],
//!   "solver": { "t_end_s": 5.0 }
//! }
//! ```

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::electrical::GridEvent;
use crate::error::{Error, Result};
use crate::farm::{FarmConfig, FarmModel, Level, Scenario, UnitsConfig};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverConfig {
    pub t_end_s: f64,
    #[serde(default = "default_dt")]
    pub dt_s: f64,
    /// Record every n-th solver step; 40 gives 1 kHz output at the default step.
    #[serde(default = "default_decimation")]
    pub decimation: usize,
}

fn default_dt() -> f64 {
    2.5e-5
}
fn default_decimation() -> usize {
    40
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputsConfig {
    /// Channels written to `timeseries.csv`; empty means all.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub channels: Vec<String>,
    /// Write SVG plots next to the CSV.
    #[serde(default)]
    pub plots: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub name: String,
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub description: String,
    #[serde(default)]
    pub farm: FarmConfig,
    pub units: UnitsConfig,
    #[serde(default)]
    pub events: Vec<GridEvent>,
    pub solver: SolverConfig,
    #[serde(default)]
    pub outputs: OutputsConfig,
}

impl ScenarioFile {
    pub fn from_json(text: &str) -> Result<Self> {
        let s: Self = serde_json::from_str(text).map_err(|e| Error::Schema(e.to_string()))?;
        s.validate()?;
        Ok(s)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("scenario serializes")
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json() + "\n")?;
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        self.farm.validate()?;
        self.units.validate(self.farm.strings)?;
        self.scenario().validate()?;
        for e in &self.events {
            if let GridEvent::Rocof { hz_per_s, f_end_hz, .. } = *e {
                if hz_per_s == 0.0 || (f_end_hz - self.farm.f_base_hz) * hz_per_s < 0.0 {
                    return Err(Error::Schema(format!(
                        "rocof of {hz_per_s} Hz/s never reaches {f_end_hz} Hz"
                    )));
                }
            }
        }
        Ok(())
    }

    /// Solver view of the scenario.
    pub fn scenario(&self) -> Scenario {
        Scenario {
            events: self.events.clone(),
            t_end_s: self.solver.t_end_s,
            dt_s: self.solver.dt_s,
            decimation: self.solver.decimation,
        }
    }

    pub fn build(&self, level: Level) -> Result<FarmModel> {
        FarmModel::build(&self.farm, &self.units, level)
    }
}
