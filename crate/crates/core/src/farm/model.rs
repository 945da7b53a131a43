use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::config::{ControlConfig, FarmConfig, UnitsConfig};
use crate::control::{design_damping, GfcParams, OperatingPoint};
use crate::electrical::network::ConverterTermination;
use crate::electrical::{
    aggregate_collector, build_hvac_cable, BranchKind, CollectorBranch, ConverterParams, DcRegulator, Network,
    Terminal, ThevGrid,
};
use crate::error::{Error, Result};
use crate::foundation::PerUnitBase;

/// Aggregation level of the farm model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Level {
    /// One converter with the full farm rating.
    Faw,
    /// One converter per string.
    Saw,
    /// One converter per turbine.
    Turbine,
}

impl fmt::Display for Level {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Level::Faw => "faw",
            Level::Saw => "saw",
            Level::Turbine => "turbine",
        })
    }
}

impl FromStr for Level {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "faw" => Ok(Level::Faw),
            "saw" => Ok(Level::Saw),
            "turbine" => Ok(Level::Turbine),
            _ => Err(Error::Schema(format!("unknown aggregation level {s}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct UnitModel {
    pub name: String,
    /// 0-based string the unit belongs to (0 for the aggregated farm).
    pub string: usize,
    pub rating_mva: f64,
    pub gfc: GfcParams,
    pub conv: ConverterParams,
    /// Active power setpoint on the unit rating.
    pub dispatch_pu: f64,
}

/// Network positions of one unit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UnitIndex {
    pub source: usize,
    pub filter: usize,
    pub transformer: usize,
    pub collector: usize,
    pub pcc: usize,
    pub feeder_end: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NetIndex {
    pub grid_source: usize,
    pub thevenin: usize,
    pub poi: usize,
    pub mv: usize,
    pub units: Vec<UnitIndex>,
}

/// Assembled farm: units, network and indices. Immutable during a run.
#[derive(Debug, Clone, PartialEq)]
pub struct FarmModel {
    pub level: Level,
    pub base: PerUnitBase,
    pub units: Vec<UnitModel>,
    pub network: Network,
    pub index: NetIndex,
    pub grid: ThevGrid,
    pub dc_regulator: DcRegulator,
    /// Controller sample period [s].
    pub control_period_s: f64,
}

impl FarmModel {
    /// Build the farm at aggregation `level`.
    pub fn build(config: &FarmConfig, units: &UnitsConfig, level: Level) -> Result<Self> {
        config.validate()?;
        units.validate(config.strings)?;
        let base = PerUnitBase::new(config.s_base_mva, 66.0, config.f_base_hz)?;
        let string_dispatch = units.string_dispatch(config.strings)?;
        let string_mva = config.string_mva();
        let turbine_mva = config.turbine_mva();

        // (string, rating, dispatch) per unit
        let layout: Vec<(usize, f64, f64)> = match level {
            Level::Faw => {
                let p = string_dispatch.iter().sum::<f64>() / config.strings as f64;
                vec![(0, config.s_base_mva, p)]
            }
            Level::Saw => (0..config.strings)
                .map(|s| (s, string_mva, string_dispatch[s]))
                .collect(),
            Level::Turbine => (0..config.strings)
                .flat_map(|s| (0..config.turbines_per_string).map(move |_| s))
                .map(|s| (s, turbine_mva, string_dispatch[s]))
                .collect(),
        };

        let x_design = network_reactance_to_pcc(config)? + units.control.lv_pu;
        let farm_dispatch = string_dispatch.iter().sum::<f64>() / config.strings as f64;
        let conv = config.converter;

        let mut out_units = Vec::with_capacity(layout.len());
        for (k, &(string, rating, dispatch)) in layout.iter().enumerate() {
            let ov = if level == Level::Faw {
                None
            } else {
                units.overrides.iter().find(|o| o.string == string + 1)
            };
            let mut ctrl = units.control;
            if let Some(o) = ov {
                if let Some(h) = o.h_s {
                    ctrl.h_s = h;
                }
                if let Some(z) = o.zeta {
                    ctrl.zeta = z;
                    ctrl.kd = None;
                }
                if let Some(kd) = o.kd {
                    ctrl.kd = Some(kd);
                }
            }
            let gfc = resolve_control(&ctrl, &conv, config.f_base_hz, x_design, farm_dispatch)?;
            let name = match level {
                Level::Faw => "faw".to_string(),
                Level::Saw => format!("string{}", k + 1),
                Level::Turbine => format!("wtg{}", k + 1),
            };
            out_units.push(UnitModel {
                name,
                string,
                rating_mva: rating,
                gfc,
                conv,
                dispatch_pu: dispatch,
            });
        }

        let (network, index) = assemble_network(config, &out_units, level)?;
        Ok(Self {
            level,
            base,
            units: out_units,
            network,
            index,
            grid: config.grid,
            dc_regulator: config.dc_regulator,
            control_period_s: units.control.sample_period_s,
        })
    }

    /// Ratio converting unit-base current or power into farm base.
    pub fn unit_scale(&self, k: usize) -> f64 {
        self.units[k].rating_mva / self.base.s_base
    }

    pub fn dispatch(&self) -> Vec<f64> {
        self.units.iter().map(|u| u.dispatch_pu).collect()
    }

    /// Copy of the model with a different per-unit dispatch.
    pub fn with_dispatch(&self, dispatch: &[f64]) -> Result<Self> {
        if dispatch.len() != self.units.len() {
            return Err(Error::Schema(format!(
                "dispatch has {} entries for {} units",
                dispatch.len(),
                self.units.len()
            )));
        }
        let mut m = self.clone();
        for (u, p) in m.units.iter_mut().zip(dispatch) {
            u.dispatch_pu = *p;
        }
        Ok(m)
    }

    /// Farm-base virtual impedance of every unit, for terminated scans.
    pub fn virtual_impedances(&self) -> Vec<Complex64> {
        self.units
            .iter()
            .enumerate()
            .map(|(k, u)| Complex64::new(u.gfc.rv, u.gfc.lv) / self.unit_scale(k))
            .collect()
    }
}

/// Control parameters for one unit; `kd` designed from `zeta` unless given.
fn resolve_control(
    ctrl: &ControlConfig,
    conv: &ConverterParams,
    f_base: f64,
    x_design: f64,
    dispatch: f64,
) -> Result<GfcParams> {
    let mut p = GfcParams::calibrated(conv.lf_pu, conv.rf_pu(), f_base);
    p.h = ctrl.h_s;
    p.lv = ctrl.lv_pu;
    p.rv = ctrl.rv_pu;
    p.i_max = ctrl.i_max_pu;
    p.limiter_enabled = ctrl.limiter;
    p.kq = ctrl.kq;
    p.v_ref = ctrl.v_ref_pu;
    p.kpv = ctrl.kpv;
    p.kiv = ctrl.kiv;
    p.kpc = ctrl.current_bandwidth_rad_s * conv.lf_pu / p.omega_base();
    p.kic = ctrl.current_bandwidth_rad_s * conv.rf_pu();
    p.omega_lpf = ctrl.omega_lpf_rad_s;
    p.kmod = conv.kmod;
    p.kd = match ctrl.kd {
        Some(kd) => kd,
        None => {
            let op = OperatingPoint {
                e: 1.0,
                v: 1.0,
                x_net: x_design,
                delta0: (dispatch * x_design).clamp(-0.95, 0.95).asin(),
            };
            design_damping(ctrl.zeta, ctrl.h_s, &op, p.omega_base())?
        }
    };
    p.validate()?;
    Ok(p)
}

/// Series reactance from the grid source to the aggregated PCC at base
/// frequency, converters open, on the farm base.
pub fn network_reactance_to_pcc(config: &FarmConfig) -> Result<f64> {
    let units = vec![UnitModel {
        name: "faw".into(),
        string: 0,
        rating_mva: config.s_base_mva,
        gfc: GfcParams::calibrated(config.converter.lf_pu, config.converter.rf_pu(), config.f_base_hz),
        conv: config.converter,
        dispatch_pu: 0.0,
    }];
    let (net, idx) = assemble_network(config, &units, Level::Faw)?;
    let z = net
        .driving_point_impedance(idx.units[0].pcc, 1.0, &ConverterTermination::Open)
        .ok_or_else(|| Error::InvalidParameter("network resonant at base frequency".into()))?;
    Ok(z.im)
}

/// Series resistance giving a shunt susceptance `b` the loss tangent `tand`.
fn shunt_rc(tand: f64, b: f64) -> f64 {
    if b > 0.0 {
        tand / b
    } else {
        0.0
    }
}

fn assemble_network(config: &FarmConfig, units: &[UnitModel], level: Level) -> Result<(Network, NetIndex)> {
    let s_sys = config.s_base_mva;
    let mut net = Network::default();
    let grid_source = net.add_source("grid");

    let zg = config
        .grid
        .impedance(&PerUnitBase::new(s_sys, 66.0, config.f_base_hz)?)?;
    let cable = build_hvac_cable(
        config.hvac_cable.r_pu,
        config.hvac_cable.x_pu,
        config.hvac_cable.b_pu,
        config.hvac_cable.sections,
    )?;

    // Cable nodes from the grid side: poi, c1 .. cN.
    let mut cable_nodes = Vec::with_capacity(cable.len() + 1);
    for k in 0..=cable.len() {
        let left = if k > 0 { cable[k - 1].b_half } else { 0.0 };
        let right = cable.get(k).map_or(0.0, |s| s.b_half);
        let name = if k == 0 { "poi".to_string() } else { format!("cable{k}") };
        let b = left + right;
        cable_nodes.push(net.add_node(name, b, shunt_rc(config.shunt_loss_tangent, b), None));
    }
    let poi = cable_nodes[0];
    let thevenin = net.add_branch(
        "thevenin",
        BranchKind::Grid,
        Terminal::Node(poi),
        Terminal::Source(grid_source),
        zg.re,
        zg.im,
    );
    for (k, s) in cable.iter().enumerate() {
        net.add_branch(
            format!("cable_section{}", k + 1),
            BranchKind::Cable,
            Terminal::Node(cable_nodes[k + 1]),
            Terminal::Node(cable_nodes[k]),
            s.r,
            s.x,
        );
    }

    // Collector shunt halves land on the MV bus; filled in below.
    let mv = net.add_node("mv", 0.0, 0.0, None);
    let pt = config.plant_transformer;
    net.add_branch(
        "plant_transformer",
        BranchKind::Transformer,
        Terminal::Node(mv),
        Terminal::Node(*cable_nodes.last().unwrap()),
        pt.r_pu,
        pt.x_pu,
    );

    // Collector per unit on the farm base.
    let string_mva = config.string_mva();
    let collectors: Vec<CollectorBranch> = match level {
        Level::Faw => {
            let strings: Vec<CollectorBranch> = (0..config.strings)
                .map(|s| {
                    let c = config.collector(s);
                    CollectorBranch {
                        z: Complex64::new(c.r_pu, c.x_pu) * (s_sys / string_mva),
                        b: c.b_pu * string_mva / s_sys,
                        rating_mva: string_mva,
                    }
                })
                .collect();
            vec![aggregate_collector(&strings)?]
        }
        Level::Saw | Level::Turbine => units
            .iter()
            .map(|u| {
                let c = config.collector(u.string);
                CollectorBranch {
                    z: Complex64::new(c.r_pu, c.x_pu) * (s_sys / u.rating_mva),
                    b: c.b_pu * u.rating_mva / s_sys,
                    rating_mva: u.rating_mva,
                }
            })
            .collect(),
    };

    let mut unit_index = Vec::with_capacity(units.len());
    for (k, (u, col)) in units.iter().zip(&collectors).enumerate() {
        let to_sys = s_sys / u.rating_mva;
        let conv = &u.conv;
        let source = net.add_source(format!("{}_vsc", u.name));
        net.nodes[mv].b += 0.5 * col.b;
        net.nodes[mv].rc = shunt_rc(config.shunt_loss_tangent, net.nodes[mv].b);
        let feeder_end = net.add_node(
            format!("{}_feeder", u.name),
            0.5 * col.b,
            shunt_rc(config.shunt_loss_tangent, 0.5 * col.b),
            None,
        );
        let pcc = net.add_node(
            format!("{}_pcc", u.name),
            conv.cf_pu / to_sys,
            conv.rcf_pu * to_sys,
            Some(k),
        );
        let collector = net.add_branch(
            format!("{}_collector", u.name),
            BranchKind::Collector,
            Terminal::Node(feeder_end),
            Terminal::Node(mv),
            col.z.re,
            col.z.im,
        );
        let (rt, xt) = conv.transformer_on_unit_base();
        let transformer = net.add_branch(
            format!("{}_transformer", u.name),
            BranchKind::Transformer,
            Terminal::Node(pcc),
            Terminal::Node(feeder_end),
            rt * to_sys,
            xt * to_sys,
        );
        let filter = net.add_branch(
            format!("{}_filter", u.name),
            BranchKind::Filter(k),
            Terminal::Source(source),
            Terminal::Node(pcc),
            conv.rf_pu() * to_sys,
            conv.lf_pu * to_sys,
        );
        unit_index.push(UnitIndex {
            source,
            filter,
            transformer,
            collector,
            pcc,
            feeder_end,
        });
    }

    Ok((
        net,
        NetIndex {
            grid_source,
            thevenin,
            poi,
            mv,
            units: unit_index,
        },
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn faw_and_saw_unit_counts() {
        let cfg = FarmConfig::default();
        let units = UnitsConfig::uniform(0.5);
        let faw = FarmModel::build(&cfg, &units, Level::Faw).unwrap();
        assert_eq!(faw.units.len(), 1);
        assert_eq!(faw.units[0].rating_mva, 420.0);
        let saw = FarmModel::build(&cfg, &units, Level::Saw).unwrap();
        assert_eq!(saw.units.len(), 7);
        assert!(saw.units.iter().all(|u| u.rating_mva == 60.0));
        let full = FarmModel::build(&cfg, &units, Level::Turbine).unwrap();
        assert_eq!(full.units.len(), 35);
        let total: f64 = full.units.iter().map(|u| u.rating_mva).sum();
        assert!((total - 420.0).abs() < 1e-9);
    }

    #[test]
    fn faw_dispatch_is_rating_weighted_mean() {
        let cfg = FarmConfig::default();
        let units = UnitsConfig {
            dispatch_pu: vec![1.0, 0.95, 0.9, 0.8, 0.7, 0.65, 0.6],
            ..UnitsConfig::uniform(0.0)
        };
        let faw = FarmModel::build(&cfg, &units, Level::Faw).unwrap();
        assert!((faw.units[0].dispatch_pu - 0.8).abs() < 1e-12);
    }

    #[test]
    fn symmetric_saw_shares_faw_control() {
        let cfg = FarmConfig::default();
        let units = UnitsConfig::uniform(0.9);
        let faw = FarmModel::build(&cfg, &units, Level::Faw).unwrap();
        let saw = FarmModel::build(&cfg, &units, Level::Saw).unwrap();
        for u in &saw.units {
            assert_eq!(u.gfc, faw.units[0].gfc);
        }
    }

    #[test]
    fn schema_violations_rejected() {
        let cfg = FarmConfig::default();
        let bad = UnitsConfig {
            dispatch_pu: vec![0.5, 0.5],
            ..UnitsConfig::uniform(0.0)
        };
        assert!(matches!(FarmModel::build(&cfg, &bad, Level::Saw), Err(Error::Schema(_))));
        let bad = UnitsConfig::uniform(1.3);
        assert!(FarmModel::build(&cfg, &bad, Level::Saw).is_err());
        let mut cfg2 = cfg.clone();
        cfg2.strings = 6;
        assert!(FarmModel::build(&cfg2, &UnitsConfig::uniform(0.5), Level::Saw).is_err());
    }

    #[test]
    fn level_parse() {
        assert_eq!("saw".parse::<Level>().unwrap(), Level::Saw);
        assert!("both".parse::<Level>().is_err());
        assert_eq!(Level::Faw.to_string(), "faw");
    }
}
