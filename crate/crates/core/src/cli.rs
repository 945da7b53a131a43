//! Command-line front end: `run`, `scan` and `compare`.
//!
//! Every command returns a process exit code: 0 on success, 2 for schema
//! or argument errors, 3 when a simulation aborts and 4 for I/O failures.
//! Failures also print a JSON error document on stderr.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;

use crate::analysis::{
    compare_traces, detect_los, inertial_power, log_frequencies, scan_impedance, ImpedanceScan, LosReport, Ramp,
    ScanMode, TraceComparison,
};
use crate::error::{Error, Result};
use crate::farm::{run, FarmModel, Level, RunOutput, TimeSeries};
use crate::plot::{line_chart, Chart, Series};
use crate::scenario::ScenarioFile;

/// Environment variable capping the worker threads.
pub const THREADS_ENV: &str = "GFMSIM_THREADS";

#[derive(Debug, Parser)]
#[command(name = "gfmsim", version, about = "Grid-forming wind farm simulator")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum LevelArg {
    Faw,
    Saw,
    Turbine,
    Both,
}

impl LevelArg {
    pub fn levels(self) -> Vec<Level> {
        match self {
            LevelArg::Faw => vec![Level::Faw],
            LevelArg::Saw => vec![Level::Saw],
            LevelArg::Turbine => vec![Level::Turbine],
            LevelArg::Both => vec![Level::Faw, Level::Saw],
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Simulate a scenario and write time series and a summary.
    Run {
        scenario: PathBuf,
        #[arg(long, value_enum, default_value = "both")]
        level: LevelArg,
        #[arg(long, default_value = "out")]
        out: PathBuf,
        /// Also write SVG plots.
        #[arg(long)]
        plots: bool,
    },
    /// Frequency scan of the driving-point impedance at one bus.
    Scan {
        scenario: PathBuf,
        #[arg(long, default_value = "faw_pcc")]
        bus: String,
        #[arg(long, default_value_t = 1.0)]
        fmin: f64,
        #[arg(long, default_value_t = 2000.0)]
        fmax: f64,
        #[arg(long, default_value_t = 400)]
        points: usize,
        #[arg(long, value_enum, default_value = "open")]
        mode: ScanModeArg,
        /// Power base of the result; defaults to the rating of the unit
        /// owning the bus, or the farm base.
        #[arg(long)]
        base_mva: Option<f64>,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Compare one channel of two run directories.
    Compare {
        run_a: PathBuf,
        run_b: PathBuf,
        #[arg(long, default_value = "farm_p_pu")]
        channel: String,
        /// Where to write the metrics; defaults to `<run_b>/compare_<channel>.json`.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ScanModeArg {
    Open,
    Terminated,
}

impl From<ScanModeArg> for ScanMode {
    fn from(m: ScanModeArg) -> Self {
        match m {
            ScanModeArg::Open => ScanMode::Open,
            ScanModeArg::Terminated => ScanMode::Terminated,
        }
    }
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Io(_) => 4,
        Error::NumericalDivergence { .. }
        | Error::DcCollapse { .. }
        | Error::InfeasibleDispatch { .. }
        | Error::UnstableOperatingPoint { .. } => 3,
        _ => 2,
    }
}

pub fn error_document(e: &Error) -> serde_json::Value {
    json!({ "error": { "kind": e.kind(), "message": e.to_string(), "exit_code": exit_code(e) } })
}

/// Parse `args` and execute; returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    let result = match cli.command {
        Command::Run {
            scenario,
            level,
            out,
            plots,
        } => cmd_run(&scenario, level, &out, plots).map(|s| println!("{}", summary_line(&s))),
        Command::Scan {
            scenario,
            bus,
            fmin,
            fmax,
            points,
            mode,
            base_mva,
            out,
        } => cmd_scan(&scenario, &bus, fmin, fmax, points, mode.into(), base_mva, &out).map(|s| {
            println!(
                "scanned {} at {} points on {} MVA -> {}",
                s.bus,
                s.freqs_hz.len(),
                s.base.s_base,
                out.join("impedance.csv").display()
            )
        }),
        Command::Compare {
            run_a,
            run_b,
            channel,
            out,
        } => cmd_compare(&run_a, &run_b, &channel, out.as_deref())
            .map(|c| println!("{}", serde_json::to_string_pretty(&c).expect("metrics serialize"))),
    };
    match result {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("{}", error_document(&e));
            exit_code(&e)
        }
    }
}

fn thread_pool() -> Result<rayon::ThreadPool> {
    let n = match std::env::var(THREADS_ENV) {
        Ok(v) => v
            .trim()
            .parse::<usize>()
            .map_err(|_| Error::InvalidParameter(format!("{THREADS_ENV}={v:?} is not a thread count")))?,
        Err(_) => 0,
    };
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build()
        .map_err(|e| Error::InvalidParameter(e.to_string()))
}

/// Summary of one aggregation level.
#[derive(Debug, Clone, Serialize)]
pub struct LevelSummary {
    pub level: Level,
    pub status: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<serde_json::Value>,
    pub samples: usize,
    pub t_end_s: f64,
    pub unit_names: Vec<String>,
    pub dispatch_pu: Vec<f64>,
    pub kd: Vec<f64>,
    pub los: LosReport,
    /// Rise of farm P at the 400 kV bus during a frequency ramp.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub inertial_power_pu: Option<f64>,
    pub farm_p_final_pu: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunSummary {
    pub scenario: String,
    pub levels: Vec<LevelSummary>,
    /// FAW against SAW, present when both levels ran.
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub divergence: Vec<TraceComparison>,
}

impl RunSummary {
    pub fn level(&self, level: Level) -> Option<&LevelSummary> {
        self.levels.iter().find(|l| l.level == level)
    }
}

fn summary_line(s: &RunSummary) -> String {
    let parts: Vec<String> = s
        .levels
        .iter()
        .map(|l| {
            let mut p = format!("{}: {} ({} samples", l.level, l.status, l.samples);
            if l.los.lost_synchronism() {
                p += &format!(", pole slips on units {:?}", l.los.slipped);
            }
            if let Some(ip) = l.inertial_power_pu {
                p += &format!(", inertial power {ip:.4} pu");
            }
            p + ")"
        })
        .collect();
    parts.join("; ")
}

fn io_err(path: &Path, e: impl std::fmt::Display) -> Error {
    Error::Io(format!("{}: {e}", path.display()))
}

fn output_channels(file: &ScenarioFile, units: usize) -> Result<Option<Vec<String>>> {
    if file.outputs.channels.is_empty() {
        return Ok(None);
    }
    let all = TimeSeries::for_units(units).names;
    for c in &file.outputs.channels {
        if !all.contains(c) {
            return Err(Error::ChannelMissing(c.clone()));
        }
    }
    Ok(Some(file.outputs.channels.clone()))
}

/// Run a scenario at one or two levels and write results under `out`.
///
/// Each level gets its own subdirectory with `timeseries.csv`;
/// `run_summary.json` sits in `out`. When a run aborts, its partial series
/// and the summary are still written before the error is returned.
pub fn cmd_run(path: &Path, level: LevelArg, out: &Path, plots: bool) -> Result<RunSummary> {
    let file = ScenarioFile::load(path)?;
    let levels = level.levels();
    let models = levels.iter().map(|l| file.build(*l)).collect::<Result<Vec<_>>>()?;
    let channels = models
        .iter()
        .map(|m| output_channels(&file, m.units.len()))
        .collect::<Result<Vec<_>>>()?;
    let scenario = file.scenario();
    let pool = thread_pool()?;
    let outputs: Vec<RunOutput> = pool.install(|| models.par_iter().map(|m| run(m, &scenario)).collect());

    std::fs::create_dir_all(out).map_err(|e| io_err(out, e))?;
    let ramp = Ramp::from_events(&file.events, file.farm.f_base_hz);
    let mut summaries = Vec::new();
    let mut first_error = None;
    for ((model, output), chans) in models.iter().zip(&outputs).zip(&channels) {
        let dir = out.join(model.level.to_string());
        std::fs::create_dir_all(&dir).map_err(|e| io_err(&dir, e))?;
        let series = match chans {
            Some(c) => output.series.select(c)?,
            None => output.series.clone(),
        };
        series.save_csv(&dir.join("timeseries.csv"))?;
        if plots || file.outputs.plots {
            write_run_plots(&output.series, &dir)?;
        }
        summaries.push(level_summary(model, output, ramp.as_ref())?);
        if first_error.is_none() {
            first_error = output.error.clone();
        }
    }
    let divergence = if outputs.len() == 2 && outputs.iter().all(|o| o.error.is_none()) {
        ["farm_p_pu", "farm_q_pu"]
            .iter()
            .map(|c| compare_traces(&outputs[0].series, &outputs[1].series, c))
            .collect::<Result<Vec<_>>>()?
    } else {
        Vec::new()
    };
    let summary = RunSummary {
        scenario: if file.name.is_empty() {
            path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default()
        } else {
            file.name.clone()
        },
        levels: summaries,
        divergence,
    };
    let sp = out.join("run_summary.json");
    std::fs::write(&sp, serde_json::to_string_pretty(&summary).expect("summary serializes") + "\n")
        .map_err(|e| io_err(&sp, e))?;
    match first_error {
        Some(e) => Err(e),
        None => Ok(summary),
    }
}

fn level_summary(model: &FarmModel, output: &RunOutput, ramp: Option<&Ramp>) -> Result<LevelSummary> {
    let ts = &output.series;
    let los = detect_los(ts)?.with_limiter_intervals(&output.limiter_intervals);
    let inertial = match ramp {
        Some(r) if output.error.is_none() => inertial_power(ts, "farm_p_pu", r, None).ok(),
        _ => None,
    };
    Ok(LevelSummary {
        level: model.level,
        status: if output.error.is_none() { "ok" } else { "aborted" },
        error: output.error.as_ref().map(error_document),
        samples: ts.len(),
        t_end_s: ts.t.last().copied().unwrap_or(0.0),
        unit_names: model.units.iter().map(|u| u.name.clone()).collect(),
        dispatch_pu: model.dispatch(),
        kd: model.units.iter().map(|u| u.gfc.kd).collect(),
        los,
        inertial_power_pu: inertial,
        farm_p_final_pu: ts.get("farm_p_pu")?.last().copied(),
    })
}

fn write_run_plots(ts: &TimeSeries, dir: &Path) -> Result<()> {
    let n = ts.unit_count();
    let unit_series = |qty: &str| -> Result<Vec<Series<'_>>> {
        (0..n)
            .map(|k| {
                Ok(Series {
                    label: format!("unit {}", k + 1),
                    x: &ts.t,
                    y: ts.get(&crate::farm::unit_channel(k, qty))?,
                })
            })
            .collect()
    };
    let mut charts = vec![(
        "farm_p.svg",
        Chart {
            title: "Active power at the 400 kV bus".into(),
            x_label: "time [s]".into(),
            y_label: "P [pu, farm base]".into(),
            log_x: false,
        },
        vec![Series {
            label: "farm".into(),
            x: &ts.t,
            y: ts.get("farm_p_pu")?,
        }],
    )];
    for (file, qty, title, y) in [
        ("unit_p.svg", "p_pu", "Unit active power", "P [pu, unit base]"),
        ("unit_vdc.svg", "vdc_pu", "Dc-link voltage", "vdc [pu]"),
        ("unit_theta.svg", "theta_rad", "Rotor angle relative to grid", "angle [rad]"),
    ] {
        charts.push((
            file,
            Chart {
                title: title.into(),
                x_label: "time [s]".into(),
                y_label: y.into(),
                log_x: false,
            },
            unit_series(qty)?,
        ));
    }
    for (name, chart, series) in charts {
        let p = dir.join(name);
        std::fs::write(&p, line_chart(&chart, &series)).map_err(|e| io_err(&p, e))?;
    }
    Ok(())
}

fn find_bus(file: &ScenarioFile, bus: &str) -> Result<FarmModel> {
    let mut available = Vec::new();
    for level in [Level::Faw, Level::Saw, Level::Turbine] {
        let m = file.build(level)?;
        if m.network.node_index(bus).is_some() {
            return Ok(m);
        }
        for n in m.network.node_names() {
            if !available.iter().any(|a: &String| a == n) {
                available.push(n.to_string());
            }
        }
    }
    Err(Error::UnknownBus {
        name: bus.to_string(),
        available: available.join(", "),
    })
}

/// Scan `bus` and write `impedance.csv` and `impedance.svg` under `out`.
///
/// The bus is looked up in the FAW, SAW and turbine-level models in turn,
/// so `faw_pcc`, `string3_pcc` and `wtg12_pcc` are all valid names.
#[allow(clippy::too_many_arguments)]
pub fn cmd_scan(
    path: &Path,
    bus: &str,
    fmin: f64,
    fmax: f64,
    points: usize,
    mode: ScanMode,
    base_mva: Option<f64>,
    out: &Path,
) -> Result<ImpedanceScan> {
    let file = ScenarioFile::load(path)?;
    let model = find_bus(&file, bus)?;
    let freqs = log_frequencies(fmin, fmax, points)?;
    let owner = model
        .units
        .iter()
        .find(|u| bus.strip_prefix(u.name.as_str()).is_some_and(|r| r.starts_with('_')));
    let s_base = base_mva.unwrap_or(owner.map_or(model.base.s_base, |u| u.rating_mva));
    let scan = pool_scan(&model, bus, &freqs, mode)?.rebased(&model.base.with_power(s_base)?)?;

    std::fs::create_dir_all(out).map_err(|e| io_err(out, e))?;
    let csv_path = out.join("impedance.csv");
    let mut w = csv::Writer::from_path(&csv_path).map_err(|e| io_err(&csv_path, e))?;
    let map = |e: csv::Error| io_err(&csv_path, e);
    w.write_record(["f_hz", "r_pu", "x_pu", "mag_pu", "base_mva"]).map_err(map)?;
    for (f, z) in scan.freqs_hz.iter().zip(&scan.z) {
        w.write_record([
            format!("{f:?}"),
            format!("{:?}", z.re),
            format!("{:?}", z.im),
            format!("{:?}", z.norm()),
            format!("{:?}", s_base),
        ])
        .map_err(map)?;
    }
    w.flush().map_err(|e| io_err(&csv_path, e))?;

    let mag: Vec<f64> = scan.z.iter().map(|z| z.norm()).collect();
    let svg = line_chart(
        &Chart {
            title: format!("Driving-point impedance at {bus}"),
            x_label: "frequency [Hz]".into(),
            y_label: format!("|Z| [pu, {s_base} MVA]"),
            log_x: true,
        },
        &[Series {
            label: bus.to_string(),
            x: &scan.freqs_hz,
            y: &mag,
        }],
    );
    let svg_path = out.join("impedance.svg");
    std::fs::write(&svg_path, svg).map_err(|e| io_err(&svg_path, e))?;
    Ok(scan)
}

fn pool_scan(model: &FarmModel, bus: &str, freqs: &[f64], mode: ScanMode) -> Result<ImpedanceScan> {
    thread_pool()?.install(|| scan_impedance(model, bus, freqs, mode))
}

/// Compare `channel` between two run directories holding `timeseries.csv`.
pub fn cmd_compare(run_a: &Path, run_b: &Path, channel: &str, out: Option<&Path>) -> Result<TraceComparison> {
    let a = TimeSeries::load_csv(&run_a.join("timeseries.csv"))?;
    let b = TimeSeries::load_csv(&run_b.join("timeseries.csv"))?;
    let c = compare_traces(&a, &b, channel)?;
    let default = run_b.join(format!("compare_{channel}.json"));
    let path = out.unwrap_or(&default);
    std::fs::write(path, serde_json::to_string_pretty(&c).expect("metrics serialize") + "\n")
        .map_err(|e| io_err(path, e))?;
    Ok(c)
}
