//! `tetherkit` command-line front end.
//!
//! Exit codes: 0 success/feasible, 1 error, 2 infeasible or no equilibrium,
//! 3 drag model not identifiable from the given flights.

// Validation is written as `!(x > 0.0)` on purpose so that NaN is rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use log::{debug, info, warn};
use serde_json::json;

use tetherkit::config::{ResolvedSystem, SystemConfig};
use tetherkit::drag::{self, DragModelParams, FitOptions};
use tetherkit::equilibrium::solve_equilibrium_pitch;
use tetherkit::flightlog::{compute_drag_samples, load_flight, pitch_offset};
use tetherkit::motor::MotorCurve;
use tetherkit::optimizer::{
    compare_motors, operating_point, optimize_cable, CableReport, OptimizeOptions,
};
use tetherkit::report::{percent, to_json, write_curves_csv, DragModelFile};
use tetherkit::SEA_LEVEL_AIR_DENSITY;

const EXIT_ERROR: u8 = 1;
const EXIT_INFEASIBLE: u8 = 2;
const EXIT_NOT_IDENTIFIABLE: u8 = 3;

#[derive(Parser)]
#[command(
    name = "tetherkit",
    version,
    about = "Tether cable sizing and drag identification for tethered multirotors"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Find the optimal conductor cross-section for a system configuration.
    Optimize(OptimizeArgs),
    /// Fit a drag model to flight logs.
    FitDrag(FitDragArgs),
    /// Estimate the pitch sensor offset from a hover flight.
    CalibratePitch(CalibrateArgs),
    /// Solve the forward-flight pitch and power at one speed.
    Equilibrium(EquilibriumArgs),
    /// Optimize the tether for every motor curve in a directory.
    CompareMotors(CompareArgs),
}

#[derive(Args)]
struct OptimizeArgs {
    /// System configuration JSON.
    #[arg(long)]
    config: PathBuf,
    /// Report JSON; printed to stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// CSV of the area sweep for plotting.
    #[arg(long)]
    plot_csv: Option<PathBuf>,
    /// Override the cruise speed of the configuration, m/s.
    #[arg(long)]
    speed_ms: Option<f64>,
    /// Accept the min-power area even below the thrust-headroom bound.
    #[arg(long)]
    allow_below_headroom: bool,
}

#[derive(Args)]
struct FitDragArgs {
    /// Comma-separated drag-flight CSVs, one wind offset each.
    #[arg(long, value_delimiter = ',', required = true)]
    flights: Vec<PathBuf>,
    /// Take-off mass during the flights, kg.
    #[arg(long)]
    mass: f64,
    /// Hover flight used to calibrate the pitch offset.
    #[arg(long)]
    hover_flight: Option<PathBuf>,
    /// Air density, kg/m³.
    #[arg(long, default_value_t = SEA_LEVEL_AIR_DENSITY)]
    air_density: f64,
    /// Fit the quadratic-only model (linear term pinned at zero).
    #[arg(long)]
    no_linear_term: bool,
    /// Drag-model JSON; printed to stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct CalibrateArgs {
    #[arg(long)]
    hover_flight: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct EquilibriumArgs {
    #[arg(long)]
    config: PathBuf,
    /// Ground speed, m/s.
    #[arg(long, allow_negative_numbers = true)]
    speed_ms: f64,
    /// Drag-model JSON; defaults to the model named in the configuration.
    #[arg(long)]
    drag_model: Option<PathBuf>,
    /// Conductor cross-section, mm²; defaults to the configured area, else
    /// the optimizer's choice.
    #[arg(long)]
    area_mm2: Option<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct CompareArgs {
    #[arg(long)]
    config: PathBuf,
    /// Directory of `throttle,power_w,thrust_kg` motor CSVs.
    #[arg(long)]
    motor_dir: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Directory receiving one area-sweep CSV per motor.
    #[arg(long)]
    plot_csv: Option<PathBuf>,
    #[arg(long)]
    speed_ms: Option<f64>,
    #[arg(long)]
    allow_below_headroom: bool,
}

/// Input the user must fix; reported like a parse error.
#[derive(Debug)]
struct UsageError(String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

fn usage(message: impl Into<String>) -> anyhow::Error {
    UsageError(message.into()).into()
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("TETHERKIT_LOG", "warn"))
        .format_timestamp(None)
        .init();

    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(EXIT_ERROR)
            } else {
                ExitCode::SUCCESS
            };
        }
    };

    let result = match cli.command {
        Command::Optimize(args) => cmd_optimize(args),
        Command::FitDrag(args) => cmd_fit_drag(args),
        Command::CalibratePitch(args) => cmd_calibrate_pitch(args),
        Command::Equilibrium(args) => cmd_equilibrium(args),
        Command::CompareMotors(args) => cmd_compare_motors(args),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            let code = match e.downcast_ref::<tetherkit::Error>() {
                Some(tetherkit::Error::Identifiability(_)) => EXIT_NOT_IDENTIFIABLE,
                Some(tetherkit::Error::NoEquilibrium { .. }) => EXIT_INFEASIBLE,
                _ => EXIT_ERROR,
            };
            if e.is::<UsageError>() {
                eprintln!("error: {e}");
            } else {
                eprintln!("error: {e:#}");
            }
            if code == EXIT_NOT_IDENTIFIABLE {
                eprintln!(
                    "hint: log flights that move both forwards and backwards with varying pitch, \
                     e.g. repeated back-and-forth passes"
                );
            }
            ExitCode::from(code)
        }
    }
}

/// Writes `text` to `out`, or stdout when absent.
fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(path) => fs::write(path, text).with_context(|| format!("writing {}", path.display())),
        None => {
            std::io::stdout().write_all(text.as_bytes())?;
            Ok(())
        }
    }
}

/// Human-readable lines go to stdout when the JSON goes to a file, and to
/// stderr otherwise so stdout stays machine-readable.
fn say(json_to_stdout: bool, line: &str) {
    if json_to_stdout {
        eprintln!("{line}");
    } else {
        println!("{line}");
    }
}

fn load_system(path: &Path) -> Result<ResolvedSystem> {
    info!("loading configuration {}", path.display());
    Ok(SystemConfig::load(path)?)
}

fn options(system: &ResolvedSystem, allow_below_headroom: bool) -> OptimizeOptions {
    OptimizeOptions {
        allow_below_headroom: allow_below_headroom || system.options.allow_below_headroom,
        ..system.options
    }
}

fn apply_speed(system: &mut ResolvedSystem, speed_ms: Option<f64>) -> Result<()> {
    if let Some(v) = speed_ms {
        if !(v >= 0.0) {
            return Err(usage(format!("--speed-ms must be non-negative, got {v}")));
        }
        system.cruise_speed = v;
    }
    if system.cruise_speed > 0.0 && system.drag_model.is_none() {
        warn!("cruise speed set but no drag model configured; optimizing for hover only");
    }
    Ok(())
}

fn fmt_opt(x: Option<f64>, digits: usize, unit: &str) -> String {
    x.map_or_else(|| "n/a".to_string(), |v| format!("{v:.digits$} {unit}"))
}

fn summarize_report(report: &CableReport, json_to_stdout: bool) {
    say(
        json_to_stdout,
        &format!(
            "optimal area:    {}",
            fmt_opt(report.optimal_area, 3, "mm²")
        ),
    );
    say(
        json_to_stdout,
        &format!(
            "  headroom area: {}",
            fmt_opt(report.headroom_area, 3, "mm²")
        ),
    );
    say(
        json_to_stdout,
        &format!(
            "  min-power:     {}",
            fmt_opt(report.min_power_area, 3, "mm²")
        ),
    );
    say(
        json_to_stdout,
        &format!("tether mass:     {}", fmt_opt(report.tether_mass, 3, "kg")),
    );
    say(
        json_to_stdout,
        &format!("hover power:     {}", fmt_opt(report.hover_power, 1, "W")),
    );
    if report.cruise_speed > 0.0 {
        say(
            json_to_stdout,
            &format!(
                "cruise power:    {} at {:.2} m/s",
                fmt_opt(report.cruise_power, 1, "W"),
                report.cruise_speed
            ),
        );
    }
    say(
        json_to_stdout,
        &format!("feasible:        {}", report.feasible),
    );
    for d in &report.diagnostics {
        warn!("{d}");
    }
}

fn write_plot(path: &Path, report: &CableReport) -> Result<()> {
    let file = fs::File::create(path).with_context(|| format!("creating {}", path.display()))?;
    write_curves_csv(std::io::BufWriter::new(file), &report.curves)?;
    Ok(())
}

fn cmd_optimize(args: OptimizeArgs) -> Result<u8> {
    let mut system = load_system(&args.config)?;
    apply_speed(&mut system, args.speed_ms)?;
    let cruise = system.cruise();
    let report = optimize_cable(
        &system.drone,
        &system.tether,
        cruise.as_ref(),
        &options(&system, args.allow_below_headroom),
    )?;
    emit(args.out.as_deref(), &to_json(&report)?)?;
    if let Some(plot) = &args.plot_csv {
        write_plot(plot, &report)?;
    }
    summarize_report(&report, args.out.is_none());
    Ok(if report.feasible { 0 } else { EXIT_INFEASIBLE })
}

fn cmd_fit_drag(args: FitDragArgs) -> Result<u8> {
    let flights: Vec<&PathBuf> = args
        .flights
        .iter()
        .filter(|p| !p.as_os_str().is_empty())
        .collect();
    if flights.is_empty() {
        return Err(usage(
            "--flights needs at least one drag flight; the hover flight alone cannot identify drag",
        ));
    }
    if !(args.mass > 0.0) {
        return Err(usage(format!("--mass must be positive, got {}", args.mass)));
    }
    if !(args.air_density > 0.0) {
        return Err(usage(format!(
            "--air-density must be positive, got {}",
            args.air_density
        )));
    }
    let offset = match &args.hover_flight {
        Some(path) => pitch_offset(&load_flight(path)?)?,
        None => 0.0,
    };
    debug!("pitch offset {offset} rad");

    let samples = flights
        .iter()
        .map(|path| {
            let log = load_flight(path)?;
            let samples = compute_drag_samples(&log, args.mass, offset)?;
            info!("{}: {} drag samples", path.display(), samples.len());
            Ok(samples)
        })
        .collect::<Result<Vec<_>>>()?;

    let options = FitOptions {
        fix_linear_term: args.no_linear_term,
        ..FitOptions::default()
    };
    let report = drag::fit(&samples, args.air_density, None, &options)?;
    if !report.converged {
        warn!(
            "fit stopped after {} iterations without meeting the tolerances",
            report.iterations
        );
    }

    let json_to_stdout = args.out.is_none();
    let p = &report.params;
    let err = |name: &str| {
        p.relative_std_errors
            .get(name)
            .map_or_else(String::new, |&r| percent(r))
    };
    say(
        json_to_stdout,
        &format!("A_front = {:.4e} m² {}", p.front_area, err("front_area")),
    );
    say(
        json_to_stdout,
        &format!("A_top   = {:.4e} m² {}", p.top_area, err("top_area")),
    );
    if !args.no_linear_term {
        say(
            json_to_stdout,
            &format!("j       = {:.4} m/s {}", p.linear_term, err("linear_term")),
        );
    }
    for (k, w) in p.wind_offsets.iter().enumerate() {
        say(
            json_to_stdout,
            &format!(
                "w_{k}     = {w:.4} m/s {}",
                err(&format!("wind_offset_{k}"))
            ),
        );
    }
    say(
        json_to_stdout,
        &format!(
            "residual RMS {:.4} N over {} samples",
            report.residual_rms, report.sample_count
        ),
    );
    emit(
        args.out.as_deref(),
        &to_json(&DragModelFile::from_fit(&report))?,
    )?;
    Ok(0)
}

fn cmd_calibrate_pitch(args: CalibrateArgs) -> Result<u8> {
    let log = load_flight(&args.hover_flight)?;
    let offset = pitch_offset(&log)?;
    say(
        args.out.is_none(),
        &format!(
            "pitch offset {offset:.6} rad ({:.4}°) from {} samples",
            offset.to_degrees(),
            log.len()
        ),
    );
    let out = json!({
        "pitch_offset_rad": offset,
        "pitch_offset_deg": offset.to_degrees(),
        "sample_count": log.len(),
    });
    emit(args.out.as_deref(), &to_json(&out)?)?;
    Ok(0)
}

fn cmd_equilibrium(args: EquilibriumArgs) -> Result<u8> {
    if !(args.speed_ms >= 0.0) {
        return Err(usage(format!(
            "--speed-ms must be non-negative, got {}",
            args.speed_ms
        )));
    }
    let mut system = load_system(&args.config)?;
    let drag_model: DragModelParams = match &args.drag_model {
        Some(path) => DragModelFile::load(path)?.to_params(),
        None => system.drag_model.clone().ok_or_else(|| {
            usage("no drag model: pass --drag-model or set aero.drag_model in the configuration")
        })?,
    };
    let area = match args.area_mm2.or(system.conductor_area) {
        Some(a) if a > 0.0 => a,
        Some(a) => return Err(usage(format!("conductor area must be positive, got {a}"))),
        None => {
            system.drag_model = Some(drag_model.clone());
            let report = optimize_cable(
                &system.drone,
                &system.tether,
                system.cruise().as_ref(),
                &system.options,
            )?;
            report
                .optimal_area
                .context("no conductor area given and the optimizer found none")?
        }
    };
    let tether = system.tether.with_area(area);
    let cruise = system.cruise_at(args.speed_ms, drag_model);
    let eq = solve_equilibrium_pitch(
        &cruise.drag_model,
        &tether,
        &cruise.tether_drag,
        system.drone.drone_mass,
        args.speed_ms,
    )?;
    let point = operating_point(&system.drone, &tether, Some(&cruise))?;
    let p_total = point.power.filter(|b| b.feasible).map(|b| b.p_total);

    let json_to_stdout = args.out.is_none();
    say(
        json_to_stdout,
        &format!("speed        {:.3} m/s, area {area:.3} mm²", args.speed_ms),
    );
    say(
        json_to_stdout,
        &format!("pitch        {:.3}°", eq.pitch.to_degrees()),
    );
    say(
        json_to_stdout,
        &format!("drone drag   {:.3} N", eq.drone_drag),
    );
    say(
        json_to_stdout,
        &format!("tether drag  {:.3} N", eq.tether_drag),
    );
    say(
        json_to_stdout,
        &format!("T_necessary  {:.4} kgf per motor", point.t_necessary),
    );
    say(
        json_to_stdout,
        &format!("P_total      {}", fmt_opt(p_total, 1, "W")),
    );
    let out = json!({
        "speed_ms": args.speed_ms,
        "conductor_area_mm2": area,
        "pitch_rad": eq.pitch,
        "pitch_deg": eq.pitch.to_degrees(),
        "drone_drag_n": eq.drone_drag,
        "tether_drag_n": eq.tether_drag,
        "residual_n": eq.residual,
        "t_necessary_kgf": point.t_necessary,
        "t_available_kgf": point.t_available,
        "p_total_w": p_total,
        "feasible": point.feasible,
    });
    emit(args.out.as_deref(), &to_json(&out)?)?;
    Ok(if point.feasible { 0 } else { EXIT_INFEASIBLE })
}

fn motor_files(dir: &Path) -> Result<Vec<PathBuf>> {
    let entries =
        fs::read_dir(dir).with_context(|| format!("reading motor directory {}", dir.display()))?;
    let mut files = Vec::new();
    for entry in entries {
        let path = entry?.path();
        if path.is_file()
            && path
                .extension()
                .is_some_and(|e| e.eq_ignore_ascii_case("csv"))
        {
            files.push(path);
        }
    }
    files.sort();
    Ok(files)
}

fn cmd_compare_motors(args: CompareArgs) -> Result<u8> {
    let mut system = load_system(&args.config)?;
    apply_speed(&mut system, args.speed_ms)?;
    let files = motor_files(&args.motor_dir)?;
    if files.is_empty() {
        return Err(usage(format!(
            "no motor CSVs in {}",
            args.motor_dir.display()
        )));
    }
    let motors = files
        .iter()
        .map(|path| {
            let name = path
                .file_stem()
                .map_or_else(String::new, |s| s.to_string_lossy().into_owned());
            (name, MotorCurve::load(path))
        })
        .collect();
    let cruise = system.cruise();
    let comparison = compare_motors(
        motors,
        &system.drone,
        &system.tether,
        cruise.as_ref(),
        &options(&system, args.allow_below_headroom),
    );

    emit(args.out.as_deref(), &to_json(&comparison)?)?;
    if let Some(dir) = &args.plot_csv {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        for entry in &comparison.entries {
            if let Some(report) = &entry.report {
                write_plot(&dir.join(format!("{}.csv", entry.motor)), report)?;
            }
        }
    }

    let json_to_stdout = args.out.is_none();
    for entry in &comparison.entries {
        let line = match (&entry.report, &entry.error) {
            (_, Some(error)) => format!("{:<32} load error: {error}", entry.motor),
            (Some(r), None) => format!(
                "{:<32} area {} hover {} cruise {} {}",
                entry.motor,
                fmt_opt(r.optimal_area, 3, "mm²"),
                fmt_opt(r.hover_power, 1, "W"),
                fmt_opt(r.cruise_power, 1, "W"),
                if entry.feasible {
                    "feasible"
                } else {
                    "INFEASIBLE"
                }
            ),
            (None, None) => unreachable!("entries carry a report or an error"),
        };
        say(json_to_stdout, &line);
    }
    if comparison.entries.iter().any(|e| e.feasible) {
        Ok(0)
    } else {
        warn!("no motor yields a feasible system");
        Ok(EXIT_INFEASIBLE)
    }
}
