//! `copter-range` command-line front end.
//!
//! Exit codes: 0 success, 2 input or parse error, 3 infeasible model
//! condition, 4 fit failure. Every nonzero exit prints a diagnostic to stderr.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use copter_range::battery::{
    effective_capacity, normalize_power, relative_capacity_cubic, simulate_discharge, ConstantPower, DischargeTrace,
    PiecewiseConstantPower, PowerProfile, Termination, DEFAULT_DT,
};
use copter_range::config::{
    format_battery_params, format_motor_coeffs, load_battery_params, load_motor_coeffs, load_pack, load_vehicle,
};
use copter_range::estimator::{estimate, EstimateOptions, FullBatteryOptions, MotorModel, REPORT_COLUMNS};
use copter_range::identification::{
    fit_battery_dynamics, fit_battery_resistance, fit_motor, DischargeLog, DynamicsFitOptions, ThrustLog,
};
use copter_range::model::{
    builtin_battery_params, builtin_empirical_coeffs, BatteryPack, BatteryParams, DEFAULT_CUTOFF_VOLTAGE,
};
use copter_range::Error;

#[derive(Parser)]
#[command(
    name = "copter-range",
    version,
    about = "Range, endurance and optimal speed of multirotors"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the eight-step estimate for a vehicle spec file and print each step.
    Estimate(EstimateArgs),
    /// Simulate a discharge at constant power or under a power profile.
    Discharge(DischargeArgs),
    /// Effective capacity over a grid of constant pack powers.
    CapacitySweep(SweepArgs),
    /// Fit drag and motor power coefficients to a thrust-stand log.
    FitMotor(FitMotorArgs),
    /// Fit battery model coefficients to a directory of discharge logs.
    FitBattery(FitBatteryArgs),
}

#[derive(Args)]
struct PackArgs {
    /// Pack designator such as 4S1P or 6S.
    #[arg(long)]
    battery: String,
    /// Rated pack capacity, Ah.
    #[arg(long)]
    capacity_ah: f64,
    /// Per-cell cutoff voltage, V.
    #[arg(long, default_value_t = DEFAULT_CUTOFF_VOLTAGE)]
    cutoff_v_per_cell: f64,
}

impl PackArgs {
    fn pack(&self) -> Result<BatteryPack<f64>, Error> {
        BatteryPack::from_designator(&self.battery, self.capacity_ah)?.with_cutoff(self.cutoff_v_per_cell)
    }
}

#[derive(Args)]
struct EstimateArgs {
    /// Vehicle spec file (key/value).
    spec: PathBuf,
    /// Air density override, kg/m³.
    #[arg(long)]
    rho: Option<f64>,
    /// Use this mechanical hover power (W) instead of the momentum-theory value.
    #[arg(long, value_name = "WATTS")]
    inject_hover_power: Option<f64>,
    /// Also simulate both cruise points to cutoff with the full battery model.
    #[arg(long)]
    full_battery: bool,
    /// Fitted motor coefficients (from fit-motor) replacing the constant efficiency.
    #[arg(long)]
    motor_coeffs: Option<PathBuf>,
    /// Battery coefficients (from fit-battery) for the full battery model.
    #[arg(long)]
    battery_params: Option<PathBuf>,
    /// Integration step for the full battery model, s.
    #[arg(long, default_value_t = DEFAULT_DT)]
    dt: f64,
    /// Write the report as a CSV header and row.
    #[arg(long)]
    output: Option<PathBuf>,
    /// Write the report as key/value text.
    #[arg(long)]
    output_kv: Option<PathBuf>,
}

#[derive(Args)]
struct DischargeArgs {
    #[command(flatten)]
    pack: PackArgs,
    /// Constant pack power, W.
    #[arg(long, conflicts_with = "profile", required_unless_present = "profile")]
    power_w: Option<f64>,
    /// Power profile CSV (time_s,power_w breakpoints).
    #[arg(long)]
    profile: Option<PathBuf>,
    /// Longest simulated time for a constant power, s.
    #[arg(long, default_value_t = 36_000.0)]
    horizon_s: f64,
    /// Integration step, s.
    #[arg(long, default_value_t = DEFAULT_DT)]
    dt: f64,
    /// Battery coefficients (from fit-battery) replacing the built-in set.
    #[arg(long)]
    battery_params: Option<PathBuf>,
    /// Write the (thinned) trace CSV here.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    pack: PackArgs,
    /// Comma-separated pack powers, W.
    #[arg(long, value_delimiter = ',', conflicts_with_all = ["from_w", "to_w", "steps"])]
    powers_w: Vec<f64>,
    /// First power of an evenly spaced grid, W.
    #[arg(long, requires_all = ["to_w", "steps"])]
    from_w: Option<f64>,
    /// Last power of the grid, W.
    #[arg(long)]
    to_w: Option<f64>,
    /// Number of grid points.
    #[arg(long)]
    steps: Option<usize>,
    /// Longest simulated time per grid point, s.
    #[arg(long, default_value_t = 36_000.0)]
    horizon_s: f64,
    /// Integration step, s.
    #[arg(long, default_value_t = DEFAULT_DT)]
    dt: f64,
    /// Battery coefficients (from fit-battery) replacing the built-in set.
    #[arg(long)]
    battery_params: Option<PathBuf>,
    /// Write the sweep CSV here instead of standard output.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct FitMotorArgs {
    /// Thrust log CSV (omega_rad_s,thrust_n,torque_nm,power_w).
    log: PathBuf,
    /// Write the coefficient file here.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct FitBatteryArgs {
    /// Directory of discharge log CSVs (time_s,power_w,voltage_v). A log
    /// `name.csv` may carry its own pack in `name.toml` next to it.
    log_dir: PathBuf,
    /// Pack sidecar applied to logs without their own.
    #[arg(long, conflicts_with_all = ["battery", "capacity_ah"])]
    pack: Option<PathBuf>,
    /// Pack designator applied to logs without their own sidecar.
    #[arg(long, requires = "capacity_ah")]
    battery: Option<String>,
    /// Rated pack capacity for --battery, Ah.
    #[arg(long)]
    capacity_ah: Option<f64>,
    /// Integration step, s.
    #[arg(long, default_value_t = DEFAULT_DT)]
    dt: f64,
    /// Write the coefficient file here.
    #[arg(long)]
    output: Option<PathBuf>,
}

/// A failed command: exit code plus diagnostic.
struct Failure {
    code: u8,
    message: String,
}

const EXIT_INPUT: u8 = 2;
const EXIT_INFEASIBLE: u8 = 3;
const EXIT_FIT: u8 = 4;

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::InfeasiblePower { .. } | Error::Domain { .. } | Error::UndefinedCapacity(_) => EXIT_INFEASIBLE,
            Error::Fit(_) | Error::RankDeficient(_) | Error::NonFiniteObjective { .. } => EXIT_FIT,
            Error::InvalidParameter { .. } | Error::BadDesignator(_) | Error::Parse(_) | Error::Io { .. } => EXIT_INPUT,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

fn input_error(message: impl Into<String>) -> Failure {
    Failure {
        code: EXIT_INPUT,
        message: message.into(),
    }
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<(), Failure> {
    fs::write(path, bytes).map_err(|e| input_error(format!("cannot write {}: {e}", path.display())))
}

fn battery_params(path: &Option<PathBuf>) -> Result<BatteryParams<f64>, Failure> {
    Ok(match path {
        Some(p) => load_battery_params(p)?,
        None => builtin_battery_params(),
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Estimate(a) => cmd_estimate(a),
        Command::Discharge(a) => cmd_discharge(a),
        Command::CapacitySweep(a) => cmd_capacity_sweep(a),
        Command::FitMotor(a) => cmd_fit_motor(a),
        Command::FitBattery(a) => cmd_fit_battery(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn cmd_estimate(a: EstimateArgs) -> Result<(), Failure> {
    let cfg = load_vehicle::<f64>(&a.spec)?;
    let env = match a.rho {
        Some(rho) => cfg.env.with_air_density(rho)?,
        None => cfg.env,
    };
    let motor = match &a.motor_coeffs {
        Some(p) => MotorModel::Fitted(load_motor_coeffs(p)?),
        None => MotorModel::ConstantEfficiency,
    };
    let options = EstimateOptions {
        hover_power: a.inject_hover_power,
        motor,
        full_battery: a.full_battery.then(|| FullBatteryOptions {
            dt: a.dt,
            ..FullBatteryOptions::default()
        }),
    };
    let params = battery_params(&a.battery_params)?;
    let report = estimate(&cfg.spec, &env, &builtin_empirical_coeffs(), &params, &options)?;
    for line in report.step_trace(&cfg.spec) {
        println!("{line}");
    }
    if let Some(path) = &a.output {
        let mut w = csv::Writer::from_writer(Vec::new());
        let csv_err = |e: csv::Error| input_error(e.to_string());
        w.write_record(REPORT_COLUMNS).map_err(csv_err)?;
        w.write_record(report.csv_row()).map_err(csv_err)?;
        let bytes = w.into_inner().map_err(|e| input_error(e.to_string()))?;
        write_file(path, &bytes)?;
    }
    if let Some(path) = &a.output_kv {
        write_file(path, report.to_key_value().as_bytes())?;
    }
    Ok(())
}

fn run_discharge<P: PowerProfile<f64> + ?Sized>(
    pack: &BatteryPack<f64>,
    params: &BatteryParams<f64>,
    profile: &P,
    dt: f64,
) -> Result<DischargeTrace<f64>, Failure> {
    Ok(simulate_discharge(pack, params, profile, dt, pack.cutoff_voltage())?)
}

fn cmd_discharge(a: DischargeArgs) -> Result<(), Failure> {
    let pack = a.pack.pack()?;
    let params = battery_params(&a.battery_params)?;
    let trace = match (&a.profile, a.power_w) {
        (Some(path), _) => {
            let file = fs::File::open(path).map_err(|e| input_error(format!("cannot open {}: {e}", path.display())))?;
            let profile = PiecewiseConstantPower::read_csv(file)?;
            run_discharge(&pack, &params, &profile, a.dt)?
        }
        (None, Some(p)) => run_discharge(&pack, &params, &ConstantPower::new(p, a.horizon_s)?, a.dt)?,
        (None, None) => return Err(input_error("either --power-w or --profile is required")),
    };
    if let Some(path) = &a.output {
        let mut bytes = Vec::new();
        trace.write_csv(&mut bytes)?;
        write_file(path, &bytes)?;
    }
    let end = trace.end_time();
    match trace.last() {
        Some(s) => println!(
            "end: t = {end} s, pack voltage = {:.4} V ({})",
            s.u_pack,
            trace.termination.label()
        ),
        None => println!("end: t = {end} s ({})", trace.termination.label()),
    }
    match effective_capacity(&trace, &pack) {
        Ok(c) => println!(
            "effective capacity: {:.4} Wh, {:.4} Ah at nominal voltage, kappa = {:.4}",
            c.energy_wh, c.charge_ah, c.kappa
        ),
        Err(_) => println!("effective capacity: undefined (cutoff not reached)"),
    }
    if let Termination::InfeasiblePower { time, limit } = trace.termination {
        let written = a
            .output
            .as_ref()
            .map(|p| format!("; partial trace written to {}", p.display()));
        return Err(Failure {
            code: EXIT_INFEASIBLE,
            message: format!(
                "infeasible power at t = {time} s: {} W/Ah requested, at most {} W/Ah deliverable{}",
                limit.requested,
                limit.max_deliverable,
                written.unwrap_or_default()
            ),
        });
    }
    Ok(())
}

const SWEEP_HEADER: [&str; 6] = [
    "pack_power_w",
    "p_cell_w_per_ah",
    "energy_wh",
    "kappa_full",
    "kappa_cubic",
    "status",
];

fn cmd_capacity_sweep(a: SweepArgs) -> Result<(), Failure> {
    let pack = a.pack.pack()?;
    let params = battery_params(&a.battery_params)?;
    let coeffs = builtin_empirical_coeffs();
    let grid = match (a.from_w, a.to_w, a.steps) {
        (Some(lo), Some(hi), Some(n)) => copter_range::fixtures::linspace(lo, hi, n),
        _ => a.powers_w.clone(),
    };
    if grid.is_empty() {
        return Err(input_error(
            "empty power grid; give --powers-w or --from-w/--to-w/--steps",
        ));
    }
    let mut w = csv::Writer::from_writer(Vec::new());
    let csv_err = |e: csv::Error| input_error(e.to_string());
    w.write_record(SWEEP_HEADER).map_err(csv_err)?;
    for &p in &grid {
        let p_cell = normalize_power(p, &pack);
        let cubic = relative_capacity_cubic(&coeffs, p_cell).kappa;
        let row = match ConstantPower::new(p, a.horizon_s)
            .and_then(|profile| simulate_discharge(&pack, &params, &profile, a.dt, pack.cutoff_voltage()))
        {
            Err(e) => vec![String::new(), String::new(), format!("error: {e}")],
            Ok(trace) => match (&trace.termination, effective_capacity(&trace, &pack)) {
                (_, Ok(c)) => vec![format!("{:?}", c.energy_wh), format!("{:?}", c.kappa), "ok".into()],
                (Termination::InfeasiblePower { .. }, _) => vec![String::new(), String::new(), "infeasible".into()],
                _ => vec![String::new(), String::new(), "no_cutoff".into()],
            },
        };
        let record = [
            format!("{p:?}"),
            format!("{p_cell:?}"),
            row[0].clone(),
            row[1].clone(),
            format!("{cubic:?}"),
            row[2].clone(),
        ];
        w.write_record(&record).map_err(csv_err)?;
    }
    let bytes = w.into_inner().map_err(|e| input_error(e.to_string()))?;
    match &a.output {
        Some(path) => write_file(path, &bytes),
        None => io::stdout().write_all(&bytes).map_err(|e| input_error(e.to_string())),
    }
}

/// Coefficient file with the fit summary as leading comments.
fn coefficient_file(body: &str, rmse: f64, unit: &str, iterations: usize, warnings: &[String]) -> String {
    let mut s = format!("# rmse = {rmse:?} {unit}\n# iterations = {iterations}\n");
    for w in warnings {
        s.push_str(&format!("# warning: {w}\n"));
    }
    s.push_str(body);
    s
}

fn print_fit_summary(rmse: f64, unit: &str, warnings: &[String]) {
    println!("rmse: {rmse:.6e} {unit}");
    for w in warnings {
        println!("warning: {w}");
    }
}

fn cmd_fit_motor(a: FitMotorArgs) -> Result<(), Failure> {
    let file = fs::File::open(&a.log).map_err(|e| input_error(format!("cannot open {}: {e}", a.log.display())))?;
    let log = ThrustLog::<f64>::read_csv(file).map_err(|e| input_error(format!("{}: {e}", a.log.display())))?;
    let fit = fit_motor(&log)?;
    let body = format_motor_coeffs(&fit.params);
    print!("{body}");
    print_fit_summary(fit.rmse, "W", &fit.warnings);
    if let Some(path) = &a.output {
        write_file(
            path,
            coefficient_file(&body, fit.rmse, "W", fit.iterations, &fit.warnings).as_bytes(),
        )?;
    }
    Ok(())
}

fn cmd_fit_battery(a: FitBatteryArgs) -> Result<(), Failure> {
    let default_pack = match (&a.pack, &a.battery, a.capacity_ah) {
        (Some(p), _, _) => Some(load_pack::<f64>(p)?),
        (None, Some(b), Some(c)) => Some(BatteryPack::from_designator(b, c)?),
        _ => None,
    };
    let entries =
        fs::read_dir(&a.log_dir).map_err(|e| input_error(format!("cannot read {}: {e}", a.log_dir.display())))?;
    let mut paths: Vec<PathBuf> = entries
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "csv"))
        .collect();
    paths.sort();
    if paths.is_empty() {
        return Err(input_error(format!("no .csv logs in {}", a.log_dir.display())));
    }
    let mut logs = Vec::with_capacity(paths.len());
    for path in &paths {
        let sidecar = path.with_extension("toml");
        let pack = if sidecar.is_file() {
            load_pack(&sidecar)?
        } else {
            default_pack.ok_or_else(|| {
                input_error(format!(
                    "{}: no pack sidecar and no --pack/--battery given",
                    path.display()
                ))
            })?
        };
        let file = fs::File::open(path).map_err(|e| input_error(format!("cannot open {}: {e}", path.display())))?;
        let log = DischargeLog::read_csv(file, pack).map_err(|e| input_error(format!("{}: {e}", path.display())))?;
        logs.push(log);
    }
    let resistance = fit_battery_resistance(&logs)?;
    let options = DynamicsFitOptions {
        dt: a.dt,
        ..DynamicsFitOptions::default()
    };
    let fit = fit_battery_dynamics(&logs, &resistance.model, &options).map_err(|e| match e {
        // A model that cannot be evaluated during the fit is a fit failure,
        // not a property of the input files.
        Error::InfeasiblePower { .. } | Error::Domain { .. } => Failure {
            code: EXIT_FIT,
            message: e.to_string(),
        },
        other => other.into(),
    })?;
    let mut warnings = resistance.warnings.clone();
    warnings.extend(fit.warnings.iter().cloned());
    let body = format_battery_params(&fit.params);
    println!("{} logs, {} load steps", logs.len(), resistance.steps.len());
    print!("{body}");
    print_fit_summary(fit.rmse, "V per cell", &warnings);
    if let Some(path) = &a.output {
        let text = coefficient_file(&body, fit.rmse, "V per cell", fit.iterations, &warnings);
        write_file(path, text.as_bytes())?;
    }
    Ok(())
}
