//! Flat key/value configuration files (TOML syntax).
//!
//! Every format rejects unknown keys, naming the offending key in the error.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::Deserialize;

use crate::error::{Error, Result};
use crate::model::{BatteryPack, BatteryParams, Environment, ResistanceModel, VehicleSpec};
use crate::motor::MotorPropCoeffs;
use crate::scalar::{lit, to_f64, Scalar};

const METERS_PER_INCH: f64 = 0.0254;

/// A vehicle plus the environment overrides its file carried.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VehicleConfig<T> {
    pub spec: VehicleSpec<T>,
    pub env: Environment<T>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct VehicleFile {
    mass_kg: f64,
    rotor_count: i64,
    propeller_diameter_in: Option<f64>,
    propeller_radius_m: Option<f64>,
    surface_area_cm2: f64,
    battery: String,
    capacity_ah: f64,
    eta_p: Option<f64>,
    eta_m: Option<f64>,
    rho: Option<f64>,
    cutoff_v_per_cell: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct PackFile {
    battery: String,
    capacity_ah: f64,
    cutoff_v_per_cell: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct BatteryParamsFile {
    a0: f64,
    a1: f64,
    a2: f64,
    a3: f64,
    b0: f64,
    b1: f64,
    b2: f64,
    r_min: f64,
    tau_rc: f64,
    k: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct MotorFile {
    c_d: f64,
    m0: f64,
    m1: f64,
    m2: f64,
}

fn parse<D: DeserializeOwned>(text: &str, what: &str) -> Result<D> {
    toml::from_str(text).map_err(|e| Error::Parse(format!("{what}: {}", e.message())))
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

fn pack_from<T: Scalar>(battery: &str, capacity_ah: f64, cutoff: Option<f64>) -> Result<BatteryPack<T>> {
    let pack = BatteryPack::from_designator(battery, lit(capacity_ah))?;
    match cutoff {
        Some(c) => pack.with_cutoff(lit(c)),
        None => Ok(pack),
    }
}

pub fn parse_vehicle<T: Scalar>(text: &str) -> Result<VehicleConfig<T>> {
    let f: VehicleFile = parse(text, "vehicle spec")?;
    let radius = match (f.propeller_radius_m, f.propeller_diameter_in) {
        (Some(r), None) => r,
        (None, Some(d)) => d * METERS_PER_INCH / 2.0,
        (Some(_), Some(_)) => {
            return Err(Error::Parse(
                "vehicle spec: give propeller_radius_m or propeller_diameter_in, not both".into(),
            ))
        }
        (None, None) => {
            return Err(Error::Parse(
                "vehicle spec: missing propeller_radius_m or propeller_diameter_in".into(),
            ))
        }
    };
    let rotor_count = u32::try_from(f.rotor_count)
        .map_err(|_| Error::invalid("rotor_count", format!("{} is not a valid rotor count", f.rotor_count)))?;
    let pack = pack_from(&f.battery, f.capacity_ah, f.cutoff_v_per_cell)?;
    let mut spec = VehicleSpec::new(lit(f.mass_kg), rotor_count, lit(radius), lit(f.surface_area_cm2), pack)?;
    if let Some(eta) = f.eta_p {
        spec = spec.with_figure_of_merit(lit(eta))?;
    }
    if let Some(eta) = f.eta_m {
        spec = spec.with_motor_efficiency(lit(eta))?;
    }
    let mut env = Environment::default();
    if let Some(rho) = f.rho {
        env = env.with_air_density(lit(rho))?;
    }
    Ok(VehicleConfig { spec, env })
}

pub fn load_vehicle<T: Scalar>(path: &Path) -> Result<VehicleConfig<T>> {
    parse_vehicle(&read(path)?).map_err(|e| prefix(path, e))
}

/// Pack sidecar: `battery`, `capacity_ah`, optional `cutoff_v_per_cell`.
pub fn parse_pack<T: Scalar>(text: &str) -> Result<BatteryPack<T>> {
    let f: PackFile = parse(text, "pack descriptor")?;
    pack_from(&f.battery, f.capacity_ah, f.cutoff_v_per_cell)
}

pub fn load_pack<T: Scalar>(path: &Path) -> Result<BatteryPack<T>> {
    parse_pack(&read(path)?).map_err(|e| prefix(path, e))
}

fn prefix(path: &Path, e: Error) -> Error {
    match e {
        Error::Parse(m) => Error::Parse(format!("{}: {m}", path.display())),
        other => other,
    }
}

// `{:?}` on f64 is the shortest round-tripping form and always reads back as
// a TOML float ("1.0", "1.7e-19").
fn kv(out: &mut String, key: &str, v: f64) {
    let _ = writeln!(out, "{key} = {v:?}");
}

pub fn format_battery_params<T: Scalar>(p: &BatteryParams<T>) -> String {
    let mut s = String::new();
    let [a0, a1, a2, a3] = p.ocv_coeffs();
    let r = p.resistance();
    for (key, v) in [
        ("a0", a0),
        ("a1", a1),
        ("a2", a2),
        ("a3", a3),
        ("b0", r.b0()),
        ("b1", r.b1()),
        ("b2", r.b2()),
        ("r_min", r.r_min()),
        ("tau_rc", p.tau_rc()),
        ("k", p.k()),
    ] {
        kv(&mut s, key, to_f64(v));
    }
    s
}

pub fn parse_battery_params<T: Scalar>(text: &str) -> Result<BatteryParams<T>> {
    let f: BatteryParamsFile = parse(text, "battery coefficients")?;
    let r = ResistanceModel::new(lit(f.b0), lit(f.b1), lit(f.b2), lit(f.r_min))?;
    BatteryParams::new([lit(f.a0), lit(f.a1), lit(f.a2), lit(f.a3)], r, lit(f.tau_rc), lit(f.k))
}

pub fn format_motor_coeffs<T: Scalar>(c: &MotorPropCoeffs<T>) -> String {
    let mut s = String::new();
    for (key, v) in [("c_d", c.c_d()), ("m0", c.m0()), ("m1", c.m1()), ("m2", c.m2())] {
        kv(&mut s, key, to_f64(v));
    }
    s
}

pub fn parse_motor_coeffs<T: Scalar>(text: &str) -> Result<MotorPropCoeffs<T>> {
    let f: MotorFile = parse(text, "motor coefficients")?;
    MotorPropCoeffs::new(lit(f.c_d), lit(f.m0), lit(f.m1), lit(f.m2))
}

pub fn load_motor_coeffs<T: Scalar>(path: &Path) -> Result<MotorPropCoeffs<T>> {
    parse_motor_coeffs(&read(path)?).map_err(|e| prefix(path, e))
}

pub fn load_battery_params<T: Scalar>(path: &Path) -> Result<BatteryParams<T>> {
    parse_battery_params(&read(path)?).map_err(|e| prefix(path, e))
}
