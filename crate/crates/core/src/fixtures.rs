//! Checked-in fixtures and deterministic synthetic data generators.
//!
//! Fixture files live under `fixtures/` in this crate and are listed in
//! `fixtures/manifest.toml` together with their kind and provenance.

use std::fs;
use std::path::{Path, PathBuf};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::Deserialize;

use crate::battery::{simulate_discharge, PowerProfile, DEFAULT_DT};
use crate::config::{self, VehicleConfig};
use crate::error::{Error, Result};
use crate::identification::{DischargeLog, DischargeRow, ThrustLog, ThrustRow};
use crate::model::{BatteryPack, BatteryParams};
use crate::motor::MotorPropCoeffs;
use crate::scalar::{lit, to_f64, Scalar};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FixtureKind {
    VehicleSpec,
    ThrustLog,
    DischargeLog,
    ExpectedReport,
}

/// Where a fixture's numbers come from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Provenance {
    /// Transcribed from a published table or figure.
    Paper,
    /// Computed from other values by a stated procedure.
    Derived,
    /// Follows directly from the definitions.
    Trivial,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Fixture {
    pub name: String,
    pub kind: FixtureKind,
    /// Relative to the fixture directory.
    pub path: PathBuf,
    pub provenance: Provenance,
    /// Table/figure for published fixtures, generating procedure for derived ones.
    pub source: String,
    /// Hex SHA-256 of the file contents, for transcriptions that must not drift.
    #[serde(default)]
    pub sha256: Option<String>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct Manifest {
    fixture: Vec<Fixture>,
}

pub fn fixture_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures")
}

/// Parses `fixtures/manifest.toml`.
pub fn manifest() -> Result<Vec<Fixture>> {
    let path = fixture_dir().join("manifest.toml");
    let text = fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
    let m: Manifest = toml::from_str(&text).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
    Ok(m.fixture)
}

pub fn fixture(name: &str) -> Result<Fixture> {
    manifest()?
        .into_iter()
        .find(|f| f.name == name)
        .ok_or_else(|| Error::Parse(format!("no fixture named {name:?}")))
}

pub fn fixture_path(name: &str) -> Result<PathBuf> {
    Ok(fixture_dir().join(fixture(name)?.path))
}

/// The Mavic 2 sample vehicle.
pub fn mavic2<T: Scalar>() -> Result<VehicleConfig<T>> {
    config::load_vehicle(&fixture_path("mavic2")?)
}

/// Efficiency points of the 2400 KV motor with a 5.1'' propeller, expanded to
/// a thrust-stand log with nominal drag and thrust coefficients.
pub fn thrust_log_2400kv_5p1in<T: Scalar>() -> Result<ThrustLog<T>> {
    let path = fixture_path("thrust_2400kv_5p1in")?;
    let file = fs::File::open(&path).map_err(|e| Error::io(&path, e))?;
    ThrustLog::read_csv(file)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SyntheticLogOptions {
    /// Spacing of logged rows, s. Rounded to a whole number of integration steps.
    pub sample_period: f64,
    pub dt: f64,
    pub seed: u64,
    /// Per-cell cutoff at which the synthetic discharge stops, V.
    pub cutoff_per_cell: f64,
}

impl Default for SyntheticLogOptions {
    fn default() -> Self {
        Self {
            sample_period: 0.1,
            dt: DEFAULT_DT,
            seed: 0x5eed,
            cutoff_per_cell: 3.5,
        }
    }
}

/// A discharge log produced by the cell model itself, with optional
/// zero-mean Gaussian noise of `noise_mv` millivolts on every cell voltage.
///
/// The same seed always yields the same log.
pub fn generate_synthetic_discharge<T: Scalar, P: PowerProfile<T> + ?Sized>(
    pack: &BatteryPack<T>,
    params: &BatteryParams<T>,
    profile: &P,
    noise_mv: f64,
    opts: &SyntheticLogOptions,
) -> Result<DischargeLog<T>> {
    if !(noise_mv >= 0.0) {
        return Err(Error::invalid("noise_mv", "must be >= 0"));
    }
    let trace = simulate_discharge(pack, params, profile, lit(opts.dt), lit(opts.cutoff_per_cell))?;
    trace.check_feasible()?;
    let every = ((opts.sample_period / opts.dt).round() as usize).max(1);
    let n = trace.samples.len();
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let noise = Normal::new(0.0, noise_mv / 1000.0).map_err(|e| Error::invalid("noise_mv", e.to_string()))?;
    let series = pack.series_count() as f64;
    let rows = trace
        .samples
        .iter()
        .enumerate()
        .filter(|(i, _)| i % every == 0 || *i + 1 == n)
        .map(|(_, s)| {
            let eps = if noise_mv > 0.0 { noise.sample(&mut rng) } else { 0.0 };
            DischargeRow {
                time: s.time,
                pack_power: profile.power_at(s.time),
                pack_voltage: s.u_pack + lit(series * eps),
            }
        })
        .collect();
    DischargeLog::new(*pack, rows)
}

/// Thrust-stand rows generated from known coefficients, with optional
/// multiplicative Gaussian noise (`noise_rel` = 0.01 for 1 %) on the power.
pub fn generate_synthetic_thrust_log<T: Scalar>(
    coeffs: &MotorPropCoeffs<T>,
    speeds: &[T],
    thrust_coeff: T,
    noise_rel: f64,
    seed: u64,
) -> Result<ThrustLog<T>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let noise = Normal::new(0.0, noise_rel).map_err(|e| Error::invalid("noise_rel", e.to_string()))?;
    let rows = speeds
        .iter()
        .map(|&w| {
            let eps = if noise_rel > 0.0 { noise.sample(&mut rng) } else { 0.0 };
            ThrustRow {
                omega: w,
                thrust: thrust_coeff * w * w,
                torque: coeffs.c_d() * w * w,
                electrical_power: coeffs.electrical_power_at(w) * lit(1.0 + eps),
            }
        })
        .collect();
    ThrustLog::new(rows)
}

/// Evenly spaced values from `lo` to `hi` inclusive.
pub fn linspace<T: Scalar>(lo: T, hi: T, n: usize) -> Vec<T> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => (0..n)
            .map(|i| lo + (hi - lo) * lit(i as f64 / (n - 1) as f64))
            .collect(),
    }
}

/// Values of an expected-report fixture, keyed by report field name.
pub fn expected_values(name: &str) -> Result<Vec<(String, f64, f64)>> {
    #[derive(Deserialize)]
    #[serde(deny_unknown_fields)]
    struct Expected {
        value: f64,
        tolerance: f64,
    }
    let path = fixture_path(name)?;
    let text = fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
    let table: toml::Table = toml::from_str(&text).map_err(|e| Error::Parse(e.to_string()))?;
    let mut out = Vec::new();
    for (key, v) in table {
        let e: Expected = v.try_into().map_err(|e| Error::Parse(format!("{key}: {e}")))?;
        out.push((key, e.value, e.tolerance));
    }
    Ok(out)
}

#[doc(hidden)]
pub fn describe<T: Scalar>(log: &DischargeLog<T>) -> String {
    format!(
        "{} rows over {} s, {} steps",
        log.rows().len(),
        to_f64(log.elapsed(log.rows().len() - 1)),
        log.step_indices().len()
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::battery::{ConstantPower, PiecewiseConstantPower};
    use crate::identification::replay_log;
    use crate::model::builtin_battery_params;

    #[test]
    fn manifest_entries_exist_and_carry_sources() {
        let m = manifest().unwrap();
        assert!(m.len() >= 3);
        for f in &m {
            assert!(fixture_dir().join(&f.path).is_file(), "{} missing", f.name);
            assert!(!f.source.trim().is_empty());
        }
    }

    #[test]
    fn noiseless_log_replays_exactly() {
        let pack = BatteryPack::from_designator("4S1P", 1.8).unwrap();
        let params = builtin_battery_params();
        let profile = PiecewiseConstantPower::from_segments(&[(20.0, 300.0), (40.0, 150.0), (30.0, 80.0)]).unwrap();
        let log = generate_synthetic_discharge(&pack, &params, &profile, 0.0, &SyntheticLogOptions::default()).unwrap();
        let replayed = replay_log(&log, &params, DEFAULT_DT).unwrap();
        for (a, b) in replayed.iter().zip(log.cell_voltages()) {
            assert!((a - b).abs() < 1e-9, "{a} vs {b}");
        }
    }

    #[test]
    fn seeded_noise_is_deterministic() {
        let pack = BatteryPack::from_designator("4S1P", 1.8).unwrap();
        let params = builtin_battery_params();
        let profile = ConstantPower::new(150.0, 30.0).unwrap();
        let opts = SyntheticLogOptions::default();
        let a = generate_synthetic_discharge(&pack, &params, &profile, 20.0, &opts).unwrap();
        let b = generate_synthetic_discharge(&pack, &params, &profile, 20.0, &opts).unwrap();
        let (mut ba, mut bb) = (Vec::new(), Vec::new());
        a.write_csv(&mut ba).unwrap();
        b.write_csv(&mut bb).unwrap();
        assert_eq!(ba, bb);
        let other = SyntheticLogOptions { seed: 7, ..opts };
        let c = generate_synthetic_discharge(&pack, &params, &profile, 20.0, &other).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn linspace_endpoints() {
        assert_eq!(linspace(0.0, 1.0, 3), vec![0.0, 0.5, 1.0]);
        assert_eq!(linspace(2.0, 5.0, 1), vec![2.0]);
        assert!(linspace::<f64>(0.0, 1.0, 0).is_empty());
    }
}
