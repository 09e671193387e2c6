//! Bench-test log types and their CSV forms.

use std::io::{Read, Write};

use crate::battery::{advance_state, normalize_power, state_voltage, BatteryState, PowerLimit};
use crate::error::{Error, Result};
use crate::model::{BatteryPack, BatteryParams};
use crate::scalar::{cast, lit, to_f64, Scalar};

pub const THRUST_LOG_HEADER: &str = "omega_rad_s,thrust_n,torque_nm,power_w";
pub const DISCHARGE_LOG_HEADER: &str = "time_s,power_w,voltage_v";
/// Relative change in power between consecutive rows that marks a load step.
pub const STEP_THRESHOLD: f64 = 0.10;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThrustRow<T> {
    pub omega: T,
    pub thrust: T,
    pub torque: T,
    pub electrical_power: T,
}

/// Thrust-stand measurements of one motor-propeller pairing.
#[derive(Debug, Clone, PartialEq)]
pub struct ThrustLog<T> {
    rows: Vec<ThrustRow<T>>,
}

impl<T: Scalar> ThrustLog<T> {
    pub fn new(rows: Vec<ThrustRow<T>>) -> Result<Self> {
        for (i, r) in rows.iter().enumerate() {
            let finite = [r.omega, r.thrust, r.torque, r.electrical_power]
                .iter()
                .all(|v| v.is_finite());
            if !finite {
                return Err(Error::Parse(format!("thrust log row {i}: non-finite value")));
            }
            if r.omega < T::zero() {
                return Err(Error::Parse(format!("thrust log row {i}: negative speed {}", r.omega)));
            }
        }
        Ok(Self { rows })
    }

    pub fn rows(&self) -> &[ThrustRow<T>] {
        &self.rows
    }

    pub fn read_csv<R: Read>(reader: R) -> Result<Self> {
        let records = read_numeric_csv(reader, THRUST_LOG_HEADER)?;
        let rows = records
            .into_iter()
            .map(|v| ThrustRow {
                omega: lit(v[0]),
                thrust: lit(v[1]),
                torque: lit(v[2]),
                electrical_power: lit(v[3]),
            })
            .collect();
        Self::new(rows)
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        write_numeric_csv(
            out,
            THRUST_LOG_HEADER,
            self.rows
                .iter()
                .map(|r| vec![r.omega, r.thrust, r.torque, r.electrical_power]),
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DischargeRow<T> {
    pub time: T,
    pub pack_power: T,
    pub pack_voltage: T,
}

/// Battery-cycler log of a step-wise constant discharge.
///
/// Row `i` holds the voltage measured at `t_i` under load `P_i`; the load
/// `P_i` is held until `t_{i+1}`. Time is taken relative to the first row,
/// which is assumed to be a fully charged, relaxed pack.
#[derive(Debug, Clone, PartialEq)]
pub struct DischargeLog<T> {
    pack: BatteryPack<T>,
    rows: Vec<DischargeRow<T>>,
    steps: Vec<usize>,
}

impl<T: Scalar> DischargeLog<T> {
    pub fn new(pack: BatteryPack<T>, rows: Vec<DischargeRow<T>>) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::Parse("discharge log has no rows".into()));
        }
        for (i, r) in rows.iter().enumerate() {
            if ![r.time, r.pack_power, r.pack_voltage].iter().all(|v| v.is_finite()) {
                return Err(Error::Parse(format!("discharge log row {i}: non-finite value")));
            }
            if r.pack_power < T::zero() {
                return Err(Error::Parse(format!("discharge log row {i}: negative power")));
            }
        }
        if rows.windows(2).any(|w| !(w[1].time > w[0].time)) {
            return Err(Error::Parse("discharge log times must be strictly increasing".into()));
        }
        let steps = detect_steps(&rows);
        Ok(Self { pack, rows, steps })
    }

    pub fn pack(&self) -> &BatteryPack<T> {
        &self.pack
    }

    pub fn rows(&self) -> &[DischargeRow<T>] {
        &self.rows
    }

    /// Indices `j` where the power changes by more than 10 % from row `j − 1`.
    pub fn step_indices(&self) -> &[usize] {
        &self.steps
    }

    /// Time of row `i` relative to the start of the log.
    pub fn elapsed(&self, i: usize) -> T {
        self.rows[i].time - self.rows[0].time
    }

    /// Per-cell terminal voltage of every row.
    pub fn cell_voltages(&self) -> Vec<T> {
        let series: T = lit(self.pack.series_count() as f64);
        self.rows.iter().map(|r| r.pack_voltage / series).collect()
    }

    /// Per-cell consumed energy (kJ/Ah) at row `i`, integrating the held load.
    pub fn energy_per_cell(&self, i: usize) -> T {
        let joules = self.rows[..=i]
            .windows(2)
            .fold(T::zero(), |acc, w| acc + w[0].pack_power * (w[1].time - w[0].time));
        normalize_power(joules, &self.pack) / lit(1000.0)
    }

    pub fn read_csv<R: Read>(reader: R, pack: BatteryPack<T>) -> Result<Self> {
        let records = read_numeric_csv(reader, DISCHARGE_LOG_HEADER)?;
        let rows = records
            .into_iter()
            .map(|v| DischargeRow {
                time: lit(v[0]),
                pack_power: lit(v[1]),
                pack_voltage: lit(v[2]),
            })
            .collect();
        Self::new(pack, rows)
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        write_numeric_csv(
            out,
            DISCHARGE_LOG_HEADER,
            self.rows.iter().map(|r| vec![r.time, r.pack_power, r.pack_voltage]),
        )
    }
}

fn detect_steps<T: Scalar>(rows: &[DischargeRow<T>]) -> Vec<usize> {
    let threshold: T = lit(STEP_THRESHOLD);
    (1..rows.len())
        .filter(|&j| {
            let (prev, cur) = (rows[j - 1].pack_power, rows[j].pack_power);
            if prev > T::zero() {
                (cur - prev).abs() > threshold * prev
            } else {
                cur > T::zero()
            }
        })
        .collect()
}

/// Replays a log's load history through the cell model and returns the
/// predicted per-cell voltage at every row.
///
/// Each inter-row interval is split into equal substeps no longer than about `dt`.
pub fn replay_log<T: Scalar>(
    log: &DischargeLog<T>,
    params: &BatteryParams<T>,
    dt: T,
) -> std::result::Result<Vec<T>, (T, PowerLimit<T>)> {
    let pack = log.pack();
    let rows = log.rows();
    let mut p = normalize_power(rows[0].pack_power, pack);
    let mut state = BatteryState::fresh(p);
    let mut out = Vec::with_capacity(rows.len());
    for i in 0..rows.len() {
        if i > 0 {
            let span = rows[i].time - rows[i - 1].time;
            let n = (span / dt).round().max(T::one());
            let h = span / n;
            let n = n.to_usize().unwrap_or(1);
            for _ in 0..n {
                state = advance_state(&state, p, h, params);
            }
            p = normalize_power(rows[i].pack_power, pack);
        }
        let u = state_voltage(params, pack, &state, p).map_err(|lim| (log.elapsed(i), lim))?;
        out.push(u);
    }
    Ok(out)
}

pub(crate) fn read_numeric_csv<R: Read>(reader: R, header: &str) -> Result<Vec<Vec<f64>>> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let expected: Vec<&str> = header.split(',').collect();
    let got = rdr.headers().map_err(|e| Error::Parse(e.to_string()))?;
    if got.is_empty() {
        return Err(Error::Parse("empty CSV".into()));
    }
    if got.iter().collect::<Vec<_>>() != expected {
        return Err(Error::Parse(format!(
            "unexpected CSV header {:?}, expected {header:?}",
            got.iter().collect::<Vec<_>>().join(",")
        )));
    }
    let mut rows = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| Error::Parse(e.to_string()))?;
        let vals = rec
            .iter()
            .map(|f| {
                f.parse::<f64>()
                    .map_err(|_| Error::Parse(format!("row {}: {f:?} is not a number", i + 1)))
            })
            .collect::<Result<Vec<_>>>()?;
        rows.push(vals);
    }
    if rows.is_empty() {
        return Err(Error::Parse("CSV has a header but no data rows".into()));
    }
    Ok(rows)
}

fn write_numeric_csv<T: Scalar, W: Write>(out: W, header: &str, rows: impl Iterator<Item = Vec<T>>) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let err = |e: csv::Error| Error::Parse(e.to_string());
    w.write_record(header.split(',')).map_err(err)?;
    for row in rows {
        w.write_record(row.iter().map(|v| to_f64(*v).to_string()))
            .map_err(err)?;
    }
    w.flush().map_err(|e| Error::Parse(e.to_string()))
}

/// Converts a log between scalar types.
pub fn cast_discharge_log<A: Scalar, B: Scalar>(log: &DischargeLog<A>) -> Result<DischargeLog<B>> {
    let p = log.pack();
    let pack = BatteryPack::new(p.topology(), cast(p.pack_capacity()))?.with_cutoff(cast(p.cutoff_voltage()))?;
    let rows = log
        .rows()
        .iter()
        .map(|r| DischargeRow {
            time: cast(r.time),
            pack_power: cast(r.pack_power),
            pack_voltage: cast(r.pack_voltage),
        })
        .collect();
    DischargeLog::new(pack, rows)
}
