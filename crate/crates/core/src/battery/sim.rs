use std::io::{Read, Write};

use crate::battery::state::{advance_state, BatteryState};
use crate::battery::{normalize_power, state_voltage, PowerLimit};
use crate::error::{Error, Result};
use crate::model::{BatteryPack, BatteryParams};
use crate::scalar::{lit, to_f64, Scalar};

/// Default integration step, s (τ_RC / 66 for the built-in cell).
pub const DEFAULT_DT: f64 = 0.05;
/// Serialized traces are uniformly thinned to at most this many rows.
pub const MAX_TRACE_ROWS: usize = 2000;
pub const TRACE_CSV_HEADER: &str = "time_s,p_cell_w_per_ah,e_cell_kj_per_ah,u_cell_v,u_pack_v";
/// Breakpoints of a [`PiecewiseConstantPower`]; the last row marks the end time.
pub const PROFILE_CSV_HEADER: &str = "time_s,power_w";

/// Pack-level power demand over time.
pub trait PowerProfile<T> {
    /// Pack power in W drawn at time `t`. Held constant over each integration step.
    fn power_at(&self, t: T) -> T;
    /// Time at which the profile ends, s.
    fn end_time(&self) -> T;
}

/// Constant pack power until `horizon`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConstantPower<T> {
    pub power: T,
    pub horizon: T,
}

impl<T: Scalar> ConstantPower<T> {
    pub fn new(power: T, horizon: T) -> Result<Self> {
        if !(power >= T::zero()) || !power.is_finite() {
            return Err(Error::invalid("power", format!("must be finite and >= 0, got {power}")));
        }
        if !(horizon > T::zero()) || !horizon.is_finite() {
            return Err(Error::invalid(
                "horizon",
                format!("must be finite and > 0, got {horizon}"),
            ));
        }
        Ok(Self { power, horizon })
    }
}

impl<T: Scalar> PowerProfile<T> for ConstantPower<T> {
    fn power_at(&self, _t: T) -> T {
        self.power
    }
    fn end_time(&self) -> T {
        self.horizon
    }
}

/// Zero-order hold over `(time, power)` breakpoints: the power of breakpoint
/// `i` applies on `[t_i, t_{i+1})`. The profile ends at the last breakpoint.
#[derive(Debug, Clone, PartialEq)]
pub struct PiecewiseConstantPower<T> {
    times: Vec<T>,
    powers: Vec<T>,
}

impl<T: Scalar> PiecewiseConstantPower<T> {
    pub fn new(points: impl IntoIterator<Item = (T, T)>) -> Result<Self> {
        let (times, powers): (Vec<T>, Vec<T>) = points.into_iter().unzip();
        if times.len() < 2 {
            return Err(Error::invalid("power profile", "needs at least two breakpoints"));
        }
        if times[0] != T::zero() {
            return Err(Error::invalid("power profile", "must start at t = 0"));
        }
        if times.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::invalid("power profile", "times must be strictly increasing"));
        }
        if powers.iter().any(|p| !(*p >= T::zero()) || !p.is_finite()) {
            return Err(Error::invalid("power profile", "powers must be finite and nonnegative"));
        }
        Ok(Self { times, powers })
    }

    /// Piecewise-constant segments `(duration, power)` starting at t = 0.
    pub fn from_segments(segments: &[(T, T)]) -> Result<Self> {
        let mut t = T::zero();
        let mut points = Vec::with_capacity(segments.len() + 1);
        for &(duration, power) in segments {
            points.push((t, power));
            t += duration;
        }
        let last = segments.last().map(|s| s.1).unwrap_or_else(T::zero);
        points.push((t, last));
        Self::new(points)
    }

    /// Reads breakpoints with [`PROFILE_CSV_HEADER`]. The power on the last
    /// row is never applied; its time is where the profile ends.
    pub fn read_csv<R: Read>(reader: R) -> Result<Self> {
        let rows = crate::identification::read_numeric_csv(reader, PROFILE_CSV_HEADER)?;
        Self::new(rows.into_iter().map(|r| (lit(r[0]), lit(r[1]))))
    }

    pub fn times(&self) -> &[T] {
        &self.times
    }

    pub fn powers(&self) -> &[T] {
        &self.powers
    }
}

impl<T: Scalar> PowerProfile<T> for PiecewiseConstantPower<T> {
    fn power_at(&self, t: T) -> T {
        let idx = self.times.partition_point(|&ti| ti <= t);
        self.powers[idx.saturating_sub(1)]
    }
    fn end_time(&self) -> T {
        *self.times.last().expect("validated non-empty")
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceSample<T> {
    pub time: T,
    pub p_cell: T,
    pub e_cell: T,
    pub u_cell: T,
    pub u_pack: T,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Termination<T> {
    ReachedCutoff,
    InfeasiblePower { time: T, limit: PowerLimit<T> },
    ProfileEnd,
}

impl<T: Scalar> Termination<T> {
    pub fn label(&self) -> &'static str {
        match self {
            Termination::ReachedCutoff => "reached_cutoff",
            Termination::InfeasiblePower { .. } => "infeasible_power",
            Termination::ProfileEnd => "profile_end",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DischargeTrace<T> {
    pub samples: Vec<TraceSample<T>>,
    pub termination: Termination<T>,
    pub final_state: BatteryState<T>,
}

impl<T: Scalar> DischargeTrace<T> {
    pub fn last(&self) -> Option<&TraceSample<T>> {
        self.samples.last()
    }

    /// Time of the termination event.
    pub fn end_time(&self) -> T {
        match self.termination {
            Termination::InfeasiblePower { time, .. } => time,
            _ => self.samples.last().map(|s| s.time).unwrap_or_else(T::zero),
        }
    }

    /// Converts an infeasible-power termination into an error.
    pub fn check_feasible(&self) -> Result<&Self> {
        match self.termination {
            Termination::InfeasiblePower { time, limit } => Err(Error::InfeasiblePower {
                time_s: to_f64(time),
                requested_w_per_ah: to_f64(limit.requested),
                max_w_per_ah: to_f64(limit.max_deliverable),
            }),
            _ => Ok(self),
        }
    }

    /// Samples uniformly thinned to at most `max_rows`, keeping the first and last.
    pub fn decimated(&self, max_rows: usize) -> Vec<&TraceSample<T>> {
        let n = self.samples.len();
        if n <= max_rows || max_rows < 2 {
            return self.samples.iter().collect();
        }
        (0..max_rows)
            .map(|i| &self.samples[(i * (n - 1) + (max_rows - 1) / 2) / (max_rows - 1)])
            .collect()
    }

    /// Writes the thinned trace as CSV with [`TRACE_CSV_HEADER`].
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let err = |e: csv::Error| Error::Parse(e.to_string());
        w.write_record(TRACE_CSV_HEADER.split(',')).map_err(err)?;
        for s in self.decimated(MAX_TRACE_ROWS) {
            w.write_record(
                [s.time, s.p_cell, s.e_cell, s.u_cell, s.u_pack]
                    .iter()
                    .map(|v| to_f64(*v).to_string()),
            )
            .map_err(err)?;
        }
        w.flush().map_err(|e| Error::Parse(e.to_string()))
    }
}

/// Steps the cell model under a pack-level power profile until the cell
/// voltage drops below `cutoff_per_cell`, the demand becomes infeasible, or
/// the profile ends.
///
/// Sample times are `n·dt` (the final step is shortened to land on the profile
/// end). The power over `(t_n, t_{n+1}]` is `profile(t_n)`; the voltage
/// reported at `t_{n+1}` is evaluated under `profile(t_{n+1})`.
pub fn simulate_discharge<T: Scalar, P: PowerProfile<T> + ?Sized>(
    pack: &BatteryPack<T>,
    params: &BatteryParams<T>,
    profile: &P,
    dt: T,
    cutoff_per_cell: T,
) -> Result<DischargeTrace<T>> {
    if !(dt > T::zero()) || !dt.is_finite() {
        return Err(Error::invalid("dt", format!("must be finite and > 0, got {dt}")));
    }
    let end = profile.end_time();
    if !end.is_finite() {
        return Err(Error::invalid("power profile", "must end at a finite time"));
    }
    let series: T = lit(pack.series_count() as f64);
    let p_cell_at = |t: T| -> Result<T> {
        let p = profile.power_at(t);
        if !(p >= T::zero()) || !p.is_finite() {
            return Err(Error::invalid(
                "power profile",
                format!("negative or non-finite power {p} at t = {t}"),
            ));
        }
        Ok(normalize_power(p, pack))
    };

    let mut t = T::zero();
    let mut p = p_cell_at(t)?;
    let mut state = BatteryState::fresh(p);
    let mut samples = Vec::new();
    let mut step: u64 = 0;
    let termination = loop {
        let u = match state_voltage(params, pack, &state, p) {
            Ok(u) => u,
            Err(limit) => break Termination::InfeasiblePower { time: t, limit },
        };
        samples.push(TraceSample {
            time: t,
            p_cell: p,
            e_cell: state.energy_per_cell,
            u_cell: u,
            u_pack: series * u,
        });
        if u < cutoff_per_cell {
            break Termination::ReachedCutoff;
        }
        if t >= end {
            break Termination::ProfileEnd;
        }
        step += 1;
        let t_next = (lit::<T>(step as f64) * dt).min(end);
        state = advance_state(&state, p, t_next - t, params);
        t = t_next;
        p = p_cell_at(t)?;
    };
    Ok(DischargeTrace {
        samples,
        termination,
        final_state: state,
    })
}
