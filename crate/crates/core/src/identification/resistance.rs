use crate::error::{Error, Result};
use crate::identification::logs::DischargeLog;
use crate::linalg::{lstsq, rms};
use crate::model::ResistanceModel;
use crate::scalar::{lit, Scalar};

/// Floor applied to the identified `R_min`, Ω·Ah.
pub const MIN_R_MIN: f64 = 1e-3;

/// Internal resistance read off one load step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepEstimate<T> {
    pub log_index: usize,
    /// Index of the first row under the new load.
    pub row_index: usize,
    /// Time since the start of the log, s.
    pub time: T,
    /// Running mean per-cell power at the step, W/Ah.
    pub avg_power: T,
    pub cell_capacity: T,
    /// `ΔU_cell / ΔI_norm` with the current normalized by cell capacity, Ω·Ah.
    pub resistance: T,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResistanceFit<T> {
    pub model: ResistanceModel<T>,
    pub steps: Vec<StepEstimate<T>>,
    /// RMSE of the linear model against the step estimates, Ω·Ah.
    pub rmse: T,
    pub warnings: Vec<String>,
}

/// Reads the instantaneous resistance at every detected load step.
///
/// The voltage jump is taken between the last row under the old load and the
/// first row under the new one; the RC branch cannot move in between, so the
/// jump isolates `R0`. Steps with no voltage or current change are skipped
/// with a warning.
pub fn estimate_step_resistances<T: Scalar>(logs: &[DischargeLog<T>]) -> (Vec<StepEstimate<T>>, Vec<String>) {
    let mut steps = Vec::new();
    let mut warnings = Vec::new();
    for (li, log) in logs.iter().enumerate() {
        let pack = log.pack();
        let series: T = lit(pack.series_count() as f64);
        let parallel: T = lit(pack.parallel_count() as f64);
        let cap = pack.cell_capacity();
        let rows = log.rows();
        // Per-cell current normalized by cell capacity, A/Ah.
        let current = |i: usize| rows[i].pack_power / (rows[i].pack_voltage * parallel) / cap;
        for &j in log.step_indices() {
            let du = (rows[j - 1].pack_voltage - rows[j].pack_voltage) / series;
            let di = current(j) - current(j - 1);
            if du == T::zero() || di == T::zero() {
                warnings.push(format!(
                    "log {li}, row {j}: zero voltage or current jump at step; excluded"
                ));
                continue;
            }
            let r = du / di;
            if !(r > T::zero()) || !r.is_finite() {
                warnings.push(format!("log {li}, row {j}: nonphysical step resistance {r}; excluded"));
                continue;
            }
            let t = log.elapsed(j);
            steps.push(StepEstimate {
                log_index: li,
                row_index: j,
                time: t,
                avg_power: log.energy_per_cell(j) * lit(1000.0) / t,
                cell_capacity: cap,
                resistance: r,
            });
        }
    }
    (steps, warnings)
}

/// First identification stage: `b0`, `b1`, `b2` by regressing the step
/// resistances on `(P̄_cell, C_cell)`; `R_min` is the smallest step
/// resistance, floored at 1 mΩ·Ah.
pub fn fit_battery_resistance<T: Scalar>(logs: &[DischargeLog<T>]) -> Result<ResistanceFit<T>> {
    let (steps, warnings) = estimate_step_resistances(logs);
    if steps.is_empty() {
        return Err(Error::Fit("no usable power steps found in the discharge logs".into()));
    }
    let cols = vec![
        vec![T::one(); steps.len()],
        steps.iter().map(|s| s.avg_power).collect(),
        steps.iter().map(|s| s.cell_capacity).collect(),
    ];
    let target: Vec<T> = steps.iter().map(|s| s.resistance).collect();
    let b = lstsq(&cols, &target).map_err(|e| match e {
        Error::RankDeficient(m) => Error::RankDeficient(format!(
            "{m}; resistance regression needs steps at several mean powers and at least two cell capacities"
        )),
        other => other,
    })?;
    let r_min = steps
        .iter()
        .map(|s| s.resistance)
        .fold(T::infinity(), T::min)
        .max(lit(MIN_R_MIN));
    let model = ResistanceModel::new(b[0], b[1], b[2], r_min)?;
    let residuals: Vec<T> = steps
        .iter()
        .map(|s| s.resistance - model.linear(s.avg_power, s.cell_capacity))
        .collect();
    Ok(ResistanceFit {
        model,
        rmse: rms(&residuals),
        steps,
        warnings,
    })
}
