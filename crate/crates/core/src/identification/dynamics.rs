use crate::battery::DEFAULT_DT;
use crate::error::{Error, Result};
use crate::identification::logs::{replay_log, DischargeLog};
use crate::identification::optim::{levenberg_marquardt, LmOptions};
use crate::identification::FitReport;
use crate::model::{builtin_battery_params, BatteryParams, ResistanceModel};
use crate::scalar::{lit, Scalar};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DynamicsFitOptions<T> {
    /// Starting point for `a0..a3`, `k` and `τ_RC` (its resistance part is ignored).
    pub initial: BatteryParams<T>,
    /// Integration step used when replaying the logs, s.
    pub dt: T,
    pub optimizer: LmOptions<T>,
}

impl<T: Scalar> Default for DynamicsFitOptions<T> {
    fn default() -> Self {
        Self {
            initial: builtin_battery_params(),
            dt: lit(DEFAULT_DT),
            optimizer: LmOptions::default(),
        }
    }
}

const N_PARAMS: usize = 6;

fn pack_params<T: Scalar>(p: &BatteryParams<T>) -> [T; N_PARAMS] {
    let [a0, a1, a2, a3] = p.ocv_coeffs();
    [a0, a1, a2, a3, p.k(), p.tau_rc()]
}

fn unpack_params<T: Scalar>(v: &[T], resistance: &ResistanceModel<T>) -> Result<BatteryParams<T>> {
    BatteryParams::new([v[0], v[1], v[2], v[3]], *resistance, v[5], v[4])
}

/// Model minus measured per-cell voltage for every row of every log.
pub fn log_residuals<T: Scalar>(logs: &[DischargeLog<T>], params: &BatteryParams<T>, dt: T) -> Result<Vec<T>> {
    let mut out = Vec::new();
    for log in logs {
        let model = replay_log(log, params, dt).map_err(|(t, lim)| Error::InfeasiblePower {
            time_s: crate::scalar::to_f64(t),
            requested_w_per_ah: crate::scalar::to_f64(lim.requested),
            max_w_per_ah: crate::scalar::to_f64(lim.max_deliverable),
        })?;
        out.extend(model.into_iter().zip(log.cell_voltages()).map(|(m, u)| m - u));
    }
    Ok(out)
}

/// Second identification stage: open-circuit polynomial, `k` and `τ_RC`,
/// with the resistance model held fixed, by minimizing the per-cell voltage
/// RMSE over all logs.
pub fn fit_battery_dynamics<T: Scalar>(
    logs: &[DischargeLog<T>],
    resistance: &ResistanceModel<T>,
    options: &DynamicsFitOptions<T>,
) -> Result<FitReport<T, BatteryParams<T>>> {
    if logs.is_empty() {
        return Err(Error::Fit("no discharge logs supplied".into()));
    }
    // Optimize in units of the initial values so every coordinate is O(1).
    let x0 = pack_params(&options.initial);
    let scale: Vec<T> = x0
        .iter()
        .map(|v| if *v == T::zero() { T::one() } else { v.abs() })
        .collect();
    let to_params = |x: &[T]| -> Vec<T> { x.iter().zip(&scale).map(|(a, s)| *a * *s).collect() };
    let objective = |x: &[T]| -> Option<Vec<T>> {
        let params = unpack_params(&to_params(x), resistance).ok()?;
        log_residuals(logs, &params, options.dt).ok()
    };
    let start: Vec<T> = x0.iter().zip(&scale).map(|(v, s)| *v / *s).collect();
    let outcome = levenberg_marquardt(objective, &start, &options.optimizer).map_err(|e| match e {
        Error::NonFiniteObjective { params } => Error::NonFiniteObjective {
            params: params
                .iter()
                .zip(&scale)
                .map(|(a, s)| a * crate::scalar::to_f64(*s))
                .collect(),
        },
        other => other,
    })?;
    let params = unpack_params(&to_params(&outcome.x), resistance)?;
    let mut warnings = Vec::new();
    if !outcome.converged {
        warnings.push(format!(
            "optimizer stopped at the iteration limit ({}) before converging",
            options.optimizer.max_iterations
        ));
    }
    Ok(FitReport {
        params,
        rmse: outcome.rmse,
        residuals: outcome.residuals,
        warnings,
        iterations: outcome.iterations,
        objective_history: outcome.history,
    })
}
