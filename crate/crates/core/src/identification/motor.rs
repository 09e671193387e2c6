use crate::error::{Error, Result};
use crate::identification::logs::ThrustLog;
use crate::identification::FitReport;
use crate::linalg::{lstsq, rms};
use crate::motor::{efficiency, MotorPropCoeffs};
use crate::scalar::{lit, Scalar};

pub const MIN_THRUST_ROWS: usize = 8;

const EFFICIENCY_CHECK_POINTS: usize = 256;

/// Fits drag and loss coefficients of the lumped motor model to a thrust-stand log.
///
/// Negative loss coefficients are clamped to zero (with a warning) and the
/// remaining terms refitted. Efficiencies above 1 within the measured speed
/// range are reported as warnings, never clamped.
pub fn fit_motor<T: Scalar>(log: &ThrustLog<T>) -> Result<FitReport<T, MotorPropCoeffs<T>>> {
    let rows = log.rows();
    if rows.len() < MIN_THRUST_ROWS {
        return Err(Error::Fit(format!(
            "thrust log has {} rows, at least {MIN_THRUST_ROWS} are needed",
            rows.len()
        )));
    }
    let mut speeds: Vec<T> = rows.iter().map(|r| r.omega).filter(|w| *w > T::zero()).collect();
    speeds.sort_by(|a, b| a.partial_cmp(b).expect("finite speeds"));
    speeds.dedup();
    if speeds.len() < 3 {
        return Err(Error::RankDeficient(format!(
            "{} distinct nonzero speeds; at least 3 are needed to separate m0, m1 and m2",
            speeds.len()
        )));
    }

    let omega: Vec<T> = rows.iter().map(|r| r.omega).collect();
    let w2: Vec<T> = omega.iter().map(|w| *w * *w).collect();
    let torque: Vec<T> = rows.iter().map(|r| r.torque).collect();
    let c_d = lstsq(&[w2], &torque)?[0];
    if !(c_d > T::zero()) {
        return Err(Error::Fit(format!("fitted drag coefficient {c_d} is not positive")));
    }

    let power: Vec<T> = rows.iter().map(|r| r.electrical_power).collect();
    let regressors: [Vec<T>; 3] = [
        omega.clone(),
        omega.iter().map(|w| *w * *w * *w).collect(),
        omega.iter().map(|w| (*w * *w * *w).powi(2)).collect(),
    ];
    let names = ["m0", "m1", "m2"];
    let mut active = [true; 3];
    let mut warnings = Vec::new();
    let m = loop {
        let idx: Vec<usize> = (0..3).filter(|&i| active[i]).collect();
        let cols: Vec<Vec<T>> = idx.iter().map(|&i| regressors[i].clone()).collect();
        let sol = lstsq(&cols, &power)?;
        let mut full = [T::zero(); 3];
        for (&i, v) in idx.iter().zip(&sol) {
            full[i] = *v;
        }
        let worst = idx
            .iter()
            .copied()
            .filter(|&i| full[i] < T::zero())
            .min_by(|&a, &b| full[a].partial_cmp(&full[b]).expect("finite"));
        match worst {
            Some(i) => {
                warnings.push(format!(
                    "{} fitted negative ({}); clamped to 0 and refitted",
                    names[i], full[i]
                ));
                active[i] = false;
                if i == 1 {
                    return Err(Error::Fit("m1 must be positive but the data drive it negative".into()));
                }
            }
            None => break full,
        }
    };
    let coeffs = MotorPropCoeffs::new(c_d, m[0], m[1], m[2]).map_err(|e| Error::Fit(e.to_string()))?;

    let (lo, hi) = (speeds[0], *speeds.last().expect("non-empty"));
    let peak = (0..EFFICIENCY_CHECK_POINTS)
        .map(|i| lo + (hi - lo) * lit(i as f64 / (EFFICIENCY_CHECK_POINTS - 1) as f64))
        .chain(speeds.iter().copied())
        .filter_map(|w| efficiency(&coeffs, w).ok().map(|eta| (w, eta)))
        .fold((lo, T::zero()), |best, cur| if cur.1 > best.1 { cur } else { best });
    if peak.1 > T::one() {
        warnings.push(format!(
            "fitted efficiency exceeds 1 (peak {} at {} rad/s) within the measured speed range",
            peak.1, peak.0
        ));
    }

    let residuals = motor_residuals(log, &coeffs);
    Ok(FitReport {
        params: coeffs,
        rmse: rms(&residuals),
        residuals,
        warnings,
        iterations: 0,
        objective_history: Vec::new(),
    })
}

/// Measured minus modelled electrical power, per row.
pub fn motor_residuals<T: Scalar>(log: &ThrustLog<T>, coeffs: &MotorPropCoeffs<T>) -> Vec<T> {
    log.rows()
        .iter()
        .map(|r| r.electrical_power - coeffs.electrical_power_at(r.omega))
        .collect()
}
