//! Graybox parameter identification from bench-test logs.
//!
//! * Motor-propeller: two linear least-squares stages, first `Q = c_d·Ω²`,
//!   then `P_mot = m0·Ω + m1·Ω³ + m2·Ω⁶`.
//! * Battery: internal-resistance coefficients from the voltage jumps at load
//!   steps, then the open-circuit polynomial and RC lump by minimizing the
//!   voltage RMSE of replayed logs.

mod dynamics;
mod logs;
mod motor;
mod optim;
mod resistance;

pub use dynamics::{fit_battery_dynamics, log_residuals, DynamicsFitOptions};
pub(crate) use logs::read_numeric_csv;
pub use logs::{
    cast_discharge_log, replay_log, DischargeLog, DischargeRow, ThrustLog, ThrustRow, DISCHARGE_LOG_HEADER,
    STEP_THRESHOLD, THRUST_LOG_HEADER,
};
pub use motor::{fit_motor, motor_residuals, MIN_THRUST_ROWS};
pub use optim::{levenberg_marquardt, LmOptions, LmOutcome};
pub use resistance::{estimate_step_resistances, fit_battery_resistance, ResistanceFit, StepEstimate, MIN_R_MIN};

/// Outcome of a fit: the coefficients plus residual diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct FitReport<T, P> {
    pub params: P,
    /// RMSE in units of the fitted signal (W for motors, V per cell for batteries).
    pub rmse: T,
    pub residuals: Vec<T>,
    pub warnings: Vec<String>,
    /// Optimizer iterations; 0 for closed-form fits.
    pub iterations: usize,
    /// Objective (RMSE) after each accepted iteration, starting with the initial point.
    pub objective_history: Vec<T>,
}
