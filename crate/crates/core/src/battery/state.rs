use crate::model::BatteryParams;
use crate::ode::rk4_step;
use crate::scalar::{lit, Scalar};

/// ODE state of one normalized cell.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BatteryState<T> {
    /// s
    pub time: T,
    /// Consumed energy per cell per Ah, kJ/Ah.
    pub energy_per_cell: T,
    /// RC-branch voltage `U_cap`, V.
    pub rc_voltage: T,
    /// Running mean of `P_cell` since t = 0, W/Ah.
    pub avg_power: T,
}

impl<T: Scalar> BatteryState<T> {
    /// Fully charged, relaxed cell. The running mean is 0/0 at t = 0, so it
    /// starts out as the instantaneous demand.
    pub fn fresh(initial_p_cell: T) -> Self {
        Self {
            time: T::zero(),
            energy_per_cell: T::zero(),
            rc_voltage: T::zero(),
            avg_power: initial_p_cell,
        }
    }
}

/// Advances the state by `dt` seconds under constant per-cell demand `p_cell`.
///
/// `dU_cap/dt = (k·P_cell − U_cap)/τ_RC` is integrated with RK4; the energy
/// integral is exact for a constant demand.
pub fn advance_state<T: Scalar>(
    state: &BatteryState<T>,
    p_cell: T,
    dt: T,
    params: &BatteryParams<T>,
) -> BatteryState<T> {
    let (k, tau) = (params.k(), params.tau_rc());
    let rc_voltage = rk4_step(|_, u| (k * p_cell - u) / tau, state.time, state.rc_voltage, dt);
    let energy_per_cell = state.energy_per_cell + p_cell * dt / lit(1000.0);
    let time = state.time + dt;
    BatteryState {
        time,
        energy_per_cell,
        rc_voltage,
        avg_power: energy_per_cell * lit(1000.0) / time,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::builtin_battery_params;
    use approx::assert_abs_diff_eq;

    fn hold(p: f64, seconds: f64, dt: f64) -> BatteryState<f64> {
        let params = builtin_battery_params();
        let n = (seconds / dt).round() as usize;
        (0..n).fold(BatteryState::fresh(p), |s, _| advance_state(&s, p, dt, &params))
    }

    #[test]
    fn rc_step_response() {
        let params = builtin_battery_params::<f64>();
        let p = 20.0;
        let s = hold(p, 3.0 * params.tau_rc(), 0.05);
        let target = params.k() * p;
        assert!((s.rc_voltage - target).abs() / target < 0.051);
        assert_abs_diff_eq!(s.rc_voltage, target * (1.0 - (-3.0f64).exp()), epsilon = 1e-9);
    }

    #[test]
    fn energy_integral() {
        let s = hold(13.89, 920.0, 0.05);
        assert_abs_diff_eq!(s.energy_per_cell, 12.78, epsilon = 0.005);
        assert_abs_diff_eq!(s.avg_power, 13.89, epsilon = 1e-9);
        assert_abs_diff_eq!(s.time, 920.0, epsilon = 1e-6);
    }

    #[test]
    fn step_halving_convergence() {
        let a = hold(50.0, 10.0, 0.05);
        let b = hold(50.0, 10.0, 0.025);
        assert!((a.rc_voltage - b.rc_voltage).abs() < 1e-4);
    }

    #[test]
    fn fresh_state_uses_instantaneous_power() {
        let s = BatteryState::fresh(7.5f64);
        assert_eq!(s.avg_power, 7.5);
        assert_eq!(s.energy_per_cell, 0.0);
    }
}
