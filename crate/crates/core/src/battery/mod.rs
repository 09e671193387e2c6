//! One-time-constant (OTC) equivalent-circuit LiPo model.
//!
//! All quantities are per cell and normalized by cell capacity: power in W/Ah,
//! consumed energy in kJ/Ah. The terminal voltage under a power demand solves
//! `U = U0 − U_cap − R0·P_cell/U`, i.e. the larger root of
//! `U² − (U0 − U_cap)·U + R0·P_cell = 0`.

mod capacity;
mod sim;
mod state;

pub use capacity::{
    cubic_capacity_limit, effective_capacity, relative_capacity_cubic, CubicCapacity, EffectiveCapacity,
    CUBIC_FIT_DOMAIN_MAX,
};
pub use sim::{
    simulate_discharge, ConstantPower, DischargeTrace, PiecewiseConstantPower, PowerProfile, Termination, TraceSample,
    DEFAULT_DT, MAX_TRACE_ROWS, PROFILE_CSV_HEADER, TRACE_CSV_HEADER,
};
pub use state::{advance_state, BatteryState};

use crate::model::{BatteryPack, BatteryParams};
use crate::scalar::{lit, Scalar};

/// Demand that exceeds what the cell can deliver in its current state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerLimit<T> {
    pub requested: T,
    /// `(U0 − U_cap)² / (4·R0)`, W/Ah.
    pub max_deliverable: T,
}

/// `P_cell = P_mot / (N_cell · C_cell)`, W/Ah.
pub fn normalize_power<T: Scalar>(pack_power: T, pack: &BatteryPack<T>) -> T {
    pack_power / pack.normalization()
}

/// Cubic open-circuit voltage in consumed energy (kJ/Ah).
pub fn open_circuit_voltage<T: Scalar>(params: &BatteryParams<T>, energy_per_cell: T) -> T {
    let [a0, a1, a2, a3] = params.ocv_coeffs();
    let e = energy_per_cell;
    a0 + e * (a1 + e * (a2 + e * a3))
}

/// Internal resistance from the running mean power and the cell capacity.
pub fn internal_resistance<T: Scalar>(params: &BatteryParams<T>, avg_power: T, cell_capacity: T) -> T {
    params.resistance().eval(avg_power, cell_capacity)
}

/// Terminal voltage of a cell delivering `p_cell` (W/Ah).
///
/// Returns the '+' root; at zero demand this is exactly `U0 − U_cap`.
pub fn cell_terminal_voltage<T: Scalar>(u0: T, u_cap: T, r0: T, p_cell: T) -> Result<T, PowerLimit<T>> {
    let source = u0 - u_cap;
    let four: T = lit(4.0);
    let disc = source * source - four * r0 * p_cell;
    if disc < T::zero() || !disc.is_finite() || source <= T::zero() {
        return Err(PowerLimit {
            requested: p_cell,
            max_deliverable: if source > T::zero() {
                source * source / (four * r0)
            } else {
                T::zero()
            },
        });
    }
    Ok(lit::<T>(0.5) * (source + disc.sqrt()))
}

/// Terminal voltage for a full model state.
pub fn state_voltage<T: Scalar>(
    params: &BatteryParams<T>,
    pack: &BatteryPack<T>,
    state: &BatteryState<T>,
    p_cell: T,
) -> Result<T, PowerLimit<T>> {
    let u0 = open_circuit_voltage(params, state.energy_per_cell);
    let r0 = internal_resistance(params, state.avg_power, pack.cell_capacity());
    cell_terminal_voltage(u0, state.rc_voltage, r0, p_cell)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::builtin_battery_params;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    #[test]
    fn normalization_examples() {
        let pack = BatteryPack::from_designator("4S1P", 3.85).unwrap();
        assert_abs_diff_eq!(normalize_power(99.8, &pack), 6.48, epsilon = 0.005);
        // The reference 7.74 was computed from the unrounded 119.25 W.
        assert_abs_diff_eq!(normalize_power(119.3, &pack), 7.74, epsilon = 0.01);
        assert_eq!(normalize_power(0.0, &pack), 0.0);
        let pack = BatteryPack::from_designator("6S2P", 5.2).unwrap();
        assert_abs_diff_eq!(normalize_power(312.0, &pack), 10.0, epsilon = 1e-12);
    }

    #[test]
    fn ocv_examples() {
        let p = builtin_battery_params();
        assert_eq!(open_circuit_voltage(&p, 0.0), 4.2);
        // Horner vs. explicit powers of the same polynomial.
        let e: f64 = 8.0;
        let explicit = 4.2 - 0.1102178 * e + 0.0103368 * e * e - 4.3778e-4 * e * e * e;
        assert_abs_diff_eq!(open_circuit_voltage(&p, e), explicit, epsilon = 1e-14);
        assert_abs_diff_eq!(open_circuit_voltage(&p, 8.0), 3.756, epsilon = 5e-4);
        assert_abs_diff_eq!(open_circuit_voltage(&p, 13.65), 3.505, epsilon = 5e-3);
    }

    #[test]
    fn resistance_examples() {
        let p = builtin_battery_params();
        assert_abs_diff_eq!(internal_resistance(&p, 13.89, 1.8), 0.01301, epsilon = 5e-6);
        assert_abs_diff_eq!(internal_resistance(&p, 69.4, 1.8), 0.00870, epsilon = 5e-6);
        assert_eq!(internal_resistance(&p, 1000.0, 0.5), 0.0045);
    }

    #[test]
    fn terminal_voltage_examples() {
        let u = cell_terminal_voltage(3.551, 0.0, 0.01301, 13.89).unwrap();
        assert_abs_diff_eq!(u, 3.4995, epsilon = 5e-4);
        assert_eq!(cell_terminal_voltage(4.1, 0.3, 0.01, 0.0).unwrap(), 4.1 - 0.3);
        let err = cell_terminal_voltage(4.2, 0.0, 0.014087, 320.0).unwrap_err();
        assert_abs_diff_eq!(err.max_deliverable, 313.0, epsilon = 0.5);
        assert_eq!(err.requested, 320.0);
    }

    #[test]
    fn terminal_voltage_solves_the_circuit_equation() {
        let (u0, ucap, r0, p) = (3.9, 0.02, 0.011, 40.0);
        let u = cell_terminal_voltage(u0, ucap, r0, p).unwrap();
        assert_abs_diff_eq!(u, u0 - ucap - r0 * p / u, epsilon = 1e-12);
    }

    proptest! {
        #[test]
        fn load_sag(u0 in 3.0f64..4.2, ucap in 0.0f64..0.2, r0 in 1e-3f64..0.05, p in 1e-6f64..50.0) {
            if let Ok(u) = cell_terminal_voltage(u0, ucap, r0, p) {
                prop_assert!(u < u0 - ucap);
            }
        }

        #[test]
        fn ocv_strictly_decreasing(e in 0.0f64..40.0, d in 1e-3f64..1.0) {
            let p = builtin_battery_params();
            prop_assert!(open_circuit_voltage(&p, e + d) < open_circuit_voltage(&p, e));
        }
    }
}
