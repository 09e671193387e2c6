//! Lumped brushless-motor efficiency model.
//!
//! With propeller drag torque `Q = c_d·Ω²`, sliding friction `m0` and copper
//! losses lumped into `m1`, `m2`, the electrical power drawn at speed Ω is
//! `P_mot = m0·Ω + m1·Ω³ + m2·Ω⁶` and the efficiency is
//! `η(Ω) = c_d·Ω³ / P_mot(Ω)`.

use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MotorPropCoeffs<T> {
    c_d: T,
    m0: T,
    m1: T,
    m2: T,
}

impl<T: Scalar> MotorPropCoeffs<T> {
    pub fn new(c_d: T, m0: T, m1: T, m2: T) -> Result<Self> {
        let ok = |v: T| v.is_finite();
        if !(ok(c_d) && c_d > T::zero()) {
            return Err(Error::invalid("c_d", format!("must be > 0, got {c_d}")));
        }
        if !(ok(m0) && m0 >= T::zero()) {
            return Err(Error::invalid("m0", format!("must be >= 0, got {m0}")));
        }
        if !(ok(m1) && m1 > T::zero()) {
            return Err(Error::invalid("m1", format!("must be > 0, got {m1}")));
        }
        if !(ok(m2) && m2 >= T::zero()) {
            return Err(Error::invalid("m2", format!("must be >= 0, got {m2}")));
        }
        Ok(Self { c_d, m0, m1, m2 })
    }

    /// Propeller drag coefficient, N·m·s².
    pub fn c_d(&self) -> T {
        self.c_d
    }
    pub fn m0(&self) -> T {
        self.m0
    }
    pub fn m1(&self) -> T {
        self.m1
    }
    pub fn m2(&self) -> T {
        self.m2
    }

    /// Electrical power the model predicts at speed `omega`.
    pub fn electrical_power_at(&self, omega: T) -> T {
        let w3 = omega * omega * omega;
        self.m0 * omega + self.m1 * w3 + self.m2 * w3 * w3
    }

    /// Speed at which the propeller absorbs `mech_power` (W): `Ω = (P / c_d)^{1/3}`.
    pub fn speed_for_power(&self, mech_power: T) -> T {
        (mech_power / self.c_d).cbrt()
    }
}

/// `Q = c_d·Ω²`.
pub fn drag_torque<T: Scalar>(coeffs: &MotorPropCoeffs<T>, omega: T) -> T {
    coeffs.c_d * omega * omega
}

/// Motor efficiency at speed `omega` (rad/s). Values above 1 are returned as-is.
pub fn efficiency<T: Scalar>(coeffs: &MotorPropCoeffs<T>, omega: T) -> Result<T> {
    if !(omega > T::zero()) || !omega.is_finite() {
        return Err(Error::Domain {
            op: "efficiency",
            reason: format!("efficiency is undefined at omega = {omega} rad/s"),
        });
    }
    // Divide through by Ω to keep Ω⁶ from overflowing f32 at high speed.
    let w2 = omega * omega;
    Ok(coeffs.c_d * w2 / (coeffs.m0 + coeffs.m1 * w2 + coeffs.m2 * w2 * w2 * omega))
}

/// `P_mot = Q·Ω / η`.
pub fn electrical_power<T: Scalar>(torque: T, omega: T, eta: T) -> Result<T> {
    if !(eta > T::zero()) || eta > T::one() {
        return Err(Error::Domain {
            op: "electrical_power",
            reason: format!("efficiency must lie in (0, 1], got {eta}"),
        });
    }
    if torque < T::zero() || omega < T::zero() {
        return Err(Error::Domain {
            op: "electrical_power",
            reason: format!("torque and speed must be nonnegative, got Q = {torque}, omega = {omega}"),
        });
    }
    Ok(torque * omega / eta)
}

/// Electrical power for a known mechanical power at constant efficiency.
pub fn electrical_from_mechanical<T: Scalar>(mech_power: T, eta: T) -> Result<T> {
    // Q·Ω with Ω = 1 is just the mechanical power.
    electrical_power(mech_power, T::one(), eta)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn probe() -> MotorPropCoeffs<f64> {
        MotorPropCoeffs::new(1e-7, 1e-3, 2e-7, 1e-17).unwrap()
    }

    #[test]
    fn torque_examples() {
        let c = MotorPropCoeffs::new(1e-7, 0.0, 1e-7, 0.0).unwrap();
        assert_abs_diff_eq!(drag_torque(&c, 1000.0), 0.1, epsilon = 1e-15);
        assert_abs_diff_eq!(drag_torque(&c, 2000.0), 0.4, epsilon = 1e-15);
        assert_eq!(drag_torque(&c, 0.0), 0.0);
    }

    #[test]
    fn efficiency_limits() {
        let c = probe();
        assert!(efficiency(&c, 1e-3).unwrap() < 1e-4);
        assert!(efficiency(&c, 1e6).unwrap() < 1e-2);
        assert!(matches!(efficiency(&c, 0.0), Err(Error::Domain { .. })));
        assert!(efficiency(&c, -1.0).is_err());
    }

    #[test]
    fn efficiency_matches_power_ratio() {
        let c = probe();
        for w in [10.0, 300.0, 2500.0] {
            let eta = efficiency(&c, w).unwrap();
            let ratio = drag_torque(&c, w) * w / c.electrical_power_at(w);
            assert_abs_diff_eq!(eta, ratio, epsilon = 1e-14);
        }
    }

    #[test]
    fn efficiency_above_one_is_not_clamped() {
        let c = MotorPropCoeffs::new(1e-7, 0.0, 5e-8, 0.0).unwrap();
        assert_abs_diff_eq!(efficiency(&c, 100.0).unwrap(), 2.0, epsilon = 1e-12);
    }

    #[test]
    fn electrical_power_examples() {
        assert_abs_diff_eq!(electrical_from_mechanical(74.8, 0.75).unwrap(), 99.73, epsilon = 0.01);
        assert_abs_diff_eq!(electrical_from_mechanical(89.4, 0.75).unwrap(), 119.2, epsilon = 0.01);
        assert_eq!(electrical_power(0.0, 1000.0, 0.8).unwrap(), 0.0);
        assert!(electrical_power(1.0, 1.0, 0.0).is_err());
        assert!(electrical_power(1.0, 1.0, -0.5).is_err());
    }

    #[test]
    fn invalid_coefficients() {
        assert!(MotorPropCoeffs::new(0.0, 0.0, 1.0, 0.0).is_err());
        assert!(MotorPropCoeffs::new(1.0, -1.0, 1.0, 0.0).is_err());
        assert!(MotorPropCoeffs::new(1.0, 0.0, 0.0, 0.0).is_err());
        assert!(MotorPropCoeffs::new(1.0, 0.0, 1.0, -1.0).is_err());
    }

    #[test]
    fn single_interior_maximum() {
        let c = probe();
        let grid: Vec<f64> = (0..10_000).map(|i| 10f64.powf(5.0 * i as f64 / 9_999.0)).collect();
        let eta: Vec<f64> = grid.iter().map(|&w| efficiency(&c, w).unwrap()).collect();
        let signs: Vec<bool> = eta.windows(2).map(|w| w[1] > w[0]).collect();
        let changes = signs.windows(2).filter(|s| s[0] != s[1]).count();
        assert_eq!(changes, 1);
    }

    #[test]
    fn f32_efficiency_stays_finite() {
        let c = MotorPropCoeffs::<f32>::new(1e-7, 1e-3, 2e-7, 1e-17).unwrap();
        let eta = efficiency(&c, 1e6).unwrap();
        assert!(eta.is_finite() && eta < 1e-2);
    }

    proptest! {
        #[test]
        fn electrical_exceeds_mechanical(q in 0.0f64..10.0, w in 0.0f64..5000.0, eta in 1e-3f64..=1.0) {
            prop_assert!(electrical_power(q, w, eta).unwrap() >= q * w);
        }

        #[test]
        fn monotone_in_arguments(q in 0.0f64..10.0, w in 0.0f64..5000.0, eta in 1e-3f64..=1.0, d in 0.0f64..1.0) {
            let base = electrical_power(q, w, eta).unwrap();
            prop_assert!(electrical_power(q + d, w, eta).unwrap() >= base);
            prop_assert!(electrical_power(q, w + d, eta).unwrap() >= base);
            let c = probe();
            prop_assert!(drag_torque(&c, w + d) >= drag_torque(&c, w));
        }
    }
}
