//! Momentum-theory hover model and the empirical forward-flight surrogates.

use std::f64::consts::PI;

use crate::model::{EmpiricalCoeffs, Environment, SpeedModel, VehicleSpec};
use crate::scalar::{lit, Scalar};

/// Hover operating point of a multirotor.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HoverPoint<T> {
    /// Induced velocity at hover `v_ih`, m/s.
    pub induced_velocity: T,
    /// Mechanical hover power `P_h` of the whole vehicle, W.
    pub hover_power_mech: T,
    /// Thrust per rotor `T_h`, N.
    pub per_rotor_thrust: T,
}

/// Mechanical powers and speeds at the maximum-endurance and maximum-range
/// operating points.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CruiseTargets<T> {
    pub power_endurance_mech: T,
    pub power_range_mech: T,
    pub speed_endurance: T,
    pub speed_range: T,
}

/// Momentum theory at hover:
///
/// ```text
/// v_ih = sqrt(m·g / (2·ρ·π·r²·N_r))
/// P_h  = N_r·T_h·v_ih / η_P = (m·g)^{3/2} / (η_P·sqrt(2·ρ·π·N_r)·r)
/// ```
pub fn hover_point<T: Scalar>(spec: &VehicleSpec<T>, env: &Environment<T>) -> HoverPoint<T> {
    let rotors: T = lit(spec.rotor_count() as f64);
    let pi: T = lit(PI);
    let two: T = lit(2.0);
    let weight = spec.mass() * env.gravity();
    let r = spec.propeller_radius();
    let induced_velocity = (weight / (two * env.air_density() * pi * r * r * rotors)).sqrt();
    let hover_power_mech =
        weight.powf(lit(1.5)) / (spec.figure_of_merit() * (two * env.air_density() * pi * rotors).sqrt() * r);
    HoverPoint {
        induced_velocity,
        hover_power_mech,
        per_rotor_thrust: weight / rotors,
    }
}

/// `(P_e, P_r)` from the constant endurance/range power ratios.
pub fn cruise_powers<T: Scalar>(hover_power: T, coeffs: &EmpiricalCoeffs<T>) -> (T, T) {
    (
        coeffs.power_ratio_endurance() * hover_power,
        coeffs.power_ratio_range() * hover_power,
    )
}

/// One-sigma band on `(P_e, P_r)` propagated from the ratio fit deviations.
pub fn cruise_power_sigmas<T: Scalar>(hover_power: T, coeffs: &EmpiricalCoeffs<T>) -> (T, T) {
    (
        coeffs.power_ratio_endurance_std() * hover_power,
        coeffs.power_ratio_range_std() * hover_power,
    )
}

/// Denominator `c0 + c1·v_ih + c2·A` of the inverse normalized-speed model.
pub fn inverse_normalized_speed<T: Scalar>(model: &SpeedModel<T>, v_ih: T, surface_area_cm2: T) -> T {
    model.c0 + model.c1 * v_ih + model.c2 * surface_area_cm2
}

/// `(v_e, v_r)` with `v = v_ih / (c0 + c1·v_ih + c2·A)`, A in cm².
pub fn optimal_speeds<T: Scalar>(v_ih: T, surface_area_cm2: T, coeffs: &EmpiricalCoeffs<T>) -> (T, T) {
    let e = inverse_normalized_speed(&coeffs.endurance_speed(), v_ih, surface_area_cm2);
    let r = inverse_normalized_speed(&coeffs.range_speed(), v_ih, surface_area_cm2);
    (v_ih / e, v_ih / r)
}

pub fn cruise_targets<T: Scalar>(
    hover: &HoverPoint<T>,
    surface_area_cm2: T,
    coeffs: &EmpiricalCoeffs<T>,
) -> CruiseTargets<T> {
    let (power_endurance_mech, power_range_mech) = cruise_powers(hover.hover_power_mech, coeffs);
    let (speed_endurance, speed_range) = optimal_speeds(hover.induced_velocity, surface_area_cm2, coeffs);
    CruiseTargets {
        power_endurance_mech,
        power_range_mech,
        speed_endurance,
        speed_range,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{builtin_empirical_coeffs, default_environment, BatteryPack};
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn mavic() -> VehicleSpec<f64> {
        let pack = BatteryPack::from_designator("4S", 3.85).unwrap();
        VehicleSpec::new(0.909, 4, 0.11, 194.7, pack).unwrap()
    }

    #[test]
    fn mavic_hover_point() {
        let h = hover_point(&mavic(), &default_environment());
        assert_abs_diff_eq!(h.induced_velocity, 4.94, epsilon = 0.01);
        assert_abs_diff_eq!(h.hover_power_mech, 73.5, epsilon = 0.5);
        assert_abs_diff_eq!(h.per_rotor_thrust, 0.909 * 9.81 / 4.0, epsilon = 1e-12);
        // Both forms of the hover power agree.
        assert_abs_diff_eq!(
            h.hover_power_mech,
            4.0 * h.per_rotor_thrust * h.induced_velocity / 0.6,
            epsilon = 1e-9
        );
    }

    #[test]
    fn isa_density_override() {
        let env = default_environment().with_air_density(1.225).unwrap();
        let h = hover_point(&mavic(), &env);
        assert_abs_diff_eq!(h.induced_velocity, 4.89, epsilon = 0.005);
    }

    #[test]
    fn zero_gravity_gives_zero_power() {
        let env = Environment::weightless(1.2).unwrap();
        let h = hover_point(&mavic(), &env);
        assert_eq!(h.hover_power_mech, 0.0);
        assert_eq!(h.induced_velocity, 0.0);
    }

    #[test]
    fn mass_scaling_laws() {
        let base = mavic();
        let heavy = base.with_mass(base.mass() * 4.0).unwrap();
        let env = default_environment();
        let (a, b) = (hover_point(&base, &env), hover_point(&heavy, &env));
        assert_abs_diff_eq!(b.induced_velocity / a.induced_velocity, 2.0, epsilon = 1e-12);
        assert_abs_diff_eq!(b.hover_power_mech / a.hover_power_mech, 8.0, epsilon = 1e-12);
    }

    #[test]
    fn worked_example_cruise_powers() {
        let c = builtin_empirical_coeffs();
        let (pe, pr) = cruise_powers(81.9, &c);
        assert_abs_diff_eq!(pe, 74.9, epsilon = 0.05);
        assert_abs_diff_eq!(pr, 89.4, epsilon = 0.05);
        assert_eq!(cruise_powers(0.0, &c), (0.0, 0.0));
        let (pe, pr) = cruise_powers(100.0, &c);
        assert_abs_diff_eq!(pe, 91.4, epsilon = 1e-9);
        assert_abs_diff_eq!(pr, 109.2, epsilon = 1e-9);
        let (se, sr) = cruise_power_sigmas(100.0, &c);
        assert_abs_diff_eq!(se, 3.23, epsilon = 1e-9);
        assert_abs_diff_eq!(sr, 3.61, epsilon = 1e-9);
    }

    #[test]
    fn worked_example_speeds() {
        let c = builtin_empirical_coeffs();
        let denom = inverse_normalized_speed(&c.endurance_speed(), 4.94, 194.7);
        assert_abs_diff_eq!(denom, 0.10188 + 0.071358 * 4.94 + 0.0007381 * 194.7, epsilon = 1e-15);
        assert_abs_diff_eq!(denom, 0.598, epsilon = 5e-4);
        let (ve, vr) = optimal_speeds(4.94, 194.7, &c);
        assert_abs_diff_eq!(ve, 8.2, epsilon = 0.1);
        assert_abs_diff_eq!(vr, 14.2, epsilon = 0.1);
    }

    #[test]
    fn single_precision_hover() {
        let pack = BatteryPack::<f32>::from_designator("4S", 3.85).unwrap();
        let spec = VehicleSpec::new(0.909f32, 4, 0.11, 194.7, pack).unwrap();
        let h = hover_point(&spec, &default_environment());
        assert!((h.induced_velocity - 4.94).abs() < 0.01);
    }

    proptest! {
        #[test]
        fn range_speed_exceeds_endurance_speed(v_ih in 1e-3f64..=20.0, area in 1e-3f64..=1000.0) {
            let (ve, vr) = optimal_speeds(v_ih, area, &builtin_empirical_coeffs());
            prop_assert!(ve > 0.0);
            prop_assert!(vr > ve);
        }

        #[test]
        fn power_ratios_straddle_hover(ph in 1e-6f64..1e6) {
            let (pe, pr) = cruise_powers(ph, &builtin_empirical_coeffs());
            prop_assert!(pe < ph && ph < pr);
        }

        #[test]
        fn density_homogeneity(s in 0.1f64..10.0, mass in 0.05f64..20.0) {
            let spec = mavic().with_mass(mass).unwrap();
            let env = default_environment::<f64>();
            let scaled = env.with_air_density(env.air_density() * s).unwrap();
            let (a, b) = (hover_point(&spec, &env), hover_point(&spec, &scaled));
            let f = s.powf(-0.5);
            prop_assert!((b.induced_velocity / a.induced_velocity - f).abs() < 1e-12);
            prop_assert!((b.hover_power_mech / a.hover_power_mech - f).abs() < 1e-12);
        }
    }
}
