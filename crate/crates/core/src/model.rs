//! Domain types, physical constants and the built-in coefficient tables.
//!
//! Unit conventions used throughout the crate:
//!
//! * per-cell power `P_cell` is power per cell per amp-hour of cell capacity, in W/Ah;
//! * per-cell consumed energy `E_cell` is carried in **kJ/Ah** (the open-circuit
//!   polynomial coefficients are only consistent with this unit);
//! * the reference surface area of a vehicle is in **cm²**;
//! * everything else is SI.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::scalar::{lit, Scalar};

/// Cell voltage used to convert effective charge into energy for flight-time estimates.
pub const NOMINAL_CELL_VOLTAGE: f64 = 3.7;
/// End-of-discharge per-cell terminal voltage.
pub const DEFAULT_CUTOFF_VOLTAGE: f64 = 3.5;
/// Fully charged LiPo cell voltage; cutoffs must lie below it.
pub const MAX_CELL_VOLTAGE: f64 = 4.2;
pub const DEFAULT_AIR_DENSITY: f64 = 1.2;
pub const STANDARD_GRAVITY: f64 = 9.81;
pub const DEFAULT_FIGURE_OF_MERIT: f64 = 0.6;
pub const DEFAULT_MOTOR_EFFICIENCY: f64 = 0.75;

fn require_positive<T: Scalar>(name: &'static str, value: T) -> Result<T> {
    if value.is_finite() && value > T::zero() {
        Ok(value)
    } else {
        Err(Error::invalid(name, format!("must be finite and > 0, got {value}")))
    }
}

fn require_unit_interval<T: Scalar>(name: &'static str, value: T) -> Result<T> {
    if value.is_finite() && value > T::zero() && value <= T::one() {
        Ok(value)
    } else {
        Err(Error::invalid(name, format!("must lie in (0, 1], got {value}")))
    }
}

/// Atmosphere the vehicle flies in.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Environment<T> {
    air_density: T,
    gravity: T,
}

impl<T: Scalar> Environment<T> {
    pub fn new(air_density: T, gravity: T) -> Result<Self> {
        Ok(Self {
            air_density: require_positive("air_density", air_density)?,
            gravity: require_positive("gravity", gravity)?,
        })
    }

    /// Air density in kg/m³.
    pub fn air_density(&self) -> T {
        self.air_density
    }

    /// Gravitational acceleration in m/s².
    pub fn gravity(&self) -> T {
        self.gravity
    }

    pub fn with_air_density(self, air_density: T) -> Result<Self> {
        Self::new(air_density, self.gravity)
    }

    pub fn with_gravity(self, gravity: T) -> Result<Self> {
        Self::new(self.air_density, gravity)
    }

    /// Zero gravity is not a valid [`Environment`], but the hover model is
    /// well defined there (no thrust, no power); this bypasses the check for
    /// that limit only.
    pub fn weightless(air_density: T) -> Result<Self> {
        Ok(Self {
            air_density: require_positive("air_density", air_density)?,
            gravity: T::zero(),
        })
    }
}

/// ρ = 1.2 kg/m³, g = 9.81 m/s².
///
/// 1.2 rather than the ISA sea-level 1.225: it is the density that reproduces
/// the reference hover induced velocity of 4.94 m/s for the Mavic 2 sample vehicle.
pub fn default_environment<T: Scalar>() -> Environment<T> {
    Environment {
        air_density: lit(DEFAULT_AIR_DENSITY),
        gravity: lit(STANDARD_GRAVITY),
    }
}

impl<T: Scalar> Default for Environment<T> {
    fn default() -> Self {
        default_environment()
    }
}

/// Series/parallel topology of a LiPo pack, written `4S1P`, `6S2P`, `4S`, ...
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Topology {
    pub series: u32,
    pub parallel: u32,
}

impl Topology {
    pub fn new(series: u32, parallel: u32) -> Result<Self> {
        if series == 0 {
            return Err(Error::invalid("series_count", "must be >= 1"));
        }
        if parallel == 0 {
            return Err(Error::invalid("parallel_count", "must be >= 1"));
        }
        Ok(Self { series, parallel })
    }

    pub fn cell_count(&self) -> u32 {
        self.series * self.parallel
    }
}

impl FromStr for Topology {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::BadDesignator(s.to_string());
        let upper = s.trim().to_ascii_uppercase();
        let (series, rest) = upper.split_once('S').ok_or_else(bad)?;
        let series: u32 = series.parse().map_err(|_| bad())?;
        let parallel = if rest.is_empty() {
            1
        } else {
            let digits = rest.strip_suffix('P').ok_or_else(bad)?;
            digits.parse().map_err(|_| bad())?
        };
        Topology::new(series, parallel).map_err(|_| bad())
    }
}

impl fmt::Display for Topology {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}S{}P", self.series, self.parallel)
    }
}

/// A LiPo battery pack; the normalization basis for all battery math.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BatteryPack<T> {
    topology: Topology,
    pack_capacity: T,
    cutoff_voltage: T,
    nominal_cell_voltage: T,
}

impl<T: Scalar> BatteryPack<T> {
    pub fn new(topology: Topology, pack_capacity_ah: T) -> Result<Self> {
        Ok(Self {
            topology,
            pack_capacity: require_positive("pack_capacity", pack_capacity_ah)?,
            cutoff_voltage: lit(DEFAULT_CUTOFF_VOLTAGE),
            nominal_cell_voltage: lit(NOMINAL_CELL_VOLTAGE),
        })
    }

    /// Parses a designator such as `"4S1P"` and builds the pack.
    pub fn from_designator(designator: &str, pack_capacity_ah: T) -> Result<Self> {
        Self::new(designator.parse()?, pack_capacity_ah)
    }

    pub fn with_cutoff(mut self, cutoff_per_cell: T) -> Result<Self> {
        if !(cutoff_per_cell > T::zero() && cutoff_per_cell < lit(MAX_CELL_VOLTAGE)) {
            return Err(Error::invalid(
                "cutoff_voltage",
                format!("must lie in (0, {MAX_CELL_VOLTAGE}) V per cell, got {cutoff_per_cell}"),
            ));
        }
        self.cutoff_voltage = cutoff_per_cell;
        Ok(self)
    }

    pub fn with_capacity(self, pack_capacity_ah: T) -> Result<Self> {
        Ok(Self {
            pack_capacity: require_positive("pack_capacity", pack_capacity_ah)?,
            ..self
        })
    }

    pub fn topology(&self) -> Topology {
        self.topology
    }

    pub fn series_count(&self) -> u32 {
        self.topology.series
    }

    pub fn parallel_count(&self) -> u32 {
        self.topology.parallel
    }

    pub fn cell_count(&self) -> u32 {
        self.topology.cell_count()
    }

    /// Nominal pack capacity in Ah.
    pub fn pack_capacity(&self) -> T {
        self.pack_capacity
    }

    /// Capacity of one cell, `C_bat / N_P`, in Ah.
    pub fn cell_capacity(&self) -> T {
        self.pack_capacity / lit(self.topology.parallel as f64)
    }

    pub fn cutoff_voltage(&self) -> T {
        self.cutoff_voltage
    }

    pub fn nominal_cell_voltage(&self) -> T {
        self.nominal_cell_voltage
    }

    /// `N_cell · C_cell`, the divisor that turns pack power into W/Ah per cell.
    pub fn normalization(&self) -> T {
        lit::<T>(self.cell_count() as f64) * self.cell_capacity()
    }
}

/// Physical description of a multirotor; the input to the estimator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VehicleSpec<T> {
    mass: T,
    rotor_count: u32,
    propeller_radius: T,
    surface_area: T,
    pack: BatteryPack<T>,
    figure_of_merit: T,
    motor_efficiency: T,
}

impl<T: Scalar> VehicleSpec<T> {
    /// `mass` in kg, `propeller_radius` in m, `surface_area_cm2` in cm².
    pub fn new(
        mass: T,
        rotor_count: u32,
        propeller_radius: T,
        surface_area_cm2: T,
        pack: BatteryPack<T>,
    ) -> Result<Self> {
        if rotor_count == 0 {
            return Err(Error::invalid("rotor_count", "must be >= 1"));
        }
        Ok(Self {
            mass: require_positive("mass", mass)?,
            rotor_count,
            propeller_radius: require_positive("propeller_radius", propeller_radius)?,
            surface_area: require_positive("surface_area", surface_area_cm2)?,
            pack,
            figure_of_merit: lit(DEFAULT_FIGURE_OF_MERIT),
            motor_efficiency: lit(DEFAULT_MOTOR_EFFICIENCY),
        })
    }

    pub fn with_figure_of_merit(mut self, eta_p: T) -> Result<Self> {
        self.figure_of_merit = require_unit_interval("propeller_figure_of_merit", eta_p)?;
        Ok(self)
    }

    pub fn with_motor_efficiency(mut self, eta_m: T) -> Result<Self> {
        self.motor_efficiency = require_unit_interval("motor_efficiency", eta_m)?;
        Ok(self)
    }

    pub fn with_mass(mut self, mass: T) -> Result<Self> {
        self.mass = require_positive("mass", mass)?;
        Ok(self)
    }

    pub fn with_surface_area(mut self, surface_area_cm2: T) -> Result<Self> {
        self.surface_area = require_positive("surface_area", surface_area_cm2)?;
        Ok(self)
    }

    pub fn with_pack(mut self, pack: BatteryPack<T>) -> Self {
        self.pack = pack;
        self
    }

    pub fn mass(&self) -> T {
        self.mass
    }

    pub fn rotor_count(&self) -> u32 {
        self.rotor_count
    }

    pub fn propeller_radius(&self) -> T {
        self.propeller_radius
    }

    /// Reference surface area in cm².
    pub fn surface_area(&self) -> T {
        self.surface_area
    }

    pub fn pack(&self) -> &BatteryPack<T> {
        &self.pack
    }

    /// Propeller figure of merit η_P.
    pub fn figure_of_merit(&self) -> T {
        self.figure_of_merit
    }

    /// Constant motor efficiency η_M used when no fitted motor model is supplied.
    pub fn motor_efficiency(&self) -> T {
        self.motor_efficiency
    }
}

/// Internal-resistance model `R0 = max(b0 + b1·P̄_cell + b2·C_cell, R_min)`.
///
/// R0 multiplies the *capacity-normalized* current `P_cell / U` (A/Ah), so
/// its unit is Ω·Ah; the physical cell resistance is `R0 / C_cell`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResistanceModel<T> {
    b0: T,
    b1: T,
    b2: T,
    r_min: T,
}

impl<T: Scalar> ResistanceModel<T> {
    pub fn new(b0: T, b1: T, b2: T, r_min: T) -> Result<Self> {
        for (name, v) in [("b0", b0), ("b1", b1), ("b2", b2)] {
            if !v.is_finite() {
                return Err(Error::invalid(name, "must be finite"));
            }
        }
        Ok(Self {
            b0,
            b1,
            b2,
            r_min: require_positive("r_min", r_min)?,
        })
    }

    pub fn b0(&self) -> T {
        self.b0
    }
    pub fn b1(&self) -> T {
        self.b1
    }
    pub fn b2(&self) -> T {
        self.b2
    }
    pub fn r_min(&self) -> T {
        self.r_min
    }

    /// The unfloored linear part `b0 + b1·P̄ + b2·C`.
    pub fn linear(&self, avg_power: T, cell_capacity: T) -> T {
        self.b0 + self.b1 * avg_power + self.b2 * cell_capacity
    }

    pub fn eval(&self, avg_power: T, cell_capacity: T) -> T {
        self.linear(avg_power, cell_capacity).max(self.r_min)
    }
}

/// Coefficients of the one-time-constant cell model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BatteryParams<T> {
    ocv: [T; 4],
    resistance: ResistanceModel<T>,
    tau_rc: T,
    k: T,
}

impl<T: Scalar> BatteryParams<T> {
    /// `ocv` are `a0..a3` of `U0(E) = a0 + a1·E + a2·E² + a3·E³` with E in kJ/Ah.
    pub fn new(ocv: [T; 4], resistance: ResistanceModel<T>, tau_rc: T, k: T) -> Result<Self> {
        if !(ocv[0] >= lit(3.0) && ocv[0] <= lit(4.4)) {
            return Err(Error::invalid(
                "a0",
                format!("must lie in [3.0, 4.4] V, got {}", ocv[0]),
            ));
        }
        if ocv.iter().any(|a| !a.is_finite()) {
            return Err(Error::invalid("a1..a3", "must be finite"));
        }
        if !k.is_finite() {
            return Err(Error::invalid("k", "must be finite"));
        }
        Ok(Self {
            ocv,
            resistance,
            tau_rc: require_positive("tau_rc", tau_rc)?,
            k,
        })
    }

    pub fn ocv_coeffs(&self) -> [T; 4] {
        self.ocv
    }

    pub fn a0(&self) -> T {
        self.ocv[0]
    }

    pub fn resistance(&self) -> &ResistanceModel<T> {
        &self.resistance
    }

    pub fn r_min(&self) -> T {
        self.resistance.r_min
    }

    /// RC-branch time constant in s.
    pub fn tau_rc(&self) -> T {
        self.tau_rc
    }

    /// Steady-state RC voltage per unit per-cell power, V/(W/Ah).
    pub fn k(&self) -> T {
        self.k
    }

    pub fn with_resistance(self, resistance: ResistanceModel<T>) -> Self {
        Self { resistance, ..self }
    }
}

/// The identified LiPo cell coefficient set.
pub fn builtin_battery_params<T: Scalar>() -> BatteryParams<T> {
    BatteryParams {
        ocv: [lit(4.2), lit(-0.1102178), lit(0.0103368), lit(-4.3778e-4)],
        resistance: ResistanceModel {
            b0: lit(0.0015778),
            b1: lit(-7.7608e-5),
            b2: lit(0.0069498),
            r_min: lit(0.0045),
        },
        tau_rc: lit(3.3),
        k: lit(0.00104846),
    }
}

/// `v̂⁻¹ = c0 + c1·v_ih + c2·A` for one optimal-speed target.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpeedModel<T> {
    pub c0: T,
    pub c1: T,
    pub c2: T,
}

/// Empirical forward-flight surrogates: power ratios, optimal-speed models
/// and the cubic relative-capacity fit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EmpiricalCoeffs<T> {
    power_ratio_range: T,
    power_ratio_range_std: T,
    power_ratio_endurance: T,
    power_ratio_endurance_std: T,
    endurance_speed: SpeedModel<T>,
    range_speed: SpeedModel<T>,
    capacity_cubic: [T; 4],
}

impl<T: Scalar> EmpiricalCoeffs<T> {
    pub fn new(
        power_ratio_range: T,
        power_ratio_endurance: T,
        endurance_speed: SpeedModel<T>,
        range_speed: SpeedModel<T>,
        capacity_cubic: [T; 4],
    ) -> Result<Self> {
        if !(power_ratio_endurance > T::zero()
            && power_ratio_endurance < T::one()
            && T::one() < power_ratio_range
            && power_ratio_range.is_finite())
        {
            return Err(Error::invalid(
                "power ratios",
                format!(
                    "require 0 < endurance ratio < 1 < range ratio, got {power_ratio_endurance} / {power_ratio_range}"
                ),
            ));
        }
        for m in [endurance_speed, range_speed] {
            for c in [m.c0, m.c1, m.c2] {
                require_positive("speed model coefficient", c)?;
            }
        }
        if capacity_cubic.iter().any(|d| !d.is_finite()) {
            return Err(Error::invalid("d0..d3", "must be finite"));
        }
        Ok(Self {
            power_ratio_range,
            power_ratio_range_std: T::zero(),
            power_ratio_endurance,
            power_ratio_endurance_std: T::zero(),
            endurance_speed,
            range_speed,
            capacity_cubic,
        })
    }

    /// Attaches the fit standard deviations of the two power ratios.
    pub fn with_ratio_std(mut self, range_std: T, endurance_std: T) -> Self {
        self.power_ratio_range_std = range_std;
        self.power_ratio_endurance_std = endurance_std;
        self
    }

    /// `P_r / P_h`.
    pub fn power_ratio_range(&self) -> T {
        self.power_ratio_range
    }
    pub fn power_ratio_range_std(&self) -> T {
        self.power_ratio_range_std
    }
    /// `P_e / P_h`.
    pub fn power_ratio_endurance(&self) -> T {
        self.power_ratio_endurance
    }
    pub fn power_ratio_endurance_std(&self) -> T {
        self.power_ratio_endurance_std
    }
    pub fn endurance_speed(&self) -> SpeedModel<T> {
        self.endurance_speed
    }
    pub fn range_speed(&self) -> SpeedModel<T> {
        self.range_speed
    }
    /// `d0..d3` of the relative-capacity cubic in W/Ah.
    pub fn capacity_cubic(&self) -> [T; 4] {
        self.capacity_cubic
    }
}

/// Power ratios, optimal-speed models and capacity cubic fitted across a
/// population of simulated multirotors.
pub fn builtin_empirical_coeffs<T: Scalar>() -> EmpiricalCoeffs<T> {
    EmpiricalCoeffs {
        power_ratio_range: lit(1.092),
        power_ratio_range_std: lit(0.0361),
        power_ratio_endurance: lit(0.914),
        power_ratio_endurance_std: lit(0.0323),
        endurance_speed: SpeedModel {
            c0: lit(0.10188),
            c1: lit(0.071358),
            c2: lit(0.0007381),
        },
        range_speed: SpeedModel {
            c0: lit(0.041546),
            c1: lit(0.041122),
            c2: lit(0.00053292),
        },
        capacity_cubic: [lit(0.9876), lit(-0.0020), lit(-5.2484e-05), lit(1.2230e-07)],
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_environment_values() {
        let env = default_environment::<f64>();
        assert_eq!(env.air_density(), 1.2);
        assert_eq!(env.gravity(), 9.81);
    }

    #[test]
    fn builtin_tables_are_verbatim() {
        let p = builtin_battery_params::<f64>();
        assert_eq!(p.a0(), 4.2);
        assert_eq!(p.tau_rc(), 3.3);
        assert_eq!(p.r_min(), 0.0045);
        assert_eq!(p.k(), 0.00104846);
        assert_eq!(p.ocv_coeffs(), [4.2, -0.1102178, 0.0103368, -4.3778e-4]);
        let r = p.resistance();
        assert_eq!((r.b0(), r.b1(), r.b2()), (0.0015778, -7.7608e-5, 0.0069498));

        let c = builtin_empirical_coeffs::<f64>();
        assert_eq!(c.power_ratio_range(), 1.092);
        assert_eq!(c.power_ratio_endurance(), 0.914);
        assert_eq!(c.endurance_speed().c0, 0.10188);
        assert_eq!(c.capacity_cubic()[3], 1.2230e-07);
        assert_eq!(c.capacity_cubic()[0], 0.9876);
    }

    #[test]
    fn builtins_are_referentially_transparent() {
        let a = builtin_battery_params::<f64>();
        let b = builtin_battery_params::<f64>();
        assert_eq!(a, b);
        let a = builtin_empirical_coeffs::<f64>();
        let b = builtin_empirical_coeffs::<f64>();
        for (x, y) in a.capacity_cubic().iter().zip(b.capacity_cubic()) {
            assert_eq!(x.to_bits(), y.to_bits());
        }
    }

    #[test]
    fn builtin_empirical_coeffs_satisfy_constructor() {
        let c = builtin_empirical_coeffs::<f64>();
        let rebuilt = EmpiricalCoeffs::new(
            c.power_ratio_range(),
            c.power_ratio_endurance(),
            c.endurance_speed(),
            c.range_speed(),
            c.capacity_cubic(),
        )
        .unwrap()
        .with_ratio_std(0.0361, 0.0323);
        assert_eq!(rebuilt, c);
    }

    #[test]
    fn designators() {
        assert_eq!("4S1P".parse::<Topology>().unwrap(), Topology { series: 4, parallel: 1 });
        assert_eq!("6s2p".parse::<Topology>().unwrap(), Topology { series: 6, parallel: 2 });
        assert_eq!("4S".parse::<Topology>().unwrap(), Topology { series: 4, parallel: 1 });
        for bad in ["", "S", "4P", "0S1P", "4S0P", "4S1", "xS1P", "4S1P2"] {
            assert!(bad.parse::<Topology>().is_err(), "{bad:?} accepted");
        }
        assert_eq!(Topology::new(6, 2).unwrap().to_string(), "6S2P");
    }

    #[test]
    fn pack_derived_fields() {
        let pack = BatteryPack::<f64>::from_designator("6S2P", 5.2).unwrap();
        assert_eq!(pack.cell_count(), 12);
        assert_eq!(pack.cell_capacity(), 2.6);
        assert_eq!(pack.cutoff_voltage(), 3.5);
        assert_eq!(pack.nominal_cell_voltage(), 3.7);
        assert_eq!(pack.normalization(), 12.0 * 2.6);
    }

    #[test]
    fn invariant_violations_are_rejected() {
        assert!(Environment::<f64>::new(0.0, 9.81).is_err());
        assert!(Environment::<f64>::new(1.2, -1.0).is_err());
        assert!(BatteryPack::<f64>::from_designator("4S", 0.0).is_err());
        assert!(BatteryPack::<f64>::from_designator("4S", f64::NAN).is_err());
        let pack = BatteryPack::<f64>::from_designator("4S", 1.8).unwrap();
        assert!(pack.with_cutoff(0.0).is_err());
        assert!(pack.with_cutoff(4.2).is_err());
        assert!(pack.with_cutoff(3.3).is_ok());
        assert!(VehicleSpec::new(-1.0, 4, 0.1, 100.0, pack).is_err());
        assert!(VehicleSpec::new(1.0, 0, 0.1, 100.0, pack).is_err());
        assert!(VehicleSpec::new(1.0, 4, 0.0, 100.0, pack).is_err());
        assert!(VehicleSpec::new(1.0, 4, 0.1, 0.0, pack).is_err());
        let v = VehicleSpec::new(1.0, 4, 0.1, 100.0, pack).unwrap();
        assert!(v.with_figure_of_merit(0.0).is_err());
        assert!(v.with_figure_of_merit(1.01).is_err());
        assert!(v.with_figure_of_merit(1.0).is_ok());
        assert!(v.with_motor_efficiency(0.0).is_err());
        assert!(v.with_motor_efficiency(1.5).is_err());

        let p = builtin_battery_params::<f64>();
        let r = *p.resistance();
        assert!(ResistanceModel::new(0.0, 0.0, 0.0, 0.0).is_err());
        assert!(BatteryParams::new([4.5, 0.0, 0.0, 0.0], r, 3.3, 1e-3).is_err());
        assert!(BatteryParams::new([2.9, 0.0, 0.0, 0.0], r, 3.3, 1e-3).is_err());
        assert!(BatteryParams::new([4.2, 0.0, 0.0, 0.0], r, 0.0, 1e-3).is_err());

        let c = builtin_empirical_coeffs::<f64>();
        let e = c.endurance_speed();
        let rr = c.range_speed();
        assert!(EmpiricalCoeffs::new(0.9, 0.95, e, rr, c.capacity_cubic()).is_err());
        assert!(EmpiricalCoeffs::new(1.09, 1.01, e, rr, c.capacity_cubic()).is_err());
        let neg = SpeedModel { c0: -0.1, ..e };
        assert!(EmpiricalCoeffs::new(1.09, 0.91, neg, rr, c.capacity_cubic()).is_err());
    }

    #[test]
    fn works_in_single_precision() {
        let p = builtin_battery_params::<f32>();
        assert_eq!(p.a0(), 4.2f32);
        let env = default_environment::<f32>();
        assert_eq!(env.gravity(), 9.81f32);
    }
}
