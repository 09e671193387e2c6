//! The eight-step range and endurance estimate.
//!
//! 1. hover point from momentum theory
//! 2. cruise powers from the endurance/range power ratios
//! 3. electrical power through the motor efficiency
//! 4. per-cell power
//! 5. effective capacity from the relative-capacity cubic
//! 6. flight times at nominal cell voltage
//! 7. optimal speeds
//! 8. range `x_r = t_r·v_r`

use std::fmt::Write as _;

use crate::aero::{cruise_power_sigmas, cruise_powers, hover_point, optimal_speeds};
use crate::battery::{
    cubic_capacity_limit, effective_capacity, normalize_power, relative_capacity_cubic, simulate_discharge,
    ConstantPower, DEFAULT_DT,
};
use crate::error::{Error, Result};
use crate::model::{BatteryParams, EmpiricalCoeffs, Environment, VehicleSpec};
use crate::motor::{efficiency, electrical_from_mechanical, MotorPropCoeffs};
use crate::scalar::{lit, to_f64, Scalar};

/// How mechanical power is converted to electrical power.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MotorModel<T> {
    /// The vehicle's constant `η_M`.
    ConstantEfficiency,
    /// Speed-dependent efficiency of a fitted motor-propeller pairing, each
    /// rotor carrying `1/N_r` of the mechanical power.
    Fitted(MotorPropCoeffs<T>),
}

/// Options for the time-stepped battery cross-check.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FullBatteryOptions<T> {
    pub dt: T,
    /// Longest simulated flight, s.
    pub horizon: T,
}

impl<T: Scalar> Default for FullBatteryOptions<T> {
    fn default() -> Self {
        Self {
            dt: lit(DEFAULT_DT),
            horizon: lit(86_400.0),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EstimateOptions<T> {
    /// Use this mechanical hover power (W) instead of the momentum-theory value.
    pub hover_power: Option<T>,
    pub motor: MotorModel<T>,
    /// Also simulate both cruise points to cutoff with the full cell model.
    pub full_battery: Option<FullBatteryOptions<T>>,
}

impl<T: Scalar> Default for EstimateOptions<T> {
    fn default() -> Self {
        Self {
            hover_power: None,
            motor: MotorModel::ConstantEfficiency,
            full_battery: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HoverPowerSource {
    Computed,
    Injected,
}

impl HoverPowerSource {
    pub fn label(self) -> &'static str {
        match self {
            HoverPowerSource::Computed => "computed",
            HoverPowerSource::Injected => "injected",
        }
    }
}

/// Times and capacities from constant-power simulation to cutoff.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FullBatteryEstimate<T> {
    pub c_eff_e: T,
    pub c_eff_r: T,
    pub t_e: T,
    pub t_r: T,
    pub x_r: T,
}

/// Every intermediate of the estimate. Powers in W, per-cell powers in W/Ah,
/// capacities in Ah, times in s, speeds in m/s, range in m.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PerformanceReport<T> {
    pub v_ih: T,
    pub p_h: T,
    pub p_h_source: HoverPowerSource,
    pub p_e: T,
    pub p_r: T,
    /// One-sigma bands on `p_e`, `p_r` from the ratio fit spread.
    pub p_e_sigma: T,
    pub p_r_sigma: T,
    pub eta_e: T,
    pub eta_r: T,
    pub p_mot_e: T,
    pub p_mot_r: T,
    pub p_cell_e: T,
    pub p_cell_r: T,
    pub kappa_e: T,
    pub kappa_r: T,
    /// False when the per-cell power lies outside the range the cubic was fitted on.
    pub kappa_e_in_domain: bool,
    pub kappa_r_in_domain: bool,
    pub c_eff_e: T,
    pub c_eff_r: T,
    pub t_e: T,
    pub t_r: T,
    pub v_e: T,
    pub v_r: T,
    pub x_r: T,
    pub full_battery: Option<FullBatteryEstimate<T>>,
}

fn motor_power<T: Scalar>(spec: &VehicleSpec<T>, model: &MotorModel<T>, mech: T) -> Result<(T, T)> {
    let eta = match model {
        MotorModel::ConstantEfficiency => spec.motor_efficiency(),
        MotorModel::Fitted(c) => {
            let per_rotor = mech / lit(spec.rotor_count() as f64);
            efficiency(c, c.speed_for_power(per_rotor))?
        }
    };
    Ok((eta, electrical_from_mechanical(mech, eta)?))
}

/// `t = C_eff·U_nom·N_S·3600 / P_mot`.
pub fn flight_time<T: Scalar>(spec: &VehicleSpec<T>, c_eff_ah: T, p_mot: T) -> T {
    let pack = spec.pack();
    c_eff_ah * pack.nominal_cell_voltage() * lit(pack.series_count() as f64) * lit(3600.0) / p_mot
}

fn simulate_to_cutoff<T: Scalar>(
    spec: &VehicleSpec<T>,
    params: &BatteryParams<T>,
    p_mot: T,
    opts: &FullBatteryOptions<T>,
) -> Result<(T, T)> {
    let pack = spec.pack();
    let profile = ConstantPower::new(p_mot, opts.horizon)?;
    let trace = simulate_discharge(pack, params, &profile, opts.dt, pack.cutoff_voltage())?;
    trace.check_feasible()?;
    let cap = effective_capacity(&trace, pack)?;
    Ok((cap.charge_ah, trace.end_time()))
}

pub fn estimate<T: Scalar>(
    spec: &VehicleSpec<T>,
    env: &Environment<T>,
    coeffs: &EmpiricalCoeffs<T>,
    params: &BatteryParams<T>,
    options: &EstimateOptions<T>,
) -> Result<PerformanceReport<T>> {
    // 1
    let hover = hover_point(spec, env);
    let (p_h, p_h_source) = match options.hover_power {
        Some(p) if p > T::zero() && p.is_finite() => (p, HoverPowerSource::Injected),
        Some(p) => {
            return Err(Error::invalid(
                "hover_power",
                format!("must be finite and > 0, got {p}"),
            ))
        }
        None => (hover.hover_power_mech, HoverPowerSource::Computed),
    };
    // 2
    let (p_e, p_r) = cruise_powers(p_h, coeffs);
    let (p_e_sigma, p_r_sigma) = cruise_power_sigmas(p_h, coeffs);
    // 3
    let (eta_e, p_mot_e) = motor_power(spec, &options.motor, p_e)?;
    let (eta_r, p_mot_r) = motor_power(spec, &options.motor, p_r)?;
    // 4
    let pack = spec.pack();
    let p_cell_e = normalize_power(p_mot_e, pack);
    let p_cell_r = normalize_power(p_mot_r, pack);
    // 7 is pure geometry; compute it early so the time-stepped path can use v_r.
    let (v_e, v_r) = optimal_speeds(hover.induced_velocity, spec.surface_area(), coeffs);
    // The time-stepped cross-check runs first so that a power the cells cannot
    // deliver is reported as such rather than as a cubic domain error.
    let full_battery = match &options.full_battery {
        None => None,
        Some(fo) => {
            let (c_eff_e, t_e) = simulate_to_cutoff(spec, params, p_mot_e, fo)?;
            let (c_eff_r, t_r) = simulate_to_cutoff(spec, params, p_mot_r, fo)?;
            Some(FullBatteryEstimate {
                c_eff_e,
                c_eff_r,
                t_e,
                t_r,
                x_r: t_r * v_r,
            })
        }
    };

    // 5
    let ke = relative_capacity_cubic(coeffs, p_cell_e);
    let kr = relative_capacity_cubic(coeffs, p_cell_r);
    let limit = cubic_capacity_limit(coeffs);
    for p in [p_cell_e, p_cell_r] {
        if limit.is_some_and(|l| p >= l) {
            return Err(Error::Domain {
                op: "relative_capacity_cubic",
                reason: format!(
                    "P_cell = {p} W/Ah is past the capacity cubic's zero at {} W/Ah",
                    limit.map_or(f64::NAN, to_f64)
                ),
            });
        }
    }
    let c_eff_e = ke.kappa * pack.pack_capacity();
    let c_eff_r = kr.kappa * pack.pack_capacity();
    // 6
    let t_e = flight_time(spec, c_eff_e, p_mot_e);
    let t_r = flight_time(spec, c_eff_r, p_mot_r);
    // 8
    let x_r = t_r * v_r;

    Ok(PerformanceReport {
        v_ih: hover.induced_velocity,
        p_h,
        p_h_source,
        p_e,
        p_r,
        p_e_sigma,
        p_r_sigma,
        eta_e,
        eta_r,
        p_mot_e,
        p_mot_r,
        p_cell_e,
        p_cell_r,
        kappa_e: ke.kappa,
        kappa_r: kr.kappa,
        kappa_e_in_domain: ke.in_fit_domain,
        kappa_r_in_domain: kr.in_fit_domain,
        c_eff_e,
        c_eff_r,
        t_e,
        t_r,
        v_e,
        v_r,
        x_r,
        full_battery,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepParameter {
    /// Take-off mass, kg.
    Mass,
    /// Pack capacity, Ah.
    Capacity,
    /// Reference surface area, cm².
    SurfaceArea,
}

impl SweepParameter {
    pub fn label(self) -> &'static str {
        match self {
            SweepParameter::Mass => "mass_kg",
            SweepParameter::Capacity => "capacity_ah",
            SweepParameter::SurfaceArea => "surface_area_cm2",
        }
    }

    pub fn apply<T: Scalar>(self, spec: &VehicleSpec<T>, value: T) -> Result<VehicleSpec<T>> {
        match self {
            SweepParameter::Mass => spec.with_mass(value),
            SweepParameter::Capacity => Ok(spec.with_pack(spec.pack().with_capacity(value)?)),
            SweepParameter::SurfaceArea => spec.with_surface_area(value),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepPoint<T> {
    pub value: T,
    pub report: Result<PerformanceReport<T>>,
}

/// One estimate per grid value, in grid order. A failing point records its
/// error and the sweep continues.
pub fn sweep<T: Scalar>(
    template: &VehicleSpec<T>,
    env: &Environment<T>,
    coeffs: &EmpiricalCoeffs<T>,
    params: &BatteryParams<T>,
    options: &EstimateOptions<T>,
    parameter: SweepParameter,
    grid: &[T],
) -> Result<Vec<SweepPoint<T>>> {
    if grid.is_empty() {
        return Err(Error::invalid("grid", "must contain at least one value"));
    }
    Ok(grid
        .iter()
        .map(|&value| SweepPoint {
            value,
            report: parameter
                .apply(template, value)
                .and_then(|spec| estimate(&spec, env, coeffs, params, options)),
        })
        .collect())
}

/// Column order of [`PerformanceReport::csv_row`]. Columns are appended,
/// never reordered. The `full_*` columns are empty when the time-stepped
/// cross-check was not run.
pub const REPORT_COLUMNS: [&str; 30] = [
    "v_ih_m_s",
    "p_h_w",
    "p_h_source",
    "p_e_w",
    "p_r_w",
    "p_e_sigma_w",
    "p_r_sigma_w",
    "eta_e",
    "eta_r",
    "p_mot_e_w",
    "p_mot_r_w",
    "p_cell_e_w_per_ah",
    "p_cell_r_w_per_ah",
    "kappa_e",
    "kappa_r",
    "kappa_e_in_domain",
    "kappa_r_in_domain",
    "c_eff_e_ah",
    "c_eff_r_ah",
    "t_e_s",
    "t_r_s",
    "v_e_m_s",
    "v_r_m_s",
    "x_r_m",
    "battery_model",
    "full_c_eff_e_ah",
    "full_c_eff_r_ah",
    "full_t_e_s",
    "full_t_r_s",
    "full_x_r_m",
];

fn num<T: Scalar>(v: T) -> String {
    format!("{:?}", to_f64(v))
}

impl<T: Scalar> PerformanceReport<T> {
    /// `"cubic"`, or `"cubic+full"` when the time-stepped cross-check ran.
    pub fn battery_model_label(&self) -> &'static str {
        if self.full_battery.is_some() {
            "cubic+full"
        } else {
            "cubic"
        }
    }

    /// Field values in [`REPORT_COLUMNS`] order.
    pub fn csv_row(&self) -> Vec<String> {
        let mut row = vec![
            num(self.v_ih),
            num(self.p_h),
            self.p_h_source.label().to_string(),
            num(self.p_e),
            num(self.p_r),
            num(self.p_e_sigma),
            num(self.p_r_sigma),
            num(self.eta_e),
            num(self.eta_r),
            num(self.p_mot_e),
            num(self.p_mot_r),
            num(self.p_cell_e),
            num(self.p_cell_r),
            num(self.kappa_e),
            num(self.kappa_r),
            self.kappa_e_in_domain.to_string(),
            self.kappa_r_in_domain.to_string(),
            num(self.c_eff_e),
            num(self.c_eff_r),
            num(self.t_e),
            num(self.t_r),
            num(self.v_e),
            num(self.v_r),
            num(self.x_r),
            self.battery_model_label().to_string(),
        ];
        match &self.full_battery {
            Some(f) => row.extend([f.c_eff_e, f.c_eff_r, f.t_e, f.t_r, f.x_r].map(num)),
            None => row.extend(std::iter::repeat(String::new()).take(5)),
        }
        row
    }

    /// `column = value` lines in [`REPORT_COLUMNS`] order, omitting empty values.
    pub fn to_key_value(&self) -> String {
        let mut s = String::new();
        for (k, v) in REPORT_COLUMNS.iter().zip(self.csv_row()) {
            if v.is_empty() {
                continue;
            }
            let quoted = v.parse::<f64>().is_err() && v != "true" && v != "false";
            if quoted {
                let _ = writeln!(s, "{k} = \"{v}\"");
            } else {
                let _ = writeln!(s, "{k} = {v}");
            }
        }
        s
    }

    /// One line per pipeline step, in order.
    pub fn step_trace(&self, spec: &VehicleSpec<T>) -> Vec<String> {
        let f = to_f64::<T>;
        let mut lines = vec![
            format!(
                "step 1 (hover, momentum theory): v_ih = {:.3} m/s, P_h = {:.2} W [{}]",
                f(self.v_ih),
                f(self.p_h),
                self.p_h_source.label()
            ),
            format!(
                "step 2 (cruise power ratios): P_e = {:.2} ± {:.2} W, P_r = {:.2} ± {:.2} W",
                f(self.p_e),
                f(self.p_e_sigma),
                f(self.p_r),
                f(self.p_r_sigma)
            ),
            format!(
                "step 3 (motor efficiency): eta_e = {:.3}, eta_r = {:.3}, P_mot_e = {:.2} W, P_mot_r = {:.2} W",
                f(self.eta_e),
                f(self.eta_r),
                f(self.p_mot_e),
                f(self.p_mot_r)
            ),
            format!(
                "step 4 (per-cell power, {} {} Ah): P_cell_e = {:.3} W/Ah, P_cell_r = {:.3} W/Ah",
                spec.pack().topology(),
                f(spec.pack().pack_capacity()),
                f(self.p_cell_e),
                f(self.p_cell_r)
            ),
            format!(
                "step 5 (relative capacity cubic): kappa_e = {:.5}, kappa_r = {:.5}, C_eff_e = {:.4} Ah, C_eff_r = {:.4} Ah{}",
                f(self.kappa_e),
                f(self.kappa_r),
                f(self.c_eff_e),
                f(self.c_eff_r),
                if self.kappa_e_in_domain && self.kappa_r_in_domain { "" } else { " [outside fitted range]" }
            ),
            format!(
                "step 6 (flight time at 3.7 V/cell): t_e = {:.1} s ({:.2} min), t_r = {:.1} s ({:.2} min)",
                f(self.t_e),
                f(self.t_e) / 60.0,
                f(self.t_r),
                f(self.t_r) / 60.0
            ),
            format!(
                "step 7 (optimal speeds): v_e = {:.2} m/s, v_r = {:.2} m/s",
                f(self.v_e),
                f(self.v_r)
            ),
            format!(
                "step 8 (range): x_r = t_r * v_r = {:.0} m ({:.2} km)",
                f(self.x_r),
                f(self.x_r) / 1000.0
            ),
        ];
        if let Some(fb) = &self.full_battery {
            lines.push(format!(
                "full battery model (simulated to cutoff): C_eff_e = {:.4} Ah, C_eff_r = {:.4} Ah, t_e = {:.1} s, t_r = {:.1} s, x_r = {:.0} m",
                f(fb.c_eff_e),
                f(fb.c_eff_r),
                f(fb.t_e),
                f(fb.t_r),
                f(fb.x_r)
            ));
        }
        lines
    }
}
