//! Range, endurance and optimal cruise speed of battery-powered multirotors.
//!
//! The estimate chains a momentum-theory hover model, empirical forward-flight
//! power ratios, a motor efficiency model and a one-time-constant battery
//! model. Model coefficients can be identified from thrust-stand and
//! battery-cycler logs.
//!
//! Everything numeric is generic over [`Scalar`] (`f32` or `f64`); the `*F64`
//! aliases below name the common double-precision instantiations.

// `!(x > 0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod aero;
pub mod battery;
pub mod config;
pub mod error;
pub mod estimator;
pub mod fixtures;
pub mod identification;
pub mod linalg;
pub mod model;
pub mod motor;
pub mod ode;
pub mod scalar;

pub use error::{Error, Result};
pub use scalar::Scalar;

pub type EnvironmentF64 = model::Environment<f64>;
pub type BatteryPackF64 = model::BatteryPack<f64>;
pub type VehicleSpecF64 = model::VehicleSpec<f64>;
pub type BatteryParamsF64 = model::BatteryParams<f64>;
pub type EmpiricalCoeffsF64 = model::EmpiricalCoeffs<f64>;
pub type MotorPropCoeffsF64 = motor::MotorPropCoeffs<f64>;
pub type DischargeTraceF64 = battery::DischargeTrace<f64>;
pub type DischargeLogF64 = identification::DischargeLog<f64>;
pub type ThrustLogF64 = identification::ThrustLog<f64>;
pub type PerformanceReportF64 = estimator::PerformanceReport<f64>;
