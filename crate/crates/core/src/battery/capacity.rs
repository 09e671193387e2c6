use crate::battery::sim::{DischargeTrace, Termination};
use crate::error::{Error, Result};
use crate::model::{BatteryPack, EmpiricalCoeffs};
use crate::scalar::{lit, Scalar};

/// Upper end of the per-cell power range the cubic was fitted on, W/Ah.
pub const CUBIC_FIT_DOMAIN_MAX: f64 = 100.0;

/// Energy and charge actually delivered before cutoff.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EffectiveCapacity<T> {
    pub energy_wh: T,
    /// Energy converted back to charge at the nominal cell voltage, Ah.
    pub charge_ah: T,
    /// `charge_ah / C_bat`.
    pub kappa: T,
}

/// Effective capacity of a discharge that ended at the cutoff voltage.
///
/// Energy is mean pack power times discharge time; the charge equivalent uses
/// the nominal cell voltage so it is comparable with the pack rating.
pub fn effective_capacity<T: Scalar>(trace: &DischargeTrace<T>, pack: &BatteryPack<T>) -> Result<EffectiveCapacity<T>> {
    if trace.termination != Termination::ReachedCutoff {
        return Err(Error::UndefinedCapacity(trace.termination.label().to_string()));
    }
    let last = trace
        .samples
        .last()
        .ok_or_else(|| Error::UndefinedCapacity("empty trace".into()))?;
    // E_cell [kJ/Ah] · N_cell · C_cell [Ah] is the pack energy in kJ.
    let energy_wh = last.e_cell * pack.normalization() / lit(3.6);
    let charge_ah = energy_wh / (pack.nominal_cell_voltage() * lit(pack.series_count() as f64));
    Ok(EffectiveCapacity {
        energy_wh,
        charge_ah,
        kappa: charge_ah / pack.pack_capacity(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CubicCapacity<T> {
    pub kappa: T,
    /// False when `P_cell` lies outside the fitted range `[0, 100]` W/Ah.
    pub in_fit_domain: bool,
}

/// Relative capacity `κ = d0 + d1·P + d2·P² + d3·P³` at per-cell power `P` (W/Ah).
pub fn relative_capacity_cubic<T: Scalar>(coeffs: &EmpiricalCoeffs<T>, p_cell: T) -> CubicCapacity<T> {
    let [d0, d1, d2, d3] = coeffs.capacity_cubic();
    let p = p_cell;
    CubicCapacity {
        kappa: d0 + p * (d1 + p * (d2 + p * d3)),
        in_fit_domain: p >= T::zero() && p <= lit(CUBIC_FIT_DOMAIN_MAX),
    }
}

/// Smallest positive per-cell power at which the cubic reaches zero, W/Ah.
///
/// Past this point the polynomial has no physical meaning (it turns back up
/// at a few hundred W/Ah). `None` if it stays positive up to 10⁴ W/Ah.
pub fn cubic_capacity_limit<T: Scalar>(coeffs: &EmpiricalCoeffs<T>) -> Option<T> {
    let k = |p: T| relative_capacity_cubic(coeffs, p).kappa;
    let step: T = lit(1.0);
    let mut lo = T::zero();
    if !(k(lo) > T::zero()) {
        return Some(T::zero());
    }
    while lo < lit(1e4) {
        let hi = lo + step;
        if !(k(hi) > T::zero()) {
            let (mut a, mut b) = (lo, hi);
            for _ in 0..200 {
                let m = (a + b) / lit(2.0);
                if m <= a || m >= b {
                    break;
                }
                if k(m) > T::zero() {
                    a = m;
                } else {
                    b = m;
                }
            }
            return Some(b);
        }
        lo = hi;
    }
    None
}
