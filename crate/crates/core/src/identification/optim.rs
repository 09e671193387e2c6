//! Levenberg-Marquardt with finite-difference Jacobians.

use crate::error::{Error, Result};
use crate::linalg::{lstsq, rms};
use crate::scalar::{lit, to_f64, Scalar};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LmOptions<T> {
    pub max_iterations: usize,
    /// Stop once an accepted step improves the RMSE by less than this fraction.
    pub relative_tolerance: T,
    /// Central-difference step, relative to `max(|x_i|, 1)`.
    pub fd_step: T,
    pub initial_damping: T,
}

impl<T: Scalar> Default for LmOptions<T> {
    fn default() -> Self {
        Self {
            max_iterations: 500,
            relative_tolerance: lit(1e-8),
            fd_step: lit(1e-6),
            initial_damping: lit(1e-3),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LmOutcome<T> {
    pub x: Vec<T>,
    pub residuals: Vec<T>,
    pub rmse: T,
    pub iterations: usize,
    /// RMSE of the initial point followed by each accepted iterate.
    pub history: Vec<T>,
    pub converged: bool,
}

const MAX_DAMPING: f64 = 1e12;

/// Minimizes `‖r(x)‖₂` starting from `x0`.
///
/// `residuals` returns `None` where the model cannot be evaluated; such trial
/// points are rejected like any non-improving step. Only accepted steps move
/// the iterate, so the objective history is nonincreasing.
pub fn levenberg_marquardt<T, F>(residuals: F, x0: &[T], opts: &LmOptions<T>) -> Result<LmOutcome<T>>
where
    T: Scalar,
    F: Fn(&[T]) -> Option<Vec<T>>,
{
    let non_finite = |x: &[T]| Error::NonFiniteObjective {
        params: x.iter().map(|v| to_f64(*v)).collect(),
    };
    let eval = |x: &[T]| residuals(x).filter(|r| r.iter().all(|v| v.is_finite()));

    let mut x = x0.to_vec();
    let mut r = eval(&x).ok_or_else(|| non_finite(&x))?;
    let mut cost = rms(&r);
    let mut history = vec![cost];
    let mut lambda = opts.initial_damping;
    let mut iterations = 0;
    let mut converged = false;

    'outer: while iterations < opts.max_iterations {
        if cost == T::zero() {
            converged = true;
            break;
        }
        let jac = jacobian(&eval, &x, &r, opts.fd_step).ok_or_else(|| non_finite(&x))?;
        let col_norms: Vec<T> = jac
            .iter()
            .map(|c| {
                c.iter()
                    .fold(T::zero(), |a, v| a + *v * *v)
                    .sqrt()
                    .max(T::min_positive_value())
            })
            .collect();
        loop {
            iterations += 1;
            // Augmented system [J; √λ·D] δ = [−r; 0].
            let sqrt_l = lambda.sqrt();
            let n = x.len();
            let cols: Vec<Vec<T>> = jac
                .iter()
                .enumerate()
                .map(|(j, c)| {
                    let mut col = c.clone();
                    col.extend((0..n).map(|i| if i == j { sqrt_l * col_norms[j] } else { T::zero() }));
                    col
                })
                .collect();
            let rhs: Vec<T> = r.iter().map(|v| -*v).chain((0..n).map(|_| T::zero())).collect();
            let step = lstsq(&cols, &rhs).ok();
            let trial: Option<(Vec<T>, Vec<T>)> = step.and_then(|d| {
                let xt: Vec<T> = x.iter().zip(&d).map(|(a, b)| *a + *b).collect();
                eval(&xt).map(|rt| (xt, rt))
            });
            match trial {
                Some((xt, rt)) if rms(&rt) < cost => {
                    let new_cost = rms(&rt);
                    let rel = (cost - new_cost) / cost;
                    x = xt;
                    r = rt;
                    cost = new_cost;
                    history.push(cost);
                    lambda = (lambda / lit(3.0)).max(lit(1e-12));
                    if rel < opts.relative_tolerance {
                        converged = true;
                        break 'outer;
                    }
                    break;
                }
                _ => {
                    lambda *= lit(4.0);
                    if lambda > lit(MAX_DAMPING) {
                        // No descent direction left at this resolution.
                        converged = true;
                        break 'outer;
                    }
                    if iterations >= opts.max_iterations {
                        break 'outer;
                    }
                }
            }
        }
    }

    Ok(LmOutcome {
        x,
        rmse: cost,
        residuals: r,
        iterations,
        history,
        converged,
    })
}

/// Column-major central-difference Jacobian; falls back to one-sided
/// differences where one side cannot be evaluated.
fn jacobian<T: Scalar>(eval: &impl Fn(&[T]) -> Option<Vec<T>>, x: &[T], r0: &[T], rel_step: T) -> Option<Vec<Vec<T>>> {
    (0..x.len())
        .map(|j| {
            let h = rel_step * x[j].abs().max(T::one());
            let mut xp = x.to_vec();
            xp[j] += h;
            let mut xm = x.to_vec();
            xm[j] -= h;
            match (eval(&xp), eval(&xm)) {
                (Some(rp), Some(rm)) => Some(rp.iter().zip(&rm).map(|(a, b)| (*a - *b) / (h + h)).collect()),
                (Some(rp), None) => Some(rp.iter().zip(r0).map(|(a, b)| (*a - *b) / h).collect()),
                (None, Some(rm)) => Some(r0.iter().zip(&rm).map(|(a, b)| (*a - *b) / h).collect()),
                (None, None) => None,
            }
        })
        .collect()
}
