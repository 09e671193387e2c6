//! Fixed-step explicit integrators.

use crate::scalar::{lit, Scalar};

/// One classical fourth-order Runge-Kutta step of `dy/dt = f(t, y)`.
pub fn rk4_step<T: Scalar>(f: impl Fn(T, T) -> T, t: T, y: T, h: T) -> T {
    let half = h * lit(0.5);
    let k1 = f(t, y);
    let k2 = f(t + half, y + half * k1);
    let k3 = f(t + half, y + half * k2);
    let k4 = f(t + h, y + h * k3);
    y + h / lit(6.0) * (k1 + lit::<T>(2.0) * (k2 + k3) + k4)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponential_decay_fourth_order() {
        // y' = -y, y(0) = 1; global error should drop ~16x per halving.
        let run = |h: f64| {
            let n = (1.0 / h).round() as usize;
            (0..n).fold(1.0, |y, i| rk4_step(|_, y| -y, i as f64 * h, y, h))
        };
        let exact = (-1.0f64).exp();
        let e1 = (run(0.1) - exact).abs();
        let e2 = (run(0.05) - exact).abs();
        assert!(e1 < 1e-6);
        let order = (e1 / e2).log2();
        assert!((order - 4.0).abs() < 0.2, "observed order {order}");
    }

    #[test]
    fn time_dependent_rhs() {
        // y' = t  =>  y(1) = 1/2 exactly for a 4th-order method.
        let y = (0..10).fold(0.0, |y, i| rk4_step(|t, _| t, i as f64 * 0.1, y, 0.1));
        assert!((y - 0.5).abs() < 1e-14);
    }
}
