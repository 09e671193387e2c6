//! Dense least squares for the small, tall systems the identification fits produce.

use crate::error::{Error, Result};
use crate::scalar::{lit, Scalar};

/// Solves `min ‖A·x − b‖₂` with `A` given column by column.
///
/// Columns are scaled to unit max-norm before a Householder QR, so regressors
/// spanning many orders of magnitude (Ω vs. Ω⁶) stay well conditioned.
pub fn lstsq<T: Scalar>(columns: &[Vec<T>], b: &[T]) -> Result<Vec<T>> {
    let n = columns.len();
    let m = b.len();
    if n == 0 {
        return Ok(Vec::new());
    }
    if columns.iter().any(|c| c.len() != m) {
        return Err(Error::Fit("column length does not match right-hand side".into()));
    }
    if m < n {
        return Err(Error::RankDeficient(format!("{m} equations for {n} unknowns")));
    }

    let mut scale = Vec::with_capacity(n);
    let mut a: Vec<Vec<T>> = Vec::with_capacity(n);
    for (j, col) in columns.iter().enumerate() {
        let s = col.iter().fold(T::zero(), |acc, v| acc.max(v.abs()));
        if !(s > T::zero()) || !s.is_finite() {
            return Err(Error::RankDeficient(format!("column {j} is zero or non-finite")));
        }
        scale.push(s);
        a.push(col.iter().map(|v| *v / s).collect());
    }
    let mut rhs = b.to_vec();

    // Householder QR, in place: a[j][j..] holds R's diagonal and below-diagonal reflectors are discarded.
    let mut diag = vec![T::zero(); n];
    for j in 0..n {
        let norm = a[j][j..].iter().fold(T::zero(), |acc, v| acc + *v * *v).sqrt();
        if norm == T::zero() {
            diag[j] = T::zero();
            continue;
        }
        let alpha = if a[j][j] > T::zero() { -norm } else { norm };
        let mut v: Vec<T> = a[j][j..].to_vec();
        v[0] -= alpha;
        let vnorm2 = v.iter().fold(T::zero(), |acc, x| acc + *x * *x);
        diag[j] = alpha;
        if vnorm2 == T::zero() {
            continue;
        }
        let two: T = lit(2.0);
        for col in a.iter_mut().skip(j + 1) {
            let dot = v.iter().zip(&col[j..]).fold(T::zero(), |acc, (x, y)| acc + *x * *y);
            let f = two * dot / vnorm2;
            for (c, x) in col[j..].iter_mut().zip(&v) {
                *c -= f * *x;
            }
        }
        let dot = v.iter().zip(&rhs[j..]).fold(T::zero(), |acc, (x, y)| acc + *x * *y);
        let f = two * dot / vnorm2;
        for (r, x) in rhs[j..].iter_mut().zip(&v) {
            *r -= f * *x;
        }
    }

    let rmax = diag.iter().fold(T::zero(), |acc, d| acc.max(d.abs()));
    let tol = T::epsilon() * lit((m.max(n) * 10) as f64) * rmax;
    if let Some(j) = diag.iter().position(|d| !(d.abs() > tol)) {
        return Err(Error::RankDeficient(format!(
            "regressor {j} is (numerically) a combination of the others"
        )));
    }

    // Back substitution on R x = Qᵀ b.
    let mut x = vec![T::zero(); n];
    for i in (0..n).rev() {
        let mut s = rhs[i];
        for k in i + 1..n {
            s -= a[k][i] * x[k];
        }
        x[i] = s / diag[i];
    }
    Ok(x.into_iter().zip(scale).map(|(xi, s)| xi / s).collect())
}

/// Root mean square of a residual vector.
pub fn rms<T: Scalar>(residuals: &[T]) -> T {
    if residuals.is_empty() {
        return T::zero();
    }
    let ss = residuals.iter().fold(T::zero(), |acc, r| acc + *r * *r);
    (ss / lit(residuals.len() as f64)).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn exact_polynomial_recovery_across_scales() {
        let w: Vec<f64> = (1..=20).map(|i| 150.0 * i as f64).collect();
        let cols = vec![
            w.clone(),
            w.iter().map(|v| v.powi(3)).collect(),
            w.iter().map(|v| v.powi(6)).collect(),
        ];
        let truth = [2e-3, 3e-8, 4e-20];
        let b: Vec<f64> = (0..w.len())
            .map(|i| truth[0] * cols[0][i] + truth[1] * cols[1][i] + truth[2] * cols[2][i])
            .collect();
        let x = lstsq(&cols, &b).unwrap();
        for (xi, ti) in x.iter().zip(truth) {
            assert_relative_eq!(*xi, ti, max_relative = 1e-10);
        }
    }

    #[test]
    fn overdetermined_line_fit_matches_normal_equations() {
        let xs = [0.0, 1.0, 2.0, 3.0, 4.0];
        let ys = [1.1, 2.9, 5.2, 7.1, 8.8];
        let cols = vec![vec![1.0; 5], xs.to_vec()];
        let sol = lstsq(&cols, &ys).unwrap();
        let n = 5.0;
        let (sx, sy): (f64, f64) = (xs.iter().sum(), ys.iter().sum());
        let sxx: f64 = xs.iter().map(|x| x * x).sum();
        let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| x * y).sum();
        let slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
        let icpt = (sy - slope * sx) / n;
        assert_relative_eq!(sol[0], icpt, max_relative = 1e-12);
        assert_relative_eq!(sol[1], slope, max_relative = 1e-12);
    }

    #[test]
    fn rank_deficiency_is_detected() {
        let cols = vec![vec![1.0, 2.0, 3.0], vec![2.0, 4.0, 6.0]];
        assert!(matches!(lstsq(&cols, &[1.0, 2.0, 3.0]), Err(Error::RankDeficient(_))));
        let cols = vec![vec![0.0, 0.0, 0.0]];
        assert!(lstsq(&cols, &[1.0, 2.0, 3.0]).is_err());
        let cols = vec![vec![1.0], vec![2.0]];
        assert!(lstsq(&cols, &[1.0]).is_err());
    }

    #[test]
    fn rms_of_residuals() {
        assert_eq!(rms::<f64>(&[]), 0.0);
        assert_relative_eq!(rms(&[3.0, -4.0]), (12.5f64).sqrt());
    }
}
