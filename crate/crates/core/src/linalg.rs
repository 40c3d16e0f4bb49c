//! Small dense linear-algebra helpers shared by the analysis modules.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Default margin for [`is_hurwitz`].
pub const HURWITZ_TOL: f64 = 1e-9;

/// Reciprocal condition number below which a matrix is treated as singular.
pub const SINGULAR_RCOND: f64 = 1e-12;

fn check_finite(m: &DMatrix<f64>, what: &str) -> Result<()> {
    if m.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite(what.to_string()));
    }
    Ok(())
}

fn check_square(m: &DMatrix<f64>) -> Result<()> {
    if m.nrows() != m.ncols() {
        return Err(Error::DimensionMismatch { expected: m.nrows(), got: m.ncols() });
    }
    Ok(())
}

/// Ratio of smallest to largest singular value (0 for the zero matrix).
pub fn rcond(m: &DMatrix<f64>) -> f64 {
    let sv = m.singular_values();
    let max = sv.max();
    if max == 0.0 {
        0.0
    } else {
        sv.min() / max
    }
}

/// Solves `m x = rhs`, failing with [`Error::Singular`] when `m` is numerically singular.
pub fn solve(m: &DMatrix<f64>, rhs: &DVector<f64>, name: &str) -> Result<DVector<f64>> {
    check_square(m)?;
    check_finite(m, name)?;
    if m.nrows() != rhs.len() {
        return Err(Error::DimensionMismatch { expected: m.nrows(), got: rhs.len() });
    }
    if rcond(m) < SINGULAR_RCOND {
        return Err(Error::Singular(name.to_string()));
    }
    m.clone().lu().solve(rhs).ok_or_else(|| Error::Singular(name.to_string()))
}

/// Largest real part among the eigenvalues of `m`.
pub fn max_real_eigenvalue(m: &DMatrix<f64>) -> Result<f64> {
    check_square(m)?;
    check_finite(m, "matrix")?;
    if m.nrows() == 0 {
        return Ok(f64::NEG_INFINITY);
    }
    if m.nrows() == 1 {
        return Ok(m[(0, 0)]);
    }
    let ev = m.complex_eigenvalues();
    Ok(ev.iter().map(|z| z.re).fold(f64::NEG_INFINITY, f64::max))
}

/// True iff every eigenvalue of `m` has real part below `-tol`.
pub fn is_hurwitz(m: &DMatrix<f64>, tol: f64) -> Result<bool> {
    Ok(max_real_eigenvalue(m)? < -tol)
}

/// Monic characteristic polynomial `det(sI − m)`, highest degree first.
///
/// Faddeev–LeVerrier recursion; exact in rational arithmetic and well behaved
/// for the 2–4 dimensional matrices it is used on.
pub fn charpoly(m: &DMatrix<f64>) -> Result<Vec<f64>> {
    check_square(m)?;
    let n = m.nrows();
    let mut coeffs = vec![1.0];
    let mut mk = DMatrix::<f64>::zeros(n, n);
    let id = DMatrix::<f64>::identity(n, n);
    let mut c = 1.0;
    for k in 1..=n {
        mk = m * &mk + &id * c;
        let amk = m * &mk;
        c = -amk.trace() / k as f64;
        coeffs.push(c);
    }
    Ok(coeffs)
}

/// Vector spanning the null space of a full-row-rank `(n−1)×n` matrix, normalised so that
/// entry `pivot` equals one. `None` when the minor that drops column `pivot` is
/// ill conditioned.
pub fn null_vector_with_pivot(rows: &DMatrix<f64>, pivot: usize) -> Option<DVector<f64>> {
    let n = rows.ncols();
    if rows.nrows() + 1 != n || pivot >= n {
        return None;
    }
    if n == 1 {
        return Some(DVector::from_element(1, 1.0));
    }
    let others: Vec<usize> = (0..n).filter(|&c| c != pivot).collect();
    let minor = rows.select_columns(&others);
    if rcond(&minor) < SINGULAR_RCOND {
        return None;
    }
    let rhs = -rows.column(pivot);
    let sol = minor.lu().solve(&rhs.into_owned())?;
    let mut phi = DVector::zeros(n);
    phi[pivot] = 1.0;
    for (s, &c) in others.iter().enumerate() {
        phi[c] = sol[s];
    }
    Some(phi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn hurwitz_examples() {
        let stable = DMatrix::from_row_slice(2, 2, &[-1.0, 0.0, 0.0, -2.0]);
        assert!(is_hurwitz(&stable, HURWITZ_TOL).unwrap());
        let rot = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, -1.0, 0.0]);
        assert!(!is_hurwitz(&rot, HURWITZ_TOL).unwrap());
    }

    #[test]
    fn duopoly_hurwitz_boundary() {
        let q = |d: f64| DMatrix::from_row_slice(2, 2, &[10.0 - 5.0 * d, -5.0, -5.0, 10.0]);
        assert!(is_hurwitz(&(q(1.49) * -0.03), HURWITZ_TOL).unwrap());
        assert!(!is_hurwitz(&(q(1.51) * -0.03), HURWITZ_TOL).unwrap());
    }

    #[test]
    fn non_finite_is_rejected() {
        let m = DMatrix::from_row_slice(1, 1, &[f64::NAN]);
        assert!(matches!(is_hurwitz(&m, 0.0), Err(Error::NonFinite(_))));
    }

    #[test]
    fn charpoly_matches_known_cubic() {
        // companion matrix of (s+1)(s+2)(s+3) = s³+6s²+11s+6
        let m = DMatrix::from_row_slice(3, 3, &[0.0, 1.0, 0.0, 0.0, 0.0, 1.0, -6.0, -11.0, -6.0]);
        let c = charpoly(&m).unwrap();
        for (got, want) in c.iter().zip([1.0, 6.0, 11.0, 6.0]) {
            assert_relative_eq!(*got, want, epsilon = 1e-12);
        }
    }

    #[test]
    fn null_vector() {
        let rows = DMatrix::from_row_slice(1, 2, &[2.0, 4.0]);
        let phi = null_vector_with_pivot(&rows, 0).unwrap();
        assert_eq!(phi.as_slice(), &[1.0, -0.5]);
        let degenerate = DMatrix::from_row_slice(1, 2, &[2.0, 0.0]);
        assert!(null_vector_with_pivot(&degenerate, 0).is_none());
        assert!(null_vector_with_pivot(&degenerate, 1).is_some());
    }

    #[test]
    fn singular_solve() {
        let m = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 4.0]);
        let r = solve(&m, &DVector::from_vec(vec![1.0, 1.0]), "M");
        assert_eq!(r, Err(Error::Singular("M".into())));
    }
}
