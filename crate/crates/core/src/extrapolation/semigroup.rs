//! The semigroup `e^{tA}` of a matrix generator.

#[allow(unused_imports)] // f64 methods resolve to std when it is linked
use num_traits::Float;

use crate::error::{Error, Result};
use crate::linalg::Matrix;

const TAYLOR_TERMS: usize = 24;

/// `e^{tA}` by scaling and squaring.
///
/// With `c = max |a_ii|` the matrix `A + cI` is entrywise nonnegative for
/// Metzler `A`, so its Taylor series has no cancellation; the factor
/// `e^{-ct}` is folded in before squaring to avoid overflow.
pub fn semigroup(a: &Matrix, t: f64) -> Result<Matrix> {
    if a.rows() != a.cols() {
        return Err(Error::InvalidParameter("generator must be square".into()));
    }
    if !(t.is_finite() && t >= 0.0) {
        return Err(Error::InvalidParameter("time must be finite and nonnegative".into()));
    }
    let n = a.rows();
    let c = (0..n).map(|i| a[(i, i)].abs()).fold(0.0, f64::max);
    let shifted = a.add(&Matrix::identity(n).scaled(c));
    let norm = shifted.norm_inf() * t;
    let mut squarings = 0u32;
    while norm / 2f64.powi(squarings as i32) > 0.5 {
        squarings += 1;
    }
    let tau = t / 2f64.powi(squarings as i32);
    let b = shifted.scaled(tau);
    let mut term = Matrix::identity(n);
    let mut sum = Matrix::identity(n);
    for k in 1..=TAYLOR_TERMS {
        term = term.matmul(&b).scaled(1.0 / k as f64);
        sum = sum.add(&term);
    }
    let mut e = sum.scaled((-c * tau).exp());
    for _ in 0..squarings {
        e = e.matmul(&e);
    }
    Ok(e)
}
