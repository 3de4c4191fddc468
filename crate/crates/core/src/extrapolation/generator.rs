//! Matrix generators of positive semigroups and their resolvents.

use alloc::format;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::linalg::{Lu, Matrix};

/// Entries of a positive resolvent may dip this far below zero.
pub const POSITIVITY_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct PositivityCertificate {
    /// All off-diagonal entries of `A` are nonnegative.
    pub metzler: bool,
    /// Sample points `mu` and the smallest entry of `(mu - A)^{-1}` there.
    pub samples: Vec<(f64, f64)>,
}

impl PositivityCertificate {
    pub fn certified(&self) -> bool {
        self.metzler && self.samples.iter().all(|(_, m)| *m >= -POSITIVITY_TOL)
    }
}

/// A square matrix `A` with a bound `lambda0` above its spectral abscissa.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneratorMatrix {
    a: Matrix,
    lambda0: f64,
    certificate: PositivityCertificate,
}

/// Gershgorin bound on the real parts of the eigenvalues.
pub fn gershgorin_abscissa(a: &Matrix) -> f64 {
    (0..a.rows())
        .map(|i| {
            let off: f64 = (0..a.cols()).filter(|j| *j != i).map(|j| a[(i, j)].abs()).sum();
            a[(i, i)] + off
        })
        .fold(f64::NEG_INFINITY, f64::max)
}

impl GeneratorMatrix {
    /// Takes `lambda0` as the Gershgorin bound plus `1/4` and certifies the
    /// resolvent at `lambda0` and `2 lambda0 + 1`.
    pub fn new(a: Matrix) -> Result<Self> {
        if a.rows() != a.cols() || a.rows() == 0 {
            return Err(Error::InvalidParameter(format!("generator must be square, got {}x{}", a.rows(), a.cols())));
        }
        if a.as_slice().iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter("generator has non-finite entries".into()));
        }
        let lambda0 = gershgorin_abscissa(&a) + 0.25;
        let metzler = (0..a.rows()).all(|i| (0..a.cols()).all(|j| i == j || a[(i, j)] >= 0.0));
        let mut samples = Vec::new();
        for mu in [lambda0, 2.0 * lambda0 + 1.0] {
            let r = Lu::new(&a.shifted_negation(mu))?.inverse();
            samples.push((mu, r.min_entry()));
        }
        Ok(GeneratorMatrix { a, lambda0, certificate: PositivityCertificate { metzler, samples } })
    }

    pub fn matrix(&self) -> &Matrix {
        &self.a
    }

    pub fn dim(&self) -> usize {
        self.a.rows()
    }

    pub fn lambda0(&self) -> f64 {
        self.lambda0
    }

    pub fn certificate(&self) -> &PositivityCertificate {
        &self.certificate
    }
}

/// `(mu - A)^{-1}`; entrywise positivity is asserted for certified generators.
pub fn resolvent(gen: &GeneratorMatrix, mu: f64) -> Result<Matrix> {
    if !(mu > gen.lambda0) {
        return Err(Error::InvalidParameter(format!("mu = {mu} must exceed lambda0 = {}", gen.lambda0)));
    }
    let r = Lu::new(&gen.a.shifted_negation(mu))?.inverse();
    if gen.certificate.certified() && r.min_entry() < -POSITIVITY_TOL {
        return Err(Error::Precondition(format!(
            "resolvent at mu = {mu} has a negative entry {:e}",
            r.min_entry()
        )));
    }
    Ok(r)
}

/// Second differences with reflecting end rows; `A 1 = 0` exactly.
pub fn neumann_laplacian_1d(n: usize, h: f64) -> Result<GeneratorMatrix> {
    if n < 3 {
        return Err(Error::InvalidParameter(format!("Neumann Laplacian needs n >= 3, got {n}")));
    }
    if !(h.is_finite() && h > 0.0) {
        return Err(Error::InvalidParameter(format!("spacing h = {h} must be positive")));
    }
    let c = 1.0 / (h * h);
    let a = Matrix::from_fn(n, n, |i, j| {
        let off = if i.abs_diff(j) == 1 { c } else { 0.0 };
        if i != j {
            return off;
        }
        if i == 0 || i == n - 1 {
            -c
        } else {
            -2.0 * c
        }
    });
    GeneratorMatrix::new(a)
}

/// Second differences on a ring of `n` nodes; `A 1 = 0` exactly.
pub fn periodic_laplacian_1d(n: usize, h: f64) -> Result<GeneratorMatrix> {
    if n < 3 {
        return Err(Error::InvalidParameter(format!("periodic Laplacian needs n >= 3, got {n}")));
    }
    if !(h.is_finite() && h > 0.0) {
        return Err(Error::InvalidParameter(format!("spacing h = {h} must be positive")));
    }
    let c = 1.0 / (h * h);
    let a = Matrix::from_fn(n, n, |i, j| {
        if i == j {
            -2.0 * c
        } else if (i + 1) % n == j || (j + 1) % n == i {
            c
        } else {
            0.0
        }
    });
    GeneratorMatrix::new(a)
}

/// The multiplication generator `diag(-m)` with `m >= 0`.
pub fn multiplication_generator(m: &[f64]) -> Result<GeneratorMatrix> {
    if m.is_empty() || m.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
        return Err(Error::InvalidParameter("multiplier must be nonnegative and finite".into()));
    }
    let neg: Vec<f64> = m.iter().map(|v| -v).collect();
    GeneratorMatrix::new(Matrix::diagonal(&neg))
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn periodic_rows_sum_to_zero() {
        let g = periodic_laplacian_1d(5, 0.5).unwrap();
        assert_eq!(g.matrix().mul_vec(&[1.0; 5]), vec![0.0; 5]);
        assert_eq!(g.matrix()[(0, 4)], 4.0);
        assert!(g.certificate().certified());
        assert!(periodic_laplacian_1d(2, 1.0).is_err());
    }

    #[test]
    fn diagonal_resolvent() {
        let g = multiplication_generator(&[0.0, 1.0, 3.0]).unwrap();
        let r = resolvent(&g, 1.0).unwrap();
        for (i, m) in [0.0, 1.0, 3.0].iter().enumerate() {
            assert!((r[(i, i)] - 1.0 / (1.0 + m)).abs() < 1e-15);
        }
        assert!(g.certificate().certified());
    }

    #[test]
    fn neumann_stencil() {
        let g = neumann_laplacian_1d(3, 1.0).unwrap();
        let rows: Vec<Vec<f64>> = (0..3).map(|i| g.matrix().row(i).to_vec()).collect();
        assert_eq!(rows, vec![vec![-1.0, 1.0, 0.0], vec![1.0, -2.0, 1.0], vec![0.0, 1.0, -1.0]]);
        let g = neumann_laplacian_1d(9, 0.1).unwrap();
        assert!(g.matrix().mul_vec(&[1.0; 9]).iter().all(|v| *v == 0.0));
        assert!(g.certificate().certified());
        assert!(neumann_laplacian_1d(2, 1.0).is_err());
    }

    #[test]
    fn resolvent_of_constants() {
        let g = neumann_laplacian_1d(5, 0.25).unwrap();
        let r = resolvent(&g, 2.0).unwrap();
        for v in r.mul_vec(&[1.0; 5]) {
            assert!((v - 0.5).abs() < 1e-14);
        }
        assert!(r.min_entry() > 0.0);
    }

    #[test]
    fn mu_below_bound_is_rejected() {
        let g = neumann_laplacian_1d(4, 1.0).unwrap();
        assert!(resolvent(&g, g.lambda0()).is_err());
        assert!(resolvent(&g, -1.0).is_err());
    }

    #[test]
    fn non_metzler_is_not_certified() {
        let a = Matrix::from_rows(&[vec![-2.0, -1.0], vec![0.0, -2.0]]).unwrap();
        let g = GeneratorMatrix::new(a).unwrap();
        assert!(!g.certificate().certified());
        assert!(resolvent(&g, 1.0).is_ok());
    }
}
