//! Approximation schemes `J R_n -> id` and the supremum constructions built
//! on them.

use alloc::boxed::Box;
use alloc::format;
use alloc::vec::Vec;

use crate::error::{check_dim, Error, Result};
use crate::linalg::{abs, dist_inf, norm_inf, LinearOperator};
use crate::ordered_space::OrderedSpace;

/// Number of consecutive increments below tolerance that ends a construction.
pub const CONVERGENCE_WINDOW: usize = 3;

pub type OperatorFactory = Box<dyn Fn(usize) -> Result<Box<dyn LinearOperator>>>;

/// An embedding `J : X -> Z` and operators `R_n : Z -> X` for a geometric
/// sequence of indices.
pub struct ApproximationScheme {
    j: Box<dyn LinearOperator>,
    factory: OperatorFactory,
    indices: Vec<usize>,
}

impl core::fmt::Debug for ApproximationScheme {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.debug_struct("ApproximationScheme")
            .field("domain_dim", &self.j.input_dim())
            .field("codomain_dim", &self.j.output_dim())
            .field("indices", &self.indices)
            .finish()
    }
}

/// `n_min, 2 n_min, 4 n_min, ...` up to `n_max`.
pub fn geometric_indices(n_min: usize, n_max: usize) -> Result<Vec<usize>> {
    if n_min == 0 || n_max < n_min {
        return Err(Error::InvalidParameter(format!("index range {n_min}..{n_max} is empty")));
    }
    let mut out = Vec::new();
    let mut n = n_min;
    while n <= n_max {
        out.push(n);
        match n.checked_mul(2) {
            Some(m) => n = m,
            None => break,
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SchemeValidation {
    pub j_positive: bool,
    /// Indices whose `R_n` maps some basis vector outside the cone.
    pub non_positive_indices: Vec<usize>,
    /// `max_z ||J R_n z - z||_inf` per index.
    pub errors: Vec<(usize, f64)>,
    pub pass: bool,
}

impl ApproximationScheme {
    pub fn new(j: Box<dyn LinearOperator>, n_min: usize, n_max: usize, factory: OperatorFactory) -> Result<Self> {
        Ok(ApproximationScheme { j, factory, indices: geometric_indices(n_min, n_max)? })
    }

    pub fn domain_dim(&self) -> usize {
        self.j.input_dim()
    }

    pub fn codomain_dim(&self) -> usize {
        self.j.output_dim()
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn embedding(&self) -> &dyn LinearOperator {
        &*self.j
    }

    pub fn operator(&self, n: usize) -> Result<Box<dyn LinearOperator>> {
        let r = (self.factory)(n)?;
        if r.input_dim() != self.codomain_dim() || r.output_dim() != self.domain_dim() {
            return Err(Error::DimensionMismatch { expected: self.codomain_dim(), found: r.input_dim() });
        }
        Ok(r)
    }

    /// Checks positivity of `J` and every `R_n` on basis vectors, and that
    /// `||J R_n z - z||` decreases along the indices and ends below `tol`.
    pub fn validate(&self, validation: &[Vec<f64>], tol: f64) -> Result<SchemeValidation> {
        let positive = |op: &dyn LinearOperator| {
            let mut e = alloc::vec![0.0; op.input_dim()];
            (0..op.input_dim()).all(|i| {
                e[i] = 1.0;
                let ok = op.apply(&e).iter().all(|v| *v >= -1e-12);
                e[i] = 0.0;
                ok
            })
        };
        let j_positive = positive(&*self.j);
        let mut non_positive_indices = Vec::new();
        let mut errors = Vec::new();
        for &n in &self.indices {
            let r = self.operator(n)?;
            if !positive(&*r) {
                non_positive_indices.push(n);
            }
            let mut worst = 0.0f64;
            for z in validation {
                check_dim(self.codomain_dim(), z.len())?;
                worst = worst.max(dist_inf(&self.j.apply(&r.apply(z)), z));
            }
            errors.push((n, worst));
        }
        let decreasing = errors.windows(2).all(|w| w[1].1 <= w[0].1);
        let reaches = errors.last().is_some_and(|e| e.1 <= tol);
        let pass = j_positive && non_positive_indices.is_empty() && decreasing && reaches;
        Ok(SchemeValidation { j_positive, non_positive_indices, errors, pass })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SupConstruction {
    pub s: Vec<f64>,
    /// Index at which the construction stopped.
    pub index: usize,
    /// `||s_n - s_prev||_inf` along the indices visited.
    pub increments: Vec<f64>,
}

fn check_tol(tol: f64) -> Result<()> {
    if tol.is_finite() && tol > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("tolerance {tol} must be positive")))
    }
}

/// Iterates `s_n = step(n)` along the indices until `CONVERGENCE_WINDOW`
/// consecutive increments are at most `tol`.
fn iterate_until_cauchy(
    indices: &[usize],
    tol: f64,
    mut step: impl FnMut(usize) -> Result<Vec<f64>>,
) -> Result<SupConstruction> {
    let mut prev: Option<Vec<f64>> = None;
    let mut increments = Vec::new();
    let mut small = 0;
    for &n in indices {
        let s = step(n)?;
        if let Some(p) = &prev {
            let inc = dist_inf(&s, p);
            increments.push(inc);
            small = if inc <= tol { small + 1 } else { 0 };
            if small >= CONVERGENCE_WINDOW {
                return Ok(SupConstruction { s, index: n, increments });
            }
        }
        prev = Some(s);
    }
    Err(Error::SchemeNotConverged { increments })
}

fn verify_upper_bound(x: &[f64], s: &[f64], tol: f64) -> Result<()> {
    for (i, (xi, si)) in x.iter().zip(s).enumerate() {
        if xi.abs() > si + tol {
            return Err(Error::Precondition(format!(
                "constructed bound fails at coordinate {i}: |x| = {:e} > s + tol = {:e}",
                xi.abs(),
                si + tol
            )));
        }
    }
    Ok(())
}

/// `s = lim J |R_n z|` in `Z`; the limit is checked to satisfy `+-z <= s + tol`.
pub fn constructive_sup(
    scheme: &ApproximationScheme,
    space_z: &OrderedSpace,
    z: &[f64],
    tol: f64,
) -> Result<SupConstruction> {
    check_tol(tol)?;
    space_z.require_standard("constructive_sup")?;
    check_dim(scheme.codomain_dim(), space_z.dim())?;
    check_dim(space_z.dim(), z.len())?;
    let out = iterate_until_cauchy(scheme.indices(), tol, |n| {
        let r = scheme.operator(n)?;
        Ok(scheme.j.apply(&abs(&r.apply(z))))
    })?;
    verify_upper_bound(z, &out.s, tol)?;
    Ok(out)
}

/// `s' = lim J' |R_n' x'|` in `X'`; checked to satisfy `+-x' <= s' + tol`.
pub fn constructive_sup_dual(scheme: &ApproximationScheme, x_dual: &[f64], tol: f64) -> Result<SupConstruction> {
    check_tol(tol)?;
    check_dim(scheme.domain_dim(), x_dual.len())?;
    if norm_inf(x_dual) == 0.0 {
        let n = scheme.indices()[0];
        return Ok(SupConstruction { s: alloc::vec![0.0; x_dual.len()], index: n, increments: Vec::new() });
    }
    let out = iterate_until_cauchy(scheme.indices(), tol, |n| {
        let r = scheme.operator(n)?;
        Ok(scheme.j.apply_transpose(&abs(&r.apply_transpose(x_dual))))
    })?;
    verify_upper_bound(x_dual, &out.s, tol)?;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{Identity, Matrix};
    use crate::ordered_space::OrderedSpaceSpec;

    /// `R_n = (1 - 1/n) I + (1/n) P` with `P` a cyclic shift.
    fn shift_scheme(d: usize, n_max: usize) -> ApproximationScheme {
        let factory: OperatorFactory = Box::new(move |n| {
            let t = 1.0 / n as f64;
            Ok(Box::new(Matrix::from_fn(d, d, |i, j| {
                if i == j {
                    1.0 - t
                } else if j == (i + 1) % d {
                    t
                } else {
                    0.0
                }
            })) as Box<dyn LinearOperator>)
        });
        ApproximationScheme::new(Box::new(Identity(d)), 2, n_max, factory).unwrap()
    }

    #[test]
    fn geometric_schedule() {
        assert_eq!(geometric_indices(2, 20).unwrap(), alloc::vec![2, 4, 8, 16]);
        assert!(geometric_indices(0, 4).is_err());
        assert!(geometric_indices(8, 4).is_err());
    }

    #[test]
    fn shift_scheme_validates() {
        let sch = shift_scheme(4, 1 << 20);
        let v = sch.validate(&[alloc::vec![1.0, -1.0, 0.5, 0.0]], 1e-5).unwrap();
        assert!(v.pass, "{v:?}");
    }

    #[test]
    fn sup_of_mixed_vector() {
        let sch = shift_scheme(4, 1 << 40);
        let space = OrderedSpaceSpec::standard_lp(4, 2.0).build().unwrap();
        let z = [1.0, -2.0, 0.5, -0.25];
        let out = constructive_sup(&sch, &space, &z, 1e-8).unwrap();
        assert!(dist_inf(&out.s, &abs(&z)) <= 1e-7);
        let dual = constructive_sup_dual(&sch, &z, 1e-8).unwrap();
        assert!(dist_inf(&dual.s, &abs(&z)) <= 1e-7);
        assert_eq!(constructive_sup_dual(&sch, &[0.0; 4], 1e-8).unwrap().s, alloc::vec![0.0; 4]);
    }

    #[test]
    fn short_range_does_not_converge() {
        let sch = shift_scheme(3, 16);
        let space = OrderedSpaceSpec::standard_lp(3, 2.0).build().unwrap();
        let err = constructive_sup(&sch, &space, &[1.0, -1.0, 0.0], 1e-9).unwrap_err();
        assert!(matches!(err, Error::SchemeNotConverged { ref increments } if increments.len() == 3));
    }
}
