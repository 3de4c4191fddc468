//! Polyhedral cones `{x : A x >= 0}` and their duals.

use alloc::format;
use alloc::vec::Vec;

#[allow(unused_imports)] // f64 methods resolve to std when it is linked
use num_traits::Float;

use crate::error::{check_dim, Error, Result};
use crate::linalg::{dot, Matrix};
use crate::lp::{LinearProgram, LpOutcome, Relation};

/// Absolute membership tolerance.
pub const CONE_TOL: f64 = 1e-10;

/// Upper limit on the `(d-1)`-subsets visited by facet enumeration.
pub const MAX_FACET_SUBSETS: usize = 2_000_000;

#[derive(Debug, Clone, PartialEq)]
pub struct PolyhedralCone {
    ineq: Matrix,
}

impl PolyhedralCone {
    /// Cone `{x : ineq x >= 0}`; rejects systems with a nontrivial lineality space.
    pub fn new(ineq: Matrix) -> Result<Self> {
        if ineq.rows() == 0 || ineq.cols() == 0 {
            return Err(Error::InvalidParameter("inequality system must be nonempty".into()));
        }
        if ineq.as_slice().iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter("inequality system has non-finite entries".into()));
        }
        // {x : Ax >= 0, -Ax >= 0} = ker A, which is trivial iff A has full column rank.
        if ineq.rank(1e-12) < ineq.cols() {
            return Err(Error::NotPointed);
        }
        Ok(PolyhedralCone { ineq })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        Self::new(Matrix::from_rows(rows)?)
    }

    pub fn standard(dim: usize) -> Self {
        PolyhedralCone { ineq: Matrix::identity(dim) }
    }

    /// Inequality form of `cone(generators)`; the generators must span.
    pub fn from_generators(generators: &[Vec<f64>]) -> Result<Self> {
        let dim = generators.first().map(|g| g.len()).ok_or(Error::DegenerateCone)?;
        for g in generators {
            check_dim(dim, g.len())?;
        }
        if Matrix::from_rows(generators)?.rank(1e-12) < dim {
            return Err(Error::DegenerateCone);
        }
        let normals = facet_normals(generators, dim)?;
        if normals.is_empty() {
            return Err(Error::NotPointed);
        }
        Self::from_rows(&normals)
    }

    pub fn dim(&self) -> usize {
        self.ineq.cols()
    }

    pub fn ineq(&self) -> &Matrix {
        &self.ineq
    }

    /// Each row has a single positive entry and every coordinate is constrained.
    pub fn is_standard(&self) -> bool {
        let mut seen = alloc::vec![false; self.dim()];
        for i in 0..self.ineq.rows() {
            let row = self.ineq.row(i);
            let nz: Vec<usize> = (0..row.len()).filter(|j| row[*j] != 0.0).collect();
            if nz.len() != 1 || row[nz[0]] < 0.0 {
                return false;
            }
            seen[nz[0]] = true;
        }
        seen.iter().all(|s| *s)
    }

    pub fn contains(&self, x: &[f64]) -> Result<bool> {
        check_dim(self.dim(), x.len())?;
        Ok(self.ineq.mul_vec(x).iter().all(|v| *v >= -CONE_TOL))
    }

    /// `y - x` in the cone.
    pub fn le(&self, x: &[f64], y: &[f64]) -> Result<bool> {
        check_dim(x.len(), y.len())?;
        self.contains(&crate::linalg::sub(y, x))
    }

    /// Interior point test: `A x >= 1` is feasible.
    pub fn has_interior(&self) -> Result<bool> {
        let mut lp = LinearProgram::new(self.dim()).all_free();
        for i in 0..self.ineq.rows() {
            lp.constrain(self.ineq.row(i).to_vec(), Relation::Ge, 1.0);
        }
        Ok(!matches!(lp.solve()?, LpOutcome::Infeasible))
    }

    /// Extreme rays, scaled to unit max-norm.
    pub fn extreme_rays(&self) -> Result<Vec<Vec<f64>>> {
        let rows: Vec<Vec<f64>> = (0..self.ineq.rows()).map(|i| self.ineq.row(i).to_vec()).collect();
        facet_normals(&rows, self.dim())
    }

    /// Functionals nonnegative on the cone, in inequality form.
    ///
    /// The dual is generated by the rows of `A`; its facets are the extreme
    /// rays of the cone.
    pub fn dual_cone(&self) -> Result<PolyhedralCone> {
        if !self.has_interior()? {
            return Err(Error::DegenerateCone);
        }
        let rays = self.extreme_rays()?;
        Self::from_rows(&rays).map_err(|_| Error::DegenerateCone)
    }
}

/// Unit max-norm vectors `u` with `u . v >= 0` for all `v`, vanishing on a
/// rank `d - 1` subset. When the `v` span `R^d` these are the facet normals
/// of `cone(v)`.
pub fn facet_normals(vectors: &[Vec<f64>], dim: usize) -> Result<Vec<Vec<f64>>> {
    let k = dim.saturating_sub(1);
    let total = binomial(vectors.len(), k);
    if total > MAX_FACET_SUBSETS {
        return Err(Error::InvalidParameter(format!(
            "facet enumeration over {total} subsets exceeds the limit {MAX_FACET_SUBSETS}"
        )));
    }
    let scale = vectors.iter().flatten().fold(0.0f64, |m, v| m.max(v.abs())).max(1.0);
    let tol = CONE_TOL * scale;
    let mut out: Vec<Vec<f64>> = Vec::new();
    let mut consider = |u: Vec<f64>| {
        let norm = u.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if norm == 0.0 {
            return;
        }
        let mut u: Vec<f64> = u.iter().map(|v| v / norm).collect();
        let products: Vec<f64> = vectors.iter().map(|v| dot(&u, v)).collect();
        if products.iter().all(|p| p.abs() <= tol) {
            return;
        }
        if products.iter().any(|p| *p < -tol) {
            if products.iter().any(|p| *p > tol) {
                return;
            }
            u.iter_mut().for_each(|v| *v = -*v);
        }
        if !out.iter().any(|w| w.iter().zip(&u).all(|(a, b)| (a - b).abs() <= 1e-9)) {
            out.push(u);
        }
    };
    if k == 0 {
        consider(alloc::vec![1.0; dim.max(1)]);
        return Ok(out);
    }
    let mut idx: Vec<usize> = (0..k).collect();
    if vectors.len() < k {
        return Ok(out);
    }
    loop {
        let sub: Vec<Vec<f64>> = idx.iter().map(|i| vectors[*i].clone()).collect();
        let m = Matrix::from_rows(&sub)?;
        let null = m.null_space(1e-10);
        if null.len() == 1 {
            consider(null.into_iter().next().unwrap_or_default());
        }
        if !next_combination(&mut idx, vectors.len()) {
            break;
        }
    }
    Ok(out)
}

fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
        if acc > usize::MAX as u128 {
            return usize::MAX;
        }
    }
    acc as usize
}

fn next_combination(idx: &mut [usize], n: usize) -> bool {
    let k = idx.len();
    for i in (0..k).rev() {
        if idx[i] < n - k + i {
            idx[i] += 1;
            for j in i + 1..k {
                idx[j] = idx[j - 1] + 1;
            }
            return true;
        }
    }
    false
}
