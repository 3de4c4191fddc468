//! Forward-difference derivatives and the discrete `W^{k,p}` norm.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)] // f64 methods resolve to std when it is linked
use num_traits::Float;

use super::domain::{GridDomain, GridFunction};
use crate::error::{check_dim, Error, Result};
use crate::linalg::{LinearOperator, Matrix, SparseMatrix};

/// First difference along `axis`: forward, one-sided (backward) at the last
/// node of an interval axis, periodic on the torus.
pub fn difference_matrix(domain: &GridDomain, axis: usize) -> SparseMatrix {
    let n = domain.n();
    let inv_h = 1.0 / domain.spacing(axis);
    let rows = (0..domain.node_count())
        .map(|i| {
            if domain.is_periodic() {
                return vec![(i, -inv_h), ((i + 1) % n, inv_h)];
            }
            let [ix, iy] = domain.node_index(i);
            let along = if axis == 0 { ix } else { iy };
            let (from, to) = if along + 1 < n { (along, along + 1) } else { (along - 1, along) };
            let at = |k: usize| if axis == 0 { domain.flat_index(k, iy) } else { domain.flat_index(ix, k) };
            vec![(at(from), -inv_h), (at(to), inv_h)]
        })
        .collect();
    SparseMatrix::new(rows, domain.node_count())
}

/// Multi-indices `alpha` with `|alpha| <= k` in dimension `d`, ordered by degree.
pub fn multi_indices(d: usize, k: usize) -> Vec<[usize; 2]> {
    let mut out = Vec::new();
    for order in 0..=k {
        if d == 1 {
            out.push([order, 0]);
        } else {
            for a in (0..=order).rev() {
                out.push([a, order - a]);
            }
        }
    }
    out
}

/// The stacked map `f -> (D^alpha f)_{|alpha| <= k}` on a grid.
#[derive(Debug, Clone)]
pub struct SobolevOperator {
    domain: GridDomain,
    k: usize,
    blocks: Vec<SparseMatrix>,
}

impl SobolevOperator {
    pub fn new(domain: GridDomain, k: usize) -> Result<Self> {
        if k + 2 > domain.n() {
            return Err(Error::InvalidParameter(format!(
                "order k = {k} too large for a grid with {} points per axis",
                domain.n()
            )));
        }
        let d = domain.dimension();
        let diffs: Vec<SparseMatrix> = (0..d).map(|a| difference_matrix(&domain, a)).collect();
        let id = SparseMatrix::new((0..domain.node_count()).map(|i| vec![(i, 1.0)]).collect(), domain.node_count());
        let blocks = multi_indices(d, k)
            .into_iter()
            .map(|alpha| {
                let mut m = id.clone();
                for (axis, &times) in alpha.iter().enumerate().take(d) {
                    for _ in 0..times {
                        m = diffs[axis].compose(&m);
                    }
                }
                m
            })
            .collect();
        Ok(SobolevOperator { domain, k, blocks })
    }

    pub fn domain(&self) -> &GridDomain {
        &self.domain
    }

    pub fn order(&self) -> usize {
        self.k
    }

    /// One sparse block per multi-index; block 0 is the identity.
    pub fn blocks(&self) -> &[SparseMatrix] {
        &self.blocks
    }

    pub fn dim(&self) -> usize {
        self.domain.node_count()
    }

    pub fn derivatives(&self, f: &[f64]) -> Vec<Vec<f64>> {
        self.blocks.iter().map(|b| b.apply(f)).collect()
    }

    /// `(sum_alpha h^d sum_i |D^alpha f_i|^p)^(1/p)`.
    pub fn norm(&self, f: &[f64], p: f64) -> f64 {
        let w = self.domain.cell_volume();
        let total: f64 = self
            .blocks
            .iter()
            .map(|b| b.apply(f).iter().map(|v| v.abs().powf(p)).sum::<f64>())
            .sum();
        (w * total).powf(1.0 / p)
    }

    /// Gradient of the norm; zero at `f = 0` by convention.
    pub fn norm_gradient(&self, f: &[f64], p: f64) -> Vec<f64> {
        let value = self.norm(f, p);
        let mut g = vec![0.0; self.dim()];
        if value == 0.0 {
            return g;
        }
        let w = self.domain.cell_volume();
        let denom = value.powf(p - 1.0);
        for b in &self.blocks {
            let s = b.apply(f);
            let psi: Vec<f64> = s.iter().map(|v| w * v.abs().powf(p - 1.0) * v.signum() / denom).collect();
            for (gi, t) in g.iter_mut().zip(b.apply_transpose(&psi)) {
                *gi += t;
            }
        }
        g
    }

    /// `sum_alpha (D^alpha)^T D^alpha` as a dense matrix.
    pub fn gram(&self) -> Matrix {
        let n = self.dim();
        let mut g = Matrix::zeros(n, n);
        for b in &self.blocks {
            for i in 0..b.output_dim() {
                let row = b.row_entries(i);
                for &(j, a) in row {
                    for &(l, c) in row {
                        g[(j, l)] += a * c;
                    }
                }
            }
        }
        g
    }
}

/// Discrete `W^{k,p}` norm of a grid function.
pub fn sobolev_norm(f: &GridFunction, k: usize, p: f64) -> Result<f64> {
    check_exponent(p)?;
    let op = SobolevOperator::new(*f.domain(), k)?;
    check_dim(op.dim(), f.values().len())?;
    Ok(op.norm(f.values(), p))
}

pub(crate) fn check_exponent(p: f64) -> Result<()> {
    if p.is_finite() && p > 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("exponent p = {p} must lie in (1, inf)")))
    }
}
