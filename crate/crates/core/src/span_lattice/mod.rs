//! Span norms, the lattice renorm and constructive suprema along
//! approximation schemes.

pub mod renorm;
pub mod scheme;
pub mod span_norm;

use alloc::format;
use alloc::vec::Vec;

pub use renorm::{renorm_bounds_check, renorm_value, RenormBoundsReport, RenormValue, RENORM_EXACT_DIM};
pub use scheme::{
    constructive_sup, constructive_sup_dual, geometric_indices, ApproximationScheme, OperatorFactory,
    SchemeValidation, SupConstruction, CONVERGENCE_WINDOW,
};
pub use span_norm::{span_norm, SpanNormResult};

use crate::error::{check_dim, Error, Result};
use crate::linalg::sub;
use crate::ordered_space::OrderedSpace;

/// Agreement required between the span norm and the norm on positive vectors.
pub const COINCIDENCE_TOL: f64 = 1e-7;

#[derive(Debug, Clone, PartialEq)]
pub struct CoincidenceReport {
    /// `|span_norm(v - x_j) - ||v - x_j|||` per chain element.
    pub gaps: Vec<f64>,
    /// Indices where `v - x_j` is not positive.
    pub not_below_limit: Vec<usize>,
    pub pass: bool,
}

/// On an increasing chain below `limit`, the span norm of `limit - x_j`
/// agrees with the norm.
pub fn cone_norm_coincidence_check(space: &OrderedSpace, chain: &[Vec<f64>], limit: &[f64]) -> Result<CoincidenceReport> {
    check_dim(space.dim(), limit.len())?;
    for x in chain {
        check_dim(space.dim(), x.len())?;
    }
    for (j, w) in chain.windows(2).enumerate() {
        if !space.cone().le(&w[0], &w[1])? {
            return Err(Error::Precondition(format!("chain is not increasing at position {}", j + 1)));
        }
    }
    let mut gaps = Vec::with_capacity(chain.len());
    let mut not_below_limit = Vec::new();
    for (j, x) in chain.iter().enumerate() {
        let diff = sub(limit, x);
        if !space.cone().contains(&diff)? {
            not_below_limit.push(j);
        }
        gaps.push((span_norm(space, &diff)?.value - space.norm(&diff)?).abs());
    }
    let pass = not_below_limit.is_empty() && gaps.iter().all(|g| *g <= COINCIDENCE_TOL);
    Ok(CoincidenceReport { gaps, not_below_limit, pass })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ordered_space::{NormSpec, OrderedSpaceSpec};
    use crate::sobolev_grid::domain::GridDomain;

    #[test]
    fn scaled_chain() {
        let d = GridDomain::unit_interval(6).unwrap();
        let s = OrderedSpaceSpec::standard(NormSpec::Sobolev { domain: d, k: 1, p: 2.0 }).build().unwrap();
        let v = [0.5, 1.0, 0.0, 2.0, 1.0, 0.3];
        let chain: Vec<Vec<f64>> =
            (1..8).map(|j| v.iter().map(|e| (1.0 - 0.5f64.powi(j)) * e).collect()).collect();
        assert!(cone_norm_coincidence_check(&s, &chain, &v).unwrap().pass);
    }

    #[test]
    fn staggered_chain() {
        let s = OrderedSpaceSpec::standard_lp(3, 2.0).build().unwrap();
        let chain = alloc::vec![
            alloc::vec![0.0, 0.0, 0.0],
            alloc::vec![1.0, 0.0, 0.0],
            alloc::vec![1.0, 0.5, 0.0],
            alloc::vec![1.0, 1.0, 0.9],
        ];
        let r = cone_norm_coincidence_check(&s, &chain, &[1.0, 1.0, 1.0]).unwrap();
        assert!(r.pass);
    }

    #[test]
    fn decreasing_chain_is_rejected() {
        let s = OrderedSpaceSpec::standard_lp(2, 2.0).build().unwrap();
        let chain = alloc::vec![alloc::vec![1.0, 1.0], alloc::vec![0.5, 1.0]];
        assert!(matches!(cone_norm_coincidence_check(&s, &chain, &[1.0, 1.0]), Err(Error::Precondition(_))));
    }
}
