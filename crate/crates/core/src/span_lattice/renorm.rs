//! The lattice renorm `|||x||| = sup {||w|| : 0 <= w <= |x|}` and its
//! equivalence bounds.

use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{check_dim, Result};
use crate::linalg::abs;
use crate::ordered_space::OrderedSpace;

/// Largest dimension handled by full vertex enumeration.
pub const RENORM_EXACT_DIM: usize = 16;
const ASCENT_STARTS: usize = 32;
const RENORM_SEED: u64 = 0x4e40_0003;

#[derive(Debug, Clone, PartialEq)]
pub struct RenormValue {
    pub value: f64,
    /// A vertex of `[0, |x|]` attaining `value`.
    pub maximizer: Vec<f64>,
    /// False when `value` is only a lower bound (dimension above the cutoff).
    pub exact: bool,
}

fn vertex(a: &[f64], mask: &[bool]) -> Vec<f64> {
    a.iter().zip(mask).map(|(v, m)| if *m { *v } else { 0.0 }).collect()
}

/// A convex function attains its maximum over a box at a vertex, so for
/// `dim <= 16` all `2^dim` vertices are scanned. Above that, single-flip
/// ascent from random vertices gives a lower bound.
pub fn renorm_value(space: &OrderedSpace, x: &[f64]) -> Result<RenormValue> {
    space.require_standard("renorm_value")?;
    check_dim(space.dim(), x.len())?;
    let a = abs(x);
    let d = a.len();
    if d <= RENORM_EXACT_DIM {
        let mut best = (0.0, alloc::vec![0.0; d]);
        let mut w = alloc::vec![0.0; d];
        for mask in 0u32..(1u32 << d) {
            for (j, wj) in w.iter_mut().enumerate() {
                *wj = if mask >> j & 1 == 1 { a[j] } else { 0.0 };
            }
            let v = space.norm(&w)?;
            if v > best.0 {
                best = (v, w.clone());
            }
        }
        return Ok(RenormValue { value: best.0, maximizer: best.1, exact: true });
    }

    let mut rng = ChaCha8Rng::seed_from_u64(RENORM_SEED);
    let mut best = (space.norm(&a)?, a.clone());
    for start in 0..ASCENT_STARTS {
        let mut mask: Vec<bool> = if start == 0 { alloc::vec![true; d] } else { (0..d).map(|_| rng.gen()).collect() };
        let mut value = space.norm(&vertex(&a, &mask))?;
        loop {
            let mut improved = false;
            for j in 0..d {
                mask[j] = !mask[j];
                let v = space.norm(&vertex(&a, &mask))?;
                if v > value {
                    value = v;
                    improved = true;
                } else {
                    mask[j] = !mask[j];
                }
            }
            if !improved {
                break;
            }
        }
        if value > best.0 {
            best = (value, vertex(&a, &mask));
        }
    }
    Ok(RenormValue { value: best.0, maximizer: best.1, exact: false })
}

#[derive(Debug, Clone, PartialEq)]
pub struct RenormBoundsReport {
    pub norm: f64,
    pub renorm: f64,
    pub renorm_exact: bool,
    /// `2 M |||x||| - ||x||`.
    pub lower_slack: f64,
    /// `2 M^2 C ||x|| - |||x|||`.
    pub upper_slack: f64,
    pub pass: bool,
}

/// Checks `||x|| <= 2M |||x|||` and `|||x||| <= 2M^2 C ||x||` at `x`.
pub fn renorm_bounds_check(space: &OrderedSpace, x: &[f64], m: f64, c: f64) -> Result<RenormBoundsReport> {
    let norm = space.norm(x)?;
    let r = renorm_value(space, x)?;
    let lower_slack = 2.0 * m * r.value - norm;
    let upper_slack = 2.0 * m * m * c * norm - r.value;
    // Rounding allowance for the two products, relative to the compared values.
    let eps = 1e-14 * norm.max(r.value);
    Ok(RenormBoundsReport {
        norm,
        renorm: r.value,
        renorm_exact: r.exact,
        lower_slack,
        upper_slack,
        pass: lower_slack >= -eps && upper_slack >= -eps,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ordered_space::{NormSpec, OrderedSpaceSpec};
    use crate::sobolev_grid::domain::GridDomain;

    #[test]
    fn monotone_norms_are_unchanged() {
        let s = OrderedSpaceSpec { dim: 3, cone: crate::ordered_space::PolyhedralCone::standard(3), norm: NormSpec::Lp { p: 3.0, weights: alloc::vec![1.0, 2.0, 0.5] } }
            .build()
            .unwrap();
        let x = [0.3, -1.0, 2.0];
        let r = renorm_value(&s, &x).unwrap();
        assert!((r.value - s.norm(&x).unwrap()).abs() < 1e-15);
        assert!(r.exact);
        assert_eq!(renorm_value(&s, &[0.0; 3]).unwrap().value, 0.0);
    }

    #[test]
    fn sobolev_three_points() {
        let d = GridDomain::unit_interval(3).unwrap();
        let s = OrderedSpaceSpec::standard(NormSpec::Sobolev { domain: d, k: 1, p: 2.0 }).build().unwrap();
        let r = renorm_value(&s, &[1.0, -1.0, 1.0]).unwrap();
        let mut best = 0.0f64;
        for m in 0..8 {
            let w: Vec<f64> = (0..3).map(|j| (m >> j & 1) as f64).collect();
            best = best.max(s.norm(&w).unwrap());
        }
        assert_eq!(r.value, best);
        assert!(r.value > s.norm(&[1.0, 1.0, 1.0]).unwrap());
    }

    #[test]
    fn large_dimensions_are_flagged() {
        let d = GridDomain::unit_interval(20).unwrap();
        let s = OrderedSpaceSpec::standard(NormSpec::Sobolev { domain: d, k: 1, p: 2.0 }).build().unwrap();
        let x = alloc::vec![1.0; 20];
        let r = renorm_value(&s, &x).unwrap();
        assert!(!r.exact);
        // The alternating vertex is found by ascent.
        let alt: Vec<f64> = (0..20).map(|i| (i % 2) as f64).collect();
        assert!(r.value >= s.norm(&alt).unwrap() - 1e-12);
    }

    #[test]
    fn euclidean_bounds() {
        let s = OrderedSpaceSpec::standard_lp(4, 2.0).build().unwrap();
        let r = renorm_bounds_check(&s, &[1.0, -2.0, 0.0, 3.0], 1.0, 1.0).unwrap();
        assert!(r.pass);
        assert!((r.lower_slack - r.norm).abs() < 1e-12);
        assert!((r.upper_slack - r.norm).abs() < 1e-12);
    }
}
