use alloc::format;
use alloc::vec::Vec;

#[allow(unused_imports)] // f64 methods resolve to std when it is linked
use num_traits::Float;

use crate::error::{check_dim, Error, Result};
use crate::sobolev_grid::difference::SobolevOperator;
use crate::sobolev_grid::dual_norm::NegativeSobolevNorm;
use crate::sobolev_grid::domain::GridDomain;

/// Description of a norm on `R^dim`.
#[derive(Debug, Clone, PartialEq)]
pub enum NormSpec {
    /// `(sum_i w_i |x_i|^p)^(1/p)`; `p = 1` is admitted for this kind.
    Lp { p: f64, weights: Vec<f64> },
    /// Discrete `W^{k,p}` norm of the grid function with values `x`.
    Sobolev { domain: GridDomain, k: usize, p: f64 },
    /// Discrete `W^{-k,p}` norm of the grid function with values `x`.
    NegativeSobolev { domain: GridDomain, k: usize, p: f64 },
}

impl NormSpec {
    pub fn euclidean(dim: usize) -> Self {
        NormSpec::Lp { p: 2.0, weights: alloc::vec![1.0; dim] }
    }

    pub fn lp(dim: usize, p: f64) -> Self {
        NormSpec::Lp { p, weights: alloc::vec![1.0; dim] }
    }

    pub fn dim(&self) -> usize {
        match self {
            NormSpec::Lp { weights, .. } => weights.len(),
            NormSpec::Sobolev { domain, .. } | NormSpec::NegativeSobolev { domain, .. } => domain.node_count(),
        }
    }

    pub fn exponent(&self) -> f64 {
        match self {
            NormSpec::Lp { p, .. } | NormSpec::Sobolev { p, .. } | NormSpec::NegativeSobolev { p, .. } => *p,
        }
    }

    pub fn compile(&self) -> Result<Norm> {
        let kind = match self {
            NormSpec::Lp { p, weights } => {
                if !(p.is_finite() && *p >= 1.0) {
                    return Err(Error::InvalidParameter(format!("exponent p = {p} must lie in [1, inf)")));
                }
                if weights.is_empty() || weights.iter().any(|w| !(w.is_finite() && *w > 0.0)) {
                    return Err(Error::InvalidParameter("weights must be positive and finite".into()));
                }
                NormKind::Lp { p: *p, weights: weights.clone() }
            }
            NormSpec::Sobolev { domain, k, p } => {
                crate::sobolev_grid::difference::check_exponent(*p)?;
                NormKind::Sobolev { op: SobolevOperator::new(*domain, *k)?, p: *p }
            }
            NormSpec::NegativeSobolev { domain, k, p } => {
                NormKind::NegativeSobolev(NegativeSobolevNorm::new(*domain, *k, *p)?)
            }
        };
        Ok(Norm { spec: self.clone(), kind })
    }
}

#[derive(Debug, Clone)]
enum NormKind {
    Lp { p: f64, weights: Vec<f64> },
    Sobolev { op: SobolevOperator, p: f64 },
    NegativeSobolev(NegativeSobolevNorm),
}

/// A compiled norm with value and (sub)gradient.
#[derive(Debug, Clone)]
pub struct Norm {
    spec: NormSpec,
    kind: NormKind,
}

impl Norm {
    pub fn spec(&self) -> &NormSpec {
        &self.spec
    }

    pub fn dim(&self) -> usize {
        self.spec.dim()
    }

    /// Whether `|x| <= |y|` componentwise implies `||x|| <= ||y||`.
    pub fn is_lattice_norm(&self) -> bool {
        matches!(self.kind, NormKind::Lp { .. })
    }

    pub fn value(&self, x: &[f64]) -> Result<f64> {
        check_dim(self.dim(), x.len())?;
        Ok(match &self.kind {
            NormKind::Lp { p, weights } => {
                let s: f64 = x.iter().zip(weights).map(|(v, w)| w * v.abs().powf(*p)).sum();
                s.powf(1.0 / p)
            }
            NormKind::Sobolev { op, p } => op.norm(x, *p),
            NormKind::NegativeSobolev(n) => n.value(x)?,
        })
    }

    /// Gradient where the norm is differentiable; zero at the origin and the
    /// sign subgradient for `p = 1`.
    pub fn gradient(&self, x: &[f64]) -> Result<Vec<f64>> {
        check_dim(self.dim(), x.len())?;
        Ok(match &self.kind {
            NormKind::Lp { p, weights } => {
                let value = self.value(x)?;
                if value == 0.0 {
                    return Ok(alloc::vec![0.0; x.len()]);
                }
                let denom = value.powf(p - 1.0);
                x.iter()
                    .zip(weights)
                    .map(|(v, w)| {
                        if *p == 1.0 {
                            w * sign(*v)
                        } else {
                            w * v.abs().powf(p - 1.0) * v.signum() / denom
                        }
                    })
                    .collect()
            }
            NormKind::Sobolev { op, p } => op.norm_gradient(x, *p),
            NormKind::NegativeSobolev(n) => n.gradient(x)?,
        })
    }
}

fn sign(v: f64) -> f64 {
    if v > 0.0 {
        1.0
    } else if v < 0.0 {
        -1.0
    } else {
        0.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_parameters() {
        assert!(NormSpec::Lp { p: 0.5, weights: alloc::vec![1.0] }.compile().is_err());
        assert!(NormSpec::Lp { p: 2.0, weights: alloc::vec![1.0, 0.0] }.compile().is_err());
        let d = GridDomain::unit_interval(8).unwrap();
        assert!(NormSpec::Sobolev { domain: d, k: 1, p: 1.0 }.compile().is_err());
    }

    #[test]
    fn weighted_lp_value_and_gradient() {
        let n = NormSpec::Lp { p: 3.0, weights: alloc::vec![1.0, 2.0] }.compile().unwrap();
        let x = [1.0, -1.0];
        assert!((n.value(&x).unwrap() - 3f64.powf(1.0 / 3.0)).abs() < 1e-15);
        let g = n.gradient(&x).unwrap();
        for j in 0..2 {
            let mut xp = x;
            xp[j] += 1e-7;
            let fd = (n.value(&xp).unwrap() - n.value(&x).unwrap()) / 1e-7;
            assert!((fd - g[j]).abs() < 1e-6);
        }
        assert!(n.value(&[1.0]).is_err());
    }
}
