//! The standard bump mollifier and its discrete convolution operators.

use alloc::boxed::Box;
use alloc::format;
use alloc::vec::Vec;

#[allow(unused_imports)] // f64 methods resolve to std when it is linked
use num_traits::Float;

use super::domain::{DomainKind, GridDomain, GridFunction};
use crate::error::{Error, Result};
use crate::linalg::{Identity, LinearOperator, SparseMatrix};
use crate::span_lattice::{ApproximationScheme, OperatorFactory};

/// Unnormalized profile `exp(-1/(1 - t^2))` on `|t| < 1`.
pub fn bump_profile(t: f64) -> f64 {
    if t.abs() >= 1.0 {
        0.0
    } else {
        (-1.0 / (1.0 - t * t)).exp()
    }
}

/// Composite Simpson rule on `[a, b]` with `m` (even) subintervals.
fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, m: usize) -> f64 {
    let h = (b - a) / m as f64;
    let mut s = f(a) + f(b);
    for i in 1..m {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        s += w * f(a + i as f64 * h);
    }
    s * h / 3.0
}

/// Constant `c` making `c * exp(-1/(1-|x|^2))` a probability density on `R^d`.
pub fn normalization_constant(dimension: usize) -> f64 {
    let integral = match dimension {
        1 => simpson(bump_profile, -1.0, 1.0, 4000),
        _ => 2.0 * core::f64::consts::PI * simpson(|r| r * bump_profile(r), 0.0, 1.0, 4000),
    };
    1.0 / integral
}

/// `rho_delta(x) = delta^{-d} c exp(-1/(1 - |x/delta|^2))`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mollifier {
    dimension: usize,
    scale: f64,
    constant: f64,
}

impl Mollifier {
    pub fn new(dimension: usize, scale: f64) -> Result<Self> {
        if !(scale.is_finite() && scale > 0.0) || !(1..=2).contains(&dimension) {
            return Err(Error::InvalidParameter(format!(
                "mollifier needs dimension 1 or 2 and a positive scale, got d = {dimension}, delta = {scale}"
            )));
        }
        Ok(Mollifier { dimension, scale, constant: normalization_constant(dimension) })
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn eval(&self, radius: f64) -> f64 {
        self.constant * bump_profile(radius / self.scale) / self.scale.powi(self.dimension as i32)
    }

    /// Node offsets inside the open support and their weights, renormalized
    /// so that the node quadrature of the kernel is exactly one.
    pub fn discrete_kernel(&self, domain: &GridDomain) -> Vec<([isize; 2], f64)> {
        let hx = domain.spacing(0);
        let hy = if domain.dimension() == 2 { domain.spacing(1) } else { 0.0 };
        let jx = (self.scale / hx).ceil() as isize;
        let jy = if domain.dimension() == 2 { (self.scale / hy).ceil() as isize } else { 0 };
        let mut out = Vec::new();
        for oy in -jy..=jy {
            for ox in -jx..=jx {
                let r = ((ox as f64 * hx).powi(2) + (oy as f64 * hy).powi(2)).sqrt();
                let v = self.eval(r);
                if v > 0.0 {
                    out.push(([ox, oy], v));
                }
            }
        }
        let total: f64 = out.iter().map(|(_, v)| v).sum();
        for (_, v) in out.iter_mut() {
            *v /= total;
        }
        out
    }
}

/// Convolution with `rho_delta` as a sparse operator: periodic on the torus,
/// zero extension outside intervals and rectangles. No resolution guard.
pub fn convolution_operator(domain: &GridDomain, delta: f64) -> Result<SparseMatrix> {
    let moll = Mollifier::new(domain.dimension(), delta)?;
    if let super::domain::DomainKind::Torus { period } = domain.kind() {
        if delta > 0.5 * period {
            return Err(Error::InvalidParameter(format!(
                "mollifier scale {delta} exceeds half the period {period}"
            )));
        }
    }
    let kernel = moll.discrete_kernel(domain);
    let n = domain.n() as isize;
    let rows = (0..domain.node_count())
        .map(|i| {
            let [ix, iy] = domain.node_index(i);
            let mut row: Vec<(usize, f64)> = kernel
                .iter()
                .filter_map(|([ox, oy], w)| {
                    let (sx, sy) = (ix as isize - ox, iy as isize - oy);
                    if domain.is_periodic() {
                        Some((sx.rem_euclid(n) as usize, *w))
                    } else if (0..n).contains(&sx) && (0..n).contains(&sy) {
                        Some((domain.flat_index(sx as usize, sy as usize), *w))
                    } else {
                        None
                    }
                })
                .collect();
            row.sort_unstable_by_key(|e| e.0);
            row
        })
        .collect();
    Ok(SparseMatrix::new(rows, domain.node_count()))
}

/// Mollification `rho_delta * f`; requires `delta >= 2h` on every axis.
pub fn mollify(f: &GridFunction, delta: f64) -> Result<GridFunction> {
    let d = f.domain();
    let h = (0..d.dimension()).map(|a| d.spacing(a)).fold(0.0, f64::max);
    if !(delta >= 2.0 * h) {
        return Err(Error::GridTooCoarse { delta, h });
    }
    let op = convolution_operator(d, delta)?;
    GridFunction::new(*d, op.apply(f.values()))
}

/// Longest side of the domain.
fn extent(domain: &GridDomain) -> f64 {
    match domain.kind() {
        DomainKind::Interval { a, b } => b - a,
        DomainKind::Torus { period } => period,
        DomainKind::Rectangle { a1, b1, a2, b2 } => (b1 - a1).max(b2 - a2),
    }
}

/// Scheme with `J = id` and `R_n = rho_{L/n} *` (`L` the longest side) for
/// `n = 2, 4, ..., n_max`. Once `L/n` drops below the spacing the operator is
/// the identity, so the scheme settles on any grid.
pub fn mollifier_scheme(domain: &GridDomain, n_max: usize) -> Result<ApproximationScheme> {
    let grid = *domain;
    let l = extent(domain);
    let factory: OperatorFactory =
        Box::new(move |n| Ok(Box::new(convolution_operator(&grid, l / n as f64)?) as Box<dyn LinearOperator>));
    ApproximationScheme::new(Box::new(Identity(domain.node_count())), 2, n_max, factory)
}
