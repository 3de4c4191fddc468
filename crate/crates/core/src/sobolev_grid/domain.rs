use alloc::format;
use alloc::vec::Vec;

#[allow(unused_imports)] // f64 methods resolve to std when it is linked
use num_traits::Float;

use crate::error::{check_dim, Error, Result};

/// A point of the plane; one-dimensional domains use only the first coordinate.
pub type Point = [f64; 2];

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DomainKind {
    Interval { a: f64, b: f64 },
    Torus { period: f64 },
    Rectangle { a1: f64, b1: f64, a2: f64, b2: f64 },
}

/// Uniform grid over an interval, a one-dimensional torus or a rectangle.
///
/// Interval and rectangle grids include their boundary nodes; a torus grid of
/// `n` nodes has spacing `period / n`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridDomain {
    kind: DomainKind,
    n: usize,
}

impl GridDomain {
    pub fn new(kind: DomainKind, n: usize) -> Result<Self> {
        if n < 3 {
            return Err(Error::InvalidParameter(format!("grid needs at least 3 points per axis, got {n}")));
        }
        let ok = match kind {
            DomainKind::Interval { a, b } => a.is_finite() && b.is_finite() && b > a,
            DomainKind::Torus { period } => period.is_finite() && period > 0.0,
            DomainKind::Rectangle { a1, b1, a2, b2 } => {
                [a1, b1, a2, b2].iter().all(|v| v.is_finite()) && b1 > a1 && b2 > a2
            }
        };
        if !ok {
            return Err(Error::InvalidParameter(format!("degenerate domain {kind:?}")));
        }
        Ok(GridDomain { kind, n })
    }

    pub fn unit_interval(n: usize) -> Result<Self> {
        GridDomain::new(DomainKind::Interval { a: 0.0, b: 1.0 }, n)
    }

    pub fn unit_torus(n: usize) -> Result<Self> {
        GridDomain::new(DomainKind::Torus { period: 1.0 }, n)
    }

    pub fn unit_square(n: usize) -> Result<Self> {
        GridDomain::new(DomainKind::Rectangle { a1: 0.0, b1: 1.0, a2: 0.0, b2: 1.0 }, n)
    }

    pub fn kind(&self) -> DomainKind {
        self.kind
    }

    /// Points per axis.
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dimension(&self) -> usize {
        match self.kind {
            DomainKind::Rectangle { .. } => 2,
            _ => 1,
        }
    }

    pub fn node_count(&self) -> usize {
        self.n.pow(self.dimension() as u32)
    }

    pub fn is_periodic(&self) -> bool {
        matches!(self.kind, DomainKind::Torus { .. })
    }

    /// Grid spacing along `axis`.
    pub fn spacing(&self, axis: usize) -> f64 {
        let n = self.n as f64;
        match self.kind {
            DomainKind::Interval { a, b } => (b - a) / (n - 1.0),
            DomainKind::Torus { period } => period / n,
            DomainKind::Rectangle { a1, b1, a2, b2 } => {
                if axis == 0 {
                    (b1 - a1) / (n - 1.0)
                } else {
                    (b2 - a2) / (n - 1.0)
                }
            }
        }
    }

    pub fn h(&self) -> f64 {
        self.spacing(0)
    }

    /// Quadrature weight of a single node (the cell volume).
    pub fn cell_volume(&self) -> f64 {
        (0..self.dimension()).map(|a| self.spacing(a)).product()
    }

    pub fn origin(&self) -> Point {
        match self.kind {
            DomainKind::Interval { a, .. } => [a, 0.0],
            DomainKind::Torus { .. } => [0.0, 0.0],
            DomainKind::Rectangle { a1, a2, .. } => [a1, a2],
        }
    }

    /// Axis-wise index of a node.
    pub fn node_index(&self, i: usize) -> [usize; 2] {
        [i % self.n, i / self.n]
    }

    pub fn flat_index(&self, ix: usize, iy: usize) -> usize {
        ix + self.n * iy
    }

    pub fn node(&self, i: usize) -> Point {
        let [ix, iy] = self.node_index(i);
        let o = self.origin();
        if self.dimension() == 1 {
            [o[0] + ix as f64 * self.spacing(0), 0.0]
        } else {
            [o[0] + ix as f64 * self.spacing(0), o[1] + iy as f64 * self.spacing(1)]
        }
    }

    pub fn nodes(&self) -> Vec<Point> {
        (0..self.node_count()).map(|i| self.node(i)).collect()
    }

    /// Signed distance to the boundary: positive inside, negative outside,
    /// infinite on the torus.
    pub fn boundary_distance(&self, x: Point) -> f64 {
        match self.kind {
            DomainKind::Interval { a, b } => (x[0] - a).min(b - x[0]),
            DomainKind::Torus { .. } => f64::INFINITY,
            DomainKind::Rectangle { a1, b1, a2, b2 } => {
                let inside = (x[0] - a1).min(b1 - x[0]).min(x[1] - a2).min(b2 - x[1]);
                if inside >= 0.0 {
                    inside
                } else {
                    let dx = (a1 - x[0]).max(x[0] - b1).max(0.0);
                    let dy = (a2 - x[1]).max(x[1] - b2).max(0.0);
                    -(dx * dx + dy * dy).sqrt()
                }
            }
        }
    }

    pub fn contains_closed(&self, x: Point, tol: f64) -> bool {
        self.boundary_distance(x) >= -tol
    }

    pub fn contains_open(&self, x: Point) -> bool {
        self.boundary_distance(x) > 0.0
    }

    pub fn is_boundary_node(&self, i: usize) -> bool {
        if self.is_periodic() {
            return false;
        }
        let [ix, iy] = self.node_index(i);
        let last = self.n - 1;
        ix == 0 || ix == last || (self.dimension() == 2 && (iy == 0 || iy == last))
    }

    /// Total measure of the domain as seen by the node quadrature.
    pub fn discrete_measure(&self) -> f64 {
        self.cell_volume() * self.node_count() as f64
    }

    pub fn kind_name(&self) -> &'static str {
        match self.kind {
            DomainKind::Interval { .. } => "interval",
            DomainKind::Torus { .. } => "torus",
            DomainKind::Rectangle { .. } => "rectangle",
        }
    }
}

/// Sampled function on a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    domain: GridDomain,
    values: Vec<f64>,
}

impl GridFunction {
    pub fn new(domain: GridDomain, values: Vec<f64>) -> Result<Self> {
        check_dim(domain.node_count(), values.len())?;
        Ok(GridFunction { domain, values })
    }

    pub fn from_fn(domain: GridDomain, f: impl Fn(Point) -> f64) -> Self {
        let values = (0..domain.node_count()).map(|i| f(domain.node(i))).collect();
        GridFunction { domain, values }
    }

    pub fn zeros(domain: GridDomain) -> Self {
        GridFunction { domain, values: alloc::vec![0.0; domain.node_count()] }
    }

    pub fn domain(&self) -> &GridDomain {
        &self.domain
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    /// Discrete `L^p` norm with the node quadrature.
    pub fn lp_norm(&self, p: f64) -> f64 {
        let w = self.domain.cell_volume();
        (w * self.values.iter().map(|v| v.abs().powf(p)).sum::<f64>()).powf(1.0 / p)
    }

    pub fn sup_norm(&self) -> f64 {
        crate::linalg::norm_inf(&self.values)
    }
}
