//! Push-in operators `S_n f = sum_y T_{y,n}(f h_y)` built from a chart cover
//! and a smooth partition of unity, and the boundary approximation
//! `R_n = rho_{delta_n} * S_n`.

use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)] // f64 methods resolve to std when it is linked
use num_traits::Float;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::chart::{chart_unchecked, BoundaryChart, CHART_SAMPLES};
use super::domain::{DomainKind, GridDomain, Point};
use super::mollifier::convolution_operator;
use crate::error::{Error, Result};
use crate::linalg::SparseMatrix;

/// Target value of `sum_y psi_y` when placing charts.
const PLACEMENT_LEVEL: f64 = 0.5;
/// Smallest `sum_y psi_y` accepted anywhere on the closed domain.
pub const COVER_FLOOR: f64 = 0.05;
const SNAP_TOL: f64 = 1e-12;

/// A finite family of charts whose bumps cover the closed domain.
#[derive(Debug, Clone)]
pub struct ChartCover {
    domain: GridDomain,
    charts: Vec<BoundaryChart>,
    boxes: Vec<[[f64; 2]; 2]>,
}

impl ChartCover {
    pub fn from_charts(domain: GridDomain, charts: Vec<BoundaryChart>) -> Self {
        let boxes = charts.iter().map(|c| c.support_box()).collect();
        ChartCover { domain, charts, boxes }
    }

    /// Interval: both endpoints and the midpoint. Rectangle: the four corners,
    /// edge charts placed greedily along each side, then interior balls for
    /// whatever is left uncovered.
    pub fn standard(domain: &GridDomain) -> Result<Self> {
        match domain.kind() {
            DomainKind::Torus { .. } => {
                Err(Error::InvalidParameter("push-in operators need a domain with boundary".into()))
            }
            DomainKind::Interval { a, b } => {
                // The endpoint tents fall to zero at the midpoint and the
                // middle tent at the endpoint plateaus, so the weighted
                // anchors move (almost) linearly between the three anchors.
                let l = b - a;
                let r = 0.5 * l / 0.7225;
                let rho = (0.5 * l - 0.2725 * r) / 0.945;
                let charts = vec![
                    chart_unchecked(domain, [a, 0.0], Some(r))?,
                    chart_unchecked(domain, [0.5 * (a + b), 0.0], Some(rho))?,
                    chart_unchecked(domain, [b, 0.0], Some(r))?,
                ];
                Ok(ChartCover::from_charts(*domain, charts))
            }
            DomainKind::Rectangle { a1, b1, a2, b2 } => rectangle_cover(domain, [a1, b1, a2, b2]),
        }
    }

    pub fn push(&mut self, chart: BoundaryChart) {
        self.boxes.push(chart.support_box());
        self.charts.push(chart);
    }

    pub fn domain(&self) -> &GridDomain {
        &self.domain
    }

    pub fn charts(&self) -> &[BoundaryChart] {
        &self.charts
    }

    fn bumps_at(&self, x: Point) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.charts.iter().zip(&self.boxes).enumerate().filter_map(move |(i, (c, bx))| {
            if x[0] < bx[0][0] || x[0] > bx[1][0] || x[1] < bx[0][1] || x[1] > bx[1][1] {
                return None;
            }
            let v = c.bump(x);
            (v > 0.0).then_some((i, v))
        })
    }

    /// `sum_y psi_y(x)`.
    pub fn bump_sum(&self, x: Point) -> f64 {
        self.bumps_at(x).map(|(_, v)| v).sum()
    }

    /// The partition of unity `h_y(x) = psi_y(x) / sum psi(x)`, nonzero entries only.
    pub fn partition_at(&self, x: Point) -> Vec<(usize, f64)> {
        let mut w: Vec<(usize, f64)> = self.bumps_at(x).collect();
        let s: f64 = w.iter().map(|e| e.1).sum();
        if s > 0.0 {
            w.iter_mut().for_each(|e| e.1 /= s);
        }
        w
    }

    /// Checks the cover on the grid nodes and on a random sample of the
    /// closed domain.
    pub fn verify(&self, grid: &GridDomain, seed: u64) -> Result<()> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let o = grid.origin();
        let ext = extent(grid);
        let random = (0..CHART_SAMPLES).map(|_| {
            let y = if grid.dimension() == 2 { o[1] + rng.gen::<f64>() * ext[1] } else { 0.0 };
            [o[0] + rng.gen::<f64>() * ext[0], y]
        });
        for x in grid.nodes().into_iter().chain(random.collect::<Vec<_>>()) {
            if self.bump_sum(x) < COVER_FLOOR {
                return Err(Error::CoverFailure { point: vec![x[0], x[1]] });
            }
        }
        Ok(())
    }
}

fn extent(d: &GridDomain) -> [f64; 2] {
    match d.kind() {
        DomainKind::Interval { a, b } => [b - a, 0.0],
        DomainKind::Torus { period } => [period, 0.0],
        DomainKind::Rectangle { a1, b1, a2, b2 } => [b1 - a1, b2 - a2],
    }
}

fn rectangle_cover(domain: &GridDomain, [a1, b1, a2, b2]: [f64; 4]) -> Result<ChartCover> {
    let (w, h) = (b1 - a1, b2 - a2);
    let mut charts = Vec::new();
    for x0 in [[a1, a2], [b1, a2], [a1, b2], [b1, b2]] {
        charts.push(chart_unchecked(domain, x0, Some(0.5 * w.min(h)))?);
    }
    let mut cover = ChartCover::from_charts(*domain, charts);

    // Sides as (start, direction, length).
    let sides = [([a1, a2], [1.0, 0.0], w), ([a1, b2], [1.0, 0.0], w), ([a1, a2], [0.0, 1.0], h), ([b1, a2], [0.0, 1.0], h)];
    const SCAN: usize = 4000;
    for (start, dir, len) in sides {
        let at = |s: f64| [start[0] + s * dir[0], start[1] + s * dir[1]];
        let mut i = 1;
        while i < SCAN {
            let s = len * i as f64 / SCAN as f64;
            if cover.bump_sum(at(s)) >= PLACEMENT_LEVEL {
                i += 1;
                continue;
            }
            let r = s.min(len - s).min(if dir[0] != 0.0 { h } else { w });
            cover.push(chart_unchecked(domain, at(s + 0.03 * r), None)?);
            if cover.bump_sum(at(s)) < PLACEMENT_LEVEL {
                return Err(Error::CoverFailure { point: at(s).to_vec() });
            }
        }
    }

    // Interior balls on a lattice of the open box.
    const LATTICE: usize = 160;
    for j in 1..LATTICE {
        for i in 1..LATTICE {
            let x = [a1 + w * i as f64 / LATTICE as f64, a2 + h * j as f64 / LATTICE as f64];
            if cover.bump_sum(x) >= PLACEMENT_LEVEL {
                continue;
            }
            let r = 0.95 * domain.boundary_distance(x);
            cover.push(chart_unchecked(domain, x, Some(r))?);
        }
    }
    Ok(cover)
}

/// Weights of linear (bilinear) interpolation at `x`; empty outside the closed domain.
pub fn interpolation_weights(domain: &GridDomain, x: Point) -> Vec<(usize, f64)> {
    if !domain.contains_closed(x, SNAP_TOL) {
        return Vec::new();
    }
    let o = domain.origin();
    let n = domain.n();
    let axis = |a: usize| -> [(usize, f64); 2] {
        let h = domain.spacing(a);
        let s = ((x[a] - o[a]) / h).clamp(0.0, (n - 1) as f64);
        let i = (s.floor() as usize).min(n - 2);
        let t = s - i as f64;
        [(i, 1.0 - t), (i + 1, t)]
    };
    let ax = axis(0);
    let mut out = Vec::with_capacity(4);
    if domain.dimension() == 1 {
        out.extend(ax.iter().filter(|e| e.1 > 0.0));
    } else {
        for (iy, wy) in axis(1) {
            for (ix, wx) in ax {
                let v = wx * wy;
                if v > 0.0 {
                    out.push((domain.flat_index(ix, iy), v));
                }
            }
        }
    }
    out
}

/// `S_n` on a grid together with the node set of `K_n`.
#[derive(Debug, Clone)]
pub struct PushIn {
    pub n: usize,
    pub matrix: SparseMatrix,
    /// Nodes lying in `K_n = ∪ closure(A_{y,n}(Omega ∩ V_y))`.
    pub k_mask: Vec<bool>,
    /// `min` boundary distance over the nodes of `K_n`.
    pub k_distance: f64,
}

impl PushIn {
    pub fn build(cover: &ChartCover, grid: &GridDomain, n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidParameter("push-in index must be at least 2".into()));
        }
        let mut rows = Vec::with_capacity(grid.node_count());
        let mut k_mask = vec![false; grid.node_count()];
        let mut k_distance = f64::INFINITY;
        for i in 0..grid.node_count() {
            let x = grid.node(i);
            let mut row: Vec<(usize, f64)> = Vec::new();
            for (idx, chart) in cover.charts().iter().enumerate() {
                let z = chart.inverse(n, x);
                if !(chart.in_closed_neighbourhood(z, 1e-12) && grid.contains_closed(z, SNAP_TOL)) {
                    continue;
                }
                k_mask[i] = true;
                let hy = cover.partition_at(z).into_iter().find(|e| e.0 == idx).map_or(0.0, |e| e.1);
                if hy == 0.0 {
                    continue;
                }
                for (j, w) in interpolation_weights(grid, z) {
                    row.push((j, hy * w));
                }
            }
            if k_mask[i] {
                k_distance = k_distance.min(grid.boundary_distance(x));
            }
            row.sort_unstable_by_key(|e| e.0);
            row.dedup_by(|b, a| {
                if a.0 == b.0 {
                    a.1 += b.1;
                    true
                } else {
                    false
                }
            });
            rows.push(row);
        }
        Ok(PushIn { n, matrix: SparseMatrix::new(rows, grid.node_count()), k_mask, k_distance })
    }
}

/// `S_n` on the standard chart cover of `domain`.
pub fn pushin_operator(domain: &GridDomain, n: usize) -> Result<PushIn> {
    let cover = ChartCover::standard(domain)?;
    cover.verify(domain, 0x9e37_79b9)?;
    PushIn::build(&cover, domain, n)
}

/// `R_n = rho_{delta_n} * S_n` with `delta_n = dist(K_n, boundary) / 3`.
#[derive(Debug, Clone)]
pub struct BoundaryApproximation {
    pub pushin: PushIn,
    pub delta: f64,
    pub matrix: SparseMatrix,
}

pub fn approx_identity_with_boundary(domain: &GridDomain, n: usize) -> Result<BoundaryApproximation> {
    let cover = ChartCover::standard(domain)?;
    cover.verify(domain, 0x9e37_79b9)?;
    approx_identity_from_cover(&cover, domain, n)
}

pub fn approx_identity_from_cover(cover: &ChartCover, grid: &GridDomain, n: usize) -> Result<BoundaryApproximation> {
    let pushin = PushIn::build(cover, grid, n)?;
    let delta = pushin.k_distance / 3.0;
    let h = (0..grid.dimension()).map(|a| grid.spacing(a)).fold(0.0, f64::max);
    if !(delta >= 2.0 * h) {
        return Err(Error::GridTooCoarse { delta, h });
    }
    let conv = convolution_operator(grid, delta)?;
    let matrix = conv.compose(&pushin.matrix);
    Ok(BoundaryApproximation { pushin, delta, matrix })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::LinearOperator;

    #[test]
    fn interval_partition_of_unity() {
        let d = GridDomain::unit_interval(101).unwrap();
        let cover = ChartCover::standard(&d).unwrap();
        assert_eq!(cover.charts().len(), 3);
        cover.verify(&d, 1).unwrap();
        for x in d.nodes() {
            let s: f64 = cover.partition_at(x).iter().map(|e| e.1).sum();
            assert!((s - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn pushin_of_one_stays_inside() {
        let d = GridDomain::unit_interval(201).unwrap();
        for n in [2, 4, 8] {
            let s = pushin_operator(&d, n).unwrap();
            let g = s.matrix.apply(&vec![1.0; d.node_count()]);
            assert_eq!(g[0], 0.0);
            assert_eq!(g[200], 0.0);
            for (i, v) in g.iter().enumerate() {
                assert!(*v >= 0.0);
                if !s.k_mask[i] {
                    assert_eq!(*v, 0.0);
                }
            }
            assert!(s.k_distance > 0.0);
        }
    }

    #[test]
    fn square_cover_is_valid() {
        let d = GridDomain::unit_square(41).unwrap();
        let cover = ChartCover::standard(&d).unwrap();
        cover.verify(&d, 2).unwrap();
        let s = PushIn::build(&cover, &d, 4).unwrap();
        let g = s.matrix.apply(&vec![1.0; d.node_count()]);
        for i in 0..d.node_count() {
            if d.is_boundary_node(i) {
                assert_eq!(g[i], 0.0);
            }
        }
    }

    #[test]
    fn interpolation_is_convex() {
        let d = GridDomain::unit_square(6).unwrap();
        let w = interpolation_weights(&d, [0.33, 0.71]);
        assert!((w.iter().map(|e| e.1).sum::<f64>() - 1.0).abs() < 1e-14);
        assert!(interpolation_weights(&d, [1.2, 0.5]).is_empty());
    }

    #[test]
    fn coarse_grid_is_rejected() {
        let d = GridDomain::unit_interval(33).unwrap();
        assert!(matches!(approx_identity_with_boundary(&d, 32), Err(Error::GridTooCoarse { .. })));
    }
}
