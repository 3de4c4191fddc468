//! Affine compression charts near points of a closed box domain.
//!
//! Every chart compresses towards an anchor point `P` with a matrix `B_n`, so
//! `A_n(x) = P + B_n (x - P)`, i.e. `b_n = (I - B_n) P`. Interior charts use
//! `P = x0` and `B_n = (1 - 1/n) I`. Boundary charts work in a local frame
//! `(tangent, inward normal)` centred at `x0`, where the domain is the region
//! above a graph `F`, and compress only the normal coordinate towards
//! `c = (0, r/4)`.

use alloc::format;
use alloc::vec::Vec;

#[allow(unused_imports)] // f64 methods resolve to std when it is linked
use num_traits::Float;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::domain::{DomainKind, GridDomain, Point};
use crate::error::{Error, Result};

/// Samples used to check the containment property of a chart.
pub const CHART_SAMPLES: usize = 10_000;
/// Compression indices checked by [`build_boundary_chart`].
pub const DEFAULT_CHART_INDICES: [usize; 5] = [2, 4, 8, 16, 32];
/// Tangential half-width of a boundary chart relative to its radius.
const DELTA_FRACTION: f64 = 0.12;
const BOUNDARY_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ChartKind {
    /// `V` is the open ball of the given radius around the centre.
    Interior { radius: f64 },
    /// `V = B_delta(0) x (-r/4, 3r/4)` in the local frame.
    Boundary {
        r: f64,
        delta: f64,
        tangent: [f64; 2],
        normal: [f64; 2],
        /// The local graph is `|v|` (a box corner seen along its diagonal) rather than `0`.
        corner: bool,
    },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryChart {
    center: Point,
    dimension: usize,
    kind: ChartKind,
}

fn dot2(a: [f64; 2], b: [f64; 2]) -> f64 {
    a[0] * b[0] + a[1] * b[1]
}

/// C² smoothstep on `[0, 1]`.
pub fn smoothstep(z: f64) -> f64 {
    let z = z.clamp(0.0, 1.0);
    z * z * z * (z * (6.0 * z - 15.0) + 10.0)
}

const ROUNDING: f64 = 0.05;

/// C² rounding of `max(s, 0)`, exact outside `|s| < ROUNDING`.
fn smooth_ramp(s: f64) -> f64 {
    if s <= -ROUNDING {
        0.0
    } else if s >= ROUNDING {
        s
    } else {
        let z = (s + ROUNDING) / (2.0 * ROUNDING);
        2.0 * ROUNDING * (z * z * z - 0.5 * z * z * z * z)
    }
}

/// C² rounding of `clamp(z, 0, 1)` with values in `[0, 1]`.
pub fn smooth_clamp(z: f64) -> f64 {
    smooth_ramp(z) - smooth_ramp(z - 1.0)
}

/// Tent profile in a normalized coordinate `t >= 0`: one near `t = 0`,
/// linear in between, zero for `t >= 0.99`.
pub fn tent(t: f64) -> f64 {
    smooth_clamp(1.0 + ROUNDING - t / 0.9)
}

impl BoundaryChart {
    pub fn center(&self) -> Point {
        self.center
    }

    pub fn kind(&self) -> ChartKind {
        self.kind
    }

    pub fn is_boundary(&self) -> bool {
        matches!(self.kind, ChartKind::Boundary { .. })
    }

    /// Local coordinates `(tangent, normal)` of `x`; interior charts use the identity frame.
    pub fn to_local(&self, x: Point) -> [f64; 2] {
        let d = [x[0] - self.center[0], x[1] - self.center[1]];
        match self.kind {
            ChartKind::Interior { .. } => d,
            ChartKind::Boundary { tangent, normal, .. } => {
                if self.dimension == 1 {
                    [0.0, d[0] * normal[0]]
                } else {
                    [dot2(d, tangent), dot2(d, normal)]
                }
            }
        }
    }

    pub fn to_global(&self, y: [f64; 2]) -> Point {
        match self.kind {
            ChartKind::Interior { .. } => [self.center[0] + y[0], self.center[1] + y[1]],
            ChartKind::Boundary { tangent, normal, .. } => {
                if self.dimension == 1 {
                    [self.center[0] + y[1] * normal[0], 0.0]
                } else {
                    [
                        self.center[0] + y[0] * tangent[0] + y[1] * normal[0],
                        self.center[1] + y[0] * tangent[1] + y[1] * normal[1],
                    ]
                }
            }
        }
    }

    /// Fixed point `P` of every `A_n`.
    pub fn anchor(&self) -> Point {
        match self.kind {
            ChartKind::Interior { .. } => self.center,
            ChartKind::Boundary { r, .. } => self.to_global([0.0, 0.25 * r]),
        }
    }

    /// `B_n` in global coordinates.
    pub fn linear_part(&self, n: usize) -> [[f64; 2]; 2] {
        let s = 1.0 - 1.0 / n as f64;
        match self.kind {
            ChartKind::Interior { .. } => [[s, 0.0], [0.0, s]],
            ChartKind::Boundary { tangent, normal, .. } => {
                if self.dimension == 1 {
                    return [[s, 0.0], [0.0, 1.0]];
                }
                let mut b = [[0.0; 2]; 2];
                for (i, row) in b.iter_mut().enumerate() {
                    for (j, v) in row.iter_mut().enumerate() {
                        *v = tangent[i] * tangent[j] + s * normal[i] * normal[j];
                    }
                }
                b
            }
        }
    }

    /// `b_n = (I - B_n) P`.
    pub fn translation(&self, n: usize) -> [f64; 2] {
        let b = self.linear_part(n);
        let p = self.anchor();
        [p[0] - b[0][0] * p[0] - b[0][1] * p[1], p[1] - b[1][0] * p[0] - b[1][1] * p[1]]
    }

    fn compress(&self, x: Point, factor: f64) -> Point {
        match self.kind {
            ChartKind::Interior { .. } => {
                let c = self.center;
                [c[0] + factor * (x[0] - c[0]), c[1] + factor * (x[1] - c[1])]
            }
            ChartKind::Boundary { r, .. } => {
                let y = self.to_local(x);
                let c = 0.25 * r;
                self.to_global([y[0], c + factor * (y[1] - c)])
            }
        }
    }

    /// `A_n(x)`.
    pub fn map(&self, n: usize, x: Point) -> Point {
        self.compress(x, 1.0 - 1.0 / n as f64)
    }

    /// `A_n^{-1}(x)`.
    pub fn inverse(&self, n: usize, x: Point) -> Point {
        self.compress(x, n as f64 / (n as f64 - 1.0))
    }

    /// Coordinates normalized so that `V` becomes the open unit box (or ball).
    fn normalized(&self, x: Point) -> [f64; 2] {
        match self.kind {
            ChartKind::Interior { radius } => {
                let d = [x[0] - self.center[0], x[1] - self.center[1]];
                [(d[0] * d[0] + d[1] * d[1]).sqrt() / radius, 0.0]
            }
            ChartKind::Boundary { r, delta, .. } => {
                let y = self.to_local(x);
                let t = if self.dimension == 1 { 0.0 } else { y[0] / delta };
                [t, (y[1] - 0.25 * r) / (0.5 * r)]
            }
        }
    }

    /// Whether `x` lies in the closure of `V` (with slack `tol` in normalized units).
    pub fn in_closed_neighbourhood(&self, x: Point, tol: f64) -> bool {
        let q = self.normalized(x);
        q[0].abs() <= 1.0 + tol && q[1].abs() <= 1.0 + tol
    }

    /// Smooth bump supported in `V`: a tent in each normalized coordinate.
    /// Boundary charts keep the value one on the outer side of the anchor and
    /// are cut off only outside the domain.
    pub fn bump(&self, x: Point) -> f64 {
        let q = self.normalized(x);
        match self.kind {
            ChartKind::Interior { .. } => tent(q[0]),
            ChartKind::Boundary { .. } => {
                tent(q[0].abs()) * tent(q[1].max(0.0)) * smooth_clamp((q[1] + 0.95) / 0.2)
            }
        }
    }

    /// Axis-aligned box containing the support of [`BoundaryChart::bump`].
    pub fn support_box(&self) -> [[f64; 2]; 2] {
        let corners: Vec<Point> = match self.kind {
            ChartKind::Interior { radius } => {
                let c = self.center;
                let s = 0.99 * radius;
                alloc::vec![[c[0] - s, c[1] - s], [c[0] + s, c[1] + s]]
            }
            ChartKind::Boundary { r, delta, .. } => {
                let (lo, hi) = (0.25 * r - 0.5 * r, 0.25 * r + 0.495 * r);
                let t = if self.dimension == 1 { 0.0 } else { 0.99 * delta };
                [[-t, lo], [t, lo], [-t, hi], [t, hi]].iter().map(|y| self.to_global(*y)).collect()
            }
        };
        let mut bx = [[f64::INFINITY; 2], [f64::NEG_INFINITY; 2]];
        for c in corners {
            for a in 0..2 {
                bx[0][a] = bx[0][a].min(c[a]);
                bx[1][a] = bx[1][a].max(c[a]);
            }
        }
        bx
    }

    /// Draws a point of the closure of `V` uniformly.
    fn sample_neighbourhood(&self, rng: &mut ChaCha8Rng) -> Point {
        match self.kind {
            ChartKind::Interior { radius } => loop {
                let y = [rng.gen_range(-1.0..=1.0), if self.dimension == 2 { rng.gen_range(-1.0..=1.0) } else { 0.0 }];
                if y[0] * y[0] + y[1] * y[1] <= 1.0 {
                    return [self.center[0] + radius * y[0], self.center[1] + radius * y[1]];
                }
            },
            ChartKind::Boundary { r, delta, .. } => {
                let t = if self.dimension == 2 { rng.gen_range(-delta..=delta) } else { 0.0 };
                self.to_global([t, rng.gen_range(-0.25 * r..=0.75 * r)])
            }
        }
    }

    /// Checks `closure(A_n(Omega ∩ V)) ⊂ Omega` on `samples` points of
    /// `closure(Omega) ∩ closure(V)` for every `n` in `indices`.
    /// Returns the smallest boundary distance of an image point.
    pub fn verify_containment(&self, domain: &GridDomain, indices: &[usize], samples: usize, seed: u64) -> Result<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut points = alloc::vec![self.center];
        let mut attempts = 0usize;
        while points.len() < samples {
            attempts += 1;
            if attempts > 50 * samples {
                return Err(Error::Precondition(format!(
                    "chart at {:?} barely meets the domain; sampling gave up",
                    self.center
                )));
            }
            let x = self.sample_neighbourhood(&mut rng);
            if domain.contains_closed(x, 0.0) {
                points.push(x);
            }
        }
        let mut margin = f64::INFINITY;
        for &n in indices {
            if n < 2 {
                return Err(Error::InvalidParameter(format!("compression index {n} must be at least 2")));
            }
            for &x in &points {
                let y = self.map(n, x);
                let d = domain.boundary_distance(y);
                if !(d > 0.0) {
                    return Err(Error::ChartContainment { point: alloc::vec![x[0], x[1]] });
                }
                margin = margin.min(d);
            }
        }
        Ok(margin)
    }
}

/// Largest admissible radius at `x0` and the chart frame; `None` frame means interior.
fn chart_geometry(domain: &GridDomain, x0: Point) -> Result<(f64, Option<([f64; 2], [f64; 2], bool)>)> {
    let dist = domain.boundary_distance(x0);
    if dist < -BOUNDARY_TOL {
        return Err(Error::Precondition(format!("chart centre {x0:?} lies outside the closed domain")));
    }
    match domain.kind() {
        DomainKind::Torus { .. } => Err(Error::InvalidParameter("charts need a domain with boundary".into())),
        DomainKind::Interval { a, b } => {
            if dist > BOUNDARY_TOL {
                Ok((dist, None))
            } else {
                let inward = if (x0[0] - a).abs() <= BOUNDARY_TOL { 1.0 } else { -1.0 };
                Ok((b - a, Some(([0.0, 0.0], [inward, 0.0], false))))
            }
        }
        DomainKind::Rectangle { a1, b1, a2, b2 } => {
            if dist > BOUNDARY_TOL {
                return Ok((dist, None));
            }
            let (w, h) = (b1 - a1, b2 - a2);
            let on = |v: f64, e: f64| (v - e).abs() <= BOUNDARY_TOL;
            let sx = if on(x0[0], a1) { Some(1.0) } else if on(x0[0], b1) { Some(-1.0) } else { None };
            let sy = if on(x0[1], a2) { Some(1.0) } else if on(x0[1], b2) { Some(-1.0) } else { None };
            let r2 = core::f64::consts::FRAC_1_SQRT_2;
            match (sx, sy) {
                (Some(sx), Some(sy)) => {
                    let normal = [sx * r2, sy * r2];
                    Ok((w.min(h), Some(([normal[1], -normal[0]], normal, true))))
                }
                (None, Some(sy)) => {
                    let r = (x0[0] - a1).min(b1 - x0[0]).min(h);
                    Ok((r, Some(([1.0, 0.0], [0.0, sy], false))))
                }
                (Some(sx), None) => {
                    let r = (x0[1] - a2).min(b2 - x0[1]).min(w);
                    Ok((r, Some(([0.0, 1.0], [sx, 0.0], false))))
                }
                (None, None) => unreachable!("boundary point off every edge"),
            }
        }
    }
}

/// Chart without the sampled containment check.
pub(crate) fn chart_unchecked(domain: &GridDomain, x0: Point, radius: Option<f64>) -> Result<BoundaryChart> {
    let (r_max, frame) = chart_geometry(domain, x0)?;
    let r = radius.unwrap_or(r_max);
    if !(r > 0.0 && r <= r_max * (1.0 + 1e-12)) {
        return Err(Error::InvalidParameter(format!(
            "chart radius {r} at {x0:?} must lie in (0, {r_max}]"
        )));
    }
    let kind = match frame {
        None => ChartKind::Interior { radius: r },
        Some((tangent, normal, corner)) => {
            ChartKind::Boundary { r, delta: DELTA_FRACTION * r, tangent, normal, corner }
        }
    };
    Ok(BoundaryChart { center: x0, dimension: domain.dimension(), kind })
}

fn seed_for(x0: Point) -> u64 {
    x0[0].to_bits().rotate_left(17) ^ x0[1].to_bits() ^ 0x5eed_c4a7
}

/// Builds the chart at `x0` (largest admissible radius when `radius` is
/// `None`) and checks containment on [`CHART_SAMPLES`] points for every index
/// in [`DEFAULT_CHART_INDICES`].
pub fn build_boundary_chart(domain: &GridDomain, x0: Point, radius: Option<f64>) -> Result<BoundaryChart> {
    let chart = chart_unchecked(domain, x0, radius)?;
    chart.verify_containment(domain, &DEFAULT_CHART_INDICES, CHART_SAMPLES, seed_for(x0))?;
    Ok(chart)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn interior_chart_on_interval() {
        let d = GridDomain::unit_interval(11).unwrap();
        let c = build_boundary_chart(&d, [0.5, 0.0], Some(0.25)).unwrap();
        assert!((c.map(2, [0.25, 0.0])[0] - 0.375).abs() < 1e-15);
        assert!((c.map(2, [0.75, 0.0])[0] - 0.625).abs() < 1e-15);
        assert!(!c.is_boundary());
    }

    #[test]
    fn endpoint_chart_on_interval() {
        let d = GridDomain::unit_interval(11).unwrap();
        let r = 0.5;
        let c = build_boundary_chart(&d, [0.0, 0.0], Some(r)).unwrap();
        for x in [0.0, 0.1, 0.3] {
            assert!((c.map(2, [x, 0.0])[0] - (x / 2.0 + r / 8.0)).abs() < 1e-15);
        }
        let right = build_boundary_chart(&d, [1.0, 0.0], Some(r)).unwrap();
        assert!((right.map(2, [1.0, 0.0])[0] - (1.0 - r / 8.0)).abs() < 1e-15);
    }

    #[test]
    fn edge_chart_on_square() {
        let d = GridDomain::unit_square(5).unwrap();
        let c = build_boundary_chart(&d, [0.5, 0.0], None).unwrap();
        let ChartKind::Boundary { r, .. } = c.kind() else { panic!() };
        assert_eq!(c.anchor(), [0.5, r / 4.0]);
        let y = c.map(4, [0.52, 0.0]);
        assert!((y[0] - 0.52).abs() < 1e-15 && y[1] > 0.0);
    }

    #[test]
    fn corner_chart_on_square() {
        let d = GridDomain::unit_square(5).unwrap();
        for x0 in [[0.0, 0.0], [1.0, 0.0], [0.0, 1.0], [1.0, 1.0]] {
            let c = build_boundary_chart(&d, x0, Some(0.5)).unwrap();
            let y = c.map(2, x0);
            assert!(d.boundary_distance(y) > 0.0);
        }
    }

    #[test]
    fn affine_form_matches_map() {
        let d = GridDomain::unit_square(5).unwrap();
        let c = chart_unchecked(&d, [1.0, 0.0], Some(0.4)).unwrap();
        let x = [0.9, 0.05];
        for n in [2, 5, 100] {
            let b = c.linear_part(n);
            let t = c.translation(n);
            let direct = c.map(n, x);
            let affine = [b[0][0] * x[0] + b[0][1] * x[1] + t[0], b[1][0] * x[0] + b[1][1] * x[1] + t[1]];
            assert!((direct[0] - affine[0]).abs() < 1e-14 && (direct[1] - affine[1]).abs() < 1e-14);
            let back = c.inverse(n, direct);
            assert!((back[0] - x[0]).abs() < 1e-14 && (back[1] - x[1]).abs() < 1e-14);
        }
        // B_n -> I and b_n -> 0.
        let b = c.linear_part(1_000_000);
        assert!((b[0][0] - 1.0).abs() < 1e-5 && b[0][1].abs() < 1e-5 && c.translation(1_000_000)[0].abs() < 1e-5);
    }

    #[test]
    fn invalid_requests() {
        let d = GridDomain::unit_interval(11).unwrap();
        assert!(build_boundary_chart(&d, [0.5, 0.0], Some(0.6)).is_err());
        assert!(build_boundary_chart(&d, [1.5, 0.0], None).is_err());
        let t = GridDomain::unit_torus(11).unwrap();
        assert!(build_boundary_chart(&t, [0.5, 0.0], None).is_err());
    }

    #[test]
    fn bump_is_supported_in_neighbourhood() {
        let d = GridDomain::unit_square(5).unwrap();
        let c = chart_unchecked(&d, [0.0, 0.3], None).unwrap();
        let bx = c.support_box();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..2000 {
            let x = [rng.gen_range(-0.5..1.5), rng.gen_range(-0.5..1.5)];
            if c.bump(x) > 0.0 {
                assert!(c.in_closed_neighbourhood(x, 0.0));
                assert!(x[0] >= bx[0][0] && x[0] <= bx[1][0] && x[1] >= bx[0][1] && x[1] <= bx[1][1]);
            }
        }
    }
}
