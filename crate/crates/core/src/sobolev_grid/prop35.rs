//! Positive dominants in discrete `W_0^{k,p}` of an interval.
//!
//! With `S g_i = h sum_{j<i} g_j`, a grid function whose first `k - 1`
//! forward differences vanish at the left node satisfies `f = S^k D^k f`, so
//! `f_0 = S^k |D^k f|` is positive and dominates `f`. Mirroring gives `f_1`
//! from the right end; the two are glued with cutoffs `u_0`, `u_1`.

use alloc::format;
use alloc::vec::Vec;

#[allow(unused_imports)] // f64 methods resolve to std when it is linked
use num_traits::Float;

use super::difference::check_exponent;
use super::domain::{DomainKind, GridFunction};
use crate::error::{Error, Result};

/// Relative tolerance of the endpoint-vanishing precondition.
pub const VANISHING_TOL: f64 = 1e-8;

/// `C^inf` transition: `0` for `s <= 0`, `1` for `s >= 1`.
pub fn smooth_transition(s: f64) -> f64 {
    let e = |t: f64| if t > 0.0 { (-1.0 / t).exp() } else { 0.0 };
    let (a, b) = (e(s), e(1.0 - s));
    if a + b == 0.0 {
        0.0
    } else {
        a / (a + b)
    }
}

/// Cutoff equal to one on `[0, 1/2]` and zero on `[3/4, 1]`.
pub fn cutoff_left(t: f64) -> f64 {
    1.0 - smooth_transition((t - 0.5) * 4.0)
}

/// Cutoff equal to one on `[1/2, 1]` and zero on `[0, 1/4]`.
pub fn cutoff_right(t: f64) -> f64 {
    smooth_transition((t - 0.25) * 4.0)
}

/// Raw forward differences `(D^j f)_i` for `i < len - j` (no boundary closure).
fn forward_differences(f: &[f64], j: usize, h: f64) -> Vec<f64> {
    let mut d = f.to_vec();
    for _ in 0..j {
        d = d.windows(2).map(|w| (w[1] - w[0]) / h).collect();
    }
    d
}

/// `S^k g` on `len` nodes.
fn integrate(g: &[f64], k: usize, h: f64, len: usize) -> Vec<f64> {
    let mut cur: Vec<f64> = g.to_vec();
    for step in 0..k {
        let out_len = len - (k - 1 - step);
        let mut out = Vec::with_capacity(out_len);
        let mut acc = 0.0;
        out.push(0.0);
        for v in cur.iter().take(out_len - 1) {
            acc += h * v;
            out.push(acc);
        }
        cur = out;
    }
    cur
}

/// `S^k |D^k f|` anchored at the first node.
fn left_dominant(f: &[f64], k: usize, h: f64) -> Vec<f64> {
    let dk: Vec<f64> = forward_differences(f, k, h).iter().map(|v| v.abs()).collect();
    integrate(&dk, k, h, f.len())
}

fn check_vanishing(f: &[f64], k: usize, h: f64, side: &str) -> Result<()> {
    let scale = f.iter().fold(1.0f64, |m, v| m.max(v.abs()));
    for j in 0..k {
        let dj = forward_differences(f, j, h)[0];
        // Differences of order j carry a factor h^-j; compare in function units.
        if (dj * h.powi(j as i32)).abs() > VANISHING_TOL * scale {
            return Err(Error::Precondition(format!(
                "difference of order {j} does not vanish at the {side} endpoint ({dj:e})"
            )));
        }
    }
    Ok(())
}

/// Returns `g = u_0 f_0 + u_1 f_1` with `g >= 0`, `g >= f`, vanishing to
/// order `k - 1` at both ends.
pub fn positive_dominant_w0(f: &GridFunction, k: usize, p: f64) -> Result<GridFunction> {
    check_exponent(p)?;
    let DomainKind::Interval { a, b } = f.domain().kind() else {
        return Err(Error::InvalidParameter(format!("expected an interval grid, got {}", f.domain().kind_name())));
    };
    let v = f.values();
    let n = v.len();
    if k == 0 || 2 * k > n {
        return Err(Error::InvalidParameter(format!("order k = {k} unsuitable for {n} nodes")));
    }
    let h = f.domain().h();
    let rev: Vec<f64> = v.iter().rev().copied().collect();
    check_vanishing(v, k, h, "left")?;
    check_vanishing(&rev, k, h, "right")?;

    let f0 = left_dominant(v, k, h);
    let mut f1 = left_dominant(&rev, k, h);
    f1.reverse();
    let g = (0..n)
        .map(|i| {
            let t = (f.domain().node(i)[0] - a) / (b - a);
            cutoff_left(t) * f0[i] + cutoff_right(t) * f1[i]
        })
        .collect();
    GridFunction::new(*f.domain(), g)
}
