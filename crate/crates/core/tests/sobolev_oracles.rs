use latlab_core::linalg::LinearOperator;
use latlab_core::sobolev_grid::*;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const PI: f64 = std::f64::consts::PI;

/// Gradient of `w12(f)^2 / 2` for the discrete W^{1,2} norm on a uniform
/// interval grid (forward differences, backward at the last node, weight h).
fn w12_form(f: &[f64], h: f64) -> Vec<f64> {
    let n = f.len();
    let mut g: Vec<f64> = f.iter().map(|v| h * v).collect();
    for i in 0..n {
        let (a, b) = if i + 1 < n { (i, i + 1) } else { (i - 1, i) };
        let d = (f[b] - f[a]) / h;
        g[b] += d;
        g[a] -= d;
    }
    g
}

fn w12(f: &[f64], h: f64) -> f64 {
    f.iter().zip(w12_form(f, h)).map(|(a, b)| a * b).sum::<f64>().sqrt()
}

/// Maximizes `<f, g>_h / w12(f)` by conjugate gradients on the concave
/// quadratic `<f, g>_h - w12(f)^2 / 2`.
fn dual_w12_by_ascent(g: &[f64], h: f64) -> f64 {
    let b: Vec<f64> = g.iter().map(|v| h * v).collect();
    let mut f = vec![0.0; g.len()];
    let mut r = b.clone();
    let mut p = r.clone();
    let mut rr: f64 = r.iter().map(|v| v * v).sum();
    for _ in 0..10 * g.len() {
        if rr.sqrt() < 1e-15 {
            break;
        }
        let ap = w12_form(&p, h);
        let alpha = rr / p.iter().zip(&ap).map(|(a, b)| a * b).sum::<f64>();
        for i in 0..f.len() {
            f[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        let rr_new: f64 = r.iter().map(|v| v * v).sum();
        for i in 0..p.len() {
            p[i] = r[i] + rr_new / rr * p[i];
        }
        rr = rr_new;
    }
    b.iter().zip(&f).map(|(a, b)| a * b).sum::<f64>() / w12(&f, h)
}

#[test]
fn sobolev_norm_of_identity_function() {
    let d = GridDomain::unit_interval(101).unwrap();
    let f = GridFunction::from_fn(d, |x| x[0]);
    let v = sobolev_norm(&f, 1, 2.0).unwrap();
    // Frozen from the closed-form Riemann sums: h sum t_i^2 + 1.
    assert!((v - 1.1611847398239439).abs() < 1e-12, "{v}");
    assert!((v - (4.0f64 / 3.0).sqrt()).abs() <= 2.0 * d.h());
    assert_eq!(sobolev_norm(&GridFunction::zeros(d), 1, 2.0).unwrap(), 0.0);
    assert!(sobolev_norm(&f, 100, 2.0).is_err());
}

#[test]
fn constants_on_the_torus() {
    let d = GridDomain::unit_torus(40).unwrap();
    let g = GridFunction::from_fn(d, |_| 1.0);
    assert!((negative_sobolev_norm(&g, 1, 2.0).unwrap() - 1.0).abs() < 1e-12);
    let c = GridFunction::from_fn(d, |_| -2.5);
    assert!((sobolev_norm(&c, 1, 3.0).unwrap() - 2.5).abs() < 1e-12);
}

#[test]
fn spike_dual_norm_matches_ascent_and_sampling() {
    let d = GridDomain::unit_interval(33).unwrap();
    let h = d.h();
    let mut g = vec![0.0; 33];
    g[16] = 1.0;
    let v = negative_sobolev_norm(&GridFunction::new(d, g.clone()).unwrap(), 1, 2.0).unwrap();
    assert!((v - 0.03208331375352292).abs() < 1e-12, "{v}");
    let ascent = dual_w12_by_ascent(&g, h);
    assert!((v - ascent).abs() <= 1e-6 * v, "{v} vs {ascent}");
    // Random directions only ever give lower bounds.
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut best = 0.0f64;
    for _ in 0..2000 {
        let f: Vec<f64> = (0..33).map(|_| rng.gen_range(-1.0..1.0)).collect();
        best = best.max(h * f[16] / w12(&f, h));
    }
    assert!(best <= v * (1.0 + 1e-12) && best > 0.0);
}

#[test]
fn dual_norm_of_smooth_data_against_ascent() {
    for n in [16, 64] {
        let d = GridDomain::unit_interval(n).unwrap();
        let g: Vec<f64> = (0..n).map(|i| (7.0 * i as f64 / n as f64).sin() + 0.3).collect();
        let v = negative_sobolev_norm(&GridFunction::new(d, g.clone()).unwrap(), 1, 2.0).unwrap();
        let oracle = dual_w12_by_ascent(&g, d.h());
        assert!((v - oracle).abs() <= 1e-6 * oracle, "n = {n}: {v} vs {oracle}");
    }
}

#[test]
fn mollifier_error_is_below_lipschitz_bound() {
    let d = GridDomain::unit_torus(400).unwrap();
    // Triangle wave, Lipschitz constant 1.
    let f = GridFunction::from_fn(d, |x| (x[0] - 0.5).abs());
    for delta in [0.1, 0.05, 0.025] {
        let g = mollify(&f, delta).unwrap();
        let err = g.values().iter().zip(f.values()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        assert!(err <= delta, "delta = {delta}: {err}");
    }
}

#[test]
fn mollifier_converges_quadratically() {
    let d = GridDomain::unit_torus(2048).unwrap();
    let f = GridFunction::from_fn(d, |x| (2.0 * PI * x[0]).sin() + 0.3 * (6.0 * PI * x[0]).cos());
    let err = |delta: f64| {
        let g = mollify(&f, delta).unwrap();
        g.values().iter().zip(f.values()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
    };
    let e: Vec<f64> = [0.1, 0.05, 0.025].iter().map(|&t| err(t)).collect();
    for w in e.windows(2) {
        let order = (w[0] / w[1]).log2();
        assert!(order >= 1.8, "{e:?}");
    }
}

fn random_nonnegative(d: GridDomain, rng: &mut ChaCha8Rng) -> GridFunction {
    let v = (0..d.node_count()).map(|_| if rng.gen_bool(0.3) { 0.0 } else { rng.gen_range(0.0..2.0) }).collect();
    GridFunction::new(d, v).unwrap()
}

#[test]
fn operators_preserve_positivity() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for d in [GridDomain::unit_interval(129).unwrap(), GridDomain::unit_square(33).unwrap()] {
        for n in [2, 4] {
            let s = pushin_operator(&d, n).unwrap();
            assert!(s.matrix.min_entry() >= 0.0);
            // On the square the small edge charts next to the corners bring K_n
            // within r / 8n of the boundary, far below what this grid resolves.
            let r = approx_identity_with_boundary(&d, n).ok();
            assert_eq!(r.is_some(), d.dimension() == 1);
            for _ in 0..5 {
                let f = random_nonnegative(d, &mut rng);
                assert!(s.matrix.apply(f.values()).iter().all(|v| *v >= 0.0));
                assert!(mollify(&f, 0.1).unwrap().values().iter().all(|v| *v >= 0.0));
                if let Some(r) = &r {
                    assert!(r.matrix.min_entry() >= 0.0);
                    assert!(r.matrix.apply(f.values()).iter().all(|v| *v >= 0.0));
                }
            }
        }
    }
}

#[test]
fn pushin_vanishes_outside_k() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for d in [GridDomain::unit_interval(101).unwrap(), GridDomain::unit_square(25).unwrap()] {
        for n in [2, 4, 8] {
            let s = pushin_operator(&d, n).unwrap();
            assert!(s.k_distance > 0.0);
            for _ in 0..20 {
                let f: Vec<f64> = (0..d.node_count()).map(|_| rng.gen_range(-1.0..1.0)).collect();
                let out = s.matrix.apply(&f);
                for (i, v) in out.iter().enumerate() {
                    if !s.k_mask[i] {
                        assert_eq!(*v, 0.0);
                    }
                }
            }
            // f = 1: support strictly away from the boundary.
            let one = s.matrix.apply(&vec![1.0; d.node_count()]);
            for (i, v) in one.iter().enumerate() {
                if *v != 0.0 {
                    assert!(d.boundary_distance(d.node(i)) >= s.k_distance);
                }
                if d.is_boundary_node(i) {
                    assert_eq!(*v, 0.0);
                }
            }
        }
    }
}

#[test]
fn pushin_approaches_identity() {
    let d = GridDomain::unit_interval(513).unwrap();
    let f = GridFunction::from_fn(d, |x| (3.0 * x[0]).cos() + x[0]);
    let errs: Vec<f64> = [2, 4, 8, 16]
        .iter()
        .map(|&n| {
            let s = pushin_operator(&d, n).unwrap();
            let g = s.matrix.apply(f.values());
            GridFunction::new(d, g.iter().zip(f.values()).map(|(a, b)| a - b).collect()).unwrap().lp_norm(2.0)
        })
        .collect();
    assert!(errs.windows(2).all(|w| w[1] < w[0]), "{errs:?}");
}

#[test]
fn charts_satisfy_containment() {
    let interval = GridDomain::unit_interval(65).unwrap();
    for x0 in [0.0, 0.3, 1.0] {
        let c = build_boundary_chart(&interval, [x0, 0.0], None).unwrap();
        let margin = c.verify_containment(&interval, &[2, 3, 4, 8, 16, 32, 64], 10_000, 17).unwrap();
        assert!(margin > 0.0);
    }
    let square = GridDomain::unit_square(17).unwrap();
    for x0 in [[0.5, 0.0], [0.0, 0.0], [1.0, 0.4], [0.5, 0.5], [1.0, 1.0]] {
        let c = build_boundary_chart(&square, x0, None).unwrap();
        assert!(c.verify_containment(&square, &[2, 4, 8, 16, 32], 10_000, 29).unwrap() > 0.0);
    }
    // The boundary chart at the midpoint of the bottom edge compresses
    // vertically towards c = (0.5, r/4).
    let c = build_boundary_chart(&square, [0.5, 0.0], Some(0.4)).unwrap();
    let y = c.map(2, [0.5, 0.0]);
    assert!((y[0] - 0.5).abs() < 1e-15 && (y[1] - 0.05).abs() < 1e-15, "{y:?}");
}

#[test]
fn boundary_approximation_support() {
    let d = GridDomain::unit_interval(401).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for n in [2, 4, 8] {
        let r = approx_identity_with_boundary(&d, n).unwrap();
        for _ in 0..20 {
            let f: Vec<f64> = (0..401).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let g = r.matrix.apply(&f);
            for (i, v) in g.iter().enumerate() {
                if *v != 0.0 {
                    assert!(d.boundary_distance(d.node(i)) >= r.delta - d.h(), "n = {n}, node {i}");
                }
            }
        }
    }
    let coarse = GridDomain::unit_interval(9).unwrap();
    assert!(matches!(approx_identity_with_boundary(&coarse, 64), Err(latlab_core::Error::GridTooCoarse { .. })));
}

#[test]
fn boundary_approximation_of_one_converges_inside() {
    let d = GridDomain::unit_interval(2049).unwrap();
    let interior: Vec<usize> = (0..2049).filter(|&i| d.boundary_distance(d.node(i)) >= 0.1).collect();
    let errs: Vec<f64> = [2, 4, 8, 16, 32]
        .iter()
        .map(|&n| {
            let r = approx_identity_with_boundary(&d, n).unwrap();
            let g = r.matrix.apply(&vec![1.0; 2049]);
            (d.h() * interior.iter().map(|&i| (g[i] - 1.0).powi(2)).sum::<f64>()).sqrt()
        })
        .collect();
    // The pulled-back partition of unity sums to 1 + O(1/n).
    assert!(errs.windows(2).all(|w| w[0] / w[1] >= 1.8), "{errs:?}");
    assert!(errs[4] < 0.03, "{errs:?}");
}

/// Random smooth function whose first and last `k` nodes are zero.
fn random_w0(d: GridDomain, k: usize, rng: &mut ChaCha8Rng) -> GridFunction {
    let c: Vec<f64> = (0..4).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let n = d.node_count();
    let v = (0..n)
        .map(|i| {
            if i < k || i + k >= n {
                return 0.0;
            }
            let t = d.node(i)[0];
            let s: f64 = c.iter().enumerate().map(|(j, a)| a * ((j + 1) as f64 * PI * t).sin()).sum();
            s * (t * (1.0 - t)).powi(k as i32 - 1)
        })
        .collect();
    GridFunction::new(d, v).unwrap()
}

#[test]
fn positive_dominant_on_random_w0() {
    let d = GridDomain::unit_interval(201).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(35);
    for k in [1, 2] {
        for _ in 0..20 {
            let f = random_w0(d, k, &mut rng);
            let g = positive_dominant_w0(&f, k, 2.0).unwrap();
            let (fv, gv) = (f.values(), g.values());
            for i in 0..201 {
                assert!(gv[i] >= -1e-10 && gv[i] >= fv[i] - 1e-10, "k = {k}, node {i}");
            }
            for j in 0..k {
                assert!(gv[j].abs() <= 1e-10 && gv[200 - j].abs() <= 1e-10);
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn positive_functions_are_dominated(c in proptest::collection::vec(0.1f64..1.0, 3)) {
        let d = GridDomain::unit_interval(81).unwrap();
        let f = GridFunction::from_fn(d, |x| {
            let t = x[0];
            (PI * t).sin().powi(2) * (c[0] + c[1] * t + c[2] * t * t)
        });
        let g = positive_dominant_w0(&f, 1, 2.0).unwrap();
        for (gi, fi) in g.values().iter().zip(f.values()) {
            prop_assert!(*gi >= fi - 1e-12);
        }
    }

    #[test]
    fn mollify_is_positive_and_linear(
        a in proptest::collection::vec(0.0f64..1.0, 48),
        b in proptest::collection::vec(-1.0f64..1.0, 48),
        s in -2.0f64..2.0,
    ) {
        let d = GridDomain::unit_torus(48).unwrap();
        let fa = GridFunction::new(d, a.clone()).unwrap();
        prop_assert!(mollify(&fa, 0.1).unwrap().values().iter().all(|v| *v >= 0.0));
        let comb: Vec<f64> = a.iter().zip(&b).map(|(x, y)| x + s * y).collect();
        let lhs = mollify(&GridFunction::new(d, comb).unwrap(), 0.1).unwrap();
        let ma = mollify(&fa, 0.1).unwrap();
        let mb = mollify(&GridFunction::new(d, b).unwrap(), 0.1).unwrap();
        for i in 0..48 {
            prop_assert!((lhs.values()[i] - ma.values()[i] - s * mb.values()[i]).abs() < 1e-12);
        }
    }
}
