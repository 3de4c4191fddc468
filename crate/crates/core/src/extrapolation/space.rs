//! Extrapolation norms `||x||_{-1} = ||(lambda - A)^{-1} x||` and the
//! supremum construction with `R_n = n (n - A)^{-1}`.

use alloc::boxed::Box;
use alloc::format;
use alloc::vec::Vec;

#[allow(unused_imports)] // f64 methods resolve to std when it is linked
use num_traits::Float;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::generator::{multiplication_generator, resolvent, GeneratorMatrix, POSITIVITY_TOL};
use super::semigroup::semigroup;
use crate::error::{check_dim, Error, Result};
use crate::linalg::{negative_part, Identity, LinearOperator, Matrix, ScaledInverse};
use crate::ordered_space::{NormSpec, OrderedSpace, OrderedSpaceSpec};
use crate::span_lattice::{constructive_sup, ApproximationScheme, OperatorFactory, SupConstruction};

/// Largest index tried by the resolvent scheme.
pub const RESOLVENT_MAX_INDEX: usize = 1 << 52;

#[derive(Debug, Clone)]
pub struct ExtrapolationSpace {
    base: OrderedSpace,
    generator: GeneratorMatrix,
    lambda: f64,
    resolvent: Matrix,
}

impl ExtrapolationSpace {
    /// `lambda` defaults to `lambda0 + 1`.
    pub fn new(base: OrderedSpaceSpec, generator: GeneratorMatrix, lambda: Option<f64>) -> Result<Self> {
        let base = base.build()?;
        base.require_standard("an extrapolation space")?;
        check_dim(base.dim(), generator.dim())?;
        let lambda = lambda.unwrap_or(generator.lambda0() + 1.0);
        let resolvent = resolvent(&generator, lambda)?;
        Ok(ExtrapolationSpace { base, generator, lambda, resolvent })
    }

    pub fn base(&self) -> &OrderedSpace {
        &self.base
    }

    pub fn generator(&self) -> &GeneratorMatrix {
        &self.generator
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn resolvent(&self) -> &Matrix {
        &self.resolvent
    }

    pub fn dim(&self) -> usize {
        self.base.dim()
    }

    /// The same space with another `lambda`.
    pub fn with_lambda(&self, lambda: f64) -> Result<Self> {
        let resolvent = resolvent(&self.generator, lambda)?;
        Ok(ExtrapolationSpace { resolvent, lambda, ..self.clone() })
    }

    /// Norm of a functional under the dual of the base norm (weighted
    /// `l^p` bases only).
    fn base_dual_norm(&self, f: &[f64]) -> Result<f64> {
        let NormSpec::Lp { p, weights } = self.base.spec().norm.clone() else {
            return Err(Error::Precondition("dual norm needs a weighted l^p base".into()));
        };
        // Dual of (sum w |x|^p)^{1/p} is (sum w^{-q/p} |f|^q)^{1/q}.
        if p == 1.0 {
            return Ok(f.iter().zip(&weights).map(|(v, w)| v.abs() / w).fold(0.0, f64::max));
        }
        let q = p / (p - 1.0);
        let s: f64 = f.iter().zip(&weights).map(|(v, w)| w.powf(-q / p) * v.abs().powf(q)).sum();
        Ok(s.powf(1.0 / q))
    }
}

pub fn extrapolation_norm(space: &ExtrapolationSpace, x: &[f64]) -> Result<f64> {
    check_dim(space.dim(), x.len())?;
    space.base.norm(&space.resolvent.mul_vec(x))
}

/// Two-sided bounds on the `||.||_{-1}` distance from `x` to the positive cone.
///
/// The upper bound uses the feasible point `x+`. The lower bound uses the
/// positive functionals `e_i`: for `y >= 0`, `e_i (y - x) >= x_i^-`, so the
/// distance is at least `x_i^- / ||e_i||_*` with `||e_i||_*` the dual norm of
/// `e_i` for `||.||_{-1}`, which is the base dual norm of row `i` of
/// `lambda - A`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConeDistance {
    pub lower: f64,
    pub upper: f64,
}

pub fn cone_distance(space: &ExtrapolationSpace, x: &[f64]) -> Result<ConeDistance> {
    check_dim(space.dim(), x.len())?;
    let neg = negative_part(x);
    let upper = space.base.norm(&space.resolvent.mul_vec(&neg))?;
    let shifted = space.generator.matrix().shifted_negation(space.lambda);
    let mut lower = 0.0f64;
    for (i, v) in neg.iter().enumerate() {
        if *v > 0.0 {
            lower = lower.max(v / space.base_dual_norm(shifted.row(i))?);
        }
    }
    Ok(ConeDistance { lower, upper })
}

/// Membership in the closure of the positive cone under `||.||_{-1}`; in
/// finite dimensions this closure is the positive cone itself.
pub fn extrapolation_cone_contains(space: &ExtrapolationSpace, x: &[f64]) -> Result<bool> {
    let d = cone_distance(space, x)?;
    Ok(d.upper == 0.0 && d.lower == 0.0)
}

#[derive(Debug, Clone, PartialEq)]
pub struct LambdaEquivalence {
    pub lambda: f64,
    pub other: f64,
    pub min_ratio: f64,
    pub max_ratio: f64,
    /// `rho` with all ratios in `[1/rho, rho]`.
    pub bound: f64,
    pub pass: bool,
}

/// Ratio `||x||_{-1,lambda} / ||x||_{-1,other}` over samples, against the
/// bound from `R_a = (I + (b - a) R_a) R_b`.
pub fn lambda_equivalence(space: &ExtrapolationSpace, other: f64, samples: &[Vec<f64>]) -> Result<LambdaEquivalence> {
    let b = space.with_lambda(other)?;
    let NormSpec::Lp { p, weights } = space.base.spec().norm.clone() else {
        return Err(Error::Precondition("the equivalence bound needs a weighted l^p base".into()));
    };
    let n = space.dim();
    let id = Matrix::identity(n);
    let forward = id.add(&space.resolvent.scaled(other - space.lambda));
    let backward = id.add(&b.resolvent.scaled(space.lambda - other));
    // Operator norm on weighted l^p via Riesz-Thorin on W^{1/p} B W^{-1/p}.
    let op_bound = |m: &Matrix| {
        let c = Matrix::from_fn(n, n, |i, j| m[(i, j)] * (weights[i] / weights[j]).powf(1.0 / p));
        c.norm_one().max(c.norm_inf())
    };
    let bound = op_bound(&forward).max(op_bound(&backward));
    let mut min_ratio = f64::INFINITY;
    let mut max_ratio = 0.0f64;
    for x in samples {
        let den = extrapolation_norm(&b, x)?;
        if den == 0.0 {
            continue;
        }
        let r = extrapolation_norm(space, x)? / den;
        min_ratio = min_ratio.min(r);
        max_ratio = max_ratio.max(r);
    }
    let slack = 1.0 + 1e-12;
    let pass = max_ratio <= bound * slack && min_ratio * bound * slack >= 1.0;
    Ok(LambdaEquivalence { lambda: space.lambda, other, min_ratio, max_ratio, bound, pass })
}

/// Scheme with `J = id` and `R_n = n (n - A)^{-1}` from the first power of
/// two above `lambda0`.
pub fn resolvent_scheme(gen: &GeneratorMatrix) -> Result<ApproximationScheme> {
    let a = gen.matrix().clone();
    let mut n_min = 1usize;
    while (n_min as f64) <= gen.lambda0() {
        n_min *= 2;
    }
    let d = a.rows();
    let factory: OperatorFactory = Box::new(move |n| {
        let nf = n as f64;
        Ok(Box::new(ScaledInverse::new(&a, nf, nf)?) as Box<dyn LinearOperator>)
    });
    ApproximationScheme::new(Box::new(Identity(d)), n_min, RESOLVENT_MAX_INDEX, factory)
}

/// The supremum of `{z, -z}` in `span(X_{-1,+})` through `J |R_n z|`.
pub fn theorem41_sup(space: &ExtrapolationSpace, z: &[f64], tol: f64) -> Result<SupConstruction> {
    let scheme = resolvent_scheme(&space.generator)?;
    constructive_sup(&scheme, &space.base, z, tol)
}

#[derive(Debug, Clone, PartialEq)]
pub struct MultiplicationReport {
    /// Largest `| ||x||_{-1} - (sum mu |x|^p / (1+m)^p)^{1/p} |`.
    pub max_identity_error: f64,
    pub worst_sample: Vec<f64>,
    /// Samples where cone membership disagreed with `x >= 0`.
    pub cone_mismatches: usize,
    /// Smallest entry of `e^{-tm}` over `t` in `{0.1, 1, 10}`.
    pub semigroup_min_entry: f64,
    pub pass: bool,
}

pub const MULTIPLICATION_TOL: f64 = 1e-12;

/// Checks the closed form of the extrapolation norm of `diag(-m)` at
/// `lambda = 1`, the cone identification and positivity of the semigroup.
pub fn multiplication_example_check(
    m: &[f64],
    p: f64,
    mu_weights: &[f64],
    samples: usize,
    seed: u64,
) -> Result<MultiplicationReport> {
    check_dim(m.len(), mu_weights.len())?;
    if samples == 0 {
        return Err(Error::InvalidParameter(format!("need at least one sample, got {samples}")));
    }
    let gen = multiplication_generator(m)?;
    let base = OrderedSpaceSpec::standard(NormSpec::Lp { p, weights: mu_weights.to_vec() });
    let space = ExtrapolationSpace::new(base, gen.clone(), Some(1.0))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut report = MultiplicationReport {
        max_identity_error: 0.0,
        worst_sample: Vec::new(),
        cone_mismatches: 0,
        semigroup_min_entry: f64::INFINITY,
        pass: false,
    };
    for _ in 0..samples {
        let x: Vec<f64> = (0..m.len()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let closed: f64 = x
            .iter()
            .zip(m.iter().zip(mu_weights))
            .map(|(x, (m, w))| w * x.abs().powf(p) / (1.0 + m).powf(p))
            .sum::<f64>()
            .powf(1.0 / p);
        let err = (extrapolation_norm(&space, &x)? - closed).abs();
        if err > report.max_identity_error || report.worst_sample.is_empty() {
            report.max_identity_error = report.max_identity_error.max(err);
            report.worst_sample = x.clone();
        }
        // Also probe the positive part, which must lie in the cone.
        for probe in [x.clone(), x.iter().map(|v| v.max(0.0)).collect()] {
            let member = extrapolation_cone_contains(&space, &probe)?;
            if member != probe.iter().all(|v| *v >= 0.0) {
                report.cone_mismatches += 1;
            }
        }
    }
    for t in [0.1, 1.0, 10.0] {
        report.semigroup_min_entry = report.semigroup_min_entry.min(semigroup(gen.matrix(), t)?.min_entry());
    }
    report.pass = report.max_identity_error <= MULTIPLICATION_TOL
        && report.cone_mismatches == 0
        && report.semigroup_min_entry >= -POSITIVITY_TOL;
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::extrapolation::generator::neumann_laplacian_1d;
    use crate::linalg::{abs, dist_inf};
    use alloc::vec;

    fn multiplication_space() -> ExtrapolationSpace {
        let gen = multiplication_generator(&[0.0, 1.0, 3.0]).unwrap();
        ExtrapolationSpace::new(OrderedSpaceSpec::standard_lp(3, 2.0), gen, Some(1.0)).unwrap()
    }

    #[test]
    fn closed_form_value() {
        let s = multiplication_space();
        let v = extrapolation_norm(&s, &[1.0, 1.0, 1.0]).unwrap();
        assert!((v - 21f64.sqrt() / 4.0).abs() < 1e-12);
        assert_eq!(extrapolation_norm(&s, &[0.0; 3]).unwrap(), 0.0);
    }

    #[test]
    fn multiplication_report_passes() {
        let r = multiplication_example_check(&[0.0, 1.0, 3.0], 2.0, &[1.0, 1.0, 1.0], 100, 5).unwrap();
        assert!(r.pass, "{r:?}");
        let r = multiplication_example_check(&[0.0; 4], 3.0, &[1.0, 2.0, 0.5, 1.0], 20, 5).unwrap();
        assert!(r.pass, "{r:?}");
    }

    #[test]
    fn cone_distance_bounds() {
        let s = multiplication_space();
        let d = cone_distance(&s, &[1.0, -0.5, 0.0]).unwrap();
        assert!(d.lower > 0.0 && d.lower <= d.upper);
        assert_eq!(cone_distance(&s, &[1.0, 0.5, 0.0]).unwrap(), ConeDistance { lower: 0.0, upper: 0.0 });
    }

    #[test]
    fn lambda_ratio_within_bound() {
        let gen = neumann_laplacian_1d(8, 0.5).unwrap();
        let s = ExtrapolationSpace::new(OrderedSpaceSpec::standard_lp(8, 2.0), gen, Some(1.0)).unwrap();
        let samples: Vec<Vec<f64>> = (0..10).map(|k| (0..8).map(|i| ((k * 8 + i) as f64 * 0.37).sin()).collect()).collect();
        let r = lambda_equivalence(&s, 2.0, &samples).unwrap();
        assert!(r.pass, "{r:?}");
        assert!(r.min_ratio > 1.0);
    }

    #[test]
    fn resolvent_sup_of_mixed_vector() {
        let gen = multiplication_generator(&[0.0, 1.0, 3.0, 0.5]).unwrap();
        let s = ExtrapolationSpace::new(OrderedSpaceSpec::standard_lp(4, 2.0), gen, None).unwrap();
        let z = vec![1.0, -2.0, 0.3, -0.1];
        let out = theorem41_sup(&s, &z, 1e-9).unwrap();
        assert!(dist_inf(&out.s, &abs(&z)) <= 1e-8);
    }
}
