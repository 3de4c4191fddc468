//! Lattice oracles and witness-based estimates of the order constants.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)] // f64 methods resolve to std when it is linked
use num_traits::Float;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::cone::{PolyhedralCone, CONE_TOL};
use super::OrderedSpace;
use crate::error::{check_dim, Error, Result};
use crate::linalg::{abs, dist_inf, norm_inf, sub, LinearOperator, Matrix};
use crate::lp::{LinearProgram, LpOutcome, Relation, LP_TOL};

/// Number of LP objectives used by the supremum oracle.
pub const SUP_DIRECTIONS: usize = 64;
/// Agreement tolerance between the LP minimizers.
pub const SUP_AGREEMENT: f64 = 1e-8;
const SUP_SEED: u64 = 0x5eed_0001;
/// Default number of random objectives in the face test.
pub const FACE_SAMPLES: usize = 512;
/// Pass threshold of the lattice homomorphism check.
pub const LATTICE_HOM_TOL: f64 = 1e-10;

/// Supremum of `{x, y}`: componentwise max on the standard cone, otherwise
/// the common minimizer of `c . u` over upper bounds `u` for many directions
/// `c` in the interior of the dual cone, or `None` if they disagree.
pub fn supremum_oracle(space: &OrderedSpace, x: &[f64], y: &[f64]) -> Result<Option<Vec<f64>>> {
    check_dim(space.dim(), x.len())?;
    check_dim(space.dim(), y.len())?;
    if space.is_standard() {
        return Ok(Some(x.iter().zip(y).map(|(a, b)| a.max(*b)).collect()));
    }
    let a = space.cone().ineq();
    let (ax, ay) = (a.mul_vec(x), a.mul_vec(y));
    let mut rng = ChaCha8Rng::seed_from_u64(SUP_SEED);
    let mut first: Option<Vec<f64>> = None;
    for _ in 0..SUP_DIRECTIONS {
        let lambda: Vec<f64> = (0..a.rows()).map(|_| rng.gen_range(0.1..1.0)).collect();
        let c = a.mul_vec_transpose(&lambda);
        let mut lp = LinearProgram::new(space.dim()).all_free().minimize(&c);
        for i in 0..a.rows() {
            lp.constrain(a.row(i).to_vec(), Relation::Ge, ax[i].max(ay[i]));
        }
        let LpOutcome::Optimal { x: u, .. } = lp.solve()? else {
            return Ok(None);
        };
        match &first {
            None => first = Some(u),
            Some(f) => {
                if dist_inf(f, &u) > SUP_AGREEMENT * norm_inf(f).max(1.0) {
                    return Ok(None);
                }
            }
        }
    }
    Ok(first)
}

fn check_nonnegative(v: &[f64], name: &str) -> Result<()> {
    if v.iter().all(|e| *e >= -CONE_TOL) {
        Ok(())
    } else {
        Err(Error::Precondition(format!("{name} is not positive")))
    }
}

/// `w = w1 + w2` with `0 <= w1 <= x`, `0 <= w2 <= y`, given `0 <= w <= x + y`
/// in the standard order.
pub fn riesz_decompose(x: &[f64], y: &[f64], w: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
    check_dim(x.len(), y.len())?;
    check_dim(x.len(), w.len())?;
    check_nonnegative(x, "x")?;
    check_nonnegative(y, "y")?;
    check_nonnegative(w, "w")?;
    if w.iter().zip(x.iter().zip(y)).any(|(w, (x, y))| *w > x + y + CONE_TOL) {
        return Err(Error::Precondition("w is not below x + y".into()));
    }
    let w1: Vec<f64> = w.iter().zip(x).map(|(w, x)| w.min(*x)).collect();
    let w2 = sub(w, &w1);
    Ok((w1, w2))
}

/// `max ||x|| / ||y||` over witnesses `0 <= x <= y`; a lower bound for the
/// normality constant.
pub fn normality_constant_lower_bound(space: &OrderedSpace, witnesses: &[(Vec<f64>, Vec<f64>)]) -> Result<f64> {
    let mut best = 0.0f64;
    for (i, (x, y)) in witnesses.iter().enumerate() {
        check_dim(space.dim(), x.len())?;
        check_dim(space.dim(), y.len())?;
        if !space.cone().contains(x)? || !space.cone().le(x, y)? {
            return Err(Error::Precondition(format!("witness {i} does not satisfy 0 <= x <= y")));
        }
        let ny = space.norm(y)?;
        if ny == 0.0 {
            return Err(Error::Precondition(format!("witness {i} has y = 0")));
        }
        best = best.max(space.norm(x)? / ny);
    }
    Ok(best)
}

/// `max (||y|| + ||z||) / ||x||` over the samples, with `(y, z)` the optimal
/// decomposition; a lower bound for the decomposition constant.
pub fn decomposition_constant_estimate(space: &OrderedSpace, samples: &[Vec<f64>]) -> Result<f64> {
    let mut best = 0.0f64;
    for x in samples {
        let nx = space.norm(x)?;
        if nx == 0.0 {
            continue;
        }
        let span = crate::span_lattice::span_norm(space, x)?;
        best = best.max(span.value / nx);
    }
    Ok(best)
}

#[derive(Debug, Clone, PartialEq)]
pub struct FaceReport {
    pub is_face: bool,
    /// A pair `(z, g)` with `0 <= z <= g`, `g` generated, `z` not generated.
    pub witness: Option<(Vec<f64>, Vec<f64>)>,
    pub vertices_checked: usize,
}

/// Tests whether `cone(generators)` is a face of `ambient`.
///
/// With `g` the sum of the generators (a relative interior point) the cone is
/// a face iff the order interval `[0, g]` lies in it. Vertices of `[0, g]` are
/// found by LP along the coordinate directions and `samples` random
/// objectives, so a `true` answer is sound on the sampled vertices only.
pub fn is_face(generators: &[Vec<f64>], ambient: &PolyhedralCone, samples: usize, seed: u64) -> Result<FaceReport> {
    let d = ambient.dim();
    for (i, g) in generators.iter().enumerate() {
        check_dim(d, g.len())?;
        if !ambient.contains(g)? {
            return Err(Error::Precondition(format!("generator {i} lies outside the ambient cone")));
        }
    }
    if generators.is_empty() {
        return Ok(FaceReport { is_face: true, witness: None, vertices_checked: 0 });
    }
    let g: Vec<f64> = (0..d).map(|j| generators.iter().map(|v| v[j]).sum()).collect();
    let a = ambient.ineq();
    let ag = a.mul_vec(&g);
    let gens = Matrix::from_fn(d, generators.len(), |i, j| generators[j][i]);

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut objectives: Vec<Vec<f64>> = Vec::new();
    for j in 0..d {
        for s in [1.0, -1.0] {
            let mut c = vec![0.0; d];
            c[j] = s;
            objectives.push(c);
        }
    }
    objectives.extend((0..samples).map(|_| (0..d).map(|_| rng.gen_range(-1.0..1.0)).collect()));

    let mut vertices: Vec<Vec<f64>> = Vec::new();
    let scale = norm_inf(&g).max(1.0);
    for c in &objectives {
        let mut lp = LinearProgram::new(d).all_free().minimize(c);
        for i in 0..a.rows() {
            lp.constrain(a.row(i).to_vec(), Relation::Ge, 0.0);
            lp.constrain(a.row(i).to_vec(), Relation::Le, ag[i]);
        }
        let LpOutcome::Optimal { x: z, .. } = lp.solve()? else {
            return Err(Error::Precondition("order interval [0, g] is not bounded".into()));
        };
        if vertices.iter().any(|v| dist_inf(v, &z) <= 1e-9 * scale) {
            continue;
        }
        if !in_generated_cone(&gens, &z)? {
            return Ok(FaceReport {
                is_face: false,
                witness: Some((z, g)),
                vertices_checked: vertices.len() + 1,
            });
        }
        vertices.push(z);
    }
    Ok(FaceReport { is_face: true, witness: None, vertices_checked: vertices.len() })
}

/// Feasibility of `G lambda = z`, `lambda >= 0`, up to the LP tolerance.
fn in_generated_cone(gens: &Matrix, z: &[f64]) -> Result<bool> {
    let tol = LP_TOL * norm_inf(z).max(1.0);
    let mut lp = LinearProgram::new(gens.cols());
    for i in 0..gens.rows() {
        lp.constrain(gens.row(i).to_vec(), Relation::Le, z[i] + tol);
        lp.constrain(gens.row(i).to_vec(), Relation::Ge, z[i] - tol);
    }
    Ok(matches!(lp.solve()?, LpOutcome::Optimal { .. }))
}

#[derive(Debug, Clone, PartialEq)]
pub struct LatticeHomReport {
    /// `max ||J|x| - |Jx|||_inf` over the samples.
    pub max_defect: f64,
    pub worst_sample: Option<usize>,
    pub pass: bool,
}

/// Checks `|Jx| = J|x|` on samples; both spaces carry the standard order.
pub fn lattice_hom_check<J: LinearOperator + ?Sized>(
    j: &J,
    domain: &OrderedSpace,
    samples: &[Vec<f64>],
) -> Result<LatticeHomReport> {
    domain.require_standard("lattice_hom_check")?;
    check_dim(domain.dim(), j.input_dim())?;
    let mut report = LatticeHomReport { max_defect: 0.0, worst_sample: None, pass: true };
    for (i, x) in samples.iter().enumerate() {
        check_dim(domain.dim(), x.len())?;
        let defect = dist_inf(&abs(&j.apply(x)), &j.apply(&abs(x)));
        if report.worst_sample.is_none() || defect > report.max_defect {
            report.max_defect = defect;
            report.worst_sample = Some(i);
        }
    }
    report.pass = report.max_defect <= LATTICE_HOM_TOL;
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ordered_space::{NormSpec, OrderedSpaceSpec};

    fn ice_cream() -> OrderedSpace {
        let gens = vec![vec![1.0, 0.0, 1.0], vec![-1.0, 0.0, 1.0], vec![0.0, 1.0, 1.0], vec![0.0, -1.0, 1.0]];
        let cone = PolyhedralCone::from_generators(&gens).unwrap();
        OrderedSpaceSpec { dim: 3, cone, norm: NormSpec::euclidean(3) }.build().unwrap()
    }

    #[test]
    fn standard_suprema() {
        let s = OrderedSpaceSpec::standard_lp(2, 2.0).build().unwrap();
        assert_eq!(supremum_oracle(&s, &[1.0, -2.0], &[0.0, 3.0]).unwrap(), Some(vec![1.0, 3.0]));
        assert_eq!(supremum_oracle(&s, &[1.5, -2.0], &[-1.5, 2.0]).unwrap(), Some(vec![1.5, 2.0]));
    }

    #[test]
    fn ice_cream_suprema() {
        let s = ice_cream();
        // Incomparable minimal upper bounds.
        assert_eq!(supremum_oracle(&s, &[1.0, 0.0, 0.0], &[0.0, 1.0, 0.0]).unwrap(), None);
        // A pair that does have a least upper bound.
        let sup = supremum_oracle(&s, &[1.0, 0.0, 0.0], &[-1.0, 0.0, 0.0]).unwrap().unwrap();
        assert!(dist_inf(&sup, &[0.0, 0.0, 1.0]) < 1e-8);
        // Comparable pair: the larger element.
        let sup = supremum_oracle(&s, &[0.0, 0.0, 0.0], &[0.2, 0.1, 1.0]).unwrap().unwrap();
        assert!(dist_inf(&sup, &[0.2, 0.1, 1.0]) < 1e-8);
    }

    #[test]
    fn riesz_examples() {
        assert_eq!(riesz_decompose(&[1.0, 0.0], &[0.0, 1.0], &[1.0, 1.0]).unwrap(), (vec![1.0, 0.0], vec![0.0, 1.0]));
        assert_eq!(riesz_decompose(&[2.0, 2.0], &[0.0, 0.0], &[1.0, 1.0]).unwrap(), (vec![1.0, 1.0], vec![0.0, 0.0]));
        assert_eq!(riesz_decompose(&[1.0, 3.0], &[2.0, 1.0], &[2.0, 2.0]).unwrap(), (vec![1.0, 2.0], vec![1.0, 0.0]));
        assert!(riesz_decompose(&[1.0], &[1.0], &[3.0]).is_err());
        assert!(riesz_decompose(&[-1.0], &[1.0], &[0.0]).is_err());
    }

    #[test]
    fn normality_in_a_lattice_norm() {
        let s = OrderedSpaceSpec::standard_lp(3, 2.0).build().unwrap();
        let w = vec![(vec![0.5, 0.0, 1.0], vec![1.0, 1.0, 1.0]), (vec![0.0, 0.0, 0.0], vec![0.0, 2.0, 0.0])];
        let m = normality_constant_lower_bound(&s, &w).unwrap();
        assert!(m <= 1.0 && m > 0.6);
        let bad = vec![(vec![2.0, 0.0, 0.0], vec![1.0, 1.0, 1.0])];
        assert!(normality_constant_lower_bound(&s, &bad).is_err());
        assert_eq!(normality_constant_lower_bound(&s, &[]).unwrap(), 0.0);
    }

    #[test]
    fn faces_of_the_standard_cone() {
        let amb = PolyhedralCone::standard(3);
        let r = is_face(&[vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0]], &amb, 64, 1).unwrap();
        assert!(r.is_face);
        let amb2 = PolyhedralCone::standard(2);
        let r = is_face(&[vec![1.0, 1.0]], &amb2, 64, 1).unwrap();
        assert!(!r.is_face);
        let (z, g) = r.witness.unwrap();
        assert_eq!(g, vec![1.0, 1.0]);
        assert!(amb2.contains(&z).unwrap() && amb2.le(&z, &g).unwrap());
        assert!(is_face(&[vec![1.0, 0.0], vec![0.0, 1.0]], &amb2, 64, 1).unwrap().is_face);
        assert!(is_face(&[vec![-1.0, 0.0]], &amb2, 8, 1).is_err());
        assert!(is_face(&[], &amb2, 8, 1).unwrap().is_face);
    }

    #[test]
    fn lattice_homomorphisms() {
        let s2 = OrderedSpaceSpec::standard_lp(2, 2.0).build().unwrap();
        let samples = vec![vec![1.0, -1.0], vec![-0.3, 2.0], vec![0.0, 0.0]];
        let pad = Matrix::from_rows(&[vec![1.0, 0.0], vec![0.0, 1.0], vec![0.0, 0.0]]).unwrap();
        assert!(lattice_hom_check(&pad, &s2, &samples).unwrap().pass);
        let diag = Matrix::diagonal(&[2.0, 0.5]);
        assert!(lattice_hom_check(&diag, &s2, &samples).unwrap().pass);
        let shear = Matrix::from_rows(&[vec![1.0, 1.0], vec![0.0, 1.0]]).unwrap();
        let r = lattice_hom_check(&shear, &s2, &samples).unwrap();
        assert!(!r.pass);
        assert_eq!(r.max_defect, 2.0);
        assert_eq!(r.worst_sample, Some(0));
    }
}
