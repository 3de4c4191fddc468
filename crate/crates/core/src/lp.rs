//! Dense two-phase simplex for the small feasibility and optimization
//! problems issued by the cone routines.
//!
//! Bland's rule is used throughout, so the method terminates on degenerate
//! problems at the price of speed. Problem sizes here are tens of rows.

use alloc::vec;
use alloc::vec::Vec;


use crate::error::{check_dim, Error, Result};

/// Feasibility tolerance of every LP solved by the crate.
pub const LP_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    Le,
    Eq,
    Ge,
}

#[derive(Debug, Clone)]
pub struct Constraint {
    pub coeffs: Vec<f64>,
    pub relation: Relation,
    pub rhs: f64,
}

/// `minimize objective · x` subject to the constraints; variables are
/// nonnegative unless flagged free.
#[derive(Debug, Clone)]
pub struct LinearProgram {
    pub objective: Vec<f64>,
    pub constraints: Vec<Constraint>,
    pub free: Vec<bool>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum LpOutcome {
    Optimal { x: Vec<f64>, value: f64 },
    Infeasible,
    Unbounded,
}

impl LinearProgram {
    pub fn new(n_vars: usize) -> Self {
        LinearProgram { objective: vec![0.0; n_vars], constraints: Vec::new(), free: vec![false; n_vars] }
    }

    pub fn n_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn all_free(mut self) -> Self {
        self.free.iter_mut().for_each(|f| *f = true);
        self
    }

    pub fn minimize(mut self, c: &[f64]) -> Self {
        self.objective = c.to_vec();
        self
    }

    pub fn constrain(&mut self, coeffs: Vec<f64>, relation: Relation, rhs: f64) {
        self.constraints.push(Constraint { coeffs, relation, rhs });
    }

    pub fn solve(&self) -> Result<LpOutcome> {
        let n = self.n_vars();
        check_dim(n, self.free.len())?;
        for c in &self.constraints {
            check_dim(n, c.coeffs.len())?;
        }
        // Column map: each free variable becomes a difference of two columns.
        let mut col_of: Vec<(usize, Option<usize>)> = Vec::with_capacity(n);
        let mut n_struct = 0;
        for &f in &self.free {
            if f {
                col_of.push((n_struct, Some(n_struct + 1)));
                n_struct += 2;
            } else {
                col_of.push((n_struct, None));
                n_struct += 1;
            }
        }
        let m = self.constraints.len();
        let n_slack = self.constraints.iter().filter(|c| c.relation != Relation::Eq).count();
        let n_art = m;
        let width = n_struct + n_slack + n_art;
        let art0 = n_struct + n_slack;

        let mut t = Tableau::new(m, width);
        let mut slack = n_struct;
        for (i, c) in self.constraints.iter().enumerate() {
            let sign = if c.rhs < 0.0 { -1.0 } else { 1.0 };
            for (j, a) in c.coeffs.iter().enumerate() {
                let (p, q) = col_of[j];
                t.set(i, p, sign * a);
                if let Some(q) = q {
                    t.set(i, q, -sign * a);
                }
            }
            match c.relation {
                Relation::Le => {
                    t.set(i, slack, sign);
                    slack += 1;
                }
                Relation::Ge => {
                    t.set(i, slack, -sign);
                    slack += 1;
                }
                Relation::Eq => {}
            }
            t.set(i, art0 + i, 1.0);
            t.set_rhs(i, sign * c.rhs);
            t.basis[i] = art0 + i;
        }

        // Phase I: minimize the sum of artificials.
        let mut phase1 = vec![0.0; width];
        phase1[art0..].iter_mut().for_each(|v| *v = 1.0);
        t.load_objective(&phase1);
        t.run(width)?;
        if t.objective_value() > LP_TOL * (1.0 + t.rhs_scale()) {
            return Ok(LpOutcome::Infeasible);
        }
        // Drive remaining artificials out of the basis where possible.
        for i in 0..m {
            if t.basis[i] >= art0 {
                if let Some(j) = (0..art0).find(|&j| t.get(i, j).abs() > LP_TOL) {
                    t.pivot(i, j);
                }
            }
        }

        // Phase II on the structural and slack columns only.
        let mut phase2 = vec![0.0; width];
        for (j, c) in self.objective.iter().enumerate() {
            let (p, q) = col_of[j];
            phase2[p] = *c;
            if let Some(q) = q {
                phase2[q] = -*c;
            }
        }
        t.load_objective(&phase2);
        if t.run(art0)? == Step::Unbounded {
            return Ok(LpOutcome::Unbounded);
        }
        let mut z = vec![0.0; width];
        for i in 0..m {
            z[t.basis[i]] = t.rhs(i);
        }
        let x: Vec<f64> = col_of
            .iter()
            .map(|&(p, q)| z[p] - q.map_or(0.0, |q| z[q]))
            .collect();
        let value = self.objective.iter().zip(&x).map(|(c, v)| c * v).sum();
        Ok(LpOutcome::Optimal { x, value })
    }
}

#[derive(Debug, PartialEq, Eq)]
enum Step {
    Optimal,
    Unbounded,
}

/// Tableau with `m` constraint rows and a trailing reduced-cost row.
struct Tableau {
    m: usize,
    width: usize,
    data: Vec<f64>,
    basis: Vec<usize>,
}

impl Tableau {
    fn new(m: usize, width: usize) -> Self {
        Tableau { m, width, data: vec![0.0; (m + 1) * (width + 1)], basis: vec![0; m] }
    }

    fn idx(&self, i: usize, j: usize) -> usize {
        i * (self.width + 1) + j
    }

    fn get(&self, i: usize, j: usize) -> f64 {
        self.data[self.idx(i, j)]
    }

    fn set(&mut self, i: usize, j: usize, v: f64) {
        let k = self.idx(i, j);
        self.data[k] = v;
    }

    fn rhs(&self, i: usize) -> f64 {
        self.get(i, self.width)
    }

    fn set_rhs(&mut self, i: usize, v: f64) {
        let w = self.width;
        self.set(i, w, v);
    }

    fn rhs_scale(&self) -> f64 {
        (0..self.m).fold(0.0, |s, i| s.max(self.rhs(i).abs()))
    }

    /// Objective row holds reduced costs; its rhs holds minus the value.
    fn load_objective(&mut self, c: &[f64]) {
        let (m, w) = (self.m, self.width);
        for j in 0..w {
            self.set(m, j, c[j]);
        }
        self.set(m, w, 0.0);
        for i in 0..m {
            let cb = c[self.basis[i]];
            if cb != 0.0 {
                for j in 0..=w {
                    let v = self.get(m, j) - cb * self.get(i, j);
                    self.set(m, j, v);
                }
            }
        }
    }

    fn objective_value(&self) -> f64 {
        -self.get(self.m, self.width)
    }

    fn pivot(&mut self, r: usize, c: usize) {
        let w = self.width;
        let piv = self.get(r, c);
        for j in 0..=w {
            let v = self.get(r, j) / piv;
            self.set(r, j, v);
        }
        for i in 0..=self.m {
            if i == r {
                continue;
            }
            let f = self.get(i, c);
            if f != 0.0 {
                for j in 0..=w {
                    let v = self.get(i, j) - f * self.get(r, j);
                    self.set(i, j, v);
                }
                self.set(i, c, 0.0);
            }
        }
        self.basis[r] = c;
    }

    /// Bland's-rule simplex restricted to entering columns `< limit`.
    fn run(&mut self, limit: usize) -> Result<Step> {
        let max_iter = 50 * (self.m + self.width) + 1000;
        for _ in 0..max_iter {
            let m = self.m;
            let Some(enter) = (0..limit).find(|&j| self.get(m, j) < -LP_TOL) else {
                return Ok(Step::Optimal);
            };
            let mut leave: Option<(usize, f64)> = None;
            for i in 0..m {
                let a = self.get(i, enter);
                if a > LP_TOL {
                    let ratio = self.rhs(i) / a;
                    match leave {
                        None => leave = Some((i, ratio)),
                        Some((li, lr)) => {
                            if ratio < lr - 1e-12
                                || (ratio <= lr + 1e-12 && self.basis[i] < self.basis[li])
                            {
                                leave = Some((i, ratio));
                            }
                        }
                    }
                }
            }
            match leave {
                None => return Ok(Step::Unbounded),
                Some((r, _)) => self.pivot(r, enter),
            }
        }
        Err(Error::LpIterationLimit)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn optimal(o: LpOutcome) -> (Vec<f64>, f64) {
        match o {
            LpOutcome::Optimal { x, value } => (x, value),
            other => panic!("expected optimum, got {other:?}"),
        }
    }

    #[test]
    fn small_textbook_problem() {
        // max 3x + 5y s.t. x <= 4, 2y <= 12, 3x + 2y <= 18
        let mut lp = LinearProgram::new(2).minimize(&[-3.0, -5.0]);
        lp.constrain(vec![1.0, 0.0], Relation::Le, 4.0);
        lp.constrain(vec![0.0, 2.0], Relation::Le, 12.0);
        lp.constrain(vec![3.0, 2.0], Relation::Le, 18.0);
        let (x, v) = optimal(lp.solve().unwrap());
        assert!((v + 36.0).abs() < 1e-9);
        assert!((x[0] - 2.0).abs() < 1e-9 && (x[1] - 6.0).abs() < 1e-9);
    }

    #[test]
    fn free_variables_and_equalities() {
        // min x + y s.t. x - y = -3, x >= -5 (free vars)
        let mut lp = LinearProgram::new(2).all_free().minimize(&[1.0, 1.0]);
        lp.constrain(vec![1.0, -1.0], Relation::Eq, -3.0);
        lp.constrain(vec![1.0, 0.0], Relation::Ge, -5.0);
        let (x, v) = optimal(lp.solve().unwrap());
        assert!((x[0] + 5.0).abs() < 1e-9 && (x[1] + 2.0).abs() < 1e-9);
        assert!((v + 7.0).abs() < 1e-9);
    }

    #[test]
    fn infeasible_and_unbounded() {
        let mut lp = LinearProgram::new(1).minimize(&[1.0]);
        lp.constrain(vec![1.0], Relation::Ge, 2.0);
        lp.constrain(vec![1.0], Relation::Le, 1.0);
        assert_eq!(lp.solve().unwrap(), LpOutcome::Infeasible);

        let mut lp = LinearProgram::new(1).all_free().minimize(&[1.0]);
        lp.constrain(vec![1.0], Relation::Le, 1.0);
        assert_eq!(lp.solve().unwrap(), LpOutcome::Unbounded);
    }

    #[test]
    fn degenerate_problem_terminates() {
        let mut lp = LinearProgram::new(3).minimize(&[-1.0, -1.0, -1.0]);
        for _ in 0..4 {
            lp.constrain(vec![1.0, 1.0, 0.0], Relation::Le, 0.0);
        }
        lp.constrain(vec![0.0, 0.0, 1.0], Relation::Le, 1.0);
        let (_, v) = optimal(lp.solve().unwrap());
        assert!((v + 1.0).abs() < 1e-9);
    }
}
