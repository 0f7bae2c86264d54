//! Dense two-phase simplex.
//!
//! Rows are `coeffs · x {<=,>=,=} rhs`; variables are non-negative unless
//! marked free, in which case they are split into a positive and a negative
//! part. Entering columns are chosen by largest reduced cost, falling back to
//! Bland's rule after a run of degenerate pivots. A [`Simplex`] keeps its
//! tableau between solves so a new objective can be optimized from the last
//! vertex.

use crate::error::{Error, Result};

/// Pivot and feasibility tolerance.
pub const TOL: f64 = 1e-9;

const DEGENERATE_RUN: usize = 25;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Relation {
    Le,
    Ge,
    Eq,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Sense {
    Minimize,
    Maximize,
}

#[derive(Clone, Debug)]
pub struct Row {
    pub coeffs: Vec<f64>,
    pub relation: Relation,
    pub rhs: f64,
}

#[derive(Clone, Debug, Default)]
pub struct Problem {
    num_vars: usize,
    free: Vec<bool>,
    rows: Vec<Row>,
}

impl Problem {
    pub fn new(num_vars: usize) -> Self {
        Self {
            num_vars,
            free: vec![false; num_vars],
            rows: Vec::new(),
        }
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn rows(&self) -> &[Row] {
        &self.rows
    }

    pub fn set_free(&mut self, var: usize) {
        self.free[var] = true;
    }

    pub fn add_row(&mut self, coeffs: Vec<f64>, relation: Relation, rhs: f64) {
        assert_eq!(coeffs.len(), self.num_vars, "row width");
        self.rows.push(Row {
            coeffs,
            relation,
            rhs,
        });
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Solution {
    pub x: Vec<f64>,
    pub objective: f64,
    /// Shadow price of each row: the rate of change of the optimal objective
    /// per unit increase of that row's right-hand side.
    pub duals: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Outcome {
    Optimal(Solution),
    Infeasible,
    Unbounded,
}

impl Outcome {
    pub fn optimal(self) -> Option<Solution> {
        match self {
            Outcome::Optimal(s) => Some(s),
            _ => None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Col {
    Pos(usize),
    Neg(usize),
    Slack,
    Surplus,
    Artificial,
}

#[derive(Clone, Debug)]
pub struct Simplex {
    num_vars: usize,
    num_rows: usize,
    cols: Vec<Col>,
    width: usize,
    /// `m x width`, row-major.
    t: Vec<f64>,
    rhs: Vec<f64>,
    basis: Vec<usize>,
    /// Original row index of each tableau row.
    origin: Vec<usize>,
    /// Column holding the unit vector of each tableau row at start.
    unit: Vec<usize>,
    sign: Vec<f64>,
    enterable: Vec<bool>,
    /// Standardized constraint matrix and rhs, for refinement.
    a0: Vec<f64>,
    b0: Vec<f64>,
    reduced: Vec<f64>,
    pivots: usize,
    pivot_limit: usize,
}

impl Simplex {
    /// Builds the tableau and runs phase one. `Ok(None)` means infeasible.
    pub fn new(problem: &Problem) -> Result<Option<Self>> {
        let mut cols = Vec::new();
        for j in 0..problem.num_vars {
            cols.push(Col::Pos(j));
            if problem.free[j] {
                cols.push(Col::Neg(j));
            }
        }
        let structural = cols.len();
        let m = problem.rows.len();
        let mut sign = Vec::with_capacity(m);
        for row in &problem.rows {
            sign.push(if row.rhs < 0.0 { -1.0 } else { 1.0 });
        }
        let relation = |i: usize| match (problem.rows[i].relation, sign[i] < 0.0) {
            (Relation::Le, true) => Relation::Ge,
            (Relation::Ge, true) => Relation::Le,
            (r, _) => r,
        };
        let mut unit = vec![0; m];
        let mut extra: Vec<(usize, Col, f64)> = Vec::new();
        for i in 0..m {
            match relation(i) {
                Relation::Le => extra.push((i, Col::Slack, 1.0)),
                Relation::Ge => {
                    extra.push((i, Col::Surplus, -1.0));
                    extra.push((i, Col::Artificial, 1.0));
                }
                Relation::Eq => extra.push((i, Col::Artificial, 1.0)),
            }
        }
        let width = structural + extra.len();
        let mut t = vec![0.0; m * width];
        let mut rhs = vec![0.0; m];
        for (i, row) in problem.rows.iter().enumerate() {
            let r = &mut t[i * width..(i + 1) * width];
            for (c, col) in cols.iter().enumerate() {
                r[c] = match *col {
                    Col::Pos(j) => sign[i] * row.coeffs[j],
                    Col::Neg(j) => -sign[i] * row.coeffs[j],
                    _ => unreachable!(),
                };
            }
            rhs[i] = sign[i] * row.rhs;
        }
        let mut basis = vec![0; m];
        for (k, &(i, col, v)) in extra.iter().enumerate() {
            let c = structural + k;
            t[i * width + c] = v;
            cols.push(col);
            if v > 0.0 {
                unit[i] = c;
                basis[i] = c;
            }
        }
        let enterable = vec![true; width];
        let mut s = Simplex {
            num_vars: problem.num_vars,
            num_rows: m,
            a0: t.clone(),
            b0: rhs.clone(),
            cols,
            width,
            t,
            rhs,
            basis,
            origin: (0..m).collect(),
            unit,
            sign,
            enterable,
            reduced: vec![0.0; width],
            pivots: 0,
            pivot_limit: 20_000 + 50 * (m + width),
        };
        if !s.cols.contains(&Col::Artificial) {
            return Ok(Some(s));
        }
        let costs: Vec<f64> = s
            .cols
            .iter()
            .map(|c| if *c == Col::Artificial { 1.0 } else { 0.0 })
            .collect();
        s.run(&costs)?;
        let scale = s.b0.iter().fold(1.0f64, |a, b| a.max(b.abs()));
        if s.objective_value(&costs) > 1e-7 * scale {
            return Ok(None);
        }
        s.drive_out_artificials();
        for (c, col) in s.cols.iter().enumerate() {
            if *col == Col::Artificial {
                s.enterable[c] = false;
            }
        }
        Ok(Some(s))
    }

    pub fn pivots(&self) -> usize {
        self.pivots
    }

    fn row(&self, i: usize) -> &[f64] {
        &self.t[i * self.width..(i + 1) * self.width]
    }

    fn objective_value(&self, costs: &[f64]) -> f64 {
        self.basis.iter().zip(&self.rhs).map(|(&b, &v)| costs[b] * v).sum()
    }

    fn price(&mut self, costs: &[f64]) {
        self.reduced.copy_from_slice(costs);
        for i in 0..self.basis.len() {
            let cb = costs[self.basis[i]];
            if cb != 0.0 {
                let row = &self.t[i * self.width..(i + 1) * self.width];
                for (d, a) in self.reduced.iter_mut().zip(row) {
                    *d -= cb * a;
                }
            }
        }
    }

    fn pivot(&mut self, r: usize, q: usize) {
        let w = self.width;
        let p = self.t[r * w + q];
        for v in &mut self.t[r * w..(r + 1) * w] {
            *v /= p;
        }
        self.rhs[r] /= p;
        let (head, rest) = self.t.split_at_mut(r * w);
        let (prow, tail) = rest.split_at_mut(w);
        let m = self.basis.len();
        for i in 0..m {
            if i == r {
                continue;
            }
            let row = if i < r {
                &mut head[i * w..(i + 1) * w]
            } else {
                &mut tail[(i - r - 1) * w..(i - r) * w]
            };
            let f = row[q];
            if f != 0.0 {
                for (a, b) in row.iter_mut().zip(prow.iter()) {
                    *a -= f * b;
                }
                row[q] = 0.0;
                self.rhs[i] -= f * self.rhs[r];
                if self.rhs[i].abs() < 1e-13 {
                    self.rhs[i] = 0.0;
                }
            }
        }
        let f = self.reduced[q];
        if f != 0.0 {
            for (d, b) in self.reduced.iter_mut().zip(prow.iter()) {
                *d -= f * b;
            }
            self.reduced[q] = 0.0;
        }
        self.basis[r] = q;
        self.pivots += 1;
    }

    /// Minimizes `costs` from the current basis.
    fn run(&mut self, costs: &[f64]) -> Result<bool> {
        self.price(costs);
        let mut degenerate = 0usize;
        loop {
            if self.pivots >= self.pivot_limit {
                return Err(Error::PivotLimit(self.pivots));
            }
            let bland = degenerate >= DEGENERATE_RUN;
            let mut q = None;
            let mut best = -TOL;
            for c in 0..self.width {
                if !self.enterable[c] || self.reduced[c] >= -TOL {
                    continue;
                }
                if bland {
                    q = Some(c);
                    break;
                }
                if self.reduced[c] < best {
                    best = self.reduced[c];
                    q = Some(c);
                }
            }
            let Some(q) = q else { return Ok(true) };
            let mut r = None;
            let mut ratio = f64::INFINITY;
            for i in 0..self.basis.len() {
                let a = self.t[i * self.width + q];
                if a > TOL {
                    let v = self.rhs[i].max(0.0) / a;
                    let better = match r {
                        None => true,
                        Some(ri) => {
                            v < ratio - 1e-12
                                || (v <= ratio + 1e-12 && self.basis[i] < self.basis[ri])
                        }
                    };
                    if better {
                        ratio = v.min(ratio);
                        r = Some(i);
                    }
                }
            }
            let Some(r) = r else { return Ok(false) };
            degenerate = if ratio < 1e-12 { degenerate + 1 } else { 0 };
            self.pivot(r, q);
        }
    }

    fn drive_out_artificials(&mut self) {
        let mut i = 0;
        while i < self.basis.len() {
            if self.cols[self.basis[i]] != Col::Artificial {
                i += 1;
                continue;
            }
            let q = (0..self.width)
                .filter(|&c| self.cols[c] != Col::Artificial)
                .max_by(|&a, &b| self.row(i)[a].abs().total_cmp(&self.row(i)[b].abs()))
                .filter(|&c| self.row(i)[c].abs() > 1e-7);
            match q {
                Some(q) => {
                    self.pivot(i, q);
                    i += 1;
                }
                None => self.remove_row(i),
            }
        }
    }

    fn remove_row(&mut self, i: usize) {
        let w = self.width;
        self.t.drain(i * w..(i + 1) * w);
        self.a0.drain(i * w..(i + 1) * w);
        self.rhs.remove(i);
        self.b0.remove(i);
        self.basis.remove(i);
        self.origin.remove(i);
        self.unit.remove(i);
    }

    /// Optimizes `objective` starting from the current vertex.
    pub fn optimize(&mut self, sense: Sense, objective: &[f64]) -> Result<Outcome> {
        assert_eq!(objective.len(), self.num_vars, "objective width");
        let flip = if sense == Sense::Maximize { -1.0 } else { 1.0 };
        let costs: Vec<f64> = self
            .cols
            .iter()
            .map(|c| match *c {
                Col::Pos(j) => flip * objective[j],
                Col::Neg(j) => -flip * objective[j],
                _ => 0.0,
            })
            .collect();
        if !self.run(&costs)? {
            return Ok(Outcome::Unbounded);
        }
        let x = self.primal(&self.rhs);
        let mut duals = vec![0.0; self.num_rows];
        for (r, &orig) in self.origin.iter().enumerate() {
            let pi = -self.reduced[self.unit[r]];
            duals[orig] = flip * self.sign[orig] * pi;
        }
        let value = objective.iter().zip(&x).map(|(c, v)| c * v).sum();
        Ok(Outcome::Optimal(Solution {
            x,
            objective: value,
            duals,
        }))
    }

    fn primal(&self, basic_values: &[f64]) -> Vec<f64> {
        let mut x = vec![0.0; self.num_vars];
        for (&b, &v) in self.basis.iter().zip(basic_values) {
            match self.cols[b] {
                Col::Pos(j) => x[j] += v,
                Col::Neg(j) => x[j] -= v,
                _ => {}
            }
        }
        x
    }

    /// One step of residual refinement of the basic solution against the
    /// original constraint matrix. Returns `None` if the basis is numerically
    /// singular.
    pub fn refine(&self, sol: &Solution, objective: &[f64]) -> Option<Solution> {
        let m = self.basis.len();
        let w = self.width;
        let mut b = vec![0.0; m * m];
        for i in 0..m {
            for (k, &c) in self.basis.iter().enumerate() {
                b[i * m + k] = self.a0[i * w + c];
            }
        }
        let xb: Vec<f64> = self.rhs.clone();
        let residual: Vec<f64> = (0..m)
            .map(|i| self.b0[i] - (0..m).map(|k| b[i * m + k] * xb[k]).sum::<f64>())
            .collect();
        let dx = solve_dense(b, residual, m)?;
        let refined: Vec<f64> = xb.iter().zip(&dx).map(|(a, d)| (a + d).max(0.0)).collect();
        let x = self.primal(&refined);
        let value = objective.iter().zip(&x).map(|(c, v)| c * v).sum();
        Some(Solution {
            x,
            objective: value,
            duals: sol.duals.clone(),
        })
    }
}

/// Gaussian elimination with partial pivoting on a dense `m x m` system.
fn solve_dense(mut a: Vec<f64>, mut b: Vec<f64>, m: usize) -> Option<Vec<f64>> {
    for col in 0..m {
        let p = (col..m).max_by(|&i, &j| a[i * m + col].abs().total_cmp(&a[j * m + col].abs()))?;
        if a[p * m + col].abs() < 1e-13 {
            return None;
        }
        if p != col {
            for k in 0..m {
                a.swap(p * m + k, col * m + k);
            }
            b.swap(p, col);
        }
        for i in col + 1..m {
            let f = a[i * m + col] / a[col * m + col];
            if f != 0.0 {
                for k in col..m {
                    a[i * m + k] -= f * a[col * m + k];
                }
                b[i] -= f * b[col];
            }
        }
    }
    let mut x = vec![0.0; m];
    for i in (0..m).rev() {
        let s: f64 = (i + 1..m).map(|k| a[i * m + k] * x[k]).sum();
        x[i] = (b[i] - s) / a[i * m + i];
    }
    Some(x)
}

/// Solves once, with residual refinement of the optimal vertex.
pub fn solve(problem: &Problem, sense: Sense, objective: &[f64]) -> Result<Outcome> {
    let Some(mut s) = Simplex::new(problem)? else {
        return Ok(Outcome::Infeasible);
    };
    match s.optimize(sense, objective)? {
        Outcome::Optimal(sol) => Ok(Outcome::Optimal(s.refine(&sol, objective).unwrap_or(sol))),
        other => Ok(other),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn approx(a: f64, b: f64) -> bool {
        (a - b).abs() < 1e-9
    }

    #[test]
    fn textbook_maximization() {
        // max 3x + 5y, x <= 4, 2y <= 12, 3x + 2y <= 18 -> (2, 6), 36
        let mut p = Problem::new(2);
        p.add_row(vec![1.0, 0.0], Relation::Le, 4.0);
        p.add_row(vec![0.0, 2.0], Relation::Le, 12.0);
        p.add_row(vec![3.0, 2.0], Relation::Le, 18.0);
        let s = solve(&p, Sense::Maximize, &[3.0, 5.0]).unwrap().optimal().unwrap();
        assert!(approx(s.objective, 36.0));
        assert!(approx(s.x[0], 2.0) && approx(s.x[1], 6.0));
        assert!(approx(s.duals[0], 0.0));
        assert!(approx(s.duals[1], 1.5));
        assert!(approx(s.duals[2], 1.0));
    }

    #[test]
    fn equality_and_free_variables() {
        // x - y = 2x - 1 on the line, so the minimum is at x = 0.
        let mut p = Problem::new(2);
        p.set_free(1);
        p.add_row(vec![1.0, 1.0], Relation::Eq, 1.0);
        p.add_row(vec![1.0, -1.0], Relation::Ge, -3.0);
        let s = solve(&p, Sense::Minimize, &[1.0, -1.0]).unwrap().optimal().unwrap();
        assert!(approx(s.objective, -1.0));
        assert!(approx(s.x[0], 0.0) && approx(s.x[1], 1.0));
    }

    #[test]
    fn detects_infeasible_and_unbounded() {
        let mut p = Problem::new(1);
        p.add_row(vec![1.0], Relation::Ge, 2.0);
        p.add_row(vec![1.0], Relation::Le, 1.0);
        assert_eq!(solve(&p, Sense::Minimize, &[1.0]).unwrap(), Outcome::Infeasible);
        let mut q = Problem::new(1);
        q.add_row(vec![1.0], Relation::Ge, 2.0);
        assert_eq!(solve(&q, Sense::Maximize, &[1.0]).unwrap(), Outcome::Unbounded);
    }

    #[test]
    fn redundant_equalities_are_dropped() {
        let mut p = Problem::new(2);
        p.add_row(vec![1.0, 1.0], Relation::Eq, 1.0);
        p.add_row(vec![2.0, 2.0], Relation::Eq, 2.0);
        let s = solve(&p, Sense::Maximize, &[1.0, 0.0]).unwrap().optimal().unwrap();
        assert!(approx(s.objective, 1.0));
    }

    #[test]
    fn warm_start_reoptimizes() {
        let mut p = Problem::new(2);
        for (a, b) in [(1.0, 0.0), (0.0, 1.0), (-1.0, 0.0), (0.0, -1.0)] {
            p.add_row(vec![a, b], Relation::Le, 1.0);
        }
        p.set_free(0);
        p.set_free(1);
        let mut s = Simplex::new(&p).unwrap().unwrap();
        for (c, want) in [([1.0, 1.0], 2.0), ([-1.0, 2.0], 3.0), ([0.0, -1.0], 1.0)] {
            let sol = s.optimize(Sense::Maximize, &c).unwrap().optimal().unwrap();
            assert!(approx(sol.objective, want), "{c:?}");
        }
    }

    #[test]
    fn degenerate_problem_terminates() {
        // Classic cycling example under largest-coefficient pricing.
        let mut p = Problem::new(4);
        p.add_row(vec![0.5, -5.5, -2.5, 9.0], Relation::Le, 0.0);
        p.add_row(vec![0.5, -1.5, -0.5, 1.0], Relation::Le, 0.0);
        p.add_row(vec![1.0, 0.0, 0.0, 0.0], Relation::Le, 1.0);
        let s = solve(&p, Sense::Maximize, &[10.0, -57.0, -9.0, -24.0])
            .unwrap()
            .optimal()
            .unwrap();
        assert!(approx(s.objective, 1.0));
    }

    proptest::proptest! {
        // Weak duality certificate: b·y equals the optimum on random bounded boxes.
        #[test]
        fn strong_duality_on_random_boxes(
            c in proptest::collection::vec(-5.0f64..5.0, 3),
            a in proptest::collection::vec(-2.0f64..2.0, 9),
            b in proptest::collection::vec(0.5f64..4.0, 3),
        ) {
            let mut p = Problem::new(3);
            for i in 0..3 {
                p.add_row(a[3 * i..3 * i + 3].to_vec(), Relation::Le, b[i]);
                let mut e = vec![0.0; 3];
                e[i] = 1.0;
                p.add_row(e, Relation::Le, 10.0);
            }
            let s = solve(&p, Sense::Maximize, &c).unwrap().optimal().unwrap();
            let dual_value: f64 = p.rows().iter().zip(&s.duals).map(|(r, y)| r.rhs * y).sum();
            proptest::prop_assert!((dual_value - s.objective).abs() < 1e-6);
            for r in p.rows() {
                let lhs: f64 = r.coeffs.iter().zip(&s.x).map(|(a, x)| a * x).sum();
                proptest::prop_assert!(lhs <= r.rhs + 1e-7);
            }
        }
    }
}
