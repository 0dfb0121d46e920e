//! Dense two-phase simplex with Bland's anti-cycling rule.
//!
//! Problems are stated as
//!
//! ```text
//! minimize    c·x
//! subject to  A_eq x  = b_eq
//!             A_in x (<= | >=) b_in
//!             lower <= x <= upper      (either side may be infinite)
//! ```
//!
//! and converted to `A y = b, y >= 0` internally. The program sizes handled
//! here are around a hundred rows and columns, so the tableau is dense.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::tol;

const COST_EPS: f64 = 1e-10;
const PIVOT_EPS: f64 = 1e-10;
const MAX_PIVOTS: usize = 200_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
    IterationLimit,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Le,
    Ge,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpProblem {
    objective: Vec<f64>,
    eq_rows: Vec<(Vec<f64>, f64)>,
    ineq_rows: Vec<(Vec<f64>, Sense, f64)>,
    lower: Vec<f64>,
    upper: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution {
    pub status: LpStatus,
    pub value: f64,
    pub assignment: Vec<f64>,
    /// Largest violation of any equality, inequality or bound at `assignment`.
    pub max_constraint_residual: f64,
}

impl LpProblem {
    /// A problem over `num_vars` variables, all bounded below by zero.
    pub fn new(num_vars: usize) -> Self {
        LpProblem {
            objective: vec![0.0; num_vars],
            eq_rows: Vec::new(),
            ineq_rows: Vec::new(),
            lower: vec![0.0; num_vars],
            upper: vec![f64::INFINITY; num_vars],
        }
    }

    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn objective(&self) -> &[f64] {
        &self.objective
    }

    pub fn set_objective(&mut self, var: usize, coef: f64) {
        self.objective[var] = coef;
    }

    pub fn set_bounds(&mut self, var: usize, lower: f64, upper: f64) {
        self.lower[var] = lower;
        self.upper[var] = upper;
    }

    pub fn bounds(&self, var: usize) -> (f64, f64) {
        (self.lower[var], self.upper[var])
    }

    fn dense(&self, terms: &[(usize, f64)]) -> Vec<f64> {
        let mut row = vec![0.0; self.num_vars()];
        for &(j, a) in terms {
            row[j] += a;
        }
        row
    }

    pub fn add_eq(&mut self, terms: &[(usize, f64)], rhs: f64) {
        let row = self.dense(terms);
        self.eq_rows.push((row, rhs));
    }

    pub fn add_le(&mut self, terms: &[(usize, f64)], rhs: f64) {
        let row = self.dense(terms);
        self.ineq_rows.push((row, Sense::Le, rhs));
    }

    pub fn add_ge(&mut self, terms: &[(usize, f64)], rhs: f64) {
        let row = self.dense(terms);
        self.ineq_rows.push((row, Sense::Ge, rhs));
    }

    pub fn eq_rows(&self) -> &[(Vec<f64>, f64)] {
        &self.eq_rows
    }

    pub fn ineq_rows(&self) -> &[(Vec<f64>, Sense, f64)] {
        &self.ineq_rows
    }

    fn validate(&self) -> Result<()> {
        let n = self.num_vars();
        let finite = |v: &f64| v.is_finite();
        if !self.objective.iter().all(finite) {
            return Err(Error::Dimension("non-finite objective coefficient".into()));
        }
        for (row, rhs) in &self.eq_rows {
            if row.len() != n || !row.iter().all(finite) || !rhs.is_finite() {
                return Err(Error::Dimension("malformed equality row".into()));
            }
        }
        for (row, _, rhs) in &self.ineq_rows {
            if row.len() != n || !row.iter().all(finite) || !rhs.is_finite() {
                return Err(Error::Dimension("malformed inequality row".into()));
            }
        }
        for j in 0..n {
            let (lo, hi) = (self.lower[j], self.upper[j]);
            if lo.is_nan() || hi.is_nan() || lo == f64::INFINITY || hi == f64::NEG_INFINITY {
                return Err(Error::Dimension(format!("bad bounds on variable {j}")));
            }
        }
        Ok(())
    }

    /// Largest violation of the constraints and bounds at `x`.
    pub fn max_residual(&self, x: &[f64]) -> f64 {
        let dot = |row: &[f64]| row.iter().zip(x).map(|(a, b)| a * b).sum::<f64>();
        let mut worst: f64 = 0.0;
        for (row, rhs) in &self.eq_rows {
            worst = worst.max((dot(row) - rhs).abs());
        }
        for (row, sense, rhs) in &self.ineq_rows {
            let lhs = dot(row);
            let viol = match sense {
                Sense::Le => lhs - rhs,
                Sense::Ge => rhs - lhs,
            };
            worst = worst.max(viol);
        }
        for (j, &v) in x.iter().enumerate() {
            worst = worst.max(self.lower[j] - v).max(v - self.upper[j]);
        }
        worst
    }

    pub fn evaluate(&self, x: &[f64]) -> f64 {
        self.objective.iter().zip(x).map(|(c, v)| c * v).sum()
    }
}

/// How an original variable is expressed through nonnegative columns.
#[derive(Debug, Clone, Copy)]
enum VarMap {
    /// `x = offset + y[col]`
    Shifted { col: usize, offset: f64 },
    /// `x = offset - y[col]`
    Mirrored { col: usize, offset: f64 },
    /// `x = y[pos] - y[neg]`
    Free { pos: usize, neg: usize },
}

struct StandardForm {
    a: Vec<Vec<f64>>,
    b: Vec<f64>,
    c: Vec<f64>,
    /// Column usable as the initial basic variable of each row, if any.
    slack_basis: Vec<Option<usize>>,
    maps: Vec<VarMap>,
}

fn to_standard_form(p: &LpProblem) -> StandardForm {
    let n = p.num_vars();
    let mut maps = Vec::with_capacity(n);
    let mut ncols = 0;
    // Rows of the form y[col] <= width, from finite two-sided bounds.
    let mut bound_rows = Vec::new();
    for j in 0..n {
        let (lo, hi) = (p.lower[j], p.upper[j]);
        let map = if lo.is_finite() {
            if hi.is_finite() {
                bound_rows.push((ncols, hi - lo));
            }
            VarMap::Shifted {
                col: ncols,
                offset: lo,
            }
        } else if hi.is_finite() {
            VarMap::Mirrored {
                col: ncols,
                offset: hi,
            }
        } else {
            ncols += 1;
            VarMap::Free {
                pos: ncols - 1,
                neg: ncols,
            }
        };
        ncols += 1;
        maps.push(map);
    }

    let substitute = |row: &[f64], rhs: f64| -> (Vec<f64>, f64) {
        let mut out = vec![0.0; ncols];
        let mut rhs = rhs;
        for (j, &a) in row.iter().enumerate() {
            if a == 0.0 {
                continue;
            }
            match maps[j] {
                VarMap::Shifted { col, offset } => {
                    out[col] += a;
                    rhs -= a * offset;
                }
                VarMap::Mirrored { col, offset } => {
                    out[col] -= a;
                    rhs -= a * offset;
                }
                VarMap::Free { pos, neg } => {
                    out[pos] += a;
                    out[neg] -= a;
                }
            }
        }
        (out, rhs)
    };

    // (row, rhs, slack sign: 0 none, +1 for <=, -1 for >=)
    let mut rows: Vec<(Vec<f64>, f64, i8)> = Vec::new();
    for (row, rhs) in &p.eq_rows {
        let (r, b) = substitute(row, *rhs);
        rows.push((r, b, 0));
    }
    for (row, sense, rhs) in &p.ineq_rows {
        let (r, b) = substitute(row, *rhs);
        rows.push((r, b, if *sense == Sense::Le { 1 } else { -1 }));
    }
    for &(col, width) in &bound_rows {
        let mut r = vec![0.0; ncols];
        r[col] = 1.0;
        rows.push((r, width, 1));
    }

    let num_slacks = rows.iter().filter(|r| r.2 != 0).count();
    let total = ncols + num_slacks;
    let mut a = Vec::with_capacity(rows.len());
    let mut b = Vec::with_capacity(rows.len());
    let mut slack_basis = Vec::with_capacity(rows.len());
    let mut next_slack = ncols;
    for (mut r, mut rhs, sign) in rows {
        r.resize(total, 0.0);
        let mut slack = None;
        if sign != 0 {
            r[next_slack] = f64::from(sign);
            slack = Some(next_slack);
            next_slack += 1;
        }
        if rhs < 0.0 {
            r.iter_mut().for_each(|v| *v = -*v);
            rhs = -rhs;
        }
        let basis = slack.filter(|&s| r[s] > 0.0);
        a.push(r);
        b.push(rhs);
        slack_basis.push(basis);
    }

    let mut c = vec![0.0; total];
    for (j, &cj) in p.objective.iter().enumerate() {
        match maps[j] {
            VarMap::Shifted { col, .. } => c[col] += cj,
            VarMap::Mirrored { col, .. } => c[col] -= cj,
            VarMap::Free { pos, neg } => {
                c[pos] += cj;
                c[neg] -= cj;
            }
        }
    }

    StandardForm {
        a,
        b,
        c,
        slack_basis,
        maps,
    }
}

struct Tableau {
    rows: Vec<Vec<f64>>,
    rhs: Vec<f64>,
    basis: Vec<usize>,
    reduced: Vec<f64>,
    /// Negated objective value of the current basis.
    obj: f64,
    pivots: usize,
}

enum Outcome {
    Optimal,
    Unbounded,
    IterationLimit,
}

impl Tableau {
    fn pivot(&mut self, r: usize, col: usize) {
        let piv = self.rows[r][col];
        for v in self.rows[r].iter_mut() {
            *v /= piv;
        }
        self.rhs[r] /= piv;
        let pivot_row = self.rows[r].clone();
        let pivot_rhs = self.rhs[r];
        for i in 0..self.rows.len() {
            if i == r {
                continue;
            }
            let factor = self.rows[i][col];
            if factor != 0.0 {
                for (v, p) in self.rows[i].iter_mut().zip(&pivot_row) {
                    *v -= factor * p;
                }
                self.rows[i][col] = 0.0;
                self.rhs[i] -= factor * pivot_rhs;
                if self.rhs[i] < 0.0 && self.rhs[i] > -PIVOT_EPS {
                    self.rhs[i] = 0.0;
                }
            }
        }
        let factor = self.reduced[col];
        if factor != 0.0 {
            for (v, p) in self.reduced.iter_mut().zip(&pivot_row) {
                *v -= factor * p;
            }
            self.reduced[col] = 0.0;
            self.obj -= factor * pivot_rhs;
        }
        self.basis[r] = col;
        self.pivots += 1;
    }

    fn price(&mut self, cost: &[f64]) {
        self.reduced = cost.to_vec();
        self.obj = 0.0;
        for (i, &bi) in self.basis.iter().enumerate() {
            let cb = cost[bi];
            if cb != 0.0 {
                for (d, a) in self.reduced.iter_mut().zip(&self.rows[i]) {
                    *d -= cb * a;
                }
                self.obj -= cb * self.rhs[i];
            }
        }
    }

    /// Bland's rule: lowest-index improving column enters; among rows tied
    /// in the ratio test the lowest-index basic variable leaves.
    fn run(&mut self, allowed: &[bool]) -> Outcome {
        loop {
            if self.pivots >= MAX_PIVOTS {
                return Outcome::IterationLimit;
            }
            let entering = (0..self.reduced.len())
                .find(|&j| allowed[j] && self.reduced[j] < -COST_EPS);
            let Some(col) = entering else {
                return Outcome::Optimal;
            };
            let mut leave: Option<(usize, f64)> = None;
            for i in 0..self.rows.len() {
                let a = self.rows[i][col];
                if a <= PIVOT_EPS {
                    continue;
                }
                let ratio = self.rhs[i].max(0.0) / a;
                leave = match leave {
                    None => Some((i, ratio)),
                    Some((k, best)) => {
                        let tie = (ratio - best).abs() <= 1e-12 * (1.0 + best.abs());
                        if ratio < best && !tie
                            || tie && self.basis[i] < self.basis[k]
                        {
                            Some((i, ratio))
                        } else {
                            Some((k, best))
                        }
                    }
                };
            }
            match leave {
                Some((r, _)) => self.pivot(r, col),
                None => return Outcome::Unbounded,
            }
        }
    }
}

fn failed(status: LpStatus) -> LpSolution {
    LpSolution {
        status,
        value: f64::NAN,
        assignment: Vec::new(),
        max_constraint_residual: f64::NAN,
    }
}

/// Solves `problem`. Malformed input is an error; infeasible and unbounded
/// programs are reported through [`LpSolution::status`].
pub fn lp_solve(problem: &LpProblem) -> Result<LpSolution> {
    problem.validate()?;
    let sf = to_standard_form(problem);
    let m = sf.a.len();
    let n = sf.c.len();

    // Phase one: artificials for rows without a usable slack.
    let mut artificial_of_row = vec![None; m];
    let mut num_art = 0;
    for (i, s) in sf.slack_basis.iter().enumerate() {
        if s.is_none() {
            artificial_of_row[i] = Some(n + num_art);
            num_art += 1;
        }
    }
    let width = n + num_art;
    let mut rows = Vec::with_capacity(m);
    let mut basis = Vec::with_capacity(m);
    for i in 0..m {
        let mut r = sf.a[i].clone();
        r.resize(width, 0.0);
        match artificial_of_row[i] {
            Some(col) => {
                r[col] = 1.0;
                basis.push(col);
            }
            None => basis.push(sf.slack_basis[i].unwrap()),
        }
        rows.push(r);
    }
    let mut tab = Tableau {
        rows,
        rhs: sf.b.clone(),
        basis,
        reduced: Vec::new(),
        obj: 0.0,
        pivots: 0,
    };

    if num_art > 0 {
        let mut cost = vec![0.0; width];
        cost[n..].iter_mut().for_each(|v| *v = 1.0);
        tab.price(&cost);
        let allowed = vec![true; width];
        match tab.run(&allowed) {
            Outcome::Optimal => {}
            Outcome::IterationLimit => return Ok(failed(LpStatus::IterationLimit)),
            Outcome::Unbounded => unreachable!("phase one is bounded below by zero"),
        }
        let scale = 1.0 + sf.b.iter().fold(0.0_f64, |a, v| a.max(v.abs()));
        if -tab.obj > tol::LP_FEASIBILITY * scale {
            return Ok(failed(LpStatus::Infeasible));
        }
        // Pivot remaining (zero-level) artificials out, dropping redundant rows.
        let mut i = 0;
        while i < tab.rows.len() {
            if tab.basis[i] >= n {
                let col = (0..n)
                    .filter(|&j| tab.rows[i][j].abs() > 1e-9)
                    .max_by(|&a, &b| tab.rows[i][a].abs().total_cmp(&tab.rows[i][b].abs()));
                match col {
                    Some(j) => tab.pivot(i, j),
                    None => {
                        tab.rows.remove(i);
                        tab.rhs.remove(i);
                        tab.basis.remove(i);
                        continue;
                    }
                }
            }
            i += 1;
        }
    }

    let mut cost = sf.c.clone();
    cost.resize(width, 0.0);
    tab.price(&cost);
    let mut allowed = vec![true; width];
    allowed[n..].iter_mut().for_each(|v| *v = false);
    match tab.run(&allowed) {
        Outcome::Optimal => {}
        Outcome::Unbounded => return Ok(failed(LpStatus::Unbounded)),
        Outcome::IterationLimit => return Ok(failed(LpStatus::IterationLimit)),
    }

    let y = refine_basic_solution(&sf, &tab).unwrap_or_else(|| {
        let mut y = vec![0.0; n];
        for (i, &bi) in tab.basis.iter().enumerate() {
            if bi < n {
                y[bi] = tab.rhs[i].max(0.0);
            }
        }
        y
    });

    let x: Vec<f64> = sf
        .maps
        .iter()
        .map(|map| match *map {
            VarMap::Shifted { col, offset } => offset + y[col],
            VarMap::Mirrored { col, offset } => offset - y[col],
            VarMap::Free { pos, neg } => y[pos] - y[neg],
        })
        .collect();
    Ok(LpSolution {
        status: LpStatus::Optimal,
        value: problem.evaluate(&x),
        max_constraint_residual: problem.max_residual(&x),
        assignment: x,
    })
}

/// Re-solves `B y_B = b` against the original standard-form rows, removing
/// the rounding accumulated over many pivots. Returns `None` when the basis
/// matrix is numerically singular or yields a worse point.
fn refine_basic_solution(sf: &StandardForm, tab: &Tableau) -> Option<Vec<f64>> {
    let n = sf.c.len();
    let basic: Vec<usize> = tab.basis.iter().copied().filter(|&b| b < n).collect();
    if basic.len() != tab.basis.len() {
        return None;
    }
    let k = basic.len();
    let m = sf.a.len();
    // Least-squares over all original rows (some may have been dropped as
    // redundant), solved through the normal equations.
    let bmat = DMatrix::from_fn(m, k, |i, j| sf.a[i][basic[j]]);
    let rhs = DVector::from_vec(sf.b.clone());
    let normal = bmat.transpose() * &bmat;
    let solved = normal.lu().solve(&(bmat.transpose() * rhs))?;
    let mut y = vec![0.0; n];
    for (j, &col) in basic.iter().enumerate() {
        let v = solved[j];
        if !v.is_finite() || v < -1e-9 {
            return None;
        }
        y[col] = v.max(0.0);
    }
    let residual = sf
        .a
        .iter()
        .zip(&sf.b)
        .map(|(row, b)| (row.iter().zip(&y).map(|(a, v)| a * v).sum::<f64>() - b).abs())
        .fold(0.0, f64::max);
    if residual > 1e-9 {
        return None;
    }
    Some(y)
}
