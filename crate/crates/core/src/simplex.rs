//! Dense two-phase simplex for the small linear programs used by the polytope
//! and capacity modules.
//!
//! Problems are brought to standard form `min c'x, A x = b, x >= 0, b >= 0`.
//! Phase one minimizes the sum of artificial variables; redundant equality
//! rows are detected and dropped when an artificial cannot be pivoted out.
//! A [`FeasibleTableau`] keeps its basis between objectives, so repeated
//! solves over the same polytope start from the previous optimum.

use thiserror::Error;

/// Primal feasibility tolerance.
pub const FEASIBILITY_TOL: f64 = 1e-9;
/// Smallest admissible pivot magnitude.
const PIVOT_TOL: f64 = 1e-11;
/// Reduced costs above `-OPTIMALITY_TOL` count as non-negative.
const OPTIMALITY_TOL: f64 = 1e-11;
/// Consecutive degenerate pivots before switching to Bland's rule.
const DEGENERATE_LIMIT: usize = 50;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LpError {
    #[error("infeasible (phase-one residual {0:.3e})")]
    Infeasible(f64),
    #[error("unbounded objective")]
    Unbounded,
    #[error("pivot limit of {0} reached")]
    IterationLimit(usize),
    #[error("malformed problem: {0}")]
    Malformed(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Relation {
    Le,
    Eq,
    Ge,
}

#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct SimplexOptions {
    pub feasibility_tol: f64,
    pub max_pivots: usize,
}

impl Default for SimplexOptions {
    fn default() -> Self {
        SimplexOptions {
            feasibility_tol: FEASIBILITY_TOL,
            max_pivots: 50_000,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct LpSolution {
    pub x: Vec<f64>,
    pub objective: f64,
}

#[derive(Clone, Debug)]
struct Row {
    coeffs: Vec<(usize, f64)>,
    relation: Relation,
    rhs: f64,
}

/// `min objective'x` subject to sparse linear rows and `x >= 0`.
#[derive(Clone, Debug)]
pub struct LinearProgram {
    n_vars: usize,
    objective: Vec<f64>,
    rows: Vec<Row>,
}

impl LinearProgram {
    pub fn new(n_vars: usize) -> Self {
        LinearProgram {
            n_vars,
            objective: vec![0.0; n_vars],
            rows: Vec::new(),
        }
    }

    pub fn n_vars(&self) -> usize {
        self.n_vars
    }

    pub fn n_constraints(&self) -> usize {
        self.rows.len()
    }

    pub fn set_objective(&mut self, var: usize, cost: f64) {
        self.objective[var] = cost;
    }

    pub fn add_constraint(&mut self, coeffs: Vec<(usize, f64)>, relation: Relation, rhs: f64) {
        self.rows.push(Row { coeffs, relation, rhs });
    }

    /// Dense standard form: structural columns first, then one slack per inequality.
    fn standard_form(&self) -> Result<(Vec<Vec<f64>>, Vec<f64>, usize), LpError> {
        let n_slack = self.rows.iter().filter(|r| r.relation != Relation::Eq).count();
        let n = self.n_vars + n_slack;
        let mut a = Vec::with_capacity(self.rows.len());
        let mut b = Vec::with_capacity(self.rows.len());
        let mut slack = self.n_vars;
        for (i, row) in self.rows.iter().enumerate() {
            if !row.rhs.is_finite() {
                return Err(LpError::Malformed(format!("row {i} has non-finite rhs")));
            }
            let mut dense = vec![0.0; n];
            for &(j, v) in &row.coeffs {
                if j >= self.n_vars || !v.is_finite() {
                    return Err(LpError::Malformed(format!("row {i} references bad column {j}")));
                }
                dense[j] += v;
            }
            match row.relation {
                Relation::Le => {
                    dense[slack] = 1.0;
                    slack += 1;
                }
                Relation::Ge => {
                    dense[slack] = -1.0;
                    slack += 1;
                }
                Relation::Eq => {}
            }
            a.push(dense);
            b.push(row.rhs);
        }
        Ok((a, b, n))
    }

    pub fn solve(&self, opts: &SimplexOptions) -> Result<LpSolution, LpError> {
        let (a, b, n) = self.standard_form()?;
        let mut tab = FeasibleTableau::new(a, b, n, opts)?;
        let mut cost = self.objective.clone();
        cost.resize(n, 0.0);
        let mut sol = tab.minimize(&cost)?;
        sol.x.truncate(self.n_vars);
        Ok(sol)
    }
}

/// Tableau `B^-1 [A | b]` over a feasible basis of `{A x = b, x >= 0}`.
#[derive(Clone, Debug)]
pub struct FeasibleTableau {
    /// `rows x (n + 1)`, last column is the basic solution.
    t: Vec<Vec<f64>>,
    basis: Vec<usize>,
    n: usize,
    opts: SimplexOptions,
}

impl FeasibleTableau {
    /// Runs phase one on `A x = b` with `n` columns.
    pub fn new(mut a: Vec<Vec<f64>>, mut b: Vec<f64>, n: usize, opts: &SimplexOptions) -> Result<Self, LpError> {
        let m = a.len();
        if b.len() != m || a.iter().any(|r| r.len() != n) {
            return Err(LpError::Malformed("inconsistent constraint shapes".into()));
        }
        for (row, rhs) in a.iter_mut().zip(b.iter_mut()) {
            if *rhs < 0.0 {
                row.iter_mut().for_each(|v| *v = -*v);
                *rhs = -*rhs;
            }
        }
        // Columns n..n+m are artificials.
        let width = n + m + 1;
        let mut t: Vec<Vec<f64>> = a
            .into_iter()
            .zip(&b)
            .enumerate()
            .map(|(i, (mut row, &rhs))| {
                row.resize(width, 0.0);
                row[n + i] = 1.0;
                row[width - 1] = rhs;
                row
            })
            .collect();
        let mut basis: Vec<usize> = (n..n + m).collect();

        let mut cost = vec![0.0; n + m];
        cost[n..].iter_mut().for_each(|c| *c = 1.0);
        let residual = run_phase(&mut t, &mut basis, &cost, n + m, opts)?;
        if residual > opts.feasibility_tol {
            return Err(LpError::Infeasible(residual));
        }

        // Pivot remaining artificials out, or drop their rows as redundant.
        let mut i = 0;
        while i < t.len() {
            if basis[i] >= n {
                let col = (0..n)
                    .filter(|&j| t[i][j].abs() > PIVOT_TOL)
                    .max_by(|&p, &q| t[i][p].abs().total_cmp(&t[i][q].abs()));
                match col {
                    Some(j) => {
                        pivot(&mut t, &mut basis, i, j);
                        i += 1;
                    }
                    None => {
                        t.remove(i);
                        basis.remove(i);
                    }
                }
            } else {
                i += 1;
            }
        }
        for row in t.iter_mut() {
            let rhs = row[width - 1];
            row.truncate(n);
            row.push(rhs);
        }
        Ok(FeasibleTableau { t, basis, n, opts: *opts })
    }

    pub fn n_cols(&self) -> usize {
        self.n
    }

    /// Rank of the equality system after redundant rows were removed.
    pub fn rank(&self) -> usize {
        self.basis.len()
    }

    pub fn current_point(&self) -> Vec<f64> {
        let mut x = vec![0.0; self.n];
        for (row, &j) in self.t.iter().zip(&self.basis) {
            x[j] = row[self.n].max(0.0);
        }
        x
    }

    /// Minimizes `cost'x`, starting from the current basis.
    pub fn minimize(&mut self, cost: &[f64]) -> Result<LpSolution, LpError> {
        if cost.len() != self.n {
            return Err(LpError::Malformed(format!("cost has {} entries, expected {}", cost.len(), self.n)));
        }
        run_phase(&mut self.t, &mut self.basis, cost, self.n, &self.opts)?;
        let x = self.current_point();
        let objective = x.iter().zip(cost).map(|(x, c)| x * c).sum();
        Ok(LpSolution { x, objective })
    }
}

fn pivot(t: &mut [Vec<f64>], basis: &mut [usize], r: usize, c: usize) {
    let width = t[r].len();
    let inv = 1.0 / t[r][c];
    t[r].iter_mut().for_each(|v| *v *= inv);
    t[r][c] = 1.0;
    let pivot_row = t[r].clone();
    for (i, row) in t.iter_mut().enumerate() {
        if i == r {
            continue;
        }
        let f = row[c];
        if f != 0.0 {
            for k in 0..width {
                row[k] -= f * pivot_row[k];
            }
            row[c] = 0.0;
        }
    }
    let rhs = width - 1;
    for row in t.iter_mut() {
        if row[rhs] < 0.0 && row[rhs] > -1e-13 {
            row[rhs] = 0.0;
        }
    }
    basis[r] = c;
}

/// Simplex iterations over the first `n_cols` columns; returns the objective.
fn run_phase(
    t: &mut [Vec<f64>],
    basis: &mut [usize],
    cost: &[f64],
    n_cols: usize,
    opts: &SimplexOptions,
) -> Result<f64, LpError> {
    let m = t.len();
    if m == 0 {
        return Ok(0.0);
    }
    let rhs = t[0].len() - 1;
    let mut degenerate = 0usize;
    for _ in 0..opts.max_pivots {
        // Reduced costs d_j = c_j - c_B' B^-1 A_j.
        let mut entering = None;
        let mut best = -OPTIMALITY_TOL;
        let bland = degenerate >= DEGENERATE_LIMIT;
        for j in 0..n_cols {
            let mut d = cost[j];
            for (row, &bj) in t.iter().zip(basis.iter()) {
                let cb = cost[bj];
                if cb != 0.0 {
                    d -= cb * row[j];
                }
            }
            if bland {
                if d < -OPTIMALITY_TOL {
                    entering = Some(j);
                    break;
                }
            } else if d < best {
                best = d;
                entering = Some(j);
            }
        }
        let Some(c) = entering else {
            return Ok((0..m).map(|i| cost[basis[i]] * t[i][rhs]).sum());
        };

        let mut leave: Option<(usize, f64)> = None;
        for i in 0..m {
            let a = t[i][c];
            if a > PIVOT_TOL {
                let ratio = t[i][rhs].max(0.0) / a;
                leave = match leave {
                    None => Some((i, ratio)),
                    Some((k, r)) => {
                        if ratio < r - 1e-14 || (ratio <= r + 1e-14 && basis[i] < basis[k]) {
                            Some((i, ratio))
                        } else {
                            Some((k, r))
                        }
                    }
                };
            }
        }
        let Some((r, ratio)) = leave else {
            return Err(LpError::Unbounded);
        };
        if ratio <= 1e-14 {
            degenerate += 1;
        } else {
            degenerate = 0;
        }
        pivot(t, basis, r, c);
    }
    Err(LpError::IterationLimit(opts.max_pivots))
}
