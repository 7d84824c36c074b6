//! Local deterministic strategies, L1 distance to the local polytope, and L1
//! projection onto the non-signaling polytope.

use clarabel::algebra::CscMatrix;
use clarabel::solver::{
    DefaultSettingsBuilder, DefaultSolver, IPSolver, SolverStatus, SupportedConeT::NonnegativeConeT,
    SupportedConeT::ZeroConeT,
};

use crate::behavior::{l1_distance, signaling_deficit, BehaviorTable, Dims};
use crate::error::{Error, Result};
use crate::simplex::{LinearProgram, Relation, SimplexOptions};

/// Upper limit on the number of enumerated vertices.
pub const MAX_VERTICES: u128 = 1_000_000;

/// Slack on the fixed L1 value in the least-squares tie-break.
pub const TIE_BREAK_SLACK: f64 = 1e-9;

/// Inputs with a smaller signaling deficit are returned unchanged by the projection.
pub const NON_SIGNALING_TOL: f64 = 1e-12;

/// Deterministic strategy pair: `a = alice[x]`, `b = bob[y]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Strategy {
    pub alice: Vec<usize>,
    pub bob: Vec<usize>,
}

#[derive(Clone, Debug)]
pub struct LocalVertexSet {
    dims: Dims,
    strategies: Vec<Strategy>,
    vertices: Vec<BehaviorTable>,
}

impl LocalVertexSet {
    pub fn dims(&self) -> Dims {
        self.dims
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn vertices(&self) -> &[BehaviorTable] {
        &self.vertices
    }

    pub fn strategies(&self) -> &[Strategy] {
        &self.strategies
    }
}

#[derive(Clone, Debug)]
pub struct PolytopeResult {
    /// L1 distance between the input and `nearest`.
    pub distance: f64,
    pub nearest: BehaviorTable,
    /// Convex weights over the local vertices (local polytope only).
    pub weights: Option<Vec<f64>>,
}

fn vertex_count(dims: Dims) -> u128 {
    let alice = (dims.na as u128).checked_pow(dims.nx as u32);
    let bob = (dims.nb as u128).checked_pow(dims.ny as u32);
    match (alice, bob) {
        (Some(a), Some(b)) => a.saturating_mul(b),
        _ => u128::MAX,
    }
}

/// All functions `x -> a` over `n` settings and `k` outcomes, first setting most significant.
fn all_functions(n: usize, k: usize) -> Vec<Vec<usize>> {
    let total = k.pow(n as u32);
    (0..total)
        .map(|mut code| {
            let mut f = vec![0; n];
            for slot in f.iter_mut().rev() {
                *slot = code % k;
                code /= k;
            }
            f
        })
        .collect()
}

/// Every pair of local deterministic strategies, Alice's function varying slowest.
pub fn enumerate_local_vertices(dims: Dims) -> Result<LocalVertexSet> {
    dims.validate()?;
    let count = vertex_count(dims);
    if count > MAX_VERTICES {
        return Err(Error::TooLarge { count, limit: MAX_VERTICES });
    }
    let fs = all_functions(dims.nx, dims.na);
    let gs = all_functions(dims.ny, dims.nb);
    let mut strategies = Vec::with_capacity(count as usize);
    let mut vertices = Vec::with_capacity(count as usize);
    for f in &fs {
        for g in &gs {
            vertices.push(BehaviorTable::deterministic(dims, f, g)?);
            strategies.push(Strategy { alice: f.clone(), bob: g.clone() });
        }
    }
    Ok(LocalVertexSet { dims, strategies, vertices })
}

pub fn distance_to_local_polytope(p: &BehaviorTable) -> Result<PolytopeResult> {
    distance_to_local_polytope_with(p, &SimplexOptions::default())
}

/// `min_w sum |p - sum_k w_k V_k|` over the probability simplex `w`.
///
/// Variables: weights `w`, then positive and negative residual parts `u, v`
/// with `sum_k w_k V_k + u - v = p`.
pub fn distance_to_local_polytope_with(p: &BehaviorTable, opts: &SimplexOptions) -> Result<PolytopeResult> {
    let set = enumerate_local_vertices(p.dims())?;
    let nv = set.len();
    let m = p.dims().len();
    let mut lp = LinearProgram::new(nv + 2 * m);
    for j in nv..nv + 2 * m {
        lp.set_objective(j, 1.0);
    }
    let mut rows: Vec<Vec<(usize, f64)>> = (0..m).map(|i| vec![(nv + i, 1.0), (nv + m + i, -1.0)]).collect();
    for (k, v) in set.vertices().iter().enumerate() {
        for (i, &e) in v.as_slice().iter().enumerate() {
            if e != 0.0 {
                rows[i].push((k, e));
            }
        }
    }
    for (row, &target) in rows.into_iter().zip(p.as_slice()) {
        lp.add_constraint(row, Relation::Eq, target);
    }
    lp.add_constraint((0..nv).map(|k| (k, 1.0)).collect(), Relation::Eq, 1.0);

    let sol = lp.solve(opts).map_err(|e| Error::LpFailure(e.to_string()))?;
    let mut weights: Vec<f64> = sol.x[..nv].iter().map(|w| w.max(0.0)).collect();
    let total: f64 = weights.iter().sum();
    weights.iter_mut().for_each(|w| *w /= total);

    let mut q = vec![0.0; m];
    for (w, v) in weights.iter().zip(set.vertices()) {
        if *w > 0.0 {
            for (acc, e) in q.iter_mut().zip(v.as_slice()) {
                *acc += w * e;
            }
        }
    }
    let nearest = BehaviorTable::from_solver_output(p.dims(), q)?;
    let distance = l1_distance(p, &nearest)?;
    Ok(PolytopeResult { distance, nearest, weights: Some(weights) })
}

pub fn is_local(p: &BehaviorTable, tol: f64) -> Result<bool> {
    if !(tol >= 0.0) {
        return Err(Error::InvalidParameter(format!("tolerance must be >= 0, got {tol}")));
    }
    Ok(distance_to_local_polytope(p)?.distance <= tol)
}

/// Independent equality rows `(coeffs, rhs)` cutting the non-signaling affine hull.
///
/// Per-block normalization, then Alice's marginal under `y > 0` tied to `y = 0`
/// for all but the last outcome, and the same for Bob.
pub fn non_signaling_constraints(dims: Dims) -> Vec<(Vec<(usize, f64)>, f64)> {
    let mut rows = Vec::new();
    for (x, y) in dims.settings() {
        let off = dims.block_offset(x, y);
        rows.push(((off..off + dims.block_len()).map(|i| (i, 1.0)).collect(), 1.0));
    }
    for x in 0..dims.nx {
        for y in 1..dims.ny {
            for a in 0..dims.na - 1 {
                let mut row = Vec::with_capacity(2 * dims.nb);
                for b in 0..dims.nb {
                    row.push((dims.index(x, y, a, b), 1.0));
                    row.push((dims.index(x, 0, a, b), -1.0));
                }
                rows.push((row, 0.0));
            }
        }
    }
    for y in 0..dims.ny {
        for x in 1..dims.nx {
            for b in 0..dims.nb - 1 {
                let mut row = Vec::with_capacity(2 * dims.na);
                for a in 0..dims.na {
                    row.push((dims.index(x, y, a, b), 1.0));
                    row.push((dims.index(0, y, a, b), -1.0));
                }
                rows.push((row, 0.0));
            }
        }
    }
    rows
}

/// L1-closest non-signaling point to an arbitrary target vector.
fn non_signaling_l1(dims: Dims, target: &[f64], opts: &SimplexOptions) -> Result<(f64, Vec<f64>)> {
    let m = dims.len();
    // Variables: q, u, v with q - u + v = target.
    let mut lp = LinearProgram::new(3 * m);
    for j in m..3 * m {
        lp.set_objective(j, 1.0);
    }
    for (i, &t) in target.iter().enumerate() {
        lp.add_constraint(vec![(i, 1.0), (m + i, -1.0), (2 * m + i, 1.0)], Relation::Eq, t);
    }
    for (row, rhs) in non_signaling_constraints(dims) {
        lp.add_constraint(row, Relation::Eq, rhs);
    }
    let sol = lp.solve(opts).map_err(|e| Error::LpFailure(e.to_string()))?;
    Ok((sol.objective, sol.x[..m].to_vec()))
}

fn csc_from_dense(rows: &[Vec<f64>], ncols: usize) -> CscMatrix<f64> {
    let mut colptr = Vec::with_capacity(ncols + 1);
    let mut rowval = Vec::new();
    let mut nzval = Vec::new();
    colptr.push(0);
    for j in 0..ncols {
        for (i, row) in rows.iter().enumerate() {
            if row[j] != 0.0 {
                rowval.push(i);
                nzval.push(row[j]);
            }
        }
        colptr.push(rowval.len());
    }
    CscMatrix::new(rows.len(), ncols, colptr, rowval, nzval)
}

/// Least-squares point among the non-signaling behaviors at L1 distance `l1_bound` from `p`.
fn least_squares_tie_break(p: &BehaviorTable, l1_bound: f64) -> Result<Vec<f64>> {
    let dims = p.dims();
    let m = dims.len();
    let n = 2 * m;
    let target = p.as_slice();

    let mut pdiag = vec![vec![0.0; n]; n];
    for (i, row) in pdiag.iter_mut().enumerate().take(m) {
        row[i] = 1.0;
    }
    let p_mat = csc_from_dense(&pdiag, n);
    let mut lin = vec![0.0; n];
    for (l, t) in lin.iter_mut().zip(target) {
        *l = -t;
    }

    let mut a_rows = Vec::new();
    let mut b = Vec::new();
    let eq = non_signaling_constraints(dims);
    let n_eq = eq.len();
    for (coeffs, rhs) in eq {
        let mut row = vec![0.0; n];
        for (j, v) in coeffs {
            row[j] += v;
        }
        a_rows.push(row);
        b.push(rhs);
    }
    for i in 0..m {
        let mut row = vec![0.0; n];
        row[i] = -1.0;
        a_rows.push(row);
        b.push(0.0);
    }
    for i in 0..m {
        let mut row = vec![0.0; n];
        row[i] = 1.0;
        row[m + i] = -1.0;
        a_rows.push(row);
        b.push(target[i]);

        let mut row = vec![0.0; n];
        row[i] = -1.0;
        row[m + i] = -1.0;
        a_rows.push(row);
        b.push(-target[i]);
    }
    let mut row = vec![0.0; n];
    row[m..].iter_mut().for_each(|v| *v = 1.0);
    a_rows.push(row);
    b.push(l1_bound + TIE_BREAK_SLACK);

    let n_ineq = a_rows.len() - n_eq;
    let a_mat = csc_from_dense(&a_rows, n);
    let cones = [ZeroConeT(n_eq), NonnegativeConeT(n_ineq)];
    let settings = DefaultSettingsBuilder::default()
        .verbose(false)
        .tol_gap_abs(1e-12)
        .tol_gap_rel(1e-12)
        .tol_feas(1e-12)
        .max_iter(200)
        .build()
        .map_err(|e| Error::QpFailure(format!("{e:?}")))?;
    let mut solver = DefaultSolver::new(&p_mat, &lin, &a_mat, &b, &cones, settings)
        .map_err(|e| Error::QpFailure(format!("{e:?}")))?;
    solver.solve();
    match solver.solution.status {
        SolverStatus::Solved | SolverStatus::AlmostSolved => Ok(solver.solution.x[..m].to_vec()),
        status => Err(Error::QpFailure(format!("{status:?}"))),
    }
}

pub fn project_nonsignaling(p: &BehaviorTable) -> Result<PolytopeResult> {
    project_nonsignaling_with(p, &SimplexOptions::default())
}

/// L1 projection onto the non-signaling polytope with a least-squares tie-break.
///
/// Stage one finds the L1 distance `L` by linear programming. Stage two picks,
/// among non-signaling points within `L + TIE_BREAK_SLACK`, the one closest in
/// Euclidean norm. Its output is snapped back onto the polytope by a final L1
/// solve so the returned behavior is non-signaling to simplex precision.
pub fn project_nonsignaling_with(p: &BehaviorTable, opts: &SimplexOptions) -> Result<PolytopeResult> {
    let dims = p.dims();
    if signaling_deficit(p) <= NON_SIGNALING_TOL {
        return Ok(PolytopeResult { distance: 0.0, nearest: p.clone(), weights: None });
    }
    let (l1, vertex_point) = non_signaling_l1(dims, p.as_slice(), opts)?;
    let q = match least_squares_tie_break(p, l1) {
        Ok(qp) => non_signaling_l1(dims, &qp, opts)?.1,
        Err(e) => {
            log::warn!("least-squares tie-break failed ({e}); returning the simplex L1 minimizer");
            vertex_point
        }
    };
    let nearest = BehaviorTable::from_solver_output(dims, q)?;
    let distance = l1_distance(p, &nearest)?;
    Ok(PolytopeResult { distance, nearest, weights: None })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn vertex_counts_and_order() {
        let set = enumerate_local_vertices(Dims::chsh()).unwrap();
        assert_eq!(set.len(), 16);
        let first = &set.vertices()[0];
        for (x, y) in Dims::chsh().settings() {
            assert_eq!(first.get(x, y, 0, 0), 1.0);
        }
        assert_eq!(set.strategies()[1], Strategy { alice: vec![0, 0], bob: vec![0, 1] });
        assert_eq!(enumerate_local_vertices(Dims::cglmp()).unwrap().len(), 81);
    }

    #[test]
    fn vertices_factorize() {
        let dims = Dims::new(2, 3, 2, 3).unwrap();
        let set = enumerate_local_vertices(dims).unwrap();
        assert_eq!(set.len(), 4 * 27);
        for (s, v) in set.strategies().iter().zip(set.vertices()) {
            for (x, y) in dims.settings() {
                for a in 0..dims.na {
                    for b in 0..dims.nb {
                        let expected = f64::from(u8::from(s.alice[x] == a && s.bob[y] == b));
                        assert_eq!(v.get(x, y, a, b), expected);
                    }
                }
            }
        }
    }

    #[test]
    fn enumeration_guard() {
        let dims = Dims::new(10, 10, 4, 4).unwrap();
        assert!(matches!(enumerate_local_vertices(dims), Err(Error::TooLarge { .. })));
    }

    #[test]
    fn pr_box_distance() {
        let r = distance_to_local_polytope(&BehaviorTable::pr_box()).unwrap();
        assert!((r.distance - 2.0).abs() < 1e-9);
        let w = r.weights.unwrap();
        assert!(w.iter().all(|&v| v >= 0.0));
        assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn local_points_have_zero_distance() {
        let u = BehaviorTable::uniform(Dims::chsh()).unwrap();
        assert!(distance_to_local_polytope(&u).unwrap().distance < 1e-9);
        assert!(is_local(&u, 1e-9).unwrap());
        let half = BehaviorTable::pr_box().mix(&u, 0.5).unwrap();
        assert!(distance_to_local_polytope(&half).unwrap().distance < 1e-9);
        assert!(is_local(&u, -1.0).is_err());
    }

    #[test]
    fn projection_of_shifted_marginal() {
        let d = Dims::new(1, 2, 2, 2).unwrap();
        let alice = [[0.6, 0.4], [0.5, 0.5]];
        let p = BehaviorTable::from_fn(d, |_, y, a, _| alice[y][a] * 0.5).unwrap();
        let r = project_nonsignaling(&p).unwrap();
        assert!((r.distance - 0.2).abs() < 1e-9);
        for y in 0..2 {
            let m = r.nearest.alice_marginal(0, y);
            assert!((m[0] - 0.55).abs() < 1e-7, "{m:?}");
        }
        assert!(signaling_deficit(&r.nearest) <= 1e-9);
    }

    #[test]
    fn projection_fixes_non_signaling_input() {
        let u = BehaviorTable::uniform(Dims::cglmp()).unwrap();
        let r = project_nonsignaling(&u).unwrap();
        assert_eq!(r.distance, 0.0);
        assert_eq!(r.nearest, u);
    }

    #[test]
    fn constraint_rank_matches_non_signaling_dimension() {
        // dim NS = (nx(na-1)+1)(ny(nb-1)+1) - 1
        for dims in [Dims::chsh(), Dims::cglmp(), Dims::new(1, 2, 2, 3).unwrap()] {
            let rows = non_signaling_constraints(dims);
            let ns_dim = (dims.nx * (dims.na - 1) + 1) * (dims.ny * (dims.nb - 1) + 1) - 1;
            assert_eq!(rows.len(), dims.len() - ns_dim);
        }
    }
}
