//! Asymptotic non-local capacity.
//!
//! For a non-signaling behavior `P(ab|xy)` with Bob settings `y = 0..M`, the
//! set `V` holds the conditional distributions `rho(a, b_0..b_{M-1} | x)` whose
//! `(a, b_m)` marginal equals `P(a b | x, y = m)` for every `m`. The asymptotic
//! non-local capacity is the minimum over `V` of the Shannon capacity of the
//! channel `x -> (b_0..b_{M-1})`.
//!
//! The outer minimization is an away-step Frank-Wolfe method whose linear
//! oracle is the simplex over `V`. The capacity is evaluated by Blahut-Arimoto,
//! and its gradient with respect to the channel is `pi(x) log2(W(b|x) / q(b))`
//! at the capacity-achieving input `pi`.

use serde::{Deserialize, Serialize};

use crate::behavior::{signaling_deficit, BehaviorTable, Dims};
use crate::error::{Error, Result};
use crate::simplex::{FeasibleTableau, LpError, SimplexOptions};

/// Largest signaling deficit accepted by [`build_v_polytope`].
pub const MAX_SIGNALING: f64 = 1e-6;
/// Floor on probabilities inside logarithms of the gradient.
pub const LOG_FLOOR: f64 = 1e-12;
/// Tolerance on the marginal constraints of `V`.
pub const V_CONSTRAINT_TOL: f64 = 1e-8;

const ROW_SUM_TOL: f64 = 1e-9;

// ---------------------------------------------------------------------------
// Blahut-Arimoto
// ---------------------------------------------------------------------------

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChannelCapacity {
    /// Midpoint of the certified bounds, in bits.
    pub capacity: f64,
    pub lower: f64,
    pub upper: f64,
    pub input: Vec<f64>,
    pub iterations: usize,
}

/// Capacity of the channel with rows `channel[x][k] = W(k|x)`, to within `tol` bits.
pub fn channel_capacity(channel: &[Vec<f64>], tol: f64) -> Result<ChannelCapacity> {
    let n = channel.len();
    if n == 0 {
        return Err(Error::EmptyInput("channel has no inputs".into()));
    }
    blahut_arimoto(channel, tol, &vec![1.0 / n as f64; n], 1_000_000)
}

fn validate_channel(channel: &[Vec<f64>]) -> Result<usize> {
    let k = channel[0].len();
    for (x, row) in channel.iter().enumerate() {
        if row.len() != k {
            return Err(Error::InvalidParameter(format!("channel row {x} has {} outputs, expected {k}", row.len())));
        }
        if row.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::InvalidParameter(format!("channel row {x} has a negative entry")));
        }
        let s: f64 = row.iter().sum();
        if (s - 1.0).abs() > ROW_SUM_TOL {
            return Err(Error::InvalidParameter(format!("channel row {x} sums to {s}")));
        }
    }
    Ok(k)
}

/// `D(W_x || q)` in bits for every input.
fn divergences(channel: &[Vec<f64>], q: &[f64]) -> Vec<f64> {
    channel
        .iter()
        .map(|row| {
            row.iter()
                .zip(q)
                .filter(|(w, _)| **w > 0.0)
                .map(|(w, q)| w * (w / q).log2())
                .sum()
        })
        .collect()
}

fn output_distribution(channel: &[Vec<f64>], input: &[f64]) -> Vec<f64> {
    let mut q = vec![0.0; channel[0].len()];
    for (row, &pi) in channel.iter().zip(input) {
        if pi > 0.0 {
            for (acc, w) in q.iter_mut().zip(row) {
                *acc += pi * w;
            }
        }
    }
    q
}

fn blahut_arimoto(channel: &[Vec<f64>], tol: f64, start: &[f64], max_iter: usize) -> Result<ChannelCapacity> {
    if !(tol > 0.0) {
        return Err(Error::InvalidParameter(format!("tolerance must be positive, got {tol}")));
    }
    validate_channel(channel)?;
    let mut input = start.to_vec();
    let (mut lower, mut upper) = (0.0, f64::INFINITY);
    for it in 0..max_iter {
        let q = output_distribution(channel, &input);
        let d = divergences(channel, &q);
        let z: f64 = input.iter().zip(&d).map(|(p, d)| p * d.exp2()).sum();
        lower = z.log2();
        upper = d.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        if upper - lower <= tol {
            return Ok(ChannelCapacity {
                capacity: 0.5 * (lower + upper).max(0.0),
                lower: lower.max(0.0),
                upper: upper.max(0.0),
                input,
                iterations: it + 1,
            });
        }
        for (p, d) in input.iter_mut().zip(&d) {
            *p *= d.exp2() / z;
        }
    }
    Err(Error::ChannelNonConvergence { iterations: max_iter, lower, upper })
}

// ---------------------------------------------------------------------------
// The constraint set V
// ---------------------------------------------------------------------------

/// `rho(a, b_0..b_{M-1} | x)`, stored by `(x, a, code)` where `code` spells
/// `b_0..b_{M-1}` in base `nb` with `b_0` most significant.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExtendedDistribution {
    pub dims: Dims,
    pub rho: Vec<f64>,
}

impl ExtendedDistribution {
    pub fn n_codes(dims: Dims) -> usize {
        dims.nb.pow(dims.ny as u32)
    }

    /// Bob's outcome for setting `m` inside `code`.
    pub fn digit(dims: Dims, code: usize, m: usize) -> usize {
        (code / dims.nb.pow((dims.ny - 1 - m) as u32)) % dims.nb
    }

    pub fn get(&self, x: usize, a: usize, code: usize) -> f64 {
        self.rho[(x * self.dims.na + a) * Self::n_codes(self.dims) + code]
    }

    /// Channel `W(code | x) = sum_a rho(a, code | x)`.
    pub fn channel(&self) -> Vec<Vec<f64>> {
        channel_of(self.dims, &self.rho)
    }

    /// Largest violation of the `V` marginal constraints for `p`.
    pub fn constraint_residual(&self, p: &BehaviorTable) -> f64 {
        let d = self.dims;
        let k = Self::n_codes(d);
        let mut worst: f64 = 0.0;
        for x in 0..d.nx {
            for m in 0..d.ny {
                for a in 0..d.na {
                    let mut sums = vec![0.0; d.nb];
                    for code in 0..k {
                        sums[Self::digit(d, code, m)] += self.get(x, a, code);
                    }
                    for (b, s) in sums.iter().enumerate() {
                        worst = worst.max((s - p.get(x, m, a, b)).abs());
                    }
                }
            }
        }
        worst
    }
}

fn channel_of(dims: Dims, rho: &[f64]) -> Vec<Vec<f64>> {
    let k = ExtendedDistribution::n_codes(dims);
    (0..dims.nx)
        .map(|x| {
            let mut row = vec![0.0; k];
            for a in 0..dims.na {
                let off = (x * dims.na + a) * k;
                for (acc, v) in row.iter_mut().zip(&rho[off..off + k]) {
                    *acc += v.max(0.0);
                }
            }
            let s: f64 = row.iter().sum();
            row.iter_mut().for_each(|v| *v /= s);
            row
        })
        .collect()
}

/// Linear description of `V`: one independent block of equalities per Alice setting.
#[derive(Clone, Debug)]
pub struct VPolytope {
    dims: Dims,
    /// Per `x`: rows over the `na * nb^M` variables `rho(a, code | x)`.
    rows: Vec<Vec<Vec<f64>>>,
    rhs: Vec<Vec<f64>>,
    tableaux: Vec<FeasibleTableau>,
}

impl VPolytope {
    pub fn dims(&self) -> Dims {
        self.dims
    }

    pub fn n_vars(&self) -> usize {
        self.dims.nx * self.vars_per_input()
    }

    pub fn n_rows(&self) -> usize {
        self.rows.iter().map(Vec::len).sum()
    }

    fn vars_per_input(&self) -> usize {
        self.dims.na * ExtendedDistribution::n_codes(self.dims)
    }

    /// Equality rows and right-hand sides for Alice setting `x`.
    pub fn equalities(&self, x: usize) -> (&[Vec<f64>], &[f64]) {
        (&self.rows[x], &self.rhs[x])
    }

    /// Minimizer of `<cost, rho>` over `V`, solved independently per `x`.
    fn linear_oracle(&mut self, cost: &[f64]) -> Result<Vec<f64>> {
        let n = self.vars_per_input();
        let mut out = Vec::with_capacity(self.n_vars());
        for (x, tab) in self.tableaux.iter_mut().enumerate() {
            let sol = tab
                .minimize(&cost[x * n..(x + 1) * n])
                .map_err(|e| Error::LpFailure(e.to_string()))?;
            out.extend(sol.x);
        }
        Ok(out)
    }

    fn some_vertex(&self) -> Vec<f64> {
        self.tableaux.iter().flat_map(|t| t.current_point()).collect()
    }
}

/// Builds the equality constraints of `V` and checks that it is non-empty.
pub fn build_v_polytope(p: &BehaviorTable) -> Result<VPolytope> {
    let deficit = signaling_deficit(p);
    if deficit > MAX_SIGNALING {
        return Err(Error::SignalingInput { deficit });
    }
    let d = p.dims();
    let k = ExtendedDistribution::n_codes(d);
    let n = d.na * k;
    let mut rows = Vec::with_capacity(d.nx);
    let mut rhs = Vec::with_capacity(d.nx);
    let mut tableaux = Vec::with_capacity(d.nx);
    let opts = SimplexOptions::default();
    for x in 0..d.nx {
        let mut a_rows = Vec::with_capacity(d.ny * d.na * d.nb);
        let mut b = Vec::with_capacity(d.ny * d.na * d.nb);
        for m in 0..d.ny {
            for a in 0..d.na {
                for bm in 0..d.nb {
                    let mut row = vec![0.0; n];
                    for code in 0..k {
                        if ExtendedDistribution::digit(d, code, m) == bm {
                            row[a * k + code] = 1.0;
                        }
                    }
                    a_rows.push(row);
                    b.push(p.get(x, m, a, bm));
                }
            }
        }
        let tab = match FeasibleTableau::new(a_rows.clone(), b.clone(), n, &opts) {
            Ok(t) => t,
            Err(LpError::Infeasible(_)) => return Err(Error::InfeasibleV),
            Err(e) => return Err(Error::LpFailure(e.to_string())),
        };
        rows.push(a_rows);
        rhs.push(b);
        tableaux.push(tab);
    }
    Ok(VPolytope { dims: d, rows, rhs, tableaux })
}

/// `rho(a, b|x) = P(a|x) prod_m P(b_m | a, x, y=m)`: Bob's outcomes are
/// conditionally independent given `(x, a)`. Lies in `V` whenever `p` is
/// non-signaling on Alice's side.
pub fn conditional_independence_point(p: &BehaviorTable) -> ExtendedDistribution {
    let d = p.dims();
    let k = ExtendedDistribution::n_codes(d);
    let mut rho = vec![0.0; d.nx * d.na * k];
    for x in 0..d.nx {
        let marginals: Vec<Vec<f64>> = (0..d.ny).map(|m| p.alice_marginal(x, m)).collect();
        for a in 0..d.na {
            let pa = marginals.iter().map(|mm| mm[a]).sum::<f64>() / d.ny as f64;
            if pa <= 0.0 {
                continue;
            }
            for code in 0..k {
                let mut v = pa;
                for (m, mm) in marginals.iter().enumerate() {
                    let b = ExtendedDistribution::digit(d, code, m);
                    v *= if mm[a] > 0.0 { p.get(x, m, a, b) / mm[a] } else { 0.0 };
                }
                rho[(x * d.na + a) * k + code] = v;
            }
        }
    }
    ExtendedDistribution { dims: d, rho }
}

// ---------------------------------------------------------------------------
// Frank-Wolfe
// ---------------------------------------------------------------------------

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CapacityCertificate {
    /// Non-local capacity estimate in bits.
    pub value: f64,
    pub rho: ExtendedDistribution,
    /// Capacity-achieving input distribution over Alice's settings.
    pub input_dist: Vec<f64>,
    /// Upper bound on `value - optimum`.
    pub gap: f64,
    pub iterations: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CapacityOptions {
    pub tol: f64,
    pub max_iterations: usize,
    /// Bisection steps of the exact line search.
    pub line_search_steps: usize,
}

impl CapacityOptions {
    pub fn with_tol(tol: f64) -> Self {
        CapacityOptions { tol, ..Default::default() }
    }
}

impl Default for CapacityOptions {
    fn default() -> Self {
        CapacityOptions {
            tol: 1e-6,
            max_iterations: 20_000,
            line_search_steps: 40,
        }
    }
}

struct Evaluation {
    cap: ChannelCapacity,
    /// `pi`-weighted mutual information at the current input, a lower bound on the capacity.
    mutual_information: f64,
    grad: Vec<f64>,
}

struct Evaluator {
    dims: Dims,
    inner_tol: f64,
    warm: Vec<f64>,
}

impl Evaluator {
    fn eval(&mut self, rho: &[f64]) -> Result<Evaluation> {
        let d = self.dims;
        let channel = channel_of(d, rho);
        let cap = blahut_arimoto(&channel, self.inner_tol, &self.warm, 1_000_000)?;
        // Keep the warm start strictly inside the simplex.
        self.warm = cap.input.iter().map(|p| p.max(1e-9)).collect();
        let s: f64 = self.warm.iter().sum();
        self.warm.iter_mut().for_each(|p| *p /= s);

        let q = output_distribution(&channel, &cap.input);
        let div = divergences(&channel, &q);
        let mutual_information = cap.input.iter().zip(&div).map(|(p, d)| p * d).sum();
        let k = q.len();
        let mut grad = vec![0.0; rho.len()];
        for x in 0..d.nx {
            let pi = cap.input[x];
            let g_row: Vec<f64> = channel[x]
                .iter()
                .zip(&q)
                .map(|(&w, &q)| pi * log_ratio(w, q))
                .collect();
            for a in 0..d.na {
                let off = (x * d.na + a) * k;
                grad[off..off + k].copy_from_slice(&g_row);
            }
        }
        Ok(Evaluation { cap, mutual_information, grad })
    }
}

/// `log2(w / q)` for the gradient. With `w > 0` the ratio is exact and at most
/// `1 / pi(x)`; an empty output gets 0, a valid subgradient by the log-sum
/// inequality; an unused entry of a live output gets the floor.
fn log_ratio(w: f64, q: f64) -> f64 {
    if w > 0.0 && q > 0.0 {
        (w / q).log2()
    } else if q > 0.0 {
        LOG_FLOOR.log2()
    } else {
        0.0
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(a, b)| a * b).sum()
}

fn axpy(rho: &[f64], step: f64, dir: &[f64]) -> Vec<f64> {
    rho.iter().zip(dir).map(|(r, d)| (r + step * d).max(0.0)).collect()
}

/// Step in `[0, max_step]` minimizing a convex function along a direction,
/// found by Illinois regula falsi on its derivative `slope`. `slope0 < 0` is
/// the derivative at zero. The returned step always has a non-positive slope.
fn line_search<E>(
    ev: &mut E,
    mut slope: impl FnMut(&mut E, f64) -> Result<f64>,
    slope0: f64,
    max_step: f64,
    max_evals: usize,
) -> Result<f64> {
    if !(slope0 < 0.0) || max_step <= 0.0 {
        return Ok(0.0);
    }
    let s_max = slope(ev, max_step)?;
    if s_max <= 0.0 {
        return Ok(max_step);
    }
    let (mut lo, mut f_lo, mut hi, mut f_hi) = (0.0, slope0, max_step, s_max);
    let mut side = 0i8;
    for _ in 0..max_evals {
        let t = (lo * f_hi - hi * f_lo) / (f_hi - f_lo);
        if !(t > lo && t < hi) || hi - lo <= 1e-14 * max_step {
            break;
        }
        let f = slope(ev, t)?;
        if f <= 0.0 {
            lo = t;
            f_lo = f;
            if side == -1 {
                f_hi *= 0.5;
            }
            side = -1;
            if f >= 1e-3 * slope0 {
                break;
            }
        } else {
            hi = t;
            f_hi = f;
            if side == 1 {
                f_lo *= 0.5;
            }
            side = 1;
        }
    }
    Ok(lo)
}

pub fn nonlocal_capacity_asym(p: &BehaviorTable, tol: f64) -> Result<CapacityCertificate> {
    nonlocal_capacity_asym_with(p, &CapacityOptions::with_tol(tol))
}

/// Minimizes the channel capacity over `V` by away-step Frank-Wolfe.
///
/// The search runs over `V` shrunk by a factor `1 - delta` toward the
/// conditional-independence point, with `delta` small enough that the
/// shrinkage costs at most half the tolerance. The certificate gap bounds
/// `value - optimum` over all of `V`: Frank-Wolfe duality gap, Blahut-Arimoto
/// bound gap, and the shrinkage term. If the gap does not fall below `opts.tol`
/// within `opts.max_iterations`, the certificate is returned inside
/// [`Error::CapacityNonConvergence`].
pub fn nonlocal_capacity_asym_with(p: &BehaviorTable, opts: &CapacityOptions) -> Result<CapacityCertificate> {
    if !(opts.tol > 0.0) {
        return Err(Error::InvalidParameter(format!("tolerance must be positive, got {}", opts.tol)));
    }
    let mut v = build_v_polytope(p)?;
    let d = p.dims();

    let start = conditional_independence_point(p);
    let interior = start.constraint_residual(p) <= V_CONSTRAINT_TOL;
    let rho0 = if interior { start.rho } else { v.some_vertex() };
    let mut ev = Evaluator {
        dims: d,
        inner_tol: opts.tol / 10.0,
        warm: vec![1.0 / d.nx as f64; d.nx],
    };
    let mut current = ev.eval(&rho0)?;

    // Iterates live in (1 - delta) V + delta rho0. With the full-support start
    // this keeps every reachable output alive, where the capacity is smooth.
    let start_upper = current.cap.upper;
    let delta = match (interior, start_upper > 0.0) {
        (false, _) => 0.0,
        (true, false) => 0.5,
        (true, true) => (0.5 * opts.tol / start_upper).min(0.5),
    };
    let shrink = |s: Vec<f64>| -> Vec<f64> { s.iter().zip(&rho0).map(|(s, c)| (1.0 - delta) * s + delta * c).collect() };

    let mut atoms: Vec<Vec<f64>> = vec![rho0.clone()];
    let mut weights: Vec<f64> = vec![1.0];
    let mut rho = rho0.clone();
    let mut gap = f64::INFINITY;
    let mut iterations = 0;
    for it in 0..opts.max_iterations {
        iterations = it;
        let s = shrink(v.linear_oracle(&current.grad)?);
        let fw_dir: Vec<f64> = s.iter().zip(&rho).map(|(s, r)| s - r).collect();
        let fw_gap = -dot(&current.grad, &fw_dir);
        // The optimum over the shrunk set exceeds the true one by at most
        // delta * (f(rho0) - optimum), by convexity.
        gap = (fw_gap.max(0.0)
            + (current.cap.upper - current.mutual_information).max(0.0)
            + delta * (start_upper - current.mutual_information).max(0.0))
            / (1.0 - delta);
        if gap <= opts.tol {
            break;
        }

        let s_idx = match atoms.iter().position(|a| a.iter().zip(&s).all(|(x, y)| (x - y).abs() < 1e-12)) {
            Some(i) => i,
            None => {
                atoms.push(s);
                weights.push(0.0);
                atoms.len() - 1
            }
        };
        let away_idx = atoms
            .iter()
            .enumerate()
            .filter(|(i, _)| *i != s_idx && weights[*i] > 0.0)
            .map(|(i, a)| (i, dot(&current.grad, a)))
            .max_by(|a, b| a.1.total_cmp(&b.1))
            .map(|(i, _)| i);

        // Pairwise step: shift weight from the worst active atom to the oracle vertex.
        // With a single active atom this is the plain Frank-Wolfe step.
        let (dir, max_step) = match away_idx {
            Some(k) => (atoms[s_idx].iter().zip(&atoms[k]).map(|(s, a)| s - a).collect::<Vec<f64>>(), weights[k]),
            None => (fw_dir, 1.0),
        };
        let slope_at = |ev: &mut Evaluator, t: f64| -> Result<f64> {
            let e = ev.eval(&axpy(&rho, t, &dir))?;
            Ok(dot(&e.grad, &dir))
        };
        let step = line_search(&mut ev, slope_at, dot(&current.grad, &dir), max_step, opts.line_search_steps)?;
        if step <= 0.0 {
            // Stalled; the gap computed above still certifies the iterate.
            break;
        }

        match away_idx {
            Some(k) => {
                weights[k] -= step;
                weights[s_idx] += step;
            }
            None => {
                weights.iter_mut().for_each(|w| *w *= 1.0 - step);
                weights[s_idx] += step;
            }
        }
        let mut i = 0;
        while i < atoms.len() {
            if weights[i] <= 1e-14 && atoms.len() > 1 {
                atoms.swap_remove(i);
                weights.swap_remove(i);
            } else {
                i += 1;
            }
        }
        let total: f64 = weights.iter().sum();
        weights.iter_mut().for_each(|w| *w /= total);

        rho = vec![0.0; rho.len()];
        for (a, w) in atoms.iter().zip(&weights) {
            for (r, v) in rho.iter_mut().zip(a) {
                *r += w * v;
            }
        }
        current = ev.eval(&rho)?;
        iterations = it + 1;
    }

    let certificate = CapacityCertificate {
        value: current.cap.capacity,
        rho: ExtendedDistribution { dims: d, rho },
        input_dist: current.cap.input.clone(),
        gap,
        iterations,
    };
    if gap <= opts.tol {
        Ok(certificate)
    } else {
        Err(Error::CapacityNonConvergence { certificate: Box::new(certificate) })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bsc(flip: f64) -> Vec<Vec<f64>> {
        vec![vec![1.0 - flip, flip], vec![flip, 1.0 - flip]]
    }

    fn h(p: f64) -> f64 {
        if p <= 0.0 || p >= 1.0 {
            0.0
        } else {
            -p * p.log2() - (1.0 - p) * (1.0 - p).log2()
        }
    }

    #[test]
    fn capacity_examples() {
        let c = channel_capacity(&bsc(0.0), 1e-9).unwrap();
        assert!((c.capacity - 1.0).abs() < 1e-9);
        let c = channel_capacity(&bsc(0.5), 1e-9).unwrap();
        assert!(c.capacity.abs() < 1e-9);
        let c = channel_capacity(&bsc(0.11), 1e-9).unwrap();
        assert!((c.capacity - (1.0 - h(0.11))).abs() < 1e-8);
        assert!((c.capacity - 0.5001).abs() < 1e-3);
        assert!((c.input[0] - 0.5).abs() < 1e-6);
    }

    #[test]
    fn z_channel_matches_closed_form() {
        // C = log2(1 + (1-e) e^(e/(1-e))) for the Z channel with crossover e.
        let e: f64 = 0.3;
        let ch = vec![vec![1.0, 0.0], vec![e, 1.0 - e]];
        let c = channel_capacity(&ch, 1e-10).unwrap();
        let closed = (1.0 + (1.0 - e) * e.powf(e / (1.0 - e))).log2();
        assert!((c.capacity - closed).abs() < 1e-9);
    }

    #[test]
    fn malformed_channels() {
        assert!(channel_capacity(&[], 1e-6).is_err());
        assert!(channel_capacity(&[vec![0.5, 0.4]], 1e-6).is_err());
        assert!(channel_capacity(&[vec![1.0], vec![0.5, 0.5]], 1e-6).is_err());
        assert!(channel_capacity(&bsc(0.1), 0.0).is_err());
    }

    #[test]
    fn v_polytope_counts() {
        let p = BehaviorTable::uniform(Dims::cglmp()).unwrap();
        let v = build_v_polytope(&p).unwrap();
        assert_eq!(v.n_vars(), 54);
        assert_eq!(v.n_rows(), 36);
    }

    #[test]
    fn signaling_input_is_rejected() {
        let d = Dims::new(1, 2, 2, 2).unwrap();
        let alice = [[0.6, 0.4], [0.5, 0.5]];
        let p = BehaviorTable::from_fn(d, |_, y, a, _| alice[y][a] * 0.5).unwrap();
        assert!(matches!(build_v_polytope(&p), Err(Error::SignalingInput { .. })));
        assert!(matches!(nonlocal_capacity_asym(&p, 1e-4), Err(Error::SignalingInput { .. })));
    }

    #[test]
    fn product_behavior_start_is_feasible() {
        let pa = [[0.2, 0.8], [0.7, 0.3]];
        let pb = [[0.4, 0.6], [0.9, 0.1]];
        let p = BehaviorTable::from_fn(Dims::chsh(), |x, y, a, b| pa[x][a] * pb[y][b]).unwrap();
        let rho = conditional_independence_point(&p);
        assert!(rho.constraint_residual(&p) < 1e-15);
        // Product start means a channel independent of x.
        let c = nonlocal_capacity_asym(&p, 1e-6).unwrap();
        assert!(c.value < 1e-6);
    }

    #[test]
    fn pr_box_extension_is_forced() {
        // Only b_1 = b_0 XOR x is compatible with the PR box.
        let p = BehaviorTable::pr_box();
        let rho = conditional_independence_point(&p);
        assert!(rho.constraint_residual(&p) < 1e-15);
        let d = p.dims();
        for x in 0..2 {
            for a in 0..2 {
                for code in 0..4 {
                    let b0 = ExtendedDistribution::digit(d, code, 0);
                    let b1 = ExtendedDistribution::digit(d, code, 1);
                    let expected = if b0 == a && b1 == a ^ x { 0.5 } else { 0.0 };
                    assert_eq!(rho.get(x, a, code), expected);
                }
            }
        }
        let c = nonlocal_capacity_asym(&p, 1e-6).unwrap();
        assert!((c.value - 1.0).abs() < 1e-6);
    }
}
