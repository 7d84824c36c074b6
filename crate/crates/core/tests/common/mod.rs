//! Independent oracles and generators shared by the integration tests.
#![allow(dead_code)]

use nonlocality::{enumerate_local_vertices, BehaviorTable, Dims};
use num_complex::Complex64;
use rand::Rng;

/// `P[x][y][a][b]` for the noisy qutrit model, evaluated term by term from the
/// measurement vectors with no shared code.
pub fn oracle_behavior(gamma: f64, lambda: f64) -> [[[[f64; 3]; 3]; 2]; 2] {
    let alpha = [0.0, 0.5];
    let beta = [0.25, -0.25];
    let coeff = [1.0, gamma, 1.0];
    let tau = 2.0 * std::f64::consts::PI / 3.0;
    let mut out = [[[[0.0; 3]; 3]; 2]; 2];
    for x in 0..2 {
        for y in 0..2 {
            let mut pure = [[0.0; 3]; 3];
            let mut total = 0.0;
            for a in 0..3 {
                for b in 0..3 {
                    let mut amp = Complex64::new(0.0, 0.0);
                    for j in 0..3 {
                        let jf = j as f64;
                        let ua = Complex64::from_polar(1.0 / 3f64.sqrt(), tau * jf * (a as f64 + alpha[x]));
                        let ub = Complex64::from_polar(1.0 / 3f64.sqrt(), tau * jf * (-(b as f64) + beta[y]));
                        amp += ua.conj() * ub.conj() * coeff[j];
                    }
                    pure[a][b] = amp.norm_sqr();
                    total += pure[a][b];
                }
            }
            for a in 0..3 {
                for b in 0..3 {
                    out[x][y][a][b] = lambda * pure[a][b] / total + (1.0 - lambda) / 9.0;
                }
            }
        }
    }
    out
}

/// CGLMP value written as the eight probabilities of the inequality with
/// settings labeled 1 and 2.
pub fn oracle_i3(p: &[[[[f64; 3]; 3]; 2]; 2]) -> f64 {
    let prob = |x: usize, y: usize, cond: &dyn Fn(i64, i64) -> bool| -> f64 {
        let mut s = 0.0;
        for a in 0..3 {
            for b in 0..3 {
                if cond(a, b) {
                    s += p[x - 1][y - 1][a as usize][b as usize];
                }
            }
        }
        s
    };
    let eq = |l: i64, r: i64| (l - r).rem_euclid(3) == 0;
    let v = prob(1, 1, &|a, b| eq(a, b)) + prob(2, 1, &|a, b| eq(b, a + 1)) + prob(2, 2, &|a, b| eq(a, b))
        + prob(1, 2, &|a, b| eq(b, a))
        - prob(1, 1, &|a, b| eq(a, b - 1))
        - prob(2, 1, &|a, b| eq(b, a))
        - prob(2, 2, &|a, b| eq(a, b - 1))
        - prob(1, 2, &|a, b| eq(b, a - 1));
    v.abs()
}

pub fn oracle_table(p: &[[[[f64; 3]; 3]; 2]; 2]) -> BehaviorTable {
    BehaviorTable::from_fn(Dims::cglmp(), |x, y, a, b| p[x][y][a][b]).unwrap()
}

/// Each block drawn independently from a flat Dirichlet, so generically signaling.
pub fn random_behavior<R: Rng>(dims: Dims, rng: &mut R) -> BehaviorTable {
    let w: Vec<f64> = (0..dims.len()).map(|_| -rng.gen::<f64>().max(1e-300).ln()).collect();
    BehaviorTable::from_weights(dims, w).unwrap()
}

/// Uniformly random convex mixture of the local deterministic vertices.
pub fn random_local_mixture<R: Rng>(dims: Dims, rng: &mut R) -> BehaviorTable {
    let set = enumerate_local_vertices(dims).unwrap();
    let w: Vec<f64> = (0..set.len()).map(|_| -rng.gen::<f64>().max(1e-300).ln()).collect();
    let total: f64 = w.iter().sum();
    let mut p = vec![0.0; dims.len()];
    for (v, wk) in set.vertices().iter().zip(&w) {
        for (pi, vi) in p.iter_mut().zip(v.as_slice()) {
            *pi += wk / total * vi;
        }
    }
    BehaviorTable::from_weights(dims, p).unwrap()
}
