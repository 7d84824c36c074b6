//! Bipartite input-output behaviors `P(ab|xy)`.
//!
//! A [`BehaviorTable`] stores one conditional distribution over the outcome
//! pair `(a, b)` for every setting pair `(x, y)`. Settings and outcomes are
//! 0-based everywhere inside the library; the JSON ingestion layer converts
//! the 1-based setting labels used in counts files.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance on per-block normalization.
pub const NORMALIZATION_TOL: f64 = 1e-12;

/// Sizes of the setting and outcome ranges of a two-party system.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Dims {
    pub nx: usize,
    pub ny: usize,
    pub na: usize,
    pub nb: usize,
}

impl Dims {
    pub fn new(nx: usize, ny: usize, na: usize, nb: usize) -> Result<Self> {
        let dims = Dims { nx, ny, na, nb };
        dims.validate()?;
        Ok(dims)
    }

    /// Two settings and two outcomes per party.
    pub const fn chsh() -> Self {
        Dims { nx: 2, ny: 2, na: 2, nb: 2 }
    }

    /// Two settings and three outcomes per party.
    pub const fn cglmp() -> Self {
        Dims { nx: 2, ny: 2, na: 3, nb: 3 }
    }

    pub fn validate(&self) -> Result<()> {
        if self.nx < 1 || self.ny < 1 {
            return Err(Error::InvalidDims(format!("{self}: need at least one setting per party")));
        }
        if self.na < 2 || self.nb < 2 {
            return Err(Error::InvalidDims(format!("{self}: need at least two outcomes per party")));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny * self.na * self.nb
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn block_len(&self) -> usize {
        self.na * self.nb
    }

    #[inline]
    pub fn index(&self, x: usize, y: usize, a: usize, b: usize) -> usize {
        debug_assert!(x < self.nx && y < self.ny && a < self.na && b < self.nb);
        ((x * self.ny + y) * self.na + a) * self.nb + b
    }

    #[inline]
    pub fn block_offset(&self, x: usize, y: usize) -> usize {
        (x * self.ny + y) * self.block_len()
    }

    /// Iterates `(x, y)` in storage order.
    pub fn settings(&self) -> impl Iterator<Item = (usize, usize)> {
        let ny = self.ny;
        (0..self.nx).flat_map(move |x| (0..ny).map(move |y| (x, y)))
    }
}

impl fmt::Display for Dims {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{},{},{})", self.nx, self.ny, self.na, self.nb)
    }
}

/// Conditional distribution `P(ab|xy)` stored densely in `(x, y, a, b)` order.
#[derive(Clone, Debug, PartialEq)]
pub struct BehaviorTable {
    dims: Dims,
    p: Vec<f64>,
}

impl BehaviorTable {
    /// Validates and wraps a dense probability array.
    pub fn new(dims: Dims, p: Vec<f64>) -> Result<Self> {
        dims.validate()?;
        if p.len() != dims.len() {
            return Err(Error::ShapeMismatch {
                expected: format!("{} entries", dims.len()),
                found: format!("{} entries", p.len()),
            });
        }
        for (i, &v) in p.iter().enumerate() {
            if !v.is_finite() || v < 0.0 || v > 1.0 + NORMALIZATION_TOL {
                return Err(Error::InvalidBehavior(format!("entry {i} = {v} is not a probability")));
            }
        }
        for (x, y) in dims.settings() {
            let off = dims.block_offset(x, y);
            let total: f64 = p[off..off + dims.block_len()].iter().sum();
            if (total - 1.0).abs() > NORMALIZATION_TOL {
                return Err(Error::InvalidBehavior(format!(
                    "block (x={x}, y={y}) sums to {total}"
                )));
            }
        }
        Ok(BehaviorTable { dims, p })
    }

    /// Builds a behavior from non-negative per-block weights, normalizing each block.
    pub fn from_weights(dims: Dims, mut w: Vec<f64>) -> Result<Self> {
        dims.validate()?;
        if w.len() != dims.len() {
            return Err(Error::ShapeMismatch {
                expected: format!("{} entries", dims.len()),
                found: format!("{} entries", w.len()),
            });
        }
        for (x, y) in dims.settings() {
            let off = dims.block_offset(x, y);
            let block = &mut w[off..off + dims.block_len()];
            if block.iter().any(|v| !v.is_finite() || *v < 0.0) {
                return Err(Error::InvalidBehavior(format!(
                    "block (x={x}, y={y}) has a negative or non-finite weight"
                )));
            }
            let total: f64 = block.iter().sum();
            if total <= 0.0 {
                return Err(Error::ZeroBlock { x, y });
            }
            block.iter_mut().for_each(|v| *v /= total);
        }
        Ok(BehaviorTable { dims, p: w })
    }

    /// Clamps solver round-off (tiny negatives, drifted block sums) and renormalizes.
    pub(crate) fn from_solver_output(dims: Dims, mut w: Vec<f64>) -> Result<Self> {
        for v in w.iter_mut() {
            if *v < 0.0 {
                *v = 0.0;
            }
        }
        Self::from_weights(dims, w)
    }

    pub fn from_fn(dims: Dims, mut f: impl FnMut(usize, usize, usize, usize) -> f64) -> Result<Self> {
        dims.validate()?;
        let mut p = Vec::with_capacity(dims.len());
        for (x, y) in dims.settings() {
            for a in 0..dims.na {
                for b in 0..dims.nb {
                    p.push(f(x, y, a, b));
                }
            }
        }
        Self::new(dims, p)
    }

    pub fn uniform(dims: Dims) -> Result<Self> {
        let v = 1.0 / dims.block_len() as f64;
        Self::from_fn(dims, |_, _, _, _| v)
    }

    /// Local deterministic strategy `a = alice[x]`, `b = bob[y]`.
    pub fn deterministic(dims: Dims, alice: &[usize], bob: &[usize]) -> Result<Self> {
        dims.validate()?;
        if alice.len() != dims.nx || bob.len() != dims.ny {
            return Err(Error::InvalidParameter(format!(
                "strategy lengths ({}, {}) do not match dims {dims}",
                alice.len(),
                bob.len()
            )));
        }
        if alice.iter().any(|&a| a >= dims.na) || bob.iter().any(|&b| b >= dims.nb) {
            return Err(Error::InvalidParameter("strategy output out of range".into()));
        }
        Self::from_fn(dims, |x, y, a, b| f64::from(u8::from(alice[x] == a && bob[y] == b)))
    }

    /// The Popescu-Rohrlich box: uniform outcomes with `a XOR b = x AND y`.
    pub fn pr_box() -> Self {
        Self::from_fn(Dims::chsh(), |x, y, a, b| if (a ^ b) == (x & y) { 0.5 } else { 0.0 })
            .expect("PR box is a valid behavior")
    }

    /// PR box oriented to the CHSH sign pattern used by [`crate::bell::i2`]:
    /// `a XOR b = x AND NOT y`, which reaches the algebraic maximum 4.
    pub fn pr_box_chsh_aligned() -> Self {
        Self::from_fn(Dims::chsh(), |x, y, a, b| if (a ^ b) == (x & (1 - y)) { 0.5 } else { 0.0 })
            .expect("PR box is a valid behavior")
    }

    /// Convex combination `mu * self + (1 - mu) * other`.
    pub fn mix(&self, other: &BehaviorTable, mu: f64) -> Result<Self> {
        if self.dims != other.dims {
            return Err(Error::shape(self.dims, other.dims));
        }
        if !(0.0..=1.0).contains(&mu) {
            return Err(Error::InvalidParameter(format!("mixing weight {mu} outside [0, 1]")));
        }
        let p = self
            .p
            .iter()
            .zip(&other.p)
            .map(|(a, b)| mu * a + (1.0 - mu) * b)
            .collect();
        Ok(BehaviorTable { dims: self.dims, p })
    }

    pub fn dims(&self) -> Dims {
        self.dims
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.p
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.p
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize, a: usize, b: usize) -> f64 {
        self.p[self.dims.index(x, y, a, b)]
    }

    /// The `na x nb` block for setting pair `(x, y)`, row-major in `a`.
    pub fn block(&self, x: usize, y: usize) -> &[f64] {
        let off = self.dims.block_offset(x, y);
        &self.p[off..off + self.dims.block_len()]
    }

    /// `P(a|x, y)`.
    pub fn alice_marginal(&self, x: usize, y: usize) -> Vec<f64> {
        let nb = self.dims.nb;
        self.block(x, y).chunks(nb).map(|row| row.iter().sum()).collect()
    }

    /// `P(b|x, y)`.
    pub fn bob_marginal(&self, x: usize, y: usize) -> Vec<f64> {
        let nb = self.dims.nb;
        let mut m = vec![0.0; nb];
        for row in self.block(x, y).chunks(nb) {
            for (acc, v) in m.iter_mut().zip(row) {
                *acc += v;
            }
        }
        m
    }

    /// Applies `a -> relabel_a(x, a)` and `b -> relabel_b(y, b)` to every block.
    pub fn relabel(
        &self,
        relabel_a: impl Fn(usize, usize) -> usize,
        relabel_b: impl Fn(usize, usize) -> usize,
    ) -> Result<Self> {
        let d = self.dims;
        let mut p = vec![0.0; d.len()];
        for (x, y) in d.settings() {
            for a in 0..d.na {
                for b in 0..d.nb {
                    p[d.index(x, y, relabel_a(x, a), relabel_b(y, b))] += self.get(x, y, a, b);
                }
            }
        }
        Self::new(d, p)
    }
}

/// Counts record as produced by a coincidence-counting experiment.
#[derive(Clone, Debug, PartialEq)]
pub struct CountsRecord {
    dims: Dims,
    counts: Vec<u64>,
    background: Option<Vec<f64>>,
}

impl CountsRecord {
    pub fn new(dims: Dims, counts: Vec<u64>, background: Option<Vec<f64>>) -> Result<Self> {
        dims.validate()?;
        if counts.len() != dims.len() {
            return Err(Error::ShapeMismatch {
                expected: format!("{} counts", dims.len()),
                found: format!("{} counts", counts.len()),
            });
        }
        if let Some(bg) = &background {
            if bg.len() != dims.len() {
                return Err(Error::ShapeMismatch {
                    expected: format!("{} background entries", dims.len()),
                    found: format!("{} background entries", bg.len()),
                });
            }
            if let Some(i) = bg.iter().position(|v| !v.is_finite() || *v < 0.0) {
                return Err(Error::InvalidParameter(format!(
                    "background entry {i} = {} is negative or non-finite",
                    bg[i]
                )));
            }
        }
        Ok(CountsRecord { dims, counts, background })
    }

    pub fn dims(&self) -> Dims {
        self.dims
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn background(&self) -> Option<&[f64]> {
        self.background.as_deref()
    }

    /// Same record with the counts replaced; the background is kept.
    pub fn with_counts(&self, counts: Vec<u64>) -> Result<Self> {
        Self::new(self.dims, counts, self.background.clone())
    }

    /// Expected counts `round(p * per_block)` for a behavior.
    pub fn from_behavior(p: &BehaviorTable, per_block: f64) -> Result<Self> {
        if !(per_block.is_finite() && per_block > 0.0) {
            return Err(Error::InvalidParameter(format!("counts per block must be positive, got {per_block}")));
        }
        let counts = p.as_slice().iter().map(|v| (v * per_block).round() as u64).collect();
        Self::new(p.dims(), counts, None)
    }
}

/// Background-subtracted, clamped and per-block normalized counts.
pub fn normalize_counts(c: &CountsRecord) -> Result<BehaviorTable> {
    let d = c.dims;
    let signal: Vec<f64> = match &c.background {
        Some(bg) => {
            if bg.len() != c.counts.len() {
                return Err(Error::ShapeMismatch {
                    expected: format!("{} background entries", c.counts.len()),
                    found: format!("{} background entries", bg.len()),
                });
            }
            c.counts.iter().zip(bg).map(|(&n, &b)| (n as f64 - b).max(0.0)).collect()
        }
        None => c.counts.iter().map(|&n| n as f64).collect(),
    };
    for (x, y) in d.settings() {
        let off = d.block_offset(x, y);
        if signal[off..off + d.block_len()].iter().sum::<f64>() <= 0.0 {
            return Err(Error::ZeroBlock { x, y });
        }
    }
    BehaviorTable::from_weights(d, signal)
}

fn total_variation(p: &[f64], q: &[f64]) -> f64 {
    0.5 * p.iter().zip(q).map(|(a, b)| (a - b).abs()).sum::<f64>()
}

/// Largest total-variation distance between one party's marginals under two
/// different settings of the other party, maximized over both parties.
pub fn signaling_deficit(p: &BehaviorTable) -> f64 {
    let d = p.dims;
    let mut worst: f64 = 0.0;
    for x in 0..d.nx {
        let marginals: Vec<Vec<f64>> = (0..d.ny).map(|y| p.alice_marginal(x, y)).collect();
        for (i, m) in marginals.iter().enumerate() {
            for n in &marginals[i + 1..] {
                worst = worst.max(total_variation(m, n));
            }
        }
    }
    for y in 0..d.ny {
        let marginals: Vec<Vec<f64>> = (0..d.nx).map(|x| p.bob_marginal(x, y)).collect();
        for (i, m) in marginals.iter().enumerate() {
            for n in &marginals[i + 1..] {
                worst = worst.max(total_variation(m, n));
            }
        }
    }
    worst
}

/// Entry-wise L1 distance.
pub fn l1_distance(p: &BehaviorTable, q: &BehaviorTable) -> Result<f64> {
    if p.dims != q.dims {
        return Err(Error::shape(p.dims, q.dims));
    }
    Ok(p.p.iter().zip(&q.p).map(|(a, b)| (a - b).abs()).sum())
}
