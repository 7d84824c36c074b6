//! Born-rule behaviors of the two-qutrit state family
//! `(|00> + gamma |11> + |22>) / sqrt(2 + gamma^2)` measured in Fourier-phase
//! bases, mixed with isotropic white noise.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::behavior::{BehaviorTable, Dims};
use crate::error::{Error, Result};

/// Local dimension.
pub const QUTRIT_DIM: usize = 3;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Party {
    Alice,
    Bob,
}

/// Parameters of the simulated experiment.
///
/// `alpha[x]` and `beta[y]` are the phase offsets of the measurement bases for
/// the 0-based settings `x, y in {0, 1}`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct QutritModel {
    pub gamma: f64,
    pub lambda: f64,
    pub alpha: [f64; 2],
    pub beta: [f64; 2],
}

impl QutritModel {
    /// Model with the standard CGLMP settings `alpha = (0, 1/2)`, `beta = (1/4, -1/4)`.
    pub fn new(gamma: f64, lambda: f64) -> Result<Self> {
        let m = QutritModel {
            gamma,
            lambda,
            alpha: [0.0, 0.5],
            beta: [0.25, -0.25],
        };
        m.validate()?;
        Ok(m)
    }

    pub fn with_settings(mut self, alpha: [f64; 2], beta: [f64; 2]) -> Result<Self> {
        self.alpha = alpha;
        self.beta = beta;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.gamma.is_finite() && self.gamma >= 0.0) {
            return Err(Error::InvalidParameter(format!("gamma must be >= 0, got {}", self.gamma)));
        }
        if !(0.0..=1.0).contains(&self.lambda) {
            return Err(Error::InvalidParameter(format!("lambda must lie in [0, 1], got {}", self.lambda)));
        }
        if self.alpha.iter().chain(&self.beta).any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter("measurement phases must be finite".into()));
        }
        Ok(())
    }
}

/// Pure two-qutrit state over the product basis `|j>_A |j'>_B`, index `3 j + j'`.
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    amps: [Complex64; QUTRIT_DIM * QUTRIT_DIM],
}

impl StateVector {
    pub fn amps(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn amp(&self, j: usize, jp: usize) -> Complex64 {
        self.amps[j * QUTRIT_DIM + jp]
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|c| c.norm_sqr()).sum()
    }
}

pub fn qutrit_state(gamma: f64) -> Result<StateVector> {
    if !(gamma.is_finite() && gamma >= 0.0) {
        return Err(Error::InvalidParameter(format!("gamma must be >= 0, got {gamma}")));
    }
    let norm = (2.0 + gamma * gamma).sqrt().recip();
    let mut amps = [Complex64::new(0.0, 0.0); QUTRIT_DIM * QUTRIT_DIM];
    for (j, s) in [1.0, gamma, 1.0].into_iter().enumerate() {
        amps[j * QUTRIT_DIM + j] = Complex64::new(s * norm, 0.0);
    }
    Ok(StateVector { amps })
}

/// Basis vector `|a>_x` (Alice) or `|b>_y` (Bob) in the computational basis.
///
/// Alice: `exp(i 2pi/3 j (a + alpha_x)) / sqrt 3`; Bob: `exp(i 2pi/3 j (-b + beta_y)) / sqrt 3`.
/// `setting` and `outcome` are 0-based.
pub fn measurement_vector(
    side: Party,
    setting: usize,
    outcome: usize,
    model: &QutritModel,
) -> [Complex64; QUTRIT_DIM] {
    assert!(setting < 2 && outcome < QUTRIT_DIM, "setting or outcome out of range");
    let shift = match side {
        Party::Alice => outcome as f64 + model.alpha[setting],
        Party::Bob => -(outcome as f64) + model.beta[setting],
    };
    let scale = (QUTRIT_DIM as f64).sqrt().recip();
    std::array::from_fn(|j| Complex64::from_polar(scale, 2.0 * PI / 3.0 * j as f64 * shift))
}

/// Joint outcome distribution of the noisy model; dims `(2, 2, 3, 3)`.
pub fn born_behavior(model: &QutritModel) -> Result<BehaviorTable> {
    model.validate()?;
    let psi = qutrit_state(model.gamma)?;
    let dims = Dims::cglmp();
    let noise = 1.0 / dims.block_len() as f64;
    let mut p = vec![0.0; dims.len()];
    for (x, y) in dims.settings() {
        let mut pure = [0.0; QUTRIT_DIM * QUTRIT_DIM];
        for a in 0..QUTRIT_DIM {
            let u = measurement_vector(Party::Alice, x, a, model);
            for b in 0..QUTRIT_DIM {
                let v = measurement_vector(Party::Bob, y, b, model);
                let mut overlap = Complex64::new(0.0, 0.0);
                for j in 0..QUTRIT_DIM {
                    for jp in 0..QUTRIT_DIM {
                        overlap += (u[j] * v[jp]).conj() * psi.amp(j, jp);
                    }
                }
                pure[a * QUTRIT_DIM + b] = overlap.norm_sqr();
            }
        }
        let total: f64 = pure.iter().sum();
        if total <= 0.0 {
            return Err(Error::InvalidParameter(format!("block (x={x}, y={y}) has zero weight")));
        }
        let off = dims.block_offset(x, y);
        for (k, w) in pure.iter().enumerate() {
            p[off + k] = model.lambda * w / total + (1.0 - model.lambda) * noise;
        }
    }
    BehaviorTable::new(dims, p)
}
