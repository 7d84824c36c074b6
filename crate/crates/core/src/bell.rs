//! CHSH (`I2`) and CGLMP (`I3`) Bell functionals, and the fit of the
//! white-noise mixing parameter to measured `I3` values.

use serde::{Deserialize, Serialize};

use crate::behavior::{BehaviorTable, Dims};
use crate::error::{Error, Result};
use crate::quantum::{born_behavior, QutritModel};

/// Local bound shared by both functionals.
pub const LOCAL_BOUND: f64 = 2.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Functional {
    I2,
    I3,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BellValue {
    /// `|signed|`, the reported Bell parameter.
    pub value: f64,
    /// Linear functional before the absolute value.
    pub signed: f64,
    pub functional: Functional,
    pub local_bound: f64,
}

impl BellValue {
    fn new(functional: Functional, signed: f64) -> Self {
        BellValue {
            value: signed.abs(),
            signed,
            functional,
            local_bound: LOCAL_BOUND,
        }
    }

    /// Local strategies keep signed `I2` within `[-2, 2]` and signed `I3`
    /// within `[-4, 2]`, so only the upper side of `I3` signals non-locality.
    pub fn violates_local_bound(&self) -> bool {
        match self.functional {
            Functional::I2 => self.value > self.local_bound,
            Functional::I3 => self.signed > self.local_bound,
        }
    }
}

/// Sign of the `P(A_x = B_y) - P(A_x != B_y)` term, 0-based settings.
fn chsh_sign(x: usize, y: usize) -> f64 {
    if x == 1 && y == 0 {
        -1.0
    } else {
        1.0
    }
}

/// CGLMP terms `(x, y, k, sign)` where each term is `P(A_x - B_y = k mod 3)`.
///
/// Positive: `A1=B1`, `B1=A2+1`, `A2=B2`, `B2=A1`.
/// Negative: `A1=B1-1`, `B1=A2`, `A2=B2-1`, `B2=A1-1`.
const CGLMP_TERMS: [(usize, usize, usize, f64); 8] = [
    (0, 0, 0, 1.0),
    (1, 0, 2, 1.0),
    (1, 1, 0, 1.0),
    (0, 1, 0, 1.0),
    (0, 0, 2, -1.0),
    (1, 0, 0, -1.0),
    (1, 1, 2, -1.0),
    (0, 1, 1, -1.0),
];

/// Coefficient tensor `c(x, y, a, b)` with `I2_signed = sum c * p`.
pub fn i2_coefficients() -> Vec<f64> {
    let d = Dims::chsh();
    let mut c = vec![0.0; d.len()];
    for (x, y) in d.settings() {
        for a in 0..2 {
            for b in 0..2 {
                let agree = if a == b { 1.0 } else { -1.0 };
                c[d.index(x, y, a, b)] = chsh_sign(x, y) * agree;
            }
        }
    }
    c
}

/// Coefficient tensor `c(x, y, a, b)` with `I3_signed = sum c * p`.
pub fn i3_coefficients() -> Vec<f64> {
    let d = Dims::cglmp();
    let mut c = vec![0.0; d.len()];
    for &(x, y, k, sign) in &CGLMP_TERMS {
        for b in 0..3 {
            c[d.index(x, y, (b + k) % 3, b)] += sign;
        }
    }
    c
}

fn contract(p: &BehaviorTable, coeffs: &[f64]) -> f64 {
    p.as_slice().iter().zip(coeffs).map(|(p, c)| p * c).sum()
}

pub fn i2(p: &BehaviorTable) -> Result<BellValue> {
    if p.dims() != Dims::chsh() {
        return Err(Error::shape(Dims::chsh(), p.dims()));
    }
    Ok(BellValue::new(Functional::I2, contract(p, &i2_coefficients())))
}

pub fn i3(p: &BehaviorTable) -> Result<BellValue> {
    if p.dims() != Dims::cglmp() {
        return Err(Error::shape(Dims::cglmp(), p.dims()));
    }
    Ok(BellValue::new(Functional::I3, contract(p, &i3_coefficients())))
}

/// Signed `I3` of the pure-state model at the default settings.
pub fn i3_theory(gamma: f64) -> Result<f64> {
    Ok(i3(&born_behavior(&QutritModel::new(gamma, 1.0)?)?)?.signed)
}

/// Golden-section search for the `gamma` in `[lo, hi]` maximizing the signed
/// pure-state `I3`, to within `tol` in `gamma`. Returns `(gamma, I3)`.
pub fn maximize_i3_theory(lo: f64, hi: f64, tol: f64) -> Result<(f64, f64)> {
    if !(lo >= 0.0 && hi > lo && tol > 0.0) {
        return Err(Error::InvalidParameter(format!("need 0 <= lo < hi and tol > 0, got [{lo}, {hi}], {tol}")));
    }
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (lo, hi);
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (i3_theory(c)?, i3_theory(d)?);
    while b - a > tol {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = i3_theory(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = i3_theory(d)?;
        }
    }
    let g = 0.5 * (a + b);
    Ok((g, i3_theory(g)?))
}

/// One measured Bell value at a given entanglement parameter.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitPoint {
    pub gamma: f64,
    pub measured_i3: f64,
    /// Inverse variance of `measured_i3`.
    pub weight: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MixingFit {
    pub lambda: f64,
    pub stderr: f64,
    /// The unconstrained estimate fell outside `[0, 1]` and was clipped.
    pub clipped: bool,
}

/// Weighted least-squares fit of `measured ~ lambda * I3_theory(gamma)` through the origin.
///
/// Weights are treated as inverse variances, so `stderr = (sum w t^2)^(-1/2)`.
pub fn fit_mixing_parameter(points: &[FitPoint]) -> Result<MixingFit> {
    if points.is_empty() {
        return Err(Error::EmptyInput("no points to fit".into()));
    }
    let mut stt = 0.0;
    let mut sty = 0.0;
    for pt in points {
        if !(pt.weight.is_finite() && pt.weight > 0.0) {
            return Err(Error::InvalidParameter(format!("weight must be positive, got {}", pt.weight)));
        }
        let t = i3_theory(pt.gamma)?;
        stt += pt.weight * t * t;
        sty += pt.weight * t * pt.measured_i3;
    }
    if stt <= 0.0 {
        return Err(Error::DegenerateFit("theory curve vanishes at every gamma".into()));
    }
    let raw = sty / stt;
    let lambda = raw.clamp(0.0, 1.0);
    let clipped = lambda != raw;
    if clipped {
        log::warn!("fitted mixing parameter {raw} clipped to {lambda}");
    }
    Ok(MixingFit {
        lambda,
        stderr: stt.sqrt().recip(),
        clipped,
    })
}
