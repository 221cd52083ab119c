//! Real branches of the Lambert W function, `W(z)·e^{W(z)} = z`.

use std::f64::consts::E;

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Branch {
    /// Principal branch, `W ≥ −1` on `[−1/e, ∞)`.
    Principal,
    /// Lower branch, `W ≤ −1` on `[−1/e, 0)`.
    Lower,
}

impl Branch {
    pub fn index(self) -> i32 {
        match self {
            Branch::Principal => 0,
            Branch::Lower => -1,
        }
    }
}

const BRANCH_POINT: f64 = -1.0 / E;
const MAX_ITER: usize = 50;

/// Series in `p = ±√(2(ez+1))` around the branch point.
fn branch_point_series(p: f64) -> f64 {
    -1.0 + p - p * p / 3.0 + 11.0 / 72.0 * p * p * p
}

pub fn lambert_w(branch: Branch, z: f64) -> Result<f64> {
    let domain = Error::LambertDomain { branch: branch.index(), z };
    if !z.is_finite() {
        return Err(domain);
    }
    // tolerate rounding right at the branch point
    let slack = 4.0 * f64::EPSILON;
    if z < BRANCH_POINT - slack {
        return Err(domain);
    }
    let z = z.max(BRANCH_POINT);
    if branch == Branch::Lower && z >= 0.0 {
        return Err(domain);
    }
    if z == 0.0 {
        return Ok(0.0);
    }
    let q = (2.0 * (E * z + 1.0)).max(0.0);
    if q == 0.0 {
        return Ok(-1.0);
    }
    let mut w = match branch {
        Branch::Principal if z < -0.25 => branch_point_series(q.sqrt()),
        Branch::Principal if z < E => (1.0 + z).ln() * 0.9,
        // w·e^w overflows long before z does, so work with logarithms
        Branch::Principal => return log_newton(z),
        Branch::Lower if z < -0.25 => branch_point_series(-q.sqrt()),
        Branch::Lower => {
            let l1 = (-z).ln();
            let l2 = (-l1).ln();
            l1 - l2 + l2 / l1
        }
    };
    for _ in 0..MAX_ITER {
        let ew = w.exp();
        let f = w * ew - z;
        let wp1 = w + 1.0;
        if wp1.abs() < 1e-300 {
            return Ok(w);
        }
        let denom = ew * wp1 - (w + 2.0) * f / (2.0 * wp1);
        let step = f / denom;
        w -= step;
        if step.abs() <= 4.0 * f64::EPSILON * (1.0 + w.abs()) {
            return Ok(w);
        }
    }
    let residual = w * w.exp() - z;
    if residual.abs() <= 1e-12 * z.abs().max(1.0) {
        Ok(w)
    } else {
        Err(Error::LambertConvergence { z })
    }
}

/// Newton on `w + log w = log z` for `z ≥ e`, where `w ≥ 1`.
fn log_newton(z: f64) -> Result<f64> {
    let lz = z.ln();
    let mut w = lz - lz.ln().max(0.0);
    for _ in 0..MAX_ITER {
        let step = (w + w.ln() - lz) / (1.0 + 1.0 / w);
        w -= step;
        if step.abs() <= 4.0 * f64::EPSILON * w {
            return Ok(w);
        }
    }
    Err(Error::LambertConvergence { z })
}

pub fn w0(z: f64) -> Result<f64> {
    lambert_w(Branch::Principal, z)
}

pub fn w_minus1(z: f64) -> Result<f64> {
    lambert_w(Branch::Lower, z)
}
