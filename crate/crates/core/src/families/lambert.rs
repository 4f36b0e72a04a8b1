//! Real branches of the Lambert W (product log) function by Halley iteration.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// `1/e`
pub const INV_E: f64 = 0.367_879_441_171_442_33;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Branch {
    /// `W_0`, defined on `[-1/e, inf)`, values `>= -1`.
    #[default]
    Principal,
    /// `W_{-1}`, defined on `[-1/e, 0)`, values `<= -1`.
    Lower,
}

impl Branch {
    fn name(self) -> &'static str {
        match self {
            Branch::Principal => "principal",
            Branch::Lower => "lower",
        }
    }
}

const MAX_ITER: usize = 64;

/// Solves `w e^w = x` on the requested branch.
///
/// Initial guesses: the branch-point series in `p = sqrt(2(e x + 1))` near
/// `-1/e`, Winitzki's `ln(1+x)` approximation on the moderate principal
/// range, and the asymptotic `L1 - L2 + L2/L1` expansion for large `|ln|x||`.
pub fn lambert_w(x: f64, branch: Branch) -> Result<f64> {
    let out_of_domain = || Error::LambertDomain {
        x,
        branch: branch.name(),
    };
    if x.is_nan() || x < -INV_E {
        return Err(out_of_domain());
    }
    if x == -INV_E {
        return Ok(-1.0);
    }
    match branch {
        Branch::Principal => {
            if x == 0.0 {
                return Ok(0.0);
            }
            if x == f64::INFINITY {
                return Ok(f64::INFINITY);
            }
            let guess = if x < -0.32 {
                let p = branch_point_p(x);
                -1.0 + p - p * p / 3.0 + 11.0 / 72.0 * p * p * p
            } else if x < 3.0 {
                let l = x.ln_1p();
                l * (1.0 - l.ln_1p() / (2.0 + l))
            } else {
                let l1 = x.ln();
                let l2 = l1.ln();
                l1 - l2 + l2 / l1
            };
            Ok(halley(x, guess))
        }
        Branch::Lower => {
            if x >= 0.0 {
                return Err(out_of_domain());
            }
            let guess = if x < -0.25 {
                let p = branch_point_p(x);
                -1.0 - p - p * p / 3.0 - 11.0 / 72.0 * p * p * p
            } else {
                let l1 = (-x).ln();
                let l2 = (-l1).ln();
                l1 - l2 + l2 / l1
            };
            Ok(halley(x, guess).min(-1.0))
        }
    }
}

fn branch_point_p(x: f64) -> f64 {
    // e x + 1 split to limit cancellation near the branch point
    let t = std::f64::consts::E * x + 1.0;
    (2.0 * t.max(0.0)).sqrt()
}

fn halley(x: f64, mut w: f64) -> f64 {
    for _ in 0..MAX_ITER {
        let ew = w.exp();
        let f = w * ew - x;
        if f == 0.0 {
            break;
        }
        let wp1 = w + 1.0;
        let denom = ew * wp1 - (w + 2.0) * f / (2.0 * wp1);
        if denom == 0.0 || !denom.is_finite() {
            break;
        }
        let next = w - f / denom;
        if !next.is_finite() {
            break;
        }
        let done = (next - w).abs() <= 4.0 * f64::EPSILON * next.abs().max(1e-300);
        w = next;
        if done {
            break;
        }
    }
    w
}

/// Principal `W(e^l)` without forming `e^l`, for arguments that would overflow.
pub fn lambert_w0_of_exp(l: f64) -> Result<f64> {
    if l < 500.0 {
        return lambert_w(l.exp(), Branch::Principal);
    }
    // w + ln w = l
    let mut w = l - l.ln();
    for _ in 0..MAX_ITER {
        let g = w + w.ln() - l;
        let next = w - g / (1.0 + 1.0 / w);
        let done = (next - w).abs() <= 4.0 * f64::EPSILON * next.abs();
        w = next;
        if done {
            break;
        }
    }
    Ok(w)
}
