use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Sign of the `d(d-1)|grad f|^2 / f^2` term in the warped scalar curvature.
///
/// `Minus` is the standard warped-product formula and the one the reduced
/// soliton equations are built on. `Plus` reproduces the alternative display
/// so the two can be compared.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SignVariant {
    Plus,
    #[default]
    Minus,
}

impl SignVariant {
    pub fn factor(self) -> f64 {
        match self {
            SignVariant::Plus => 1.0,
            SignVariant::Minus => -1.0,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            SignVariant::Plus => "plus",
            SignVariant::Minus => "minus",
        }
    }
}

impl std::str::FromStr for SignVariant {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "plus" => Ok(Self::Plus),
            "minus" => Ok(Self::Minus),
            other => Err(Error::InvalidArgument(format!(
                "sign variant `{other}` (expected plus|minus)"
            ))),
        }
    }
}

/// Scalar curvature of `B x_f F` with `S_F = lambda_F`:
/// `S = S_B + lambda_F/f^2 - 2d lap(f)/f -+ d(d-1)|grad f|^2/f^2`.
#[allow(clippy::too_many_arguments)]
pub fn warped_scalar_curvature(
    s_base: f64,
    f_value: f64,
    laplacian_f: f64,
    gradsq_f: f64,
    lambda_f: f64,
    d: usize,
    sign: SignVariant,
    xi: f64,
) -> Result<f64> {
    if f_value <= 0.0 {
        return Err(Error::NonPositive {
            what: "warping function f",
            value: f_value,
            xi,
        });
    }
    if d == 0 {
        return Err(Error::InvalidArgument("fiber dimension d must be >= 1".into()));
    }
    let d = d as f64;
    let f2 = f_value * f_value;
    Ok(s_base + lambda_f / f2 - 2.0 * d * laplacian_f / f_value
        + sign.factor() * d * (d - 1.0) * gradsq_f / f2)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn product_metric_cases() {
        let s = warped_scalar_curvature(1.5, 1.0, 0.0, 0.0, 2.0, 3, SignVariant::Minus, 0.0).unwrap();
        assert_eq!(s, 3.5);
        let s = warped_scalar_curvature(1.5, 1.0, 0.0, 0.0, 0.0, 3, SignVariant::Minus, 0.0).unwrap();
        assert_eq!(s, 1.5);
    }

    #[test]
    fn sign_variants_differ_by_gradient_term() {
        let m = warped_scalar_curvature(0.0, 2.0, 0.5, 3.0, 0.0, 3, SignVariant::Minus, 0.0).unwrap();
        let p = warped_scalar_curvature(0.0, 2.0, 0.5, 3.0, 0.0, 3, SignVariant::Plus, 0.0).unwrap();
        assert!((p - m - 2.0 * 6.0 * 3.0 / 4.0).abs() < 1e-15);
    }

    #[test]
    fn rejects_nonpositive_warping() {
        assert!(warped_scalar_curvature(0.0, 0.0, 0.0, 0.0, 0.0, 1, SignVariant::Minus, 0.0).is_err());
        assert!(warped_scalar_curvature(0.0, 1.0, 0.0, 0.0, 0.0, 0, SignVariant::Minus, 0.0).is_err());
    }
}
