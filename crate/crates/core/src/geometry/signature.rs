use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Diagonal semi-Euclidean signature `delta = sum eps_i dx_i^2` on R^n.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SignatureSpec {
    epsilon: Vec<i8>,
}

impl SignatureSpec {
    pub fn new(epsilon: Vec<i8>) -> Result<Self> {
        if epsilon.len() < 3 {
            return Err(Error::InvalidSignature(format!(
                "dimension n = {} but n >= 3 is required",
                epsilon.len()
            )));
        }
        if let Some(bad) = epsilon.iter().find(|e| **e != 1 && **e != -1) {
            return Err(Error::InvalidSignature(format!(
                "entry {bad} is not -1 or +1"
            )));
        }
        Ok(Self { epsilon })
    }

    /// Accepts real-valued entries as they appear in spec documents.
    pub fn from_f64(values: &[f64]) -> Result<Self> {
        let eps = values
            .iter()
            .map(|v| match *v {
                v if v == 1.0 => Ok(1),
                v if v == -1.0 => Ok(-1),
                v => Err(Error::InvalidSignature(format!("entry {v} is not -1 or +1"))),
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(eps)
    }

    pub fn euclidean(n: usize) -> Result<Self> {
        Self::new(vec![1; n])
    }

    /// Lorentzian signature with the first coordinate timelike.
    pub fn lorentzian(n: usize) -> Result<Self> {
        let mut eps = vec![1; n];
        if let Some(first) = eps.first_mut() {
            *first = -1;
        }
        Self::new(eps)
    }

    pub fn n(&self) -> usize {
        self.epsilon.len()
    }

    pub fn epsilon(&self) -> &[i8] {
        &self.epsilon
    }

    #[inline]
    pub fn eps(&self, i: usize) -> f64 {
        f64::from(self.epsilon[i])
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CausalClass {
    Spacelike,
    Timelike,
    Lightlike,
}

impl CausalClass {
    pub fn as_str(&self) -> &'static str {
        match self {
            CausalClass::Spacelike => "spacelike",
            CausalClass::Timelike => "timelike",
            CausalClass::Lightlike => "lightlike",
        }
    }
}

/// Returns `sum eps_i alpha_i^2`.
pub fn signed_norm(alpha: &[f64], sig: &SignatureSpec) -> Result<f64> {
    if alpha.len() != sig.n() {
        return Err(Error::DimensionMismatch {
            expected: sig.n(),
            got: alpha.len(),
        });
    }
    Ok(alpha
        .iter()
        .enumerate()
        .map(|(i, a)| sig.eps(i) * a * a)
        .sum())
}

/// The vector `alpha` defining the invariant `xi = sum alpha_i x_i`.
#[derive(Debug, Clone, PartialEq)]
pub struct TranslationDirection {
    alpha: Vec<f64>,
    signed_norm: f64,
    causal_class: CausalClass,
}

impl TranslationDirection {
    pub fn new(alpha: Vec<f64>, sig: &SignatureSpec) -> Result<Self> {
        if alpha.iter().all(|a| *a == 0.0) {
            return Err(Error::DegenerateDirection);
        }
        if alpha.iter().any(|a| !a.is_finite()) {
            return Err(Error::InvalidArgument("alpha has non-finite entries".into()));
        }
        let norm = signed_norm(&alpha, sig)?;
        // exact thresholds: lightlike means the computed sum is exactly zero
        let causal_class = if norm == 0.0 {
            CausalClass::Lightlike
        } else if norm < 0.0 {
            CausalClass::Timelike
        } else {
            CausalClass::Spacelike
        };
        Ok(Self {
            alpha,
            signed_norm: norm,
            causal_class,
        })
    }

    pub fn alpha(&self) -> &[f64] {
        &self.alpha
    }

    pub fn signed_norm(&self) -> f64 {
        self.signed_norm
    }

    pub fn causal_class(&self) -> CausalClass {
        self.causal_class
    }

    pub fn is_lightlike(&self) -> bool {
        self.causal_class == CausalClass::Lightlike
    }

    /// `xi(x) = alpha . x`
    pub fn xi(&self, x: &[f64]) -> f64 {
        self.alpha.iter().zip(x).map(|(a, x)| a * x).sum()
    }

    /// Same profiles, direction `c * alpha`.
    pub fn scaled(&self, c: f64, sig: &SignatureSpec) -> Result<Self> {
        Self::new(self.alpha.iter().map(|a| a * c).collect(), sig)
    }
}
