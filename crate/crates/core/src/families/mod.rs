//! Explicit solution families and the example catalog.

pub mod catalog;
pub mod lambert;
pub mod lightlike;
pub mod portrait;
pub mod quadrature;
pub mod roots;
pub mod thm15;
pub mod thm16;
pub mod thm17;

use crate::error::{Error, Result};
use crate::geometry::{SignatureSpec, TranslationDirection};

pub use lambert::{lambert_w, Branch};
pub use lightlike::{almost_soliton_lightlike, family_thm18};
pub use thm15::{family_thm15, QVariant, Thm15, Thm15Solution};
pub use thm16::{family_thm16, thm16_antiderivative, Thm16};
pub use thm17::{family_thm17, riccati_general_solution, riccati_residual, Thm17};

/// Base signature, translation direction and fiber dimension.
#[derive(Debug, Clone)]
pub struct BaseSetup {
    pub sig: SignatureSpec,
    pub dir: TranslationDirection,
    pub d: usize,
}

impl BaseSetup {
    pub fn new(epsilon: Vec<i8>, alpha: Vec<f64>, d: usize) -> Result<Self> {
        let sig = SignatureSpec::new(epsilon)?;
        let dir = TranslationDirection::new(alpha, &sig)?;
        if d == 0 {
            return Err(Error::InvalidArgument("fiber dimension d must be >= 1".into()));
        }
        Ok(Self { sig, dir, d })
    }

    /// Euclidean `R^n` with `alpha = e_1`.
    pub fn euclidean_axis(n: usize, d: usize) -> Result<Self> {
        let mut alpha = vec![0.0; n];
        alpha[0] = 1.0;
        Self::new(vec![1; n], alpha, d)
    }

    pub fn n(&self) -> usize {
        self.sig.n()
    }

    pub fn signed_norm(&self) -> f64 {
        self.dir.signed_norm()
    }

    fn require_total_dimension(&self, total: usize, family: &str) -> Result<()> {
        if self.n() + self.d != total {
            return Err(Error::Precondition(format!(
                "{family} requires n + d = {total}, got n = {}, d = {}",
                self.n(),
                self.d
            )));
        }
        Ok(())
    }

    fn require_non_null(&self, family: &str) -> Result<()> {
        if self.dir.is_lightlike() {
            return Err(Error::Precondition(format!(
                "{family} requires a spacelike or timelike direction (||alpha||^2 != 0)"
            )));
        }
        Ok(())
    }

    fn require_lightlike(&self, family: &str) -> Result<()> {
        if !self.dir.is_lightlike() {
            return Err(Error::Precondition(format!(
                "{family} requires a lightlike direction (||alpha||^2 = 0), got {}",
                self.signed_norm()
            )));
        }
        Ok(())
    }
}
