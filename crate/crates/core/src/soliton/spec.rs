use crate::error::{Error, Result};
use crate::geometry::{Domain, Profile, ProfileKind, SignVariant, SignatureSpec, TranslationDirection};

/// Soliton constant, or a base function for almost solitons.
#[derive(Debug, Clone)]
pub enum Rho {
    Constant(f64),
    Field(Profile),
}

impl Rho {
    pub fn at(&self, xi: f64) -> Result<f64> {
        match self {
            Rho::Constant(c) => Ok(*c),
            Rho::Field(p) => p.value(xi),
        }
    }

    pub fn constant(&self) -> Option<f64> {
        match self {
            Rho::Constant(c) => Some(*c),
            Rho::Field(_) => None,
        }
    }
}

/// Candidate `(R^n, phi^-2 delta) x_f (F^d, g_F)` with potential `h`.
#[derive(Debug, Clone)]
pub struct WarpedSolitonSpec {
    pub sig: SignatureSpec,
    pub dir: TranslationDirection,
    pub d: usize,
    pub rho: Rho,
    pub lambda_f: f64,
    pub phi: Profile,
    pub f: Profile,
    pub h: Profile,
    pub domain: Domain,
    pub sign: SignVariant,
}

impl WarpedSolitonSpec {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        sig: SignatureSpec,
        dir: TranslationDirection,
        d: usize,
        rho: f64,
        lambda_f: f64,
        phi: Profile,
        f: Profile,
        h: Profile,
        domain: Domain,
    ) -> Result<Self> {
        Self::with_rho(sig, dir, d, Rho::Constant(rho), lambda_f, phi, f, h, domain)
    }

    #[allow(clippy::too_many_arguments)]
    pub fn with_rho(
        sig: SignatureSpec,
        dir: TranslationDirection,
        d: usize,
        rho: Rho,
        lambda_f: f64,
        phi: Profile,
        f: Profile,
        h: Profile,
        domain: Domain,
    ) -> Result<Self> {
        if d == 0 {
            return Err(Error::InvalidArgument("fiber dimension d must be >= 1".into()));
        }
        if dir.alpha().len() != sig.n() {
            return Err(Error::DimensionMismatch {
                expected: sig.n(),
                got: dir.alpha().len(),
            });
        }
        if let Rho::Constant(r) = rho {
            if !r.is_finite() {
                return Err(Error::InvalidArgument("rho must be finite".into()));
            }
        }
        if !lambda_f.is_finite() {
            return Err(Error::InvalidArgument("lambda_F must be finite".into()));
        }
        Domain::new(domain.lo, domain.hi)?;
        Ok(Self {
            sig,
            dir,
            d,
            rho,
            lambda_f,
            phi,
            f,
            h,
            domain,
            sign: SignVariant::Minus,
        })
    }

    pub fn n(&self) -> usize {
        self.sig.n()
    }

    pub fn with_sign(mut self, sign: SignVariant) -> Self {
        self.sign = sign;
        self
    }

    pub fn has_numeric_profiles(&self) -> bool {
        let mut kinds = vec![self.phi.kind(), self.f.kind(), self.h.kind()];
        if let Rho::Field(p) = &self.rho {
            kinds.push(p.kind());
        }
        kinds.contains(&ProfileKind::NumericCallback)
    }

    /// 1e-8 for analytic profiles, 1e-4 when any profile is a numeric callback.
    pub fn default_tolerance(&self) -> f64 {
        if self.has_numeric_profiles() {
            1e-4
        } else {
            1e-8
        }
    }
}
