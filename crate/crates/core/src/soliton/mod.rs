//! Residual checks, classification and certification of warped-product candidates.

pub mod certify;
pub mod classify;
pub mod residuals;
pub mod spec;

pub use certify::{certify, certify_with, CertifyOptions, EquationSet, EquationStats, ResidualReport, Verdict};
pub use classify::{classify, lightlike_guard, Classification, Guard, RhoClass};
pub use residuals::{
    full_tensor_residual, full_tensor_residual_at_xi, lemma_identities, reduced_residuals, LemmaIdentities,
    ReducedResiduals,
};
pub use spec::{Rho, WarpedSolitonSpec};
