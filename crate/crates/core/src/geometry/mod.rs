//! Conformal semi-Euclidean base geometry and warped-product curvature.

pub mod conformal;
pub mod oracle;
pub mod profile;
pub mod signature;
pub mod warped;

pub use conformal::{
    christoffel_conformal, conformal_hessian, conformal_laplacian_and_pairings,
    conformal_scalar_curvature, Pairings,
};
pub use oracle::{fd_curvature_oracle, fd_hessian_oracle, FdCurvature};
pub use profile::{Domain, Jet, Profile, ProfileKind};
pub use signature::{signed_norm, CausalClass, SignatureSpec, TranslationDirection};
pub use warped::{warped_scalar_curvature, SignVariant};
