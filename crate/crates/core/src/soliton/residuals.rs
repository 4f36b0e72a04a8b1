//! Residuals of the gradient Yamabe soliton equation `(S - rho) g = Hess(h)`
//! on the warped product, in reduced ODE form and as a full tensor.

use nalgebra::DMatrix;

use crate::error::Result;
use crate::geometry::conformal::{hessian_from_jets, pairings_from_jets, scalar_curvature_from_jet};
use crate::geometry::{warped_scalar_curvature, Jet, Pairings};
use crate::soliton::spec::WarpedSolitonSpec;

/// Profile jets and derived base quantities at one point.
#[derive(Debug, Clone, Copy)]
pub struct PointData {
    pub xi: f64,
    pub phi: Jet,
    pub f: Jet,
    pub h: Jet,
    pub rho: f64,
    pub s_base: f64,
    pub pairings: Pairings,
    pub s_warped: f64,
}

impl PointData {
    pub fn at(spec: &WarpedSolitonSpec, xi: f64) -> Result<Self> {
        spec.domain.check(xi)?;
        let phi = spec.phi.positive_jet(xi, "conformal factor phi")?;
        let f = spec.f.positive_jet(xi, "warping function f")?;
        let h = spec.h.jet(xi)?;
        let rho = spec.rho.at(xi)?;
        let norm = spec.dir.signed_norm();
        let s_base = scalar_curvature_from_jet(phi, norm, spec.n());
        let pairings = pairings_from_jets(f, h, phi, norm, spec.n());
        let s_warped = warped_scalar_curvature(
            s_base,
            f.value,
            pairings.laplacian_f,
            pairings.gradsq_f,
            spec.lambda_f,
            spec.d,
            spec.sign,
            xi,
        )?;
        Ok(Self {
            xi,
            phi,
            f,
            h,
            rho,
            s_base,
            pairings,
            s_warped,
        })
    }
}

/// Residuals (LHS - RHS) of the reduced system; all vanish on solutions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ReducedResiduals {
    /// `||alpha||^2 != 0`
    NonNull {
        /// `h'' + 2 phi' h' / phi`
        potential: f64,
        /// diagonal Hessian equation, with `+ phi phi' h'`
        diagonal_hessian: f64,
        /// fiber equation, with `- phi^2 f' h' / f`
        diagonal_fiber: f64,
    },
    /// `||alpha||^2 = 0`
    Null {
        potential: f64,
        /// `rho - lambda_F / f^2`
        light: f64,
    },
}

impl ReducedResiduals {
    pub fn potential(&self) -> f64 {
        match self {
            ReducedResiduals::NonNull { potential, .. } | ReducedResiduals::Null { potential, .. } => *potential,
        }
    }

    /// `(equation id, residual)` pairs.
    pub fn entries(&self) -> Vec<(&'static str, f64)> {
        match *self {
            ReducedResiduals::NonNull {
                potential,
                diagonal_hessian,
                diagonal_fiber,
            } => vec![
                (EQ_POTENTIAL, potential),
                (EQ_DIAGONAL_HESSIAN, diagonal_hessian),
                (EQ_DIAGONAL_FIBER, diagonal_fiber),
            ],
            ReducedResiduals::Null { potential, light } => {
                vec![(EQ_POTENTIAL, potential), (EQ_LIGHTLIKE, light)]
            }
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.entries()
            .into_iter()
            .map(|(_, r)| r.abs())
            .fold(0.0, f64::max)
    }
}

pub const EQ_POTENTIAL: &str = "h_equation";
pub const EQ_DIAGONAL_HESSIAN: &str = "diagonal_hessian";
pub const EQ_DIAGONAL_FIBER: &str = "diagonal_gradient";
pub const EQ_LIGHTLIKE: &str = "lightlike_balance";
pub const EQ_FULL_TENSOR: &str = "full_tensor";

pub fn reduced_from_point(spec: &WarpedSolitonSpec, p: &PointData) -> ReducedResiduals {
    let (phi, f, h) = (p.phi, p.f, p.h);
    let potential = h.d2 + 2.0 * phi.d1 * h.d1 / phi.value;
    let rhs = p.rho - spec.lambda_f / (f.value * f.value);
    if spec.dir.is_lightlike() {
        return ReducedResiduals::Null {
            potential,
            light: rhs,
        };
    }
    let n = spec.n() as f64;
    let d = spec.d as f64;
    let norm = spec.dir.signed_norm();
    let common = (n - 1.0) * (2.0 * phi.value * phi.d2 - n * phi.d1 * phi.d1)
        - 2.0 * d / f.value * (phi.value * phi.value * f.d2 - (n - 2.0) * phi.value * phi.d1 * f.d1)
        + spec.sign.factor() * d * (d - 1.0) / (f.value * f.value) * phi.value * phi.value * f.d1 * f.d1;
    ReducedResiduals::NonNull {
        potential,
        diagonal_hessian: norm * (common + phi.d1 * h.d1 * phi.value) - rhs,
        diagonal_fiber: norm * (common - phi.value * phi.value / f.value * f.d1 * h.d1) - rhs,
    }
}

pub fn reduced_residuals(spec: &WarpedSolitonSpec, xi: f64) -> Result<ReducedResiduals> {
    let p = PointData::at(spec, xi)?;
    Ok(reduced_from_point(spec, &p))
}

/// `(S - rho) g_ab - Hess(h)_ab` over the `(n+d) x (n+d)` index blocks, with
/// the fiber metric taken as `fiber_block_scale * I_d`.
pub fn tensor_from_point(spec: &WarpedSolitonSpec, p: &PointData, fiber_block_scale: f64) -> DMatrix<f64> {
    let n = spec.n();
    let m = n + spec.d;
    let shifted = p.s_warped - p.rho;
    let phi2 = p.phi.value * p.phi.value;
    // fiber block: Hess(h)(V,W) = f <grad f, grad h> g_F(V,W)
    let fiber = (shifted * p.f.value * p.f.value - p.f.value * p.pairings.pairing_fh) * fiber_block_scale;
    DMatrix::from_fn(m, m, |a, b| match (a < n, b < n) {
        (true, true) => {
            let g = if a == b { spec.sig.eps(a) / phi2 } else { 0.0 };
            shifted * g - hessian_from_jets(p.h, p.phi, &spec.dir, &spec.sig, a, b)
        }
        (false, false) if a == b => fiber,
        _ => 0.0,
    })
}

pub fn full_tensor_residual(
    spec: &WarpedSolitonSpec,
    base_point: &[f64],
    fiber_block_scale: f64,
) -> Result<DMatrix<f64>> {
    if base_point.len() != spec.n() {
        return Err(crate::error::Error::DimensionMismatch {
            expected: spec.n(),
            got: base_point.len(),
        });
    }
    let xi = spec.dir.xi(base_point);
    let p = PointData::at(spec, xi)?;
    Ok(tensor_from_point(spec, &p, fiber_block_scale))
}

/// Residual tensor at a value of `xi` (every base point on that level set
/// gives the same components).
pub fn full_tensor_residual_at_xi(spec: &WarpedSolitonSpec, xi: f64) -> Result<DMatrix<f64>> {
    let p = PointData::at(spec, xi)?;
    Ok(tensor_from_point(spec, &p, 1.0))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LemmaIdentities {
    /// Soliton function of the induced almost soliton on the base.
    pub lambda: f64,
    /// `S_B - <grad f, grad h>/f - lambda`
    pub scalar_identity: f64,
    /// `lap(h) - <grad w, grad h>` with `w = s ln f`
    pub weighted_harmonicity: f64,
}

pub fn lemma_from_point(spec: &WarpedSolitonSpec, p: &PointData, weight_exponent: f64) -> LemmaIdentities {
    let d = spec.d as f64;
    let f = p.f.value;
    let lambda = -spec.lambda_f / (f * f) + 2.0 * d * p.pairings.laplacian_f / f
        - spec.sign.factor() * d * (d - 1.0) * p.pairings.gradsq_f / (f * f)
        + p.rho;
    let norm = spec.dir.signed_norm();
    let lap_h = pairings_from_jets(p.h, p.h, p.phi, norm, spec.n()).laplacian_f;
    LemmaIdentities {
        lambda,
        scalar_identity: p.s_base - p.pairings.pairing_fh / f - lambda,
        weighted_harmonicity: lap_h - weight_exponent * p.pairings.pairing_fh / f,
    }
}

/// Lemma identities with `w = ln f^s`; `s = n` is the trace of the base equation.
pub fn lemma_identities(spec: &WarpedSolitonSpec, xi: f64, weight_exponent: Option<f64>) -> Result<LemmaIdentities> {
    let p = PointData::at(spec, xi)?;
    Ok(lemma_from_point(spec, &p, weight_exponent.unwrap_or(spec.n() as f64)))
}
