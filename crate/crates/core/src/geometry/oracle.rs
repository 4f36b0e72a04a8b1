//! Finite-difference curvature oracle for an arbitrary metric field.
//!
//! This path never looks at the conformal structure: it samples the metric
//! matrix around a point, differentiates it numerically, and contracts
//! indices the textbook way. It is the independent reference the closed
//! forms in [`crate::geometry::conformal`] are checked against.
//!
//! Every derivative uses the O(step^2) central stencil followed by one level
//! of Richardson extrapolation (`(4 D(step/2) - D(step)) / 3`), so the
//! truncation error is O(step^4); round-off in the second derivatives grows
//! like `eps / step^2`. `step ~ 1e-3` relative to the scale on which the
//! metric varies is a good default.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::geometry::profile::Profile;
use crate::geometry::signature::{SignatureSpec, TranslationDirection};

/// Pivots smaller than this make the metric count as singular.
pub const PIVOT_THRESHOLD: f64 = 1e-12;

#[derive(Debug, Clone)]
pub struct FdCurvature {
    pub dim: usize,
    /// `Gamma^k_ij`, stored at `[k][i][j]`.
    pub christoffel: Vec<Vec<Vec<f64>>>,
    pub ricci: DMatrix<f64>,
    pub scalar: f64,
    pub metric: DMatrix<f64>,
    pub inverse: DMatrix<f64>,
}

impl FdCurvature {
    pub fn gamma(&self, k: usize, i: usize, j: usize) -> f64 {
        self.christoffel[k][i][j]
    }
}

fn invert(g: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let lu = g.clone().lu();
    let u = lu.u();
    let pivot = (0..u.nrows())
        .map(|i| u[(i, i)].abs())
        .fold(f64::INFINITY, f64::min);
    if pivot.is_nan() || pivot < PIVOT_THRESHOLD {
        return Err(Error::SingularMetric { pivot });
    }
    lu.try_inverse().ok_or(Error::SingularMetric { pivot })
}

fn sample<M>(metric: &M, p: &[f64]) -> Result<DMatrix<f64>>
where
    M: Fn(&[f64]) -> DMatrix<f64>,
{
    let g = metric(p);
    if g.nrows() != p.len() || g.ncols() != p.len() {
        return Err(Error::DimensionMismatch {
            expected: p.len(),
            got: g.nrows(),
        });
    }
    if g.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite {
            what: "metric sample",
            xi: f64::NAN,
        });
    }
    Ok(g)
}

fn shifted(p: &[f64], moves: &[(usize, f64)]) -> Vec<f64> {
    let mut q = p.to_vec();
    for &(l, h) in moves {
        q[l] += h;
    }
    q
}

fn richardson<T, F>(step: f64, stencil: F) -> Result<T>
where
    F: Fn(f64) -> Result<T>,
    T: std::ops::Mul<f64, Output = T> + std::ops::Sub<Output = T>,
{
    let coarse = stencil(step)?;
    let fine = stencil(0.5 * step)?;
    Ok(fine * (4.0 / 3.0) - coarse * (1.0 / 3.0))
}

/// `d_l g` for every coordinate `l`.
fn metric_first_derivatives<M>(metric: &M, p: &[f64], step: f64) -> Result<Vec<DMatrix<f64>>>
where
    M: Fn(&[f64]) -> DMatrix<f64>,
{
    (0..p.len())
        .map(|l| {
            richardson(step, |h| {
                let plus = sample(metric, &shifted(p, &[(l, h)]))?;
                let minus = sample(metric, &shifted(p, &[(l, -h)]))?;
                Ok((plus - minus) * (0.5 / h))
            })
        })
        .collect()
}

/// `d_l d_m g`, indexed `[l][m]`.
fn metric_second_derivatives<M>(
    metric: &M,
    p: &[f64],
    g0: &DMatrix<f64>,
    step: f64,
) -> Result<Vec<Vec<DMatrix<f64>>>>
where
    M: Fn(&[f64]) -> DMatrix<f64>,
{
    let m = p.len();
    let mut out = vec![vec![DMatrix::zeros(m, m); m]; m];
    for l in 0..m {
        for k in l..m {
            let d = if l == k {
                richardson(step, |h| {
                    let plus = sample(metric, &shifted(p, &[(l, h)]))?;
                    let minus = sample(metric, &shifted(p, &[(l, -h)]))?;
                    Ok((plus + minus - g0 * 2.0) * (1.0 / (h * h)))
                })?
            } else {
                richardson(step, |h| {
                    let pp = sample(metric, &shifted(p, &[(l, h), (k, h)]))?;
                    let pm = sample(metric, &shifted(p, &[(l, h), (k, -h)]))?;
                    let mp = sample(metric, &shifted(p, &[(l, -h), (k, h)]))?;
                    let mm = sample(metric, &shifted(p, &[(l, -h), (k, -h)]))?;
                    Ok((pp - pm - mp + mm) * (0.25 / (h * h)))
                })?
            };
            out[k][l] = d.clone();
            out[l][k] = d;
        }
    }
    Ok(out)
}

/// Christoffel symbols, Ricci tensor and scalar curvature at `point`.
pub fn fd_curvature_oracle<M>(metric: &M, point: &[f64], step: f64) -> Result<FdCurvature>
where
    M: Fn(&[f64]) -> DMatrix<f64>,
{
    if !(step > 0.0 && step.is_finite()) {
        return Err(Error::InvalidArgument(format!("step must be positive, got {step}")));
    }
    let m = point.len();
    let g0 = sample(metric, point)?;
    let ginv = invert(&g0)?;
    let dg = metric_first_derivatives(metric, point, step)?;
    let ddg = metric_second_derivatives(metric, point, &g0, step)?;

    // lowered symbols Gamma_{l i j} = (d_i g_jl + d_j g_il - d_l g_ij) / 2
    let lowered = |dg: &dyn Fn(usize, usize, usize) -> f64, l: usize, i: usize, j: usize| {
        0.5 * (dg(i, j, l) + dg(j, i, l) - dg(l, i, j))
    };
    let first = |a: usize, r: usize, c: usize| dg[a][(r, c)];

    let mut gamma = vec![vec![vec![0.0; m]; m]; m];
    for k in 0..m {
        for i in 0..m {
            for j in 0..m {
                gamma[k][i][j] = (0..m)
                    .map(|l| ginv[(k, l)] * lowered(&first, l, i, j))
                    .sum();
            }
        }
    }

    // d_a Gamma^k_ij = d_a(g^kl) Gamma_lij + g^kl d_a Gamma_lij
    let dginv: Vec<DMatrix<f64>> = dg.iter().map(|d| -(&ginv * d * &ginv)).collect();
    let mut dgamma = vec![vec![vec![vec![0.0; m]; m]; m]; m]; // [a][k][i][j]
    for a in 0..m {
        let second = |x: usize, r: usize, c: usize| ddg[a][x][(r, c)];
        for k in 0..m {
            for i in 0..m {
                for j in 0..m {
                    dgamma[a][k][i][j] = (0..m)
                        .map(|l| {
                            dginv[a][(k, l)] * lowered(&first, l, i, j)
                                + ginv[(k, l)] * lowered(&second, l, i, j)
                        })
                        .sum();
                }
            }
        }
    }

    // R_ij = d_k G^k_ij - d_j G^k_ik + G^k_kl G^l_ij - G^k_jl G^l_ik
    let mut ricci = DMatrix::zeros(m, m);
    for i in 0..m {
        for j in 0..m {
            let mut r = 0.0;
            for k in 0..m {
                r += dgamma[k][k][i][j] - dgamma[j][k][i][k];
                for l in 0..m {
                    r += gamma[k][k][l] * gamma[l][i][j] - gamma[k][j][l] * gamma[l][i][k];
                }
            }
            ricci[(i, j)] = r;
        }
    }
    let scalar = (0..m)
        .flat_map(|i| (0..m).map(move |j| (i, j)))
        .map(|(i, j)| ginv[(i, j)] * ricci[(i, j)])
        .sum();

    Ok(FdCurvature {
        dim: m,
        christoffel: gamma,
        ricci,
        scalar,
        metric: g0,
        inverse: ginv,
    })
}

/// Hessian and Laplacian of a scalar field with respect to the sampled metric,
/// `Hess_ij = d_i d_j u - Gamma^k_ij d_k u`.
pub fn fd_hessian_oracle<M, U>(
    metric: &M,
    field: &U,
    point: &[f64],
    step: f64,
) -> Result<(DMatrix<f64>, f64)>
where
    M: Fn(&[f64]) -> DMatrix<f64>,
    U: Fn(&[f64]) -> f64,
{
    let curv = fd_curvature_oracle(metric, point, step)?;
    let m = point.len();
    let u = |q: &[f64]| field(q);
    let u0 = u(point);
    let grad: Vec<f64> = (0..m)
        .map(|l| {
            richardson(step, |h| {
                Ok(Scalar((u(&shifted(point, &[(l, h)])) - u(&shifted(point, &[(l, -h)]))) / (2.0 * h)))
            })
            .map(|s| s.0)
        })
        .collect::<Result<_>>()?;
    let mut hess = DMatrix::zeros(m, m);
    for i in 0..m {
        for j in i..m {
            let dd = if i == j {
                richardson(step, |h| {
                    Ok(Scalar(
                        (u(&shifted(point, &[(i, h)])) - 2.0 * u0 + u(&shifted(point, &[(i, -h)]))) / (h * h),
                    ))
                })?
                .0
            } else {
                richardson(step, |h| {
                    Ok(Scalar(
                        (u(&shifted(point, &[(i, h), (j, h)])) - u(&shifted(point, &[(i, h), (j, -h)]))
                            - u(&shifted(point, &[(i, -h), (j, h)]))
                            + u(&shifted(point, &[(i, -h), (j, -h)])))
                            / (4.0 * h * h),
                    ))
                })?
                .0
            };
            let v = dd - (0..m).map(|k| curv.gamma(k, i, j) * grad[k]).sum::<f64>();
            hess[(i, j)] = v;
            hess[(j, i)] = v;
        }
    }
    let lap = (0..m)
        .flat_map(|i| (0..m).map(move |j| (i, j)))
        .map(|(i, j)| curv.inverse[(i, j)] * hess[(i, j)])
        .sum();
    Ok((hess, lap))
}

#[derive(Clone, Copy)]
struct Scalar(f64);

impl std::ops::Mul<f64> for Scalar {
    type Output = Scalar;
    fn mul(self, rhs: f64) -> Scalar {
        Scalar(self.0 * rhs)
    }
}

impl std::ops::Sub for Scalar {
    type Output = Scalar;
    fn sub(self, rhs: Scalar) -> Scalar {
        Scalar(self.0 - rhs.0)
    }
}

/// Metric sampler for `g_B = phi(alpha . x)^-2 delta` on R^n.
pub fn conformal_metric_sampler(
    phi: Profile,
    dir: TranslationDirection,
    sig: SignatureSpec,
) -> impl Fn(&[f64]) -> DMatrix<f64> {
    move |x: &[f64]| {
        let p = phi.value(dir.xi(x)).unwrap_or(f64::NAN);
        DMatrix::from_fn(sig.n(), sig.n(), |i, j| {
            if i == j {
                sig.eps(i) / (p * p)
            } else {
                0.0
            }
        })
    }
}

/// Metric sampler for the warped product `phi^-2 delta + f^2 g_0` on
/// R^n x R^d with the flat fiber metric `g_0`.
pub fn warped_metric_sampler(
    phi: Profile,
    f: Profile,
    dir: TranslationDirection,
    sig: SignatureSpec,
    d: usize,
) -> impl Fn(&[f64]) -> DMatrix<f64> {
    let n = sig.n();
    move |x: &[f64]| {
        let xi = dir.xi(&x[..n]);
        let p = phi.value(xi).unwrap_or(f64::NAN);
        let w = f.value(xi).unwrap_or(f64::NAN);
        DMatrix::from_fn(n + d, n + d, |i, j| match (i == j, i < n) {
            (false, _) => 0.0,
            (true, true) => sig.eps(i) / (p * p),
            (true, false) => w * w,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::conformal::{christoffel_conformal, conformal_scalar_curvature};
    use crate::geometry::profile::Domain;

    #[test]
    fn constant_metric_is_flat() {
        let metric = |_: &[f64]| DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![-1.0, 2.0, 3.0]));
        let c = fd_curvature_oracle(&metric, &[0.1, 0.2, 0.3], 1e-3).unwrap();
        assert!(c.scalar.abs() < 1e-8);
    }

    #[test]
    fn round_two_sphere() {
        let metric = |p: &[f64]| {
            let s = p[0].sin();
            DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![1.0, s * s]))
        };
        let c = fd_curvature_oracle(&metric, &[std::f64::consts::FRAC_PI_4, 0.3], 1e-3).unwrap();
        assert!((c.scalar - 2.0).abs() < 1e-4, "scalar = {}", c.scalar);
    }

    #[test]
    fn singular_metric_rejected() {
        let metric = |_: &[f64]| DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![1.0, 0.0, 1.0]));
        assert!(matches!(
            fd_curvature_oracle(&metric, &[0.0; 3], 1e-3),
            Err(Error::SingularMetric { .. })
        ));
        let ok = |_: &[f64]| DMatrix::<f64>::identity(3, 3);
        assert!(fd_curvature_oracle(&ok, &[0.0; 3], 0.0).is_err());
    }

    #[test]
    fn conformal_sqrt_profile_matches_closed_form() {
        let sig = SignatureSpec::euclidean(5).unwrap();
        let dir = TranslationDirection::new(vec![1.0, 0.0, 0.0, 0.0, 0.0], &sig).unwrap();
        let phi = Profile::expression("sqrt(xi/20)", Domain::new(0.0, f64::INFINITY).unwrap()).unwrap();
        let sampler = conformal_metric_sampler(phi.clone(), dir.clone(), sig.clone());
        for xi in [1.0, 4.0, 9.5] {
            let point = [xi, 0.3, -0.2, 0.1, 0.0];
            let c = fd_curvature_oracle(&sampler, &point, 1e-3).unwrap();
            let closed = conformal_scalar_curvature(&phi, &dir, &sig, xi).unwrap();
            assert!((c.scalar - closed).abs() <= 1e-5 * closed.abs(), "{} vs {}", c.scalar, closed);
        }
    }

    #[test]
    fn exponential_factor_christoffel_matches_oracle() {
        let sig = SignatureSpec::new(vec![-1, 1, 1]).unwrap();
        let dir = TranslationDirection::new(vec![0.4, 1.0, -0.7], &sig).unwrap();
        let phi = Profile::expression("exp(0.6*xi)", Domain::real_line()).unwrap();
        let sampler = conformal_metric_sampler(phi.clone(), dir.clone(), sig.clone());
        let point = [0.2, -0.1, 0.5];
        let xi = dir.xi(&point);
        let c = fd_curvature_oracle(&sampler, &point, 1e-3).unwrap();
        for k in 0..3 {
            for i in 0..3 {
                for j in 0..3 {
                    let closed = christoffel_conformal(&phi, &dir, &sig, (i, j, k), xi).unwrap();
                    assert!((c.gamma(k, i, j) - closed).abs() < 1e-6);
                }
            }
        }
    }
}
