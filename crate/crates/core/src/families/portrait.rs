//! Phase portrait of the `n + d = 6`, `lambda_F != 0` profile ODE
//! `phi^2 phi'' - 3 phi phi'^2 + p phi' + q phi^3 = 0` in the `(phi, phi')` plane.

use std::io::Write;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::families::{BaseSetup, Thm15};
use crate::ode::{integrate, Controls, DenseSampler, OdeStatus};

/// Hyperbolic fiber of sectional curvature -1 in dimension 3.
pub const DEFAULT_LAMBDA_F: f64 = -6.0;

/// Parameters for `R^3 x H^3` with `k1 = k2 = 1`, `k3 = 0`.
pub fn example1_params(lambda_f: f64) -> Thm15 {
    let setup = BaseSetup::euclidean_axis(3, 3).expect("valid Euclidean setup");
    Thm15::new(setup, 1.0, 1.0, 0.0, 0.0, lambda_f)
}

#[derive(Debug, Clone)]
pub struct PortraitOptions {
    /// Integration runs from `xi = 0` to `xi_end` (either sign).
    pub xi_end: f64,
    /// Uniform dense-output samples per trajectory.
    pub samples: usize,
    pub controls: Controls,
}

impl Default for PortraitOptions {
    fn default() -> Self {
        Self {
            xi_end: 2.0,
            samples: 101,
            controls: Controls::default(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub phi0: f64,
    pub dphi0: f64,
    /// `(xi, phi, phi')`; the last row is the terminal state.
    pub rows: Vec<[f64; 3]>,
    pub status: OdeStatus,
}

fn rhs(params: &Thm15) -> impl Fn(f64, &[f64], &mut [f64]) -> std::result::Result<(), OdeStatus> + '_ {
    move |_t, y, dy| {
        if y[0] <= 0.0 {
            return Err(OdeStatus::PositivityLoss);
        }
        dy[0] = y[1];
        dy[1] = params.ode_phi_dd(y[0], y[1]);
        Ok(())
    }
}

/// Residual of the ODE for a state and its second derivative.
pub fn ode_residual(params: &Thm15, phi: f64, dphi: f64, ddphi: f64) -> f64 {
    phi * phi * ddphi - 3.0 * phi * dphi * dphi + params.p() * dphi + params.q() * phi.powi(3)
}

fn is_stationary(params: &Thm15, phi: f64, dphi: f64) -> bool {
    dphi.abs() <= 1e-12 && params.ode_phi_dd(phi, dphi).abs() <= 1e-12 * phi.abs().max(1.0)
}

fn trajectory(params: &Thm15, phi0: f64, dphi0: f64, opts: &PortraitOptions) -> Result<Trajectory> {
    if is_stationary(params, phi0, dphi0) {
        return Ok(Trajectory {
            phi0,
            dphi0,
            rows: vec![[0.0, phi0, dphi0], [opts.xi_end, phi0, dphi0]],
            status: OdeStatus::Stationary,
        });
    }
    let mut sampler = DenseSampler::uniform(0.0, opts.xi_end, opts.samples.max(2));
    let out = integrate(rhs(params), 0.0, &[phi0, dphi0], opts.xi_end, &opts.controls, |s| {
        sampler.observe(s)
    })?;
    let mut rows: Vec<[f64; 3]> = sampler.samples.iter().map(|(t, y)| [*t, y[0], y[1]]).collect();
    if rows.last().map(|r| r[0]) != Some(out.t) {
        rows.push([out.t, out.y[0], out.y[1]]);
    }
    Ok(Trajectory {
        phi0,
        dphi0,
        rows,
        status: out.status,
    })
}

/// Integrates every initial condition independently. Blowup and loss of
/// positivity end a trajectory and are recorded in its status.
pub fn phase_portrait(params: &Thm15, initial: &[(f64, f64)], opts: &PortraitOptions) -> Result<Vec<Trajectory>> {
    if !(opts.xi_end.is_finite() && opts.xi_end != 0.0) {
        return Err(Error::InvalidArgument(format!("xi_end must be finite and nonzero, got {}", opts.xi_end)));
    }
    for &(p, dp) in initial {
        if !(p > 0.0 && p.is_finite() && dp.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "initial condition (phi0, dphi0) = ({p}, {dp}) needs finite values with phi0 > 0"
            )));
        }
    }
    initial
        .par_iter()
        .map(|&(p, dp)| trajectory(params, p, dp, opts))
        .collect()
}

/// Integrates to `xi1`, then back to `0`, and returns the distance from the
/// initial condition.
pub fn time_reversal_error(params: &Thm15, phi0: f64, dphi0: f64, xi1: f64, controls: &Controls) -> Result<f64> {
    let fwd = integrate(rhs(params), 0.0, &[phi0, dphi0], xi1, controls, |_| {})?;
    if fwd.status != OdeStatus::Completed {
        return Err(Error::Precondition(format!(
            "forward leg stopped with status {} at xi = {}",
            fwd.status.as_str(),
            fwd.t
        )));
    }
    let back = integrate(rhs(params), xi1, &fwd.y, 0.0, controls, |_| {})?;
    Ok((back.y[0] - phi0).abs().max((back.y[1] - dphi0).abs()))
}

/// CSV with header `xi,phi,dphi,status`. Each trajectory starts with a
/// `start` row; its last row carries the terminal status.
pub fn write_csv<W: Write>(trajs: &[Trajectory], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let io = |e: csv::Error| Error::Document(format!("csv output failed: {e}"));
    w.write_record(["xi", "phi", "dphi", "status"]).map_err(io)?;
    for t in trajs {
        let last = t.rows.len() - 1;
        for (i, r) in t.rows.iter().enumerate() {
            let status = if i == last {
                t.status.as_str()
            } else if i == 0 {
                "start"
            } else {
                "ok"
            };
            w.write_record([fmt17(r[0]), fmt17(r[1]), fmt17(r[2]), status.to_string()])
                .map_err(io)?;
        }
    }
    w.flush().map_err(|e| Error::Document(format!("csv output failed: {e}")))?;
    Ok(())
}

/// 17 significant digits, enough for an exact round trip.
pub fn fmt17(x: f64) -> String {
    format!("{x:.16e}")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn opts(xi_end: f64, samples: usize) -> PortraitOptions {
        PortraitOptions {
            xi_end,
            samples,
            controls: Controls::with_tolerances(1e-12, 1e-14),
        }
    }

    #[test]
    fn grid_trajectories_satisfy_the_ode() {
        let params = example1_params(DEFAULT_LAMBDA_F);
        let trajs = phase_portrait(&params, &[(1.0, 0.0), (1.0, 0.5), (2.0, -0.5)], &opts(0.5, 401)).unwrap();
        assert_eq!(trajs.len(), 3);
        for t in &trajs {
            assert!(t.rows.len() > 10);
            let h = t.rows[1][0] - t.rows[0][0];
            for w in t.rows.windows(3).take(t.rows.len().saturating_sub(3)) {
                // phi'' from a central difference of phi'
                let dd = (w[2][2] - w[0][2]) / (2.0 * h);
                let r = ode_residual(&params, w[1][1], w[1][2], dd);
                let scale = w[1][1].powi(3).max(1.0) * (1.0 + w[1][2].abs()).powi(2);
                assert!(r.abs() <= 1e-4 * scale, "residual {r} at {:?}", w[1]);
            }
        }
    }

    #[test]
    fn stationary_when_q_vanishes() {
        let params = example1_params(0.0);
        let trajs = phase_portrait(&params, &[(1.5, 0.0)], &opts(1.0, 11)).unwrap();
        assert_eq!(trajs[0].status, OdeStatus::Stationary);
        let params = example1_params(DEFAULT_LAMBDA_F);
        let trajs = phase_portrait(&params, &[(1.5, 0.0)], &opts(0.2, 11)).unwrap();
        assert_ne!(trajs[0].status, OdeStatus::Stationary);
    }

    #[test]
    fn reversal_returns_to_start() {
        let params = example1_params(DEFAULT_LAMBDA_F);
        let c = Controls::with_tolerances(1e-12, 1e-14);
        for (p, dp) in [(1.0, 0.0), (1.0, 0.5), (2.0, -0.5)] {
            assert!(time_reversal_error(&params, p, dp, 0.3, &c).unwrap() < 1e-6);
        }
    }

    #[test]
    fn rejects_nonpositive_start() {
        let params = example1_params(DEFAULT_LAMBDA_F);
        assert!(phase_portrait(&params, &[(0.0, 1.0)], &opts(1.0, 11)).is_err());
    }

    #[test]
    fn csv_blocks() {
        let params = example1_params(DEFAULT_LAMBDA_F);
        let trajs = phase_portrait(&params, &[(1.0, 0.0), (1.0, 0.5)], &opts(0.2, 5)).unwrap();
        let mut buf = Vec::new();
        write_csv(&trajs, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("xi,phi,dphi,status\n"));
        assert_eq!(text.matches(",start").count(), 2);
    }
}
