//! Dormand–Prince 5(4) integrator with dense output.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// How an integration ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OdeStatus {
    Completed,
    LeftDomain,
    Blowup,
    PositivityLoss,
    Stationary,
    StepLimit,
}

impl OdeStatus {
    pub fn as_str(&self) -> &'static str {
        match self {
            OdeStatus::Completed => "completed",
            OdeStatus::LeftDomain => "left-domain",
            OdeStatus::Blowup => "blowup",
            OdeStatus::PositivityLoss => "positivity-loss",
            OdeStatus::Stationary => "stationary",
            OdeStatus::StepLimit => "step-limit",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Controls {
    pub rtol: f64,
    pub atol: f64,
    /// Initial step; estimated when `None`.
    pub h0: Option<f64>,
    pub h_min: f64,
    pub h_max: f64,
    pub max_steps: usize,
    /// State norm treated as escape to infinity.
    pub blowup_norm: f64,
}

impl Default for Controls {
    fn default() -> Self {
        Self {
            rtol: 1e-10,
            atol: 1e-12,
            h0: None,
            h_min: 1e-12,
            h_max: f64::INFINITY,
            max_steps: 2_000_000,
            blowup_norm: 1e12,
        }
    }
}

impl Controls {
    pub fn with_tolerances(rtol: f64, atol: f64) -> Self {
        Self {
            rtol,
            atol,
            ..Self::default()
        }
    }

    fn validate(&self) -> Result<()> {
        let ok = self.rtol > 0.0
            && self.atol >= 0.0
            && self.h_min > 0.0
            && self.h_max > self.h_min
            && self.max_steps > 0
            && self.blowup_norm > 0.0
            && self.h0.is_none_or(|h| h > 0.0);
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidArgument(format!("invalid integrator controls {self:?}")))
        }
    }
}

/// Right-hand side; `Err(status)` marks the state as inadmissible.
pub trait Rhs {
    fn eval(&mut self, t: f64, y: &[f64], dy: &mut [f64]) -> std::result::Result<(), OdeStatus>;
}

impl<F> Rhs for F
where
    F: FnMut(f64, &[f64], &mut [f64]) -> std::result::Result<(), OdeStatus>,
{
    fn eval(&mut self, t: f64, y: &[f64], dy: &mut [f64]) -> std::result::Result<(), OdeStatus> {
        self(t, y, dy)
    }
}

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;
const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

/// One accepted step with its continuous extension.
#[derive(Debug, Clone)]
pub struct DenseStep {
    pub t0: f64,
    pub t1: f64,
    rcont: [Vec<f64>; 5],
}

impl DenseStep {
    pub fn y0(&self) -> &[f64] {
        &self.rcont[0]
    }

    /// Interpolated state at `t` in `[t0, t1]` (fourth-order accurate).
    pub fn eval(&self, t: f64) -> Vec<f64> {
        let h = self.t1 - self.t0;
        let th = if h == 0.0 { 0.0 } else { (t - self.t0) / h };
        let th1 = 1.0 - th;
        let [r1, r2, r3, r4, r5] = &self.rcont;
        (0..r1.len())
            .map(|i| r1[i] + th * (r2[i] + th1 * (r3[i] + th * (r4[i] + th1 * r5[i]))))
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub t: f64,
    pub y: Vec<f64>,
    pub status: OdeStatus,
    pub accepted: usize,
    pub rejected: usize,
}

struct Stages {
    k: [Vec<f64>; 7],
    tmp: Vec<f64>,
    y1: Vec<f64>,
}

impl Stages {
    fn new(m: usize) -> Self {
        Self {
            k: std::array::from_fn(|_| vec![0.0; m]),
            tmp: vec![0.0; m],
            y1: vec![0.0; m],
        }
    }

    /// Stages 2..7 from `k[0] = f(t, y)`; fills `y1` with the fifth-order solution.
    fn step<R: Rhs>(&mut self, rhs: &mut R, t: f64, y: &[f64], h: f64) -> std::result::Result<(), OdeStatus> {
        let m = y.len();
        let rows: [(f64, &[f64]); 5] = [
            (C2, &[A21]),
            (C3, &[A31, A32]),
            (C4, &[A41, A42, A43]),
            (C5, &[A51, A52, A53, A54]),
            (1.0, &[A61, A62, A63, A64, A65]),
        ];
        for (s, (c, a)) in rows.iter().enumerate() {
            for i in 0..m {
                let mut acc = 0.0;
                for (j, aj) in a.iter().enumerate() {
                    acc += aj * self.k[j][i];
                }
                self.tmp[i] = y[i] + h * acc;
            }
            rhs.eval(t + c * h, &self.tmp, &mut self.k[s + 1])?;
        }
        for i in 0..m {
            self.y1[i] = y[i]
                + h * (A71 * self.k[0][i] + A73 * self.k[2][i] + A74 * self.k[3][i] + A75 * self.k[4][i]
                    + A76 * self.k[5][i]);
        }
        rhs.eval(t + h, &self.y1, &mut self.k[6])
    }

    fn error_norm(&self, y: &[f64], h: f64, c: &Controls) -> f64 {
        let m = y.len();
        let mut sum = 0.0;
        for i in 0..m {
            let k = &self.k;
            let e = h * (E1 * k[0][i] + E3 * k[2][i] + E4 * k[3][i] + E5 * k[4][i] + E6 * k[5][i] + E7 * k[6][i]);
            let sc = c.atol + c.rtol * y[i].abs().max(self.y1[i].abs());
            sum += (e / sc).powi(2);
        }
        (sum / m as f64).sqrt()
    }

    fn dense(&self, t: f64, y: &[f64], h: f64) -> DenseStep {
        let m = y.len();
        let k = &self.k;
        let mut r = std::array::from_fn(|_| vec![0.0; m]);
        for i in 0..m {
            let ydiff = self.y1[i] - y[i];
            let bspl = h * k[0][i] - ydiff;
            r[0][i] = y[i];
            r[1][i] = ydiff;
            r[2][i] = bspl;
            r[3][i] = ydiff - h * k[6][i] - bspl;
            r[4][i] = h * (D1 * k[0][i] + D3 * k[2][i] + D4 * k[3][i] + D5 * k[4][i] + D6 * k[5][i] + D7 * k[6][i]);
        }
        DenseStep { t0: t, t1: t + h, rcont: r }
    }
}

fn norm(y: &[f64]) -> f64 {
    y.iter().map(|v| v * v).sum::<f64>().sqrt()
}

fn initial_step<R: Rhs>(rhs: &mut R, t: f64, y: &[f64], f0: &[f64], dir: f64, c: &Controls) -> f64 {
    // Hairer, Norsett & Wanner, starting step heuristic
    let m = y.len() as f64;
    let sc = |i: usize| c.atol + c.rtol * y[i].abs();
    let d0 = (y.iter().enumerate().map(|(i, v)| (v / sc(i)).powi(2)).sum::<f64>() / m).sqrt();
    let d1 = (f0.iter().enumerate().map(|(i, v)| (v / sc(i)).powi(2)).sum::<f64>() / m).sqrt();
    let h0 = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
    let y1: Vec<f64> = y.iter().zip(f0).map(|(a, b)| a + dir * h0 * b).collect();
    let mut f1 = vec![0.0; y.len()];
    if rhs.eval(t + dir * h0, &y1, &mut f1).is_err() {
        return h0;
    }
    let d2 = (f1.iter().zip(f0).enumerate().map(|(i, (a, b))| ((a - b) / sc(i)).powi(2)).sum::<f64>() / m).sqrt() / h0;
    let h1 = if d1.max(d2) <= 1e-15 {
        (h0 * 1e-3).max(1e-6)
    } else {
        (0.01 / d1.max(d2)).powf(0.2)
    };
    (100.0 * h0).min(h1).min(c.h_max)
}

/// Adaptive integration from `t0` to `t_end` (either direction). The
/// observer sees every accepted step. When a trial stage is inadmissible the
/// step is halved; once it falls below `h_min` the integration stops with
/// the reported status.
pub fn integrate<R, O>(mut rhs: R, t0: f64, y0: &[f64], t_end: f64, c: &Controls, mut observer: O) -> Result<Outcome>
where
    R: Rhs,
    O: FnMut(&DenseStep),
{
    c.validate()?;
    let m = y0.len();
    let mut y = y0.to_vec();
    let mut t = t0;
    let mut out = Outcome {
        t,
        y: y.clone(),
        status: OdeStatus::Completed,
        accepted: 0,
        rejected: 0,
    };
    if t_end == t0 {
        return Ok(out);
    }
    let dir = (t_end - t0).signum();
    let mut st = Stages::new(m);
    if let Err(s) = rhs.eval(t, &y, &mut st.k[0]) {
        out.status = s;
        return Ok(out);
    }
    let mut h = c.h0.unwrap_or_else(|| initial_step(&mut rhs, t, &y, &st.k[0].clone(), dir, c)).min(c.h_max);
    let mut last_failure: Option<OdeStatus> = None;
    let mut steps = 0;
    loop {
        if (t_end - t) * dir <= 0.0 {
            break;
        }
        if steps >= c.max_steps {
            out.status = OdeStatus::StepLimit;
            break;
        }
        steps += 1;
        let remaining = (t_end - t).abs();
        let last = h >= remaining;
        let hs = if last { remaining } else { h };
        if hs < c.h_min && !last {
            out.status = last_failure.unwrap_or(OdeStatus::Blowup);
            break;
        }
        let hd = dir * hs;
        match st.step(&mut rhs, t, &y, hd) {
            Err(s) => {
                last_failure = Some(s);
                out.rejected += 1;
                h = 0.5 * hs;
                if h < c.h_min {
                    out.status = s;
                    break;
                }
                continue;
            }
            Ok(()) => {}
        }
        let err = st.error_norm(&y, hd, c);
        if !err.is_finite() {
            out.rejected += 1;
            h = 0.5 * hs;
            last_failure = Some(OdeStatus::Blowup);
            continue;
        }
        if err <= 1.0 {
            let dense = st.dense(t, &y, hd);
            observer(&dense);
            t = if last { t_end } else { t + hd };
            y.copy_from_slice(&st.y1);
            st.k.swap(0, 6);
            out.accepted += 1;
            last_failure = None;
            if norm(&y) > c.blowup_norm {
                out.status = OdeStatus::Blowup;
                break;
            }
            let fac = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
            h = (hs * fac).min(c.h_max);
        } else {
            out.rejected += 1;
            h = hs * (0.9 * err.powf(-0.2)).clamp(0.2, 1.0);
        }
    }
    out.t = t;
    out.y = y;
    Ok(out)
}

/// Fixed-step fifth-order propagation with `steps` equal steps (no error control).
pub fn integrate_fixed<R: Rhs>(mut rhs: R, t0: f64, y0: &[f64], t_end: f64, steps: usize) -> Result<Outcome> {
    if steps == 0 {
        return Err(Error::InvalidArgument("fixed-step integration needs >= 1 step".into()));
    }
    let m = y0.len();
    let mut st = Stages::new(m);
    let mut y = y0.to_vec();
    let h = (t_end - t0) / steps as f64;
    let mut out = Outcome {
        t: t0,
        y: y.clone(),
        status: OdeStatus::Completed,
        accepted: 0,
        rejected: 0,
    };
    if let Err(s) = rhs.eval(t0, &y, &mut st.k[0]) {
        out.status = s;
        return Ok(out);
    }
    for i in 0..steps {
        let t = t0 + h * i as f64;
        if let Err(s) = st.step(&mut rhs, t, &y, h) {
            out.t = t;
            out.y = y;
            out.status = s;
            return Ok(out);
        }
        y.copy_from_slice(&st.y1);
        st.k.swap(0, 6);
        out.accepted += 1;
    }
    out.t = t_end;
    out.y = y;
    Ok(out)
}

/// Uniform samples `t0 + i (t1 - t0)/(count-1)` pulled from dense output.
pub struct DenseSampler {
    times: Vec<f64>,
    next: usize,
    pub samples: Vec<(f64, Vec<f64>)>,
}

impl DenseSampler {
    pub fn uniform(t0: f64, t1: f64, count: usize) -> Self {
        let times = if count < 2 {
            vec![t0]
        } else {
            (0..count).map(|i| t0 + (t1 - t0) * i as f64 / (count - 1) as f64).collect()
        };
        Self {
            times,
            next: 0,
            samples: Vec::new(),
        }
    }

    pub fn observe(&mut self, step: &DenseStep) {
        let dir = (step.t1 - step.t0).signum();
        while self.next < self.times.len() {
            let t = self.times[self.next];
            if (t - step.t0) * dir < 0.0 && self.next == 0 {
                self.samples.push((t, step.y0().to_vec()));
            } else if (t - step.t1) * dir <= 0.0 {
                self.samples.push((t, step.eval(t)));
            } else {
                break;
            }
            self.next += 1;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn oscillator(_t: f64, y: &[f64], dy: &mut [f64]) -> std::result::Result<(), OdeStatus> {
        dy[0] = y[1];
        dy[1] = -y[0];
        Ok(())
    }

    #[test]
    fn harmonic_oscillator_both_directions() {
        let c = Controls::with_tolerances(1e-12, 1e-14);
        let out = integrate(oscillator, 0.0, &[1.0, 0.0], 10.0, &c, |_| {}).unwrap();
        assert_eq!(out.status, OdeStatus::Completed);
        assert!((out.y[0] - 10f64.cos()).abs() < 1e-10);
        let back = integrate(oscillator, 10.0, &out.y, 0.0, &c, |_| {}).unwrap();
        assert!((back.y[0] - 1.0).abs() < 1e-9 && back.y[1].abs() < 1e-9);
    }

    #[test]
    fn dense_output_is_accurate() {
        let c = Controls::with_tolerances(1e-10, 1e-12);
        let mut s = DenseSampler::uniform(0.0, 3.0, 31);
        integrate(oscillator, 0.0, &[1.0, 0.0], 3.0, &c, |st| s.observe(st)).unwrap();
        assert_eq!(s.samples.len(), 31);
        for (t, y) in &s.samples {
            assert!((y[0] - t.cos()).abs() < 1e-8, "t={t}");
        }
    }

    #[test]
    fn finite_time_blowup_is_reported() {
        // y' = y^2, y(0) = 1 blows up at t = 1
        let rhs = |_t: f64, y: &[f64], dy: &mut [f64]| {
            dy[0] = y[0] * y[0];
            Ok(())
        };
        let out = integrate(rhs, 0.0, &[1.0], 2.0, &Controls::default(), |_| {}).unwrap();
        assert_eq!(out.status, OdeStatus::Blowup);
        assert!((out.t - 1.0).abs() < 1e-3);
    }

    #[test]
    fn inadmissible_states_stop_with_status() {
        // y' = -1 from y = 1, positivity lost at t = 1
        let rhs = |_t: f64, y: &[f64], dy: &mut [f64]| {
            if y[0] <= 0.0 {
                return Err(OdeStatus::PositivityLoss);
            }
            dy[0] = -1.0;
            Ok(())
        };
        let out = integrate(rhs, 0.0, &[1.0], 3.0, &Controls::default(), |_| {}).unwrap();
        assert_eq!(out.status, OdeStatus::PositivityLoss);
        assert!((out.t - 1.0).abs() < 1e-9);
    }

    #[test]
    fn fixed_step_is_fifth_order() {
        let exact = 2f64.cos();
        let e1 = (integrate_fixed(oscillator, 0.0, &[1.0, 0.0], 2.0, 20).unwrap().y[0] - exact).abs();
        let e2 = (integrate_fixed(oscillator, 0.0, &[1.0, 0.0], 2.0, 40).unwrap().y[0] - exact).abs();
        assert!(e1 / e2 > 16.0, "{e1} {e2}");
    }
}
