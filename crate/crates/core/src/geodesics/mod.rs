//! Geodesics of `(R^n, phi^-2 delta) x_f (R^d, g_0)` with a flat fiber, and a
//! sampling probe for geodesic completeness. The probe is numerical evidence:
//! it cannot prove completeness, only exhibit geodesics that stop early.

use std::collections::BTreeMap;
use std::io::Write;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::families::portrait::fmt17;
use crate::geometry::Jet;
use crate::ode::{integrate, Controls, DenseSampler, OdeStatus};
use crate::soliton::WarpedSolitonSpec;

/// Trajectories stop this close to a finite domain endpoint.
pub const DOMAIN_MARGIN: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum GeodesicMode {
    /// Covariant geodesic equation of the warped metric.
    Full,
    /// The hand-reduced system for `phi = f = e^{k xi}`, `xi = x1 + x2`,
    /// which omits the base Christoffel terms.
    PaperReduced,
}

impl GeodesicMode {
    pub fn as_str(&self) -> &'static str {
        match self {
            GeodesicMode::Full => "full",
            GeodesicMode::PaperReduced => "paper-reduced",
        }
    }
}

impl FromStr for GeodesicMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "full" => Ok(GeodesicMode::Full),
            "paper-reduced" | "reduced" => Ok(GeodesicMode::PaperReduced),
            _ => Err(Error::InvalidArgument(format!("unknown geodesic mode '{s}', expected full or paper-reduced"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GeodesicState {
    pub y_b: Vec<f64>,
    pub v_b: Vec<f64>,
    pub y_f: Vec<f64>,
    pub v_f: Vec<f64>,
    pub s: f64,
}

impl GeodesicState {
    pub fn new(y_b: Vec<f64>, v_b: Vec<f64>, y_f: Vec<f64>, v_f: Vec<f64>) -> Result<Self> {
        if y_b.len() != v_b.len() {
            return Err(Error::DimensionMismatch {
                expected: y_b.len(),
                got: v_b.len(),
            });
        }
        if y_f.len() != v_f.len() {
            return Err(Error::DimensionMismatch {
                expected: y_f.len(),
                got: v_f.len(),
            });
        }
        Ok(Self { y_b, v_b, y_f, v_f, s: 0.0 })
    }

    pub fn n(&self) -> usize {
        self.y_b.len()
    }

    pub fn d(&self) -> usize {
        self.y_f.len()
    }

    /// `[y_B, v_B, y_F, v_F]`
    pub fn pack(&self) -> Vec<f64> {
        [&self.y_b[..], &self.v_b, &self.y_f, &self.v_f].concat()
    }

    pub fn unpack(n: usize, d: usize, s: f64, y: &[f64]) -> Self {
        Self {
            y_b: y[..n].to_vec(),
            v_b: y[n..2 * n].to_vec(),
            y_f: y[2 * n..2 * n + d].to_vec(),
            v_f: y[2 * n + d..2 * n + 2 * d].to_vec(),
            s,
        }
    }

    pub fn reversed(&self) -> Self {
        let neg = |v: &[f64]| v.iter().map(|x| -x).collect();
        Self {
            v_b: neg(&self.v_b),
            v_f: neg(&self.v_f),
            ..self.clone()
        }
    }
}

/// The geodesic vector field of a spec in a given mode.
#[derive(Debug, Clone)]
pub struct GeodesicSystem<'a> {
    spec: &'a WarpedSolitonSpec,
    mode: GeodesicMode,
    /// Growth rate of `phi = f = e^{k xi}` (reduced mode only).
    k: f64,
    d: usize,
}

fn classify_error(e: &Error) -> OdeStatus {
    match e {
        Error::OutOfDomain { .. } => OdeStatus::LeftDomain,
        Error::NonPositive { .. } => OdeStatus::PositivityLoss,
        _ => OdeStatus::Blowup,
    }
}

impl<'a> GeodesicSystem<'a> {
    pub fn new(spec: &'a WarpedSolitonSpec, mode: GeodesicMode) -> Result<Self> {
        let mut k = 0.0;
        if mode == GeodesicMode::PaperReduced {
            k = reduced_rate(spec)?;
        }
        Ok(Self { spec, mode, k, d: spec.d })
    }

    pub fn mode(&self) -> GeodesicMode {
        self.mode
    }

    /// `k` in `phi = f = e^{k xi}` for the reduced mode.
    pub fn rate(&self) -> f64 {
        self.k
    }

    fn xi(&self, y_b: &[f64]) -> f64 {
        self.spec.dir.xi(y_b)
    }

    fn jets(&self, xi: f64) -> std::result::Result<(Jet, Jet), OdeStatus> {
        let dom = self.spec.domain;
        if xi <= dom.lo + DOMAIN_MARGIN || xi >= dom.hi - DOMAIN_MARGIN || !xi.is_finite() {
            return Err(OdeStatus::LeftDomain);
        }
        let phi = self
            .spec
            .phi
            .positive_jet(xi, "conformal factor phi")
            .map_err(|e| classify_error(&e))?;
        let f = self
            .spec
            .f
            .positive_jet(xi, "warping function f")
            .map_err(|e| classify_error(&e))?;
        Ok((phi, f))
    }

    /// Derivative of the packed state `[y_B, v_B, y_F, v_F]`.
    pub fn eval(&self, y: &[f64], dy: &mut [f64]) -> std::result::Result<(), OdeStatus> {
        let n = self.spec.n();
        let d = self.d;
        let (yb, vb) = (&y[..n], &y[n..2 * n]);
        let vf = &y[2 * n + d..];
        let xi = self.xi(yb);
        let (phi, f) = self.jets(xi)?;
        dy[..n].copy_from_slice(vb);
        dy[2 * n..2 * n + d].copy_from_slice(vf);
        let vf2: f64 = vf.iter().map(|v| v * v).sum();
        match self.mode {
            GeodesicMode::Full => {
                let alpha = self.spec.dir.alpha();
                let dxi: f64 = alpha.iter().zip(vb).map(|(a, v)| a * v).sum();
                let q: f64 = (0..n).map(|i| self.spec.sig.eps(i) * vb[i] * vb[i]).sum();
                let l = phi.d1 / phi.value;
                for kk in 0..n {
                    let e = self.spec.sig.eps(kk);
                    let christoffel = 2.0 * vb[kk] * l * dxi - e * alpha[kk] * l * q;
                    let grad_f = phi.value * phi.value * e * alpha[kk] * f.d1;
                    dy[n + kk] = christoffel + vf2 * f.value * grad_f;
                }
                let c = -2.0 * f.d1 * dxi / f.value;
                for l in 0..d {
                    dy[2 * n + d + l] = c * vf[l];
                }
            }
            GeodesicMode::PaperReduced => {
                let k = self.k;
                // |v_F|^2 e^{4k(y1+y2)} stays bounded while its factors over- and
                // underflow, so combine them in log space
                let m = vf.iter().fold(0.0f64, |a, v| a.max(v.abs()));
                let e = if m == 0.0 {
                    0.0
                } else {
                    let r: f64 = vf.iter().map(|v| (v / m) * (v / m)).sum();
                    (2.0 * m.ln() + r.ln() + 4.0 * k * (yb[0] + yb[1])).exp()
                };
                dy[n] = -k * e;
                dy[n + 1] = k * e;
                for r in 2..n {
                    dy[n + r] = 0.0;
                }
                let c = -2.0 * k * (vb[0] + vb[1]);
                for l in 0..d {
                    dy[2 * n + d + l] = c * vf[l];
                }
            }
        }
        if dy.iter().all(|v| v.is_finite()) {
            Ok(())
        } else {
            Err(OdeStatus::Blowup)
        }
    }

    /// `g(v, v) = sum eps_i v_i^2 / phi^2 + f^2 |v_F|^2`.
    pub fn energy(&self, st: &GeodesicState) -> Result<f64> {
        let xi = self.xi(&st.y_b);
        let phi = self.spec.phi.value(xi)?;
        let f = self.spec.f.value(xi)?;
        let base: f64 = (0..st.n()).map(|i| self.spec.sig.eps(i) * st.v_b[i] * st.v_b[i]).sum();
        let fiber: f64 = st.v_f.iter().map(|v| v * v).sum();
        Ok(base / (phi * phi) + f * f * fiber)
    }

    /// `f^2 v_F`, conserved for a flat fiber.
    pub fn fiber_momentum(&self, st: &GeodesicState) -> Result<Vec<f64>> {
        let f = self.spec.f.value(self.xi(&st.y_b))?;
        Ok(st.v_f.iter().map(|v| f * f * v).collect())
    }
}

/// Extracts `k` for `phi = f = e^{k xi}` and checks the direction is
/// `alpha = (1, 1, 0, ...)` with `eps = (-1, 1, ...)`.
fn reduced_rate(spec: &WarpedSolitonSpec) -> Result<f64> {
    let n = spec.n();
    let alpha = spec.dir.alpha();
    let shape_ok = n >= 2
        && alpha[0] == 1.0
        && alpha[1] == 1.0
        && alpha[2..].iter().all(|&a| a == 0.0)
        && spec.sig.eps(0) == -1.0
        && (1..n).all(|i| spec.sig.eps(i) == 1.0);
    if !shape_ok {
        return Err(Error::Precondition(
            "paper-reduced mode needs eps = (-1, 1, ..., 1) and alpha = (1, 1, 0, ..., 0)".into(),
        ));
    }
    let dom = spec.domain;
    let pick = |t: f64| {
        if dom.is_finite() {
            dom.lo + t * dom.width()
        } else if dom.lo.is_finite() {
            dom.lo + 1.0 + 10.0 * t
        } else if dom.hi.is_finite() {
            dom.hi - 1.0 - 10.0 * t
        } else {
            -5.0 + 10.0 * t
        }
    };
    let mut k = None;
    for t in [0.25, 0.5, 0.75] {
        let xi = pick(t);
        let p = spec.phi.jet(xi)?;
        let f = spec.f.jet(xi)?;
        let kp = p.d1 / p.value;
        let same = (p.value - f.value).abs() <= 1e-12 * p.value.abs()
            && (p.value - (kp * xi).exp()).abs() <= 1e-10 * p.value.abs();
        let consistent = k.is_none_or(|k0: f64| (k0 - kp).abs() <= 1e-12 * k0.abs().max(1.0));
        if !same || !consistent {
            return Err(Error::Precondition(
                "paper-reduced mode needs phi = f = e^{k xi}".into(),
            ));
        }
        k = Some(kp);
    }
    let k = k.unwrap_or(0.0);
    if k == 0.0 {
        return Err(Error::Precondition("paper-reduced mode needs k != 0".into()));
    }
    Ok(k)
}

/// Free-function form of the vector field.
pub fn geodesic_rhs(spec: &WarpedSolitonSpec, state: &GeodesicState, mode: GeodesicMode) -> Result<GeodesicState> {
    check_dims(spec, state)?;
    let sys = GeodesicSystem::new(spec, mode)?;
    let y = state.pack();
    let mut dy = vec![0.0; y.len()];
    sys.eval(&y, &mut dy).map_err(|s| {
        Error::Precondition(format!(
            "geodesic state is not admissible ({}) at xi = {}",
            s.as_str(),
            spec.dir.xi(&state.y_b)
        ))
    })?;
    Ok(GeodesicState::unpack(spec.n(), spec.d, state.s, &dy))
}

fn check_dims(spec: &WarpedSolitonSpec, st: &GeodesicState) -> Result<()> {
    if st.n() != spec.n() {
        return Err(Error::DimensionMismatch {
            expected: spec.n(),
            got: st.n(),
        });
    }
    if st.d() != spec.d {
        return Err(Error::DimensionMismatch {
            expected: spec.d,
            got: st.d(),
        });
    }
    Ok(())
}

#[derive(Debug, Clone)]
pub struct GeodesicTrajectory {
    /// Accepted step endpoints, or uniform dense samples when requested,
    /// always ending with the terminal state.
    pub samples: Vec<GeodesicState>,
    pub status: OdeStatus,
    /// Parameter at which integration stopped.
    pub s_end: f64,
    pub accepted: usize,
    pub rejected: usize,
}

impl GeodesicTrajectory {
    pub fn last(&self) -> &GeodesicState {
        self.samples.last().expect("trajectory has at least one sample")
    }
}

/// Integrates from `initial.s` to `s_end` (either direction). `dense` asks
/// for that many uniform samples instead of the controller's step points.
pub fn integrate_between(
    sys: &GeodesicSystem<'_>,
    initial: &GeodesicState,
    s_end: f64,
    controls: &Controls,
    dense: Option<usize>,
    record: bool,
) -> Result<GeodesicTrajectory> {
    check_dims(sys.spec, initial)?;
    let (n, d) = (initial.n(), initial.d());
    let y0 = initial.pack();
    let rhs = |_s: f64, y: &[f64], dy: &mut [f64]| sys.eval(y, dy);
    let mut samples = vec![];
    let mut sampler = dense.map(|c| DenseSampler::uniform(initial.s, s_end, c.max(2)));
    if record && sampler.is_none() {
        samples.push(initial.clone());
    }
    let out = integrate(rhs, initial.s, &y0, s_end, controls, |step| {
        if !record {
            return;
        }
        match sampler.as_mut() {
            Some(sm) => sm.observe(step),
            None => samples.push(GeodesicState::unpack(n, d, step.t1, &step.eval(step.t1))),
        }
    })?;
    if let Some(sm) = sampler {
        samples = sm.samples.iter().map(|(s, y)| GeodesicState::unpack(n, d, *s, y)).collect();
    }
    let terminal = GeodesicState::unpack(n, d, out.t, &out.y);
    if samples.last().map(|l| l.s) != Some(out.t) {
        samples.push(terminal);
    } else if let Some(l) = samples.last_mut() {
        *l = terminal;
    }
    Ok(GeodesicTrajectory {
        samples,
        status: out.status,
        s_end: out.t,
        accepted: out.accepted,
        rejected: out.rejected,
    })
}

/// Integrates to `s_max > 0`, recording the controller's step points.
pub fn integrate_geodesic(
    spec: &WarpedSolitonSpec,
    mode: GeodesicMode,
    initial: &GeodesicState,
    s_max: f64,
    controls: &Controls,
) -> Result<GeodesicTrajectory> {
    if !(s_max > 0.0 && s_max.is_finite()) {
        return Err(Error::InvalidArgument(format!("s_max must be positive and finite, got {s_max}")));
    }
    let sys = GeodesicSystem::new(spec, mode)?;
    integrate_between(&sys, initial, initial.s + s_max, controls, None, true)
}

/// Closed-form solution of the reduced system through `initial` at `s0 = initial.s`.
pub fn reduced_closed_form(k: f64, initial: &GeodesicState, s: f64) -> GeodesicState {
    let t = s - initial.s;
    let (y, v) = (&initial.y_b, &initial.v_b);
    let c1 = v[0] + v[1];
    let c2 = y[0] + y[1];
    let vf2: f64 = initial.v_f.iter().map(|x| x * x).sum();
    let a = -k * vf2 * (4.0 * k * c2).exp();
    let mut y_b: Vec<f64> = y.iter().zip(v).map(|(y, v)| y + v * t).collect();
    let mut v_b = v.clone();
    y_b[0] += 0.5 * a * t * t;
    y_b[1] -= 0.5 * a * t * t;
    v_b[0] += a * t;
    v_b[1] -= a * t;
    let rate = 2.0 * k * c1;
    // (1 - e^{-rate t}) / rate, with its limit t at rate = 0
    let x = rate * t;
    let g = if x.abs() < 1e-8 { t * (1.0 - 0.5 * x) } else { -(-x).exp_m1() / rate };
    let decay = (-x).exp();
    GeodesicState {
        y_b,
        v_b,
        y_f: initial.y_f.iter().zip(&initial.v_f).map(|(y, v)| y + v * g).collect(),
        v_f: initial.v_f.iter().map(|v| v * decay).collect(),
        s,
    }
}

/// Trajectory CSV with header `s,y_1..y_n,v_1..v_n,yf_1..yf_d,vf_1..vf_d,status`.
pub fn write_csv<W: Write>(trajs: &[GeodesicTrajectory], n: usize, d: usize, out: W) -> Result<()> {
    let io = |e: csv::Error| Error::Document(format!("csv output failed: {e}"));
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["s".to_string()];
    header.extend((1..=n).map(|i| format!("y_{i}")));
    header.extend((1..=n).map(|i| format!("v_{i}")));
    header.extend((1..=d).map(|i| format!("yf_{i}")));
    header.extend((1..=d).map(|i| format!("vf_{i}")));
    header.push("status".into());
    w.write_record(&header).map_err(io)?;
    for t in trajs {
        let last = t.samples.len() - 1;
        for (i, st) in t.samples.iter().enumerate() {
            let mut row = vec![fmt17(st.s)];
            row.extend(st.pack().iter().map(|v| fmt17(*v)));
            row.push(
                if i == last {
                    t.status.as_str()
                } else if i == 0 {
                    "start"
                } else {
                    "ok"
                }
                .to_string(),
            );
            w.write_record(&row).map_err(io)?;
        }
    }
    w.flush().map_err(|e| Error::Document(format!("csv output failed: {e}")))?;
    Ok(())
}

/// Random initial state with `|g(v, v)| = 1`. Positions are uniform in a box
/// of half-width `spread` around `center`.
pub fn sample_unit_speed(
    sys: &GeodesicSystem<'_>,
    rng: &mut ChaCha8Rng,
    center: &[f64],
    spread: f64,
) -> Result<GeodesicState> {
    let (n, d) = (sys.spec.n(), sys.d);
    for _ in 0..1000 {
        let mut draw = |m: usize| -> Vec<f64> { (0..m).map(|_| rng.random_range(-1.0..1.0)).collect() };
        let y_b: Vec<f64> = draw(n).iter().zip(center).map(|(u, c)| c + spread * u).collect();
        let y_f = draw(d).iter().map(|u| spread * u).collect();
        let v_b = draw(n);
        let v_f = draw(d);
        let st = GeodesicState::new(y_b, v_b, y_f, v_f)?;
        let xi = sys.xi(&st.y_b);
        if sys.jets(xi).is_err() {
            continue;
        }
        let e = sys.energy(&st)?;
        if e.abs() < 1e-3 {
            continue;
        }
        let c = 1.0 / e.abs().sqrt();
        let scale = |v: &[f64]| v.iter().map(|x| c * x).collect();
        return Ok(GeodesicState {
            v_b: scale(&st.v_b),
            v_f: scale(&st.v_f),
            ..st
        });
    }
    Err(Error::Precondition("could not sample an admissible unit-speed state".into()))
}

#[derive(Debug, Clone)]
pub struct ProbeOptions {
    pub count: usize,
    pub s_max: f64,
    pub seed: u64,
    pub controls: Controls,
    /// Box half-width for sampled positions.
    pub spread: f64,
}

impl Default for ProbeOptions {
    fn default() -> Self {
        Self {
            count: 100,
            s_max: 1e3,
            seed: 0,
            controls: Controls::with_tolerances(1e-9, 1e-12),
            spread: 1.0,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ProbeRun {
    pub direction: &'static str,
    pub status: OdeStatus,
    pub s_end: f64,
    /// Blowup split: state norm above threshold vs step underflow.
    pub norm_escape: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct ProbeSummary {
    pub mode: GeodesicMode,
    pub count: usize,
    pub s_max: f64,
    pub seed: u64,
    /// Geodesics completed in both directions.
    pub completed: usize,
    pub fraction_completed: f64,
    /// Smallest `|s|` at which a blowup was reported.
    pub min_blowup_parameter: Option<f64>,
    /// Status counts over all forward and backward runs.
    pub tallies: BTreeMap<String, usize>,
    pub blowup_norm_escape: usize,
    pub blowup_step_underflow: usize,
    /// Largest relative energy drift over runs that completed.
    pub max_energy_drift: f64,
    pub note: &'static str,
    #[serde(skip)]
    pub runs: Vec<[ProbeRun; 2]>,
}

pub const PROBE_NOTE: &str =
    "sampled integration up to a finite parameter; evidence about completeness, not a proof";

/// Integrates `count` sampled unit-speed geodesics forward and backward to
/// `+-s_max`. Sampling is sequential from the seed; integration is parallel.
pub fn completeness_probe(spec: &WarpedSolitonSpec, mode: GeodesicMode, opts: &ProbeOptions) -> Result<ProbeSummary> {
    if opts.count == 0 {
        return Err(Error::InvalidArgument("probe count must be >= 1".into()));
    }
    if !(opts.s_max > 0.0 && opts.s_max.is_finite()) {
        return Err(Error::InvalidArgument(format!("s_max must be positive and finite, got {}", opts.s_max)));
    }
    let sys = GeodesicSystem::new(spec, mode)?;
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let center = probe_center(spec);
    let starts = (0..opts.count)
        .map(|_| sample_unit_speed(&sys, &mut rng, &center, opts.spread))
        .collect::<Result<Vec<_>>>()?;
    let results = starts
        .par_iter()
        .map(|st| -> Result<([ProbeRun; 2], f64)> {
            let e0 = sys.energy(st)?;
            let mut drift: f64 = 0.0;
            let mut run = |dir: f64, name: &'static str| -> Result<ProbeRun> {
                let tr = integrate_between(&sys, st, dir * opts.s_max, &opts.controls, None, false)?;
                let last = tr.last();
                if tr.status == OdeStatus::Completed {
                    if let Ok(e) = sys.energy(last) {
                        drift = drift.max((e - e0).abs() / e0.abs().max(1e-300));
                    }
                }
                let norm = last.pack().iter().map(|v| v * v).sum::<f64>().sqrt();
                Ok(ProbeRun {
                    direction: name,
                    status: tr.status,
                    s_end: tr.s_end,
                    norm_escape: tr.status == OdeStatus::Blowup && norm > opts.controls.blowup_norm,
                })
            };
            let fwd = run(1.0, "forward")?;
            let bwd = run(-1.0, "backward")?;
            Ok(([fwd, bwd], drift))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut tallies = BTreeMap::new();
    let mut completed = 0;
    let mut min_blowup: Option<f64> = None;
    let (mut escape, mut underflow) = (0, 0);
    let mut max_drift: f64 = 0.0;
    let mut runs = Vec::with_capacity(results.len());
    for (pair, drift) in results {
        if pair.iter().all(|r| r.status == OdeStatus::Completed) {
            completed += 1;
        }
        for r in &pair {
            *tallies.entry(r.status.as_str().to_string()).or_insert(0) += 1;
            if r.status == OdeStatus::Blowup {
                let s = r.s_end.abs();
                min_blowup = Some(min_blowup.map_or(s, |m| m.min(s)));
                if r.norm_escape {
                    escape += 1;
                } else {
                    underflow += 1;
                }
            }
        }
        max_drift = max_drift.max(drift);
        runs.push(pair);
    }
    Ok(ProbeSummary {
        mode,
        count: opts.count,
        s_max: opts.s_max,
        seed: opts.seed,
        completed,
        fraction_completed: completed as f64 / opts.count as f64,
        min_blowup_parameter: min_blowup,
        tallies,
        blowup_norm_escape: escape,
        blowup_step_underflow: underflow,
        max_energy_drift: max_drift,
        note: PROBE_NOTE,
        runs,
    })
}

/// A base point whose `xi` is at the middle of the domain (or near its finite end).
pub fn probe_center(spec: &WarpedSolitonSpec) -> Vec<f64> {
    let dom = spec.domain;
    let target = match (dom.lo.is_finite(), dom.hi.is_finite()) {
        (true, true) => dom.midpoint(),
        (true, false) => dom.lo + 1.0,
        (false, true) => dom.hi - 1.0,
        (false, false) => 0.0,
    };
    let alpha = spec.dir.alpha();
    let a2: f64 = alpha.iter().map(|a| a * a).sum();
    alpha.iter().map(|a| a * target / a2).collect()
}
