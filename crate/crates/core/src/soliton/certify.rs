//! Grid certification of a candidate spec.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::soliton::classify::{classify, Classification, Guard};
use crate::soliton::residuals::{
    lemma_from_point, reduced_from_point, tensor_from_point, PointData, EQ_FULL_TENSOR,
};
use crate::soliton::spec::WarpedSolitonSpec;

/// Fraction of the domain width cut from each end before sampling.
pub const GRID_MARGIN: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Certified,
    Rejected,
    #[default]
    Inconclusive,
}

impl Verdict {
    pub fn as_str(&self) -> &'static str {
        match self {
            Verdict::Certified => "certified",
            Verdict::Rejected => "rejected",
            Verdict::Inconclusive => "inconclusive",
        }
    }

    /// CLI exit code.
    pub fn exit_code(&self) -> i32 {
        match self {
            Verdict::Certified => 0,
            Verdict::Rejected => 2,
            Verdict::Inconclusive => 3,
        }
    }
}

/// Which residual families decide the verdict.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EquationSet {
    Reduced,
    Tensor,
    #[default]
    Both,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CertifyOptions {
    pub grid: usize,
    /// Defaults to the spec's profile-dependent tolerance.
    pub tolerance: Option<f64>,
    /// Tolerance for the full tensor; defaults to `tolerance`.
    pub tensor_tolerance: Option<f64>,
    pub equations: EquationSet,
    /// Exponent `s` in `w = ln f^s`; defaults to `n`.
    pub weight_exponent: Option<f64>,
}

impl Default for CertifyOptions {
    fn default() -> Self {
        Self {
            grid: 200,
            tolerance: None,
            tensor_tolerance: None,
            equations: EquationSet::Both,
            weight_exponent: None,
        }
    }
}

impl CertifyOptions {
    pub fn new(grid: usize, tolerance: f64) -> Self {
        Self {
            grid,
            tolerance: Some(tolerance),
            ..Self::default()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EquationStats {
    pub max_abs_residual: f64,
    pub argmax_xi: f64,
    pub sample_count: usize,
}

impl EquationStats {
    fn empty() -> Self {
        Self {
            max_abs_residual: 0.0,
            argmax_xi: f64::NAN,
            sample_count: 0,
        }
    }

    fn push(&mut self, xi: f64, r: f64) {
        if self.sample_count == 0 || r.abs() > self.max_abs_residual {
            self.max_abs_residual = r.abs();
            self.argmax_xi = xi;
        }
        self.sample_count += 1;
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub weight_exponent: f64,
    pub lemma: BTreeMap<String, EquationStats>,
    /// `S_B >= rho - lambda_F/f^2` at every sample.
    pub max_principle_hypothesis: bool,
    /// Spread of `h' phi^2` over the grid.
    pub h_prime_phi_sq_spread: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResidualReport {
    pub verdict: Verdict,
    pub equations: BTreeMap<String, EquationStats>,
    pub classification: Classification,
    /// `h' = 0` at every sample.
    pub trivial: bool,
    pub tolerance: f64,
    pub tensor_tolerance: f64,
    pub grid: usize,
    pub interval: [f64; 2],
    pub diagnostics: Diagnostics,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub failure: Option<String>,
}

impl ResidualReport {
    pub fn max_residual(&self, id: &str) -> Option<f64> {
        self.equations.get(id).map(|s| s.max_abs_residual)
    }

    pub fn to_json(&self) -> String {
        // NaN argmax is not valid JSON; serde_json writes null
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

struct Sample {
    xi: f64,
    reduced: Vec<(&'static str, f64)>,
    tensor: f64,
    lemma: [f64; 2],
    hypothesis: bool,
    h_prime: f64,
    h_prime_phi_sq: f64,
}

fn sample(spec: &WarpedSolitonSpec, xi: f64, s: f64) -> Result<Sample> {
    let p = PointData::at(spec, xi)?;
    let reduced = reduced_from_point(spec, &p);
    let tensor = tensor_from_point(spec, &p, 1.0).amax();
    let lemma = lemma_from_point(spec, &p, s);
    let f2 = p.f.value * p.f.value;
    let entries = reduced.entries();
    let values = entries
        .iter()
        .map(|e| e.1)
        .chain([tensor, lemma.scalar_identity, lemma.weighted_harmonicity]);
    for v in values {
        if !v.is_finite() {
            return Err(Error::NonFinite {
                what: "residual",
                xi,
            });
        }
    }
    Ok(Sample {
        xi,
        reduced: entries,
        tensor,
        lemma: [lemma.scalar_identity, lemma.weighted_harmonicity],
        hypothesis: p.s_base >= p.rho - spec.lambda_f / f2,
        h_prime: p.h.d1,
        h_prime_phi_sq: p.h.d1 * p.phi.value * p.phi.value,
    })
}

/// Sampling interval `[a + 0.01 w, b - 0.01 w]`.
pub fn grid_interval(spec: &WarpedSolitonSpec) -> Result<(f64, f64)> {
    let dom = spec.domain;
    if !dom.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "certification needs a finite domain, got ({}, {})",
            dom.lo, dom.hi
        )));
    }
    let w = dom.width();
    let (lo, hi) = (dom.lo + GRID_MARGIN * w, dom.hi - GRID_MARGIN * w);
    if lo >= hi || !(lo > dom.lo && hi < dom.hi) {
        return Err(Error::EmptyDomain { lo, hi });
    }
    Ok((lo, hi))
}

pub fn grid_points(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    let step = (hi - lo) / (count - 1) as f64;
    (0..count)
        .map(|i| if i + 1 == count { hi } else { lo + step * i as f64 })
        .collect()
}

pub fn certify(spec: &WarpedSolitonSpec, grid_size: usize, tolerance: f64) -> Result<ResidualReport> {
    certify_with(spec, &CertifyOptions::new(grid_size, tolerance))
}

pub fn certify_with(spec: &WarpedSolitonSpec, opts: &CertifyOptions) -> Result<ResidualReport> {
    if opts.grid < 2 {
        return Err(Error::InvalidArgument(format!("grid size must be >= 2, got {}", opts.grid)));
    }
    let tol = opts.tolerance.unwrap_or_else(|| spec.default_tolerance());
    let tensor_tol = opts.tensor_tolerance.unwrap_or(tol);
    if !(tol > 0.0 && tensor_tol > 0.0) {
        return Err(Error::InvalidArgument("tolerance must be positive".into()));
    }
    let s = opts.weight_exponent.unwrap_or(spec.n() as f64);
    let (lo, hi) = grid_interval(spec)?;
    let xs = grid_points(lo, hi, opts.grid);
    log::debug!("certifying on [{lo}, {hi}] with {} points", xs.len());

    let results: Vec<Result<Sample>> = xs.par_iter().map(|&xi| sample(spec, xi, s)).collect();

    let classification = classify(spec);
    let mut report = ResidualReport {
        verdict: Verdict::Inconclusive,
        equations: BTreeMap::new(),
        classification,
        trivial: true,
        tolerance: tol,
        tensor_tolerance: tensor_tol,
        grid: opts.grid,
        interval: [lo, hi],
        diagnostics: Diagnostics {
            weight_exponent: s,
            lemma: BTreeMap::new(),
            max_principle_hypothesis: true,
            h_prime_phi_sq_spread: 0.0,
        },
        failure: None,
    };

    let mut samples = Vec::with_capacity(results.len());
    for r in results {
        match r {
            Ok(s) => samples.push(s),
            Err(e @ Error::NonPositive { .. }) => {
                report.verdict = Verdict::Rejected;
                report.failure = Some(e.to_string());
                return Ok(report);
            }
            Err(e) => {
                report.failure = Some(e.to_string());
                return Ok(report);
            }
        }
    }

    let (mut kmin, mut kmax) = (f64::INFINITY, f64::NEG_INFINITY);
    for smp in &samples {
        if opts.equations != EquationSet::Tensor {
            for &(id, r) in &smp.reduced {
                report.equations.entry(id.to_string()).or_insert_with(EquationStats::empty).push(smp.xi, r);
            }
        }
        if opts.equations != EquationSet::Reduced {
            report
                .equations
                .entry(EQ_FULL_TENSOR.to_string())
                .or_insert_with(EquationStats::empty)
                .push(smp.xi, smp.tensor);
        }
        for (id, r) in ["scalar_identity", "weighted_harmonicity"].into_iter().zip(smp.lemma) {
            report.diagnostics.lemma.entry(id.to_string()).or_insert_with(EquationStats::empty).push(smp.xi, r);
        }
        report.diagnostics.max_principle_hypothesis &= smp.hypothesis;
        report.trivial &= smp.h_prime == 0.0;
        kmin = kmin.min(smp.h_prime_phi_sq);
        kmax = kmax.max(smp.h_prime_phi_sq);
    }
    report.diagnostics.h_prime_phi_sq_spread = kmax - kmin;

    let failing: Vec<String> = report
        .equations
        .iter()
        .filter(|(id, st)| {
            let t = if id.as_str() == EQ_FULL_TENSOR { tensor_tol } else { tol };
            st.max_abs_residual > t
        })
        .map(|(id, st)| format!("{id} residual {:e} at xi = {}", st.max_abs_residual, st.argmax_xi))
        .collect();
    let guard_rejects = matches!(report.classification.guard, Some(Guard::Rejected { .. }));
    if failing.is_empty() && !guard_rejects {
        report.verdict = Verdict::Certified;
    } else {
        report.verdict = Verdict::Rejected;
        let mut msgs = failing;
        if let Some(Guard::Rejected { message }) = &report.classification.guard {
            msgs.push(message.clone());
        }
        report.failure = Some(msgs.join("; "));
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{Domain, Profile, SignatureSpec, TranslationDirection};
    use crate::soliton::residuals::EQ_POTENTIAL;

    fn example2(rho: f64) -> WarpedSolitonSpec {
        let sig = SignatureSpec::euclidean(4).unwrap();
        let dir = TranslationDirection::new(vec![1.0, 0.0, 0.0, 0.0], &sig).unwrap();
        let dom = Domain::new(0.0, 100.0).unwrap();
        WarpedSolitonSpec::new(
            sig,
            dir,
            2,
            rho,
            0.0,
            Profile::expression("sqrt(xi/20)", dom).unwrap(),
            Profile::expression("sqrt(20/xi)", dom).unwrap(),
            Profile::expression("20*ln(xi)", dom).unwrap(),
            dom,
        )
        .unwrap()
    }

    #[test]
    fn certifies_and_rejects() {
        let ok = certify(&example2(0.0), 100, 1e-8).unwrap();
        assert_eq!(ok.verdict, Verdict::Certified, "{:?}", ok.failure);
        assert!(!ok.trivial);
        let bad = certify(&example2(0.1), 100, 1e-8).unwrap();
        assert_eq!(bad.verdict, Verdict::Rejected);
        let r = bad.max_residual("diagonal_hessian").unwrap();
        assert!((r - 0.1).abs() < 1e-9, "{r}");
        assert!(bad.max_residual(EQ_POTENTIAL).unwrap() < 1e-9);
    }

    #[test]
    fn positivity_violation_rejects() {
        let sig = SignatureSpec::euclidean(3).unwrap();
        let dir = TranslationDirection::new(vec![1.0, 0.0, 0.0], &sig).unwrap();
        let dom = Domain::new(-1.0, 1.0).unwrap();
        let spec = WarpedSolitonSpec::new(
            sig, dir, 1, 0.0, 0.0,
            Profile::expression("xi", dom).unwrap(),
            Profile::constant(1.0),
            Profile::constant(0.0),
            dom,
        )
        .unwrap();
        let rep = certify(&spec, 11, 1e-8).unwrap();
        assert_eq!(rep.verdict, Verdict::Rejected);
        assert!(rep.failure.unwrap().contains("conformal factor"));
    }

    #[test]
    fn infinite_domain_is_an_error() {
        let sig = SignatureSpec::euclidean(3).unwrap();
        let dir = TranslationDirection::new(vec![1.0, 0.0, 0.0], &sig).unwrap();
        let one = Profile::constant(1.0);
        let spec = WarpedSolitonSpec::new(sig, dir, 1, 0.0, 0.0, one.clone(), one.clone(), one, Domain::real_line()).unwrap();
        assert!(certify(&spec, 10, 1e-8).is_err());
        assert!(grid_points(0.0, 1.0, 2) == vec![0.0, 1.0]);
    }

    #[test]
    fn report_json_is_stable() {
        let rep = certify(&example2(0.0), 20, 1e-8).unwrap();
        let a = rep.to_json();
        let b = certify(&example2(0.0), 20, 1e-8).unwrap().to_json();
        assert_eq!(a, b);
        let v: serde_json::Value = serde_json::from_str(&a).unwrap();
        assert_eq!(v["verdict"], "certified");
        assert_eq!(v["classification"]["rho_class"], "steady");
    }
}
