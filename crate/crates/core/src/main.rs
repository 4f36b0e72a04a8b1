use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use yamabe_core::dsl::{FamilyParams, SpecDocument};
use yamabe_core::error::{Error, Result};
use yamabe_core::families::catalog;
use yamabe_core::families::portrait::{self, fmt17, PortraitOptions};
use yamabe_core::geodesics::{self, GeodesicMode, GeodesicState, GeodesicSystem, ProbeOptions};
use yamabe_core::geometry::{Domain, SignVariant};
use yamabe_core::ode::Controls;
use yamabe_core::soliton::certify::{grid_interval, grid_points};
use yamabe_core::soliton::{certify_with, CertifyOptions, EquationSet, ResidualReport, Verdict, WarpedSolitonSpec};

/// Construct, classify and certify gradient Yamabe solitons on warped products.
#[derive(Parser)]
#[command(name = "yamabe", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Certify a JSON spec file and print the residual report.
    Verify(VerifyArgs),
    /// Build a member of a solution family, certify it and emit spec + table.
    Family(FamilyArgs),
    /// Phase-portrait trajectories of the n + d = 6 profile ODE as CSV.
    Portrait(PortraitArgs),
    /// Integrate geodesics (CSV) or run a completeness probe (JSON).
    Geodesic(GeodesicArgs),
    /// Certify the built-in example catalog.
    Examples(ExamplesArgs),
}

#[derive(Args)]
struct CheckFlags {
    /// Residual tolerance (default: from the spec, else 1e-8 / 1e-4 for numeric profiles).
    #[arg(long)]
    tol: Option<f64>,
    /// Number of grid points.
    #[arg(long)]
    grid: Option<usize>,
    /// plus | minus
    #[arg(long)]
    sign_variant: Option<String>,
    /// reduced | tensor | both
    #[arg(long, default_value = "both")]
    equations: String,
}

#[derive(Args)]
struct VerifyArgs {
    spec: PathBuf,
    #[command(flatten)]
    check: CheckFlags,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct FamilyArgs {
    /// thm15 | thm16 | thm17 | thm18 | almost-lightlike | example-k
    id: String,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    d: Option<usize>,
    /// Comma-separated +-1 entries.
    #[arg(long, allow_hyphen_values = true)]
    signature: Option<String>,
    /// Comma-separated direction components.
    #[arg(long, allow_hyphen_values = true)]
    alpha: Option<String>,
    /// `a,b`; use `-inf` / `inf` for open ends.
    #[arg(long, allow_hyphen_values = true)]
    domain: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    k1: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    k2: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    k3: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    k4: Option<f64>,
    #[arg(long = "lambda-f", allow_hyphen_values = true)]
    lambda_f: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    rho: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    phi: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    f: Option<String>,
    #[arg(long = "z-p", allow_hyphen_values = true)]
    z_p: Option<String>,
    #[arg(long = "c", allow_hyphen_values = true)]
    c: Option<f64>,
    /// statement | proof
    #[arg(long)]
    q_variant: Option<String>,
    /// principal | lower
    #[arg(long)]
    branch: Option<String>,
    #[arg(long)]
    outer_branch: bool,
    #[command(flatten)]
    check: CheckFlags,
    /// JSON output path (default stdout).
    #[arg(long)]
    out: Option<PathBuf>,
    /// CSV table path (default: next to --out with a .csv extension).
    #[arg(long)]
    csv: Option<PathBuf>,
    /// Rows in the `xi,phi,f,h` table.
    #[arg(long, default_value_t = 101)]
    samples: usize,
}

#[derive(Args)]
struct PortraitArgs {
    #[arg(long = "lambda-f", default_value_t = portrait::DEFAULT_LAMBDA_F, allow_hyphen_values = true)]
    lambda_f: f64,
    /// statement | proof
    #[arg(long, default_value = "statement")]
    q_variant: String,
    /// Initial condition `phi0,dphi0`; repeatable.
    #[arg(long = "init", allow_hyphen_values = true)]
    inits: Vec<String>,
    /// Additional random initial conditions.
    #[arg(long, default_value_t = 0)]
    random: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Range for random phi0, `a,b`.
    #[arg(long, default_value = "0.5,2", allow_hyphen_values = true)]
    phi_range: String,
    /// Range for random dphi0, `a,b`.
    #[arg(long, default_value = "-1,1", allow_hyphen_values = true)]
    dphi_range: String,
    #[arg(long, default_value_t = 2.0, allow_hyphen_values = true)]
    xi_end: f64,
    #[arg(long, default_value_t = 101)]
    samples: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct GeodesicArgs {
    /// JSON spec file; alternatively use --example.
    spec: Option<PathBuf>,
    /// Built-in example; example 5 is placed on the whole real line.
    #[arg(long)]
    example: Option<String>,
    /// full | paper-reduced
    #[arg(long, default_value = "full")]
    mode: String,
    #[arg(long, default_value_t = 10.0)]
    s_max: f64,
    /// Base position, comma separated.
    #[arg(long, allow_hyphen_values = true)]
    y0: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    v0: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    yf0: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    vf0: Option<String>,
    /// Random unit-speed initial states instead of an explicit one.
    #[arg(long)]
    random: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Uniform samples per trajectory (default: integrator steps).
    #[arg(long)]
    dense: Option<usize>,
    /// Run the forward/backward completeness probe and print JSON.
    #[arg(long)]
    probe: bool,
    #[arg(long, default_value_t = 100)]
    count: usize,
    #[arg(long, default_value_t = 1e-10)]
    rtol: f64,
    #[arg(long, default_value_t = 1e-12)]
    atol: f64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ExamplesArgs {
    #[arg(long, default_value_t = 1e-8)]
    tol: f64,
    #[arg(long, default_value_t = 200)]
    grid: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter("YAMABE_LOG")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Verify(a) => run_verify(a),
        Command::Family(a) => run_family(a),
        Command::Portrait(a) => run_portrait(a),
        Command::Geodesic(a) => run_geodesic(a),
        Command::Examples(a) => run_examples(a),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(p) => fs::write(p, text).map_err(|e| Error::Document(format!("cannot write {}: {e}", p.display()))),
        None => {
            let mut stdout = io::stdout().lock();
            stdout
                .write_all(text.as_bytes())
                .and_then(|_| stdout.flush())
                .map_err(|e| Error::Document(format!("cannot write to stdout: {e}")))
        }
    }
}

fn parse_list(key: &str, s: &str) -> Result<Vec<f64>> {
    s.split(',')
        .map(|t| {
            let t = t.trim();
            match t {
                "inf" | "+inf" => Ok(f64::INFINITY),
                "-inf" => Ok(f64::NEG_INFINITY),
                _ => t
                    .parse::<f64>()
                    .map_err(|_| Error::InvalidArgument(format!("--{key}: cannot parse `{t}` as a number"))),
            }
        })
        .collect()
}

fn parse_pair(key: &str, s: &str) -> Result<(f64, f64)> {
    match parse_list(key, s)?.as_slice() {
        [a, b] => Ok((*a, *b)),
        _ => Err(Error::InvalidArgument(format!("--{key} expects two comma-separated numbers"))),
    }
}

fn certify_options(check: &CheckFlags, doc: Option<&SpecDocument>) -> Result<CertifyOptions> {
    let equations = match check.equations.as_str() {
        "reduced" => EquationSet::Reduced,
        "tensor" => EquationSet::Tensor,
        "both" => EquationSet::Both,
        other => return Err(Error::InvalidArgument(format!("--equations: unknown set `{other}`"))),
    };
    Ok(CertifyOptions {
        grid: check.grid.or(doc.and_then(|d| d.grid)).unwrap_or(200),
        tolerance: check.tol.or(doc.and_then(|d| d.tolerance)),
        equations,
        ..CertifyOptions::default()
    })
}

fn apply_sign(spec: WarpedSolitonSpec, check: &CheckFlags) -> Result<WarpedSolitonSpec> {
    Ok(match &check.sign_variant {
        Some(s) => spec.with_sign(s.parse::<SignVariant>()?),
        None => spec,
    })
}

fn read_document(path: &Path) -> Result<SpecDocument> {
    let text = fs::read_to_string(path).map_err(|e| Error::Document(format!("cannot read {}: {e}", path.display())))?;
    SpecDocument::from_json(&text)
}

fn run_verify(a: VerifyArgs) -> Result<u8> {
    let doc = read_document(&a.spec)?;
    let spec = apply_sign(doc.build()?, &a.check)?;
    let report = certify_with(&spec, &certify_options(&a.check, Some(&doc))?)?;
    log::info!("verdict {}", report.verdict.as_str());
    emit(a.out.as_deref(), &(report.to_json() + "\n"))?;
    Ok(report.verdict.exit_code() as u8)
}

fn family_document(a: &FamilyArgs) -> Result<SpecDocument> {
    let id = a.id.as_str();
    if id.starts_with("example") {
        catalog::parse_id(id)?;
        return Ok(SpecDocument {
            family: Some(FamilyParams {
                id: id.to_string(),
                ..FamilyParams::default()
            }),
            ..SpecDocument::default()
        });
    }
    let lightlike = matches!(id, "thm18" | "almost-lightlike");
    let n = a.n.unwrap_or(if id == "thm15" { 3 } else { 4 });
    let d = a.d.unwrap_or(match id {
        "thm15" | "thm16" if n < 6 => 6 - n,
        "thm17" => 3,
        _ => 2,
    });
    let signature = match &a.signature {
        Some(s) => parse_list("signature", s)?,
        None if lightlike || id == "thm17" => (0..n).map(|i| if i == 0 { -1.0 } else { 1.0 }).collect(),
        None => vec![1.0; n],
    };
    let alpha = match &a.alpha {
        Some(s) => parse_list("alpha", s)?,
        None if lightlike => (0..n).map(|i| if i < 2 { 1.0 } else { 0.0 }).collect(),
        None if id == "thm17" => (0..n).map(|i| if i == 0 { 0.0 } else { 1.0 }).collect(),
        None => (0..n).map(|i| if i == 0 { 1.0 } else { 0.0 }).collect(),
    };
    let domain = match &a.domain {
        Some(s) => {
            let (lo, hi) = parse_pair("domain", s)?;
            Some([lo.is_finite().then_some(lo), hi.is_finite().then_some(hi)])
        }
        None if lightlike => Some([Some(-10.0), Some(10.0)]),
        None if id == "thm17" => Some([Some(-1.2), Some(1.2)]),
        None => None,
    };
    Ok(SpecDocument {
        n: Some(n),
        d: Some(d),
        rho: Some(a.rho.unwrap_or(0.0)),
        lambda_f: Some(a.lambda_f.unwrap_or(if id == "thm15" { portrait::DEFAULT_LAMBDA_F } else { 0.0 })),
        signature: Some(signature),
        alpha: Some(alpha),
        domain,
        profiles: None,
        family: Some(FamilyParams {
            id: id.to_string(),
            k1: a.k1.or((id != "thm17").then_some(1.0)),
            k2: a.k2.or(matches!(id, "thm15" | "thm16").then_some(1.0)),
            k3: a.k3,
            k4: a.k4,
            phi: a.phi.clone().or_else(|| default_profile(id, "phi")),
            f: a.f.clone().or_else(|| default_profile(id, "f")),
            z_p: a.z_p.clone().or_else(|| (id == "thm17").then(|| "-0.5".to_string())),
            c: a.c.or((id == "thm17").then_some(1.0)),
            q_variant: a.q_variant.clone(),
            branch: a.branch.clone(),
            outer_branch: a.outer_branch.then_some(true),
        }),
        tolerance: a.check.tol,
        grid: a.check.grid,
        sign_variant: a.check.sign_variant.clone(),
    })
}

// Without explicit profiles the CLI reproduces the catalog members.
fn default_profile(id: &str, which: &str) -> Option<String> {
    match (id, which) {
        ("thm17", "phi") => Some("abs(sec(xi))".into()),
        ("thm18" | "almost-lightlike", _) => Some("exp(0.5*xi)".into()),
        _ => None,
    }
}

fn profile_table(spec: &WarpedSolitonSpec, samples: usize) -> Result<String> {
    let (lo, hi) = grid_interval(spec)?;
    let mut w = csv::Writer::from_writer(vec![]);
    let io = |e: csv::Error| Error::Document(format!("csv output failed: {e}"));
    w.write_record(["xi", "phi", "f", "h"]).map_err(io)?;
    for xi in grid_points(lo, hi, samples.max(2)) {
        w.write_record([fmt17(xi), fmt17(spec.phi.value(xi)?), fmt17(spec.f.value(xi)?), fmt17(spec.h.value(xi)?)])
            .map_err(io)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Document(format!("csv output failed: {e}")))?;
    Ok(String::from_utf8(bytes).expect("csv is utf-8"))
}

fn run_family(a: FamilyArgs) -> Result<u8> {
    let doc = family_document(&a)?;
    let spec = doc.build()?;
    let report: ResidualReport = certify_with(&spec, &certify_options(&a.check, Some(&doc))?)?;
    let table = profile_table(&spec, a.samples)?;
    let csv_path = a.csv.clone().or_else(|| a.out.as_ref().map(|p| p.with_extension("csv")));
    if let Some(p) = &csv_path {
        emit(Some(p), &table)?;
    }
    let report_value: serde_json::Value = serde_json::from_str(&report.to_json()).expect("report is JSON");
    let mut body = json!({
        "spec": doc.to_json_value(),
        "verdict": report.verdict.as_str(),
        "report": report_value,
    });
    if csv_path.is_none() {
        body["table_csv"] = json!(table);
    }
    emit(a.out.as_deref(), &(serde_json::to_string_pretty(&body).expect("json") + "\n"))?;
    Ok(report.verdict.exit_code() as u8)
}

fn run_portrait(a: PortraitArgs) -> Result<u8> {
    let mut params = portrait::example1_params(a.lambda_f);
    params.q_variant = a.q_variant.parse()?;
    let mut inits = a
        .inits
        .iter()
        .map(|s| parse_pair("init", s))
        .collect::<Result<Vec<_>>>()?;
    if a.random > 0 {
        let (p0, p1) = parse_pair("phi-range", &a.phi_range)?;
        let (d0, d1) = parse_pair("dphi-range", &a.dphi_range)?;
        if !(0.0 < p0 && p0 < p1 && d0 < d1) {
            return Err(Error::InvalidArgument("random ranges need 0 < phi_a < phi_b and dphi_a < dphi_b".into()));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(a.seed);
        for _ in 0..a.random {
            inits.push((rng.random_range(p0..p1), rng.random_range(d0..d1)));
        }
    }
    if inits.is_empty() {
        inits = vec![(1.0, 0.0), (1.0, 0.5), (2.0, -0.5)];
    }
    let opts = PortraitOptions {
        xi_end: a.xi_end,
        samples: a.samples,
        ..PortraitOptions::default()
    };
    let trajs = portrait::phase_portrait(&params, &inits, &opts)?;
    let mut buf = Vec::new();
    portrait::write_csv(&trajs, &mut buf)?;
    emit(a.out.as_deref(), &String::from_utf8(buf).expect("csv is utf-8"))?;
    Ok(0)
}

fn geodesic_spec(a: &GeodesicArgs) -> Result<WarpedSolitonSpec> {
    match (&a.spec, &a.example) {
        (Some(_), Some(_)) => Err(Error::InvalidArgument("give either a spec file or --example".into())),
        (None, None) => Err(Error::InvalidArgument("a spec file or --example is required".into())),
        (Some(p), None) => read_document(p)?.build(),
        (None, Some(id)) => match catalog::parse_id(id)? {
            5 => catalog::example5(0.5, 1.0, 4, 2, Domain::real_line()),
            k => catalog::example(k),
        },
    }
}

fn run_geodesic(a: GeodesicArgs) -> Result<u8> {
    let spec = geodesic_spec(&a)?;
    let mode: GeodesicMode = a.mode.parse()?;
    let controls = Controls::with_tolerances(a.rtol, a.atol);
    if a.probe {
        let opts = ProbeOptions {
            count: a.count,
            s_max: a.s_max,
            seed: a.seed,
            controls,
            ..ProbeOptions::default()
        };
        let summary = geodesics::completeness_probe(&spec, mode, &opts)?;
        emit(a.out.as_deref(), &(serde_json::to_string_pretty(&summary).expect("json") + "\n"))?;
        return Ok(0);
    }
    if !(a.s_max > 0.0 && a.s_max.is_finite()) {
        return Err(Error::InvalidArgument(format!("--s-max must be positive, got {}", a.s_max)));
    }
    let sys = GeodesicSystem::new(&spec, mode)?;
    let (n, d) = (spec.n(), spec.d);
    let starts = match a.random {
        Some(count) => {
            let mut rng = ChaCha8Rng::seed_from_u64(a.seed);
            let center = geodesics::probe_center(&spec);
            (0..count)
                .map(|_| geodesics::sample_unit_speed(&sys, &mut rng, &center, 1.0))
                .collect::<Result<Vec<_>>>()?
        }
        None => {
            let vec_or = |key: &str, s: &Option<String>, m: usize| -> Result<Vec<f64>> {
                let v = match s {
                    Some(s) => parse_list(key, s)?,
                    None => vec![0.0; m],
                };
                if v.len() != m {
                    return Err(Error::InvalidArgument(format!("--{key} needs {m} entries, got {}", v.len())));
                }
                Ok(v)
            };
            let y0 = match &a.y0 {
                Some(_) => vec_or("y0", &a.y0, n)?,
                None => geodesics::probe_center(&spec),
            };
            vec![GeodesicState::new(y0, vec_or("v0", &a.v0, n)?, vec_or("yf0", &a.yf0, d)?, vec_or("vf0", &a.vf0, d)?)?]
        }
    };
    let trajs = starts
        .iter()
        .map(|st| geodesics::integrate_between(&sys, st, a.s_max, &controls, a.dense, true))
        .collect::<Result<Vec<_>>>()?;
    let mut buf = Vec::new();
    geodesics::write_csv(&trajs, n, d, &mut buf)?;
    emit(a.out.as_deref(), &String::from_utf8(buf).expect("csv is utf-8"))?;
    Ok(0)
}

fn run_examples(a: ExamplesArgs) -> Result<u8> {
    let start = std::time::Instant::now();
    let mut rows = vec![];
    let mut all = true;
    for entry in catalog::catalog()? {
        let report = certify_with(&entry.spec, &CertifyOptions::new(a.grid, a.tol))?;
        all &= report.verdict == Verdict::Certified;
        let max_reduced = ["h_equation", "diagonal_hessian", "diagonal_gradient", "lightlike_balance"]
            .iter()
            .filter_map(|k| report.max_residual(k))
            .fold(0.0f64, f64::max);
        rows.push(json!({
            "id": entry.id,
            "description": entry.description,
            "verdict": report.verdict.as_str(),
            "max_reduced": max_reduced,
            "max_tensor": report.max_residual("full_tensor"),
            "interval": report.interval,
        }));
    }
    let body = json!({
        "examples": rows,
        "all_certified": all,
        "seconds": start.elapsed().as_secs_f64(),
    });
    emit(a.out.as_deref(), &(serde_json::to_string_pretty(&body).expect("json") + "\n"))?;
    Ok(if all { 0 } else { Verdict::Rejected.exit_code() as u8 })
}
