//! JSON spec documents: either explicit profile expressions or a family
//! constructor with its parameters.
//!
//! ```json
//! { "n": 4, "d": 2, "rho": 0, "lambda_F": 0,
//!   "signature": [1, 1, 1, 1], "alpha": [1, 0, 0, 0], "domain": [0, 100],
//!   "profiles": { "phi": "sqrt(xi/20)", "f": "sqrt(20/xi)", "h": "20*ln(xi)" },
//!   "tolerance": 1e-8, "grid": 200 }
//! ```
//!
//! `null` domain endpoints stand for an infinite end. A `family` object
//! replaces `profiles`; `example-k` families need no other keys.

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::families::{
    almost_soliton_lightlike, catalog, family_thm16, family_thm17, family_thm18, BaseSetup, Branch,
    QVariant, Thm15, Thm16,
};
use crate::geometry::{Domain, Profile, SignVariant};
use crate::soliton::{Rho, WarpedSolitonSpec};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProfileSources {
    pub phi: String,
    pub f: String,
    pub h: String,
    /// Function-valued `rho` for almost solitons; overrides the number.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rho: Option<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FamilyParams {
    pub id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k1: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k2: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k3: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k4: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phi: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub f: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub z_p: Option<String>,
    #[serde(rename = "C", default, skip_serializing_if = "Option::is_none")]
    pub c: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q_variant: Option<String>,
    /// Lambert W branch for thm15: `principal` or `lower`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub branch: Option<String>,
    /// thm16 with `k1 k3 > 0`: use the outer (coth) branch.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub outer_branch: Option<bool>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpecDocument {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rho: Option<f64>,
    #[serde(rename = "lambda_F", default, skip_serializing_if = "Option::is_none")]
    pub lambda_f: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub signature: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub domain: Option<[Option<f64>; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub profiles: Option<ProfileSources>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub family: Option<FamilyParams>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tolerance: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sign_variant: Option<String>,
}

fn missing(key: &str) -> Error {
    Error::Document(format!("missing key `{key}`"))
}

fn bad(key: &str, why: impl std::fmt::Display) -> Error {
    Error::Document(format!("key `{key}`: {why}"))
}

fn finite(key: &str, v: f64) -> Result<f64> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(bad(key, format!("must be finite, got {v}")))
    }
}

/// Key path of a nested error, e.g. `family.k1`.
fn keyed(key: &str, e: Error) -> Error {
    match e {
        Error::Document(m) => Error::Document(m),
        Error::Parse { offset, message } => bad(key, format!("parse error at byte {offset}: {message}")),
        other => bad(key, other),
    }
}

impl SpecDocument {
    pub fn from_json(text: &str) -> Result<Self> {
        let doc: SpecDocument =
            serde_json::from_str(text).map_err(|e| Error::Document(e.to_string()))?;
        doc.validate()?;
        Ok(doc)
    }

    pub fn to_json_value(&self) -> Value {
        serde_json::to_value(self).expect("document serializes")
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(self).expect("document serializes")
    }

    pub fn is_example(&self) -> bool {
        self.family.as_ref().is_some_and(|f| f.id.starts_with("example"))
    }

    /// Structural checks: exactly one of `profiles` / `family`, finite numbers.
    pub fn validate(&self) -> Result<()> {
        match (&self.profiles, &self.family) {
            (Some(_), Some(_)) => {
                return Err(Error::Document("keys `profiles` and `family` are mutually exclusive".into()))
            }
            (None, None) => return Err(Error::Document("one of the keys `profiles` or `family` is required".into())),
            _ => {}
        }
        if let Some(v) = self.rho {
            finite("rho", v)?;
        }
        if let Some(v) = self.lambda_f {
            finite("lambda_F", v)?;
        }
        if let Some(v) = self.tolerance {
            if !(v > 0.0 && v.is_finite()) {
                return Err(bad("tolerance", "must be positive"));
            }
        }
        if self.grid == Some(0) {
            return Err(bad("grid", "must be >= 1"));
        }
        if let Some(a) = &self.alpha {
            for v in a {
                finite("alpha", *v)?;
            }
        }
        if let Some(f) = &self.family {
            for (k, v) in [("family.k1", f.k1), ("family.k2", f.k2), ("family.k3", f.k3), ("family.k4", f.k4)] {
                if let Some(v) = v {
                    finite(k, v)?;
                }
            }
            if let Some(c) = f.c {
                if c.is_nan() {
                    return Err(bad("family.C", "must not be NaN"));
                }
            }
        }
        if self.is_example() {
            return Ok(());
        }
        for (key, present) in [
            ("n", self.n.is_some()),
            ("d", self.d.is_some()),
            ("signature", self.signature.is_some()),
            ("alpha", self.alpha.is_some()),
        ] {
            if !present {
                return Err(missing(key));
            }
        }
        if self.profiles.is_some() {
            for (key, present) in [
                ("rho", self.rho.is_some()),
                ("lambda_F", self.lambda_f.is_some()),
                ("domain", self.domain.is_some()),
            ] {
                if !present {
                    return Err(missing(key));
                }
            }
        }
        Ok(())
    }

    fn domain(&self) -> Result<Option<Domain>> {
        match self.domain {
            None => Ok(None),
            Some([a, b]) => {
                let lo = a.unwrap_or(f64::NEG_INFINITY);
                let hi = b.unwrap_or(f64::INFINITY);
                Domain::new(lo, hi).map(Some).map_err(|e| keyed("domain", e))
            }
        }
    }

    fn setup(&self) -> Result<BaseSetup> {
        let n = self.n.ok_or_else(|| missing("n"))?;
        let d = self.d.ok_or_else(|| missing("d"))?;
        let sig = self.signature.as_ref().ok_or_else(|| missing("signature"))?;
        let alpha = self.alpha.as_ref().ok_or_else(|| missing("alpha"))?;
        if sig.len() != n {
            return Err(bad("signature", format!("has {} entries, n = {n}", sig.len())));
        }
        if alpha.len() != n {
            return Err(bad("alpha", format!("has {} entries, n = {n}", alpha.len())));
        }
        let mut eps = Vec::with_capacity(n);
        for &s in sig {
            eps.push(match s {
                1.0 => 1i8,
                -1.0 => -1i8,
                other => return Err(bad("signature", format!("entries must be +1 or -1, got {other}"))),
            });
        }
        BaseSetup::new(eps, alpha.clone(), d).map_err(|e| match e {
            Error::InvalidSignature(m) => bad("signature", m),
            Error::DegenerateDirection => bad("alpha", "must have a nonzero entry"),
            other => other,
        })
    }

    fn sign(&self) -> Result<SignVariant> {
        match &self.sign_variant {
            None => Ok(SignVariant::default()),
            Some(s) => s.parse().map_err(|e| keyed("sign_variant", e)),
        }
    }

    /// Builds the spec. Family documents run their constructor, which may
    /// fail with the family's own precondition errors.
    pub fn build(&self) -> Result<WarpedSolitonSpec> {
        self.validate()?;
        let sign = self.sign()?;
        let spec = match (&self.profiles, &self.family) {
            (Some(p), _) => {
                let setup = self.setup()?;
                let dom = self.domain()?.ok_or_else(|| missing("domain"))?;
                let expr = |key: &str, src: &str| Profile::expression(src, dom).map_err(|e| keyed(key, e));
                let rho = match &p.rho {
                    Some(src) => Rho::Field(expr("profiles.rho", src)?),
                    None => Rho::Constant(self.rho.ok_or_else(|| missing("rho"))?),
                };
                WarpedSolitonSpec::with_rho(
                    setup.sig,
                    setup.dir,
                    setup.d,
                    rho,
                    self.lambda_f.ok_or_else(|| missing("lambda_F"))?,
                    expr("profiles.phi", &p.phi)?,
                    expr("profiles.f", &p.f)?,
                    expr("profiles.h", &p.h)?,
                    dom,
                )?
            }
            (None, Some(f)) => self.build_family(f)?,
            (None, None) => unreachable!("validated"),
        };
        Ok(spec.with_sign(sign))
    }

    fn build_family(&self, fp: &FamilyParams) -> Result<WarpedSolitonSpec> {
        let id = fp.id.as_str();
        if id.starts_with("example") {
            return catalog::example(catalog::parse_id(id).map_err(|e| keyed("family.id", e))?);
        }
        let setup = self.setup()?;
        let dom = self.domain()?;
        let rho = self.rho.unwrap_or(0.0);
        let lambda_f = self.lambda_f.unwrap_or(0.0);
        let need = |key: &'static str, v: Option<f64>| v.ok_or_else(|| missing(key));
        let need_expr = |key: &'static str, v: &Option<String>| -> Result<Profile> {
            let src = v.as_ref().ok_or_else(|| missing(key))?;
            let d = dom.unwrap_or(Domain::real_line());
            Profile::expression(src, d).map_err(|e| keyed(key, e))
        };
        let steady = |family: &str, allow_lambda: bool| -> Result<()> {
            if rho != 0.0 {
                return Err(Error::Precondition(format!("{family} constructs steady solitons (rho = 0), got rho = {rho}")));
            }
            if !allow_lambda && lambda_f != 0.0 {
                return Err(Error::Precondition(format!("{family} requires lambda_F = 0, got {lambda_f}")));
            }
            Ok(())
        };
        match id {
            "thm15" => {
                steady("thm15", true)?;
                let mut p = Thm15::new(
                    setup,
                    need("family.k1", fp.k1)?,
                    need("family.k2", fp.k2)?,
                    fp.k3.unwrap_or(0.0),
                    fp.k4.unwrap_or(0.0),
                    lambda_f,
                );
                if let Some(q) = &fp.q_variant {
                    p.q_variant = q.parse::<QVariant>().map_err(|e| keyed("family.q_variant", e))?;
                }
                if let Some(b) = &fp.branch {
                    p.branch = match b.as_str() {
                        "principal" => Branch::Principal,
                        "lower" => Branch::Lower,
                        other => return Err(bad("family.branch", format!("expected principal or lower, got {other}"))),
                    };
                }
                p.build(dom)?.spec()
            }
            "thm16" => {
                steady("thm16", false)?;
                let mut p = Thm16::new(
                    setup,
                    need("family.k1", fp.k1)?,
                    need("family.k2", fp.k2)?,
                    fp.k3.unwrap_or(0.0),
                    fp.k4.unwrap_or(0.0),
                );
                p.outer_branch = fp.outer_branch.unwrap_or(false);
                family_thm16(&p, dom)
            }
            "thm17" => {
                steady("thm17", false)?;
                family_thm17(
                    setup,
                    need_expr("family.phi", &fp.phi)?,
                    need_expr("family.z_p", &fp.z_p)?,
                    need("family.C", fp.c)?,
                    dom,
                )
            }
            "thm18" => {
                steady("thm18", false)?;
                family_thm18(
                    setup,
                    need_expr("family.phi", &fp.phi)?,
                    need_expr("family.f", &fp.f)?,
                    need("family.k1", fp.k1)?,
                    dom,
                )
            }
            "almost-lightlike" => almost_soliton_lightlike(
                setup,
                need_expr("family.phi", &fp.phi)?,
                need_expr("family.f", &fp.f)?,
                need("family.k1", fp.k1)?,
                lambda_f,
                dom,
            ),
            other => Err(bad(
                "family.id",
                format!("unknown family `{other}` (expected thm15, thm16, thm17, thm18, almost-lightlike or example-k)"),
            )),
        }
    }

    /// Document for a spec whose profiles are all expressions.
    pub fn from_spec(spec: &WarpedSolitonSpec, tolerance: Option<f64>, grid: Option<usize>) -> Result<Self> {
        let src = |what: &str, p: &Profile| {
            p.source()
                .map(str::to_string)
                .ok_or_else(|| Error::Document(format!("profile `{what}` is not an expression and cannot be serialized")))
        };
        let (rho, rho_src) = match &spec.rho {
            Rho::Constant(c) => (*c, None),
            Rho::Field(p) => (0.0, Some(src("rho", p)?)),
        };
        let end = |v: f64| v.is_finite().then_some(v);
        Ok(Self {
            n: Some(spec.n()),
            d: Some(spec.d),
            rho: Some(rho),
            lambda_f: Some(spec.lambda_f),
            signature: Some(spec.sig.epsilon().iter().map(|&e| e as f64).collect()),
            alpha: Some(spec.dir.alpha().to_vec()),
            domain: Some([end(spec.domain.lo), end(spec.domain.hi)]),
            profiles: Some(ProfileSources {
                phi: src("phi", &spec.phi)?,
                f: src("f", &spec.f)?,
                h: src("h", &spec.h)?,
                rho: rho_src,
            }),
            family: None,
            tolerance,
            grid,
            sign_variant: (spec.sign != SignVariant::default()).then(|| spec.sign.as_str().to_string()),
        })
    }
}

/// Key-order independent equality with numbers compared as `f64`.
pub fn json_equal(a: &Value, b: &Value) -> bool {
    match (a, b) {
        (Value::Number(x), Value::Number(y)) => x.as_f64() == y.as_f64(),
        (Value::Array(x), Value::Array(y)) => x.len() == y.len() && x.iter().zip(y).all(|(u, v)| json_equal(u, v)),
        (Value::Object(x), Value::Object(y)) => {
            x.len() == y.len() && x.iter().all(|(k, u)| y.get(k).is_some_and(|v| json_equal(u, v)))
        }
        _ => a == b,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const EXAMPLE2: &str = r#"{
        "n": 4, "d": 2, "rho": 0, "lambda_F": 0,
        "signature": [1, 1, 1, 1], "alpha": [1, 0, 0, 0], "domain": [0, 100],
        "profiles": {"phi": "sqrt(xi/20)", "f": "sqrt(20/xi)", "h": "20*ln(xi)"},
        "tolerance": 1e-8, "grid": 200
    }"#;

    #[test]
    fn parses_and_builds() {
        let doc = SpecDocument::from_json(EXAMPLE2).unwrap();
        let spec = doc.build().unwrap();
        assert_eq!(spec.n(), 4);
        assert!((spec.phi.value(20.0).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn missing_key_is_named() {
        let text = EXAMPLE2.replace(r#""alpha": [1, 0, 0, 0],"#, "");
        let e = SpecDocument::from_json(&text).unwrap_err();
        assert!(e.to_string().contains("`alpha`"), "{e}");
        let e = SpecDocument::from_json(&EXAMPLE2.replace("\"grid\"", "\"gird\"")).unwrap_err();
        assert!(e.to_string().contains("gird"), "{e}");
    }

    #[test]
    fn bad_expression_names_key() {
        let text = EXAMPLE2.replace("20*ln(xi)", "20*ln(xi");
        let e = SpecDocument::from_json(&text).unwrap().build().unwrap_err();
        assert!(e.to_string().contains("profiles.h"), "{e}");
    }

    #[test]
    fn round_trip() {
        let doc = SpecDocument::from_json(EXAMPLE2).unwrap();
        let spec = doc.build().unwrap();
        let back = SpecDocument::from_spec(&spec, doc.tolerance, doc.grid).unwrap();
        let original: Value = serde_json::from_str(EXAMPLE2).unwrap();
        assert!(json_equal(&back.to_json_value(), &original));
    }

    #[test]
    fn family_documents() {
        let doc = SpecDocument::from_json(r#"{"family": {"id": "example-3"}}"#).unwrap();
        assert!(doc.build().is_ok());
        let text = r#"{"n": 3, "d": 2, "signature": [1,1,1], "alpha": [1,0,0],
            "family": {"id": "thm16", "k1": 1, "k2": 1}}"#;
        let e = SpecDocument::from_json(text).unwrap().build().unwrap_err();
        assert!(e.to_string().contains("n + d = 6"), "{e}");
        let both = EXAMPLE2.replace("\"tolerance\"", r#""family": {"id": "thm16"}, "tolerance""#);
        assert!(SpecDocument::from_json(&both).is_err());
    }
}
