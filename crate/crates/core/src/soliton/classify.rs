use serde::{Deserialize, Serialize};

use crate::geometry::CausalClass;
use crate::soliton::spec::{Rho, WarpedSolitonSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RhoClass {
    Shrinking,
    Steady,
    Expanding,
    /// `rho` is a function (almost soliton).
    Almost,
}

impl RhoClass {
    pub fn of(rho: &Rho) -> Self {
        match rho.constant() {
            None => RhoClass::Almost,
            Some(r) if r > 0.0 => RhoClass::Shrinking,
            Some(r) if r < 0.0 => RhoClass::Expanding,
            Some(_) => RhoClass::Steady,
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            RhoClass::Shrinking => "shrinking",
            RhoClass::Steady => "steady",
            RhoClass::Expanding => "expanding",
            RhoClass::Almost => "almost",
        }
    }
}

/// Consequences of the lightlike balance `rho = lambda_F / f^2`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Guard {
    /// No soliton of this type exists; the message says which.
    Rejected { message: String },
    /// `f` must be the constant `sqrt(lambda_F / rho)`.
    ConstantWarping { value: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Classification {
    pub rho_class: RhoClass,
    pub causal_class: CausalClass,
    pub guard: Option<Guard>,
}

pub const NO_EXPANDING_OR_STEADY: &str =
    "lightlike direction with lambda_F > 0: no expanding or steady gradient Yamabe soliton exists (rho must be positive)";
pub const NO_SHRINKING_OR_STEADY: &str =
    "lightlike direction with lambda_F < 0: no shrinking or steady gradient Yamabe soliton exists (rho must be negative)";

pub fn classify(spec: &WarpedSolitonSpec) -> Classification {
    let rho_class = RhoClass::of(&spec.rho);
    let causal_class = spec.dir.causal_class();
    let guard = match (causal_class, spec.rho.constant()) {
        (CausalClass::Lightlike, Some(rho)) => lightlike_guard(spec.lambda_f, rho),
        _ => None,
    };
    Classification {
        rho_class,
        causal_class,
        guard,
    }
}

/// Guard for a lightlike direction; `None` when `lambda_F = 0`.
pub fn lightlike_guard(lambda_f: f64, rho: f64) -> Option<Guard> {
    if lambda_f == 0.0 {
        return None;
    }
    if lambda_f > 0.0 && rho <= 0.0 {
        return Some(Guard::Rejected {
            message: NO_EXPANDING_OR_STEADY.to_string(),
        });
    }
    if lambda_f < 0.0 && rho >= 0.0 {
        return Some(Guard::Rejected {
            message: NO_SHRINKING_OR_STEADY.to_string(),
        });
    }
    Some(Guard::ConstantWarping {
        value: (lambda_f / rho).sqrt(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn guards() {
        assert!(matches!(lightlike_guard(1.0, 0.0), Some(Guard::Rejected { message }) if message.contains("no expanding or steady")));
        assert!(matches!(lightlike_guard(-1.0, 0.5), Some(Guard::Rejected { message }) if message.contains("no shrinking or steady")));
        assert_eq!(lightlike_guard(1.0, 4.0), Some(Guard::ConstantWarping { value: 0.5 }));
        assert_eq!(lightlike_guard(-2.0, -8.0), Some(Guard::ConstantWarping { value: 0.5 }));
        assert_eq!(lightlike_guard(0.0, 3.0), None);
    }

    #[test]
    fn rho_sign_is_exact() {
        assert_eq!(RhoClass::of(&Rho::Constant(0.0)), RhoClass::Steady);
        assert_eq!(RhoClass::of(&Rho::Constant(-0.0)), RhoClass::Steady);
        assert_eq!(RhoClass::of(&Rho::Constant(1e-300)), RhoClass::Shrinking);
        assert_eq!(RhoClass::of(&Rho::Constant(-1e-300)), RhoClass::Expanding);
    }
}
