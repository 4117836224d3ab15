//! Stability (ergodicity) conditions phrased through the regional mean drifts.

use serde::{Deserialize, Serialize};

use super::{MeanDrift, RandomWalkSpec, Region};

/// Values within this distance of zero are flagged as ties in diagnostics.
const TIE_BAND: f64 = 1e-12;

/// `x1*y2 - x2*y1`.
pub fn wedge(x: [f64; 2], y: [f64; 2]) -> f64 {
    x[0] * y[1] - x[1] * y[0]
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum StabilityCase {
    A,
    B,
    C,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Relation {
    #[serde(rename = "<0")]
    Negative,
    #[serde(rename = ">0")]
    Positive,
    #[serde(rename = ">=0")]
    NonNegative,
    #[serde(rename = "==0")]
    Zero,
}

/// One evaluated inequality `quantity relation 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Inequality {
    pub case: Option<StabilityCase>,
    pub quantity: String,
    pub value: f64,
    pub relation: Relation,
    pub holds: bool,
    /// `|value| <= 1e-12`
    pub tie: bool,
}

impl Inequality {
    fn eval(case: Option<StabilityCase>, quantity: &str, value: f64, relation: Relation, margin: f64) -> Self {
        let holds = match relation {
            Relation::Negative => value < -margin,
            Relation::Positive => value > margin,
            Relation::NonNegative => value >= 0.0,
            Relation::Zero => value == 0.0,
        };
        Inequality {
            case,
            quantity: quantity.to_string(),
            value,
            relation,
            holds,
            tie: value.abs() <= TIE_BAND,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StabilityVerdict {
    pub stable: bool,
    pub case: Option<StabilityCase>,
    pub diagnostics: Vec<Inequality>,
}

pub fn check_stability(spec: &RandomWalkSpec) -> StabilityVerdict {
    check_stability_with_margin(spec, 0.0)
}

/// Evaluates the three cases exactly as stated, with strict inequalities
/// tightened by `margin` (zero by default). The first case that holds, in
/// order A, B, C, is reported.
pub fn check_stability_with_margin(spec: &RandomWalkSpec, margin: f64) -> StabilityVerdict {
    use Relation::*;
    use StabilityCase::*;
    let e = spec.drift(Region::Interior);
    let f1 = spec.drift(Region::Face1);
    let f2 = spec.drift(Region::Face2);
    let e_f1 = wedge(e.as_array(), f1.as_array());
    let e_f2 = wedge(e.as_array(), f2.as_array());
    let ineq = |case, q: &str, v, r| Inequality::eval(Some(case), q, v, r, margin);

    let case_a = vec![
        ineq(A, "mu1^E", e.mu1, Negative),
        ineq(A, "mu2^E", e.mu2, Negative),
        ineq(A, "mu^E ^ mu^{1}", e_f1, Negative),
        ineq(A, "mu^E ^ mu^{2}", e_f2, Positive),
    ];
    let a_holds = case_a.iter().all(|i| i.holds);

    let mut case_b = vec![
        ineq(B, "mu1^E", e.mu1, NonNegative),
        ineq(B, "mu2^E", e.mu2, Negative),
        ineq(B, "mu^E ^ mu^{1}", e_f1, Negative),
    ];
    // conditional clause: mu2^{2} < 0 whenever mu1^{2} = 0
    let b_cond = ineq(B, "mu1^{2}", f2.mu1, Zero);
    let b_extra = ineq(B, "mu2^{2}", f2.mu2, Negative);
    let b_holds = case_b.iter().all(|i| i.holds) && (!b_cond.holds || b_extra.holds);
    case_b.push(b_cond);
    case_b.push(b_extra);

    let mut case_c = vec![
        ineq(C, "mu1^E", e.mu1, Negative),
        ineq(C, "mu2^E", e.mu2, NonNegative),
        ineq(C, "mu^E ^ mu^{2}", e_f2, Positive),
    ];
    let c_cond = ineq(C, "mu2^{1}", f1.mu2, Zero);
    let c_extra = ineq(C, "mu1^{1}", f1.mu1, Negative);
    let c_holds = case_c.iter().all(|i| i.holds) && (!c_cond.holds || c_extra.holds);
    case_c.push(c_cond);
    case_c.push(c_extra);

    let case = if a_holds {
        Some(A)
    } else if b_holds {
        Some(B)
    } else if c_holds {
        Some(C)
    } else {
        None
    };
    let mut diagnostics = case_a;
    diagnostics.extend(case_b);
    diagnostics.extend(case_c);
    StabilityVerdict {
        stable: case.is_some(),
        case,
        diagnostics,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NegativeDriftVerdict {
    pub holds: bool,
    pub face1: MeanDrift,
    pub face2: MeanDrift,
    pub diagnostics: Vec<Inequality>,
}

/// `mu1^{1} < 0`, `mu2^{2} < 0` and `mu^{1} ^ mu^{2} > 0`.
pub fn check_negative_face_drift(spec: &RandomWalkSpec) -> NegativeDriftVerdict {
    let f1 = spec.drift(Region::Face1);
    let f2 = spec.drift(Region::Face2);
    let diagnostics = vec![
        Inequality::eval(None, "mu1^{1}", f1.mu1, Relation::Negative, 0.0),
        Inequality::eval(None, "mu2^{2}", f2.mu2, Relation::Negative, 0.0),
        Inequality::eval(None, "mu^{1} ^ mu^{2}", wedge(f1.as_array(), f2.as_array()), Relation::Positive, 0.0),
    ];
    NegativeDriftVerdict {
        holds: diagnostics.iter().all(|i| i.holds),
        face1: f1,
        face2: f2,
        diagnostics,
    }
}
