//! Regular and general (singular) type: claims with certificates, and the
//! rules combining them.

mod regular;
mod singular;

pub use regular::{reg_type, BranchEnd, BranchRecord, RegTypeClaim};
pub use singular::{desingularize, sing_type_search, Desingularization, SingClaim};

use std::cmp::Ordering;
use std::fmt;

use crate::algebra::Order;
use crate::curve::pullback;
use crate::error::{Error, Result};
use crate::germ::{normalize_to_graph, DefiningFunction, GraphForm, PsVerdict};
use crate::scalar::Real;

#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub enum TypeValue<R> {
    ExactValue(R),
    AtLeast(R),
    Infinite,
}

impl<R: Real> TypeValue<R> {
    /// `None` stands for ∞.
    pub fn value(&self) -> Option<&R> {
        match self {
            TypeValue::ExactValue(v) | TypeValue::AtLeast(v) => Some(v),
            TypeValue::Infinite => None,
        }
    }

    pub fn is_exact(&self) -> bool {
        !matches!(self, TypeValue::AtLeast(_))
    }

    /// Compares the numbers claimed, ∞ being largest.
    pub fn value_cmp(&self, other: &Self) -> Ordering {
        match (self.value(), other.value()) {
            (None, None) => Ordering::Equal,
            (None, Some(_)) => Ordering::Greater,
            (Some(_), None) => Ordering::Less,
            (Some(a), Some(b)) => a.cmp(b),
        }
    }

    pub fn exceeds(&self, v: &R) -> bool {
        self.value().map_or(true, |x| x > v)
    }
}

impl<R: Real> fmt::Display for TypeValue<R> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TypeValue::ExactValue(v) => write!(f, "{}", v),
            TypeValue::AtLeast(v) => write!(f, ">= {}", v),
            TypeValue::Infinite => write!(f, "infinite"),
        }
    }
}

/// Inputs to [`infer_type`]; any part may be missing.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct TypeEvidence<R> {
    pub reg: Option<RegTypeClaim<R>>,
    pub sing: Option<SingClaim<R>>,
    pub ps: Option<PsVerdict>,
    /// Accept `NoViolationUpToBounds` as if PS were proved.
    pub assume_ps: bool,
}

impl<R> Default for TypeEvidence<R> {
    fn default() -> Self {
        Self { reg: None, sing: None, ps: None, assume_ps: false }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub enum Rule {
    /// A regular claim bounds the general type from below.
    RegularBound,
    /// An exhibited curve bounds the general type from below.
    ExhibitedCurve,
    /// Regular type 2 or 3 equals the general type.
    LowRegularType,
    /// Regular type 4 together with PS gives general type 4.
    RegularFourWithPs,
    /// Nothing sharper applies.
    LowerBoundOnly,
}

impl Rule {
    pub fn as_str(self) -> &'static str {
        match self {
            Rule::RegularBound => "regular-bound",
            Rule::ExhibitedCurve => "exhibited-curve",
            Rule::LowRegularType => "low-regular-type",
            Rule::RegularFourWithPs => "regular-four-with-ps",
            Rule::LowerBoundOnly => "lower-bound-only",
        }
    }
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct InferenceStep {
    pub rule: Rule,
    pub claim: String,
    pub note: Option<String>,
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct TypeReport<R> {
    pub reg_type: Option<TypeValue<R>>,
    pub sing_type: Option<TypeValue<R>>,
    pub reg_certificate: Option<RegTypeClaim<R>>,
    pub sing_certificate: Option<SingClaim<R>>,
    pub trail: Vec<InferenceStep>,
    pub assumptions: Vec<String>,
}

/// Re-checks the exhibited curves of the claims by exact pullback.
fn reverify<R: Real>(gf: &GraphForm<R>, ev: &TypeEvidence<R>) -> Result<()> {
    let check = |z: &crate::curve::CurveJet<R>, claimed: Option<Order>, what: &str| -> Result<()> {
        let order = pullback(&gf.g, z)?.order_of_vanishing();
        if Some(order) != claimed {
            return Err(Error::VerificationFailed(format!(
                "{} curve {} has pullback order {}, claimed {:?}",
                what, z, order, claimed
            )));
        }
        Ok(())
    };
    if let Some(reg) = &ev.reg {
        if let Some(z) = &reg.curve {
            check(z, reg.pullback_order, "regular")?;
        }
    }
    if let Some(sing) = &ev.sing {
        if let Some(z) = &sing.curve {
            check(z, sing.pullback_order, "singular")?;
        }
    }
    Ok(())
}

fn lower_bound<R: Real>(v: &TypeValue<R>) -> TypeValue<R> {
    match v {
        TypeValue::ExactValue(x) => TypeValue::AtLeast(x.clone()),
        other => other.clone(),
    }
}

/// Combines regular-type, search and PS evidence into a type report.
///
/// Rules, in order: exhibited curves give lower bounds; regular type 2 or 3
/// is the general type; regular type 4 with a certified PS verdict is the
/// general type; otherwise the general type stays a lower bound. Every rule
/// that fires is recorded in the trail.
pub fn infer_type<R: Real>(r: &DefiningFunction<R>, ev: &TypeEvidence<R>) -> Result<TypeReport<R>> {
    let level = ev.reg.as_ref().map_or(2, |c| c.max_level);
    let gf = normalize_to_graph(r, level.max(2))?;
    if gf.pure_order_bound.is_exact() {
        reverify(&gf, ev)?;
    }
    let mut trail = Vec::new();
    let mut assumptions = Vec::new();
    let reg_type = ev.reg.as_ref().map(|c| c.value.clone());

    let mut bound: Option<TypeValue<R>> = None;
    if let Some(reg) = &reg_type {
        let v = lower_bound(reg);
        trail.push(InferenceStep { rule: Rule::RegularBound, claim: format!("general type {}", v), note: None });
        bound = Some(v);
    }
    if let Some(sing) = &ev.sing {
        if sing.curve.is_some() {
            let v = lower_bound(&sing.value);
            trail.push(InferenceStep {
                rule: Rule::ExhibitedCurve,
                claim: format!("general type {}", v),
                note: sing.curve.as_ref().map(|z| format!("curve {}", z)),
            });
            if bound.as_ref().map_or(true, |b| v.value_cmp(b) == Ordering::Greater) {
                bound = Some(v);
            }
        }
    }
    if matches!(bound, Some(TypeValue::Infinite)) {
        let sing_type = Some(TypeValue::Infinite);
        return Ok(TypeReport {
            reg_type,
            sing_type,
            reg_certificate: ev.reg.clone(),
            sing_certificate: ev.sing.clone(),
            trail,
            assumptions,
        });
    }

    let exhibited = ev.sing.as_ref().filter(|s| s.curve.is_some()).map(|s| s.value.clone());
    let contradiction = |v: &R, rule: &str| -> Result<()> {
        if let Some(x) = &exhibited {
            if x.exceeds(v) {
                return Err(Error::ContradictoryEvidence(format!(
                    "rule {} gives general type {} but a curve of ratio {} is exhibited",
                    rule, v, x
                )));
            }
        }
        Ok(())
    };

    let mut sing_type = bound.clone();
    let two = R::from_int(2);
    let three = R::from_int(3);
    let four = R::from_int(4);
    match &reg_type {
        Some(TypeValue::ExactValue(v)) if *v == two || *v == three => {
            contradiction(v, Rule::LowRegularType.as_str())?;
            let note = (*v == three).then(|| "value 3 rests on an asserted, unproved implication".to_string());
            trail.push(InferenceStep {
                rule: Rule::LowRegularType,
                claim: format!("general type = {}", v),
                note,
            });
            sing_type = Some(TypeValue::ExactValue(v.clone()));
        }
        Some(TypeValue::ExactValue(v)) if *v == four => {
            let accepted = match ev.ps {
                Some(PsVerdict::Certified) => true,
                Some(PsVerdict::NoViolationUpToBounds) if ev.assume_ps => {
                    assumptions.push("PS assumed from a bounded search without violations".into());
                    true
                }
                _ => false,
            };
            if accepted {
                contradiction(v, Rule::RegularFourWithPs.as_str())?;
                trail.push(InferenceStep {
                    rule: Rule::RegularFourWithPs,
                    claim: "general type = 4".into(),
                    note: ev.ps.map(|p| format!("PS verdict {}", p)),
                });
                sing_type = Some(TypeValue::ExactValue(v.clone()));
            } else {
                let why = match ev.ps {
                    Some(PsVerdict::NoViolationUpToBounds) => "bounded search is not a proof of PS".to_string(),
                    Some(p) => format!("PS verdict {}", p),
                    None => "no PS evidence".to_string(),
                };
                trail.push(InferenceStep {
                    rule: Rule::LowerBoundOnly,
                    claim: format!("general type {}", sing_type.as_ref().map_or("unknown".into(), |s| s.to_string())),
                    note: Some(why),
                });
            }
        }
        _ => {
            trail.push(InferenceStep {
                rule: Rule::LowerBoundOnly,
                claim: format!("general type {}", sing_type.as_ref().map_or("unknown".into(), |s| s.to_string())),
                note: None,
            });
        }
    }
    Ok(TypeReport {
        reg_type,
        sing_type,
        reg_certificate: ev.reg.clone(),
        sing_certificate: ev.sing.clone(),
        trail,
        assumptions,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::{parse_expression, VarNames};
    use crate::search::SearchBudget;
    use crate::{Polynomial, Rational};

    fn setup(text: &str, n: usize) -> (DefiningFunction<Rational>, GraphForm<Rational>) {
        let r: Polynomial = parse_expression(text, &VarNames::z(n)).unwrap();
        let r = DefiningFunction::validate(r).unwrap();
        let gf = normalize_to_graph(&r, 8).unwrap();
        (r, gf)
    }

    fn small() -> SearchBudget {
        SearchBudget { max_multiplicity: 3, max_degree: 4, coeff_height: 2, random_trials: 200, seed: 3 }
    }

    fn int(k: i64) -> Rational {
        Rational::from_integer(k.into())
    }

    #[test]
    fn exhibited_zero_pullback_wins() {
        let (r, gf) = setup("2*Re(z3) + abs2(z1^2 - z2^3)", 3);
        let ev = TypeEvidence {
            reg: Some(reg_type(&gf, 8).unwrap()),
            sing: Some(sing_type_search(&gf, &small()).unwrap()),
            ..Default::default()
        };
        let rep = infer_type(&r, &ev).unwrap();
        assert_eq!(rep.reg_type, Some(TypeValue::ExactValue(int(6))));
        assert_eq!(rep.sing_type, Some(TypeValue::Infinite));
        assert!(rep.trail.iter().any(|s| s.rule == Rule::ExhibitedCurve));
    }

    #[test]
    fn certified_quartic_sum_is_four() {
        let (r, gf) = setup("2*Re(z3) + abs2(z1)^2 + abs2(z2)^2", 3);
        let ev = TypeEvidence {
            reg: Some(reg_type(&gf, 6).unwrap()),
            sing: Some(sing_type_search(&gf, &small()).unwrap()),
            ps: Some(PsVerdict::Certified),
            assume_ps: false,
        };
        let rep = infer_type(&r, &ev).unwrap();
        assert_eq!(rep.sing_type, Some(TypeValue::ExactValue(int(4))));
        assert_eq!(rep.trail.last().unwrap().rule, Rule::RegularFourWithPs);
    }

    #[test]
    fn bounded_search_needs_the_flag() {
        let (r, gf) = setup("2*Re(z3) + abs2(z1)^2 + abs2(z2)^2", 3);
        let mut ev = TypeEvidence {
            reg: Some(reg_type(&gf, 6).unwrap()),
            ps: Some(PsVerdict::NoViolationUpToBounds),
            ..Default::default()
        };
        let rep = infer_type(&r, &ev).unwrap();
        assert_eq!(rep.sing_type, Some(TypeValue::AtLeast(int(4))));
        ev.assume_ps = true;
        let rep = infer_type(&r, &ev).unwrap();
        assert_eq!(rep.sing_type, Some(TypeValue::ExactValue(int(4))));
        assert_eq!(rep.assumptions.len(), 1);
    }

    #[test]
    fn definite_levi_form_needs_no_ps() {
        let (r, gf) = setup("2*Re(z2) + abs2(z1)", 2);
        let ev = TypeEvidence { reg: Some(reg_type(&gf, 4).unwrap()), ..Default::default() };
        let rep = infer_type(&r, &ev).unwrap();
        assert_eq!(rep.sing_type, Some(TypeValue::ExactValue(int(2))));
        assert_eq!(rep.trail.last().unwrap().rule, Rule::LowRegularType);
    }

    #[test]
    fn contradiction_is_surfaced() {
        let (r, gf) = setup("2*Re(z3) + abs2(z1^2 - z2^3)", 3);
        let mut reg = reg_type(&gf, 8).unwrap();
        reg.value = TypeValue::ExactValue(int(4));
        let ev = TypeEvidence {
            reg: Some(reg),
            sing: Some(SingClaim { value: TypeValue::AtLeast(int(5)), ..sing_type_search(&gf, &small()).unwrap() }),
            ps: Some(PsVerdict::Certified),
            assume_ps: false,
        };
        assert!(matches!(infer_type(&r, &ev), Err(Error::ContradictoryEvidence(_))));
    }
}
