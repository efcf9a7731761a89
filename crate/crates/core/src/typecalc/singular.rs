//! Lower bounds for the general type by curve search, and the passage from a
//! singular curve of contact `4m` to a regular curve of contact 4.

use num_traits::Zero;
use rayon::prelude::*;

use crate::algebra::{CPolynomial, ExponentPair, Order, Truncation};
use crate::curve::{contact_order, lowest_term_profile, pullback, ContactRatio, CurveJet};
use crate::error::{Error, Result};
use crate::germ::GraphForm;
use crate::scalar::{Gaussian, Real};
use crate::search::{
    cancellation_curves, height_values, monomial_curves, primitive_exponents, random_curves, seed_coefficients,
    SearchBudget,
};

use super::TypeValue;

/// Best curve found by [`sing_type_search`].
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct SingClaim<R> {
    /// Always a lower bound, or `Infinite` with a zero-pullback curve.
    pub value: TypeValue<R>,
    pub curve: Option<CurveJet<R>>,
    pub pullback_order: Option<Order>,
    pub ratio: Option<ContactRatio<R>>,
    pub candidates: u64,
    pub budget: SearchBudget,
}

fn rank<R: Real>(r: &ContactRatio<R>) -> (Option<&R>, bool) {
    (r.value(), matches!(r, ContactRatio::Exact(_)))
}

/// Index and ratio of the best candidate, the first one winning ties.
fn best_of<R: Real>(g: &CPolynomial<R>, curves: &[CurveJet<R>]) -> Option<(usize, ContactRatio<R>, Order)> {
    let scored: Vec<Option<(ContactRatio<R>, Order)>> = curves
        .par_iter()
        .map(|z| contact_order(g, z).ok().map(|c| (c.ratio::<R>(), c.pullback_order)))
        .collect();
    let mut best: Option<(usize, ContactRatio<R>, Order)> = None;
    for (i, s) in scored.into_iter().enumerate() {
        let Some((ratio, order)) = s else { continue };
        let better = match &best {
            None => true,
            Some((_, b, _)) => match ratio.rank_cmp(b) {
                std::cmp::Ordering::Greater => true,
                std::cmp::Ordering::Equal => rank(&ratio).1 && !rank(b).1,
                std::cmp::Ordering::Less => false,
            },
        };
        if better {
            let infinite = order == Order::IdenticallyZero;
            best = Some((i, ratio, order));
            if infinite {
                break;
            }
        }
    }
    best
}

/// Bounded search for curves of large contact ratio with `{2Re(z_n) + g = 0}`
/// among curves with `z_n ≡ 0`.
///
/// Candidates, in order: monomial curves with seed coefficients, monomial
/// curves with a one-unknown leading cancellation over values of height at
/// most `coeff_height`, and seeded random curves of multiplicity at least 2.
/// The first curve of maximal ratio is reported; an identically vanishing
/// pullback ends the search.
pub fn sing_type_search<R: Real>(gf: &GraphForm<R>, budget: &SearchBudget) -> Result<SingClaim<R>> {
    budget.validate()?;
    let g = &gf.g;
    let n = g.nvars();
    if n == 0 {
        return Err(Error::InvalidArgument("curve search needs at least one graph variable".into()));
    }
    let exps: Vec<Vec<u32>> = primitive_exponents(n, budget.max_degree)
        .into_iter()
        .filter(|e| e.iter().filter(|&&x| x > 0).min().map_or(false, |&m| m <= budget.max_multiplicity))
        .collect();
    let seeds = seed_coefficients::<R>();
    let heights = height_values::<R>(budget.coeff_height);
    let phases: [Box<dyn Fn() -> Vec<CurveJet<R>> + '_>; 3] = [
        Box::new(|| exps.par_iter().flat_map_iter(|e| monomial_curves(e, &seeds).collect::<Vec<_>>()).collect()),
        Box::new(|| {
            exps.par_iter()
                .flat_map_iter(|e| (0..n).flat_map(|j| cancellation_curves(g, e, j, &heights)).collect::<Vec<_>>())
                .collect()
        }),
        Box::new(|| random_curves::<R>(n, budget, 2.min(budget.max_multiplicity))),
    ];
    let mut seen = 0u64;
    let mut best: Option<(CurveJet<R>, ContactRatio<R>, Order)> = None;
    for phase in phases.iter() {
        let curves = phase();
        if let Some((i, ratio, order)) = best_of(g, &curves) {
            let replace = match &best {
                None => true,
                Some((_, b, _)) => ratio.rank_cmp(b) == std::cmp::Ordering::Greater,
            };
            if replace {
                best = Some((curves[i].clone(), ratio, order));
            }
            if order == Order::IdenticallyZero {
                seen += i as u64 + 1;
                break;
            }
        }
        seen += curves.len() as u64;
    }
    let (value, curve, order, ratio) = match best {
        None => (TypeValue::AtLeast(R::zero()), None, None, None),
        Some((z, ratio, order)) => {
            let value = match &ratio {
                ContactRatio::Infinite => TypeValue::Infinite,
                ContactRatio::Exact(v) | ContactRatio::AtLeast(v) => TypeValue::AtLeast(v.clone()),
            };
            (value, Some(z), Some(order), Some(ratio))
        }
    };
    Ok(SingClaim { value, curve, pullback_order: order, ratio, candidates: seen, budget: *budget })
}

/// A regular curve of contact 4 built from a singular one of contact `4m`.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Desingularization<R> {
    pub input: CurveJet<R>,
    pub multiplicity: u32,
    pub eta: CurveJet<R>,
    pub eta_pullback: CPolynomial<R>,
    /// Coefficient of `t^{2m} t̄^{2m}` in `z^*g`.
    pub input_coefficient: Gaussian<R>,
    /// Coefficient of `t² t̄²` in `η^*g`.
    pub eta_coefficient: Gaussian<R>,
}

fn bidegree_coefficient<R: Real>(u: &CPolynomial<R>, p: u32, q: u32) -> Gaussian<R> {
    u.coeff(&ExponentPair::new(&[p], &[q]))
}

/// `η(t) = A t + B t²` with `A`, `B` the coefficients of `t^m` and `t^{2m}`
/// in `z`, checked by exact pullback: `ν(η) = 1`, `ν(η^*g) = 4`, and the
/// `t²t̄²` coefficient of `η^*g` equals the `t^{2m}t̄^{2m}` one of `z^*g`.
///
/// `z` may be given in the `n − 1` graph variables or with a last component,
/// which must then vanish identically.
pub fn desingularize<R: Real>(gf: &GraphForm<R>, z: &CurveJet<R>) -> Result<Desingularization<R>> {
    let g = &gf.g;
    let n = g.nvars();
    let z = if z.ncomponents() == n + 1 {
        if !z.is_component_zero(n) {
            return Err(Error::NotInGraphFrame);
        }
        z.drop_last_component()?
    } else if z.ncomponents() == n {
        z.clone()
    } else {
        return Err(Error::Dimension { expected: n, found: z.ncomponents() });
    };
    let m = z.multiplicity();
    if m < 2 {
        return Err(Error::MultiplicityMismatch { expected: 2, found: m });
    }
    let pulled = pullback(g, &z)?;
    let order = pulled.order_of_vanishing();
    if order != Order::Exact(4 * m) {
        return Err(Error::ContactNotFourM { expected: 4 * m, found: order.to_string() });
    }
    let profile = lowest_term_profile(&pulled)?;
    let ck = profile.ck.expect("even order");
    if !ck.is_positive_real() {
        return Err(Error::PsViolatedAlongCurve(ck.to_string()));
    }
    let a = z.coefficient_vector(m as usize);
    let b = z.coefficient_vector(2 * m as usize);
    let coeffs: Vec<Vec<Gaussian<R>>> =
        a.into_iter().zip(b).map(|(x, y)| vec![Gaussian::zero(), x, y]).collect();
    let eta = CurveJet::from_coefficients(coeffs, Truncation::Exact)?;
    if eta.multiplicity() != 1 {
        return Err(Error::VerificationFailed(format!("η = {} is not regular", eta)));
    }
    let eta_pullback = pullback(g, &eta)?;
    let eta_order = eta_pullback.order_of_vanishing();
    if eta_order != Order::Exact(4) {
        return Err(Error::VerificationFailed(format!("ν(η^*g) is {}, not 4", eta_order)));
    }
    let eta_coefficient = bidegree_coefficient(&eta_pullback, 2, 2);
    let input_coefficient = bidegree_coefficient(&pulled, 2 * m, 2 * m);
    if eta_coefficient != input_coefficient {
        return Err(Error::VerificationFailed(format!(
            "t²t̄² coefficient {} of η^*g differs from {} in z^*g",
            eta_coefficient, input_coefficient
        )));
    }
    Ok(Desingularization { input: z, multiplicity: m, eta, eta_pullback, input_coefficient, eta_coefficient })
}
