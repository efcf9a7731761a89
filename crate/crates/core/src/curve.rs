//! Holomorphic curve germs `t ↦ z(t)` with `z(0) = 0`, pullbacks and the
//! single-curve positivity test.

use std::collections::BTreeMap;
use std::fmt;

use num_traits::Zero;

use crate::algebra::{CPolynomial, ExponentPair, Kind, Order, Truncation};
use crate::error::{Error, Result};
use crate::expr::{print_tuple, VarNames};
use crate::scalar::{Gaussian, Real};

/// An n-tuple of polynomials in `t` without constant terms.
///
/// `coeffs[j][d]` is the coefficient of `t^d` in component `j`; index 0 is
/// always zero. Trailing zeros are trimmed.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct CurveJet<R> {
    coeffs: Vec<Vec<Gaussian<R>>>,
    truncation: Truncation,
}

impl<R: Real> CurveJet<R> {
    /// Builds a curve from per-component coefficient lists, `list[d]` being the
    /// coefficient of `t^d`.
    pub fn from_coefficients(mut coeffs: Vec<Vec<Gaussian<R>>>, truncation: Truncation) -> Result<Self> {
        for (j, c) in coeffs.iter_mut().enumerate() {
            if c.first().is_some_and(|c0| !c0.is_zero()) {
                return Err(Error::CurveNotBased(j));
            }
            if let Some(n) = truncation.order() {
                c.truncate(n as usize + 1);
            }
            while c.last().is_some_and(|x| x.is_zero()) {
                c.pop();
            }
        }
        let curve = Self { coeffs, truncation };
        if curve.coeffs.iter().all(|c| c.is_empty()) {
            return Err(Error::ConstantCurve);
        }
        Ok(curve)
    }

    /// Builds a curve from one-variable holomorphic polynomials in `t`.
    pub fn from_polynomials(components: &[CPolynomial<R>]) -> Result<Self> {
        let mut truncation = Truncation::Exact;
        let mut coeffs = Vec::with_capacity(components.len());
        for (j, p) in components.iter().enumerate() {
            if p.nvars() != 1 {
                return Err(Error::Dimension { expected: 1, found: p.nvars() });
            }
            if !p.is_holomorphic() {
                return Err(Error::InvalidArgument(format!("component {} is not holomorphic in t", j + 1)));
            }
            truncation = truncation.meet(p.truncation());
            let mut c = vec![Gaussian::zero(); p.max_degree().map_or(0, |d| d as usize + 1)];
            for (e, v) in p.terms() {
                c[e.holo[0] as usize] = v.clone();
            }
            coeffs.push(c);
        }
        Self::from_coefficients(coeffs, truncation)
    }

    /// `(c_1 t^{e_1}, ..., c_n t^{e_n})`; a zero coefficient or exponent
    /// gives a zero component.
    pub fn monomial(exponents: &[u32], coefficients: &[Gaussian<R>]) -> Result<Self> {
        assert_eq!(exponents.len(), coefficients.len());
        let coeffs = exponents
            .iter()
            .zip(coefficients)
            .map(|(&e, c)| {
                if e == 0 || c.is_zero() {
                    Vec::new()
                } else {
                    let mut v = vec![Gaussian::zero(); e as usize + 1];
                    v[e as usize] = c.clone();
                    v
                }
            })
            .collect();
        Self::from_coefficients(coeffs, Truncation::Exact)
    }

    pub fn ncomponents(&self) -> usize {
        self.coeffs.len()
    }

    pub fn truncation(&self) -> Truncation {
        self.truncation
    }

    pub fn coefficients(&self) -> &[Vec<Gaussian<R>>] {
        &self.coeffs
    }

    /// Coefficient of `t^d` in component `j`.
    pub fn coefficient(&self, j: usize, d: usize) -> Gaussian<R> {
        self.coeffs[j].get(d).cloned().unwrap_or_else(Gaussian::zero)
    }

    /// The vector of `t^d` coefficients across components.
    pub fn coefficient_vector(&self, d: usize) -> Vec<Gaussian<R>> {
        (0..self.ncomponents()).map(|j| self.coefficient(j, d)).collect()
    }

    /// `z^{(d)}(0) = d! · (coefficient of t^d)`.
    pub fn derivative_vector(&self, d: usize) -> Vec<Gaussian<R>> {
        let f = factorial::<R>(d as u32);
        self.coefficient_vector(d).iter().map(|c| c.scale(&f)).collect()
    }

    pub fn degree(&self) -> u32 {
        self.coeffs.iter().map(|c| c.len().saturating_sub(1) as u32).max().unwrap_or(0)
    }

    /// Multiplicity ν(z): the lowest power of `t` present in any component.
    pub fn multiplicity(&self) -> u32 {
        self.coeffs
            .iter()
            .filter_map(|c| c.iter().position(|x| !x.is_zero()))
            .min()
            .expect("nonconstant curve") as u32
    }

    pub fn is_regular(&self) -> bool {
        self.multiplicity() == 1
    }

    pub fn is_component_zero(&self, j: usize) -> bool {
        self.coeffs[j].is_empty()
    }

    /// Component polynomials in `t`, carrying the curve's truncation.
    pub fn to_polynomials(&self) -> Vec<CPolynomial<R>> {
        self.coeffs
            .iter()
            .map(|c| {
                CPolynomial::from_terms(
                    1,
                    c.iter()
                        .enumerate()
                        .map(|(d, v)| (ExponentPair::new(&[d as u32], &[0]), v.clone())),
                    self.truncation,
                )
            })
            .collect()
    }

    /// `Some((exponent, coefficient))` per component when every component is
    /// a single monomial (or zero, reported with exponent 0).
    pub fn as_monomial(&self) -> Option<Vec<(u32, Gaussian<R>)>> {
        self.coeffs
            .iter()
            .map(|c| {
                let nz: Vec<usize> = (0..c.len()).filter(|&d| !c[d].is_zero()).collect();
                match nz.as_slice() {
                    [] => Some((0, Gaussian::zero())),
                    [d] => Some((*d as u32, c[*d].clone())),
                    _ => None,
                }
            })
            .collect()
    }

    /// Reparametrization `t ↦ λt`.
    pub fn rescale_parameter(&self, lambda: &Gaussian<R>) -> Result<Self> {
        let coeffs = self
            .coeffs
            .iter()
            .map(|c| c.iter().enumerate().map(|(d, v)| v * &lambda.pow(d as u32)).collect())
            .collect();
        Self::from_coefficients(coeffs, self.truncation)
    }

    /// Drops coefficients above `t^n`; the result is a jet of order `n`.
    pub fn truncate(&self, n: u32) -> Result<Self> {
        Self::from_coefficients(self.coeffs.clone(), self.truncation.meet(Truncation::Jet(n)))
    }

    /// Appends `extra` zero components (e.g. `z_n ≡ 0`).
    pub fn pad_zeros(&self, extra: usize) -> Self {
        let mut coeffs = self.coeffs.clone();
        coeffs.extend(std::iter::repeat_with(Vec::new).take(extra));
        Self { coeffs, truncation: self.truncation }
    }

    pub fn drop_last_component(&self) -> Result<Self> {
        let mut coeffs = self.coeffs.clone();
        coeffs.pop();
        Self::from_coefficients(coeffs, self.truncation)
    }
}

impl<R: Real> fmt::Display for CurveJet<R> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&print_tuple(&self.to_polynomials(), &VarNames::t()))
    }
}

pub(crate) fn factorial<R: Real>(k: u32) -> R {
    (1..=k as i64).fold(R::one(), |acc, j| acc * R::from_int(j))
}

/// `t ↦ r(z(t))` as a polynomial in `(t, t̄)`.
pub fn pullback<R: Real>(r: &CPolynomial<R>, z: &CurveJet<R>) -> Result<CPolynomial<R>> {
    if r.nvars() != z.ncomponents() {
        return Err(Error::Dimension { expected: r.nvars(), found: z.ncomponents() });
    }
    if z.truncation.is_exact() {
        if let Some(mono) = z.as_monomial() {
            return Ok(pullback_monomial(r, &mono));
        }
    }
    r.substitute(&z.to_polynomials())
}

/// Term-by-term pullback along `(c_j t^{e_j})_j`: each monomial of `r` maps
/// to a single monomial in `(t, t̄)`.
fn pullback_monomial<R: Real>(r: &CPolynomial<R>, mono: &[(u32, Gaussian<R>)]) -> CPolynomial<R> {
    let mut acc: BTreeMap<(u32, u32), Gaussian<R>> = BTreeMap::new();
    'terms: for (e, c) in r.terms() {
        let mut p = 0;
        let mut q = 0;
        let mut v = c.clone();
        for (j, (ej, cj)) in mono.iter().enumerate() {
            let (a, b) = (e.holo[j], e.anti[j]);
            if a + b == 0 {
                continue;
            }
            if *ej == 0 {
                continue 'terms;
            }
            p += a * ej;
            q += b * ej;
            if a > 0 {
                v = &v * &cj.pow(a);
            }
            if b > 0 {
                v = &v * &cj.conj().pow(b);
            }
        }
        *acc.entry((p, q)).or_insert_with(Gaussian::zero) += &v;
    }
    let truncation = match r.truncation() {
        Truncation::Exact => Truncation::Exact,
        Truncation::Jet(n) => {
            let m = mono.iter().filter(|(e, _)| *e > 0).map(|(e, _)| *e).min().unwrap_or(1);
            Truncation::Jet((n + 1) * m - 1)
        }
    };
    CPolynomial::from_terms(
        1,
        acc.into_iter().map(|((p, q), c)| (ExponentPair::new(&[p], &[q]), c)),
        truncation,
    )
}

/// Order of contact of a curve with `{r = 0}` (or with a function `g`).
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub struct ContactOrder {
    pub pullback_order: Order,
    pub multiplicity: u32,
}

/// `ν(z^*r)/ν(z)` as an exact rational.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub enum ContactRatio<R> {
    Exact(R),
    AtLeast(R),
    Infinite,
}

impl<R: Real> ContactRatio<R> {
    /// Value for comparisons; `None` stands for ∞.
    pub fn value(&self) -> Option<&R> {
        match self {
            ContactRatio::Exact(v) | ContactRatio::AtLeast(v) => Some(v),
            ContactRatio::Infinite => None,
        }
    }

    /// Total order on lower bounds: ∞ is largest, and for equal values an
    /// exact ratio ranks above an `AtLeast` one.
    pub fn rank_cmp(&self, other: &Self) -> std::cmp::Ordering {
        use std::cmp::Ordering;
        match (self.value(), other.value()) {
            (None, None) => Ordering::Equal,
            (None, Some(_)) => Ordering::Greater,
            (Some(_), None) => Ordering::Less,
            (Some(a), Some(b)) => a.cmp(b),
        }
    }
}

impl<R: Real> fmt::Display for ContactRatio<R> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ContactRatio::Exact(v) => write!(f, "{}", v),
            ContactRatio::AtLeast(v) => write!(f, ">= {}", v),
            ContactRatio::Infinite => write!(f, "infinite"),
        }
    }
}

impl ContactOrder {
    pub fn is_infinite(&self) -> bool {
        self.pullback_order == Order::IdenticallyZero
    }

    pub fn ratio<R: Real>(&self) -> ContactRatio<R> {
        let m = R::from_int(self.multiplicity as i64);
        match self.pullback_order {
            Order::Exact(k) => ContactRatio::Exact(R::from_int(k as i64) / m),
            Order::AtLeast(k) => ContactRatio::AtLeast(R::from_int(k as i64) / m),
            Order::IdenticallyZero => ContactRatio::Infinite,
        }
    }
}

pub fn contact_order<R: Real>(r: &CPolynomial<R>, z: &CurveJet<R>) -> Result<ContactOrder> {
    let pulled = pullback(r, z)?;
    Ok(ContactOrder { pullback_order: pulled.order_of_vanishing(), multiplicity: z.multiplicity() })
}

/// Lowest homogeneous slice `Σ c_j t^j t̄^{order-j}` of a function of `t`.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct LowestTermProfile<R> {
    pub order: u32,
    /// `coefficients[j]` multiplies `t^j t̄^{order-j}`.
    pub coefficients: Vec<Gaussian<R>>,
    /// The balanced coefficient `c_{order/2}` when the order is even.
    pub ck: Option<Gaussian<R>>,
}

impl<R: Real> LowestTermProfile<R> {
    pub fn is_even(&self) -> bool {
        self.order % 2 == 0
    }
}

pub fn lowest_term_profile<R: Real>(u: &CPolynomial<R>) -> Result<LowestTermProfile<R>> {
    if u.nvars() != 1 {
        return Err(Error::Dimension { expected: 1, found: u.nvars() });
    }
    let order = u.min_degree().ok_or(Error::ZeroBelowTruncation)?;
    let slice = u.homogeneous(order);
    let mut coefficients = vec![Gaussian::zero(); order as usize + 1];
    for (e, c) in slice.terms() {
        coefficients[e.holo[0] as usize] = c.clone();
    }
    let ck = (order % 2 == 0).then(|| coefficients[(order / 2) as usize].clone());
    Ok(LowestTermProfile { order, coefficients, ck })
}

/// Verdict of the positivity test along one curve.
#[derive(Clone, PartialEq, Eq, Debug)]
pub enum PsOutcome<R> {
    /// Even order `2k` with balanced coefficient `ck > 0`.
    Pass { k: u32, ck: R },
    FailOdd { order: u32 },
    FailNonpositive { k: u32, ck: Gaussian<R> },
    /// Exact pullback vanishes identically; outside the scope of the test.
    InfiniteOrder,
    /// The pullback vanishes through its jet order.
    Indeterminate { at_least: u32 },
}

impl<R: Real> PsOutcome<R> {
    pub fn is_violation(&self) -> bool {
        matches!(self, PsOutcome::FailOdd { .. } | PsOutcome::FailNonpositive { .. })
    }
}

impl<R: Real> fmt::Display for PsOutcome<R> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PsOutcome::Pass { k, ck } => write!(f, "pass (order {}, c_k = {})", 2 * k, ck),
            PsOutcome::FailOdd { order } => write!(f, "fail (odd order {})", order),
            PsOutcome::FailNonpositive { k, ck } => {
                write!(f, "fail (order {}, c_k = {} not positive)", 2 * k, ck)
            }
            PsOutcome::InfiniteOrder => write!(f, "infinite order"),
            PsOutcome::Indeterminate { at_least } => write!(f, "indeterminate (order >= {})", at_least),
        }
    }
}

/// Classifies an already computed pullback.
pub fn ps_verdict<R: Real>(pulled: &CPolynomial<R>) -> PsOutcome<R> {
    match pulled.order_of_vanishing() {
        Order::IdenticallyZero => PsOutcome::InfiniteOrder,
        Order::AtLeast(k) => PsOutcome::Indeterminate { at_least: k },
        Order::Exact(_) => {
            let profile = lowest_term_profile(pulled).expect("nonzero pullback");
            match profile.ck {
                None => PsOutcome::FailOdd { order: profile.order },
                Some(ck) if ck.is_positive_real() => PsOutcome::Pass { k: profile.order / 2, ck: ck.re },
                Some(ck) => PsOutcome::FailNonpositive { k: profile.order / 2, ck },
            }
        }
    }
}

/// Property PS along a single curve.
pub fn ps_test_single<R: Real>(g: &CPolynomial<R>, z: &CurveJet<R>) -> Result<PsOutcome<R>> {
    Ok(ps_verdict(&pullback(g, z)?))
}

/// `(L^k u)(0)` with `L = ∂_t ∂_t̄`.
pub fn laplacian_power<R: Real>(u: &CPolynomial<R>, k: u32) -> Result<Gaussian<R>> {
    if u.nvars() != 1 {
        return Err(Error::Dimension { expected: 1, found: u.nvars() });
    }
    if let Truncation::Jet(n) = u.truncation() {
        if n < 2 * k {
            return Err(Error::InsufficientJet { needed: 2 * k, available: n });
        }
    }
    // Only the t^k t̄^k coefficient survives at the origin.
    let mut v = u.homogeneous(2 * k);
    for _ in 0..k {
        v = v.wirtinger(0, Kind::Holo).wirtinger(0, Kind::Anti);
    }
    Ok(v.constant_term())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::{parse_expression, parse_tuple};
    use crate::{Curve, GaussianRational, Polynomial};
    use num_rational::BigRational;
    use num_traits::One;

    fn g(text: &str, n: usize) -> Polynomial {
        parse_expression(text, &VarNames::z(n)).unwrap()
    }

    fn curve(text: &str) -> Curve {
        Curve::from_polynomials(&parse_tuple(text, &VarNames::t()).unwrap()).unwrap()
    }

    fn u(text: &str) -> Polynomial {
        parse_expression(text, &VarNames::t()).unwrap()
    }

    #[test]
    fn multiplicities() {
        assert_eq!(curve("(t^3, t^2, 0)").multiplicity(), 2);
        assert_eq!(curve("(t, 0, 0)").multiplicity(), 1);
        assert_eq!(curve("(-t^4, t^2)").multiplicity(), 2);
        assert_eq!(
            Curve::from_polynomials(&parse_tuple("(0, 0)", &VarNames::t()).unwrap()),
            Err(Error::ConstantCurve)
        );
        assert_eq!(
            Curve::from_polynomials(&parse_tuple("(1 + t, 0)", &VarNames::t()).unwrap()),
            Err(Error::CurveNotBased(0))
        );
    }

    #[test]
    fn pullbacks() {
        let r = g("2*Re(z3) + abs2(z1^2 - z2^3)", 3);
        assert!(pullback(&r, &curve("(t^3, t^2, 0)")).unwrap().is_zero());
        assert_eq!(pullback(&r, &curve("(t, 0, 0)")).unwrap(), u("t^2*conj(t)^2"));
        let g2 = g("abs2(z1 + z2^2) + abs2(z2)^2", 2);
        assert_eq!(pullback(&g2, &curve("(-t^4, t^2)")).unwrap(), u("t^4*conj(t)^4"));
        assert!(pullback(&g2, &curve("(t, 0, 0)")).is_err());
    }

    #[test]
    fn monomial_fast_path_matches_substitution() {
        let g2 = g("abs2(z1 + 2*i*z2^2) + 3*z1*conj(z2)^3 + 3*conj(z1)*z2^3", 2);
        let z = curve("((1 + i)*t^3, -1/2*t^2)");
        let fast = pullback(&g2, &z).unwrap();
        let slow = g2.substitute(&z.to_polynomials()).unwrap();
        assert_eq!(fast, slow);
        let jet = g2.truncate(4);
        assert_eq!(pullback(&jet, &z).unwrap(), jet.substitute(&z.to_polynomials()).unwrap());
    }

    #[test]
    fn contact_orders() {
        let r = g("2*Re(z3) + abs2(z1^2 - z2^3)", 3);
        let c = contact_order(&r, &curve("(t^3, t^2, 0)")).unwrap();
        assert!(c.is_infinite());
        assert_eq!(c.ratio::<BigRational>(), ContactRatio::Infinite);
        let c = contact_order(&r, &curve("(t, 0, 0)")).unwrap();
        assert_eq!(c.ratio::<BigRational>(), ContactRatio::Exact(BigRational::from_int(4)));
        let r2 = g("2*Re(z3) + abs2(z1 + z2^2) + abs2(z2)^2", 3);
        let c = contact_order(&r2, &curve("(-t^4, t^2, 0)")).unwrap();
        assert_eq!(c.pullback_order, Order::Exact(8));
        assert_eq!(c.multiplicity, 2);
        assert_eq!(c.ratio::<BigRational>(), ContactRatio::Exact(BigRational::from_int(4)));
    }

    #[test]
    fn profiles() {
        let p = lowest_term_profile(&u("t^2*conj(t)^2 + t^3*conj(t) + t*conj(t)^3")).unwrap();
        assert_eq!(p.order, 4);
        assert_eq!(p.ck, Some(GaussianRational::one()));
        assert!(p.is_even());
        let p = lowest_term_profile(&u("-t^2*conj(t)^2")).unwrap();
        assert_eq!(p.ck, Some(GaussianRational::from_int(-1)));
        let p = lowest_term_profile(&u("t^2*conj(t) + t*conj(t)^2")).unwrap();
        assert_eq!(p.order, 3);
        assert!(!p.is_even());
        assert_eq!(p.ck, None);
        assert_eq!(lowest_term_profile(&Polynomial::zero(1).truncate(5)), Err(Error::ZeroBelowTruncation));
    }

    #[test]
    fn single_curve_ps() {
        let g3 = g("z1*conj(z1) + z1*conj(z2)^2 + conj(z1)*z2^2", 2);
        assert_eq!(
            ps_test_single(&g3, &curve("(-t^2, t)")).unwrap(),
            PsOutcome::FailNonpositive { k: 2, ck: GaussianRational::from_int(-1) }
        );
        let full = g("abs2(z1 + z2^2)", 2);
        assert_eq!(ps_test_single(&full, &curve("(-t^2, t)")).unwrap(), PsOutcome::InfiniteOrder);
        assert_eq!(
            ps_test_single(&g("abs2(z1)", 2), &curve("(t, 0)")).unwrap(),
            PsOutcome::Pass { k: 1, ck: BigRational::from_int(1) }
        );
        let odd = g("z1^2*conj(z1) + z1*conj(z1)^2", 1);
        assert_eq!(ps_test_single(&odd, &curve("(t)")).unwrap(), PsOutcome::FailOdd { order: 3 });
        let jet = g("abs2(z1)^2", 2).truncate(3);
        assert_eq!(
            ps_test_single(&jet, &curve("(t, t)")).unwrap(),
            PsOutcome::Indeterminate { at_least: 4 }
        );
    }

    #[test]
    fn laplacian_powers() {
        assert_eq!(laplacian_power(&u("t*conj(t)"), 1).unwrap(), GaussianRational::one());
        assert_eq!(laplacian_power(&u("t^2*conj(t)^2"), 2).unwrap(), GaussianRational::from_int(4));
        assert_eq!(
            laplacian_power(&u("t^2*conj(t)^2").truncate(3), 2),
            Err(Error::InsufficientJet { needed: 4, available: 3 })
        );
        assert_eq!(laplacian_power(&u("t^3*conj(t) + 5*t^2*conj(t)^2").truncate(4), 2).unwrap(),
            GaussianRational::from_int(20));
    }

    #[test]
    fn derivative_vectors_and_rescaling() {
        let z = curve("(2*t^3, t)");
        assert_eq!(z.derivative_vector(3), vec![GaussianRational::from_int(12), GaussianRational::zero()]);
        let w = z.rescale_parameter(&GaussianRational::from_int(2)).unwrap();
        assert_eq!(w, curve("(16*t^3, 2*t)"));
        assert_eq!(z.pad_zeros(1).ncomponents(), 3);
    }
}
