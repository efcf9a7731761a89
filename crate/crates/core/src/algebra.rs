//! Sparse polynomials in conjugate variable pairs `(z, z̄)` with exact
//! Gaussian-rational coefficients and jet truncation tracking.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_traits::{One, Zero};
use smallvec::{smallvec, SmallVec};

use crate::error::{Error, Result};
use crate::scalar::{Gaussian, Real};

pub type Exponents = SmallVec<[u32; 4]>;

/// Exponents of a monomial `z^holo · z̄^anti`.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct ExponentPair {
    pub holo: Exponents,
    pub anti: Exponents,
}

impl ExponentPair {
    pub fn constant(n: usize) -> Self {
        Self { holo: smallvec![0; n], anti: smallvec![0; n] }
    }

    pub fn new(holo: &[u32], anti: &[u32]) -> Self {
        assert_eq!(holo.len(), anti.len(), "holo/anti length mismatch");
        Self { holo: holo.into(), anti: anti.into() }
    }

    pub fn nvars(&self) -> usize {
        self.holo.len()
    }

    pub fn holo_degree(&self) -> u32 {
        self.holo.iter().sum()
    }

    pub fn anti_degree(&self) -> u32 {
        self.anti.iter().sum()
    }

    pub fn degree(&self) -> u32 {
        self.holo_degree() + self.anti_degree()
    }

    /// Holomorphic or antiholomorphic (the constant counts as pure).
    pub fn is_pure(&self) -> bool {
        self.holo_degree() == 0 || self.anti_degree() == 0
    }

    pub fn is_mixed(&self) -> bool {
        !self.is_pure()
    }

    pub fn swapped(&self) -> Self {
        Self { holo: self.anti.clone(), anti: self.holo.clone() }
    }

    fn product(&self, other: &Self) -> Self {
        Self {
            holo: self.holo.iter().zip(&other.holo).map(|(a, b)| a + b).collect(),
            anti: self.anti.iter().zip(&other.anti).map(|(a, b)| a + b).collect(),
        }
    }
}

/// Graded lexicographic: total degree first, then holomorphic exponents,
/// then antiholomorphic exponents, each compared lexicographically.
impl Ord for ExponentPair {
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree()
            .cmp(&other.degree())
            .then_with(|| other.holo.cmp(&self.holo))
            .then_with(|| other.anti.cmp(&self.anti))
    }
}

impl PartialOrd for ExponentPair {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub enum Kind {
    Holo,
    Anti,
}

/// Whether a value is an honest polynomial or only known modulo terms of
/// total degree above `N`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub enum Truncation {
    Exact,
    Jet(u32),
}

impl Truncation {
    /// The weaker of two truncations (`Exact` behaves as ∞).
    pub fn meet(self, other: Self) -> Self {
        match (self, other) {
            (Truncation::Exact, t) | (t, Truncation::Exact) => t,
            (Truncation::Jet(a), Truncation::Jet(b)) => Truncation::Jet(a.min(b)),
        }
    }

    pub fn order(self) -> Option<u32> {
        match self {
            Truncation::Exact => None,
            Truncation::Jet(n) => Some(n),
        }
    }

    pub fn admits(self, degree: u32) -> bool {
        match self {
            Truncation::Exact => true,
            Truncation::Jet(n) => degree <= n,
        }
    }

    pub fn is_exact(self) -> bool {
        self == Truncation::Exact
    }
}

/// Order of vanishing at the origin.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub enum Order {
    Exact(u32),
    AtLeast(u32),
    IdenticallyZero,
}

impl Order {
    /// Lower bound on the order; `None` for the zero polynomial.
    pub fn lower_bound(self) -> Option<u32> {
        match self {
            Order::Exact(k) | Order::AtLeast(k) => Some(k),
            Order::IdenticallyZero => None,
        }
    }

    pub fn exact(self) -> Option<u32> {
        match self {
            Order::Exact(k) => Some(k),
            _ => None,
        }
    }
}

impl fmt::Display for Order {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Order::Exact(k) => write!(f, "{}", k),
            Order::AtLeast(k) => write!(f, ">= {}", k),
            Order::IdenticallyZero => write!(f, "infinite"),
        }
    }
}

/// A polynomial in `z_1..z_n, z̄_1..z̄_n`.
///
/// The term map never stores zero coefficients, and a `Jet(N)` value never
/// stores a term of total degree above `N`, so structural equality is
/// mathematical equality.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct CPolynomial<R> {
    nvars: usize,
    terms: BTreeMap<ExponentPair, Gaussian<R>>,
    truncation: Truncation,
}

impl<R: Real> CPolynomial<R> {
    pub fn zero(nvars: usize) -> Self {
        Self { nvars, terms: BTreeMap::new(), truncation: Truncation::Exact }
    }

    pub fn constant(nvars: usize, c: Gaussian<R>) -> Self {
        let mut p = Self::zero(nvars);
        p.add_term(ExponentPair::constant(nvars), c);
        p
    }

    pub fn one(nvars: usize) -> Self {
        Self::constant(nvars, Gaussian::one())
    }

    /// The holomorphic coordinate `z_{index+1}` (0-based index).
    pub fn var(nvars: usize, index: usize) -> Self {
        Self::var_of_kind(nvars, index, Kind::Holo)
    }

    /// The antiholomorphic coordinate `z̄_{index+1}`.
    pub fn conj_var(nvars: usize, index: usize) -> Self {
        Self::var_of_kind(nvars, index, Kind::Anti)
    }

    pub fn var_of_kind(nvars: usize, index: usize, kind: Kind) -> Self {
        assert!(index < nvars, "variable index {} out of range for {} variables", index, nvars);
        let mut e = ExponentPair::constant(nvars);
        match kind {
            Kind::Holo => e.holo[index] = 1,
            Kind::Anti => e.anti[index] = 1,
        }
        Self::monomial(e, Gaussian::one())
    }

    pub fn monomial(exps: ExponentPair, c: Gaussian<R>) -> Self {
        let mut p = Self::zero(exps.nvars());
        p.add_term(exps, c);
        p
    }

    /// Builds a canonical polynomial from possibly repeated terms.
    pub fn from_terms<I>(nvars: usize, terms: I, truncation: Truncation) -> Self
    where
        I: IntoIterator<Item = (ExponentPair, Gaussian<R>)>,
    {
        let mut p = Self { nvars, terms: BTreeMap::new(), truncation };
        for (e, c) in terms {
            assert_eq!(e.nvars(), nvars, "exponent length does not match nvars");
            if truncation.admits(e.degree()) {
                p.add_term(e, c);
            }
        }
        p
    }

    fn add_term(&mut self, e: ExponentPair, c: Gaussian<R>) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(e) {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                *o.get_mut() += &c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn truncation(&self) -> Truncation {
        self.truncation
    }

    pub fn terms(&self) -> impl Iterator<Item = (&ExponentPair, &Gaussian<R>)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Empty term map. For a jet this only says "zero through the jet order".
    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coeff(&self, e: &ExponentPair) -> Gaussian<R> {
        self.terms.get(e).cloned().unwrap_or_else(Gaussian::zero)
    }

    pub fn constant_term(&self) -> Gaussian<R> {
        self.coeff(&ExponentPair::constant(self.nvars))
    }

    pub fn min_degree(&self) -> Option<u32> {
        self.terms.keys().next().map(|e| e.degree())
    }

    pub fn max_degree(&self) -> Option<u32> {
        self.terms.keys().next_back().map(|e| e.degree())
    }

    /// Drops all terms of degree above `n` and weakens the truncation to `Jet(n)`.
    pub fn truncate(&self, n: u32) -> Self {
        let truncation = self.truncation.meet(Truncation::Jet(n));
        Self {
            nvars: self.nvars,
            terms: self
                .terms
                .iter()
                .filter(|(e, _)| e.degree() <= n)
                .map(|(e, c)| (e.clone(), c.clone()))
                .collect(),
            truncation,
        }
    }

    /// Reinterprets the stored terms as an exact polynomial (e.g. a Taylor
    /// polynomial taken as a defining function in its own right).
    pub fn into_exact(mut self) -> Self {
        self.truncation = Truncation::Exact;
        self
    }

    pub fn with_truncation(&self, truncation: Truncation) -> Self {
        match truncation {
            Truncation::Exact => self.clone(),
            Truncation::Jet(n) => self.truncate(n),
        }
    }

    fn check_dims(&self, other: &Self) -> Result<()> {
        if self.nvars != other.nvars {
            return Err(Error::Dimension { expected: self.nvars, found: other.nvars });
        }
        Ok(())
    }

    pub fn checked_add(&self, other: &Self) -> Result<Self> {
        self.check_dims(other)?;
        let truncation = self.truncation.meet(other.truncation);
        let mut out = Self { nvars: self.nvars, terms: BTreeMap::new(), truncation };
        for (e, c) in self.terms.iter().chain(other.terms.iter()) {
            if truncation.admits(e.degree()) {
                out.add_term(e.clone(), c.clone());
            }
        }
        Ok(out)
    }

    pub fn checked_sub(&self, other: &Self) -> Result<Self> {
        self.checked_add(&other.neg_ref())
    }

    fn neg_ref(&self) -> Self {
        Self {
            nvars: self.nvars,
            terms: self.terms.iter().map(|(e, c)| (e.clone(), -c)).collect(),
            truncation: self.truncation,
        }
    }

    pub fn checked_mul(&self, other: &Self) -> Result<Self> {
        self.check_dims(other)?;
        Ok(self.mul_within(other, self.truncation.meet(other.truncation)))
    }

    /// Product keeping only terms admitted by `truncation`.
    fn mul_within(&self, other: &Self, truncation: Truncation) -> Self {
        let mut out = Self { nvars: self.nvars, terms: BTreeMap::new(), truncation };
        let limit = truncation.order();
        for (ea, ca) in &self.terms {
            let da = ea.degree();
            if limit.is_some_and(|n| da > n) {
                break;
            }
            for (eb, cb) in &other.terms {
                if limit.is_some_and(|n| da + eb.degree() > n) {
                    break;
                }
                out.add_term(ea.product(eb), ca * cb);
            }
        }
        out
    }

    pub fn scale(&self, k: &Gaussian<R>) -> Self {
        Self::from_terms(
            self.nvars,
            self.terms.iter().map(|(e, c)| (e.clone(), c * k)),
            self.truncation,
        )
    }

    pub fn pow(&self, k: u32) -> Self {
        let mut acc = Self::one(self.nvars).with_truncation(self.truncation);
        for _ in 0..k {
            acc = acc.mul_within(self, self.truncation);
        }
        acc
    }

    /// Swaps holomorphic and antiholomorphic exponents and conjugates coefficients.
    pub fn conjugate(&self) -> Self {
        Self {
            nvars: self.nvars,
            terms: self.terms.iter().map(|(e, c)| (e.swapped(), c.conj())).collect(),
            truncation: self.truncation,
        }
    }

    pub fn is_real_valued(&self) -> bool {
        self.terms.iter().all(|(e, c)| {
            self.terms.get(&e.swapped()).is_some_and(|d| *d == c.conj())
        })
    }

    pub fn is_holomorphic(&self) -> bool {
        self.terms.keys().all(|e| e.anti_degree() == 0)
    }

    pub fn is_mixed_only(&self) -> bool {
        self.terms.keys().all(|e| e.is_mixed())
    }

    /// Formal `∂/∂z_j` or `∂/∂z̄_j` (0-based `index`). A `Jet(N)` input yields
    /// `Jet(N-1)`.
    ///
    /// Panics on a `Jet(0)` input, whose derivative carries no information.
    pub fn wirtinger(&self, index: usize, kind: Kind) -> Self {
        assert!(index < self.nvars, "variable index out of range");
        let truncation = match self.truncation {
            Truncation::Exact => Truncation::Exact,
            Truncation::Jet(0) => panic!("derivative of a degree-0 jet is unknown"),
            Truncation::Jet(n) => Truncation::Jet(n - 1),
        };
        let mut out = Self { nvars: self.nvars, terms: BTreeMap::new(), truncation };
        for (e, c) in &self.terms {
            let slot = match kind {
                Kind::Holo => e.holo[index],
                Kind::Anti => e.anti[index],
            };
            if slot == 0 {
                continue;
            }
            let mut d = e.clone();
            match kind {
                Kind::Holo => d.holo[index] -= 1,
                Kind::Anti => d.anti[index] -= 1,
            }
            out.add_term(d, c.scale(&R::from_int(slot as i64)));
        }
        out
    }

    pub fn order_of_vanishing(&self) -> Order {
        match (self.min_degree(), self.truncation) {
            (Some(k), _) => Order::Exact(k),
            (None, Truncation::Exact) => Order::IdenticallyZero,
            (None, Truncation::Jet(n)) => Order::AtLeast(n + 1),
        }
    }

    /// Splits into (pure, mixed); the constant term goes to the pure side.
    pub fn pure_mixed_split(&self) -> (Self, Self) {
        let mut pure = Self { nvars: self.nvars, terms: BTreeMap::new(), truncation: self.truncation };
        let mut mixed = pure.clone();
        for (e, c) in &self.terms {
            if e.is_pure() {
                pure.terms.insert(e.clone(), c.clone());
            } else {
                mixed.terms.insert(e.clone(), c.clone());
            }
        }
        (pure, mixed)
    }

    /// Terms with no antiholomorphic factor and positive degree.
    pub fn holomorphic_part(&self) -> Self {
        Self {
            nvars: self.nvars,
            terms: self
                .terms
                .iter()
                .filter(|(e, _)| e.anti_degree() == 0 && e.holo_degree() > 0)
                .map(|(e, c)| (e.clone(), c.clone()))
                .collect(),
            truncation: self.truncation,
        }
    }

    /// Homogeneous component of total degree `d`.
    pub fn homogeneous(&self, d: u32) -> Self {
        Self {
            nvars: self.nvars,
            terms: self
                .terms
                .iter()
                .filter(|(e, _)| e.degree() == d)
                .map(|(e, c)| (e.clone(), c.clone()))
                .collect(),
            truncation: Truncation::Exact,
        }
    }

    /// Coefficients of `z_1..z_n` in the linear part.
    pub fn holomorphic_linear_coefficients(&self) -> Vec<Gaussian<R>> {
        (0..self.nvars)
            .map(|j| {
                let mut e = ExponentPair::constant(self.nvars);
                e.holo[j] = 1;
                self.coeff(&e)
            })
            .collect()
    }

    /// Lowest degree over the variables that actually occur.
    fn lowest_degree_of_image(image: &Self) -> Option<u32> {
        match image.order_of_vanishing() {
            Order::Exact(k) | Order::AtLeast(k) => Some(k),
            Order::IdenticallyZero => None,
        }
    }

    /// Composition `p(images, conj(images))`: holomorphic slots receive the
    /// images, antiholomorphic slots their conjugates.
    ///
    /// The result is known through the weakest degree guaranteed by the
    /// truncations of `self` and of the images that actually occur in `self`.
    pub fn substitute(&self, images: &[Self]) -> Result<Self> {
        if images.len() != self.nvars {
            return Err(Error::Dimension { expected: self.nvars, found: images.len() });
        }
        let target = match images.first() {
            Some(img) => img.nvars,
            None => return Ok(Self::constant(0, self.constant_term()).with_truncation(self.truncation)),
        };
        for img in images {
            if img.nvars != target {
                return Err(Error::Dimension { expected: target, found: img.nvars });
            }
        }

        let mut used = vec![false; self.nvars];
        for e in self.terms.keys() {
            for j in 0..self.nvars {
                if e.holo[j] > 0 || e.anti[j] > 0 {
                    used[j] = true;
                }
            }
        }

        let mut truncation = Truncation::Exact;
        for (j, img) in images.iter().enumerate() {
            if used[j] {
                truncation = truncation.meet(img.truncation);
            }
        }
        if let Truncation::Jet(n) = self.truncation {
            // Unknown terms of `self` have degree > n; after substitution they
            // have degree >= (n + 1) * (lowest image degree).
            let low = images.iter().filter_map(Self::lowest_degree_of_image).min();
            match low {
                Some(0) => return Err(Error::TruncationLost),
                Some(k) => truncation = truncation.meet(Truncation::Jet((n + 1) * k - 1)),
                None => {}
            }
        }

        let mut holo_powers: Vec<Vec<Self>> = vec![Vec::new(); self.nvars];
        let mut anti_powers: Vec<Vec<Self>> = vec![Vec::new(); self.nvars];
        let power = |cache: &mut Vec<Self>, base: &Self, k: u32| -> Self {
            if cache.is_empty() {
                cache.push(Self::one(target).with_truncation(truncation));
            }
            while cache.len() <= k as usize {
                let next = cache.last().unwrap().mul_within(base, truncation);
                cache.push(next);
            }
            cache[k as usize].clone()
        };
        let conj_images: Vec<Self> = images.iter().map(|p| p.conjugate()).collect();

        let mut out = Self { nvars: target, terms: BTreeMap::new(), truncation };
        for (e, c) in &self.terms {
            let mut acc = Self::constant(target, c.clone()).with_truncation(truncation);
            for j in 0..self.nvars {
                if acc.is_zero() {
                    break;
                }
                if e.holo[j] > 0 {
                    let pw = power(&mut holo_powers[j], &images[j], e.holo[j]);
                    acc = acc.mul_within(&pw, truncation);
                }
                if e.anti[j] > 0 {
                    let pw = power(&mut anti_powers[j], &conj_images[j], e.anti[j]);
                    acc = acc.mul_within(&pw, truncation);
                }
            }
            for (ea, ca) in acc.terms {
                out.add_term(ea, ca);
            }
        }
        Ok(out)
    }

    /// Reorders variables: variable `j` of the result is variable `perm[j]` of `self`.
    pub fn permute_vars(&self, perm: &[usize]) -> Self {
        assert_eq!(perm.len(), self.nvars);
        Self {
            nvars: self.nvars,
            terms: self
                .terms
                .iter()
                .map(|(e, c)| {
                    let holo = perm.iter().map(|&p| e.holo[p]).collect();
                    let anti = perm.iter().map(|&p| e.anti[p]).collect();
                    (ExponentPair { holo, anti }, c.clone())
                })
                .collect(),
            truncation: self.truncation,
        }
    }

    /// Embeds into a ring with `extra` additional trailing variables.
    pub fn extend_vars(&self, extra: usize) -> Self {
        let n = self.nvars + extra;
        Self {
            nvars: n,
            terms: self
                .terms
                .iter()
                .map(|(e, c)| {
                    let mut holo = e.holo.clone();
                    let mut anti = e.anti.clone();
                    holo.resize(n, 0);
                    anti.resize(n, 0);
                    (ExponentPair { holo, anti }, c.clone())
                })
                .collect(),
            truncation: self.truncation,
        }
    }

    /// Sets variable `index` (and its conjugate) to zero and removes it.
    pub fn eliminate_var(&self, index: usize) -> Self {
        assert!(index < self.nvars);
        Self {
            nvars: self.nvars - 1,
            terms: self
                .terms
                .iter()
                .filter(|(e, _)| e.holo[index] == 0 && e.anti[index] == 0)
                .map(|(e, c)| {
                    let mut holo = e.holo.clone();
                    let mut anti = e.anti.clone();
                    holo.remove(index);
                    anti.remove(index);
                    (ExponentPair { holo, anti }, c.clone())
                })
                .collect(),
            truncation: self.truncation,
        }
    }

    pub fn depends_on(&self, index: usize) -> bool {
        self.terms.keys().any(|e| e.holo[index] > 0 || e.anti[index] > 0)
    }

    pub fn map_coefficients<S: Real>(&self, f: impl Fn(&Gaussian<R>) -> Gaussian<S>) -> CPolynomial<S> {
        CPolynomial::from_terms(
            self.nvars,
            self.terms.iter().map(|(e, c)| (e.clone(), f(c))),
            self.truncation,
        )
    }
}

impl<'a, R: Real> Add<&'a CPolynomial<R>> for &'a CPolynomial<R> {
    type Output = CPolynomial<R>;
    fn add(self, rhs: &CPolynomial<R>) -> CPolynomial<R> {
        self.checked_add(rhs).expect("polynomial addition")
    }
}

impl<'a, R: Real> Sub<&'a CPolynomial<R>> for &'a CPolynomial<R> {
    type Output = CPolynomial<R>;
    fn sub(self, rhs: &CPolynomial<R>) -> CPolynomial<R> {
        self.checked_sub(rhs).expect("polynomial subtraction")
    }
}

impl<'a, R: Real> Mul<&'a CPolynomial<R>> for &'a CPolynomial<R> {
    type Output = CPolynomial<R>;
    fn mul(self, rhs: &CPolynomial<R>) -> CPolynomial<R> {
        self.checked_mul(rhs).expect("polynomial multiplication")
    }
}

impl<R: Real> Neg for &CPolynomial<R> {
    type Output = CPolynomial<R>;
    fn neg(self) -> CPolynomial<R> {
        self.neg_ref()
    }
}

impl<R: Real> Add for CPolynomial<R> {
    type Output = CPolynomial<R>;
    fn add(self, rhs: Self) -> Self {
        &self + &rhs
    }
}

impl<R: Real> Sub for CPolynomial<R> {
    type Output = CPolynomial<R>;
    fn sub(self, rhs: Self) -> Self {
        &self - &rhs
    }
}

impl<R: Real> Mul for CPolynomial<R> {
    type Output = CPolynomial<R>;
    fn mul(self, rhs: Self) -> Self {
        &self * &rhs
    }
}

impl<R: Real> Neg for CPolynomial<R> {
    type Output = CPolynomial<R>;
    fn neg(self) -> Self {
        self.neg_ref()
    }
}

impl<R: Real> fmt::Display for CPolynomial<R> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&crate::expr::print_polynomial(self, &crate::expr::VarNames::z(self.nvars)))
    }
}
