//! Budgets and candidate-curve generators shared by the PS search and the
//! singular-type search.

use std::collections::BTreeMap;

use num_integer::Integer;
use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::algebra::CPolynomial;
use crate::curve::CurveJet;
use crate::error::{Error, Result};
use crate::scalar::{Gaussian, Real};
use crate::Truncation;

#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub struct SearchBudget {
    pub max_multiplicity: u32,
    pub max_degree: u32,
    pub coeff_height: u32,
    pub random_trials: u32,
    pub seed: u64,
}

impl Default for SearchBudget {
    fn default() -> Self {
        Self { max_multiplicity: 4, max_degree: 8, coeff_height: 3, random_trials: 2000, seed: 0 }
    }
}

impl SearchBudget {
    pub fn validate(&self) -> Result<()> {
        if self.max_multiplicity == 0 || self.max_degree == 0 || self.coeff_height == 0 {
            return Err(Error::InvalidArgument("search budget limits must be positive".into()));
        }
        if self.max_multiplicity > self.max_degree {
            return Err(Error::InvalidArgument("max_multiplicity exceeds max_degree".into()));
        }
        Ok(())
    }
}

/// `1, -1, i, -i, 1/2, -1/2, 2, -2`.
pub fn seed_coefficients<R: Real>() -> Vec<Gaussian<R>> {
    let one = Gaussian::from_int(1);
    let half = Gaussian::from_frac(1, 2);
    let two = Gaussian::from_int(2);
    vec![one.clone(), -one, Gaussian::i(), -Gaussian::i(), half.clone(), -half, two.clone(), -two]
}

/// `±p/q` and `±i·p/q` for coprime `1 ≤ p, q ≤ height`, by increasing height.
pub fn height_values<R: Real>(height: u32) -> Vec<Gaussian<R>> {
    let mut fracs: Vec<(u32, u32)> = Vec::new();
    for p in 1..=height {
        for q in 1..=height {
            if p.gcd(&q) == 1 {
                fracs.push((p, q));
            }
        }
    }
    fracs.sort_by_key(|&(p, q)| (p.max(q), q, p));
    let mut out = Vec::with_capacity(4 * fracs.len());
    for (p, q) in fracs {
        let x = Gaussian::from_frac(p as i64, q as i64);
        let ix = &x * &Gaussian::i();
        out.push(x.clone());
        out.push(-x);
        out.push(ix.clone());
        out.push(-ix);
    }
    out
}

/// Exponent vectors in `[0, max_degree]^n` whose nonzero entries have gcd 1,
/// sorted by (multiplicity, largest exponent, lexicographic).
///
/// Non-primitive vectors are skipped: `t ↦ t^d` multiplies every order by `d`.
pub fn primitive_exponents(n: usize, max_degree: u32) -> Vec<Vec<u32>> {
    let mut out = Vec::new();
    let mut e = vec![0u32; n];
    loop {
        let mut j = 0;
        while j < n {
            if e[j] < max_degree {
                e[j] += 1;
                break;
            }
            e[j] = 0;
            j += 1;
        }
        if j == n {
            break;
        }
        let g = e.iter().fold(0u32, |acc, &x| acc.gcd(&x));
        if g == 1 {
            out.push(e.clone());
        }
    }
    out.sort_by(|a, b| {
        let key = |v: &Vec<u32>| {
            (v.iter().filter(|&&x| x > 0).min().copied().unwrap_or(0), v.iter().max().copied().unwrap_or(0))
        };
        key(a).cmp(&key(b)).then_with(|| a.cmp(b))
    });
    out
}

/// All monomial curves `(c_j t^{e_j})` with nonzero `c_j` drawn from `values`
/// on the support of `e`, in mixed-radix order.
pub fn monomial_curves<'a, R: Real>(
    e: &'a [u32],
    values: &'a [Gaussian<R>],
) -> impl Iterator<Item = CurveJet<R>> + 'a {
    let support: Vec<usize> = (0..e.len()).filter(|&j| e[j] > 0).collect();
    let total = values.len().checked_pow(support.len() as u32).unwrap_or(usize::MAX);
    (0..total).map(move |mut idx| {
        let mut coeffs = vec![Gaussian::zero(); e.len()];
        for &j in &support {
            coeffs[j] = values[idx % values.len()].clone();
            idx /= values.len();
        }
        CurveJet::monomial(e, &coeffs).expect("nonzero exponent vector")
    })
}

/// Monomial curves `(c_i t^{e_i})` with `c_i = 1` for `i ≠ j` and `c_j = x`,
/// where `x` ranges over `values` and annihilates the lowest-degree slice of
/// the pullback of `g` (a leading-term cancellation in one unknown).
pub fn cancellation_curves<R: Real>(
    g: &CPolynomial<R>,
    e: &[u32],
    j: usize,
    values: &[Gaussian<R>],
) -> Vec<CurveJet<R>> {
    if e[j] == 0 {
        return Vec::new();
    }
    // t-bidegree -> (power of x, power of x̄) -> coefficient
    let mut slices: BTreeMap<(u32, u32), BTreeMap<(u32, u32), Gaussian<R>>> = BTreeMap::new();
    'terms: for (ex, c) in g.terms() {
        let (mut p, mut q) = (0, 0);
        for i in 0..e.len() {
            let (a, b) = (ex.holo[i], ex.anti[i]);
            if a + b > 0 && e[i] == 0 {
                continue 'terms;
            }
            p += a * e[i];
            q += b * e[i];
        }
        let slot = slices.entry((p, q)).or_default().entry((ex.holo[j], ex.anti[j])).or_insert_with(Gaussian::zero);
        *slot += c;
    }
    let lowest = match slices.keys().map(|(p, q)| p + q).min() {
        Some(d) => d,
        None => return Vec::new(),
    };
    let low: Vec<&BTreeMap<(u32, u32), Gaussian<R>>> =
        slices.iter().filter(|((p, q), _)| p + q == lowest).map(|(_, v)| v).collect();
    let mut out = Vec::new();
    for x in values {
        let xc = x.conj();
        let vanishes = low.iter().all(|poly| {
            poly.iter()
                .map(|(&(a, b), c)| c * &(&x.pow(a) * &xc.pow(b)))
                .fold(Gaussian::zero(), |acc, v| &acc + &v)
                .is_zero()
        });
        if vanishes {
            let mut coeffs = vec![Gaussian::one(); e.len()];
            coeffs[j] = x.clone();
            out.push(CurveJet::monomial(e, &coeffs).expect("nonzero exponent vector"));
        }
    }
    out
}

/// `count` random polynomial curves with multiplicity in
/// `[min_multiplicity, budget.max_multiplicity]` and degree at most
/// `budget.max_degree`, reproducible from `budget.seed`.
pub fn random_curves<R: Real>(n: usize, budget: &SearchBudget, min_multiplicity: u32) -> Vec<CurveJet<R>> {
    let mut rng = ChaCha8Rng::seed_from_u64(budget.seed);
    let values = seed_coefficients::<R>();
    let top = budget.max_multiplicity.max(min_multiplicity);
    let mut out = Vec::with_capacity(budget.random_trials as usize);
    while out.len() < budget.random_trials as usize {
        let m = rng.gen_range(min_multiplicity..=top);
        let lead = rng.gen_range(0..n);
        let mut coeffs = vec![vec![Gaussian::zero(); budget.max_degree as usize + 1]; n];
        for (j, comp) in coeffs.iter_mut().enumerate() {
            for (d, slot) in comp.iter_mut().enumerate().skip(m as usize) {
                let forced = j == lead && d == m as usize;
                if forced || rng.gen_bool(0.35) {
                    *slot = values[rng.gen_range(0..values.len())].clone();
                }
            }
        }
        if let Ok(z) = CurveJet::from_coefficients(coeffs, Truncation::Exact) {
            out.push(z);
        }
    }
    out
}
