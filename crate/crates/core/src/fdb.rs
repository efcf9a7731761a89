//! Multilinear derivative forms `D^{ab}` and the set-partition expansion of
//! `L^k(z^*g)(0)`.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};
use rand::Rng;

use crate::algebra::{CPolynomial, ExponentPair, Truncation};
use crate::curve::{factorial, CurveJet};
use crate::error::{Error, Result};
use crate::scalar::{Gaussian, Real};

/// Symmetric tensor of the derivatives of type `(a, b)` of `g` at the
/// origin. Entries are keyed by sorted index tuples; absent entries are zero.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct MultilinearForm<R> {
    pub a: u32,
    pub b: u32,
    pub nvars: usize,
    entries: BTreeMap<(Vec<usize>, Vec<usize>), Gaussian<R>>,
}

fn multiset_indices(exps: &[u32]) -> Vec<usize> {
    exps.iter().enumerate().flat_map(|(j, &e)| std::iter::repeat(j).take(e as usize)).collect()
}

/// Lexicographic successor of a sequence (multiset permutations).
fn next_permutation(v: &mut [usize]) -> bool {
    if v.len() < 2 {
        return false;
    }
    let mut i = v.len() - 1;
    while i > 0 && v[i - 1] >= v[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = v.len() - 1;
    while v[j] <= v[i - 1] {
        j -= 1;
    }
    v.swap(i - 1, j);
    v[i..].reverse();
    true
}

/// `Σ over distinct orderings I of the multiset of Π_k slots[k][I_k]`.
fn symmetric_product<R: Real>(sorted: &[usize], slots: &[&[Gaussian<R>]]) -> Gaussian<R> {
    let mut idx = sorted.to_vec();
    let mut acc = Gaussian::zero();
    loop {
        let mut term = Gaussian::one();
        for (k, &i) in idx.iter().enumerate() {
            let v = &slots[k][i];
            if v.is_zero() {
                term = Gaussian::zero();
                break;
            }
            term = &term * v;
        }
        acc += &term;
        if !next_permutation(&mut idx) {
            break;
        }
    }
    acc
}

impl<R: Real> MultilinearForm<R> {
    pub fn is_zero(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> impl Iterator<Item = (&(Vec<usize>, Vec<usize>), &Gaussian<R>)> {
        self.entries.iter()
    }

    /// Entry at arbitrary (unsorted) slot indices.
    pub fn entry(&self, holo: &[usize], anti: &[usize]) -> Gaussian<R> {
        let mut h = holo.to_vec();
        let mut a = anti.to_vec();
        h.sort_unstable();
        a.sort_unstable();
        self.entries.get(&(h, a)).cloned().unwrap_or_else(Gaussian::zero)
    }

    /// `D(u_1, …, u_a; v_1, …, v_b) = Σ T[I; J] Π u_k[I_k] Π v_l[J_l]`, the
    /// slot vectors being used as given (pass conjugates for barred slots).
    pub fn apply(&self, holo: &[&[Gaussian<R>]], anti: &[&[Gaussian<R>]]) -> Gaussian<R> {
        assert_eq!(holo.len(), self.a as usize);
        assert_eq!(anti.len(), self.b as usize);
        let mut acc = Gaussian::zero();
        for ((i, j), t) in &self.entries {
            let hp = symmetric_product(i, holo);
            if hp.is_zero() {
                continue;
            }
            let ap = symmetric_product(j, anti);
            acc += &(&(t * &hp) * &ap);
        }
        acc
    }

    /// `D^{ba}` from `D^{ab}` for a real-valued function.
    pub fn conjugate_swap(&self) -> Self {
        Self {
            a: self.b,
            b: self.a,
            nvars: self.nvars,
            entries: self.entries.iter().map(|((i, j), c)| ((j.clone(), i.clone()), c.conj())).collect(),
        }
    }
}

/// All forms `D^{ab}` with `1 ≤ a + b ≤ max_order`.
pub fn derive_forms<R: Real>(g: &CPolynomial<R>, max_order: u32) -> BTreeMap<(u32, u32), MultilinearForm<R>> {
    let n = g.nvars();
    let mut out: BTreeMap<(u32, u32), MultilinearForm<R>> = BTreeMap::new();
    for total in 1..=max_order {
        for a in 0..=total {
            let b = total - a;
            out.insert((a, b), MultilinearForm { a, b, nvars: n, entries: BTreeMap::new() });
        }
    }
    for (e, c) in g.terms() {
        let (a, b) = (e.holo_degree(), e.anti_degree());
        if a + b == 0 || a + b > max_order {
            continue;
        }
        let weight = e.holo.iter().chain(e.anti.iter()).fold(R::one(), |acc, &x| acc * factorial::<R>(x));
        let key = (multiset_indices(&e.holo), multiset_indices(&e.anti));
        out.get_mut(&(a, b)).expect("allocated above").entries.insert(key, c.scale(&weight));
    }
    out
}

/// Number of set partitions of `{1..k}` whose block sizes form `sizes`:
/// `k! / (Π s! · Π multiplicity!)`.
pub fn partition_counts(k: u32, sizes: &[u32]) -> Result<u64> {
    if sizes.iter().any(|&s| s == 0) || sizes.iter().map(|&s| s as u64).sum::<u64>() != k as u64 {
        return Err(Error::InconsistentSizes { k, sizes: sizes.to_vec() });
    }
    let fact = |n: u32| (1..=n).fold(BigUint::one(), |acc, j| acc * j);
    let mut den = BigUint::one();
    let mut mult: BTreeMap<u32, u32> = BTreeMap::new();
    for &s in sizes {
        den *= fact(s);
        *mult.entry(s).or_default() += 1;
    }
    for &c in mult.values() {
        den *= fact(c);
    }
    (fact(k) / den).to_u64().ok_or(Error::Overflow)
}

/// Integer partitions of `k` as nonincreasing part lists, largest first.
pub fn integer_partitions(k: u32) -> Vec<Vec<u32>> {
    fn go(rest: u32, max: u32, cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if rest == 0 {
            out.push(cur.clone());
            return;
        }
        for p in (1..=rest.min(max)).rev() {
            cur.push(p);
            go(rest - p, p, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(k, k, &mut Vec::new(), &mut out);
    out
}

/// Every set partition of `{0..k}`, each as a list of blocks. Intended as a
/// brute-force check for small `k`.
pub fn enumerate_set_partitions(k: u32) -> Vec<Vec<Vec<u32>>> {
    fn go(i: u32, k: u32, blocks: &mut Vec<Vec<u32>>, out: &mut Vec<Vec<Vec<u32>>>) {
        if i == k {
            out.push(blocks.clone());
            return;
        }
        for b in 0..blocks.len() {
            blocks[b].push(i);
            go(i + 1, k, blocks, out);
            blocks[b].pop();
        }
        blocks.push(vec![i]);
        go(i + 1, k, blocks, out);
        blocks.pop();
    }
    let mut out = Vec::new();
    go(0, k, &mut Vec::new(), &mut out);
    out
}

/// One group of the expansion: all pairs of set partitions with the given
/// block-size multisets.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct FdBTerm {
    pub holo_blocks: Vec<u32>,
    pub anti_blocks: Vec<u32>,
    pub count: u64,
}

impl FdBTerm {
    pub fn form_type(&self) -> (u32, u32) {
        (self.holo_blocks.len() as u32, self.anti_blocks.len() as u32)
    }
}

impl fmt::Display for FdBTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (a, b) = self.form_type();
        let slots: Vec<String> = self
            .holo_blocks
            .iter()
            .map(|s| format!("z^({})", s))
            .chain(self.anti_blocks.iter().map(|s| format!("conj(z)^({})", s)))
            .collect();
        write!(f, "{} D^{{{}{}}}({})", self.count, a, b, slots.join(", "))
    }
}

pub fn fdb_terms(k: u32) -> Result<Vec<FdBTerm>> {
    let parts = integer_partitions(k);
    let mut out = Vec::with_capacity(parts.len() * parts.len());
    for lam in &parts {
        let cl = partition_counts(k, lam)?;
        for mu in &parts {
            let cm = partition_counts(k, mu)?;
            out.push(FdBTerm {
                holo_blocks: lam.clone(),
                anti_blocks: mu.clone(),
                count: cl.checked_mul(cm).ok_or(Error::Overflow)?,
            });
        }
    }
    Ok(out)
}

fn check_jets<R: Real>(g: &CPolynomial<R>, z: &CurveJet<R>, k: u32) -> Result<()> {
    if g.nvars() != z.ncomponents() {
        return Err(Error::Dimension { expected: g.nvars(), found: z.ncomponents() });
    }
    if let Truncation::Jet(n) = g.truncation() {
        if n < 2 * k {
            return Err(Error::InsufficientJet { needed: 2 * k, available: n });
        }
    }
    if let Truncation::Jet(n) = z.truncation() {
        if n < k {
            return Err(Error::InsufficientJet { needed: k, available: n });
        }
    }
    Ok(())
}

struct Evaluator<R> {
    forms: BTreeMap<(u32, u32), MultilinearForm<R>>,
    holo: Vec<Vec<Gaussian<R>>>,
    anti: Vec<Vec<Gaussian<R>>>,
}

impl<R: Real> Evaluator<R> {
    fn new(g: &CPolynomial<R>, z: &CurveJet<R>, k: u32) -> Self {
        let holo: Vec<Vec<Gaussian<R>>> = (0..=k as usize).map(|j| z.derivative_vector(j)).collect();
        let anti = holo.iter().map(|v| v.iter().map(Gaussian::conj).collect()).collect();
        Self { forms: derive_forms(g, 2 * k), holo, anti }
    }

    /// `D^{|λ|,|μ|}(z^{(λ_i)}; conj z^{(μ_j)})`, without the count.
    fn value(&self, term: &FdBTerm) -> Gaussian<R> {
        let form = &self.forms[&term.form_type()];
        if form.is_zero() {
            return Gaussian::zero();
        }
        let h: Vec<&[Gaussian<R>]> = term.holo_blocks.iter().map(|&s| self.holo[s as usize].as_slice()).collect();
        let a: Vec<&[Gaussian<R>]> = term.anti_blocks.iter().map(|&s| self.anti[s as usize].as_slice()).collect();
        form.apply(&h, &a)
    }
}

/// `L^k(z^*g)(0)` by the partition expansion.
pub fn laplacian_power_fdb<R: Real>(g: &CPolynomial<R>, z: &CurveJet<R>, k: u32) -> Result<Gaussian<R>> {
    check_jets(g, z, k)?;
    let ev = Evaluator::new(g, z, k);
    let mut acc = Gaussian::zero();
    for term in fdb_terms(k)? {
        let v = ev.value(&term);
        if !v.is_zero() {
            acc += &v.scale(&R::from_u64(term.count).expect("count fits"));
        }
    }
    Ok(acc)
}

/// A random real `g` with no constant term (total degree at most `deg_g`)
/// and a random curve jet (degree at most `deg_z`), both with small Gaussian
/// integer coefficients.
pub fn random_instance<R: Real, G: Rng + ?Sized>(
    rng: &mut G,
    nvars: usize,
    deg_g: u32,
    deg_z: u32,
) -> (CPolynomial<R>, CurveJet<R>) {
    let mut terms = Vec::new();
    for _ in 0..rng.gen_range(1..=6) {
        let total = rng.gen_range(2..=deg_g.max(2));
        let mut e = ExponentPair::constant(nvars);
        for _ in 0..total {
            let j = rng.gen_range(0..nvars);
            if rng.gen_bool(0.5) {
                e.holo[j] += 1;
            } else {
                e.anti[j] += 1;
            }
        }
        let c = Gaussian::from_ints(rng.gen_range(-3..=3), rng.gen_range(-3..=3));
        terms.push((e, c));
    }
    let p = CPolynomial::from_terms(nvars, terms, Truncation::Exact);
    let g = &p + &p.conjugate();
    loop {
        let coeffs: Vec<Vec<Gaussian<R>>> = (0..nvars)
            .map(|_| {
                (0..=deg_z)
                    .map(|d| {
                        if d == 0 || rng.gen_bool(0.4) {
                            Gaussian::zero()
                        } else {
                            Gaussian::from_ints(rng.gen_range(-2..=2), rng.gen_range(-2..=2))
                        }
                    })
                    .collect()
            })
            .collect();
        if let Ok(z) = CurveJet::from_coefficients(coeffs, Truncation::Exact) {
            return (g, z);
        }
    }
}

/// A surviving term of the `k = 2m` expansion for a curve of multiplicity `m`.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Eq6Term<R> {
    pub term: FdBTerm,
    pub value: Gaussian<R>,
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Eq6Expansion<R> {
    pub m: u32,
    /// `partition_counts(2m, {m, m}) = (2m)! / (2 (m!)²)`.
    pub lambda: u64,
    /// In the order `D^{11}, D^{12}, D^{21}, D^{22}`.
    pub terms: Vec<Eq6Term<R>>,
    pub total: Gaussian<R>,
    /// The full expansion, which must agree with `total`.
    pub unfiltered: Gaussian<R>,
}

impl<R: Real> Eq6Expansion<R> {
    pub fn coefficients(&self) -> Vec<u64> {
        self.terms.iter().map(|t| t.term.count).collect()
    }

    /// Whether the coefficients are `1, 3, 3, 9`, the `m = 2` values.
    pub fn matches_quadratic_case(&self) -> bool {
        self.coefficients() == [1, 3, 3, 9]
    }
}

/// The four terms of `L^{2m}(z^*g)(0)` that survive when `ν(z) = m`: every
/// block must have size at least `m`, so each side is `{2m}` or `{m, m}`.
pub fn eq6_specialize<R: Real>(g: &CPolynomial<R>, z: &CurveJet<R>, m: u32) -> Result<Eq6Expansion<R>> {
    let found = z.multiplicity();
    if found != m || m == 0 {
        return Err(Error::MultiplicityMismatch { expected: m, found });
    }
    let k = 2 * m;
    check_jets(g, z, k)?;
    let ev = Evaluator::new(g, z, k);
    let lambda = partition_counts(k, &[m, m])?;
    let single = vec![k];
    let double = vec![m, m];
    let shapes = [(&single, &single), (&single, &double), (&double, &single), (&double, &double)];
    let mut terms = Vec::with_capacity(4);
    let mut total = Gaussian::zero();
    for (hb, ab) in shapes {
        let term = FdBTerm {
            holo_blocks: hb.clone(),
            anti_blocks: ab.clone(),
            count: partition_counts(k, hb)? * partition_counts(k, ab)?,
        };
        let value = ev.value(&term);
        total += &value.scale(&R::from_u64(term.count).expect("count fits"));
        terms.push(Eq6Term { term, value });
    }
    let unfiltered = laplacian_power_fdb(g, z, k)?;
    if unfiltered != total {
        return Err(Error::VerificationFailed(format!(
            "filtered sum {} differs from full expansion {}",
            total, unfiltered
        )));
    }
    Ok(Eq6Expansion { m, lambda, terms, total, unfiltered })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curve::{laplacian_power, pullback};
    use crate::expr::{parse_expression, parse_tuple, VarNames};
    use crate::{Curve, GaussianRational, Polynomial};

    fn p(text: &str, n: usize) -> Polynomial {
        parse_expression(text, &VarNames::z(n)).unwrap()
    }

    fn curve(text: &str) -> Curve {
        Curve::from_polynomials(&parse_tuple(text, &VarNames::t()).unwrap()).unwrap()
    }

    fn e(n: usize, j: usize) -> Vec<GaussianRational> {
        let mut v = vec![GaussianRational::zero(); n];
        v[j] = GaussianRational::one();
        v
    }

    #[test]
    fn forms_of_simple_functions() {
        let f = derive_forms(&p("abs2(z1)", 1), 4);
        assert_eq!(f[&(1, 1)].entry(&[0], &[0]), GaussianRational::one());
        assert!(f.iter().filter(|(k, _)| **k != (1, 1)).all(|(_, d)| d.is_zero()));

        let f = derive_forms(&p("abs2(z1)^2", 1), 4);
        let e1 = e(1, 0);
        let d22 = f[&(2, 2)].apply(&[&e1, &e1], &[&e1, &e1]);
        assert_eq!(d22, GaussianRational::from_int(4));

        let g = p("z1*conj(z2)^2 + conj(z1)*z2^2", 2);
        let f = derive_forms(&g, 3);
        assert_eq!(f[&(1, 2)].entry(&[0], &[1, 1]), GaussianRational::from_int(2));
        assert_eq!(f[&(2, 1)], f[&(1, 2)].conjugate_swap());
    }

    #[test]
    fn forms_match_wirtinger_derivatives() {
        let g = p("(2 + i)*z1^2*conj(z2) + (2 - i)*conj(z1)^2*z2 + 3*abs2(z1*z2) + z1*z2*conj(z1)", 2);
        let forms = derive_forms(&g, 4);
        for ((a, b), form) in &forms {
            for (idx, value) in form.entries() {
                let mut d = g.clone();
                for &i in &idx.0 {
                    d = d.wirtinger(i, crate::Kind::Holo);
                }
                for &j in &idx.1 {
                    d = d.wirtinger(j, crate::Kind::Anti);
                }
                assert_eq!(&d.constant_term(), value, "D^{}{}", a, b);
            }
        }
    }

    #[test]
    fn partition_count_values() {
        assert_eq!(partition_counts(3, &[1, 2]).unwrap(), 3);
        assert_eq!(partition_counts(4, &[2, 2]).unwrap(), 3);
        assert_eq!(partition_counts(6, &[3, 3]).unwrap(), 10);
        assert_eq!(partition_counts(3, &[1, 1]), Err(Error::InconsistentSizes { k: 3, sizes: vec![1, 1] }));
        assert_eq!(partition_counts(40, &[40]).unwrap(), 1);
        assert_eq!(partition_counts(40, &[1; 40]).unwrap(), 1);
        assert_eq!(partition_counts(60, &[20, 20, 20]), Err(Error::Overflow));
    }

    #[test]
    fn partition_counts_match_enumeration() {
        for k in 1..=6 {
            let mut tally: BTreeMap<Vec<u32>, u64> = BTreeMap::new();
            let all = enumerate_set_partitions(k);
            for part in &all {
                let mut sizes: Vec<u32> = part.iter().map(|b| b.len() as u32).collect();
                sizes.sort_unstable_by(|a, b| b.cmp(a));
                *tally.entry(sizes).or_default() += 1;
            }
            for (sizes, count) in tally {
                assert_eq!(partition_counts(k, &sizes).unwrap(), count, "k = {}, sizes {:?}", k, sizes);
            }
        }
        // Bell numbers
        let bell: Vec<usize> = (1..=6).map(|k| enumerate_set_partitions(k).len()).collect();
        assert_eq!(bell, vec![1, 2, 5, 15, 52, 203]);
    }

    #[test]
    fn cubic_coefficients() {
        let terms = fdb_terms(3).unwrap();
        let pick = |h: &[u32], a: &[u32]| terms.iter().find(|t| t.holo_blocks == h && t.anti_blocks == a).unwrap().count;
        assert_eq!(pick(&[3], &[3]), 1);
        assert_eq!(pick(&[3], &[2, 1]), 3);
        assert_eq!(pick(&[2, 1], &[3]), 3);
        assert_eq!(pick(&[2, 1], &[2, 1]), 9);
    }

    #[test]
    fn expansion_matches_direct_operator() {
        let cases = [
            ("abs2(z1)", "(t)", 1),
            ("abs2(z1)^2", "(t)", 2),
            ("abs2(z1 + z2^2) + abs2(z2)^2", "(-t^2 + t^3, t)", 2),
            ("abs2(z1 + z2^2) + abs2(z2)^2", "(-t^4, t^2)", 4),
            ("z1*conj(z2)^2 + conj(z1)*z2^2 + 2*abs2(z1)", "(t + i*t^2, 1/2*t - t^3)", 3),
        ];
        for (g, z, k) in cases {
            let (g, z) = (p(g, z.matches(',').count() + 1), curve(z));
            let direct = laplacian_power(&pullback(&g, &z).unwrap(), k).unwrap();
            assert_eq!(laplacian_power_fdb(&g, &z, k).unwrap(), direct);
        }
        assert_eq!(laplacian_power_fdb(&p("abs2(z1)", 1), &curve("(t)"), 1).unwrap(), GaussianRational::one());
        assert_eq!(laplacian_power_fdb(&p("abs2(z1)^2", 1), &curve("(t)"), 2).unwrap(), GaussianRational::from_int(4));
    }

    #[test]
    fn insufficient_jets() {
        let g = p("abs2(z1)^2", 1).truncate(3);
        assert_eq!(
            laplacian_power_fdb(&g, &curve("(t)"), 2),
            Err(Error::InsufficientJet { needed: 4, available: 3 })
        );
    }

    #[test]
    fn eq6_coefficients() {
        let g = p("abs2(z1 + z2^2) + abs2(z2)^2", 2);
        let x = eq6_specialize(&g, &curve("(-t^4, t^2)"), 2).unwrap();
        assert_eq!(x.coefficients(), vec![1, 3, 3, 9]);
        assert!(x.matches_quadratic_case());
        let x = eq6_specialize(&p("abs2(z1)^2", 1), &curve("(t)"), 1).unwrap();
        assert_eq!(x.coefficients(), vec![1, 1, 1, 1]);
        assert!(!x.matches_quadratic_case());
        let x = eq6_specialize(&p("abs2(z1)^2 + abs2(z1*z2)", 2), &curve("(t^3 + t^5, 2*t^4)"), 3).unwrap();
        assert_eq!(x.coefficients(), vec![1, 10, 10, 100]);
        assert_eq!(x.lambda, 10);
        assert_eq!(
            eq6_specialize(&g, &curve("(t, 0)"), 2),
            Err(Error::MultiplicityMismatch { expected: 2, found: 1 })
        );
    }
}
