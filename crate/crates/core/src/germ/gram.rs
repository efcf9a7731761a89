use num_traits::{One, Zero};

use crate::algebra::{CPolynomial, ExponentPair, Exponents, Truncation};
use crate::error::{Error, Result};
use crate::scalar::{Gaussian, Real};

use super::ps::{PsCertificate, PsMethod, PsVerdict};

/// Hermitian matrix `H` with `g = Σ H[α,β] z^α z̄^β`, indexed by the
/// holomorphic monomials occurring in `g` (sorted in graded-lex order).
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct GramMatrix<R> {
    pub nvars: usize,
    pub basis: Vec<Exponents>,
    pub entries: Vec<Vec<Gaussian<R>>>,
}

impl<R: Real> GramMatrix<R> {
    pub fn len(&self) -> usize {
        self.basis.len()
    }

    pub fn is_empty(&self) -> bool {
        self.basis.is_empty()
    }

    /// `w* H w`.
    pub fn form(&self, w: &[Gaussian<R>]) -> Gaussian<R> {
        let mut acc = Gaussian::zero();
        for (i, row) in self.entries.iter().enumerate() {
            if w[i].is_zero() {
                continue;
            }
            let wi = w[i].conj();
            for (j, h) in row.iter().enumerate() {
                if !h.is_zero() && !w[j].is_zero() {
                    acc += &(&(&wi * h) * &w[j]);
                }
            }
        }
        acc
    }

    /// `Σ_α v_α z^α`.
    pub fn combination(&self, v: &[Gaussian<R>]) -> CPolynomial<R> {
        let zeros: Exponents = std::iter::repeat(0).take(self.nvars).collect();
        CPolynomial::from_terms(
            self.nvars,
            self.basis
                .iter()
                .zip(v)
                .map(|(a, c)| (ExponentPair { holo: a.clone(), anti: zeros.clone() }, c.clone())),
            Truncation::Exact,
        )
    }
}

/// Outcome of the exact Hermitian LDL* test.
#[derive(Clone, PartialEq, Eq, Debug)]
pub enum GramDecision<R> {
    /// `g = Σ d_j |f_j|²` with every `d_j > 0`.
    Psd { factors: Vec<(R, CPolynomial<R>)> },
    /// A coefficient vector `w` over the basis with `w* H w = value < 0`.
    Indefinite { direction: Vec<Gaussian<R>>, value: R },
}

impl<R: Real> GramDecision<R> {
    pub fn is_psd(&self) -> bool {
        matches!(self, GramDecision::Psd { .. })
    }

    /// `Σ d_j f_j conj(f_j)` for a PSD decision.
    pub fn reconstruct(&self, nvars: usize) -> Option<CPolynomial<R>> {
        match self {
            GramDecision::Psd { factors } => Some(factors.iter().fold(CPolynomial::zero(nvars), |acc, (d, f)| {
                &acc + &(f * &f.conjugate()).scale(&Gaussian::real(d.clone()))
            })),
            GramDecision::Indefinite { .. } => None,
        }
    }
}

pub fn gram_matrix<R: Real>(g: &CPolynomial<R>) -> Result<GramMatrix<R>> {
    if !g.is_real_valued() {
        return Err(Error::NotReal);
    }
    if !g.is_mixed_only() {
        return Err(Error::InvalidArgument("Gram matrices need a mixed-only polynomial".into()));
    }
    let n = g.nvars();
    let zeros: Exponents = std::iter::repeat(0).take(n).collect();
    let mut keys: Vec<ExponentPair> = g
        .terms()
        .flat_map(|(e, _)| {
            [
                ExponentPair { holo: e.holo.clone(), anti: zeros.clone() },
                ExponentPair { holo: e.anti.clone(), anti: zeros.clone() },
            ]
        })
        .collect();
    keys.sort();
    keys.dedup();
    let basis: Vec<Exponents> = keys.into_iter().map(|e| e.holo).collect();
    let index = |a: &Exponents| basis.binary_search_by(|b| {
        let pa = ExponentPair { holo: a.clone(), anti: zeros.clone() };
        let pb = ExponentPair { holo: b.clone(), anti: zeros.clone() };
        pb.cmp(&pa)
    });
    let mut entries = vec![vec![Gaussian::zero(); basis.len()]; basis.len()];
    for (e, c) in g.terms() {
        let i = index(&e.holo).expect("basis contains every holomorphic factor");
        let j = index(&e.anti).expect("basis contains every antiholomorphic factor");
        entries[i][j] = c.clone();
    }
    Ok(GramMatrix { nvars: n, basis, entries })
}

/// Exact symmetric-pivot LDL* of a Hermitian matrix.
///
/// Pivots are chosen by largest positive diagonal, ties going to the lowest
/// index. A negative diagonal, or a zero diagonal with a nonzero entry in
/// its row, yields an indefinite direction lifted back through the Schur
/// complements.
pub fn hermitian_ldl<R: Real>(h: &GramMatrix<R>) -> GramDecision<R> {
    ldl(h, false)
}

/// As [`hermitian_ldl`], but always pivoting on the first positive diagonal
/// in basis order, so that trailing basis elements are eliminated last.
pub fn hermitian_ldl_in_order<R: Real>(h: &GramMatrix<R>) -> GramDecision<R> {
    ldl(h, true)
}

fn ldl<R: Real>(h: &GramMatrix<R>, in_order: bool) -> GramDecision<R> {
    let n = h.len();
    let mut s = h.entries.clone();
    let mut active = vec![true; n];
    // (pivot, pivot row at elimination time, pivot value)
    let mut steps: Vec<(usize, Vec<Gaussian<R>>, R)> = Vec::new();
    let mut factors = Vec::new();
    loop {
        let live: Vec<usize> = (0..n).filter(|&i| active[i]).collect();
        let start = if let Some(&q) = live.iter().find(|&&i| s[i][i].re < R::zero()) {
            let mut w = vec![Gaussian::zero(); n];
            w[q] = Gaussian::one();
            Some(w)
        } else {
            None
        };
        let start = start.or_else(|| {
            if live.iter().any(|&i| !s[i][i].is_zero()) {
                return None;
            }
            for &p in &live {
                for &q in &live {
                    if p != q && !s[p][q].is_zero() {
                        let mut w = vec![Gaussian::zero(); n];
                        w[p] = Gaussian::one();
                        w[q] = -s[p][q].conj();
                        return Some(w);
                    }
                }
            }
            None
        });
        if let Some(mut w) = start {
            for (p, row, d) in steps.iter().rev() {
                let mut acc = Gaussian::zero();
                for (j, r) in row.iter().enumerate() {
                    if j != *p && !r.is_zero() && !w[j].is_zero() {
                        acc += &(r * &w[j]);
                    }
                }
                w[*p] = -acc.scale(&(R::one() / d.clone()));
            }
            let value = h.form(&w);
            assert!(value.is_real() && value.re < R::zero(), "indefinite direction must have negative value");
            return GramDecision::Indefinite { direction: w, value: value.re };
        }
        let pivot = live
            .iter()
            .copied()
            .filter(|&i| s[i][i].re > R::zero())
            .fold(None, |best: Option<usize>, i| match best {
                Some(b) if in_order || s[b][b].re >= s[i][i].re => Some(b),
                _ => Some(i),
            });
        let p = match pivot {
            Some(p) => p,
            None => break,
        };
        let d = s[p][p].re.clone();
        let inv = R::one() / d.clone();
        let mut l = vec![Gaussian::zero(); n];
        for &j in &live {
            l[j] = s[j][p].scale(&inv);
        }
        let row = s[p].clone();
        for &i in &live {
            if i == p || s[i][p].is_zero() {
                continue;
            }
            for &j in &live {
                if j == p || row[j].is_zero() {
                    continue;
                }
                let delta = (&s[i][p] * &row[j]).scale(&inv);
                s[i][j] -= &delta;
            }
        }
        active[p] = false;
        factors.push((d.clone(), h.combination(&l)));
        steps.push((p, row, d));
    }
    GramDecision::Psd { factors }
}

/// Structural PS certificate: an exact PSD Gram matrix proves
/// `g = Σ d_j |f_j|²`.
pub fn gram_certificate<R: Real>(g: &CPolynomial<R>) -> PsCertificate<R> {
    match gram_matrix(g) {
        Ok(h) => {
            let decision = hermitian_ldl(&h);
            let verdict = if decision.is_psd() { PsVerdict::Certified } else { PsVerdict::Undecided };
            PsCertificate {
                verdict,
                method: PsMethod::GramPsd,
                witness: None,
                gram: Some((h, decision)),
                bounds: None,
                candidates: 0,
                note: None,
            }
        }
        Err(e) => PsCertificate {
            verdict: PsVerdict::Undecided,
            method: PsMethod::GramPsd,
            witness: None,
            gram: None,
            bounds: None,
            candidates: 0,
            note: Some(e.to_string()),
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::{parse_expression, VarNames};
    use crate::{GaussianRational, Polynomial, Rational};

    fn p(text: &str, n: usize) -> Polynomial {
        parse_expression(text, &VarNames::z(n)).unwrap()
    }

    #[test]
    fn cusp_square_is_rank_one() {
        let g = p("abs2(z1^2 - z2^3)", 2);
        let h = gram_matrix(&g).unwrap();
        assert_eq!(h.len(), 2);
        let one = GaussianRational::one();
        assert_eq!(h.entries, vec![vec![one.clone(), -one.clone()], vec![-one.clone(), one]]);
        let cert = gram_certificate(&g);
        assert_eq!(cert.verdict, PsVerdict::Certified);
        let (_, decision) = cert.gram.unwrap();
        match &decision {
            GramDecision::Psd { factors } => assert_eq!(factors.len(), 1),
            _ => unreachable!(),
        }
        assert_eq!(decision.reconstruct(2).unwrap(), g);
    }

    #[test]
    fn truncated_example_is_indefinite() {
        let g = p("z1*conj(z1) + z1*conj(z2)^2 + conj(z1)*z2^2", 2);
        let h = gram_matrix(&g).unwrap();
        assert_eq!(h.basis.len(), 2);
        let cert = gram_certificate(&g);
        assert_eq!(cert.verdict, PsVerdict::Undecided);
        match cert.gram.unwrap().1 {
            GramDecision::Indefinite { direction, value } => {
                assert!(value < Rational::zero());
                assert_eq!(h.form(&direction).re, value);
            }
            _ => panic!("expected an indefinite direction"),
        }
    }

    #[test]
    fn zero_is_certified() {
        assert_eq!(gram_certificate(&Polynomial::zero(2)).verdict, PsVerdict::Certified);
    }

    #[test]
    fn weighted_sums_reconstruct() {
        for text in ["abs2(z1 + z2^2) + abs2(z2)^2", "3*abs2(z1) + abs2(z1 - 2*i*z2^2) + 1/2*abs2(z1*z2)", "abs2(z1)^2 + abs2(z2)^2"] {
            let g = p(text, 2);
            let cert = gram_certificate(&g);
            assert_eq!(cert.verdict, PsVerdict::Certified, "{}", text);
            assert_eq!(cert.gram.unwrap().1.reconstruct(2).unwrap(), g);
        }
    }

    #[test]
    fn negative_diagonal_is_found() {
        let g = p("abs2(z1)^2 - abs2(z1*z2)", 2);
        assert_eq!(gram_certificate(&g).verdict, PsVerdict::Undecided);
    }

    #[test]
    fn pure_terms_are_rejected() {
        let cert = gram_certificate(&p("2*Re(z1^2) + abs2(z1)", 1));
        assert_eq!(cert.verdict, PsVerdict::Undecided);
        assert!(cert.note.is_some());
    }
}
