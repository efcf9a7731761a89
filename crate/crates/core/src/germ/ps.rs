use std::fmt;

use num_traits::{One, Zero};
use rayon::prelude::*;

use crate::algebra::CPolynomial;
use crate::curve::{lowest_term_profile, ps_verdict, pullback, CurveJet, LowestTermProfile, PsOutcome};
use crate::error::{Error, Result};
use crate::scalar::{Gaussian, Real};
use crate::search::{
    cancellation_curves, height_values, monomial_curves, primitive_exponents, random_curves, seed_coefficients,
    SearchBudget,
};

use super::gram::{gram_certificate, gram_matrix, hermitian_ldl, GramDecision, GramMatrix};
use super::{decompose_pure_mixed, restrict, solve_graph, DefiningFunction};

#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub enum PsVerdict {
    /// Proved by an exact PSD Gram decomposition.
    Certified,
    /// A curve along which the test fails, re-verified independently.
    ViolationFound,
    /// The bounded search found nothing; not a proof.
    NoViolationUpToBounds,
    /// The Gram test alone could not decide (indefinite or not applicable).
    Undecided,
}

impl PsVerdict {
    pub fn is_violation(self) -> bool {
        self == PsVerdict::ViolationFound
    }

    pub fn as_str(self) -> &'static str {
        match self {
            PsVerdict::Certified => "certified",
            PsVerdict::ViolationFound => "violation-found",
            PsVerdict::NoViolationUpToBounds => "no-violation-up-to-bounds",
            PsVerdict::Undecided => "undecided",
        }
    }
}

impl fmt::Display for PsVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub enum PsMethod {
    GramPsd,
    Search,
}

impl PsMethod {
    pub fn as_str(self) -> &'static str {
        match self {
            PsMethod::GramPsd => "gram-psd",
            PsMethod::Search => "search",
        }
    }
}

/// A curve violating the single-curve test, with its pullback data.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Witness<R> {
    pub curve: CurveJet<R>,
    pub pullback: CPolynomial<R>,
    pub profile: LowestTermProfile<R>,
    pub outcome: PsOutcome<R>,
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct PsCertificate<R> {
    pub verdict: PsVerdict,
    pub method: PsMethod,
    pub witness: Option<Witness<R>>,
    pub gram: Option<(GramMatrix<R>, GramDecision<R>)>,
    pub bounds: Option<SearchBudget>,
    /// Candidates examined in canonical order, up to and including the witness.
    pub candidates: u64,
    pub note: Option<String>,
}

/// Runs the test along `z` and, on failure, re-verifies through the generic
/// substitution path before accepting the curve as a witness.
fn violation<R: Real>(g: &CPolynomial<R>, z: &CurveJet<R>) -> Option<Witness<R>> {
    let fast = pullback(g, z).ok()?;
    let outcome = ps_verdict(&fast);
    if !outcome.is_violation() {
        return None;
    }
    let slow = g.substitute(&z.to_polynomials()).ok()?;
    let profile = lowest_term_profile(&slow).ok()?;
    let agrees = match &profile.ck {
        None => true,
        Some(ck) => !ck.is_positive_real(),
    };
    if slow != fast || !agrees {
        return None;
    }
    Some(Witness { curve: z.clone(), pullback: slow, profile, outcome })
}

/// Monomial curves making the two monomials of a two-term indefinite Gram
/// direction `v` lead with ratio `conj(v_α)/conj(v_β)`.
fn gram_seed_curves<R: Real>(g: &CPolynomial<R>, budget: &SearchBudget) -> Vec<CurveJet<R>> {
    let h = match gram_matrix(g) {
        Ok(h) => h,
        Err(_) => return Vec::new(),
    };
    let direction = match hermitian_ldl(&h) {
        GramDecision::Indefinite { direction, .. } => direction,
        GramDecision::Psd { .. } => return Vec::new(),
    };
    let support: Vec<usize> = (0..direction.len()).filter(|&i| !direction[i].is_zero()).collect();
    if support.len() != 2 {
        return Vec::new();
    }
    let (a, b) = (&h.basis[support[0]], &h.basis[support[1]]);
    let rho = &direction[support[0]].conj() * &direction[support[1]].conj().inv().expect("nonzero entry");
    let n = g.nvars();
    let dot = |x: &[u32], e: &[u32]| x.iter().zip(e).map(|(p, q)| p * q).sum::<u32>();
    let mut out = Vec::new();
    for e in primitive_exponents(n, budget.max_degree) {
        if dot(a, &e) != dot(b, &e) || (0..n).any(|j| (a[j] > 0 || b[j] > 0) && e[j] == 0) {
            continue;
        }
        for j in 0..n {
            let delta = a[j] as i64 - b[j] as i64;
            if delta.abs() != 1 {
                continue;
            }
            let mut coeffs: Vec<Gaussian<R>> =
                e.iter().map(|&x| if x > 0 { Gaussian::one() } else { Gaussian::zero() }).collect();
            coeffs[j] = if delta == 1 { rho.clone() } else { rho.inv().expect("nonzero ratio") };
            if let Ok(z) = CurveJet::monomial(&e, &coeffs) {
                out.push(z);
            }
        }
    }
    out
}

fn first_violation<R: Real>(g: &CPolynomial<R>, curves: &[CurveJet<R>]) -> Option<(usize, Witness<R>)> {
    curves.par_iter().enumerate().find_map_first(|(i, z)| violation(g, z).map(|w| (i, w)))
}

/// Bounded search for a curve violating PS for `g`.
///
/// Candidates, in canonical order: Gram-direction seeds, monomial curves
/// with seed coefficients, one-unknown leading cancellations, and seeded
/// random polynomial curves. The first violation in this order is reported.
pub fn ps_search<R: Real>(g: &CPolynomial<R>, budget: &SearchBudget) -> PsCertificate<R> {
    let n = g.nvars();
    let mut seen: u64 = 0;
    let found = |seen: u64, i: usize, w: Witness<R>| PsCertificate {
        verdict: PsVerdict::ViolationFound,
        method: PsMethod::Search,
        witness: Some(w),
        gram: None,
        bounds: Some(*budget),
        candidates: seen + i as u64 + 1,
        note: None,
    };

    let seeds = gram_seed_curves(g, budget);
    if let Some((i, w)) = first_violation(g, &seeds) {
        return found(seen, i, w);
    }
    seen += seeds.len() as u64;

    let exps = primitive_exponents(n, budget.max_degree);
    let values = seed_coefficients::<R>();
    let mut offsets = Vec::with_capacity(exps.len());
    let mut total = 0u64;
    for e in &exps {
        offsets.push(total);
        total += (values.len() as u64).pow(e.iter().filter(|&&x| x > 0).count() as u32);
    }
    let hit = exps.par_iter().enumerate().find_map_first(|(k, e)| {
        monomial_curves(e, &values)
            .enumerate()
            .find_map(|(i, z)| violation(g, &z).map(|w| (offsets[k] + i as u64, w)))
    });
    if let Some((i, w)) = hit {
        return found(seen, i as usize, w);
    }
    seen += total;

    let heights = height_values::<R>(budget.coeff_height);
    let cancel: Vec<CurveJet<R>> = exps
        .par_iter()
        .flat_map_iter(|e| (0..n).flat_map(|j| cancellation_curves(g, e, j, &heights)).collect::<Vec<_>>())
        .collect();
    if let Some((i, w)) = first_violation(g, &cancel) {
        return found(seen, i, w);
    }
    seen += cancel.len() as u64;

    let random = random_curves::<R>(n, budget, 1);
    if let Some((i, w)) = first_violation(g, &random) {
        return found(seen, i, w);
    }
    seen += random.len() as u64;

    PsCertificate {
        verdict: PsVerdict::NoViolationUpToBounds,
        method: PsMethod::Search,
        witness: None,
        gram: None,
        bounds: Some(*budget),
        candidates: seen,
        note: None,
    }
}

/// Verdict for one Taylor order.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct KVerdict<R> {
    pub k: u32,
    /// `G_k`, the restriction of the mixed part of `j_k r` to `h_k = 0`.
    pub restricted: CPolynomial<R>,
    pub certificate: PsCertificate<R>,
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct StabilizationReport<R> {
    pub k_min: u32,
    pub k_max: u32,
    pub entries: Vec<KVerdict<R>>,
    /// Smallest `k` from which every verdict through `k_max` is non-violating.
    pub k0: Option<u32>,
    pub budget: SearchBudget,
}

impl<R> StabilizationReport<R> {
    pub const LABEL: &'static str = "empirical up to k_max and bounds";
    pub const NOTE: &'static str = "evaluated for the canonical defining function only";
}

/// PS for the truncations `j_k r`, `k_min ≤ k ≤ k_max`.
///
/// Each `j_k r` is taken as an exact polynomial in the coordinates where the
/// linear part is `2Re(z_n)`; `G_k` is computed through degree `2k`.
pub fn germ_ps_check<R: Real>(
    r: &DefiningFunction<R>,
    k_min: u32,
    k_max: u32,
    budget: &SearchBudget,
) -> Result<StabilizationReport<R>> {
    if k_min < 2 || k_min > k_max {
        return Err(Error::InvalidArgument(format!("need 2 <= k_min <= k_max, got {}..{}", k_min, k_max)));
    }
    budget.validate()?;
    let moved = r.linear_change().apply(r.polynomial())?;
    let mut entries = Vec::new();
    for k in k_min..=k_max {
        let jk = moved.truncate(k).into_exact();
        let (h, gk) = decompose_pure_mixed(&jk)?;
        let phi = solve_graph(&h, 2 * k)?;
        let restricted = if phi.truncation().is_exact() {
            let m = phi.nvars();
            let mut images: Vec<CPolynomial<R>> = (0..m).map(|j| CPolynomial::var(m, j)).collect();
            images.push(phi.clone());
            gk.substitute(&images)?
        } else {
            restrict(&gk, &phi, 2 * k)?
        };
        let gram = gram_certificate(&restricted);
        let certificate = if gram.verdict == PsVerdict::Certified {
            gram
        } else {
            let mut found = ps_search(&restricted, budget);
            found.gram = gram.gram;
            found.note = gram.note;
            found
        };
        entries.push(KVerdict { k, restricted, certificate });
    }
    let mut k0 = None;
    for e in entries.iter().rev() {
        if e.certificate.verdict.is_violation() {
            break;
        }
        k0 = Some(e.k);
    }
    Ok(StabilizationReport { k_min, k_max, entries, k0, budget: *budget })
}
