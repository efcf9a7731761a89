//! Hypersurface germs: defining functions, the pure/mixed decomposition of
//! Taylor polynomials, graph normal form and PS certification.

mod gram;
mod ps;

pub use gram::{gram_certificate, gram_matrix, hermitian_ldl, hermitian_ldl_in_order, GramDecision, GramMatrix};
pub use ps::{germ_ps_check, ps_search, KVerdict, PsCertificate, PsMethod, PsVerdict, StabilizationReport, Witness};

use num_traits::{One, Zero};

use crate::algebra::{CPolynomial, ExponentPair, Truncation};
use crate::curve::CurveJet;
use crate::error::{Error, Result};
use crate::scalar::{Gaussian, Real};

/// A real-valued exact polynomial `r` with `r(0) = 0` and `dr(0) ≠ 0`.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct DefiningFunction<R> {
    r: CPolynomial<R>,
}

impl<R: Real> DefiningFunction<R> {
    pub fn validate(r: CPolynomial<R>) -> Result<Self> {
        if !r.truncation().is_exact() {
            return Err(Error::InvalidArgument("a defining function must be an exact polynomial".into()));
        }
        if !r.is_real_valued() {
            return Err(Error::NotReal);
        }
        if !r.constant_term().is_zero() {
            return Err(Error::NonzeroConstant);
        }
        if r.homogeneous(1).is_zero() {
            return Err(Error::NoLinearPart);
        }
        Ok(Self { r })
    }

    pub fn polynomial(&self) -> &CPolynomial<R> {
        &self.r
    }

    pub fn nvars(&self) -> usize {
        self.r.nvars()
    }

    /// The change of coordinates making the linear part `2Re(z_n)`.
    pub fn linear_change(&self) -> LinearChange<R> {
        LinearChange::from_linear_part(self.r.holomorphic_linear_coefficients())
            .expect("validated defining function has a linear part")
    }

    /// `2Re(z_n) + g(ζ)` for a graph function `g` in `n − 1` variables.
    pub fn from_graph(g: &CPolynomial<R>) -> Result<Self> {
        let n = g.nvars() + 1;
        let zn = CPolynomial::var(n, n - 1);
        let r = &(&zn + &zn.conjugate()) + &g.extend_vars(1);
        Self::validate(r.into_exact())
    }
}

impl<R: Real> std::ops::Deref for DefiningFunction<R> {
    type Target = CPolynomial<R>;
    fn deref(&self) -> &CPolynomial<R> {
        &self.r
    }
}

/// `j_k r`: the terms of total degree at most `k`, as a jet of order `k`.
pub fn taylor_truncate<R: Real>(r: &DefiningFunction<R>, k: u32) -> CPolynomial<R> {
    assert!(k >= 1, "Taylor order must be positive");
    r.r.truncate(k)
}

/// Splits a real polynomial into `2Re(h) + g` with `h` holomorphic and `g`
/// mixed.
pub fn decompose_pure_mixed<R: Real>(jk: &CPolynomial<R>) -> Result<(CPolynomial<R>, CPolynomial<R>)> {
    if !jk.is_real_valued() {
        return Err(Error::NotReal);
    }
    if !jk.constant_term().is_zero() {
        return Err(Error::NonzeroConstant);
    }
    let h = jk.holomorphic_part();
    if h.homogeneous(1).is_zero() {
        return Err(Error::DegenerateLinearPart);
    }
    let (_, g) = jk.pure_mixed_split();
    Ok((h, g))
}

fn unit_exponent(n: usize, j: usize) -> ExponentPair {
    let mut e = ExponentPair::constant(n);
    e.holo[j] = 1;
    e
}

/// Solves `h(ζ, φ(ζ)) = 0` for `φ` with `φ(0) = 0`, where the last variable
/// is the one solved for.
///
/// The result is exact when the solution is a polynomial, and a jet of
/// order `order` otherwise.
pub fn solve_graph<R: Real>(h: &CPolynomial<R>, order: u32) -> Result<CPolynomial<R>> {
    let n = h.nvars();
    assert!(n >= 1);
    let m = n - 1;
    let a = h.coeff(&unit_exponent(n, m));
    if a.is_zero() {
        return Err(Error::DegenerateLinearPart);
    }
    if !h.is_holomorphic() || !h.constant_term().is_zero() {
        return Err(Error::InvalidArgument("solve_graph expects a holomorphic polynomial vanishing at 0".into()));
    }
    let inv = a.inv().expect("nonzero pivot");
    let zeta: Vec<CPolynomial<R>> = (0..m).map(|j| CPolynomial::var(m, j)).collect();
    let images = |phi: &CPolynomial<R>| {
        let mut v = zeta.clone();
        v.push(phi.clone());
        v
    };
    let mut phi = CPolynomial::zero(m);
    for _ in 0..=order + 1 {
        let residual = h.substitute(&images(&phi.with_truncation(Truncation::Jet(order))))?;
        if residual.is_zero() {
            let exact = h.substitute(&images(&phi))?;
            if exact.is_zero() {
                return Ok(phi);
            }
            let jet = phi.with_truncation(Truncation::Jet(order));
            let check = h.substitute(&images(&jet))?;
            if !check.is_zero() {
                return Err(Error::VerificationFailed("graph solution does not annihilate h".into()));
            }
            return Ok(jet);
        }
        phi = &phi - &residual.into_exact().scale(&inv);
    }
    Err(Error::VerificationFailed(format!("graph iteration did not close through degree {}", order)))
}

/// `g(ζ, φ(ζ))` through degree `order`.
pub fn restrict<R: Real>(g: &CPolynomial<R>, phi: &CPolynomial<R>, order: u32) -> Result<CPolynomial<R>> {
    let m = phi.nvars();
    if g.nvars() != m + 1 {
        return Err(Error::Dimension { expected: m + 1, found: g.nvars() });
    }
    let mut images: Vec<CPolynomial<R>> = (0..m).map(|j| CPolynomial::var(m, j)).collect();
    images.push(phi.truncate(order));
    Ok(g.substitute(&images)?.truncate(order))
}

/// Invertible linear substitution turning the holomorphic linear part
/// `Σ a_j z_j` into the last coordinate `w`.
///
/// The new variables are `(z_j)_{j ≠ p}` in their original order followed
/// by `w = Σ a_j z_j`, where `p` is the last index with `a_p ≠ 0`.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct LinearChange<R> {
    coefficients: Vec<Gaussian<R>>,
    pivot: usize,
}

impl<R: Real> LinearChange<R> {
    pub fn from_linear_part(coefficients: Vec<Gaussian<R>>) -> Result<Self> {
        let pivot = coefficients.iter().rposition(|c| !c.is_zero()).ok_or(Error::DegenerateLinearPart)?;
        Ok(Self { coefficients, pivot })
    }

    pub fn identity(n: usize) -> Self {
        let mut coefficients = vec![Gaussian::zero(); n];
        coefficients[n - 1] = Gaussian::one();
        Self { coefficients, pivot: n - 1 }
    }

    pub fn is_identity(&self) -> bool {
        *self == Self::identity(self.nvars())
    }

    pub fn nvars(&self) -> usize {
        self.coefficients.len()
    }

    pub fn coefficients(&self) -> &[Gaussian<R>] {
        &self.coefficients
    }

    pub fn pivot(&self) -> usize {
        self.pivot
    }

    /// Position of original variable `j ≠ p` among the new variables.
    fn new_index(&self, j: usize) -> usize {
        if j < self.pivot {
            j
        } else {
            j - 1
        }
    }

    /// Original coordinates as polynomials in the new ones.
    fn inverse_images(&self) -> Vec<CPolynomial<R>> {
        let n = self.nvars();
        let inv = self.coefficients[self.pivot].inv().expect("nonzero pivot");
        (0..n)
            .map(|j| {
                if j != self.pivot {
                    return CPolynomial::var(n, self.new_index(j));
                }
                let mut zp = CPolynomial::var(n, n - 1);
                for (i, a) in self.coefficients.iter().enumerate() {
                    if i != self.pivot && !a.is_zero() {
                        zp = &zp - &CPolynomial::var(n, self.new_index(i)).scale(a);
                    }
                }
                zp.scale(&inv)
            })
            .collect()
    }

    /// Expresses `p` in the new coordinates.
    pub fn apply(&self, p: &CPolynomial<R>) -> Result<CPolynomial<R>> {
        p.substitute(&self.inverse_images())
    }

    /// Maps a curve given in the new coordinates back to the original ones.
    pub fn pull_curve(&self, z: &CurveJet<R>) -> Result<CurveJet<R>> {
        let n = self.nvars();
        if z.ncomponents() != n {
            return Err(Error::Dimension { expected: n, found: z.ncomponents() });
        }
        let comps = z.to_polynomials();
        let images: Vec<CPolynomial<R>> = self
            .inverse_images()
            .iter()
            .map(|l| l.substitute(&comps))
            .collect::<Result<_>>()?;
        CurveJet::from_polynomials(&images)
    }
}

/// The data needed to carry curves in the graph frame back to the original
/// coordinates: `z_n' = φ(ζ)` followed by the inverse linear change.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct GraphTransform<R> {
    pub linear: LinearChange<R>,
    pub phi: CPolynomial<R>,
}

/// `2Re(z_n) + g(ζ)` normal form of a germ.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct GraphForm<R> {
    pub g: CPolynomial<R>,
    /// Degree through which `g` is known to be free of pure terms.
    pub pure_order_bound: Truncation,
    pub transform: GraphTransform<R>,
    /// Set when the mixed part depended on the solved coordinate, so that
    /// an imaginary-part residual was dropped by working in `z_n = 0`.
    pub residual_flag: bool,
}

impl<R: Real> GraphForm<R> {
    /// Wraps a mixed real polynomial `g(ζ)` directly.
    pub fn from_graph(g: CPolynomial<R>) -> Result<Self> {
        if !g.is_real_valued() {
            return Err(Error::NotReal);
        }
        if !g.is_mixed_only() {
            return Err(Error::InvalidArgument("graph function has pure terms".into()));
        }
        let m = g.nvars();
        Ok(Self {
            pure_order_bound: g.truncation(),
            transform: GraphTransform { linear: LinearChange::identity(m + 1), phi: CPolynomial::zero(m) },
            residual_flag: false,
            g,
        })
    }

    pub fn nvars(&self) -> usize {
        self.g.nvars()
    }

    /// Carries a curve `ζ(t)` of the graph frame to the original
    /// coordinates.
    pub fn lift_curve(&self, zeta: &CurveJet<R>) -> Result<CurveJet<R>> {
        let comps = zeta.to_polynomials();
        let w = self.transform.phi.substitute(&comps)?;
        let mut all = comps;
        all.push(w);
        let z = CurveJet::from_polynomials(&all)?;
        self.transform.linear.pull_curve(&z)
    }

    /// The rigid defining function `2Re(z_n) + g(ζ)`.
    pub fn rigid_defining_function(&self) -> Result<DefiningFunction<R>> {
        DefiningFunction::from_graph(&self.g)
    }
}

/// Normal form `r = 2Re(w) + g(ζ) + …` with pure terms absorbed into `w`
/// through degree `k`.
pub fn normalize_to_graph<R: Real>(r: &DefiningFunction<R>, k: u32) -> Result<GraphForm<R>> {
    let n = r.nvars();
    let linear = r.linear_change();
    let moved = linear.apply(r.polynomial())?;
    let (h, mixed) = decompose_pure_mixed(&moved)?;
    let phi = solve_graph(&h, k)?;
    let (g, bound) = if phi.truncation().is_exact() {
        let mut images: Vec<CPolynomial<R>> = (0..n - 1).map(|j| CPolynomial::var(n - 1, j)).collect();
        images.push(phi.clone());
        (mixed.substitute(&images)?, Truncation::Exact)
    } else {
        (restrict(&mixed, &phi, k)?, Truncation::Jet(k))
    };
    Ok(GraphForm {
        g,
        pure_order_bound: bound,
        transform: GraphTransform { linear, phi },
        residual_flag: mixed.depends_on(n - 1),
    })
}
