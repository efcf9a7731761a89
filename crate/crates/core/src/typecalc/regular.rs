//! Regular type by level-by-level jet extension in affine charts.
//!
//! In chart `j` a regular curve is reparametrized so that `ζ_j = τ`, the other
//! components being `Σ_s a_{i,s} τ^s` with unknown coefficients (and
//! `a_{i,1} = 0` for `i < j`, so that charts do not overlap). The pullback
//! coefficient of `τ^p τ̄^q` is a polynomial in the unknowns and their
//! conjugates; level `e` asks for all coefficients with `p + q = e` to vanish.

use std::collections::BTreeMap;

use num_traits::{One, Zero};

use crate::algebra::{CPolynomial, ExponentPair, Exponents, Order, Truncation};
use crate::curve::{pullback, CurveJet};
use crate::error::{Error, Result};
use crate::expr::{print_polynomial, VarNames};
use crate::germ::{hermitian_ldl_in_order, GramDecision, GramMatrix, GraphForm};
use crate::scalar::{Gaussian, Real};
use crate::search::height_values;

use super::TypeValue;

const BRANCH_LIMIT: usize = 256;
const ROOT_HEIGHT: u32 = 3;

/// How the exploration of one branch ended.
#[derive(Clone, PartialEq, Eq, Debug)]
pub enum BranchEnd {
    /// Every curve of the branch has pullback order exactly `level`.
    Obstruction { level: u32, reason: String },
    /// The equations at `level` could not be decided.
    Unresolved { level: u32, reason: String },
    /// All levels through the bound were solved.
    Cleared,
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct BranchRecord<R> {
    pub chart: usize,
    /// Solved unknowns, as `name := expression` lines.
    pub solved: Vec<String>,
    /// Unknowns assumed nonzero in this branch.
    pub nonzero: Vec<String>,
    pub end: BranchEnd,
    /// False when the branch was reached by trying candidate roots, so that
    /// other solutions may exist.
    pub complete: bool,
    pub exhibit: CurveJet<R>,
    pub exhibit_order: Order,
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct RegTypeClaim<R> {
    pub value: TypeValue<R>,
    /// Highest level examined.
    pub max_level: u32,
    /// Best exhibited regular curve, in the graph frame.
    pub curve: Option<CurveJet<R>>,
    pub pullback_order: Option<Order>,
    pub branches: Vec<BranchRecord<R>>,
    pub branch_limit_hit: bool,
}

type Series<R> = BTreeMap<(u32, u32), CPolynomial<R>>;

fn series_mul<R: Real>(a: &Series<R>, b: &Series<R>, cap: u32) -> Series<R> {
    let mut out: Series<R> = BTreeMap::new();
    for (&(p1, q1), x) in a {
        for (&(p2, q2), y) in b {
            let key = (p1 + p2, q1 + q2);
            if key.0 + key.1 > cap {
                continue;
            }
            let prod = x * y;
            let slot = out.entry(key).or_insert_with(|| CPolynomial::zero(x.nvars()));
            *slot = &*slot + &prod;
        }
    }
    out.retain(|_, v| !v.is_zero());
    out
}

/// Unknown `a_{i,s}` of a chart.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
struct Unknown {
    component: usize,
    power: u32,
}

struct Chart<R> {
    index: usize,
    unknowns: Vec<Unknown>,
    names: VarNames,
    /// Pullback coefficients by bidegree, over the unknowns.
    coefficients: Series<R>,
}

fn build_chart<R: Real>(g: &CPolynomial<R>, j: usize, cap: u32) -> Chart<R> {
    let m = g.nvars();
    let mut unknowns = Vec::new();
    for i in 0..m {
        if i == j {
            continue;
        }
        let first = if i < j { 2 } else { 1 };
        for s in first..cap {
            unknowns.push(Unknown { component: i, power: s });
        }
    }
    let u = unknowns.len();
    let names = VarNames(unknowns.iter().map(|x| format!("a{}_{}", x.component + 1, x.power)).collect());
    let mut holo: Vec<Series<R>> = vec![BTreeMap::new(); m];
    holo[j].insert((1, 0), CPolynomial::one(u));
    for (k, x) in unknowns.iter().enumerate() {
        holo[x.component].insert((x.power, 0), CPolynomial::var(u, k));
    }
    let anti: Vec<Series<R>> = holo
        .iter()
        .map(|s| s.iter().map(|(&(p, q), c)| ((q, p), c.conjugate())).collect())
        .collect();
    let mut holo_pow: Vec<Vec<Series<R>>> = vec![Vec::new(); m];
    let mut anti_pow: Vec<Vec<Series<R>>> = vec![Vec::new(); m];
    let power = |cache: &mut Vec<Series<R>>, base: &Series<R>, k: u32| -> Series<R> {
        if cache.is_empty() {
            cache.push(BTreeMap::from([((0, 0), CPolynomial::one(u))]));
        }
        while cache.len() <= k as usize {
            let next = series_mul(cache.last().unwrap(), base, cap);
            cache.push(next);
        }
        cache[k as usize].clone()
    };
    let mut total: Series<R> = BTreeMap::new();
    for (e, c) in g.terms() {
        if e.degree() > cap {
            continue;
        }
        let mut acc: Series<R> = BTreeMap::from([((0, 0), CPolynomial::constant(u, c.clone()))]);
        for i in 0..m {
            if acc.is_empty() {
                break;
            }
            if e.holo[i] > 0 {
                acc = series_mul(&acc, &power(&mut holo_pow[i], &holo[i], e.holo[i]), cap);
            }
            if e.anti[i] > 0 {
                acc = series_mul(&acc, &power(&mut anti_pow[i], &anti[i], e.anti[i]), cap);
            }
        }
        for (k, v) in acc {
            let slot = total.entry(k).or_insert_with(|| CPolynomial::zero(u));
            *slot = &*slot + &v;
        }
    }
    total.retain(|_, v| !v.is_zero());
    Chart { index: j, unknowns, names, coefficients: total }
}

#[derive(Clone)]
struct Branch<R> {
    /// Image of every unknown in terms of the free ones.
    images: Vec<CPolynomial<R>>,
    solved: Vec<bool>,
    nonzero: Vec<bool>,
    log: Vec<String>,
    complete: bool,
    level: u32,
}

impl<R: Real> Branch<R> {
    fn new(u: usize) -> Self {
        Self {
            images: (0..u).map(|k| CPolynomial::var(u, k)).collect(),
            solved: vec![false; u],
            nonzero: vec![false; u],
            log: Vec::new(),
            complete: true,
            level: 2,
        }
    }

    /// Sets unknown `k := value` everywhere.
    fn assign(&mut self, k: usize, value: &CPolynomial<R>, eqs: &mut [CPolynomial<R>], names: &VarNames) {
        let u = self.images.len();
        let mut subst: Vec<CPolynomial<R>> = (0..u).map(|i| CPolynomial::var(u, i)).collect();
        subst[k] = value.clone();
        for img in self.images.iter_mut() {
            if img.depends_on(k) {
                *img = img.substitute(&subst).expect("same dimension");
            }
        }
        for eq in eqs.iter_mut() {
            if eq.depends_on(k) {
                *eq = eq.substitute(&subst).expect("same dimension");
            }
        }
        self.images[k] = value.clone();
        self.solved[k] = true;
        self.log.push(format!("{} := {}", names.0[k], print_polynomial(value, names)));
    }

    fn exhibit_values(&self) -> Vec<CPolynomial<R>> {
        let u = self.images.len();
        (0..u)
            .map(|k| {
                if self.nonzero[k] && !self.solved[k] {
                    CPolynomial::one(0)
                } else {
                    CPolynomial::zero(0)
                }
            })
            .collect()
    }
}

/// Divides out the monomial factors made of unknowns assumed nonzero.
fn strip_nonzero<R: Real>(eq: &CPolynomial<R>, nonzero: &[bool]) -> CPolynomial<R> {
    let u = eq.nvars();
    let mut common = ExponentPair::constant(u);
    let mut first = true;
    for (e, _) in eq.terms() {
        for k in 0..u {
            if first {
                common.holo[k] = e.holo[k];
                common.anti[k] = e.anti[k];
            } else {
                common.holo[k] = common.holo[k].min(e.holo[k]);
                common.anti[k] = common.anti[k].min(e.anti[k]);
            }
        }
        first = false;
    }
    for k in 0..u {
        if !nonzero[k] {
            common.holo[k] = 0;
            common.anti[k] = 0;
        }
    }
    if common.degree() == 0 {
        return eq.clone();
    }
    CPolynomial::from_terms(
        u,
        eq.terms().map(|(e, c)| {
            let holo = e.holo.iter().zip(&common.holo).map(|(a, b)| a - b).collect();
            let anti = e.anti.iter().zip(&common.anti).map(|(a, b)| a - b).collect();
            (ExponentPair { holo, anti }, c.clone())
        }),
        Truncation::Exact,
    )
}

/// Unknowns occurring in a polynomial, holomorphically or not.
fn support<R: Real>(eq: &CPolynomial<R>) -> Vec<usize> {
    (0..eq.nvars()).filter(|&k| eq.depends_on(k)).collect()
}

/// Free unknowns dividing every term of `eq`.
fn monomial_factor_vars<R: Real>(eq: &CPolynomial<R>, nonzero: &[bool]) -> Vec<usize> {
    (0..eq.nvars())
        .filter(|&k| !nonzero[k] && eq.terms().all(|(e, _)| e.holo[k] + e.anti[k] > 0))
        .collect()
}

/// `c·x + rest` (or `c·x̄ + rest`) with `c` a nonzero constant and `rest`
/// free of `x`: returns `(x, value of x)`.
fn linear_solution<R: Real>(eq: &CPolynomial<R>, allowed: &[bool]) -> Option<(usize, CPolynomial<R>)> {
    let u = eq.nvars();
    for k in 0..u {
        if !allowed[k] {
            continue;
        }
        for conj in [false, true] {
            let mut e = ExponentPair::constant(u);
            if conj {
                e.anti[k] = 1;
            } else {
                e.holo[k] = 1;
            }
            let c = eq.coeff(&e);
            if c.is_zero() {
                continue;
            }
            let rest = eq - &CPolynomial::monomial(e, c.clone());
            if rest.depends_on(k) {
                continue;
            }
            let inv = c.inv().expect("nonzero coefficient");
            let mut value = (-&rest).scale(&inv);
            if conj {
                value = value.conjugate();
            }
            return Some((k, value));
        }
    }
    None
}

/// Hermitian matrix of a real polynomial over the monomials of the
/// unknowns, with the constant monomial last.
fn unknown_gram<R: Real>(eq: &CPolynomial<R>) -> GramMatrix<R> {
    let u = eq.nvars();
    let mut basis: Vec<Exponents> = eq.terms().flat_map(|(e, _)| [e.holo.clone(), e.anti.clone()]).collect();
    basis.sort_by(|a, b| {
        let da: u32 = a.iter().sum();
        let db: u32 = b.iter().sum();
        (da == 0).cmp(&(db == 0)).then_with(|| da.cmp(&db)).then_with(|| b.cmp(a))
    });
    basis.dedup();
    let index = |a: &Exponents| basis.iter().position(|b| b == a).expect("basis covers every factor");
    let mut entries = vec![vec![Gaussian::zero(); basis.len()]; basis.len()];
    for (e, c) in eq.terms() {
        entries[index(&e.holo)][index(&e.anti)] = c.clone();
    }
    GramMatrix { nvars: u, basis, entries }
}

/// Factors `f_j` with `±eq = Σ d_j |f_j|²`, when such a PSD form exists.
fn psd_factors<R: Real>(eq: &CPolynomial<R>) -> Option<Vec<CPolynomial<R>>> {
    if !eq.is_real_valued() {
        return None;
    }
    for sign in [false, true] {
        let target = if sign { -eq } else { eq.clone() };
        if let GramDecision::Psd { factors } = hermitian_ldl_in_order(&unknown_gram(&target)) {
            return Some(factors.into_iter().map(|(_, f)| f).collect());
        }
    }
    None
}

enum Step<R> {
    Cleared(Branch<R>),
    Obstructed(Branch<R>, String),
    Stuck(Branch<R>, String),
    Split(Vec<Branch<R>>),
}

fn level_equations<R: Real>(chart: &Chart<R>, b: &Branch<R>, e: u32) -> Vec<CPolynomial<R>> {
    (1..e)
        .map(|p| (p, e - p))
        .filter(|&(p, q)| p <= q)
        .filter_map(|k| chart.coefficients.get(&k))
        .map(|c| c.substitute(&b.images).expect("same dimension"))
        .filter(|c| !c.is_zero())
        .collect()
}

/// Solves a copy of the branch further along factors that are linear in a
/// free unknown, so that the exhibited curve realizes the obstruction with
/// as much cancellation as the level allows.
fn polish<R: Real>(mut b: Branch<R>, factors: &[CPolynomial<R>], names: &VarNames) -> Branch<R> {
    let mut rest: Vec<CPolynomial<R>> = factors.to_vec();
    let mut i = 0;
    while i < rest.len() {
        let eq = strip_nonzero(&rest[i], &b.nonzero);
        let allowed: Vec<bool> = (0..b.images.len()).map(|k| !b.solved[k] && !b.nonzero[k]).collect();
        if let Some((k, value)) = linear_solution(&eq, &allowed) {
            b.assign(k, &value, &mut rest, names);
        }
        i += 1;
    }
    b
}

fn run_level<R: Real>(chart: &Chart<R>, mut b: Branch<R>) -> Step<R> {
    let e = b.level;
    let u = chart.unknowns.len();
    let mut eqs = level_equations(chart, &b, e);
    loop {
        eqs = eqs.iter().map(|q| strip_nonzero(q, &b.nonzero)).filter(|q| !q.is_zero()).collect();
        if eqs.is_empty() {
            return Step::Cleared(b);
        }
        if let Some(c) = eqs.iter().find(|q| q.terms().all(|(e, _)| e.degree() == 0)) {
            let c = c.constant_term();
            return Step::Obstructed(b, format!("constant coefficient {}", c));
        }
        let allowed: Vec<bool> = (0..u).map(|k| !b.solved[k] && !b.nonzero[k]).collect();
        if let Some((i, (k, value))) =
            eqs.iter().enumerate().find_map(|(i, q)| linear_solution(q, &allowed).map(|s| (i, s)))
        {
            eqs.remove(i);
            b.assign(k, &value, &mut eqs, &chart.names);
            continue;
        }
        if let Some((i, factors)) = eqs.iter().enumerate().find_map(|(i, q)| psd_factors(q).map(|f| (i, f))) {
            if factors.iter().any(|f| f.len() == 1 && !f.constant_term().is_zero()) {
                let nonconstant: Vec<CPolynomial<R>> =
                    factors.into_iter().filter(|f| f.constant_term().is_zero() || f.len() > 1).collect();
                let polished = polish(b, &nonconstant, &chart.names);
                return Step::Obstructed(polished, "positive definite coefficient".into());
            }
            eqs.remove(i);
            eqs.extend(factors);
            continue;
        }
        // a common monomial factor in unknowns not yet assumed nonzero
        if let Some(vars) = eqs.iter().map(|q| monomial_factor_vars(q, &b.nonzero)).find(|v| !v.is_empty()) {
            let mut out = Vec::new();
            for &k in &vars {
                let mut child = b.clone();
                child.assign(k, &CPolynomial::zero(u), &mut [], &chart.names);
                out.push(child);
            }
            let mut child = b.clone();
            for &k in &vars {
                child.nonzero[k] = true;
            }
            out.push(child);
            return Step::Split(out);
        }
        // candidate roots of an equation in a single free unknown
        if let Some(q) = eqs.iter().find(|q| matches!(support(q)[..], [k] if !b.solved[k] && !b.nonzero[k])) {
            let k = support(q)[0];
            let mut out = Vec::new();
            for x in height_values::<R>(ROOT_HEIGHT) {
                let mut vals: Vec<CPolynomial<R>> = vec![CPolynomial::zero(0); u];
                vals[k] = CPolynomial::constant(0, x.clone());
                if q.substitute(&vals).expect("same dimension").is_zero() {
                    let mut child = b.clone();
                    child.assign(k, &CPolynomial::constant(u, x), &mut [], &chart.names);
                    child.complete = false;
                    out.push(child);
                }
            }
            if !out.is_empty() {
                return Step::Split(out);
            }
        }
        let shown: Vec<String> = eqs.iter().map(|q| format!("{} = 0", print_polynomial(q, &chart.names))).collect();
        return Step::Stuck(b, shown.join("; "));
    }
}

fn exhibit<R: Real>(chart: &Chart<R>, b: &Branch<R>, m: usize, cap: u32) -> CurveJet<R> {
    let vals = b.exhibit_values();
    let mut coeffs = vec![vec![Gaussian::zero(); cap as usize]; m];
    coeffs[chart.index][1] = Gaussian::one();
    for (k, x) in chart.unknowns.iter().enumerate() {
        let v = b.images[k].substitute(&vals).expect("same dimension").constant_term();
        coeffs[x.component][x.power as usize] = v;
    }
    CurveJet::from_coefficients(coeffs, Truncation::Exact).expect("regular curve")
}

/// Regular type of `{2Re(z_n) + g = 0}` decided through pullback order `n_max`.
///
/// The result is `ExactValue` only when every branch of every chart ends in
/// an obstruction and an exhibited curve attains the largest one.
pub fn reg_type<R: Real>(gf: &GraphForm<R>, n_max: u32) -> Result<RegTypeClaim<R>> {
    if n_max < 2 {
        return Err(Error::InvalidArgument("the level bound must be at least 2".into()));
    }
    for t in [gf.pure_order_bound, gf.g.truncation()] {
        if let Truncation::Jet(k) = t {
            if k < n_max {
                return Err(Error::InsufficientJet { needed: n_max, available: k });
            }
        }
    }
    let g = &gf.g;
    let m = g.nvars();
    if m == 0 {
        return Err(Error::InvalidArgument("regular curves need at least one graph variable".into()));
    }
    let mut records: Vec<BranchRecord<R>> = Vec::new();
    let mut visited = 0usize;
    let mut limit_hit = false;
    for j in 0..m {
        let chart = build_chart(g, j, n_max);
        let u = chart.unknowns.len();
        let mut queue = vec![Branch::new(u)];
        while let Some(b) = queue.pop() {
            visited += 1;
            let mut finish = |b: &Branch<R>, end: BranchEnd| -> Result<()> {
                let curve = exhibit(&chart, b, m, n_max);
                let order = pullback(g, &curve)?.order_of_vanishing();
                records.push(BranchRecord {
                    chart: j,
                    solved: b.log.clone(),
                    nonzero: (0..u).filter(|&k| b.nonzero[k]).map(|k| chart.names.0[k].clone()).collect(),
                    end,
                    complete: b.complete,
                    exhibit: curve,
                    exhibit_order: order,
                });
                Ok(())
            };
            if visited > BRANCH_LIMIT {
                limit_hit = true;
                finish(&b, BranchEnd::Unresolved { level: b.level, reason: "branch limit reached".into() })?;
                continue;
            }
            match run_level(&chart, b) {
                Step::Cleared(mut b) => {
                    if b.level == n_max {
                        finish(&b, BranchEnd::Cleared)?;
                    } else {
                        b.level += 1;
                        queue.push(b);
                    }
                }
                Step::Obstructed(b, reason) => finish(&b, BranchEnd::Obstruction { level: b.level, reason })?,
                Step::Stuck(b, reason) => finish(&b, BranchEnd::Unresolved { level: b.level, reason })?,
                Step::Split(children) => queue.extend(children.into_iter().rev()),
            }
        }
    }
    assemble(records, n_max, limit_hit)
}

fn assemble<R: Real>(records: Vec<BranchRecord<R>>, n_max: u32, limit_hit: bool) -> Result<RegTypeClaim<R>> {
    let mut upper = 0;
    let mut decided = !limit_hit;
    for r in &records {
        match &r.end {
            BranchEnd::Obstruction { level, .. } => {
                upper = upper.max(*level);
                if r.exhibit_order != Order::Exact(*level) {
                    return Err(Error::VerificationFailed(format!(
                        "exhibited curve {} has order {} at an obstruction of level {}",
                        r.exhibit, r.exhibit_order, level
                    )));
                }
            }
            _ => decided = false,
        }
        decided &= r.complete;
    }
    let rank = |o: &Order| match o {
        Order::IdenticallyZero => (u32::MAX, 1),
        Order::Exact(k) => (*k, 1),
        Order::AtLeast(k) => (*k, 0),
    };
    let best = records.iter().fold(None::<&BranchRecord<R>>, |best, r| match best {
        Some(b) if rank(&b.exhibit_order) >= rank(&r.exhibit_order) => Some(b),
        _ => Some(r),
    });
    let (value, curve, order) = match best {
        None => (TypeValue::AtLeast(R::from_int(2)), None, None),
        Some(b) => {
            let value = match b.exhibit_order {
                Order::IdenticallyZero => TypeValue::Infinite,
                Order::Exact(k) if decided && k == upper => TypeValue::ExactValue(R::from_int(k as i64)),
                Order::Exact(k) if decided && k > upper => {
                    return Err(Error::VerificationFailed(format!(
                        "exhibited order {} exceeds every obstruction (at most {})",
                        k, upper
                    )))
                }
                Order::Exact(k) | Order::AtLeast(k) => TypeValue::AtLeast(R::from_int(k as i64)),
            };
            (value, Some(b.exhibit.clone()), Some(b.exhibit_order))
        }
    };
    Ok(RegTypeClaim { value, max_level: n_max, curve, pullback_order: order, branches: records, branch_limit_hit: limit_hit })
}
