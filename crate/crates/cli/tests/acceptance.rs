//! Acceptance checks. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any unexpected failure occurs.

use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use contact_cli::{execute, Params, Problem};
use contact_core::curve::{laplacian_power, lowest_term_profile, ps_test_single, pullback};
use contact_core::expr::{parse_expression, parse_tuple, ProblemFile, VarNames};
use contact_core::fdb::{eq6_specialize, fdb_terms, laplacian_power_fdb, random_instance};
use contact_core::germ::{germ_ps_check, gram_certificate, PsVerdict};
use contact_core::typecalc::{desingularize, reg_type, sing_type_search, TypeValue};
use contact_core::{
    Curve, DefiningFunction, ExponentPair, Gaussian, GaussianRational, GraphForm, Kind, Order, Polynomial, PsOutcome,
    Rational, SearchBudget, Truncation,
};

type Check = Result<String, String>;

fn poly(text: &str, n: usize) -> Polynomial {
    parse_expression(text, &VarNames::z(n)).unwrap()
}

fn curve(text: &str) -> Curve {
    Curve::from_polynomials(&parse_tuple(text, &VarNames::t()).unwrap()).unwrap()
}

fn graph(text: &str, n: usize) -> GraphForm {
    GraphForm::from_graph(poly(text, n)).unwrap()
}

fn int(k: i64) -> Rational {
    Rational::from_integer(k.into())
}

fn factorial(k: u32) -> Rational {
    (1..=k as i64).map(int).fold(Rational::one(), |a, b| a * b)
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn fdb_oracle() -> Check {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let pairs = 200;
    for trial in 0..pairs {
        let nvars = rng.gen_range(1..=2);
        let (g, z) = random_instance::<Rational, _>(&mut rng, nvars, 6, 4);
        let u = pullback(&g, &z).map_err(|e| e.to_string())?;
        for k in 1..=4 {
            let fdb = laplacian_power_fdb(&g, &z, k).map_err(|e| e.to_string())?;
            let direct = laplacian_power(&u, k).map_err(|e| e.to_string())?;
            ensure(fdb == direct, || format!("trial {} k={}: {} vs {} for g = {}", trial, k, fdb, direct, g))?;
        }
    }
    let took = start.elapsed();
    ensure(took < Duration::from_secs(120), || format!("took {:?}", took))?;
    Ok(format!("{} pairs, k = 1..4, {:.2?}", pairs, took))
}

fn cubic_table() -> Check {
    let terms = fdb_terms(3).map_err(|e| e.to_string())?;
    let mut found = Vec::new();
    for ty in [(1, 1), (1, 2), (2, 1), (2, 2)] {
        let counts: Vec<u64> = terms.iter().filter(|t| t.form_type() == ty).map(|t| t.count).collect();
        ensure(counts.len() == 1, || format!("form type {:?} has {} terms", ty, counts.len()))?;
        found.push(counts[0]);
    }
    ensure(found == [1, 3, 3, 9], || format!("got {:?}", found))?;
    Ok(format!("{:?}", found))
}

fn eq6_law() -> Check {
    let cases = [
        (1, "abs2(z1)^2 + abs2(z1)*Re(z1)", 1, "(t + 2*t^2)", [1, 1, 1, 1]),
        (2, "abs2(z1 + z2^2) + abs2(z2)^2", 2, "(-t^4, t^2)", [1, 3, 3, 9]),
        (3, "abs2(z1)^2 + abs2(z1*z2) + Re(z1^2*conj(z2))", 2, "(t^3 + t^5, 2*t^4 + i*t^6)", [1, 10, 10, 100]),
    ];
    let mut out = Vec::new();
    for (m, g, n, z, want) in cases {
        let (g, z) = (poly(g, n), curve(z));
        let x = eq6_specialize(&g, &z, m).map_err(|e| e.to_string())?;
        ensure(x.coefficients() == want, || format!("m={}: {:?}", m, x.coefficients()))?;
        let direct = laplacian_power(&pullback(&g, &z).unwrap(), 2 * m).unwrap();
        ensure(x.total == direct, || format!("m={}: {} vs direct {}", m, x.total, direct))?;
        out.push(format!("m={} {:?}", m, x.coefficients()));
    }
    Ok(out.join(", "))
}

fn cusp_example() -> Check {
    let start = Instant::now();
    let r = DefiningFunction::validate(poly("2*Re(z3) + abs2(z1^2 - z2^3)", 3)).unwrap();
    let gf = contact_core::germ::normalize_to_graph(&r, 12).map_err(|e| e.to_string())?;
    let reg = reg_type(&gf, 8).map_err(|e| e.to_string())?;
    ensure(reg.value == TypeValue::ExactValue(int(6)), || format!("reg_type {}", reg.value))?;
    let c = reg.curve.clone().ok_or("no regular certificate")?;
    let along = pullback(&gf.g, &c).unwrap().order_of_vanishing();
    ensure(along == Order::Exact(6) && c.multiplicity() == 1, || format!("certificate {} gives {}", c, along))?;
    let sing = sing_type_search(&gf, &SearchBudget::default()).map_err(|e| e.to_string())?;
    ensure(sing.value == TypeValue::Infinite, || format!("sing_type {}", sing.value))?;
    let z = sing.curve.clone().ok_or("no singular certificate")?;
    ensure(z == curve("(t^3, t^2)"), || format!("certificate {}", z))?;
    let lifted = z.pad_zeros(1);
    ensure(pullback(r.polynomial(), &lifted).unwrap().is_zero(), || "pullback not zero".into())?;
    let took = start.elapsed();
    ensure(took < Duration::from_secs(10), || format!("took {:?}", took))?;
    Ok(format!("reg 6 via {}, sing infinite via {}, {:.2?}", c, lifted, took))
}

/// Returns the result for the literal criterion and for its provable part.
fn stabilization() -> (Check, Check) {
    let budget = SearchBudget::default();
    let mut missing = Vec::new();
    let mut details = Vec::new();
    for m in [2u32, 3] {
        let r = DefiningFunction::validate(poly(&format!("2*Re(z3) + abs2(z1 + z2^{})", m), 3)).unwrap();
        let rep = match germ_ps_check(&r, 2, 2 * m + 2, &budget) {
            Ok(rep) => rep,
            Err(e) => return (Err(e.to_string()), Err(e.to_string())),
        };
        let verdicts: Vec<(u32, PsVerdict)> = rep.entries.iter().map(|e| (e.k, e.certificate.verdict)).collect();
        let true_part = (|| {
            for e in &rep.entries {
                let v = e.certificate.verdict;
                if e.k <= m {
                    ensure(v == PsVerdict::Certified, || format!("m={} k={}: {:?}", m, e.k, v))?;
                } else if e.k < 2 * m {
                    ensure(v == PsVerdict::ViolationFound, || format!("m={} k={}: {:?}", m, e.k, v))?;
                    let w = curve(&format!("(-t^{}, t)", m));
                    match ps_test_single(&e.restricted, &w).map_err(|e| e.to_string())? {
                        PsOutcome::FailNonpositive { ck, .. } => {
                            ensure(ck == GaussianRational::from_int(-1), || format!("m={} k={}: c = {}", m, e.k, ck))?
                        }
                        other => return Err(format!("m={} k={}: witness gives {}", m, e.k, other)),
                    }
                } else {
                    ensure(v == PsVerdict::Certified, || format!("m={} k={}: {:?}", m, e.k, v))?;
                }
            }
            ensure(rep.k0 == Some(2 * m), || format!("m={}: k0 = {:?}", m, rep.k0))
        })();
        if let Err(e) = true_part {
            return (Err(e.clone()), Err(e));
        }
        let low: Vec<u32> = verdicts.iter().filter(|(k, v)| *k < 2 * m && !v.is_violation()).map(|(k, _)| *k).collect();
        if !low.is_empty() {
            missing.push(format!("m={}: no violation at k = {:?}", m, low));
        }
        details.push(format!("m={} k0={}", m, 2 * m));
    }
    let summary = details.join(", ");
    let literal = if missing.is_empty() {
        Ok(summary.clone())
    } else {
        Err(format!("{} (G_k = |z1|^2 is certified for k <= m)", missing.join("; ")))
    };
    (literal, Ok(format!("{}; violations exactly for m < k < 2m, witness c = -1", summary)))
}

fn desingularization() -> Check {
    let d = desingularize(&graph("abs2(z1 + z2^2) + abs2(z2)^2", 2), &curve("(-t^4, t^2)")).map_err(|e| e.to_string())?;
    ensure(d.eta == curve("(-t^2, t)"), || format!("eta = {}", d.eta))?;
    ensure(d.eta.multiplicity() == 1 && d.eta_pullback.order_of_vanishing() == Order::Exact(4), || "orders".into())?;
    ensure(d.eta_coefficient == d.input_coefficient, || "coefficient transfer".into())?;
    for m in [2u32, 3] {
        let z = curve(&format!("(t^{}, 0)", m));
        let d = desingularize(&graph("abs2(z1)^2", 2), &z).map_err(|e| e.to_string())?;
        ensure(d.eta == curve("(t, 0)"), || format!("m={}: eta = {}", m, d.eta))?;
        ensure(d.eta_pullback.order_of_vanishing() == Order::Exact(4), || format!("m={}", m))?;
        let input = pullback(&graph("abs2(z1)^2", 2).g, &z).unwrap();
        let c_in = input.coeff(&ExponentPair::new(&[2 * m], &[2 * m]));
        ensure(c_in == d.eta_coefficient, || format!("m={}: {} vs {}", m, c_in, d.eta_coefficient))?;
    }
    Ok("(-t^4, t^2) -> (-t^2, t); (t^m, 0) -> (t, 0) for m = 2, 3".into())
}

fn four_corpus() -> Vec<(&'static str, usize)> {
    vec![
        ("abs2(z1)^2 + abs2(z2)^2", 2),
        ("abs2(z1 + z2^2) + abs2(z2)^2", 2),
        ("abs2(z1 - z2^2) + abs2(z2)^2", 2),
        ("abs2(z1 + i*z2^2) + 2*abs2(z2)^2", 2),
        ("abs2(z1 + 2*z2^2) + abs2(z2)^2 + abs2(z1*z2)", 2),
        ("abs2(z1^2 + z2^2) + abs2(z1*z2)", 2),
        ("abs2(z1^2 - z2^2) + abs2(z1*z2)", 2),
        ("abs2(z1)^2 + abs2(z1*z2) + abs2(z2)^2", 2),
        ("abs2(z1^2 + z1*z2) + abs2(z2^2)", 2),
        ("abs2(z1 + z2^2 + z2^3) + abs2(z2)^2", 2),
        ("abs2(z1)^2 + abs2(z2)^2 + abs2(z1*z2)^2", 2),
        ("abs2(z1 + z2*z1) + abs2(z2^2)", 2),
    ]
}

fn falsification() -> Check {
    let budget = SearchBudget { max_multiplicity: 4, max_degree: 8, coeff_height: 3, random_trials: 10_000, seed: 11 };
    let four = int(4);
    let mut least = u64::MAX;
    let corpus = four_corpus();
    for (text, n) in &corpus {
        let gf = graph(text, *n);
        let gram = gram_certificate(&gf.g);
        ensure(gram.verdict == PsVerdict::Certified, || format!("{}: not Gram certified", text))?;
        let reg = reg_type(&gf, 8).map_err(|e| e.to_string())?;
        ensure(reg.value == TypeValue::ExactValue(four.clone()), || format!("{}: reg_type {}", text, reg.value))?;
        let sing = sing_type_search(&gf, &budget).map_err(|e| e.to_string())?;
        ensure(!sing.value.exceeds(&four), || {
            format!("COUNTEREXAMPLE {}: ratio {} along {:?}", text, sing.value, sing.curve.map(|c| c.to_string()))
        })?;
        least = least.min(sing.candidates);
    }
    ensure(least >= 10_000, || format!("only {} candidates", least))?;
    Ok(format!("{} germs, >= {} candidates each, max ratio 4", corpus.len(), least))
}

fn random_poly(rng: &mut ChaCha8Rng, n: usize, max_deg: u32, mixed_only: bool) -> Polynomial {
    let terms: Vec<(ExponentPair, GaussianRational)> = (0..rng.gen_range(1..=5))
        .map(|_| {
            let mut e = ExponentPair::constant(n);
            for _ in 0..rng.gen_range(0..=max_deg) {
                let j = rng.gen_range(0..n);
                if rng.gen_bool(0.5) {
                    e.holo[j] += 1;
                } else {
                    e.anti[j] += 1;
                }
            }
            if mixed_only && !e.is_mixed() {
                e.holo[0] += 1;
                e.anti[0] += 1;
            }
            let c = Gaussian::new(
                Rational::new(rng.gen_range(-5..=5).into(), rng.gen_range(1..=4).into()),
                int(rng.gen_range(-3..=3)),
            );
            (e, c)
        })
        .collect();
    Polynomial::from_terms(n, terms, Truncation::Exact)
}

fn random_curve(rng: &mut ChaCha8Rng, n: usize) -> Curve {
    loop {
        let coeffs = (0..n)
            .map(|_| {
                (0..=4)
                    .map(|d| {
                        if d == 0 || rng.gen_bool(0.5) {
                            GaussianRational::zero()
                        } else {
                            GaussianRational::from_ints(rng.gen_range(-2..=2), rng.gen_range(-2..=2))
                        }
                    })
                    .collect()
            })
            .collect();
        if let Ok(z) = Curve::from_coefficients(coeffs, Truncation::Exact) {
            return z;
        }
    }
}

fn algebra_invariants() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let instances = 150;
    for i in 0..instances {
        let n = rng.gen_range(1..=3);
        let (f, g, h) = (random_poly(&mut rng, n, 4, false), random_poly(&mut rng, n, 4, false), random_poly(&mut rng, n, 3, false));
        ensure(&(&f + &g) + &h == &f + &(&g + &h), || format!("{}: additive associativity", i))?;
        ensure(&f + &g == &g + &f, || format!("{}: additive commutativity", i))?;
        ensure(&(&f * &g) * &h == &f * &(&g * &h), || format!("{}: multiplicative associativity", i))?;
        ensure(&f * &g == &g * &f, || format!("{}: multiplicative commutativity", i))?;
        ensure(&f * &(&g + &h) == &(&f * &g) + &(&f * &h), || format!("{}: distributivity", i))?;
        ensure(&f * &Polynomial::one(n) == f && (&f - &f).is_zero(), || format!("{}: identities", i))?;
        ensure(f.conjugate().conjugate() == f, || format!("{}: conjugation involution", i))?;
        ensure((&f * &g).conjugate() == &f.conjugate() * &g.conjugate(), || format!("{}: conjugation", i))?;
        let j = rng.gen_range(0..n);
        for kind in [Kind::Holo, Kind::Anti] {
            let lhs = (&f * &g).wirtinger(j, kind);
            let rhs = &(&f.wirtinger(j, kind) * &g) + &(&f * &g.wirtinger(j, kind));
            ensure(lhs == rhs, || format!("{}: product rule", i))?;
        }
        if !f.is_zero() && !g.is_zero() {
            let (a, b, c) = (f.order_of_vanishing(), g.order_of_vanishing(), (&f * &g).order_of_vanishing());
            let sum = a.exact().unwrap() + b.exact().unwrap();
            ensure(c == Order::Exact(sum), || format!("{}: nu({}) + nu({}) != {}", i, a, b, c))?;
        }
        let mixed = random_poly(&mut rng, n, 5, true);
        let z = random_curve(&mut rng, n);
        let u = pullback(&mixed, &z).map_err(|e| e.to_string())?;
        ensure(u.is_mixed_only(), || format!("{}: pullback of mixed {} along {} is {}", i, mixed, z, u))?;
        let real = &mixed + &mixed.conjugate();
        let u = pullback(&real, &z).map_err(|e| e.to_string())?;
        if let Order::Exact(d) = u.order_of_vanishing() {
            let profile = lowest_term_profile(&u).map_err(|e| e.to_string())?;
            if d % 2 == 0 {
                let k = d / 2;
                let ck = profile.ck.clone().ok_or("even order without c_k")?;
                let lk = laplacian_power(&u, k).map_err(|e| e.to_string())?;
                let f2 = factorial(k) * factorial(k);
                ensure(lk == ck.scale(&f2), || format!("{}: L^{} u(0) = {} vs (k!)^2 c_k = {}", i, k, lk, ck))?;
            }
        }
    }
    Ok(format!("{} instances", instances))
}

fn corpus_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../problems")
}

fn run_binary(args: &[&str]) -> Result<Vec<u8>, String> {
    let out = Command::new(env!("CARGO_BIN_EXE_contact")).args(args).output().map_err(|e| e.to_string())?;
    match out.status.code() {
        Some(0) | Some(1) => Ok(out.stdout),
        code => Err(format!("{:?} exited with {:?}: {}", args, code, String::from_utf8_lossy(&out.stderr))),
    }
}

fn round_trip() -> Check {
    let mut files: Vec<PathBuf> = std::fs::read_dir(corpus_dir())
        .map_err(|e| e.to_string())?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().map_or(false, |x| x == "txt"))
        .collect();
    files.sort();
    ensure(!files.is_empty(), || "empty corpus".into())?;
    for path in &files {
        let text = std::fs::read_to_string(path).map_err(|e| e.to_string())?;
        let parsed = ProblemFile::<Rational>::parse(&text).map_err(|e| format!("{}: {}", path.display(), e))?;
        let printed = parsed.print();
        let again = ProblemFile::<Rational>::parse(&printed).map_err(|e| e.to_string())?;
        ensure(again == parsed && again.print() == printed, || format!("{}: print/parse differs", path.display()))?;

        let problem = Problem::from_text(&text, "corpus").map_err(|e| e.to_string())?;
        let params = Params { seed: Some(5), trials: Some(300), ..Default::default() };
        let rep = execute("report", &params, Some(&problem)).map_err(|e| e.to_string())?;
        let back = contact_cli::Report::parse(&rep.render())?;
        ensure(back == rep, || format!("{}: report does not parse back", path.display()))?;
        contact_cli::verify_report(&back).map_err(|e| format!("{}: {}", path.display(), e))?;

        let p = path.to_str().unwrap();
        let args = ["report", p, "--all", "--seed", "3", "--trials", "300", "--json"];
        let (a, b) = (run_binary(&args)?, run_binary(&args)?);
        ensure(a == b, || format!("{}: two runs differ", path.display()))?;
    }
    Ok(format!("{} problems, same-seed runs byte-identical", files.len()))
}

fn main() {
    let mut unexpected = 0;
    let mut line = |id: &str, what: &str, res: Check, known_defect: bool| {
        match &res {
            Ok(msg) => println!("criterion {} PASS {}: {}", id, what, msg),
            Err(msg) => {
                println!("criterion {} FAIL {}: {}", id, what, msg);
                if !known_defect {
                    unexpected += 1;
                }
            }
        }
    };
    line("1", "Faa di Bruno expansion equals the direct operator", fdb_oracle(), false);
    line("2", "k = 3 low-form multiplicities", cubic_table(), false);
    line("3", "2m-th order coefficient law", eq6_law(), false);
    line("4", "cusp example: regular 6, singular infinite", cusp_example(), false);
    let (literal, proven) = stabilization();
    line("5", "stabilization, literal claim (violation for every k < 2m)", literal, true);
    line("5", "stabilization, k0 = 2m with violations for m < k < 2m", proven, false);
    line("6", "desingularization", desingularization(), false);
    line("7", "no ratio above 4 on certified regular-type-4 germs", falsification(), false);
    line("8", "algebra invariants", algebra_invariants(), false);
    line("9", "round trip and determinism", round_trip(), false);
    if unexpected > 0 {
        eprintln!("{} criteria failed", unexpected);
        std::process::exit(1);
    }
}
