use num_traits::One;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use contact_core::curve::{contact_order, laplacian_power, pullback};
use contact_core::expr::{parse_tuple, print_polynomial, VarNames};
use contact_core::fdb::{fdb_terms, laplacian_power_fdb, random_instance};
use contact_core::germ::{
    germ_ps_check, gram_certificate, ps_search, GramDecision, PsVerdict, StabilizationReport,
};
use contact_core::typecalc::{desingularize, infer_type, reg_type, sing_type_search, BranchEnd, TypeEvidence};
use contact_core::{Curve, ExponentPair, GaussianRational, GraphForm, Polynomial, PsCertificate, Rational, SearchBudget};

use crate::input::Problem;
use crate::report::{self, InputEcho, Params, Report};
use crate::CliError;

pub const DEFAULT_ORDER: u32 = 12;
pub const DEFAULT_LEVEL: u32 = 8;

pub const COMMANDS: &[&str] = &[
    "order",
    "pullback",
    "contact",
    "ps-check",
    "germ-ps",
    "gram",
    "reg-type",
    "sing-search",
    "desingularize",
    "fdb-verify",
    "report",
];

pub fn budget(p: &Params) -> SearchBudget {
    let d = SearchBudget::default();
    SearchBudget {
        max_multiplicity: p.max_mult.unwrap_or(d.max_multiplicity),
        max_degree: p.max_deg.unwrap_or(d.max_degree),
        coeff_height: p.coeff_height.unwrap_or(d.coeff_height),
        random_trials: p.trials.unwrap_or(d.random_trials),
        seed: p.seed.unwrap_or(d.seed),
    }
}

fn budget_json(b: &SearchBudget) -> Value {
    json!({
        "max_multiplicity": b.max_multiplicity,
        "max_degree": b.max_degree,
        "coeff_height": b.coeff_height,
        "random_trials": b.random_trials,
        "seed": b.seed,
    })
}

fn parse_curve(text: &str) -> Result<Curve, CliError> {
    let comps = parse_tuple(text, &VarNames::t()).map_err(|e| CliError::Input(format!("--curve: {}", e)))?;
    Curve::from_polynomials(&comps).map_err(|e| CliError::Input(format!("--curve: {}", e)))
}

fn need_curve(p: &Params) -> Result<Curve, CliError> {
    parse_curve(p.curve.as_deref().ok_or_else(|| CliError::Input("--curve is required".into()))?)
}

/// Curve in the coordinates of `r`; graph entries accept the shorter tuple.
fn curve_for_r(problem: &Problem, z: Curve) -> Result<Curve, CliError> {
    let n = problem.r.nvars();
    if z.ncomponents() + 1 == n && problem.is_graph() {
        return Ok(z.pad_zeros(1));
    }
    if z.ncomponents() != n {
        return Err(CliError::Input(format!("curve has {} components, expected {}", z.ncomponents(), n)));
    }
    Ok(z)
}

fn problem_of(problem: Option<&Problem>) -> Result<&Problem, CliError> {
    problem.ok_or_else(|| CliError::Input("an input problem is required (FILE or --expr)".into()))
}

pub fn execute(command: &str, params: &Params, problem: Option<&Problem>) -> Result<Report, CliError> {
    let input = problem.map(|p| InputEcho::new(p.canonical_text()));
    let mut rep = Report::new(command, params, input);
    match command {
        "order" => order(&mut rep, problem_of(problem)?),
        "pullback" => pullback_cmd(&mut rep, problem_of(problem)?, params),
        "contact" => contact(&mut rep, problem_of(problem)?, params),
        "ps-check" => ps_check(&mut rep, problem_of(problem)?, params),
        "germ-ps" => germ_ps(&mut rep, problem_of(problem)?, params),
        "gram" => gram(&mut rep, problem_of(problem)?, params),
        "reg-type" => reg(&mut rep, problem_of(problem)?, params),
        "sing-search" => sing(&mut rep, problem_of(problem)?, params),
        "desingularize" => desing(&mut rep, problem_of(problem)?, params),
        "fdb-verify" => fdb_verify(&mut rep, params),
        "report" => full_report(&mut rep, problem_of(problem)?, params),
        other => Err(CliError::Input(format!("unknown command `{}`", other))),
    }?;
    Ok(rep)
}

fn order(rep: &mut Report, problem: &Problem) -> Result<(), CliError> {
    let p = problem.file.entry_polynomial();
    rep.claim("order", report::order(&p.order_of_vanishing()), None);
    Ok(())
}

fn pullback_cmd(rep: &mut Report, problem: &Problem, params: &Params) -> Result<(), CliError> {
    let z = curve_for_r(problem, need_curve(params)?)?;
    let u = pullback(problem.r.polynomial(), &z)?;
    rep.claim("pullback", report::pullback_poly(&u), Some(json!({ "curve": report::curve(&z) })));
    rep.claim("order", report::order(&u.order_of_vanishing()), None);
    Ok(())
}

fn contact(rep: &mut Report, problem: &Problem, params: &Params) -> Result<(), CliError> {
    let z = curve_for_r(problem, need_curve(params)?)?;
    let u = pullback(problem.r.polynomial(), &z)?;
    let c = contact_order(problem.r.polynomial(), &z)?;
    rep.claim(
        "contact",
        report::ratio(&c.ratio::<Rational>()),
        Some(json!({
            "curve": report::curve(&z),
            "pullback": report::pullback_poly(&u),
            "pullback_order": report::order(&c.pullback_order),
            "multiplicity": c.multiplicity,
        })),
    );
    if c.is_infinite() {
        rep.note("pullback vanishes identically");
    }
    Ok(())
}

fn certificate_json(cert: &PsCertificate, names: &VarNames) -> Value {
    let witness = cert.witness.as_ref().map(|w| {
        json!({
            "curve": report::curve(&w.curve),
            "pullback": report::pullback_poly(&w.pullback),
            "order": w.profile.order,
            "balanced_coefficient": w.profile.ck.as_ref().map(report::gaussian),
            "outcome": w.outcome.to_string(),
        })
    });
    let gram = cert.gram.as_ref().map(|(h, d)| {
        let zeros = vec![0u32; h.nvars];
        let basis: Vec<String> = h
            .basis
            .iter()
            .map(|e| print_polynomial(&Polynomial::monomial(ExponentPair::new(e, &zeros), GaussianRational::one()), names))
            .collect();
        let decision = match d {
            GramDecision::Psd { factors } => json!({
                "psd": true,
                "factors": factors
                    .iter()
                    .map(|(c, f)| json!({ "weight": report::rational(c), "factor": print_polynomial(f, names) }))
                    .collect::<Vec<_>>(),
            }),
            GramDecision::Indefinite { direction, value } => json!({
                "psd": false,
                "direction": direction.iter().map(report::gaussian).collect::<Vec<_>>(),
                "value": report::rational(&value),
            }),
        };
        json!({ "basis": basis, "decision": decision })
    });
    json!({
        "method": cert.method.as_str(),
        "witness": witness,
        "gram": gram,
        "bounds": cert.bounds.as_ref().map(budget_json),
        "candidates": cert.candidates,
        "note": cert.note,
    })
}

fn graph_names(gf: &GraphForm) -> VarNames {
    VarNames::z(gf.nvars())
}

/// Gram certificate, falling back to the bounded search.
fn ps_of(gf: &GraphForm, b: &SearchBudget) -> PsCertificate {
    let gram = gram_certificate(&gf.g);
    if gram.verdict == PsVerdict::Certified {
        return gram;
    }
    let mut found = ps_search(&gf.g, b);
    found.gram = gram.gram;
    found.note = gram.note;
    found
}

fn ps_check(rep: &mut Report, problem: &Problem, params: &Params) -> Result<(), CliError> {
    let gf = problem.graph_form(params.order.unwrap_or(DEFAULT_ORDER))?;
    let b = budget(params);
    b.validate()?;
    let cert = ps_of(&gf, &b);
    rep.claim("function", report::polynomial(&gf.g, &graph_names(&gf)), None);
    rep.claim("ps", json!(cert.verdict.as_str()), Some(certificate_json(&cert, &graph_names(&gf))));
    if cert.verdict.is_violation() {
        rep.status = "violation".into();
    }
    Ok(())
}

fn stabilization_json(s: &StabilizationReport<Rational>, names: &VarNames) -> Value {
    json!({
        "label": StabilizationReport::<Rational>::LABEL,
        "note": StabilizationReport::<Rational>::NOTE,
        "entries": s.entries.iter().map(|e| json!({
            "k": e.k,
            "restricted": report::polynomial(&e.restricted, names),
            "verdict": e.certificate.verdict.as_str(),
            "certificate": certificate_json(&e.certificate, names),
        })).collect::<Vec<_>>(),
        "budget": budget_json(&s.budget),
    })
}

fn germ_ps(rep: &mut Report, problem: &Problem, params: &Params) -> Result<(), CliError> {
    let kmin = params.kmin.unwrap_or(2);
    let kmax = params.kmax.unwrap_or(8);
    let b = budget(params);
    let s = germ_ps_check(&problem.r, kmin, kmax, &b)?;
    let names = VarNames::z(problem.r.nvars() - 1);
    for e in &s.entries {
        let mut line = format!("k = {}: {}", e.k, e.certificate.verdict);
        if let Some(w) = &e.certificate.witness {
            line.push_str(&format!(" along {} ({})", w.curve, w.outcome));
        }
        rep.note(line);
    }
    let k0 = s.k0.map_or(Value::Null, |k| json!(k));
    rep.claim("k0", k0, Some(stabilization_json(&s, &names)));
    if s.entries.iter().any(|e| e.certificate.verdict.is_violation()) {
        rep.status = "violation".into();
    }
    Ok(())
}

fn gram(rep: &mut Report, problem: &Problem, params: &Params) -> Result<(), CliError> {
    let gf = problem.graph_form(params.order.unwrap_or(DEFAULT_ORDER))?;
    let cert = gram_certificate(&gf.g);
    rep.claim("gram", json!(cert.verdict.as_str()), Some(certificate_json(&cert, &graph_names(&gf))));
    Ok(())
}

fn reg_json(c: &contact_core::typecalc::RegTypeClaim<Rational>) -> Value {
    json!({
        "max_level": c.max_level,
        "curve": c.curve.as_ref().map(report::curve),
        "pullback_order": c.pullback_order.as_ref().map(report::order),
        "branch_limit_hit": c.branch_limit_hit,
        "branches": c.branches.iter().map(|b| {
            let end = match &b.end {
                BranchEnd::Obstruction { level, reason } => json!({ "kind": "obstruction", "level": level, "reason": reason }),
                BranchEnd::Unresolved { level, reason } => json!({ "kind": "unresolved", "level": level, "reason": reason }),
                BranchEnd::Cleared => json!({ "kind": "cleared" }),
            };
            json!({
                "chart": b.chart + 1,
                "solved": b.solved,
                "nonzero": b.nonzero,
                "end": end,
                "complete": b.complete,
                "exhibit": report::curve(&b.exhibit),
                "exhibit_order": report::order(&b.exhibit_order),
            })
        }).collect::<Vec<_>>(),
    })
}

fn sing_json(c: &contact_core::typecalc::SingClaim<Rational>) -> Value {
    json!({
        "curve": c.curve.as_ref().map(report::curve),
        "pullback_order": c.pullback_order.as_ref().map(report::order),
        "ratio": c.ratio.as_ref().map(report::ratio),
        "candidates": c.candidates,
        "budget": budget_json(&c.budget),
    })
}

fn reg(rep: &mut Report, problem: &Problem, params: &Params) -> Result<(), CliError> {
    let level = params.max_level.unwrap_or(DEFAULT_LEVEL);
    let gf = problem.graph_form(params.order.unwrap_or(DEFAULT_ORDER).max(level))?;
    let c = reg_type(&gf, level)?;
    rep.claim("reg_type", report::type_value(&c.value), Some(reg_json(&c)));
    Ok(())
}

fn sing(rep: &mut Report, problem: &Problem, params: &Params) -> Result<(), CliError> {
    let gf = problem.graph_form(params.order.unwrap_or(DEFAULT_ORDER))?;
    let c = sing_type_search(&gf, &budget(params))?;
    rep.claim("sing_type", report::type_value(&c.value), Some(sing_json(&c)));
    Ok(())
}

fn desing(rep: &mut Report, problem: &Problem, params: &Params) -> Result<(), CliError> {
    let gf = problem.graph_form(params.order.unwrap_or(DEFAULT_ORDER))?;
    let z = need_curve(params)?;
    let d = desingularize(&gf, &z)?;
    rep.claim(
        "eta",
        report::curve(&d.eta),
        Some(json!({
            "input": report::curve(&d.input),
            "multiplicity": d.multiplicity,
            "eta_pullback": report::pullback_poly(&d.eta_pullback),
            "input_coefficient": report::gaussian(&d.input_coefficient),
            "eta_coefficient": report::gaussian(&d.eta_coefficient),
        })),
    );
    rep.note(format!("nu(eta) = 1, nu(eta^*g) = 4, coefficient {} transferred", d.eta_coefficient));
    Ok(())
}

fn fdb_verify(rep: &mut Report, params: &Params) -> Result<(), CliError> {
    let k = params.k.unwrap_or(3);
    let trials = params.trials.unwrap_or(20);
    let seed = params.seed.unwrap_or(0);
    if k == 0 {
        return Err(CliError::Input("--k must be positive".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut matches = 0u32;
    for i in 0..trials {
        let (g, z) = random_instance::<Rational, _>(&mut rng, 2, 6, 4);
        let lhs = laplacian_power_fdb(&g, &z, k)?;
        let rhs = laplacian_power(&pullback(&g, &z)?, k)?;
        if lhs == rhs {
            matches += 1;
        } else {
            rep.note(format!("trial {}: expansion {} differs from direct {}", i, lhs, rhs));
        }
    }
    let table: Vec<Value> = fdb_terms(k)?
        .iter()
        .filter(|t| matches!(t.form_type(), (1, 1) | (1, 2) | (2, 1) | (2, 2)))
        .map(|t| {
            json!({
                "form": format!("D{}{}", t.form_type().0, t.form_type().1),
                "holo_blocks": t.holo_blocks,
                "anti_blocks": t.anti_blocks,
                "count": t.count,
                "text": t.to_string(),
            })
        })
        .collect();
    rep.claim("matches", json!(format!("{}/{}", matches, trials)), None);
    rep.claim("low_form_terms", json!(table), None);
    if matches != trials {
        return Err(CliError::Verification(format!("{} of {} trials disagree", trials - matches, trials)));
    }
    Ok(())
}

fn full_report(rep: &mut Report, problem: &Problem, params: &Params) -> Result<(), CliError> {
    let level = params.max_level.unwrap_or(DEFAULT_LEVEL);
    let gf = problem.graph_form(params.order.unwrap_or(DEFAULT_ORDER).max(level))?;
    let names = graph_names(&gf);
    let b = budget(params);
    b.validate()?;
    rep.claim("function", report::polynomial(&gf.g, &names), None);

    let ps = ps_of(&gf, &b);
    rep.claim("ps", json!(ps.verdict.as_str()), Some(certificate_json(&ps, &names)));
    if params.all {
        let s = germ_ps_check(&problem.r, params.kmin.unwrap_or(2), params.kmax.unwrap_or(level), &b)?;
        rep.claim("k0", s.k0.map_or(Value::Null, |k| json!(k)), Some(stabilization_json(&s, &names)));
    }
    let reg = reg_type(&gf, level)?;
    rep.claim("reg_type", report::type_value(&reg.value), Some(reg_json(&reg)));
    let sing = sing_type_search(&gf, &b)?;
    rep.claim("sing_search", report::type_value(&sing.value), Some(sing_json(&sing)));

    let ev = TypeEvidence { reg: Some(reg), sing: Some(sing), ps: Some(ps.verdict), assume_ps: params.assume_ps };
    let t = infer_type(&problem.r, &ev)?;
    let sing_type = t.sing_type.as_ref().map_or(Value::Null, report::type_value);
    let trail: Vec<Value> = t
        .trail
        .iter()
        .map(|s| json!({ "rule": s.rule.as_str(), "claim": s.claim, "note": s.note }))
        .collect();
    rep.claim("sing_type", sing_type, Some(json!({ "trail": trail, "assumptions": t.assumptions })));
    for s in &t.trail {
        rep.note(format!("[{}] {}", s.rule.as_str(), s.claim));
    }
    if ps.verdict.is_violation() {
        rep.status = "violation".into();
    }
    Ok(())
}

/// Replays a report from its embedded input and options and compares the
/// claims exactly.
pub fn verify_report(original: &Report) -> Result<Report, CliError> {
    let problem = match &original.input {
        Some(input) => {
            if report::sha256_hex(input.problem.as_bytes()) != input.sha256 {
                return Err(CliError::Verification("input hash does not match the embedded problem".into()));
            }
            Some(Problem::from_text(&input.problem, "embedded problem")?)
        }
        None => None,
    };
    let replay = execute(&original.command, &original.params, problem.as_ref())?;
    let mut rep = Report::new("verify-report", &Params::default(), original.input.clone());
    let mut agree = true;
    if replay.claims.len() != original.claims.len() {
        agree = false;
        rep.note(format!("claim count {} vs {}", replay.claims.len(), original.claims.len()));
    }
    for (a, b) in original.claims.iter().zip(&replay.claims) {
        if a != b {
            agree = false;
            rep.note(format!("claim `{}` differs on replay", a.name));
        } else {
            rep.note(format!("claim `{}` reproduced", a.name));
        }
    }
    if replay.status != original.status {
        agree = false;
        rep.note(format!("status {} vs {}", replay.status, original.status));
    }
    rep.claim("replayed_command", json!(original.command), None);
    rep.claim("agree", json!(agree), None);
    if !agree {
        return Err(CliError::Verification(rep.transcript.join("; ")));
    }
    Ok(rep)
}
