//! Text form of polynomials, curves and problem files.
//!
//! Grammar (usual precedence, `^` binds tightest, unary minus below `^`):
//!
//! ```text
//! expr    := term (('+' | '-') term)*
//! term    := unary (('*' | '/') unary)*
//! unary   := ('+' | '-') unary | power
//! power   := primary ('^' INT)?
//! primary := INT | 'i' | var | name | func '(' expr ')' | '(' expr ')'
//! func    := 'conj' | 'Re' | 'Im' | 'abs2'
//! ```
//!
//! Division is only allowed by a nonzero constant, so `3/2` is a rational
//! literal and `Re(e)` is `(e + conj(e))/2` with exact halves.

use std::collections::HashMap;

use num_traits::One;

use crate::algebra::{CPolynomial, Truncation};
use crate::error::{Error, Result};
use crate::scalar::{Gaussian, Real};

/// Names of the holomorphic variables; conjugates print as `conj(name)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VarNames(pub Vec<String>);

impl VarNames {
    /// `z1, ..., zn`.
    pub fn z(n: usize) -> Self {
        Self((1..=n).map(|j| format!("z{}", j)).collect())
    }

    /// The curve parameter `t`.
    pub fn t() -> Self {
        Self(vec!["t".to_string()])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    fn index_of(&self, name: &str) -> Option<usize> {
        self.0.iter().position(|v| v == name)
    }
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Int(String),
    Ident(String),
    Sym(char),
    End,
}

fn tokenize(text: &str) -> Result<Vec<(usize, Tok)>> {
    let chars: Vec<(usize, char)> = text.char_indices().collect();
    let mut out = Vec::new();
    let mut k = 0;
    while k < chars.len() {
        let (pos, c) = chars[k];
        if c.is_whitespace() {
            k += 1;
        } else if c.is_ascii_digit() {
            let start = k;
            while k < chars.len() && chars[k].1.is_ascii_digit() {
                k += 1;
            }
            out.push((pos, Tok::Int(chars[start..k].iter().map(|(_, c)| c).collect())));
        } else if c.is_alphabetic() || c == '_' {
            let start = k;
            while k < chars.len() && (chars[k].1.is_alphanumeric() || chars[k].1 == '_') {
                k += 1;
            }
            out.push((pos, Tok::Ident(chars[start..k].iter().map(|(_, c)| c).collect())));
        } else if "+-*/^(),".contains(c) {
            out.push((pos, Tok::Sym(c)));
            k += 1;
        } else {
            return Err(Error::Syntax { pos, msg: format!("unexpected character `{}`", c) });
        }
    }
    out.push((text.len(), Tok::End));
    Ok(out)
}

struct Parser<'a, R> {
    toks: Vec<(usize, Tok)>,
    at: usize,
    vars: &'a VarNames,
    defs: &'a HashMap<String, CPolynomial<R>>,
}

impl<'a, R: Real> Parser<'a, R> {
    fn peek(&self) -> &Tok {
        &self.toks[self.at].1
    }

    fn pos(&self) -> usize {
        self.toks[self.at].0
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.at].1.clone();
        if self.at + 1 < self.toks.len() {
            self.at += 1;
        }
        t
    }

    fn expect(&mut self, c: char) -> Result<()> {
        if *self.peek() == Tok::Sym(c) {
            self.bump();
            Ok(())
        } else {
            Err(Error::Syntax { pos: self.pos(), msg: format!("expected `{}`", c) })
        }
    }

    fn n(&self) -> usize {
        self.vars.len()
    }

    fn expr(&mut self) -> Result<CPolynomial<R>> {
        let mut acc = self.term()?;
        loop {
            match self.peek() {
                Tok::Sym('+') => {
                    self.bump();
                    acc = &acc + &self.term()?;
                }
                Tok::Sym('-') => {
                    self.bump();
                    acc = &acc - &self.term()?;
                }
                _ => return Ok(acc),
            }
        }
    }

    fn term(&mut self) -> Result<CPolynomial<R>> {
        let mut acc = self.unary()?;
        loop {
            match self.peek() {
                Tok::Sym('*') => {
                    self.bump();
                    acc = &acc * &self.unary()?;
                }
                Tok::Sym('/') => {
                    self.bump();
                    let pos = self.pos();
                    let d = self.unary()?;
                    let inv = constant_value(&d)
                        .and_then(|c| c.inv())
                        .ok_or_else(|| Error::Syntax { pos, msg: "division by a non-constant or zero".into() })?;
                    acc = acc.scale(&inv);
                }
                _ => return Ok(acc),
            }
        }
    }

    fn unary(&mut self) -> Result<CPolynomial<R>> {
        match self.peek() {
            Tok::Sym('-') => {
                self.bump();
                Ok(-&self.unary()?)
            }
            Tok::Sym('+') => {
                self.bump();
                self.unary()
            }
            _ => self.power(),
        }
    }

    fn power(&mut self) -> Result<CPolynomial<R>> {
        let base = self.primary()?;
        if *self.peek() == Tok::Sym('^') {
            self.bump();
            let pos = self.pos();
            match self.bump() {
                Tok::Int(s) => {
                    let k: u32 = s
                        .parse()
                        .map_err(|_| Error::Syntax { pos, msg: "exponent too large".into() })?;
                    Ok(base.pow(k))
                }
                _ => Err(Error::Syntax { pos, msg: "expected a non-negative integer exponent".into() }),
            }
        } else {
            Ok(base)
        }
    }

    fn primary(&mut self) -> Result<CPolynomial<R>> {
        let pos = self.pos();
        match self.bump() {
            Tok::Int(s) => {
                let v = R::parse_decimal(&s)
                    .ok_or_else(|| Error::Syntax { pos, msg: "bad integer literal".into() })?;
                Ok(CPolynomial::constant(self.n(), Gaussian::real(v)))
            }
            Tok::Sym('(') => {
                let e = self.expr()?;
                self.expect(')')?;
                Ok(e)
            }
            Tok::Ident(name) => self.identifier(pos, name),
            Tok::End => Err(Error::Syntax { pos, msg: "unexpected end of input".into() }),
            Tok::Sym(c) => Err(Error::Syntax { pos, msg: format!("unexpected `{}`", c) }),
        }
    }

    fn call_arg(&mut self) -> Result<CPolynomial<R>> {
        self.expect('(')?;
        let e = self.expr()?;
        self.expect(')')?;
        Ok(e)
    }

    fn identifier(&mut self, pos: usize, name: String) -> Result<CPolynomial<R>> {
        let n = self.n();
        match name.as_str() {
            "i" => Ok(CPolynomial::constant(n, Gaussian::i())),
            "conj" => Ok(self.call_arg()?.conjugate()),
            "abs2" => {
                let e = self.call_arg()?;
                Ok(&e * &e.conjugate())
            }
            "Re" => {
                let e = self.call_arg()?;
                Ok((&e + &e.conjugate()).scale(&Gaussian::from_frac(1, 2)))
            }
            "Im" => {
                let e = self.call_arg()?;
                // (e - conj e) / (2i) = -i/2 (e - conj e)
                Ok((&e - &e.conjugate()).scale(&Gaussian::new(R::zero(), R::from_frac(-1, 2))))
            }
            _ => {
                if let Some(j) = self.vars.index_of(&name) {
                    Ok(CPolynomial::var(n, j))
                } else if let Some(p) = self.defs.get(&name) {
                    Ok(p.clone())
                } else {
                    Err(Error::UnknownIdentifier { pos, name })
                }
            }
        }
    }
}

fn constant_value<R: Real>(p: &CPolynomial<R>) -> Option<Gaussian<R>> {
    if p.terms().all(|(e, _)| e.degree() == 0) {
        Some(p.constant_term())
    } else {
        None
    }
}

/// Parses an expression in the given variables.
pub fn parse_expression<R: Real>(text: &str, vars: &VarNames) -> Result<CPolynomial<R>> {
    parse_with_definitions(text, vars, &HashMap::new())
}

pub fn parse_with_definitions<R: Real>(
    text: &str,
    vars: &VarNames,
    defs: &HashMap<String, CPolynomial<R>>,
) -> Result<CPolynomial<R>> {
    let mut p = Parser { toks: tokenize(text)?, at: 0, vars, defs };
    let e = p.expr()?;
    if *p.peek() != Tok::End {
        return Err(Error::Syntax { pos: p.pos(), msg: "trailing input".into() });
    }
    Ok(e)
}

/// Parses a parenthesized tuple of expressions, e.g. a curve `(t^3, t^2, 0)`.
pub fn parse_tuple<R: Real>(text: &str, vars: &VarNames) -> Result<Vec<CPolynomial<R>>> {
    let defs = HashMap::new();
    let mut p = Parser { toks: tokenize(text)?, at: 0, vars, defs: &defs };
    p.expect('(')?;
    let mut items = vec![p.expr()?];
    while *p.peek() == Tok::Sym(',') {
        p.bump();
        items.push(p.expr()?);
    }
    p.expect(')')?;
    if *p.peek() != Tok::End {
        return Err(Error::Syntax { pos: p.pos(), msg: "trailing input".into() });
    }
    Ok(items)
}

fn monomial_string(holo: &[u32], anti: &[u32], names: &VarNames) -> String {
    let mut factors = Vec::new();
    for (j, name) in names.0.iter().enumerate() {
        match holo[j] {
            0 => {}
            1 => factors.push(name.clone()),
            a => factors.push(format!("{}^{}", name, a)),
        }
        match anti[j] {
            0 => {}
            1 => factors.push(format!("conj({})", name)),
            b => factors.push(format!("conj({})^{}", name, b)),
        }
    }
    factors.join("*")
}

/// Canonical text of a polynomial, terms in graded-lex order. Truncation is
/// not part of the text (see [`print_jet`]).
pub fn print_polynomial<R: Real>(p: &CPolynomial<R>, names: &VarNames) -> String {
    let mut out = String::new();
    for (k, (e, c)) in p.terms().enumerate() {
        let mono = monomial_string(&e.holo, &e.anti, names);
        let negative = c.im.is_zero() && c.re < R::zero();
        let mag = if negative { -c } else { c.clone() };
        if k == 0 {
            if negative {
                out.push('-');
            }
        } else {
            out.push_str(if negative { " - " } else { " + " });
        }
        if mono.is_empty() {
            out.push_str(&mag.to_string());
        } else if mag.is_one() {
            out.push_str(&mono);
        } else {
            out.push_str(&format!("{}*{}", mag, mono));
        }
    }
    if out.is_empty() {
        out.push('0');
    }
    out
}

/// Like [`print_polynomial`] with an `O(N+1)` marker for jets.
pub fn print_jet<R: Real>(p: &CPolynomial<R>, names: &VarNames) -> String {
    let body = print_polynomial(p, names);
    match p.truncation() {
        Truncation::Exact => body,
        Truncation::Jet(n) if p.is_zero() => format!("O({})", n + 1),
        Truncation::Jet(n) => format!("{} + O({})", body, n + 1),
    }
}

pub fn print_tuple<R: Real>(items: &[CPolynomial<R>], names: &VarNames) -> String {
    let parts: Vec<String> = items.iter().map(|p| print_polynomial(p, names)).collect();
    format!("({})", parts.join(", "))
}

/// Entry of a problem file: a defining function `r = ...` or a graph-frame
/// function `g = ...` (meaning `r = 2Re(z_{n+1}) + g`).
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Entry<R> {
    Defining(CPolynomial<R>),
    Graph(CPolynomial<R>),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProblemFile<R> {
    pub nvars: usize,
    pub definitions: Vec<(String, CPolynomial<R>)>,
    pub entry: Entry<R>,
}

impl<R: Real> ProblemFile<R> {
    /// Parses `n = <int>`, optional named definitions `name = <expr>`, and
    /// exactly one of `r = <expr>` or `g = <expr>`. `#` starts a comment.
    pub fn parse(text: &str) -> Result<Self> {
        let mut nvars: Option<usize> = None;
        let mut defs: HashMap<String, CPolynomial<R>> = HashMap::new();
        let mut order = Vec::new();
        let mut entry = None;
        for (k, raw) in text.lines().enumerate() {
            let line = k + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let (lhs, rhs) = content
                .split_once('=')
                .ok_or_else(|| Error::Input { line, msg: "expected `name = value`".into() })?;
            let (lhs, rhs) = (lhs.trim(), rhs.trim());
            let wrap = |e: Error| Error::Input { line, msg: e.to_string() };
            if lhs == "n" {
                let n: usize = rhs
                    .parse()
                    .map_err(|_| Error::Input { line, msg: "n must be a positive integer".into() })?;
                if n == 0 {
                    return Err(Error::Input { line, msg: "n must be positive".into() });
                }
                nvars = Some(n);
                continue;
            }
            let n = nvars.ok_or_else(|| Error::Input { line, msg: "`n = ...` must come first".into() })?;
            if !lhs.chars().all(|c| c.is_alphanumeric() || c == '_') || lhs.is_empty() {
                return Err(Error::Input { line, msg: format!("bad name `{}`", lhs) });
            }
            let value = parse_with_definitions(rhs, &VarNames::z(n), &defs).map_err(wrap)?;
            match lhs {
                "r" | "g" => {
                    if entry.is_some() {
                        return Err(Error::Input { line, msg: "only one of `r` or `g` may be given".into() });
                    }
                    entry = Some(if lhs == "r" { Entry::Defining(value) } else { Entry::Graph(value) });
                }
                name => {
                    if VarNames::z(n).index_of(name).is_some() || ["i", "t", "conj", "Re", "Im", "abs2"].contains(&name) {
                        return Err(Error::Input { line, msg: format!("`{}` is reserved", name) });
                    }
                    order.push((name.to_string(), value.clone()));
                    defs.insert(name.to_string(), value);
                }
            }
        }
        let nvars = nvars.ok_or(Error::Input { line: 0, msg: "missing `n = ...`".into() })?;
        let entry = entry.ok_or(Error::Input { line: 0, msg: "missing `r = ...` or `g = ...`".into() })?;
        Ok(Self { nvars, definitions: order, entry })
    }

    pub fn entry_polynomial(&self) -> &CPolynomial<R> {
        match &self.entry {
            Entry::Defining(p) | Entry::Graph(p) => p,
        }
    }

    /// Canonical text form; parses back to an equal problem.
    pub fn print(&self) -> String {
        let names = VarNames::z(self.nvars);
        let mut out = format!("n = {}\n", self.nvars);
        for (name, p) in &self.definitions {
            out.push_str(&format!("{} = {}\n", name, print_polynomial(p, &names)));
        }
        let (key, p) = match &self.entry {
            Entry::Defining(p) => ("r", p),
            Entry::Graph(p) => ("g", p),
        };
        out.push_str(&format!("{} = {}\n", key, print_polynomial(p, &names)));
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::{GaussianRational, Polynomial};

    fn parse(text: &str, n: usize) -> Polynomial {
        parse_expression(text, &VarNames::z(n)).unwrap()
    }

    #[test]
    fn cusp_problem_parses() {
        let r = parse("2*Re(z3) + abs2(z1^2 - z2^3)", 3);
        let z = |i| Polynomial::var(3, i);
        let f = &z(0).pow(2) - &z(1).pow(3);
        let expected = &(&z(2) + &z(2).conjugate()) + &(&f * &f.conjugate());
        assert_eq!(r, expected);
    }

    #[test]
    fn example_family_parses() {
        let g = parse("abs2(z1 + z2^3)", 2);
        assert_eq!(g.len(), 4);
        assert!(g.is_real_valued());
    }

    #[test]
    fn imaginary_combination_is_not_real() {
        let p = parse("i*z1 - conj(i*z1)", 1);
        let expected = parse("2*i*Re(z1)", 1);
        assert_eq!(p, expected);
        assert!(!p.is_real_valued());
    }

    #[test]
    fn precedence() {
        assert_eq!(parse("-z1^2", 1), -&Polynomial::var(1, 0).pow(2));
        assert_eq!(parse("1 + 2*3^2", 1), Polynomial::constant(1, GaussianRational::from_int(19)));
        assert_eq!(parse("3/2*z1", 1), Polynomial::var(1, 0).scale(&GaussianRational::from_frac(3, 2)));
        assert_eq!(parse("2 - 3 - 4", 1), Polynomial::constant(1, GaussianRational::from_int(-5)));
    }

    #[test]
    fn errors_carry_positions() {
        let e = parse_expression::<num_rational::BigRational>("z1 + * z2", &VarNames::z(2)).unwrap_err();
        assert_eq!(e, Error::Syntax { pos: 5, msg: "unexpected `*`".into() });
        let e = parse_expression::<num_rational::BigRational>("z1 + w", &VarNames::z(2)).unwrap_err();
        assert_eq!(e, Error::UnknownIdentifier { pos: 5, name: "w".into() });
        assert!(parse_expression::<num_rational::BigRational>("z3", &VarNames::z(2)).is_err());
        assert!(parse_expression::<num_rational::BigRational>("z1/z2", &VarNames::z(2)).is_err());
    }

    #[test]
    fn print_then_parse_is_identity() {
        for text in [
            "2*Re(z3) + abs2(z1^2 - z2^3)",
            "abs2(z1 + 1/2*i*z2^2) - 3/7*z1*conj(z2)",
            "(2 - 3*i)*z1^2*conj(z3) + (2 + 3*i)*conj(z1)^2*z3",
            "0",
            "-i",
        ] {
            let p = parse(text, 3);
            let printed = print_polynomial(&p, &VarNames::z(3));
            assert_eq!(parse(&printed, 3), p, "{}", printed);
        }
    }

    #[test]
    fn curve_tuples() {
        let c: Vec<Polynomial> = parse_tuple("(t^3, t^2, 0)", &VarNames::t()).unwrap();
        assert_eq!(c.len(), 3);
        assert_eq!(print_tuple(&c, &VarNames::t()), "(t^3, t^2, 0)");
        let c: Vec<Polynomial> = parse_tuple("(-t^2, t)", &VarNames::t()).unwrap();
        assert_eq!(print_tuple(&c, &VarNames::t()), "(-t^2, t)");
    }

    #[test]
    fn problem_file_round_trip() {
        let text = "# cusp\nn = 3\nf = z1^2 - z2^3\nr = 2*Re(z3) + abs2(f)\n";
        let pf: ProblemFile<num_rational::BigRational> = ProblemFile::parse(text).unwrap();
        assert_eq!(pf.nvars, 3);
        assert_eq!(pf.definitions.len(), 1);
        let again = ProblemFile::parse(&pf.print()).unwrap();
        assert_eq!(pf, again);
        let err = ProblemFile::<num_rational::BigRational>::parse("n = 2\nr = z1 +\n").unwrap_err();
        assert!(matches!(err, Error::Input { line: 2, .. }));
    }
}
