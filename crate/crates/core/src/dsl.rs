//! Text syntax for expressions and generators.
//!
//! ```text
//! generator := "0" | gterm (("+" | "-") gterm)*
//! gterm     := ["-" | "+"] [product "*"] "d/d" NAME
//! expr      := ["-" | "+"] product (("+" | "-") product)*
//! product   := power (("*" power) | ("/" INT))*
//! power     := primary ["^" ["-"] INT]
//! primary   := INT | NAME | "exp(" (NAME | ["-"] INT ["/" INT]) ")" | "(" expr ")"
//! ```
//!
//! `#` starts a comment running to the end of the line. Names resolve
//! through the registry; other names must be declared as unknown constants.

use std::collections::BTreeSet;

use num_bigint::BigInt;

use crate::error::{Error, Result};
use crate::jetspace::JetRegistry;
use crate::liegen::{prolong, GeneratorSpec};
use crate::symcore::{normalize, Atom, Expr, RawExpr, Rational};

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Int(BigInt),
    Name(String),
    Exp(String),
    Target(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    End,
}

#[derive(Clone, Debug)]
struct Token {
    tok: Tok,
    line: usize,
    column: usize,
}

fn is_name_start(c: char) -> bool {
    c.is_ascii_alphabetic()
}

fn is_name_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_'
}

fn lex(src: &str) -> Result<Vec<Token>> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0, 1, 1);
    let syntax = |line, column, message: String| Error::Syntax { line, column, message };
    while i < chars.len() {
        let c = chars[i];
        let (l0, c0) = (line, col);
        let mut push = |tok, n: usize, i: &mut usize, col: &mut usize| {
            out.push(Token { tok, line: l0, column: c0 });
            *i += n;
            *col += n;
        };
        match c {
            '\n' => {
                i += 1;
                line += 1;
                col = 1;
            }
            c if c.is_whitespace() => {
                i += 1;
                col += 1;
            }
            '#' => {
                while i < chars.len() && chars[i] != '\n' {
                    i += 1;
                }
            }
            '+' => push(Tok::Plus, 1, &mut i, &mut col),
            '-' => push(Tok::Minus, 1, &mut i, &mut col),
            '*' => push(Tok::Star, 1, &mut i, &mut col),
            '/' => push(Tok::Slash, 1, &mut i, &mut col),
            '^' => push(Tok::Caret, 1, &mut i, &mut col),
            '(' => push(Tok::LParen, 1, &mut i, &mut col),
            ')' => push(Tok::RParen, 1, &mut i, &mut col),
            c if c.is_ascii_digit() => {
                let start = i;
                while i < chars.len() && chars[i].is_ascii_digit() {
                    i += 1;
                }
                let s: String = chars[start..i].iter().collect();
                col += i - start;
                out.push(Token { tok: Tok::Int(s.parse().expect("digits")), line: l0, column: c0 });
            }
            c if is_name_start(c) => {
                let rest: String = chars[i..].iter().take(4).collect();
                if rest.starts_with("d/d") && chars.get(i + 3).is_some_and(|&c| is_name_start(c)) {
                    let start = i + 3;
                    let mut j = start;
                    while j < chars.len() && is_name_char(chars[j]) {
                        j += 1;
                    }
                    let name: String = chars[start..j].iter().collect();
                    col += j - i;
                    i = j;
                    out.push(Token { tok: Tok::Target(name), line: l0, column: c0 });
                    continue;
                }
                let start = i;
                while i < chars.len() && is_name_char(chars[i]) {
                    i += 1;
                }
                let name: String = chars[start..i].iter().collect();
                col += i - start;
                if name == "exp" && chars.get(i) == Some(&'(') {
                    let close = chars[i..]
                        .iter()
                        .position(|&c| c == ')')
                        .ok_or_else(|| syntax(l0, c0, "unclosed exp(".into()))?;
                    let arg: String = chars[i + 1..i + close].iter().filter(|c| !c.is_whitespace()).collect();
                    let valid = {
                        let body = arg.strip_prefix('-').unwrap_or(&arg);
                        let is_rat = body.split_once('/').map_or_else(
                            || !body.is_empty() && body.chars().all(|c| c.is_ascii_digit()),
                            |(a, b)| {
                                !a.is_empty()
                                    && !b.is_empty()
                                    && a.chars().all(|c| c.is_ascii_digit())
                                    && b.chars().all(|c| c.is_ascii_digit())
                            },
                        );
                        let is_name = !arg.starts_with('-')
                            && body.chars().next().is_some_and(is_name_start)
                            && body.chars().all(is_name_char);
                        is_rat || is_name
                    };
                    if !valid {
                        return Err(syntax(l0, c0, format!("invalid exp argument `{arg}`")));
                    }
                    col += close + 1;
                    i += close + 1;
                    out.push(Token { tok: Tok::Exp(arg), line: l0, column: c0 });
                } else {
                    out.push(Token { tok: Tok::Name(name), line: l0, column: c0 });
                }
            }
            other => return Err(syntax(l0, c0, format!("unexpected character `{other}`"))),
        }
    }
    out.push(Token { tok: Tok::End, line, column: col });
    Ok(out)
}

struct Parser<'a> {
    toks: Vec<Token>,
    pos: usize,
    r: &'a JetRegistry,
    unknowns: &'a BTreeSet<String>,
}

impl Parser<'_> {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn peek_at(&self, k: usize) -> &Tok {
        &self.toks[(self.pos + k).min(self.toks.len() - 1)].tok
    }

    fn next(&mut self) -> Token {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn error(&self, message: impl Into<String>) -> Error {
        let t = &self.toks[self.pos];
        Error::Syntax { line: t.line, column: t.column, message: message.into() }
    }

    fn expect_int(&mut self) -> Result<BigInt> {
        match self.peek().clone() {
            Tok::Int(n) => {
                self.next();
                Ok(n)
            }
            _ => Err(self.error("expected an integer")),
        }
    }

    fn expr(&mut self) -> Result<RawExpr> {
        let mut terms = Vec::new();
        let mut neg = match self.peek() {
            Tok::Minus => {
                self.next();
                true
            }
            Tok::Plus => {
                self.next();
                false
            }
            _ => false,
        };
        loop {
            let p = self.product()?;
            terms.push(if neg { RawExpr::Neg(Box::new(p)) } else { p });
            match self.peek() {
                Tok::Plus => neg = false,
                Tok::Minus => neg = true,
                _ => break,
            }
            self.next();
        }
        Ok(RawExpr::Add(terms))
    }

    /// Factors joined by `*` or `/ INT`; stops before `* d/dX`.
    fn product(&mut self) -> Result<RawExpr> {
        let mut factors = vec![self.power()?];
        loop {
            match self.peek() {
                Tok::Star if matches!(self.peek_at(1), Tok::Target(_)) => break,
                Tok::Star => {
                    self.next();
                    factors.push(self.power()?);
                }
                Tok::Slash => {
                    self.next();
                    let d = self.expect_int()?;
                    if d == BigInt::from(0) {
                        return Err(self.error("division by zero"));
                    }
                    factors.push(RawExpr::Num(Rational::new(1.into(), d)));
                }
                _ => break,
            }
        }
        Ok(RawExpr::Mul(factors))
    }

    fn power(&mut self) -> Result<RawExpr> {
        let base = self.primary()?;
        if *self.peek() != Tok::Caret {
            return Ok(base);
        }
        self.next();
        let neg = if *self.peek() == Tok::Minus {
            self.next();
            true
        } else {
            false
        };
        let k = self.expect_int()?;
        let k: i64 = i64::try_from(k).map_err(|_| self.error("exponent too large"))?;
        Ok(base.pow(if neg { -k } else { k }))
    }

    fn primary(&mut self) -> Result<RawExpr> {
        let t = self.next();
        match t.tok {
            Tok::Int(n) => Ok(RawExpr::Num(Rational::from_integer(n))),
            Tok::Exp(arg) => Ok(RawExpr::Atom(Atom::exp(&arg))),
            Tok::Name(name) => {
                if let Some(a) = self.r.lookup(&name) {
                    Ok(RawExpr::Atom(a))
                } else if self.unknowns.contains(&name) {
                    Ok(RawExpr::Atom(Atom::symbol(&name)))
                } else {
                    Err(Error::UnknownCoordinate { name, line: t.line, column: t.column })
                }
            }
            Tok::LParen => {
                let e = self.expr()?;
                if *self.peek() != Tok::RParen {
                    return Err(self.error("expected `)`"));
                }
                self.next();
                Ok(e)
            }
            _ => Err(Error::Syntax { line: t.line, column: t.column, message: "expected a term".into() }),
        }
    }

    fn target(&mut self) -> Result<Atom> {
        let t = self.next();
        match t.tok {
            Tok::Target(name) => self
                .r
                .lookup(&name)
                .ok_or(Error::UnknownCoordinate { name, line: t.line, column: t.column + 3 }),
            _ => Err(Error::Syntax { line: t.line, column: t.column, message: "expected `d/d<name>`".into() }),
        }
    }

    fn generator(&mut self) -> Result<Vec<(Atom, RawExpr)>> {
        let mut terms = Vec::new();
        if matches!(self.peek(), Tok::Int(n) if *n == BigInt::from(0)) && *self.peek_at(1) == Tok::End {
            self.next();
            return Ok(terms);
        }
        let mut neg = match self.peek() {
            Tok::Minus => {
                self.next();
                true
            }
            Tok::Plus => {
                self.next();
                false
            }
            _ => false,
        };
        loop {
            let coeff = if matches!(self.peek(), Tok::Target(_)) {
                RawExpr::Num(Rational::from_integer(1.into()))
            } else {
                let c = self.product()?;
                if *self.peek() != Tok::Star {
                    return Err(self.error("expected `*d/d<name>`"));
                }
                self.next();
                c
            };
            let target = self.target()?;
            terms.push((target, if neg { RawExpr::Neg(Box::new(coeff)) } else { coeff }));
            match self.peek() {
                Tok::Plus => neg = false,
                Tok::Minus => neg = true,
                Tok::End => break,
                _ => return Err(self.error("expected `+`, `-` or end of input")),
            }
            self.next();
        }
        Ok(terms)
    }
}

/// Parses an expression over registry names and the given unknowns.
pub fn parse_expr(src: &str, r: &JetRegistry, unknowns: &BTreeSet<String>) -> Result<Expr> {
    let mut p = Parser { toks: lex(src)?, pos: 0, r, unknowns };
    let e = p.expr()?;
    if *p.peek() != Tok::End {
        return Err(p.error("unexpected input after expression"));
    }
    normalize(&e)
}

/// Parses a generator. Terms acting on derivative coordinates of `Pi` are
/// accepted only when they agree with the prolongation of the rest.
pub fn parse_generator(src: &str, r: &JetRegistry, unknowns: &BTreeSet<String>) -> Result<GeneratorSpec> {
    let mut p = Parser { toks: lex(src)?, pos: 0, r, unknowns };
    let raw = p.generator()?;
    let mut point = Vec::new();
    let mut derived: Vec<(Atom, Expr)> = Vec::new();
    for (target, c) in raw {
        let c = normalize(&c)?;
        if matches!(target, Atom::Deriv(..)) && r.element_of(&target).is_some() {
            derived.push((target, c));
        } else {
            point.push((target, c));
        }
    }
    let g = GeneratorSpec::new(r, point)?;
    if !derived.is_empty() {
        let pg = prolong(&g, r)?;
        let mut sums: std::collections::BTreeMap<Atom, Expr> = std::collections::BTreeMap::new();
        for (t, c) in derived {
            *sums.entry(t).or_default() += c;
        }
        for (t, c) in sums {
            if pg.coefficient(&t) != c {
                return Err(Error::InvalidTarget(format!(
                    "{}: coefficient {} differs from the prolongation {}",
                    r.name(&t),
                    c.to_text(r),
                    pg.coefficient(&t).to_text(r)
                )));
            }
        }
    }
    Ok(g)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn reg(n: usize) -> JetRegistry {
        JetRegistry::new(n).unwrap()
    }

    fn none() -> BTreeSet<String> {
        BTreeSet::new()
    }

    #[test]
    fn galilean_boost() {
        let r = reg(1);
        let g = parse_generator("t*d/dx1 + d/du1", &r, &none()).unwrap();
        assert_eq!(g.coefficient(&r.x(1)), Expr::atom(r.t()));
        assert_eq!(g.coefficient(&r.u(1)), Expr::one());
        assert_eq!(g.to_dsl(&r), "t*d/dx1 + d/du1");
    }

    #[test]
    fn unknown_coordinate_is_named() {
        let r = reg(1);
        let err = parse_generator("q*d/dp", &r, &none()).unwrap_err();
        assert_eq!(err, Error::UnknownCoordinate { name: "q".into(), line: 1, column: 1 });
        let err = parse_generator("d/dq", &r, &none()).unwrap_err();
        assert!(matches!(err, Error::UnknownCoordinate { ref name, .. } if name == "q"));
    }

    #[test]
    fn syntax_errors_carry_position() {
        let r = reg(1);
        let err = parse_generator("t*d/dx1 +\n  * d/du1", &r, &none()).unwrap_err();
        assert!(matches!(err, Error::Syntax { line: 2, column: 3, .. }), "{err:?}");
        assert!(matches!(parse_generator("t d/dx1", &r, &none()), Err(Error::Syntax { .. })));
        assert!(matches!(parse_expr("p^", &r, &none()), Err(Error::Syntax { .. })));
    }

    #[test]
    fn ansatz_violation_names_the_atom() {
        let r = reg(1);
        let err = parse_generator("Pi11*d/dt", &r, &none()).unwrap_err();
        assert_eq!(err, Error::Ansatz { target: "t".into(), atom: "Pi11".into() });
    }

    #[test]
    fn expressions() {
        let r = reg(1);
        let e = parse_expr("(p + rho)*(p - rho) # difference of squares", &r, &none()).unwrap();
        assert_eq!(e.to_text(&r), parse_expr("p^2 - rho^2", &r, &none()).unwrap().to_text(&r));
        let e = parse_expr("3/2*exp(a)^-1*G_prho", &r, &none()).unwrap();
        assert_eq!(parse_expr(&e.to_text(&r), &r, &none()).unwrap(), e);
        assert!(matches!(parse_expr("p^-1", &r, &none()), Err(Error::UnsupportedForm(_))));
        let unknowns: BTreeSet<String> = ["alpha".to_string()].into();
        assert!(parse_expr("alpha*p", &r, &unknowns).is_ok());
    }

    #[test]
    fn stress_derivative_terms_must_match_prolongation() {
        let r = reg(1);
        let src = "x1*d/dx1 + u1*d/du1 + 2*p*d/dp + 2*Pi11*d/dPi11 + 2*G*d/dG";
        let g = parse_generator(src, &r, &none()).unwrap();
        let with = format!("{src} + 2*Pi11_d_u1x1*d/dPi11_d_u1x1");
        assert_eq!(parse_generator(&with, &r, &none()).unwrap(), g);
        let wrong = format!("{src} + Pi11_d_u1x1*d/dPi11_d_u1x1");
        assert!(matches!(parse_generator(&wrong, &r, &none()), Err(Error::InvalidTarget(_))));
        assert!(matches!(parse_generator("d/du1_x1", &r, &none()), Err(Error::InvalidTarget(_))));
    }

    #[test]
    fn zero_generator() {
        let r = reg(2);
        assert!(parse_generator("0", &r, &none()).unwrap().is_zero());
        assert_eq!(GeneratorSpec::zero(2).to_dsl(&r), "0");
    }
}
