//! Recursive-descent parser for ODE right-hand sides and transformation
//! components.
//!
//! Grammar: `+ - * /` with standard precedence, `^` right-associative and
//! binding tighter than unary minus, parentheses, function calls, integer
//! and ratio literals. Reserved variables are `x, u, p, q` with aliases
//! `u' -> p` and `u'' -> q`; any other identifier must be a declared
//! parameter. Input may also be a full equation `u''' = <rhs>`.
//!
//! Exponents are integers or parenthesized ratios with denominator 2, 3,
//! or 6, realized through square/cube-root composition.

use crate::expr::{Builtin, Expr};
use crate::sym::Sym;
use num_bigint::BigInt;
use std::collections::BTreeSet;
use std::fmt;

/// Parse failure with source position (1-based).
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub struct SyntaxError {
    pub line: usize,
    pub col: usize,
    pub message: String,
}

impl fmt::Display for SyntaxError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}, column {}: {}", self.line, self.col, self.message)
    }
}

/// Names that a parameter may not shadow.
const RESERVED: [&str; 14] = [
    "x", "u", "p", "q", "xbar", "ubar", "pbar", "qbar", "cbrt", "sqrt", "exp", "ln", "sin", "cos",
];

/// Split and validate a comma-separated parameter declaration.
pub fn declare_params(csv: &str) -> Result<Vec<Sym>, SyntaxError> {
    let mut out = Vec::new();
    if csv.trim().is_empty() {
        return Ok(out);
    }
    for (i, raw) in csv.split(',').enumerate() {
        let name = raw.trim();
        let col = i + 1; // position reported per item, not per byte
        let valid = !name.is_empty()
            && name.chars().next().unwrap().is_ascii_alphabetic()
            && name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_');
        if !valid {
            return Err(SyntaxError {
                line: 1,
                col,
                message: format!("invalid parameter name `{name}`"),
            });
        }
        if RESERVED.contains(&name) {
            return Err(SyntaxError {
                line: 1,
                col,
                message: format!("parameter `{name}` shadows a reserved name"),
            });
        }
        let sym = Sym::new(name);
        if out.contains(&sym) {
            return Err(SyntaxError {
                line: 1,
                col,
                message: format!("parameter `{name}` declared twice"),
            });
        }
        out.push(sym);
    }
    Ok(out)
}

/// Parse a bare expression (no equation form).
pub fn parse_expr(input: &str, params: &[Sym]) -> Result<Expr, SyntaxError> {
    let tokens = lex(input)?;
    let mut p = Parser {
        tokens,
        pos: 0,
        params: params.iter().cloned().collect(),
    };
    let e = p.expr()?;
    p.expect_end()?;
    Ok(e)
}

/// Parse an ODE right-hand side: either the bare RHS or `u''' = <rhs>`
/// with a literal `u'''` on the left.
pub fn parse_ode(input: &str, params: &[Sym]) -> Result<Expr, SyntaxError> {
    let tokens = lex(input)?;
    let has_eq = tokens.iter().any(|t| matches!(t.kind, Tok::Eq));
    let mut p = Parser {
        tokens,
        pos: 0,
        params: params.iter().cloned().collect(),
    };
    if has_eq {
        let lhs = p.advance();
        let lhs_ok = matches!(&lhs.kind, Tok::Ident(name, primes) if name == "u" && *primes == 3);
        if !lhs_ok {
            return Err(err_at(&lhs, "equation form requires a literal u''' left-hand side"));
        }
        let eq = p.advance();
        if !matches!(eq.kind, Tok::Eq) {
            return Err(err_at(&eq, "expected `=` after u'''"));
        }
    }
    let e = p.expr()?;
    p.expect_end()?;
    Ok(e)
}

// ---- lexer ---------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Num(BigInt),
    /// Identifier plus the number of trailing derivative marks.
    Ident(String, u8),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    Eq,
    End,
}

#[derive(Debug, Clone)]
struct Token {
    kind: Tok,
    line: usize,
    col: usize,
}

fn err_at(t: &Token, msg: impl Into<String>) -> SyntaxError {
    SyntaxError {
        line: t.line,
        col: t.col,
        message: msg.into(),
    }
}

fn lex(input: &str) -> Result<Vec<Token>, SyntaxError> {
    let mut out = Vec::new();
    let mut line = 1usize;
    let mut col = 1usize;
    let mut chars = input.chars().peekable();
    while let Some(&c) = chars.peek() {
        let (tline, tcol) = (line, col);
        let mut bump = |chars: &mut std::iter::Peekable<std::str::Chars>| {
            let c = chars.next().unwrap();
            if c == '\n' {
                line += 1;
                col = 1;
            } else {
                col += 1;
            }
            c
        };
        if c.is_whitespace() {
            bump(&mut chars);
            continue;
        }
        let kind = match c {
            '+' => {
                bump(&mut chars);
                Tok::Plus
            }
            '-' | '−' => {
                bump(&mut chars);
                Tok::Minus
            }
            '*' | '·' => {
                bump(&mut chars);
                Tok::Star
            }
            '/' => {
                bump(&mut chars);
                Tok::Slash
            }
            '^' => {
                bump(&mut chars);
                Tok::Caret
            }
            '(' => {
                bump(&mut chars);
                Tok::LParen
            }
            ')' => {
                bump(&mut chars);
                Tok::RParen
            }
            '=' => {
                bump(&mut chars);
                Tok::Eq
            }
            '0'..='9' => {
                let mut digits = String::new();
                while let Some(&d) = chars.peek() {
                    if d.is_ascii_digit() {
                        digits.push(bump(&mut chars));
                    } else {
                        break;
                    }
                }
                if matches!(chars.peek(), Some('.')) {
                    return Err(SyntaxError {
                        line: tline,
                        col: tcol,
                        message: "decimal literals are not supported; use a ratio like 3/2".into(),
                    });
                }
                Tok::Num(digits.parse().expect("digit run parses"))
            }
            a if a.is_ascii_alphabetic() || a == '_' => {
                let mut name = String::new();
                while let Some(&d) = chars.peek() {
                    if d.is_ascii_alphanumeric() || d == '_' {
                        name.push(bump(&mut chars));
                    } else {
                        break;
                    }
                }
                let mut primes = 0u8;
                while matches!(chars.peek(), Some('\'' | '′')) {
                    bump(&mut chars);
                    primes += 1;
                }
                if primes > 0 && name != "u" {
                    return Err(SyntaxError {
                        line: tline,
                        col: tcol,
                        message: format!("derivative marks apply only to u, not `{name}`"),
                    });
                }
                if primes > 3 {
                    return Err(SyntaxError {
                        line: tline,
                        col: tcol,
                        message: "at most three derivative marks are meaningful".into(),
                    });
                }
                Tok::Ident(name, primes)
            }
            other => {
                return Err(SyntaxError {
                    line: tline,
                    col: tcol,
                    message: format!("unexpected character `{other}`"),
                });
            }
        };
        out.push(Token {
            kind,
            line: tline,
            col: tcol,
        });
    }
    out.push(Token {
        kind: Tok::End,
        line,
        col,
    });
    Ok(out)
}

// ---- parser --------------------------------------------------------------

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
    params: BTreeSet<Sym>,
}

impl Parser {
    fn peek(&self) -> &Token {
        &self.tokens[self.pos]
    }

    fn advance(&mut self) -> Token {
        let t = self.tokens[self.pos].clone();
        if self.pos + 1 < self.tokens.len() {
            self.pos += 1;
        }
        t
    }

    fn expect_end(&mut self) -> Result<(), SyntaxError> {
        let t = self.peek();
        if matches!(t.kind, Tok::End) {
            Ok(())
        } else {
            Err(err_at(t, "unexpected trailing input"))
        }
    }

    /// expr := term (('+' | '-') term)*
    fn expr(&mut self) -> Result<Expr, SyntaxError> {
        let mut acc = self.term()?;
        loop {
            match self.peek().kind {
                Tok::Plus => {
                    self.advance();
                    acc = Expr::add(acc, self.term()?);
                }
                Tok::Minus => {
                    self.advance();
                    acc = Expr::sub(acc, self.term()?);
                }
                _ => return Ok(acc),
            }
        }
    }

    /// term := unary (('*' | '/') unary)*
    fn term(&mut self) -> Result<Expr, SyntaxError> {
        let mut acc = self.unary()?;
        loop {
            match self.peek().kind {
                Tok::Star => {
                    self.advance();
                    acc = Expr::mul(acc, self.unary()?);
                }
                Tok::Slash => {
                    let op = self.advance();
                    let rhs = self.unary()?;
                    if rhs.is_zero_const() {
                        return Err(err_at(&op, "division by zero"));
                    }
                    acc = Expr::div(acc, rhs);
                }
                _ => return Ok(acc),
            }
        }
    }

    /// unary := '-' unary | postfix  (so -x^2 parses as -(x^2))
    fn unary(&mut self) -> Result<Expr, SyntaxError> {
        if matches!(self.peek().kind, Tok::Minus) {
            self.advance();
            return Ok(Expr::neg(self.unary()?));
        }
        self.postfix()
    }

    /// postfix := primary ('^' exponent)?   with right-associative chains
    /// resolved inside the exponent.
    fn postfix(&mut self) -> Result<Expr, SyntaxError> {
        let base = self.primary()?;
        if !matches!(self.peek().kind, Tok::Caret) {
            return Ok(base);
        }
        self.advance();
        let (n, d, at) = self.exponent()?;
        apply_rational_power(base, n, d).map_err(|msg| SyntaxError {
            line: at.line,
            col: at.col,
            message: msg,
        })
    }

    /// exponent := atom ('^' exponent)?  where atom is an optionally signed
    /// integer or a parenthesized ratio. Chains fold right-associatively:
    /// q^2^3 = q^8.
    fn exponent(&mut self) -> Result<(i64, i64, Token), SyntaxError> {
        let at = self.peek().clone();
        let (mut n, mut d) = self.exponent_atom()?;
        if matches!(self.peek().kind, Tok::Caret) {
            self.advance();
            let (en, ed, tail_at) = self.exponent()?;
            if ed != 1 || en < 0 {
                return Err(err_at(
                    &tail_at,
                    "stacked exponents must be non-negative integers",
                ));
            }
            let (mut an, mut ad) = (1i64, 1i64);
            for _ in 0..en {
                an = an.checked_mul(n).ok_or_else(|| err_at(&at, "exponent overflow"))?;
                ad = ad.checked_mul(d).ok_or_else(|| err_at(&at, "exponent overflow"))?;
            }
            n = an;
            d = ad;
        }
        Ok((n, d, at))
    }

    fn exponent_atom(&mut self) -> Result<(i64, i64), SyntaxError> {
        let mut sign = 1i64;
        while matches!(self.peek().kind, Tok::Minus) {
            self.advance();
            sign = -sign;
        }
        let t = self.advance();
        match &t.kind {
            Tok::Num(v) => {
                let n: i64 = v
                    .try_into()
                    .map_err(|_| err_at(&t, "exponent too large"))?;
                Ok((sign * n, 1))
            }
            Tok::LParen => {
                let mut inner_sign = sign;
                while matches!(self.peek().kind, Tok::Minus) {
                    self.advance();
                    inner_sign = -inner_sign;
                }
                let nt = self.advance();
                let Tok::Num(nv) = &nt.kind else {
                    return Err(err_at(&nt, "expected an integer in the exponent"));
                };
                let n: i64 = nv
                    .try_into()
                    .map_err(|_| err_at(&nt, "exponent too large"))?;
                let mut d = 1i64;
                if matches!(self.peek().kind, Tok::Slash) {
                    self.advance();
                    let dt = self.advance();
                    let Tok::Num(dv) = &dt.kind else {
                        return Err(err_at(&dt, "expected an integer denominator"));
                    };
                    d = dv
                        .try_into()
                        .map_err(|_| err_at(&dt, "exponent too large"))?;
                    if d == 0 {
                        return Err(err_at(&dt, "zero denominator in exponent"));
                    }
                }
                let rt = self.advance();
                if !matches!(rt.kind, Tok::RParen) {
                    return Err(err_at(&rt, "expected `)` closing the exponent"));
                }
                Ok((inner_sign * n, d))
            }
            _ => Err(err_at(
                &t,
                "expected an integer exponent or a parenthesized ratio",
            )),
        }
    }

    /// primary := number | ident | ident '(' expr ')' | '(' expr ')'
    fn primary(&mut self) -> Result<Expr, SyntaxError> {
        let t = self.advance();
        match &t.kind {
            Tok::Num(v) => Ok(Expr::Rational(num_rational::BigRational::from_integer(
                v.clone(),
            ))),
            Tok::LParen => {
                let e = self.expr()?;
                let close = self.advance();
                if !matches!(close.kind, Tok::RParen) {
                    return Err(err_at(&close, "expected `)`"));
                }
                Ok(e)
            }
            Tok::Ident(name, primes) => self.resolve_ident(&t, name, *primes),
            _ => Err(err_at(&t, "expected a value")),
        }
    }

    fn resolve_ident(&mut self, t: &Token, name: &str, primes: u8) -> Result<Expr, SyntaxError> {
        if primes > 0 {
            return match primes {
                1 => Ok(Expr::sym(crate::sym::P)),
                2 => Ok(Expr::sym(crate::sym::Q)),
                _ => Err(err_at(t, "u''' may only appear left of `=`")),
            };
        }
        // Function call?
        if matches!(self.peek().kind, Tok::LParen) {
            let func = match name {
                "cbrt" => Some(None),
                other => Builtin::from_name(other).map(Some),
            };
            let Some(builtin) = func else {
                return Err(err_at(t, format!("unknown function `{name}`")));
            };
            self.advance(); // (
            let arg = self.expr()?;
            let close = self.advance();
            if !matches!(close.kind, Tok::RParen) {
                return Err(err_at(&close, "expected `)` closing the call"));
            }
            return Ok(match builtin {
                None => Expr::cbrt(arg),
                Some(f) => Expr::func(f, arg),
            });
        }
        match name {
            "x" | "u" | "p" | "q" => Ok(Expr::sym(name)),
            _ => {
                let sym = Sym::new(name);
                if self.params.contains(&sym) {
                    Ok(Expr::Symbol(sym))
                } else {
                    Err(err_at(
                        t,
                        format!("unknown identifier `{name}`; declare parameters explicitly"),
                    ))
                }
            }
        }
    }
}

/// base^(n/d) via integer powers and root composition; d must divide 6.
fn apply_rational_power(base: Expr, n: i64, d: i64) -> Result<Expr, String> {
    let g = gcd64(n.unsigned_abs(), d.unsigned_abs());
    let (n, d) = ((n / g as i64), (d / g as i64));
    match d {
        1 => Ok(Expr::pow(base, n)),
        2 => Ok(Expr::sqrt(Expr::pow(base, n))),
        3 => Ok(Expr::cbrt(Expr::pow(base, n))),
        6 => Ok(Expr::cbrt(Expr::sqrt(Expr::pow(base, n)))),
        _ => Err(format!(
            "exponent denominator {d} unsupported (allowed: 1, 2, 3, 6)"
        )),
    }
}

fn gcd64(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a.max(1)
}
