//! S-expression syntax for terms and matrix literals.
//!
//! ```text
//! (id n) (proj n lo len) (pair t ...) (comp f g) (zero n m) (add f g) (neg f)
//! (linear [[r ...] ...]) (const [r ...]) (one n) (mul) (sin) (cos) (exp)
//! ```
//!
//! `(comp f g)` is `f ∘ g`. Scalars are `p/q`, integers or exact decimals.
//! Commas inside brackets are optional separators. A linear map with no rows
//! carries its column count after the literal: `(linear [] 3)`.

use alloc::boxed::Box;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use crate::linmap::LinMap;
use crate::scalar::{parse_rational, Rational};
use crate::term::{typecheck, DomainTag, Expr, Term, TypeError};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("syntax error at {line}:{col}: {message}")]
pub struct SyntaxError {
    pub line: usize,
    pub col: usize,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ParseError {
    #[error(transparent)]
    Syntax(#[from] SyntaxError),
    #[error(transparent)]
    Type(#[from] TypeError),
}

/// Parses and type checks a term.
pub fn parse_term(text: &str, tag: DomainTag) -> Result<Term, ParseError> {
    let expr = parse_expr(text)?;
    Ok(typecheck(&expr, tag)?)
}

/// Parses raw syntax without type checking.
pub fn parse_expr(text: &str) -> Result<Expr, SyntaxError> {
    let mut p = Parser::new(text);
    let e = p.expr()?;
    p.skip_ws();
    if let Some(c) = p.peek() {
        return Err(p.error(format!("unexpected trailing `{c}`")));
    }
    Ok(e)
}

/// Parses a matrix literal `[[p/q, ...], ...]`. The column count must be
/// supplied for literals with no rows.
pub fn parse_matrix(text: &str, cols_if_empty: Option<usize>) -> Result<LinMap, SyntaxError> {
    let mut p = Parser::new(text);
    let rows = p.matrix()?;
    p.skip_ws();
    if p.peek().is_some() {
        return Err(p.error("unexpected input after matrix".to_string()));
    }
    p.build_matrix(rows, cols_if_empty)
}

/// Parses a vector literal `[p/q, ...]`.
pub fn parse_vector(text: &str) -> Result<Vec<Rational>, SyntaxError> {
    let mut p = Parser::new(text);
    let v = p.vector()?;
    p.skip_ws();
    if p.peek().is_some() {
        return Err(p.error("unexpected input after vector".to_string()));
    }
    Ok(v)
}

struct Parser<'a> {
    src: &'a str,
    pos: usize,
}

impl<'a> Parser<'a> {
    fn new(src: &'a str) -> Self {
        Parser { src, pos: 0 }
    }

    fn peek(&self) -> Option<char> {
        self.src[self.pos..].chars().next()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek()?;
        self.pos += c.len_utf8();
        Some(c)
    }

    fn error(&self, message: String) -> SyntaxError {
        let before = &self.src[..self.pos];
        let line = before.matches('\n').count() + 1;
        let col = before.rfind('\n').map_or(before.chars().count(), |i| before[i + 1..].chars().count()) + 1;
        SyntaxError { line, col, message }
    }

    fn skip_ws(&mut self) {
        while let Some(c) = self.peek() {
            if c.is_whitespace() {
                self.bump();
            } else if c == ';' {
                while let Some(c) = self.bump() {
                    if c == '\n' {
                        break;
                    }
                }
            } else {
                break;
            }
        }
    }

    fn skip_sep(&mut self) {
        loop {
            self.skip_ws();
            if self.peek() == Some(',') {
                self.bump();
            } else {
                break;
            }
        }
    }

    fn expect(&mut self, want: char) -> Result<(), SyntaxError> {
        self.skip_ws();
        match self.peek() {
            Some(c) if c == want => {
                self.bump();
                Ok(())
            }
            Some(c) => Err(self.error(format!("expected `{want}`, found `{c}`"))),
            None => Err(self.error(format!("expected `{want}`, found end of input"))),
        }
    }

    fn atom(&mut self) -> &'a str {
        self.skip_ws();
        let start = self.pos;
        while let Some(c) = self.peek() {
            if c.is_whitespace() || matches!(c, '(' | ')' | '[' | ']' | ',' | ';') {
                break;
            }
            self.bump();
        }
        &self.src[start..self.pos]
    }

    fn natural(&mut self) -> Result<usize, SyntaxError> {
        self.skip_ws();
        let at = self.pos;
        let a = self.atom();
        a.parse::<usize>().map_err(|_| {
            self.pos = at;
            self.error(format!("expected a natural number, found `{a}`"))
        })
    }

    fn scalar(&mut self) -> Result<Rational, SyntaxError> {
        self.skip_ws();
        let at = self.pos;
        let a = self.atom();
        parse_rational(a).map_err(|_| {
            self.pos = at;
            self.error(format!("invalid number `{a}`"))
        })
    }

    fn vector(&mut self) -> Result<Vec<Rational>, SyntaxError> {
        self.expect('[')?;
        let mut out = Vec::new();
        loop {
            self.skip_sep();
            if self.peek() == Some(']') {
                self.bump();
                return Ok(out);
            }
            if self.peek().is_none() {
                return Err(self.error("unterminated vector".to_string()));
            }
            out.push(self.scalar()?);
        }
    }

    fn matrix(&mut self) -> Result<Vec<Vec<Rational>>, SyntaxError> {
        self.expect('[')?;
        let mut rows = Vec::new();
        loop {
            self.skip_sep();
            match self.peek() {
                Some(']') => {
                    self.bump();
                    return Ok(rows);
                }
                Some('[') => rows.push(self.vector()?),
                Some(c) => return Err(self.error(format!("expected a matrix row, found `{c}`"))),
                None => return Err(self.error("unterminated matrix".to_string())),
            }
        }
    }

    fn build_matrix(&self, rows: Vec<Vec<Rational>>, cols_if_empty: Option<usize>) -> Result<LinMap, SyntaxError> {
        let cols = match rows.first() {
            Some(r) => r.len(),
            None => cols_if_empty.ok_or_else(|| self.error("empty matrix needs a column count".to_string()))?,
        };
        LinMap::from_rows(cols, rows).map_err(|e| self.error(e.to_string()))
    }

    fn expr(&mut self) -> Result<Expr, SyntaxError> {
        self.expect('(')?;
        self.skip_ws();
        let head_at = self.pos;
        let head = self.atom();
        let e = match head {
            "id" => Expr::Id(self.natural()?),
            "proj" => {
                let src = self.natural()?;
                let lo = self.natural()?;
                let len = self.natural()?;
                Expr::Proj { src, lo, len }
            }
            "pair" => {
                let mut parts = Vec::new();
                loop {
                    self.skip_ws();
                    match self.peek() {
                        Some(')') => break,
                        Some('(') => parts.push(self.expr()?),
                        Some(c) => return Err(self.error(format!("expected a term, found `{c}`"))),
                        None => return Err(self.error("unterminated pair".to_string())),
                    }
                }
                Expr::Pair(parts)
            }
            "comp" => {
                let f = self.expr()?;
                let g = self.expr()?;
                Expr::Comp(Box::new(f), Box::new(g))
            }
            "zero" => {
                let dom = self.natural()?;
                let cod = self.natural()?;
                Expr::Zero { dom, cod }
            }
            "add" => {
                let f = self.expr()?;
                let g = self.expr()?;
                Expr::Add(Box::new(f), Box::new(g))
            }
            "neg" => Expr::Neg(Box::new(self.expr()?)),
            "linear" => {
                let rows = self.matrix()?;
                self.skip_ws();
                let cols = if rows.is_empty() { Some(self.natural()?) } else { None };
                Expr::Linear(self.build_matrix(rows, cols)?)
            }
            "const" => Expr::Const(self.vector()?),
            "one" => Expr::One(self.natural()?),
            "mul" => Expr::Mul,
            "sin" => Expr::Sin,
            "cos" => Expr::Cos,
            "exp" => Expr::Exp,
            other => {
                self.pos = head_at;
                return Err(self.error(format!("unknown constructor `{other}`")));
            }
        };
        self.expect(')')?;
        Ok(e)
    }
}

fn write_scalar(f: &mut fmt::Formatter<'_>, q: &Rational) -> fmt::Result {
    if q.is_integer() {
        write!(f, "{}", q.numer())
    } else {
        write!(f, "{}/{}", q.numer(), q.denom())
    }
}

fn write_vector(f: &mut fmt::Formatter<'_>, v: &[Rational]) -> fmt::Result {
    f.write_str("[")?;
    for (i, q) in v.iter().enumerate() {
        if i > 0 {
            f.write_str(" ")?;
        }
        write_scalar(f, q)?;
    }
    f.write_str("]")
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Id(n) => write!(f, "(id {n})"),
            Expr::Proj { src, lo, len } => write!(f, "(proj {src} {lo} {len})"),
            Expr::Pair(parts) => {
                f.write_str("(pair")?;
                for p in parts {
                    write!(f, " {p}")?;
                }
                f.write_str(")")
            }
            Expr::Comp(a, b) => write!(f, "(comp {a} {b})"),
            Expr::Zero { dom, cod } => write!(f, "(zero {dom} {cod})"),
            Expr::Add(a, b) => write!(f, "(add {a} {b})"),
            Expr::Neg(a) => write!(f, "(neg {a})"),
            Expr::Linear(m) => {
                f.write_str("(linear [")?;
                for r in 0..m.rows() {
                    if r > 0 {
                        f.write_str(" ")?;
                    }
                    write_vector(f, m.row(r))?;
                }
                f.write_str("]")?;
                if m.rows() == 0 {
                    write!(f, " {}", m.cols())?;
                }
                f.write_str(")")
            }
            Expr::Const(v) => {
                f.write_str("(const ")?;
                write_vector(f, v)?;
                f.write_str(")")
            }
            Expr::One(n) => write!(f, "(one {n})"),
            Expr::Mul => f.write_str("(mul)"),
            Expr::Sin => f.write_str("(sin)"),
            Expr::Cos => f.write_str("(cos)"),
            Expr::Exp => f.write_str("(exp)"),
        }
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(&self.to_expr(), f)
    }
}
