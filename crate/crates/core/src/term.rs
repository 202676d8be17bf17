//! Morphisms of the underlying reverse derivative category as typed syntax.
//!
//! [`Expr`] is the raw, unchecked syntax produced by the parser or by hand.
//! [`Term`] is the checked form: every node carries its domain and codomain,
//! and a `Term` can only be obtained through [`typecheck`] or the checked
//! constructors, so every `Term` in existence is well typed.

use alloc::boxed::Box;
use alloc::format;
use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec::Vec;
use core::fmt;

use crate::linmap::LinMap;
use crate::scalar::{is_integral, Coefficients, Dim, Rational, Ring, ScalarError, ScalarKind, Vector};

/// Which optimization domain a term is interpreted in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DomainTag {
    /// Smooth maps between Euclidean spaces, evaluated over `f64`.
    Smooth,
    /// Polynomials with rational coefficients, evaluated exactly.
    PolyOverRationals,
    /// Polynomials with integer coefficients, evaluated exactly.
    PolyOverIntegers,
}

impl DomainTag {
    pub fn scalar_kind(self) -> ScalarKind {
        match self {
            DomainTag::Smooth => ScalarKind::Real64,
            DomainTag::PolyOverRationals | DomainTag::PolyOverIntegers => ScalarKind::Rational,
        }
    }

    pub fn is_poly(self) -> bool {
        !matches!(self, DomainTag::Smooth)
    }
}

/// Unchecked term syntax.
#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Id(Dim),
    Proj { src: Dim, lo: usize, len: Dim },
    Pair(Vec<Expr>),
    /// `Comp(outer, inner)` is `outer ∘ inner`.
    Comp(Box<Expr>, Box<Expr>),
    Zero { dom: Dim, cod: Dim },
    Add(Box<Expr>, Box<Expr>),
    Neg(Box<Expr>),
    Linear(LinMap),
    /// A constant vector `0 → len`.
    Const(Vec<Rational>),
    /// The all-ones vector `0 → cod`.
    One(Dim),
    Mul,
    Sin,
    Cos,
    Exp,
}

impl Expr {
    pub fn comp(outer: Expr, inner: Expr) -> Expr {
        Expr::Comp(Box::new(outer), Box::new(inner))
    }

    pub fn add(f: Expr, g: Expr) -> Expr {
        Expr::Add(Box::new(f), Box::new(g))
    }

    pub fn neg(f: Expr) -> Expr {
        Expr::Neg(Box::new(f))
    }

    pub fn proj(src: Dim, lo: usize, len: Dim) -> Expr {
        Expr::Proj { src, lo, len }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum TypeErrorKind {
    #[error("domain mismatch: {expected} ≠ {found}")]
    DomMismatch { expected: Dim, found: Dim },
    #[error("codomain mismatch: {expected} ≠ {found}")]
    CodMismatch { expected: Dim, found: Dim },
    #[error("projection slice {lo}+{len} exceeds source {src}")]
    ProjOutOfRange { src: Dim, lo: usize, len: Dim },
    #[error("pair needs at least one part")]
    EmptyPair,
    #[error("primitive `{0}` is not allowed in a polynomial domain")]
    ForbiddenPrimitive(&'static str),
    #[error("non-integral coefficient in an integer polynomial domain")]
    NonIntegral,
}

/// A type error together with the path of the offending subterm, e.g.
/// `comp.inner.pair[1]`.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("{kind} at `{path}`")]
pub struct TypeError {
    pub path: String,
    pub kind: TypeErrorKind,
}

impl TypeError {
    fn root(kind: TypeErrorKind) -> Self {
        TypeError { path: String::from("."), kind }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum EvalError {
    #[error("input has dimension {found}, term expects {expected}")]
    DimMismatch { expected: Dim, found: Dim },
    #[error("non-finite intermediate value in `{0}`")]
    NonFinite(&'static str),
    #[error("primitive `{0}` cannot be evaluated over rationals")]
    Transcendental(&'static str),
    #[error("vector kind does not match the domain")]
    KindMismatch,
    #[error(transparent)]
    Scalar(#[from] ScalarError),
}

/// Checked node. Dimensions live on the enclosing [`Term`].
#[derive(Debug, Clone, PartialEq)]
pub enum Node {
    Id,
    Proj { lo: usize },
    Pair(Vec<Term>),
    Comp { outer: Term, inner: Term },
    Zero,
    Add(Term, Term),
    Neg(Term),
    Linear(LinMap),
    Const(Coefficients),
    One,
    Mul,
    Sin,
    Cos,
    Exp,
}

#[derive(Debug, PartialEq)]
struct Inner {
    node: Node,
    dom: Dim,
    cod: Dim,
    smooth: bool,
    size: usize,
}

/// A well-typed, immutable morphism `dom → cod`. Cloning is cheap.
#[derive(Clone, PartialEq)]
pub struct Term(Arc<Inner>);

impl fmt::Debug for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Term({} : {} → {})", self, self.dom(), self.cod())
    }
}

impl Term {
    /// Assembles a node whose dimensions the caller has already verified.
    pub(crate) fn make(node: Node, dom: Dim, cod: Dim) -> Term {
        let (smooth, size) = match &node {
            Node::Sin | Node::Cos | Node::Exp => (true, 1),
            Node::Pair(parts) => (
                parts.iter().any(Term::is_smooth),
                1 + parts.iter().map(Term::size).sum::<usize>(),
            ),
            Node::Comp { outer: a, inner: b } | Node::Add(a, b) => {
                (a.is_smooth() || b.is_smooth(), 1 + a.size() + b.size())
            }
            Node::Neg(a) => (a.is_smooth(), 1 + a.size()),
            _ => (false, 1),
        };
        Term(Arc::new(Inner { node, dom, cod, smooth, size }))
    }

    pub fn node(&self) -> &Node {
        &self.0.node
    }

    pub fn dom(&self) -> Dim {
        self.0.dom
    }

    pub fn cod(&self) -> Dim {
        self.0.cod
    }

    /// True when the term contains `sin`, `cos` or `exp`.
    pub fn is_smooth(&self) -> bool {
        self.0.smooth
    }

    /// Node count.
    pub fn size(&self) -> usize {
        self.0.size
    }

    /// True when both handles point at the same node.
    pub fn ptr_eq(&self, other: &Term) -> bool {
        Arc::ptr_eq(&self.0, &other.0)
    }

    pub fn id(n: Dim) -> Term {
        Term::make(Node::Id, n, n)
    }

    pub fn proj(src: Dim, lo: usize, len: Dim) -> Result<Term, TypeError> {
        if lo + len > src {
            return Err(TypeError::root(TypeErrorKind::ProjOutOfRange { src, lo, len }));
        }
        Ok(Term::make(Node::Proj { lo }, src, len))
    }

    pub fn pair(parts: Vec<Term>) -> Result<Term, TypeError> {
        let first = parts.first().ok_or_else(|| TypeError::root(TypeErrorKind::EmptyPair))?;
        let dom = first.dom();
        for (i, p) in parts.iter().enumerate() {
            if p.dom() != dom {
                return Err(TypeError {
                    path: format!("pair[{i}]"),
                    kind: TypeErrorKind::DomMismatch { expected: dom, found: p.dom() },
                });
            }
        }
        let cod = parts.iter().map(Term::cod).sum();
        Ok(Term::make(Node::Pair(parts), dom, cod))
    }

    /// `outer ∘ inner`.
    pub fn comp(outer: Term, inner: Term) -> Result<Term, TypeError> {
        if inner.cod() != outer.dom() {
            return Err(TypeError::root(TypeErrorKind::DomMismatch {
                expected: outer.dom(),
                found: inner.cod(),
            }));
        }
        let (dom, cod) = (inner.dom(), outer.cod());
        Ok(Term::make(Node::Comp { outer, inner }, dom, cod))
    }

    pub fn zero(dom: Dim, cod: Dim) -> Term {
        Term::make(Node::Zero, dom, cod)
    }

    pub fn add(f: Term, g: Term) -> Result<Term, TypeError> {
        if f.dom() != g.dom() {
            return Err(TypeError::root(TypeErrorKind::DomMismatch { expected: f.dom(), found: g.dom() }));
        }
        if f.cod() != g.cod() {
            return Err(TypeError::root(TypeErrorKind::CodMismatch { expected: f.cod(), found: g.cod() }));
        }
        let (dom, cod) = (f.dom(), f.cod());
        Ok(Term::make(Node::Add(f, g), dom, cod))
    }

    pub fn neg(f: Term) -> Term {
        let (dom, cod) = (f.dom(), f.cod());
        Term::make(Node::Neg(f), dom, cod)
    }

    pub fn linear(map: LinMap) -> Term {
        let (dom, cod) = (map.cols(), map.rows());
        Term::make(Node::Linear(map), dom, cod)
    }

    pub fn constant(values: Vec<Rational>) -> Term {
        let cod = values.len();
        Term::make(Node::Const(Coefficients::new(values)), 0, cod)
    }

    pub fn one(cod: Dim) -> Term {
        Term::make(Node::One, 0, cod)
    }

    pub fn mul() -> Term {
        Term::make(Node::Mul, 2, 1)
    }

    pub fn sin() -> Term {
        Term::make(Node::Sin, 1, 1)
    }

    pub fn cos() -> Term {
        Term::make(Node::Cos, 1, 1)
    }

    pub fn exp() -> Term {
        Term::make(Node::Exp, 1, 1)
    }

    /// The constant map `dom → values.len()`, i.e. `Const ∘ !`.
    pub fn constant_on(dom: Dim, values: Vec<Rational>) -> Term {
        let c = Term::constant(values);
        let cod = c.cod();
        Term::make(Node::Comp { outer: c, inner: Term::zero(dom, 0) }, dom, cod)
    }

    /// Converts back to raw syntax.
    pub fn to_expr(&self) -> Expr {
        let (dom, cod) = (self.dom(), self.cod());
        match self.node() {
            Node::Id => Expr::Id(dom),
            Node::Proj { lo } => Expr::Proj { src: dom, lo: *lo, len: cod },
            Node::Pair(parts) => Expr::Pair(parts.iter().map(Term::to_expr).collect()),
            Node::Comp { outer, inner } => Expr::comp(outer.to_expr(), inner.to_expr()),
            Node::Zero => Expr::Zero { dom, cod },
            Node::Add(f, g) => Expr::add(f.to_expr(), g.to_expr()),
            Node::Neg(f) => Expr::neg(f.to_expr()),
            Node::Linear(m) => Expr::Linear(m.clone()),
            Node::Const(c) => Expr::Const(c.exact().to_vec()),
            Node::One => Expr::One(cod),
            Node::Mul => Expr::Mul,
            Node::Sin => Expr::Sin,
            Node::Cos => Expr::Cos,
            Node::Exp => Expr::Exp,
        }
    }

    /// Checks this term is admissible under `tag`.
    pub fn check_domain(&self, tag: DomainTag) -> Result<(), TypeError> {
        typecheck(&self.to_expr(), tag).map(|_| ())
    }

    /// Evaluates in any [`Ring`].
    pub fn eval_in<R: Ring>(&self, x: &[R]) -> Result<Vec<R>, EvalError> {
        if x.len() != self.dom() {
            return Err(EvalError::DimMismatch { expected: self.dom(), found: x.len() });
        }
        self.eval_unchecked(x)
    }

    fn eval_unchecked<R: Ring>(&self, x: &[R]) -> Result<Vec<R>, EvalError> {
        let out = match self.node() {
            Node::Id => x.to_vec(),
            Node::Proj { lo } => x[*lo..*lo + self.cod()].to_vec(),
            Node::Pair(parts) => {
                let mut out = Vec::with_capacity(self.cod());
                for p in parts {
                    out.extend(p.eval_unchecked(x)?);
                }
                out
            }
            Node::Comp { outer, inner } => {
                let mid = inner.eval_unchecked(x)?;
                outer.eval_unchecked(&mid)?
            }
            Node::Zero => alloc::vec![R::zero(); self.cod()],
            Node::Add(f, g) => {
                let a = f.eval_unchecked(x)?;
                let b = g.eval_unchecked(x)?;
                let out: Vec<R> = a.iter().zip(&b).map(|(u, v)| u.add(v)).collect();
                finite(out, "add")?
            }
            Node::Neg(f) => f.eval_unchecked(x)?.iter().map(R::neg).collect(),
            Node::Linear(m) => {
                let out = m.apply(x).map_err(|_| EvalError::DimMismatch { expected: m.cols(), found: x.len() })?;
                finite(out, "linear")?
            }
            Node::Const(c) => finite(R::coefficients(c).to_vec(), "const")?,
            Node::One => alloc::vec![R::one(); self.cod()],
            Node::Mul => finite(alloc::vec![x[0].mul(&x[1])], "mul")?,
            Node::Sin => alloc::vec![x[0].sin().ok_or(EvalError::Transcendental("sin"))?],
            Node::Cos => alloc::vec![x[0].cos().ok_or(EvalError::Transcendental("cos"))?],
            Node::Exp => finite(alloc::vec![x[0].exp().ok_or(EvalError::Transcendental("exp"))?], "exp")?,
        };
        Ok(out)
    }
}

fn finite<R: Ring>(v: Vec<R>, at: &'static str) -> Result<Vec<R>, EvalError> {
    if v.iter().all(R::is_finite) {
        Ok(v)
    } else {
        Err(EvalError::NonFinite(at))
    }
}

/// Type checks raw syntax under a domain tag, returning the checked term.
pub fn typecheck(expr: &Expr, tag: DomainTag) -> Result<Term, TypeError> {
    check(expr, tag, &mut String::new())
}

fn check(expr: &Expr, tag: DomainTag, path: &mut String) -> Result<Term, TypeError> {
    let at = |path: &String, kind| TypeError {
        path: if path.is_empty() { String::from(".") } else { path.clone() },
        kind,
    };
    let sub = |path: &mut String, seg: &str, e: &Expr| -> Result<Term, TypeError> {
        let len = path.len();
        if !path.is_empty() {
            path.push('.');
        }
        path.push_str(seg);
        let r = check(e, tag, path);
        path.truncate(len);
        r
    };
    let term = match expr {
        Expr::Id(n) => Term::id(*n),
        Expr::Proj { src, lo, len } => {
            Term::proj(*src, *lo, *len).map_err(|e| at(path, e.kind))?
        }
        Expr::Pair(parts) => {
            let mut checked = Vec::with_capacity(parts.len());
            for (i, p) in parts.iter().enumerate() {
                checked.push(sub(path, &format!("pair[{i}]"), p)?);
            }
            Term::pair(checked).map_err(|e| {
                let mut p = path.clone();
                if e.path != "." {
                    if !p.is_empty() {
                        p.push('.');
                    }
                    p.push_str(&e.path);
                }
                at(&p, e.kind)
            })?
        }
        Expr::Comp(outer, inner) => {
            let o = sub(path, "comp.outer", outer)?;
            let i = sub(path, "comp.inner", inner)?;
            Term::comp(o, i).map_err(|e| at(path, e.kind))?
        }
        Expr::Zero { dom, cod } => Term::zero(*dom, *cod),
        Expr::Add(f, g) => {
            let f = sub(path, "add.0", f)?;
            let g = sub(path, "add.1", g)?;
            Term::add(f, g).map_err(|e| at(path, e.kind))?
        }
        Expr::Neg(f) => Term::neg(sub(path, "neg", f)?),
        Expr::Linear(m) => {
            if tag == DomainTag::PolyOverIntegers && !m.is_integral() {
                return Err(at(path, TypeErrorKind::NonIntegral));
            }
            Term::linear(m.clone())
        }
        Expr::Const(v) => {
            if tag == DomainTag::PolyOverIntegers && !v.iter().all(is_integral) {
                return Err(at(path, TypeErrorKind::NonIntegral));
            }
            Term::constant(v.clone())
        }
        Expr::One(n) => Term::one(*n),
        Expr::Mul => Term::mul(),
        Expr::Sin | Expr::Cos | Expr::Exp => {
            let name = match expr {
                Expr::Sin => "sin",
                Expr::Cos => "cos",
                _ => "exp",
            };
            if tag.is_poly() {
                return Err(at(path, TypeErrorKind::ForbiddenPrimitive(name)));
            }
            match expr {
                Expr::Sin => Term::sin(),
                Expr::Cos => Term::cos(),
                _ => Term::exp(),
            }
        }
    };
    Ok(term)
}

/// Evaluates a term on a vector in the domain named by `tag`.
pub fn eval(t: &Term, x: &Vector, tag: DomainTag) -> Result<Vector, EvalError> {
    if x.kind() != tag.scalar_kind() {
        return Err(EvalError::KindMismatch);
    }
    if tag.is_poly() && t.is_smooth() {
        return Err(EvalError::Transcendental("smooth primitive"));
    }
    match x {
        Vector::Rational(v) => Ok(Vector::Rational(t.eval_in(v)?)),
        Vector::Real(v) => Ok(Vector::Real(t.eval_in(v)?)),
    }
}

/// Builders for common terms.
pub mod build {
    use super::*;

    /// `x_i` as a term `n → 1`.
    pub fn var(n: Dim, i: usize) -> Term {
        Term::proj(n, i, 1).expect("variable index in range")
    }

    /// Product of two scalar-valued terms on the same domain.
    pub fn times(a: Term, b: Term) -> Term {
        Term::comp(Term::mul(), Term::pair(alloc::vec![a, b]).expect("same domain")).expect("scalar factors")
    }

    /// `f · f` for scalar-valued `f`.
    pub fn square(f: Term) -> Term {
        times(f.clone(), f)
    }

    pub fn plus(a: Term, b: Term) -> Term {
        Term::add(a, b).expect("matching types")
    }

    pub fn minus(a: Term, b: Term) -> Term {
        Term::add(a, Term::neg(b)).expect("matching types")
    }

    /// The constant `c` as a term `n → 1`.
    pub fn scalar_const(n: Dim, c: Rational) -> Term {
        Term::constant_on(n, alloc::vec![c])
    }

    /// `(x_i − c)²` on an `n`-dimensional domain.
    pub fn shifted_square(n: Dim, i: usize, c: Rational) -> Term {
        square(minus(var(n, i), scalar_const(n, c)))
    }

    /// `then ∘ first`, panicking on mismatch.
    pub fn after(then: Term, first: Term) -> Term {
        Term::comp(then, first).expect("composable terms")
    }
}
