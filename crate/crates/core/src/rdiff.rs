//! The reverse derivative combinator as a structural term transform.
//!
//! For `f: n → m`, [`reverse`] builds `R[f]: n + m → n` with
//! `R[f](x, y′) = J_f(x)ᵀ y′`. The forward derivative is derived from it by
//! reversing twice, and the generalized gradient fixes the covector slot at
//! the ring unit.
//!
//! Of the reverse derivative axioms, additivity (`R[f+g] = R[f] + R[g]`,
//! `R[0] = 0`) and the chain rule are tested directly, together with
//! linearity (`R[A] = Aᵀ ∘ π₁`) and adjointness against `forward`. The
//! remaining axioms are only exercised indirectly through those properties.

use alloc::vec::Vec;

use rand::Rng;

use crate::gen;
use crate::linmap::LinMap;
use crate::scalar::{Dim, Rational, Ring};
use crate::simplify::{self as s, simplify};
use crate::term::{DomainTag, Node, Term};

#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
pub enum GradError {
    #[error("objective must have codomain 1, found {0}")]
    NotScalar(Dim),
}

fn proj(src: Dim, lo: usize, len: Dim) -> Term {
    s::proj(src, lo, len)
}

/// `R[f]: dom + cod → dom`, simplified as it is built.
pub fn reverse(f: &Term) -> Term {
    let (n, m) = (f.dom(), f.cod());
    let out = match f.node() {
        Node::Id => proj(2 * n, n, n),
        Node::Proj { lo } => {
            let iota = LinMap::injection(n, *lo, m);
            s::comp(s::linear(iota), proj(n + m, n, m))
        }
        Node::Linear(a) => s::comp(s::linear(a.dagger()), proj(n + m, n, m)),
        Node::Zero | Node::Const(_) | Node::One => Term::zero(n + m, n),
        Node::Add(f, g) => s::add(reverse(f), reverse(g)),
        Node::Neg(f) => s::neg(reverse(f)),
        Node::Comp { outer, inner } => chain_rule(outer, inner),
        Node::Pair(parts) => {
            let mut offset = 0;
            let mut acc: Option<Term> = None;
            for p in parts {
                let k = p.cod();
                let slot = s::pair(alloc::vec![proj(n + m, 0, n), proj(n + m, n + offset, k)]);
                let term = s::comp(reverse(p), slot);
                acc = Some(match acc {
                    None => term,
                    Some(prev) => s::add(prev, term),
                });
                offset += k;
            }
            acc.expect("pairs are nonempty")
        }
        Node::Mul => {
            // R[mul]((x1, x2), y) = (x2 y, x1 y)
            let by = |i| s::comp(Term::mul(), s::pair(alloc::vec![proj(3, i, 1), proj(3, 2, 1)]));
            s::pair(alloc::vec![by(1), by(0)])
        }
        Node::Sin => scaled_by(Term::cos(), false),
        Node::Cos => scaled_by(Term::sin(), true),
        Node::Exp => scaled_by(Term::exp(), false),
    };
    debug_assert_eq!((out.dom(), out.cod()), (n + m, n));
    out
}

/// `(x, y) ↦ ±g(x)·y` for a scalar primitive `g`.
fn scaled_by(g: Term, negate: bool) -> Term {
    let t = s::comp(Term::mul(), s::pair(alloc::vec![s::comp(g, proj(2, 0, 1)), proj(2, 1, 1)]));
    if negate {
        s::neg(t)
    } else {
        t
    }
}

/// `R[g∘f] = R[f] ∘ (id × R[g]) ∘ ⟨π₀, ⟨f∘π₀, π₁⟩⟩`.
fn chain_rule(g: &Term, f: &Term) -> Term {
    let (n, k, m) = (f.dom(), f.cod(), g.cod());
    let first = proj(n + m, 0, n);
    let spread = s::pair(alloc::vec![first.clone(), s::comp(f.clone(), first), proj(n + m, n, m)]);
    let lifted = s::pair(alloc::vec![proj(n + k + m, 0, n), s::comp(reverse(g), proj(n + k + m, n, k + m))]);
    s::comp(reverse(f), s::comp(lifted, spread))
}

/// The right-hand side of the chain rule built from unsimplified pieces,
/// for checking `reverse` against it.
pub fn chain_rule_unsimplified(g: &Term, f: &Term) -> Term {
    let (n, k, m) = (f.dom(), f.cod(), g.cod());
    let p = |src, lo, len| Term::proj(src, lo, len).expect("in range");
    let spread = Term::pair(alloc::vec![
        p(n + m, 0, n),
        Term::comp(f.clone(), p(n + m, 0, n)).expect("typed"),
        p(n + m, n, m),
    ])
    .expect("typed");
    let lifted = Term::pair(alloc::vec![
        p(n + k + m, 0, n),
        Term::comp(reverse(g), p(n + k + m, n, k + m)).expect("typed"),
    ])
    .expect("typed");
    Term::comp(reverse(f), Term::comp(lifted, spread).expect("typed")).expect("typed")
}

/// `D[f] = π₁ ∘ R[R[f]] ∘ (⟨id, 0⟩ × id): n + n → m`.
pub fn forward(f: &Term) -> Term {
    let (n, m) = (f.dom(), f.cod());
    let rr = reverse(&reverse(f));
    let embed = s::pair(alloc::vec![proj(2 * n, 0, n), Term::zero(2 * n, m), proj(2 * n, n, n)]);
    simplify(&s::comp(proj(n + m, n, m), s::comp(rr, embed)))
}

/// `R[ℓ]₁ = R[ℓ] ∘ ⟨id, 1⟩` for an objective `ℓ: n → 1`.
pub fn grad(objective: &Term) -> Result<Term, GradError> {
    if objective.cod() != 1 {
        return Err(GradError::NotScalar(objective.cod()));
    }
    let n = objective.dom();
    let unit = s::comp(Term::one(1), Term::zero(n, 0));
    Ok(simplify(&s::comp(reverse(objective), s::pair(alloc::vec![Term::id(n), unit]))))
}

/// Probabilistic linearity test: `D[f](x, v) = f(v)` on `trials` random
/// points. Exact in the polynomial domains; relative tolerance `1e-9` for
/// smooth terms.
pub fn is_linear(f: &Term, tag: DomainTag, trials: usize, rng: &mut impl Rng) -> bool {
    let d = forward(f);
    let n = f.dom();
    (0..trials).all(|_| {
        if tag.is_poly() && !f.is_smooth() {
            let x: Vec<Rational> = gen::rational_point(rng, 2 * n);
            match (d.eval_in(&x), f.eval_in(&x[n..])) {
                (Ok(a), Ok(b)) => a == b,
                _ => false,
            }
        } else {
            let x: Vec<f64> = gen::real_point(rng, 2 * n);
            match (d.eval_in(&x), f.eval_in(&x[n..])) {
                (Ok(a), Ok(b)) => a.iter().zip(&b).all(|(u, v)| close(*u, *v, 1e-9)),
                _ => false,
            }
        }
    })
}

/// Relative comparison with a unit floor: `|a − b| ≤ tol · max(1, |a|, |b|)`.
pub fn close(a: f64, b: f64, tol: f64) -> bool {
    relative_deviation(a, b) <= tol
}

pub fn relative_deviation(a: f64, b: f64) -> f64 {
    let scale = 1.0f64.max(libm::fabs(a)).max(libm::fabs(b));
    libm::fabs(a - b) / scale
}

/// Evaluates `R[f]` at `(x, y′)`.
pub fn reverse_at<R: Ring>(f: &Term, x: &[R], covector: &[R]) -> Result<Vec<R>, crate::term::EvalError> {
    let mut z = x.to_vec();
    z.extend_from_slice(covector);
    reverse(f).eval_in(&z)
}
