//! Open dynamical systems: spans `X ← N → Y` decorated with a vector field
//! `N → N`.
//!
//! Besides the simplified field, every system keeps the factored form it was
//! built from: a pairing of the apex into the stacked state spaces of its
//! leaf systems, and the leaf fields. The factored form is what the
//! distributed executor runs.

use alloc::vec::Vec;

use rand::Rng;

use crate::exec::Executor;
use crate::harness::{witness_report, LawReport};
use crate::linmap::{LinError, LinMap};
use crate::scalar::{Dim, Vector};
use crate::simplify::{self as s, simplify};
use crate::solver::ExecutionPlan;
use crate::span::{same_tag, Generator, Span, SpanError};
use crate::term::{eval, DomainTag, EvalError, Term};

#[derive(Debug, Clone, PartialEq)]
pub struct OpenDynam {
    span: Span,
    field: Term,
    plan: ExecutionPlan,
    tag: DomainTag,
}

impl OpenDynam {
    /// A leaf system: its plan is the identity pairing onto its own field.
    pub fn new(left: LinMap, right: LinMap, field: Term, tag: DomainTag) -> Result<Self, SpanError> {
        OpenDynam::leaf(Span::new(left, right)?, field, tag)
    }

    pub fn leaf(span: Span, field: Term, tag: DomainTag) -> Result<Self, SpanError> {
        let n = span.apex();
        if field.dom() != n || field.cod() != n {
            return Err(SpanError::Decoration { dom: field.dom(), cod: field.cod(), apex: n });
        }
        field.check_domain(tag)?;
        let plan = ExecutionPlan::leaf(field.clone());
        Ok(OpenDynam { span, field, plan, tag })
    }

    pub fn span(&self) -> &Span {
        &self.span
    }

    pub fn left(&self) -> &LinMap {
        self.span.left()
    }

    pub fn right(&self) -> &LinMap {
        self.span.right()
    }

    /// The simplified monolithic field.
    pub fn field(&self) -> &Term {
        &self.field
    }

    pub fn plan(&self) -> &ExecutionPlan {
        &self.plan
    }

    pub fn tag(&self) -> DomainTag {
        self.tag
    }

    pub fn apex(&self) -> Dim {
        self.span.apex()
    }

    pub fn source(&self) -> Dim {
        self.span.source()
    }

    pub fn target(&self) -> Dim {
        self.span.target()
    }

    pub fn identity(x: Dim, tag: DomainTag) -> Self {
        OpenDynam::leaf(Span::identity(x), Term::zero(x, x), tag).expect("zero field fits")
    }

    pub fn generator(kind: Generator, x: Dim, tag: DomainTag) -> Self {
        OpenDynam::leaf(Span::generator(kind, x), Term::zero(x, x), tag).expect("zero field fits")
    }

    /// `other ∘ self` by pullback; the field is `φ† ∘ (v × w) ∘ φ` for the
    /// pullback pairing `φ = ⟨b0, b1⟩`.
    pub fn compose(&self, other: &OpenDynam) -> Result<Self, SpanError> {
        let tag = same_tag(self.tag, other.tag)?;
        let (span, pb) = self.span.compose(&other.span)?;
        let field = restrict(&pb.pairing, &product_field(&self.field, &other.field));
        let plan = self.plan.tensor(&other.plan).precompose(&pb.pairing)?;
        Ok(OpenDynam { span, field, plan, tag })
    }

    pub fn tensor(&self, other: &OpenDynam) -> Result<Self, SpanError> {
        let tag = same_tag(self.tag, other.tag)?;
        Ok(OpenDynam {
            span: self.span.tensor(&other.span),
            field: product_field(&self.field, &other.field),
            plan: self.plan.tensor(&other.plan),
            tag,
        })
    }

    /// The factored field `φ† ∘ (Σᵢ ιᵢ ∘ vᵢ ∘ πᵢ) ∘ φ`, left unsimplified.
    pub fn factored(&self) -> Term {
        self.plan.factored()
    }

    pub fn eval(&self, point: &Vector) -> Result<Vector, EvalError> {
        eval(&self.field, point, self.tag)
    }
}

/// `v × w = ι₀ ∘ v ∘ π₀ + ι₁ ∘ w ∘ π₁` on `N × M`.
pub fn product_field(v: &Term, w: &Term) -> Term {
    let (n, m) = (v.dom(), w.dom());
    simplify(&s::add(
        s::comp(s::linear(LinMap::injection(n + m, 0, n)), s::comp(v.clone(), s::proj(n + m, 0, n))),
        s::comp(s::linear(LinMap::injection(n + m, n, m)), s::comp(w.clone(), s::proj(n + m, n, m))),
    ))
}

fn restrict(phi: &LinMap, v: &Term) -> Term {
    simplify(&s::comp(s::linear(phi.dagger()), s::comp(v.clone(), s::linear(phi.clone()))))
}

/// The system `φ† ∘ v ∘ φ` on `X` for `φ: X → Y` and `v: Y → Y`.
pub fn dyn_restrict(phi: &LinMap, v: &Term) -> Result<Term, LinError> {
    if v.dom() != phi.rows() || v.cod() != phi.rows() {
        return Err(LinError::DimMismatch { expected: phi.rows(), found: v.dom() });
    }
    Ok(restrict(phi, v))
}

pub fn dyn_compose(v: &OpenDynam, w: &OpenDynam) -> Result<OpenDynam, SpanError> {
    v.compose(w)
}

pub fn dyn_tensor(v: &OpenDynam, w: &OpenDynam) -> Result<OpenDynam, SpanError> {
    v.tensor(w)
}

pub fn dyn_identity(x: Dim, tag: DomainTag) -> OpenDynam {
    OpenDynam::identity(x, tag)
}

pub fn dyn_frobenius(kind: Generator, x: Dim, tag: DomainTag) -> OpenDynam {
    OpenDynam::generator(kind, x, tag)
}

/// Extensional comparison through an apex isomorphism `u` matching the
/// legs: `u† ∘ v ∘ u == w` on random points.
pub fn dyn_equivalence<E: Executor>(
    law: &str,
    v: &OpenDynam,
    w: &OpenDynam,
    trials: usize,
    rng: &mut impl Rng,
    exec: &E,
) -> LawReport {
    if v.tag != w.tag {
        return LawReport::failure(law, v.tag.is_poly(), "domains differ");
    }
    let transport = |u: &LinMap| restrict(u, &v.field);
    witness_report(law, &v.span, &w.span, &w.field, transport, v.tag, trials, rng, exec)
}

pub fn dyn_extensional_eq(v: &OpenDynam, w: &OpenDynam, trials: usize, rng: &mut impl Rng) -> bool {
    dyn_equivalence("equal", v, w, trials, rng, &crate::exec::Sequential).passed
}

pub(crate) fn concat<T: Clone>(a: &[T], b: &[T]) -> Vec<T> {
    let mut out = a.to_vec();
    out.extend_from_slice(b);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gen;
    use crate::scalar::{Rational, ScalarKind};
    use crate::term::build::*;
    use alloc::vec;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn q(n: i64) -> Rational {
        Rational::from_integer(n.into())
    }

    fn ints(v: &[i64]) -> Vector {
        Vector::from_ints(ScalarKind::Rational, v)
    }

    fn projection_span(a: Dim, b: Dim, field: Term, tag: DomainTag) -> OpenDynam {
        OpenDynam::new(LinMap::projection(a + b, 0, a), LinMap::projection(a + b, a, b), field, tag).unwrap()
    }

    #[test]
    fn restriction_examples() {
        let tag = DomainTag::PolyOverRationals;
        let v = times(var(1, 0), var(1, 0));
        assert_eq!(dyn_restrict(&LinMap::identity(1), &v).unwrap(), simplify(&v));
        let two = LinMap::from_ints(1, 1, &[2]).unwrap();
        let r = dyn_restrict(&two, &Term::id(1)).unwrap();
        assert_eq!(eval(&r, &ints(&[3]), tag).unwrap(), ints(&[12]));
        // injection into a block-diagonal field picks out the first block
        let v0 = Term::neg(Term::id(2));
        let v1 = Term::linear(LinMap::from_ints(1, 1, &[5]).unwrap());
        let block = product_field(&v0, &v1);
        let r = dyn_restrict(&LinMap::injection(3, 0, 2), &block).unwrap();
        assert_eq!(eval(&r, &ints(&[1, 4]), tag).unwrap(), ints(&[-1, -4]));
        assert!(dyn_restrict(&two, &Term::id(2)).is_err());
    }

    #[test]
    fn composite_field_sums_on_the_shared_coordinate() {
        // V on (x, y), W on (y, z): the middle coordinate collects both
        let tag = DomainTag::PolyOverRationals;
        let v = Term::pair(vec![var(2, 0), times(var(2, 0), var(2, 1))]).unwrap();
        let w = Term::pair(vec![var(2, 1), Term::neg(var(2, 0))]).unwrap();
        let c = projection_span(1, 1, v, tag).compose(&projection_span(1, 1, w, tag)).unwrap();
        let out = c.eval(&ints(&[2, 3, 5])).unwrap();
        // x: 2, y: 2·3 + 5, z: −3
        assert_eq!(out, ints(&[2, 11, -3]));
        assert_eq!(eval(&c.factored(), &ints(&[2, 3, 5]), tag).unwrap(), out);
    }

    #[test]
    fn identity_and_generators_are_zero_fields() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        let tag = DomainTag::Smooth;
        for kind in Generator::ALL {
            let g = dyn_frobenius(kind, 2, tag);
            assert_eq!(g.eval(&Vector::real(vec![0.5, -1.5]).unwrap()).unwrap(), Vector::real(vec![0.0, 0.0]).unwrap());
        }
        let field = Term::pair(vec![after(Term::cos(), var(2, 1)), times(var(2, 0), var(2, 1))]).unwrap();
        let v = projection_span(1, 1, field, tag);
        assert!(dyn_extensional_eq(&dyn_identity(1, tag).compose(&v).unwrap(), &v, 100, &mut rng));
        assert!(dyn_extensional_eq(&v.compose(&dyn_identity(1, tag)).unwrap(), &v, 100, &mut rng));
    }

    #[test]
    fn permuted_apex_and_differing_fields() {
        let mut rng = ChaCha8Rng::seed_from_u64(32);
        let tag = DomainTag::PolyOverRationals;
        let field = Term::pair(vec![var(3, 2), times(var(3, 0), var(3, 1)), Term::neg(var(3, 1))]).unwrap();
        let v = projection_span(2, 1, field.clone(), tag);
        assert!(dyn_extensional_eq(&v, &v, 20, &mut rng));
        let p = gen::permutation(&mut rng, 3);
        let moved = OpenDynam::new(
            v.left().compose(&p).unwrap(),
            v.right().compose(&p).unwrap(),
            dyn_restrict(&p, &field).unwrap(),
            tag,
        )
        .unwrap();
        assert!(dyn_extensional_eq(&v, &moved, 20, &mut rng));
        let bumped = Term::add(field, Term::constant_on(3, vec![q(0), q(1), q(0)])).unwrap();
        let w = projection_span(2, 1, bumped, tag);
        assert!(!dyn_extensional_eq(&v, &w, 20, &mut rng));
    }

    #[test]
    fn tensor_is_block_diagonal() {
        let tag = DomainTag::PolyOverRationals;
        let a = projection_span(1, 0, Term::neg(Term::id(1)), tag);
        let b = projection_span(0, 1, times(var(1, 0), var(1, 0)), tag);
        let t = a.tensor(&b).unwrap();
        assert_eq!(t.eval(&ints(&[2, 3])).unwrap(), ints(&[-2, 9]));
        assert_eq!(t.plan().subsystems().len(), 2);
    }
}
