//! Open objectives: spans `X ← N → Y` decorated with an objective `N → 1`.
//!
//! They form a hypergraph category. Composition is by pullback over the
//! shared boundary, with the decorations summed after restricting to the
//! pullback apex; the monoidal product places objectives side by side.

use rand::Rng;

use crate::exec::Executor;
use crate::harness::{witness_report, LawReport};
use crate::linmap::LinMap;
use crate::scalar::{Dim, Scalar, Vector};
use crate::simplify::{self as s, simplify};
use crate::span::{same_tag, Generator, Span, SpanError};
use crate::term::{eval, DomainTag, EvalError, Term};

#[derive(Debug, Clone, PartialEq)]
pub struct OpenObjective {
    span: Span,
    objective: Term,
    tag: DomainTag,
}

impl OpenObjective {
    pub fn new(left: LinMap, right: LinMap, objective: Term, tag: DomainTag) -> Result<Self, SpanError> {
        OpenObjective::from_span(Span::new(left, right)?, objective, tag)
    }

    pub fn from_span(span: Span, objective: Term, tag: DomainTag) -> Result<Self, SpanError> {
        if objective.dom() != span.apex() || objective.cod() != 1 {
            return Err(SpanError::Decoration { dom: objective.dom(), cod: objective.cod(), apex: span.apex() });
        }
        objective.check_domain(tag)?;
        Ok(OpenObjective { span, objective, tag })
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

    pub fn objective(&self) -> &Term {
        &self.objective
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

    /// `X ← X → X` with the zero objective.
    pub fn identity(x: Dim, tag: DomainTag) -> Self {
        OpenObjective { span: Span::identity(x), objective: Term::zero(x, 1), tag }
    }

    /// A Frobenius generator on `x`, decorated with the zero objective.
    pub fn generator(kind: Generator, x: Dim, tag: DomainTag) -> Self {
        OpenObjective { span: Span::generator(kind, x), objective: Term::zero(x, 1), tag }
    }

    /// `other ∘ self`: glue along the shared boundary.
    pub fn compose(&self, other: &OpenObjective) -> Result<Self, SpanError> {
        let tag = same_tag(self.tag, other.tag)?;
        let (span, pb) = self.span.compose(&other.span)?;
        let objective = simplify(&s::add(
            s::comp(self.objective.clone(), s::linear(pb.b0)),
            s::comp(other.objective.clone(), s::linear(pb.b1)),
        ));
        Ok(OpenObjective { span, objective, tag })
    }

    pub fn tensor(&self, other: &OpenObjective) -> Result<Self, SpanError> {
        let tag = same_tag(self.tag, other.tag)?;
        let objective = sum_on_product(&self.objective, &other.objective);
        Ok(OpenObjective { span: self.span.tensor(&other.span), objective, tag })
    }

    /// The objective at an apex point.
    pub fn eval(&self, point: &Vector) -> Result<Scalar, EvalError> {
        let v = eval(&self.objective, point, self.tag)?;
        Ok(v.get(0).expect("objective is scalar"))
    }
}

/// `f ∘ π₀ + g ∘ π₁` on `N × M`.
pub(crate) fn sum_on_product(f: &Term, g: &Term) -> Term {
    let (n, m) = (f.dom(), g.dom());
    simplify(&s::add(
        s::comp(f.clone(), s::proj(n + m, 0, n)),
        s::comp(g.clone(), s::proj(n + m, n, m)),
    ))
}

pub fn obj_compose(f: &OpenObjective, g: &OpenObjective) -> Result<OpenObjective, SpanError> {
    f.compose(g)
}

pub fn obj_tensor(f: &OpenObjective, g: &OpenObjective) -> Result<OpenObjective, SpanError> {
    f.tensor(g)
}

pub fn obj_identity(x: Dim, tag: DomainTag) -> OpenObjective {
    OpenObjective::identity(x, tag)
}

pub fn frobenius(kind: Generator, x: Dim, tag: DomainTag) -> OpenObjective {
    OpenObjective::generator(kind, x, tag)
}

pub fn obj_eval(f: &OpenObjective, point: &Vector) -> Result<Scalar, EvalError> {
    f.eval(point)
}

/// Extensional comparison: an exact apex isomorphism `u` matches the legs
/// and `f ∘ u == g` on random points.
pub fn obj_equivalence<E: Executor>(
    law: &str,
    f: &OpenObjective,
    g: &OpenObjective,
    trials: usize,
    rng: &mut impl Rng,
    exec: &E,
) -> LawReport {
    if f.tag != g.tag {
        return LawReport::failure(law, f.tag.is_poly(), "domains differ");
    }
    let transport = |u: &LinMap| simplify(&s::comp(f.objective.clone(), s::linear(u.clone())));
    witness_report(law, &f.span, &g.span, &g.objective, transport, f.tag, trials, rng, exec)
}

pub fn obj_extensional_eq(f: &OpenObjective, g: &OpenObjective, trials: usize, rng: &mut impl Rng) -> bool {
    obj_equivalence("equal", f, g, trials, rng, &crate::exec::Sequential).passed
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gen;
    use crate::term::build::*;
    use alloc::vec;
    use alloc::vec::Vec;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn q(n: i64) -> crate::scalar::Rational {
        crate::scalar::Rational::from_integer(n.into())
    }

    /// `(a ←π₀ a×b →π₁ b, objective)`.
    fn projection_span(a: Dim, b: Dim, objective: Term, tag: DomainTag) -> OpenObjective {
        OpenObjective::new(LinMap::projection(a + b, 0, a), LinMap::projection(a + b, a, b), objective, tag).unwrap()
    }

    #[test]
    fn composite_sums_objectives_on_shared_variable() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let tag = DomainTag::PolyOverRationals;
        let f = projection_span(1, 1, times(var(2, 0), var(2, 1)), tag);
        let g = projection_span(1, 1, plus(square(var(2, 0)), var(2, 1)), tag);
        let h = f.compose(&g).unwrap();
        assert_eq!(h.apex(), 3);
        for _ in 0..100 {
            let p = gen::rational_point(&mut rng, 3);
            let (x, y, z) = (&p[0], &p[1], &p[2]);
            let expected = x * y + y * y + z;
            assert_eq!(h.eval(&Vector::Rational(p.clone())).unwrap(), Scalar::Rational(expected));
        }
    }

    #[test]
    fn identity_is_a_unit() {
        let mut rng = ChaCha8Rng::seed_from_u64(22);
        let tag = DomainTag::Smooth;
        let f = projection_span(2, 1, after(Term::sin(), plus(var(3, 0), times(var(3, 1), var(3, 2)))), tag);
        let left = obj_identity(2, tag).compose(&f).unwrap();
        let right = f.compose(&obj_identity(1, tag)).unwrap();
        assert!(obj_extensional_eq(&left, &f, 100, &mut rng));
        assert!(obj_extensional_eq(&right, &f, 100, &mut rng));
    }

    #[test]
    fn copy_decoration_is_zero_and_special_law_holds() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let tag = DomainTag::PolyOverRationals;
        let d = frobenius(Generator::Copy, 2, tag);
        assert_eq!(d.eval(&Vector::from_ints(crate::ScalarKind::Rational, &[3, -4])).unwrap(), Scalar::rational(0, 1));
        let m = frobenius(Generator::Merge, 2, tag);
        let special = d.compose(&m).unwrap();
        assert!(obj_extensional_eq(&special, &obj_identity(2, tag), 20, &mut rng));
    }

    #[test]
    fn tensor_is_a_separable_sum() {
        let tag = DomainTag::PolyOverRationals;
        let f = projection_span(1, 0, shifted_square(1, 0, q(1)), tag);
        let g = projection_span(1, 0, shifted_square(1, 0, q(3)), tag);
        let t = f.tensor(&g).unwrap();
        let v = t.eval(&Vector::from_ints(crate::ScalarKind::Rational, &[2, 5])).unwrap();
        assert_eq!(v, Scalar::rational(1 + 4, 1));
        let unit = OpenObjective::identity(0, tag);
        let mut rng = ChaCha8Rng::seed_from_u64(24);
        assert!(obj_extensional_eq(&f.tensor(&unit).unwrap(), &f, 20, &mut rng));
    }

    #[test]
    fn permuted_apex_is_equal_and_other_objective_is_not() {
        let mut rng = ChaCha8Rng::seed_from_u64(25);
        let tag = DomainTag::PolyOverRationals;
        let obj = plus(times(var(3, 0), var(3, 2)), square(var(3, 1)));
        let f = projection_span(2, 1, obj.clone(), tag);
        assert!(obj_extensional_eq(&f, &f, 20, &mut rng));
        let p = gen::permutation(&mut rng, 3);
        let g = OpenObjective::new(
            f.left().compose(&p).unwrap(),
            f.right().compose(&p).unwrap(),
            simplify(&after(obj, Term::linear(p))),
            tag,
        )
        .unwrap();
        assert!(obj_extensional_eq(&f, &g, 20, &mut rng));
        let other = projection_span(2, 1, square(var(3, 1)), tag);
        assert!(!obj_extensional_eq(&f, &other, 20, &mut rng));
    }

    #[test]
    fn tag_and_boundary_errors() {
        let a = projection_span(1, 1, Term::zero(2, 1), DomainTag::Smooth);
        let b = projection_span(1, 1, Term::zero(2, 1), DomainTag::PolyOverRationals);
        assert!(matches!(a.compose(&b), Err(SpanError::Tag { .. })));
        let c = projection_span(2, 1, Term::zero(3, 1), DomainTag::Smooth);
        assert!(matches!(a.compose(&c), Err(SpanError::Boundary { expected: 1, found: 2 })));
        let bad = OpenObjective::new(LinMap::identity(2), LinMap::identity(2), Term::zero(3, 1), DomainTag::Smooth);
        assert!(matches!(bad, Err(SpanError::Decoration { .. })));
        let smooth = Term::sin();
        let rejected = OpenObjective::new(LinMap::identity(1), LinMap::identity(1), smooth, DomainTag::PolyOverRationals);
        assert!(matches!(rejected, Err(SpanError::Type(_))));
    }

    #[test]
    fn mtl_shape_objective() {
        // δ composed with F¹ ⊗ F² sums the task losses over (w₀, w₁, w₂)
        let tag = DomainTag::PolyOverRationals;
        let l1 = plus(shifted_square(2, 0, q(1)), square(var(2, 1)));
        let l2 = plus(shifted_square(2, 0, q(3)), square(var(2, 1)));
        let f1 = projection_span(1, 1, l1, tag);
        let f2 = projection_span(1, 1, l2, tag);
        let composite = frobenius(Generator::Copy, 1, tag).compose(&f1.tensor(&f2).unwrap()).unwrap();
        assert_eq!(composite.apex(), 3);
        let v = composite.eval(&Vector::from_ints(crate::ScalarKind::Rational, &[0, 0, 0])).unwrap();
        assert_eq!(v, Scalar::rational(10, 1));
        let pts: Vec<i64> = vec![2, 1, -1];
        let v = composite.eval(&Vector::from_ints(crate::ScalarKind::Rational, &pts)).unwrap();
        assert_eq!(v, Scalar::rational(1 + 1 + 1 + 1, 1));
    }
}
