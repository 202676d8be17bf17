//! The gradient descent functor from open objectives to open dynamical
//! systems, and pointwise checks of its laws.
//!
//! On decorations the functor sends `f` to `−R[f]₁`; spans are unchanged.

use alloc::format;

use rand::Rng;

use crate::dynam::{dyn_equivalence, OpenDynam};
use crate::exec::Executor;
use crate::harness::{compare_terms, LawReport};
use crate::linmap::{pullback, LinMap};
use crate::opt::OpenObjective;
use crate::rdiff::{grad, GradError};
use crate::simplify::{self as s, simplify};
use crate::span::Generator;
use crate::term::{DomainTag, Term};

/// `−R[f]₁` for an objective `f: n → 1`.
pub fn gd_component(f: &Term) -> Result<Term, GradError> {
    Ok(simplify(&s::neg(grad(f)?)))
}

/// Same span, decorated with the descent field of the objective.
pub fn gd_functor(f: &OpenObjective) -> OpenDynam {
    let field = gd_component(f.objective()).expect("objectives are scalar");
    OpenDynam::leaf(f.span().clone(), field, f.tag()).expect("descent field is an endomap on the apex")
}

fn linear(m: &LinMap) -> Term {
    Term::linear(m.clone())
}

fn comp(outer: Term, inner: Term) -> Term {
    Term::comp(outer, inner).expect("composable")
}

/// `−R[f ∘ φ]₁ == −φ† ∘ R[f]₁ ∘ φ` for `φ: m → n`, `f: n → 1`.
pub fn check_naturality<E: Executor>(
    f: &Term,
    phi: &LinMap,
    tag: DomainTag,
    trials: usize,
    rng: &mut impl Rng,
    exec: &E,
) -> LawReport {
    let exact = tag.is_poly();
    if phi.rows() != f.dom() || f.cod() != 1 {
        return LawReport::failure("naturality", exact, "φ does not land in the objective's domain");
    }
    let lhs = gd_component(&comp(f.clone(), linear(phi))).expect("scalar");
    let rhs = comp(linear(&phi.dagger()), comp(gd_component(f).expect("scalar"), linear(phi)));
    compare_terms("naturality", &lhs, &rhs, tag, trials, rng, exec)
}

/// `gd(f ∘ π₀ + g ∘ π₁) == π₀† ∘ gd(f) ∘ π₀ + π₁† ∘ gd(g) ∘ π₁`.
pub fn check_monoidality<E: Executor>(
    f: &Term,
    g: &Term,
    tag: DomainTag,
    trials: usize,
    rng: &mut impl Rng,
    exec: &E,
) -> LawReport {
    let (n, m) = (f.dom(), g.dom());
    let p0 = LinMap::projection(n + m, 0, n);
    let p1 = LinMap::projection(n + m, n, m);
    let sum = Term::add(comp(f.clone(), linear(&p0)), comp(g.clone(), linear(&p1))).expect("typed");
    let lhs = gd_component(&sum).expect("scalar");
    let rhs = Term::add(
        comp(linear(&p0.dagger()), comp(gd_component(f).expect("scalar"), linear(&p0))),
        comp(linear(&p1.dagger()), comp(gd_component(g).expect("scalar"), linear(&p1))),
    )
    .expect("typed");
    compare_terms("monoidality", &lhs, &rhs, tag, trials, rng, exec)
}

/// `GD(G ∘ F) ≗ GD(G) ∘ GD(F)`, compared through an apex isomorphism.
pub fn check_functoriality<E: Executor>(
    f: &OpenObjective,
    g: &OpenObjective,
    trials: usize,
    rng: &mut impl Rng,
    exec: &E,
) -> LawReport {
    let exact = f.tag().is_poly();
    let composite = match f.compose(g) {
        Ok(c) => c,
        Err(e) => return LawReport::failure("functoriality", exact, format!("{e}")),
    };
    let lhs = gd_functor(&composite);
    let rhs = match gd_functor(f).compose(&gd_functor(g)) {
        Ok(c) => c,
        Err(e) => return LawReport::failure("functoriality", exact, format!("{e}")),
    };
    dyn_equivalence("functoriality", &lhs, &rhs, trials, rng, exec)
}

/// The monolithic field `−R[f∘π₀∘φ + g∘π₁∘φ]₁` against the factored field
/// of `GD(G) ∘ GD(F)`, where `φ = ⟨b0, b1⟩` is the pullback pairing.
pub fn check_optimizer_comp<E: Executor>(
    f: &OpenObjective,
    g: &OpenObjective,
    trials: usize,
    rng: &mut impl Rng,
    exec: &E,
) -> LawReport {
    let exact = f.tag().is_poly();
    let composed = match gd_functor(f).compose(&gd_functor(g)) {
        Ok(c) => c,
        Err(e) => return LawReport::failure("optimizer_comp", exact, format!("{e}")),
    };
    let pb = pullback(f.right(), g.left()).expect("composable spans");
    let (n, m) = (f.apex(), g.apex());
    let phi = linear(&pb.pairing);
    let restricted = |obj: &Term, lo: usize, len: usize| {
        comp(obj.clone(), comp(Term::proj(n + m, lo, len).expect("slice"), phi.clone()))
    };
    let objective = Term::add(restricted(f.objective(), 0, n), restricted(g.objective(), n, m)).expect("typed");
    let lhs = gd_component(&objective).expect("scalar");
    compare_terms("optimizer_comp", &lhs, &composed.factored(), f.tag(), trials, rng, exec)
}

/// GD sends each Frobenius generator to the generator with zero field.
pub fn check_hypergraph(kind: Generator, x: usize, tag: DomainTag) -> LawReport {
    let image = gd_functor(&OpenObjective::generator(kind, x, tag));
    let expected = OpenDynam::generator(kind, x, tag);
    let mut report = LawReport::new("hypergraph", true);
    report.trials = 1;
    if image.span() != expected.span() || image.field() != expected.field() {
        report.passed = false;
        report.mismatches = 1;
        report.note = Some(format!("{} on {x}", kind.name()));
    }
    report
}
