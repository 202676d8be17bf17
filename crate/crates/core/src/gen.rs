//! Seeded generators for random points, matrices, terms and open systems,
//! used by the law-checking harness and the test corpora.

use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;

use crate::linmap::LinMap;
use crate::scalar::{Dim, Rational};
use crate::simplify as s;
use crate::term::{build, Term};

/// A small rational `p/q` with `|p| ≤ 6`, `1 ≤ q ≤ 4`.
pub fn rational(rng: &mut impl Rng) -> Rational {
    let p: i64 = rng.gen_range(-6..=6);
    let q: i64 = rng.gen_range(1..=4);
    Rational::new(p.into(), q.into())
}

pub fn rational_point(rng: &mut impl Rng, dim: Dim) -> Vec<Rational> {
    (0..dim).map(|_| rational(rng)).collect()
}

/// Uniform in `[-1, 1)`.
pub fn real_point(rng: &mut impl Rng, dim: Dim) -> Vec<f64> {
    (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect()
}

/// A rational matrix with entries drawn from [`rational`], some of them zero.
pub fn matrix(rng: &mut impl Rng, rows: Dim, cols: Dim) -> LinMap {
    let data = (0..rows * cols)
        .map(|_| if rng.gen_bool(0.3) { Rational::from_integer(0.into()) } else { rational(rng) })
        .collect();
    LinMap::new(rows, cols, data).expect("shape")
}

/// A matrix with integer entries in `[-2, 2]`.
pub fn integer_matrix(rng: &mut impl Rng, rows: Dim, cols: Dim) -> LinMap {
    let data = (0..rows * cols).map(|_| Rational::from_integer(rng.gen_range(-2i64..=2).into())).collect();
    LinMap::new(rows, cols, data).expect("shape")
}

/// An invertible integer matrix: a random permutation composed with a unit
/// upper triangular matrix.
pub fn invertible_matrix(rng: &mut impl Rng, n: Dim) -> LinMap {
    let mut perm: Vec<usize> = (0..n).collect();
    for i in (1..n).rev() {
        let j = rng.gen_range(0..=i);
        perm.swap(i, j);
    }
    let p = LinMap::from_rows(
        n,
        (0..n)
            .map(|r| (0..n).map(|c| Rational::from_integer(i64::from(perm[r] == c).into())).collect())
            .collect(),
    )
    .expect("square");
    let mut u = Vec::with_capacity(n * n);
    for r in 0..n {
        for c in 0..n {
            let v: i64 = match r.cmp(&c) {
                core::cmp::Ordering::Equal => 1,
                core::cmp::Ordering::Less => rng.gen_range(-1..=1),
                core::cmp::Ordering::Greater => 0,
            };
            u.push(Rational::from_integer(v.into()));
        }
    }
    p.compose(&LinMap::new(n, n, u).expect("square")).expect("square")
}

/// A permutation matrix.
pub fn permutation(rng: &mut impl Rng, n: Dim) -> LinMap {
    let mut perm: Vec<usize> = (0..n).collect();
    for i in (1..n).rev() {
        let j = rng.gen_range(0..=i);
        perm.swap(i, j);
    }
    LinMap::from_rows(
        n,
        (0..n)
            .map(|r| (0..n).map(|c| Rational::from_integer(i64::from(perm[r] == c).into())).collect())
            .collect(),
    )
    .expect("square")
}

/// Which constructors random terms may use.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TermFlavor {
    /// Ring operations, linear maps and constants.
    Polynomial { max_degree: u32 },
    /// Polynomial constructors plus `sin`, `cos`, `exp`.
    Smooth,
}

/// A random well-typed term `dom → cod`. `depth` bounds the nesting.
pub fn term(rng: &mut impl Rng, dom: Dim, cod: Dim, depth: u32, flavor: TermFlavor) -> Term {
    match flavor {
        TermFlavor::Polynomial { max_degree } => poly_term(rng, dom, cod, depth, max_degree.max(1)),
        TermFlavor::Smooth => smooth_term(rng, dom, cod, depth),
    }
}

fn leaf(rng: &mut impl Rng, dom: Dim, cod: Dim) -> Term {
    let choice = rng.gen_range(0..10);
    if choice < 2 && cod <= dom && dom > 0 {
        let lo = rng.gen_range(0..=dom - cod);
        return Term::proj(dom, lo, cod).expect("in range");
    }
    if choice == 2 && dom == cod {
        return Term::id(dom);
    }
    if choice == 3 {
        let c: Vec<Rational> = (0..cod).map(|_| rational(rng)).collect();
        return Term::add(Term::linear(matrix(rng, cod, dom)), Term::constant_on(dom, c)).expect("typed");
    }
    Term::linear(matrix(rng, cod, dom))
}

fn split(rng: &mut impl Rng, cod: Dim) -> Vec<Dim> {
    let mut parts = Vec::new();
    let mut left = cod;
    while left > 0 {
        let k = rng.gen_range(1..=left);
        parts.push(k);
        left -= k;
    }
    parts
}

/// Degree-bounded polynomial term.
fn poly_term(rng: &mut impl Rng, dom: Dim, cod: Dim, depth: u32, degree: u32) -> Term {
    if depth == 0 || degree == 0 {
        return if degree == 0 {
            Term::constant_on(dom, (0..cod).map(|_| rational(rng)).collect())
        } else {
            leaf(rng, dom, cod)
        };
    }
    match rng.gen_range(0..6) {
        0 => Term::add(poly_term(rng, dom, cod, depth - 1, degree), poly_term(rng, dom, cod, depth - 1, degree))
            .expect("typed"),
        1 => Term::neg(poly_term(rng, dom, cod, depth - 1, degree)),
        2 if cod > 1 => {
            let parts = split(rng, cod).into_iter().map(|k| poly_term(rng, dom, k, depth - 1, degree)).collect();
            Term::pair(parts).expect("typed")
        }
        3 if degree >= 2 => {
            // componentwise product of two lower-degree maps, spread to cod
            let d1 = rng.gen_range(1..degree);
            let d2 = degree - d1;
            let a = poly_term(rng, dom, 1, depth - 1, d1);
            let b = poly_term(rng, dom, 1, depth - 1, d2);
            let prod = build::times(a, b);
            spread(rng, prod, cod)
        }
        4 => {
            // composition: degree multiplies, so one side is linear
            let mid = rng.gen_range(1..=3);
            if rng.gen_bool(0.5) {
                let inner = leaf(rng, dom, mid);
                Term::comp(poly_term(rng, mid, cod, depth - 1, degree), inner).expect("typed")
            } else {
                let inner = poly_term(rng, dom, mid, depth - 1, degree);
                Term::comp(leaf(rng, mid, cod), inner).expect("typed")
            }
        }
        _ => leaf(rng, dom, cod),
    }
}

/// `cod` copies-with-weights of a scalar term, plus linear noise.
fn spread(rng: &mut impl Rng, scalar: Term, cod: Dim) -> Term {
    let dom = scalar.dom();
    if cod == 1 {
        return scalar;
    }
    let weights = matrix(rng, cod, 1);
    let lifted = Term::comp(Term::linear(weights), scalar).expect("typed");
    Term::add(lifted, Term::linear(matrix(rng, cod, dom))).expect("typed")
}

/// Smooth term mixing ring operations with `sin`, `cos`, `exp`. Arguments
/// of `exp` pass through `sin` or `cos` first.
fn smooth_term(rng: &mut impl Rng, dom: Dim, cod: Dim, depth: u32) -> Term {
    if depth == 0 {
        return leaf(rng, dom, cod);
    }
    match rng.gen_range(0..8) {
        0 => Term::add(smooth_term(rng, dom, cod, depth - 1), smooth_term(rng, dom, cod, depth - 1)).expect("typed"),
        1 => Term::neg(smooth_term(rng, dom, cod, depth - 1)),
        2 if cod > 1 => {
            let parts = split(rng, cod).into_iter().map(|k| smooth_term(rng, dom, k, depth - 1)).collect();
            Term::pair(parts).expect("typed")
        }
        3 | 4 => {
            let inner = smooth_term(rng, dom, 1, depth - 1);
            let applied = match rng.gen_range(0..3) {
                0 => Term::comp(Term::sin(), inner),
                1 => Term::comp(Term::cos(), inner),
                // exp of a bounded argument, so nested exponentials stay in float range
                _ => {
                    let bound = if rng.gen_bool(0.5) { Term::sin() } else { Term::cos() };
                    Term::comp(Term::exp(), Term::comp(bound, inner).expect("typed"))
                }
            };
            spread(rng, applied.expect("typed"), cod)
        }
        5 => {
            let a = smooth_term(rng, dom, 1, depth - 1);
            let b = smooth_term(rng, dom, 1, depth - 1);
            spread(rng, build::times(a, b), cod)
        }
        6 => {
            let mid = rng.gen_range(1..=3);
            let inner = smooth_term(rng, dom, mid, depth - 1);
            Term::comp(smooth_term(rng, mid, cod, depth - 1), inner).expect("typed")
        }
        _ => leaf(rng, dom, cod),
    }
}

/// A random positive semidefinite quadratic objective `dom → 1`:
/// `Σ_i (⟨a_i, x⟩ − c_i)²` over a couple of random rows.
pub fn quadratic(rng: &mut impl Rng, dom: Dim) -> Term {
    let rows = rng.gen_range(1..=2usize.max(dom));
    let mut acc: Option<Term> = None;
    for _ in 0..rows {
        let a = Term::linear(integer_matrix(rng, 1, dom));
        let c = Term::constant_on(dom, vec![rational(rng)]);
        let r = build::square(build::minus(a, c));
        acc = Some(match acc {
            None => r,
            Some(prev) => build::plus(prev, r),
        });
    }
    s::add(acc.expect("at least one row"), Term::zero(dom, 1))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn generated_terms_have_requested_types() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..200 {
            let dom = rng.gen_range(0..4);
            let cod = rng.gen_range(1..4);
            let t = term(&mut rng, dom, cod, 3, TermFlavor::Smooth);
            assert_eq!((t.dom(), t.cod()), (dom, cod));
            let p = term(&mut rng, dom, cod, 3, TermFlavor::Polynomial { max_degree: 4 });
            assert_eq!((p.dom(), p.cod()), (dom, cod));
            assert!(!p.is_smooth());
        }
    }

    #[test]
    fn polynomial_degree_is_bounded() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for _ in 0..100 {
            let p = term(&mut rng, 3, 1, 4, TermFlavor::Polynomial { max_degree: 4 });
            let canon = crate::poly::poly_canonical(&p).unwrap();
            assert!(canon[0].degree() <= 4, "{p}");
        }
    }

    #[test]
    fn invertible_matrices_are_invertible() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for n in 0..5 {
            assert!(invertible_matrix(&mut rng, n).is_invertible());
            assert!(permutation(&mut rng, n).is_invertible());
        }
    }
}
