//! Semantics-preserving term rewriting.
//!
//! The smart constructors here assume their arguments are already simplified
//! and apply local rules while building: unit and zero laws, fusion of
//! adjacent linear maps and projections, projection out of pairs, and
//! merging of contiguous pair parts. Composition is kept right-nested so
//! fusion rules see adjacent factors. [`simplify`] rebuilds a term bottom-up
//! through them and iterates to a fixed point.

use alloc::vec;
use alloc::vec::Vec;

use crate::linmap::LinMap;
use crate::scalar::Dim;
use crate::term::{Node, Term};

/// Simplifies to a fixed point; the result evaluates identically.
pub fn simplify(t: &Term) -> Term {
    let mut cur = rebuild(t);
    loop {
        let next = rebuild(&cur);
        if next == cur {
            return next;
        }
        cur = next;
    }
}

fn rebuild(t: &Term) -> Term {
    match t.node() {
        Node::Pair(parts) => pair(parts.iter().map(rebuild).collect()),
        Node::Comp { outer, inner } => comp(rebuild(outer), rebuild(inner)),
        Node::Add(f, g) => add(rebuild(f), rebuild(g)),
        Node::Neg(f) => neg(rebuild(f)),
        Node::Linear(m) => linear(m.clone()),
        Node::Proj { lo } => proj(t.dom(), *lo, t.cod()),
        _ => t.clone(),
    }
}

pub(crate) fn proj(src: Dim, lo: usize, len: Dim) -> Term {
    if lo == 0 && len == src {
        Term::id(src)
    } else if len == 0 {
        Term::zero(src, 0)
    } else {
        Term::proj(src, lo, len).expect("projection in range")
    }
}

pub(crate) fn linear(m: LinMap) -> Term {
    if m.is_identity() {
        Term::id(m.rows())
    } else if m.is_zero() {
        Term::zero(m.cols(), m.rows())
    } else {
        Term::linear(m)
    }
}

/// True for terms that are linear maps syntactically, so they preserve zero.
fn is_structurally_linear(t: &Term) -> bool {
    match t.node() {
        Node::Id | Node::Proj { .. } | Node::Zero | Node::Linear(_) => true,
        Node::Neg(f) => is_structurally_linear(f),
        Node::Add(f, g) => is_structurally_linear(f) && is_structurally_linear(g),
        Node::Pair(parts) => parts.iter().all(is_structurally_linear),
        Node::Comp { outer, inner } => is_structurally_linear(outer) && is_structurally_linear(inner),
        _ => false,
    }
}

fn as_matrix(t: &Term) -> Option<LinMap> {
    match t.node() {
        Node::Linear(m) => Some(m.clone()),
        Node::Proj { lo } => Some(LinMap::projection(t.dom(), *lo, t.cod())),
        Node::Id => Some(LinMap::identity(t.dom())),
        Node::Zero => Some(LinMap::zero(t.cod(), t.dom())),
        _ => None,
    }
}

/// `outer ∘ inner` with local rewriting.
pub(crate) fn comp(outer: Term, inner: Term) -> Term {
    debug_assert_eq!(outer.dom(), inner.cod());
    let (dom, cod) = (inner.dom(), outer.cod());
    if matches!(outer.node(), Node::Id) {
        return inner;
    }
    if matches!(inner.node(), Node::Id) {
        return outer;
    }
    if matches!(outer.node(), Node::Zero) {
        return Term::zero(dom, cod);
    }
    if matches!(inner.node(), Node::Zero) && is_structurally_linear(&outer) {
        return Term::zero(dom, cod);
    }
    if let Node::Comp { outer: a, inner: b } = outer.node() {
        let rest = comp(b.clone(), inner);
        return comp(a.clone(), rest);
    }
    if let Node::Neg(f) = outer.node() {
        return neg(comp(f.clone(), inner));
    }
    if let Some(t) = fuse(&outer, &inner) {
        return t;
    }
    if let Node::Comp { outer: head, inner: rest } = inner.node() {
        if let Some(t) = fuse(&outer, head) {
            return comp(t, rest.clone());
        }
    }
    Term::make(Node::Comp { outer, inner }, dom, cod)
}

/// Rewrites for two adjacent factors, if any applies.
fn fuse(outer: &Term, inner: &Term) -> Option<Term> {
    match (outer.node(), inner.node()) {
        (Node::Proj { lo: a }, Node::Proj { lo: b }) => Some(proj(inner.dom(), a + b, outer.cod())),
        (Node::Proj { lo }, Node::Pair(parts)) => select_parts(parts, *lo, outer.cod()),
        (Node::Proj { lo }, Node::Linear(m)) => Some(linear(m.row_block(*lo, outer.cod()))),
        (Node::Linear(a), _) => {
            let b = as_matrix(inner)?;
            Some(linear(a.compose(&b).expect("composable")))
        }
        (Node::Mul, Node::Pair(parts)) => {
            let zero_factor = parts.iter().any(|p| matches!(p.node(), Node::Zero) && p.cod() > 0)
                && parts.iter().map(Term::cod).all(|c| c <= 1);
            zero_factor.then(|| Term::zero(inner.dom(), 1))
        }
        _ => None,
    }
}

/// The parts of a pair covering exactly the output slice `lo..lo+len`.
fn select_parts(parts: &[Term], lo: usize, len: usize) -> Option<Term> {
    let mut offset = 0;
    let mut chosen = Vec::new();
    for p in parts {
        let end = offset + p.cod();
        if offset >= lo && end <= lo + len {
            chosen.push(p.clone());
        } else if end > lo && offset < lo + len {
            // part straddles the boundary: project inside it when the slice lies within
            if offset <= lo && lo + len <= end && chosen.is_empty() {
                return Some(comp(proj(p.cod(), lo - offset, len), p.clone()));
            }
            return None;
        }
        offset = end;
    }
    if chosen.iter().map(Term::cod).sum::<usize>() != len || chosen.is_empty() {
        return None;
    }
    Some(pair(chosen))
}

pub(crate) fn add(f: Term, g: Term) -> Term {
    debug_assert_eq!((f.dom(), f.cod()), (g.dom(), g.cod()));
    if matches!(f.node(), Node::Zero) {
        return g;
    }
    if matches!(g.node(), Node::Zero) {
        return f;
    }
    if let (Some(a), Some(b)) = (as_matrix(&f), as_matrix(&g)) {
        return linear(a.add(&b).expect("same shape"));
    }
    if let Node::Neg(h) = g.node() {
        if *h == f {
            return Term::zero(f.dom(), f.cod());
        }
    }
    if let Node::Neg(h) = f.node() {
        if *h == g {
            return Term::zero(f.dom(), f.cod());
        }
    }
    let (dom, cod) = (f.dom(), f.cod());
    Term::make(Node::Add(f, g), dom, cod)
}

pub(crate) fn neg(f: Term) -> Term {
    match f.node() {
        Node::Neg(g) => g.clone(),
        Node::Zero => f,
        Node::Linear(m) => linear(m.neg()),
        _ => Term::neg(f),
    }
}

/// Pairing of parts sharing a domain, merging contiguous projections and
/// adjacent matrix parts.
pub(crate) fn pair(parts: Vec<Term>) -> Term {
    debug_assert!(!parts.is_empty());
    let dom = parts[0].dom();
    let mut merged: Vec<Term> = Vec::with_capacity(parts.len());
    for p in parts.into_iter().flat_map(flatten_pair) {
        if p.cod() == 0 {
            continue;
        }
        if let Some(last) = merged.last() {
            if let Some(m) = merge_parts(last, &p) {
                merged.pop();
                merged.push(m);
                continue;
            }
        }
        merged.push(p);
    }
    match merged.len() {
        0 => Term::zero(dom, 0),
        1 => merged.pop().expect("one part"),
        _ => Term::pair(merged).expect("parts share a domain"),
    }
}

fn flatten_pair(t: Term) -> Vec<Term> {
    match t.node() {
        Node::Pair(parts) => parts.clone(),
        _ => vec![t],
    }
}

fn merge_parts(a: &Term, b: &Term) -> Option<Term> {
    match (a.node(), b.node()) {
        (Node::Proj { lo: la }, Node::Proj { lo: lb }) if la + a.cod() == *lb => {
            Some(proj(a.dom(), *la, a.cod() + b.cod()))
        }
        (Node::Id, Node::Proj { .. }) | (Node::Proj { .. }, Node::Id) => None,
        (Node::Zero, Node::Zero) => Some(Term::zero(a.dom(), a.cod() + b.cod())),
        (Node::Linear(_), _) | (_, Node::Linear(_)) => {
            let (ma, mb) = (as_matrix(a)?, as_matrix(b)?);
            Some(linear(ma.vstack(&mb).expect("same domain")))
        }
        _ => None,
    }
}
