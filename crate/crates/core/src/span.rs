//! Spans `X ← N → Y` of exact linear maps: the shape shared by open
//! objectives and open dynamical systems.

use alloc::vec::Vec;

use rand::Rng;

use crate::linmap::{pullback, LinError, LinMap, PullbackData};
use crate::scalar::{Dim, Rational};
use crate::term::{DomainTag, TypeError};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SpanError {
    #[error("span legs disagree on the apex: left has {left} columns, right has {right}")]
    Legs { left: Dim, right: Dim },
    #[error("boundary mismatch: expected dimension {expected}, found {found}")]
    Boundary { expected: Dim, found: Dim },
    #[error("domain mismatch: {left:?} vs {right:?}")]
    Tag { left: DomainTag, right: DomainTag },
    #[error("decoration has type {dom} → {cod}, apex is {apex}")]
    Decoration { dom: Dim, cod: Dim, apex: Dim },
    #[error("decoration rejected by the domain: {0}")]
    Type(#[from] TypeError),
    #[error(transparent)]
    Lin(#[from] LinError),
}

/// The Frobenius generators every boundary object carries.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Generator {
    /// δ: X → X ⊗ X
    Copy,
    /// μ: X ⊗ X → X
    Merge,
    /// η: I → X
    Unit,
    /// ε: X → I
    Counit,
}

impl Generator {
    pub fn name(self) -> &'static str {
        match self {
            Generator::Copy => "copy",
            Generator::Merge => "merge",
            Generator::Unit => "unit",
            Generator::Counit => "counit",
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            Generator::Copy => "δ",
            Generator::Merge => "μ",
            Generator::Unit => "η",
            Generator::Counit => "ε",
        }
    }

    pub fn parse(name: &str) -> Option<Generator> {
        match name {
            "copy" | "delta" | "δ" => Some(Generator::Copy),
            "merge" | "mu" | "μ" => Some(Generator::Merge),
            "unit" | "eta" | "η" => Some(Generator::Unit),
            "counit" | "epsilon" | "ε" => Some(Generator::Counit),
            _ => None,
        }
    }

    pub const ALL: [Generator; 4] = [Generator::Copy, Generator::Merge, Generator::Unit, Generator::Counit];
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Span {
    left: LinMap,
    right: LinMap,
}

impl Span {
    pub fn new(left: LinMap, right: LinMap) -> Result<Span, SpanError> {
        if left.cols() != right.cols() {
            return Err(SpanError::Legs { left: left.cols(), right: right.cols() });
        }
        Ok(Span { left, right })
    }

    pub fn left(&self) -> &LinMap {
        &self.left
    }

    pub fn right(&self) -> &LinMap {
        &self.right
    }

    pub fn apex(&self) -> Dim {
        self.left.cols()
    }

    pub fn source(&self) -> Dim {
        self.left.rows()
    }

    pub fn target(&self) -> Dim {
        self.right.rows()
    }

    pub fn identity(x: Dim) -> Span {
        Span { left: LinMap::identity(x), right: LinMap::identity(x) }
    }

    /// The span underlying a Frobenius generator on `x`; its apex is `x`.
    pub fn generator(kind: Generator, x: Dim) -> Span {
        let (left, right) = match kind {
            Generator::Copy => (LinMap::identity(x), LinMap::copy(x)),
            Generator::Merge => (LinMap::copy(x), LinMap::identity(x)),
            Generator::Unit => (LinMap::discard(x), LinMap::identity(x)),
            Generator::Counit => (LinMap::identity(x), LinMap::discard(x)),
        };
        Span { left, right }
    }

    /// Composite `other ∘ self` by pullback over the shared boundary, along
    /// with the pullback data used to restrict decorations.
    pub fn compose(&self, other: &Span) -> Result<(Span, PullbackData), SpanError> {
        if self.target() != other.source() {
            return Err(SpanError::Boundary { expected: self.target(), found: other.source() });
        }
        let pb = pullback(&self.right, &other.left)?;
        let left = self.left.compose(&pb.b0)?;
        let right = other.right.compose(&pb.b1)?;
        Ok((Span { left, right }, pb))
    }

    pub fn tensor(&self, other: &Span) -> Span {
        Span { left: self.left.block_diag(&other.left), right: self.right.block_diag(&other.right) }
    }

    /// Candidate apex isomorphisms `u: other.apex → self.apex` with
    /// `self.left ∘ u == other.left` and `self.right ∘ u == other.right`.
    ///
    /// When the legs are jointly injective there is at most one. Otherwise
    /// the particular solution, the identity (if it fits) and `extra` random
    /// perturbations along the joint kernel are offered. Only invertible
    /// candidates are returned.
    pub fn apex_isos(&self, other: &Span, rng: &mut impl Rng, extra: usize) -> Vec<LinMap> {
        if self.apex() != other.apex() || self.source() != other.source() || self.target() != other.target() {
            return Vec::new();
        }
        let n = self.apex();
        let a = self.left.vstack(&self.right).expect("legs share the apex");
        let b = other.left.vstack(&other.right).expect("legs share the apex");
        let Ok(Some((particular, kernel))) = a.solve_matrix(&b) else {
            return Vec::new();
        };
        let mut candidates = Vec::new();
        let offer = |u: LinMap, out: &mut Vec<LinMap>| {
            if u.is_invertible() && !out.contains(&u) {
                out.push(u);
            }
        };
        offer(particular.clone(), &mut candidates);
        if kernel.cols() > 0 {
            if a == b {
                offer(LinMap::identity(n), &mut candidates);
            }
            for _ in 0..extra {
                let data = (0..kernel.cols() * n).map(|_| Rational::from_integer(rng.gen_range(-2i64..=2).into())).collect();
                let c = LinMap::new(kernel.cols(), n, data).expect("shape");
                let u = particular.add(&kernel.compose(&c).expect("shape")).expect("shape");
                offer(u, &mut candidates);
            }
        }
        candidates
    }
}

pub(crate) fn same_tag(a: DomainTag, b: DomainTag) -> Result<DomainTag, SpanError> {
    if a == b {
        Ok(a)
    } else {
        Err(SpanError::Tag { left: a, right: b })
    }
}
