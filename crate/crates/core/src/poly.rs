//! Fully expanded polynomials: the canonical form of a polynomial term.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

use num_traits::{One, Zero};

use crate::scalar::Rational;
use crate::term::{Node, Term};

/// Polynomial in `nvars` variables: exponent tuple ↦ nonzero coefficient.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Poly {
    nvars: usize,
    terms: BTreeMap<Vec<u32>, Rational>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
pub enum PolyError {
    #[error("smooth primitive `{0}` has no polynomial form")]
    SmoothPrimitive(&'static str),
}

impl Poly {
    pub fn zero(nvars: usize) -> Poly {
        Poly { nvars, terms: BTreeMap::new() }
    }

    pub fn constant(nvars: usize, c: Rational) -> Poly {
        let mut p = Poly::zero(nvars);
        p.add_term(vec![0; nvars], c);
        p
    }

    pub fn var(nvars: usize, i: usize) -> Poly {
        let mut e = vec![0; nvars];
        e[i] = 1;
        let mut p = Poly::zero(nvars);
        p.add_term(e, Rational::one());
        p
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> &BTreeMap<Vec<u32>, Rational> {
        &self.terms
    }

    pub fn coefficient(&self, exponents: &[u32]) -> Rational {
        self.terms.get(exponents).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn degree(&self) -> u32 {
        self.terms.keys().map(|e| e.iter().sum()).max().unwrap_or(0)
    }

    fn add_term(&mut self, exponents: Vec<u32>, c: Rational) {
        if c.is_zero() {
            return;
        }
        let entry = self.terms.entry(exponents).or_insert_with(Rational::zero);
        *entry += c;
        if entry.is_zero() {
            self.terms.retain(|_, v| !v.is_zero());
        }
    }

    pub fn add(&self, other: &Poly) -> Poly {
        let mut out = self.clone();
        for (e, c) in &other.terms {
            out.add_term(e.clone(), c.clone());
        }
        out
    }

    pub fn neg(&self) -> Poly {
        Poly { nvars: self.nvars, terms: self.terms.iter().map(|(e, c)| (e.clone(), -c)).collect() }
    }

    pub fn mul(&self, other: &Poly) -> Poly {
        let mut out = Poly::zero(self.nvars);
        for (ea, ca) in &self.terms {
            for (eb, cb) in &other.terms {
                let e = ea.iter().zip(eb).map(|(a, b)| a + b).collect();
                out.add_term(e, ca * cb);
            }
        }
        out
    }

    pub fn scale(&self, k: &Rational) -> Poly {
        let mut out = Poly::zero(self.nvars);
        for (e, c) in &self.terms {
            out.add_term(e.clone(), c * k);
        }
        out
    }

    pub fn pow(&self, k: u32) -> Poly {
        let mut out = Poly::constant(self.nvars, Rational::one());
        for _ in 0..k {
            out = out.mul(self);
        }
        out
    }

    /// `self(args[0], …, args[nvars-1])`; every argument shares one variable count.
    pub fn substitute(&self, args: &[Poly], nvars: usize) -> Poly {
        assert_eq!(args.len(), self.nvars, "one argument per variable");
        let mut powers: Vec<Vec<Poly>> = args.iter().map(|a| vec![Poly::constant(nvars, Rational::one()), a.clone()]).collect();
        let mut out = Poly::zero(nvars);
        for (e, c) in &self.terms {
            let mut m = Poly::constant(nvars, c.clone());
            for (i, &k) in e.iter().enumerate() {
                while powers[i].len() <= k as usize {
                    let next = powers[i].last().expect("nonempty").mul(&args[i]);
                    powers[i].push(next);
                }
                if k > 0 {
                    m = m.mul(&powers[i][k as usize]);
                }
            }
            out = out.add(&m);
        }
        out
    }

    /// Formal partial derivative in variable `i`.
    pub fn partial(&self, i: usize) -> Poly {
        let mut out = Poly::zero(self.nvars);
        for (e, c) in &self.terms {
            if e[i] == 0 {
                continue;
            }
            let mut d = e.clone();
            d[i] -= 1;
            out.add_term(d, c * Rational::from_integer(e[i].into()));
        }
        out
    }

    pub fn eval(&self, x: &[Rational]) -> Rational {
        let mut acc = Rational::zero();
        for (e, c) in &self.terms {
            let mut m = c.clone();
            for (xi, &k) in x.iter().zip(e) {
                for _ in 0..k {
                    m *= xi;
                }
            }
            acc += m;
        }
        acc
    }

    /// Appends `extra` fresh variables after the existing ones.
    pub fn extend_vars(&self, extra: usize) -> Poly {
        Poly {
            nvars: self.nvars + extra,
            terms: self
                .terms
                .iter()
                .map(|(e, c)| {
                    let mut e = e.clone();
                    e.resize(self.nvars + extra, 0);
                    (e, c.clone())
                })
                .collect(),
        }
    }
}

/// Canonical form of a polynomial term: one expanded polynomial per output
/// coordinate, in `t.dom()` variables.
pub fn poly_canonical(t: &Term) -> Result<Vec<Poly>, PolyError> {
    let n = t.dom();
    let out = match t.node() {
        Node::Id => (0..n).map(|i| Poly::var(n, i)).collect(),
        Node::Proj { lo } => (*lo..*lo + t.cod()).map(|i| Poly::var(n, i)).collect(),
        Node::Pair(parts) => {
            let mut out = Vec::with_capacity(t.cod());
            for p in parts {
                out.extend(poly_canonical(p)?);
            }
            out
        }
        Node::Comp { outer, inner } => {
            let inner_p = poly_canonical(inner)?;
            poly_canonical(outer)?.iter().map(|p| p.substitute(&inner_p, n)).collect()
        }
        Node::Zero => vec![Poly::zero(n); t.cod()],
        Node::Add(f, g) => {
            let (a, b) = (poly_canonical(f)?, poly_canonical(g)?);
            a.iter().zip(&b).map(|(x, y)| x.add(y)).collect()
        }
        Node::Neg(f) => poly_canonical(f)?.iter().map(Poly::neg).collect(),
        Node::Linear(m) => (0..m.rows())
            .map(|r| {
                let mut p = Poly::zero(n);
                for (c, a) in m.row(r).iter().enumerate() {
                    let mut e = vec![0; n];
                    e[c] = 1;
                    p.add_term(e, a.clone());
                }
                p
            })
            .collect(),
        Node::Const(c) => c.exact().iter().map(|q| Poly::constant(n, q.clone())).collect(),
        Node::One => vec![Poly::constant(n, Rational::one()); t.cod()],
        Node::Mul => vec![Poly::var(2, 0).mul(&Poly::var(2, 1))],
        Node::Sin => return Err(PolyError::SmoothPrimitive("sin")),
        Node::Cos => return Err(PolyError::SmoothPrimitive("cos")),
        Node::Exp => return Err(PolyError::SmoothPrimitive("exp")),
    };
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sexpr::parse_term;
    use crate::term::{build, DomainTag};

    fn r(n: i64) -> Rational {
        Rational::from_integer(n.into())
    }

    #[test]
    fn product_of_projections() {
        let t = parse_term("(comp (mul) (pair (proj 2 0 1) (proj 2 1 1)))", DomainTag::PolyOverRationals).unwrap();
        let p = poly_canonical(&t).unwrap();
        assert_eq!(p.len(), 1);
        assert_eq!(p[0].terms().len(), 1);
        assert_eq!(p[0].coefficient(&[1, 1]), r(1));
    }

    #[test]
    fn additive_inverse_cancels() {
        let f = build::times(build::var(2, 0), build::var(2, 1));
        let t = build::minus(f.clone(), f);
        assert!(poly_canonical(&t).unwrap()[0].is_zero());
    }

    #[test]
    fn distributivity_example() {
        // (x1 + x2) * x1 = x1^2 + x1 x2
        let sum = build::plus(build::var(2, 0), build::var(2, 1));
        let t = build::times(sum, build::var(2, 0));
        let p = &poly_canonical(&t).unwrap()[0];
        assert_eq!(p.terms().len(), 2);
        assert_eq!(p.coefficient(&[2, 0]), r(1));
        assert_eq!(p.coefficient(&[1, 1]), r(1));
    }

    #[test]
    fn smooth_terms_are_rejected() {
        assert_eq!(poly_canonical(&crate::term::Term::sin()), Err(PolyError::SmoothPrimitive("sin")));
    }

    #[test]
    fn partial_and_eval() {
        // p = 3 x0^2 x1 - x1 + 2
        let x0 = Poly::var(2, 0);
        let x1 = Poly::var(2, 1);
        let p = x0.pow(2).mul(&x1).scale(&r(3)).add(&x1.neg()).add(&Poly::constant(2, r(2)));
        assert_eq!(p.degree(), 3);
        assert_eq!(p.eval(&[r(2), r(5)]), r(57));
        let d0 = p.partial(0);
        assert_eq!(d0.eval(&[r(2), r(5)]), r(60));
        let d1 = p.partial(1);
        assert_eq!(d1.eval(&[r(2), r(5)]), r(11));
        let q = p.substitute(&[x1.clone(), x0.clone()], 2);
        assert_eq!(q.eval(&[r(5), r(2)]), r(57));
        assert_eq!(p.extend_vars(1).nvars(), 3);
    }
}
