//! Exact rational matrices: the linear maps along which open systems share
//! variables.
//!
//! A `LinMap` with `rows` m and `cols` n is a morphism n → m. Dagger is the
//! transpose, the monoidal product is the block diagonal, and finite limits
//! are computed by exact elimination.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::scalar::{Coefficients, Dim, Rational};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum LinError {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimMismatch { expected: usize, found: usize },
    #[error("matrix data has {found} entries, expected {expected}")]
    BadShape { expected: usize, found: usize },
    #[error("ragged matrix rows")]
    Ragged,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LinMap {
    rows: Dim,
    cols: Dim,
    coeffs: Coefficients,
}

impl LinMap {
    /// Row-major constructor.
    pub fn new(rows: Dim, cols: Dim, entries: Vec<Rational>) -> Result<Self, LinError> {
        if entries.len() != rows * cols {
            return Err(LinError::BadShape { expected: rows * cols, found: entries.len() });
        }
        Ok(LinMap { rows, cols, coeffs: Coefficients::new(entries) })
    }

    /// Builds from explicit rows. `cols` is needed to describe maps with no rows.
    pub fn from_rows(cols: Dim, rows: Vec<Vec<Rational>>) -> Result<Self, LinError> {
        if rows.iter().any(|r| r.len() != cols) {
            return Err(LinError::Ragged);
        }
        let n = rows.len();
        LinMap::new(n, cols, rows.into_iter().flatten().collect())
    }

    pub fn from_ints(rows: Dim, cols: Dim, entries: &[i64]) -> Result<Self, LinError> {
        LinMap::new(rows, cols, entries.iter().map(|&v| Rational::from_integer(v.into())).collect())
    }

    fn from_fn(rows: Dim, cols: Dim, f: impl Fn(usize, usize) -> Rational) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                data.push(f(r, c));
            }
        }
        LinMap { rows, cols, coeffs: Coefficients::new(data) }
    }

    pub fn zero(rows: Dim, cols: Dim) -> Self {
        LinMap::from_fn(rows, cols, |_, _| Rational::zero())
    }

    pub fn identity(n: Dim) -> Self {
        LinMap::from_fn(n, n, |r, c| indicator(r == c))
    }

    /// The projection of `total` coordinates onto the slice `lo..lo+len`.
    pub fn projection(total: Dim, lo: usize, len: Dim) -> Self {
        assert!(lo + len <= total, "projection slice out of range");
        LinMap::from_fn(len, total, |r, c| indicator(c == lo + r))
    }

    /// The injection of `len` coordinates into slot `lo..lo+len` of `total`.
    pub fn injection(total: Dim, lo: usize, len: Dim) -> Self {
        LinMap::projection(total, lo, len).dagger()
    }

    /// The copy map Δ: n → n + n.
    pub fn copy(n: Dim) -> Self {
        LinMap::from_fn(2 * n, n, |r, c| indicator(r % n == c))
    }

    /// The unique map n → 0.
    pub fn discard(n: Dim) -> Self {
        LinMap::zero(0, n)
    }

    pub fn diagonal(entries: Vec<Rational>) -> Self {
        let n = entries.len();
        LinMap::from_fn(n, n, |r, c| if r == c { entries[r].clone() } else { Rational::zero() })
    }

    pub fn rows(&self) -> Dim {
        self.rows
    }

    pub fn cols(&self) -> Dim {
        self.cols
    }

    pub fn entries(&self) -> &[Rational] {
        self.coeffs.exact()
    }

    pub fn coefficients(&self) -> &Coefficients {
        &self.coeffs
    }

    pub fn get(&self, r: usize, c: usize) -> &Rational {
        &self.coeffs.exact()[r * self.cols + c]
    }

    pub fn row(&self, r: usize) -> &[Rational] {
        &self.coeffs.exact()[r * self.cols..(r + 1) * self.cols]
    }

    pub fn to_rows(&self) -> Vec<Vec<Rational>> {
        (0..self.rows).map(|r| self.row(r).to_vec()).collect()
    }

    pub fn is_identity(&self) -> bool {
        self.rows == self.cols
            && (0..self.rows).all(|r| (0..self.cols).all(|c| *self.get(r, c) == indicator(r == c)))
    }

    pub fn is_zero(&self) -> bool {
        self.entries().iter().all(Zero::is_zero)
    }

    pub fn is_integral(&self) -> bool {
        self.entries().iter().all(crate::scalar::is_integral)
    }

    /// `self ∘ inner`, the matrix product.
    pub fn compose(&self, inner: &LinMap) -> Result<LinMap, LinError> {
        if self.cols != inner.rows {
            return Err(LinError::DimMismatch { expected: self.cols, found: inner.rows });
        }
        let mut data = Vec::with_capacity(self.rows * inner.cols);
        for r in 0..self.rows {
            for c in 0..inner.cols {
                let mut acc = Rational::zero();
                for k in 0..self.cols {
                    let a = self.get(r, k);
                    if !a.is_zero() {
                        acc += a * inner.get(k, c);
                    }
                }
                data.push(acc);
            }
        }
        LinMap::new(self.rows, inner.cols, data)
    }

    pub fn add(&self, other: &LinMap) -> Result<LinMap, LinError> {
        self.check_same_shape(other)?;
        let data = self.entries().iter().zip(other.entries()).map(|(a, b)| a + b).collect();
        LinMap::new(self.rows, self.cols, data)
    }

    pub fn neg(&self) -> LinMap {
        let data = self.entries().iter().map(|a| -a).collect();
        LinMap { rows: self.rows, cols: self.cols, coeffs: Coefficients::new(data) }
    }

    pub fn scale(&self, k: &Rational) -> LinMap {
        let data = self.entries().iter().map(|a| a * k).collect();
        LinMap { rows: self.rows, cols: self.cols, coeffs: Coefficients::new(data) }
    }

    /// Transpose.
    pub fn dagger(&self) -> LinMap {
        LinMap::from_fn(self.cols, self.rows, |r, c| self.get(c, r).clone())
    }

    /// The product map `self × other`.
    pub fn block_diag(&self, other: &LinMap) -> LinMap {
        let (r0, c0) = (self.rows, self.cols);
        LinMap::from_fn(r0 + other.rows, c0 + other.cols, |r, c| match (r < r0, c < c0) {
            (true, true) => self.get(r, c).clone(),
            (false, false) => other.get(r - r0, c - c0).clone(),
            _ => Rational::zero(),
        })
    }

    /// Pairing ⟨self, other⟩: stacks rows. Both maps share a domain.
    pub fn vstack(&self, other: &LinMap) -> Result<LinMap, LinError> {
        if self.cols != other.cols {
            return Err(LinError::DimMismatch { expected: self.cols, found: other.cols });
        }
        let mut data = self.entries().to_vec();
        data.extend_from_slice(other.entries());
        LinMap::new(self.rows + other.rows, self.cols, data)
    }

    /// Copairing `[self | other]`: concatenates columns. Both maps share a codomain.
    pub fn hstack(&self, other: &LinMap) -> Result<LinMap, LinError> {
        if self.rows != other.rows {
            return Err(LinError::DimMismatch { expected: self.rows, found: other.rows });
        }
        let cols = self.cols + other.cols;
        Ok(LinMap::from_fn(self.rows, cols, |r, c| {
            if c < self.cols {
                self.get(r, c).clone()
            } else {
                other.get(r, c - self.cols).clone()
            }
        }))
    }

    /// Rows `lo..lo+len`, i.e. `π ∘ self` for the matching projection.
    pub fn row_block(&self, lo: usize, len: usize) -> LinMap {
        let data = self.entries()[lo * self.cols..(lo + len) * self.cols].to_vec();
        LinMap { rows: len, cols: self.cols, coeffs: Coefficients::new(data) }
    }

    /// Columns `lo..lo+len`, i.e. `self ∘ ι` for the matching injection.
    pub fn col_block(&self, lo: usize, len: usize) -> LinMap {
        LinMap::from_fn(self.rows, len, |r, c| self.get(r, lo + c).clone())
    }

    /// Matrix-vector product in any ring.
    pub fn apply<R: crate::scalar::Ring>(&self, x: &[R]) -> Result<Vec<R>, LinError> {
        if x.len() != self.cols {
            return Err(LinError::DimMismatch { expected: self.cols, found: x.len() });
        }
        let coeffs = R::coefficients(&self.coeffs);
        Ok((0..self.rows)
            .map(|r| {
                let row = &coeffs[r * self.cols..(r + 1) * self.cols];
                let exact = &self.entries()[r * self.cols..(r + 1) * self.cols];
                row.iter().zip(exact).zip(x).fold(R::zero(), |acc, ((a, q), xi)| {
                    if q.is_zero() {
                        acc
                    } else if q.is_one() {
                        acc.add(xi)
                    } else {
                        acc.add(&a.mul(xi))
                    }
                })
            })
            .collect())
    }

    fn check_same_shape(&self, other: &LinMap) -> Result<(), LinError> {
        if self.rows != other.rows {
            return Err(LinError::DimMismatch { expected: self.rows, found: other.rows });
        }
        if self.cols != other.cols {
            return Err(LinError::DimMismatch { expected: self.cols, found: other.cols });
        }
        Ok(())
    }

    pub fn rank(&self) -> usize {
        RowEchelon::of(self).pivots.len()
    }

    pub fn is_invertible(&self) -> bool {
        self.rows == self.cols && self.rank() == self.rows
    }

    /// Basis of `{x : self·x = 0}` as the columns of a `cols × nullity` map.
    ///
    /// Elimination runs over integers (rows are cleared of denominators and
    /// divided by their content after every update), so the returned basis
    /// vectors are integral and primitive.
    pub fn kernel_basis(&self) -> LinMap {
        let ech = RowEchelon::of(self);
        let n = self.cols;
        let is_pivot: Vec<bool> = {
            let mut p = vec![false; n];
            for &c in &ech.pivots {
                p[c] = true;
            }
            p
        };
        let free: Vec<usize> = (0..n).filter(|&c| !is_pivot[c]).collect();
        let mut basis: Vec<Vec<Rational>> = Vec::with_capacity(free.len());
        for &f in &free {
            // scale so every pivot divides evenly
            let scale = ech
                .pivots
                .iter()
                .enumerate()
                .filter(|(k, _)| !ech.rows[*k][f].is_zero())
                .fold(BigInt::one(), |l, (k, &pc)| l.lcm(&ech.rows[k][pc].abs()));
            let mut v = vec![BigInt::zero(); n];
            v[f] = scale.clone();
            for (k, &pc) in ech.pivots.iter().enumerate() {
                let a = &ech.rows[k][f];
                if !a.is_zero() {
                    v[pc] = -(a * &scale) / &ech.rows[k][pc];
                }
            }
            let content = v.iter().fold(BigInt::zero(), |g, x| g.gcd(x));
            basis.push(
                v.into_iter()
                    .map(|x| Rational::from_integer(if content.is_zero() { x } else { x / &content }))
                    .collect(),
            );
        }
        let k = basis.len();
        LinMap::from_fn(n, k, |r, c| basis[c][r].clone())
    }

    /// Exact solution of `self · x = b`.
    pub fn solve_exact(&self, b: &[Rational]) -> Result<Solution, LinError> {
        if b.len() != self.rows {
            return Err(LinError::DimMismatch { expected: self.rows, found: b.len() });
        }
        let n = self.cols;
        let mut aug: Vec<Vec<Rational>> = (0..self.rows)
            .map(|r| {
                let mut row = self.row(r).to_vec();
                row.push(b[r].clone());
                row
            })
            .collect();
        let mut pivots = Vec::new();
        let mut rank = 0;
        for c in 0..n {
            let Some(p) = (rank..aug.len()).find(|&i| !aug[i][c].is_zero()) else {
                continue;
            };
            aug.swap(rank, p);
            let inv = aug[rank][c].recip();
            for v in aug[rank].iter_mut() {
                *v *= &inv;
            }
            let pivot_row = aug[rank].clone();
            for (i, row) in aug.iter_mut().enumerate() {
                if i != rank && !row[c].is_zero() {
                    let f = row[c].clone();
                    for (v, p) in row.iter_mut().zip(&pivot_row) {
                        *v -= &f * p;
                    }
                }
            }
            pivots.push(c);
            rank += 1;
        }
        if aug[rank..].iter().any(|row| !row[n].is_zero()) {
            return Ok(Solution::Inconsistent);
        }
        let mut x = vec![Rational::zero(); n];
        for (k, &c) in pivots.iter().enumerate() {
            x[c] = aug[k][n].clone();
        }
        if rank == n {
            Ok(Solution::Unique(x))
        } else {
            Ok(Solution::Many { particular: x, nullity: n - rank })
        }
    }

    /// Solves `self · U = target` column by column. Returns a particular
    /// solution and the kernel of `self`, or `None` when inconsistent.
    pub fn solve_matrix(&self, target: &LinMap) -> Result<Option<(LinMap, LinMap)>, LinError> {
        if target.rows != self.rows {
            return Err(LinError::DimMismatch { expected: self.rows, found: target.rows });
        }
        let mut cols = Vec::with_capacity(target.cols);
        for c in 0..target.cols {
            let b: Vec<Rational> = (0..target.rows).map(|r| target.get(r, c).clone()).collect();
            match self.solve_exact(&b)? {
                Solution::Inconsistent => return Ok(None),
                Solution::Unique(x) | Solution::Many { particular: x, .. } => cols.push(x),
            }
        }
        let particular = LinMap::from_fn(self.cols, target.cols, |r, c| cols[c][r].clone());
        Ok(Some((particular, self.kernel_basis())))
    }

    /// True when every entry is 0 or 1 and every row holds at most one 1:
    /// the map copies and discards coordinates.
    pub fn is_selection(&self) -> bool {
        (0..self.rows).all(|r| {
            let row = self.row(r);
            row.iter().all(|v| v.is_zero() || v.is_one()) && row.iter().filter(|v| v.is_one()).count() <= 1
        })
    }

    fn selected_column(&self, r: usize) -> Option<usize> {
        self.row(r).iter().position(|v| v.is_one())
    }
}

fn indicator(b: bool) -> Rational {
    if b {
        Rational::one()
    } else {
        Rational::zero()
    }
}

impl fmt::Display for LinMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("[")?;
        for r in 0..self.rows {
            if r > 0 {
                f.write_str(", ")?;
            }
            f.write_str("[")?;
            for (c, v) in self.row(r).iter().enumerate() {
                if c > 0 {
                    f.write_str(", ")?;
                }
                write!(f, "{v}")?;
            }
            f.write_str("]")?;
        }
        f.write_str("]")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Solution {
    Unique(Vec<Rational>),
    /// Consistent but underdetermined; `particular` sets free variables to zero.
    Many { particular: Vec<Rational>, nullity: usize },
    Inconsistent,
}

/// Fraction-free reduced echelon form over the integers.
struct RowEchelon {
    rows: Vec<Vec<BigInt>>,
    pivots: Vec<usize>,
}

impl RowEchelon {
    fn of(a: &LinMap) -> Self {
        let n = a.cols;
        let mut rows: Vec<Vec<BigInt>> = (0..a.rows)
            .map(|r| {
                let row = a.row(r);
                let l = row.iter().fold(BigInt::one(), |l, q| l.lcm(q.denom()));
                row.iter().map(|q| q.numer() * (&l / q.denom())).collect()
            })
            .collect();
        let mut pivots = Vec::new();
        let mut rank = 0;
        for c in 0..n {
            let Some(p) = (rank..rows.len()).find(|&i| !rows[i][c].is_zero()) else {
                continue;
            };
            rows.swap(rank, p);
            let pivot_row = rows[rank].clone();
            let p = pivot_row[c].clone();
            for (i, row) in rows.iter_mut().enumerate() {
                if i == rank || row[c].is_zero() {
                    continue;
                }
                let f = row[c].clone();
                for (v, pv) in row.iter_mut().zip(&pivot_row) {
                    *v = &p * &*v - &f * pv;
                }
                primitive(row);
            }
            pivots.push(c);
            rank += 1;
        }
        rows.truncate(rank);
        RowEchelon { rows, pivots }
    }
}

fn primitive(row: &mut [BigInt]) {
    let g = row.iter().fold(BigInt::zero(), |g, x| g.gcd(x));
    if !g.is_zero() && !g.is_one() {
        for v in row.iter_mut() {
            *v = &*v / &g;
        }
    }
}

/// The pullback of a cospan `N →r1 Y ←l2 M`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PullbackData {
    pub apex_dim: Dim,
    /// apex → N
    pub b0: LinMap,
    /// apex → M
    pub b1: LinMap,
    /// ⟨b0, b1⟩: apex → N + M
    pub pairing: LinMap,
}

impl PullbackData {
    fn from_pairing(pairing: LinMap, n: Dim) -> Self {
        let m = pairing.rows() - n;
        PullbackData {
            apex_dim: pairing.cols(),
            b0: pairing.row_block(0, n),
            b1: pairing.row_block(n, m),
            pairing,
        }
    }
}

/// Pullback of `r1` and `l2`; uses the combinatorial route when both legs
/// are selections and the kernel route otherwise.
pub fn pullback(r1: &LinMap, l2: &LinMap) -> Result<PullbackData, LinError> {
    if r1.rows() != l2.rows() {
        return Err(LinError::DimMismatch { expected: r1.rows(), found: l2.rows() });
    }
    if r1.is_selection() && l2.is_selection() {
        Ok(pullback_selection(r1, l2))
    } else {
        pullback_kernel(r1, l2)
    }
}

/// Generic pullback: the kernel of `[r1 | −l2]`.
pub fn pullback_kernel(r1: &LinMap, l2: &LinMap) -> Result<PullbackData, LinError> {
    let joint = r1.hstack(&l2.neg())?;
    Ok(PullbackData::from_pairing(joint.kernel_basis(), r1.cols()))
}

/// Combinatorial pullback of selection legs.
///
/// Each row `y` equates the coordinate it selects from `N` with the one it
/// selects from `M` (or forces the selected coordinate to zero when the
/// other side selects nothing). Apex coordinates are the surviving classes
/// of the generated equivalence relation, ordered by their least member.
///
/// Panics if either leg is not a selection or the codomains differ.
pub fn pullback_selection(r1: &LinMap, l2: &LinMap) -> PullbackData {
    assert!(r1.is_selection() && l2.is_selection(), "legs must be selections");
    assert_eq!(r1.rows(), l2.rows(), "legs must share a codomain");
    let (n, m) = (r1.cols(), l2.cols());
    let mut uf = UnionFind::new(n + m);
    let mut forced_zero = vec![false; n + m];
    for y in 0..r1.rows() {
        match (r1.selected_column(y), l2.selected_column(y)) {
            (Some(i), Some(j)) => uf.union(i, n + j),
            (Some(i), None) => forced_zero[i] = true,
            (None, Some(j)) => forced_zero[n + j] = true,
            (None, None) => {}
        }
    }
    let mut dead = vec![false; n + m];
    for v in 0..n + m {
        if forced_zero[v] {
            let root = uf.find(v);
            dead[root] = true;
        }
    }
    let mut class_of_root = vec![usize::MAX; n + m];
    let mut classes = 0;
    let mut assignment = vec![None; n + m];
    for v in 0..n + m {
        let root = uf.find(v);
        if dead[root] {
            continue;
        }
        if class_of_root[root] == usize::MAX {
            class_of_root[root] = classes;
            classes += 1;
        }
        assignment[v] = Some(class_of_root[root]);
    }
    let pairing = LinMap::from_fn(n + m, classes, |r, c| indicator(assignment[r] == Some(c)));
    PullbackData::from_pairing(pairing, n)
}

struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind { parent: (0..n).collect() }
    }

    fn find(&mut self, mut v: usize) -> usize {
        while self.parent[v] != v {
            self.parent[v] = self.parent[self.parent[v]];
            v = self.parent[v];
        }
        v
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
            self.parent[hi] = lo;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(rows: usize, cols: usize, v: &[i64]) -> LinMap {
        LinMap::from_ints(rows, cols, v).unwrap()
    }

    fn ints(v: &[i64]) -> Vec<Rational> {
        v.iter().map(|&x| Rational::from_integer(x.into())).collect()
    }

    #[test]
    fn dagger_is_transpose() {
        assert_eq!(m(2, 2, &[1, 2, 3, 4]).dagger(), m(2, 2, &[1, 3, 2, 4]));
        assert_eq!(m(1, 3, &[1, 2, 3]).dagger(), m(3, 1, &[1, 2, 3]));
    }

    #[test]
    fn compose_checks_dims() {
        let a = m(2, 3, &[1, 0, 0, 0, 1, 0]);
        assert!(a.compose(&a).is_err());
        assert_eq!(a.compose(&m(3, 1, &[4, 5, 6])).unwrap(), m(2, 1, &[4, 5]));
        assert!(a.add(&m(2, 2, &[0; 4])).is_err());
    }

    #[test]
    fn structural_maps() {
        assert_eq!(LinMap::copy(2), m(4, 2, &[1, 0, 0, 1, 1, 0, 0, 1]));
        assert_eq!(LinMap::projection(3, 1, 2), m(2, 3, &[0, 1, 0, 0, 0, 1]));
        assert_eq!(LinMap::injection(3, 1, 2), m(3, 2, &[0, 0, 1, 0, 0, 1]));
        assert_eq!(LinMap::discard(2).rows(), 0);
        assert!(LinMap::identity(3).is_identity());
        assert!(LinMap::copy(2).is_selection());
        assert!(!m(1, 2, &[1, 1]).is_selection());
    }

    #[test]
    fn kernel_examples() {
        let k = m(1, 2, &[1, -1]).kernel_basis();
        assert_eq!(k, m(2, 1, &[1, 1]));
        let k = LinMap::zero(1, 3).kernel_basis();
        assert_eq!(k.cols(), 3);
        assert_eq!(k.rank(), 3);
        assert_eq!(LinMap::identity(4).kernel_basis().cols(), 0);
    }

    #[test]
    fn kernel_is_annihilated() {
        let a = LinMap::new(
            2,
            4,
            vec![
                Rational::new(1.into(), 2.into()),
                Rational::from_integer(3.into()),
                Rational::new((-2).into(), 3.into()),
                Rational::from_integer(0.into()),
                Rational::from_integer(1.into()),
                Rational::from_integer(6.into()),
                Rational::new((-4).into(), 3.into()),
                Rational::from_integer(1.into()),
            ],
        )
        .unwrap();
        let k = a.kernel_basis();
        assert_eq!(k.cols(), 4 - a.rank());
        assert!(a.compose(&k).unwrap().is_zero());
        assert!(k.is_integral());
        assert_eq!(k.rank(), k.cols());
    }

    #[test]
    fn solve_examples() {
        assert_eq!(LinMap::identity(2).solve_exact(&ints(&[3, 5])).unwrap(), Solution::Unique(ints(&[3, 5])));
        assert!(matches!(
            m(1, 2, &[1, 1]).solve_exact(&ints(&[2])).unwrap(),
            Solution::Many { nullity: 1, .. }
        ));
        assert_eq!(m(2, 1, &[1, 1]).solve_exact(&ints(&[1, 2])).unwrap(), Solution::Inconsistent);
        assert!(m(2, 1, &[1, 1]).solve_exact(&ints(&[1])).is_err());
    }

    #[test]
    fn pullback_of_projections() {
        // X×Y → Y ← Y×Z with all dims 1
        let r1 = LinMap::projection(2, 1, 1);
        let l2 = LinMap::projection(2, 0, 1);
        let pb = pullback(&r1, &l2).unwrap();
        assert_eq!(pb.apex_dim, 3);
        // (x, y, z) ↦ (x, y, y, z)
        assert_eq!(pb.pairing, m(4, 3, &[1, 0, 0, 0, 1, 0, 0, 1, 0, 0, 0, 1]));
        let generic = pullback_kernel(&r1, &l2).unwrap();
        assert_eq!(generic.apex_dim, 3);
        assert_eq!(r1.compose(&generic.b0).unwrap(), l2.compose(&generic.b1).unwrap());
    }

    #[test]
    fn pullback_of_identities() {
        let id = LinMap::identity(2);
        let pb = pullback(&id, &id).unwrap();
        assert_eq!(pb.apex_dim, 2);
        assert_eq!(pb.b0, id);
        assert_eq!(pb.b1, id);
    }

    #[test]
    fn selection_pullback_with_discarded_rows() {
        // r1 selects nothing in row 0, so the M coordinate it meets is zero.
        let r1 = m(2, 1, &[0, 1]);
        let l2 = m(2, 2, &[1, 0, 0, 1]);
        let pb = pullback_selection(&r1, &l2);
        assert_eq!(pb.apex_dim, 1);
        assert_eq!(r1.compose(&pb.b0).unwrap(), l2.compose(&pb.b1).unwrap());
        assert_eq!(pullback_kernel(&r1, &l2).unwrap().apex_dim, 1);
    }

    #[test]
    fn pullback_dim_mismatch() {
        assert!(pullback(&LinMap::identity(2), &LinMap::identity(3)).is_err());
    }
}
