//! Exact rational scalars, sparse vectors over opaque basis indices, and
//! echelon-form linear algebra (rank, kernels, span membership).

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

pub type Rational = BigRational;

/// `n` as a rational.
pub fn rat(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// `n / d` in lowest terms.
pub fn ratio(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

pub fn fmt_rational(c: &Rational) -> String {
    if c.is_integer() {
        c.numer().to_string()
    } else {
        format!("{}/{}", c.numer(), c.denom())
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum LinalgError {
    #[error("index {index} out of range for dimension {dim}")]
    Dimension { index: usize, dim: usize },
}

/// Finitely supported map from basis index to a nonzero rational.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct SparseVector {
    entries: BTreeMap<usize, Rational>,
}

impl SparseVector {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn unit(i: usize) -> Self {
        let mut v = Self::new();
        v.entries.insert(i, Rational::one());
        v
    }

    pub fn from_pairs<I: IntoIterator<Item = (usize, Rational)>>(pairs: I) -> Self {
        let mut v = Self::new();
        for (i, c) in pairs {
            v.add_at(i, &c);
        }
        v
    }

    pub fn from_ints(values: &[i64]) -> Self {
        Self::from_pairs(values.iter().enumerate().map(|(i, &c)| (i, rat(c))))
    }

    pub fn get(&self, i: usize) -> Rational {
        self.entries.get(&i).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn coeff(&self, i: usize) -> Option<&Rational> {
        self.entries.get(&i)
    }

    pub fn add_at(&mut self, i: usize, c: &Rational) {
        if c.is_zero() {
            return;
        }
        match self.entries.get_mut(&i) {
            Some(x) => {
                *x += c;
                if x.is_zero() {
                    self.entries.remove(&i);
                }
            }
            None => {
                self.entries.insert(i, c.clone());
            }
        }
    }

    /// `self += c * other`
    pub fn add_scaled(&mut self, other: &SparseVector, c: &Rational) {
        if c.is_zero() {
            return;
        }
        for (i, x) in &other.entries {
            self.add_at(*i, &(x * c));
        }
    }

    pub fn scaled(&self, c: &Rational) -> SparseVector {
        if c.is_zero() {
            return SparseVector::new();
        }
        SparseVector { entries: self.entries.iter().map(|(i, x)| (*i, x * c)).collect() }
    }

    pub fn is_zero(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, &Rational)> {
        self.entries.iter().map(|(i, c)| (*i, c))
    }

    pub fn support(&self) -> impl Iterator<Item = usize> + '_ {
        self.entries.keys().copied()
    }

    pub fn leading(&self) -> Option<(usize, &Rational)> {
        self.entries.iter().next().map(|(i, c)| (*i, c))
    }

    pub fn max_index(&self) -> Option<usize> {
        self.entries.keys().next_back().copied()
    }

    pub fn dot(&self, other: &SparseVector) -> Rational {
        let (small, big) = if self.nnz() <= other.nnz() { (self, other) } else { (other, self) };
        let mut acc = Rational::zero();
        for (i, c) in small.iter() {
            if let Some(d) = big.coeff(i) {
                acc += c * d;
            }
        }
        acc
    }

    /// Relabel indices through `f`, summing collisions.
    pub fn map_indices<F: Fn(usize) -> usize>(&self, f: F) -> SparseVector {
        SparseVector::from_pairs(self.iter().map(|(i, c)| (f(i), c.clone())))
    }

    pub fn into_pairs(self) -> impl Iterator<Item = (usize, Rational)> {
        self.entries.into_iter()
    }
}

impl std::ops::Add for &SparseVector {
    type Output = SparseVector;
    fn add(self, rhs: &SparseVector) -> SparseVector {
        let mut out = self.clone();
        out.add_scaled(rhs, &Rational::one());
        out
    }
}

impl std::ops::Sub for &SparseVector {
    type Output = SparseVector;
    fn sub(self, rhs: &SparseVector) -> SparseVector {
        let mut out = self.clone();
        out.add_scaled(rhs, &-Rational::one());
        out
    }
}

impl std::ops::Neg for &SparseVector {
    type Output = SparseVector;
    fn neg(self) -> SparseVector {
        self.scaled(&-Rational::one())
    }
}

impl fmt::Display for SparseVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self.iter().map(|(i, c)| format!("{}*e{}", fmt_rational(c), i)).collect();
        write!(f, "{}", parts.join(" + "))
    }
}

/// Sparse matrix stored by rows.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SparseMatrix {
    pub rows: usize,
    pub cols: usize,
    data: Vec<SparseVector>,
}

impl SparseMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![SparseVector::new(); rows] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, Rational::one());
        }
        m
    }

    pub fn from_ints(rows: &[Vec<i64>]) -> Self {
        let cols = rows.first().map_or(0, |r| r.len());
        let mut m = Self::zeros(rows.len(), cols);
        for (i, r) in rows.iter().enumerate() {
            for (j, &c) in r.iter().enumerate() {
                m.set(i, j, rat(c));
            }
        }
        m
    }

    pub fn from_rows(cols: usize, rows: Vec<SparseVector>) -> Result<Self, LinalgError> {
        for r in &rows {
            if let Some(j) = r.max_index() {
                if j >= cols {
                    return Err(LinalgError::Dimension { index: j, dim: cols });
                }
            }
        }
        Ok(Self { rows: rows.len(), cols, data: rows })
    }

    pub fn from_columns(rows: usize, columns: &[SparseVector]) -> Result<Self, LinalgError> {
        let mut m = Self::zeros(rows, columns.len());
        for (j, col) in columns.iter().enumerate() {
            for (i, c) in col.iter() {
                if i >= rows {
                    return Err(LinalgError::Dimension { index: i, dim: rows });
                }
                m.data[i].add_at(j, c);
            }
        }
        Ok(m)
    }

    pub fn set(&mut self, i: usize, j: usize, c: Rational) {
        assert!(i < self.rows && j < self.cols, "matrix index out of range");
        let cur = self.data[i].get(j);
        self.data[i].add_at(j, &(c - cur));
    }

    pub fn get(&self, i: usize, j: usize) -> Rational {
        self.data[i].get(j)
    }

    pub fn row(&self, i: usize) -> &SparseVector {
        &self.data[i]
    }

    pub fn mul_vec(&self, v: &SparseVector) -> SparseVector {
        SparseVector::from_pairs(self.data.iter().enumerate().map(|(i, r)| (i, r.dot(v))).filter(|(_, c)| !c.is_zero()))
    }
}

/// Reduced row echelon form maintained incrementally; each stored row has a
/// leading 1 at its pivot and zeros in every other pivot column.
#[derive(Clone, Debug, Default)]
pub struct Echelon {
    rows: BTreeMap<usize, SparseVector>,
}

impl Echelon {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_rows<I: IntoIterator<Item = SparseVector>>(rows: I) -> Self {
        let mut e = Self::new();
        for r in rows {
            e.insert(r);
        }
        e
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    pub fn pivots(&self) -> impl Iterator<Item = usize> + '_ {
        self.rows.keys().copied()
    }

    pub fn is_pivot(&self, c: usize) -> bool {
        self.rows.contains_key(&c)
    }

    pub fn rows(&self) -> impl Iterator<Item = (usize, &SparseVector)> {
        self.rows.iter().map(|(p, r)| (*p, r))
    }

    /// Subtract multiples of stored rows so no pivot column remains in `v`.
    pub fn reduce(&self, v: &SparseVector) -> SparseVector {
        let mut out = v.clone();
        let hits: Vec<(usize, Rational)> = v.iter().filter(|(i, _)| self.rows.contains_key(i)).map(|(i, c)| (i, c.clone())).collect();
        for (p, c) in hits {
            out.add_scaled(&self.rows[&p], &-c);
        }
        out
    }

    /// Insert a row; returns the new pivot if the row was independent.
    pub fn insert(&mut self, v: SparseVector) -> Option<usize> {
        let r = self.reduce(&v);
        let (p, lead) = match r.leading() {
            Some((p, c)) => (p, c.clone()),
            None => return None,
        };
        let r = r.scaled(&lead.recip());
        for row in self.rows.values_mut() {
            if let Some(c) = row.coeff(p).cloned() {
                row.add_scaled(&r, &-c);
            }
        }
        self.rows.insert(p, r);
        Some(p)
    }
}

/// Basis of the null space of `m`: one vector per free column in ascending
/// order, with a 1 at that column and the negated echelon entries at pivots.
pub fn kernel_basis(m: &SparseMatrix) -> Vec<SparseVector> {
    let ech = Echelon::from_rows(m.data.iter().cloned());
    let mut out = Vec::new();
    for free in 0..m.cols {
        if ech.is_pivot(free) {
            continue;
        }
        let mut v = SparseVector::unit(free);
        for (p, row) in ech.rows() {
            if let Some(c) = row.coeff(free) {
                v.add_at(p, &-c);
            }
        }
        out.push(v);
    }
    out
}

pub fn rank(m: &SparseMatrix) -> usize {
    Echelon::from_rows(m.data.iter().cloned()).rank()
}

/// Echelon form over a list of generators that remembers how each stored row
/// is combined from the generators, so targets can be solved for coordinates.
#[derive(Clone, Debug, Default)]
pub struct SpanSolver {
    rows: BTreeMap<usize, (SparseVector, SparseVector)>,
    count: usize,
}

impl SpanSolver {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn generators(&self) -> usize {
        self.count
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    fn reduce_tracked(&self, v: &SparseVector) -> (SparseVector, SparseVector) {
        let mut rem = v.clone();
        let mut comb = SparseVector::new();
        let hits: Vec<(usize, Rational)> = v.iter().filter(|(i, _)| self.rows.contains_key(i)).map(|(i, c)| (i, c.clone())).collect();
        for (p, c) in hits {
            let (row, rc) = &self.rows[&p];
            rem.add_scaled(row, &-&c);
            comb.add_scaled(rc, &c);
        }
        (rem, comb)
    }

    /// Adds generator number `self.generators()`; returns whether it enlarged the span.
    pub fn push(&mut self, v: &SparseVector) -> bool {
        let id = self.count;
        self.count += 1;
        let (rem, comb) = self.reduce_tracked(v);
        let (p, lead) = match rem.leading() {
            Some((p, c)) => (p, c.clone()),
            None => return false,
        };
        let inv = lead.recip();
        let mut tag = comb.scaled(&-Rational::one());
        tag.add_at(id, &Rational::one());
        let row = rem.scaled(&inv);
        let tag = tag.scaled(&inv);
        for (r, t) in self.rows.values_mut() {
            if let Some(c) = r.coeff(p).cloned() {
                r.add_scaled(&row, &-&c);
                t.add_scaled(&tag, &-&c);
            }
        }
        self.rows.insert(p, (row, tag));
        true
    }

    /// Coordinates over the pushed generators reproducing `v`, if `v` lies in the span.
    pub fn solve(&self, v: &SparseVector) -> Option<SparseVector> {
        let (rem, comb) = self.reduce_tracked(v);
        if rem.is_zero() {
            Some(comb)
        } else {
            None
        }
    }

    pub fn contains(&self, v: &SparseVector) -> bool {
        self.reduce_tracked(v).0.is_zero()
    }
}

/// Coordinates `c` with `Σ c_i span_i = v`, or `None` when `v` is outside the span.
pub fn membership(v: &SparseVector, span: &[SparseVector], dim: usize) -> Result<Option<Vec<Rational>>, LinalgError> {
    for w in span.iter().chain(std::iter::once(v)) {
        if let Some(i) = w.max_index() {
            if i >= dim {
                return Err(LinalgError::Dimension { index: i, dim });
            }
        }
    }
    let mut solver = SpanSolver::new();
    for s in span {
        solver.push(s);
    }
    Ok(solver.solve(v).map(|c| (0..span.len()).map(|i| c.get(i)).collect()))
}

pub fn is_nonneg_integer(c: &Rational) -> bool {
    c.is_integer() && !c.is_negative()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn rank_one_kernel() {
        let m = SparseMatrix::from_ints(&[vec![1, 1], vec![2, 2]]);
        assert_eq!(kernel_basis(&m), vec![SparseVector::from_ints(&[-1, 1])]);
    }

    #[test]
    fn identity_has_trivial_kernel() {
        assert!(kernel_basis(&SparseMatrix::identity(3)).is_empty());
        assert_eq!(rank(&SparseMatrix::identity(5)), 5);
        assert_eq!(rank(&SparseMatrix::zeros(4, 4)), 0);
    }

    #[test]
    fn kernel_of_pivot_row_one_two() {
        let m = SparseMatrix::from_ints(&[vec![1, 2]]);
        assert_eq!(kernel_basis(&m), vec![SparseVector::from_ints(&[-2, 1])]);
    }

    #[test]
    fn membership_examples() {
        let a1 = SparseVector::unit(0);
        let a2 = SparseVector::unit(1);
        let target = &a1 + &a2;
        assert_eq!(membership(&target, &[a1.clone(), a2.clone()], 4).unwrap(), Some(vec![rat(1), rat(1)]));
        let b1 = SparseVector::unit(2);
        assert_eq!(membership(&b1, std::slice::from_ref(&a1), 4).unwrap(), None);
        assert!(membership(&SparseVector::unit(9), &[a1], 4).is_err());
    }

    #[test]
    fn dependent_generators_still_solve() {
        let v1 = SparseVector::from_ints(&[1, 1, 0]);
        let v2 = SparseVector::from_ints(&[2, 2, 0]);
        let v3 = SparseVector::from_ints(&[0, 1, 1]);
        let mut s = SpanSolver::new();
        assert!(s.push(&v1));
        assert!(!s.push(&v2));
        assert!(s.push(&v3));
        let t = SparseVector::from_ints(&[3, 5, 2]);
        let c = s.solve(&t).unwrap();
        let mut back = SparseVector::new();
        for (v, i) in [(&v1, 0), (&v2, 1), (&v3, 2)] {
            back.add_scaled(v, &c.get(i));
        }
        assert_eq!(back, t);
    }

    fn small_matrix() -> impl Strategy<Value = Vec<Vec<i64>>> {
        (1usize..6, 1usize..7).prop_flat_map(|(r, c)| prop::collection::vec(prop::collection::vec(-3i64..4, c), r))
    }

    proptest! {
        #[test]
        fn kernel_vectors_are_annihilated(rows in small_matrix()) {
            let m = SparseMatrix::from_ints(&rows);
            let ker = kernel_basis(&m);
            for v in &ker {
                prop_assert!(m.mul_vec(v).is_zero());
            }
            prop_assert_eq!(rank(&m) + ker.len(), m.cols);
            let mut e = Echelon::new();
            for v in &ker {
                prop_assert!(e.insert(v.clone()).is_some());
            }
        }

        #[test]
        fn membership_reconstructs(rows in small_matrix(), pick in prop::collection::vec(-3i64..4, 6)) {
            let m = SparseMatrix::from_ints(&rows);
            let span: Vec<SparseVector> = (0..m.rows).map(|i| m.row(i).clone()).collect();
            let mut target = SparseVector::new();
            for (i, s) in span.iter().enumerate() {
                target.add_scaled(s, &rat(pick[i % pick.len()]));
            }
            let c = membership(&target, &span, m.cols).unwrap().expect("in span");
            let mut back = SparseVector::new();
            for (s, ci) in span.iter().zip(&c) {
                back.add_scaled(s, ci);
            }
            prop_assert_eq!(back, target);
        }

        #[test]
        fn rational_round_trip(a in -50i64..50, b in 1i64..50, c in -50i64..50, d in 1i64..50) {
            let x = ratio(a, b);
            let y = ratio(c, d);
            prop_assert_eq!((&x + &y) - &y, x);
        }
    }
}
