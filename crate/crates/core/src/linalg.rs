//! Dense exact matrices and finite-dimensional subspaces in canonical (RREF) form.

use std::fmt;

use num_rational::BigRational;
use num_traits::Zero;
use thiserror::Error;

use crate::field::{inv_mod, FieldSpec, Scalar};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LinalgError {
    #[error("ambient dimension mismatch: {0} vs {1}")]
    AmbientMismatch(usize, usize),
    #[error("field mismatch: {0} vs {1}")]
    FieldMismatch(FieldSpec, FieldSpec),
    #[error("subspace is not contained in the larger one")]
    NotContained,
    #[error("shape mismatch: {0}")]
    Shape(String),
}

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Matrix {
    field: FieldSpec,
    rows: usize,
    cols: usize,
    data: Vec<Scalar>,
}

impl fmt::Debug for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Matrix[{}]{}x{}", self.field, self.rows, self.cols)?;
        let rows: Vec<Vec<String>> = (0..self.rows)
            .map(|i| self.row(i).iter().map(Scalar::to_text).collect())
            .collect();
        write!(f, "{rows:?}")
    }
}

impl Matrix {
    pub fn new(field: FieldSpec, rows: usize, cols: usize, data: Vec<Scalar>) -> Result<Self, LinalgError> {
        if data.len() != rows * cols {
            return Err(LinalgError::Shape(format!(
                "{} entries for a {rows}x{cols} matrix",
                data.len()
            )));
        }
        if let Some(bad) = data.iter().find(|s| s.field() != field) {
            return Err(LinalgError::FieldMismatch(field, bad.field()));
        }
        Ok(Matrix {
            field,
            rows,
            cols,
            data,
        })
    }

    pub fn zeros(field: FieldSpec, rows: usize, cols: usize) -> Self {
        Matrix {
            field,
            rows,
            cols,
            data: vec![field.zero(); rows * cols],
        }
    }

    pub fn identity(field: FieldSpec, n: usize) -> Self {
        let mut m = Self::zeros(field, n, n);
        for i in 0..n {
            m.set(i, i, field.one());
        }
        m
    }

    /// Builds from row vectors; `cols` is used when there are no rows.
    pub fn from_rows(field: FieldSpec, cols: usize, rows: Vec<Vec<Scalar>>) -> Result<Self, LinalgError> {
        let n = rows.len();
        let mut data = Vec::with_capacity(n * cols);
        for r in rows {
            if r.len() != cols {
                return Err(LinalgError::Shape(format!(
                    "row of length {} in {cols} columns",
                    r.len()
                )));
            }
            data.extend(r);
        }
        Matrix::new(field, n, cols, data)
    }

    pub fn from_i64_rows(field: FieldSpec, rows: &[&[i64]]) -> Self {
        let cols = rows.first().map_or(0, |r| r.len());
        let rows = rows
            .iter()
            .map(|r| r.iter().map(|&v| field.from_i64(v)).collect())
            .collect();
        Self::from_rows(field, cols, rows).expect("rectangular rows")
    }

    pub fn field(&self) -> FieldSpec {
        self.field
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &Scalar {
        &self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: Scalar) {
        assert_eq!(v.field(), self.field);
        self.data[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> &[Scalar] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<Scalar> {
        (0..self.rows).map(|i| self.get(i, j).clone()).collect()
    }

    pub fn row_vecs(&self) -> Vec<Vec<Scalar>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(Scalar::is_zero)
    }

    pub fn transpose(&self) -> Matrix {
        let mut t = Matrix::zeros(self.field, self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.data[j * self.rows + i] = self.get(i, j).clone();
            }
        }
        t
    }

    pub fn mul(&self, other: &Matrix) -> Result<Matrix, LinalgError> {
        if self.cols != other.rows {
            return Err(LinalgError::Shape(format!(
                "{}x{} times {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = Matrix::zeros(self.field, self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let b = other.get(k, j);
                    if !b.is_zero() {
                        let idx = i * other.cols + j;
                        out.data[idx] = out.data[idx].add(&a.mul(b));
                    }
                }
            }
        }
        Ok(out)
    }

    pub fn add(&self, other: &Matrix) -> Result<Matrix, LinalgError> {
        if (self.rows, self.cols) != (other.rows, other.cols) {
            return Err(LinalgError::Shape("matrix sum of different shapes".into()));
        }
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a.add(b)).collect();
        Ok(Matrix { data, ..self.clone() })
    }

    pub fn mul_vec(&self, v: &[Scalar]) -> Vec<Scalar> {
        assert_eq!(v.len(), self.cols);
        (0..self.rows)
            .map(|i| {
                self.row(i)
                    .iter()
                    .zip(v)
                    .filter(|(a, b)| !a.is_zero() && !b.is_zero())
                    .fold(self.field.zero(), |acc, (a, b)| acc.add(&a.mul(b)))
            })
            .collect()
    }

    /// Reduced row echelon form of the row space.
    pub fn rref(&self) -> (SubspaceBasis, usize) {
        let (rows, pivots) = eliminate(self.field, self.cols, self.row_vecs());
        let rank = rows.len();
        let basis = Matrix::from_rows(self.field, self.cols, rows).expect("echelon rows");
        (
            SubspaceBasis {
                ambient_dim: self.cols,
                basis,
                pivots,
            },
            rank,
        )
    }

    pub fn rank(&self) -> usize {
        self.rref().1
    }
}

// Elimination backends. The prime path works on machine words, the rational
// path normalizes after every step (BigRational keeps lowest terms).

trait Backend {
    type E: Clone;
    fn is_zero(&self, e: &Self::E) -> bool;
    fn inv(&self, e: &Self::E) -> Self::E;
    fn mul(&self, a: &Self::E, b: &Self::E) -> Self::E;
    /// a - b*c
    fn sub_mul(&self, a: &Self::E, b: &Self::E, c: &Self::E) -> Self::E;
}

struct PrimeBackend(u64);

impl Backend for PrimeBackend {
    type E = u64;
    fn is_zero(&self, e: &u64) -> bool {
        *e == 0
    }
    fn inv(&self, e: &u64) -> u64 {
        inv_mod(*e, self.0)
    }
    fn mul(&self, a: &u64, b: &u64) -> u64 {
        a * b % self.0
    }
    fn sub_mul(&self, a: &u64, b: &u64, c: &u64) -> u64 {
        (a + self.0 - b * c % self.0) % self.0
    }
}

struct RationalBackend;

impl Backend for RationalBackend {
    type E = BigRational;
    fn is_zero(&self, e: &BigRational) -> bool {
        e.is_zero()
    }
    fn inv(&self, e: &BigRational) -> BigRational {
        e.recip()
    }
    fn mul(&self, a: &BigRational, b: &BigRational) -> BigRational {
        a * b
    }
    fn sub_mul(&self, a: &BigRational, b: &BigRational, c: &BigRational) -> BigRational {
        a - b * c
    }
}

fn rref_generic<B: Backend>(b: &B, cols: usize, mut rows: Vec<Vec<B::E>>) -> (Vec<Vec<B::E>>, Vec<usize>) {
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        if r == rows.len() {
            break;
        }
        let Some(p) = (r..rows.len()).find(|&i| !b.is_zero(&rows[i][c])) else {
            continue;
        };
        rows.swap(r, p);
        let inv = b.inv(&rows[r][c]);
        let pr: Vec<B::E> = rows[r].iter().map(|x| b.mul(x, &inv)).collect();
        rows[r] = pr;
        let pivot_row = rows[r].clone();
        for (i, row) in rows.iter_mut().enumerate() {
            if i == r || b.is_zero(&row[c]) {
                continue;
            }
            let f = row[c].clone();
            for j in c..cols {
                if !b.is_zero(&pivot_row[j]) {
                    row[j] = b.sub_mul(&row[j], &f, &pivot_row[j]);
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    rows.truncate(r);
    (rows, pivots)
}

/// Row-reduces `rows`; returns the nonzero RREF rows and pivot columns.
pub(crate) fn eliminate(field: FieldSpec, cols: usize, rows: Vec<Vec<Scalar>>) -> (Vec<Vec<Scalar>>, Vec<usize>) {
    match field {
        FieldSpec::Prime(p) => {
            let raw: Vec<Vec<u64>> = rows
                .iter()
                .map(|r| r.iter().map(|s| s.residue().expect("prime scalar") as u64).collect())
                .collect();
            let (red, piv) = rref_generic(&PrimeBackend(p as u64), cols, raw);
            let out = red
                .into_iter()
                .map(|r| r.into_iter().map(|x| Scalar::Prime { p, r: x as u32 }).collect())
                .collect();
            (out, piv)
        }
        FieldSpec::Rationals => {
            let raw: Vec<Vec<BigRational>> = rows
                .iter()
                .map(|r| r.iter().map(|s| s.rational().clone()).collect())
                .collect();
            let (red, piv) = rref_generic(&RationalBackend, cols, raw);
            let out = red
                .into_iter()
                .map(|r| r.into_iter().map(Scalar::Rational).collect())
                .collect();
            (out, piv)
        }
    }
}

/// A subspace of K^n stored as its unique RREF basis.
///
/// Structural equality is subspace equality.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct SubspaceBasis {
    ambient_dim: usize,
    basis: Matrix,
    pivots: Vec<usize>,
}

impl fmt::Debug for SubspaceBasis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "Subspace(dim {} in {}; {:?})",
            self.dim(),
            self.ambient_dim,
            self.basis
        )
    }
}

impl SubspaceBasis {
    pub fn zero(field: FieldSpec, ambient_dim: usize) -> Self {
        SubspaceBasis {
            ambient_dim,
            basis: Matrix::zeros(field, 0, ambient_dim),
            pivots: Vec::new(),
        }
    }

    pub fn full(field: FieldSpec, ambient_dim: usize) -> Self {
        SubspaceBasis {
            ambient_dim,
            basis: Matrix::identity(field, ambient_dim),
            pivots: (0..ambient_dim).collect(),
        }
    }

    pub fn span(field: FieldSpec, ambient_dim: usize, generators: Vec<Vec<Scalar>>) -> Result<Self, LinalgError> {
        Ok(Matrix::from_rows(field, ambient_dim, generators)?.rref().0)
    }

    /// Coordinate subspace spanned by the given standard basis indices.
    pub fn coordinate(field: FieldSpec, ambient_dim: usize, coords: &[usize]) -> Self {
        let rows = coords
            .iter()
            .map(|&c| {
                let mut v = vec![field.zero(); ambient_dim];
                v[c] = field.one();
                v
            })
            .collect();
        Self::span(field, ambient_dim, rows).expect("coordinate rows")
    }

    pub fn field(&self) -> FieldSpec {
        self.basis.field
    }

    pub fn dim(&self) -> usize {
        self.basis.rows
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn basis(&self) -> &Matrix {
        &self.basis
    }

    pub fn pivots(&self) -> &[usize] {
        &self.pivots
    }

    pub fn rows(&self) -> impl Iterator<Item = &[Scalar]> {
        (0..self.dim()).map(move |i| self.basis.row(i))
    }

    pub fn is_full(&self) -> bool {
        self.dim() == self.ambient_dim
    }

    /// Remainder of `v` after clearing the pivot positions.
    pub fn reduce(&self, v: &[Scalar]) -> Vec<Scalar> {
        assert_eq!(v.len(), self.ambient_dim);
        let mut out = v.to_vec();
        for (k, &pc) in self.pivots.iter().enumerate() {
            if out[pc].is_zero() {
                continue;
            }
            let c = out[pc].clone();
            for (j, b) in self.basis.row(k).iter().enumerate() {
                if !b.is_zero() {
                    out[j] = out[j].sub(&c.mul(b));
                }
            }
        }
        out
    }

    pub fn contains_vector(&self, v: &[Scalar]) -> bool {
        self.reduce(v).iter().all(Scalar::is_zero)
    }

    /// Coefficients of a member with respect to the RREF basis rows.
    pub fn coefficients(&self, v: &[Scalar]) -> Option<Vec<Scalar>> {
        if !self.contains_vector(v) {
            return None;
        }
        Some(self.pivots.iter().map(|&p| v[p].clone()).collect())
    }

    pub fn contains(&self, other: &SubspaceBasis) -> bool {
        other.ambient_dim == self.ambient_dim && other.rows().all(|r| self.contains_vector(r))
    }

    fn check_compatible(&self, other: &SubspaceBasis) -> Result<(), LinalgError> {
        if self.field() != other.field() {
            return Err(LinalgError::FieldMismatch(self.field(), other.field()));
        }
        if self.ambient_dim != other.ambient_dim {
            return Err(LinalgError::AmbientMismatch(self.ambient_dim, other.ambient_dim));
        }
        Ok(())
    }

    pub fn sum(&self, other: &SubspaceBasis) -> Result<SubspaceBasis, LinalgError> {
        self.check_compatible(other)?;
        let rows = self
            .basis
            .row_vecs()
            .into_iter()
            .chain(other.basis.row_vecs())
            .collect();
        SubspaceBasis::span(self.field(), self.ambient_dim, rows)
    }

    /// Zassenhaus: reduce [[A, A], [B, 0]]; rows with zero left half span A ∩ B.
    pub fn intersect(&self, other: &SubspaceBasis) -> Result<SubspaceBasis, LinalgError> {
        self.check_compatible(other)?;
        let n = self.ambient_dim;
        let field = self.field();
        let mut rows = Vec::with_capacity(self.dim() + other.dim());
        for r in self.rows() {
            let mut v = r.to_vec();
            v.extend_from_slice(r);
            rows.push(v);
        }
        for r in other.rows() {
            let mut v = r.to_vec();
            v.extend(std::iter::repeat_n(field.zero(), n));
            rows.push(v);
        }
        let (red, pivots) = eliminate(field, 2 * n, rows);
        let inter: Vec<Vec<Scalar>> = red
            .into_iter()
            .zip(pivots)
            .filter(|(_, p)| *p >= n)
            .map(|(r, _)| r[n..].to_vec())
            .collect();
        SubspaceBasis::span(field, n, inter)
    }

    pub fn combine(&self, other: &SubspaceBasis, mode: CombineMode) -> Result<SubspaceBasis, LinalgError> {
        match mode {
            CombineMode::Sum => self.sum(other),
            CombineMode::Intersect => self.intersect(other),
        }
    }

    /// Projection onto a contiguous range of coordinates (re-canonicalized).
    pub fn project(&self, range: std::ops::Range<usize>) -> SubspaceBasis {
        let n = range.len();
        let rows = self.rows().map(|r| r[range.clone()].to_vec()).collect();
        SubspaceBasis::span(self.field(), n, rows).expect("projected rows")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CombineMode {
    Sum,
    Intersect,
}

/// dim(big) - dim(small), after checking small ⊆ big.
pub fn quotient_dim(big: &SubspaceBasis, small: &SubspaceBasis) -> Result<usize, LinalgError> {
    big.check_compatible(small)?;
    if !big.contains(small) {
        return Err(LinalgError::NotContained);
    }
    Ok(big.dim() - small.dim())
}

/// Basis of {x : m x = 0}.
pub fn kernel_basis(m: &Matrix) -> SubspaceBasis {
    let field = m.field();
    let (r, _) = m.rref();
    let n = m.cols();
    let mut is_pivot = vec![false; n];
    for &p in r.pivots() {
        is_pivot[p] = true;
    }
    let gens = (0..n)
        .filter(|&f| !is_pivot[f])
        .map(|f| {
            let mut v = vec![field.zero(); n];
            v[f] = field.one();
            for (k, &p) in r.pivots().iter().enumerate() {
                v[p] = r.basis().get(k, f).neg();
            }
            v
        })
        .collect();
    SubspaceBasis::span(field, n, gens).expect("kernel rows")
}

// Inverse of a square matrix via [A | I] elimination; None when singular.
pub fn inverse(m: &Matrix) -> Option<Matrix> {
    if m.rows() != m.cols() {
        return None;
    }
    let n = m.rows();
    let field = m.field();
    let rows = (0..n)
        .map(|i| {
            let mut r = m.row(i).to_vec();
            r.extend((0..n).map(|j| if i == j { field.one() } else { field.zero() }));
            r
        })
        .collect();
    let (red, pivots) = eliminate(field, 2 * n, rows);
    if pivots.len() < n || pivots.iter().enumerate().any(|(i, &p)| p != i) {
        return None;
    }
    let inv_rows = red.into_iter().map(|r| r[n..].to_vec()).collect();
    Some(Matrix::from_rows(field, n, inv_rows).expect("square"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    fn gf(p: u64) -> FieldSpec {
        FieldSpec::prime(p).unwrap()
    }

    fn v(f: FieldSpec, xs: &[i64]) -> Vec<Scalar> {
        xs.iter().map(|&x| f.from_i64(x)).collect()
    }

    /// All vectors in the span, as residue tuples (finite fields only).
    fn enumerate_span(f: FieldSpec, n: usize, gens: &[Vec<Scalar>]) -> HashSet<Vec<u32>> {
        let p = f.characteristic();
        let mut out = HashSet::new();
        let k = gens.len();
        let total = (p as usize).pow(k as u32);
        for mut code in 0..total {
            let mut acc = vec![f.zero(); n];
            for g in gens {
                let c = f.from_i64((code % p as usize) as i64);
                code /= p as usize;
                for j in 0..n {
                    acc[j] = acc[j].add(&c.mul(&g[j]));
                }
            }
            out.insert(acc.iter().map(|s| s.residue().unwrap()).collect());
        }
        out
    }

    #[test]
    fn rref_examples() {
        let f = gf(2);
        let (b, r) = Matrix::from_i64_rows(f, &[&[1, 1], &[1, 1]]).rref();
        assert_eq!(r, 1);
        assert_eq!(b.basis(), &Matrix::from_i64_rows(f, &[&[1, 1]]));

        for field in [gf(2), gf(7), FieldSpec::Rationals] {
            let id = Matrix::identity(field, 3);
            let (b, r) = id.rref();
            assert_eq!(r, 3);
            assert_eq!(b.basis(), &id);
        }
    }

    #[test]
    fn rref_gf3_example_by_enumeration() {
        // det [[1,2],[2,1]] = 1 - 4 = -3 = 0 in GF(3): the rows are dependent.
        let f = gf(3);
        let m = Matrix::from_i64_rows(f, &[&[1, 2], &[2, 1]]);
        let span = enumerate_span(f, 2, &m.row_vecs());
        assert_eq!(span.len(), 3, "oracle: span has 3 elements, so rank 1");
        let (b, r) = m.rref();
        assert_eq!(r, 1);
        assert_eq!(b.basis(), &Matrix::from_i64_rows(f, &[&[1, 2]]));
        assert_eq!(enumerate_span(f, 2, &b.basis().row_vecs()), span);
    }

    #[test]
    fn kernel_examples() {
        let f = gf(2);
        let k = kernel_basis(&Matrix::from_i64_rows(f, &[&[1, 1]]));
        assert_eq!(k, SubspaceBasis::span(f, 2, vec![v(f, &[1, 1])]).unwrap());
        assert_eq!(kernel_basis(&Matrix::identity(f, 4)).dim(), 0);
        assert!(kernel_basis(&Matrix::zeros(f, 2, 3)).is_full());
        let q = FieldSpec::Rationals;
        let m = Matrix::from_i64_rows(q, &[&[1, 2, 3], &[2, 4, 6]]);
        let k = kernel_basis(&m);
        assert_eq!(k.dim(), 2);
        for r in k.rows() {
            assert!(m.mul_vec(r).iter().all(Scalar::is_zero));
        }
    }

    #[test]
    fn combine_examples() {
        let f = gf(2);
        let full = SubspaceBasis::span(f, 2, vec![v(f, &[1, 0]), v(f, &[0, 1])]).unwrap();
        let diag = SubspaceBasis::span(f, 2, vec![v(f, &[1, 1])]).unwrap();
        assert_eq!(full.intersect(&diag).unwrap(), diag);
        let e0 = SubspaceBasis::coordinate(f, 2, &[0]);
        let e1 = SubspaceBasis::coordinate(f, 2, &[1]);
        assert!(e0.sum(&e1).unwrap().is_full());

        let a = SubspaceBasis::span(f, 3, vec![v(f, &[1, 1, 0]), v(f, &[0, 1, 1])]).unwrap();
        let b = SubspaceBasis::span(f, 3, vec![v(f, &[1, 0, 1])]).unwrap();
        let sa = enumerate_span(f, 3, &a.basis().row_vecs());
        let sb = enumerate_span(f, 3, &b.basis().row_vecs());
        let inter: HashSet<_> = sa.intersection(&sb).cloned().collect();
        assert_eq!(inter.len(), 2);
        let got = a.intersect(&b).unwrap();
        assert_eq!(got, b);
        assert_eq!(enumerate_span(f, 3, &got.basis().row_vecs()), inter);

        assert!(matches!(
            a.sum(&SubspaceBasis::zero(f, 2)),
            Err(LinalgError::AmbientMismatch(3, 2))
        ));
    }

    #[test]
    fn quotient_examples() {
        let f = gf(2);
        let full2 = SubspaceBasis::full(f, 2);
        let diag = SubspaceBasis::span(f, 2, vec![v(f, &[1, 1])]).unwrap();
        assert_eq!(quotient_dim(&full2, &diag), Ok(1));
        assert_eq!(quotient_dim(&diag, &diag), Ok(0));
        assert_eq!(
            quotient_dim(&SubspaceBasis::full(f, 3), &SubspaceBasis::zero(f, 3)),
            Ok(3)
        );
        assert_eq!(quotient_dim(&diag, &full2), Err(LinalgError::NotContained));
    }

    #[test]
    fn rational_intersection() {
        let q = FieldSpec::Rationals;
        let a = SubspaceBasis::span(q, 3, vec![v(q, &[1, 2, 0]), v(q, &[0, 1, 3])]).unwrap();
        let b = SubspaceBasis::span(q, 3, vec![v(q, &[1, 3, 3]), v(q, &[0, 0, 1])]).unwrap();
        let i = a.intersect(&b).unwrap();
        assert_eq!(i.dim(), 1);
        assert!(a.contains(&i) && b.contains(&i));
        assert!(i.contains_vector(&v(q, &[1, 3, 3])));
    }

    #[test]
    fn matrix_inverse() {
        let f = gf(5);
        let m = Matrix::from_i64_rows(f, &[&[1, 2], &[3, 4]]);
        let inv = inverse(&m).unwrap();
        assert_eq!(m.mul(&inv).unwrap(), Matrix::identity(f, 2));
        assert!(inverse(&Matrix::from_i64_rows(f, &[&[1, 2], &[2, 4]])).is_none());
    }
}
