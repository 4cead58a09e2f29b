//! Dense exact matrices, subspaces and polynomials over [`Scalar`].
//!
//! Products skip zero entries, which keeps the block-sparse module matrices
//! cheap without a separate sparse format.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use serde::Serialize;

use crate::field::Scalar;

pub type Vector = Vec<Scalar>;

#[derive(Clone, PartialEq, Eq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<Scalar>,
}

impl fmt::Debug for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Matrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            let row: Vec<String> = self.row(i).iter().map(|s| s.to_string()).collect();
            writeln!(f, "  [{}]", row.join(", "))?;
        }
        write!(f, "]")
    }
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix { rows, cols, data: vec![Scalar::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Matrix::zeros(n, n);
        for i in 0..n {
            m.set(i, i, Scalar::one());
        }
        m
    }

    pub fn diagonal(entries: &[Scalar]) -> Self {
        let mut m = Matrix::zeros(entries.len(), entries.len());
        for (i, e) in entries.iter().enumerate() {
            m.set(i, i, e.clone());
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Scalar) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Matrix { rows, cols, data }
    }

    /// Matrix whose columns are the given vectors.
    pub fn from_columns(n: usize, cols: &[Vector]) -> Self {
        Matrix::from_fn(n, cols.len(), |i, j| cols[j][i].clone())
    }

    pub fn from_rows(cols: usize, rows: &[Vector]) -> Self {
        Matrix::from_fn(rows.len(), cols, |i, j| rows[i][j].clone())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &Scalar {
        &self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: Scalar) {
        self.data[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> &[Scalar] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vector {
        (0..self.rows).map(|i| self.get(i, j).clone()).collect()
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(Scalar::is_zero)
    }

    pub fn nonzero_count(&self) -> usize {
        self.data.iter().filter(|s| !s.is_zero()).count()
    }

    pub fn first_nonzero(&self) -> Option<(usize, usize, Scalar)> {
        let p = self.data.iter().position(|s| !s.is_zero())?;
        Some((p / self.cols, p % self.cols, self.data[p].clone()))
    }

    pub fn is_diagonal(&self) -> bool {
        (0..self.rows).all(|i| (0..self.cols).all(|j| i == j || self.get(i, j).is_zero()))
    }

    pub fn diag_entries(&self) -> Vec<Scalar> {
        (0..self.rows.min(self.cols)).map(|i| self.get(i, i).clone()).collect()
    }

    pub fn transpose(&self) -> Matrix {
        Matrix::from_fn(self.cols, self.rows, |i, j| self.get(j, i).clone())
    }

    pub fn scale(&self, c: &Scalar) -> Matrix {
        if c.is_zero() {
            return Matrix::zeros(self.rows, self.cols);
        }
        let data = self
            .data
            .iter()
            .map(|s| if s.is_zero() { Scalar::zero() } else { s * c })
            .collect();
        Matrix { rows: self.rows, cols: self.cols, data }
    }

    /// `self + c*I`.
    pub fn add_scalar(&self, c: &Scalar) -> Matrix {
        assert!(self.is_square());
        let mut m = self.clone();
        for i in 0..self.rows {
            let v = m.get(i, i) + c;
            m.set(i, i, v);
        }
        m
    }

    pub fn kron(&self, o: &Matrix) -> Matrix {
        let mut m = Matrix::zeros(self.rows * o.rows, self.cols * o.cols);
        for i1 in 0..self.rows {
            for j1 in 0..self.cols {
                let a = self.get(i1, j1);
                if a.is_zero() {
                    continue;
                }
                for i2 in 0..o.rows {
                    for j2 in 0..o.cols {
                        let b = o.get(i2, j2);
                        if !b.is_zero() {
                            m.set(i1 * o.rows + i2, j1 * o.cols + j2, a * b);
                        }
                    }
                }
            }
        }
        m
    }

    pub fn apply(&self, v: &[Scalar]) -> Vector {
        assert_eq!(v.len(), self.cols);
        (0..self.rows)
            .map(|i| {
                let mut acc = Scalar::zero();
                for (a, b) in self.row(i).iter().zip(v) {
                    if !a.is_zero() && !b.is_zero() {
                        acc += &(a * b);
                    }
                }
                acc
            })
            .collect()
    }

    /// Row vector times matrix.
    pub fn apply_left(&self, v: &[Scalar]) -> Vector {
        assert_eq!(v.len(), self.rows);
        let mut out = vec![Scalar::zero(); self.cols];
        for (i, c) in v.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            for (j, a) in self.row(i).iter().enumerate() {
                if !a.is_zero() {
                    out[j] += &(c * a);
                }
            }
        }
        out
    }

    fn mul_ref(&self, o: &Matrix) -> Matrix {
        assert_eq!(self.cols, o.rows, "dimension mismatch in product");
        let mut m = Matrix::zeros(self.rows, o.cols);
        let nz_rows: Vec<Vec<usize>> = (0..o.rows)
            .map(|k| (0..o.cols).filter(|&j| !o.get(k, j).is_zero()).collect())
            .collect();
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for &j in &nz_rows[k] {
                    let idx = i * m.cols + j;
                    m.data[idx] += &(a * o.get(k, j));
                }
            }
        }
        m
    }

    fn zip_with(&self, o: &Matrix, f: impl Fn(&Scalar, &Scalar) -> Scalar) -> Matrix {
        assert_eq!((self.rows, self.cols), (o.rows, o.cols), "shape mismatch");
        let data = self.data.iter().zip(&o.data).map(|(a, b)| f(a, b)).collect();
        Matrix { rows: self.rows, cols: self.cols, data }
    }

    pub fn pow(&self, e: u32) -> Matrix {
        (0..e).fold(Matrix::identity(self.rows), |acc, _| &acc * self)
    }

    /// Reduced row echelon form and pivot columns.
    pub fn rref(&self) -> (Matrix, Vec<usize>) {
        let mut m = self.clone();
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..m.cols {
            if r == m.rows {
                break;
            }
            let Some(p) = (r..m.rows).find(|&i| !m.get(i, c).is_zero()) else { continue };
            m.swap_rows(r, p);
            let inv = m.get(r, c).inv();
            for j in c..m.cols {
                if !m.get(r, j).is_zero() {
                    let v = m.get(r, j) * &inv;
                    m.set(r, j, v);
                }
            }
            let pivot_row: Vec<(usize, Scalar)> =
                (c..m.cols).filter(|&j| !m.get(r, j).is_zero()).map(|j| (j, m.get(r, j).clone())).collect();
            for i in 0..m.rows {
                if i == r {
                    continue;
                }
                let f = m.get(i, c).clone();
                if f.is_zero() {
                    continue;
                }
                for (j, v) in &pivot_row {
                    let nv = m.get(i, *j) - &(&f * v);
                    m.set(i, *j, nv);
                }
            }
            pivots.push(c);
            r += 1;
        }
        (m, pivots)
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for j in 0..self.cols {
            self.data.swap(a * self.cols + j, b * self.cols + j);
        }
    }

    pub fn rank(&self) -> usize {
        self.rref().1.len()
    }

    /// Basis of `{v : M v = 0}`, one vector per free column, in rref order.
    pub fn nullspace(&self) -> Vec<Vector> {
        let (r, pivots) = self.rref();
        let mut out = Vec::new();
        for free in (0..self.cols).filter(|c| !pivots.contains(c)) {
            let mut v = vec![Scalar::zero(); self.cols];
            v[free] = Scalar::one();
            for (row, &pc) in pivots.iter().enumerate() {
                v[pc] = -r.get(row, free);
            }
            out.push(v);
        }
        out
    }

    pub fn inverse(&self) -> Option<Matrix> {
        assert!(self.is_square());
        let n = self.rows;
        let aug = Matrix::from_fn(n, 2 * n, |i, j| {
            if j < n {
                self.get(i, j).clone()
            } else if j - n == i {
                Scalar::one()
            } else {
                Scalar::zero()
            }
        });
        let (r, pivots) = aug.rref();
        if pivots.len() < n || pivots[n - 1] != n - 1 {
            return None;
        }
        Some(Matrix::from_fn(n, n, |i, j| r.get(i, j + n).clone()))
    }

    /// Solves `self * X = rhs` when `self` has full column rank and a solution exists.
    pub fn solve_left_cancel(&self, rhs: &Matrix) -> Option<Matrix> {
        assert_eq!(self.rows, rhs.rows);
        let n = self.cols;
        let aug = Matrix::from_fn(self.rows, n + rhs.cols, |i, j| {
            if j < n {
                self.get(i, j).clone()
            } else {
                rhs.get(i, j - n).clone()
            }
        });
        let (r, pivots) = aug.rref();
        if pivots.len() != n || pivots.iter().enumerate().any(|(i, &p)| p != i) {
            return None;
        }
        Some(Matrix::from_fn(n, rhs.cols, |i, j| r.get(i, j + n).clone()))
    }

    /// `self * o - o * self`.
    pub fn commutator(&self, o: &Matrix) -> Matrix {
        &(self * o) - &(o * self)
    }
}

impl Mul for &Matrix {
    type Output = Matrix;
    fn mul(self, o: &Matrix) -> Matrix {
        self.mul_ref(o)
    }
}

impl Add for &Matrix {
    type Output = Matrix;
    fn add(self, o: &Matrix) -> Matrix {
        self.zip_with(o, |a, b| a + b)
    }
}

impl Sub for &Matrix {
    type Output = Matrix;
    fn sub(self, o: &Matrix) -> Matrix {
        self.zip_with(o, |a, b| a - b)
    }
}

impl Neg for &Matrix {
    type Output = Matrix;
    fn neg(self) -> Matrix {
        self.scale(&Scalar::from_int(-1))
    }
}

macro_rules! forward_matrix {
    ($($tr:ident $m:ident),*) => {$(
        impl $tr<Matrix> for Matrix {
            type Output = Matrix;
            fn $m(self, o: Matrix) -> Matrix { (&self).$m(&o) }
        }
        impl $tr<&Matrix> for Matrix {
            type Output = Matrix;
            fn $m(self, o: &Matrix) -> Matrix { (&self).$m(o) }
        }
        impl $tr<Matrix> for &Matrix {
            type Output = Matrix;
            fn $m(self, o: Matrix) -> Matrix { self.$m(&o) }
        }
    )*};
}

forward_matrix!(Add add, Sub sub, Mul mul);

/// A subspace of `F^n` held as reduced echelon rows.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Subspace {
    ambient: usize,
    rows: Vec<Vector>,
    pivots: Vec<usize>,
}

impl Subspace {
    pub fn zero(ambient: usize) -> Self {
        Subspace { ambient, rows: Vec::new(), pivots: Vec::new() }
    }

    pub fn full(ambient: usize) -> Self {
        let mut s = Subspace::zero(ambient);
        for i in 0..ambient {
            s.insert(&unit(ambient, i));
        }
        s
    }

    pub fn span<'a>(ambient: usize, vs: impl IntoIterator<Item = &'a Vector>) -> Self {
        let mut s = Subspace::zero(ambient);
        for v in vs {
            s.insert(v);
        }
        s
    }

    /// Span of coordinate vectors.
    pub fn coordinate(ambient: usize, idx: &[usize]) -> Self {
        let vs: Vec<Vector> = idx.iter().map(|&i| unit(ambient, i)).collect();
        Subspace::span(ambient, &vs)
    }

    pub fn ambient(&self) -> usize {
        self.ambient
    }

    pub fn dim(&self) -> usize {
        self.rows.len()
    }

    pub fn basis(&self) -> &[Vector] {
        &self.rows
    }

    fn reduce(&self, v: &[Scalar]) -> Vector {
        let mut w = v.to_vec();
        for (row, &p) in self.rows.iter().zip(&self.pivots) {
            if w[p].is_zero() {
                continue;
            }
            let f = w[p].clone();
            for (j, r) in row.iter().enumerate() {
                if !r.is_zero() {
                    w[j] -= &(&f * r);
                }
            }
        }
        w
    }

    pub fn contains(&self, v: &[Scalar]) -> bool {
        self.reduce(v).iter().all(Scalar::is_zero)
    }

    /// Adds `v`; returns whether the dimension grew.
    pub fn insert(&mut self, v: &[Scalar]) -> bool {
        assert_eq!(v.len(), self.ambient);
        let mut w = self.reduce(v);
        let Some(p) = w.iter().position(|s| !s.is_zero()) else { return false };
        let inv = w[p].inv();
        for s in w.iter_mut() {
            if !s.is_zero() {
                *s = &*s * &inv;
            }
        }
        for row in self.rows.iter_mut() {
            if row[p].is_zero() {
                continue;
            }
            let f = row[p].clone();
            for (j, c) in w.iter().enumerate() {
                if !c.is_zero() {
                    row[j] -= &(&f * c);
                }
            }
        }
        let at = self.pivots.partition_point(|&q| q < p);
        self.rows.insert(at, w);
        self.pivots.insert(at, p);
        true
    }

    pub fn sum(&self, o: &Subspace) -> Subspace {
        let mut s = self.clone();
        for v in &o.rows {
            s.insert(v);
        }
        s
    }

    pub fn intersection(&self, o: &Subspace) -> Subspace {
        let (a, b) = (self.dim(), o.dim());
        if a == 0 || b == 0 {
            return Subspace::zero(self.ambient);
        }
        // columns: basis of self, then basis of o
        let m = Matrix::from_fn(self.ambient, a + b, |i, j| {
            if j < a {
                self.rows[j][i].clone()
            } else {
                o.rows[j - a][i].clone()
            }
        });
        let mut out = Subspace::zero(self.ambient);
        for c in m.nullspace() {
            let mut v = vec![Scalar::zero(); self.ambient];
            for (k, coef) in c.iter().take(a).enumerate() {
                if coef.is_zero() {
                    continue;
                }
                for (j, r) in self.rows[k].iter().enumerate() {
                    if !r.is_zero() {
                        v[j] += &(coef * r);
                    }
                }
            }
            out.insert(&v);
        }
        out
    }

    pub fn contains_subspace(&self, o: &Subspace) -> bool {
        o.rows.iter().all(|v| self.contains(v))
    }

    pub fn same_as(&self, o: &Subspace) -> bool {
        self.ambient == o.ambient && self.rows == o.rows
    }

    pub fn is_invariant(&self, m: &Matrix) -> bool {
        self.rows.iter().all(|v| self.contains(&m.apply(v)))
    }

    /// `{w : <w, v> = 0 for all v in self}`.
    pub fn annihilator(&self) -> Subspace {
        if self.rows.is_empty() {
            return Subspace::full(self.ambient);
        }
        let m = Matrix::from_rows(self.ambient, &self.rows);
        Subspace::span(self.ambient, &m.nullspace())
    }
}

pub fn unit(n: usize, i: usize) -> Vector {
    let mut v = vec![Scalar::zero(); n];
    v[i] = Scalar::one();
    v
}

/// Polynomial with coefficients listed constant term first.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(transparent)]
pub struct Poly {
    coeffs: Vec<Scalar>,
}

impl Poly {
    pub fn new(mut coeffs: Vec<Scalar>) -> Self {
        while coeffs.last().is_some_and(Scalar::is_zero) {
            coeffs.pop();
        }
        Poly { coeffs }
    }

    pub fn zero() -> Self {
        Poly { coeffs: Vec::new() }
    }

    pub fn constant(c: Scalar) -> Self {
        Poly::new(vec![c])
    }

    /// `lambda + c`.
    pub fn linear(c: Scalar) -> Self {
        Poly::new(vec![c, Scalar::one()])
    }

    pub fn monomial(deg: usize) -> Self {
        let mut c = vec![Scalar::zero(); deg + 1];
        c[deg] = Scalar::one();
        Poly { coeffs: c }
    }

    pub fn coeffs(&self) -> &[Scalar] {
        &self.coeffs
    }

    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn is_monic(&self) -> bool {
        self.coeffs.last().is_some_and(Scalar::is_one)
    }

    pub fn eval(&self, x: &Scalar) -> Scalar {
        self.coeffs.iter().rev().fold(Scalar::zero(), |acc, c| &(&acc * x) + c)
    }

    pub fn scale(&self, c: &Scalar) -> Poly {
        Poly::new(self.coeffs.iter().map(|a| a * c).collect())
    }
}

impl Mul for &Poly {
    type Output = Poly;
    fn mul(self, o: &Poly) -> Poly {
        if self.coeffs.is_empty() || o.coeffs.is_empty() {
            return Poly::zero();
        }
        let mut c = vec![Scalar::zero(); self.coeffs.len() + o.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in o.coeffs.iter().enumerate() {
                c[i + j] += &(a * b);
            }
        }
        Poly::new(c)
    }
}

impl Add for &Poly {
    type Output = Poly;
    fn add(self, o: &Poly) -> Poly {
        let n = self.coeffs.len().max(o.coeffs.len());
        let z = Scalar::zero();
        Poly::new(
            (0..n)
                .map(|i| self.coeffs.get(i).unwrap_or(&z) + o.coeffs.get(i).unwrap_or(&z))
                .collect(),
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(rows: &[&[i64]]) -> Matrix {
        Matrix::from_fn(rows.len(), rows[0].len(), |i, j| Scalar::from_int(rows[i][j]))
    }

    #[test]
    fn products_and_kron() {
        let a = m(&[&[1, 2], &[0, 3]]);
        let b = m(&[&[0, 1], &[1, 0]]);
        assert_eq!(&a * &b, m(&[&[2, 1], &[3, 0]]));
        let k = a.kron(&b);
        assert_eq!(k.get(0, 1), &Scalar::from_int(1));
        assert_eq!(k.get(3, 2), &Scalar::from_int(3));
        assert_eq!(k.nonzero_count(), 6);
        // mixed product rule
        let c = m(&[&[2, 0], &[1, 1]]);
        assert_eq!(&a.kron(&b) * &c.kron(&a), (&a * &c).kron(&(&b * &a)));
    }

    #[test]
    fn rank_nullspace_inverse() {
        let a = m(&[&[1, 2, 3], &[2, 4, 6], &[1, 0, 1]]);
        assert_eq!(a.rank(), 2);
        let ns = a.nullspace();
        assert_eq!(ns.len(), 1);
        assert!(a.apply(&ns[0]).iter().all(Scalar::is_zero));
        assert!(a.inverse().is_none());
        let b = m(&[&[2, 1], &[1, 1]]);
        assert_eq!(&b * &b.inverse().unwrap(), Matrix::identity(2));
    }

    #[test]
    fn subspace_ops() {
        let n = 4;
        let e = |i| unit(n, i);
        let u = Subspace::span(n, &[e(0), e(1)]);
        let w = Subspace::span(n, &[e(1), e(2)]);
        assert_eq!(u.intersection(&w).dim(), 1);
        assert!(u.intersection(&w).contains(&e(1)));
        assert_eq!(u.sum(&w).dim(), 3);
        assert_eq!(u.annihilator().dim(), 2);
        assert!(u.annihilator().contains(&e(3)));
        assert!(Subspace::full(n).same_as(&u.sum(&Subspace::span(n, &[e(2), e(3)]))));
    }

    #[test]
    fn solve_left_cancel_recovers_block() {
        let w = m(&[&[1, 0], &[1, 1], &[0, 2]]);
        let x = m(&[&[3, 1], &[0, -1]]);
        assert_eq!(w.solve_left_cancel(&(&w * &x)), Some(x));
    }

    #[test]
    fn poly_basics() {
        let p = &Poly::linear(Scalar::from_int(2)) * &Poly::linear(Scalar::from_int(-3));
        assert_eq!(p.coeffs(), &[Scalar::from_int(-6), Scalar::from_int(-1), Scalar::one()]);
        assert!(p.is_monic());
        assert!(p.eval(&Scalar::from_int(3)).is_zero());
        assert_eq!(p.degree(), Some(2));
    }
}
