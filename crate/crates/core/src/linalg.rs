//! Dense exact linear algebra over pluggable coefficient domains.
//!
//! Everything here is value-semantic: a `Matrix<T>` owns its entries and all
//! operations are pure. Subspaces are column spans; canonical bases are
//! echelon forms so equality of spans is plain equality of matrices.

use crate::error::{invalid, Result};

/// Commutative ring element. `zero`/`one` take `&self` so domains that carry a
/// runtime context (finite fields, Galois rings) can mint constants.
pub trait Ring: Clone + PartialEq + std::fmt::Debug {
    fn zero(&self) -> Self;
    fn one(&self) -> Self;
    fn add(&self, o: &Self) -> Self;
    fn neg(&self) -> Self;
    fn mul(&self, o: &Self) -> Self;
    fn is_zero(&self) -> bool;
    fn sub(&self, o: &Self) -> Self {
        self.add(&o.neg())
    }
}

/// Ring with division by nonzero elements.
pub trait FieldOps: Ring {
    fn inv(&self) -> Option<Self>;
}

/// Arbitrary-precision rational; reduced form and positive denominator are
/// guaranteed by construction.
pub type ExactRational = num::BigRational;

impl Ring for ExactRational {
    fn zero(&self) -> Self {
        num::Zero::zero()
    }
    fn one(&self) -> Self {
        num::One::one()
    }
    fn add(&self, o: &Self) -> Self {
        self + o
    }
    fn neg(&self) -> Self {
        -self
    }
    fn mul(&self, o: &Self) -> Self {
        self * o
    }
    fn is_zero(&self) -> bool {
        num::Zero::is_zero(self)
    }
}

impl FieldOps for ExactRational {
    fn inv(&self) -> Option<Self> {
        if Ring::is_zero(self) {
            None
        } else {
            Some(self.recip())
        }
    }
}

/// Prime field element with inline modulus; cheap scalar for restriction-of-
/// scalars fast paths.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub struct Fp {
    pub p: u64,
    pub v: u64,
}

impl Fp {
    pub fn new(p: u64, v: u64) -> Self {
        Fp { p, v: v % p }
    }
}

impl Ring for Fp {
    fn zero(&self) -> Self {
        Fp { p: self.p, v: 0 }
    }
    fn one(&self) -> Self {
        Fp { p: self.p, v: 1 % self.p }
    }
    fn add(&self, o: &Self) -> Self {
        Fp { p: self.p, v: (self.v + o.v) % self.p }
    }
    fn neg(&self) -> Self {
        Fp { p: self.p, v: (self.p - self.v) % self.p }
    }
    fn mul(&self, o: &Self) -> Self {
        Fp { p: self.p, v: ((self.v as u128 * o.v as u128) % self.p as u128) as u64 }
    }
    fn is_zero(&self) -> bool {
        self.v == 0
    }
}

impl FieldOps for Fp {
    fn inv(&self) -> Option<Self> {
        if self.v == 0 {
            return None;
        }
        // extended Euclid
        let (mut a, mut b) = (self.v as i128, self.p as i128);
        let (mut x0, mut x1) = (1i128, 0i128);
        while b != 0 {
            let q = a / b;
            (a, b) = (b, a - q * b);
            (x0, x1) = (x1, x0 - q * x1);
        }
        debug_assert_eq!(a, 1);
        let p = self.p as i128;
        Some(Fp { p: self.p, v: ((x0 % p + p) % p) as u64 })
    }
}

/// Row-major dense matrix.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Matrix<T: Ring> {
    pub rows: usize,
    pub cols: usize,
    d: Vec<T>,
}

impl<T: Ring> std::ops::Index<(usize, usize)> for Matrix<T> {
    type Output = T;
    fn index(&self, (i, j): (usize, usize)) -> &T {
        &self.d[i * self.cols + j]
    }
}

impl<T: Ring> std::ops::IndexMut<(usize, usize)> for Matrix<T> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut T {
        &mut self.d[i * self.cols + j]
    }
}

impl<T: Ring> Matrix<T> {
    pub fn zero(ex: &T, rows: usize, cols: usize) -> Self {
        Matrix { rows, cols, d: vec![ex.zero(); rows * cols] }
    }

    pub fn identity(ex: &T, n: usize) -> Self {
        let mut m = Self::zero(ex, n, n);
        for i in 0..n {
            m[(i, i)] = ex.one();
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut d = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                d.push(f(i, j));
            }
        }
        Matrix { rows, cols, d }
    }

    pub fn from_rows(rows: Vec<Vec<T>>) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |x| x.len());
        assert!(rows.iter().all(|x| x.len() == c));
        Matrix { rows: r, cols: c, d: rows.into_iter().flatten().collect() }
    }

    pub fn from_cols(cols: Vec<Vec<T>>) -> Self {
        let c = cols.len();
        let r = cols.first().map_or(0, |x| x.len());
        Matrix::from_fn(r, c, |i, j| cols[j][i].clone())
    }

    pub fn row(&self, i: usize) -> Vec<T> {
        self.d[i * self.cols..(i + 1) * self.cols].to_vec()
    }

    pub fn col(&self, j: usize) -> Vec<T> {
        (0..self.rows).map(|i| self[(i, j)].clone()).collect()
    }

    pub fn entries(&self) -> &[T] {
        &self.d
    }

    pub fn transpose(&self) -> Self {
        Matrix::from_fn(self.cols, self.rows, |i, j| self[(j, i)].clone())
    }

    pub fn map<U: Ring>(&self, mut f: impl FnMut(&T) -> U) -> Matrix<U> {
        Matrix { rows: self.rows, cols: self.cols, d: self.d.iter().map(|x| f(x)).collect() }
    }

    pub fn add(&self, o: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (o.rows, o.cols));
        Matrix {
            rows: self.rows,
            cols: self.cols,
            d: self.d.iter().zip(&o.d).map(|(a, b)| a.add(b)).collect(),
        }
    }

    pub fn sub(&self, o: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (o.rows, o.cols));
        Matrix {
            rows: self.rows,
            cols: self.cols,
            d: self.d.iter().zip(&o.d).map(|(a, b)| a.sub(b)).collect(),
        }
    }

    pub fn neg(&self) -> Self {
        self.map(|x| x.neg())
    }

    pub fn scale(&self, s: &T) -> Self {
        self.map(|x| x.mul(s))
    }

    pub fn matmul(&self, o: &Self) -> Self {
        assert_eq!(self.cols, o.rows, "shape mismatch in matmul");
        let ex = if let Some(x) = self.d.first() { x.zero() } else { o.d[0].zero() };
        let mut m = Matrix::zero(&ex, self.rows, o.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = &self[(i, k)];
                if a.is_zero() {
                    continue;
                }
                for j in 0..o.cols {
                    let t = a.mul(&o[(k, j)]);
                    m[(i, j)] = m[(i, j)].add(&t);
                }
            }
        }
        m
    }

    pub fn mul_vec(&self, v: &[T]) -> Vec<T> {
        assert_eq!(self.cols, v.len());
        (0..self.rows)
            .map(|i| {
                let mut acc = v[0].zero();
                for j in 0..self.cols {
                    acc = acc.add(&self[(i, j)].mul(&v[j]));
                }
                acc
            })
            .collect()
    }

    pub fn hstack(&self, o: &Self) -> Self {
        assert_eq!(self.rows, o.rows);
        Matrix::from_fn(self.rows, self.cols + o.cols, |i, j| {
            if j < self.cols { self[(i, j)].clone() } else { o[(i, j - self.cols)].clone() }
        })
    }

    pub fn vstack(&self, o: &Self) -> Self {
        assert_eq!(self.cols, o.cols);
        Matrix::from_fn(self.rows + o.rows, self.cols, |i, j| {
            if i < self.rows { self[(i, j)].clone() } else { o[(i - self.rows, j)].clone() }
        })
    }

    pub fn submatrix(&self, r0: usize, r1: usize, c0: usize, c1: usize) -> Self {
        Matrix::from_fn(r1 - r0, c1 - c0, |i, j| self[(r0 + i, c0 + j)].clone())
    }

    pub fn is_zero_matrix(&self) -> bool {
        self.d.iter().all(|x| x.is_zero())
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for j in 0..self.cols {
            self.d.swap(a * self.cols + j, b * self.cols + j);
        }
    }
}

impl<T: FieldOps> Matrix<T> {
    /// Reduced row-echelon form and the pivot column list.
    pub fn rref(&self) -> (Self, Vec<usize>) {
        let mut m = self.clone();
        let mut piv = Vec::new();
        let mut r = 0;
        for c in 0..m.cols {
            if r == m.rows {
                break;
            }
            let Some(pr) = (r..m.rows).find(|&i| !m[(i, c)].is_zero()) else { continue };
            m.swap_rows(r, pr);
            let inv = m[(r, c)].inv().expect("nonzero pivot");
            for j in c..m.cols {
                m[(r, j)] = m[(r, j)].mul(&inv);
            }
            for i in 0..m.rows {
                if i != r && !m[(i, c)].is_zero() {
                    let f = m[(i, c)].clone();
                    for j in c..m.cols {
                        let t = m[(r, j)].mul(&f);
                        m[(i, j)] = m[(i, j)].sub(&t);
                    }
                }
            }
            piv.push(c);
            r += 1;
        }
        (m, piv)
    }

    pub fn rank(&self) -> usize {
        self.rref().1.len()
    }

    /// Columns form a basis of the right null space.
    pub fn kernel(&self) -> Self {
        let ex = self.d.first().cloned().unwrap_or_else(|| panic!("kernel of empty matrix"));
        let (r, piv) = self.rref();
        let free: Vec<usize> = (0..self.cols).filter(|c| !piv.contains(c)).collect();
        let mut k = Matrix::zero(&ex, self.cols, free.len());
        for (fi, &f) in free.iter().enumerate() {
            k[(f, fi)] = ex.one();
            for (pi, &p) in piv.iter().enumerate() {
                k[(p, fi)] = r[(pi, f)].neg();
            }
        }
        k
    }

    /// One solution of `self * x = b`, if any.
    pub fn solve(&self, b: &[T]) -> Option<Vec<T>> {
        assert_eq!(self.rows, b.len());
        let ex = b[0].zero();
        let aug = self.hstack(&Matrix::from_cols(vec![b.to_vec()]));
        let (r, piv) = aug.rref();
        if piv.contains(&self.cols) {
            return None; // pivot in the constant column: inconsistent
        }
        let mut x = vec![ex; self.cols];
        for (pi, &p) in piv.iter().enumerate() {
            x[p] = r[(pi, self.cols)].clone();
        }
        Some(x)
    }

    pub fn inverse(&self) -> Option<Self> {
        assert_eq!(self.rows, self.cols);
        let ex = self.d[0].zero();
        let aug = self.hstack(&Matrix::identity(&ex, self.rows));
        let (r, piv) = aug.rref();
        // all pivots must land in the left half, one per column
        if piv.len() < self.rows || piv[self.rows - 1] != self.rows - 1 {
            return None;
        }
        Some(r.submatrix(0, self.rows, self.cols, 2 * self.cols))
    }

    /// Canonical basis of the column span (columns of the result).
    pub fn column_echelon(&self) -> Self {
        let (r, piv) = self.transpose().rref();
        r.submatrix(0, piv.len(), 0, r.cols).transpose()
    }

    /// Canonical row-space basis (rref rows, zero rows dropped).
    pub fn row_echelon(&self) -> Self {
        let (r, piv) = self.rref();
        r.submatrix(0, piv.len(), 0, r.cols)
    }
}

/// Canonical basis of colspan(a) + colspan(b).
pub fn span_sum<T: FieldOps>(a: &Matrix<T>, b: &Matrix<T>) -> Matrix<T> {
    a.hstack(b).column_echelon()
}

/// Canonical basis of colspan(a) ∩ colspan(b).
pub fn span_intersection<T: FieldOps>(a: &Matrix<T>, b: &Matrix<T>) -> Result<Matrix<T>> {
    if a.rows != b.rows {
        return invalid("span_intersection: ambient dimensions differ");
    }
    let k = a.hstack(b).kernel();
    // each kernel column (u; v) gives a*u = -b*v in the intersection
    let mut gens = Vec::new();
    for j in 0..k.cols {
        let u: Vec<T> = (0..a.cols).map(|i| k[(i, j)].clone()).collect();
        gens.push(a.mul_vec(&u));
    }
    let ex = a.entries().first().or_else(|| b.entries().first()).expect("nonempty").clone();
    if gens.is_empty() {
        return Ok(Matrix::zero(&ex, a.rows, 0));
    }
    Ok(Matrix::from_cols(gens).column_echelon())
}

/// Is v in colspan(basis)?
pub fn span_contains<T: FieldOps>(basis: &Matrix<T>, v: &[T]) -> bool {
    if basis.cols == 0 {
        return v.iter().all(|x| x.is_zero());
    }
    basis.solve(v).is_some()
}

pub fn spans_equal<T: FieldOps>(a: &Matrix<T>, b: &Matrix<T>) -> bool {
    a.column_echelon() == b.column_echelon()
}

#[cfg(test)]
mod tests {
    use super::*;
    use num::{BigInt, BigRational};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn f3(v: u64) -> Fp {
        Fp::new(3, v)
    }

    #[test]
    fn rref_examples() {
        let id = Matrix::identity(&f3(0), 3);
        let (r, piv) = id.rref();
        assert_eq!(r, id);
        assert_eq!(piv, vec![0, 1, 2]);

        let z = Matrix::zero(&Fp::new(2, 0), 2, 4);
        let (r, piv) = z.rref();
        assert_eq!(r, z);
        assert!(piv.is_empty());

        // [[1,1],[1,1]] over F2 -> [[1,1],[0,0]]
        let one = Fp::new(2, 1);
        let m = Matrix::from_rows(vec![vec![one; 2], vec![one; 2]]);
        let (r, piv) = m.rref();
        assert_eq!(piv, vec![0]);
        assert_eq!(r.row(0), vec![one, one]);
        assert!(r.row(1).iter().all(|x| x.is_zero()));
    }

    #[test]
    fn kernel_examples() {
        let id = Matrix::identity(&f3(0), 3);
        assert_eq!(id.kernel().cols, 0);

        let z = Matrix::zero(&f3(0), 3, 3);
        let k = z.kernel();
        assert_eq!(k, Matrix::identity(&f3(0), 3));

        // [[1,1]] over F3 -> span (1,2)
        let m = Matrix::from_rows(vec![vec![f3(1), f3(1)]]);
        let k = m.kernel();
        assert_eq!(k.cols, 1);
        assert!(m.matmul(&k).is_zero_matrix());
        // normalize: expect (1,2) up to scalar; kernel basis has free var = 1 in slot 1
        assert_eq!((k[(0, 0)].v + 1) % 3, 0); // -1 = 2
        assert_eq!(k[(1, 0)].v, 1);
    }

    #[test]
    fn rank_nullity_random() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..200 {
            let rows = rng.gen_range(1..6);
            let cols = rng.gen_range(1..6);
            let m = Matrix::from_fn(rows, cols, |_, _| Fp::new(5, rng.gen_range(0..5)));
            let k = m.kernel();
            assert_eq!(m.rank() + k.cols, cols);
            if k.cols > 0 {
                assert!(m.matmul(&k).is_zero_matrix());
            }
        }
    }

    #[test]
    fn span_ops() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        // complementary coordinate spans in F2^4
        let e01 = Matrix::from_cols(vec![
            vec![Fp::new(2, 1), Fp::new(2, 0), Fp::new(2, 0), Fp::new(2, 0)],
            vec![Fp::new(2, 0), Fp::new(2, 1), Fp::new(2, 0), Fp::new(2, 0)],
        ]);
        let e23 = Matrix::from_cols(vec![
            vec![Fp::new(2, 0), Fp::new(2, 0), Fp::new(2, 1), Fp::new(2, 0)],
            vec![Fp::new(2, 0), Fp::new(2, 0), Fp::new(2, 0), Fp::new(2, 1)],
        ]);
        assert_eq!(span_intersection(&e01, &e23).unwrap().cols, 0);
        assert_eq!(span_sum(&e01, &e23).cols, 4);
        assert_eq!(span_intersection(&e01, &e01).unwrap(), e01.column_echelon());

        // dim(sum) + dim(cap) = dims on random 2-dim subspaces of F3^4
        for _ in 0..50 {
            let a = Matrix::from_fn(4, 2, |_, _| f3(rng.gen_range(0..3)));
            let b = Matrix::from_fn(4, 2, |_, _| f3(rng.gen_range(0..3)));
            let (da, db) = (a.rank(), b.rank());
            let s = span_sum(&a, &b).cols;
            let i = span_intersection(&a, &b).unwrap().cols;
            assert_eq!(s + i, da + db);
        }
    }

    #[test]
    fn rational_field_axioms() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let rnd = |rng: &mut ChaCha8Rng| {
            BigRational::new(BigInt::from(rng.gen_range(-50i64..50)), BigInt::from(rng.gen_range(1i64..30)))
        };
        for _ in 0..500 {
            let (a, b, c) = (rnd(&mut rng), rnd(&mut rng), rnd(&mut rng));
            assert_eq!((&a + &b) * &c, &a * &c + &b * &c);
            assert_eq!((&a * &b) * &c, &a * (&b * &c));
            if !Ring::is_zero(&a) {
                let inv = FieldOps::inv(&a).unwrap();
                assert!(num::One::is_one(&(&a * &inv)));
            }
        }
        // normalization: reduced form, positive denominator
        let x = BigRational::new(BigInt::from(-6), BigInt::from(-8));
        assert_eq!(x.numer(), &BigInt::from(3));
        assert_eq!(x.denom(), &BigInt::from(4));
    }

    #[test]
    fn rational_matrix_inverse() {
        let q = |n: i64, d: i64| BigRational::new(BigInt::from(n), BigInt::from(d));
        let m = Matrix::from_rows(vec![vec![q(1, 2), q(1, 3)], vec![q(0, 1), q(2, 1)]]);
        let inv = m.inverse().unwrap();
        assert_eq!(m.matmul(&inv), Matrix::identity(&q(0, 1), 2));
    }

    #[test]
    fn singular_matrices_have_no_inverse() {
        let z = Fp::new(3, 0);
        assert!(Matrix::zero(&z, 2, 2).inverse().is_none());
        let m = Matrix::from_rows(vec![
            vec![Fp::new(3, 1), Fp::new(3, 2)],
            vec![Fp::new(3, 2), Fp::new(3, 1)],
        ]);
        assert!(m.inverse().is_none()); // rows sum to zero mod 3
    }
}
