//! Exact linear algebra over the integers and rationals: determinants,
//! inverses, Hermite and Smith normal forms with transformation matrices.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};

/// Dense matrix of exact rationals, row major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RationalMatrix {
    pub rows: usize,
    pub cols: usize,
    data: Vec<BigRational>,
}

/// Dense matrix of big integers, row major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IntMatrix {
    pub rows: usize,
    pub cols: usize,
    data: Vec<BigInt>,
}

pub static SNF_NS: std::sync::atomic::AtomicU64 = std::sync::atomic::AtomicU64::new(0);
pub static HNF_NS: std::sync::atomic::AtomicU64 = std::sync::atomic::AtomicU64::new(0);
pub static INV_NS: std::sync::atomic::AtomicU64 = std::sync::atomic::AtomicU64::new(0);

/// Smith normal form U * A * V = diag(d) with U, V unimodular and
/// d_1 | d_2 | ... | d_n >= 0.
#[derive(Debug, Clone)]
pub struct SnfResult {
    pub u: IntMatrix,
    pub v: IntMatrix,
    pub d: Vec<BigInt>,
}

impl RationalMatrix {
    pub fn zero(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![BigRational::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zero(n, n);
        for i in 0..n {
            m[(i, i)] = BigRational::one();
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> BigRational) -> Self {
        let mut m = Self::zero(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                m[(i, j)] = f(i, j);
            }
        }
        m
    }

    pub fn from_int_entries(rows: usize, cols: usize, entries: &[i64]) -> Self {
        assert_eq!(entries.len(), rows * cols);
        Self::from_fn(rows, cols, |i, j| BigRational::from(BigInt::from(entries[i * cols + j])))
    }

    pub fn diagonal(entries: &[BigRational]) -> Self {
        let n = entries.len();
        let mut m = Self::zero(n, n);
        for i in 0..n {
            m[(i, i)] = entries[i].clone();
        }
        m
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn is_symmetric(&self) -> bool {
        if !self.is_square() {
            return false;
        }
        for i in 0..self.rows {
            for j in 0..i {
                if self[(i, j)] != self[(j, i)] {
                    return false;
                }
            }
        }
        true
    }

    pub fn is_integral(&self) -> bool {
        self.data.iter().all(|x| x.is_integer())
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].clone())
    }

    pub fn mul(&self, rhs: &Self) -> Self {
        assert_eq!(self.cols, rhs.rows, "matrix product shape");
        let mut out = Self::zero(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = &self[(i, k)];
                if a.is_zero() {
                    continue;
                }
                for j in 0..rhs.cols {
                    let t = a * &rhs[(k, j)];
                    out[(i, j)] += t;
                }
            }
        }
        out
    }

    pub fn add(&self, rhs: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        Self::from_fn(self.rows, self.cols, |i, j| &self[(i, j)] + &rhs[(i, j)])
    }

    pub fn sub(&self, rhs: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        Self::from_fn(self.rows, self.cols, |i, j| &self[(i, j)] - &rhs[(i, j)])
    }

    pub fn scale(&self, c: &BigRational) -> Self {
        Self::from_fn(self.rows, self.cols, |i, j| &self[(i, j)] * c)
    }

    pub fn row(&self, i: usize) -> Vec<BigRational> {
        (0..self.cols).map(|j| self[(i, j)].clone()).collect()
    }

    pub fn stack_rows(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.cols);
        let mut m = Self::zero(self.rows + other.rows, self.cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                m[(i, j)] = self[(i, j)].clone();
            }
        }
        for i in 0..other.rows {
            for j in 0..self.cols {
                m[(self.rows + i, j)] = other[(i, j)].clone();
            }
        }
        m
    }

    /// Least common multiple of all entry denominators.
    pub fn denominator_lcm(&self) -> BigInt {
        let mut l = BigInt::one();
        for x in &self.data {
            l = num_integer::lcm(l, x.denom().clone());
        }
        l
    }

    /// Convert to an integer matrix; fails if any entry is non-integral.
    pub fn to_int(&self) -> Result<IntMatrix> {
        if !self.is_integral() {
            return Err(Error::Shape("matrix has non-integer entries".into()));
        }
        Ok(IntMatrix::from_fn(self.rows, self.cols, |i, j| self[(i, j)].to_integer()))
    }

    pub fn from_int_matrix(m: &IntMatrix) -> Self {
        Self::from_fn(m.rows, m.cols, |i, j| BigRational::from(m[(i, j)].clone()))
    }

    /// Exact determinant by fraction-free-ish Gaussian elimination.
    pub fn det(&self) -> Result<BigRational> {
        if !self.is_square() {
            return Err(Error::Shape("det of non-square matrix".into()));
        }
        let n = self.rows;
        let mut a = self.clone();
        let mut det = BigRational::one();
        for col in 0..n {
            let pivot = (col..n).find(|&r| !a[(r, col)].is_zero());
            let Some(p) = pivot else {
                return Ok(BigRational::zero());
            };
            if p != col {
                a.swap_rows(p, col);
                det = -det;
            }
            let pv = a[(col, col)].clone();
            det *= &pv;
            for r in (col + 1)..n {
                if a[(r, col)].is_zero() {
                    continue;
                }
                let f = &a[(r, col)] / &pv;
                for c in col..n {
                    let t = &f * &a[(col, c)];
                    a[(r, c)] -= t;
                }
            }
        }
        Ok(det)
    }

    /// Exact inverse by Gauss–Jordan elimination.
    pub fn inverse(&self) -> Result<RationalMatrix> {
        let t0 = std::time::Instant::now();
        let r = self.inverse_inner();
        INV_NS.fetch_add(t0.elapsed().as_nanos() as u64, std::sync::atomic::Ordering::Relaxed);
        r
    }

    fn inverse_inner(&self) -> Result<RationalMatrix> {
        if !self.is_square() {
            return Err(Error::Shape("inverse of non-square matrix".into()));
        }
        let n = self.rows;
        // fraction-free route for small matrices: scale rows to integers and
        // invert through the adjugate, avoiding per-step gcd normalization
        if n <= 6 {
            let mut scales = Vec::with_capacity(n);
            let mut b = IntMatrix::zero(n, n);
            for i in 0..n {
                let mut l = BigInt::one();
                for j in 0..n {
                    l = num_integer::lcm(l, self[(i, j)].denom().clone());
                }
                for j in 0..n {
                    b[(i, j)] = (self[(i, j)].numer() * &l) / self[(i, j)].denom();
                }
                scales.push(l);
            }
            let det = b.det_bareiss();
            if det.is_zero() {
                return Err(Error::Singular);
            }
            // inverse = adj(B) / det(B), then undo the row scalings
            let mut out = RationalMatrix::zero(n, n);
            for i in 0..n {
                for j in 0..n {
                    // adj(B)[i][j] = (-1)^{i+j} * minor_{j,i}
                    let minor = b.minor_det(j, i);
                    let signed = if (i + j) % 2 == 0 { minor } else { -minor };
                    out[(i, j)] = BigRational::new(signed * &scales[j], det.clone());
                }
            }
            return Ok(out);
        }
        let mut a = self.clone();
        let mut inv = Self::identity(n);
        for col in 0..n {
            let pivot = (col..n).find(|&r| !a[(r, col)].is_zero());
            let Some(p) = pivot else {
                return Err(Error::Singular);
            };
            if p != col {
                a.swap_rows(p, col);
                inv.swap_rows(p, col);
            }
            let pv = a[(col, col)].clone();
            for c in 0..n {
                a[(col, c)] /= &pv;
                inv[(col, c)] /= &pv;
            }
            for r in 0..n {
                if r == col || a[(r, col)].is_zero() {
                    continue;
                }
                let f = a[(r, col)].clone();
                for c in 0..n {
                    let t = &f * &a[(col, c)];
                    a[(r, c)] -= t;
                    let t = &f * &inv[(col, c)];
                    inv[(r, c)] -= t;
                }
            }
        }
        Ok(inv)
    }

    pub fn swap_rows(&mut self, i: usize, j: usize) {
        if i == j {
            return;
        }
        for c in 0..self.cols {
            let a = i * self.cols + c;
            let b = j * self.cols + c;
            self.data.swap(a, b);
        }
    }

    pub fn swap_cols(&mut self, i: usize, j: usize) {
        if i == j {
            return;
        }
        for r in 0..self.rows {
            let a = r * self.cols + i;
            let b = r * self.cols + j;
            self.data.swap(a, b);
        }
    }
}

impl std::ops::Index<(usize, usize)> for RationalMatrix {
    type Output = BigRational;
    fn index(&self, (i, j): (usize, usize)) -> &BigRational {
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for RationalMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut BigRational {
        &mut self.data[i * self.cols + j]
    }
}

impl std::fmt::Display for RationalMatrix {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        for i in 0..self.rows {
            write!(f, "[")?;
            for j in 0..self.cols {
                if j > 0 {
                    write!(f, ", ")?;
                }
                write!(f, "{}", self[(i, j)])?;
            }
            writeln!(f, "]")?;
        }
        Ok(())
    }
}

impl IntMatrix {
    pub fn zero(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![BigInt::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zero(n, n);
        for i in 0..n {
            m[(i, i)] = BigInt::one();
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> BigInt) -> Self {
        let mut m = Self::zero(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                m[(i, j)] = f(i, j);
            }
        }
        m
    }

    pub fn from_i64(rows: usize, cols: usize, entries: &[i64]) -> Self {
        assert_eq!(entries.len(), rows * cols);
        Self::from_fn(rows, cols, |i, j| BigInt::from(entries[i * cols + j]))
    }

    pub fn diagonal(entries: &[BigInt]) -> Self {
        let n = entries.len();
        let mut m = Self::zero(n, n);
        for i in 0..n {
            m[(i, i)] = entries[i].clone();
        }
        m
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].clone())
    }

    pub fn mul(&self, rhs: &Self) -> Self {
        assert_eq!(self.cols, rhs.rows);
        let mut out = Self::zero(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                if self[(i, k)].is_zero() {
                    continue;
                }
                for j in 0..rhs.cols {
                    let t = &self[(i, k)] * &rhs[(k, j)];
                    out[(i, j)] += t;
                }
            }
        }
        out
    }

    pub fn is_symmetric(&self) -> bool {
        if self.rows != self.cols {
            return false;
        }
        for i in 0..self.rows {
            for j in 0..i {
                if self[(i, j)] != self[(j, i)] {
                    return false;
                }
            }
        }
        true
    }

    pub fn det(&self) -> Result<BigInt> {
        Ok(self.det_bareiss())
    }

    /// Fraction-free determinant (Bareiss elimination).
    pub fn det_bareiss(&self) -> BigInt {
        assert_eq!(self.rows, self.cols, "determinant of non-square matrix");
        let n = self.rows;
        if n == 0 {
            return BigInt::one();
        }
        let mut a: Vec<Vec<BigInt>> = (0..n)
            .map(|i| (0..n).map(|j| self[(i, j)].clone()).collect())
            .collect();
        let mut sign = 1i32;
        let mut prev = BigInt::one();
        for k in 0..n - 1 {
            if a[k][k].is_zero() {
                let Some(swap) = (k + 1..n).find(|&r| !a[r][k].is_zero()) else {
                    return BigInt::zero();
                };
                a.swap(k, swap);
                sign = -sign;
            }
            for i in k + 1..n {
                for j in k + 1..n {
                    let num = &a[i][j] * &a[k][k] - &a[i][k] * &a[k][j];
                    a[i][j] = num / &prev;
                }
            }
            prev = a[k][k].clone();
        }
        let d = a[n - 1][n - 1].clone();
        if sign < 0 {
            -d
        } else {
            d
        }
    }

    /// Determinant of the minor with row `r` and column `c` removed.
    pub fn minor_det(&self, r: usize, c: usize) -> BigInt {
        let n = self.rows;
        let m = IntMatrix::from_fn(n - 1, n - 1, |i, j| {
            let ii = if i < r { i } else { i + 1 };
            let jj = if j < c { j } else { j + 1 };
            self[(ii, jj)].clone()
        });
        m.det_bareiss()
    }

    fn swap_rows(&mut self, i: usize, j: usize) {
        if i == j {
            return;
        }
        for c in 0..self.cols {
            self.data.swap(i * self.cols + c, j * self.cols + c);
        }
    }

    fn swap_cols(&mut self, i: usize, j: usize) {
        if i == j {
            return;
        }
        for r in 0..self.rows {
            self.data.swap(r * self.cols + i, r * self.cols + j);
        }
    }

    /// Row-style Hermite normal form. Returns (H, U) with U unimodular,
    /// U * A = H, H in upper echelon form with positive pivots and entries
    /// above each pivot reduced to [0, pivot).
    pub fn hnf(&self) -> (IntMatrix, IntMatrix) {
        let t0 = std::time::Instant::now();
        let r = self.hnf_inner();
        HNF_NS.fetch_add(t0.elapsed().as_nanos() as u64, std::sync::atomic::Ordering::Relaxed);
        r
    }

    fn hnf_inner(&self) -> (IntMatrix, IntMatrix) {
        let mut h = self.clone();
        let mut u = IntMatrix::identity(self.rows);
        let (rows, cols) = (self.rows, self.cols);
        let mut pivot_row = 0usize;
        for col in 0..cols {
            if pivot_row == rows {
                break;
            }
            // gcd-reduce the column below pivot_row
            loop {
                let mut best: Option<usize> = None;
                for r in pivot_row..rows {
                    if !h[(r, col)].is_zero() {
                        best = match best {
                            None => Some(r),
                            Some(b) => {
                                if h[(r, col)].abs() < h[(b, col)].abs() {
                                    Some(r)
                                } else {
                                    Some(b)
                                }
                            }
                        };
                    }
                }
                let Some(b) = best else {
                    break;
                };
                h.swap_rows(pivot_row, b);
                u.swap_rows(pivot_row, b);
                let p = h[(pivot_row, col)].clone();
                let mut done = true;
                for r in (pivot_row + 1)..rows {
                    if h[(r, col)].is_zero() {
                        continue;
                    }
                    let q = num_integer::Integer::div_floor(&h[(r, col)], &p);
                    if !q.is_zero() {
                        for c in 0..cols {
                            let t = &q * &h[(pivot_row, c)];
                            h[(r, c)] -= t;
                        }
                        for c in 0..u.cols {
                            let t = &q * &u[(pivot_row, c)];
                            u[(r, c)] -= t;
                        }
                    }
                    if !h[(r, col)].is_zero() {
                        done = false;
                    }
                }
                if done {
                    break;
                }
            }
            if h[(pivot_row, col)].is_zero() {
                continue;
            }
            if h[(pivot_row, col)].is_negative() {
                for c in 0..cols {
                    let t = -h[(pivot_row, c)].clone();
                    h[(pivot_row, c)] = t;
                }
                for c in 0..u.cols {
                    let t = -u[(pivot_row, c)].clone();
                    u[(pivot_row, c)] = t;
                }
            }
            // reduce entries above the pivot
            let p = h[(pivot_row, col)].clone();
            for r in 0..pivot_row {
                let q = num_integer::Integer::div_floor(&h[(r, col)], &p);
                if !q.is_zero() {
                    for c in 0..cols {
                        let t = &q * &h[(pivot_row, c)];
                        h[(r, c)] -= t;
                    }
                    for c in 0..u.cols {
                        let t = &q * &u[(pivot_row, c)];
                        u[(r, c)] -= t;
                    }
                }
            }
            pivot_row += 1;
        }
        (h, u)
    }

    /// Smith normal form with transforms. Pivoting picks the entry of
    /// minimal nonzero absolute value to limit coefficient growth.
    pub fn snf(&self) -> SnfResult {
        let t0 = std::time::Instant::now();
        let r = self.snf_inner();
        SNF_NS.fetch_add(t0.elapsed().as_nanos() as u64, std::sync::atomic::Ordering::Relaxed);
        r
    }

    fn snf_inner(&self) -> SnfResult {
        let mut a = self.clone();
        let mut u = IntMatrix::identity(self.rows);
        let mut v = IntMatrix::identity(self.cols);
        let n = self.rows.min(self.cols);
        let (rows, cols) = (self.rows, self.cols);

        for t in 0..n {
            loop {
                // find minimal nonzero |entry| in the trailing block
                let mut best: Option<(usize, usize)> = None;
                for i in t..rows {
                    for j in t..cols {
                        if a[(i, j)].is_zero() {
                            continue;
                        }
                        best = match best {
                            None => Some((i, j)),
                            Some((bi, bj)) => {
                                if a[(i, j)].abs() < a[(bi, bj)].abs() {
                                    Some((i, j))
                                } else {
                                    Some((bi, bj))
                                }
                            }
                        };
                    }
                }
                let Some((bi, bj)) = best else {
                    break;
                };
                a.swap_rows(t, bi);
                u.swap_rows(t, bi);
                a.swap_cols(t, bj);
                v.swap_cols(t, bj);
                let p = a[(t, t)].clone();
                let mut clean = true;
                for i in (t + 1)..rows {
                    if a[(i, t)].is_zero() {
                        continue;
                    }
                    let q = num_integer::Integer::div_floor(&a[(i, t)], &p);
                    for c in 0..cols {
                        let x = &q * &a[(t, c)];
                        a[(i, c)] -= x;
                    }
                    for c in 0..u.cols {
                        let x = &q * &u[(t, c)];
                        u[(i, c)] -= x;
                    }
                    if !a[(i, t)].is_zero() {
                        clean = false;
                    }
                }
                for j in (t + 1)..cols {
                    if a[(t, j)].is_zero() {
                        continue;
                    }
                    let q = num_integer::Integer::div_floor(&a[(t, j)], &p);
                    for r in 0..rows {
                        let x = &q * &a[(r, t)];
                        a[(r, j)] -= x;
                    }
                    for r in 0..v.rows {
                        let x = &q * &v[(r, t)];
                        v[(r, j)] -= x;
                    }
                    if !a[(t, j)].is_zero() {
                        clean = false;
                    }
                }
                if !clean {
                    continue;
                }
                // divisibility: pivot must divide the trailing block
                let mut fixed = false;
                'outer: for i in (t + 1)..rows {
                    for j in (t + 1)..cols {
                        if !(&a[(i, j)] % &p).is_zero() {
                            // add row i to row t to pull the entry forward
                            for c in 0..cols {
                                let x = a[(i, c)].clone();
                                a[(t, c)] += x;
                            }
                            for c in 0..u.cols {
                                let x = u[(i, c)].clone();
                                u[(t, c)] += x;
                            }
                            fixed = true;
                            break 'outer;
                        }
                    }
                }
                if !fixed {
                    break;
                }
            }
        }
        let mut d: Vec<BigInt> = (0..n).map(|i| a[(i, i)].clone()).collect();
        // normalize signs to nonnegative
        for i in 0..n {
            if d[i].is_negative() {
                d[i] = -d[i].clone();
                for c in 0..u.cols {
                    let x = -u[(i, c)].clone();
                    u[(i, c)] = x;
                }
            }
        }
        SnfResult { u, v, d }
    }
}

impl std::ops::Index<(usize, usize)> for IntMatrix {
    type Output = BigInt;
    fn index(&self, (i, j): (usize, usize)) -> &BigInt {
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for IntMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut BigInt {
        &mut self.data[i * self.cols + j]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn rm(rows: usize, cols: usize, e: &[i64]) -> RationalMatrix {
        RationalMatrix::from_int_entries(rows, cols, e)
    }

    #[test]
    fn det_examples() {
        assert_eq!(RationalMatrix::identity(3).det().unwrap(), BigRational::one());
        assert_eq!(rm(2, 2, &[0, 1, 1, 0]).det().unwrap(), BigRational::from(BigInt::from(-1)));
        assert_eq!(rm(2, 2, &[2, 1, 1, 2]).det().unwrap(), BigRational::from(BigInt::from(3)));
        assert!(rm(2, 3, &[1, 2, 3, 4, 5, 6]).det().is_err());
    }

    #[test]
    fn inverse_examples() {
        let id = RationalMatrix::identity(4);
        assert_eq!(id.inverse().unwrap(), id);
        let m = rm(2, 2, &[2, 0, 0, 2]);
        let inv = m.inverse().unwrap();
        assert_eq!(m.mul(&inv), RationalMatrix::identity(2));
        let m = rm(2, 2, &[2, 1, 1, 2]);
        let inv = m.inverse().unwrap();
        assert_eq!(m.mul(&inv), RationalMatrix::identity(2));
        assert!(rm(2, 2, &[1, 2, 2, 4]).inverse().is_err());
    }

    #[test]
    fn hnf_examples() {
        let (h, u) = IntMatrix::identity(3).hnf();
        assert_eq!(h, IntMatrix::identity(3));
        assert_eq!(u, IntMatrix::identity(3));

        let a = IntMatrix::from_i64(2, 2, &[2, 0, 4, 0]);
        let (h, u) = a.hnf();
        assert_eq!(h, IntMatrix::from_i64(2, 2, &[2, 0, 0, 0]));
        assert_eq!(u.mul(&a), h);

        let a = IntMatrix::from_i64(2, 2, &[1, 2, 3, 4]);
        let (h, u) = a.hnf();
        assert_eq!(h, IntMatrix::from_i64(2, 2, &[1, 0, 0, 2]));
        assert_eq!(u.mul(&a), h);
        assert_eq!(u.det().unwrap().abs(), BigInt::one());
    }

    #[test]
    fn snf_examples() {
        let a = IntMatrix::from_i64(2, 2, &[2, 0, 0, 3]);
        let r = a.snf();
        assert_eq!(r.d, vec![BigInt::one(), BigInt::from(6)]);
        let uav = r.u.mul(&a).mul(&r.v);
        assert_eq!(uav, IntMatrix::diagonal(&r.d));

        let r = IntMatrix::identity(3).snf();
        assert_eq!(r.d, vec![BigInt::one(); 3]);

        let r = IntMatrix::zero(2, 2).snf();
        assert_eq!(r.d, vec![BigInt::zero(); 2]);
    }

    fn check_snf(a: &IntMatrix) {
        let r = a.snf();
        let uav = r.u.mul(a).mul(&r.v);
        assert_eq!(uav, IntMatrix::diagonal_rect(a.rows, a.cols, &r.d));
        assert_eq!(r.u.det().unwrap().abs(), BigInt::one());
        assert_eq!(r.v.det().unwrap().abs(), BigInt::one());
        for w in r.d.windows(2) {
            if !w[1].is_zero() || !w[0].is_zero() {
                if w[0].is_zero() {
                    assert!(w[1].is_zero(), "divisibility chain {:?}", r.d);
                } else {
                    assert!((&w[1] % &w[0]).is_zero(), "divisibility chain {:?}", r.d);
                }
            }
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn snf_random(entries in proptest::collection::vec(-50i64..=50, 16)) {
            let a = IntMatrix::from_i64(4, 4, &entries);
            check_snf(&a);
        }

        #[test]
        fn snf_random_rect(entries in proptest::collection::vec(-50i64..=50, 12)) {
            let a = IntMatrix::from_i64(3, 4, &entries);
            check_snf(&a);
            let b = IntMatrix::from_i64(4, 3, &entries);
            check_snf(&b);
        }

        #[test]
        fn hnf_row_space_preserved(entries in proptest::collection::vec(-20i64..=20, 9)) {
            let a = IntMatrix::from_i64(3, 3, &entries);
            let (h, u) = a.hnf();
            prop_assert_eq!(u.mul(&a), h.clone());
            prop_assert_eq!(u.det().unwrap().abs(), BigInt::one());
            // pivots positive, entries above reduced
            let mut pcol = Vec::new();
            for r in 0..h.rows {
                if let Some(c) = (0..h.cols).find(|&c| !h[(r, c)].is_zero()) {
                    prop_assert!(h[(r, c)].is_positive());
                    for rr in 0..r {
                        prop_assert!(!h[(rr, c)].is_negative() && h[(rr, c)] < h[(r, c)]);
                    }
                    pcol.push(c);
                }
            }
            prop_assert!(pcol.windows(2).all(|w| w[0] < w[1]));
        }

        #[test]
        fn inverse_random(entries in proptest::collection::vec(-9i64..=9, 9)) {
            let m = RationalMatrix::from_int_entries(3, 3, &entries);
            if let Ok(inv) = m.inverse() {
                prop_assert_eq!(m.mul(&inv), RationalMatrix::identity(3));
            } else {
                prop_assert!(m.det().unwrap().is_zero());
            }
        }
    }

    impl IntMatrix {
        fn diagonal_rect(rows: usize, cols: usize, d: &[BigInt]) -> IntMatrix {
            let mut m = IntMatrix::zero(rows, cols);
            for (i, x) in d.iter().enumerate() {
                m[(i, i)] = x.clone();
            }
            m
        }
    }
}
