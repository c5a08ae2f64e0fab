use super::{not_pd, pivot_tolerance, SpdFactor};
use crate::error::Result;
use crate::scalar::Real;

/// Row-major dense matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix<T = f64> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: Real> DenseMatrix<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![T::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, T::one());
        }
        m
    }

    pub fn from_rows(rows: &[Vec<T>]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        let mut m = Self::zeros(r, c);
        for (i, row) in rows.iter().enumerate() {
            assert_eq!(row.len(), c, "ragged rows");
            m.row_mut(i).copy_from_slice(row);
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> T {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: T) {
        self.data[i * self.cols + j] = v;
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    #[inline]
    pub fn row_mut(&mut self, i: usize) -> &mut [T] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn matvec(&self, x: &[T]) -> Vec<T> {
        assert_eq!(x.len(), self.cols);
        (0..self.rows)
            .map(|i| self.row(i).iter().zip(x).map(|(&a, &b)| a * b).sum())
            .collect()
    }

    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows);
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for p in 0..self.cols {
                let a = self.get(i, p);
                if a == T::zero() {
                    continue;
                }
                let orow = other.row(p);
                for (o, &b) in out.row_mut(i).iter_mut().zip(orow) {
                    *o = *o + a * b;
                }
            }
        }
        out
    }

    pub fn max_abs(&self) -> T {
        self.data.iter().fold(T::zero(), |m, v| m.max(v.abs()))
    }

    /// `max_i sum_j |a_ij|`.
    pub fn norm_inf(&self) -> T {
        (0..self.rows)
            .map(|i| self.row(i).iter().map(|v| v.abs()).sum())
            .fold(T::zero(), T::max)
    }

    /// Largest `|a_ij - a_ji|`.
    pub fn asymmetry(&self) -> T {
        let mut worst = T::zero();
        for i in 0..self.rows {
            for j in 0..i {
                worst = worst.max((self.get(i, j) - self.get(j, i)).abs());
            }
        }
        worst
    }

    pub fn ldlt(&self) -> Result<DenseLdlt<T>> {
        DenseLdlt::new(self)
    }
}

/// Dense `L D L^T` of a symmetric positive definite matrix.
#[derive(Debug, Clone)]
pub struct DenseLdlt<T = f64> {
    n: usize,
    l: Vec<T>,
    d: Vec<T>,
}

impl<T: Real> DenseLdlt<T> {
    pub fn new(a: &DenseMatrix<T>) -> Result<Self> {
        assert_eq!(a.rows(), a.cols());
        let n = a.rows();
        let max_diag = (0..n).map(|i| a.get(i, i)).fold(T::zero(), T::max);
        Self::with_tolerance(a, pivot_tolerance(max_diag))
    }

    pub(crate) fn with_tolerance(a: &DenseMatrix<T>, tol: T) -> Result<Self> {
        let n = a.rows();
        let mut l = vec![T::zero(); n * n];
        let mut d = vec![T::zero(); n];
        for i in 0..n {
            for j in 0..i {
                let mut s = a.get(i, j);
                for p in 0..j {
                    s = s - l[i * n + p] * l[j * n + p] * d[p];
                }
                l[i * n + j] = s / d[j];
            }
            let mut s = a.get(i, i);
            for p in 0..i {
                s = s - l[i * n + p] * l[i * n + p] * d[p];
            }
            if !(s > tol) {
                return Err(not_pd(i, s, tol));
            }
            d[i] = s;
            l[i * n + i] = T::one();
        }
        Ok(Self { n, l, d })
    }
}

impl<T: Real> SpdFactor<T> for DenseLdlt<T> {
    fn dim(&self) -> usize {
        self.n
    }

    fn solve_in_place(&self, x: &mut [T]) {
        let n = self.n;
        for i in 0..n {
            let mut s = x[i];
            for j in 0..i {
                s = s - self.l[i * n + j] * x[j];
            }
            x[i] = s;
        }
        for i in 0..n {
            x[i] = x[i] / self.d[i];
        }
        for i in (0..n).rev() {
            let mut s = x[i];
            for j in i + 1..n {
                s = s - self.l[j * n + i] * x[j];
            }
            x[i] = s;
        }
    }
}
