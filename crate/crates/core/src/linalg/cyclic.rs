use super::{
    pivot_tolerance, BandedLdlt, BandedSymmetricMatrix, DenseLdlt, DenseMatrix, SpdFactor,
    SymmetricStorage,
};
use crate::error::Result;
use crate::scalar::Real;

/// Dimensions up to this size are factorized densely by [`CyclicBandedMatrix::factor`].
pub const DENSE_FALLBACK_MAX_DIM: usize = 256;

/// Symmetric matrix with entries only for cyclic distance `min(|i-j|, n-|i-j|) <= bandwidth`.
///
/// Each unordered pair is stored once, in the row from which the other index is reached by
/// moving forward at most `n/2` steps.
#[derive(Debug, Clone, PartialEq)]
pub struct CyclicBandedMatrix<T = f64> {
    dim: usize,
    bandwidth: usize,
    data: Vec<T>,
}

/// How [`CyclicBandedMatrix::factor_with`] eliminates the wrap-around corners.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CyclicStrategy {
    /// Choose by dimension.
    Auto,
    Dense,
    /// Banded elimination of the leading block, dense Schur complement for the last
    /// `bandwidth` unknowns.
    Bordered,
}

impl<T: Real> CyclicBandedMatrix<T> {
    pub fn zeros(dim: usize, bandwidth: usize) -> Self {
        let bandwidth = bandwidth.min(dim / 2);
        Self {
            dim,
            bandwidth,
            data: vec![T::zero(); dim * (bandwidth + 1)],
        }
    }

    pub fn bandwidth(&self) -> usize {
        self.bandwidth
    }

    #[inline]
    fn slot(&self, i: usize, j: usize) -> Option<usize> {
        let n = self.dim;
        let fwd = (j + n - i) % n;
        let back = n - fwd;
        let (row, d) = if fwd == 0 {
            (i, 0)
        } else if fwd < back {
            (i, fwd)
        } else if fwd > back {
            (j, back)
        } else {
            (i.min(j), fwd)
        };
        (d <= self.bandwidth).then(|| row * (self.bandwidth + 1) + d)
    }

    pub fn set(&mut self, i: usize, j: usize, v: T) {
        let s = self.slot(i, j).expect("entry outside the cyclic band");
        self.data[s] = v;
    }

    /// Largest deviation from the circulant built on row 0.
    pub fn circulant_defect(&self) -> T {
        let n = self.dim;
        let mut worst = T::zero();
        for i in 0..n {
            for j in 0..n {
                let diff = self.get(i, j) - self.get(0, (j + n - i) % n);
                worst = worst.max(diff.abs());
            }
        }
        worst
    }

    pub fn factor_with(&self, strategy: CyclicStrategy) -> Result<CyclicFactor<T>> {
        let tol = pivot_tolerance(self.max_diagonal());
        let n = self.dim;
        let b = self.bandwidth;
        let dense = match strategy {
            CyclicStrategy::Dense => true,
            CyclicStrategy::Bordered => n <= 2 * b + 1,
            CyclicStrategy::Auto => n <= DENSE_FALLBACK_MAX_DIM || n <= 2 * b + 1,
        };
        if dense {
            return Ok(CyclicFactor::Dense(DenseLdlt::with_tolerance(
                &self.to_dense(),
                tol,
            )?));
        }
        let m = n - b;
        let mut inner = BandedSymmetricMatrix::zeros(m, b);
        for i in 0..m {
            for j in i.saturating_sub(b)..=i {
                inner.set(i, j, self.get(i, j));
            }
        }
        let inner = BandedLdlt::new(&inner, tol)?;
        // coupling columns C = M[0..m, m..n] and W = A^{-1} C
        let coupling: Vec<Vec<T>> = (0..b)
            .map(|c| (0..m).map(|i| self.get(i, m + c)).collect())
            .collect();
        let mut weights = coupling.clone();
        for w in &mut weights {
            inner.solve_in_place(w);
        }
        let mut schur = DenseMatrix::zeros(b, b);
        for r in 0..b {
            for c in 0..b {
                let cw: T = coupling[r]
                    .iter()
                    .zip(&weights[c])
                    .map(|(&x, &y)| x * y)
                    .sum();
                schur.set(r, c, self.get(m + r, m + c) - cw);
            }
        }
        let schur = DenseLdlt::with_tolerance(&schur, tol)?;
        Ok(CyclicFactor::Bordered(BorderedFactor {
            n,
            inner,
            coupling,
            weights,
            schur,
        }))
    }
}

impl<T: Real> SymmetricStorage<T> for CyclicBandedMatrix<T> {
    type Factor = CyclicFactor<T>;

    fn dim(&self) -> usize {
        self.dim
    }

    fn get(&self, i: usize, j: usize) -> T {
        self.slot(i, j).map_or(T::zero(), |s| self.data[s])
    }

    fn add(&mut self, i: usize, j: usize, v: T) {
        let s = self.slot(i, j).expect("entry outside the cyclic band");
        self.data[s] = self.data[s] + v;
    }

    fn factor(&self) -> Result<CyclicFactor<T>> {
        self.factor_with(CyclicStrategy::Auto)
    }

    fn matvec(&self, x: &[T]) -> Vec<T> {
        let n = self.dim;
        assert_eq!(x.len(), n);
        let b = self.bandwidth as isize;
        (0..n)
            .map(|i| {
                let mut cols: Vec<usize> = (-b..=b)
                    .map(|d| (i as isize + d).rem_euclid(n as isize) as usize)
                    .collect();
                cols.sort_unstable();
                cols.dedup();
                cols.into_iter().map(|j| self.get(i, j) * x[j]).sum()
            })
            .collect()
    }
}

/// Factorization of a [`CyclicBandedMatrix`].
#[derive(Debug, Clone)]
pub enum CyclicFactor<T = f64> {
    Dense(DenseLdlt<T>),
    Bordered(BorderedFactor<T>),
}

#[derive(Debug, Clone)]
pub struct BorderedFactor<T = f64> {
    n: usize,
    inner: BandedLdlt<T>,
    coupling: Vec<Vec<T>>,
    weights: Vec<Vec<T>>,
    schur: DenseLdlt<T>,
}

impl<T: Real> SpdFactor<T> for CyclicFactor<T> {
    fn dim(&self) -> usize {
        match self {
            CyclicFactor::Dense(f) => f.dim(),
            CyclicFactor::Bordered(f) => f.n,
        }
    }

    fn solve_in_place(&self, x: &mut [T]) {
        match self {
            CyclicFactor::Dense(f) => f.solve_in_place(x),
            CyclicFactor::Bordered(f) => {
                let m = f.inner.dim();
                let (head, tail) = x.split_at_mut(m);
                f.inner.solve_in_place(head);
                for (r, t) in tail.iter_mut().enumerate() {
                    let cy: T = f.coupling[r].iter().zip(head.iter()).map(|(&a, &b)| a * b).sum();
                    *t = *t - cy;
                }
                f.schur.solve_in_place(tail);
                for (c, &tc) in tail.iter().enumerate() {
                    for (h, &w) in head.iter_mut().zip(&f.weights[c]) {
                        *h = *h - w * tc;
                    }
                }
            }
        }
    }
}
