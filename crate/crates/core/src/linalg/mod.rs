//! Symmetric banded and cyclic-banded storage with root-free Cholesky (`L D L^T`) solvers.
//!
//! Factorizations fail with [`Error::NotPositiveDefinite`] when a pivot drops below
//! [`PIVOT_RELATIVE_TOLERANCE`] times the largest diagonal entry.

mod banded;
mod cyclic;
mod dense;

pub use banded::{BandedLdlt, BandedSymmetricMatrix};
pub use cyclic::{CyclicBandedMatrix, CyclicFactor, CyclicStrategy, DENSE_FALLBACK_MAX_DIM};
pub use dense::{DenseLdlt, DenseMatrix};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Pivot threshold relative to the largest diagonal entry.
pub const PIVOT_RELATIVE_TOLERANCE: f64 = 1e-13;

/// Largest dimension for which a dense inverse is formed.
pub const MAX_INVERSE_DIM: usize = 4096;

/// A symmetric matrix format that can be assembled entry by entry and factorized.
pub trait SymmetricStorage<T: Real>: Clone + Send + Sync {
    type Factor: SpdFactor<T>;

    fn dim(&self) -> usize;

    /// Entry `(i, j)`; zero outside the stored pattern.
    fn get(&self, i: usize, j: usize) -> T;

    /// Adds `v` to the symmetric pair `(i, j)`, `(j, i)`.
    ///
    /// # Panics
    /// If `(i, j)` is outside the stored pattern.
    fn add(&mut self, i: usize, j: usize, v: T);

    fn factor(&self) -> Result<Self::Factor>;

    fn matvec(&self, x: &[T]) -> Vec<T>;

    fn to_dense(&self) -> DenseMatrix<T> {
        let n = self.dim();
        let mut d = DenseMatrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                d.set(i, j, self.get(i, j));
            }
        }
        d
    }

    fn max_diagonal(&self) -> T {
        (0..self.dim())
            .map(|i| self.get(i, i))
            .fold(T::zero(), T::max)
    }
}

/// Factorization of a symmetric positive definite matrix.
pub trait SpdFactor<T: Real>: Send + Sync {
    fn dim(&self) -> usize;

    fn solve_in_place(&self, rhs: &mut [T]);

    fn solve(&self, rhs: &[T]) -> Result<Vec<T>> {
        if rhs.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: rhs.len(),
            });
        }
        let mut x = rhs.to_vec();
        self.solve_in_place(&mut x);
        Ok(x)
    }

    /// Dense inverse, one column solve per unit vector.
    fn inverse(&self) -> Result<DenseMatrix<T>> {
        let n = self.dim();
        if n > MAX_INVERSE_DIM {
            return Err(Error::DimensionTooLarge {
                dim: n,
                limit: MAX_INVERSE_DIM,
            });
        }
        let mut inv = DenseMatrix::zeros(n, n);
        let mut col = vec![T::zero(); n];
        for j in 0..n {
            col.iter_mut().for_each(|c| *c = T::zero());
            col[j] = T::one();
            self.solve_in_place(&mut col);
            for (i, &v) in col.iter().enumerate() {
                inv.set(i, j, v);
            }
        }
        Ok(inv)
    }
}

/// Solves `M x = rhs` for symmetric positive definite `M`.
pub fn cholesky_solve<T: Real, M: SymmetricStorage<T>>(m: &M, rhs: &[T]) -> Result<Vec<T>> {
    m.factor()?.solve(rhs)
}

/// Dense inverse of a symmetric positive definite `M`.
pub fn full_inverse<T: Real, M: SymmetricStorage<T>>(m: &M) -> Result<DenseMatrix<T>> {
    if m.dim() > MAX_INVERSE_DIM {
        return Err(Error::DimensionTooLarge {
            dim: m.dim(),
            limit: MAX_INVERSE_DIM,
        });
    }
    m.factor()?.inverse()
}

pub(crate) fn pivot_tolerance<T: Real>(max_diag: T) -> T {
    T::lit(PIVOT_RELATIVE_TOLERANCE) * max_diag
}

pub(crate) fn not_pd<T: Real>(row: usize, pivot: T, tol: T) -> Error {
    Error::NotPositiveDefinite {
        row,
        pivot: pivot.as_f64(),
        tol: tol.as_f64(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Gaussian elimination with partial pivoting, as an independent reference.
    fn reference_solve(a: &DenseMatrix<f64>, b: &[f64]) -> Vec<f64> {
        let n = b.len();
        let mut m: Vec<Vec<f64>> = (0..n)
            .map(|i| {
                let mut r = a.row(i).to_vec();
                r.push(b[i]);
                r
            })
            .collect();
        for c in 0..n {
            let p = (c..n).max_by(|&i, &j| m[i][c].abs().total_cmp(&m[j][c].abs())).unwrap();
            m.swap(c, p);
            for r in c + 1..n {
                let f = m[r][c] / m[c][c];
                for q in c..=n {
                    m[r][q] -= f * m[c][q];
                }
            }
        }
        let mut x = vec![0.0; n];
        for i in (0..n).rev() {
            let s: f64 = (i + 1..n).map(|j| m[i][j] * x[j]).sum();
            x[i] = (m[i][n] - s) / m[i][i];
        }
        x
    }

    fn max_diff(a: &[f64], b: &[f64]) -> f64 {
        a.iter().zip(b).fold(0.0, |m, (x, y)| m.max((x - y).abs()))
    }

    fn random_banded(rng: &mut ChaCha8Rng, n: usize, b: usize) -> BandedSymmetricMatrix<f64> {
        let mut m = BandedSymmetricMatrix::zeros(n, b);
        for i in 0..n {
            for j in i.saturating_sub(b)..i {
                m.set(i, j, rng.random_range(-1.0..1.0));
            }
        }
        for i in 0..n {
            let row: f64 = (0..n).filter(|&j| j != i).map(|j| SymmetricStorage::<f64>::get(&m, i, j).abs()).sum();
            m.set(i, i, row + rng.random_range(0.1..1.0));
        }
        m
    }

    fn random_cyclic(rng: &mut ChaCha8Rng, n: usize, b: usize) -> CyclicBandedMatrix<f64> {
        let mut m = CyclicBandedMatrix::zeros(n, b);
        let b = m.bandwidth();
        for i in 0..n {
            for d in 1..=b {
                m.set(i, (i + d) % n, rng.random_range(-1.0..1.0));
            }
        }
        for i in 0..n {
            let row: f64 = (0..n).filter(|&j| j != i).map(|j| SymmetricStorage::<f64>::get(&m, i, j).abs()).sum();
            m.set(i, i, row + rng.random_range(0.1..1.0));
        }
        m
    }

    #[test]
    fn identity_and_diagonal() {
        let mut m = BandedSymmetricMatrix::<f64>::zeros(5, 2);
        for i in 0..5 {
            m.set(i, i, 1.0);
        }
        assert_eq!(m.factor().unwrap().inverse().unwrap(), DenseMatrix::identity(5));
        for i in 0..5 {
            m.set(i, i, (i + 1) as f64);
        }
        let x = cholesky_solve(&m, &[1.0, 2.0, 3.0, 4.0, 5.0]).unwrap();
        assert!(max_diff(&x, &[1.0; 5]) < 1e-15);
    }

    #[test]
    fn two_by_two_closed_form() {
        let (a, b, c) = (4.0f64, 1.5, 3.0);
        let mut m = BandedSymmetricMatrix::zeros(2, 1);
        m.set(0, 0, a);
        m.set(1, 0, b);
        m.set(1, 1, c);
        let inv: DenseMatrix<f64> = full_inverse(&m).unwrap();
        let det = a * c - b * b;
        assert!((inv.get(0, 0) - c / det).abs() < 1e-15);
        assert!((inv.get(0, 1) + b / det).abs() < 1e-15);
        assert!((inv.get(1, 1) - a / det).abs() < 1e-15);
    }

    #[test]
    fn banded_matches_reference() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for (n, b) in [(1, 0), (7, 1), (30, 3), (64, 4), (10, 9)] {
            let m = random_banded(&mut rng, n, b);
            let rhs: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
            let x = cholesky_solve(&m, &rhs).unwrap();
            let r = reference_solve(&m.to_dense(), &rhs);
            assert!(max_diff(&x, &r) < 1e-12, "n={n} b={b}");
        }
    }

    #[test]
    fn cyclic_strategies_agree_with_reference() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for (n, b) in [(3, 1), (8, 2), (40, 3), (300, 4), (9, 4)] {
            let m = random_cyclic(&mut rng, n, b);
            let rhs: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
            let r = reference_solve(&m.to_dense(), &rhs);
            for s in [CyclicStrategy::Dense, CyclicStrategy::Bordered, CyclicStrategy::Auto] {
                let x = m.factor_with(s).unwrap().solve(&rhs).unwrap();
                assert!(max_diff(&x, &r) < 1e-12, "n={n} b={b} {s:?}");
            }
        }
    }

    #[test]
    fn circulant_inverse_is_circulant() {
        let n = 50;
        let mut m = CyclicBandedMatrix::<f64>::zeros(n, 2);
        for i in 0..n {
            m.set(i, i, 4.0);
            m.set(i, (i + 1) % n, 1.0);
            m.set(i, (i + 2) % n, 0.5);
        }
        assert_eq!(m.circulant_defect(), 0.0);
        let inv = m.factor_with(CyclicStrategy::Bordered).unwrap().inverse().unwrap();
        for i in 0..n {
            for j in 0..n {
                assert!((inv.get(i, j) - inv.get((i + 1) % n, (j + 1) % n)).abs() < 1e-15);
            }
        }
        assert!(inv.asymmetry() < 1e-15);
    }

    #[test]
    fn indefinite_is_rejected() {
        let mut m = BandedSymmetricMatrix::zeros(2, 1);
        m.set(0, 0, 1.0);
        m.set(1, 0, 2.0);
        m.set(1, 1, 1.0);
        assert!(matches!(m.factor(), Err(Error::NotPositiveDefinite { .. })));
        let mut c = CyclicBandedMatrix::zeros(6, 1);
        for i in 0..6 {
            c.set(i, i, 1.0);
            c.set(i, (i + 1) % 6, -0.6);
        }
        assert!(matches!(
            c.factor_with(CyclicStrategy::Bordered),
            Err(Error::NotPositiveDefinite { .. })
        ));
        assert!(matches!(
            c.factor_with(CyclicStrategy::Dense),
            Err(Error::NotPositiveDefinite { .. })
        ));
    }

    #[test]
    fn dimension_mismatch() {
        let mut m = BandedSymmetricMatrix::<f64>::zeros(3, 1);
        for i in 0..3 {
            m.set(i, i, 1.0);
        }
        assert!(matches!(
            m.factor().unwrap().solve(&[1.0]),
            Err(Error::DimensionMismatch { .. })
        ));
    }
}
