use super::{not_pd, pivot_tolerance, SpdFactor, SymmetricStorage};
use crate::error::Result;
use crate::scalar::Real;

/// Symmetric matrix with entries only for `|i - j| <= bandwidth`, lower band stored by rows.
#[derive(Debug, Clone, PartialEq)]
pub struct BandedSymmetricMatrix<T = f64> {
    dim: usize,
    bandwidth: usize,
    // row i, diagonal offset d = i - j at i * (bandwidth + 1) + d
    band: Vec<T>,
}

impl<T: Real> BandedSymmetricMatrix<T> {
    pub fn zeros(dim: usize, bandwidth: usize) -> Self {
        Self {
            dim,
            bandwidth,
            band: vec![T::zero(); dim * (bandwidth + 1)],
        }
    }

    pub fn bandwidth(&self) -> usize {
        self.bandwidth
    }

    #[inline]
    fn slot(&self, i: usize, j: usize) -> Option<usize> {
        let (hi, lo) = if i >= j { (i, j) } else { (j, i) };
        let d = hi - lo;
        (d <= self.bandwidth).then(|| hi * (self.bandwidth + 1) + d)
    }

    pub fn set(&mut self, i: usize, j: usize, v: T) {
        let s = self.slot(i, j).expect("entry outside the band");
        self.band[s] = v;
    }
}

impl<T: Real> SymmetricStorage<T> for BandedSymmetricMatrix<T> {
    type Factor = BandedLdlt<T>;

    fn dim(&self) -> usize {
        self.dim
    }

    fn get(&self, i: usize, j: usize) -> T {
        self.slot(i, j).map_or(T::zero(), |s| self.band[s])
    }

    fn add(&mut self, i: usize, j: usize, v: T) {
        let s = self.slot(i, j).expect("entry outside the band");
        self.band[s] = self.band[s] + v;
    }

    fn factor(&self) -> Result<BandedLdlt<T>> {
        BandedLdlt::new(self, pivot_tolerance(self.max_diagonal()))
    }

    fn matvec(&self, x: &[T]) -> Vec<T> {
        assert_eq!(x.len(), self.dim);
        let b = self.bandwidth;
        (0..self.dim)
            .map(|i| {
                let lo = i.saturating_sub(b);
                let hi = (i + b).min(self.dim - 1);
                (lo..=hi).map(|j| self.get(i, j) * x[j]).sum()
            })
            .collect()
    }
}

/// Banded `L D L^T`; `L` keeps the bandwidth of the input.
#[derive(Debug, Clone)]
pub struct BandedLdlt<T = f64> {
    dim: usize,
    bandwidth: usize,
    // unit lower factor, same layout as the matrix band (diagonal slot unused)
    l: Vec<T>,
    d: Vec<T>,
}

impl<T: Real> BandedLdlt<T> {
    pub(crate) fn new(a: &BandedSymmetricMatrix<T>, tol: T) -> Result<Self> {
        let n = a.dim;
        let b = a.bandwidth;
        let w = b + 1;
        let mut l = vec![T::zero(); n * w];
        let mut d = vec![T::zero(); n];
        for i in 0..n {
            let lo = i.saturating_sub(b);
            for j in lo..i {
                let mut s = a.band[i * w + (i - j)];
                for p in lo.max(j.saturating_sub(b))..j {
                    s = s - l[i * w + (i - p)] * l[j * w + (j - p)] * d[p];
                }
                l[i * w + (i - j)] = s / d[j];
            }
            let mut s = a.band[i * w];
            for p in lo..i {
                let lip = l[i * w + (i - p)];
                s = s - lip * lip * d[p];
            }
            if !(s > tol) {
                return Err(not_pd(i, s, tol));
            }
            d[i] = s;
        }
        Ok(Self {
            dim: n,
            bandwidth: b,
            l,
            d,
        })
    }

    pub fn pivots(&self) -> &[T] {
        &self.d
    }
}

impl<T: Real> SpdFactor<T> for BandedLdlt<T> {
    fn dim(&self) -> usize {
        self.dim
    }

    fn solve_in_place(&self, x: &mut [T]) {
        let n = self.dim;
        let b = self.bandwidth;
        let w = b + 1;
        for i in 0..n {
            let mut s = x[i];
            for j in i.saturating_sub(b)..i {
                s = s - self.l[i * w + (i - j)] * x[j];
            }
            x[i] = s;
        }
        for i in 0..n {
            x[i] = x[i] / self.d[i];
        }
        for i in (0..n).rev() {
            let mut s = x[i];
            for j in i + 1..(i + b + 1).min(n) {
                s = s - self.l[j * w + (j - i)] * x[j];
            }
            x[i] = s;
        }
    }
}
