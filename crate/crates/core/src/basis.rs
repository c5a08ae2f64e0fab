//! B-spline bases on an interval and on the torus.
//!
//! Basis functions are addressed by their 0-based *position*. For a [`BSplineBasis`] the
//! position `p` is the function `N_{l+p}` where `l` is [`KnotVector::first_index`]; for a
//! [`PeriodicBSplineBasis`] position and index coincide.
//!
//! Evaluation is local: on the knot interval `[t_m, t_{m+1})` exactly `k` functions can be
//! non-zero, and [`SplineSpace::eval_cell`] writes all of them into a caller buffer in one
//! triangular sweep. Points are located right-continuously; the right end of an interval
//! domain takes the left limit.

use crate::error::{Error, Result};
use crate::knots::{KnotVector, PeriodicKnotVector};
use crate::linalg::{BandedSymmetricMatrix, CyclicBandedMatrix, SymmetricStorage};
use crate::scalar::Real;

/// The `k` B-splines of order `k` that are active on `[t_m, t_{m+1})`, evaluated at `x`.
///
/// `knot(i)` must return `t_i`. On exit `out[j] = N_{m-k+1+j}(x)`.
#[inline]
fn eval_active<T: Real>(k: usize, m: isize, x: T, knot: impl Fn(isize) -> T, out: &mut [T]) {
    out[0] = T::one();
    for j in 1..k {
        let mut saved = T::zero();
        for r in 0..j {
            let right = knot(m + r as isize + 1) - x;
            let left = x - knot(m + 1 + r as isize - j as isize);
            let term = out[r] / (right + left);
            out[r] = saved + right * term;
            saved = left * term;
        }
        out[j] = saved;
    }
}

/// Linear index metric `|i - j|` or the canonical metric on `Z/nZ`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum IndexMetric {
    Linear,
    Cyclic(usize),
}

impl IndexMetric {
    #[inline]
    pub fn dist(self, i: usize, j: usize) -> usize {
        let d = i.abs_diff(j);
        match self {
            IndexMetric::Linear => d,
            IndexMetric::Cyclic(n) => {
                let d = d % n;
                d.min(n - d)
            }
        }
    }
}

/// `min_{u in U, v in V} dist(u, v)`.
pub fn index_distance(u: &[usize], v: &[usize], metric: IndexMetric) -> Result<usize> {
    if u.is_empty() || v.is_empty() {
        return Err(Error::EmptySet);
    }
    Ok(u
        .iter()
        .flat_map(|&a| v.iter().map(move |&b| metric.dist(a, b)))
        .min()
        .unwrap_or(0))
}

/// A finite-dimensional spline space with a local B-spline basis.
pub trait SplineSpace<T: Real>: Clone + Send + Sync {
    /// Storage used for the Gram matrix of this basis.
    type Gram: SymmetricStorage<T>;

    fn order(&self) -> usize;

    fn dim(&self) -> usize;

    /// Integration domain; for the torus one period `[s_0, s_0 + 1]`.
    fn domain(&self) -> (T, T);

    /// Number of knot intervals tiling the domain, empty ones included.
    fn cell_count(&self) -> usize;

    fn cell(&self, c: usize) -> (T, T);

    /// Evaluates the `k` functions active on cell `c` at `x` (which must lie in the closed
    /// cell). Returns the position of the function written to `out[0]`; the others follow at
    /// [`Self::position`]`(first, j)`.
    fn eval_cell(&self, c: usize, x: T, out: &mut [T]) -> usize;

    /// [`Self::eval_cell`] at `x = a + u` for the cell `[a, b]`, with the knots taken
    /// relative to `a`. Cells of equal shape then give bit-identical values.
    fn eval_cell_offset(&self, c: usize, u: T, out: &mut [T]) -> usize {
        self.eval_cell(c, self.cell(c).0 + u, out)
    }

    /// Cell containing `x` and the representative of `x` to hand to [`Self::eval_cell`].
    fn locate(&self, x: T) -> Result<(usize, T)>;

    /// Position of the `j`-th active function after `first`.
    fn position(&self, first: usize, j: usize) -> usize;

    /// Length of the support of the function at position `p`.
    fn support_length(&self, p: usize) -> T;

    /// Length of the convex hull of the supports of `p` and `q`.
    fn hull_length(&self, p: usize, q: usize) -> T;

    fn metric(&self) -> IndexMetric;

    /// Closed-support index set of the interval `[a, b]`, sorted.
    fn index_set(&self, a: T, b: T) -> Vec<usize>;

    /// Zero Gram matrix of the right shape.
    fn empty_gram(&self) -> Self::Gram;

    /// All active values at `x`: `(first position, values)`.
    fn eval_local(&self, x: T, out: &mut [T]) -> Result<usize> {
        let (c, xr) = self.locate(x)?;
        Ok(self.eval_cell(c, xr, out))
    }

    /// Single basis function at position `p`.
    fn eval_basis(&self, p: usize, x: T) -> Result<T> {
        let n = self.dim();
        if p >= n {
            return Err(Error::IndexOutOfRange {
                index: p as isize,
                lo: 0,
                hi: n as isize - 1,
            });
        }
        let k = self.order();
        let mut buf = vec![T::zero(); k];
        let first = self.eval_local(x, &mut buf)?;
        Ok((0..k)
            .find(|&j| self.position(first, j) == p)
            .map_or(T::zero(), |j| buf[j]))
    }

    /// Index set of a single point.
    fn index_set_point(&self, x: T) -> Vec<usize> {
        self.index_set(x, x)
    }
}

/// B-splines `N_l, ..., N_r` on a clamped knot sequence.
#[derive(Debug, Clone, PartialEq)]
pub struct BSplineBasis<T = f64> {
    kv: KnotVector<T>,
}

impl<T: Real> BSplineBasis<T> {
    pub fn new(kv: KnotVector<T>) -> Self {
        Self { kv }
    }

    pub fn knots(&self) -> &KnotVector<T> {
        &self.kv
    }

    /// Global index `l + p` of the function at position `p`.
    pub fn index_of(&self, p: usize) -> isize {
        self.kv.first_index() + p as isize
    }

    /// Position of the function with global index `i`.
    pub fn position_of(&self, i: isize) -> Result<usize> {
        let (lo, hi) = (self.kv.first_index(), self.kv.last_index());
        if i < lo || i > hi {
            return Err(Error::IndexOutOfRange { index: i, lo, hi });
        }
        Ok((i - lo) as usize)
    }

    /// `N_i(x)` by global index.
    pub fn eval_bspline(&self, i: isize, x: T) -> Result<T> {
        let p = self.position_of(i)?;
        self.eval_basis(p, x)
    }

    /// `kappa_i` by position.
    pub fn kappa(&self, p: usize) -> T {
        self.support_length(p)
    }

    /// Support `[t_i, t_{i+k}]` of the function at position `p`.
    pub fn support(&self, p: usize) -> (T, T) {
        let t = self.kv.knots();
        (t[p], t[p + self.kv.order()])
    }

    /// Length of the knot interval containing `x` (right-continuous).
    pub fn interval_length(&self, x: T) -> Result<T> {
        let (c, _) = self.locate(x)?;
        let (a, b) = self.cell(c);
        Ok(b - a)
    }
}

impl<T: Real> SplineSpace<T> for BSplineBasis<T> {
    type Gram = BandedSymmetricMatrix<T>;

    fn order(&self) -> usize {
        self.kv.order()
    }

    fn dim(&self) -> usize {
        self.kv.dim()
    }

    fn domain(&self) -> (T, T) {
        self.kv.domain()
    }

    fn cell_count(&self) -> usize {
        self.kv.cell_count()
    }

    fn cell(&self, c: usize) -> (T, T) {
        self.kv.cell(c)
    }

    fn eval_cell(&self, c: usize, x: T, out: &mut [T]) -> usize {
        let k = self.kv.order();
        let t = self.kv.knots();
        eval_active(k, (k - 1 + c) as isize, x, |i| t[i as usize], out);
        c
    }

    fn eval_cell_offset(&self, c: usize, u: T, out: &mut [T]) -> usize {
        let k = self.kv.order();
        let t = self.kv.knots();
        let a = t[k - 1 + c];
        eval_active(k, (k - 1 + c) as isize, u, |i| t[i as usize] - a, out);
        c
    }

    fn locate(&self, x: T) -> Result<(usize, T)> {
        let (lo, hi) = self.kv.domain();
        if !(x >= lo && x <= hi) {
            return Err(Error::DomainViolation {
                x: x.as_f64(),
                lo: lo.as_f64(),
                hi: hi.as_f64(),
            });
        }
        let k = self.kv.order();
        let t = self.kv.knots();
        let last = t.len() - k - 1;
        let m = (t.partition_point(|&ti| ti <= x) - 1).min(last);
        Ok((m + 1 - k, x))
    }

    #[inline]
    fn position(&self, first: usize, j: usize) -> usize {
        first + j
    }

    fn support_length(&self, p: usize) -> T {
        let (a, b) = self.support(p);
        b - a
    }

    fn hull_length(&self, p: usize, q: usize) -> T {
        let (a1, b1) = self.support(p);
        let (a2, b2) = self.support(q);
        b1.max(b2) - a1.min(a2)
    }

    fn metric(&self) -> IndexMetric {
        IndexMetric::Linear
    }

    fn index_set(&self, a: T, b: T) -> Vec<usize> {
        (0..self.dim())
            .filter(|&p| {
                let (lo, hi) = self.support(p);
                lo <= b && hi >= a
            })
            .collect()
    }

    fn empty_gram(&self) -> Self::Gram {
        BandedSymmetricMatrix::zeros(self.dim(), self.order() - 1)
    }
}

/// Periodic B-splines `N~_0, ..., N~_{n-1}` on the torus.
///
/// `N~_j` is the periodisation of the B-spline with knots `s_j, ..., s_{j+k}` of the extended
/// sequence. For `s_0 = 0` this is the two-case definition through the lifted sequence
/// `t_j = s_j`: `N~_j = N_j` for `j <= n-k`, and `N_{j-n}` on `[0, s_j]`, `N_j` on `(s_j, 1)`
/// otherwise.
#[derive(Debug, Clone, PartialEq)]
pub struct PeriodicBSplineBasis<T = f64> {
    pk: PeriodicKnotVector<T>,
}

impl<T: Real> PeriodicBSplineBasis<T> {
    pub fn new(pk: PeriodicKnotVector<T>) -> Self {
        Self { pk }
    }

    pub fn knots(&self) -> &PeriodicKnotVector<T> {
        &self.pk
    }

    pub fn n(&self) -> usize {
        self.pk.n()
    }

    /// `N~_j(x)`, `x` taken modulo 1.
    pub fn eval_periodic_bspline(&self, j: usize, x: T) -> Result<T> {
        self.eval_basis(j, x)
    }

    /// Support `[s_j, s_{j+k}]` as an arc starting at `s_j`.
    pub fn support(&self, j: usize) -> (T, T) {
        let j = j as isize;
        (self.pk.s(j), self.pk.s(j + self.pk.order() as isize))
    }

    /// `kappa~_j`.
    pub fn kappa(&self, j: usize) -> T {
        self.support_length(j)
    }

    /// Reduces `x` to `[0, 1)`.
    pub fn reduce(x: T) -> T {
        let r = x - x.floor();
        if r >= T::one() {
            T::zero()
        } else {
            r
        }
    }
}

impl<T: Real> SplineSpace<T> for PeriodicBSplineBasis<T> {
    type Gram = CyclicBandedMatrix<T>;

    fn order(&self) -> usize {
        self.pk.order()
    }

    fn dim(&self) -> usize {
        self.pk.n()
    }

    fn domain(&self) -> (T, T) {
        (self.pk.s(0), self.pk.s(self.pk.n() as isize))
    }

    fn cell_count(&self) -> usize {
        self.pk.n()
    }

    fn cell(&self, c: usize) -> (T, T) {
        (self.pk.s(c as isize), self.pk.s(c as isize + 1))
    }

    fn eval_cell(&self, c: usize, x: T, out: &mut [T]) -> usize {
        let k = self.pk.order();
        let n = self.pk.n() as isize;
        eval_active(k, c as isize, x, |i| self.pk.s(i), out);
        (c as isize - k as isize + 1).rem_euclid(n) as usize
    }

    fn eval_cell_offset(&self, c: usize, u: T, out: &mut [T]) -> usize {
        let k = self.pk.order();
        let n = self.pk.n() as isize;
        let a = self.pk.s(c as isize);
        eval_active(k, c as isize, u, |i| self.pk.s(i) - a, out);
        (c as isize - k as isize + 1).rem_euclid(n) as usize
    }

    fn locate(&self, x: T) -> Result<(usize, T)> {
        if !x.is_finite() {
            return Err(Error::DomainViolation {
                x: x.as_f64(),
                lo: 0.0,
                hi: 1.0,
            });
        }
        let x = Self::reduce(x);
        let s = self.pk.knots();
        if x < s[0] {
            return Ok((s.len() - 1, x + T::one()));
        }
        let c = s.partition_point(|&sj| sj <= x) - 1;
        Ok((c, x))
    }

    #[inline]
    fn position(&self, first: usize, j: usize) -> usize {
        let p = first + j;
        let n = self.pk.n();
        if p >= n {
            p - n
        } else {
            p
        }
    }

    fn support_length(&self, p: usize) -> T {
        let (a, b) = self.support(p);
        b - a
    }

    fn hull_length(&self, p: usize, q: usize) -> T {
        let (a1, b1) = self.support(p);
        let (a2, b2) = self.support(q);
        [-T::one(), T::zero(), T::one()]
            .iter()
            .map(|&r| b1.max(b2 + r) - a1.min(a2 + r))
            .fold(T::one(), T::min)
    }

    fn metric(&self) -> IndexMetric {
        IndexMetric::Cyclic(self.pk.n())
    }

    /// Arc `[a, b]` with `b - a <= 1`, any representative.
    fn index_set(&self, a: T, b: T) -> Vec<usize> {
        let shift = a.floor();
        let (a, b) = (a - shift, b - shift);
        let shifts = [-T::one(), T::zero(), T::one(), T::lit(2.0)];
        (0..self.dim())
            .filter(|&j| {
                let (lo, hi) = self.support(j);
                shifts.iter().any(|&r| lo + r <= b && hi + r >= a)
            })
            .collect()
    }

    fn empty_gram(&self) -> Self::Gram {
        CyclicBandedMatrix::zeros(self.dim(), self.order() - 1)
    }
}
