//! Gram matrices `<N_i, N_j>` and moments `<f, N_i>`.
//!
//! Spline products are integrated cell by cell with `k`-point Gauss–Legendre, which is exact
//! for polynomials of degree `2k - 1`. General integrands use a composite rule on each knot
//! interval; discontinuities and integrable singularities can be declared so that the cells are
//! split there.

use crate::basis::{BSplineBasis, PeriodicBSplineBasis, SplineSpace};
use crate::error::{Error, Result};
use crate::linalg::{BandedSymmetricMatrix, CyclicBandedMatrix, SymmetricStorage};
use crate::scalar::Real;

/// Gauss–Legendre rule on `[0, 1]`; weights sum to one.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule<T = f64> {
    nodes: Vec<T>,
    weights: Vec<T>,
}

impl<T: Real> QuadratureRule<T> {
    /// `m`-point rule, exact for degree `2m - 1`.
    pub fn gauss_legendre(m: usize) -> Self {
        assert!(m >= 1, "quadrature order must be positive");
        let (x, w) = gauss_legendre_f64(m);
        Self {
            nodes: x.iter().map(|&v| T::lit(0.5 * (v + 1.0))).collect(),
            weights: w.iter().map(|&v| T::lit(0.5 * v)).collect(),
        }
    }

    pub fn order(&self) -> usize {
        self.nodes.len()
    }

    pub fn nodes(&self) -> &[T] {
        &self.nodes
    }

    pub fn weights(&self) -> &[T] {
        &self.weights
    }

    /// Nodes and weights mapped to `[a, b]`.
    pub fn on(&self, a: T, b: T) -> impl Iterator<Item = (T, T)> + '_ {
        let h = b - a;
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(move |(&u, &w)| (a + u * h, w * h))
    }

    pub fn integrate(&self, a: T, b: T, f: impl Fn(T) -> T) -> T {
        self.on(a, b).map(|(x, w)| w * f(x)).sum()
    }
}

/// Nodes on `[-1, 1]` by Newton iteration on `P_m`.
fn gauss_legendre_f64(m: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; m];
    let mut w = vec![0.0; m];
    let mf = m as f64;
    for i in 0..m.div_ceil(2) {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (mf + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for j in 2..=m {
                let jf = j as f64;
                let p2 = ((2.0 * jf - 1.0) * z * p1 - (jf - 1.0) * p0) / jf;
                p0 = p1;
                p1 = p2;
            }
            let pm = if m == 1 { z } else { p1 };
            let pm1 = if m == 1 { 1.0 } else { p0 };
            dp = mf * (z * pm - pm1) / (z * z - 1.0);
            let dz = pm / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        if m == 1 {
            z = 0.0;
            dp = 1.0;
        }
        x[i] = -z;
        x[m - 1 - i] = z;
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        w[i] = wi;
        w[m - 1 - i] = wi;
    }
    if m == 1 {
        w[0] = 2.0;
    }
    (x, w)
}

/// Gram matrix of any spline space.
pub fn assemble_gram<T: Real, S: SplineSpace<T>>(space: &S) -> S::Gram {
    let k = space.order();
    let rule = QuadratureRule::<T>::gauss_legendre(k);
    let mut gram = space.empty_gram();
    let mut vals = vec![T::zero(); k];
    for c in 0..space.cell_count() {
        let (a, b) = space.cell(c);
        if !(b > a) {
            continue;
        }
        for (u, w) in rule.on(T::zero(), b - a) {
            let first = space.eval_cell_offset(c, u, &mut vals);
            for p in 0..k {
                let wp = w * vals[p];
                let ip = space.position(first, p);
                for q in p..k {
                    gram.add(ip, space.position(first, q), wp * vals[q]);
                }
            }
        }
    }
    gram
}

/// `(<N_i, N_j>)`, bandwidth `k - 1`.
pub fn gram_matrix<T: Real>(basis: &BSplineBasis<T>) -> BandedSymmetricMatrix<T> {
    assemble_gram(basis)
}

/// `(<N~_i, N~_j>)` over one period, cyclic bandwidth `k - 1`.
pub fn periodic_gram_matrix<T: Real>(pbasis: &PeriodicBSplineBasis<T>) -> CyclicBandedMatrix<T> {
    assemble_gram(pbasis)
}

/// Controls [`moment_vector`].
#[derive(Debug, Clone, PartialEq)]
pub struct MomentOptions<T = f64> {
    /// Uniform subdivisions of each knot interval (after splitting at breakpoints).
    pub cells_per_interval: usize,
    /// Gauss points per subcell; `None` means `k + 3`.
    pub nodes: Option<usize>,
    /// Points where the integrand jumps.
    pub breakpoints: Vec<T>,
    /// Points where the integrand is unbounded but integrable.
    pub singularities: Vec<T>,
    /// Levels of geometric grading towards each declared singularity.
    pub grading_levels: usize,
    /// Also integrate at twice the subdivision and report the difference.
    pub estimate_error: bool,
}

impl<T: Real> Default for MomentOptions<T> {
    fn default() -> Self {
        Self {
            cells_per_interval: 4,
            nodes: None,
            breakpoints: Vec::new(),
            singularities: Vec::new(),
            grading_levels: 40,
            estimate_error: true,
        }
    }
}

impl<T: Real> MomentOptions<T> {
    pub fn with_cells(cells_per_interval: usize) -> Self {
        Self {
            cells_per_interval,
            ..Self::default()
        }
    }
}

/// Moments `b_i = <f, N_i>` and the observed change under one refinement.
#[derive(Debug, Clone, PartialEq)]
pub struct Moments<T = f64> {
    pub values: Vec<T>,
    /// `max_i |b_i(2c) - b_i(c)|`, zero when not requested.
    pub error_estimate: T,
}

/// Relative distance by which a node colliding with a singularity is moved.
pub const SINGULAR_NODE_SHIFT: f64 = 1e-12;

/// `<f, N_i>` for every basis function. `f` is called with canonical points of the space
/// (reduced to `[0, 1)` on the torus).
pub fn moment_vector<T, S, F>(space: &S, f: &F, opts: &MomentOptions<T>) -> Result<Moments<T>>
where
    T: Real,
    S: SplineSpace<T>,
    F: Fn(T) -> T + ?Sized,
{
    let cells = opts.cells_per_interval.max(1);
    let values = integrate_against_basis(space, f, opts, cells)?;
    let error_estimate = if opts.estimate_error {
        let fine = integrate_against_basis(space, f, opts, 2 * cells)?;
        values
            .iter()
            .zip(&fine)
            .fold(T::zero(), |m, (&a, &b)| m.max((a - b).abs()))
    } else {
        T::zero()
    };
    Ok(Moments {
        values,
        error_estimate,
    })
}

/// Split points relevant to the interval `[a, b]` (all periodic representatives).
fn split_points<T: Real>(points: &[T], a: T, b: T, periodic: bool) -> Vec<T> {
    let shifts: &[T] = if periodic {
        &[T::zero(), T::one(), -T::one()]
    } else {
        &[T::zero()]
    };
    let mut out: Vec<T> = points
        .iter()
        .flat_map(|&p| shifts.iter().map(move |&r| p + r))
        .filter(|&p| p > a && p < b)
        .collect();
    out.sort_by(|x, y| x.partial_cmp(y).unwrap());
    out.dedup();
    out
}

fn integrate_against_basis<T, S, F>(
    space: &S,
    f: &F,
    opts: &MomentOptions<T>,
    cells: usize,
) -> Result<Vec<T>>
where
    T: Real,
    S: SplineSpace<T>,
    F: Fn(T) -> T + ?Sized,
{
    let k = space.order();
    let rule = QuadratureRule::<T>::gauss_legendre(opts.nodes.unwrap_or(k + 3));
    let periodic = matches!(space.metric(), crate::basis::IndexMetric::Cyclic(_));
    let mut out = vec![T::zero(); space.dim()];
    let mut vals = vec![T::zero(); k];
    let sing_all = split_points(&opts.singularities, -T::lit(2.0), T::lit(3.0), periodic);
    let is_singular = |p: T| sing_all.iter().any(|&s| s == p);
    for c in 0..space.cell_count() {
        let (a, b) = space.cell(c);
        if !(b > a) {
            continue;
        }
        let width = b - a;
        let shift = width * T::lit(SINGULAR_NODE_SHIFT);
        let mut cuts = vec![a];
        let mut inner = split_points(&opts.breakpoints, a, b, periodic);
        inner.extend(split_points(&opts.singularities, a, b, periodic));
        inner.sort_by(|x, y| x.partial_cmp(y).unwrap());
        inner.dedup();
        cuts.extend(inner);
        cuts.push(b);

        let mut acc = vec![T::zero(); k];
        let mut first = 0usize;
        let mut add_piece = |lo: T, hi: T, acc: &mut [T]| -> Result<()> {
            for (x, w) in rule.on(lo, hi) {
                let mut x = x;
                for &s in &sing_all {
                    if (x - s).abs() <= shift {
                        x = if x >= s { s + shift } else { s - shift };
                    }
                }
                let fx = f(canonical(x, periodic));
                if !fx.is_finite() {
                    return Err(Error::NonFiniteSample { x: x.as_f64() });
                }
                first = space.eval_cell(c, x, &mut vals);
                for (a, &v) in acc.iter_mut().zip(vals.iter()) {
                    *a = *a + w * fx * v;
                }
            }
            Ok(())
        };
        for seg in cuts.windows(2) {
            let (lo, hi) = (seg[0], seg[1]);
            let step = (hi - lo) / T::from_usize_lossy(cells);
            for s in 0..cells {
                let p0 = lo + step * T::from_usize_lossy(s);
                let p1 = if s + 1 == cells {
                    hi
                } else {
                    lo + step * T::from_usize_lossy(s + 1)
                };
                let left_sing = s == 0 && is_singular(lo);
                let right_sing = s + 1 == cells && is_singular(hi);
                if !left_sing && !right_sing {
                    add_piece(p0, p1, &mut acc)?;
                    continue;
                }
                // geometric grading towards singular ends
                let mid = if left_sing && right_sing {
                    (p0 + p1) * T::lit(0.5)
                } else if left_sing {
                    p1
                } else {
                    p0
                };
                if left_sing {
                    graded(p0, mid, true, opts.grading_levels, &mut |x0, x1| {
                        add_piece(x0, x1, &mut acc)
                    })?;
                }
                if right_sing {
                    graded(mid, p1, false, opts.grading_levels, &mut |x0, x1| {
                        add_piece(x0, x1, &mut acc)
                    })?;
                }
            }
        }
        for (j, &v) in acc.iter().enumerate() {
            let p = space.position(first, j);
            out[p] = out[p] + v;
        }
    }
    Ok(out)
}

fn canonical<T: Real>(x: T, periodic: bool) -> T {
    if periodic {
        PeriodicBSplineBasis::<T>::reduce(x)
    } else {
        x
    }
}

/// Splits `[lo, hi]` into pieces shrinking by half towards the singular end.
fn graded<T: Real>(
    lo: T,
    hi: T,
    singular_at_lo: bool,
    levels: usize,
    piece: &mut dyn FnMut(T, T) -> Result<()>,
) -> Result<()> {
    let half = T::lit(0.5);
    let len = hi - lo;
    let mut frac = T::one();
    for _ in 0..levels {
        let next = frac * half;
        if singular_at_lo {
            piece(lo + len * next, lo + len * frac)?;
        } else {
            piece(hi - len * frac, hi - len * next)?;
        }
        frac = next;
    }
    if singular_at_lo {
        piece(lo, lo + len * frac)
    } else {
        piece(hi - len * frac, hi)
    }
}
