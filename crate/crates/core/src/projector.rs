//! Orthogonal projection onto spline spaces, the dual basis, the projection kernel and its
//! Lebesgue constant.
//!
//! `P f` is stored in the primal expansion `sum_i c_i N_i` with `c = G^{-1} b`, `G` the Gram
//! matrix and `b_i = <f, N_i>`. The dual functions are `N_j^* = sum_m a_{jm} N_m` with
//! `(a_{jm}) = G^{-1}`, and the kernel of `P` is
//! `K(x, y) = sum_{i,j} a_{ij} N_i(x) N_j(y)`.

use rayon::prelude::*;

use crate::basis::{BSplineBasis, SplineSpace};
use crate::error::{Error, Result};
use crate::fit::{fit_line, upper_envelope, LineFit};
use crate::gram::{assemble_gram, moment_vector, MomentOptions};
use crate::knots::KnotVector;
use crate::linalg::{DenseMatrix, SpdFactor, SymmetricStorage};
use crate::scalar::Real;

/// An element `sum_i c_i N_i` of a spline space.
#[derive(Debug, Clone, PartialEq)]
pub struct Spline<T, S> {
    space: S,
    coeffs: Vec<T>,
}

impl<T: Real, S: SplineSpace<T>> Spline<T, S> {
    pub fn new(space: S, coeffs: Vec<T>) -> Result<Self> {
        if coeffs.len() != space.dim() {
            return Err(Error::DimensionMismatch {
                expected: space.dim(),
                got: coeffs.len(),
            });
        }
        Ok(Self { space, coeffs })
    }

    pub fn space(&self) -> &S {
        &self.space
    }

    pub fn coeffs(&self) -> &[T] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<T> {
        self.coeffs
    }

    /// Value on a known cell; `buf` needs length `k`.
    #[inline]
    pub fn eval_cell(&self, c: usize, x: T, buf: &mut [T]) -> T {
        let first = self.space.eval_cell(c, x, buf);
        buf.iter()
            .enumerate()
            .map(|(j, &v)| v * self.coeffs[self.space.position(first, j)])
            .sum()
    }

    pub fn eval(&self, x: T) -> Result<T> {
        let mut buf = vec![T::zero(); self.space.order()];
        let (c, xr) = self.space.locate(x)?;
        Ok(self.eval_cell(c, xr, &mut buf))
    }

    /// `<s, N_j>` for all `j`, exact.
    pub fn moments(&self) -> Vec<T> {
        assemble_gram(&self.space).matvec(&self.coeffs)
    }
}

/// Result of [`Projector::project`].
#[derive(Debug, Clone)]
pub struct Projection<T, S> {
    pub spline: Spline<T, S>,
    /// `<f, N_i>`.
    pub moments: Vec<T>,
    /// Quadrature error estimate of the moments.
    pub quadrature_error: T,
}

/// Factorized Gram matrix of a spline space; applies `P`.
pub struct Projector<T: Real, S: SplineSpace<T>> {
    space: S,
    gram: S::Gram,
    factor: <S::Gram as SymmetricStorage<T>>::Factor,
}

impl<T: Real, S: SplineSpace<T>> Projector<T, S> {
    pub fn new(space: S) -> Result<Self> {
        let gram = assemble_gram(&space);
        let factor = gram.factor()?;
        Ok(Self {
            space,
            gram,
            factor,
        })
    }

    pub fn space(&self) -> &S {
        &self.space
    }

    pub fn gram(&self) -> &S::Gram {
        &self.gram
    }

    /// The spline with moments `b`, i.e. `sum_i b_i N_i^*`.
    pub fn from_moments(&self, b: &[T]) -> Result<Spline<T, S>> {
        let c = self.factor.solve(b)?;
        Spline::new(self.space.clone(), c)
    }

    pub fn project<F>(&self, f: &F, opts: &MomentOptions<T>) -> Result<Projection<T, S>>
    where
        F: Fn(T) -> T + ?Sized,
    {
        let m = moment_vector(&self.space, f, opts)?;
        let spline = self.from_moments(&m.values)?;
        Ok(Projection {
            spline,
            moments: m.values,
            quadrature_error: m.error_estimate,
        })
    }

    /// `P s` for a spline given on the same space (the identity up to rounding).
    pub fn project_spline(&self, s: &Spline<T, S>) -> Result<Spline<T, S>> {
        self.from_moments(&s.moments())
    }

    pub fn dual_basis(&self) -> Result<DualBasis<T, S>> {
        Ok(DualBasis {
            space: self.space.clone(),
            inverse: self.factor.inverse()?,
        })
    }
}

/// `P f` for one function.
pub fn project<T, S, F>(space: &S, f: &F, opts: &MomentOptions<T>) -> Result<Projection<T, S>>
where
    T: Real,
    S: SplineSpace<T>,
    F: Fn(T) -> T + ?Sized,
{
    Projector::new(space.clone())?.project(f, opts)
}

/// Relative size below which kernel coefficients are skipped in the Lebesgue scan.
pub const KERNEL_TAIL_CUTOFF: f64 = 1e-18;

/// Dual basis `N_j^* = sum_m a_{jm} N_m` with the full inverse Gram matrix.
#[derive(Debug, Clone)]
pub struct DualBasis<T, S> {
    space: S,
    inverse: DenseMatrix<T>,
}

impl<T: Real, S: SplineSpace<T>> DualBasis<T, S> {
    pub fn new(space: S) -> Result<Self> {
        Projector::new(space)?.dual_basis()
    }

    pub fn space(&self) -> &S {
        &self.space
    }

    /// `(a_{ij})`.
    pub fn inverse(&self) -> &DenseMatrix<T> {
        &self.inverse
    }

    #[inline]
    pub fn a(&self, i: usize, j: usize) -> T {
        self.inverse.get(i, j)
    }

    fn check_index(&self, j: usize) -> Result<()> {
        let n = self.space.dim();
        if j >= n {
            return Err(Error::IndexOutOfRange {
                index: j as isize,
                lo: 0,
                hi: n as isize - 1,
            });
        }
        Ok(())
    }

    /// `N_j^*(x)`, summing only the locally active `m`.
    pub fn dual_function_eval(&self, j: usize, x: T) -> Result<T> {
        self.check_index(j)?;
        let k = self.space.order();
        let mut buf = vec![T::zero(); k];
        let first = self.space.eval_local(x, &mut buf)?;
        Ok((0..k)
            .map(|p| self.a(j, self.space.position(first, p)) * buf[p])
            .sum())
    }

    /// `N_j^*` as a spline.
    pub fn dual_function(&self, j: usize) -> Result<Spline<T, S>> {
        self.check_index(j)?;
        Spline::new(self.space.clone(), self.inverse.row(j).to_vec())
    }

    /// `sum_j b_j N_j^*` evaluated through the dual expansion.
    pub fn expand(&self, b: &[T]) -> Result<Spline<T, S>> {
        if b.len() != self.space.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.space.dim(),
                got: b.len(),
            });
        }
        Spline::new(self.space.clone(), self.inverse.matvec(b))
    }

    /// `K(x, y)`.
    pub fn kernel_eval(&self, x: T, y: T) -> Result<T> {
        let k = self.space.order();
        let mut bx = vec![T::zero(); k];
        let mut by = vec![T::zero(); k];
        let fx = self.space.eval_local(x, &mut bx)?;
        let fy = self.space.eval_local(y, &mut by)?;
        let mut s = T::zero();
        for p in 0..k {
            let i = self.space.position(fx, p);
            for q in 0..k {
                s = s + bx[p] * self.a(i, self.space.position(fy, q)) * by[q];
            }
        }
        Ok(s)
    }

    /// Grid used by the Lebesgue scan: `grid_per_cell` equispaced points per non-empty cell
    /// (left end included), plus the right end point of an interval domain.
    pub fn lebesgue_grid(&self, grid_per_cell: usize) -> Vec<(usize, T)> {
        let g = T::from_usize_lossy(grid_per_cell);
        let mut grid = Vec::new();
        let mut last_cell = None;
        for c in 0..self.space.cell_count() {
            let (a, b) = self.space.cell(c);
            if !(b > a) {
                continue;
            }
            last_cell = Some((c, b));
            let h = b - a;
            for p in 0..grid_per_cell {
                grid.push((c, a + h * T::from_usize_lossy(p) / g));
            }
        }
        if matches!(self.space.metric(), crate::basis::IndexMetric::Linear) {
            if let Some((c, b)) = last_cell {
                grid.push((c, b));
            }
        }
        grid
    }

    /// `(x, int |K(x, y)| dy)` on [`Self::lebesgue_grid`].
    pub fn lebesgue_function(&self, grid_per_cell: usize) -> Vec<(T, T)> {
        let integrator = KernelIntegrator::new(self);
        self.lebesgue_grid(grid_per_cell)
            .par_iter()
            .map_init(
                || integrator.scratch(),
                |scratch, &(c, x)| (x, integrator.abs_kernel_integral(c, x, scratch)),
            )
            .collect()
    }

    /// `max_x int |K(x, y)| dy` over the grid: a lower bound for `||P||_{inf -> inf}`.
    pub fn lebesgue_constant(&self, grid_per_cell: usize) -> T {
        self.lebesgue_function(grid_per_cell)
            .into_iter()
            .fold(T::zero(), |m, (_, v)| m.max(v))
    }
}

/// Per-cell power form of the active B-splines, for exact `int |spline|` on a cell.
struct KernelIntegrator<'a, T, S> {
    db: &'a DualBasis<T, S>,
    k: usize,
    // per cell: (first position, h, k*k matrix mapping active coefficients to monomials in u)
    cells: Vec<Option<(usize, T, Vec<T>)>>,
}

struct Scratch<T> {
    vals: Vec<T>,
    row: Vec<T>,
    local: Vec<T>,
    poly: Vec<T>,
}

impl<'a, T: Real, S: SplineSpace<T>> KernelIntegrator<'a, T, S> {
    fn new(db: &'a DualBasis<T, S>) -> Self {
        let space = &db.space;
        let k = space.order();
        let nodes: Vec<T> = (0..k)
            .map(|p| {
                let th = std::f64::consts::PI * (2 * p + 1) as f64 / (2 * k) as f64;
                T::lit(0.5 * (1.0 - th.cos()))
            })
            .collect();
        let mut vals = vec![T::zero(); k];
        let cells = (0..space.cell_count())
            .map(|c| {
                let (a, b) = space.cell(c);
                if !(b > a) {
                    return None;
                }
                let h = b - a;
                let mut vander = vec![T::zero(); k * k];
                let mut rhs = vec![T::zero(); k * k];
                let mut first = 0;
                for (p, &u) in nodes.iter().enumerate() {
                    first = space.eval_cell(c, a + u * h, &mut vals);
                    let mut pw = T::one();
                    for d in 0..k {
                        vander[p * k + d] = pw;
                        pw = pw * u;
                    }
                    rhs[p * k..(p + 1) * k].copy_from_slice(&vals);
                }
                solve_small(k, &mut vander, &mut rhs);
                Some((first, h, rhs))
            })
            .collect();
        Self { db, k, cells }
    }

    fn scratch(&self) -> Scratch<T> {
        Scratch {
            vals: vec![T::zero(); self.k],
            row: vec![T::zero(); self.db.space.dim()],
            local: vec![T::zero(); self.k],
            poly: vec![T::zero(); self.k],
        }
    }

    fn abs_kernel_integral(&self, cell: usize, x: T, s: &mut Scratch<T>) -> T {
        let space = &self.db.space;
        let k = self.k;
        let first = space.eval_cell(cell, x, &mut s.vals);
        s.row.iter_mut().for_each(|v| *v = T::zero());
        for p in 0..k {
            let w = s.vals[p];
            if w == T::zero() {
                continue;
            }
            let arow = self.db.inverse.row(space.position(first, p));
            for (r, &a) in s.row.iter_mut().zip(arow) {
                *r = *r + w * a;
            }
        }
        let scale = s.row.iter().fold(T::zero(), |m, v| m.max(v.abs()));
        let cutoff = scale * T::lit(KERNEL_TAIL_CUTOFF);
        let mut total = T::zero();
        for entry in self.cells.iter().flatten() {
            let (cf, h, ref q) = *entry;
            let mut big = false;
            for j in 0..k {
                let v = s.row[space.position(cf, j)];
                s.local[j] = v;
                big |= v.abs() > cutoff;
            }
            if !big {
                continue;
            }
            // q is stored as k rows (monomial degree d) of k columns (active function j)
            for d in 0..k {
                s.poly[d] = (0..k).map(|j| q[d * k + j] * s.local[j]).sum();
            }
            total = total + h * abs_integral_unit(&s.poly);
        }
        total
    }
}

#[inline]
fn horner<T: Real>(p: &[T], u: T) -> T {
    p.iter().rev().fold(T::zero(), |acc, &c| acc * u + c)
}

#[inline]
fn antiderivative<T: Real>(p: &[T], u: T) -> T {
    p.iter()
        .enumerate()
        .rev()
        .fold(T::zero(), |acc, (d, &c)| acc * u + c / T::from_usize_lossy(d + 1))
        * u
}

/// `int_0^1 |p(u)| du` for a polynomial in monomial form, splitting at sign changes found
/// on `2 deg + 3` equispaced samples.
fn abs_integral_unit<T: Real>(p: &[T]) -> T {
    let deg = p.len().saturating_sub(1);
    if deg == 0 {
        return p.first().map_or(T::zero(), |c| c.abs());
    }
    let samples = 2 * deg + 2;
    let step = T::one() / T::from_usize_lossy(samples);
    let mut cuts = [T::zero(); 64];
    let mut ncuts = 1;
    let mut u0 = T::zero();
    let mut p0 = horner(p, u0);
    for s in 1..=samples {
        let u1 = if s == samples {
            T::one()
        } else {
            step * T::from_usize_lossy(s)
        };
        let p1 = horner(p, u1);
        if ncuts < cuts.len() - 1 {
            if p0 * p1 < T::zero() {
                cuts[ncuts] = illinois(p, u0, u1, p0, p1);
                ncuts += 1;
            } else if p1 == T::zero() && s < samples {
                cuts[ncuts] = u1;
                ncuts += 1;
            }
        }
        u0 = u1;
        p0 = p1;
    }
    cuts[ncuts] = T::one();
    ncuts += 1;
    let mut total = T::zero();
    let mut prev = T::zero();
    for &c in &cuts[1..ncuts] {
        let f = antiderivative(p, c);
        total = total + (f - prev).abs();
        prev = f;
    }
    total
}

/// Root of `p` in `[a, b]` with `p(a) p(b) < 0`.
fn illinois<T: Real>(p: &[T], mut a: T, mut b: T, mut fa: T, mut fb: T) -> T {
    let tol = T::epsilon() * T::lit(4.0);
    let mut side = 0i8;
    let mut c = a;
    for _ in 0..60 {
        c = (a * fb - b * fa) / (fb - fa);
        if !(c > a && c < b) {
            c = (a + b) * T::lit(0.5);
        }
        let fc = horner(p, c);
        if fc == T::zero() || (b - a) < tol {
            break;
        }
        if fc * fb < T::zero() {
            a = b;
            fa = fb;
            b = c;
            fb = fc;
            side = 0;
        } else {
            b = c;
            fb = fc;
            if side == 1 {
                fa = fa * T::lit(0.5);
            }
            side = 1;
        }
        if a > b {
            std::mem::swap(&mut a, &mut b);
            std::mem::swap(&mut fa, &mut fb);
        }
    }
    c
}

/// Solves `V X = B` in place (`B` becomes `X`), both `k x k` row-major, partial pivoting.
fn solve_small<T: Real>(k: usize, v: &mut [T], b: &mut [T]) {
    for col in 0..k {
        let piv = (col..k)
            .max_by(|&r, &s| v[r * k + col].abs().partial_cmp(&v[s * k + col].abs()).unwrap())
            .unwrap();
        if piv != col {
            for j in 0..k {
                v.swap(piv * k + j, col * k + j);
                b.swap(piv * k + j, col * k + j);
            }
        }
        let d = v[col * k + col];
        for r in col + 1..k {
            let f = v[r * k + col] / d;
            if f == T::zero() {
                continue;
            }
            for j in col..k {
                v[r * k + j] = v[r * k + j] - f * v[col * k + j];
            }
            for j in 0..k {
                b[r * k + j] = b[r * k + j] - f * b[col * k + j];
            }
        }
    }
    for col in (0..k).rev() {
        let d = v[col * k + col];
        for j in 0..k {
            let mut s = b[col * k + j];
            for r in col + 1..k {
                s = s - v[col * k + r] * b[r * k + j];
            }
            b[col * k + j] = s / d;
        }
    }
}

/// How far the finite window of [`project_windowed_biinfinite`] extends past
/// `supp f` and the evaluation point, in cells.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WindowPolicy {
    /// Lower bound on the radius; `None` means `10 k`.
    pub min_radius: Option<usize>,
    /// Target tail size `eps` for the decay-based radius `3 log(eps) / log(gamma)`.
    pub epsilon: f64,
    /// Decay rate estimate; `None` disables the decay-based radius.
    pub gamma_hat: Option<f64>,
}

impl Default for WindowPolicy {
    fn default() -> Self {
        Self {
            min_radius: None,
            epsilon: 1e-12,
            gamma_hat: None,
        }
    }
}

impl WindowPolicy {
    pub fn fixed(radius: usize) -> Self {
        Self {
            min_radius: Some(radius),
            ..Self::default()
        }
    }

    pub fn radius(&self, k: usize) -> usize {
        let base = self.min_radius.unwrap_or(10 * k);
        match self.gamma_hat {
            Some(g) if g > 0.0 && g < 1.0 => {
                base.max((3.0 * self.epsilon.ln() / g.ln()).ceil() as usize)
            }
            _ => base,
        }
    }
}

/// Projection onto a clamped window of a long knot sequence standing in for a biinfinite one.
#[derive(Debug, Clone)]
pub struct WindowedProjection<T> {
    pub spline: Spline<T, BSplineBasis<T>>,
    /// Indices `(l, r + 1)` of the window end points in the input sequence.
    pub window: (usize, usize),
    pub radius: usize,
    /// `(d(i(x), i(supp f)), |P f(x)|)` over cell midpoints of the window.
    pub decay_samples: Vec<(usize, f64)>,
    /// Log-linear fit of the upper envelope of `decay_samples` at positive distance.
    pub decay_fit: Option<LineFit>,
    /// `max |P_R f - P_{R+k} f|` over the central cells.
    pub enlargement_change: f64,
    /// `max_i |<P f - f, N_i>|` over basis functions not touching the window ends.
    pub orthogonality_residual: f64,
    /// Sampled `||f||_inf`.
    pub f_sup: f64,
}

/// Checks `s_i <= s_{i+1}` and `s_i < s_{i+k}` for an unclamped sequence.
fn check_open_sequence<T: Real>(s: &[T], k: usize) -> Result<()> {
    if let Some(index) = s.windows(2).position(|w| !(w[0] <= w[1])) {
        return Err(Error::NotSorted { index });
    }
    if let Some(i) = (0..s.len().saturating_sub(k)).find(|&i| s[i] >= s[i + k]) {
        return Err(Error::MultiplicityViolation { index: i as isize });
    }
    Ok(())
}

struct WindowRun<T> {
    projection: Projection<T, BSplineBasis<T>>,
    window: (usize, usize),
}

fn project_on_window<T, F>(
    s: &[T],
    k: usize,
    f: &F,
    core: (usize, usize),
    radius: usize,
    opts: &MomentOptions<T>,
) -> Result<WindowRun<T>>
where
    T: Real,
    F: Fn(T) -> T + ?Sized,
{
    let (lo, hi) = core;
    if lo < radius || hi + radius >= s.len() {
        return Err(Error::WindowTooSmall(format!(
            "radius {radius} around cells {lo}..{hi} leaves the {} knots supplied",
            s.len()
        )));
    }
    let (l, r1) = (lo - radius, hi + radius);
    let kv = KnotVector::from_breakpoints(&s[l..=r1], k)?;
    let offset = l as isize + kv.offset();
    let kv = KnotVector::with_offset(kv.knots().to_vec(), k, offset)?;
    let projection = Projector::new(BSplineBasis::new(kv))?.project(f, opts)?;
    Ok(WindowRun {
        projection,
        window: (l, r1),
    })
}

/// Projects a compactly supported `f` onto the splines of a finite window `[s_l, s_{r+1}]` of
/// the long sequence `s`, the window extending `radius` cells beyond `supp f` and `x0`.
///
/// Also reports the geometric decay of `|P f|` away from `supp f` and the change of `P f` on
/// the central cells when the window grows by `k` cells on each side.
pub fn project_windowed_biinfinite<T, F>(
    s: &[T],
    k: usize,
    f: &F,
    support: (T, T),
    x0: T,
    policy: &WindowPolicy,
    opts: &MomentOptions<T>,
) -> Result<WindowedProjection<T>>
where
    T: Real,
    F: Fn(T) -> T + ?Sized,
{
    if k == 0 {
        return Err(Error::InvalidOrder(0));
    }
    check_open_sequence(s, k)?;
    let (a, b) = support;
    let lo_pt = a.min(x0);
    let hi_pt = b.max(x0);
    if s.len() < 2 || !(lo_pt > s[0] && hi_pt < s[s.len() - 1]) {
        return Err(Error::WindowTooSmall(
            "support and evaluation point must lie strictly inside the knot span".into(),
        ));
    }
    let lo = s.partition_point(|&t| t <= lo_pt) - 1;
    let hi = s.partition_point(|&t| t < hi_pt);
    let radius = policy.radius(k);

    let mut opts = opts.clone();
    opts.breakpoints.extend([a, b]);
    let run = project_on_window(s, k, f, (lo, hi), radius, &opts)?;
    let bigger = project_on_window(s, k, f, (lo, hi), radius + k, &opts)?;
    let spline = run.projection.spline;
    let basis = spline.space().clone();

    let mut buf = vec![T::zero(); k];
    let supp_set = basis.index_set(a, b);
    let mut decay_samples = Vec::new();
    let mut enlargement_change = 0.0f64;
    for c in 0..basis.cell_count() {
        let (ca, cb) = basis.cell(c);
        if !(cb > ca) {
            continue;
        }
        let mid = (ca + cb) * T::lit(0.5);
        let v = spline.eval_cell(c, mid, &mut buf).as_f64().abs();
        let d = crate::basis::index_distance(
            &basis.index_set_point(mid),
            &supp_set,
            crate::basis::IndexMetric::Linear,
        )?;
        decay_samples.push((d, v));
        if ca >= s[lo] && cb <= s[hi] {
            for q in 0..8 {
                let x = ca + (cb - ca) * T::lit((q as f64 + 0.5) / 8.0);
                let p1 = spline.eval_cell(c, x, &mut buf);
                let p2 = bigger.projection.spline.eval(x)?;
                enlargement_change = enlargement_change.max((p1 - p2).as_f64().abs());
            }
        }
    }
    let floor = decay_samples.iter().fold(0.0f64, |m, p| m.max(p.1)) * 1e-13;
    let env: Vec<(f64, f64)> = upper_envelope(decay_samples.iter().copied())
        .into_iter()
        .filter(|&(d, v)| d > 0 && v > floor)
        .map(|(d, v)| (d as f64, v.ln()))
        .collect();
    let decay_fit = fit_line(&env);

    let g = assemble_gram(&basis);
    let gc = g.matvec(spline.coeffs());
    let interior = (k - 1)..basis.dim().saturating_sub(k - 1);
    let orthogonality_residual = interior
        .map(|i| (gc[i] - run.projection.moments[i]).as_f64().abs())
        .fold(0.0f64, f64::max);

    let mut f_sup = 0.0f64;
    let samples = 256;
    for q in 0..=samples {
        let x = a + (b - a) * T::lit(q as f64 / samples as f64);
        f_sup = f_sup.max(f(x).as_f64().abs());
    }

    Ok(WindowedProjection {
        spline,
        window: run.window,
        radius,
        decay_samples,
        decay_fit,
        enlargement_change,
        orthogonality_residual,
        f_sup,
    })
}
