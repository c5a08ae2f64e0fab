//! Pointwise decay bounds for sums over the dual basis, and the interval/torus comparison
//! used to transfer them to periodic projectors.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::basis::{index_distance, BSplineBasis, IndexMetric, PeriodicBSplineBasis, SplineSpace};
use crate::error::{Error, Result};
use crate::fit::{fit_line, upper_envelope, LineFit};
use crate::gram::{MomentOptions, QuadratureRule};
use crate::projector::{DualBasis, Projector, Spline};

use super::decay::DecayFit;
use super::rng::stream;

/// Exponent of an `L^p` norm.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PNorm {
    One,
    Two,
    Inf,
}

impl PNorm {
    pub const ALL: [PNorm; 3] = [PNorm::One, PNorm::Two, PNorm::Inf];

    /// `1 / p`.
    pub fn inv(self) -> f64 {
        match self {
            PNorm::One => 1.0,
            PNorm::Two => 0.5,
            PNorm::Inf => 0.0,
        }
    }

    /// `1 / p'` with `1/p + 1/p' = 1`.
    pub fn inv_conjugate(self) -> f64 {
        1.0 - self.inv()
    }
}

impl std::fmt::Display for PNorm {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            PNorm::One => "1",
            PNorm::Two => "2",
            PNorm::Inf => "inf",
        })
    }
}

/// `||h||_p` over the non-empty cells of `space`; the sup norm is sampled at quadrature nodes
/// and cell ends.
pub fn lp_norm<S, F>(space: &S, h: &F, p: PNorm, opts: &MomentOptions<f64>) -> f64
where
    S: SplineSpace<f64>,
    F: Fn(f64) -> f64 + ?Sized,
{
    let rule = QuadratureRule::<f64>::gauss_legendre(opts.nodes.unwrap_or(space.order() + 3));
    let sub = opts.cells_per_interval.max(1);
    let mut acc = 0.0f64;
    for c in 0..space.cell_count() {
        let (a, b) = space.cell(c);
        if !(b > a) {
            continue;
        }
        let step = (b - a) / sub as f64;
        for s in 0..sub {
            let lo = a + step * s as f64;
            let hi = if s + 1 == sub { b } else { lo + step };
            match p {
                PNorm::Inf => {
                    acc = acc.max(h(lo).abs()).max(h(hi).abs());
                    for (x, _) in rule.on(lo, hi) {
                        acc = acc.max(h(x).abs());
                    }
                }
                PNorm::One => acc += rule.integrate(lo, hi, |x| h(x).abs()),
                PNorm::Two => acc += rule.integrate(lo, hi, |x| h(x).powi(2)),
            }
        }
    }
    match p {
        PNorm::Two => acc.sqrt(),
        _ => acc,
    }
}

/// One sample point of [`check_dual_expansion_bound`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DualExpansionSample {
    pub x: f64,
    pub value: f64,
    pub distance: usize,
    /// The three right-hand sides: hull weight, larger support, cell length.
    pub rhs: [f64; 3],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DualExpansionReport {
    pub p: PNorm,
    pub h_norm: f64,
    pub gamma_hat: f64,
    /// `max_x |f(x)| / rhs_q(x)` for each of the three chains.
    pub max_ratio: [f64; 3],
    /// Every sample satisfies `rhs_0 <= rhs_1 <= rhs_2` (up to rounding).
    pub chain_ordered: bool,
    pub samples: Vec<DualExpansionSample>,
}

/// Evaluates `f = sum_{j in J} <h, N_j> N_j^*` at `sample_xs` and compares `|f(x)|` with
/// `gamma^{d(i(x), J)} ||h||_p` times each of the weights
///
/// * `max_{m in i(x), j in J} kappa_j^{1/p'} / h_jm`,
/// * `max_{m in i(x), j in J} max(kappa_m, kappa_j)^{-1/p}`,
/// * `|I(x)|^{-1/p}`,
///
/// with `gamma` taken from `fit`. `J` holds basis positions.
pub fn check_dual_expansion_bound<F>(
    db: &DualBasis<f64, BSplineBasis<f64>>,
    fit: &DecayFit,
    j_set: &[usize],
    h: &F,
    p: PNorm,
    sample_xs: &[f64],
    opts: &MomentOptions<f64>,
) -> Result<DualExpansionReport>
where
    F: Fn(f64) -> f64 + ?Sized,
{
    let basis = db.space();
    if j_set.is_empty() {
        return Err(Error::EmptySet);
    }
    if let Some(&bad) = j_set.iter().find(|&&j| j >= basis.dim()) {
        return Err(Error::IndexOutOfRange {
            index: bad as isize,
            lo: 0,
            hi: basis.dim() as isize - 1,
        });
    }
    let moments = crate::gram::moment_vector(basis, h, opts)?.values;
    let mut b = vec![0.0; basis.dim()];
    for &j in j_set {
        b[j] = moments[j];
    }
    let f = db.expand(&b)?;
    let h_norm = lp_norm(basis, h, p, opts);
    let gamma = fit.gamma_hat;
    let (inv_p, inv_q) = (p.inv(), p.inv_conjugate());

    let mut samples = Vec::with_capacity(sample_xs.len());
    let mut max_ratio = [0.0f64; 3];
    let mut chain_ordered = true;
    for &x in sample_xs {
        let value = f.eval(x)?.abs();
        let ix = basis.index_set_point(x);
        let distance = index_distance(&ix, j_set, IndexMetric::Linear)?;
        let (mut w_hull, mut w_max) = (0.0f64, 0.0f64);
        for &m in &ix {
            for &j in j_set {
                let kj = basis.kappa(j);
                w_hull = w_hull.max(kj.powf(inv_q) / basis.hull_length(m, j));
                w_max = w_max.max(kj.max(basis.kappa(m)).powf(-inv_p));
            }
        }
        let w_cell = basis.interval_length(x)?.powf(-inv_p);
        let scale = gamma.powi(distance as i32) * h_norm;
        let rhs = [scale * w_hull, scale * w_max, scale * w_cell];
        let tol = 1.0 + 1e-12;
        chain_ordered &= rhs[0] <= rhs[1] * tol && rhs[1] <= rhs[2] * tol;
        for q in 0..3 {
            if value > 0.0 {
                max_ratio[q] = max_ratio[q].max(value / rhs[q]);
            }
        }
        samples.push(DualExpansionSample {
            x,
            value,
            distance,
            rhs,
        });
    }
    Ok(DualExpansionReport {
        p,
        h_norm,
        gamma_hat: gamma,
        max_ratio,
        chain_ordered,
        samples,
    })
}

/// A bounded function supported in one knot interval, described on `[0, 1)` and stretched
/// onto the interval.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CellFunction {
    Indicator,
    /// Piecewise constant with `levels.len()` equal pieces.
    Steps { levels: Vec<f64> },
}

impl CellFunction {
    /// Random levels in `[-1, 1]` drawn from the stream of `(seed, k, n, cell)`.
    pub fn random(seed: u64, k: usize, n: usize, cell: usize, pieces: usize) -> Self {
        let mut rng = stream(seed, k, n, cell);
        let levels = (0..pieces.max(1))
            .map(|_| rng.random_range(-1.0..=1.0))
            .collect();
        CellFunction::Steps { levels }
    }

    /// Value at `u` in `[0, 1)`.
    pub fn profile(&self, u: f64) -> f64 {
        match self {
            CellFunction::Indicator => 1.0,
            CellFunction::Steps { levels } => {
                let m = levels.len();
                levels[((u * m as f64) as usize).min(m - 1)]
            }
        }
    }

    pub fn sup(&self) -> f64 {
        match self {
            CellFunction::Indicator => 1.0,
            CellFunction::Steps { levels } => levels.iter().fold(0.0f64, |m, v| m.max(v.abs())),
        }
    }

    /// Jump points inside `[0, 1)`.
    pub fn jumps(&self) -> Vec<f64> {
        match self {
            CellFunction::Indicator => Vec::new(),
            CellFunction::Steps { levels } => {
                let m = levels.len();
                (1..m).map(|q| q as f64 / m as f64).collect()
            }
        }
    }
}

/// `f_i` on the torus: `profile((y - a) / (b - a))` for the representative `y` of `x` in
/// `[a, a + 1)`, zero when `y > b`.
fn periodic_cell_function(cf: &CellFunction, a: f64, b: f64) -> impl Fn(f64) -> f64 + '_ {
    move |x: f64| {
        let y = a + (x - a).rem_euclid(1.0);
        if y <= b {
            cf.profile(((y - a) / (b - a)).min(1.0))
        } else {
            0.0
        }
    }
}

/// `max |<g, N_j>|` over basis positions in `positions` for `g = s1 - s2` where `s1` is a
/// periodic spline read through the quotient map and `s2` lives on `basis`. Integrated with
/// Gauss rules exact for the products.
fn comparison_moments(
    periodic: &Spline<f64, PeriodicBSplineBasis<f64>>,
    lifted: &Spline<f64, BSplineBasis<f64>>,
) -> Result<Vec<f64>> {
    let basis = lifted.space();
    let k = basis.order();
    let rule = QuadratureRule::<f64>::gauss_legendre(k + 1);
    let mut out = vec![0.0; basis.dim()];
    let mut vals = vec![0.0; k];
    let mut buf = vec![0.0; k];
    for c in 0..basis.cell_count() {
        let (a, b) = basis.cell(c);
        if !(b > a) {
            continue;
        }
        for (x, w) in rule.on(a, b) {
            let g = periodic.eval(x)? - lifted.eval_cell(c, x, &mut buf);
            let first = basis.eval_cell(c, x, &mut vals);
            for (j, &v) in vals.iter().enumerate() {
                out[basis.position(first, j)] += w * g * v;
            }
        }
    }
    Ok(out)
}

/// One sample point of [`check_single_cell_decay`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SingleCellSample {
    pub x: f64,
    pub distance: usize,
    /// `|P~ f_i(x)|`.
    pub value: f64,
    /// `|P T f_i(r(x))|` on the lifted window.
    pub lifted_part: f64,
    /// `|(T P~ - P T) f_i (r(x))|`.
    pub correction: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SingleCellReport {
    pub cell: usize,
    pub function: CellFunction,
    pub f_sup: f64,
    /// Log-linear fit of the upper envelope at positive distance above the noise floor.
    pub fit: Option<LineFit>,
    pub envelope: Vec<(usize, f64)>,
    pub max_distance: usize,
    /// `max |P~ f_i| / ||f_i||_inf` over samples at the largest distance.
    pub relative_at_max_distance: f64,
    /// `max_{0 <= j <= n-k+1} |<g, N_j>| / ||f_i||_inf` on the lifted window.
    pub interior_moment_max: f64,
    /// Same quantity over the boundary indices, where `g` lives.
    pub boundary_moment_max: f64,
    pub quadrature_error: f64,
    pub samples: Vec<SingleCellSample>,
}

/// Envelope values below this fraction of the largest one are excluded from decay fits of
/// sampled projections.
pub const SAMPLE_NOISE_FLOOR: f64 = 1e-13;

/// `sample_per_cell` interior points of every non-empty cell of `space`.
pub fn cell_samples<S: SplineSpace<f64>>(space: &S, per_cell: usize) -> Vec<f64> {
    let mut xs = Vec::new();
    for c in 0..space.cell_count() {
        let (a, b) = space.cell(c);
        if !(b > a) {
            continue;
        }
        for q in 0..per_cell {
            let x = a + (b - a) * (q as f64 + 0.5) / per_cell as f64;
            xs.push(if x >= 1.0 { x - 1.0 } else { x });
        }
    }
    xs
}

/// Decay of `P~ f_i` away from the cell `[s_i, s_{i+1}]`, together with the two pieces of
/// the decomposition `P~ f_i = P T f_i + (T P~ - P T) f_i` on the window `lift_window(i)`.
pub fn check_single_cell_decay(
    pbasis: &PeriodicBSplineBasis<f64>,
    cell: usize,
    function: &CellFunction,
    sample_xs: &[f64],
    opts: &MomentOptions<f64>,
) -> Result<SingleCellReport> {
    let pk = pbasis.knots();
    let n = pk.n();
    let k = pk.order();
    if cell >= n {
        return Err(Error::IndexOutOfRange {
            index: cell as isize,
            lo: 0,
            hi: n as isize - 1,
        });
    }
    let (a, b) = pbasis.cell(cell);
    if !(b > a) {
        return Err(Error::EmptyCell { index: cell });
    }
    let f = periodic_cell_function(function, a, b);
    let f_sup = function.sup();
    let mut opts = opts.clone();
    for u in function.jumps() {
        let y = a + (b - a) * u;
        opts.breakpoints.extend([y - 1.0, y, y + 1.0]);
    }
    opts.breakpoints.extend([a, b, a + 1.0, b + 1.0]);

    let proj = Projector::new(pbasis.clone())?.project(&f, &opts)?;
    let pf = &proj.spline;

    let lifted = BSplineBasis::new(pk.lift_window(cell)?);
    let lproj = Projector::new(lifted.clone())?.project(&f, &opts)?;
    let moments = comparison_moments(pf, &lproj.spline)?;
    let first = lifted.knots().first_index();
    let interior = |j: isize| (0..=(n as isize - k as isize + 1)).contains(&j);
    let (mut interior_max, mut boundary_max) = (0.0f64, 0.0f64);
    for (p, &m) in moments.iter().enumerate() {
        if interior(first + p as isize) {
            interior_max = interior_max.max(m.abs());
        } else {
            boundary_max = boundary_max.max(m.abs());
        }
    }

    let supp = pbasis.index_set(a, b);
    let mut samples = Vec::with_capacity(sample_xs.len());
    for &x in sample_xs {
        let x = PeriodicBSplineBasis::reduce(x);
        let distance = index_distance(&pbasis.index_set_point(x), &supp, pbasis.metric())?;
        let value = pf.eval(x)?;
        let rx = a + (x - a).rem_euclid(1.0);
        let lifted_value = lproj.spline.eval(rx)?;
        samples.push(SingleCellSample {
            x,
            distance,
            value: value.abs(),
            lifted_part: lifted_value.abs(),
            correction: (value - lifted_value).abs(),
        });
    }
    let envelope = upper_envelope(samples.iter().map(|s| (s.distance, s.value)));
    let top = envelope.iter().fold(0.0f64, |m, e| m.max(e.1));
    let pts: Vec<(f64, f64)> = envelope
        .iter()
        .filter(|e| e.0 > 0 && e.1 > SAMPLE_NOISE_FLOOR * top)
        .map(|&(d, v)| (d as f64, v.ln()))
        .collect();
    let max_distance = envelope.last().map_or(0, |e| e.0);
    let relative_at_max_distance = envelope.last().map_or(0.0, |e| e.1) / f_sup;
    Ok(SingleCellReport {
        cell,
        function: function.clone(),
        f_sup,
        fit: fit_line(&pts),
        envelope,
        max_distance,
        relative_at_max_distance,
        interior_moment_max: interior_max / f_sup,
        boundary_moment_max: boundary_max / f_sup,
        quadrature_error: proj.quadrature_error.max(lproj.quadrature_error),
        samples,
    })
}

/// Result of [`check_cut_comparison`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CutReport {
    /// The integer `m`: copies of 0 added by the cut.
    pub multiplicity: usize,
    /// `max_{0 <= j <= n-k-1} |<g, N_j>|` for `g = T P~ f - P T f` on `[0, 1]`.
    pub interior_moment_max: f64,
    pub boundary_moment_max: f64,
    /// Sampled `||f||_inf`.
    pub f_sup: f64,
    /// `(x, |g(x)|)` on cell midpoints of the cut sequence.
    pub correction: Vec<(f64, f64)>,
}

/// Compares the periodic projection of `f` with the projection onto the splines of
/// `lift_cut`, cut open at 0.
pub fn check_cut_comparison<F>(
    pbasis: &PeriodicBSplineBasis<f64>,
    f: &F,
    opts: &MomentOptions<f64>,
) -> Result<CutReport>
where
    F: Fn(f64) -> f64 + Sync + ?Sized,
{
    let pk = pbasis.knots();
    let n = pk.n() as isize;
    let k = pk.order() as isize;
    let pf = Projector::new(pbasis.clone())?.project(f, opts)?.spline;
    let cut = BSplineBasis::new(pk.lift_cut()?);
    let mut copts = opts.clone();
    copts.breakpoints.push(0.0);
    let reduced = |x: f64| f(PeriodicBSplineBasis::reduce(x));
    let lf = Projector::new(cut.clone())?.project(&reduced, &copts)?.spline;
    let moments = comparison_moments(&pf, &lf)?;
    let first = cut.knots().first_index();
    let (mut interior_max, mut boundary_max) = (0.0f64, 0.0f64);
    for (p, &m) in moments.iter().enumerate() {
        let j = first + p as isize;
        if (0..=n - k - 1).contains(&j) {
            interior_max = interior_max.max(m.abs());
        } else {
            boundary_max = boundary_max.max(m.abs());
        }
    }
    let mut correction = Vec::new();
    let mut f_sup = 0.0f64;
    for c in 0..cut.cell_count() {
        let (a, b) = cut.cell(c);
        if !(b > a) {
            continue;
        }
        let x = 0.5 * (a + b);
        correction.push((x, (pf.eval(x)? - lf.eval(x)?).abs()));
        for q in 0..=8 {
            f_sup = f_sup.max(reduced(a + (b - a) * q as f64 / 8.0).abs());
        }
    }
    Ok(CutReport {
        multiplicity: pk.cut_multiplicity(),
        interior_moment_max: interior_max,
        boundary_moment_max: boundary_max,
        f_sup,
        correction,
    })
}
