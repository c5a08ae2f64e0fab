use std::path::PathBuf;

use serde::Serialize;

use crate::analysis::rng::{clamped_knots, periodic_knots};
use crate::analysis::{
    cell_samples, check_single_cell_decay, fit_inverse_decay, run_convergence_experiment,
    sweep_uniform_boundedness, CellFunction, ConvergenceConfig, DecayFit, KnotLaw, SweepConfig,
    TestFunction, Weighting,
};
use crate::basis::{BSplineBasis, IndexMetric, PeriodicBSplineBasis, SplineSpace};
use crate::gram::assemble_gram;
use crate::knots::{parse_knot_file, KnotMode, KnotVector, Knots, PeriodicKnotVector};
use crate::linalg::{DenseMatrix, SpdFactor, SymmetricStorage};
use crate::projector::{DualBasis, Projector};

use super::output::{num, Outputs};
use super::{CellFnArg, Cli, CliError, Command, Common, LawArg, WeightingArg};

const DEFAULT_LEBESGUE_GRID: usize = 8;
const DEFAULT_PROJECT_GRID: usize = 16;
const DEFAULT_SINGLE_CELL_GRID: usize = 4;
const DEFAULT_CONVERGE_GRID: usize = 4096;
const RANDOM_PROFILE_PIECES: usize = 8;

pub fn dispatch(cli: &Cli) -> Result<Vec<PathBuf>, CliError> {
    match &cli.command {
        Command::Gram { common } => {
            let mut out = Outputs::new(&common.out, cli)?;
            match resolve_knots(common)? {
                Knots::Clamped(kv) => gram(&mut out, BSplineBasis::new(kv))?,
                Knots::Periodic(pk) => gram(&mut out, PeriodicBSplineBasis::new(pk))?,
            }
            Ok(out.into_paths())
        }
        Command::Decay { common, weighting } => {
            let mut out = Outputs::new(&common.out, cli)?;
            let w = match weighting {
                WeightingArg::Hull => Weighting::Hull,
                WeightingArg::Maxsupp => Weighting::MaxSupport,
            };
            match resolve_knots(common)? {
                Knots::Clamped(kv) => decay(&mut out, BSplineBasis::new(kv), w)?,
                Knots::Periodic(pk) => decay(&mut out, PeriodicBSplineBasis::new(pk), w)?,
            }
            Ok(out.into_paths())
        }
        Command::Lebesgue { common } => {
            let mut out = Outputs::new(&common.out, cli)?;
            let g = common.grid.unwrap_or(DEFAULT_LEBESGUE_GRID);
            if g < 4 {
                return Err(CliError::Config("--grid must be at least 4".into()));
            }
            match resolve_knots(common)? {
                Knots::Clamped(kv) => lebesgue(&mut out, BSplineBasis::new(kv), g)?,
                Knots::Periodic(pk) => lebesgue(&mut out, PeriodicBSplineBasis::new(pk), g)?,
            }
            Ok(out.into_paths())
        }
        Command::Project { common, function } => {
            let mut out = Outputs::new(&common.out, cli)?;
            let f: TestFunction = function.parse()?;
            let g = positive_grid(common, DEFAULT_PROJECT_GRID)?;
            match resolve_knots(common)? {
                Knots::Clamped(kv) => project(&mut out, BSplineBasis::new(kv), f, g, common)?,
                Knots::Periodic(pk) => {
                    project(&mut out, PeriodicBSplineBasis::new(pk), f, g, common)?
                }
            }
            Ok(out.into_paths())
        }
        Command::SingleCell {
            common,
            cell,
            profile,
        } => {
            let mut out = Outputs::new(&common.out, cli)?;
            single_cell(&mut out, common, *cell, *profile)?;
            Ok(out.into_paths())
        }
        Command::Converge {
            common,
            function,
            ns,
            tracked,
            law,
        } => {
            let mut out = Outputs::new(&common.out, cli)?;
            converge(&mut out, common, function, ns, tracked, *law)?;
            Ok(out.into_paths())
        }
        Command::Ensemble {
            common,
            orders,
            ns,
            trials,
            law,
            with_clamped,
        } => {
            let mut out = Outputs::new(&common.out, cli)?;
            let orders = if orders.is_empty() {
                vec![require_order(common)?]
            } else {
                orders.clone()
            };
            let cfg = SweepConfig {
                orders,
                ns: ns.clone(),
                law: knot_law(*law, common),
                trials: *trials,
                seed: common.seed,
                grid_per_cell: common.grid.unwrap_or(DEFAULT_LEBESGUE_GRID),
                clamped: *with_clamped,
            };
            ensemble(&mut out, &cfg)?;
            Ok(out.into_paths())
        }
    }
}

fn require_order(c: &Common) -> Result<usize, CliError> {
    c.k.ok_or_else(|| CliError::Config("-k <order> is required".into()))
}

fn positive_grid(c: &Common, default: usize) -> Result<usize, CliError> {
    match c.grid.unwrap_or(default) {
        0 => Err(CliError::Config("--grid must be positive".into())),
        g => Ok(g),
    }
}

fn knot_law(law: LawArg, c: &Common) -> KnotLaw {
    match law {
        LawArg::Uniform => KnotLaw::Uniform,
        LawArg::Random => KnotLaw::Random {
            min_ratio: c.min_ratio,
        },
    }
}

fn requested_mode(c: &Common) -> Option<KnotMode> {
    if c.periodic {
        Some(KnotMode::Periodic)
    } else if c.clamped {
        Some(KnotMode::Clamped)
    } else {
        None
    }
}

/// Builds the knot sequence from exactly one of `--knots`, `--uniform`, `--random`.
pub fn resolve_knots(c: &Common) -> Result<Knots<f64>, CliError> {
    let mode = requested_mode(c);
    if let Some(path) = &c.knots {
        let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
            path: path.clone(),
            source,
        })?;
        let knots = parse_knot_file(&text)?;
        if let Some(m) = mode {
            if m != knots.mode() {
                return Err(CliError::Config(format!(
                    "--{m} requested but {} declares {} knots",
                    path.display(),
                    knots.mode()
                )));
            }
        }
        if let Some(k) = c.k {
            if k != knots.order() {
                return Err(CliError::Config(format!(
                    "-k {k} disagrees with order {} in {}",
                    knots.order(),
                    path.display()
                )));
            }
        }
        return Ok(knots);
    }
    let k = require_order(c)?;
    let periodic = mode == Some(KnotMode::Periodic);
    let law = KnotLaw::Random {
        min_ratio: c.min_ratio,
    };
    let knots = match (c.uniform, c.random, periodic) {
        (Some(n), None, true) => Knots::Periodic(PeriodicKnotVector::uniform(n, k)?),
        (Some(n), None, false) => Knots::Clamped(KnotVector::uniform(n, k, 0.0, 1.0)?),
        (None, Some(n), true) => Knots::Periodic(periodic_knots(law, c.seed, k, n, 0)?),
        (None, Some(n), false) => Knots::Clamped(clamped_knots(law, c.seed, k, n, 0)?),
        _ => {
            return Err(CliError::Config(
                "exactly one of --knots, --uniform N, --random N is required".into(),
            ))
        }
    };
    Ok(knots)
}

fn matrix_text(m: &DenseMatrix<f64>) -> String {
    let mut s = String::new();
    for i in 0..m.rows() {
        let row: Vec<String> = m.row(i).iter().map(|&v| num(v)).collect();
        s.push_str(&row.join(" "));
        s.push('\n');
    }
    s
}

fn metric_name(m: IndexMetric) -> &'static str {
    match m {
        IndexMetric::Linear => "linear",
        IndexMetric::Cyclic(_) => "cyclic",
    }
}

#[derive(Serialize)]
struct GramSummary {
    dim: usize,
    order: usize,
    metric: &'static str,
    bandwidth: usize,
    max_diagonal: f64,
    /// `||G A - I||_inf`.
    inverse_residual: f64,
    inverse_asymmetry: f64,
    /// Largest deviation from a circulant matrix (torus only).
    circulant_defect: Option<f64>,
}

fn gram<S: SplineSpace<f64>>(out: &mut Outputs, space: S) -> Result<(), CliError> {
    let g = assemble_gram(&space);
    let dense = g.to_dense();
    let inverse = g.factor()?.inverse()?;
    let mut residual = dense.matmul(&inverse);
    for i in 0..residual.rows() {
        residual.set(i, i, residual.get(i, i) - 1.0);
    }
    let circulant_defect = match space.metric() {
        IndexMetric::Cyclic(n) => {
            let mut worst = 0.0f64;
            for i in 0..n {
                for j in 0..n {
                    let d = dense.get(i, j) - dense.get((i + 1) % n, (j + 1) % n);
                    worst = worst.max(d.abs());
                }
            }
            Some(worst)
        }
        IndexMetric::Linear => None,
    };
    out.text("gram.txt", &matrix_text(&dense))?;
    out.text("gram_inverse.txt", &matrix_text(&inverse))?;
    out.json(
        "gram.json",
        &GramSummary {
            dim: space.dim(),
            order: space.order(),
            metric: metric_name(space.metric()),
            bandwidth: space.order() - 1,
            max_diagonal: g.max_diagonal(),
            inverse_residual: residual.norm_inf(),
            inverse_asymmetry: inverse.asymmetry(),
            circulant_defect,
        },
    )?;
    Ok(())
}

#[derive(Serialize)]
struct DecayChecks {
    gamma_below_one: bool,
    violation_ratio_at_most_one: bool,
}

#[derive(Serialize)]
struct DecaySummary<'a> {
    dim: usize,
    order: usize,
    fit: &'a DecayFit,
    checks: DecayChecks,
}

fn decay<S: SplineSpace<f64>>(out: &mut Outputs, space: S, w: Weighting) -> Result<(), CliError> {
    let db = DualBasis::new(space.clone())?;
    let fit = fit_inverse_decay(&db, w)?;
    let header = ["distance", "envelope", "bound"].map(String::from);
    let rows = fit
        .envelope
        .iter()
        .map(|&(d, v)| vec![d.to_string(), num(v), num(fit.bound(d))]);
    out.csv("decay.csv", &header, rows)?;
    out.json(
        "decay.json",
        &DecaySummary {
            dim: space.dim(),
            order: space.order(),
            fit: &fit,
            checks: DecayChecks {
                gamma_below_one: fit.gamma_hat < 1.0,
                violation_ratio_at_most_one: fit.max_violation_ratio <= 1.0 + 1e-9,
            },
        },
    )?;
    Ok(())
}

#[derive(Serialize)]
struct LebesgueSummary {
    dim: usize,
    order: usize,
    grid_per_cell: usize,
    lebesgue: f64,
    argmax: f64,
}

fn lebesgue<S: SplineSpace<f64>>(out: &mut Outputs, space: S, g: usize) -> Result<(), CliError> {
    let db = DualBasis::new(space.clone())?;
    let values = db.lebesgue_function(g);
    let (argmax, lebesgue) = values
        .iter()
        .fold((f64::NAN, 0.0f64), |best, &(x, v)| if v > best.1 { (x, v) } else { best });
    let header = ["x", "lebesgue_function"].map(String::from);
    out.csv(
        "lebesgue.csv",
        &header,
        values.iter().map(|&(x, v)| vec![num(x), num(v)]),
    )?;
    out.json(
        "lebesgue.json",
        &LebesgueSummary {
            dim: space.dim(),
            order: space.order(),
            grid_per_cell: g,
            lebesgue,
            argmax,
        },
    )?;
    Ok(())
}

#[derive(Serialize)]
struct ProjectSummary {
    function: String,
    dim: usize,
    order: usize,
    quadrature_error: f64,
    /// Largest `|P f - f|` over the finite samples.
    sampled_sup_error: f64,
    coefficients: Vec<f64>,
}

const PLOT_SCRIPT: &str = "set datafile separator ','
set datafile commentschars '#'
set key autotitle columnhead
set xlabel 'x'
plot 'project.csv' using 1:2 with lines title 'P f', \\
     'project.csv' using 1:3 with lines dashtype 2 title 'f'
";

fn project<S: SplineSpace<f64>>(
    out: &mut Outputs,
    space: S,
    f: TestFunction,
    g: usize,
    common: &Common,
) -> Result<(), CliError> {
    let opts = f.moment_options(common.quad_depth.max(1));
    let eval = |x: f64| f.eval(x);
    let proj = Projector::new(space.clone())?.project(&eval, &opts)?;
    let s = &proj.spline;
    let mut buf = vec![0.0; space.order()];
    let mut rows = Vec::new();
    let mut sup = 0.0f64;
    let mut push = |c: usize, x: f64, rows: &mut Vec<Vec<String>>| {
        let p = s.eval_cell(c, x, &mut buf);
        let fx = f.eval(x);
        if fx.is_finite() {
            sup = sup.max((p - fx).abs());
        }
        rows.push(vec![num(x), num(p), num(fx)]);
    };
    let mut last = None;
    for c in 0..space.cell_count() {
        let (a, b) = space.cell(c);
        if !(b > a) {
            continue;
        }
        last = Some((c, b));
        for q in 0..g {
            push(c, a + (b - a) * q as f64 / g as f64, &mut rows);
        }
    }
    if let Some((c, b)) = last {
        push(c, b, &mut rows);
    }
    let header = ["x", "projection", "function"].map(String::from);
    out.csv("project.csv", &header, rows)?;
    out.text("project.gp", PLOT_SCRIPT)?;
    out.json(
        "project.json",
        &ProjectSummary {
            function: f.to_string(),
            dim: space.dim(),
            order: space.order(),
            quadrature_error: proj.quadrature_error,
            sampled_sup_error: sup,
            coefficients: s.coeffs().to_vec(),
        },
    )?;
    Ok(())
}

#[derive(Serialize)]
struct SingleCellSummary {
    n: usize,
    order: usize,
    cell: usize,
    function: CellFunction,
    f_sup: f64,
    slope: Option<f64>,
    intercept: Option<f64>,
    r_squared: Option<f64>,
    max_distance: usize,
    relative_at_max_distance: f64,
    interior_moment_max: f64,
    boundary_moment_max: f64,
    quadrature_error: f64,
    checks: SingleCellChecks,
}

#[derive(Serialize)]
struct SingleCellChecks {
    negative_slope: bool,
    interior_moments_vanish: bool,
}

fn single_cell(out: &mut Outputs, common: &Common, cell: usize, profile: CellFnArg) -> Result<(), CliError> {
    let pk = match resolve_knots(common)? {
        Knots::Periodic(pk) => pk,
        Knots::Clamped(_) => {
            return Err(CliError::Config("lemma2 needs periodic knots (--periodic)".into()))
        }
    };
    let (n, k) = (pk.n(), pk.order());
    let pb = PeriodicBSplineBasis::new(pk);
    let function = match profile {
        CellFnArg::Indicator => CellFunction::Indicator,
        CellFnArg::Random => CellFunction::random(common.seed, k, n, cell, RANDOM_PROFILE_PIECES),
    };
    let g = positive_grid(common, DEFAULT_SINGLE_CELL_GRID)?;
    let xs = cell_samples(&pb, g);
    let opts = crate::gram::MomentOptions::with_cells(common.quad_depth.max(1));
    let rep = check_single_cell_decay(&pb, cell, &function, &xs, &opts)?;
    let header = ["x", "distance", "value", "lifted_part", "correction"].map(String::from);
    out.csv(
        "single_cell.csv",
        &header,
        rep.samples.iter().map(|s| {
            vec![
                num(s.x),
                s.distance.to_string(),
                num(s.value),
                num(s.lifted_part),
                num(s.correction),
            ]
        }),
    )?;
    out.json(
        "single_cell.json",
        &SingleCellSummary {
            n,
            order: k,
            cell,
            function: rep.function.clone(),
            f_sup: rep.f_sup,
            slope: rep.fit.map(|f| f.slope),
            intercept: rep.fit.map(|f| f.intercept),
            r_squared: rep.fit.map(|f| f.r_squared),
            max_distance: rep.max_distance,
            relative_at_max_distance: rep.relative_at_max_distance,
            interior_moment_max: rep.interior_moment_max,
            boundary_moment_max: rep.boundary_moment_max,
            quadrature_error: rep.quadrature_error,
            checks: SingleCellChecks {
                negative_slope: rep.fit.is_some_and(|f| f.slope < 0.0),
                interior_moments_vanish: rep.interior_moment_max <= 1e-8,
            },
        },
    )?;
    Ok(())
}

#[derive(Serialize)]
struct ConvergeSummary<'a> {
    table: &'a crate::analysis::ConvergenceTable,
    empirical_order: Option<f64>,
    checks: ConvergeChecks,
}

#[derive(Serialize)]
struct ConvergeChecks {
    final_sup_below_first: bool,
}

fn converge(
    out: &mut Outputs,
    common: &Common,
    function: &str,
    ns: &[usize],
    tracked: &[f64],
    law: LawArg,
) -> Result<(), CliError> {
    if common.clamped || common.knots.is_some() || common.uniform.is_some() || common.random.is_some() {
        return Err(CliError::Config(
            "converge builds periodic knots from --ns and --law; knot source flags do not apply"
                .into(),
        ));
    }
    let cfg = ConvergenceConfig {
        function: function.parse()?,
        k: require_order(common)?,
        law: knot_law(law, common),
        seed: common.seed,
        ns: ns.to_vec(),
        tracked: tracked.to_vec(),
        grid: positive_grid(common, DEFAULT_CONVERGE_GRID)?,
        cells_per_interval: common.quad_depth.max(1),
    };
    let table = run_convergence_experiment(&cfg)?;
    let mut header: Vec<String> = ["n", "mesh", "sup_error", "l1_error"].map(String::from).into();
    header.extend(tracked.iter().map(|x| format!("error_at_{}", num(*x))));
    header.push("quadrature_error".into());
    out.csv(
        "converge.csv",
        &header,
        table.rows.iter().map(|r| {
            let mut row = vec![r.n.to_string(), num(r.mesh), num(r.sup_error), num(r.l1_error)];
            row.extend(r.tracked_errors.iter().map(|&e| num(e)));
            row.push(num(r.quadrature_error));
            row
        }),
    )?;
    let first = table.rows.first().map_or(0.0, |r| r.sup_error);
    let last = table.rows.last().map_or(0.0, |r| r.sup_error);
    out.json(
        "converge.json",
        &ConvergeSummary {
            table: &table,
            empirical_order: table.order_fit.map(|f| f.slope),
            checks: ConvergeChecks {
                final_sup_below_first: last < first,
            },
        },
    )?;
    Ok(())
}

#[derive(Serialize)]
struct EnsembleSummary<'a> {
    summaries: &'a [crate::analysis::OrderSummary],
    checks: EnsembleChecks,
}

#[derive(Serialize)]
struct EnsembleChecks {
    /// Per-order flatness across n within a factor 1.5.
    flat_in_n: bool,
}

fn ensemble(out: &mut Outputs, cfg: &SweepConfig) -> Result<(), CliError> {
    let table = sweep_uniform_boundedness(cfg)?;
    let header = ["k", "n", "trial", "mesh_ratio", "periodic", "clamped"].map(String::from);
    out.csv(
        "ensemble.csv",
        &header,
        table.rows.iter().map(|r| {
            vec![
                r.k.to_string(),
                r.n.to_string(),
                r.trial.to_string(),
                num(r.mesh_ratio),
                num(r.periodic),
                r.clamped.map(num).unwrap_or_default(),
            ]
        }),
    )?;
    out.json(
        "ensemble.json",
        &EnsembleSummary {
            summaries: &table.summaries,
            checks: EnsembleChecks {
                flat_in_n: table.summaries.iter().all(|s| s.flatness <= 1.5),
            },
        },
    )?;
    Ok(())
}

