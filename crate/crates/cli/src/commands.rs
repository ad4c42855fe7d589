use std::path::Path;
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Map, Value};

use igcx_core::complexity::{
    avg_volume, compression_ratio, fit_power_law, last_decade, tau_grid, trapezoid_avg_volume,
    volume_at, ASYMPTOTIC_ONSET,
};
use igcx_core::geodesics::{
    closed_form_geodesic, closed_form_state, integrate_geodesic, GeodesicState,
};
use igcx_core::geometry::{curvature as curvature_at, Metric, MonomialMetric};
use igcx_core::models::{
    fisher_metric_analytic_4d, fisher_metric_diagonal, fisher_metric_quadrature,
    fisher_metric_reduced,
};
use igcx_core::validation::{run_all, Fault, ValidationOptions, ValidationReport};
use igcx_core::{
    BivariateGaussian, CorrelationCoefficient, DerivativeMode, DiagonalGaussianProduct,
    GeodesicConfig, IgcConfig, IgcCurve, MetricField, ModelParams3, ModelParams4, SymMatrix,
    Tolerances,
};

use crate::output::{csv, emit, json, num, RunManifest, Table, TOOL_VERSION};
use crate::{
    CurvatureArgs, Failure, FaultArg, Format, GeodesicArgs, IgcArgs, Method, MetricArgs, Mode,
    Model, Outcome, PointArgs, RatioArgs, ReportFormat, ValidateArgs,
};

type CmdResult = Result<Outcome, Failure>;

/// Largest quadrature-vs-analytic deviation accepted by `metric`.
const QUADRATURE_DEVIATION_LIMIT: f64 = 1e-5;
/// Largest ODE-vs-closed-form error accepted by `geodesic --method both`.
const GEODESIC_DEVIATION_LIMIT: f64 = 1e-5;
/// Relative deviation accepted between the closed-form and trapezoid
/// averaged volume.
const TRAPEZOID_DEVIATION_LIMIT: f64 = 1e-6;
/// Trapezoid panels of the averaged-volume cross-check.
const TRAPEZOID_PANELS: usize = 10_000;
/// Rows with `σ₀√𝒜 τ` above this are not cross-checked: the trapezoid
/// rule on a fixed panel count is no longer accurate enough there.
const TRAPEZOID_MAX_DECAY: f64 = 20.0;

fn write<P: Serialize>(
    command: &str,
    params: &P,
    seed: Option<u64>,
    out: Option<&Path>,
    body: &str,
) -> Result<(), Failure> {
    emit(out, body, &RunManifest::new(command, params, seed))?;
    Ok(())
}

fn rows(m: &SymMatrix) -> Vec<Vec<f64>> {
    m.rows().into_iter().map(|r| r.into_iter().map(|v| v + 0.0).collect()).collect()
}

/// A metric and the point it is evaluated at, as selected by the flags.
struct Selected {
    metric: MonomialMetric,
    point: Vec<f64>,
    coordinates: Vec<String>,
    exact: Option<SymMatrix>,
}

fn select(model: Model, p: &PointArgs) -> Result<Selected, Failure> {
    let names = |v: &[&str]| v.iter().map(|s| s.to_string()).collect();
    Ok(match model {
        Model::Reduced3d => {
            let r = CorrelationCoefficient::new(p.r)?;
            let params = ModelParams3::new(p.mu_x, p.mu_y, p.sigma, r)?;
            Selected {
                metric: MonomialMetric::reduced(r),
                point: params.coords().to_vec(),
                coordinates: names(&["mu_x", "mu_y", "sigma"]),
                exact: Some(fisher_metric_reduced(&params)),
            }
        }
        Model::Full4d => {
            let r = CorrelationCoefficient::new(p.r)?;
            let params = ModelParams4::new(p.mu_x, p.sigma_x, p.mu_y, p.sigma_y, r)?;
            Selected {
                metric: MonomialMetric::full(r),
                point: params.coords().to_vec(),
                coordinates: names(&["mu_x", "sigma_x", "mu_y", "sigma_y"]),
                exact: Some(fisher_metric_analytic_4d(&params)),
            }
        }
        Model::Diagonal => {
            let model = DiagonalGaussianProduct::new(p.means.clone(), p.sigmas.clone())?;
            let point = model
                .means()
                .iter()
                .zip(model.sigmas())
                .flat_map(|(m, s)| [*m, *s])
                .collect();
            let coordinates = (1..=model.n())
                .flat_map(|i| [format!("mu_{i}"), format!("sigma_{i}")])
                .collect();
            Selected {
                metric: MonomialMetric::diagonal(model.n()),
                point,
                coordinates,
                exact: Some(fisher_metric_diagonal(&model)),
            }
        }
        Model::FlatTest => Selected {
            metric: MonomialMetric::constant(&SymMatrix::identity(3)),
            point: vec![p.mu_x, p.mu_y, p.sigma],
            coordinates: names(&["x", "y", "z"]),
            exact: None,
        },
    })
}

pub fn metric(args: &MetricArgs) -> CmdResult {
    let sel = select(args.model, &args.point)?;
    let g = match sel.exact {
        Some(g) => g,
        None => sel.metric.metric(&sel.point)?,
    };
    let inverse = g.invert_spd()?;
    let determinant = g.determinant();

    let mut quad = None;
    if args.check_quadrature {
        if args.model != Model::Full4d {
            return Err(Failure::Invalid(
                "--check-quadrature is only available for --model full4d".into(),
            ));
        }
        let p = &args.point;
        let params = ModelParams4::new(
            p.mu_x,
            p.sigma_x,
            p.mu_y,
            p.sigma_y,
            CorrelationCoefficient::new(p.r)?,
        )?;
        let tol = Tolerances::default();
        let estimate = fisher_metric_quadrature(&BivariateGaussian::new(params), &tol)?;
        let deviation = estimate.max_abs_diff(&g);
        quad = Some((estimate, deviation, tol.quad_order));
    }

    let body = match args.output.format.unwrap_or(Format::Json) {
        Format::Json => {
            let mut doc = json!({
                "model": args.model,
                "coordinates": sel.coordinates,
                "point": sel.point,
                "metric": rows(&g),
                "inverse": rows(&inverse),
                "determinant": determinant,
            });
            if let Some((est, dev, order)) = &quad {
                doc["quadrature"] = json!({
                    "metric": rows(est),
                    "order": order,
                    "max_abs_deviation": dev,
                });
            }
            json(&doc)
        }
        Format::Csv => {
            let mut t = Table::new(&["quantity", "i", "j", "value"]);
            let mut block = |label: &str, m: &SymMatrix| {
                for i in 0..m.dim() {
                    for j in 0..m.dim() {
                        t.row(label, &[Some(i), Some(j)], m.get(i, j));
                    }
                }
            };
            block("metric", &g);
            block("inverse", &inverse);
            if let Some((est, _, _)) = &quad {
                block("quadrature", est);
            }
            t.row("determinant", &[None, None], determinant);
            if let Some((_, dev, _)) = &quad {
                t.row("max_abs_deviation", &[None, None], *dev);
            }
            t.finish()
        }
    };
    write("metric", args, None, args.output.out.as_deref(), &body)?;

    match quad {
        Some((_, dev, _)) if !(dev <= QUADRATURE_DEVIATION_LIMIT) => Ok(Outcome::Deviation(format!(
            "quadrature metric deviates from the closed form by {dev:e} (limit {QUADRATURE_DEVIATION_LIMIT:e})"
        ))),
        _ => Ok(Outcome::Success),
    }
}

pub fn curvature(args: &CurvatureArgs) -> CmdResult {
    let sel = select(args.model, &args.point)?;
    let mode = match args.mode {
        Mode::Analytic => DerivativeMode::Analytic,
        Mode::Fd => DerivativeMode::FiniteDifference,
    };
    let field = MetricField::new(sel.metric, mode);
    let report = curvature_at(&field, &sel.point, &Tolerances::default())?;
    // components that vanish exactly still pick up round-off
    let threshold = report.christoffel.max_abs()
        * match args.mode {
            Mode::Analytic => 1e-14,
            Mode::Fd => 1e-8,
        };
    let gamma = report.christoffel.nonzeros(threshold);

    let body = match args.output.format.unwrap_or(Format::Json) {
        Format::Json => {
            let gamma: Vec<Value> = gamma
                .iter()
                .map(|&(k, i, j, v)| json!({"k": k, "i": i, "j": j, "value": v}))
                .collect();
            json(&json!({
                "model": args.model,
                "mode": args.mode,
                "coordinates": sel.coordinates,
                "point": sel.point,
                "christoffel": gamma,
                "ricci": rows(&report.ricci),
                "scalar": report.scalar,
            }))
        }
        Format::Csv => {
            let mut t = Table::new(&["quantity", "k", "i", "j", "value"]);
            for &(k, i, j, v) in &gamma {
                t.row("christoffel", &[Some(k), Some(i), Some(j)], v);
            }
            let n = report.ricci.dim();
            for i in 0..n {
                for j in 0..n {
                    t.row("ricci", &[None, Some(i), Some(j)], report.ricci.get(i, j));
                }
            }
            t.row("scalar", &[None, None, None], report.scalar);
            t.finish()
        }
    };
    write("curvature", args, None, args.output.out.as_deref(), &body)?;
    Ok(Outcome::Success)
}

const STATE_COLUMNS: [&str; 7] = ["tau", "mu_x", "mu_y", "sigma", "dmu_x", "dmu_y", "dsigma"];
const ERROR_COLUMNS: [&str; 4] = ["abs_err_mu_x", "abs_err_mu_y", "abs_err_sigma", "conserved_drift"];

fn state_row(tau: f64, s: &GeodesicState) -> Vec<f64> {
    vec![tau, s.mu_x, s.mu_y, s.sigma, s.dmu_x, s.dmu_y, s.dsigma]
}

/// Relative deviation of `μ̇/σ²` from its initial value (absolute where the
/// initial value is zero); NaN where it is not representable.
fn row_drift(s: &GeodesicState, q0: Option<(f64, f64)>) -> f64 {
    let (Some((a, b)), Some((a0, b0))) = (s.conserved(), q0) else {
        return f64::NAN;
    };
    let rel = |q: f64, q0: f64| if q0 == 0.0 { q.abs() } else { ((q - q0) / q0).abs() };
    rel(a, a0).max(rel(b, b0))
}

fn columns_json(header: &[&str], table: &[Vec<f64>]) -> Map<String, Value> {
    header
        .iter()
        .enumerate()
        .map(|(c, name)| (name.to_string(), json!(table.iter().map(|r| r[c]).collect::<Vec<_>>())))
        .collect()
}

pub fn geodesic(args: &GeodesicArgs) -> CmdResult {
    if args.steps == 0 {
        return Err(Failure::Invalid("--steps must be at least 1".into()));
    }
    let cfg = GeodesicConfig::new(
        CorrelationCoefficient::new(args.r)?,
        args.sigma0,
        args.a1,
        args.a2,
        args.tau_max,
        args.steps + 1,
    )?;
    let taus = cfg.taus();
    let closed = match args.method {
        Method::Closed | Method::Both => Some(closed_form_geodesic(&cfg)?),
        Method::Ode => None,
    };
    let numeric = match args.method {
        Method::Ode | Method::Both => Some(integrate_geodesic(&cfg, closed_form_state(&cfg, 0.0)?, &Tolerances::default())?),
        Method::Closed => None,
    };

    let mut header: Vec<&str> = STATE_COLUMNS.to_vec();
    let mut summary = Map::new();
    let table: Vec<Vec<f64>> = match (&closed, &numeric) {
        (Some(c), None) => taus.par_iter().zip(&c.states).map(|(t, s)| state_row(*t, s)).collect(),
        (None, Some(n)) => taus.par_iter().zip(&n.states).map(|(t, s)| state_row(*t, s)).collect(),
        (Some(c), Some(n)) => {
            header.extend(ERROR_COLUMNS);
            let q0 = n.states[0].conserved();
            let err = n.max_abs_error(c);
            summary.insert("max_abs_error".into(), json!(err));
            summary.insert("conserved_drift".into(), json!(n.conserved_drift));
            taus.par_iter()
                .zip(&n.states)
                .zip(&c.states)
                .map(|((t, ns), cs)| {
                    let mut row = state_row(*t, ns);
                    row.extend([
                        (ns.mu_x - cs.mu_x).abs(),
                        (ns.mu_y - cs.mu_y).abs(),
                        (ns.sigma - cs.sigma).abs(),
                        row_drift(ns, q0),
                    ]);
                    row
                })
                .collect()
        }
        (None, None) => unreachable!(),
    };

    let body = match args.output.format.unwrap_or(Format::Csv) {
        Format::Csv => csv(&header, table.iter().map(|r| r.as_slice())),
        Format::Json => {
            let mut doc = Map::new();
            doc.insert("method".into(), json!(args.method));
            doc.extend(summary.clone());
            doc.insert("columns".into(), Value::Object(columns_json(&header, &table)));
            json(&doc)
        }
    };
    write("geodesic", args, None, args.output.out.as_deref(), &body)?;

    if let (Some(c), Some(n)) = (&closed, &numeric) {
        let worst = n.max_abs_error(c).into_iter().fold(0.0, f64::max);
        if !(worst <= GEODESIC_DEVIATION_LIMIT) {
            return Ok(Outcome::Deviation(format!(
                "ODE solution deviates from the closed form by {worst:e} (limit {GEODESIC_DEVIATION_LIMIT:e})"
            )));
        }
    }
    Ok(Outcome::Success)
}

fn check_grid(lo: f64, hi: f64, points: usize, what: &str) -> Result<(), Failure> {
    if points < 2 {
        return Err(Failure::Invalid(format!("--points must be at least 2 for {what}")));
    }
    if !(lo.is_finite() && hi.is_finite() && lo < hi) {
        return Err(Failure::Invalid(format!("{what} range must satisfy min < max, got [{lo}, {hi}]")));
    }
    Ok(())
}

pub fn igc(args: &IgcArgs) -> CmdResult {
    check_grid(args.tau_min, args.tau_max, args.points, "tau")?;
    if !(args.tau_min > 0.0) {
        return Err(Failure::Invalid(format!("--tau-min must be positive, got {}", args.tau_min)));
    }
    let grid = tau_grid(args.tau_min, args.tau_max, args.points, args.log_grid);
    let cfg = IgcConfig::new(args.r, args.sigma0, args.a, grid)?;
    let k = cfg.decay_rate();

    let cols: Vec<(f64, f64, f64)> = cfg
        .tau_grid
        .par_iter()
        .map(|&t| {
            let avg = avg_volume(&cfg, t);
            let trap = if k * t <= TRAPEZOID_MAX_DECAY {
                let tr = trapezoid_avg_volume(&cfg, t, TRAPEZOID_PANELS);
                ((tr - avg) / avg).abs()
            } else {
                f64::NAN
            };
            (volume_at(&cfg, t), avg, trap)
        })
        .collect();
    let curve = IgcCurve {
        taus: cfg.tau_grid.clone(),
        vol: cols.iter().map(|c| c.0).collect(),
        avg_vol: cols.iter().map(|c| c.1).collect(),
        ige: cols.iter().map(|c| c.1.ln()).collect(),
        fitted_exponent: f64::NAN,
        asymptotic_window: false,
    };
    let window = last_decade(&curve.taus);
    let fitted = fit_power_law(&curve, window)?;
    let asymptotic = k * window.0 >= ASYMPTOTIC_ONSET;
    if !asymptotic {
        eprintln!(
            "warning: fit window starts at sigma0*sqrt(A)*tau = {:.3} < {ASYMPTOTIC_ONSET}; the exponent is not yet in the 1/tau regime",
            k * window.0
        );
    }
    let checked: Vec<f64> = cols.iter().map(|c| c.2).filter(|d| !d.is_nan()).collect();
    let trap_dev = checked.iter().copied().fold(0.0, f64::max);
    let footer = json!({
        "fitted_exponent": fitted,
        "fit_window": [window.0, window.1],
        "asymptotic_window": asymptotic,
        "asymptotic_constant": cfg.asymptotic_constant(),
        "decay_rate": k,
        "trapezoid_rows": checked.len(),
        "trapezoid_max_rel_dev": trap_dev,
    });

    let header = ["tau", "vol", "avg_vol", "ige"];
    let table: Vec<Vec<f64>> = (0..curve.taus.len())
        .map(|i| vec![curve.taus[i], curve.vol[i], curve.avg_vol[i], curve.ige[i]])
        .collect();
    let out = args.output.out.as_deref();
    let body = match args.output.format.unwrap_or(Format::Csv) {
        Format::Csv => {
            let mut s = csv(&header, table.iter().map(|r| r.as_slice()));
            s.push_str(&format!("# {}\n", serde_json::to_string(&footer).expect("json")));
            s
        }
        Format::Json => {
            let mut doc = footer.as_object().cloned().unwrap_or_default();
            doc.insert("columns".into(), Value::Object(columns_json(&header, &table)));
            json(&doc)
        }
    };
    write("igc", args, None, out, &body)?;
    if out.is_some() {
        println!("{}", serde_json::to_string(&footer).expect("json"));
    }

    if !(trap_dev <= TRAPEZOID_DEVIATION_LIMIT) {
        return Ok(Outcome::Deviation(format!(
            "averaged volume deviates from its trapezoid estimate by {trap_dev:e} relative (limit {TRAPEZOID_DEVIATION_LIMIT:e})"
        )));
    }
    Ok(Outcome::Success)
}

pub fn ratio(args: &RatioArgs) -> CmdResult {
    check_grid(args.r_min, args.r_max, args.points, "r")?;
    let lo = CorrelationCoefficient::new_positive(args.r_min)?;
    CorrelationCoefficient::new_positive(args.r_max)?;
    let n = args.points;
    let step = (args.r_max - args.r_min) / (n - 1) as f64;
    let table: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|i| {
            let r = if i == n - 1 { args.r_max } else { args.r_min + i as f64 * step };
            // r stays inside [r_min, r_max] ⊂ (0, 1)
            vec![r, compression_ratio(CorrelationCoefficient::new(r).unwrap())]
        })
        .collect();
    let monotone = table.windows(2).all(|w| w[1][1] <= w[0][1]);
    let f_min = compression_ratio(lo);
    let footer = json!({
        "f_at_r_min": f_min,
        "f_at_r_max": table[n - 1][1],
        "monotone_nonincreasing": monotone,
    });

    let header = ["r", "F"];
    let out = args.output.out.as_deref();
    let body = match args.output.format.unwrap_or(Format::Csv) {
        Format::Csv => {
            let mut s = csv(&header, table.iter().map(|r| r.as_slice()));
            s.push_str(&format!("# {}\n", serde_json::to_string(&footer).expect("json")));
            s
        }
        Format::Json => {
            let mut doc = footer.as_object().cloned().unwrap_or_default();
            doc.insert("columns".into(), Value::Object(columns_json(&header, &table)));
            json(&doc)
        }
    };
    write("ratio", args, None, out, &body)?;
    if out.is_some() {
        println!("{}", serde_json::to_string(&footer).expect("json"));
    }

    if !monotone || !(f_min <= 1.0) {
        return Ok(Outcome::Deviation(format!(
            "ratio column violates F(r_min) <= 1 or monotonicity (F(r_min) = {f_min}, monotone = {monotone})"
        )));
    }
    Ok(Outcome::Success)
}

fn report_text(report: &ValidationReport, total: f64) -> String {
    let t = &report.tolerances;
    let mut s = format!("igcx {TOOL_VERSION} validation\n");
    s.push_str(&format!(
        "tolerances: fd_step_scale={} ode_tol={} quad_order={} matrix_eps={}\n",
        num(t.fd_step_scale),
        num(t.ode_tol),
        t.quad_order,
        num(t.matrix_eps)
    ));
    s.push_str(&format!("seed: {}\n", report.seed));
    if let Some(f) = report.fault {
        s.push_str(&format!("injected fault: {f:?}\n"));
    }
    s.push_str(&format!("{:>2}  {:<6} {:>8}  {}\n", "id", "result", "seconds", "criterion"));
    for r in &report.results {
        s.push_str(&format!(
            "{:>2}  {:<6} {:>8.3}  {}: {}\n",
            r.id,
            if r.passed { "PASS" } else { "FAIL" },
            r.seconds,
            r.name,
            r.detail
        ));
    }
    let failed = report.results.iter().filter(|r| !r.passed).count();
    s.push_str(&format!(
        "{} of {} criteria passed in {total:.3} s\n",
        report.results.len() - failed,
        report.results.len()
    ));
    s
}

pub fn validate(args: &ValidateArgs) -> CmdResult {
    let opts = ValidationOptions {
        tol: Tolerances::default(),
        seed: args.seed,
        fault: args.inject_fault.map(|f| match f {
            FaultArg::FlipRicciSign => Fault::FlipRicciSign,
        }),
    };
    let start = Instant::now();
    let report = run_all(&opts);
    let total = start.elapsed().as_secs_f64();
    let body = match args.format {
        ReportFormat::Text => report_text(&report, total),
        ReportFormat::Json => json(&json!({
            "tool_version": TOOL_VERSION,
            "seed": report.seed,
            "tolerances": report.tolerances,
            "fault": report.fault,
            "results": report.results,
            "passed": report.passed(),
        })),
    };
    write("validate", args, Some(args.seed), args.out.as_deref(), &body)?;
    Ok(if report.passed() {
        Outcome::Success
    } else {
        Outcome::ValidationFailed
    })
}
