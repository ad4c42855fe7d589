//! Built-in oracle suite. Each criterion draws its own seeded random
//! points, compares a computed quantity against an independent reference,
//! and reports the worst deviation next to the threshold it was held to.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use serde::Serialize;

use crate::complexity::{
    avg_volume, compression_ratio, igc_curve, tau_grid, trapezoid_avg_volume, IgcConfig,
};
use crate::error::{Error, Result};
use crate::geodesics::{
    closed_form_geodesic, closed_form_state, integrate_geodesic, ode_residual, GeodesicConfig,
};
use crate::geometry::{
    christoffel, christoffel_reduced_analytic, ricci_reduced_closed_form, ricci_tensor,
    scalar_curvature, DerivativeMode, LogCoordinate, MetricField, MonomialMetric, PullbackMetric,
    REDUCED_SCALAR_CURVATURE,
};
use crate::models::{
    best_linear_msq, correlation_coefficient, fisher_metric_analytic_4d, fisher_metric_quadrature,
    sample_bivariate, BivariateGaussian,
};
use crate::params::{CorrelationCoefficient, ModelParams3, ModelParams4, Tolerances};

pub const DEFAULT_SEED: u64 = 0x1_6c_2024;

/// Deliberate defects used to check that the suite can fail.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Fault {
    /// Negates every Ricci component and scalar curvature produced by the
    /// generic pipeline.
    FlipRicciSign,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ValidationOptions {
    pub tol: Tolerances,
    pub seed: u64,
    pub fault: Option<Fault>,
}

impl Default for ValidationOptions {
    fn default() -> Self {
        Self {
            tol: Tolerances::default(),
            seed: DEFAULT_SEED,
            fault: None,
        }
    }
}

impl ValidationOptions {
    fn curvature_sign(&self) -> f64 {
        match self.fault {
            Some(Fault::FlipRicciSign) => -1.0,
            None => 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CriterionResult {
    pub id: u32,
    pub name: &'static str,
    pub passed: bool,
    /// Worst observed deviation, in the units of `threshold`.
    pub worst: f64,
    pub threshold: f64,
    pub detail: String,
    pub seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationReport {
    pub seed: u64,
    pub tolerances: Tolerances,
    pub fault: Option<Fault>,
    pub results: Vec<CriterionResult>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.results.iter().all(|r| r.passed)
    }
}

/// Identifiers and names of the criteria, in run order.
pub const CRITERIA: [(u32, &str); 11] = [
    (1, "constant negative curvature"),
    (2, "fisher metric quadrature"),
    (3, "christoffel and ricci closed forms"),
    (4, "geodesic ode vs closed form"),
    (5, "closed form ode residual"),
    (6, "igc averaging chain"),
    (7, "power law decay"),
    (8, "compression ratio"),
    (9, "linear estimation statistics"),
    (10, "density normalization"),
    (11, "coordinate invariance"),
];

struct Outcome {
    worst: f64,
    threshold: f64,
    ok: bool,
    detail: String,
}

impl Outcome {
    fn within(worst: f64, threshold: f64, detail: String) -> Self {
        Self {
            worst,
            threshold,
            ok: worst <= threshold,
            detail,
        }
    }
}

fn rng(opts: &ValidationOptions, id: u32) -> ChaCha20Rng {
    ChaCha20Rng::seed_from_u64(opts.seed.wrapping_add(u64::from(id).wrapping_mul(0x9e37_79b9)))
}

fn random_r(rng: &mut ChaCha20Rng, bound: f64) -> CorrelationCoefficient {
    CorrelationCoefficient::new(rng.random_range(-bound..bound)).unwrap()
}

fn random_params3(rng: &mut ChaCha20Rng) -> ModelParams3 {
    let r = random_r(rng, 0.9);
    ModelParams3::new(
        rng.random_range(-5.0..5.0),
        rng.random_range(-5.0..5.0),
        rng.random_range(0.5..5.0),
        r,
    )
    .unwrap()
}

fn random_params4(rng: &mut ChaCha20Rng) -> ModelParams4 {
    let r = random_r(rng, 0.9);
    ModelParams4::new(
        rng.random_range(-3.0..3.0),
        rng.random_range(0.3..3.0),
        rng.random_range(-3.0..3.0),
        rng.random_range(0.3..3.0),
        r,
    )
    .unwrap()
}

fn random_geodesic(rng: &mut ChaCha20Rng, steps: usize) -> GeodesicConfig {
    let r = random_r(rng, 0.9);
    GeodesicConfig::new(
        r,
        rng.random_range(0.5..2.0),
        rng.random_range(-2.0..2.0),
        rng.random_range(-2.0..2.0),
        10.0,
        steps,
    )
    .unwrap()
}

fn reduced_field(r: CorrelationCoefficient, mode: DerivativeMode) -> MetricField<MonomialMetric> {
    MetricField::new(MonomialMetric::reduced(r), mode)
}

fn criterion_1(opts: &ValidationOptions) -> Result<Outcome> {
    let start = Instant::now();
    let mut rng = rng(opts, 1);
    let sign = opts.curvature_sign();
    let (mut worst_an, mut worst_fd) = (0.0f64, 0.0f64);
    for _ in 0..100 {
        let p = random_params3(&mut rng);
        let x = p.coords();
        let an = sign * scalar_curvature(&reduced_field(p.r, DerivativeMode::Analytic), &x, &opts.tol)?;
        let fd = sign
            * scalar_curvature(&reduced_field(p.r, DerivativeMode::FiniteDifference), &x, &opts.tol)?;
        worst_an = worst_an.max((an - REDUCED_SCALAR_CURVATURE).abs());
        worst_fd = worst_fd.max((fd - REDUCED_SCALAR_CURVATURE).abs());
    }
    let secs = start.elapsed().as_secs_f64();
    Ok(Outcome {
        worst: worst_fd,
        threshold: 1e-5,
        ok: worst_an <= 1e-9 && worst_fd <= 1e-5 && secs < 2.0,
        detail: format!(
            "100 points: analytic |R+1.5| <= {worst_an:.2e} (tol 1e-9), fd <= {worst_fd:.2e} (tol 1e-5), {secs:.3} s (limit 2 s)"
        ),
    })
}

fn criterion_2(opts: &ValidationOptions) -> Result<Outcome> {
    let start = Instant::now();
    let mut rng = rng(opts, 2);
    let mut worst = 0.0f64;
    for _ in 0..20 {
        let p = random_params4(&mut rng);
        let quad = fisher_metric_quadrature(&BivariateGaussian::new(p), &opts.tol)?;
        worst = worst.max(quad.max_abs_diff(&fisher_metric_analytic_4d(&p)));
    }
    let secs = start.elapsed().as_secs_f64();
    Ok(Outcome {
        worst,
        threshold: 1e-6,
        ok: worst <= 1e-6 && secs < 5.0,
        detail: format!(
            "20 parameter sets: max |quadrature - analytic| = {worst:.2e} (tol 1e-6), {secs:.3} s (limit 5 s)"
        ),
    })
}

fn criterion_3(opts: &ValidationOptions) -> Result<Outcome> {
    let mut rng = rng(opts, 3);
    let sign = opts.curvature_sign();
    let (mut worst_g, mut worst_r) = (0.0f64, 0.0f64);
    for _ in 0..100 {
        let p = random_params3(&mut rng);
        let x = p.coords();
        let field = reduced_field(p.r, DerivativeMode::FiniteDifference);
        let gamma = christoffel(&field, &x, &opts.tol)?;
        worst_g = worst_g.max(gamma.max_abs_diff(&christoffel_reduced_analytic(&p)));
        let ricci = ricci_tensor(&field, &x, &opts.tol)?.scale(sign);
        worst_r = worst_r.max(ricci.max_abs_diff(&ricci_reduced_closed_form(&p)));
    }
    Ok(Outcome::within(
        worst_g.max(worst_r),
        1e-5,
        format!("100 points: christoffel max dev {worst_g:.2e}, ricci max dev {worst_r:.2e} (tol 1e-5)"),
    ))
}

fn criterion_4(opts: &ValidationOptions) -> Result<Outcome> {
    let mut rng = rng(opts, 4);
    let (mut worst_err, mut worst_drift) = (0.0f64, 0.0f64);
    for _ in 0..20 {
        let cfg = random_geodesic(&mut rng, 1001);
        let exact = closed_form_geodesic(&cfg)?;
        let num = integrate_geodesic(&cfg, closed_form_state(&cfg, 0.0)?, &opts.tol)?;
        let err = num.max_abs_error(&exact);
        worst_err = worst_err.max(err.into_iter().fold(0.0, f64::max));
        worst_drift = worst_drift.max(num.conserved_drift);
    }
    Ok(Outcome {
        worst: worst_err,
        threshold: 1e-6,
        ok: worst_err < 1e-6 && worst_drift < 1e-8,
        detail: format!(
            "20 configs on [0, 10]: max abs error {worst_err:.2e} (tol 1e-6), conserved drift {worst_drift:.2e} (tol 1e-8)"
        ),
    })
}

fn criterion_5(opts: &ValidationOptions) -> Result<Outcome> {
    let mut rng = rng(opts, 5);
    let mut worst = 0.0f64;
    for _ in 0..10 {
        let cfg = random_geodesic(&mut rng, 1000);
        for tau in cfg.taus() {
            let res = ode_residual(&cfg, tau)?;
            worst = worst.max(res.into_iter().fold(0.0, |m, v| m.max(v.abs())));
        }
    }
    Ok(Outcome::within(
        worst,
        1e-10,
        format!("10 configs x 1000 nodes: max |residual| = {worst:.2e} (tol 1e-10)"),
    ))
}

fn criterion_6(_opts: &ValidationOptions) -> Result<Outcome> {
    let (mut worst_trap, mut worst_pd) = (0.0f64, 0.0f64);
    for &(r, sigma0, a) in &[(0.1, 1.0, 1.0), (0.5, 1.0, 1.0), (0.5, 2.0, 0.5), (0.9, 0.7, 1.5)] {
        let cfg = IgcConfig::new(r, sigma0, a, vec![1.0])?;
        let k = cfg.decay_rate();
        for kt in [0.5, 2.0, 10.0, 25.0] {
            let tau = kt / k;
            let trap = trapezoid_avg_volume(&cfg, tau, 20_000);
            let closed = avg_volume(&cfg, tau);
            worst_trap = worst_trap.max(((trap - closed) / closed).abs());
        }
        for kt in [40.0, 100.0, 1e4] {
            let tau = kt / k;
            let pd = cfg.asymptotic_constant() / tau;
            worst_pd = worst_pd.max(((avg_volume(&cfg, tau) - pd) / pd).abs());
        }
    }
    Ok(Outcome {
        worst: worst_trap,
        threshold: 1e-6,
        ok: worst_trap <= 1e-6 && worst_pd <= 1e-12,
        detail: format!(
            "trapezoid vs closed form rel dev {worst_trap:.2e} (tol 1e-6); large-tau vs power law rel dev {worst_pd:.2e} (tol 1e-12)"
        ),
    })
}

fn criterion_7(_opts: &ValidationOptions) -> Result<Outcome> {
    let mut worst = 0.0f64;
    let mut details = Vec::new();
    for &(r, sigma0, a) in &[(0.5, 1.0, 1.0), (0.1, 1.0, 1.0), (0.9, 0.5, 2.0)] {
        let probe = IgcConfig::new(r, sigma0, a, vec![1.0])?;
        // last decade starts at 20 / k
        let tau_max = (200.0 / probe.decay_rate()).max(1e4);
        let cfg = IgcConfig::new(r, sigma0, a, tau_grid(1e-2, tau_max, 500, true))?;
        let curve = igc_curve(&cfg)?;
        if !curve.asymptotic_window {
            return Err(Error::InsufficientWindow {
                nodes: 0,
                required: 1,
            });
        }
        worst = worst.max((curve.fitted_exponent + 1.0).abs());
        details.push(format!("r={r}: {:.6}", curve.fitted_exponent));
    }
    Ok(Outcome::within(
        worst,
        0.01,
        format!("fitted exponents {} (target -1 +/- 0.01)", details.join(", ")),
    ))
}

fn simplified_ratio(r: f64) -> f64 {
    (2.0 * (2.0 - r) * (1.0 - r * r)).sqrt() / (2.0 + r)
}

fn criterion_8(_opts: &ValidationOptions) -> Result<Outcome> {
    let f = |r: f64| CorrelationCoefficient::new(r).map(compression_ratio);
    let at_half = (f(0.5)? - 0.6).abs();
    let n = 1000;
    let grid: Vec<f64> = (1..=n).map(|i| i as f64 / (n + 1) as f64).collect();
    let values: Vec<f64> = grid.iter().map(|&r| f(r)).collect::<Result<_>>()?;
    let monotone = values.windows(2).all(|w| w[1] <= w[0]);
    let bounded = values.iter().all(|v| (0.0..=1.0).contains(v));
    let simplified = grid
        .iter()
        .zip(&values)
        .map(|(&r, v)| (v - simplified_ratio(r)).abs())
        .fold(0.0, f64::max);
    let near_zero = (f(0.001)? - 1.0).abs();
    let mut realized = 0.0f64;
    for r in [0.1, 0.5, 0.9] {
        let cfg = IgcConfig::new(r, 1.0, 1.0, vec![1.0])?;
        let tau = 1e4;
        let ratio = avg_volume(&cfg, tau) / avg_volume(&cfg.baseline(), tau);
        realized = realized.max((ratio - f(r)?).abs());
    }
    let worst = at_half.max(simplified);
    Ok(Outcome {
        worst,
        threshold: 1e-12,
        ok: at_half <= 1e-12
            && simplified <= 1e-12
            && monotone
            && bounded
            && near_zero <= 1e-3
            && realized <= 1e-9,
        detail: format!(
            "|F(0.5)-0.6| = {at_half:.2e}, simplified form dev {simplified:.2e}, monotone={monotone}, in [0,1]={bounded}, |F(0.001)-1| = {near_zero:.2e}, avg_vol ratio dev {realized:.2e}"
        ),
    })
}

fn criterion_9(opts: &ValidationOptions) -> Result<Outcome> {
    let model = BivariateGaussian::new(ModelParams4::standard(CorrelationCoefficient::new(0.7)?));
    let samples = sample_bivariate(&model, 1_000_000, opts.seed);
    let fit = best_linear_msq(&samples)?;
    let r_hat = correlation_coefficient(&samples)?;
    let identity = (fit.residual - (1.0 - r_hat * r_hat)).abs();
    let dc2 = (fit.c2 - 0.7).abs();
    let dres = (fit.residual - 0.51).abs();
    Ok(Outcome {
        worst: dc2.max(dres),
        threshold: 0.01,
        ok: dc2 <= 0.01 && dres <= 0.01 && identity <= 1e-12,
        detail: format!(
            "c2 = {:.5}, residual = {:.5} (tol 0.01), |residual - (1 - r_hat^2)| = {identity:.2e} (tol 1e-12)",
            fit.c2, fit.residual
        ),
    })
}

fn criterion_10(opts: &ValidationOptions) -> Result<Outcome> {
    let mut rng = rng(opts, 10);
    let mut worst = 0.0f64;
    for _ in 0..20 {
        let p = random_params4(&mut rng);
        let total = BivariateGaussian::new(p).density_integral(opts.tol.quad_order);
        worst = worst.max((total - 1.0).abs());
    }
    Ok(Outcome::within(
        worst,
        1e-8,
        format!("20 parameter sets: max |integral - 1| = {worst:.2e} (tol 1e-8)"),
    ))
}

fn criterion_11(opts: &ValidationOptions) -> Result<Outcome> {
    let mut rng = rng(opts, 11);
    let sign = opts.curvature_sign();
    let mut worst = 0.0f64;
    for _ in 0..50 {
        let p = random_params3(&mut rng);
        let original = scalar_curvature(&reduced_field(p.r, DerivativeMode::Analytic), &p.coords(), &opts.tol)?;
        let pulled = MetricField::new(
            PullbackMetric {
                base: MonomialMetric::reduced(p.r),
                reparam: LogCoordinate { dim: 3, index: 2 },
            },
            DerivativeMode::FiniteDifference,
        );
        let y = [p.mu_x, p.mu_y, p.sigma.ln()];
        let transformed = sign * scalar_curvature(&pulled, &y, &opts.tol)?;
        worst = worst.max((transformed - original).abs());
    }
    Ok(Outcome::within(
        worst,
        1e-5,
        format!("50 points, sigma = exp(s): max |R' - R| = {worst:.2e} (tol 1e-5)"),
    ))
}

/// Runs one criterion. Errors raised while computing count as failures.
pub fn run_criterion(id: u32, opts: &ValidationOptions) -> Option<CriterionResult> {
    let name = CRITERIA.iter().find(|c| c.0 == id)?.1;
    let start = Instant::now();
    let outcome = match id {
        1 => criterion_1(opts),
        2 => criterion_2(opts),
        3 => criterion_3(opts),
        4 => criterion_4(opts),
        5 => criterion_5(opts),
        6 => criterion_6(opts),
        7 => criterion_7(opts),
        8 => criterion_8(opts),
        9 => criterion_9(opts),
        10 => criterion_10(opts),
        11 => criterion_11(opts),
        _ => return None,
    };
    let seconds = start.elapsed().as_secs_f64();
    Some(match outcome {
        Ok(o) => CriterionResult {
            id,
            name,
            passed: o.ok,
            worst: o.worst,
            threshold: o.threshold,
            detail: o.detail,
            seconds,
        },
        Err(e) => CriterionResult {
            id,
            name,
            passed: false,
            worst: f64::NAN,
            threshold: f64::NAN,
            detail: format!("error: {e}"),
            seconds,
        },
    })
}

/// Runs every criterion in order. `on_result` sees each result as soon as
/// it is available.
pub fn run_all_with<F: FnMut(&CriterionResult)>(
    opts: &ValidationOptions,
    mut on_result: F,
) -> ValidationReport {
    let results = CRITERIA
        .iter()
        .filter_map(|&(id, _)| {
            let res = run_criterion(id, opts)?;
            on_result(&res);
            Some(res)
        })
        .collect();
    ValidationReport {
        seed: opts.seed,
        tolerances: opts.tol,
        fault: opts.fault,
        results,
    }
}

pub fn run_all(opts: &ValidationOptions) -> ValidationReport {
    run_all_with(opts, |_| {})
}
