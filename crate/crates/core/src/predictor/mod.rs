//! Predicted constants and empirical comparisons.
//!
//! `C_Λ = 𝔖(Λ)𝔍(Λ)` is the box-count constant, `ζ(s−Rd)^{−k} C_Λ` its primitive analogue and
//! `C = C_Λ / (2^k (k−1)! ζ(s−Rd)^k)` the leading coefficient of `N(B) ~ C B (log B)^{k−1}`.

mod family;

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::arith::factorial;
use crate::coefficients::{check_hypotheses_with_budget, DEFAULT_NODE_BUDGET};
use crate::counting::{BoxSpec, CountConfig, CountMode, Counter, Method};
use crate::error::{arg, Error, Result};
use crate::instance::ProblemInstance;
use crate::integral::{
    assemble_i_with, default_truncation_with, singular_integral_positive_with, IntegralConfig,
    IntegralEstimate, OracleRequest,
};
use crate::report::ser_u128;
use crate::series::{singular_series_with, zeta_real, SeriesConfig, SeriesEstimate, TOLERANCE};
use crate::solvability::{positivity_report_with, Positivity, SearchConfig, DEFAULT_GAMMA_MAX};

pub use family::{
    family_constant, slice_count, uniformity_batch, BatchReport, BatchRow, FamilyReport,
};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PredictOptions {
    /// Truncation `Y` of `Σ_{q <= Y} T(q)`; defaults to [`default_series_truncation`].
    pub series_truncation: Option<u64>,
    pub series_depth: Option<u32>,
    /// Frequency cutoff of the singular integral; defaults to `max(100, 10K)`.
    pub integral_truncation: Option<f64>,
    pub oracle: Option<OracleRequest>,
    pub prime_bound: Option<u64>,
    pub gamma_max: u32,
    pub series: SeriesConfig,
    pub integral: IntegralConfig,
    pub search: SearchConfig,
    pub count: CountConfig,
    /// Node budget of the block search in the hypothesis check.
    pub hypothesis_budget: u64,
}

impl Default for PredictOptions {
    fn default() -> Self {
        PredictOptions {
            series_truncation: None,
            series_depth: None,
            integral_truncation: None,
            oracle: None,
            prime_bound: None,
            gamma_max: DEFAULT_GAMMA_MAX,
            series: SeriesConfig::default(),
            integral: IntegralConfig::default(),
            search: SearchConfig::default(),
            count: CountConfig::default(),
            hypothesis_budget: DEFAULT_NODE_BUDGET,
        }
    }
}

/// `1000`, `100` and `20` for one, two and more equations.
pub fn default_series_truncation(inst: &ProblemInstance) -> u64 {
    match inst.r() {
        1 => 1000,
        2 => 100,
        _ => 20,
    }
}

/// A named internal consistency assertion.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    fn new(name: &str, passed: bool, detail: String) -> Self {
        Check {
            name: name.into(),
            passed,
            detail,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct PredictionReport {
    pub c_lambda: f64,
    /// `|𝔖|(quadrature error + tail) + |𝔍| · series tail`.
    pub c_lambda_error: f64,
    pub height_exponent: i64,
    /// `ζ(s−Rd)`, absent when `s − Rd <= 1`.
    pub zeta: Option<f64>,
    /// `ζ(s−Rd)^{−k}`.
    pub c_primitive_factor: Option<f64>,
    pub c_hyperbolic: Option<f64>,
    pub series: SeriesEstimate,
    pub integral: IntegralEstimate,
    pub positivity: Positivity,
    pub positivity_trail: Vec<String>,
    pub hypotheses_satisfied: bool,
    pub warnings: Vec<String>,
    pub checks: Vec<Check>,
}

impl PredictionReport {
    pub fn consistent(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    /// `C_hyperbolic` recomputed from the other fields.
    pub fn hyperbolic_from_fields(&self, k: u32) -> Option<f64> {
        self.c_primitive_factor
            .map(|f| self.c_lambda * f / (2f64.powi(k as i32) * factorial(k - 1)))
    }
}

pub fn predict(inst: &ProblemInstance, opts: &PredictOptions) -> Result<PredictionReport> {
    let mut warnings = Vec::new();
    let hyp = check_hypotheses_with_budget(inst, opts.hypothesis_budget);
    if !hyp.satisfied() {
        warnings.push(format!(
            "hypotheses not met (s large enough: {}, submatrix: {:?}); constants computed regardless",
            hyp.s_large_enough, hyp.search
        ));
    }
    let ys = opts
        .series_truncation
        .unwrap_or_else(|| default_series_truncation(inst));
    let series = singular_series_with(inst, ys, opts.series_depth, &opts.series)?;
    if !series.s_large_enough {
        warnings.push("s < R(n0+1): singular series convergence not guaranteed".into());
    }
    let yi = match opts.integral_truncation {
        Some(y) => y,
        None => default_truncation_with(inst, &opts.integral)?,
    };
    let integral = assemble_i_with(inst, yi, opts.oracle, &opts.integral)?;
    let pos = positivity_report_with(inst, opts.prime_bound, opts.gamma_max, opts.search)?;

    let c_lambda = series.value * integral.value;
    let c_lambda_error = series.value.abs() * (integral.quadrature_error + integral.tail_heuristic)
        + integral.value.abs() * series.tail_heuristic;
    let e = inst.height_exponent();
    let k = inst.k();
    let zeta = if e > 1 {
        Some(zeta_real(e as f64)?)
    } else {
        None
    };
    if zeta.is_none() {
        warnings.push(format!(
            "s − Rd = {e} <= 1: ζ(s − Rd) diverges, no primitive or height constant"
        ));
    }
    let c_primitive_factor = zeta.map(|z| z.powi(-(k as i32)));
    let c_hyperbolic =
        zeta.map(|z| c_lambda / (2f64.powi(k as i32) * factorial(k - 1) * z.powi(k as i32)));

    let mut report = PredictionReport {
        c_lambda,
        c_lambda_error,
        height_exponent: e,
        zeta,
        c_primitive_factor,
        c_hyperbolic,
        series,
        integral,
        positivity: pos.sign,
        positivity_trail: pos.trail,
        hypotheses_satisfied: hyp.satisfied(),
        warnings,
        checks: Vec::new(),
    };
    report.checks = checks(&report, k);
    Ok(report)
}

fn checks(r: &PredictionReport, k: u32) -> Vec<Check> {
    let mut out = Vec::new();
    if let (Some(h), Some(again)) = (r.c_hyperbolic, r.hyperbolic_from_fields(k)) {
        let rel = (h - again).abs() / h.abs().max(f64::MIN_POSITIVE);
        out.push(Check::new(
            "hyperbolic_constant_identity",
            h == again || rel <= 1e-12,
            format!("relative difference {rel:.3e}"),
        ));
    }
    let worst = r
        .series
        .euler_factors
        .iter()
        .map(|e| e.mismatch)
        .fold(0.0, f64::max);
    out.push(Check::new(
        "euler_factor_paths",
        worst <= TOLERANCE,
        format!("largest partial-sum mismatch {worst:.3e}"),
    ));
    match r.positivity {
        Positivity::Zero => out.push(Check::new(
            "zero_constant",
            r.c_lambda.abs() <= r.c_lambda_error,
            format!(
                "|C_Λ| = {:.3e} against error {:.3e}",
                r.c_lambda.abs(),
                r.c_lambda_error
            ),
        )),
        Positivity::Positive => out.push(Check::new(
            "positive_constant",
            r.c_lambda > 0.0,
            format!("C_Λ = {:.6e}", r.c_lambda),
        )),
        Positivity::Undetermined => {}
    }
    let i = &r.integral;
    if let (Some(d), Some(err)) = (i.discrepancy, i.oracle_error) {
        let band = 3.0 * err.hypot(i.quadrature_error);
        out.push(Check::new(
            "integral_oracle_agreement",
            d <= band,
            format!("|quadrature − oracle| = {d:.3e} against 3σ = {band:.3e}"),
        ));
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoxRow {
    pub bounds: Vec<u64>,
    /// `⟨X⟩ = X_1 ⋯ X_k`.
    pub norm: f64,
    #[serde(serialize_with = "ser_u128")]
    pub empirical: u128,
    pub predicted: f64,
    pub ratio: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct BoxComparison {
    pub mode: CountMode,
    pub nonzero: bool,
    /// Constant multiplying `⟨X⟩^{s−Rd}` in the prediction.
    pub constant: f64,
    pub rows: Vec<BoxRow>,
}

fn ratio(empirical: f64, predicted: f64) -> Option<f64> {
    (predicted != 0.0).then(|| empirical / predicted)
}

/// Constant for box counts in `mode`: `C_Λ`, `ζ^{−k}C_Λ` or `𝔖𝔍⁺`.
pub fn box_constant(
    inst: &ProblemInstance,
    prediction: &PredictionReport,
    mode: CountMode,
    config: &IntegralConfig,
) -> Result<f64> {
    Ok(match mode {
        CountMode::All => prediction.c_lambda,
        CountMode::Primitive => {
            let f = prediction.c_primitive_factor.ok_or_else(|| {
                Error::Unsupported("primitive prediction needs s − Rd > 1".into())
            })?;
            f * prediction.c_lambda
        }
        CountMode::Positive => {
            let plus =
                singular_integral_positive_with(inst, prediction.integral.truncation, config)?;
            prediction.series.value * plus.value
        }
    })
}

/// Empirical box counts against `C · ⟨X⟩^{s−Rd}`, rows sorted by `⟨X⟩`. Excluding zero
/// coordinates leaves the prediction unchanged.
pub fn compare_box(
    inst: &ProblemInstance,
    bounds: &[Vec<u64>],
    mode: CountMode,
    nonzero: bool,
    prediction: &PredictionReport,
    opts: &PredictOptions,
) -> Result<BoxComparison> {
    let constant = box_constant(inst, prediction, mode, &opts.integral)?;
    let e = inst.height_exponent() as i32;
    let mut counter = Counter::with_config(inst, opts.count);
    let mut rows = Vec::with_capacity(bounds.len());
    for x in bounds {
        let report = counter.box_count(
            &BoxSpec::new(x.clone(), mode).nonzero(nonzero),
            Method::MeetInMiddle,
        )?;
        let norm: f64 = x.iter().map(|&v| v as f64).product();
        let predicted = constant * norm.powi(e);
        rows.push(BoxRow {
            bounds: x.clone(),
            norm,
            empirical: report.count,
            predicted,
            ratio: ratio(report.count as f64, predicted),
        });
    }
    rows.sort_by(|a, b| a.norm.total_cmp(&b.norm));
    Ok(BoxComparison {
        mode,
        nonzero,
        constant,
        rows,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HeightRow {
    pub b: f64,
    #[serde(serialize_with = "ser_u128")]
    pub empirical: u128,
    pub n_over_b: f64,
    /// `C B (log B)^{k−1}`.
    pub predicted_leading: f64,
    pub ratio: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct HyperbolicComparison {
    pub rows: Vec<HeightRow>,
    /// Least-squares coefficients of `N(B)/B` in `1, log B, …, (log B)^{k−1}`.
    pub coefficients: Vec<f64>,
    pub degree: usize,
    pub fitted_leading: f64,
    pub predicted_leading: f64,
    /// `|fitted − predicted| / |predicted|`, absent when the prediction is zero.
    pub relative_error: Option<f64>,
    pub residuals: Vec<f64>,
}

/// Least-squares fit of `ys` against `1, t, …, t^degree`.
pub fn polynomial_fit(ts: &[f64], ys: &[f64], degree: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    if ts.len() < degree + 1 {
        return arg(format!(
            "{} samples cannot determine a polynomial of degree {degree}",
            ts.len()
        ));
    }
    let a = DMatrix::from_fn(ts.len(), degree + 1, |i, j| ts[i].powi(j as i32));
    let b = DVector::from_column_slice(ys);
    let coef = a
        .clone()
        .svd(true, true)
        .solve(&b, 1e-14)
        .map_err(|e| Error::Consistency(format!("least-squares solve failed: {e}")))?;
    let residuals = (&b - &a * &coef).iter().copied().collect();
    Ok((coef.iter().copied().collect(), residuals))
}

/// `N(B)` for each height bound, with a fit of `N(B)/B` by a polynomial of degree `k − 1` in
/// `log B`; the top coefficient estimates `C`.
pub fn compare_hyperbolic(
    inst: &ProblemInstance,
    heights: &[f64],
    prediction: &PredictionReport,
    opts: &PredictOptions,
) -> Result<HyperbolicComparison> {
    let c = prediction
        .c_hyperbolic
        .ok_or_else(|| Error::Unsupported("height constant needs s − Rd > 1".into()))?;
    let k = inst.k() as usize;
    if heights.len() < k {
        return arg(format!(
            "{} height bounds cannot fit {k} coefficients",
            heights.len()
        ));
    }
    let mut sorted = heights.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mut counter = Counter::with_config(inst, opts.count);
    let mut rows = Vec::with_capacity(sorted.len());
    for &b in &sorted {
        let n = counter.hyperbolic_count(b)?;
        let lead = c * b * b.ln().powi(k as i32 - 1);
        rows.push(HeightRow {
            b,
            empirical: n,
            n_over_b: n as f64 / b,
            predicted_leading: lead,
            ratio: ratio(n as f64, lead),
        });
    }
    let ts: Vec<f64> = rows.iter().map(|r| r.b.ln()).collect();
    let ys: Vec<f64> = rows.iter().map(|r| r.n_over_b).collect();
    let (coefficients, residuals) = polynomial_fit(&ts, &ys, k - 1)?;
    let fitted_leading = coefficients[k - 1];
    Ok(HyperbolicComparison {
        rows,
        degree: k - 1,
        fitted_leading,
        predicted_leading: c,
        relative_error: (c != 0.0).then(|| (fitted_leading - c).abs() / c.abs()),
        coefficients,
        residuals,
    })
}

/// `n` bounds `B_i` with `log B_i` equally spaced on `[log lo, log hi]`.
pub fn log_spaced(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![hi];
    }
    let (a, b) = (lo.ln(), hi.ln());
    (0..n)
        .map(|i| (a + (b - a) * i as f64 / (n - 1) as f64).exp().round())
        .collect()
}
