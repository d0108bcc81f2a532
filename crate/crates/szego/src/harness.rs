//! Experiment drivers tying the spectral side to the boundary-coefficient
//! side: alpha sweeps of the trace deficit against `alpha^(d-1) * B_d`,
//! entanglement-entropy scaling for the Fermi symbol, scaling-limit checks
//! for interpolated symbol families, and CSV / plot-data emission used by
//! the command-line interface.

use crate::coeffs::{b_d_coefficient, CoefficientResult, QuadratureSpec};
use crate::geometry::Region;
use crate::operators::d_alpha_trace;
use crate::symbols::{fermi_symbol, symbol_family_interpolate, FermiParams, Symbol};
use crate::testfuncs::{renyi_eta, TestFunction};
use crate::{Error, Result};
use rayon::prelude::*;
use std::fmt::Write as _;
use std::path::Path;

/// One row of an alpha sweep.
#[derive(Debug, Clone, Copy)]
pub struct SweepRow {
    pub alpha: f64,
    /// Spectral trace deficit at this alpha.
    pub d_alpha: f64,
    /// Boundary-coefficient prediction `alpha^(d-1) * B_d`.
    pub predicted: f64,
    /// `d_alpha / predicted`; NaN when the coefficient is indistinguishable
    /// from zero (printed as `undefined` in CSV output).
    pub ratio: f64,
    /// Matrix size used for the trace at this alpha.
    pub n: usize,
    /// Grid-refinement error estimate for `d_alpha`.
    pub resolution_estimate: f64,
}

/// Result of [`szego_sweep`]: per-alpha deficits against the coefficient
/// prediction, with a log-log slope fit.
#[derive(Debug, Clone)]
pub struct SweepReport {
    /// Rows in increasing alpha order.
    pub rows: Vec<SweepRow>,
    /// Alphas that could not be computed (for example matrix-size cap
    /// violations), with the error message; the sweep continues past them.
    pub skipped: Vec<(f64, String)>,
    /// Least-squares slope of log |d_alpha| against log alpha, fitted over
    /// rows that sit clearly above the resolution noise floor; NaN when
    /// fewer than two rows qualify.
    pub fitted_slope: f64,
    /// The boundary coefficient used for the prediction column.
    pub coefficient: CoefficientResult,
    /// Ambient dimension (1 or 2); the predicted slope is `dim - 1`.
    pub dim: usize,
}

/// One row of an entanglement-entropy scaling run.
#[derive(Debug, Clone, Copy)]
pub struct EERow {
    pub alpha: f64,
    /// Entanglement entropy of the scaled region, assembled from three
    /// trace deficits (region, box complement, full box).
    pub h_gamma: f64,
    /// Prediction `2 * alpha^(d-1) * B_d`.
    pub predicted: f64,
    /// Combined grid-refinement error estimate of the three traces.
    pub resolution_estimate: f64,
}

/// Result of [`ee_scaling`].
#[derive(Debug, Clone)]
pub struct EEReport {
    /// Rows in increasing alpha order.
    pub rows: Vec<EERow>,
    /// Half-width of the auxiliary box used to truncate the complement.
    pub box_half_width: f64,
    /// Renyi index.
    pub gamma: f64,
    /// Boundary coefficient of the entropy function for the prediction.
    pub coefficient: CoefficientResult,
    /// Localization warnings (alpha * L below threshold) and similar notes.
    pub warnings: Vec<String>,
    /// Alphas that could not be computed, with the error message.
    pub skipped: Vec<(f64, String)>,
}

/// One row of a scaling-limit check.
#[derive(Debug, Clone, Copy)]
pub struct ScalingRow {
    pub lambda: f64,
    /// `lambda^(-gamma) * B_d(lambda * a_lambda; f)`.
    pub scaled_value: f64,
    /// Limit target `B_d(a0; f_model)`.
    pub target: f64,
    /// `|scaled_value - target|`.
    pub deviation: f64,
}

/// Result of [`scaling_limit_check`].
#[derive(Debug, Clone)]
pub struct ScalingReport {
    /// Rows in the order the lambdas were supplied.
    pub rows: Vec<ScalingRow>,
    /// The target coefficient `B_d(a0; f_model)`.
    pub coefficient: CoefficientResult,
    /// Homogeneity exponent used for the `lambda^(-gamma)` rescaling.
    pub gamma: f64,
}

/// Default alpha grids keeping the largest matrix near the size cap:
/// `{10, 20, 40, 80}` in one dimension, `{4, 6, 8, 10}` in two.
pub fn default_alphas(dim: usize) -> Vec<f64> {
    if dim <= 1 {
        vec![10.0, 20.0, 40.0, 80.0]
    } else {
        vec![4.0, 6.0, 8.0, 10.0]
    }
}

fn check_alphas(alphas: &[f64]) -> Result<()> {
    if alphas.len() < 3 {
        return Err(Error::InvalidParameter(format!(
            "alpha sweep needs at least 3 values, got {}",
            alphas.len()
        )));
    }
    if !alphas.windows(2).all(|w| w[0] < w[1]) {
        return Err(Error::InvalidParameter(
            "alpha values must be strictly increasing".into(),
        ));
    }
    if !alphas.iter().all(|a| a.is_finite() && *a > 0.0) {
        return Err(Error::InvalidParameter(
            "alpha values must be finite and positive".into(),
        ));
    }
    Ok(())
}

/// Unweighted least-squares slope through `(x, y)` points; NaN for fewer
/// than two points or degenerate abscissas.
fn least_squares_slope(pts: &[(f64, f64)]) -> f64 {
    if pts.len() < 2 {
        return f64::NAN;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    if sxx == 0.0 {
        return f64::NAN;
    }
    sxy / sxx
}

/// Slope of log |d_alpha| vs log alpha over rows clearly above the noise
/// floor (|d_alpha| > 10 x resolution estimate); rows at the floor would
/// corrupt the fit.
pub fn fitted_slope_from_rows(rows: &[SweepRow]) -> f64 {
    let pts: Vec<(f64, f64)> = rows
        .iter()
        .filter(|r| r.d_alpha != 0.0 && r.d_alpha.abs() > 10.0 * r.resolution_estimate)
        .map(|r| (r.alpha.ln(), r.d_alpha.abs().ln()))
        .collect();
    least_squares_slope(&pts)
}

/// Runs the trace deficit at every alpha and compares each value against
/// the boundary-coefficient prediction `alpha^(d-1) * B_d`.
///
/// Alphas must be strictly increasing with at least three values. Rows
/// that fail (typically the matrix-size cap at large alpha) are recorded
/// in `skipped` and the sweep continues.
pub fn szego_sweep(
    a: &Symbol,
    f: &TestFunction,
    region: &Region,
    alphas: &[f64],
    grid_density: f64,
    quad: &QuadratureSpec,
) -> Result<SweepReport> {
    check_alphas(alphas)?;
    let one = |_x: [f64; 2]| 1.0;
    let coefficient = b_d_coefficient(a, &one, region, f, quad)?;
    let b = coefficient.value;
    // A coefficient below its own error budget cannot define a ratio.
    let b_defined =
        b.abs() > 10.0 * (coefficient.pv_extrapolation_error + coefficient.tail_error) + 1e-13;

    let traces: Vec<(f64, Result<crate::operators::SpectralTraceResult>)> = alphas
        .par_iter()
        .map(|&al| (al, d_alpha_trace(a, f, region, al, grid_density, false)))
        .collect();

    let mut rows = Vec::new();
    let mut skipped = Vec::new();
    for (al, tr) in traces {
        match tr {
            Ok(t) => {
                let predicted = al.powi(region.dim as i32 - 1) * b;
                let ratio = if b_defined {
                    t.d_alpha / predicted
                } else {
                    f64::NAN
                };
                rows.push(SweepRow {
                    alpha: al,
                    d_alpha: t.d_alpha,
                    predicted,
                    ratio,
                    n: t.n,
                    resolution_estimate: t.resolution_estimate,
                });
            }
            Err(e) => skipped.push((al, e.to_string())),
        }
    }
    let fitted_slope = fitted_slope_from_rows(&rows);
    Ok(SweepReport {
        rows,
        skipped,
        fitted_slope,
        coefficient,
        dim: region.dim,
    })
}

/// Axis-aligned box `(-l, l)^dim` as a region.
fn box_region(dim: usize, l: f64) -> Result<Region> {
    if dim == 1 {
        Region::interval(-l, l)
    } else {
        Region::polygon(vec![[-l, -l], [l, -l], [l, l], [-l, l]])
    }
}

/// Entanglement-entropy scaling for the thermal Fermi state: computes
/// `H_gamma(alpha * region)` for each alpha and compares it against
/// `2 * alpha^(d-1) * B_d` with the Renyi entropy function.
///
/// The entropy splits over the region and its complement; the unbounded
/// complement is truncated to a box of half-width `l`, and the box's own
/// outer-boundary contribution is cancelled by subtracting the full-box
/// deficit: `H = d(region) + d(box \ region) - d(box)`. A warning is
/// recorded whenever `alpha * l` falls below the localization threshold 50,
/// where that cancellation loses accuracy.
pub fn ee_scaling(
    fermi: &FermiParams,
    gamma: f64,
    region: &Region,
    alphas: &[f64],
    l: f64,
    grid_density: f64,
    quad: &QuadratureSpec,
) -> Result<EEReport> {
    check_alphas(alphas)?;
    let a = fermi_symbol(fermi)?;
    if a.dim != region.dim {
        return Err(Error::DimensionMismatch {
            expected: region.dim,
            got: a.dim,
        });
    }
    let eta = renyi_eta(gamma)?;
    let complement = region.complement_in_box(l)?;
    let full_box = box_region(region.dim, l)?;

    let one = |_x: [f64; 2]| 1.0;
    let coefficient = b_d_coefficient(&a, &one, region, &eta, quad)?;

    let mut warnings = Vec::new();
    for &al in alphas {
        if al * l < 50.0 {
            warnings.push(format!(
                "alpha = {al}: alpha * L = {} is below the localization threshold 50; \
                 the box-complement cancellation may be inaccurate",
                al * l
            ));
        }
    }

    // Three traces per alpha, run as one flat job pool and reassembled in
    // alpha order.
    let regions = [region, &complement, &full_box];
    let jobs: Vec<(usize, usize)> = (0..alphas.len())
        .flat_map(|i| (0..3).map(move |j| (i, j)))
        .collect();
    let results: Vec<Result<crate::operators::SpectralTraceResult>> = jobs
        .par_iter()
        .map(|&(i, j)| d_alpha_trace(&a, &eta, regions[j], alphas[i], grid_density, false))
        .collect();

    let mut rows = Vec::new();
    let mut skipped = Vec::new();
    for (i, &al) in alphas.iter().enumerate() {
        let chunk = &results[3 * i..3 * i + 3];
        match (&chunk[0], &chunk[1], &chunk[2]) {
            (Ok(t_in), Ok(t_comp), Ok(t_box)) => {
                let h_gamma = t_in.d_alpha + t_comp.d_alpha - t_box.d_alpha;
                let predicted =
                    2.0 * al.powi(region.dim as i32 - 1) * coefficient.value;
                rows.push(EERow {
                    alpha: al,
                    h_gamma,
                    predicted,
                    resolution_estimate: t_in.resolution_estimate
                        + t_comp.resolution_estimate
                        + t_box.resolution_estimate,
                });
            }
            _ => {
                let msg = chunk
                    .iter()
                    .filter_map(|r| r.as_ref().err())
                    .map(|e| e.to_string())
                    .collect::<Vec<_>>()
                    .join("; ");
                skipped.push((al, msg));
            }
        }
    }
    Ok(EEReport {
        rows,
        box_half_width: l,
        gamma,
        coefficient,
        warnings,
        skipped,
    })
}

/// Numerical almost-homogeneity precheck: near zero, `f` must agree with
/// `f_model` to a relative remainder that decays as `t -> 0`. Sampled on
/// dyadic points `t = 2^-k`, k = 4..24, on every side of zero that the
/// symbol family actually reaches.
fn check_model_pair_on_side(f: &TestFunction, f_model: &TestFunction, side: f64) -> Result<()> {
    let mut first = None;
    let mut last = None;
    for k in 4..=24 {
        let t = side * (2.0f64).powi(-k);
        let fv = f.eval(t);
        let fm = f_model.eval(t);
        if !fv.is_finite() || !fm.is_finite() {
            continue;
        }
        let r = if fm.abs() > 0.0 {
            (fv - fm).abs() / fm.abs()
        } else if fv.abs() > 0.0 {
            f64::INFINITY
        } else {
            0.0
        };
        if first.is_none() {
            first = Some(r);
        }
        last = Some(r);
    }
    let (Some(r_first), Some(r_last)) = (first, last) else {
        return Ok(()); // side not reachable for either function
    };
    if r_last <= 0.5 * r_first + 1e-12 && r_last < 0.5 {
        Ok(())
    } else {
        Err(Error::ModelMismatch(format!(
            "relative remainder |f - f_model| / |f_model| does not decay toward 0 on the \
             side {side:+}: {r_first:.3e} at t = 2^-4 vs {r_last:.3e} at t = 2^-24"
        )))
    }
}

/// Which signs the symbol family takes near its decay tail, determined by
/// sampling; only those sides of zero are constrained by the model check.
fn symbol_sides(a0: &Symbol, a1: &Symbol) -> (bool, bool) {
    let mut pos = false;
    let mut neg = false;
    for sym in [a0, a1] {
        let r = sym.decay_radius(1e-10).max(1.0) + 1.0;
        for i in 0..=200 {
            let x = -r + 2.0 * r * (i as f64) / 200.0;
            let v = if sym.dim == 1 {
                sym.eval1(x)
            } else {
                sym.eval2(x, 0.35 * x)
            };
            if v > 1e-300 {
                pos = true;
            }
            if v < -1e-300 {
                neg = true;
            }
        }
    }
    (pos, neg)
}

pub(crate) fn check_model_pair(
    f: &TestFunction,
    f_model: &TestFunction,
    sides: (bool, bool),
) -> Result<()> {
    if sides.0 {
        check_model_pair_on_side(f, f_model, 1.0)?;
    }
    if sides.1 {
        check_model_pair_on_side(f, f_model, -1.0)?;
    }
    Ok(())
}

/// Coefficient-level scaling-limit check: verifies that
/// `lambda^(-gamma) * B_d(lambda * a_lambda; f)` approaches
/// `B_d(a0; f_model)` along the supplied lambda list, where
/// `a_lambda = a0 + lambda (a1 - a0)`.
///
/// Rejects `(f, f_model)` pairs that fail the sampled almost-homogeneity
/// condition near zero. At `lambda = 1` the deviation equals
/// `|B_d(a1; f) - B_d(a0; f_model)|` exactly (no scaling applied).
pub fn scaling_limit_check(
    a0: &Symbol,
    a1: &Symbol,
    f: &TestFunction,
    f_model: &TestFunction,
    gamma: f64,
    lambdas: &[f64],
    region: &Region,
    quad: &QuadratureSpec,
) -> Result<ScalingReport> {
    if lambdas.is_empty() {
        return Err(Error::InvalidParameter("empty lambda list".into()));
    }
    if !lambdas.iter().all(|l| l.is_finite() && *l > 0.0 && *l <= 1.0) {
        return Err(Error::InvalidParameter(
            "lambda values must lie in (0, 1]".into(),
        ));
    }
    if !(gamma > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "homogeneity exponent must be positive, got {gamma}"
        )));
    }
    check_model_pair(f, f_model, symbol_sides(a0, a1))?;

    let one = |_x: [f64; 2]| 1.0;
    let coefficient = b_d_coefficient(a0, &one, region, f_model, quad)?;

    let rows: Vec<ScalingRow> = lambdas
        .par_iter()
        .map(|&lam| -> Result<ScalingRow> {
            let a_lam = symbol_family_interpolate(a0, a1, lam)?;
            let scaled = a_lam.scaled(lam);
            let c = b_d_coefficient(&scaled, &one, region, f, quad)?;
            let scaled_value = lam.powf(-gamma) * c.value;
            Ok(ScalingRow {
                lambda: lam,
                scaled_value,
                target: coefficient.value,
                deviation: (scaled_value - coefficient.value).abs(),
            })
        })
        .collect::<Result<Vec<_>>>()?;

    Ok(ScalingReport {
        rows,
        coefficient,
        gamma,
    })
}

/// Formats a float with 12 significant digits. Plain decimal notation in
/// the exponent range `[-4, 12)`, scientific notation outside it; exact
/// zero prints as `0`.
pub fn fmt_g12(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return if x.is_nan() {
            "nan".to_string()
        } else if x > 0.0 {
            "inf".to_string()
        } else {
            "-inf".to_string()
        };
    }
    let ex = x.abs().log10().floor() as i32;
    if (-4..12).contains(&ex) {
        format!("{:.*}", (11 - ex).max(0) as usize, x)
    } else {
        format!("{:.11e}", x)
    }
}

/// Reports that can serialize themselves to CSV with a fixed schema.
pub trait CsvReport {
    fn csv(&self) -> String;
}

impl CsvReport for SweepReport {
    fn csv(&self) -> String {
        let mut s = String::from("alpha,d_alpha,predicted,ratio\n");
        for r in &self.rows {
            let ratio = if r.ratio.is_finite() {
                fmt_g12(r.ratio)
            } else {
                "undefined".to_string()
            };
            let _ = writeln!(
                s,
                "{},{},{},{}",
                fmt_g12(r.alpha),
                fmt_g12(r.d_alpha),
                fmt_g12(r.predicted),
                ratio
            );
        }
        s
    }
}

impl CsvReport for EEReport {
    fn csv(&self) -> String {
        let mut s = String::from("alpha,h_gamma,predicted\n");
        for r in &self.rows {
            let _ = writeln!(
                s,
                "{},{},{}",
                fmt_g12(r.alpha),
                fmt_g12(r.h_gamma),
                fmt_g12(r.predicted)
            );
        }
        s
    }
}

impl CsvReport for ScalingReport {
    fn csv(&self) -> String {
        let mut s = String::from("lambda,scaled_value,target,deviation\n");
        for r in &self.rows {
            let _ = writeln!(
                s,
                "{},{},{},{}",
                fmt_g12(r.lambda),
                fmt_g12(r.scaled_value),
                fmt_g12(r.target),
                fmt_g12(r.deviation)
            );
        }
        s
    }
}

/// Writes a report as CSV; I/O failures carry the offending path.
pub fn emit_csv<R: CsvReport + ?Sized>(report: &R, path: &Path) -> Result<()> {
    std::fs::write(path, report.csv()).map_err(|e| Error::Io {
        path: path.display().to_string(),
        source: e,
    })
}

/// Plain-text plot data for a sweep: a comment line with the predicted
/// slope, then rows of `log alpha` and `log |d_alpha|`.
pub fn plotdata_string(report: &SweepReport) -> String {
    let mut s = format!("# slope_predicted={}\n", report.dim.saturating_sub(1));
    for r in &report.rows {
        if r.d_alpha != 0.0 {
            let _ = writeln!(
                s,
                "{} {}",
                fmt_g12(r.alpha.ln()),
                fmt_g12(r.d_alpha.abs().ln())
            );
        }
    }
    s
}

/// Writes sweep plot data; I/O failures carry the offending path.
pub fn emit_plotdata(report: &SweepReport, path: &Path) -> Result<()> {
    std::fs::write(path, plotdata_string(report)).map_err(|e| Error::Io {
        path: path.display().to_string(),
        source: e,
    })
}

/// Parses `key = value` configuration text: one pair per line, `#` starts
/// a comment, blank lines ignored. Keys are normalized to flag spelling
/// (underscores become hyphens).
pub fn parse_config(text: &str) -> Result<Vec<(String, String)>> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((k, v)) = line.split_once('=') else {
            return Err(Error::Config(format!(
                "line {}: expected key = value, got {raw:?}",
                i + 1
            )));
        };
        let key = k.trim().replace('_', "-");
        let val = v.trim().to_string();
        if key.is_empty() {
            return Err(Error::Config(format!("line {}: empty key", i + 1)));
        }
        out.push((key, val));
    }
    Ok(out)
}
