//! Finite sections of truncated Wiener-Hopf operators and their spectral
//! traces.
//!
//! The operator op_alpha(a) acts by multiplication by a(xi) in rescaled
//! frequency variables; its kernel is
//!
//!   k_alpha(s) = (alpha / 2 pi)^d Integral exp(i alpha xi . s) a(xi) dxi,
//!
//! normalized so that the symbol a = 1 corresponds to the identity. The
//! truncation to a region is discretized by midpoint collocation with
//! weight-symmetrized entries M[j,k] = sqrt(w_j) k(x_j - x_k) sqrt(w_k).

use crate::geometry::Region;
use crate::quad;
use crate::symbols::Symbol;
use crate::testfuncs::TestFunction;
use crate::{Error, Result};
use ndarray::{Array1, Array2};
use ndarray_linalg::{Eigh, UPLO};

/// Largest allowed matrix size for the dense eigensolver.
pub const SIZE_CAP: usize = 6000;

const TWO_PI: f64 = std::f64::consts::TAU;

/// A dense finite section of a truncated operator.
pub struct TruncatedOperator {
    pub alpha: f64,
    pub dim: usize,
    pub grid_density: f64,
    pub matrix: Array2<f64>,
    pub points: Vec<[f64; 2]>,
    pub weights: Vec<f64>,
    /// Sum of quadrature weights; in d = 2 this deviates from the exact
    /// region measure by the boundary-cell subsampling resolution.
    pub measured_measure: f64,
    pub region_measure: f64,
    /// Largest antisymmetric entry removed when symmetrizing.
    pub symmetrization_defect: f64,
    pub grid_spacing: f64,
}

/// Spectral trace of one finite section together with its smoothed
/// counterpart and the boundary deficit between them.
#[derive(Clone, Copy, Debug)]
pub struct SpectralTraceResult {
    pub alpha: f64,
    pub n: usize,
    pub trace_f: f64,
    pub trace_smoothed: f64,
    pub d_alpha: f64,
    /// Change of d_alpha under one 1.5x grid refinement.
    pub resolution_estimate: f64,
}

fn grid_step(a: &Symbol, alpha: f64, grid_density: f64) -> f64 {
    let bandwidth = a.decay_radius(1e-8).max(0.5);
    TWO_PI / (alpha * bandwidth * grid_density)
}

/// One uniform midpoint lattice inside a single interval component:
/// nodes lo + (j + 1/2)·step for j < count, stored starting at `start`
/// in the global point list.
struct Lattice1d {
    start: usize,
    count: usize,
    lo: f64,
    step: f64,
}

/// Collocation nodes for d = 1: per-component midpoint lattices.
fn nodes_1d(components: &[(f64, f64)], h: f64) -> (Vec<[f64; 2]>, Vec<f64>, Vec<Lattice1d>) {
    let mut points = Vec::new();
    let mut weights = Vec::new();
    let mut lattices = Vec::new();
    for &(lo, hi) in components {
        let len = hi - lo;
        let n = ((len / h).round() as usize).max(1);
        let hc = len / n as f64;
        lattices.push(Lattice1d {
            start: points.len(),
            count: n,
            lo,
            step: hc,
        });
        for j in 0..n {
            points.push([lo + (j as f64 + 0.5) * hc, 0.0]);
            weights.push(hc);
        }
    }
    (points, weights, lattices)
}

/// Collocation nodes for d = 2: a uniform cell lattice over the bounding
/// box; cells crossing the boundary get fractional weights from an
/// indicator subsample. Returns lattice indices for kernel lookup.
fn nodes_2d(
    region: &Region,
    h: f64,
) -> (Vec<[f64; 2]>, Vec<f64>, Vec<[i64; 2]>) {
    let ([x0, y0], [x1, y1]) = region.bounding_box();
    let nx = (((x1 - x0) / h).ceil() as i64).max(1);
    let ny = (((y1 - y0) / h).ceil() as i64).max(1);
    let sub = 64;
    let mut points = Vec::new();
    let mut weights = Vec::new();
    let mut lattice = Vec::new();
    for ix in 0..nx {
        for iy in 0..ny {
            let cx = x0 + (ix as f64 + 0.5) * h;
            let cy = y0 + (iy as f64 + 0.5) * h;
            // Quick classification: cell fully inside when all corners and
            // the center are; the indicator is cheap, so test directly.
            let corners_in = [
                [cx - 0.5 * h, cy - 0.5 * h],
                [cx + 0.5 * h, cy - 0.5 * h],
                [cx - 0.5 * h, cy + 0.5 * h],
                [cx + 0.5 * h, cy + 0.5 * h],
            ]
            .iter()
            .filter(|p| region.indicator(&p[..]))
            .count();
            let center_in = region.indicator(&[cx, cy]);
            let w = if corners_in == 4 && center_in {
                h * h
            } else {
                let mut hits = 0usize;
                for sx in 0..sub {
                    for sy in 0..sub {
                        let px = cx - 0.5 * h + (sx as f64 + 0.5) * h / sub as f64;
                        let py = cy - 0.5 * h + (sy as f64 + 0.5) * h / sub as f64;
                        if region.indicator(&[px, py]) {
                            hits += 1;
                        }
                    }
                }
                h * h * hits as f64 / (sub * sub) as f64
            };
            if w > 0.0 {
                points.push([cx, cy]);
                weights.push(w);
                lattice.push([ix, iy]);
            }
        }
    }
    (points, weights, lattice)
}

/// Oscillatory xi-grid: Gauss-Legendre panels over [-reach, reach] sized so
/// the phase alpha * panel * span stays within the order-16 budget.
fn oscillatory_grid(reach: f64, alpha: f64, span: f64) -> (Vec<f64>, Vec<f64>) {
    let budget = 24.0;
    let width = (budget / (alpha * span.max(1e-9))).min(0.5);
    let panels = ((2.0 * reach) / width).ceil() as usize;
    let rule = quad::rule(16);
    let mut xs = Vec::new();
    let mut ws = Vec::new();
    for p in 0..panels {
        let lo = -reach + 2.0 * reach * p as f64 / panels as f64;
        let hi = -reach + 2.0 * reach * (p + 1) as f64 / panels as f64;
        rule.extend_mapped(lo, hi, &mut xs, &mut ws);
    }
    (xs, ws)
}

/// Dense kernel matrix K[j,k] = k_alpha(x_j - x_k) for d = 1 without
/// closed-form transform data.
///
/// The kernel value Sum_l w_l a(xi_l) cos(alpha xi_l (x_j - x_k)) depends
/// only on the point difference. Within a lattice pair sharing one step,
/// the differences form a single arithmetic progression, so the transform
/// is evaluated once per difference by a Chebyshev cosine recurrence and
/// scattered into the block. Pairs with unequal steps (components whose
/// lengths round to different effective steps) fall back to the rank-m
/// cosine expansion cos(a(x-y)) = cos(ax)cos(ay) + sin(ax)sin(ay),
/// accumulated with chunked matrix products over that block only.
fn kernel_matrix_1d_numeric(
    a: &Symbol,
    alpha: f64,
    points: &[[f64; 2]],
    lattices: &[Lattice1d],
) -> Array2<f64> {
    let n = points.len();
    let reach = a.decay_radius(1e-10) + 0.5;
    let (min, max) = points.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), p| {
        (lo.min(p[0]), hi.max(p[0]))
    });
    let (xs, ws) = oscillatory_grid(reach, alpha, max - min);
    let aw: Vec<f64> = xs
        .iter()
        .zip(&ws)
        .map(|(&xi, &w)| w * a.eval1(xi))
        .collect();
    let mut k = Array2::<f64>::zeros((n, n));
    for (ri, r) in lattices.iter().enumerate() {
        for s in &lattices[ri..] {
            if r.step.to_bits() == s.step.to_bits() {
                // Differences (r.lo - s.lo) + m*step for m in
                // [-(s.count-1), r.count-1]; cosine is even, so the
                // mirrored block reuses the same values.
                let c0 = r.lo - s.lo;
                let mlo = -((s.count as i64) - 1);
                let len = r.count + s.count - 1;
                let mut table = vec![0.0f64; len];
                for (l, &xi) in xs.iter().enumerate() {
                    let avw = aw[l];
                    if avw == 0.0 {
                        continue;
                    }
                    let delta = alpha * xi * r.step;
                    let phase0 = alpha * xi * (c0 + mlo as f64 * r.step);
                    let two_cos = 2.0 * delta.cos();
                    let mut prev = (phase0 - delta).cos();
                    let mut cur = phase0.cos();
                    for (idx, slot) in table.iter_mut().enumerate() {
                        // Refresh the recurrence periodically to stop
                        // round-off drift over long progressions.
                        if idx % 256 == 0 {
                            cur = (phase0 + idx as f64 * delta).cos();
                            prev = (phase0 + (idx as f64 - 1.0) * delta).cos();
                        }
                        *slot += avw * cur;
                        let next = two_cos * cur - prev;
                        prev = cur;
                        cur = next;
                    }
                }
                for i in 0..r.count {
                    for j in 0..s.count {
                        let idx = (i as i64 - j as i64 - mlo) as usize;
                        let v = table[idx];
                        k[[r.start + i, s.start + j]] = v;
                        k[[s.start + j, r.start + i]] = v;
                    }
                }
            } else {
                let mut kb = Array2::<f64>::zeros((r.count, s.count));
                let chunk = 512;
                let mut start = 0;
                while start < xs.len() {
                    let m = chunk.min(xs.len() - start);
                    let mut cr = Array2::<f64>::zeros((m, r.count));
                    let mut sr = Array2::<f64>::zeros((m, r.count));
                    let mut dcs = Array2::<f64>::zeros((m, s.count));
                    let mut dss = Array2::<f64>::zeros((m, s.count));
                    for l in 0..m {
                        let xi = xs[start + l];
                        let d = aw[start + l];
                        for i in 0..r.count {
                            let (sv, cv) = (alpha * xi * points[r.start + i][0]).sin_cos();
                            cr[[l, i]] = cv;
                            sr[[l, i]] = sv;
                        }
                        for j in 0..s.count {
                            let (sv, cv) = (alpha * xi * points[s.start + j][0]).sin_cos();
                            dcs[[l, j]] = d * cv;
                            dss[[l, j]] = d * sv;
                        }
                    }
                    ndarray::linalg::general_mat_mul(1.0, &cr.t(), &dcs, 1.0, &mut kb);
                    ndarray::linalg::general_mat_mul(1.0, &sr.t(), &dss, 1.0, &mut kb);
                    start += m;
                }
                for i in 0..r.count {
                    for j in 0..s.count {
                        let v = kb[[i, j]];
                        k[[r.start + i, s.start + j]] = v;
                        k[[s.start + j, r.start + i]] = v;
                    }
                }
            }
        }
    }
    k.mapv_into(|v| v * alpha / TWO_PI)
}

/// Kernel values on the 2-d difference lattice (p h, q h) by a two-stage
/// separable oscillatory transform.
fn kernel_lattice_2d_numeric(
    a: &Symbol,
    alpha: f64,
    h: f64,
    np: i64,
    nq: i64,
) -> Array2<f64> {
    let reach = a.decay_radius(1e-10) + 0.5;
    let span_x = (np - 1).max(1) as f64 * h;
    let span_y = (nq - 1).max(1) as f64 * h;
    let (xs1, ws1) = oscillatory_grid(reach, alpha, span_x);
    let (xs2, ws2) = oscillatory_grid(reach, alpha, span_y);
    let pm = (2 * np - 1) as usize;
    let qm = (2 * nq - 1) as usize;
    // Stage 1: transform out xi_2 for every (xi_1, q).
    let m1 = xs1.len();
    let m2 = xs2.len();
    let mut re1 = Array2::<f64>::zeros((m1, qm));
    let mut im1 = Array2::<f64>::zeros((m1, qm));
    for l1 in 0..m1 {
        for l2 in 0..m2 {
            let av = ws2[l2] * a.eval2(xs1[l1], xs2[l2]);
            if av == 0.0 {
                continue;
            }
            let base = alpha * xs2[l2] * h;
            for q in 0..qm {
                let sq = (q as i64 - (nq - 1)) as f64;
                let (sv, cv) = (base * sq).sin_cos();
                re1[[l1, q]] += av * cv;
                im1[[l1, q]] += av * sv;
            }
        }
    }
    // Stage 2: transform out xi_1; the real part of the product survives.
    let mut k = Array2::<f64>::zeros((pm, qm));
    for l1 in 0..m1 {
        let base = alpha * xs1[l1] * h;
        for p in 0..pm {
            let sp = (p as i64 - (np - 1)) as f64;
            let (sv, cv) = (base * sp).sin_cos();
            let w = ws1[l1];
            for q in 0..qm {
                k[[p, q]] += w * (cv * re1[[l1, q]] - sv * im1[[l1, q]]);
            }
        }
    }
    let scale = (alpha / TWO_PI).powi(2);
    k.mapv_into(|v| v * scale)
}

/// Build the dense finite section of op_alpha(a) truncated to the region.
pub fn build_operator(
    a: &Symbol,
    region: &Region,
    alpha: f64,
    grid_density: f64,
) -> Result<TruncatedOperator> {
    let h = grid_step(a, alpha, grid_density);
    build_operator_with_step(a, region, alpha, grid_density, h)
}

/// Builder on a caller-fixed grid step, so different symbols can share an
/// identical collocation grid.
fn build_operator_with_step(
    a: &Symbol,
    region: &Region,
    alpha: f64,
    grid_density: f64,
    h: f64,
) -> Result<TruncatedOperator> {
    if a.dim != region.dim {
        return Err(Error::DimensionMismatch {
            expected: region.dim,
            got: a.dim,
        });
    }
    if !(alpha > 0.0) || !alpha.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "scaling parameter must be positive, got {alpha}"
        )));
    }
    if !(grid_density >= 1.0) {
        return Err(Error::InvalidParameter(format!(
            "grid density must be at least 1, got {grid_density}"
        )));
    }
    let (points, weights, lattice, lattices_1d) = match region.dim {
        1 => {
            let (p, w, segs) = nodes_1d(&region.intervals()?, h);
            (p, w, Vec::new(), segs)
        }
        _ => {
            let (p, w, l) = nodes_2d(region, h);
            (p, w, l, Vec::new())
        }
    };
    let n = points.len();
    if n == 0 {
        return Err(Error::Region("region produced no collocation nodes".into()));
    }
    if n > SIZE_CAP {
        return Err(Error::SizeCap {
            n,
            cap: SIZE_CAP,
            alpha,
            grid_density,
        });
    }

    let mut matrix = if region.dim == 1 {
        if a.has_fourier() {
            let scale = alpha / TWO_PI;
            let mut m = Array2::<f64>::zeros((n, n));
            for j in 0..n {
                for k in j..n {
                    let v = scale
                        * a.fourier1(alpha * (points[j][0] - points[k][0]))
                            .unwrap();
                    m[[j, k]] = v;
                    m[[k, j]] = v;
                }
            }
            m
        } else {
            kernel_matrix_1d_numeric(a, alpha, &points, &lattices_1d)
        }
    } else if a.has_fourier() {
        let scale = (alpha / TWO_PI).powi(2);
        let mut m = Array2::<f64>::zeros((n, n));
        for j in 0..n {
            for k in j..n {
                let sx = alpha * (points[j][0] - points[k][0]);
                let sy = alpha * (points[j][1] - points[k][1]);
                let v = scale * a.fourier2(sx, sy).unwrap();
                m[[j, k]] = v;
                m[[k, j]] = v;
            }
        }
        m
    } else {
        let np = lattice.iter().map(|l| l[0]).max().unwrap() + 1;
        let nq = lattice.iter().map(|l| l[1]).max().unwrap() + 1;
        let table = kernel_lattice_2d_numeric(a, alpha, h, np, nq);
        let mut m = Array2::<f64>::zeros((n, n));
        for j in 0..n {
            for k in 0..n {
                let p = (lattice[j][0] - lattice[k][0] + np - 1) as usize;
                let q = (lattice[j][1] - lattice[k][1] + nq - 1) as usize;
                m[[j, k]] = table[[p, q]];
            }
        }
        m
    };

    // Weight symmetrization sqrt(w_j) k sqrt(w_k), then exact
    // symmetrization recording the largest defect removed.
    let sw: Vec<f64> = weights.iter().map(|w| w.sqrt()).collect();
    for j in 0..n {
        for k in 0..n {
            matrix[[j, k]] *= sw[j] * sw[k];
        }
    }
    let mut defect = 0.0f64;
    for j in 0..n {
        for k in (j + 1)..n {
            let d = (matrix[[j, k]] - matrix[[k, j]]).abs();
            defect = defect.max(d);
            let avg = 0.5 * (matrix[[j, k]] + matrix[[k, j]]);
            matrix[[j, k]] = avg;
            matrix[[k, j]] = avg;
        }
    }

    let measured: f64 = weights.iter().sum();
    Ok(TruncatedOperator {
        alpha,
        dim: region.dim,
        grid_density,
        matrix,
        points,
        weights,
        measured_measure: measured,
        region_measure: region.measure(),
        symmetrization_defect: defect,
        grid_spacing: h,
    })
}

/// Eigenvalues of a symmetric matrix without accumulating eigenvectors;
/// the values-only LAPACK path is several times cheaper at large n.
fn sym_eigenvalues(m: &Array2<f64>) -> Result<Vec<f64>> {
    let n = m.nrows();
    let layout = lax::layout::MatrixLayout::C {
        row: n as i32,
        lda: n as i32,
    };
    let mut buf: Vec<f64> = m.iter().copied().collect();
    <f64 as lax::Lapack>::eigh(false, layout, lax::UPLO::Lower, &mut buf).map_err(|e| {
        Error::Eigen {
            n,
            detail: e.to_string(),
        }
    })
}

/// Eigenvalues of the finite section, descending.
pub fn spectrum(op: &TruncatedOperator) -> Result<Vec<f64>> {
    let mut v = sym_eigenvalues(&op.matrix)?;
    v.sort_by(|a, b| b.partial_cmp(a).unwrap());
    Ok(v)
}

fn require_zero_at_zero(f: &TestFunction) -> Result<()> {
    let f0 = f.eval(0.0);
    if f0.abs() > 1e-12 {
        return Err(Error::NonzeroAtZero { f0 });
    }
    Ok(())
}

/// tr f(section): the sum of f over the eigenvalues. f must vanish at 0,
/// since the far field contributes arbitrarily many near-zero eigenvalues.
pub fn trace_f(op: &TruncatedOperator, f: &TestFunction) -> Result<f64> {
    require_zero_at_zero(f)?;
    let eigs = spectrum(op)?;
    let mut acc = 0.0;
    for l in eigs {
        acc += f.eval(l);
    }
    if !acc.is_finite() {
        return Err(Error::NonFinite {
            what: "trace_f",
            detail: "non-finite sum over the spectrum".into(),
        });
    }
    Ok(acc)
}

/// Integral of f(a(xi)) over xi, with the window sized from the symbol
/// decay and the Hoelder exponent of f.
pub fn symbol_function_integral(a: &Symbol, f: &TestFunction) -> Result<f64> {
    let kappa = f.kappa();
    let tol = (1e-16f64).powf(1.0 / kappa).clamp(1e-200, 1e-4);
    let reach = a.decay_radius(tol) + 0.5;
    let rule = quad::rule(16);
    if a.dim == 1 {
        let panels = (2.0 * reach / 0.25).ceil() as usize;
        let mut acc = 0.0;
        for p in 0..panels {
            let lo = -reach + 2.0 * reach * p as f64 / panels as f64;
            let hi = -reach + 2.0 * reach * (p + 1) as f64 / panels as f64;
            acc += rule.integrate(lo, hi, |xi| f.eval(a.eval1(xi)));
        }
        Ok(acc)
    } else {
        let panels = (2.0 * reach / 0.5).ceil() as usize;
        let mut xs = Vec::new();
        let mut ws = Vec::new();
        for p in 0..panels {
            let lo = -reach + 2.0 * reach * p as f64 / panels as f64;
            let hi = -reach + 2.0 * reach * (p + 1) as f64 / panels as f64;
            rule.extend_mapped(lo, hi, &mut xs, &mut ws);
        }
        let mut acc = 0.0;
        for (i, &x) in xs.iter().enumerate() {
            let mut inner = 0.0;
            for (j, &y) in xs.iter().enumerate() {
                inner += ws[j] * f.eval(a.eval2(x, y));
            }
            acc += ws[i] * inner;
        }
        Ok(acc)
    }
}

/// The smoothed (Weyl) trace (alpha / 2 pi)^d |region| Integral f(a(xi)) dxi.
pub fn trace_smoothed(
    a: &Symbol,
    f: &TestFunction,
    region: &Region,
    alpha: f64,
) -> Result<f64> {
    require_zero_at_zero(f)?;
    if a.dim != region.dim {
        return Err(Error::DimensionMismatch {
            expected: region.dim,
            got: a.dim,
        });
    }
    let integral = symbol_function_integral(a, f)?;
    Ok((alpha / TWO_PI).powi(a.dim as i32) * region.measure() * integral)
}

fn d_alpha_of_op(op: &TruncatedOperator, a: &Symbol, f: &TestFunction) -> Result<f64> {
    let trf = trace_f(op, f)?;
    // The discrete counterpart of the smoothed term uses the measured
    // weight sum so that linear symbols cancel exactly on the same grid.
    let integral = symbol_function_integral(a, f)?;
    let smooth = (op.alpha / TWO_PI).powi(op.dim as i32) * op.measured_measure * integral;
    Ok(trf - smooth)
}

/// Boundary deficit d_alpha = tr f(section) - smoothed trace, with a
/// resolution estimate from one 1.5x grid refinement. When `refine_check`
/// is set the refined value is the one reported.
pub fn d_alpha_trace(
    a: &Symbol,
    f: &TestFunction,
    region: &Region,
    alpha: f64,
    grid_density: f64,
    refine_check: bool,
) -> Result<SpectralTraceResult> {
    require_zero_at_zero(f)?;
    let op = build_operator(a, region, alpha, grid_density)?;
    let base = d_alpha_of_op(&op, a, f)?;
    // Refine upward when the eigensolver cap allows it, otherwise coarsen,
    // so a resolution estimate is always available.
    let scale_dim = |d: f64| -> usize {
        let h = grid_step(a, alpha, d);
        match region.dim {
            1 => region
                .intervals()
                .map(|cs| {
                    cs.iter()
                        .map(|(lo, hi)| (((hi - lo) / h).round() as usize).max(1))
                        .sum()
                })
                .unwrap_or(usize::MAX),
            _ => {
                let ([x0, y0], [x1, y1]) = region.bounding_box();
                // Upper bound: all bounding-box cells.
                ((((x1 - x0) / h).ceil()) * (((y1 - y0) / h).ceil())) as usize
            }
        }
    };
    let refined_density = grid_density * 1.5;
    let (other, other_is_finer) = if scale_dim(refined_density) <= SIZE_CAP {
        (
            d_alpha_of_op(&build_operator(a, region, alpha, refined_density)?, a, f)?,
            true,
        )
    } else {
        (
            d_alpha_of_op(
                &build_operator(a, region, alpha, grid_density / 1.5)?,
                a,
                f,
            )?,
            false,
        )
    };
    let resolution_estimate = (other - base).abs();
    let d_alpha = if refine_check && other_is_finer { other } else { base };
    Ok(SpectralTraceResult {
        alpha,
        n: op.points.len(),
        trace_f: trace_f(&op, f)?,
        trace_smoothed: trace_smoothed(a, f, region, alpha)?,
        d_alpha,
        resolution_estimate,
    })
}

/// Trace norm of the deficit operator f(section) - section_of(f o a):
/// the sum of absolute eigenvalues of the difference matrix.
pub fn d_alpha_nuclear_norm(
    a: &Symbol,
    f: &TestFunction,
    region: &Region,
    alpha: f64,
    grid_density: f64,
) -> Result<f64> {
    require_zero_at_zero(f)?;
    let op = build_operator(a, region, alpha, grid_density)?;
    let n = op.matrix.nrows();
    let (vals, vecs) = op
        .matrix
        .eigh(UPLO::Lower)
        .map_err(|e| Error::Eigen {
            n,
            detail: e.to_string(),
        })?;
    // f applied spectrally: V f(diag) V^T.
    let fvals: Array1<f64> = vals.mapv(|l| f.eval(l));
    let mut scaled = vecs.clone();
    for (j, mut col) in scaled.axis_iter_mut(ndarray::Axis(1)).enumerate() {
        col.mapv_inplace(|v| v * fvals[j]);
    }
    let f_of_m = scaled.dot(&vecs.t());

    // The composed symbol keeps the decay class; its section is built on
    // the identical grid by pinning the step.
    let composed = compose_symbol(a, f);
    let op2 = build_operator_with_step(&composed, region, alpha, grid_density, op.grid_spacing)?;
    let diff = &f_of_m - &op2.matrix;
    let dvals = sym_eigenvalues(&diff)?;
    Ok(dvals.iter().map(|v| v.abs()).sum())
}

/// The symbol f o a (same dimension and decay class as a).
pub fn compose_symbol(a: &Symbol, f: &TestFunction) -> Symbol {
    let sup = {
        // Coarse bound of |f| over the closed range of a.
        let mut m = 0.0f64;
        let steps = 200;
        for k in 0..=steps {
            let s = a.sup_norm_bound * k as f64 / steps as f64;
            m = m.max(f.eval(s).abs()).max(f.eval(-s).abs());
        }
        m
    };
    if a.dim == 1 {
        let ac = a.clone();
        let fc = f.clone();
        Symbol::new_1d(move |x| fc.eval(ac.eval1(x)), a.beta * f.kappa(), sup)
    } else {
        let ac = a.clone();
        let fc = f.clone();
        Symbol::new_2d(move |x, y| fc.eval(ac.eval2(x, y)), a.beta * f.kappa(), sup)
    }
}
