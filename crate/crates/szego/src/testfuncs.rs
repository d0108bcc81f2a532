//! Test functions f applied spectrally to truncated operators.
//!
//! Each function carries its singularity metadata: the finite set X where
//! C^2 smoothness fails, the Hoelder exponent gamma at those points, and
//! an optional support radius. The effective exponent kappa = min(gamma, 1)
//! controls how much symbol decay the coefficient integrals need.

use crate::{Error, Result};
use std::sync::Arc;

type Map = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Kind {
    Polynomial,
    Renyi,
    Power,
    TLog,
    Custom,
}

#[derive(Clone)]
pub struct TestFunction {
    eval: Map,
    deriv1: Option<Map>,
    deriv2: Option<Map>,
    pub singular_points: Vec<f64>,
    pub gamma: f64,
    pub support_radius: Option<f64>,
    pub kind: Kind,
}

impl TestFunction {
    pub fn custom(
        eval: impl Fn(f64) -> f64 + Send + Sync + 'static,
        deriv1: Option<Map>,
        deriv2: Option<Map>,
        singular_points: Vec<f64>,
        gamma: f64,
        support_radius: Option<f64>,
    ) -> Self {
        TestFunction {
            eval: Arc::new(eval),
            deriv1,
            deriv2,
            singular_points,
            gamma,
            support_radius,
            kind: Kind::Custom,
        }
    }

    pub fn eval(&self, t: f64) -> f64 {
        (self.eval)(t)
    }

    pub fn deriv1(&self, t: f64) -> Option<f64> {
        self.deriv1.as_ref().map(|d| d(t))
    }

    pub fn deriv2(&self, t: f64) -> Option<f64> {
        self.deriv2.as_ref().map(|d| d(t))
    }

    pub fn has_deriv2(&self) -> bool {
        self.deriv2.is_some()
    }

    /// Effective Hoelder exponent kappa = min(gamma, 1).
    pub fn kappa(&self) -> f64 {
        self.gamma.min(1.0)
    }

    /// Whether f is C^2 on all of R (no singular points).
    pub fn is_smooth(&self) -> bool {
        self.singular_points.is_empty()
    }

    /// f shifted by its value at zero, so the result vanishes at 0.
    pub fn shifted_to_zero(&self) -> TestFunction {
        let f0 = self.eval(0.0);
        let base = self.eval.clone();
        TestFunction {
            eval: Arc::new(move |t| base(t) - f0),
            deriv1: self.deriv1.clone(),
            deriv2: self.deriv2.clone(),
            singular_points: self.singular_points.clone(),
            gamma: self.gamma,
            support_radius: self.support_radius,
            kind: Kind::Custom,
        }
    }

    /// Localize around one singular point: f(t) * zeta((t - z)/radius),
    /// with a C^2 plateau cutoff equal to 1 on |t - z| <= radius/2 and 0
    /// outside |t - z| >= radius. The cutoff vanishes to third order at its
    /// outer edge, so any other singular point at distance >= radius is
    /// smoothed out of the product.
    pub fn split_at(&self, z: f64, radius: f64) -> Result<TestFunction> {
        if !(radius > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "split radius must be positive, got {radius}"
            )));
        }
        let f = self.eval.clone();
        let (d1, d2) = (self.deriv1.clone(), self.deriv2.clone());
        let eval = {
            let f = f.clone();
            move |t: f64| f(t) * plateau((t - z) / radius)
        };
        let deriv1 = match (&d1, &self.deriv1) {
            (Some(_), _) => {
                let f = f.clone();
                let d1 = d1.clone().unwrap();
                Some(Arc::new(move |t: f64| {
                    let v = (t - z) / radius;
                    d1(t) * plateau(v) + f(t) * plateau_d1(v) / radius
                }) as Map)
            }
            _ => None,
        };
        let deriv2 = match (&d2, &self.deriv1) {
            (Some(_), Some(_)) => {
                let d1 = self.deriv1.clone().unwrap();
                let d2 = d2.clone().unwrap();
                let f = f.clone();
                Some(Arc::new(move |t: f64| {
                    let v = (t - z) / radius;
                    d2(t) * plateau(v)
                        + 2.0 * d1(t) * plateau_d1(v) / radius
                        + f(t) * plateau_d2(v) / (radius * radius)
                }) as Map)
            }
            _ => None,
        };
        Ok(TestFunction {
            eval: Arc::new(eval),
            deriv1,
            deriv2,
            singular_points: vec![z],
            gamma: self.gamma,
            support_radius: Some(radius),
            kind: Kind::Custom,
        })
    }
}

/// C^2 plateau: 1 on |v| <= 1/2, 0 on |v| >= 1, quintic smoothstep between.
fn plateau(v: f64) -> f64 {
    let av = v.abs();
    if av <= 0.5 {
        1.0
    } else if av >= 1.0 {
        0.0
    } else {
        let u = 2.0 * (1.0 - av);
        u * u * u * (10.0 - 15.0 * u + 6.0 * u * u)
    }
}

fn plateau_d1(v: f64) -> f64 {
    let av = v.abs();
    if av <= 0.5 || av >= 1.0 {
        0.0
    } else {
        let u = 2.0 * (1.0 - av);
        let ds = 30.0 * u * u * (1.0 - u) * (1.0 - u);
        -2.0 * v.signum() * ds
    }
}

fn plateau_d2(v: f64) -> f64 {
    let av = v.abs();
    if av <= 0.5 || av >= 1.0 {
        0.0
    } else {
        let u = 2.0 * (1.0 - av);
        let d2s = 60.0 * u * (1.0 - u) * (1.0 - 2.0 * u);
        4.0 * d2s
    }
}

/// t -> t^p with exact derivatives.
pub fn monomial(p: u32) -> Result<TestFunction> {
    if p < 1 {
        return Err(Error::InvalidParameter(
            "monomial degree must be at least 1".into(),
        ));
    }
    let pf = p as f64;
    Ok(TestFunction {
        eval: Arc::new(move |t| t.powi(p as i32)),
        deriv1: Some(Arc::new(move |t| pf * t.powi(p as i32 - 1))),
        deriv2: Some(Arc::new(move |t| {
            if p >= 2 {
                pf * (pf - 1.0) * t.powi(p as i32 - 2)
            } else {
                0.0
            }
        })),
        singular_points: vec![],
        gamma: pf,
        support_radius: None,
        kind: Kind::Polynomial,
    })
}

/// Renyi entropy function: for gamma != 1
/// eta_gamma(t) = log(t^gamma + (1-t)^gamma) / (1 - gamma) on (0, 1),
/// and the von Neumann limit eta_1(t) = -t log t - (1-t) log(1-t);
/// zero outside (0, 1). Stored Hoelder exponent is min(gamma, 1), with the
/// stand-in 0.99 at gamma = 1.
pub fn renyi_eta(index: f64) -> Result<TestFunction> {
    if !(index > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "Renyi index must be positive, got {index}"
        )));
    }
    let g = index;
    let inside = |t: f64| t > 0.0 && t < 1.0;
    let (eval, deriv1, deriv2): (Map, Map, Map) = if (g - 1.0).abs() < 1e-12 {
        (
            Arc::new(move |t: f64| {
                if inside(t) {
                    -t * t.ln() - (1.0 - t) * (-t).ln_1p()
                } else {
                    0.0
                }
            }),
            Arc::new(move |t: f64| {
                if inside(t) {
                    ((1.0 - t) / t).ln()
                } else {
                    0.0
                }
            }),
            Arc::new(move |t: f64| {
                if inside(t) {
                    -1.0 / (t * (1.0 - t))
                } else {
                    0.0
                }
            }),
        )
    } else {
        (
            Arc::new(move |t: f64| {
                if inside(t) {
                    (t.powf(g) + (1.0 - t).powf(g)).ln() / (1.0 - g)
                } else {
                    0.0
                }
            }),
            Arc::new(move |t: f64| {
                if inside(t) {
                    let s = t.powf(g) + (1.0 - t).powf(g);
                    g * (t.powf(g - 1.0) - (1.0 - t).powf(g - 1.0)) / ((1.0 - g) * s)
                } else {
                    0.0
                }
            }),
            Arc::new(move |t: f64| {
                if inside(t) {
                    let w = 1.0 - t;
                    let s = t.powf(g) + w.powf(g);
                    let s1 = t.powf(g - 1.0) - w.powf(g - 1.0);
                    let s2 = (g - 1.0) * (t.powf(g - 2.0) + w.powf(g - 2.0));
                    g * (s2 * s - g * s1 * s1) / ((1.0 - g) * s * s)
                } else {
                    0.0
                }
            }),
        )
    };
    Ok(TestFunction {
        eval,
        deriv1: Some(deriv1),
        deriv2: Some(deriv2),
        singular_points: vec![0.0, 1.0],
        gamma: if (g - 1.0).abs() < 1e-12 {
            0.99
        } else {
            g.min(1.0)
        },
        support_radius: Some(1.0),
        kind: Kind::Renyi,
    })
}

/// t -> M |t|^gamma.
pub fn power_abs(gamma: f64, m: f64) -> Result<TestFunction> {
    if !(gamma > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "power exponent must be positive, got {gamma}"
        )));
    }
    Ok(TestFunction {
        eval: Arc::new(move |t| m * t.abs().powf(gamma)),
        deriv1: Some(Arc::new(move |t| {
            if t == 0.0 {
                0.0
            } else {
                m * gamma * t.signum() * t.abs().powf(gamma - 1.0)
            }
        })),
        deriv2: Some(Arc::new(move |t| {
            if t == 0.0 {
                0.0
            } else {
                m * gamma * (gamma - 1.0) * t.abs().powf(gamma - 2.0)
            }
        })),
        singular_points: vec![0.0],
        gamma,
        support_radius: None,
        kind: Kind::Power,
    })
}

/// t -> -t log|t|, continuously extended by 0 at t = 0.
pub fn t_log_abs() -> TestFunction {
    TestFunction {
        eval: Arc::new(|t| if t == 0.0 { 0.0 } else { -t * t.abs().ln() }),
        deriv1: Some(Arc::new(|t| {
            if t == 0.0 {
                0.0
            } else {
                -t.abs().ln() - 1.0
            }
        })),
        deriv2: Some(Arc::new(|t| if t == 0.0 { 0.0 } else { -1.0 / t })),
        singular_points: vec![0.0],
        gamma: 0.99,
        support_radius: None,
        kind: Kind::TLog,
    }
}

/// Supremum estimate of the weighted norm
/// max_{0<=k<=n} sup_{x != x0} |f^(k)(x)| |x - x0|^{k - gamma}
/// over a geometric grid clustered at the singular point.
#[derive(Debug, Clone, Copy)]
pub struct HoelderNorm {
    pub value: f64,
    /// Ratio of the last two refinement estimates; close to 1 when stable.
    pub refinement_ratio: f64,
    /// Smallest sampled distance from the singular point.
    pub min_offset: f64,
    pub samples: usize,
}

pub fn hoelder_norm(f: &TestFunction, n: u32) -> Result<HoelderNorm> {
    if n > 2 {
        return Err(Error::InvalidParameter(format!(
            "norm order must be 0, 1 or 2, got {n}"
        )));
    }
    if f.singular_points.len() > 1 {
        return Err(Error::InvalidParameter(
            "function has several singular points; localize with split_at first".into(),
        ));
    }
    if n >= 1 && f.deriv1.is_none() || n >= 2 && f.deriv2.is_none() {
        return Err(Error::MissingDerivative { op: "hoelder_norm" });
    }
    let x0 = f.singular_points.first().copied().unwrap_or(0.0);
    let r = f.support_radius.unwrap_or(1.0);
    let gamma = f.gamma;

    let term = |k: u32, x: f64| -> f64 {
        let d = match k {
            0 => f.eval(x),
            1 => f.deriv1(x).unwrap(),
            _ => f.deriv2(x).unwrap(),
        };
        d.abs() * (x - x0).abs().powf(k as f64 - gamma)
    };

    // Each refinement level doubles the octave depth; an exponent mismatch
    // shows up as unbounded growth of the deepest samples.
    let mut estimates = [0.0f64; 3];
    let mut samples = 0usize;
    let mut min_offset = r;
    for (level, est) in estimates.iter_mut().enumerate() {
        // Deep ladders: exponents within 0.01 of critical move the supremum
        // out to offsets near 2^-150, which shallow grids misreport.
        let octaves = 60 * (level + 1);
        let per_octave = 16;
        let mut best = 0.0f64;
        for j in 0..(octaves * per_octave) {
            let off = r * 2f64.powf(-(j as f64) / per_octave as f64);
            min_offset = min_offset.min(off);
            for x in [x0 - off, x0 + off] {
                for k in 0..=n {
                    let v = term(k, x);
                    if v.is_finite() {
                        best = best.max(v);
                    }
                }
                samples += 1;
            }
        }
        *est = best;
    }
    let ratio = if estimates[1] == 0.0 {
        if estimates[2] == 0.0 {
            1.0
        } else {
            f64::INFINITY
        }
    } else {
        estimates[2] / estimates[1]
    };
    if !(ratio <= 1.05) {
        return Err(Error::NotStabilized { ratio });
    }
    Ok(HoelderNorm {
        value: estimates[2],
        refinement_ratio: ratio,
        min_offset,
        samples,
    })
}

/// Parse the CLI test-function syntax:
/// `poly:p`, `renyi:gamma`, `abs:gamma`, or `tlog`.
pub fn parse_test_function(text: &str) -> Result<TestFunction> {
    if text == "tlog" {
        return Ok(t_log_abs());
    }
    if let Some(rest) = text.strip_prefix("poly:") {
        let p: u32 = rest.trim().parse().map_err(|_| {
            Error::InvalidParameter(format!("bad polynomial degree in {text:?}"))
        })?;
        return monomial(p);
    }
    if let Some(rest) = text.strip_prefix("renyi:") {
        let g: f64 = rest.trim().parse().map_err(|_| {
            Error::InvalidParameter(format!("bad Renyi index in {text:?}"))
        })?;
        return renyi_eta(g);
    }
    if let Some(rest) = text.strip_prefix("abs:") {
        let g: f64 = rest.trim().parse().map_err(|_| {
            Error::InvalidParameter(format!("bad power exponent in {text:?}"))
        })?;
        return power_abs(g, 1.0);
    }
    Err(Error::InvalidParameter(format!(
        "unknown test function '{text}'; expected poly:p | renyi:gamma | abs:gamma | tlog"
    )))
}
