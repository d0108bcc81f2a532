//! Smooth real-valued symbols a(xi) on R^d (d = 1, 2) with decay metadata.
//!
//! A symbol is the Fourier-multiplier function defining the operator
//! op_alpha(a); everything downstream (coefficient quadrature, kernel
//! assembly, tail-error models) consumes symbols through this module.

use crate::{Error, Result};
use std::sync::Arc;

type Map1 = Arc<dyn Fn(f64) -> f64 + Send + Sync>;
type Map2 = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;

#[derive(Clone)]
enum Eval {
    One(Map1),
    Two(Map2),
}

/// A smooth bounded symbol with power-decay metadata.
///
/// `beta` is the decay exponent: |a(xi)| <= decay_constant * <xi>^-beta,
/// with the constant measured on a sample grid at construction. Symbols
/// that decay faster than any power store a large stand-in exponent.
#[derive(Clone)]
pub struct Symbol {
    pub dim: usize,
    eval: Eval,
    pub beta: f64,
    pub sup_norm_bound: f64,
    fourier: Option<Eval>,
    pub decay_constant: f64,
}

impl Symbol {
    /// Build a 1-d symbol from a closure; measures the decay constant.
    pub fn new_1d<F>(eval: F, beta: f64, sup_norm_bound: f64) -> Self
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        let eval = Eval::One(Arc::new(eval));
        let decay_constant = measure_decay_constant(&eval, 1, beta);
        Symbol {
            dim: 1,
            eval,
            beta,
            sup_norm_bound,
            fourier: None,
            decay_constant,
        }
    }

    /// Build a 2-d symbol from a closure; measures the decay constant.
    pub fn new_2d<F>(eval: F, beta: f64, sup_norm_bound: f64) -> Self
    where
        F: Fn(f64, f64) -> f64 + Send + Sync + 'static,
    {
        let eval = Eval::Two(Arc::new(eval));
        let decay_constant = measure_decay_constant(&eval, 2, beta);
        Symbol {
            dim: 2,
            eval,
            beta,
            sup_norm_bound,
            fourier: None,
            decay_constant,
        }
    }

    pub fn eval(&self, xi: &[f64]) -> f64 {
        match &self.eval {
            Eval::One(f) => f(xi[0]),
            Eval::Two(f) => f(xi[0], xi[1]),
        }
    }

    /// Evaluate a 1-d symbol.
    pub fn eval1(&self, xi: f64) -> f64 {
        match &self.eval {
            Eval::One(f) => f(xi),
            Eval::Two(_) => panic!("eval1 called on a 2-d symbol"),
        }
    }

    /// Evaluate a 2-d symbol.
    pub fn eval2(&self, x: f64, y: f64) -> f64 {
        match &self.eval {
            Eval::One(_) => panic!("eval2 called on a 1-d symbol"),
            Eval::Two(f) => f(x, y),
        }
    }

    /// Closed-form Fourier transform Integral e^{i xi.s} a(xi) dxi, when known.
    pub fn fourier1(&self, s: f64) -> Option<f64> {
        match &self.fourier {
            Some(Eval::One(f)) => Some(f(s)),
            _ => None,
        }
    }

    pub fn fourier2(&self, s1: f64, s2: f64) -> Option<f64> {
        match &self.fourier {
            Some(Eval::Two(f)) => Some(f(s1, s2)),
            _ => None,
        }
    }

    pub fn has_fourier(&self) -> bool {
        self.fourier.is_some()
    }

    /// 1-d restriction t -> a(base + t * dir) along a unit direction.
    pub fn slice(&self, base: [f64; 2], dir: [f64; 2]) -> Symbol {
        assert_eq!(self.dim, 2, "slice requires a 2-d symbol");
        let parent = self.clone();
        let eval = move |t: f64| parent.eval2(base[0] + t * dir[0], base[1] + t * dir[1]);
        // The slice inherits the parent's decay data; <xi> along the line is
        // dominated by <(base, dir) offset>, which the constant absorbs.
        let mut s = Symbol::new_1d(eval, self.beta, self.sup_norm_bound);
        s.decay_constant = s.decay_constant.max(self.decay_constant);
        s
    }

    /// Pointwise scaling c * a.
    pub fn scaled(&self, c: f64) -> Symbol {
        let inner = self.clone();
        let eval = match &self.eval {
            Eval::One(f) => {
                let f = f.clone();
                Eval::One(Arc::new(move |x| c * f(x)))
            }
            Eval::Two(f) => {
                let f = f.clone();
                Eval::Two(Arc::new(move |x, y| c * f(x, y)))
            }
        };
        let fourier = self.fourier.as_ref().map(|ft| match ft {
            Eval::One(f) => {
                let f = f.clone();
                Eval::One(Arc::new(move |s| c * f(s)) as Map1)
            }
            Eval::Two(f) => {
                let f = f.clone();
                Eval::Two(Arc::new(move |s1, s2| c * f(s1, s2)) as Map2)
            }
        });
        Symbol {
            dim: inner.dim,
            eval,
            beta: inner.beta,
            sup_norm_bound: c.abs() * inner.sup_norm_bound,
            fourier,
            decay_constant: c.abs() * inner.decay_constant,
        }
    }

    /// Smallest radius beyond which |a| stays under tol on a scan grid.
    pub fn decay_radius(&self, tol: f64) -> f64 {
        let mut last_above = 0.0f64;
        let mut r = 0.0f64;
        while r <= 40.0 {
            let v = match self.dim {
                1 => self.eval1(r).abs().max(self.eval1(-r).abs()),
                _ => {
                    let d = r / std::f64::consts::SQRT_2;
                    self.eval2(r, 0.0)
                        .abs()
                        .max(self.eval2(0.0, r).abs())
                        .max(self.eval2(d, d).abs())
                        .max(self.eval2(-d, d).abs())
                }
            };
            if v >= tol {
                last_above = r;
            }
            r += 0.125;
        }
        last_above + 0.25
    }
}

fn measure_decay_constant(eval: &Eval, dim: usize, beta: f64) -> f64 {
    let mut c = 0.0f64;
    let mut r = 0.0f64;
    while r <= 20.0 {
        let v = match (eval, dim) {
            (Eval::One(f), _) => f(r).abs().max(f(-r).abs()),
            (Eval::Two(f), _) => {
                let d = r / std::f64::consts::SQRT_2;
                f(r, 0.0).abs().max(f(0.0, r).abs()).max(f(d, d).abs())
            }
        };
        let bracket = (1.0 + r * r).sqrt();
        c = c.max(v * bracket.powf(beta));
        r += 0.05;
    }
    c
}

/// Stand-in decay exponent for symbols decaying faster than any power;
/// consumed only by tail-truncation error models.
pub const SUPERPOLY_BETA: f64 = 100.0;

/// Reference symbol a(xi) = exp(-|xi|^2) with closed-form Fourier data.
pub fn gaussian_symbol(dim: usize) -> Result<Symbol> {
    match dim {
        1 => {
            let mut s = Symbol::new_1d(|x| (-x * x).exp(), SUPERPOLY_BETA, 1.0);
            let pi = std::f64::consts::PI;
            s.fourier = Some(Eval::One(Arc::new(move |t: f64| {
                pi.sqrt() * (-t * t / 4.0).exp()
            })));
            Ok(s)
        }
        2 => {
            let mut s = Symbol::new_2d(|x, y| (-(x * x + y * y)).exp(), SUPERPOLY_BETA, 1.0);
            let pi = std::f64::consts::PI;
            s.fourier = Some(Eval::Two(Arc::new(move |s1: f64, s2: f64| {
                pi * (-(s1 * s1 + s2 * s2) / 4.0).exp()
            })));
            Ok(s)
        }
        other => Err(Error::InvalidParameter(format!(
            "gaussian symbol supports dim 1 or 2, got {other}"
        ))),
    }
}

/// Parameters of the Fermi occupation symbol 1/(1 + exp((h - mu)/T)).
#[derive(Clone)]
pub struct FermiParams {
    pub temperature: f64,
    pub mu: f64,
    pub hamiltonian: Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>,
    /// Growth exponents of the Hamiltonian: h(xi) >= c |xi|^beta1 for large xi.
    pub beta1: f64,
    pub beta2: f64,
    pub dim: usize,
}

impl FermiParams {
    /// The free Hamiltonian h(xi) = |xi|^2.
    pub fn xi_squared(temperature: f64, mu: f64, dim: usize) -> Self {
        FermiParams {
            temperature,
            mu,
            hamiltonian: Arc::new(|xi: &[f64]| xi.iter().map(|x| x * x).sum()),
            beta1: 2.0,
            beta2: 2.0,
            dim,
        }
    }
}

/// Fermi symbol a(xi) = 1/(1 + exp((h(xi) - mu)/T)).
///
/// The evaluation is overflow-safe: large positive exponents underflow to 0
/// and never produce NaN.
pub fn fermi_symbol(p: &FermiParams) -> Result<Symbol> {
    if !(p.temperature > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "Fermi temperature must be positive, got {}",
            p.temperature
        )));
    }
    if p.dim != 1 && p.dim != 2 {
        return Err(Error::InvalidParameter(format!(
            "Fermi symbol supports dim 1 or 2, got {}",
            p.dim
        )));
    }
    // Growth check: h must strictly increase between two sample rings and
    // end up positive, so the symbol eventually decays.
    let h = p.hamiltonian.clone();
    let at_ring = |r: f64| match p.dim {
        1 => h(&[r]).min(h(&[-r])),
        _ => h(&[r, 0.0]).min(h(&[0.0, r])),
    };
    let (inner, outer) = (at_ring(20.0), at_ring(40.0));
    if !(outer > inner && outer > 0.0) {
        return Err(Error::InvalidParameter(
            "Hamiltonian does not grow between |xi| = 20 and 40".into(),
        ));
    }
    let (t, mu) = (p.temperature, p.mu);
    let occ = move |hval: f64| {
        let x = (hval - mu) / t;
        // 1/(1 + e^x): for x >= 0 rewrite via e^-x to keep the large-x
        // branch free of inf/inf forms.
        if x >= 0.0 {
            let e = (-x).exp();
            e / (1.0 + e)
        } else {
            1.0 / (1.0 + x.exp())
        }
    };
    let sym = match p.dim {
        1 => {
            let h = p.hamiltonian.clone();
            Symbol::new_1d(move |x| occ(h(&[x])), SUPERPOLY_BETA, 1.0)
        }
        _ => {
            let h = p.hamiltonian.clone();
            Symbol::new_2d(move |x, y| occ(h(&[x, y])), SUPERPOLY_BETA, 1.0)
        }
    };
    Ok(sym)
}

/// Linear family a_lambda = a0 + lambda (a1 - a0); equals a0 at lambda = 0.
pub fn symbol_family_interpolate(a0: &Symbol, a1: &Symbol, lambda: f64) -> Result<Symbol> {
    if a0.dim != a1.dim {
        return Err(Error::DimensionMismatch {
            expected: a0.dim,
            got: a1.dim,
        });
    }
    if !(0.0..=1.0).contains(&lambda) {
        return Err(Error::InvalidParameter(format!(
            "interpolation parameter must lie in [0, 1], got {lambda}"
        )));
    }
    let (l0, l1) = (a0.clone(), a1.clone());
    let sup = l0.sup_norm_bound.max(l1.sup_norm_bound);
    let beta = l0.beta.min(l1.beta);
    let mut s = match a0.dim {
        1 => Symbol::new_1d(
            move |x| {
                let v0 = l0.eval1(x);
                v0 + lambda * (l1.eval1(x) - v0)
            },
            beta,
            sup,
        ),
        _ => Symbol::new_2d(
            move |x, y| {
                let v0 = l0.eval2(x, y);
                v0 + lambda * (l1.eval2(x, y) - v0)
            },
            beta,
            sup,
        ),
    };
    // The Fourier transform is linear in the symbol.
    if a0.has_fourier() && a1.has_fourier() {
        let (f0, f1) = (a0.clone(), a1.clone());
        s.fourier = match a0.dim {
            1 => Some(Eval::One(Arc::new(move |t: f64| {
                let v0 = f0.fourier1(t).unwrap();
                v0 + lambda * (f1.fourier1(t).unwrap() - v0)
            }))),
            _ => Some(Eval::Two(Arc::new(move |u: f64, v: f64| {
                let v0 = f0.fourier2(u, v).unwrap();
                v0 + lambda * (f1.fourier2(u, v).unwrap() - v0)
            }))),
        };
    }
    Ok(s)
}
