//! Gauss-Legendre panel quadrature shared by the coefficient and operator
//! modules.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

/// A Gauss-Legendre rule on the reference interval [-1, 1].
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    /// Nodes and weights by Newton iteration on the Legendre polynomial.
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "rule order must be positive");
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let m = n.div_ceil(2);
        for k in 0..m {
            // Tricomi initial guess, accurate enough for Newton.
            let mut x = (std::f64::consts::PI * (k as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre_and_deriv(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-15 {
                    let (_, d2) = legendre_and_deriv(n, x);
                    dp = d2;
                    break;
                }
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[k] = -x;
            nodes[n - 1 - k] = x;
            weights[k] = w;
            weights[n - 1 - k] = w;
        }
        if n % 2 == 1 {
            nodes[n / 2] = 0.0;
            let (_, d) = legendre_and_deriv(n, 0.0);
            weights[n / 2] = 2.0 / (d * d);
        }
        GaussLegendre { nodes, weights }
    }

    /// Integrate f over [a, b] with this rule.
    pub fn integrate<F: FnMut(f64) -> f64>(&self, a: f64, b: f64, mut f: F) -> f64 {
        let c = 0.5 * (a + b);
        let h = 0.5 * (b - a);
        let mut acc = 0.0;
        for (&x, &w) in self.nodes.iter().zip(&self.weights) {
            acc += w * f(c + h * x);
        }
        acc * h
    }

    /// Integrate f over consecutive panels given by breakpoints.
    pub fn integrate_panels<F: FnMut(f64) -> f64>(&self, breaks: &[f64], mut f: F) -> f64 {
        let mut acc = 0.0;
        for pair in breaks.windows(2) {
            acc += self.integrate(pair[0], pair[1], &mut f);
        }
        acc
    }

    /// Scaled nodes and weights for [a, b], appended to out buffers.
    pub fn extend_mapped(&self, a: f64, b: f64, xs: &mut Vec<f64>, ws: &mut Vec<f64>) {
        let c = 0.5 * (a + b);
        let h = 0.5 * (b - a);
        for (&x, &w) in self.nodes.iter().zip(&self.weights) {
            xs.push(c + h * x);
            ws.push(w * h);
        }
    }
}

fn legendre_and_deriv(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    if n == 0 {
        return (1.0, 0.0);
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

static RULES: OnceLock<Mutex<HashMap<usize, Arc<GaussLegendre>>>> = OnceLock::new();

/// Cached rule lookup; orders are reused heavily across panels.
pub fn rule(order: usize) -> Arc<GaussLegendre> {
    let map = RULES.get_or_init(|| Mutex::new(HashMap::new()));
    let mut guard = map.lock().unwrap();
    guard
        .entry(order)
        .or_insert_with(|| Arc::new(GaussLegendre::new(order)))
        .clone()
}

/// Breakpoints of a geometric subdivision of [a, b] refined toward the
/// chosen endpoints. `levels` halvings leave a shortest panel of length
/// (b-a)/2^levels; the interior panel is kept as one piece.
pub fn graded_breaks(a: f64, b: f64, toward_a: bool, toward_b: bool, levels: usize) -> Vec<f64> {
    let len = b - a;
    let mut cuts = vec![a, b];
    if toward_a {
        for k in 1..=levels {
            cuts.push(a + len * 0.5f64.powi(k as i32));
        }
    }
    if toward_b {
        for k in 1..=levels {
            cuts.push(b - len * 0.5f64.powi(k as i32));
        }
    }
    cuts.sort_by(|x, y| x.partial_cmp(y).unwrap());
    cuts.dedup_by(|x, y| (*x - *y).abs() < 1e-300);
    // Guard against crossings when refining both ends of a short interval.
    cuts.retain(|&c| (a..=b).contains(&c));
    cuts.dedup();
    cuts
}
