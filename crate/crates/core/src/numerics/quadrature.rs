//! Gauss-Legendre rules and Legendre-node barycentric interpolation.

use std::f64::consts::PI;

/// Nodes (ascending) and weights of an `n`-point rule on `[a, b]`.
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    /// Barycentric weights for interpolation through `nodes`.
    pub bary: Vec<f64>,
}

impl GaussLegendre {
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "Gauss-Legendre rule needs at least one node");
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let m = n.div_ceil(2);
        for i in 0..m {
            // Tricomi initial guess, then Newton on P_n.
            let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre_with_derivative(n, x);
            if d != 0.0 {
                dp = d;
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        if n % 2 == 1 {
            nodes[n / 2] = 0.0;
        }
        let bary = nodes
            .iter()
            .zip(&weights)
            .enumerate()
            .map(|(j, (&x, &w))| {
                let s = ((1.0 - x * x) * w).sqrt();
                if j % 2 == 0 {
                    s
                } else {
                    -s
                }
            })
            .collect();
        Self {
            nodes,
            weights,
            bary,
        }
    }

    /// The same rule mapped affinely onto `[a, b]`.
    pub fn on_interval(n: usize, a: f64, b: f64) -> Self {
        let mut rule = Self::new(n);
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        for x in rule.nodes.iter_mut() {
            *x = mid + half * *x;
        }
        for w in rule.weights.iter_mut() {
            *w *= half;
        }
        // barycentric weights are scale invariant up to a common factor
        rule
    }

    pub fn integrate<F: Fn(f64) -> f64>(&self, f: F) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(x))
            .sum()
    }

    /// Evaluates the polynomial interpolant of `values` (given at `nodes`) at `x`.
    pub fn interpolate(&self, values: &[f64], x: f64) -> f64 {
        barycentric(&self.nodes, &self.bary, values, x)
    }
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Second-form barycentric interpolation.
pub fn barycentric(nodes: &[f64], weights: &[f64], values: &[f64], x: f64) -> f64 {
    let mut num = 0.0;
    let mut den = 0.0;
    for ((&xj, &wj), &fj) in nodes.iter().zip(weights).zip(values) {
        let dx = x - xj;
        if dx == 0.0 {
            return fj;
        }
        let t = wj / dx;
        num += t * fj;
        den += t;
    }
    num / den
}
