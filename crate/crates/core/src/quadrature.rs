//! Gauss–Legendre rules and a globally adaptive panel integrator.
//!
//! Every norm, row integral and dispersion integral in the crate goes through
//! [`integrate`] / [`integrate_breaks`]. The Nyström discretization uses
//! [`GaussLegendre`] directly with fixed composite panels.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};

/// An `n`-point Gauss–Legendre rule on `[-1, 1]`.
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussLegendre {
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "Gauss-Legendre rule needs at least one node");
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let nf = n as f64;
        // roots are symmetric; Newton on P_n from the Tricomi initial guess
        for i in 0..(n + 1) / 2 {
            let k = i as f64 + 1.0;
            let mut x = (std::f64::consts::PI * (k - 0.25) / (nf + 0.5)).cos();
            let mut dp = 1.0;
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
            dp = if d != 0.0 { d } else { dp };
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        if n % 2 == 1 {
            nodes[n / 2] = 0.0;
        }
        Self { nodes, weights }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Nodes and weights mapped onto `[a, b]`.
    pub fn panel(&self, a: f64, b: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(move |(&x, &w)| (mid + half * x, half * w))
    }

    pub fn integrate<F: Fn(f64) -> f64>(&self, a: f64, b: f64, f: F) -> f64 {
        self.panel(a, b).map(|(x, w)| w * f(x)).sum()
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

/// Stopping rule for the adaptive integrator.
#[derive(Debug, Clone, Copy)]
pub struct Tolerance {
    pub rel: f64,
    pub abs: f64,
    pub max_panels: usize,
}

impl Tolerance {
    pub fn relative(rel: f64) -> Self {
        Self {
            rel,
            abs: 0.0,
            max_panels: 50_000,
        }
    }

    pub fn with_abs(mut self, abs: f64) -> Self {
        self.abs = abs;
        self
    }
}

impl Default for Tolerance {
    fn default() -> Self {
        Self::relative(1e-10)
    }
}

#[derive(Debug, Clone, Copy)]
struct Panel {
    a: f64,
    b: f64,
    value: f64,
    abs_value: f64,
    error: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.error.total_cmp(&other.error) == Ordering::Equal
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

const PANEL_ORDER: usize = 10;

thread_local! {
    static PANEL_RULE: GaussLegendre = GaussLegendre::new(PANEL_ORDER);
}

fn eval_panel<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> Result<Panel> {
    PANEL_RULE.with(|rule| {
        let m = 0.5 * (a + b);
        let mut whole = 0.0;
        let mut halves = 0.0;
        let mut abs_value = 0.0;
        for (x, w) in rule.panel(a, b) {
            whole += w * f(x);
        }
        for (lo, hi) in [(a, m), (m, b)] {
            for (x, w) in rule.panel(lo, hi) {
                let fx = f(x);
                halves += w * fx;
                abs_value += w * fx.abs();
            }
        }
        if !halves.is_finite() || !whole.is_finite() {
            return Err(Error::Domain(format!(
                "integrand is not finite on [{a}, {b}]"
            )));
        }
        Ok(Panel {
            a,
            b,
            value: halves,
            abs_value,
            error: (whole - halves).abs(),
        })
    })
}

/// Globally adaptive integral of `f` over `[a, b]`.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: Tolerance) -> Result<f64> {
    integrate_breaks(f, &[a, b], tol)
}

/// Adaptive integral over consecutive intervals `[p0, p1], [p1, p2], ...`.
///
/// Break points should be placed at kinks and discontinuities of `f`.
pub fn integrate_breaks<F: Fn(f64) -> f64>(f: F, points: &[f64], tol: Tolerance) -> Result<f64> {
    let mut heap = BinaryHeap::new();
    for w in points.windows(2) {
        if w[1] > w[0] {
            heap.push(eval_panel(&f, w[0], w[1])?);
        }
    }
    loop {
        let (value, abs_value, error) = heap.iter().fold((0.0, 0.0, 0.0), |acc, p| {
            (acc.0 + p.value, acc.1 + p.abs_value, acc.2 + p.error)
        });
        let target = tol
            .abs
            .max(tol.rel * value.abs())
            .max(64.0 * f64::EPSILON * abs_value);
        if error <= target {
            return Ok(value);
        }
        if heap.len() >= tol.max_panels {
            return Err(Error::NotConverged {
                what: "adaptive quadrature",
                detail: format!("value {value:e}, error estimate {error:e} after {} panels", heap.len()),
            });
        }
        let worst = heap.pop().expect("non-empty panel set");
        let m = 0.5 * (worst.a + worst.b);
        if m <= worst.a || m >= worst.b {
            // panel width at machine resolution; accept what we have
            heap.push(Panel { error: 0.0, ..worst });
            continue;
        }
        heap.push(eval_panel(&f, worst.a, m)?);
        heap.push(eval_panel(&f, m, worst.b)?);
    }
}

/// Integral over `[a, ∞)` via `r = a + scale·t/(1 − t)`.
///
/// The integrand must evaluate to a finite number (typically zero) for huge
/// arguments.
pub fn integrate_to_infinity<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    scale: f64,
    tol: Tolerance,
) -> Result<f64> {
    let mapped = |t: f64| {
        let s = 1.0 - t;
        let fx = f(a + scale * t / s);
        if fx == 0.0 {
            0.0
        } else {
            fx * scale / (s * s)
        }
    };
    integrate(mapped, 0.0, 1.0, tol)
}

/// Adaptive integral over the break points followed by `[last, ∞)`.
pub fn integrate_half_line<F: Fn(f64) -> f64>(
    f: F,
    points: &[f64],
    tail_scale: f64,
    tol: Tolerance,
) -> Result<f64> {
    let head = if points.len() >= 2 {
        integrate_breaks(&f, points, tol)?
    } else {
        0.0
    };
    let start = *points.last().unwrap_or(&0.0);
    let tail = integrate_to_infinity(&f, start, tail_scale, tol.with_abs(tol.abs.max(tol.rel * head.abs())))?;
    Ok(head + tail)
}
