//! One-dimensional quadrature building blocks.

use std::f64::consts::PI;
use std::ops::{Add, Mul, Sub};

use crate::error::{Error, Result};

/// Gauss-Legendre nodes and weights on [-1, 1].
#[derive(Clone, Debug)]
pub struct GaussLegendre {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussLegendre {
    /// Nodes by Newton iteration on P_n from the Chebyshev-like initial guess.
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "Gauss-Legendre order must be at least 1");
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let m = n.div_ceil(2);
        for i in 0..m {
            let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() <= 1e-16 * x.abs().max(1.0) {
                    let (_, d) = legendre_with_derivative(n, x);
                    dp = d;
                    break;
                }
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
        GaussLegendre { nodes, weights }
    }

    pub fn order(&self) -> usize {
        self.nodes.len()
    }

    /// (node, weight) pairs mapped onto [a, b].
    pub fn mapped(&self, a: f64, b: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(move |(&x, &w)| (mid + half * x, half * w))
    }

    pub fn integrate<T, F>(&self, a: f64, b: f64, mut f: F) -> T
    where
        T: Copy + Add<Output = T> + Mul<f64, Output = T> + Default,
        F: FnMut(f64) -> T,
    {
        self.mapped(a, b)
            .fold(T::default(), |acc, (x, w)| acc + f(x) * w)
    }

    /// Composite rule over `panels` equal sub-intervals.
    pub fn composite<T, F>(&self, a: f64, b: f64, panels: usize, mut f: F) -> T
    where
        T: Copy + Add<Output = T> + Mul<f64, Output = T> + Default,
        F: FnMut(f64) -> T,
    {
        let h = (b - a) / panels as f64;
        (0..panels).fold(T::default(), |acc, k| {
            let lo = a + h * k as f64;
            let hi = if k + 1 == panels { b } else { lo + h };
            acc + self.integrate(lo, hi, &mut f)
        })
    }
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    if n == 0 {
        return (1.0, 0.0);
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Geometrically growing panel boundaries 0, h, 2h, 4h, ... clipped at `end`.
pub fn geometric_breaks(first: f64, end: f64) -> Vec<f64> {
    let mut breaks = vec![0.0];
    let mut w = first.min(end);
    let mut x = 0.0;
    while x < end {
        x = (x + w).min(end);
        breaks.push(x);
        w *= 2.0;
    }
    breaks
}

/// Adaptive Simpson over any vector-like value type. `norm` measures the
/// local error estimate; refinement stops when it drops below `tol`.
pub fn adaptive_simpson<T, F, N>(f: &mut F, a: f64, b: f64, tol: f64, max_depth: u32, norm: &N) -> Result<T>
where
    T: Copy + Add<Output = T> + Sub<Output = T> + Mul<f64, Output = T>,
    F: FnMut(f64) -> T,
    N: Fn(T) -> f64,
{
    let fa = f(a);
    let fb = f(b);
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = (fa + fm * 4.0 + fb) * ((b - a) / 6.0);
    simpson_step(f, a, b, fa, fm, fb, whole, tol, max_depth, norm)
}

#[allow(clippy::too_many_arguments)]
fn simpson_step<T, F, N>(
    f: &mut F,
    a: f64,
    b: f64,
    fa: T,
    fm: T,
    fb: T,
    whole: T,
    tol: f64,
    depth: u32,
    norm: &N,
) -> Result<T>
where
    T: Copy + Add<Output = T> + Sub<Output = T> + Mul<f64, Output = T>,
    F: FnMut(f64) -> T,
    N: Fn(T) -> f64,
{
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = (fa + flm * 4.0 + fm) * ((m - a) / 6.0);
    let right = (fm + frm * 4.0 + fb) * ((b - m) / 6.0);
    let delta = left + right - whole;
    let err = norm(delta);
    if err <= 15.0 * tol {
        return Ok(left + right + delta * (1.0 / 15.0));
    }
    if depth == 0 {
        return Err(Error::NonConvergent {
            estimate: err,
            detail: format!("adaptive Simpson exhausted its depth on [{a:e}, {b:e}]"),
        });
    }
    let l = simpson_step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1, norm)?;
    let r = simpson_step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1, norm)?;
    Ok(l + r)
}

/// Trapezoid rule for a 2π-periodic integrand with `n` equispaced nodes
/// starting at `phase`.
pub fn periodic_trapezoid<F: FnMut(f64) -> f64>(n: usize, phase: f64, mut f: F) -> f64 {
    let h = 2.0 * PI / n as f64;
    (0..n).map(|k| f(phase + h * k as f64)).sum::<f64>() * h
}

/// Periodic trapezoid with node doubling until two successive estimates
/// agree to `rel_tol` (relative to the larger of the estimate and `scale`).
/// Returns the estimate and the node count used.
pub fn periodic_trapezoid_adaptive<F: FnMut(f64) -> f64>(
    mut f: F,
    start_nodes: usize,
    rel_tol: f64,
    scale: f64,
    max_doublings: u32,
) -> Result<(f64, usize)> {
    let mut n = start_nodes.max(4);
    let mut sum: f64 = periodic_trapezoid(n, 0.0, &mut f) / (2.0 * PI / n as f64);
    let mut prev = sum * (2.0 * PI / n as f64);
    for _ in 0..max_doublings {
        // new nodes sit halfway between the old ones
        let h = 2.0 * PI / (2 * n) as f64;
        let extra: f64 = (0..n).map(|k| f(h * (2 * k + 1) as f64)).sum();
        sum += extra;
        n *= 2;
        let est = sum * h;
        if (est - prev).abs() <= rel_tol * est.abs().max(scale) {
            return Ok((est, n));
        }
        prev = est;
    }
    Err(Error::NonConvergent {
        estimate: 1.0,
        detail: format!("periodic trapezoid did not settle after {n} nodes"),
    })
}
