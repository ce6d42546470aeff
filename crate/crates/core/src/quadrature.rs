//! Gauss–Legendre rules with adaptive dyadic refinement, plus adaptive Simpson.
//!
//! Integrands are fallible (`Result<V, QuadratureError>`) so that nested
//! integrals can propagate a non-converged inner integral straight out of
//! the outer one. Values may be scalars or small fixed-size vectors; the
//! error test uses the max-norm over components.

use std::ops::{Add, Mul, Sub};
use std::sync::OnceLock;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum QuadratureError {
    #[error("quadrature did not converge on [{a}, {b}] within depth {depth}")]
    NonConvergence { a: f64, b: f64, depth: usize },
    #[error("integrand returned a non-finite value at {at}")]
    NonFinite { at: f64 },
}

/// Values that can be integrated: scalars and fixed-size arrays of reals.
pub trait QuadValue: Copy + Add<Output = Self> + Sub<Output = Self> + Mul<f64, Output = Self> {
    fn zero() -> Self;
    fn norm(&self) -> f64;
}

impl QuadValue for f64 {
    fn zero() -> Self {
        0.0
    }
    fn norm(&self) -> f64 {
        self.abs()
    }
}

/// Fixed-size vector wrapper so arrays get arithmetic.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Components<const N: usize>(pub [f64; N]);

impl<const N: usize> Add for Components<N> {
    type Output = Self;
    fn add(mut self, rhs: Self) -> Self {
        self.0.iter_mut().zip(rhs.0).for_each(|(a, b)| *a += b);
        self
    }
}

impl<const N: usize> Sub for Components<N> {
    type Output = Self;
    fn sub(mut self, rhs: Self) -> Self {
        self.0.iter_mut().zip(rhs.0).for_each(|(a, b)| *a -= b);
        self
    }
}

impl<const N: usize> Mul<f64> for Components<N> {
    type Output = Self;
    fn mul(mut self, rhs: f64) -> Self {
        self.0.iter_mut().for_each(|a| *a *= rhs);
        self
    }
}

impl<const N: usize> QuadValue for Components<N> {
    fn zero() -> Self {
        Components([0.0; N])
    }
    fn norm(&self) -> f64 {
        self.0.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

/// An n-point Gauss–Legendre rule on [-1, 1].
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussLegendre {
    /// Builds the rule by Newton iteration on P_n, starting from the
    /// Chebyshev-like guesses cos(π(i − 1/4)/(n + 1/2)).
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "rule needs at least one node");
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let nf = n as f64;
        for i in 0..n.div_ceil(2) {
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
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
            dp = if d != 0.0 { d } else { dp };
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
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

    /// Applies the rule on [a, b].
    pub fn apply<V, F>(&self, f: &mut F, a: f64, b: f64) -> Result<V, QuadratureError>
    where
        V: QuadValue,
        F: FnMut(f64) -> Result<V, QuadratureError>,
    {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (b + a);
        let mut acc = V::zero();
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            let at = mid + half * x;
            let v = f(at)?;
            if !v.norm().is_finite() {
                return Err(QuadratureError::NonFinite { at });
            }
            acc = acc + v * (w * half);
        }
        Ok(acc)
    }
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let (pn, pn1) = if n == 0 { (1.0, 0.0) } else { (p1, p0) };
    let d = n as f64 * (x * pn - pn1) / (x * x - 1.0);
    (pn, d)
}

fn default_rule() -> &'static GaussLegendre {
    static RULE: OnceLock<GaussLegendre> = OnceLock::new();
    RULE.get_or_init(|| GaussLegendre::new(10))
}

#[derive(Debug, Clone, Copy)]
pub struct AdaptiveOptions {
    /// Relative tolerance against the norm of the whole-interval estimate.
    pub rel_tol: f64,
    /// Absolute floor for the tolerance.
    pub abs_tol: f64,
    pub max_depth: usize,
}

impl Default for AdaptiveOptions {
    fn default() -> Self {
        Self { rel_tol: 1e-8, abs_tol: 1e-300, max_depth: 40 }
    }
}

impl AdaptiveOptions {
    pub fn relative(rel_tol: f64) -> Self {
        Self { rel_tol, ..Self::default() }
    }
}

/// Adaptive Gauss–Legendre on [a, b] using the default 10-point rule.
///
/// Each panel is compared with the sum of its two halves; a panel is accepted
/// when the difference is within its share of the tolerance budget, which
/// halves with every bisection. Refinement order is fixed, so results are
/// bit-reproducible.
pub fn integrate<V, F>(mut f: F, a: f64, b: f64, opts: AdaptiveOptions) -> Result<V, QuadratureError>
where
    V: QuadValue,
    F: FnMut(f64) -> Result<V, QuadratureError>,
{
    integrate_with(default_rule(), &mut f, a, b, opts)
}

pub fn integrate_with<V, F>(
    rule: &GaussLegendre,
    f: &mut F,
    a: f64,
    b: f64,
    opts: AdaptiveOptions,
) -> Result<V, QuadratureError>
where
    V: QuadValue,
    F: FnMut(f64) -> Result<V, QuadratureError>,
{
    if a == b {
        return Ok(V::zero());
    }
    let whole = rule.apply(f, a, b)?;
    let tol = (opts.rel_tol * whole.norm()).max(opts.abs_tol);
    refine(rule, f, a, b, whole, tol, 0, opts.max_depth)
}

#[allow(clippy::too_many_arguments)]
fn refine<V, F>(
    rule: &GaussLegendre,
    f: &mut F,
    a: f64,
    b: f64,
    whole: V,
    tol: f64,
    depth: usize,
    max_depth: usize,
) -> Result<V, QuadratureError>
where
    V: QuadValue,
    F: FnMut(f64) -> Result<V, QuadratureError>,
{
    let mid = 0.5 * (a + b);
    let left = rule.apply(f, a, mid)?;
    let right = rule.apply(f, mid, b)?;
    let sum = left + right;
    if (sum - whole).norm() <= tol {
        return Ok(sum);
    }
    if depth >= max_depth {
        return Err(QuadratureError::NonConvergence { a, b, depth });
    }
    let l = refine(rule, f, a, mid, left, 0.5 * tol, depth + 1, max_depth)?;
    let r = refine(rule, f, mid, b, right, 0.5 * tol, depth + 1, max_depth)?;
    Ok(l + r)
}

/// Adaptive Simpson on [a, b] with an absolute tolerance.
pub fn simpson<F>(mut f: F, a: f64, b: f64, tol: f64) -> Result<f64, QuadratureError>
where
    F: FnMut(f64) -> f64,
{
    if a == b {
        return Ok(0.0);
    }
    let fa = f(a);
    let fb = f(b);
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    simpson_refine(&mut f, a, b, fa, fm, fb, whole, tol, 0)
}

#[allow(clippy::too_many_arguments)]
fn simpson_refine<F>(
    f: &mut F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: usize,
) -> Result<f64, QuadratureError>
where
    F: FnMut(f64) -> f64,
{
    const MAX_DEPTH: usize = 50;
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    if !(flm.is_finite() && frm.is_finite()) {
        return Err(QuadratureError::NonFinite { at: if flm.is_finite() { rm } else { lm } });
    }
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if delta.abs() <= 15.0 * tol {
        return Ok(left + right + delta / 15.0);
    }
    if depth >= MAX_DEPTH {
        return Err(QuadratureError::NonConvergence { a, b, depth });
    }
    Ok(simpson_refine(f, a, m, fa, flm, fm, left, 0.5 * tol, depth + 1)?
        + simpson_refine(f, m, b, fm, frm, fb, right, 0.5 * tol, depth + 1)?)
}

/// Fixed-order pairwise summation; the split points depend only on the length.
pub fn pairwise_sum(values: &[f64]) -> f64 {
    const BLOCK: usize = 32;
    if values.len() <= BLOCK {
        return values.iter().sum();
    }
    let mid = values.len() / 2;
    pairwise_sum(&values[..mid]) + pairwise_sum(&values[mid..])
}
