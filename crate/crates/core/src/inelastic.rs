//! Closed-form transport under white-noise (inelastic) scattering.
//!
//! Transform convention: `W̃(k, s) = ∫∫ dx dp e^{ikx − ips/ħ} W(x, p)`, so the
//! coherence function is `Γ(s) = W̃(0, s)` and free flight shears
//! `W̃₀(k, s) → W̃₀(k, s − ħkt/m)`. Simulation units, ħ = 1.
//!
//! Closed forms here work in D = 1 or 2 dimensions; vectors are `[f64; D]`.

use num_complex::Complex64;
use rayon::prelude::*;
use thiserror::Error;

use crate::correlation::{CorrelationError, CorrelationModel};
use crate::phase_space::CoherenceFunction;
use crate::quadrature::{self, QuadratureError};

/// Absolute tolerance for the characteristic-line integral of C.
pub const CHARACTERISTIC_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum InelasticError {
    #[error("time must be non-negative, got {0}")]
    NegativeTime(f64),
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error(transparent)]
    Correlation(#[from] CorrelationError),
    #[error(transparent)]
    Quadrature(#[from] QuadratureError),
}

#[derive(Debug, Clone, PartialEq)]
pub struct InelasticParams<const D: usize> {
    /// Zero-energy-transfer scattering rate γ.
    pub gamma: f64,
    pub correlation: CorrelationModel,
    pub force: [f64; D],
    pub mass: f64,
}

impl<const D: usize> InelasticParams<D> {
    const DIMENSION_OK: () = assert!(D == 1 || D == 2, "waveguides are one- or two-dimensional");

    pub fn new(gamma: f64, correlation: CorrelationModel, force: [f64; D]) -> Result<Self, InelasticError> {
        let () = Self::DIMENSION_OK;
        let p = Self { gamma, correlation, force, mass: 1.0 };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<(), InelasticError> {
        if !(self.gamma.is_finite() && self.gamma >= 0.0) {
            return Err(InelasticError::InvalidParams(format!("gamma = {}", self.gamma)));
        }
        if !(self.mass.is_finite() && self.mass > 0.0) {
            return Err(InelasticError::InvalidParams(format!("mass = {}", self.mass)));
        }
        if !self.force.iter().all(|f| f.is_finite()) {
            return Err(InelasticError::InvalidParams("force must be finite".into()));
        }
        Ok(())
    }
}

fn dot<const D: usize>(a: [f64; D], b: [f64; D]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn check_time(t: f64) -> Result<(), InelasticError> {
    if t >= 0.0 && t.is_finite() {
        Ok(())
    } else {
        Err(InelasticError::NegativeTime(t))
    }
}

/// `∫₀ᵗ (1 − C(s − k u/m)) du` along the free-flight characteristic.
pub fn characteristic_integral<const D: usize>(
    params: &InelasticParams<D>,
    k: [f64; D],
    s: [f64; D],
    t: f64,
) -> Result<f64, InelasticError> {
    check_time(t)?;
    if k.iter().all(|&v| v == 0.0) {
        return Ok(t * (1.0 - params.correlation.eval_vec(s)));
    }
    let m = params.mass;
    let integrand = |u: f64| {
        let mut at = s;
        for (a, kk) in at.iter_mut().zip(k) {
            *a -= kk * u / m;
        }
        1.0 - params.correlation.eval_vec(at)
    };
    Ok(quadrature::simpson(integrand, 0.0, t, CHARACTERISTIC_TOL)?)
}

/// Evolved double transform `W̃(k, s; t)` from the initial transform `w0`.
///
/// Besides the decoherence factor this carries the force phase
/// `exp(−iF·s t/ħ + iF·k t²/2m)`; the second term is the x-shift `F t²/2m`
/// and drops out at `k = 0`.
pub fn evolve_fourier<const D: usize, F>(
    w0: &F,
    params: &InelasticParams<D>,
    k: [f64; D],
    s: [f64; D],
    t: f64,
) -> Result<Complex64, InelasticError>
where
    F: Fn([f64; D], [f64; D]) -> Complex64,
{
    check_time(t)?;
    let m = params.mass;
    let mut sheared = s;
    for (a, kk) in sheared.iter_mut().zip(k) {
        *a -= kk * t / m;
    }
    let decay = params.gamma * characteristic_integral(params, k, s, t)?;
    let phase = -dot(params.force, s) * t + dot(params.force, k) * t * t / (2.0 * m);
    Ok(w0(k, sheared) * Complex64::from_polar((-decay).exp(), phase))
}

/// `evolve_fourier` on a 1D (k, s) grid; rows follow `ks`, columns follow `ss`.
pub fn evolve_fourier_grid<F>(
    w0: &F,
    params: &InelasticParams<1>,
    ks: &[f64],
    ss: &[f64],
    t: f64,
) -> Result<Vec<Vec<Complex64>>, InelasticError>
where
    F: Fn([f64; 1], [f64; 1]) -> Complex64 + Sync,
{
    ks.par_iter()
        .map(|&k| ss.iter().map(|&s| evolve_fourier(w0, params, [k], [s], t)).collect())
        .collect()
}

/// `Γ(s; t) = Γ₀(s) exp[−γt(1 − C(s)) − iF·s t/ħ]`.
pub fn coherence_decay<const D: usize>(
    gamma0_s: Complex64,
    params: &InelasticParams<D>,
    s: [f64; D],
    t: f64,
) -> Result<Complex64, InelasticError> {
    check_time(t)?;
    let rate = params.gamma * (1.0 - params.correlation.eval_vec(s));
    let phase = -dot(params.force, s) * t;
    Ok(gamma0_s * Complex64::from_polar((-rate * t).exp(), phase))
}

pub fn coherence_decay_curve(
    initial: &CoherenceFunction,
    params: &InelasticParams<1>,
    t: f64,
) -> Result<CoherenceFunction, InelasticError> {
    let values = initial
        .separations
        .iter()
        .zip(&initial.values)
        .map(|(&s, &g)| coherence_decay(g, params, [s], t))
        .collect::<Result<_, _>>()?;
    Ok(CoherenceFunction { separations: initial.separations.clone(), values })
}

/// Separation-dependent decoherence rate `γ(1 − C(s))`.
pub fn decoherence_rate(params: &InelasticParams<1>, s: f64) -> f64 {
    params.gamma * (1.0 - params.correlation.eval(s))
}

fn correlation_length<const D: usize>(params: &InelasticParams<D>) -> Result<f64, InelasticError> {
    params.correlation.correlation_length().ok_or(InelasticError::Correlation(CorrelationError::NoCurvature))
}

/// Momentum variance under diffusion with `D_p = ħ²γ/l_c²`:
/// `⟨δp²(t)⟩ = ⟨δp²(0)⟩ + ħ²γt/l_c²`.
///
/// The exact curvature of the Lorentzian closed form grows twice as fast; see
/// [`curvature_momentum_rate`].
pub fn momentum_variance<const D: usize>(
    params: &InelasticParams<D>,
    var_p0: f64,
    t: f64,
) -> Result<f64, InelasticError> {
    check_time(t)?;
    let lc = correlation_length(params)?;
    Ok(var_p0 + params.gamma * t / (lc * lc))
}

/// Growth rate of ⟨δp²⟩ implied by the quadratic top of C: `γ·(−C''(0))`.
pub fn curvature_momentum_rate<const D: usize>(params: &InelasticParams<D>) -> Result<f64, InelasticError> {
    Ok(params.gamma * params.correlation.curvature()?)
}

/// Coherence length: `l_c` for γt < 1, `l_c/√(γt)` afterwards, +∞ without scattering.
pub fn coherence_length<const D: usize>(params: &InelasticParams<D>, t: f64) -> Result<f64, InelasticError> {
    check_time(t)?;
    let lc = correlation_length(params)?;
    if params.gamma == 0.0 {
        return Ok(f64::INFINITY);
    }
    let gt = params.gamma * t;
    Ok(if gt >= 1.0 { lc / gt.sqrt() } else { lc })
}

/// Position variance with heating:
/// `⟨δx²⟩ = ⟨δx²(0)⟩ + ⟨δp²(0)⟩t²/m² + γ(−C''(0)) ħ² t³/(3m²)`.
///
/// The cubic coefficient is the one obtained from the k-curvature of the
/// closed-form evolution (checked in the tests).
pub fn position_variance_longtime<const D: usize>(
    params: &InelasticParams<D>,
    var_x0: f64,
    var_p0: f64,
    t: f64,
) -> Result<f64, InelasticError> {
    check_time(t)?;
    let rate = curvature_momentum_rate(params)?;
    let m2 = params.mass * params.mass;
    Ok(var_x0 + var_p0 * t * t / m2 + rate * t.powi(3) / (3.0 * m2))
}

/// Initial gaussian cloud in transform space, 1D, mass 1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianTransform {
    pub x0: f64,
    pub p0: f64,
    pub sigma_x: f64,
    pub sigma_p: f64,
}

impl GaussianTransform {
    pub fn eval(&self, k: [f64; 1], s: [f64; 1]) -> Complex64 {
        let (k, s) = (k[0], s[0]);
        let amplitude = (-0.5 * (k * self.sigma_x).powi(2) - 0.5 * (s * self.sigma_p).powi(2)).exp();
        Complex64::from_polar(amplitude, k * self.x0 - s * self.p0)
    }
}

/// Variances read off the closed form by central differences of `ln|W̃|`:
/// `⟨δx²⟩ = −∂²_k ln|W̃(k, 0)|`, `⟨δp²⟩ = −∂²_s ln|W̃(0, s)|`, at k = s = 0.
pub fn curvature_variances<F>(
    w0: &F,
    params: &InelasticParams<1>,
    t: f64,
    hk: f64,
    hs: f64,
) -> Result<(f64, f64), InelasticError>
where
    F: Fn([f64; 1], [f64; 1]) -> Complex64,
{
    let ln_abs = |k: f64, s: f64| evolve_fourier(w0, params, [k], [s], t).map(|v| v.norm().ln());
    let centre = ln_abs(0.0, 0.0)?;
    let var_x = -(ln_abs(hk, 0.0)? - 2.0 * centre + ln_abs(-hk, 0.0)?) / (hk * hk);
    let var_p = -(ln_abs(0.0, hs)? - 2.0 * centre + ln_abs(0.0, -hs)?) / (hs * hs);
    Ok((var_x, var_p))
}
