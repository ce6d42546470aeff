//! Magnetostatic near-field noise above metallic microstructures.
//!
//! The thermal current density inside the metal is delta-correlated, so the
//! magnetic correlation tensor at an exterior point reduces to a purely
//! geometric volume integral
//!
//! ```text
//! X_ij(x1, x2) = ∫_V d³x' (x1 − x')_i (x2 − x')_j / (|x1 − x'|³ |x2 − x'|³)
//! Y_ij         = ½ (δ_ij tr X − X_ij)
//! ```
//!
//! and the scattering rate is `γ = C₀ · n·Y·n` for a bias direction `n`.
//! With the ½ normalization, the half-space gives `Y = π/(4z) · diag(3/2, 3/2, 1)`.
//!
//! Frames: for planar geometries axis 3 is the surface normal; for the wire
//! axis 3 is the wire axis.

use std::f64::consts::PI;

use thiserror::Error;

use crate::constants::{BOHR_MAGNETON, BOLTZMANN, EPSILON_0, HBAR, RHO_COPPER, SPEED_OF_LIGHT};
use crate::quadrature::{self, AdaptiveOptions, Components, QuadratureError};

/// Far-field wire expansion is used down to this axis distance (in radii).
pub const WIRE_FAR_MIN_RATIO: f64 = 1.6;
/// Near-contact wire limit is used up to this gap (in radii).
pub const WIRE_NEAR_MAX_GAP: f64 = 0.05;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum NoiseError {
    #[error("invalid geometry: {0}")]
    InvalidGeometry(String),
    #[error("wire at R/a = {ratio} lies between the near-contact and far-field expansions; use quadrature")]
    QuadratureRequired { ratio: f64 },
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("tolerance {0} outside (1e-10, 1e-2)")]
    InvalidTolerance(f64),
    #[error(transparent)]
    Quadrature(#[from] QuadratureError),
}

/// Conductor shape and observation point, all lengths in meters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GeometrySpec {
    /// Metal fills z' < 0; observation at height `z`.
    HalfSpace { z: f64 },
    /// Metal fills −d < z' < 0 on an insulating substrate.
    Layer { z: f64, d: f64 },
    /// Infinite cylinder of radius `a`; observation at axis distance `r`.
    Wire { r: f64, a: f64 },
}

impl GeometrySpec {
    pub fn validate(&self) -> Result<(), NoiseError> {
        let ok = |v: f64| v.is_finite() && v > 0.0;
        match *self {
            GeometrySpec::HalfSpace { z } if ok(z) => Ok(()),
            GeometrySpec::Layer { z, d } if ok(z) && ok(d) => Ok(()),
            GeometrySpec::Wire { r, a } if ok(a) && r.is_finite() && r > a => Ok(()),
            g => Err(NoiseError::InvalidGeometry(format!("{g:?}"))),
        }
    }

    /// Distance from the conductor surface: `z` for planar shapes, `R − a` for the wire.
    pub fn surface_distance(&self) -> f64 {
        match *self {
            GeometrySpec::HalfSpace { z } | GeometrySpec::Layer { z, .. } => z,
            GeometrySpec::Wire { r, a } => r - a,
        }
    }

    /// Every length multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        match *self {
            GeometrySpec::HalfSpace { z } => GeometrySpec::HalfSpace { z: z * factor },
            GeometrySpec::Layer { z, d } => GeometrySpec::Layer { z: z * factor, d: d * factor },
            GeometrySpec::Wire { r, a } => GeometrySpec::Wire { r: r * factor, a: a * factor },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MaterialParams {
    /// Kelvin.
    pub temperature: f64,
    /// Ω·m.
    pub resistivity: f64,
}

impl MaterialParams {
    pub fn copper(temperature: f64) -> Self {
        Self { temperature, resistivity: RHO_COPPER }
    }

    pub fn validate(&self) -> Result<(), NoiseError> {
        if !(self.temperature.is_finite() && self.temperature > 0.0) {
            return Err(NoiseError::InvalidInput(format!("temperature {}", self.temperature)));
        }
        if !(self.resistivity.is_finite() && self.resistivity > 0.0) {
            return Err(NoiseError::InvalidInput(format!("resistivity {}", self.resistivity)));
        }
        Ok(())
    }
}

/// Magnitude of the magnetic-moment matrix element ⟨s|μ_n|s⟩, J/T.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpinCoupling {
    pub moment: f64,
}

impl SpinCoupling {
    pub fn bohr_magnetons(n: f64) -> Self {
        Self { moment: n * BOHR_MAGNETON }
    }

    pub fn validate(&self) -> Result<(), NoiseError> {
        if self.moment.is_finite() && self.moment >= 0.0 {
            Ok(())
        } else {
            Err(NoiseError::InvalidInput(format!("magnetic moment {}", self.moment)))
        }
    }
}

/// Symmetric 3×3 geometry tensor in 1/m.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeometryTensor {
    pub components: [[f64; 3]; 3],
    /// Only the trace is meaningful; components hold trace/3 on the diagonal.
    pub trace_only: bool,
}

impl GeometryTensor {
    pub fn diagonal(d: [f64; 3]) -> Self {
        let mut components = [[0.0; 3]; 3];
        for i in 0..3 {
            components[i][i] = d[i];
        }
        Self { components, trace_only: false }
    }

    pub fn isotropic_from_trace(trace: f64) -> Self {
        Self { trace_only: true, ..Self::diagonal([trace / 3.0; 3]) }
    }

    pub fn trace(&self) -> f64 {
        (0..3).map(|i| self.components[i][i]).sum()
    }

    pub fn diag(&self) -> [f64; 3] {
        [self.components[0][0], self.components[1][1], self.components[2][2]]
    }

    /// `n·Y·n`, or the trace for trace-only tensors (an upper bound on any projection).
    pub fn projected(&self, n: [f64; 3]) -> f64 {
        if self.trace_only {
            return self.trace();
        }
        let mut acc = 0.0;
        for i in 0..3 {
            for j in 0..3 {
                acc += n[i] * self.components[i][j] * n[j];
            }
        }
        acc
    }
}

/// Closed forms: half-space, layer, and the two wire limits (trace only).
pub fn geometry_tensor_analytic(g: &GeometrySpec) -> Result<GeometryTensor, NoiseError> {
    g.validate()?;
    const T: [f64; 3] = [1.5, 1.5, 1.0];
    match *g {
        GeometrySpec::HalfSpace { z } => Ok(GeometryTensor::diagonal(T.map(|t| PI * t / (4.0 * z)))),
        GeometrySpec::Layer { z, d } => {
            Ok(GeometryTensor::diagonal(T.map(|t| PI * t * d / (4.0 * z * (z + d)))))
        }
        GeometrySpec::Wire { r, a } => {
            if r >= WIRE_FAR_MIN_RATIO * a {
                Ok(GeometryTensor::isotropic_from_trace(wire_far_trace(r, a)))
            } else if r - a <= WIRE_NEAR_MAX_GAP * a {
                Ok(GeometryTensor::isotropic_from_trace(PI / (r - a)))
            } else {
                Err(NoiseError::QuadratureRequired { ratio: r / a })
            }
        }
    }
}

/// Three-term large-distance expansion of the wire trace.
pub fn wire_far_trace(r: f64, a: f64) -> f64 {
    let q = (a / r).powi(2);
    PI * PI * a * a / (2.0 * r.powi(3)) * (1.0 + 9.0 / 4.0 * q + 225.0 / 186.0 * q * q)
}

fn check_tol(tol: f64) -> Result<(), NoiseError> {
    if tol > 1e-10 && tol < 1e-2 {
        Ok(())
    } else {
        Err(NoiseError::InvalidTolerance(tol))
    }
}

/// Tensor from direct volume integration of the current-source kernel.
///
/// Semi-infinite directions are mapped to [0, 1) with `u = L·v/(1 − v)`; each
/// nested level is adaptive Gauss–Legendre with a tenfold tighter tolerance
/// than the level enclosing it. Wires return the trace only.
pub fn geometry_tensor_quadrature(g: &GeometrySpec, tol: f64) -> Result<GeometryTensor, NoiseError> {
    g.validate()?;
    check_tol(tol)?;
    match *g {
        GeometrySpec::HalfSpace { z } => planar_tensor(z, None, tol),
        GeometrySpec::Layer { z, d } => planar_tensor(z, Some(d), tol),
        GeometrySpec::Wire { r, a } => Ok(GeometryTensor::isotropic_from_trace(wire_trace(r, a, tol)?)),
    }
}

fn levels(tol: f64) -> [AdaptiveOptions; 3] {
    [
        AdaptiveOptions::relative(tol),
        AdaptiveOptions::relative(tol * 0.1),
        AdaptiveOptions::relative(tol * 0.01),
    ]
}

/// Maps v ∈ [0, 1) to u = scale·v/(1 − v); returns (u, du/dv).
fn semi_infinite(scale: f64, v: f64) -> (f64, f64) {
    let w = 1.0 - v;
    (scale * v / w, scale / (w * w))
}

fn planar_tensor(z: f64, thickness: Option<f64>, tol: f64) -> Result<GeometryTensor, NoiseError> {
    let [outer, middle, inner] = levels(tol);
    // depth below the surface: u = z v/(1 − v); a layer stops at u = d
    let v_max = thickness.map_or(1.0, |d| d / (z + d));
    let x: Components<6> = quadrature::integrate(
        |v| {
            let (u, du) = semi_infinite(z, v);
            let h = z + u;
            let lateral: Components<6> = quadrature::integrate(
                |w| {
                    let (rho, drho) = semi_infinite(h, w);
                    let azimuthal: Components<6> = quadrature::integrate(
                        |phi: f64| {
                            let r = [-rho * phi.cos(), -rho * phi.sin(), h];
                            let r2 = rho * rho + h * h;
                            let k = rho / (r2 * r2 * r2);
                            Ok(Components([
                                k * r[0] * r[0],
                                k * r[1] * r[1],
                                k * r[2] * r[2],
                                k * r[0] * r[1],
                                k * r[0] * r[2],
                                k * r[1] * r[2],
                            ]))
                        },
                        0.0,
                        2.0 * PI,
                        inner,
                    )?;
                    Ok(azimuthal * drho)
                },
                0.0,
                1.0,
                middle,
            )?;
            Ok(lateral * du)
        },
        0.0,
        v_max,
        outer,
    )?;
    Ok(y_from_x(&x.0))
}

fn y_from_x(x: &[f64; 6]) -> GeometryTensor {
    let [x11, x22, x33, x12, x13, x23] = *x;
    let tr = x11 + x22 + x33;
    let components = [
        [0.5 * (tr - x11), -0.5 * x12, -0.5 * x13],
        [-0.5 * x12, 0.5 * (tr - x22), -0.5 * x23],
        [-0.5 * x13, -0.5 * x23, 0.5 * (tr - x33)],
    ];
    GeometryTensor { components, trace_only: false }
}

/// `tr Y = tr X = ∫_V d³x' / |x − x'|⁴` for a cylinder along axis 3.
fn wire_trace(r: f64, a: f64, tol: f64) -> Result<f64, NoiseError> {
    let [outer, middle, _] = levels(tol);
    // the axial integral ∫ dζ/(ρ² + ζ²)² over both signs is π/(2ρ³)
    let total = graded(
        |g: f64| {
            let rp = r - g;
            let ring = graded(
                |phi: f64| {
                    let rho2 = r * r + rp * rp - 2.0 * r * rp * phi.cos();
                    Ok(PI / (rho2 * rho2.sqrt()))
                },
                0.0,
                PI,
                g / r,
                middle,
            )?;
            Ok(rp * ring)
        },
        r - a,
        r,
        r - a,
        outer,
    )?;
    Ok(total)
}

/// Integral over [lo, hi] of a function peaked near `lo`, split into panels
/// whose widths grow fourfold from `width`.
fn graded<F>(mut f: F, lo: f64, hi: f64, width: f64, opts: AdaptiveOptions) -> Result<f64, QuadratureError>
where
    F: FnMut(f64) -> Result<f64, QuadratureError>,
{
    let mut total = 0.0;
    let (mut start, mut step) = (lo, width.max((hi - lo) * 1e-12));
    while start < hi {
        let end = (start + step).min(hi);
        if hi - end < 0.5 * step {
            total += quadrature::integrate(&mut f, start, hi, opts)?;
            break;
        }
        total += quadrature::integrate(&mut f, start, end, opts)?;
        start = end;
        step *= 4.0;
    }
    Ok(total)
}

/// Trace of the two-point tensor above a half-space for observation points
/// `(∓s/2, 0, z)`. Equals `tr Y` at `s = 0`.
pub fn halfspace_two_point_trace(z: f64, s: f64, tol: f64) -> Result<f64, NoiseError> {
    GeometrySpec::HalfSpace { z }.validate()?;
    check_tol(tol)?;
    if !s.is_finite() {
        return Err(NoiseError::InvalidInput(format!("separation {s}")));
    }
    let half = 0.5 * s.abs();
    let [outer, middle, inner] = levels(tol);
    let total = quadrature::integrate(
        |v| {
            let (u, du) = semi_infinite(z, v);
            let h = z + u;
            let lateral = quadrature::integrate(
                |w| {
                    let (rho, drho) = semi_infinite(h + half, w);
                    let azimuthal = quadrature::integrate(
                        |phi: f64| {
                            let (sn, cs) = phi.sin_cos();
                            let x = rho * cs;
                            let y = rho * sn;
                            let a = [-half - x, -y, h];
                            let b = [half - x, -y, h];
                            let ra2 = a[0] * a[0] + a[1] * a[1] + h * h;
                            let rb2 = b[0] * b[0] + b[1] * b[1] + h * h;
                            let dot = a[0] * b[0] + a[1] * b[1] + h * h;
                            Ok(2.0 * rho * dot / (ra2 * rb2 * (ra2 * rb2).sqrt()))
                        },
                        0.0,
                        PI,
                        inner,
                    )?;
                    Ok(azimuthal * drho)
                },
                0.0,
                1.0,
                middle,
            )?;
            Ok(lateral * du)
        },
        0.0,
        1.0,
        outer,
    )?;
    Ok(total)
}

/// `C₀ = |⟨μ_n⟩|² k_B T / (ħ² 4π² ε₀² c⁴ ρ)` in m/s.
pub fn rate_prefactor(c: &SpinCoupling, m: &MaterialParams) -> Result<f64, NoiseError> {
    c.validate()?;
    m.validate()?;
    let mu_over_hbar = c.moment / HBAR;
    Ok(mu_over_hbar * mu_over_hbar * low_frequency_constant(m))
}

/// Low-frequency limit of the blackbody-normalized field prefactor,
/// `k_B T / (4π² ε₀² c⁴ ρ)`.
pub fn low_frequency_constant(m: &MaterialParams) -> f64 {
    let c2 = SPEED_OF_LIGHT * SPEED_OF_LIGHT;
    BOLTZMANN * m.temperature / (4.0 * PI * PI * EPSILON_0 * EPSILON_0 * c2 * c2 * m.resistivity)
}

/// Scattering rate in 1/s for a unit bias direction.
pub fn scattering_rate(
    c: &SpinCoupling,
    m: &MaterialParams,
    y: &GeometryTensor,
    bias: [f64; 3],
) -> Result<f64, NoiseError> {
    let norm = bias.iter().map(|b| b * b).sum::<f64>().sqrt();
    if !((norm - 1.0).abs() <= 1e-9) {
        return Err(NoiseError::InvalidInput(format!("bias direction has norm {norm}")));
    }
    let projected = y.projected(bias);
    if !(projected.is_finite() && projected >= 0.0) {
        return Err(NoiseError::InvalidInput(format!("tensor projection {projected}")));
    }
    Ok(rate_prefactor(c, m)? * projected)
}

/// Planck-normalized magnetic spectral density `ħω³ / (3π ε₀ c⁵ (e^{ħω/k_BT} − 1))`, T²·s.
pub fn blackbody_spectrum(omega: f64, temperature: f64) -> Result<f64, NoiseError> {
    if !(omega.is_finite() && omega > 0.0) {
        return Err(NoiseError::InvalidInput(format!("angular frequency {omega}")));
    }
    if !(temperature.is_finite() && temperature > 0.0) {
        return Err(NoiseError::InvalidInput(format!("temperature {temperature}")));
    }
    let c5 = SPEED_OF_LIGHT.powi(5);
    let x = HBAR * omega / (BOLTZMANN * temperature);
    let scale = HBAR * omega.powi(3) / (3.0 * PI * EPSILON_0 * c5);
    // e^{-x}/(1 − e^{-x}) avoids overflow of e^x for large x
    Ok(scale * (-x).exp() / -(-x).exp_m1())
}
