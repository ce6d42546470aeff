//! Spatial correlation of the field perturbation and the elastic scattering kernel.

use thiserror::Error;

use crate::near_field::{self, NoiseError};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CorrelationError {
    #[error("correlation length must be positive, got {0}")]
    InvalidLength(f64),
    #[error("invalid tabulated correlation: {0}")]
    InvalidTable(String),
    #[error("invalid scattering kernel: {0}")]
    InvalidKernel(String),
    #[error("correlation model has no quadratic top (curvature at s = 0 unknown)")]
    NoCurvature,
    #[error(transparent)]
    Noise(#[from] NoiseError),
}

/// Normalized spatial correlation C(s), with C(0) = 1.
#[derive(Debug, Clone, PartialEq)]
pub enum CorrelationModel {
    /// `1 / (1 + s²/l_c²)`.
    Lorentzian { lc: f64 },
    /// Linear interpolation in |s|; constant beyond the last sample.
    Tabulated { separations: Vec<f64>, values: Vec<f64> },
}

impl CorrelationModel {
    pub fn lorentzian(lc: f64) -> Result<Self, CorrelationError> {
        if lc.is_finite() && lc > 0.0 {
            Ok(Self::Lorentzian { lc })
        } else {
            Err(CorrelationError::InvalidLength(lc))
        }
    }

    /// Samples must start at s = 0 with value 1, increase strictly, and stay in [0, 1].
    pub fn tabulated(separations: Vec<f64>, values: Vec<f64>) -> Result<Self, CorrelationError> {
        let bad = |m: &str| Err(CorrelationError::InvalidTable(m.to_owned()));
        if separations.len() != values.len() || separations.len() < 2 {
            return bad("need at least two (separation, value) pairs of equal length");
        }
        if separations[0] != 0.0 || values[0] != 1.0 {
            return bad("first sample must be C(0) = 1");
        }
        if !separations.windows(2).all(|w| w[1] > w[0]) || !separations.iter().all(|s| s.is_finite()) {
            return bad("separations must be finite and strictly increasing");
        }
        if !values.iter().all(|v| (0.0..=1.0).contains(v)) {
            return bad("values must lie in [0, 1]");
        }
        Ok(Self::Tabulated { separations, values })
    }

    pub fn eval(&self, s: f64) -> f64 {
        match self {
            Self::Lorentzian { lc } => lorentzian_correlation(s, *lc),
            Self::Tabulated { separations, values } => {
                let s = s.abs();
                let n = separations.len();
                if s >= separations[n - 1] {
                    return values[n - 1];
                }
                let i = separations.partition_point(|&x| x <= s) - 1;
                let f = (s - separations[i]) / (separations[i + 1] - separations[i]);
                values[i] + f * (values[i + 1] - values[i])
            }
        }
    }

    /// Correlation at a D-dimensional separation (isotropic models).
    pub fn eval_vec<const D: usize>(&self, s: [f64; D]) -> f64 {
        self.eval(s.iter().map(|v| v * v).sum::<f64>().sqrt())
    }

    /// `−C''(0)`, the curvature of the quadratic top `C ≈ 1 + C''(0) s²/2`.
    pub fn curvature(&self) -> Result<f64, CorrelationError> {
        match self {
            Self::Lorentzian { lc } => Ok(2.0 / (lc * lc)),
            Self::Tabulated { .. } => Err(CorrelationError::NoCurvature),
        }
    }

    pub fn correlation_length(&self) -> Option<f64> {
        match self {
            Self::Lorentzian { lc } => Some(*lc),
            Self::Tabulated { .. } => None,
        }
    }
}

pub fn lorentzian_correlation(s: f64, lc: f64) -> f64 {
    let q = s / lc;
    1.0 / (1.0 + q * q)
}

/// Normalized two-point trace correlation above a half-space at height `z`.
pub fn halfspace_correlation_numeric(z: f64, s: f64, tol: f64) -> Result<f64, CorrelationError> {
    let at_zero = near_field::halfspace_two_point_trace(z, 0.0, tol)?;
    if s == 0.0 {
        return Ok(1.0);
    }
    Ok(near_field::halfspace_two_point_trace(z, s, tol)? / at_zero)
}

/// Separation where a monotone sampled curve first drops to 1/2, by linear
/// interpolation. `None` if it never does.
pub fn half_width(separations: &[f64], values: &[f64]) -> Option<f64> {
    separations.windows(2).zip(values.windows(2)).find_map(|(s, c)| {
        (c[0] >= 0.5 && c[1] < 0.5).then(|| s[0] + (c[0] - 0.5) / (c[0] - c[1]) * (s[1] - s[0]))
    })
}

/// Momentum dependence of the elastic scattering rate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RateLaw {
    /// γ(p) = γ₀ (white-noise limit).
    Constant,
    /// γ(p) = γ₀ exp(−|p| l_c).
    Exponential { lc: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScatteringKernel {
    pub gamma0: f64,
    pub law: RateLaw,
}

impl ScatteringKernel {
    pub fn exponential(gamma0: f64, lc: f64) -> Result<Self, CorrelationError> {
        let k = Self { gamma0, law: RateLaw::Exponential { lc } };
        k.validate()?;
        Ok(k)
    }

    pub fn constant(gamma0: f64) -> Result<Self, CorrelationError> {
        let k = Self { gamma0, law: RateLaw::Constant };
        k.validate()?;
        Ok(k)
    }

    pub fn validate(&self) -> Result<(), CorrelationError> {
        if !(self.gamma0.is_finite() && self.gamma0 >= 0.0) {
            return Err(CorrelationError::InvalidKernel(format!("gamma0 = {}", self.gamma0)));
        }
        if let RateLaw::Exponential { lc } = self.law {
            if !(lc.is_finite() && lc >= 0.0) {
                return Err(CorrelationError::InvalidKernel(format!("lc = {lc}")));
            }
        }
        Ok(())
    }

    pub fn is_white_noise(&self) -> bool {
        matches!(self.law, RateLaw::Constant)
    }

    pub fn rate(&self, p: f64) -> f64 {
        elastic_rate(p, self)
    }
}

pub fn elastic_rate(p: f64, k: &ScatteringKernel) -> f64 {
    match k.law {
        RateLaw::Constant => k.gamma0,
        RateLaw::Exponential { lc } => k.gamma0 * (-p.abs() * lc).exp(),
    }
}
