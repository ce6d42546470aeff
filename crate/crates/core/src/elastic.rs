//! Split-step solver for 1D elastic (energy-conserving) scattering.
//!
//! The transport equation
//!
//! ```text
//! (∂_t + (p/m) ∂_x + F ∂_p) W(x, p) = γ(p) [W(x, −p) − W(x, p)]
//! ```
//!
//! is integrated by alternating an exact-characteristics ballistic step
//! (semi-Lagrangian gather with bilinear interpolation, periodic in x) with
//! the exact 2×2 exchange between the rows `p` and `−p`.
//!
//! Both sub-steps are convex combinations, so positivity is preserved. At
//! F = 0 each row is circularly convolved with weights summing to one and
//! every ±p pair is mixed by a doubly stochastic matrix, so mass and the
//! |p|-marginal are conserved to rounding.

use num_complex::Complex64;
use rayon::prelude::*;
use thiserror::Error;

use crate::correlation::{CorrelationError, ScatteringKernel};
use crate::phase_space::{CoherenceFunction, GridSpec, ObservableSeries, PhaseSpaceError, WignerGrid};
use crate::quadrature::pairwise_sum;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TransportError {
    #[error("invalid evolution config: {0}")]
    InvalidConfig(String),
    #[error("momentum grid is not mirror-symmetric (np = {0})")]
    AsymmetricGrid(usize),
    #[error("step {step}: momentum shift {shift} per step exceeds p_max/10 = {limit}")]
    ResolutionGuard { step: usize, shift: f64, limit: f64 },
    #[error("step {step}: mass {lost} left the momentum grid")]
    MomentumOverflow { step: usize, lost: f64 },
    #[error("step {step}: cloud reached the periodic x boundary (edge mass fraction {fraction:e})")]
    Wraparound { step: usize, fraction: f64 },
    #[error("scattering rate vanishes at p = {0}; no finite asymptote")]
    NoAsymptote(f64),
    #[error(transparent)]
    PhaseSpace(#[from] PhaseSpaceError),
    #[error(transparent)]
    Kernel(#[from] CorrelationError),
}

impl TransportError {
    /// Step index for guard violations raised during a run.
    pub fn step(&self) -> Option<usize> {
        match self {
            Self::ResolutionGuard { step, .. }
            | Self::MomentumOverflow { step, .. }
            | Self::Wraparound { step, .. } => Some(*step),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Splitting {
    /// Ballistic then scattering, first order.
    Lie,
    /// Half scattering, ballistic, half scattering; second order.
    Strang,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OverflowPolicy {
    /// Drop mass pushed past ±p_max and account for it.
    Absorb,
    /// Abort when mass would leave the grid.
    Error,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvolutionConfig {
    pub dt: f64,
    pub t_end: f64,
    pub splitting: Splitting,
    pub force: f64,
    pub kernel: ScatteringKernel,
    pub record_every: usize,
    pub overflow: OverflowPolicy,
    pub mass: f64,
    /// Largest allowed mass fraction in either edge column of the x box.
    pub edge_tolerance: f64,
}

/// Mass loss below this fraction of the total is not treated as overflow.
const OVERFLOW_FLOOR: f64 = 1e-12;

impl EvolutionConfig {
    /// Defaults: Δt = 0.05/γ₀, Strang splitting, no force, record every step.
    pub fn new(kernel: ScatteringKernel, t_end: f64) -> Self {
        let dt = if kernel.gamma0 > 0.0 { 0.05 / kernel.gamma0 } else { 0.05 };
        Self {
            dt,
            t_end,
            splitting: Splitting::Strang,
            force: 0.0,
            kernel,
            record_every: 1,
            overflow: OverflowPolicy::Absorb,
            mass: 1.0,
            edge_tolerance: 1e-8,
        }
    }

    pub fn validate(&self) -> Result<(), TransportError> {
        let bad = |m: String| Err(TransportError::InvalidConfig(m));
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return bad(format!("dt = {}", self.dt));
        }
        if !(self.t_end.is_finite() && self.t_end >= 0.0) {
            return bad(format!("t_end = {}", self.t_end));
        }
        self.kernel.validate()?;
        if self.kernel.gamma0 * self.dt > 0.5 {
            return bad(format!("gamma0*dt = {} exceeds 0.5", self.kernel.gamma0 * self.dt));
        }
        if self.record_every == 0 {
            return bad("record_every must be at least 1".into());
        }
        if !self.force.is_finite() {
            return bad(format!("force = {}", self.force));
        }
        if !(self.mass.is_finite() && self.mass > 0.0) {
            return bad(format!("mass = {}", self.mass));
        }
        if !(self.edge_tolerance >= 0.0) {
            return bad(format!("edge_tolerance = {}", self.edge_tolerance));
        }
        Ok(())
    }

    pub fn steps(&self) -> usize {
        (self.t_end / self.dt - 1e-9).ceil().max(0.0) as usize
    }
}

/// Per-target-row gather coefficients for one ballistic step.
#[derive(Debug, Clone, Copy)]
struct RowPlan {
    /// Lower source row (may be outside the grid).
    src: isize,
    /// Weight of the upper source row.
    beta: f64,
    /// Whole-cell offset of the source x, reduced modulo nx.
    offset: usize,
    /// Weight of the next cell.
    alpha: f64,
}

fn ballistic_plan(spec: &GridSpec, dt: f64, force: f64, mass: f64) -> (Vec<RowPlan>, isize, f64) {
    let nx = spec.nx as isize;
    let (dx, dp) = (spec.dx(), spec.dp());
    // source p = p_j − FΔt, source x = x_i − p_j Δt/m + FΔt²/2m
    let row_shift = -force * dt / dp;
    let d0 = row_shift.floor();
    let beta = row_shift - d0;
    let d0 = d0 as isize;
    let plans = (0..spec.np)
        .map(|j| {
            let q = (-spec.p(j) * dt / mass + force * dt * dt / (2.0 * mass)) / dx;
            let qi = q.floor();
            RowPlan { src: j as isize + d0, beta, offset: (qi as isize).rem_euclid(nx) as usize, alpha: q - qi }
        })
        .collect();
    (plans, d0, beta)
}

/// Mass that the gather would take from outside the momentum grid.
fn overflow_mass(row_masses: &[f64], d0: isize, beta: f64, dp: f64) -> f64 {
    let np = row_masses.len() as isize;
    let lost: Vec<f64> = row_masses
        .iter()
        .enumerate()
        .map(|(k, m)| {
            // source row k feeds target k − d0 with weight 1 − β and k − d0 − 1 with weight β
            let a = k as isize - d0;
            let b = a - 1;
            let out = |t: isize| t < 0 || t >= np;
            m * (if out(a) { 1.0 - beta } else { 0.0 } + if out(b) { beta } else { 0.0 })
        })
        .collect();
    pairwise_sum(&lost) * dp
}

#[inline]
fn interp_row(dst: &mut [f64], src: &[f64], offset: usize, alpha: f64, weight: f64, accumulate: bool) {
    let nx = src.len();
    let keep = 1.0 - alpha;
    for (i, d) in dst.iter_mut().enumerate() {
        let mut a = i + offset;
        if a >= nx {
            a -= nx;
        }
        let b = if a + 1 == nx { 0 } else { a + 1 };
        let v = weight * (keep * src[a] + alpha * src[b]);
        if accumulate {
            *d += v;
        } else {
            *d = v;
        }
    }
}

fn apply_ballistic(src: &[f64], dst: &mut [f64], spec: &GridSpec, plans: &[RowPlan]) {
    let nx = spec.nx;
    let np = spec.np as isize;
    dst.par_chunks_mut(nx).zip(plans.par_iter()).for_each(|(out, plan)| {
        out.iter_mut().for_each(|v| *v = 0.0);
        if plan.beta == 0.0 {
            if (0..np).contains(&plan.src) {
                let r = plan.src as usize;
                interp_row(out, &src[r * nx..(r + 1) * nx], plan.offset, plan.alpha, 1.0, false);
            }
            return;
        }
        for (row, w) in [(plan.src, 1.0 - plan.beta), (plan.src + 1, plan.beta)] {
            if (0..np).contains(&row) {
                let r = row as usize;
                interp_row(out, &src[r * nx..(r + 1) * nx], plan.offset, plan.alpha, w, true);
            }
        }
    });
}

fn check_resolution(spec: &GridSpec, dt: f64, force: f64, step: usize) -> Result<(), TransportError> {
    let shift = (force * dt).abs();
    let limit = spec.p_max / 10.0;
    if shift > limit {
        return Err(TransportError::ResolutionGuard { step, shift, limit });
    }
    Ok(())
}

/// One ballistic step, returning the new grid and the mass lost through ±p_max.
pub fn ballistic_step(
    w: &WignerGrid,
    dt: f64,
    force: f64,
    mass: f64,
    overflow: OverflowPolicy,
) -> Result<(WignerGrid, f64), TransportError> {
    let spec = *w.spec();
    check_resolution(&spec, dt, force, 0)?;
    let (plans, d0, beta) = ballistic_plan(&spec, dt, force, mass);
    let lost = overflow_mass(&w.row_masses(), d0, beta, spec.dp());
    if overflow == OverflowPolicy::Error && lost > OVERFLOW_FLOOR * w.mass() {
        return Err(TransportError::MomentumOverflow { step: 0, lost });
    }
    let mut out = w.clone();
    apply_ballistic(w.values(), out.values_mut(), &spec, &plans);
    out.set_time(w.time() + dt);
    Ok((out, lost))
}

/// Coefficients `(c, s)` of the exchange matrix `e^{−γΔt}[[cosh, sinh], [sinh, cosh]]`.
pub fn exchange_coefficients(gamma_dt: f64) -> (f64, f64) {
    let s = -0.5 * (-2.0 * gamma_dt).exp_m1();
    (1.0 - s, s)
}

fn apply_scattering(values: &mut [f64], spec: &GridSpec, dt: f64, kernel: &ScatteringKernel) {
    let nx = spec.nx;
    let c = spec.center();
    let (lower, rest) = values.split_at_mut(c * nx);
    let upper = &mut rest[nx..];
    lower.par_chunks_mut(nx).zip(upper.par_chunks_mut(nx).rev()).enumerate().for_each(|(j, (neg, pos))| {
        let (keep, swap) = exchange_coefficients(kernel.rate(spec.p(j)) * dt);
        for (a, b) in neg.iter_mut().zip(pos.iter_mut()) {
            let (x, y) = (*a, *b);
            *a = keep * x + swap * y;
            *b = swap * x + keep * y;
        }
    });
}

/// Exact exchange between `W(x, p)` and `W(x, −p)` over a time `dt`.
pub fn scattering_step(w: &WignerGrid, dt: f64, kernel: &ScatteringKernel) -> Result<WignerGrid, TransportError> {
    let spec = *w.spec();
    if spec.np % 2 == 0 {
        return Err(TransportError::AsymmetricGrid(spec.np));
    }
    kernel.validate()?;
    let mut out = w.clone();
    apply_scattering(out.values_mut(), &spec, dt, kernel);
    out.set_time(w.time() + dt);
    Ok(out)
}

/// Stateful integrator that reuses its buffers between steps.
#[derive(Debug, Clone)]
pub struct Propagator {
    grid: WignerGrid,
    scratch: WignerGrid,
    config: EvolutionConfig,
    plans: Vec<RowPlan>,
    d0: isize,
    beta: f64,
    steps_taken: usize,
    absorbed: f64,
    initial_mass: f64,
}

impl Propagator {
    pub fn new(w0: WignerGrid, config: EvolutionConfig) -> Result<Self, TransportError> {
        config.validate()?;
        let spec = *w0.spec();
        check_resolution(&spec, config.dt, config.force, 0)?;
        let (plans, d0, beta) = ballistic_plan(&spec, config.dt, config.force, config.mass);
        let initial_mass = w0.mass();
        Ok(Self {
            scratch: w0.clone(),
            grid: w0,
            config,
            plans,
            d0,
            beta,
            steps_taken: 0,
            absorbed: 0.0,
            initial_mass,
        })
    }

    pub fn grid(&self) -> &WignerGrid {
        &self.grid
    }

    pub fn into_grid(self) -> WignerGrid {
        self.grid
    }

    pub fn config(&self) -> &EvolutionConfig {
        &self.config
    }

    pub fn steps_taken(&self) -> usize {
        self.steps_taken
    }

    pub fn time(&self) -> f64 {
        self.grid.time()
    }

    /// Mass dropped at the momentum boundary so far.
    pub fn absorbed(&self) -> f64 {
        self.absorbed
    }

    fn scatter(&mut self, dt: f64) {
        let spec = *self.grid.spec();
        apply_scattering(self.grid.values_mut(), &spec, dt, &self.config.kernel);
    }

    fn advect(&mut self, step: usize) -> Result<(), TransportError> {
        let spec = *self.grid.spec();
        if self.config.force != 0.0 {
            let lost = overflow_mass(&self.grid.row_masses(), self.d0, self.beta, spec.dp());
            if lost > OVERFLOW_FLOOR * self.initial_mass {
                if self.config.overflow == OverflowPolicy::Error {
                    return Err(TransportError::MomentumOverflow { step, lost });
                }
                self.absorbed += lost;
            }
        }
        apply_ballistic(self.grid.values(), self.scratch.values_mut(), &spec, &self.plans);
        std::mem::swap(&mut self.grid, &mut self.scratch);
        Ok(())
    }

    fn check_edges(&self, step: usize) -> Result<(), TransportError> {
        let spec = self.grid.spec();
        let cell = spec.dx() * spec.dp();
        let reference = self.initial_mass - self.absorbed;
        for i in [0, spec.nx - 1] {
            let col: Vec<f64> = (0..spec.np).map(|j| self.grid.get(i, j)).collect();
            let fraction = pairwise_sum(&col) * cell / reference;
            if fraction > self.config.edge_tolerance {
                return Err(TransportError::Wraparound { step, fraction });
            }
        }
        Ok(())
    }

    /// Advances one full time step.
    pub fn step(&mut self) -> Result<(), TransportError> {
        let step = self.steps_taken + 1;
        let dt = self.config.dt;
        match self.config.splitting {
            Splitting::Lie => {
                self.advect(step)?;
                self.scatter(dt);
            }
            Splitting::Strang => {
                self.scatter(0.5 * dt);
                self.advect(step)?;
                self.scatter(0.5 * dt);
            }
        }
        self.check_edges(step)?;
        self.steps_taken = step;
        self.grid.set_time(step as f64 * dt);
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct EvolutionResult {
    pub grid: WignerGrid,
    pub series: ObservableSeries,
    /// Grids at the requested snapshot times (nearest step).
    pub snapshots: Vec<WignerGrid>,
}

/// Runs to `t_end`, recording observables every `record_every` steps and at the end.
pub fn evolve(w0: WignerGrid, config: &EvolutionConfig) -> Result<EvolutionResult, TransportError> {
    evolve_with_snapshots(w0, config, &[])
}

pub fn evolve_with_snapshots(
    w0: WignerGrid,
    config: &EvolutionConfig,
    snapshot_times: &[f64],
) -> Result<EvolutionResult, TransportError> {
    let mut prop = Propagator::new(w0, *config)?;
    let n = config.steps();
    let snapshot_steps: Vec<usize> =
        snapshot_times.iter().map(|t| (t / config.dt).round().clamp(0.0, n as f64) as usize).collect();
    let mut snapshots: Vec<Option<WignerGrid>> = vec![None; snapshot_times.len()];
    let mut series = ObservableSeries::default();
    let mut capture = |prop: &Propagator, series: &mut ObservableSeries, force_record: bool| {
        let k = prop.steps_taken();
        if force_record || k % config.record_every == 0 {
            series.push(prop.grid().observables(), prop.absorbed());
        }
        for (slot, &s) in snapshots.iter_mut().zip(&snapshot_steps) {
            if s == k {
                *slot = Some(prop.grid().clone());
            }
        }
    };
    capture(&prop, &mut series, true);
    for k in 1..=n {
        prop.step()?;
        capture(&prop, &mut series, k == n && k % config.record_every != 0);
    }
    Ok(EvolutionResult {
        grid: prop.into_grid(),
        series,
        snapshots: snapshots.into_iter().map(|s| s.expect("snapshot step within run")).collect(),
    })
}

/// Long-time predictions for a cloud at momentum `p` without external force.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AsymptoticPrediction {
    pub momentum: f64,
    pub rate: f64,
    /// `⟨x(∞)⟩ − ⟨x(0)⟩ = p/(2mγ(p))`.
    pub displacement: f64,
    /// `d⟨δx²⟩/dt = p²/(2m²γ(p))`.
    pub variance_slope: f64,
}

pub fn laplace_asymptotics(p0: f64, mass: f64, kernel: &ScatteringKernel) -> Result<AsymptoticPrediction, TransportError> {
    kernel.validate()?;
    let rate = kernel.rate(p0);
    if !(rate > 0.0) {
        return Err(TransportError::NoAsymptote(p0));
    }
    Ok(AsymptoticPrediction {
        momentum: p0,
        rate,
        displacement: p0 / (2.0 * mass * rate),
        variance_slope: p0 * p0 / (2.0 * mass * mass * rate),
    })
}

/// Laplace-domain solution `(W̃(k, p; ζ), W̃(k, −p; ζ))` of the force-free
/// ±p pair, for the `e^{+ikx}` spatial transform used throughout the crate.
pub fn laplace_pair(
    k: f64,
    p: f64,
    mass: f64,
    rate: f64,
    w0_plus: Complex64,
    w0_minus: Complex64,
    zeta: Complex64,
) -> (Complex64, Complex64) {
    let drift = Complex64::new(0.0, k * p / mass);
    let den = zeta * zeta + 2.0 * rate * zeta + (k * p / mass).powi(2);
    let plus = ((zeta + rate + drift) * w0_plus + rate * w0_minus) / den;
    let minus = ((zeta + rate - drift) * w0_minus + rate * w0_plus) / den;
    (plus, minus)
}

/// Roots of `ζ² + 2γζ + k²p²/m²`, slowest-decaying first.
pub fn denominator_roots(k: f64, p: f64, mass: f64, rate: f64) -> (Complex64, Complex64) {
    let disc = Complex64::new(rate * rate - (k * p / mass).powi(2), 0.0).sqrt();
    (-rate + disc, -rate - disc)
}

/// Coherence |Γ(s)| envelope: `|Γ₋(s)| + |Γ₀(s)| + |Γ₊(s)|`, with the
/// contributions of negative, zero and positive momenta demodulated separately.
pub fn coherence_envelope(w: &WignerGrid, separations: &[f64]) -> Vec<f64> {
    let spec = w.spec();
    let n = w.momentum_marginal();
    let c = spec.center();
    let dp = spec.dp();
    let part = |rows: std::ops::Range<usize>, s: f64| -> f64 {
        let (re, im): (Vec<f64>, Vec<f64>) = rows
            .map(|j| {
                let (sn, cs) = (spec.p(j) * s).sin_cos();
                (n[j] * cs, -n[j] * sn)
            })
            .unzip();
        Complex64::new(pairwise_sum(&re), pairwise_sum(&im)).norm() * dp
    };
    separations.iter().map(|&s| part(0..c, s) + part(c..c + 1, s) + part(c + 1..spec.np, s)).collect()
}

/// First separation where a decaying curve falls to `curve[0]/e`.
pub fn one_over_e_width(separations: &[f64], curve: &[f64]) -> Option<f64> {
    let target = curve.first()? / std::f64::consts::E;
    separations.windows(2).zip(curve.windows(2)).find_map(|(s, c)| {
        (c[0] >= target && c[1] < target).then(|| s[0] + (c[0] - target) / (c[0] - c[1]) * (s[1] - s[0]))
    })
}

/// Mean spacing of the interior local minima of a sampled curve.
pub fn oscillation_period(separations: &[f64], curve: &[f64]) -> Option<f64> {
    let minima: Vec<f64> = (1..curve.len().saturating_sub(1))
        .filter(|&i| curve[i] < curve[i - 1] && curve[i] <= curve[i + 1])
        .map(|i| separations[i])
        .collect();
    if minima.len() < 2 {
        return None;
    }
    Some((minima[minima.len() - 1] - minima[0]) / (minima.len() - 1) as f64)
}

/// Coherence snapshots of an elastic run at the requested times.
pub fn elastic_coherence_series(
    w0: WignerGrid,
    config: &EvolutionConfig,
    times: &[f64],
    separations: &[f64],
) -> Result<Vec<CoherenceFunction>, TransportError> {
    let cfg = EvolutionConfig { t_end: times.iter().copied().fold(0.0, f64::max), ..*config };
    let run = evolve_with_snapshots(w0, &cfg, times)?;
    Ok(run.snapshots.iter().map(|g| g.coherence_at(separations)).collect())
}

/// Observables at `t_end` for Δt, Δt/2, Δt/4 and the observed order in Δt.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceReport {
    pub dts: [f64; 3],
    pub mean_x: [f64; 3],
    pub var_x: [f64; 3],
    pub order_mean_x: f64,
    pub order_var_x: f64,
}

pub fn convergence_report(w0: &WignerGrid, config: &EvolutionConfig) -> Result<ConvergenceReport, TransportError> {
    let mut dts = [0.0; 3];
    let mut mean_x = [0.0; 3];
    let mut var_x = [0.0; 3];
    for level in 0..3 {
        let dt = config.dt / f64::from(1u32 << level);
        let cfg = EvolutionConfig { dt, record_every: usize::MAX, ..*config };
        let run = evolve(w0.clone(), &cfg)?;
        let o = run.grid.observables();
        dts[level] = dt;
        mean_x[level] = o.mean_x;
        var_x[level] = o.var_x;
    }
    let order = |v: [f64; 3]| ((v[0] - v[1]).abs() / (v[1] - v[2]).abs()).log2();
    Ok(ConvergenceReport { dts, mean_x, var_x, order_mean_x: order(mean_x), order_var_x: order(var_x) })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::phase_space::GaussianState;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn spec() -> GridSpec {
        GridSpec { x_min: -16.0, x_max: 16.0, nx: 128, p_max: 3.0, np: 61 }
    }

    fn cloud(p0: f64) -> WignerGrid {
        WignerGrid::init_gaussian(spec(), GaussianState { x0: 0.0, p0, sigma_x: 1.0, sigma_p: 0.2 }).unwrap()
    }

    #[test]
    fn exchange_matrix_values() {
        let (c, s) = exchange_coefficients(0.5);
        assert!((c - 0.6839).abs() < 5e-5 && (s - 0.3161).abs() < 5e-5);
        assert_relative_eq!(c, (-0.5f64).exp() * 0.5f64.cosh(), max_relative = 1e-14);
        assert_relative_eq!(s, (-0.5f64).exp() * 0.5f64.sinh(), max_relative = 1e-14);
        assert_eq!(exchange_coefficients(0.0), (1.0, 0.0));
        let (c, s) = exchange_coefficients(1e3);
        assert_eq!((c, s), (0.5, 0.5));
    }

    #[test]
    fn integer_shift_is_exact() {
        let s = spec();
        let w = cloud(0.0);
        let j = s.center() + 5;
        // p_j Δt = 3 Δx for row j
        let dt = 3.0 * s.dx() / s.p(j);
        let (out, lost) = ballistic_step(&w, dt, 0.0, 1.0, OverflowPolicy::Error).unwrap();
        assert_eq!(lost, 0.0);
        let expected = w.shifted_cells(3);
        for (a, b) in out.row(j).iter().zip(expected.row(j)) {
            assert!((a - b).abs() <= 1e-15 * b.abs().max(1e-300));
        }
    }

    #[test]
    fn ballistic_conserves_mass_without_force() {
        let w = cloud(0.7);
        let (out, _) = ballistic_step(&w, 0.137, 0.0, 1.0, OverflowPolicy::Error).unwrap();
        assert!((out.mass() - w.mass()).abs() <= 1e-13);
        assert!(out.min_value() >= 0.0);
    }

    #[test]
    fn resolution_and_overflow_guards() {
        let w = cloud(0.0);
        let err = ballistic_step(&w, 0.1, 3.0, 1.0, OverflowPolicy::Absorb).unwrap_err();
        assert!(matches!(err, TransportError::ResolutionGuard { .. }));
        let edge = WignerGrid::from_fn(spec(), |x, p| if p == 3.0 && x.abs() < 1.0 { 1.0 } else { 0.0 }).unwrap();
        let err = ballistic_step(&edge, 0.1, 1.0, 1.0, OverflowPolicy::Error).unwrap_err();
        assert!(matches!(err, TransportError::MomentumOverflow { .. }));
        let (out, lost) = ballistic_step(&edge, 0.1, 1.0, 1.0, OverflowPolicy::Absorb).unwrap();
        assert!(lost > 0.0);
        assert!((out.mass() + lost - edge.mass()).abs() < 1e-12);
    }

    #[test]
    fn scattering_pair_behaviour() {
        let s = spec();
        let kernel = ScatteringKernel::constant(1.0).unwrap();
        let j = s.center() + 3;
        let w = WignerGrid::from_fn(s, |_, p| if p == s.p(j) { 1.0 } else { 0.0 }).unwrap();
        let out = scattering_step(&w, 0.5, &kernel).unwrap();
        assert!((out.get(0, j) - 0.6839).abs() < 5e-5);
        assert!((out.get(0, s.mirror(j)) - 0.3161).abs() < 5e-5);
        let same = scattering_step(&w, 0.0, &kernel).unwrap();
        assert_eq!(same.values(), w.values());
        let zero_row = WignerGrid::from_fn(s, |_, p| if p == 0.0 { 2.0 } else { 0.0 }).unwrap();
        assert_eq!(scattering_step(&zero_row, 3.0, &kernel).unwrap().values(), zero_row.values());
    }

    #[test]
    fn ballistic_with_force_follows_parabola() {
        let s = GridSpec { x_min: -40.0, x_max: 40.0, nx: 512, p_max: 3.0, np: 121 };
        let w = WignerGrid::init_gaussian(s, GaussianState { x0: -5.0, p0: -1.0, sigma_x: 1.0, sigma_p: 0.15 })
            .unwrap();
        let kernel = ScatteringKernel::constant(0.0).unwrap();
        let config = EvolutionConfig { dt: 0.05, force: 0.3, overflow: OverflowPolicy::Error, ..EvolutionConfig::new(kernel, 5.0) };
        let run = evolve(w, &config).unwrap();
        assert_eq!(run.series.len(), 101);
        for (t, x) in run.series.times.iter().zip(&run.series.mean_x) {
            let exact = -5.0 - t + 0.15 * t * t;
            assert!((x - exact).abs() <= 5e-3 * exact.abs().max(1.0), "{t}: {x} vs {exact}");
        }
    }

    #[test]
    fn time_reversal_is_diffusive_but_close() {
        let w = cloud(0.5);
        let (fwd, _) = ballistic_step(&w, 0.3, 0.0, 1.0, OverflowPolicy::Error).unwrap();
        let (back, _) = ballistic_step(&fwd, -0.3, 0.0, 1.0, OverflowPolicy::Error).unwrap();
        let o0 = w.observables();
        let o1 = back.observables();
        assert!((o1.mean_x - o0.mean_x).abs() < 1e-12);
        // linear interpolation adds at most Δx²/2 of variance per pass
        let dx = spec().dx();
        assert!(o1.var_x >= o0.var_x && o1.var_x - o0.var_x <= dx * dx);
        assert!(back.values() != w.values());
    }

    #[test]
    fn propagator_records_and_snapshots() {
        let kernel = ScatteringKernel::exponential(1.0, 0.1).unwrap();
        let config = EvolutionConfig { record_every: 4, ..EvolutionConfig::new(kernel, 1.0) };
        let run = evolve_with_snapshots(cloud(-0.5), &config, &[0.0, 0.5]).unwrap();
        assert_eq!(config.steps(), 20);
        assert_eq!(run.series.times.len(), 6);
        assert_relative_eq!(*run.series.times.last().unwrap(), 1.0, max_relative = 1e-12);
        assert_eq!(run.snapshots.len(), 2);
        assert_eq!(run.snapshots[0].time(), 0.0);
        assert_relative_eq!(run.snapshots[1].time(), 0.5, max_relative = 1e-12);
    }

    #[test]
    fn wraparound_detected() {
        let kernel = ScatteringKernel::constant(0.0).unwrap();
        let config = EvolutionConfig::new(kernel, 30.0);
        let err = evolve(cloud(1.0), &config).unwrap_err();
        assert!(matches!(err, TransportError::Wraparound { .. }));
        assert!(err.step().unwrap() > 0);
    }

    #[test]
    fn config_validation() {
        let kernel = ScatteringKernel::constant(1.0).unwrap();
        let bad = EvolutionConfig { dt: 0.6, ..EvolutionConfig::new(kernel, 1.0) };
        assert!(matches!(bad.validate(), Err(TransportError::InvalidConfig(_))));
        let bad = EvolutionConfig { record_every: 0, ..EvolutionConfig::new(kernel, 1.0) };
        assert!(bad.validate().is_err());
        assert_relative_eq!(EvolutionConfig::new(ScatteringKernel::constant(2.0).unwrap(), 1.0).dt, 0.025);
    }

    #[test]
    fn asymptotic_formulas() {
        let kernel = ScatteringKernel::constant(1.0).unwrap();
        let a = laplace_asymptotics(1.0, 1.0, &kernel).unwrap();
        assert_eq!((a.displacement, a.variance_slope), (0.5, 0.5));
        let b = laplace_asymptotics(2.0, 1.0, &kernel).unwrap();
        assert_eq!((b.displacement, b.variance_slope), (1.0, 2.0));
        let none = ScatteringKernel::constant(0.0).unwrap();
        assert!(matches!(laplace_asymptotics(1.0, 1.0, &none), Err(TransportError::NoAsymptote(_))));
    }

    #[test]
    fn slowest_root_matches_small_k_expansion() {
        let (k, p, g) = (1e-3, 1.0, 0.9);
        let (slow, fast) = denominator_roots(k, p, 1.0, g);
        assert_relative_eq!(slow.re, -k * k * p * p / (2.0 * g), max_relative = 1e-6);
        assert!(fast.re < slow.re);
        let den = |z: Complex64| z * z + 2.0 * g * z + k * k * p * p;
        assert!(den(slow).norm() < 1e-15 && den(fast).norm() < 1e-12);
    }

    #[test]
    fn envelope_and_period_helpers() {
        let s: Vec<f64> = (0..2000).map(|i| i as f64 * 0.01).collect();
        let curve: Vec<f64> = s.iter().map(|&x| (-x * x / 8.0).exp() * (1.5 * x).cos().abs()).collect();
        let period = oscillation_period(&s, &curve).unwrap();
        assert!((period - std::f64::consts::PI / 1.5).abs() < 0.02);
        let env: Vec<f64> = s.iter().map(|&x| (-x * x / 8.0).exp()).collect();
        assert!((one_over_e_width(&s, &env).unwrap() - 8f64.sqrt()).abs() < 1e-3);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn scattering_is_doubly_stochastic(gdt in 0.0f64..5.0, seed in 0u64..1000) {
            let s = spec();
            let w = WignerGrid::from_fn(s, |x, p| {
                let h = ((x * 12.9898 + p * 78.233 + seed as f64).sin() * 43758.5453).fract().abs();
                h
            }).unwrap();
            let kernel = ScatteringKernel::constant(1.0).unwrap();
            let out = scattering_step(&w, gdt, &kernel).unwrap();
            prop_assert!((out.mass() - w.mass()).abs() <= 1e-13 * w.mass());
            prop_assert!(out.min_value() >= 0.0);
            let (a, b) = (w.abs_p_marginal(), out.abs_p_marginal());
            for (x, y) in a.iter().zip(&b) {
                prop_assert!((x - y).abs() <= 1e-13 * x.abs().max(1e-300));
            }
            prop_assert_eq!(out.row(s.center()), w.row(s.center()));
        }

        #[test]
        fn ballistic_positive_and_conservative(dt in -0.5f64..0.5, p0 in -0.8f64..0.8) {
            let w = cloud(p0);
            let (out, lost) = ballistic_step(&w, dt, 0.0, 1.0, OverflowPolicy::Error).unwrap();
            prop_assert_eq!(lost, 0.0);
            prop_assert!(out.min_value() >= 0.0);
            prop_assert!((out.mass() - w.mass()).abs() <= 1e-13);
        }
    }
}
