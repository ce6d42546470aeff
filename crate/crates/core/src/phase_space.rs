//! Discretized Wigner distribution on a uniform phase-space grid.
//!
//! Simulation units, ħ = m = 1. The x axis is periodic with cells
//! `x_i = x_min + i Δx`, `i < N_x`, `Δx = (x_max − x_min)/N_x`. The p axis has an
//! odd number of points symmetric about zero, `p_j = (j − c) Δp` with centre
//! index `c = (N_p − 1)/2`, so `j ↔ N_p − 1 − j` is the exact mirror `p ↔ −p`.
//!
//! Values are stored row-major with one row per momentum.

use std::io::Write;

use num_complex::Complex64;
use thiserror::Error;

use crate::quadrature::pairwise_sum;

/// Gaussian tails at the grid edge must be below this fraction of the peak.
pub const EDGE_TAIL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PhaseSpaceError {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("gaussian width {width} is below two grid cells ({cell}) along {axis}")]
    Unresolvable { axis: char, width: f64, cell: f64 },
    #[error("gaussian support does not fit the grid along {axis}")]
    SupportOverflow { axis: char },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub x_min: f64,
    pub x_max: f64,
    pub nx: usize,
    pub p_max: f64,
    pub np: usize,
}

impl GridSpec {
    pub fn validate(&self) -> Result<(), PhaseSpaceError> {
        let bad = |m: String| Err(PhaseSpaceError::InvalidGrid(m));
        if !(self.x_min.is_finite() && self.x_max.is_finite() && self.x_max > self.x_min) {
            return bad(format!("x range [{}, {}]", self.x_min, self.x_max));
        }
        if self.nx < 2 {
            return bad(format!("nx = {}", self.nx));
        }
        if self.np < 3 || self.np % 2 == 0 {
            return bad(format!("np = {} must be odd and at least 3", self.np));
        }
        if !(self.p_max.is_finite() && self.p_max > 0.0) {
            return bad(format!("p_max = {}", self.p_max));
        }
        Ok(())
    }

    pub fn dx(&self) -> f64 {
        (self.x_max - self.x_min) / self.nx as f64
    }

    pub fn dp(&self) -> f64 {
        2.0 * self.p_max / (self.np - 1) as f64
    }

    pub fn length(&self) -> f64 {
        self.x_max - self.x_min
    }

    pub fn center(&self) -> usize {
        (self.np - 1) / 2
    }

    pub fn x(&self, i: usize) -> f64 {
        self.x_min + i as f64 * self.dx()
    }

    pub fn p(&self, j: usize) -> f64 {
        (j as f64 - self.center() as f64) * self.dp()
    }

    pub fn mirror(&self, j: usize) -> usize {
        self.np - 1 - j
    }
}

/// Initial gaussian cloud parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianState {
    pub x0: f64,
    pub p0: f64,
    pub sigma_x: f64,
    pub sigma_p: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct WignerGrid {
    spec: GridSpec,
    time: f64,
    values: Vec<f64>,
}

/// Moments of the distribution at one instant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Observables {
    pub time: f64,
    pub mean_x: f64,
    pub var_x: f64,
    pub mean_p: f64,
    pub var_p: f64,
    pub mass: f64,
}

impl WignerGrid {
    pub fn zeros(spec: GridSpec) -> Result<Self, PhaseSpaceError> {
        spec.validate()?;
        Ok(Self { spec, time: 0.0, values: vec![0.0; spec.nx * spec.np] })
    }

    pub fn from_fn(spec: GridSpec, f: impl Fn(f64, f64) -> f64) -> Result<Self, PhaseSpaceError> {
        let mut w = Self::zeros(spec)?;
        for j in 0..spec.np {
            let p = spec.p(j);
            for (i, v) in w.row_mut(j).iter_mut().enumerate() {
                *v = f(spec.x(i), p);
            }
        }
        Ok(w)
    }

    /// Normalized product gaussian, mass 1.
    pub fn init_gaussian(spec: GridSpec, g: GaussianState) -> Result<Self, PhaseSpaceError> {
        spec.validate()?;
        if !(g.sigma_x.is_finite() && g.sigma_x >= 2.0 * spec.dx()) {
            return Err(PhaseSpaceError::Unresolvable { axis: 'x', width: g.sigma_x, cell: spec.dx() });
        }
        if !(g.sigma_p.is_finite() && g.sigma_p >= 2.0 * spec.dp()) {
            return Err(PhaseSpaceError::Unresolvable { axis: 'p', width: g.sigma_p, cell: spec.dp() });
        }
        let reach = (2.0 * (1.0 / EDGE_TAIL).ln()).sqrt();
        if g.x0 - reach * g.sigma_x < spec.x_min || g.x0 + reach * g.sigma_x > spec.x_max {
            return Err(PhaseSpaceError::SupportOverflow { axis: 'x' });
        }
        if g.p0 - reach * g.sigma_p < -spec.p_max || g.p0 + reach * g.sigma_p > spec.p_max {
            return Err(PhaseSpaceError::SupportOverflow { axis: 'p' });
        }
        let profile = |n: usize, at: &dyn Fn(usize) -> f64, c: f64, s: f64, step: f64| {
            let v: Vec<f64> = (0..n).map(|k| (-0.5 * ((at(k) - c) / s).powi(2)).exp()).collect();
            let norm = pairwise_sum(&v) * step;
            v.into_iter().map(|e| e / norm).collect::<Vec<_>>()
        };
        let gx = profile(spec.nx, &|i| spec.x(i), g.x0, g.sigma_x, spec.dx());
        let gp = profile(spec.np, &|j| spec.p(j), g.p0, g.sigma_p, spec.dp());
        let mut w = Self::zeros(spec)?;
        for (j, pj) in gp.iter().enumerate() {
            for (v, xi) in w.row_mut(j).iter_mut().zip(&gx) {
                *v = pj * xi;
            }
        }
        Ok(w)
    }

    pub fn spec(&self) -> &GridSpec {
        &self.spec
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn set_time(&mut self, t: f64) {
        self.time = t;
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub(crate) fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn row(&self, j: usize) -> &[f64] {
        let nx = self.spec.nx;
        &self.values[j * nx..(j + 1) * nx]
    }

    pub fn row_mut(&mut self, j: usize) -> &mut [f64] {
        let nx = self.spec.nx;
        &mut self.values[j * nx..(j + 1) * nx]
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[j * self.spec.nx + i]
    }

    /// Σ_x W Δx per momentum row.
    pub fn row_masses(&self) -> Vec<f64> {
        let dx = self.spec.dx();
        (0..self.spec.np).map(|j| pairwise_sum(self.row(j)) * dx).collect()
    }

    /// Momentum marginal density n(p) = Σ_x W Δx (same as `row_masses`).
    pub fn momentum_marginal(&self) -> Vec<f64> {
        self.row_masses()
    }

    /// Σ_x [W(x, p) + W(x, −p)] Δx indexed by |p|/Δp (the p = 0 row counted once).
    pub fn abs_p_marginal(&self) -> Vec<f64> {
        let rows = self.row_masses();
        let c = self.spec.center();
        (0..=c).map(|k| if k == 0 { rows[c] } else { rows[c + k] + rows[c - k] }).collect()
    }

    pub fn mass(&self) -> f64 {
        pairwise_sum(&self.row_masses()) * self.spec.dp()
    }

    pub fn min_value(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Mass in column `i`, as a fraction of total mass.
    pub fn column_fraction(&self, i: usize) -> f64 {
        let col: Vec<f64> = (0..self.spec.np).map(|j| self.get(i, j)).collect();
        let m = self.mass();
        if m > 0.0 {
            pairwise_sum(&col) * self.spec.dx() * self.spec.dp() / m
        } else {
            0.0
        }
    }

    /// W(x, −p).
    pub fn mirrored(&self) -> Self {
        let mut out = self.clone();
        for j in 0..self.spec.np {
            out.row_mut(j).copy_from_slice(self.row(self.spec.mirror(j)));
        }
        out
    }

    /// Periodic translation by a whole number of cells.
    pub fn shifted_cells(&self, cells: isize) -> Self {
        let nx = self.spec.nx as isize;
        let mut out = self.clone();
        for j in 0..self.spec.np {
            let src = self.row(j);
            for (i, v) in out.row_mut(j).iter_mut().enumerate() {
                *v = src[(i as isize - cells).rem_euclid(nx) as usize];
            }
        }
        out
    }

    pub fn observables(&self) -> Observables {
        let s = &self.spec;
        let (dx, dp) = (s.dx(), s.dp());
        let xs: Vec<f64> = (0..s.nx).map(|i| s.x(i)).collect();
        let rows = self.row_masses();
        let mass = pairwise_sum(&rows) * dp;
        let weighted = |f: &dyn Fn(usize, f64) -> f64| -> f64 {
            let per_row: Vec<f64> = (0..s.np)
                .map(|j| {
                    let terms: Vec<f64> = self.row(j).iter().enumerate().map(|(i, &w)| f(i, w)).collect();
                    pairwise_sum(&terms)
                })
                .collect();
            pairwise_sum(&per_row) * dx * dp / mass
        };
        let mean_x = weighted(&|i, w| xs[i] * w);
        let var_x = weighted(&|i, w| (xs[i] - mean_x).powi(2) * w);
        let p_terms: Vec<f64> = (0..s.np).map(|j| s.p(j) * rows[j]).collect();
        let mean_p = pairwise_sum(&p_terms) * dp / mass;
        let q_terms: Vec<f64> = (0..s.np).map(|j| (s.p(j) - mean_p).powi(2) * rows[j]).collect();
        let var_p = pairwise_sum(&q_terms) * dp / mass;
        Observables { time: self.time, mean_x, var_x, mean_p, var_p, mass }
    }

    /// Spatially averaged coherence on the natural separation grid
    /// `s_k = k · 2π/(N_p Δp)`, `|k| ≤ (N_p − 1)/2`, so `s_max ≈ π/Δp`.
    pub fn coherence(&self) -> CoherenceFunction {
        let c = self.spec.center() as isize;
        let step = 2.0 * std::f64::consts::PI / (self.spec.np as f64 * self.spec.dp());
        let s: Vec<f64> = (-c..=c).map(|k| k as f64 * step).collect();
        self.coherence_at(&s)
    }

    /// Γ(s) = Σ_p n(p) e^{−ips} Δp at arbitrary separations.
    pub fn coherence_at(&self, separations: &[f64]) -> CoherenceFunction {
        let n = self.momentum_marginal();
        let dp = self.spec.dp();
        let ps: Vec<f64> = (0..self.spec.np).map(|j| self.spec.p(j)).collect();
        let values = separations
            .iter()
            .map(|&s| {
                let (re, im): (Vec<f64>, Vec<f64>) = ps
                    .iter()
                    .zip(&n)
                    .map(|(p, w)| {
                        let (sn, cs) = (p * s).sin_cos();
                        (w * cs, -w * sn)
                    })
                    .unzip();
                Complex64::new(pairwise_sum(&re) * dp, pairwise_sum(&im) * dp)
            })
            .collect();
        CoherenceFunction { separations: separations.to_vec(), values }
    }

    /// Matrix CSV, one line per momentum row, no header.
    pub fn write_matrix<W: Write>(&self, out: W) -> csv::Result<()> {
        let mut wtr = csv::WriterBuilder::new().has_headers(false).from_writer(out);
        for j in 0..self.spec.np {
            wtr.write_record(self.row(j).iter().map(|v| fmt_num(*v)))?;
        }
        wtr.flush()?;
        Ok(())
    }
}

/// Number formatting shared by every CSV writer.
pub fn fmt_num(v: f64) -> String {
    format!("{v:.12e}")
}

#[derive(Debug, Clone, PartialEq)]
pub struct CoherenceFunction {
    pub separations: Vec<f64>,
    pub values: Vec<Complex64>,
}

impl CoherenceFunction {
    pub fn magnitudes(&self) -> Vec<f64> {
        self.values.iter().map(|v| v.norm()).collect()
    }

    /// Value at s = 0, if sampled.
    pub fn at_zero(&self) -> Option<Complex64> {
        self.separations.iter().position(|&s| s == 0.0).map(|i| self.values[i])
    }

    pub fn write_csv<W: Write>(&self, out: W) -> csv::Result<()> {
        let mut wtr = csv::Writer::from_writer(out);
        wtr.write_record(["s", "re", "im", "abs"])?;
        for (s, v) in self.separations.iter().zip(&self.values) {
            wtr.write_record([fmt_num(*s), fmt_num(v.re), fmt_num(v.im), fmt_num(v.norm())])?;
        }
        wtr.flush()?;
        Ok(())
    }
}

/// Time series of observables; `absorbed` tracks mass lost through the p boundary.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ObservableSeries {
    pub times: Vec<f64>,
    pub mean_x: Vec<f64>,
    pub var_x: Vec<f64>,
    pub mean_p: Vec<f64>,
    pub var_p: Vec<f64>,
    pub mass: Vec<f64>,
    pub absorbed: Vec<f64>,
}

impl ObservableSeries {
    pub fn push(&mut self, o: Observables, absorbed: f64) {
        self.times.push(o.time);
        self.mean_x.push(o.mean_x);
        self.var_x.push(o.var_x);
        self.mean_p.push(o.mean_p);
        self.var_p.push(o.var_p);
        self.mass.push(o.mass);
        self.absorbed.push(absorbed);
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn write_csv<W: Write>(&self, out: W) -> csv::Result<()> {
        let mut wtr = csv::Writer::from_writer(out);
        wtr.write_record(["time", "mean_x", "var_x", "mean_p", "var_p", "mass"])?;
        for k in 0..self.len() {
            wtr.write_record(
                [self.times[k], self.mean_x[k], self.var_x[k], self.mean_p[k], self.var_p[k], self.mass[k]]
                    .map(fmt_num),
            )?;
        }
        wtr.flush()?;
        Ok(())
    }
}
