//! Config-driven scenarios behind the command-line tool.
//!
//! A scenario reads every key it needs from a [`Config`], rejects leftovers,
//! computes all artifacts in memory and only then hands them back. Nothing is
//! written on failure, and the same config always yields the same bytes.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use num_complex::Complex64;
use rayon::prelude::*;
use thiserror::Error;

use crate::config::{Config, ConfigError};
use crate::constants::{RHO_COPPER, TABLE_VERSION};
use crate::correlation::{self, CorrelationError, CorrelationModel, ScatteringKernel};
use crate::elastic::{self, EvolutionConfig, OverflowPolicy, Splitting, TransportError};
use crate::inelastic::{self, InelasticError, InelasticParams};
use crate::near_field::{
    self, GeometrySpec, GeometryTensor, MaterialParams, NoiseError, SpinCoupling,
};
use crate::phase_space::{fmt_num, GaussianState, GridSpec, PhaseSpaceError, WignerGrid};

const MICRON: f64 = 1e-6;

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Noise(#[from] NoiseError),
    #[error(transparent)]
    Correlation(#[from] CorrelationError),
    #[error(transparent)]
    Inelastic(#[from] InelasticError),
    #[error(transparent)]
    Transport(#[from] TransportError),
    #[error(transparent)]
    PhaseSpace(#[from] PhaseSpaceError),
    #[error("writing {path}: {message}")]
    Io { path: PathBuf, message: String },
}

impl ScenarioError {
    /// 2 for rejected input, 3 for a guard abort during a run, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Transport(e) if e.step().is_some() => 3,
            Self::Noise(NoiseError::Quadrature(_)) | Self::Io { .. } => 1,
            _ => 2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Rates,
    Correlation,
    Decohere,
    Evolve,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Self::Rates => "rates",
            Self::Correlation => "correlation",
            Self::Decohere => "decohere",
            Self::Evolve => "evolve",
        }
    }
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Command {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "rates" => Ok(Self::Rates),
            "correlation" => Ok(Self::Correlation),
            "decohere" => Ok(Self::Decohere),
            "evolve" => Ok(Self::Evolve),
            other => Err(format!("unknown command `{other}`")),
        }
    }
}

/// One output file, path relative to the output directory.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Artifact {
    pub path: PathBuf,
    pub contents: Vec<u8>,
}

impl Artifact {
    fn new(path: impl Into<PathBuf>, contents: impl Into<Vec<u8>>) -> Self {
        Self { path: path.into(), contents: contents.into() }
    }
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub artifacts: Vec<Artifact>,
    /// Effective configuration, defaults included; re-running it is bit-identical.
    pub resolved: String,
}

#[derive(Debug, Clone)]
pub struct Scenario {
    pub command: Command,
    pub config: Config,
}

impl Scenario {
    pub fn new(command: Command, config: Config) -> Self {
        Self { command, config }
    }

    pub fn parse(command: Command, text: &str) -> Result<Self, ScenarioError> {
        Ok(Self::new(command, text.parse()?))
    }

    pub fn run(&self) -> Result<RunOutput, ScenarioError> {
        let cfg = &self.config;
        let artifacts = match self.command {
            Command::Rates => {
                let job = RatesJob::read(cfg)?;
                cfg.ensure_consumed()?;
                job.run()?
            }
            Command::Correlation => {
                let job = CorrelationJob::read(cfg)?;
                cfg.ensure_consumed()?;
                job.run()?
            }
            Command::Decohere => {
                let job = DecohereJob::read(cfg)?;
                cfg.ensure_consumed()?;
                job.run()?
            }
            Command::Evolve => {
                let job = EvolveJob::read(cfg)?;
                cfg.ensure_consumed()?;
                job.run()?
            }
        };
        Ok(RunOutput { artifacts, resolved: cfg.resolved_text() })
    }
}

/// Sidecar text: provenance comments followed by the effective config.
pub fn metadata_text(command: &str, resolved: &str, wall_seconds: f64) -> String {
    format!(
        "# wgt {} {command}\n# constants: {TABLE_VERSION}\n# wall_time_s: {wall_seconds:.3}\n{resolved}",
        env!("CARGO_PKG_VERSION"),
    )
}

pub fn write_artifacts(dir: &Path, artifacts: &[Artifact]) -> Result<(), ScenarioError> {
    for a in artifacts {
        let path = dir.join(&a.path);
        let io = |e: std::io::Error| ScenarioError::Io { path: path.clone(), message: e.to_string() };
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent).map_err(io)?;
        }
        fs::write(&path, &a.contents).map_err(io)?;
    }
    Ok(())
}

fn out_of_range(key: &str, message: impl Into<String>) -> ScenarioError {
    ConfigError::OutOfRange { key: key.to_owned(), message: message.into() }.into()
}

fn positive(cfg: &Config, key: &str, default: f64) -> Result<f64, ScenarioError> {
    let v = cfg.get_or(key, default)?;
    if v.is_finite() && v > 0.0 {
        Ok(v)
    } else {
        Err(out_of_range(key, format!("must be positive, got {v}")))
    }
}

fn non_negative(cfg: &Config, key: &str, default: f64) -> Result<f64, ScenarioError> {
    let v = cfg.get_or(key, default)?;
    if v.is_finite() && v >= 0.0 {
        Ok(v)
    } else {
        Err(out_of_range(key, format!("must be non-negative, got {v}")))
    }
}

fn samples(cfg: &Config, key: &str, default: usize) -> Result<usize, ScenarioError> {
    let n = cfg.get_or(key, default)?;
    if n < 2 {
        return Err(out_of_range(key, "need at least 2 samples"));
    }
    Ok(n)
}

fn list_or(cfg: &Config, key: &str, default: &[f64]) -> Result<Vec<f64>, ScenarioError> {
    match cfg.get_list(key)? {
        Some(v) => Ok(v),
        None => {
            let text: Vec<String> = default.iter().map(f64::to_string).collect();
            cfg.note_default(key, text.join(","));
            Ok(default.to_vec())
        }
    }
}

fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    (0..n).map(|k| a + (b - a) * k as f64 / (n - 1) as f64).collect()
}

fn logspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    let (la, lb) = (a.ln(), b.ln());
    (0..n)
        .map(|k| match k {
            0 => a,
            k if k == n - 1 => b,
            k => (la + (lb - la) * k as f64 / (n - 1) as f64).exp(),
        })
        .collect()
}

fn csv_bytes(header: &[String], rows: &[Vec<String>]) -> Result<Vec<u8>, ScenarioError> {
    let mut wtr = csv::Writer::from_writer(Vec::new());
    let io = |e: csv::Error| ScenarioError::Io { path: PathBuf::from("<csv>"), message: e.to_string() };
    wtr.write_record(header).map_err(io)?;
    for r in rows {
        wtr.write_record(r).map_err(io)?;
    }
    wtr.into_inner().map_err(|e| ScenarioError::Io { path: PathBuf::from("<csv>"), message: e.to_string() })
}

fn to_bytes(write: impl FnOnce(&mut Vec<u8>) -> csv::Result<()>) -> Result<Vec<u8>, ScenarioError> {
    let mut buf = Vec::new();
    write(&mut buf).map_err(|e| ScenarioError::Io { path: PathBuf::from("<csv>"), message: e.to_string() })?;
    Ok(buf)
}

/// Column label for a time value, e.g. `t=2.5`.
fn time_label(t: f64) -> String {
    format!("t={t}")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Shape {
    HalfSpace,
    Layer,
    Wire,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Method {
    Auto,
    Analytic,
    Quadrature,
}

struct RatesJob {
    shape: Shape,
    /// Surface distances in meters.
    distances: Vec<f64>,
    thickness: f64,
    radius: f64,
    material: MaterialParams,
    coupling: SpinCoupling,
    bias: [f64; 3],
    method: Method,
    tol: f64,
}

impl RatesJob {
    fn read(cfg: &Config) -> Result<Self, ScenarioError> {
        let shape = match cfg.get_or("rates.geometry", "halfspace".to_owned())?.as_str() {
            "halfspace" => Shape::HalfSpace,
            "layer" => Shape::Layer,
            "wire" => Shape::Wire,
            other => return Err(out_of_range("rates.geometry", format!("`{other}` is not halfspace|layer|wire"))),
        };
        let thickness = if shape == Shape::Layer { positive(cfg, "rates.d", 1.0)? * MICRON } else { 0.0 };
        let radius = if shape == Shape::Wire { positive(cfg, "rates.a", 0.5)? * MICRON } else { 0.0 };
        let distances = if cfg.contains("rates.z_min") || cfg.contains("rates.z_max") {
            let lo = positive(cfg, "rates.z_min", 0.2)?;
            let hi = positive(cfg, "rates.z_max", 50.0)?;
            if hi <= lo {
                return Err(out_of_range("rates.z_max", "must exceed rates.z_min"));
            }
            let n = samples(cfg, "rates.samples", 40)?;
            logspace(lo * MICRON, hi * MICRON, n)
        } else if shape == Shape::Wire && cfg.contains("rates.r") {
            let r = positive(cfg, "rates.r", 1.0)? * MICRON;
            if r <= radius {
                return Err(out_of_range("rates.r", "must exceed the wire radius"));
            }
            vec![r - radius]
        } else {
            vec![positive(cfg, "rates.z", 1.0)? * MICRON]
        };
        let material = MaterialParams {
            temperature: positive(cfg, "rates.temperature", 300.0)?,
            resistivity: positive(cfg, "rates.resistivity", RHO_COPPER)?,
        };
        let coupling = SpinCoupling::bohr_magnetons(positive(cfg, "rates.mu", 1.0)?);
        let raw = list_or(cfg, "rates.bias", &[0.0, 0.0, 1.0])?;
        let norm = raw.iter().map(|b| b * b).sum::<f64>().sqrt();
        if raw.len() != 3 || !(norm > 0.0 && norm.is_finite()) {
            return Err(out_of_range("rates.bias", "need three components, not all zero"));
        }
        let bias = [raw[0] / norm, raw[1] / norm, raw[2] / norm];
        let method = match cfg.get_or("rates.method", "auto".to_owned())?.as_str() {
            "auto" => Method::Auto,
            "analytic" => Method::Analytic,
            "quadrature" => Method::Quadrature,
            other => return Err(out_of_range("rates.method", format!("`{other}` is not auto|analytic|quadrature"))),
        };
        let tol = positive(cfg, "rates.tol", 1e-6)?;
        Ok(Self { shape, distances, thickness, radius, material, coupling, bias, method, tol })
    }

    fn geometry(&self, z: f64) -> GeometrySpec {
        match self.shape {
            Shape::HalfSpace => GeometrySpec::HalfSpace { z },
            Shape::Layer => GeometrySpec::Layer { z, d: self.thickness },
            Shape::Wire => GeometrySpec::Wire { r: z + self.radius, a: self.radius },
        }
    }

    fn tensor(&self, g: &GeometrySpec) -> Result<GeometryTensor, NoiseError> {
        let quadrature = match self.method {
            Method::Auto => self.shape == Shape::Wire,
            Method::Analytic => false,
            Method::Quadrature => true,
        };
        if quadrature {
            near_field::geometry_tensor_quadrature(g, self.tol)
        } else {
            near_field::geometry_tensor_analytic(g)
        }
    }

    fn run(&self) -> Result<Vec<Artifact>, ScenarioError> {
        let rows = self
            .distances
            .par_iter()
            .map(|&z| {
                let g = self.geometry(z);
                let y = self.tensor(&g)?;
                let gamma = near_field::scattering_rate(&self.coupling, &self.material, &y, self.bias)?;
                let mut row = vec![fmt_num(z)];
                if y.trace_only {
                    row.extend(std::iter::repeat(String::new()).take(3));
                } else {
                    row.extend(y.diag().map(fmt_num));
                }
                row.push(fmt_num(y.trace()));
                row.push(fmt_num(gamma));
                Ok(row)
            })
            .collect::<Result<Vec<_>, NoiseError>>()?;
        let header = ["distance_m", "Y11", "Y22", "Y33", "trY", "gamma_per_s"].map(String::from);
        Ok(vec![Artifact::new("rates.csv", csv_bytes(&header, &rows)?)])
    }
}

struct CorrelationJob {
    z: f64,
    s_max: f64,
    samples: usize,
    tol: f64,
}

impl CorrelationJob {
    fn read(cfg: &Config) -> Result<Self, ScenarioError> {
        Ok(Self {
            z: positive(cfg, "correlation.z", 1.0)? * MICRON,
            s_max: positive(cfg, "correlation.s_max", 10.0)?,
            samples: samples(cfg, "correlation.samples", 101)?,
            tol: positive(cfg, "correlation.tol", 1e-6)?,
        })
    }

    /// Separation (in units of z) where the numeric correlation crosses 1/2.
    fn half_width(&self) -> Result<f64, ScenarioError> {
        let c = |u: f64| correlation::halfspace_correlation_numeric(self.z, u * self.z, self.tol);
        let (mut lo, mut hi) = (0.0, 1.0);
        while c(hi)? > 0.5 {
            lo = hi;
            hi *= 2.0;
            if hi > 1e6 {
                return Err(out_of_range("correlation.z", "correlation never drops to 1/2"));
            }
        }
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            if c(mid)? > 0.5 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok(0.5 * (lo + hi))
    }

    fn run(&self) -> Result<Vec<Artifact>, ScenarioError> {
        let lc = self.half_width()?;
        let rows = linspace(0.0, self.s_max, self.samples)
            .par_iter()
            .map(|&u| {
                let numeric = correlation::halfspace_correlation_numeric(self.z, u * self.z, self.tol)?;
                Ok(vec![fmt_num(u), fmt_num(numeric), fmt_num(correlation::lorentzian_correlation(u, lc))])
            })
            .collect::<Result<Vec<_>, CorrelationError>>()?;
        let header = ["separation_over_z", "C_numeric", "C_lorentzian"].map(String::from);
        Ok(vec![Artifact::new("correlation.csv", csv_bytes(&header, &rows)?)])
    }
}

struct DecohereJob {
    params: InelasticParams<1>,
    lc: f64,
    times: Vec<f64>,
    s_max: f64,
    samples: usize,
}

impl DecohereJob {
    fn read(cfg: &Config) -> Result<Self, ScenarioError> {
        let gamma = non_negative(cfg, "decohere.gamma", 1.0)?;
        let lc = positive(cfg, "decohere.lc", 1.0)?;
        let force: f64 = cfg.get_or("decohere.force", 0.0)?;
        let times = list_or(cfg, "decohere.times", &[0.0, 1.0, 3.0])?;
        if times.iter().any(|t| !(t.is_finite() && *t >= 0.0)) {
            return Err(out_of_range("decohere.times", "times must be non-negative"));
        }
        let params = InelasticParams::new(gamma, CorrelationModel::lorentzian(lc)?, [force])?;
        Ok(Self {
            params,
            lc,
            times,
            s_max: positive(cfg, "decohere.s_max", 5.0)?,
            samples: samples(cfg, "decohere.samples", 101)?,
        })
    }

    fn run(&self) -> Result<Vec<Artifact>, ScenarioError> {
        let one = Complex64::new(1.0, 0.0);
        let rows = linspace(0.0, self.s_max, self.samples)
            .into_iter()
            .map(|u| {
                let mut row = vec![fmt_num(u)];
                for &t in &self.times {
                    row.push(fmt_num(inelastic::coherence_decay(one, &self.params, [u * self.lc], t)?.norm()));
                }
                Ok(row)
            })
            .collect::<Result<Vec<_>, InelasticError>>()?;
        let mut header = vec!["s_over_lc".to_owned()];
        header.extend(self.times.iter().map(|&t| time_label(t)));
        Ok(vec![Artifact::new("decohere.csv", csv_bytes(&header, &rows)?)])
    }
}

struct EvolveJob {
    initial: WignerGrid,
    state: GaussianState,
    config: EvolutionConfig,
    snapshots: Vec<f64>,
    separations: Vec<f64>,
    write_wigner: bool,
}

impl EvolveJob {
    fn read(cfg: &Config) -> Result<Self, ScenarioError> {
        let spec = GridSpec {
            x_min: cfg.get_or("grid.x_min", -40.0)?,
            x_max: cfg.get_or("grid.x_max", 40.0)?,
            nx: cfg.get_or("grid.nx", 512)?,
            p_max: cfg.get_or("grid.p_max", 4.0)?,
            np: cfg.get_or("grid.np", 161)?,
        };
        let state = GaussianState {
            x0: cfg.get_or("initial.x0", 0.0)?,
            p0: cfg.get_or("initial.p0", -1.0)?,
            sigma_x: positive(cfg, "initial.sigma_x", 1.0)?,
            sigma_p: positive(cfg, "initial.sigma_p", 0.1)?,
        };
        let gamma0 = non_negative(cfg, "kernel.gamma0", 1.0)?;
        let kernel = match cfg.get_or("kernel.law", "exponential".to_owned())?.as_str() {
            "exponential" => ScatteringKernel::exponential(gamma0, non_negative(cfg, "kernel.lc", 0.1)?)?,
            "constant" => ScatteringKernel::constant(gamma0)?,
            other => return Err(out_of_range("kernel.law", format!("`{other}` is not exponential|constant"))),
        };
        let t_end = non_negative(cfg, "evolve.t_end", 10.0)?;
        let defaults = EvolutionConfig::new(kernel, t_end);
        let splitting = match cfg.get_or("evolve.splitting", "strang".to_owned())?.as_str() {
            "strang" => Splitting::Strang,
            "lie" => Splitting::Lie,
            other => return Err(out_of_range("evolve.splitting", format!("`{other}` is not strang|lie"))),
        };
        let overflow = match cfg.get_or("evolve.boundary", "absorb".to_owned())?.as_str() {
            "absorb" => OverflowPolicy::Absorb,
            "error" => OverflowPolicy::Error,
            other => return Err(out_of_range("evolve.boundary", format!("`{other}` is not absorb|error"))),
        };
        let config = EvolutionConfig {
            dt: positive(cfg, "evolve.dt", defaults.dt)?,
            splitting,
            force: cfg.get_or("evolve.force", 0.0)?,
            record_every: cfg.get_or("evolve.record_every", 1)?,
            overflow,
            mass: positive(cfg, "evolve.mass", 1.0)?,
            edge_tolerance: non_negative(cfg, "evolve.edge_tolerance", defaults.edge_tolerance)?,
            ..defaults
        };
        config.validate()?;
        let snapshots = list_or(cfg, "output.snapshots", &[0.0, t_end])?;
        if snapshots.iter().any(|t| !(*t >= 0.0 && *t <= t_end)) {
            return Err(out_of_range("output.snapshots", "snapshot times must lie in [0, t_end]"));
        }
        let separations = linspace(
            0.0,
            positive(cfg, "output.s_max", 20.0)?,
            samples(cfg, "output.samples", 401)?,
        );
        let write_wigner = cfg.get_or("output.wigner", true)?;
        let initial = WignerGrid::init_gaussian(spec, state)?;
        Ok(Self { initial, state, config, snapshots, separations, write_wigner })
    }

    fn run(&self) -> Result<Vec<Artifact>, ScenarioError> {
        let run = elastic::evolve_with_snapshots(self.initial.clone(), &self.config, &self.snapshots)?;
        let mut out = vec![Artifact::new("observables.csv", to_bytes(|b| run.series.write_csv(b))?)];

        let coherences: Vec<_> = run.snapshots.iter().map(|g| g.coherence_at(&self.separations)).collect();
        let mut header = vec!["s".to_owned()];
        header.extend(self.snapshots.iter().map(|&t| time_label(t)));
        let rows: Vec<Vec<String>> = self
            .separations
            .iter()
            .enumerate()
            .map(|(i, &s)| {
                let mut row = vec![fmt_num(s)];
                row.extend(coherences.iter().map(|c| fmt_num(c.values[i].norm())));
                row
            })
            .collect();
        out.push(Artifact::new("coherence.csv", csv_bytes(&header, &rows)?));

        for ((t, grid), coh) in self.snapshots.iter().zip(&run.snapshots).zip(&coherences) {
            out.push(Artifact::new(format!("coherence_t{t}.csv"), to_bytes(|b| coh.write_csv(b))?));
            if self.write_wigner {
                out.push(Artifact::new(format!("wigner_t{t}.csv"), to_bytes(|b| grid.write_matrix(b))?));
            }
        }

        if self.config.force == 0.0 && self.config.kernel.rate(self.state.p0) > 0.0 {
            let a = elastic::laplace_asymptotics(self.state.p0, self.config.mass, &self.config.kernel)?;
            let var0 = run.series.var_x.first().copied().unwrap_or(0.0);
            let rows: Vec<Vec<String>> = run
                .series
                .times
                .iter()
                .map(|&t| {
                    vec![fmt_num(t), fmt_num(self.state.x0 + a.displacement), fmt_num(var0 + a.variance_slope * t)]
                })
                .collect();
            let header = ["time", "mean_x_limit", "var_x_line"].map(String::from);
            out.push(Artifact::new("asymptotes.csv", csv_bytes(&header, &rows)?));
        }
        Ok(out)
    }
}

/// Canned scenario behind each figure dataset.
pub struct FigureScenario {
    pub name: &'static str,
    pub command: Command,
    pub config: &'static str,
}

/// Forced elastic run: negative initial velocity, positive force.
pub const FORCED_RUN: &str = "
[grid]
x_min = -60
x_max = 140
nx = 1024
p_max = 8
np = 321

[initial]
x0 = 0
p0 = -1
sigma_x = 1
sigma_p = 0.1

[kernel]
law = exponential
gamma0 = 1
lc = 0.1

[evolve]
dt = 0.02
t_end = 25
force = 0.2
record_every = 5

[output]
snapshots = 0, 2, 8, 25
s_max = 20
samples = 401
";

/// Force-free elastic run with the same initial state.
pub const FREE_RUN: &str = "
[grid]
x_min = -60
x_max = 60
nx = 512
p_max = 2
np = 81

[initial]
x0 = 0
p0 = -1
sigma_x = 1
sigma_p = 0.1

[kernel]
law = exponential
gamma0 = 1
lc = 0.1

[evolve]
dt = 0.05
t_end = 50
record_every = 5

[output]
snapshots = 0, 1, 2, 5, 50
s_max = 30
samples = 601
";

pub fn figure_scenarios() -> Vec<FigureScenario> {
    vec![
        FigureScenario {
            name: "fig1_halfspace",
            command: Command::Rates,
            config: "[rates]\ngeometry = halfspace\nz_min = 0.2\nz_max = 50\nsamples = 40\n",
        },
        FigureScenario {
            name: "fig1_layer",
            command: Command::Rates,
            config: "[rates]\ngeometry = layer\nd = 1\nz_min = 0.2\nz_max = 50\nsamples = 40\n",
        },
        FigureScenario {
            name: "fig1_wire",
            command: Command::Rates,
            config: "[rates]\ngeometry = wire\na = 0.5\nz_min = 0.2\nz_max = 50\nsamples = 40\n",
        },
        FigureScenario {
            name: "fig1_wire_far",
            command: Command::Rates,
            config: "[rates]\ngeometry = wire\na = 0.5\nmethod = analytic\nz_min = 0.3\nz_max = 50\nsamples = 40\n",
        },
        FigureScenario {
            name: "fig2",
            command: Command::Correlation,
            config: "[correlation]\nz = 1\ns_max = 10\nsamples = 101\n",
        },
        FigureScenario {
            name: "fig3",
            command: Command::Decohere,
            config: "[decohere]\ngamma = 1\nlc = 1\ntimes = 0, 0.5, 1, 2, 3\ns_max = 5\nsamples = 101\n",
        },
        FigureScenario { name: "fig4", command: Command::Evolve, config: FORCED_RUN },
        FigureScenario { name: "fig6", command: Command::Evolve, config: FREE_RUN },
    ]
}

/// Destination of a scenario artifact inside `figures/`, or `None` to drop it.
fn figure_path(scenario: &str, artifact: &str) -> Option<String> {
    let stem = artifact.strip_suffix(".csv")?;
    match (scenario, stem) {
        ("fig4", "observables") => Some("fig4_observables.csv".into()),
        ("fig4", s) if s.starts_with("wigner_") => Some(format!("fig5_{s}.csv")),
        ("fig6", "observables" | "asymptotes") => Some(format!("fig6_{stem}.csv")),
        ("fig6", s) if s.starts_with("wigner_") => Some(format!("fig6_{s}.csv")),
        ("fig6", "coherence") => Some("fig7_coherence.csv".into()),
        ("fig6", s) if s.starts_with("coherence_") => Some(format!("fig7_{s}.csv")),
        ("fig4", _) => None,
        (name, "rates" | "correlation" | "decohere") => Some(format!("{name}.csv")),
        _ => None,
    }
}

/// Runs every canned scenario; artifacts land under `figures/`, each with the
/// effective config next to it.
pub fn reproduce_figures() -> Result<Vec<Artifact>, ScenarioError> {
    let mut out = Vec::new();
    for fig in figure_scenarios() {
        let run = Scenario::parse(fig.command, fig.config)?.run()?;
        for a in run.artifacts {
            let name = a.path.to_string_lossy().into_owned();
            if let Some(dest) = figure_path(fig.name, &name) {
                out.push(Artifact::new(Path::new("figures").join(dest), a.contents));
            }
        }
        out.push(Artifact::new(
            Path::new("figures").join(format!("{}.cfg", fig.name)),
            format!("# {}\n{}", fig.command, run.resolved),
        ));
    }
    Ok(out)
}
