//! `wgt`: near-field noise rates, correlations and waveguide transport runs.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};

use wgt::config::Config;
use wgt::constants;
use wgt::scenario::{self, Command, Scenario, ScenarioError};

#[derive(Parser)]
#[command(name = "wgt", version, about = "Matter-wave transport near metallic microstructures")]
struct Cli {
    /// Print the physical-constant table and exit.
    #[arg(long)]
    constants: bool,
    #[command(subcommand)]
    command: Option<Sub>,
}

#[derive(Args)]
struct Common {
    /// Scenario file (key = value lines with [section] headers).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory, created if missing.
    #[arg(long, default_value = ".")]
    out_prefix: PathBuf,
    /// Override any config key, e.g. `--set grid.nx=1024`. Repeatable.
    #[arg(long = "set", value_name = "SECTION.KEY=VALUE")]
    set: Vec<String>,
}

#[derive(Subcommand)]
enum Sub {
    /// Geometry tensor and spin-flip rate at one distance or a log sweep.
    #[command(allow_negative_numbers = true)]
    Rates {
        #[command(flatten)]
        common: Common,
        /// halfspace | layer | wire
        #[arg(long)]
        geometry: Option<String>,
        /// Surface distance in µm.
        #[arg(long)]
        z: Option<String>,
        /// Layer thickness in µm.
        #[arg(long)]
        d: Option<String>,
        /// Wire axis distance in µm.
        #[arg(long = "R")]
        r: Option<String>,
        /// Wire radius in µm.
        #[arg(long)]
        a: Option<String>,
        /// Kelvin.
        #[arg(long)]
        temperature: Option<String>,
        /// Ω·m.
        #[arg(long)]
        resistivity: Option<String>,
        /// Magnetic moment in Bohr magnetons.
        #[arg(long)]
        mu: Option<String>,
        /// Bias direction `x,y,z`.
        #[arg(long)]
        bias: Option<String>,
        /// auto | analytic | quadrature
        #[arg(long)]
        method: Option<String>,
        #[arg(long)]
        tol: Option<String>,
        /// Sweep start in µm.
        #[arg(long)]
        z_min: Option<String>,
        /// Sweep end in µm.
        #[arg(long)]
        z_max: Option<String>,
        #[arg(long)]
        samples: Option<String>,
    },
    /// Two-point field correlation above a half-space with its Lorentzian fit.
    Correlation {
        #[command(flatten)]
        common: Common,
        /// Height in µm.
        #[arg(long)]
        z: Option<String>,
        /// Largest separation in units of z.
        #[arg(long)]
        s_max: Option<String>,
        #[arg(long)]
        samples: Option<String>,
        #[arg(long)]
        tol: Option<String>,
    },
    /// Coherence decay under white-noise scattering.
    #[command(allow_negative_numbers = true)]
    Decohere {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        gamma: Option<String>,
        #[arg(long)]
        lc: Option<String>,
        #[arg(long)]
        force: Option<String>,
        /// Comma-separated times.
        #[arg(long)]
        times: Option<String>,
        /// Largest separation in units of lc.
        #[arg(long)]
        s_max: Option<String>,
        #[arg(long)]
        samples: Option<String>,
    },
    /// Phase-space evolution under elastic scattering.
    #[command(allow_negative_numbers = true)]
    Evolve {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        dt: Option<String>,
        #[arg(long)]
        t_end: Option<String>,
        #[arg(long)]
        force: Option<String>,
    },
    /// Regenerate every figure dataset under `<out-prefix>/figures/`.
    Figures {
        #[arg(long, default_value = ".")]
        out_prefix: PathBuf,
    },
}

struct Failure {
    code: u8,
    message: String,
}

impl From<ScenarioError> for Failure {
    fn from(e: ScenarioError) -> Self {
        Self { code: e.exit_code() as u8, message: e.to_string() }
    }
}

fn load(common: &Common, flags: &[(&str, &Option<String>)]) -> Result<Config, Failure> {
    let bad = |message: String| Failure { code: 2, message };
    let mut cfg = match &common.config {
        Some(path) => fs::read_to_string(path)
            .map_err(|e| bad(format!("{}: {e}", path.display())))?
            .parse::<Config>()
            .map_err(|e| bad(format!("{}: {e}", path.display())))?,
        None => Config::default(),
    };
    for spec in &common.set {
        cfg.apply_override(spec).map_err(|e| bad(e.to_string()))?;
    }
    for (key, value) in flags {
        if let Some(v) = value {
            cfg.set(key, v.as_str());
        }
    }
    Ok(cfg)
}

fn execute(command: Command, cfg: Config, out: &Path) -> Result<(), Failure> {
    let start = Instant::now();
    let run = Scenario::new(command, cfg).run()?;
    let meta = scenario::metadata_text(command.name(), &run.resolved, start.elapsed().as_secs_f64());
    scenario::write_artifacts(out, &run.artifacts)?;
    fs::write(out.join("metadata.cfg"), meta)
        .map_err(|e| Failure { code: 1, message: format!("writing metadata: {e}") })?;
    for a in &run.artifacts {
        println!("{}", out.join(&a.path).display());
    }
    Ok(())
}

fn figures(out: &Path) -> Result<(), Failure> {
    let start = Instant::now();
    let artifacts = scenario::reproduce_figures()?;
    scenario::write_artifacts(out, &artifacts)?;
    let meta = format!(
        "# wgt {} figures\n# constants: {}\n# wall_time_s: {:.3}\n",
        env!("CARGO_PKG_VERSION"),
        constants::TABLE_VERSION,
        start.elapsed().as_secs_f64()
    );
    fs::write(out.join("figures").join("metadata.cfg"), meta)
        .map_err(|e| Failure { code: 1, message: format!("writing metadata: {e}") })?;
    for a in &artifacts {
        println!("{}", out.join(&a.path).display());
    }
    Ok(())
}

fn dispatch(sub: Sub) -> Result<(), Failure> {
    match sub {
        Sub::Rates {
            common,
            geometry,
            z,
            d,
            r,
            a,
            temperature,
            resistivity,
            mu,
            bias,
            method,
            tol,
            z_min,
            z_max,
            samples,
        } => {
            let cfg = load(
                &common,
                &[
                    ("rates.geometry", &geometry),
                    ("rates.z", &z),
                    ("rates.d", &d),
                    ("rates.r", &r),
                    ("rates.a", &a),
                    ("rates.temperature", &temperature),
                    ("rates.resistivity", &resistivity),
                    ("rates.mu", &mu),
                    ("rates.bias", &bias),
                    ("rates.method", &method),
                    ("rates.tol", &tol),
                    ("rates.z_min", &z_min),
                    ("rates.z_max", &z_max),
                    ("rates.samples", &samples),
                ],
            )?;
            execute(Command::Rates, cfg, &common.out_prefix)
        }
        Sub::Correlation { common, z, s_max, samples, tol } => {
            let cfg = load(
                &common,
                &[
                    ("correlation.z", &z),
                    ("correlation.s_max", &s_max),
                    ("correlation.samples", &samples),
                    ("correlation.tol", &tol),
                ],
            )?;
            execute(Command::Correlation, cfg, &common.out_prefix)
        }
        Sub::Decohere { common, gamma, lc, force, times, s_max, samples } => {
            let cfg = load(
                &common,
                &[
                    ("decohere.gamma", &gamma),
                    ("decohere.lc", &lc),
                    ("decohere.force", &force),
                    ("decohere.times", &times),
                    ("decohere.s_max", &s_max),
                    ("decohere.samples", &samples),
                ],
            )?;
            execute(Command::Decohere, cfg, &common.out_prefix)
        }
        Sub::Evolve { common, dt, t_end, force } => {
            let cfg = load(&common, &[("evolve.dt", &dt), ("evolve.t_end", &t_end), ("evolve.force", &force)])?;
            execute(Command::Evolve, cfg, &common.out_prefix)
        }
        Sub::Figures { out_prefix } => figures(&out_prefix),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if cli.constants {
        println!("# {}", constants::TABLE_VERSION);
        println!("symbol,value,unit");
        for (symbol, value, unit) in constants::table() {
            println!("{symbol},{value:e},{unit}");
        }
        return ExitCode::SUCCESS;
    }
    let Some(sub) = cli.command else {
        eprintln!("error: a subcommand is required (see --help)");
        return ExitCode::from(2);
    };
    match dispatch(sub) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
