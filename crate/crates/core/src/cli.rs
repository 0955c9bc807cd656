//! Configuration files and the `utc` command-line front end.
//!
//! Exit codes: 0 success, 1 runtime failure, 2 configuration or usage error,
//! 3 no stability certificate.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::controller::{Propagation, UtcParams};
use crate::linalg::Mat;
use crate::plant::{
    make_admire, make_quadcopter, BoundedNonlinearity, LtiPlant, Plant, PlantModel,
    QuadcopterParams,
};
use crate::sim::{self, Reference, Scenario, DEFAULT_TAIL_FRACTION};
use crate::stability::{build_closed_loop, certify, falsify};

pub const EXIT_OK: i32 = 0;
pub const EXIT_RUNTIME: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_NO_CERTIFICATE: i32 = 3;

/// Band used for the settling time reported in summaries.
pub const DEFAULT_SETTLING_BAND: f64 = 0.05;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("config parse error: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("invalid value for `{key}`: {message}")]
    Invalid { key: String, message: String },
}

fn invalid(key: &str, message: impl Into<String>) -> ConfigError {
    ConfigError::Invalid {
        key: key.to_string(),
        message: message.into(),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PlantKind {
    Admire,
    Quadcopter,
    CustomLti,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuadcopterConfig {
    pub ixx: f64,
    pub iyy: f64,
    pub izz: f64,
    pub jr: f64,
    pub kt: f64,
    pub kb: f64,
    pub arm: f64,
}

impl Default for QuadcopterConfig {
    fn default() -> Self {
        let p = QuadcopterParams::default();
        Self {
            ixx: p.ixx,
            iyy: p.iyy,
            izz: p.izz,
            jr: p.jr,
            kt: p.kt,
            kb: p.kb,
            arm: p.arm,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlantConfig {
    pub model: PlantKind,
    /// Discretization step for admire/quadcopter; metadata for custom-lti.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dt: Option<f64>,
    /// Sinusoidal perturbation amplitudes (admire, custom-lti).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub quadcopter: Option<QuadcopterConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c: Option<Vec<Vec<f64>>>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PropagationKind {
    Hold,
    Noise,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SigmaScaleName {
    Input,
    State,
}

/// `"input"` (m), `"state"` (n), or an explicit count.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SigmaScale {
    Named(SigmaScaleName),
    Count(usize),
}

impl Default for SigmaScale {
    fn default() -> Self {
        SigmaScale::Named(SigmaScaleName::Input)
    }
}

fn default_propagation() -> PropagationKind {
    PropagationKind::Hold
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ControllerConfig {
    pub n_steps: usize,
    pub w0: f64,
    pub q_u: Vec<Vec<f64>>,
    pub p_err: Vec<Vec<f64>>,
    #[serde(default)]
    pub sigma_scale_dim: SigmaScale,
    #[serde(default = "default_propagation")]
    pub propagation: PropagationKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub input_bounds: Option<Vec<[f64; 2]>>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ReferenceKind {
    Zero,
    Sinusoid,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReferenceConfig {
    pub kind: ReferenceKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub amplitude: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub frequency_hz: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phase: Option<Vec<f64>>,
}

impl Default for ReferenceConfig {
    fn default() -> Self {
        Self {
            kind: ReferenceKind::Zero,
            amplitude: None,
            frequency_hz: None,
            phase: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub horizon: usize,
    pub x0_half_width: Vec<f64>,
    pub seed: u64,
    #[serde(default)]
    pub reference: ReferenceConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub u0: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p0: Option<Vec<Vec<f64>>>,
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("out")
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default = "default_output_dir")]
    pub dir: PathBuf,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self {
            dir: default_output_dir(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CertifyConfig {
    /// Fixed gain `K` (m x p) used when the gain source is the config.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gain: Option<Vec<Vec<f64>>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub plant: PlantConfig,
    pub controller: ControllerConfig,
    pub scenario: ScenarioConfig,
    #[serde(default)]
    pub output: OutputConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub certify: Option<CertifyConfig>,
}

fn matrix(key: &str, rows: &[Vec<f64>]) -> Result<Mat, ConfigError> {
    Mat::from_rows(rows).map_err(|e| invalid(key, e.to_string()))
}

fn vector3(key: &str, v: &Option<Vec<f64>>, default: [f64; 3]) -> Result<[f64; 3], ConfigError> {
    match v {
        None => Ok(default),
        Some(v) => <[f64; 3]>::try_from(v.as_slice())
            .map_err(|_| invalid(key, format!("expected 3 entries, got {}", v.len()))),
    }
}

impl Config {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let cfg: Config = toml::from_str(text)?;
        cfg.scenario()?;
        Ok(cfg)
    }

    /// Reads and validates a config file, returning it with its raw text.
    pub fn load(path: &Path) -> Result<(Self, String), ConfigError> {
        let text = fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Ok((Self::parse(&text)?, text))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config is always representable as TOML")
    }

    pub fn build_plant(&self) -> Result<PlantModel, ConfigError> {
        let pc = &self.plant;
        let dt = pc.dt.unwrap_or(crate::plant::DEFAULT_DT);
        if pc.dt.is_some_and(|d| d.is_nan() || d < 0.0) {
            return Err(invalid("plant.dt", "must be non-negative"));
        }
        match pc.model {
            PlantKind::Admire => {
                let beta = vector3("plant.beta", &pc.beta, [0.1; 3])?;
                let alpha = vector3("plant.alpha", &pc.alpha, [5.0; 3])?;
                make_admire(dt, beta, alpha)
                    .map(PlantModel::Lti)
                    .map_err(|e| invalid("plant.dt", e.to_string()))
            }
            PlantKind::Quadcopter => {
                let q = pc.quadcopter.clone().unwrap_or_default();
                let params = QuadcopterParams {
                    ixx: q.ixx,
                    iyy: q.iyy,
                    izz: q.izz,
                    jr: q.jr,
                    kt: q.kt,
                    kb: q.kb,
                    arm: q.arm,
                    dt,
                };
                make_quadcopter(params)
                    .map(PlantModel::Nonlinear)
                    .map_err(|e| invalid("plant.quadcopter", e.to_string()))
            }
            PlantKind::CustomLti => {
                let get = |key: &str, m: &Option<Vec<Vec<f64>>>| {
                    m.as_ref()
                        .ok_or_else(|| invalid(key, "required for model = \"custom-lti\""))
                        .and_then(|rows| matrix(key, rows))
                };
                let a = get("plant.a", &pc.a)?;
                let b = get("plant.b", &pc.b)?;
                let c = get("plant.c", &pc.c)?;
                let n = a.rows();
                let f = match (&pc.beta, &pc.alpha) {
                    (None, None) => BoundedNonlinearity::zero(n),
                    (Some(beta), Some(alpha)) => {
                        if beta.len() != n || alpha.len() != n {
                            return Err(invalid(
                                "plant.beta",
                                format!("beta and alpha need {n} entries"),
                            ));
                        }
                        BoundedNonlinearity::sinusoidal(beta, alpha, 1.0)
                    }
                    _ => {
                        return Err(invalid(
                            "plant.beta",
                            "beta and alpha must be given together",
                        ))
                    }
                };
                LtiPlant::new(a, b, c, f, pc.dt.unwrap_or(0.0))
                    .map(PlantModel::Lti)
                    .map_err(|e| invalid("plant", e.to_string()))
            }
        }
    }

    pub fn build_params(&self, plant: &dyn Plant) -> Result<UtcParams, ConfigError> {
        let cc = &self.controller;
        let q_u = matrix("controller.q_u", &cc.q_u)?;
        let p_err = matrix("controller.p_err", &cc.p_err)?;
        let mut params = UtcParams::new(cc.n_steps, cc.w0, q_u, p_err);
        params.sigma_scale_dim = match cc.sigma_scale_dim {
            SigmaScale::Named(SigmaScaleName::Input) => plant.input_dim(),
            SigmaScale::Named(SigmaScaleName::State) => plant.state_dim(),
            SigmaScale::Count(d) => d,
        };
        params.propagation = match cc.propagation {
            PropagationKind::Hold => Propagation::Hold,
            PropagationKind::Noise => Propagation::Noise,
        };
        params.input_bounds = cc
            .input_bounds
            .as_ref()
            .map(|b| b.iter().map(|[lo, hi]| (*lo, *hi)).collect());
        params.rng_seed = self.scenario.seed;
        if !(cc.w0 > 0.0 && cc.w0 < 1.0) {
            return Err(invalid(
                "controller.w0",
                format!("W0 must lie in (0,1), got {}", cc.w0),
            ));
        }
        if cc.n_steps < 1 {
            return Err(invalid("controller.n_steps", "N must be at least 1"));
        }
        params
            .validate_for(plant)
            .map_err(|e| invalid("controller", e.to_string()))?;
        Ok(params)
    }

    /// Fully validated scenario.
    pub fn scenario(&self) -> Result<Scenario, ConfigError> {
        let plant = self.build_plant()?;
        let params = self.build_params(&plant)?;
        let sc = &self.scenario;
        let mut scn = Scenario::new(plant, params, sc.horizon, sc.x0_half_width.clone(), sc.seed);
        if let Some(u0) = &sc.u0 {
            scn.u0 = u0.clone();
        }
        if let Some(p0) = &sc.p0 {
            scn.p0 = matrix("scenario.p0", p0)?;
        }
        scn.reference = match sc.reference.kind {
            ReferenceKind::Zero => Reference::Zero,
            ReferenceKind::Sinusoid => {
                let p = scn.plant.output_dim();
                let field = |key: &str,
                             v: &Option<Vec<f64>>,
                             default: f64|
                 -> Result<Vec<f64>, ConfigError> {
                    let v = v.clone().unwrap_or_else(|| vec![default; p]);
                    if v.len() != p {
                        return Err(invalid(
                            key,
                            format!("expected {p} entries, got {}", v.len()),
                        ));
                    }
                    Ok(v)
                };
                let amplitude = sc.reference.amplitude.clone().ok_or_else(|| {
                    invalid("scenario.reference.amplitude", "required for sinusoid")
                })?;
                Reference::Sinusoid {
                    amplitude: field("scenario.reference.amplitude", &Some(amplitude), 0.0)?,
                    frequency_hz: field(
                        "scenario.reference.frequency_hz",
                        &sc.reference.frequency_hz,
                        0.0,
                    )?,
                    phase: field("scenario.reference.phase", &sc.reference.phase, 0.0)?,
                }
            }
        };
        if sc.horizon < 1 {
            return Err(invalid("scenario.horizon", "must be at least 1"));
        }
        scn.validate()
            .map_err(|e| invalid("scenario", e.to_string()))?;
        Ok(scn)
    }

    /// The certified loop needs an LTI plant.
    pub fn lti_plant(&self) -> Result<LtiPlant, ConfigError> {
        match self.build_plant()? {
            PlantModel::Lti(p) => Ok(p),
            PlantModel::Nonlinear(_) => Err(invalid(
                "plant.model",
                "certification needs an LTI-plus-bounded-nonlinearity plant (admire or custom-lti)",
            )),
        }
    }
}

pub fn config_hash(text: &str) -> String {
    let digest = Sha256::digest(text.as_bytes());
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

#[derive(Parser, Debug)]
#[command(
    name = "utc",
    version,
    about = "Unscented transform controller simulations and stability certificates"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct CommonArgs {
    /// Scenario/config file (TOML).
    #[arg(long)]
    pub config: PathBuf,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Simulation horizon in steps.
    #[arg(long)]
    pub steps: Option<usize>,
    /// Prediction horizon N.
    #[arg(long = "n-steps")]
    pub n_steps: Option<usize>,
    /// Output directory.
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum GainSource {
    /// `certify.gain` from the config file.
    Config,
    /// Final gain of a simulated run of the scenario.
    Simulation,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Run one closed-loop simulation and write its trajectory CSV.
    Simulate(CommonArgs),
    /// Build the fixed-gain closed loop and print its stability certificate.
    Certify {
        #[command(flatten)]
        common: CommonArgs,
        /// Where the fixed gain comes from; defaults to the config when it has one.
        #[arg(long, value_enum)]
        gain: Option<GainSource>,
        /// Also simulate this many random trajectories against the certificate.
        #[arg(long, default_value_t = 0)]
        falsify: usize,
    },
    /// Run the scenario once per prediction horizon.
    Sweep {
        #[command(flatten)]
        common: CommonArgs,
        /// Comma-separated prediction horizons, e.g. 1,3,5.
        #[arg(long = "n-list", value_delimiter = ',', required = true)]
        n_list: Vec<usize>,
    },
}

/// Loaded config with command-line overrides applied.
pub struct Effective {
    pub config: Config,
    pub hash: String,
}

fn load_effective(args: &CommonArgs) -> Result<Effective, ConfigError> {
    let (mut config, text) = Config::load(&args.config)?;
    if let Some(seed) = args.seed {
        config.scenario.seed = seed;
    }
    if let Some(steps) = args.steps {
        config.scenario.horizon = steps;
    }
    if let Some(n) = args.n_steps {
        config.controller.n_steps = n;
    }
    if let Some(dir) = &args.output {
        config.output.dir = dir.clone();
    }
    config.scenario()?;
    Ok(Effective {
        config,
        hash: config_hash(&text),
    })
}

fn write_run_log(eff: &Effective, command: &str) -> std::io::Result<()> {
    let dir = &eff.config.output.dir;
    fs::create_dir_all(dir)?;
    let mut log = String::new();
    let _ = writeln!(log, "# utc {} {}", env!("CARGO_PKG_VERSION"), command);
    let _ = writeln!(log, "# config_sha256 = {}", eff.hash);
    let _ = writeln!(log, "# seed = {}", eff.config.scenario.seed);
    log.push_str(&eff.config.to_toml());
    fs::write(dir.join("run.log"), log)?;
    log::info!(
        "config_sha256={} seed={}",
        eff.hash,
        eff.config.scenario.seed
    );
    eprintln!(
        "config_sha256={} seed={}",
        eff.hash, eff.config.scenario.seed
    );
    Ok(())
}

fn summary_line(traj: &sim::Trajectory) -> String {
    format!(
        "settling_time={} error_limsup={:.12e}",
        sim::settling_time(traj, DEFAULT_SETTLING_BAND),
        sim::error_limsup(traj, DEFAULT_TAIL_FRACTION)
    )
}

fn cmd_simulate(args: &CommonArgs) -> i32 {
    let eff = match load_effective(args) {
        Ok(e) => e,
        Err(e) => return config_failure(&e),
    };
    let scn = eff.config.scenario().expect("validated in load_effective");
    if let Err(e) = write_run_log(&eff, "simulate") {
        eprintln!("error: {e}");
        return EXIT_RUNTIME;
    }
    let traj = match sim::run(&scn) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_RUNTIME;
        }
    };
    let path = eff.config.output.dir.join("trajectory.csv");
    if let Err(e) = sim::export_csv(&traj, &path) {
        eprintln!("error: writing {}: {e}", path.display());
        return EXIT_RUNTIME;
    }
    println!("csv={}", path.display());
    println!("{}", summary_line(&traj));
    EXIT_OK
}

fn cmd_certify(args: &CommonArgs, source: Option<GainSource>, trials: usize) -> i32 {
    let eff = match load_effective(args) {
        Ok(e) => e,
        Err(e) => return config_failure(&e),
    };
    let plant = match eff.config.lti_plant() {
        Ok(p) => p,
        Err(e) => return config_failure(&e),
    };
    let configured_gain = eff.config.certify.as_ref().and_then(|c| c.gain.clone());
    let source = source.unwrap_or(if configured_gain.is_some() {
        GainSource::Config
    } else {
        GainSource::Simulation
    });
    let gain = match source {
        GainSource::Config => match configured_gain {
            Some(rows) => match matrix("certify.gain", &rows) {
                Ok(k) => k,
                Err(e) => return config_failure(&e),
            },
            None => return config_failure(&invalid("certify.gain", "required when --gain config")),
        },
        GainSource::Simulation => {
            let scn = eff.config.scenario().expect("validated in load_effective");
            match sim::run(&scn) {
                Ok(t) => t.final_gain.expect("horizon >= 1 yields a gain"),
                Err(e) => {
                    eprintln!("error: {e}");
                    return EXIT_RUNTIME;
                }
            }
        }
    };
    if let Err(e) = write_run_log(&eff, "certify") {
        eprintln!("error: {e}");
        return EXIT_RUNTIME;
    }
    let cl = match build_closed_loop(&plant, &gain, eff.config.controller.n_steps) {
        Ok(cl) => cl,
        Err(e) => return config_failure(&invalid("certify.gain", e.to_string())),
    };
    let f_bar = plant.nonlinearity().bound();
    let cert = match certify(&cl, f_bar) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_RUNTIME;
        }
    };
    println!(
        "gain_source={}",
        match source {
            GainSource::Config => "config",
            GainSource::Simulation => "simulation",
        }
    );
    print!("{}", cert.to_report());
    if !cert.is_schur() {
        eprintln!("no certificate: closed-loop matrix is not Schur stable");
        return EXIT_NO_CERTIFICATE;
    }
    if trials > 0 {
        let mut rng = ChaCha8Rng::seed_from_u64(eff.config.scenario.seed);
        let steps = eff.config.scenario.horizon;
        match falsify(&cert, &cl, plant.nonlinearity(), trials, steps, &mut rng) {
            Ok(rep) => {
                println!("falsify_trials={}", rep.trials);
                println!("falsify_max_tail_norm={:.12e}", rep.max_tail_norm);
                println!("falsify_lyapunov_violations={}", rep.lyapunov_violations);
                println!("falsify_passed={}", rep.passed());
            }
            Err(e) => {
                eprintln!("error: {e}");
                return EXIT_RUNTIME;
            }
        }
    }
    EXIT_OK
}

fn cmd_sweep(args: &CommonArgs, n_list: &[usize]) -> i32 {
    let eff = match load_effective(args) {
        Ok(e) => e,
        Err(e) => return config_failure(&e),
    };
    let mut seen = std::collections::BTreeSet::new();
    for &n in n_list {
        if n == 0 {
            return config_failure(&invalid(
                "--n-list",
                "prediction horizons must be at least 1",
            ));
        }
        if !seen.insert(n) {
            return config_failure(&invalid(
                "--n-list",
                format!("duplicate prediction horizon {n}"),
            ));
        }
    }
    let scn = eff.config.scenario().expect("validated in load_effective");
    if let Err(e) = write_run_log(&eff, "sweep") {
        eprintln!("error: {e}");
        return EXIT_RUNTIME;
    }
    let entries = match sim::sweep(&scn, n_list) {
        Ok(e) => e,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_RUNTIME;
        }
    };
    println!("N,settling_time,error_limsup,wall_time_s");
    for entry in &entries {
        let path = eff
            .config
            .output
            .dir
            .join(format!("trajectory_N{}.csv", entry.n_steps));
        if let Err(e) = sim::export_csv(&entry.trajectory, &path) {
            eprintln!("error: writing {}: {e}", path.display());
            return EXIT_RUNTIME;
        }
        println!(
            "{},{},{:.12e},{:.6}",
            entry.n_steps,
            sim::settling_time(&entry.trajectory, DEFAULT_SETTLING_BAND),
            sim::error_limsup(&entry.trajectory, DEFAULT_TAIL_FRACTION),
            entry.wall_time.as_secs_f64()
        );
    }
    EXIT_OK
}

fn config_failure(e: &ConfigError) -> i32 {
    eprintln!("config error: {e}");
    EXIT_CONFIG
}

/// Parses arguments and dispatches; returns the process exit code.
pub fn run_cli<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
        }
    };
    match &cli.command {
        Command::Simulate(args) => cmd_simulate(args),
        Command::Certify {
            common,
            gain,
            falsify,
        } => cmd_certify(common, *gain, *falsify),
        Command::Sweep { common, n_list } => cmd_sweep(common, n_list),
    }
}
