//! Command-line front end. Every option can also come from a JSON config
//! file (`--config-file`); flags given on the command line win.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::ac::{AcSolution, KernelMethod};
use crate::bifurcation::{kernel_jet_of, z_linear_of, z_quartic_of};
use crate::dispersion::resonance_velocities;
use crate::error::{Error, Result};
use crate::io::{fmt, open, write_csv, write_json};
use crate::lattice::{init_from_wave, init_riemann, run_with_snapshots, sweep_dynamic_threshold, Classification, SweepOptions};
use crate::params::ModelParams;
use crate::waves::{admissible_wave, kinetic_curve, CurveEntry, WaveOptions, WaveSolution};

#[derive(Debug, Parser)]
#[command(name = "fkwave", version, about = "Traveling kinks of the driven biquadratic Frenkel-Kontorova chain")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub config: RunConfig,
    /// JSON file with any of the options below.
    #[arg(long, global = true)]
    pub config_file: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    /// Kinetic relation sigma(V) over a velocity grid.
    Kinetic,
    /// Profile u(xi) of the admissible wave at one velocity.
    Wave,
    /// Shape function h(s) of the admissible wave at one velocity.
    Shape,
    /// Plateau width against its small-z predictions over a velocity grid.
    Bifurcation,
    /// Resonance velocities.
    Resonances,
    /// Lattice simulation from step or traveling-wave initial data.
    Simulate,
    /// Dynamic threshold stress by bisection of lattice runs.
    Threshold,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::Kinetic => "kinetic",
            Command::Wave => "wave",
            Command::Shape => "shape",
            Command::Bifurcation => "bifurcation",
            Command::Resonances => "resonances",
            Command::Simulate => "simulate",
            Command::Threshold => "threshold",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InitialCondition {
    Ic1,
    Ic2,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Residue,
    Hybrid,
}

impl From<Method> for KernelMethod {
    fn from(m: Method) -> Self {
        match m {
            Method::Residue => KernelMethod::Residue,
            Method::Hybrid => KernelMethod::Hybrid,
        }
    }
}

/// All run options. Absent values take the defaults of each command.
#[derive(Debug, Clone, Default, PartialEq, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// Command this file is meant for; checked against the subcommand.
    #[arg(skip)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub command: Option<Command>,
    #[arg(long, global = true)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mu: Option<f64>,
    #[arg(long, global = true)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    /// Single velocity.
    #[arg(long, global = true)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub velocity: Option<f64>,
    /// Explicit velocity list, comma separated.
    #[arg(long, global = true, value_delimiter = ',')]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub velocities: Option<Vec<f64>>,
    #[arg(long, global = true)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub v_min: Option<f64>,
    #[arg(long, global = true)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub v_max: Option<f64>,
    #[arg(long, global = true)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub v_step: Option<f64>,
    #[arg(long, global = true)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sigma: Option<f64>,
    #[arg(long, global = true)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sigma_lo: Option<f64>,
    #[arg(long, global = true)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sigma_hi: Option<f64>,
    /// Bisection tolerance in sigma.
    #[arg(long, global = true)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,
    /// Mesh size on the plateau.
    #[arg(long, global = true)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mesh: Option<usize>,
    #[arg(long, global = true)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_pairs: Option<usize>,
    #[arg(long, global = true)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub method: Option<Method>,
    #[arg(long, global = true)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub xi_min: Option<f64>,
    #[arg(long, global = true)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub xi_max: Option<f64>,
    #[arg(long, global = true)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub points: Option<usize>,
    /// Number of resonances to list.
    #[arg(long, global = true)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub count: Option<usize>,
    /// Chain length N.
    #[arg(long, global = true)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[arg(long, global = true)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dt: Option<f64>,
    /// Final time.
    #[arg(long, global = true)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_end: Option<f64>,
    #[arg(long, global = true)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stride: Option<usize>,
    #[arg(long, global = true)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub padding: Option<usize>,
    #[arg(long, global = true)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ic: Option<InitialCondition>,
    /// Main output file; stdout when absent.
    #[arg(long, global = true)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    #[arg(long, global = true)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub format: Option<Format>,
}

macro_rules! overlay {
    ($base:expr, $top:expr, $($f:ident),*) => {
        $( if $top.$f.is_some() { $base.$f = $top.$f.clone(); } )*
    };
}

impl RunConfig {
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| Error::Usage(format!("{}: {e}", path.display())))
    }

    /// `self` with every option set in `top` replaced.
    pub fn overlaid(mut self, top: &RunConfig) -> Self {
        overlay!(
            self, top, command, mu, alpha, velocity, velocities, v_min, v_max, v_step, sigma, sigma_lo, sigma_hi, tol,
            mesh, n_pairs, method, xi_min, xi_max, points, count, n, dt, t_end, stride, padding, ic, out, format
        );
        self
    }

    pub fn params(&self) -> Result<ModelParams> {
        ModelParams::new(self.mu.unwrap_or(1.0), self.alpha.unwrap_or(0.0))
    }

    pub fn wave_options(&self) -> Result<WaveOptions> {
        let mut o = WaveOptions::default();
        if let Some(m) = self.mesh {
            if m < 3 {
                return Err(Error::Usage(format!("mesh must be at least 3, got {m}")));
            }
            o.mesh = m;
        }
        if let Some(n) = self.n_pairs {
            o.n_pairs = n.max(1);
        }
        if let Some(m) = self.method {
            o.method = m.into();
        }
        Ok(o)
    }

    fn velocity(&self) -> Result<f64> {
        self.velocity.ok_or_else(|| Error::Usage("--velocity is required".into()))
    }

    /// Explicit list, else the grid `v_min, v_min + v_step, ..., <= v_max`.
    pub fn velocity_grid(&self) -> Result<Vec<f64>> {
        if let Some(v) = &self.velocities {
            if v.is_empty() {
                return Err(Error::Usage("empty velocity list".into()));
            }
            return Ok(v.clone());
        }
        if let Some(v) = self.velocity {
            return Ok(vec![v]);
        }
        let (Some(lo), Some(hi), Some(step)) = (self.v_min, self.v_max, self.v_step) else {
            return Err(Error::Usage("give --velocities or --v-min, --v-max and --v-step".into()));
        };
        if !(step > 0.0) || !(hi >= lo) {
            return Err(Error::Usage(format!("empty velocity grid [{lo}, {hi}] step {step}")));
        }
        let count = ((hi - lo) / step + 1e-9).floor() as usize + 1;
        Ok((0..count).map(|i| lo + step * i as f64).collect())
    }

    fn format(&self) -> Format {
        self.format.unwrap_or(Format::Csv)
    }

    fn sweep_options(&self) -> SweepOptions {
        let d = SweepOptions::default();
        SweepOptions {
            n: self.n.unwrap_or(d.n),
            dt: self.dt.unwrap_or(d.dt),
            t_end: self.t_end.unwrap_or(d.t_end),
            stride: self.stride.unwrap_or(d.stride),
        }
    }
}

/// `path` with `suffix` appended to its stem and extension `ext`.
fn sibling(path: &Path, suffix: &str, ext: &str) -> PathBuf {
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    path.with_file_name(format!("{stem}{suffix}.{ext}"))
}

/// Rows as CSV or a JSON array of objects keyed by the header.
fn emit_table(cfg: &RunConfig, header: &[&str], rows: &[Vec<String>]) -> Result<()> {
    let out = open(cfg.out.as_deref())?;
    match cfg.format() {
        Format::Csv => write_csv(out, header, rows),
        Format::Json => {
            let objects: Vec<serde_json::Map<String, serde_json::Value>> = rows
                .iter()
                .map(|r| {
                    header
                        .iter()
                        .zip(r)
                        .map(|(h, v)| {
                            let val = if v.is_empty() {
                                serde_json::Value::Null
                            } else if let Ok(x) = v.parse::<f64>() {
                                serde_json::json!(x)
                            } else {
                                serde_json::Value::String(v.clone())
                            };
                            (h.to_string(), val)
                        })
                        .collect()
                })
                .collect();
            write_json(out, &objects)
        }
    }
}

#[derive(Debug, Serialize, Deserialize)]
pub struct Sidecar<T> {
    pub config: RunConfig,
    pub result: T,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WaveSummary {
    #[serde(rename = "V")]
    pub velocity: f64,
    pub z: f64,
    pub sigma: f64,
    pub sigma_ac: f64,
    pub residual: f64,
    pub branch: String,
    pub delta_plus: Option<f64>,
    pub delta_minus: Option<f64>,
}

impl From<&WaveSolution> for WaveSummary {
    fn from(w: &WaveSolution) -> Self {
        Self {
            velocity: w.velocity,
            z: w.z,
            sigma: w.sigma,
            sigma_ac: w.sigma_ac,
            residual: w.residual,
            branch: w.branch.to_string(),
            delta_plus: w.shape.delta_plus,
            delta_minus: w.shape.delta_minus,
        }
    }
}

fn write_sidecar<T: Serialize>(cfg: &RunConfig, result: T) -> Result<()> {
    if let Some(out) = &cfg.out {
        let path = sibling(out, "", "json");
        let path = if path == *out { sibling(out, "_meta", "json") } else { path };
        write_json(open(Some(&path))?, &Sidecar { config: cfg.clone(), result })?;
    }
    Ok(())
}

fn opt(x: Option<f64>) -> String {
    x.map(fmt).unwrap_or_default()
}

fn cmd_kinetic(cfg: &RunConfig) -> Result<()> {
    let params = cfg.params()?;
    let grid = cfg.velocity_grid()?;
    let entries = kinetic_curve(&grid, &params, &cfg.wave_options()?);
    let rows: Vec<Vec<String>> = entries
        .iter()
        .map(|e| match e {
            CurveEntry::Point(p) => vec![
                fmt(p.velocity),
                fmt(p.sigma),
                fmt(p.z),
                p.branch.to_string(),
                p.admissible.to_string(),
                "OK".into(),
            ],
            CurveEntry::SkippedResonant(v) => vec![fmt(*v), "".into(), "".into(), "".into(), "".into(), "SKIPPED_RESONANT".into()],
            CurveEntry::Failed(v, e) => {
                log::warn!("V = {v}: {e}");
                vec![fmt(*v), "".into(), "".into(), "".into(), "".into(), e.code().into()]
            }
        })
        .collect();
    emit_table(cfg, &["V", "sigma", "z", "branch", "admissible", "flag"], &rows)?;
    if let Some(CurveEntry::Failed(_, e)) = entries.first() {
        if entries.iter().all(|e| matches!(e, CurveEntry::Failed(..))) {
            return Err(e.clone());
        }
    }
    Ok(())
}

fn cmd_wave(cfg: &RunConfig) -> Result<()> {
    let params = cfg.params()?;
    let wave = admissible_wave(cfg.velocity()?, &params, &cfg.wave_options()?)?;
    let (lo, hi) = (cfg.xi_min.unwrap_or(-20.0), cfg.xi_max.unwrap_or(20.0));
    if !(hi > lo) {
        return Err(Error::Usage(format!("empty xi range [{lo}, {hi}]")));
    }
    let rows: Vec<Vec<String>> =
        wave.profile(lo, hi, cfg.points.unwrap_or(401))?.into_iter().map(|(x, u)| vec![fmt(x), fmt(u)]).collect();
    emit_table(cfg, &["xi", "u"], &rows)?;
    write_sidecar(cfg, WaveSummary::from(&wave))
}

fn cmd_shape(cfg: &RunConfig) -> Result<()> {
    let params = cfg.params()?;
    let wave = admissible_wave(cfg.velocity()?, &params, &cfg.wave_options()?)?;
    let rows: Vec<Vec<String>> =
        wave.shape.mesh.iter().zip(&wave.shape.weights).map(|(s, h)| vec![fmt(*s), fmt(*h)]).collect();
    emit_table(cfg, &["s", "h"], &rows)?;
    write_sidecar(cfg, WaveSummary::from(&wave))
}

fn cmd_bifurcation(cfg: &RunConfig) -> Result<()> {
    let params = cfg.params()?;
    let opts = cfg.wave_options()?;
    let grid = cfg.velocity_grid()?;
    let rows: Vec<Vec<String>> = grid
        .par_iter()
        .map(|&v| -> Result<Vec<String>> {
            let ac = AcSolution::get(v, &params, opts.n_pairs, opts.method)?;
            let jet = kernel_jet_of(&ac)?;
            let z_numeric = match admissible_wave(v, &params, &opts) {
                Ok(w) => Some(w.z),
                Err(e) => {
                    log::warn!("V = {v}: {e}");
                    None
                }
            };
            let jump = if jet.jump_defect(&params).abs() <= 1e-6 { "PASS" } else { "FAIL" };
            Ok(vec![
                fmt(v),
                opt(z_numeric),
                fmt(z_linear_of(&jet)),
                opt(z_quartic_of(&jet).ok()),
                fmt(jet.q0),
                fmt(jet.q_plus),
                fmt(jet.q_minus),
                jump.into(),
            ])
        })
        .collect::<Result<_>>()?;
    emit_table(cfg, &["V", "z_numeric", "z_linear", "z_quartic", "q0", "q_plus", "q_minus", "jump_check"], &rows)
}

fn cmd_resonances(cfg: &RunConfig) -> Result<()> {
    let params = cfg.params()?;
    let rows: Vec<Vec<String>> = resonance_velocities(&params, cfg.count.unwrap_or(5))?
        .into_iter()
        .map(|r| vec![fmt(r.velocity), fmt(r.k)])
        .collect();
    emit_table(cfg, &["V", "k"], &rows)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SimulationSummary {
    pub classification: Classification,
    pub velocity: f64,
    pub sigma: f64,
    pub reached_boundary: bool,
}

fn cmd_simulate(cfg: &RunConfig) -> Result<()> {
    let params = cfg.params()?;
    let n = cfg.n.unwrap_or(1000);
    let dt = cfg.dt.unwrap_or(crate::lattice::DEFAULT_DT);
    let initial = match cfg.ic.unwrap_or(InitialCondition::Ic1) {
        InitialCondition::Ic1 => {
            let sigma = cfg.sigma.ok_or_else(|| Error::Usage("ic1 needs --sigma".into()))?;
            init_riemann(n, sigma, &params)?
        }
        InitialCondition::Ic2 => {
            let wave = admissible_wave(cfg.velocity()?, &params, &cfg.wave_options()?)?;
            init_from_wave(&wave, n, cfg.padding.unwrap_or(n / 10))?
        }
    };
    let sigma = initial.sigma;
    let out =
        run_with_snapshots(initial, dt, cfg.t_end.unwrap_or(2000.0), cfg.stride.unwrap_or(100), &[]).map_err(|e| {
            if let Error::Inconclusive { .. } = e {
                log::error!("{e}: raise --n or shorten --t-end");
            }
            e
        })?;
    let velocity = match out.classification {
        Classification::Steady { velocity, .. } => velocity,
        Classification::Trapped { .. } => 0.0,
    };
    let summary = SimulationSummary { classification: out.classification, velocity, sigma, reached_boundary: out.reached_boundary };
    write_json(open(cfg.out.as_deref())?, &Sidecar { config: cfg.clone(), result: summary })?;
    if let Some(path) = &cfg.out {
        out.write_track_csv(open(Some(&sibling(path, "_track", "csv")))?)?;
        if let Some(s) = &out.final_state {
            s.write_csv(open(Some(&sibling(path, "_final", "csv")))?)?;
        }
    }
    Ok(())
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ThresholdSummary {
    pub sigma_d: f64,
    pub sigma_p: f64,
}

fn cmd_threshold(cfg: &RunConfig) -> Result<()> {
    let params = cfg.params()?;
    let sigma_d = sweep_dynamic_threshold(
        &params,
        cfg.sigma_lo.unwrap_or(0.0),
        cfg.sigma_hi.unwrap_or(params.peierls_stress()),
        cfg.tol.unwrap_or(1e-3),
        &cfg.sweep_options(),
    )?;
    let summary = ThresholdSummary { sigma_d, sigma_p: params.peierls_stress() };
    match cfg.format() {
        Format::Json => write_json(open(cfg.out.as_deref())?, &Sidecar { config: cfg.clone(), result: summary }),
        Format::Csv => emit_table(cfg, &["mu", "alpha", "sigma_d", "sigma_p"], &[vec![
            fmt(params.mu),
            fmt(params.alpha),
            fmt(summary.sigma_d),
            fmt(summary.sigma_p),
        ]]),
    }
}

/// Run a parsed command line.
pub fn run(cli: Cli) -> Result<()> {
    let base = match &cli.config_file {
        Some(p) => RunConfig::from_file(p)?,
        None => RunConfig::default(),
    };
    if let Some(c) = base.command {
        if c != cli.command {
            return Err(Error::Usage(format!("config file is for `{}`, not `{}`", c.name(), cli.command.name())));
        }
    }
    let mut cfg = base.overlaid(&cli.config);
    cfg.command = Some(cli.command);
    match cli.command {
        Command::Kinetic => cmd_kinetic(&cfg),
        Command::Wave => cmd_wave(&cfg),
        Command::Shape => cmd_shape(&cfg),
        Command::Bifurcation => cmd_bifurcation(&cfg),
        Command::Resonances => cmd_resonances(&cfg),
        Command::Simulate => cmd_simulate(&cfg),
        Command::Threshold => cmd_threshold(&cfg),
    }
}

/// Parse `args`, run, and return the process exit status.
pub fn main_with<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match run(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("fkwave: {e}");
            e.exit_code()
        }
    }
}
