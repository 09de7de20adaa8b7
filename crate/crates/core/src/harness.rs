//! The four commands behind the `quadftc` binary.
//!
//! Every command that writes files also writes `manifest.txt` (key=value:
//! command, version, config hash, seed, label) and `config.cfg` (the effective
//! configuration, which re-parses to the same run).

use crate::config::{ConfigError, RunConfig};
use crate::ddpg::{train_with, write_learning_curve, Policy};
use crate::dp::DpAgent;
use crate::env::{write_trajectory_csv, DoneReason, InitialCondition};
use crate::episode::{run_controller, Constant, Controller, EpisodeLog, EpisodeSummary};
use crate::neural::DenseNetwork;
use crate::propulsion::{rotor_thrust, solve_trim};
use crate::dynamics::QuadState;
use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
pub const SWEEP_HEADER: &str =
    "ic,hover_time,done,x_min,x_max,y_min,y_max,z_min,z_max,yaw_rate_peak,mode_switches";

#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("{0}")]
    Runtime(String),
}

impl HarnessError {
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Config(_) => 2,
            Self::Runtime(_) => 3,
        }
    }

    fn rt(e: impl std::fmt::Display) -> Self {
        Self::Runtime(e.to_string())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ControllerSpec {
    /// All rotors off.
    None,
    Dp,
    /// Actor checkpoint.
    Ddpg(PathBuf),
}

impl FromStr for ControllerSpec {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "none" => Ok(Self::None),
            "dp" => Ok(Self::Dp),
            _ => match s.strip_prefix("ddpg:") {
                Some(p) if !p.is_empty() => Ok(Self::Ddpg(PathBuf::from(p))),
                _ => Err(format!(
                    "unknown controller `{s}` (expected none, dp or ddpg:PATH)"
                )),
            },
        }
    }
}

impl std::fmt::Display for ControllerSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Self::None => f.write_str("none"),
            Self::Dp => f.write_str("dp"),
            Self::Ddpg(p) => write!(f, "ddpg:{}", p.display()),
        }
    }
}

fn build_controller(
    spec: &ControllerSpec,
    cfg: &RunConfig,
) -> Result<Box<dyn Controller>, HarnessError> {
    Ok(match spec {
        ControllerSpec::None => Box::new(Constant([0.0; 4])),
        ControllerSpec::Dp => Box::new(
            DpAgent::new(cfg.dp.clone(), &cfg.env)
                .map_err(|e| HarnessError::Config(ConfigError::Invalid(e.to_string())))?,
        ),
        ControllerSpec::Ddpg(path) => {
            let file = File::open(path)
                .map_err(|e| HarnessError::rt(format!("{}: {e}", path.display())))?;
            let actor = DenseNetwork::<f64>::load(BufReader::new(file))
                .map_err(|e| HarnessError::rt(format!("{}: {e}", path.display())))?;
            Box::new(Policy::new(actor, cfg.env.fault_mask()).map_err(HarnessError::rt)?)
        }
    })
}

fn create_out_dir(dir: &Path) -> Result<(), HarnessError> {
    fs::create_dir_all(dir).map_err(|e| HarnessError::rt(format!("{}: {e}", dir.display())))
}

fn write_file(path: &Path, f: impl FnOnce(&mut BufWriter<File>) -> std::io::Result<()>) -> Result<(), HarnessError> {
    let file = File::create(path).map_err(|e| HarnessError::rt(format!("{}: {e}", path.display())))?;
    let mut w = BufWriter::new(file);
    f(&mut w)
        .and_then(|_| w.flush())
        .map_err(|e| HarnessError::rt(format!("{}: {e}", path.display())))
}

/// Writes `manifest.txt` and `config.cfg` into the output directory.
pub fn write_manifest(
    cfg: &RunConfig,
    command: &str,
    extra: &[(&str, String)],
) -> Result<(), HarnessError> {
    let dir = &cfg.run.out_dir;
    write_file(&dir.join("config.cfg"), |w| w.write_all(cfg.to_text().as_bytes()))?;
    write_file(&dir.join("manifest.txt"), |w| {
        writeln!(w, "command={command}")?;
        writeln!(w, "version={VERSION}")?;
        writeln!(w, "config_hash={}", cfg.hash())?;
        writeln!(w, "seed={}", cfg.run.seed)?;
        writeln!(w, "label={}", cfg.run.label)?;
        for (k, v) in extra {
            writeln!(w, "{k}={v}")?;
        }
        Ok(())
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrimReport {
    pub omega_trim: f64,
    /// `omega_trim / omega_max`.
    pub omega_fraction: f64,
    pub f_trim: f64,
    /// `|4·F(omega_trim) − m·g| / (m·g)` at rest.
    pub residual: f64,
}

impl std::fmt::Display for TrimReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "omega_trim={} omega_trim_fraction={} f_trim={} residual={:e}",
            self.omega_trim,
            self.omega_fraction,
            self.f_trim,
            self.residual
        )
    }
}

pub fn cmd_trim(cfg: &RunConfig) -> Result<TrimReport, HarnessError> {
    let p = &cfg.params;
    let trim = solve_trim(p).map_err(HarnessError::rt)?;
    let rest = QuadState::zeros();
    let f = rotor_thrust(trim.omega, &rest, p, cfg.env.thrust_translation_sum_of_squares);
    let weight = p.mass * p.g;
    Ok(TrimReport {
        omega_trim: trim.omega,
        omega_fraction: trim.omega / p.omega_max,
        f_trim: trim.thrust,
        residual: (4.0 * f - weight).abs() / weight,
    })
}

/// One episode from `cfg.run.ic` for `cfg.run.duration` seconds. Writes
/// `trajectory.csv`, `summary.txt` and the manifest.
pub fn cmd_simulate(cfg: &RunConfig, controller: &ControllerSpec) -> Result<EpisodeLog, HarnessError> {
    let mut ctl = build_controller(controller, cfg)?;
    let log = run_controller(
        ctl.as_mut(),
        cfg.params,
        &cfg.env,
        cfg.run.ic,
        cfg.run.duration,
    )
    .map_err(HarnessError::rt)?;
    let dir = &cfg.run.out_dir;
    create_out_dir(dir)?;
    write_file(&dir.join("trajectory.csv"), |w| write_trajectory_csv(w, &log.rows))?;
    write_file(&dir.join("summary.txt"), |w| writeln!(w, "{}", log.summary))?;
    write_manifest(cfg, "simulate", &[("controller", controller.to_string())])?;
    Ok(log)
}

#[derive(Debug, Clone)]
pub struct TrainReport {
    pub episodes: usize,
    pub best_episode: Option<usize>,
    pub best_score: f64,
}

/// DDPG training. Writes `learning_curve.csv`, `actor_best.net`,
/// `actor_final.net`, `critic_final.net` and the manifest.
pub fn cmd_train(cfg: &RunConfig) -> Result<TrainReport, HarnessError> {
    let dir = &cfg.run.out_dir;
    create_out_dir(dir)?;
    let out = train_with(cfg.params, &cfg.env, &cfg.ddpg_config(), |_| {})
        .map_err(HarnessError::rt)?;
    write_file(&dir.join("learning_curve.csv"), |w| write_learning_curve(w, &out.curve))?;
    write_file(&dir.join("actor_best.net"), |w| out.best_actor.save(w))?;
    write_file(&dir.join("actor_final.net"), |w| out.agent.actor.save(w))?;
    write_file(&dir.join("critic_final.net"), |w| out.agent.critic.save(w))?;
    let best = out
        .best_episode
        .map_or("none".to_string(), |e| e.to_string());
    write_manifest(cfg, "train", &[("best_episode", best)])?;
    Ok(TrainReport {
        episodes: out.curve.len(),
        best_episode: out.best_episode,
        best_score: out.best_score,
    })
}

#[derive(Debug, Clone)]
pub enum SweepRow {
    Done(EpisodeSummary),
    Failed { ic: InitialCondition, error: String },
}

fn sweep_line(row: &SweepRow) -> String {
    match row {
        SweepRow::Done(s) => {
            let done = match (&s.controller_error, s.done_reason) {
                (Some(_), _) => "AllActionsCrash".to_string(),
                (None, Some(r)) => r.to_string(),
                (None, None) => DoneReason::HorizonReached.to_string(),
            };
            format!(
                "{},{},{},{},{},{},{},{},{},{},{}",
                s.ic,
                s.hover_time,
                done,
                s.x_min,
                s.x_max,
                s.y_min,
                s.y_max,
                s.alt_min,
                s.alt_max,
                s.yaw_rate_peak,
                s.mode_switches
            )
        }
        SweepRow::Failed { ic, error } => {
            format!("{},0,error: {},,,,,,,,", ic.name(), error.replace(',', ";"))
        }
    }
}

/// Runs every initial condition in `cfg.sweep_ics` for `cfg.run.duration`
/// seconds, continuing past per-row failures. Writes `sweep.csv` and the
/// manifest.
pub fn cmd_sweep(cfg: &RunConfig, controller: &ControllerSpec) -> Result<Vec<SweepRow>, HarnessError> {
    let mut rows = Vec::with_capacity(cfg.sweep_ics.len());
    for &ic in &cfg.sweep_ics {
        let mut ctl = build_controller(controller, cfg)?;
        match run_controller(ctl.as_mut(), cfg.params, &cfg.env, ic, cfg.run.duration) {
            Ok(log) => rows.push(SweepRow::Done(log.summary)),
            Err(e) => rows.push(SweepRow::Failed {
                ic,
                error: e.to_string(),
            }),
        }
    }
    let dir = &cfg.run.out_dir;
    create_out_dir(dir)?;
    write_file(&dir.join("sweep.csv"), |w| {
        writeln!(w, "{SWEEP_HEADER}")?;
        for r in &rows {
            writeln!(w, "{}", sweep_line(r))?;
        }
        Ok(())
    })?;
    write_manifest(cfg, "sweep", &[("controller", controller.to_string())])?;
    Ok(rows)
}
