//! Run configuration: flat `key = value` text.
//!
//! ```text
//! # comment
//! params.mass = 1.5
//! env.failed_rotor = 4        # or `none`
//! dp.levels = 0, 0.25, 0.5, 0.75, 1
//! ```
//!
//! Blank lines and `#` comments are ignored, keys are dotted and
//! case-sensitive, lists are comma separated. Every key has a default; an
//! unknown key, a repeated key or an unparsable value is an error carrying its
//! 1-based line number. [`RunConfig::to_text`] writes every key, and parsing
//! that text gives back an identical config.

use crate::ddpg::DdpgConfig;
use crate::dp::DpConfig;
use crate::dynamics::QuadParams;
use crate::env::{EnvConfig, InitialCondition, RateFrame};
use crate::propulsion::AxesMode;
use sha2::{Digest, Sha256};
use std::collections::HashSet;
use std::fmt::{self, Display};
use std::path::{Path, PathBuf};
use std::str::FromStr;

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum ConfigError {
    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error("line {line}: unknown key `{key}`")]
    UnknownKey { line: usize, key: String },
    #[error("line {line}: `{key}` set twice")]
    Duplicate { line: usize, key: String },
    #[error("line {line}: bad value for `{key}`: {msg}")]
    BadValue {
        line: usize,
        key: String,
        msg: String,
    },
    #[error("invalid configuration: {0}")]
    Invalid(String),
    #[error("cannot read {path}: {msg}")]
    Io { path: String, msg: String },
}

impl ConfigError {
    /// Line the error points at, if any.
    pub fn line(&self) -> Option<usize> {
        match self {
            Self::Syntax { line, .. }
            | Self::UnknownKey { line, .. }
            | Self::Duplicate { line, .. }
            | Self::BadValue { line, .. } => Some(*line),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunOptions {
    pub seed: u64,
    pub out_dir: PathBuf,
    pub label: String,
    /// Episode length for `simulate` and `sweep`, s.
    pub duration: f64,
    pub ic: InitialCondition,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self {
            seed: 0,
            out_dir: PathBuf::from("out"),
            label: "run".to_string(),
            duration: 180.0,
            ic: InitialCondition::Nominal,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub params: QuadParams<f64>,
    pub env: EnvConfig,
    pub dp: DpConfig,
    pub ddpg: DdpgConfig,
    pub run: RunOptions,
    /// Initial conditions visited by `sweep`, in order.
    pub sweep_ics: Vec<InitialCondition>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            params: QuadParams::default(),
            env: EnvConfig::default(),
            dp: DpConfig::default(),
            ddpg: DdpgConfig::default(),
            run: RunOptions::default(),
            sweep_ics: InitialCondition::TABLE.to_vec(),
        }
    }
}

fn parse_num<T: FromStr>(v: &str) -> Result<T, String> {
    v.parse::<T>().map_err(|_| format!("`{v}` is not a valid number"))
}

fn parse_bool(v: &str) -> Result<bool, String> {
    match v {
        "true" => Ok(true),
        "false" => Ok(false),
        _ => Err(format!("`{v}` is not true or false")),
    }
}

fn parse_list<T: FromStr>(v: &str) -> Result<Vec<T>, String>
where
    T::Err: Display,
{
    if v.trim().is_empty() {
        return Ok(Vec::new());
    }
    v.split(',')
        .map(|s| s.trim().parse::<T>().map_err(|e| format!("`{}`: {e}", s.trim())))
        .collect()
}

fn parse_bound(v: &str) -> Result<(f64, f64), String> {
    let xs: Vec<f64> = parse_list(v)?;
    match xs.as_slice() {
        [lo, hi] => Ok((*lo, *hi)),
        _ => Err("expected `lo, hi`".to_string()),
    }
}

fn join<T: Display>(xs: &[T]) -> String {
    xs.iter()
        .map(|x| x.to_string())
        .collect::<Vec<_>>()
        .join(", ")
}

const BOUND_KEYS: [&str; 6] = [
    "env.bound_xn",
    "env.bound_yn",
    "env.bound_zn",
    "env.bound_phi",
    "env.bound_theta",
    "env.bound_psi",
];

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut cfg = Self::default();
        let mut seen = HashSet::new();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let (key, value) = content.split_once('=').ok_or_else(|| ConfigError::Syntax {
                line,
                msg: format!("expected `key = value`, found `{content}`"),
            })?;
            let (key, value) = (key.trim(), value.trim());
            if key.is_empty() {
                return Err(ConfigError::Syntax {
                    line,
                    msg: "empty key".to_string(),
                });
            }
            if !seen.insert(key.to_string()) {
                return Err(ConfigError::Duplicate {
                    line,
                    key: key.to_string(),
                });
            }
            match cfg.set(key, value) {
                Ok(true) => {}
                Ok(false) => {
                    return Err(ConfigError::UnknownKey {
                        line,
                        key: key.to_string(),
                    })
                }
                Err(msg) => {
                    return Err(ConfigError::BadValue {
                        line,
                        key: key.to_string(),
                        msg,
                    })
                }
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|e| ConfigError::Io {
            path: path.display().to_string(),
            msg: e.to_string(),
        })?;
        Self::parse(&text)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let inv = |e: &dyn Display| ConfigError::Invalid(e.to_string());
        self.params.validate().map_err(|e| inv(&e))?;
        self.env.validate().map_err(|e| inv(&e))?;
        self.dp.validate().map_err(|e| inv(&e))?;
        self.ddpg.validate().map_err(|e| inv(&e))?;
        if !(self.run.duration >= 0.0 && self.run.duration.is_finite()) {
            return Err(ConfigError::Invalid("run.duration must be >= 0".into()));
        }
        Ok(())
    }

    /// Applies one key. `Ok(false)` means the key is unknown.
    fn set(&mut self, key: &str, v: &str) -> Result<bool, String> {
        let p = &mut self.params;
        let e = &mut self.env;
        let d = &mut self.ddpg;
        match key {
            "params.mass" => p.mass = parse_num(v)?,
            "params.g" => p.g = parse_num(v)?,
            "params.jx" => p.jx = parse_num(v)?,
            "params.jy" => p.jy = parse_num(v)?,
            "params.jz" => p.jz = parse_num(v)?,
            "params.jxz" => p.jxz = parse_num(v)?,
            "params.lx" => p.lx = parse_num(v)?,
            "params.ly" => p.ly = parse_num(v)?,
            "params.ld" => p.ld = parse_num(v)?,
            "params.c_torque" => p.c_torque = parse_num(v)?,
            "params.rho" => p.rho = parse_num(v)?,
            "params.a_lift" => p.a_lift = parse_num(v)?,
            "params.n_blades" => p.n_blades = parse_num(v)?,
            "params.chord" => p.chord = parse_num(v)?,
            "params.r_rotor" => p.r_rotor = parse_num(v)?,
            "params.theta0" => p.theta0 = parse_num(v)?,
            "params.theta1" => p.theta1 = parse_num(v)?,
            "params.omega_max" => p.omega_max = parse_num(v)?,

            "env.dt" => e.dt = parse_num(v)?,
            "env.episode_horizon" => e.episode_horizon = parse_num(v)?,
            "env.failure_altitude" => e.failure_altitude = parse_num(v)?,
            "env.failed_rotor" => {
                e.failed_rotor = if v == "none" {
                    None
                } else {
                    Some(parse_num(v)?)
                }
            }
            "env.yaw_rate_threshold" => e.yaw_rate_threshold = parse_num(v)?,
            "env.hysteresis_ratio" => e.hysteresis_ratio = parse_num(v)?,
            "env.gamma" => e.gamma = parse_num(v)?,
            "env.axes" => e.axes = v.parse::<AxesMode>().map_err(|e| e.to_string())?,
            "env.yaw_moment_literal" => e.yaw_moment_literal = parse_bool(v)?,
            "env.thrust_translation_sum_of_squares" => {
                e.thrust_translation_sum_of_squares = parse_bool(v)?
            }
            "env.rate_frame" => e.rate_frame = v.parse::<RateFrame>()?,
            "env.max_speed" => e.max_speed = parse_num(v)?,
            "env.max_rate" => e.max_rate = parse_num(v)?,
            "env.termination_cost" => e.termination_cost = parse_num(v)?,
            "env.w_altitude" => e.weights.altitude = parse_num(v)?,
            "env.w_roll_rate" => e.weights.roll_rate = parse_num(v)?,
            "env.w_pitch_rate" => e.weights.pitch_rate = parse_num(v)?,
            "env.w_yaw_rate" => e.weights.yaw_rate = parse_num(v)?,
            k if BOUND_KEYS.contains(&k) => {
                let i = BOUND_KEYS.iter().position(|b| *b == k).unwrap();
                let (lo, hi) = parse_bound(v)?;
                e.bounds.lo[i] = lo;
                e.bounds.hi[i] = hi;
            }

            "dp.levels" => self.dp.levels = parse_list(v)?,
            "dp.depth" => self.dp.depth = parse_num(v)?,
            "dp.parallel" => self.dp.parallel = parse_bool(v)?,

            "ddpg.capacity" => d.capacity = parse_num(v)?,
            "ddpg.batch" => d.batch = parse_num(v)?,
            "ddpg.tau" => d.tau = parse_num(v)?,
            "ddpg.actor_lr" => d.actor_lr = parse_num(v)?,
            "ddpg.critic_lr" => d.critic_lr = parse_num(v)?,
            "ddpg.episodes" => d.episodes = parse_num(v)?,
            "ddpg.warmup" => d.warmup = parse_num(v)?,
            "ddpg.hidden" => d.hidden = parse_list(v)?,
            "ddpg.theta_ou" => d.theta_ou = parse_num(v)?,
            "ddpg.sigma_start" => d.sigma_start = parse_num(v)?,
            "ddpg.sigma_end" => d.sigma_end = parse_num(v)?,
            "ddpg.critic_sigmoid_output" => d.critic_sigmoid_output = parse_bool(v)?,
            "ddpg.sample_initial_conditions" => d.sample_initial_conditions = parse_bool(v)?,
            "ddpg.horizon" => d.horizon = parse_num(v)?,
            "ddpg.final_layer_scale" => d.final_layer_scale = parse_num(v)?,
            "ddpg.reward_scale" => d.reward_scale = parse_num(v)?,
            "ddpg.reward_clip" => d.reward_clip = parse_num(v)?,

            "run.seed" => self.run.seed = parse_num(v)?,
            "run.out_dir" => self.run.out_dir = PathBuf::from(v),
            "run.label" => self.run.label = v.to_string(),
            "run.duration" => self.run.duration = parse_num(v)?,
            "run.ic" => self.run.ic = v.parse()?,

            "sweep.ics" => self.sweep_ics = parse_list(v)?,
            _ => return Ok(false),
        }
        Ok(true)
    }

    /// Every key with its current value, in file order.
    pub fn entries(&self) -> Vec<(String, String)> {
        let p = &self.params;
        let e = &self.env;
        let d = &self.ddpg;
        let mut out: Vec<(&str, String)> = vec![
            ("params.mass", p.mass.to_string()),
            ("params.g", p.g.to_string()),
            ("params.jx", p.jx.to_string()),
            ("params.jy", p.jy.to_string()),
            ("params.jz", p.jz.to_string()),
            ("params.jxz", p.jxz.to_string()),
            ("params.lx", p.lx.to_string()),
            ("params.ly", p.ly.to_string()),
            ("params.ld", p.ld.to_string()),
            ("params.c_torque", p.c_torque.to_string()),
            ("params.rho", p.rho.to_string()),
            ("params.a_lift", p.a_lift.to_string()),
            ("params.n_blades", p.n_blades.to_string()),
            ("params.chord", p.chord.to_string()),
            ("params.r_rotor", p.r_rotor.to_string()),
            ("params.theta0", p.theta0.to_string()),
            ("params.theta1", p.theta1.to_string()),
            ("params.omega_max", p.omega_max.to_string()),
            ("env.dt", e.dt.to_string()),
            ("env.episode_horizon", e.episode_horizon.to_string()),
            ("env.failure_altitude", e.failure_altitude.to_string()),
            (
                "env.failed_rotor",
                e.failed_rotor
                    .map_or("none".to_string(), |r| r.to_string()),
            ),
            ("env.yaw_rate_threshold", e.yaw_rate_threshold.to_string()),
            ("env.hysteresis_ratio", e.hysteresis_ratio.to_string()),
            ("env.gamma", e.gamma.to_string()),
            ("env.axes", e.axes.to_string()),
            ("env.yaw_moment_literal", e.yaw_moment_literal.to_string()),
            (
                "env.thrust_translation_sum_of_squares",
                e.thrust_translation_sum_of_squares.to_string(),
            ),
            ("env.rate_frame", e.rate_frame.to_string()),
            ("env.max_speed", e.max_speed.to_string()),
            ("env.max_rate", e.max_rate.to_string()),
            ("env.termination_cost", e.termination_cost.to_string()),
            ("env.w_altitude", e.weights.altitude.to_string()),
            ("env.w_roll_rate", e.weights.roll_rate.to_string()),
            ("env.w_pitch_rate", e.weights.pitch_rate.to_string()),
            ("env.w_yaw_rate", e.weights.yaw_rate.to_string()),
        ];
        for (i, k) in BOUND_KEYS.iter().enumerate() {
            out.push((k, format!("{}, {}", e.bounds.lo[i], e.bounds.hi[i])));
        }
        out.extend([
            ("dp.levels", join(&self.dp.levels)),
            ("dp.depth", self.dp.depth.to_string()),
            ("dp.parallel", self.dp.parallel.to_string()),
            ("ddpg.capacity", d.capacity.to_string()),
            ("ddpg.batch", d.batch.to_string()),
            ("ddpg.tau", d.tau.to_string()),
            ("ddpg.actor_lr", d.actor_lr.to_string()),
            ("ddpg.critic_lr", d.critic_lr.to_string()),
            ("ddpg.episodes", d.episodes.to_string()),
            ("ddpg.warmup", d.warmup.to_string()),
            ("ddpg.hidden", join(&d.hidden)),
            ("ddpg.theta_ou", d.theta_ou.to_string()),
            ("ddpg.sigma_start", d.sigma_start.to_string()),
            ("ddpg.sigma_end", d.sigma_end.to_string()),
            ("ddpg.critic_sigmoid_output", d.critic_sigmoid_output.to_string()),
            (
                "ddpg.sample_initial_conditions",
                d.sample_initial_conditions.to_string(),
            ),
            ("ddpg.horizon", d.horizon.to_string()),
            ("ddpg.final_layer_scale", d.final_layer_scale.to_string()),
            ("ddpg.reward_scale", d.reward_scale.to_string()),
            ("ddpg.reward_clip", d.reward_clip.to_string()),
            ("run.seed", self.run.seed.to_string()),
            ("run.out_dir", self.run.out_dir.display().to_string()),
            ("run.label", self.run.label.clone()),
            ("run.duration", self.run.duration.to_string()),
            ("run.ic", self.run.ic.name().to_string()),
            (
                "sweep.ics",
                self.sweep_ics
                    .iter()
                    .map(|ic| ic.name())
                    .collect::<Vec<_>>()
                    .join(", "),
            ),
        ]);
        out.into_iter().map(|(k, v)| (k.to_string(), v)).collect()
    }

    /// Canonical text of the effective configuration.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for (k, v) in self.entries() {
            s.push_str(&k);
            s.push_str(" = ");
            s.push_str(&v);
            s.push('\n');
        }
        s
    }

    /// SHA-256 of [`Self::to_text`], lowercase hex.
    pub fn hash(&self) -> String {
        let digest = Sha256::digest(self.to_text().as_bytes());
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }

    /// DDPG settings with the run seed folded in.
    pub fn ddpg_config(&self) -> DdpgConfig {
        DdpgConfig {
            seed: self.run.seed,
            ..self.ddpg.clone()
        }
    }
}

impl fmt::Display for RunConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_text_gives_defaults() {
        assert_eq!(RunConfig::parse("").unwrap(), RunConfig::default());
        assert_eq!(
            RunConfig::parse("# only a comment\n\n   \n").unwrap(),
            RunConfig::default()
        );
    }

    #[test]
    fn defaults_round_trip() {
        let cfg = RunConfig::default();
        let back = RunConfig::parse(&cfg.to_text()).unwrap();
        assert_eq!(back, cfg);
        assert_eq!(back.hash(), cfg.hash());
    }

    #[test]
    fn values_and_comments() {
        let text = "params.mass = 2.0  # heavier\nenv.failed_rotor = none\n\
                    dp.levels = 0, 0.5, 1\nsweep.ics = ic1, ic3\nenv.axes = standard\n";
        let cfg = RunConfig::parse(text).unwrap();
        assert_eq!(cfg.params.mass, 2.0);
        assert_eq!(cfg.env.failed_rotor, None);
        assert_eq!(cfg.dp.levels, vec![0.0, 0.5, 1.0]);
        assert_eq!(
            cfg.sweep_ics,
            vec![InitialCondition::Ic1, InitialCondition::Ic3]
        );
        assert_eq!(cfg.env.axes, AxesMode::Standard);
        let back = RunConfig::parse(&cfg.to_text()).unwrap();
        assert_eq!(back, cfg);
    }

    #[test]
    fn empty_sweep_list() {
        let cfg = RunConfig::parse("sweep.ics =\n").unwrap();
        assert!(cfg.sweep_ics.is_empty());
        assert_eq!(RunConfig::parse(&cfg.to_text()).unwrap(), cfg);
    }

    #[test]
    fn unknown_key_reports_line() {
        let err = RunConfig::parse("env.dt = 0.01\n\nenv.bogus = 3\n").unwrap_err();
        assert_eq!(
            err,
            ConfigError::UnknownKey {
                line: 3,
                key: "env.bogus".into()
            }
        );
    }

    #[test]
    fn bad_value_and_syntax_report_line() {
        let err = RunConfig::parse("params.mass = heavy\n").unwrap_err();
        assert_eq!(err.line(), Some(1));
        let err = RunConfig::parse("# c\nparams.mass 2\n").unwrap_err();
        assert!(matches!(err, ConfigError::Syntax { line: 2, .. }));
        let err = RunConfig::parse("env.dt = 0.01\nenv.dt = 0.02\n").unwrap_err();
        assert!(matches!(err, ConfigError::Duplicate { line: 2, .. }));
    }

    #[test]
    fn semantic_validation() {
        let err = RunConfig::parse("params.mass = 0\n").unwrap_err();
        assert!(matches!(err, ConfigError::Invalid(_)));
        assert!(RunConfig::parse("ddpg.tau = 0\n").is_err());
        assert!(RunConfig::parse("dp.levels = 0.5, 0.2\n").is_err());
    }

    #[test]
    fn hash_tracks_content() {
        let a = RunConfig::default();
        let mut b = a.clone();
        b.run.seed = 1;
        assert_ne!(a.hash(), b.hash());
        assert_eq!(a.hash().len(), 64);
    }
}
