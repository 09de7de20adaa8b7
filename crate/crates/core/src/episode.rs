//! Closed-loop rollouts and their Table-3-style summaries.

use crate::env::{
    steps_for, Action, DoneReason, Env, EnvConfig, EnvError, InitialCondition, RewardMode,
    TrajectoryRow,
};
use crate::dynamics::{QuadParams, QuadState};
use std::fmt;

/// Anything that picks an action from the live environment.
pub trait Controller {
    fn act(&mut self, env: &Env) -> Result<Action, ControllerError>;
}

#[derive(Debug, thiserror::Error, Clone, PartialEq)]
pub enum ControllerError {
    /// Every candidate action leads straight to a terminal state.
    #[error("every candidate action ends the episode")]
    AllActionsCrash,
    #[error("{0}")]
    Other(String),
}

/// Holds one normalized command forever. `Constant([0.0; 4])` is the
/// uncontrolled, rotors-off case.
#[derive(Debug, Clone, Copy)]
pub struct Constant(pub Action);

impl Controller for Constant {
    fn act(&mut self, _env: &Env) -> Result<Action, ControllerError> {
        Ok(self.0)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EpisodeSummary {
    pub ic: String,
    pub steps: u64,
    /// Simulated time survived, s.
    pub hover_time: f64,
    pub done_reason: Option<DoneReason>,
    /// Set when the controller gave up (e.g. every action crashes).
    pub controller_error: Option<String>,
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
    pub alt_min: f64,
    pub alt_max: f64,
    pub yaw_rate_peak: f64,
    pub mode_switches: u64,
    pub score: f64,
    pub yaw_arrest_steps: u64,
    /// Yaw-arrest steps whose command had rotors 1 and 2 at zero and rotor 3
    /// at its top level.
    pub arrest_pulse_steps: u64,
    /// Longest contiguous stretch with |r| above `yaw_excess_level`, s.
    pub yaw_excess_max_duration: f64,
    pub yaw_excess_level: f64,
}

impl EpisodeSummary {
    fn start(ic: &str, s: &QuadState<f64>, yaw_excess_level: f64) -> Self {
        Self {
            ic: ic.to_string(),
            steps: 0,
            hover_time: 0.0,
            done_reason: None,
            controller_error: None,
            x_min: s.xn,
            x_max: s.xn,
            y_min: s.yn,
            y_max: s.yn,
            alt_min: s.altitude(),
            alt_max: s.altitude(),
            yaw_rate_peak: s.r.abs(),
            mode_switches: 0,
            score: 0.0,
            yaw_arrest_steps: 0,
            arrest_pulse_steps: 0,
            yaw_excess_max_duration: 0.0,
            yaw_excess_level,
        }
    }

    fn absorb(&mut self, s: &QuadState<f64>) {
        self.x_min = self.x_min.min(s.xn);
        self.x_max = self.x_max.max(s.xn);
        self.y_min = self.y_min.min(s.yn);
        self.y_max = self.y_max.max(s.yn);
        self.alt_min = self.alt_min.min(s.altitude());
        self.alt_max = self.alt_max.max(s.altitude());
        self.yaw_rate_peak = self.yaw_rate_peak.max(s.r.abs());
    }

    /// Share of yaw-arrest steps that used the arrest pulse.
    pub fn pulse_fraction(&self) -> f64 {
        if self.yaw_arrest_steps == 0 {
            0.0
        } else {
            self.arrest_pulse_steps as f64 / self.yaw_arrest_steps as f64
        }
    }

    pub fn crashed(&self) -> bool {
        matches!(
            self.done_reason,
            Some(
                DoneReason::GroundContact
                    | DoneReason::GimbalLock
                    | DoneReason::NonFinite
                    | DoneReason::EnvelopeExceeded
            )
        ) || self.controller_error.is_some()
    }
}

impl fmt::Display for EpisodeSummary {
    /// One-line `key=value` record.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let reason = match (&self.done_reason, &self.controller_error) {
            (_, Some(_)) => "AllActionsCrash".to_string(),
            (Some(r), None) => r.to_string(),
            (None, None) => "None".to_string(),
        };
        write!(
            f,
            "ic={} steps={} hover_time={} done={} x_min={} x_max={} y_min={} y_max={} \
             z_min={} z_max={} yaw_rate_peak={} mode_switches={} score={} \
             yaw_arrest_steps={} pulse_fraction={} yaw_excess_max_duration={}",
            self.ic,
            self.steps,
            self.hover_time,
            reason,
            self.x_min,
            self.x_max,
            self.y_min,
            self.y_max,
            self.alt_min,
            self.alt_max,
            self.yaw_rate_peak,
            self.mode_switches,
            self.score,
            self.yaw_arrest_steps,
            self.pulse_fraction(),
            self.yaw_excess_max_duration,
        )
    }
}

#[derive(Debug, Clone)]
pub struct EpisodeLog {
    pub rows: Vec<TrajectoryRow>,
    pub actions: Vec<Action>,
    pub summary: EpisodeSummary,
}

/// Runs `controller` from `ic` until termination or `max_time` seconds.
///
/// The episode horizon is replaced by `max_time`.
pub fn run_controller<C: Controller + ?Sized>(
    controller: &mut C,
    params: QuadParams<f64>,
    cfg: &EnvConfig,
    ic: InitialCondition,
    max_time: f64,
) -> Result<EpisodeLog, EnvError> {
    let initial = ic.state(cfg.failure_altitude);
    let yaw_excess_level = 1.5 * cfg.yaw_rate_threshold;
    let mut summary = EpisodeSummary::start(ic.name(), &initial, yaw_excess_level);
    let mut log = EpisodeLog {
        rows: Vec::new(),
        actions: Vec::new(),
        summary: summary.clone(),
    };
    if steps_for(max_time, cfg.dt) == 0 {
        initial
            .validate()
            .map_err(EnvError::InvalidCustomState)?;
        return Ok(log);
    }
    let cfg = EnvConfig {
        episode_horizon: max_time,
        ..*cfg
    };
    let mut env = Env::new(params, cfg)?;
    env.reset(ic)?;
    let top = 1.0 - 1e-12;
    let mut prev_mode = env.mode();
    let mut excess_run = 0u64;
    let mut excess_best = 0u64;
    loop {
        let mode = env.mode();
        let action = match controller.act(&env) {
            Ok(a) => a,
            Err(e) => {
                summary.controller_error = Some(e.to_string());
                break;
            }
        };
        let res = env.step(&action)?;
        if mode == RewardMode::YawArrest {
            summary.yaw_arrest_steps += 1;
            if action[0] == 0.0 && action[1] == 0.0 && action[2] >= top {
                summary.arrest_pulse_steps += 1;
            }
        }
        if res.mode != prev_mode {
            summary.mode_switches += 1;
            prev_mode = res.mode;
        }
        if res.state.r.abs() > yaw_excess_level {
            excess_run += 1;
            excess_best = excess_best.max(excess_run);
        } else {
            excess_run = 0;
        }
        summary.absorb(&res.state);
        summary.score += res.reward;
        summary.steps += 1;
        summary.hover_time = res.time;
        log.rows.push(TrajectoryRow::from(&res));
        log.actions.push(action);
        if res.done {
            summary.done_reason = res.done_reason;
            break;
        }
    }
    summary.yaw_excess_max_duration = excess_best as f64 * cfg.dt;
    log.summary = summary;
    Ok(log)
}
