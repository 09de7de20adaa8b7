//! Episodic environment over the faulted plant.
//!
//! Reset perturbs a level hover at the failure altitude, step advances one
//! `dt` under normalized rotor commands, and the reward objective switches
//! between altitude tracking and yaw-rate arrest on the yaw-rate magnitude.

use crate::dynamics::{integrate_step, DynamicsError, Plant, QuadParams, QuadState};
use crate::propulsion::{AxesMode, ControlInput, FaultMask, PropulsionModel, ROTORS};
use std::fmt;
use std::io::{self, Write};
use std::str::FromStr;
use thiserror::Error;

pub const OBS_DIM: usize = 6;
pub const ACTION_DIM: usize = ROTORS;
pub const TRANSITION_LEN: usize = OBS_DIM + ACTION_DIM + OBS_DIM + 1;

pub type Observation = [f64; OBS_DIM];
pub type Action = [f64; ACTION_DIM];

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EnvError {
    #[error("episode already finished")]
    EpisodeFinished,
    #[error("invalid custom initial state: {0}")]
    InvalidCustomState(DynamicsError),
    #[error("invalid environment config: {0}")]
    InvalidConfig(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum RewardMode {
    #[default]
    AltitudeTracking,
    YawArrest,
}

impl RewardMode {
    /// Short tag used in the trajectory log.
    pub fn tag(self) -> &'static str {
        match self {
            Self::AltitudeTracking => "ALT",
            Self::YawArrest => "YAW",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DoneReason {
    HorizonReached,
    GroundContact,
    GimbalLock,
    NonFinite,
    /// Speed or body rate beyond the configured flight envelope.
    EnvelopeExceeded,
}

impl fmt::Display for DoneReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::HorizonReached => "HorizonReached",
            Self::GroundContact => "GroundContact",
            Self::GimbalLock => "GimbalLock",
            Self::NonFinite => "NonFinite",
            Self::EnvelopeExceeded => "EnvelopeExceeded",
        })
    }
}

/// Starting perturbation applied to the level hover at the failure altitude.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InitialCondition {
    Nominal,
    /// u = 5 m/s
    Ic1,
    /// v = 5 m/s
    Ic2,
    /// w = 5 m/s
    Ic3,
    /// phi = 0.35 rad
    Ic4,
    /// theta = 0.35 rad
    Ic5,
    Custom(QuadState<f64>),
}

impl InitialCondition {
    pub const TABLE: [InitialCondition; 6] = [
        Self::Nominal,
        Self::Ic1,
        Self::Ic2,
        Self::Ic3,
        Self::Ic4,
        Self::Ic5,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Self::Nominal => "nominal",
            Self::Ic1 => "ic1",
            Self::Ic2 => "ic2",
            Self::Ic3 => "ic3",
            Self::Ic4 => "ic4",
            Self::Ic5 => "ic5",
            Self::Custom(_) => "custom",
        }
    }

    pub fn state(&self, altitude: f64) -> QuadState<f64> {
        let hover = QuadState::at_altitude(altitude);
        match *self {
            Self::Nominal => hover,
            Self::Ic1 => QuadState { u: 5.0, ..hover },
            Self::Ic2 => QuadState { v: 5.0, ..hover },
            Self::Ic3 => QuadState { w: 5.0, ..hover },
            Self::Ic4 => QuadState { phi: 0.35, ..hover },
            Self::Ic5 => QuadState {
                theta: 0.35,
                ..hover
            },
            Self::Custom(s) => s,
        }
    }
}

impl FromStr for InitialCondition {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "nominal" => Ok(Self::Nominal),
            "ic1" => Ok(Self::Ic1),
            "ic2" => Ok(Self::Ic2),
            "ic3" => Ok(Self::Ic3),
            "ic4" => Ok(Self::Ic4),
            "ic5" => Ok(Self::Ic5),
            other => Err(format!("unknown initial condition `{other}`")),
        }
    }
}

/// Affine `[lo, hi] -> [0, 1]` bounds for xn, yn, zn, phi, theta, psi.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ObsBounds {
    pub lo: [f64; OBS_DIM],
    pub hi: [f64; OBS_DIM],
}

impl Default for ObsBounds {
    fn default() -> Self {
        use std::f64::consts::{FRAC_PI_2, PI};
        Self {
            lo: [-50.0, -50.0, -120.0, -FRAC_PI_2, -FRAC_PI_2, -8.0 * PI],
            hi: [50.0, 50.0, 0.0, FRAC_PI_2, FRAC_PI_2, 8.0 * PI],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RewardWeights {
    /// Per metre of altitude error.
    pub altitude: f64,
    /// Per rad/s of roll rate.
    pub roll_rate: f64,
    /// Per rad/s of pitch rate.
    pub pitch_rate: f64,
    /// Per rad/s of yaw rate, yaw-arrest objective only.
    pub yaw_rate: f64,
}

impl Default for RewardWeights {
    fn default() -> Self {
        Self {
            altitude: 1.0,
            roll_rate: 0.5,
            pitch_rate: 0.5,
            yaw_rate: 1.0,
        }
    }
}

/// Frame in which the altitude-tracking objective measures roll and pitch rate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum RateFrame {
    /// Body-axis p and q.
    #[default]
    Body,
    /// See [`level_frame_rates`].
    Level,
}

impl FromStr for RateFrame {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "body" => Ok(Self::Body),
            "level" => Ok(Self::Level),
            _ => Err(format!("unknown rate frame `{s}` (expected body or level)")),
        }
    }
}

impl fmt::Display for RateFrame {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Body => "body",
            Self::Level => "level",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnvConfig {
    pub dt: f64,
    pub episode_horizon: f64,
    pub failure_altitude: f64,
    /// 1-based rotor index; `None` for an intact airframe.
    pub failed_rotor: Option<usize>,
    pub yaw_rate_threshold: f64,
    pub hysteresis_ratio: f64,
    pub gamma: f64,
    pub axes: AxesMode,
    pub yaw_moment_literal: bool,
    pub thrust_translation_sum_of_squares: bool,
    pub weights: RewardWeights,
    pub rate_frame: RateFrame,
    pub bounds: ObsBounds,
    /// Body-frame speed above which the episode ends as `EnvelopeExceeded`,
    /// m/s. Infinite by default.
    pub max_speed: f64,
    /// Largest |p|, |q| or |r| before the episode ends as
    /// `EnvelopeExceeded`, rad/s. Infinite by default.
    pub max_rate: f64,
    /// One-off cost charged on the step that ends an episode early (any
    /// reason other than the horizon). Zero by default.
    pub termination_cost: f64,
}

impl Default for EnvConfig {
    fn default() -> Self {
        Self {
            dt: 0.01,
            episode_horizon: 170.0,
            failure_altitude: 100.0,
            failed_rotor: Some(4),
            yaw_rate_threshold: 10.0,
            hysteresis_ratio: 0.5,
            gamma: 0.99,
            axes: AxesMode::Transformed,
            yaw_moment_literal: false,
            thrust_translation_sum_of_squares: false,
            weights: RewardWeights::default(),
            rate_frame: RateFrame::Body,
            bounds: ObsBounds::default(),
            max_speed: f64::INFINITY,
            max_rate: f64::INFINITY,
            termination_cost: 0.0,
        }
    }
}

impl EnvConfig {
    pub fn validate(&self) -> Result<(), EnvError> {
        let bad = |m: &str| Err(EnvError::InvalidConfig(m.to_string()));
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return bad("dt must be > 0");
        }
        if !(self.episode_horizon > 0.0) {
            return bad("episode_horizon must be > 0");
        }
        if !(self.yaw_rate_threshold > 0.0) {
            return bad("yaw_rate_threshold must be > 0");
        }
        if !(self.hysteresis_ratio > 0.0 && self.hysteresis_ratio <= 1.0) {
            return bad("hysteresis_ratio must be in (0, 1]");
        }
        if !(self.gamma > 0.0 && self.gamma <= 1.0) {
            return bad("gamma must be in (0, 1]");
        }
        if !(self.max_speed > 0.0 && self.max_rate > 0.0) {
            return bad("max_speed and max_rate must be > 0");
        }
        if !(self.termination_cost >= 0.0 && self.termination_cost.is_finite()) {
            return bad("termination_cost must be finite and >= 0");
        }
        if let Some(r) = self.failed_rotor {
            if !(1..=ROTORS).contains(&r) {
                return bad("failed_rotor must be in 1..=4");
            }
        }
        for i in 0..OBS_DIM {
            if !(self.bounds.hi[i] > self.bounds.lo[i]) {
                return bad("observation bounds need hi > lo");
            }
        }
        let w = &self.weights;
        if [w.altitude, w.roll_rate, w.pitch_rate, w.yaw_rate]
            .iter()
            .any(|x| !(*x >= 0.0))
        {
            return bad("reward weights must be >= 0");
        }
        Ok(())
    }

    /// Whether `s` is faster or spinning harder than the flight envelope.
    pub fn outside_envelope(&self, s: &QuadState<f64>) -> bool {
        let speed = (s.u * s.u + s.v * s.v + s.w * s.w).sqrt();
        let rate = s.p.abs().max(s.q.abs()).max(s.r.abs());
        speed > self.max_speed || rate > self.max_rate
    }

    pub fn fault_mask(&self) -> FaultMask {
        self.failed_rotor
            .and_then(|r| FaultMask::rotor(r).ok())
            .unwrap_or(FaultMask::NONE)
    }

    pub fn propulsion(&self) -> PropulsionModel {
        PropulsionModel {
            axes: self.axes,
            fault: self.fault_mask(),
            yaw_moment_literal: self.yaw_moment_literal,
            thrust_translation_sum_of_squares: self.thrust_translation_sum_of_squares,
        }
    }

    /// Number of steps after which the horizon is reached.
    pub fn horizon_steps(&self) -> u64 {
        steps_for(self.episode_horizon, self.dt)
    }
}

/// `ceil(duration / dt)` with a guard against representation error.
pub fn steps_for(duration: f64, dt: f64) -> u64 {
    let x = duration / dt;
    let r = x.round();
    if (x - r).abs() < 1e-9 {
        r.max(0.0) as u64
    } else {
        x.ceil().max(0.0) as u64
    }
}

/// Switches to yaw arrest above the threshold and back to altitude tracking
/// once the yaw rate falls below `ratio · threshold`.
pub fn select_reward_mode(
    yaw_rate: f64,
    current: RewardMode,
    threshold: f64,
    hysteresis_ratio: f64,
) -> RewardMode {
    let r = yaw_rate.abs();
    match current {
        RewardMode::AltitudeTracking if r > threshold => RewardMode::YawArrest,
        RewardMode::YawArrest if r < hysteresis_ratio * threshold => RewardMode::AltitudeTracking,
        m => m,
    }
}

/// Negative weighted absolute deviation from the active objective's target.
pub fn compute_reward(state: &QuadState<f64>, mode: RewardMode, cfg: &EnvConfig) -> f64 {
    let w = &cfg.weights;
    match mode {
        RewardMode::AltitudeTracking => {
            let (p, q) = match cfg.rate_frame {
                RateFrame::Body => (state.p, state.q),
                RateFrame::Level => level_frame_rates(state),
            };
            -w.altitude * (cfg.failure_altitude - state.altitude()).abs()
                - w.roll_rate * p.abs()
                - w.pitch_rate * q.abs()
        }
        RewardMode::YawArrest => -w.yaw_rate * state.r.abs(),
    }
}

/// Horizontal components of the angular velocity, resolved in the
/// heading-aligned level frame (body rates rotated through roll, then pitch).
///
/// A rotor-out airframe hovers while spinning about a vertical axis with its
/// body axis coning around it; there the body p and q are non-zero but these
/// two components vanish.
pub fn level_frame_rates(state: &QuadState<f64>) -> (f64, f64) {
    let (sp, cp) = state.phi.sin_cos();
    let (st, ct) = state.theta.sin_cos();
    let x = ct * state.p + st * (sp * state.q + cp * state.r);
    let y = cp * state.q - sp * state.r;
    (x, y)
}

pub fn normalize_observation(state: &QuadState<f64>, bounds: &ObsBounds) -> Observation {
    let raw = [
        state.xn,
        state.yn,
        state.zn,
        state.phi,
        state.theta,
        state.psi,
    ];
    let mut out = [0.0; OBS_DIM];
    for i in 0..OBS_DIM {
        let x = (raw[i] - bounds.lo[i]) / (bounds.hi[i] - bounds.lo[i]);
        out[i] = if x.is_nan() { 0.5 } else { x.clamp(0.0, 1.0) };
    }
    out
}

/// One replay record.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Transition {
    pub obs: Observation,
    pub action: Action,
    pub next_obs: Observation,
    pub reward: f64,
}

impl Transition {
    pub fn to_array(&self) -> [f64; TRANSITION_LEN] {
        let mut out = [0.0; TRANSITION_LEN];
        out[..6].copy_from_slice(&self.obs);
        out[6..10].copy_from_slice(&self.action);
        out[10..16].copy_from_slice(&self.next_obs);
        out[16] = self.reward;
        out
    }

    pub fn from_slice(x: &[f64]) -> Option<Self> {
        if x.len() != TRANSITION_LEN {
            return None;
        }
        let mut t = Transition {
            obs: [0.0; 6],
            action: [0.0; 4],
            next_obs: [0.0; 6],
            reward: x[16],
        };
        t.obs.copy_from_slice(&x[..6]);
        t.action.copy_from_slice(&x[6..10]);
        t.next_obs.copy_from_slice(&x[10..16]);
        Some(t)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepResult {
    pub obs: Observation,
    pub reward: f64,
    pub done: bool,
    pub done_reason: Option<DoneReason>,
    pub state: QuadState<f64>,
    /// Objective the reward was computed under.
    pub mode: RewardMode,
    /// Rotor speeds actually applied, after the fault mask.
    pub omega: [f64; ROTORS],
    pub time: f64,
}

#[derive(Debug, Clone)]
pub struct Env {
    cfg: EnvConfig,
    plant: Plant<f64>,
    state: QuadState<f64>,
    mode: RewardMode,
    steps: u64,
    horizon_steps: u64,
    done: bool,
}

impl Env {
    pub fn new(params: QuadParams<f64>, cfg: EnvConfig) -> Result<Self, EnvError> {
        cfg.validate()?;
        params
            .validate()
            .map_err(|e| EnvError::InvalidConfig(e.to_string()))?;
        let plant = Plant::new(params, cfg.propulsion());
        Ok(Self {
            state: QuadState::at_altitude(cfg.failure_altitude),
            cfg,
            plant,
            mode: RewardMode::AltitudeTracking,
            steps: 0,
            horizon_steps: cfg.horizon_steps(),
            done: false,
        })
    }

    pub fn reset(&mut self, ic: InitialCondition) -> Result<Observation, EnvError> {
        let state = ic.state(self.cfg.failure_altitude);
        state.validate().map_err(EnvError::InvalidCustomState)?;
        self.state = state;
        self.mode = RewardMode::AltitudeTracking;
        self.steps = 0;
        self.done = false;
        Ok(self.observation())
    }

    pub fn observation(&self) -> Observation {
        normalize_observation(&self.state, &self.cfg.bounds)
    }

    pub fn state(&self) -> &QuadState<f64> {
        &self.state
    }

    pub fn mode(&self) -> RewardMode {
        self.mode
    }

    pub fn config(&self) -> &EnvConfig {
        &self.cfg
    }

    pub fn plant(&self) -> &Plant<f64> {
        &self.plant
    }

    pub fn time(&self) -> f64 {
        self.steps as f64 * self.cfg.dt
    }

    pub fn steps(&self) -> u64 {
        self.steps
    }

    pub fn is_done(&self) -> bool {
        self.done
    }

    /// Rotor speeds that `action` maps to, with the failed rotor zeroed.
    pub fn control_for(&self, action: &Action) -> ControlInput<f64> {
        let mut c = ControlInput::from_normalized(action, self.plant.params.omega_max);
        if let Some(slot) = self.cfg.fault_mask().failed_slot() {
            c.omega[slot] = 0.0;
        }
        c
    }

    pub fn step(&mut self, action: &Action) -> Result<StepResult, EnvError> {
        if self.done {
            return Err(EnvError::EpisodeFinished);
        }
        let control = self.control_for(action);
        let outcome = integrate_step(&self.state, &control, &self.plant, self.cfg.dt);
        self.steps += 1;
        let mut reason = None;
        match outcome {
            Ok(next) => {
                self.state = next;
                if next.theta.cos().abs() < crate::dynamics::GIMBAL_COS_LIMIT {
                    reason = Some(DoneReason::GimbalLock);
                }
            }
            Err(DynamicsError::GimbalLock { .. }) => reason = Some(DoneReason::GimbalLock),
            Err(DynamicsError::NonFiniteInput) => reason = Some(DoneReason::NonFinite),
        }
        self.mode = select_reward_mode(
            self.state.r,
            self.mode,
            self.cfg.yaw_rate_threshold,
            self.cfg.hysteresis_ratio,
        );
        let mut reward = compute_reward(&self.state, self.mode, &self.cfg);
        if reason.is_none() {
            if self.state.zn >= 0.0 {
                reason = Some(DoneReason::GroundContact);
            } else if self.cfg.outside_envelope(&self.state) {
                reason = Some(DoneReason::EnvelopeExceeded);
            } else if self.steps >= self.horizon_steps {
                reason = Some(DoneReason::HorizonReached);
            }
        }
        if reason.is_some_and(|r| r != DoneReason::HorizonReached) {
            reward -= self.cfg.termination_cost;
        }
        self.done = reason.is_some();
        Ok(StepResult {
            obs: self.observation(),
            reward,
            done: self.done,
            done_reason: reason,
            state: self.state,
            mode: self.mode,
            omega: control.omega,
            time: self.time(),
        })
    }
}

/// Header of the trajectory log.
pub const TRAJECTORY_HEADER: &str =
    "t,u,v,w,p,q,r,phi,theta,psi,xn,yn,zn,omega1,omega2,omega3,omega4,reward,mode";

/// One row of the trajectory log.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryRow {
    pub time: f64,
    pub state: QuadState<f64>,
    pub omega: [f64; ROTORS],
    pub reward: f64,
    pub mode: RewardMode,
}

impl From<&StepResult> for TrajectoryRow {
    fn from(s: &StepResult) -> Self {
        Self {
            time: s.time,
            state: s.state,
            omega: s.omega,
            reward: s.reward,
            mode: s.mode,
        }
    }
}

pub fn write_trajectory_csv<W: Write>(mut out: W, rows: &[TrajectoryRow]) -> io::Result<()> {
    writeln!(out, "{TRAJECTORY_HEADER}")?;
    for row in rows {
        write!(out, "{}", row.time)?;
        for x in row.state.to_array() {
            write!(out, ",{x}")?;
        }
        for w in row.omega {
            write!(out, ",{w}")?;
        }
        writeln!(out, ",{},{}", row.reward, row.mode.tag())?;
    }
    Ok(())
}
