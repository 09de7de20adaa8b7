//! Model-based one-step-lookahead controller.
//!
//! Every action of a discrete grid over the live rotors is pushed through the
//! plant for one step and scored as `r(s') + γ·V̂(s')` under the active reward
//! objective, with the bootstrap `V̂(s) = r(s) / (1 - γ)`. The best action is
//! applied. No value table is stored.

use crate::dynamics::{integrate_step, Plant, QuadParams, QuadState};
use crate::env::{
    compute_reward, Action, EnvConfig, EnvError, InitialCondition, RewardMode, ACTION_DIM,
};
use crate::episode::{run_controller, Controller, ControllerError, EpisodeLog};
use crate::propulsion::FaultMask;
use rayon::prelude::*;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DpError {
    #[error("action levels must be sorted, unique and inside [0, 1]")]
    BadLevels,
    #[error("lookahead depth must be >= 1")]
    BadDepth,
    #[error("the bootstrap value needs gamma < 1")]
    UndiscountedBootstrap,
}

/// Normalized command levels applied independently to each live rotor.
#[derive(Debug, Clone, PartialEq)]
pub struct ActionGrid {
    levels: Vec<f64>,
    live: Vec<usize>,
    actions: Vec<Action>,
}

impl ActionGrid {
    pub fn new(levels: Vec<f64>, fault: FaultMask) -> Result<Self, DpError> {
        let sorted = levels.windows(2).all(|w| w[0] < w[1]);
        let inside = levels.iter().all(|l| (0.0..=1.0).contains(l));
        if levels.is_empty() || !sorted || !inside {
            return Err(DpError::BadLevels);
        }
        let live = fault.live_slots();
        let mut actions = Vec::with_capacity(levels.len().pow(live.len() as u32));
        let mut idx = vec![0usize; live.len()];
        'outer: loop {
            let mut a = [0.0; ACTION_DIM];
            for (k, &slot) in live.iter().enumerate() {
                a[slot] = levels[idx[k]];
            }
            actions.push(a);
            // odometer, last live rotor fastest
            for k in (0..live.len()).rev() {
                idx[k] += 1;
                if idx[k] < levels.len() {
                    continue 'outer;
                }
                idx[k] = 0;
            }
            break;
        }
        Ok(Self {
            levels,
            live,
            actions,
        })
    }

    /// Five evenly spaced levels, 0 to 1.
    pub fn default_levels() -> Vec<f64> {
        vec![0.0, 0.25, 0.5, 0.75, 1.0]
    }

    pub fn levels(&self) -> &[f64] {
        &self.levels
    }

    pub fn live_slots(&self) -> &[usize] {
        &self.live
    }

    /// All grid actions in lexicographic order over the live slots.
    pub fn actions(&self) -> &[Action] {
        &self.actions
    }

    pub fn len(&self) -> usize {
        self.actions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.actions.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DpConfig {
    pub levels: Vec<f64>,
    pub depth: usize,
    pub parallel: bool,
}

impl Default for DpConfig {
    fn default() -> Self {
        Self {
            levels: ActionGrid::default_levels(),
            depth: 1,
            parallel: false,
        }
    }
}

impl DpConfig {
    pub fn validate(&self) -> Result<(), DpError> {
        if self.depth == 0 {
            return Err(DpError::BadDepth);
        }
        ActionGrid::new(self.levels.clone(), FaultMask::NONE).map(|_| ())
    }
}

/// The chosen action and its lookahead score.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GreedyChoice {
    pub action: Action,
    pub score: f64,
    pub index: usize,
}

/// Constant-reward bootstrap of a successor state.
pub fn bootstrap_value(reward: f64, gamma: f64) -> f64 {
    reward / (1.0 - gamma)
}

fn successor(
    state: &QuadState<f64>,
    action: &Action,
    plant: &Plant<f64>,
    cfg: &EnvConfig,
) -> Option<QuadState<f64>> {
    let mut control = crate::propulsion::ControlInput::from_normalized(action, plant.params.omega_max);
    if let Some(slot) = plant.propulsion.fault.failed_slot() {
        control.omega[slot] = 0.0;
    }
    let next = integrate_step(state, &control, plant, cfg.dt).ok()?;
    let terminal = next.zn >= 0.0 || next.validate().is_err() || cfg.outside_envelope(&next);
    (!terminal).then_some(next)
}

/// Lookahead score of `action` from `state`, or `None` if it is terminal.
pub fn action_score(
    state: &QuadState<f64>,
    action: &Action,
    mode: RewardMode,
    grid: &ActionGrid,
    plant: &Plant<f64>,
    cfg: &EnvConfig,
    depth: usize,
) -> Option<f64> {
    let next = successor(state, action, plant, cfg)?;
    let r = compute_reward(&next, mode, cfg);
    let tail = if depth <= 1 {
        bootstrap_value(r, cfg.gamma)
    } else {
        grid.actions()
            .iter()
            .filter_map(|a| action_score(&next, a, mode, grid, plant, cfg, depth - 1))
            .fold(f64::NEG_INFINITY, f64::max)
    };
    Some(r + cfg.gamma * tail)
}

/// Sum of commanded levels, the first tie-break key.
fn command_total(a: &Action) -> f64 {
    a.iter().sum()
}

/// Deterministic argmax: highest score, then lowest total command, then the
/// earliest grid position.
fn select(actions: &[Action], scores: &[Option<f64>]) -> Option<GreedyChoice> {
    let mut best: Option<GreedyChoice> = None;
    for (index, (a, s)) in actions.iter().zip(scores).enumerate() {
        let Some(score) = *s else { continue };
        let better = match &best {
            None => true,
            Some(b) => {
                score > b.score || (score == b.score && command_total(a) < command_total(&b.action))
            }
        };
        if better {
            best = Some(GreedyChoice {
                action: *a,
                score,
                index,
            });
        }
    }
    best
}

/// Scores every grid action and returns the best one.
pub fn greedy_action(
    state: &QuadState<f64>,
    mode: RewardMode,
    grid: &ActionGrid,
    plant: &Plant<f64>,
    cfg: &EnvConfig,
    dp: &DpConfig,
) -> Result<GreedyChoice, ControllerError> {
    let scores = score_all(state, mode, grid, plant, cfg, dp);
    select(grid.actions(), &scores).ok_or(ControllerError::AllActionsCrash)
}

/// Scores of all grid actions in grid order (`None` = terminal).
pub fn score_all(
    state: &QuadState<f64>,
    mode: RewardMode,
    grid: &ActionGrid,
    plant: &Plant<f64>,
    cfg: &EnvConfig,
    dp: &DpConfig,
) -> Vec<Option<f64>> {
    let eval = |a: &Action| action_score(state, a, mode, grid, plant, cfg, dp.depth);
    if dp.parallel {
        grid.actions().par_iter().map(eval).collect()
    } else {
        grid.actions().iter().map(eval).collect()
    }
}

/// The lookahead agent as a closed-loop controller.
#[derive(Debug, Clone)]
pub struct DpAgent {
    pub grid: ActionGrid,
    pub config: DpConfig,
}

impl DpAgent {
    pub fn new(config: DpConfig, env_cfg: &EnvConfig) -> Result<Self, DpError> {
        config.validate()?;
        if env_cfg.gamma >= 1.0 {
            return Err(DpError::UndiscountedBootstrap);
        }
        let grid = ActionGrid::new(config.levels.clone(), env_cfg.fault_mask())?;
        Ok(Self { grid, config })
    }
}

impl Controller for DpAgent {
    fn act(&mut self, env: &crate::env::Env) -> Result<Action, ControllerError> {
        greedy_action(
            env.state(),
            env.mode(),
            &self.grid,
            env.plant(),
            env.config(),
            &self.config,
        )
        .map(|c| c.action)
    }
}

/// One DP-controlled episode of at most `max_time` seconds.
pub fn run_episode(
    ic: InitialCondition,
    params: QuadParams<f64>,
    env_cfg: &EnvConfig,
    dp: &DpConfig,
    max_time: f64,
) -> Result<EpisodeLog, RunError> {
    let mut agent = DpAgent::new(dp.clone(), env_cfg)?;
    Ok(run_controller(&mut agent, params, env_cfg, ic, max_time)?)
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RunError {
    #[error(transparent)]
    Dp(#[from] DpError),
    #[error(transparent)]
    Env(#[from] EnvError),
}
