//! Deep deterministic policy gradient: replay ring, Ornstein-Uhlenbeck
//! exploration, actor and critic with soft-tracked targets.
//!
//! The actor emits one sigmoid output per live rotor; those are scattered into
//! the four action slots with the failed slot held at 0. The critic sees the
//! observation concatenated with all four slots.
//!
//! Transitions carry no terminal flag, so the critic target is always
//! `r + γ·Q'(s', μ'(s'))`.

use crate::env::{
    Action, Env, EnvConfig, InitialCondition, Transition, ACTION_DIM,
    OBS_DIM, TRANSITION_LEN,
};
use crate::episode::{Controller, ControllerError};
use crate::dynamics::QuadParams;
use crate::neural::{soft_update, Activation, Adam, DenseNetwork, NetError};
use crate::propulsion::FaultMask;
use crate::rng::SplitMix64;
use ndarray::{s, Array2};
use std::io::{self, Write};

pub const LEARNING_CURVE_HEADER: &str = "episode,score,steps,critic_loss,noise_sigma";

#[derive(Debug, thiserror::Error)]
pub enum DdpgError {
    #[error("replay buffer holds {have} records, need {need}")]
    InsufficientData { have: usize, need: usize },
    #[error("invalid DDPG config: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Net(#[from] NetError),
    #[error(transparent)]
    Env(#[from] crate::env::EnvError),
}

/// Record shape: `obs`, `act`, `next_obs`, `reward`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Layout {
    pub obs: usize,
    pub act: usize,
}

impl Layout {
    pub const ENV: Layout = Layout {
        obs: OBS_DIM,
        act: ACTION_DIM,
    };

    pub fn width(&self) -> usize {
        2 * self.obs + self.act + 1
    }
}

/// Fixed-capacity ring of flat transition records.
#[derive(Debug, Clone)]
pub struct ReplayBuffer {
    layout: Layout,
    capacity: usize,
    data: Vec<f64>,
    cursor: usize,
    count: usize,
}

impl ReplayBuffer {
    pub fn new(capacity: usize, layout: Layout) -> Self {
        assert!(capacity > 0, "replay capacity must be positive");
        Self {
            layout,
            capacity,
            data: vec![0.0; capacity * layout.width()],
            cursor: 0,
            count: 0,
        }
    }

    pub fn layout(&self) -> Layout {
        self.layout
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn len(&self) -> usize {
        self.count
    }

    pub fn is_empty(&self) -> bool {
        self.count == 0
    }

    /// Physical slot the next push will write.
    pub fn cursor(&self) -> usize {
        self.cursor
    }

    pub fn push(&mut self, record: &[f64]) {
        let w = self.layout.width();
        assert_eq!(record.len(), w, "record width");
        self.data[self.cursor * w..(self.cursor + 1) * w].copy_from_slice(record);
        self.cursor = (self.cursor + 1) % self.capacity;
        self.count = (self.count + 1).min(self.capacity);
    }

    pub fn push_transition(&mut self, t: &Transition) {
        self.push(&t.to_array());
    }

    /// Record in physical slot `i < len()`.
    pub fn slot(&self, i: usize) -> &[f64] {
        assert!(i < self.count, "slot {i} outside filled region");
        let w = self.layout.width();
        &self.data[i * w..(i + 1) * w]
    }

    /// Records from oldest to newest.
    pub fn iter_ordered(&self) -> impl Iterator<Item = &[f64]> + '_ {
        let start = if self.count < self.capacity { 0 } else { self.cursor };
        (0..self.count).map(move |k| self.slot((start + k) % self.capacity))
    }

    /// `n` physical slots drawn uniformly, with replacement.
    pub fn sample_indices(&self, n: usize, rng: &mut SplitMix64) -> Vec<usize> {
        assert!(self.count > 0, "sampling from an empty buffer");
        (0..n).map(|_| rng.below(self.count as u64) as usize).collect()
    }

    pub fn sample_transitions(&self, n: usize, rng: &mut SplitMix64) -> Option<Vec<Transition>> {
        if self.layout.width() != TRANSITION_LEN {
            return None;
        }
        self.sample_indices(n, rng)
            .into_iter()
            .map(|i| Transition::from_slice(self.slot(i)))
            .collect()
    }
}

/// Ornstein-Uhlenbeck process, Euler-Maruyama discretized.
#[derive(Debug, Clone, PartialEq)]
pub struct OuNoise {
    pub x: Vec<f64>,
    pub theta: f64,
    pub sigma: f64,
    pub mu: f64,
    pub dt: f64,
}

impl OuNoise {
    pub fn new(dim: usize, theta: f64, sigma: f64, mu: f64, dt: f64) -> Self {
        Self {
            x: vec![mu; dim],
            theta,
            sigma,
            mu,
            dt,
        }
    }

    pub fn reset(&mut self) {
        for x in &mut self.x {
            *x = self.mu;
        }
    }

    /// `x ← x + θ(μ − x)dt + σ√dt·ξ`, one standard normal per component.
    pub fn step(&mut self, rng: &mut SplitMix64) -> &[f64] {
        let sd = self.sigma * self.dt.sqrt();
        for x in &mut self.x {
            let xi = rng.normal();
            *x += self.theta * (self.mu - *x) * self.dt + sd * xi;
        }
        &self.x
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DdpgConfig {
    pub capacity: usize,
    pub batch: usize,
    pub tau: f64,
    pub actor_lr: f64,
    pub critic_lr: f64,
    pub episodes: usize,
    pub warmup: usize,
    pub hidden: Vec<usize>,
    pub theta_ou: f64,
    pub sigma_start: f64,
    pub sigma_end: f64,
    pub seed: u64,
    pub critic_sigmoid_output: bool,
    /// Draw each episode's start from the initial-condition table instead of
    /// always starting Nominal.
    pub sample_initial_conditions: bool,
    /// Training episode length, s.
    pub horizon: f64,
    pub final_layer_scale: f64,
    /// Factor applied to rewards as they enter the replay buffer. Episode
    /// scores stay in raw reward units.
    pub reward_scale: f64,
    /// Bound on the magnitude of a stored (scaled) reward.
    pub reward_clip: f64,
}

impl Default for DdpgConfig {
    fn default() -> Self {
        Self {
            capacity: 100_000,
            batch: 64,
            tau: 0.005,
            actor_lr: 1e-4,
            critic_lr: 1e-3,
            episodes: 2000,
            warmup: 1000,
            hidden: vec![64, 64],
            theta_ou: 0.15,
            sigma_start: 0.2,
            sigma_end: 0.02,
            seed: 0,
            critic_sigmoid_output: false,
            sample_initial_conditions: false,
            horizon: 10.0,
            final_layer_scale: 0.003,
            reward_scale: 1.0,
            reward_clip: f64::INFINITY,
        }
    }
}

impl DdpgConfig {
    pub fn validate(&self) -> Result<(), DdpgError> {
        let bad = |m: &str| Err(DdpgError::InvalidConfig(m.to_string()));
        if !(self.tau > 0.0 && self.tau <= 1.0) {
            return bad("tau must be in (0, 1]");
        }
        if self.batch == 0 || self.batch > self.capacity {
            return bad("batch must be in 1..=capacity");
        }
        if !(self.actor_lr > 0.0 && self.critic_lr > 0.0) {
            return bad("learning rates must be > 0");
        }
        if !(self.theta_ou >= 0.0 && self.sigma_start >= 0.0 && self.sigma_end >= 0.0) {
            return bad("OU parameters must be >= 0");
        }
        if !(self.horizon > 0.0) {
            return bad("horizon must be > 0");
        }
        if !(self.reward_scale > 0.0 && self.reward_scale.is_finite()) {
            return bad("reward_scale must be a finite value > 0");
        }
        if !(self.reward_clip > 0.0) {
            return bad("reward_clip must be > 0");
        }
        if self.hidden.iter().any(|&h| h == 0) {
            return bad("hidden layer sizes must be > 0");
        }
        Ok(())
    }

    /// Linear decay from `sigma_start` at the first episode to `sigma_end` at
    /// the last.
    pub fn sigma_for(&self, episode: usize) -> f64 {
        if self.episodes <= 1 {
            return self.sigma_start;
        }
        let f = episode as f64 / (self.episodes - 1) as f64;
        self.sigma_start + (self.sigma_end - self.sigma_start) * f.min(1.0)
    }
}

/// Actor, critic, their targets and optimizers.
#[derive(Debug, Clone)]
pub struct Agent {
    pub layout: Layout,
    /// Action slots the actor drives, in output order.
    pub live: Vec<usize>,
    pub actor: DenseNetwork<f64>,
    pub critic: DenseNetwork<f64>,
    pub actor_target: DenseNetwork<f64>,
    pub critic_target: DenseNetwork<f64>,
    pub actor_opt: Adam<f64>,
    pub critic_opt: Adam<f64>,
    pub gamma: f64,
    pub tau: f64,
    pub batch: usize,
    pub warmup: usize,
}

impl Agent {
    pub fn new(
        layout: Layout,
        live: Vec<usize>,
        cfg: &DdpgConfig,
        gamma: f64,
        rng: &mut SplitMix64,
    ) -> Self {
        let mut actor_sizes = vec![layout.obs];
        actor_sizes.extend(&cfg.hidden);
        actor_sizes.push(live.len());
        let mut critic_sizes = vec![layout.obs + layout.act];
        critic_sizes.extend(&cfg.hidden);
        critic_sizes.push(1);
        let actor = DenseNetwork::init(
            &actor_sizes,
            Activation::Relu,
            Activation::Sigmoid,
            cfg.final_layer_scale,
            rng,
        );
        let critic_out = if cfg.critic_sigmoid_output {
            Activation::Sigmoid
        } else {
            Activation::Linear
        };
        let critic = DenseNetwork::init(&critic_sizes, Activation::Relu, critic_out, 1.0, rng);
        Self {
            layout,
            actor_opt: Adam::new(&actor, cfg.actor_lr),
            critic_opt: Adam::new(&critic, cfg.critic_lr),
            actor_target: actor.clone(),
            critic_target: critic.clone(),
            actor,
            critic,
            live,
            gamma,
            tau: cfg.tau,
            batch: cfg.batch,
            warmup: cfg.warmup,
        }
    }

    /// Agent for the environment: 6 observations, 4 slots, the failed one idle.
    pub fn for_env(fault: FaultMask, cfg: &DdpgConfig, gamma: f64, rng: &mut SplitMix64) -> Self {
        Self::new(Layout::ENV, fault.live_slots(), cfg, gamma, rng)
    }

    /// Deterministic policy plus optional noise (one component per live slot),
    /// clamped to `[0, 1]`; idle slots are 0.
    pub fn act(&self, obs: &[f64], noise: Option<&[f64]>) -> Result<Vec<f64>, NetError> {
        policy_action(&self.actor, &self.live, self.layout.act, obs, noise)
    }

    pub fn ready(&self, buffer: &ReplayBuffer) -> bool {
        buffer.len() >= self.batch.max(self.warmup)
    }

    /// One minibatch update of critic then actor, then both soft updates.
    /// Returns the critic's mean squared TD error before its step.
    pub fn train_step(
        &mut self,
        buffer: &ReplayBuffer,
        rng: &mut SplitMix64,
    ) -> Result<f64, DdpgError> {
        let need = self.batch.max(self.warmup);
        if buffer.len() < need {
            return Err(DdpgError::InsufficientData {
                have: buffer.len(),
                need,
            });
        }
        let Layout { obs: no, act: na } = self.layout;
        let n = self.batch;
        let idx = buffer.sample_indices(n, rng);
        let mut sa = Array2::<f64>::zeros((n, no + na));
        let mut next = Array2::<f64>::zeros((n, no));
        let mut reward = vec![0.0; n];
        for (row, &i) in idx.iter().enumerate() {
            let rec = buffer.slot(i);
            for j in 0..no + na {
                sa[[row, j]] = rec[j];
            }
            for j in 0..no {
                next[[row, j]] = rec[no + na + j];
            }
            reward[row] = rec[2 * no + na];
        }

        // Critic target.
        let next_act = self.actor_target.forward_batch(next.view())?;
        let mut next_sa = Array2::<f64>::zeros((n, no + na));
        next_sa.slice_mut(s![.., ..no]).assign(&next);
        for (k, &slot) in self.live.iter().enumerate() {
            next_sa.column_mut(no + slot).assign(&next_act.column(k));
        }
        let q_next = self.critic_target.forward_batch(next_sa.view())?;

        let cache = self.critic.forward_cached(sa.view())?;
        let q = cache.output();
        let mut up = Array2::<f64>::zeros((n, 1));
        let mut loss = 0.0;
        for i in 0..n {
            let y = reward[i] + self.gamma * q_next[[i, 0]];
            let d = q[[i, 0]] - y;
            loss += d * d;
            up[[i, 0]] = 2.0 * d / n as f64;
        }
        loss /= n as f64;
        let g = self.critic.backward(&cache, up.view())?;
        self.critic_opt.step(&mut self.critic, &g)?;

        // Actor: ascend mean Q(s, μ(s)).
        let states = sa.slice(s![.., ..no]);
        let actor_cache = self.actor.forward_cached(states)?;
        let mut pi_sa = Array2::<f64>::zeros((n, no + na));
        pi_sa.slice_mut(s![.., ..no]).assign(&states);
        for (k, &slot) in self.live.iter().enumerate() {
            pi_sa
                .column_mut(no + slot)
                .assign(&actor_cache.output().column(k));
        }
        let qc = self.critic.forward_cached(pi_sa.view())?;
        let up_q = Array2::from_elem((n, 1), -1.0 / n as f64);
        let gq = self.critic.backward(&qc, up_q.view())?;
        let mut up_a = Array2::<f64>::zeros((n, self.live.len()));
        for (k, &slot) in self.live.iter().enumerate() {
            up_a.column_mut(k).assign(&gq.input.column(no + slot));
        }
        let ga = self.actor.backward(&actor_cache, up_a.view())?;
        self.actor_opt.step(&mut self.actor, &ga)?;

        soft_update(&mut self.critic_target, &self.critic, self.tau)?;
        soft_update(&mut self.actor_target, &self.actor, self.tau)?;
        Ok(loss)
    }
}

fn policy_action(
    actor: &DenseNetwork<f64>,
    live: &[usize],
    slots: usize,
    obs: &[f64],
    noise: Option<&[f64]>,
) -> Result<Vec<f64>, NetError> {
    let y = actor.forward(obs)?;
    let mut a = vec![0.0; slots];
    for (k, &slot) in live.iter().enumerate() {
        let n = noise.map_or(0.0, |v| v[k]);
        a[slot] = (y[k] + n).clamp(0.0, 1.0);
    }
    Ok(a)
}

/// A frozen actor driving the environment without noise.
#[derive(Debug, Clone)]
pub struct Policy {
    pub actor: DenseNetwork<f64>,
    pub live: Vec<usize>,
}

impl Policy {
    pub fn new(actor: DenseNetwork<f64>, fault: FaultMask) -> Result<Self, DdpgError> {
        let live = fault.live_slots();
        if actor.input_dim() != OBS_DIM || actor.output_dim() != live.len() {
            return Err(DdpgError::InvalidConfig(format!(
                "actor is {}->{}, environment needs {}->{}",
                actor.input_dim(),
                actor.output_dim(),
                OBS_DIM,
                live.len()
            )));
        }
        Ok(Self { actor, live })
    }
}

impl Controller for Policy {
    fn act(&mut self, env: &Env) -> Result<Action, ControllerError> {
        let a = policy_action(&self.actor, &self.live, ACTION_DIM, &env.observation(), None)
            .map_err(|e| ControllerError::Other(e.to_string()))?;
        let mut out = [0.0; ACTION_DIM];
        out.copy_from_slice(&a);
        Ok(out)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurveRecord {
    pub episode: usize,
    pub score: f64,
    pub steps: u64,
    /// Mean over the episode's train steps; 0 before learning starts.
    pub critic_loss: f64,
    pub noise_sigma: f64,
}

pub fn write_learning_curve<W: Write>(mut w: W, curve: &[CurveRecord]) -> io::Result<()> {
    writeln!(w, "{LEARNING_CURVE_HEADER}")?;
    for c in curve {
        writeln!(
            w,
            "{},{},{},{},{}",
            c.episode, c.score, c.steps, c.critic_loss, c.noise_sigma
        )?;
    }
    Ok(())
}

#[derive(Debug, Clone)]
pub struct TrainOutput {
    pub curve: Vec<CurveRecord>,
    pub agent: Agent,
    /// Actor as it stood at the end of the highest-scoring episode.
    pub best_actor: DenseNetwork<f64>,
    pub best_episode: Option<usize>,
    pub best_score: f64,
}

/// Full training run. Streams are forked from `cfg.seed` in a fixed order:
/// network init, exploration noise, minibatch sampling, initial conditions.
pub fn train(
    params: QuadParams<f64>,
    env_cfg: &EnvConfig,
    cfg: &DdpgConfig,
) -> Result<TrainOutput, DdpgError> {
    train_with(params, env_cfg, cfg, |_| {})
}

/// [`train`] with a callback after every episode.
pub fn train_with<F: FnMut(&CurveRecord)>(
    params: QuadParams<f64>,
    env_cfg: &EnvConfig,
    cfg: &DdpgConfig,
    mut on_episode: F,
) -> Result<TrainOutput, DdpgError> {
    cfg.validate()?;
    let env_cfg = EnvConfig {
        episode_horizon: cfg.horizon,
        ..*env_cfg
    };
    env_cfg.validate()?;
    let mut master = SplitMix64::new(cfg.seed);
    let mut init_rng = master.fork();
    let mut noise_rng = master.fork();
    let mut sample_rng = master.fork();
    let mut ic_rng = master.fork();

    let fault = env_cfg.fault_mask();
    let mut agent = Agent::for_env(fault, cfg, env_cfg.gamma, &mut init_rng);
    let mut buffer = ReplayBuffer::new(cfg.capacity, Layout::ENV);
    let mut noise = OuNoise::new(agent.live.len(), cfg.theta_ou, cfg.sigma_start, 0.0, env_cfg.dt);
    let mut env = Env::new(params, env_cfg)?;

    let mut curve = Vec::with_capacity(cfg.episodes);
    let mut best_actor = agent.actor.clone();
    let mut best_episode = None;
    let mut best_score = f64::NEG_INFINITY;

    for episode in 0..cfg.episodes {
        let ic = if cfg.sample_initial_conditions {
            let table = &InitialCondition::TABLE;
            table[ic_rng.below(table.len() as u64) as usize]
        } else {
            InitialCondition::Nominal
        };
        env.reset(ic)?;
        noise.sigma = cfg.sigma_for(episode);
        noise.reset();
        let mut score = 0.0;
        let mut steps = 0u64;
        let mut loss_sum = 0.0;
        let mut loss_n = 0u64;
        loop {
            let obs = env.observation();
            let n = noise.step(&mut noise_rng).to_vec();
            let a = agent.act(&obs, Some(&n))?;
            let mut action = [0.0; ACTION_DIM];
            action.copy_from_slice(&a);
            let res = env.step(&action)?;
            buffer.push_transition(&Transition {
                obs,
                action,
                next_obs: res.obs,
                reward: (res.reward * cfg.reward_scale).clamp(-cfg.reward_clip, cfg.reward_clip),
            });
            score += res.reward;
            steps += 1;
            if agent.ready(&buffer) {
                loss_sum += agent.train_step(&buffer, &mut sample_rng)?;
                loss_n += 1;
            }
            if res.done {
                break;
            }
        }
        let rec = CurveRecord {
            episode,
            score,
            steps,
            critic_loss: if loss_n > 0 {
                loss_sum / loss_n as f64
            } else {
                0.0
            },
            noise_sigma: noise.sigma,
        };
        if score > best_score {
            best_score = score;
            best_episode = Some(episode);
            best_actor = agent.actor.clone();
        }
        on_episode(&rec);
        curve.push(rec);
    }
    Ok(TrainOutput {
        curve,
        agent,
        best_actor,
        best_episode,
        best_score,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ring_keeps_last_capacity_records() {
        let layout = Layout { obs: 1, act: 1 };
        let mut b = ReplayBuffer::new(5, layout);
        for k in 0..13 {
            b.push(&[k as f64, 0.0, 0.0, 0.0]);
        }
        assert_eq!(b.len(), 5);
        let firsts: Vec<f64> = b.iter_ordered().map(|r| r[0]).collect();
        assert_eq!(firsts, vec![8.0, 9.0, 10.0, 11.0, 12.0]);
    }

    #[test]
    fn sampling_stays_in_filled_region() {
        let mut b = ReplayBuffer::new(100, Layout::ENV);
        for _ in 0..7 {
            b.push(&[1.0; TRANSITION_LEN]);
        }
        let mut rng = SplitMix64::new(2);
        assert!(b.sample_indices(1000, &mut rng).iter().all(|&i| i < 7));
        let ts = b.sample_transitions(3, &mut rng).unwrap();
        assert_eq!(ts[0].to_array().len(), 17);
    }

    #[test]
    fn ou_noise_free_decay() {
        let mut ou = OuNoise::new(1, 0.15, 0.0, 0.0, 0.01);
        ou.x[0] = 1.0;
        let mut rng = SplitMix64::new(0);
        ou.step(&mut rng);
        assert!((ou.x[0] - (1.0 - 0.0015)).abs() < 1e-15);
        let mut still = OuNoise::new(2, 0.0, 0.0, 0.0, 0.01);
        still.x = vec![0.3, -0.2];
        for _ in 0..100 {
            still.step(&mut rng);
        }
        assert_eq!(still.x, vec![0.3, -0.2]);
    }

    #[test]
    fn act_contract() {
        let cfg = DdpgConfig {
            hidden: vec![8],
            ..DdpgConfig::default()
        };
        let mut rng = SplitMix64::new(1);
        let mut agent = Agent::for_env(FaultMask::rotor(4).unwrap(), &cfg, 0.99, &mut rng);
        for l in agent.actor.layers_mut() {
            l.weights.fill(0.0);
            l.bias.fill(0.0);
        }
        let a = agent.act(&[0.5; 6], None).unwrap();
        assert_eq!(a, vec![0.5, 0.5, 0.5, 0.0]);
        let a = agent.act(&[0.5; 6], Some(&[0.7, -0.9, 0.1])).unwrap();
        assert_eq!(a, vec![1.0, 0.0, 0.6, 0.0]);

        let mut rng = SplitMix64::new(8);
        let agent = Agent::for_env(FaultMask::rotor(2).unwrap(), &cfg, 0.99, &mut rng);
        for _ in 0..20 {
            let obs: Vec<f64> = (0..6).map(|_| rng.uniform()).collect();
            assert_eq!(agent.act(&obs, Some(&[5.0, 5.0, 5.0])).unwrap()[1], 0.0);
        }
    }

    #[test]
    fn train_step_needs_data() {
        let cfg = DdpgConfig::default();
        let mut rng = SplitMix64::new(1);
        let mut agent = Agent::for_env(FaultMask::rotor(4).unwrap(), &cfg, 0.99, &mut rng);
        let b = ReplayBuffer::new(10, Layout::ENV);
        assert!(matches!(
            agent.train_step(&b, &mut rng),
            Err(DdpgError::InsufficientData { need: 1000, .. })
        ));
    }

    #[test]
    fn tau_one_copies_online_into_targets() {
        let cfg = DdpgConfig {
            tau: 1.0,
            batch: 4,
            warmup: 4,
            hidden: vec![8],
            ..DdpgConfig::default()
        };
        let mut rng = SplitMix64::new(4);
        let mut agent = Agent::for_env(FaultMask::rotor(4).unwrap(), &cfg, 0.99, &mut rng);
        let mut b = ReplayBuffer::new(16, Layout::ENV);
        for _ in 0..8 {
            let rec: Vec<f64> = (0..TRANSITION_LEN).map(|_| rng.uniform()).collect();
            b.push(&rec);
        }
        agent.train_step(&b, &mut rng).unwrap();
        assert_eq!(agent.actor_target, agent.actor);
        assert_eq!(agent.critic_target, agent.critic);
    }

    #[test]
    fn zero_episodes_empty_curve() {
        let cfg = DdpgConfig {
            episodes: 0,
            ..DdpgConfig::default()
        };
        let out = train(QuadParams::default(), &EnvConfig::default(), &cfg).unwrap();
        assert!(out.curve.is_empty());
        assert!(out.best_episode.is_none());
    }

    #[test]
    fn sigma_schedule_endpoints() {
        let cfg = DdpgConfig {
            episodes: 11,
            ..DdpgConfig::default()
        };
        assert_eq!(cfg.sigma_for(0), 0.2);
        assert!((cfg.sigma_for(10) - 0.02).abs() < 1e-15);
        assert!((cfg.sigma_for(5) - 0.11).abs() < 1e-15);
    }

    #[test]
    fn config_validation() {
        let ok = DdpgConfig::default();
        assert!(ok.validate().is_ok());
        assert!(DdpgConfig { tau: 0.0, ..ok.clone() }.validate().is_err());
        assert!(DdpgConfig {
            batch: 200_000,
            ..ok.clone()
        }
        .validate()
        .is_err());
    }

    #[test]
    fn curve_csv_header() {
        let mut out = Vec::new();
        write_learning_curve(
            &mut out,
            &[CurveRecord {
                episode: 0,
                score: -1.5,
                steps: 3,
                critic_loss: 0.0,
                noise_sigma: 0.2,
            }],
        )
        .unwrap();
        assert_eq!(
            String::from_utf8(out).unwrap(),
            "episode,score,steps,critic_loss,noise_sigma\n0,-1.5,3,0,0.2\n"
        );
    }
}
