//! Properties of the two controllers that need a running environment.

use proptest::prelude::*;
use quadftc::ddpg::{train, Agent, DdpgConfig, Layout, ReplayBuffer};
use quadftc::dp::{self, score_all, DpAgent, DpConfig};
use quadftc::dynamics::{Plant, QuadParams, QuadState};
use quadftc::env::{compute_reward, level_frame_rates, EnvConfig, InitialCondition, RewardMode};
use quadftc::rng::SplitMix64;

fn spinning_state() -> impl Strategy<Value = QuadState<f64>> {
    (
        prop::array::uniform3(-3.0f64..3.0),
        -8.0f64..8.0,
        -20.0f64..20.0,
        prop::array::uniform2(-0.4f64..0.4),
        -2.0f64..2.0,
    )
        .prop_map(|(vel, pq, r, att, dz)| QuadState {
            u: vel[0],
            v: vel[1],
            w: vel[2],
            p: pq,
            q: -pq / 2.0,
            r,
            phi: att[0],
            theta: att[1],
            zn: -100.0 + dz,
            ..QuadState::zeros()
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    /// The greedy choice scores at least as well as every grid action.
    #[test]
    fn greedy_dominates_grid(s in spinning_state(), yaw in any::<bool>()) {
        let env = EnvConfig::default();
        let agent = DpAgent::new(DpConfig::default(), &env).unwrap();
        let plant = Plant::new(QuadParams::default(), env.propulsion());
        let mode = if yaw { RewardMode::YawArrest } else { RewardMode::AltitudeTracking };
        let choice = dp::greedy_action(&s, mode, &agent.grid, &plant, &env, &agent.config).unwrap();
        for score in score_all(&s, mode, &agent.grid, &plant, &env, &agent.config).into_iter().flatten() {
            prop_assert!(choice.score >= score);
        }
    }

    /// Rewards are never positive.
    #[test]
    fn reward_is_a_cost(s in spinning_state(), yaw in any::<bool>(), level in any::<bool>()) {
        let mut env = EnvConfig::default();
        if level {
            env.rate_frame = quadftc::RateFrame::Level;
        }
        let mode = if yaw { RewardMode::YawArrest } else { RewardMode::AltitudeTracking };
        prop_assert!(compute_reward(&s, mode, &env) <= 0.0);
    }

    /// A pure spin about the vertical has no horizontal component in the
    /// level frame, whatever the body attitude.
    #[test]
    fn vertical_spin_is_level(phi in -0.6f64..0.6, theta in -0.6f64..0.6, wz in -30.0f64..30.0) {
        let (sp, cp) = phi.sin_cos();
        let (st, ct) = theta.sin_cos();
        // inertial (0, 0, wz) expressed in body axes
        let s = QuadState {
            p: -st * wz,
            q: sp * ct * wz,
            r: cp * ct * wz,
            phi,
            theta,
            ..QuadState::at_altitude(100.0)
        };
        let (x, y) = level_frame_rates(&s);
        prop_assert!(x.abs() < 1e-12 && y.abs() < 1e-12);
    }
}

#[test]
fn level_frame_matches_body_when_level() {
    let s = QuadState {
        p: 0.3,
        q: -0.7,
        r: 5.0,
        ..QuadState::at_altitude(100.0)
    };
    assert_eq!(level_frame_rates(&s), (0.3, -0.7));
}

#[test]
fn dp_episode_is_deterministic() {
    let env = EnvConfig::default();
    let dp_cfg = DpConfig::default();
    let run = || dp::run_episode(InitialCondition::Ic4, QuadParams::default(), &env, &dp_cfg, 2.0).unwrap();
    let (a, b) = (run(), run());
    assert_eq!(a.actions, b.actions);
    assert_eq!(a.summary, b.summary);
}

#[test]
fn arrest_pulse_for_fast_spin() {
    let env = EnvConfig::default();
    let agent = DpAgent::new(DpConfig::default(), &env).unwrap();
    let plant = Plant::new(QuadParams::default(), env.propulsion());
    let s = QuadState {
        r: 12.0,
        ..QuadState::at_altitude(100.0)
    };
    let c = dp::greedy_action(&s, RewardMode::YawArrest, &agent.grid, &plant, &env, &agent.config).unwrap();
    assert_eq!(c.action, [0.0, 0.0, 1.0, 0.0]);
}

fn bandit_agent(seed: u64) -> (Agent, ReplayBuffer, SplitMix64) {
    let cfg = DdpgConfig {
        batch: 32,
        warmup: 32,
        actor_lr: 1e-3,
        critic_lr: 1e-3,
        hidden: vec![16],
        ..DdpgConfig::default()
    };
    let layout = Layout { obs: 1, act: 1 };
    let mut rng = SplitMix64::new(seed);
    let agent = Agent::new(layout, vec![0], &cfg, 0.0, &mut rng);
    let mut buffer = ReplayBuffer::new(1000, layout);
    for _ in 0..500 {
        let a = rng.uniform();
        buffer.push(&[0.5, a, 0.5, -(a - 0.7) * (a - 0.7)]);
    }
    (agent, buffer, rng)
}

#[test]
fn critic_loss_falls_on_a_fixed_buffer() {
    let (mut agent, buffer, mut rng) = bandit_agent(1);
    let mean = |xs: &[f64]| xs.iter().sum::<f64>() / xs.len() as f64;
    let losses: Vec<f64> = (0..600)
        .map(|_| agent.train_step(&buffer, &mut rng).unwrap())
        .collect();
    assert!(mean(&losses[500..]) < 0.1 * mean(&losses[..20]));
}

#[test]
fn actor_step_follows_critic_gradient() {
    let (mut agent, buffer, mut rng) = bandit_agent(2);
    // fit the critic first with the actor frozen at a zero learning rate
    let lr = agent.actor_opt.lr;
    agent.actor_opt.lr = 0.0;
    for _ in 0..800 {
        agent.train_step(&buffer, &mut rng).unwrap();
    }
    agent.actor_opt.lr = lr;
    let a0 = agent.act(&[0.5], None).unwrap()[0];
    let h = 1e-5;
    let q = |a: f64| agent.critic.forward(&[0.5, a]).unwrap()[0];
    let slope = (q(a0 + h) - q(a0 - h)) / (2.0 * h);
    agent.train_step(&buffer, &mut rng).unwrap();
    let a1 = agent.act(&[0.5], None).unwrap()[0];
    assert!(slope.abs() > 1e-6);
    assert_eq!((a1 - a0).signum(), slope.signum(), "a0 {a0} a1 {a1} slope {slope}");
}

#[test]
fn training_is_seed_deterministic() {
    let cfg = DdpgConfig {
        episodes: 3,
        warmup: 100,
        horizon: 1.0,
        hidden: vec![8, 8],
        seed: 4,
        ..DdpgConfig::default()
    };
    let env = EnvConfig::default();
    let a = train(QuadParams::default(), &env, &cfg).unwrap();
    let b = train(QuadParams::default(), &env, &cfg).unwrap();
    assert_eq!(a.curve, b.curve);
    assert_eq!(a.agent.actor.params(), b.agent.actor.params());
    let c = train(QuadParams::default(), &env, &DdpgConfig { seed: 5, ..cfg }).unwrap();
    assert_ne!(a.agent.actor.params(), c.agent.actor.params());
}

#[test]
fn exact_critic_is_left_alone() {
    let (mut agent, _, mut rng) = bandit_agent(3);
    let last = agent.critic.layers_mut().last_mut().unwrap();
    last.weights.fill(0.0);
    last.bias.fill(1.0);
    agent.critic_target = agent.critic.clone();
    let mut buffer = ReplayBuffer::new(100, agent.layout);
    for _ in 0..100 {
        buffer.push(&[rng.uniform(), rng.uniform(), rng.uniform(), 1.0]);
    }
    let before = agent.critic.params();
    let loss = agent.train_step(&buffer, &mut rng).unwrap();
    assert_eq!(loss, 0.0);
    assert_eq!(agent.critic.params(), before);
}
