//! Quadcopter flight dynamics with single-rotor fault injection, and two hover
//! controllers for the three-rotor airframe: a one-step-lookahead dynamic
//! programming agent with yaw-rate-triggered reward switching, and a DDPG
//! actor-critic agent trained from scratch.

pub mod config;
pub mod ddpg;
pub mod dp;
pub mod dynamics;
pub mod env;
pub mod harness;
pub mod neural;
pub mod episode;
pub mod propulsion;
pub mod rng;
pub mod scalar;

pub use dynamics::{BodyForcesMoments, Plant, QuadParams, QuadState, StateDerivative};
pub use env::{Env, EnvConfig, InitialCondition, RateFrame, RewardMode};
pub use propulsion::{AxesMode, ControlInput, FaultMask, PropulsionModel};
pub use neural::{Activation, DenseNetwork};
pub use scalar::Real;

pub type QuadStateF64 = QuadState<f64>;
pub type QuadStateF32 = QuadState<f32>;
pub type QuadParamsF64 = QuadParams<f64>;
pub type QuadParamsF32 = QuadParams<f32>;
pub type PlantF64 = Plant<f64>;
pub type PlantF32 = Plant<f32>;
pub type DenseNetworkF64 = DenseNetwork<f64>;
pub type DenseNetworkF32 = DenseNetwork<f32>;
