//! Rotor thrust model and its aggregation into body force and moments.
//!
//! Rotor layout: 1 and 2 spin clockwise, 3 and 4 counter-clockwise. In the
//! 45° transformed axes rotor 1 sits front-right, 2 back-left, 3 front-left
//! and 4 back-right.

use crate::dynamics::{BodyForcesMoments, QuadParams, QuadState};
use crate::scalar::Real;
use thiserror::Error;

pub const ROTORS: usize = 4;

/// Commanded rotor angular speeds, rad/s.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ControlInput<T> {
    pub omega: [T; ROTORS],
}

impl<T: Real> ControlInput<T> {
    pub fn new(omega: [T; ROTORS]) -> Self {
        Self { omega }
    }

    pub fn uniform(omega: T) -> Self {
        Self {
            omega: [omega; ROTORS],
        }
    }

    /// Maps normalized commands in `[0, 1]` linearly onto `[0, omega_max]`.
    /// Out-of-range commands are clamped.
    pub fn from_normalized(action: &[T; ROTORS], omega_max: T) -> Self {
        Self {
            omega: action.map(|a| a.max(T::zero()).min(T::one()) * omega_max),
        }
    }

    pub fn is_admissible(&self, omega_max: T) -> bool {
        self.omega
            .iter()
            .all(|w| w.is_finite() && *w >= T::zero() && *w <= omega_max)
    }
}

/// Which rotor, if any, has lost its propeller.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct FaultMask {
    failed: Option<usize>,
}

impl FaultMask {
    pub const NONE: FaultMask = FaultMask { failed: None };

    /// `rotor` is 1-based, matching the airframe numbering.
    pub fn rotor(rotor: usize) -> Result<Self, PropulsionError> {
        if (1..=ROTORS).contains(&rotor) {
            Ok(Self {
                failed: Some(rotor),
            })
        } else {
            Err(PropulsionError::BadRotorIndex(rotor))
        }
    }

    pub fn failed(&self) -> Option<usize> {
        self.failed
    }

    /// Zero-based slot of the failed rotor.
    pub fn failed_slot(&self) -> Option<usize> {
        self.failed.map(|r| r - 1)
    }

    pub fn is_live(&self, slot: usize) -> bool {
        self.failed_slot() != Some(slot)
    }

    pub fn live_slots(&self) -> Vec<usize> {
        (0..ROTORS).filter(|&i| self.is_live(i)).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum AxesMode {
    Standard,
    #[default]
    Transformed,
}

impl std::str::FromStr for AxesMode {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "standard" => Ok(Self::Standard),
            "transformed" => Ok(Self::Transformed),
            other => Err(format!("unknown axes mode `{other}`")),
        }
    }
}

impl std::fmt::Display for AxesMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::Standard => "standard",
            Self::Transformed => "transformed",
        })
    }
}

/// Rotor and moment-arm options that are not airframe constants.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PropulsionModel {
    pub axes: AxesMode,
    pub fault: FaultMask,
    /// Use `(F1+F2+F3+F4)·c` for the yawing moment instead of the
    /// spin-signed sum.
    pub yaw_moment_literal: bool,
    /// Use `U² + V²` in the translational thrust term instead of `(U + V)²`.
    pub thrust_translation_sum_of_squares: bool,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PropulsionError {
    #[error("rotor index {0} outside 1..=4")]
    BadRotorIndex(usize),
    #[error("hover thrust {required} N per rotor exceeds the {available} N available at omega_max")]
    Unachievable { required: f64, available: f64 },
}

/// `ρ·a·b·c·R / 4`, the blade-element prefactor.
fn blade_prefactor<T: Real>(p: &QuadParams<T>) -> T {
    p.rho * p.a_lift * p.n_blades * p.chord * p.r_rotor / T::lit(4.0)
}

/// Coefficient `k` such that static thrust is `k·Ω²`.
pub fn hover_thrust_coefficient<T: Real>(p: &QuadParams<T>) -> T {
    blade_prefactor(p)
        * T::lit(2.0 / 3.0)
        * p.r_rotor
        * p.r_rotor
        * (p.theta0 + T::lit(0.75) * p.theta1)
}

/// Thrust of a single rotor, clamped at zero from below.
pub fn rotor_thrust<T: Real>(
    omega: T,
    state: &QuadState<T>,
    params: &QuadParams<T>,
    sum_of_squares: bool,
) -> T {
    let tip = omega * params.r_rotor;
    let translation = if sum_of_squares {
        state.u * state.u + state.v * state.v
    } else {
        (state.u + state.v) * (state.u + state.v)
    };
    let bracket = state.w * tip
        + T::lit(2.0 / 3.0) * tip * tip * (params.theta0 + T::lit(0.75) * params.theta1)
        + translation * (params.theta0 + T::lit(0.5) * params.theta1);
    (blade_prefactor(params) * bracket).max(T::zero())
}

pub fn total_thrust<T: Real>(forces: &[T; ROTORS]) -> T {
    forces.iter().copied().sum()
}

/// Per-rotor thrusts after the fault mask is applied.
pub fn rotor_forces<T: Real>(
    control: &ControlInput<T>,
    state: &QuadState<T>,
    model: &PropulsionModel,
    params: &QuadParams<T>,
) -> [T; ROTORS] {
    let mut f = control
        .omega
        .map(|w| rotor_thrust(w, state, params, model.thrust_translation_sum_of_squares));
    if let Some(slot) = model.fault.failed_slot() {
        f[slot] = T::zero();
    }
    f
}

/// Body z-force and moments from already-masked rotor thrusts.
pub fn moments_from_thrusts<T: Real>(
    f: &[T; ROTORS],
    model: &PropulsionModel,
    params: &QuadParams<T>,
) -> BodyForcesMoments<T> {
    let [f1, f2, f3, f4] = *f;
    let (l_moment, m_moment) = match model.axes {
        AxesMode::Standard => ((f2 - f1) * params.ld, (f3 - f4) * params.ld),
        AxesMode::Transformed => (
            (f2 + f3) * params.ly - (f1 + f4) * params.ly,
            (f1 + f3) * params.lx - (f2 + f4) * params.lx,
        ),
    };
    let n_moment = if model.yaw_moment_literal {
        (f1 + f2 + f3 + f4) * params.c_torque
    } else {
        // the airframe yaws with the clockwise pair
        (f1 + f2 - f3 - f4) * params.c_torque
    };
    BodyForcesMoments {
        fz: -total_thrust(f),
        l_moment,
        m_moment,
        n_moment,
    }
}

pub fn forces_moments<T: Real>(
    control: &ControlInput<T>,
    state: &QuadState<T>,
    model: &PropulsionModel,
    params: &QuadParams<T>,
) -> BodyForcesMoments<T> {
    let f = rotor_forces(control, state, model, params);
    moments_from_thrusts(&f, model, params)
}

/// Hover speed and per-rotor thrust for an intact airframe at rest.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Trim<T> {
    pub omega: T,
    pub thrust: T,
}

pub fn solve_trim<T: Real>(params: &QuadParams<T>) -> Result<Trim<T>, PropulsionError> {
    let thrust = params.mass * params.g / T::lit(4.0);
    let k = hover_thrust_coefficient(params);
    let at_rest = QuadState::zeros();
    let available = rotor_thrust(params.omega_max, &at_rest, params, false);
    if !(k > T::zero()) || thrust > available {
        return Err(PropulsionError::Unachievable {
            required: thrust.to_f64_lossy(),
            available: available.to_f64_lossy(),
        });
    }
    Ok(Trim {
        omega: (thrust / k).sqrt(),
        thrust,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn params() -> QuadParams<f64> {
        QuadParams::default()
    }

    fn model(axes: AxesMode, failed: Option<usize>) -> PropulsionModel {
        PropulsionModel {
            axes,
            fault: failed.map_or(FaultMask::NONE, |r| FaultMask::rotor(r).unwrap()),
            ..Default::default()
        }
    }

    #[test]
    fn zero_speed_at_rest_gives_no_thrust() {
        assert_eq!(rotor_thrust(0.0, &QuadState::zeros(), &params(), false), 0.0);
    }

    #[test]
    fn static_thrust_matches_hand_evaluation() {
        // 1.225 * 5.7 * 2 * 0.02 * 0.12 / 4 = 0.008379
        // 0.008379 * (2/3) * (400 * 0.12)^2 * (0.20 - 0.0375)
        let expected = 0.008379 * (2.0 / 3.0) * 48.0 * 48.0 * 0.1625;
        let f = rotor_thrust(400.0, &QuadState::zeros(), &params(), false);
        assert_relative_eq!(f, expected, max_relative = 1e-12);
    }

    #[test]
    fn static_thrust_is_monotone_in_speed() {
        let s = QuadState::zeros();
        let p = params();
        let f = |w| rotor_thrust(w, &s, &p, false);
        assert!(f(300.0) < f(400.0) && f(400.0) < f(500.0));
    }

    #[test]
    fn translational_term_variants() {
        let p = params();
        let s = QuadState {
            u: 3.0,
            v: -3.0,
            ..QuadState::zeros()
        };
        // (U+V)^2 vanishes, U^2+V^2 does not
        assert_eq!(rotor_thrust(0.0, &s, &p, false), 0.0);
        let k = 1.225 * 5.7 * 2.0 * 0.02 * 0.12 / 4.0;
        assert_relative_eq!(
            rotor_thrust(0.0, &s, &p, true),
            k * 18.0 * (0.20 - 0.025),
            max_relative = 1e-12
        );
    }

    #[test]
    fn fast_climb_clamps_at_zero() {
        let s = QuadState {
            w: -200.0,
            ..QuadState::zeros()
        };
        assert_eq!(rotor_thrust(300.0, &s, &params(), false), 0.0);
    }

    #[test]
    fn total_thrust_sums() {
        assert_eq!(total_thrust(&[1.0, 1.0, 1.0, 1.0]), 4.0);
        assert_eq!(total_thrust(&[0.0; 4]), 0.0);
        assert_relative_eq!(total_thrust(&[3.68, 3.68, 3.68, 0.0]), 11.04, epsilon = 1e-12);
    }

    #[test]
    fn equal_thrust_transformed_is_moment_free() {
        let fm = moments_from_thrusts(&[2.0; 4], &model(AxesMode::Transformed, None), &params());
        assert_eq!(fm.fz, -8.0);
        assert_eq!((fm.l_moment, fm.m_moment, fm.n_moment), (0.0, 0.0, 0.0));
    }

    #[test]
    fn standard_axes_cannot_pitch_down_without_rotor_four() {
        let p = params();
        let m = model(AxesMode::Standard, Some(4));
        let control = ControlInput::new([900.0, 100.0, 0.0, 900.0]);
        let fm = forces_moments(&control, &QuadState::zeros(), &m, &p);
        assert!(fm.m_moment >= 0.0);
    }

    #[test]
    fn transformed_axes_pitch_down_with_rotor_four_failed() {
        let p = params();
        let fm = moments_from_thrusts(&[1.0, 4.0, 1.0, 0.0], &model(AxesMode::Transformed, Some(4)), &p);
        assert_relative_eq!(fm.m_moment, -2.0 * p.lx, max_relative = 1e-15);
    }

    #[test]
    fn masked_rotor_ignores_command() {
        let p = params();
        let m = model(AxesMode::Transformed, Some(4));
        let s = QuadState {
            u: 1.0,
            w: 0.5,
            ..QuadState::zeros()
        };
        let a = forces_moments(&ControlInput::new([500.0, 500.0, 500.0, 0.0]), &s, &m, &p);
        let b = forces_moments(&ControlInput::new([500.0, 500.0, 500.0, 965.0]), &s, &m, &p);
        assert_eq!(a, b);
    }

    #[test]
    fn literal_yaw_moment_never_cancels() {
        let p = params();
        let m = PropulsionModel {
            yaw_moment_literal: true,
            ..model(AxesMode::Transformed, None)
        };
        let fm = moments_from_thrusts(&[2.0; 4], &m, &p);
        assert_relative_eq!(fm.n_moment, 8.0 * p.c_torque);
    }

    #[test]
    fn trim_defaults() {
        let p = params();
        let trim = solve_trim(&p).unwrap();
        assert_relative_eq!(trim.thrust, 3.67875, max_relative = 1e-15);
        let back = rotor_thrust(trim.omega, &QuadState::zeros(), &p, false);
        assert_relative_eq!(back, trim.thrust, max_relative = 1e-9);
        // trim sits near 55% of the speed range
        assert!((trim.omega / p.omega_max - 0.55).abs() < 0.005);
    }

    #[test]
    fn trim_scales_with_sqrt_mass() {
        let p = params();
        let heavy = QuadParams {
            mass: 2.0 * p.mass,
            ..p
        };
        let a = solve_trim(&p).unwrap().omega;
        let b = solve_trim(&heavy).unwrap().omega;
        assert!((b / a - 2f64.sqrt()).abs() < 1e-9);
    }

    #[test]
    fn trim_unachievable_when_too_heavy() {
        let p = QuadParams {
            mass: 100.0,
            ..params()
        };
        assert!(matches!(
            solve_trim(&p),
            Err(PropulsionError::Unachievable { .. })
        ));
    }

    #[test]
    fn fault_mask_indices() {
        assert!(FaultMask::rotor(0).is_err());
        assert!(FaultMask::rotor(5).is_err());
        let m = FaultMask::rotor(4).unwrap();
        assert_eq!(m.failed_slot(), Some(3));
        assert_eq!(m.live_slots(), vec![0, 1, 2]);
        assert_eq!(FaultMask::NONE.live_slots().len(), 4);
    }
}
