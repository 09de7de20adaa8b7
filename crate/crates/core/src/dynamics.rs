//! Rigid-body six degree of freedom equations of motion.
//!
//! Body axes follow the aircraft convention (x forward, y right, z down) and the
//! inertial frame is north-east-down, so altitude above ground is `-zn`.
//! Aerodynamic forces are neglected; the only external forces are gravity and
//! the rotor thrust acting along body `-z`.

use crate::propulsion::{forces_moments, ControlInput, PropulsionModel};
use crate::scalar::Real;
use thiserror::Error;

/// Smallest admissible `|cos(theta)|` before the Euler kinematics are refused.
pub const GIMBAL_COS_LIMIT: f64 = 1e-6;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DynamicsError {
    #[error("gimbal lock: |cos(theta)| < 1e-6 at theta = {theta}")]
    GimbalLock { theta: f64 },
    #[error("non-finite value in state or forces")]
    NonFiniteInput,
}

#[derive(Debug, Error, Clone, PartialEq)]
#[error("invalid parameter `{name}`: {reason}")]
pub struct ParamError {
    pub name: &'static str,
    pub reason: &'static str,
}

/// The twelve-component rigid-body state.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct QuadState<T> {
    /// Body-axis translational velocities, m/s.
    pub u: T,
    pub v: T,
    pub w: T,
    /// Body-axis angular rates, rad/s.
    pub p: T,
    pub q: T,
    pub r: T,
    /// Roll, pitch and yaw, rad. Never wrapped.
    pub phi: T,
    pub theta: T,
    pub psi: T,
    /// Inertial position, m (north, east, down).
    pub xn: T,
    pub yn: T,
    pub zn: T,
}

pub const STATE_DIM: usize = 12;

/// Field names in storage order; also the CSV column names.
pub const STATE_NAMES: [&str; STATE_DIM] = [
    "u", "v", "w", "p", "q", "r", "phi", "theta", "psi", "xn", "yn", "zn",
];

impl<T: Real> QuadState<T> {
    pub fn zeros() -> Self {
        Self::from_array([T::zero(); STATE_DIM])
    }

    /// At rest, level, at the given altitude above ground.
    pub fn at_altitude(altitude: T) -> Self {
        Self {
            zn: -altitude,
            ..Self::zeros()
        }
    }

    pub fn altitude(&self) -> T {
        -self.zn
    }

    pub fn to_array(&self) -> [T; STATE_DIM] {
        [
            self.u, self.v, self.w, self.p, self.q, self.r, self.phi, self.theta, self.psi,
            self.xn, self.yn, self.zn,
        ]
    }

    pub fn from_array(a: [T; STATE_DIM]) -> Self {
        Self {
            u: a[0],
            v: a[1],
            w: a[2],
            p: a[3],
            q: a[4],
            r: a[5],
            phi: a[6],
            theta: a[7],
            psi: a[8],
            xn: a[9],
            yn: a[10],
            zn: a[11],
        }
    }

    pub fn is_finite(&self) -> bool {
        self.to_array().iter().all(|x| x.is_finite())
    }

    /// Checks the finiteness and pitch-range invariants.
    pub fn validate(&self) -> Result<(), DynamicsError> {
        if !self.is_finite() {
            return Err(DynamicsError::NonFiniteInput);
        }
        if self.theta.cos().abs() < T::lit(GIMBAL_COS_LIMIT) {
            return Err(DynamicsError::GimbalLock {
                theta: self.theta.to_f64_lossy(),
            });
        }
        Ok(())
    }

    pub fn cast<U: Real>(&self) -> QuadState<U> {
        QuadState::from_array(self.to_array().map(|x| U::lit(x.to_f64_lossy())))
    }
}

/// Time derivatives of each [`QuadState`] component, in storage order.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StateDerivative<T>(pub [T; STATE_DIM]);

impl<T: Real> StateDerivative<T> {
    pub fn u_dot(&self) -> T {
        self.0[0]
    }
    pub fn v_dot(&self) -> T {
        self.0[1]
    }
    pub fn w_dot(&self) -> T {
        self.0[2]
    }
    pub fn p_dot(&self) -> T {
        self.0[3]
    }
    pub fn q_dot(&self) -> T {
        self.0[4]
    }
    pub fn r_dot(&self) -> T {
        self.0[5]
    }
    pub fn phi_dot(&self) -> T {
        self.0[6]
    }
    pub fn theta_dot(&self) -> T {
        self.0[7]
    }
    pub fn psi_dot(&self) -> T {
        self.0[8]
    }
    pub fn xn_dot(&self) -> T {
        self.0[9]
    }
    pub fn yn_dot(&self) -> T {
        self.0[10]
    }
    pub fn zn_dot(&self) -> T {
        self.0[11]
    }

    pub fn max_abs(&self) -> T {
        self.0.iter().fold(T::zero(), |m, x| m.max(x.abs()))
    }
}

/// Total body z-force and body-axis moments.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct BodyForcesMoments<T> {
    /// N, positive down the body z axis (thrust is negative).
    pub fz: T,
    /// Rolling moment, N·m.
    pub l_moment: T,
    /// Pitching moment, N·m.
    pub m_moment: T,
    /// Yawing moment, N·m.
    pub n_moment: T,
}

impl<T: Real> BodyForcesMoments<T> {
    fn is_finite(&self) -> bool {
        self.fz.is_finite()
            && self.l_moment.is_finite()
            && self.m_moment.is_finite()
            && self.n_moment.is_finite()
    }
}

/// Mass, inertia, geometry and blade constants of the airframe.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadParams<T> {
    pub mass: T,
    pub g: T,
    pub jx: T,
    pub jy: T,
    pub jz: T,
    pub jxz: T,
    /// Moment arms about the 45° transformed axes, m.
    pub lx: T,
    pub ly: T,
    /// Moment arm about the standard axes, m.
    pub ld: T,
    /// Thrust-to-yaw-moment coefficient, m.
    pub c_torque: T,
    pub rho: T,
    pub a_lift: T,
    pub n_blades: T,
    pub chord: T,
    pub r_rotor: T,
    pub theta0: T,
    pub theta1: T,
    pub omega_max: T,
}

impl<T: Real> Default for QuadParams<T> {
    fn default() -> Self {
        let ld = 0.25;
        let arm = ld / std::f64::consts::SQRT_2;
        Self {
            mass: T::lit(1.5),
            g: T::lit(9.81),
            jx: T::lit(0.025),
            jy: T::lit(0.025),
            jz: T::lit(0.045),
            jxz: T::zero(),
            lx: T::lit(arm),
            ly: T::lit(arm),
            ld: T::lit(ld),
            c_torque: T::lit(0.05),
            rho: T::lit(1.225),
            a_lift: T::lit(5.7),
            n_blades: T::lit(2.0),
            chord: T::lit(0.02),
            r_rotor: T::lit(0.12),
            theta0: T::lit(0.20),
            theta1: T::lit(-0.05),
            // trim speed is ~530.5 rad/s with these constants
            omega_max: T::lit(965.0),
        }
    }
}

impl<T: Real> QuadParams<T> {
    pub fn validate(&self) -> Result<(), ParamError> {
        let positive: [(&'static str, T); 13] = [
            ("mass", self.mass),
            ("jx", self.jx),
            ("jy", self.jy),
            ("jz", self.jz),
            ("lx", self.lx),
            ("ly", self.ly),
            ("ld", self.ld),
            ("c_torque", self.c_torque),
            ("rho", self.rho),
            ("a_lift", self.a_lift),
            ("chord", self.chord),
            ("r_rotor", self.r_rotor),
            ("omega_max", self.omega_max),
        ];
        for (name, value) in positive {
            if !(value.is_finite() && value > T::zero()) {
                return Err(ParamError {
                    name,
                    reason: "must be finite and > 0",
                });
            }
        }
        let others = [
            ("g", self.g),
            ("jxz", self.jxz),
            ("n_blades", self.n_blades),
            ("theta0", self.theta0),
            ("theta1", self.theta1),
        ];
        for (name, value) in others {
            if !value.is_finite() {
                return Err(ParamError {
                    name,
                    reason: "must be finite",
                });
            }
        }
        if self.jxz * self.jxz >= self.jx * self.jz {
            return Err(ParamError {
                name: "jxz",
                reason: "inertia must be positive definite (jxz^2 < jx*jz)",
            });
        }
        Ok(())
    }

    pub fn cast<U: Real>(&self) -> QuadParams<U> {
        let c = |x: T| U::lit(x.to_f64_lossy());
        QuadParams {
            mass: c(self.mass),
            g: c(self.g),
            jx: c(self.jx),
            jy: c(self.jy),
            jz: c(self.jz),
            jxz: c(self.jxz),
            lx: c(self.lx),
            ly: c(self.ly),
            ld: c(self.ld),
            c_torque: c(self.c_torque),
            rho: c(self.rho),
            a_lift: c(self.a_lift),
            n_blades: c(self.n_blades),
            chord: c(self.chord),
            r_rotor: c(self.r_rotor),
            theta0: c(self.theta0),
            theta1: c(self.theta1),
            omega_max: c(self.omega_max),
        }
    }
}

/// Evaluates the force, kinematic, navigation and moment equations.
pub fn state_derivative<T: Real>(
    s: &QuadState<T>,
    fm: &BodyForcesMoments<T>,
    params: &QuadParams<T>,
) -> Result<StateDerivative<T>, DynamicsError> {
    s.validate()?;
    if !fm.is_finite() {
        return Err(DynamicsError::NonFiniteInput);
    }
    let QuadParams {
        mass,
        g,
        jx,
        jy,
        jz,
        jxz,
        ..
    } = *params;
    let (sphi, cphi) = s.phi.sin_cos();
    let (sth, cth) = s.theta.sin_cos();
    let (spsi, cpsi) = s.psi.sin_cos();
    let (u, v, w, p, q, r) = (s.u, s.v, s.w, s.p, s.q, s.r);

    // forces (thrust along body z only)
    let u_dot = r * v - q * w - g * sth;
    let v_dot = -r * u + p * w + g * sphi * cth;
    let w_dot = q * u - p * v + g * cphi * cth + fm.fz / mass;

    // kinematics
    let tmp = q * sphi + r * cphi;
    let phi_dot = p + sth / cth * tmp;
    let theta_dot = q * cphi - r * sphi;
    let psi_dot = tmp / cth;

    // navigation: body-to-inertial ZYX rotation
    let xn_dot = u * cth * cpsi
        + v * (-cphi * spsi + sphi * sth * cpsi)
        + w * (sphi * spsi + cphi * sth * cpsi);
    let yn_dot = u * cth * spsi
        + v * (cphi * cpsi + sphi * sth * spsi)
        + w * (-sphi * cpsi + cphi * sth * spsi);
    let zn_dot = -u * sth + v * sphi * cth + w * cphi * cth;

    // moments, including the xz product of inertia
    let (mx, my, mz) = (fm.l_moment, fm.m_moment, fm.n_moment);
    let den = jxz * jxz - jx * jz;
    let p_dot = -(jz * mx + jxz * mz - jxz * jxz * q * r - jz * jz * q * r + jx * jxz * p * q
        - jxz * jy * p * q
        + jxz * jz * p * q
        + jy * jz * q * r)
        / den;
    let q_dot = (my - jxz * p * p + jxz * r * r - jx * p * r + jz * p * r) / jy;
    let r_dot = -(jxz * mx + jx * mz + jx * jx * p * q + jxz * jxz * p * q
        - jx * jy * p * q
        - jx * jxz * q * r
        + jxz * jy * q * r
        - jxz * jz * q * r)
        / den;

    Ok(StateDerivative([
        u_dot, v_dot, w_dot, p_dot, q_dot, r_dot, phi_dot, theta_dot, psi_dot, xn_dot, yn_dot,
        zn_dot,
    ]))
}

/// Airframe constants plus the rotor model, i.e. everything needed to advance
/// the state under a commanded control.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Plant<T> {
    pub params: QuadParams<T>,
    pub propulsion: PropulsionModel,
}

impl<T: Real> Plant<T> {
    pub fn new(params: QuadParams<T>, propulsion: PropulsionModel) -> Self {
        Self { params, propulsion }
    }

    pub fn derivative(
        &self,
        state: &QuadState<T>,
        control: &ControlInput<T>,
    ) -> Result<StateDerivative<T>, DynamicsError> {
        let fm = forces_moments(control, state, &self.propulsion, &self.params);
        state_derivative(state, &fm, &self.params)
    }
}

/// One classical fourth-order Runge-Kutta step of an arbitrary state
/// derivative function.
pub fn rk4_step<T, F>(state: &QuadState<T>, dt: T, mut f: F) -> Result<QuadState<T>, DynamicsError>
where
    T: Real,
    F: FnMut(&QuadState<T>) -> Result<StateDerivative<T>, DynamicsError>,
{
    let x = state.to_array();
    let offset = |k: &[T; STATE_DIM], h: T| {
        let mut y = x;
        for (yi, ki) in y.iter_mut().zip(k) {
            *yi += h * *ki;
        }
        QuadState::from_array(y)
    };
    let half = dt / T::lit(2.0);
    let k1 = f(state)?.0;
    let k2 = f(&offset(&k1, half))?.0;
    let k3 = f(&offset(&k2, half))?.0;
    let k4 = f(&offset(&k3, dt))?.0;
    let sixth = dt / T::lit(6.0);
    let two = T::lit(2.0);
    let mut out = x;
    for i in 0..STATE_DIM {
        out[i] += sixth * (k1[i] + two * k2[i] + two * k3[i] + k4[i]);
    }
    let next = QuadState::from_array(out);
    if !next.is_finite() {
        return Err(DynamicsError::NonFiniteInput);
    }
    Ok(next)
}

/// Advances the plant by `dt` with the control held constant over the step.
/// Rotor forces are recomputed from each stage state.
pub fn integrate_step<T: Real>(
    state: &QuadState<T>,
    control: &ControlInput<T>,
    plant: &Plant<T>,
    dt: T,
) -> Result<QuadState<T>, DynamicsError> {
    rk4_step(state, dt, |s| plant.derivative(s, control))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn hover_fm(params: &QuadParams<f64>) -> BodyForcesMoments<f64> {
        BodyForcesMoments {
            fz: -params.mass * params.g,
            ..Default::default()
        }
    }

    #[test]
    fn hover_trim_has_zero_derivative() {
        let params = QuadParams::<f64>::default();
        let s = QuadState::at_altitude(100.0);
        let d = state_derivative(&s, &hover_fm(&params), &params).unwrap();
        assert_eq!(d.max_abs(), 0.0);
    }

    #[test]
    fn level_navigation_is_identity() {
        let params = QuadParams::<f64>::default();
        let s = QuadState {
            u: 3.0,
            v: -1.5,
            w: 0.25,
            ..QuadState::at_altitude(10.0)
        };
        let d = state_derivative(&s, &hover_fm(&params), &params).unwrap();
        assert_eq!(d.xn_dot(), 3.0);
        assert_eq!(d.yn_dot(), -1.5);
        assert_eq!(d.zn_dot(), 0.25);
    }

    #[test]
    fn symmetric_inertia_pitch_acceleration() {
        let params = QuadParams {
            jx: 0.02,
            jy: 0.03,
            jz: 0.04,
            jxz: 0.0,
            ..QuadParams::default()
        };
        let s = QuadState {
            p: 1.0,
            r: 2.0,
            ..QuadState::at_altitude(50.0)
        };
        let d = state_derivative(&s, &BodyForcesMoments::default(), &params).unwrap();
        // hand evaluation: (Jz - Jx) p r / Jy
        let expected = (0.04 - 0.02) * 1.0 * 2.0 / 0.03;
        assert_relative_eq!(d.q_dot(), expected, max_relative = 1e-14);
        assert_relative_eq!(d.q_dot(), 4.0 / 3.0, max_relative = 1e-12);
    }

    #[test]
    fn pure_yaw_spin_is_rotational_equilibrium() {
        let params = QuadParams::<f64>::default();
        let s = QuadState {
            r: 7.0,
            ..QuadState::at_altitude(50.0)
        };
        let d = state_derivative(&s, &BodyForcesMoments::default(), &params).unwrap();
        assert_eq!((d.p_dot(), d.q_dot(), d.r_dot()), (0.0, 0.0, 0.0));
    }

    #[test]
    fn gimbal_lock_is_refused() {
        let params = QuadParams::<f64>::default();
        let s = QuadState {
            theta: std::f64::consts::FRAC_PI_2,
            ..QuadState::zeros()
        };
        let err = state_derivative(&s, &BodyForcesMoments::default(), &params).unwrap_err();
        assert!(matches!(err, DynamicsError::GimbalLock { .. }));
    }

    #[test]
    fn non_finite_state_is_refused() {
        let params = QuadParams::<f64>::default();
        let s = QuadState {
            v: f64::NAN,
            ..QuadState::zeros()
        };
        let err = state_derivative(&s, &BodyForcesMoments::default(), &params).unwrap_err();
        assert_eq!(err, DynamicsError::NonFiniteInput);
        let fm = BodyForcesMoments {
            fz: f64::INFINITY,
            ..Default::default()
        };
        assert_eq!(
            state_derivative(&QuadState::zeros(), &fm, &params).unwrap_err(),
            DynamicsError::NonFiniteInput
        );
    }

    #[test]
    fn params_validation() {
        assert!(QuadParams::<f64>::default().validate().is_ok());
        let bad = QuadParams {
            mass: 0.0,
            ..QuadParams::<f64>::default()
        };
        assert_eq!(bad.validate().unwrap_err().name, "mass");
        let bad = QuadParams {
            jxz: 0.04,
            ..QuadParams::<f64>::default()
        };
        assert_eq!(bad.validate().unwrap_err().name, "jxz");
    }

    #[test]
    fn f32_and_f64_agree_at_hover() {
        let p64 = QuadParams::<f64>::default();
        let p32: QuadParams<f32> = p64.cast();
        let s = QuadState::<f32> {
            u: 1.0,
            q: 0.3,
            phi: 0.1,
            ..QuadState::at_altitude(20.0)
        };
        let fm = BodyForcesMoments {
            fz: -14.0f32,
            l_moment: 0.1,
            m_moment: -0.2,
            n_moment: 0.05,
        };
        let d32 = state_derivative(&s, &fm, &p32).unwrap();
        let fm64 = BodyForcesMoments {
            fz: -14.0,
            l_moment: 0.1,
            m_moment: -0.2,
            n_moment: 0.05,
        };
        let d64 = state_derivative(&s.cast::<f64>(), &fm64, &p64).unwrap();
        for (a, b) in d32.0.iter().zip(d64.0.iter()) {
            assert!((*a as f64 - b).abs() < 1e-4);
        }
    }
}
