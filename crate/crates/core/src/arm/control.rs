use nalgebra::{Matrix2, Vector2};
use serde::{Deserialize, Serialize};

use super::{dynamics_matrices, forward_kinematics, jacobian, ControllerGains, RobotParams, RobotState};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case")]
pub enum ReferenceMode {
    /// Jump straight to the goal; zero desired velocity and acceleration.
    Step,
    /// Quintic `10s^3 - 15s^4 + 6s^5` blend over `duration` seconds.
    MinJerk { duration: f64 },
}

impl Default for ReferenceMode {
    fn default() -> Self {
        ReferenceMode::Step
    }
}

/// Desired position, velocity and acceleration at one instant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReferencePoint {
    pub p: Vector2<f64>,
    pub v: Vector2<f64>,
    pub a: Vector2<f64>,
}

impl ReferencePoint {
    pub fn hold(p: Vector2<f64>) -> Self {
        Self {
            p,
            v: Vector2::zeros(),
            a: Vector2::zeros(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReferenceSignal {
    pub start: Vector2<f64>,
    pub goal: Vector2<f64>,
    pub mode: ReferenceMode,
    /// Time at which the segment begins.
    pub t0: f64,
}

impl ReferenceSignal {
    pub fn step(goal: Vector2<f64>) -> Self {
        Self {
            start: goal,
            goal,
            mode: ReferenceMode::Step,
            t0: 0.0,
        }
    }

    /// Time after which the reference is constant.
    pub fn end_time(&self) -> f64 {
        match self.mode {
            ReferenceMode::Step => self.t0,
            ReferenceMode::MinJerk { duration } => self.t0 + duration,
        }
    }

    pub fn sample(&self, t: f64) -> ReferencePoint {
        match self.mode {
            ReferenceMode::Step => ReferencePoint::hold(self.goal),
            ReferenceMode::MinJerk { duration } => {
                if !(duration > 0.0) || t >= self.t0 + duration {
                    return ReferencePoint::hold(self.goal);
                }
                let s = ((t - self.t0) / duration).max(0.0);
                let (s2, s3) = (s * s, s * s * s);
                let pos = 10.0 * s3 - 15.0 * s3 * s + 6.0 * s3 * s2;
                let vel = (30.0 * s2 - 60.0 * s3 + 30.0 * s2 * s2) / duration;
                let acc = (60.0 * s - 180.0 * s2 + 120.0 * s3) / (duration * duration);
                let d = self.goal - self.start;
                ReferencePoint {
                    p: self.start + d * pos,
                    v: d * vel,
                    a: d * acc,
                }
            }
        }
    }
}

/// Intermediate quantities of one control evaluation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ControlTerms {
    pub u: Vector2<f64>,
    pub v: Vector2<f64>,
    pub e: Vector2<f64>,
    pub e_dot: Vector2<f64>,
    /// True when the damped inverse was used.
    pub damped: bool,
}

pub fn control_terms(
    state: &RobotState,
    reference: &ReferencePoint,
    gains: &ControllerGains,
    params: &RobotParams,
) -> ControlTerms {
    let jt = jacobian(params, &state.theta, &state.theta_dot);
    let p = forward_kinematics(params, &state.theta);
    let e = reference.p - p;
    let e_dot = reference.v - jt.j * state.theta_dot;
    let rhs = reference.a + gains.kd_matrix() * e_dot + gains.kp_matrix() * e - jt.j_dot_theta_dot;

    let exact = if jt.j.determinant().abs() >= gains.det_threshold {
        jt.j.try_inverse()
    } else {
        None
    };
    let damped = exact.is_none();
    let j_inv = exact.unwrap_or_else(|| {
        let lam2 = gains.singularity_damping * gains.singularity_damping;
        let jjt = jt.j * jt.j.transpose() + Matrix2::identity() * lam2;
        jt.j.transpose() * jjt.try_inverse().unwrap_or_else(Matrix2::zeros)
    });
    let v = j_inv * rhs;
    let d = dynamics_matrices(params, state);
    ControlTerms {
        u: d.m * v + d.c * state.theta_dot + d.g,
        v,
        e,
        e_dot,
        damped,
    }
}

/// Computed-torque law: `u = M v + C theta_dot + g` with the task-space
/// outer loop `v = J^-1 (p_d_ddot + K_D e_dot + K_P e - J_dot theta_dot)`.
pub fn inverse_dynamics_control(
    state: &RobotState,
    reference: &ReferencePoint,
    gains: &ControllerGains,
    params: &RobotParams,
) -> Vector2<f64> {
    control_terms(state, reference, gains, params).u
}
