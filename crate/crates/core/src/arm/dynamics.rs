//! `M(theta) theta_ddot + C(theta, theta_dot) theta_dot + g(theta) = u` for a
//! planar 2R arm moving in a vertical plane, gravity along -z.

use nalgebra::{Matrix2, Vector2};

use super::{RobotParams, RobotState};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Dynamics {
    pub m: Matrix2<f64>,
    /// Christoffel-symbol Coriolis/centrifugal matrix; `M_dot - 2C` is skew.
    pub c: Matrix2<f64>,
    pub g: Vector2<f64>,
}

pub fn dynamics_matrices(params: &RobotParams, state: &RobotState) -> Dynamics {
    let RobotParams {
        l1,
        lc1,
        lc2,
        m1,
        m2,
        i1,
        i2,
        gravity,
        ..
    } = *params;
    let (s2, c2) = state.theta[1].sin_cos();
    let c1 = state.theta[0].cos();
    let c12 = (state.theta[0] + state.theta[1]).cos();

    let m11 = m1 * lc1 * lc1 + i1 + m2 * (l1 * l1 + lc2 * lc2 + 2.0 * l1 * lc2 * c2) + i2;
    let m12 = m2 * (lc2 * lc2 + l1 * lc2 * c2) + i2;
    let m22 = m2 * lc2 * lc2 + i2;

    let h = -m2 * l1 * lc2 * s2;
    let (w1, w2) = (state.theta_dot[0], state.theta_dot[1]);
    let c = Matrix2::new(h * w2, h * (w1 + w2), -h * w1, 0.0);

    let g2 = m2 * lc2 * gravity * c12;
    let g1 = (m1 * lc1 + m2 * l1) * gravity * c1 + g2;
    Dynamics {
        m: Matrix2::new(m11, m12, m12, m22),
        c,
        g: Vector2::new(g1, g2),
    }
}

/// Joint accelerations under torque `u`.
pub fn acceleration(params: &RobotParams, state: &RobotState, u: &Vector2<f64>) -> Result<Vector2<f64>> {
    let d = dynamics_matrices(params, state);
    let rhs = u - d.c * state.theta_dot - d.g;
    let acc = d
        .m
        .lu()
        .solve(&rhs)
        .ok_or_else(|| Error::Numeric("singular inertia matrix".into()))?;
    if !acc.iter().all(|v| v.is_finite()) {
        return Err(Error::Numeric(format!(
            "non-finite joint acceleration at theta = ({}, {})",
            state.theta[0], state.theta[1]
        )));
    }
    Ok(acc)
}

/// Classical fourth-order Runge-Kutta with `u` held over the step.
pub fn step(state: &RobotState, u: &Vector2<f64>, dt: f64, params: &RobotParams) -> Result<RobotState> {
    if !(dt > 0.0) {
        return Err(Error::config(format!("time step must be positive, got {dt}")));
    }
    let f = |s: &RobotState| -> Result<(Vector2<f64>, Vector2<f64>)> {
        Ok((s.theta_dot, acceleration(params, s, u)?))
    };
    let offset = |k: &(Vector2<f64>, Vector2<f64>), h: f64| RobotState {
        theta: state.theta + k.0 * h,
        theta_dot: state.theta_dot + k.1 * h,
    };
    let k1 = f(state)?;
    let k2 = f(&offset(&k1, dt / 2.0))?;
    let k3 = f(&offset(&k2, dt / 2.0))?;
    let k4 = f(&offset(&k3, dt))?;
    let next = RobotState {
        theta: state.theta + (k1.0 + 2.0 * k2.0 + 2.0 * k3.0 + k4.0) * (dt / 6.0),
        theta_dot: state.theta_dot + (k1.1 + 2.0 * k2.1 + 2.0 * k3.1 + k4.1) * (dt / 6.0),
    };
    if !next.is_finite() {
        return Err(Error::Numeric("integration produced non-finite state".into()));
    }
    Ok(next)
}

pub fn kinetic_energy(params: &RobotParams, state: &RobotState) -> f64 {
    let d = dynamics_matrices(params, state);
    0.5 * state.theta_dot.dot(&(d.m * state.theta_dot))
}

/// Gravitational potential, zero with both links hanging straight down.
pub fn potential_energy(params: &RobotParams, state: &RobotState) -> f64 {
    let s1 = state.theta[0].sin();
    let s12 = (state.theta[0] + state.theta[1]).sin();
    let g = params.gravity;
    params.m1 * g * params.lc1 * (1.0 + s1)
        + params.m2 * g * (params.l1 * (1.0 + s1) + params.lc2 * (1.0 + s12))
}

pub fn total_energy(params: &RobotParams, state: &RobotState) -> f64 {
    kinetic_energy(params, state) + potential_energy(params, state)
}
