use nalgebra::{Matrix2, Vector2};

use super::RobotParams;
use crate::error::{Error, Result};

/// End-effector position `(x, z)`.
pub fn forward_kinematics(params: &RobotParams, theta: &Vector2<f64>) -> Vector2<f64> {
    let (t1, t12) = (theta[0], theta[0] + theta[1]);
    Vector2::new(
        params.l1 * t1.cos() + params.l2 * t12.cos(),
        params.l1 * t1.sin() + params.l2 * t12.sin(),
    )
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JacobianTerms {
    /// Analytical Jacobian `dp/dtheta`.
    pub j: Matrix2<f64>,
    /// Drift term `J_dot * theta_dot`.
    pub j_dot_theta_dot: Vector2<f64>,
}

pub fn jacobian(
    params: &RobotParams,
    theta: &Vector2<f64>,
    theta_dot: &Vector2<f64>,
) -> JacobianTerms {
    let (l1, l2) = (params.l1, params.l2);
    let (s1, c1) = theta[0].sin_cos();
    let (s12, c12) = (theta[0] + theta[1]).sin_cos();
    let j = Matrix2::new(-l1 * s1 - l2 * s12, -l2 * s12, l1 * c1 + l2 * c12, l2 * c12);
    let w1 = theta_dot[0];
    let w12 = theta_dot[0] + theta_dot[1];
    let j_dot_theta_dot = Vector2::new(
        -l1 * c1 * w1 * w1 - l2 * c12 * w12 * w12,
        -l1 * s1 * w1 * w1 - l2 * s12 * w12 * w12,
    );
    JacobianTerms { j, j_dot_theta_dot }
}

/// Joint angles reaching `p`. `elbow_positive` selects `theta2 >= 0`.
pub fn inverse_kinematics(
    params: &RobotParams,
    p: &Vector2<f64>,
    elbow_positive: bool,
) -> Result<Vector2<f64>> {
    let (l1, l2) = (params.l1, params.l2);
    let c2 = (p.norm_squared() - l1 * l1 - l2 * l2) / (2.0 * l1 * l2);
    if !(-1.0..=1.0).contains(&c2) {
        return Err(Error::Workspace { x: p[0], z: p[1] });
    }
    let t2 = if elbow_positive { c2.acos() } else { -c2.acos() };
    let t1 = p[1].atan2(p[0]) - (l2 * t2.sin()).atan2(l1 + l2 * t2.cos());
    Ok(Vector2::new(t1, t2))
}
