//! Planar two-link arm: kinematics, rigid-body dynamics, task-space inverse
//! dynamics control and closed-loop simulation.

mod control;
mod dynamics;
mod export;
mod kinematics;
mod sim;

pub use self::control::{
    control_terms, inverse_dynamics_control, ControlTerms, ReferenceMode, ReferencePoint, ReferenceSignal,
};
pub use self::dynamics::{
    acceleration, dynamics_matrices, kinetic_energy, potential_energy, step, total_energy,
    Dynamics,
};
pub use self::export::{read_trajectory_csv, trajectory_svg, write_trajectory_csv};
pub use self::kinematics::{forward_kinematics, inverse_kinematics, jacobian, JacobianTerms};
pub use self::sim::{run_point_to_point, ArmSimulator, SimConfig, Trajectory, TrajectorySample};

use nalgebra::{Matrix2, Vector2};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RobotParams {
    pub l1: f64,
    pub l2: f64,
    /// Joint-to-COM distances.
    pub lc1: f64,
    pub lc2: f64,
    pub m1: f64,
    pub m2: f64,
    /// Link inertias about their COM, kg m^2.
    pub i1: f64,
    pub i2: f64,
    pub gravity: f64,
}

impl Default for RobotParams {
    fn default() -> Self {
        Self::uniform_rods(0.5, 0.5, 1.0, 1.0, 9.81)
    }
}

impl RobotParams {
    /// Slender uniform rods: COM at mid-length, `I = m l^2 / 12`.
    pub fn uniform_rods(l1: f64, l2: f64, m1: f64, m2: f64, gravity: f64) -> Self {
        Self {
            l1,
            l2,
            lc1: l1 / 2.0,
            lc2: l2 / 2.0,
            m1,
            m2,
            i1: m1 * l1 * l1 / 12.0,
            i2: m2 * l2 * l2 / 12.0,
            gravity,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [self.l1, self.l2, self.lc1, self.lc2, self.m1, self.m2];
        if positive.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
            return Err(Error::config("link lengths, COM distances and masses must be positive"));
        }
        if !(self.i1 >= 0.0 && self.i2 >= 0.0) {
            return Err(Error::config("link inertias must be non-negative"));
        }
        if self.lc1 > self.l1 || self.lc2 > self.l2 {
            return Err(Error::config("COM distance exceeds link length"));
        }
        if !self.gravity.is_finite() {
            return Err(Error::config("gravity must be finite"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RobotState {
    pub theta: Vector2<f64>,
    pub theta_dot: Vector2<f64>,
}

impl RobotState {
    pub fn at_rest(theta1: f64, theta2: f64) -> Self {
        Self {
            theta: Vector2::new(theta1, theta2),
            theta_dot: Vector2::zeros(),
        }
    }

    pub fn is_finite(&self) -> bool {
        self.theta.iter().chain(self.theta_dot.iter()).all(|v| v.is_finite())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ControllerGains {
    /// Diagonal of K_P.
    pub kp: [f64; 2],
    /// Diagonal of K_D.
    pub kd: [f64; 2],
    /// Damped least-squares factor used near singularities.
    pub singularity_damping: f64,
    /// Below this |det J| the damped inverse replaces the exact one.
    pub det_threshold: f64,
}

impl Default for ControllerGains {
    fn default() -> Self {
        Self::critically_damped(10.0)
    }
}

impl ControllerGains {
    /// `K_P = w^2 I`, `K_D = 2 w I`.
    pub fn critically_damped(omega: f64) -> Self {
        Self {
            kp: [omega * omega; 2],
            kd: [2.0 * omega; 2],
            singularity_damping: 0.01,
            det_threshold: 1e-4,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self
            .kp
            .iter()
            .chain(&self.kd)
            .any(|v| !(v.is_finite() && *v > 0.0))
        {
            return Err(Error::config("controller gains must be strictly positive"));
        }
        if !(self.singularity_damping >= 0.0) || !(self.det_threshold > 0.0) {
            return Err(Error::config(
                "singularity damping must be >= 0 and det threshold > 0",
            ));
        }
        Ok(())
    }

    pub fn kp_matrix(&self) -> Matrix2<f64> {
        Matrix2::from_diagonal(&Vector2::from(self.kp))
    }

    pub fn kd_matrix(&self) -> Matrix2<f64> {
        Matrix2::from_diagonal(&Vector2::from(self.kd))
    }
}
