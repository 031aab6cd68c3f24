use nalgebra::Vector2;
use serde::{Deserialize, Serialize};

use super::control::control_terms;
use super::{
    forward_kinematics, jacobian, step, ControllerGains, ReferenceMode, ReferencePoint,
    ReferenceSignal, RobotParams, RobotState,
};
use crate::decoder::Workspace;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrajectorySample {
    pub t: f64,
    pub theta: [f64; 2],
    pub theta_dot: [f64; 2],
    /// End-effector `(x, z)`.
    pub p: [f64; 2],
    /// Torque applied from `t` to the next sample.
    pub u: [f64; 2],
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub dt: f64,
    pub samples: Vec<TrajectorySample>,
    pub waypoints: Vec<[f64; 2]>,
    /// Sample index at which each waypoint was declared reached.
    pub arrivals: Vec<usize>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn last(&self) -> Option<&TrajectorySample> {
        self.samples.last()
    }

    pub fn positions(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.samples.iter().map(|s| (s.p[0], s.p[1]))
    }

    /// Append `other`, shifting its times and indices to follow this one.
    pub fn extend(&mut self, other: &Trajectory) {
        let offset = self.samples.len();
        if self.dt == 0.0 {
            self.dt = other.dt;
        }
        self.samples.extend_from_slice(&other.samples);
        self.waypoints.extend_from_slice(&other.waypoints);
        self.arrivals.extend(other.arrivals.iter().map(|i| i + offset));
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SimConfig {
    pub dt: f64,
    /// Position tolerance, m. Velocity tolerance is ten times this.
    pub settle_tolerance: f64,
    /// Consecutive in-tolerance steps required to accept a waypoint.
    pub settle_steps: usize,
    pub max_steps_per_waypoint: usize,
    pub reference: ReferenceMode,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            dt: 1e-3,
            settle_tolerance: 1e-3,
            settle_steps: 50,
            max_steps_per_waypoint: 20_000,
            reference: ReferenceMode::Step,
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::config(format!("dt must be positive, got {}", self.dt)));
        }
        if !(self.settle_tolerance > 0.0) {
            return Err(Error::config("settle_tolerance must be positive"));
        }
        if self.settle_steps == 0 || self.max_steps_per_waypoint == 0 {
            return Err(Error::config("settle_steps and max_steps_per_waypoint must be >= 1"));
        }
        if let ReferenceMode::MinJerk { duration } = self.reference {
            if !(duration > 0.0) {
                return Err(Error::config("min-jerk duration must be positive"));
            }
        }
        Ok(())
    }
}

/// Closed-loop arm that keeps its state and clock between point-to-point moves.
#[derive(Debug, Clone)]
pub struct ArmSimulator {
    params: RobotParams,
    gains: ControllerGains,
    cfg: SimConfig,
    workspace: Workspace,
    state: RobotState,
    steps: usize,
    goal: Vector2<f64>,
    trajectory: Trajectory,
}

impl ArmSimulator {
    pub fn new(
        params: RobotParams,
        gains: ControllerGains,
        initial: RobotState,
        cfg: SimConfig,
    ) -> Result<Self> {
        params.validate()?;
        gains.validate()?;
        cfg.validate()?;
        if !initial.is_finite() {
            return Err(Error::config("initial state must be finite"));
        }
        Ok(Self {
            workspace: Workspace::from_params(&params, 0.0),
            goal: forward_kinematics(&params, &initial.theta),
            trajectory: Trajectory {
                dt: cfg.dt,
                ..Default::default()
            },
            params,
            gains,
            cfg,
            state: initial,
            steps: 0,
        })
    }

    pub fn state(&self) -> &RobotState {
        &self.state
    }

    pub fn time(&self) -> f64 {
        self.steps as f64 * self.cfg.dt
    }

    pub fn position(&self) -> Vector2<f64> {
        forward_kinematics(&self.params, &self.state.theta)
    }

    /// Most recently commanded goal (the initial position before any move).
    pub fn goal(&self) -> Vector2<f64> {
        self.goal
    }

    fn record(&mut self, u: Vector2<f64>) {
        let p = self.position();
        self.trajectory.samples.push(TrajectorySample {
            t: self.time(),
            theta: self.state.theta.into(),
            theta_dot: self.state.theta_dot.into(),
            p: p.into(),
            u: u.into(),
        });
    }

    fn hold_torque(&self) -> Vector2<f64> {
        control_terms(&self.state, &ReferencePoint::hold(self.goal), &self.gains, &self.params).u
    }

    /// Drive the end effector to `(x, z)` and wait until it has settled.
    pub fn move_to(&mut self, x: f64, z: f64) -> Result<()> {
        if !self.workspace.contains((x, z)) {
            return Err(Error::Workspace { x, z });
        }
        let target = Vector2::new(x, z);
        let reference = ReferenceSignal {
            start: self.goal,
            goal: target,
            mode: self.cfg.reference,
            t0: self.time(),
        };
        let waypoint = self.trajectory.waypoints.len();
        self.trajectory.waypoints.push([x, z]);
        self.goal = target;

        let tol = self.cfg.settle_tolerance;
        let mut settled = 0;
        for _ in 0..self.cfg.max_steps_per_waypoint {
            let rp = reference.sample(self.time());
            let u = control_terms(&self.state, &rp, &self.gains, &self.params).u;
            self.record(u);
            self.state = step(&self.state, &u, self.cfg.dt, &self.params)?;
            self.steps += 1;

            let e = target - self.position();
            let e_dot = jacobian(&self.params, &self.state.theta, &self.state.theta_dot).j
                * self.state.theta_dot;
            if self.time() >= reference.end_time() && e.norm() < tol && e_dot.norm() < 10.0 * tol {
                settled += 1;
                if settled == self.cfg.settle_steps {
                    self.trajectory.arrivals.push(self.trajectory.samples.len());
                    return Ok(());
                }
            } else {
                settled = 0;
            }
        }
        Err(Error::Convergence {
            waypoint,
            max_steps: self.cfg.max_steps_per_waypoint,
            partial: Box::new(self.snapshot()),
        })
    }

    /// Trajectory so far, closed with a record of the current state.
    pub fn snapshot(&self) -> Trajectory {
        let mut t = self.trajectory.clone();
        let mut sim = self.clone();
        let u = sim.hold_torque();
        sim.record(u);
        t.samples.push(*sim.trajectory.samples.last().expect("just recorded"));
        t
    }

    pub fn into_trajectory(self) -> Trajectory {
        self.snapshot()
    }
}

/// Visit `waypoints` in order from `initial`.
pub fn run_point_to_point(
    params: &RobotParams,
    gains: &ControllerGains,
    initial: &RobotState,
    waypoints: &[(f64, f64)],
    cfg: &SimConfig,
) -> Result<Trajectory> {
    let mut sim = ArmSimulator::new(*params, *gains, *initial, *cfg)?;
    for &(x, z) in waypoints {
        sim.move_to(x, z)?;
    }
    Ok(sim.into_trajectory())
}
