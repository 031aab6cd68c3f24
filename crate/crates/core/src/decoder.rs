//! Per-bulb scores to a direction decision, and a direction to the next
//! end-effector reference.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::arm::RobotParams;
use crate::eeg_io::NUM_BULBS;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Up,
    Down,
    Left,
    Right,
}

impl Direction {
    pub const ALL: [Direction; 4] = [Direction::Up, Direction::Down, Direction::Left, Direction::Right];

    /// Unit step in the (x, z) plane.
    pub fn unit(self) -> (f64, f64) {
        match self {
            Direction::Up => (0.0, 1.0),
            Direction::Down => (0.0, -1.0),
            Direction::Left => (-1.0, 0.0),
            Direction::Right => (1.0, 0.0),
        }
    }
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Direction::Up => "up",
            Direction::Down => "down",
            Direction::Left => "left",
            Direction::Right => "right",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DecisionConfig {
    /// End-effector displacement per command, m.
    pub step_resolution: f64,
    pub min_score_margin: f64,
    /// Direction of bulb `i + 1`.
    pub bulb_direction_map: [Direction; NUM_BULBS],
    /// Workspace shrink on both annulus edges, as a fraction of the reach.
    pub safety_fraction: f64,
}

impl Default for DecisionConfig {
    fn default() -> Self {
        Self {
            step_resolution: 0.1,
            min_score_margin: 0.0,
            bulb_direction_map: Direction::ALL,
            safety_fraction: 0.05,
        }
    }
}

impl DecisionConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.step_resolution > 0.0 && self.step_resolution.is_finite()) {
            return Err(Error::config(format!(
                "step_resolution must be positive, got {}",
                self.step_resolution
            )));
        }
        if !(self.min_score_margin >= 0.0) {
            return Err(Error::config("min_score_margin must be non-negative"));
        }
        if !(0.0..0.5).contains(&self.safety_fraction) {
            return Err(Error::config("safety_fraction must lie in [0, 0.5)"));
        }
        for d in Direction::ALL {
            if !self.bulb_direction_map.contains(&d) {
                return Err(Error::config(format!(
                    "bulb_direction_map is not a bijection: no bulb for {d}"
                )));
            }
        }
        Ok(())
    }

    pub fn bulb_for(&self, dir: Direction) -> u8 {
        self.bulb_direction_map
            .iter()
            .position(|&d| d == dir)
            .map_or(1, |i| i as u8 + 1)
    }
}

/// Pick the bulb with the highest score (lowest bulb on exact ties), or no
/// decision when it does not beat the runner-up by `min_score_margin`.
pub fn decide_direction(scores: &[f64; NUM_BULBS], cfg: &DecisionConfig) -> Option<Direction> {
    let mut best = 0;
    for i in 1..NUM_BULBS {
        if scores[i] > scores[best] {
            best = i;
        }
    }
    let second = (0..NUM_BULBS)
        .filter(|&i| i != best)
        .map(|i| scores[i])
        .fold(f64::NEG_INFINITY, f64::max);
    if scores[best] - second >= cfg.min_score_margin {
        Some(cfg.bulb_direction_map[best])
    } else {
        None
    }
}

/// Reachable annulus of a two-link arm, shrunk by a safety margin.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Workspace {
    pub r_min: f64,
    pub r_max: f64,
    pub margin: f64,
}

impl Workspace {
    pub fn from_params(params: &RobotParams, safety_fraction: f64) -> Self {
        let r_max = params.l1 + params.l2;
        Self {
            r_min: (params.l1 - params.l2).abs(),
            r_max,
            margin: safety_fraction * r_max,
        }
    }

    pub fn contains(&self, p: (f64, f64)) -> bool {
        let r = p.0.hypot(p.1);
        r >= self.r_min + self.margin && r <= self.r_max - self.margin
    }
}

pub fn reference_from_direction(
    current: (f64, f64),
    dir: Direction,
    cfg: &DecisionConfig,
    workspace: &Workspace,
) -> Result<(f64, f64)> {
    if !workspace.contains(current) {
        return Err(Error::Workspace {
            x: current.0,
            z: current.1,
        });
    }
    let (ux, uz) = dir.unit();
    let h = cfg.step_resolution;
    let next = (current.0 + ux * h, current.1 + uz * h);
    if !workspace.contains(next) {
        return Err(Error::Workspace {
            x: next.0,
            z: next.1,
        });
    }
    Ok(next)
}

/// One line of the decision log.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecisionRecord {
    pub block: usize,
    /// Absent when the block could not be scored.
    pub scores: Option<[f64; NUM_BULBS]>,
    pub direction: Option<Direction>,
    pub reference: Option<(f64, f64)>,
    /// Simulated time at which the decision was issued, s.
    pub t: f64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub note: Option<String>,
}
