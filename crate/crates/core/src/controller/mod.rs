//! Anti-gradient controller for mission tracking, collision avoidance and
//! rigidity maintenance of single-integrator robots with yaw-steered cameras.

mod collision;
mod mission;
mod rigidity;

pub use collision::{collision_cost, collision_grad};
pub use mission::{MissionState, SpeedProfile, Target};
pub use rigidity::{
    build_subframeworks, evaluate, rigidity_cost, rigidity_grad, sum_contributions, LocalSubframework, Nu,
    RigidityGradient, StateSource, SubframeworkTerms,
};

use std::collections::BTreeMap;
use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::framework::Point;
use crate::graph::Graph;
use crate::sensing::{comm_graph_of, undirected_sensing, RobotState, WeightParams, WeightSupport};
use crate::subframework::Radius;

/// Cost weights and barrier parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Gains {
    pub mission: f64,
    pub collision: f64,
    pub rigidity: f64,
    /// Rigidity eigenvalue floor.
    pub lambda0: f64,
    /// Minimum inter-robot distance (m).
    pub min_distance: f64,
}

impl Default for Gains {
    fn default() -> Self {
        Self {
            mission: 1.0,
            collision: 0.5,
            rigidity: 0.1,
            lambda0: 1e-4,
            min_distance: 1.0,
        }
    }
}

/// Actuator limits. Each robot's velocity is scaled down to `max_speed` and
/// its yaw rate clipped to `max_yaw_rate`; `None` disables a limit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Limits {
    pub max_speed: Option<f64>,
    pub max_yaw_rate: Option<f64>,
}

impl Default for Limits {
    fn default() -> Self {
        Self {
            max_speed: Some(3.0),
            max_yaw_rate: Some(1.0),
        }
    }
}

impl Limits {
    pub fn none() -> Self {
        Self {
            max_speed: None,
            max_yaw_rate: None,
        }
    }

    pub fn apply(&self, velocity: &mut [Point], yaw_rate: &mut [f64]) {
        if let Some(vmax) = self.max_speed {
            for v in velocity.iter_mut() {
                let norm = v.norm();
                if norm > vmax {
                    *v *= vmax / norm;
                }
            }
        }
        if let Some(wmax) = self.max_yaw_rate {
            for w in yaw_rate.iter_mut() {
                *w = w.clamp(-wmax, wmax);
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ControllerParams {
    pub gains: Gains,
    pub limits: Limits,
    pub weights: WeightParams,
    pub weight_support: WeightSupport,
    pub comm_range: f64,
}

impl Default for ControllerParams {
    fn default() -> Self {
        Self {
            gains: Gains::default(),
            limits: Limits::default(),
            weights: WeightParams::default(),
            weight_support: WeightSupport::default(),
            comm_range: 20.0,
        }
    }
}

impl ControllerParams {
    pub fn validate(&self) -> Result<()> {
        let g = &self.gains;
        let ok = g.mission >= 0.0
            && g.collision >= 0.0
            && g.rigidity >= 0.0
            && g.lambda0 > 0.0
            && g.min_distance > 0.0
            && g.min_distance < self.comm_range
            && self.limits.max_speed.is_none_or(|v| v > 0.0)
            && self.limits.max_yaw_rate.is_none_or(|w| w > 0.0);
        if ok {
            Ok(())
        } else {
            Err(Error::NumericalFailure(format!("invalid controller parameters: {self:?}")))
        }
    }
}

/// Commanded velocities and yaw rates plus the rigidity terms behind them.
#[derive(Debug, Clone, PartialEq)]
pub struct ControlOutput {
    pub velocity: Vec<Point>,
    pub yaw_rate: Vec<f64>,
    pub rigidity: RigidityGradient,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "event", rename_all = "snake_case")]
pub enum Event {
    EdgeGained { i: usize, j: usize },
    EdgeLost { i: usize, j: usize },
    TargetCollected { robot: usize, target: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepOutcome {
    pub states: Vec<RobotState>,
    pub output: ControlOutput,
    pub events: Vec<Event>,
}

/// Wraps an angle to (-pi, pi].
pub fn wrap_angle(psi: f64) -> f64 {
    let w = psi.rem_euclid(2.0 * PI);
    if w > PI {
        w - 2.0 * PI
    } else {
        w
    }
}

/// Combines the three cost gradients into `(v_i, omega_i) = -dJ/dx_i`,
/// then applies the actuator limits.
pub fn control_with(
    states: &[RobotState],
    mission: &MissionState,
    params: &ControllerParams,
    rigidity: RigidityGradient,
) -> Result<ControlOutput> {
    let g = &params.gains;
    let positions: Vec<Point> = states.iter().map(|s| s.p.clone()).collect();
    let comm = comm_graph_of(states, params.comm_range);
    let coll = collision_grad(&positions, &comm, params.comm_range, g.min_distance)?;
    let mis = mission.grad(&positions);
    let mut velocity: Vec<Point> = (0..states.len())
        .map(|i| -(&mis[i] * g.mission + &coll[i] * g.collision + &rigidity.position[i] * g.rigidity))
        .collect();
    let mut yaw_rate: Vec<f64> = rigidity.yaw.iter().map(|y| -g.rigidity * y).collect();

    let finite = velocity.iter().all(|v| v.iter().all(|x| x.is_finite())) && yaw_rate.iter().all(|x| x.is_finite());
    if !finite {
        return Err(Error::NumericalFailure(diagnostic_dump(states, &velocity, &yaw_rate)));
    }
    params.limits.apply(&mut velocity, &mut yaw_rate);
    Ok(ControlOutput {
        velocity,
        yaw_rate,
        rigidity,
    })
}

/// Centralized control action for frozen minimal radii.
pub fn control(
    states: &[RobotState],
    radii: &[Radius],
    mission: &MissionState,
    params: &ControllerParams,
    exec: Execution,
) -> Result<ControlOutput> {
    let subs = build_subframeworks(states, radii, params.weight_support, params.comm_range);
    let rigidity = rigidity_grad(&subs, states, &params.weights, params.gains.lambda0, exec)?;
    control_with(states, mission, params, rigidity)
}

/// Explicit Euler update with yaw wrapping.
pub fn integrate(states: &[RobotState], output: &ControlOutput, dt: f64) -> Vec<RobotState> {
    states
        .iter()
        .zip(output.velocity.iter().zip(&output.yaw_rate))
        .map(|(s, (v, w))| RobotState {
            p: &s.p + v * dt,
            psi: wrap_angle(s.psi + dt * w),
            ..s.clone()
        })
        .collect()
}

/// Sensing-edge changes between two graphs on the same vertex set.
pub fn edge_events(before: &Graph, after: &Graph) -> Vec<Event> {
    let mut events: Vec<Event> = before
        .edges()
        .iter()
        .filter(|&&(i, j)| !after.has_edge(i, j))
        .map(|&(i, j)| Event::EdgeLost { i, j })
        .collect();
    events.extend(
        after
            .edges()
            .iter()
            .filter(|&&(i, j)| !before.has_edge(i, j))
            .map(|&(i, j)| Event::EdgeGained { i, j }),
    );
    events
}

/// One closed-loop step with the centralized rigidity gradient.
pub fn step(
    states: &[RobotState],
    radii: &[Radius],
    mission: &mut MissionState,
    params: &ControllerParams,
    dt: f64,
) -> Result<StepOutcome> {
    let output = control(states, radii, mission, params, Execution::default())?;
    finish_step(states, output, mission, dt)
}

/// Applies a computed control action: integrates, collects targets and
/// reports graph and mission events.
pub fn finish_step(
    states: &[RobotState],
    output: ControlOutput,
    mission: &mut MissionState,
    dt: f64,
) -> Result<StepOutcome> {
    if dt <= 0.0 || !dt.is_finite() {
        return Err(Error::NumericalFailure(format!("time step must be positive, got {dt}")));
    }
    let before = undirected_sensing(states)?;
    let next = integrate(states, &output, dt);
    let after = undirected_sensing(&next)?;
    let mut events = edge_events(&before, &after);
    let positions: Vec<Point> = next.iter().map(|s| s.p.clone()).collect();
    events.extend(
        mission
            .collect(&positions)
            .into_iter()
            .map(|(robot, target)| Event::TargetCollected { robot, target }),
    );
    Ok(StepOutcome {
        states: next,
        output,
        events,
    })
}

fn diagnostic_dump(states: &[RobotState], velocity: &[Point], yaw_rate: &[f64]) -> String {
    let mut out = String::from("non-finite control action");
    for (i, s) in states.iter().enumerate() {
        out.push_str(&format!(
            "\n  robot {i}: p={:?} psi={} v={:?} omega={}",
            s.p.as_slice(),
            s.psi,
            velocity[i].as_slice(),
            yaw_rate[i]
        ));
    }
    out
}

/// `nu_ji` contributions grouped by receiving robot.
pub fn nu_by_robot(rigidity: &RigidityGradient) -> BTreeMap<usize, Vec<(usize, Nu)>> {
    let mut out: BTreeMap<usize, Vec<(usize, Nu)>> = BTreeMap::new();
    for ((j, i), nu) in rigidity.nu_map() {
        out.entry(i).or_default().push((j, nu));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::dvector;

    #[test]
    fn wrap_angle_range() {
        assert_eq!(wrap_angle(PI), PI);
        assert!((wrap_angle(-PI) - PI).abs() < 1e-15);
        assert!((wrap_angle(3.0 * PI / 2.0) + PI / 2.0).abs() < 1e-15);
        assert_eq!(wrap_angle(0.25), 0.25);
    }

    #[test]
    fn lone_robot_moves_at_max_speed() {
        let states = vec![RobotState::new(dvector![0.0, 0.0, 0.0], 0.0, 20.0, 0.5)];
        let mut mission = MissionState::new(vec![dvector![0.0, 15.0, 0.0]], 5.0, SpeedProfile::default());
        let params = ControllerParams {
            gains: Gains {
                collision: 0.0,
                rigidity: 0.0,
                ..Gains::default()
            },
            ..ControllerParams::default()
        };
        let out = step(&states, &[Radius::Infinite], &mut mission, &params, 0.1).unwrap();
        assert!((&out.states[0].p - dvector![0.0, 0.15, 0.0]).norm() < 1e-12);
        assert!(out.events.is_empty());
    }

    #[test]
    fn limits_scale_without_turning() {
        let mut v = vec![dvector![3.0, 4.0], dvector![0.3, 0.4]];
        let mut w = vec![-2.0, 0.5];
        let lim = Limits {
            max_speed: Some(1.0),
            max_yaw_rate: Some(1.0),
        };
        lim.apply(&mut v, &mut w);
        assert!((&v[0] - dvector![0.6, 0.8]).norm() < 1e-15);
        assert_eq!(v[1], dvector![0.3, 0.4]);
        assert_eq!(w, vec![-1.0, 0.5]);
    }

    #[test]
    fn rejects_bad_dt() {
        let states = vec![RobotState::new(dvector![0.0, 0.0], 0.0, 1.0, 0.5)];
        let mut mission = MissionState::new(vec![], 5.0, SpeedProfile::default());
        let params = ControllerParams::default();
        let res = step(&states, &[Radius::Infinite], &mut mission, &params, 0.0);
        assert!(matches!(res, Err(Error::NumericalFailure(_))));
    }
}
