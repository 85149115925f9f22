//! Closed-loop target collection with rigidity maintenance, driven through
//! the routing protocol at every control step.

use bearing_rigidity::controller::{
    control_with, evaluate, finish_step, integrate, ControlOutput, Event, LocalSubframework, MissionState,
};
use bearing_rigidity::protocol::{
    distributed_rigidity_grad, distributed_rigidity_grad_frozen, LogEntry, Membership, RoundResult,
};
use bearing_rigidity::controller::RigidityGradient;
use bearing_rigidity::sensing::{undirected_sensing, weights_on, RobotState};
use bearing_rigidity::{bearing_laplacian, decompose, Decomposition, Error, Framework, Graph, Point, Radius};
use serde::Serialize;

use crate::config::{config_hash, MissionConfig};
use crate::error::{ExperimentError, Result};
use crate::generate::{gen_sensing_framework, substream};
use crate::table::{num, opt_num, Table};

#[derive(Debug, Clone, PartialEq)]
pub struct TraceRow {
    pub t: f64,
    pub edges: usize,
    pub collected: usize,
    pub min_distance: f64,
    pub max_distance: f64,
    /// Rigidity eigenvalue of the whole weighted framework.
    pub framework_lambda: Option<f64>,
    pub framework_diameter: Option<usize>,
    /// Rigidity eigenvalue per center (`None` for infinite radii or when
    /// the round failed).
    pub sub_lambda: Vec<Option<f64>>,
    pub sub_diameter: Vec<Option<usize>>,
    /// Factor applied to the commands of the step leaving this row.
    pub step_scale: f64,
}

impl TraceRow {
    pub fn lambda_range(&self) -> Option<(f64, f64)> {
        let vals: Vec<f64> = self.sub_lambda.iter().flatten().copied().collect();
        if vals.is_empty() {
            return None;
        }
        Some((
            vals.iter().copied().fold(f64::INFINITY, f64::min),
            vals.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        ))
    }

    pub fn max_sub_diameter(&self) -> Option<usize> {
        self.sub_diameter.iter().flatten().copied().max()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Snapshot {
    pub t: f64,
    pub states: Vec<RobotState>,
    pub collected: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MissionRun {
    pub config: MissionConfig,
    pub initial_attempts: u64,
    pub radii: Vec<Radius>,
    pub targets: Vec<Point>,
    pub trace: Vec<TraceRow>,
    pub snapshots: Vec<Snapshot>,
    pub events: Vec<(f64, Event)>,
    pub messages: Vec<(usize, LogEntry)>,
    pub message_count: usize,
    pub steps_completed: usize,
    /// Violation that ended the run early.
    pub failure: Option<Error>,
}

fn distance_extremes(states: &[RobotState]) -> (f64, f64) {
    let mut lo = f64::INFINITY;
    let mut hi: f64 = 0.0;
    for i in 0..states.len() {
        for j in (i + 1)..states.len() {
            let d = (&states[i].p - &states[j].p).norm();
            lo = lo.min(d);
            hi = hi.max(d);
        }
    }
    (lo, hi)
}

fn closest_pair(states: &[RobotState]) -> (usize, usize, f64) {
    let mut best = (0, 1, f64::INFINITY);
    for i in 0..states.len() {
        for j in (i + 1)..states.len() {
            let d = (&states[i].p - &states[j].p).norm();
            if d < best.2 {
                best = (i, j, d);
            }
        }
    }
    best
}

/// Initial swarm: connected, bearing rigid, well separated, every ball
/// above the rigidity floor, and unit radii when requested.
pub fn initial_swarm(cfg: &MissionConfig) -> Result<(Vec<RobotState>, Decomposition, u64)> {
    let mut rng = substream(cfg.seed, cfg.n, 0);
    for attempt in 1..=cfg.max_attempts {
        let (f, states) = gen_sensing_framework(cfg.n, cfg.range, cfg.fov_cos, &cfg.initial_region, &mut rng)?;
        if !f.graph().is_connected() || closest_pair(&states).2 <= cfg.gains.min_distance {
            continue;
        }
        let dec = decompose(&f, cfg.tol)?;
        if !dec.is_rigid() || (cfg.require_unit_radii && dec.r_star.iter().any(|r| *r != Radius::Finite(1))) {
            continue;
        }
        if protocol_round(cfg, &states, &dec).is_err() {
            continue;
        }
        return Ok((states, dec, attempt));
    }
    Err(ExperimentError::SamplingExhausted {
        n: cfg.n,
        sample: 0,
        attempts: cfg.max_attempts,
        detail: "no admissible initial swarm".into(),
    })
}

fn protocol_round(
    cfg: &MissionConfig,
    states: &[RobotState],
    initial: &Decomposition,
) -> std::result::Result<(RigidityGradient, RoundResult), Error> {
    let params = cfg.controller();
    match cfg.membership {
        Membership::Ball => distributed_rigidity_grad(states, &initial.r_star, &params, cfg.routing),
        Membership::Frozen => distributed_rigidity_grad_frozen(states, initial, &params, cfg.routing),
    }
}

fn admissible(cfg: &MissionConfig, states: &[RobotState], initial: &Decomposition) -> bool {
    if distance_extremes(states).0 <= cfg.gains.min_distance {
        return false;
    }
    let p = cfg.controller();
    (0..states.len()).all(|j| {
        let Some(r) = initial.r_star[j].finite() else { return true };
        let sub = match cfg.membership {
            Membership::Ball => LocalSubframework::build(j, r, states, p.weight_support, p.comm_range),
            Membership::Frozen => {
                let members = initial.balls[j].clone().unwrap_or_default();
                LocalSubframework::with_members(j, r, members, states, p.weight_support, p.comm_range)
            }
        };
        evaluate(&sub, states, &p.weights, p.gains.lambda0).is_ok()
    })
}

/// Halves the commands until the Euler step keeps every subframework above
/// the eigenvalue floor and all robots beyond the minimum distance, at most
/// `step_halvings` times. Returns the commands and the applied factor.
fn safeguard(
    cfg: &MissionConfig,
    states: &[RobotState],
    initial: &Decomposition,
    mut out: ControlOutput,
) -> (ControlOutput, f64) {
    let mut scale = 1.0;
    for _ in 0..cfg.step_halvings {
        if admissible(cfg, &integrate(states, &out, cfg.dt), initial) {
            break;
        }
        scale *= 0.5;
        out.velocity.iter_mut().for_each(|v| *v *= 0.5);
        out.yaw_rate.iter_mut().for_each(|w| *w *= 0.5);
    }
    (out, scale)
}

pub fn sample_targets(cfg: &MissionConfig) -> Vec<Point> {
    let mut rng = substream(cfg.seed, cfg.n, 1);
    (0..cfg.targets).map(|_| cfg.target_region.sample(&mut rng)).collect()
}

fn framework_row_parts(states: &[RobotState], g: &Graph, cfg: &MissionConfig) -> (Option<f64>, Option<usize>) {
    let dim = states[0].dim();
    let positions: Vec<Point> = states.iter().map(|s| s.p.clone()).collect();
    let lambda = Framework::new(g.clone(), dim, positions)
        .ok()
        .and_then(|f| bearing_laplacian(&f, &weights_on(g, states, &cfg.weights)).ok())
        .and_then(|b| b.rigidity_eigenvalue().ok());
    (lambda, g.diameter().ok())
}

pub fn run_mission(cfg: &MissionConfig) -> Result<MissionRun> {
    let (mut states, initial, initial_attempts) = initial_swarm(cfg)?;
    let radii = initial.r_star.clone();
    let targets = sample_targets(cfg);
    let mut mission = MissionState::new(targets.clone(), cfg.collect_radius, cfg.speed);
    let params = cfg.controller();
    let dim = states[0].dim();
    let steps = cfg.steps();

    let mut run = MissionRun {
        config: cfg.clone(),
        initial_attempts,
        radii: radii.clone(),
        targets,
        trace: Vec::with_capacity(steps + 1),
        snapshots: Vec::new(),
        events: Vec::new(),
        messages: Vec::new(),
        message_count: 0,
        steps_completed: 0,
        failure: None,
    };
    let positions: Vec<Point> = states.iter().map(|s| s.p.clone()).collect();
    for (robot, target) in mission.collect(&positions) {
        run.events.push((0.0, Event::TargetCollected { robot, target }));
    }

    for k in 0..=steps {
        let t = k as f64 * cfg.dt;
        let g = undirected_sensing(&states)?;
        let (min_distance, max_distance) = distance_extremes(&states);
        let (framework_lambda, framework_diameter) = framework_row_parts(&states, &g, cfg);
        let mut row = TraceRow {
            t,
            edges: g.edge_count(),
            collected: mission.collected_count(),
            min_distance,
            max_distance,
            framework_lambda,
            framework_diameter,
            sub_lambda: vec![None; cfg.n],
            sub_diameter: vec![None; cfg.n],
            step_scale: 1.0,
        };
        if cfg.snapshots.iter().any(|&s| (s - t).abs() < cfg.dt / 2.0) {
            run.snapshots.push(Snapshot {
                t,
                states: states.clone(),
                collected: (0..mission.targets.len()).filter(|&k| mission.targets[k].collected).collect(),
            });
        }
        if min_distance <= cfg.gains.min_distance {
            let (i, j, distance) = closest_pair(&states);
            run.trace.push(row);
            run.failure = Some(Error::CollisionViolation {
                i,
                j,
                distance,
                min: cfg.gains.min_distance,
            });
            break;
        }

        let (grad, round) = match protocol_round(cfg, &states, &initial) {
            Ok(r) => r,
            Err(e) => {
                run.trace.push(row);
                run.failure = Some(e);
                break;
            }
        };
        for term in &grad.terms {
            row.sub_lambda[term.center] = Some(term.rigidity_eigenvalue(dim));
            row.sub_diameter[term.center] = g.induced(&term.members).diameter().ok();
        }
        run.trace.push(row);
        run.message_count += round.log.len();
        if cfg.message_log {
            run.messages.extend(round.log.iter().map(|e| (k, e.clone())));
        }
        if k == steps {
            break;
        }

        let outcome = control_with(&states, &mission, &params, grad).and_then(|out| {
            let (out, scale) = safeguard(cfg, &states, &initial, out);
            if let Some(row) = run.trace.last_mut() {
                row.step_scale = scale;
            }
            finish_step(&states, out, &mut mission, cfg.dt)
        });
        match outcome {
            Ok(o) => {
                let t_next = (k + 1) as f64 * cfg.dt;
                run.events.extend(o.events.into_iter().map(|e| (t_next, e)));
                states = o.states;
                run.steps_completed = k + 1;
            }
            Err(e) => {
                run.failure = Some(e);
                break;
            }
        }
    }
    Ok(run)
}

pub fn trace_table(run: &MissionRun) -> Table {
    let n = run.config.n;
    let mut header: Vec<String> = [
        "t",
        "edges",
        "collected",
        "min_distance",
        "max_distance",
        "framework_lambda",
        "framework_diameter",
        "lambda_min",
        "lambda_max",
        "diameter_max",
        "step_scale",
    ]
    .map(String::from)
    .to_vec();
    header.extend((0..n).map(|j| format!("lambda_{j}")));
    header.extend((0..n).map(|j| format!("diameter_{j}")));
    let mut t = Table::new(header)
        .meta("experiment", "mission")
        .meta("config_sha256", config_hash(&run.config))
        .meta("seed", run.config.seed)
        .meta("robots", n);
    for r in &run.trace {
        let range = r.lambda_range();
        let mut row = vec![
            num(r.t),
            r.edges.to_string(),
            r.collected.to_string(),
            num(r.min_distance),
            num(r.max_distance),
            opt_num(r.framework_lambda),
            r.framework_diameter.map(|d| d.to_string()).unwrap_or_default(),
            opt_num(range.map(|x| x.0)),
            opt_num(range.map(|x| x.1)),
            r.max_sub_diameter().map(|d| d.to_string()).unwrap_or_default(),
            num(r.step_scale),
        ];
        row.extend(r.sub_lambda.iter().map(|&l| opt_num(l)));
        row.extend(r.sub_diameter.iter().map(|d| d.map(|d| d.to_string()).unwrap_or_default()));
        t.push(row);
    }
    t
}

pub fn events_table(run: &MissionRun) -> Table {
    let mut t = Table::new(["t", "event", "a", "b"]).meta("config_sha256", config_hash(&run.config));
    for (time, e) in &run.events {
        let (kind, a, b) = match *e {
            Event::EdgeGained { i, j } => ("edge_gained", i, j),
            Event::EdgeLost { i, j } => ("edge_lost", i, j),
            Event::TargetCollected { robot, target } => ("target_collected", robot, target),
        };
        t.push(vec![num(*time), kind.into(), a.to_string(), b.to_string()]);
    }
    t
}

/// One row per transmission; `receiver` is `broadcast` for state floods.
pub fn message_table(messages: &[(usize, LogEntry)]) -> Table {
    let mut t = Table::new(["step", "tick", "sender", "receiver", "kind", "origin_or_center", "hops_remaining"]);
    for (step, e) in messages {
        t.push(vec![
            step.to_string(),
            e.tick.to_string(),
            e.sender.to_string(),
            e.receiver.map(|r| r.to_string()).unwrap_or_else(|| "broadcast".into()),
            e.kind.into(),
            e.source.to_string(),
            e.hops_remaining.to_string(),
        ]);
    }
    t
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MissionSummary {
    pub config_sha256: String,
    pub seed: u64,
    pub robots: usize,
    pub initial_attempts: u64,
    pub r_star: Vec<Radius>,
    pub steps_completed: usize,
    pub time_completed: f64,
    pub collected: usize,
    pub min_distance: f64,
    pub min_subframework_lambda: Option<f64>,
    pub max_subframework_diameter: Option<usize>,
    pub framework_diameter_start: Option<usize>,
    pub framework_diameter_end: Option<usize>,
    pub messages: usize,
    pub failure: Option<String>,
}

pub fn summary(run: &MissionRun) -> MissionSummary {
    let lambdas: Vec<f64> = run.trace.iter().filter_map(|r| r.lambda_range().map(|x| x.0)).collect();
    MissionSummary {
        config_sha256: config_hash(&run.config),
        seed: run.config.seed,
        robots: run.config.n,
        initial_attempts: run.initial_attempts,
        r_star: run.radii.clone(),
        steps_completed: run.steps_completed,
        time_completed: run.steps_completed as f64 * run.config.dt,
        collected: run.trace.last().map_or(0, |r| r.collected),
        min_distance: run.trace.iter().map(|r| r.min_distance).fold(f64::INFINITY, f64::min),
        min_subframework_lambda: lambdas.iter().copied().reduce(f64::min),
        max_subframework_diameter: run.trace.iter().filter_map(TraceRow::max_sub_diameter).max(),
        framework_diameter_start: run.trace.first().and_then(|r| r.framework_diameter),
        framework_diameter_end: run.trace.last().and_then(|r| r.framework_diameter),
        messages: run.message_count,
        failure: run.failure.as_ref().map(|e| e.to_string()),
    }
}
