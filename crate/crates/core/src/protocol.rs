//! Hop-synchronous simulation of the subframework routing protocol.
//!
//! Every robot floods its state over `q_i` hops. A center, once it holds the
//! states of all members of its minimal ball, computes the rigidity terms of
//! its subframework and sends each member's `nu` back with a hop budget equal
//! to the hop distance at which that member's state arrived. Transmissions
//! are broadcasts to all neighbors; a robot forwards a given message at most
//! once, and only while hop budget remains.

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use crate::controller::{
    evaluate, sum_contributions, ControllerParams, LocalSubframework, Nu, RigidityGradient, SubframeworkTerms,
};
use crate::error::{Error, Result};
use crate::framework::Point;
use crate::graph::Graph;
use crate::sensing::{comm_graph_of, undirected_sensing, RobotState};
use crate::subframework::{Decomposition, Radius};

#[derive(Debug, Clone, PartialEq)]
pub enum MessageKind {
    StateBroadcast { origin: usize, state: RobotState },
    NuRoute { center: usize, destination: usize, nu: Nu },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Message {
    pub kind: MessageKind,
    pub remaining_hops: usize,
}

impl Message {
    fn key(&self) -> MessageKey {
        match &self.kind {
            MessageKind::StateBroadcast { origin, .. } => MessageKey::State(*origin),
            MessageKind::NuRoute {
                center, destination, ..
            } => MessageKey::Nu(*center, *destination),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum MessageKey {
    State(usize),
    Nu(usize, usize),
}

/// One transmission. `receiver` is `None` for state floods and the
/// addressee for `nu` messages.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LogEntry {
    pub tick: usize,
    pub sender: usize,
    pub receiver: Option<usize>,
    pub kind: &'static str,
    /// Origin of a state or center of a `nu`.
    pub source: usize,
    pub hops_remaining: usize,
}

/// Outcome of one protocol round.
#[derive(Debug, Clone, PartialEq)]
pub struct RoundResult {
    /// States held by each robot at round end, own state included.
    pub received_states: Vec<BTreeMap<usize, RobotState>>,
    /// `nu_ji` held by robot `i`, ascending in `j`.
    pub delivered: Vec<Vec<(usize, Nu)>>,
    /// Terms computed by each center with a finite radius, ascending.
    pub terms: Vec<SubframeworkTerms>,
    /// Tick at which the last member of each subframework received its `nu`.
    pub completion: BTreeMap<usize, usize>,
    /// Transmissions per robot.
    pub transmissions: Vec<usize>,
    pub log: Vec<LogEntry>,
    pub ticks: usize,
}

impl RoundResult {
    /// Accumulated rigidity gradient per robot from delivered `nu` values.
    pub fn gradient(&self, dim: usize) -> (Vec<Point>, Vec<f64>) {
        self.delivered
            .iter()
            .map(|list| {
                let mut refs: Vec<(usize, &Nu)> = list.iter().map(|(c, nu)| (*c, nu)).collect();
                sum_contributions(dim, &mut refs)
            })
            .unzip()
    }
}

/// Runs one round over `graph`. `compute` is what a center does once it
/// holds its members' states: given the center, its radius and the received
/// states, it returns the subframework terms.
pub fn run_round<F>(graph: &Graph, dec: &Decomposition, states: &[RobotState], compute: F) -> Result<RoundResult>
where
    F: Fn(usize, usize, &BTreeMap<usize, RobotState>) -> Result<SubframeworkTerms>,
{
    let n = graph.vertex_count();
    if dec.vertex_count() != n || states.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: dec.vertex_count().min(states.len()),
        });
    }

    let mut received: Vec<BTreeMap<usize, RobotState>> = vec![BTreeMap::new(); n];
    // hop distance at which each state arrived, per receiver
    let mut arrival_hops: Vec<BTreeMap<usize, usize>> = vec![BTreeMap::new(); n];
    let mut seen: Vec<BTreeSet<MessageKey>> = vec![BTreeSet::new(); n];
    let mut delivered: Vec<Vec<(usize, Nu)>> = vec![Vec::new(); n];
    let mut outbox: Vec<Vec<Message>> = vec![Vec::new(); n];
    let mut transmissions = vec![0; n];
    let mut log = Vec::new();
    let mut fired: BTreeMap<usize, SubframeworkTerms> = BTreeMap::new();
    let mut completion: BTreeMap<usize, usize> = BTreeMap::new();

    for (i, s) in states.iter().enumerate() {
        received[i].insert(i, s.clone());
        arrival_hops[i].insert(i, 0);
        seen[i].insert(MessageKey::State(i));
        if dec.q[i] > 0 {
            outbox[i].push(Message {
                kind: MessageKind::StateBroadcast {
                    origin: i,
                    state: s.clone(),
                },
                remaining_hops: dec.q[i],
            });
        }
    }

    let mut tick = 0;
    fire_ready_centers(
        tick,
        dec,
        &received,
        &arrival_hops,
        &compute,
        &mut fired,
        &mut outbox,
        &mut delivered,
        &mut completion,
    )?;

    while outbox.iter().any(|o| !o.is_empty()) {
        tick += 1;
        let sending = std::mem::replace(&mut outbox, vec![Vec::new(); n]);
        for (sender, msgs) in sending.into_iter().enumerate() {
            for msg in msgs {
                transmissions[sender] += 1;
                let (kind, source, receiver) = match &msg.kind {
                    MessageKind::StateBroadcast { origin, .. } => ("state", *origin, None),
                    MessageKind::NuRoute {
                        center, destination, ..
                    } => ("nu", *center, Some(*destination)),
                };
                log.push(LogEntry {
                    tick,
                    sender,
                    receiver,
                    kind,
                    source,
                    hops_remaining: msg.remaining_hops,
                });
                seen[sender].insert(msg.key());
                let remaining = msg.remaining_hops - 1;
                for &r in graph.neighbors(sender) {
                    if !seen[r].insert(msg.key()) {
                        continue;
                    }
                    match &msg.kind {
                        MessageKind::StateBroadcast { origin, state } => {
                            received[r].insert(*origin, state.clone());
                            arrival_hops[r].insert(*origin, dec.q[*origin] - remaining);
                        }
                        MessageKind::NuRoute {
                            center, destination, nu,
                        } => {
                            if *destination == r {
                                delivered[r].push((*center, nu.clone()));
                                let done = completion.entry(*center).or_insert(0);
                                *done = (*done).max(tick);
                            }
                        }
                    }
                    if remaining > 0 {
                        outbox[r].push(Message {
                            kind: msg.kind.clone(),
                            remaining_hops: remaining,
                        });
                    }
                }
            }
        }
        fire_ready_centers(
            tick,
            dec,
            &received,
            &arrival_hops,
            &compute,
            &mut fired,
            &mut outbox,
            &mut delivered,
            &mut completion,
        )?;
    }

    for (j, ball) in dec.balls.iter().enumerate() {
        if let Some(ball) = ball {
            if !fired.contains_key(&j) {
                let member = ball.iter().copied().find(|l| !received[j].contains_key(l)).unwrap_or(j);
                return Err(Error::StaleDecomposition { center: j, member });
            }
        }
    }
    for list in &mut delivered {
        list.sort_by_key(|(c, _)| *c);
    }

    Ok(RoundResult {
        received_states: received,
        delivered,
        terms: fired.into_values().collect(),
        completion,
        transmissions,
        log,
        ticks: tick,
    })
}

#[allow(clippy::too_many_arguments)]
fn fire_ready_centers<F>(
    tick: usize,
    dec: &Decomposition,
    received: &[BTreeMap<usize, RobotState>],
    arrival_hops: &[BTreeMap<usize, usize>],
    compute: &F,
    fired: &mut BTreeMap<usize, SubframeworkTerms>,
    outbox: &mut [Vec<Message>],
    delivered: &mut [Vec<(usize, Nu)>],
    completion: &mut BTreeMap<usize, usize>,
) -> Result<()>
where
    F: Fn(usize, usize, &BTreeMap<usize, RobotState>) -> Result<SubframeworkTerms>,
{
    for (j, ball) in dec.balls.iter().enumerate() {
        let Some(ball) = ball else { continue };
        if fired.contains_key(&j) || !ball.iter().all(|l| received[j].contains_key(l)) {
            continue;
        }
        let radius = dec.r_star[j].finite().expect("balls exist only for finite radii");
        let terms = compute(j, radius, &received[j])?;
        completion.entry(j).or_insert(tick);
        for (&l, nu) in terms.members.iter().zip(&terms.nu) {
            if l == j {
                delivered[j].push((j, nu.clone()));
                continue;
            }
            let hops = *arrival_hops[j].get(&l).ok_or(Error::StaleDecomposition { center: j, member: l })?;
            outbox[j].push(Message {
                kind: MessageKind::NuRoute {
                    center: j,
                    destination: l,
                    nu: nu.clone(),
                },
                remaining_hops: hops,
            });
        }
        fired.insert(j, terms);
    }
    Ok(())
}

/// Closed-form transmissions per robot over the routing graph `graph`:
/// states `l` with `delta_li < q_l`, plus `nu` pairs `(j, l)` with `l` a
/// member of ball `j` and `delta_ji < delta_jl`.
pub fn communication_cost(graph: &Graph, dec: &Decomposition) -> Vec<usize> {
    let dist = graph.distances();
    let n = graph.vertex_count();
    (0..n)
        .map(|i| {
            let states = (0..n)
                .filter(|&l| dist.get(l, i).is_some_and(|d| d < dec.q[l]))
                .count();
            let nus: usize = dec
                .balls
                .iter()
                .enumerate()
                .filter_map(|(j, b)| b.as_ref().map(|b| (j, b)))
                .map(|(j, ball)| match dist.get(j, i) {
                    Some(dji) => ball
                        .iter()
                        .filter(|&&l| dist.get(j, l).is_some_and(|djl| dji < djl))
                        .count(),
                    None => 0,
                })
                .sum();
            states + nus
        })
        .collect()
}

/// Delay and complexity metrics of the protocol.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProtocolMetrics {
    /// `H_j = 2 r*_j` (`None` for infinite radii).
    pub round_trip: Vec<Option<usize>>,
    /// `C_i`.
    pub cost: Vec<usize>,
    /// `h_i = H_i / diameter`.
    pub delay: Vec<Option<f64>>,
    /// `c_i = C_i / (1 + |N_i|)`.
    pub complexity: Vec<f64>,
    pub diameter: usize,
}

/// Metrics with the routing graph `routing` and the framework (sensing)
/// graph `framework`, whose diameter and neighborhoods normalize the values.
pub fn metrics(routing: &Graph, framework: &Graph, dec: &Decomposition) -> Result<ProtocolMetrics> {
    let diameter = framework.diameter()?;
    let round_trip: Vec<Option<usize>> = dec.r_star.iter().map(|r| r.finite().map(|r| 2 * r)).collect();
    let cost = communication_cost(routing, dec);
    let delay = round_trip
        .iter()
        .map(|h| h.map(|h| h as f64 / diameter.max(1) as f64))
        .collect();
    let complexity = cost
        .iter()
        .enumerate()
        .map(|(i, &c)| c as f64 / (1 + framework.degree(i)) as f64)
        .collect();
    Ok(ProtocolMetrics {
        round_trip,
        cost,
        delay,
        complexity,
        diameter,
    })
}

/// Graph over which protocol messages travel.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Routing {
    #[default]
    Sensing,
    Comm,
}

/// How subframework member sets evolve while radii stay frozen.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Membership {
    /// Hop balls recomputed on the current sensing graph.
    #[default]
    Ball,
    /// Member sets of the initial decomposition.
    Frozen,
}

/// Rigidity gradient obtained by running one protocol round on the current
/// states with frozen minimal radii. Memberships and emission radii are
/// recomputed on the current sensing graph.
pub fn distributed_rigidity_grad(
    states: &[RobotState],
    radii: &[Radius],
    params: &ControllerParams,
    routing: Routing,
) -> Result<(RigidityGradient, RoundResult)> {
    let sensing = undirected_sensing(states)?;
    let dec = Decomposition::from_radii(&sensing, radii.to_vec());
    let graph = routing_graph(sensing, states, params, routing);
    let compute = |j: usize, r: usize, known: &BTreeMap<usize, RobotState>| {
        let sub = LocalSubframework::build(j, r, known, params.weight_support, params.comm_range);
        evaluate(&sub, known, &params.weights, params.gains.lambda0)
    };
    finish_round(&graph, &dec, states, compute)
}

/// As [`distributed_rigidity_grad`] with the member sets of `initial` kept
/// fixed. Emission radii follow the current hop distances of the routing
/// graph so every member's state still reaches its center.
pub fn distributed_rigidity_grad_frozen(
    states: &[RobotState],
    initial: &Decomposition,
    params: &ControllerParams,
    routing: Routing,
) -> Result<(RigidityGradient, RoundResult)> {
    let sensing = undirected_sensing(states)?;
    let graph = routing_graph(sensing, states, params, routing);
    let dec = Decomposition::with_members(&graph.distances(), initial.r_star.clone(), initial.balls.clone());
    let compute = |j: usize, r: usize, known: &BTreeMap<usize, RobotState>| {
        let members = initial.balls[j].clone().unwrap_or_default();
        let sub = LocalSubframework::with_members(j, r, members, known, params.weight_support, params.comm_range);
        evaluate(&sub, known, &params.weights, params.gains.lambda0)
    };
    finish_round(&graph, &dec, states, compute)
}

fn routing_graph(sensing: Graph, states: &[RobotState], params: &ControllerParams, routing: Routing) -> Graph {
    match routing {
        Routing::Sensing => sensing,
        Routing::Comm => comm_graph_of(states, params.comm_range),
    }
}

fn finish_round<F>(
    graph: &Graph,
    dec: &Decomposition,
    states: &[RobotState],
    compute: F,
) -> Result<(RigidityGradient, RoundResult)>
where
    F: Fn(usize, usize, &BTreeMap<usize, RobotState>) -> Result<SubframeworkTerms>,
{
    let round = run_round(graph, dec, states, compute)?;
    let dim = states.first().map_or(0, RobotState::dim);
    let (position, yaw) = round.gradient(dim);
    let grad = RigidityGradient {
        terms: round.terms.clone(),
        position,
        yaw,
    };
    Ok((grad, round))
}
