//! Rigidity-maintenance cost over all minimal subframeworks and its gradient.
//!
//! Each subframework `j` contributes `-sum_k log(lambda_k(B_j) - lambda_0)`
//! over its nonzero eigenvalues `k >= d+2`. The gradient with respect to a
//! member's state is
//!
//! ```text
//! nu_ji = sum_k 1/(lambda_0 - lambda_k) * v_k^T (dB_j/dx_i) v_k
//! ```
//!
//! and `v^T B v = sum_e w_e (v_a - v_b)^T P_e (v_a - v_b)`, so only edges
//! incident to `i` enter `nu_ji`. For an edge with bearing `b` from `a` to
//! `b`, length `l` and `delta = v_a - v_b`:
//!
//! ```text
//! d/dp_b [delta^T P delta] = -2 (b . delta) P delta / l = -d/dp_a [...]
//! ```
//!
//! and the weight partials come from the sensing model.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::framework::Point;
use crate::graph::Graph;
use crate::sensing::{edge_weight_gradient, sees, RobotState, WeightParams, WeightSupport};
use crate::spectral::Spectrum;
use crate::subframework::{ball_vertices, Radius};

/// Read access to robot states by global id.
pub trait StateSource {
    /// Known ids, ascending.
    fn ids(&self) -> Vec<usize>;
    fn state(&self, id: usize) -> Option<&RobotState>;
}

impl StateSource for [RobotState] {
    fn ids(&self) -> Vec<usize> {
        (0..self.len()).collect()
    }

    fn state(&self, id: usize) -> Option<&RobotState> {
        self.get(id)
    }
}

impl StateSource for Vec<RobotState> {
    fn ids(&self) -> Vec<usize> {
        self.as_slice().ids()
    }

    fn state(&self, id: usize) -> Option<&RobotState> {
        self.get(id)
    }
}

impl StateSource for BTreeMap<usize, RobotState> {
    fn ids(&self) -> Vec<usize> {
        self.keys().copied().collect()
    }

    fn state(&self, id: usize) -> Option<&RobotState> {
        self.get(&id)
    }
}

/// Topology of one ball subframework: members, sensing graph, and the pairs
/// carrying weights in its Laplacian.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalSubframework {
    pub center: usize,
    pub radius: usize,
    /// Global ids, ascending. Local index `k` is `members[k]`.
    pub members: Vec<usize>,
    /// Undirected sensing graph among members (local indices).
    pub graph: Graph,
    /// Weighted pairs (local indices, canonical order).
    pub weighted: Vec<(usize, usize)>,
}

impl LocalSubframework {
    /// Builds the ball of `radius` hops around `center` in the sensing graph
    /// of the robots known to `source`.
    pub fn build<S: StateSource + ?Sized>(
        center: usize,
        radius: usize,
        source: &S,
        support: WeightSupport,
        comm_range: f64,
    ) -> Self {
        let ids = source.ids();
        let known = known_sensing_graph(&ids, source);
        let c = ids.binary_search(&center).expect("center state must be known");
        let members: Vec<usize> = ball_vertices(&known, c, radius).iter().map(|&k| ids[k]).collect();
        Self::with_members(center, radius, members, source, support, comm_range)
    }

    /// Subframework on a given member set (global ids), e.g. one frozen at
    /// the start of a mission.
    pub fn with_members<S: StateSource + ?Sized>(
        center: usize,
        radius: usize,
        mut members: Vec<usize>,
        source: &S,
        support: WeightSupport,
        comm_range: f64,
    ) -> Self {
        members.sort_unstable();
        members.dedup();
        let states: Vec<&RobotState> = members
            .iter()
            .map(|&k| source.state(k).expect("member state must be known"))
            .collect();
        let graph = known_sensing_graph(&members, source);
        let m = members.len();
        let all = (0..m).flat_map(|a| ((a + 1)..m).map(move |b| (a, b)));
        let weighted = match support {
            WeightSupport::Edges => graph.edges().to_vec(),
            WeightSupport::CommPairs => all
                .filter(|&(a, b)| (&states[a].p - &states[b].p).norm() <= comm_range)
                .collect(),
            WeightSupport::AllPairs => all.collect(),
        };
        Self {
            center,
            radius,
            members,
            graph,
            weighted,
        }
    }

    pub fn local_index(&self, global: usize) -> Option<usize> {
        self.members.binary_search(&global).ok()
    }

    /// Hop diameter of the member sensing graph (`None` if disconnected).
    pub fn diameter(&self) -> Option<usize> {
        self.graph.diameter().ok()
    }
}

fn known_sensing_graph<S: StateSource + ?Sized>(ids: &[usize], source: &S) -> Graph {
    let states: Vec<&RobotState> = ids.iter().map(|&k| source.state(k).expect("state must be known")).collect();
    let n = ids.len();
    let mut edges = Vec::new();
    for a in 0..n {
        for b in (a + 1)..n {
            if sees(states[a], states[b]) || sees(states[b], states[a]) {
                edges.push((a, b));
            }
        }
    }
    Graph::new(n, edges).expect("pairs a < b are valid")
}

/// Subframeworks for every finite frozen radius on the current states.
pub fn build_subframeworks(
    states: &[RobotState],
    radii: &[Radius],
    support: WeightSupport,
    comm_range: f64,
) -> Vec<LocalSubframework> {
    radii
        .iter()
        .enumerate()
        .filter_map(|(j, r)| r.finite().map(|r| LocalSubframework::build(j, r, states, support, comm_range)))
        .collect()
}

/// Gradient of one subframework's cost with respect to a member's state.
#[derive(Debug, Clone, PartialEq)]
pub struct Nu {
    pub position: Point,
    pub yaw: f64,
}

/// Everything a center computes for its subframework.
#[derive(Debug, Clone, PartialEq)]
pub struct SubframeworkTerms {
    pub center: usize,
    pub members: Vec<usize>,
    /// Ascending eigenvalues of the weighted Laplacian.
    pub eigenvalues: Vec<f64>,
    /// `-sum_{k >= d+2} log(lambda_k - lambda_0)`.
    pub cost: f64,
    /// `nu[k]` is the gradient with respect to `members[k]`.
    pub nu: Vec<Nu>,
}

impl SubframeworkTerms {
    pub fn rigidity_eigenvalue(&self, dim: usize) -> f64 {
        self.eigenvalues.get(dim + 1).copied().unwrap_or(0.0)
    }
}

/// Weighted Laplacian spectrum, cost and per-member gradients.
pub fn evaluate<S: StateSource + ?Sized>(
    sub: &LocalSubframework,
    source: &S,
    params: &WeightParams,
    lambda0: f64,
) -> Result<SubframeworkTerms> {
    let states: Vec<RobotState> = sub
        .members
        .iter()
        .map(|&g| {
            source.state(g).cloned().ok_or(Error::StaleDecomposition {
                center: sub.center,
                member: g,
            })
        })
        .collect::<Result<_>>()?;
    let m = states.len();
    let dim = states[0].dim();
    let floor_breach = |eigenvalue| Error::RigidityFloorBreached {
        center: sub.center,
        eigenvalue,
        floor: lambda0,
    };
    if dim * m < dim + 2 {
        return Err(floor_breach(0.0));
    }

    struct EdgeData {
        a: usize,
        b: usize,
        bearing: Point,
        length: f64,
        weight: f64,
        dp_a: Point,
        dp_b: Point,
        dpsi_a: f64,
        dpsi_b: f64,
    }
    let edges: Vec<EdgeData> = sub
        .weighted
        .iter()
        .map(|&(a, b)| {
            let wg = edge_weight_gradient(a, b, &states, params);
            let diff = &states[b].p - &states[a].p;
            let length = diff.norm();
            EdgeData {
                a,
                b,
                bearing: diff / length,
                length,
                weight: wg.weight,
                dp_a: wg.dp_i,
                dp_b: wg.dp_j,
                dpsi_a: wg.dpsi_i,
                dpsi_b: wg.dpsi_j,
            }
        })
        .collect();

    let mut lap = nalgebra::DMatrix::zeros(dim * m, dim * m);
    for e in &edges {
        let block = (nalgebra::DMatrix::identity(dim, dim) - &e.bearing * e.bearing.transpose()) * e.weight;
        for (r, c, sign) in [(e.a, e.a, 1.0), (e.b, e.b, 1.0), (e.a, e.b, -1.0), (e.b, e.a, -1.0)] {
            let mut view = lap.view_mut((r * dim, c * dim), (dim, dim));
            view.zip_apply(&block, |x, y| *x += sign * y);
        }
    }
    let spectrum = Spectrum::of(&lap)?;
    let rigidity = spectrum.values[dim + 1];
    if rigidity <= lambda0 {
        return Err(floor_breach(rigidity));
    }

    let mut cost = 0.0;
    let mut nu = vec![
        Nu {
            position: Point::zeros(dim),
            yaw: 0.0,
        };
        m
    ];
    for k in (dim + 1)..(dim * m) {
        let lambda = spectrum.values[k];
        cost -= (lambda - lambda0).ln();
        let coeff = 1.0 / (lambda0 - lambda);
        let v = spectrum.vectors.column(k);
        for e in &edges {
            let delta = v.rows(e.a * dim, dim) - v.rows(e.b * dim, dim);
            let along = e.bearing.dot(&delta);
            let p_delta = &delta - &e.bearing * along;
            let quad = delta.norm_squared() - along * along;
            // d quad / d p_b = -2 along P delta / l
            let dquad_b = &p_delta * (-2.0 * along / e.length);
            let grad_b = &e.dp_b * quad + &dquad_b * e.weight;
            let grad_a = &e.dp_a * quad - &dquad_b * e.weight;
            nu[e.a].position.axpy(coeff, &grad_a, 1.0);
            nu[e.b].position.axpy(coeff, &grad_b, 1.0);
            nu[e.a].yaw += coeff * e.dpsi_a * quad;
            nu[e.b].yaw += coeff * e.dpsi_b * quad;
        }
    }

    Ok(SubframeworkTerms {
        center: sub.center,
        members: sub.members.clone(),
        eigenvalues: spectrum.values,
        cost,
        nu,
    })
}

/// Total rigidity cost over fixed subframework topologies.
pub fn rigidity_cost(
    subs: &[LocalSubframework],
    states: &[RobotState],
    params: &WeightParams,
    lambda0: f64,
) -> Result<f64> {
    let mut total = 0.0;
    for sub in subs {
        total += evaluate(sub, states, params, lambda0)?.cost;
    }
    Ok(total)
}

/// Per-center terms plus the accumulated gradient of the rigidity cost.
#[derive(Debug, Clone, PartialEq)]
pub struct RigidityGradient {
    pub terms: Vec<SubframeworkTerms>,
    pub position: Vec<Point>,
    pub yaw: Vec<f64>,
}

impl RigidityGradient {
    /// All `nu_ji` keyed by `(center j, member i)`.
    pub fn nu_map(&self) -> BTreeMap<(usize, usize), Nu> {
        self.terms
            .iter()
            .flat_map(|t| t.members.iter().zip(&t.nu).map(|(&i, nu)| ((t.center, i), nu.clone())))
            .collect()
    }
}

/// Evaluates every subframework (scheduled by `exec`) and sums the gradient
/// contributions for each robot in ascending center order.
pub fn rigidity_grad(
    subs: &[LocalSubframework],
    states: &[RobotState],
    params: &WeightParams,
    lambda0: f64,
    exec: Execution,
) -> Result<RigidityGradient> {
    let terms = exec
        .map_slice(subs, |sub| evaluate(sub, states, params, lambda0))
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    let dim = states.first().map_or(0, RobotState::dim);
    let mut per_robot: Vec<Vec<(usize, &Nu)>> = vec![Vec::new(); states.len()];
    for t in &terms {
        for (&i, nu) in t.members.iter().zip(&t.nu) {
            per_robot[i].push((t.center, nu));
        }
    }
    let (position, yaw) = per_robot
        .iter_mut()
        .map(|list| sum_contributions(dim, list))
        .unzip();
    Ok(RigidityGradient { terms, position, yaw })
}

/// Sum of `nu` contributions in ascending center order.
pub fn sum_contributions(dim: usize, list: &mut [(usize, &Nu)]) -> (Point, f64) {
    list.sort_by_key(|(c, _)| *c);
    let mut p = Point::zeros(dim);
    let mut yaw = 0.0;
    for (_, nu) in list.iter() {
        p += &nu.position;
        yaw += nu.yaw;
    }
    (p, yaw)
}
