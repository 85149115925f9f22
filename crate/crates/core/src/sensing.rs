//! Camera sensing model: visibility graphs, the radio disk graph, and smooth
//! sigmoid edge weights with their analytic partial derivatives.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::framework::{point_serde, Point};
use crate::graph::{DiGraph, Graph};
use crate::spectral::EdgeWeights;

/// Exponent clamp for the sigmoid.
const EXP_CLAMP: f64 = 60.0;

/// Position, camera yaw, camera range and field-of-view half-angle cosine.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RobotState {
    #[serde(with = "point_serde")]
    pub p: Point,
    pub psi: f64,
    pub range: f64,
    pub fov_cos: f64,
}

impl RobotState {
    pub fn new(p: Point, psi: f64, range: f64, fov_cos: f64) -> Self {
        Self {
            p,
            psi,
            range,
            fov_cos,
        }
    }

    pub fn dim(&self) -> usize {
        self.p.len()
    }

    pub fn axis(&self) -> Point {
        optical_axis(self.psi, self.dim()).expect("state dimension validated")
    }
}

/// Sigmoid slopes and midpoint factors of the edge-weight model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct WeightParams {
    pub range_slope: f64,
    /// Range sigmoid midpoint as a fraction of the camera range.
    pub range_midpoint: f64,
    pub fov_slope: f64,
    /// Field-of-view sigmoid midpoint as a multiple of the FOV cosine.
    pub fov_midpoint: f64,
}

impl Default for WeightParams {
    fn default() -> Self {
        Self {
            range_slope: 10.0,
            range_midpoint: 0.9,
            fov_slope: 40.0,
            fov_midpoint: 1.2,
        }
    }
}

/// Pairs on which edge weights are evaluated.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WeightSupport {
    /// Edges of the undirected sensing graph.
    #[default]
    Edges,
    /// Every communication-graph pair.
    CommPairs,
    /// Every pair; weights then vary continuously with the states.
    AllPairs,
}

/// Camera optical axis `(cos psi, sin psi[, 0])`.
pub fn optical_axis(psi: f64, dim: usize) -> Result<Point> {
    match dim {
        2 => Ok(Point::from_vec(vec![psi.cos(), psi.sin()])),
        3 => Ok(Point::from_vec(vec![psi.cos(), psi.sin(), 0.0])),
        _ => Err(Error::UnsupportedDimension(dim)),
    }
}

fn axis_derivative(psi: f64, dim: usize) -> Point {
    let mut v = Point::zeros(dim);
    v[0] = -psi.sin();
    v[1] = psi.cos();
    v
}

/// `1 / (1 + exp(s (m - x)))`, exponent clamped to +-60.
pub fn sigmoid(x: f64, s: f64, m: f64) -> f64 {
    1.0 / (1.0 + (s * (m - x)).clamp(-EXP_CLAMP, EXP_CLAMP).exp())
}

/// `1 - sigmoid(x, s, m)` evaluated without cancellation.
fn sigmoid_complement(x: f64, s: f64, m: f64) -> f64 {
    1.0 / (1.0 + (s * (x - m)).clamp(-EXP_CLAMP, EXP_CLAMP).exp())
}

fn validate(states: &[RobotState]) -> Result<usize> {
    let dim = states.first().map_or(3, RobotState::dim);
    optical_axis(0.0, dim)?;
    for (i, s) in states.iter().enumerate() {
        if s.dim() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: s.dim(),
            });
        }
        for (j, t) in states.iter().enumerate().skip(i + 1) {
            if s.p == t.p {
                return Err(Error::DegenerateRealization(format!(
                    "robots {i} and {j} share a position"
                )));
            }
        }
    }
    Ok(dim)
}

/// Whether robot `i` sees robot `j`: within range and inside the FOV cone.
pub fn sees(a: &RobotState, b: &RobotState) -> bool {
    let diff = &b.p - &a.p;
    let dist = diff.norm();
    dist > 0.0 && dist <= a.range && a.axis().dot(&diff) / dist >= a.fov_cos
}

/// Directed sensing graph.
pub fn sensing_graph(states: &[RobotState]) -> Result<DiGraph> {
    validate(states)?;
    let n = states.len();
    let arcs = (0..n)
        .flat_map(|i| (0..n).map(move |j| (i, j)))
        .filter(|&(i, j)| i != j && sees(&states[i], &states[j]))
        .collect();
    Ok(DiGraph::new(n, arcs))
}

/// Undirected sensing graph: `{i, j}` iff either robot sees the other.
pub fn undirected_sensing(states: &[RobotState]) -> Result<Graph> {
    Ok(sensing_graph(states)?.to_undirected())
}

/// Disk graph of radius `comm_range` (closed condition).
pub fn comm_graph(positions: &[Point], comm_range: f64) -> Graph {
    let n = positions.len();
    let edges: Vec<_> = (0..n)
        .flat_map(|i| ((i + 1)..n).map(move |j| (i, j)))
        .filter(|&(i, j)| (&positions[i] - &positions[j]).norm() <= comm_range)
        .collect();
    Graph::new(n, edges).expect("pairs i < j are valid edges")
}

pub fn comm_graph_of(states: &[RobotState], comm_range: f64) -> Graph {
    let positions: Vec<Point> = states.iter().map(|s| s.p.clone()).collect();
    comm_graph(&positions, comm_range)
}

/// Edge weight and its partial derivatives with respect to both endpoints.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightGradient {
    pub weight: f64,
    pub dp_i: Point,
    pub dp_j: Point,
    pub dpsi_i: f64,
    pub dpsi_j: f64,
}

/// Smooth edge weight `w_ij = wR_ij wF_ij + wR_ji wF_ji`.
pub fn edge_weight(i: usize, j: usize, states: &[RobotState], params: &WeightParams) -> f64 {
    edge_weight_gradient(i, j, states, params).weight
}

/// Edge weight together with its analytic partials. The value is computed
/// in canonical `(min, max)` orientation so that `w_ij == w_ji` exactly.
pub fn edge_weight_gradient(i: usize, j: usize, states: &[RobotState], params: &WeightParams) -> WeightGradient {
    assert_ne!(i, j, "edge weight needs two distinct robots");
    let (a, b) = (i.min(j), i.max(j));
    let g = pair_gradient(&states[a], &states[b], params);
    if a == i {
        g
    } else {
        WeightGradient {
            weight: g.weight,
            dp_i: g.dp_j,
            dp_j: g.dp_i,
            dpsi_i: g.dpsi_j,
            dpsi_j: g.dpsi_i,
        }
    }
}

fn pair_gradient(si: &RobotState, sj: &RobotState, params: &WeightParams) -> WeightGradient {
    let dim = si.dim();
    let diff = &sj.p - &si.p;
    let dist = diff.norm();
    let b = &diff / dist;
    let proj_over_d = |v: &Point| -> Point { (v - &b * b.dot(v)) / dist };

    // range terms, d wR / d dist = -s sigma (1 - sigma)
    let range_term = |range: f64| {
        let (s, m) = (params.range_slope, params.range_midpoint * range);
        let w = sigmoid_complement(dist, s, m);
        let sig = 1.0 - w;
        (w, -s * sig * w)
    };
    let (wr_ij, dwr_ij) = range_term(si.range);
    let (wr_ji, dwr_ji) = range_term(sj.range);

    // field-of-view terms on c_i = n_i . b_ij and c_j = n_j . b_ji
    let fov_term = |c: f64, fov_cos: f64| {
        let (s, m) = (params.fov_slope, params.fov_midpoint * fov_cos);
        let w = sigmoid(c, s, m);
        (w, s * w * (1.0 - w))
    };
    let ni = si.axis();
    let nj = sj.axis();
    let ci = ni.dot(&b);
    let cj = -nj.dot(&b);
    let (wf_ij, dwf_ij) = fov_term(ci, si.fov_cos);
    let (wf_ji, dwf_ji) = fov_term(cj, sj.fov_cos);

    let weight = wr_ij * wf_ij + wr_ji * wf_ji;

    // d dist / d p_j = b, d c_i / d p_j = P n_i / d, d c_j / d p_j = -P n_j / d
    let dci_dpj = proj_over_d(&ni);
    let dcj_dpj = -proj_over_d(&nj);
    let dp_j = &b * (dwr_ij * wf_ij + dwr_ji * wf_ji)
        + &dci_dpj * (wr_ij * dwf_ij)
        + &dcj_dpj * (wr_ji * dwf_ji);
    // every term is odd under swapping the endpoint being moved
    let dp_i = -&dp_j;

    let dpsi_i = wr_ij * dwf_ij * axis_derivative(si.psi, dim).dot(&b);
    let dpsi_j = -wr_ji * dwf_ji * axis_derivative(sj.psi, dim).dot(&b);

    WeightGradient {
        weight,
        dp_i,
        dp_j,
        dpsi_i,
        dpsi_j,
    }
}

/// Weights evaluated on every edge of `graph`.
pub fn weights_on(graph: &Graph, states: &[RobotState], params: &WeightParams) -> EdgeWeights {
    EdgeWeights::from_fn(graph, |i, j| edge_weight(i, j, states, params))
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::dvector;
    use std::f64::consts::{FRAC_PI_2, PI};

    fn robot(x: f64, y: f64, psi: f64) -> RobotState {
        RobotState::new(dvector![x, y, 0.0], psi, 20.0, 0.5)
    }

    #[test]
    fn axis_examples() {
        assert_eq!(optical_axis(0.0, 3).unwrap(), dvector![1.0, 0.0, 0.0]);
        let a = optical_axis(FRAC_PI_2, 2).unwrap();
        assert!((a - dvector![0.0, 1.0]).norm() < 1e-15);
        assert_eq!(optical_axis(0.0, 4), Err(Error::UnsupportedDimension(4)));
    }

    #[test]
    fn facing_robots_see_each_other() {
        let s = [robot(0.0, 0.0, 0.0), robot(5.0, 0.0, PI)];
        let dg = sensing_graph(&s).unwrap();
        assert!(dg.has_arc(0, 1) && dg.has_arc(1, 0));
        assert_eq!(undirected_sensing(&s).unwrap().edge_count(), 1);
    }

    #[test]
    fn one_sided_visibility_still_gives_an_edge() {
        // robot 1 faces away from 0; robot 0 faces 1
        let s = [robot(0.0, 0.0, 0.0), robot(5.0, 0.0, 0.0)];
        let dg = sensing_graph(&s).unwrap();
        assert!(dg.has_arc(0, 1));
        assert!(!dg.has_arc(1, 0));
        assert_eq!(undirected_sensing(&s).unwrap().edges(), &[(0, 1)]);
        let w = edge_weight(0, 1, &s, &WeightParams::default());
        assert!((w - 1.0).abs() < 1e-3, "w = {w}");
    }

    #[test]
    fn out_of_range_robots_are_disconnected() {
        let s = [robot(0.0, 0.0, 0.0), robot(25.0, 0.0, PI)];
        assert_eq!(undirected_sensing(&s).unwrap().edge_count(), 0);
        assert!(edge_weight(0, 1, &s, &WeightParams::default()) < 1e-3);
    }

    #[test]
    fn comm_graph_is_closed() {
        let p = [dvector![0.0, 0.0], dvector![3.0, 4.0]];
        assert_eq!(comm_graph(&p, 5.0).edge_count(), 1);
        assert_eq!(comm_graph(&p, 1e-9).edge_count(), 0);
    }

    #[test]
    fn sigmoid_examples() {
        assert_eq!(sigmoid(3.0, 10.0, 3.0), 0.5);
        assert_eq!(sigmoid(1e6, 10.0, 3.0), 1.0);
        let v = sigmoid(20.0, 10.0, 18.0);
        assert!((v - 1.0 / (1.0 + (-20.0f64).exp())).abs() < 1e-16);
        assert!(sigmoid(-1e300, 10.0, 0.0) > 0.0);
    }

    #[test]
    fn mutual_frontal_weight_approaches_two() {
        let mut s = [robot(0.0, 0.0, 0.0), robot(1e-3, 0.0, PI)];
        s[0].range = 20.0;
        let w = edge_weight(0, 1, &s, &WeightParams::default());
        let expected = 2.0 / (1.0 + (-16.0f64).exp());
        assert!((w - expected).abs() < 1e-9, "w = {w}");
    }

    #[test]
    fn weight_is_symmetric() {
        let s = [robot(0.3, 1.0, 0.4), robot(7.0, -2.0, 2.9)];
        let p = WeightParams::default();
        assert_eq!(edge_weight(0, 1, &s, &p), edge_weight(1, 0, &s, &p));
    }
}
