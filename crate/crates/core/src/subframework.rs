//! Ball subframeworks, minimal radii and the subframework-based rigidity test.
//!
//! A framework is bearing rigid iff it is connected and every vertex has a
//! finite minimal radius: the smallest hop radius whose ball subframework is
//! itself rigid. The decomposition also records, for each vertex, which balls
//! contain it (inverse membership) and how far its state must travel for
//! every such ball center to receive it (emission radius).

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::framework::{Framework, Point};
use crate::graph::{Graph, HopDistances};
use crate::spectral::{is_ibr_spectral, EdgeWeights};

/// Hop radius that may be infinite.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Radius {
    Finite(usize),
    Infinite,
}

impl Radius {
    pub fn is_finite(self) -> bool {
        matches!(self, Radius::Finite(_))
    }

    pub fn finite(self) -> Option<usize> {
        match self {
            Radius::Finite(r) => Some(r),
            Radius::Infinite => None,
        }
    }

    /// Whether a vertex at `hops` lies within this radius.
    pub fn covers(self, hops: usize) -> bool {
        match self {
            Radius::Finite(r) => hops <= r,
            Radius::Infinite => true,
        }
    }
}

impl fmt::Display for Radius {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Radius::Finite(r) => write!(f, "{r}"),
            Radius::Infinite => f.write_str("inf"),
        }
    }
}

impl Serialize for Radius {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.finite().serialize(s)
    }
}

impl<'de> Deserialize<'de> for Radius {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        Ok(Option::<usize>::deserialize(d)?.map_or(Radius::Infinite, Radius::Finite))
    }
}

/// Which rigidity notion a minimal-radius search uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum RigidityCriterion {
    /// Spectral bearing rigidity test with unit weights.
    #[default]
    Bearing,
    /// Distance rigidity matrix rank test.
    Distance,
}

impl RigidityCriterion {
    pub fn holds(self, f: &Framework, tol: f64) -> bool {
        match self {
            RigidityCriterion::Bearing => {
                is_ibr_spectral(f, &EdgeWeights::unit(f.graph()), tol).expect("unit weights cover every edge")
            }
            RigidityCriterion::Distance => f.vertex_count() >= 2 && f.is_idr_any_size(tol),
        }
    }
}

/// Ball of hop radius `radius` around `center`.
#[derive(Debug, Clone, PartialEq)]
pub struct BallSubframework {
    pub center: usize,
    pub radius: usize,
    /// Global ids of the members, ascending. Local vertex `k` is `vertices[k]`.
    pub vertices: Vec<usize>,
    /// Induced framework in local indices.
    pub framework: Framework,
}

impl BallSubframework {
    pub fn local_index(&self, global: usize) -> Option<usize> {
        self.vertices.binary_search(&global).ok()
    }

    pub fn contains(&self, global: usize) -> bool {
        self.local_index(global).is_some()
    }
}

/// Vertices within `r` hops of `center`, ascending.
pub fn ball_vertices(g: &Graph, center: usize, r: usize) -> Vec<usize> {
    g.bfs_bounded(center, r)
        .iter()
        .enumerate()
        .filter_map(|(v, d)| d.map(|_| v))
        .collect()
}

pub fn ball(f: &Framework, center: usize, r: usize) -> BallSubframework {
    let vertices = ball_vertices(f.graph(), center, r);
    BallSubframework {
        center,
        radius: r,
        framework: f.induced(&vertices),
        vertices,
    }
}

/// Smallest radius whose ball around `i` is bearing rigid.
pub fn minimal_radius(f: &Framework, i: usize, tol: f64) -> Radius {
    minimal_radius_with(f, i, RigidityCriterion::Bearing, tol)
}

/// Minimal-radius search under an arbitrary rigidity criterion. Starts at
/// r = 1 and gives up once the ball stops growing.
pub fn minimal_radius_with(f: &Framework, i: usize, criterion: RigidityCriterion, tol: f64) -> Radius {
    let dist = f.graph().bfs(i);
    minimal_radius_from(f, &dist, criterion, tol)
}

fn minimal_radius_from(
    f: &Framework,
    dist: &[Option<usize>],
    criterion: RigidityCriterion,
    tol: f64,
) -> Radius {
    let eccentricity = dist.iter().flatten().copied().max().unwrap_or(0);
    for r in 1..=eccentricity {
        let vertices: Vec<usize> = dist
            .iter()
            .enumerate()
            .filter_map(|(v, d)| d.filter(|&d| d <= r).map(|_| v))
            .collect();
        if criterion.holds(&f.induced(&vertices), tol) {
            return Radius::Finite(r);
        }
    }
    Radius::Infinite
}

/// Minimal radii, minimal balls, inverse membership and emission radii.
#[derive(Debug, Clone, PartialEq)]
pub struct Decomposition {
    pub r_star: Vec<Radius>,
    /// Minimal ball vertex sets (global ids, ascending); `None` for infinite radii.
    pub balls: Vec<Option<Vec<usize>>>,
    /// `membership[i]` = centers `j` with `delta_ij <= r*_j`, ascending.
    pub membership: Vec<Vec<usize>>,
    /// Emission radius `q_i = max_{j in membership[i]} delta_ij`.
    pub q: Vec<usize>,
}

impl Decomposition {
    /// Builds balls, membership and emission radii for given radii on `g`.
    pub fn from_radii(g: &Graph, r_star: Vec<Radius>) -> Self {
        let dist = g.distances();
        Self::from_radii_with_distances(&dist, r_star)
    }

    pub fn from_radii_with_distances(dist: &HopDistances, r_star: Vec<Radius>) -> Self {
        let n = dist.vertex_count();
        let balls = (0..n)
            .map(|j| {
                r_star[j].finite().map(|r| {
                    (0..n)
                        .filter(|&v| dist.get(j, v).is_some_and(|d| d <= r))
                        .collect()
                })
            })
            .collect();
        let membership: Vec<Vec<usize>> = (0..n)
            .map(|i| {
                (0..n)
                    .filter(|&j| dist.get(i, j).is_some_and(|d| r_star[j].covers(d)))
                    .collect()
            })
            .collect();
        let q = membership
            .iter()
            .enumerate()
            .map(|(i, js)| js.iter().filter_map(|&j| dist.get(i, j)).max().unwrap_or(0))
            .collect();
        Self {
            r_star,
            balls,
            membership,
            q,
        }
    }

    /// Keeps the given member sets and recomputes membership and emission
    /// radii from hop distances `dist`. Members unreachable from their
    /// center do not contribute to `q`.
    pub fn with_members(dist: &HopDistances, r_star: Vec<Radius>, balls: Vec<Option<Vec<usize>>>) -> Self {
        let n = dist.vertex_count();
        let mut membership = vec![Vec::new(); n];
        for (j, ball) in balls.iter().enumerate() {
            for &i in ball.iter().flatten() {
                membership[i].push(j);
            }
        }
        let q = membership
            .iter()
            .enumerate()
            .map(|(i, js)| js.iter().filter_map(|&j| dist.get(i, j)).max().unwrap_or(0))
            .collect();
        Self {
            r_star,
            balls,
            membership,
            q,
        }
    }

    pub fn vertex_count(&self) -> usize {
        self.r_star.len()
    }

    /// Every minimal radius finite.
    pub fn is_rigid(&self) -> bool {
        self.r_star.iter().all(|r| r.is_finite())
    }

    pub fn to_file(&self) -> DecompositionFile {
        DecompositionFile {
            r_star: self.r_star.clone(),
            membership: self.membership.clone(),
            q: self.q.clone(),
        }
    }
}

/// JSON layout `{"r_star": [...], "membership": [[...],...], "q": [...]}`;
/// infinite radii are `null`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecompositionFile {
    pub r_star: Vec<Radius>,
    pub membership: Vec<Vec<usize>>,
    pub q: Vec<usize>,
}

pub fn decompose(f: &Framework, tol: f64) -> Result<Decomposition> {
    decompose_with(f, RigidityCriterion::Bearing, tol, Execution::default())
}

/// Decomposition under `criterion`, with per-vertex searches scheduled by `exec`.
pub fn decompose_with(
    f: &Framework,
    criterion: RigidityCriterion,
    tol: f64,
    exec: Execution,
) -> Result<Decomposition> {
    let dist = f.graph().distances();
    dist.diameter()?;
    let n = f.vertex_count();
    let r_star = exec.map(n, |i| {
        let row: Vec<Option<usize>> = (0..n).map(|j| dist.get(i, j)).collect();
        minimal_radius_from(f, &row, criterion, tol)
    });
    Ok(Decomposition::from_radii_with_distances(&dist, r_star))
}

/// Subframework-based rigidity test: all minimal radii finite.
pub fn is_ibr_subframework(f: &Framework, tol: f64) -> Result<bool> {
    Ok(decompose(f, tol)?.is_rigid())
}

/// Union of two frameworks. `shared` maps vertices of `other` to the vertex
/// of `base` they coincide with; the remaining vertices of `other` are
/// appended after those of `base` in ascending order.
pub fn union(base: &Framework, other: &Framework, shared: &BTreeMap<usize, usize>) -> Result<Framework> {
    if base.dim() != other.dim() {
        return Err(Error::DimensionMismatch {
            expected: base.dim(),
            found: other.dim(),
        });
    }
    let mut map = vec![0; other.vertex_count()];
    let mut positions: Vec<Point> = base.positions().to_vec();
    for (v, slot) in map.iter_mut().enumerate() {
        match shared.get(&v) {
            Some(&b) => {
                if b >= base.vertex_count() {
                    return Err(Error::InvalidGraph(format!("shared vertex {b} out of range")));
                }
                if (base.position(b) - other.position(v)).norm() > 1e-12 {
                    return Err(Error::InconsistentRealization(b));
                }
                *slot = b;
            }
            None => {
                *slot = positions.len();
                positions.push(other.position(v).clone());
            }
        }
    }
    let edges = base
        .graph()
        .edges()
        .iter()
        .copied()
        .chain(other.graph().edges().iter().map(|&(i, j)| (map[i], map[j])));
    let graph = Graph::from_edges_dedup(positions.len(), edges)?;
    Framework::new(graph, base.dim(), positions)
}
