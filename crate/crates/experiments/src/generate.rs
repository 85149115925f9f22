//! Seeded random frameworks and robot swarms.

use bearing_rigidity::sensing::{undirected_sensing, RobotState};
use bearing_rigidity::{Framework, Graph, Point, Result};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand::SeedableRng;
use serde::{Deserialize, Serialize};

/// Independent stream for sample `sample` at size `n`.
pub fn substream(seed: u64, n: usize, sample: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((n as u64) << 32) | sample as u64);
    rng
}

/// Axis-aligned box `[min, max]`; degenerate sides are allowed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Region {
    pub min: Vec<f64>,
    pub max: Vec<f64>,
}

impl Region {
    pub fn unit_cube(dim: usize) -> Self {
        Self {
            min: vec![0.0; dim],
            max: vec![1.0; dim],
        }
    }

    pub fn dim(&self) -> usize {
        self.min.len()
    }

    pub fn is_valid(&self) -> bool {
        self.min.len() == self.max.len()
            && !self.min.is_empty()
            && self.min.iter().zip(&self.max).all(|(a, b)| a.is_finite() && b.is_finite() && a <= b)
    }

    pub fn sample(&self, rng: &mut ChaCha8Rng) -> Point {
        Point::from_fn(self.dim(), |k, _| {
            let u: f64 = rng.random();
            self.min[k] + u * (self.max[k] - self.min[k])
        })
    }
}

/// `G(n, rho)`: every unordered pair independently, in lexicographic order.
pub fn erdos_renyi_graph(n: usize, rho: f64, rng: &mut ChaCha8Rng) -> Graph {
    let mut edges = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            if rng.random::<f64>() < rho {
                edges.push((i, j));
            }
        }
    }
    Graph::new(n, edges).expect("pairs i < j are valid edges")
}

/// Erdős–Rényi graph with positions uniform in the unit cube.
pub fn gen_erdos_renyi(n: usize, rho: f64, dim: usize, rng: &mut ChaCha8Rng) -> Result<Framework> {
    let g = erdos_renyi_graph(n, rho, rng);
    place(g, dim, rng)
}

/// Positions uniform in the unit cube for a given graph.
pub fn place(g: Graph, dim: usize, rng: &mut ChaCha8Rng) -> Result<Framework> {
    let cube = Region::unit_cube(dim);
    let pos = (0..g.vertex_count()).map(|_| cube.sample(rng)).collect();
    Framework::new(g, dim, pos)
}

/// Yaw whose optical axis points at `target` in the horizontal plane.
pub fn yaw_toward(from: &Point, target: &Point) -> f64 {
    (target[1] - from[1]).atan2(target[0] - from[0])
}

/// Robots uniform in `region`, cameras facing the barycenter, and the
/// framework of their undirected sensing graph.
pub fn gen_sensing_framework(
    n: usize,
    range: f64,
    fov_cos: f64,
    region: &Region,
    rng: &mut ChaCha8Rng,
) -> Result<(Framework, Vec<RobotState>)> {
    let dim = region.dim();
    let pos: Vec<Point> = (0..n).map(|_| region.sample(rng)).collect();
    let center = pos.iter().fold(Point::zeros(dim), |acc, p| acc + p) / n as f64;
    let states: Vec<RobotState> = pos
        .iter()
        .map(|p| RobotState::new(p.clone(), yaw_toward(p, &center), range, fov_cos))
        .collect();
    let g = undirected_sensing(&states)?;
    let f = Framework::new(g, dim, pos)?;
    Ok((f, states))
}
