use crate::error::{Error, Result};
use crate::framework::Point;
use crate::graph::Graph;

/// `sum_{ij in E_c} ((d_ij - comm_range) / (d_ij - min_distance))^2`.
pub fn collision_cost(positions: &[Point], comm: &Graph, comm_range: f64, min_distance: f64) -> Result<f64> {
    let mut cost = 0.0;
    for &(i, j) in comm.edges() {
        let d = checked_distance(positions, i, j, min_distance)?;
        let r = (d - comm_range) / (d - min_distance);
        cost += r * r;
    }
    Ok(cost)
}

/// Position gradient of [`collision_cost`]; the yaw gradient is zero.
pub fn collision_grad(
    positions: &[Point],
    comm: &Graph,
    comm_range: f64,
    min_distance: f64,
) -> Result<Vec<Point>> {
    let dim = positions.first().map_or(0, |p| p.len());
    let mut grad = vec![Point::zeros(dim); positions.len()];
    let scale = 2.0 * (comm_range - min_distance);
    for &(i, j) in comm.edges() {
        let d = checked_distance(positions, i, j, min_distance)?;
        let b_ij = (&positions[j] - &positions[i]) / d;
        let c = scale * (comm_range - d) / (d - min_distance).powi(3);
        grad[i].axpy(c, &b_ij, 1.0);
        grad[j].axpy(-c, &b_ij, 1.0);
    }
    Ok(grad)
}

fn checked_distance(positions: &[Point], i: usize, j: usize, min_distance: f64) -> Result<f64> {
    let d = (&positions[j] - &positions[i]).norm();
    if d <= min_distance {
        return Err(Error::CollisionViolation {
            i,
            j,
            distance: d,
            min: min_distance,
        });
    }
    Ok(d)
}
