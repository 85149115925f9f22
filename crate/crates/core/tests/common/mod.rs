#![allow(dead_code)]

use bearing_rigidity::sensing::RobotState;
use bearing_rigidity::{Framework, Graph, Point};
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_point(rng: &mut ChaCha8Rng, dim: usize, scale: f64) -> Point {
    DVector::from_fn(dim, |_, _| rng.random::<f64>() * scale)
}

/// Random spanning tree plus each remaining pair with probability `extra`.
pub fn random_connected_graph(rng: &mut ChaCha8Rng, n: usize, extra: f64) -> Graph {
    let mut edges = Vec::new();
    for i in 1..n {
        let j = rng.random_range(0..i);
        edges.push((j, i));
    }
    for i in 0..n {
        for j in (i + 1)..n {
            if !edges.contains(&(i, j)) && rng.random::<f64>() < extra {
                edges.push((i, j));
            }
        }
    }
    Graph::new(n, edges).unwrap()
}

pub fn random_framework(rng: &mut ChaCha8Rng, n: usize, dim: usize, extra: f64) -> Framework {
    let g = random_connected_graph(rng, n, extra);
    let pos = (0..n).map(|_| random_point(rng, dim, 1.0)).collect();
    Framework::new(g, dim, pos).unwrap()
}

/// Mixed rigid and flexible frameworks in the plane and in space.
pub fn mixed_frameworks(seed: u64, count: usize) -> Vec<Framework> {
    let mut r = rng(seed);
    (0..count)
        .map(|k| {
            let dim = 2 + k % 2;
            let n = r.random_range(3..9);
            let extra = r.random_range(0.1..0.9);
            random_framework(&mut r, n, dim, extra)
        })
        .collect()
}

/// Cyclic Jacobi eigensolver: ascending eigenvalues and matching columns.
pub fn jacobi_eigen(a: &DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>) {
    let n = a.nrows();
    let mut a = a.clone();
    let mut v = DMatrix::<f64>::identity(n, n);
    let norm = a.norm().max(f64::MIN_POSITIVE);
    for _ in 0..200 {
        let mut off = 0.0;
        for p in 0..n {
            for q in (p + 1)..n {
                off += a[(p, q)] * a[(p, q)];
            }
        }
        if off.sqrt() <= 1e-15 * norm {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[(p, q)];
                if apq.abs() <= 1e-300 {
                    continue;
                }
                let theta = (a[(q, q)] - a[(p, p)]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (akp, akq) = (a[(k, p)], a[(k, q)]);
                    a[(k, p)] = c * akp - s * akq;
                    a[(k, q)] = s * akp + c * akq;
                }
                for k in 0..n {
                    let (apk, aqk) = (a[(p, k)], a[(q, k)]);
                    a[(p, k)] = c * apk - s * aqk;
                    a[(q, k)] = s * apk + c * aqk;
                }
                for k in 0..n {
                    let (vkp, vkq) = (v[(k, p)], v[(k, q)]);
                    v[(k, p)] = c * vkp - s * vkq;
                    v[(k, q)] = s * vkp + c * vkq;
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&x, &y| a[(x, x)].total_cmp(&a[(y, y)]));
    let values = order.iter().map(|&k| a[(k, k)]).collect();
    let cols: Vec<_> = order.iter().map(|&k| v.column(k).into_owned()).collect();
    (values, DMatrix::from_columns(&cols))
}

/// Rank by Gaussian elimination with complete pivoting, pivots below
/// `tol` times the largest entry counted as zero.
pub fn elimination_rank(m: &DMatrix<f64>, tol: f64) -> usize {
    let mut a = m.clone();
    let (rows, cols) = a.shape();
    let scale = a.amax();
    if scale == 0.0 {
        return 0;
    }
    let mut rank = 0;
    for k in 0..rows.min(cols) {
        let mut best = (k, k, 0.0);
        for i in k..rows {
            for j in k..cols {
                if a[(i, j)].abs() > best.2 {
                    best = (i, j, a[(i, j)].abs());
                }
            }
        }
        if best.2 <= tol * scale {
            break;
        }
        a.swap_rows(k, best.0);
        a.swap_columns(k, best.1);
        for i in (k + 1)..rows {
            let f = a[(i, k)] / a[(k, k)];
            for j in k..cols {
                a[(i, j)] -= f * a[(k, j)];
            }
        }
        rank += 1;
    }
    rank
}

/// Robots in a box of side `side`, cameras roughly toward the barycenter.
pub fn random_states(rng: &mut ChaCha8Rng, n: usize, dim: usize, side: f64, range: f64) -> Vec<RobotState> {
    let pts: Vec<Point> = (0..n).map(|_| random_point(rng, dim, side)).collect();
    let center = pts.iter().fold(Point::zeros(dim), |acc, p| acc + p) / n as f64;
    pts.into_iter()
        .map(|p| {
            let to = &center - &p;
            let psi = to[1].atan2(to[0]) + rng.random_range(-0.6..0.6);
            RobotState::new(p, psi, range, 0.5)
        })
        .collect()
}

pub fn min_distance(points: &[Point]) -> f64 {
    let mut best = f64::INFINITY;
    for i in 0..points.len() {
        for j in (i + 1)..points.len() {
            best = best.min((&points[i] - &points[j]).norm());
        }
    }
    best
}

pub fn rel_err(a: &DVector<f64>, b: &DVector<f64>) -> f64 {
    (a - b).norm() / b.norm().max(1e-12)
}
