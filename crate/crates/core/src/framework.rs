//! Frameworks (graph + injective realization), bearings, and the rank-based
//! rigidity tests.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::Graph;

/// Default relative threshold for numerical rank and eigenvalue positivity.
pub const DEFAULT_TOL: f64 = 1e-8;

/// A point in R^d.
pub type Point = DVector<f64>;

/// Unit vector from `pi` toward `pj`.
pub fn bearing(pi: &Point, pj: &Point) -> Result<Point> {
    let diff = pj - pi;
    let norm = diff.norm();
    if norm == 0.0 {
        return Err(Error::DegenerateRealization(
            "bearing between coincident points".into(),
        ));
    }
    Ok(diff / norm)
}

/// Orthogonal projector `I - b b^T` onto the complement of the unit vector `b`.
pub fn projection(b: &Point) -> Result<DMatrix<f64>> {
    let norm = b.norm();
    if (norm - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidBearing(norm));
    }
    Ok(unit_projection(b))
}

pub(crate) fn unit_projection(b: &Point) -> DMatrix<f64> {
    DMatrix::identity(b.len(), b.len()) - b * b.transpose()
}

/// Number of singular values above `tol * sigma_max`.
pub fn numerical_rank(m: &DMatrix<f64>, tol: f64) -> usize {
    if m.nrows() == 0 || m.ncols() == 0 {
        return 0;
    }
    let sv = m.singular_values();
    let max = sv.max();
    if max == 0.0 {
        return 0;
    }
    sv.iter().filter(|&&s| s > tol * max).count()
}

/// Expected rank of the distance rigidity matrix of an infinitesimally rigid
/// framework with `n` vertices in general position in R^d.
pub fn distance_rank_target(n: usize, dim: usize) -> usize {
    if n > dim {
        dim * n - dim * (dim + 1) / 2
    } else {
        n * n.saturating_sub(1) / 2
    }
}

/// Undirected graph with an injective realization in R^d.
#[derive(Debug, Clone, PartialEq)]
pub struct Framework {
    graph: Graph,
    dim: usize,
    positions: Vec<Point>,
}

impl Framework {
    pub fn new(graph: Graph, dim: usize, positions: Vec<Point>) -> Result<Self> {
        if dim < 2 {
            return Err(Error::UnsupportedDimension(dim));
        }
        if positions.len() != graph.vertex_count() {
            return Err(Error::DimensionMismatch {
                expected: graph.vertex_count(),
                found: positions.len(),
            });
        }
        if let Some(p) = positions.iter().find(|p| p.len() != dim) {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: p.len(),
            });
        }
        for i in 0..positions.len() {
            if positions[i].iter().any(|x| !x.is_finite()) {
                return Err(Error::DegenerateRealization(format!(
                    "vertex {i} has a non-finite coordinate"
                )));
            }
            for j in (i + 1)..positions.len() {
                if positions[i] == positions[j] {
                    return Err(Error::DegenerateRealization(format!(
                        "vertices {i} and {j} coincide"
                    )));
                }
            }
        }
        Ok(Self {
            graph,
            dim,
            positions,
        })
    }

    /// Convenience constructor from plain coordinate rows.
    pub fn from_rows(graph: Graph, rows: &[&[f64]]) -> Result<Self> {
        let dim = rows.first().map_or(2, |r| r.len());
        let positions = rows.iter().map(|r| Point::from_row_slice(r)).collect();
        Self::new(graph, dim, positions)
    }

    pub fn graph(&self) -> &Graph {
        &self.graph
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn vertex_count(&self) -> usize {
        self.graph.vertex_count()
    }

    pub fn positions(&self) -> &[Point] {
        &self.positions
    }

    pub fn position(&self, i: usize) -> &Point {
        &self.positions[i]
    }

    /// Realization stacked into a single vector of length d|V|.
    pub fn stacked_positions(&self) -> DVector<f64> {
        stack(&self.positions, self.dim)
    }

    /// Same graph, positions transformed by `f`.
    pub fn map_positions(&self, f: impl Fn(&Point) -> Point) -> Result<Self> {
        Self::new(
            self.graph.clone(),
            self.dim,
            self.positions.iter().map(f).collect(),
        )
    }

    /// Same positions, different graph on the same vertex set.
    pub fn with_graph(&self, graph: Graph) -> Result<Self> {
        Self::new(graph, self.dim, self.positions.clone())
    }

    /// Framework induced on `vertices` (global ids, local order as given).
    pub fn induced(&self, vertices: &[usize]) -> Self {
        Self {
            graph: self.graph.induced(vertices),
            dim: self.dim,
            positions: vertices.iter().map(|&v| self.positions[v].clone()).collect(),
        }
    }

    pub fn edge_length(&self, i: usize, j: usize) -> f64 {
        (&self.positions[j] - &self.positions[i]).norm()
    }

    pub fn edge_bearing(&self, i: usize, j: usize) -> Point {
        // positions are pairwise distinct by construction
        bearing(&self.positions[i], &self.positions[j]).expect("injective realization")
    }

    /// Bearings of all edges stacked in canonical edge order.
    pub fn bearing_function(&self) -> DVector<f64> {
        let d = self.dim;
        let mut out = DVector::zeros(d * self.graph.edge_count());
        for (e, &(i, j)) in self.graph.edges().iter().enumerate() {
            out.rows_mut(e * d, d).copy_from(&self.edge_bearing(i, j));
        }
        out
    }

    /// Jacobian of [`Self::bearing_function`] with respect to the stacked
    /// positions; size d|E| x d|V|.
    pub fn bearing_rigidity_matrix(&self) -> DMatrix<f64> {
        let d = self.dim;
        let mut r = DMatrix::zeros(d * self.graph.edge_count(), d * self.vertex_count());
        for (e, &(i, j)) in self.graph.edges().iter().enumerate() {
            let block = unit_projection(&self.edge_bearing(i, j)) / self.edge_length(i, j);
            r.view_mut((e * d, i * d), (d, d)).copy_from(&(-&block));
            r.view_mut((e * d, j * d), (d, d)).copy_from(&block);
        }
        r
    }

    /// Orthonormal basis of the trivial motions span{1 (x) I_d, p}.
    pub fn trivial_motion_basis(&self) -> DMatrix<f64> {
        trivial_motion_basis(&self.positions, self.dim)
    }

    /// Rank test: rank(R) = d|V| - d - 1.
    pub fn is_ibr_rank(&self, tol: f64) -> bool {
        let n = self.vertex_count();
        if n < 2 {
            return false;
        }
        numerical_rank(&self.bearing_rigidity_matrix(), tol) == self.dim * n - self.dim - 1
    }

    /// Distance rigidity matrix, |E| x d|V|.
    pub fn distance_rigidity_matrix(&self) -> DMatrix<f64> {
        let d = self.dim;
        let mut r = DMatrix::zeros(self.graph.edge_count(), d * self.vertex_count());
        for (e, &(i, j)) in self.graph.edges().iter().enumerate() {
            let diff = &self.positions[i] - &self.positions[j];
            r.view_mut((e, i * d), (1, d)).copy_from(&diff.transpose());
            r.view_mut((e, j * d), (1, d)).copy_from(&(-diff).transpose());
        }
        r
    }

    /// Rank test: rank = d|V| - d(d+1)/2. Requires |V| >= d.
    pub fn is_idr(&self, tol: f64) -> Result<bool> {
        let n = self.vertex_count();
        if n < self.dim {
            return Err(Error::UnsupportedSize(format!(
                "distance rigidity rank test needs at least {} vertices, got {n}",
                self.dim
            )));
        }
        Ok(self.is_idr_any_size(tol))
    }

    /// Distance rigidity test that also covers |V| < d, where the target
    /// rank is that of a simplex, n(n-1)/2.
    pub fn is_idr_any_size(&self, tol: f64) -> bool {
        let n = self.vertex_count();
        numerical_rank(&self.distance_rigidity_matrix(), tol) == distance_rank_target(n, self.dim)
    }
}

pub(crate) fn stack(points: &[Point], dim: usize) -> DVector<f64> {
    let mut out = DVector::zeros(dim * points.len());
    for (i, p) in points.iter().enumerate() {
        out.rows_mut(i * dim, dim).copy_from(p);
    }
    out
}

/// Orthonormal basis for span{1 (x) I_d, p} via modified Gram-Schmidt.
/// Columns that are numerically dependent (p a pure translation) are dropped.
pub fn trivial_motion_basis(positions: &[Point], dim: usize) -> DMatrix<f64> {
    let n = positions.len();
    let mut candidates: Vec<DVector<f64>> = (0..dim)
        .map(|k| {
            let mut v = DVector::zeros(dim * n);
            for i in 0..n {
                v[i * dim + k] = 1.0;
            }
            v
        })
        .collect();
    candidates.push(stack(positions, dim));

    let mut basis: Vec<DVector<f64>> = Vec::with_capacity(dim + 1);
    for mut v in candidates {
        let scale = v.norm();
        for _ in 0..2 {
            for q in &basis {
                let c = q.dot(&v);
                v.axpy(-c, q, 1.0);
            }
        }
        let norm = v.norm();
        if norm > 1e-12 * scale.max(1.0) {
            basis.push(v / norm);
        }
    }
    DMatrix::from_columns(&basis)
}

/// Serde adapter storing a [`Point`] as a plain coordinate array.
pub mod point_serde {
    use super::Point;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(p: &Point, s: S) -> Result<S::Ok, S::Error> {
        p.as_slice().serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Point, D::Error> {
        Ok(Point::from_vec(Vec::<f64>::deserialize(d)?))
    }
}

/// JSON layout `{"dim": d, "positions": [[..],..], "edges": [[i,j],..]}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FrameworkFile {
    pub dim: usize,
    pub positions: Vec<Vec<f64>>,
    pub edges: Vec<[usize; 2]>,
}

impl TryFrom<FrameworkFile> for Framework {
    type Error = Error;

    fn try_from(file: FrameworkFile) -> Result<Self> {
        let graph = Graph::new(file.positions.len(), file.edges.iter().map(|e| (e[0], e[1])))?;
        let positions = file.positions.iter().map(|p| Point::from_row_slice(p)).collect();
        Framework::new(graph, file.dim, positions)
    }
}

impl From<&Framework> for FrameworkFile {
    fn from(f: &Framework) -> Self {
        FrameworkFile {
            dim: f.dim,
            positions: f.positions.iter().map(|p| p.iter().copied().collect()).collect(),
            edges: f.graph.edges().iter().map(|&(i, j)| [i, j]).collect(),
        }
    }
}

impl Serialize for Framework {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        FrameworkFile::from(self).serialize(s)
    }
}

impl<'de> Deserialize<'de> for Framework {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let file = FrameworkFile::deserialize(d)?;
        Framework::try_from(file).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::dvector;

    fn triangle() -> Framework {
        Framework::from_rows(Graph::complete(3), &[&[0.0, 0.0], &[1.0, 0.0], &[0.0, 1.0]]).unwrap()
    }

    fn bent_path() -> Framework {
        Framework::from_rows(Graph::path(3), &[&[0.0, 0.0], &[1.0, 0.0], &[1.0, 1.0]]).unwrap()
    }

    #[test]
    fn bearing_examples() {
        assert_eq!(bearing(&dvector![0.0, 0.0], &dvector![1.0, 0.0]).unwrap(), dvector![1.0, 0.0]);
        let b = bearing(&dvector![0.0, 0.0], &dvector![3.0, 4.0]).unwrap();
        assert!((b - dvector![0.6, 0.8]).norm() < 1e-15);
    }

    #[test]
    fn bearing_of_coincident_points_fails() {
        let p = dvector![1.0, 2.0];
        assert!(matches!(bearing(&p, &p), Err(Error::DegenerateRealization(_))));
    }

    #[test]
    fn projection_of_axis() {
        let p = projection(&dvector![1.0, 0.0]).unwrap();
        assert_eq!(p, DMatrix::from_row_slice(2, 2, &[0.0, 0.0, 0.0, 1.0]));
        assert!(matches!(projection(&dvector![2.0, 0.0]), Err(Error::InvalidBearing(_))));
    }

    #[test]
    fn rejects_coincident_positions() {
        let res = Framework::from_rows(Graph::path(2), &[&[0.0, 0.0], &[0.0, 0.0]]);
        assert!(matches!(res, Err(Error::DegenerateRealization(_))));
    }

    #[test]
    fn single_edge_rigidity_matrix_block() {
        let f = Framework::from_rows(Graph::path(2), &[&[0.0, 0.0], &[1.0, 0.0]]).unwrap();
        let r = f.bearing_rigidity_matrix();
        let expected = DMatrix::from_row_slice(2, 4, &[0.0, 0.0, 0.0, 0.0, 0.0, -1.0, 0.0, 1.0]);
        assert_eq!(r, expected);
        assert!(f.is_ibr_rank(DEFAULT_TOL));
    }

    #[test]
    fn single_edge_bearing_function() {
        let f = Framework::from_rows(Graph::path(2), &[&[0.0, 0.0], &[2.0, 0.0]]).unwrap();
        assert_eq!(f.bearing_function(), dvector![1.0, 0.0]);
    }

    #[test]
    fn triangle_and_path_rank() {
        assert_eq!(numerical_rank(&triangle().bearing_rigidity_matrix(), DEFAULT_TOL), 3);
        assert!(triangle().is_ibr_rank(DEFAULT_TOL));
        assert_eq!(numerical_rank(&bent_path().bearing_rigidity_matrix(), DEFAULT_TOL), 2);
        assert!(!bent_path().is_ibr_rank(DEFAULT_TOL));
    }

    #[test]
    fn trivial_basis_two_vertices() {
        let f = Framework::from_rows(Graph::path(2), &[&[0.0, 0.0], &[1.0, 0.5]]).unwrap();
        let t = f.trivial_motion_basis();
        assert_eq!(t.ncols(), 3);
        assert!((t.transpose() * &t - DMatrix::identity(3, 3)).amax() < 1e-12);
        assert!((f.bearing_rigidity_matrix() * t).amax() < 1e-10);
    }

    #[test]
    fn distance_rigidity_examples() {
        assert!(triangle().is_idr(DEFAULT_TOL).unwrap());
        let square = Framework::from_rows(
            Graph::cycle(4),
            &[&[0.0, 0.0], &[1.0, 0.0], &[1.0, 1.0], &[0.0, 1.0]],
        )
        .unwrap();
        assert!(!square.is_idr(DEFAULT_TOL).unwrap());
        let single = Framework::from_rows(Graph::empty(1), &[&[0.0, 0.0, 0.0]]).unwrap();
        assert!(matches!(single.is_idr(DEFAULT_TOL), Err(Error::UnsupportedSize(_))));
    }

    #[test]
    fn k4_in_3d_is_idr() {
        let f = Framework::from_rows(
            Graph::complete(4),
            &[&[0.0, 0.0, 0.0], &[1.0, 0.1, 0.0], &[0.2, 1.0, 0.3], &[0.1, 0.4, 1.0]],
        )
        .unwrap();
        assert_eq!(numerical_rank(&f.distance_rigidity_matrix(), DEFAULT_TOL), 6);
        assert!(f.is_idr(DEFAULT_TOL).unwrap());
    }

    #[test]
    fn json_round_trip() {
        let f = triangle();
        let text = serde_json::to_string(&f).unwrap();
        assert_eq!(text, r#"{"dim":2,"positions":[[0.0,0.0],[1.0,0.0],[0.0,1.0]],"edges":[[0,1],[0,2],[1,2]]}"#);
        let back: Framework = serde_json::from_str(&text).unwrap();
        assert_eq!(back, f);
    }
}
