//! Weighted bearing Laplacian, its spectrum, and the spectral rigidity tests.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::ser::SerializeStruct;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::framework::{numerical_rank, unit_projection, Framework, Point};
use crate::graph::Graph;

/// Positive weight per undirected edge, keyed by `(min, max)`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct EdgeWeights {
    weights: BTreeMap<(usize, usize), f64>,
}

impl EdgeWeights {
    pub fn new() -> Self {
        Self::default()
    }

    /// Weight 1 on every edge of `graph`.
    pub fn unit(graph: &Graph) -> Self {
        Self::from_fn(graph, |_, _| 1.0)
    }

    pub fn from_fn(graph: &Graph, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let weights = graph.edges().iter().map(|&(i, j)| ((i, j), f(i, j))).collect();
        Self { weights }
    }

    pub fn insert(&mut self, i: usize, j: usize, w: f64) {
        self.weights.insert((i.min(j), i.max(j)), w);
    }

    pub fn get(&self, i: usize, j: usize) -> Option<f64> {
        self.weights.get(&(i.min(j), i.max(j))).copied()
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self {
            weights: self.weights.iter().map(|(&k, &w)| (k, c * w)).collect(),
        }
    }

    fn require(&self, i: usize, j: usize) -> Result<f64> {
        self.get(i, j).ok_or(Error::MissingWeight(i, j))
    }
}

#[derive(Debug, Clone, PartialEq)]
struct EdgeTerm {
    i: usize,
    j: usize,
    weight: f64,
    projection: DMatrix<f64>,
}

/// Dense d|V| x d|V| weighted bearing Laplacian together with the per-edge
/// terms it was assembled from.
#[derive(Debug, Clone, PartialEq)]
pub struct BearingLaplacian {
    matrix: DMatrix<f64>,
    dim: usize,
    vertex_count: usize,
    terms: Vec<EdgeTerm>,
}

/// Assembles the weighted bearing Laplacian of `f`.
pub fn bearing_laplacian(f: &Framework, w: &EdgeWeights) -> Result<BearingLaplacian> {
    let bearings: Vec<Point> = f
        .graph()
        .edges()
        .iter()
        .map(|&(i, j)| f.edge_bearing(i, j))
        .collect();
    BearingLaplacian::from_bearings(f.graph(), f.dim(), &bearings, w)
}

impl BearingLaplacian {
    /// Builds the Laplacian from one unit bearing per edge (canonical order,
    /// pointing from the lower to the higher vertex id). Positions are not
    /// needed: the Laplacian depends only on bearings and weights.
    pub fn from_bearings(graph: &Graph, dim: usize, bearings: &[Point], w: &EdgeWeights) -> Result<Self> {
        if bearings.len() != graph.edge_count() {
            return Err(Error::DimensionMismatch {
                expected: graph.edge_count(),
                found: bearings.len(),
            });
        }
        let n = graph.vertex_count();
        let mut matrix = DMatrix::zeros(dim * n, dim * n);
        let mut terms = Vec::with_capacity(graph.edge_count());
        for (&(i, j), b) in graph.edges().iter().zip(bearings) {
            if b.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: b.len(),
                });
            }
            let weight = w.require(i, j)?;
            let projection = unit_projection(b);
            let block = &projection * weight;
            for (r, c, sign) in [(i, i, 1.0), (j, j, 1.0), (i, j, -1.0), (j, i, -1.0)] {
                let mut view = matrix.view_mut((r * dim, c * dim), (dim, dim));
                view.zip_apply(&block, |m, b| *m += sign * b);
            }
            terms.push(EdgeTerm {
                i,
                j,
                weight,
                projection,
            });
        }
        Ok(Self {
            matrix,
            dim,
            vertex_count: n,
            terms,
        })
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn vertex_count(&self) -> usize {
        self.vertex_count
    }

    pub fn spectrum(&self) -> Result<Spectrum> {
        Spectrum::of(&self.matrix)
    }

    /// The (d+2)-th smallest eigenvalue.
    pub fn rigidity_eigenvalue(&self) -> Result<f64> {
        self.spectrum()?.rigidity_eigenvalue(self.dim)
    }

    /// Edge-sum form of u^T B u.
    pub fn quadratic_form(&self, u: &DVector<f64>) -> f64 {
        let d = self.dim;
        self.terms
            .iter()
            .map(|t| {
                let du = u.rows(t.i * d, d) - u.rows(t.j * d, d);
                t.weight * du.dot(&(&t.projection * &du))
            })
            .sum()
    }

    /// Matrix form of u^T B u.
    pub fn matrix_quadratic(&self, u: &DVector<f64>) -> f64 {
        u.dot(&(&self.matrix * u))
    }

    /// True iff `P_ij (u_i - u_j)` vanishes on every edge, relative to `|u|`.
    pub fn null_test(&self, u: &DVector<f64>, tol: f64) -> bool {
        let d = self.dim;
        let scale = u.norm();
        self.terms.iter().all(|t| {
            let du = u.rows(t.i * d, d) - u.rows(t.j * d, d);
            (&t.projection * du).norm() <= tol * scale
        })
    }
}

/// Eigenvalues in ascending order with aligned orthonormal eigenvectors
/// (column `k` of `vectors` belongs to `values[k]`).
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    pub values: Vec<f64>,
    pub vectors: DMatrix<f64>,
}

impl Spectrum {
    pub fn of(m: &DMatrix<f64>) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(Error::DimensionMismatch {
                expected: m.nrows(),
                found: m.ncols(),
            });
        }
        if m.nrows() == 0 {
            return Ok(Self {
                values: Vec::new(),
                vectors: DMatrix::zeros(0, 0),
            });
        }
        let eig = SymmetricEigen::try_new(m.clone(), f64::EPSILON, 100_000)
            .ok_or_else(|| Error::NumericalFailure("symmetric eigensolver did not converge".into()))?;
        let mut order: Vec<usize> = (0..m.nrows()).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
        let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
        let columns: Vec<_> = order.iter().map(|&k| eig.eigenvectors.column(k)).collect();
        Ok(Self {
            values,
            vectors: DMatrix::from_columns(&columns),
        })
    }

    pub fn max(&self) -> f64 {
        self.values.last().copied().unwrap_or(0.0)
    }

    /// `values[d + 1]`, i.e. lambda_{d+2} in 1-based numbering.
    pub fn rigidity_eigenvalue(&self, dim: usize) -> Result<f64> {
        self.values.get(dim + 1).copied().ok_or_else(|| {
            Error::UnsupportedSize(format!(
                "spectrum of size {} has no eigenvalue number {}",
                self.values.len(),
                dim + 2
            ))
        })
    }

    /// Rigidity eigenvalue strictly above `tol * lambda_max`.
    pub fn is_rigid(&self, dim: usize, tol: f64) -> bool {
        match self.rigidity_eigenvalue(dim) {
            Ok(lambda) => lambda > tol * self.max() && self.max() > 0.0,
            Err(_) => false,
        }
    }
}

impl Serialize for Spectrum {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let columns: Vec<Vec<f64>> = self
            .vectors
            .column_iter()
            .map(|c| c.iter().copied().collect())
            .collect();
        let mut st = s.serialize_struct("Spectrum", 2)?;
        st.serialize_field("eigenvalues", &self.values)?;
        st.serialize_field("eigenvectors", &columns)?;
        st.end()
    }
}

pub fn spectrum(b: &BearingLaplacian) -> Result<Spectrum> {
    b.spectrum()
}

pub fn rigidity_eigenvalue(b: &BearingLaplacian) -> Result<f64> {
    b.rigidity_eigenvalue()
}

/// Spectral rigidity test: lambda_{d+2}(B) > tol * lambda_max(B).
pub fn is_ibr_spectral(f: &Framework, w: &EdgeWeights, tol: f64) -> Result<bool> {
    let d = f.dim();
    if d * f.vertex_count() < d + 2 {
        return Ok(false);
    }
    Ok(bearing_laplacian(f, w)?.spectrum()?.is_rigid(d, tol))
}

/// Bearing measurements on a graph: one unit vector per edge in canonical
/// order, from the lower to the higher vertex id.
#[derive(Debug, Clone, PartialEq)]
pub struct BearingMeasurements {
    pub graph: Graph,
    pub dim: usize,
    pub bearings: Vec<Point>,
}

impl BearingMeasurements {
    pub fn of(f: &Framework) -> Self {
        Self {
            graph: f.graph().clone(),
            dim: f.dim(),
            bearings: f
                .graph()
                .edges()
                .iter()
                .map(|&(i, j)| f.edge_bearing(i, j))
                .collect(),
        }
    }
}

/// Recovers all positions from bearings and anchor positions by solving
/// `B_ff p_f = -B_fa p_a`. Returns the full realization (anchors included).
pub fn localize(
    meas: &BearingMeasurements,
    w: &EdgeWeights,
    anchors: &BTreeMap<usize, Point>,
    tol: f64,
) -> Result<Vec<Point>> {
    let n = meas.graph.vertex_count();
    let d = meas.dim;
    if anchors.len() < 2 {
        return Err(Error::NotLocalizable(format!(
            "need at least 2 anchors, got {}",
            anchors.len()
        )));
    }
    if let Some(&a) = anchors.keys().find(|&&a| a >= n) {
        return Err(Error::InvalidGraph(format!("anchor {a} out of range")));
    }
    let b = BearingLaplacian::from_bearings(&meas.graph, d, &meas.bearings, w)?;
    let free: Vec<usize> = (0..n).filter(|v| !anchors.contains_key(v)).collect();
    let mut out: Vec<Point> = (0..n)
        .map(|v| anchors.get(&v).cloned().unwrap_or_else(|| Point::zeros(d)))
        .collect();
    if free.is_empty() {
        return Ok(out);
    }

    let nf = free.len();
    let mut b_ff = DMatrix::zeros(d * nf, d * nf);
    let mut rhs = DVector::zeros(d * nf);
    for (r, &fr) in free.iter().enumerate() {
        for (c, &fc) in free.iter().enumerate() {
            b_ff.view_mut((r * d, c * d), (d, d))
                .copy_from(&b.matrix.view((fr * d, fc * d), (d, d)));
        }
        for (&a, pa) in anchors {
            let block = b.matrix.view((fr * d, a * d), (d, d));
            let mut seg = rhs.rows_mut(r * d, d);
            seg -= block * pa;
        }
    }

    let rank = numerical_rank(&b_ff, tol);
    if rank < d * nf {
        return Err(Error::NotLocalizable(format!(
            "free block has rank {rank} < {}",
            d * nf
        )));
    }
    let sol = b_ff
        .svd(true, true)
        .solve(&rhs, 0.0)
        .map_err(|e| Error::NumericalFailure(e.to_string()))?;
    for (r, &fr) in free.iter().enumerate() {
        out[fr] = sol.rows(r * d, d).into_owned();
    }
    Ok(out)
}
