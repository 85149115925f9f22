//! Rigidity reports for framework files.

use std::path::Path;

use bearing_rigidity::protocol::{metrics, ProtocolMetrics};
use bearing_rigidity::spectral::is_ibr_spectral;
use bearing_rigidity::{
    bearing_laplacian, decompose, DecompositionFile, EdgeWeights, Framework, FrameworkFile, Radius,
};
use serde::Serialize;

use crate::error::{ExperimentError, Result};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RigidityReport {
    pub vertices: usize,
    pub edges: usize,
    pub dim: usize,
    pub tol: f64,
    pub connected: bool,
    /// Rank test on the bearing rigidity matrix.
    pub ibr_rank: bool,
    /// Spectral test on the unit-weight bearing Laplacian.
    pub ibr_spectral: bool,
    pub agreement: bool,
    /// Finite minimal radius at every vertex.
    pub ibr_subframework: bool,
    pub rigidity_eigenvalue: f64,
    pub r_star: Vec<Radius>,
    pub membership: Vec<Vec<usize>>,
    pub q: Vec<usize>,
    /// Protocol metrics on the framework graph; absent when disconnected.
    pub metrics: Option<ProtocolMetrics>,
}

/// Parses framework JSON; errors carry the line and column.
pub fn parse_framework(text: &str) -> Result<Framework> {
    let file: FrameworkFile =
        serde_json::from_str(text).map_err(|e| ExperimentError::Input(format!("framework JSON: {e}")))?;
    Framework::try_from(file).map_err(|e| ExperimentError::Input(format!("framework: {e}")))
}

pub fn load_framework(path: &Path) -> Result<Framework> {
    let text = std::fs::read_to_string(path).map_err(|e| ExperimentError::Input(format!("{}: {e}", path.display())))?;
    parse_framework(&text).map_err(|e| match e {
        ExperimentError::Input(msg) => ExperimentError::Input(format!("{}: {msg}", path.display())),
        other => other,
    })
}

pub fn analyze(f: &Framework, tol: f64) -> Result<RigidityReport> {
    let g = f.graph();
    let unit = EdgeWeights::unit(g);
    let ibr_rank = f.is_ibr_rank(tol);
    let ibr_spectral = is_ibr_spectral(f, &unit, tol)?;
    let rigidity_eigenvalue = bearing_laplacian(f, &unit)?.rigidity_eigenvalue()?;
    let dec = decompose(f, tol)?;
    let connected = g.is_connected();
    let metrics = if connected { Some(metrics(g, g, &dec)?) } else { None };
    let file = dec.to_file();
    Ok(RigidityReport {
        vertices: f.vertex_count(),
        edges: g.edge_count(),
        dim: f.dim(),
        tol,
        connected,
        ibr_rank,
        ibr_spectral,
        agreement: ibr_rank == ibr_spectral,
        ibr_subframework: dec.is_rigid(),
        rigidity_eigenvalue,
        r_star: file.r_star,
        membership: file.membership,
        q: file.q,
        metrics,
    })
}

pub fn decomposition(f: &Framework, tol: f64) -> Result<DecompositionFile> {
    Ok(decompose(f, tol)?.to_file())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn triangle_report() {
        let f = parse_framework(r#"{"dim":2,"positions":[[0,0],[1,0],[0,1]],"edges":[[0,1],[1,2],[0,2]]}"#).unwrap();
        let r = analyze(&f, 1e-8).unwrap();
        assert!(r.ibr_rank && r.ibr_spectral && r.agreement && r.ibr_subframework);
        assert_eq!(r.r_star, vec![Radius::Finite(1); 3]);
        assert!(r.rigidity_eigenvalue > 0.0);
        assert_eq!(r.metrics.unwrap().round_trip, vec![Some(2); 3]);
    }

    #[test]
    fn path_report() {
        let f = parse_framework(r#"{"dim":2,"positions":[[0,0],[1,0],[1,1]],"edges":[[0,1],[1,2]]}"#).unwrap();
        let r = analyze(&f, 1e-8).unwrap();
        assert!(!r.ibr_rank && !r.ibr_spectral && r.agreement && !r.ibr_subframework);
        // an end vertex's unit ball is a single edge, which is bearing rigid
        assert_eq!(r.r_star, vec![Radius::Finite(1), Radius::Infinite, Radius::Finite(1)]);
        let json = serde_json::to_string(&r.r_star).unwrap();
        assert_eq!(json, "[1,null,1]");
    }

    #[test]
    fn malformed_input_has_location() {
        let err = parse_framework("{\"dim\":2,\n\"positions\":[[0,0]],\"edges\":[[0,\"x\"]]}").unwrap_err();
        assert!(err.to_string().contains("line 2"), "{err}");
        let err = parse_framework(r#"{"dim":2,"positions":[[0,0],[1,0]],"edges":[[0,5]]}"#).unwrap_err();
        assert!(matches!(err, ExperimentError::Input(_)));
    }
}
