//! Bearing rigidity of multi-robot frameworks: rigidity tests, spectral
//! analysis, minimal-ball subframework decompositions, a camera sensing
//! model, a rigidity-maintaining controller and a hop-level simulation of
//! the distributed protocol that feeds it.

pub mod controller;
pub mod error;
pub mod exec;
pub mod framework;
pub mod graph;
pub mod protocol;
pub mod sensing;
pub mod spectral;
pub mod subframework;

pub use error::{Error, Result};
pub use exec::Execution;
pub use framework::{Framework, FrameworkFile, Point, DEFAULT_TOL};
pub use graph::{DiGraph, Graph, HopDistances};
pub use sensing::RobotState;
pub use spectral::{bearing_laplacian, BearingLaplacian, EdgeWeights, Spectrum};
pub use subframework::{decompose, decompose_with, Decomposition, DecompositionFile, Radius, RigidityCriterion};
