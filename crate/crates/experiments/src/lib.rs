//! Experiment harness for bearing rigidity: seeded generators, the
//! minimal-radius and protocol-cost campaigns, the target-collection
//! mission, framework reports and plots.

pub mod analyze;
pub mod config;
pub mod error;
pub mod fig1;
pub mod fig2;
pub mod generate;
pub mod mission;
pub mod plot;
pub mod table;

pub use error::{ExperimentError, Result};
