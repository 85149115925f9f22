//! Minimal-radius distributions for bearing and distance rigidity on
//! Erdős–Rényi frameworks that are both distance and bearing rigid.

use bearing_rigidity::framework::distance_rank_target;
use bearing_rigidity::{decompose_with, Execution, Framework, Radius, RigidityCriterion};

use crate::config::{config_hash, Fig1Config};
use crate::error::{ExperimentError, Result};
use crate::generate::{erdos_renyi_graph, place, substream};
use crate::table::{num, Table};

#[derive(Debug, Clone, PartialEq)]
pub struct Fig1Row {
    pub n: usize,
    pub samples: usize,
    /// Graph draws over all samples.
    pub attempts: u64,
    /// Percent of vertices with bearing minimal radius at most 1, 2, 3.
    pub bearing: [f64; 3],
    /// Same for distance rigidity.
    pub distance: [f64; 3],
}

/// One accepted framework and the number of graph draws it took. A draw is
/// only realized when it passes conditions that every distance-rigid graph
/// meets (enough edges, minimum degree, connectivity); positions are drawn
/// independently of the graph, so the accepted distribution equals plain
/// rejection sampling.
pub fn sample_rigid(cfg: &Fig1Config, n: usize, sample: usize) -> Result<(Framework, u64)> {
    let mut rng = substream(cfg.seed, n, sample);
    let rho = cfg.avg_degree / (n as f64 - 1.0);
    let d = cfg.dim;
    let min_degree = d.min(n - 1);
    let mut realized = 0;
    for attempt in 1..=cfg.max_attempts {
        let g = erdos_renyi_graph(n, rho, &mut rng);
        if g.edge_count() < distance_rank_target(n, d) || (0..n).any(|i| g.degree(i) < min_degree) || !g.is_connected() {
            continue;
        }
        realized += 1;
        let f = place(g, d, &mut rng)?;
        if f.is_idr_any_size(cfg.tol) && f.is_ibr_rank(cfg.tol) {
            return Ok((f, attempt));
        }
    }
    Err(ExperimentError::SamplingExhausted {
        n,
        sample,
        attempts: cfg.max_attempts,
        detail: format!("{realized} draws passed the combinatorial filter, none rigid"),
    })
}

fn percent_within(radii: &[Vec<Radius>], k: usize) -> f64 {
    let total: usize = radii.iter().map(Vec::len).sum();
    let hits = radii.iter().flatten().filter(|r| r.finite().is_some_and(|r| r <= k)).count();
    100.0 * hits as f64 / total as f64
}

pub fn run_fig1(cfg: &Fig1Config, exec: Execution) -> Result<Vec<Fig1Row>> {
    let mut rows = Vec::new();
    for &n in &cfg.n_values {
        let results = exec.map(cfg.samples, |s| -> Result<_> {
            let (f, attempts) = sample_rigid(cfg, n, s)?;
            let b = decompose_with(&f, RigidityCriterion::Bearing, cfg.tol, Execution::Sequential)?;
            let d = decompose_with(&f, RigidityCriterion::Distance, cfg.tol, Execution::Sequential)?;
            Ok((attempts, b.r_star, d.r_star))
        });
        let results = results.into_iter().collect::<Result<Vec<_>>>()?;
        let attempts = results.iter().map(|r| r.0).sum();
        let bearing: Vec<Vec<Radius>> = results.iter().map(|r| r.1.clone()).collect();
        let distance: Vec<Vec<Radius>> = results.iter().map(|r| r.2.clone()).collect();
        rows.push(Fig1Row {
            n,
            samples: cfg.samples,
            attempts,
            bearing: [1, 2, 3].map(|k| percent_within(&bearing, k)),
            distance: [1, 2, 3].map(|k| percent_within(&distance, k)),
        });
    }
    Ok(rows)
}

pub fn fig1_table(cfg: &Fig1Config, rows: &[Fig1Row]) -> Table {
    let mut t = Table::new([
        "n",
        "samples",
        "attempts",
        "bearing_le1",
        "bearing_le2",
        "bearing_le3",
        "distance_le1",
        "distance_le2",
        "distance_le3",
    ])
    .meta("experiment", "fig1")
    .meta("config_sha256", config_hash(cfg))
    .meta("seed", cfg.seed)
    .meta("samples_per_n", cfg.samples);
    for r in rows {
        let mut row = vec![r.n.to_string(), r.samples.to_string(), r.attempts.to_string()];
        row.extend(r.bearing.iter().chain(&r.distance).map(|&x| num(x)));
        t.push(row);
    }
    t
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_run_is_deterministic() {
        let cfg = Fig1Config {
            n_values: vec![10, 12],
            samples: 4,
            ..Fig1Config::default()
        };
        let a = run_fig1(&cfg, Execution::Parallel).unwrap();
        let b = run_fig1(&cfg, Execution::Sequential).unwrap();
        assert_eq!(a, b);
        assert_eq!(fig1_table(&cfg, &a).to_string(), fig1_table(&cfg, &b).to_string());
        for r in &a {
            assert!(r.bearing[0] <= r.bearing[1] && r.bearing[1] <= r.bearing[2]);
            assert!(r.distance[2] <= 100.0);
        }
    }

    #[test]
    fn exhausted_sampling_is_reported() {
        let cfg = Fig1Config {
            max_attempts: 1,
            avg_degree: 1.0,
            ..Fig1Config::default()
        };
        assert!(matches!(sample_rigid(&cfg, 30, 0), Err(ExperimentError::SamplingExhausted { .. })));
    }
}
