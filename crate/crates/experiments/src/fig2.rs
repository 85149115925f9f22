//! Protocol delay and complexity on bearing-rigid sensing frameworks.

use bearing_rigidity::protocol::{metrics, ProtocolMetrics, Routing};
use bearing_rigidity::sensing::comm_graph_of;
use bearing_rigidity::{decompose, Execution};

use crate::config::{config_hash, DiameterGraph, Fig2Config};
use crate::error::{ExperimentError, Result};
use crate::generate::{gen_sensing_framework, substream};
use crate::table::{num, Table};

/// Normalized per-robot metrics of one accepted framework.
#[derive(Debug, Clone, PartialEq)]
pub struct Fig2Sample {
    pub attempts: u64,
    pub delay: Vec<f64>,
    pub complexity: Vec<f64>,
    pub diameter: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Fig2Row {
    pub n: usize,
    pub samples: usize,
    pub attempts: u64,
    /// Percent of robots with `h_i <= a` for each configured `a`.
    pub delay_le: Vec<f64>,
    /// Percent of robots with `c_i <= b` for each configured `b`.
    pub complexity_le: Vec<f64>,
    /// Percent with `h_i` inside the delay band.
    pub in_band: f64,
    /// Percent with `h_i` in the band and `c_i <= bound`.
    pub in_band_low_cost: f64,
    /// Percent with `h_i` at most the band's lower end and `c_i <= bound`.
    pub fast_low_cost: f64,
    /// Percent with `h_i` at most the band's lower end and `c_i >= bound`.
    pub fast_high_cost: f64,
    pub mean_delay: f64,
    pub mean_complexity: f64,
    pub mean_diameter: f64,
}

pub fn sample_metrics(cfg: &Fig2Config, n: usize, sample: usize) -> Result<Fig2Sample> {
    let mut rng = substream(cfg.seed, n, sample);
    let mut connected = 0;
    for attempt in 1..=cfg.max_attempts {
        let (f, states) = gen_sensing_framework(n, cfg.range, cfg.fov_cos, &cfg.region, &mut rng)?;
        if !f.graph().is_connected() {
            continue;
        }
        connected += 1;
        let dec = decompose(&f, cfg.tol)?;
        if !dec.is_rigid() {
            continue;
        }
        let routing = match cfg.routing {
            Routing::Sensing => f.graph().clone(),
            Routing::Comm => comm_graph_of(&states, cfg.range),
        };
        let m: ProtocolMetrics = metrics(&routing, f.graph(), &dec)?;
        let diameter = match cfg.diameter_graph {
            DiameterGraph::Sensing => m.diameter,
            DiameterGraph::Routing => routing.diameter()?,
        };
        let delay = m
            .round_trip
            .iter()
            .map(|h| h.expect("rigid decompositions have finite radii") as f64 / diameter as f64)
            .collect();
        return Ok(Fig2Sample {
            attempts: attempt,
            delay,
            complexity: m.complexity,
            diameter,
        });
    }
    Err(ExperimentError::SamplingExhausted {
        n,
        sample,
        attempts: cfg.max_attempts,
        detail: format!("{connected} connected draws, none bearing rigid"),
    })
}

fn percent(count: usize, total: usize) -> f64 {
    100.0 * count as f64 / total as f64
}

pub fn summarize(cfg: &Fig2Config, n: usize, samples: &[Fig2Sample]) -> Fig2Row {
    let pairs: Vec<(f64, f64)> = samples
        .iter()
        .flat_map(|s| s.delay.iter().copied().zip(s.complexity.iter().copied()))
        .collect();
    let total = pairs.len();
    let count = |pred: &dyn Fn(f64, f64) -> bool| pairs.iter().filter(|&&(h, c)| pred(h, c)).count();
    let [lo, hi] = cfg.delay_band;
    let b = cfg.complexity_bound;
    Fig2Row {
        n,
        samples: samples.len(),
        attempts: samples.iter().map(|s| s.attempts).sum(),
        delay_le: cfg
            .delay_thresholds
            .iter()
            .map(|&a| percent(count(&|h, _| h <= a), total))
            .collect(),
        complexity_le: cfg
            .complexity_thresholds
            .iter()
            .map(|&t| percent(count(&|_, c| c <= t), total))
            .collect(),
        in_band: percent(count(&|h, _| lo <= h && h <= hi), total),
        in_band_low_cost: percent(count(&|h, c| lo <= h && h <= hi && c <= b), total),
        fast_low_cost: percent(count(&|h, c| h <= lo && c <= b), total),
        fast_high_cost: percent(count(&|h, c| h <= lo && c >= b), total),
        mean_delay: pairs.iter().map(|p| p.0).sum::<f64>() / total as f64,
        mean_complexity: pairs.iter().map(|p| p.1).sum::<f64>() / total as f64,
        mean_diameter: samples.iter().map(|s| s.diameter as f64).sum::<f64>() / samples.len() as f64,
    }
}

pub fn run_fig2(cfg: &Fig2Config, exec: Execution) -> Result<Vec<Fig2Row>> {
    let mut rows = Vec::new();
    for &n in &cfg.n_values {
        let samples = exec
            .map(cfg.samples, |s| sample_metrics(cfg, n, s))
            .into_iter()
            .collect::<Result<Vec<_>>>()?;
        rows.push(summarize(cfg, n, &samples));
    }
    Ok(rows)
}

pub fn fig2_table(cfg: &Fig2Config, rows: &[Fig2Row]) -> Table {
    let mut header: Vec<String> = ["n", "samples", "attempts"].map(String::from).to_vec();
    header.extend(cfg.delay_thresholds.iter().map(|a| format!("h_le_{a}")));
    header.extend(cfg.complexity_thresholds.iter().map(|b| format!("c_le_{b}")));
    let [lo, hi] = cfg.delay_band;
    let b = cfg.complexity_bound;
    header.extend([
        format!("h_in_{lo}_{hi}"),
        format!("h_in_{lo}_{hi}_and_c_le_{b}"),
        format!("h_le_{lo}_and_c_le_{b}"),
        format!("h_le_{lo}_and_c_ge_{b}"),
        "mean_h".into(),
        "mean_c".into(),
        "mean_diameter".into(),
    ]);
    let mut t = Table::new(header)
        .meta("experiment", "fig2")
        .meta("config_sha256", config_hash(cfg))
        .meta("seed", cfg.seed)
        .meta("samples_per_n", cfg.samples);
    for r in rows {
        let mut row = vec![r.n.to_string(), r.samples.to_string(), r.attempts.to_string()];
        row.extend(r.delay_le.iter().chain(&r.complexity_le).map(|&x| num(x)));
        row.extend(
            [
                r.in_band,
                r.in_band_low_cost,
                r.fast_low_cost,
                r.fast_high_cost,
                r.mean_delay,
                r.mean_complexity,
                r.mean_diameter,
            ]
            .map(num),
        );
        t.push(row);
    }
    t
}
