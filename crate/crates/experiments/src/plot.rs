//! SVG line charts from result CSVs. The first column is the x axis.

use std::path::Path;

use plotters::prelude::*;

use crate::error::{ExperimentError, Result};
use crate::table::Table;

/// Columns plotted by default: every numeric column after the first that
/// has at least one finite value.
pub fn default_columns(t: &Table) -> Vec<String> {
    t.header
        .iter()
        .skip(1)
        .filter(|h| t.numbers(h).is_some_and(|v| v.iter().any(|x| x.is_finite())))
        .cloned()
        .collect()
}

fn plot_err(e: impl std::fmt::Display) -> ExperimentError {
    ExperimentError::Io(format!("plot: {e}"))
}

pub fn plot_table(t: &Table, columns: &[String], title: &str, out: &Path) -> Result<()> {
    let x_name = t
        .header
        .first()
        .ok_or_else(|| ExperimentError::Input("empty table".into()))?;
    let xs = t.numbers(x_name).unwrap_or_default();
    let mut series = Vec::new();
    for c in columns {
        let ys = t
            .numbers(c)
            .ok_or_else(|| ExperimentError::Input(format!("no column {c:?}")))?;
        let pts: Vec<(f64, f64)> = xs
            .iter()
            .zip(&ys)
            .filter(|(x, y)| x.is_finite() && y.is_finite())
            .map(|(&x, &y)| (x, y))
            .collect();
        series.push((c.clone(), pts));
    }
    let all = series.iter().flat_map(|(_, p)| p.iter());
    let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for &(x, y) in all {
        x0 = x0.min(x);
        x1 = x1.max(x);
        y0 = y0.min(y);
        y1 = y1.max(y);
    }
    if !x0.is_finite() {
        return Err(ExperimentError::Input("nothing to plot".into()));
    }
    if x1 <= x0 {
        x1 = x0 + 1.0;
    }
    let pad = ((y1 - y0) * 0.05).max(1e-9);
    let (y0, y1) = (y0 - pad, y1 + pad);

    let root = SVGBackend::new(out, (960, 600)).into_drawing_area();
    root.fill(&WHITE).map_err(plot_err)?;
    let mut chart = ChartBuilder::on(&root)
        .caption(title, ("sans-serif", 20))
        .margin(12)
        .x_label_area_size(36)
        .y_label_area_size(56)
        .build_cartesian_2d(x0..x1, y0..y1)
        .map_err(plot_err)?;
    chart.configure_mesh().x_desc(x_name.as_str()).draw().map_err(plot_err)?;
    for (k, (name, pts)) in series.into_iter().enumerate() {
        let color = Palette99::pick(k).to_rgba();
        chart
            .draw_series(LineSeries::new(pts, color.stroke_width(2)))
            .map_err(plot_err)?
            .label(name)
            .legend(move |(x, y)| PathElement::new(vec![(x, y), (x + 16, y)], color.stroke_width(2)));
    }
    chart
        .configure_series_labels()
        .background_style(WHITE.mix(0.8))
        .border_style(BLACK)
        .draw()
        .map_err(plot_err)?;
    root.present().map_err(plot_err)?;
    Ok(())
}

/// Plots `csv` into `<csv stem>.svg` beside it and returns that path.
pub fn plot_csv(csv: &Path, columns: Option<&[String]>) -> Result<std::path::PathBuf> {
    let t = Table::load(csv)?;
    let cols = match columns {
        Some(c) => c.to_vec(),
        None => default_columns(&t),
    };
    let out = csv.with_extension("svg");
    let title = t
        .meta_value("experiment")
        .map(str::to_string)
        .unwrap_or_else(|| csv.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default());
    plot_table(&t, &cols, &title, &out)?;
    Ok(out)
}
