//! Static SVG figures. Every plotted number is read from an input CSV.

use std::path::Path;

use anyhow::{anyhow, bail, Result};
use clap::ValueEnum;
use plotters::prelude::*;

use crate::io::Table;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PlotKind {
    /// Per-trial cost against bias, plus an optional `bias,mean_cost` curve.
    Cost,
    /// Per-trial coverage against bias, plus an optional `bias,mean_coverage` curve.
    Coverage,
    /// `r_acc` and `n_acc` against the threshold on two axes.
    Acceptability,
    /// Oscillator colours over time, one strip per oscillator.
    Ratio,
    /// Order parameter and blue fraction over time.
    Order,
    /// Path in the plane.
    Trajectory,
    /// Per-robot turning-rate mean with a one-sigma bar.
    Estimates,
    /// Sensor readings against sample index, one line per robot.
    Response,
}

impl PlotKind {
    pub fn name(self) -> &'static str {
        match self {
            PlotKind::Cost => "cost",
            PlotKind::Coverage => "coverage",
            PlotKind::Acceptability => "acceptability",
            PlotKind::Ratio => "ratio",
            PlotKind::Order => "order",
            PlotKind::Trajectory => "trajectory",
            PlotKind::Estimates => "estimates",
            PlotKind::Response => "response",
        }
    }
}

const SIZE: (u32, u32) = (900, 600);
const FONT: &str = "sans-serif";

fn range(values: impl IntoIterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = values
        .into_iter()
        .filter(|v| v.is_finite())
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
    if !lo.is_finite() {
        return (0.0, 1.0);
    }
    let pad = if hi > lo { 0.05 * (hi - lo) } else { 0.5 };
    (lo - pad, hi + pad)
}

fn draw_err<E: std::error::Error + Send + Sync + 'static>(e: DrawingAreaErrorKind<E>) -> anyhow::Error {
    anyhow!("plot rendering failed: {e}")
}

/// Renders `kind` from `inputs` into the SVG at `output`.
pub fn render(kind: PlotKind, inputs: &[&Path], output: &Path) -> Result<()> {
    if inputs.is_empty() {
        bail!("plot needs an input CSV");
    }
    let tables = inputs.iter().map(|p| Table::read(p)).collect::<Result<Vec<_>>>()?;
    match kind {
        PlotKind::Cost => scatter_with_curve(&tables, "cost", "mean_cost", output),
        PlotKind::Coverage => scatter_with_curve(&tables, "coverage", "mean_coverage", output),
        PlotKind::Acceptability => acceptability(&tables[0], output),
        PlotKind::Ratio => ratio(&tables[0], output),
        PlotKind::Order => order(&tables[0], output),
        PlotKind::Trajectory => trajectory(&tables, output),
        PlotKind::Estimates => estimates(&tables[0], output),
        PlotKind::Response => response(&tables[0], output),
    }
}

fn scatter_with_curve(tables: &[Table], metric: &str, curve_col: &str, output: &Path) -> Result<()> {
    let t = &tables[0];
    t.require(&["bias", metric])?;
    let bias = t.column("bias")?;
    let values = t.column_opt(metric)?;
    let points: Vec<(f64, f64)> = bias
        .iter()
        .zip(&values)
        .filter_map(|(&b, v)| v.map(|v| (b, v)))
        .collect();
    let curve = match tables.get(1) {
        Some(c) => {
            c.require(&["bias", curve_col])?;
            c.column("bias")?.into_iter().zip(c.column(curve_col)?).collect()
        }
        None => Vec::new(),
    };
    let (x0, x1) = range(points.iter().chain(&curve).map(|p| p.0));
    let (_, y1) = range(points.iter().chain(&curve).map(|p| p.1));

    let root = SVGBackend::new(output, SIZE).into_drawing_area();
    root.fill(&WHITE).map_err(draw_err)?;
    let mut chart = ChartBuilder::on(&root)
        .margin(20)
        .x_label_area_size(40)
        .y_label_area_size(60)
        .build_cartesian_2d(x0..x1, 0.0..y1)
        .map_err(draw_err)?;
    chart
        .configure_mesh()
        .x_desc("bias")
        .y_desc(metric)
        .label_style((FONT, 14))
        .draw()
        .map_err(draw_err)?;
    chart
        .draw_series(
            points
                .iter()
                .map(|&p| Circle::new(p, 2, RGBColor(120, 120, 120).mix(0.4).filled())),
        )
        .map_err(draw_err)?;
    if !curve.is_empty() {
        chart
            .draw_series(LineSeries::new(curve, BLACK.stroke_width(2)))
            .map_err(draw_err)?;
    }
    root.present().map_err(draw_err)
}

fn acceptability(t: &Table, output: &Path) -> Result<()> {
    t.require(&["delta_acc", "r_acc", "n_acc"])?;
    let d = t.column("delta_acc")?;
    let r = t.column("r_acc")?;
    let n = t.column("n_acc")?;
    let (x0, x1) = range(d.iter().copied());
    let (_, r1) = range(r.iter().copied());
    let (_, n1) = range(n.iter().copied());

    let root = SVGBackend::new(output, SIZE).into_drawing_area();
    root.fill(&WHITE).map_err(draw_err)?;
    let mut chart = ChartBuilder::on(&root)
        .margin(20)
        .x_label_area_size(40)
        .y_label_area_size(60)
        .right_y_label_area_size(60)
        .build_cartesian_2d(x0..x1, 0.0..r1)
        .map_err(draw_err)?
        .set_secondary_coord(x0..x1, 0.0..n1);
    chart
        .configure_mesh()
        .x_desc("delta_acc")
        .y_desc("r_acc")
        .label_style((FONT, 14))
        .draw()
        .map_err(draw_err)?;
    chart
        .configure_secondary_axes()
        .y_desc("n_acc")
        .label_style((FONT, 14))
        .draw()
        .map_err(draw_err)?;
    chart
        .draw_series(LineSeries::new(d.iter().copied().zip(r), GREEN.stroke_width(2)))
        .map_err(draw_err)?;
    chart
        .draw_secondary_series(LineSeries::new(d.iter().copied().zip(n), RED.stroke_width(2)))
        .map_err(draw_err)?;
    root.present().map_err(draw_err)
}

fn ratio(t: &Table, output: &Path) -> Result<()> {
    t.require(&["t", "osc_id", "color"])?;
    let time = t.column("t")?;
    let ids = t.column("osc_id")?;
    let colors = t.text_column("color")?;
    let mut instants: Vec<f64> = time.clone();
    instants.dedup();
    let width = if instants.len() > 1 { instants[1] - instants[0] } else { 1.0 };
    let n = ids.iter().fold(0.0f64, |a, &b| a.max(b)) + 1.0;
    let (x0, _) = range(time.iter().copied());
    let x1 = instants.last().copied().unwrap_or(0.0) + width;

    let root = SVGBackend::new(output, SIZE).into_drawing_area();
    root.fill(&WHITE).map_err(draw_err)?;
    let mut chart = ChartBuilder::on(&root)
        .margin(20)
        .x_label_area_size(40)
        .y_label_area_size(60)
        .build_cartesian_2d(x0.max(0.0)..x1, 0.0..n)
        .map_err(draw_err)?;
    chart
        .configure_mesh()
        .x_desc("t (s)")
        .y_desc("oscillator")
        .disable_mesh()
        .label_style((FONT, 14))
        .draw()
        .map_err(draw_err)?;
    chart
        .draw_series((0..time.len()).map(|k| {
            let c = if colors[k] == "blue" { BLUE } else { RED };
            Rectangle::new([(time[k], ids[k]), (time[k] + width, ids[k] + 1.0)], c.filled())
        }))
        .map_err(draw_err)?;
    root.present().map_err(draw_err)
}

fn order(t: &Table, output: &Path) -> Result<()> {
    t.require(&["t", "r", "blue_fraction"])?;
    let time = t.column("t")?;
    let r = t.column("r")?;
    let b = t.column("blue_fraction")?;
    let (x0, x1) = range(time.iter().copied());

    let root = SVGBackend::new(output, SIZE).into_drawing_area();
    root.fill(&WHITE).map_err(draw_err)?;
    let mut chart = ChartBuilder::on(&root)
        .margin(20)
        .x_label_area_size(40)
        .y_label_area_size(60)
        .build_cartesian_2d(x0..x1, 0.0..1.05)
        .map_err(draw_err)?;
    chart
        .configure_mesh()
        .x_desc("t (s)")
        .label_style((FONT, 14))
        .draw()
        .map_err(draw_err)?;
    chart
        .draw_series(LineSeries::new(time.iter().copied().zip(r), BLACK.stroke_width(2)))
        .map_err(draw_err)?;
    chart
        .draw_series(LineSeries::new(time.iter().copied().zip(b), BLUE))
        .map_err(draw_err)?;
    root.present().map_err(draw_err)
}

fn trajectory(tables: &[Table], output: &Path) -> Result<()> {
    let mut paths = Vec::with_capacity(tables.len());
    for t in tables {
        t.require(&["x", "y"])?;
        let xy: Vec<(f64, f64)> = t.column("x")?.into_iter().zip(t.column("y")?).collect();
        paths.push(xy);
    }
    let (x0, x1) = range(paths.iter().flatten().map(|p| p.0));
    let (y0, y1) = range(paths.iter().flatten().map(|p| p.1));
    let half = 0.5 * (x1 - x0).max(y1 - y0);
    let (cx, cy) = (0.5 * (x0 + x1), 0.5 * (y0 + y1));

    let root = SVGBackend::new(output, (700, 700)).into_drawing_area();
    root.fill(&WHITE).map_err(draw_err)?;
    let mut chart = ChartBuilder::on(&root)
        .margin(20)
        .x_label_area_size(40)
        .y_label_area_size(60)
        .build_cartesian_2d(cx - half..cx + half, cy - half..cy + half)
        .map_err(draw_err)?;
    chart
        .configure_mesh()
        .x_desc("x (m)")
        .y_desc("y (m)")
        .label_style((FONT, 14))
        .draw()
        .map_err(draw_err)?;
    for (i, p) in paths.into_iter().enumerate() {
        chart
            .draw_series(LineSeries::new(p, Palette99::pick(i).stroke_width(1)))
            .map_err(draw_err)?;
    }
    root.present().map_err(draw_err)
}

fn estimates(t: &Table, output: &Path) -> Result<()> {
    t.require(&["robot_id", "mu_i", "sigma_i"])?;
    let mu = t.column("mu_i")?;
    let sd = t.column("sigma_i")?;
    let mut order: Vec<usize> = (0..mu.len()).collect();
    order.sort_by(|&a, &b| mu[a].total_cmp(&mu[b]));
    let (y0, y1) = range(mu.iter().zip(&sd).flat_map(|(m, s)| [m - s, m + s]));

    let root = SVGBackend::new(output, SIZE).into_drawing_area();
    root.fill(&WHITE).map_err(draw_err)?;
    let mut chart = ChartBuilder::on(&root)
        .margin(20)
        .x_label_area_size(40)
        .y_label_area_size(60)
        .build_cartesian_2d(-0.5..(mu.len() as f64 - 0.5), y0..y1)
        .map_err(draw_err)?;
    chart
        .configure_mesh()
        .x_desc("robot (sorted by mean)")
        .y_desc("turning rate (rad/s)")
        .label_style((FONT, 14))
        .draw()
        .map_err(draw_err)?;
    chart
        .draw_series(order.iter().enumerate().map(|(x, &i)| {
            PathElement::new(vec![(x as f64, mu[i] - sd[i]), (x as f64, mu[i] + sd[i])], BLACK)
        }))
        .map_err(draw_err)?;
    chart
        .draw_series(
            order
                .iter()
                .enumerate()
                .map(|(x, &i)| Circle::new((x as f64, mu[i]), 3, RED.filled())),
        )
        .map_err(draw_err)?;
    root.present().map_err(draw_err)
}

fn response(t: &Table, output: &Path) -> Result<()> {
    t.require(&["robot_id", "sample_index", "reading"])?;
    let ids = t.column("robot_id")?;
    let k = t.column("sample_index")?;
    let reading = t.column("reading")?;
    let (x0, x1) = range(k.iter().copied());
    let (_, y1) = range(reading.iter().copied());

    let root = SVGBackend::new(output, SIZE).into_drawing_area();
    root.fill(&WHITE).map_err(draw_err)?;
    let mut chart = ChartBuilder::on(&root)
        .margin(20)
        .x_label_area_size(40)
        .y_label_area_size(60)
        .build_cartesian_2d(x0..x1, 0.0..y1)
        .map_err(draw_err)?;
    chart
        .configure_mesh()
        .x_desc("sample")
        .y_desc("reading")
        .label_style((FONT, 14))
        .draw()
        .map_err(draw_err)?;
    let mut start = 0;
    let mut series = 0;
    while start < ids.len() {
        let end = (start..ids.len()).find(|&j| ids[j] != ids[start]).unwrap_or(ids.len());
        chart
            .draw_series(LineSeries::new(
                (start..end).map(|j| (k[j], reading[j])),
                Palette99::pick(series),
            ))
            .map_err(draw_err)?;
        series += 1;
        start = end;
    }
    root.present().map_err(draw_err)
}
