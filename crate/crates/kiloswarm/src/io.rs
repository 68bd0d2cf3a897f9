//! CSV and raster formats.
//!
//! Every CSV is UTF-8 with LF line endings. Floats are written with Rust's
//! shortest round-trip formatting, so reading a value back yields the same
//! `f64` bit pattern.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use kiloswarm_core::environment::CoverageGrid;
use kiloswarm_core::estimation::{BiasEstimate, EnsembleModel, ModelComparison};
use kiloswarm_core::harness::{AcceptabilityPoint, EnsembleDistribution, TrialResult};
use kiloswarm_core::kinematics::{Pose, Sample, Trajectory};

pub type CsvWriter = csv::Writer<BufWriter<File>>;

pub fn fmt_f64(x: f64) -> String {
    format!("{x}")
}

fn opt(x: Option<f64>) -> String {
    x.map(fmt_f64).unwrap_or_default()
}

pub fn csv_writer(path: &Path, header: &[&str]) -> Result<CsvWriter> {
    let file = File::create(path).with_context(|| format!("cannot create {}", path.display()))?;
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(BufWriter::new(file));
    w.write_record(header)?;
    Ok(w)
}

pub fn finish(mut w: CsvWriter) -> Result<()> {
    w.flush()?;
    Ok(())
}

pub const TRAJECTORY_HEADER: [&str; 4] = ["t", "x", "y", "theta"];

pub fn write_trajectory(path: &Path, traj: &Trajectory) -> Result<()> {
    let mut w = csv_writer(path, &TRAJECTORY_HEADER)?;
    for s in &traj.samples {
        w.write_record([
            fmt_f64(s.t),
            fmt_f64(s.pose.x),
            fmt_f64(s.pose.y),
            fmt_f64(s.pose.theta),
        ])?;
    }
    finish(w)
}

/// An in-memory CSV with columns addressed by name.
#[derive(Debug, Clone)]
pub struct Table {
    pub path: PathBuf,
    pub headers: Vec<String>,
    pub rows: Vec<csv::StringRecord>,
}

impl Table {
    pub fn read(path: &Path) -> Result<Table> {
        let mut r = csv::ReaderBuilder::new()
            .from_path(path)
            .with_context(|| format!("cannot read {}", path.display()))?;
        let headers = r.headers()?.iter().map(str::to_string).collect();
        let rows = r.records().collect::<Result<Vec<_>, _>>()?;
        Ok(Table {
            path: path.to_path_buf(),
            headers,
            rows,
        })
    }

    pub fn index_of(&self, name: &str) -> Result<usize> {
        self.headers.iter().position(|h| h == name).ok_or_else(|| {
            anyhow!(MissingColumn {
                path: self.path.clone(),
                column: name.to_string(),
            })
        })
    }

    /// Fails naming the first absent column.
    pub fn require(&self, names: &[&str]) -> Result<()> {
        for n in names {
            self.index_of(n)?;
        }
        Ok(())
    }

    /// A numeric column; empty cells become `None`.
    pub fn column_opt(&self, name: &str) -> Result<Vec<Option<f64>>> {
        let i = self.index_of(name)?;
        self.rows
            .iter()
            .enumerate()
            .map(|(k, r)| {
                let v = r.get(i).unwrap_or("");
                if v.is_empty() {
                    Ok(None)
                } else {
                    v.parse().map(Some).with_context(|| {
                        format!("{}: row {}: bad number in `{name}`: {v:?}", self.path.display(), k + 2)
                    })
                }
            })
            .collect()
    }

    pub fn column(&self, name: &str) -> Result<Vec<f64>> {
        self.column_opt(name)?
            .into_iter()
            .enumerate()
            .map(|(k, v)| {
                v.ok_or_else(|| {
                    anyhow!("{}: row {}: empty `{name}`", self.path.display(), k + 2)
                })
            })
            .collect()
    }

    pub fn text_column(&self, name: &str) -> Result<Vec<String>> {
        let i = self.index_of(name)?;
        Ok(self
            .rows
            .iter()
            .map(|r| r.get(i).unwrap_or("").to_string())
            .collect())
    }
}

/// Input CSV lacks a column required by its schema.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MissingColumn {
    pub path: PathBuf,
    pub column: String,
}

impl std::fmt::Display for MissingColumn {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}: missing column `{}`", self.path.display(), self.column)
    }
}

impl std::error::Error for MissingColumn {}

pub fn read_trajectory(path: &Path) -> Result<Trajectory> {
    let t = Table::read(path)?;
    t.require(&TRAJECTORY_HEADER)?;
    let (ts, xs, ys, th) = (t.column("t")?, t.column("x")?, t.column("y")?, t.column("theta")?);
    if ts.len() < 2 {
        bail!("{}: trajectory needs at least two samples", path.display());
    }
    let dt = ts[1] - ts[0];
    if dt.is_nan() || dt <= 0.0 {
        bail!("{}: timestamps must increase", path.display());
    }
    let samples = (0..ts.len())
        .map(|k| Sample {
            t: ts[k],
            pose: Pose {
                x: xs[k],
                y: ys[k],
                theta: th[k],
            },
        })
        .collect();
    Ok(Trajectory { dt, samples })
}

pub const RESULTS_HEADER: [&str; 9] = [
    "robot_id",
    "bias",
    "trial_id",
    "cost",
    "coverage",
    "stopped",
    "final_x",
    "final_y",
    "final_theta",
];

pub fn write_results(path: &Path, results: &[TrialResult]) -> Result<()> {
    let mut w = csv_writer(path, &RESULTS_HEADER)?;
    for r in results {
        w.write_record([
            r.robot_id.to_string(),
            fmt_f64(r.bias),
            r.trial_id.to_string(),
            opt(r.cost),
            opt(r.coverage),
            r.stopped.to_string(),
            fmt_f64(r.final_pose.x),
            fmt_f64(r.final_pose.y),
            fmt_f64(r.final_pose.theta),
        ])?;
    }
    finish(w)
}

pub fn read_results(path: &Path) -> Result<Vec<TrialResult>> {
    let t = Table::read(path)?;
    t.require(&RESULTS_HEADER)?;
    let robot = t.column("robot_id")?;
    let bias = t.column("bias")?;
    let trial = t.column("trial_id")?;
    let cost = t.column_opt("cost")?;
    let coverage = t.column_opt("coverage")?;
    let stopped = t.text_column("stopped")?;
    let (fx, fy, ft) = (t.column("final_x")?, t.column("final_y")?, t.column("final_theta")?);
    Ok((0..t.rows.len())
        .map(|k| TrialResult {
            robot_id: robot[k] as u64,
            bias: bias[k],
            trial_id: trial[k] as u64,
            cost: cost[k],
            coverage: coverage[k],
            stopped: stopped[k] == "true",
            final_pose: Pose {
                x: fx[k],
                y: fy[k],
                theta: ft[k],
            },
        })
        .collect())
}

/// Two-column curve, e.g. `bias,mean_cost`.
pub fn write_curve(path: &Path, header: [&str; 2], curve: &[(f64, f64)]) -> Result<()> {
    let mut w = csv_writer(path, &header)?;
    for &(a, b) in curve {
        w.write_record([fmt_f64(a), fmt_f64(b)])?;
    }
    finish(w)
}

pub fn write_acceptability(path: &Path, points: &[AcceptabilityPoint]) -> Result<()> {
    let mut w = csv_writer(path, &["delta_acc", "r_acc", "n_acc"])?;
    for p in points {
        w.write_record([fmt_f64(p.delta_acc), fmt_f64(p.r_acc), p.n_acc.to_string()])?;
    }
    finish(w)
}

pub fn write_ensemble(path: &Path, d: &EnsembleDistribution) -> Result<()> {
    let s = &d.summary;
    let mut w = csv_writer(path, &["statistic", "value"])?;
    for (k, v) in [
        ("min", s.min),
        ("q25", s.q25),
        ("median", s.median),
        ("q75", s.q75),
        ("max", s.max),
        ("mean", s.mean),
        ("count", d.values.len() as f64),
    ] {
        w.write_record([k.to_string(), fmt_f64(v)])?;
    }
    finish(w)
}

pub fn write_coverage_summary(path: &Path, grid: &CoverageGrid) -> Result<()> {
    let mut w = csv_writer(path, &["cells_total", "cells_visited", "fraction"])?;
    w.write_record([
        grid.total_cells().to_string(),
        grid.visited_count().to_string(),
        fmt_f64(grid.coverage_fraction()),
    ])?;
    finish(w)
}

/// Binary PGM of the coverage raster: visited cells white, top row at
/// `y_max`.
pub fn write_pgm(path: &Path, grid: &CoverageGrid) -> Result<()> {
    let (nx, ny) = grid.dims();
    let mut out = BufWriter::new(
        File::create(path).with_context(|| format!("cannot create {}", path.display()))?,
    );
    write!(out, "P5\n{nx} {ny}\n255\n")?;
    let mut row = vec![0u8; nx];
    for j in (0..ny).rev() {
        for (i, px) in row.iter_mut().enumerate() {
            *px = if grid.is_visited(i, j) { 255 } else { 0 };
        }
        out.write_all(&row)?;
    }
    out.flush()?;
    Ok(())
}

/// `(robot_id, trial_id, trajectory path)`; relative paths are taken from
/// the index file's directory.
pub fn read_index(path: &Path) -> Result<Vec<(u64, u64, PathBuf)>> {
    let t = Table::read(path)?;
    t.require(&["robot_id", "trial_id", "path"])?;
    let base = path.parent().unwrap_or(Path::new("."));
    let robots = t.column("robot_id")?;
    let trials = t.column("trial_id")?;
    let paths = t.text_column("path")?;
    Ok((0..t.rows.len())
        .map(|k| {
            let p = PathBuf::from(&paths[k]);
            let p = if p.is_absolute() { p } else { base.join(p) };
            (robots[k] as u64, trials[k] as u64, p)
        })
        .collect())
}

pub fn write_estimates(path: &Path, estimates: &[BiasEstimate]) -> Result<()> {
    let mut w = csv_writer(path, &["robot_id", "mu_i", "sigma_i", "n_trials"])?;
    for e in estimates {
        w.write_record([
            e.robot_id.to_string(),
            fmt_f64(e.mu_i),
            fmt_f64(e.sigma_i),
            e.n_trials.to_string(),
        ])?;
    }
    finish(w)
}

pub fn write_comparison(path: &Path, ens: &EnsembleModel, cmp: &ModelComparison) -> Result<()> {
    let mut w = csv_writer(
        path,
        &[
            "mu",
            "sigma_ensemble",
            "n_trials_total",
            "mean_sigma_individual",
            "ratio",
            "fraction_below",
        ],
    )?;
    w.write_record([
        fmt_f64(ens.mu),
        fmt_f64(cmp.sigma_ensemble),
        ens.n_trials_total.to_string(),
        fmt_f64(cmp.mean_sigma_individual),
        opt(cmp.ratio),
        fmt_f64(cmp.fraction_below),
    ])?;
    finish(w)
}
