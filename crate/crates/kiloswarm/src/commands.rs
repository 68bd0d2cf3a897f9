//! Subcommand implementations. Each command writes its manifest first, runs
//! its work items on the worker pool and writes every output from this
//! thread once the results are aggregated.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context as _, Result};
use kiloswarm_core::environment::CoverageGrid;
use kiloswarm_core::estimation::{compare_models, fit_ensemble, fit_individual, trial_turning_rate, TrialRate};
use kiloswarm_core::harness::{
    acceptability_curves, ensemble_distribution, mean_curve, Metric, SweepPlan, TrialResult,
};
use kiloswarm_core::kinematics::{Pose, Trajectory};
use kiloswarm_core::oscillators::{Color, Oscillator, OscillatorPopulation, PULSES_PER_CYCLE};
use kiloswarm_core::rng::TrialRng;
use kiloswarm_core::sensing::{self, SensorModel, SENSOR_MAX};

use crate::config::{Config, ConfigError, ManifestSection};
use crate::io::{self, csv_writer, fmt_f64};
use crate::runner::map_indexed;

/// Stream id for oscillator natural rates and phases, one trial per repetition.
pub const OSCILLATOR_STREAM: u64 = u64::MAX - 1;
/// Stream id for sensor gains and offsets.
pub const SENSING_STREAM: u64 = u64::MAX - 2;

pub const MANIFEST_FILE: &str = "manifest.toml";

/// Everything a command needs besides its own arguments.
#[derive(Debug, Clone)]
pub struct Context {
    /// Resolved configuration.
    pub config: Config,
    pub config_path: Option<PathBuf>,
    pub out_dir: PathBuf,
    pub workers: usize,
}

impl Context {
    /// Creates the output directory and writes the manifest into it.
    pub fn write_manifest(&self, command: &str) -> Result<()> {
        fs::create_dir_all(&self.out_dir)
            .with_context(|| format!("cannot create output directory {}", self.out_dir.display()))?;
        let mut m = self.config.clone();
        m.manifest = Some(ManifestSection {
            command: command.to_string(),
            config_path: self
                .config_path
                .as_ref()
                .map(|p| p.display().to_string())
                .unwrap_or_default(),
            output_dir: self.out_dir.display().to_string(),
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
        });
        let path = self.out_dir.join(MANIFEST_FILE);
        fs::write(&path, m.to_toml()).with_context(|| format!("cannot write {}", path.display()))
    }
}

fn plan_error(e: kiloswarm_core::Error) -> anyhow::Error {
    ConfigError {
        path: None,
        line: None,
        message: e.to_string(),
    }
    .into()
}

pub fn trajectory_file(robot: usize, trial: usize) -> String {
    format!("trajectory_r{robot}_t{trial}.csv")
}

pub fn simulate(ctx: &Context) -> Result<()> {
    let cfg = &ctx.config;
    let plan = SweepPlan::new(cfg.simulate_experiment()).map_err(plan_error)?;
    ctx.write_manifest("simulate")?;
    let items: Vec<(usize, usize)> = cfg
        .simulate
        .robots
        .iter()
        .flat_map(|&r| cfg.simulate.trials.iter().map(move |&k| (r, k)))
        .collect();
    let initial = cfg.simulate.initial.map(|[x, y, t]| Pose::new(x, y, t));
    let runs = map_indexed(ctx.workers, items.len(), |i| {
        let (r, k) = items[i];
        match initial {
            Some(p) => plan.simulate_from(r, k, p),
            None => plan.simulate(r, k),
        }
    })?;

    let coverage = plan.config().controller.metric() == Metric::Coverage;
    let env = &plan.config().environment;
    let mut index = csv_writer(&ctx.out_dir.join("index.csv"), &["robot_id", "trial_id", "path"])?;
    for (&(r, k), run) in items.iter().zip(&runs) {
        let name = trajectory_file(r, k);
        io::write_trajectory(&ctx.out_dir.join(&name), &run.trajectory)?;
        index.write_record([r.to_string(), k.to_string(), name])?;
        if coverage {
            let mut grid = CoverageGrid::new(env.arena, env.cell_size).map_err(plan_error)?;
            for p in run.trajectory.poses() {
                grid.mark_pose(p, env.footprint_radius);
            }
            let stem = format!("coverage_r{r}_t{k}");
            io::write_coverage_summary(&ctx.out_dir.join(format!("{stem}.csv")), &grid)?;
            io::write_pgm(&ctx.out_dir.join(format!("{stem}.pgm")), &grid)?;
        }
    }
    io::finish(index)
}

/// Directory of the result set for one `p_right` value.
pub fn result_set_dir(out_dir: &Path, p_right: Option<f64>, n_sets: usize) -> PathBuf {
    match p_right {
        Some(p) if n_sets > 1 => out_dir.join(format!("p_right_{}", fmt_f64(p))),
        _ => out_dir.to_path_buf(),
    }
}

/// Runs every trial of `plan` on the worker pool, in canonical order.
pub fn run_plan(plan: &SweepPlan, workers: usize) -> Result<Vec<TrialResult>> {
    map_indexed(workers, plan.n_trials(), |i| plan.run_index(i))
}

pub fn sweep(ctx: &Context) -> Result<()> {
    let cfg = &ctx.config;
    let p_rights = cfg.sweep_p_rights();
    let plans = p_rights
        .iter()
        .map(|&p| SweepPlan::new(cfg.experiment(p)).map_err(plan_error))
        .collect::<Result<Vec<_>>>()?;
    let thresholds = cfg.thresholds();
    ctx.write_manifest("sweep")?;
    for (&p, plan) in p_rights.iter().zip(&plans) {
        let results = run_plan(plan, ctx.workers)?;
        let dir = result_set_dir(&ctx.out_dir, p, p_rights.len());
        fs::create_dir_all(&dir).with_context(|| format!("cannot create {}", dir.display()))?;
        write_result_set(&dir, &results, plan.config().controller.metric(), &thresholds)?;
    }
    Ok(())
}

pub fn write_result_set(
    dir: &Path,
    results: &[TrialResult],
    metric: Metric,
    thresholds: &[f64],
) -> Result<()> {
    io::write_results(&dir.join("results.csv"), results)?;
    let curve = mean_curve(results, metric);
    match metric {
        Metric::Cost => {
            io::write_curve(&dir.join("mean_cost.csv"), ["bias", "mean_cost"], &curve)?;
            let points = acceptability_curves(results, thresholds).map_err(plan_error)?;
            io::write_acceptability(&dir.join("acceptability.csv"), &points)?;
            let ens = ensemble_distribution(results).map_err(plan_error)?;
            io::write_ensemble(&dir.join("ensemble.csv"), &ens)?;
        }
        Metric::Coverage => {
            io::write_curve(&dir.join("mean_coverage.csv"), ["bias", "mean_coverage"], &curve)?;
        }
    }
    Ok(())
}

/// One oscillator run: a coupling strength and a repetition.
#[derive(Debug, Clone)]
pub struct OscillatorRun {
    pub coupling: f64,
    pub repetition: usize,
    pub natural_rates: Vec<f64>,
    pub switch_counts: Vec<usize>,
    /// `(t, phases)` every `record_every` steps, starting at `t = 0`.
    pub history: Vec<(f64, Vec<f64>)>,
    /// `(t, r, blue_fraction)` at the same instants as `history`.
    pub order: Vec<(f64, f64, f64)>,
    /// Time averages over the final quarter of all steps.
    pub final_r: f64,
    pub final_blue_fraction: f64,
}

/// Initial population of repetition `rep`; shared across coupling values.
pub fn oscillator_population(cfg: &Config, rep: usize) -> Vec<Oscillator> {
    let o = &cfg.oscillators;
    let mut rng = TrialRng::for_trial(cfg.seed(), OSCILLATOR_STREAM, rep as u64);
    let mut osc = OscillatorPopulation::heterogeneous(o.n, o.mean_rate, o.rate_sd, o.phase0, &mut rng);
    if o.random_phases {
        for x in &mut osc {
            x.phase = PULSES_PER_CYCLE * rng.unit();
        }
    }
    osc
}

pub fn run_oscillators(cfg: &Config, coupling: f64, rep: usize) -> Result<OscillatorRun> {
    let o = &cfg.oscillators;
    let mut pop = OscillatorPopulation::new(oscillator_population(cfg, rep), coupling, o.topology.into())
        .map_err(plan_error)?;
    let steps = kiloswarm_core::kinematics::step_count(o.duration, o.dt);
    let tail_start = steps - steps / 4;
    let natural_rates = pop.oscillators.iter().map(|x| x.natural_rate).collect();
    let mut colors = pop.colors();
    let mut switch_counts = vec![0usize; colors.len()];
    let mut history = Vec::new();
    let mut order = Vec::new();
    let (mut r_sum, mut b_sum, mut tail) = (0.0, 0.0, 0usize);
    for k in 0..=steps {
        if k > 0 {
            pop.advance(o.dt);
            let now = pop.colors();
            for ((c, n), s) in colors.iter().zip(&now).zip(&mut switch_counts) {
                if c != n {
                    *s += 1;
                }
            }
            colors = now;
        }
        let t = k as f64 * o.dt;
        let (r, b) = (pop.order_parameter(), kiloswarm_core::oscillators::blue_fraction(&colors));
        if k >= tail_start {
            r_sum += r;
            b_sum += b;
            tail += 1;
        }
        if k % o.record_every == 0 {
            history.push((t, pop.phases()));
            order.push((t, r, b));
        }
    }
    Ok(OscillatorRun {
        coupling,
        repetition: rep,
        natural_rates,
        switch_counts,
        history,
        order,
        final_r: r_sum / tail as f64,
        final_blue_fraction: b_sum / tail as f64,
    })
}

pub fn oscillate(ctx: &Context) -> Result<()> {
    let cfg = &ctx.config;
    let o = &cfg.oscillators;
    let jobs: Vec<(usize, usize)> = (0..o.couplings.len())
        .flat_map(|c| (0..o.repetitions).map(move |r| (c, r)))
        .collect();
    ctx.write_manifest("oscillate")?;
    let runs = map_indexed(ctx.workers, jobs.len(), |i| {
        let (c, r) = jobs[i];
        run_oscillators(cfg, o.couplings[c], r)
    })?
    .into_iter()
    .collect::<Result<Vec<_>>>()?;

    let mut summary = csv_writer(
        &ctx.out_dir.join("order_summary.csv"),
        &["coupling", "repetition", "mean_r_final_quarter", "mean_blue_fraction_final_quarter"],
    )?;
    for (&(c, _), run) in jobs.iter().zip(&runs) {
        let stem = format!("k{c}_rep{}", run.repetition);
        let mut h = csv_writer(
            &ctx.out_dir.join(format!("history_{stem}.csv")),
            &["t", "osc_id", "phase", "color"],
        )?;
        for (t, phases) in &run.history {
            for (i, &p) in phases.iter().enumerate() {
                h.write_record([fmt_f64(*t), i.to_string(), fmt_f64(p), Color::of_phase(p).as_str().into()])?;
            }
        }
        io::finish(h)?;
        let mut s = csv_writer(
            &ctx.out_dir.join(format!("summary_{stem}.csv")),
            &["osc_id", "natural_rate", "switch_count"],
        )?;
        for (i, (f, n)) in run.natural_rates.iter().zip(&run.switch_counts).enumerate() {
            s.write_record([i.to_string(), fmt_f64(*f), n.to_string()])?;
        }
        io::finish(s)?;
        let mut w = csv_writer(
            &ctx.out_dir.join(format!("order_{stem}.csv")),
            &["t", "r", "blue_fraction"],
        )?;
        for (t, r, b) in &run.order {
            w.write_record([fmt_f64(*t), fmt_f64(*r), fmt_f64(*b)])?;
        }
        io::finish(w)?;
        summary.write_record([
            fmt_f64(run.coupling),
            run.repetition.to_string(),
            fmt_f64(run.final_r),
            fmt_f64(run.final_blue_fraction),
        ])?;
    }
    io::finish(summary)
}

pub fn sensors(cfg: &Config) -> Vec<SensorModel> {
    let s = &cfg.sensing;
    if s.homogeneous {
        (0..s.n_sensors).map(|i| SensorModel::ideal(i as u32)).collect()
    } else {
        let mut rng = TrialRng::for_trial(cfg.seed(), SENSING_STREAM, 0);
        sensing::heterogeneous_sensors(s.n_sensors, s.gain_sd, s.offset_sd, &mut rng)
    }
}

/// Every threshold `0, step, 2 step, ...` up to the sensor range.
pub fn threshold_grid(step: u16) -> Vec<u16> {
    (0..=SENSOR_MAX).step_by(step.max(1) as usize).collect()
}

pub fn sense(ctx: &Context) -> Result<()> {
    let cfg = &ctx.config;
    let s = &cfg.sensing;
    let sensors = sensors(cfg);
    let profile = cfg.stimulus_profile();
    let table = sensing::run_sweep(&sensors, &profile, s.stimulus_scale).map_err(plan_error)?;
    ctx.write_manifest("sense")?;

    let mut w = csv_writer(&ctx.out_dir.join("sensors.csv"), &["robot_id", "gain", "offset"])?;
    for m in &sensors {
        w.write_record([m.id.to_string(), fmt_f64(m.gain), fmt_f64(m.offset)])?;
    }
    io::finish(w)?;

    let mut w = csv_writer(
        &ctx.out_dir.join("response.csv"),
        &["robot_id", "sample_index", "v_value", "reading"],
    )?;
    for (id, row) in table.sensor_ids.iter().zip(&table.readings) {
        for (k, (v, r)) in table.v_values.iter().zip(row).enumerate() {
            w.write_record([id.to_string(), k.to_string(), fmt_f64(*v), r.to_string()])?;
        }
    }
    io::finish(w)?;

    let mut w = csv_writer(&ctx.out_dir.join("median.csv"), &["sample_index", "v_value", "median"])?;
    for (k, (v, m)) in table.v_values.iter().zip(table.median()).enumerate() {
        w.write_record([k.to_string(), fmt_f64(*v), fmt_f64(m)])?;
    }
    io::finish(w)?;

    let thresholds = threshold_grid(s.threshold_step);
    let n = profile.samples_per_rep;
    let period: Vec<usize> = (0..profile.len()).collect();
    let period = sensing::trim_period(&period, n, s.period_index).map_err(plan_error)?;
    let mut w = csv_writer(
        &ctx.out_dir.join("agreement.csv"),
        &["sample_index", "v_value", "threshold", "count"],
    )?;
    for &k in period {
        let counts = sensing::agreement_curve(&table.column(k), &thresholds);
        for (th, c) in thresholds.iter().zip(counts) {
            w.write_record([k.to_string(), fmt_f64(table.v_values[k]), th.to_string(), c.to_string()])?;
        }
    }
    io::finish(w)
}

/// Per-trial turning rates of every trajectory listed in an index CSV.
pub fn index_rates(index: &Path) -> Result<Vec<TrialRate>> {
    io::read_index(index)?
        .into_iter()
        .map(|(robot_id, trial_id, path)| {
            let traj: Trajectory = io::read_trajectory(&path)?;
            let rate = trial_turning_rate(&traj)
                .with_context(|| format!("{}: cannot estimate turning rate", path.display()))?;
            Ok(TrialRate {
                robot_id,
                trial_id,
                rate,
            })
        })
        .collect()
}

pub fn estimate(ctx: &Context, index: &Path) -> Result<String> {
    let rates = index_rates(index)?;
    let individual = fit_individual(&rates)?;
    let ensemble = fit_ensemble(&rates);
    ctx.write_manifest("estimate")?;
    io::write_estimates(&ctx.out_dir.join("estimates.csv"), &individual)?;
    let ensemble = match ensemble {
        Ok(e) => e,
        Err(e) => return Ok(format!("ensemble unavailable: {e} ({} robots)", individual.len())),
    };
    let cmp = compare_models(&individual, &ensemble);
    io::write_comparison(&ctx.out_dir.join("comparison.csv"), &ensemble, &cmp)?;
    Ok(format!(
        "ensemble mu={} sigma={} n_trials={}; mean individual sigma={} ({} robots)",
        fmt_f64(ensemble.mu),
        fmt_f64(ensemble.sigma),
        ensemble.n_trials_total,
        fmt_f64(cmp.mean_sigma_individual),
        individual.len()
    ))
}
