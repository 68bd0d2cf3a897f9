//! Acceptance criteria 1-15. Each test prints one PASS/FAIL line to the real
//! stdout (bypassing capture) and then asserts the same verdict.

use std::collections::BTreeMap;
use std::f64::consts::{FRAC_PI_6, PI, TAU};
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::sync::OnceLock;
use std::time::{Duration, Instant};

use kiloswarm::commands::{run_oscillators, run_plan};
use kiloswarm::config::{Config, Overrides};
use kiloswarm::io::Table;
use kiloswarm_core::controllers::PhototaxisParams;
use kiloswarm_core::environment::{CoverageGrid, KILOBOT_RADIUS};
use kiloswarm_core::estimation::circle_fit;
use kiloswarm_core::harness::{
    acceptability, acceptability_curves, mean_cost_curve, metric_values, BiasSpec, ControllerSpec,
    EnvironmentSpec, ExperimentConfig, Metric, SweepPlan, TrialResult,
};
use kiloswarm_core::environment::Arena;
use kiloswarm_core::kinematics::{wrap_angle, Pose, RobotParams};
use kiloswarm_core::oscillators::{Oscillator, OscillatorPopulation, Topology, PULSES_PER_CYCLE};
use kiloswarm_core::rng::TrialRng;
use kiloswarm_core::stats::{bootstrap_mean_ci, bootstrap_mean_diff_ci, mean};

const BOOTSTRAP_RESAMPLES: usize = 2000;
const CI_LEVEL: f64 = 0.95;

fn report(n: u32, name: &str, pass: bool, detail: String) {
    let verdict = if pass { "PASS" } else { "FAIL" };
    let line = format!("criterion {n:>2} [{verdict}] {name}: {detail}");
    let mut out = std::io::stdout().lock();
    let _ = writeln!(out, "{line}");
    let _ = out.flush();
    assert!(pass, "{line}");
}

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("configs")
}

fn shipped(name: &str, seed: u64) -> Config {
    let (c, _) = Config::load(&configs().join(name)).unwrap();
    let c = c
        .resolve(&Overrides {
            seed: Some(seed),
            ..Overrides::default()
        })
        .unwrap();
    c.validate(None).unwrap();
    c
}

fn cli(args: &[&str]) {
    let out = Command::new(env!("CARGO_BIN_EXE_kiloswarm"))
        .args(args)
        .output()
        .unwrap();
    assert!(
        out.status.success(),
        "{args:?}: {}",
        String::from_utf8_lossy(&out.stderr)
    );
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

/// Uniform draw in `[lo, hi)` from a test-local stream.
fn uniform(rng: &mut TrialRng, lo: f64, hi: f64) -> f64 {
    lo + (hi - lo) * rng.unit()
}

fn straight_experiment(delta: f64, duration: f64, dt: f64, arena: Arena) -> SweepPlan {
    SweepPlan::new(ExperimentConfig {
        robot: RobotParams::default().with_sigma(0.0),
        biases: BiasSpec::Explicit(vec![delta]),
        n_mc: 1,
        duration,
        dt,
        controller: ControllerSpec::Straight { nominal: 0.5 },
        environment: EnvironmentSpec {
            arena,
            ..EnvironmentSpec::default()
        },
        master_seed: 1,
        ..ExperimentConfig::default()
    })
    .unwrap()
}

#[test]
fn criterion_01_straight_line_ideal_robot() {
    let start = Instant::now();
    let plan = straight_experiment(0.0, 200.0, 0.1, Arena::centered((0.0, 0.0), 6.0, 6.0));
    let mut worst = 0.0f64;
    for k in 0..100 {
        let theta0 = wrap_angle(TAU * k as f64 / 100.0);
        let p0 = Pose::new(0.0, 0.0, theta0);
        let run = plan.simulate_from(0, 0, p0);
        assert_eq!(run.trajectory.len(), 2001);
        let (s, c) = theta0.sin_cos();
        for p in run.trajectory.poses() {
            worst = worst.max((-(p.x - p0.x) * s + (p.y - p0.y) * c).abs());
        }
    }
    let t = start.elapsed();
    report(
        1,
        "straight-line ideal robot",
        worst < 1e-9 && t < Duration::from_secs(1),
        format!("max lateral deviation {worst:e} m over 100 headings (< 1e-9), {t:.2?} (< 1 s)"),
    );
}

#[test]
fn criterion_02_circle_law() {
    let start = Instant::now();
    let delta = 0.02;
    let plan = straight_experiment(delta, 200.0, 0.01, Arena::centered((0.0, 0.0), 2.0, 2.0));
    let run = plan.simulate_from(0, 0, Pose::new(0.0, 0.0, 0.0));
    let pts: Vec<(f64, f64)> = run.trajectory.poses().map(|p| (p.x, p.y)).collect();
    let fit = circle_fit(&pts).unwrap();
    let p = RobotParams::default();
    let v = p.c_v * 2.0 * 0.5;
    let expected = v / (2.0 * p.c_omega * delta);
    let rel = (fit.radius - expected).abs() / expected;
    let t = start.elapsed();
    report(
        2,
        "circle law",
        rel < 0.01 && t < Duration::from_secs(5),
        format!(
            "fitted radius {:.6} m vs {expected:.6} m, relative error {rel:.2e} (< 1e-2), {t:.2?} (< 5 s)",
            fit.radius
        ),
    );
}

#[test]
fn criterion_03_mirror_symmetry() {
    let start = Instant::now();
    let mut rng = TrialRng::from_seed(0x3141);
    let mut worst_step = 0.0f64;
    let mut worst_cost = 0.0f64;
    let mut multisets_equal = true;
    for _ in 0..5 {
        let biases: Vec<f64> = (0..4).map(|_| uniform(&mut rng, -0.04, 0.04)).collect();
        // Multiples of 1/16 keep `1 - p` exact, so the reflected coin is
        // the exact complement.
        let p_right = (rng.unit() * 17.0).floor().min(16.0) / 16.0;
        let cfg = ExperimentConfig {
            robot: RobotParams::default().with_sigma(uniform(&mut rng, 0.0, 0.02)),
            biases: BiasSpec::Explicit(biases),
            n_mc: 3,
            duration: 60.0,
            controller: ControllerSpec::Phototaxis(PhototaxisParams {
                p_right,
                forward_duration: uniform(&mut rng, 0.5, 2.0),
                turn_duration: uniform(&mut rng, 0.2, 1.0),
                ..PhototaxisParams::default()
            }),
            master_seed: (rng.unit() * 9.0e15) as u64,
            ..ExperimentConfig::default()
        };
        let axis = cfg.environment.field.center.1;
        let plain = SweepPlan::new(cfg.clone()).unwrap();
        let mirror = SweepPlan::new(cfg.mirrored()).unwrap();
        for r in 0..plain.n_robots() {
            for k in 0..3 {
                let a = plain.simulate(r, k).trajectory;
                let b = mirror.simulate(r, k).trajectory;
                assert_eq!(a.len(), b.len());
                for (p, q) in a.poses().zip(b.poses()) {
                    let m = q.mirrored(axis);
                    let e = (p.x - m.x)
                        .abs()
                        .max((p.y - m.y).abs())
                        .max(wrap_angle(p.theta - m.theta).abs());
                    worst_step = worst_step.max(e);
                }
            }
        }
        let costs = |plan: &SweepPlan| -> Vec<f64> {
            let mut c: Vec<f64> = (0..plan.n_trials())
                .map(|i| plan.run_index(i).cost.unwrap())
                .collect();
            c.sort_by(f64::total_cmp);
            c
        };
        let (ca, cb) = (costs(&plain), costs(&mirror));
        multisets_equal &= ca.len() == cb.len();
        for (x, y) in ca.iter().zip(&cb) {
            worst_cost = worst_cost.max((x - y).abs());
        }
    }
    let t = start.elapsed();
    report(
        3,
        "mirror symmetry",
        worst_step < 1e-9 && worst_cost < 1e-9 && multisets_equal && t < Duration::from_secs(60),
        format!(
            "5 configs: max per-step error {worst_step:e} (< 1e-9), max sorted-cost difference {worst_cost:e}, {t:.2?} (< 1 min)"
        ),
    );
}

struct ProtocolRun {
    p_right: f64,
    results: Vec<TrialResult>,
    elapsed: Duration,
}

/// The 100-robot phototaxis sweeps, shared by criteria 4, 5, 7 and 15.
fn protocol() -> &'static [ProtocolRun] {
    static RUNS: OnceLock<Vec<ProtocolRun>> = OnceLock::new();
    RUNS.get_or_init(|| {
        let cfg = shipped("phototaxis_protocol.toml", 0);
        cfg.sweep_p_rights()
            .into_iter()
            .map(|p| {
                let start = Instant::now();
                let plan = SweepPlan::new(cfg.experiment(p)).unwrap();
                let results = run_plan(&plan, 0).unwrap();
                ProtocolRun {
                    p_right: p.unwrap(),
                    results,
                    elapsed: start.elapsed(),
                }
            })
            .collect()
    })
}

#[test]
fn criterion_04_protocol_scale() {
    let runs = protocol();
    let mut pass = runs.len() == 3;
    let mut parts = Vec::new();
    for run in runs {
        let max_cost = run
            .results
            .iter()
            .filter_map(|r| r.cost)
            .fold(0.0f64, f64::max);
        let at_max = acceptability(&run.results, max_cost);
        pass &= run.results.len() == 10_000
            && at_max.n_acc == 10_000
            && run.elapsed < Duration::from_secs(600);
        parts.push(format!(
            "P_R={}: {} trials, N_acc(max cost {max_cost:.3} m)={}, {:.2?}",
            run.p_right,
            run.results.len(),
            at_max.n_acc,
            run.elapsed
        ));
    }
    report(4, "protocol scale", pass, parts.join("; "));
}

/// Bootstrap CI of `mean(positive half) - mean(negative half)`.
fn half_difference(results: &[TrialResult], seed: u64) -> (f64, f64, (f64, f64)) {
    let pos = metric_values(results, Metric::Cost, |b| b > 0.0);
    let neg = metric_values(results, Metric::Cost, |b| b < 0.0);
    let ci = bootstrap_mean_diff_ci(&pos, &neg, BOOTSTRAP_RESAMPLES, CI_LEVEL, seed);
    (mean(&pos), mean(&neg), (ci.lo, ci.hi))
}

#[test]
fn criterion_05_directional_favoritism() {
    let runs = protocol();
    let by_p = |p: f64| runs.iter().find(|r| r.p_right == p).unwrap();
    let (pos1, neg1, ci1) = half_difference(&by_p(1.0).results, 51);
    let (pos025, neg025, ci025) = half_difference(&by_p(0.25).results, 52);
    // As worded: positive-bias half lower at P_R = 1, the opposite at 0.25.
    let pass = ci1.1 < 0.0 && ci025.0 > 0.0;
    report(
        5,
        "directional favoritism",
        pass,
        format!(
            "P_R=1: positive half {pos1:.4} m vs negative half {neg1:.4} m, diff CI [{:.4}, {:.4}]; \
             P_R=0.25: positive {pos025:.4} m vs negative {neg025:.4} m, diff CI [{:.4}, {:.4}] \
             (expected pos<neg at P_R=1 and pos>neg at P_R=0.25)",
            ci1.0, ci1.1, ci025.0, ci025.1
        ),
    );
}

#[test]
fn criterion_06_nonzero_optimum() {
    let cfg = shipped("nonzero_optimum.toml", 0);
    let plan = SweepPlan::new(cfg.experiment(None)).unwrap();
    let results = run_plan(&plan, 0).unwrap();
    let curve = mean_cost_curve(&results);
    let (b_min, c_min) = curve
        .iter()
        .copied()
        .fold((0.0, f64::INFINITY), |a, c| if c.1 < a.1 { c } else { a });
    let has_zero = curve.iter().any(|c| c.0 == 0.0);
    let at_min = metric_values(&results, Metric::Cost, |b| b == b_min);
    let at_zero = metric_values(&results, Metric::Cost, |b| b == 0.0);
    let ci_min = bootstrap_mean_ci(&at_min, BOOTSTRAP_RESAMPLES, CI_LEVEL, 61);
    let ci_zero = bootstrap_mean_ci(&at_zero, BOOTSTRAP_RESAMPLES, CI_LEVEL, 62);
    let pass = has_zero && b_min != 0.0 && c_min < mean(&at_zero) && !ci_min.overlaps(&ci_zero);
    report(
        6,
        "non-zero optimum",
        pass,
        format!(
            "optimum at bias {b_min:.4} with mean cost {c_min:.4} m CI [{:.4}, {:.4}]; \
             zero bias {:.4} m CI [{:.4}, {:.4}]",
            ci_min.lo,
            ci_min.hi,
            mean(&at_zero),
            ci_zero.lo,
            ci_zero.hi
        ),
    );
}

#[test]
fn criterion_07_acceptability_monotonicity() {
    let thresholds = shipped("phototaxis_protocol.toml", 0).thresholds();
    let includes = thresholds.contains(&0.75);
    let mut pass = includes && thresholds.len() >= 100;
    let mut parts = Vec::new();
    let runs = protocol();
    let check = Instant::now();
    for run in runs {
        let pts = acceptability_curves(&run.results, &thresholds).unwrap();
        let mono = pts
            .windows(2)
            .all(|w| w[0].r_acc <= w[1].r_acc && w[0].n_acc <= w[1].n_acc);
        let at = pts.iter().find(|p| p.delta_acc == 0.75).unwrap();
        pass &= mono;
        parts.push(format!(
            "P_R={}: monotone={mono}, R_acc(0.75)={:.4}, N_acc(0.75)={}",
            run.p_right, at.r_acc, at.n_acc
        ));
    }
    let t = check.elapsed();
    pass &= t < Duration::from_secs(1);
    report(
        7,
        "acceptability monotonicity",
        pass,
        format!("{} thresholds incl. 0.75 m; {}; {t:.2?} (< 1 s)", thresholds.len(), parts.join("; ")),
    );
}

#[test]
fn criterion_08_random_walk_coverage() {
    let start = Instant::now();
    let cfg = shipped("random_walk.toml", 0);
    let plan = SweepPlan::new(cfg.experiment(None)).unwrap();
    let results = run_plan(&plan, 0).unwrap();
    let biases = plan.biases();
    let min_abs = biases.iter().fold(f64::INFINITY, |a, b| a.min(b.abs()));
    let max_abs = biases.iter().fold(0.0f64, |a, b| a.max(b.abs()));
    let ideal = metric_values(&results, Metric::Coverage, |b| b.abs() == min_abs);
    let extreme = metric_values(&results, Metric::Coverage, |b| b.abs() == max_abs);
    let ci = bootstrap_mean_diff_ci(&ideal, &extreme, BOOTSTRAP_RESAMPLES, CI_LEVEL, 81);
    let t = start.elapsed();
    report(
        8,
        "random-walk coverage",
        results.len() == 200 * 100 && ci.lo > 0.0 && t < Duration::from_secs(600),
        format!(
            "|bias|={min_abs:.5} coverage {:.5} vs |bias|={max_abs} coverage {:.5}, diff CI [{:.5}, {:.5}], {t:.2?}",
            mean(&ideal),
            mean(&extreme),
            ci.lo,
            ci.hi
        ),
    );
}

/// Distance from `(px, py)` to the segment `a`-`b`.
fn segment_distance(px: f64, py: f64, a: (f64, f64), b: (f64, f64)) -> f64 {
    let (dx, dy) = (b.0 - a.0, b.1 - a.1);
    let len2 = dx * dx + dy * dy;
    let u = if len2 == 0.0 {
        0.0
    } else {
        (((px - a.0) * dx + (py - a.1) * dy) / len2).clamp(0.0, 1.0)
    };
    (px - a.0 - u * dx).hypot(py - a.1 - u * dy)
}

#[test]
fn criterion_09_coverage_oracle() {
    let start = Instant::now();
    let arena = Arena::centered((0.0, 0.0), 2.0, 2.0);
    let cell = 0.01;
    let mut rng = TrialRng::from_seed(0x909);
    let mut worst = 0.0f64;
    for _ in 0..20 {
        let p0 = Pose::new(
            uniform(&mut rng, -0.4, 0.4),
            uniform(&mut rng, -0.4, 0.4),
            uniform(&mut rng, -PI, PI),
        );
        let duration = uniform(&mut rng, 10.0, 50.0);
        let plan = straight_experiment(0.0, duration, 0.1, arena);
        let traj = plan.simulate_from(0, 0, p0).trajectory;
        let mut grid = CoverageGrid::new(arena, cell).unwrap();
        for p in traj.poses() {
            grid.mark_pose(p, KILOBOT_RADIUS);
        }
        let end = traj.last_pose().unwrap();
        let (a, b) = ((p0.x, p0.y), (end.x, end.y));
        let (mut capsule, mut mismatched) = (0usize, 0usize);
        for j in 0..200 {
            for i in 0..200 {
                let cx = -1.0 + (i as f64 + 0.5) * cell;
                let cy = -1.0 + (j as f64 + 0.5) * cell;
                let inside = segment_distance(cx, cy, a, b) <= KILOBOT_RADIUS;
                capsule += inside as usize;
                mismatched += (inside != grid.is_visited(i, j)) as usize;
            }
        }
        worst = worst.max(mismatched as f64 / capsule as f64);
    }
    let t = start.elapsed();
    report(
        9,
        "coverage oracle",
        worst <= 0.01 && t < Duration::from_secs(10),
        format!("worst mismatched cells / capsule cells {worst:.4} over 20 paths (<= 0.01), {t:.2?}"),
    );
}

#[test]
fn criterion_10_oscillator_drift() {
    let start = Instant::now();
    let mut within = 0;
    let mut fractions = Vec::new();
    for seed in 0..10 {
        let cfg = shipped("oscillator_drift.toml", seed);
        let run = run_oscillators(&cfg, 0.0, 0).unwrap();
        fractions.push(format!("{:.3}", run.final_blue_fraction));
        within += (0.4..=0.6).contains(&run.final_blue_fraction) as usize;
    }
    let mut control = shipped("oscillator_drift.toml", 0);
    control.oscillators.rate_sd = 0.0;
    control.oscillators.record_every = 1;
    let run = run_oscillators(&control, 0.0, 0).unwrap();
    let binary = run.order.iter().all(|o| o.2 == 0.0 || o.2 == 1.0);
    let t = start.elapsed();
    report(
        10,
        "oscillator drift",
        within >= 9 && binary && t < Duration::from_secs(30),
        format!(
            "final-quarter blue fraction in [0.4, 0.6] for {within}/10 seeds ({}); identical-rate control binary at all {} steps: {binary}; {t:.2?}",
            fractions.join(", "),
            run.order.len()
        ),
    );
}

/// Unwrapped angular lag of oscillator 1 behind 0 after each step.
fn two_oscillator_lag(dw: f64, k: f64, steps: usize, dt: f64) -> Vec<f64> {
    let df = dw * PULSES_PER_CYCLE / TAU;
    let oscs = vec![
        Oscillator { phase: 0.0, natural_rate: 30.0 },
        Oscillator { phase: 0.0, natural_rate: 30.0 + df },
    ];
    let mut pop = OscillatorPopulation::new(oscs, k, Topology::AllToAll).unwrap();
    let mut unwrapped = 0.0;
    let mut prev = 0.0;
    let mut out = Vec::with_capacity(steps);
    for _ in 0..steps {
        pop.advance(dt);
        let ph = pop.phases();
        let lag = wrap_angle((ph[1] - ph[0]) * TAU / PULSES_PER_CYCLE);
        unwrapped += wrap_angle(lag - prev);
        prev = lag;
        out.push(unwrapped);
    }
    out
}

#[test]
fn criterion_11_two_oscillator_lock() {
    let start = Instant::now();
    let dw = 0.1;
    let lock = two_oscillator_lag(dw, 0.2, 40_000, 0.01);
    let steady = *lock.last().unwrap();
    let tail_spread = lock[30_000..]
        .iter()
        .fold(0.0f64, |a, &x| a.max((x - steady).abs()));
    let rel = (steady - FRAC_PI_6).abs() / FRAC_PI_6;
    let drift = two_oscillator_lag(dw, 0.05, 60_000, 0.01);
    let turns = drift.last().unwrap() / TAU;
    let t = start.elapsed();
    report(
        11,
        "two-oscillator lock",
        rel < 0.01 && tail_spread < 1e-3 && turns > 5.0 && t < Duration::from_secs(5),
        format!(
            "K=0.2: steady lag {steady:.6} rad vs pi/6, relative error {rel:.2e} (< 1e-2); \
             K=0.05: lag grew by {turns:.2} cycles in 600 s; {t:.2?}"
        ),
    );
}

#[test]
fn criterion_12_three_coupling_regimes() {
    let start = Instant::now();
    let cfg = shipped("oscillator_coupling.toml", 0);
    let rs: Vec<(f64, f64)> = cfg
        .oscillators
        .couplings
        .iter()
        .map(|&k| (k, run_oscillators(&cfg, k, 0).unwrap().final_r))
        .collect();
    let low = rs.first().unwrap().1;
    let high = rs.last().unwrap().1;
    let t = start.elapsed();
    report(
        12,
        "three coupling regimes",
        rs.len() == 3 && low < 0.3 && high > 0.9 && t < Duration::from_secs(120),
        format!(
            "final-quarter r: {} (low < 0.3, high > 0.9); {t:.2?}",
            rs.iter()
                .map(|(k, r)| format!("K={k} r={r:.3}"))
                .collect::<Vec<_>>()
                .join(", ")
        ),
    );
}

#[test]
fn criterion_13_estimator_recovery() {
    let start = Instant::now();
    let tmp = tempfile::tempdir().unwrap();
    let mut rng = TrialRng::from_seed(0x1313);
    let biases: Vec<f64> = (0..50).map(|_| uniform(&mut rng, -0.04, 0.04)).collect();
    let list = |v: Vec<String>| v.join(", ");
    let cfg = format!(
        "[run]\nseed = 13\n\n[robot]\nsigma_motor = 0.005\n\n[controller]\nkind = \"straight\"\n\n\
         [sweep]\nbiases = [{}]\nn_mc = 10\n\n[simulate]\nrobots = [{}]\ntrials = [{}]\n",
        list(biases.iter().map(|b| format!("{b:?}")).collect()),
        list((0..50).map(|r: usize| r.to_string()).collect()),
        list((0..10).map(|k: usize| k.to_string()).collect()),
    );
    let cfg_path = tmp.path().join("fleet.toml");
    fs::write(&cfg_path, cfg).unwrap();
    let logs = tmp.path().join("logs");
    let est = tmp.path().join("est");
    cli(&["--config", s(&cfg_path), "--out-dir", s(&logs), "simulate"]);
    cli(&["--out-dir", s(&est), "estimate", s(&logs.join("index.csv"))]);

    let t = Table::read(&est.join("estimates.csv")).unwrap();
    let ids = t.column("robot_id").unwrap();
    let mu = t.column("mu_i").unwrap();
    let n = t.column("n_trials").unwrap();
    let c_omega = RobotParams::default().c_omega;
    let truth: BTreeMap<usize, f64> = biases
        .iter()
        .enumerate()
        .map(|(i, b)| (i, 2.0 * c_omega * b))
        .collect();
    let sq: f64 = ids
        .iter()
        .zip(&mu)
        .map(|(&id, &m)| (m - truth[&(id as usize)]).powi(2))
        .sum();
    let rmse = (sq / mu.len() as f64).sqrt();
    let full_range = 2.0 * c_omega * 0.08;
    let cmp = Table::read(&est.join("comparison.csv")).unwrap();
    let mean_ind = cmp.column("mean_sigma_individual").unwrap()[0];
    let ens = cmp.column("sigma_ensemble").unwrap()[0];
    let elapsed = start.elapsed();
    report(
        13,
        "estimator recovery",
        mu.len() == 50
            && n.iter().all(|&k| k == 10.0)
            && rmse < 0.05 * full_range
            && mean_ind < ens
            && elapsed < Duration::from_secs(120),
        format!(
            "RMSE {rmse:.2e} rad/s vs 5% of range {:.2e}; mean individual sigma {mean_ind:.3e} < ensemble sigma {ens:.3e}; {elapsed:.2?}",
            0.05 * full_range
        ),
    );
}

/// Checks `agreement.csv` against counts recomputed from `response.csv`.
fn agreement_matches_brute_force(dir: &Path) -> (bool, Vec<f64>, usize) {
    let resp = Table::read(&dir.join("response.csv")).unwrap();
    let k = resp.column("sample_index").unwrap();
    let reading = resp.column("reading").unwrap();
    let mut by_sample: BTreeMap<u64, Vec<f64>> = BTreeMap::new();
    for (k, r) in k.iter().zip(&reading) {
        by_sample.entry(*k as u64).or_default().push(*r);
    }
    let agree = Table::read(&dir.join("agreement.csv")).unwrap();
    let ks = agree.column("sample_index").unwrap();
    let th = agree.column("threshold").unwrap();
    let count = agree.column("count").unwrap();
    let mut ok = agree.rows.len() == 100 * 1024;
    for i in 0..agree.rows.len() {
        let brute = by_sample[&(ks[i] as u64)].iter().filter(|&&r| r >= th[i]).count();
        ok &= brute as f64 == count[i];
    }
    (ok, count, agree.rows.len())
}

#[test]
fn criterion_14_sensing_agreement() {
    let start = Instant::now();
    let tmp = tempfile::tempdir().unwrap();
    let het = tmp.path().join("het");
    cli(&["--seed", "14", "--config", s(&configs().join("sensing.toml")), "--out-dir", s(&het), "sense"]);
    let (exact, _, rows) = agreement_matches_brute_force(&het);
    let homo_cfg = tmp.path().join("homo.toml");
    fs::write(&homo_cfg, "[sensing]\nn_sensors = 12\nhomogeneous = true\n").unwrap();
    let homo = tmp.path().join("homo");
    cli(&["--seed", "14", "--config", s(&homo_cfg), "--out-dir", s(&homo), "sense"]);
    let (homo_exact, counts, _) = agreement_matches_brute_force(&homo);
    let all_or_none = counts.iter().all(|&c| c == 0.0 || c == 12.0);
    let t = start.elapsed();
    report(
        14,
        "sensing agreement",
        exact && homo_exact && all_or_none && t < Duration::from_secs(1),
        format!(
            "{rows} (sample, threshold) counts equal brute force: {exact}; homogeneous counts only 0 or 12: {all_or_none}; {t:.2?} (< 1 s)"
        ),
    );
}

fn csv_files(dir: &Path) -> BTreeMap<PathBuf, Vec<u8>> {
    let mut out = BTreeMap::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for e in fs::read_dir(&d).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else if p.extension().is_some_and(|x| x == "csv") {
                out.insert(p.strip_prefix(dir).unwrap().to_path_buf(), fs::read(&p).unwrap());
            }
        }
    }
    out
}

#[test]
fn criterion_15_determinism_across_workers() {
    let reference: Duration = protocol().iter().map(|r| r.elapsed).sum();
    let start = Instant::now();
    let tmp = tempfile::tempdir().unwrap();
    let a = tmp.path().join("w1");
    let b = tmp.path().join("w4");
    let cfg = configs().join("nonzero_optimum.toml");
    cli(&["--seed", "15", "--workers", "1", "--config", s(&cfg), "--out-dir", s(&a), "sweep"]);
    cli(&["--workers", "4", "--config", s(&a.join("manifest.toml")), "--out-dir", s(&b), "sweep"]);
    let (fa, fb) = (csv_files(&a), csv_files(&b));
    let identical = !fa.is_empty() && fa == fb;
    let t = start.elapsed();
    report(
        15,
        "determinism across workers",
        identical && t < 2 * reference,
        format!(
            "{} CSVs byte-identical between --workers 1 and --workers 4 (rerun from manifest): {identical}; {t:.2?} (< 2 x {reference:.2?})",
            fa.len()
        ),
    );
}
