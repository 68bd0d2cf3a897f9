//! Monte Carlo sweeps over heading bias.
//!
//! Every robot in a sweep runs the same `n_mc` trials: trial `k` of every
//! robot starts from the same shared initial pose, and uses a private noise
//! stream derived from `(master_seed, robot_id, trial_id)`. Results are
//! therefore independent of execution order.

use alloc::vec::Vec;

use crate::controllers::{Phototaxis, PhototaxisParams, RandomWalk, RandomWalkParams, Straight};
use crate::environment::{Arena, CoverageGrid, LightField, KILOBOT_RADIUS};
use crate::error::{ensure, Error, Result};
use crate::kinematics::{
    simulate_trajectory, Clock, Controller, Pose, RobotParams, Trajectory, DEFAULT_DELTA_MAX,
};
use crate::rng::{derive_seed, TrialRng, INITIALS_STREAM};
use crate::stats::{self, Summary};

/// Number of final samples averaged by the phototaxis cost.
pub const COST_WINDOW: usize = 100;

#[derive(Debug, Clone, PartialEq)]
pub enum BiasSpec {
    /// `n` evenly spaced values from `lo` to `hi` inclusive (the midpoint when
    /// `n == 1`).
    Grid { lo: f64, hi: f64, n: usize },
    Explicit(Vec<f64>),
}

impl BiasSpec {
    pub fn values(&self) -> Vec<f64> {
        match self {
            BiasSpec::Grid { lo, hi, n } => match *n {
                0 => Vec::new(),
                1 => alloc::vec![(lo + hi) / 2.0],
                n => (0..n)
                    .map(|i| {
                        if i == n - 1 {
                            *hi
                        } else {
                            lo + (hi - lo) * i as f64 / (n - 1) as f64
                        }
                    })
                    .collect(),
            },
            BiasSpec::Explicit(v) => v.clone(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ControllerSpec {
    Straight { nominal: f64 },
    Phototaxis(PhototaxisParams),
    RandomWalk(RandomWalkParams),
}

impl ControllerSpec {
    pub fn validate(&self) -> Result<()> {
        match self {
            ControllerSpec::Straight { nominal } => {
                ensure(*nominal >= 0.0 && nominal.is_finite(), "nominal", "must be >= 0")
            }
            ControllerSpec::Phototaxis(p) => p.validate(),
            ControllerSpec::RandomWalk(p) => p.validate(),
        }
    }

    /// Which per-trial score a sweep with this controller records.
    pub fn metric(&self) -> Metric {
        match self {
            ControllerSpec::RandomWalk(_) => Metric::Coverage,
            _ => Metric::Cost,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            ControllerSpec::Straight { .. } => "straight",
            ControllerSpec::Phototaxis(_) => "phototaxis",
            ControllerSpec::RandomWalk(_) => "random_walk",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Metric {
    /// Mean distance to the light source over the final samples.
    Cost,
    /// Fraction of arena cells touched by the robot footprint.
    Coverage,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnvironmentSpec {
    pub field: LightField,
    pub arena: Arena,
    pub cell_size: f64,
    pub footprint_radius: f64,
}

impl Default for EnvironmentSpec {
    fn default() -> Self {
        let field = LightField::default();
        EnvironmentSpec {
            field,
            arena: Arena::centered(field.center, 2.0, 2.0),
            cell_size: 0.01,
            footprint_radius: KILOBOT_RADIUS,
        }
    }
}

impl EnvironmentSpec {
    pub fn validate(&self) -> Result<()> {
        self.field.validate()?;
        self.arena.validate()?;
        ensure(
            self.cell_size > 0.0 && self.cell_size.is_finite(),
            "cell_size",
            "must be > 0",
        )?;
        ensure(
            self.footprint_radius > 0.0 && self.footprint_radius.is_finite(),
            "footprint_radius",
            "must be > 0",
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    /// Template for every robot; `delta` is replaced by the robot's bias.
    pub robot: RobotParams,
    pub delta_max: f64,
    pub biases: BiasSpec,
    pub n_mc: usize,
    pub duration: f64,
    pub dt: f64,
    pub controller: ControllerSpec,
    pub environment: EnvironmentSpec,
    pub master_seed: u64,
    /// Run the mirror image of the world: initial poses reflected across the
    /// light source's horizontal axis and every noise stream reflected.
    pub mirror: bool,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            robot: RobotParams::default(),
            delta_max: DEFAULT_DELTA_MAX,
            biases: BiasSpec::Grid {
                lo: -DEFAULT_DELTA_MAX,
                hi: DEFAULT_DELTA_MAX,
                n: 100,
            },
            n_mc: 100,
            duration: 200.0,
            dt: 0.1,
            controller: ControllerSpec::Phototaxis(PhototaxisParams::default()),
            environment: EnvironmentSpec::default(),
            master_seed: 0,
            mirror: false,
        }
    }
}

impl ExperimentConfig {
    pub fn clock(&self) -> Result<Clock> {
        Clock::new(self.duration, self.dt)
    }

    pub fn validate(&self) -> Result<()> {
        let biases = self.biases.values();
        ensure(!biases.is_empty(), "n_robots", "must be >= 1")?;
        ensure(self.n_mc >= 1, "n_mc", "must be >= 1")?;
        ensure(
            self.delta_max >= 0.0 && self.delta_max.is_finite(),
            "delta_max",
            "must be >= 0",
        )?;
        for &b in &biases {
            ensure(
                b.is_finite() && libm::fabs(b) <= self.delta_max,
                "bias",
                "bias values must lie within [-delta_max, delta_max]",
            )?;
        }
        self.robot.with_delta(0.0).validate(self.delta_max)?;
        let clock = self.clock()?;
        self.controller.validate()?;
        self.environment.validate()?;
        if self.controller.metric() == Metric::Cost {
            ensure(
                clock.steps() + 1 >= COST_WINDOW,
                "duration",
                "cost needs at least 100 samples per trial",
            )?;
        }
        Ok(())
    }

    /// The mirror-image experiment: biases negated, `p_right` complemented,
    /// `mirror` toggled. Robot ids keep their positions.
    pub fn mirrored(&self) -> Self {
        let mut m = self.clone();
        m.biases = BiasSpec::Explicit(self.biases.values().into_iter().map(|b| -b).collect());
        if let ControllerSpec::Phototaxis(p) = &mut m.controller {
            p.p_right = 1.0 - p.p_right;
        }
        m.mirror = !self.mirror;
        m
    }

    fn mirror_axis(&self) -> f64 {
        self.environment.field.center.1
    }
}

/// `n_mc` initial poses drawn once from the master seed: positions uniform
/// over the arena, headings uniform over `(-pi, pi]`.
pub fn shared_initials(config: &ExperimentConfig) -> Vec<Pose> {
    let a = &config.environment.arena;
    let mut rng = TrialRng::from_seed(derive_seed(config.master_seed, INITIALS_STREAM, 0));
    (0..config.n_mc)
        .map(|_| {
            let x = a.x_min + rng.unit() * a.width();
            let y = a.y_min + rng.unit() * a.height();
            let theta = core::f64::consts::PI - core::f64::consts::TAU * rng.unit();
            Pose::new(x, y, theta)
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrialResult {
    pub robot_id: u64,
    pub bias: f64,
    pub trial_id: u64,
    pub cost: Option<f64>,
    pub coverage: Option<f64>,
    pub stopped: bool,
    pub final_pose: Pose,
}

/// A simulated trial before scoring.
#[derive(Debug, Clone)]
pub struct TrialRun {
    pub trajectory: Trajectory,
    pub stopped: bool,
}

/// A validated sweep with its bias list and shared initial poses resolved.
#[derive(Debug, Clone)]
pub struct SweepPlan {
    config: ExperimentConfig,
    biases: Vec<f64>,
    initials: Vec<Pose>,
}

fn run<C: Controller<Error = core::convert::Infallible>>(
    initial: Pose,
    controller: &mut C,
    params: &RobotParams,
    clock: Clock,
    arena: &Arena,
    rng: &mut TrialRng,
) -> Trajectory {
    match simulate_trajectory(initial, controller, params, clock, Some(arena), rng) {
        Ok(t) => t,
        Err(e) => match e {},
    }
}

impl SweepPlan {
    pub fn new(config: ExperimentConfig) -> Result<Self> {
        config.validate()?;
        let biases = config.biases.values();
        let mut initials = shared_initials(&config);
        if config.mirror {
            let axis = config.mirror_axis();
            initials.iter_mut().for_each(|p| *p = p.mirrored(axis));
        }
        Ok(SweepPlan {
            config,
            biases,
            initials,
        })
    }

    pub fn config(&self) -> &ExperimentConfig {
        &self.config
    }

    pub fn biases(&self) -> &[f64] {
        &self.biases
    }

    pub fn initials(&self) -> &[Pose] {
        &self.initials
    }

    pub fn n_robots(&self) -> usize {
        self.biases.len()
    }

    pub fn n_trials(&self) -> usize {
        self.biases.len() * self.config.n_mc
    }

    /// `(robot_id, trial_id)` of the `index`-th trial in canonical order.
    pub fn trial_at(&self, index: usize) -> (usize, usize) {
        (index / self.config.n_mc, index % self.config.n_mc)
    }

    pub fn robot_params(&self, robot_id: usize) -> RobotParams {
        self.config.robot.with_delta(self.biases[robot_id])
    }

    pub fn simulate(&self, robot_id: usize, trial_id: usize) -> TrialRun {
        self.simulate_from(robot_id, trial_id, self.initials[trial_id])
    }

    /// Same as [`Self::simulate`] but from an arbitrary initial pose.
    pub fn simulate_from(&self, robot_id: usize, trial_id: usize, initial: Pose) -> TrialRun {
        let cfg = &self.config;
        let params = self.robot_params(robot_id);
        let clock = Clock {
            duration: cfg.duration,
            dt: cfg.dt,
        };
        let arena = &cfg.environment.arena;
        let mut rng = TrialRng::for_trial(cfg.master_seed, robot_id as u64, trial_id as u64)
            .reflected(cfg.mirror);
        match cfg.controller {
            ControllerSpec::Straight { nominal } => TrialRun {
                trajectory: run(initial, &mut Straight { nominal }, &params, clock, arena, &mut rng),
                stopped: false,
            },
            ControllerSpec::Phototaxis(p) => {
                let mut c = Phototaxis::new(p, cfg.environment.field);
                let trajectory = run(initial, &mut c, &params, clock, arena, &mut rng);
                TrialRun {
                    trajectory,
                    stopped: c.stopped(),
                }
            }
            ControllerSpec::RandomWalk(p) => TrialRun {
                trajectory: run(initial, &mut RandomWalk::new(p), &params, clock, arena, &mut rng),
                stopped: false,
            },
        }
    }

    pub fn run_trial(&self, robot_id: usize, trial_id: usize) -> TrialResult {
        let run = self.simulate(robot_id, trial_id);
        let env = &self.config.environment;
        let (cost_v, coverage) = match self.config.controller.metric() {
            Metric::Cost => (
                Some(cost(&run.trajectory, env.field.center).expect("validated trial length")),
                None,
            ),
            Metric::Coverage => {
                let mut grid =
                    CoverageGrid::new(env.arena, env.cell_size).expect("validated environment");
                for p in run.trajectory.poses() {
                    grid.mark_pose(p, env.footprint_radius);
                }
                (None, Some(grid.coverage_fraction()))
            }
        };
        TrialResult {
            robot_id: robot_id as u64,
            bias: self.biases[robot_id],
            trial_id: trial_id as u64,
            cost: cost_v,
            coverage,
            stopped: run.stopped,
            final_pose: *run.trajectory.last_pose().expect("non-empty trajectory"),
        }
    }

    pub fn run_index(&self, index: usize) -> TrialResult {
        let (r, k) = self.trial_at(index);
        self.run_trial(r, k)
    }
}

/// Sequential sweep; results in `(robot_id, trial_id)` order.
pub fn run_sweep(config: &ExperimentConfig) -> Result<Vec<TrialResult>> {
    let plan = SweepPlan::new(config.clone())?;
    Ok((0..plan.n_trials()).map(|i| plan.run_index(i)).collect())
}

/// Mean distance to `source_center` over the last [`COST_WINDOW`] samples.
pub fn cost(trajectory: &Trajectory, source_center: (f64, f64)) -> Result<f64> {
    let n = trajectory.samples.len();
    if n < COST_WINDOW {
        return Err(Error::InsufficientData {
            needed: COST_WINDOW,
            got: n,
        });
    }
    let tail = &trajectory.samples[n - COST_WINDOW..];
    Ok(tail.iter().map(|s| s.pose.distance_to(source_center)).sum::<f64>() / COST_WINDOW as f64)
}

/// Per-bias mean of a metric, ordered by bias. Trials without the metric are
/// skipped.
pub fn mean_curve(results: &[TrialResult], metric: Metric) -> Vec<(f64, f64)> {
    let mut pairs: Vec<(f64, f64)> = results
        .iter()
        .filter_map(|r| {
            let v = match metric {
                Metric::Cost => r.cost,
                Metric::Coverage => r.coverage,
            };
            v.map(|v| (r.bias, v))
        })
        .collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut out: Vec<(f64, f64)> = Vec::new();
    let mut i = 0;
    while i < pairs.len() {
        let b = pairs[i].0;
        let mut j = i;
        let mut sum = 0.0;
        while j < pairs.len() && pairs[j].0 == b {
            sum += pairs[j].1;
            j += 1;
        }
        out.push((b, sum / (j - i) as f64));
        i = j;
    }
    out
}

pub fn mean_cost_curve(results: &[TrialResult]) -> Vec<(f64, f64)> {
    mean_curve(results, Metric::Cost)
}

pub fn mean_coverage_curve(results: &[TrialResult]) -> Vec<(f64, f64)> {
    mean_curve(results, Metric::Coverage)
}

/// Widths of the cells that partition `[b_0, b_last]` around each sorted bias
/// value at the midpoints between neighbours.
pub fn bias_cell_widths(sorted_biases: &[f64]) -> Vec<f64> {
    let n = sorted_biases.len();
    (0..n)
        .map(|i| {
            let lo = if i == 0 {
                sorted_biases[0]
            } else {
                (sorted_biases[i - 1] + sorted_biases[i]) / 2.0
            };
            let hi = if i + 1 == n {
                sorted_biases[n - 1]
            } else {
                (sorted_biases[i] + sorted_biases[i + 1]) / 2.0
            };
            hi - lo
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AcceptabilityPoint {
    pub delta_acc: f64,
    /// Total bias measure whose mean cost is at most `delta_acc`.
    pub r_acc: f64,
    /// Number of trials with cost at most `delta_acc`.
    pub n_acc: usize,
}

pub fn acceptability(results: &[TrialResult], delta_acc: f64) -> AcceptabilityPoint {
    let curve = mean_cost_curve(results);
    acceptability_from_curve(results, &curve, delta_acc)
}

fn acceptability_from_curve(
    results: &[TrialResult],
    curve: &[(f64, f64)],
    delta_acc: f64,
) -> AcceptabilityPoint {
    let biases: Vec<f64> = curve.iter().map(|c| c.0).collect();
    let widths = bias_cell_widths(&biases);
    let r_acc = curve
        .iter()
        .zip(&widths)
        .filter(|((_, m), _)| *m <= delta_acc)
        .fold(0.0, |acc, (_, w)| acc + w);
    let n_acc = results
        .iter()
        .filter(|r| r.cost.is_some_and(|c| c <= delta_acc))
        .count();
    AcceptabilityPoint {
        delta_acc,
        r_acc,
        n_acc,
    }
}

/// One [`AcceptabilityPoint`] per threshold; thresholds must be ascending.
pub fn acceptability_curves(
    results: &[TrialResult],
    thresholds: &[f64],
) -> Result<Vec<AcceptabilityPoint>> {
    ensure(
        thresholds.windows(2).all(|w| w[0] <= w[1]),
        "thresholds",
        "must be sorted ascending",
    )?;
    let curve = mean_cost_curve(results);
    Ok(thresholds
        .iter()
        .map(|&t| acceptability_from_curve(results, &curve, t))
        .collect())
}

/// Pooled costs of all robots, individuality removed.
#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleDistribution {
    pub summary: Summary,
    pub values: Vec<f64>,
}

/// Quantiles use linear interpolation between order statistics.
pub fn ensemble_distribution(results: &[TrialResult]) -> Result<EnsembleDistribution> {
    let values: Vec<f64> = results.iter().filter_map(|r| r.cost).collect();
    if values.is_empty() {
        return Err(Error::InsufficientData { needed: 1, got: 0 });
    }
    Ok(EnsembleDistribution {
        summary: Summary::of(&values),
        values,
    })
}

/// Costs (or coverages) of every trial of robots whose bias satisfies `pred`.
pub fn metric_values(
    results: &[TrialResult],
    metric: Metric,
    pred: impl Fn(f64) -> bool,
) -> Vec<f64> {
    results
        .iter()
        .filter(|r| pred(r.bias))
        .filter_map(|r| match metric {
            Metric::Cost => r.cost,
            Metric::Coverage => r.coverage,
        })
        .collect()
}

/// Mean of the per-bias means, for cross-checking pooled means.
pub fn mean_of_curve(curve: &[(f64, f64)]) -> f64 {
    let ys: Vec<f64> = curve.iter().map(|c| c.1).collect();
    stats::mean(&ys)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use crate::kinematics::Sample;

    fn result(robot_id: u64, bias: f64, trial_id: u64, cost: f64) -> TrialResult {
        TrialResult {
            robot_id,
            bias,
            trial_id,
            cost: Some(cost),
            coverage: None,
            stopped: false,
            final_pose: Pose::new(0.0, 0.0, 0.0),
        }
    }

    fn parked(n: usize, x: f64) -> Trajectory {
        Trajectory {
            dt: 0.1,
            samples: (0..n)
                .map(|k| Sample {
                    t: k as f64 * 0.1,
                    pose: Pose::new(x, 0.0, 0.0),
                })
                .collect(),
        }
    }

    #[test]
    fn grid_values() {
        let v = BiasSpec::Grid { lo: -0.04, hi: 0.04, n: 100 }.values();
        assert_eq!(v.len(), 100);
        assert_eq!((v[0], v[99]), (-0.04, 0.04));
        assert_eq!(BiasSpec::Grid { lo: -1.0, hi: 1.0, n: 1 }.values(), vec![0.0]);
        let v = BiasSpec::Grid { lo: -0.04, hi: 0.04, n: 101 }.values();
        assert_eq!(v[50], 0.0);
    }

    #[test]
    fn cost_of_parked_robots() {
        assert_eq!(cost(&parked(2001, 0.0), (0.0, 0.0)).unwrap(), 0.0);
        assert!((cost(&parked(2001, 0.3), (0.0, 0.0)).unwrap() - 0.3).abs() < 1e-15);
        assert!(matches!(
            cost(&parked(99, 0.3), (0.0, 0.0)),
            Err(Error::InsufficientData { needed: 100, got: 99 })
        ));
    }

    #[test]
    fn cost_alternating_tail() {
        let mut t = parked(2000, 5.0);
        let n = t.samples.len();
        for (i, s) in t.samples[n - 100..].iter_mut().enumerate() {
            s.pose.x = if i % 2 == 0 { 0.1 } else { 0.2 };
        }
        assert!((cost(&t, (0.0, 0.0)).unwrap() - 0.15).abs() < 1e-15);
    }

    fn toy() -> Vec<TrialResult> {
        // Biases -1, 0, 1 with three trials each.
        vec![
            result(0, -1.0, 0, 1.0),
            result(0, -1.0, 1, 2.0),
            result(0, -1.0, 2, 6.0),
            result(1, 0.0, 0, 0.5),
            result(1, 0.0, 1, 0.5),
            result(1, 0.0, 2, 2.0),
            result(2, 1.0, 0, 4.0),
            result(2, 1.0, 1, 4.0),
            result(2, 1.0, 2, 4.0),
        ]
    }

    #[test]
    fn mean_curve_by_hand() {
        let c = mean_cost_curve(&toy());
        assert_eq!(c, vec![(-1.0, 3.0), (0.0, 1.0), (1.0, 4.0)]);
        let mut doubled = toy();
        doubled.extend(toy());
        assert_eq!(mean_cost_curve(&doubled), c);
    }

    #[test]
    fn acceptability_by_brute_force() {
        let rs = toy();
        // Cells: [-1,-0.5], [-0.5,0.5], [0.5,1].
        assert_eq!(bias_cell_widths(&[-1.0, 0.0, 1.0]), vec![0.5, 1.0, 0.5]);
        let a = acceptability(&rs, 1.0);
        assert_eq!((a.n_acc, a.r_acc), (3, 1.0));
        let a = acceptability(&rs, 3.0);
        assert_eq!((a.n_acc, a.r_acc), (5, 1.5));
        let a = acceptability(&rs, 6.0);
        assert_eq!((a.n_acc, a.r_acc), (9, 2.0));
        let a = acceptability(&rs, 0.0);
        assert_eq!((a.n_acc, a.r_acc), (0, 0.0));
    }

    #[test]
    fn curves_require_sorted_thresholds() {
        assert!(acceptability_curves(&toy(), &[1.0, 0.5]).is_err());
        let c = acceptability_curves(&toy(), &[0.0, 6.0]).unwrap();
        assert_eq!((c[0].n_acc, c[1].n_acc), (0, 9));
    }

    #[test]
    fn ensemble_quantiles_by_hand() {
        let d = ensemble_distribution(&toy()).unwrap();
        // Sorted: 0.5 0.5 1 2 2 4 4 4 6.
        assert_eq!(d.summary.min, 0.5);
        assert_eq!(d.summary.q25, 1.0);
        assert_eq!(d.summary.median, 2.0);
        assert_eq!(d.summary.q75, 4.0);
        assert_eq!(d.summary.max, 6.0);
        assert!((d.summary.mean - 24.0 / 9.0).abs() < 1e-15);
        assert!((mean_of_curve(&mean_cost_curve(&toy())) - d.summary.mean).abs() < 1e-15);
    }

    #[test]
    fn validation_rejects_bad_configs() {
        let ok = ExperimentConfig {
            n_mc: 1,
            biases: BiasSpec::Explicit(vec![0.0]),
            ..ExperimentConfig::default()
        };
        assert!(ok.validate().is_ok());
        let bad_bias = ExperimentConfig {
            biases: BiasSpec::Explicit(vec![0.05]),
            ..ok.clone()
        };
        assert!(bad_bias.validate().is_err());
        let no_trials = ExperimentConfig { n_mc: 0, ..ok.clone() };
        assert!(no_trials.validate().is_err());
        let short = ExperimentConfig { duration: 5.0, ..ok.clone() };
        assert!(short.validate().is_err());
        let empty = ExperimentConfig {
            biases: BiasSpec::Explicit(vec![]),
            ..ok
        };
        assert!(empty.validate().is_err());
    }
}
