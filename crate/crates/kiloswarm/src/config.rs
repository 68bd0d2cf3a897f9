//! Experiment configuration: sectioned TOML with every default explicit.
//!
//! A file may set any subset of keys; [`Config::resolve`] materializes the
//! derived defaults (seed, arena center, objective intensity, robot count) so
//! the resolved value can be written back out as a manifest and re-parsed to
//! the same configuration.

use std::fmt;
use std::hash::{BuildHasher, Hasher};
use std::path::{Path, PathBuf};

use kiloswarm_core::controllers::{PhototaxisParams, RandomWalkParams};
use kiloswarm_core::environment::{Arena, LightField, Profile, KILOBOT_RADIUS};
use kiloswarm_core::harness::{BiasSpec, ControllerSpec, EnvironmentSpec, ExperimentConfig};
use kiloswarm_core::kinematics::RobotParams;
use kiloswarm_core::oscillators::Topology;
use kiloswarm_core::sensing::StimulusProfile;
use kiloswarm_core::Error as CoreError;
use serde::{Deserialize, Serialize};

/// A configuration problem, located in the source file when possible.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub path: Option<PathBuf>,
    pub line: Option<usize>,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (&self.path, self.line) {
            (Some(p), Some(l)) => write!(f, "{}:{}: {}", p.display(), l, self.message),
            (Some(p), None) => write!(f, "{}: {}", p.display(), self.message),
            (None, Some(l)) => write!(f, "line {}: {}", l, self.message),
            (None, None) => f.write_str(&self.message),
        }
    }
}

impl std::error::Error for ConfigError {}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunSection {
    /// Master seed; drawn at random (and recorded) when omitted.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RobotSection {
    pub c_v: f64,
    pub c_omega: f64,
    pub sigma_motor: f64,
    pub delta_max: f64,
    pub m_max: f64,
}

impl Default for RobotSection {
    fn default() -> Self {
        let p = RobotParams::default();
        RobotSection {
            c_v: p.c_v,
            c_omega: p.c_omega,
            sigma_motor: p.sigma_motor,
            delta_max: kiloswarm_core::kinematics::DEFAULT_DELTA_MAX,
            m_max: kiloswarm_core::kinematics::DEFAULT_M_MAX,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimulationSection {
    pub duration: f64,
    pub dt: f64,
}

impl Default for SimulationSection {
    fn default() -> Self {
        SimulationSection {
            duration: 200.0,
            dt: 0.1,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ControllerKind {
    Straight,
    #[default]
    Phototaxis,
    RandomWalk,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ControllerSection {
    pub kind: ControllerKind,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StraightSection {
    pub nominal: f64,
}

impl Default for StraightSection {
    fn default() -> Self {
        StraightSection {
            nominal: kiloswarm_core::controllers::DEFAULT_NOMINAL,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PhototaxisSection {
    pub p_right: f64,
    pub forward_duration: f64,
    pub turn_duration: f64,
    /// Defaults to the light field's peak intensity.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub objective_intensity: Option<f64>,
    pub stop_threshold: f64,
    pub sample_period: f64,
    pub nominal: f64,
}

impl Default for PhototaxisSection {
    fn default() -> Self {
        let p = PhototaxisParams::default();
        PhototaxisSection {
            p_right: p.p_right,
            forward_duration: p.forward_duration,
            turn_duration: p.turn_duration,
            objective_intensity: None,
            stop_threshold: p.stop_threshold,
            sample_period: p.sample_period,
            nominal: p.nominal,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RandomWalkSection {
    pub mean_run_duration: f64,
    pub turn_angle_range: f64,
    pub turn_rate: f64,
    pub nominal: f64,
}

impl Default for RandomWalkSection {
    fn default() -> Self {
        let p = RandomWalkParams::default();
        RandomWalkSection {
            mean_run_duration: p.mean_run_duration,
            turn_angle_range: p.turn_angle_range,
            turn_rate: p.turn_rate,
            nominal: p.nominal,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProfileKind {
    #[default]
    Cone,
    Gaussian,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LightSection {
    pub center: [f64; 2],
    pub peak_intensity: f64,
    pub radius_of_support: f64,
    pub profile: ProfileKind,
}

impl Default for LightSection {
    fn default() -> Self {
        let f = LightField::default();
        LightSection {
            center: [f.center.0, f.center.1],
            peak_intensity: f.peak_intensity,
            radius_of_support: f.radius_of_support,
            profile: ProfileKind::Cone,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ArenaSection {
    pub width: f64,
    pub height: f64,
    /// Defaults to the light field's center.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub center: Option<[f64; 2]>,
}

impl Default for ArenaSection {
    fn default() -> Self {
        ArenaSection {
            width: 2.0,
            height: 2.0,
            center: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CoverageSection {
    pub cell_size: f64,
    pub footprint_radius: f64,
}

impl Default for CoverageSection {
    fn default() -> Self {
        CoverageSection {
            cell_size: 0.01,
            footprint_radius: KILOBOT_RADIUS,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepSection {
    /// Defaults to the length of `biases` when given, else 100.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_robots: Option<usize>,
    pub bias_lo: f64,
    pub bias_hi: f64,
    /// Explicit bias list; replaces the evenly spaced grid.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub biases: Option<Vec<f64>>,
    pub n_mc: usize,
    /// One result set per value; overrides `phototaxis.p_right`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p_right: Option<Vec<f64>>,
    pub mirror: bool,
    pub threshold_max: f64,
    pub n_thresholds: usize,
}

impl Default for SweepSection {
    fn default() -> Self {
        SweepSection {
            n_robots: None,
            bias_lo: -0.04,
            bias_hi: 0.04,
            biases: None,
            n_mc: 100,
            p_right: None,
            mirror: false,
            threshold_max: 1.5,
            n_thresholds: 101,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimulateSection {
    /// Robot indices into the sweep's bias list.
    pub robots: Vec<usize>,
    /// Trial indices; each selects a shared initial pose and a noise stream.
    pub trials: Vec<usize>,
    /// Single bias replacing the sweep's bias list.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bias: Option<f64>,
    /// `[x, y, theta]` replacing the shared initial poses.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub initial: Option<[f64; 3]>,
}

impl Default for SimulateSection {
    fn default() -> Self {
        SimulateSection {
            robots: vec![0],
            trials: vec![0],
            bias: None,
            initial: None,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TopologyKind {
    AllToAll,
    #[default]
    Lattice,
}

impl From<TopologyKind> for Topology {
    fn from(t: TopologyKind) -> Self {
        match t {
            TopologyKind::AllToAll => Topology::AllToAll,
            TopologyKind::Lattice => Topology::Lattice,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OscillatorSection {
    pub n: usize,
    pub mean_rate: f64,
    pub rate_sd: f64,
    /// Common starting phase (pulses) unless `random_phases` is set.
    pub phase0: f64,
    pub random_phases: bool,
    /// One run per coupling strength (rad/s).
    pub couplings: Vec<f64>,
    pub topology: TopologyKind,
    pub duration: f64,
    pub dt: f64,
    pub repetitions: usize,
    /// History and order-parameter rows are written every this many steps.
    pub record_every: usize,
}

impl Default for OscillatorSection {
    fn default() -> Self {
        OscillatorSection {
            n: 49,
            mean_rate: kiloswarm_core::oscillators::NOMINAL_RATE,
            rate_sd: 0.03,
            phase0: 0.0,
            random_phases: false,
            couplings: vec![0.0],
            topology: TopologyKind::Lattice,
            duration: 600.0,
            dt: 0.01,
            repetitions: 1,
            record_every: 100,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SensingSection {
    pub n_sensors: usize,
    pub gain_sd: f64,
    pub offset_sd: f64,
    /// All sensors ideal (gain 1, offset 0).
    pub homogeneous: bool,
    pub repetitions: usize,
    pub samples_per_rep: usize,
    pub stimulus_scale: f64,
    /// Repetition used for the agreement curves.
    pub period_index: usize,
    pub threshold_step: u16,
}

impl Default for SensingSection {
    fn default() -> Self {
        SensingSection {
            n_sensors: 12,
            gain_sd: 0.05,
            offset_sd: 10.0,
            homogeneous: false,
            repetitions: 4,
            samples_per_rep: 100,
            stimulus_scale: 1023.0,
            period_index: 0,
            threshold_step: 1,
        }
    }
}

/// Provenance recorded in a manifest; ignored when a manifest is re-read as
/// a config.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ManifestSection {
    pub command: String,
    pub config_path: String,
    pub output_dir: String,
    pub tool_version: String,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub manifest: Option<ManifestSection>,
    pub run: RunSection,
    pub robot: RobotSection,
    pub simulation: SimulationSection,
    pub controller: ControllerSection,
    pub straight: StraightSection,
    pub phototaxis: PhototaxisSection,
    pub random_walk: RandomWalkSection,
    pub light: LightSection,
    pub arena: ArenaSection,
    pub coverage: CoverageSection,
    pub sweep: SweepSection,
    pub simulate: SimulateSection,
    pub oscillators: OscillatorSection,
    pub sensing: SensingSection,
}

/// Command-line values that take precedence over the file.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub bias: Option<f64>,
    pub sigma: Option<f64>,
    pub duration: Option<f64>,
    pub dt: Option<f64>,
}

/// Largest seed representable as a TOML integer.
pub const MAX_SEED: u64 = i64::MAX as u64;

/// A fresh seed from the process's randomly keyed hasher.
pub fn random_seed() -> u64 {
    let mut h = std::collections::hash_map::RandomState::new().build_hasher();
    h.write_u64(
        std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .map(|d| d.as_nanos() as u64)
            .unwrap_or(0),
    );
    h.finish() & MAX_SEED
}

fn line_of_offset(text: &str, offset: usize) -> usize {
    text[..offset.min(text.len())].matches('\n').count() + 1
}

/// Line of the first `key = ...` assignment in the text, for diagnostics.
fn line_of_key(text: &str, key: &str) -> Option<usize> {
    text.lines().position(|l| {
        let l = l.trim_start();
        l.strip_prefix(key)
            .is_some_and(|rest| rest.trim_start().starts_with('='))
    })
    .map(|i| i + 1)
}

impl Config {
    pub fn parse(text: &str, path: Option<&Path>) -> Result<Config, ConfigError> {
        toml::from_str(text).map_err(|e| ConfigError {
            path: path.map(Path::to_path_buf),
            line: e.span().map(|s| line_of_offset(text, s.start)),
            message: e.message().to_string(),
        })
    }

    pub fn load(path: &Path) -> Result<(Config, String), ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|e| ConfigError {
            path: Some(path.to_path_buf()),
            line: None,
            message: format!("cannot read config: {e}"),
        })?;
        Ok((Config::parse(&text, Some(path))?, text))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config values are always representable")
    }

    /// Applies overrides and materializes every derived default.
    pub fn resolve(mut self, overrides: &Overrides) -> Result<Config, ConfigError> {
        self.manifest = None;
        if let Some(s) = overrides.seed {
            self.run.seed = Some(s);
        }
        let seed = *self.run.seed.get_or_insert_with(random_seed);
        if seed > MAX_SEED {
            return Err(ConfigError {
                path: None,
                line: None,
                message: format!("field `seed`: must be at most {MAX_SEED}"),
            });
        }
        if let Some(b) = overrides.bias {
            self.simulate.bias = Some(b);
            self.simulate.robots = vec![0];
        }
        if let Some(s) = overrides.sigma {
            self.robot.sigma_motor = s;
        }
        if let Some(d) = overrides.duration {
            self.simulation.duration = d;
        }
        if let Some(dt) = overrides.dt {
            self.simulation.dt = dt;
        }
        self.phototaxis
            .objective_intensity
            .get_or_insert(self.light.peak_intensity);
        self.arena.center.get_or_insert(self.light.center);
        match (&self.sweep.biases, self.sweep.n_robots) {
            (Some(b), Some(n)) if b.len() != n => {
                return Err(ConfigError {
                    path: None,
                    line: None,
                    message: format!(
                        "field `n_robots`: {n} does not match the {} explicit biases",
                        b.len()
                    ),
                })
            }
            (Some(b), _) => self.sweep.n_robots = Some(b.len()),
            (None, None) => self.sweep.n_robots = Some(100),
            (None, Some(_)) => {}
        }
        Ok(self)
    }

    pub fn seed(&self) -> u64 {
        self.run.seed.unwrap_or(0)
    }

    pub fn light_field(&self) -> LightField {
        LightField {
            center: (self.light.center[0], self.light.center[1]),
            peak_intensity: self.light.peak_intensity,
            radius_of_support: self.light.radius_of_support,
            profile: match self.light.profile {
                ProfileKind::Cone => Profile::Cone,
                ProfileKind::Gaussian => Profile::Gaussian,
            },
        }
    }

    pub fn arena(&self) -> Arena {
        let c = self.arena.center.unwrap_or(self.light.center);
        Arena::centered((c[0], c[1]), self.arena.width, self.arena.height)
    }

    pub fn environment(&self) -> EnvironmentSpec {
        EnvironmentSpec {
            field: self.light_field(),
            arena: self.arena(),
            cell_size: self.coverage.cell_size,
            footprint_radius: self.coverage.footprint_radius,
        }
    }

    pub fn controller_spec(&self, p_right: Option<f64>) -> ControllerSpec {
        match self.controller.kind {
            ControllerKind::Straight => ControllerSpec::Straight {
                nominal: self.straight.nominal,
            },
            ControllerKind::Phototaxis => {
                let p = &self.phototaxis;
                ControllerSpec::Phototaxis(PhototaxisParams {
                    p_right: p_right.unwrap_or(p.p_right),
                    forward_duration: p.forward_duration,
                    turn_duration: p.turn_duration,
                    objective_intensity: p.objective_intensity.unwrap_or(self.light.peak_intensity),
                    stop_threshold: p.stop_threshold,
                    sample_period: p.sample_period,
                    nominal: p.nominal,
                })
            }
            ControllerKind::RandomWalk => {
                let p = &self.random_walk;
                ControllerSpec::RandomWalk(RandomWalkParams {
                    mean_run_duration: p.mean_run_duration,
                    turn_angle_range: p.turn_angle_range,
                    turn_rate: p.turn_rate,
                    nominal: p.nominal,
                })
            }
        }
    }

    fn bias_spec(&self) -> BiasSpec {
        match &self.sweep.biases {
            Some(b) => BiasSpec::Explicit(b.clone()),
            None => BiasSpec::Grid {
                lo: self.sweep.bias_lo,
                hi: self.sweep.bias_hi,
                n: self.sweep.n_robots.unwrap_or(100),
            },
        }
    }

    fn robot_params(&self) -> RobotParams {
        RobotParams {
            c_v: self.robot.c_v,
            c_omega: self.robot.c_omega,
            delta: 0.0,
            sigma_motor: self.robot.sigma_motor,
        }
    }

    /// The harness experiment for one `p_right` value (or the configured one).
    pub fn experiment(&self, p_right: Option<f64>) -> ExperimentConfig {
        ExperimentConfig {
            robot: self.robot_params(),
            delta_max: self.robot.delta_max,
            biases: self.bias_spec(),
            n_mc: self.sweep.n_mc,
            duration: self.simulation.duration,
            dt: self.simulation.dt,
            controller: self.controller_spec(p_right),
            environment: self.environment(),
            master_seed: self.seed(),
            mirror: self.sweep.mirror,
        }
    }

    /// The experiment used by `simulate`: the sweep's biases unless a single
    /// bias is given, and enough trials to cover the requested indices.
    pub fn simulate_experiment(&self) -> ExperimentConfig {
        let mut e = self.experiment(None);
        if let Some(b) = self.simulate.bias {
            e.biases = BiasSpec::Explicit(vec![b]);
        }
        let max_trial = self.simulate.trials.iter().copied().max().unwrap_or(0);
        e.n_mc = e.n_mc.max(max_trial + 1);
        e
    }

    /// `p_right` values of a sweep: the list when given, else `None` (one
    /// result set with the controller's own value).
    pub fn sweep_p_rights(&self) -> Vec<Option<f64>> {
        match (&self.sweep.p_right, self.controller.kind) {
            (Some(v), ControllerKind::Phototaxis) => v.iter().map(|&p| Some(p)).collect(),
            _ => vec![None],
        }
    }

    pub fn thresholds(&self) -> Vec<f64> {
        let n = self.sweep.n_thresholds;
        let max = self.sweep.threshold_max;
        match n {
            0 => Vec::new(),
            1 => vec![max],
            n => (0..n).map(|i| i as f64 * max / (n - 1) as f64).collect(),
        }
    }

    pub fn stimulus_profile(&self) -> StimulusProfile {
        StimulusProfile {
            repetitions: self.sensing.repetitions,
            samples_per_rep: self.sensing.samples_per_rep,
        }
    }

    /// Checks every section with the core validators, locating the offending
    /// key in `source` when possible.
    pub fn validate(&self, source: Option<(&str, &Path)>) -> Result<(), ConfigError> {
        self.validate_inner().map_err(|(key, message)| ConfigError {
            path: source.map(|s| s.1.to_path_buf()),
            line: source.and_then(|s| line_of_key(s.0, key)),
            message: format!("field `{key}`: {message}"),
        })
    }

    fn validate_inner(&self) -> Result<(), (&'static str, String)> {
        let core = |e: CoreError| match e {
            CoreError::InvalidParameter { name, reason } => (name, reason),
            other => ("config", other.to_string()),
        };
        let r = &self.robot;
        if !(r.m_max > 0.0 && r.m_max.is_finite()) {
            return Err(("m_max", "must be > 0".into()));
        }
        let nominal = match self.controller.kind {
            ControllerKind::Straight => ("nominal", self.straight.nominal),
            ControllerKind::Phototaxis => ("nominal", self.phototaxis.nominal),
            ControllerKind::RandomWalk => ("nominal", self.random_walk.nominal),
        };
        if nominal.1 > r.m_max {
            return Err((nominal.0, format!("must not exceed m_max = {}", r.m_max)));
        }
        if let Some(ps) = &self.sweep.p_right {
            if ps.is_empty() {
                return Err(("p_right", "list must not be empty".into()));
            }
        }
        for p in self.sweep_p_rights() {
            self.experiment(p).validate().map_err(core)?;
        }
        let sim = self.simulate_experiment();
        sim.validate().map_err(core)?;
        if self.simulate.robots.is_empty() || self.simulate.trials.is_empty() {
            return Err(("robots", "simulate needs at least one robot and one trial".into()));
        }
        let n_robots = sim.biases.values().len();
        if let Some(&r) = self.simulate.robots.iter().find(|&&r| r >= n_robots) {
            return Err(("robots", format!("robot index {r} out of range (n_robots = {n_robots})")));
        }
        if let Some(init) = self.simulate.initial {
            if !init.iter().all(|v| v.is_finite()) {
                return Err(("initial", "must be finite".into()));
            }
        }
        if self.sweep.n_thresholds == 0 || self.sweep.threshold_max.is_nan() || self.sweep.threshold_max < 0.0 {
            return Err(("n_thresholds", "need at least one threshold and threshold_max >= 0".into()));
        }
        let o = &self.oscillators;
        if o.n == 0 {
            return Err(("n", "must be >= 1".into()));
        }
        if !(o.dt > 0.0 && o.duration >= o.dt) {
            return Err(("duration", "oscillator duration must be >= dt > 0".into()));
        }
        if o.couplings.is_empty() || o.couplings.iter().any(|k| !(*k >= 0.0 && k.is_finite())) {
            return Err(("couplings", "need at least one finite coupling >= 0".into()));
        }
        if o.rate_sd.is_nan() || o.rate_sd < 0.0 || !o.mean_rate.is_finite() || !o.phase0.is_finite() {
            return Err(("rate_sd", "rates and phases must be finite, rate_sd >= 0".into()));
        }
        if o.repetitions == 0 || o.record_every == 0 {
            return Err(("repetitions", "repetitions and record_every must be >= 1".into()));
        }
        if o.topology == TopologyKind::Lattice {
            let side = (o.n as f64).sqrt().round() as usize;
            if side * side != o.n {
                return Err(("topology", "lattice needs a perfect-square n".into()));
            }
        }
        let s = &self.sensing;
        if s.n_sensors == 0 {
            return Err(("n_sensors", "must be >= 1".into()));
        }
        if !(s.gain_sd >= 0.0 && s.offset_sd >= 0.0) {
            return Err(("gain_sd", "spreads must be >= 0".into()));
        }
        self.stimulus_profile().validate().map_err(core)?;
        if s.period_index >= s.repetitions {
            return Err(("period_index", "must be below repetitions".into()));
        }
        if s.threshold_step == 0 {
            return Err(("threshold_step", "must be >= 1".into()));
        }
        if !(s.stimulus_scale >= 0.0 && s.stimulus_scale.is_finite()) {
            return Err(("stimulus_scale", "must be >= 0".into()));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn resolved(text: &str) -> Config {
        Config::parse(text, None)
            .unwrap()
            .resolve(&Overrides {
                seed: Some(3),
                ..Overrides::default()
            })
            .unwrap()
    }

    #[test]
    fn empty_file_gives_valid_defaults() {
        let c = resolved("");
        c.validate(None).unwrap();
        assert_eq!(c.sweep.n_robots, Some(100));
        assert_eq!(c.phototaxis.objective_intensity, Some(1023.0));
        assert_eq!(c.arena.center, Some([0.0, 0.0]));
        assert_eq!(c.experiment(None).biases.values().len(), 100);
    }

    #[test]
    fn resolved_config_round_trips() {
        let c = resolved(
            "[sweep]\nbiases = [-0.01, 0.0, 0.0125]\np_right = [0.25, 1.0]\n[light]\nprofile = \"gaussian\"\n",
        );
        let again = Config::parse(&c.to_toml(), None)
            .unwrap()
            .resolve(&Overrides::default())
            .unwrap();
        assert_eq!(again, c);
        assert_eq!(again.sweep.n_robots, Some(3));
    }

    #[test]
    fn unknown_key_reports_its_line() {
        let e = Config::parse("[robot]\nc_v = 0.01\nc_omgea = 1.0\n", Some(Path::new("x.toml")))
            .unwrap_err();
        assert_eq!(e.line, Some(3));
        assert!(e.to_string().starts_with("x.toml:3:"), "{e}");
    }

    #[test]
    fn invalid_value_reports_field_and_line() {
        let text = "[phototaxis]\n\np_right = 1.5\n";
        let c = Config::parse(text, None)
            .unwrap()
            .resolve(&Overrides::default())
            .unwrap();
        let e = c.validate(Some((text, Path::new("c.toml")))).unwrap_err();
        assert_eq!(e.line, Some(3));
        assert!(e.message.contains("p_right"), "{e}");
    }

    #[test]
    fn overrides_take_precedence() {
        let c = Config::parse("[run]\nseed = 1\n[robot]\nsigma_motor = 0.01\n", None)
            .unwrap()
            .resolve(&Overrides {
                seed: Some(7),
                bias: Some(0.02),
                sigma: Some(0.0),
                ..Overrides::default()
            })
            .unwrap();
        assert_eq!(c.seed(), 7);
        assert_eq!(c.robot.sigma_motor, 0.0);
        assert_eq!(c.simulate_experiment().biases.values(), vec![0.02]);
    }

    #[test]
    fn missing_seed_is_drawn_and_recorded() {
        let c = Config::default().resolve(&Overrides::default()).unwrap();
        assert!(c.run.seed.is_some());
        assert!(c.to_toml().contains("seed ="));
    }

    #[test]
    fn threshold_grid_hits_three_quarters() {
        let t = resolved("").thresholds();
        assert_eq!(t.len(), 101);
        assert_eq!(t[50], 0.75);
        assert_eq!(*t.last().unwrap(), 1.5);
    }
}
