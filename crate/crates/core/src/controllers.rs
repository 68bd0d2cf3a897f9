//! Robot behaviours: greedy stochastic phototaxis, run-and-tumble random walk
//! and straight-line motion.
//!
//! Each behaviour is a pure transition `(state, input) -> (command, state)`
//! plus a thin [`Controller`] wrapper used by the simulator.

use core::convert::Infallible;

use crate::environment::LightField;
use crate::error::{ensure, Result};
use crate::kinematics::{Actuation, Controller, MotorCommand, Pose};
use crate::rng::TrialRng;

/// Default nominal motor rate for forward motion and pivots.
pub const DEFAULT_NOMINAL: f64 = 0.5;

const TIME_EPS: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhototaxisParams {
    /// Probability of turning right when a sample does not improve.
    pub p_right: f64,
    pub forward_duration: f64,
    pub turn_duration: f64,
    pub objective_intensity: f64,
    pub stop_threshold: f64,
    pub sample_period: f64,
    pub nominal: f64,
}

impl Default for PhototaxisParams {
    fn default() -> Self {
        PhototaxisParams {
            p_right: 0.5,
            forward_duration: 1.0,
            turn_duration: 0.5,
            objective_intensity: 1023.0,
            stop_threshold: 2.0,
            sample_period: 0.5,
            nominal: DEFAULT_NOMINAL,
        }
    }
}

impl PhototaxisParams {
    pub fn validate(&self) -> Result<()> {
        ensure(
            (0.0..=1.0).contains(&self.p_right),
            "p_right",
            "must lie in [0, 1]",
        )?;
        for (name, v) in [
            ("forward_duration", self.forward_duration),
            ("turn_duration", self.turn_duration),
            ("sample_period", self.sample_period),
        ] {
            ensure(v > 0.0 && v.is_finite(), name, "must be > 0")?;
        }
        ensure(
            self.stop_threshold >= 0.0,
            "stop_threshold",
            "must be >= 0",
        )?;
        ensure(
            self.objective_intensity.is_finite(),
            "objective_intensity",
            "must be finite",
        )?;
        ensure(
            self.nominal >= 0.0 && self.nominal.is_finite(),
            "nominal",
            "must be >= 0",
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Forward,
    Turning,
    Stopped,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TurnDirection {
    Left,
    Right,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ControllerState {
    pub mode: Mode,
    /// Time spent in the current mode (s).
    pub mode_timer: f64,
    /// Time since the last light sample was taken (s).
    pub since_sample: f64,
    /// `|I - I_objective|` at the last sample instant.
    pub previous_error: f64,
    pub turn_direction: TurnDirection,
}

impl ControllerState {
    /// Fresh state; the first call takes a sample immediately, and since no
    /// previous sample exists that first sample always counts as improvement.
    pub fn initial(params: &PhototaxisParams) -> Self {
        ControllerState {
            mode: Mode::Forward,
            mode_timer: 0.0,
            since_sample: params.sample_period,
            previous_error: f64::INFINITY,
            turn_direction: TurnDirection::Right,
        }
    }
}

/// One control step of greedy phototaxis.
///
/// Stopping is checked on every call and is absorbing. In forward mode a
/// sample is taken every `sample_period` (or when the forward bout runs out);
/// in turning mode the sample is taken when the bout ends. A sample whose
/// error strictly decreased starts a fresh forward bout, anything else starts
/// a turning bout with a single direction draw.
pub fn phototaxis_step(
    state: ControllerState,
    params: &PhototaxisParams,
    reading: f64,
    dt: f64,
    rng: &mut TrialRng,
) -> (MotorCommand, ControllerState) {
    let mut s = state;
    if s.mode == Mode::Stopped {
        return (MotorCommand::STOP, s);
    }
    let error = libm::fabs(reading - params.objective_intensity);
    if error < params.stop_threshold {
        s.mode = Mode::Stopped;
        s.mode_timer = 0.0;
        s.previous_error = error;
        return (MotorCommand::STOP, s);
    }

    let sample_now = match s.mode {
        Mode::Forward => {
            s.since_sample >= params.sample_period - TIME_EPS
                || s.mode_timer >= params.forward_duration - TIME_EPS
        }
        Mode::Turning => s.mode_timer >= params.turn_duration - TIME_EPS,
        Mode::Stopped => unreachable!(),
    };
    if sample_now {
        let improved = error < s.previous_error;
        s.previous_error = error;
        s.since_sample = 0.0;
        s.mode_timer = 0.0;
        if improved {
            s.mode = Mode::Forward;
        } else {
            s.mode = Mode::Turning;
            s.turn_direction = if rng.turn_right(params.p_right) {
                TurnDirection::Right
            } else {
                TurnDirection::Left
            };
        }
    }

    let cmd = match (s.mode, s.turn_direction) {
        (Mode::Forward, _) => MotorCommand::equal(params.nominal),
        (Mode::Turning, TurnDirection::Right) => MotorCommand::pivot_right(params.nominal),
        (Mode::Turning, TurnDirection::Left) => MotorCommand::pivot_left(params.nominal),
        (Mode::Stopped, _) => MotorCommand::STOP,
    };
    let bout = match s.mode {
        Mode::Forward => params.forward_duration,
        _ => params.turn_duration,
    };
    s.mode_timer = (s.mode_timer + dt).min(bout);
    s.since_sample += dt;
    (cmd, s)
}

/// Phototaxis behaviour sensing a [`LightField`].
#[derive(Debug, Clone)]
pub struct Phototaxis {
    pub params: PhototaxisParams,
    pub state: ControllerState,
    pub field: LightField,
}

impl Phototaxis {
    pub fn new(params: PhototaxisParams, field: LightField) -> Self {
        Phototaxis {
            state: ControllerState::initial(&params),
            params,
            field,
        }
    }

    pub fn stopped(&self) -> bool {
        self.state.mode == Mode::Stopped
    }
}

impl Controller for Phototaxis {
    type Error = Infallible;

    fn actuate(&mut self, pose: &Pose, dt: f64, rng: &mut TrialRng) -> Result<Actuation, Infallible> {
        let reading = self.field.intensity_at(pose);
        let (cmd, next) = phototaxis_step(self.state, &self.params, reading, dt, rng);
        self.state = next;
        Ok(if next.mode == Mode::Stopped {
            Actuation::Halt
        } else {
            Actuation::Drive(cmd)
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RandomWalkParams {
    pub mean_run_duration: f64,
    /// Tumble angles are drawn from `Uniform(-range, range)`.
    pub turn_angle_range: f64,
    /// Turning rate assumed while pivoting (rad/s); sets tumble durations.
    pub turn_rate: f64,
    pub nominal: f64,
}

impl Default for RandomWalkParams {
    fn default() -> Self {
        RandomWalkParams {
            mean_run_duration: 10.0,
            turn_angle_range: core::f64::consts::PI,
            turn_rate: 0.5,
            nominal: DEFAULT_NOMINAL,
        }
    }
}

impl RandomWalkParams {
    pub fn validate(&self) -> Result<()> {
        ensure(
            self.mean_run_duration > 0.0 && self.mean_run_duration.is_finite(),
            "mean_run_duration",
            "must be > 0",
        )?;
        ensure(
            self.turn_angle_range > 0.0 && self.turn_angle_range <= core::f64::consts::PI,
            "turn_angle_range",
            "must lie in (0, pi]",
        )?;
        ensure(
            self.turn_rate > 0.0 && self.turn_rate.is_finite(),
            "turn_rate",
            "must be > 0",
        )?;
        ensure(self.nominal >= 0.0, "nominal", "must be >= 0")
    }

    pub fn sample_run_duration(&self, rng: &mut TrialRng) -> f64 {
        self.mean_run_duration * rng.exp1()
    }

    /// Signed tumble angle; positive turns left.
    pub fn sample_turn_angle(&self, rng: &mut TrialRng) -> f64 {
        self.turn_angle_range * rng.signed_unit()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WalkPhase {
    Run,
    Tumble(TurnDirection),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RandomWalkState {
    pub phase: WalkPhase,
    /// Time left in the current bout (s). May carry a sub-step remainder.
    pub remaining: f64,
}

impl Default for RandomWalkState {
    /// An exhausted tumble, so the walk opens with a run.
    fn default() -> Self {
        RandomWalkState {
            phase: WalkPhase::Tumble(TurnDirection::Right),
            remaining: 0.0,
        }
    }
}

/// One control step of the run-and-tumble walk.
///
/// Bouts are quantized to whole steps by rounding: a bout ends once less than
/// half a step of it remains, and the leftover carries into the next bout.
/// Random draws happen only at bout boundaries.
pub fn random_walk_step(
    state: RandomWalkState,
    params: &RandomWalkParams,
    dt: f64,
    rng: &mut TrialRng,
) -> (MotorCommand, RandomWalkState) {
    let mut s = state;
    while s.remaining < dt / 2.0 {
        s = match s.phase {
            WalkPhase::Run => {
                let angle = params.sample_turn_angle(rng);
                let dir = if angle > 0.0 {
                    TurnDirection::Left
                } else {
                    TurnDirection::Right
                };
                RandomWalkState {
                    phase: WalkPhase::Tumble(dir),
                    remaining: s.remaining + libm::fabs(angle) / params.turn_rate,
                }
            }
            WalkPhase::Tumble(_) => RandomWalkState {
                phase: WalkPhase::Run,
                remaining: s.remaining + params.sample_run_duration(rng),
            },
        };
    }
    let cmd = match s.phase {
        WalkPhase::Run => MotorCommand::equal(params.nominal),
        WalkPhase::Tumble(TurnDirection::Left) => MotorCommand::pivot_left(params.nominal),
        WalkPhase::Tumble(TurnDirection::Right) => MotorCommand::pivot_right(params.nominal),
    };
    s.remaining -= dt;
    (cmd, s)
}

#[derive(Debug, Clone, Default)]
pub struct RandomWalk {
    pub params: RandomWalkParams,
    pub state: RandomWalkState,
}

impl RandomWalk {
    pub fn new(params: RandomWalkParams) -> Self {
        RandomWalk {
            params,
            state: RandomWalkState::default(),
        }
    }
}

impl Controller for RandomWalk {
    type Error = Infallible;

    fn actuate(&mut self, _: &Pose, dt: f64, rng: &mut TrialRng) -> Result<Actuation, Infallible> {
        let (cmd, next) = random_walk_step(self.state, &self.params, dt, rng);
        self.state = next;
        Ok(Actuation::Drive(cmd))
    }
}

/// Constant equal motor command.
pub const fn straight_step(nominal: f64) -> MotorCommand {
    MotorCommand::equal(nominal)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Straight {
    pub nominal: f64,
}

impl Default for Straight {
    fn default() -> Self {
        Straight {
            nominal: DEFAULT_NOMINAL,
        }
    }
}

impl Controller for Straight {
    type Error = Infallible;

    fn actuate(&mut self, _: &Pose, _: f64, _: &mut TrialRng) -> Result<Actuation, Infallible> {
        Ok(Actuation::Drive(straight_step(self.nominal)))
    }
}
