//! Heading-biased differential-drive motion.
//!
//! A robot is commanded with nominal right/left motor rates. Its individual
//! heading bias `delta` shifts the right motor up and the left motor down by
//! the same amount, and per-step Gaussian noise is added to each motor:
//!
//! ```text
//! m~R = (mR + delta) + etaR        v     = c_v     * (m~R + m~L)
//! m~L = (mL - delta) + etaL        omega = c_omega * (m~R - m~L)
//! ```
//!
//! Poses are advanced with explicit Euler steps. Positive `omega` turns the
//! robot counter-clockwise (to its left).

use alloc::vec::Vec;
use core::f64::consts::{PI, TAU};

use crate::environment::Arena;
use crate::error::{ensure, Result};
use crate::rng::TrialRng;

/// Default cap on nominal motor rates.
pub const DEFAULT_M_MAX: f64 = 1.0;
/// Default magnitude bound on heading bias.
pub const DEFAULT_DELTA_MAX: f64 = 0.04;

/// Wraps an angle into `(-pi, pi]`.
///
/// Odd-symmetric: `wrap_angle(-a) == -wrap_angle(a)` for every `a` that does
/// not land on the `±pi` boundary.
#[inline]
pub fn wrap_angle(a: f64) -> f64 {
    if a > -PI && a <= PI {
        return a;
    }
    let mut r = a % TAU;
    if r > PI {
        r -= TAU;
    } else if r <= -PI {
        r += TAU;
    }
    r
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pose {
    pub x: f64,
    pub y: f64,
    pub theta: f64,
}

impl Pose {
    pub fn new(x: f64, y: f64, theta: f64) -> Self {
        Pose {
            x,
            y,
            theta: wrap_angle(theta),
        }
    }

    /// Reflection across the horizontal line `y = axis_y`.
    pub fn mirrored(&self, axis_y: f64) -> Self {
        Pose {
            x: self.x,
            y: 2.0 * axis_y - self.y,
            theta: wrap_angle(-self.theta),
        }
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.theta.is_finite()
    }

    pub fn distance_to(&self, (cx, cy): (f64, f64)) -> f64 {
        libm::hypot(self.x - cx, self.y - cy)
    }
}

/// Nominal right/left motor rates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MotorCommand {
    pub right: f64,
    pub left: f64,
}

impl MotorCommand {
    pub const STOP: MotorCommand = MotorCommand {
        right: 0.0,
        left: 0.0,
    };

    pub fn new(right: f64, left: f64, m_max: f64) -> Result<Self> {
        ensure(
            (0.0..=m_max).contains(&right),
            "m_R",
            "must lie in [0, m_max]",
        )?;
        ensure(
            (0.0..=m_max).contains(&left),
            "m_L",
            "must lie in [0, m_max]",
        )?;
        Ok(MotorCommand { right, left })
    }

    pub const fn equal(rate: f64) -> Self {
        MotorCommand {
            right: rate,
            left: rate,
        }
    }

    /// Single-wheel pivot to the right (clockwise): left motor only.
    pub const fn pivot_right(rate: f64) -> Self {
        MotorCommand {
            right: 0.0,
            left: rate,
        }
    }

    /// Single-wheel pivot to the left (counter-clockwise): right motor only.
    pub const fn pivot_left(rate: f64) -> Self {
        MotorCommand {
            right: rate,
            left: 0.0,
        }
    }

    pub const fn mirrored(self) -> Self {
        MotorCommand {
            right: self.left,
            left: self.right,
        }
    }
}

/// Per-individual actuation identity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RobotParams {
    /// Linear speed per unit of summed motor rate (m/s).
    pub c_v: f64,
    /// Turning rate per unit of motor-rate difference (rad/s).
    pub c_omega: f64,
    /// Heading bias, in nominal motor-rate units.
    pub delta: f64,
    /// Standard deviation of the per-step motor noise, in nominal rate units.
    pub sigma_motor: f64,
}

impl Default for RobotParams {
    fn default() -> Self {
        RobotParams {
            c_v: 0.01,
            c_omega: 1.0,
            delta: 0.0,
            sigma_motor: 0.005,
        }
    }
}

impl RobotParams {
    pub fn with_delta(self, delta: f64) -> Self {
        RobotParams { delta, ..self }
    }

    pub fn with_sigma(self, sigma_motor: f64) -> Self {
        RobotParams {
            sigma_motor,
            ..self
        }
    }

    pub fn validate(&self, delta_max: f64) -> Result<()> {
        ensure(self.c_v > 0.0 && self.c_v.is_finite(), "c_v", "must be > 0")?;
        ensure(
            self.c_omega > 0.0 && self.c_omega.is_finite(),
            "c_omega",
            "must be > 0",
        )?;
        ensure(
            libm::fabs(self.delta) <= delta_max,
            "delta",
            "magnitude exceeds delta_max",
        )?;
        ensure(
            self.sigma_motor >= 0.0 && self.sigma_motor.is_finite(),
            "sigma_motor",
            "must be >= 0",
        )
    }

    /// Noiseless turning rate caused by the bias alone, `2 * c_omega * delta`.
    pub fn bias_turning_rate(&self) -> f64 {
        2.0 * self.c_omega * self.delta
    }
}

/// Effective motor rates after bias and noise. No clamping is applied.
pub fn apply_bias_and_noise(
    cmd: MotorCommand,
    params: &RobotParams,
    rng: &mut TrialRng,
) -> (f64, f64) {
    let (eta_r, eta_l) = rng.motor_noise(params.sigma_motor);
    (
        (cmd.right + params.delta) + eta_r,
        (cmd.left - params.delta) + eta_l,
    )
}

/// Maps effective motor rates to `(v, omega)`.
pub fn motor_to_velocity((right, left): (f64, f64), params: &RobotParams) -> (f64, f64) {
    (
        params.c_v * (right + left),
        params.c_omega * (right - left),
    )
}

/// One explicit Euler step. Always consumes exactly two noise draws.
pub fn step(
    pose: &Pose,
    cmd: MotorCommand,
    params: &RobotParams,
    dt: f64,
    rng: &mut TrialRng,
) -> Pose {
    let rates = apply_bias_and_noise(cmd, params, rng);
    let (v, omega) = motor_to_velocity(rates, params);
    let (s, c) = libm::sincos(pose.theta);
    Pose {
        x: pose.x + v * c * dt,
        y: pose.y + v * s * dt,
        theta: wrap_angle(pose.theta + omega * dt),
    }
}

/// What a controller asks of the motors for the next control step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Actuation {
    Drive(MotorCommand),
    /// Motors off; the pose is frozen for the step.
    Halt,
}

/// A behaviour queried once per control step.
pub trait Controller {
    type Error;

    fn actuate(&mut self, pose: &Pose, dt: f64, rng: &mut TrialRng)
        -> Result<Actuation, Self::Error>;
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sample {
    pub t: f64,
    pub pose: Pose,
}

/// Uniformly sampled pose history starting at `t = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub dt: f64,
    pub samples: Vec<Sample>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn poses(&self) -> impl Iterator<Item = &Pose> + '_ {
        self.samples.iter().map(|s| &s.pose)
    }

    pub fn last_pose(&self) -> Option<&Pose> {
        self.samples.last().map(|s| &s.pose)
    }
}

/// Number of whole steps of `dt` in `duration`.
pub fn step_count(duration: f64, dt: f64) -> usize {
    libm::floor(duration / dt * (1.0 + 1e-12)) as usize
}

/// Timing of a single simulated run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Clock {
    pub duration: f64,
    pub dt: f64,
}

impl Clock {
    pub fn new(duration: f64, dt: f64) -> Result<Self> {
        ensure(dt > 0.0 && dt.is_finite(), "dt", "must be > 0")?;
        ensure(
            duration.is_finite() && duration >= dt,
            "duration",
            "must be >= dt",
        )?;
        Ok(Clock { duration, dt })
    }

    pub fn steps(&self) -> usize {
        step_count(self.duration, self.dt)
    }
}

/// Runs `controller` on a robot for `clock.steps()` steps.
///
/// When `arena` is given, each new pose is clamped into it. A halted step
/// keeps the pose unchanged but still consumes the step's two noise draws.
pub fn simulate_trajectory<C: Controller>(
    initial: Pose,
    controller: &mut C,
    params: &RobotParams,
    clock: Clock,
    arena: Option<&Arena>,
    rng: &mut TrialRng,
) -> Result<Trajectory, C::Error> {
    let n = clock.steps();
    let dt = clock.dt;
    let mut samples = Vec::with_capacity(n + 1);
    let mut pose = initial;
    samples.push(Sample { t: 0.0, pose });
    for k in 1..=n {
        pose = match controller.actuate(&pose, dt, rng)? {
            Actuation::Drive(cmd) => {
                let next = step(&pose, cmd, params, dt, rng);
                match arena {
                    Some(a) => a.confine(&next),
                    None => next,
                }
            }
            Actuation::Halt => {
                rng.motor_noise(params.sigma_motor);
                pose
            }
        };
        samples.push(Sample {
            t: k as f64 * dt,
            pose,
        });
    }
    Ok(Trajectory { dt, samples })
}
