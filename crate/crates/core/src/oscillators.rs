//! Clock-driven colour oscillators with heterogeneous natural frequencies.
//!
//! A robot counts clock pulses modulo 60; it shows red while its phase is
//! below 30 and blue otherwise. Phases are continuous (pulse units). Coupled
//! populations follow Kuramoto dynamics on the mapped angle
//! `theta = 2 pi phase / 60`:
//!
//! ```text
//! d theta_i / dt = omega_i + (K / n_i) * sum_j sin(theta_j - theta_i)
//! ```
//!
//! `n_i` is `N` for all-to-all coupling (the `j = i` term is zero) and the
//! neighbour count on the lattice.

use alloc::vec::Vec;
use core::f64::consts::TAU;

use crate::error::{ensure, Result};
use crate::rng::TrialRng;

pub const PULSES_PER_CYCLE: f64 = 60.0;
pub const PULSES_PER_COLOR: f64 = 30.0;
/// Nominal pulse frequency (pulses per second).
pub const NOMINAL_RATE: f64 = 30.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Color {
    Red,
    Blue,
}

impl Color {
    pub fn of_phase(phase: f64) -> Self {
        if phase < PULSES_PER_COLOR {
            Color::Red
        } else {
            Color::Blue
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Color::Red => "red",
            Color::Blue => "blue",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Oscillator {
    /// Pulse counter in `[0, 60)`.
    pub phase: f64,
    /// Natural pulse rate `f_i` (pulses/s).
    pub natural_rate: f64,
}

impl Oscillator {
    pub fn color(&self) -> Color {
        Color::of_phase(self.phase)
    }

    pub fn angle(&self) -> f64 {
        phase_to_angle(self.phase)
    }

    pub fn angular_rate(&self) -> f64 {
        TAU * self.natural_rate / PULSES_PER_CYCLE
    }
}

pub fn phase_to_angle(phase: f64) -> f64 {
    TAU * phase / PULSES_PER_CYCLE
}

#[inline]
fn wrap_phase(p: f64) -> f64 {
    let mut r = p % PULSES_PER_CYCLE;
    if r < 0.0 {
        r += PULSES_PER_CYCLE;
    }
    // Adding the modulus to a tiny negative remainder can round up to 60.
    if r >= PULSES_PER_CYCLE {
        0.0
    } else {
        r
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Topology {
    AllToAll,
    /// Square lattice with von Neumann neighbourhood and open boundaries.
    Lattice,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OscillatorPopulation {
    pub oscillators: Vec<Oscillator>,
    /// Kuramoto coupling strength `K` (rad/s).
    pub coupling: f64,
    topology: Topology,
    neighbors: Vec<Vec<usize>>,
}

fn integer_sqrt(n: usize) -> Option<usize> {
    let r = libm::round(libm::sqrt(n as f64)) as usize;
    (r * r == n).then_some(r)
}

impl OscillatorPopulation {
    pub fn new(oscillators: Vec<Oscillator>, coupling: f64, topology: Topology) -> Result<Self> {
        let n = oscillators.len();
        ensure(n >= 1, "oscillators", "population must be non-empty")?;
        ensure(
            coupling >= 0.0 && coupling.is_finite(),
            "coupling",
            "must be >= 0",
        )?;
        for o in &oscillators {
            ensure(
                o.phase.is_finite() && o.natural_rate.is_finite(),
                "oscillators",
                "phases and rates must be finite",
            )?;
        }
        let neighbors = match topology {
            Topology::AllToAll => Vec::new(),
            Topology::Lattice => {
                let side = integer_sqrt(n).ok_or_else(|| {
                    crate::Error::invalid("topology", "lattice needs a perfect-square population")
                })?;
                (0..n)
                    .map(|k| {
                        let (r, c) = (k / side, k % side);
                        let mut nb = Vec::with_capacity(4);
                        if r > 0 {
                            nb.push(k - side);
                        }
                        if c > 0 {
                            nb.push(k - 1);
                        }
                        if c + 1 < side {
                            nb.push(k + 1);
                        }
                        if r + 1 < side {
                            nb.push(k + side);
                        }
                        nb
                    })
                    .collect()
            }
        };
        let oscillators = oscillators
            .into_iter()
            .map(|o| Oscillator {
                phase: wrap_phase(o.phase),
                ..o
            })
            .collect();
        Ok(OscillatorPopulation {
            oscillators,
            coupling,
            topology,
            neighbors,
        })
    }

    /// `n` oscillators with rates `Normal(mean_rate, sd_rate^2)`, all starting
    /// at `phase0`.
    pub fn heterogeneous(
        n: usize,
        mean_rate: f64,
        sd_rate: f64,
        phase0: f64,
        rng: &mut TrialRng,
    ) -> Vec<Oscillator> {
        (0..n)
            .map(|_| Oscillator {
                phase: phase0,
                natural_rate: mean_rate + sd_rate * rng.normal(),
            })
            .collect()
    }

    pub fn topology(&self) -> Topology {
        self.topology
    }

    pub fn len(&self) -> usize {
        self.oscillators.len()
    }

    pub fn is_empty(&self) -> bool {
        self.oscillators.is_empty()
    }

    pub fn colors(&self) -> Vec<Color> {
        self.oscillators.iter().map(Oscillator::color).collect()
    }

    pub fn phases(&self) -> Vec<f64> {
        self.oscillators.iter().map(|o| o.phase).collect()
    }

    /// `phase_i <- (phase_i + f_i dt) mod 60`.
    pub fn advance_uncoupled(&mut self, dt: f64) {
        for o in &mut self.oscillators {
            o.phase = wrap_phase(o.phase + dt * o.natural_rate);
        }
    }

    /// One synchronous explicit Euler step of the coupled dynamics.
    ///
    /// With `K = 0` this is bit-identical to [`Self::advance_uncoupled`].
    pub fn advance_coupled(&mut self, dt: f64) {
        let angles: Vec<f64> = self.oscillators.iter().map(Oscillator::angle).collect();
        let n = angles.len();
        let to_pulses = PULSES_PER_CYCLE / TAU;
        for i in 0..n {
            let coupling_rate = if self.coupling == 0.0 {
                0.0
            } else {
                let (sum, count) = match self.topology {
                    Topology::AllToAll => (
                        angles.iter().map(|&a| libm::sin(a - angles[i])).sum::<f64>(),
                        n,
                    ),
                    Topology::Lattice => {
                        let nb = &self.neighbors[i];
                        (
                            nb.iter().map(|&j| libm::sin(angles[j] - angles[i])).sum::<f64>(),
                            nb.len(),
                        )
                    }
                };
                if count == 0 {
                    0.0
                } else {
                    self.coupling / count as f64 * sum * to_pulses
                }
            };
            let o = &mut self.oscillators[i];
            o.phase = wrap_phase(o.phase + dt * (o.natural_rate + coupling_rate));
        }
    }

    pub fn advance(&mut self, dt: f64) {
        if self.coupling == 0.0 {
            self.advance_uncoupled(dt)
        } else {
            self.advance_coupled(dt)
        }
    }

    pub fn blue_fraction(&self) -> f64 {
        blue_fraction(&self.colors())
    }

    pub fn order_parameter(&self) -> f64 {
        order_parameter(&self.phases())
    }
}

/// `|mean_j exp(i theta_j)|` over phases given in pulses.
pub fn order_parameter(phases: &[f64]) -> f64 {
    if phases.is_empty() {
        return 0.0;
    }
    let (mut re, mut im) = (0.0, 0.0);
    for &p in phases {
        let (s, c) = libm::sincos(phase_to_angle(p));
        re += c;
        im += s;
    }
    let n = phases.len() as f64;
    libm::hypot(re / n, im / n).min(1.0)
}

pub fn blue_fraction(colors: &[Color]) -> f64 {
    if colors.is_empty() {
        return 0.0;
    }
    colors.iter().filter(|&&c| c == Color::Blue).count() as f64 / colors.len() as f64
}

/// Blue fraction of each snapshot in a history of colour vectors.
pub fn population_ratio(history: &[Vec<Color>]) -> Vec<f64> {
    history.iter().map(|snap| blue_fraction(snap)).collect()
}

/// Number of colour changes between consecutive samples.
pub fn switch_count(history: &[Color]) -> usize {
    history.windows(2).filter(|w| w[0] != w[1]).count()
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn osc(phase: f64, natural_rate: f64) -> Oscillator {
        Oscillator {
            phase,
            natural_rate,
        }
    }

    #[test]
    fn colour_thresholds() {
        assert_eq!(osc(0.0, 30.0).color(), Color::Red);
        assert_eq!(osc(29.999, 30.0).color(), Color::Red);
        assert_eq!(osc(30.0, 30.0).color(), Color::Blue);
    }

    #[test]
    fn first_switch_after_one_second() {
        let mut pop = OscillatorPopulation::new(vec![osc(0.0, 30.0)], 0.0, Topology::AllToAll)
            .unwrap();
        let dt = 0.01;
        let mut t_switch = None;
        for k in 1..=200 {
            pop.advance_uncoupled(dt);
            if pop.oscillators[0].color() == Color::Blue {
                t_switch = Some(k as f64 * dt);
                break;
            }
        }
        let t = t_switch.unwrap();
        assert!((t - 1.0).abs() <= dt + 1e-12, "{t}");
    }

    #[test]
    fn identical_oscillators_share_colours() {
        let mut pop =
            OscillatorPopulation::new(vec![osc(0.0, 30.0); 9], 0.0, Topology::Lattice).unwrap();
        for _ in 0..1000 {
            pop.advance_uncoupled(0.01);
            let f = pop.blue_fraction();
            assert!(f == 0.0 || f == 1.0);
        }
    }

    #[test]
    fn zero_coupling_matches_uncoupled_bitwise() {
        let mut rng = TrialRng::from_seed(8);
        let oscs = OscillatorPopulation::heterogeneous(16, 30.0, 0.5, 3.0, &mut rng);
        let mut a = OscillatorPopulation::new(oscs.clone(), 0.0, Topology::Lattice).unwrap();
        let mut b = a.clone();
        for _ in 0..5000 {
            a.advance_uncoupled(0.01);
            b.advance_coupled(0.01);
        }
        assert_eq!(a, b);
    }

    #[test]
    fn order_parameter_extremes() {
        assert!((order_parameter(&[12.0; 7]) - 1.0).abs() < 1e-15);
        for n in [2usize, 3, 7, 49] {
            let phases: Vec<f64> = (0..n).map(|k| 60.0 * k as f64 / n as f64).collect();
            assert!(order_parameter(&phases) < 1e-12, "n={n}");
        }
    }

    #[test]
    fn switch_counts() {
        assert_eq!(switch_count(&[Color::Red; 10]), 0);
        assert_eq!(
            switch_count(&[Color::Red, Color::Blue, Color::Blue, Color::Red]),
            2
        );
    }

    #[test]
    fn lattice_requires_square() {
        assert!(OscillatorPopulation::new(vec![osc(0.0, 30.0); 8], 1.0, Topology::Lattice).is_err());
        let pop =
            OscillatorPopulation::new(vec![osc(0.0, 30.0); 49], 1.0, Topology::Lattice).unwrap();
        assert_eq!(pop.neighbors[0].len(), 2);
        assert_eq!(pop.neighbors[3].len(), 3);
        assert_eq!(pop.neighbors[24].len(), 4);
    }

    #[test]
    fn ratio_of_history() {
        let h = vec![vec![Color::Red, Color::Red], vec![Color::Red, Color::Blue]];
        assert_eq!(population_ratio(&h), vec![0.0, 0.5]);
    }
}
