//! Per-robot light sensor response, the saw-tooth stimulus sweep and
//! threshold agreement.

use alloc::vec::Vec;

use crate::error::{ensure, Error, Result};
use crate::rng::TrialRng;
use crate::stats;

/// Largest value the 10-bit ambient light sensor reports.
pub const SENSOR_MAX: u16 = 1023;

/// Affine sensor with 10-bit quantization.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SensorModel {
    pub id: u32,
    pub gain: f64,
    pub offset: f64,
    /// Standard deviation of optional zero-mean reading noise (intensity units).
    pub noise_sd: f64,
}

impl SensorModel {
    pub fn ideal(id: u32) -> Self {
        SensorModel {
            id,
            gain: 1.0,
            offset: 0.0,
            noise_sd: 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        ensure(self.gain > 0.0 && self.gain.is_finite(), "gain", "must be > 0")?;
        ensure(self.offset.is_finite(), "offset", "must be finite")?;
        ensure(self.noise_sd >= 0.0, "noise_sd", "must be >= 0")
    }

    /// Noise-free reading: `clamp(round(gain * stimulus + offset), 0, 1023)`.
    pub fn read(&self, stimulus: f64) -> u16 {
        quantize(self.gain * stimulus + self.offset)
    }

    /// Reading with the sensor's zero-mean noise added before quantization.
    pub fn read_noisy(&self, stimulus: f64, rng: &mut TrialRng) -> u16 {
        if self.noise_sd == 0.0 {
            return self.read(stimulus);
        }
        quantize(self.gain * stimulus + self.offset + self.noise_sd * rng.normal())
    }
}

fn quantize(raw: f64) -> u16 {
    let r = libm::round(raw);
    if r.is_nan() || r <= 0.0 {
        0
    } else if r >= SENSOR_MAX as f64 {
        SENSOR_MAX
    } else {
        r as u16
    }
}

/// Draws `n` sensors with `gain ~ Normal(1, gain_sd^2)` (floored at 1e-3) and
/// `offset ~ Normal(0, offset_sd^2)`.
pub fn heterogeneous_sensors(
    n: usize,
    gain_sd: f64,
    offset_sd: f64,
    rng: &mut TrialRng,
) -> Vec<SensorModel> {
    (0..n)
        .map(|i| {
            let gain = (1.0 + gain_sd * rng.normal()).max(1e-3);
            let offset = offset_sd * rng.normal();
            SensorModel {
                id: i as u32,
                gain,
                offset,
                noise_sd: 0.0,
            }
        })
        .collect()
}

/// Repeated linear ramps of the projector V-value from 0 to 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StimulusProfile {
    pub repetitions: usize,
    pub samples_per_rep: usize,
}

impl StimulusProfile {
    pub fn validate(&self) -> Result<()> {
        ensure(self.repetitions >= 1, "repetitions", "must be >= 1")?;
        ensure(self.samples_per_rep >= 2, "samples_per_rep", "must be >= 2")
    }

    pub fn len(&self) -> usize {
        self.repetitions * self.samples_per_rep
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// `v` for sample `k`: `(k mod s) / (s - 1)`.
    pub fn v_value(&self, k: usize) -> f64 {
        let j = k % self.samples_per_rep;
        j as f64 / (self.samples_per_rep - 1) as f64
    }

    pub fn v_values(&self) -> Vec<f64> {
        (0..self.len()).map(|k| self.v_value(k)).collect()
    }
}

/// Readings of every sensor at every stimulus sample.
#[derive(Debug, Clone, PartialEq)]
pub struct ResponseTable {
    pub sensor_ids: Vec<u32>,
    pub v_values: Vec<f64>,
    /// `readings[robot][sample]`.
    pub readings: Vec<Vec<u16>>,
}

impl ResponseTable {
    /// Readings of all robots at sample `k`.
    pub fn column(&self, k: usize) -> Vec<u16> {
        self.readings.iter().map(|row| row[k]).collect()
    }

    /// Per-sample median across robots.
    pub fn median(&self) -> Vec<f64> {
        (0..self.v_values.len())
            .map(|k| {
                let col: Vec<f64> = self.column(k).into_iter().map(f64::from).collect();
                stats::quantile_sorted(&stats::sorted(&col), 0.5)
            })
            .collect()
    }
}

/// Evaluates every sensor against the stimulus `v * stimulus_scale`.
pub fn run_sweep(
    sensors: &[SensorModel],
    profile: &StimulusProfile,
    stimulus_scale: f64,
) -> Result<ResponseTable> {
    ensure(!sensors.is_empty(), "sensors", "must not be empty")?;
    profile.validate()?;
    for s in sensors {
        s.validate()?;
    }
    let v_values = profile.v_values();
    let readings = sensors
        .iter()
        .map(|s| v_values.iter().map(|v| s.read(v * stimulus_scale)).collect())
        .collect();
    Ok(ResponseTable {
        sensor_ids: sensors.iter().map(|s| s.id).collect(),
        v_values,
        readings,
    })
}

/// Period `k` of a periodic series: `series[k * period .. (k + 1) * period]`.
pub fn trim_period<T>(series: &[T], period: usize, k: usize) -> Result<&[T]> {
    ensure(period >= 1, "period", "must be >= 1")?;
    let end = (k + 1) * period;
    if series.len() < end {
        return Err(Error::InsufficientData {
            needed: end,
            got: series.len(),
        });
    }
    Ok(&series[k * period..end])
}

/// Number of robots whose reading is at least `threshold`.
pub fn agreement_count(readings: &[u16], threshold: u16) -> usize {
    readings.iter().filter(|&&r| r >= threshold).count()
}

/// `agreement_count` for each threshold.
pub fn agreement_curve(readings: &[u16], thresholds: &[u16]) -> Vec<usize> {
    let mut sorted = readings.to_vec();
    sorted.sort_unstable();
    thresholds
        .iter()
        .map(|&t| sorted.len() - sorted.partition_point(|&r| r < t))
        .collect()
}
