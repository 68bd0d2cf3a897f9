//! Recovering heading-bias models from trajectories.
//!
//! Each trial is reduced to one turning rate (mean wrapped heading increment
//! per second). Trials are then summarised per robot (an individual model
//! `N(mu_i, sigma_i^2)`) and pooled over the fleet (a single ensemble model
//! `N(mu, sigma^2)`).

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::kinematics::{wrap_angle, Trajectory};
use crate::stats;

/// Mean turning rate of a trajectory from its logged headings (rad/s).
pub fn trial_turning_rate(trajectory: &Trajectory) -> Result<f64> {
    let s = &trajectory.samples;
    if s.len() < 3 {
        return Err(Error::InsufficientData {
            needed: 3,
            got: s.len(),
        });
    }
    let first = s[0].pose;
    if s.iter().all(|x| x.pose.x == first.x && x.pose.y == first.y) {
        return Err(Error::Unestimable("all positions identical"));
    }
    let sum: f64 = s
        .windows(2)
        .map(|w| wrap_angle(w[1].pose.theta - w[0].pose.theta))
        .sum();
    Ok(sum / ((s.len() - 1) as f64 * trajectory.dt))
}

/// Mean turning rate from a position-only log sampled every `dt`.
///
/// Headings are reconstructed as segment directions; a zero-length segment
/// inherits the previous segment's direction.
pub fn turning_rate_from_positions(positions: &[(f64, f64)], dt: f64) -> Result<f64> {
    if positions.len() < 3 {
        return Err(Error::InsufficientData {
            needed: 3,
            got: positions.len(),
        });
    }
    let mut headings: Vec<Option<f64>> = positions
        .windows(2)
        .map(|w| {
            let (dx, dy) = (w[1].0 - w[0].0, w[1].1 - w[0].1);
            (dx != 0.0 || dy != 0.0).then(|| libm::atan2(dy, dx))
        })
        .collect();
    let first_known = headings
        .iter()
        .position(Option::is_some)
        .ok_or(Error::Unestimable("all positions identical"))?;
    // Leading gaps take the first known heading; later ones carry forward.
    let mut last = headings[first_known];
    for h in headings.iter_mut() {
        match h {
            Some(v) => last = Some(*v),
            None => *h = last,
        }
    }
    let hs: Vec<f64> = headings.into_iter().map(|h| h.unwrap_or(0.0)).collect();
    let sum: f64 = hs.windows(2).map(|w| wrap_angle(w[1] - w[0])).sum();
    Ok(sum / ((hs.len() - 1) as f64 * dt))
}

/// Turning rate of one trial of one robot.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrialRate {
    pub robot_id: u64,
    pub trial_id: u64,
    pub rate: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BiasEstimate {
    pub robot_id: u64,
    pub mu_i: f64,
    pub sigma_i: f64,
    pub n_trials: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnsembleModel {
    pub mu: f64,
    pub sigma: f64,
    pub n_trials_total: usize,
}

/// Per-robot mean and sample standard deviation of trial rates, sorted by
/// `mu_i` (ties by robot id).
pub fn fit_individual(rates: &[TrialRate]) -> Result<Vec<BiasEstimate>> {
    if rates.is_empty() {
        return Err(Error::Unestimable("no trials"));
    }
    let mut groups: BTreeMap<u64, Vec<f64>> = BTreeMap::new();
    for r in rates {
        groups.entry(r.robot_id).or_default().push(r.rate);
    }
    let mut out: Vec<BiasEstimate> = groups
        .into_iter()
        .map(|(robot_id, xs)| BiasEstimate {
            robot_id,
            mu_i: stats::mean(&xs),
            sigma_i: stats::sample_std(&xs),
            n_trials: xs.len(),
        })
        .collect();
    out.sort_by(|a, b| a.mu_i.total_cmp(&b.mu_i).then(a.robot_id.cmp(&b.robot_id)));
    Ok(out)
}

/// Mean and sample standard deviation of all trial rates pooled.
pub fn fit_ensemble(rates: &[TrialRate]) -> Result<EnsembleModel> {
    if rates.len() < 2 {
        return Err(Error::Unestimable("ensemble fit needs at least two trials"));
    }
    let xs: Vec<f64> = rates.iter().map(|r| r.rate).collect();
    Ok(EnsembleModel {
        mu: stats::mean(&xs),
        sigma: stats::sample_std(&xs),
        n_trials_total: xs.len(),
    })
}

/// Individual-versus-ensemble comparison.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelComparison {
    pub mean_sigma_individual: f64,
    pub sigma_ensemble: f64,
    /// `mean_sigma_individual / sigma_ensemble`; `None` when the ensemble
    /// spread is zero.
    pub ratio: Option<f64>,
    /// Fraction of robots with `sigma_i < sigma_ensemble`.
    pub fraction_below: f64,
}

pub fn compare_models(individual: &[BiasEstimate], ensemble: &EnsembleModel) -> ModelComparison {
    let sigmas: Vec<f64> = individual.iter().map(|e| e.sigma_i).collect();
    let mean_sigma = if sigmas.is_empty() {
        0.0
    } else {
        stats::mean(&sigmas)
    };
    let below = sigmas.iter().filter(|&&s| s < ensemble.sigma).count();
    ModelComparison {
        mean_sigma_individual: mean_sigma,
        sigma_ensemble: ensemble.sigma,
        ratio: (ensemble.sigma > 0.0).then(|| mean_sigma / ensemble.sigma),
        fraction_below: if sigmas.is_empty() {
            0.0
        } else {
            below as f64 / sigmas.len() as f64
        },
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Circle {
    pub center: (f64, f64),
    pub radius: f64,
}

/// Algebraic least-squares circle fit: minimises
/// `sum_k (|p_k - c|^2 - R^2)^2`.
///
/// Points are centred on their mean first; the fit then solves the 3x3
/// normal equations of `x^2 + y^2 + D x + E y + F = 0`.
pub fn circle_fit(points: &[(f64, f64)]) -> Result<Circle> {
    if points.len() < 3 {
        return Err(Error::InsufficientData {
            needed: 3,
            got: points.len(),
        });
    }
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;

    let (mut sxx, mut sxy, mut syy, mut sx, mut sy) = (0.0, 0.0, 0.0, 0.0, 0.0);
    let (mut sxz, mut syz, mut sz) = (0.0, 0.0, 0.0);
    for &(px, py) in points {
        let (x, y) = (px - mx, py - my);
        let z = x * x + y * y;
        sxx += x * x;
        sxy += x * y;
        syy += y * y;
        sx += x;
        sy += y;
        sxz += x * z;
        syz += y * z;
        sz += z;
    }
    // Normal equations A [D E F]^T = b.
    let a = [[sxx, sxy, sx], [sxy, syy, sy], [sx, sy, n]];
    let b = [-sxz, -syz, -sz];
    let scale = sxx.max(syy).max(1e-300);
    let [d, e, f] = solve3(a, b, scale)?;
    let (cx, cy) = (-d / 2.0, -e / 2.0);
    let r2 = cx * cx + cy * cy - f;
    if r2.is_nan() || r2 <= 0.0 || !r2.is_finite() {
        return Err(Error::DegenerateFit);
    }
    Ok(Circle {
        center: (cx + mx, cy + my),
        radius: libm::sqrt(r2),
    })
}

fn det3(m: &[[f64; 3]; 3]) -> f64 {
    m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
        - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
}

/// Cramer's rule with a relative singularity test.
fn solve3(a: [[f64; 3]; 3], b: [f64; 3], scale: f64) -> Result<[f64; 3]> {
    let det = det3(&a);
    // For centred data det = n (sxx syy - sxy^2); collinear points make the
    // xy-block singular.
    let block = a[0][0] * a[1][1] - a[0][1] * a[1][0];
    if block.abs() <= 1e-12 * scale * scale || det == 0.0 || !det.is_finite() {
        return Err(Error::DegenerateFit);
    }
    let mut out = [0.0; 3];
    for (k, slot) in out.iter_mut().enumerate() {
        let mut m = a;
        for row in 0..3 {
            m[row][k] = b[row];
        }
        *slot = det3(&m) / det;
    }
    Ok(out)
}
