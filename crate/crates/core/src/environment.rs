//! Light field, arena bounds and the coverage raster.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{ensure, Result};
use crate::kinematics::Pose;

/// Kilobot body radius, used as the default coverage footprint.
pub const KILOBOT_RADIUS: f64 = 0.0165;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Profile {
    /// `peak * max(0, 1 - d / radius)`.
    Cone,
    /// `peak * exp(-d^2 / (2 radius^2))`; `radius` acts as the standard deviation.
    Gaussian,
}

/// Radially symmetric, convex light distribution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LightField {
    pub center: (f64, f64),
    pub peak_intensity: f64,
    pub radius_of_support: f64,
    pub profile: Profile,
}

impl Default for LightField {
    fn default() -> Self {
        LightField {
            center: (0.0, 0.0),
            peak_intensity: 1023.0,
            radius_of_support: 1.5,
            profile: Profile::Cone,
        }
    }
}

impl LightField {
    pub fn validate(&self) -> Result<()> {
        ensure(
            self.center.0.is_finite() && self.center.1.is_finite(),
            "center",
            "must be finite",
        )?;
        ensure(
            self.peak_intensity >= 0.0 && self.peak_intensity.is_finite(),
            "peak_intensity",
            "must be >= 0",
        )?;
        ensure(
            self.radius_of_support > 0.0 && self.radius_of_support.is_finite(),
            "radius_of_support",
            "must be > 0",
        )
    }

    pub fn sample_intensity(&self, x: f64, y: f64) -> f64 {
        let d = libm::hypot(x - self.center.0, y - self.center.1);
        match self.profile {
            Profile::Cone => self.peak_intensity * f64::max(0.0, 1.0 - d / self.radius_of_support),
            Profile::Gaussian => {
                let s = self.radius_of_support;
                self.peak_intensity * libm::exp(-(d * d) / (2.0 * s * s))
            }
        }
    }

    pub fn intensity_at(&self, pose: &Pose) -> f64 {
        self.sample_intensity(pose.x, pose.y)
    }
}

/// Axis-aligned rectangular arena.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Arena {
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
}

impl Default for Arena {
    fn default() -> Self {
        Arena::centered((0.0, 0.0), 2.0, 2.0)
    }
}

impl Arena {
    pub fn new(x_min: f64, x_max: f64, y_min: f64, y_max: f64) -> Result<Self> {
        let a = Arena {
            x_min,
            x_max,
            y_min,
            y_max,
        };
        a.validate()?;
        Ok(a)
    }

    pub fn centered((cx, cy): (f64, f64), width: f64, height: f64) -> Self {
        Arena {
            x_min: cx - width / 2.0,
            x_max: cx + width / 2.0,
            y_min: cy - height / 2.0,
            y_max: cy + height / 2.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        ensure(
            self.x_min.is_finite() && self.x_max.is_finite() && self.x_min < self.x_max,
            "arena",
            "x_min must be < x_max",
        )?;
        ensure(
            self.y_min.is_finite() && self.y_max.is_finite() && self.y_min < self.y_max,
            "arena",
            "y_min must be < y_max",
        )
    }

    pub fn width(&self) -> f64 {
        self.x_max - self.x_min
    }

    pub fn height(&self) -> f64 {
        self.y_max - self.y_min
    }

    pub fn contains(&self, x: f64, y: f64) -> bool {
        (self.x_min..=self.x_max).contains(&x) && (self.y_min..=self.y_max).contains(&y)
    }

    /// Clamps the position into the arena; heading is untouched.
    pub fn confine(&self, pose: &Pose) -> Pose {
        Pose {
            x: pose.x.clamp(self.x_min, self.x_max),
            y: pose.y.clamp(self.y_min, self.y_max),
            theta: pose.theta,
        }
    }
}

/// Boolean raster over an arena recording which cells a footprint touched.
#[derive(Debug, Clone, PartialEq)]
pub struct CoverageGrid {
    arena: Arena,
    cell_size: f64,
    nx: usize,
    ny: usize,
    visited: Vec<bool>,
    n_visited: usize,
}

impl CoverageGrid {
    pub fn new(arena: Arena, cell_size: f64) -> Result<Self> {
        arena.validate()?;
        ensure(
            cell_size > 0.0 && cell_size.is_finite(),
            "cell_size",
            "must be > 0",
        )?;
        let nx = libm::ceil(arena.width() / cell_size * (1.0 - 1e-12)) as usize;
        let ny = libm::ceil(arena.height() / cell_size * (1.0 - 1e-12)) as usize;
        let (nx, ny) = (nx.max(1), ny.max(1));
        Ok(CoverageGrid {
            arena,
            cell_size,
            nx,
            ny,
            visited: vec![false; nx * ny],
            n_visited: 0,
        })
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.nx, self.ny)
    }

    pub fn cell_size(&self) -> f64 {
        self.cell_size
    }

    pub fn arena(&self) -> &Arena {
        &self.arena
    }

    pub fn total_cells(&self) -> usize {
        self.nx * self.ny
    }

    pub fn visited_count(&self) -> usize {
        self.n_visited
    }

    pub fn cell_center(&self, i: usize, j: usize) -> (f64, f64) {
        (
            self.arena.x_min + (i as f64 + 0.5) * self.cell_size,
            self.arena.y_min + (j as f64 + 0.5) * self.cell_size,
        )
    }

    /// `(i, j)` is column `i` (x) and row `j` (y, from `y_min` upwards).
    pub fn is_visited(&self, i: usize, j: usize) -> bool {
        self.visited[j * self.nx + i]
    }

    pub fn set_visited(&mut self, i: usize, j: usize) {
        let k = j * self.nx + i;
        if !self.visited[k] {
            self.visited[k] = true;
            self.n_visited += 1;
        }
    }

    /// Marks every cell whose center lies within `radius` of `(x, y)`.
    pub fn mark(&mut self, x: f64, y: f64, radius: f64) {
        let r2 = radius * radius;
        let idx = |v: f64, lo: f64, n: usize| -> (usize, usize) {
            let a = libm::floor((v - radius - lo) / self.cell_size - 0.5);
            let b = libm::ceil((v + radius - lo) / self.cell_size - 0.5);
            let a = if a < 0.0 { 0 } else { a as usize };
            let b = if b < 0.0 { 0 } else { (b as usize).min(n - 1) };
            (a, b)
        };
        let (i0, i1) = idx(x, self.arena.x_min, self.nx);
        let (j0, j1) = idx(y, self.arena.y_min, self.ny);
        for j in j0..=j1 {
            for i in i0..=i1 {
                let (cx, cy) = self.cell_center(i, j);
                if (cx - x) * (cx - x) + (cy - y) * (cy - y) <= r2 {
                    self.set_visited(i, j);
                }
            }
        }
    }

    pub fn mark_pose(&mut self, pose: &Pose, footprint_radius: f64) {
        self.mark(pose.x, pose.y, footprint_radius);
    }

    pub fn coverage_fraction(&self) -> f64 {
        self.n_visited as f64 / self.total_cells() as f64
    }
}
