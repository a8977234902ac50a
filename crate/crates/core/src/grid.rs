//! Sampled transverse planes and the fields living on them.
//!
//! Grids are square with `n` samples per axis; index `i` sits at coordinate
//! `(i - n/2) * pitch`, so the DC sample of a centered transform is at `n/2`.
//! Field storage is row-major with rows along `y` and columns along `x`.

use std::f64::consts::TAU;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Domain {
    Position,
    Momentum,
}

impl Domain {
    pub fn toggled(self) -> Self {
        match self {
            Domain::Position => Domain::Momentum,
            Domain::Momentum => Domain::Position,
        }
    }
}

/// Square sampling grid. The conjugate pitch `2π/(n·pitch)` is computed once
/// at construction and swapped by [`Grid2D::conjugate`], which makes the
/// conjugation an exact involution.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Grid2D {
    n: usize,
    pitch: f64,
    conjugate_pitch: f64,
    domain: Domain,
}

impl Grid2D {
    pub fn new(n: usize, pitch: f64, domain: Domain) -> Result<Self> {
        if n < 2 || n % 2 != 0 {
            return invalid(format!("grid size must be even and >= 2, got {n}"));
        }
        if !(pitch.is_finite() && pitch > 0.0) {
            return invalid(format!("grid pitch must be positive, got {pitch}"));
        }
        Ok(Self {
            n,
            pitch,
            conjugate_pitch: TAU / (n as f64 * pitch),
            domain,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn pitch(&self) -> f64 {
        self.pitch
    }

    pub fn domain(&self) -> Domain {
        self.domain
    }

    pub fn extent(&self) -> f64 {
        self.n as f64 * self.pitch
    }

    pub fn center(&self) -> usize {
        self.n / 2
    }

    /// Number of samples, `n²`.
    pub fn len(&self) -> usize {
        self.n * self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn cell_area(&self) -> f64 {
        self.pitch * self.pitch
    }

    pub fn coord(&self, i: usize) -> f64 {
        (i as f64 - (self.n / 2) as f64) * self.pitch
    }

    /// Coordinates of every sample along one axis.
    pub fn axis(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.coord(i)).collect()
    }

    /// Fractional index of a coordinate (`n/2` at the origin).
    pub fn fractional_index(&self, x: f64) -> f64 {
        x / self.pitch + (self.n / 2) as f64
    }

    pub fn conjugate(&self) -> Grid2D {
        Grid2D {
            n: self.n,
            pitch: self.conjugate_pitch,
            conjugate_pitch: self.pitch,
            domain: self.domain.toggled(),
        }
    }

    /// Same grid with every pitch multiplied by `factor` in this domain.
    pub fn scaled(&self, factor: f64) -> Result<Grid2D> {
        Grid2D::new(self.n, self.pitch * factor, self.domain)
    }

    pub fn same_sampling(&self, other: &Grid2D) -> bool {
        self.n == other.n
            && self.domain == other.domain
            && (self.pitch - other.pitch).abs() <= 1e-12 * self.pitch
    }

    /// Radius `sqrt(x² + y²)` of sample `(row, col)`.
    pub fn radius(&self, row: usize, col: usize) -> f64 {
        self.coord(col).hypot(self.coord(row))
    }
}

/// `make_grid(n, extent, domain)`: `n` even and at least 8, pitch `extent/n`.
pub fn make_grid(n: usize, extent: f64, domain: Domain) -> Result<Grid2D> {
    if n < 8 || n % 2 != 0 {
        return invalid(format!("grid size must be even and >= 8, got {n}"));
    }
    if !(extent.is_finite() && extent > 0.0) {
        return invalid(format!("grid extent must be positive, got {extent}"));
    }
    Grid2D::new(n, extent / n as f64, domain)
}

pub fn conjugate_grid(g: &Grid2D) -> Grid2D {
    g.conjugate()
}

/// Far-field camera coordinates of a momentum grid behind a lens of focal
/// length `focal`: `x = focal·λ·q/(2π)`.
pub fn lens_map(qgrid: &Grid2D, focal: f64, wavelength: f64) -> Result<Grid2D> {
    if qgrid.domain() != Domain::Momentum {
        return invalid("lens_map expects a momentum-domain grid");
    }
    if !(focal > 0.0 && wavelength > 0.0) {
        return invalid("focal length and wavelength must be positive");
    }
    Grid2D::new(qgrid.n(), focal * wavelength * qgrid.pitch() / TAU, Domain::Position)
}

/// Inverse of [`lens_map`]: camera-plane position grid back to momenta.
pub fn lens_unmap(xgrid: &Grid2D, focal: f64, wavelength: f64) -> Result<Grid2D> {
    if xgrid.domain() != Domain::Position {
        return invalid("lens_unmap expects a position-domain grid");
    }
    if !(focal > 0.0 && wavelength > 0.0) {
        return invalid("focal length and wavelength must be positive");
    }
    Grid2D::new(xgrid.n(), TAU * xgrid.pitch() / (focal * wavelength), Domain::Momentum)
}

#[derive(Clone, Debug, PartialEq)]
pub struct ComplexField2D {
    grid: Grid2D,
    values: Vec<Complex64>,
}

impl ComplexField2D {
    pub fn new(grid: Grid2D, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid.len() {
            return invalid(format!(
                "field has {} values, grid needs {}",
                values.len(),
                grid.len()
            ));
        }
        Ok(Self { grid, values })
    }

    pub fn zeros(grid: Grid2D) -> Self {
        Self {
            grid,
            values: vec![Complex64::new(0.0, 0.0); grid.len()],
        }
    }

    /// Builds a field from a function of the physical coordinates `(x, y)`.
    pub fn from_fn(grid: Grid2D, mut f: impl FnMut(f64, f64) -> Complex64) -> Self {
        let n = grid.n();
        let mut values = Vec::with_capacity(grid.len());
        for row in 0..n {
            let y = grid.coord(row);
            for col in 0..n {
                values.push(f(grid.coord(col), y));
            }
        }
        Self { grid, values }
    }

    pub fn grid(&self) -> &Grid2D {
        &self.grid
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [Complex64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<Complex64> {
        self.values
    }

    pub fn at(&self, row: usize, col: usize) -> Complex64 {
        self.values[row * self.grid.n() + col]
    }

    /// `Σ|v|²·pitch²`.
    pub fn norm_sqr(&self) -> f64 {
        self.values.iter().map(|v| v.norm_sqr()).sum::<f64>() * self.grid.cell_area()
    }

    pub fn is_normalized(&self, tol: f64) -> bool {
        (self.norm_sqr() - 1.0).abs() <= tol
    }

    pub fn normalized(mut self) -> Result<Self> {
        let norm = self.norm_sqr();
        if !(norm > 0.0 && norm.is_finite()) {
            return Err(Error::InvalidArgument(
                "cannot normalize a field with zero or non-finite energy".into(),
            ));
        }
        let scale = 1.0 / norm.sqrt();
        self.values.iter_mut().for_each(|v| *v *= scale);
        Ok(self)
    }

    /// Re-labels the field with a grid of the same size.
    pub fn with_grid(mut self, grid: Grid2D) -> Result<Self> {
        if grid.n() != self.grid.n() {
            return invalid("replacement grid must have the same size");
        }
        self.grid = grid;
        Ok(self)
    }

    pub fn intensity(&self) -> RealField2D {
        RealField2D {
            grid: self.grid,
            values: self.values.iter().map(|v| v.norm_sqr()).collect(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RealField2D {
    grid: Grid2D,
    values: Vec<f64>,
}

impl RealField2D {
    pub fn new(grid: Grid2D, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return invalid(format!(
                "field has {} values, grid needs {}",
                values.len(),
                grid.len()
            ));
        }
        Ok(Self { grid, values })
    }

    pub fn from_fn(grid: Grid2D, mut f: impl FnMut(f64, f64) -> f64) -> Self {
        let n = grid.n();
        let mut values = Vec::with_capacity(grid.len());
        for row in 0..n {
            let y = grid.coord(row);
            for col in 0..n {
                values.push(f(grid.coord(col), y));
            }
        }
        Self { grid, values }
    }

    pub fn grid(&self) -> &Grid2D {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn at(&self, row: usize, col: usize) -> f64 {
        self.values[row * self.grid.n() + col]
    }

    pub fn sum(&self) -> f64 {
        self.values.iter().sum()
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Index `(row, col)` of the largest sample.
    pub fn argmax(&self) -> (usize, usize) {
        let n = self.grid.n();
        let mut best = 0;
        for (i, v) in self.values.iter().enumerate() {
            if *v > self.values[best] {
                best = i;
            }
        }
        (best / n, best % n)
    }

    /// Scaled copy summing to one.
    pub fn normalized_sum(&self) -> Result<Self> {
        let s = self.sum();
        if !(s > 0.0 && s.is_finite()) {
            return invalid("cannot normalize a field with non-positive sum");
        }
        Ok(Self {
            grid: self.grid,
            values: self.values.iter().map(|v| v / s).collect(),
        })
    }

    pub fn with_grid(mut self, grid: Grid2D) -> Result<Self> {
        if grid.n() != self.grid.n() {
            return invalid("replacement grid must have the same size");
        }
        self.grid = grid;
        Ok(self)
    }

    /// Azimuthal average in rings one pitch wide: `(radius, mean)` pairs.
    pub fn radial_profile(&self) -> Vec<(f64, f64)> {
        let n = self.grid.n();
        let nbins = n / 2 + 1;
        let mut sums = vec![0.0; nbins];
        let mut counts = vec![0usize; nbins];
        for row in 0..n {
            for col in 0..n {
                let bin = (self.grid.radius(row, col) / self.grid.pitch()).round() as usize;
                if bin < nbins {
                    sums[bin] += self.at(row, col);
                    counts[bin] += 1;
                }
            }
        }
        (0..nbins)
            .filter(|&b| counts[b] > 0)
            .map(|b| (b as f64 * self.grid.pitch(), sums[b] / counts[b] as f64))
            .collect()
    }
}
