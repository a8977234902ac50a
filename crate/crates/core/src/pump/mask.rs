//! Phase masks displayed on the SLM.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::fft::{dft2_centered, Direction};
use crate::grid::{ComplexField2D, Domain, Grid2D};
use crate::rng;

/// Mask family together with the parameters it was generated from.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MaskKind {
    Flat,
    /// Conical phase `-k_r·r`.
    Axicon { k_r: f64 },
    Checkerboard { tile_size: usize, depth: f64 },
    Random { seed: u64, correlation_length: f64 },
    /// Annulus of the given radius and 1/e half-width (metres), amplitude
    /// encoded on a blazed carrier of `carrier_period` pixels along x.
    RingFourierBessel {
        radius: f64,
        width: f64,
        carrier_period: usize,
    },
    Custom,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SlmMask {
    grid: Grid2D,
    phase: Vec<f64>,
    kind: MaskKind,
}

fn wrap_phase(p: f64) -> f64 {
    let w = p.rem_euclid(TAU);
    if w >= TAU {
        0.0
    } else {
        w
    }
}

fn check_position_grid(grid: &Grid2D) -> Result<()> {
    if grid.domain() != Domain::Position {
        return invalid("SLM masks live on a position-domain grid");
    }
    Ok(())
}

impl SlmMask {
    /// Mask from arbitrary phases; values are wrapped into `[0, 2π)`.
    pub fn custom(grid: Grid2D, phase: Vec<f64>) -> Result<Self> {
        check_position_grid(&grid)?;
        if phase.len() != grid.len() {
            return invalid("mask size does not match grid");
        }
        if phase.iter().any(|p| !p.is_finite()) {
            return invalid("mask phases must be finite");
        }
        Ok(Self {
            grid,
            phase: phase.into_iter().map(wrap_phase).collect(),
            kind: MaskKind::Custom,
        })
    }

    pub fn grid(&self) -> &Grid2D {
        &self.grid
    }

    pub fn phase(&self) -> &[f64] {
        &self.phase
    }

    pub fn kind(&self) -> &MaskKind {
        &self.kind
    }

    /// Carrier period in pixels when the mask relies on first-order selection.
    pub fn carrier_period(&self) -> Option<usize> {
        match self.kind {
            MaskKind::RingFourierBessel { carrier_period, .. } => Some(carrier_period),
            _ => None,
        }
    }

    fn from_fn(grid: Grid2D, kind: MaskKind, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let n = grid.n();
        let mut phase = Vec::with_capacity(grid.len());
        for row in 0..n {
            for col in 0..n {
                phase.push(wrap_phase(f(row, col)));
            }
        }
        Self { grid, phase, kind }
    }
}

pub fn flat_mask(grid: &Grid2D) -> Result<SlmMask> {
    check_position_grid(grid)?;
    Ok(SlmMask::from_fn(*grid, MaskKind::Flat, |_, _| 0.0))
}

/// `phase(r) = (-k_r·r) mod 2π`, with `k_r` below the grid Nyquist limit.
pub fn axicon_mask(grid: &Grid2D, k_r: f64) -> Result<SlmMask> {
    check_position_grid(grid)?;
    if !(k_r >= 0.0 && k_r.is_finite()) {
        return invalid("axicon k_r must be finite and non-negative");
    }
    if k_r >= PI / grid.pitch() {
        return invalid(format!(
            "axicon k_r = {k_r} exceeds the Nyquist limit {}",
            PI / grid.pitch()
        ));
    }
    Ok(SlmMask::from_fn(*grid, MaskKind::Axicon { k_r }, |row, col| {
        -k_r * grid.radius(row, col)
    }))
}

/// Square tiles of `tile_size` pixels alternating between phase 0 and `depth`.
pub fn checkerboard_mask(grid: &Grid2D, tile_size: usize, depth: f64) -> Result<SlmMask> {
    check_position_grid(grid)?;
    if tile_size == 0 {
        return invalid("checkerboard tile size must be at least one pixel");
    }
    if !(0.0..TAU).contains(&depth) {
        return invalid("checkerboard depth must lie in [0, 2π)");
    }
    Ok(SlmMask::from_fn(
        *grid,
        MaskKind::Checkerboard { tile_size, depth },
        |row, col| {
            if (row / tile_size + col / tile_size) % 2 == 1 {
                depth
            } else {
                0.0
            }
        },
    ))
}

/// Smoothed random phase. Independent uniform phases (counter-based, keyed by
/// seed and pixel index) are turned into unit phasors, low-pass filtered with
/// a Gaussian kernel `exp(-r²/s²)`, `s = ℓ/√2`, and the argument is kept.
pub fn random_mask(grid: &Grid2D, seed: u64, correlation_length: f64) -> Result<SlmMask> {
    check_position_grid(grid)?;
    if !(correlation_length >= grid.pitch() && correlation_length.is_finite()) {
        return invalid("correlation length must be at least one pixel pitch");
    }
    let n = grid.n();
    let mut values = Vec::with_capacity(grid.len());
    for row in 0..n {
        let mut r = rng::at_index(seed, (row * n) as u64);
        for _ in 0..n {
            let theta = TAU * rng::unit_f64(&mut r);
            values.push(Complex64::from_polar(1.0, theta));
        }
    }
    let phasors = ComplexField2D::new(*grid, values)?;
    let mut spectrum = dft2_centered(&phasors, Direction::Forward);
    let s = correlation_length / std::f64::consts::SQRT_2;
    let qgrid = *spectrum.grid();
    for row in 0..n {
        for col in 0..n {
            let q2 = qgrid.coord(row).powi(2) + qgrid.coord(col).powi(2);
            spectrum.values_mut()[row * n + col] *= (-q2 * s * s / 4.0).exp();
        }
    }
    let smooth = dft2_centered(&spectrum, Direction::Inverse);
    Ok(SlmMask::from_fn(
        *grid,
        MaskKind::Random {
            seed,
            correlation_length,
        },
        |row, col| smooth.at(row, col).arg(),
    ))
}

/// Radius of the annulus whose Fourier transform through a lens of focal
/// length `focal` is a Bessel beam of radial wavenumber `k_r`.
pub fn fourier_ring_radius(k_r: f64, focal: f64, wavelength: f64) -> f64 {
    k_r * focal / (TAU / wavelength)
}

/// `sin(πx)/(πx)`.
fn sinc_pi(x: f64) -> f64 {
    crate::special::sinc(PI * x)
}

/// Grating depth `M ∈ [0, 1]` whose first diffraction order has amplitude `a`:
/// `sinc_pi(1 - M) = a`.
pub(crate) fn encoding_depth(a: f64) -> f64 {
    let a = a.clamp(0.0, 1.0);
    if a == 1.0 {
        return 1.0;
    }
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if sinc_pi(1.0 - mid) < a {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Target annulus amplitude `exp(-(r - radius)²/width²)`.
pub fn ring_amplitude(radius: f64, width: f64, r: f64) -> f64 {
    let d = (r - radius) / width;
    (-d * d).exp()
}

/// Phase-only hologram of an annulus at the SLM plane.
///
/// The depth of a blazed grating is modulated so that its first order carries
/// the ring amplitude; the residual phase `π(M - 1)` of that order is
/// pre-compensated. The 4f relay selects the first order (see
/// [`crate::pump::relay_to_crystal`]), so the crystal sees the annulus and the
/// pump angular spectrum is Bessel-like.
pub fn ring_fourier_bessel_mask(
    grid: &Grid2D,
    radius: f64,
    width: f64,
    carrier_period: usize,
) -> Result<SlmMask> {
    check_position_grid(grid)?;
    if !(radius >= 0.0 && radius.is_finite()) || !(width > 0.0 && width.is_finite()) {
        return invalid("ring radius must be >= 0 and width > 0");
    }
    if carrier_period < 3 || grid.n() % carrier_period != 0 {
        return invalid(format!(
            "carrier period {carrier_period} must be >= 3 pixels and divide the grid size {}",
            grid.n()
        ));
    }
    if radius > 0.5 * grid.extent() {
        return invalid("ring radius does not fit on the grid");
    }
    if width < grid.pitch() {
        return invalid("ring width must be at least one pixel pitch");
    }
    let c = grid.center() as f64;
    Ok(SlmMask::from_fn(
        *grid,
        MaskKind::RingFourierBessel {
            radius,
            width,
            carrier_period,
        },
        |row, col| {
            let depth = encoding_depth(ring_amplitude(radius, width, grid.radius(row, col)));
            let carrier = TAU * (col as f64 - c) / carrier_period as f64;
            let phase = PI * (1.0 - depth) + carrier;
            depth * phase.rem_euclid(TAU)
        },
    ))
}
