//! Pump shaping: Gaussian envelope, SLM masks, 4f relay onto the crystal and
//! the pump angular spectrum.

mod mask;
mod tailor;

use std::f64::consts::FRAC_PI_2;

use num_complex::Complex64;

use crate::error::{invalid, Error, Result};
use crate::fft::{dft2_centered, Direction};
use crate::grid::{ComplexField2D, Domain, Grid2D};
use crate::special::{bessel_i_scaled, bessel_j, MAX_ORDER};

pub use mask::{
    axicon_mask, checkerboard_mask, flat_mask, fourier_ring_radius, random_mask,
    ring_amplitude, ring_fourier_bessel_mask, MaskKind, SlmMask,
};
pub use tailor::{tailor_pump_to_target, TailorResult};

const NORM_TOL: f64 = 1e-10;

/// Pump wavelength, Gaussian waist `w_g` and the crystal-plane grid.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PumpSpec {
    wavelength: f64,
    waist: f64,
    grid: Grid2D,
}

impl PumpSpec {
    pub fn new(wavelength: f64, waist: f64, grid: Grid2D) -> Result<Self> {
        if grid.domain() != Domain::Position {
            return invalid("pump grid must be in the position domain");
        }
        if !(wavelength > 0.0 && wavelength.is_finite()) {
            return invalid("pump wavelength must be positive");
        }
        if !(waist > 0.0 && waist.is_finite()) {
            return invalid("pump waist must be positive");
        }
        if waist < 4.0 * grid.pitch() {
            return invalid(format!(
                "pump waist {waist} is undersampled (needs at least 4 pixels of {})",
                grid.pitch()
            ));
        }
        Ok(Self {
            wavelength,
            waist,
            grid,
        })
    }

    /// Waist set to a quarter of the grid extent.
    pub fn with_default_waist(wavelength: f64, grid: Grid2D) -> Result<Self> {
        Self::new(wavelength, 0.25 * grid.extent(), grid)
    }

    pub fn wavelength(&self) -> f64 {
        self.wavelength
    }

    pub fn waist(&self) -> f64 {
        self.waist
    }

    pub fn grid(&self) -> &Grid2D {
        &self.grid
    }
}

/// Normalized pump field at the crystal front plane.
#[derive(Clone, Debug, PartialEq)]
pub struct PumpField(ComplexField2D);

impl PumpField {
    pub fn new(field: ComplexField2D) -> Result<Self> {
        if field.grid().domain() != Domain::Position {
            return invalid("pump field must be in the position domain");
        }
        if !field.is_normalized(NORM_TOL) {
            return invalid("pump field is not normalized");
        }
        Ok(Self(field))
    }

    pub fn field(&self) -> &ComplexField2D {
        &self.0
    }

    pub fn into_field(self) -> ComplexField2D {
        self.0
    }
}

/// Normalized pump angular spectrum `V_p` on the momentum grid.
#[derive(Clone, Debug, PartialEq)]
pub struct PumpAngularSpectrum(ComplexField2D);

impl PumpAngularSpectrum {
    pub fn new(field: ComplexField2D) -> Result<Self> {
        if field.grid().domain() != Domain::Momentum {
            return invalid("angular spectrum must be in the momentum domain");
        }
        if !field.is_normalized(NORM_TOL) {
            return invalid("angular spectrum is not normalized");
        }
        Ok(Self(field))
    }

    pub fn field(&self) -> &ComplexField2D {
        &self.0
    }

    pub fn into_field(self) -> ComplexField2D {
        self.0
    }
}

/// Normalized `exp(-r²/w_g²)`.
pub fn gaussian_envelope(spec: &PumpSpec) -> Result<ComplexField2D> {
    let w2 = spec.waist * spec.waist;
    ComplexField2D::from_fn(spec.grid, |x, y| {
        Complex64::new((-(x * x + y * y) / w2).exp(), 0.0)
    })
    .normalized()
}

/// `env·exp(i·phase)`, renormalized: ideal unit-magnification imaging of the
/// SLM onto the crystal.
pub fn apply_mask(env: &ComplexField2D, mask: &SlmMask) -> Result<PumpField> {
    if env.grid() != mask.grid() {
        return invalid("envelope and mask grids differ");
    }
    let values = env
        .values()
        .iter()
        .zip(mask.phase())
        .map(|(v, p)| v * Complex64::from_polar(1.0, *p))
        .collect();
    PumpField::new(ComplexField2D::new(*env.grid(), values)?.normalized()?)
}

/// First diffraction order of a field carrying a blazed carrier of
/// `carrier_period` pixels along x: the spectrum is recentred on the carrier
/// and an iris of radius `n/(2·period)` bins keeps only that order.
/// The result is not renormalized.
pub fn first_order(field: &ComplexField2D, carrier_period: usize) -> Result<ComplexField2D> {
    let n = field.grid().n();
    if carrier_period < 3 || n % carrier_period != 0 {
        return invalid("carrier period must be >= 3 and divide the grid size");
    }
    let shift = n / carrier_period;
    let iris = (n as f64 / (2.0 * carrier_period as f64)).powi(2);
    let spectrum = dft2_centered(field, Direction::Forward);
    let c = n / 2;
    let mut selected = ComplexField2D::zeros(*spectrum.grid());
    for row in 0..n {
        for col in 0..n {
            let dr = row as f64 - c as f64;
            let dc = col as f64 - c as f64;
            if dr * dr + dc * dc <= iris {
                selected.values_mut()[row * n + col] = spectrum.at(row, (col + shift) % n);
            }
        }
    }
    dft2_centered(&selected, Direction::Inverse).with_grid(*field.grid())
}

/// Crystal-plane pump for a mask viewed through the 4f relay. Masks that rely
/// on a carrier (ring holograms) get first-order selection in the Fourier
/// plane; all others are imaged directly.
pub fn relay_to_crystal(env: &ComplexField2D, mask: &SlmMask) -> Result<PumpField> {
    let imaged = apply_mask(env, mask)?;
    match mask.carrier_period() {
        None => Ok(imaged),
        Some(period) => {
            let field = first_order(imaged.field(), period)?;
            PumpField::new(field.normalized()?)
        }
    }
}

/// Normalized `V_p`: forward DFT scaled by `Δx/Δq`.
pub fn pump_angular_spectrum(p: &PumpField) -> Result<PumpAngularSpectrum> {
    let spectrum = dft2_centered(p.field(), Direction::Forward);
    PumpAngularSpectrum::new(spectrum.normalized()?)
}

fn check_bg_params(l: u32, k_r: f64, w_g: f64) -> Result<()> {
    if l > MAX_ORDER {
        return invalid(format!("Bessel-Gauss order {l} exceeds {MAX_ORDER}"));
    }
    if !(k_r >= 0.0 && k_r.is_finite()) || !(w_g > 0.0 && w_g.is_finite()) {
        return invalid("k_r must be >= 0 and w_g > 0");
    }
    Ok(())
}

/// Normalized Bessel-Gauss field `J_l(k_r r)·e^{ilφ}·exp(-r²/w_g²)` on the
/// pump grid.
pub fn bessel_gauss_field(spec: &PumpSpec, l: u32, k_r: f64) -> Result<PumpField> {
    check_bg_params(l, k_r, spec.waist)?;
    let w2 = spec.waist * spec.waist;
    let grid = spec.grid;
    let n = grid.n();
    let mut values = Vec::with_capacity(grid.len());
    for row in 0..n {
        let y = grid.coord(row);
        for col in 0..n {
            let x = grid.coord(col);
            let r = x.hypot(y);
            let radial = bessel_j(l, k_r * r)? * (-r * r / w2).exp();
            values.push(Complex64::from_polar(radial, l as f64 * y.atan2(x)));
        }
    }
    PumpField::new(ComplexField2D::new(grid, values)?.normalized()?)
}

/// Closed-form angular spectrum of the Bessel-Gauss beam, normalized:
/// `(-i)^l e^{ilφ_q} exp(-(q²+k_r²)w_g²/4) I_l(k_r q w_g²/2)`.
pub fn bg_angular_spectrum_analytic(
    qgrid: &Grid2D,
    l: u32,
    k_r: f64,
    w_g: f64,
) -> Result<ComplexField2D> {
    if qgrid.domain() != Domain::Momentum {
        return invalid("analytic spectrum needs a momentum grid");
    }
    check_bg_params(l, k_r, w_g)?;
    let w2 = w_g * w_g;
    let global = Complex64::from_polar(1.0, -FRAC_PI_2 * l as f64);
    let n = qgrid.n();
    let mut values = Vec::with_capacity(qgrid.len());
    for row in 0..n {
        let qy = qgrid.coord(row);
        for col in 0..n {
            let qx = qgrid.coord(col);
            let q = qx.hypot(qy);
            let d = q - k_r;
            // exp(-(q²+k_r²)w²/4)·I_l(x) = exp(-(q-k_r)²w²/4)·e^{-x}I_l(x)
            let radial = (-d * d * w2 / 4.0).exp() * bessel_i_scaled(l, k_r * q * w2 / 2.0)?;
            values.push(global * Complex64::from_polar(radial, l as f64 * qy.atan2(qx)));
        }
    }
    let field = ComplexField2D::new(*qgrid, values)?;
    if field.norm_sqr() == 0.0 {
        return Err(Error::Numerical(
            "analytic Bessel-Gauss spectrum vanishes on this grid".into(),
        ));
    }
    field.normalized()
}
