//! Projections of the joint probability distribution `|Φ|²` and the imaging
//! geometry that puts them on a camera.
//!
//! All fast paths work on the camera lattice of [`TwoPhotonState`]; each has
//! an exact counterpart in [`brute_force_jpd`].

mod ridge;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::fft::{convolve_full, dft2_centered, Direction};
use crate::grid::{lens_map, ComplexField2D, Domain, Grid2D, RealField2D};
use crate::spdc::{parity_class, parity_sums, with_factors, TwoPhotonState};

pub use ridge::{ridge_extract, ridge_extract_with, Ridge, RidgeOptions, RidgeReport};

/// Largest grid for which [`brute_force_jpd`] materializes `n⁴` values.
pub const BRUTE_FORCE_MAX_N: usize = 16;

/// Distribution of the sum coordinate `q₁+q₂`, on the state's factor grid.
/// In the position representation the axis is `(x₁+x₂)/2`.
#[derive(Clone, Debug, PartialEq)]
pub struct SumProjection {
    pub field: RealField2D,
    pub normalized: bool,
}

/// `M(k_x1, k_x2)`: row index `k_x1`, column index `k_x2`.
#[derive(Clone, Debug, PartialEq)]
pub struct RowCorrelationMap {
    grid: Grid2D,
    values: Vec<f64>,
}

impl RowCorrelationMap {
    pub fn new(grid: Grid2D, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return invalid("row map size does not match its axis grid");
        }
        Ok(Self { grid, values })
    }

    /// Axis grid shared by `k_x1` and `k_x2`.
    pub fn grid(&self) -> &Grid2D {
        &self.grid
    }

    pub fn n(&self) -> usize {
        self.grid.n()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn at(&self, kx1: usize, kx2: usize) -> f64 {
        self.values[kx1 * self.n() + kx2]
    }

    pub fn to_field(&self) -> RealField2D {
        RealField2D::new(self.grid, self.values.clone()).expect("size checked on construction")
    }
}

fn normalize(values: Vec<f64>, grid: Grid2D) -> Result<RealField2D> {
    RealField2D::new(grid, values)?
        .normalized_sum()
        .map_err(|_| Error::Numerical("projection has no weight".into()))
}

/// `A(q₊) = Σ_{q₋}|Φ|²`, normalized to unit sum.
pub fn sum_projection(state: &TwoPhotonState) -> Result<SumProjection> {
    let n = state.n();
    let p = state.sum_intensity();
    let sc = parity_sums(&state.diff_intensity(), n);
    let mut out = Vec::with_capacity(n * n);
    for row in 0..n {
        for col in 0..n {
            out.push(p[row * n + col] * sc[parity_class(row, col)]);
        }
    }
    Ok(SumProjection {
        field: normalize(out, *state.vp().grid())?,
        normalized: true,
    })
}

/// `B(q₋) = Σ_{q₊}|Φ|²`, normalized to unit sum.
pub fn minus_projection(state: &TwoPhotonState) -> Result<RealField2D> {
    let n = state.n();
    let c = state.diff_intensity();
    let sp = parity_sums(&state.sum_intensity(), n);
    let mut out = Vec::with_capacity(n * n);
    for row in 0..n {
        for col in 0..n {
            out.push(c[row * n + col] * sp[parity_class(row, col)]);
        }
    }
    normalize(out, *state.vc().grid())
}

/// Unnormalized `Σ_{k_y1}|Φ((k_x1,k_y1),(k_x2,−k_y1))|²` in lattice units.
pub(crate) fn row_map_weights(state: &TwoPhotonState) -> Vec<f64> {
    let n = state.n();
    let h = n / 2;
    let p = state.sum_intensity();
    let c = state.diff_intensity();
    // the symmetric-row pairing fixes the sum row at n/2 and sends the
    // difference row through every index with the parity of n/2
    let mut g = vec![0.0; n];
    for dy in (h % 2..n).step_by(2) {
        for (dx, gv) in g.iter_mut().enumerate() {
            *gv += c[dy * n + dx];
        }
    }
    let mut m = vec![0.0; n * n];
    for i1 in 0..n {
        for i2 in 0..n {
            let a = i1 + i2;
            let d = i1 + h;
            if a < h || a - h >= n || d < i2 || d - i2 >= n {
                continue;
            }
            m[i1 * n + i2] = p[h * n + a - h] * g[d - i2];
        }
    }
    m
}

/// Coincidence map between symmetric camera rows, normalized to unit sum.
pub fn row_correlation_map(state: &TwoPhotonState) -> Result<RowCorrelationMap> {
    let grid = state.camera_grid();
    let m = normalize(row_map_weights(state), grid)?;
    RowCorrelationMap::new(grid, m.into_values())
}

/// Single-photon marginal `I(q₁) = Σ_{q₂}|Φ|²`, normalized. Along each axis
/// the pair `(a, d)` of factor indices satisfies `a + d = 2·i₁`, so the
/// marginal is the linear convolution of `|V_p|²` and `|V_c|²` sampled at
/// even indices.
pub fn intensity_marginal(state: &TwoPhotonState) -> Result<RealField2D> {
    let n = state.n();
    let conv = convolve_full(&state.sum_intensity(), &state.diff_intensity(), n);
    let w = 2 * n - 1;
    let mut out = Vec::with_capacity(n * n);
    for row in 0..n {
        for col in 0..n {
            out.push(conv[2 * row * w + 2 * col].max(0.0));
        }
    }
    normalize(out, state.camera_grid())
}

fn transform_factor(f: &ComplexField2D, direction: Direction) -> ComplexField2D {
    let mut out = dft2_centered(f, direction);
    let scale = f.grid().pitch() / out.grid().pitch();
    out.values_mut().iter_mut().for_each(|v| *v *= scale);
    out
}

/// Position representation `ψ(x₁,x₂) ∝ E_p((x₁+x₂)/2)·Ṽ_c((x₁−x₂)/2)`:
/// both factors are inverse transformed (norm preserving).
pub fn near_field_state(state: &TwoPhotonState) -> Result<TwoPhotonState> {
    if state.representation() != Domain::Momentum {
        return invalid("state is already in the position representation");
    }
    with_factors(
        state,
        transform_factor(state.vp(), Direction::Inverse),
        transform_factor(state.vc(), Direction::Inverse),
    )
}

/// Inverse of [`near_field_state`].
pub fn far_field_state(state: &TwoPhotonState) -> Result<TwoPhotonState> {
    if state.representation() != Domain::Position {
        return invalid("state is already in the momentum representation");
    }
    with_factors(
        state,
        transform_factor(state.vp(), Direction::Forward),
        transform_factor(state.vc(), Direction::Forward),
    )
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ImagingMode {
    /// 2f-2f imaging of the crystal plane, `f = d/4`.
    NearField,
    /// f-f Fourier imaging, `f = d/2`.
    FarField,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ImagingConfig {
    d: f64,
    mode: ImagingMode,
    wavelength_dc: f64,
}

impl ImagingConfig {
    pub fn new(d: f64, mode: ImagingMode, wavelength_dc: f64) -> Result<Self> {
        if !(d > 0.0 && d.is_finite()) {
            return invalid("crystal-to-sensor distance must be positive");
        }
        if !(wavelength_dc > 0.0 && wavelength_dc.is_finite()) {
            return invalid("down-converted wavelength must be positive");
        }
        Ok(Self {
            d,
            mode,
            wavelength_dc,
        })
    }

    pub fn d(&self) -> f64 {
        self.d
    }

    pub fn mode(&self) -> ImagingMode {
        self.mode
    }

    pub fn wavelength_dc(&self) -> f64 {
        self.wavelength_dc
    }

    pub fn focal(&self) -> f64 {
        match self.mode {
            ImagingMode::NearField => self.d / 4.0,
            ImagingMode::FarField => self.d / 2.0,
        }
    }
}

/// Relabels a projection in camera-plane metres. Far field maps momenta
/// through the `f = d/2` lens; near field images at magnification −1, so the
/// field is mirrored through the centre (the unpaired first row and column
/// have no mirror image and are dropped).
pub fn map_to_camera(field: &RealField2D, cfg: &ImagingConfig) -> Result<RealField2D> {
    let g = *field.grid();
    match cfg.mode {
        ImagingMode::FarField => {
            if g.domain() != Domain::Momentum {
                return invalid("far-field imaging needs a momentum-domain field");
            }
            field.clone().with_grid(lens_map(&g, cfg.focal(), cfg.wavelength_dc)?)
        }
        ImagingMode::NearField => {
            if g.domain() != Domain::Position {
                return invalid("near-field imaging needs a position-domain field");
            }
            let n = g.n();
            let mut out = vec![0.0; n * n];
            for row in 1..n {
                for col in 1..n {
                    out[row * n + col] = field.at(n - row, n - col);
                }
            }
            RealField2D::new(g, out)
        }
    }
}

/// `|Φ(q₁,q₂)|²·h⁴` on the full lattice, indexed
/// `((r1·n + c1)·n + r2)·n + c2`. Refuses grids above
/// [`BRUTE_FORCE_MAX_N`].
pub fn brute_force_jpd(state: &TwoPhotonState, n: usize) -> Result<Vec<f64>> {
    if n > BRUTE_FORCE_MAX_N {
        return Err(Error::InvalidArgument(format!(
            "brute-force JPD is limited to n <= {BRUTE_FORCE_MAX_N}, got {n}"
        )));
    }
    if n != state.n() {
        return invalid("requested size differs from the state grid");
    }
    let h4 = state.camera_grid().cell_area().powi(2);
    let mut out = Vec::with_capacity(n.pow(4));
    for r1 in 0..n {
        for c1 in 0..n {
            for r2 in 0..n {
                for c2 in 0..n {
                    let a: Complex64 = state.amplitude_at((r1, c1), (r2, c2));
                    out.push(a.norm_sqr() * h4);
                }
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests;
