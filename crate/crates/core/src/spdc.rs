//! The two-photon state `Φ(q₁,q₂) = V_p(q₁+q₂)·V_c(q₁−q₂)`.
//!
//! Both factors are sampled on one `n × n` grid of pitch `p`. On the camera
//! lattice (pitch `h`) index `i₁`, `i₂` addresses the sum factor at
//! `i₁+i₂−n/2` and the difference factor at `i₁−i₂+n/2`, per axis; samples
//! outside the window are zero. In the momentum representation `h = p`. In
//! the position representation the factors are functions of `(x₁+x₂)/2` and
//! `(x₁−x₂)/2`, so `h = 2p`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::grid::{ComplexField2D, Domain, Grid2D};
use crate::pump::PumpAngularSpectrum;
use crate::special::{bessel_i_scaled, sinc};

/// Width constant of the Gaussian phase-matching approximation.
pub const GAUSS_WIDTH_FACTOR: f64 = 0.257;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PhaseMatching {
    Sinc,
    #[default]
    Gauss,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CrystalSpec {
    /// Crystal length `L` in metres.
    pub length: f64,
    pub wavelength_pump: f64,
    #[serde(default = "default_index")]
    pub refractive_index: f64,
    #[serde(default)]
    pub model: PhaseMatching,
}

fn default_index() -> f64 {
    1.0
}

impl Default for CrystalSpec {
    fn default() -> Self {
        Self {
            length: 2e-3,
            wavelength_pump: 405e-9,
            refractive_index: 1.0,
            model: PhaseMatching::Gauss,
        }
    }
}

impl CrystalSpec {
    pub fn new(length: f64, wavelength_pump: f64, model: PhaseMatching) -> Result<Self> {
        let c = Self {
            length,
            wavelength_pump,
            refractive_index: 1.0,
            model,
        };
        c.validate()?;
        Ok(c)
    }

    pub fn with_refractive_index(mut self, n_p: f64) -> Result<Self> {
        self.refractive_index = n_p;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.length > 0.0 && self.length.is_finite()) {
            return invalid("crystal length must be positive");
        }
        if !(self.wavelength_pump > 0.0 && self.wavelength_pump.is_finite()) {
            return invalid("pump wavelength must be positive");
        }
        if !(self.refractive_index >= 1.0 && self.refractive_index.is_finite()) {
            return invalid("refractive index must be >= 1");
        }
        Ok(())
    }

    /// Pump wavenumber `K = 2π n_p/λ_p`.
    pub fn k(&self) -> f64 {
        std::f64::consts::TAU * self.refractive_index / self.wavelength_pump
    }

    /// `δ = 0.257·sqrt(L/4K)`.
    pub fn delta(&self) -> f64 {
        GAUSS_WIDTH_FACTOR * (self.length / (4.0 * self.k())).sqrt()
    }

    /// `V_c(|q|)` for this crystal's model.
    pub fn phase_matching(&self, q: f64) -> f64 {
        match self.model {
            PhaseMatching::Sinc => sinc_value(self, q),
            PhaseMatching::Gauss => gauss_value(self, q),
        }
    }
}

fn sinc_value(c: &CrystalSpec, q: f64) -> f64 {
    let k = c.k();
    std::f64::consts::FRAC_1_PI * (2.0 * c.length / k).sqrt() * sinc(c.length * q * q / (4.0 * k))
}

fn gauss_value(c: &CrystalSpec, q: f64) -> f64 {
    let d = c.delta();
    d * (-d * d * q * q / 2.0).exp()
}

/// `(1/π)·sqrt(2L/K)·sinc(L|q|²/4K)` for each magnitude in `q`.
pub fn phase_matching_sinc(q: &[f64], crystal: &CrystalSpec) -> Vec<f64> {
    q.iter().map(|&q| sinc_value(crystal, q)).collect()
}

/// `δ·exp(−δ²|q|²/2)` for each magnitude in `q`.
pub fn phase_matching_gauss(q: &[f64], crystal: &CrystalSpec) -> Vec<f64> {
    q.iter().map(|&q| gauss_value(crystal, q)).collect()
}

/// Separable two-photon state; immutable once built.
#[derive(Clone, Debug, PartialEq)]
pub struct TwoPhotonState {
    sum: ComplexField2D,
    diff: ComplexField2D,
    crystal: CrystalSpec,
    norm: f64,
}

/// Sums of `|f|²` over the four index-parity classes `(row % 2, col % 2)`.
pub(crate) fn parity_sums(values: &[f64], n: usize) -> [f64; 4] {
    let mut s = [0.0; 4];
    for row in 0..n {
        for col in 0..n {
            s[(row % 2) * 2 + col % 2] += values[row * n + col];
        }
    }
    s
}

pub(crate) fn parity_class(row: usize, col: usize) -> usize {
    (row % 2) * 2 + col % 2
}

impl TwoPhotonState {
    fn from_factors(sum: ComplexField2D, diff: ComplexField2D, crystal: CrystalSpec) -> Result<Self> {
        if !sum.grid().same_sampling(diff.grid()) {
            return invalid("sum and difference factors must share a grid");
        }
        let mut state = Self {
            sum,
            diff,
            crystal,
            norm: 1.0,
        };
        let n = state.n();
        let sp = parity_sums(&state.sum_intensity(), n);
        let sc = parity_sums(&state.diff_intensity(), n);
        let overlap: f64 = sp.iter().zip(&sc).map(|(a, b)| a * b).sum();
        let h2 = state.camera_grid().cell_area();
        if !(overlap > 0.0 && overlap.is_finite()) {
            return invalid("state has no support on the camera lattice");
        }
        state.norm = 1.0 / (h2 * overlap.sqrt());
        Ok(state)
    }

    pub fn n(&self) -> usize {
        self.sum.grid().n()
    }

    pub fn representation(&self) -> Domain {
        self.sum.grid().domain()
    }

    /// Sum-coordinate factor (`V_p`, or the pump near field in the position
    /// representation).
    pub fn vp(&self) -> &ComplexField2D {
        &self.sum
    }

    /// Difference-coordinate factor.
    pub fn vc(&self) -> &ComplexField2D {
        &self.diff
    }

    pub fn crystal(&self) -> &CrystalSpec {
        &self.crystal
    }

    pub fn norm_constant(&self) -> f64 {
        self.norm
    }

    /// Grid of the single-photon coordinates `q₁`, `q₂` (or `x₁`, `x₂`).
    pub fn camera_grid(&self) -> Grid2D {
        let g = *self.sum.grid();
        match g.domain() {
            Domain::Momentum => g,
            Domain::Position => g.scaled(2.0).expect("positive pitch"),
        }
    }

    fn scale(&self) -> f64 {
        match self.representation() {
            Domain::Momentum => 1.0,
            Domain::Position => 0.5,
        }
    }

    pub(crate) fn sum_intensity(&self) -> Vec<f64> {
        self.sum.values().iter().map(|v| v.norm_sqr()).collect()
    }

    pub(crate) fn diff_intensity(&self) -> Vec<f64> {
        self.diff.values().iter().map(|v| v.norm_sqr()).collect()
    }

    /// `Φ` at camera lattice indices `(row, col)`; zero where either factor
    /// index leaves the window.
    pub fn amplitude_at(&self, i1: (usize, usize), i2: (usize, usize)) -> Complex64 {
        let n = self.n() as isize;
        let h = n / 2;
        let a = (i1.0 as isize + i2.0 as isize - h, i1.1 as isize + i2.1 as isize - h);
        let d = (i1.0 as isize - i2.0 as isize + h, i1.1 as isize - i2.1 as isize + h);
        let inside = |v: (isize, isize)| v.0 >= 0 && v.0 < n && v.1 >= 0 && v.1 < n;
        if !inside(a) || !inside(d) {
            return Complex64::new(0.0, 0.0);
        }
        self.sum.at(a.0 as usize, a.1 as usize) * self.diff.at(d.0 as usize, d.1 as usize) * self.norm
    }
}

/// Builds the momentum-representation state with `V_c` sampled on the grid
/// of `vp`. The unpaired edge row and column of `V_c` (index 0, whose mirror
/// image lies outside the window) are zeroed so that exchange symmetry is
/// exact on the lattice.
pub fn build_state(vp: &PumpAngularSpectrum, crystal: CrystalSpec) -> Result<TwoPhotonState> {
    crystal.validate()?;
    let grid = *vp.field().grid();
    if vp.field().values().iter().all(|v| v.norm_sqr() == 0.0) {
        return invalid("pump angular spectrum is identically zero");
    }
    let n = grid.n();
    let mut diff = Vec::with_capacity(grid.len());
    for row in 0..n {
        for col in 0..n {
            let v = if row == 0 || col == 0 {
                0.0
            } else {
                crystal.phase_matching(grid.radius(row, col))
            };
            diff.push(Complex64::new(v, 0.0));
        }
    }
    let diff = ComplexField2D::new(grid, diff)?;
    TwoPhotonState::from_factors(vp.field().clone(), diff, crystal)
}

pub(crate) fn with_factors(
    state: &TwoPhotonState,
    sum: ComplexField2D,
    diff: ComplexField2D,
) -> Result<TwoPhotonState> {
    TwoPhotonState::from_factors(sum, diff, state.crystal)
}

fn bilinear(field: &ComplexField2D, x: f64, y: f64) -> Result<Complex64> {
    let g = field.grid();
    let snap = |t: f64| {
        let r = t.round();
        if (t - r).abs() < 1e-9 {
            r
        } else {
            t
        }
    };
    let fx = snap(g.fractional_index(x));
    let fy = snap(g.fractional_index(y));
    let last = (g.n() - 1) as f64;
    if !(0.0..=last).contains(&fx) || !(0.0..=last).contains(&fy) {
        return Err(Error::Range(format!("({x}, {y}) lies outside the sampled window")));
    }
    let (c0, r0) = (fx.floor() as usize, fy.floor() as usize);
    let (c1, r1) = ((c0 + 1).min(g.n() - 1), (r0 + 1).min(g.n() - 1));
    let (tx, ty) = (fx - c0 as f64, fy - r0 as f64);
    Ok(field.at(r0, c0) * (1.0 - tx) * (1.0 - ty)
        + field.at(r0, c1) * tx * (1.0 - ty)
        + field.at(r1, c0) * (1.0 - tx) * ty
        + field.at(r1, c1) * tx * ty)
}

/// `Φ(q₁,q₂)` at arbitrary `(x, y)` coordinate pairs, bilinearly interpolated
/// in each factor. Exact at lattice points.
pub fn evaluate_amplitude(state: &TwoPhotonState, q1: (f64, f64), q2: (f64, f64)) -> Result<Complex64> {
    let s = state.scale();
    let p = bilinear(&state.sum, (q1.0 + q2.0) * s, (q1.1 + q2.1) * s)?;
    let c = bilinear(&state.diff, (q1.0 - q2.0) * s, (q1.1 - q2.1) * s)?;
    Ok(p * c * state.norm)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AnalyticBgParams {
    pub k_r: f64,
    pub w_g: f64,
    pub delta: f64,
    pub l: u32,
}

/// Closed-form Bessel-Gauss state (unnormalized):
/// `(w_g²/2)·exp(−(|q₊|²+k_r²)w_g²/4)·I₀(k_r|q₊|w_g²/2)·δ·exp(−δ²|q₋|²/2)`.
pub fn analytic_bg_state(p: &AnalyticBgParams, q1: (f64, f64), q2: (f64, f64)) -> Result<Complex64> {
    if p.l != 0 {
        return Err(Error::Unsupported(format!(
            "closed-form two-photon state exists for l = 0 only, got {}",
            p.l
        )));
    }
    if !(p.k_r >= 0.0 && p.w_g > 0.0 && p.delta > 0.0) {
        return invalid("k_r must be >= 0, w_g and delta > 0");
    }
    let qp = (q1.0 + q2.0).hypot(q1.1 + q2.1);
    let qm = (q1.0 - q2.0).hypot(q1.1 - q2.1);
    let w2 = p.w_g * p.w_g;
    let d = qp - p.k_r;
    let pump = 0.5 * w2 * (-d * d * w2 / 4.0).exp() * bessel_i_scaled(0, p.k_r * qp * w2 / 2.0)?;
    let pm = p.delta * (-p.delta * p.delta * qm * qm / 2.0).exp();
    Ok(Complex64::new(pump * pm, 0.0))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct KernelDiagnostics {
    /// Fraction of pump spectral energy at sum coordinates where the
    /// phase-matching factor has dropped below 1% of its peak.
    pub filtered_fraction: f64,
    pub observable: bool,
}

/// Whether pump modulations survive the phase-matching filter. A sum
/// coordinate `q₊` is taken with its conjugate difference coordinate
/// `q₋ = q₊` (one photon on axis); it is filtered when `|V_c(|q₊|)|` is below
/// 1% of `|V_c(0)|`.
pub fn kernel_check(vp: &PumpAngularSpectrum, crystal: &CrystalSpec) -> Result<KernelDiagnostics> {
    crystal.validate()?;
    let g = vp.field().grid();
    let n = g.n();
    let peak = crystal.phase_matching(0.0).abs();
    let mut filtered = 0.0;
    let mut total = 0.0;
    for row in 0..n {
        for col in 0..n {
            let e = vp.field().at(row, col).norm_sqr();
            total += e;
            if crystal.phase_matching(g.radius(row, col)).abs() < 0.01 * peak {
                filtered += e;
            }
        }
    }
    let filtered_fraction = filtered / total;
    Ok(KernelDiagnostics {
        filtered_fraction,
        observable: filtered_fraction < 0.5,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::make_grid;
    use crate::pump::{
        bessel_gauss_field, gaussian_envelope, pump_angular_spectrum, PumpField, PumpSpec,
    };
    use proptest::prelude::*;

    fn gaussian_vp(n: usize, extent: f64) -> PumpAngularSpectrum {
        let g = make_grid(n, extent, Domain::Position).unwrap();
        let spec = PumpSpec::with_default_waist(405e-9, g).unwrap();
        let p = PumpField::new(gaussian_envelope(&spec).unwrap()).unwrap();
        pump_angular_spectrum(&p).unwrap()
    }

    #[test]
    fn sinc_model_values() {
        let c = CrystalSpec::new(2e-3, 405e-9, PhaseMatching::Sinc).unwrap();
        let k = c.k();
        assert!((k - 1.5514e7).abs() < 1e3);
        let v0 = phase_matching_sinc(&[0.0], &c)[0];
        assert!((v0 - (2.0 * c.length / k).sqrt() / std::f64::consts::PI).abs() < 1e-20);
        // first zero: independent bisection on the sinc argument
        let f = |q: f64| (c.length * q * q / (4.0 * k)).sin();
        let (mut a, mut b) = (2.5e5, 3.5e5);
        for _ in 0..100 {
            let m = 0.5 * (a + b);
            if f(a) * f(m) <= 0.0 {
                b = m;
            } else {
                a = m;
            }
        }
        let root = 0.5 * (a + b);
        assert!((root - 3.122e5).abs() < 1e2, "root {root}");
        assert!((root - (4.0 * std::f64::consts::PI * k / c.length).sqrt()).abs() < 1e-6);
        assert!(phase_matching_sinc(&[root], &c)[0].abs() < 1e-12 * v0);
    }

    #[test]
    fn gauss_model_values() {
        let c = CrystalSpec::default();
        let d = c.delta();
        assert_eq!(phase_matching_gauss(&[0.0], &c)[0], d);
        let v = phase_matching_gauss(&[1.0 / d], &c)[0];
        assert!((v - d * (-0.5f64).exp()).abs() < 1e-15 * d);
        let long = CrystalSpec { length: 4e-3, ..c };
        assert!((long.delta() / d - std::f64::consts::SQRT_2).abs() < 1e-15);
    }

    #[test]
    fn gauss_and_sinc_agree_near_axis() {
        // relative deviation shrinks as the evaluation region shrinks
        let s = CrystalSpec::new(2e-3, 405e-9, PhaseMatching::Sinc).unwrap();
        let g = CrystalSpec { model: PhaseMatching::Gauss, ..s };
        let first_zero = (4.0 * std::f64::consts::PI * s.k() / s.length).sqrt();
        let dev = |frac: f64| {
            let q = frac * first_zero;
            let a = s.phase_matching(q) / s.phase_matching(0.0);
            let b = g.phase_matching(q) / g.phase_matching(0.0);
            (a - b).abs()
        };
        assert!(dev(0.01) < dev(0.05));
        assert!(dev(0.05) < dev(0.2));
        assert!(dev(0.01) < 1e-3);
    }

    #[test]
    fn best_gauss_width_factor_scan() {
        // Normalized 1D L2 distance between the sinc main lobe and Gaussians
        // of width c·δ. The minimum sits near c = 3.6; the distance still
        // decreases through c = 0.9, 1, 1.1.
        let k = 1.0;
        let l = 4.0;
        let zero = (4.0 * std::f64::consts::PI * k / l).sqrt();
        let m = 4000;
        let qs: Vec<f64> = (0..=m).map(|i| zero * i as f64 / m as f64).collect();
        let target: Vec<f64> = qs.iter().map(|q| sinc(l * q * q / (4.0 * k))).collect();
        let dist = |c: f64| {
            let d = c * GAUSS_WIDTH_FACTOR * (l / (4.0 * k)).sqrt();
            let g: Vec<f64> = qs.iter().map(|q| (-d * d * q * q / 2.0).exp()).collect();
            let na = target.iter().map(|v| v * v).sum::<f64>().sqrt();
            let nb = g.iter().map(|v| v * v).sum::<f64>().sqrt();
            target
                .iter()
                .zip(&g)
                .map(|(a, b)| (a / na - b / nb).powi(2))
                .sum::<f64>()
                .sqrt()
        };
        let mut best = (0.0, f64::INFINITY);
        for i in 100..800 {
            let c = i as f64 * 0.01;
            let e = dist(c);
            if e < best.1 {
                best = (c, e);
            }
        }
        assert!((best.0 - 3.62).abs() < 0.05, "optimum {}", best.0);
        assert!(dist(1.1) < dist(1.0) && dist(1.0) < dist(0.9));
    }

    #[test]
    fn crystal_validation() {
        assert!(CrystalSpec::new(0.0, 405e-9, PhaseMatching::Gauss).is_err());
        assert!(CrystalSpec::default().with_refractive_index(0.5).is_err());
        let json = r#"{"length": 0.002, "wavelength_pump": 4.05e-7}"#;
        let c: CrystalSpec = serde_json::from_str(json).unwrap();
        assert_eq!(c, CrystalSpec::default());
        assert!(serde_json::from_str::<CrystalSpec>(r#"{"length": 1, "wavelength_pump": 1, "x": 1}"#).is_err());
    }

    #[test]
    fn state_formula_and_symmetry() {
        let vp = gaussian_vp(32, 32e-6);
        let state = build_state(&vp, CrystalSpec::default()).unwrap();
        let g = state.camera_grid();
        let c = g.center();
        let phi0 = state.amplitude_at((c, c), (c, c));
        let expected = vp.field().at(c, c) * state.crystal().delta() * state.norm_constant();
        assert!((phi0 - expected).norm() <= 1e-15 * expected.norm());
        for r1 in 0..32 {
            for c1 in (0..32).step_by(3) {
                for r2 in (0..32).step_by(5) {
                    for c2 in 0..32 {
                        assert_eq!(
                            state.amplitude_at((r1, c1), (r2, c2)),
                            state.amplitude_at((r2, c2), (r1, c1))
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn zero_pump_rejected() {
        let g = make_grid(16, 16e-6, Domain::Position).unwrap().conjugate();
        let zero = ComplexField2D::zeros(g);
        assert!(PumpAngularSpectrum::new(zero).is_err());
    }

    #[test]
    fn evaluate_matches_lattice_and_substitutions() {
        let vp = gaussian_vp(16, 16e-6);
        let state = build_state(&vp, CrystalSpec::default()).unwrap();
        let g = state.camera_grid();
        let at = |i: usize| g.coord(i);
        for (i1, i2) in [((8, 8), (8, 8)), ((5, 9), (10, 7)), ((6, 12), (10, 5))] {
            let q1 = (at(i1.1), at(i1.0));
            let q2 = (at(i2.1), at(i2.0));
            let v = evaluate_amplitude(&state, q1, q2).unwrap();
            let lattice = state.amplitude_at(i1, i2);
            assert!(lattice.norm() > 0.0);
            assert!((v - lattice).norm() <= 1e-14 * lattice.norm());
        }
        let q1 = (2.0 * g.pitch(), -1.0 * g.pitch());
        let anti = evaluate_amplitude(&state, q1, (-q1.0, -q1.1)).unwrap();
        let c = state.crystal().phase_matching((2.0 * q1.0).hypot(2.0 * q1.1));
        let expected = vp.field().at(8, 8) * c * state.norm_constant();
        assert!((anti - expected).norm() <= 1e-12 * expected.norm());
        let same = evaluate_amplitude(&state, q1, q1).unwrap();
        let p = bilinear(vp.field(), 2.0 * q1.0, 2.0 * q1.1).unwrap();
        let expected = p * state.crystal().delta() * state.norm_constant();
        assert!((same - expected).norm() <= 1e-12 * expected.norm());
        assert!(matches!(
            evaluate_amplitude(&state, (1e9, 0.0), (0.0, 0.0)),
            Err(Error::Range(_))
        ));
    }

    #[test]
    fn analytic_bg_behaviour() {
        let p = AnalyticBgParams { k_r: 2e5, w_g: 30e-6, delta: 1.5e-6, l: 0 };
        let q1 = (1e5, 0.0);
        let v = analytic_bg_state(&p, q1, (-q1.0, 0.0)).unwrap();
        let w2 = p.w_g * p.w_g;
        let expected = 0.5 * w2 * (-p.k_r * p.k_r * w2 / 4.0).exp()
            * p.delta
            * (-p.delta * p.delta * 4.0 * q1.0 * q1.0 / 2.0).exp();
        assert!((v.re - expected).abs() <= 1e-12 * expected);
        let far = analytic_bg_state(&p, (1e8, 0.0), (-1e8, 0.0)).unwrap();
        assert_eq!(far.norm(), 0.0);
        assert!(matches!(
            analytic_bg_state(&AnalyticBgParams { l: 1, ..p }, q1, q1),
            Err(Error::Unsupported(_))
        ));
    }

    #[test]
    fn analytic_bg_matches_numeric_state() {
        let n = 128;
        let extent = 128.0 * 0.5e-6;
        let g = make_grid(n, extent, Domain::Position).unwrap();
        let spec = PumpSpec::new(405e-9, extent / 8.0, g).unwrap();
        let k_r = 12.0 * g.conjugate().pitch();
        let vp = pump_angular_spectrum(&bessel_gauss_field(&spec, 0, k_r).unwrap()).unwrap();
        let crystal = CrystalSpec::default();
        let state = build_state(&vp, crystal).unwrap();
        let params = AnalyticBgParams { k_r, w_g: spec.waist(), delta: crystal.delta(), l: 0 };
        let cg = state.camera_grid();
        // compare on the q_y1 = q_y2 = 0 slice and a diagonal slice
        let mut num = Vec::new();
        let mut ana = Vec::new();
        for r in [n / 2, n / 2 + 3] {
            for i1 in 0..n {
                for i2 in 0..n {
                    num.push(state.amplitude_at((r, i1), (n - r, i2)));
                    let q1 = (cg.coord(i1), cg.coord(r));
                    let q2 = (cg.coord(i2), -cg.coord(r));
                    ana.push(analytic_bg_state(&params, q1, q2).unwrap());
                }
            }
        }
        let na = num.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
        let nb = ana.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
        let err = num
            .iter()
            .zip(&ana)
            .map(|(a, b)| (a / na - b / nb).norm_sqr())
            .sum::<f64>()
            .sqrt();
        assert!(err <= 1e-2, "L2 {err}");
    }

    #[test]
    fn kernel_check_limits_and_monotonicity() {
        let vp = gaussian_vp(128, 64e-6);
        let base = kernel_check(&vp, &CrystalSpec::default()).unwrap();
        assert!(base.observable);
        assert!(base.filtered_fraction < 1e-6);
        let huge = CrystalSpec { length: 1e3, ..CrystalSpec::default() };
        let out = kernel_check(&vp, &huge).unwrap();
        assert!(!out.observable);
        let mut prev = 0.0;
        for l in [1e-3, 1e-2, 0.1, 1.0, 10.0, 100.0] {
            let f = kernel_check(&vp, &CrystalSpec { length: l, ..CrystalSpec::default() })
                .unwrap()
                .filtered_fraction;
            assert!(f >= prev);
            prev = f;
        }
    }

    proptest! {
        #[test]
        fn delta_scales_with_sqrt_length(l in 1e-5f64..1e-1) {
            let a = CrystalSpec { length: l, ..CrystalSpec::default() };
            let b = CrystalSpec { length: 2.0 * l, ..CrystalSpec::default() };
            prop_assert!((b.delta() / a.delta() - std::f64::consts::SQRT_2).abs() < 1e-14);
        }
    }
}
