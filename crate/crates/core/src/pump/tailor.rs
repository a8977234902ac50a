//! Phase-mask design for a target `|V_p|²` by alternating projections.

use std::f64::consts::TAU;

use num_complex::Complex64;

use super::{gaussian_envelope, PumpSpec, SlmMask};
use crate::error::{invalid, Result};
use crate::fft::{dft2_centered, Direction};
use crate::grid::{ComplexField2D, Domain, RealField2D};
use crate::rng;

#[derive(Clone, Debug)]
pub struct TailorResult {
    pub mask: SlmMask,
    /// `‖|V_p| − sqrt(target)‖₂` of the returned mask, target normalized to
    /// unit energy.
    pub residual: f64,
    /// Best residual after each iteration; non-increasing.
    pub history: Vec<f64>,
}

struct Track {
    best_phase: Vec<f64>,
    best: f64,
}

fn residual(spectrum: &ComplexField2D, amp: &[f64]) -> f64 {
    let d2: f64 = spectrum
        .values()
        .iter()
        .zip(amp)
        .map(|(v, a)| (v.norm() - a).powi(2))
        .sum();
    (d2 * spectrum.grid().cell_area()).sqrt()
}

/// Spectrum of `env·e^{iφ}` scaled to unit energy.
fn forward(env: &ComplexField2D, phase: &[f64]) -> ComplexField2D {
    let mut f = env.clone();
    for (v, p) in f.values_mut().iter_mut().zip(phase) {
        *v = Complex64::from_polar(v.re, *p);
    }
    let mut s = dft2_centered(&f, Direction::Forward);
    let scale = env.grid().pitch() / s.grid().pitch();
    s.values_mut().iter_mut().for_each(|v| *v *= scale);
    s
}

/// Runs error-reduction from a start phase; the SLM amplitude stays the
/// envelope, the spectral amplitude is replaced by the target each round.
fn run_track(
    env: &ComplexField2D,
    amp: &[f64],
    start: Vec<f64>,
    iterations: usize,
    history: &mut Vec<f64>,
) -> Track {
    let mut phase = start;
    let mut spectrum = forward(env, &phase);
    let mut track = Track {
        best: residual(&spectrum, amp),
        best_phase: phase.clone(),
    };
    for _ in 0..iterations {
        for (v, a) in spectrum.values_mut().iter_mut().zip(amp) {
            *v = Complex64::from_polar(*a, v.arg());
        }
        let back = dft2_centered(&spectrum, Direction::Inverse);
        for (p, v) in phase.iter_mut().zip(back.values()) {
            *p = v.arg();
        }
        spectrum = forward(env, &phase);
        let r = residual(&spectrum, amp);
        if r < track.best {
            track.best = r;
            track.best_phase.clone_from(&phase);
        }
        history.push(track.best);
    }
    track
}

/// Radially symmetric start phase from geometric energy mapping: the
/// envelope's encircled energy at radius `r` is sent to the spectral radius
/// holding the same fraction of the target's azimuthally summed energy, and
/// the phase is the integral of that local frequency.
fn radial_mapping_phase(target: &RealField2D, waist: f64, env: &ComplexField2D) -> Vec<f64> {
    let qgrid = target.grid();
    let profile = target.radial_profile();
    let dq = qgrid.pitch();
    let mut cum = Vec::with_capacity(profile.len());
    let mut acc = 0.0;
    for &(q, mean) in &profile {
        acc += mean * (q.max(0.5 * dq));
        cum.push((q, acc));
    }
    let grid = env.grid();
    let total = acc;
    let step = 0.25 * grid.pitch();
    let r_max = grid.extent();
    let steps = (r_max / step).ceil() as usize + 1;
    let mut phi = Vec::with_capacity(steps);
    let mut prev_q = 0.0;
    let mut integral = 0.0;
    let mut k = 0;
    for i in 0..steps {
        let r = i as f64 * step;
        let frac = 1.0 - (-2.0 * r * r / (waist * waist)).exp();
        let want = frac * total;
        while k + 1 < cum.len() && cum[k + 1].1 < want {
            k += 1;
        }
        let q = if k + 1 < cum.len() {
            let (q0, c0) = cum[k];
            let (q1, c1) = cum[k + 1];
            if c1 > c0 {
                q0 + (q1 - q0) * ((want - c0) / (c1 - c0)).clamp(0.0, 1.0)
            } else {
                q0
            }
        } else {
            cum[k].0
        };
        if i > 0 {
            integral += 0.5 * (q + prev_q) * step;
        }
        prev_q = q;
        phi.push(integral);
    }
    let n = grid.n();
    let mut out = Vec::with_capacity(grid.len());
    for row in 0..n {
        for col in 0..n {
            let t = grid.radius(row, col) / step;
            let i = (t.floor() as usize).min(steps - 2);
            let f = t - i as f64;
            out.push(phi[i] * (1.0 - f) + phi[i + 1] * f);
        }
    }
    out
}

/// Finds a phase-only mask whose pump angular spectrum has `|V_p|²` close to
/// `target`. Three tracks are run: from a flat mask, from a radial
/// energy-mapping estimate, and from a random mask drawn from `seed`. The best
/// result is returned.
pub fn tailor_pump_to_target(
    target: &RealField2D,
    spec: &PumpSpec,
    iterations: usize,
    seed: u64,
) -> Result<TailorResult> {
    if iterations == 0 {
        return invalid("tailoring needs at least one iteration");
    }
    let qgrid = spec.grid().conjugate();
    if target.grid().domain() != Domain::Momentum || !target.grid().same_sampling(&qgrid) {
        return invalid("target must be sampled on the pump's momentum grid");
    }
    if target.values().iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
        return invalid("target must be finite and non-negative");
    }
    let energy = target.sum() * qgrid.cell_area();
    if energy <= 0.0 {
        return invalid("target has no energy");
    }
    let amp: Vec<f64> = target.values().iter().map(|v| (v / energy).sqrt()).collect();
    let env = gaussian_envelope(spec)?;

    let mut r = rng::stream(seed, 0);
    let starts = [
        vec![0.0; env.grid().len()],
        radial_mapping_phase(target, spec.waist(), &env),
        (0..env.grid().len()).map(|_| TAU * rng::unit_f64(&mut r)).collect(),
    ];
    let mut history = vec![f64::INFINITY; iterations];
    let mut best: Option<Track> = None;
    for start in starts {
        let mut h = Vec::with_capacity(iterations);
        let track = run_track(&env, &amp, start, iterations, &mut h);
        for (a, b) in history.iter_mut().zip(&h) {
            *a = a.min(*b);
        }
        if best.as_ref().is_none_or(|b| track.best < b.best) {
            best = Some(track);
        }
    }
    let best = best.expect("at least one track");
    Ok(TailorResult {
        mask: SlmMask::custom(*spec.grid(), best.best_phase)?,
        residual: best.best,
        history,
    })
}
