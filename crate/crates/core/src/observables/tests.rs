use super::*;
use crate::grid::make_grid;
use crate::pump::{
    apply_mask, axicon_mask, gaussian_envelope, pump_angular_spectrum, PumpAngularSpectrum,
    PumpField, PumpSpec,
};
use crate::spdc::{build_state, CrystalSpec, PhaseMatching};

fn pump_spec(n: usize, extent: f64) -> PumpSpec {
    let g = make_grid(n, extent, Domain::Position).unwrap();
    PumpSpec::new(405e-9, (0.25 * extent).max(4.0 * g.pitch()), g).unwrap()
}

fn gaussian_state(n: usize, extent: f64, crystal: CrystalSpec) -> TwoPhotonState {
    let spec = pump_spec(n, extent);
    let p = PumpField::new(gaussian_envelope(&spec).unwrap()).unwrap();
    build_state(&pump_angular_spectrum(&p).unwrap(), crystal).unwrap()
}

fn axicon_state(n: usize, extent: f64, bins: f64, crystal: CrystalSpec) -> TwoPhotonState {
    let spec = pump_spec(n, extent);
    let k_r = bins * spec.grid().conjugate().pitch();
    let env = gaussian_envelope(&spec).unwrap();
    let p = apply_mask(&env, &axicon_mask(spec.grid(), k_r).unwrap()).unwrap();
    build_state(&pump_angular_spectrum(&p).unwrap(), crystal).unwrap()
}

struct Oracle {
    sum: Vec<f64>,
    minus: Vec<f64>,
    marginal: Vec<f64>,
    row_map: Vec<f64>,
    total: f64,
}

fn oracle(state: &TwoPhotonState) -> Oracle {
    let n = state.n();
    let jpd = brute_force_jpd(state, n).unwrap();
    let h = n as isize / 2;
    let mut sum = vec![0.0; n * n];
    let mut minus = vec![0.0; n * n];
    let mut marginal = vec![0.0; n * n];
    let mut row_map = vec![0.0; n * n];
    let mut total = 0.0;
    let idx = |v: isize| (0..n as isize).contains(&v).then_some(v as usize);
    for r1 in 0..n {
        for c1 in 0..n {
            for r2 in 0..n {
                for c2 in 0..n {
                    let v = jpd[((r1 * n + c1) * n + r2) * n + c2];
                    total += v;
                    marginal[r1 * n + c1] += v;
                    let (r1i, c1i, r2i, c2i) = (r1 as isize, c1 as isize, r2 as isize, c2 as isize);
                    if let (Some(ar), Some(ac)) = (idx(r1i + r2i - h), idx(c1i + c2i - h)) {
                        sum[ar * n + ac] += v;
                    }
                    if let (Some(dr), Some(dc)) = (idx(r1i - r2i + h), idx(c1i - c2i + h)) {
                        minus[dr * n + dc] += v;
                    }
                    if r1 >= 1 && r2 == n - r1 {
                        row_map[c1 * n + c2] += v;
                    }
                }
            }
        }
    }
    let norm = |v: Vec<f64>| {
        let s: f64 = v.iter().sum();
        v.into_iter().map(|x| x / s).collect::<Vec<_>>()
    };
    Oracle {
        sum: norm(sum),
        minus: norm(minus),
        marginal: norm(marginal),
        row_map: norm(row_map),
        total,
    }
}

fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

#[test]
fn fast_paths_match_brute_force() {
    let sinc = CrystalSpec::new(2e-3, 405e-9, PhaseMatching::Sinc).unwrap();
    let states = [
        gaussian_state(8, 8e-6, CrystalSpec::default()),
        gaussian_state(16, 12e-6, CrystalSpec::default()),
        axicon_state(16, 16e-6, 3.0, sinc),
        axicon_state(16, 40e-6, 2.0, CrystalSpec::default()),
    ];
    for state in &states {
        let o = oracle(state);
        assert!((o.total - 1.0).abs() < 1e-10, "total {}", o.total);
        let sp = sum_projection(state).unwrap();
        assert!(sp.normalized);
        assert!(max_abs_diff(sp.field.values(), &o.sum) <= 1e-12);
        assert!(max_abs_diff(minus_projection(state).unwrap().values(), &o.minus) <= 1e-12);
        assert!(max_abs_diff(intensity_marginal(state).unwrap().values(), &o.marginal) <= 1e-12);
        assert!(max_abs_diff(row_correlation_map(state).unwrap().values(), &o.row_map) <= 1e-12);
    }
}

#[test]
fn brute_force_is_symmetric_and_guarded() {
    let state = axicon_state(8, 8e-6, 1.0, CrystalSpec::default());
    let jpd = brute_force_jpd(&state, 8).unwrap();
    let n = 8;
    for a in 0..n * n {
        for b in 0..n * n {
            assert_eq!(jpd[a * n * n + b], jpd[b * n * n + a]);
        }
    }
    let big = gaussian_state(32, 24e-6, CrystalSpec::default());
    assert!(brute_force_jpd(&big, 32).is_err());
    assert!(brute_force_jpd(&state, 16).is_err());
}

// The sum projection is |V_p|² weighted by the parity-class sums of |V_c|²;
// these agree to exp(-π²σ²/2) for a |V_c|² of σ bins, and the tails must fit
// in the window. At extent 40 µm, σ = 3 bins.
#[test]
fn separability_identity() {
    for state in [
        gaussian_state(64, 40e-6, CrystalSpec::default()),
        axicon_state(64, 40e-6, 6.0, CrystalSpec::default()),
    ] {
        let a = sum_projection(&state).unwrap().field;
        let p = state.vp().intensity();
        let ps = p.sum();
        let mut worst: f64 = 0.0;
        for (x, y) in a.values().iter().zip(p.values()) {
            let y = y / ps;
            if y > 0.0 {
                worst = worst.max((x - y).abs() / y);
            }
        }
        assert!(worst <= 1e-12, "relative deviation {worst}");
    }
}

#[test]
fn minus_projection_is_gaussian_with_expected_width() {
    // a 4-pixel waist makes |V_p|² broad enough (σ = 2.5 bins) for its
    // parity-class sums to agree
    let g = make_grid(64, 40e-6, Domain::Position).unwrap();
    let spec = PumpSpec::new(405e-9, 4.0 * g.pitch(), g).unwrap();
    let p = PumpField::new(gaussian_envelope(&spec).unwrap()).unwrap();
    let state = build_state(&pump_angular_spectrum(&p).unwrap(), CrystalSpec::default()).unwrap();
    let b = minus_projection(&state).unwrap();
    let g = b.grid();
    let c = g.center();
    let delta = state.crystal().delta();
    for row in 1..64 {
        for col in 1..64 {
            let q2 = g.coord(row).powi(2) + g.coord(col).powi(2);
            let expected = b.at(c, c) * (-delta * delta * q2).exp();
            assert!((b.at(row, col) - expected).abs() <= 1e-12 * b.at(c, c));
        }
    }
    // 1/e² intensity radius sqrt(2)/δ
    let r = std::f64::consts::SQRT_2 / delta;
    let ratio = (-delta * delta * r * r).exp();
    assert!((ratio - (-2.0f64).exp()).abs() < 1e-15);
}

#[test]
fn row_map_is_symmetric_with_antidiagonal() {
    let state = gaussian_state(64, 32e-6, CrystalSpec::default());
    let m = row_correlation_map(&state).unwrap();
    let n = m.n();
    let max = m.values().iter().cloned().fold(0.0, f64::max);
    for i in 0..n {
        for j in 0..n {
            assert!((m.at(i, j) - m.at(j, i)).abs() <= 1e-10 * max);
        }
    }
    for kx1 in 1..n {
        let row = &m.values()[kx1 * n..(kx1 + 1) * n];
        let row_max = row.iter().cloned().fold(0.0, f64::max);
        if row_max < 1e-3 * max {
            continue;
        }
        let arg = row.iter().position(|v| *v == row_max).unwrap();
        assert!((arg as isize - (n - kx1) as isize).abs() <= 1, "row {kx1}: peak at {arg}");
    }
}

#[test]
fn ridges_for_gaussian_and_axicon() {
    let g = ridge_extract(&row_correlation_map(&gaussian_state(128, 64e-6, CrystalSpec::default())).unwrap(), 0.5)
        .unwrap();
    assert_eq!(g.ridges.len(), 1, "{:?}", g.ridges);
    assert!(g.ridges[0].offset_bins.abs() <= 1.0);

    let bins = 8.0;
    let a = ridge_extract(&row_correlation_map(&axicon_state(128, 64e-6, bins, CrystalSpec::default())).unwrap(), 0.5)
        .unwrap();
    assert_eq!(a.ridges.len(), 2, "{:?}", a.ridges);
    assert!((a.ridges[0].offset_bins + bins).abs() <= 1.0);
    assert!((a.ridges[1].offset_bins - bins).abs() <= 1.0);
    let (s0, s1) = (a.ridges[0].strength, a.ridges[1].strength);
    assert!((s0 - s1).abs() <= 0.2 * s0.max(s1));
}

#[test]
fn ridge_threshold_one_keeps_single_peak_per_row() {
    let state = axicon_state(64, 32e-6, 6.0, CrystalSpec::default());
    let m = row_correlation_map(&state).unwrap();
    let opts = RidgeOptions {
        threshold: 1.0,
        row_floor: 0.0,
        cluster_radius: 0.0,
        min_cluster_weight: 0.0,
    };
    let r = ridge_extract_with(&m, &opts).unwrap();
    let rows_with_weight = (0..m.n())
        .filter(|&i| m.values()[i * m.n()..(i + 1) * m.n()].iter().any(|v| *v > 0.0))
        .count();
    let total: usize = r.ridges.iter().map(|r| r.peaks).sum();
    assert!(total <= rows_with_weight);
    let empty = RowCorrelationMap::new(*m.grid(), vec![0.0; m.n() * m.n()]).unwrap();
    assert!(ridge_extract(&empty, 0.5).is_err());
    assert!(ridge_extract(&m, 0.0).is_err());
}

#[test]
fn plateau_ties_prefer_small_offsets() {
    let g = make_grid(8, 8.0, Domain::Momentum).unwrap();
    let mut v = vec![0.0; 64];
    // row 4 (k_x1 = 0): plateau over columns 2..=5, offsets -2..=1
    for c in 2..=5 {
        v[4 * 8 + c] = 1.0;
    }
    let m = RowCorrelationMap::new(g, v).unwrap();
    let r = ridge_extract(&m, 1.0).unwrap();
    assert_eq!(r.ridges.len(), 1);
    assert_eq!(r.ridges[0].offset_bins, 0.0);
}

#[test]
fn marginal_ignores_pump_phase() {
    let state = axicon_state(64, 32e-6, 5.0, CrystalSpec::default());
    let mut twisted = state.vp().clone();
    let g = *twisted.grid();
    for (i, v) in twisted.values_mut().iter_mut().enumerate() {
        let (row, col) = (i / g.n(), i % g.n());
        *v *= Complex64::from_polar(1.0, 0.37 * g.coord(row) / g.pitch() + (col as f64).sin());
    }
    let other = build_state(&PumpAngularSpectrum::new(twisted).unwrap(), *state.crystal()).unwrap();
    let a = intensity_marginal(&state).unwrap();
    let b = intensity_marginal(&other).unwrap();
    let max = a.max();
    assert!(max_abs_diff(a.values(), b.values()) <= 1e-12 * max.max(1.0));
}

#[test]
fn marginal_unchanged_by_axicon_sign_flip() {
    let spec = pump_spec(64, 32e-6);
    let k_r = 5.0 * spec.grid().conjugate().pitch();
    let env = gaussian_envelope(&spec).unwrap();
    let plus = apply_mask(&env, &axicon_mask(spec.grid(), k_r).unwrap()).unwrap();
    // conjugate phase: +k_r·r
    let minus_phase: Vec<f64> = axicon_mask(spec.grid(), k_r)
        .unwrap()
        .phase()
        .iter()
        .map(|p| -p)
        .collect();
    let minus_mask = crate::pump::SlmMask::custom(*spec.grid(), minus_phase).unwrap();
    let minus = apply_mask(&env, &minus_mask).unwrap();
    let sa = build_state(&pump_angular_spectrum(&plus).unwrap(), CrystalSpec::default()).unwrap();
    let sb = build_state(&pump_angular_spectrum(&minus).unwrap(), CrystalSpec::default()).unwrap();
    let va = sa.vp().intensity();
    let vb = sb.vp().intensity();
    let vmax = va.max();
    // |V_p|² agrees away from the unpaired Nyquist row and column
    let n = 64;
    let mut worst: f64 = 0.0;
    for row in 1..n {
        for col in 1..n {
            worst = worst.max((va.at(row, col) - vb.at(row, col)).abs());
        }
    }
    assert!(worst <= 1e-10 * vmax, "|V_p|² mismatch {worst}");
    let a = intensity_marginal(&sa).unwrap();
    let b = intensity_marginal(&sb).unwrap();
    assert!(max_abs_diff(a.values(), b.values()) <= 1e-8 * a.max());
}

#[test]
fn near_far_round_trip_and_position_projections() {
    let spec = pump_spec(64, 32e-6);
    let env = gaussian_envelope(&spec).unwrap();
    // 8 mm crystal: the position-space difference factor spans 4 pixels
    let crystal = CrystalSpec { length: 8e-3, ..CrystalSpec::default() };
    let state = build_state(
        &pump_angular_spectrum(&PumpField::new(env.clone()).unwrap()).unwrap(),
        crystal,
    )
    .unwrap();
    let near = near_field_state(&state).unwrap();
    assert_eq!(near.representation(), Domain::Position);
    assert!(near_field_state(&near).is_err());
    assert!((near.camera_grid().pitch() - 2.0 * spec.grid().pitch()).abs() < 1e-20);
    let back = far_field_state(&near).unwrap();
    let peak = state.vp().values().iter().map(|v| v.norm()).fold(0.0, f64::max);
    assert!(max_abs_diff(
        &back.vp().values().iter().map(|v| v.re).collect::<Vec<_>>(),
        &state.vp().values().iter().map(|v| v.re).collect::<Vec<_>>()
    ) <= 1e-12 * peak);
    for (a, b) in back.vc().values().iter().zip(state.vc().values()) {
        assert!((a - b).norm() <= 1e-12 * state.crystal().delta());
    }
    assert!((back.norm_constant() / state.norm_constant() - 1.0).abs() < 1e-12);

    // sum projection over (x₁+x₂)/2 reproduces the pump near-field intensity
    let a = sum_projection(&near).unwrap().field;
    let e = env.intensity();
    let es = e.sum();
    for (x, y) in a.values().iter().zip(e.values()) {
        assert!((x - y / es).abs() <= 1e-10 * e.max() / es);
    }
    // minus projection: Ṽ_c ∝ exp(-x²/2δ²), so the intensity has variance δ²/2 per axis
    let b = minus_projection(&near).unwrap();
    let g = b.grid();
    let var: f64 = (0..64)
        .flat_map(|r| (0..64).map(move |c| (r, c)))
        .map(|(r, c)| b.at(r, c) * g.coord(c).powi(2))
        .sum();
    let delta = state.crystal().delta();
    assert!((var / (0.5 * delta * delta) - 1.0).abs() < 0.05, "variance {var}");
}

#[test]
fn camera_mapping() {
    let cfg = ImagingConfig::new(0.4, ImagingMode::FarField, 810e-9).unwrap();
    assert!((cfg.focal() - 0.2).abs() < 1e-15);
    assert!((ImagingConfig::new(0.4, ImagingMode::NearField, 810e-9).unwrap().focal() - 0.1).abs() < 1e-15);
    let q = make_grid(16, 16e-6, Domain::Position).unwrap().conjugate();
    let f = RealField2D::from_fn(q, |x, y| x * x + 2.0 * y);
    let mapped = map_to_camera(&f, &cfg).unwrap();
    let expected = 0.2 * 810e-9 * q.pitch() / std::f64::consts::TAU;
    assert!((mapped.grid().pitch() - expected).abs() < 1e-18);
    assert_eq!(mapped.values(), f.values());

    let x = make_grid(16, 16e-6, Domain::Position).unwrap();
    let near = ImagingConfig::new(0.4, ImagingMode::NearField, 810e-9).unwrap();
    let f = RealField2D::from_fn(x, |x, y| 3.0 + x * 1e6 + 0.5 * y * 1e6);
    let img = map_to_camera(&f, &near).unwrap();
    for row in 1..16 {
        for col in 1..16 {
            assert_eq!(img.at(row, col), f.at(16 - row, 16 - col));
        }
    }
    assert!(map_to_camera(&f, &cfg).is_err());
    assert!(ImagingConfig::new(-1.0, ImagingMode::FarField, 810e-9).is_err());
}
