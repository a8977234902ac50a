//! Covariance estimator `Ĝ(i,j) = ⟨s_i s_j⟩ − ⟨s_i⟩⟨s_j⟩` accumulated straight
//! into a projection, with delete-one-block jackknife errors.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{render_frames, CameraSpec, FrameStack, PairSampler};
use crate::error::{invalid, Result};
use crate::fft::convolve_full;
use crate::observables::row_map_weights;
use crate::spdc::{parity_class, parity_sums, TwoPhotonState};

const MAX_JACKKNIFE_BLOCKS: usize = 20;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Observable {
    /// Symmetric-row map `M(k_x1, k_x2)`.
    RowMap,
    /// Histogram of the pixel-index sum `i₁ + i₂`.
    SumProjection,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CoincidenceEstimate {
    pub observable: Observable,
    pub n: usize,
    /// Covariance projection with negative entries clipped to zero.
    pub estimate: Vec<f64>,
    pub unclipped: Vec<f64>,
    pub std_error: Vec<f64>,
    pub frames_used: usize,
}

impl CoincidenceEstimate {
    /// Unclipped estimate where it exceeds `sigmas` standard errors, zero
    /// elsewhere.
    pub fn significant(&self, sigmas: f64) -> Vec<f64> {
        self.unclipped
            .iter()
            .zip(&self.std_error)
            .map(|(g, s)| if *g > sigmas * s { *g } else { 0.0 })
            .collect()
    }
}

struct Partial {
    frames: usize,
    singles: Vec<f64>,
    coinc: Vec<f64>,
}

impl Partial {
    fn zeros(n: usize) -> Self {
        Self {
            frames: 0,
            singles: vec![0.0; n * n],
            coinc: vec![0.0; n * n],
        }
    }

    fn add(&mut self, other: &Partial) {
        self.frames += other.frames;
        self.singles.iter_mut().zip(&other.singles).for_each(|(a, b)| *a += b);
        self.coinc.iter_mut().zip(&other.coinc).for_each(|(a, b)| *a += b);
    }

    fn minus(&self, other: &Partial) -> Partial {
        Partial {
            frames: self.frames - other.frames,
            singles: self.singles.iter().zip(&other.singles).map(|(a, b)| a - b).collect(),
            coinc: self.coinc.iter().zip(&other.coinc).map(|(a, b)| a - b).collect(),
        }
    }
}

fn accumulate(stack: &FrameStack, frames: std::ops::Range<usize>, obs: Observable) -> Partial {
    let n = stack.cols();
    let h = n / 2;
    let mut p = Partial::zeros(n);
    p.frames = frames.len();
    for f in frames {
        let lit = stack.lit_pixels(f);
        for &a in &lit {
            p.singles[a] += 1.0;
        }
        for &a in &lit {
            let (ra, ca) = (a / n, a % n);
            for &b in &lit {
                if a == b {
                    continue;
                }
                let (rb, cb) = (b / n, b % n);
                match obs {
                    Observable::RowMap => {
                        if ra >= 1 && rb == n - ra {
                            p.coinc[ca * n + cb] += 1.0;
                        }
                    }
                    Observable::SumProjection => {
                        let (sr, sc) = (ra + rb, ca + cb);
                        if sr >= h && sr - h < n && sc >= h && sc - h < n {
                            p.coinc[(sr - h) * n + sc - h] += 1.0;
                        }
                    }
                }
            }
        }
    }
    p
}

/// `Σ ⟨s_i⟩⟨s_j⟩` over the ordered pixel pairs `i ≠ j` feeding each bin.
fn product_term(m: &[f64], n: usize, obs: Observable) -> Vec<f64> {
    let h = n / 2;
    let mut out = vec![0.0; n * n];
    match obs {
        Observable::RowMap => {
            for ky in 1..n {
                let r1 = &m[ky * n..(ky + 1) * n];
                let r2 = &m[(n - ky) * n..(n - ky + 1) * n];
                for (k1, a) in r1.iter().enumerate() {
                    if *a == 0.0 {
                        continue;
                    }
                    for (k2, b) in r2.iter().enumerate() {
                        out[k1 * n + k2] += a * b;
                    }
                }
            }
            for k in 0..n {
                out[k * n + k] -= m[h * n + k] * m[h * n + k];
            }
        }
        Observable::SumProjection => {
            let conv = convolve_full(m, m, n);
            let w = 2 * n - 1;
            for r in 0..n {
                for c in 0..n {
                    out[r * n + c] = conv[(r + h) * w + c + h];
                }
            }
            for r in 0..n {
                for c in 0..n {
                    let (sr, sc) = (2 * r, 2 * c);
                    if sr >= h && sr - h < n && sc >= h && sc - h < n {
                        out[(sr - h) * n + sc - h] -= m[r * n + c] * m[r * n + c];
                    }
                }
            }
        }
    }
    out
}

fn finalize(p: &Partial, n: usize, obs: Observable) -> Vec<f64> {
    let f = p.frames as f64;
    let m: Vec<f64> = p.singles.iter().map(|s| s / f).collect();
    let prod = product_term(&m, n, obs);
    p.coinc.iter().zip(&prod).map(|(c, q)| c / f - q).collect()
}

fn check_stack(stack: &FrameStack) -> Result<()> {
    if stack.frames() < 2 {
        return invalid("covariance estimation needs at least two frames");
    }
    if stack.rows() != stack.cols() {
        return invalid("frames must be square");
    }
    Ok(())
}

/// Covariance projection from a frame stack with jackknife standard errors
/// over up to 20 contiguous frame blocks.
pub fn estimate_correlations(stack: &FrameStack, observable: Observable) -> Result<CoincidenceEstimate> {
    check_stack(stack)?;
    let n = stack.cols();
    let frames = stack.frames();
    let blocks = frames.min(MAX_JACKKNIFE_BLOCKS);
    let partials: Vec<Partial> = (0..blocks)
        .into_par_iter()
        .map(|b| accumulate(stack, b * frames / blocks..(b + 1) * frames / blocks, observable))
        .collect();
    let mut total = Partial::zeros(n);
    for p in &partials {
        total.add(p);
    }
    let unclipped = finalize(&total, n, observable);
    let leave_out: Vec<Vec<f64>> = partials
        .par_iter()
        .map(|p| finalize(&total.minus(p), n, observable))
        .collect();
    let b = blocks as f64;
    let std_error = (0..n * n)
        .map(|i| {
            let mean = leave_out.iter().map(|v| v[i]).sum::<f64>() / b;
            let ss: f64 = leave_out.iter().map(|v| (v[i] - mean).powi(2)).sum();
            ((b - 1.0) / b * ss).sqrt()
        })
        .collect();
    Ok(CoincidenceEstimate {
        observable,
        n,
        estimate: unclipped.iter().map(|v| v.max(0.0)).collect(),
        unclipped,
        std_error,
        frames_used: frames,
    })
}

fn point_estimate(stack: &FrameStack, frames: usize, observable: Observable) -> Vec<f64> {
    finalize(&accumulate(stack, 0..frames, observable), stack.cols(), observable)
}

/// Exact observable as the estimator sees it: same-pixel pairs (invisible to
/// a binary camera) removed, normalized to unit sum.
pub fn exact_reference(state: &TwoPhotonState, observable: Observable) -> Result<Vec<f64>> {
    let n = state.n();
    let h = n / 2;
    let p = state.sum_intensity();
    let c = state.diff_intensity();
    let c0 = c[h * n + h];
    let mut out = match observable {
        Observable::RowMap => {
            let mut m = row_map_weights(state);
            for k in 0..n {
                let a = 2 * k;
                if a >= h && a - h < n {
                    m[k * n + k] -= p[h * n + a - h] * c0;
                }
            }
            m
        }
        Observable::SumProjection => {
            let sc = parity_sums(&c, n);
            let mut a: Vec<f64> = (0..n * n).map(|i| p[i] * sc[parity_class(i / n, i % n)]).collect();
            for r in 0..n {
                for col in 0..n {
                    let (sr, scol) = (2 * r, 2 * col);
                    if sr >= h && sr - h < n && scol >= h && scol - h < n {
                        let i = (sr - h) * n + scol - h;
                        a[i] -= p[i] * c0;
                    }
                }
            }
            a
        }
    };
    out.iter_mut().for_each(|v| *v = v.max(0.0));
    let s: f64 = out.iter().sum();
    if !(s > 0.0) {
        return invalid("reference observable has no weight");
    }
    out.iter_mut().for_each(|v| *v /= s);
    Ok(out)
}

/// `Σ|e/Σe − r|` for an unnormalized estimate `e` and a normalized reference.
pub fn l1_error(estimate: &[f64], reference: &[f64]) -> f64 {
    let s: f64 = estimate.iter().sum();
    estimate.iter().zip(reference).map(|(e, r)| (e / s - r).abs()).sum()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConvergenceReport {
    pub frame_counts: Vec<usize>,
    pub seeds: Vec<u64>,
    /// `per_seed[s][k]`: L1 error of seed `s` at `frame_counts[k]`.
    pub per_seed: Vec<Vec<f64>>,
    pub mean_l1: Vec<f64>,
    /// Least-squares slope of `ln(mean L1)` against `ln(F)`.
    pub slope: f64,
}

/// Runs the full chain per seed (one stack of the largest frame count; the
/// smaller counts are its prefixes) and compares the row-map estimate with
/// the exact map.
pub fn convergence_report(
    state: &TwoPhotonState,
    camera: &CameraSpec,
    frame_counts: &[usize],
    seeds: &[u64],
) -> Result<ConvergenceReport> {
    if frame_counts.len() < 3 {
        return invalid("convergence needs at least three frame counts");
    }
    let lo = *frame_counts.iter().min().expect("non-empty");
    let hi = *frame_counts.iter().max().expect("non-empty");
    if lo < 2 || (hi as f64) < 10.0 * lo as f64 {
        return invalid("frame counts must span at least one decade, starting from 2");
    }
    if seeds.is_empty() {
        return invalid("at least one seed is required");
    }
    let observable = Observable::RowMap;
    let reference = exact_reference(state, observable)?;
    let sampler = PairSampler::new(state)?;
    let mut per_seed = Vec::with_capacity(seeds.len());
    for &seed in seeds {
        let stack = render_frames(&sampler, camera, hi, seed)?;
        let errs: Vec<f64> = frame_counts
            .par_iter()
            .map(|&f| l1_error(&point_estimate(&stack, f, observable), &reference))
            .collect();
        per_seed.push(errs);
    }
    let mean_l1: Vec<f64> = (0..frame_counts.len())
        .map(|k| per_seed.iter().map(|e| e[k]).sum::<f64>() / seeds.len() as f64)
        .collect();
    let xs: Vec<f64> = frame_counts.iter().map(|f| (*f as f64).ln()).collect();
    let ys: Vec<f64> = mean_l1.iter().map(|e| e.ln()).collect();
    let mx = xs.iter().sum::<f64>() / xs.len() as f64;
    let my = ys.iter().sum::<f64>() / ys.len() as f64;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    Ok(ConvergenceReport {
        frame_counts: frame_counts.to_vec(),
        seeds: seeds.to_vec(),
        per_seed,
        mean_l1,
        slope: sxy / sxx,
    })
}
