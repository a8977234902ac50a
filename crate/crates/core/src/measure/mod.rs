//! Photon-counting detection: pair sampling, binary camera frames and the
//! covariance estimator that recovers correlations from them.

mod estimate;

use rand::RngCore;
use rand_distr::{Distribution, Poisson};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::grid::Grid2D;
use crate::rng;
use crate::spdc::{parity_class, TwoPhotonState};

pub use estimate::{
    convergence_report, estimate_correlations, exact_reference, l1_error, CoincidenceEstimate,
    ConvergenceReport, Observable,
};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PairStatistics {
    #[default]
    Poisson,
    /// Exactly `pairs_per_frame_mean` pairs every frame (must be an integer).
    Fixed,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CameraSpec {
    pub n: usize,
    pub quantum_efficiency: f64,
    pub dark_count_prob: f64,
    pub pairs_per_frame_mean: f64,
    #[serde(default)]
    pub statistics: PairStatistics,
}

impl CameraSpec {
    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return invalid("camera needs at least one pixel");
        }
        if !(self.quantum_efficiency >= 0.0 && self.quantum_efficiency <= 1.0) {
            return invalid("quantum efficiency must lie in [0, 1]");
        }
        if !(self.dark_count_prob >= 0.0 && self.dark_count_prob < 1.0) {
            return invalid("dark count probability must lie in [0, 1)");
        }
        if !(self.pairs_per_frame_mean > 0.0 && self.pairs_per_frame_mean.is_finite()) {
            return invalid("mean pairs per frame must be positive");
        }
        if self.statistics == PairStatistics::Fixed
            && self.pairs_per_frame_mean.fract() != 0.0
        {
            return invalid("fixed pair statistics need an integer pair count");
        }
        Ok(())
    }
}

/// Both photons of a pair as camera lattice indices `(row, col)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct PhotonPair {
    pub first: (usize, usize),
    pub second: (usize, usize),
}

impl PhotonPair {
    /// `((x₁, y₁), (x₂, y₂))` in the coordinates of `grid`.
    pub fn coordinates(&self, grid: &Grid2D) -> ((f64, f64), (f64, f64)) {
        (
            (grid.coord(self.first.1), grid.coord(self.first.0)),
            (grid.coord(self.second.1), grid.coord(self.second.0)),
        )
    }
}

struct ClassTable {
    indices: Vec<usize>,
    cdf: Vec<f64>,
}

impl ClassTable {
    fn new(weights: &[f64], n: usize, class: usize) -> Self {
        let mut indices = Vec::new();
        let mut cdf = Vec::new();
        let mut acc = 0.0;
        for (i, w) in weights.iter().enumerate() {
            if parity_class(i / n, i % n) == class && *w > 0.0 {
                acc += w;
                indices.push(i);
                cdf.push(acc);
            }
        }
        Self { indices, cdf }
    }

    fn total(&self) -> f64 {
        self.cdf.last().copied().unwrap_or(0.0)
    }

    fn draw(&self, u: f64) -> usize {
        let target = u * self.total();
        let k = self.cdf.partition_point(|c| *c <= target);
        self.indices[k.min(self.indices.len() - 1)]
    }
}

/// Exact sampler of the lattice JPD. A pair is one `(q₊, q₋)` factor-index
/// pair of equal index parity: the parity class is drawn with weight
/// `S_P·S_C`, then `q₊ ∝ |V_p|²` and `q₋ ∝ |V_c|²` independently within it.
pub struct PairSampler {
    n: usize,
    grid: Grid2D,
    class_cdf: [f64; 4],
    sum: Vec<ClassTable>,
    diff: Vec<ClassTable>,
}

impl PairSampler {
    pub fn new(state: &TwoPhotonState) -> Result<Self> {
        let n = state.n();
        let p = state.sum_intensity();
        let c = state.diff_intensity();
        let sum: Vec<ClassTable> = (0..4).map(|k| ClassTable::new(&p, n, k)).collect();
        let diff: Vec<ClassTable> = (0..4).map(|k| ClassTable::new(&c, n, k)).collect();
        let mut class_cdf = [0.0; 4];
        let mut acc = 0.0;
        for k in 0..4 {
            acc += sum[k].total() * diff[k].total();
            class_cdf[k] = acc;
        }
        if !(acc > 0.0 && acc.is_finite()) {
            return invalid("state has no support to sample from");
        }
        Ok(Self {
            n,
            grid: state.camera_grid(),
            class_cdf,
            sum,
            diff,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn camera_grid(&self) -> &Grid2D {
        &self.grid
    }

    pub fn draw(&self, rng: &mut impl RngCore) -> PhotonPair {
        let u = rng::unit_f64(rng) * self.class_cdf[3];
        let k = self.class_cdf.partition_point(|c| *c <= u).min(3);
        let a = self.sum[k].draw(rng::unit_f64(rng));
        let d = self.diff[k].draw(rng::unit_f64(rng));
        let n = self.n;
        let (ar, ac, dr, dc) = (a / n, a % n, d / n, d % n);
        PhotonPair {
            first: ((ar + dr) / 2, (ac + dc) / 2),
            second: ((ar + n - dr) / 2, (ac + n - dc) / 2),
        }
    }
}

/// `count` pairs drawn from the state, deterministic per `seed`.
pub fn sample_pairs(state: &TwoPhotonState, count: usize, seed: u64) -> Result<Vec<PhotonPair>> {
    if count == 0 {
        return invalid("sample count must be at least one");
    }
    let sampler = PairSampler::new(state)?;
    let mut r = rng::stream(seed, 0);
    Ok((0..count).map(|_| sampler.draw(&mut r)).collect())
}

/// Binary frames, bit-packed row by row (MSB first, rows padded to bytes).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FrameStack {
    frames: usize,
    rows: usize,
    cols: usize,
    seed: u64,
    bits: Vec<u8>,
}

impl FrameStack {
    pub fn from_bits(frames: usize, rows: usize, cols: usize, seed: u64, bits: Vec<u8>) -> Result<Self> {
        if bits.len() != frames * rows * cols.div_ceil(8) {
            return invalid("bit buffer size does not match frame geometry");
        }
        Ok(Self {
            frames,
            rows,
            cols,
            seed,
            bits,
        })
    }

    pub fn frames(&self) -> usize {
        self.frames
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn bits(&self) -> &[u8] {
        &self.bits
    }

    fn row_bytes(&self) -> usize {
        self.cols.div_ceil(8)
    }

    fn frame_bytes(&self) -> usize {
        self.rows * self.row_bytes()
    }

    pub fn get(&self, frame: usize, row: usize, col: usize) -> bool {
        let byte = self.bits[frame * self.frame_bytes() + row * self.row_bytes() + col / 8];
        byte & (0x80 >> (col % 8)) != 0
    }

    /// Lit pixels of one frame as flat indices `row·cols + col`, ascending.
    pub fn lit_pixels(&self, frame: usize) -> Vec<usize> {
        let rb = self.row_bytes();
        let start = frame * self.frame_bytes();
        let mut out = Vec::new();
        for row in 0..self.rows {
            for (b, byte) in self.bits[start + row * rb..start + (row + 1) * rb].iter().enumerate() {
                if *byte == 0 {
                    continue;
                }
                for bit in 0..8 {
                    if byte & (0x80 >> bit) != 0 {
                        out.push(row * self.cols + b * 8 + bit);
                    }
                }
            }
        }
        out
    }

    /// The first `frames` frames.
    pub fn prefix(&self, frames: usize) -> Result<Self> {
        if frames > self.frames {
            return invalid("prefix longer than the stack");
        }
        Self::from_bits(
            frames,
            self.rows,
            self.cols,
            self.seed,
            self.bits[..frames * self.frame_bytes()].to_vec(),
        )
    }
}

fn render_one(sampler: &PairSampler, camera: &CameraSpec, seed: u64, frame: usize, out: &mut [u8]) {
    let n = camera.n;
    let rb = n.div_ceil(8);
    let mut set = |idx: usize| out[(idx / n) * rb + (idx % n) / 8] |= 0x80 >> ((idx % n) % 8);
    let mut r = rng::stream(seed, frame as u64);
    let pairs = match camera.statistics {
        PairStatistics::Fixed => camera.pairs_per_frame_mean as u64,
        PairStatistics::Poisson => Poisson::new(camera.pairs_per_frame_mean)
            .expect("validated mean")
            .sample(&mut r) as u64,
    };
    let eta = camera.quantum_efficiency;
    for _ in 0..pairs {
        let pair = sampler.draw(&mut r);
        for (row, col) in [pair.first, pair.second] {
            if rng::unit_f64(&mut r) < eta {
                set(row * n + col);
            }
        }
    }
    let p = camera.dark_count_prob;
    if p > 0.0 {
        let log_q = (-p).ln_1p();
        let mut pos: usize = 0;
        loop {
            let u = rng::unit_f64(&mut r);
            let skip = ((-u).ln_1p() / log_q).floor();
            if !skip.is_finite() || skip >= (n * n - pos) as f64 {
                break;
            }
            pos += skip as usize;
            set(pos);
            pos += 1;
            if pos >= n * n {
                break;
            }
        }
    }
}

/// Renders `frames` binary frames; frame `f` uses random stream `f` of `seed`
/// so any prefix of a longer run is reproduced exactly.
pub fn render_frames(
    sampler: &PairSampler,
    camera: &CameraSpec,
    frames: usize,
    seed: u64,
) -> Result<FrameStack> {
    camera.validate()?;
    if frames == 0 {
        return invalid("at least one frame is required");
    }
    if camera.n != sampler.n() {
        return invalid("camera size does not match the state grid");
    }
    let n = camera.n;
    let frame_bytes = n * n.div_ceil(8);
    let mut bits = vec![0u8; frames * frame_bytes];
    bits.par_chunks_mut(frame_bytes)
        .enumerate()
        .for_each(|(f, chunk)| render_one(sampler, camera, seed, f, chunk));
    FrameStack::from_bits(frames, n, n, seed, bits)
}
