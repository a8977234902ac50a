//! Antidiagonal ridges of a row correlation map.

use serde::Serialize;

use super::RowCorrelationMap;
use crate::error::{invalid, Result};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RidgeOptions {
    /// Peaks below `threshold × row maximum` are ignored; `1.0` keeps one
    /// peak per row.
    pub threshold: f64,
    /// Rows whose maximum is below this fraction of the global maximum are
    /// skipped.
    pub row_floor: f64,
    /// Single-linkage radius in bins.
    pub cluster_radius: f64,
    /// Clusters lighter than this fraction of the heaviest are dropped.
    pub min_cluster_weight: f64,
}

impl Default for RidgeOptions {
    fn default() -> Self {
        Self {
            threshold: 0.5,
            row_floor: 0.05,
            cluster_radius: 2.0,
            min_cluster_weight: 0.05,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Ridge {
    /// `k_x1 + k_x2` in rad/m (or metres for position maps).
    pub offset: f64,
    pub offset_bins: f64,
    /// Mean peak value of the cluster.
    pub strength: f64,
    pub peaks: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RidgeReport {
    pub ridges: Vec<Ridge>,
    pub threshold: f64,
}

pub fn ridge_extract(m: &RowCorrelationMap, threshold: f64) -> Result<RidgeReport> {
    ridge_extract_with(
        m,
        &RidgeOptions {
            threshold,
            ..RidgeOptions::default()
        },
    )
}

/// Local maxima of every row `k_x1`, clustered by the offset `k_x1 + k_x2`.
/// Within a plateau, and among equal maxima when only one peak is kept, the
/// candidate with the smallest `|offset|` wins.
pub fn ridge_extract_with(m: &RowCorrelationMap, opts: &RidgeOptions) -> Result<RidgeReport> {
    if !(opts.threshold > 0.0 && opts.threshold <= 1.0) {
        return invalid("ridge threshold must lie in (0, 1]");
    }
    let n = m.n();
    let global = m.values().iter().cloned().fold(0.0f64, f64::max);
    if !(global > 0.0 && global.is_finite()) {
        return invalid("row map is empty");
    }
    let offset_of = |i1: usize, i2: usize| (i1 + i2) as isize - n as isize;
    let mut peaks: Vec<(isize, f64)> = Vec::new();
    for i1 in 0..n {
        let row = &m.values()[i1 * n..(i1 + 1) * n];
        let row_max = row.iter().cloned().fold(0.0f64, f64::max);
        if row_max <= 0.0 || row_max < opts.row_floor * global {
            continue;
        }
        let mut candidates: Vec<(isize, f64)> = Vec::new();
        let mut start = 0;
        while start < n {
            let mut end = start;
            while end + 1 < n && row[end + 1] == row[start] {
                end += 1;
            }
            let v = row[start];
            let left_ok = start == 0 || row[start - 1] < v;
            let right_ok = end + 1 == n || row[end + 1] < v;
            if left_ok && right_ok && v > 0.0 && v >= opts.threshold * row_max {
                let best = (start..=end)
                    .map(|i2| offset_of(i1, i2))
                    .min_by_key(|o| o.abs())
                    .expect("non-empty plateau");
                candidates.push((best, v));
            }
            start = end + 1;
        }
        if opts.threshold >= 1.0 && candidates.len() > 1 {
            let best = candidates
                .iter()
                .copied()
                .min_by_key(|c| c.0.abs())
                .expect("non-empty");
            candidates = vec![best];
        }
        peaks.extend(candidates);
    }
    peaks.sort_by(|a, b| a.0.cmp(&b.0).then(a.1.total_cmp(&b.1)));

    let mut clusters: Vec<Vec<(isize, f64)>> = Vec::new();
    for p in peaks {
        match clusters.last_mut() {
            Some(c) if (p.0 - c.last().expect("non-empty").0) as f64 <= opts.cluster_radius => {
                c.push(p)
            }
            _ => clusters.push(vec![p]),
        }
    }
    let weights: Vec<f64> = clusters.iter().map(|c| c.iter().map(|p| p.1).sum()).collect();
    let heaviest = weights.iter().cloned().fold(0.0f64, f64::max);
    let pitch = m.grid().pitch();
    let ridges = clusters
        .iter()
        .zip(&weights)
        .filter(|(_, w)| **w >= opts.min_cluster_weight * heaviest)
        .map(|(c, w)| {
            let center = c.iter().map(|p| p.0 as f64 * p.1).sum::<f64>() / w;
            Ridge {
                offset: center * pitch,
                offset_bins: center,
                strength: w / c.len() as f64,
                peaks: c.len(),
            }
        })
        .collect();
    Ok(RidgeReport {
        ridges,
        threshold: opts.threshold,
    })
}
