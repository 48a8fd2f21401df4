//! Monte Carlo simulation of the self-similar measure.
//!
//! Samples are `pi(w)` for words `w` of i.i.d. fair symbols, truncated at a
//! fixed depth and evaluated in `f64`. Randomness is ChaCha8 keyed by
//! `seed_from_u64(seed)`; samples are drawn in blocks of [`BLOCK`] and block
//! `j` reads stream `j` of that key, one `u64` per 64 symbols (bit set means
//! symbol 2, least significant bit first). Results therefore do not depend on
//! the number of worker threads.

use std::io::Write;

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ifs::Params;

/// Samples per random stream.
pub const BLOCK: u64 = 4096;
pub const DEFAULT_COUNT: u64 = 1_000_000;
pub const DEFAULT_BINS: usize = 4096;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalMeasure {
    pub bin_count: usize,
    pub bin_width: f64,
    /// Right end of the support interval `[0, 1/(1-b2)]`.
    pub interval_right: f64,
    pub counts: Vec<u64>,
    pub sample_size: u64,
    /// Smallest and largest sample drawn, before binning.
    pub sample_range: (f64, f64),
    pub depth: u32,
    pub seed: u64,
    /// `max(b1, b2)^depth * |I|`, the largest distance from a truncated
    /// sample to the point it approximates.
    pub truncation_error: f64,
}

impl EmpiricalMeasure {
    /// Histogram over `[0, interval_right]` built directly from bin counts.
    pub fn from_counts(counts: Vec<u64>, interval_right: f64) -> Result<Self> {
        if counts.is_empty() || !(interval_right > 0.0) {
            return Err(Error::Domain("need at least one bin and a positive interval".into()));
        }
        let bin_count = counts.len();
        Ok(EmpiricalMeasure {
            bin_count,
            bin_width: interval_right / bin_count as f64,
            interval_right,
            sample_size: counts.iter().sum(),
            sample_range: (0.0, interval_right),
            counts,
            depth: 0,
            seed: 0,
            truncation_error: 0.0,
        })
    }

    /// Merges each run of `factor` consecutive bins into one.
    pub fn coarsen(&self, factor: usize) -> Result<EmpiricalMeasure> {
        if factor == 0 || self.bin_count % factor != 0 {
            return Err(Error::Domain(format!(
                "cannot merge {} bins in groups of {factor}",
                self.bin_count
            )));
        }
        Ok(EmpiricalMeasure {
            bin_count: self.bin_count / factor,
            bin_width: self.bin_width * factor as f64,
            counts: self.counts.chunks(factor).map(|c| c.iter().sum()).collect(),
            ..self.clone()
        })
    }

    pub fn bin_edges(&self, i: usize) -> (f64, f64) {
        (i as f64 * self.bin_width, (i + 1) as f64 * self.bin_width)
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "bin_lo,bin_hi,count")?;
        for (i, count) in self.counts.iter().enumerate() {
            let (lo, hi) = self.bin_edges(i);
            writeln!(out, "{lo},{hi},{count}")?;
        }
        Ok(())
    }
}

/// Smallest depth with `max(b1, b2)^depth < 2^-40`.
pub fn default_depth(params: &Params) -> u32 {
    let (b1, b2) = params.to_f64();
    let rate = -b1.max(b2).ln();
    ((40.0 * std::f64::consts::LN_2 / rate).floor() as u32) + 1
}

fn check_counts(count: u64, depth: u32) -> Result<()> {
    if count == 0 || depth == 0 {
        return Err(Error::Domain(format!(
            "count and depth must be at least 1, got count={count} depth={depth}"
        )));
    }
    Ok(())
}

/// Feeds the symbol bits of every sample to `fold`, one accumulator per
/// block, and combines the blocks with `merge` in block order.
fn for_each_word<A, F, M>(count: u64, depth: u32, seed: u64, init: impl Fn() -> A + Sync, fold: F, merge: M) -> A
where
    A: Send,
    F: Fn(&mut A, &[u64]) + Sync,
    M: Fn(A, A) -> A + Sync + Send,
{
    let words_per_sample = depth.div_ceil(64) as usize;
    let blocks = count.div_ceil(BLOCK);
    let partials: Vec<A> = (0..blocks)
        .into_par_iter()
        .map(|j| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(j);
            let mut acc = init();
            let mut bits = vec![0u64; words_per_sample];
            let n = BLOCK.min(count - j * BLOCK);
            for _ in 0..n {
                for w in bits.iter_mut() {
                    *w = rng.next_u64();
                }
                let tail = depth % 64;
                if tail != 0 {
                    *bits.last_mut().unwrap() &= (1u64 << tail) - 1;
                }
                fold(&mut acc, &bits);
            }
            acc
        })
        .collect();
    partials.into_iter().reduce(merge).unwrap_or_else(init)
}

fn pi_f64(bits: &[u64], depth: u32, b1: f64, b2: f64) -> f64 {
    let (mut x, mut scale) = (0.0, 1.0);
    for k in 0..depth as usize {
        if bits[k / 64] >> (k % 64) & 1 == 1 {
            x += scale;
            scale *= b2;
        } else {
            scale *= b1;
        }
    }
    x
}

/// Draws `count` truncated samples of the measure into `bins` equal bins
/// over `[0, 1/(1-b2)]`.
pub fn sample_measure(params: &Params, count: u64, depth: u32, seed: u64, bins: usize) -> Result<EmpiricalMeasure> {
    check_counts(count, depth)?;
    if bins == 0 {
        return Err(Error::Domain("bin count must be at least 1".into()));
    }
    let (b1, b2) = params.to_f64();
    let right = 1.0 / (1.0 - b2);
    let width = right / bins as f64;
    let (counts, sample_range) = for_each_word(
        count,
        depth,
        seed,
        || (vec![0u64; bins], (f64::INFINITY, f64::NEG_INFINITY)),
        |(hist, range), bits| {
            let x = pi_f64(bits, depth, b1, b2);
            let i = ((x / width) as usize).min(bins - 1);
            hist[i] += 1;
            *range = (range.0.min(x), range.1.max(x));
        },
        |(mut a, ra), (b, rb)| {
            a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
            (a, (ra.0.min(rb.0), ra.1.max(rb.1)))
        },
    );
    Ok(EmpiricalMeasure {
        bin_count: bins,
        bin_width: width,
        interval_right: right,
        counts,
        sample_size: count,
        sample_range,
        depth,
        seed,
        truncation_error: b1.max(b2).powi(depth as i32) * right,
    })
}

/// One point of the entropy-dimension fit.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScalePoint {
    pub box_size: f64,
    pub boxes: usize,
    pub occupied: usize,
    pub information: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DimensionEstimate {
    pub slope: f64,
    pub stderr: f64,
    pub points: Vec<ScalePoint>,
}

/// Minimum number of boxes a scale must cut the support interval into.
pub const MIN_BOXES: usize = 10;

/// Box sizes `bin_width * 2^j` from the finest bin up to the coarsest size
/// that still leaves [`MIN_BOXES`] boxes.
pub fn default_scales(em: &EmpiricalMeasure) -> Vec<f64> {
    (0..)
        .map(|j| 1usize << j)
        .take_while(|&g| em.bin_count.div_ceil(g) >= MIN_BOXES)
        .map(|g| em.bin_width * g as f64)
        .collect()
}

/// Least-squares slope of `I(eps) = -sum p ln p` against `ln(1/eps)`.
///
/// Each box size is rounded to a whole number of histogram bins. A scale is
/// used when it cuts `[0, 1/(1-b2)]` into at least [`MIN_BOXES`] boxes;
/// occupancy is not required, so an atom gives slope 0.
pub fn entropy_dimension_estimate(em: &EmpiricalMeasure, scales: &[f64]) -> Result<DimensionEstimate> {
    if em.sample_size == 0 {
        return Err(Error::Domain("empty histogram".into()));
    }
    let total = em.sample_size as f64;
    let mut groups: Vec<usize> = scales
        .iter()
        .filter(|s| s.is_finite() && **s > 0.0)
        .map(|s| ((s / em.bin_width).round() as usize).max(1))
        .filter(|&g| em.bin_count.div_ceil(g) >= MIN_BOXES)
        .collect();
    groups.sort_unstable();
    groups.dedup();
    if groups.len() < 3 {
        return Err(Error::Domain(format!(
            "degenerate fit: {} usable scales, need at least 3",
            groups.len()
        )));
    }

    let points: Vec<ScalePoint> = groups
        .iter()
        .map(|&g| {
            let mut information = 0.0;
            let mut occupied = 0;
            for chunk in em.counts.chunks(g) {
                let c: u64 = chunk.iter().sum();
                if c > 0 {
                    let p = c as f64 / total;
                    information -= p * p.ln();
                    occupied += 1;
                }
            }
            ScalePoint {
                box_size: em.bin_width * g as f64,
                boxes: em.bin_count.div_ceil(g),
                occupied,
                information,
            }
        })
        .collect();

    let xs: Vec<f64> = points.iter().map(|p| -p.box_size.ln()).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.information).collect();
    let (slope, stderr) = least_squares_slope(&xs, &ys);
    Ok(DimensionEstimate { slope, stderr, points })
}

fn least_squares_slope(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let sse: f64 = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| (y - my - slope * (x - mx)).powi(2))
        .sum();
    let stderr = if xs.len() > 2 { (sse / (n - 2.0) / sxx).sqrt() } else { 0.0 };
    (slope, stderr)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LyapunovSample {
    pub mean: f64,
    pub stderr: f64,
}

/// Mean and standard error of `-(1/depth) ln(b1^{#1} b2^{#2})` over random
/// words of length `depth`.
pub fn lyapunov_monte_carlo(params: &Params, count: u64, depth: u32, seed: u64) -> Result<LyapunovSample> {
    check_counts(count, depth)?;
    let (b1, b2) = params.to_f64();
    let (l1, l2) = (b1.ln(), b2.ln());
    let values = for_each_word(
        count,
        depth,
        seed,
        Vec::new,
        |acc: &mut Vec<f64>, bits| {
            let twos: u32 = bits.iter().map(|w| w.count_ones()).sum();
            let ones_frac = (depth - twos) as f64 / depth as f64;
            acc.push(-(l2 + ones_frac * (l1 - l2)));
        },
        |mut a, b| {
            a.extend(b);
            a
        },
    );
    let n = values.len() as f64;
    // shifted by the first value so identical samples average exactly
    let shift = values[0];
    let mean = shift + values.iter().map(|v| v - shift).sum::<f64>() / n;
    let stderr = if values.len() > 1 {
        let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
        (var / n).sqrt()
    } else {
        0.0
    };
    Ok(LyapunovSample { mean, stderr })
}
