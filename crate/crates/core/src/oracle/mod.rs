//! Ground truth for the law of `T`: Monte Carlo with exact binomial
//! intervals, the closed-form CDF for one coordinate, and characteristic
//! function inversion for general diagonal forms.

mod imhof;
mod interval;
mod rng;

use rayon::prelude::*;
use serde::Serialize;

use crate::bounds::{DiagonalForm, Direction};
use crate::error::{validation, Result};
use crate::spectral::QuadraticForm;

pub use imhof::{cdf_cf, cdf_cf_detailed, CfCdf, CDF_TOLERANCE};
pub use interval::{clopper_pearson, normal_cdf, normal_sf, DEFAULT_CONFIDENCE};
pub use rng::{NormalStream, DEFAULT_CHUNK_SIZE};

/// Draws of `T` with the parameters that reproduce them.
#[derive(Debug, Clone, PartialEq)]
pub struct Samples {
    pub values: Vec<f64>,
    pub seed: u64,
    pub chunk_size: usize,
}

impl Samples {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }
}

/// Monte Carlo estimate of a tail probability.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TailEstimate {
    pub p_hat: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub exceedances: u64,
    pub n: u64,
    pub seed: u64,
}

/// Evaluates `eval(z)` on `n` standard Gaussian vectors of length `dim`.
///
/// Draw `i` belongs to chunk `i / chunk_size`; every chunk reads its own
/// stream, so the result is identical however rayon schedules the chunks.
pub fn sample_fn<F>(dim: usize, n: usize, seed: u64, chunk_size: usize, eval: F) -> Result<Samples>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    if n == 0 {
        return Err(validation("sample count must be at least 1"));
    }
    if chunk_size == 0 {
        return Err(validation("chunk size must be at least 1"));
    }
    let mut values = vec![0.0; n];
    values
        .par_chunks_mut(chunk_size)
        .enumerate()
        .for_each(|(chunk, out)| {
            let mut stream = NormalStream::new(seed, chunk as u64);
            let mut z = vec![0.0; dim];
            for v in out {
                stream.fill(&mut z);
                *v = eval(&z);
            }
        });
    Ok(Samples {
        values,
        seed,
        chunk_size,
    })
}

/// `n` realisations of `Σ aₖzₖ² + bₖzₖ`.
pub fn sample(form: &DiagonalForm, n: usize, seed: u64) -> Result<Samples> {
    sample_with_chunk(form, n, seed, DEFAULT_CHUNK_SIZE)
}

pub fn sample_with_chunk(form: &DiagonalForm, n: usize, seed: u64, chunk_size: usize) -> Result<Samples> {
    sample_fn(form.dim(), n, seed, chunk_size, |z| form.evaluate(z))
}

/// `n` realisations of `zᵀAz + bᵀz`, without any reduction.
pub fn sample_matrix(form: &QuadraticForm, n: usize, seed: u64) -> Result<Samples> {
    sample_fn(form.dim(), n, seed, DEFAULT_CHUNK_SIZE, |z| form.evaluate(z))
}

fn exceeds(value: f64, t: f64, direction: Direction) -> bool {
    match direction {
        Direction::Upper => value >= t,
        Direction::Lower => value <= t,
    }
}

/// Fraction of samples with `T ≥ t` (upper) or `T ≤ t` (lower), with a 99%
/// Clopper–Pearson interval.
pub fn empirical_tail(samples: &Samples, t: f64, direction: Direction) -> Result<TailEstimate> {
    empirical_tail_with(samples, t, direction, DEFAULT_CONFIDENCE)
}

pub fn empirical_tail_with(
    samples: &Samples,
    t: f64,
    direction: Direction,
    confidence: f64,
) -> Result<TailEstimate> {
    if samples.is_empty() {
        return Err(validation("no samples"));
    }
    let hits = samples
        .values
        .iter()
        .filter(|&&v| exceeds(v, t, direction))
        .count() as u64;
    estimate(hits, samples.len() as u64, samples.seed, confidence)
}

fn estimate(hits: u64, n: u64, seed: u64, confidence: f64) -> Result<TailEstimate> {
    let (ci_low, ci_high) = clopper_pearson(hits, n, confidence)?;
    let p_hat = hits as f64 / n as f64;
    Ok(TailEstimate {
        p_hat,
        ci_low: ci_low.min(p_hat),
        ci_high: ci_high.max(p_hat),
        exceedances: hits,
        n,
        seed,
    })
}

/// Probability that at least one form crosses its threshold, with all forms
/// evaluated on the same Gaussian vector for each draw.
pub fn joint_exceedance(
    forms: &[DiagonalForm],
    thresholds: &[f64],
    direction: Direction,
    n: usize,
    seed: u64,
) -> Result<TailEstimate> {
    if forms.is_empty() || forms.len() != thresholds.len() {
        return Err(validation("need one threshold per form and at least one form"));
    }
    let dim = forms[0].dim();
    if forms.iter().any(|f| f.dim() != dim) {
        return Err(validation("forms must share the dimension of the Gaussian vector"));
    }
    let samples = sample_fn(dim, n, seed, DEFAULT_CHUNK_SIZE, |z| {
        let any = forms
            .iter()
            .zip(thresholds)
            .any(|(f, &t)| exceeds(f.evaluate(z), t, direction));
        if any { 1.0 } else { 0.0 }
    })?;
    let hits = samples.values.iter().filter(|&&v| v == 1.0).count() as u64;
    estimate(hits, n as u64, seed, DEFAULT_CONFIDENCE)
}

/// Exact `P(az² + bz ≤ t)` for a single standard normal `z`.
pub fn cdf_p1(a: f64, b: f64, t: f64) -> f64 {
    if a < 0.0 {
        // P(T ≤ t) = P(−T ≥ −t), and −T has a positive quadratic coefficient
        return 1.0 - cdf_p1(-a, -b, -t);
    }
    if a == 0.0 {
        return if b > 0.0 {
            normal_cdf(t / b)
        } else if b < 0.0 {
            normal_sf(t / b)
        } else if t >= 0.0 {
            1.0
        } else {
            0.0
        };
    }
    let disc = b * b + 4.0 * a * t;
    if disc < 0.0 {
        return 0.0;
    }
    let root = disc.sqrt();
    // roots of az² + bz − t without cancellation
    let q = -0.5 * (b + b.signum() * root);
    let (r1, r2) = if q == 0.0 { (0.0, 0.0) } else { (q / a, -t / q) };
    let (lo, hi) = if r1 <= r2 { (r1, r2) } else { (r2, r1) };
    if lo > 0.0 {
        normal_sf(lo) - normal_sf(hi)
    } else {
        normal_cdf(hi) - normal_cdf(lo)
    }
}

/// Two-sample Kolmogorov–Smirnov statistic.
pub fn ks_statistic(x: &[f64], y: &[f64]) -> f64 {
    let mut xs = x.to_vec();
    let mut ys = y.to_vec();
    xs.sort_by(f64::total_cmp);
    ys.sort_by(f64::total_cmp);
    let (n, m) = (xs.len() as f64, ys.len() as f64);
    let (mut i, mut j) = (0, 0);
    let mut d: f64 = 0.0;
    while i < xs.len() && j < ys.len() {
        let v = xs[i].min(ys[j]);
        while i < xs.len() && xs[i] <= v {
            i += 1;
        }
        while j < ys.len() && ys[j] <= v {
            j += 1;
        }
        d = d.max((i as f64 / n - j as f64 / m).abs());
    }
    d
}

/// Asymptotic two-sample KS critical value at significance `alpha`.
pub fn ks_critical(n: usize, m: usize, alpha: f64) -> f64 {
    let c = (-0.5 * (0.5 * alpha).ln()).sqrt();
    let (n, m) = (n as f64, m as f64);
    c * ((n + m) / (n * m)).sqrt()
}
