//! Monte-Carlo simulation of Sn and S̄n under a uniform random permutation,
//! Kolmogorov distance estimates with DKW bands, and exact enumeration for small n.
//!
//! Replicate r draws from its own ChaCha8 stream (global seed, stream id r), so a
//! run is reproducible bit for bit whatever the number of worker threads.

use crate::error::{Error, Result};
use crate::matrix::{compensated_sum, RealMatrix};
use crate::moments::{LevelMatrix, SpecMatrix};
use crate::normal;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::io::Write;
use std::path::Path;

/// Fewer replicates than this give a DKW radius above 0.12; estimates are refused.
pub const MIN_REPLICATES: usize = 100;
pub const DEFAULT_ALPHA: f64 = 0.05;
/// 8! = 40320 atoms.
pub const MAX_ENUMERATION_N: usize = 8;

/// Uniform random permutation of 0..n (Fisher–Yates, one bounded draw per position).
pub fn sample_uniform_permutation<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<usize> {
    let mut perm: Vec<usize> = (0..n).collect();
    for i in (1..n).rev() {
        let j = rng.random_range(0..=i);
        perm.swap(i, j);
    }
    perm
}

/// Random stream for replicate `index` under a global seed.
pub fn replicate_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

fn default_alpha() -> f64 {
    DEFAULT_ALPHA
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McConfig {
    pub replicates: usize,
    pub seed: u64,
    /// Simulate S̄n instead of Sn.
    #[serde(default)]
    pub truncated: bool,
    pub a_n: f64,
    pub b_n: f64,
    #[serde(default = "default_alpha")]
    pub alpha: f64,
}

/// √(ln(2/α) / (2N))
pub fn dkw_epsilon(replicates: usize, alpha: f64) -> f64 {
    ((2.0 / alpha).ln() / (2.0 * replicates as f64)).sqrt()
}

/// sup_x |F_N(x) − Φ(x)| for a sorted sample, evaluated at the jump points.
pub fn kolmogorov_distance_sorted(sorted: &[f64]) -> f64 {
    let n = sorted.len() as f64;
    sorted
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let phi = normal::cdf(x);
            let above = (i + 1) as f64 / n - phi;
            let below = phi - i as f64 / n;
            above.abs().max(below.abs())
        })
        .fold(0.0, f64::max)
}

/// Unstandardized replicate values in replicate order.
#[derive(Debug, Clone, PartialEq)]
pub struct RawSample {
    pub values: Vec<f64>,
    pub truncated: bool,
}

impl RawSample {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn mean(&self) -> f64 {
        compensated_sum(self.values.iter().copied()) / self.values.len() as f64
    }

    /// Unbiased sample variance.
    pub fn variance(&self) -> f64 {
        let m = self.mean();
        compensated_sum(self.values.iter().map(|v| (v - m) * (v - m)))
            / (self.values.len() as f64 - 1.0)
    }

    /// Standard error of [`Self::variance`], √((m₄ − s⁴)/N) with m₄ the fourth central moment.
    pub fn variance_std_error(&self) -> f64 {
        let m = self.mean();
        let n = self.values.len() as f64;
        let m2 = compensated_sum(self.values.iter().map(|v| (v - m).powi(2))) / n;
        let m4 = compensated_sum(self.values.iter().map(|v| (v - m).powi(4))) / n;
        ((m4 - m2 * m2).max(0.0) / n).sqrt()
    }

    /// Standardizes by (x − an)/bn and computes the Kolmogorov distance to Φ.
    pub fn standardize(&self, a_n: f64, b_n: f64, alpha: f64) -> Result<McResult> {
        if self.values.len() < MIN_REPLICATES {
            return Err(Error::TooFewReplicates(self.values.len()));
        }
        if !(b_n > 0.0) || !b_n.is_finite() {
            return Err(Error::NonpositiveScale(b_n));
        }
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(Error::InvalidArgument(format!("alpha must lie in (0, 1), got {alpha}")));
        }
        let mut sorted: Vec<f64> = self.values.iter().map(|v| (v - a_n) / b_n).collect();
        sorted.sort_by(f64::total_cmp);
        Ok(McResult {
            delta_hat: kolmogorov_distance_sorted(&sorted),
            dkw_epsilon: dkw_epsilon(sorted.len(), alpha),
            alpha,
            replicates: sorted.len(),
            a_n,
            b_n,
            truncated: self.truncated,
            raw_mean: self.mean(),
            raw_variance: self.variance(),
            sorted_standardized_sample: sorted,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct McResult {
    #[serde(skip)]
    pub sorted_standardized_sample: Vec<f64>,
    pub delta_hat: f64,
    pub dkw_epsilon: f64,
    pub alpha: f64,
    pub replicates: usize,
    pub a_n: f64,
    pub b_n: f64,
    pub truncated: bool,
    pub raw_mean: f64,
    pub raw_variance: f64,
}

fn check_shapes(specs: &SpecMatrix, mu: &RealMatrix, t: &LevelMatrix) -> Result<()> {
    let n = specs.n();
    if mu.n() != n || t.n() != n {
        return Err(Error::DimensionMismatch(format!(
            "specs {n}×{n}, mu {}×{0}, t {}×{1}",
            mu.n(),
            t.n()
        )));
    }
    match specs.uniform_value() {
        Some(s) => s.validate().map_err(|e| e.at_cell(0, 0)),
        None => specs
            .cells()
            .try_for_each(|(i, j, s)| s.validate().map_err(|e| e.at_cell(i, j))),
    }
}

/// Draws `replicates` values of Sn (or S̄n when `truncated`).
///
/// Each replicate samples a permutation and then the n cells it selects. The
/// cells are independent, so sampling only the selected ones has the same joint
/// law as drawing a whole fresh matrix.
pub fn simulate_raw(
    specs: &SpecMatrix,
    mu: &RealMatrix,
    t: &LevelMatrix,
    replicates: usize,
    seed: u64,
    truncated: bool,
) -> Result<RawSample> {
    check_shapes(specs, mu, t)?;
    let n = specs.n();
    let values = (0..replicates as u64)
        .into_par_iter()
        .map(|r| {
            let mut rng = replicate_rng(seed, r);
            let perm = sample_uniform_permutation(n, &mut rng);
            let mut sum = 0.0;
            for (i, &j) in perm.iter().enumerate() {
                let x = specs.get(i, j).sample(&mut rng);
                sum += if truncated {
                    // μ + X̄ is x inside the window and μ outside
                    let m = *mu.get(i, j);
                    if (x - m).abs() < t.get(i, j).value() {
                        x
                    } else {
                        m
                    }
                } else {
                    x
                };
            }
            sum
        })
        .collect();
    Ok(RawSample { values, truncated })
}

pub fn simulate(
    specs: &SpecMatrix,
    mu: &RealMatrix,
    t: &LevelMatrix,
    config: &McConfig,
) -> Result<McResult> {
    if config.replicates < MIN_REPLICATES {
        return Err(Error::TooFewReplicates(config.replicates));
    }
    simulate_raw(specs, mu, t, config.replicates, config.seed, config.truncated)?
        .standardize(config.a_n, config.b_n, config.alpha)
}

/// Visits every permutation of 0..n (Heap's algorithm).
fn for_each_permutation(n: usize, mut visit: impl FnMut(&[usize])) {
    let mut perm: Vec<usize> = (0..n).collect();
    let mut counters = vec![0usize; n];
    visit(&perm);
    let mut i = 0;
    while i < n {
        if counters[i] < i {
            if i % 2 == 0 {
                perm.swap(0, i);
            } else {
                perm.swap(counters[i], i);
            }
            visit(&perm);
            counters[i] += 1;
            i = 0;
        } else {
            counters[i] = 0;
            i += 1;
        }
    }
}

/// All n! values of Σ c_{iπ(i)}, each with probability 1/n!.
pub fn enumerate_sums(c: &RealMatrix) -> Result<Vec<f64>> {
    let n = c.n();
    if n > MAX_ENUMERATION_N {
        return Err(Error::TooLarge { n, max: MAX_ENUMERATION_N });
    }
    let rows = c.to_rows();
    let mut sums = Vec::with_capacity((1..=n).product());
    for_each_permutation(n, |perm| {
        sums.push(perm.iter().enumerate().map(|(i, &j)| rows[i][j]).sum());
    });
    Ok(sums)
}

/// Exact Kolmogorov distance of (Sn − an)/bn from Φ for a degenerate matrix.
pub fn enumerate_exact_delta(c: &RealMatrix, a_n: f64, b_n: f64) -> Result<f64> {
    if !(b_n > 0.0) || !b_n.is_finite() {
        return Err(Error::NonpositiveScale(b_n));
    }
    let mut atoms: Vec<f64> = enumerate_sums(c)?.into_iter().map(|s| (s - a_n) / b_n).collect();
    atoms.sort_by(f64::total_cmp);
    Ok(kolmogorov_distance_sorted(&atoms))
}

/// Exact D Sn for a degenerate matrix, by enumeration.
pub fn exact_variance(c: &RealMatrix) -> Result<f64> {
    let sums = enumerate_sums(c)?;
    let k = sums.len() as f64;
    let mean = compensated_sum(sums.iter().copied()) / k;
    Ok(compensated_sum(sums.iter().map(|s| (s - mean) * (s - mean))) / k)
}

/// Upper limit on dumped sample sizes unless explicitly raised.
pub const DEFAULT_DUMP_LIMIT: usize = 10_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DumpFormat {
    Csv,
    /// Little-endian f64, no header.
    Binary,
}

/// Writes a single-column sample, refusing samples above `limit` values.
pub fn dump_sample(path: &Path, values: &[f64], format: DumpFormat, limit: usize) -> std::io::Result<()> {
    if values.len() > limit {
        return Err(std::io::Error::new(
            std::io::ErrorKind::InvalidInput,
            format!("sample of {} values exceeds the dump limit {limit}", values.len()),
        ));
    }
    let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
    match format {
        DumpFormat::Csv => {
            writeln!(out, "value")?;
            for v in values {
                writeln!(out, "{v}")?;
            }
        }
        DumpFormat::Binary => {
            for v in values {
                out.write_all(&v.to_le_bytes())?;
            }
        }
    }
    out.flush()
}
