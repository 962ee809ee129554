//! Common truncation level solving bₙ = √B̄ₙ(bₙ), and the rate table for the
//! |x|⁻³ example.

use crate::dist::{DistributionSpec, Level};
use crate::error::{Error, Result};
use crate::matrix::{RealMatrix, Square};
use crate::moments::{build_moment_table, variance_summary, SpecMatrix};
use serde::{Deserialize, Serialize};

pub const DEFAULT_TOL_REL: f64 = 1e-10;
pub const BRACKET_LIMIT: f64 = 1e12;
const MAX_BISECTIONS: usize = 400;
const MONOTONE_GRID: usize = 33;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveStatus {
    Bisection,
    /// √B̄ₙ(b₀) was already a fixed point.
    DirectProbe,
    /// h(b) > 0 everywhere searched; bₙ is the smallest level with zero tail mass.
    SupportRadiusFallback,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FixedPointResult {
    pub b_n: f64,
    /// |bₙ² − B̄ₙ(bₙ)|
    pub residual: f64,
    pub iterations: usize,
    pub bracket: (f64, f64),
    pub status: SolveStatus,
    /// h(b) = b² − B̄ₙ(b) increased along a grid over the bracket.
    pub monotone_on_bracket: bool,
}

/// B̄ₙ with every tᵢⱼ equal to `b`.
pub fn b_bar_at(specs: &SpecMatrix, mu: &RealMatrix, b: f64) -> Result<f64> {
    let t = Square::uniform(specs.n(), Level::finite(b)?)?;
    Ok(variance_summary(&build_moment_table(specs, mu, &t, None)?).b_bar_n)
}

fn max_support_radius(specs: &SpecMatrix, mu: &RealMatrix) -> Option<f64> {
    if let (Some(s), Some(m)) = (specs.uniform_value(), mu.uniform_value()) {
        return s.support_radius(*m);
    }
    specs
        .cells()
        .map(|(i, j, s)| s.support_radius(*mu.get(i, j)))
        .try_fold(0.0_f64, |acc, r| r.map(|r| acc.max(r)))
}

/// Finds bₙ > 0 with bₙ² = B̄ₙ(bₙ) when all truncation levels are equal.
///
/// The search starts at b₀ = max(2, √n), raised to just above the support
/// radius for bounded laws, and doubles (or halves) until
/// h(b) = b² − B̄ₙ(b) changes sign, then bisects. The returned bₙ lies within
/// tol_rel·bₙ/8 of a root.
pub fn solve_truncation_level(
    specs: &SpecMatrix,
    mu: &RealMatrix,
    tol_rel: f64,
) -> Result<FixedPointResult> {
    if !(tol_rel > 0.0 && tol_rel < 1.0) {
        return Err(Error::InvalidArgument(format!("tol_rel must lie in (0, 1), got {tol_rel}")));
    }
    let h = |b: f64| -> Result<f64> { Ok(b * b - b_bar_at(specs, mu, b)?) };
    let n = specs.n() as f64;
    let b0 = n
        .sqrt()
        .max(2.0)
        .max(max_support_radius(specs, mu).unwrap_or(0.0) * (1.0 + f64::EPSILON));

    let probe = b_bar_at(specs, mu, b0)?.sqrt();
    if probe > 0.0 {
        let lo = probe * (1.0 - tol_rel);
        let hi = probe * (1.0 + tol_rel);
        let r = h(probe)?;
        if r.abs() <= 0.25 * tol_rel * probe * probe && h(lo)? < 0.0 && h(hi)? > 0.0 {
            return Ok(FixedPointResult {
                b_n: probe,
                residual: r.abs(),
                iterations: 1,
                bracket: (lo, hi),
                status: SolveStatus::DirectProbe,
                monotone_on_bracket: true,
            });
        }
    }

    let h0 = h(b0)?;
    let (mut lo, mut hi) = (b0, b0);
    if h0 < 0.0 {
        loop {
            hi *= 2.0;
            if hi > BRACKET_LIMIT {
                return Err(Error::NoBracket { lo: b0, hi: BRACKET_LIMIT });
            }
            if h(hi)? >= 0.0 {
                break;
            }
            lo = hi;
        }
    } else {
        loop {
            lo /= 2.0;
            if lo < 1.0 / BRACKET_LIMIT {
                return support_fallback(specs, mu, b0);
            }
            if h(lo)? < 0.0 {
                break;
            }
            hi = lo;
        }
    }
    let bracket = (lo, hi);

    let mut monotone = true;
    let mut prev = f64::NEG_INFINITY;
    for k in 0..MONOTONE_GRID {
        let b = lo + (hi - lo) * k as f64 / (MONOTONE_GRID - 1) as f64;
        let v = h(b)?;
        if v < prev {
            monotone = false;
        }
        prev = v;
    }

    let mut iterations = 0;
    while hi - lo > 0.125 * tol_rel * lo && iterations < MAX_BISECTIONS {
        let mid = 0.5 * (lo + hi);
        if h(mid)? < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        iterations += 1;
    }
    let b_n = 0.5 * (lo + hi);
    Ok(FixedPointResult {
        b_n,
        residual: h(b_n)?.abs(),
        iterations,
        bracket,
        status: SolveStatus::Bisection,
        monotone_on_bracket: monotone,
    })
}

fn support_fallback(specs: &SpecMatrix, mu: &RealMatrix, b0: f64) -> Result<FixedPointResult> {
    let no_bracket = Error::NoBracket { lo: 1.0 / BRACKET_LIMIT, hi: b0 };
    let radius = max_support_radius(specs, mu).ok_or(no_bracket)?;
    if !(radius > 0.0) {
        return Err(Error::NoBracket { lo: 1.0 / BRACKET_LIMIT, hi: b0 });
    }
    // the level must exceed the radius strictly for the tail to vanish
    let b_n = radius * (1.0 + f64::EPSILON);
    let residual = (b_n * b_n - b_bar_at(specs, mu, b_n)?).abs();
    Ok(FixedPointResult {
        b_n,
        residual,
        iterations: 0,
        bracket: (radius, b0.max(b_n * 2.0)),
        status: SolveStatus::SupportRadiusFallback,
        monotone_on_bracket: false,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateRow {
    pub n: u64,
    pub b_n: f64,
    pub bound: f64,
    pub bound_times_log_n: f64,
}

/// For the iid |x|⁻³ model with μ = 0 and t = bₙ: A·n(bₙ−1)/bₙ³ + n/bₙ² per n.
pub fn example_rate_report(n_list: &[u64], constant_a: f64) -> Result<Vec<RateRow>> {
    n_list
        .iter()
        .map(|&n| {
            if n < 2 {
                return Err(Error::InvalidArgument(format!("n must be at least 2, got {n}")));
            }
            let size = usize::try_from(n)
                .map_err(|_| Error::InvalidArgument(format!("n = {n} does not fit in memory indices")))?;
            let specs = Square::uniform(size, DistributionSpec::ParetoCubic)?;
            let mu = RealMatrix::zeros(size)?;
            let b = solve_truncation_level(&specs, &mu, DEFAULT_TOL_REL)?.b_n;
            let nf = n as f64;
            let bound = constant_a * nf * (b - 1.0) / (b * b * b) + nf / (b * b);
            Ok(RateRow { n, b_n: b, bound, bound_times_log_n: bound * nf.ln() })
        })
        .collect()
}

pub fn write_rate_report_csv<W: std::io::Write>(rows: &[RateRow], writer: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pareto(n: usize) -> (SpecMatrix, RealMatrix) {
        (
            Square::uniform(n, DistributionSpec::ParetoCubic).unwrap(),
            RealMatrix::zeros(n).unwrap(),
        )
    }

    #[test]
    fn pareto_fixed_point_residual() {
        for &n in &[3usize, 10, 1000, 1_000_000] {
            let (s, m) = pareto(n);
            let r = solve_truncation_level(&s, &m, DEFAULT_TOL_REL).unwrap();
            let b = r.b_n;
            let g = b * b - 2.0 * n as f64 * b.ln();
            assert!(g.abs() <= 1e-9 * b * b, "n={n}: b={b} g={g}");
            assert!(r.residual <= DEFAULT_TOL_REL * b * b);
            assert!(r.bracket.0 < b && b < r.bracket.1);
            assert!(r.monotone_on_bracket);
            assert!(b > (n as f64).sqrt());
        }
    }

    #[test]
    fn pareto_two_has_no_root() {
        let (s, m) = pareto(2);
        assert!(matches!(
            solve_truncation_level(&s, &m, DEFAULT_TOL_REL),
            Err(Error::NoBracket { .. })
        ));
    }

    #[test]
    fn point_mass_is_one_probe() {
        let c = RealMatrix::from_rows(vec![
            vec![3.0, -1.0, -2.0],
            vec![-1.0, 2.0, -1.0],
            vec![-2.0, -1.0, 3.0],
        ])
        .unwrap();
        let specs = c.map(|&v| DistributionSpec::point_mass(v));
        let r = solve_truncation_level(&specs, &c.map(|_| 0.0), DEFAULT_TOL_REL).unwrap();
        let expect = (c.star().sum_by(|v| v * v) / 2.0).sqrt();
        assert_eq!(r.status, SolveStatus::DirectProbe);
        assert_eq!(r.iterations, 1);
        assert!((r.b_n - expect).abs() < 1e-14 * expect);
    }

    #[test]
    fn zero_variance_point_masses_fall_back() {
        // B̄ₙ(b) = 0 for b > 1 but the cut at b ≤ 1 keeps h positive
        let specs = Square::uniform(3, DistributionSpec::point_mass(1.0)).unwrap();
        let r = solve_truncation_level(&specs, &RealMatrix::zeros(3).unwrap(), DEFAULT_TOL_REL)
            .unwrap();
        assert_eq!(r.status, SolveStatus::SupportRadiusFallback);
        assert!(r.b_n > 1.0 && r.b_n < 1.0 + 1e-12);
    }

    #[test]
    fn rate_report_algebra() {
        let rows = example_rate_report(&[1000, 100_000], 0.0).unwrap();
        for r in &rows {
            assert!((r.bound - 1.0 / (2.0 * r.b_n.ln())).abs() < 1e-8 * r.bound);
        }
        assert!(rows[1].bound < rows[0].bound);
        assert!(example_rate_report(&[1], 1.0).is_err());
    }

    #[test]
    fn rate_report_csv_header() {
        let rows = example_rate_report(&[1000], 1.0).unwrap();
        let mut buf = Vec::new();
        write_rate_report_csv(&rows, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("n,b_n,bound,bound_times_log_n\n1000,"), "{text}");
    }
}
