//! Shared test helpers: an adaptive Simpson integrator written independently
//! of the library, random centered matrices and scenario builders.
#![allow(dead_code)]

use comb_clt::bounds::TheoremId;
use comb_clt::scenario::{Cells, Centering, McSettings, MuMode, NamedCentering, Norming, Scenario, Truncation};
use comb_clt::{DistributionSpec, Level, RealMatrix};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn simpson_step<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let m = 0.5 * (a + b);
    let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
    let (flm, frm) = (f(lm), f(rm));
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        return left + right + delta / 15.0;
    }
    simpson_step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
        + simpson_step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
}

/// ∫ₐᵇ f by adaptive Simpson to absolute tolerance `tol`.
pub fn simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> f64 {
    if b <= a {
        return 0.0;
    }
    // a few fixed panels so narrow features are not skipped
    let panels = 16;
    let h = (b - a) / panels as f64;
    (0..panels)
        .map(|k| {
            let (lo, hi) = (a + k as f64 * h, a + (k + 1) as f64 * h);
            let (flo, fmid, fhi) = (f(lo), f(0.5 * (lo + hi)), f(hi));
            let whole = (hi - lo) / 6.0 * (flo + 4.0 * fmid + fhi);
            simpson_step(&f, lo, hi, flo, fmid, fhi, whole, tol / panels as f64, 50)
        })
        .sum()
}

/// ∫ over the union of intervals, each piece integrated separately.
pub fn simpson_pieces<F: Fn(f64) -> f64>(f: F, cuts: &[f64], tol: f64) -> f64 {
    cuts.windows(2).map(|w| simpson(&f, w[0], w[1], tol)).sum()
}

pub fn normal_density(mean: f64, sd: f64) -> impl Fn(f64) -> f64 {
    move |x| {
        let z = (x - mean) / sd;
        (-0.5 * z * z).exp() / (sd * (2.0 * std::f64::consts::PI).sqrt())
    }
}

/// Oracle moments of X̄ = (X − μ)1{|X − μ| < t} for a normal law, by quadrature:
/// (a_bar, var_bar, abs3_bar, tail).
pub fn normal_truncated_oracle(mean: f64, sd: f64, mu: f64, t: f64) -> (f64, f64, f64, f64) {
    let f = normal_density(mean, sd);
    let (lo, hi) = (mu - t, mu + t);
    let span = 12.0 * sd;
    let a = lo.max(mean - span);
    let b = hi.min(mean + span);
    let mut cuts = vec![a];
    for c in [mean - 2.0 * sd, mean, mean + 2.0 * sd, mu] {
        if c > a && c < b {
            cuts.push(c);
        }
    }
    cuts.push(b);
    cuts.sort_by(f64::total_cmp);
    let tol = 1e-15;
    let m0 = simpson_pieces(|x| f(x), &cuts, tol);
    let m1 = simpson_pieces(|x| (x - mu) * f(x), &cuts, tol);
    let m2 = simpson_pieces(|x| (x - mu).powi(2) * f(x), &cuts, tol);
    let m3 = simpson_pieces(|x| (x - mu).abs().powi(3) * f(x), &cuts, tol);
    (m1, m2 - m1 * m1, m3, 1.0 - m0)
}

/// Oracle for the |x|⁻³ law at μ = 0 and level b ≥ 1: (var_bar, abs3_bar, tail).
/// The tail integral is mapped onto a finite interval with u = 1/x.
pub fn pareto_oracle(b: f64) -> (f64, f64, f64) {
    let tol = 1e-14;
    // integrands over 1 < x < b, doubled for the mirror side
    let var = 2.0 * simpson(|x| x * x * x.powi(-3), 1.0, b, tol);
    let abs3 = 2.0 * simpson(|_| 1.0, 1.0, b, tol);
    // ∫_b^∞ x⁻³ dx = ∫_0^{1/b} u du
    let tail = 2.0 * simpson(|u| u, 0.0, 1.0 / b, tol);
    (var, abs3, tail)
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Row/column-centered random matrix, computed here without the library's star transform.
pub fn random_centered(n: usize, scale: f64, rng: &mut impl Rng) -> Vec<Vec<f64>> {
    let m: Vec<Vec<f64>> = (0..n)
        .map(|_| (0..n).map(|_| scale * (rng.random::<f64>() * 2.0 - 1.0)).collect())
        .collect();
    let nf = n as f64;
    let row: Vec<f64> = m.iter().map(|r| r.iter().sum::<f64>() / nf).collect();
    let col: Vec<f64> = (0..n).map(|j| m.iter().map(|r| r[j]).sum::<f64>() / nf).collect();
    let all = row.iter().sum::<f64>() / nf;
    (0..n)
        .map(|i| (0..n).map(|j| m[i][j] - row[i] - col[j] + all).collect())
        .collect()
}

pub fn real(rows: &[Vec<f64>]) -> RealMatrix {
    RealMatrix::from_rows(rows.to_vec()).unwrap()
}

/// Σ c*² / (n − 1) by a plain loop.
pub fn permutation_variance(rows: &[Vec<f64>]) -> f64 {
    let n = rows.len();
    let nf = n as f64;
    let row: Vec<f64> = rows.iter().map(|r| r.iter().sum::<f64>() / nf).collect();
    let col: Vec<f64> = (0..n).map(|j| rows.iter().map(|r| r[j]).sum::<f64>() / nf).collect();
    let all = row.iter().sum::<f64>() / nf;
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            let v = rows[i][j] - row[i] - col[j] + all;
            s += v * v;
        }
    }
    s / (nf - 1.0)
}

/// A finite-variance cell law with mean `c`: normal or a two/three-point law.
pub fn random_cell(c: f64, rng: &mut impl Rng) -> DistributionSpec {
    match rng.random_range(0..3) {
        0 => DistributionSpec::normal(c, rng.random_range(0.3..1.5)),
        1 => {
            let h = rng.random_range(0.2..2.0);
            DistributionSpec::discrete(vec![(c - h, 0.5), (c + h, 0.5)])
        }
        _ => {
            // skewed three-point law with mean c
            let d = rng.random_range(0.5..2.0);
            DistributionSpec::discrete(vec![(c - d, 0.4), (c, 0.4), (c + 2.0 * d, 0.2)])
        }
    }
}

/// One randomized finite-variance scenario of the domination suite.
pub fn domination_scenario(index: usize, replicates: usize) -> Scenario {
    let mut r = rng(9_000 + index as u64);
    let n = [10, 30, 100][index % 3];
    let c = random_centered(n, 0.8, &mut r);
    let cells: Vec<Vec<DistributionSpec>> = c
        .iter()
        .map(|row| row.iter().map(|&v| random_cell(v, &mut r)).collect())
        .collect();
    let truncation = match index % 4 {
        0 => Truncation::Infinite,
        1 => Truncation::Scalar(Level::Finite(r.random_range(1.0..3.0))),
        _ => Truncation::Explicit(
            (0..n)
                .map(|_| {
                    (0..n)
                        .map(|_| {
                            if r.random_bool(0.3) {
                                Level::Infinite
                            } else {
                                Level::Finite(r.random_range(0.8..3.0))
                            }
                        })
                        .collect()
                })
                .collect(),
        ),
    };
    Scenario {
        name: format!("domination-{index:02}"),
        n,
        cells: Cells::Matrix(cells),
        mu: if index % 5 < 3 { MuMode::Zeros } else { MuMode::EqualToC },
        truncation,
        a_n: if index % 2 == 0 { Centering::Named(NamedCentering::EBar) } else { Centering::Value(0.0) },
        b_n: Norming::SqrtBBar,
        b_n_scale: if (index / 2) % 2 == 0 { 1.0 } else { 1.2 },
        theorems: vec![TheoremId::T1, TheoremId::T4],
        constant_a: 1.0,
        g: None,
        delta: None,
        exponent_a: None,
        mc: Some(McSettings { replicates, seed: 500 + index as u64, alpha: 0.05 }),
        epsilons: vec![],
        sequence: vec![],
    }
}

pub fn bundled_scenarios_dir() -> std::path::PathBuf {
    std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scenarios")
}
