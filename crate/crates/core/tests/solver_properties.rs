mod common;

use comb_clt::bounds::psi_theta_upsilon;
use comb_clt::solver::{self, solve_truncation_level, SolveStatus, DEFAULT_TOL_REL};
use comb_clt::{build_moment_table, variance_summary, DistributionSpec, Error, Level, RealMatrix, Square};
use common::normal_truncated_oracle;
use proptest::prelude::*;

/// Largest root of b² = 2n ln b by Newton's method from above.
fn pareto_root(n: f64) -> f64 {
    let mut b = (2.0 * n * n.ln()).sqrt().max(2.0);
    for _ in 0..100 {
        let f = b * b - 2.0 * n * b.ln();
        let df = 2.0 * b - 2.0 * n / b;
        let next = b - f / df;
        if (next - b).abs() <= 1e-15 * b {
            return next;
        }
        b = next;
    }
    b
}

fn pareto(n: usize) -> (comb_clt::moments::SpecMatrix, RealMatrix) {
    (Square::uniform(n, DistributionSpec::ParetoCubic).unwrap(), RealMatrix::zeros(n).unwrap())
}

#[test]
fn pareto_root_matches_newton() {
    for n in [3usize, 30, 1000, 123_456, 10_000_000] {
        let (s, m) = pareto(n);
        let r = solve_truncation_level(&s, &m, DEFAULT_TOL_REL).unwrap();
        let oracle = pareto_root(n as f64);
        assert!((r.b_n - oracle).abs() <= DEFAULT_TOL_REL * oracle, "n={n}: {} vs {oracle}", r.b_n);
        assert_eq!(r.status, SolveStatus::Bisection);
    }
}

#[test]
fn pareto_order_two_reports_no_bracket() {
    let (s, m) = pareto(2);
    assert!(matches!(solve_truncation_level(&s, &m, DEFAULT_TOL_REL), Err(Error::NoBracket { .. })));
}

/// Largest root of b² = n·D X̄(b) for iid N(0, 1), from a downward scan and bisection.
fn normal_root(n: usize) -> Option<f64> {
    let h = |b: f64| b * b - n as f64 * normal_truncated_oracle(0.0, 1.0, 0.0, b).1;
    let mut hi = 4.0 * (n as f64).sqrt();
    let mut lo = hi;
    while h(lo) >= 0.0 {
        hi = lo;
        lo -= 0.01;
        if lo <= 0.01 {
            return None;
        }
    }
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        if h(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Some(0.5 * (lo + hi))
}

#[test]
fn normal_root_matches_quadrature() {
    // μ = 0 and symmetry make B̄n(b) = n·D X̄
    for n in [3usize, 8, 40] {
        let specs = Square::uniform(n, DistributionSpec::normal(0.0, 1.0)).unwrap();
        let mu = RealMatrix::zeros(n).unwrap();
        let got = solve_truncation_level(&specs, &mu, DEFAULT_TOL_REL);
        match normal_root(n) {
            Some(oracle) => {
                let b = got.unwrap().b_n;
                assert!((b - oracle).abs() <= 1e-8 * oracle, "n={n}: {b} vs {oracle}");
            }
            None => assert!(matches!(got, Err(Error::NoBracket { .. })), "n={n}: {got:?}"),
        }
    }
    assert!(normal_root(3).is_none() && normal_root(8).is_some());
}

#[test]
fn solved_level_zeroes_theta_and_upsilon() {
    let n = 30;
    let (s, m) = pareto(n);
    let b = solve_truncation_level(&s, &m, DEFAULT_TOL_REL).unwrap().b_n;
    let table = build_moment_table(&s, &m, &Square::uniform(n, Level::Finite(b)).unwrap(), None).unwrap();
    let sum = variance_summary(&table);
    let p = psi_theta_upsilon(&sum, &table, 0.0, b).unwrap();
    assert_eq!(p.theta, 0.0);
    assert!(p.upsilon < 1e-10, "{}", p.upsilon);
}

#[test]
fn rate_report_matches_closed_form() {
    let rows = solver::example_rate_report(&[1000, 100_000], 1.0).unwrap();
    for r in rows {
        let b = pareto_root(r.n as f64);
        let nf = r.n as f64;
        let expect = nf * (b - 1.0) / b.powi(3) + nf / (b * b);
        assert!((r.bound - expect).abs() <= 1e-8 * expect);
        assert!((r.bound_times_log_n - expect * nf.ln()).abs() <= 1e-8 * expect * nf.ln());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn solution_is_a_fixed_point(n in 6usize..60, mean in -1.0..1.0f64, sd in 0.2..3.0f64) {
        let specs = Square::uniform(n, DistributionSpec::normal(mean, sd)).unwrap();
        let mu = Square::uniform(n, mean).unwrap();
        let r = solve_truncation_level(&specs, &mu, DEFAULT_TOL_REL).unwrap();
        let bb = solver::b_bar_at(&specs, &mu, r.b_n).unwrap();
        prop_assert!((r.b_n * r.b_n - bb).abs() <= 1e-9 * bb);
        prop_assert!(r.bracket.0 <= r.b_n && r.b_n <= r.bracket.1);
    }

    #[test]
    fn small_normal_models_have_no_fixed_point(n in 2usize..4, mean in -1.0..1.0f64, sd in 1e-3..1e3f64) {
        // n·D X̄(b) < b² for every b when n ≤ 3
        let specs = Square::uniform(n, DistributionSpec::normal(mean, sd)).unwrap();
        let mu = Square::uniform(n, mean).unwrap();
        let got = solve_truncation_level(&specs, &mu, DEFAULT_TOL_REL);
        prop_assert!(matches!(got, Err(Error::NoBracket { .. })), "{:?}", got);
    }
}

