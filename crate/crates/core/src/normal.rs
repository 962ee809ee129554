//! Standard normal density and distribution function.

use libm::erfc;
use std::f64::consts::{FRAC_1_SQRT_2, PI};

/// 1/√(2π)
pub const INV_SQRT_2PI: f64 = 0.398_942_280_401_432_7;

/// 1/√(2πe)
pub fn inv_sqrt_2pi_e() -> f64 {
    1.0 / (2.0 * PI * std::f64::consts::E).sqrt()
}

/// φ(x); zero at ±∞.
pub fn pdf(x: f64) -> f64 {
    if x.is_infinite() {
        return 0.0;
    }
    INV_SQRT_2PI * (-0.5 * x * x).exp()
}

/// Φ(x), accurate in both tails.
pub fn cdf(x: f64) -> f64 {
    0.5 * erfc(-x * FRAC_1_SQRT_2)
}

/// 1 − Φ(x) without cancellation.
pub fn sf(x: f64) -> f64 {
    0.5 * erfc(x * FRAC_1_SQRT_2)
}

/// P(lo ≤ Z ≤ hi) for a standard normal Z, picking the tail that avoids cancellation.
pub fn interval_prob(lo: f64, hi: f64) -> f64 {
    if hi <= lo {
        return 0.0;
    }
    if lo > 0.0 {
        sf(lo) - sf(hi)
    } else if hi < 0.0 {
        cdf(hi) - cdf(lo)
    } else {
        1.0 - cdf(lo) - sf(hi)
    }
}

/// Partial moments E[Zᵏ; lo < Z < hi] for k = 0..=3. Endpoints may be infinite.
pub fn partial_moments(lo: f64, hi: f64) -> [f64; 4] {
    if hi <= lo {
        return [0.0; 4];
    }
    if hi - lo <= NARROW_WINDOW {
        return narrow_partial_moments(lo, hi);
    }
    let (pl, ph) = (pdf(lo), pdf(hi));
    // x·φ(x) and x²·φ(x) vanish at ±∞
    let xl = if lo.is_infinite() { 0.0 } else { lo * pl };
    let xh = if hi.is_infinite() { 0.0 } else { hi * ph };
    let x2l = if lo.is_infinite() { 0.0 } else { lo * lo * pl };
    let x2h = if hi.is_infinite() { 0.0 } else { hi * hi * ph };
    let m0 = interval_prob(lo, hi);
    let m1 = pl - ph;
    let m2 = m0 + xl - xh;
    let m3 = (2.0 * pl + x2l) - (2.0 * ph + x2h);
    [m0, m1, m2, m3]
}

/// Below this width the closed forms cancel to a few digits, so the window is integrated directly.
const NARROW_WINDOW: f64 = 1.0;

fn narrow_partial_moments(lo: f64, hi: f64) -> [f64; 4] {
    let peak = pdf(if lo > 0.0 { lo } else if hi < 0.0 { hi } else { 0.0 });
    let reach = lo.abs().max(hi.abs());
    let mut out = [0.0; 4];
    for (k, m) in out.iter_mut().enumerate() {
        let scale = (hi - lo) * peak * reach.powi(k as i32);
        let f = |x: f64| x.powi(k as i32) * pdf(x);
        *m = quadrature::integrate(f, lo, hi, 1e-16 * scale.max(f64::MIN_POSITIVE)).integral;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cdf_reference_values() {
        assert!((cdf(0.0) - 0.5).abs() < 1e-16);
        let close = |a: f64, b: f64| (a - b).abs() <= 1e-14 * b;
        assert!(close(cdf(1.0), 0.841_344_746_068_542_9), "{}", cdf(1.0));
        assert!(close(cdf(-1.96), 0.024_997_895_148_220_43), "{}", cdf(-1.96));
        assert!(close(sf(10.0), 7.619_853_024_160_527e-24), "{}", sf(10.0));
    }

    #[test]
    fn full_line_moments() {
        let m = partial_moments(f64::NEG_INFINITY, f64::INFINITY);
        assert!((m[0] - 1.0).abs() < 1e-15);
        assert!(m[1].abs() < 1e-15);
        assert!((m[2] - 1.0).abs() < 1e-15);
        assert!(m[3].abs() < 1e-15);
    }

    #[test]
    fn interval_prob_is_symmetric() {
        for &(a, b) in &[(-1.0, 1.0), (0.5, 3.0), (-7.0, -2.0)] {
            let p = interval_prob(a, b);
            let q = interval_prob(-b, -a);
            assert!((p - q).abs() < 1e-16, "{a} {b}");
        }
    }

    #[test]
    fn narrow_window_keeps_relative_precision() {
        let a: f64 = 1e-4;
        let m = partial_moments(-a, a);
        // ∫ z²φ over (−a, a) = φ(0)(2a³/3 − a⁵/5 + …)
        let series = INV_SQRT_2PI * (2.0 * a.powi(3) / 3.0 - a.powi(5) / 5.0);
        assert!((m[2] - series).abs() <= 1e-12 * series, "{} vs {series}", m[2]);
        assert!(m[1].abs() <= 1e-16 * m[2]);
    }

    #[test]
    fn both_branches_agree_near_the_switch() {
        let (lo, hi) = (0.3, 0.3 + NARROW_WINDOW);
        let direct = narrow_partial_moments(lo, hi);
        let pl = pdf(lo);
        let ph = pdf(hi);
        let closed = [
            interval_prob(lo, hi),
            pl - ph,
            interval_prob(lo, hi) + lo * pl - hi * ph,
            (2.0 + lo * lo) * pl - (2.0 + hi * hi) * ph,
        ];
        for k in 0..4 {
            assert!((direct[k] - closed[k]).abs() <= 1e-13 * closed[k].abs(), "k={k}: {} vs {}", direct[k], closed[k]);
        }
    }
}
