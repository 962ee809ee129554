//! Per-cell laws of the random matrix and their exact truncated moments.
//!
//! For a cell X with centering μ and truncation level t the truncated variable is
//! `X̄ = (X − μ)·1{|X − μ| < t}`. Every built-in law evaluates the moments of X̄
//! in closed form (or as an exact finite sum); no quadrature is involved here.

use crate::error::{Error, Result};
use crate::normal;
use rand::Rng;
use rand_distr::{Distribution, Open01, StandardNormal};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use std::fmt;

/// Tolerance on the total mass of a finite discrete law.
pub const PROB_SUM_TOL: f64 = 1e-12;

/// A truncation level in (0, +∞]. Infinity is a distinct value, not a large float.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Level {
    Finite(f64),
    Infinite,
}

impl Level {
    pub fn finite(t: f64) -> Result<Level> {
        if t.is_nan() || t <= 0.0 {
            return Err(Error::InvalidTruncation(t));
        }
        if t.is_infinite() {
            return Ok(Level::Infinite);
        }
        Ok(Level::Finite(t))
    }

    pub fn value(self) -> f64 {
        match self {
            Level::Finite(t) => t,
            Level::Infinite => f64::INFINITY,
        }
    }

    pub fn is_infinite(self) -> bool {
        matches!(self, Level::Infinite)
    }

    fn validate(self) -> Result<()> {
        match self {
            Level::Finite(t) if !(t > 0.0) || t.is_infinite() => Err(Error::InvalidTruncation(t)),
            _ => Ok(()),
        }
    }
}

impl fmt::Display for Level {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Level::Finite(t) => write!(f, "{t}"),
            Level::Infinite => f.write_str("inf"),
        }
    }
}

// JSON has no infinity: finite levels are numbers, +∞ is the string "inf".
impl Serialize for Level {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Level::Finite(t) => s.serialize_f64(*t),
            Level::Infinite => s.serialize_str("inf"),
        }
    }
}

impl<'de> Deserialize<'de> for Level {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Str(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(t) => Level::finite(t).map_err(serde::de::Error::custom),
            Raw::Str(s) if matches!(s.as_str(), "inf" | "+inf" | "infinity") => Ok(Level::Infinite),
            Raw::Str(s) => Err(serde::de::Error::custom(format!(
                "invalid truncation level {s:?} (expected a positive number or \"inf\")"
            ))),
        }
    }
}

/// Law of a single matrix cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DistributionSpec {
    PointMass {
        value: f64,
    },
    /// Finitely many atoms given as `(value, probability)` pairs.
    Discrete {
        atoms: Vec<(f64, f64)>,
    },
    Normal {
        mean: f64,
        stddev: f64,
    },
    /// Density |x|⁻³ on |x| > 1: mean zero, infinite variance.
    ParetoCubic,
    /// `shift + scale · base`.
    Affine {
        base: Box<DistributionSpec>,
        shift: f64,
        scale: f64,
    },
}

/// Moments of the truncated variable `X̄ = (X − μ)·1{|X − μ| < t}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TruncatedMomentSet {
    pub mu: f64,
    pub t: Level,
    /// E X̄
    pub a_bar: f64,
    /// D X̄
    pub var_bar: f64,
    /// E |X̄|³
    pub abs3_bar: f64,
    /// P(|X − μ| ≥ t)
    pub tail: f64,
    /// E (X − μ)² 1{|X − μ| ≥ s}, with s = √Bn when requested.
    pub alpha: Option<f64>,
    /// E |X − μ|³ 1{|X − μ| < s}
    pub beta: Option<f64>,
}

impl DistributionSpec {
    pub fn point_mass(value: f64) -> Self {
        DistributionSpec::PointMass { value }
    }

    pub fn normal(mean: f64, stddev: f64) -> Self {
        DistributionSpec::Normal { mean, stddev }
    }

    pub fn discrete(atoms: Vec<(f64, f64)>) -> Self {
        DistributionSpec::Discrete { atoms }
    }

    pub fn affine(base: DistributionSpec, shift: f64, scale: f64) -> Self {
        DistributionSpec::Affine {
            base: Box::new(base),
            shift,
            scale,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            DistributionSpec::PointMass { value } => {
                if !value.is_finite() {
                    return Err(Error::InvalidDistribution(format!(
                        "point mass at non-finite value {value}"
                    )));
                }
            }
            DistributionSpec::Discrete { atoms } => {
                if atoms.is_empty() {
                    return Err(Error::InvalidDistribution("discrete law has no atoms".into()));
                }
                let mut total = 0.0;
                for &(v, p) in atoms {
                    if !v.is_finite() {
                        return Err(Error::InvalidDistribution(format!("non-finite atom {v}")));
                    }
                    if !(p >= 0.0) || !p.is_finite() {
                        return Err(Error::InvalidDistribution(format!(
                            "atom {v} has invalid probability {p}"
                        )));
                    }
                    total += p;
                }
                if (total - 1.0).abs() > PROB_SUM_TOL {
                    return Err(Error::InvalidDistribution(format!(
                        "atom probabilities sum to {total}, not 1"
                    )));
                }
            }
            DistributionSpec::Normal { mean, stddev } => {
                if !mean.is_finite() || !stddev.is_finite() || !(*stddev > 0.0) {
                    return Err(Error::InvalidDistribution(format!(
                        "normal requires finite mean and stddev > 0, got ({mean}, {stddev})"
                    )));
                }
            }
            DistributionSpec::ParetoCubic => {}
            DistributionSpec::Affine { base, shift, scale } => {
                if !shift.is_finite() || !scale.is_finite() || *scale == 0.0 {
                    return Err(Error::InvalidDistribution(format!(
                        "affine map needs finite shift and nonzero scale, got ({shift}, {scale})"
                    )));
                }
                base.validate()?;
            }
        }
        Ok(())
    }

    /// E X.
    pub fn mean(&self) -> Result<f64> {
        Ok(match self {
            DistributionSpec::PointMass { value } => *value,
            DistributionSpec::Discrete { atoms } => atoms.iter().map(|&(v, p)| v * p).sum(),
            DistributionSpec::Normal { mean, .. } => *mean,
            DistributionSpec::ParetoCubic => 0.0,
            DistributionSpec::Affine { base, shift, scale } => shift + scale * base.mean()?,
        })
    }

    /// D X; an error for laws without a second moment.
    pub fn variance(&self) -> Result<f64> {
        Ok(match self {
            DistributionSpec::PointMass { .. } => 0.0,
            DistributionSpec::Discrete { atoms } => {
                let m = self.mean()?;
                atoms.iter().map(|&(v, p)| p * (v - m) * (v - m)).sum()
            }
            DistributionSpec::Normal { stddev, .. } => stddev * stddev,
            DistributionSpec::ParetoCubic => {
                return Err(Error::NonintegrableMoment(
                    "pareto_cubic has no finite variance".into(),
                ))
            }
            DistributionSpec::Affine { base, scale, .. } => scale * scale * base.variance()?,
        })
    }

    /// Largest |x − μ| over the support, when the support is bounded.
    pub fn support_radius(&self, mu: f64) -> Option<f64> {
        match self {
            DistributionSpec::PointMass { value } => Some((value - mu).abs()),
            DistributionSpec::Discrete { atoms } => atoms
                .iter()
                .filter(|a| a.1 > 0.0)
                .map(|&(v, _)| (v - mu).abs())
                .reduce(f64::max),
            DistributionSpec::Normal { .. } | DistributionSpec::ParetoCubic => None,
            DistributionSpec::Affine { base, shift, scale } => base
                .support_radius((mu - shift) / scale)
                .map(|r| r * scale.abs()),
        }
    }

    /// Truncated moments at centering `mu` and level `t`.
    ///
    /// When `b_n` is given, `alpha` and `beta` are evaluated at the threshold √Bn.
    pub fn truncated_moments(
        &self,
        mu: f64,
        t: Level,
        b_n: Option<f64>,
    ) -> Result<TruncatedMomentSet> {
        t.validate()?;
        self.validate()?;
        let threshold = match b_n {
            Some(b) if !(b > 0.0) || !b.is_finite() => {
                return Err(Error::InvalidArgument(format!(
                    "Bn must be positive and finite for alpha/beta, got {b}"
                )))
            }
            Some(b) => Some(b.sqrt()),
            None => None,
        };
        self.moments_at(mu, t.value(), threshold).map(|m| TruncatedMomentSet {
            mu,
            t,
            a_bar: m.a_bar,
            var_bar: m.var_bar,
            abs3_bar: m.abs3_bar,
            tail: m.tail,
            alpha: m.alpha,
            beta: m.beta,
        })
    }

    fn moments_at(&self, mu: f64, t: f64, threshold: Option<f64>) -> Result<RawMoments> {
        match self {
            DistributionSpec::PointMass { value } => {
                Ok(discrete_moments(&[(*value, 1.0)], mu, t, threshold))
            }
            DistributionSpec::Discrete { atoms } => Ok(discrete_moments(atoms, mu, t, threshold)),
            DistributionSpec::Normal { mean, stddev } => {
                continuous_moments(&NormalLaw { mean: *mean, sd: *stddev }, mu, t, threshold)
            }
            DistributionSpec::ParetoCubic => continuous_moments(&ParetoLaw, mu, t, threshold),
            DistributionSpec::Affine { base, shift, scale } => {
                let k = scale.abs();
                let m = base.moments_at((mu - shift) / scale, t / k, threshold.map(|s| s / k))?;
                Ok(RawMoments {
                    a_bar: scale * m.a_bar,
                    var_bar: k * k * m.var_bar,
                    abs3_bar: k * k * k * m.abs3_bar,
                    tail: m.tail,
                    alpha: m.alpha.map(|a| k * k * a),
                    beta: m.beta.map(|b| k * k * k * b),
                })
            }
        }
    }

    /// E |X̄ + shift|³ where X̄ is the variable truncated at (μ, t).
    pub fn truncated_abs3_shifted(&self, mu: f64, t: Level, shift: f64) -> Result<f64> {
        t.validate()?;
        self.validate()?;
        self.abs3_shifted_at(mu, t.value(), shift)
    }

    fn abs3_shifted_at(&self, mu: f64, t: f64, shift: f64) -> Result<f64> {
        match self {
            DistributionSpec::PointMass { value } => {
                Ok(discrete_abs3_shifted(&[(*value, 1.0)], mu, t, shift))
            }
            DistributionSpec::Discrete { atoms } => Ok(discrete_abs3_shifted(atoms, mu, t, shift)),
            DistributionSpec::Normal { mean, stddev } => {
                continuous_abs3_shifted(&NormalLaw { mean: *mean, sd: *stddev }, mu, t, shift)
            }
            DistributionSpec::ParetoCubic => continuous_abs3_shifted(&ParetoLaw, mu, t, shift),
            DistributionSpec::Affine { base, shift: s, scale } => {
                let k = scale.abs();
                let v = base.abs3_shifted_at((mu - s) / scale, t / k, shift / scale)?;
                Ok(k * k * k * v)
            }
        }
    }

    /// E (X − μ)² g(X − μ) for a weight g. Discrete laws sum exactly; the normal law
    /// uses double-exponential quadrature on a split range.
    pub fn weighted_second_moment(&self, mu: f64, g: &dyn Fn(f64) -> f64) -> Result<f64> {
        self.validate()?;
        match self {
            DistributionSpec::PointMass { value } => {
                let y = value - mu;
                Ok(y * y * g(y))
            }
            DistributionSpec::Discrete { atoms } => Ok(atoms
                .iter()
                .map(|&(v, p)| {
                    let y = v - mu;
                    p * y * y * g(y)
                })
                .sum()),
            DistributionSpec::Normal { mean, stddev } => {
                let (d, s) = (mean - mu, *stddev);
                let f = |z: f64| {
                    let y = d + s * z;
                    y * y * g(y) * normal::pdf(z)
                };
                let kink = -d / s;
                let mut cuts = vec![-40.0, -12.0, -4.0, 0.0, 4.0, 12.0, 40.0];
                if kink.abs() < 40.0 {
                    cuts.push(kink);
                }
                cuts.sort_by(f64::total_cmp);
                cuts.dedup();
                let v: f64 = cuts
                    .windows(2)
                    .map(|w| quadrature::integrate(f, w[0], w[1], 1e-14).integral)
                    .sum();
                if !v.is_finite() {
                    return Err(Error::NonintegrableMoment(
                        "weighted second moment of normal cell diverged".into(),
                    ));
                }
                Ok(v)
            }
            DistributionSpec::ParetoCubic => Err(Error::NonintegrableMoment(
                "pareto_cubic has no finite second moment".into(),
            )),
            DistributionSpec::Affine { base, shift, scale } => {
                let k = *scale;
                let h = |y: f64| g(k * y);
                Ok(k * k * base.weighted_second_moment((mu - shift) / scale, &h)?)
            }
        }
    }

    /// One draw from the law.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self {
            DistributionSpec::PointMass { value } => *value,
            DistributionSpec::Discrete { atoms } => {
                let u: f64 = rng.random();
                let mut acc = 0.0;
                for &(v, p) in atoms {
                    acc += p;
                    if u < acc {
                        return v;
                    }
                }
                // u landed in the rounding slack above the accumulated mass
                atoms
                    .iter()
                    .rev()
                    .find(|a| a.1 > 0.0)
                    .map(|a| a.0)
                    .unwrap_or(atoms[atoms.len() - 1].0)
            }
            DistributionSpec::Normal { mean, stddev } => {
                let z: f64 = StandardNormal.sample(rng);
                mean + stddev * z
            }
            DistributionSpec::ParetoCubic => {
                // inverse of F(x) = ½x⁻² (x < −1), 1 − ½x⁻² (x > 1)
                let u: f64 = Open01.sample(rng);
                if u < 0.5 {
                    -1.0 / (2.0 * u).sqrt()
                } else {
                    1.0 / (2.0 * (1.0 - u)).sqrt()
                }
            }
            DistributionSpec::Affine { base, shift, scale } => shift + scale * base.sample(rng),
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct RawMoments {
    a_bar: f64,
    var_bar: f64,
    abs3_bar: f64,
    tail: f64,
    alpha: Option<f64>,
    beta: Option<f64>,
}

fn discrete_moments(atoms: &[(f64, f64)], mu: f64, t: f64, threshold: Option<f64>) -> RawMoments {
    let (mut m1, mut m2, mut m3, mut tail) = (0.0, 0.0, 0.0, 0.0);
    let (mut alpha, mut beta) = (0.0, 0.0);
    for &(v, p) in atoms {
        let y = v - mu;
        let ay = y.abs();
        if ay < t {
            m1 += p * y;
            m2 += p * y * y;
            m3 += p * ay * ay * ay;
        } else {
            tail += p;
        }
        if let Some(s) = threshold {
            if ay >= s {
                alpha += p * y * y;
            } else {
                beta += p * ay * ay * ay;
            }
        }
    }
    RawMoments {
        a_bar: m1,
        var_bar: (m2 - m1 * m1).max(0.0),
        abs3_bar: m3,
        tail: tail.min(1.0),
        alpha: threshold.map(|_| alpha),
        beta: threshold.map(|_| beta),
    }
}

fn discrete_abs3_shifted(atoms: &[(f64, f64)], mu: f64, t: f64, shift: f64) -> f64 {
    atoms
        .iter()
        .map(|&(v, p)| {
            let y = v - mu;
            let x_bar = if y.abs() < t { y } else { 0.0 };
            p * (x_bar + shift).abs().powi(3)
        })
        .sum()
}

/// Absolutely continuous law with closed-form partial moments.
trait ContinuousLaw {
    /// P(X ≤ x)
    fn cdf(&self, x: f64) -> f64;
    /// P(X ≥ x)
    fn sf(&self, x: f64) -> f64;
    /// E[(X − center)ᵏ; lo < X < hi] for k ≤ 3; endpoints may be infinite.
    fn partial(&self, center: f64, lo: f64, hi: f64, k: u32) -> Result<f64>;

    /// E[|X − center|³; lo < X < hi]
    fn partial_abs3(&self, center: f64, lo: f64, hi: f64) -> Result<f64> {
        let upper = self.partial(center, lo.max(center), hi, 3)?;
        let lower = self.partial(center, lo, hi.min(center), 3)?;
        Ok(upper - lower)
    }
}

fn continuous_moments<L: ContinuousLaw>(
    law: &L,
    mu: f64,
    t: f64,
    threshold: Option<f64>,
) -> Result<RawMoments> {
    let (lo, hi) = (mu - t, mu + t);
    let m1 = law.partial(mu, lo, hi, 1)?;
    let m2 = law.partial(mu, lo, hi, 2)?;
    let m3 = law.partial_abs3(mu, lo, hi)?;
    let tail = if t.is_infinite() {
        0.0
    } else {
        (law.cdf(lo) + law.sf(hi)).min(1.0)
    };
    let (alpha, beta) = match threshold {
        Some(s) => {
            let (slo, shi) = (mu - s, mu + s);
            let alpha = law.partial(mu, f64::NEG_INFINITY, slo, 2)?
                + law.partial(mu, shi, f64::INFINITY, 2)?;
            let beta = law.partial_abs3(mu, slo, shi)?;
            (Some(alpha), Some(beta))
        }
        None => (None, None),
    };
    Ok(RawMoments {
        a_bar: m1,
        var_bar: (m2 - m1 * m1).max(0.0),
        abs3_bar: m3,
        tail,
        alpha,
        beta,
    })
}

fn continuous_abs3_shifted<L: ContinuousLaw>(law: &L, mu: f64, t: f64, shift: f64) -> Result<f64> {
    let tail = if t.is_infinite() {
        0.0
    } else {
        law.cdf(mu - t) + law.sf(mu + t)
    };
    // |X̄ + shift| = |X − (μ − shift)| inside the window
    let inside = law.partial_abs3(mu - shift, mu - t, mu + t)?;
    Ok(tail * shift.abs().powi(3) + inside)
}

const BINOMIAL: [[f64; 4]; 4] = [
    [1.0, 0.0, 0.0, 0.0],
    [1.0, 1.0, 0.0, 0.0],
    [1.0, 2.0, 1.0, 0.0],
    [1.0, 3.0, 3.0, 1.0],
];

struct NormalLaw {
    mean: f64,
    sd: f64,
}

impl ContinuousLaw for NormalLaw {
    fn cdf(&self, x: f64) -> f64 {
        normal::cdf((x - self.mean) / self.sd)
    }

    fn sf(&self, x: f64) -> f64 {
        normal::sf((x - self.mean) / self.sd)
    }

    fn partial(&self, center: f64, lo: f64, hi: f64, k: u32) -> Result<f64> {
        if hi <= lo {
            return Ok(0.0);
        }
        // X − center = d + s·Z
        let d = self.mean - center;
        let s = self.sd;
        let z = normal::partial_moments((lo - self.mean) / s, (hi - self.mean) / s);
        let k = k as usize;
        let mut acc = 0.0;
        for j in 0..=k {
            let coef = BINOMIAL[k][j] * d.powi((k - j) as i32) * s.powi(j as i32);
            if coef != 0.0 {
                acc += coef * z[j];
            }
        }
        Ok(acc)
    }
}

struct ParetoLaw;

impl ParetoLaw {
    /// ∫ₚ^q (x − m)ᵏ x⁻³ dx for 1 ≤ p < q ≤ ∞.
    fn positive_side(m: f64, p: f64, q: f64, k: usize) -> Result<f64> {
        if q <= p {
            return Ok(0.0);
        }
        if q.is_infinite() && k >= 2 {
            return Err(Error::NonintegrableMoment(format!(
                "pareto_cubic moment of order {k} over an unbounded range"
            )));
        }
        let power_integral = |j: usize| -> f64 {
            match j {
                0 => 0.5 * (p.powi(-2) - q.powi(-2)),
                1 => 1.0 / p - 1.0 / q,
                2 => (q / p).ln(),
                _ => q - p,
            }
        };
        let mut acc = 0.0;
        for j in 0..=k {
            let coef = BINOMIAL[k][j] * (-m).powi((k - j) as i32);
            if coef != 0.0 {
                acc += coef * power_integral(j);
            }
        }
        Ok(acc)
    }
}

impl ContinuousLaw for ParetoLaw {
    fn cdf(&self, x: f64) -> f64 {
        if x < -1.0 {
            0.5 / (x * x)
        } else if x <= 1.0 {
            0.5
        } else {
            1.0 - 0.5 / (x * x)
        }
    }

    fn sf(&self, x: f64) -> f64 {
        if x > 1.0 {
            0.5 / (x * x)
        } else if x >= -1.0 {
            0.5
        } else {
            1.0 - 0.5 / (x * x)
        }
    }

    fn partial(&self, center: f64, lo: f64, hi: f64, k: u32) -> Result<f64> {
        if hi <= lo {
            return Ok(0.0);
        }
        let k = k as usize;
        let pos = Self::positive_side(center, lo.max(1.0), hi, k)?;
        // x = −u on the negative branch: (x − c)ᵏ = (−1)ᵏ (u + c)ᵏ
        let neg = Self::positive_side(-center, (-hi).max(1.0), -lo, k)?;
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        Ok(pos + sign * neg)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn rel_close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * b.abs().max(1e-300)
    }

    #[test]
    fn pareto_closed_forms() {
        for &b in &[2.0, 10.0, 100.0, 1e6] {
            let m = DistributionSpec::ParetoCubic
                .truncated_moments(0.0, Level::Finite(b), None)
                .unwrap();
            assert_eq!(m.a_bar, 0.0);
            assert!(rel_close(m.var_bar, 2.0 * f64::ln(b), 1e-12), "{b}: {}", m.var_bar);
            assert!(rel_close(m.abs3_bar, 2.0 * (b - 1.0), 1e-12));
            assert!(rel_close(m.tail, 1.0 / (b * b), 1e-12));
        }
    }

    #[test]
    fn pareto_untruncated_variance_is_an_error() {
        let err = DistributionSpec::ParetoCubic
            .truncated_moments(0.0, Level::Infinite, None)
            .unwrap_err();
        assert!(matches!(err, Error::NonintegrableMoment(_)));
        assert!(DistributionSpec::ParetoCubic.variance().is_err());
        // alpha needs the full second moment of the tail
        assert!(DistributionSpec::ParetoCubic
            .truncated_moments(0.0, Level::Finite(5.0), Some(4.0))
            .is_err());
    }

    #[test]
    fn pareto_below_support_is_all_tail() {
        let m = DistributionSpec::ParetoCubic
            .truncated_moments(0.0, Level::Finite(0.5), None)
            .unwrap();
        assert_eq!(m.tail, 1.0);
        assert_eq!(m.var_bar, 0.0);
    }

    #[test]
    fn centered_point_mass_is_zero() {
        for &t in &[Level::Finite(1e-3), Level::Finite(5.0), Level::Infinite] {
            let m = DistributionSpec::point_mass(3.5).truncated_moments(3.5, t, None).unwrap();
            assert_eq!((m.a_bar, m.var_bar, m.abs3_bar, m.tail), (0.0, 0.0, 0.0, 0.0));
        }
    }

    #[test]
    fn offset_point_mass_truncates_at_level() {
        let d = DistributionSpec::point_mass(2.0);
        let inside = d.truncated_moments(0.0, Level::Finite(3.0), None).unwrap();
        assert_eq!((inside.a_bar, inside.tail), (2.0, 0.0));
        // the event is |X − μ| ≥ t, so an atom sitting on the level is cut
        let edge = d.truncated_moments(0.0, Level::Finite(2.0), None).unwrap();
        assert_eq!((edge.a_bar, edge.tail), (0.0, 1.0));
    }

    #[test]
    fn symmetric_two_point() {
        let d = DistributionSpec::discrete(vec![(-1.0, 0.5), (1.0, 0.5)]);
        let m = d.truncated_moments(0.0, Level::Finite(2.0), None).unwrap();
        assert_eq!((m.a_bar, m.var_bar, m.abs3_bar, m.tail), (0.0, 1.0, 1.0, 0.0));
    }

    #[test]
    fn infinite_level_keeps_the_mean() {
        let d = DistributionSpec::normal(1.5, 2.0);
        let m = d.truncated_moments(0.25, Level::Infinite, Some(9.0)).unwrap();
        assert_eq!(m.tail, 0.0);
        assert!((m.a_bar - 1.25).abs() < 1e-14);
        assert!((m.var_bar - 4.0).abs() < 1e-13);
    }

    #[test]
    fn invalid_inputs() {
        assert!(matches!(Level::finite(0.0), Err(Error::InvalidTruncation(_))));
        assert!(matches!(Level::finite(-2.0), Err(Error::InvalidTruncation(_))));
        let bad = DistributionSpec::discrete(vec![(0.0, 0.5), (1.0, 0.4)]);
        assert!(bad.validate().is_err());
        assert!(DistributionSpec::normal(0.0, 0.0).validate().is_err());
        assert!(DistributionSpec::affine(DistributionSpec::ParetoCubic, 0.0, 0.0)
            .validate()
            .is_err());
        assert!(matches!(
            DistributionSpec::ParetoCubic.truncated_moments(0.0, Level::Finite(-1.0), None),
            Err(Error::InvalidTruncation(_))
        ));
    }

    #[test]
    fn serde_shapes() {
        let json = r#"[{"kind":"normal","mean":0,"stddev":1},{"kind":"pareto_cubic"},
            {"kind":"discrete","atoms":[[-1,0.5],[1,0.5]]},{"kind":"point_mass","value":3},
            {"kind":"affine","base":{"kind":"pareto_cubic"},"shift":1,"scale":-2}]"#;
        let specs: Vec<DistributionSpec> = serde_json::from_str(json).unwrap();
        assert_eq!(specs[0], DistributionSpec::normal(0.0, 1.0));
        assert_eq!(specs[1], DistributionSpec::ParetoCubic);
        assert_eq!(specs[2], DistributionSpec::discrete(vec![(-1.0, 0.5), (1.0, 0.5)]));
        let back: Vec<DistributionSpec> =
            serde_json::from_str(&serde_json::to_string(&specs).unwrap()).unwrap();
        assert_eq!(back, specs);

        let levels: Vec<Level> = serde_json::from_str(r#"[2.5, "inf"]"#).unwrap();
        assert_eq!(levels, vec![Level::Finite(2.5), Level::Infinite]);
        assert!(serde_json::from_str::<Level>("0").is_err());
    }

    #[test]
    fn point_mass_samples_are_constant() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let d = DistributionSpec::point_mass(3.0);
        assert!((0..1000).all(|_| d.sample(&mut rng) == 3.0));
    }

    #[test]
    fn pareto_tail_frequency_within_dkw_band() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let n = 1_000_000;
        let hits = (0..n)
            .filter(|_| DistributionSpec::ParetoCubic.sample(&mut rng).abs() >= 10.0)
            .count();
        let freq = hits as f64 / n as f64;
        // P(|X| ≥ 10) = 2·P(X ≥ 10) and each one-sided CDF error is within the band
        let band = 2.0 * ((2.0f64 / 0.001).ln() / (2.0 * n as f64)).sqrt();
        assert!((freq - 0.01).abs() <= band, "freq {freq}");
    }

    #[test]
    fn normal_sample_mean() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let d = DistributionSpec::normal(0.0, 1.0);
        let n = 1_000_000;
        let mean = (0..n).map(|_| d.sample(&mut rng)).sum::<f64>() / n as f64;
        assert!(mean.abs() < 4.0 / (n as f64).sqrt());
    }

    #[test]
    fn discrete_sample_frequencies() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let d = DistributionSpec::discrete(vec![(0.0, 0.2), (1.0, 0.0), (2.0, 0.8)]);
        let n = 100_000;
        let draws: Vec<f64> = (0..n).map(|_| d.sample(&mut rng)).collect();
        assert!(draws.iter().all(|&x| x != 1.0));
        let twos = draws.iter().filter(|&&x| x == 2.0).count() as f64 / n as f64;
        assert!((twos - 0.8).abs() < 4.0 * (0.16f64 / n as f64).sqrt());
    }

    #[test]
    fn weighted_second_moment_matches_known_values() {
        let d = DistributionSpec::normal(0.0, 2.0);
        // E Y² = 4, E Y²|Y| = 2σ³√(2/π)
        let v = d.weighted_second_moment(0.0, &|_| 1.0).unwrap();
        assert!((v - 4.0).abs() < 1e-12, "{v}");
        let v = d.weighted_second_moment(0.0, &|y: f64| y.abs()).unwrap();
        let expect = 2.0 * 8.0 * (2.0 / std::f64::consts::PI).sqrt();
        assert!((v - expect).abs() < 1e-11, "{v} vs {expect}");
        assert!(DistributionSpec::ParetoCubic
            .weighted_second_moment(0.0, &|_| 1.0)
            .is_err());
    }
}
