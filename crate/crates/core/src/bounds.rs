//! Remainder bounds for the permuted sum Sn = Σ X_{iπ(i)} and their components.
//!
//! Every report keeps its components next to the total so the total can be
//! recomputed from the fields alone ([`BoundReport::recompute_total`]).

use crate::dist::Level;
use crate::error::{Error, Result};
use crate::matrix::{require_centered, RealMatrix, Square};
use crate::moments::{build_moment_table, variance_summary, MomentTable, SpecMatrix, VarianceSummary};
use crate::normal::{inv_sqrt_2pi_e, INV_SQRT_2PI};
use serde::{Deserialize, Serialize};
use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum TheoremId {
    #[serde(rename = "1")]
    T1,
    #[serde(rename = "2")]
    T2,
    #[serde(rename = "3")]
    T3,
    #[serde(rename = "4")]
    T4,
    #[serde(rename = "5")]
    T5,
    #[serde(rename = "6")]
    T6,
    #[serde(rename = "7")]
    T7,
    #[serde(rename = "A")]
    A,
}

impl fmt::Display for TheoremId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            TheoremId::T1 => "1",
            TheoremId::T2 => "2",
            TheoremId::T3 => "3",
            TheoremId::T4 => "4",
            TheoremId::T5 => "5",
            TheoremId::T6 => "6",
            TheoremId::T7 => "7",
            TheoremId::A => "A",
        };
        f.write_str(s)
    }
}

/// Named bound components; absent ones do not enter the theorem's total.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Components {
    #[serde(rename = "Delta_bar", default, skip_serializing_if = "Option::is_none")]
    pub delta_bar: Option<f64>,
    #[serde(rename = "Psi", default, skip_serializing_if = "Option::is_none")]
    pub psi: Option<f64>,
    #[serde(rename = "Theta", default, skip_serializing_if = "Option::is_none")]
    pub theta: Option<f64>,
    #[serde(rename = "Upsilon", default, skip_serializing_if = "Option::is_none")]
    pub upsilon: Option<f64>,
    #[serde(rename = "C", default, skip_serializing_if = "Option::is_none")]
    pub c: Option<f64>,
    #[serde(rename = "Lambda", default, skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
    #[serde(rename = "L", default, skip_serializing_if = "Option::is_none")]
    pub l: Option<f64>,
    /// Already multiplied by the constant A.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub third_moment_term: Option<f64>,
    /// Σ gᵢⱼ / (Bn g(√Bn) n), not multiplied by A.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub g_term: Option<f64>,
}

impl Components {
    /// (name, value) pairs in a fixed column order, absent values as `None`.
    pub fn columns(&self) -> [(&'static str, Option<f64>); 9] {
        [
            ("Delta_bar", self.delta_bar),
            ("Psi", self.psi),
            ("Theta", self.theta),
            ("Upsilon", self.upsilon),
            ("C", self.c),
            ("Lambda", self.lambda),
            ("L", self.l),
            ("third_moment_term", self.third_moment_term),
            ("g_term", self.g_term),
        ]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub theorem: TheoremId,
    pub components: Components,
    pub constant_a: Option<f64>,
    /// Coefficient of A in the total, so that total = free part + A · a_multiplier.
    pub a_multiplier: Option<f64>,
    pub total: f64,
    pub a_n: f64,
    pub b_n: f64,
}

impl BoundReport {
    /// The total rebuilt from the components, independent of how `total` was formed.
    pub fn recompute_total(&self) -> f64 {
        let k = &self.components;
        let z = |v: Option<f64>| v.unwrap_or(0.0);
        let a = z(self.constant_a);
        match self.theorem {
            TheoremId::T1 | TheoremId::T2 => {
                z(k.delta_bar) + z(k.psi) + z(k.theta) + z(k.upsilon)
            }
            TheoremId::T3 => z(k.third_moment_term) + z(k.psi) + z(k.theta) + z(k.upsilon),
            TheoremId::T4 => a * (z(k.c) + z(k.lambda) + z(k.l)),
            TheoremId::T5 | TheoremId::T6 => a * (z(k.c) + z(k.g_term)),
            TheoremId::A | TheoremId::T7 => z(k.third_moment_term),
        }
    }

    /// Smallest A ≥ 0 with `delta_hat ≤ total(A)`, for the theorems carrying a constant.
    pub fn fitted_constant(&self, delta_hat: f64) -> Option<f64> {
        let mult = self.a_multiplier?;
        let free = self.total - self.constant_a.unwrap_or(0.0) * mult;
        if mult > 0.0 {
            Some(((delta_hat - free) / mult).max(0.0))
        } else if delta_hat <= free {
            Some(0.0)
        } else {
            Some(f64::INFINITY)
        }
    }
}

fn check_nonneg(name: &str, v: f64) -> Result<()> {
    if v.is_nan() || v < 0.0 {
        return Err(Error::InvalidArgument(format!("{name} must be ≥ 0, got {v}")));
    }
    Ok(())
}

fn check_constant(a: f64) -> Result<()> {
    if !a.is_finite() || a < 0.0 {
        return Err(Error::InvalidArgument(format!(
            "constant A must be finite and ≥ 0, got {a}"
        )));
    }
    Ok(())
}

/// Upper bound on sup_x |Φ(px + q) − Φ(x)|.
pub fn lemma1_bound(p: f64, q: f64) -> Result<f64> {
    if !(p > 0.0) || !p.is_finite() {
        return Err(Error::NonpositiveScale(p));
    }
    Ok(q.abs() * INV_SQRT_2PI + inv_sqrt_2pi_e() * (p - 1.0).max(1.0 / p - 1.0))
}

/// Δn ≤ Δ̄n + Ψn + Θn + Υn. An unknown Δ̄n is left out of the total.
pub fn theorem1_bound(
    delta_bar: Option<f64>,
    psi: f64,
    theta: f64,
    upsilon: f64,
    a_n: f64,
    b_n: f64,
) -> Result<BoundReport> {
    if let Some(d) = delta_bar {
        check_nonneg("Delta_bar", d)?;
    }
    check_nonneg("Psi", psi)?;
    check_nonneg("Theta", theta)?;
    check_nonneg("Upsilon", upsilon)?;
    Ok(BoundReport {
        theorem: TheoremId::T1,
        components: Components {
            delta_bar,
            psi: Some(psi),
            theta: Some(theta),
            upsilon: Some(upsilon),
            ..Default::default()
        },
        constant_a: None,
        a_multiplier: None,
        total: delta_bar.unwrap_or(0.0) + psi + theta + upsilon,
        a_n,
        b_n,
    })
}

/// Ψn = Σ qᵢⱼ pᵢⱼ for a general permutation law pᵢⱼ = P(π(i) = j).
pub fn psi_general(p: &RealMatrix, q: &RealMatrix) -> Result<f64> {
    let pq = p.zip_map(q, |p, q| p * q)?;
    Ok(pq.sum())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PsiThetaUpsilon {
    pub psi: f64,
    pub theta: f64,
    pub upsilon: f64,
}

/// Ψn = Σ qᵢⱼ / n, Θn = |an − ēn| / (√(2π) √B̄n),
/// Υn = max(√B̄n/bn − 1, bn/√B̄n − 1) / √(2πe).
pub fn psi_theta_upsilon(
    summary: &VarianceSummary,
    table: &MomentTable,
    a_n: f64,
    b_n: f64,
) -> Result<PsiThetaUpsilon> {
    summary.require_nondegenerate()?;
    if !(b_n > 0.0) || !b_n.is_finite() {
        return Err(Error::NonpositiveScale(b_n));
    }
    let root = summary.b_bar_n.sqrt();
    let psi = table.tail.sum() / table.n() as f64;
    let theta = (a_n - summary.e_bar_n).abs() * INV_SQRT_2PI / root;
    let upsilon = inv_sqrt_2pi_e() * (root / b_n - 1.0).max(b_n / root - 1.0);
    Ok(PsiThetaUpsilon { psi, theta, upsilon })
}

/// Theorem 1 specialized to independent cells and a uniform permutation.
pub fn theorem2_bound(
    delta_bar: Option<f64>,
    summary: &VarianceSummary,
    table: &MomentTable,
    a_n: f64,
    b_n: f64,
) -> Result<BoundReport> {
    let ptu = psi_theta_upsilon(summary, table, a_n, b_n)?;
    let mut r = theorem1_bound(delta_bar, ptu.psi, ptu.theta, ptu.upsilon, a_n, b_n)?;
    r.theorem = TheoremId::T2;
    Ok(r)
}

/// Relative tolerance for tᵢⱼ = bₙ, loose enough for a solved fixed point.
pub const LEVEL_MATCH_TOL: f64 = 1e-9;

fn require_common_level(table: &MomentTable, b_n: f64) -> Result<()> {
    let matches = |l: &Level| match l {
        Level::Finite(t) => (t - b_n).abs() <= LEVEL_MATCH_TOL * b_n,
        Level::Infinite => false,
    };
    if let Some(l) = table.t.uniform_value() {
        if matches(l) {
            return Ok(());
        }
        return Err(Error::TruncationMismatch { b_n, row: 0, col: 0, found: l.to_string() });
    }
    match table.t.cells().find(|(_, _, l)| !matches(l)) {
        None => Ok(()),
        Some((row, col, l)) => Err(Error::TruncationMismatch {
            b_n,
            row,
            col,
            found: l.to_string(),
        }),
    }
}

/// Truncated-moment bound with tᵢⱼ = bn and an = 0:
/// A/(n B̄n^{3/2}) Σ(|μᵢⱼ|³ + E|X̄ᵢⱼ|³) + Ψn + Θn + Υn.
pub fn theorem3_bound(
    table: &MomentTable,
    summary: &VarianceSummary,
    b_n: f64,
    constant_a: f64,
) -> Result<BoundReport> {
    check_constant(constant_a)?;
    require_centered("c = E X", &table.c)?;
    require_centered("mu", &table.mu)?;
    require_common_level(table, b_n)?;
    let ptu = psi_theta_upsilon(summary, table, 0.0, b_n)?;

    let n = table.n() as f64;
    let cubes = table.mu.sum_by(|m| m.abs().powi(3)) + table.abs3_bar.sum();
    let unit = cubes / (n * summary.b_bar_n.powf(1.5));
    let third = constant_a * unit;
    Ok(BoundReport {
        theorem: TheoremId::T3,
        components: Components {
            psi: Some(ptu.psi),
            theta: Some(ptu.theta),
            upsilon: Some(ptu.upsilon),
            third_moment_term: Some(third),
            ..Default::default()
        },
        constant_a: Some(constant_a),
        a_multiplier: Some(unit),
        total: third + ptu.psi + ptu.theta + ptu.upsilon,
        a_n: 0.0,
        b_n,
    })
}

fn finite_variance_preconditions(table: &MomentTable, b_n_var: f64) -> Result<()> {
    if !(b_n_var > 0.0) || !b_n_var.is_finite() {
        return Err(Error::DegenerateVariance);
    }
    if table.sigma2.is_none() {
        return Err(Error::MissingMoments(
            "finite cell variances are required (some cell has infinite variance)".into(),
        ));
    }
    require_centered("c = E X", &table.c)?;
    require_centered("mu", &table.mu)
}

fn cube_center_term(table: &MomentTable, b_n_var: f64) -> f64 {
    table.mu.sum_by(|m| m.abs().powi(3)) / (table.n() as f64 * b_n_var.powf(1.5))
}

/// A(Cn + Λn + Ln) with αᵢⱼ, βᵢⱼ evaluated at √Bn.
pub fn theorem4_bound(table: &MomentTable, b_n_var: f64, constant_a: f64) -> Result<BoundReport> {
    check_constant(constant_a)?;
    finite_variance_preconditions(table, b_n_var)?;
    let (alpha, beta) = match (&table.alpha, &table.beta, table.alpha_beta_b_n) {
        (Some(a), Some(b), Some(at)) if (at - b_n_var).abs() <= 1e-12 * b_n_var => (a, b),
        (_, _, Some(at)) => {
            return Err(Error::MissingMoments(format!(
                "alpha/beta were evaluated at Bn = {at}, not {b_n_var}"
            )))
        }
        _ => return Err(Error::MissingMoments("alpha/beta were not evaluated".into())),
    };
    let n = table.n() as f64;
    let c = cube_center_term(table, b_n_var);
    let lambda = alpha.sum() / (n * b_n_var);
    let l = beta.sum() / (n * b_n_var.powf(1.5));
    let mult = c + lambda + l;
    Ok(BoundReport {
        theorem: TheoremId::T4,
        components: Components {
            c: Some(c),
            lambda: Some(lambda),
            l: Some(l),
            ..Default::default()
        },
        constant_a: Some(constant_a),
        a_multiplier: Some(mult),
        total: constant_a * mult,
        a_n: 0.0,
        b_n: b_n_var.sqrt(),
    })
}

/// Audits a weight g on a log-spaced grid over [1e−6, 1e6]: positive, even,
/// with g(x) and x/g(x) non-decreasing for x > 0.
pub fn check_weight_function(g: &dyn Fn(f64) -> f64) -> Result<()> {
    let grid: Vec<f64> = (0..=240).map(|k| 10f64.powf(-6.0 + k as f64 * 0.05)).collect();
    let slack = 1e-12;
    let mut prev: Option<(f64, f64)> = None;
    for &x in &grid {
        let (gp, gm) = (g(x), g(-x));
        if !(gp > 0.0) || !gp.is_finite() {
            return Err(Error::InvalidG(format!("g({x:e}) = {gp} is not positive and finite")));
        }
        if (gp - gm).abs() > slack * gp {
            return Err(Error::InvalidG(format!("g is not even: g({x:e}) = {gp}, g(−x) = {gm}")));
        }
        let ratio = x / gp;
        if let Some((g0, r0)) = prev {
            if gp < g0 * (1.0 - slack) {
                return Err(Error::InvalidG(format!("g decreases near x = {x:e}")));
            }
            if ratio < r0 * (1.0 - slack) {
                return Err(Error::InvalidG(format!("x/g(x) decreases near x = {x:e}")));
            }
        }
        prev = Some((gp, ratio));
    }
    Ok(())
}

/// gᵢⱼ = E (Xᵢⱼ − μᵢⱼ)² g(Xᵢⱼ − μᵢⱼ) for every cell.
pub fn g_moment_matrix(
    specs: &SpecMatrix,
    mu: &RealMatrix,
    g: &dyn Fn(f64) -> f64,
) -> Result<RealMatrix> {
    specs.try_map_indexed(|i, j, s| s.weighted_second_moment(*mu.get(i, j), g))
}

/// E |Xᵢⱼ − μᵢⱼ|^p for every cell.
pub fn abs_moment_matrix(specs: &SpecMatrix, mu: &RealMatrix, p: f64) -> Result<RealMatrix> {
    let w = p - 2.0;
    specs.try_map_indexed(|i, j, s| s.weighted_second_moment(*mu.get(i, j), &|y: f64| y.abs().powf(w)))
}

/// A(Cn + Σ gᵢⱼ / (Bn g(√Bn) n)).
pub fn theorem5_bound(
    table: &MomentTable,
    g_moments: &RealMatrix,
    b_n_var: f64,
    constant_a: f64,
    g: &dyn Fn(f64) -> f64,
) -> Result<BoundReport> {
    check_constant(constant_a)?;
    check_weight_function(g)?;
    finite_variance_preconditions(table, b_n_var)?;
    if g_moments.n() != table.n() {
        return Err(Error::DimensionMismatch("g-moment matrix order".into()));
    }
    let n = table.n() as f64;
    let c = cube_center_term(table, b_n_var);
    let g_term = g_moments.sum() / (b_n_var * g(b_n_var.sqrt()) * n);
    weighted_report(TheoremId::T5, c, g_term, constant_a, b_n_var)
}

/// A(Cn + Σ E|Xᵢⱼ − μᵢⱼ|^{2+δ} / (Bn^{1+δ/2} n)), δ ∈ (0, 1].
pub fn theorem6_bound(
    table: &MomentTable,
    abs_moments: &RealMatrix,
    b_n_var: f64,
    constant_a: f64,
    delta: f64,
) -> Result<BoundReport> {
    check_constant(constant_a)?;
    if !(delta > 0.0 && delta <= 1.0) {
        return Err(Error::InvalidArgument(format!("delta must lie in (0, 1], got {delta}")));
    }
    finite_variance_preconditions(table, b_n_var)?;
    if abs_moments.n() != table.n() {
        return Err(Error::DimensionMismatch("absolute-moment matrix order".into()));
    }
    let n = table.n() as f64;
    let c = cube_center_term(table, b_n_var);
    let g_term = abs_moments.sum() / (b_n_var.powf(1.0 + delta / 2.0) * n);
    weighted_report(TheoremId::T6, c, g_term, constant_a, b_n_var)
}

fn weighted_report(
    theorem: TheoremId,
    c: f64,
    g_term: f64,
    constant_a: f64,
    b_n_var: f64,
) -> Result<BoundReport> {
    Ok(BoundReport {
        theorem,
        components: Components {
            c: Some(c),
            g_term: Some(g_term),
            ..Default::default()
        },
        constant_a: Some(constant_a),
        a_multiplier: Some(c + g_term),
        total: constant_a * (c + g_term),
        a_n: 0.0,
        b_n: b_n_var.sqrt(),
    })
}

/// Power of σ in the denominator of the third-moment permutation bound.
/// There is no default.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SigmaExponent {
    #[serde(rename = "3/2")]
    ThreeHalves,
    #[serde(rename = "3")]
    Three,
}

impl SigmaExponent {
    pub fn value(self) -> f64 {
        match self {
            SigmaExponent::ThreeHalves => 1.5,
            SigmaExponent::Three => 3.0,
        }
    }
}

impl std::str::FromStr for SigmaExponent {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "3/2" | "1.5" => Ok(SigmaExponent::ThreeHalves),
            "3" => Ok(SigmaExponent::Three),
            other => Err(format!("exponent must be 3/2 or 3, got {other:?}")),
        }
    }
}

/// (A / (n σ^e)) Σ E|Yᵢⱼ − νᵢ. − ν.ⱼ + ν..|³ with σ = √sigma2.
pub fn theorem_a_bound(
    third_abs_star: &RealMatrix,
    sigma2: f64,
    constant_a: f64,
    exponent: SigmaExponent,
) -> Result<f64> {
    check_constant(constant_a)?;
    if !(sigma2 > 0.0) || !sigma2.is_finite() {
        return Err(Error::DegenerateVariance);
    }
    let n = third_abs_star.n() as f64;
    Ok(constant_a * third_abs_star.sum() / (n * sigma2.sqrt().powf(exponent.value())))
}

/// Degenerate case Y = ν: third moments |ν*ᵢⱼ|³ and σ² = Σ(ν*)²/(n−1).
/// Returns (bound, σ²).
pub fn theorem_a_degenerate(
    nu: &RealMatrix,
    constant_a: f64,
    exponent: SigmaExponent,
) -> Result<(f64, f64)> {
    let star = nu.star();
    let sigma2 = star.sum_by(|v| v * v) / (nu.n() as f64 - 1.0);
    let thirds = star.map(|v| v.abs().powi(3));
    Ok((theorem_a_bound(&thirds, sigma2, constant_a, exponent)?, sigma2))
}

/// E|μᵢⱼ + X̄ᵢⱼ − νᵢ. − ν.ⱼ + ν..|³ with ν = μ + ā, the third moments for Yᵢⱼ = μᵢⱼ + X̄ᵢⱼ.
pub fn theorem_a_third_moments(specs: &SpecMatrix, table: &MomentTable) -> Result<RealMatrix> {
    let nu = table.mu.zip_map(&table.a_bar, |m, a| m + a)?;
    // μ − ν.. margins: shift = μᵢⱼ − νᵢ. − ν.ⱼ + ν.. = ν*ᵢⱼ − āᵢⱼ
    let shift = nu.star().zip_map(&table.a_bar, |s, a| s - a)?;
    if specs.is_uniform() && table.mu.is_uniform() && table.t.is_uniform() {
        let v = specs
            .get(0, 0)
            .truncated_abs3_shifted(*table.mu.get(0, 0), *table.t.get(0, 0), *shift.get(0, 0))
            .map_err(|e| e.at_cell(0, 0))?;
        return Square::uniform(specs.n(), v);
    }
    specs.try_map_indexed(|i, j, s| {
        s.truncated_abs3_shifted(*table.mu.get(i, j), *table.t.get(i, j), *shift.get(i, j))
    })
}

/// One element of a Theorem 7 sequence: cell laws and the norming bn.
/// Centering μ = c = E X and truncation t = bn are implied.
#[derive(Debug, Clone)]
pub struct CltCase {
    pub specs: SpecMatrix,
    pub b_n: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CltConditionRow {
    pub n: usize,
    pub b_n: f64,
    /// Σ|cᵢⱼ|³ / (bn³ n)
    pub cube_sum: f64,
    /// (ε, Σ P(|Xᵢⱼ − cᵢⱼ| ≥ ε bn) / n) per requested ε
    pub tail_sum: Vec<(f64, f64)>,
    /// B̄n / bn²
    pub variance_ratio: f64,
    /// Σ|āᵢⱼ| / (bn n)
    pub abar_sum: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CltVerdicts {
    pub cube_sum: bool,
    pub tail_sum: Vec<bool>,
    pub variance_ratio: bool,
    pub abar_sum: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CltConditionReport {
    pub epsilons: Vec<f64>,
    pub rows: Vec<CltConditionRow>,
    pub verdicts: CltVerdicts,
}

/// Absolute slack in the trend test, so that values already at their limit
/// (up to rounding) count as trending.
pub const TREND_SLACK: f64 = 1e-9;

/// Whether the distances to a limit never grow along the sequence (up to slack).
fn trending(distances: &[f64]) -> bool {
    distances.windows(2).all(|w| w[1] <= w[0] + TREND_SLACK)
        && distances.last().zip(distances.first()).is_some_and(|(l, f)| *l <= *f + TREND_SLACK)
}

/// Evaluates conditions 1)–4) of the CLT along a sequence of scenarios.
pub fn check_theorem7_conditions(cases: &[CltCase], epsilons: &[f64]) -> Result<CltConditionReport> {
    if let Some(e) = epsilons.iter().find(|e| !(**e > 0.0)) {
        return Err(Error::InvalidArgument(format!("epsilon must be > 0, got {e}")));
    }
    let mut rows = Vec::with_capacity(cases.len());
    for case in cases {
        let n = case.specs.n();
        let b = case.b_n;
        if !(b > 0.0) || !b.is_finite() {
            return Err(Error::NonpositiveScale(b));
        }
        let c = case.specs.try_map_indexed(|_, _, s| s.mean())?;
        require_centered("c = E X", &c)?;
        let nf = n as f64;

        let table = build_moment_table(&case.specs, &c, &Square::uniform(n, Level::finite(b)?)?, None)?;
        let summary = variance_summary(&table);

        let mut tail_sum = Vec::with_capacity(epsilons.len());
        for &eps in epsilons {
            let t = build_moment_table(&case.specs, &c, &Square::uniform(n, Level::finite(eps * b)?)?, None)?;
            tail_sum.push((eps, t.tail.sum() / nf));
        }

        rows.push(CltConditionRow {
            n,
            b_n: b,
            cube_sum: c.sum_by(|v| v.abs().powi(3)) / (b.powi(3) * nf),
            tail_sum,
            variance_ratio: summary.b_bar_n / (b * b),
            abar_sum: table.a_bar.sum_by(f64::abs) / (b * nf),
        });
    }

    let column = |f: &dyn Fn(&CltConditionRow) -> f64| rows.iter().map(f).collect::<Vec<_>>();
    let verdicts = CltVerdicts {
        cube_sum: trending(&column(&|r| r.cube_sum)),
        tail_sum: (0..epsilons.len())
            .map(|k| trending(&column(&|r| r.tail_sum[k].1)))
            .collect(),
        variance_ratio: trending(&column(&|r| (r.variance_ratio - 1.0).abs())),
        abar_sum: trending(&column(&|r| r.abar_sum)),
    };
    Ok(CltConditionReport {
        epsilons: epsilons.to_vec(),
        rows,
        verdicts,
    })
}
