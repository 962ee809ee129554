//! Cellwise truncated moments and the variance aggregates ēn, B̄n and Bn
//! under independent cells and a uniform random permutation.

use crate::dist::{DistributionSpec, Level, TruncatedMomentSet};
use crate::error::{Error, Result};
use crate::matrix::{RealMatrix, Square};
use serde::{Deserialize, Serialize};

pub type SpecMatrix = Square<DistributionSpec>;
pub type LevelMatrix = Square<Level>;

/// Every per-cell scalar the bounds need.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentTable {
    pub mu: RealMatrix,
    pub t: LevelMatrix,
    /// cᵢⱼ = E Xᵢⱼ
    pub c: RealMatrix,
    /// σ²ᵢⱼ = D Xᵢⱼ, present only when every cell has a finite variance.
    pub sigma2: Option<RealMatrix>,
    pub a_bar: RealMatrix,
    pub var_bar: RealMatrix,
    pub abs3_bar: RealMatrix,
    /// P(|Xᵢⱼ − μᵢⱼ| ≥ tᵢⱼ), which is qᵢⱼ under independence.
    pub tail: RealMatrix,
    pub alpha: Option<RealMatrix>,
    pub beta: Option<RealMatrix>,
    /// The Bn at whose square root alpha/beta were evaluated.
    pub alpha_beta_b_n: Option<f64>,
}

impl MomentTable {
    pub fn n(&self) -> usize {
        self.mu.n()
    }
}

/// Applies [`DistributionSpec::truncated_moments`] to every cell.
pub fn build_moment_table(
    specs: &SpecMatrix,
    mu: &RealMatrix,
    t: &LevelMatrix,
    b_n_hint: Option<f64>,
) -> Result<MomentTable> {
    let n = specs.n();
    if mu.n() != n || t.n() != n {
        return Err(Error::DimensionMismatch(format!(
            "specs {n}×{n}, mu {m}×{m}, t {k}×{k}",
            m = mu.n(),
            k = t.n()
        )));
    }
    let cell = |i: usize, j: usize| -> Result<(TruncatedMomentSet, f64, Option<f64>)> {
        let spec = specs.get(i, j);
        let set = spec.truncated_moments(*mu.get(i, j), *t.get(i, j), b_n_hint)?;
        let mean = spec.mean()?;
        let var = match spec.variance() {
            Ok(v) => Some(v),
            Err(Error::NonintegrableMoment(_)) => None,
            Err(e) => return Err(e),
        };
        Ok((set, mean, var))
    };
    let cells = if specs.is_uniform() && mu.is_uniform() && t.is_uniform() {
        Square::uniform(n, cell(0, 0).map_err(|e| e.at_cell(0, 0))?)?
    } else {
        let v = (0..n * n)
            .map(|k| cell(k / n, k % n).map_err(|e| e.at_cell(k / n, k % n)))
            .collect::<Result<Vec<_>>>()?;
        Square::from_vec(n, v)?
    };

    let finite_var = cells.iter().all(|c| c.2.is_some());
    Ok(MomentTable {
        mu: mu.clone(),
        t: t.clone(),
        c: cells.map(|c| c.1),
        sigma2: finite_var.then(|| cells.map(|c| c.2.unwrap_or(f64::NAN))),
        a_bar: cells.map(|c| c.0.a_bar),
        var_bar: cells.map(|c| c.0.var_bar),
        abs3_bar: cells.map(|c| c.0.abs3_bar),
        tail: cells.map(|c| c.0.tail),
        alpha: b_n_hint.map(|_| cells.map(|c| c.0.alpha.unwrap_or(f64::NAN))),
        beta: b_n_hint.map(|_| cells.map(|c| c.0.beta.unwrap_or(f64::NAN))),
        alpha_beta_b_n: b_n_hint,
    })
}

/// ēn, B̄n and (when defined) Bn.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VarianceSummary {
    pub e_bar_n: f64,
    pub b_bar_n: f64,
    pub b_n: Option<f64>,
    /// B̄n with 1/(n−1) on the variance sum as well. Informational only.
    pub b_bar_n_alt: f64,
    /// Set when B̄n = 0; the Θn/Υn quotients are then undefined.
    pub degenerate: bool,
}

impl VarianceSummary {
    pub fn require_nondegenerate(&self) -> Result<()> {
        if self.degenerate {
            Err(Error::DegenerateVariance)
        } else {
            Ok(())
        }
    }
}

/// ēn = n(ā.. + μ..), B̄n = Σ(μ* + ā*)²/(n−1) + Σσ̄²/n, Bn = Σc*²/(n−1) + Σσ²/n.
pub fn variance_summary(table: &MomentTable) -> VarianceSummary {
    let n = table.n() as f64;
    let e_bar_n = n * (table.a_bar.grand_mean() + table.mu.grand_mean());

    let nu = table
        .mu
        .zip_map(&table.a_bar, |m, a| m + a)
        .expect("table matrices share one dimension");
    let center_part = nu.star().sum_by(|v| v * v);
    let var_sum = table.var_bar.sum();
    let b_bar_n = center_part / (n - 1.0) + var_sum / n;
    let b_bar_n_alt = (center_part + var_sum) / (n - 1.0);

    let b_n = table
        .sigma2
        .as_ref()
        .map(|s2| table.c.star().sum_by(|v| v * v) / (n - 1.0) + s2.sum() / n);

    VarianceSummary {
        e_bar_n,
        b_bar_n,
        b_n,
        b_bar_n_alt,
        degenerate: !(b_bar_n > 0.0),
    }
}
