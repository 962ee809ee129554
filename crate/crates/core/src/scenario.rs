//! JSON scenario files: cell laws, centering, truncation, norming, the theorems
//! to evaluate and optional Monte-Carlo settings. Matrices may live in CSV
//! sidecars whose paths are relative to the scenario file.

use crate::bounds::{SigmaExponent, TheoremId};
use crate::dist::{DistributionSpec, Level};
use crate::error::{Error, Result};
use crate::matrix::{read_csv_matrix, RealMatrix, Square};
use crate::mc::{DEFAULT_ALPHA, MIN_REPLICATES};
use crate::moments::{LevelMatrix, SpecMatrix};
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub name: String,
    pub n: usize,
    pub cells: Cells,
    #[serde(default)]
    pub mu: MuMode,
    pub truncation: Truncation,
    #[serde(default)]
    pub a_n: Centering,
    pub b_n: Norming,
    /// Multiplies the resolved bₙ, for deliberately mismatched norming.
    #[serde(default = "one")]
    pub b_n_scale: f64,
    pub theorems: Vec<TheoremId>,
    #[serde(default = "one")]
    pub constant_a: f64,
    /// Weight for Theorem 5.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub g: Option<WeightFunction>,
    /// Moment excess δ ∈ (0, 1] for Theorem 6.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub exponent_a: Option<SigmaExponent>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mc: Option<McSettings>,
    /// ε values for condition 2 of Theorem 7.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub epsilons: Vec<f64>,
    /// Matrix orders of the Theorem 7 sequence (iid cells only).
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub sequence: Vec<u64>,
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Cells {
    /// Every cell has this law; storage stays O(1) in n.
    Iid(DistributionSpec),
    Matrix(Vec<Vec<DistributionSpec>>),
    /// Point masses at the given values.
    Degenerate(Vec<Vec<f64>>),
    DegenerateCsv(PathBuf),
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MuMode {
    #[default]
    Zeros,
    EqualToC,
    Explicit(Vec<Vec<f64>>),
    Csv(PathBuf),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Truncation {
    Infinite,
    /// tᵢⱼ = bₙ with bₙ² = B̄ₙ(bₙ).
    SolveFixedPoint,
    Scalar(Level),
    Explicit(Vec<Vec<Level>>),
    /// Levels as numbers, `inf` allowed.
    Csv(PathBuf),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Centering {
    Value(f64),
    Named(NamedCentering),
}

impl Default for Centering {
    fn default() -> Self {
        Centering::Value(0.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NamedCentering {
    /// aₙ = ēₙ
    EBar,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Norming {
    Explicit(f64),
    SqrtBBar,
    SqrtB,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WeightFunction {
    /// g(x) = |x|^p, 0 < p ≤ 1
    Power(f64),
    /// g(x) = ln(e + |x|)
    Log,
}

impl WeightFunction {
    pub fn eval(self, x: f64) -> f64 {
        match self {
            WeightFunction::Power(p) => x.abs().powf(p),
            WeightFunction::Log => (std::f64::consts::E + x.abs()).ln(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct McSettings {
    pub replicates: usize,
    pub seed: u64,
    #[serde(default = "default_alpha")]
    pub alpha: f64,
}

fn default_alpha() -> f64 {
    DEFAULT_ALPHA
}

/// A problem with one named scenario field.
#[derive(Debug, thiserror::Error)]
#[error("field `{field}`: {source}")]
pub struct FieldError {
    pub field: &'static str,
    #[source]
    pub source: Error,
}

fn field(name: &'static str) -> impl Fn(Error) -> FieldError {
    move |source| FieldError { field: name, source }
}

fn invalid(name: &'static str, msg: String) -> FieldError {
    FieldError { field: name, source: Error::InvalidArgument(msg) }
}

fn read_matrix(base: &Path, path: &Path, n: usize) -> Result<RealMatrix> {
    let full = base.join(path);
    let file = std::fs::File::open(&full)
        .map_err(|e| Error::InvalidArgument(format!("cannot open {}: {e}", full.display())))?;
    read_csv_matrix(file, Some(n))
}

fn check_rows<T>(rows: &[Vec<T>], n: usize) -> Result<()> {
    if rows.len() != n {
        return Err(Error::DimensionMismatch(format!("matrix has {} rows, expected {n}", rows.len())));
    }
    Ok(())
}

impl Scenario {
    pub fn from_json(text: &str) -> serde_json::Result<Scenario> {
        serde_json::from_str(text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("scenario serializes")
    }

    /// Field-level checks that need no matrix data.
    pub fn validate(&self) -> std::result::Result<(), FieldError> {
        if self.name.is_empty()
            || !self.name.chars().all(|c| c.is_ascii_alphanumeric() || "-_.".contains(c))
        {
            return Err(invalid("name", format!("{:?} must be non-empty ASCII [A-Za-z0-9._-]", self.name)));
        }
        if self.n < 2 {
            return Err(invalid("n", format!("matrix order must be at least 2, got {}", self.n)));
        }
        if !(self.b_n_scale > 0.0) || !self.b_n_scale.is_finite() {
            return Err(field("b_n_scale")(Error::NonpositiveScale(self.b_n_scale)));
        }
        if let Norming::Explicit(b) = self.b_n {
            if !(b > 0.0) || !b.is_finite() {
                return Err(field("b_n")(Error::NonpositiveScale(b)));
            }
        }
        if let Centering::Value(a) = self.a_n {
            if !a.is_finite() {
                return Err(invalid("a_n", format!("must be finite, got {a}")));
            }
        }
        if !self.constant_a.is_finite() || self.constant_a < 0.0 {
            return Err(invalid("constant_a", format!("must be finite and ≥ 0, got {}", self.constant_a)));
        }
        if self.theorems.is_empty() {
            return Err(invalid("theorems", "at least one theorem is required".into()));
        }
        if self.theorems.contains(&TheoremId::T5) {
            match self.g {
                None => return Err(invalid("g", "Theorem 5 needs a weight function".into())),
                Some(WeightFunction::Power(p)) if !(p > 0.0 && p <= 1.0) => {
                    return Err(field("g")(Error::InvalidG(format!("power must lie in (0, 1], got {p}"))))
                }
                _ => {}
            }
        }
        if self.theorems.contains(&TheoremId::T6) {
            match self.delta {
                Some(d) if d > 0.0 && d <= 1.0 => {}
                other => {
                    return Err(invalid("delta", format!("Theorem 6 needs delta in (0, 1], got {other:?}")))
                }
            }
        }
        if self.theorems.contains(&TheoremId::T7) {
            if self.epsilons.is_empty() || self.epsilons.iter().any(|e| !(*e > 0.0) || !e.is_finite()) {
                return Err(invalid("epsilons", "Theorem 7 needs positive finite epsilons".into()));
            }
            if self.sequence.is_empty() {
                return Err(invalid("sequence", "Theorem 7 needs a sequence of matrix orders".into()));
            }
            if let Some(m) = self.sequence.iter().find(|m| **m < 2) {
                return Err(invalid("sequence", format!("matrix order {m} is below 2")));
            }
            if !matches!(self.cells, Cells::Iid(_)) {
                return Err(invalid("sequence", "Theorem 7 sequences need iid cells".into()));
            }
            if !matches!(self.mu, MuMode::EqualToC) {
                return Err(invalid("mu", "Theorem 7 centers at mu = c (use \"equal_to_c\")".into()));
            }
        }
        if let Some(mc) = &self.mc {
            if mc.replicates < MIN_REPLICATES {
                return Err(field("mc.replicates")(Error::TooFewReplicates(mc.replicates)));
            }
            if !(mc.alpha > 0.0 && mc.alpha < 1.0) {
                return Err(invalid("mc.alpha", format!("must lie in (0, 1), got {}", mc.alpha)));
            }
        }
        match &self.cells {
            Cells::Iid(s) => s.validate().map_err(field("cells"))?,
            Cells::Matrix(rows) => {
                check_rows(rows, self.n).map_err(field("cells"))?;
                for (i, row) in rows.iter().enumerate() {
                    if row.len() != self.n {
                        return Err(field("cells")(Error::DimensionMismatch(format!(
                            "row {i} has {} entries, expected {}",
                            row.len(),
                            self.n
                        ))));
                    }
                    for (j, s) in row.iter().enumerate() {
                        s.validate().map_err(|e| field("cells")(e.at_cell(i, j)))?;
                    }
                }
            }
            Cells::Degenerate(rows) => check_rows(rows, self.n).map_err(field("cells"))?,
            Cells::DegenerateCsv(_) => {}
        }
        Ok(())
    }

    /// Cell laws at the scenario's order.
    pub fn specs(&self, base: &Path) -> std::result::Result<SpecMatrix, FieldError> {
        self.specs_of_order(base, self.n)
    }

    /// Cell laws at order `n`; only iid cells can change order.
    pub fn specs_of_order(&self, base: &Path, n: usize) -> std::result::Result<SpecMatrix, FieldError> {
        let f = field("cells");
        match &self.cells {
            Cells::Iid(s) => Square::uniform(n, s.clone()).map_err(f),
            Cells::Matrix(rows) => Square::from_rows(rows.clone()).map_err(f),
            Cells::Degenerate(rows) => Ok(Square::from_rows(rows.clone())
                .map_err(f)?
                .map(|&v| DistributionSpec::point_mass(v))),
            Cells::DegenerateCsv(p) => Ok(read_matrix(base, p, n)
                .map_err(f)?
                .map(|&v| DistributionSpec::point_mass(v))),
        }
    }

    /// μ for the given cell means c.
    pub fn mu(&self, base: &Path, c: &RealMatrix) -> std::result::Result<RealMatrix, FieldError> {
        let n = c.n();
        let f = field("mu");
        match &self.mu {
            MuMode::Zeros => RealMatrix::zeros(n).map_err(f),
            MuMode::EqualToC => Ok(c.clone()),
            MuMode::Explicit(rows) => {
                check_rows(rows, n).map_err(&f)?;
                RealMatrix::from_rows(rows.clone()).map_err(f)
            }
            MuMode::Csv(p) => read_matrix(base, p, n).map_err(f),
        }
    }

    /// Truncation levels, or `None` when they come from the fixed-point solver.
    pub fn levels(&self, base: &Path, n: usize) -> std::result::Result<Option<LevelMatrix>, FieldError> {
        let f = field("truncation");
        Ok(Some(match &self.truncation {
            Truncation::SolveFixedPoint => return Ok(None),
            Truncation::Infinite => Square::uniform(n, Level::Infinite).map_err(f)?,
            Truncation::Scalar(l) => Square::uniform(n, *l).map_err(f)?,
            Truncation::Explicit(rows) => {
                check_rows(rows, n).map_err(&f)?;
                Square::from_rows(rows.clone()).map_err(f)?
            }
            Truncation::Csv(p) => read_matrix(base, p, n)
                .map_err(&f)?
                .try_map_indexed(|_, _, &t| Level::finite(t))
                .map_err(f)?,
        }))
    }
}
