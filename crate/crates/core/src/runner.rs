//! Scenario evaluation: resolves matrices and norming, evaluates the requested
//! bounds, runs the Monte-Carlo and exact checks and writes the report files.

use crate::bounds::{
    abs_moment_matrix, check_theorem7_conditions, g_moment_matrix, psi_general, psi_theta_upsilon,
    theorem1_bound, theorem2_bound, theorem3_bound, theorem4_bound, theorem5_bound, theorem6_bound,
    theorem_a_bound, theorem_a_third_moments, BoundReport, CltCase, CltConditionReport,
    Components, SigmaExponent, TheoremId,
};
use crate::dist::{DistributionSpec, Level};
use crate::error::Error;
use crate::matrix::{check_centering, default_centering_tol, CenteringCheck, RealMatrix, Square};
use crate::mc::{
    dump_sample, enumerate_exact_delta, simulate_raw, DumpFormat, McResult, RawSample,
    MAX_ENUMERATION_N,
};
use crate::moments::{
    build_moment_table, variance_summary, LevelMatrix, MomentTable, SpecMatrix, VarianceSummary,
};
use crate::scenario::{Centering, FieldError, Norming, Scenario};
use crate::solver::{solve_truncation_level, FixedPointResult, DEFAULT_TOL_REL};
use rayon::prelude::*;
use serde::Serialize;
use std::path::{Path, PathBuf};

/// Numerator below which the Lemma 2 ratio counts as zero.
pub const LEMMA2_ZERO: f64 = 1e-12;

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error("{0}")]
    Validation(String),
    #[error("{0}")]
    Numerical(String),
}

impl RunError {
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Validation(_) => 2,
            RunError::Numerical(_) => 3,
        }
    }

    fn classify(context: &str, e: &Error) -> RunError {
        let msg = format!("{context}: {e}");
        match e.root() {
            Error::DegenerateVariance | Error::NoBracket { .. } => RunError::Numerical(msg),
            _ => RunError::Validation(msg),
        }
    }
}

impl From<FieldError> for RunError {
    fn from(e: FieldError) -> Self {
        RunError::classify(&format!("field `{}`", e.field), &e.source)
    }
}

fn ctx(context: &'static str) -> impl Fn(Error) -> RunError {
    move |e| RunError::classify(context, &e)
}

/// Command-line overrides and output settings.
#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    pub seed: Option<u64>,
    pub replicates: Option<usize>,
    pub exponent_a: Option<SigmaExponent>,
    pub dump: Option<(DumpFormat, usize)>,
}

#[derive(Debug, Clone, Serialize)]
pub struct CenteringReport {
    pub c: CenteringCheck,
    pub mu: CenteringCheck,
}

#[derive(Debug, Clone, Serialize)]
pub struct Lemma2Report {
    pub b_n_var: f64,
    /// B̄ₙ with every tᵢⱼ = √Bₙ.
    pub b_bar_n: f64,
    pub c_plus_lambda: f64,
    /// |1 − √(B̄ₙ/Bₙ)| / (Cₙ + Λₙ); `None` when the denominator vanishes
    /// and the numerator does not.
    pub ratio: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct VarianceCheck {
    pub sample_variance: f64,
    pub std_error: f64,
    pub b_bar_n: f64,
    pub z: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct McReport {
    pub replicates: usize,
    pub seed: u64,
    pub alpha: f64,
    /// Sₙ standardized by the scenario's (aₙ, bₙ).
    pub raw: McResult,
    /// S̄ₙ standardized by (ēₙ, √B̄ₙ): the estimate of Δ̄ₙ.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub truncated: Option<McResult>,
    /// Sₙ standardized by (0, √Bₙ).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub variance_norming: Option<McResult>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub truncated_variance: Option<VarianceCheck>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Estimate {
    MonteCarlo,
    Exact,
}

#[derive(Debug, Clone, Serialize)]
pub struct DominationCheck {
    pub theorem: TheoremId,
    pub estimate: Estimate,
    pub delta: f64,
    pub total: f64,
    pub slack: f64,
    pub holds: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct FittedConstant {
    pub theorem: TheoremId,
    pub estimate: Estimate,
    pub delta: f64,
    /// Smallest A making the bound cover `delta`; `null` if no A suffices.
    pub constant_a: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub name: String,
    pub n: usize,
    pub constant_a: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub exponent_a: Option<SigmaExponent>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub solver: Option<FixedPointResult>,
    pub centering: CenteringReport,
    pub summary: VarianceSummary,
    pub a_n: f64,
    pub b_n: f64,
    pub bounds: Vec<BoundReport>,
    /// Source of the Δ̄ₙ entering Theorems 1 and 2.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub delta_bar_estimate: Option<Estimate>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub theorem7: Option<CltConditionReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lemma2: Option<Lemma2Report>,
    /// Exact Δₙ at (aₙ, bₙ) for degenerate cells with n ≤ 8.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub exact_delta: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mc: Option<McReport>,
    pub fitted_constants: Vec<FittedConstant>,
    pub checks: Vec<DominationCheck>,
}

impl Report {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.holds)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    /// One row per bound report, one column per component.
    pub fn components_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        let mut header = vec!["theorem".to_string(), "a_n".into(), "b_n".into()];
        header.extend(Components::default().columns().iter().map(|(k, _)| k.to_string()));
        header.extend(["constant_A".to_string(), "total".into()]);
        w.write_record(&header).expect("in-memory write");
        let opt = |v: Option<f64>| v.map(fmt_number).unwrap_or_default();
        for r in &self.bounds {
            let mut row = vec![r.theorem.to_string(), fmt_number(r.a_n), fmt_number(r.b_n)];
            row.extend(r.components.columns().iter().map(|(_, v)| opt(*v)));
            row.extend([opt(r.constant_a), fmt_number(r.total)]);
            w.write_record(&row).expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 csv")
    }
}

/// Shortest round-tripping decimal, with an exponent for very small or large values.
fn fmt_number(x: f64) -> String {
    if x.is_finite() {
        serde_json::to_string(&x).expect("finite float")
    } else {
        x.to_string()
    }
}

/// Truncation, moment table and norming of a scenario at one matrix order.
struct Resolved {
    specs: SpecMatrix,
    c: RealMatrix,
    mu: RealMatrix,
    t: LevelMatrix,
    solver: Option<FixedPointResult>,
    table: MomentTable,
    summary: VarianceSummary,
    a_n: f64,
    b_n: f64,
}

fn resolve(scenario: &Scenario, base: &Path, specs: SpecMatrix) -> Result<Resolved, RunError> {
    let n = specs.n();
    let c = specs.try_map_indexed(|_, _, s| s.mean()).map_err(ctx("cells"))?;
    let mu = scenario.mu(base, &c)?;
    let (t, solver) = match scenario.levels(base, n)? {
        Some(t) => (t, None),
        None => {
            let r = solve_truncation_level(&specs, &mu, DEFAULT_TOL_REL).map_err(ctx("truncation"))?;
            let t = Square::uniform(n, Level::finite(r.b_n).map_err(ctx("truncation"))?)
                .map_err(ctx("truncation"))?;
            (t, Some(r))
        }
    };
    let mut table = build_moment_table(&specs, &mu, &t, None).map_err(ctx("moments"))?;
    let mut summary = variance_summary(&table);
    if let Some(b) = summary.b_n.filter(|b| *b > 0.0) {
        table = build_moment_table(&specs, &mu, &t, Some(b)).map_err(ctx("moments"))?;
        summary = variance_summary(&table);
    }
    let a_n = match scenario.a_n {
        Centering::Value(a) => a,
        Centering::Named(_) => summary.e_bar_n,
    };
    let b_n = match scenario.b_n {
        Norming::Explicit(b) => b,
        Norming::SqrtBBar => {
            summary.require_nondegenerate().map_err(ctx("b_n"))?;
            summary.b_bar_n.sqrt()
        }
        Norming::SqrtB => match summary.b_n {
            None => {
                return Err(ctx("b_n")(Error::MissingMoments(
                    "sqrt_b needs finite cell variances".into(),
                )))
            }
            Some(b) if b > 0.0 => b.sqrt(),
            Some(_) => return Err(ctx("b_n")(Error::DegenerateVariance)),
        },
    } * scenario.b_n_scale;
    Ok(Resolved { specs, c, mu, t, solver, table, summary, a_n, b_n })
}

fn all_point_masses(specs: &SpecMatrix) -> bool {
    specs.iter().all(|s| matches!(s, DistributionSpec::PointMass { .. }))
}

fn lemma2(r: &Resolved) -> Result<Option<Lemma2Report>, RunError> {
    let Some(b_var) = r.summary.b_n.filter(|b| *b > 0.0) else {
        return Ok(None);
    };
    let n = r.specs.n();
    let t = Square::uniform(n, Level::finite(b_var.sqrt()).map_err(ctx("lemma 2"))?)
        .map_err(ctx("lemma 2"))?;
    let table = build_moment_table(&r.specs, &r.mu, &t, Some(b_var)).map_err(ctx("lemma 2"))?;
    let b_bar = variance_summary(&table).b_bar_n;
    let t4 = theorem4_bound(&table, b_var, 1.0).map_err(ctx("lemma 2"))?;
    let den = t4.components.c.unwrap_or(0.0) + t4.components.lambda.unwrap_or(0.0);
    let num = (1.0 - (b_bar / b_var).sqrt()).abs();
    let ratio = if num <= LEMMA2_ZERO {
        Some(0.0)
    } else if den > 0.0 {
        Some(num / den)
    } else {
        None
    };
    Ok(Some(Lemma2Report { b_n_var: b_var, b_bar_n: b_bar, c_plus_lambda: den, ratio }))
}

struct Samples {
    raw: RawSample,
    truncated: RawSample,
    dkw_alpha: f64,
}

/// Evaluates a scenario. `base` resolves CSV sidecar paths.
pub fn evaluate(scenario: &Scenario, base: &Path, opts: &RunOptions) -> Result<Report, RunError> {
    scenario.validate()?;
    let exponent_a = opts.exponent_a.or(scenario.exponent_a);
    if scenario.theorems.contains(&TheoremId::A) && exponent_a.is_none() {
        return Err(RunError::Validation(
            "field `exponent_a`: Theorem A needs an explicit exponent (3/2 or 3), in the scenario or via --exponent-A".into(),
        ));
    }
    let specs = scenario.specs(base)?;
    if specs.n() != scenario.n {
        return Err(RunError::Validation(format!(
            "field `cells`: matrix has {} rows, expected {}",
            specs.n(),
            scenario.n
        )));
    }
    let r = resolve(scenario, base, specs)?;
    let n = r.specs.n();
    let constant_a = scenario.constant_a;

    let mc_settings = scenario.mc.map(|mut m| {
        if let Some(s) = opts.seed {
            m.seed = s;
        }
        if let Some(k) = opts.replicates {
            m.replicates = k;
        }
        m
    });
    let samples = match mc_settings {
        None => None,
        Some(m) => {
            let raw = simulate_raw(&r.specs, &r.mu, &r.t, m.replicates, m.seed, false)
                .map_err(ctx("mc"))?;
            let truncated = if r.t.iter().all(|l| l.is_infinite()) {
                RawSample { values: raw.values.clone(), truncated: true }
            } else {
                simulate_raw(&r.specs, &r.mu, &r.t, m.replicates, m.seed, true).map_err(ctx("mc"))?
            };
            Some(Samples { raw, truncated, dkw_alpha: m.alpha })
        }
    };
    let standardize = |s: &RawSample, a: f64, b: f64| s.standardize(a, b, samples.as_ref().unwrap().dkw_alpha);
    let truncated_mc = match &samples {
        Some(s) if !r.summary.degenerate => Some(
            standardize(&s.truncated, r.summary.e_bar_n, r.summary.b_bar_n.sqrt()).map_err(ctx("mc"))?,
        ),
        _ => None,
    };

    let exact_ok = all_point_masses(&r.specs) && n <= MAX_ENUMERATION_N;
    // for point masses S̄ₙ is the permuted sum of the degenerate matrix ν = μ + ā
    let nu = r.mu.zip_map(&r.table.a_bar, |m, a| m + a).map_err(ctx("moments"))?;
    let exact_delta = if exact_ok {
        Some(enumerate_exact_delta(&r.c, r.a_n, r.b_n).map_err(ctx("enumeration"))?)
    } else {
        None
    };
    let (delta_bar, delta_bar_estimate) = if exact_ok && !r.summary.degenerate {
        let d = enumerate_exact_delta(&nu, r.summary.e_bar_n, r.summary.b_bar_n.sqrt())
            .map_err(ctx("enumeration"))?;
        (Some(d), Some(Estimate::Exact))
    } else {
        let d = truncated_mc.as_ref().map(|m| m.delta_hat);
        (d, d.map(|_| Estimate::MonteCarlo))
    };

    let mut bounds = Vec::new();
    let mut theorem7 = None;
    for &th in &scenario.theorems {
        match th {
            TheoremId::T1 => {
                let ptu = psi_theta_upsilon(&r.summary, &r.table, r.a_n, r.b_n).map_err(ctx("theorem 1"))?;
                let p = Square::uniform(n, 1.0 / n as f64).map_err(ctx("theorem 1"))?;
                let psi = psi_general(&p, &r.table.tail).map_err(ctx("theorem 1"))?;
                bounds.push(
                    theorem1_bound(delta_bar, psi, ptu.theta, ptu.upsilon, r.a_n, r.b_n)
                        .map_err(ctx("theorem 1"))?,
                );
            }
            TheoremId::T2 => bounds.push(
                theorem2_bound(delta_bar, &r.summary, &r.table, r.a_n, r.b_n)
                    .map_err(ctx("theorem 2"))?,
            ),
            TheoremId::T3 => bounds.push(
                theorem3_bound(&r.table, &r.summary, r.b_n, constant_a).map_err(ctx("theorem 3"))?,
            ),
            TheoremId::T4 => bounds.push(
                theorem4_bound(&r.table, r.summary.b_n.unwrap_or(f64::NAN), constant_a)
                    .map_err(ctx("theorem 4"))?,
            ),
            TheoremId::T5 => {
                let w = scenario.g.expect("validated");
                let g = move |x: f64| w.eval(x);
                let gm = g_moment_matrix(&r.specs, &r.mu, &g).map_err(ctx("theorem 5"))?;
                bounds.push(
                    theorem5_bound(&r.table, &gm, r.summary.b_n.unwrap_or(f64::NAN), constant_a, &g)
                        .map_err(ctx("theorem 5"))?,
                );
            }
            TheoremId::T6 => {
                let delta = scenario.delta.expect("validated");
                let am = abs_moment_matrix(&r.specs, &r.mu, 2.0 + delta).map_err(ctx("theorem 6"))?;
                bounds.push(
                    theorem6_bound(&r.table, &am, r.summary.b_n.unwrap_or(f64::NAN), constant_a, delta)
                        .map_err(ctx("theorem 6"))?,
                );
            }
            TheoremId::A => {
                let exp = exponent_a.expect("checked above");
                r.summary.require_nondegenerate().map_err(ctx("theorem A"))?;
                let thirds = theorem_a_third_moments(&r.specs, &r.table).map_err(ctx("theorem A"))?;
                let unit = theorem_a_bound(&thirds, r.summary.b_bar_n, 1.0, exp).map_err(ctx("theorem A"))?;
                let total = theorem_a_bound(&thirds, r.summary.b_bar_n, constant_a, exp)
                    .map_err(ctx("theorem A"))?;
                bounds.push(BoundReport {
                    theorem: TheoremId::A,
                    components: Components { third_moment_term: Some(total), ..Default::default() },
                    constant_a: Some(constant_a),
                    a_multiplier: Some(unit),
                    total,
                    a_n: r.summary.e_bar_n,
                    b_n: r.summary.b_bar_n.sqrt(),
                });
            }
            TheoremId::T7 => {
                let cases = scenario
                    .sequence
                    .iter()
                    .map(|&m| {
                        let m = usize::try_from(m).map_err(|_| {
                            RunError::Validation(format!("field `sequence`: order {m} is too large"))
                        })?;
                        let rm = resolve(scenario, base, scenario.specs_of_order(base, m)?)?;
                        Ok(CltCase { specs: rm.specs, b_n: rm.b_n })
                    })
                    .collect::<Result<Vec<_>, RunError>>()?;
                theorem7 = Some(check_theorem7_conditions(&cases, &scenario.epsilons).map_err(ctx("theorem 7"))?);
            }
        }
    }

    let wants_variance = scenario
        .theorems
        .iter()
        .any(|t| matches!(t, TheoremId::T4 | TheoremId::T5 | TheoremId::T6));
    let lemma2 = if wants_variance { lemma2(&r)? } else { None };

    let mut checks = Vec::new();
    let mut fitted = Vec::new();
    for b in &bounds {
        let on_truncated = b.theorem == TheoremId::A;
        if let Some(s) = &samples {
            let sample = if on_truncated { &s.truncated } else { &s.raw };
            let est = standardize(sample, b.a_n, b.b_n).map_err(ctx("mc"))?;
            let slack = 2.0 * est.dkw_epsilon;
            checks.push(DominationCheck {
                theorem: b.theorem,
                estimate: Estimate::MonteCarlo,
                delta: est.delta_hat,
                total: b.total,
                slack,
                holds: est.delta_hat <= b.total + slack,
            });
            if !exact_ok {
                if let Some(a) = b.fitted_constant(est.delta_hat) {
                    fitted.push(FittedConstant {
                        theorem: b.theorem,
                        estimate: Estimate::MonteCarlo,
                        delta: est.delta_hat,
                        constant_a: a,
                    });
                }
            }
        }
        if exact_ok {
            let m = if on_truncated { &nu } else { &r.c };
            let d = enumerate_exact_delta(m, b.a_n, b.b_n).map_err(ctx("enumeration"))?;
            let slack = 1e-12;
            checks.push(DominationCheck {
                theorem: b.theorem,
                estimate: Estimate::Exact,
                delta: d,
                total: b.total,
                slack,
                holds: d <= b.total + slack,
            });
            if let Some(a) = b.fitted_constant(d) {
                fitted.push(FittedConstant { theorem: b.theorem, estimate: Estimate::Exact, delta: d, constant_a: a });
            }
        }
    }

    let mc = match (&samples, mc_settings) {
        (Some(s), Some(m)) => {
            let raw = standardize(&s.raw, r.a_n, r.b_n).map_err(ctx("mc"))?;
            let variance_norming = match r.summary.b_n {
                Some(b) if b > 0.0 => Some(standardize(&s.raw, 0.0, b.sqrt()).map_err(ctx("mc"))?),
                _ => None,
            };
            let truncated_variance = (!r.summary.degenerate).then(|| {
                let sample_variance = s.truncated.variance();
                let std_error = s.truncated.variance_std_error();
                VarianceCheck {
                    sample_variance,
                    std_error,
                    b_bar_n: r.summary.b_bar_n,
                    z: if std_error > 0.0 { (sample_variance - r.summary.b_bar_n) / std_error } else { 0.0 },
                }
            });
            Some(McReport {
                replicates: m.replicates,
                seed: m.seed,
                alpha: m.alpha,
                raw,
                truncated: truncated_mc,
                variance_norming,
                truncated_variance,
            })
        }
        _ => None,
    };

    Ok(Report {
        name: scenario.name.clone(),
        n,
        constant_a,
        exponent_a: if scenario.theorems.contains(&TheoremId::A) { exponent_a } else { None },
        solver: r.solver,
        centering: CenteringReport {
            c: check_centering(&r.c, default_centering_tol(&r.c)),
            mu: check_centering(&r.mu, default_centering_tol(&r.mu)),
        },
        summary: r.summary,
        a_n: r.a_n,
        b_n: r.b_n,
        bounds,
        delta_bar_estimate,
        theorem7,
        lemma2,
        exact_delta,
        mc,
        fitted_constants: fitted,
        checks,
    })
}

pub fn load_scenario(path: &Path) -> Result<Scenario, RunError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| RunError::Validation(format!("cannot read {}: {e}", path.display())))?;
    Scenario::from_json(&text).map_err(|e| RunError::Validation(format!("{}: {e}", path.display())))
}

fn base_dir(path: &Path) -> PathBuf {
    path.parent().map(Path::to_path_buf).unwrap_or_default()
}

/// Paths of the two report files for a scenario name.
pub fn report_paths(out: &Path, name: &str) -> (PathBuf, PathBuf) {
    (out.join(format!("{name}.report.json")), out.join(format!("{name}.components.csv")))
}

fn write_outputs(report: &Report, out: &Path, opts: &RunOptions) -> Result<(), RunError> {
    let io = |e: std::io::Error| RunError::Validation(format!("cannot write to {}: {e}", out.display()));
    std::fs::create_dir_all(out).map_err(io)?;
    let (json, csv) = report_paths(out, &report.name);
    std::fs::write(json, report.to_json()).map_err(io)?;
    std::fs::write(csv, report.components_csv()).map_err(io)?;
    if let (Some((format, limit)), Some(mc)) = (opts.dump, &report.mc) {
        let ext = match format {
            DumpFormat::Csv => "csv",
            DumpFormat::Binary => "bin",
        };
        let mut dumps = vec![("raw", &mc.raw)];
        if let Some(t) = &mc.truncated {
            dumps.push(("truncated", t));
        }
        for (tag, result) in dumps {
            let path = out.join(format!("{}.{tag}.sample.{ext}", report.name));
            dump_sample(&path, &result.sorted_standardized_sample, format, limit).map_err(io)?;
        }
    }
    Ok(())
}

/// Loads, evaluates and writes one scenario file.
pub fn run_file(path: &Path, out: &Path, opts: &RunOptions) -> Result<Report, RunError> {
    let scenario = load_scenario(path)?;
    let report = evaluate(&scenario, &base_dir(path), opts)?;
    write_outputs(&report, out, opts)?;
    Ok(report)
}

#[derive(Debug)]
pub struct SuiteEntry {
    pub file: PathBuf,
    pub outcome: Result<Report, RunError>,
}

impl SuiteEntry {
    pub fn passed(&self) -> bool {
        matches!(&self.outcome, Ok(r) if r.passed())
    }

    pub fn summary_line(&self) -> String {
        let name = self.file.file_name().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
        match &self.outcome {
            Err(e) => format!("FAIL  {name}  error: {e}"),
            Ok(r) => {
                let held = r.checks.iter().filter(|c| c.holds).count();
                let failed: Vec<String> = r
                    .checks
                    .iter()
                    .filter(|c| !c.holds)
                    .map(|c| format!("theorem {} ({:?}: {:.4} > {:.4} + {:.4})", c.theorem, c.estimate, c.delta, c.total, c.slack))
                    .collect();
                let fitted: Vec<String> = r
                    .fitted_constants
                    .iter()
                    .map(|f| format!("A{}={:.3}", f.theorem, f.constant_a))
                    .collect();
                let status = if failed.is_empty() { "PASS" } else { "FAIL" };
                let mut line = format!("{status}  {name}  checks {held}/{}", r.checks.len());
                if !fitted.is_empty() {
                    line.push_str(&format!("  fitted {}", fitted.join(" ")));
                }
                if !failed.is_empty() {
                    line.push_str(&format!("  violated: {}", failed.join("; ")));
                }
                line
            }
        }
    }
}

/// Scenario files in a directory: `*.json`, excluding written reports, sorted by name.
pub fn scenario_files(dir: &Path) -> std::io::Result<Vec<PathBuf>> {
    let mut files: Vec<PathBuf> = std::fs::read_dir(dir)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| {
            p.is_file()
                && p.extension().is_some_and(|e| e == "json")
                && !p.to_string_lossy().ends_with(".report.json")
        })
        .collect();
    files.sort();
    Ok(files)
}

/// Runs every scenario of a suite, `parallel` at a time (sequentially when `None`).
pub fn verify_suite(
    files: &[PathBuf],
    out: &Path,
    opts: &RunOptions,
    parallel: Option<usize>,
) -> Result<Vec<SuiteEntry>, RunError> {
    let run = |f: &PathBuf| SuiteEntry { file: f.clone(), outcome: run_file(f, out, opts) };
    match parallel {
        None | Some(1) => Ok(files.iter().map(run).collect()),
        Some(k) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(k)
                .build()
                .map_err(|e| RunError::Validation(format!("cannot start {k} workers: {e}")))?;
            Ok(pool.install(|| files.par_iter().map(run).collect()))
        }
    }
}

