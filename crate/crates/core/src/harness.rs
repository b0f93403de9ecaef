//! Seeded randomized property trials over a chart.
//!
//! Trial `i` draws its operands from `ChaCha8Rng::seed_from_u64(seed)` on
//! stream `i`, so every trial is reproducible on its own and the report
//! does not depend on thread scheduling.

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::bracket::{bracket_degree_holds, graded_product_residual, graded_symmetry_residual};
use crate::constraints::{self, ConstraintId, Residual};
use crate::error::{Error, Result};
use crate::form::TensorValuedForm;
use crate::geometry::{ChartGeometry, Connection, Mode};
use crate::identities;
use crate::random::{random_form, random_polynomial, FormBounds};
use crate::star::{
    associator, associator_functions_with, function_coefficient_with, graded_jacobiator,
    leibniz_residual, GradientTerm,
};

/// Name of the generator recorded in every report.
pub const RNG_NAME: &str = "ChaCha8";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Suite {
    PoissonAxioms,
    Leibniz,
    Associativity,
    OperatorIdentities,
    FunctionStar,
}

impl Suite {
    pub const ALL: [Suite; 5] = [
        Suite::PoissonAxioms,
        Suite::Leibniz,
        Suite::Associativity,
        Suite::OperatorIdentities,
        Suite::FunctionStar,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::PoissonAxioms => "poisson-axioms",
            Suite::Leibniz => "leibniz",
            Suite::Associativity => "associativity",
            Suite::OperatorIdentities => "operator-identities",
            Suite::FunctionStar => "function-star",
        }
    }

    fn default_order(self) -> usize {
        match self {
            Suite::FunctionStar => 3,
            _ => 2,
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Suite::ALL
            .iter()
            .copied()
            .find(|x| x.name() == s)
            .ok_or_else(|| {
                let names: Vec<_> = Suite::ALL.iter().map(|x| x.name()).collect();
                Error::Input(format!(
                    "unknown suite `{s}` (expected one of {})",
                    names.join(", ")
                ))
            })
    }
}

impl Serialize for Suite {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(self.name())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TrialConfig {
    pub seed: u64,
    pub trials: usize,
    pub max_poly_degree: usize,
    pub max_form_degree: usize,
    pub max_rank: usize,
    /// Highest power of hbar checked; the suite default when `None`.
    pub order: Option<usize>,
    #[serde(skip)]
    pub check_prerequisites: bool,
    pub gradient_term: GradientTerm,
    #[serde(skip)]
    pub timing: bool,
}

impl Default for TrialConfig {
    fn default() -> Self {
        TrialConfig {
            seed: 1,
            trials: 25,
            max_poly_degree: 2,
            max_form_degree: 2,
            max_rank: 1,
            order: None,
            check_prerequisites: true,
            gradient_term: GradientTerm::default(),
            timing: true,
        }
    }
}

impl TrialConfig {
    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::Input("trials must be positive".into()));
        }
        if self.max_poly_degree == 0 {
            return Err(Error::Input("max degree must be positive".into()));
        }
        Ok(())
    }
}

/// One property evaluated on one trial.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    /// First nonzero component of the residual.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub residual: Option<String>,
}

impl Check {
    fn zero(name: impl Into<String>, r: &TensorValuedForm) -> Self {
        let residual = first_component(r);
        Check {
            name: name.into(),
            passed: residual.is_none(),
            residual,
        }
    }

    fn flag(name: impl Into<String>, ok: bool) -> Self {
        Check {
            name: name.into(),
            passed: ok,
            residual: None,
        }
    }
}

/// Folds per-index residuals of one identity into a single check.
fn all_zero(name: &str, residuals: impl IntoIterator<Item = (String, TensorValuedForm)>) -> Check {
    for (label, r) in residuals {
        if let Some(c) = first_component(&r) {
            return Check {
                name: name.into(),
                passed: false,
                residual: Some(format!("{label}: {c}")),
            };
        }
    }
    Check::flag(name, true)
}

fn first_component(f: &TensorValuedForm) -> Option<String> {
    let (k, v) = f.components().next()?;
    if f.is_scalar_function() {
        return Some(v.to_string());
    }
    Some(format!("{} = {v}", f.key_string(k)))
}

fn shape_label(f: &TensorValuedForm) -> String {
    format!("({},{};{})", f.upper_rank(), f.lower_rank(), f.degree())
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Trial {
    pub index: usize,
    pub passed: bool,
    /// Operand types as `(k,l;p)`.
    pub operands: Vec<String>,
    pub checks: Vec<Check>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub elapsed_ms: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Prerequisite {
    pub name: String,
    pub passed: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub residual: Option<Residual>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Outcome {
    Passed,
    Failed,
    PrerequisiteFailed,
}

impl Outcome {
    /// Process exit code: 0 passed, 1 failed, 3 prerequisite failure.
    pub fn exit_code(self) -> i32 {
        match self {
            Outcome::Passed => 0,
            Outcome::Failed => 1,
            Outcome::PrerequisiteFailed => 3,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ChartSummary {
    pub dimension: usize,
    pub mode: &'static str,
    pub torsion_free: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VerifyReport {
    pub rng: &'static str,
    pub suite: Suite,
    pub chart: ChartSummary,
    pub config: TrialConfig,
    pub order: usize,
    pub operands: &'static str,
    pub prerequisites_checked: bool,
    pub prerequisites: Vec<Prerequisite>,
    pub outcome: Outcome,
    /// Chart-level identities checked once, independent of the operands.
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub chart_checks: Vec<Check>,
    pub failed_trials: usize,
    pub trials: Vec<Trial>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub elapsed_ms: Option<f64>,
}

impl VerifyReport {
    pub fn exit_code(&self) -> i32 {
        self.outcome.exit_code()
    }

    pub fn failed_prerequisites(&self) -> Vec<&str> {
        self.prerequisites
            .iter()
            .filter(|p| !p.passed)
            .map(|p| p.name.as_str())
            .collect()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// Plain-text summary, one line per trial.
    pub fn to_text(&self) -> String {
        let mut out = format!(
            "suite {} on d={} {} chart, rng {} seed {}, {} trials\n",
            self.suite,
            self.chart.dimension,
            self.chart.mode,
            self.rng,
            self.config.seed,
            self.config.trials
        );
        for p in &self.prerequisites {
            out.push_str(&format!(
                "prerequisite {}: {}\n",
                p.name,
                if p.passed { "ok" } else { "FAILED" }
            ));
        }
        for c in &self.chart_checks {
            out.push_str(&format!(
                "chart {}: {}\n",
                c.name,
                if c.passed { "ok" } else { "FAILED" }
            ));
        }
        for t in &self.trials {
            let failed: Vec<&str> = t
                .checks
                .iter()
                .filter(|c| !c.passed)
                .map(|c| c.name.as_str())
                .collect();
            out.push_str(&format!(
                "trial {} {} {}",
                t.index,
                t.operands.join(" "),
                if t.passed { "ok" } else { "FAILED" }
            ));
            if !failed.is_empty() {
                out.push_str(&format!(" [{}]", failed.join(", ")));
            }
            out.push('\n');
        }
        let verdict = match self.outcome {
            Outcome::Passed => "passed".to_string(),
            Outcome::Failed => format!(
                "failed ({} of {} trials)",
                self.failed_trials,
                self.trials.len()
            ),
            Outcome::PrerequisiteFailed => {
                format!(
                    "prerequisite failed: {}",
                    self.failed_prerequisites().join(", ")
                )
            }
        };
        out.push_str(&verdict);
        out.push('\n');
        out
    }
}

fn prerequisite_ids(suite: Suite, mode: Mode) -> Vec<ConstraintId> {
    match (suite, mode) {
        (Suite::PoissonAxioms | Suite::Associativity, Mode::Symplectic) => {
            ConstraintId::SYMPLECTIC_ADMISSIBILITY.to_vec()
        }
        (Suite::PoissonAxioms | Suite::Associativity, Mode::Poisson) => {
            ConstraintId::POISSON_ADMISSIBILITY.to_vec()
        }
        (Suite::Leibniz, _) => vec![
            ConstraintId::RZero,
            ConstraintId::SymplecticTilde,
            ConstraintId::REqualsNablaT,
        ],
        (Suite::OperatorIdentities, _) => Vec::new(),
        (Suite::FunctionStar, _) => vec![ConstraintId::JacobiTheta],
    }
}

fn prerequisites(suite: Suite, geom: &ChartGeometry) -> Result<Vec<Prerequisite>> {
    let mut out = Vec::new();
    if suite == Suite::FunctionStar {
        let t = geom.torsion();
        out.push(Prerequisite {
            name: "torsion_free".into(),
            passed: t.is_zero(),
            residual: t.components().next().map(|(k, v)| Residual {
                indices: k.iter().map(|i| *i as usize + 1).collect(),
                expr: v.to_string(),
                failing_count: t.len(),
                part: None,
                all: Vec::new(),
            }),
        });
    }
    for id in prerequisite_ids(suite, geom.mode()) {
        let r = constraints::check(geom, id)?;
        out.push(Prerequisite {
            name: id.name().into(),
            passed: r.passed(),
            residual: r.residual,
        });
    }
    Ok(out)
}

struct Plan<'a> {
    suite: Suite,
    geom: &'a ChartGeometry,
    cfg: &'a TrialConfig,
    bounds: FormBounds,
    order: usize,
}

impl Plan<'_> {
    fn operands(&self, rng: &mut ChaCha8Rng, n: usize) -> Vec<TensorValuedForm> {
        let d = self.geom.dimension();
        (0..n)
            .map(|_| {
                if self.suite == Suite::FunctionStar {
                    TensorValuedForm::scalar(random_polynomial(rng, d, self.cfg.max_poly_degree))
                } else {
                    random_form(rng, &self.bounds)
                }
            })
            .collect()
    }

    fn run_trial(&self, index: usize) -> Result<Trial> {
        let start = Instant::now();
        let mut rng = ChaCha8Rng::seed_from_u64(self.cfg.seed);
        rng.set_stream(index as u64);
        let g = self.geom;
        let n = match self.suite {
            Suite::OperatorIdentities => 1,
            Suite::Leibniz => 2,
            _ => 3,
        };
        let ops = self.operands(&mut rng, n);
        let mut checks = Vec::new();
        match self.suite {
            Suite::PoissonAxioms => {
                let (a, b, c) = (&ops[0], &ops[1], &ops[2]);
                checks.push(Check::flag(
                    "bracket_degree",
                    bracket_degree_holds(a, b, g)?,
                ));
                checks.push(Check::zero(
                    "graded_symmetry",
                    &graded_symmetry_residual(a, b, g)?,
                ));
                checks.push(Check::zero(
                    "graded_product",
                    &graded_product_residual(a, b, c, g)?,
                ));
                checks.push(Check::zero(
                    "graded_jacobi",
                    &graded_jacobiator(a, b, c, g)?,
                ));
            }
            Suite::Leibniz => {
                checks.push(Check::zero(
                    "leibniz",
                    &leibniz_residual(&ops[0], &ops[1], g)?,
                ));
            }
            Suite::Associativity => {
                let (a, b, c) = (&ops[0], &ops[1], &ops[2]);
                let scalar = ops.iter().all(TensorValuedForm::is_scalar_function);
                let res = if scalar && g.is_torsion_free() {
                    associator_functions_with(
                        &a.scalar_value(),
                        &b.scalar_value(),
                        &c.scalar_value(),
                        g,
                        self.order,
                        self.cfg.gradient_term,
                    )?
                    .into_iter()
                    .map(TensorValuedForm::scalar)
                    .collect()
                } else {
                    associator(a, b, c, g, self.order)?
                };
                for (k, r) in res.iter().enumerate() {
                    checks.push(Check::zero(format!("associativity_order_{k}"), r));
                }
            }
            Suite::OperatorIdentities => checks = operator_checks(&ops[0], g),
            Suite::FunctionStar => {
                let f: Vec<_> = ops.iter().map(|o| o.scalar_value()).collect();
                let conv = self.cfg.gradient_term;
                let res = associator_functions_with(&f[0], &f[1], &f[2], g, self.order, conv)?;
                for (k, r) in res.iter().enumerate() {
                    checks.push(Check::zero(
                        format!("associativity_order_{k}"),
                        &TensorValuedForm::scalar(r.clone()),
                    ));
                }
                for k in 1..=self.order {
                    let fg = function_coefficient_with(k, &f[0], &f[1], g, conv)?;
                    let gf = function_coefficient_with(k, &f[1], &f[0], g, conv)?;
                    let r = if k % 2 == 0 { fg.sub(&gf) } else { fg.add(&gf) };
                    checks.push(Check::zero(
                        format!("parity_order_{k}"),
                        &TensorValuedForm::scalar(r),
                    ));
                }
            }
        }
        let passed = checks.iter().all(|c| c.passed);
        Ok(Trial {
            index,
            passed,
            operands: ops.iter().map(shape_label).collect(),
            checks,
            elapsed_ms: self.cfg.timing.then(|| start.elapsed().as_secs_f64() * 1e3),
        })
    }
}

fn labelled(label: String, r: TensorValuedForm) -> (String, TensorValuedForm) {
    (label, r)
}

/// Every local operator identity on one form, over all index values.
pub fn operator_checks(a: &TensorValuedForm, g: &ChartGeometry) -> Vec<Check> {
    let d = g.dimension();
    let pairs: Vec<(usize, usize)> = (0..d).flat_map(|m| (0..d).map(move |n| (m, n))).collect();
    let sel_name = |s: Connection| match s {
        Connection::Primary => "",
        Connection::Tilde => "tilde_",
    };
    let mut checks = Vec::new();
    for sel in [Connection::Primary, Connection::Tilde] {
        checks.push(Check::zero(
            format!("{}d_nabla_relation", sel_name(sel)),
            &identities::d_nabla_relation(a, g, sel),
        ));
    }
    checks.push(all_zero(
        "d_nabla_exchange",
        (0..d).map(|l| {
            labelled(
                format!("l={}", l + 1),
                identities::d_nabla_exchange(a, g, l),
            )
        }),
    ));
    checks.push(all_zero(
        "d_interior_relation",
        (0..d).map(|l| {
            labelled(
                format!("l={}", l + 1),
                identities::d_interior_relation(a, g, l),
            )
        }),
    ));
    checks.push(all_zero(
        "interior_nabla_commute",
        pairs.iter().map(|&(m, n)| {
            labelled(
                format!("m={},n={}", m + 1, n + 1),
                identities::interior_nabla_commutator(a, g, m, n),
            )
        }),
    ));
    for sel in [Connection::Primary, Connection::Tilde] {
        checks.push(all_zero(
            &format!("{}commutator_expansion", sel_name(sel)),
            pairs.iter().map(|&(m, n)| {
                labelled(
                    format!("m={},n={}", m + 1, n + 1),
                    identities::commutator_residual(a, g, m, n, sel),
                )
            }),
        ));
    }
    checks.push(all_zero(
        "nabla2_decomposition",
        pairs.iter().map(|&(m, n)| {
            labelled(
                format!("m={},n={}", m + 1, n + 1),
                identities::nabla2_decomposition(a, g, m, n),
            )
        }),
    ));
    for sel in [Connection::Primary, Connection::Tilde] {
        checks.push(Check::zero(
            format!("{}d_squared_curvature", sel_name(sel)),
            &identities::d_squared_residual(a, g, sel),
        ));
    }
    checks
}

fn chart_identity_checks(g: &ChartGeometry) -> Vec<Check> {
    vec![
        Check::zero("bianchi_torsion", &identities::bianchi_torsion(g)),
        Check::zero(
            "bianchi_curvature",
            &identities::bianchi_curvature(g, Connection::Primary),
        ),
        Check::zero(
            "tilde_bianchi_curvature",
            &identities::bianchi_curvature(g, Connection::Tilde),
        ),
    ]
}

fn operand_kind(suite: Suite, mode: Mode) -> &'static str {
    match (suite, mode) {
        (Suite::FunctionStar, _) => "functions",
        (_, Mode::Poisson) => "tensor fields",
        (_, Mode::Symplectic) => "tensor-valued forms",
    }
}

/// Runs a suite. Input and mode errors (a suite that does not apply to
/// the chart, an order out of range) are returned as `Err`.
pub fn verify(geom: &ChartGeometry, suite: Suite, cfg: &TrialConfig) -> Result<VerifyReport> {
    cfg.validate()?;
    let start = Instant::now();
    if suite == Suite::Leibniz {
        geom.require_symplectic("the leibniz suite")?;
    }
    let order = cfg.order.unwrap_or(suite.default_order());
    match suite {
        Suite::Associativity if order > 2 => {
            return Err(Error::UnsupportedOrder {
                order,
                reason: "the associativity suite covers orders up to 2".into(),
            })
        }
        Suite::FunctionStar if order > 3 => {
            return Err(Error::UnsupportedOrder {
                order,
                reason: "the function product is defined through third order".into(),
            })
        }
        _ => {}
    }
    let max_form_degree = match geom.mode() {
        Mode::Poisson => 0,
        Mode::Symplectic => cfg.max_form_degree,
    };
    let bounds = FormBounds {
        dimension: geom.dimension(),
        max_poly_degree: cfg.max_poly_degree,
        max_form_degree,
        max_rank: cfg.max_rank,
    };
    let prereqs = if cfg.check_prerequisites {
        prerequisites(suite, geom)?
    } else {
        Vec::new()
    };
    let mut report = VerifyReport {
        rng: RNG_NAME,
        suite,
        chart: ChartSummary {
            dimension: geom.dimension(),
            mode: geom.mode().name(),
            torsion_free: geom.is_torsion_free(),
        },
        config: cfg.clone(),
        order,
        operands: operand_kind(suite, geom.mode()),
        prerequisites_checked: cfg.check_prerequisites,
        prerequisites: prereqs,
        outcome: Outcome::Passed,
        chart_checks: Vec::new(),
        failed_trials: 0,
        trials: Vec::new(),
        elapsed_ms: None,
    };
    if report.prerequisites.iter().any(|p| !p.passed) {
        report.outcome = Outcome::PrerequisiteFailed;
        report.elapsed_ms = cfg.timing.then(|| start.elapsed().as_secs_f64() * 1e3);
        return Ok(report);
    }
    if suite == Suite::FunctionStar && !geom.is_torsion_free() {
        return Err(Error::Precondition(
            "the function product needs a torsion-free connection".into(),
        ));
    }
    if suite == Suite::OperatorIdentities {
        report.chart_checks = chart_identity_checks(geom);
    }
    let plan = Plan {
        suite,
        geom,
        cfg,
        bounds,
        order,
    };
    report.trials = (0..cfg.trials)
        .into_par_iter()
        .map(|i| plan.run_trial(i))
        .collect::<Result<Vec<_>>>()?;
    report.failed_trials = report.trials.iter().filter(|t| !t.passed).count();
    let chart_ok = report.chart_checks.iter().all(|c| c.passed);
    report.outcome = if report.failed_trials == 0 && chart_ok {
        Outcome::Passed
    } else {
        Outcome::Failed
    };
    report.elapsed_ms = cfg.timing.then(|| start.elapsed().as_secs_f64() * 1e3);
    Ok(report)
}
