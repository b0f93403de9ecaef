//! Geometric constraints on a chart, each evaluated as an exact residual
//! over all free indices.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::form::TensorValuedForm;
use crate::geometry::{ChartGeometry, Connection, Mode};
use crate::scalar::{Rational, ScalarExpr};
use crate::star::nabla_theta;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ConstraintId {
    JacobiTheta,
    SymplecticTilde,
    CovariantJacobiPair,
    RZero,
    TildeRCovConst,
    RirCyclic,
    REqualsNablaT,
    TorsionCyclicOmega,
    SecondTorsion,
    PoissonJacobiNo3,
    Theta2RZero,
    PoissonAssocNo4,
    CocdThetaZero,
}

impl ConstraintId {
    pub const ALL: [ConstraintId; 13] = [
        ConstraintId::JacobiTheta,
        ConstraintId::SymplecticTilde,
        ConstraintId::CovariantJacobiPair,
        ConstraintId::RZero,
        ConstraintId::TildeRCovConst,
        ConstraintId::RirCyclic,
        ConstraintId::REqualsNablaT,
        ConstraintId::TorsionCyclicOmega,
        ConstraintId::SecondTorsion,
        ConstraintId::PoissonJacobiNo3,
        ConstraintId::Theta2RZero,
        ConstraintId::PoissonAssocNo4,
        ConstraintId::CocdThetaZero,
    ];

    /// Constraints whose failure decides that a symplectic chart does not
    /// admit the graded Poisson algebra of tensor-valued forms.
    pub const SYMPLECTIC_ADMISSIBILITY: [ConstraintId; 7] = [
        ConstraintId::JacobiTheta,
        ConstraintId::SymplecticTilde,
        ConstraintId::CovariantJacobiPair,
        ConstraintId::RZero,
        ConstraintId::TildeRCovConst,
        ConstraintId::RirCyclic,
        ConstraintId::REqualsNablaT,
    ];

    /// The Poisson-mode counterpart: bracket and second-order product of
    /// tensor fields.
    pub const POISSON_ADMISSIBILITY: [ConstraintId; 4] = [
        ConstraintId::JacobiTheta,
        ConstraintId::PoissonJacobiNo3,
        ConstraintId::Theta2RZero,
        ConstraintId::PoissonAssocNo4,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ConstraintId::JacobiTheta => "jacobi_theta",
            ConstraintId::SymplecticTilde => "symplectic_tilde",
            ConstraintId::CovariantJacobiPair => "covariant_jacobi_pair",
            ConstraintId::RZero => "r_zero",
            ConstraintId::TildeRCovConst => "tilder_cov_const",
            ConstraintId::RirCyclic => "rir_cyclic",
            ConstraintId::REqualsNablaT => "r_equals_nabla_t",
            ConstraintId::TorsionCyclicOmega => "torsion_cyclic_omega",
            ConstraintId::SecondTorsion => "second_torsion",
            ConstraintId::PoissonJacobiNo3 => "poisson_jacobi_no3",
            ConstraintId::Theta2RZero => "theta2_r_zero",
            ConstraintId::PoissonAssocNo4 => "poisson_assoc_no4",
            ConstraintId::CocdThetaZero => "cocd_theta_zero",
        }
    }

    /// Needs `omega` or `R~^{mn}`, or is only meaningful on symplectic charts.
    pub fn symplectic_only(self) -> bool {
        matches!(
            self,
            ConstraintId::SymplecticTilde
                | ConstraintId::CovariantJacobiPair
                | ConstraintId::RZero
                | ConstraintId::TildeRCovConst
                | ConstraintId::RirCyclic
                | ConstraintId::REqualsNablaT
                | ConstraintId::TorsionCyclicOmega
                | ConstraintId::SecondTorsion
        )
    }

    /// Constraints whose derivation assumes `R = 0`, so that a curved
    /// chart may fail them as a consequence.
    pub fn depends_on_flatness(self) -> bool {
        matches!(
            self,
            ConstraintId::REqualsNablaT
                | ConstraintId::SecondTorsion
                | ConstraintId::Theta2RZero
                | ConstraintId::CocdThetaZero
                | ConstraintId::TildeRCovConst
                | ConstraintId::RirCyclic
        )
    }

    /// Reported but never part of an admissibility summary.
    pub fn informational(self) -> bool {
        self == ConstraintId::SecondTorsion
    }
}

impl fmt::Display for ConstraintId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ConstraintId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ConstraintId::ALL
            .iter()
            .copied()
            .find(|c| c.name() == s)
            .ok_or_else(|| Error::UnknownConstraint(s.to_string()))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Passed,
    Failed,
    Inapplicable,
}

/// First nonzero residual component.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Residual {
    /// 1-based free indices in the constraint's index order.
    pub indices: Vec<usize>,
    pub expr: String,
    pub failing_count: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub part: Option<String>,
    /// Every failing component, filled only in verbose runs.
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub all: Vec<FailingComponent>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FailingComponent {
    pub indices: Vec<usize>,
    pub expr: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub part: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ConstraintResult {
    pub id: ConstraintId,
    pub status: Status,
    pub residual: Option<Residual>,
}

impl ConstraintResult {
    pub fn passed(&self) -> bool {
        self.status == Status::Passed
    }
}

impl Serialize for ConstraintId {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(self.name())
    }
}

/// One family of residual components, listed in lexicographic index order.
struct Part {
    label: Option<&'static str>,
    entries: Vec<(Vec<usize>, ScalarExpr)>,
}

impl Part {
    fn new(label: Option<&'static str>) -> Self {
        Part {
            label,
            entries: Vec::new(),
        }
    }

    fn push(&mut self, idx: &[usize], v: ScalarExpr) {
        self.entries.push((idx.to_vec(), v));
    }
}

fn summarize(id: ConstraintId, parts: Vec<Part>, verbose: bool) -> ConstraintResult {
    let mut first: Option<Residual> = None;
    let mut count = 0;
    let mut all = Vec::new();
    for p in &parts {
        for (idx, v) in &p.entries {
            if v.is_zero() {
                continue;
            }
            count += 1;
            let indices: Vec<usize> = idx.iter().map(|i| i + 1).collect();
            if verbose {
                all.push(FailingComponent {
                    indices: indices.clone(),
                    expr: v.to_string(),
                    part: p.label.map(str::to_string),
                });
            }
            if first.is_none() {
                first = Some(Residual {
                    indices,
                    expr: v.to_string(),
                    failing_count: 0,
                    part: p.label.map(str::to_string),
                    all: Vec::new(),
                });
            }
        }
    }
    match first {
        None => ConstraintResult {
            id,
            status: Status::Passed,
            residual: None,
        },
        Some(mut r) => {
            r.failing_count = count;
            r.all = all;
            ConstraintResult {
                id,
                status: Status::Failed,
                residual: Some(r),
            }
        }
    }
}

fn triples(d: usize) -> impl Iterator<Item = (usize, usize, usize)> {
    (0..d).flat_map(move |a| (0..d).flat_map(move |b| (0..d).map(move |c| (a, b, c))))
}

fn form_pairs(d: usize) -> Vec<(usize, usize)> {
    (0..d)
        .flat_map(|a| (a + 1..d).map(move |b| (a, b)))
        .collect()
}

fn half() -> Rational {
    Rational::new(1.into(), 2.into())
}

/// Cyclic sum over `(m, n, r)` of a three-index expression.
fn cyclic(
    f: impl Fn(usize, usize, usize) -> ScalarExpr,
    m: usize,
    n: usize,
    r: usize,
) -> ScalarExpr {
    f(m, n, r).add(&f(n, r, m)).add(&f(r, m, n))
}

fn theta_nabla_theta(
    geom: &ChartGeometry,
    nt: &[Vec<Vec<ScalarExpr>>],
    m: usize,
    n: usize,
    r: usize,
) -> ScalarExpr {
    let d = geom.dimension();
    let mut acc = ScalarExpr::zero(d);
    for s in 0..d {
        let t = geom.theta(m, s);
        if !t.is_zero() && !nt[s][n][r].is_zero() {
            acc = acc.add(&t.mul(&nt[s][n][r]));
        }
    }
    acc
}

fn theta_theta_torsion(geom: &ChartGeometry, m: usize, n: usize, r: usize) -> ScalarExpr {
    let d = geom.dimension();
    let mut acc = ScalarExpr::zero(d);
    for s in 0..d {
        let a = geom.theta(m, s);
        if a.is_zero() {
            continue;
        }
        for l in 0..d {
            let b = geom.theta(n, l);
            if b.is_zero() {
                continue;
            }
            let t = geom.torsion_component(r, s, l);
            if !t.is_zero() {
                acc = acc.add(&a.mul(b).mul(&t));
            }
        }
    }
    acc
}

fn jacobi_theta(geom: &ChartGeometry) -> Vec<Part> {
    let d = geom.dimension();
    let term = |m: usize, n: usize, r: usize| {
        let mut acc = ScalarExpr::zero(d);
        for s in 0..d {
            let t = geom.theta(m, s);
            if !t.is_zero() {
                acc = acc.add(&t.mul(&geom.theta(n, r).derivative(s)));
            }
        }
        acc
    };
    let mut p = Part::new(None);
    for (m, n, r) in triples(d) {
        p.push(&[m, n, r], cyclic(term, m, n, r));
    }
    vec![p]
}

fn symplectic_tilde(geom: &ChartGeometry) -> Vec<Part> {
    let d = geom.dimension();
    let t = geom.theta_form();
    let mut p = Part::new(None);
    for m in 0..d {
        let nt = geom.nabla(m, &t, Connection::Tilde);
        for n in 0..d {
            for r in 0..d {
                p.push(&[m, n, r], nt.component(&[n as u8, r as u8], &[], &[]));
            }
        }
    }
    vec![p]
}

fn covariant_jacobi_pair(geom: &ChartGeometry) -> Vec<Part> {
    let d = geom.dimension();
    let nt = nabla_theta(geom);
    let mut a = Part::new(Some("theta_nabla_theta"));
    let mut b = Part::new(Some("theta_theta_torsion"));
    for (m, n, r) in triples(d) {
        a.push(
            &[m, n, r],
            cyclic(|x, y, z| theta_nabla_theta(geom, &nt, x, y, z), m, n, r),
        );
        b.push(
            &[m, n, r],
            cyclic(|x, y, z| theta_theta_torsion(geom, x, y, z), m, n, r),
        );
    }
    vec![a, b]
}

fn form_components(p: &mut Part, prefix: &[usize], form: &TensorValuedForm, tensor: &[u8]) {
    let d = form.dimension();
    match form.degree() {
        2 => {
            for (a, b) in form_pairs(d) {
                let mut idx = prefix.to_vec();
                idx.extend([a, b]);
                p.push(&idx, form.component(tensor, &[], &[a as u8, b as u8]));
            }
        }
        3 => {
            for a in 0..d {
                for b in a + 1..d {
                    for c in b + 1..d {
                        let mut idx = prefix.to_vec();
                        idx.extend([a, b, c]);
                        p.push(
                            &idx,
                            form.component(tensor, &[], &[a as u8, b as u8, c as u8]),
                        );
                    }
                }
            }
        }
        _ => unreachable!("constraint forms are 2- or 3-forms"),
    }
}

fn r_zero(geom: &ChartGeometry) -> Vec<Part> {
    let d = geom.dimension();
    let mut p = Part::new(None);
    for m in 0..d {
        for n in 0..d {
            for (a, b) in form_pairs(d) {
                p.push(
                    &[m, n, a, b],
                    geom.curvature_component(Connection::Primary, m, n, a, b),
                );
            }
        }
    }
    vec![p]
}

fn tilder_cov_const(geom: &ChartGeometry) -> Result<Vec<Part>> {
    let d = geom.dimension();
    let r = geom.raised_curvature()?;
    let mut p = Part::new(None);
    for m in 0..d {
        let nr = geom.nabla(m, r, Connection::Primary);
        for n in 0..d {
            for rho in 0..d {
                form_components(&mut p, &[m, n, rho], &nr, &[n as u8, rho as u8]);
            }
        }
    }
    Ok(vec![p])
}

fn rir_cyclic(geom: &ChartGeometry) -> Result<Vec<Part>> {
    let d = geom.dimension();
    let rs = crate::bracket::raised_curvature_slices(geom)?;
    let term = |m: usize, n: usize, r: usize| {
        let mut acc = TensorValuedForm::zero(d, 0, 0, 3);
        for s in 0..d {
            if rs[m][s].is_zero() {
                continue;
            }
            let i = rs[n][r].interior(s);
            if !i.is_zero() {
                acc.add_assign(&rs[m][s].wedge(&i));
            }
        }
        acc
    };
    let mut p = Part::new(None);
    for (m, n, r) in triples(d) {
        let sum = term(m, n, r).add(&term(n, r, m)).add(&term(r, m, n));
        form_components(&mut p, &[m, n, r], &sum, &[]);
    }
    Ok(vec![p])
}

fn r_equals_nabla_t(geom: &ChartGeometry) -> Vec<Part> {
    let d = geom.dimension();
    let rt = geom.curvature(Connection::Tilde);
    let mut p = Part::new(None);
    for m in 0..d {
        for n in 0..d {
            let nt = geom.nabla(n, geom.torsion(), Connection::Primary);
            let diff = rt
                .slice_first_upper(m)
                .slice_first_lower(n)
                .sub(&nt.slice_first_upper(m));
            form_components(&mut p, &[m, n], &diff, &[]);
        }
    }
    vec![p]
}

fn omega(geom: &ChartGeometry, a: usize, b: usize) -> &ScalarExpr {
    geom.omega(a, b).expect("symplectic chart")
}

fn torsion_cyclic_omega(geom: &ChartGeometry) -> Vec<Part> {
    let d = geom.dimension();
    let term = |m: usize, n: usize, r: usize| {
        let mut acc = ScalarExpr::zero(d);
        for s in 0..d {
            let t = geom.torsion_component(s, m, n);
            if !t.is_zero() {
                acc = acc.add(&t.mul(omega(geom, s, r)));
            }
        }
        acc
    };
    let mut p = Part::new(None);
    for (m, n, r) in triples(d) {
        p.push(&[m, n, r], cyclic(term, m, n, r));
    }
    vec![p]
}

/// `X^s_{mn} = T^l_{mt} omega_{nl} theta^{ts} + T^s_{mn}`.
fn second_torsion_coefficient(geom: &ChartGeometry, m: usize, n: usize, s: usize) -> ScalarExpr {
    let d = geom.dimension();
    let mut acc = geom.torsion_component(s, m, n);
    for l in 0..d {
        for t in 0..d {
            let tt = geom.torsion_component(l, m, t);
            if tt.is_zero() || geom.theta(t, s).is_zero() {
                continue;
            }
            acc = acc.add(&tt.mul(omega(geom, n, l)).mul(geom.theta(t, s)));
        }
    }
    acc
}

fn second_torsion(geom: &ChartGeometry) -> Vec<Part> {
    let d = geom.dimension();
    let sel = Connection::Primary;
    let t = geom.torsion();
    let nt: Vec<TensorValuedForm> = geom.nabla_all(t, sel);
    let nnt = geom.nabla2_all(t, sel);
    let coeff: Vec<Vec<Vec<ScalarExpr>>> = (0..d)
        .map(|m| {
            (0..d)
                .map(|n| {
                    (0..d)
                        .map(|s| second_torsion_coefficient(geom, m, n, s))
                        .collect()
                })
                .collect()
        })
        .collect();
    // (X^s_{mn}) nabla_s T + nabla_m nabla_n T
    let full = |m: usize, n: usize| {
        let mut acc = nnt[m][n].clone();
        for s in 0..d {
            if !coeff[m][n][s].is_zero() {
                acc.add_assign(&nt[s].scale(&coeff[m][n][s]));
            }
        }
        acc
    };
    // nabla_(m nabla_n) T + 1/2 (T^s_{ml} omega_{ns} + T^s_{nl} omega_{ms}) theta^{lt} nabla_t T,
    // the symmetric part of `full`
    let symmetric = |m: usize, n: usize| {
        let mut acc = nnt[m][n].add(&nnt[n][m]).scale_rational(&half());
        for t in 0..d {
            let mut c = ScalarExpr::zero(d);
            for s in 0..d {
                for l in 0..d {
                    if geom.theta(l, t).is_zero() {
                        continue;
                    }
                    let a = geom.torsion_component(s, m, l).mul(omega(geom, n, s));
                    let b = geom.torsion_component(s, n, l).mul(omega(geom, m, s));
                    c = c.add(&a.add(&b).mul(geom.theta(l, t)));
                }
            }
            if !c.is_zero() {
                acc = acc.add(&nt[t].scale(&c.scale(&half())));
            }
        }
        acc
    };
    let mut a = Part::new(Some("full"));
    let mut b = Part::new(Some("symmetric"));
    for m in 0..d {
        for n in 0..d {
            let f = full(m, n);
            let s = symmetric(m, n);
            for r in 0..d {
                form_components(&mut a, &[m, n, r], &f, &[r as u8]);
                form_components(&mut b, &[m, n, r], &s, &[r as u8]);
            }
        }
    }
    vec![a, b]
}

fn poisson_cyclic(geom: &ChartGeometry, torsion_weight: Rational) -> Vec<Part> {
    let d = geom.dimension();
    let nt = nabla_theta(geom);
    let term = |m: usize, n: usize, r: usize| {
        theta_nabla_theta(geom, &nt, m, n, r)
            .add(&theta_theta_torsion(geom, m, n, r).scale(&torsion_weight))
    };
    let mut p = Part::new(None);
    for (m, n, r) in triples(d) {
        p.push(&[m, n, r], cyclic(term, m, n, r));
    }
    vec![p]
}

fn theta2_r_zero(geom: &ChartGeometry) -> Vec<Part> {
    let d = geom.dimension();
    let mut p = Part::new(None);
    for (m, n, r) in triples(d) {
        for s in 0..d {
            let mut acc = ScalarExpr::zero(d);
            for l in 0..d {
                if geom.theta(m, l).is_zero() {
                    continue;
                }
                for t in 0..d {
                    if geom.theta(n, t).is_zero() {
                        continue;
                    }
                    let c = geom.curvature_component(Connection::Primary, r, s, l, t);
                    if !c.is_zero() {
                        acc = acc.add(&geom.theta(m, l).mul(geom.theta(n, t)).mul(&c));
                    }
                }
            }
            p.push(&[m, n, r, s], acc);
        }
    }
    vec![p]
}

fn cocd_theta_zero(geom: &ChartGeometry) -> Vec<Part> {
    let d = geom.dimension();
    let t = geom.theta_form();
    let mut p = Part::new(None);
    for m in 0..d {
        for n in 0..d {
            let c = geom.commutator_direct(m, n, &t, Connection::Primary);
            for r in 0..d {
                for s in 0..d {
                    p.push(&[m, n, r, s], c.component(&[r as u8, s as u8], &[], &[]));
                }
            }
        }
    }
    vec![p]
}

/// Evaluates a constraint regardless of the chart mode, as long as the
/// data it needs exists.
fn evaluate(geom: &ChartGeometry, id: ConstraintId, verbose: bool) -> Result<ConstraintResult> {
    let needs_omega = matches!(
        id,
        ConstraintId::TorsionCyclicOmega | ConstraintId::SecondTorsion
    );
    if needs_omega {
        geom.require_symplectic(id.name())?;
    }
    let parts = match id {
        ConstraintId::JacobiTheta => jacobi_theta(geom),
        ConstraintId::SymplecticTilde => symplectic_tilde(geom),
        ConstraintId::CovariantJacobiPair => covariant_jacobi_pair(geom),
        ConstraintId::RZero => r_zero(geom),
        ConstraintId::TildeRCovConst => tilder_cov_const(geom)?,
        ConstraintId::RirCyclic => rir_cyclic(geom)?,
        ConstraintId::REqualsNablaT => r_equals_nabla_t(geom),
        ConstraintId::TorsionCyclicOmega => torsion_cyclic_omega(geom),
        ConstraintId::SecondTorsion => second_torsion(geom),
        ConstraintId::PoissonJacobiNo3 => poisson_cyclic(geom, Rational::from_integer((-1).into())),
        ConstraintId::Theta2RZero => theta2_r_zero(geom),
        ConstraintId::PoissonAssocNo4 => poisson_cyclic(geom, half()),
        ConstraintId::CocdThetaZero => cocd_theta_zero(geom),
    };
    Ok(summarize(id, parts, verbose))
}

/// Checks one constraint. Symplectic-only constraints refuse Poisson charts.
pub fn check(geom: &ChartGeometry, id: ConstraintId) -> Result<ConstraintResult> {
    if id.symplectic_only() && geom.mode() == Mode::Poisson {
        return Err(Error::Mode(format!(
            "constraint {} applies to symplectic charts only",
            id.name()
        )));
    }
    evaluate(geom, id, false)
}

/// Checks a constraint given by name.
pub fn check_named(geom: &ChartGeometry, name: &str) -> Result<ConstraintResult> {
    check(geom, name.parse()?)
}

/// Passes iff the constraint holds; evaluated even where the report would
/// call it inapplicable.
pub(crate) fn holds(geom: &ChartGeometry, id: ConstraintId) -> Result<bool> {
    Ok(evaluate(geom, id, false)?.passed())
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SuiteReport {
    pub mode: Mode,
    pub results: Vec<ConstraintResult>,
    /// Whether every constraint of the mode's admissibility set passed.
    pub admissible: bool,
}

impl Serialize for Mode {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(self.name())
    }
}

impl SuiteReport {
    pub fn result(&self, id: ConstraintId) -> &ConstraintResult {
        self.results
            .iter()
            .find(|r| r.id == id)
            .expect("every constraint is reported")
    }

    pub fn failed(&self) -> Vec<ConstraintId> {
        self.results
            .iter()
            .filter(|r| r.status == Status::Failed)
            .map(|r| r.id)
            .collect()
    }

    /// JSON list in the report format.
    pub fn to_json(&self) -> serde_json::Value {
        let list: Vec<serde_json::Value> = self
            .results
            .iter()
            .map(|r| {
                let mut o = serde_json::Map::new();
                o.insert("id".into(), r.id.name().into());
                o.insert("passed".into(), r.passed().into());
                if r.status == Status::Inapplicable {
                    o.insert("status".into(), "inapplicable".into());
                }
                if r.id.informational() {
                    o.insert("informational".into(), true.into());
                }
                if let Some(res) = &r.residual {
                    o.insert(
                        "residual".into(),
                        serde_json::to_value(res).expect("serializable"),
                    );
                }
                serde_json::Value::Object(o)
            })
            .collect();
        serde_json::Value::Array(list)
    }
}

/// Runs every constraint in a fixed order. Symplectic-only constraints are
/// reported inapplicable on Poisson charts.
pub fn run_suite(geom: &ChartGeometry) -> SuiteReport {
    run_suite_with(geom, false)
}

/// As [`run_suite`]; `verbose` lists every failing component.
pub fn run_suite_with(geom: &ChartGeometry, verbose: bool) -> SuiteReport {
    let results: Vec<ConstraintResult> = ConstraintId::ALL
        .par_iter()
        .map(|&id| {
            if id.symplectic_only() && geom.mode() == Mode::Poisson {
                return ConstraintResult {
                    id,
                    status: Status::Inapplicable,
                    residual: None,
                };
            }
            evaluate(geom, id, verbose).expect("applicable constraints evaluate")
        })
        .collect();
    let set: &[ConstraintId] = match geom.mode() {
        Mode::Symplectic => &ConstraintId::SYMPLECTIC_ADMISSIBILITY,
        Mode::Poisson => &ConstraintId::POISSON_ADMISSIBILITY,
    };
    let admissible = set
        .iter()
        .all(|id| results.iter().any(|r| r.id == *id && r.passed()));
    SuiteReport {
        mode: geom.mode(),
        results,
        admissible,
    }
}

/// `nabla_m theta^{nr} - T^n_{ms} theta^{sr} - T^r_{ms} theta^{ns}`; vanishes
/// whenever the tilde connection is symplectic.
pub fn nabla_theta_identity(geom: &ChartGeometry) -> Vec<Vec<Vec<ScalarExpr>>> {
    let d = geom.dimension();
    let nt = nabla_theta(geom);
    let mut out = nt.clone();
    for m in 0..d {
        for n in 0..d {
            for r in 0..d {
                let mut rhs = ScalarExpr::zero(d);
                for s in 0..d {
                    rhs = rhs
                        .add(&geom.torsion_component(n, m, s).mul(geom.theta(s, r)))
                        .add(&geom.torsion_component(r, m, s).mul(geom.theta(n, s)));
                }
                out[m][n][r] = nt[m][n][r].sub(&rhs);
            }
        }
    }
    out
}

/// `Xa^s_{mn} = (T^l_{mt} omega_{nl} - T^l_{nt} omega_{ml}) theta^{ts} + T^s_{mn}`,
/// indexed `[m][n][s]`. Vanishes iff `torsion_cyclic_omega` holds.
pub fn second_torsion_antisymmetric_coefficient(
    geom: &ChartGeometry,
) -> Result<Vec<Vec<Vec<ScalarExpr>>>> {
    geom.require_symplectic("second_torsion")?;
    let d = geom.dimension();
    Ok((0..d)
        .map(|m| {
            (0..d)
                .map(|n| {
                    (0..d)
                        .map(|s| {
                            second_torsion_coefficient(geom, m, n, s)
                                .sub(&second_torsion_coefficient(geom, n, m, s))
                                .sub(&geom.torsion_component(s, m, n))
                        })
                        .collect()
                })
                .collect()
        })
        .collect())
}

/// Full second-torsion residual `nabla_m nabla_n T + X^s_{mn} nabla_s T`, indexed `[m][n]`.
pub fn second_torsion_full(geom: &ChartGeometry) -> Result<Vec<Vec<TensorValuedForm>>> {
    geom.require_symplectic("second_torsion")?;
    let d = geom.dimension();
    let sel = Connection::Primary;
    let t = geom.torsion();
    let nt = geom.nabla_all(t, sel);
    let nnt = geom.nabla2_all(t, sel);
    Ok((0..d)
        .map(|m| {
            (0..d)
                .map(|n| {
                    let mut acc = nnt[m][n].clone();
                    for s in 0..d {
                        let c = second_torsion_coefficient(geom, m, n, s);
                        if !c.is_zero() {
                            acc.add_assign(&nt[s].scale(&c));
                        }
                    }
                    acc
                })
                .collect()
        })
        .collect())
}

/// Antisymmetric part of the second-torsion constraint on a flat chart,
/// `1/2 Xa^s_{mn} nabla_s T^r`.
pub fn second_torsion_antisymmetric(geom: &ChartGeometry) -> Result<Vec<Vec<TensorValuedForm>>> {
    let xa = second_torsion_antisymmetric_coefficient(geom)?;
    let d = geom.dimension();
    let nt = geom.nabla_all(geom.torsion(), Connection::Primary);
    Ok((0..d)
        .map(|m| {
            (0..d)
                .map(|n| {
                    let mut acc = TensorValuedForm::zero(d, 1, 0, 2);
                    for s in 0..d {
                        if !xa[m][n][s].is_zero() {
                            acc.add_assign(&nt[s].scale(&xa[m][n][s].scale(&half())));
                        }
                    }
                    acc
                })
                .collect()
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::SpecialChartSpec;
    use crate::scalar::parse_scalar;

    fn rat(n: i64) -> Rational {
        Rational::from_integer(n.into())
    }

    fn curved2() -> ChartGeometry {
        let z = ScalarExpr::zero(2);
        let mut gamma = vec![vec![vec![z.clone(); 2]; 2]; 2];
        gamma[0][0][1] = parse_scalar("x2", 2).unwrap();
        gamma[1][1][1] = parse_scalar("-x2", 2).unwrap();
        let theta = vec![
            vec![z.clone(), ScalarExpr::one(2)],
            vec![ScalarExpr::one(2).neg(), z],
        ];
        ChartGeometry::new(2, Mode::Symplectic, theta, gamma).unwrap()
    }

    #[test]
    fn curved_chart_reports_curvature_residual() {
        let r = check(&curved2(), ConstraintId::RZero).unwrap();
        assert_eq!(r.status, Status::Failed);
        let res = r.residual.unwrap();
        assert_eq!(res.indices, vec![1, 2, 1, 2]);
        assert_eq!(res.expr, "-x2^2 - 1");
    }

    #[test]
    fn linear_special_chart_is_symplectic() {
        let mut spec = SpecialChartSpec::new(2);
        spec.g.insert((0, 1), rat(1));
        spec.f.insert((0, 1, 0), rat(1));
        let g = ChartGeometry::special(&spec).unwrap();
        assert!(check(&g, ConstraintId::SymplecticTilde).unwrap().passed());
        assert!(run_suite(&g).admissible);
    }

    #[test]
    fn names_round_trip() {
        for id in ConstraintId::ALL {
            assert_eq!(id.name().parse::<ConstraintId>().unwrap(), id);
        }
        assert!(matches!(
            "nope".parse::<ConstraintId>(),
            Err(Error::UnknownConstraint(_))
        ));
    }
}
