//! One line per acceptance criterion; exits nonzero if any fails.

#![allow(clippy::needless_range_loop)]

mod common;

use std::collections::BTreeSet;
use std::process::Command;

use common::{c2_oracle, planar_oracle, polys, random_planar_spec, torsion_free_chart};
use covstar::constraints::{check, run_suite, ConstraintId};
use covstar::geometry::Connection;
use covstar::harness::{verify, Outcome, Suite, TrialConfig, VerifyReport};
use covstar::io::fixture;
use covstar::scalar::{parse_scalar, ScalarExpr};
use covstar::star::{associator_functions, function_coefficient, star};
use covstar::{ChartGeometry, TensorValuedForm};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::Value;

type Verdict = Result<String, String>;
type Criterion = (&'static str, fn() -> Verdict);

const FLAT: [&str; 3] = ["moyal2", "linear2", "quad2"];

fn cfg(trials: usize) -> TrialConfig {
    TrialConfig {
        seed: 1,
        trials,
        max_poly_degree: 2,
        max_form_degree: 2,
        max_rank: 1,
        timing: false,
        ..TrialConfig::default()
    }
}

fn run(name: &str, suite: Suite, c: &TrialConfig) -> Result<VerifyReport, String> {
    let g = fixture(name).map_err(|e| e.to_string())?;
    verify(&g, suite, c).map_err(|e| format!("{name}: {e}"))
}

fn require_pass(name: &str, r: &VerifyReport, checks: &[&str]) -> Result<(), String> {
    if r.outcome != Outcome::Passed {
        let first = r
            .trials
            .iter()
            .find(|t| !t.passed)
            .map(|t| {
                let c = t.checks.iter().find(|c| !c.passed).unwrap();
                format!(
                    "trial {} {}: {}",
                    t.index,
                    c.name,
                    c.residual.as_deref().unwrap_or("?")
                )
            })
            .unwrap_or_else(|| format!("prerequisites {:?}", r.failed_prerequisites()));
        return Err(format!("{name}: {first}"));
    }
    for t in &r.trials {
        for want in checks {
            if !t.checks.iter().any(|c| c.name == *want) {
                return Err(format!("{name}: trial {} lacks {want}", t.index));
            }
        }
    }
    if let Some(c) = r.chart_checks.iter().find(|c| !c.passed) {
        return Err(format!("{name}: chart check {}", c.name));
    }
    Ok(())
}

fn poisson_axioms() -> Verdict {
    let c = cfg(100);
    for name in FLAT {
        let r = run(name, Suite::PoissonAxioms, &c)?;
        require_pass(
            name,
            &r,
            &[
                "bracket_degree",
                "graded_symmetry",
                "graded_product",
                "graded_jacobi",
            ],
        )?;
    }
    Ok("100 trials each on moyal2, linear2, quad2".into())
}

fn leibniz() -> Verdict {
    let c = cfg(100);
    for name in FLAT {
        require_pass(name, &run(name, Suite::Leibniz, &c)?, &["leibniz"])?;
    }
    let r = run("curved2", Suite::Leibniz, &c)?;
    if r.outcome != Outcome::PrerequisiteFailed || !r.failed_prerequisites().contains(&"r_zero") {
        return Err("curved2 not refused on r_zero".into());
    }
    let out = Command::new(env!("CARGO_BIN_EXE_covstar"))
        .args(["verify", "curved2", "--suite", "leibniz", "--trials", "2"])
        .output()
        .map_err(|e| e.to_string())?;
    if out.status.code() != Some(3) {
        return Err(format!("curved2 exit code {:?}", out.status.code()));
    }
    Ok("100 trials each; curved2 refused with exit 3 (r_zero)".into())
}

fn associativity() -> Verdict {
    let c = cfg(100);
    for name in FLAT {
        require_pass(
            name,
            &run(name, Suite::Associativity, &c)?,
            &[
                "associativity_order_0",
                "associativity_order_1",
                "associativity_order_2",
            ],
        )?;
    }
    let mut neg = cfg(6);
    neg.max_form_degree = 1;
    if run("violating4", Suite::Associativity, &neg)?.outcome != Outcome::PrerequisiteFailed {
        return Err("violating4 passed its prerequisites".into());
    }
    neg.check_prerequisites = false;
    let r = run("violating4", Suite::Associativity, &neg)?;
    let nonzero = r
        .trials
        .iter()
        .flat_map(|t| &t.checks)
        .find(|c| !c.passed && c.residual.as_deref().is_some_and(|s| s != "0"));
    match nonzero {
        Some(c) => Ok(format!(
            "100 triples each; violating4 without prerequisites fails {}/6 ({})",
            r.failed_trials, c.name
        )),
        None => Err("violating4 shows no nonzero residual".into()),
    }
}

fn operator_identities() -> Verdict {
    let c = cfg(50);
    let names = [
        "moyal2",
        "linear2",
        "quad2",
        "curved2",
        "violating4",
        "poisson3",
        "lie3",
    ];
    for name in names {
        require_pass(name, &run(name, Suite::OperatorIdentities, &c)?, &[])?;
    }
    Ok(format!("50 forms each on {}", names.join(", ")))
}

fn constraints() -> Verdict {
    use ConstraintId::*;
    for name in FLAT {
        let g = fixture(name).map_err(|e| e.to_string())?;
        let report = run_suite(&g);
        let mut set = ConstraintId::SYMPLECTIC_ADMISSIBILITY.to_vec();
        set.push(TorsionCyclicOmega);
        if let Some(c) = set.iter().find(|c| !report.result(**c).passed()) {
            return Err(format!("{name} fails {c}"));
        }
    }
    let g = fixture("curved2").map_err(|e| e.to_string())?;
    let failed: BTreeSet<ConstraintId> = run_suite(&g).failed().into_iter().collect();
    let expected = BTreeSet::from([RZero, REqualsNablaT, SecondTorsion, Theta2RZero]);
    if failed != expected
        || !failed
            .iter()
            .all(|c| *c == RZero || c.depends_on_flatness())
    {
        return Err(format!("curved2 fails {failed:?}"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut premised = 0;
    for i in 0..20 {
        let spec = random_planar_spec(&mut rng);
        let g = ChartGeometry::special(&spec).map_err(|e| e.to_string())?;
        let pass = |c| check(&g, c).map(|r| r.passed()).unwrap_or(false);
        if pass(SymplecticTilde) && pass(RZero) && pass(CovariantJacobiPair) {
            premised += 1;
            for c in [RirCyclic, REqualsNablaT, TildeRCovConst] {
                if !pass(c) {
                    return Err(format!("special chart {i}: premises hold, {c} fails"));
                }
            }
        }
    }
    Ok(format!(
        "flat fixtures pass all 8; curved2 fails {}; implication holds on 20 special charts ({premised} with premises)",
        failed.iter().map(|c| c.name()).collect::<Vec<_>>().join(", ")
    ))
}

fn christoffels() -> Verdict {
    let g = fixture("linear2").map_err(|e| e.to_string())?;
    let t = parse_scalar("1+x1", 2).unwrap();
    let minus = parse_scalar("-1/(1+x1)", 2).unwrap();
    let oracle = planar_oracle(&t);
    for r in 0..2 {
        for m in 0..2 {
            for n in 0..2 {
                if g.gamma(Connection::Primary, r, m, n) != &oracle[r][m][n] {
                    return Err(format!("Gamma^{}_{{{}{}}}", r + 1, m + 1, n + 1));
                }
            }
        }
    }
    let values = [
        g.gamma(Connection::Primary, 0, 0, 0).clone(),
        g.gamma(Connection::Primary, 1, 0, 1).clone(),
        g.torsion_component(1, 0, 1),
        oracle[1][0][1].sub(&oracle[1][1][0]),
    ];
    if values.iter().any(|v| v != &minus) {
        return Err("Gamma^1_11, Gamma^2_12 or T^2_12 differ from -1/(1+x1)".into());
    }
    for a in 0..2 {
        for c in 0..2 {
            let mut acc = ScalarExpr::zero(2);
            for e in 0..2 {
                acc = acc.add(&g.omega(a, e).unwrap().mul(g.theta(e, c)));
            }
            let want = if a == c {
                ScalarExpr::one(2)
            } else {
                ScalarExpr::zero(2)
            };
            if acc != want {
                return Err("omega theta != identity".into());
            }
        }
    }
    Ok(
        "Gamma^1_11 = Gamma^2_12 = T^2_12 = -1/(1+x1); all Gamma match the oracle; omega theta = 1"
            .into(),
    )
}

fn function_star() -> Verdict {
    let mut charts: Vec<(String, ChartGeometry)> = ["moyal2", "lie3", "poisson3"]
        .iter()
        .map(|n| (n.to_string(), fixture(n).unwrap()))
        .collect();
    charts.extend((0..6).map(|s| {
        (
            format!("random torsion-free chart {s}"),
            torsion_free_chart(s),
        )
    }));
    for (i, (name, g)) in charts.iter().enumerate() {
        for k in 0..5 {
            let f = polys(1000 + 10 * i as u64 + k, g.dimension(), 3, 2);
            let c2 = function_coefficient(2, &f[0], &f[1], g).map_err(|e| e.to_string())?;
            if c2 != c2_oracle(g, &f[0], &f[1], Default::default()) {
                return Err(format!("{name}: C2 differs from the termwise oracle"));
            }
            let r = associator_functions(&f[0], &f[1], &f[2], g, 2).map_err(|e| e.to_string())?;
            if let Some(e) = r.iter().find(|e| !e.is_zero()) {
                return Err(format!("{name}: O(hbar^2) associator {e}"));
            }
        }
    }
    let mut c = cfg(50);
    c.max_poly_degree = 3;
    c.order = Some(3);
    for name in ["moyal2", "lie3"] {
        require_pass(
            name,
            &run(name, Suite::FunctionStar, &c)?,
            &["associativity_order_3"],
        )?;
    }
    Ok(format!(
        "C2 matches the oracle and O(hbar^2) holds on {} torsion-free charts; O(hbar^3) on moyal2, lie3 (50 trials, degree 3)",
        charts.len()
    ))
}

fn moyal_goldens() -> Verdict {
    let g = fixture("moyal2").unwrap();
    let s = |t: &str| TensorValuedForm::scalar(parse_scalar(t, 2).unwrap());
    let cases = [
        ("x1", "x2", "x1*x2 + h"),
        ("x2", "x1", "x1*x2 - h"),
        ("x1^2", "x2^2", "x1^2*x2^2 + 4*h*x1*x2 + 2*h^2"),
    ];
    for (a, b, want) in cases {
        let series = star(&s(a), &s(b), &g, 2).map_err(|e| e.to_string())?;
        // hbar stands in as a third variable
        let mut total = ScalarExpr::zero(3);
        for (n, coef) in series.coefficients.iter().enumerate() {
            let lifted = parse_scalar(&coef.scalar_value().to_string(), 3).unwrap();
            let h = parse_scalar(&format!("x3^{n}"), 3).unwrap();
            total = total.add(&lifted.mul(&h));
        }
        let expected = parse_scalar(&want.replace('h', "x3"), 3).unwrap();
        if total != expected {
            return Err(format!("{a} * {b} = {total}"));
        }
    }
    Ok("x1*x2, x2*x1, x1^2*x2^2 match".into())
}

fn strip_timing(v: &mut Value) {
    match v {
        Value::Object(o) => {
            o.remove("elapsed_ms");
            o.values_mut().for_each(strip_timing);
        }
        Value::Array(a) => a.iter_mut().for_each(strip_timing),
        _ => {}
    }
}

fn determinism() -> Verdict {
    let run = |extra: &[&str]| -> Result<Vec<u8>, String> {
        let mut args = vec![
            "--json",
            "verify",
            "quad2",
            "--suite",
            "associativity",
            "--seed",
            "42",
            "--trials",
            "12",
        ];
        args.extend_from_slice(extra);
        let out = Command::new(env!("CARGO_BIN_EXE_covstar"))
            .args(&args)
            .output()
            .map_err(|e| e.to_string())?;
        if !out.status.success() {
            return Err(format!("exit {:?}", out.status.code()));
        }
        Ok(out.stdout)
    };
    let (a, b) = (run(&["--no-timing"])?, run(&["--no-timing"])?);
    if a != b {
        return Err("--no-timing reports differ".into());
    }
    let parse = |bytes: Vec<u8>| -> Result<Vec<u8>, String> {
        let mut v: Value = serde_json::from_slice(&bytes).map_err(|e| e.to_string())?;
        strip_timing(&mut v);
        Ok(serde_json::to_vec(&v).unwrap())
    };
    let (c, d) = (parse(run(&[])?)?, parse(run(&[])?)?);
    if c != d || c != parse(a)? {
        return Err("timed reports differ after removing timing".into());
    }
    Ok("seed 42 reports byte-identical across runs".into())
}

fn main() {
    let criteria: [Criterion; 9] = [
        ("poisson axioms", poisson_axioms),
        ("leibniz", leibniz),
        ("associativity", associativity),
        ("operator identities", operator_identities),
        ("constraint suite", constraints),
        ("linear2 connection", christoffels),
        ("function star", function_star),
        ("moyal goldens", moyal_goldens),
        ("determinism", determinism),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        match f() {
            Ok(detail) => println!("criterion {} {name}: PASS ({detail})", i + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {} {name}: FAIL ({detail})", i + 1);
            }
        }
    }
    println!(
        "{} of {} criteria pass",
        criteria.len() - failed,
        criteria.len()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
