use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde_json::json;

use covstar::constraints::{run_suite_with, Status};
use covstar::harness::{verify, Suite, TrialConfig};
use covstar::io::{form_to_json, form_to_text, load_chart, load_form, star_to_json, FIXTURES};
use covstar::star::{star_functions_with, GradientTerm};
use covstar::{bracket, star, ChartGeometry, Error};

/// Exact covariant Poisson brackets and star products on coordinate charts.
///
/// A chart argument is a path to a chart JSON file or the name of a
/// built-in fixture (see `covstar fixtures`).
#[derive(Parser)]
#[command(name = "covstar", version)]
struct Cli {
    /// Machine-readable JSON output.
    #[arg(long, global = true)]
    json: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the constraint suite; exit 0 iff the chart is admissible.
    Check {
        chart: String,
        /// List every failing component, not only the first.
        #[arg(long)]
        verbose: bool,
    },
    /// Print the Poisson bracket {A, B}.
    Bracket {
        chart: String,
        a: PathBuf,
        b: PathBuf,
    },
    /// Print the coefficients of A * B up to hbar^N.
    Star {
        chart: String,
        a: PathBuf,
        b: PathBuf,
        #[arg(long, default_value_t = 2)]
        order: usize,
        /// Contraction of the 1/6 term of the second-order function coefficient.
        #[arg(long, default_value = "transposed")]
        gradient_term: String,
    },
    /// Run seeded random property trials.
    Verify {
        chart: String,
        /// poisson-axioms, leibniz, associativity, operator-identities or function-star.
        #[arg(long)]
        suite: String,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value_t = 25)]
        trials: usize,
        /// Maximum total degree of random polynomial components.
        #[arg(long, default_value_t = 2)]
        max_degree: usize,
        #[arg(long, default_value_t = 2)]
        max_form_degree: usize,
        #[arg(long, default_value_t = 1)]
        max_rank: usize,
        /// Highest hbar order checked (associativity, function-star).
        #[arg(long)]
        order: Option<usize>,
        /// Skip the prerequisite constraint checks.
        #[arg(long)]
        no_prereq: bool,
        /// Leave timing fields out of the report.
        #[arg(long)]
        no_timing: bool,
        #[arg(long, default_value = "transposed")]
        gradient_term: String,
    },
    /// List the built-in chart fixtures, or print one as JSON.
    Fixtures { name: Option<String> },
}

/// Input errors exit with 2, failed preconditions with 3.
fn error_exit(e: &Error) -> u8 {
    match e {
        Error::Precondition(_) => 3,
        _ => 2,
    }
}

fn print_json(v: &serde_json::Value) {
    println!("{}", serde_json::to_string_pretty(v).expect("JSON value"));
}

fn load_operands(
    chart: &str,
    a: &Path,
    b: &Path,
) -> covstar::Result<(
    ChartGeometry,
    covstar::TensorValuedForm,
    covstar::TensorValuedForm,
)> {
    let g = load_chart(chart)?;
    let fa = load_form(a, g.dimension())?;
    let fb = load_form(b, g.dimension())?;
    Ok((g, fa, fb))
}

fn check(chart: &str, verbose: bool, json: bool) -> covstar::Result<u8> {
    let g = load_chart(chart)?;
    let report = run_suite_with(&g, verbose);
    if json {
        print_json(&json!({
            "mode": g.mode().name(),
            "admissible": report.admissible,
            "constraints": report.to_json(),
        }));
    } else {
        for r in &report.results {
            let status = match r.status {
                Status::Passed => "passed".to_string(),
                Status::Inapplicable => "inapplicable".to_string(),
                Status::Failed => {
                    let res = r
                        .residual
                        .as_ref()
                        .expect("failed constraints carry a residual");
                    let idx: Vec<String> = res.indices.iter().map(|i| i.to_string()).collect();
                    let part = res
                        .part
                        .as_deref()
                        .map(|p| format!(" [{p}]"))
                        .unwrap_or_default();
                    format!(
                        "FAILED at ({}){part}: {} ({} failing)",
                        idx.join(","),
                        res.expr,
                        res.failing_count
                    )
                }
            };
            let note = if r.id.informational() {
                " (informational)"
            } else {
                ""
            };
            println!("{}{note}: {status}", r.id);
            if let Some(res) = &r.residual {
                for c in &res.all {
                    let idx: Vec<String> = c.indices.iter().map(|i| i.to_string()).collect();
                    println!("    ({}) {}", idx.join(","), c.expr);
                }
            }
        }
        println!(
            "{} chart {} the graded Poisson algebra",
            g.mode().name(),
            if report.admissible {
                "admits"
            } else {
                "does not admit"
            }
        );
    }
    Ok(if report.admissible { 0 } else { 1 })
}

fn run(cli: Cli) -> covstar::Result<u8> {
    match cli.command {
        Command::Check { chart, verbose } => check(&chart, verbose, cli.json),
        Command::Bracket { chart, a, b } => {
            let (g, fa, fb) = load_operands(&chart, &a, &b)?;
            let r = bracket::poisson_bracket(&fa, &fb, &g)?;
            if cli.json {
                print_json(&form_to_json(&r));
            } else {
                println!("{}", form_to_text(&r));
            }
            Ok(0)
        }
        Command::Star {
            chart,
            a,
            b,
            order,
            gradient_term,
        } => {
            let conv: GradientTerm = gradient_term.parse()?;
            let (g, fa, fb) = load_operands(&chart, &a, &b)?;
            let s = if fa.is_scalar_function() && fb.is_scalar_function() && g.is_torsion_free() {
                star_functions_with(&fa, &fb, &g, order, conv)?
            } else {
                star::star(&fa, &fb, &g, order)?
            };
            if cli.json {
                print_json(&star_to_json(&s));
            } else {
                for (n, c) in s.coefficients.iter().enumerate() {
                    let text = form_to_text(c);
                    if text.contains('\n') {
                        println!("hbar^{n}:");
                        for line in text.lines() {
                            println!("  {line}");
                        }
                    } else {
                        println!("hbar^{n}: {text}");
                    }
                }
            }
            Ok(0)
        }
        Command::Verify {
            chart,
            suite,
            seed,
            trials,
            max_degree,
            max_form_degree,
            max_rank,
            order,
            no_prereq,
            no_timing,
            gradient_term,
        } => {
            let suite: Suite = suite.parse()?;
            let g = load_chart(&chart)?;
            let cfg = TrialConfig {
                seed,
                trials,
                max_poly_degree: max_degree,
                max_form_degree,
                max_rank,
                order,
                check_prerequisites: !no_prereq,
                gradient_term: gradient_term.parse()?,
                timing: !no_timing,
            };
            let report = verify(&g, suite, &cfg)?;
            if cli.json {
                println!("{}", report.to_json());
            } else {
                print!("{}", report.to_text());
            }
            let failed = report.failed_prerequisites();
            if !failed.is_empty() {
                eprintln!("covstar: prerequisite failed: {}", failed.join(", "));
            }
            Ok(report.exit_code() as u8)
        }
        Command::Fixtures { name } => match name {
            None => {
                for (n, _) in FIXTURES {
                    println!("{n}");
                }
                Ok(0)
            }
            Some(n) => {
                let src = covstar::io::fixture_source(&n)
                    .ok_or_else(|| Error::Input(format!("no fixture named `{n}`")))?;
                print!("{src}");
                Ok(0)
            }
        },
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("covstar: {e}");
            ExitCode::from(error_exit(&e))
        }
    }
}
