use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use clap::{Args, Parser, Subcommand, ValueEnum};
use logos::corpus::{load_labels, run_corpus, run_json, run_text};
use logos::emit::emit_scripts;
use logos::repair::{repair_loop, HttpReviser, Reviser, DEFAULT_MAX_ATTEMPTS};
use logos::report::{diagnostics_json, report_json, report_text};
use logos::solver::SolverConfig;
use logos::{parse_program, BackendChoice, Settings};
use logos_core::engine::{compile, differential_check, optimize_program, Agreement};
use logos_core::finite::{FiniteConfig, DEFAULT_BUDGET, DEFAULT_WINDOW};
use logos_core::smtlib::EmitOptions;
use logos_core::verdict::{OptStatus, Report};
use logos_core::{Category, Diagnostic, SourceSpan, Status, TypedProgram};
use serde_json::{json, Value};

const SUCCESS: u8 = 0;
const NEGATIVE: u8 = 1;
const DIAGNOSTICS: u8 = 2;
const INFRASTRUCTURE: u8 = 3;

#[derive(Parser)]
#[command(name = "logos", version, about = "Type-check, verify and optimize first-order logic DSL programs")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Args)]
struct Global {
    /// Decision procedure.
    #[arg(long, global = true, value_enum, default_value_t = Backend::Smt)]
    backend: Backend,
    /// SMT solver executable.
    #[arg(long, global = true, default_value = "z3")]
    solver_cmd: String,
    /// Solver argument; repeatable. Defaults to `-in`.
    #[arg(long = "solver-arg", global = true, allow_hyphen_values = true)]
    solver_args: Vec<String>,
    /// Per-solver-call timeout.
    #[arg(long, global = true, default_value_t = 30_000)]
    timeout_ms: u64,
    /// Integer window for the enumerator, LO:HI.
    #[arg(long, global = true, value_parser = parse_window, allow_hyphen_values = true)]
    int_window: Option<(i64, i64)>,
    /// Candidate budget for the enumerator.
    #[arg(long, global = true, default_value_t = DEFAULT_BUDGET)]
    enum_budget: u64,
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,
    /// Passes through the repair loop, including the first.
    #[arg(long, global = true, default_value_t = DEFAULT_MAX_ATTEMPTS)]
    max_attempts: u32,
    /// Parallel corpus cases.
    #[arg(long, global = true)]
    jobs: Option<usize>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Backend {
    Smt,
    Enum,
    Both,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Text,
}

#[derive(Subcommand)]
enum Cmd {
    /// Parse and type-check only.
    Check { file: PathBuf },
    /// Run the program's actions.
    Verify { file: PathBuf },
    /// Run the optimization block.
    Optimize { file: PathBuf },
    /// Print the SMT-LIB scripts the program produces.
    EmitSmt { file: PathBuf },
    /// Compare the solver and the enumerator on every query.
    Diff { file: PathBuf },
    /// Run a labeled corpus and print metrics.
    Bench {
        dir: PathBuf,
        #[arg(long)]
        labels: PathBuf,
    },
    /// Run with a reviser fixing source diagnostics between attempts.
    Repair {
        file: PathBuf,
        #[arg(long)]
        reviser_url: String,
    },
}

fn parse_window(s: &str) -> Result<(i64, i64), String> {
    let (lo, hi) = s.split_once(':').ok_or("expected LO:HI")?;
    let lo: i64 = lo.trim().parse().map_err(|e| format!("bad lower bound: {}", e))?;
    let hi: i64 = hi.trim().parse().map_err(|e| format!("bad upper bound: {}", e))?;
    if lo > hi {
        return Err(format!("empty window {}:{}", lo, hi));
    }
    Ok((lo, hi))
}

impl Global {
    fn settings(&self) -> Settings {
        let args = if self.solver_args.is_empty() { vec!["-in".to_string()] } else { self.solver_args.clone() };
        Settings {
            backend: match self.backend {
                Backend::Smt => BackendChoice::Smt,
                Backend::Enum => BackendChoice::Enum,
                Backend::Both => BackendChoice::Both,
            },
            solver: SolverConfig {
                command: self.solver_cmd.clone(),
                args,
                timeout: Duration::from_millis(self.timeout_ms.max(1)),
                produce_models: true,
            },
            finite: FiniteConfig { int_window: self.int_window.unwrap_or(DEFAULT_WINDOW), budget: self.enum_budget },
        }
    }
}

fn read(path: &Path) -> Result<String, ExitCode> {
    fs::read_to_string(path).map_err(|e| {
        eprintln!("logos: cannot read {}: {}", path.display(), e);
        ExitCode::from(INFRASTRUCTURE)
    })
}

fn print_json(v: &Value) {
    println!("{}", serde_json::to_string_pretty(v).expect("serializable"));
}

fn print_diagnostics(format: Format, ds: &[Diagnostic]) {
    match format {
        Format::Json => print_json(&json!({ "diagnostics": diagnostics_json(ds) })),
        Format::Text => {
            for d in ds {
                println!("error: {}", d);
            }
        }
    }
}

fn compile_source(text: &str) -> Result<TypedProgram, Vec<Diagnostic>> {
    compile(parse_program(text)?)
}

/// 2 for source diagnostics, 3 when a result is UNKNOWN, 1 for UNSAT or
/// INFEASIBLE, otherwise 0.
fn report_code(r: &Report) -> u8 {
    if r.has_source_errors() {
        return DIAGNOSTICS;
    }
    let mut statuses: Vec<Status> = Vec::new();
    if let Some(v) = &r.verification {
        statuses.extend(v.verifications.iter().map(|n| n.verdict.status));
        if v.verifications.is_empty() {
            statuses.push(v.base.status);
        }
    }
    if let Some(o) = &r.optimization {
        statuses.push(match o.status {
            OptStatus::Optimal => Status::Sat,
            OptStatus::Infeasible => Status::Unsat,
            OptStatus::Unknown => Status::Unknown,
        });
    }
    if statuses.contains(&Status::Unknown) {
        INFRASTRUCTURE
    } else if statuses.contains(&Status::Unsat) {
        NEGATIVE
    } else {
        SUCCESS
    }
}

fn print_report(format: Format, r: &Report) {
    match format {
        Format::Json => print_json(&report_json(r)),
        Format::Text => print!("{}", report_text(r)),
    }
}

fn run(cli: Cli) -> Result<u8, ExitCode> {
    let g = &cli.global;
    let settings = g.settings();
    match &cli.command {
        Cmd::Check { file } => {
            let text = read(file)?;
            match compile_source(&text) {
                Ok(_) => {
                    match g.format {
                        Format::Json => print_json(&json!({ "diagnostics": [] })),
                        Format::Text => println!("ok"),
                    }
                    Ok(SUCCESS)
                }
                Err(ds) => {
                    print_diagnostics(g.format, &ds);
                    Ok(DIAGNOSTICS)
                }
            }
        }
        Cmd::Verify { file } => {
            let report = settings.run_source(&read(file)?);
            print_report(g.format, &report);
            Ok(report_code(&report))
        }
        Cmd::Optimize { file } => {
            let tp = match compile_source(&read(file)?) {
                Ok(tp) => tp,
                Err(ds) => {
                    print_diagnostics(g.format, &ds);
                    return Ok(DIAGNOSTICS);
                }
            };
            if tp.optimization.as_ref().is_none_or(|o| o.objectives.is_empty()) {
                let d = Diagnostic::at(
                    Category::SchemaViolation,
                    "the program has no optimization objectives",
                    SourceSpan::node("/optimization"),
                );
                print_diagnostics(g.format, &[d]);
                return Ok(DIAGNOSTICS);
            }
            let smt = settings.smt();
            let finite = settings.enumerator();
            let both = logos_core::engine::Both { smt: &smt, finite: &finite };
            let o = match settings.backend {
                BackendChoice::Smt => optimize_program(&tp, &smt, Some(&finite)),
                BackendChoice::Enum => optimize_program(&tp, &finite, None),
                BackendChoice::Both => optimize_program(&tp, &both, None),
            };
            let report = Report { optimization: Some(o), attempts_used: 1, ..Report::default() };
            print_report(g.format, &report);
            Ok(report_code(&report))
        }
        Cmd::EmitSmt { file } => match compile_source(&read(file)?) {
            Ok(tp) => {
                print!("{}", emit_scripts(&tp, EmitOptions { produce_models: true }));
                Ok(SUCCESS)
            }
            Err(ds) => {
                print_diagnostics(g.format, &ds);
                Ok(DIAGNOSTICS)
            }
        },
        Cmd::Diff { file } => {
            let tp = match compile_source(&read(file)?) {
                Ok(tp) => tp,
                Err(ds) => {
                    print_diagnostics(g.format, &ds);
                    return Ok(DIAGNOSTICS);
                }
            };
            let report = differential_check(&tp, &settings.smt(), &settings.enumerator());
            let outcome = |a: &Agreement| match a {
                Agreement::Agree => "agree",
                Agreement::Inconclusive => "inconclusive",
                Agreement::Skipped => "skipped",
                Agreement::Disagree => "DISAGREE",
            };
            match g.format {
                Format::Json => {
                    let rows: Vec<Value> = report
                        .comparisons
                        .iter()
                        .map(|c| {
                            json!({
                                "query": c.query,
                                "smt": c.left,
                                "enum": c.right,
                                "closure_sensitive": c.closure_sensitive,
                                "outcome": outcome(&c.outcome),
                            })
                        })
                        .collect();
                    print_json(&json!({ "comparisons": rows, "defects": report.defects().count() }));
                }
                Format::Text => {
                    for c in &report.comparisons {
                        let sensitive = if c.closure_sensitive { " (closure-sensitive)" } else { "" };
                        println!(
                            "{}: smt {} / enum {} -> {}{}",
                            c.query,
                            c.left,
                            c.right,
                            outcome(&c.outcome),
                            sensitive
                        );
                    }
                }
            }
            Ok(if report.defects().next().is_some() { NEGATIVE } else { SUCCESS })
        }
        Cmd::Bench { dir, labels } => {
            let cases = load_labels(labels).map_err(|e| {
                eprintln!("logos: {}", e);
                ExitCode::from(INFRASTRUCTURE)
            })?;
            let jobs = g.jobs.unwrap_or_else(|| std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1));
            let run = run_corpus(dir, &cases, &settings, jobs).map_err(|e| {
                eprintln!("logos: {}", e);
                ExitCode::from(INFRASTRUCTURE)
            })?;
            match g.format {
                Format::Json => print_json(&run_json(&run)),
                Format::Text => print!("{}", run_text(&run)),
            }
            let all = run.summary.matched == run.summary.total && run.skipped.is_empty();
            Ok(if all { SUCCESS } else { NEGATIVE })
        }
        Cmd::Repair { file, reviser_url } => {
            let text = read(file)?;
            let reviser = HttpReviser::new(reviser_url.clone(), settings.solver.timeout);
            let outcome =
                repair_loop(&text, Some(&reviser as &dyn Reviser), g.max_attempts, &|s| settings.run_source(s));
            match g.format {
                Format::Json => {
                    let mut v = report_json(&outcome.report);
                    let trace: Vec<Value> = outcome
                        .trace
                        .iter()
                        .enumerate()
                        .map(|(i, a)| json!({ "attempt": i + 1, "diagnostics": diagnostics_json(&a.diagnostics) }))
                        .collect();
                    v["trace"] = Value::Array(trace);
                    v["reviser_error"] = json!(outcome.reviser_error.as_ref().map(|e| e.to_string()));
                    print_json(&v);
                }
                Format::Text => {
                    print!("{}", report_text(&outcome.report));
                    println!("attempts used: {}", outcome.attempts_used());
                    if let Some(e) = &outcome.reviser_error {
                        println!("note: {}", e);
                    }
                }
            }
            if outcome.reviser_error.is_some() && outcome.report.has_source_errors() {
                return Ok(INFRASTRUCTURE);
            }
            Ok(report_code(&outcome.report))
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(code) => code,
    }
}
