//! Driving an external SMT solver as a child process.

use std::io::{Read, Write};
use std::process::{Command, Stdio};
use std::thread;
use std::time::{Duration, Instant};

use logos_core::engine::SolverRunner;
use logos_core::smtlib::parse_output;
use logos_core::{Category, Diagnostic, Status};
use wait_timeout::ChildExt;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SolverConfig {
    pub command: String,
    pub args: Vec<String>,
    pub timeout: Duration,
    pub produce_models: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            command: "z3".into(),
            args: vec!["-in".into()],
            timeout: Duration::from_millis(30_000),
            produce_models: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverOutcome {
    pub status: Status,
    pub model_text: Option<String>,
    pub objectives_text: Option<String>,
    /// Everything the solver printed on standard output.
    pub raw: String,
    pub elapsed: Duration,
}

/// Feeds `script` to the solver on stdin and returns its stdout. The
/// process is killed when the timeout expires.
pub fn run_raw(script: &str, config: &SolverConfig) -> Result<(String, Duration), Diagnostic> {
    let start = Instant::now();
    let mut child = Command::new(&config.command)
        .args(&config.args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .map_err(|e| {
            Diagnostic::new(Category::SolverFailure, format!("cannot start solver `{}`: {}", config.command, e))
                .with_hint("pass --solver-cmd with the path of an SMT-LIB solver")
        })?;

    let mut stdin = child.stdin.take().expect("piped stdin");
    let input = script.to_string();
    // A solver that exits early closes the pipe; its output tells the story.
    let writer = thread::spawn(move || {
        let _ = stdin.write_all(input.as_bytes());
    });
    let mut stdout = child.stdout.take().expect("piped stdout");
    let reader = thread::spawn(move || {
        let mut s = String::new();
        let _ = stdout.read_to_string(&mut s);
        s
    });
    let mut stderr = child.stderr.take().expect("piped stderr");
    let err_reader = thread::spawn(move || {
        let mut s = String::new();
        let _ = stderr.read_to_string(&mut s);
        s
    });

    let waited = child
        .wait_timeout(config.timeout)
        .map_err(|e| Diagnostic::new(Category::SolverFailure, format!("waiting for the solver failed: {}", e)))?;
    let status = match waited {
        Some(s) => s,
        None => {
            let _ = child.kill();
            let _ = child.wait();
            let _ = writer.join();
            let _ = reader.join();
            let _ = err_reader.join();
            return Err(Diagnostic::new(
                Category::Timeout,
                format!("solver did not finish within {} ms", config.timeout.as_millis()),
            )
            .with_hint("raise --timeout-ms or simplify the program"));
        }
    };
    let _ = writer.join();
    let out = reader.join().unwrap_or_default();
    let err = err_reader.join().unwrap_or_default();
    let elapsed = start.elapsed();

    let has_status = out.split_whitespace().any(|w| matches!(w, "sat" | "unsat" | "unknown"));
    if !status.success() && !has_status {
        let detail = if err.trim().is_empty() { out.trim() } else { err.trim() };
        return Err(Diagnostic::new(Category::SolverFailure, format!("solver exited with {}: {}", status, detail)));
    }
    Ok((out, elapsed))
}

/// Runs a script and splits the reply into status, model and objectives.
pub fn run_solver(script: &str, config: &SolverConfig) -> Result<SolverOutcome, Diagnostic> {
    let (raw, elapsed) = run_raw(script, config)?;
    let reply = parse_output(&raw)
        .map_err(|e| Diagnostic::new(Category::SolverFailure, format!("unreadable solver output: {}", e)))?;
    let model_text = match reply.status {
        Status::Sat if config.produce_models => reply.model.as_ref().map(|m| m.to_string()),
        _ => None,
    };
    Ok(SolverOutcome {
        status: reply.status,
        model_text,
        objectives_text: reply.objectives.as_ref().map(|o| o.to_string()),
        raw,
        elapsed,
    })
}

/// [`SolverRunner`] backed by a fresh process per script.
#[derive(Debug, Clone, Default)]
pub struct ProcessRunner {
    pub config: SolverConfig,
}

impl SolverRunner for ProcessRunner {
    fn run(&self, script: &str) -> Result<String, Diagnostic> {
        run_raw(script, &self.config).map(|(out, _)| out)
    }
}
