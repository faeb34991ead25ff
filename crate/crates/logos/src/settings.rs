//! Run configuration and the source-to-report pipeline.

use logos_core::diagnostic::sort_diagnostics;
use logos_core::engine::{run_program, Backend, Backends, Both, EnumBackend, SmtBackend};
use logos_core::finite::FiniteConfig;
use logos_core::verdict::Report;
use logos_core::Program;

use crate::json::parse_program;
use crate::solver::{ProcessRunner, SolverConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BackendChoice {
    #[default]
    Smt,
    Enum,
    Both,
}

impl BackendChoice {
    pub fn parse(name: &str) -> Option<BackendChoice> {
        match name {
            "smt" => Some(BackendChoice::Smt),
            "enum" => Some(BackendChoice::Enum),
            "both" => Some(BackendChoice::Both),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct Settings {
    pub backend: BackendChoice,
    pub solver: SolverConfig,
    pub finite: FiniteConfig,
}

impl Settings {
    pub fn smt(&self) -> SmtBackend<ProcessRunner> {
        SmtBackend { runner: ProcessRunner { config: self.solver.clone() }, produce_models: self.solver.produce_models }
    }

    pub fn enumerator(&self) -> EnumBackend {
        EnumBackend { config: self.finite }
    }

    /// Runs the program's actions with the selected backend. With `smt`, an
    /// optimization the solver rejects is retried on the enumerator.
    pub fn run_program(&self, program: Program) -> Report {
        let smt = self.smt();
        let finite = self.enumerator();
        let both = Both { smt: &smt, finite: &finite };
        let backends = match self.backend {
            BackendChoice::Smt => Backends { verify: &smt, optimize: &smt, fallback: Some(&finite as &dyn Backend) },
            BackendChoice::Enum => Backends { verify: &finite, optimize: &finite, fallback: None },
            BackendChoice::Both => Backends { verify: &both, optimize: &both, fallback: None },
        };
        let mut report = run_program(program, &backends);
        sort_diagnostics(&mut report.diagnostics);
        report
    }

    /// Parse, canonicalize, type-check and run.
    pub fn run_source(&self, text: &str) -> Report {
        match parse_program(text) {
            Ok(p) => self.run_program(p),
            Err(mut diags) => {
                sort_diagnostics(&mut diags);
                Report::from_diagnostics(diags)
            }
        }
    }
}
