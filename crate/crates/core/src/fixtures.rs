//! Compact program construction for unit tests.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::model::*;
use crate::typecheck::check_program;
use crate::typed::TypedProgram;

#[derive(Default)]
pub struct Builder {
    p: Program,
}

fn vars(list: &[(&str, &str)], path: &str) -> Vec<VariableDecl> {
    list.iter()
        .enumerate()
        .map(|(i, (n, s))| VariableDecl { name: n.to_string(), sort: s.to_string(), path: format!("{}/{}", path, i) })
        .collect()
}

fn strings(xs: &[&str]) -> Vec<String> {
    xs.iter().map(|s| s.to_string()).collect()
}

impl Builder {
    pub fn new() -> Self {
        Builder::default()
    }

    pub fn sort(mut self, name: &str, kind: SortKind) -> Self {
        let path = format!("/sorts/{}", self.p.sorts.len());
        self.p.sorts.push(SortDecl { name: name.into(), kind, values: Vec::new(), path });
        self
    }

    pub fn enum_sort(mut self, name: &str, values: &[&str]) -> Self {
        let path = format!("/sorts/{}", self.p.sorts.len());
        self.p.sorts.push(SortDecl { name: name.into(), kind: SortKind::EnumSort, values: strings(values), path });
        self
    }

    pub fn func(mut self, name: &str, domain: &[&str], range: &str) -> Self {
        let path = format!("/functions/{}", self.p.functions.len());
        self.p.functions.push(FunctionDecl { name: name.into(), domain: strings(domain), range: range.into(), path });
        self
    }

    pub fn consts(mut self, sort: &str, members: &[&str]) -> Self {
        let group = format!("g{}", self.p.constants.len());
        let path = format!("/constants/{}", group);
        self.p.constants.push(ConstantGroup { group, sort: sort.into(), members: strings(members), path });
        self
    }

    pub fn var(mut self, name: &str, sort: &str) -> Self {
        let path = format!("/variables/{}", self.p.variables.len());
        self.p.variables.push(VariableDecl { name: name.into(), sort: sort.into(), path });
        self
    }

    pub fn fact(mut self, text: &str) -> Self {
        let path = format!("/knowledge_base/{}", self.p.knowledge_base.len());
        self.p.knowledge_base.push(KnowledgeEntry {
            assertion: SourceExpr::parse(path.clone(), text),
            value: None,
            variables: None,
            path,
        });
        self
    }

    pub fn rule(mut self, forall: &[(&str, &str)], text: &str) -> Self {
        let path = format!("/rules/{}", self.p.rules.len());
        let binder = (!forall.is_empty()).then(|| Binder {
            kind: BinderKind::ForAll,
            vars: vars(forall, &format!("{}/forall", path)),
            path: format!("{}/forall", path),
        });
        self.p.rules.push(Rule {
            name: format!("rule{}", self.p.rules.len()),
            binder,
            body: Body::Constraint(SourceExpr::parse(format!("{}/constraint", path), text)),
            path,
        });
        self
    }

    pub fn verify(mut self, name: &str, exists: &[(&str, &str)], text: &str) -> Self {
        let path = format!("/verifications/{}", self.p.verifications.len());
        let binder = (!exists.is_empty()).then(|| Binder {
            kind: BinderKind::Exists,
            vars: vars(exists, &format!("{}/exists", path)),
            path: format!("{}/exists", path),
        });
        self.p.verifications.push(Verification {
            name: name.into(),
            binder,
            body: Body::Constraint(SourceExpr::parse(format!("{}/constraint", path), text)),
            path,
        });
        self
    }

    pub fn optimize(mut self, constraints: &[&str], objectives: &[(Direction, &str)]) -> Self {
        self.p.optimization = Some(OptimizationSpec {
            constraints: constraints
                .iter()
                .enumerate()
                .map(|(i, c)| SourceExpr::parse(format!("/optimization/constraints/{}", i), *c))
                .collect(),
            objectives: objectives
                .iter()
                .enumerate()
                .map(|(i, (d, e))| Objective {
                    direction: *d,
                    expression: SourceExpr::parse(format!("/optimization/objectives/{}/expression", i), *e),
                    path: format!("/optimization/objectives/{}", i),
                })
                .collect(),
            path: "/optimization".into(),
        });
        self.action(OPTIMIZE)
    }

    pub fn action(mut self, name: &str) -> Self {
        let path = format!("/actions/{}", self.p.actions.len());
        self.p.actions.push(ActionName { name: name.into(), path });
        self
    }

    pub fn build(self) -> Program {
        self.p
    }

    pub fn typed(self) -> TypedProgram {
        match check_program(&self.p) {
            Ok(tp) => tp,
            Err(diags) => panic!("fixture does not typecheck: {:?}", diags),
        }
    }
}
