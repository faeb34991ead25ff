//! Reading DSL documents into [`Program`]s.
//!
//! Every node keeps its JSON pointer, so schema errors and later typing
//! errors can point at the offending key. Expression strings are parsed here
//! but their syntax errors surface when the program is type-checked.

use logos_core::diagnostic::child_path;
use logos_core::model::{
    ActionName, Binder, BinderKind, Body, ConstantGroup, Direction, FunctionDecl, KnowledgeEntry, Objective,
    OptimizationSpec, Rule, SortDecl, SortKind, SourceExpr, VariableDecl, Verification,
};
use logos_core::{canonicalize, Category, Diagnostic, Program, SourceSpan};
use serde_json::{Map, Value};

const TOP_LEVEL: [&str; 10] = [
    "sorts",
    "functions",
    "constants",
    "variables",
    "knowledge_base",
    "knowledgebase",
    "rules",
    "verifications",
    "optimization",
    "actions",
];

/// Parses and canonicalizes a DSL document.
pub fn parse_program(text: &str) -> Result<Program, Vec<Diagnostic>> {
    let value: Value = serde_json::from_str(text).map_err(|e| vec![json_syntax(text, &e)])?;
    let program = program_from_value(&value)?;
    canonicalize(program)
}

fn json_syntax(text: &str, e: &serde_json::Error) -> Diagnostic {
    let offset = char_offset(text, e.line(), e.column());
    Diagnostic::at(Category::JsonSyntax, e.to_string(), SourceSpan::new("", offset, offset))
        .with_hint("the document must be a single JSON object")
}

/// Converts serde_json's 1-based line and column to a char offset.
fn char_offset(text: &str, line: usize, column: usize) -> usize {
    let mut offset = 0;
    for (i, l) in text.split('\n').enumerate() {
        if i + 1 == line {
            return offset + l.chars().count().min(column.saturating_sub(1));
        }
        offset += l.chars().count() + 1;
    }
    offset.saturating_sub(1)
}

/// Maps an already-parsed JSON value onto the data model.
pub fn program_from_value(value: &Value) -> Result<Program, Vec<Diagnostic>> {
    let mut r = Reader::default();
    let program = r.program(value);
    if r.diags.is_empty() {
        Ok(program)
    } else {
        Err(r.diags)
    }
}

#[derive(Default)]
struct Reader {
    diags: Vec<Diagnostic>,
}

impl Reader {
    fn fail(&mut self, path: &str, message: impl Into<String>) {
        self.diags.push(Diagnostic::at(Category::SchemaViolation, message, SourceSpan::node(path)));
    }

    fn object<'a>(&mut self, v: &'a Value, path: &str, allowed: &[&str]) -> Option<&'a Map<String, Value>> {
        let Some(obj) = v.as_object() else {
            self.fail(path, format!("expected an object, found {}", kind(v)));
            return None;
        };
        for key in obj.keys() {
            if !allowed.contains(&key.as_str()) {
                let d = Diagnostic::at(
                    Category::SchemaViolation,
                    format!("unknown key `{}`", key),
                    SourceSpan::node(child_path(path, key)),
                )
                .with_hint(format!("allowed keys: {}", allowed.join(", ")));
                self.diags.push(d);
            }
        }
        Some(obj)
    }

    fn array<'a>(&mut self, v: &'a Value, path: &str) -> Option<&'a [Value]> {
        match v.as_array() {
            Some(xs) => Some(xs),
            None => {
                self.fail(path, format!("expected an array, found {}", kind(v)));
                None
            }
        }
    }

    fn string(&mut self, v: &Value, path: &str) -> Option<String> {
        match v.as_str() {
            Some(s) => Some(s.to_string()),
            None => {
                self.fail(path, format!("expected a string, found {}", kind(v)));
                None
            }
        }
    }

    fn field(&mut self, obj: &Map<String, Value>, key: &str, path: &str) -> Option<String> {
        match obj.get(key) {
            Some(v) => self.string(v, &child_path(path, key)),
            None => {
                self.fail(path, format!("missing required key `{}`", key));
                None
            }
        }
    }

    fn strings(&mut self, v: &Value, path: &str) -> Vec<String> {
        let Some(xs) = self.array(v, path) else { return Vec::new() };
        xs.iter().enumerate().filter_map(|(i, x)| self.string(x, &child_path(path, i))).collect()
    }

    fn expr(&mut self, obj: &Map<String, Value>, key: &str, path: &str) -> Option<SourceExpr> {
        let p = child_path(path, key);
        self.field(obj, key, path).map(|text| SourceExpr::parse(p, text))
    }

    fn program(&mut self, v: &Value) -> Program {
        let mut p = Program::default();
        let Some(root) = self.object(v, "", &TOP_LEVEL) else { return p };
        if root.contains_key("knowledge_base") && root.contains_key("knowledgebase") {
            self.fail("/knowledgebase", "both `knowledge_base` and its alias `knowledgebase` are present");
        }
        for (key, value) in root {
            let path = child_path("", key);
            match key.as_str() {
                "sorts" => p.sorts = self.list(value, &path, Self::sort),
                "functions" => p.functions = self.list(value, &path, Self::function),
                "constants" => p.constants = self.constants(value, &path),
                "variables" => p.variables = self.list(value, &path, Self::variable),
                "knowledge_base" | "knowledgebase" => p.knowledge_base = self.list(value, &path, Self::knowledge),
                "rules" => p.rules = self.list(value, &path, Self::rule),
                "verifications" => p.verifications = self.list(value, &path, Self::verification),
                "optimization" => p.optimization = self.optimization(value, &path),
                "actions" => {
                    p.actions = self.list(value, &path, |r, v, path| {
                        r.string(v, path).map(|name| ActionName { name, path: path.to_string() })
                    })
                }
                _ => {}
            }
        }
        p
    }

    fn list<T>(&mut self, v: &Value, path: &str, item: impl Fn(&mut Self, &Value, &str) -> Option<T>) -> Vec<T> {
        let Some(xs) = self.array(v, path) else { return Vec::new() };
        xs.iter().enumerate().filter_map(|(i, x)| item(self, x, &child_path(path, i))).collect()
    }

    fn sort(&mut self, v: &Value, path: &str) -> Option<SortDecl> {
        let obj = self.object(v, path, &["name", "type", "values"])?;
        let name = self.field(obj, "name", path);
        let keyword = self.field(obj, "type", path);
        let values = obj.get("values").map(|v| self.strings(v, &child_path(path, "values"))).unwrap_or_default();
        let keyword = keyword?;
        let kind = SortKind::from_keyword(&keyword)
            .or_else(|| logos_core::model::parse_bitvec_ref(&keyword).map(SortKind::BitVecSort));
        let Some(kind) = kind else {
            let d = Diagnostic::at(
                Category::SchemaViolation,
                format!("unknown sort kind `{}`", keyword),
                SourceSpan::node(child_path(path, "type")),
            )
            .with_hint("use DeclareSort, EnumSort, BoolSort, IntSort, RealSort or BitVecSort(n)");
            self.diags.push(d);
            return None;
        };
        Some(SortDecl { name: name?, kind, values, path: path.to_string() })
    }

    fn function(&mut self, v: &Value, path: &str) -> Option<FunctionDecl> {
        let obj = self.object(v, path, &["name", "domain", "range"])?;
        let name = self.field(obj, "name", path);
        let domain = match obj.get("domain") {
            Some(d) => self.strings(d, &child_path(path, "domain")),
            None => Vec::new(),
        };
        let range = self.field(obj, "range", path);
        Some(FunctionDecl { name: name?, domain, range: range?, path: path.to_string() })
    }

    fn constants(&mut self, v: &Value, path: &str) -> Vec<ConstantGroup> {
        let Some(obj) = v.as_object() else {
            self.fail(path, format!("expected an object of constant groups, found {}", kind(v)));
            return Vec::new();
        };
        let mut out = Vec::new();
        for (group, g) in obj {
            let gpath = child_path(path, group);
            let Some(gobj) = self.object(g, &gpath, &["sort", "members"]) else { continue };
            let sort = self.field(gobj, "sort", &gpath);
            let members = match gobj.get("members") {
                Some(m) => self.strings(m, &child_path(&gpath, "members")),
                None => {
                    self.fail(&gpath, "missing required key `members`");
                    continue;
                }
            };
            if let Some(sort) = sort {
                out.push(ConstantGroup { group: group.clone(), sort, members, path: gpath });
            }
        }
        out
    }

    fn variable(&mut self, v: &Value, path: &str) -> Option<VariableDecl> {
        let obj = self.object(v, path, &["name", "sort"])?;
        let name = self.field(obj, "name", path);
        let sort = self.field(obj, "sort", path);
        Some(VariableDecl { name: name?, sort: sort?, path: path.to_string() })
    }

    fn knowledge(&mut self, v: &Value, path: &str) -> Option<KnowledgeEntry> {
        if let Some(text) = v.as_str() {
            return Some(KnowledgeEntry {
                assertion: SourceExpr::parse(path, text),
                value: None,
                variables: None,
                path: path.to_string(),
            });
        }
        let obj = self.object(v, path, &["assertion", "value", "variables"])?;
        let assertion = self.expr(obj, "assertion", path);
        let value = match obj.get("value") {
            None => None,
            Some(Value::Bool(b)) => Some(*b),
            Some(other) => {
                self.fail(&child_path(path, "value"), format!("expected a boolean, found {}", kind(other)));
                None
            }
        };
        let variables = obj.get("variables").map(|vs| self.list(vs, &child_path(path, "variables"), Self::variable));
        Some(KnowledgeEntry { assertion: assertion?, value, variables, path: path.to_string() })
    }

    fn body(&mut self, obj: &Map<String, Value>, path: &str) -> Option<Body> {
        match (obj.get("implies"), obj.contains_key("constraint")) {
            (Some(_), true) => {
                self.fail(path, "give either `implies` or `constraint`, not both");
                None
            }
            (Some(imp), false) => {
                let ipath = child_path(path, "implies");
                let iobj = self.object(imp, &ipath, &["antecedent", "consequent"])?;
                let antecedent = self.expr(iobj, "antecedent", &ipath);
                let consequent = self.expr(iobj, "consequent", &ipath);
                Some(Body::Implies { antecedent: antecedent?, consequent: consequent? })
            }
            (None, true) => self.expr(obj, "constraint", path).map(Body::Constraint),
            (None, false) => {
                self.fail(path, "missing `constraint` or `implies`");
                None
            }
        }
    }

    fn binder(&mut self, obj: &Map<String, Value>, path: &str, allow_exists: bool) -> Result<Option<Binder>, ()> {
        let forall = obj.get("forall");
        let exists = obj.get("exists");
        let (kind, key, vars) = match (forall, exists) {
            (Some(_), Some(_)) => {
                self.fail(path, "a binder is either `forall` or `exists`, not both");
                return Err(());
            }
            (Some(v), None) => (BinderKind::ForAll, "forall", v),
            (None, Some(v)) if allow_exists => (BinderKind::Exists, "exists", v),
            (None, Some(_)) => {
                self.fail(&child_path(path, "exists"), "rules only take a `forall` binder");
                return Err(());
            }
            (None, None) => return Ok(None),
        };
        let bpath = child_path(path, key);
        let before = self.diags.len();
        let vars = self.list(vars, &bpath, Self::variable);
        if self.diags.len() > before {
            return Err(());
        }
        Ok(Some(Binder { kind, vars, path: bpath }))
    }

    fn rule(&mut self, v: &Value, path: &str) -> Option<Rule> {
        let obj = self.object(v, path, &["name", "forall", "exists", "implies", "constraint"])?;
        let name = self.field(obj, "name", path);
        let binder = self.binder(obj, path, false);
        let body = self.body(obj, path);
        Some(Rule { name: name?, binder: binder.ok()?, body: body?, path: path.to_string() })
    }

    fn verification(&mut self, v: &Value, path: &str) -> Option<Verification> {
        let obj = self.object(v, path, &["name", "forall", "exists", "implies", "constraint"])?;
        let name = self.field(obj, "name", path);
        let binder = self.binder(obj, path, true);
        let body = self.body(obj, path);
        Some(Verification { name: name?, binder: binder.ok()?, body: body?, path: path.to_string() })
    }

    fn optimization(&mut self, v: &Value, path: &str) -> Option<OptimizationSpec> {
        let obj = self.object(v, path, &["constraints", "objectives"])?;
        let constraints = match obj.get("constraints") {
            Some(cs) => self.list(cs, &child_path(path, "constraints"), |r, v, p| {
                r.string(v, p).map(|text| SourceExpr::parse(p, text))
            }),
            None => Vec::new(),
        };
        let objectives = match obj.get("objectives") {
            Some(os) => self.list(os, &child_path(path, "objectives"), Self::objective),
            None => Vec::new(),
        };
        Some(OptimizationSpec { constraints, objectives, path: path.to_string() })
    }

    fn objective(&mut self, v: &Value, path: &str) -> Option<Objective> {
        let obj = self.object(v, path, &["type", "expression"])?;
        let direction = match self.field(obj, "type", path)?.as_str() {
            "minimize" => Direction::Minimize,
            "maximize" => Direction::Maximize,
            other => {
                self.fail(
                    &child_path(path, "type"),
                    format!("objective type must be minimize or maximize, not `{}`", other),
                );
                return None;
            }
        };
        let expression = self.expr(obj, "expression", path)?;
        Some(Objective { direction, expression, path: path.to_string() })
    }
}

fn kind(v: &Value) -> &'static str {
    match v {
        Value::Null => "null",
        Value::Bool(_) => "a boolean",
        Value::Number(_) => "a number",
        Value::String(_) => "a string",
        Value::Array(_) => "an array",
        Value::Object(_) => "an object",
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn errors(text: &str) -> Vec<Diagnostic> {
        parse_program(text).unwrap_err()
    }

    #[test]
    fn empty_document_is_an_empty_program() {
        let p = parse_program("{}").unwrap();
        assert_eq!(p, Program::default());
    }

    #[test]
    fn malformed_json_is_json_syntax() {
        let e = errors("{\n  \"sorts\": [,]\n}");
        assert_eq!(e.len(), 1);
        assert_eq!(e[0].category, Category::JsonSyntax);
        assert_eq!(e[0].span.as_ref().unwrap().start, 14);
    }

    #[test]
    fn unknown_top_level_key_is_rejected_with_pointer() {
        let e = errors(r#"{"sorts": [], "axioms": []}"#);
        assert_eq!(e[0].category, Category::SchemaViolation);
        assert_eq!(e[0].path(), "/axioms");
    }

    #[test]
    fn wrong_shape_points_at_the_node() {
        let e = errors(r#"{"functions": [{"name": "f", "domain": "Person", "range": "Bool"}]}"#);
        assert_eq!(e[0].path(), "/functions/0/domain");
    }

    #[test]
    fn knowledge_entry_forms() {
        let p = parse_program(
            r#"{"knowledgebase": ["A", {"assertion": "Wearing(worker, hardHat)", "value": false},
                {"assertion": "B", "variables": [{"name": "g", "sort": "Group"}]}]}"#,
        )
        .unwrap();
        assert_eq!(p.knowledge_base.len(), 3);
        assert_eq!(p.knowledge_base[0].assertion.path, "/knowledgebase/0");
        assert_eq!(p.knowledge_base[1].value, Some(false));
        assert_eq!(p.knowledge_base[1].assertion.path, "/knowledgebase/1/assertion");
        assert_eq!(p.knowledge_base[2].variables.as_ref().unwrap()[0].sort, "Group");
    }

    #[test]
    fn verify_alias_is_canonicalized() {
        let p = parse_program(r#"{"actions": ["verify"]}"#).unwrap();
        assert_eq!(p.actions[0].name, "verify_conditions");
        let e = errors(r#"{"actions": ["prove"]}"#);
        assert_eq!(e[0].category, Category::UnknownAction);
        assert_eq!(e[0].path(), "/actions/0");
    }

    #[test]
    fn rule_with_exists_binder_is_rejected() {
        let e = errors(r#"{"rules": [{"name": "r", "exists": [], "constraint": "True"}]}"#);
        assert_eq!(e[0].path(), "/rules/0/exists");
    }

    #[test]
    fn body_needs_exactly_one_form() {
        let e = errors(r#"{"verifications": [{"name": "v"}]}"#);
        assert_eq!(e[0].path(), "/verifications/0");
        let e = errors(
            r#"{"verifications": [{"name": "v", "constraint": "A", "implies": {"antecedent": "A", "consequent": "B"}}]}"#,
        );
        assert_eq!(e.len(), 1);
    }

    #[test]
    fn expression_paths_follow_the_document() {
        let p = parse_program(
            r#"{"optimization": {"constraints": ["x > 0"], "objectives": [{"type": "maximize", "expression": "x"}]}}"#,
        )
        .unwrap();
        let o = p.optimization.unwrap();
        assert_eq!(o.constraints[0].path, "/optimization/constraints/0");
        assert_eq!(o.objectives[0].expression.path, "/optimization/objectives/0/expression");
        assert_eq!(o.objectives[0].direction, Direction::Maximize);
    }

    #[test]
    fn syntax_errors_are_kept_for_the_checker() {
        let p = parse_program(r#"{"knowledge_base": ["And(A,"]}"#).unwrap();
        assert!(p.knowledge_base[0].assertion.parsed.is_err());
    }
}
