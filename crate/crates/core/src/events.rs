//! User-declared event types and the partial matching function from ground
//! events to most-general substitutions.

use std::collections::BTreeMap;

use crate::data::{DataValue, EventValue};
use crate::subst::Substitution;
use crate::terms::{BasicDataExpr, EventPattern, VarName};

/// Declaration of an event type: a name, formal parameters, and an object
/// template describing the shape of matching events.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EventTypeDecl {
    pub type_name: String,
    pub params: Vec<VarName>,
    pub template: BasicDataExpr,
}

#[derive(Debug, Clone, thiserror::Error)]
pub enum DeclError {
    #[error("event type {0:?} declared twice")]
    Duplicate(String),
    #[error("template of {0:?} must be an object")]
    TemplateNotObject(String),
    #[error("template of {0:?} uses {1:?} which is not a declared parameter")]
    UnboundTemplateVar(String, String),
    #[error("event type {0:?} repeats parameter {1:?}")]
    DuplicateParam(String, String),
}

impl EventTypeDecl {
    pub fn new(
        type_name: impl Into<String>,
        params: Vec<VarName>,
        template: BasicDataExpr,
    ) -> Result<EventTypeDecl, DeclError> {
        let type_name = type_name.into();
        if !matches!(template, BasicDataExpr::Object(_)) {
            return Err(DeclError::TemplateNotObject(type_name));
        }
        let mut seen = std::collections::BTreeSet::new();
        for p in &params {
            if !seen.insert(p.clone()) {
                return Err(DeclError::DuplicateParam(type_name, p.to_string()));
            }
        }
        let mut tvars = std::collections::BTreeSet::new();
        template.vars(&mut tvars);
        for v in &tvars {
            if !params.contains(v) {
                return Err(DeclError::UnboundTemplateVar(type_name, v.to_string()));
            }
        }
        Ok(EventTypeDecl {
            type_name,
            params,
            template,
        })
    }

    pub fn arity(&self) -> usize {
        self.params.len()
    }
}

/// The set of event type declarations in scope for a specification.
#[derive(Debug, Clone, Default)]
pub struct EventTypeDecls {
    by_name: BTreeMap<String, EventTypeDecl>,
}

impl EventTypeDecls {
    pub fn new() -> EventTypeDecls {
        EventTypeDecls::default()
    }

    pub fn from_decls(
        decls: impl IntoIterator<Item = EventTypeDecl>,
    ) -> Result<EventTypeDecls, DeclError> {
        let mut out = EventTypeDecls::new();
        for d in decls {
            out.insert(d)?;
        }
        Ok(out)
    }

    pub fn insert(&mut self, decl: EventTypeDecl) -> Result<(), DeclError> {
        if self.by_name.contains_key(&decl.type_name) {
            return Err(DeclError::Duplicate(decl.type_name));
        }
        self.by_name.insert(decl.type_name.clone(), decl);
        Ok(())
    }

    pub fn get(&self, name: &str) -> Option<&EventTypeDecl> {
        self.by_name.get(name)
    }

    pub fn iter(&self) -> impl Iterator<Item = &EventTypeDecl> {
        self.by_name.values()
    }

    pub fn len(&self) -> usize {
        self.by_name.len()
    }

    pub fn is_empty(&self) -> bool {
        self.by_name.is_empty()
    }
}

/// Outcome of matching an event against a pattern.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MatchOutcome {
    /// The most general substitution making the event match, with domain
    /// inside the pattern's free variables.
    Match(Substitution),
    NoMatch,
}

impl MatchOutcome {
    pub fn is_match(&self) -> bool {
        matches!(self, MatchOutcome::Match(_))
    }
}

/// Static matching errors, distinct from a runtime `NoMatch`.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum MatchError {
    #[error("undeclared event type {0:?}")]
    UndeclaredEventType(String),
    #[error("event type {name:?} has arity {expected}, pattern supplies {actual}")]
    ArityMismatch {
        name: String,
        expected: usize,
        actual: usize,
    },
}

/// Matches a ground event against a pattern.
///
/// The declaration's template is instantiated by binding parameters
/// positionally to the pattern's argument expressions, then matched
/// structurally against the event. Object matching is open-world: template
/// keys must exist in the event, extra event keys are ignored. Arrays match
/// element-wise with equal lengths. A variable occurring twice must bind
/// consistently.
pub fn match_event(
    decls: &EventTypeDecls,
    event: &EventValue,
    pattern: &EventPattern,
) -> Result<MatchOutcome, MatchError> {
    let decl = decls
        .get(&pattern.type_name)
        .ok_or_else(|| MatchError::UndeclaredEventType(pattern.type_name.clone()))?;
    if decl.arity() != pattern.args.len() {
        return Err(MatchError::ArityMismatch {
            name: pattern.type_name.clone(),
            expected: decl.arity(),
            actual: pattern.args.len(),
        });
    }
    // Substitute each parameter by its argument expression. Arguments may
    // themselves contain variables; those are what the match will bind.
    let by_param: BTreeMap<&VarName, &BasicDataExpr> =
        decl.params.iter().zip(pattern.args.iter()).collect();
    let instantiated = instantiate(&decl.template, &by_param);

    let mut bindings = Substitution::empty();
    if match_expr(&instantiated, &event.as_value(), &mut bindings) {
        Ok(MatchOutcome::Match(bindings))
    } else {
        Ok(MatchOutcome::NoMatch)
    }
}

fn instantiate(
    template: &BasicDataExpr,
    by_param: &BTreeMap<&VarName, &BasicDataExpr>,
) -> BasicDataExpr {
    match template {
        BasicDataExpr::Var(x) => match by_param.get(x) {
            Some(arg) => (*arg).clone(),
            None => template.clone(),
        },
        BasicDataExpr::Lit(_) => template.clone(),
        BasicDataExpr::Object(fields) => BasicDataExpr::Object(
            fields
                .iter()
                .map(|(k, e)| (k.clone(), instantiate(e, by_param)))
                .collect(),
        ),
        BasicDataExpr::Array(items) => {
            BasicDataExpr::Array(items.iter().map(|e| instantiate(e, by_param)).collect())
        }
    }
}

fn match_expr(expr: &BasicDataExpr, value: &DataValue, bindings: &mut Substitution) -> bool {
    match expr {
        BasicDataExpr::Var(x) => bindings.bind(x.clone(), value.clone()).is_ok(),
        BasicDataExpr::Lit(l) => l == value,
        BasicDataExpr::Object(fields) => match value {
            DataValue::Object(map) => fields.iter().all(|(k, e)| {
                map.get(k)
                    .map(|v| match_expr(e, v, bindings))
                    .unwrap_or(false)
            }),
            _ => false,
        },
        BasicDataExpr::Array(items) => match value {
            DataValue::Array(values) => {
                items.len() == values.len()
                    && items
                        .iter()
                        .zip(values.iter())
                        .all(|(e, v)| match_expr(e, v, bindings))
            }
            _ => false,
        },
    }
}

/// Renders an event through the declared types when possible: if the event
/// matches some declaration applied to fresh variables, it prints as
/// `name(v1, ...)`; otherwise as raw JSON.
pub fn render_event(decls: &EventTypeDecls, event: &EventValue) -> String {
    for decl in decls.iter() {
        let args: Vec<BasicDataExpr> = (0..decl.arity())
            .map(|i| BasicDataExpr::Var(VarName::new(format!("_a{i}")).unwrap()))
            .collect();
        let pattern = EventPattern::new(decl.type_name.clone(), args);
        if let Ok(MatchOutcome::Match(sigma)) = match_event(decls, event, &pattern) {
            let rendered: Vec<String> = (0..decl.arity())
                .map(|i| {
                    let x = VarName::new(format!("_a{i}")).unwrap();
                    sigma
                        .get(&x)
                        .map(|v| v.to_string())
                        .unwrap_or_else(|| "_".to_string())
                })
                .collect();
            return format!("{}({})", decl.type_name, rendered.join(", "));
        }
    }
    event.to_string()
}

/// Builds the paper-style open/close declarations used across the test
/// suite: `open(fd)` returns of `fs.open`, `close(fd)` calls of `close`.
pub fn file_descriptor_decls() -> EventTypeDecls {
    let open = EventTypeDecl::new(
        "open",
        vec![VarName::new("fd").unwrap()],
        BasicDataExpr::Object(vec![
            ("event".into(), BasicDataExpr::str("func_post")),
            ("name".into(), BasicDataExpr::str("fs.open")),
            ("res".into(), BasicDataExpr::var("fd")),
        ]),
    )
    .unwrap();
    let close = EventTypeDecl::new(
        "close",
        vec![VarName::new("fd").unwrap()],
        BasicDataExpr::Object(vec![
            ("event".into(), BasicDataExpr::str("func_pre")),
            ("name".into(), BasicDataExpr::str("close")),
            ("args".into(), BasicDataExpr::Array(vec![BasicDataExpr::var("fd")])),
        ]),
    )
    .unwrap();
    EventTypeDecls::from_decls([open, close]).unwrap()
}

/// The open-return event with the given descriptor, shaped as in the
/// declarations above.
pub fn open_event(fd: i64) -> EventValue {
    EventValue::from_fields([
        ("event".to_string(), DataValue::str("func_post")),
        ("name".to_string(), DataValue::str("fs.open")),
        ("res".to_string(), DataValue::int(fd)),
    ])
}

/// The close-call event with the given descriptor.
pub fn close_event(fd: i64) -> EventValue {
    EventValue::from_fields([
        ("event".to_string(), DataValue::str("func_pre")),
        ("name".to_string(), DataValue::str("close")),
        (
            "args".to_string(),
            DataValue::Array(vec![DataValue::int(fd)]),
        ),
    ])
}
