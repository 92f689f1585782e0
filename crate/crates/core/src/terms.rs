//! Cyclic trace expressions represented as finite equation systems.
//!
//! A term is a node in an arena; cycles arise from equations that refer back
//! to themselves (directly or through other equations). Node identity is the
//! arena index, so structural sharing is permitted but never required.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use crate::data::DataValue;

/// An identifier naming a pattern variable.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct VarName(String);

impl VarName {
    pub fn new(name: impl Into<String>) -> Result<VarName, InvalidIdentifier> {
        let name = name.into();
        if is_identifier(&name) {
            Ok(VarName(name))
        } else {
            Err(InvalidIdentifier(name))
        }
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for VarName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::str::FromStr for VarName {
    type Err = InvalidIdentifier;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        VarName::new(s)
    }
}

pub fn is_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() || c == '_' => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

#[derive(Debug, Clone, thiserror::Error)]
#[error("invalid identifier: {0:?}")]
pub struct InvalidIdentifier(pub String);

/// An argument expression inside an event type pattern: a variable, a
/// literal, or structured data built from both.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum BasicDataExpr {
    Var(VarName),
    Lit(DataValue),
    Object(Vec<(String, BasicDataExpr)>),
    Array(Vec<BasicDataExpr>),
}

impl BasicDataExpr {
    pub fn var(name: &str) -> BasicDataExpr {
        BasicDataExpr::Var(VarName::new(name).expect("valid identifier"))
    }

    pub fn int(i: i64) -> BasicDataExpr {
        BasicDataExpr::Lit(DataValue::int(i))
    }

    pub fn str(s: &str) -> BasicDataExpr {
        BasicDataExpr::Lit(DataValue::str(s))
    }

    /// The set of variables occurring anywhere in this expression.
    pub fn vars(&self, out: &mut BTreeSet<VarName>) {
        match self {
            BasicDataExpr::Var(x) => {
                out.insert(x.clone());
            }
            BasicDataExpr::Lit(_) => {}
            BasicDataExpr::Object(fields) => {
                for (_, e) in fields {
                    e.vars(out);
                }
            }
            BasicDataExpr::Array(items) => {
                for e in items {
                    e.vars(out);
                }
            }
        }
    }

    /// Whether this expression is ground, and if so its value.
    pub fn as_ground(&self) -> Option<DataValue> {
        match self {
            BasicDataExpr::Var(_) => None,
            BasicDataExpr::Lit(v) => Some(v.clone()),
            BasicDataExpr::Object(fields) => {
                let mut map = BTreeMap::new();
                for (k, e) in fields {
                    map.insert(k.clone(), e.as_ground()?);
                }
                Some(DataValue::Object(map))
            }
            BasicDataExpr::Array(items) => Some(DataValue::Array(
                items.iter().map(|e| e.as_ground()).collect::<Option<_>>()?,
            )),
        }
    }
}

impl fmt::Display for BasicDataExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BasicDataExpr::Var(x) => write!(f, "{x}"),
            BasicDataExpr::Lit(v) => write!(f, "{v}"),
            BasicDataExpr::Object(fields) => {
                write!(f, "{{")?;
                for (i, (k, e)) in fields.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    if is_identifier(k) {
                        write!(f, "{k}: {e}")?;
                    } else {
                        write!(f, "{}: {e}", serde_json::Value::String(k.clone()))?;
                    }
                }
                write!(f, "}}")
            }
            BasicDataExpr::Array(items) => {
                write!(f, "[")?;
                for (i, e) in items.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{e}")?;
                }
                write!(f, "]")
            }
        }
    }
}

/// An event type pattern: a type name applied to argument expressions.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct EventPattern {
    pub type_name: String,
    pub args: Vec<BasicDataExpr>,
}

impl EventPattern {
    pub fn new(type_name: impl Into<String>, args: Vec<BasicDataExpr>) -> EventPattern {
        EventPattern {
            type_name: type_name.into(),
            args,
        }
    }

    /// Free variables of the pattern: the union over all argument
    /// expressions.
    pub fn free_vars(&self) -> BTreeSet<VarName> {
        let mut out = BTreeSet::new();
        for a in &self.args {
            a.vars(&mut out);
        }
        out
    }
}

impl fmt::Display for EventPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}(", self.type_name)?;
        for (i, a) in self.args.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{a}")?;
        }
        write!(f, ")")
    }
}

/// Free variables of a pattern or bare data expression.
pub fn pattern_free_vars(p: &EventPattern) -> BTreeSet<VarName> {
    p.free_vars()
}

/// Reference to a node in a [`TermSystem`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TermId(pub(crate) u32);

impl TermId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

/// One node of a trace expression.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TermNode {
    Empty,
    Pattern(EventPattern),
    Cat(TermId, TermId),
    And(TermId, TermId),
    Or(TermId, TermId),
    Shuffle(TermId, TermId),
    Let(VarName, TermId),
}

impl TermNode {
    /// Child references, in left-to-right order.
    pub fn children(&self) -> Vec<TermId> {
        match self {
            TermNode::Empty | TermNode::Pattern(_) => vec![],
            TermNode::Cat(a, b)
            | TermNode::And(a, b)
            | TermNode::Or(a, b)
            | TermNode::Shuffle(a, b) => vec![*a, *b],
            TermNode::Let(_, t) => vec![*t],
        }
    }
}

/// Surface syntax for building a [`TermSystem`]: the same constructors plus
/// references to named equations.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TermExpr {
    Empty,
    Pattern(EventPattern),
    Cat(Box<TermExpr>, Box<TermExpr>),
    And(Box<TermExpr>, Box<TermExpr>),
    Or(Box<TermExpr>, Box<TermExpr>),
    Shuffle(Box<TermExpr>, Box<TermExpr>),
    Let(VarName, Box<TermExpr>),
    Ref(String),
}

impl TermExpr {
    pub fn cat(a: TermExpr, b: TermExpr) -> TermExpr {
        TermExpr::Cat(Box::new(a), Box::new(b))
    }
    pub fn and(a: TermExpr, b: TermExpr) -> TermExpr {
        TermExpr::And(Box::new(a), Box::new(b))
    }
    pub fn or(a: TermExpr, b: TermExpr) -> TermExpr {
        TermExpr::Or(Box::new(a), Box::new(b))
    }
    pub fn shuffle(a: TermExpr, b: TermExpr) -> TermExpr {
        TermExpr::Shuffle(Box::new(a), Box::new(b))
    }
    pub fn let_(x: &str, body: TermExpr) -> TermExpr {
        TermExpr::Let(VarName::new(x).expect("valid identifier"), Box::new(body))
    }
    pub fn pat0(name: &str) -> TermExpr {
        TermExpr::Pattern(EventPattern::new(name, vec![]))
    }
    pub fn pat(name: &str, args: Vec<BasicDataExpr>) -> TermExpr {
        TermExpr::Pattern(EventPattern::new(name, args))
    }
    pub fn re(name: &str) -> TermExpr {
        TermExpr::Ref(name.to_string())
    }
}

#[derive(Debug, Clone, thiserror::Error)]
pub enum BuildError {
    #[error("duplicate equation {0:?}")]
    DuplicateEquation(String),
    #[error("undefined equation name {0:?}")]
    UndefinedName(String),
    #[error("empty equation system")]
    Empty,
    #[error("unproductive alias cycle involving equation {0:?}")]
    AliasCycle(String),
}

/// Memoization key for substitution application: a canonical rendering of
/// the substitution restricted to the node's free variables.
pub(crate) type SubstKey = String;

/// A finite system of possibly recursive equations over trace expressions.
#[derive(Debug, Clone)]
pub struct TermSystem {
    nodes: Vec<TermNode>,
    names: BTreeMap<String, TermId>,
    labels: HashMap<TermId, String>,
    pub(crate) subst_memo: HashMap<(TermId, SubstKey), TermId>,
}

impl TermSystem {
    pub fn new() -> TermSystem {
        TermSystem {
            nodes: Vec::new(),
            names: BTreeMap::new(),
            labels: HashMap::new(),
            subst_memo: HashMap::new(),
        }
    }

    /// Builds a closed system from named equations. Every `Ref` must resolve
    /// to one of the given equation names.
    pub fn from_equations(
        equations: Vec<(String, TermExpr)>,
    ) -> Result<TermSystem, BuildError> {
        if equations.is_empty() {
            return Err(BuildError::Empty);
        }
        let mut sys = TermSystem::new();
        // Reserve a node per equation up front so cycles can resolve.
        let mut slots: BTreeMap<String, TermId> = BTreeMap::new();
        for (name, _) in &equations {
            if slots.contains_key(name) {
                return Err(BuildError::DuplicateEquation(name.clone()));
            }
            let id = sys.push(TermNode::Empty); // placeholder
            slots.insert(name.clone(), id);
        }
        // Bare-reference equations alias another equation's node; resolve
        // them after everything else so forward references work.
        let mut aliases: Vec<(String, String)> = Vec::new();
        for (name, expr) in &equations {
            if let TermExpr::Ref(target) = expr {
                aliases.push((name.clone(), target.clone()));
                continue;
            }
            let slot = slots[name];
            let node = sys.lower(expr, &slots)?;
            sys.nodes[slot.index()] = node;
        }
        let alias_names: BTreeSet<&str> = aliases.iter().map(|(n, _)| n.as_str()).collect();
        for (name, target) in &aliases {
            let mut cur = target.clone();
            let mut hops = 0;
            while alias_names.contains(cur.as_str()) {
                hops += 1;
                if hops > aliases.len() {
                    return Err(BuildError::AliasCycle(name.clone()));
                }
                cur = aliases
                    .iter()
                    .find(|(n, _)| *n == cur)
                    .map(|(_, t)| t.clone())
                    .unwrap();
            }
            let target_id = *slots
                .get(&cur)
                .ok_or_else(|| BuildError::UndefinedName(cur.clone()))?;
            sys.nodes[slots[name].index()] = sys.nodes[target_id.index()].clone();
        }
        for (name, id) in slots {
            sys.labels.insert(id, name.clone());
            sys.names.insert(name, id);
        }
        Ok(sys)
    }

    /// Builds a single-equation system named `Main` from an expression
    /// without references.
    pub fn single(expr: TermExpr) -> TermSystem {
        TermSystem::from_equations(vec![("Main".to_string(), expr)])
            .expect("closed expression")
    }

    fn lower(
        &mut self,
        expr: &TermExpr,
        slots: &BTreeMap<String, TermId>,
    ) -> Result<TermNode, BuildError> {
        Ok(match expr {
            TermExpr::Empty => TermNode::Empty,
            TermExpr::Pattern(p) => TermNode::Pattern(p.clone()),
            TermExpr::Cat(a, b) => {
                let a = self.lower_ref(a, slots)?;
                let b = self.lower_ref(b, slots)?;
                TermNode::Cat(a, b)
            }
            TermExpr::And(a, b) => {
                let a = self.lower_ref(a, slots)?;
                let b = self.lower_ref(b, slots)?;
                TermNode::And(a, b)
            }
            TermExpr::Or(a, b) => {
                let a = self.lower_ref(a, slots)?;
                let b = self.lower_ref(b, slots)?;
                TermNode::Or(a, b)
            }
            TermExpr::Shuffle(a, b) => {
                let a = self.lower_ref(a, slots)?;
                let b = self.lower_ref(b, slots)?;
                TermNode::Shuffle(a, b)
            }
            TermExpr::Let(x, body) => {
                let body = self.lower_ref(body, slots)?;
                TermNode::Let(x.clone(), body)
            }
            // Bare references are handled by the callers (alias pass in
            // from_equations, slot lookup in lower_ref).
            TermExpr::Ref(_) => unreachable!("bare references resolved by caller"),
        })
    }

    fn lower_ref(
        &mut self,
        expr: &TermExpr,
        slots: &BTreeMap<String, TermId>,
    ) -> Result<TermId, BuildError> {
        if let TermExpr::Ref(name) = expr {
            return slots
                .get(name)
                .copied()
                .ok_or_else(|| BuildError::UndefinedName(name.clone()));
        }
        let node = self.lower(expr, slots)?;
        Ok(self.push(node))
    }

    pub(crate) fn push(&mut self, node: TermNode) -> TermId {
        let id = TermId(self.nodes.len() as u32);
        self.nodes.push(node);
        id
    }

    pub fn node(&self, id: TermId) -> &TermNode {
        &self.nodes[id.index()]
    }

    pub(crate) fn set_node(&mut self, id: TermId, node: TermNode) {
        self.nodes[id.index()] = node;
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn node_ids(&self) -> impl Iterator<Item = TermId> {
        (0..self.nodes.len() as u32).map(TermId)
    }

    pub fn equation(&self, name: &str) -> Option<TermId> {
        self.names.get(name).copied()
    }

    pub fn equations(&self) -> impl Iterator<Item = (&str, TermId)> {
        self.names.iter().map(|(n, id)| (n.as_str(), *id))
    }

    /// Label of a node if it corresponds to a named equation.
    pub fn label(&self, id: TermId) -> Option<&str> {
        self.labels.get(&id).map(|s| s.as_str())
    }

    pub(crate) fn set_label(&mut self, id: TermId, label: String) {
        self.labels.insert(id, label.clone());
        self.names.insert(label, id);
    }

    /// Human-readable handle for a node: its equation name when it has one,
    /// otherwise a positional one.
    pub fn describe(&self, id: TermId) -> String {
        match self.label(id) {
            Some(name) => name.to_string(),
            None => format!("#{}", id.0),
        }
    }

    /// Node ids reachable from `root` through child edges (including
    /// `root`), in a deterministic order.
    pub fn reachable(&self, root: TermId) -> Vec<TermId> {
        let mut seen = vec![false; self.nodes.len()];
        let mut order = Vec::new();
        let mut stack = vec![root];
        while let Some(id) = stack.pop() {
            if std::mem::replace(&mut seen[id.index()], true) {
                continue;
            }
            order.push(id);
            for c in self.node(id).children().into_iter().rev() {
                if !seen[c.index()] {
                    stack.push(c);
                }
            }
        }
        order.sort();
        order
    }

    /// A copy of this system containing only the nodes reachable from
    /// `root`. Keeps residual monitor state bounded by residual size.
    pub fn compact(&self, root: TermId) -> (TermSystem, TermId) {
        let reachable = self.reachable(root);
        let mut remap: HashMap<TermId, TermId> = HashMap::new();
        let mut out = TermSystem::new();
        for &old in &reachable {
            let id = out.push(TermNode::Empty);
            remap.insert(old, id);
        }
        for &old in &reachable {
            let new = remap[&old];
            let node = match self.node(old) {
                TermNode::Empty => TermNode::Empty,
                TermNode::Pattern(p) => TermNode::Pattern(p.clone()),
                TermNode::Cat(a, b) => TermNode::Cat(remap[a], remap[b]),
                TermNode::And(a, b) => TermNode::And(remap[a], remap[b]),
                TermNode::Or(a, b) => TermNode::Or(remap[a], remap[b]),
                TermNode::Shuffle(a, b) => TermNode::Shuffle(remap[a], remap[b]),
                TermNode::Let(x, t) => TermNode::Let(x.clone(), remap[t]),
            };
            out.nodes[new.index()] = node;
            if let Some(label) = self.label(old) {
                out.set_label(new, label.to_string());
            }
        }
        (out, remap[&root])
    }

    /// A compacted copy of the term rooted at `root` with identity wrappers
    /// removed: an `Empty` operand is dropped from concatenations and
    /// shuffles, binders over `Empty` disappear, and unions or
    /// intersections of two `Empty`s collapse to `Empty`. Each rewrite
    /// preserves both acceptance and the transition function, so residuals
    /// stay small over long runs instead of accreting spent branches.
    pub fn reduced(&self, root: TermId) -> (TermSystem, TermId) {
        let mut memo: HashMap<TermId, TermId> = HashMap::new();
        let mut in_progress: BTreeSet<TermId> = BTreeSet::new();
        let root = self.resolve(root, &mut memo, &mut in_progress);
        // Rebuild with every child pointed at its resolved representative,
        // then drop the now-unreachable wrappers.
        let mut rewritten = self.clone();
        let res = |id: &TermId| memo.get(id).copied().unwrap_or(*id);
        for id in self.node_ids() {
            let node = match self.node(id) {
                TermNode::Cat(a, b) => TermNode::Cat(res(a), res(b)),
                TermNode::And(a, b) => TermNode::And(res(a), res(b)),
                TermNode::Or(a, b) => TermNode::Or(res(a), res(b)),
                TermNode::Shuffle(a, b) => TermNode::Shuffle(res(a), res(b)),
                TermNode::Let(x, t) => TermNode::Let(x.clone(), res(t)),
                other => other.clone(),
            };
            rewritten.nodes[id.index()] = node;
        }
        rewritten.compact(root)
    }

    fn resolve(
        &self,
        id: TermId,
        memo: &mut HashMap<TermId, TermId>,
        in_progress: &mut BTreeSet<TermId>,
    ) -> TermId {
        if let Some(&done) = memo.get(&id) {
            return done;
        }
        if !in_progress.insert(id) {
            // Back edge of a cycle: keep the node; contractive cycles are
            // guarded, so nothing along them can vanish anyway.
            return id;
        }
        let is_empty = |sys: &TermSystem, t: TermId| matches!(sys.node(t), TermNode::Empty);
        let result = match *self.node(id) {
            TermNode::Cat(a, b) | TermNode::Shuffle(a, b) => {
                let ra = self.resolve(a, memo, in_progress);
                let rb = self.resolve(b, memo, in_progress);
                if is_empty(self, ra) {
                    rb
                } else if is_empty(self, rb) {
                    ra
                } else {
                    id
                }
            }
            TermNode::And(a, b) | TermNode::Or(a, b) => {
                let ra = self.resolve(a, memo, in_progress);
                let rb = self.resolve(b, memo, in_progress);
                if is_empty(self, ra) && is_empty(self, rb) {
                    ra
                } else {
                    id
                }
            }
            TermNode::Let(_, t) => {
                let rt = self.resolve(t, memo, in_progress);
                if is_empty(self, rt) {
                    rt
                } else {
                    id
                }
            }
            TermNode::Empty | TermNode::Pattern(_) => id,
        };
        in_progress.remove(&id);
        memo.insert(id, result);
        result
    }

    /// Renders the term rooted at `id`. Named nodes other than the root
    /// print as their equation name, which both keeps cross-references
    /// readable and terminates on cycles.
    pub fn render(&self, id: TermId) -> String {
        let mut out = String::new();
        let mut visiting = BTreeSet::new();
        visiting.insert(id);
        self.render_node(id, &mut visiting, &mut out);
        out
    }

    fn render_into(&self, id: TermId, visiting: &mut BTreeSet<TermId>, out: &mut String) {
        use std::fmt::Write;
        if visiting.contains(&id) || self.label(id).is_some() {
            // A named node or a back edge prints by name instead of
            // unfolding.
            let _ = write!(out, "{}", self.describe(id));
            return;
        }
        visiting.insert(id);
        self.render_node(id, visiting, out);
    }

    fn render_node(&self, id: TermId, visiting: &mut BTreeSet<TermId>, out: &mut String) {
        use std::fmt::Write;
        match self.node(id) {
            TermNode::Empty => out.push_str("empty"),
            TermNode::Pattern(p) => {
                let _ = write!(out, "{p}");
            }
            TermNode::Cat(a, b) => self.render_binary(*a, *b, " ", visiting, out),
            TermNode::And(a, b) => self.render_binary(*a, *b, r" /\ ", visiting, out),
            TermNode::Or(a, b) => self.render_binary(*a, *b, r" \/ ", visiting, out),
            TermNode::Shuffle(a, b) => self.render_binary(*a, *b, " | ", visiting, out),
            TermNode::Let(x, t) => {
                let _ = write!(out, "{{let {x}; ");
                self.render_into(*t, visiting, out);
                out.push('}');
            }
        }
        visiting.remove(&id);
    }

    fn render_binary(
        &self,
        a: TermId,
        b: TermId,
        op: &str,
        visiting: &mut BTreeSet<TermId>,
        out: &mut String,
    ) {
        out.push('(');
        self.render_into(a, visiting, out);
        out.push_str(op);
        self.render_into(b, visiting, out);
        out.push(')');
    }
}

impl Default for TermSystem {
    fn default() -> Self {
        TermSystem::new()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identifier_rules() {
        assert!(VarName::new("fd").is_ok());
        assert!(VarName::new("_x9").is_ok());
        assert!(VarName::new("9x").is_err());
        assert!(VarName::new("").is_err());
        assert!(VarName::new("a-b").is_err());
    }

    #[test]
    fn build_cyclic_system() {
        // t = open(fd) . t
        let sys = TermSystem::from_equations(vec![(
            "t".into(),
            TermExpr::cat(
                TermExpr::pat("open", vec![BasicDataExpr::var("fd")]),
                TermExpr::re("t"),
            ),
        )])
        .unwrap();
        let t = sys.equation("t").unwrap();
        match sys.node(t) {
            TermNode::Cat(_, rhs) => assert_eq!(*rhs, t),
            other => panic!("unexpected node {other:?}"),
        }
    }

    #[test]
    fn undefined_reference_rejected() {
        let err = TermSystem::from_equations(vec![("t".into(), TermExpr::re("missing"))])
            .unwrap_err();
        assert!(matches!(err, BuildError::UndefinedName(n) if n == "missing"));
    }

    #[test]
    fn duplicate_equation_rejected() {
        let err = TermSystem::from_equations(vec![
            ("t".into(), TermExpr::Empty),
            ("t".into(), TermExpr::Empty),
        ])
        .unwrap_err();
        assert!(matches!(err, BuildError::DuplicateEquation(_)));
    }

    #[test]
    fn compact_drops_unreachable() {
        let mut sys = TermSystem::single(TermExpr::Empty);
        let root = sys.equation("Main").unwrap();
        sys.push(TermNode::Pattern(EventPattern::new("junk", vec![])));
        let (compacted, new_root) = sys.compact(root);
        assert_eq!(compacted.len(), 1);
        assert_eq!(compacted.node(new_root), &TermNode::Empty);
    }

    #[test]
    fn render_cycle_uses_name() {
        let sys = TermSystem::from_equations(vec![(
            "t".into(),
            TermExpr::cat(TermExpr::pat0("a"), TermExpr::re("t")),
        )])
        .unwrap();
        let t = sys.equation("t").unwrap();
        assert_eq!(sys.render(t), "(a() t)");
    }
}
