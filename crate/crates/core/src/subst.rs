//! Substitutions: finite partial maps from variables to data values, their
//! merge operation, and their application to patterns and to (possibly
//! cyclic) terms.

use std::collections::btree_map::Entry;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::analysis::free_vars_all;
use crate::data::DataValue;
use crate::terms::{BasicDataExpr, EventPattern, TermId, TermNode, TermSystem, VarName};

/// A finite partial map from variables to data values.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Substitution {
    bindings: BTreeMap<VarName, DataValue>,
}

/// Merge failure: the two substitutions disagree on a shared variable.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("conflicting bindings for {var}: {left} vs {right}")]
pub struct MergeConflict {
    pub var: VarName,
    pub left: DataValue,
    pub right: DataValue,
}

impl Substitution {
    pub fn empty() -> Substitution {
        Substitution::default()
    }

    pub fn singleton(x: VarName, v: DataValue) -> Substitution {
        let mut bindings = BTreeMap::new();
        bindings.insert(x, v);
        Substitution { bindings }
    }

    pub fn from_pairs<I>(pairs: I) -> Substitution
    where
        I: IntoIterator<Item = (VarName, DataValue)>,
    {
        Substitution {
            bindings: pairs.into_iter().collect(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.bindings.is_empty()
    }

    pub fn len(&self) -> usize {
        self.bindings.len()
    }

    pub fn get(&self, x: &VarName) -> Option<&DataValue> {
        self.bindings.get(x)
    }

    pub fn domain(&self) -> BTreeSet<VarName> {
        self.bindings.keys().cloned().collect()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&VarName, &DataValue)> {
        self.bindings.iter()
    }

    /// Adds a binding, failing if `x` is already bound to a different value.
    pub fn bind(&mut self, x: VarName, v: DataValue) -> Result<(), MergeConflict> {
        match self.bindings.entry(x) {
            Entry::Vacant(slot) => {
                slot.insert(v);
                Ok(())
            }
            Entry::Occupied(slot) => {
                if *slot.get() == v {
                    Ok(())
                } else {
                    Err(MergeConflict {
                        var: slot.key().clone(),
                        left: slot.get().clone(),
                        right: v,
                    })
                }
            }
        }
    }

    /// The union of two substitutions when they coincide on shared
    /// variables; a conflict otherwise. Conflict is a value-level outcome,
    /// not a failure.
    pub fn merge(&self, other: &Substitution) -> Result<Substitution, MergeConflict> {
        let mut out = self.clone();
        for (x, v) in other.iter() {
            out.bind(x.clone(), v.clone())?;
        }
        Ok(out)
    }

    /// Restriction of the domain to `{x}`.
    pub fn restricted_to(&self, x: &VarName) -> Substitution {
        match self.bindings.get(x) {
            Some(v) => Substitution::singleton(x.clone(), v.clone()),
            None => Substitution::empty(),
        }
    }

    /// Restriction of the domain to the given set.
    pub fn restricted(&self, vars: &BTreeSet<VarName>) -> Substitution {
        Substitution {
            bindings: self
                .bindings
                .iter()
                .filter(|(x, _)| vars.contains(*x))
                .map(|(x, v)| (x.clone(), v.clone()))
                .collect(),
        }
    }

    /// Removal of `x` from the domain.
    pub fn without(&self, x: &VarName) -> Substitution {
        let mut bindings = self.bindings.clone();
        bindings.remove(x);
        Substitution { bindings }
    }

    /// Deterministic canonical rendering, usable as a memo key.
    pub fn canonical(&self) -> String {
        let mut out = String::new();
        for (i, (x, v)) in self.bindings.iter().enumerate() {
            if i > 0 {
                out.push(',');
            }
            out.push_str(x.as_str());
            out.push('=');
            out.push_str(&v.to_string());
        }
        out
    }
}

impl fmt::Display for Substitution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{{}}}", self.canonical())
    }
}

/// Applies a substitution to an argument expression: bound variables become
/// literals, everything else is rebuilt unchanged.
pub fn apply_to_expr(subst: &Substitution, expr: &BasicDataExpr) -> BasicDataExpr {
    match expr {
        BasicDataExpr::Var(x) => match subst.get(x) {
            Some(v) => BasicDataExpr::Lit(v.clone()),
            None => expr.clone(),
        },
        BasicDataExpr::Lit(_) => expr.clone(),
        BasicDataExpr::Object(fields) => BasicDataExpr::Object(
            fields
                .iter()
                .map(|(k, e)| (k.clone(), apply_to_expr(subst, e)))
                .collect(),
        ),
        BasicDataExpr::Array(items) => {
            BasicDataExpr::Array(items.iter().map(|e| apply_to_expr(subst, e)).collect())
        }
    }
}

/// Applies a substitution argument-wise to a pattern.
pub fn apply_to_pattern(subst: &Substitution, pattern: &EventPattern) -> EventPattern {
    EventPattern {
        type_name: pattern.type_name.clone(),
        args: pattern
            .args
            .iter()
            .map(|a| apply_to_expr(subst, a))
            .collect(),
    }
}

/// Applies a substitution to the term rooted at `t`, extending the system
/// with the substituted copies and returning the new root.
///
/// Cyclicity is preserved by memoizing on `(node, subst restricted to the
/// node's free variables)`: revisiting the same pair yields the
/// already-created node. When the restricted substitution is empty the
/// original node is reused unchanged, so the empty substitution is the
/// identity and node identity is preserved outside the affected region.
pub fn apply_subst(sys: &TermSystem, t: TermId, subst: &Substitution) -> (TermSystem, TermId) {
    let mut out = sys.clone();
    let root = apply_subst_in_place(&mut out, t, subst);
    (out, root)
}

/// In-place variant of [`apply_subst`], used by the interpreter to avoid
/// cloning the system between consecutive steps.
pub fn apply_subst_in_place(
    sys: &mut TermSystem,
    t: TermId,
    subst: &Substitution,
) -> TermId {
    if subst.is_empty() {
        return t;
    }
    let fv = free_vars_all(sys);
    go(sys, t, subst, &fv)
}

fn go(
    sys: &mut TermSystem,
    t: TermId,
    subst: &Substitution,
    fv: &[BTreeSet<VarName>],
) -> TermId {
    let restricted = subst.restricted(&fv[t.index()]);
    if restricted.is_empty() {
        return t;
    }
    let key = (t, restricted.canonical());
    if let Some(&done) = sys.subst_memo.get(&key) {
        return done;
    }
    // Reserve the slot before recursing so back edges close the cycle.
    let fresh = sys.push(TermNode::Empty);
    sys.subst_memo.insert(key, fresh);
    if let Some(base) = sys.label(t).map(str::to_string) {
        // Derived names keep repeated runs reproducible and diagnostics
        // readable.
        let derived = format!("{base}[{}]", restricted.canonical());
        if sys.equation(&derived).is_none() {
            sys.set_label(fresh, derived);
        }
    }
    let node = match sys.node(t).clone() {
        TermNode::Empty => TermNode::Empty,
        TermNode::Pattern(p) => TermNode::Pattern(apply_to_pattern(&restricted, &p)),
        TermNode::Cat(a, b) => TermNode::Cat(go(sys, a, &restricted, fv), go(sys, b, &restricted, fv)),
        TermNode::And(a, b) => TermNode::And(go(sys, a, &restricted, fv), go(sys, b, &restricted, fv)),
        TermNode::Or(a, b) => TermNode::Or(go(sys, a, &restricted, fv), go(sys, b, &restricted, fv)),
        TermNode::Shuffle(a, b) => {
            TermNode::Shuffle(go(sys, a, &restricted, fv), go(sys, b, &restricted, fv))
        }
        TermNode::Let(x, body) => {
            let inner = restricted.without(&x);
            TermNode::Let(x, go(sys, body, &inner, fv))
        }
    };
    sys.set_node(fresh, node);
    fresh
}
