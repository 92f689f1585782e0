//! Sets of instantiated event traces and the composition operators over
//! them, plus bounded enumeration of a term's trace set.
//!
//! An instantiated trace couples the events with the substitution
//! accumulated while matching them. Sets are bounded by a *horizon*: the
//! length up to which membership is complete. Alongside its completed
//! members, each set tracks its *viable prefixes* — the traces a monitor
//! for the originating term would survive. The left-preferential operators
//! consult viable prefixes (not completed members) to decide whether the
//! left operand claims an event: a branch can be alive at an event without
//! any completed member witnessing it (dead or not-yet-completed
//! continuations), and using completed members there diverges from the
//! operational behavior.

use std::collections::BTreeSet;

use crate::analysis::accepts_empty_all;
use crate::data::EventValue;
use crate::events::EventTypeDecls;
use crate::interp::{step_in_place, StepError, StepOutcome};
use crate::subst::{apply_subst_in_place, Substitution};
use crate::terms::{TermId, TermSystem, VarName};

/// A finite event trace paired with the substitution its matching computed.
pub type InstTrace = (Vec<EventValue>, Substitution);

/// A finite, horizon-bounded set of instantiated traces together with the
/// viable prefixes of the originating term.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InstTraceSet {
    items: BTreeSet<InstTrace>,
    prefixes: BTreeSet<Vec<EventValue>>,
    horizon: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
#[error("concatenation needs at least horizon 1 to decide continuations")]
pub struct HorizonUnderflow;

impl InstTraceSet {
    /// Builds a set from explicit members. The viable prefixes default to
    /// the prefix closure of the members, which is exact when the members
    /// are the complete language of the originating term up to the
    /// horizon.
    pub fn from_members(
        horizon: usize,
        members: impl IntoIterator<Item = InstTrace>,
    ) -> InstTraceSet {
        let items: BTreeSet<InstTrace> = members.into_iter().collect();
        let mut prefixes = BTreeSet::new();
        for (trace, _) in &items {
            for n in 0..=trace.len() {
                prefixes.insert(trace[..n].to_vec());
            }
        }
        InstTraceSet {
            items,
            prefixes,
            horizon,
        }
    }

    pub fn items(&self) -> &BTreeSet<InstTrace> {
        &self.items
    }

    pub fn prefixes(&self) -> &BTreeSet<Vec<EventValue>> {
        &self.prefixes
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    /// Whether a monitor for the originating term would survive `trace`.
    pub fn is_viable_prefix(&self, trace: &[EventValue]) -> bool {
        self.prefixes.contains(trace)
    }

    /// Members with traces no longer than `n`.
    pub fn members_up_to(&self, n: usize) -> BTreeSet<InstTrace> {
        self.items
            .iter()
            .filter(|(t, _)| t.len() <= n)
            .cloned()
            .collect()
    }
}

/// Bounded enumeration of the trace set of the term rooted at `t`:
/// breadth-first exploration of the step function over `alphabet` up to
/// length `horizon`. A branch contributes a member iff its residual accepts
/// the empty trace; every surviving branch contributes a viable prefix.
/// The member substitution is the union of the per-step substitutions,
/// whose domains are disjoint because each step instantiates its variables
/// in the residual.
pub fn enumerate(
    sys: &TermSystem,
    t: TermId,
    decls: &EventTypeDecls,
    alphabet: &[EventValue],
    horizon: usize,
) -> Result<InstTraceSet, StepError> {
    let mut items = BTreeSet::new();
    let mut prefixes = BTreeSet::new();
    // Each frontier entry owns its system: steps extend the arena, and
    // sibling branches must not see each other's nodes.
    let (sys0, t0) = sys.compact(t);
    let mut frontier: Vec<(TermSystem, TermId, Vec<EventValue>, Substitution)> =
        vec![(sys0, t0, Vec::new(), Substitution::empty())];
    while let Some((cur_sys, cur, trace, total)) = frontier.pop() {
        prefixes.insert(trace.clone());
        if accepts_empty_all(&cur_sys)[cur.index()] {
            items.insert((trace.clone(), total.clone()));
        }
        if trace.len() == horizon {
            continue;
        }
        for e in alphabet {
            let mut branch = cur_sys.clone();
            match step_in_place(&mut branch, cur, e, decls)? {
                StepOutcome::Stepped { next, subst } => {
                    let next = apply_subst_in_place(&mut branch, next, &subst);
                    let (branch, next) = branch.reduced(next);
                    let total = total
                        .merge(&subst)
                        .expect("per-step substitution domains are disjoint");
                    let mut trace = trace.clone();
                    trace.push(e.clone());
                    frontier.push((branch, next, trace, total));
                }
                StepOutcome::NoStep => {}
            }
        }
    }
    Ok(InstTraceSet {
        items,
        prefixes,
        horizon,
    })
}

fn check_horizons(a: &InstTraceSet, b: &InstTraceSet) -> usize {
    debug_assert_eq!(a.horizon, b.horizon, "operands must share a horizon");
    a.horizon.min(b.horizon)
}

/// Left-preferential union: everything from the left set, plus the right
/// members whose first event the left operand would not claim.
pub fn lp_union(s1: &InstTraceSet, s2: &InstTraceSet) -> InstTraceSet {
    let horizon = check_horizons(s1, s2);
    let left_claims = |trace: &[EventValue]| -> bool {
        !trace.is_empty() && s1.is_viable_prefix(&trace[..1])
    };
    let mut items = s1.items.clone();
    items.extend(s2.items.iter().filter(|(t, _)| !left_claims(t)).cloned());
    let mut prefixes = s1.prefixes.clone();
    prefixes.extend(s2.prefixes.iter().filter(|p| !left_claims(p)).cloned());
    InstTraceSet {
        items,
        prefixes,
        horizon,
    }
}

/// Left-preferential concatenation. A pair contributes when the
/// substitutions merge and the left operand would not consume the first
/// event of the right trace itself. Deciding that requires prefix
/// knowledge one event deeper than the joint trace, so the result is
/// complete only to horizon − 1.
pub fn lp_concat(
    s1: &InstTraceSet,
    s2: &InstTraceSet,
) -> Result<InstTraceSet, HorizonUnderflow> {
    let horizon = check_horizons(s1, s2);
    if horizon == 0 {
        return Err(HorizonUnderflow);
    }
    let new_horizon = horizon - 1;
    // `head` must not be extendable by `e` on the left side. The check is
    // only decidable while |head| + 1 is within the prefix horizon.
    let may_continue = |head: &[EventValue], tail: &[EventValue]| -> bool {
        match tail.first() {
            None => true,
            Some(e) => {
                let mut extended = head.to_vec();
                extended.push(e.clone());
                !s1.prefixes.contains(&extended)
            }
        }
    };
    let mut items = BTreeSet::new();
    for (e1, sig1) in &s1.items {
        if e1.len() > new_horizon {
            continue;
        }
        for (e2, sig2) in &s2.items {
            if !may_continue(e1, e2) {
                continue;
            }
            if let Ok(sigma) = sig1.merge(sig2) {
                let mut joint = e1.clone();
                joint.extend(e2.iter().cloned());
                items.insert((joint, sigma));
            }
        }
    }
    // A viable prefix either sits inside the left operand, or is a
    // completed left member followed by a viable right prefix the left
    // would not claim.
    let mut prefixes: BTreeSet<Vec<EventValue>> =
        s1.prefixes.iter().filter(|p| p.len() <= new_horizon).cloned().collect();
    for (e1, _) in &s1.items {
        if e1.len() > new_horizon {
            continue;
        }
        for p2 in &s2.prefixes {
            if p2.is_empty() || !may_continue(e1, p2) {
                continue;
            }
            let mut joint = e1.clone();
            joint.extend(p2.iter().cloned());
            prefixes.insert(joint);
        }
    }
    for (t, _) in &items {
        for n in 0..=t.len() {
            prefixes.insert(t[..n].to_vec());
        }
    }
    Ok(InstTraceSet {
        items,
        prefixes,
        horizon: new_horizon,
    })
}

/// Intersection: common traces with merged substitutions.
pub fn inter(s1: &InstTraceSet, s2: &InstTraceSet) -> InstTraceSet {
    let horizon = check_horizons(s1, s2);
    let mut items = BTreeSet::new();
    for (e1, sig1) in &s1.items {
        for (e2, sig2) in &s2.items {
            if e1 == e2 {
                if let Ok(sigma) = sig1.merge(sig2) {
                    items.insert((e1.clone(), sigma));
                }
            }
        }
    }
    let prefixes = s1.prefixes.intersection(&s2.prefixes).cloned().collect();
    InstTraceSet {
        items,
        prefixes,
        horizon,
    }
}

/// Left-preferential shuffle of sets: interleavings of member pairs where
/// a right event may overtake pending left events only if appending it to
/// the already-consumed left prefix is not viable on the left side. The
/// exclusion is keyed on the consumed prefix rather than on a bare
/// position, mirroring how the operational monitor decides precedence from
/// its actual left residual.
pub fn lp_shuffle_sets(s1: &InstTraceSet, s2: &InstTraceSet) -> InstTraceSet {
    let horizon = check_horizons(s1, s2);
    let mut items = BTreeSet::new();
    for (e1, sig1) in &s1.items {
        for (e2, sig2) in &s2.items {
            let Ok(sigma) = sig1.merge(sig2) else { continue };
            for trace in interleave_against(e1, e2, &s1.prefixes) {
                items.insert((trace, sigma.clone()));
            }
        }
    }
    // Partial interleavings of viable prefixes are exactly the survivable
    // states of the composite monitor.
    let mut prefixes = BTreeSet::new();
    for p1 in &s1.prefixes {
        for p2 in &s2.prefixes {
            if p1.len() + p2.len() > horizon {
                continue;
            }
            prefixes.extend(interleave_against(p1, p2, &s1.prefixes));
        }
    }
    for (t, _) in &items {
        for n in 0..=t.len() {
            prefixes.insert(t[..n].to_vec());
        }
    }
    InstTraceSet {
        items,
        prefixes,
        horizon,
    }
}

/// Interleavings of `u` and `v` where a right event may move ahead of
/// pending left events only if the left prefix extended by it is not in
/// `left_viable`.
fn interleave_against(
    u: &[EventValue],
    v: &[EventValue],
    left_viable: &BTreeSet<Vec<EventValue>>,
) -> BTreeSet<Vec<EventValue>> {
    let mut out = BTreeSet::new();
    let mut acc = Vec::with_capacity(u.len() + v.len());
    go(u, v, 0, 0, &mut acc, left_viable, &mut out);
    return out;

    fn go(
        u: &[EventValue],
        v: &[EventValue],
        i: usize,
        j: usize,
        acc: &mut Vec<EventValue>,
        left_viable: &BTreeSet<Vec<EventValue>>,
        out: &mut BTreeSet<Vec<EventValue>>,
    ) {
        if i == u.len() && j == v.len() {
            out.insert(acc.clone());
            return;
        }
        if i < u.len() {
            acc.push(u[i].clone());
            go(u, v, i + 1, j, acc, left_viable, out);
            acc.pop();
        }
        if j < v.len() {
            // The exclusion applies even with the left member exhausted:
            // the left residual still claims the event whenever the
            // consumed left prefix extends by it within the left set.
            let allowed = {
                let mut extended = u[..i].to_vec();
                extended.push(v[j].clone());
                !left_viable.contains(&extended)
            };
            if allowed {
                acc.push(v[j].clone());
                go(u, v, i, j + 1, acc, left_viable, out);
                acc.pop();
            }
        }
    }
}

/// Variable deletion: removes `x` from every member's substitution,
/// deduplicating collapsed members.
pub fn del_var(s: &InstTraceSet, x: &VarName) -> InstTraceSet {
    InstTraceSet {
        items: s
            .items
            .iter()
            .map(|(t, sigma)| (t.clone(), sigma.without(x)))
            .collect(),
        prefixes: s.prefixes.clone(),
        horizon: s.horizon,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::DataValue;
    use crate::events::{close_event, file_descriptor_decls, open_event, EventTypeDecl};
    use crate::terms::{BasicDataExpr, TermExpr};

    fn var(name: &str) -> VarName {
        VarName::new(name).unwrap()
    }

    /// Symbolic single-field events for operator-level tests.
    fn ev(name: &str) -> EventValue {
        EventValue::from_fields([("id".to_string(), DataValue::str(name))])
    }

    fn tr(names: &[&str]) -> Vec<EventValue> {
        names.iter().map(|n| ev(n)).collect()
    }

    fn plain(horizon: usize, traces: &[&[&str]]) -> InstTraceSet {
        InstTraceSet::from_members(
            horizon,
            traces
                .iter()
                .map(|t| (tr(t), Substitution::empty())),
        )
    }

    /// Declarations and alphabet for two zero-parameter event types.
    fn ab_world() -> (EventTypeDecls, Vec<EventValue>) {
        let a = EventTypeDecl::new("a", vec![], BasicDataExpr::Object(vec![(
            "id".into(),
            BasicDataExpr::str("a"),
        )]))
        .unwrap();
        let b = EventTypeDecl::new("b", vec![], BasicDataExpr::Object(vec![(
            "id".into(),
            BasicDataExpr::str("b"),
        )]))
        .unwrap();
        (
            EventTypeDecls::from_decls([a, b]).unwrap(),
            vec![ev("a"), ev("b")],
        )
    }

    #[test]
    fn enumerate_optional_concat() {
        // (a \/ empty) ((a b) \/ empty) accepts exactly {λ, a, aab}.
        let (decls, alphabet) = ab_world();
        let sys = TermSystem::single(TermExpr::cat(
            TermExpr::or(TermExpr::pat0("a"), TermExpr::Empty),
            TermExpr::or(
                TermExpr::cat(TermExpr::pat0("a"), TermExpr::pat0("b")),
                TermExpr::Empty,
            ),
        ));
        let t = sys.equation("Main").unwrap();
        let s = enumerate(&sys, t, &decls, &alphabet, 3).unwrap();
        let expected: BTreeSet<InstTrace> = [
            (tr(&[]), Substitution::empty()),
            (tr(&["a"]), Substitution::empty()),
            (tr(&["a", "a", "b"]), Substitution::empty()),
        ]
        .into_iter()
        .collect();
        assert_eq!(s.items(), &expected);
        // ab is not accepted: after one a the head branch is committed.
        assert!(!s.items().contains(&(tr(&["a", "b"]), Substitution::empty())));
    }

    #[test]
    fn enumerate_empty_term() {
        let (decls, alphabet) = ab_world();
        let sys = TermSystem::single(TermExpr::Empty);
        let t = sys.equation("Main").unwrap();
        let s = enumerate(&sys, t, &decls, &alphabet, 4).unwrap();
        assert_eq!(s.len(), 1);
        assert!(s.items().contains(&(tr(&[]), Substitution::empty())));
    }

    #[test]
    fn enumerate_binder_couples_descriptor() {
        // {let fd; open(fd) close(fd)}: matching opens and closes pair up,
        // and the binder keeps fd out of the reported substitution.
        let decls = file_descriptor_decls();
        let alphabet = vec![open_event(42), open_event(17), close_event(42), close_event(17)];
        let sys = TermSystem::single(TermExpr::let_(
            "fd",
            TermExpr::cat(
                TermExpr::pat("open", vec![BasicDataExpr::var("fd")]),
                TermExpr::pat("close", vec![BasicDataExpr::var("fd")]),
            ),
        ));
        let t = sys.equation("Main").unwrap();
        let s = enumerate(&sys, t, &decls, &alphabet, 2).unwrap();
        let expected: BTreeSet<InstTrace> = [
            (vec![open_event(42), close_event(42)], Substitution::empty()),
            (vec![open_event(17), close_event(17)], Substitution::empty()),
        ]
        .into_iter()
        .collect();
        assert_eq!(s.items(), &expected);
    }

    #[test]
    fn enumerate_monotone_in_horizon() {
        let (decls, alphabet) = ab_world();
        // Main = (a b Main) \/ empty
        let sys = TermSystem::from_equations(vec![(
            "Main".into(),
            TermExpr::or(
                TermExpr::cat(
                    TermExpr::pat0("a"),
                    TermExpr::cat(TermExpr::pat0("b"), TermExpr::re("Main")),
                ),
                TermExpr::Empty,
            ),
        )])
        .unwrap();
        let t = sys.equation("Main").unwrap();
        let small = enumerate(&sys, t, &decls, &alphabet, 3).unwrap();
        let large = enumerate(&sys, t, &decls, &alphabet, 4).unwrap();
        assert_eq!(small.items(), &large.members_up_to(3));
    }

    #[test]
    fn union_drops_claimed_right_members() {
        let s1 = plain(3, &[&["a"]]);
        let s2 = plain(3, &[&[], &["b"], &["a", "b"]]);
        let out = lp_union(&s1, &s2);
        assert_eq!(
            out.items(),
            plain(3, &[&["a"], &[], &["b"]]).items()
        );
    }

    #[test]
    fn union_with_empty_identity() {
        let s = plain(3, &[&["a"], &["b", "a"]]);
        let none = plain(3, &[]);
        assert_eq!(lp_union(&none, &s).items(), s.items());
        assert_eq!(lp_union(&s, &none).items(), s.items());
    }

    #[test]
    fn concat_prefers_left_continuation() {
        // {λ, a} · {λ, ab} = {λ, a, aab}: a·(ab) is blocked because after
        // consuming a, the left set could itself continue with a? No — the
        // left set {λ,a} extends λ with a, so ab may not start after λ.
        let s1 = plain(3, &[&[], &["a"]]);
        let s2 = plain(3, &[&[], &["a", "b"]]);
        let out = lp_concat(&s1, &s2).unwrap();
        assert_eq!(out.horizon(), 2);
        assert_eq!(
            out.items(),
            plain(2, &[&[], &["a"], &["a", "a", "b"]]).items()
        );
    }

    #[test]
    fn concat_identity_and_conflict() {
        let s = plain(3, &[&["b"], &["b", "a"]]);
        let unit = plain(3, &[&[]]);
        assert_eq!(lp_concat(&unit, &s).unwrap().items(), s.items());
        let left = InstTraceSet::from_members(
            3,
            [(tr(&["a"]), Substitution::singleton(var("x"), DataValue::int(1)))],
        );
        let right = InstTraceSet::from_members(
            3,
            [(tr(&["b"]), Substitution::singleton(var("x"), DataValue::int(2)))],
        );
        assert!(lp_concat(&left, &right).unwrap().is_empty());
    }

    #[test]
    fn concat_requires_positive_horizon() {
        let s = plain(0, &[&[]]);
        assert_eq!(lp_concat(&s, &s), Err(HorizonUnderflow));
    }

    #[test]
    fn inter_merges_and_rejects() {
        let e = tr(&["a"]);
        let s1 = InstTraceSet::from_members(
            2,
            [(e.clone(), Substitution::singleton(var("x"), DataValue::int(1)))],
        );
        let s2 = InstTraceSet::from_members(
            2,
            [(e.clone(), Substitution::singleton(var("y"), DataValue::int(2)))],
        );
        let merged = inter(&s1, &s2);
        assert_eq!(merged.len(), 1);
        let (_, sigma) = merged.items().iter().next().unwrap();
        assert_eq!(sigma.get(&var("x")), Some(&DataValue::int(1)));
        assert_eq!(sigma.get(&var("y")), Some(&DataValue::int(2)));
        let s3 = InstTraceSet::from_members(
            2,
            [(e, Substitution::singleton(var("x"), DataValue::int(2)))],
        );
        assert!(inter(&s1, &s3).is_empty());
    }

    #[test]
    fn shuffle_sets_paper_exclusion() {
        // Left {12, 34} with right {15}: taking right 1 first is blocked
        // because the left side could start with 1.
        let s1 = plain(4, &[&["1", "2"], &["3", "4"]]);
        let s2 = plain(4, &[&["1", "5"]]);
        let out = lp_shuffle_sets(&s1, &s2);
        let expected = plain(
            4,
            &[
                &["1", "2", "1", "5"],
                &["1", "1", "2", "5"],
                &["1", "1", "5", "2"],
                &["3", "4", "1", "5"],
                &["3", "1", "4", "5"],
                &["3", "1", "5", "4"],
            ],
        );
        assert_eq!(out.items(), expected.items());
    }

    #[test]
    fn shuffle_sets_identity_and_conflict() {
        let s = plain(3, &[&["a", "b"]]);
        let unit = plain(3, &[&[]]);
        assert_eq!(lp_shuffle_sets(&unit, &s).items(), s.items());
        let left = InstTraceSet::from_members(
            3,
            [(tr(&["a"]), Substitution::singleton(var("x"), DataValue::int(1)))],
        );
        let right = InstTraceSet::from_members(
            3,
            [(tr(&["b"]), Substitution::singleton(var("x"), DataValue::int(2)))],
        );
        assert!(lp_shuffle_sets(&left, &right).is_empty());
    }

    #[test]
    fn del_var_projects_and_collapses() {
        let e = tr(&["a"]);
        let s = InstTraceSet::from_members(
            2,
            [
                (
                    e.clone(),
                    Substitution::from_pairs([
                        (var("x"), DataValue::int(1)),
                        (var("y"), DataValue::int(2)),
                    ]),
                ),
                (e.clone(), Substitution::singleton(var("x"), DataValue::int(3))),
            ],
        );
        let out = del_var(&s, &var("x"));
        let expected: BTreeSet<InstTrace> = [
            (e.clone(), Substitution::singleton(var("y"), DataValue::int(2))),
            (e, Substitution::empty()),
        ]
        .into_iter()
        .collect();
        assert_eq!(out.items(), &expected);
        // Deleting an absent variable is a no-op.
        assert_eq!(del_var(&out, &var("z")).items(), &expected);
    }
}
