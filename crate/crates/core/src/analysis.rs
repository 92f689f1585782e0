//! Least-fixpoint analyses over the (possibly cyclic) term graph: free
//! variables, sub-term occurrences, empty-trace acceptance, and the
//! contractivity check.
//!
//! All three fixpoints are computed by Kleene iteration from the bottom
//! element (all-empty / all-false), which yields the least solution on a
//! finite graph and converges in at most |nodes| * |vars| rounds.

use std::collections::{BTreeSet, HashSet};

use crate::terms::{TermId, TermNode, TermSystem, VarName};

/// Free variables of every node in the system, as the least solution of the
/// per-node equations: patterns contribute their own variables, binary nodes
/// take unions, `let x` removes `x`.
pub fn free_vars_all(sys: &TermSystem) -> Vec<BTreeSet<VarName>> {
    let mut sets: Vec<BTreeSet<VarName>> = vec![BTreeSet::new(); sys.len()];
    loop {
        let mut changed = false;
        for id in sys.node_ids() {
            let next = match sys.node(id) {
                TermNode::Empty => BTreeSet::new(),
                TermNode::Pattern(p) => p.free_vars(),
                TermNode::Cat(a, b)
                | TermNode::And(a, b)
                | TermNode::Or(a, b)
                | TermNode::Shuffle(a, b) => {
                    let mut s = sets[a.index()].clone();
                    s.extend(sets[b.index()].iter().cloned());
                    s
                }
                TermNode::Let(x, t) => {
                    let mut s = sets[t.index()].clone();
                    s.remove(x);
                    s
                }
            };
            if next != sets[id.index()] {
                sets[id.index()] = next;
                changed = true;
            }
        }
        if !changed {
            return sets;
        }
    }
}

/// Free variables of the term rooted at `t`.
pub fn free_vars(sys: &TermSystem, t: TermId) -> BTreeSet<VarName> {
    free_vars_all(sys)[t.index()].clone()
}

/// The least set of sub-term occurrences of `t`: direct structural children
/// of every node in the set, closed under the same clauses. Leaves
/// contribute nothing.
pub fn part_of(sys: &TermSystem, t: TermId) -> BTreeSet<TermId> {
    let mut out: BTreeSet<TermId> = BTreeSet::new();
    let mut frontier: Vec<TermId> = sys.node(t).children();
    while let Some(id) = frontier.pop() {
        if out.insert(id) {
            frontier.extend(sys.node(id).children());
        }
    }
    out
}

/// Whether the term rooted at `t` is cyclic: some sub-term occurs within
/// itself.
pub fn is_cyclic(sys: &TermSystem, t: TermId) -> bool {
    part_of(sys, t)
        .iter()
        .any(|&t2| part_of(sys, t2).contains(&t2))
}

/// Empty-trace acceptance for every node, as a least fixpoint: the empty
/// term accepts; concatenation, intersection and shuffle need both children;
/// union needs either; `let` follows its body; patterns never accept.
pub fn accepts_empty_all(sys: &TermSystem) -> Vec<bool> {
    let mut nullable = vec![false; sys.len()];
    loop {
        let mut changed = false;
        for id in sys.node_ids() {
            let next = match sys.node(id) {
                TermNode::Empty => true,
                TermNode::Pattern(_) => false,
                TermNode::Cat(a, b) | TermNode::And(a, b) | TermNode::Shuffle(a, b) => {
                    nullable[a.index()] && nullable[b.index()]
                }
                TermNode::Or(a, b) => nullable[a.index()] || nullable[b.index()],
                TermNode::Let(_, t) => nullable[t.index()],
            };
            if next && !nullable[id.index()] {
                nullable[id.index()] = true;
                changed = true;
            }
        }
        if !changed {
            return nullable;
        }
    }
}

/// Whether the term rooted at `t` accepts the empty trace.
pub fn accepts_empty(sys: &TermSystem, t: TermId) -> bool {
    accepts_empty_all(sys)[t.index()]
}

/// Outcome of the contractivity check. On failure, names one offending
/// cycle.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Contractivity {
    Contractive,
    NotContractive { cycle: Vec<String> },
}

impl Contractivity {
    pub fn is_contractive(&self) -> bool {
        matches!(self, Contractivity::Contractive)
    }
}

/// Checks that every cycle reachable from `t` passes through at least one
/// guard edge: the edge from a concatenation into its right child whose left
/// child cannot accept the empty trace. Equivalently: the sub-graph of
/// unguarded edges is acyclic.
pub fn check_contractive(sys: &TermSystem, t: TermId) -> Contractivity {
    let nullable = accepts_empty_all(sys);
    let reachable = sys.reachable(t);
    let in_scope: HashSet<TermId> = reachable.iter().copied().collect();

    let unguarded_children = |id: TermId| -> Vec<TermId> {
        match sys.node(id) {
            TermNode::Empty | TermNode::Pattern(_) => vec![],
            TermNode::Cat(a, b) => {
                if nullable[a.index()] {
                    vec![*a, *b]
                } else {
                    // Right edge is guarded: an event must be consumed by the
                    // left operand before control can reach the right one.
                    vec![*a]
                }
            }
            TermNode::And(a, b) | TermNode::Or(a, b) | TermNode::Shuffle(a, b) => {
                vec![*a, *b]
            }
            TermNode::Let(_, body) => vec![*body],
        }
    };

    // DFS cycle detection on the unguarded-edge sub-graph.
    #[derive(Clone, Copy, PartialEq)]
    enum Mark {
        White,
        Grey,
        Black,
    }
    let mut marks = vec![Mark::White; sys.len()];
    for &start in &reachable {
        if marks[start.index()] != Mark::White {
            continue;
        }
        // Iterative DFS keeping the grey path for diagnostics.
        let mut path: Vec<(TermId, Vec<TermId>)> =
            vec![(start, unguarded_children(start))];
        marks[start.index()] = Mark::Grey;
        while let Some((id, pending)) = path.last_mut() {
            let id = *id;
            match pending.pop() {
                None => {
                    marks[id.index()] = Mark::Black;
                    path.pop();
                }
                Some(child) if in_scope.contains(&child) => match marks[child.index()] {
                    Mark::Grey => {
                        // Found an unguarded cycle: report the path from the
                        // first occurrence of `child` onward.
                        let mut cycle: Vec<String> = path
                            .iter()
                            .map(|(n, _)| *n)
                            .skip_while(|n| *n != child)
                            .map(|n| sys.describe(n))
                            .collect();
                        cycle.push(sys.describe(child));
                        return Contractivity::NotContractive { cycle };
                    }
                    Mark::White => {
                        marks[child.index()] = Mark::Grey;
                        let grand = unguarded_children(child);
                        path.push((child, grand));
                    }
                    Mark::Black => {}
                },
                Some(_) => {}
            }
        }
    }
    Contractivity::Contractive
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::terms::{BasicDataExpr, TermExpr};

    fn open_fd() -> TermExpr {
        TermExpr::pat("open", vec![BasicDataExpr::var("fd")])
    }

    fn close_fd() -> TermExpr {
        TermExpr::pat("close", vec![BasicDataExpr::var("fd")])
    }

    fn var(name: &str) -> VarName {
        VarName::new(name).unwrap()
    }

    #[test]
    fn free_vars_of_simple_cycle() {
        // t = open(fd) . t has least solution {fd} of S = {fd} u S.
        let sys = TermSystem::from_equations(vec![(
            "t".into(),
            TermExpr::cat(open_fd(), TermExpr::re("t")),
        )])
        .unwrap();
        let t = sys.equation("t").unwrap();
        let fv = free_vars(&sys, t);
        assert_eq!(fv, BTreeSet::from([var("fd")]));
    }

    #[test]
    fn free_vars_of_empty() {
        let sys = TermSystem::single(TermExpr::Empty);
        assert!(free_vars(&sys, sys.equation("Main").unwrap()).is_empty());
    }

    #[test]
    fn free_vars_closed_by_let() {
        // t = {let fd; open(fd) . close(fd) . t} -> {}
        let sys = TermSystem::from_equations(vec![(
            "t".into(),
            TermExpr::let_(
                "fd",
                TermExpr::cat(open_fd(), TermExpr::cat(close_fd(), TermExpr::re("t"))),
            ),
        )])
        .unwrap();
        let t = sys.equation("t").unwrap();
        assert!(free_vars(&sys, t).is_empty());
    }

    #[test]
    fn free_vars_is_a_fixpoint() {
        // One extra iteration over the computed solution changes nothing.
        let sys = TermSystem::from_equations(vec![(
            "t".into(),
            TermExpr::let_(
                "fd",
                TermExpr::cat(open_fd(), TermExpr::or(close_fd(), TermExpr::re("t"))),
            ),
        )])
        .unwrap();
        let sets = free_vars_all(&sys);
        for id in sys.node_ids() {
            let recomputed = match sys.node(id) {
                TermNode::Empty => BTreeSet::new(),
                TermNode::Pattern(p) => p.free_vars(),
                TermNode::Cat(a, b)
                | TermNode::And(a, b)
                | TermNode::Or(a, b)
                | TermNode::Shuffle(a, b) => {
                    let mut s = sets[a.index()].clone();
                    s.extend(sets[b.index()].iter().cloned());
                    s
                }
                TermNode::Let(x, t) => {
                    let mut s = sets[t.index()].clone();
                    s.remove(x);
                    s
                }
            };
            assert_eq!(recomputed, sets[id.index()]);
        }
    }

    #[test]
    fn part_of_leaves_is_empty() {
        let sys = TermSystem::single(TermExpr::Empty);
        assert!(part_of(&sys, sys.equation("Main").unwrap()).is_empty());
        let sys = TermSystem::single(open_fd());
        assert!(part_of(&sys, sys.equation("Main").unwrap()).is_empty());
    }

    #[test]
    fn part_of_union_contains_both_operands() {
        let sys = TermSystem::single(TermExpr::or(TermExpr::pat0("a"), TermExpr::pat0("b")));
        let root = sys.equation("Main").unwrap();
        let parts = part_of(&sys, root);
        assert_eq!(parts.len(), 2);
        assert_eq!(parts, sys.node(root).children().into_iter().collect());
    }

    #[test]
    fn cyclic_term_is_part_of_itself() {
        let sys = TermSystem::from_equations(vec![(
            "t".into(),
            TermExpr::cat(TermExpr::pat0("e"), TermExpr::re("t")),
        )])
        .unwrap();
        let t = sys.equation("t").unwrap();
        assert!(part_of(&sys, t).contains(&t));
        assert!(is_cyclic(&sys, t));
        let acyclic = TermSystem::single(TermExpr::cat(TermExpr::pat0("a"), TermExpr::Empty));
        assert!(!is_cyclic(&acyclic, acyclic.equation("Main").unwrap()));
    }

    #[test]
    fn accepts_empty_base_cases() {
        let sys = TermSystem::single(TermExpr::Empty);
        assert!(accepts_empty(&sys, sys.equation("Main").unwrap()));
        let sys = TermSystem::single(open_fd());
        assert!(!accepts_empty(&sys, sys.equation("Main").unwrap()));
    }

    #[test]
    fn accepts_empty_cyclic_cat_is_false() {
        // t = (empty \/ open(fd)) . t: naive recursion would claim true via
        // the nullable left operand; the least fixpoint stays false because
        // E(t) itself never becomes derivable.
        let sys = TermSystem::from_equations(vec![(
            "t".into(),
            TermExpr::cat(TermExpr::or(TermExpr::Empty, open_fd()), TermExpr::re("t")),
        )])
        .unwrap();
        assert!(!accepts_empty(&sys, sys.equation("t").unwrap()));
    }

    #[test]
    fn contractive_guarded_cycle() {
        // t = e . t
        let sys = TermSystem::from_equations(vec![(
            "t".into(),
            TermExpr::cat(TermExpr::pat0("e"), TermExpr::re("t")),
        )])
        .unwrap();
        assert!(check_contractive(&sys, sys.equation("t").unwrap()).is_contractive());
    }

    #[test]
    fn left_recursion_is_not_contractive() {
        // t = t . e
        let sys = TermSystem::from_equations(vec![(
            "t".into(),
            TermExpr::cat(TermExpr::re("t"), TermExpr::pat0("e")),
        )])
        .unwrap();
        let t = sys.equation("t").unwrap();
        match check_contractive(&sys, t) {
            Contractivity::NotContractive { cycle } => {
                assert!(cycle.contains(&"t".to_string()), "cycle = {cycle:?}");
            }
            Contractivity::Contractive => panic!("t = t.e accepted"),
        }
    }

    #[test]
    fn self_union_is_not_contractive() {
        // t = t \/ t
        let sys = TermSystem::from_equations(vec![(
            "t".into(),
            TermExpr::or(TermExpr::re("t"), TermExpr::re("t")),
        )])
        .unwrap();
        assert!(!check_contractive(&sys, sys.equation("t").unwrap()).is_contractive());
    }

    #[test]
    fn nullable_left_cat_cycle_is_not_contractive() {
        // t = (empty \/ e) . t: the left operand is nullable, so the right
        // edge is unguarded.
        let sys = TermSystem::from_equations(vec![(
            "t".into(),
            TermExpr::cat(
                TermExpr::or(TermExpr::Empty, TermExpr::pat0("e")),
                TermExpr::re("t"),
            ),
        )])
        .unwrap();
        assert!(!check_contractive(&sys, sys.equation("t").unwrap()).is_contractive());
    }
}
