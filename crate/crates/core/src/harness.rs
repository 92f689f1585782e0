//! Bounded equivalence harness: checks, operator by operator, that the
//! trace set of a composite term computed operationally coincides with the
//! composition of its operands' trace sets, on every trace up to a horizon.
//!
//! Comes with two corpora: an exhaustive sweep over ground (variable-free)
//! terms up to a given depth, deduplicated by bounded language, and a
//! seeded random generator of contractive cyclic systems with parameters.

use std::collections::BTreeMap;

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use serde::Serialize;

use crate::analysis::{check_contractive, free_vars, Contractivity};
use crate::data::{DataValue, EventValue};
use crate::events::{render_event, EventTypeDecl, EventTypeDecls};
use crate::interp::{step_in_place, StepError, StepOutcome};
use crate::semantics::{
    del_var, enumerate, inter, lp_concat, lp_shuffle_sets, lp_union, InstTrace,
};
use crate::subst::{apply_subst_in_place, apply_to_expr, Substitution};
use crate::terms::{BasicDataExpr, TermExpr, TermId, TermNode, TermSystem, VarName};

/// The five composition claims under test.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CompOp {
    Union,
    Concat,
    Inter,
    Shuffle,
    Let,
}

impl CompOp {
    pub const ALL: [CompOp; 5] = [
        CompOp::Union,
        CompOp::Concat,
        CompOp::Inter,
        CompOp::Shuffle,
        CompOp::Let,
    ];

    pub fn name(self) -> &'static str {
        match self {
            CompOp::Union => "union",
            CompOp::Concat => "concat",
            CompOp::Inter => "inter",
            CompOp::Shuffle => "shuffle",
            CompOp::Let => "let",
        }
    }
}

/// A trace present on exactly one side of a comparison.
#[derive(Debug, Clone, Serialize)]
pub struct CounterexampleReport {
    /// Rendered events of the smallest differing member.
    pub trace: Vec<String>,
    pub substitution: String,
    /// Which side contains the member: "operational" or "compositional".
    pub only_in: &'static str,
}

#[derive(Debug, Clone, Serialize)]
pub struct ClaimOutcome {
    pub operator: CompOp,
    /// Member length up to which the two sides were compared.
    pub compared_up_to: usize,
    pub equal: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub counterexample: Option<CounterexampleReport>,
}

#[derive(Debug, Clone, Serialize)]
pub struct EquivalenceReport {
    pub left: String,
    pub right: String,
    pub horizon: usize,
    pub claims: Vec<ClaimOutcome>,
}

impl EquivalenceReport {
    pub fn all_equal(&self) -> bool {
        self.claims.iter().all(|c| c.equal)
    }
}

#[derive(Debug, Clone, thiserror::Error)]
pub enum PreconditionViolation {
    #[error("operand {side} is not contractive: cycle through {}", .cycle.join(" -> "))]
    NotContractive { side: &'static str, cycle: Vec<String> },
    #[error("horizon must be at least 1 to compare concatenation")]
    HorizonTooSmall,
    #[error(transparent)]
    Step(#[from] StepError),
}

/// Compares, for each operator, the operationally enumerated trace set of
/// the combined term against the composition of the operands' sets.
///
/// The concatenation claim is compared one event shorter than the others,
/// matching the horizon its composition can certify; shuffle members
/// longer than the horizon are outside both sides' completeness bounds and
/// are skipped by the same member-length filter.
pub fn check_compositional_equivalence(
    sys: &TermSystem,
    t1: TermId,
    t2: TermId,
    decls: &EventTypeDecls,
    alphabet: &[EventValue],
    horizon: usize,
) -> Result<EquivalenceReport, PreconditionViolation> {
    if horizon == 0 {
        return Err(PreconditionViolation::HorizonTooSmall);
    }
    for (side, t) in [("left", t1), ("right", t2)] {
        if let Contractivity::NotContractive { cycle } = check_contractive(sys, t) {
            return Err(PreconditionViolation::NotContractive { side, cycle });
        }
    }
    let s1 = enumerate(sys, t1, decls, alphabet, horizon)?;
    let s2 = enumerate(sys, t2, decls, alphabet, horizon)?;
    // The let claim deletes a variable free in the operand when one
    // exists; with no free variables it degenerates to a no-op deletion.
    let let_var = free_vars(sys, t1)
        .into_iter()
        .next()
        .unwrap_or_else(|| VarName::new("x").unwrap());

    let mut claims = Vec::new();
    for op in CompOp::ALL {
        let (combined_sys, combined_root) = combine(sys, t1, t2, op, &let_var);
        let (composed, compared_up_to) = match op {
            CompOp::Union => (lp_union(&s1, &s2), horizon),
            CompOp::Concat => (
                lp_concat(&s1, &s2).expect("horizon checked above"),
                horizon - 1,
            ),
            CompOp::Inter => (inter(&s1, &s2), horizon),
            CompOp::Shuffle => (lp_shuffle_sets(&s1, &s2), horizon),
            CompOp::Let => (del_var(&s1, &let_var), horizon),
        };
        let operational = enumerate(
            &combined_sys,
            combined_root,
            decls,
            alphabet,
            compared_up_to,
        )?;
        let lhs = operational.members_up_to(compared_up_to);
        let rhs = composed.members_up_to(compared_up_to);
        let counterexample = if lhs == rhs {
            None
        } else {
            let minimal = |side: &'static str, member: &InstTrace| CounterexampleReport {
                trace: member.0.iter().map(|e| render_event(decls, e)).collect(),
                substitution: member.1.to_string(),
                only_in: side,
            };
            let mut diffs: Vec<CounterexampleReport> = lhs
                .difference(&rhs)
                .map(|m| minimal("operational", m))
                .chain(rhs.difference(&lhs).map(|m| minimal("compositional", m)))
                .collect();
            diffs.sort_by_key(|c| (c.trace.len(), c.trace.clone()));
            diffs.into_iter().next()
        };
        claims.push(ClaimOutcome {
            operator: op,
            compared_up_to,
            equal: counterexample.is_none(),
            counterexample,
        });
    }
    Ok(EquivalenceReport {
        left: sys.render(t1),
        right: sys.render(t2),
        horizon,
        claims,
    })
}

/// Extends a copy of the system with the composite term for `op`.
fn combine(
    sys: &TermSystem,
    t1: TermId,
    t2: TermId,
    op: CompOp,
    let_var: &VarName,
) -> (TermSystem, TermId) {
    let mut out = sys.clone();
    let root = match op {
        CompOp::Union => out.push(TermNode::Or(t1, t2)),
        CompOp::Concat => out.push(TermNode::Cat(t1, t2)),
        CompOp::Inter => out.push(TermNode::And(t1, t2)),
        CompOp::Shuffle => out.push(TermNode::Shuffle(t1, t2)),
        CompOp::Let => out.push(TermNode::Let(let_var.clone(), t1)),
    };
    (out, root)
}

/// Builds the ground alphabet for a set of declarations by instantiating
/// every parameter with each value from `pool`.
pub fn ground_alphabet(decls: &EventTypeDecls, pool: &[DataValue]) -> Vec<EventValue> {
    let mut out = Vec::new();
    for decl in decls.iter() {
        let mut assignments: Vec<Substitution> = vec![Substitution::empty()];
        for p in &decl.params {
            assignments = assignments
                .into_iter()
                .flat_map(|a| {
                    pool.iter().map(move |v| {
                        let mut next = a.clone();
                        next.bind(p.clone(), v.clone()).expect("fresh parameter");
                        next
                    })
                })
                .collect();
        }
        for a in assignments {
            let ground = apply_to_expr(&a, &decl.template)
                .as_ground()
                .expect("template variables are exactly the parameters");
            out.push(EventValue::new(ground).expect("templates are objects"));
        }
    }
    out
}

/// Two zero-parameter event types `a` and `b`, with their alphabet.
pub fn ground_ab_world() -> (EventTypeDecls, Vec<EventValue>) {
    let mk = |name: &str| {
        EventTypeDecl::new(
            name,
            vec![],
            BasicDataExpr::Object(vec![("id".into(), BasicDataExpr::str(name))]),
        )
        .unwrap()
    };
    let decls = EventTypeDecls::from_decls([mk("a"), mk("b")]).unwrap();
    let alphabet = ground_alphabet(&decls, &[]);
    (decls, alphabet)
}

/// One-parameter event types `a(v)` and `b(v)` for the random corpus.
pub fn parametric_ab_world(pool: &[DataValue]) -> (EventTypeDecls, Vec<EventValue>) {
    let mk = |name: &str| {
        EventTypeDecl::new(
            name,
            vec![VarName::new("v").unwrap()],
            BasicDataExpr::Object(vec![
                ("id".into(), BasicDataExpr::str(name)),
                ("v".into(), BasicDataExpr::var("v")),
            ]),
        )
        .unwrap()
    };
    let decls = EventTypeDecls::from_decls([mk("a"), mk("b")]).unwrap();
    let alphabet = ground_alphabet(&decls, pool);
    (decls, alphabet)
}

/// All ground terms (no variables, no binders) over event types `a`, `b`
/// and the four binary operators, up to the given tree depth.
pub fn ground_terms(depth: usize) -> Vec<TermExpr> {
    let atoms = vec![TermExpr::Empty, TermExpr::pat0("a"), TermExpr::pat0("b")];
    if depth <= 1 {
        return atoms;
    }
    let smaller = ground_terms(depth - 1);
    let mut out = atoms;
    for a in &smaller {
        for b in &smaller {
            out.push(TermExpr::cat(a.clone(), b.clone()));
            out.push(TermExpr::and(a.clone(), b.clone()));
            out.push(TermExpr::or(a.clone(), b.clone()));
            out.push(TermExpr::shuffle(a.clone(), b.clone()));
        }
    }
    out
}

/// Outcome of a corpus sweep.
#[derive(Debug, Clone, Serialize)]
pub struct SweepOutcome {
    pub pairs_checked: usize,
    /// Distinct bounded languages among the candidate terms (exhaustive
    /// sweep only).
    pub language_classes: usize,
    pub failures: Vec<EquivalenceReport>,
}

impl SweepOutcome {
    pub fn all_equal(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Checks every operator claim over all pairs of ground terms up to
/// `depth`, at the given horizon.
///
/// Ground terms carry no substitutions, so a term's monitor behavior is
/// fully determined by its accepted-trace and viable-prefix languages up
/// to the horizon; terms with equal languages are interchangeable in every
/// claim. The sweep therefore pairs one representative per language class,
/// which covers all pairs of the full corpus.
pub fn exhaustive_ground_sweep(depth: usize, horizon: usize) -> SweepOutcome {
    let (decls, alphabet) = ground_ab_world();
    let mut classes: BTreeMap<(Vec<InstTrace>, Vec<Vec<EventValue>>), TermExpr> =
        BTreeMap::new();
    for term in ground_terms(depth) {
        let sys = TermSystem::single(term.clone());
        let root = sys.equation("Main").unwrap();
        let set = enumerate(&sys, root, &decls, &alphabet, horizon)
            .expect("ground terms are acyclic, hence contractive");
        let key = (
            set.items().iter().cloned().collect(),
            set.prefixes().iter().cloned().collect(),
        );
        classes.entry(key).or_insert(term);
    }
    let reps: Vec<TermExpr> = classes.into_values().collect();
    let pairs: Vec<(usize, usize)> = (0..reps.len())
        .flat_map(|i| (0..reps.len()).map(move |j| (i, j)))
        .collect();
    let failures: Vec<Option<EquivalenceReport>> = crate::map_items(&pairs, |&(i, j)| {
        let sys = TermSystem::from_equations(vec![
            ("Left".to_string(), reps[i].clone()),
            ("Right".to_string(), reps[j].clone()),
        ])
        .unwrap();
        let t1 = sys.equation("Left").unwrap();
        let t2 = sys.equation("Right").unwrap();
        let report = check_compositional_equivalence(&sys, t1, t2, &decls, &alphabet, horizon)
            .expect("ground operands are contractive");
        (!report.all_equal()).then_some(report)
    });
    SweepOutcome {
        pairs_checked: pairs.len(),
        language_classes: reps.len(),
        failures: failures.into_iter().flatten().collect(),
    }
}

/// Sequential variant of [`exhaustive_ground_sweep`] used for strategy
/// benchmarking; results are identical.
pub fn exhaustive_ground_sweep_seq(depth: usize, horizon: usize) -> SweepOutcome {
    // Same computation with the parallel dispatch bypassed.
    let (decls, alphabet) = ground_ab_world();
    let mut classes: BTreeMap<(Vec<InstTrace>, Vec<Vec<EventValue>>), TermExpr> =
        BTreeMap::new();
    for term in ground_terms(depth) {
        let sys = TermSystem::single(term.clone());
        let root = sys.equation("Main").unwrap();
        let set = enumerate(&sys, root, &decls, &alphabet, horizon).unwrap();
        let key = (
            set.items().iter().cloned().collect(),
            set.prefixes().iter().cloned().collect(),
        );
        classes.entry(key).or_insert(term);
    }
    let reps: Vec<TermExpr> = classes.into_values().collect();
    let mut failures = Vec::new();
    let mut pairs_checked = 0;
    for left in &reps {
        for right in &reps {
            pairs_checked += 1;
            let sys = TermSystem::from_equations(vec![
                ("Left".to_string(), left.clone()),
                ("Right".to_string(), right.clone()),
            ])
            .unwrap();
            let t1 = sys.equation("Left").unwrap();
            let t2 = sys.equation("Right").unwrap();
            let report =
                check_compositional_equivalence(&sys, t1, t2, &decls, &alphabet, horizon)
                    .unwrap();
            if !report.all_equal() {
                failures.push(report);
            }
        }
    }
    SweepOutcome {
        pairs_checked,
        language_classes: reps.len(),
        failures,
    }
}

/// A randomly generated contractive system of self-recursive equations.
///
/// Each equation uses its own variable, so two equations never share
/// bindings; recursion is through the equation itself, keeping every cycle
/// inside one operand of a later composition.
pub fn random_contractive_system(seed: u64) -> TermSystem {
    let mut rng = StdRng::seed_from_u64(seed);
    loop {
        let n = rng.gen_range(2..=4usize);
        let equations: Vec<(String, TermExpr)> = (0..n)
            .map(|i| (format!("T{i}"), random_equation(&mut rng, i)))
            .collect();
        let Ok(sys) = TermSystem::from_equations(equations) else {
            continue;
        };
        let contractive = sys
            .equations()
            .map(|(_, id)| id)
            .collect::<Vec<_>>()
            .into_iter()
            .all(|id| matches!(check_contractive(&sys, id), Contractivity::Contractive));
        if contractive {
            return sys;
        }
    }
}

fn random_equation(rng: &mut StdRng, index: usize) -> TermExpr {
    let name = format!("T{index}");
    let var = format!("x{index}");
    random_term(rng, &name, &var, 3)
}

fn random_term(rng: &mut StdRng, eq_name: &str, var: &str, depth: usize) -> TermExpr {
    let atom = |rng: &mut StdRng| {
        let ty = if rng.gen_bool(0.5) { "a" } else { "b" };
        let arg = match rng.gen_range(0..3u8) {
            0 => BasicDataExpr::int(0),
            1 => BasicDataExpr::int(1),
            _ => BasicDataExpr::var(var),
        };
        TermExpr::pat(ty, vec![arg])
    };
    if depth == 0 {
        return if rng.gen_bool(0.2) {
            TermExpr::Empty
        } else {
            atom(rng)
        };
    }
    match rng.gen_range(0..10u8) {
        0 => TermExpr::Empty,
        1 | 2 => atom(rng),
        3 => {
            // Guarded self-recursion: an event atom in front keeps the
            // loop contractive.
            TermExpr::cat(atom(rng), TermExpr::re(eq_name))
        }
        4 => TermExpr::cat(
            random_term(rng, eq_name, var, depth - 1),
            random_term(rng, eq_name, var, depth - 1),
        ),
        5 => TermExpr::and(
            random_term(rng, eq_name, var, depth - 1),
            random_term(rng, eq_name, var, depth - 1),
        ),
        6 => TermExpr::or(
            random_term(rng, eq_name, var, depth - 1),
            random_term(rng, eq_name, var, depth - 1),
        ),
        7 => TermExpr::shuffle(
            random_term(rng, eq_name, var, depth - 1),
            random_term(rng, eq_name, var, depth - 1),
        ),
        8 => TermExpr::let_(var, random_term(rng, eq_name, var, depth - 1)),
        _ => TermExpr::or(
            TermExpr::cat(atom(rng), TermExpr::re(eq_name)),
            TermExpr::Empty,
        ),
    }
}

/// Checks all operator claims over `count` random contractive systems,
/// pairing the first two equations of each, at the given horizon.
pub fn random_sweep(count: usize, base_seed: u64, horizon: usize) -> SweepOutcome {
    let pool = [DataValue::int(0), DataValue::int(1)];
    let (decls, alphabet) = parametric_ab_world(&pool);
    let seeds: Vec<u64> = (0..count as u64).map(|i| base_seed.wrapping_add(i)).collect();
    let failures: Vec<Option<EquivalenceReport>> = crate::map_items(&seeds, |&seed| {
        let sys = random_contractive_system(seed);
        let t1 = sys.equation("T0").unwrap();
        let t2 = sys.equation("T1").unwrap();
        let report = check_compositional_equivalence(&sys, t1, t2, &decls, &alphabet, horizon)
            .expect("generator only emits contractive systems");
        (!report.all_equal()).then_some(report)
    });
    SweepOutcome {
        pairs_checked: seeds.len(),
        language_classes: 0,
        failures: failures.into_iter().flatten().collect(),
    }
}


/// Outcome of checking the per-step invariants over a corpus.
#[derive(Debug, Clone, Serialize)]
pub struct InvariantOutcome {
    pub terms_checked: usize,
    pub violations: Vec<String>,
}

impl InvariantOutcome {
    pub fn is_clean(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks the transition-level invariants for every viable prefix of
/// `root` up to `horizon` and every alphabet event:
/// - totality: on a contractive term one step either succeeds or refuses,
///   always within the fuel bound;
/// - refusal agreement: a step on `e` succeeds exactly when the consumed
///   prefix extended with `e` is survivable;
/// - scoping: the step substitution's domain and the residual's free
///   variables are free variables of the stepped term;
/// - one substitution per consumed event, with pairwise disjoint domains,
///   all drawn from the free variables of the original term.
pub fn check_step_invariants(
    sys: &TermSystem,
    root: TermId,
    decls: &EventTypeDecls,
    alphabet: &[EventValue],
    horizon: usize,
) -> Vec<String> {
    let mut violations = Vec::new();
    let set = match enumerate(sys, root, decls, alphabet, horizon) {
        Ok(s) => s,
        Err(e) => return vec![format!("enumerate failed on {}: {e}", sys.render(root))],
    };
    let fv0 = free_vars(sys, root);
    let label = sys.render(root);
    let show = |trace: &[EventValue]| -> String {
        if trace.is_empty() {
            "λ".to_string()
        } else {
            trace
                .iter()
                .map(|e| render_event(decls, e))
                .collect::<Vec<_>>()
                .join(" ")
        }
    };
    // Each entry owns its system; sibling branches must not share nodes.
    let mut frontier = vec![(
        sys.clone(),
        root,
        Vec::<EventValue>::new(),
        Vec::<Substitution>::new(),
    )];
    while let Some((cur_sys, cur, prefix, sigmas)) = frontier.pop() {
        if sigmas.len() != prefix.len() {
            violations.push(format!(
                "{label}: consumed {} events but collected {} substitutions",
                prefix.len(),
                sigmas.len()
            ));
        }
        if prefix.len() >= horizon {
            continue;
        }
        for e in alphabet {
            let mut next_sys = cur_sys.clone();
            let mut extended = prefix.clone();
            extended.push(e.clone());
            let viable = set.is_viable_prefix(&extended);
            match step_in_place(&mut next_sys, cur, e, decls) {
                Err(err) => violations.push(format!(
                    "{label}: step on {} after {} failed: {err}",
                    render_event(decls, e),
                    show(&prefix)
                )),
                Ok(StepOutcome::NoStep) => {
                    if viable {
                        violations.push(format!(
                            "{label}: refuses {} after {} although the \
                             extension is survivable",
                            render_event(decls, e),
                            show(&prefix)
                        ));
                    }
                }
                Ok(StepOutcome::Stepped { next, subst }) => {
                    if !viable {
                        violations.push(format!(
                            "{label}: steps on {} after {} although the \
                             extension is not survivable",
                            render_event(decls, e),
                            show(&prefix)
                        ));
                    }
                    let fv_before = free_vars(&cur_sys, cur);
                    let fv_after = free_vars(&next_sys, next);
                    let dom = subst.domain();
                    for x in dom.iter().chain(&fv_after) {
                        if !fv_before.contains(x) {
                            violations.push(format!(
                                "{label}: step on {} after {} introduced \
                                 variable {x} from outside the term",
                                render_event(decls, e),
                                show(&prefix)
                            ));
                        }
                    }
                    for x in &dom {
                        if !fv0.contains(x) {
                            violations.push(format!(
                                "{label}: binding for {x} escapes the free \
                                 variables of the original term"
                            ));
                        }
                    }
                    for prev in &sigmas {
                        if prev.domain().intersection(&dom).next().is_some() {
                            violations.push(format!(
                                "{label}: step substitutions along {} do not \
                                 have disjoint domains",
                                show(&extended)
                            ));
                        }
                    }
                    let applied = apply_subst_in_place(&mut next_sys, next, &subst);
                    let mut next_sigmas = sigmas.clone();
                    next_sigmas.push(subst);
                    frontier.push((next_sys, applied, extended, next_sigmas));
                }
            }
        }
    }
    violations
}

/// Runs [`check_step_invariants`] over generated random systems: every
/// equation of every system, in parallel when the `parallel` feature is on.
pub fn invariant_sweep_random(count: usize, base_seed: u64, horizon: usize) -> InvariantOutcome {
    let pool = [DataValue::int(0), DataValue::int(1)];
    let (decls, alphabet) = parametric_ab_world(&pool);
    let seeds: Vec<u64> = (0..count as u64).map(|i| base_seed.wrapping_add(i)).collect();
    let per_seed: Vec<(usize, Vec<String>)> = crate::map_items(&seeds, |&seed| {
        let sys = random_contractive_system(seed);
        let mut violations = Vec::new();
        let mut checked = 0;
        let roots: Vec<TermId> = sys.equations().map(|(_, id)| id).collect();
        for root in roots {
            checked += 1;
            for v in check_step_invariants(&sys, root, &decls, &alphabet, horizon) {
                violations.push(format!("seed {seed}: {v}"));
            }
        }
        (checked, violations)
    });
    let mut out = InvariantOutcome {
        terms_checked: 0,
        violations: Vec::new(),
    };
    for (checked, violations) in per_seed {
        out.terms_checked += checked;
        out.violations.extend(violations);
    }
    out
}

/// Runs [`check_step_invariants`] over every ground term up to `depth`.
pub fn invariant_sweep_ground(depth: usize, horizon: usize) -> InvariantOutcome {
    let (decls, alphabet) = ground_ab_world();
    let terms = ground_terms(depth);
    let per_term: Vec<Vec<String>> = crate::map_items(&terms, |expr| {
        let sys = TermSystem::from_equations(vec![("Main".to_string(), expr.clone())])
            .expect("ground terms build");
        let root = sys.equation("Main").unwrap();
        check_step_invariants(&sys, root, &decls, &alphabet, horizon)
    });
    InvariantOutcome {
        terms_checked: terms.len(),
        violations: per_term.into_iter().flatten().collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn optional_concat_claims_hold() {
        let (decls, alphabet) = ground_ab_world();
        let sys = TermSystem::from_equations(vec![
            (
                "Left".to_string(),
                TermExpr::or(TermExpr::pat0("a"), TermExpr::Empty),
            ),
            (
                "Right".to_string(),
                TermExpr::or(
                    TermExpr::cat(TermExpr::pat0("a"), TermExpr::pat0("b")),
                    TermExpr::Empty,
                ),
            ),
        ])
        .unwrap();
        let t1 = sys.equation("Left").unwrap();
        let t2 = sys.equation("Right").unwrap();
        let report =
            check_compositional_equivalence(&sys, t1, t2, &decls, &alphabet, 4).unwrap();
        assert!(report.all_equal(), "{report:?}");
    }

    #[test]
    fn non_contractive_operand_is_rejected() {
        let (decls, alphabet) = ground_ab_world();
        let sys = TermSystem::from_equations(vec![
            (
                "Loop".to_string(),
                TermExpr::or(TermExpr::re("Loop"), TermExpr::re("Loop")),
            ),
            ("Ok".to_string(), TermExpr::pat0("a")),
        ])
        .unwrap();
        let t1 = sys.equation("Loop").unwrap();
        let t2 = sys.equation("Ok").unwrap();
        assert!(matches!(
            check_compositional_equivalence(&sys, t1, t2, &decls, &alphabet, 3),
            Err(PreconditionViolation::NotContractive { side: "left", .. })
        ));
    }

    #[test]
    fn let_claim_on_binder_example() {
        let pool = [DataValue::int(0), DataValue::int(1)];
        let (decls, alphabet) = parametric_ab_world(&pool);
        let sys = TermSystem::from_equations(vec![
            (
                "Left".to_string(),
                TermExpr::cat(
                    TermExpr::pat("a", vec![BasicDataExpr::var("x")]),
                    TermExpr::pat("b", vec![BasicDataExpr::var("x")]),
                ),
            ),
            ("Right".to_string(), TermExpr::Empty),
        ])
        .unwrap();
        let t1 = sys.equation("Left").unwrap();
        let t2 = sys.equation("Right").unwrap();
        let report =
            check_compositional_equivalence(&sys, t1, t2, &decls, &alphabet, 3).unwrap();
        assert!(report.all_equal(), "{report:?}");
    }

    #[test]
    fn ground_alphabet_cartesian() {
        let pool = [DataValue::int(0), DataValue::int(1)];
        let (_, alphabet) = parametric_ab_world(&pool);
        assert_eq!(alphabet.len(), 4);
    }

    #[test]
    fn ground_term_counts() {
        assert_eq!(ground_terms(1).len(), 3);
        assert_eq!(ground_terms(2).len(), 3 + 4 * 9);
        assert_eq!(ground_terms(3).len(), 3 + 4 * 39 * 39);
    }

    #[test]
    fn small_exhaustive_sweep_is_clean() {
        let outcome = exhaustive_ground_sweep(2, 3);
        assert!(outcome.all_equal(), "{:?}", outcome.failures.first());
    }

    #[test]
    fn random_generator_is_reproducible() {
        let a = random_contractive_system(7);
        let b = random_contractive_system(7);
        let ra = a.equation("T0").unwrap();
        let rb = b.equation("T0").unwrap();
        assert_eq!(a.render(ra), b.render(rb));
    }

    #[test]
    fn small_random_sweep_is_clean() {
        let outcome = random_sweep(25, 42, 4);
        assert!(outcome.all_equal(), "{:?}", outcome.failures.first());
    }
}
