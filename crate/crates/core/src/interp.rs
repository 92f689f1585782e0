//! Deterministic small-step interpreter and incremental monitor.
//!
//! One step consumes one event. The transition relation is a function:
//! unions and shuffles prefer their left operand, concatenation prefers its
//! head, so a term either has exactly one successor for an event or none.

use std::collections::HashMap;

use crate::analysis::{accepts_empty_all, check_contractive, Contractivity};
use crate::data::EventValue;
use crate::events::{match_event, EventTypeDecls, MatchError, MatchOutcome};
use crate::subst::{apply_subst_in_place, Substitution};
use crate::terms::{TermId, TermNode, TermSystem};

/// Result of attempting one transition.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum StepOutcome {
    /// The term consumed the event, leaving `next` and reporting `subst`.
    Stepped { next: TermId, subst: Substitution },
    /// No rule applies: the event is not allowed here.
    NoStep,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum StepError {
    #[error(transparent)]
    Match(#[from] MatchError),
    /// The derivation did not bottom out within the fuel bound. Only
    /// non-contractive systems can reach this.
    #[error("transition derivation exceeded {0} rule applications")]
    FuelExhausted(usize),
}

/// Default fuel for one transition: generous linear headroom over the
/// system size. A contractive system evaluates each node at most once.
pub fn default_fuel(sys: &TermSystem) -> usize {
    10 * sys.len().max(1)
}

/// Attempts one transition of the term rooted at `t` on `event`, extending
/// `sys` with any residual nodes.
pub fn step_in_place(
    sys: &mut TermSystem,
    t: TermId,
    event: &EventValue,
    decls: &EventTypeDecls,
) -> Result<StepOutcome, StepError> {
    let fuel = default_fuel(sys);
    step_in_place_with_fuel(sys, t, event, decls, fuel)
}

/// Like [`step_in_place`] with an explicit bound on rule applications.
pub fn step_in_place_with_fuel(
    sys: &mut TermSystem,
    t: TermId,
    event: &EventValue,
    decls: &EventTypeDecls,
    fuel: usize,
) -> Result<StepOutcome, StepError> {
    let nullable = accepts_empty_all(sys);
    let mut ctx = StepCtx {
        event,
        decls,
        nullable,
        memo: HashMap::new(),
        fuel,
        fuel_limit: fuel,
    };
    match ctx.step_node(sys, t)? {
        Some((next, subst)) => Ok(StepOutcome::Stepped { next, subst }),
        None => Ok(StepOutcome::NoStep),
    }
}

/// Clone-on-step variant of [`step_in_place`].
pub fn step(
    sys: &TermSystem,
    t: TermId,
    event: &EventValue,
    decls: &EventTypeDecls,
) -> Result<(TermSystem, StepOutcome), StepError> {
    let mut out = sys.clone();
    let outcome = step_in_place(&mut out, t, event, decls)?;
    Ok((out, outcome))
}

struct StepCtx<'a> {
    event: &'a EventValue,
    decls: &'a EventTypeDecls,
    /// Nullability of every node as of the start of the step; residual
    /// nodes are pushed after all reads.
    nullable: Vec<bool>,
    memo: HashMap<TermId, Option<(TermId, Substitution)>>,
    fuel: usize,
    fuel_limit: usize,
}

impl StepCtx<'_> {
    fn step_node(
        &mut self,
        sys: &mut TermSystem,
        t: TermId,
    ) -> Result<Option<(TermId, Substitution)>, StepError> {
        if let Some(done) = self.memo.get(&t) {
            return Ok(done.clone());
        }
        if self.fuel == 0 {
            return Err(StepError::FuelExhausted(self.fuel_limit));
        }
        self.fuel -= 1;
        let result = match sys.node(t).clone() {
            TermNode::Empty => None,
            TermNode::Pattern(theta) => {
                match match_event(self.decls, self.event, &theta)? {
                    MatchOutcome::Match(sigma) => Some((sys.push(TermNode::Empty), sigma)),
                    MatchOutcome::NoMatch => None,
                }
            }
            TermNode::Cat(t1, t2) => match self.step_node(sys, t1)? {
                Some((t1p, sigma)) => Some((sys.push(TermNode::Cat(t1p, t2)), sigma)),
                // The tail may move only when the head both allows the
                // empty trace and cannot consume the event itself.
                None if self.nullable[t1.index()] => self.step_node(sys, t2)?,
                None => None,
            },
            TermNode::And(t1, t2) => {
                match (self.step_node(sys, t1)?, self.step_node(sys, t2)?) {
                    (Some((t1p, s1)), Some((t2p, s2))) => match s1.merge(&s2) {
                        Ok(sigma) => Some((sys.push(TermNode::And(t1p, t2p)), sigma)),
                        // Divergent bindings on a shared variable: the
                        // conjunction rejects the event.
                        Err(_) => None,
                    },
                    _ => None,
                }
            }
            TermNode::Or(t1, t2) => match self.step_node(sys, t1)? {
                // The taken branch replaces the whole union.
                some @ Some(_) => some,
                None => self.step_node(sys, t2)?,
            },
            TermNode::Shuffle(t1, t2) => match self.step_node(sys, t1)? {
                Some((t1p, sigma)) => Some((sys.push(TermNode::Shuffle(t1p, t2)), sigma)),
                None => self
                    .step_node(sys, t2)?
                    .map(|(t2p, sigma)| (sys.push(TermNode::Shuffle(t1, t2p)), sigma)),
            },
            TermNode::Let(x, body) => match self.step_node(sys, body)? {
                Some((bp, sigma)) => {
                    if sigma.get(&x).is_some() {
                        // The binder's variable got a value: freeze it into
                        // the residual, drop the binder, and keep it out of
                        // the reported substitution.
                        let frozen = apply_subst_in_place(sys, bp, &sigma.restricted_to(&x));
                        Some((frozen, sigma.without(&x)))
                    } else {
                        Some((sys.push(TermNode::Let(x, bp)), sigma))
                    }
                }
                None => None,
            },
        };
        self.memo.insert(t, result.clone());
        Ok(result)
    }
}

/// Outcome of running a term over a complete finite trace.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RunOutcome {
    /// Every event was consumed; `accepted` tells whether the final
    /// residual allows stopping here.
    Survived { accepted: bool },
    /// The event at `at` (0-based) was not allowed.
    Rejected { at: usize },
}

impl RunOutcome {
    pub fn is_accepted(&self) -> bool {
        matches!(self, RunOutcome::Survived { accepted: true })
    }
}

/// Runs the term over the events in order. After each transition the
/// reported substitution is applied to the residual before the next event.
pub fn run<'a>(
    sys: &TermSystem,
    t: TermId,
    decls: &EventTypeDecls,
    events: impl IntoIterator<Item = &'a EventValue>,
) -> Result<RunOutcome, StepError> {
    let mut sys = sys.clone();
    let mut cur = t;
    for (i, e) in events.into_iter().enumerate() {
        match step_in_place(&mut sys, cur, e, decls)? {
            StepOutcome::Stepped { next, subst } => {
                cur = apply_subst_in_place(&mut sys, next, &subst);
            }
            StepOutcome::NoStep => return Ok(RunOutcome::Rejected { at: i }),
        }
        // Keep the working set proportional to the live residual, not to
        // the run length: drop spent branches, then unreachable nodes.
        let (reduced, root) = sys.reduced(cur);
        sys = reduced;
        cur = root;
    }
    let accepted = accepts_empty_all(&sys)[cur.index()];
    Ok(RunOutcome::Survived { accepted })
}

/// Verdict after feeding one event to a monitor session.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FeedVerdict {
    /// The event was consumed; `accepting` tells whether stopping now would
    /// satisfy the specification.
    Ok { accepting: bool },
    /// The event violates the specification; the session is now closed.
    Violation,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SessionError {
    #[error("specification is not contractive: cycle through {}", .0.join(" -> "))]
    NotContractive(Vec<String>),
    #[error("event fed to a session that already reported a violation")]
    FeedAfterViolation,
    #[error(transparent)]
    Step(#[from] StepError),
}

/// Overall status of a monitor session.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SessionStatus {
    /// Trace so far is a prefix of some accepted trace and is itself
    /// accepted.
    Accepting,
    /// Trace so far is a prefix of some accepted trace but cannot stop here.
    Incomplete,
    /// A violation occurred at event `at`.
    Violated { at: usize },
}

/// An incremental monitor: feed events one at a time, observe verdicts.
///
/// Memory stays proportional to the residual term, not to the number of
/// events fed: the node arena is compacted after every step.
#[derive(Debug, Clone)]
pub struct MonitorSession {
    sys: TermSystem,
    decls: EventTypeDecls,
    cur: TermId,
    fed: usize,
    violated_at: Option<usize>,
    fuel_override: Option<usize>,
}

impl MonitorSession {
    /// Starts a session on the term rooted at `t`. The system must be
    /// contractive; otherwise a transition might not terminate.
    pub fn new(
        sys: &TermSystem,
        t: TermId,
        decls: EventTypeDecls,
    ) -> Result<MonitorSession, SessionError> {
        match check_contractive(sys, t) {
            Contractivity::Contractive => {}
            Contractivity::NotContractive { cycle } => {
                return Err(SessionError::NotContractive(cycle))
            }
        }
        let (sys, cur) = sys.compact(t);
        Ok(MonitorSession {
            sys,
            decls,
            cur,
            fed: 0,
            violated_at: None,
            fuel_override: None,
        })
    }

    /// Overrides the per-transition fuel bound; `None` restores the
    /// system-size default.
    pub fn set_fuel(&mut self, fuel: Option<usize>) {
        self.fuel_override = fuel;
    }

    pub fn feed(&mut self, event: &EventValue) -> Result<FeedVerdict, SessionError> {
        if self.violated_at.is_some() {
            return Err(SessionError::FeedAfterViolation);
        }
        let index = self.fed;
        self.fed += 1;
        let fuel = self.fuel_override.unwrap_or_else(|| default_fuel(&self.sys));
        match step_in_place_with_fuel(&mut self.sys, self.cur, event, &self.decls, fuel)? {
            StepOutcome::Stepped { next, subst } => {
                let next = apply_subst_in_place(&mut self.sys, next, &subst);
                let (sys, root) = self.sys.reduced(next);
                self.sys = sys;
                self.cur = root;
                Ok(FeedVerdict::Ok {
                    accepting: accepts_empty_all(&self.sys)[self.cur.index()],
                })
            }
            StepOutcome::NoStep => {
                self.violated_at = Some(index);
                Ok(FeedVerdict::Violation)
            }
        }
    }

    pub fn status(&self) -> SessionStatus {
        match self.violated_at {
            Some(at) => SessionStatus::Violated { at },
            None if accepts_empty_all(&self.sys)[self.cur.index()] => SessionStatus::Accepting,
            None => SessionStatus::Incomplete,
        }
    }

    /// Number of events fed so far.
    pub fn events_fed(&self) -> usize {
        self.fed
    }

    /// Size of the retained node arena; stays bounded for cyclic
    /// specifications regardless of run length.
    pub fn resident_nodes(&self) -> usize {
        self.sys.len()
    }

    /// The current residual term, rendered.
    pub fn residual(&self) -> String {
        self.sys.render(self.cur)
    }
}
