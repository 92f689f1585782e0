//! Finite event traces and the set-level operators on them: concatenation,
//! prefix, and the three shuffle variants (plain, left-preferential, and
//! left-preferential relative to a set of competing traces).
//!
//! Each shuffle exists twice: an operational interleaver used everywhere,
//! and a literal enumerator over index functions in [`index_oracle`] kept
//! as an independent cross-check. The two are proved against each other
//! exhaustively in the test suite.

use std::collections::BTreeSet;

/// A finite trace is a sequence of events; the element type only needs
/// equality and an order for canonical set representation.
pub type Trace<E> = Vec<E>;

/// Canonical finite set of traces.
pub type TraceSet<E> = BTreeSet<Trace<E>>;

/// Concatenation of two traces.
pub fn concat<E: Clone>(u: &[E], v: &[E]) -> Trace<E> {
    let mut out = Vec::with_capacity(u.len() + v.len());
    out.extend_from_slice(u);
    out.extend_from_slice(v);
    out
}

/// Element-wise concatenation of two trace sets.
pub fn concat_sets<E: Clone + Ord>(a: &TraceSet<E>, b: &TraceSet<E>) -> TraceSet<E> {
    let mut out = TraceSet::new();
    for u in a {
        for v in b {
            out.insert(concat(u, v));
        }
    }
    out
}

/// Whether `u` is a (not necessarily proper) prefix of `v`.
pub fn is_prefix<E: PartialEq>(u: &[E], v: &[E]) -> bool {
    u.len() <= v.len() && u.iter().zip(v.iter()).all(|(a, b)| a == b)
}

/// Whether `u` is a prefix of some member of `set`.
pub fn is_prefix_of_set<E: PartialEq + Ord>(u: &[E], set: &TraceSet<E>) -> bool {
    set.iter().any(|v| is_prefix(u, v))
}

/// All prefixes of `u`, from the empty trace to `u` itself.
pub fn prefixes<E: Clone>(u: &[E]) -> Vec<Trace<E>> {
    (0..=u.len()).map(|n| u[..n].to_vec()).collect()
}

/// How the right operand of a shuffle may move while the left still has
/// events pending.
#[derive(Clone, Copy)]
enum RightPolicy<'a, E> {
    /// Any interleaving.
    Free,
    /// A right event may overtake pending left events only if it differs
    /// from the next pending left event.
    NotNextLeft,
    /// A right event may overtake only if no competing trace continues
    /// with the same event at the position the next left event would take.
    NotAnyCompetitor(&'a TraceSet<E>),
}

impl<E: PartialEq> RightPolicy<'_, E> {
    /// `taken` left events are already placed, `next_left` is pending.
    fn allows(&self, right_event: &E, taken: usize, next_left: &E) -> bool {
        match self {
            RightPolicy::Free => true,
            RightPolicy::NotNextLeft => right_event != next_left,
            RightPolicy::NotAnyCompetitor(set) => set
                .iter()
                .all(|c| c.get(taken) != Some(right_event)),
        }
    }
}

fn interleave<E: Clone + Ord>(u: &[E], v: &[E], policy: RightPolicy<'_, E>) -> TraceSet<E> {
    let mut out = TraceSet::new();
    let mut acc = Vec::with_capacity(u.len() + v.len());
    go(u, v, 0, 0, &mut acc, &policy, &mut out);
    return out;

    fn go<E: Clone + Ord>(
        u: &[E],
        v: &[E],
        i: usize,
        j: usize,
        acc: &mut Trace<E>,
        policy: &RightPolicy<'_, E>,
        out: &mut TraceSet<E>,
    ) {
        if i == u.len() && j == v.len() {
            out.insert(acc.clone());
            return;
        }
        if i < u.len() {
            acc.push(u[i].clone());
            go(u, v, i + 1, j, acc, policy, out);
            acc.pop();
        }
        if j < v.len() {
            // With left events pending, the policy decides whether the
            // right event may come first. `i` is exactly the position the
            // next left event would occupy.
            let allowed = i == u.len() || policy.allows(&v[j], i, &u[i]);
            if allowed {
                acc.push(v[j].clone());
                go(u, v, i, j + 1, acc, policy, out);
                acc.pop();
            }
        }
    }
}

/// All interleavings of `u` and `v`.
pub fn shuffle<E: Clone + Ord>(u: &[E], v: &[E]) -> TraceSet<E> {
    interleave(u, v, RightPolicy::Free)
}

/// Interleavings where the left operand takes precedence: a right event may
/// overtake pending left events only when it differs from the next of them.
pub fn lp_shuffle<E: Clone + Ord>(u: &[E], v: &[E]) -> TraceSet<E> {
    interleave(u, v, RightPolicy::NotNextLeft)
}

/// Left-preferential shuffle of `u` and `v` relative to the competing
/// traces in `against`: a right event may overtake pending left events only
/// when no competitor continues with that same event at the position the
/// next left event would take. With `against` empty this is [`shuffle`];
/// with `against = {u}` it is [`lp_shuffle`].
pub fn glp_shuffle<E: Clone + Ord>(u: &[E], v: &[E], against: &TraceSet<E>) -> TraceSet<E> {
    interleave(u, v, RightPolicy::NotAnyCompetitor(against))
}

/// Union over all pairs of the plain shuffle.
pub fn shuffle_sets<E: Clone + Ord>(a: &TraceSet<E>, b: &TraceSet<E>) -> TraceSet<E> {
    let mut out = TraceSet::new();
    for u in a {
        for v in b {
            out.extend(shuffle(u, v));
        }
    }
    out
}

/// Literal enumeration of the shuffle operators through their defining
/// index functions: an interleaving is a partition of output positions into
/// an increasing image for each operand. Kept deliberately close to the
/// defining conditions as an oracle for the operational versions.
pub mod index_oracle {
    use super::{Trace, TraceSet};

    /// All ways to pick `k` positions out of `n`, each sorted increasingly.
    fn position_choices(n: usize, k: usize) -> Vec<Vec<usize>> {
        let mut out = Vec::new();
        let mut cur = Vec::with_capacity(k);
        choose(0, n, k, &mut cur, &mut out);
        return out;

        fn choose(
            start: usize,
            n: usize,
            k: usize,
            cur: &mut Vec<usize>,
            out: &mut Vec<Vec<usize>>,
        ) {
            if cur.len() == k {
                out.push(cur.clone());
                return;
            }
            for p in start..n {
                cur.push(p);
                choose(p + 1, n, k, cur, out);
                cur.pop();
            }
        }
    }

    /// The output trace determined by assigning `u` to positions `n1` and
    /// `v` to the complementary positions.
    fn build<E: Clone>(u: &[E], v: &[E], n1: &[usize]) -> Trace<E> {
        let len = u.len() + v.len();
        let mut out: Vec<Option<E>> = vec![None; len];
        for (idx, &p) in n1.iter().enumerate() {
            out[p] = Some(u[idx].clone());
        }
        let mut j = 0;
        for slot in out.iter_mut() {
            if slot.is_none() {
                *slot = Some(v[j].clone());
                j += 1;
            }
        }
        out.into_iter().map(Option::unwrap).collect()
    }

    /// Positions assigned to `v`: the complement of `n1`.
    fn complement(len: usize, n1: &[usize]) -> Vec<usize> {
        (0..len).filter(|p| !n1.contains(p)).collect()
    }

    /// The left-preference condition for one candidate pair of index
    /// functions: for every right index, the first left event placed after
    /// it must be excluded by `blocked`.
    fn preference_ok<E>(
        v: &[E],
        n1: &[usize],
        n2: &[usize],
        blocked: impl Fn(usize, &E) -> bool,
    ) -> bool {
        debug_assert!(n1.windows(2).all(|w| w[0] < w[1]));
        debug_assert!(n2.windows(2).all(|w| w[0] < w[1]));
        n2.iter().enumerate().all(|(idx2, &p2)| {
            match n1.iter().position(|&p1| p2 < p1) {
                // Index (not position) of the first left event placed
                // later; the condition constrains the event there.
                Some(m) => !blocked(m, &v[idx2]),
                // No left event follows: nothing to take precedence.
                None => true,
            }
        })
    }

    fn enumerate<E: Clone + Ord>(
        u: &[E],
        v: &[E],
        keep: impl Fn(&[usize], &[usize]) -> bool,
    ) -> TraceSet<E> {
        let len = u.len() + v.len();
        let mut out = TraceSet::new();
        for n1 in position_choices(len, u.len()) {
            let n2 = complement(len, &n1);
            if keep(&n1, &n2) {
                out.insert(build(u, v, &n1));
            }
        }
        out
    }

    pub fn shuffle<E: Clone + Ord>(u: &[E], v: &[E]) -> TraceSet<E> {
        enumerate(u, v, |_, _| true)
    }

    pub fn lp_shuffle<E: Clone + Ord>(u: &[E], v: &[E]) -> TraceSet<E> {
        enumerate(u, v, |n1, n2| {
            preference_ok(v, n1, n2, |m, e| u[m] == *e)
        })
    }

    pub fn glp_shuffle<E: Clone + Ord>(
        u: &[E],
        v: &[E],
        against: &TraceSet<E>,
    ) -> TraceSet<E> {
        enumerate(u, v, |n1, n2| {
            preference_ok(v, n1, n2, |m, e| {
                against.iter().any(|c| c.get(m) == Some(e))
            })
        })
    }
}
