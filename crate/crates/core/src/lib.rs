//! Deterministic runtime verification over cyclic trace expressions.
//!
//! The crate provides:
//! - a term calculus of trace expressions with concatenation, intersection,
//!   union, shuffle, and parameter binders, represented as finite equation
//!   systems so recursive specifications stay finite ([`terms`]);
//! - event type declarations and the matching function from ground JSON
//!   events to substitutions ([`events`]);
//! - a deterministic, left-preferential small-step interpreter and an
//!   incremental monitor ([`interp`]);
//! - finite trace sets and their composition operators, both plain and
//!   left-preferential ([`traces`], [`semantics`]);
//! - a textual specification language with a parser and pretty printer
//!   ([`dsl`]).

pub mod analysis;
pub mod data;
pub mod dsl;
pub mod events;
pub mod harness;
pub mod interp;
pub mod semantics;
pub mod subst;
pub mod terms;
pub mod traces;

/// Maps a slice in parallel when the `parallel` feature is enabled,
/// sequentially otherwise. Output order follows input order in both cases.
pub fn map_items<T, U, F>(items: &[T], f: F) -> Vec<U>
where
    T: Sync,
    U: Send,
    F: Fn(&T) -> U + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        items.par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        items.iter().map(f).collect()
    }
}

/// Sequential counterpart of [`map_items`], available regardless of
/// features so the two strategies can be benchmarked side by side.
pub fn map_items_seq<T, U, F>(items: &[T], f: F) -> Vec<U>
where
    F: Fn(&T) -> U,
{
    items.iter().map(f).collect()
}
