//! Generic bottom-up saturation of a tree automaton.
//!
//! States are numbered in discovery order and processed first-in first-out
//! in fixed-size chunks. Successors of a chunk are computed in parallel and
//! merged sequentially in chunk order, so ids, derivations and counts do not
//! depend on the thread count.

use std::cell::Cell;
use std::hash::Hash;

use indexmap::IndexSet;
use rustc_hash::{FxBuildHasher, FxHashMap};
use rayon::prelude::*;

pub(crate) trait Rules: Sync {
    type State: Clone + Eq + Hash + Send + Sync;
    type Step: Clone + Send + Sync;

    fn leaves(&self) -> Vec<(Self::State, Self::Step)>;
    /// Successors by unary rules; `id` is the id of `s`.
    fn unary(&self, s: &Self::State, id: u32, out: &mut Vec<(Self::State, Self::Step)>);
    fn combine(&self, a: &Self::State, b: &Self::State, ida: u32, idb: u32, out: &mut Vec<(Self::State, Self::Step)>);
    /// Join key when the state is the left operand of a combine.
    fn right_key(&self, s: &Self::State) -> Option<u64>;
    /// Join key when the state is the right operand of a combine.
    fn left_key(&self, s: &Self::State) -> Option<u64>;
    fn accepting(&self, s: &Self::State) -> bool;
    fn describe(&self, s: &Self::State) -> String;
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct SatOptions {
    pub state_cap: usize,
    pub stop_at_accept: bool,
    pub trace: bool,
    pub chunk: usize,
}

pub(crate) enum SatOutcome {
    Accepted(u32),
    Saturated,
    Capped,
}

pub(crate) struct Saturation<R: Rules> {
    pub states: IndexSet<R::State, FxBuildHasher>,
    pub steps: Vec<R::Step>,
    pub productions: u64,
    pub outcome: SatOutcome,
}

/// New successors of one state, and how many were derived in total.
type Derived<R> = (Vec<(<R as Rules>::State, <R as Rules>::Step)>, u64);

pub(crate) fn saturate<R: Rules>(rules: &R, opts: SatOptions) -> Saturation<R> {
    let mut states: IndexSet<R::State, FxBuildHasher> = IndexSet::default();
    let mut steps: Vec<R::Step> = Vec::new();
    let mut as_left: FxHashMap<u64, Vec<u32>> = FxHashMap::default();
    let mut as_right: FxHashMap<u64, Vec<u32>> = FxHashMap::default();
    let mut productions = 0u64;
    let first_accept = Cell::new(None);

    // inserts a state, returns Some(outcome) when saturation should stop
    let insert = |s: R::State,
                      step: R::Step,
                      states: &mut IndexSet<R::State, FxBuildHasher>,
                      steps: &mut Vec<R::Step>,
                      as_left: &mut FxHashMap<u64, Vec<u32>>,
                      as_right: &mut FxHashMap<u64, Vec<u32>>|
     -> Option<SatOutcome> {
        if states.contains(&s) {
            return None;
        }
        if states.len() >= opts.state_cap {
            return Some(first_accept.get().map_or(SatOutcome::Capped, SatOutcome::Accepted));
        }
        let id = states.len() as u32;
        if let Some(k) = rules.right_key(&s) {
            as_left.entry(k).or_default().push(id);
        }
        if let Some(k) = rules.left_key(&s) {
            as_right.entry(k).or_default().push(id);
        }
        if opts.trace {
            eprintln!("#{id} {}", rules.describe(&s));
        }
        let acc = rules.accepting(&s);
        states.insert(s);
        steps.push(step);
        if acc && opts.stop_at_accept {
            return Some(SatOutcome::Accepted(id));
        }
        if acc && first_accept.get().is_none() {
            first_accept.set(Some(id));
        }
        None
    };

    let leaves = rules.leaves();
    productions += leaves.len() as u64;
    for (s, st) in leaves {
        if let Some(o) = insert(s, st, &mut states, &mut steps, &mut as_left, &mut as_right) {
            return Saturation { states, steps, productions, outcome: o };
        }
    }

    let mut next = 0usize;
    while next < states.len() {
        let end = (next + opts.chunk).min(states.len());
        let batch: Vec<Derived<R>> = (next..end)
            .into_par_iter()
            .map(|a| {
                let id = a as u32;
                let s = &states[a];
                let mut out = Vec::new();
                rules.unary(s, id, &mut out);
                if let Some(k) = rules.right_key(s) {
                    if let Some(partners) = as_right.get(&k) {
                        let cut = partners.partition_point(|&t| t <= id);
                        for &t in &partners[..cut] {
                            rules.combine(s, &states[t as usize], id, t, &mut out);
                        }
                    }
                }
                if let Some(k) = rules.left_key(s) {
                    if let Some(partners) = as_left.get(&k) {
                        let cut = partners.partition_point(|&t| t < id);
                        for &t in &partners[..cut] {
                            rules.combine(&states[t as usize], s, t, id, &mut out);
                        }
                    }
                }
                let derived = out.len() as u64;
                out.retain(|(q, _)| !states.contains(q));
                (out, derived)
            })
            .collect();
        for (out, derived) in batch {
            productions += derived;
            for (s, st) in out {
                if let Some(o) = insert(s, st, &mut states, &mut steps, &mut as_left, &mut as_right) {
                    return Saturation { states, steps, productions, outcome: o };
                }
            }
        }
        next = end;
    }
    let outcome = first_accept.get().map_or(SatOutcome::Saturated, SatOutcome::Accepted);
    Saturation { states, steps, productions, outcome }
}
