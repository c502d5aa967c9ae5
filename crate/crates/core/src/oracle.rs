//! Bounded brute-force reference checker and random instance generators.
//!
//! The oracle enumerates abstract runs depth-first (transitions in
//! declaration order), keeps the stack symbolically, and asks the TCW
//! realizer whether the timing constraints can be met. Prefixes whose
//! constraints are already unsatisfiable are pruned, which is sound because
//! extending a run only adds constraints.

use std::collections::BTreeSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::model::{Interval, StackOp, SystemKind, TimedSystem, Transition};
use crate::tcw::{realize, run_to_tcw, Tcw};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum OracleVerdict {
    /// A realizable accepting run with its least timestamps (position 0 included).
    Nonempty { run: Vec<usize>, ts: Vec<u64> },
    /// No accepting run exists at all (the system is acyclic and was
    /// explored completely).
    Empty,
    /// No accepting run up to the given length.
    EmptyUpTo(usize),
}

impl OracleVerdict {
    pub fn is_nonempty(&self) -> bool {
        matches!(self, OracleVerdict::Nonempty { .. })
    }

    pub fn tag(&self) -> &'static str {
        match self {
            OracleVerdict::Nonempty { .. } => "NONEMPTY",
            OracleVerdict::Empty => "EMPTY",
            OracleVerdict::EmptyUpTo(_) => "EMPTY_UPTO",
        }
    }
}

/// Whether the underlying state graph has no cycle.
pub fn is_acyclic(sys: &TimedSystem) -> bool {
    let n = sys.states.len();
    let mut indeg = vec![0usize; n];
    for t in &sys.transitions {
        indeg[t.target] += 1;
    }
    let mut queue: Vec<usize> = (0..n).filter(|&s| indeg[s] == 0).collect();
    let mut seen = 0;
    while let Some(s) = queue.pop() {
        seen += 1;
        for t in sys.transitions.iter().filter(|t| t.source == s) {
            indeg[t.target] -= 1;
            if indeg[t.target] == 0 {
                queue.push(t.target);
            }
        }
    }
    seen == n
}

struct Search<'a> {
    sys: &'a TimedSystem,
    max_len: usize,
    run: Vec<usize>,
    stack: Vec<usize>,
}

impl Search<'_> {
    fn dfs(&mut self, state: usize) -> Option<(Vec<usize>, Vec<u64>)> {
        if self.stack.is_empty() && self.sys.is_final(state) {
            let tcw = run_to_tcw(self.sys, &self.run).expect("search only builds well-formed runs");
            if let Ok(ts) = realize(&tcw) {
                return Some((self.run.clone(), ts));
            }
        }
        if self.run.len() == self.max_len {
            return None;
        }
        for (k, t) in self.sys.transitions.iter().enumerate() {
            if t.source != state {
                continue;
            }
            let saved = self.stack.clone();
            match &t.op {
                StackOp::Nop => {}
                StackOp::Push(s) => self.stack.push(*s),
                StackOp::Pop(s, _) => {
                    if self.stack.last() != Some(s) {
                        continue;
                    }
                    self.stack.pop();
                }
            }
            self.run.push(k);
            let feasible = run_to_tcw(self.sys, &self.run).map(|t| realize(&t).is_ok()).unwrap_or(false);
            if feasible {
                if let Some(found) = self.dfs(t.target) {
                    return Some(found);
                }
            }
            self.run.pop();
            self.stack = saved;
        }
        None
    }
}

/// Searches for a realizable accepting run of length at most `max_len`.
pub fn check(sys: &TimedSystem, max_len: usize) -> OracleVerdict {
    let mut s = Search { sys, max_len, run: Vec::new(), stack: Vec::new() };
    match s.dfs(sys.initial) {
        Some((run, ts)) => OracleVerdict::Nonempty { run, ts },
        None if is_acyclic(sys) && max_len + 1 >= sys.states.len() => OracleVerdict::Empty,
        None => OracleVerdict::EmptyUpTo(max_len),
    }
}

/// Every accepting-shaped run (final state, empty stack) up to `max_len`,
/// realizable or not, in depth-first order. Stops after `limit` runs.
pub fn accepting_runs(sys: &TimedSystem, max_len: usize, limit: usize) -> Vec<Vec<usize>> {
    fn go(sys: &TimedSystem, max_len: usize, limit: usize, state: usize, run: &mut Vec<usize>, stack: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if out.len() >= limit {
            return;
        }
        if stack.is_empty() && sys.is_final(state) && !run.is_empty() {
            out.push(run.clone());
        }
        if run.len() == max_len {
            return;
        }
        for (k, t) in sys.transitions.iter().enumerate() {
            if t.source != state {
                continue;
            }
            let saved = stack.clone();
            match &t.op {
                StackOp::Nop => {}
                StackOp::Push(s) => stack.push(*s),
                StackOp::Pop(s, _) => {
                    if stack.last() != Some(s) {
                        continue;
                    }
                    stack.pop();
                }
            }
            run.push(k);
            go(sys, max_len, limit, t.target, run, stack, out);
            run.pop();
            *stack = saved;
        }
    }
    let mut out = Vec::new();
    go(sys, max_len, limit, sys.initial, &mut Vec::new(), &mut Vec::new(), &mut out);
    out
}

/// Shape of randomly generated systems.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Profile {
    pub max_states: usize,
    pub max_transitions: usize,
    pub max_clocks: usize,
    /// Constants are drawn from `0..=max_constant`.
    pub max_constant: u32,
    pub stack: bool,
    pub acyclic: bool,
}

impl Profile {
    pub fn small_tpda() -> Self {
        Profile { max_states: 5, max_transitions: 7, max_clocks: 2, max_constant: 3, stack: true, acyclic: true }
    }

    pub fn small_ta() -> Self {
        Profile { stack: false, ..Profile::small_tpda() }
    }
}

fn random_interval(rng: &mut ChaCha8Rng, max_c: u32) -> Interval {
    let a = rng.gen_range(0..=max_c);
    if rng.gen_bool(0.35) {
        Interval::at_least(a)
    } else {
        Interval::closed(a, rng.gen_range(a..=max_c))
    }
}

fn random_transition(rng: &mut ChaCha8Rng, p: &Profile, nclocks: usize, src: usize, dst: usize, labels: &[&str]) -> Transition {
    let mut guard = Vec::new();
    for c in 0..nclocks {
        if rng.gen_bool(0.45) {
            guard.push((c, random_interval(rng, p.max_constant)));
        }
    }
    let resets: Vec<usize> = (0..nclocks).filter(|_| rng.gen_bool(0.4)).collect();
    let op = if p.stack {
        match rng.gen_range(0..3) {
            0 => StackOp::Nop,
            1 => StackOp::Push(rng.gen_range(0..2)),
            _ => StackOp::Pop(rng.gen_range(0..2), random_interval(rng, p.max_constant)),
        }
    } else {
        StackOp::Nop
    };
    let label = if rng.gen_bool(0.15) { None } else { Some(labels[rng.gen_range(0..labels.len())].to_string()) };
    Transition { source: src, target: dst, label, guard, resets, op }
}

/// A random system drawn from `profile`, reproducible from `seed`.
pub fn gen_random_system(seed: u64, profile: &Profile) -> TimedSystem {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let p = profile;
    let nstates = rng.gen_range(2..=p.max_states.max(2));
    let nclocks = rng.gen_range(0..=p.max_clocks);
    let ntrans = rng.gen_range(1..=p.max_transitions.max(1));
    let labels = ["a", "b"];
    let mut transitions = Vec::new();
    for _ in 0..ntrans {
        let (src, dst) = if p.acyclic {
            let s = rng.gen_range(0..nstates - 1);
            (s, rng.gen_range(s + 1..nstates))
        } else {
            (rng.gen_range(0..nstates), rng.gen_range(0..nstates))
        };
        transitions.push(random_transition(&mut rng, p, nclocks, src, dst, &labels));
    }
    let mut finals = BTreeSet::new();
    finals.insert(nstates - 1);
    if rng.gen_bool(0.3) {
        finals.insert(rng.gen_range(1..nstates));
    }
    TimedSystem {
        kind: if p.stack { SystemKind::Tpda } else { SystemKind::Ta },
        clocks: (0..nclocks).map(|c| format!("x{c}")).collect(),
        stack: if p.stack { vec!["A".into(), "B".into()] } else { Vec::new() },
        states: (0..nstates).map(|s| format!("s{s}")).collect(),
        initial: 0,
        finals,
        transitions,
    }
}

/// A random TCW with at most `max_points` points, built as the TCW of a
/// random straight-line run, so it is well timed by construction. Constants
/// stay below `m`.
pub fn random_tcw(seed: u64, max_points: usize, m: u32, nclocks: usize, stack: bool) -> (TimedSystem, Tcw) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.gen_range(1..max_points.max(2));
    let p = Profile { max_states: n + 1, max_transitions: n, max_clocks: nclocks, max_constant: m - 1, stack, acyclic: true };
    let mut transitions = Vec::new();
    let mut pending: Vec<usize> = Vec::new();
    for k in 0..n {
        let mut t = random_transition(&mut rng, &p, nclocks, k, k + 1, &["a", "b"]);
        // keep pushes and pops matched
        t.op = match t.op {
            StackOp::Pop(..) if pending.is_empty() => StackOp::Nop,
            StackOp::Pop(_, iv) => StackOp::Pop(pending.pop().unwrap(), iv),
            StackOp::Push(s) => {
                pending.push(s);
                StackOp::Push(s)
            }
            StackOp::Nop => StackOp::Nop,
        };
        transitions.push(t);
    }
    let sys = TimedSystem {
        kind: if stack { SystemKind::Tpda } else { SystemKind::Ta },
        clocks: (0..nclocks).map(|c| format!("x{c}")).collect(),
        stack: if stack { vec!["A".into(), "B".into()] } else { Vec::new() },
        states: (0..=n).map(|s| format!("s{s}")).collect(),
        initial: 0,
        finals: [n].into_iter().collect(),
        transitions,
    };
    let run: Vec<usize> = (0..n).collect();
    let tcw = run_to_tcw(&sys, &run).expect("straight-line run is well formed");
    (sys, tcw)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::parse_system;

    #[test]
    fn finds_delayed_run() {
        let sys = parse_system(
            "system ta\nclocks x\nstates p q\ninitial p\nfinal q\n\
             trans p q label=a guard=[x in [2,3]] reset={} op=nop\n",
        )
        .unwrap();
        match check(&sys, 4) {
            OracleVerdict::Nonempty { run, ts } => {
                assert_eq!(run, vec![0]);
                assert_eq!(ts, vec![0, 2]);
            }
            v => panic!("{v:?}"),
        }
    }

    #[test]
    fn acyclic_empty_is_conclusive() {
        let sys = parse_system(
            "system ta\nclocks x\nstates p q r\ninitial p\nfinal r\n\
             trans p q label=a guard=[x in [2,2]] reset={} op=nop\n\
             trans q r label=b guard=[x in [0,1]] reset={} op=nop\n",
        )
        .unwrap();
        assert_eq!(check(&sys, 5), OracleVerdict::Empty);
        let cyclic = parse_system("system ta\nclocks\nstates p q\ninitial p\nfinal q\ntrans p p label=a guard=[] reset={} op=nop\n").unwrap();
        assert_eq!(check(&cyclic, 3), OracleVerdict::EmptyUpTo(3));
    }

    #[test]
    fn generators_are_reproducible() {
        let p = Profile::small_tpda();
        assert_eq!(gen_random_system(7, &p), gen_random_system(7, &p));
        assert!(crate::model::validate(&gen_random_system(7, &p)).is_empty());
        assert_eq!(random_tcw(3, 8, 4, 2, true).1, random_tcw(3, 8, 4, 2, true).1);
    }
}
