//! Timed-constraint words.
//!
//! A TCW is a word of positions `0..=n` with a successor chain and two
//! families of matching edges: clock edges (from the last reset of a clock to
//! a guard on it) and stack edges (from a push to its pop). Position 0 is a
//! silent start point that resets every clock.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{Interval, StackOp, TimedSystem};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum EdgeKind {
    Clock(usize),
    Stack,
}

impl fmt::Display for EdgeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EdgeKind::Clock(c) => write!(f, "clock:{c}"),
            EdgeKind::Stack => write!(f, "stack"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TcwEdge {
    pub src: usize,
    pub dst: usize,
    pub interval: Interval,
    pub kind: EdgeKind,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Tcw {
    /// One label per position; position 0 is always silent.
    pub labels: Vec<Option<String>>,
    /// Transition index fired at each position, if known. Position 0 has none.
    pub trans: Vec<Option<usize>>,
    /// Bitmask of clocks reset at each position.
    pub resets: Vec<u32>,
    pub edges: Vec<TcwEdge>,
}

/// A sequence of transition indices starting in the initial state.
pub type AbstractRun = Vec<usize>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TcwError {
    #[error("transition {index} out of range")]
    UnknownTransition { index: usize },
    #[error("step {step}: transition does not start where the previous one ended")]
    Disconnected { step: usize },
    #[error("step {step}: pop without matching push")]
    PopWithoutPush { step: usize },
    #[error("step {step}: popped symbol differs from the pushed one")]
    SymbolMismatch { step: usize },
}

impl Tcw {
    /// Number of non-start positions.
    pub fn len(&self) -> usize {
        self.labels.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Builds a TCW from labels and edges, deriving reset masks from the
    /// clock-edge sources.
    pub fn from_edges(labels: Vec<Option<String>>, edges: Vec<TcwEdge>) -> Self {
        let n = labels.len();
        let mut resets = vec![0u32; n];
        for e in &edges {
            if let EdgeKind::Clock(c) = e.kind {
                resets[e.src] |= 1 << c;
            }
        }
        let all = resets.iter().fold(0, |a, r| a | r);
        resets[0] = all;
        Tcw { labels, trans: vec![None; n], resets, edges }
    }

    pub fn clock_count(&self) -> usize {
        let m = self.resets.iter().fold(0u32, |a, r| a | r);
        let from_edges = self
            .edges
            .iter()
            .filter_map(|e| match e.kind {
                EdgeKind::Clock(c) => Some(c + 1),
                _ => None,
            })
            .max()
            .unwrap_or(0);
        (32 - m.leading_zeros() as usize).max(from_edges)
    }

    pub fn has_stack_edges(&self) -> bool {
        self.edges.iter().any(|e| e.kind == EdgeKind::Stack)
    }
}

/// Translates an abstract run into its TCW.
pub fn run_to_tcw(sys: &TimedSystem, run: &[usize]) -> Result<Tcw, TcwError> {
    let n = run.len();
    let all = sys.all_clocks_mask();
    let mut labels = vec![None];
    let mut trans = vec![None];
    let mut resets = vec![all];
    let mut edges = Vec::new();
    let mut last_reset = vec![0usize; sys.clocks.len()];
    let mut stack: Vec<(usize, usize)> = Vec::new();
    let mut state = sys.initial;
    for (k, &ti) in run.iter().enumerate() {
        let pos = k + 1;
        let t = sys.transitions.get(ti).ok_or(TcwError::UnknownTransition { index: ti })?;
        if t.source != state {
            return Err(TcwError::Disconnected { step: pos });
        }
        state = t.target;
        for &(c, iv) in &t.guard {
            edges.push(TcwEdge { src: last_reset[c], dst: pos, interval: iv, kind: EdgeKind::Clock(c) });
        }
        match &t.op {
            StackOp::Nop => {}
            StackOp::Push(s) => stack.push((*s, pos)),
            StackOp::Pop(s, iv) => {
                let (sym, from) = stack.pop().ok_or(TcwError::PopWithoutPush { step: pos })?;
                if sym != *s {
                    return Err(TcwError::SymbolMismatch { step: pos });
                }
                edges.push(TcwEdge { src: from, dst: pos, interval: *iv, kind: EdgeKind::Stack });
            }
        }
        for &c in &t.resets {
            last_reset[c] = pos;
        }
        labels.push(t.label.clone());
        trans.push(Some(ti));
        resets.push(t.reset_mask());
    }
    debug_assert_eq!(labels.len(), n + 1);
    edges.sort();
    Ok(Tcw { labels, trans, resets, edges })
}

/// Whether `run` is accepting in the untimed sense: it starts in the initial
/// state, is connected, matches pushes with pops, ends with an empty stack
/// in a final state.
pub fn is_accepting_shape(sys: &TimedSystem, run: &[usize]) -> bool {
    let mut state = sys.initial;
    let mut stack = Vec::new();
    for &ti in run {
        let Some(t) = sys.transitions.get(ti) else { return false };
        if t.source != state {
            return false;
        }
        match &t.op {
            StackOp::Nop => {}
            StackOp::Push(s) => stack.push(*s),
            StackOp::Pop(s, _) => {
                if stack.pop() != Some(*s) {
                    return false;
                }
            }
        }
        state = t.target;
    }
    stack.is_empty() && sys.is_final(state)
}

/// Checks the nesting conditions every TCW of a run satisfies: stack edges are
/// well nested and never share endpoints, and edges of one clock do not
/// overlap.
pub fn check_well_timed(tcw: &Tcw) -> bool {
    let n = tcw.labels.len();
    if tcw.edges.iter().any(|e| e.src >= e.dst || e.dst >= n) {
        return false;
    }
    let stack: Vec<&TcwEdge> = tcw.edges.iter().filter(|e| e.kind == EdgeKind::Stack).collect();
    let mut touched = vec![false; n];
    for e in &stack {
        if touched[e.src] || touched[e.dst] {
            return false;
        }
        touched[e.src] = true;
        touched[e.dst] = true;
    }
    for a in &stack {
        for b in &stack {
            if a.src < b.src && b.src < a.dst && b.dst > a.dst {
                return false;
            }
        }
    }
    for a in &tcw.edges {
        if a.kind == EdgeKind::Stack {
            continue;
        }
        for b in &tcw.edges {
            if b.kind != a.kind {
                continue;
            }
            if a.src < b.src && a.dst > b.src {
                return false;
            }
            // one guard per clock per position
            if a.dst == b.dst && a != b {
                return false;
            }
        }
    }
    true
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("constraints are unsatisfiable (negative cycle through position {witness})")]
pub struct Unrealizable {
    pub witness: usize,
}

/// Difference constraints of the TCW as `(u, v, w)` meaning `ts(v) - ts(u) <= w`.
fn constraints(tcw: &Tcw) -> Vec<(usize, usize, i64)> {
    let mut out = Vec::new();
    for k in 0..tcw.len() {
        out.push((k + 1, k, 0));
    }
    for e in &tcw.edges {
        if let Some(b) = e.interval.up {
            out.push((e.src, e.dst, b as i64));
        }
        out.push((e.dst, e.src, -(e.interval.low as i64)));
    }
    out
}

/// Least non-negative integer timestamps satisfying the TCW, with `ts[0] = 0`.
pub fn realize(tcw: &Tcw) -> Result<Vec<u64>, Unrealizable> {
    solve(tcw, constraints(tcw))
}

/// Like [`realize`], with some positions pinned to given timestamps.
pub fn realize_pinned(tcw: &Tcw, pins: &[(usize, u64)]) -> Result<Vec<u64>, Unrealizable> {
    let mut cons = constraints(tcw);
    for &(p, t) in pins {
        cons.push((0, p, t as i64));
        cons.push((p, 0, -(t as i64)));
    }
    let ts = solve(tcw, cons)?;
    assert!(pins.iter().all(|&(p, t)| ts[p] == t), "pinned timestamps not honored");
    Ok(ts)
}

fn solve(tcw: &Tcw, cons: Vec<(usize, usize, i64)>) -> Result<Vec<u64>, Unrealizable> {
    let n = tcw.labels.len();
    // dist[v] = shortest path v ->* 0 in the constraint graph
    let mut dist: Vec<Option<i64>> = vec![None; n];
    dist[0] = Some(0);
    for round in 0..=n {
        let mut changed = None;
        for &(u, v, w) in &cons {
            if let Some(dv) = dist[v] {
                let cand = dv + w;
                if dist[u].is_none_or(|du| cand < du) {
                    dist[u] = Some(cand);
                    changed = Some(u);
                }
            }
        }
        match changed {
            None => break,
            Some(u) if round == n => return Err(Unrealizable { witness: u }),
            _ => {}
        }
    }
    let ts: Vec<u64> = dist
        .iter()
        .map(|d| (-d.expect("every position reaches 0 along the successor chain")) as u64)
        .collect();
    assert!(satisfies(tcw, &ts), "realize produced timestamps violating the TCW");
    Ok(ts)
}

/// Independent check that `ts` satisfies every constraint of the TCW.
pub fn satisfies(tcw: &Tcw, ts: &[u64]) -> bool {
    if ts.len() != tcw.labels.len() || ts.first() != Some(&0) {
        return false;
    }
    if ts.windows(2).any(|w| w[0] > w[1]) {
        return false;
    }
    tcw.edges.iter().all(|e| e.interval.contains(ts[e.dst] as i64 - ts[e.src] as i64))
}

/// Rational-relaxation feasibility via Floyd-Warshall over `f64`.
pub fn rational_feasible(tcw: &Tcw) -> bool {
    let n = tcw.labels.len();
    let mut d = vec![vec![f64::INFINITY; n]; n];
    for (i, row) in d.iter_mut().enumerate() {
        row[i] = 0.0;
    }
    for (u, v, w) in constraints(tcw) {
        let w = w as f64;
        if w < d[u][v] {
            d[u][v] = w;
        }
    }
    for k in 0..n {
        for i in 0..n {
            if d[i][k] == f64::INFINITY {
                continue;
            }
            for j in 0..n {
                let c = d[i][k] + d[k][j];
                if c < d[i][j] {
                    d[i][j] = c;
                }
            }
        }
    }
    (0..n).all(|i| d[i][i] >= 0.0)
}

/// The timed word of a realized TCW; the silent start point is dropped.
pub fn to_timed_word(tcw: &Tcw, ts: &[u64]) -> Vec<(Option<String>, u64)> {
    tcw.labels.iter().zip(ts).skip(1).map(|(l, t)| (l.clone(), *t)).collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PositionJson {
    pub idx: usize,
    pub label: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ts: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trans: Option<usize>,
    #[serde(default)]
    pub resets: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EdgeJson {
    pub src: usize,
    pub dst: usize,
    pub low: u32,
    pub up: Option<u32>,
    pub kind: String,
}

/// Serialized TCW, optionally with timestamps.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WitnessJson {
    pub positions: Vec<PositionJson>,
    pub edges: Vec<EdgeJson>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("malformed TCW document: {0}")]
pub struct TcwFormatError(pub String);

impl WitnessJson {
    pub fn from_tcw(tcw: &Tcw, ts: Option<&[u64]>) -> Self {
        let positions = (0..tcw.labels.len())
            .map(|i| PositionJson {
                idx: i,
                label: tcw.labels[i].clone().unwrap_or_else(|| "eps".into()),
                ts: ts.map(|t| t[i]),
                trans: tcw.trans[i],
                resets: tcw.resets[i],
            })
            .collect();
        let edges = tcw
            .edges
            .iter()
            .map(|e| EdgeJson { src: e.src, dst: e.dst, low: e.interval.low, up: e.interval.up, kind: e.kind.to_string() })
            .collect();
        WitnessJson { positions, edges }
    }

    pub fn to_tcw(&self) -> Result<(Tcw, Option<Vec<u64>>), TcwFormatError> {
        let n = self.positions.len();
        if n == 0 {
            return Err(TcwFormatError("no positions".into()));
        }
        for (i, p) in self.positions.iter().enumerate() {
            if p.idx != i {
                return Err(TcwFormatError(format!("position {i} has idx {}", p.idx)));
            }
        }
        let mut edges = Vec::new();
        for e in &self.edges {
            let kind = if e.kind == "stack" {
                EdgeKind::Stack
            } else if let Some(c) = e.kind.strip_prefix("clock:").and_then(|c| c.parse().ok()) {
                EdgeKind::Clock(c)
            } else {
                return Err(TcwFormatError(format!("unknown edge kind `{}`", e.kind)));
            };
            if e.src >= n || e.dst >= n || e.src >= e.dst {
                return Err(TcwFormatError(format!("bad edge {}->{}", e.src, e.dst)));
            }
            if e.up.is_some_and(|u| u < e.low) {
                return Err(TcwFormatError(format!("empty interval on edge {}->{}", e.src, e.dst)));
            }
            edges.push(TcwEdge { src: e.src, dst: e.dst, interval: Interval { low: e.low, up: e.up }, kind });
        }
        let labels: Vec<Option<String>> = self
            .positions
            .iter()
            .map(|p| if p.label == "eps" { None } else { Some(p.label.clone()) })
            .collect();
        let mut tcw = Tcw::from_edges(labels, edges);
        tcw.labels[0] = None;
        for (i, p) in self.positions.iter().enumerate() {
            tcw.trans[i] = p.trans;
            tcw.resets[i] |= p.resets;
        }
        let ts = if self.positions.iter().all(|p| p.ts.is_some()) {
            Some(self.positions.iter().map(|p| p.ts.unwrap()).collect())
        } else {
            None
        };
        Ok((tcw, ts))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::parse_system;

    fn sys() -> TimedSystem {
        parse_system(
            "system tpda\nclocks x\nstack a\nstates p q r\ninitial p\nfinal r\n\
             trans p q label=a guard=[x in [1,2]] reset={x} op=push(a)\n\
             trans q q label=b guard=[x in [0,1]] reset={} op=nop\n\
             trans q r label=c guard=[x in [3,inf]] reset={} op=pop(a,[2,4])\n",
        )
        .unwrap()
    }

    #[test]
    fn run_edges() {
        let s = sys();
        let t = run_to_tcw(&s, &[0, 1, 2]).unwrap();
        assert_eq!(t.len(), 3);
        let mut pairs: Vec<(usize, usize, EdgeKind)> = t.edges.iter().map(|e| (e.src, e.dst, e.kind)).collect();
        pairs.sort();
        assert_eq!(
            pairs,
            vec![(0, 1, EdgeKind::Clock(0)), (1, 2, EdgeKind::Clock(0)), (1, 3, EdgeKind::Clock(0)), (1, 3, EdgeKind::Stack)]
        );
        assert!(check_well_timed(&t));
        assert!(is_accepting_shape(&s, &[0, 1, 2]));
        assert!(!is_accepting_shape(&s, &[0, 1]));
    }

    #[test]
    fn realize_minimal() {
        let s = sys();
        let t = run_to_tcw(&s, &[0, 1, 2]).unwrap();
        let ts = realize(&t).unwrap();
        // x reset at 1 (ts>=1); b within 1; c needs x>=3 and pop age in [2,4]
        assert_eq!(ts, vec![0, 1, 1, 4]);
        assert!(satisfies(&t, &ts));
        assert!(rational_feasible(&t));
        assert_eq!(to_timed_word(&t, &ts), vec![(Some("a".into()), 1), (Some("b".into()), 1), (Some("c".into()), 4)]);
    }

    #[test]
    fn unrealizable_detected() {
        let s = parse_system(
            "system ta\nclocks x y\nstates p q\ninitial p\nfinal q\n\
             trans p p label=a guard=[x in [2,2]] reset={x} op=nop\n\
             trans p q label=b guard=[x in [0,0] & y in [1,1]] reset={} op=nop\n",
        )
        .unwrap();
        let t = run_to_tcw(&s, &[0, 1]).unwrap();
        assert!(realize(&t).is_err());
        assert!(!rational_feasible(&t));
    }

    #[test]
    fn pop_errors() {
        let s = sys();
        assert_eq!(run_to_tcw(&s, &[1]), Err(TcwError::Disconnected { step: 1 }));
        let mut s2 = s.clone();
        s2.transitions[0].op = StackOp::Nop;
        assert_eq!(run_to_tcw(&s2, &[0, 2]), Err(TcwError::PopWithoutPush { step: 2 }));
    }

    #[test]
    fn json_round_trip() {
        let s = sys();
        let t = run_to_tcw(&s, &[0, 1, 2]).unwrap();
        let ts = realize(&t).unwrap();
        let j = WitnessJson::from_tcw(&t, Some(&ts));
        let text = serde_json::to_string(&j).unwrap();
        let back: WitnessJson = serde_json::from_str(&text).unwrap();
        let (t2, ts2) = back.to_tcw().unwrap();
        assert_eq!(t2, t);
        assert_eq!(ts2.unwrap(), ts);
    }

    #[test]
    fn crossing_stack_edges_not_well_timed() {
        let iv = Interval::any();
        let e = |s, d| TcwEdge { src: s, dst: d, interval: iv, kind: EdgeKind::Stack };
        let t = Tcw::from_edges(vec![None; 5], vec![e(1, 3), e(2, 4)]);
        assert!(!check_well_timed(&t));
        let t = Tcw::from_edges(vec![None; 5], vec![e(1, 4), e(2, 3)]);
        assert!(check_well_timed(&t));
    }
}
