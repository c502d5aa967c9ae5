//! Rebuilding a term from derivation records, and checking runs.

use super::canon::{CState, CStep, Canon, DUMMY16, MAXK};
use super::explicit::{label_of, XState, XStep};
use super::saturate::Saturation;
use crate::asys::SysView;
use crate::model::{StackOp, TimedSystem};
use crate::tcw::{realize, run_to_tcw, EdgeKind, Tcw};
use crate::treeterm::{color_bound, decompose, eval, Color, Ktt, VertexLabel, DUMMY};

use super::product::product_accepts_term;
use super::Witness;

fn canon_label(c: &Canon, d: u16) -> VertexLabel {
    if d == DUMMY16 {
        VertexLabel::new(None, Some(DUMMY))
    } else {
        VertexLabel::new(c.sys.transitions[d as usize].label.clone(), Some(d as u32))
    }
}

fn apply_drop(mut t: Ktt, cols: &mut Vec<Color>, drop: u16) -> Ktt {
    for k in (0..MAXK).rev() {
        if drop & (1 << k) != 0 {
            t = Ktt::forget(cols[k], t);
            cols.remove(k);
        }
    }
    t
}

fn new_color(fresh: &mut Color) -> Color {
    *fresh += 1;
    *fresh
}

/// Replays canonical derivations with fresh colors; every merged state gets
/// brand-new colors, so renames never collide.
fn replay_canon(c: &Canon, sat: &Saturation<Canon>, id: u32, fresh: &mut Color) -> (Ktt, Vec<Color>) {
    let s: &CState = &sat.states[id as usize];
    match &sat.steps[id as usize] {
        CStep::Leaf => {
            let (i, j) = (new_color(fresh), new_color(fresh));
            let t = Ktt::Succ { a: canon_label(c, s.delta[0]), i, b: canon_label(c, s.delta[1]), j };
            (t, vec![i, j])
        }
        CStep::Forget { p, k } => {
            let (t, mut cols) = replay_canon(c, sat, *p, fresh);
            let t = Ktt::forget(cols[*k as usize], t);
            cols.remove(*k as usize);
            (t, cols)
        }
        CStep::Stack { p, drop } => {
            let ps = &sat.states[*p as usize];
            let (t, mut cols) = replay_canon(c, sat, *p, fresh);
            let (l, r) = (ps.left as usize, ps.n as usize - 1);
            let (_, iv) = c.inf(ps.delta[r]).pop.expect("stack edge ends at a pop");
            let e = Ktt::Edge {
                a: canon_label(c, ps.delta[l]),
                i: cols[l],
                b: canon_label(c, ps.delta[r]),
                j: cols[r],
                interval: iv,
                kind: EdgeKind::Stack,
            };
            let t = apply_drop(Ktt::combine(t, e), &mut cols, *drop);
            (t, cols)
        }
        CStep::Clock { p, x, src, new, drop } => {
            let ps = &sat.states[*p as usize];
            let (t, mut cols) = replay_canon(c, sat, *p, fresh);
            let src = *src as usize;
            let src_delta = if *new {
                cols.insert(src, new_color(fresh));
                // the new point is hanging, so later drops never move it
                s.delta[src]
            } else {
                ps.delta[src]
            };
            let r = cols.len() - 1;
            let dr = ps.delta[ps.n as usize - 1];
            let iv = c.inf(dr).guard[*x as usize].expect("clock edge ends at a guard");
            let e = Ktt::Edge {
                a: canon_label(c, src_delta),
                i: cols[src],
                b: canon_label(c, dr),
                j: cols[r],
                interval: iv,
                kind: EdgeKind::Clock(*x as usize),
            };
            let t = apply_drop(Ktt::combine(t, e), &mut cols, *drop);
            (t, cols)
        }
        CStep::Combine { a, b, map1, map2, drop } => {
            let (ta, ca) = replay_canon(c, sat, *a, fresh);
            let (tb, cb) = replay_canon(c, sat, *b, fresh);
            let n = 1 + map1[..ca.len()].iter().chain(&map2[..cb.len()]).copied().max().unwrap() as usize;
            let mut cols: Vec<Color> = (0..n).map(|_| new_color(fresh)).collect();
            let mut ta = ta;
            for (p, &old) in ca.iter().enumerate() {
                ta = Ktt::rename(old, cols[map1[p] as usize], ta);
            }
            let mut tb = tb;
            for (j, &old) in cb.iter().enumerate() {
                tb = Ktt::rename(old, cols[map2[j] as usize], tb);
            }
            let t = apply_drop(Ktt::combine(ta, tb), &mut cols, *drop);
            (t, cols)
        }
    }
}

fn replay_explicit(view: &SysView, sat: &Saturation<super::explicit::Explicit>, id: u32) -> Ktt {
    let (_, s): &XState = &sat.states[id as usize];
    match &sat.steps[id as usize] {
        XStep::Leaf => Ktt::Succ {
            a: label_of(view, s.delta[0]),
            i: s.points[0],
            b: label_of(view, s.delta[1]),
            j: s.points[1],
        },
        XStep::Rename { p, i, j } => Ktt::rename(*i, *j, replay_explicit(view, sat, *p)),
        XStep::Forget { p, i } => Ktt::forget(*i, replay_explicit(view, sat, *p)),
        XStep::Edge { p, i, j, interval, kind } => {
            let e = Ktt::Edge {
                a: label_of(view, s.delta_of(*i)),
                i: *i,
                b: label_of(view, s.delta_of(*j)),
                j: *j,
                interval: *interval,
                kind: *kind,
            };
            Ktt::combine(replay_explicit(view, sat, *p), e)
        }
        XStep::Combine { a, b } => Ktt::combine(replay_explicit(view, sat, *a), replay_explicit(view, sat, *b)),
    }
}

pub(crate) fn canon_term(c: &Canon, sat: &Saturation<Canon>, id: u32) -> Ktt {
    let mut fresh = 0;
    let (mut t, cols) = replay_canon(c, sat, id, &mut fresh);
    for &col in cols[1..cols.len() - 1].iter().rev() {
        t = Ktt::forget(col, t);
    }
    t
}

pub(crate) fn explicit_term(view: &SysView, sat: &Saturation<super::explicit::Explicit>, id: u32) -> Ktt {
    let mut t = replay_explicit(view, sat, id);
    let (_, s) = &sat.states[id as usize];
    for &col in s.points[1..s.points.len() - 1].iter().rev() {
        t = Ktt::forget(col, t);
    }
    t
}

/// Turns an accepted term into a checked witness. Any failure here means the
/// engine derived something it should not have.
pub(crate) fn finish(sys: &TimedSystem, m: u32, k: usize, term: Ktt) -> Result<Witness, String> {
    let graph = eval(&term).map_err(|e| format!("witness term does not evaluate: {e}"))?;
    let (gw, _) = graph.to_tcw().map_err(|e| format!("witness graph is not a word: {e}"))?;
    let run: Vec<usize> = gw.trans[1..]
        .iter()
        .map(|t| t.ok_or_else(|| "witness position without transition".to_string()))
        .collect::<Result<_, _>>()?;
    let tcw = run_to_tcw(sys, &run).map_err(|e| format!("witness run is not a path: {e}"))?;
    let mut a = gw.edges.clone();
    let mut b = tcw.edges.clone();
    a.sort();
    b.sort();
    if a != b {
        return Err(format!("witness term edges {a:?} differ from the run's constraint word {b:?}"));
    }
    let ts = realize(&tcw).map_err(|e| format!("witness word is not realizable: {e}"))?;
    verify_witness(sys, &run, &ts)?;
    // the derivation uses throwaway colors; report a term within the bound
    let k = color_bound(sys.clocks.len(), tcw.has_stack_edges()).max(k);
    let term = decompose(&tcw, k).map_err(|e| format!("witness word does not decompose: {e}"))?;
    if !product_accepts_term(&SysView::new(sys), m, &term) {
        return Err(format!("product rejects the term of the witness word: {term}"));
    }
    Ok(Witness { run, tcw, ts, term: Some(term) })
}

/// Simulates `sys` on a timed run. `ts[0]` is the start time and `ts[k]`
/// the time of the `k`-th transition. Returns the first violated obligation.
pub fn verify_witness(sys: &TimedSystem, run: &[usize], ts: &[u64]) -> Result<(), String> {
    if ts.len() != run.len() + 1 {
        return Err(format!("{} timestamps for {} transitions", ts.len(), run.len()));
    }
    let mut state = sys.initial;
    let mut last_reset = vec![ts[0]; sys.clocks.len()];
    let mut stack: Vec<(usize, u64)> = Vec::new();
    for (k, &ti) in run.iter().enumerate() {
        let step = k + 1;
        let now = ts[step];
        let Some(t) = sys.transitions.get(ti) else {
            return Err(format!("step {step}: unknown transition {ti}"));
        };
        if now < ts[k] {
            return Err(format!("step {step}: time goes backwards ({} then {now})", ts[k]));
        }
        if t.source != state {
            return Err(format!("step {step}: transition leaves {} but the run is in {}", sys.states[t.source], sys.states[state]));
        }
        for &(x, iv) in &t.guard {
            let v = now - last_reset[x];
            if !iv.contains(v as i64) {
                return Err(format!("step {step}: clock {} = {v} violates {iv}", sys.clocks[x]));
            }
        }
        match &t.op {
            StackOp::Nop => {}
            StackOp::Push(c) => stack.push((*c, now)),
            StackOp::Pop(c, iv) => match stack.pop() {
                Some((top, at)) if top == *c => {
                    if !iv.contains((now - at) as i64) {
                        return Err(format!("step {step}: popped {} of age {} outside {iv}", sys.stack[*c], now - at));
                    }
                }
                Some((top, _)) => return Err(format!("step {step}: pops {} but top is {}", sys.stack[*c], sys.stack[top])),
                None => return Err(format!("step {step}: pop on empty stack")),
            },
        }
        for &x in &t.resets {
            last_reset[x] = now;
        }
        state = t.target;
    }
    if !sys.is_final(state) {
        return Err(format!("run ends in non-final state {}", sys.states[state]));
    }
    if !stack.is_empty() {
        return Err(format!("run ends with {} symbols on the stack", stack.len()));
    }
    Ok(())
}

pub(crate) fn empty_run(sys: &TimedSystem) -> Witness {
    let tcw: Tcw = run_to_tcw(sys, &[]).expect("empty run is well formed");
    Witness { run: Vec::new(), tcw, ts: vec![0], term: None }
}
