//! Product automaton on explicit colors `1..=K`, with rename transitions.
//! Much slower than the canonical form; kept for differential testing.

use std::hash::{Hash, Hasher};

use super::saturate::Rules;
use crate::asys::{s_accepting, s_add_clock_edge, s_add_stack_edge, s_combine, s_forget, s_leaf_succ, s_rename, SState, SysView};
use crate::avalid::{normalize, v_accepting, v_combine, v_forget, v_leaf_edge, v_leaf_succ, v_rename, VState};
use crate::model::{Interval, StackOp};
use crate::tcw::EdgeKind;
use crate::treeterm::{Color, VertexLabel, DUMMY};

pub(crate) type XState = (VState, SState);

#[derive(Clone, Debug)]
pub(crate) enum XStep {
    Leaf,
    Rename { p: u32, i: Color, j: Color },
    Forget { p: u32, i: Color },
    Edge { p: u32, i: Color, j: Color, interval: Interval, kind: EdgeKind },
    Combine { a: u32, b: u32 },
}

pub(crate) struct Explicit<'a> {
    pub view: SysView<'a>,
    pub m: u32,
    pub k: usize,
}

pub(crate) fn label_of(view: &SysView, d: u32) -> VertexLabel {
    let sym = if d == DUMMY { None } else { view.tr(d).label.clone() };
    VertexLabel::new(sym, Some(d))
}

fn key(parts: &[u64]) -> u64 {
    let mut h = std::collections::hash_map::DefaultHasher::new();
    parts.hash(&mut h);
    h.finish()
}

impl Explicit<'_> {
    fn shifted(&self, q: &VState, by: u32) -> VState {
        let mut r = q.clone();
        for t in r.tsm.iter_mut() {
            *t = (*t + by) % self.m;
        }
        r
    }

    fn with_edge(&self, q: &VState, i: Color, j: Color, iv: Interval) -> Vec<VState> {
        let r = q.tsm_of(j);
        let mut out = Vec::new();
        for e in v_leaf_edge(self.m, i, j, iv).iter().filter(|e| e.tsm[1] == r) {
            out.extend(v_combine(self.m, q, e).iter().map(|x| normalize(self.m, x)));
        }
        out
    }
}

impl Rules for Explicit<'_> {
    type State = XState;
    type Step = XStep;

    fn leaves(&self) -> Vec<(XState, XStep)> {
        let t = self.view.sys.transitions.len() as u32;
        let mut out = Vec::new();
        for i in 1..=self.k as Color {
            for j in i + 1..=self.k as Color {
                let vs: Vec<VState> = v_leaf_succ(self.m, i, j).iter().map(|q| normalize(self.m, q)).collect();
                for di in (0..t).chain([DUMMY]) {
                    for dj in 0..t {
                        for s in s_leaf_succ(&self.view, &label_of(&self.view, di), i, &label_of(&self.view, dj), j) {
                            for v in &vs {
                                out.push(((v.clone(), s.clone()), XStep::Leaf));
                            }
                        }
                    }
                }
            }
        }
        out
    }

    fn unary(&self, (v, s): &XState, id: u32, out: &mut Vec<(XState, XStep)>) {
        let k = self.k as Color;
        let pts = &s.points;
        for (idx, &c) in pts.iter().enumerate() {
            let lo = if idx == 0 { 0 } else { pts[idx - 1] };
            let hi = pts.get(idx + 1).copied().unwrap_or(k + 1);
            for j in lo + 1..hi {
                if j == c {
                    continue;
                }
                if let (Some(v2), Some(s2)) = (v_rename(v, c, j), s_rename(s, c, j)) {
                    out.push(((v2, s2), XStep::Rename { p: id, i: c, j }));
                }
            }
            if let (Some(v2), Some(s2)) = (v_forget(self.m, v, c), s_forget(&self.view, s, c)) {
                out.push(((v2, s2), XStep::Forget { p: id, i: c }));
            }
        }
        let r = s.right();
        let tr = self.view.tr(s.delta_of(r));
        if let StackOp::Pop(_, iv) = tr.op {
            if let Some(s2) = s_add_stack_edge(&self.view, s, s.left, r, iv) {
                for v2 in self.with_edge(v, s.left, r, iv) {
                    out.push(((v2, s2.clone()), XStep::Edge { p: id, i: s.left, j: r, interval: iv, kind: EdgeKind::Stack }));
                }
            }
        }
        for x in 0..self.view.nclocks() {
            let Some(iv) = tr.guard_on(x) else { continue };
            for i in 1..r {
                let mut ss = Vec::new();
                if s.points.contains(&i) {
                    ss = s_add_clock_edge(&self.view, s, i, r, iv, x, &VertexLabel::default());
                } else if i < s.left {
                    let t = self.view.sys.transitions.len() as u32;
                    for d in (0..t).chain([DUMMY]) {
                        if self.view.resets(d, x) {
                            ss.extend(s_add_clock_edge(&self.view, s, i, r, iv, x, &label_of(&self.view, d)));
                        }
                    }
                }
                if ss.is_empty() {
                    continue;
                }
                for v2 in self.with_edge(v, i, r, iv) {
                    for s2 in &ss {
                        out.push(((v2.clone(), s2.clone()), XStep::Edge { p: id, i, j: r, interval: iv, kind: EdgeKind::Clock(x) }));
                    }
                }
            }
        }
    }

    fn combine(&self, (v1, s1): &XState, (v2, s2): &XState, ida: u32, idb: u32, out: &mut Vec<(XState, XStep)>) {
        let Some(s) = s_combine(&self.view, s1, s2) else { return };
        if s.points.len() > self.k {
            return;
        }
        let r1 = s1.right();
        let by = (v1.tsm_of(r1) + self.m - v2.tsm_of(s2.left)) % self.m;
        for v in v_combine(self.m, v1, &self.shifted(v2, by)) {
            out.push(((normalize(self.m, &v), s.clone()), XStep::Combine { a: ida, b: idb }));
        }
    }

    fn right_key(&self, (_, s): &XState) -> Option<u64> {
        let r = s.right();
        let d = s.delta_of(r);
        let t = self.view.tr(d);
        let ok = (!t.is_pop() || s.pop) && t.guard_mask() & !s.g == 0;
        ok.then(|| key(&[r as u64, d as u64]))
    }

    fn left_key(&self, (_, s): &XState) -> Option<u64> {
        let d = s.delta_of(s.left);
        (!self.view.tr(d).is_push() || s.push).then(|| key(&[s.left as u64, d as u64]))
    }

    fn accepting(&self, (v, s): &XState) -> bool {
        if !s_accepting(&self.view, s) {
            return false;
        }
        let mut q = v.clone();
        for &c in &s.points[1..s.points.len() - 1] {
            match v_forget(self.m, &q, c) {
                Some(r) => q = r,
                None => return false,
            }
        }
        v_accepting(&q)
    }

    fn describe(&self, (v, s): &XState) -> String {
        format!("P={:?} L={} tsm={:?} acc={:?} delta={:?} push={} pop={} g={:b}", s.points, s.left, v.tsm, v.acc, s.delta, s.push, s.pop, s.g)
    }
}
