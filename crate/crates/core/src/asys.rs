//! Tree automaton accepting terms whose graph is the TCW of an accepting
//! abstract run of a given system.
//!
//! Each active point carries the transition fired there. Flags record whether
//! the leftmost point's push and the rightmost point's pop are matched, which
//! clock guards of the rightmost point already have their edge, and which
//! hanging point (left of the chain) serves as the reset source of each clock.

use std::collections::HashSet;

use crate::model::{Interval, StackOp, TimedSystem, Transition};
use crate::tcw::EdgeKind;
use crate::treeterm::{Color, Ktt, VertexLabel, DUMMY};

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SState {
    pub points: Vec<Color>,
    pub left: Color,
    pub delta: Vec<u32>,
    pub push: bool,
    pub pop: bool,
    /// Bit `x` set once the guard on clock `x` at the rightmost point has
    /// its edge.
    pub g: u32,
    /// Hanging reset source per clock.
    pub z: Vec<Option<Color>>,
}

/// View of a system with the start pseudo-transition.
pub struct SysView<'a> {
    pub sys: &'a TimedSystem,
    dummy: Transition,
}

impl<'a> SysView<'a> {
    pub fn new(sys: &'a TimedSystem) -> Self {
        let dummy = Transition {
            source: usize::MAX,
            target: sys.initial,
            label: None,
            guard: Vec::new(),
            resets: (0..sys.clocks.len()).collect(),
            op: StackOp::Nop,
        };
        SysView { sys, dummy }
    }

    pub fn tr(&self, d: u32) -> &Transition {
        if d == DUMMY {
            &self.dummy
        } else {
            &self.sys.transitions[d as usize]
        }
    }

    pub fn resets(&self, d: u32, x: usize) -> bool {
        d == DUMMY || self.tr(d).resets_clock(x)
    }

    pub fn reset_mask(&self, d: u32) -> u32 {
        if d == DUMMY {
            self.sys.all_clocks_mask()
        } else {
            self.tr(d).reset_mask()
        }
    }

    pub fn nclocks(&self) -> usize {
        self.sys.clocks.len()
    }

    /// Transition tags compatible with a vertex label.
    pub fn candidates(&self, lab: &VertexLabel) -> Vec<u32> {
        if let Some(d) = lab.delta {
            let ok = if d == DUMMY {
                lab.sym.is_none()
            } else {
                (d as usize) < self.sys.transitions.len() && self.tr(d).label == lab.sym
            };
            return if ok { vec![d] } else { Vec::new() };
        }
        let mut out: Vec<u32> = (0..self.sys.transitions.len() as u32).filter(|&d| self.tr(d).label == lab.sym).collect();
        if lab.sym.is_none() {
            out.push(DUMMY);
        }
        out
    }
}

impl SState {
    fn idx(&self, c: Color) -> Option<usize> {
        self.points.binary_search(&c).ok()
    }

    pub fn delta_of(&self, c: Color) -> u32 {
        self.delta[self.idx(c).expect("active color")]
    }

    pub fn right(&self) -> Color {
        *self.points.last().unwrap()
    }
}

pub fn s_leaf_succ(v: &SysView, a: &VertexLabel, i: Color, b: &VertexLabel, j: Color) -> Vec<SState> {
    let mut out = Vec::new();
    for di in v.candidates(a) {
        for dj in v.candidates(b) {
            if dj == DUMMY {
                continue;
            }
            if v.tr(di).target == v.tr(dj).source {
                out.push(SState {
                    points: vec![i, j],
                    left: i,
                    delta: vec![di, dj],
                    push: false,
                    pop: false,
                    g: 0,
                    z: vec![None; v.nclocks()],
                });
            }
        }
    }
    out
}

/// Adds a stack edge from the leftmost to the rightmost point.
pub fn s_add_stack_edge(v: &SysView, q: &SState, i: Color, j: Color, iv: Interval) -> Option<SState> {
    if i != q.left || j != q.right() || q.push || q.pop {
        return None;
    }
    let (ti, tj) = (v.tr(q.delta_of(i)), v.tr(q.delta_of(j)));
    match (&ti.op, &tj.op) {
        (StackOp::Push(c), StackOp::Pop(c2, iv2)) if c == c2 && *iv2 == iv => {}
        _ => return None,
    }
    let mut r = q.clone();
    r.push = true;
    r.pop = true;
    Some(r)
}

/// Adds a clock edge on `x` ending at the rightmost point. When `i` is not
/// active it becomes a new hanging point fired by one of the `new_tags`.
pub fn s_add_clock_edge(
    v: &SysView,
    q: &SState,
    i: Color,
    j: Color,
    iv: Interval,
    x: usize,
    new_label: &VertexLabel,
) -> Vec<SState> {
    if !(i < j && j == q.right()) || q.g & (1 << x) != 0 {
        return Vec::new();
    }
    if v.tr(q.delta_of(j)).guard_on(x) != Some(iv) {
        return Vec::new();
    }
    let blocked = q.points.iter().zip(&q.delta).any(|(&k, &d)| i < k && k < j && v.resets(d, x));
    if blocked {
        return Vec::new();
    }
    let tags: Vec<u32> = match q.idx(i) {
        Some(k) => vec![q.delta[k]],
        None if i < q.left => v.candidates(new_label).into_iter().filter(|&d| v.resets(d, x)).collect(),
        None => return Vec::new(),
    };
    let mut out = Vec::new();
    for d in tags {
        if !v.resets(d, x) {
            continue;
        }
        let mut r = q.clone();
        if i < q.left {
            if q.z[x].is_some_and(|z| z != i) {
                continue;
            }
            r.z[x] = Some(i);
        }
        if r.idx(i).is_none() {
            let k = r.points.partition_point(|&c| c < i);
            r.points.insert(k, i);
            r.delta.insert(k, d);
        }
        r.g |= 1 << x;
        out.push(r);
    }
    out
}

pub fn s_forget(v: &SysView, q: &SState, i: Color) -> Option<SState> {
    let k = q.idx(i)?;
    let r = q.right();
    if !(q.left < i && i < r) {
        return None;
    }
    let mask = v.reset_mask(q.delta[k]);
    let dr = v.tr(q.delta_of(r));
    for x in 0..v.nclocks() {
        if mask & (1 << x) != 0 {
            let inner = q.points.iter().zip(&q.delta).any(|(&c, &d)| i < c && c < r && v.resets(d, x));
            // a reset at R only hides i once R's own guard on x is settled
            let at_r = v.resets(q.delta_of(r), x) && (q.g & (1 << x) != 0 || dr.guard_on(x).is_none());
            if !inner && !at_r {
                return None;
            }
        }
    }
    let mut out = q.clone();
    out.points.remove(k);
    out.delta.remove(k);
    Some(out)
}

pub fn s_rename(q: &SState, i: Color, j: Color) -> Option<SState> {
    let k = q.idx(i)?;
    let lo = if k == 0 { 0 } else { q.points[k - 1] };
    let hi = q.points.get(k + 1).copied().unwrap_or(Color::MAX);
    if !(lo < j && j < hi) {
        return None;
    }
    let mut r = q.clone();
    r.points[k] = j;
    if r.left == i {
        r.left = j;
    }
    for z in r.z.iter_mut() {
        if *z == Some(i) {
            *z = Some(j);
        }
    }
    Some(r)
}

pub fn s_combine(v: &SysView, q1: &SState, q2: &SState) -> Option<SState> {
    let r1 = q1.right();
    let (l1, l2) = (q1.left, q2.left);
    // C1
    if r1 != l2 {
        return None;
    }
    for &c in &q2.points {
        if c >= l1 && c <= r1 && q1.idx(c).is_none() {
            return None;
        }
    }
    // C2
    for (k, &c) in q2.points.iter().enumerate() {
        if let Some(k1) = q1.idx(c) {
            if q1.delta[k1] != q2.delta[k] {
                return None;
            }
        }
    }
    // C3
    if v.tr(q2.delta_of(l2)).is_push() && !q2.push {
        return None;
    }
    if v.tr(q1.delta_of(r1)).is_pop() && !q1.pop {
        return None;
    }
    // C4
    let gm = v.tr(q1.delta_of(r1)).guard_mask();
    if gm & !q1.g != 0 {
        return None;
    }
    // C5, C6
    for x in 0..v.nclocks() {
        if let Some(z) = q1.z[x] {
            if q2.points.iter().zip(&q2.delta).any(|(&j, &d)| z < j && j < l1 && v.resets(d, x)) {
                return None;
            }
        }
        if let Some(z) = q2.z[x] {
            if q1.points.iter().zip(&q1.delta).any(|(&j, &d)| z < j && j < l2 && v.resets(d, x)) {
                return None;
            }
        }
    }
    let mut points: Vec<Color> = q1.points.iter().chain(&q2.points).copied().collect();
    points.sort_unstable();
    points.dedup();
    let delta = points
        .iter()
        .map(|&c| q1.idx(c).map_or_else(|| q2.delta_of(c), |k| q1.delta[k]))
        .collect();
    let z = (0..v.nclocks())
        .map(|x| match q2.z[x] {
            Some(z2) if z2 < l1 => Some(z2),
            _ => q1.z[x],
        })
        .collect();
    Some(SState { points, left: l1, delta, push: q1.push, pop: q2.pop, g: q2.g, z })
}

pub fn s_accepting(v: &SysView, q: &SState) -> bool {
    let r = v.tr(q.delta_of(q.right()));
    debug_assert!(q.left != q.points[0] || q.z.iter().all(Option::is_none));
    q.left == q.points[0]
        && q.delta[0] == DUMMY
        && v.sys.is_final(r.target)
        && !r.is_push()
        && (!r.is_pop() || q.pop)
        && r.guard_mask() & !q.g == 0
}

/// Projection used to compare against clock-only analyses: points, tags and
/// guard flags.
pub fn s_ta_project(q: &SState) -> (Vec<Color>, Vec<u32>, u32) {
    (q.points.clone(), q.delta.clone(), q.g)
}

/// All system-automaton states reachable at the root of a restricted term.
pub fn s_states(v: &SysView, term: &Ktt) -> HashSet<SState> {
    match term {
        Ktt::Succ { a, i, b, j } => s_leaf_succ(v, a, *i, b, *j).into_iter().collect(),
        Ktt::Edge { .. } => HashSet::new(),
        Ktt::Forget { i, child } => s_states(v, child).iter().filter_map(|q| s_forget(v, q, *i)).collect(),
        Ktt::Rename { i, j, child } => s_states(v, child).iter().filter_map(|q| s_rename(q, *i, *j)).collect(),
        Ktt::Combine(a, b) => {
            let sa = s_states(v, a);
            if let Ktt::Edge { a: la, i, j, interval, kind, .. } = b.as_ref() {
                let mut out = HashSet::new();
                for q in &sa {
                    match kind {
                        EdgeKind::Stack => out.extend(s_add_stack_edge(v, q, *i, *j, *interval)),
                        EdgeKind::Clock(x) => out.extend(s_add_clock_edge(v, q, *i, *j, *interval, *x, la)),
                    }
                }
                return out;
            }
            let sb = s_states(v, b);
            let mut out = HashSet::new();
            for q1 in &sa {
                for q2 in &sb {
                    out.extend(s_combine(v, q1, q2));
                }
            }
            out
        }
    }
}
