//! Tree terms over colored graphs.
//!
//! A term builds a graph of positions linked by a successor chain and by
//! timing edges. Colors name the "active" vertices that later operations may
//! still touch. Well-formed ("good") terms use colors in the same order as the
//! positions they name, which lets tree automata reason about distances
//! between colored points locally.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

use crate::model::Interval;
use crate::tcw::{EdgeKind, Tcw, TcwEdge};

pub type Color = u32;

/// Transition tag of the silent start point.
pub const DUMMY: u32 = u32::MAX;

#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct VertexLabel {
    pub sym: Option<String>,
    /// Transition fired at this vertex, when known.
    pub delta: Option<u32>,
}

impl VertexLabel {
    pub fn new(sym: Option<String>, delta: Option<u32>) -> Self {
        VertexLabel { sym, delta }
    }

    fn fuse(&self, other: &VertexLabel) -> Option<VertexLabel> {
        if self.sym != other.sym {
            return None;
        }
        let delta = match (self.delta, other.delta) {
            (Some(a), Some(b)) if a != b => return None,
            (a, b) => a.or(b),
        };
        Some(VertexLabel { sym: self.sym.clone(), delta })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Ktt {
    /// Two fresh vertices joined by a successor link.
    Succ { a: VertexLabel, i: Color, b: VertexLabel, j: Color },
    /// Two fresh vertices joined by a timing edge.
    Edge { a: VertexLabel, i: Color, b: VertexLabel, j: Color, interval: Interval, kind: EdgeKind },
    Forget { i: Color, child: Box<Ktt> },
    Rename { i: Color, j: Color, child: Box<Ktt> },
    /// Disjoint union, fusing vertices that carry the same color.
    Combine(Box<Ktt>, Box<Ktt>),
}

impl Ktt {
    pub fn forget(i: Color, child: Ktt) -> Ktt {
        Ktt::Forget { i, child: Box::new(child) }
    }

    pub fn rename(i: Color, j: Color, child: Ktt) -> Ktt {
        Ktt::Rename { i, j, child: Box::new(child) }
    }

    pub fn combine(a: Ktt, b: Ktt) -> Ktt {
        Ktt::Combine(Box::new(a), Box::new(b))
    }

    /// Active colors at the root.
    pub fn act(&self) -> BTreeSet<Color> {
        match self {
            Ktt::Succ { i, j, .. } | Ktt::Edge { i, j, .. } => [*i, *j].into_iter().collect(),
            Ktt::Forget { i, child } => {
                let mut a = child.act();
                a.remove(i);
                a
            }
            Ktt::Rename { i, j, child } => {
                let mut a = child.act();
                if a.remove(i) {
                    a.insert(*j);
                }
                a
            }
            Ktt::Combine(a, b) => a.act().union(&b.act()).copied().collect(),
        }
    }

    pub fn size(&self) -> usize {
        match self {
            Ktt::Succ { .. } | Ktt::Edge { .. } => 1,
            Ktt::Forget { child, .. } | Ktt::Rename { child, .. } => 1 + child.size(),
            Ktt::Combine(a, b) => 1 + a.size() + b.size(),
        }
    }

    pub fn max_color(&self) -> Color {
        match self {
            Ktt::Succ { i, j, .. } | Ktt::Edge { i, j, .. } => (*i).max(*j),
            Ktt::Forget { i, child } => (*i).max(child.max_color()),
            Ktt::Rename { i, j, child } => (*i).max(*j).max(child.max_color()),
            Ktt::Combine(a, b) => a.max_color().max(b.max_color()),
        }
    }
}

impl fmt::Display for Ktt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Ktt::Succ { i, j, .. } => write!(f, "{i}→{j}"),
            Ktt::Edge { i, j, interval, .. } => write!(f, "{i}▷{interval}{j}"),
            Ktt::Forget { i, child } => write!(f, "forget_{i}({child})"),
            Ktt::Rename { i, j, child } => write!(f, "rename_{{{i}→{j}}}({child})"),
            Ktt::Combine(a, b) => match b.as_ref() {
                Ktt::Edge { i, j, interval, .. } => write!(f, "add_{{{i},{j}}}^{{▷{interval}}}({a})"),
                _ => write!(f, "({a} ⊕ {b})"),
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ColoredGraph {
    pub labels: Vec<VertexLabel>,
    pub succ: BTreeSet<(usize, usize)>,
    pub edges: BTreeSet<(usize, usize, Interval, EdgeKind)>,
    pub chi: BTreeMap<Color, usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EvalError {
    #[error("atom uses color {0} twice")]
    SameColor(Color),
    #[error("forget of unassigned color {0}")]
    ForgetUnassigned(Color),
    #[error("rename of unassigned color {0}")]
    RenameUnassigned(Color),
    #[error("rename onto occupied color {0}")]
    RenameOccupied(Color),
    #[error("fused vertices with color {0} carry different labels")]
    LabelClash(Color),
    #[error("graph is not a single successor chain")]
    NotAWord,
}

impl ColoredGraph {
    fn atom(a: &VertexLabel, i: Color, b: &VertexLabel, j: Color) -> Result<ColoredGraph, EvalError> {
        if i == j {
            return Err(EvalError::SameColor(i));
        }
        Ok(ColoredGraph {
            labels: vec![a.clone(), b.clone()],
            succ: BTreeSet::new(),
            edges: BTreeSet::new(),
            chi: [(i, 0), (j, 1)].into_iter().collect(),
        })
    }

    fn union(mut self, other: ColoredGraph) -> Result<ColoredGraph, EvalError> {
        let mut map = vec![usize::MAX; other.labels.len()];
        for (c, &v) in &other.chi {
            if let Some(&u) = self.chi.get(c) {
                let fused = self.labels[u].fuse(&other.labels[v]).ok_or(EvalError::LabelClash(*c))?;
                self.labels[u] = fused;
                map[v] = u;
            }
        }
        for (v, slot) in map.iter_mut().enumerate() {
            if *slot == usize::MAX {
                *slot = self.labels.len();
                self.labels.push(other.labels[v].clone());
            }
        }
        for (a, b) in other.succ {
            self.succ.insert((map[a], map[b]));
        }
        for (a, b, iv, k) in other.edges {
            self.edges.insert((map[a], map[b], iv, k));
        }
        for (c, v) in other.chi {
            self.chi.insert(c, map[v]);
        }
        Ok(self)
    }

    pub fn act(&self) -> Vec<Color> {
        self.chi.keys().copied().collect()
    }

    /// Largest active color.
    pub fn right(&self) -> Option<Color> {
        self.chi.keys().next_back().copied()
    }

    /// Smallest active color whose vertex reaches the rightmost one along the
    /// successor chain.
    pub fn left(&self) -> Option<Color> {
        let r = self.right()?;
        let target = self.chi[&r];
        let mut next = vec![None; self.labels.len()];
        for &(a, b) in &self.succ {
            next[a] = Some(b);
        }
        self.chi
            .iter()
            .find(|(_, &v)| {
                let mut cur = v;
                let mut steps = 0;
                loop {
                    if cur == target {
                        return true;
                    }
                    match next[cur] {
                        Some(n) if steps <= self.labels.len() => {
                            cur = n;
                            steps += 1;
                        }
                        _ => return false,
                    }
                }
            })
            .map(|(c, _)| *c)
    }

    /// Reads the graph back as a TCW. Returns the word and, for every vertex,
    /// its position.
    pub fn to_tcw(&self) -> Result<(Tcw, Vec<usize>), EvalError> {
        let n = self.labels.len();
        let mut next = vec![None; n];
        let mut has_pred = vec![false; n];
        for &(a, b) in &self.succ {
            if next[a].is_some() || has_pred[b] {
                return Err(EvalError::NotAWord);
            }
            next[a] = Some(b);
            has_pred[b] = true;
        }
        let starts: Vec<usize> = (0..n).filter(|&v| !has_pred[v]).collect();
        if starts.len() != 1 {
            return Err(EvalError::NotAWord);
        }
        let mut pos = vec![usize::MAX; n];
        let mut order = Vec::with_capacity(n);
        let mut cur = Some(starts[0]);
        while let Some(v) = cur {
            if pos[v] != usize::MAX {
                return Err(EvalError::NotAWord);
            }
            pos[v] = order.len();
            order.push(v);
            cur = next[v];
        }
        if order.len() != n {
            return Err(EvalError::NotAWord);
        }
        let mut labels: Vec<Option<String>> = order.iter().map(|&v| self.labels[v].sym.clone()).collect();
        labels[0] = None;
        let mut edges: Vec<TcwEdge> = self
            .edges
            .iter()
            .map(|&(a, b, interval, kind)| TcwEdge { src: pos[a], dst: pos[b], interval, kind })
            .collect();
        edges.sort();
        let mut tcw = Tcw::from_edges(labels, edges);
        for (p, &v) in order.iter().enumerate() {
            tcw.trans[p] = self.labels[v].delta.filter(|&d| d != DUMMY).map(|d| d as usize);
        }
        Ok((tcw, pos))
    }
}

pub fn eval(term: &Ktt) -> Result<ColoredGraph, EvalError> {
    match term {
        Ktt::Succ { a, i, b, j } => {
            let mut g = ColoredGraph::atom(a, *i, b, *j)?;
            g.succ.insert((0, 1));
            Ok(g)
        }
        Ktt::Edge { a, i, b, j, interval, kind } => {
            let mut g = ColoredGraph::atom(a, *i, b, *j)?;
            g.edges.insert((0, 1, *interval, *kind));
            Ok(g)
        }
        Ktt::Forget { i, child } => {
            let mut g = eval(child)?;
            g.chi.remove(i).ok_or(EvalError::ForgetUnassigned(*i))?;
            Ok(g)
        }
        Ktt::Rename { i, j, child } => {
            let mut g = eval(child)?;
            if g.chi.contains_key(j) {
                return Err(EvalError::RenameOccupied(*j));
            }
            let v = g.chi.remove(i).ok_or(EvalError::RenameUnassigned(*i))?;
            g.chi.insert(*j, v);
            Ok(g)
        }
        Ktt::Combine(a, b) => eval(a)?.union(eval(b)?),
    }
}

/// Checks that colors follow position order through every operation.
/// Returns the first violation found.
pub fn check_good(term: &Ktt) -> Result<ColoredGraph, String> {
    match term {
        Ktt::Succ { i, j, .. } | Ktt::Edge { i, j, .. } => {
            if i >= j {
                return Err(format!("atom colors {i},{j} not increasing"));
            }
            eval(term).map_err(|e| e.to_string())
        }
        Ktt::Forget { i, child } => {
            let mut g = check_good(child)?;
            g.chi.remove(i).ok_or(format!("forget of unassigned color {i}"))?;
            Ok(g)
        }
        Ktt::Rename { i, j, child } => {
            let mut g = check_good(child)?;
            let act = g.act();
            let k = act.iter().position(|c| c == i).ok_or(format!("rename of unassigned color {i}"))?;
            let lo = if k == 0 { 0 } else { act[k - 1] };
            let hi = act.get(k + 1).copied().unwrap_or(Color::MAX);
            if !(lo < *j && *j < hi) {
                return Err(format!("rename {i}->{j} leaves the gap ({lo},{hi})"));
            }
            let v = g.chi.remove(i).unwrap();
            g.chi.insert(*j, v);
            Ok(g)
        }
        Ktt::Combine(a, b) => {
            let g1 = check_good(a)?;
            let g2 = check_good(b)?;
            let (l1, r1) = (g1.left().unwrap(), g1.right().unwrap());
            let l2 = g2.left().unwrap();
            if r1 != l2 {
                return Err(format!("combine: right end {r1} of left operand differs from left end {l2}"));
            }
            for c in g2.chi.keys() {
                if *c >= l1 && *c <= r1 && !g1.chi.contains_key(c) {
                    return Err(format!("combine: color {c} inside the left operand's span is not active there"));
                }
            }
            g1.union(g2).map_err(|e| e.to_string())
        }
    }
}

pub fn is_good(term: &Ktt) -> bool {
    check_good(term).is_ok()
}

/// Good, and edge atoms only ever occur as the right operand of a combine.
pub fn is_restricted(term: &Ktt) -> bool {
    fn edges_placed(t: &Ktt) -> bool {
        match t {
            Ktt::Succ { .. } => true,
            Ktt::Edge { .. } => false,
            Ktt::Forget { child, .. } | Ktt::Rename { child, .. } => edges_placed(child),
            Ktt::Combine(a, b) => edges_placed(a) && (matches!(**b, Ktt::Edge { .. }) || edges_placed(b)),
        }
    }
    edges_placed(term) && is_good(term)
}

/// Largest number of simultaneously active colors.
pub fn width(term: &Ktt) -> usize {
    fn go(t: &Ktt) -> (usize, BTreeSet<Color>) {
        match t {
            Ktt::Succ { .. } | Ktt::Edge { .. } => (2, t.act()),
            Ktt::Forget { i, child } => {
                let (w, mut a) = go(child);
                a.remove(i);
                (w, a)
            }
            Ktt::Rename { i, j, child } => {
                let (w, mut a) = go(child);
                if a.remove(i) {
                    a.insert(*j);
                }
                (w, a)
            }
            Ktt::Combine(x, y) => {
                let (w1, a1) = go(x);
                let (w2, a2) = go(y);
                let a: BTreeSet<Color> = a1.union(&a2).copied().collect();
                (w1.max(w2).max(a.len()), a)
            }
        }
    }
    go(term).0
}

/// Whether two TCWs are equal up to the reset annotation, which graphs do
/// not carry.
pub fn same_word(a: &Tcw, b: &Tcw) -> bool {
    a.labels == b.labels && a.edges == b.edges
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DecomposeError {
    #[error("word has no positions besides the start point")]
    EmptyWord,
    #[error("decomposition needs {needed} colors but only {allowed} are allowed")]
    WidthExceeded { needed: usize, allowed: usize },
    #[error("word is not well timed")]
    NotWellTimed,
}

/// Default color budget: `|X|+2` without stack edges, `3|X|+3` with them.
/// Never below 3, the least any word of three or more points needs.
pub fn color_bound(clocks: usize, with_stack: bool) -> usize {
    if with_stack {
        3 * clocks + 3
    } else {
        (clocks + 2).max(3)
    }
}

/// Builds a restricted good term evaluating to `tcw`, using at most `k`
/// colors. The root ends with forgets of every inner point, leaving only the
/// two endpoints active.
pub fn decompose(tcw: &Tcw, k: usize) -> Result<Ktt, DecomposeError> {
    if tcw.is_empty() {
        return Err(DecomposeError::EmptyWord);
    }
    if !crate::tcw::check_well_timed(tcw) {
        return Err(DecomposeError::NotWellTimed);
    }
    let d = Decomposer::new(tcw);
    let n = tcw.len();
    let pend = d.full_pending(n);
    let want = d.req(0, n, pend);
    let positional = d.build(0, n, pend, want);
    let body = positional.term;
    let needed = width(&body);
    if needed > k {
        return Err(DecomposeError::WidthExceeded { needed, allowed: k });
    }
    let root_act: Vec<Color> = body.act().into_iter().collect();
    let coloring: BTreeMap<Color, Color> = root_act.iter().enumerate().map(|(r, &p)| (p, r as Color + 1)).collect();
    let mut term = recolor(&body, &coloring, k as Color);
    let top = root_act.len() as Color;
    for c in (2..top).rev() {
        term = Ktt::forget(c, term);
    }
    Ok(term)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Pending {
    /// Number of clock edges into the right end not yet placed (a prefix of
    /// the clock-ordered list).
    clock: usize,
    stack: bool,
}

struct Built {
    term: Ktt,
}

struct Decomposer<'a> {
    tcw: &'a Tcw,
    clock_in: Vec<Vec<TcwEdge>>,
    stack_in: Vec<Option<TcwEdge>>,
    ta_mode: bool,
    nclocks: usize,
}

impl<'a> Decomposer<'a> {
    fn new(tcw: &'a Tcw) -> Self {
        let n = tcw.labels.len();
        let mut clock_in = vec![Vec::new(); n];
        let mut stack_in = vec![None; n];
        for e in &tcw.edges {
            match e.kind {
                EdgeKind::Clock(_) => clock_in[e.dst].push(*e),
                EdgeKind::Stack => stack_in[e.dst] = Some(*e),
            }
        }
        for v in &mut clock_in {
            v.sort_by_key(|e| e.kind);
        }
        Decomposer { tcw, clock_in, stack_in, ta_mode: !tcw.has_stack_edges(), nclocks: tcw.clock_count() }
    }

    fn label(&self, p: usize) -> VertexLabel {
        let delta = if p == 0 {
            if self.tcw.trans.iter().any(|t| t.is_some()) {
                Some(DUMMY)
            } else {
                None
            }
        } else {
            self.tcw.trans[p].map(|t| t as u32)
        };
        VertexLabel { sym: self.tcw.labels[p].clone(), delta }
    }

    fn full_pending(&self, r: usize) -> Pending {
        Pending { clock: self.clock_in[r].len(), stack: self.stack_in[r].is_some() }
    }

    fn remaining_edges(&self, l: usize, r: usize, pend: Pending) -> impl Iterator<Item = TcwEdge> + '_ {
        let inner = (l + 1..r).flat_map(move |p| self.clock_in[p].iter().copied().chain(self.stack_in[p]));
        let at_r = self.clock_in[r][..pend.clock].iter().copied().chain(if pend.stack { self.stack_in[r] } else { None });
        inner.chain(at_r)
    }

    fn hang(&self, l: usize, r: usize, pend: Pending) -> BTreeSet<usize> {
        self.remaining_edges(l, r, pend).filter(|e| e.src < l).map(|e| e.src).collect()
    }

    fn last_resets(&self, l: usize, r: usize) -> BTreeSet<usize> {
        let mut out = BTreeSet::new();
        for x in 0..self.nclocks {
            if let Some(p) = (l..=r).rev().find(|&p| self.tcw.resets[p] & (1 << x) != 0) {
                out.insert(p);
            }
        }
        out
    }

    fn req(&self, l: usize, r: usize, pend: Pending) -> BTreeSet<usize> {
        let mut s = self.hang(l, r, pend);
        s.insert(l);
        s.insert(r);
        s.extend(self.last_resets(l, r));
        s
    }

    /// Term whose root has exactly `want` active, covering the chain `l..=r`
    /// and every edge into `(l, r)` plus the pending edges into `r`.
    fn build(&self, l: usize, r: usize, pend: Pending, want: BTreeSet<usize>) -> Built {
        debug_assert!(want.is_superset(&self.req(l, r, pend)));
        if pend.clock > 0 {
            let e = self.clock_in[r][pend.clock - 1];
            let child_pend = Pending { clock: pend.clock - 1, ..pend };
            let mut child_want = want.clone();
            if e.src < l {
                if !self.hang(l, r, child_pend).contains(&e.src) {
                    child_want.remove(&e.src);
                }
            } else {
                child_want.insert(e.src);
            }
            let child = self.build(l, r, child_pend, child_want);
            let edge = Ktt::Edge {
                a: self.label(e.src),
                i: e.src as Color,
                b: self.label(r),
                j: r as Color,
                interval: e.interval,
                kind: e.kind,
            };
            let mut term = Ktt::combine(child.term, edge);
            if !want.contains(&e.src) {
                term = Ktt::forget(e.src as Color, term);
            }
            return Built { term };
        }
        if pend.stack {
            let e = self.stack_in[r].unwrap();
            if e.src == l {
                let child = self.build(l, r, Pending { clock: 0, stack: false }, want);
                let edge = Ktt::Edge {
                    a: self.label(l),
                    i: l as Color,
                    b: self.label(r),
                    j: r as Color,
                    interval: e.interval,
                    kind: EdgeKind::Stack,
                };
                return Built { term: Ktt::combine(child.term, edge) };
            }
            return self.split(l, e.src, r, pend, want);
        }
        if r == l + 1 {
            return Built {
                term: Ktt::Succ { a: self.label(l), i: l as Color, b: self.label(r), j: r as Color },
            };
        }
        let m = if self.ta_mode {
            (l + 1..r).rev().find(|&q| self.tcw.resets[q] != 0).unwrap_or(r - 1)
        } else {
            r - 1
        };
        self.split(l, m, r, pend, want)
    }

    fn split(&self, l: usize, m: usize, r: usize, pend: Pending, want: BTreeSet<usize>) -> Built {
        let pend2 = pend;
        let mut want2 = self.req(m, r, pend2);
        want2.extend(want.range(m..=r));
        let hang2 = self.hang(m, r, pend2);
        let pend1 = self.full_pending(m);
        let mut want1 = self.req(l, m, pend1);
        want1.extend(want.range(l..=m));
        want1.extend(hang2.range(l..m));
        let t1 = self.build(l, m, pend1, want1.clone());
        let t2 = self.build(m, r, pend2, want2.clone());
        let mut term = Ktt::combine(t1.term, t2.term);
        let all: BTreeSet<usize> = want1.union(&want2).copied().collect();
        let extra: Vec<usize> = all.difference(&want).copied().collect();
        for p in extra.iter().rev() {
            term = Ktt::forget(*p as Color, term);
        }
        Built { term }
    }
}

/// Maps a term colored by positions onto colors `1..=k`, keeping color order
/// equal to position order. `coloring` gives the colors of the root's active
/// points.
fn recolor(term: &Ktt, coloring: &BTreeMap<Color, Color>, k: Color) -> Ktt {
    let c = |p: &Color| coloring[p];
    match term {
        Ktt::Succ { a, i, b, j } => Ktt::Succ { a: a.clone(), i: c(i), b: b.clone(), j: c(j) },
        Ktt::Edge { a, i, b, j, interval, kind } => {
            Ktt::Edge { a: a.clone(), i: c(i), b: b.clone(), j: c(j), interval: *interval, kind: *kind }
        }
        Ktt::Combine(x, y) => {
            let sub = |t: &Ktt| {
                let act = t.act();
                let m: BTreeMap<Color, Color> = act.iter().map(|p| (*p, coloring[p])).collect();
                recolor(t, &m, k)
            };
            Ktt::combine(sub(x), sub(y))
        }
        Ktt::Forget { i, child } => {
            let below = coloring.range(..*i).next_back().map_or(0, |(_, &v)| v);
            let above = coloring.range(*i + 1..).next().map_or(k + 1, |(_, &v)| v);
            if above - below > 1 {
                let mut m = coloring.clone();
                m.insert(*i, below + 1);
                return Ktt::forget(below + 1, recolor(child, &m, k));
            }
            let mut points: Vec<Color> = coloring.keys().copied().collect();
            points.push(*i);
            points.sort_unstable();
            let compact: BTreeMap<Color, Color> = points.iter().enumerate().map(|(r, p)| (*p, r as Color + 1)).collect();
            let inner = Ktt::forget(compact[i], recolor(child, &compact, k));
            let mut from = compact.clone();
            from.remove(i);
            rename_chain(inner, &from, coloring)
        }
        Ktt::Rename { .. } => panic!("positional terms carry no renames"),
    }
}

/// Wraps `term` with renames moving each point from color `from[p]` to
/// `to[p]`. Both colorings must be order preserving on the same points.
fn rename_chain(mut term: Ktt, from: &BTreeMap<Color, Color>, to: &BTreeMap<Color, Color>) -> Ktt {
    for (p, &a) in from {
        let b = to[p];
        if b < a {
            term = Ktt::rename(a, b, term);
        }
    }
    for (p, &a) in from.iter().rev() {
        let b = to[p];
        if b > a {
            term = Ktt::rename(a, b, term);
        }
    }
    term
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lab() -> VertexLabel {
        VertexLabel::default()
    }

    fn succ(i: Color, j: Color) -> Ktt {
        Ktt::Succ { a: lab(), i, b: lab(), j }
    }

    fn add(t: Ktt, i: Color, j: Color, iv: Interval) -> Ktt {
        Ktt::combine(t, Ktt::Edge { a: lab(), i, b: lab(), j, interval: iv, kind: EdgeKind::Clock(0) })
    }

    #[test]
    fn eval_errors() {
        assert_eq!(eval(&Ktt::forget(3, succ(1, 2))), Err(EvalError::ForgetUnassigned(3)));
        assert_eq!(eval(&Ktt::rename(1, 2, succ(1, 2))), Err(EvalError::RenameOccupied(2)));
        assert_eq!(eval(&succ(1, 1)), Err(EvalError::SameColor(1)));
    }

    #[test]
    fn left_right_and_rename_gap() {
        let t = add(succ(3, 4), 1, 4, Interval::at_least(2));
        let g = eval(&t).unwrap();
        assert_eq!(g.left(), Some(3));
        assert_eq!(g.right(), Some(4));
        assert!(is_good(&Ktt::rename(3, 2, t.clone())));
        assert!(!is_good(&Ktt::rename(3, 5, t.clone())));
        assert!(is_restricted(&t));
        assert!(!is_restricted(&Ktt::Edge { a: lab(), i: 1, b: lab(), j: 2, interval: Interval::any(), kind: EdgeKind::Stack }));
    }

    #[test]
    fn combine_requires_matching_ends() {
        let t = Ktt::combine(succ(1, 2), succ(3, 4));
        assert!(!is_good(&t));
        let t = Ktt::combine(succ(1, 2), succ(2, 3));
        assert!(is_good(&t));
        assert_eq!(width(&t), 3);
    }

    #[test]
    fn rename_chain_respects_gaps() {
        let from: BTreeMap<Color, Color> = [(10, 1), (11, 2), (12, 5)].into_iter().collect();
        let to_ok: BTreeMap<Color, Color> = [(10, 2), (11, 3), (12, 4)].into_iter().collect();
        let base = Ktt::combine(Ktt::combine(succ(1, 2), succ(2, 5)), succ(5, 6));
        let base = Ktt::forget(6, base);
        let t = rename_chain(base, &from, &to_ok);
        let g = check_good(&t).unwrap();
        assert_eq!(g.act(), vec![2, 3, 4]);
    }
}
