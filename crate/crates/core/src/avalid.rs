//! Tree automaton accepting good terms whose graph is a realizable TCW.
//!
//! A state remembers, for each active point, its timestamp modulo `M` and an
//! `acc` bit telling whether the gap to the next active point is below `M`
//! (so the modular difference is the true one). Transitions here work on
//! explicit colors and mirror term operations one for one.

use std::collections::HashSet;

use crate::model::Interval;
use crate::treeterm::{Color, Ktt};

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct VState {
    /// Active colors, ascending.
    pub points: Vec<Color>,
    pub left: Color,
    pub tsm: Vec<u32>,
    pub acc: Vec<bool>,
}

impl VState {
    fn idx(&self, c: Color) -> usize {
        self.points.binary_search(&c).unwrap_or_else(|_| panic!("color {c} not active"))
    }

    pub fn contains(&self, c: Color) -> bool {
        self.points.binary_search(&c).is_ok()
    }

    pub fn tsm_of(&self, c: Color) -> u32 {
        self.tsm[self.idx(c)]
    }

    pub fn acc_of(&self, c: Color) -> bool {
        self.acc[self.idx(c)]
    }

    /// Modular distance from `i` to `j`.
    pub fn d(&self, m: u32, i: Color, j: Color) -> u32 {
        (self.tsm_of(j) + m - self.tsm_of(i)) % m
    }

    /// Sum of modular gaps between consecutive active points from `i` to `j`.
    pub fn big_d(&self, m: u32, i: Color, j: Color) -> u64 {
        let (a, b) = (self.idx(i), self.idx(j));
        (a..b).map(|k| ((self.tsm[k + 1] + m - self.tsm[k]) % m) as u64).sum()
    }

    /// Whether every gap from `i` up to `j` is known to be below `M`.
    pub fn big_acc(&self, i: Color, j: Color) -> bool {
        let (a, b) = (self.idx(i), self.idx(j));
        self.acc[a..b].iter().all(|&x| x)
    }
}

/// Leaf `i -> j`: both timestamps and the gap bit are guessed.
pub fn v_leaf_succ(m: u32, i: Color, j: Color) -> Vec<VState> {
    let mut out = Vec::with_capacity((2 * m * m) as usize);
    for ti in 0..m {
        for tj in 0..m {
            for a in [false, true] {
                out.push(VState { points: vec![i, j], left: i, tsm: vec![ti, tj], acc: vec![a, false] });
            }
        }
    }
    out
}

/// Leaf `i |> j` constrained by `iv`.
pub fn v_leaf_edge(m: u32, i: Color, j: Color, iv: Interval) -> Vec<VState> {
    let mut out = Vec::new();
    for ti in 0..m {
        for tj in 0..m {
            let d = (tj + m - ti) % m;
            if iv.contains(d as i64) {
                out.push(VState { points: vec![i, j], left: j, tsm: vec![ti, tj], acc: vec![true, false] });
            }
            if iv.is_unbounded() {
                out.push(VState { points: vec![i, j], left: j, tsm: vec![ti, tj], acc: vec![false, false] });
            }
        }
    }
    out
}

pub fn v_rename(q: &VState, i: Color, j: Color) -> Option<VState> {
    let k = q.points.binary_search(&i).ok()?;
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
    Some(r)
}

pub fn v_forget(m: u32, q: &VState, i: Color) -> Option<VState> {
    let k = q.points.binary_search(&i).ok()?;
    let max = *q.points.last().unwrap();
    if !(q.left < i && i < max) {
        return None;
    }
    let (lo, hi) = (q.points[k - 1], q.points[k + 1]);
    let joined = q.big_acc(lo, hi) && q.big_d(m, lo, hi) < m as u64;
    let mut r = q.clone();
    r.acc[k - 1] = joined;
    r.points.remove(k);
    r.tsm.remove(k);
    r.acc.remove(k);
    Some(r)
}

/// Solves the gap bits of a merged point list. `constraints` lists
/// `(from, to, bit)` index pairs: the merged gaps from `from` up to `to` must
/// all be below `M` and sum below `M` exactly when `bit` holds.
pub(crate) fn solve_acc(m: u32, tsm: &[u32], constraints: &[(usize, usize, bool)]) -> Vec<Vec<bool>> {
    let n = tsm.len();
    let mut forced: Vec<Option<bool>> = vec![None; n];
    forced[n - 1] = Some(false);
    for &(a, b, bit) in constraints {
        if b == a + 1 {
            match forced[a] {
                Some(v) if v != bit => return Vec::new(),
                _ => forced[a] = Some(bit),
            }
        }
    }
    let free: Vec<usize> = (0..n).filter(|&k| forced[k].is_none()).collect();
    let gaps: Vec<u64> = (0..n.saturating_sub(1)).map(|k| ((tsm[k + 1] + m - tsm[k]) % m) as u64).collect();
    let mut out = Vec::new();
    for mask in 0u64..(1u64 << free.len()) {
        let mut acc: Vec<bool> = forced.iter().map(|f| f.unwrap_or(false)).collect();
        for (bit, &k) in free.iter().enumerate() {
            acc[k] = mask & (1 << bit) != 0;
        }
        let ok = constraints.iter().all(|&(a, b, bit)| {
            let all = acc[a..b].iter().all(|&x| x);
            let sum: u64 = gaps[a..b].iter().sum();
            (all && sum < m as u64) == bit
        });
        if ok {
            out.push(acc);
        }
    }
    out
}

pub fn v_combine(m: u32, q1: &VState, q2: &VState) -> Vec<VState> {
    let r1 = *q1.points.last().unwrap();
    if r1 != q2.left {
        return Vec::new();
    }
    for (k, &c) in q2.points.iter().enumerate() {
        match q1.points.binary_search(&c) {
            Ok(k1) => {
                if q1.tsm[k1] != q2.tsm[k] {
                    return Vec::new();
                }
            }
            Err(_) => {
                if c >= q1.left && c <= r1 {
                    return Vec::new();
                }
            }
        }
    }
    let mut points: Vec<Color> = q1.points.iter().chain(&q2.points).copied().collect();
    points.sort_unstable();
    points.dedup();
    let tsm: Vec<u32> = points
        .iter()
        .map(|&c| if q1.contains(c) { q1.tsm_of(c) } else { q2.tsm_of(c) })
        .collect();
    let pos = |c: Color| points.binary_search(&c).unwrap();
    let mut cons = Vec::new();
    for q in [q1, q2] {
        for w in 0..q.points.len() - 1 {
            cons.push((pos(q.points[w]), pos(q.points[w + 1]), q.acc[w]));
        }
    }
    solve_acc(m, &tsm, &cons)
        .into_iter()
        .map(|acc| VState { points: points.clone(), left: q1.left, tsm: tsm.clone(), acc })
        .collect()
}

pub fn v_accepting(q: &VState) -> bool {
    q.points.len() == 2 && q.left == q.points[0] && !q.acc[1]
}

/// Shifts timestamps so the first active point sits at 0. Every transition
/// only looks at differences, so this loses nothing.
pub fn normalize(m: u32, q: &VState) -> VState {
    let base = q.tsm[0];
    let mut r = q.clone();
    for t in r.tsm.iter_mut() {
        *t = (*t + m - base) % m;
    }
    r
}

fn shifted(m: u32, q: &VState, by: u32) -> VState {
    let mut r = q.clone();
    for t in r.tsm.iter_mut() {
        *t = (*t + by) % m;
    }
    r
}

/// Timestamps of `shared` colors relative to `anchor`. All states at one
/// term node have the same active colors, so this is a valid join key.
pub(crate) fn rel_key(m: u32, q: &VState, anchor: Color, shared: &[Color]) -> Vec<u32> {
    let base = q.tsm_of(anchor);
    shared.iter().map(|&c| (q.tsm_of(c) + m - base) % m).collect()
}

/// Combines every pair from two state sets of sibling subterms, aligning the
/// normalized timestamps on the junction point.
pub(crate) fn v_combine_sets<'a>(
    m: u32,
    left: impl IntoIterator<Item = &'a VState>,
    right: &[&'a VState],
) -> Vec<VState> {
    let mut out = Vec::new();
    let Some(first) = right.first() else { return out };
    let l2 = first.left;
    let mut index: std::collections::HashMap<Vec<u32>, Vec<&VState>> = std::collections::HashMap::new();
    let mut shared: Option<Vec<Color>> = None;
    for q1 in left {
        let r1 = *q1.points.last().unwrap();
        if r1 != l2 {
            continue;
        }
        let sh = shared.get_or_insert_with(|| {
            let sh: Vec<Color> = first.points.iter().copied().filter(|c| q1.contains(*c)).collect();
            for q2 in right {
                index.entry(rel_key(m, q2, l2, &sh)).or_default().push(q2);
            }
            sh
        });
        let key = rel_key(m, q1, r1, sh);
        if let Some(bucket) = index.get(&key) {
            for q2 in bucket {
                let by = (q1.tsm_of(r1) + m - q2.tsm_of(l2)) % m;
                for r in v_combine(m, q1, &shifted(m, q2, by)) {
                    out.push(normalize(m, &r));
                }
            }
        }
    }
    out
}

/// All states reachable at the root of `term`, normalized.
pub fn v_states(m: u32, term: &Ktt) -> HashSet<VState> {
    match term {
        Ktt::Succ { i, j, .. } => v_leaf_succ(m, *i, *j).iter().map(|q| normalize(m, q)).collect(),
        Ktt::Edge { i, j, interval, .. } => v_leaf_edge(m, *i, *j, *interval).iter().map(|q| normalize(m, q)).collect(),
        Ktt::Forget { i, child } => v_states(m, child).iter().filter_map(|q| v_forget(m, q, *i)).collect(),
        Ktt::Rename { i, j, child } => v_states(m, child).iter().filter_map(|q| v_rename(q, *i, *j)).collect(),
        Ktt::Combine(a, b) => {
            let sa = v_states(m, a);
            let sb = v_states(m, b);
            let right: Vec<&VState> = sb.iter().collect();
            v_combine_sets(m, &sa, &right).into_iter().collect()
        }
    }
}

pub fn v_accepts_term(m: u32, term: &Ktt) -> bool {
    v_states(m, term).iter().any(v_accepting)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn leaf_counts() {
        assert_eq!(v_leaf_succ(3, 1, 2).len(), 18);
        // [1,inf] with M=3: d in {1,2} with acc, plus every pair without acc
        assert_eq!(v_leaf_edge(3, 1, 2, Interval::at_least(1)).len(), 6 + 9);
        assert_eq!(v_leaf_edge(3, 1, 2, Interval::closed(0, 0)).len(), 3);
    }

    #[test]
    fn forget_joins_gaps() {
        let q = VState { points: vec![1, 2, 3], left: 1, tsm: vec![0, 2, 3], acc: vec![true, true, false] };
        let r = v_forget(4, &q, 2).unwrap();
        assert_eq!(r.acc, vec![true, false]);
        let r = v_forget(5, &q, 2).unwrap();
        assert_eq!(r.acc, vec![true, false]);
        assert_eq!(r.tsm, vec![0, 3]);
        assert!(v_forget(5, &q, 1).is_none());
    }
}
