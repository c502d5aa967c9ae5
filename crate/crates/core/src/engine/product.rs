//! Running both automata side by side over a fixed term.

use std::collections::{HashMap, HashSet};

use crate::asys::{s_accepting, s_add_clock_edge, s_add_stack_edge, s_combine, s_forget, s_leaf_succ, s_rename, SState, SysView};
use crate::avalid::{normalize, rel_key, v_combine, v_forget, v_leaf_edge, v_leaf_succ, v_rename, v_accepting, VState};
use crate::tcw::EdgeKind;
use crate::treeterm::{Color, Ktt};

pub type PairState = (VState, SState);

fn shift(m: u32, q: &VState, by: u32) -> VState {
    let mut r = q.clone();
    for t in r.tsm.iter_mut() {
        *t = (*t + by) % m;
    }
    r
}

/// Reachable product states at the root of a restricted term. Timestamps are
/// normalized so the first point sits at 0.
pub fn product_states(v: &SysView, m: u32, term: &Ktt) -> HashSet<PairState> {
    match term {
        Ktt::Succ { a, i, b, j } => {
            let vs: Vec<VState> = v_leaf_succ(m, *i, *j).iter().map(|q| normalize(m, q)).collect::<HashSet<_>>().into_iter().collect();
            let ss = s_leaf_succ(v, a, *i, b, *j);
            let mut out = HashSet::new();
            for q in &vs {
                for s in &ss {
                    out.insert((q.clone(), s.clone()));
                }
            }
            out
        }
        Ktt::Edge { .. } => HashSet::new(),
        Ktt::Forget { i, child } => product_states(v, m, child)
            .iter()
            .filter_map(|(q, s)| Some((v_forget(m, q, *i)?, s_forget(v, s, *i)?)))
            .collect(),
        Ktt::Rename { i, j, child } => product_states(v, m, child)
            .iter()
            .filter_map(|(q, s)| Some((v_rename(q, *i, *j)?, s_rename(s, *i, *j)?)))
            .collect(),
        Ktt::Combine(a, b) => {
            let sa = product_states(v, m, a);
            if let Ktt::Edge { a: la, i, j, interval, kind, .. } = b.as_ref() {
                let leaf = v_leaf_edge(m, *i, *j, *interval);
                let mut out = HashSet::new();
                for (q, s) in &sa {
                    let ss: Vec<SState> = match kind {
                        EdgeKind::Stack => s_add_stack_edge(v, s, *i, *j, *interval).into_iter().collect(),
                        EdgeKind::Clock(x) => s_add_clock_edge(v, s, *i, *j, *interval, *x, la),
                    };
                    if ss.is_empty() {
                        continue;
                    }
                    let r = q.tsm_of(*j);
                    for e in leaf.iter().filter(|e| e.tsm[1] == r) {
                        for qv in v_combine(m, q, e) {
                            let qv = normalize(m, &qv);
                            for s2 in &ss {
                                out.insert((qv.clone(), s2.clone()));
                            }
                        }
                    }
                }
                return out;
            }
            let sb = product_states(v, m, b);
            combine_sets(v, m, &sa, &sb)
        }
    }
}

fn combine_sets(v: &SysView, m: u32, sa: &HashSet<PairState>, sb: &HashSet<PairState>) -> HashSet<PairState> {
    let mut out = HashSet::new();
    let Some((f2, _)) = sb.iter().next() else { return out };
    let Some((f1, _)) = sa.iter().next() else { return out };
    let l2 = f2.left;
    let r1 = *f1.points.last().unwrap();
    if r1 != l2 {
        return out;
    }
    let shared: Vec<Color> = f2.points.iter().copied().filter(|c| f1.contains(*c)).collect();
    let key = |q: &VState, s: &SState, anchor: Color| {
        let ds: Vec<u32> = shared.iter().map(|&c| s.delta_of(c)).collect();
        (rel_key(m, q, anchor, &shared), ds)
    };
    let mut index: HashMap<(Vec<u32>, Vec<u32>), Vec<&PairState>> = HashMap::new();
    for p in sb {
        index.entry(key(&p.0, &p.1, l2)).or_default().push(p);
    }
    for (q1, s1) in sa {
        let Some(bucket) = index.get(&key(q1, s1, r1)) else { continue };
        for (q2, s2) in bucket {
            let Some(s) = s_combine(v, s1, s2) else { continue };
            let by = (q1.tsm_of(r1) + m - q2.tsm_of(l2)) % m;
            for q in v_combine(m, q1, &shift(m, q2, by)) {
                out.insert((normalize(m, &q), s.clone()));
            }
        }
    }
    out
}

/// Whether the product of both automata accepts `term`. A trailing chain of
/// forgets at the root is treated as the closing step: the system side must
/// accept before it, the timing side after it.
pub fn product_accepts_term(v: &SysView, m: u32, term: &Ktt) -> bool {
    let mut closing = Vec::new();
    let mut body = term;
    while let Ktt::Forget { i, child } = body {
        closing.push(*i);
        body = child;
    }
    closing.reverse();
    product_states(v, m, body).iter().any(|(q, s)| {
        if !s_accepting(v, s) {
            return false;
        }
        let mut q = q.clone();
        for &i in &closing {
            match v_forget(m, &q, i) {
                Some(r) => q = r,
                None => return false,
            }
        }
        v_accepting(&q)
    })
}
