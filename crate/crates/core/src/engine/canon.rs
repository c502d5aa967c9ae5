//! Product automaton over canonically colored states.
//!
//! Only the relative order of colors matters to both automata, so a state
//! stores its active points as a plain sequence indexed from 0 and never
//! renames. Combine instead guesses how the hanging points of the right
//! operand interleave with the points of the left one.

use std::fmt::Write as _;
use std::hash::{Hash, Hasher};

use smallvec::SmallVec;

use super::saturate::Rules;
use crate::model::{Interval, StackOp, TimedSystem, MAX_CLOCKS};

pub(crate) const MAXK: usize = 16;
pub(crate) const NONE: u8 = u8::MAX;
pub(crate) const DUMMY16: u16 = u16::MAX;
const PUSH: u8 = 1;
const POP: u8 = 2;

#[derive(Clone, PartialEq, Eq, Debug)]
pub(crate) struct CState {
    pub n: u8,
    /// Index of the leftmost point of the chain; smaller indices are hanging.
    pub left: u8,
    pub flags: u8,
    /// Bit `k`: the gap from point `k` to `k + 1` is below `M`.
    pub acc: u16,
    pub g: u16,
    pub tsm: [u16; MAXK],
    pub delta: [u16; MAXK],
    /// Index of the hanging reset source of each clock.
    pub z: [u8; MAX_CLOCKS],
}

// Slots past `n` are always zero, so hashing the live prefix agrees with `Eq`.
impl Hash for CState {
    fn hash<H: Hasher>(&self, h: &mut H) {
        let n = self.n as usize;
        h.write_u64(u64::from(self.n) | u64::from(self.left) << 8 | u64::from(self.flags) << 16 | u64::from(self.acc) << 24 | u64::from(self.g) << 40);
        for k in 0..n {
            h.write_u32(u32::from(self.tsm[k]) | u32::from(self.delta[k]) << 16);
        }
        h.write(&self.z);
    }
}

#[derive(Clone, Debug)]
pub(crate) enum CStep {
    Leaf,
    Forget { p: u32, k: u8 },
    Stack { p: u32, drop: u16 },
    /// `src` indexes the source in the state before `drop` is applied.
    Clock { p: u32, x: u8, src: u8, new: bool, drop: u16 },
    Combine { a: u32, b: u32, map1: [u8; MAXK], map2: [u8; MAXK], drop: u16 },
}

pub(crate) struct TInfo {
    pub src: usize,
    pub dst: usize,
    pub reset: u16,
    pub gmask: u16,
    pub guard: Vec<Option<Interval>>,
    pub push: Option<usize>,
    pub pop: Option<(usize, Interval)>,
}

pub(crate) struct Canon<'a> {
    pub sys: &'a TimedSystem,
    pub info: Vec<TInfo>,
    pub m: u32,
    pub k: usize,
    pub nclocks: usize,
    pub aggressive: bool,
    /// Transitions resetting each clock (the start point excluded).
    resetters: Vec<Vec<u16>>,
}

type Out = Vec<(CState, CStep)>;

impl<'a> Canon<'a> {
    pub fn new(sys: &'a TimedSystem, m: u32, k: usize, aggressive: bool) -> Self {
        let nclocks = sys.clocks.len();
        let mut info: Vec<TInfo> = sys
            .transitions
            .iter()
            .map(|t| TInfo {
                src: t.source,
                dst: t.target,
                reset: t.reset_mask() as u16,
                gmask: t.guard_mask() as u16,
                guard: (0..nclocks).map(|x| t.guard_on(x)).collect(),
                push: match t.op {
                    StackOp::Push(c) => Some(c),
                    _ => None,
                },
                pop: match t.op {
                    StackOp::Pop(c, iv) => Some((c, iv)),
                    _ => None,
                },
            })
            .collect();
        info.push(TInfo {
            src: usize::MAX,
            dst: sys.initial,
            reset: sys.all_clocks_mask() as u16,
            gmask: 0,
            guard: vec![None; nclocks],
            push: None,
            pop: None,
        });
        let resetters = (0..nclocks)
            .map(|x| (0..sys.transitions.len() as u16).filter(|&d| sys.transitions[d as usize].resets_clock(x)).collect())
            .collect();
        Canon { sys, info, m, k, nclocks, aggressive, resetters }
    }

    pub fn inf(&self, d: u16) -> &TInfo {
        if d == DUMMY16 {
            self.info.last().unwrap()
        } else {
            &self.info[d as usize]
        }
    }

    fn gap(&self, s: &CState, k: usize) -> u32 {
        (s.tsm[k + 1] as u32 + self.m - s.tsm[k] as u32) % self.m
    }

    /// Whether an edge with interval `iv` from point `from` to point `to`
    /// agrees with the stored gaps.
    fn edge_fits(&self, s: &CState, from: usize, to: usize, iv: Interval) -> bool {
        let mut all = true;
        let mut d = 0u64;
        for k in from..to {
            all &= s.acc & (1 << k) != 0;
            d += self.gap(s, k) as u64;
        }
        let a = all && d < self.m as u64;
        (a && iv.contains(d as i64)) || (!a && iv.is_unbounded())
    }

    /// Whether internal point `k` may be dropped: each clock it resets is
    /// reset again before R, or at R once R's guard on it is settled.
    fn forgettable(&self, s: &CState, k: usize) -> bool {
        let r = s.n as usize - 1;
        if k <= s.left as usize || k >= r {
            return false;
        }
        let mut need = self.inf(s.delta[k]).reset;
        for j in k + 1..r {
            need &= !self.inf(s.delta[j]).reset;
        }
        if need == 0 {
            return true;
        }
        let ir = self.inf(s.delta[r]);
        let settled = ir.reset & (s.g | !ir.gmask);
        need & !settled == 0
    }

    fn has_forgettable(&self, s: &CState) -> bool {
        (s.left as usize + 1..(s.n as usize).saturating_sub(1)).any(|k| self.forgettable(s, k))
    }

    fn forget(&self, s: &CState, k: usize) -> CState {
        let n = s.n as usize;
        let mut r = s.clone();
        let joined = s.acc & (1 << (k - 1)) != 0 && s.acc & (1 << k) != 0 && self.gap(s, k - 1) + self.gap(s, k) < self.m;
        let low = s.acc & ((1u16 << k) - 1);
        let high = (s.acc as u32 >> (k + 1)) << k;
        r.acc = low | high as u16;
        if joined {
            r.acc |= 1 << (k - 1);
        } else {
            r.acc &= !(1 << (k - 1));
        }
        for j in k..n - 1 {
            r.tsm[j] = s.tsm[j + 1];
            r.delta[j] = s.delta[j + 1];
        }
        r.tsm[n - 1] = 0;
        r.delta[n - 1] = 0;
        r.n -= 1;
        r
    }

    /// Eager forgets in aggressive mode. Returns the mask of dropped indices.
    fn post(&self, s: &mut CState) -> u16 {
        if !self.aggressive {
            return 0;
        }
        let mut drop = 0u16;
        let mut k = s.n as usize - 2;
        while k > s.left as usize {
            if self.forgettable(s, k) {
                *s = self.forget(s, k);
                drop |= 1 << k;
            }
            k -= 1;
        }
        drop
    }

    fn normalize(&self, s: &mut CState) {
        let base = s.tsm[0] as u32;
        for k in 0..s.n as usize {
            s.tsm[k] = ((s.tsm[k] as u32 + self.m - base) % self.m) as u16;
        }
    }

    fn resets(&self, d: u16, x: usize) -> bool {
        self.inf(d).reset & (1 << x) != 0
    }

    fn add_clock_edges(&self, s: &CState, id: u32, out: &mut Out) {
        let n = s.n as usize;
        let r = n - 1;
        let left = s.left as usize;
        let ir = self.inf(s.delta[r]);
        for x in 0..self.nclocks {
            let Some(iv) = ir.guard[x] else { continue };
            if s.g & (1 << x) != 0 {
                continue;
            }
            let last = (0..r).rev().find(|&k| self.resets(s.delta[k], x));
            if let Some(k) = last {
                let ok_z = k >= left || s.z[x] == NONE || s.z[x] as usize == k;
                if ok_z && self.edge_fits(s, k, r, iv) {
                    let mut q = s.clone();
                    q.g |= 1 << x;
                    if k < left {
                        q.z[x] = k as u8;
                    }
                    let drop = self.post(&mut q);
                    out.push((q, CStep::Clock { p: id, x: x as u8, src: k as u8, new: false, drop }));
                }
            }
            // a fresh hanging source
            if s.z[x] != NONE || n >= self.k {
                continue;
            }
            let lo = last.map_or(0, |k| k + 1);
            for gpos in lo..=left {
                if gpos == 0 && s.delta[0] == DUMMY16 {
                    continue;
                }
                let tags: SmallVec<[u16; 8]> = if gpos == 0 {
                    self.resetters[x].iter().copied().chain([DUMMY16]).collect()
                } else {
                    self.resetters[x].iter().copied().collect()
                };
                let mut tsm = [0u16; MAXK];
                let mut cons: SmallVec<[(u8, u8, bool); MAXK]> = SmallVec::new();
                for k in 0..n {
                    let mk = if k < gpos { k } else { k + 1 };
                    tsm[mk] = s.tsm[k];
                    if k + 1 < n {
                        let mk1 = if k + 1 < gpos { k + 1 } else { k + 2 };
                        cons.push((mk as u8, mk1 as u8, s.acc & (1 << k) != 0));
                    }
                }
                for tv in 0..self.m {
                    tsm[gpos] = tv as u16;
                    let d = (s.tsm[r] as u32 + self.m - tv) % self.m;
                    for be in [true, false] {
                        if (be && !iv.contains(d as i64)) || (!be && !iv.is_unbounded()) {
                            continue;
                        }
                        cons.push((gpos as u8, (r + 1) as u8, be));
                        for acc in solve_bits(self.m, &tsm, n + 1, &cons) {
                            for &tag in &tags {
                                let mut q = s.clone();
                                q.n += 1;
                                q.left += 1;
                                q.acc = acc;
                                q.tsm = tsm;
                                for k in (gpos..n).rev() {
                                    q.delta[k + 1] = s.delta[k];
                                }
                                q.delta[gpos] = tag;
                                for z in q.z.iter_mut() {
                                    if *z != NONE && *z as usize >= gpos {
                                        *z += 1;
                                    }
                                }
                                q.z[x] = gpos as u8;
                                q.g |= 1 << x;
                                self.normalize(&mut q);
                                let drop = self.post(&mut q);
                                out.push((q, CStep::Clock { p: id, x: x as u8, src: gpos as u8, new: true, drop }));
                            }
                        }
                        cons.pop();
                    }
                }
            }
        }
    }

    #[allow(clippy::too_many_arguments)]
    fn align(&self, cx: &Cx, t: usize, ptr: usize, news: usize, choice: &mut [(bool, u8); MAXK], out: &mut Out) {
        let (q1, q2) = (cx.q1, cx.q2);
        if t == q2.left as usize {
            self.build(cx, choice, out);
            return;
        }
        let dh = q2.delta[t];
        let th = ((q2.tsm[t] as u32 + cx.shift) % self.m) as u16;
        let l1 = q1.left as usize;
        if cx.base + news < self.k {
            for p in ptr..=l1 {
                if p == 0 && q1.delta[0] == DUMMY16 {
                    continue;
                }
                if dh == DUMMY16 && !(p == 0 && t == 0) {
                    continue;
                }
                choice[t] = (true, p as u8);
                self.align(cx, t + 1, p, news + 1, choice, out);
            }
        }
        for p in ptr..q1.n as usize - 1 {
            if q1.delta[p] == dh && q1.tsm[p] == th {
                choice[t] = (false, p as u8);
                self.align(cx, t + 1, p + 1, news, choice, out);
            }
        }
    }

    // map1, map2, tsm and delta advance together
    #[allow(clippy::needless_range_loop)]
    fn build(&self, cx: &Cx, choice: &[(bool, u8); MAXK], out: &mut Out) {
        let (q1, q2) = (cx.q1, cx.q2);
        let (n1, n2) = (q1.n as usize, q2.n as usize);
        let (l1, l2) = (q1.left as usize, q2.left as usize);
        let r1 = n1 - 1;
        let mut map1 = [0u8; MAXK];
        let mut map2 = [0u8; MAXK];
        let mut tsm = [0u16; MAXK];
        let mut delta = [0u16; MAXK];
        let mut idx = 0usize;
        let mut t = 0usize;
        let shifted = |j: usize| ((q2.tsm[j] as u32 + cx.shift) % self.m) as u16;
        for p in 0..n1 {
            while t < l2 && choice[t] == (true, p as u8) {
                map2[t] = idx as u8;
                tsm[idx] = shifted(t);
                delta[idx] = q2.delta[t];
                idx += 1;
                t += 1;
            }
            while t < l2 && choice[t] == (false, p as u8) {
                map2[t] = idx as u8;
                t += 1;
            }
            map1[p] = idx as u8;
            tsm[idx] = q1.tsm[p];
            delta[idx] = q1.delta[p];
            idx += 1;
        }
        map2[l2] = map1[r1];
        for j in l2 + 1..n2 {
            map2[j] = idx as u8;
            tsm[idx] = shifted(j);
            delta[idx] = q2.delta[j];
            idx += 1;
        }
        let n = idx;
        let lm = map1[l1];
        for x in 0..self.nclocks {
            let z1 = q1.z[x];
            if z1 != NONE {
                let lo = map1[z1 as usize];
                if (0..n2).any(|j| lo < map2[j] && map2[j] < lm && self.resets(q2.delta[j], x)) {
                    return;
                }
            }
            let z2 = q2.z[x];
            if z2 != NONE {
                let lo = map2[z2 as usize];
                let hi = map1[r1];
                if (0..n1).any(|p| lo < map1[p] && map1[p] < hi && self.resets(q1.delta[p], x)) {
                    return;
                }
            }
        }
        let mut cons: SmallVec<[(u8, u8, bool); 2 * MAXK]> = SmallVec::new();
        for p in 0..n1 - 1 {
            cons.push((map1[p], map1[p + 1], q1.acc & (1 << p) != 0));
        }
        for j in 0..n2 - 1 {
            cons.push((map2[j], map2[j + 1], q2.acc & (1 << j) != 0));
        }
        let mut z = [NONE; MAX_CLOCKS];
        for (x, zx) in z.iter_mut().enumerate().take(self.nclocks) {
            let z2 = q2.z[x];
            *zx = if z2 != NONE && map2[z2 as usize] < lm {
                map2[z2 as usize]
            } else if q1.z[x] != NONE {
                map1[q1.z[x] as usize]
            } else {
                NONE
            };
        }
        for acc in solve_bits(self.m, &tsm, n, &cons) {
            let mut q = CState {
                n: n as u8,
                left: lm,
                flags: (q1.flags & PUSH) | (q2.flags & POP),
                acc,
                g: q2.g,
                tsm,
                delta,
                z,
            };
            self.normalize(&mut q);
            let drop = self.post(&mut q);
            out.push((q, CStep::Combine { a: cx.ida, b: cx.idb, map1, map2, drop }));
        }
    }
}

struct Cx<'s> {
    q1: &'s CState,
    q2: &'s CState,
    ida: u32,
    idb: u32,
    shift: u32,
    /// Points of the result before any new hanging point is added.
    base: usize,
}

/// Gap bits of `n` merged points satisfying every `(from, to, bit)`: the
/// gaps from `from` to `to` are all below `M` and sum below `M` exactly when
/// `bit` holds.
fn solve_bits(m: u32, tsm: &[u16; MAXK], n: usize, cons: &[(u8, u8, bool)]) -> SmallVec<[u16; 4]> {
    let mut out = SmallVec::new();
    let mut fmask: u16 = 1 << (n - 1);
    let mut fval: u16 = 0;
    for &(a, b, bit) in cons {
        if b == a + 1 {
            let m_a = 1u16 << a;
            if fmask & m_a != 0 {
                if (fval & m_a != 0) != bit {
                    return out;
                }
            } else {
                fmask |= m_a;
                if bit {
                    fval |= m_a;
                }
            }
        }
    }
    let mut pre = [0u32; MAXK + 1];
    for k in 0..n - 1 {
        pre[k + 1] = pre[k] + (tsm[k + 1] as u32 + m - tsm[k] as u32) % m;
    }
    let all = ((1u32 << n) - 1) as u16;
    let free = !fmask & all;
    let mut sub = free;
    loop {
        let acc = fval | sub;
        let ok = cons.iter().all(|&(a, b, bit)| {
            let range = (((1u32 << b) - 1) & !((1u32 << a) - 1)) as u16;
            (acc & range == range && pre[b as usize] - pre[a as usize] < m) == bit
        });
        if ok {
            out.push(acc);
        }
        if sub == 0 {
            break;
        }
        sub = (sub - 1) & free;
    }
    out
}

impl Rules for Canon<'_> {
    type State = CState;
    type Step = CStep;

    fn leaves(&self) -> Vec<(CState, CStep)> {
        let t = self.sys.transitions.len() as u16;
        let mut out = Vec::new();
        for di in (0..t).chain([DUMMY16]) {
            for dj in 0..t {
                if self.inf(di).dst != self.inf(dj).src {
                    continue;
                }
                for tj in 0..self.m {
                    for a in [false, true] {
                        let mut q = CState {
                            n: 2,
                            left: 0,
                            flags: 0,
                            acc: a as u16,
                            g: 0,
                            tsm: [0; MAXK],
                            delta: [0; MAXK],
                            z: [NONE; MAX_CLOCKS],
                        };
                        q.tsm[1] = tj as u16;
                        q.delta[0] = di;
                        q.delta[1] = dj;
                        out.push((q, CStep::Leaf));
                    }
                }
            }
        }
        out
    }

    fn unary(&self, s: &CState, id: u32, out: &mut Out) {
        let r = s.n as usize - 1;
        let left = s.left as usize;
        if !self.aggressive {
            for k in left + 1..r {
                if self.forgettable(s, k) {
                    out.push((self.forget(s, k), CStep::Forget { p: id, k: k as u8 }));
                }
            }
        }
        let ir = self.inf(s.delta[r]);
        if let (0, Some((c, iv))) = (s.flags, ir.pop) {
            if self.inf(s.delta[left]).push == Some(c) && self.edge_fits(s, left, r, iv) {
                let mut q = s.clone();
                q.flags = PUSH | POP;
                let drop = self.post(&mut q);
                out.push((q, CStep::Stack { p: id, drop }));
            }
        }
        self.add_clock_edges(s, id, out);
    }

    fn combine(&self, q1: &CState, q2: &CState, ida: u32, idb: u32, out: &mut Out) {
        let r1 = q1.n as usize - 1;
        if q1.delta[r1] != q2.delta[q2.left as usize] {
            return;
        }
        // A guard whose source lies on the right operand's own chain is added
        // before combining; doing it afterwards reaches the same states.
        let r2 = q2.n as usize - 1;
        let open = self.inf(q2.delta[r2]).gmask & !q2.g;
        if open != 0 {
            let mut chain = 0u16;
            for k in q2.left as usize..r2 {
                chain |= self.inf(q2.delta[k]).reset;
            }
            if open & chain != 0 {
                return;
            }
        }
        let base = q1.n as usize + q2.n as usize - q2.left as usize - 1;
        if base > self.k {
            return;
        }
        let shift = (q1.tsm[r1] as u32 + self.m - q2.tsm[q2.left as usize] as u32) % self.m;
        let cx = Cx { q1, q2, ida, idb, shift, base };
        let mut choice = [(false, 0u8); MAXK];
        self.align(&cx, 0, 0, 0, &mut choice, out);
    }

    // Forgettable points stay forgettable in any combination and can never
    // be used again, so only forget-closed states are combined.
    fn right_key(&self, s: &CState) -> Option<u64> {
        if !self.aggressive && self.has_forgettable(s) {
            return None;
        }
        let d = s.delta[s.n as usize - 1];
        let i = self.inf(d);
        let pop_ok = i.pop.is_none() || s.flags & POP != 0;
        (pop_ok && i.gmask & !s.g == 0).then_some(d as u64)
    }

    fn left_key(&self, s: &CState) -> Option<u64> {
        if !self.aggressive && self.has_forgettable(s) {
            return None;
        }
        let d = s.delta[s.left as usize];
        (self.inf(d).push.is_none() || s.flags & PUSH != 0).then_some(d as u64)
    }

    fn accepting(&self, s: &CState) -> bool {
        // with no hanging points there is nowhere for a reset source to sit
        debug_assert!(s.left != 0 || s.z[..self.nclocks].iter().all(|&z| z == NONE));
        let i = self.inf(s.delta[s.n as usize - 1]);
        s.left == 0
            && s.delta[0] == DUMMY16
            && self.sys.is_final(i.dst)
            && i.push.is_none()
            && (i.pop.is_none() || s.flags & POP != 0)
            && i.gmask & !s.g == 0
    }

    fn describe(&self, s: &CState) -> String {
        let mut o = String::from("[");
        for k in 0..s.n as usize {
            let d = s.delta[k];
            let tag = if d == DUMMY16 { "start".to_string() } else { format!("t{d}") };
            let sep = if k + 1 == s.n as usize { "" } else if s.acc & (1 << k) != 0 { " <" } else { " >=" };
            let _ = write!(o, "{}{tag}@{}{sep} ", if k == s.left as usize { "|" } else { "" }, s.tsm[k]);
        }
        let _ = write!(o, "] flags={} g={:b}", s.flags, s.g);
        for x in 0..self.nclocks {
            if s.z[x] != NONE {
                let _ = write!(o, " z{x}={}", s.z[x]);
            }
        }
        o
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bits_follow_constraints() {
        let mut tsm = [0u16; MAXK];
        tsm[1] = 3;
        tsm[2] = 1;
        // gaps 3 and 2 with M=4: the outer constraint needs a sum below 4
        let sols = solve_bits(4, &tsm, 3, &[(0, 2, true)]);
        assert!(sols.is_empty());
        let sols = solve_bits(4, &tsm, 3, &[(0, 2, false)]);
        assert_eq!(sols.len(), 4);
        let sols = solve_bits(4, &tsm, 3, &[(0, 1, true), (1, 2, true), (0, 2, false)]);
        assert_eq!(sols.as_slice(), &[0b011]);
    }
}

