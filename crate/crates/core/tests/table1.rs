//! The three example terms from the validity-automaton walkthrough, with the
//! states the automaton is expected to reach for M = 4.

use tpda_core::avalid::{normalize, v_states, VState};
use tpda_core::model::Interval;
use tpda_core::tcw::EdgeKind;
use tpda_core::treeterm::{eval, is_good, is_restricted, width, Color, Ktt, VertexLabel};

const M: u32 = 4;

fn succ(i: Color, j: Color) -> Ktt {
    Ktt::Succ { a: VertexLabel::default(), i, b: VertexLabel::default(), j }
}

fn add(t: Ktt, i: Color, j: Color, iv: Interval) -> Ktt {
    let e = Ktt::Edge { a: VertexLabel::default(), i, b: VertexLabel::default(), j, interval: iv, kind: EdgeKind::Clock(0) };
    Ktt::combine(t, e)
}

fn tau1() -> Ktt {
    let inner = Ktt::combine(add(succ(3, 4), 1, 4, Interval::at_least(2)), succ(4, 5));
    add(add(inner, 3, 5, Interval::closed(1, 3)), 1, 5, Interval::at_least(3))
}

fn tau2() -> Ktt {
    let inner = Ktt::combine(add(succ(4, 5), 3, 5, Interval::closed(0, 2)), succ(5, 6));
    add(add(inner, 4, 6, Interval::closed(1, 3)), 2, 6, Interval::at_least(3))
}

fn tau3() -> Ktt {
    let right = Ktt::rename(3, 4, Ktt::rename(4, 5, Ktt::forget(5, tau2())));
    Ktt::forget(5, Ktt::combine(tau1(), right))
}

fn state(points: &[Color], left: Color, tsm: &[u32], acc: &[bool]) -> VState {
    normalize(M, &VState { points: points.to_vec(), left, tsm: tsm.to_vec(), acc: acc.to_vec() })
}

#[test]
fn terms_are_good() {
    for t in [tau1(), tau2(), tau3()] {
        assert!(is_good(&t), "{t}");
    }
    assert!(is_restricted(&tau1()));
    assert!(is_restricted(&tau2()));
    assert_eq!(width(&tau3()), 6);
}

#[test]
fn tau3_graph_has_seven_vertices() {
    let g = eval(&tau3()).unwrap();
    assert_eq!(g.labels.len(), 7);
    assert_eq!(g.act(), vec![1, 2, 3, 4, 6]);
    assert_eq!(g.left(), Some(3));
    assert_eq!(g.succ.len(), 4);
    assert_eq!(g.edges.len(), 6);
}

#[test]
fn tau1_reaches_q1() {
    let q1 = state(&[1, 3, 4, 5], 3, &[0, 1, 2, 0], &[false, true, true, false]);
    assert!(v_states(M, &tau1()).contains(&q1));
}

#[test]
fn tau2_reaches_q2() {
    let q2 = state(&[2, 3, 4, 5, 6], 4, &[3, 2, 0, 0, 3], &[true, true, true, true, false]);
    assert!(v_states(M, &tau2()).contains(&q2));
}

#[test]
fn tau3_reaches_q3() {
    let q3 = state(&[1, 2, 3, 4, 6], 3, &[0, 3, 1, 2, 3], &[true, true, true, false, false]);
    let states = v_states(M, &tau3());
    assert!(states.contains(&q3));
    // every reachable state agrees with the realization on the pinned gaps
    assert!(states.iter().all(|q| q.points == vec![1, 2, 3, 4, 6] && q.left == 3));
}

#[test]
fn q3_derived_quantities() {
    let q3 = state(&[1, 2, 3, 4, 6], 3, &[0, 3, 1, 2, 3], &[true, true, true, false, false]);
    assert!(q3.big_acc(1, 4));
    assert_eq!(q3.d(M, 1, 4), 2);
    assert_eq!(q3.big_d(M, 1, 4), 6);
    assert!(!q3.big_acc(3, 6));
    assert_eq!(q3.d(M, 3, 6), 2);
    assert_eq!(q3.big_d(M, 3, 6), 2);
}
