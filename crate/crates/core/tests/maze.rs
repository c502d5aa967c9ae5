use std::collections::BTreeMap;

use tpda_core::engine::{check, verify_witness, CheckOptions, Verdict};
use tpda_core::mazegen::{bundled_examples, lift_place_run, maze_to_tpda, parse_maze, place_run, FIG5_RUN};
use tpda_core::model::{bundled_systems, parse_system, validate, TimedSystem};
use tpda_core::oracle;

fn fig5(m: u32, n: u32) -> TimedSystem {
    let maze = parse_maze(bundled_examples()[0].source).unwrap();
    let params = BTreeMap::from([("m".to_string(), m), ("n".to_string(), n)]);
    maze_to_tpda(&maze, &params).unwrap()
}

#[test]
fn fig5_is_nonempty_and_exits_at_15() {
    let sys = fig5(7, 8);
    for aggressive in [true, false] {
        let r = check(&sys, &CheckOptions { aggressive, ..Default::default() }).unwrap();
        let Verdict::Nonempty(Some(w)) = r.verdict else { panic!("{}", r.verdict.tag()) };
        verify_witness(&sys, &w.run, &w.ts).unwrap();
        let places = place_run(&sys, &w.run, &w.ts);
        assert_eq!(places.first().map(|p| p.0.as_str()), Some("6"));
        assert_eq!(places.last(), Some(&("2".to_string(), 15)));
        assert_eq!(*w.ts.last().unwrap(), 15);
    }
}

#[test]
fn listed_fig5_run_is_accepted() {
    let sys = fig5(7, 8);
    let places: Vec<(String, u64)> = FIG5_RUN.iter().map(|&(p, t)| (p.to_string(), t)).collect();
    let (run, ts) = lift_place_run(&sys, &places).expect("run fits the maze");
    verify_witness(&sys, &run, &ts).unwrap();
    assert_eq!(place_run(&sys, &run, &ts), places);
}

#[test]
fn fig5_budgets_matter() {
    assert!(matches!(check(&fig5(1, 1), &CheckOptions::default()).unwrap().verdict, Verdict::Empty));
}

#[test]
fn bundled_mazes_match_pinned_verdicts_and_oracle() {
    for b in bundled_examples() {
        let maze = parse_maze(b.source).unwrap();
        let sys = maze_to_tpda(&maze, &BTreeMap::new()).unwrap();
        assert!(validate(&sys).is_empty(), "{}", b.name);
        let r = check(&sys, &CheckOptions { aggressive: true, ..Default::default() }).unwrap();
        assert_eq!(r.verdict.tag(), if b.nonempty { "NONEMPTY" } else { "EMPTY" }, "{}", b.name);
        if let Verdict::Nonempty(Some(w)) = &r.verdict {
            verify_witness(&sys, &w.run, &w.ts).unwrap();
        }
        if b.name != "fig5" {
            assert_eq!(oracle::check(&sys, 30).is_nonempty(), b.nonempty, "{}", b.name);
        }
    }
}

#[test]
fn compiled_maze_round_trips_through_text() {
    let sys = fig5(7, 8);
    assert_eq!(parse_system(&sys.to_string()).unwrap(), sys);
}

#[test]
fn stack_only_systems_stay_within_bound() {
    for (name, src) in bundled_systems() {
        let sys = parse_system(src).unwrap();
        assert!(sys.clocks.is_empty());
        let c = sys.constants();
        let bound = 2 * (c.m as usize * c.t).pow(2);
        let opts = CheckOptions { aggressive: true, exhaustive: true, ..Default::default() };
        let r = check(&sys, &opts).unwrap();
        assert!(r.stats.reached_states <= bound, "{name}: {} > {bound}", r.stats.reached_states);
        assert_eq!(r.verdict.tag() == "NONEMPTY", oracle::check(&sys, 10).is_nonempty(), "{name}");
    }
}
