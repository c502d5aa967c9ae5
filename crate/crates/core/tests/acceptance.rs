//! One pass/fail line per acceptance criterion. Run with
//! `cargo test -p tpda-core --test acceptance -- --nocapture`.

use std::collections::BTreeMap;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use tpda_core::asys::SysView;
use tpda_core::avalid::{normalize, v_accepts_term, VState};
use tpda_core::engine::{check, product_accepts_term, verify_witness, CheckOptions, CheckResult, Verdict};
use tpda_core::mazegen::{bundled_examples, lift_place_run, maze_to_tpda, parse_maze, place_run, FIG5_RUN};
use tpda_core::model::{bundled_systems, parse_system, TimedSystem};
use tpda_core::oracle::{self, accepting_runs, gen_random_system, random_tcw, Profile};
use tpda_core::tcw::{rational_feasible, realize, run_to_tcw};
use tpda_core::treeterm::{color_bound, decompose, eval, is_restricted, same_word, width};

type Outcome = Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)+) => {
        if !$cond {
            return Err(format!($($fmt)+));
        }
    };
}

/// Witnesses seen by every criterion; criterion 6 reports on the total.
#[derive(Default)]
struct Witnesses {
    checked: usize,
    bad: Vec<String>,
}

impl Witnesses {
    fn note(&mut self, sys: &TimedSystem, r: &CheckResult, what: &str) {
        if let Verdict::Nonempty(w) = &r.verdict {
            self.checked += 1;
            match w {
                Some(w) => {
                    if let Err(e) = verify_witness(sys, &w.run, &w.ts) {
                        self.bad.push(format!("{what}: {e}"));
                    }
                }
                None => self.bad.push(format!("{what}: no witness")),
            }
        }
    }
}

fn table1() -> Outcome {
    let t = Instant::now();
    let q3 = normalize(4, &VState { points: vec![1, 2, 3, 4, 6], left: 3, tsm: vec![0, 3, 1, 2, 3], acc: vec![true, true, true, false, false] });
    let got = (q3.big_acc(1, 4), q3.d(4, 1, 4), q3.big_d(4, 1, 4), q3.big_acc(3, 6), q3.d(4, 3, 6), q3.big_d(4, 3, 6));
    ensure!(got == (true, 2, 6, false, 2, 2), "got {got:?}");
    ensure!(t.elapsed() < Duration::from_secs(1), "took {:?}", t.elapsed());
    Ok("ACC/d/D match for (1,4) and (3,6)".into())
}

fn fig5(ws: &mut Witnesses) -> Outcome {
    let maze = parse_maze(bundled_examples()[0].source).map_err(|e| e.to_string())?;
    let params = BTreeMap::from([("m".to_string(), 7), ("n".to_string(), 8)]);
    let sys = maze_to_tpda(&maze, &params).map_err(|e| e.to_string())?;
    let t = Instant::now();
    let r = check(&sys, &CheckOptions::default()).map_err(|e| e.to_string())?;
    let took = t.elapsed();
    ws.note(&sys, &r, "fig5");
    let Verdict::Nonempty(Some(w)) = &r.verdict else { return Err(format!("verdict {}", r.verdict.tag())) };
    verify_witness(&sys, &w.run, &w.ts).map_err(|e| e.to_string())?;
    let end = place_run(&sys, &w.run, &w.ts).pop();
    ensure!(end == Some(("2".to_string(), 15)), "witness ends at {end:?}");
    let listed: Vec<(String, u64)> = FIG5_RUN.iter().map(|&(p, t)| (p.to_string(), t)).collect();
    let (run, ts) = lift_place_run(&sys, &listed).ok_or("listed run does not fit the maze")?;
    verify_witness(&sys, &run, &ts).map_err(|e| format!("listed run: {e}"))?;
    ensure!(took < Duration::from_secs(60), "took {took:?}");
    Ok(format!("NONEMPTY, exit at 15, listed run valid, {} states in {took:.2?}", r.stats.reached_states))
}

fn oracle_equivalence(ws: &mut Witnesses) -> Outcome {
    let t = Instant::now();
    let mut nonempty = 0;
    for seed in 0..200u64 {
        let sys = gen_random_system(seed, &Profile::small_tpda());
        let r = check(&sys, &CheckOptions::default()).map_err(|e| format!("seed {seed}: {e}"))?;
        ws.note(&sys, &r, &format!("random seed {seed}"));
        let want = oracle::check(&sys, 12);
        ensure!(r.verdict.tag() == want.tag(), "seed {seed}: engine {} oracle {}", r.verdict.tag(), want.tag());
        nonempty += want.is_nonempty() as usize;
    }
    ensure!(t.elapsed() < Duration::from_secs(600), "took {:?}", t.elapsed());
    Ok(format!("200/200 agree ({nonempty} nonempty) in {:.2?}", t.elapsed()))
}

fn decomposition() -> Outcome {
    let mut done = 0;
    let mut seed = 0u64;
    while done < 100 {
        ensure!(seed < 2000, "only {done} runs found");
        let p = if seed.is_multiple_of(2) { Profile::small_tpda() } else { Profile::small_ta() };
        let sys = gen_random_system(seed, &p);
        let view = SysView::new(&sys);
        let m = sys.constants().m;
        let x = sys.clocks.len();
        for run in accepting_runs(&sys, 6, 2) {
            let tcw = run_to_tcw(&sys, &run).map_err(|e| e.to_string())?;
            let bound = color_bound(x, tcw.has_stack_edges());
            let term = decompose(&tcw, bound).map_err(|e| format!("seed {seed}: {e}"))?;
            ensure!(width(&term) <= bound && term.max_color() as usize <= bound, "seed {seed}: {term} exceeds {bound}");
            ensure!(is_restricted(&term), "seed {seed}: {term} is not restricted");
            let (back, _) = eval(&term).map_err(|e| e.to_string())?.to_tcw().map_err(|e| e.to_string())?;
            ensure!(same_word(&back, &tcw), "seed {seed}: round trip differs");
            if realize(&tcw).is_ok() {
                ensure!(product_accepts_term(&view, m, &term), "seed {seed}: product rejects {term}");
            }
            done += 1;
        }
        seed += 1;
    }
    Ok(format!("{done} runs within |X|+2 (TA, at least 3) and 3|X|+3 (TPDA) colors, round-tripped, accepted"))
}

fn realizability() -> Outcome {
    let mut realizable = 0;
    for seed in 0..300u64 {
        let clocks = (seed % 3) as usize;
        let (_, tcw) = random_tcw(70_000 + seed, 8, 4, clocks, seed % 2 == 0);
        let k = color_bound(clocks, tcw.has_stack_edges());
        let term = decompose(&tcw, k).map_err(|e| format!("seed {seed}: {e}"))?;
        let real = realize(&tcw).is_ok();
        ensure!(real == rational_feasible(&tcw), "seed {seed}: integer and rational feasibility differ");
        ensure!(v_accepts_term(4, &term) == real, "seed {seed}: validity automaton says {}", !real);
        realizable += real as usize;
    }
    Ok(format!("300/300 agree ({realizable} realizable)"))
}

fn witnesses(ws: &Witnesses) -> Outcome {
    ensure!(ws.bad.is_empty(), "{} bad: {}", ws.bad.len(), ws.bad[0]);
    Ok(format!("{}/{} witnesses valid", ws.checked, ws.checked))
}

fn stack_bound(ws: &mut Witnesses) -> Outcome {
    let opts = CheckOptions { aggressive: true, exhaustive: true, ..Default::default() };
    let mut parts = Vec::new();
    for (name, src) in bundled_systems() {
        let sys = parse_system(src).map_err(|e| e.to_string())?;
        ensure!(sys.clocks.is_empty(), "{name} has clocks");
        let c = sys.constants();
        let bound = 2 * (c.m as usize * c.t).pow(2);
        let r = check(&sys, &opts).map_err(|e| e.to_string())?;
        ws.note(&sys, &r, name);
        ensure!(r.stats.reached_states <= bound, "{name}: {} > {bound}", r.stats.reached_states);
        parts.push(format!("{name} {}/{bound}", r.stats.reached_states));
    }
    // the counts a bench sweep reports
    let maze = parse_maze(bundled_examples()[0].source).map_err(|e| e.to_string())?;
    let counts = || -> Result<Vec<usize>, String> {
        (1..=4u32)
            .map(|v| {
                let params = BTreeMap::from([("m".to_string(), v), ("n".to_string(), v)]);
                let sys = maze_to_tpda(&maze, &params).map_err(|e| e.to_string())?;
                let opts = CheckOptions { aggressive: true, exhaustive: true, witness: false, ..Default::default() };
                Ok(check(&sys, &opts).map_err(|e| e.to_string())?.stats.reached_states)
            })
            .collect()
    };
    let a = counts()?;
    ensure!(a == counts()?, "bench counts differ between runs");
    Ok(format!("{}; bench counts stable", parts.join(", ")))
}

fn determinism() -> Outcome {
    let mut systems: Vec<(String, TimedSystem)> = (0..30u64).map(|s| (format!("seed {s}"), gen_random_system(80_000 + s, &Profile::small_tpda()))).collect();
    let maze = parse_maze(bundled_examples()[1].source).map_err(|e| e.to_string())?;
    systems.push(("maze2".into(), maze_to_tpda(&maze, &BTreeMap::new()).map_err(|e| e.to_string())?));
    for (name, sys) in &systems {
        let runs: Vec<_> = [Some(1), Some(4), None, Some(4)]
            .into_iter()
            .map(|threads| check(sys, &CheckOptions { threads, ..Default::default() }).map(|r| (r.verdict.tag(), r.stats.reached_states)))
            .collect::<Result<_, _>>()
            .map_err(|e| e.to_string())?;
        ensure!(runs.windows(2).all(|w| w[0] == w[1]), "{name}: {runs:?}");
    }
    Ok(format!("{} inputs identical across 1/4/default threads", systems.len()))
}

fn main() {
    let mut ws = Witnesses::default();
    let mut lines = Vec::new();
    let mut report = |n: u32, name: &str, f: &mut dyn FnMut() -> Outcome| {
        let out = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|_| Err("panicked".into()));
        lines.push((n, name.to_string(), out));
    };
    report(1, "pinned ACC/d/D values", &mut table1);
    report(2, "maze case study", &mut || fig5(&mut ws));
    report(3, "oracle equivalence", &mut || oracle_equivalence(&mut ws));
    report(4, "decomposition", &mut decomposition);
    report(5, "realizability", &mut realizability);
    report(7, "stack-only bound", &mut || stack_bound(&mut ws));
    report(8, "determinism", &mut determinism);
    // runs last so it sees every witness above
    report(6, "witness soundness", &mut || witnesses(&ws));
    lines.sort_by_key(|l| l.0);
    let mut failed = false;
    for (n, name, out) in lines {
        match out {
            Ok(msg) => println!("criterion {n} PASS {name}: {msg}"),
            Err(msg) => {
                failed = true;
                println!("criterion {n} FAIL {name}: {msg}");
            }
        }
    }
    if failed {
        std::process::exit(1);
    }
}
