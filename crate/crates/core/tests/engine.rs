use tpda_core::engine::{check, verify_witness, CheckOptions, Verdict};
use tpda_core::model::TimedSystem;
use tpda_core::oracle::{self, gen_random_system, OracleVerdict, Profile};

fn agree(sys: &TimedSystem, opts: &CheckOptions, what: &str) -> bool {
    let got = check(sys, opts).unwrap_or_else(|e| panic!("{what}: {e}"));
    let want = oracle::check(sys, 12);
    match (&got.verdict, &want) {
        (Verdict::Nonempty(w), OracleVerdict::Nonempty { .. }) => {
            if let Some(w) = w {
                verify_witness(sys, &w.run, &w.ts).unwrap_or_else(|e| panic!("{what}: bad witness: {e}"));
            }
            true
        }
        (Verdict::Empty, OracleVerdict::Empty) => false,
        (v, o) => panic!("{what}: engine says {}, oracle says {}\n{sys}", v.tag(), o.tag()),
    }
}

#[test]
fn acyclic_tpda_match_oracle() {
    let mut nonempty = 0;
    for seed in 0..400u64 {
        nonempty += agree(&gen_random_system(seed, &Profile::small_tpda()), &CheckOptions::default(), &format!("seed {seed}")) as usize;
    }
    assert!(nonempty > 50, "{nonempty}");
}

#[test]
fn acyclic_ta_match_oracle() {
    for seed in 0..400u64 {
        agree(&gen_random_system(5000 + seed, &Profile::small_ta()), &CheckOptions::default(), &format!("seed {seed}"));
    }
}

#[test]
fn aggressive_mode_agrees() {
    let opts = CheckOptions { aggressive: true, ..Default::default() };
    for seed in 0..300u64 {
        let p = if seed % 2 == 0 { Profile::small_tpda() } else { Profile::small_ta() };
        agree(&gen_random_system(9000 + seed, &p), &opts, &format!("seed {seed}"));
    }
}

#[test]
fn larger_systems_match_oracle() {
    let p = Profile { max_states: 6, max_transitions: 10, max_clocks: 3, max_constant: 3, stack: false, acyclic: true };
    for seed in 0..60u64 {
        agree(&gen_random_system(20_000 + seed, &p), &CheckOptions::default(), &format!("seed {seed}"));
    }
}

#[test]
fn explicit_colors_agree_with_canonical() {
    let p = Profile { max_states: 4, max_transitions: 4, max_clocks: 1, max_constant: 2, stack: true, acyclic: true };
    for seed in 0..60u64 {
        let sys = gen_random_system(30_000 + seed, &p);
        let a = check(&sys, &CheckOptions { witness: false, ..Default::default() }).unwrap();
        let b = check(&sys, &CheckOptions { canonical: false, ..Default::default() }).unwrap();
        assert_eq!(a.verdict.tag(), b.verdict.tag(), "seed {seed}\n{sys}");
        if let Verdict::Nonempty(Some(w)) = &b.verdict {
            verify_witness(&sys, &w.run, &w.ts).unwrap();
        }
    }
}

// With cycles the oracle can only refute bounded lengths, so only its
// positive answers are binding.
#[test]
fn cyclic_systems_one_sided() {
    let p = Profile { acyclic: false, ..Profile::small_tpda() };
    let opts = CheckOptions { state_cap: 20_000, ..Default::default() };
    let mut decided = 0;
    for seed in 0..100u64 {
        let sys = gen_random_system(40_000 + seed, &p);
        let got = check(&sys, &opts).unwrap();
        match (&got.verdict, oracle::check(&sys, 8)) {
            (Verdict::Capped, _) => continue,
            (Verdict::Empty, OracleVerdict::Nonempty { run, .. }) => panic!("seed {seed}: engine says EMPTY but {run:?} is accepting\n{sys}"),
            (Verdict::Nonempty(Some(w)), _) => verify_witness(&sys, &w.run, &w.ts).unwrap(),
            _ => {}
        }
        decided += 1;
    }
    assert!(decided > 60, "{decided}");
}

#[test]
fn thread_count_does_not_change_results() {
    for seed in 0..40u64 {
        let sys = gen_random_system(50_000 + seed, &Profile::small_tpda());
        let one = check(&sys, &CheckOptions { threads: Some(1), ..Default::default() }).unwrap();
        let four = check(&sys, &CheckOptions { threads: Some(4), ..Default::default() }).unwrap();
        assert_eq!(one.stats.reached_states, four.stats.reached_states, "seed {seed}");
        assert_eq!(one.stats.productions, four.stats.productions, "seed {seed}");
        match (&one.verdict, &four.verdict) {
            (Verdict::Nonempty(Some(a)), Verdict::Nonempty(Some(b))) => assert_eq!((&a.run, &a.ts), (&b.run, &b.ts)),
            (a, b) => assert_eq!(a.tag(), b.tag()),
        }
    }
}

#[test]
fn initial_final_state_is_empty_run() {
    let sys = tpda_core::model::parse_system("system ta\nclocks\nstates s\ninitial s\nfinal s\n").unwrap();
    match check(&sys, &CheckOptions::default()).unwrap().verdict {
        Verdict::Nonempty(Some(w)) => assert!(w.run.is_empty()),
        v => panic!("{}", v.tag()),
    }
}

#[test]
fn color_budget_is_checked() {
    let sys = gen_random_system(1, &Profile::small_tpda());
    assert!(check(&sys, &CheckOptions { k: Some(40), ..Default::default() }).is_err());
    assert!(check(&sys, &CheckOptions { k: Some(1), ..Default::default() }).is_err());
}
