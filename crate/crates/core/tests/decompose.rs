use tpda_core::asys::SysView;
use tpda_core::avalid::v_accepts_term;
use tpda_core::engine::product_accepts_term;
use tpda_core::oracle::{accepting_runs, gen_random_system, random_tcw, Profile};
use tpda_core::tcw::{rational_feasible, realize, run_to_tcw};
use tpda_core::treeterm::{color_bound, decompose, eval, is_restricted, same_word, width};

#[test]
fn random_words_round_trip_within_bound() {
    for seed in 0..300u64 {
        let stack = seed % 2 == 0;
        let clocks = (seed % 3) as usize;
        let (_, tcw) = random_tcw(seed, 8, 4, clocks, stack);
        let k = color_bound(clocks, tcw.has_stack_edges());
        let term = decompose(&tcw, k).unwrap_or_else(|e| panic!("seed {seed}: {e}"));
        assert!(width(&term) <= k, "seed {seed}");
        assert!(term.max_color() as usize <= k, "seed {seed}");
        assert!(is_restricted(&term), "seed {seed}: {term}");
        let (back, _) = eval(&term).unwrap().to_tcw().unwrap();
        assert!(same_word(&back, &tcw), "seed {seed}");
    }
}

#[test]
fn validity_matches_realizability() {
    for seed in 0..150u64 {
        let clocks = 1 + (seed % 2) as usize;
        let (_, tcw) = random_tcw(1000 + seed, 7, 4, clocks, seed % 3 == 0);
        let k = color_bound(clocks, tcw.has_stack_edges());
        let term = decompose(&tcw, k).unwrap();
        let real = realize(&tcw).is_ok();
        assert_eq!(real, rational_feasible(&tcw), "seed {seed}");
        assert_eq!(v_accepts_term(4, &term), real, "seed {seed}: {term}");
    }
}

#[test]
fn product_accepts_realizable_runs() {
    let mut checked = 0;
    for seed in 0..80u64 {
        let p = if seed % 2 == 0 { Profile::small_tpda() } else { Profile::small_ta() };
        let sys = gen_random_system(seed, &p);
        let view = SysView::new(&sys);
        let m = sys.constants().m;
        for run in accepting_runs(&sys, 5, 3) {
            let tcw = run_to_tcw(&sys, &run).unwrap();
            let k = color_bound(sys.clocks.len(), tcw.has_stack_edges());
            let term = decompose(&tcw, k).unwrap();
            let real = realize(&tcw).is_ok();
            assert_eq!(product_accepts_term(&view, m, &term), real, "seed {seed} run {run:?}: {term}");
            checked += 1;
        }
    }
    assert!(checked > 20, "only {checked} runs");
}
