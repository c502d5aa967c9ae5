//! Emptiness checking by saturating the product of the validity and system
//! tree automata.

mod canon;
mod explicit;
mod product;
mod saturate;
mod witness;

use std::time::Instant;

use serde::Serialize;
use thiserror::Error;

use crate::asys::SysView;
use crate::model::{SystemKind, TimedSystem, MAX_CLOCKS};
use crate::tcw::Tcw;
use crate::treeterm::{color_bound, Ktt};

pub use product::{product_accepts_term, product_states, PairState};
pub use witness::verify_witness;

use saturate::{saturate, SatOptions, SatOutcome};

/// Largest color budget of the canonical engine.
pub const MAX_COLORS: usize = canon::MAXK;

#[derive(Debug, Clone)]
pub struct CheckOptions {
    /// Color budget; defaults to the bound for the system's shape.
    pub k: Option<usize>,
    pub state_cap: usize,
    /// Forget points as soon as no later step can need them.
    pub aggressive: bool,
    /// Index points by order instead of enumerating explicit colors.
    pub canonical: bool,
    pub threads: Option<usize>,
    /// Print every reached state to stderr.
    pub trace: bool,
    /// Rebuild a witness for nonempty verdicts.
    pub witness: bool,
    /// Keep saturating after the first accepting state, so that
    /// `reached_states` counts the whole reachable product.
    pub exhaustive: bool,
}

impl Default for CheckOptions {
    fn default() -> Self {
        CheckOptions { k: None, state_cap: 5_000_000, aggressive: false, canonical: true, threads: None, trace: false, witness: true, exhaustive: false }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Stats {
    pub reached_states: usize,
    pub productions: u64,
    pub time_ms: u64,
    #[serde(rename = "K")]
    pub k: usize,
    #[serde(rename = "M")]
    pub m: u32,
    #[serde(rename = "T")]
    pub t: usize,
}

#[derive(Debug, Clone)]
pub struct Witness {
    /// Transition indices in firing order.
    pub run: Vec<usize>,
    pub tcw: Tcw,
    /// Least integer timestamps, position 0 included.
    pub ts: Vec<u64>,
    /// A tree term of the witness word within the color bound, accepted by
    /// the product automaton; absent for the empty run.
    pub term: Option<Ktt>,
}

#[derive(Debug, Clone)]
pub enum Verdict {
    Empty,
    /// Nonempty; the witness is present unless witnesses were disabled.
    Nonempty(Option<Box<Witness>>),
    /// The state cap was hit before a decision.
    Capped,
}

impl Verdict {
    pub fn tag(&self) -> &'static str {
        match self {
            Verdict::Empty => "EMPTY",
            Verdict::Nonempty(_) => "NONEMPTY",
            Verdict::Capped => "UNDECIDED-CAPPED",
        }
    }
}

#[derive(Debug, Clone)]
pub struct CheckResult {
    pub verdict: Verdict,
    pub stats: Stats,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EngineError {
    #[error("invalid system: {}", .0.join("; "))]
    Invalid(Vec<String>),
    #[error("color budget {0} out of range (2..={MAX_COLORS} in canonical mode)")]
    Colors(usize),
    #[error("system too large for the engine: {0}")]
    TooLarge(String),
    #[error("internal error while rebuilding the witness: {0}")]
    Witness(String),
    #[error("thread pool: {0}")]
    Pool(String),
}

/// Default color budget for a system.
pub fn default_k(sys: &TimedSystem) -> usize {
    color_bound(sys.clocks.len(), sys.kind == SystemKind::Tpda)
}

/// Decides emptiness of `sys`.
pub fn check(sys: &TimedSystem, opts: &CheckOptions) -> Result<CheckResult, EngineError> {
    let problems = crate::model::validate(sys);
    if !problems.is_empty() {
        return Err(EngineError::Invalid(problems));
    }
    let k = opts.k.unwrap_or_else(|| default_k(sys));
    if k < 2 || (opts.canonical && k > MAX_COLORS) {
        return Err(EngineError::Colors(k));
    }
    if sys.clocks.len() > MAX_CLOCKS {
        return Err(EngineError::TooLarge(format!("{} clocks", sys.clocks.len())));
    }
    if sys.transitions.len() >= u16::MAX as usize {
        return Err(EngineError::TooLarge(format!("{} transitions", sys.transitions.len())));
    }
    let consts = sys.constants();
    if consts.m > u16::MAX as u32 {
        return Err(EngineError::TooLarge(format!("constant bound {}", consts.m)));
    }
    let start = Instant::now();
    let mut stats = Stats { reached_states: 0, productions: 0, time_ms: 0, k, m: consts.m, t: consts.t };
    if sys.is_final(sys.initial) {
        stats.time_ms = start.elapsed().as_millis() as u64;
        let w = opts.witness.then(|| Box::new(witness::empty_run(sys)));
        return Ok(CheckResult { verdict: Verdict::Nonempty(w), stats });
    }
    let mut run = || run_engine(sys, opts, k, consts.m, &mut stats);
    let verdict = match opts.threads {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| EngineError::Pool(e.to_string()))?
            .install(run)?,
        None => run()?,
    };
    stats.time_ms = start.elapsed().as_millis() as u64;
    Ok(CheckResult { verdict, stats })
}

fn run_engine(sys: &TimedSystem, opts: &CheckOptions, k: usize, m: u32, stats: &mut Stats) -> Result<Verdict, EngineError> {
    let sat_opts = SatOptions { state_cap: opts.state_cap, stop_at_accept: !opts.exhaustive, trace: opts.trace, chunk: 4096 };
    if opts.canonical {
        let rules = canon::Canon::new(sys, m, k, opts.aggressive);
        let sat = saturate(&rules, sat_opts);
        stats.reached_states = sat.states.len();
        stats.productions = sat.productions;
        match sat.outcome {
            SatOutcome::Saturated => Ok(Verdict::Empty),
            SatOutcome::Capped => Ok(Verdict::Capped),
            SatOutcome::Accepted(_) if !opts.witness => Ok(Verdict::Nonempty(None)),
            SatOutcome::Accepted(id) => {
                let w = with_big_stack(|| witness::finish(sys, m, k, witness::canon_term(&rules, &sat, id)))?;
                Ok(Verdict::Nonempty(Some(Box::new(w))))
            }
        }
    } else {
        let rules = explicit::Explicit { view: SysView::new(sys), m, k };
        let sat = saturate(&rules, sat_opts);
        stats.reached_states = sat.states.len();
        stats.productions = sat.productions;
        match sat.outcome {
            SatOutcome::Saturated => Ok(Verdict::Empty),
            SatOutcome::Capped => Ok(Verdict::Capped),
            SatOutcome::Accepted(_) if !opts.witness => Ok(Verdict::Nonempty(None)),
            SatOutcome::Accepted(id) => {
                let w = with_big_stack(|| witness::finish(sys, m, k, witness::explicit_term(&rules.view, &sat, id)))?;
                Ok(Verdict::Nonempty(Some(Box::new(w))))
            }
        }
    }
}

/// Derivations can be deep; rebuild and evaluate terms on a roomy stack.
fn with_big_stack<T: Send>(f: impl FnOnce() -> Result<T, String> + Send) -> Result<T, EngineError> {
    std::thread::scope(|s| {
        std::thread::Builder::new()
            .stack_size(512 << 20)
            .spawn_scoped(s, f)
            .map_err(|e| EngineError::Witness(e.to_string()))?
            .join()
            .map_err(|_| EngineError::Witness("witness rebuild panicked".into()))?
            .map_err(EngineError::Witness)
    })
}
