//! `tpda`: emptiness checking for timed automata and timed pushdown automata.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use tpda_core::engine::{self, CheckOptions, Verdict};
use tpda_core::mazegen::{maze_to_tpda, parse_maze};
use tpda_core::model::{parse_system, TimedSystem};
use tpda_core::oracle::{self, OracleVerdict};
use tpda_core::tcw::{run_to_tcw, WitnessJson};
use tpda_core::treeterm::{color_bound, decompose, is_restricted, width};

#[derive(Parser)]
#[command(name = "tpda", version, about = "Emptiness checking for timed (pushdown) automata")]
struct Cli {
    #[command(subcommand)]
    cmd: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Decide emptiness of a system.
    Check(CheckArgs),
    /// Bounded brute-force search for an accepting run.
    Oracle(OracleArgs),
    /// Compile a maze description into a system file.
    Maze(MazeArgs),
    /// Build a tree term for a constraint word.
    Decompose(DecomposeArgs),
    /// Replay a timed run on a system.
    Verify(VerifyArgs),
    /// Sweep a maze parameter and report engine effort as CSV.
    Bench(BenchArgs),
}

#[derive(Args, Clone)]
struct EngineArgs {
    /// Forget points as soon as possible.
    #[arg(long)]
    aggressive: bool,
    /// Use explicit colors with rename steps (slow; for cross-checking).
    #[arg(long)]
    no_canonical: bool,
    #[arg(long, default_value_t = 5_000_000)]
    state_cap: usize,
    /// Worker threads; all cores by default.
    #[arg(long)]
    threads: Option<usize>,
    /// Color budget instead of the bound for the system's shape.
    #[arg(long)]
    colors: Option<usize>,
}

impl EngineArgs {
    fn options(&self) -> CheckOptions {
        CheckOptions {
            k: self.colors,
            state_cap: self.state_cap,
            aggressive: self.aggressive,
            canonical: !self.no_canonical,
            threads: self.threads,
            ..CheckOptions::default()
        }
    }
}

#[derive(Args)]
struct CheckArgs {
    file: PathBuf,
    #[command(flatten)]
    engine: EngineArgs,
    /// Print an accepting run as (state, time) pairs.
    #[arg(long)]
    witness: bool,
    /// Write the witness word as JSON (the format `verify` reads).
    #[arg(long, value_name = "PATH")]
    witness_out: Option<PathBuf>,
    /// Print search statistics.
    #[arg(long)]
    stats: bool,
    /// Print every reached product state to stderr.
    #[arg(long)]
    trace: bool,
    /// Print the accepted tree term.
    #[arg(long)]
    dump_term: bool,
    /// Explore the whole product even after an accepting state is found.
    #[arg(long)]
    exhaustive: bool,
    /// Bind a maze parameter (only when FILE is a maze).
    #[arg(long = "param", value_name = "NAME=VALUE")]
    params: Vec<String>,
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct OracleArgs {
    file: PathBuf,
    /// Longest run explored.
    #[arg(long, default_value_t = 12)]
    max_len: usize,
    #[arg(long)]
    witness: bool,
    #[arg(long = "param", value_name = "NAME=VALUE")]
    params: Vec<String>,
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct MazeArgs {
    file: PathBuf,
    #[arg(long = "param", value_name = "NAME=VALUE")]
    params: Vec<String>,
    /// Write the system here instead of stdout.
    #[arg(short, long)]
    output: Option<PathBuf>,
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct DecomposeArgs {
    /// Constraint word in the witness JSON format.
    file: PathBuf,
    #[arg(long)]
    colors: Option<usize>,
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct VerifyArgs {
    system: PathBuf,
    /// Witness JSON, as written by `check --witness-out` or `check --json`.
    witness: PathBuf,
    #[arg(long = "param", value_name = "NAME=VALUE")]
    params: Vec<String>,
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct BenchArgs {
    /// Maze file.
    file: PathBuf,
    /// Parameters to sweep together, as NAME[,NAME..]=FROM..TO.
    #[arg(long)]
    sweep: String,
    /// Fixed parameters.
    #[arg(long = "param", value_name = "NAME=VALUE")]
    params: Vec<String>,
    #[command(flatten)]
    engine: EngineArgs,
    /// Report 0 for time_ms, so the output is reproducible.
    #[arg(long)]
    no_time: bool,
}

fn parse_params(raw: &[String]) -> Result<BTreeMap<String, u32>> {
    raw.iter()
        .map(|p| {
            let (k, v) = p.split_once('=').ok_or_else(|| anyhow!("expected NAME=VALUE, got `{p}`"))?;
            let v = v.trim().parse().with_context(|| format!("bad value for parameter `{k}`"))?;
            Ok((k.trim().to_string(), v))
        })
        .collect()
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))
}

/// Loads a system file, or compiles a maze when the file ends in `.maze`.
fn load_system(path: &Path, params: &[String]) -> Result<TimedSystem> {
    let text = read(path)?;
    let params = parse_params(params)?;
    if path.extension().is_some_and(|e| e == "maze") {
        let maze = parse_maze(&text).with_context(|| format!("{}", path.display()))?;
        return maze_to_tpda(&maze, &params).with_context(|| format!("{}", path.display()));
    }
    if !params.is_empty() {
        bail!("--param only applies to maze files");
    }
    parse_system(&text).with_context(|| format!("{}", path.display()))
}

fn pairs(sys: &TimedSystem, run: &[usize], ts: &[u64]) -> Vec<(String, u64)> {
    let mut out = vec![(sys.states[sys.initial].clone(), ts[0])];
    out.extend(run.iter().zip(&ts[1..]).map(|(&t, &at)| (sys.states[sys.transitions[t].target].clone(), at)));
    out
}

fn pairs_text(p: &[(String, u64)]) -> String {
    let mut s = String::new();
    for (i, (st, t)) in p.iter().enumerate() {
        let _ = write!(s, "{}({st}, {t})", if i == 0 { "" } else { " " });
    }
    s
}

fn run_json(sys: &TimedSystem, run: &[usize], ts: &[u64]) -> Value {
    let steps: Vec<Value> = run
        .iter()
        .zip(&ts[1..])
        .map(|(&t, &at)| {
            let tr = &sys.transitions[t];
            json!({ "transition": t, "label": tr.label, "state": sys.states[tr.target], "time": at })
        })
        .collect();
    json!({ "initial": sys.states[sys.initial], "start_time": ts[0], "steps": steps })
}

fn cmd_check(a: CheckArgs) -> Result<ExitCode> {
    let sys = load_system(&a.file, &a.params)?;
    let opts = CheckOptions { trace: a.trace, exhaustive: a.exhaustive, ..a.engine.options() };
    let res = engine::check(&sys, &opts)?;
    let witness = match &res.verdict {
        Verdict::Nonempty(Some(w)) => Some(w),
        _ => None,
    };
    if let (Some(path), Some(w)) = (&a.witness_out, witness) {
        let doc = serde_json::to_string_pretty(&WitnessJson::from_tcw(&w.tcw, Some(&w.ts)))?;
        std::fs::write(path, doc + "\n").with_context(|| format!("cannot write {}", path.display()))?;
    }
    if a.json {
        let mut doc = json!({ "verdict": res.verdict.tag(), "stats": res.stats });
        if let Some(w) = witness {
            doc["witness"] = json!({
                "run": run_json(&sys, &w.run, &w.ts),
                "tcw": WitnessJson::from_tcw(&w.tcw, Some(&w.ts)),
            });
            if a.dump_term {
                doc["term"] = json!(w.term.as_ref().map(|t| t.to_string()));
            }
        }
        println!("{}", serde_json::to_string_pretty(&doc)?);
    } else {
        println!("{}", res.verdict.tag());
        if let (true, Some(w)) = (a.witness, witness) {
            println!("{}", pairs_text(&pairs(&sys, &w.run, &w.ts)));
        }
        if let (true, Some(w)) = (a.dump_term, witness) {
            match &w.term {
                Some(t) => println!("term: {t}"),
                None => println!("term: none (empty run)"),
            }
        }
        if a.stats {
            println!("{}", serde_json::to_string(&res.stats)?);
        }
    }
    Ok(match res.verdict {
        Verdict::Capped => ExitCode::from(2),
        _ => ExitCode::SUCCESS,
    })
}

fn cmd_oracle(a: OracleArgs) -> Result<ExitCode> {
    let sys = load_system(&a.file, &a.params)?;
    let v = oracle::check(&sys, a.max_len);
    if a.json {
        let mut doc = json!({ "verdict": v.tag(), "max_len": a.max_len });
        if let OracleVerdict::Nonempty { run, ts } = &v {
            doc["run"] = run_json(&sys, run, ts);
        }
        println!("{}", serde_json::to_string_pretty(&doc)?);
        return Ok(ExitCode::SUCCESS);
    }
    match &v {
        OracleVerdict::Nonempty { run, ts } => {
            println!("NONEMPTY");
            if a.witness {
                println!("{}", pairs_text(&pairs(&sys, run, ts)));
            }
        }
        OracleVerdict::Empty => println!("EMPTY"),
        OracleVerdict::EmptyUpTo(n) => println!("EMPTY_UPTO {n}"),
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_maze(a: MazeArgs) -> Result<ExitCode> {
    let maze = parse_maze(&read(&a.file)?).with_context(|| format!("{}", a.file.display()))?;
    let sys = maze_to_tpda(&maze, &parse_params(&a.params)?)?;
    let text = sys.to_string();
    let out = if a.json {
        let c = sys.constants();
        let doc = json!({
            "states": sys.states.len(),
            "transitions": sys.transitions.len(),
            "stack_symbols": sys.stack.len(),
            "M": c.m,
            "system": text,
        });
        serde_json::to_string_pretty(&doc)? + "\n"
    } else {
        text
    };
    match &a.output {
        Some(p) => std::fs::write(p, out).with_context(|| format!("cannot write {}", p.display()))?,
        None => print!("{out}"),
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_decompose(a: DecomposeArgs) -> Result<ExitCode> {
    let doc: WitnessJson = serde_json::from_str(&read(&a.file)?).context("bad witness JSON")?;
    let (tcw, _) = doc.to_tcw()?;
    let k = a.colors.unwrap_or_else(|| color_bound(tcw.clock_count(), tcw.has_stack_edges()));
    let term = decompose(&tcw, k)?;
    if a.json {
        let doc = json!({ "colors": k, "width": width(&term), "restricted": is_restricted(&term), "term": term.to_string() });
        println!("{}", serde_json::to_string_pretty(&doc)?);
    } else {
        println!("{term}");
        println!("width {} within {k} colors", width(&term));
    }
    Ok(ExitCode::SUCCESS)
}

/// Accepts a bare witness word or a `check --json` document.
fn witness_from_json(v: Value) -> Result<WitnessJson> {
    let v = match v.get("witness") {
        Some(w) => w.get("tcw").cloned().ok_or_else(|| anyhow!("witness without `tcw`"))?,
        None => v,
    };
    Ok(serde_json::from_value(v)?)
}

fn cmd_verify(a: VerifyArgs) -> Result<ExitCode> {
    let sys = load_system(&a.system, &a.params)?;
    let doc = witness_from_json(serde_json::from_str(&read(&a.witness)?).context("bad witness JSON")?)?;
    let (tcw, ts) = doc.to_tcw()?;
    let ts = ts.ok_or_else(|| anyhow!("witness has no timestamps"))?;
    let run: Vec<usize> = tcw.trans[1..]
        .iter()
        .map(|t| t.ok_or_else(|| anyhow!("witness position without a transition")))
        .collect::<Result<_>>()?;
    let mut verdict = engine::verify_witness(&sys, &run, &ts);
    if verdict.is_ok() {
        // the stored constraint word must be the one the run induces
        let own = run_to_tcw(&sys, &run)?;
        let (mut x, mut y) = (own.edges.clone(), tcw.edges.clone());
        x.sort();
        y.sort();
        if x != y {
            verdict = Err("constraint edges do not match the run".into());
        }
    }
    if a.json {
        let doc = match &verdict {
            Ok(()) => json!({ "valid": true }),
            Err(e) => json!({ "valid": false, "reason": e }),
        };
        println!("{}", serde_json::to_string_pretty(&doc)?);
    } else {
        match &verdict {
            Ok(()) => println!("VALID"),
            Err(e) => println!("INVALID: {e}"),
        }
    }
    Ok(if verdict.is_ok() { ExitCode::SUCCESS } else { ExitCode::from(3) })
}

fn cmd_bench(a: BenchArgs) -> Result<ExitCode> {
    let maze = parse_maze(&read(&a.file)?).with_context(|| format!("{}", a.file.display()))?;
    let (names, range) = a.sweep.split_once('=').ok_or_else(|| anyhow!("--sweep expects NAME=FROM..TO"))?;
    let (lo, hi) = range.split_once("..").ok_or_else(|| anyhow!("--sweep expects NAME=FROM..TO"))?;
    let (lo, hi): (u32, u32) = (lo.parse().context("sweep start")?, hi.parse().context("sweep end")?);
    let mut params = parse_params(&a.params)?;
    // full saturation, so counts measure the whole product
    let opts = CheckOptions { witness: false, exhaustive: true, ..a.engine.options() };
    println!("constant,M,T,verdict,reached_states,productions,time_ms");
    let mut capped = false;
    for v in lo..=hi {
        for name in names.split(',') {
            params.insert(name.trim().to_string(), v);
        }
        let sys = maze_to_tpda(&maze, &params)?;
        let start = Instant::now();
        let r = engine::check(&sys, &opts)?;
        let ms = if a.no_time { 0 } else { start.elapsed().as_millis() };
        capped |= matches!(r.verdict, Verdict::Capped);
        println!("{v},{},{},{},{},{},{ms}", r.stats.m, r.stats.t, r.verdict.tag(), r.stats.reached_states, r.stats.productions);
    }
    Ok(if capped { ExitCode::from(2) } else { ExitCode::SUCCESS })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let res = match cli.cmd {
        Command::Check(a) => cmd_check(a),
        Command::Oracle(a) => cmd_oracle(a),
        Command::Maze(a) => cmd_maze(a),
        Command::Decompose(a) => cmd_decompose(a),
        Command::Verify(a) => cmd_verify(a),
        Command::Bench(a) => cmd_bench(a),
    };
    res.unwrap_or_else(|e| {
        eprintln!("error: {e:#}");
        ExitCode::FAILURE
    })
}
