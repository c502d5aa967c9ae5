//! Timed systems: timed automata and timed pushdown automata.
//!
//! Systems are stored index-based. States, clocks and stack symbols are
//! referred to by their position in the declaration lists. The text format
//! is line oriented, see [`parse_system`] and the `Display` impl.

use std::collections::BTreeSet;
use std::fmt;

use thiserror::Error;

/// A closed interval `[low, up]`; `up == None` means the upper end is infinite.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Interval {
    pub low: u32,
    pub up: Option<u32>,
}

impl Interval {
    pub fn closed(low: u32, up: u32) -> Self {
        assert!(low <= up, "empty interval [{low},{up}]");
        Interval { low, up: Some(up) }
    }

    pub fn at_least(low: u32) -> Self {
        Interval { low, up: None }
    }

    /// The trivially true interval `[0, inf]`.
    pub fn any() -> Self {
        Interval::at_least(0)
    }

    pub fn contains(&self, v: i64) -> bool {
        v >= self.low as i64 && self.up.is_none_or(|u| v <= u as i64)
    }

    pub fn is_unbounded(&self) -> bool {
        self.up.is_none()
    }

    pub fn intersect(&self, other: &Interval) -> Option<Interval> {
        let low = self.low.max(other.low);
        let up = match (self.up, other.up) {
            (None, u) | (u, None) => u,
            (Some(a), Some(b)) => Some(a.min(b)),
        };
        match up {
            Some(u) if u < low => None,
            _ => Some(Interval { low, up }),
        }
    }

    /// Largest finite constant mentioned by the interval.
    pub fn max_constant(&self) -> u32 {
        self.up.map_or(self.low, |u| u.max(self.low))
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.up {
            Some(u) => write!(f, "[{},{}]", self.low, u),
            None => write!(f, "[{},inf]", self.low),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SystemKind {
    Ta,
    Tpda,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum StackOp {
    Nop,
    Push(usize),
    Pop(usize, Interval),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Transition {
    pub source: usize,
    pub target: usize,
    /// `None` is the silent label.
    pub label: Option<String>,
    /// At most one conjunct per clock.
    pub guard: Vec<(usize, Interval)>,
    /// Sorted, no duplicates.
    pub resets: Vec<usize>,
    pub op: StackOp,
}

impl Transition {
    pub fn guard_on(&self, clock: usize) -> Option<Interval> {
        self.guard.iter().find(|(c, _)| *c == clock).map(|(_, i)| *i)
    }

    pub fn resets_clock(&self, clock: usize) -> bool {
        self.resets.contains(&clock)
    }

    pub fn reset_mask(&self) -> u32 {
        self.resets.iter().fold(0, |m, &c| m | (1 << c))
    }

    pub fn guard_mask(&self) -> u32 {
        self.guard.iter().fold(0, |m, &(c, _)| m | (1 << c))
    }

    pub fn is_push(&self) -> bool {
        matches!(self.op, StackOp::Push(_))
    }

    pub fn is_pop(&self) -> bool {
        matches!(self.op, StackOp::Pop(..))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TimedSystem {
    pub kind: SystemKind,
    pub clocks: Vec<String>,
    pub stack: Vec<String>,
    pub states: Vec<String>,
    pub initial: usize,
    pub finals: BTreeSet<usize>,
    pub transitions: Vec<Transition>,
}

/// Size parameters that drive the tree-automaton state space.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Constants {
    /// One more than the largest finite constant in guards and pop intervals.
    pub m: u32,
    /// Number of transitions.
    pub t: usize,
}

pub const MAX_CLOCKS: usize = 16;

impl TimedSystem {
    pub fn constants(&self) -> Constants {
        let mut max = None::<u32>;
        let mut bump = |i: &Interval| {
            let c = i.max_constant();
            max = Some(max.map_or(c, |m: u32| m.max(c)));
        };
        for t in &self.transitions {
            t.guard.iter().for_each(|(_, i)| bump(i));
            if let StackOp::Pop(_, i) = &t.op {
                bump(i);
            }
        }
        Constants {
            m: max.map_or(1, |c| c + 1),
            t: self.transitions.len(),
        }
    }

    pub fn state_index(&self, name: &str) -> Option<usize> {
        self.states.iter().position(|s| s == name)
    }

    pub fn clock_index(&self, name: &str) -> Option<usize> {
        self.clocks.iter().position(|s| s == name)
    }

    pub fn stack_index(&self, name: &str) -> Option<usize> {
        self.stack.iter().position(|s| s == name)
    }

    pub fn all_clocks_mask(&self) -> u32 {
        if self.clocks.is_empty() {
            0
        } else {
            (1u32 << self.clocks.len()) - 1
        }
    }

    pub fn is_final(&self, state: usize) -> bool {
        self.finals.contains(&state)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}, column {col}: {msg}")]
pub struct ParseError {
    pub line: usize,
    pub col: usize,
    pub msg: String,
}

struct Cursor<'a> {
    chars: Vec<char>,
    pos: usize,
    line: usize,
    _src: &'a str,
}

impl<'a> Cursor<'a> {
    fn new(src: &'a str, line: usize) -> Self {
        Cursor { chars: src.chars().collect(), pos: 0, line, _src: src }
    }

    fn err<T>(&self, msg: impl Into<String>) -> Result<T, ParseError> {
        self.err_at(self.pos, msg)
    }

    fn err_at<T>(&self, pos: usize, msg: impl Into<String>) -> Result<T, ParseError> {
        Err(ParseError { line: self.line, col: pos + 1, msg: msg.into() })
    }

    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).copied()
    }

    fn at_end(&self) -> bool {
        self.pos >= self.chars.len()
    }

    fn skip_ws(&mut self) {
        while self.peek().is_some_and(|c| c.is_whitespace()) {
            self.pos += 1;
        }
    }

    fn eat(&mut self, s: &str) -> bool {
        let n = s.chars().count();
        if self.pos + n <= self.chars.len() && self.chars[self.pos..self.pos + n].iter().copied().eq(s.chars()) {
            self.pos += n;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, s: &str) -> Result<(), ParseError> {
        if self.eat(s) {
            Ok(())
        } else {
            self.err(format!("expected `{s}`"))
        }
    }

    fn ident(&mut self) -> Result<(usize, String), ParseError> {
        let start = self.pos;
        while self.peek().is_some_and(|c| c.is_alphanumeric() || c == '_' || c == '.') {
            self.pos += 1;
        }
        if start == self.pos {
            return self.err("expected identifier");
        }
        Ok((start, self.chars[start..self.pos].iter().collect()))
    }

    fn nat(&mut self) -> Result<u32, ParseError> {
        let start = self.pos;
        while self.peek().is_some_and(|c| c.is_ascii_digit()) {
            self.pos += 1;
        }
        if start == self.pos {
            return self.err("expected natural number");
        }
        let s: String = self.chars[start..self.pos].iter().collect();
        s.parse().or_else(|_| self.err_at(start, "constant out of range"))
    }

    fn interval(&mut self) -> Result<Interval, ParseError> {
        let start = self.pos;
        if self.peek() == Some('(') {
            return self.err("open intervals unsupported");
        }
        self.expect("[")?;
        let low = self.nat()?;
        self.expect(",")?;
        let up = if self.eat("inf") { None } else { Some(self.nat()?) };
        if self.peek() == Some(')') {
            return self.err("open intervals unsupported");
        }
        self.expect("]")?;
        if let Some(u) = up {
            if u < low {
                return self.err_at(start, format!("empty interval [{low},{u}]"));
            }
        }
        Ok(Interval { low, up })
    }
}

fn strip_comment(line: &str) -> &str {
    match line.find('#') {
        Some(i) => &line[..i],
        None => line,
    }
}

#[derive(Default)]
struct Decls {
    kind: Option<SystemKind>,
    clocks: Vec<String>,
    stack: Vec<String>,
    states: Vec<String>,
    initial: Option<usize>,
    finals: BTreeSet<usize>,
    transitions: Vec<Transition>,
}

/// Parses the line-oriented system format.
pub fn parse_system(text: &str) -> Result<TimedSystem, ParseError> {
    let mut d = Decls::default();
    let mut last_line = 0;
    for (ln, raw) in text.lines().enumerate() {
        let line_no = ln + 1;
        last_line = line_no;
        let body = strip_comment(raw);
        let mut c = Cursor::new(body, line_no);
        c.skip_ws();
        if c.at_end() {
            continue;
        }
        let (kw_pos, kw) = c.ident()?;
        if d.kind.is_none() && kw != "system" {
            return c.err_at(kw_pos, "first declaration must be `system`");
        }
        match kw.as_str() {
            "system" => {
                if d.kind.is_some() {
                    return c.err_at(kw_pos, "duplicate `system` declaration");
                }
                c.skip_ws();
                let (p, k) = c.ident()?;
                d.kind = Some(match k.as_str() {
                    "ta" => SystemKind::Ta,
                    "tpda" => SystemKind::Tpda,
                    _ => return c.err_at(p, format!("unknown system kind `{k}`")),
                });
            }
            "clocks" | "stack" | "states" => {
                let list = ident_list(&mut c)?;
                let target = match kw.as_str() {
                    "clocks" => &mut d.clocks,
                    "stack" => &mut d.stack,
                    _ => &mut d.states,
                };
                for (p, name) in list {
                    if target.contains(&name) {
                        return c.err_at(p, format!("duplicate declaration `{name}`"));
                    }
                    target.push(name);
                }
                if d.clocks.len() > MAX_CLOCKS {
                    return c.err_at(kw_pos, format!("at most {MAX_CLOCKS} clocks supported"));
                }
            }
            "initial" => {
                c.skip_ws();
                let (p, name) = c.ident()?;
                if d.initial.is_some() {
                    return c.err_at(kw_pos, "duplicate `initial` declaration");
                }
                d.initial = Some(lookup(&c, &d.states, p, &name, "state")?);
            }
            "final" => {
                for (p, name) in ident_list(&mut c)? {
                    let s = lookup(&c, &d.states, p, &name, "state")?;
                    d.finals.insert(s);
                }
            }
            "trans" => {
                let t = parse_trans(&mut c, &d)?;
                d.transitions.push(t);
            }
            _ => return c.err_at(kw_pos, format!("unknown declaration `{kw}`")),
        }
        c.skip_ws();
        if !c.at_end() {
            return c.err("unexpected trailing input");
        }
    }
    let kind = d.kind.ok_or(ParseError { line: last_line.max(1), col: 1, msg: "missing `system` declaration".into() })?;
    let initial = d.initial.ok_or(ParseError { line: last_line.max(1), col: 1, msg: "missing `initial` declaration".into() })?;
    Ok(TimedSystem {
        kind,
        clocks: d.clocks,
        stack: d.stack,
        states: d.states,
        initial,
        finals: d.finals,
        transitions: d.transitions,
    })
}

fn ident_list(c: &mut Cursor) -> Result<Vec<(usize, String)>, ParseError> {
    let mut out = Vec::new();
    loop {
        c.skip_ws();
        if c.at_end() {
            return Ok(out);
        }
        out.push(c.ident()?);
    }
}

fn lookup(c: &Cursor, names: &[String], pos: usize, name: &str, what: &str) -> Result<usize, ParseError> {
    names
        .iter()
        .position(|n| n == name)
        .map_or_else(|| c.err_at(pos, format!("undeclared {what} `{name}`")), Ok)
}

fn parse_trans(c: &mut Cursor, d: &Decls) -> Result<Transition, ParseError> {
    c.skip_ws();
    let (p, s) = c.ident()?;
    let source = lookup(c, &d.states, p, &s, "state")?;
    c.skip_ws();
    let (p, s) = c.ident()?;
    let target = lookup(c, &d.states, p, &s, "state")?;

    c.skip_ws();
    c.expect("label=")?;
    let (_, l) = c.ident()?;
    let label = if l == "eps" { None } else { Some(l) };

    c.skip_ws();
    c.expect("guard=[")?;
    let mut guard: Vec<(usize, Interval)> = Vec::new();
    c.skip_ws();
    if !c.eat("]") {
        loop {
            c.skip_ws();
            let (p, name) = c.ident()?;
            let clock = lookup(c, &d.clocks, p, &name, "clock")?;
            if guard.iter().any(|(k, _)| *k == clock) {
                return c.err_at(p, format!("duplicate conjunct on clock `{name}`"));
            }
            c.skip_ws();
            c.expect("in")?;
            c.skip_ws();
            guard.push((clock, c.interval()?));
            c.skip_ws();
            if c.eat("]") {
                break;
            }
            c.expect("&")?;
        }
    }

    c.skip_ws();
    c.expect("reset={")?;
    let mut resets = Vec::new();
    loop {
        c.skip_ws();
        if c.eat("}") {
            break;
        }
        let (p, name) = c.ident()?;
        resets.push(lookup(c, &d.clocks, p, &name, "clock")?);
    }
    resets.sort_unstable();
    resets.dedup();

    c.skip_ws();
    c.expect("op=")?;
    let op = if c.eat("nop") {
        StackOp::Nop
    } else if c.eat("push(") {
        let (p, name) = c.ident()?;
        let sym = lookup(c, &d.stack, p, &name, "stack symbol")?;
        c.expect(")")?;
        StackOp::Push(sym)
    } else if c.eat("pop(") {
        let (p, name) = c.ident()?;
        let sym = lookup(c, &d.stack, p, &name, "stack symbol")?;
        c.expect(",")?;
        let iv = c.interval()?;
        c.expect(")")?;
        StackOp::Pop(sym, iv)
    } else {
        return c.err("expected `nop`, `push(..)` or `pop(..)`");
    };
    Ok(Transition { source, target, label, guard, resets, op })
}

impl fmt::Display for TimedSystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let kind = match self.kind {
            SystemKind::Ta => "ta",
            SystemKind::Tpda => "tpda",
        };
        writeln!(f, "system {kind}")?;
        writeln!(f, "{}", join_line("clocks", &self.clocks))?;
        if self.kind == SystemKind::Tpda || !self.stack.is_empty() {
            writeln!(f, "{}", join_line("stack", &self.stack))?;
        }
        writeln!(f, "{}", join_line("states", &self.states))?;
        writeln!(f, "initial {}", self.states[self.initial])?;
        let finals: Vec<String> = self.finals.iter().map(|&s| self.states[s].clone()).collect();
        writeln!(f, "{}", join_line("final", &finals))?;
        for t in &self.transitions {
            writeln!(f, "{}", self.format_transition(t))?;
        }
        Ok(())
    }
}

fn join_line(kw: &str, items: &[String]) -> String {
    let mut s = kw.to_string();
    for i in items {
        s.push(' ');
        s.push_str(i);
    }
    s
}

impl TimedSystem {
    pub fn format_transition(&self, t: &Transition) -> String {
        let guard: Vec<String> = t.guard.iter().map(|(c, i)| format!("{} in {}", self.clocks[*c], i)).collect();
        let resets: Vec<&str> = t.resets.iter().map(|&c| self.clocks[c].as_str()).collect();
        let op = match &t.op {
            StackOp::Nop => "nop".to_string(),
            StackOp::Push(s) => format!("push({})", self.stack[*s]),
            StackOp::Pop(s, i) => format!("pop({},{})", self.stack[*s], i),
        };
        format!(
            "trans {} {} label={} guard=[{}] reset={{{}}} op={}",
            self.states[t.source],
            self.states[t.target],
            t.label.as_deref().unwrap_or("eps"),
            guard.join(" & "),
            resets.join(" "),
            op
        )
    }
}

/// Structural checks that the parser cannot enforce on its own, plus checks
/// for systems assembled in code. Returns one message per problem.
pub fn validate(sys: &TimedSystem) -> Vec<String> {
    let mut diags = Vec::new();
    let ns = sys.states.len();
    if sys.initial >= ns {
        diags.push("initial state undeclared".to_string());
    }
    for &f in &sys.finals {
        if f >= ns {
            diags.push(format!("final state #{f} undeclared"));
        }
    }
    if sys.clocks.len() > MAX_CLOCKS {
        diags.push(format!("at most {MAX_CLOCKS} clocks supported"));
    }
    for (k, t) in sys.transitions.iter().enumerate() {
        let at = format!("transition {k}");
        if t.source >= ns || t.target >= ns {
            diags.push(format!("{at}: undeclared state"));
        }
        let mut seen = BTreeSet::new();
        for (c, _) in &t.guard {
            if *c >= sys.clocks.len() {
                diags.push(format!("{at}: undeclared clock in guard"));
            } else if !seen.insert(*c) {
                diags.push(format!("{at}: duplicate conjunct on clock `{}`", sys.clocks[*c]));
            }
        }
        if t.resets.iter().any(|&c| c >= sys.clocks.len()) {
            diags.push(format!("{at}: undeclared clock in reset"));
        }
        match &t.op {
            StackOp::Nop => {}
            StackOp::Push(s) | StackOp::Pop(s, _) => {
                if sys.kind == SystemKind::Ta {
                    diags.push(format!("{at}: stack op in TA"));
                }
                if *s >= sys.stack.len() {
                    diags.push(format!("{at}: undeclared stack symbol"));
                }
            }
        }
    }
    diags
}

/// Stack-only systems shipped with the crate, as `(name, source)`.
pub fn bundled_systems() -> Vec<(&'static str, &'static str)> {
    vec![
        ("nested", include_str!("../data/nested.tpda")),
        ("inverted", include_str!("../data/inverted.tpda")),
        ("loop", include_str!("../data/loop.tpda")),
        ("windows", include_str!("../data/windows.tpda")),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLE: &str = "\
system tpda
clocks x y
stack a
states s0 s1 s2
initial s0
final s2
trans s0 s1 label=a guard=[x in [1,3] & y in [0,inf]] reset={x} op=push(a)
trans s1 s2 label=eps guard=[] reset={} op=pop(a,[2,5])
";

    #[test]
    fn round_trip() {
        let sys = parse_system(SAMPLE).unwrap();
        assert_eq!(sys.to_string(), SAMPLE);
        assert_eq!(parse_system(&sys.to_string()).unwrap(), sys);
    }

    #[test]
    fn constants_include_lower_bounds() {
        let sys = parse_system(SAMPLE).unwrap();
        assert_eq!(sys.constants(), Constants { m: 6, t: 2 });
        let ta = parse_system("system ta\nclocks x\nstates p\ninitial p\nfinal p\ntrans p p label=a guard=[x in [7,inf]] reset={} op=nop\n").unwrap();
        assert_eq!(ta.constants().m, 8);
        let bare = parse_system("system ta\nclocks\nstates p\ninitial p\nfinal p\n").unwrap();
        assert_eq!(bare.constants(), Constants { m: 1, t: 0 });
    }

    #[test]
    fn open_interval_rejected_with_position() {
        let e = parse_system("system ta\nclocks x\nstates p\ninitial p\nfinal p\ntrans p p label=a guard=[x in (1,2)] reset={} op=nop\n").unwrap_err();
        assert_eq!(e.line, 6);
        assert!(e.msg.contains("open intervals unsupported"), "{e}");
        let e = parse_system("system ta\nclocks x\nstates p\ninitial p\nfinal p\ntrans p p label=a guard=[x in [1,2)] reset={} op=nop\n").unwrap_err();
        assert!(e.msg.contains("open intervals unsupported"));
    }

    #[test]
    fn duplicate_guard_clock_rejected() {
        let e = parse_system("system ta\nclocks x\nstates p\ninitial p\nfinal p\ntrans p p label=a guard=[x in [1,2] & x in [0,1]] reset={} op=nop\n").unwrap_err();
        assert_eq!((e.line, e.col), (6, 39));
    }

    #[test]
    fn undeclared_names_rejected() {
        let e = parse_system("system ta\nclocks x\nstates p\ninitial q\n").unwrap_err();
        assert!(e.msg.contains("undeclared state `q`"));
        assert_eq!((e.line, e.col), (4, 9));
    }

    #[test]
    fn validate_flags_stack_ops_in_ta() {
        let sys = parse_system("system ta\nclocks\nstack a\nstates p\ninitial p\nfinal p\ntrans p p label=a guard=[] reset={} op=push(a)\n").unwrap();
        let d = validate(&sys);
        assert_eq!(d.len(), 1);
        assert!(d[0].contains("stack op in TA"));
    }

    #[test]
    fn validate_flags_undeclared_pop_symbol() {
        let mut sys = parse_system(SAMPLE).unwrap();
        sys.transitions[1].op = StackOp::Pop(3, Interval::any());
        assert!(validate(&sys).iter().any(|m| m.contains("undeclared stack symbol")));
    }

    #[test]
    fn comments_ignored() {
        let sys = parse_system("# header\nsystem ta # kind\nclocks x\nstates p\ninitial p\nfinal p # done\n").unwrap();
        assert_eq!(sys.states, vec!["p"]);
    }
}
