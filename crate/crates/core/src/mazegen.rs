//! Mazes with logical and timing constraints, compiled to one-clock TPDA.
//!
//! Each place becomes a state (one copy per set of already visited
//! visit-once places). The single clock `x1` is reset whenever a place is
//! entered, so stay bounds and corridor bounds are plain guards. Every
//! constrained segment of the walk gets a fence symbol pushed when the segment
//! starts and popped, with its global time bound as age interval, when it
//! ends. Load places push and unload places pop inside their segment, so the
//! fence can only be popped once loads and unloads balance out.

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};
use std::fmt;

use thiserror::Error;

use crate::model::{Interval, StackOp, SystemKind, TimedSystem, Transition};
use crate::tcw::{realize_pinned, run_to_tcw};

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Bound {
    Nat(u32),
    Param(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SymInterval {
    pub low: Bound,
    pub up: Option<Bound>,
}

impl SymInterval {
    pub fn zero() -> Self {
        SymInterval { low: Bound::Nat(0), up: Some(Bound::Nat(0)) }
    }

    fn resolve(&self, params: &BTreeMap<String, u32>) -> Result<Interval, MazeError> {
        let get = |b: &Bound| match b {
            Bound::Nat(n) => Ok(*n),
            Bound::Param(p) => params.get(p).copied().ok_or_else(|| MazeError::new(None, format!("unbound parameter `{p}`"))),
        };
        let low = get(&self.low)?;
        let up = self.up.as_ref().map(get).transpose()?;
        if up.is_some_and(|u| u < low) {
            return Err(MazeError::new(None, format!("empty interval [{low},{}]", up.unwrap())));
        }
        Ok(Interval { low, up })
    }
}

impl fmt::Display for Bound {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Bound::Nat(n) => write!(f, "{n}"),
            Bound::Param(p) => write!(f, "{p}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Marker {
    Entry,
    Exit,
    Visit(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    OneWay,
    Both,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Corridor {
    pub from: String,
    pub to: String,
    pub dir: Direction,
    pub bound: SymInterval,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Constraint {
    VisitOnce(String),
    Balanced { load: String, unload: String, from: Marker, to: Marker },
    Global { from: Marker, to: Marker, bound: SymInterval },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Maze {
    pub places: Vec<String>,
    pub entry: String,
    pub exit: String,
    pub corridors: Vec<Corridor>,
    pub stay: BTreeMap<String, SymInterval>,
    pub constraints: Vec<Constraint>,
    /// Default parameter values declared in the file.
    pub params: BTreeMap<String, u32>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub struct MazeError {
    pub line: Option<usize>,
    pub msg: String,
}

impl MazeError {
    fn new(line: Option<usize>, msg: impl Into<String>) -> Self {
        MazeError { line, msg: msg.into() }
    }
}

impl fmt::Display for MazeError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(l) => write!(f, "line {l}: {}", self.msg),
            None => write!(f, "{}", self.msg),
        }
    }
}

fn parse_bound(s: &str) -> Result<Bound, String> {
    if let Ok(n) = s.parse::<u32>() {
        return Ok(Bound::Nat(n));
    }
    if !s.is_empty() && s.chars().all(|c| c.is_alphanumeric() || c == '_') && !s.starts_with(|c: char| c.is_ascii_digit()) {
        return Ok(Bound::Param(s.to_string()));
    }
    Err(format!("bad bound `{s}`"))
}

fn parse_interval(s: &str) -> Result<SymInterval, String> {
    let inner = s
        .strip_prefix('[')
        .and_then(|r| r.strip_suffix(']'))
        .ok_or_else(|| format!("expected an interval like [a,b], got `{s}`"))?;
    let (a, b) = inner.split_once(',').ok_or_else(|| format!("expected `,` in `{s}`"))?;
    let low = parse_bound(a.trim())?;
    let up = match b.trim() {
        "inf" => None,
        t => Some(parse_bound(t)?),
    };
    if let (Bound::Nat(l), Some(Bound::Nat(u))) = (&low, &up) {
        if u < l {
            return Err(format!("empty interval `{s}`"));
        }
    }
    Ok(SymInterval { low, up })
}

fn parse_marker(s: &str) -> Marker {
    match s {
        "ENTRY" => Marker::Entry,
        "EXIT" => Marker::Exit,
        p => Marker::Visit(p.to_string()),
    }
}

/// Parses the maze format (see the README for the grammar).
pub fn parse_maze(text: &str) -> Result<Maze, MazeError> {
    let mut places = Vec::new();
    let mut entry = None;
    let mut exit = None;
    let mut corridors = Vec::new();
    let mut stay = BTreeMap::new();
    let mut constraints = Vec::new();
    let mut params = BTreeMap::new();
    for (ln, raw) in text.lines().enumerate() {
        let line = Some(ln + 1);
        let body = raw.split('#').next().unwrap();
        let words: Vec<&str> = body.split_whitespace().collect();
        let Some((&kw, args)) = words.split_first() else { continue };
        let err = |m: String| MazeError::new(line, m);
        let arity = |n: usize| {
            if args.len() == n {
                Ok(())
            } else {
                Err(MazeError::new(line, format!("`{kw}` takes {n} arguments, got {}", args.len())))
            }
        };
        match kw {
            "place" => places.extend(args.iter().map(|s| s.to_string())),
            "entry" => {
                arity(1)?;
                entry = Some(args[0].to_string());
            }
            "exit" => {
                arity(1)?;
                exit = Some(args[0].to_string());
            }
            "corridor" => {
                if args.len() != 3 && args.len() != 4 {
                    return Err(err("corridor takes: from to oneway|both [interval]".into()));
                }
                let dir = match args[2] {
                    "oneway" => Direction::OneWay,
                    "both" => Direction::Both,
                    d => return Err(err(format!("unknown direction `{d}`"))),
                };
                let bound = match args.get(3) {
                    Some(s) => parse_interval(s).map_err(err)?,
                    None => SymInterval::zero(),
                };
                corridors.push(Corridor { from: args[0].into(), to: args[1].into(), dir, bound });
            }
            "stay" => {
                arity(2)?;
                stay.insert(args[0].to_string(), parse_interval(args[1]).map_err(err)?);
            }
            "visit_once" => constraints.extend(args.iter().map(|p| Constraint::VisitOnce(p.to_string()))),
            "balanced" => {
                arity(4)?;
                constraints.push(Constraint::Balanced {
                    load: args[0].into(),
                    unload: args[1].into(),
                    from: parse_marker(args[2]),
                    to: parse_marker(args[3]),
                });
            }
            "global" => {
                arity(3)?;
                constraints.push(Constraint::Global {
                    from: parse_marker(args[0]),
                    to: parse_marker(args[1]),
                    bound: parse_interval(args[2]).map_err(err)?,
                });
            }
            "param" => {
                for a in args {
                    let (k, v) = a.split_once('=').ok_or_else(|| err(format!("expected name=value, got `{a}`")))?;
                    let v: u32 = v.parse().map_err(|_| err(format!("bad parameter value `{v}`")))?;
                    params.insert(k.to_string(), v);
                }
            }
            other => return Err(err(format!("unknown declaration `{other}`"))),
        }
    }
    let maze = Maze {
        places,
        entry: entry.ok_or_else(|| MazeError::new(None, "missing `entry`"))?,
        exit: exit.ok_or_else(|| MazeError::new(None, "missing `exit`"))?,
        corridors,
        stay,
        constraints,
        params,
    };
    check_maze(&maze)?;
    Ok(maze)
}

impl Maze {
    fn visit_once(&self) -> Vec<&String> {
        self.constraints
            .iter()
            .filter_map(|c| match c {
                Constraint::VisitOnce(p) => Some(p),
                _ => None,
            })
            .collect()
    }

    /// Position of a marker on the timeline: entry, visit-once places in
    /// declaration order, exit.
    fn rank(&self, m: &Marker) -> Option<usize> {
        let once = self.visit_once();
        match m {
            Marker::Entry => Some(0),
            Marker::Visit(p) => once.iter().position(|q| *q == p).map(|i| i + 1),
            Marker::Exit => Some(once.len() + 1),
        }
    }

    /// Distinct constrained segments, as rank pairs, with their markers.
    fn segments(&self) -> Vec<((usize, usize), (Marker, Marker))> {
        let mut seen = BTreeMap::new();
        for c in &self.constraints {
            let (from, to) = match c {
                Constraint::Balanced { from, to, .. } | Constraint::Global { from, to, .. } => (from, to),
                Constraint::VisitOnce(_) => continue,
            };
            let key = (self.rank(from).unwrap(), self.rank(to).unwrap());
            seen.entry(key).or_insert_with(|| (from.clone(), to.clone()));
        }
        seen.into_iter().collect()
    }
}

fn check_maze(m: &Maze) -> Result<(), MazeError> {
    let known: BTreeSet<&String> = m.places.iter().collect();
    let need = |p: &String, what: &str| {
        if known.contains(p) {
            Ok(())
        } else {
            Err(MazeError::new(None, format!("{what} refers to undeclared place `{p}`")))
        }
    };
    if known.len() != m.places.len() {
        return Err(MazeError::new(None, "duplicate place"));
    }
    need(&m.entry, "entry")?;
    need(&m.exit, "exit")?;
    if m.entry == m.exit {
        return Err(MazeError::new(None, "entry and exit must differ"));
    }
    for c in &m.corridors {
        need(&c.from, "corridor")?;
        need(&c.to, "corridor")?;
    }
    for p in m.stay.keys() {
        need(p, "stay")?;
    }
    let once = m.visit_once();
    for c in &m.constraints {
        match c {
            Constraint::VisitOnce(p) => need(p, "visit_once")?,
            Constraint::Balanced { load, unload, from, to } => {
                need(load, "balanced")?;
                need(unload, "balanced")?;
                if once.contains(&load) || once.contains(&unload) {
                    return Err(MazeError::new(None, "load and unload places cannot be visit-once places"));
                }
                check_segment(m, from, to)?;
            }
            Constraint::Global { from, to, .. } => check_segment(m, from, to)?,
        }
    }
    let segs = m.segments();
    for (i, ((a1, b1), _)) in segs.iter().enumerate() {
        for ((a2, b2), _) in &segs[i + 1..] {
            let disjoint = b1 <= a2 || b2 <= a1;
            let nested = (a1 <= a2 && b2 <= b1) || (a2 <= a1 && b1 <= b2);
            if !disjoint && !nested {
                return Err(MazeError::new(None, "constraints not well-nested"));
            }
        }
    }
    Ok(())
}

fn check_segment(m: &Maze, from: &Marker, to: &Marker) -> Result<(), MazeError> {
    for mk in [from, to] {
        if let Marker::Visit(p) = mk {
            if m.rank(mk).is_none() {
                return Err(MazeError::new(None, format!("segment marker `{p}` must be a visit-once place")));
            }
        }
    }
    if m.rank(from) >= m.rank(to) {
        return Err(MazeError::new(None, "segment ends before it starts"));
    }
    Ok(())
}

struct Builder<'m> {
    maze: &'m Maze,
    once: Vec<&'m String>,
    /// (from rank, to rank, fence symbol, age interval)
    fences: Vec<(usize, usize, usize, Interval)>,
    /// (load, unload, segment ranks, symbol)
    loads: Vec<(&'m String, &'m String, (usize, usize), usize)>,
    states: Vec<String>,
    index: HashMap<String, usize>,
    transitions: Vec<Transition>,
    queue: VecDeque<(usize, u32)>,
}

impl<'m> Builder<'m> {
    fn state(&mut self, name: String) -> usize {
        if let Some(&s) = self.index.get(&name) {
            return s;
        }
        self.states.push(name.clone());
        self.index.insert(name, self.states.len() - 1);
        self.states.len() - 1
    }

    fn place_name(&self, p: usize, phase: u32) -> String {
        let base = format!("p{}", self.maze.places[p]);
        if self.once.is_empty() {
            base
        } else {
            format!("{base}.{phase}")
        }
    }

    fn passed(&self, rank: usize, phase: u32) -> bool {
        rank == 0 || (rank <= self.once.len() && phase & (1 << (rank - 1)) != 0)
    }

    /// Stack operations performed when `place` is entered, in order.
    fn event_ops(&self, place: &String, ranks: &[usize], phase: u32) -> Vec<StackOp> {
        let active = |seg: (usize, usize)| self.passed(seg.0, phase) && !self.passed(seg.1, phase) && !ranks.contains(&seg.1);
        let mut ops = Vec::new();
        for &(_, unload, seg, sym) in self.loads.iter().rev() {
            if unload == place && active(seg) {
                ops.push(StackOp::Pop(sym, Interval::any()));
            }
        }
        let mut ends: Vec<_> = self.fences.iter().filter(|f| ranks.contains(&f.1)).collect();
        ends.sort_by_key(|e| std::cmp::Reverse(e.0));
        ops.extend(ends.iter().map(|f| StackOp::Pop(f.2, f.3)));
        let mut starts: Vec<_> = self.fences.iter().filter(|f| ranks.contains(&f.0)).collect();
        starts.sort_by_key(|s| std::cmp::Reverse(s.1));
        ops.extend(starts.iter().map(|f| StackOp::Push(f.2)));
        for &(load, _, seg, sym) in &self.loads {
            if load == place && active(seg) {
                ops.push(StackOp::Push(sym));
            }
        }
        ops
    }

    /// Adds the transitions entering `place` from state `src`.
    fn arrive(&mut self, src: usize, guard: Option<Interval>, place: usize, phase: u32, entering: bool) {
        let name = &self.maze.places[place];
        let mut ranks = Vec::new();
        let mut phase2 = phase;
        if entering {
            ranks.push(0);
        }
        if let Some(i) = self.once.iter().position(|q| *q == name) {
            if phase & (1 << i) != 0 {
                return;
            }
            phase2 |= 1 << i;
            ranks.push(i + 1);
        }
        if *name == self.maze.exit {
            ranks.push(self.once.len() + 1);
        }
        let ops = self.event_ops(name, &ranks, phase2);
        let target_name = self.place_name(place, phase2);
        let fresh = !self.index.contains_key(&target_name);
        let target = self.state(target_name.clone());
        if fresh {
            self.queue.push_back((place, phase2));
        }
        let guard: Vec<(usize, Interval)> = guard.into_iter().map(|g| (0, g)).collect();
        let label = Some(name.clone());
        if ops.len() <= 1 {
            let op = ops.into_iter().next().unwrap_or(StackOp::Nop);
            self.transitions.push(Transition { source: src, target, label, guard, resets: vec![0], op });
            return;
        }
        let prefix = if entering { "start".to_string() } else { target_name };
        let mut prev = src;
        let last = ops.len() - 1;
        for (k, op) in ops.into_iter().enumerate() {
            let next = if k == last { target } else { self.state(format!("{prefix}_k{}", k + 1)) };
            let t = if k == 0 {
                Transition { source: prev, target: next, label: label.clone(), guard: guard.clone(), resets: vec![0], op }
            } else {
                Transition { source: prev, target: next, label: None, guard: vec![(0, Interval::closed(0, 0))], resets: vec![0], op }
            };
            if !self.transitions.contains(&t) {
                self.transitions.push(t);
            }
            prev = next;
        }
    }
}

/// Compiles a maze into a one-clock TPDA. `params` override the defaults
/// declared in the maze.
pub fn maze_to_tpda(maze: &Maze, params: &BTreeMap<String, u32>) -> Result<TimedSystem, MazeError> {
    let mut env = maze.params.clone();
    env.extend(params.iter().map(|(k, v)| (k.clone(), *v)));
    let once = maze.visit_once();
    if once.len() > 16 {
        return Err(MazeError::new(None, "at most 16 visit-once places"));
    }
    let mut stack = Vec::new();
    let mut fences = Vec::new();
    for ((a, b), _) in maze.segments() {
        let mut iv = Interval::any();
        for c in &maze.constraints {
            if let Constraint::Global { from: f, to: t, bound } = c {
                if maze.rank(f) == Some(a) && maze.rank(t) == Some(b) {
                    iv = iv
                        .intersect(&bound.resolve(&env)?)
                        .ok_or_else(|| MazeError::new(None, "contradictory global bounds on one segment"))?;
                }
            }
        }
        fences.push((a, b, stack.len(), iv));
        stack.push(format!("F{}", fences.len()));
    }
    let mut loads = Vec::new();
    for c in &maze.constraints {
        if let Constraint::Balanced { load, unload, from, to } = c {
            let seg = (maze.rank(from).unwrap(), maze.rank(to).unwrap());
            loads.push((load, unload, seg, stack.len()));
            stack.push(format!("L{}", loads.len()));
        }
    }
    let mut b = Builder {
        maze,
        once,
        fences,
        loads,
        states: Vec::new(),
        index: HashMap::new(),
        transitions: Vec::new(),
        queue: VecDeque::new(),
    };
    let start = b.state("start".into());
    let pidx = |p: &String| maze.places.iter().position(|q| q == p).unwrap();
    b.arrive(start, None, pidx(&maze.entry), 0, true);
    let mut stays = BTreeMap::new();
    for (p, iv) in &maze.stay {
        stays.insert(p.clone(), iv.resolve(&env)?);
    }
    let mut edges: Vec<(usize, usize, Interval)> = Vec::new();
    for c in &maze.corridors {
        let iv = c.bound.resolve(&env)?;
        edges.push((pidx(&c.from), pidx(&c.to), iv));
        if c.dir == Direction::Both {
            edges.push((pidx(&c.to), pidx(&c.from), iv));
        }
    }
    while let Some((p, phase)) = b.queue.pop_front() {
        if maze.places[p] == maze.exit {
            continue;
        }
        let here = b.state(b.place_name(p, phase));
        let stay = stays.get(&maze.places[p]).copied().unwrap_or(Interval::closed(0, 0));
        for &(from, to, iv) in &edges {
            if from != p {
                continue;
            }
            if iv == Interval::closed(0, 0) {
                b.arrive(here, Some(stay), to, phase, false);
            } else {
                let mid_name = format!("c{}_{}{}", maze.places[p], maze.places[to], if b.once.is_empty() { String::new() } else { format!(".{phase}") });
                let mid = b.state(mid_name);
                b.transitions.push(Transition { source: here, target: mid, label: None, guard: vec![(0, stay)], resets: vec![0], op: StackOp::Nop });
                b.arrive(mid, Some(iv), to, phase, false);
            }
        }
    }
    let full: u32 = if b.once.is_empty() { 0 } else { (1u32 << b.once.len()) - 1 };
    let finals: BTreeSet<usize> = b.index.get(&b.place_name(pidx(&maze.exit), full)).copied().into_iter().collect();
    Ok(TimedSystem {
        kind: SystemKind::Tpda,
        clocks: vec!["x1".into()],
        stack,
        states: b.states,
        initial: start,
        finals,
        transitions: b.transitions,
    })
}

/// The visited places of a timed run with their entry times.
pub fn place_run(sys: &TimedSystem, run: &[usize], ts: &[u64]) -> Vec<(String, u64)> {
    run.iter()
        .zip(&ts[1..])
        .filter_map(|(&t, &at)| sys.transitions[t].label.clone().map(|l| (l, at)))
        .collect()
}

/// Finds a timed run of the compiled maze that visits exactly `places` at
/// the given times; silent steps get the least consistent times.
pub fn lift_place_run(sys: &TimedSystem, places: &[(String, u64)]) -> Option<(Vec<usize>, Vec<u64>)> {
    struct Lift<'a> {
        sys: &'a TimedSystem,
        places: &'a [(String, u64)],
        run: Vec<usize>,
        stack: Vec<usize>,
    }
    impl Lift<'_> {
        fn go(&mut self, state: usize, done: usize) -> Option<Vec<u64>> {
            if done == self.places.len() && self.stack.is_empty() && self.sys.is_final(state) {
                let tcw = run_to_tcw(self.sys, &self.run).ok()?;
                let mut pins = Vec::new();
                let mut k = 0;
                for (pos, &t) in self.run.iter().enumerate() {
                    if self.sys.transitions[t].label.is_some() {
                        pins.push((pos + 1, self.places[k].1));
                        k += 1;
                    }
                }
                if let Ok(ts) = realize_pinned(&tcw, &pins) {
                    return Some(ts);
                }
            }
            for (i, t) in self.sys.transitions.iter().enumerate() {
                if t.source != state {
                    continue;
                }
                let next = match &t.label {
                    Some(l) if done < self.places.len() && *l == self.places[done].0 => done + 1,
                    Some(_) => continue,
                    None => done,
                };
                let saved = self.stack.clone();
                match &t.op {
                    StackOp::Nop => {}
                    StackOp::Push(c) => self.stack.push(*c),
                    StackOp::Pop(c, _) => {
                        if self.stack.last() != Some(c) {
                            continue;
                        }
                        self.stack.pop();
                    }
                }
                self.run.push(i);
                if let Some(ts) = self.go(t.target, next) {
                    return Some(ts);
                }
                self.run.pop();
                self.stack = saved;
            }
            None
        }
    }
    let mut l = Lift { sys, places, run: Vec::new(), stack: Vec::new() };
    let ts = l.go(sys.initial, 0)?;
    Some((l.run, ts))
}

/// A maze shipped with the crate.
#[derive(Debug, Clone)]
pub struct BundledMaze {
    pub name: &'static str,
    pub source: &'static str,
    /// Verdict confirmed by bounded search at the default parameters.
    pub nonempty: bool,
}

pub fn bundled_examples() -> Vec<BundledMaze> {
    vec![
        BundledMaze { name: "fig5", source: include_str!("../data/fig5.maze"), nonempty: true },
        BundledMaze { name: "maze2", source: include_str!("../data/maze2.maze"), nonempty: true },
        BundledMaze { name: "maze3", source: include_str!("../data/maze3.maze"), nonempty: true },
        BundledMaze { name: "maze4", source: include_str!("../data/maze4.maze"), nonempty: false },
    ]
}

/// The run listed for the first maze with `m = 7, n = 8`: places with their
/// entry times.
pub const FIG5_RUN: &[(&str, u64)] = &[
    ("6", 0),
    ("3", 0),
    ("7", 0),
    ("3", 1),
    ("7", 1),
    ("3", 2),
    ("5", 5),
    ("4", 5),
    ("5", 6),
    ("4", 6),
    ("5", 7),
    ("6", 7),
    ("1", 7),
    ("6", 7),
    ("3", 7),
    ("7", 7),
    ("3", 9),
    ("7", 9),
    ("3", 10),
    ("5", 13),
    ("4", 13),
    ("5", 14),
    ("4", 14),
    ("5", 15),
    ("6", 15),
    ("2", 15),
];

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_maze() {
        let m = parse_maze("place a b\nentry a\nexit b\ncorridor a b oneway\n").unwrap();
        assert_eq!(m.corridors.len(), 1);
        let sys = maze_to_tpda(&m, &BTreeMap::new()).unwrap();
        assert!(crate::model::validate(&sys).is_empty());
        assert_eq!(sys.clocks.len(), 1);
        // start, a, b and no corridor state for a [0,0] corridor
        assert_eq!(sys.states.len(), 3);
    }

    #[test]
    fn bounded_corridor_adds_state() {
        let m = parse_maze("place a b\nentry a\nexit b\ncorridor a b oneway [1,2]\n").unwrap();
        let sys = maze_to_tpda(&m, &BTreeMap::new()).unwrap();
        assert_eq!(sys.states.len(), 4);
    }

    #[test]
    fn crossing_segments_rejected() {
        let text = "place a b c d\nentry a\nexit d\nvisit_once b c\nglobal ENTRY c [1,2]\nglobal b EXIT [1,2]\n";
        let e = parse_maze(text).unwrap_err();
        assert!(e.msg.contains("not well-nested"), "{e}");
    }

    #[test]
    fn unbound_parameter() {
        let m = parse_maze("place a b\nentry a\nexit b\ncorridor a b oneway\nglobal ENTRY EXIT [k,k]\n").unwrap();
        let e = maze_to_tpda(&m, &BTreeMap::new()).unwrap_err();
        assert!(e.msg.contains("unbound parameter `k`"));
    }
}
