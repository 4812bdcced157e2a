//! File formats, script replay, fuzz verification and benchmarking.
//!
//! Graph files: a first line `n m`, then `m` lines `u v`, nodes `1..=n`.
//! Change scripts: `+ u v`, `- u v` and `step` lines; queries `? reach u v`
//! and `? dist u v` follow the script. `#` starts a comment everywhere.

use std::fmt;
use std::io::Write;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::dist::{DistConfig, DistState};
use crate::engine::{default_epoch_len, default_k, Engine, StepStats};
use crate::error::{Error, Result};
use crate::graph::{ChangeBatch, Edge, Graph};
use crate::oracles::{bfs_dist, walk_series_mod};
use crate::quotient::{QuotientConfig, QuotientState};
use crate::reach::{PrimeMode, ReachConfig, ReachState};

fn tokens(line: &str) -> Vec<&str> {
    line.split('#')
        .next()
        .unwrap_or("")
        .split_whitespace()
        .collect()
}

fn parse_num(tok: &str, line: usize) -> Result<usize> {
    tok.parse().map_err(|_| Error::Parse {
        line,
        msg: format!("expected a nonnegative integer, found `{tok}`"),
    })
}

fn parse_node(tok: &str, n: usize, line: usize) -> Result<usize> {
    let v = parse_num(tok, line)?;
    if v == 0 || v > n {
        return Err(Error::Parse {
            line,
            msg: format!("node {v} out of range 1..={n}"),
        });
    }
    Ok(v - 1)
}

pub fn parse_graph(text: &str) -> Result<Graph> {
    let mut header: Option<(usize, usize)> = None;
    let mut g = Graph::new(0);
    let mut seen = 0;
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let t = tokens(raw);
        if t.is_empty() {
            continue;
        }
        if t.len() != 2 {
            return Err(Error::Parse {
                line,
                msg: "expected two fields".into(),
            });
        }
        match header {
            None => {
                let (n, m) = (parse_num(t[0], line)?, parse_num(t[1], line)?);
                header = Some((n, m));
                g = Graph::new(n);
            }
            Some((n, _)) => {
                let (u, v) = (parse_node(t[0], n, line)?, parse_node(t[1], n, line)?);
                if !g.insert(u, v) {
                    return Err(Error::Parse {
                        line,
                        msg: format!("duplicate edge {} {}", u + 1, v + 1),
                    });
                }
                seen += 1;
            }
        }
    }
    let (_, m) = header.ok_or(Error::Parse {
        line: 0,
        msg: "missing `n m` header".into(),
    })?;
    if seen != m {
        return Err(Error::Parse {
            line: text.lines().count(),
            msg: format!("header announces {m} edges, found {seen}"),
        });
    }
    Ok(g)
}

pub fn format_graph(g: &Graph) -> String {
    let mut out = format!("{} {}\n", g.n(), g.edge_count());
    for (u, v) in g.edges() {
        out.push_str(&format!("{} {}\n", u + 1, v + 1));
    }
    out
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Step {
    pub inserts: Vec<Edge>,
    pub deletes: Vec<Edge>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Query {
    Reach(usize, usize),
    Dist(usize, usize),
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ChangeScript {
    pub steps: Vec<Step>,
    pub queries: Vec<Query>,
}

pub fn parse_script(text: &str, n: usize) -> Result<ChangeScript> {
    let mut script = ChangeScript::default();
    let mut open = Step::default();
    let mut has_open = false;
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let t = tokens(raw);
        match t.as_slice() {
            [] => {}
            ["step"] => {
                script.steps.push(std::mem::take(&mut open));
                has_open = false;
            }
            [op @ ("+" | "-"), u, v] => {
                if !script.queries.is_empty() {
                    return Err(Error::Parse {
                        line,
                        msg: "changes must precede the queries".into(),
                    });
                }
                let e = (parse_node(u, n, line)?, parse_node(v, n, line)?);
                let (mine, other) = if *op == "+" {
                    (&mut open.inserts, &open.deletes)
                } else {
                    (&mut open.deletes, &open.inserts)
                };
                if other.contains(&e) || mine.contains(&e) {
                    return Err(Error::Parse {
                        line,
                        msg: format!("edge {} {} appears twice in one step", e.0 + 1, e.1 + 1),
                    });
                }
                mine.push(e);
                has_open = true;
            }
            ["?", kind @ ("reach" | "dist"), u, v] => {
                let (u, v) = (parse_node(u, n, line)?, parse_node(v, n, line)?);
                script.queries.push(if *kind == "reach" {
                    Query::Reach(u, v)
                } else {
                    Query::Dist(u, v)
                });
            }
            _ => {
                return Err(Error::Parse {
                    line,
                    msg: format!("unrecognized line `{}`", raw.trim()),
                })
            }
        }
    }
    if has_open {
        script.steps.push(open);
    }
    Ok(script)
}

pub fn format_script(script: &ChangeScript) -> String {
    let mut out = String::new();
    for step in &script.steps {
        for &(u, v) in &step.inserts {
            out.push_str(&format!("+ {} {}\n", u + 1, v + 1));
        }
        for &(u, v) in &step.deletes {
            out.push_str(&format!("- {} {}\n", u + 1, v + 1));
        }
        out.push_str("step\n");
    }
    for q in &script.queries {
        match *q {
            Query::Reach(u, v) => out.push_str(&format!("? reach {} {}\n", u + 1, v + 1)),
            Query::Dist(u, v) => out.push_str(&format!("? dist {} {}\n", u + 1, v + 1)),
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Answer {
    Reach(bool),
    Dist(Option<usize>),
}

impl fmt::Display for Answer {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Answer::Reach(b) => write!(f, "{b}"),
            Answer::Dist(Some(d)) => write!(f, "{d}"),
            Answer::Dist(None) => write!(f, "inf"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EngineChoice {
    Reach,
    Dist,
    Quotient,
}

impl EngineChoice {
    pub fn name(self) -> &'static str {
        match self {
            EngineChoice::Reach => "reach",
            EngineChoice::Dist => "dist",
            EngineChoice::Quotient => "quotient",
        }
    }
}

/// Everything that configures a run; unset fields take the engine defaults.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RunConfig {
    pub engine: EngineChoice,
    pub k: Option<usize>,
    pub epoch: Option<usize>,
    pub primes: Option<usize>,
    pub deterministic_primes: bool,
    pub seed: u64,
    pub points: Option<usize>,
}

impl RunConfig {
    pub fn new(engine: EngineChoice) -> Self {
        RunConfig {
            engine,
            k: None,
            epoch: None,
            primes: None,
            deterministic_primes: false,
            seed: 0,
            points: None,
        }
    }

    pub fn k_for(&self, n: usize) -> usize {
        self.k.unwrap_or_else(|| default_k(n)).max(1)
    }
}

/// One of the three engines behind a single interface.
#[derive(Debug, Clone)]
pub enum AnyEngine {
    Reach(ReachState),
    Dist(DistState),
    Quotient(QuotientState),
}

impl AnyEngine {
    pub fn build(graph: &Graph, config: &RunConfig) -> Result<Self> {
        let n = graph.n();
        let k = config.k_for(n);
        Ok(match config.engine {
            EngineChoice::Reach => {
                let mut c = ReachConfig::for_n(n);
                c.k = k;
                c.epoch_len = config.epoch.unwrap_or_else(|| default_epoch_len(n)).max(1);
                c.prime_mode = if config.deterministic_primes {
                    PrimeMode::Deterministic
                } else {
                    PrimeMode::Random {
                        count: config.primes.unwrap_or(8).max(1),
                        seed: config.seed,
                    }
                };
                AnyEngine::Reach(ReachState::new(graph, c)?)
            }
            EngineChoice::Dist => {
                let c = DistConfig {
                    k,
                    epoch_len: config.epoch.unwrap_or_else(|| default_epoch_len(n)).max(1),
                };
                AnyEngine::Dist(DistState::new(graph, c)?)
            }
            EngineChoice::Quotient => {
                let c = QuotientConfig {
                    k,
                    epoch_len: config.epoch.unwrap_or(2).max(1),
                };
                AnyEngine::Quotient(match config.points {
                    Some(points) => QuotientState::with_points(graph, points, c)?,
                    None => QuotientState::new(graph, c)?,
                })
            }
        })
    }

    fn inner(&self) -> &dyn Engine {
        match self {
            AnyEngine::Reach(e) => e,
            AnyEngine::Dist(e) => e,
            AnyEngine::Quotient(e) => e,
        }
    }

    fn inner_mut(&mut self) -> &mut dyn Engine {
        match self {
            AnyEngine::Reach(e) => e,
            AnyEngine::Dist(e) => e,
            AnyEngine::Quotient(e) => e,
        }
    }

    /// Engine-specific consistency check against a recomputation.
    pub fn self_check(&self) -> bool {
        match self {
            AnyEngine::Reach(s) => s.check_inverses(3),
            AnyEngine::Dist(s) => {
                let n = s.n();
                s.pool().primes().iter().enumerate().all(|(idx, &p)| {
                    let want = walk_series_mod(s.graph(), n, p);
                    let c = s.matrix(idx);
                    (0..n).all(|u| (0..n).all(|v| c.entry(u, v) == &want[u][v][..]))
                })
            }
            AnyEngine::Quotient(s) => match s.qualifying_primes().first() {
                Some(&p) => s.interpolate_numerator(0, 0, p).is_ok_and(|poly| {
                    poly.iter().rposition(|&c| c != 0).unwrap_or(0) <= s.deg_bound()
                }),
                None => false,
            },
        }
    }

    pub fn answer(&self, q: Query) -> Result<Answer> {
        Ok(match q {
            Query::Reach(u, v) => Answer::Reach(self.reachable(u, v)?),
            Query::Dist(u, v) => Answer::Dist(self.distance(u, v)?),
        })
    }
}

impl Engine for AnyEngine {
    fn name(&self) -> &'static str {
        self.inner().name()
    }

    fn graph(&self) -> &Graph {
        self.inner().graph()
    }

    fn k(&self) -> usize {
        self.inner().k()
    }

    fn apply_batch(&mut self, batch: &ChangeBatch) -> Result<StepStats> {
        self.inner_mut().apply_batch(batch)
    }

    fn reachable(&self, s: usize, t: usize) -> Result<bool> {
        self.inner().reachable(s, t)
    }

    fn distance(&self, s: usize, t: usize) -> Result<Option<usize>> {
        self.inner().distance(s, t)
    }

    fn rebuild(&mut self) -> Result<()> {
        self.inner_mut().rebuild()
    }

    fn valid_count(&self) -> usize {
        self.inner().valid_count()
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct StepRecord {
    pub step: usize,
    pub batches: usize,
    pub invalidated: usize,
    /// Largest number of primes (or pairs) one batch of this step invalidated.
    pub max_invalidated: usize,
    pub valid: usize,
    pub rebuilds: usize,
    pub mismatches: usize,
    pub check_failures: usize,
    pub answers: Vec<Answer>,
    pub micros: u128,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RunReport {
    pub engine: String,
    pub n: usize,
    pub steps: Vec<StepRecord>,
    pub final_answers: Vec<Answer>,
}

impl RunReport {
    pub fn mismatches(&self) -> usize {
        self.steps
            .iter()
            .map(|s| s.mismatches + s.check_failures)
            .sum()
    }

    /// Text form without wall-clock times, identical for identical runs.
    pub fn render(&self) -> String {
        let mut out = format!(
            "engine {} n {} steps {}\n",
            self.engine,
            self.n,
            self.steps.len()
        );
        for s in &self.steps {
            out.push_str(&format!(
                "step {} batches {} invalidated {} valid {} rebuilds {} mismatches {} check_failures {}",
                s.step, s.batches, s.invalidated, s.valid, s.rebuilds, s.mismatches, s.check_failures
            ));
            for a in &s.answers {
                out.push_str(&format!(" {a}"));
            }
            out.push('\n');
        }
        out.push_str(&format!("mismatches {}\n", self.mismatches()));
        out
    }

    /// Per-step CSV, `\n` line endings.
    pub fn write_csv(&self, w: &mut impl Write) -> Result<()> {
        writeln!(
            w,
            "step,batches,invalidated,valid,rebuilds,mismatches,micros"
        )?;
        for s in &self.steps {
            writeln!(
                w,
                "{},{},{},{},{},{},{}",
                s.step, s.batches, s.invalidated, s.valid, s.rebuilds, s.mismatches, s.micros
            )?;
        }
        Ok(())
    }
}

fn apply_step(engine: &mut AnyEngine, step: &Step, idx: usize) -> Result<StepRecord> {
    let start = Instant::now();
    let stats = engine
        .apply_change(&step.inserts, &step.deletes)
        .map_err(|e| Error::Step {
            step: idx,
            msg: e.to_string(),
        })?;
    let micros = start.elapsed().as_micros();
    Ok(StepRecord {
        step: idx,
        batches: stats.len(),
        invalidated: stats.iter().map(|s| s.invalidated).sum(),
        max_invalidated: stats.iter().map(|s| s.invalidated).max().unwrap_or(0),
        valid: engine.valid_count(),
        rebuilds: stats.iter().filter(|s| s.rebuilt).count(),
        micros,
        ..StepRecord::default()
    })
}

/// Replays `script` on `graph`, answering the queries after every step and
/// once more at the end.
pub fn run_script(graph: &Graph, script: &ChangeScript, config: &RunConfig) -> Result<RunReport> {
    let mut engine = AnyEngine::build(graph, config)?;
    let answer_all = |e: &AnyEngine| -> Result<Vec<Answer>> {
        script.queries.iter().map(|&q| e.answer(q)).collect()
    };
    let mut report = RunReport {
        engine: config.engine.name().into(),
        n: graph.n(),
        ..RunReport::default()
    };
    for (i, step) in script.steps.iter().enumerate() {
        let mut rec = apply_step(&mut engine, step, i + 1)?;
        rec.answers = answer_all(&engine)?;
        report.steps.push(rec);
    }
    report.final_answers = answer_all(&engine)?;
    Ok(report)
}

/// Random step on at most `max(k, 2)` nodes. Once more than 30% of the
/// possible edges exist, half of the steps only delete.
pub fn random_step(rng: &mut impl Rng, g: &Graph, k: usize) -> Step {
    let n = g.n();
    let width = k.max(2).min(n);
    let possible = (n * (n - 1)).max(1) as f64;
    let delete_only = g.edge_count() as f64 / possible > 0.3 && rng.gen_bool(0.5);
    loop {
        let mut nodes: Vec<usize> = Vec::with_capacity(width);
        while nodes.len() < width {
            let u = rng.gen_range(0..n);
            if !nodes.contains(&u) {
                nodes.push(u);
            }
        }
        nodes.sort_unstable();
        let mut step = Step::default();
        for &u in &nodes {
            for &v in &nodes {
                if u == v || !rng.gen_bool(0.5) {
                    continue;
                }
                if g.contains(u, v) {
                    step.deletes.push((u, v));
                } else if !delete_only {
                    step.inserts.push((u, v));
                }
            }
        }
        if !step.inserts.is_empty() || !step.deletes.is_empty() {
            return step;
        }
    }
}

pub fn random_script(n: usize, steps: usize, k: usize, seed: u64) -> ChangeScript {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut g = Graph::new(n);
    let mut script = ChangeScript::default();
    for _ in 0..steps {
        let step = random_step(&mut rng, &g, k);
        for &(u, v) in &step.inserts {
            g.insert(u, v);
        }
        for &(u, v) in &step.deletes {
            g.remove(u, v);
        }
        script.steps.push(step);
    }
    script
}

/// Runs a seeded random script from the empty graph and compares every pair
/// with breadth-first search after every step.
pub fn verify_fuzz(n: usize, steps: usize, seed: u64, config: &RunConfig) -> Result<RunReport> {
    if n < 2 {
        return Err(Error::Unsupported(
            "fuzzing needs at least two nodes".into(),
        ));
    }
    let graph = Graph::new(n);
    let script = random_script(n, steps, config.k_for(n), seed);
    let mut engine = AnyEngine::build(&graph, config)?;
    let mut report = RunReport {
        engine: config.engine.name().into(),
        n,
        ..RunReport::default()
    };
    for (i, step) in script.steps.iter().enumerate() {
        let mut rec = apply_step(&mut engine, step, i + 1)?;
        for s in 0..n {
            let truth = bfs_dist(engine.graph(), s)?;
            for t in 0..n {
                let ok = match config.engine {
                    EngineChoice::Reach => engine.reachable(s, t)? == truth.contains_key(&t),
                    _ => engine.distance(s, t)? == truth.get(&t).copied(),
                };
                rec.mismatches += usize::from(!ok);
            }
        }
        rec.check_failures = usize::from(!engine.self_check());
        report.steps.push(rec);
    }
    Ok(report)
}

pub const BENCH_HEADER: &str = "engine,n,step,phase,micros,valid_primes,invalidated";

/// Single-edge steps on a random sparse graph; for every step the
/// incremental update and a from-scratch rebuild are timed.
pub fn bench(ns: &[usize], steps: usize, config: &RunConfig, out: &mut impl Write) -> Result<()> {
    writeln!(out, "{BENCH_HEADER}")?;
    let name = config.engine.name();
    for &n in ns {
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed ^ n as u64);
        let mut g = Graph::new(n);
        for _ in 0..2 * n {
            let (u, v) = (rng.gen_range(0..n), rng.gen_range(0..n));
            if u != v {
                g.insert(u, v);
            }
        }
        let start = Instant::now();
        let mut engine = AnyEngine::build(&g, config)?;
        let micros = start.elapsed().as_micros();
        writeln!(out, "{name},{n},0,init,{micros},{},0", engine.valid_count())?;
        for step in 1..=steps {
            let (u, v) = loop {
                let e = (rng.gen_range(0..n), rng.gen_range(0..n));
                if e.0 != e.1 {
                    break e;
                }
            };
            let present = engine.graph().contains(u, v);
            let (ins, del) = if present {
                (vec![], vec![(u, v)])
            } else {
                (vec![(u, v)], vec![])
            };
            let start = Instant::now();
            let stats = engine.apply_change(&ins, &del)?;
            let micros = start.elapsed().as_micros();
            let inv: usize = stats.iter().map(|s| s.invalidated).sum();
            writeln!(
                out,
                "{name},{n},{step},update,{micros},{},{inv}",
                engine.valid_count()
            )?;
            let start = Instant::now();
            let fresh = AnyEngine::build(engine.graph(), config)?;
            let micros = start.elapsed().as_micros();
            writeln!(
                out,
                "{name},{n},{step},recompute,{micros},{},0",
                fresh.valid_count()
            )?;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    const PATH_GRAPH: &str = "# three nodes, no edges yet\n3 0\n";
    const BUILD_BREAK: &str = "+ 1 2\n+ 2 3\nstep\n- 2 3\nstep\n? reach 1 3\n? dist 1 3\n";

    #[test]
    fn graph_format_roundtrip() {
        let g = parse_graph("4 3\n1 2\n2 3 # comment\n\n4 1\n").unwrap();
        assert_eq!(g.n(), 4);
        assert!(g.contains(3, 0));
        assert_eq!(parse_graph(&format_graph(&g)).unwrap(), g);
    }

    #[test]
    fn graph_format_errors() {
        assert!(matches!(
            parse_graph("3 1\n1 4\n"),
            Err(Error::Parse { line: 2, .. })
        ));
        assert!(matches!(
            parse_graph("3 2\n1 2\n"),
            Err(Error::Parse { .. })
        ));
        assert!(matches!(
            parse_graph("3 x\n"),
            Err(Error::Parse { line: 1, .. })
        ));
        assert!(matches!(
            parse_graph("3 2\n1 2\n1 2\n"),
            Err(Error::Parse { line: 3, .. })
        ));
        assert!(matches!(parse_graph(""), Err(Error::Parse { .. })));
    }

    #[test]
    fn script_format() {
        let s = parse_script(BUILD_BREAK, 3).unwrap();
        assert_eq!(s.steps.len(), 2);
        assert_eq!(s.steps[0].inserts, vec![(0, 1), (1, 2)]);
        assert_eq!(s.queries, vec![Query::Reach(0, 2), Query::Dist(0, 2)]);
        assert_eq!(parse_script(&format_script(&s), 3).unwrap(), s);
        // trailing open step is closed
        let s = parse_script("+ 1 2\n", 3).unwrap();
        assert_eq!(s.steps.len(), 1);
        assert!(matches!(
            parse_script("+ 1 2\n- 1 2\n", 3),
            Err(Error::Parse { line: 2, .. })
        ));
        assert!(matches!(
            parse_script("* 1 2\n", 3),
            Err(Error::Parse { line: 1, .. })
        ));
        assert!(matches!(
            parse_script("? reach 1 9\n", 3),
            Err(Error::Parse { .. })
        ));
        assert!(matches!(
            parse_script("? reach 1 2\n+ 1 2\n", 3),
            Err(Error::Parse { line: 2, .. })
        ));
    }

    #[test]
    fn empty_script_answers_initial_graph() {
        let g = parse_graph("3 2\n1 2\n2 3\n").unwrap();
        let s = parse_script("? reach 1 3\n? dist 3 1\n", 3).unwrap();
        let r = run_script(&g, &s, &RunConfig::new(EngineChoice::Dist)).unwrap();
        assert!(r.steps.is_empty());
        assert_eq!(
            r.final_answers,
            vec![Answer::Reach(true), Answer::Dist(None)]
        );
    }

    #[test]
    fn build_then_break_on_every_engine() {
        let g = parse_graph(PATH_GRAPH).unwrap();
        let s = parse_script(BUILD_BREAK, 3).unwrap();
        let r = run_script(&g, &s, &RunConfig::new(EngineChoice::Reach));
        // dist queries are not served by the reach engine
        assert!(r.is_err());
        let reach_only = ChangeScript {
            steps: s.steps.clone(),
            queries: vec![Query::Reach(0, 2)],
        };
        let r = run_script(&g, &reach_only, &RunConfig::new(EngineChoice::Reach)).unwrap();
        assert_eq!(r.steps[0].answers, vec![Answer::Reach(true)]);
        assert_eq!(r.steps[1].answers, vec![Answer::Reach(false)]);
        for engine in [EngineChoice::Dist, EngineChoice::Quotient] {
            let r = run_script(&g, &s, &RunConfig::new(engine)).unwrap();
            assert_eq!(
                r.steps[0].answers,
                vec![Answer::Reach(true), Answer::Dist(Some(2))]
            );
            assert_eq!(
                r.steps[1].answers,
                vec![Answer::Reach(false), Answer::Dist(None)]
            );
            assert_eq!(r.final_answers, r.steps[1].answers);
        }
    }

    #[test]
    fn bad_step_is_reported_with_its_index() {
        let g = parse_graph("3 1\n1 2\n").unwrap();
        let s = parse_script("+ 2 3\nstep\n+ 1 2\nstep\n", 3).unwrap();
        let err = run_script(&g, &s, &RunConfig::new(EngineChoice::Reach)).unwrap_err();
        assert!(matches!(err, Error::Step { step: 2, .. }));
    }

    #[test]
    fn answers_render() {
        assert_eq!(Answer::Reach(true).to_string(), "true");
        assert_eq!(Answer::Dist(Some(3)).to_string(), "3");
        assert_eq!(Answer::Dist(None).to_string(), "inf");
    }

    #[test]
    fn fuzz_is_deterministic_and_clean() {
        let config = RunConfig::new(EngineChoice::Reach);
        let a = verify_fuzz(8, 0, 3, &config).unwrap();
        assert_eq!(a.mismatches(), 0);
        assert!(a.steps.is_empty());
        let a = verify_fuzz(8, 15, 3, &config).unwrap();
        let b = verify_fuzz(8, 15, 3, &config).unwrap();
        assert_eq!(a.render(), b.render());
        assert_eq!(a.mismatches(), 0);
        let d = verify_fuzz(6, 10, 3, &RunConfig::new(EngineChoice::Dist)).unwrap();
        assert_eq!(d.mismatches(), 0);
    }

    #[test]
    fn fuzz_steps_respect_width() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut g = Graph::new(10);
        for _ in 0..200 {
            let step = random_step(&mut rng, &g, 3);
            let batch = ChangeBatch::new(step.inserts.clone(), step.deletes.clone()).unwrap();
            assert!(batch.affected_nodes().len() <= 3);
            assert!(batch.inserts.iter().all(|(u, v)| u != v));
            g.apply(&batch).unwrap();
        }
    }

    #[test]
    fn bench_csv_shape() {
        let mut buf = Vec::new();
        bench(&[], 3, &RunConfig::new(EngineChoice::Reach), &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), format!("{BENCH_HEADER}\n"));
        let mut buf = Vec::new();
        bench(&[12], 4, &RunConfig::new(EngineChoice::Reach), &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 1 + 1 + 2 * 4);
        assert!(!text.contains('\r'));
    }
}
