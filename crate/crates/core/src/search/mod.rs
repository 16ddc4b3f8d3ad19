//! Enumeration by leftmost labeling and Large Neighborhood Search.

mod labeling;
mod moves;

use std::fmt::Write as _;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use labeling::{Flow, Labeler, LabelingStats, Leaf};
pub use moves::{draw_move, Move, MoveKind};

use crate::error::{Error, Result};
use crate::fragdb::TemplateId;
use crate::model::{next_consistency, AssemblyModel, Conformation};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SearchMode {
    Enumerate,
    Lns,
}

impl SearchMode {
    pub fn parse(s: &str) -> Result<SearchMode> {
        match s {
            "enumerate" => Ok(SearchMode::Enumerate),
            "lns" => Ok(SearchMode::Lns),
            _ => Err(Error::InvalidInput(format!("unknown search mode '{s}'"))),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            SearchMode::Enumerate => "enumerate",
            SearchMode::Lns => "lns",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchConfig {
    pub mode: SearchMode,
    /// Solutions to enumerate; 0 means all of them.
    pub n_solutions: usize,
    /// Seconds.
    pub total_timeout: f64,
    /// Seconds allowed for one relabeling after a move.
    pub inner_timeout: f64,
    pub worsening_probability: f64,
    /// A worsening step requires `E > floor(num·Lim/den)`.
    pub worsening_num: i64,
    pub worsening_den: i64,
    pub seed: u64,
    /// Probability of a pivot move; the rest are crankshaft moves.
    pub pivot_probability: f64,
    pub min_window: usize,
    /// `None` means max(2, (n − 3)/3).
    pub max_window: Option<usize>,
    /// Stop LNS after this many moves, regardless of time left.
    pub max_iterations: Option<u64>,
    /// Node budget of one relabeling, on top of the inner timeout. Unlike the
    /// timeout it does not depend on machine speed.
    pub inner_node_limit: Option<u64>,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig {
            mode: SearchMode::Enumerate,
            n_solutions: 1,
            total_timeout: 60.0,
            inner_timeout: 120.0,
            worsening_probability: 0.1,
            worsening_num: 5,
            worsening_den: 6,
            seed: 0,
            pivot_probability: 0.5,
            min_window: 2,
            max_window: None,
            max_iterations: None,
            inner_node_limit: None,
        }
    }
}

impl SearchConfig {
    pub fn validate(&self) -> Result<()> {
        let prob = |p: f64| (0.0..=1.0).contains(&p);
        let bad = |m: &str| Err(Error::InvalidInput(m.to_string()));
        if !prob(self.worsening_probability) || !prob(self.pivot_probability) {
            return bad("probabilities must lie in [0, 1]");
        }
        if !(self.total_timeout > 0.0) || !(self.inner_timeout > 0.0) {
            return bad("timeouts must be positive");
        }
        if self.min_window == 0 || self.max_window == Some(0) {
            return bad("window sizes must be at least 1");
        }
        if self.max_window.is_some_and(|m| m < self.min_window) {
            return bad("max window is below min window");
        }
        if self.worsening_den <= 0 {
            return bad("worsening factor denominator must be positive");
        }
        Ok(())
    }

    pub fn window_bounds(&self, vars: usize) -> (usize, usize) {
        let max = self.max_window.unwrap_or_else(|| 2.max(vars / 3));
        (self.min_window, max.max(self.min_window))
    }

    /// Bound a worsening step must exceed: floor(num·Lim/den).
    pub fn worsening_bound(&self, lim: i64) -> i64 {
        (self.worsening_num * lim).div_euclid(self.worsening_den)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SearchStatus {
    /// The search space was exhausted.
    Complete,
    /// The requested number of solutions (or iterations) was reached.
    LimitReached,
    Timeout,
    /// No assignment satisfies the constraints.
    Unsatisfiable,
    /// LNS ran out of time before the initial labeling finished.
    NoInitialSolution,
}

impl SearchStatus {
    pub fn message(self) -> &'static str {
        match self {
            SearchStatus::Complete => "search space exhausted",
            SearchStatus::LimitReached => "limit reached",
            SearchStatus::Timeout => "timeout",
            SearchStatus::Unsatisfiable => "no solution",
            SearchStatus::NoInitialSolution => "insufficient time for the first solution",
        }
    }
}

#[derive(Debug, Clone)]
pub struct EnumerationResult {
    pub solutions: Vec<Conformation>,
    pub status: SearchStatus,
    pub stats: LabelingStats,
}

fn deadline(secs: f64) -> Instant {
    let now = Instant::now();
    now.checked_add(Duration::from_secs_f64(secs.min(1e9)))
        .unwrap_or(now + Duration::from_secs(1 << 30))
}

/// Streams solutions in labeling order to `on_solution` until it returns
/// `false`, `n_solutions` are found, the tree is exhausted or time runs out.
pub fn enumerate_each(
    model: &AssemblyModel,
    config: &SearchConfig,
    on_solution: &mut dyn FnMut(Conformation) -> bool,
) -> Result<(SearchStatus, LabelingStats)> {
    config.validate()?;
    if model.is_unsatisfiable() {
        return Ok((SearchStatus::Unsatisfiable, LabelingStats::default()));
    }
    let mut labeler = Labeler::new(model, &model.domains);
    labeler.deadline = Some(deadline(config.total_timeout));
    let mut found = 0usize;
    let mut error = None;
    let mut cb = |state: &crate::model::PlacementState| match model.conformation(state) {
        Ok(c) => {
            found += 1;
            let more = on_solution(c);
            if !more || (config.n_solutions > 0 && found >= config.n_solutions) {
                Leaf::Stop
            } else {
                Leaf::Continue
            }
        }
        Err(e) => {
            error = Some(e);
            Leaf::Stop
        }
    };
    let flow = labeler.run(&mut cb);
    if let Some(e) = error {
        return Err(e);
    }
    let status = match flow {
        Flow::Exhausted if found == 0 => SearchStatus::Unsatisfiable,
        Flow::Exhausted => SearchStatus::Complete,
        Flow::Stopped => SearchStatus::LimitReached,
        Flow::OutOfBudget => SearchStatus::Timeout,
    };
    Ok((status, labeler.stats))
}

pub fn enumerate(model: &AssemblyModel, config: &SearchConfig) -> Result<EnumerationResult> {
    let mut solutions = Vec::new();
    let (status, stats) = enumerate_each(model, config, &mut |c| {
        solutions.push(c);
        true
    })?;
    Ok(EnumerationResult {
        solutions,
        status,
        stats,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Outcome {
    /// Initial solution, or a move that met `E < Lim`.
    Accepted,
    /// A move drawn as worsening that met `E > floor(5·Lim/6)`.
    Worsening,
    /// No relabeling met the bound (failure, wipe-out or inner timeout).
    Rejected,
}

impl Outcome {
    pub fn name(self) -> &'static str {
        match self {
            Outcome::Accepted => "accepted",
            Outcome::Worsening => "worsening",
            Outcome::Rejected => "rejected",
        }
    }

    pub fn parse(s: &str) -> Option<Outcome> {
        match s {
            "accepted" => Some(Outcome::Accepted),
            "worsening" => Some(Outcome::Worsening),
            "rejected" => Some(Outcome::Rejected),
            _ => None,
        }
    }
}

/// One `sol` event. For rejected moves `energy` is the unchanged `Lim`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LogEntry {
    pub iter: u64,
    pub energy: i64,
    pub outcome: Outcome,
    pub elapsed_ms: u64,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunLog {
    pub entries: Vec<LogEntry>,
}

impl RunLog {
    /// `sol <iter> <energy> <outcome> <elapsed_ms>` per line. Without
    /// `with_time` the elapsed field is written as 0 so logs of identical
    /// runs compare equal.
    pub fn to_text(&self, with_time: bool) -> String {
        let mut s = String::new();
        for e in &self.entries {
            let t = if with_time { e.elapsed_ms } else { 0 };
            writeln!(s, "sol {} {} {} {}", e.iter, e.energy, e.outcome.name(), t).unwrap();
        }
        s
    }

    /// Reads `sol` lines back; blank lines and `#` comments are skipped.
    pub fn parse(text: &str) -> Result<RunLog> {
        let mut entries = Vec::new();
        for (no, line) in text.lines().enumerate() {
            let f: Vec<&str> = line.split_whitespace().collect();
            if f.is_empty() || f[0].starts_with('#') {
                continue;
            }
            let bad = || Error::Format {
                path: "run log".into(),
                line: no + 1,
                msg: format!("bad entry '{line}'"),
            };
            if f.len() != 5 || f[0] != "sol" {
                return Err(bad());
            }
            entries.push(LogEntry {
                iter: f[1].parse().map_err(|_| bad())?,
                energy: f[2].parse().map_err(|_| bad())?,
                outcome: Outcome::parse(f[3]).ok_or_else(bad)?,
                elapsed_ms: f[4].parse().map_err(|_| bad())?,
            });
        }
        Ok(RunLog { entries })
    }

    /// Running minimum of accepted energies, one value per accepted or
    /// worsening entry.
    pub fn best_trace(&self) -> Vec<i64> {
        let mut best: Option<i64> = None;
        self.entries
            .iter()
            .filter(|e| e.outcome != Outcome::Rejected)
            .map(|e| {
                let b = best.map_or(e.energy, |b| b.min(e.energy));
                best = Some(b);
                b
            })
            .collect()
    }

    /// Checks the acceptance rule of every non-initial solution: `E < Lim`
    /// for accepted steps, `E > floor(num·Lim/den)` for worsening steps.
    /// Returns the first offending entry.
    pub fn check_acceptance(&self, num: i64, den: i64) -> Option<LogEntry> {
        let mut lim: Option<i64> = None;
        for e in &self.entries {
            match (e.outcome, lim) {
                (Outcome::Rejected, _) => continue,
                (_, None) => {}
                (Outcome::Accepted, Some(l)) if e.energy >= l => return Some(*e),
                (Outcome::Worsening, Some(l)) if e.energy <= (num * l).div_euclid(den) => {
                    return Some(*e)
                }
                _ => {}
            }
            lim = Some(e.energy);
        }
        None
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct LnsStats {
    pub iterations: u64,
    pub accepted: u64,
    pub worsening: u64,
    pub rejected: u64,
    /// Relabelings cut by the inner timeout or node budget.
    pub inner_timeouts: u64,
    /// Moves whose relaxed domains were wiped out by next-link propagation.
    pub wipeouts: u64,
    pub improvements: u64,
    pub nodes: u64,
    pub failures: u64,
    pub backtracks: u64,
}

impl LnsStats {
    fn absorb(&mut self, s: &LabelingStats) {
        self.nodes += s.nodes;
        self.failures += s.failures;
        self.backtracks += s.backtracks;
    }
}

#[derive(Debug, Clone)]
pub struct LnsResult {
    pub best: Option<Conformation>,
    pub last: Option<Conformation>,
    pub log: RunLog,
    pub stats: LnsStats,
    pub status: SearchStatus,
    pub seed: u64,
}

/// Labels `domains` leftmost-first and returns the first complete
/// assignment accepted by `accept`.
fn label_first(
    model: &AssemblyModel,
    domains: &[Vec<TemplateId>],
    until: Instant,
    node_limit: Option<u64>,
    accept: &dyn Fn(&Conformation) -> bool,
) -> Result<(Flow, Option<Conformation>, LabelingStats)> {
    let mut labeler = Labeler::new(model, domains);
    labeler.deadline = Some(until);
    labeler.node_limit = node_limit;
    let mut found = None;
    let mut error = None;
    let flow = labeler.run(&mut |state| match model.conformation(state) {
        Ok(c) if accept(&c) => {
            found = Some(c);
            Leaf::Stop
        }
        Ok(_) => Leaf::Reject,
        Err(e) => {
            error = Some(e);
            Leaf::Stop
        }
    });
    if let Some(e) = error {
        return Err(e);
    }
    Ok((flow, found, labeler.stats))
}

/// One Large Neighborhood Search run with a seeded ChaCha8 stream.
///
/// Each iteration draws the step type first (worsening with probability
/// `worsening_probability`), then a move; the relaxed variables are
/// relabeled under the energy bound with the inner timeout. `last` follows
/// every successful relabeling, `best` only strict improvements.
pub fn lns(model: &AssemblyModel, config: &SearchConfig) -> Result<LnsResult> {
    config.validate()?;
    let start = Instant::now();
    let until = deadline(config.total_timeout);
    let elapsed = || start.elapsed().as_millis() as u64;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut log = RunLog::default();
    let mut stats = LnsStats::default();
    let result = |best, last, log, stats, status| LnsResult {
        best,
        last,
        log,
        stats,
        status,
        seed: config.seed,
    };

    if model.is_unsatisfiable() {
        return Ok(result(None, None, log, stats, SearchStatus::Unsatisfiable));
    }
    let (flow, initial, s) = label_first(model, &model.domains, until, None, &|_| true)?;
    stats.absorb(&s);
    let Some(initial) = initial else {
        let status = if flow == Flow::OutOfBudget {
            SearchStatus::NoInitialSolution
        } else {
            SearchStatus::Unsatisfiable
        };
        return Ok(result(None, None, log, stats, status));
    };
    log.entries.push(LogEntry {
        iter: 0,
        energy: initial.energy.total,
        outcome: Outcome::Accepted,
        elapsed_ms: elapsed(),
    });
    stats.accepted += 1;
    let mut best = initial.clone();
    let mut last = initial;

    let vars = model.variables();
    let (min_w, max_w) = config.window_bounds(vars);
    let status = loop {
        if config.max_iterations.is_some_and(|m| stats.iterations >= m) {
            break SearchStatus::LimitReached;
        }
        if Instant::now() >= until {
            break SearchStatus::Timeout;
        }
        stats.iterations += 1;
        let iter = stats.iterations;
        let worsening = rng.gen::<f64>() < config.worsening_probability;
        let mv = draw_move(&mut rng, vars, min_w, max_w, config.pivot_probability);
        let lim = last.energy.total;
        let bound = config.worsening_bound(lim);
        let relaxed = mv.relaxed_domains(&last.chain, &model.domains, &model.forced);

        let outcome = match next_consistency(&relaxed, model.db) {
            Err(_) => {
                stats.wipeouts += 1;
                None
            }
            Ok(domains) => {
                let inner = deadline(config.inner_timeout).min(until);
                let accept = |c: &Conformation| {
                    if worsening {
                        c.energy.total > bound
                    } else {
                        c.energy.total < lim
                    }
                };
                let (flow, found, s) =
                    label_first(model, &domains, inner, config.inner_node_limit, &accept)?;
                stats.absorb(&s);
                if flow == Flow::OutOfBudget {
                    stats.inner_timeouts += 1;
                }
                found
            }
        };

        let entry = match outcome {
            Some(c) => {
                let kind = if worsening {
                    Outcome::Worsening
                } else {
                    Outcome::Accepted
                };
                if worsening {
                    stats.worsening += 1;
                } else {
                    stats.accepted += 1;
                }
                if c.energy.total < best.energy.total {
                    best = c.clone();
                    stats.improvements += 1;
                }
                let e = c.energy.total;
                last = c;
                LogEntry {
                    iter,
                    energy: e,
                    outcome: kind,
                    elapsed_ms: elapsed(),
                }
            }
            None => {
                stats.rejected += 1;
                LogEntry {
                    iter,
                    energy: lim,
                    outcome: Outcome::Rejected,
                    elapsed_ms: elapsed(),
                }
            }
        };
        log.entries.push(entry);
    };
    Ok(result(Some(best), Some(last), log, stats, status))
}

/// Seed of run `k` out of several started from `seed`.
pub fn run_seed(seed: u64, k: usize) -> u64 {
    seed.wrapping_add((k as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15))
}

/// Independent LNS runs in parallel, one RNG stream each. Returns all
/// results in run order and the index of the best (lowest energy, then
/// lowest index), if any run found a solution.
pub fn lns_runs(
    model: &AssemblyModel,
    config: &SearchConfig,
    runs: usize,
) -> Result<(Vec<LnsResult>, Option<usize>)> {
    let results: Vec<LnsResult> = (0..runs.max(1))
        .into_par_iter()
        .map(|k| {
            let cfg = SearchConfig {
                seed: run_seed(config.seed, k),
                ..config.clone()
            };
            lns(model, &cfg)
        })
        .collect::<Result<_>>()?;
    let best = results
        .iter()
        .enumerate()
        .filter_map(|(k, r)| r.best.as_ref().map(|b| (b.energy.total, k)))
        .min()
        .map(|(_, k)| k);
    Ok((results, best))
}
