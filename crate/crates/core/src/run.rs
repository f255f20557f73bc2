//! Stepping and budgeted runs.
//!
//! Step indices start at 0 for the initial word; the transition
//! `A_i -> A_{i+1}` is one step. A word shorter than `v` (including the empty
//! word) is terminal: no partial step is ever performed on it.

use std::fmt;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::hash::RollingHash;
use crate::system::TagSystem;
use crate::word::{Symbol, Word};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RunBudget {
    pub max_steps: u64,
    pub max_length: usize,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error(
    "run budget limits must be strictly positive (max_steps={max_steps}, max_length={max_length})"
)]
pub struct BudgetError {
    pub max_steps: u64,
    pub max_length: usize,
}

impl RunBudget {
    pub const DEFAULT_MAX_STEPS: u64 = 10_000_000;
    pub const DEFAULT_MAX_LENGTH: usize = 15_000;

    pub fn new(max_steps: u64, max_length: usize) -> Result<Self, BudgetError> {
        if max_steps == 0 || max_length == 0 {
            return Err(BudgetError {
                max_steps,
                max_length,
            });
        }
        Ok(Self {
            max_steps,
            max_length,
        })
    }
}

impl Default for RunBudget {
    fn default() -> Self {
        Self {
            max_steps: Self::DEFAULT_MAX_STEPS,
            max_length: Self::DEFAULT_MAX_LENGTH,
        }
    }
}

/// Result of applying one step to a word.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Step {
    Next(Word),
    Halt,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum OutcomeKind {
    Halted,
    Periodic,
    LengthBoundExceeded,
    BudgetExhausted,
}

impl OutcomeKind {
    pub const ALL: [OutcomeKind; 4] = [
        OutcomeKind::Halted,
        OutcomeKind::Periodic,
        OutcomeKind::LengthBoundExceeded,
        OutcomeKind::BudgetExhausted,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            OutcomeKind::Halted => "Halted",
            OutcomeKind::Periodic => "Periodic",
            OutcomeKind::LengthBoundExceeded => "LengthBoundExceeded",
            OutcomeKind::BudgetExhausted => "BudgetExhausted",
        }
    }
}

impl fmt::Display for OutcomeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// How a run ended. `steps` is the step index at which the outcome was
/// decided; for `Periodic` that is where the detector fired, which can lie
/// past the first recurrence at `entry_step + period`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum RunOutcome {
    Halted {
        steps: u64,
    },
    Periodic {
        steps: u64,
        period: u64,
        entry_step: u64,
    },
    LengthBoundExceeded {
        steps: u64,
    },
    BudgetExhausted {
        steps: u64,
    },
}

impl RunOutcome {
    pub fn kind(&self) -> OutcomeKind {
        match self {
            RunOutcome::Halted { .. } => OutcomeKind::Halted,
            RunOutcome::Periodic { .. } => OutcomeKind::Periodic,
            RunOutcome::LengthBoundExceeded { .. } => OutcomeKind::LengthBoundExceeded,
            RunOutcome::BudgetExhausted { .. } => OutcomeKind::BudgetExhausted,
        }
    }

    pub fn steps(&self) -> u64 {
        match *self {
            RunOutcome::Halted { steps }
            | RunOutcome::Periodic { steps, .. }
            | RunOutcome::LengthBoundExceeded { steps }
            | RunOutcome::BudgetExhausted { steps } => steps,
        }
    }

    pub fn period(&self) -> Option<u64> {
        match *self {
            RunOutcome::Periodic { period, .. } => Some(period),
            _ => None,
        }
    }

    pub fn entry_step(&self) -> Option<u64> {
        match *self {
            RunOutcome::Periodic { entry_step, .. } => Some(entry_step),
            _ => None,
        }
    }

    /// First step at which the behaviour was settled: the first recurrence
    /// for periodic runs, `None` for exhausted budgets.
    pub fn resolution_step(&self) -> Option<u64> {
        match *self {
            RunOutcome::Periodic {
                period, entry_step, ..
            } => Some(entry_step + period),
            RunOutcome::BudgetExhausted { .. } => None,
            other => Some(other.steps()),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RunReport {
    pub outcome: RunOutcome,
    /// The word at step `outcome.steps()`.
    pub word: Word,
    /// Longest word seen, including the final one.
    pub max_length: usize,
}

impl TagSystem {
    /// One step, or [`Step::Halt`] when `word` is shorter than `v`.
    pub fn step(&self, word: &Word) -> Step {
        let mut next = word.clone();
        if self.step_in_place(&mut next) {
            Step::Next(next)
        } else {
            Step::Halt
        }
    }

    /// Advances `word` by one step. Returns `false` (leaving the word
    /// untouched) when the word is terminal.
    #[inline]
    pub fn step_in_place(&self, word: &mut Word) -> bool {
        let len = word.len();
        let v = self.v();
        if len < v {
            return false;
        }
        let scanned = word.as_slice()[0];
        let app = self.appendant(scanned);
        word.push_slice(app);
        word.drop_front(v);
        debug_assert_eq!(word.len() + v, len + app.len(), "length law");
        true
    }

    /// Iterator over `A_0, A_1, ...` until the word is terminal. The terminal
    /// word is yielded last.
    pub fn trajectory(&self, initial: &Word) -> Trajectory<'_> {
        Trajectory {
            system: self,
            next: Some(initial.clone()),
        }
    }
}

pub struct Trajectory<'a> {
    system: &'a TagSystem,
    next: Option<Word>,
}

impl Iterator for Trajectory<'_> {
    type Item = Word;

    fn next(&mut self) -> Option<Word> {
        let current = self.next.take()?;
        if let Step::Next(w) = self.system.step(&current) {
            self.next = Some(w);
        }
        Some(current)
    }
}

/// A word together with its rolling hash, kept in sync on every step.
#[derive(Clone, Debug)]
pub struct Tape {
    word: Word,
    hash: RollingHash,
}

impl Tape {
    pub fn new(word: &Word) -> Self {
        Self {
            word: word.clone(),
            hash: RollingHash::of_word(word),
        }
    }

    pub fn word(&self) -> &Word {
        &self.word
    }

    pub fn into_word(self) -> Word {
        self.word
    }

    pub fn hash(&self) -> RollingHash {
        self.hash
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.word.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.word.is_empty()
    }

    #[inline]
    pub fn step(&mut self, system: &TagSystem) -> bool {
        let v = system.v();
        if self.word.len() < v {
            return false;
        }
        let app = system.appendant(self.word.as_slice()[0]);
        self.hash.push_slice(app);
        self.word.push_slice(app);
        self.hash.pop_front_slice(&self.word.as_slice()[..v]);
        self.word.drop_front(v);
        true
    }

    /// Hash-filtered equality, always confirmed on the symbols.
    #[inline]
    pub fn same_word(&self, other: &Tape) -> bool {
        self.len() == other.len() && self.hash == other.hash && self.word == other.word
    }

    pub fn assign(&mut self, other: &Tape) {
        self.word.assign(&other.word);
        self.hash = other.hash;
    }
}

/// Smallest `mu` with `A_mu == A_{mu + period}`, given that the trajectory is
/// known to be periodic with minimal period `period`.
pub(crate) fn find_entry(system: &TagSystem, initial: &Word, period: u64) -> (u64, Tape) {
    let mut lead = Tape::new(initial);
    for _ in 0..period {
        let stepped = lead.step(system);
        debug_assert!(stepped);
    }
    let mut lag = Tape::new(initial);
    let mut entry = 0;
    while !lag.same_word(&lead) {
        lag.step(system);
        lead.step(system);
        entry += 1;
    }
    (entry, lag)
}

enum Control {
    Continue,
    Stop,
}

enum Driven {
    Finished(RunReport),
    Stopped { step: u64 },
}

/// The shared run loop. `visit` sees every word of the trajectory (with its
/// step index) before it is checked against the budget, and may stop the run.
fn drive<F>(
    system: &TagSystem,
    initial: &Word,
    budget: RunBudget,
    detect_cycles: bool,
    mut visit: F,
) -> Driven
where
    F: FnMut(u64, &Tape) -> Control,
{
    let v = system.v();
    let mut tape = Tape::new(initial);
    let mut saved = tape.clone();
    let mut saved_step = 0u64;
    let mut power = 1u64;
    let mut step = 0u64;
    let mut max_length = tape.len();

    loop {
        let len = tape.len();
        max_length = max_length.max(len);
        if let Control::Stop = visit(step, &tape) {
            return Driven::Stopped { step };
        }
        let outcome = if len < v {
            Some(RunOutcome::Halted { steps: step })
        } else if len > budget.max_length {
            Some(RunOutcome::LengthBoundExceeded { steps: step })
        } else {
            None
        };
        if let Some(outcome) = outcome {
            return Driven::Finished(RunReport {
                outcome,
                word: tape.into_word(),
                max_length,
            });
        }
        if detect_cycles && step > 0 {
            if tape.same_word(&saved) {
                let period = step - saved_step;
                let (entry_step, _) = find_entry(system, initial, period);
                return Driven::Finished(RunReport {
                    outcome: RunOutcome::Periodic {
                        steps: step,
                        period,
                        entry_step,
                    },
                    word: tape.into_word(),
                    max_length,
                });
            }
            if step - saved_step == power {
                saved.assign(&tape);
                saved_step = step;
                power *= 2;
            }
        }
        if step >= budget.max_steps {
            return Driven::Finished(RunReport {
                outcome: RunOutcome::BudgetExhausted { steps: step },
                word: tape.into_word(),
                max_length,
            });
        }
        tape.step(system);
        step += 1;
    }
}

/// Runs without cycle detection using the unhashed fast path.
fn drive_plain(system: &TagSystem, initial: &Word, budget: RunBudget) -> RunReport {
    let v = system.v();
    let mut word = initial.clone();
    let mut step = 0u64;
    let mut max_length = word.len();
    loop {
        let len = word.len();
        max_length = max_length.max(len);
        let outcome = if len < v {
            RunOutcome::Halted { steps: step }
        } else if len > budget.max_length {
            RunOutcome::LengthBoundExceeded { steps: step }
        } else if step >= budget.max_steps {
            RunOutcome::BudgetExhausted { steps: step }
        } else {
            system.step_in_place(&mut word);
            step += 1;
            continue;
        };
        return RunReport {
            outcome,
            word,
            max_length,
        };
    }
}

/// Runs `system` from `initial` until it halts, exceeds the length bound,
/// is found periodic (when `detect_cycles`), or uses up the step budget.
pub fn run(
    system: &TagSystem,
    initial: &Word,
    budget: RunBudget,
    detect_cycles: bool,
) -> RunReport {
    if !detect_cycles {
        return drive_plain(system, initial, budget);
    }
    match drive(system, initial, budget, true, |_, _| Control::Continue) {
        Driven::Finished(report) => report,
        Driven::Stopped { .. } => unreachable!("visitor never stops"),
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Reach {
    FoundAtStep(u64),
    NotWithinBudget {
        outcome: RunOutcome,
        /// The run closed into a cycle without meeting the target, so the
        /// target is unreachable.
        definitive_miss: bool,
    },
}

/// Semi-decides whether `target` occurs on the trajectory from `initial`.
pub fn reaches(system: &TagSystem, initial: &Word, target: &Word, budget: RunBudget) -> Reach {
    let target = Tape::new(target);
    let driven = drive(system, initial, budget, true, |_, tape| {
        if tape.same_word(&target) {
            Control::Stop
        } else {
            Control::Continue
        }
    });
    match driven {
        Driven::Stopped { step } => Reach::FoundAtStep(step),
        Driven::Finished(report) => Reach::NotWithinBudget {
            definitive_miss: report.outcome.kind() == OutcomeKind::Periodic,
            outcome: report.outcome,
        },
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Throughput {
    pub steps: u64,
    pub elapsed: Duration,
    pub steps_per_second: f64,
    pub final_length: usize,
    pub max_length: usize,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum BenchError {
    #[error("run ended early at step {step}: {kind}")]
    EarlyTermination { step: u64, kind: OutcomeKind },
}

/// Executes exactly `steps` steps with cycle detection off and reports the
/// wall-clock rate.
pub fn throughput_bench(
    system: &TagSystem,
    initial: &Word,
    steps: u64,
    max_length: usize,
) -> Result<Throughput, BenchError> {
    let v = system.v();
    let mut word = initial.clone();
    let mut longest = word.len();
    let start = Instant::now();
    for step in 0..steps {
        let len = word.len();
        if len < v {
            return Err(BenchError::EarlyTermination {
                step,
                kind: OutcomeKind::Halted,
            });
        }
        if len > max_length {
            return Err(BenchError::EarlyTermination {
                step,
                kind: OutcomeKind::LengthBoundExceeded,
            });
        }
        longest = longest.max(len);
        system.step_in_place(&mut word);
    }
    let elapsed = start.elapsed();
    Ok(Throughput {
        steps,
        elapsed,
        steps_per_second: steps as f64 / elapsed.as_secs_f64().max(1e-9),
        final_length: word.len(),
        max_length: longest.max(word.len()),
    })
}

/// Scanned symbols of the first `count` steps, or fewer if the run halts or
/// exceeds `max_length` first.
pub fn scanned_symbols(
    system: &TagSystem,
    initial: &Word,
    count: usize,
    max_length: usize,
) -> Vec<Symbol> {
    let v = system.v();
    let mut word = initial.clone();
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let len = word.len();
        if len < v || len > max_length {
            break;
        }
        out.push(word.as_slice()[0]);
        system.step_in_place(&mut word);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn post_word(s: &str) -> Word {
        TagSystem::post().parse_word(s).unwrap()
    }

    #[test]
    fn post_trace_single_steps() {
        let t = TagSystem::post();
        assert_eq!(t.step(&post_word("001101")), Step::Next(post_word("10100")));
        assert_eq!(t.step(&post_word("10100")), Step::Next(post_word("001101")));
        assert_eq!(t.step(&post_word("01")), Step::Halt);
        assert_eq!(t.step(&Word::empty()), Step::Halt);
    }

    #[test]
    fn post_golden_run() {
        let report = run(
            &TagSystem::post(),
            &post_word("001101"),
            RunBudget::new(1_000_000, 15_000).unwrap(),
            true,
        );
        assert_eq!(report.outcome.kind(), OutcomeKind::Periodic);
        assert_eq!(report.outcome.period(), Some(2));
        assert_eq!(report.outcome.entry_step(), Some(0));
        let RunOutcome::Periodic { steps, .. } = report.outcome else {
            unreachable!()
        };
        assert!(steps >= 2);
    }

    #[test]
    fn short_initial_word_halts_at_step_zero() {
        let report = run(
            &TagSystem::post(),
            &post_word("00"),
            RunBudget::default(),
            true,
        );
        assert_eq!(report.outcome, RunOutcome::Halted { steps: 0 });
        assert_eq!(report.word, post_word("00"));
    }

    #[test]
    fn collatz_pair_halts_after_two_steps() {
        let t = TagSystem::collatz();
        let report = run(
            &t,
            &Word::from_symbols(vec![0, 0]),
            RunBudget::default(),
            true,
        );
        assert_eq!(report.outcome, RunOutcome::Halted { steps: 2 });
        assert_eq!(report.word.as_slice(), &[0]);
    }

    #[test]
    fn length_bound_and_budget() {
        // 0 -> 000 with v=1 grows by two symbols per step.
        let t = TagSystem::new(1, vec![vec![0, 0, 0]]).unwrap();
        let w = Word::from_symbols(vec![0]);
        let report = run(&t, &w, RunBudget::new(1000, 10).unwrap(), true);
        // lengths 1, 3, 5, 7, 9, 11 -> first length above 10 at step 5
        assert_eq!(report.outcome, RunOutcome::LengthBoundExceeded { steps: 5 });
        assert_eq!(report.max_length, 11);

        let report = run(&t, &w, RunBudget::new(3, 1000).unwrap(), false);
        assert_eq!(report.outcome, RunOutcome::BudgetExhausted { steps: 3 });
        assert_eq!(report.word.len(), 7);
    }

    #[test]
    fn budget_rejects_zero() {
        assert!(RunBudget::new(0, 5).is_err());
        assert!(RunBudget::new(5, 0).is_err());
    }

    #[test]
    fn detection_off_never_reports_periodic() {
        let report = run(
            &TagSystem::post(),
            &post_word("001101"),
            RunBudget::new(100, 15_000).unwrap(),
            false,
        );
        assert_eq!(report.outcome, RunOutcome::BudgetExhausted { steps: 100 });
        assert_eq!(report.word, post_word("001101"));
    }

    #[test]
    fn reach_examples() {
        let t = TagSystem::post();
        let budget = RunBudget::new(1_000_000, 15_000).unwrap();
        let a0 = post_word("001101");
        assert_eq!(
            reaches(&t, &a0, &post_word("10100"), budget),
            Reach::FoundAtStep(1)
        );
        assert_eq!(reaches(&t, &a0, &a0, budget), Reach::FoundAtStep(0));
        match reaches(&t, &a0, &post_word("111111"), budget) {
            Reach::NotWithinBudget {
                outcome,
                definitive_miss,
            } => {
                assert!(definitive_miss);
                assert_eq!(outcome.kind(), OutcomeKind::Periodic);
            }
            other => panic!("unexpected {other:?}"),
        }
        // A halting run is not a definitive miss.
        match reaches(&t, &post_word("00"), &post_word("1"), budget) {
            Reach::NotWithinBudget {
                definitive_miss, ..
            } => assert!(!definitive_miss),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn bench_early_termination() {
        let eraser = TagSystem::new(1, vec![vec![]]).unwrap();
        let w = Word::from_symbols(vec![0; 10]);
        assert_eq!(
            throughput_bench(&eraser, &w, 20, usize::MAX),
            Err(BenchError::EarlyTermination {
                step: 10,
                kind: OutcomeKind::Halted
            })
        );
        let ok = throughput_bench(
            &TagSystem::post(),
            &post_word("001101"),
            1_000_000,
            usize::MAX,
        )
        .unwrap();
        assert_eq!(ok.steps, 1_000_000);
        assert!(ok.steps_per_second > 0.0);
    }

    #[test]
    fn scanned_stream_of_post_cycle() {
        let s = scanned_symbols(&TagSystem::post(), &post_word("001101"), 6, usize::MAX);
        assert_eq!(s, vec![0, 1, 0, 1, 0, 1]);
    }
}
