//! The Collatz problem as the tag system `0 -> 12, 1 -> 0, 2 -> 000` with
//! deletion number 2, checked against the shortcut map
//! `n -> n/2` (even), `n -> (3n+1)/2` (odd).
//!
//! A number `n` is encoded as the word `0^n`; every later return of the
//! trajectory to a pure power `0^m` is read off as the next value `m`.

use num_integer::Integer;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::accel::{MacroStepper, RunLengthWord};
use crate::run::RunBudget;
use crate::system::TagSystem;
use crate::word::Word;

/// Next value under the shortcut Collatz map. `n` must be positive.
pub fn shortcut_collatz_oracle<N>(n: &N) -> N
where
    N: Integer + Clone + From<u8>,
{
    let two = N::from(2u8);
    if n.is_even() {
        n.clone() / two
    } else {
        (N::from(3u8) * n.clone() + N::one()) / two
    }
}

/// The unary encoding `0^n`.
pub fn encode(n: u64) -> Word {
    Word::from_symbols(vec![0; n as usize])
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Verdict {
    ReachedOne,
    BudgetExhausted,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CollatzTrace {
    pub n0: u64,
    pub phases: Vec<u64>,
    pub tag_steps: u64,
    pub max_word_length: u64,
    pub verdict: Verdict,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CollatzError {
    #[error("starting value must be positive")]
    NonPositive,
    /// `found` is `None` when the run halted before producing the phase.
    #[error(
        "phase {index} of the trajectory from {n0}: expected {expected}, tag system gave {found:?}"
    )]
    OracleMismatch {
        n0: u64,
        index: usize,
        expected: u64,
        found: Option<u64>,
    },
}

/// Interpreter used to advance the tag system.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum Engine {
    /// One step at a time on a flat word.
    Plain,
    /// Batched steps on a run-length encoded word.
    #[default]
    RunLength,
}

/// Budget large enough for every start value up to well beyond `10^5`.
pub fn sweep_budget() -> RunBudget {
    RunBudget {
        max_steps: 1_000_000_000_000,
        max_length: 1 << 40,
    }
}

struct PhaseChecker {
    trace: CollatzTrace,
    max_phases: usize,
}

enum Flow {
    Continue,
    Stop,
}

impl PhaseChecker {
    fn new(n: u64, max_phases: usize) -> Self {
        Self {
            trace: CollatzTrace {
                n0: n,
                phases: vec![n],
                tag_steps: 0,
                max_word_length: n,
                verdict: Verdict::BudgetExhausted,
            },
            max_phases,
        }
    }

    fn current(&self) -> u64 {
        *self.trace.phases.last().expect("trace starts with n0")
    }

    fn expected(&self) -> u64 {
        shortcut_collatz_oracle(&self.current())
    }

    fn start(&mut self) -> Flow {
        if self.current() == 1 {
            self.trace.verdict = Verdict::ReachedOne;
            return Flow::Stop;
        }
        if self.trace.phases.len() >= self.max_phases {
            return Flow::Stop;
        }
        Flow::Continue
    }

    fn record(&mut self, m: u64) -> Result<Flow, CollatzError> {
        let expected = self.expected();
        if m != expected {
            return Err(self.mismatch(Some(m)));
        }
        self.trace.phases.push(m);
        Ok(self.start())
    }

    fn mismatch(&self, found: Option<u64>) -> CollatzError {
        CollatzError::OracleMismatch {
            n0: self.trace.n0,
            index: self.trace.phases.len(),
            expected: self.expected(),
            found,
        }
    }
}

/// Runs the Collatz tag system from `encode(n)` until the phase value 1 is
/// reached, `max_phases` phases are recorded, or the budget runs out. Every
/// phase is checked against [`shortcut_collatz_oracle`].
pub fn run_collatz(
    n: u64,
    max_phases: usize,
    budget: RunBudget,
) -> Result<CollatzTrace, CollatzError> {
    run_collatz_with(Engine::default(), n, max_phases, budget)
}

pub fn run_collatz_with(
    engine: Engine,
    n: u64,
    max_phases: usize,
    budget: RunBudget,
) -> Result<CollatzTrace, CollatzError> {
    if n == 0 {
        return Err(CollatzError::NonPositive);
    }
    let mut checker = PhaseChecker::new(n, max_phases.max(1));
    if let Flow::Stop = checker.start() {
        return Ok(checker.trace);
    }
    match engine {
        Engine::Plain => run_plain(&mut checker, budget)?,
        Engine::RunLength => run_batched(&mut checker, budget)?,
    }
    Ok(checker.trace)
}

fn run_plain(checker: &mut PhaseChecker, budget: RunBudget) -> Result<(), CollatzError> {
    let system = TagSystem::collatz();
    let v = system.v();
    let mut word = encode(checker.trace.n0);
    let mut nonzero = 0usize;
    while checker.trace.tag_steps < budget.max_steps {
        if word.len() < v {
            return Err(checker.mismatch(None));
        }
        let head = &word.as_slice()[..v];
        nonzero -= head.iter().filter(|&&s| s != 0).count();
        let app = system.appendant(word.as_slice()[0]);
        nonzero += app.iter().filter(|&&s| s != 0).count();
        system.step_in_place(&mut word);
        checker.trace.tag_steps += 1;
        let len = word.len() as u64;
        checker.trace.max_word_length = checker.trace.max_word_length.max(len);
        if word.len() > budget.max_length {
            return Ok(());
        }
        if nonzero == 0 && len > 0 {
            if let Flow::Stop = checker.record(len)? {
                return Ok(());
            }
        }
    }
    Ok(())
}

fn run_batched(checker: &mut PhaseChecker, budget: RunBudget) -> Result<(), CollatzError> {
    let system = TagSystem::collatz();
    let stepper = MacroStepper::new(&system);
    let mut word = RunLengthWord::uniform(0, checker.trace.n0);
    while checker.trace.tag_steps < budget.max_steps {
        let remaining = budget.max_steps - checker.trace.tag_steps;
        let taken = stepper.macro_step(&mut word, remaining);
        if taken == 0 {
            return Err(checker.mismatch(None));
        }
        checker.trace.tag_steps += taken;
        // Length is linear within a batch, so its extremes sit at the ends.
        let len = word.len();
        checker.trace.max_word_length = checker.trace.max_word_length.max(len);
        if len > budget.max_length as u64 {
            return Ok(());
        }
        if word.is_zero_power() {
            if let Flow::Stop = checker.record(len)? {
                return Ok(());
            }
        }
    }
    Ok(())
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SweepSummary {
    pub n_max: u64,
    pub verified: u64,
    pub budget_exhausted: u64,
    pub max_phases: usize,
    pub max_word_length: u64,
    pub total_tag_steps: u64,
}

/// Traces for every `1 <= n <= n_max`, ordered by `n`. The first oracle
/// mismatch (smallest `n`) aborts the sweep.
pub fn collatz_traces(n_max: u64, budget: RunBudget) -> Result<Vec<CollatzTrace>, CollatzError> {
    (1..=n_max)
        .into_par_iter()
        .map(|n| run_collatz(n, usize::MAX, budget))
        .collect()
}

pub fn summarize(n_max: u64, traces: &[CollatzTrace]) -> SweepSummary {
    let mut s = SweepSummary {
        n_max,
        ..SweepSummary::default()
    };
    for t in traces {
        match t.verdict {
            Verdict::ReachedOne => s.verified += 1,
            Verdict::BudgetExhausted => s.budget_exhausted += 1,
        }
        s.max_phases = s.max_phases.max(t.phases.len());
        s.max_word_length = s.max_word_length.max(t.max_word_length);
        s.total_tag_steps += t.tag_steps;
    }
    s
}

/// Sweep statistics without retaining the per-`n` phase lists.
pub fn collatz_sweep(n_max: u64, budget: RunBudget) -> Result<SweepSummary, CollatzError> {
    let parts: Vec<SweepSummary> = (1..=n_max)
        .into_par_iter()
        .map(|n| run_collatz(n, usize::MAX, budget).map(|t| summarize(0, &[t])))
        .collect::<Result<_, _>>()?;
    let mut s = SweepSummary {
        n_max,
        ..SweepSummary::default()
    };
    for p in parts {
        s.verified += p.verified;
        s.budget_exhausted += p.budget_exhausted;
        s.max_phases = s.max_phases.max(p.max_phases);
        s.max_word_length = s.max_word_length.max(p.max_word_length);
        s.total_tag_steps += p.total_tag_steps;
    }
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigUint;

    fn budget() -> RunBudget {
        RunBudget::new(1_000_000, 1_000_000).unwrap()
    }

    #[test]
    fn oracle_values() {
        assert_eq!(shortcut_collatz_oracle(&2u64), 1);
        assert_eq!(shortcut_collatz_oracle(&4u64), 2);
        assert_eq!(shortcut_collatz_oracle(&3u64), 5);
        let big = BigUint::from(u64::MAX);
        let expected = (BigUint::from(3u8) * &big + 1u8) / 2u8;
        assert_eq!(shortcut_collatz_oracle(&big), expected);
    }

    #[test]
    fn encoding() {
        assert_eq!(encode(1).as_slice(), &[0]);
        assert_eq!(encode(3).as_slice(), &[0, 0, 0]);
        assert_eq!(encode(7).len(), 7);
    }

    #[test]
    fn small_traces() {
        for engine in [Engine::Plain, Engine::RunLength] {
            let t = run_collatz_with(engine, 1, 100, budget()).unwrap();
            assert_eq!(
                (t.phases, t.verdict, t.tag_steps),
                (vec![1], Verdict::ReachedOne, 0)
            );
            let t = run_collatz_with(engine, 2, 100, budget()).unwrap();
            assert_eq!(
                (t.phases, t.verdict, t.tag_steps),
                (vec![2, 1], Verdict::ReachedOne, 2)
            );
            let t = run_collatz_with(engine, 3, 100, budget()).unwrap();
            assert_eq!(t.phases, vec![3, 5, 8, 4, 2, 1]);
            assert_eq!(t.verdict, Verdict::ReachedOne);
        }
    }

    #[test]
    fn hand_trace_three_to_five() {
        let system = TagSystem::collatz();
        let mut w = encode(3);
        for _ in 0..4 {
            assert!(system.step_in_place(&mut w));
        }
        assert_eq!(w, encode(5));
    }

    #[test]
    fn engines_agree() {
        for n in 1..=600 {
            let a = run_collatz_with(Engine::Plain, n, usize::MAX, budget()).unwrap();
            let b = run_collatz_with(Engine::RunLength, n, usize::MAX, budget()).unwrap();
            assert_eq!(a, b, "n = {n}");
        }
    }

    #[test]
    fn phase_limit_and_budget() {
        let t = run_collatz(27, 5, budget()).unwrap();
        assert_eq!(t.phases.len(), 5);
        assert_eq!(t.verdict, Verdict::BudgetExhausted);
        let tight = RunBudget::new(10, 1000).unwrap();
        for engine in [Engine::Plain, Engine::RunLength] {
            let t = run_collatz_with(engine, 27, usize::MAX, tight).unwrap();
            assert_eq!(t.verdict, Verdict::BudgetExhausted);
            assert_eq!(t.tag_steps, 10);
        }
        assert_eq!(run_collatz(0, 5, budget()), Err(CollatzError::NonPositive));
    }

    #[test]
    fn sweeps() {
        let s = collatz_sweep(100, sweep_budget()).unwrap();
        assert_eq!((s.verified, s.budget_exhausted), (100, 0));
        let s = collatz_sweep(1, sweep_budget()).unwrap();
        assert_eq!(s.verified, 1);
        let traces = collatz_traces(100, sweep_budget()).unwrap();
        assert_eq!(
            summarize(100, &traces),
            collatz_sweep(100, sweep_budget()).unwrap()
        );
        assert!(traces.windows(2).all(|w| w[0].n0 + 1 == w[1].n0));
    }

    #[test]
    fn description_shorter_than_small_turing_table() {
        let system = TagSystem::collatz();
        assert_eq!(system.l_max() - system.v(), 1);
        assert_eq!(system.v() - system.l_min(), 1);
        // A 5-state 2-symbol table has 10 entries of (write, move, next state).
        let tm_table_symbols = 5 * 2 * 3;
        let rule_symbols: usize = system.appendants().iter().map(|w| w.len() + 1).sum();
        assert!(rule_symbols < tm_table_symbols);
        assert!(system.to_string().len() < tm_table_symbols);
    }
}
