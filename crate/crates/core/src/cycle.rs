//! Cycle detection, periodic orbits and their four-way period-type taxonomy.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::run::{run, OutcomeKind, RunBudget, RunOutcome, Tape};
use crate::system::TagSystem;
use crate::word::{Symbol, Word};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CycleError {
    #[error("no cycle within budget (run ended {0:?})")]
    NoCycleWithinBudget(RunOutcome),
    #[error("periodic structure of the empty word is undefined")]
    EmptyWord,
    #[error("orbit mixes words with p <= l_S and words with l_S < p")]
    UnclassifiableOrbit,
    #[error("word is not periodic (entry step {entry_step}, period {period})")]
    NotPeriodicWord { entry_step: u64, period: u64 },
    #[error("periodic set is of irregular type {0}")]
    IrregularType(PeriodType),
    #[error("no pair of orbit members concatenates to a periodic word within budget")]
    NotFound,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Cycle {
    pub entry_step: u64,
    pub period: u64,
}

/// Minimal period and entry step of the trajectory from `initial`.
pub fn detect_cycle(
    system: &TagSystem,
    initial: &Word,
    budget: RunBudget,
) -> Result<Cycle, CycleError> {
    match run(system, initial, budget, true).outcome {
        RunOutcome::Periodic {
            period, entry_step, ..
        } => Ok(Cycle { entry_step, period }),
        other => Err(CycleError::NoCycleWithinBudget(other)),
    }
}

/// Symbols of a word at positions `0, v, 2v, ...`: exactly the symbols
/// scanned while the word's own symbols are consumed.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PeriodicStructure {
    pub symbols: Vec<Symbol>,
}

impl PeriodicStructure {
    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }
}

pub fn periodic_structure(word: &Word, v: usize) -> Result<PeriodicStructure, CycleError> {
    if word.is_empty() {
        return Err(CycleError::EmptyWord);
    }
    let symbols = word.as_slice().iter().step_by(v).copied().collect();
    Ok(PeriodicStructure { symbols })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum PeriodType {
    Type1,
    Type2,
    Type3,
    Type4,
}

impl PeriodType {
    pub const ALL: [PeriodType; 4] = [
        PeriodType::Type1,
        PeriodType::Type2,
        PeriodType::Type3,
        PeriodType::Type4,
    ];

    /// Types 1 and 3 are regular.
    pub fn is_regular(self) -> bool {
        matches!(self, PeriodType::Type1 | PeriodType::Type3)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            PeriodType::Type1 => "Type1",
            PeriodType::Type2 => "Type2",
            PeriodType::Type3 => "Type3",
            PeriodType::Type4 => "Type4",
        }
    }
}

impl fmt::Display for PeriodType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// The `p` words of a periodic orbit in trajectory order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PeriodicSet {
    words: Vec<Word>,
    structures: Vec<PeriodicStructure>,
}

impl PeriodicSet {
    /// The orbit reached from `initial`, starting at its entry word.
    pub fn of_trajectory(
        system: &TagSystem,
        initial: &Word,
        budget: RunBudget,
    ) -> Result<Self, CycleError> {
        let cycle = detect_cycle(system, initial, budget)?;
        Ok(Self::at_entry(system, initial, cycle))
    }

    /// The orbit of an already detected cycle of the trajectory from
    /// `initial`.
    pub fn at_entry(system: &TagSystem, initial: &Word, cycle: Cycle) -> Self {
        let mut tape = Tape::new(initial);
        for _ in 0..cycle.entry_step {
            tape.step(system);
        }
        Self::collect(system, tape.into_word(), cycle.period)
    }

    /// The orbit of a word that must itself be periodic.
    pub fn from_member(
        system: &TagSystem,
        word: &Word,
        budget: RunBudget,
    ) -> Result<Self, CycleError> {
        let cycle = detect_cycle(system, word, budget)?;
        if cycle.entry_step != 0 {
            return Err(CycleError::NotPeriodicWord {
                entry_step: cycle.entry_step,
                period: cycle.period,
            });
        }
        Ok(Self::collect(system, word.clone(), cycle.period))
    }

    fn collect(system: &TagSystem, start: Word, period: u64) -> Self {
        let v = system.v();
        let mut words = Vec::with_capacity(period as usize);
        let mut current = start;
        for _ in 0..period {
            let mut next = current.clone();
            system.step_in_place(&mut next);
            words.push(current);
            current = next;
        }
        debug_assert_eq!(&current, &words[0]);
        let structures = words
            .iter()
            .map(|w| periodic_structure(w, v).expect("orbit words have length >= v"))
            .collect();
        Self { words, structures }
    }

    pub fn period(&self) -> u64 {
        self.words.len() as u64
    }

    pub fn words(&self) -> &[Word] {
        &self.words
    }

    pub fn structures(&self) -> &[PeriodicStructure] {
        &self.structures
    }

    /// Lexicographically smallest member; identifies the orbit regardless of
    /// where it was entered.
    pub fn canonical(&self) -> &Word {
        self.words.iter().min().expect("orbit is nonempty")
    }

    /// Rotates the orbit so that its canonical member comes first.
    pub fn canonicalize(mut self) -> Self {
        let start = self
            .words
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.cmp(b.1))
            .map(|(i, _)| i)
            .unwrap_or(0);
        self.words.rotate_left(start);
        self.structures.rotate_left(start);
        self
    }

    pub fn classify(&self) -> Result<PeriodType, CycleError> {
        classify_period_type(self)
    }
}

/// Assigns the period type from `p` and every member's structure length.
///
/// Types 1/2 need `p <= l_S` for every member, types 3/4 need `l_S < p` for
/// every member; the regular types 1/3 additionally need some member whose
/// `max(p, l_S)` is a multiple of `min(p, l_S)`.
pub fn classify_period_type(set: &PeriodicSet) -> Result<PeriodType, CycleError> {
    let p = set.period();
    let lengths = set.structures.iter().map(|s| s.len() as u64);
    let period_is_min = lengths.clone().all(|l| p <= l);
    let structure_is_min = lengths.clone().all(|l| l < p);
    let divides = lengths.clone().any(|l| {
        let (lo, hi) = if p <= l { (p, l) } else { (l, p) };
        hi % lo == 0
    });
    match (period_is_min, structure_is_min, divides) {
        (true, _, true) => Ok(PeriodType::Type1),
        (true, _, false) => Ok(PeriodType::Type2),
        (_, true, true) => Ok(PeriodType::Type3),
        (_, true, false) => Ok(PeriodType::Type4),
        _ => Err(CycleError::UnclassifiableOrbit),
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Concatenation {
    pub word: Word,
    pub period: u64,
    /// Positions of the chosen representatives within each orbit.
    pub left_index: usize,
    pub right_index: usize,
}

/// Searches both regular orbits for representatives whose lengths are
/// multiples of `v` and whose concatenation is itself a periodic word.
pub fn concat_periodic(
    system: &TagSystem,
    left: &PeriodicSet,
    right: &PeriodicSet,
    budget: RunBudget,
) -> Result<Concatenation, CycleError> {
    for set in [left, right] {
        let ty = classify_period_type(set)?;
        if !ty.is_regular() {
            return Err(CycleError::IrregularType(ty));
        }
    }
    fn aligned(set: &PeriodicSet, v: usize) -> Vec<(usize, &Word)> {
        set.words
            .iter()
            .enumerate()
            .filter(|(_, w)| w.len() % v == 0)
            .collect()
    }
    let v = system.v();
    let (lhs, rhs) = (aligned(left, v), aligned(right, v));
    for &(i, a) in &lhs {
        for &(j, b) in &rhs {
            let word = a.concat(b);
            if let Ok(cycle) = detect_cycle(system, &word, budget) {
                if cycle.entry_step == 0 {
                    return Ok(Concatenation {
                        word,
                        period: cycle.period,
                        left_index: i,
                        right_index: j,
                    });
                }
            }
        }
    }
    Err(CycleError::NotFound)
}

/// Smallest `q >= 1` with `step^q(word) == word`, simulating at most
/// `max_steps` steps.
pub fn return_time(system: &TagSystem, word: &Word, max_steps: u64) -> Option<u64> {
    let start = Tape::new(word);
    let mut tape = start.clone();
    for q in 1..=max_steps {
        if !tape.step(system) {
            return None;
        }
        if tape.same_word(&start) {
            return Some(q);
        }
    }
    None
}

/// Image of a structure under Post's appendant map `0 -> 00`, `1 -> 1101`.
fn post_image(structure: &[Symbol]) -> Word {
    let post = TagSystem::post();
    let mut w = Word::empty();
    for &s in structure {
        w.push_slice(post.appendant(s));
    }
    w
}

/// A word of Post's system whose minimal period is exactly `2n`, verified by
/// simulation.
///
/// Words whose structure `S` satisfies `image(S) = W` and `|W| = 3|S|` return
/// after `|S|` steps, and such words concatenate. `001101` (structure `01`)
/// has period 2; `110111010000` (structure `1100`) has period 4. For `n >= 2`
/// the word with structure `1100 (01)^(n-2)` is `110111010000 (001101)^(n-2)`.
/// Note that `(001101)^n` itself always has period 2.
pub fn shearer_period(n: usize) -> (Word, u64) {
    assert!(n >= 1, "shearer_period needs n >= 1");
    let structure: Vec<Symbol> = if n == 1 {
        vec![0, 1]
    } else {
        let mut s = vec![1, 1, 0, 0];
        for _ in 2..n {
            s.extend_from_slice(&[0, 1]);
        }
        s
    };
    let word = post_image(&structure);
    let expected = 2 * n as u64;
    let period = return_time(&TagSystem::post(), &word, expected)
        .expect("structure fixed point returns after |S| steps");
    assert_eq!(period, expected, "minimal period of the order-{n} word");
    (word, period)
}

/// One line of an orbit dump.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OrbitDump {
    pub words: Vec<String>,
    pub p: u64,
    pub structures: Vec<String>,
    #[serde(rename = "type")]
    pub period_type: String,
}

impl OrbitDump {
    pub fn new(system: &TagSystem, set: &PeriodicSet) -> Self {
        let mu = system.mu();
        Self {
            words: set.words.iter().map(|w| system.format_word(w)).collect(),
            p: set.period(),
            structures: set
                .structures
                .iter()
                .map(|s| crate::system::format_symbols(&s.symbols, mu))
                .collect(),
            period_type: match set.classify() {
                Ok(t) => t.as_str().to_owned(),
                Err(_) => "Unclassifiable".to_owned(),
            },
        }
    }
}

/// True if no word on a non-halting trajectory can ever repeat because every
/// step strictly lengthens the word.
pub fn strictly_growing(system: &TagSystem) -> bool {
    system.l_min() > system.v()
}

/// Distinct orbits (canonicalized) reached from `initials`. Trajectories of a
/// strictly growing system are skipped since they cannot close.
pub fn harvest_orbits<'a, I>(system: &TagSystem, initials: I, budget: RunBudget) -> Vec<PeriodicSet>
where
    I: IntoIterator<Item = &'a Word>,
{
    let mut seen = std::collections::HashSet::new();
    let mut out = Vec::new();
    if strictly_growing(system) {
        return out;
    }
    for w in initials {
        let report = run(system, w, budget, true);
        if report.outcome.kind() != OutcomeKind::Periodic {
            continue;
        }
        let set = PeriodicSet::of_trajectory(system, w, budget)
            .expect("run reported periodic")
            .canonicalize();
        if seen.insert(set.words[0].clone()) {
            out.push(set);
        }
    }
    out
}

/// Distinct orbits reached from every word of length `1..=max_len` over the
/// alphabet.
///
/// After `ceil(l / v)` steps a word of length `l` has been consumed, so its
/// future depends only on the symbols scanned so far. Each initial word is
/// stepped to that point and every distinct `(word, step)` state is run once
/// with the budget that remains.
pub fn exhaustive_orbits(
    system: &TagSystem,
    max_len: usize,
    budget: RunBudget,
) -> Vec<PeriodicSet> {
    let mut out = Vec::new();
    if strictly_growing(system) {
        return out;
    }
    let (mu, v) = (system.mu(), system.v());
    let mut states = std::collections::HashSet::new();
    let mut orbits = std::collections::HashSet::new();
    for len in 1..=max_len {
        let mut digits = vec![0 as Symbol; len];
        loop {
            let mut w = Word::from_symbols(digits.clone());
            let consumed = len.div_ceil(v) as u64;
            let mut live = true;
            for _ in 0..consumed.min(budget.max_steps) {
                if !system.step_in_place(&mut w) {
                    live = false;
                    break;
                }
            }
            if live && consumed < budget.max_steps && states.insert((w.clone(), consumed)) {
                let rest = RunBudget {
                    max_steps: budget.max_steps - consumed,
                    ..budget
                };
                if let RunOutcome::Periodic {
                    period, entry_step, ..
                } = run(system, &w, rest, true).outcome
                {
                    let set = PeriodicSet::at_entry(system, &w, Cycle { entry_step, period })
                        .canonicalize();
                    if orbits.insert(set.words[0].clone()) {
                        out.push(set);
                    }
                }
            }
            // Next word in base-mu counting order.
            let mut i = 0;
            while i < len && digits[i] as usize == mu - 1 {
                digits[i] = 0;
                i += 1;
            }
            if i == len {
                break;
            }
            digits[i] += 1;
        }
    }
    out
}
