//! The five computer experiments: outcome census with survival curve,
//! period-type census, sensitivity to initial words, randomness battery and
//! entropy of the produced symbol streams.

pub mod entropy;
pub mod stats;

use std::collections::{BTreeMap, HashMap};
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cycle::{Cycle, OrbitDump, PeriodType, PeriodicSet};
use crate::generator::{indexed_rng, random_word};
use crate::run::{run, scanned_symbols, OutcomeKind, RunBudget, RunOutcome};
use crate::scalar::Real;
use crate::system::{ParseError, TagSystem};
use crate::word::{Symbol, Word};

pub use entropy::{entropy_rate, EntropyReport};
pub use stats::{battery, StreamError, TestKind, TestResult};

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error(transparent)]
    Stream(#[from] StreamError),
    #[error("base word must be nonempty")]
    EmptyWord,
    #[error("record {word_index}: {source}")]
    BadRecord { word_index: u64, source: ParseError },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

/// One census row: the outcome of a single initial word.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExperimentRecord {
    pub system_id: String,
    pub word_index: u64,
    pub initial_word: String,
    pub outcome: OutcomeKind,
    pub steps: u64,
    pub period: Option<u64>,
    pub entry_step: Option<u64>,
    pub resolution_step: Option<u64>,
    pub max_length: usize,
}

impl ExperimentRecord {
    fn new(
        system_id: &str,
        word_index: u64,
        initial_word: String,
        outcome: &RunOutcome,
        max_length: usize,
    ) -> Self {
        Self {
            system_id: system_id.to_owned(),
            word_index,
            initial_word,
            outcome: outcome.kind(),
            steps: outcome.steps(),
            period: outcome.period(),
            entry_step: outcome.entry_step(),
            resolution_step: outcome.resolution_step(),
            max_length,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Exp1Config {
    pub n_words: u64,
    pub word_length: usize,
    pub budget: RunBudget,
    pub seed: u64,
}

impl Default for Exp1Config {
    fn default() -> Self {
        Self {
            n_words: 1998,
            word_length: 300,
            budget: RunBudget::default(),
            seed: 0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SurvivalPoint {
    pub step_threshold: u64,
    pub unresolved_count: u64,
}

pub type SurvivalCurve = Vec<SurvivalPoint>;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Census {
    pub records: Vec<ExperimentRecord>,
    pub histogram: BTreeMap<OutcomeKind, u64>,
    pub survival: SurvivalCurve,
}

/// The `index`-th initial word of a census.
pub fn census_word(mu: usize, length: usize, seed: u64, index: u64) -> Word {
    random_word(&mut indexed_rng(seed, index), mu, length)
}

/// Runs `n_words` random initial words to an outcome each.
pub fn exp1_census(system: &TagSystem, system_id: &str, config: &Exp1Config) -> Census {
    let records: Vec<ExperimentRecord> = (0..config.n_words)
        .into_par_iter()
        .map(|index| {
            let word = census_word(system.mu(), config.word_length, config.seed, index);
            let report = run(system, &word, config.budget, true);
            ExperimentRecord::new(
                system_id,
                index,
                system.format_word(&word),
                &report.outcome,
                report.max_length,
            )
        })
        .collect();
    let histogram = histogram(&records);
    let survival = survival_curve(&records, config.budget.max_steps);
    Census {
        records,
        histogram,
        survival,
    }
}

pub fn histogram(records: &[ExperimentRecord]) -> BTreeMap<OutcomeKind, u64> {
    let mut h: BTreeMap<OutcomeKind, u64> = OutcomeKind::ALL.iter().map(|&k| (k, 0)).collect();
    for r in records {
        *h.entry(r.outcome).or_default() += 1;
    }
    h
}

/// `count` logarithmically spaced integer thresholds from 1 to `max`,
/// deduplicated.
pub fn log_thresholds(max: u64, count: usize) -> Vec<u64> {
    let max = max.max(1);
    let top = (max as f64).ln();
    let mut out: Vec<u64> = (0..count)
        .map(|i| {
            let frac = if count > 1 {
                i as f64 / (count - 1) as f64
            } else {
                1.0
            };
            ((top * frac).exp().round() as u64).clamp(1, max)
        })
        .collect();
    out.push(max);
    out.sort_unstable();
    out.dedup();
    out
}

/// Words not yet halted, periodic or over the length bound after each
/// threshold; a periodic word counts as resolved from its first recurrence.
pub fn survival_curve(records: &[ExperimentRecord], max_steps: u64) -> SurvivalCurve {
    let mut resolved: Vec<u64> = records.iter().filter_map(|r| r.resolution_step).collect();
    resolved.sort_unstable();
    let total = records.len() as u64;
    std::iter::once(0)
        .chain(log_thresholds(max_steps, 64))
        .map(|t| {
            let done = resolved.partition_point(|&s| s <= t) as u64;
            SurvivalPoint {
                step_threshold: t,
                unresolved_count: total - done,
            }
        })
        .collect()
}

/// Fractions of all records resolved within `[0, max/10)` and within
/// `[9 max/10, max]`.
pub fn resolution_deciles(records: &[ExperimentRecord], max_steps: u64) -> (f64, f64) {
    let first_end = max_steps / 10;
    let last_start = max_steps - max_steps / 10;
    let n = records.len().max(1) as f64;
    let first = records
        .iter()
        .filter(|r| r.resolution_step.is_some_and(|s| s < first_end))
        .count();
    let last = records
        .iter()
        .filter(|r| {
            r.resolution_step
                .is_some_and(|s| s >= last_start && s <= max_steps)
        })
        .count();
    (first as f64 / n, last as f64 / n)
}

/// Orbit line of `periods.jsonl`: a distinct orbit and how many census
/// records reached it.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OrbitLine {
    pub system_id: String,
    pub first_word_index: u64,
    pub records: u64,
    #[serde(flatten)]
    pub orbit: OrbitDump,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PeriodCensus {
    /// Keyed by `Type1`..`Type4` and `Unclassifiable`; counts periodic
    /// records, not distinct orbits.
    pub histogram: BTreeMap<String, u64>,
    pub orbits: Vec<OrbitLine>,
}

pub const UNCLASSIFIABLE: &str = "Unclassifiable";

/// Rebuilds and classifies the orbit of every periodic record.
pub fn exp2_period_census(
    system: &TagSystem,
    records: &[ExperimentRecord],
) -> Result<PeriodCensus, ExperimentError> {
    let periodic: Vec<&ExperimentRecord> = records
        .iter()
        .filter(|r| r.outcome == OutcomeKind::Periodic)
        .collect();
    let sets: Vec<(u64, &str, PeriodicSet)> = periodic
        .par_iter()
        .map(|r| {
            let word = system.parse_word(&r.initial_word).map_err(|source| {
                ExperimentError::BadRecord {
                    word_index: r.word_index,
                    source,
                }
            })?;
            let cycle = Cycle {
                entry_step: r.entry_step.unwrap_or(0),
                period: r.period.unwrap_or(1),
            };
            Ok((
                r.word_index,
                r.system_id.as_str(),
                PeriodicSet::at_entry(system, &word, cycle).canonicalize(),
            ))
        })
        .collect::<Result<_, ExperimentError>>()?;

    let mut histogram: BTreeMap<String, u64> = PeriodType::ALL
        .iter()
        .map(|t| t.as_str().to_owned())
        .chain(std::iter::once(UNCLASSIFIABLE.to_owned()))
        .map(|k| (k, 0))
        .collect();
    let mut orbits: Vec<OrbitLine> = Vec::new();
    let mut seen: HashMap<Word, usize> = HashMap::new();
    for (index, system_id, set) in sets {
        let key = match set.classify() {
            Ok(t) => t.as_str().to_owned(),
            Err(_) => UNCLASSIFIABLE.to_owned(),
        };
        *histogram.entry(key).or_default() += 1;
        match seen.get(&set.words()[0]) {
            Some(&i) => orbits[i].records += 1,
            None => {
                seen.insert(set.words()[0].clone(), orbits.len());
                orbits.push(OrbitLine {
                    system_id: system_id.to_owned(),
                    first_word_index: index,
                    records: 1,
                    orbit: OrbitDump::new(system, &set),
                });
            }
        }
    }
    Ok(PeriodCensus { histogram, orbits })
}

/// Distinct orbits of type `wanted` reached from `initials`, at most `limit`.
pub fn find_orbits_of_type<'a, I>(
    system: &TagSystem,
    initials: I,
    budget: RunBudget,
    wanted: PeriodType,
    limit: usize,
) -> Vec<PeriodicSet>
where
    I: IntoIterator<Item = &'a Word>,
{
    let mut seen = std::collections::HashSet::new();
    let mut found = Vec::new();
    for w in initials {
        if found.len() >= limit {
            break;
        }
        if let RunOutcome::Periodic {
            period, entry_step, ..
        } = run(system, w, budget, true).outcome
        {
            let set = PeriodicSet::at_entry(system, w, Cycle { entry_step, period }).canonicalize();
            if set.classify() == Ok(wanted) && seen.insert(set.words()[0].clone()) {
                found.push(set);
            }
        }
    }
    found
}

/// Result of replacing one symbol of the base word.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Substitution {
    pub position: usize,
    pub symbol: Symbol,
    pub base_outcome: OutcomeKind,
    pub variant_outcome: OutcomeKind,
    pub class_agrees: bool,
    pub delta_steps: u64,
    pub first_length_divergence: Option<u64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Sensitivity<R> {
    /// Fraction of substitutions that change the outcome class.
    pub score: R,
    pub rows: Vec<Substitution>,
}

/// First step index at which the two trajectories have different word
/// lengths, if any within the budget.
pub fn first_length_divergence(
    system: &TagSystem,
    a: &Word,
    b: &Word,
    budget: RunBudget,
) -> Option<u64> {
    let v = system.v();
    let (mut a, mut b) = (a.clone(), b.clone());
    for step in 0..=budget.max_steps {
        if a.len() != b.len() {
            return Some(step);
        }
        if a.len() < v || a.len() > budget.max_length {
            return None;
        }
        system.step_in_place(&mut a);
        system.step_in_place(&mut b);
    }
    None
}

/// Every single-position substitution of `base`, each run to an outcome and
/// compared with the base run.
pub fn exp3_sensitivity<R: Real>(
    system: &TagSystem,
    base: &Word,
    budget: RunBudget,
) -> Result<Sensitivity<R>, ExperimentError> {
    if base.is_empty() {
        return Err(ExperimentError::EmptyWord);
    }
    let base_outcome = run(system, base, budget, true).outcome;
    let mu = system.mu() as Symbol;
    let variants: Vec<(usize, Symbol)> = (0..base.len())
        .flat_map(|i| {
            (0..mu)
                .filter(move |&s| s != base.as_slice()[i])
                .map(move |s| (i, s))
        })
        .collect();
    let rows: Vec<Substitution> = variants
        .into_par_iter()
        .map(|(position, symbol)| {
            let mut symbols = base.to_vec();
            symbols[position] = symbol;
            let variant = Word::from_symbols(symbols);
            let outcome = run(system, &variant, budget, true).outcome;
            Substitution {
                position,
                symbol,
                base_outcome: base_outcome.kind(),
                variant_outcome: outcome.kind(),
                class_agrees: outcome.kind() == base_outcome.kind(),
                delta_steps: outcome.steps().abs_diff(base_outcome.steps()),
                first_length_divergence: first_length_divergence(system, base, &variant, budget),
            }
        })
        .collect();
    let changed = rows.iter().filter(|r| !r.class_agrees).count();
    let score = if rows.is_empty() {
        0.0
    } else {
        changed as f64 / rows.len() as f64
    };
    Ok(Sensitivity {
        score: R::of(score),
        rows,
    })
}

/// What symbol sequence a trajectory is turned into.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StreamMode {
    /// The symbol scanned at each step.
    #[default]
    Scanned,
    /// The words `A_0 A_1 ...` concatenated.
    WholeWord,
}

/// Up to `length` symbols of the trajectory from `word`; shorter if the run
/// halts, exceeds the length bound or uses up the step budget.
pub fn symbol_stream(
    system: &TagSystem,
    word: &Word,
    budget: RunBudget,
    length: usize,
    mode: StreamMode,
) -> Vec<Symbol> {
    match mode {
        StreamMode::Scanned => {
            let count = length.min(usize::try_from(budget.max_steps).unwrap_or(usize::MAX));
            scanned_symbols(system, word, count, budget.max_length)
        }
        StreamMode::WholeWord => {
            let mut out = Vec::with_capacity(length);
            let mut w = word.clone();
            let mut steps = 0u64;
            while out.len() < length && w.len() <= budget.max_length {
                let take = (length - out.len()).min(w.len());
                out.extend_from_slice(&w.as_slice()[..take]);
                if steps >= budget.max_steps || !system.step_in_place(&mut w) {
                    break;
                }
                steps += 1;
            }
            out
        }
    }
}

pub fn exp4_randomness<R: Real>(
    system: &TagSystem,
    word: &Word,
    budget: RunBudget,
    length: usize,
    mode: StreamMode,
) -> Result<Vec<TestResult<R>>, ExperimentError> {
    let stream = symbol_stream(system, word, budget, length, mode);
    Ok(battery(&stream)?)
}

pub fn exp5_entropy<R: Real>(
    system: &TagSystem,
    word: &Word,
    budget: RunBudget,
    length: usize,
    order: usize,
    mode: StreamMode,
) -> Result<EntropyReport<R>, ExperimentError> {
    let stream = symbol_stream(system, word, budget, length, mode);
    Ok(entropy_rate(&stream, system.mu(), order)?)
}

fn create(path: &Path) -> Result<BufWriter<File>, ExperimentError> {
    Ok(BufWriter::new(File::create(path)?))
}

pub fn write_census_csv(path: &Path, records: &[ExperimentRecord]) -> Result<(), ExperimentError> {
    let mut w = csv::Writer::from_writer(create(path)?);
    for r in records {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_census_csv(path: &Path) -> Result<Vec<ExperimentRecord>, ExperimentError> {
    let mut r = csv::Reader::from_path(path)?;
    Ok(r.deserialize().collect::<Result<_, _>>()?)
}

pub fn write_survival_csv(path: &Path, curve: &[SurvivalPoint]) -> Result<(), ExperimentError> {
    let mut w = csv::Writer::from_writer(create(path)?);
    for p in curve {
        w.serialize(p)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_periods_jsonl(path: &Path, orbits: &[OrbitLine]) -> Result<(), ExperimentError> {
    let mut w = create(path)?;
    for o in orbits {
        serde_json::to_writer(&mut w, o)?;
        w.write_all(b"\n")?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_sensitivity_csv(path: &Path, rows: &[Substitution]) -> Result<(), ExperimentError> {
    let mut w = csv::Writer::from_writer(create(path)?);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_randomness_csv<R: Real>(
    path: &Path,
    results: &[TestResult<R>],
) -> Result<(), ExperimentError> {
    let mut w = csv::Writer::from_writer(create(path)?);
    w.write_record(["test", "statistic", "p_value", "alpha", "pass"])?;
    for r in results {
        w.write_record([
            r.test.as_str().to_owned(),
            r.statistic.to_string(),
            r.p_value.to_string(),
            r.alpha.to_string(),
            r.pass.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// One row per context: its count, conditional entropy and next-symbol
/// probabilities (`;`-separated), with the overall rate repeated per row.
pub fn write_entropy_csv<R: Real>(
    path: &Path,
    report: &EntropyReport<R>,
) -> Result<(), ExperimentError> {
    let mut w = csv::Writer::from_writer(create(path)?);
    w.write_record([
        "order",
        "context",
        "count",
        "conditional_entropy",
        "probabilities",
        "entropy_rate",
    ])?;
    for row in &report.table {
        let probs: Vec<String> = row.probabilities.iter().map(|p| p.to_string()).collect();
        w.write_record([
            report.order.to_string(),
            crate::system::format_symbols(&row.context, report.mu),
            row.count.to_string(),
            row.conditional_entropy.to_string(),
            probs.join(";"),
            report.entropy_rate.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_budget() -> RunBudget {
        RunBudget::new(100_000, 15_000).unwrap()
    }

    #[test]
    fn thresholds_are_log_spaced() {
        let t = log_thresholds(10_000_000, 64);
        assert_eq!(t.first(), Some(&1));
        assert_eq!(t.last(), Some(&10_000_000));
        assert!(t.windows(2).all(|w| w[0] < w[1]));
        assert!(t.len() <= 64 && t.len() > 50);
        assert_eq!(log_thresholds(1, 64), vec![1]);
    }

    #[test]
    fn shrinking_system_census_halts_everywhere() {
        let t = TagSystem::new(3, vec![vec![0], vec![1, 0]]).unwrap();
        let c = exp1_census(
            &t,
            "shrink",
            &Exp1Config {
                n_words: 50,
                word_length: 30,
                budget: small_budget(),
                seed: 3,
            },
        );
        assert_eq!(c.histogram[&OutcomeKind::Halted], 50);
        assert_eq!(c.survival[0].unresolved_count, 50);
        assert_eq!(c.survival.last().unwrap().unresolved_count, 0);
    }

    #[test]
    fn census_invariants() {
        let t = TagSystem::post();
        let cfg = Exp1Config {
            n_words: 60,
            word_length: 40,
            budget: small_budget(),
            seed: 11,
        };
        let c = exp1_census(&t, "post", &cfg);
        assert_eq!(c.histogram.values().sum::<u64>(), 60);
        assert_eq!(
            c.survival[0],
            SurvivalPoint {
                step_threshold: 0,
                unresolved_count: 60
            }
        );
        assert!(c
            .survival
            .windows(2)
            .all(|w| w[0].unresolved_count >= w[1].unresolved_count));
        assert_eq!(c, exp1_census(&t, "post", &cfg));
        for r in &c.records {
            assert_eq!(
                t.parse_word(&r.initial_word).unwrap(),
                census_word(2, 40, 11, r.word_index)
            );
        }
    }

    #[test]
    fn period_census_of_known_orbit() {
        let t = TagSystem::post();
        let word = t.parse_word("001101").unwrap();
        let outcome = run(&t, &word, small_budget(), true);
        let rec = ExperimentRecord::new(
            "post",
            0,
            "001101".into(),
            &outcome.outcome,
            outcome.max_length,
        );
        let pc = exp2_period_census(&t, &[rec.clone(), rec]).unwrap();
        assert_eq!(pc.histogram["Type1"], 2);
        assert_eq!(pc.orbits.len(), 1);
        assert_eq!(pc.orbits[0].records, 2);
        assert_eq!(pc.orbits[0].orbit.words, vec!["001101", "10100"]);
        let empty = exp2_period_census(&t, &[]).unwrap();
        assert!(empty.histogram.values().all(|&c| c == 0));
        assert!(empty.orbits.is_empty());
    }

    #[test]
    fn identical_appendants_are_insensitive() {
        let t = TagSystem::new(3, vec![vec![0, 1, 1, 0], vec![0, 1, 1, 0]]).unwrap();
        let base = census_word(2, 20, 5, 0);
        let s = exp3_sensitivity::<f64>(&t, &base, small_budget()).unwrap();
        assert_eq!(s.score, 0.0);
        assert_eq!(s.rows.len(), 20);
        assert!(s.rows.iter().all(|r| r.first_length_divergence.is_none()));
    }

    #[test]
    fn unscanned_positions_do_not_change_outcome() {
        let t = TagSystem::post();
        let v = t.v();
        let (base, steps) = (0..)
            .map(|i| census_word(2, 12, 9, i))
            .find_map(|w| match run(&t, &w, small_budget(), true).outcome {
                RunOutcome::Halted { steps } => Some((w, steps)),
                _ => None,
            })
            .unwrap();
        let scanned: Vec<usize> = (0..steps as usize)
            .map(|i| i * v)
            .filter(|&p| p < base.len())
            .collect();
        let s = exp3_sensitivity::<f64>(&t, &base, small_budget()).unwrap();
        assert_eq!(s.rows.len(), base.len());
        for row in s.rows.iter().filter(|r| !scanned.contains(&r.position)) {
            assert!(row.class_agrees, "position {}", row.position);
            assert_eq!(row.delta_steps, 0);
        }
        assert!(matches!(
            exp3_sensitivity::<f64>(&t, &Word::empty(), small_budget()),
            Err(ExperimentError::EmptyWord)
        ));
    }

    #[test]
    fn whole_word_stream() {
        let t = TagSystem::post();
        let w = t.parse_word("001101").unwrap();
        let s = symbol_stream(&t, &w, small_budget(), 14, StreamMode::WholeWord);
        assert_eq!(t.format_word(&Word::from_symbols(s)), "00110110100001");
        let s = symbol_stream(&t, &w, small_budget(), 6, StreamMode::Scanned);
        assert_eq!(s, vec![0, 1, 0, 1, 0, 1]);
    }
}
