//! Random tag systems and the candidate screening pipeline.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::run::{run, OutcomeKind, RunBudget};
use crate::system::TagSystem;
use crate::word::{Symbol, Word};

/// The class TS(mu, v) with `v` in `v_min..=v_max` and appendant lengths
/// bounded by `v +- excess_max`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassSpec {
    pub mu: usize,
    pub v_min: usize,
    pub v_max: usize,
    pub excess_max: usize,
}

impl Default for ClassSpec {
    fn default() -> Self {
        Self {
            mu: 2,
            v_min: 3,
            v_max: 15,
            excess_max: 4,
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SpecError {
    #[error("v range {v_min}..={v_max} is empty or starts below 1")]
    BadVRange { v_min: usize, v_max: usize },
    #[error("excess_max must be at least 1")]
    ZeroExcess,
    #[error("alphabet size {0} cannot satisfy 1 <= l_max - v and 1 <= v - l_min")]
    Unsatisfiable(usize),
    #[error("alphabet size {0} is outside 1..=256")]
    BadAlphabet(usize),
}

impl ClassSpec {
    pub fn validate(&self) -> Result<(), SpecError> {
        if self.v_min == 0 || self.v_min > self.v_max {
            return Err(SpecError::BadVRange {
                v_min: self.v_min,
                v_max: self.v_max,
            });
        }
        if self.excess_max == 0 {
            return Err(SpecError::ZeroExcess);
        }
        if self.mu == 0 || self.mu > crate::word::MAX_ALPHABET {
            return Err(SpecError::BadAlphabet(self.mu));
        }
        if self.mu < 2 {
            return Err(SpecError::Unsatisfiable(self.mu));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum DecidableReason {
    V1,
    LminGeV,
    LmaxLeV,
    Mu1,
    TS22,
}

/// First known criterion making halting and reachability decidable for `t`.
pub fn decidability_screen(t: &TagSystem) -> Option<DecidableReason> {
    let v = t.v();
    if v == 1 {
        Some(DecidableReason::V1)
    } else if t.l_min() >= v {
        Some(DecidableReason::LminGeV)
    } else if t.l_max() <= v {
        Some(DecidableReason::LmaxLeV)
    } else if t.mu() == 1 {
        Some(DecidableReason::Mu1)
    } else if t.mu() == 2 && v == 2 {
        Some(DecidableReason::TS22)
    } else {
        None
    }
}

/// `sum_i #a_i * (|w_i| - v)` where `#a_i` counts occurrences of `a_i` across
/// all appendants.
pub fn balance(t: &TagSystem) -> i64 {
    let mut occurrences = vec![0i64; t.mu()];
    for w in t.appendants() {
        for &s in w {
            occurrences[s as usize] += 1;
        }
    }
    let v = t.v() as i64;
    occurrences
        .iter()
        .zip(t.appendants())
        .map(|(&n, w)| n * (w.len() as i64 - v))
        .sum()
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BalanceMode {
    #[default]
    Eq0,
    Le0,
}

impl BalanceMode {
    pub fn accepts(self, balance: i64) -> bool {
        match self {
            BalanceMode::Eq0 => balance == 0,
            BalanceMode::Le0 => balance <= 0,
        }
    }
}

/// Whether a candidate must survive every pilot word or at least one.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SurviveMode {
    #[default]
    All,
    Any,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PilotConfig {
    pub words: usize,
    pub word_length: usize,
    pub budget: RunBudget,
}

impl Default for PilotConfig {
    fn default() -> Self {
        Self {
            words: 20,
            word_length: 300,
            budget: RunBudget::default(),
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScreenConfig {
    pub balance: BalanceMode,
    pub survive: SurviveMode,
    pub pilot: PilotConfig,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ScreenOutcome {
    SelectedCandidate,
    RejectedDecidable,
    RejectedBalance,
    RejectedByPilotRuns,
    RejectedGrowth,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScreenReport {
    pub decidable_reason: Option<DecidableReason>,
    pub balance: i64,
    pub screen_outcome: ScreenOutcome,
    /// Outcomes of the pilot words actually run, in order.
    pub pilot_outcomes: Vec<OutcomeKind>,
}

pub fn random_word<R: Rng>(rng: &mut R, mu: usize, len: usize) -> Word {
    Word::from_symbols(
        (0..len)
            .map(|_| rng.random_range(0..mu) as Symbol)
            .collect(),
    )
}

/// Samples one system of the class, rejecting length profiles that violate
/// `1 <= l_max - v <= e` or `1 <= v - l_min <= e`.
pub fn sample_system<R: Rng>(spec: &ClassSpec, rng: &mut R) -> TagSystem {
    let v = rng.random_range(spec.v_min..=spec.v_max);
    let e = spec.excess_max;
    let lo = v.saturating_sub(e);
    let hi = v + e;
    let lengths = loop {
        let lengths: Vec<usize> = (0..spec.mu).map(|_| rng.random_range(lo..=hi)).collect();
        let l_max = *lengths.iter().max().expect("mu >= 1");
        let l_min = *lengths.iter().min().expect("mu >= 1");
        if l_max > v && l_min < v {
            break lengths;
        }
    };
    let appendants = lengths
        .into_iter()
        .map(|l| {
            (0..l)
                .map(|_| rng.random_range(0..spec.mu) as Symbol)
                .collect()
        })
        .collect();
    TagSystem::new(v, appendants).expect("sampled symbols lie in the alphabet")
}

/// Decidability screen, balance filter, then pilot runs on random words
/// drawn from `rng`.
pub fn screen_system<R: Rng>(t: &TagSystem, config: &ScreenConfig, rng: &mut R) -> ScreenReport {
    let mut report = ScreenReport {
        decidable_reason: decidability_screen(t),
        balance: balance(t),
        screen_outcome: ScreenOutcome::RejectedDecidable,
        pilot_outcomes: Vec::new(),
    };
    if report.decidable_reason.is_some() {
        return report;
    }
    if !config.balance.accepts(report.balance) {
        report.screen_outcome = ScreenOutcome::RejectedBalance;
        return report;
    }
    let pilot = &config.pilot;
    let mut survived = 0;
    let mut grew = false;
    for _ in 0..pilot.words {
        let w = random_word(rng, t.mu(), pilot.word_length);
        let kind = run(t, &w, pilot.budget, true).outcome.kind();
        report.pilot_outcomes.push(kind);
        match kind {
            OutcomeKind::BudgetExhausted => survived += 1,
            OutcomeKind::LengthBoundExceeded => grew = true,
            _ => {}
        }
        let done = match config.survive {
            SurviveMode::All => kind != OutcomeKind::BudgetExhausted,
            SurviveMode::Any => survived > 0,
        };
        if done {
            break;
        }
    }
    let selected = match config.survive {
        SurviveMode::All => survived == pilot.words,
        SurviveMode::Any => survived > 0,
    };
    report.screen_outcome = if selected {
        ScreenOutcome::SelectedCandidate
    } else if grew {
        ScreenOutcome::RejectedGrowth
    } else {
        ScreenOutcome::RejectedByPilotRuns
    };
    report
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Candidate {
    pub index: u64,
    pub system: TagSystem,
    pub report: ScreenReport,
}

impl Candidate {
    pub fn is_selected(&self) -> bool {
        self.report.screen_outcome == ScreenOutcome::SelectedCandidate
    }
}

/// Generator for item `index`: stream `index` of the seeded ChaCha8
/// generator, so results do not depend on scheduling.
pub fn indexed_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Samples and screens `count` systems; every sampled system is returned
/// with its report, in index order.
pub fn generate_candidates(
    spec: &ClassSpec,
    seed: u64,
    count: u64,
    config: &ScreenConfig,
) -> Result<Vec<Candidate>, SpecError> {
    spec.validate()?;
    Ok((0..count)
        .into_par_iter()
        .map(|index| {
            let mut rng = indexed_rng(seed, index);
            let system = sample_system(spec, &mut rng);
            let report = screen_system(&system, config, &mut rng);
            Candidate {
                index,
                system,
                report,
            }
        })
        .collect())
}
