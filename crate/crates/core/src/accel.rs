//! Exact multi-step execution on run-length encoded words.
//!
//! A word is a sequence of runs `P^c` with `P` a short pattern. When the first
//! run's pattern length divides `v`, every step whose scanned position falls
//! inside that run scans `P[0]`, so all of those steps collapse into one
//! append of `w^k` and one deletion of `k * v` symbols. Words such as the
//! unary Collatz encodings stay a handful of runs long while their length
//! grows into the billions.

use std::collections::VecDeque;

use crate::system::TagSystem;
use crate::word::{Symbol, Word};

#[derive(Clone, Debug, PartialEq, Eq)]
struct PatternRun {
    pattern: Vec<Symbol>,
    count: u64,
}

impl PatternRun {
    fn len(&self) -> u64 {
        self.pattern.len() as u64 * self.count
    }
}

fn nonzero(symbols: &[Symbol]) -> u64 {
    symbols.iter().filter(|&&s| s != 0).count() as u64
}

/// Shortest `r` with `pattern = r^m`.
fn primitive_root(pattern: &[Symbol]) -> (Vec<Symbol>, u64) {
    let n = pattern.len();
    for d in 1..=n {
        if n.is_multiple_of(d) && pattern.chunks(d).all(|c| c == &pattern[..d]) {
            return (pattern[..d].to_vec(), (n / d) as u64);
        }
    }
    (Vec::new(), 0)
}

#[derive(Clone, Debug, Default)]
pub struct RunLengthWord {
    runs: VecDeque<PatternRun>,
    len: u64,
    nonzero: u64,
}

impl RunLengthWord {
    pub fn from_word(word: &Word) -> Self {
        let mut out = Self::default();
        for &s in word.as_slice() {
            out.append(&[s], 1);
        }
        out
    }

    /// `symbol^count` as a single run.
    pub fn uniform(symbol: Symbol, count: u64) -> Self {
        let mut out = Self::default();
        out.append(&[symbol], count);
        out
    }

    pub fn len(&self) -> u64 {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Number of runs currently stored.
    pub fn run_count(&self) -> usize {
        self.runs.len()
    }

    /// True for a nonempty word made only of symbol 0.
    pub fn is_zero_power(&self) -> bool {
        self.len > 0 && self.nonzero == 0
    }

    pub fn to_word(&self) -> Word {
        let mut w = Word::with_capacity(self.len as usize);
        for run in &self.runs {
            for _ in 0..run.count {
                w.push_slice(&run.pattern);
            }
        }
        w
    }

    /// Appends `pattern^count`, where `pattern` must be primitive.
    fn append(&mut self, pattern: &[Symbol], count: u64) {
        if pattern.is_empty() || count == 0 {
            return;
        }
        self.len += pattern.len() as u64 * count;
        self.nonzero += nonzero(pattern) * count;
        if let Some(last) = self.runs.back_mut() {
            if last.pattern == pattern {
                last.count += count;
                return;
            }
        }
        self.runs.push_back(PatternRun {
            pattern: pattern.to_vec(),
            count,
        });
    }

    fn drop_front(&mut self, mut n: u64) {
        while n > 0 {
            let Some(first) = self.runs.front_mut() else {
                break;
            };
            let run_len = first.len();
            if run_len <= n {
                self.len -= run_len;
                self.nonzero -= nonzero(&first.pattern) * first.count;
                n -= run_len;
                self.runs.pop_front();
                continue;
            }
            let p = first.pattern.len() as u64;
            let whole = n / p;
            let rem = (n % p) as usize;
            first.count -= whole;
            self.len -= whole * p;
            self.nonzero -= whole * nonzero(&first.pattern);
            if rem > 0 {
                let pattern = first.pattern.clone();
                first.count -= 1;
                if first.count == 0 {
                    self.runs.pop_front();
                }
                let tail = pattern[rem..].to_vec();
                self.len -= rem as u64;
                self.nonzero -= nonzero(&pattern[..rem]);
                self.runs.push_front(PatternRun {
                    pattern: tail,
                    count: 1,
                });
            }
            n = 0;
        }
    }

    /// Rewrites `y (xy)^c` at the front as `(yx)^c y` so that the scan
    /// alignment of a split pattern is restored.
    fn realign_front(&mut self) {
        if self.runs.len() < 2 || self.runs[0].count != 1 {
            return;
        }
        let (y, next) = (&self.runs[0].pattern, &self.runs[1].pattern);
        if y.len() >= next.len() || !next.ends_with(y) {
            return;
        }
        let x = &next[..next.len() - y.len()];
        let mut rotated = y.clone();
        rotated.extend_from_slice(x);
        let count = self.runs[1].count;
        let y = y.clone();
        self.runs[0] = PatternRun {
            pattern: rotated,
            count,
        };
        self.runs[1] = PatternRun {
            pattern: y,
            count: 1,
        };
    }
}

/// Executes a tag system on [`RunLengthWord`]s.
pub struct MacroStepper<'a> {
    system: &'a TagSystem,
    roots: Vec<(Vec<Symbol>, u64)>,
}

impl<'a> MacroStepper<'a> {
    pub fn new(system: &'a TagSystem) -> Self {
        let roots = system
            .appendants()
            .iter()
            .map(|w| primitive_root(w))
            .collect();
        Self { system, roots }
    }

    /// Performs between 1 and `max_steps` steps and returns how many were
    /// taken; 0 means the word is terminal (or `max_steps == 0`).
    ///
    /// A step boundary is never skipped at which the word is a pure power of
    /// symbol 0, so callers may watch [`RunLengthWord::is_zero_power`]
    /// between calls.
    pub fn macro_step(&self, word: &mut RunLengthWord, max_steps: u64) -> u64 {
        let v = self.system.v() as u64;
        if word.len < v || max_steps == 0 {
            return 0;
        }
        word.realign_front();
        let first = word.runs.front().expect("nonempty word has a run");
        let scanned = first.pattern[0];
        let appendant = self.system.appendant(scanned);
        let (root, mult) = &self.roots[scanned as usize];

        let aligned = v.is_multiple_of(first.pattern.len() as u64);
        let mut k = if aligned { first.len().div_ceil(v) } else { 1 };
        // Inside a batch that scans 0 and appends only zeros, the word could
        // turn into a pure zero power mid-batch.
        if scanned == 0 && nonzero(appendant) == 0 {
            k = 1;
        }
        let w = appendant.len() as u64;
        if w < v {
            // The word shrinks by v - w per step and must stay >= v long.
            k = k.min((word.len - v) / (v - w) + 1);
        }
        k = k.min(max_steps);

        word.append(root, k * mult);
        word.drop_front(k * v);
        k
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn primitive_roots() {
        assert_eq!(primitive_root(&[0, 0, 0]), (vec![0], 3));
        assert_eq!(primitive_root(&[1, 2]), (vec![1, 2], 1));
        assert_eq!(primitive_root(&[1, 0, 1, 0]), (vec![1, 0], 2));
        assert_eq!(primitive_root(&[]), (vec![], 0));
    }

    #[test]
    fn collatz_three_to_five() {
        let t = TagSystem::collatz();
        let stepper = MacroStepper::new(&t);
        let mut w = RunLengthWord::uniform(0, 3);
        let mut steps = 0;
        while !(steps > 0 && w.is_zero_power()) {
            steps += stepper.macro_step(&mut w, u64::MAX);
        }
        assert_eq!(steps, 4);
        assert_eq!(w.to_word(), Word::from_symbols(vec![0; 5]));
        assert!(w.run_count() <= 1);
    }

    #[test]
    fn large_unary_word_stays_compact() {
        let t = TagSystem::collatz();
        let stepper = MacroStepper::new(&t);
        let mut w = RunLengthWord::uniform(0, 1_000_001);
        let mut steps = 0;
        let mut batches = 0;
        while !(steps > 0 && w.is_zero_power()) {
            steps += stepper.macro_step(&mut w, u64::MAX);
            batches += 1;
        }
        assert_eq!(w.len(), 1_500_002);
        assert!(batches < 10, "{batches} batches");
    }

    fn system_strategy() -> impl Strategy<Value = TagSystem> {
        (1usize..4, 1usize..5).prop_flat_map(|(mu, v)| {
            proptest::collection::vec(proptest::collection::vec(0..mu as u8, 0..(v + 3)), mu)
                .prop_map(move |apps| TagSystem::new(v, apps).unwrap())
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(400))]
        #[test]
        fn matches_plain_interpreter(
            system in system_strategy(),
            seed_word in proptest::collection::vec(0u8..4, 0..40),
            repeat in 1usize..6,
        ) {
            let mu = system.mu() as u8;
            let base: Vec<u8> = seed_word.iter().map(|s| s % mu).collect();
            let initial = Word::repeat(&base, repeat);
            let stepper = MacroStepper::new(&system);
            let mut fast = RunLengthWord::from_word(&initial);
            let mut plain = initial.clone();
            let mut plain_steps = 0u64;
            let mut zero_power_steps = Vec::new();
            if !plain.is_empty() && plain.as_slice().iter().all(|&s| s == 0) {
                zero_power_steps.push(0);
            }
            let mut fast_steps = 0u64;
            let mut fast_zero = Vec::new();
            if fast.is_zero_power() {
                fast_zero.push(0);
            }
            for _ in 0..200 {
                let k = stepper.macro_step(&mut fast, 64);
                if k == 0 {
                    prop_assert!(!system.step_in_place(&mut plain.clone()));
                    break;
                }
                for _ in 0..k {
                    prop_assert!(system.step_in_place(&mut plain));
                    plain_steps += 1;
                    if !plain.is_empty() && plain.as_slice().iter().all(|&s| s == 0) {
                        zero_power_steps.push(plain_steps);
                    }
                }
                fast_steps += k;
                if fast.is_zero_power() {
                    fast_zero.push(fast_steps);
                }
                prop_assert_eq!(fast.len(), plain.len() as u64);
                prop_assert_eq!(fast.to_word(), plain.clone());
                if plain.len() > 5000 {
                    break;
                }
            }
            prop_assert_eq!(fast_zero, zero_power_steps);
        }
    }
}
