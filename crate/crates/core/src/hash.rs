//! 64-bit polynomial rolling hash over words, updatable on both ends.
//!
//! For a word `c_0 c_1 .. c_{L-1}` the value is `sum (c_k + 1) * B^(L-1-k)`
//! modulo 2^64. `B` is odd, hence invertible modulo 2^64, which lets the
//! front symbol be removed in O(1). Equal hashes never prove equality; every
//! hit must be confirmed by comparing the words.

use serde::{Deserialize, Serialize};

use crate::word::{Symbol, Word};

const BASE: u64 = 0x9E37_79B9_7F4A_7C15;
const BASE_INV: u64 = inverse_mod_2_64(BASE);

const fn inverse_mod_2_64(a: u64) -> u64 {
    // Newton iteration; each round doubles the number of correct low bits.
    let mut x = a;
    let mut i = 0;
    while i < 6 {
        x = x.wrapping_mul(2u64.wrapping_sub(a.wrapping_mul(x)));
        i += 1;
    }
    x
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RollingHash {
    value: u64,
    /// `B^L` for the current length `L`.
    pow: u64,
}

impl Default for RollingHash {
    fn default() -> Self {
        Self { value: 0, pow: 1 }
    }
}

impl RollingHash {
    pub fn of(symbols: &[Symbol]) -> Self {
        let mut h = Self::default();
        h.push_slice(symbols);
        h
    }

    pub fn of_word(word: &Word) -> Self {
        Self::of(word.as_slice())
    }

    #[inline]
    pub fn value(&self) -> u64 {
        self.value
    }

    #[inline]
    pub fn push(&mut self, symbol: Symbol) {
        self.value = self
            .value
            .wrapping_mul(BASE)
            .wrapping_add(symbol as u64 + 1);
        self.pow = self.pow.wrapping_mul(BASE);
    }

    #[inline]
    pub fn push_slice(&mut self, symbols: &[Symbol]) {
        for &s in symbols {
            self.push(s);
        }
    }

    /// Removes `symbol`, which must be the current first symbol.
    #[inline]
    pub fn pop_front(&mut self, symbol: Symbol) {
        self.pow = self.pow.wrapping_mul(BASE_INV);
        self.value = self
            .value
            .wrapping_sub((symbol as u64 + 1).wrapping_mul(self.pow));
    }

    #[inline]
    pub fn pop_front_slice(&mut self, symbols: &[Symbol]) {
        for &s in symbols {
            self.pop_front(s);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn base_inverse_is_exact() {
        assert_eq!(BASE.wrapping_mul(BASE_INV), 1);
    }

    proptest! {
        #[test]
        fn incremental_matches_direct(
            initial in proptest::collection::vec(0u8..4, 0..40),
            ops in proptest::collection::vec((0usize..4, proptest::collection::vec(0u8..4, 0..5)), 0..60),
        ) {
            let mut word = initial.clone();
            let mut h = RollingHash::of(&word);
            for (drop, append) in ops {
                let drop = drop.min(word.len());
                h.pop_front_slice(&word[..drop]);
                word.drain(..drop);
                h.push_slice(&append);
                word.extend_from_slice(&append);
                prop_assert_eq!(h, RollingHash::of(&word));
            }
        }
    }
}
