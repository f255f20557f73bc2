use std::fmt;
use std::hash::{Hash, Hasher};

/// A symbol index in `0..mu`.
pub type Symbol = u8;

/// Largest alphabet a [`Symbol`] can index.
pub const MAX_ALPHABET: usize = Symbol::MAX as usize + 1;

// Dead prefix is reclaimed once it is at least this large and at least as
// large as the live part, which keeps compaction amortized O(1) per symbol.
const COMPACT_MIN: usize = 4096;

/// A finite word over a tag-system alphabet.
///
/// Stored as a sliding window over a growable buffer: symbols are appended at
/// the back and dropped from the front by advancing `head`, so one tag-system
/// step costs O(v + |w|) with no per-step copying of the word.
#[derive(Clone, Default)]
pub struct Word {
    buf: Vec<Symbol>,
    head: usize,
}

impl Word {
    /// The empty word.
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn with_capacity(capacity: usize) -> Self {
        Self {
            buf: Vec::with_capacity(capacity),
            head: 0,
        }
    }

    pub fn from_symbols(symbols: Vec<Symbol>) -> Self {
        Self {
            buf: symbols,
            head: 0,
        }
    }

    /// `pattern` concatenated `n` times.
    pub fn repeat(pattern: &[Symbol], n: usize) -> Self {
        Self::from_symbols(pattern.repeat(n))
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.buf.len() - self.head
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    #[inline]
    pub fn as_slice(&self) -> &[Symbol] {
        &self.buf[self.head..]
    }

    #[inline]
    pub fn first(&self) -> Option<Symbol> {
        self.buf.get(self.head).copied()
    }

    pub fn to_vec(&self) -> Vec<Symbol> {
        self.as_slice().to_vec()
    }

    #[inline]
    pub fn push_slice(&mut self, symbols: &[Symbol]) {
        self.buf.extend_from_slice(symbols);
    }

    pub fn push(&mut self, symbol: Symbol) {
        self.buf.push(symbol);
    }

    /// Removes the first `n` symbols (all of them if `n > len`).
    #[inline]
    pub fn drop_front(&mut self, n: usize) {
        self.head = (self.head + n).min(self.buf.len());
        if self.head >= COMPACT_MIN && self.head >= self.len() {
            self.compact();
        }
    }

    fn compact(&mut self) {
        let live = self.len();
        self.buf.copy_within(self.head.., 0);
        self.buf.truncate(live);
        self.head = 0;
    }

    pub fn concat(&self, other: &Word) -> Word {
        let mut out = Word::with_capacity(self.len() + other.len());
        out.push_slice(self.as_slice());
        out.push_slice(other.as_slice());
        out
    }

    /// Replaces the contents with `other`'s symbols, reusing the allocation.
    pub fn assign(&mut self, other: &Word) {
        self.buf.clear();
        self.head = 0;
        self.buf.extend_from_slice(other.as_slice());
    }

    /// Largest symbol index, if any.
    pub fn max_symbol(&self) -> Option<Symbol> {
        self.as_slice().iter().copied().max()
    }
}

impl PartialEq for Word {
    fn eq(&self, other: &Self) -> bool {
        self.as_slice() == other.as_slice()
    }
}

impl Eq for Word {}

impl Hash for Word {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.as_slice().hash(state);
    }
}

impl PartialOrd for Word {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Word {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.as_slice().cmp(other.as_slice())
    }
}

impl From<Vec<Symbol>> for Word {
    fn from(symbols: Vec<Symbol>) -> Self {
        Self::from_symbols(symbols)
    }
}

impl From<&[Symbol]> for Word {
    fn from(symbols: &[Symbol]) -> Self {
        Self::from_symbols(symbols.to_vec())
    }
}

impl fmt::Debug for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Word(")?;
        for (i, s) in self.as_slice().iter().enumerate() {
            if i > 0 && self.max_symbol().unwrap_or(0) >= 10 {
                write!(f, ",")?;
            }
            write!(f, "{s}")?;
        }
        write!(f, ")")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sliding_window_keeps_live_symbols() {
        let mut w = Word::from_symbols(vec![0, 1, 2, 3]);
        w.drop_front(2);
        w.push_slice(&[4, 5]);
        assert_eq!(w.as_slice(), &[2, 3, 4, 5]);
        assert_eq!(w.len(), 4);
        assert_eq!(w.first(), Some(2));
    }

    #[test]
    fn compaction_is_transparent() {
        let mut w = Word::empty();
        let mut model = std::collections::VecDeque::new();
        for i in 0..50_000u32 {
            let s = (i % 7) as Symbol;
            w.push_slice(&[s, s]);
            model.push_back(s);
            model.push_back(s);
            w.drop_front(1);
            model.pop_front();
            if i % 3 == 0 {
                w.drop_front(1);
                model.pop_front();
            }
        }
        assert_eq!(w.to_vec(), model.into_iter().collect::<Vec<_>>());
        assert!(w.buf.capacity() < 200_000);
    }

    #[test]
    fn drop_past_end_gives_empty() {
        let mut w = Word::from_symbols(vec![1, 1]);
        w.drop_front(5);
        assert!(w.is_empty());
        assert_eq!(w, Word::empty());
    }
}
