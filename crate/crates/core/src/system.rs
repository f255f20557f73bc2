//! Tag systems and their plain-text format.
//!
//! ```text
//! v=3
//! 0 -> 00
//! 1 -> 1101
//! ```
//!
//! One rule line per symbol in index order. Symbols are single digits when
//! the alphabet has at most 10 symbols and comma-separated decimal indices
//! otherwise. A rule with nothing after `->` is the empty appendant.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::word::{Symbol, Word, MAX_ALPHABET};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SystemError {
    #[error("alphabet must have at least one symbol")]
    EmptyAlphabet,
    #[error("alphabet of {0} symbols exceeds the supported maximum of {MAX_ALPHABET}")]
    AlphabetTooLarge(usize),
    #[error("deletion number must be at least 1")]
    ZeroDeletion,
    #[error("appendant of symbol {rule} uses symbol {symbol}, outside alphabet of size {mu}")]
    SymbolOutOfRange {
        rule: usize,
        symbol: usize,
        mu: usize,
    },
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ParseError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("invalid symbol `{0}`")]
    BadSymbol(String),
    #[error("symbol {symbol} is outside alphabet of size {mu}")]
    SymbolOutOfRange { symbol: usize, mu: usize },
    #[error(transparent)]
    System(#[from] SystemError),
    #[error("unknown preset `{0}`")]
    UnknownPreset(String),
}

/// A tag system: alphabet size `mu`, deletion number `v`, and one appendant
/// per symbol.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct TagSystem {
    v: usize,
    appendants: Vec<Vec<Symbol>>,
}

impl TagSystem {
    pub fn new(v: usize, appendants: Vec<Vec<Symbol>>) -> Result<Self, SystemError> {
        let mu = appendants.len();
        if mu == 0 {
            return Err(SystemError::EmptyAlphabet);
        }
        if mu > MAX_ALPHABET {
            return Err(SystemError::AlphabetTooLarge(mu));
        }
        if v == 0 {
            return Err(SystemError::ZeroDeletion);
        }
        for (rule, w) in appendants.iter().enumerate() {
            if let Some(&s) = w.iter().find(|&&s| s as usize >= mu) {
                return Err(SystemError::SymbolOutOfRange {
                    rule,
                    symbol: s as usize,
                    mu,
                });
            }
        }
        Ok(Self { v, appendants })
    }

    /// Post's system: `v = 3`, `0 -> 00`, `1 -> 1101`.
    pub fn post() -> Self {
        Self::new(3, vec![vec![0, 0], vec![1, 1, 0, 1]]).expect("valid preset")
    }

    /// The TS(3,2) Collatz system: `a0 -> a1 a2`, `a1 -> a0`, `a2 -> a0 a0 a0`.
    pub fn collatz() -> Self {
        Self::new(2, vec![vec![1, 2], vec![0], vec![0, 0, 0]]).expect("valid preset")
    }

    /// `v = 5`, `0 -> 1011`, `1 -> 010100`.
    pub fn fig1_right() -> Self {
        Self::new(5, vec![vec![1, 0, 1, 1], vec![0, 1, 0, 1, 0, 0]]).expect("valid preset")
    }

    pub fn preset(name: &str) -> Result<Self, ParseError> {
        match name {
            "post-00-1101" => Ok(Self::post()),
            "fig1-right" => Ok(Self::fig1_right()),
            "collatz-ts32" => Ok(Self::collatz()),
            other => Err(ParseError::UnknownPreset(other.to_owned())),
        }
    }

    pub const PRESETS: [&'static str; 3] = ["post-00-1101", "fig1-right", "collatz-ts32"];

    #[inline]
    pub fn mu(&self) -> usize {
        self.appendants.len()
    }

    #[inline]
    pub fn v(&self) -> usize {
        self.v
    }

    #[inline]
    pub fn appendant(&self, symbol: Symbol) -> &[Symbol] {
        &self.appendants[symbol as usize]
    }

    pub fn appendants(&self) -> &[Vec<Symbol>] {
        &self.appendants
    }

    pub fn l_max(&self) -> usize {
        self.appendants.iter().map(Vec::len).max().unwrap_or(0)
    }

    pub fn l_min(&self) -> usize {
        self.appendants.iter().map(Vec::len).min().unwrap_or(0)
    }

    /// Checks that every symbol of `word` belongs to the alphabet.
    pub fn check_word(&self, word: &Word) -> Result<(), ParseError> {
        match word.max_symbol() {
            Some(s) if s as usize >= self.mu() => Err(ParseError::SymbolOutOfRange {
                symbol: s as usize,
                mu: self.mu(),
            }),
            _ => Ok(()),
        }
    }

    pub fn format_word(&self, word: &Word) -> String {
        format_symbols(word.as_slice(), self.mu())
    }

    pub fn parse_word(&self, text: &str) -> Result<Word, ParseError> {
        parse_symbols(text, self.mu()).map(Word::from_symbols)
    }
}

/// Serializes symbols for an alphabet of `mu` symbols.
pub fn format_symbols(symbols: &[Symbol], mu: usize) -> String {
    if mu <= 10 {
        symbols.iter().map(|&s| char::from(b'0' + s)).collect()
    } else {
        symbols
            .iter()
            .map(|s| s.to_string())
            .collect::<Vec<_>>()
            .join(",")
    }
}

pub fn parse_symbols(text: &str, mu: usize) -> Result<Vec<Symbol>, ParseError> {
    let text = text.trim();
    if text.is_empty() {
        return Ok(Vec::new());
    }
    let check = |value: usize| {
        if value >= mu {
            Err(ParseError::SymbolOutOfRange { symbol: value, mu })
        } else {
            Ok(value as Symbol)
        }
    };
    if mu <= 10 {
        text.chars()
            .map(|c| {
                let d = c
                    .to_digit(10)
                    .ok_or_else(|| ParseError::BadSymbol(c.to_string()))?;
                check(d as usize)
            })
            .collect()
    } else {
        text.split(',')
            .map(|tok| {
                let tok = tok.trim();
                let value: usize = tok
                    .parse()
                    .map_err(|_| ParseError::BadSymbol(tok.to_owned()))?;
                check(value)
            })
            .collect()
    }
}

impl fmt::Display for TagSystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "v={}", self.v)?;
        for (i, w) in self.appendants.iter().enumerate() {
            if w.is_empty() {
                writeln!(f, "{i} ->")?;
            } else {
                writeln!(f, "{i} -> {}", format_symbols(w, self.mu()))?;
            }
        }
        Ok(())
    }
}

impl fmt::Debug for TagSystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rules: Vec<String> = self
            .appendants
            .iter()
            .map(|w| format_symbols(w, self.mu()))
            .collect();
        write!(f, "TagSystem(v={}; {})", self.v, rules.join(", "))
    }
}

impl FromStr for TagSystem {
    type Err = ParseError;

    fn from_str(text: &str) -> Result<Self, Self::Err> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim_end()))
            .filter(|(_, l)| !l.is_empty());

        let (line, header) = lines.next().ok_or(ParseError::Syntax {
            line: 1,
            message: "missing `v=<int>` header".into(),
        })?;
        let v = header
            .strip_prefix("v=")
            .and_then(|n| n.parse::<usize>().ok())
            .ok_or_else(|| ParseError::Syntax {
                line,
                message: format!("expected `v=<int>`, found `{header}`"),
            })?;

        let rules: Vec<(usize, &str, &str)> = lines
            .map(|(line, l)| {
                let (lhs, rhs) = l.split_once("->").ok_or_else(|| ParseError::Syntax {
                    line,
                    message: format!("expected `<i> -> <appendant>`, found `{l}`"),
                })?;
                Ok((line, lhs.trim(), rhs.trim()))
            })
            .collect::<Result<_, ParseError>>()?;
        let mu = rules.len();
        if mu == 0 {
            return Err(SystemError::EmptyAlphabet.into());
        }

        let mut appendants = Vec::with_capacity(mu);
        for (index, (line, lhs, rhs)) in rules.into_iter().enumerate() {
            if lhs.parse::<usize>().ok() != Some(index) {
                return Err(ParseError::Syntax {
                    line,
                    message: format!("expected rule for symbol {index}, found `{lhs}`"),
                });
            }
            let w = parse_symbols(rhs, mu).map_err(|e| ParseError::Syntax {
                line,
                message: e.to_string(),
            })?;
            appendants.push(w);
        }
        Ok(TagSystem::new(v, appendants)?)
    }
}
