//! Operator words over two dichotomic observables per party, with
//! `A_x² = B_y² = 1` and `[A_x, B_y] = 0`.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use serde::{Serialize, Serializer};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Symbol {
    A0,
    A1,
    B0,
    B1,
}

impl Symbol {
    pub const ALL: [Symbol; 4] = [Symbol::A0, Symbol::A1, Symbol::B0, Symbol::B1];

    pub fn is_alice(self) -> bool {
        matches!(self, Symbol::A0 | Symbol::A1)
    }

    pub fn input(self) -> usize {
        match self {
            Symbol::A0 | Symbol::B0 => 0,
            Symbol::A1 | Symbol::B1 => 1,
        }
    }

    pub fn alice(x: usize) -> Symbol {
        if x == 0 {
            Symbol::A0
        } else {
            Symbol::A1
        }
    }

    pub fn bob(y: usize) -> Symbol {
        if y == 0 {
            Symbol::B0
        } else {
            Symbol::B1
        }
    }
}

impl fmt::Display for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Symbol::A0 => "A0",
            Symbol::A1 => "A1",
            Symbol::B0 => "B0",
            Symbol::B1 => "B1",
        };
        f.write_str(s)
    }
}

/// A product of symbols. Words built through [`Word::new`] or
/// [`canonicalize`] are canonical: Alice's symbols first, then Bob's, with
/// no two equal adjacent symbols.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct Word(Vec<Symbol>);

impl Word {
    pub fn identity() -> Self {
        Word(Vec::new())
    }

    /// Canonical word for the product of `symbols`.
    pub fn new(symbols: &[Symbol]) -> Self {
        canonicalize(symbols)
    }

    pub fn symbols(&self) -> &[Symbol] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_identity(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Canonical form of `self · other`.
    pub fn mul(&self, other: &Word) -> Word {
        let mut s = self.0.clone();
        s.extend_from_slice(&other.0);
        canonicalize(&s)
    }

    pub fn adjoint(&self) -> Word {
        adjoint(self)
    }
}

impl Ord for Word {
    /// Shorter words first, then lexicographic.
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.len().cmp(&other.0.len()).then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for Word {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("1");
        }
        for s in &self.0 {
            write!(f, "{s}")?;
        }
        Ok(())
    }
}

impl Serialize for Word {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

fn push_reduced(stack: &mut Vec<Symbol>, s: Symbol) {
    if stack.last() == Some(&s) {
        stack.pop();
    } else {
        stack.push(s);
    }
}

/// Moves Bob's symbols past Alice's and cancels squares within each block.
pub fn canonicalize(symbols: &[Symbol]) -> Word {
    let mut alice = Vec::new();
    let mut bob = Vec::new();
    for &s in symbols {
        if s.is_alice() {
            push_reduced(&mut alice, s);
        } else {
            push_reduced(&mut bob, s);
        }
    }
    alice.extend(bob);
    Word(alice)
}

/// `w†`: the reversed product, in canonical form.
pub fn adjoint(w: &Word) -> Word {
    let rev: Vec<Symbol> = w.0.iter().rev().copied().collect();
    canonicalize(&rev)
}

/// Hierarchy level: full level `L` (all words of length ≤ L) or the
/// intermediate level `1+AB`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum NpaLevel {
    Full(u32),
    OnePlusAb,
}

impl NpaLevel {
    /// The levels compared in hierarchy order: `1 < 1+AB < 2 < 3 < …`.
    fn rank(self) -> u64 {
        match self {
            NpaLevel::Full(k) => 2 * k as u64,
            NpaLevel::OnePlusAb => 3,
        }
    }

    /// `[1, 1+AB, 2, …, max]`.
    pub fn up_to(max: NpaLevel) -> Vec<NpaLevel> {
        let mut out = vec![NpaLevel::Full(1), NpaLevel::OnePlusAb];
        let top = match max {
            NpaLevel::Full(k) => k,
            NpaLevel::OnePlusAb => 1,
        };
        out.extend((2..=top).map(NpaLevel::Full));
        out.retain(|l| *l <= max);
        out
    }

    /// Largest word length at this level.
    pub fn max_word_length(self) -> usize {
        match self {
            NpaLevel::Full(k) => k as usize,
            NpaLevel::OnePlusAb => 2,
        }
    }
}

impl Ord for NpaLevel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.rank().cmp(&other.rank())
    }
}

impl PartialOrd for NpaLevel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for NpaLevel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NpaLevel::Full(k) => write!(f, "{k}"),
            NpaLevel::OnePlusAb => f.write_str("1+AB"),
        }
    }
}

impl FromStr for NpaLevel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim();
        if t.eq_ignore_ascii_case("1+AB") {
            return Ok(NpaLevel::OnePlusAb);
        }
        match t.parse::<u32>() {
            Ok(k) if k >= 1 => Ok(NpaLevel::Full(k)),
            _ => Err(Error::InvalidArgument(format!(
                "invalid NPA level '{s}' (expected 1, 1+AB, 2, 3, ...)"
            ))),
        }
    }
}

impl Serialize for NpaLevel {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

/// Highest full level accepted without an explicit override.
pub const WORD_LEVEL_GUARD: u32 = 5;

/// Words indexing the moment matrix at `level`, ordered by length then
/// lexicographically.
pub fn build_words(level: NpaLevel) -> Result<Vec<Word>> {
    build_words_with(level, false)
}

/// [`build_words`]; `allow_large` lifts the level guard.
pub fn build_words_with(level: NpaLevel, allow_large: bool) -> Result<Vec<Word>> {
    if let NpaLevel::Full(k) = level {
        if k == 0 {
            return Err(Error::InvalidArgument("NPA level must be at least 1".into()));
        }
        if k > WORD_LEVEL_GUARD && !allow_large {
            return Err(Error::LevelTooLarge(format!(
                "level {k} exceeds the double-precision guard {WORD_LEVEL_GUARD}; pass an override to build it anyway"
            )));
        }
    }
    let max_len = match level {
        NpaLevel::Full(k) => k as usize,
        NpaLevel::OnePlusAb => 1,
    };
    let mut words = vec![Word::identity()];
    let mut frontier = vec![Word::identity()];
    for _ in 0..max_len {
        let mut next = Vec::new();
        for w in &frontier {
            for s in Symbol::ALL {
                let v = w.mul(&Word(vec![s]));
                if v.len() == w.len() + 1 && !words.contains(&v) && !next.contains(&v) {
                    next.push(v);
                }
            }
        }
        words.extend(next.iter().cloned());
        frontier = next;
    }
    if level == NpaLevel::OnePlusAb {
        for x in 0..2 {
            for y in 0..2 {
                words.push(Word::new(&[Symbol::alice(x), Symbol::bob(y)]));
            }
        }
    }
    words.sort();
    words.dedup();
    Ok(words)
}

#[cfg(test)]
mod tests {
    use super::*;
    use Symbol::*;

    #[test]
    fn canonicalization_examples() {
        assert_eq!(canonicalize(&[A0, A0]), Word::identity());
        assert_eq!(canonicalize(&[B0, A1]).symbols(), &[A1, B0]);
        assert_eq!(canonicalize(&[A0, A1, A1, B0]).symbols(), &[A0, B0]);
        assert_eq!(canonicalize(&[A0, B1, A0, B0]).symbols(), &[B1, B0]);
    }

    #[test]
    fn idempotent_and_adjoint() {
        let w = canonicalize(&[B1, A0, B0, A1, A0, B1]);
        assert_eq!(canonicalize(w.symbols()), w);
        assert_eq!(w.adjoint().symbols(), &[A0, A1, A0, B1, B0, B1]);
        assert_eq!(w.adjoint().adjoint(), w);
    }

    #[test]
    fn word_counts() {
        assert_eq!(build_words(NpaLevel::Full(1)).unwrap().len(), 5);
        assert_eq!(build_words(NpaLevel::OnePlusAb).unwrap().len(), 9);
        for l in 1..=5u32 {
            let n = build_words(NpaLevel::Full(l)).unwrap().len();
            assert_eq!(n as u32, 1 + 2 * l * (l + 1), "level {l}");
        }
    }

    #[test]
    fn level_one_words() {
        let w: Vec<String> = build_words(NpaLevel::Full(1))
            .unwrap()
            .iter()
            .map(|w| w.to_string())
            .collect();
        assert_eq!(w, ["1", "A0", "A1", "B0", "B1"]);
    }

    #[test]
    fn level_guard() {
        assert!(matches!(build_words(NpaLevel::Full(6)), Err(Error::LevelTooLarge(_))));
        assert_eq!(build_words_with(NpaLevel::Full(6), true).unwrap().len(), 85);
    }

    #[test]
    fn level_order_and_parse() {
        let l: Vec<NpaLevel> = ["1", "1+AB", "2", "3"].iter().map(|s| s.parse().unwrap()).collect();
        assert!(l.windows(2).all(|w| w[0] < w[1]));
        assert_eq!(NpaLevel::up_to(NpaLevel::Full(3)), l);
        assert_eq!(NpaLevel::OnePlusAb.to_string(), "1+AB");
        assert!("0".parse::<NpaLevel>().is_err());
        assert!("x".parse::<NpaLevel>().is_err());
    }
}
