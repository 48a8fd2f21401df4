//! Finite words over the alphabet `{1, 2}`, stored run-length encoded.

use std::fmt;
use std::iter;
use std::str::FromStr;

use serde::de::{self, Deserializer};
use serde::ser::{SerializeSeq, Serializer};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One of the two generator indices.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Symbol {
    One,
    Two,
}

impl Symbol {
    pub fn digit(self) -> u8 {
        match self {
            Symbol::One => 1,
            Symbol::Two => 2,
        }
    }
}

impl TryFrom<u8> for Symbol {
    type Error = Error;

    fn try_from(value: u8) -> Result<Self> {
        match value {
            1 => Ok(Symbol::One),
            2 => Ok(Symbol::Two),
            other => Err(Error::Domain(format!("symbol must be 1 or 2, got {other}"))),
        }
    }
}

/// A maximal block of repeated symbols.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Run {
    pub symbol: Symbol,
    pub count: u64,
}

/// A finite word `s_1 s_2 ... s_n` over `{1, 2}`.
///
/// Adjacent runs always carry distinct symbols and every run is non-empty,
/// so two words are equal iff their run lists are equal.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct SymbolWord {
    runs: Vec<Run>,
    len: u64,
    ones: u64,
}

impl SymbolWord {
    pub fn new() -> Self {
        Self::default()
    }

    /// Builds a word from `(symbol, count)` pairs. Zero counts are skipped and
    /// neighbouring runs of the same symbol are merged.
    pub fn from_runs<I>(runs: I) -> Self
    where
        I: IntoIterator<Item = (Symbol, u64)>,
    {
        let mut word = SymbolWord::new();
        for (symbol, count) in runs {
            word.push_run(symbol, count);
        }
        word
    }

    pub fn from_symbols<I>(symbols: I) -> Self
    where
        I: IntoIterator<Item = Symbol>,
    {
        Self::from_runs(symbols.into_iter().map(|s| (s, 1)))
    }

    /// Word of length `len` encoded in the low bits of `code`, most
    /// significant bit first; a set bit is the symbol `2`.
    pub fn from_code(code: u64, len: u32) -> Self {
        Self::from_symbols((0..len).rev().map(|i| {
            if code >> i & 1 == 1 {
                Symbol::Two
            } else {
                Symbol::One
            }
        }))
    }

    pub fn push(&mut self, symbol: Symbol) {
        self.push_run(symbol, 1);
    }

    pub fn push_run(&mut self, symbol: Symbol, count: u64) {
        if count == 0 {
            return;
        }
        match self.runs.last_mut() {
            Some(last) if last.symbol == symbol => last.count += count,
            _ => self.runs.push(Run { symbol, count }),
        }
        self.len += count;
        if symbol == Symbol::One {
            self.ones += count;
        }
    }

    /// Concatenation `self · other`.
    pub fn concat(&self, other: &SymbolWord) -> SymbolWord {
        let mut word = self.clone();
        for run in &other.runs {
            word.push_run(run.symbol, run.count);
        }
        word
    }

    pub fn runs(&self) -> &[Run] {
        &self.runs
    }

    pub fn len(&self) -> u64 {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Number of `1`s in the whole word.
    pub fn ones(&self) -> u64 {
        self.ones
    }

    /// Number of `2`s in the whole word.
    pub fn twos(&self) -> u64 {
        self.len - self.ones
    }

    /// `(1_k(s), 2_k(s))`: symbol counts among the first `k` letters.
    pub fn prefix_counts(&self, k: u64) -> (u64, u64) {
        let k = k.min(self.len);
        let mut ones = 0;
        let mut seen = 0;
        for run in &self.runs {
            if seen >= k {
                break;
            }
            let take = run.count.min(k - seen);
            if run.symbol == Symbol::One {
                ones += take;
            }
            seen += take;
        }
        (ones, k - ones)
    }

    /// Flat iterator over the letters.
    pub fn symbols(&self) -> impl Iterator<Item = Symbol> + '_ {
        self.runs
            .iter()
            .flat_map(|run| iter::repeat(run.symbol).take(run.count as usize))
    }

    /// The word spelled out digit by digit, e.g. `"1221"`.
    pub fn to_flat_string(&self) -> String {
        self.symbols().map(|s| char::from(b'0' + s.digit())).collect()
    }
}

/// Run-length notation, e.g. `1 2^3 1^4`.
impl fmt::Display for SymbolWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, run) in self.runs.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            if run.count == 1 {
                write!(f, "{}", run.symbol.digit())?;
            } else {
                write!(f, "{}^{}", run.symbol.digit(), run.count)?;
            }
        }
        Ok(())
    }
}

/// Accepts flat digit strings (`"1221"`) and whitespace-separated run-length
/// tokens (`"1 2^3 1^4"`), or any mix of the two.
impl FromStr for SymbolWord {
    type Err = Error;

    fn from_str(text: &str) -> Result<Self> {
        let mut word = SymbolWord::new();
        for token in text.split_whitespace() {
            if let Some((digit, count)) = token.split_once('^') {
                let symbol = parse_digit(digit)?;
                let count = count
                    .trim_matches(|c| c == '{' || c == '}')
                    .parse::<u64>()
                    .map_err(|_| Error::Domain(format!("bad run length in {token:?}")))?;
                word.push_run(symbol, count);
            } else {
                for ch in token.chars() {
                    word.push(parse_digit(&ch.to_string())?);
                }
            }
        }
        Ok(word)
    }
}

fn parse_digit(text: &str) -> Result<Symbol> {
    match text {
        "1" => Ok(Symbol::One),
        "2" => Ok(Symbol::Two),
        other => Err(Error::Domain(format!("symbol must be 1 or 2, got {other:?}"))),
    }
}

/// Serialized as an array of `[symbol, count]` pairs.
impl Serialize for SymbolWord {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let mut seq = serializer.serialize_seq(Some(self.runs.len()))?;
        for run in &self.runs {
            seq.serialize_element(&(run.symbol.digit(), run.count))?;
        }
        seq.end()
    }
}

impl<'de> Deserialize<'de> for SymbolWord {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let pairs = Vec::<(u8, u64)>::deserialize(deserializer)?;
        let mut word = SymbolWord::new();
        for (digit, count) in pairs {
            let symbol = Symbol::try_from(digit).map_err(de::Error::custom)?;
            if count == 0 {
                return Err(de::Error::custom("run length must be positive"));
            }
            if word.runs.last().is_some_and(|r| r.symbol == symbol) {
                return Err(de::Error::custom("adjacent runs must differ"));
            }
            word.push_run(symbol, count);
        }
        Ok(word)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn parse_flat_and_run_length_forms() {
        let a: SymbolWord = "1221".parse().unwrap();
        let b: SymbolWord = "1 2^2 1".parse().unwrap();
        assert_eq!(a, b);
        assert_eq!(a.runs().len(), 3);
        assert_eq!(a.to_string(), "1 2^2 1");
        assert_eq!(a.to_flat_string(), "1221");
        assert!("132".parse::<SymbolWord>().is_err());
        assert!("2^x".parse::<SymbolWord>().is_err());
    }

    #[test]
    fn symbol_conversion_rejects_other_digits() {
        assert_eq!(Symbol::try_from(2).unwrap(), Symbol::Two);
        assert!(matches!(Symbol::try_from(3), Err(Error::Domain(_))));
    }

    #[test]
    fn code_round_trip() {
        assert_eq!(SymbolWord::from_code(0b011, 3).to_flat_string(), "122");
        assert_eq!(SymbolWord::from_code(0b100, 3).to_flat_string(), "211");
    }

    #[test]
    fn json_is_run_length_pairs() {
        let w: SymbolWord = "1 2^3 1^4".parse().unwrap();
        let json = serde_json::to_string(&w).unwrap();
        assert_eq!(json, "[[1,1],[2,3],[1,4]]");
        let back: SymbolWord = serde_json::from_str(&json).unwrap();
        assert_eq!(back, w);
        assert!(serde_json::from_str::<SymbolWord>("[[1,1],[1,2]]").is_err());
        assert!(serde_json::from_str::<SymbolWord>("[[3,1]]").is_err());
        assert!(serde_json::from_str::<SymbolWord>("[[2,0]]").is_err());
    }

    fn arb_word() -> impl Strategy<Value = Vec<Symbol>> {
        prop::collection::vec(prop_oneof![Just(Symbol::One), Just(Symbol::Two)], 0..60)
    }

    proptest! {
        #[test]
        fn counts_are_consistent(symbols in arb_word()) {
            let word = SymbolWord::from_symbols(symbols.clone());
            prop_assert_eq!(word.len(), symbols.len() as u64);
            prop_assert_eq!(word.ones() + word.twos(), word.len());
            prop_assert_eq!(word.symbols().collect::<Vec<_>>(), symbols.clone());
            let mut prev = (0, 0);
            for k in 0..=word.len() {
                let (o, t) = word.prefix_counts(k);
                prop_assert_eq!(o + t, k);
                prop_assert!(o >= prev.0 && t >= prev.1);
                prev = (o, t);
            }
            prop_assert_eq!(prev, (word.ones(), word.twos()));
            for pair in word.runs().windows(2) {
                prop_assert_ne!(pair[0].symbol, pair[1].symbol);
            }
        }

        #[test]
        fn concat_matches_flat_concat(a in arb_word(), b in arb_word()) {
            let joined = SymbolWord::from_symbols(a.clone()).concat(&SymbolWord::from_symbols(b.clone()));
            let flat: Vec<_> = a.into_iter().chain(b).collect();
            prop_assert_eq!(joined, SymbolWord::from_symbols(flat));
        }
    }
}
