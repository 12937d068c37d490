//! Symbol inventory of a recognizer and transcript normalization.
//!
//! An alphabet is the ordered list of matrix columns. Exactly one column is
//! the artificial non-character symbol (NaC); every other column is a single
//! printable `char`. The normalization map folds typographic variants (curly
//! quotes, dashes) onto the canonical symbol the recognizer was trained on.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use crate::error::{Error, Result};

/// Token used for NaC in text serializations.
pub const NAC_TOKEN: &str = "<NaC>";

/// Special characters of the HTRtS alphabet, in preset order.
pub const HTRTS_SPECIALS: &str = "/&£$+-_.,:;!?'\"=[]()";

/// Default word separator. The HTRtS symbol list contains a box glyph that
/// the preset maps to this character; pass another one to
/// [`Alphabet::htrts_with_separator`] if your transcripts use a different
/// convention.
pub const DEFAULT_SEPARATOR: char = ' ';

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Symbol {
    NaC,
    Char(char),
}

impl fmt::Display for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Symbol::NaC => f.write_str(NAC_TOKEN),
            Symbol::Char(c) => write!(f, "{c}"),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Alphabet {
    symbols: Vec<Symbol>,
    nac: usize,
    index: HashMap<char, usize>,
    normalization: BTreeMap<char, char>,
}

/// Alphabets are equal when their columns are; the normalization map only
/// concerns transcripts.
impl PartialEq for Alphabet {
    fn eq(&self, other: &Self) -> bool {
        self.symbols == other.symbols
    }
}

impl Eq for Alphabet {}

impl Alphabet {
    /// Builds an alphabet from its column list. `symbols` must contain
    /// exactly one [`Symbol::NaC`] and at least one printable character.
    pub fn new(symbols: Vec<Symbol>, normalization: BTreeMap<char, char>) -> Result<Self> {
        if symbols.len() < 2 {
            return Err(Error::InvalidAlphabet(format!(
                "need at least 2 symbols, got {}",
                symbols.len()
            )));
        }
        let mut nac = None;
        let mut index = HashMap::with_capacity(symbols.len());
        for (i, s) in symbols.iter().enumerate() {
            match *s {
                Symbol::NaC => {
                    if nac.replace(i).is_some() {
                        return Err(Error::InvalidAlphabet("NaC appears more than once".into()));
                    }
                }
                Symbol::Char(c) => {
                    if c == '\t' || c == '\n' || c == '\r' {
                        return Err(Error::InvalidAlphabet(format!(
                            "control character {c:?} cannot be a symbol"
                        )));
                    }
                    if index.insert(c, i).is_some() {
                        return Err(Error::InvalidAlphabet(format!("duplicate symbol {c:?}")));
                    }
                }
            }
        }
        let nac = nac.ok_or_else(|| Error::InvalidAlphabet("missing NaC symbol".into()))?;
        for (&from, &to) in &normalization {
            if !index.contains_key(&to) {
                return Err(Error::InvalidAlphabet(format!(
                    "normalization target {to:?} (from {from:?}) is not a symbol"
                )));
            }
        }
        Ok(Self {
            symbols,
            nac,
            index,
            normalization,
        })
    }

    /// Printable characters in column order followed by NaC as the last
    /// column.
    pub fn from_chars(chars: &str) -> Result<Self> {
        let mut symbols: Vec<Symbol> = chars.chars().map(Symbol::Char).collect();
        symbols.push(Symbol::NaC);
        Self::new(symbols, BTreeMap::new())
    }

    /// The HTRtS 2015 recognition alphabet: digits, Latin lower and upper
    /// case letters, the special characters, a word separator and NaC.
    pub fn htrts() -> Self {
        Self::htrts_with_separator(DEFAULT_SEPARATOR)
    }

    pub fn htrts_with_separator(separator: char) -> Self {
        let mut symbols = Vec::new();
        symbols.extend(('0'..='9').map(Symbol::Char));
        symbols.extend(('a'..='z').map(Symbol::Char));
        symbols.extend(('A'..='Z').map(Symbol::Char));
        symbols.extend(HTRTS_SPECIALS.chars().map(Symbol::Char));
        symbols.push(Symbol::Char(separator));
        symbols.push(Symbol::NaC);
        Self::new(symbols, htrts_normalization(separator)).expect("preset alphabet is valid")
    }

    pub fn with_normalization(mut self, normalization: BTreeMap<char, char>) -> Result<Self> {
        self.normalization = normalization;
        Self::new(self.symbols, self.normalization)
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    pub fn nac_index(&self) -> usize {
        self.nac
    }

    pub fn symbols(&self) -> &[Symbol] {
        &self.symbols
    }

    pub fn symbol(&self, index: usize) -> Symbol {
        self.symbols[index]
    }

    /// Printable character of column `index`, `None` for NaC.
    pub fn char_at(&self, index: usize) -> Option<char> {
        match self.symbols[index] {
            Symbol::NaC => None,
            Symbol::Char(c) => Some(c),
        }
    }

    pub fn index_of(&self, c: char) -> Option<usize> {
        self.index.get(&c).copied()
    }

    pub fn contains(&self, c: char) -> bool {
        self.index.contains_key(&c)
    }

    pub fn normalization(&self) -> &BTreeMap<char, char> {
        &self.normalization
    }

    /// Printable characters in column order.
    pub fn printable(&self) -> impl Iterator<Item = char> + '_ {
        self.symbols.iter().filter_map(|s| match s {
            Symbol::Char(c) => Some(*c),
            Symbol::NaC => None,
        })
    }

    /// Maps `text` to column indices; fails on characters outside the
    /// alphabet. No normalization is applied.
    pub fn encode(&self, text: &str) -> Result<Vec<usize>> {
        text.chars()
            .map(|c| self.index_of(c).ok_or(Error::InvalidSymbol(c)))
            .collect()
    }

    /// Rewrites `raw` onto canonical symbols. Mapped characters are replaced
    /// first; anything that is then still outside the alphabet is an error.
    pub fn normalize_transcript(&self, raw: &str) -> Result<String> {
        let mut out = String::with_capacity(raw.len());
        for (position, ch) in raw.chars().enumerate() {
            let canonical = self.normalization.get(&ch).copied().unwrap_or(ch);
            if !self.contains(canonical) {
                return Err(Error::UnmappableCharacter { position, ch });
            }
            out.push(canonical);
        }
        Ok(out)
    }
}

/// Free-function form of [`Alphabet::normalize_transcript`].
pub fn normalize_transcript(raw: &str, alphabet: &Alphabet) -> Result<String> {
    alphabet.normalize_transcript(raw)
}

fn htrts_normalization(separator: char) -> BTreeMap<char, char> {
    let mut map = BTreeMap::new();
    for c in ['\u{2018}', '\u{2019}', '\u{201A}', '\u{201B}', '\u{2032}', '`', '\u{00B4}'] {
        map.insert(c, '\'');
    }
    for c in ['\u{201C}', '\u{201D}', '\u{201E}', '\u{201F}', '\u{2033}', '\u{00AB}', '\u{00BB}'] {
        map.insert(c, '"');
    }
    for c in ['\u{2010}', '\u{2011}', '\u{2012}', '\u{2013}', '\u{2014}', '\u{2015}', '\u{2212}', '\u{00AD}'] {
        map.insert(c, '-');
    }
    if separator != '\u{25A1}' {
        map.insert('\u{25A1}', separator);
    }
    for c in ['\t', '\u{00A0}', '\u{2009}'] {
        if c != separator {
            map.insert(c, separator);
        }
    }
    map
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn curly_apostrophe_is_folded() {
        let alphabet = Alphabet::htrts();
        assert_eq!(alphabet.normalize_transcript("don\u{2019}t").unwrap(), "don't");
    }

    #[test]
    fn identity_without_map() {
        let alphabet = Alphabet::from_chars("abc").unwrap();
        assert_eq!(alphabet.normalize_transcript("abc").unwrap(), "abc");
    }

    #[test]
    fn en_dash_becomes_hyphen() {
        let alphabet = Alphabet::htrts();
        assert_eq!(alphabet.normalize_transcript("a\u{2013}b").unwrap(), "a-b");
    }

    #[test]
    fn custom_map() {
        let map = BTreeMap::from([('\u{2019}', '\'')]);
        let alphabet = Alphabet::from_chars("dont'").unwrap().with_normalization(map).unwrap();
        assert_eq!(alphabet.normalize_transcript("don\u{2019}t").unwrap(), "don't");
    }

    #[test]
    fn unmappable_character_reports_position() {
        let alphabet = Alphabet::from_chars("ab").unwrap();
        match alphabet.normalize_transcript("abz") {
            Err(Error::UnmappableCharacter { position, ch }) => {
                assert_eq!((position, ch), (2, 'z'));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn rejects_bad_alphabets() {
        assert!(Alphabet::new(vec![Symbol::NaC], BTreeMap::new()).is_err());
        assert!(Alphabet::new(vec![Symbol::Char('a'), Symbol::Char('b')], BTreeMap::new()).is_err());
        assert!(Alphabet::new(
            vec![Symbol::Char('a'), Symbol::NaC, Symbol::NaC],
            BTreeMap::new()
        )
        .is_err());
        assert!(Alphabet::new(
            vec![Symbol::Char('a'), Symbol::Char('a'), Symbol::NaC],
            BTreeMap::new()
        )
        .is_err());
        let bad_map = BTreeMap::from([('x', 'q')]);
        assert!(Alphabet::from_chars("ab").unwrap().with_normalization(bad_map).is_err());
    }

    #[test]
    fn htrts_preset_layout() {
        let alphabet = Alphabet::htrts();
        // 10 digits, 52 letters, 20 specials, separator, NaC
        assert_eq!(alphabet.len(), 10 + 52 + 20 + 1 + 1);
        assert_eq!(alphabet.nac_index(), alphabet.len() - 1);
        assert!(alphabet.contains(' '));
        assert!(alphabet.contains('£'));
        assert_eq!(alphabet.normalize_transcript("a\u{25A1}b").unwrap(), "a b");
        let boxed = Alphabet::htrts_with_separator('\u{25A1}');
        assert!(boxed.contains('\u{25A1}'));
        assert!(!boxed.contains(' '));
    }
}
