use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use crate::alphabet::{Alphabet, DEFAULT_SEPARATOR, HTRTS_SPECIALS};
use crate::error::{Error, Result};

/// Which symbols separate words and which may cling to a word without
/// being part of it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LexiconPolicy {
    pub separators: BTreeSet<char>,
    pub punctuation: BTreeSet<char>,
}

impl Default for LexiconPolicy {
    fn default() -> Self {
        Self {
            separators: BTreeSet::from([DEFAULT_SEPARATOR]),
            punctuation: HTRTS_SPECIALS.chars().collect(),
        }
    }
}

impl LexiconPolicy {
    pub fn new(separators: impl IntoIterator<Item = char>, punctuation: impl IntoIterator<Item = char>) -> Self {
        Self {
            separators: separators.into_iter().collect(),
            punctuation: punctuation.into_iter().collect(),
        }
    }

    /// Separator used when rendering or splitting multi-word text.
    pub fn primary_separator(&self) -> char {
        self.separators.first().copied().unwrap_or(DEFAULT_SEPARATOR)
    }

    fn strip<'a>(&self, token: &'a str) -> &'a str {
        token.trim_matches(|c| self.punctuation.contains(&c))
    }

    /// Splits `text` into the lexicon words it contains, dropping attached
    /// punctuation and punctuation-only tokens.
    pub fn words<'a>(&self, text: &'a str) -> Vec<&'a str> {
        text.split(|c| self.separators.contains(&c))
            .map(|t| self.strip(t))
            .filter(|w| !w.is_empty())
            .collect()
    }
}

#[derive(Debug, Clone, Default)]
pub(crate) struct TrieNode {
    pub children: BTreeMap<char, u32>,
    pub count: u64,
}

/// Words with occurrence counts, stored as a character trie.
#[derive(Debug, Clone)]
pub struct Lexicon {
    counts: BTreeMap<String, u64>,
    total: u64,
    policy: LexiconPolicy,
    trie: Vec<TrieNode>,
}

impl PartialEq for Lexicon {
    fn eq(&self, other: &Self) -> bool {
        self.counts == other.counts && self.policy == other.policy
    }
}

impl Lexicon {
    pub fn empty(policy: LexiconPolicy) -> Self {
        Self {
            counts: BTreeMap::new(),
            total: 0,
            policy,
            trie: vec![TrieNode::default()],
        }
    }

    pub fn from_counts<S: AsRef<str>>(
        entries: impl IntoIterator<Item = (S, u64)>,
        policy: LexiconPolicy,
    ) -> Result<Self> {
        let mut lexicon = Self::empty(policy);
        for (word, count) in entries {
            lexicon.add(word.as_ref(), count)?;
        }
        Ok(lexicon)
    }

    fn add(&mut self, word: &str, count: u64) -> Result<()> {
        if word.is_empty() {
            return Err(Error::InvalidParameter("lexicon words must be non-empty".into()));
        }
        if count == 0 {
            return Err(Error::InvalidParameter(format!("word {word:?} has count 0")));
        }
        if let Some(c) = word.chars().find(|c| self.policy.separators.contains(c)) {
            return Err(Error::InvalidSymbol(c));
        }
        let mut node = 0usize;
        for c in word.chars() {
            node = match self.trie[node].children.get(&c) {
                Some(&child) => child as usize,
                None => {
                    self.trie.push(TrieNode::default());
                    let child = self.trie.len() - 1;
                    self.trie[node].children.insert(c, child as u32);
                    child
                }
            };
        }
        self.trie[node].count += count;
        *self.counts.entry(word.to_string()).or_insert(0) += count;
        self.total += count;
        Ok(())
    }

    pub fn policy(&self) -> &LexiconPolicy {
        &self.policy
    }

    pub fn total_count(&self) -> u64 {
        self.total
    }

    pub fn len(&self) -> usize {
        self.counts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    pub fn count(&self, word: &str) -> u64 {
        self.counts.get(word).copied().unwrap_or(0)
    }

    pub fn contains(&self, word: &str) -> bool {
        self.counts.contains_key(word)
    }

    /// Words in lexicographic order with their counts.
    pub fn iter(&self) -> impl Iterator<Item = (&str, u64)> {
        self.counts.iter().map(|(w, &c)| (w.as_str(), c))
    }

    /// Unigram log probability, `-inf` for unknown words.
    pub fn log_prob(&self, word: &str) -> f64 {
        match self.count(word) {
            0 => f64::NEG_INFINITY,
            c => (c as f64 / self.total as f64).ln(),
        }
    }

    pub(crate) fn trie(&self) -> &[TrieNode] {
        &self.trie
    }

    /// Same words with every count multiplied by `factor`.
    pub fn scaled(&self, factor: u64) -> Result<Self> {
        Self::from_counts(self.iter().map(|(w, c)| (w, c * factor)), self.policy.clone())
    }

    /// Parses `<count>\t<word>` lines. Blank lines are skipped.
    pub fn parse(text: &str, policy: LexiconPolicy) -> Result<Self> {
        let mut lexicon = Self::empty(policy);
        for (i, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let parse_err = |reason: String| Error::Parse { line: i + 1, reason };
            let (count, word) = line
                .split_once('\t')
                .ok_or_else(|| parse_err("expected <count>\\t<word>".into()))?;
            let count: u64 = count
                .trim()
                .parse()
                .map_err(|e| parse_err(format!("bad count {count:?}: {e}")))?;
            lexicon.add(word, count).map_err(|e| parse_err(e.to_string()))?;
        }
        Ok(lexicon)
    }

    /// Renders the `<count>\t<word>` file form, most frequent words first.
    pub fn to_text(&self) -> String {
        let mut entries: Vec<(&str, u64)> = self.iter().collect();
        entries.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(b.0)));
        let mut out = String::new();
        for (word, count) in entries {
            writeln!(out, "{count}\t{word}").expect("writing to a String");
        }
        out
    }
}

/// Counts words in normalized transcripts. Tokens are split on the policy
/// separators and stripped of leading and trailing punctuation.
pub fn build_lexicon<S: AsRef<str>>(corpus: &[S], alphabet: &Alphabet, policy: LexiconPolicy) -> Result<Lexicon> {
    let mut lexicon = Lexicon::empty(policy);
    for line in corpus {
        let line = line.as_ref();
        if let Some(c) = line.chars().find(|&c| !alphabet.contains(c)) {
            return Err(Error::InvalidSymbol(c));
        }
        let words: Vec<String> = lexicon.policy.words(line).into_iter().map(str::to_string).collect();
        for word in words {
            lexicon.add(&word, 1)?;
        }
    }
    Ok(lexicon)
}
