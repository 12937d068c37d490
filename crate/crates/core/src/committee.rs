//! ROVER-style combination of several experts' 1-best lines.
//!
//! Hypotheses are merged one at a time, in expert rank order, into a word
//! transition network (WTN): a sequence of slots, each holding the
//! competing words (or NULL, for experts that had no word there). Each slot
//! then elects the candidate with the best mix of vote share and mean
//! confidence.

use rayon::prelude::*;

use crate::alphabet::DEFAULT_SEPARATOR;
use crate::dictionary::{decode_dictionary, DecodeParams, Lexicon};
use crate::error::{Error, Result};
use crate::hypothesis::{tokenize, Hypothesis};
use crate::matrix::ConfidenceMatrix;

pub const DEFAULT_VOTE_LAMBDA: f64 = 0.5;
pub const DEFAULT_NULL_CONFIDENCE: f64 = 0.7;

/// Confidence used for words whose hypothesis carries none.
const MISSING_CONFIDENCE: f64 = 1.0;

#[derive(Debug, Clone, PartialEq)]
pub struct SlotEntry {
    /// `None` is NULL: no word at this position.
    pub word: Option<String>,
    pub votes: usize,
    pub confidence_sum: f64,
    /// Rank of the first expert that contributed this entry.
    pub first_expert: usize,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Slot {
    pub entries: Vec<SlotEntry>,
}

impl Slot {
    fn contains(&self, word: Option<&str>) -> bool {
        self.entries.iter().any(|e| e.word.as_deref() == word)
    }

    fn add(&mut self, word: Option<&str>, votes: usize, confidence: f64, expert: usize) {
        match self.entries.iter_mut().find(|e| e.word.as_deref() == word) {
            Some(entry) => {
                entry.votes += votes;
                entry.confidence_sum += confidence;
                entry.first_expert = entry.first_expert.min(expert);
            }
            None => self.entries.push(SlotEntry {
                word: word.map(str::to_string),
                votes,
                confidence_sum: confidence,
                first_expert: expert,
            }),
        }
    }

    pub fn votes(&self, word: Option<&str>) -> usize {
        self.entries
            .iter()
            .find(|e| e.word.as_deref() == word)
            .map_or(0, |e| e.votes)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Step {
    /// Slot and word aligned; cost 0 when the word is already in the slot.
    Pair,
    /// Slot without a word from this hypothesis.
    Skip,
    /// Word without a slot; opens a new one.
    Insert,
}

#[derive(Debug, Clone, PartialEq)]
pub struct WordTransitionNetwork {
    slots: Vec<Slot>,
    hypotheses: usize,
    separator: char,
}

impl WordTransitionNetwork {
    pub fn new(separator: char) -> Self {
        Self {
            slots: Vec::new(),
            hypotheses: 0,
            separator,
        }
    }

    pub fn slots(&self) -> &[Slot] {
        &self.slots
    }

    pub fn hypotheses(&self) -> usize {
        self.hypotheses
    }

    pub fn separator(&self) -> char {
        self.separator
    }

    /// Aligns `hyp` against the network and merges it in. Returns the
    /// alignment cost in word edits.
    pub fn insert(&mut self, hyp: &Hypothesis) -> usize {
        let words = tokenize(&hyp.text, self.separator);
        let confidences: Vec<f64> = match &hyp.word_confidences {
            Some(c) if c.len() == words.len() => c.clone(),
            _ => vec![MISSING_CONFIDENCE; words.len()],
        };
        let expert = self.hypotheses;
        let (cost, steps) = self.align(&words);

        let mut merged = Vec::with_capacity(steps.len());
        let mut old = std::mem::take(&mut self.slots).into_iter();
        let mut next_word = 0;
        for step in steps {
            match step {
                Step::Pair => {
                    let mut slot = old.next().expect("alignment covers every slot");
                    slot.add(Some(words[next_word]), 1, confidences[next_word], expert);
                    next_word += 1;
                    merged.push(slot);
                }
                Step::Skip => {
                    let mut slot = old.next().expect("alignment covers every slot");
                    slot.add(None, 1, 0.0, expert);
                    merged.push(slot);
                }
                Step::Insert => {
                    let mut slot = Slot::default();
                    if expert > 0 {
                        slot.add(None, expert, 0.0, 0);
                    }
                    slot.add(Some(words[next_word]), 1, confidences[next_word], expert);
                    next_word += 1;
                    merged.push(slot);
                }
            }
        }
        self.slots = merged;
        self.hypotheses += 1;
        cost
    }

    /// Minimal-cost alignment of `words` to the slots. Ties prefer a pair
    /// (match before substitution), then a skipped slot, then an insertion.
    fn align(&self, words: &[&str]) -> (usize, Vec<Step>) {
        let n = self.slots.len();
        let m = words.len();
        let pair_cost = |i: usize, j: usize| usize::from(!self.slots[i].contains(Some(words[j])));
        let skip_cost = |i: usize| usize::from(!self.slots[i].contains(None));
        let mut cost = vec![vec![0usize; m + 1]; n + 1];
        for i in 1..=n {
            cost[i][0] = cost[i - 1][0] + skip_cost(i - 1);
        }
        for j in 1..=m {
            cost[0][j] = j;
        }
        for i in 1..=n {
            for j in 1..=m {
                cost[i][j] = (cost[i - 1][j - 1] + pair_cost(i - 1, j - 1))
                    .min(cost[i - 1][j] + skip_cost(i - 1))
                    .min(cost[i][j - 1] + 1);
            }
        }
        let mut steps = Vec::with_capacity(n + m);
        let (mut i, mut j) = (n, m);
        while i > 0 || j > 0 {
            if i > 0 && j > 0 && cost[i][j] == cost[i - 1][j - 1] + pair_cost(i - 1, j - 1) {
                steps.push(Step::Pair);
                i -= 1;
                j -= 1;
            } else if i > 0 && cost[i][j] == cost[i - 1][j] + skip_cost(i - 1) {
                steps.push(Step::Skip);
                i -= 1;
            } else {
                steps.push(Step::Insert);
                j -= 1;
            }
        }
        steps.reverse();
        (cost[n][m], steps)
    }
}

/// Functional form of [`WordTransitionNetwork::insert`].
pub fn align_into_wtn(mut wtn: WordTransitionNetwork, hyp: &Hypothesis) -> WordTransitionNetwork {
    wtn.insert(hyp);
    wtn
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CommitteeConfig {
    pub experts: usize,
    /// Weight of the vote share against the mean confidence.
    pub lambda: f64,
    pub null_confidence: f64,
    pub separator: char,
}

impl CommitteeConfig {
    pub fn new(experts: usize) -> Self {
        Self {
            experts,
            lambda: DEFAULT_VOTE_LAMBDA,
            null_confidence: DEFAULT_NULL_CONFIDENCE,
            separator: DEFAULT_SEPARATOR,
        }
    }

    pub fn with_lambda(mut self, lambda: f64) -> Self {
        self.lambda = lambda;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.experts == 0 {
            return Err(Error::InvalidParameter("a committee needs at least one expert".into()));
        }
        if !(0.0..=1.0).contains(&self.lambda) {
            return Err(Error::InvalidParameter(format!("lambda {} outside [0, 1]", self.lambda)));
        }
        if !(0.0..=1.0).contains(&self.null_confidence) {
            return Err(Error::InvalidParameter(format!(
                "null confidence {} outside [0, 1]",
                self.null_confidence
            )));
        }
        Ok(())
    }
}

/// Elects one entry per slot. A slot candidate scores
/// `lambda * votes / experts + (1 - lambda) * mean confidence`; NULL uses
/// the configured confidence and emits nothing. Ties go to the entry whose
/// first contributor ranks highest.
pub fn vote(wtn: &WordTransitionNetwork, config: &CommitteeConfig) -> Hypothesis {
    let n = config.experts.max(1) as f64;
    let mut words = Vec::new();
    let mut confidences = Vec::new();
    let mut score = 0.0;
    for slot in wtn.slots() {
        let mut best: Option<(f64, &SlotEntry)> = None;
        for entry in &slot.entries {
            let mean_conf = match entry.word {
                Some(_) => entry.confidence_sum / entry.votes as f64,
                None => config.null_confidence,
            };
            let s = config.lambda * (entry.votes as f64 / n) + (1.0 - config.lambda) * mean_conf;
            let better = match best {
                None => true,
                Some((bs, be)) => s > bs || (s == bs && entry.first_expert < be.first_expert),
            };
            if better {
                best = Some((s, entry));
            }
        }
        let (s, entry) = best.expect("slots are never empty");
        score += s.ln();
        if let Some(word) = &entry.word {
            words.push(word.as_str());
            confidences.push(s.clamp(0.0, 1.0));
        }
    }
    let text = words.join(&config.separator.to_string());
    Hypothesis::new(text, score).with_word_confidences(confidences)
}

/// Builds the network from `hyps` in the given order and votes.
pub fn combine(hyps: &[Hypothesis], config: &CommitteeConfig) -> Result<Hypothesis> {
    config.validate()?;
    if hyps.is_empty() {
        return Err(Error::NoAcceptedString);
    }
    if hyps.len() == 1 {
        return Ok(hyps[0].clone());
    }
    let mut wtn = WordTransitionNetwork::new(config.separator);
    for h in hyps {
        wtn.insert(h);
    }
    let config = CommitteeConfig {
        experts: hyps.len(),
        ..*config
    };
    Ok(vote(&wtn, &config))
}

/// Decodes each expert's matrix with the dictionary decoder and combines
/// the results. `matrices` must be ordered by expert rank, best first.
/// Experts whose decode fails are left out of the vote.
pub fn committee_decode(
    matrices: &[ConfidenceMatrix],
    lexicon: &Lexicon,
    params: &DecodeParams,
    config: &CommitteeConfig,
) -> Result<Hypothesis> {
    config.validate()?;
    if matrices.len() != config.experts {
        return Err(Error::LengthMismatch {
            expected: config.experts,
            found: matrices.len(),
        });
    }
    if matrices.windows(2).any(|w| w[0].alphabet() != w[1].alphabet()) {
        return Err(Error::AlphabetMismatch);
    }
    let decoded: Vec<Result<Hypothesis>> = matrices
        .par_iter()
        .map(|m| decode_dictionary(m, lexicon, params))
        .collect();
    let mut hyps = Vec::with_capacity(decoded.len());
    let mut last_err = None;
    for (rank, d) in decoded.into_iter().enumerate() {
        match d {
            Ok(h) => hyps.push(h),
            Err(e) => {
                log::warn!("expert {rank} failed: {e}");
                last_err = Some(e);
            }
        }
    }
    if hyps.is_empty() {
        return Err(match last_err {
            Some(Error::EmptyLexicon) => Error::EmptyLexicon,
            Some(Error::InvalidParameter(p)) => Error::InvalidParameter(p),
            _ => Error::NoAcceptedString,
        });
    }
    combine(&hyps, config)
}
