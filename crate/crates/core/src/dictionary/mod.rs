//! Dictionary-constrained decoding with a unigram word prior.
//!
//! A line is zero or more tokens joined by single separators. Each token is
//! a lexicon word, optionally with punctuation attached on either side. The
//! search maximizes
//!
//! ```text
//! ln P_ctc(text) + lm_weight * sum ln(count(w) / total) + insertion_bonus * #words
//! ```

mod lexicon;

use std::str::FromStr;

use smallvec::SmallVec;

pub use lexicon::{build_lexicon, Lexicon, LexiconPolicy};

use crate::alphabet::Alphabet;
use crate::error::{Error, Result};
use crate::expression::ExpressionModel;
use crate::hypothesis::{self, Hypothesis};
use crate::matrix::ConfidenceMatrix;
use crate::search::{self, BeamWidth, Both, PrefixConstraint, SearchResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum OovPolicy {
    /// Every token must contain a lexicon word.
    #[default]
    Reject,
    /// Tokens made only of punctuation are also allowed.
    PassThroughPunctuation,
}

impl FromStr for OovPolicy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "reject" => Ok(OovPolicy::Reject),
            "pass-through-punctuation" | "pass-through" => Ok(OovPolicy::PassThroughPunctuation),
            other => Err(Error::InvalidParameter(format!("unknown OOV policy {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecodeParams {
    /// Weight of the unigram log prior.
    pub lm_weight: f64,
    /// Added once per emitted word.
    pub insertion_bonus: f64,
    pub beam: BeamWidth,
    pub oov: OovPolicy,
}

impl Default for DecodeParams {
    fn default() -> Self {
        Self {
            lm_weight: 1.0,
            insertion_bonus: 0.0,
            beam: BeamWidth::default(),
            oov: OovPolicy::Reject,
        }
    }
}

impl DecodeParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.lm_weight >= 0.0 && self.lm_weight.is_finite()) {
            return Err(Error::InvalidParameter(format!("lm weight {} must be >= 0", self.lm_weight)));
        }
        if !self.insertion_bonus.is_finite() {
            return Err(Error::InvalidParameter("insertion bonus must be finite".into()));
        }
        self.beam.validate()?;
        Ok(())
    }
}

struct Node {
    children: Vec<(usize, u32)>,
    /// Score of ending a word here, for terminal nodes.
    word_score: Option<f64>,
}

/// The lexicon language laid out over one alphabet's symbol indices.
struct DictionaryConstraint {
    nodes: Vec<Node>,
    punctuation: Vec<usize>,
    separators: Vec<usize>,
    pass_through: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Phase {
    LineStart,
    AfterSeparator,
    Lead,
    Word(u32),
    Trail,
}

#[derive(Debug, Clone, Copy)]
struct Alt {
    phase: Phase,
    score: f64,
}

/// Parses of a prefix that are still open; more than one only when a symbol
/// is both punctuation and part of a word.
type DictState = SmallVec<[Alt; 2]>;

impl DictionaryConstraint {
    fn new(lexicon: &Lexicon, alphabet: &Alphabet, params: &DecodeParams) -> Self {
        let total = lexicon.total_count() as f64;
        let nodes = lexicon
            .trie()
            .iter()
            .map(|n| {
                let mut children: Vec<(usize, u32)> = n
                    .children
                    .iter()
                    .filter_map(|(&c, &child)| alphabet.index_of(c).map(|s| (s, child)))
                    .collect();
                children.sort_unstable();
                Node {
                    children,
                    word_score: (n.count > 0)
                        .then(|| params.lm_weight * (n.count as f64 / total).ln() + params.insertion_bonus),
                }
            })
            .collect();
        let indices = |set: &std::collections::BTreeSet<char>| {
            let mut v: Vec<usize> = set.iter().filter_map(|&c| alphabet.index_of(c)).collect();
            v.sort_unstable();
            v
        };
        Self {
            nodes,
            punctuation: indices(&lexicon.policy().punctuation),
            separators: indices(&lexicon.policy().separators),
            pass_through: params.oov == OovPolicy::PassThroughPunctuation,
        }
    }

    fn expand(&self, alt: Alt, out: &mut Vec<(usize, Alt)>) {
        let Alt { phase, score } = alt;
        let push = |out: &mut Vec<(usize, Alt)>, symbols: &[usize], phase: Phase, score: f64| {
            out.extend(symbols.iter().map(|&s| (s, Alt { phase, score })));
        };
        let word_starts = |out: &mut Vec<(usize, Alt)>| {
            out.extend(self.nodes[0].children.iter().map(|&(s, child)| {
                (s, Alt { phase: Phase::Word(child), score })
            }));
        };
        match phase {
            Phase::LineStart | Phase::AfterSeparator => {
                push(out, &self.punctuation, Phase::Lead, score);
                word_starts(out);
            }
            Phase::Lead => {
                push(out, &self.punctuation, Phase::Lead, score);
                word_starts(out);
                if self.pass_through {
                    push(out, &self.separators, Phase::AfterSeparator, score);
                }
            }
            Phase::Word(node) => {
                let node = &self.nodes[node as usize];
                out.extend(node.children.iter().map(|&(s, child)| {
                    (s, Alt { phase: Phase::Word(child), score })
                }));
                if let Some(w) = node.word_score {
                    push(out, &self.punctuation, Phase::Trail, score + w);
                    push(out, &self.separators, Phase::AfterSeparator, score + w);
                }
            }
            Phase::Trail => {
                push(out, &self.punctuation, Phase::Trail, score);
                push(out, &self.separators, Phase::AfterSeparator, score);
            }
        }
    }

    fn alt_final(&self, alt: &Alt) -> Option<f64> {
        match alt.phase {
            Phase::LineStart | Phase::Trail => Some(alt.score),
            Phase::Lead => self.pass_through.then_some(alt.score),
            Phase::Word(node) => self.nodes[node as usize].word_score.map(|w| alt.score + w),
            Phase::AfterSeparator => None,
        }
    }
}

impl PrefixConstraint for DictionaryConstraint {
    type State = DictState;

    fn initial(&self) -> DictState {
        SmallVec::from_elem(
            Alt {
                phase: Phase::LineStart,
                score: 0.0,
            },
            1,
        )
    }

    fn successors(&self, state: &DictState, emit: &mut dyn FnMut(usize, DictState)) {
        let mut moves = Vec::new();
        for alt in state {
            self.expand(*alt, &mut moves);
        }
        moves.sort_by_key(|(s, _)| *s);
        let mut i = 0;
        while i < moves.len() {
            let symbol = moves[i].0;
            let mut next: DictState = SmallVec::new();
            while i < moves.len() && moves[i].0 == symbol {
                let alt = moves[i].1;
                match next.iter_mut().find(|a| a.phase == alt.phase) {
                    Some(existing) => existing.score = existing.score.max(alt.score),
                    None => next.push(alt),
                }
                i += 1;
            }
            emit(symbol, next);
        }
    }

    fn prefix_score(&self, state: &DictState) -> f64 {
        state.iter().map(|a| a.score).fold(f64::NEG_INFINITY, f64::max)
    }

    fn final_score(&self, state: &DictState) -> Option<f64> {
        state.iter().filter_map(|a| self.alt_final(a)).reduce(f64::max)
    }
}

fn check(matrix: &ConfidenceMatrix, lexicon: &Lexicon, params: &DecodeParams) -> Result<()> {
    params.validate()?;
    if lexicon.is_empty() {
        return Err(Error::EmptyLexicon);
    }
    if matrix.frames() == 0 {
        return Err(Error::InvalidParameter("matrix has no frames".into()));
    }
    Ok(())
}

fn finish(matrix: &ConfidenceMatrix, lexicon: &Lexicon, found: Option<SearchResult>) -> Result<Hypothesis> {
    let found = found.ok_or(Error::NoAcceptedString)?;
    let alphabet = matrix.alphabet();
    let text: String = found.labels.iter().filter_map(|&s| alphabet.char_at(s)).collect();
    let separator = lexicon.policy().primary_separator();
    let confidences = hypothesis::marginal_word_confidences(matrix, &text, separator);
    Ok(Hypothesis::new(text, found.objective).with_word_confidences(confidences))
}

/// Best line made of lexicon words under the combined CTC and unigram
/// objective. The hypothesis score is that objective.
pub fn decode_dictionary(matrix: &ConfidenceMatrix, lexicon: &Lexicon, params: &DecodeParams) -> Result<Hypothesis> {
    check(matrix, lexicon, params)?;
    let constraint = DictionaryConstraint::new(lexicon, matrix.alphabet(), params);
    finish(matrix, lexicon, search::prefix_search(matrix, &constraint, params.beam))
}

/// [`decode_dictionary`] restricted further to strings the expression model
/// accepts.
pub fn decode_dictionary_with_expression(
    matrix: &ConfidenceMatrix,
    lexicon: &Lexicon,
    params: &DecodeParams,
    model: &ExpressionModel,
) -> Result<Hypothesis> {
    check(matrix, lexicon, params)?;
    if matrix.alphabet() != model.alphabet() {
        return Err(Error::AlphabetMismatch);
    }
    let constraint = Both(DictionaryConstraint::new(lexicon, matrix.alphabet(), params), model);
    finish(matrix, lexicon, search::prefix_search(matrix, &constraint, params.beam))
}
