use std::ops::Range;

use crate::ctc;
use crate::matrix::ConfidenceMatrix;

/// A decoded line.
#[derive(Debug, Clone, PartialEq)]
pub struct Hypothesis {
    pub text: String,
    /// Log score; `-inf` marks an impossible result.
    pub score: f64,
    /// One value in `[0, 1]` per separator-delimited word of `text`.
    pub word_confidences: Option<Vec<f64>>,
}

impl Hypothesis {
    pub fn new(text: impl Into<String>, score: f64) -> Self {
        Self {
            text: text.into(),
            score,
            word_confidences: None,
        }
    }

    pub fn with_word_confidences(mut self, confidences: Vec<f64>) -> Self {
        self.word_confidences = Some(confidences);
        self
    }

    pub fn words(&self, separator: char) -> Vec<&str> {
        tokenize(&self.text, separator)
    }
}

/// Non-empty pieces of `text` between separators.
pub fn tokenize(text: &str, separator: char) -> Vec<&str> {
    text.split(separator).filter(|w| !w.is_empty()).collect()
}

/// Character-index ranges of the separator-delimited words of `chars`.
pub fn word_char_spans(chars: &[char], separator: char) -> Vec<Range<usize>> {
    let mut spans = Vec::new();
    let mut start = None;
    for (i, &c) in chars.iter().enumerate() {
        match (c == separator, start) {
            (false, None) => start = Some(i),
            (true, Some(s)) => {
                spans.push(s..i);
                start = None;
            }
            _ => {}
        }
    }
    if let Some(s) = start {
        spans.push(s..chars.len());
    }
    spans
}

/// Per-word confidence as the CTC probability of the word restricted to
/// the frames it occupies in the best forced alignment of `text`.
pub(crate) fn marginal_word_confidences(
    matrix: &ConfidenceMatrix,
    text: &str,
    separator: char,
) -> Vec<f64> {
    let chars: Vec<char> = text.chars().collect();
    let spans = word_char_spans(&chars, separator);
    let Ok(labels) = matrix.alphabet().encode(text) else {
        return vec![0.0; spans.len()];
    };
    let Some(alignment) = ctc::forced_alignment(matrix, &labels) else {
        return vec![0.0; spans.len()];
    };
    // first and last frame emitting each character
    let mut first = vec![usize::MAX; chars.len()];
    let mut last = vec![0usize; chars.len()];
    for (t, slot) in alignment.iter().enumerate() {
        if let Some(pos) = *slot {
            first[pos] = first[pos].min(t);
            last[pos] = t;
        }
    }
    spans
        .iter()
        .map(|span| {
            let frames = first[span.start]..last[span.end - 1] + 1;
            let word = &labels[span.clone()];
            match matrix.slice_frames(frames) {
                Ok(sub) => ctc::labels_log_score(&sub, word).exp().clamp(0.0, 1.0),
                Err(_) => 0.0,
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tokenize_skips_empty_pieces() {
        assert_eq!(tokenize(" a  b ", ' '), vec!["a", "b"]);
        assert!(tokenize("", ' ').is_empty());
    }

    #[test]
    fn spans() {
        let chars: Vec<char> = "ab cd".chars().collect();
        assert_eq!(word_char_spans(&chars, ' '), vec![0..2, 3..5]);
        let chars: Vec<char> = " x ".chars().collect();
        assert_eq!(word_char_spans(&chars, ' '), vec![1..2]);
    }
}
