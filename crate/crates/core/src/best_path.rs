//! Greedy best-path decoding.

use crate::alphabet::DEFAULT_SEPARATOR;
use crate::ctc::{self, Path};
use crate::hypothesis::Hypothesis;
use crate::matrix::ConfidenceMatrix;

/// Per-frame argmax; ties go to the lowest symbol index.
pub fn best_path(matrix: &ConfidenceMatrix) -> Path {
    let labels = matrix
        .rows()
        .map(|row| {
            let mut best = 0;
            for (s, &p) in row.iter().enumerate().skip(1) {
                if p > row[best] {
                    best = s;
                }
            }
            best
        })
        .collect();
    Path(labels)
}

pub fn decode_best_path(matrix: &ConfidenceMatrix) -> Hypothesis {
    decode_best_path_with_separator(matrix, DEFAULT_SEPARATOR)
}

/// Collapses the argmax path. The score is that path's log score, and each
/// word's confidence is the lowest winning frame confidence over the frames
/// it spans.
pub fn decode_best_path_with_separator(matrix: &ConfidenceMatrix, separator: char) -> Hypothesis {
    let alphabet = matrix.alphabet();
    let path = best_path(matrix);
    let score = ctc::path_log_score(matrix, &path).expect("path has one label per frame");
    let runs = ctc::collapse_runs(path.labels(), alphabet.nac_index());

    let mut text = String::with_capacity(runs.len());
    let mut confidences = Vec::new();
    let mut word_start: Option<usize> = None;
    let mut word_end = 0;
    let close_word = |start: usize, end: usize, confidences: &mut Vec<f64>| {
        let lowest = (start..end)
            .map(|t| matrix.prob(t, path.labels()[t]))
            .fold(1.0f64, f64::min);
        confidences.push(lowest);
    };
    for run in &runs {
        let c = alphabet.char_at(run.symbol).expect("collapse drops NaC");
        text.push(c);
        if c == separator {
            if let Some(start) = word_start.take() {
                close_word(start, word_end, &mut confidences);
            }
        } else {
            word_start.get_or_insert(run.frames.start);
            word_end = run.frames.end;
        }
    }
    if let Some(start) = word_start {
        close_word(start, word_end, &mut confidences);
    }
    Hypothesis::new(text, score).with_word_confidences(confidences)
}
