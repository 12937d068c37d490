//! Path semantics: collapsing frame labels into strings and scoring paths
//! and strings against a confidence matrix.
//!
//! All scores are natural-log probabilities; `f64::NEG_INFINITY` stands for
//! an impossible path or string.

use std::ops::Range;

use crate::alphabet::Alphabet;
use crate::error::{Error, Result};
use crate::matrix::ConfidenceMatrix;

/// Default NaC confidence above which a frame counts as a character gap.
pub const DEFAULT_BOUNDARY_THRESHOLD: f64 = 0.5;

/// `ln(e^a + e^b)` with `-inf` as the additive identity.
#[inline]
pub fn log_add(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let (hi, lo) = if a > b { (a, b) } else { (b, a) };
    hi + (lo - hi).exp().ln_1p()
}

/// One label per frame; NaC allowed.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Path(pub Vec<usize>);

impl Path {
    pub fn new(labels: Vec<usize>) -> Self {
        Self(labels)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn labels(&self) -> &[usize] {
        &self.0
    }

    /// Parses a path written with one character per frame, `nac` standing
    /// for NaC.
    pub fn parse(text: &str, alphabet: &Alphabet, nac: char) -> Result<Self> {
        text.chars()
            .map(|c| {
                if c == nac {
                    Ok(alphabet.nac_index())
                } else {
                    alphabet.index_of(c).ok_or(Error::InvalidSymbol(c))
                }
            })
            .collect::<Result<Vec<_>>>()
            .map(Self)
    }
}

/// An emitted symbol and the frames of the run that produced it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EmittedSymbol {
    pub symbol: usize,
    pub frames: Range<usize>,
}

/// Merges runs of identical labels, then drops NaC. Returns the surviving
/// labels with their run extents.
pub fn collapse_runs(labels: &[usize], nac: usize) -> Vec<EmittedSymbol> {
    let mut out = Vec::new();
    let mut start = 0;
    for t in 1..=labels.len() {
        if t == labels.len() || labels[t] != labels[start] {
            if labels[start] != nac {
                out.push(EmittedSymbol {
                    symbol: labels[start],
                    frames: start..t,
                });
            }
            start = t;
        }
    }
    out
}

pub fn collapse_labels(labels: &[usize], nac: usize) -> Vec<usize> {
    collapse_runs(labels, nac).into_iter().map(|e| e.symbol).collect()
}

/// The string a path stands for.
pub fn collapse(path: &Path, alphabet: &Alphabet) -> String {
    collapse_labels(path.labels(), alphabet.nac_index())
        .into_iter()
        .filter_map(|s| alphabet.char_at(s))
        .collect()
}

/// Sum of per-frame log confidences along `path`.
pub fn path_log_score(matrix: &ConfidenceMatrix, path: &Path) -> Result<f64> {
    if path.len() != matrix.frames() {
        return Err(Error::LengthMismatch {
            expected: matrix.frames(),
            found: path.len(),
        });
    }
    let width = matrix.width();
    let mut total = 0.0;
    for (t, &label) in path.labels().iter().enumerate() {
        if label >= width {
            return Err(Error::InvalidParameter(format!(
                "label {label} at frame {t} outside alphabet of size {width}"
            )));
        }
        total += matrix.log_prob(t, label);
        if total == f64::NEG_INFINITY {
            break;
        }
    }
    Ok(total)
}

/// Log of the total probability of every path collapsing to `text`.
pub fn string_log_score(matrix: &ConfidenceMatrix, text: &str) -> Result<f64> {
    let labels = matrix.alphabet().encode(text)?;
    Ok(labels_log_score(matrix, &labels))
}

/// [`string_log_score`] on already encoded (NaC-free) labels.
pub fn labels_log_score(matrix: &ConfidenceMatrix, labels: &[usize]) -> f64 {
    let nac = matrix.alphabet().nac_index();
    let ext = extended_labels(labels, nac);
    let n = ext.len();
    let mut alpha = vec![f64::NEG_INFINITY; n];
    let mut next = vec![f64::NEG_INFINITY; n];
    alpha[0] = matrix.log_prob(0, ext[0]);
    if n > 1 {
        alpha[1] = matrix.log_prob(0, ext[1]);
    }
    for t in 1..matrix.frames() {
        let row = matrix.log_row(t);
        for s in 0..n {
            let mut acc = alpha[s];
            if s >= 1 {
                acc = log_add(acc, alpha[s - 1]);
            }
            if can_skip(&ext, s) {
                acc = log_add(acc, alpha[s - 2]);
            }
            next[s] = if acc == f64::NEG_INFINITY {
                acc
            } else {
                acc + row[ext[s]]
            };
        }
        std::mem::swap(&mut alpha, &mut next);
    }
    if n > 1 {
        log_add(alpha[n - 1], alpha[n - 2])
    } else {
        alpha[0]
    }
}

/// Most probable single path that collapses to `labels`. Each frame maps to
/// the index of the label it emits, or `None` for NaC frames.
pub fn forced_alignment(matrix: &ConfidenceMatrix, labels: &[usize]) -> Option<Vec<Option<usize>>> {
    let nac = matrix.alphabet().nac_index();
    let ext = extended_labels(labels, nac);
    let n = ext.len();
    let frames = matrix.frames();
    let mut score = vec![f64::NEG_INFINITY; n];
    let mut back = vec![0usize; frames * n];
    score[0] = matrix.log_prob(0, ext[0]);
    if n > 1 {
        score[1] = matrix.log_prob(0, ext[1]);
    }
    let mut next = vec![f64::NEG_INFINITY; n];
    for t in 1..frames {
        for s in 0..n {
            let mut best = score[s];
            let mut from = s;
            if s >= 1 && score[s - 1] > best {
                best = score[s - 1];
                from = s - 1;
            }
            if can_skip(&ext, s) && score[s - 2] > best {
                best = score[s - 2];
                from = s - 2;
            }
            back[t * n + s] = from;
            next[s] = best + matrix.log_prob(t, ext[s]);
        }
        std::mem::swap(&mut score, &mut next);
    }
    let mut state = if n > 1 && score[n - 2] > score[n - 1] {
        n - 2
    } else {
        n - 1
    };
    if score[state] == f64::NEG_INFINITY {
        return None;
    }
    let mut out = vec![None; frames];
    for t in (0..frames).rev() {
        if state % 2 == 1 {
            out[t] = Some(state / 2);
        }
        if t > 0 {
            state = back[t * n + state];
        }
    }
    Some(out)
}

/// Maximal runs of frames whose NaC confidence reaches `threshold`.
pub fn detect_boundaries(matrix: &ConfidenceMatrix, threshold: f64) -> Result<Vec<Range<usize>>> {
    if !(threshold > 0.0 && threshold < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "boundary threshold {threshold} outside (0, 1)"
        )));
    }
    let nac = matrix.alphabet().nac_index();
    let mut out = Vec::new();
    let mut open: Option<usize> = None;
    for t in 0..matrix.frames() {
        let gap = matrix.prob(t, nac) >= threshold;
        match (gap, open) {
            (true, None) => open = Some(t),
            (false, Some(start)) => {
                out.push(start..t);
                open = None;
            }
            _ => {}
        }
    }
    if let Some(start) = open {
        out.push(start..matrix.frames());
    }
    Ok(out)
}

fn extended_labels(labels: &[usize], nac: usize) -> Vec<usize> {
    let mut ext = Vec::with_capacity(2 * labels.len() + 1);
    ext.push(nac);
    for &l in labels {
        ext.push(l);
        ext.push(nac);
    }
    ext
}

#[inline]
fn can_skip(ext: &[usize], s: usize) -> bool {
    s >= 2 && s % 2 == 1 && ext[s] != ext[s - 2]
}
