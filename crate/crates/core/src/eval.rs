//! Character and word error rates, and ranking experts by them.

use rayon::prelude::*;

use crate::alphabet::Alphabet;
use crate::error::{Error, Result};
use crate::hypothesis::Hypothesis;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct EditCounts {
    pub distance: usize,
    pub substitutions: usize,
    pub insertions: usize,
    pub deletions: usize,
}

impl std::ops::AddAssign for EditCounts {
    fn add_assign(&mut self, rhs: Self) {
        self.distance += rhs.distance;
        self.substitutions += rhs.substitutions;
        self.insertions += rhs.insertions;
        self.deletions += rhs.deletions;
    }
}

/// Unit-cost Levenshtein distance from `reference` to `hypothesis`. The
/// operation counts come from one optimal alignment, preferring match, then
/// substitution, deletion and insertion when several are optimal.
pub fn edit_distance<T: PartialEq>(reference: &[T], hypothesis: &[T]) -> EditCounts {
    let n = reference.len();
    let m = hypothesis.len();
    let width = m + 1;
    let mut d = vec![0usize; (n + 1) * width];
    for j in 0..=m {
        d[j] = j;
    }
    for i in 1..=n {
        d[i * width] = i;
        for j in 1..=m {
            let sub = d[(i - 1) * width + j - 1] + usize::from(reference[i - 1] != hypothesis[j - 1]);
            let del = d[(i - 1) * width + j] + 1;
            let ins = d[i * width + j - 1] + 1;
            d[i * width + j] = sub.min(del).min(ins);
        }
    }
    let mut counts = EditCounts {
        distance: d[n * width + m],
        ..EditCounts::default()
    };
    let (mut i, mut j) = (n, m);
    while i > 0 || j > 0 {
        let here = d[i * width + j];
        if i > 0 && j > 0 {
            let same = reference[i - 1] == hypothesis[j - 1];
            if here == d[(i - 1) * width + j - 1] + usize::from(!same) {
                if !same {
                    counts.substitutions += 1;
                }
                i -= 1;
                j -= 1;
                continue;
            }
        }
        if i > 0 && here == d[(i - 1) * width + j] + 1 {
            counts.deletions += 1;
            i -= 1;
        } else {
            counts.insertions += 1;
            j -= 1;
        }
    }
    counts
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct EvalOptions {
    pub ignore_case: bool,
    pub ignore_punctuation: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LineEval {
    pub chars: EditCounts,
    pub words: EditCounts,
    pub reference_chars: usize,
    pub reference_words: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub lines: Vec<LineEval>,
    pub chars: EditCounts,
    pub words: EditCounts,
    pub reference_chars: usize,
    pub reference_words: usize,
    pub cer: f64,
    pub wer: f64,
}

impl EvalReport {
    /// `key=value` lines for scripts.
    pub fn to_key_values(&self) -> String {
        format!(
            "lines={}\ncer={:.6}\nwer={:.6}\nref_chars={}\nref_words={}\n\
             char_sub={}\nchar_ins={}\nchar_del={}\nword_sub={}\nword_ins={}\nword_del={}\n",
            self.lines.len(),
            self.cer,
            self.wer,
            self.reference_chars,
            self.reference_words,
            self.chars.substitutions,
            self.chars.insertions,
            self.chars.deletions,
            self.words.substitutions,
            self.words.insertions,
            self.words.deletions,
        )
    }

    pub fn to_table(&self) -> String {
        let mut out = String::new();
        out.push_str("metric  rate      edits  sub    ins    del    ref\n");
        for (name, rate, c, r) in [
            ("CER", self.cer, self.chars, self.reference_chars),
            ("WER", self.wer, self.words, self.reference_words),
        ] {
            out.push_str(&format!(
                "{name:<7} {rate:<9.4} {:<6} {:<6} {:<6} {:<6} {r}\n",
                c.distance, c.substitutions, c.insertions, c.deletions
            ));
        }
        out
    }
}

fn prepare(text: &str, options: &EvalOptions) -> String {
    text.chars()
        .filter(|c| !(options.ignore_punctuation && !c.is_alphanumeric() && !c.is_whitespace()))
        .map(|c| if options.ignore_case { c.to_lowercase().next().unwrap_or(c) } else { c })
        .collect()
}

fn rate(edits: usize, reference: usize) -> f64 {
    // an empty reference counts every hypothesis token as one error
    edits as f64 / reference.max(1) as f64
}

/// Scores each hypothesis against its reference. References are normalized
/// with the alphabet first; words are whitespace-separated.
pub fn evaluate(hyps: &[Hypothesis], refs: &[String], alphabet: &Alphabet) -> Result<EvalReport> {
    evaluate_with(hyps, refs, alphabet, &EvalOptions::default())
}

pub fn evaluate_with(
    hyps: &[Hypothesis],
    refs: &[String],
    alphabet: &Alphabet,
    options: &EvalOptions,
) -> Result<EvalReport> {
    let texts: Vec<&str> = hyps.iter().map(|h| h.text.as_str()).collect();
    evaluate_texts(&texts, refs, alphabet, options)
}

pub fn evaluate_texts<S: AsRef<str> + Sync>(
    hyps: &[S],
    refs: &[String],
    alphabet: &Alphabet,
    options: &EvalOptions,
) -> Result<EvalReport> {
    if hyps.len() != refs.len() {
        return Err(Error::LengthMismatch {
            expected: refs.len(),
            found: hyps.len(),
        });
    }
    let normalized: Vec<String> = refs
        .iter()
        .map(|r| alphabet.normalize_transcript(r))
        .collect::<Result<_>>()?;
    let lines: Vec<LineEval> = hyps
        .par_iter()
        .zip(normalized.par_iter())
        .map(|(h, r)| {
            let h = prepare(h.as_ref(), options);
            let r = prepare(r, options);
            let hc: Vec<char> = h.chars().collect();
            let rc: Vec<char> = r.chars().collect();
            let hw: Vec<&str> = h.split_whitespace().collect();
            let rw: Vec<&str> = r.split_whitespace().collect();
            LineEval {
                chars: edit_distance(&rc, &hc),
                words: edit_distance(&rw, &hw),
                reference_chars: rc.len(),
                reference_words: rw.len(),
            }
        })
        .collect();
    let mut chars = EditCounts::default();
    let mut words = EditCounts::default();
    let (mut reference_chars, mut reference_words) = (0, 0);
    for line in &lines {
        chars += line.chars;
        words += line.words;
        reference_chars += line.reference_chars;
        reference_words += line.reference_words;
    }
    Ok(EvalReport {
        cer: rate(chars.distance, reference_chars),
        wer: rate(words.distance, reference_words),
        lines,
        chars,
        words,
        reference_chars,
        reference_words,
    })
}

/// Expert indices from best to worst: ascending WER, then CER, then input
/// order.
pub fn rank_experts(reports: &[EvalReport]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..reports.len()).collect();
    order.sort_by(|&a, &b| {
        reports[a]
            .wer
            .total_cmp(&reports[b].wer)
            .then(reports[a].cer.total_cmp(&reports[b].cer))
    });
    order
}
