//! Seeded synthetic confidence matrices for tests and demos.
//!
//! Each character of the text occupies `frames_per_char` frames: the first
//! `frames_per_char - 1` are one-hot on the character, the last is one-hot on
//! NaC, so repeated characters stay apart. An empty text gets
//! `frames_per_char` NaC frames.
//!
//! Noise is applied per row. With `E ~ Exp(1)` and `d ~ Dirichlet(0.1, ..)`
//! over all columns, the row becomes `(1 - w) * clean + w * d` where
//! `w = min(1, noise * E)`. Most rows stay close to their clean profile while
//! a heavy tail of rows gets swamped by a few random symbols, which is roughly
//! what a recognizer's mistakes look like.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1, Gamma};

use crate::alphabet::Alphabet;
use crate::error::{Error, Result};
use crate::matrix::ConfidenceMatrix;

pub const DIRICHLET_CONCENTRATION: f64 = 0.1;

pub fn generate_synthetic(
    text: &str,
    alphabet: &Arc<Alphabet>,
    frames_per_char: usize,
    noise: f64,
    seed: u64,
) -> Result<ConfidenceMatrix> {
    if frames_per_char < 2 {
        return Err(Error::InvalidParameter(format!(
            "frames_per_char must be at least 2, got {frames_per_char}"
        )));
    }
    if !(0.0..1.0).contains(&noise) {
        return Err(Error::InvalidParameter(format!("noise must lie in [0, 1), got {noise}")));
    }
    let labels = alphabet.encode(text)?;
    let nac = alphabet.nac_index();
    let mut clean = Vec::with_capacity(labels.len().max(1) * frames_per_char);
    if labels.is_empty() {
        clean.resize(frames_per_char, nac);
    }
    for &l in &labels {
        clean.extend(std::iter::repeat_n(l, frames_per_char - 1));
        clean.push(nac);
    }

    let width = alphabet.len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let gamma = Gamma::new(DIRICHLET_CONCENTRATION, 1.0).expect("valid gamma parameters");
    let mut probs = vec![0.0; clean.len() * width];
    let mut d = vec![0.0; width];
    for (t, &label) in clean.iter().enumerate() {
        let row = &mut probs[t * width..(t + 1) * width];
        row[label] = 1.0;
        if noise == 0.0 {
            continue;
        }
        let e: f64 = Exp1.sample(&mut rng);
        let w = (noise * e).min(1.0);
        let mut sum = 0.0;
        for v in d.iter_mut() {
            *v = gamma.sample(&mut rng);
            sum += *v;
        }
        if sum <= 0.0 {
            // every draw underflowed; fall back to a single random column
            d.fill(0.0);
            d[rng.random_range(0..width)] = 1.0;
            sum = 1.0;
        }
        for (p, &x) in row.iter_mut().zip(&d) {
            *p = (1.0 - w) * *p + w * x / sum;
        }
        let total: f64 = row.iter().sum();
        row.iter_mut().for_each(|p| *p /= total);
    }
    ConfidenceMatrix::from_flat(alphabet.clone(), clean.len(), probs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::best_path::decode_best_path;

    fn abc() -> Arc<Alphabet> {
        Arc::new(Alphabet::from_chars("ab ").unwrap())
    }

    #[test]
    fn clean_matrix_decodes_to_text() {
        for text in ["ab", "aa", "", "a  b", "bbb"] {
            let m = generate_synthetic(text, &abc(), 2, 0.0, 1).unwrap();
            assert_eq!(decode_best_path(&m).text, text);
        }
        let m = generate_synthetic("aa", &abc(), 2, 0.0, 1).unwrap();
        assert_eq!(m.frames(), 4);
    }

    #[test]
    fn deterministic_per_seed() {
        let a = generate_synthetic("abba", &abc(), 3, 0.3, 7).unwrap();
        let b = generate_synthetic("abba", &abc(), 3, 0.3, 7).unwrap();
        let c = generate_synthetic("abba", &abc(), 3, 0.3, 8).unwrap();
        assert_eq!(a.as_flat(), b.as_flat());
        assert_ne!(a.as_flat(), c.as_flat());
    }

    #[test]
    fn rows_are_normalized() {
        let m = generate_synthetic("abab ba", &abc(), 4, 0.9, 3).unwrap();
        for row in m.rows() {
            assert!((row.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn rejects_bad_input() {
        assert!(matches!(generate_synthetic("az", &abc(), 2, 0.0, 0), Err(Error::InvalidSymbol('z'))));
        assert!(generate_synthetic("a", &abc(), 1, 0.0, 0).is_err());
        assert!(generate_synthetic("a", &abc(), 2, 1.0, 0).is_err());
    }
}
