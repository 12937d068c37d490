//! The confidence matrix: one probability vector over the alphabet per frame.

use std::ops::Range;
use std::sync::Arc;

use crate::alphabet::Alphabet;
use crate::error::{Error, Result};

/// Rows deviating from unit sum by more than this are rejected.
pub const ROW_SUM_REJECT: f64 = 1e-3;
/// Rows deviating by more than this (but within [`ROW_SUM_REJECT`]) are
/// renormalized.
pub const ROW_SUM_RENORMALIZE: f64 = 1e-6;

#[derive(Debug, Clone)]
pub struct ConfidenceMatrix {
    alphabet: Arc<Alphabet>,
    frames: usize,
    probs: Vec<f64>,
    log_probs: Vec<f64>,
}

impl PartialEq for ConfidenceMatrix {
    fn eq(&self, other: &Self) -> bool {
        self.frames == other.frames && self.probs == other.probs && self.alphabet == other.alphabet
    }
}

impl ConfidenceMatrix {
    pub fn new(alphabet: Arc<Alphabet>, rows: Vec<Vec<f64>>) -> Result<Self> {
        let width = alphabet.len();
        let frames = rows.len();
        let mut flat = Vec::with_capacity(frames * width);
        for (t, row) in rows.into_iter().enumerate() {
            if row.len() != width {
                return Err(Error::InvariantViolation {
                    row: t,
                    reason: format!("expected {width} entries, found {}", row.len()),
                });
            }
            flat.extend(row);
        }
        Self::from_flat(alphabet, frames, flat)
    }

    /// Builds a matrix from row-major data of `frames * alphabet.len()`
    /// values, validating and (within tolerance) renormalizing every row.
    pub fn from_flat(alphabet: Arc<Alphabet>, frames: usize, mut probs: Vec<f64>) -> Result<Self> {
        let width = alphabet.len();
        if frames == 0 {
            return Err(Error::InvariantViolation {
                row: 0,
                reason: "matrix has no frames".into(),
            });
        }
        if probs.len() != frames * width {
            return Err(Error::LengthMismatch {
                expected: frames * width,
                found: probs.len(),
            });
        }
        for (t, row) in probs.chunks_mut(width).enumerate() {
            if let Some(bad) = row.iter().find(|p| !p.is_finite() || **p < 0.0) {
                return Err(Error::InvariantViolation {
                    row: t,
                    reason: format!("entry {bad} is not a finite nonnegative number"),
                });
            }
            let sum: f64 = row.iter().sum();
            let deviation = (sum - 1.0).abs();
            if deviation > ROW_SUM_REJECT {
                return Err(Error::InvariantViolation {
                    row: t,
                    reason: format!("row sums to {sum}"),
                });
            }
            if deviation > ROW_SUM_RENORMALIZE {
                log::warn!("row {t} sums to {sum}, renormalizing");
                row.iter_mut().for_each(|p| *p /= sum);
            }
        }
        let log_probs = probs.iter().map(|p| p.ln()).collect();
        Ok(Self {
            alphabet,
            frames,
            probs,
            log_probs,
        })
    }

    pub fn alphabet(&self) -> &Arc<Alphabet> {
        &self.alphabet
    }

    /// Number of frames `T`.
    pub fn frames(&self) -> usize {
        self.frames
    }

    /// Number of symbols `S`.
    pub fn width(&self) -> usize {
        self.alphabet.len()
    }

    pub fn row(&self, t: usize) -> &[f64] {
        let s = self.width();
        &self.probs[t * s..(t + 1) * s]
    }

    pub fn log_row(&self, t: usize) -> &[f64] {
        let s = self.width();
        &self.log_probs[t * s..(t + 1) * s]
    }

    pub fn prob(&self, t: usize, symbol: usize) -> f64 {
        self.probs[t * self.width() + symbol]
    }

    pub fn log_prob(&self, t: usize, symbol: usize) -> f64 {
        self.log_probs[t * self.width() + symbol]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.probs.chunks(self.width())
    }

    /// Row-major probabilities.
    pub fn as_flat(&self) -> &[f64] {
        &self.probs
    }

    /// NaC confidence per frame.
    pub fn nac_column(&self) -> Vec<f64> {
        let nac = self.alphabet.nac_index();
        (0..self.frames).map(|t| self.prob(t, nac)).collect()
    }

    /// Copy of the frames in `range`.
    pub fn slice_frames(&self, range: Range<usize>) -> Result<Self> {
        if range.start >= range.end || range.end > self.frames {
            return Err(Error::InvalidParameter(format!(
                "frame range {range:?} is empty or outside 0..{}",
                self.frames
            )));
        }
        let s = self.width();
        Ok(Self {
            alphabet: Arc::clone(&self.alphabet),
            frames: range.len(),
            probs: self.probs[range.start * s..range.end * s].to_vec(),
            log_probs: self.log_probs[range.start * s..range.end * s].to_vec(),
        })
    }
}
