//! Expression-constrained decoding: the most probable string whose shape is
//! accepted by an [`ExpressionModel`], without any dictionary.

mod model;
mod rules;

use std::sync::Arc;

pub use model::{ClassKind, ExpressionModel, SymbolClass};
pub use rules::{compile_rules, CapitalMode, Rule, RuleConfig};

use crate::alphabet::DEFAULT_SEPARATOR;
use crate::error::{Error, Result};
use crate::hypothesis::{self, Hypothesis};
use crate::matrix::ConfidenceMatrix;
use crate::search::{self, BeamWidth, PrefixConstraint};

impl PrefixConstraint for ExpressionModel {
    type State = usize;

    fn initial(&self) -> usize {
        self.start()
    }

    fn successors(&self, state: &usize, emit: &mut dyn FnMut(usize, usize)) {
        for symbol in 0..self.alphabet().len() {
            if let Some(next) = self.step(*state, symbol) {
                emit(symbol, next);
            }
        }
    }

    fn final_score(&self, state: &usize) -> Option<f64> {
        self.is_accepting(*state).then_some(0.0)
    }
}

/// Beam search over CTC prefixes that never leaves the model's language.
/// The score is the CTC probability of the returned text summed over the
/// explored prefixes.
pub fn decode_expression(
    matrix: &ConfidenceMatrix,
    model: &ExpressionModel,
    beam: BeamWidth,
) -> Result<Hypothesis> {
    beam.validate()?;
    if !Arc::ptr_eq(matrix.alphabet(), model.alphabet()) && matrix.alphabet() != model.alphabet() {
        return Err(Error::AlphabetMismatch);
    }
    let found = search::prefix_search(matrix, model, beam).ok_or(Error::NoAcceptedString)?;
    let alphabet = matrix.alphabet();
    let text: String = found.labels.iter().filter_map(|&s| alphabet.char_at(s)).collect();
    let confidences = hypothesis::marginal_word_confidences(matrix, &text, DEFAULT_SEPARATOR);
    Ok(Hypothesis::new(text, found.ctc_log_prob).with_word_confidences(confidences))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::alphabet::Alphabet;

    fn ab() -> Arc<Alphabet> {
        Arc::new(Alphabet::from_chars("ab").unwrap())
    }

    #[test]
    fn only_epsilon() {
        let alphabet = ab();
        let model = ExpressionModel::from_symbol_edges(alphabet.clone(), 1, 0, &[0], &[]).unwrap();
        let m = ConfidenceMatrix::new(alphabet, vec![vec![0.7, 0.2, 0.1]]).unwrap();
        let h = decode_expression(&m, &model, BeamWidth::Unbounded).unwrap();
        assert_eq!(h.text, "");
        assert!((h.score - 0.1f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn constraint_excludes_favoured_symbol() {
        let alphabet = ab();
        let model = ExpressionModel::from_symbol_edges(alphabet.clone(), 1, 0, &[0], &[(0, 'a', 0)]).unwrap();
        let m = ConfidenceMatrix::new(
            alphabet,
            vec![vec![0.2, 0.7, 0.1], vec![0.3, 0.6, 0.1], vec![0.1, 0.8, 0.1]],
        )
        .unwrap();
        let h = decode_expression(&m, &model, BeamWidth::Finite(4)).unwrap();
        assert!(!h.text.contains('b'));
        assert!(model.accepts(&h.text));
    }

    #[test]
    fn no_accepted_string() {
        let alphabet = ab();
        // language {"ab"} but only one frame
        let model = ExpressionModel::from_symbol_edges(
            alphabet.clone(),
            3,
            0,
            &[2],
            &[(0, 'a', 1), (1, 'b', 2)],
        )
        .unwrap();
        let m = ConfidenceMatrix::new(alphabet, vec![vec![0.5, 0.4, 0.1]]).unwrap();
        assert!(matches!(
            decode_expression(&m, &model, BeamWidth::Unbounded),
            Err(Error::NoAcceptedString)
        ));
    }

    #[test]
    fn alphabet_mismatch() {
        let model = ExpressionModel::accept_all(ab());
        let other = Arc::new(Alphabet::from_chars("xy").unwrap());
        let m = ConfidenceMatrix::new(other, vec![vec![0.5, 0.4, 0.1]]).unwrap();
        assert!(matches!(
            decode_expression(&m, &model, BeamWidth::Unbounded),
            Err(Error::AlphabetMismatch)
        ));
    }
}
