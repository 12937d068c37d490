//! Decoders for CTC confidence matrices.
//!
//! A [`ConfidenceMatrix`] holds one probability row per frame over an
//! [`Alphabet`] that includes the non-character symbol NaC. The decoders:
//!
//! * [`decode_best_path`] takes the per-frame argmax and collapses it.
//! * [`decode_expression`] finds the most probable string accepted by an
//!   [`ExpressionModel`], usually compiled from a [`RuleConfig`].
//! * [`decode_dictionary`] restricts lines to lexicon words and adds a
//!   unigram prior.
//! * [`committee_decode`] runs the dictionary decoder on several experts and
//!   votes word by word over their aligned outputs.
//!
//! [`eval`] scores hypotheses with CER and WER, [`io`] reads and writes matrix
//! files, [`batch`] runs manifests and [`synth`] produces seeded test data.

pub mod alphabet;
pub mod batch;
pub mod best_path;
pub mod committee;
pub mod ctc;
pub mod dictionary;
pub mod error;
pub mod eval;
pub mod expression;
pub mod hypothesis;
pub mod io;
pub mod matrix;
pub mod search;
pub mod synth;

pub use alphabet::{normalize_transcript, Alphabet, Symbol, NAC_TOKEN};
pub use best_path::{best_path, decode_best_path};
pub use committee::{combine, committee_decode, CommitteeConfig, WordTransitionNetwork};
pub use ctc::{collapse, path_log_score, string_log_score, Path};
pub use dictionary::{build_lexicon, decode_dictionary, DecodeParams, Lexicon, LexiconPolicy, OovPolicy};
pub use error::{Error, Result};
pub use eval::{edit_distance, evaluate, rank_experts, EvalReport};
pub use expression::{compile_rules, decode_expression, ExpressionModel, RuleConfig};
pub use hypothesis::Hypothesis;
pub use io::{load_matrix, store_matrix, MatrixFormat};
pub use matrix::ConfidenceMatrix;
pub use search::BeamWidth;
pub use synth::generate_synthetic;
