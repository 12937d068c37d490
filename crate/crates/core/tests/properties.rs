mod common;

use std::sync::Arc;

use common::*;
use ctcdec::committee::{combine, CommitteeConfig};
use ctcdec::ctc::{collapse, detect_boundaries, string_log_score, Path};
use ctcdec::dictionary::{decode_dictionary, DecodeParams, Lexicon, LexiconPolicy};
use ctcdec::eval::edit_distance;
use ctcdec::expression::decode_expression;
use ctcdec::io::{read_matrix, write_matrix, MatrixFormat};
use ctcdec::{decode_best_path, generate_synthetic, Alphabet, BeamWidth, ConfidenceMatrix, Hypothesis};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn matrix_strategy(max_printable: usize, max_frames: usize) -> impl Strategy<Value = ConfidenceMatrix> {
    (1..=max_printable, 1..=max_frames, any::<u64>()).prop_map(|(printable, frames, seed)| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        random_matrix(&mut rng, &small_alphabet(printable), frames, 0.15)
    })
}

proptest! {
    #[test]
    fn collapse_output_has_no_nac_and_fixed_points(labels in prop::collection::vec(0usize..4, 0..30)) {
        let alphabet = Alphabet::from_chars("abc").unwrap();
        let text = collapse(&Path(labels.clone()), &alphabet);
        prop_assert_eq!(&text, &text_of(&alphabet, &reference_collapse(&labels, 3)));
        // re-encoding the output as a path only merges adjacent equal characters
        let again = collapse(&Path(alphabet.encode(&text).unwrap()), &alphabet);
        let mut merged: Vec<char> = text.chars().collect();
        merged.dedup();
        prop_assert_eq!(again, merged.into_iter().collect::<String>());
    }

    #[test]
    fn string_scores_match_enumeration(m in matrix_strategy(2, 6)) {
        let marginals = string_marginals(&m);
        let mut total = 0.0;
        for (labels, p) in &marginals {
            let dp = string_log_score(&m, &text_of(m.alphabet(), labels)).unwrap().exp();
            prop_assert!((dp - p).abs() <= 1e-9 * p.max(dp));
            total += dp;
        }
        prop_assert!((total - 1.0).abs() < 1e-9);
    }

    #[test]
    fn best_path_score_is_maximal(m in matrix_strategy(2, 6)) {
        let h = decode_best_path(&m);
        let mut best = f64::NEG_INFINITY;
        for_each_path(m.width(), m.frames(), |p| best = best.max(path_prob(&m, p).ln()));
        prop_assert!((h.score - best).abs() < 1e-12);
        let chars: Vec<char> = h.text.chars().collect();
        prop_assert!(chars.iter().all(|&c| m.alphabet().contains(c)));
    }

    #[test]
    fn unbounded_expression_search_is_exact(m in matrix_strategy(2, 5), seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let printable = m.width() - 1;
        let states = 1 + (seed % 3) as usize;
        let dfa = TableDfa::random(&mut rng, states, printable);
        let Ok(model) = ctcdec::ExpressionModel::from_symbol_edges(
            m.alphabet().clone(), states, 0, &dfa.accepting_states(), &dfa.edges(m.alphabet()),
        ) else {
            return Ok(());
        };
        let oracle = best_string(&string_marginals(&m), |s| dfa.accepts(s));
        match (oracle, decode_expression(&m, &model, BeamWidth::Unbounded)) {
            (Some((_, p, _)), Ok(h)) => prop_assert!((h.score.exp() - p).abs() <= 1e-9 * p),
            (None, Err(_)) => {}
            (o, d) => prop_assert!(false, "oracle {:?}, decoder {:?}", o, d),
        }
    }

    #[test]
    fn wider_beams_never_lose_probability(m in matrix_strategy(3, 8)) {
        let model = ctcdec::ExpressionModel::accept_all(m.alphabet().clone());
        let narrow = decode_expression(&m, &model, BeamWidth::Finite(1)).unwrap();
        let exact = decode_expression(&m, &model, BeamWidth::Unbounded).unwrap();
        prop_assert!(exact.score >= narrow.score - 1e-12);
    }

    #[test]
    fn dictionary_output_is_in_language(m in matrix_strategy(3, 8), counts in prop::collection::vec(1u64..10, 1..4)) {
        let words = ["ab", "b", "aab"];
        let lexicon = Lexicon::from_counts(words.iter().zip(&counts).map(|(w, &c)| (*w, c)), LexiconPolicy::new(['c'], [])).unwrap();
        let params = DecodeParams { beam: BeamWidth::Finite(4), ..DecodeParams::default() };
        if let Ok(h) = decode_dictionary(&m, &lexicon, &params) {
            prop_assert!(h.text.is_empty() || h.text.split('c').all(|w| lexicon.contains(w)), "{:?}", h.text);
            let n = h.text.split('c').filter(|w| !w.is_empty()).count();
            prop_assert_eq!(h.word_confidences.map(|c| c.len()), Some(n));
        }
    }

    #[test]
    fn committee_n1_and_unanimity(words in prop::collection::vec("[a-c]{1,3}", 0..6), n in 1usize..5) {
        let text = words.join(" ");
        let hyps = vec![Hypothesis::new(text.clone(), -2.0); n];
        let out = combine(&hyps, &CommitteeConfig::new(n)).unwrap();
        prop_assert_eq!(out.text, text);
    }

    #[test]
    fn edit_distance_is_a_metric(a in "[ab]{0,5}", b in "[ab]{0,5}", c in "[ab]{0,5}") {
        let chars = |s: &str| s.chars().collect::<Vec<_>>();
        let (a, b, c) = (chars(&a), chars(&b), chars(&c));
        let d = |x: &[char], y: &[char]| edit_distance(x, y).distance;
        prop_assert_eq!(d(&a, &b), levenshtein(&a, &b));
        prop_assert_eq!(d(&a, &b), d(&b, &a));
        prop_assert!(d(&a, &b) <= d(&a, &c) + d(&c, &b));
        prop_assert_eq!(d(&a, &b) == 0, a == b);
    }

    #[test]
    fn text_and_binary_round_trips(m in matrix_strategy(3, 10)) {
        let mut text = Vec::new();
        write_matrix(&m, MatrixFormat::Text, &mut text).unwrap();
        let parsed = read_matrix(text.as_slice()).unwrap();
        prop_assert_eq!(parsed.as_flat(), m.as_flat());
        let mut bin = Vec::new();
        write_matrix(&m, MatrixFormat::Binary, &mut bin).unwrap();
        let back = read_matrix(bin.as_slice()).unwrap();
        let mut again = Vec::new();
        write_matrix(&back, MatrixFormat::Binary, &mut again).unwrap();
        prop_assert_eq!(bin, again);
    }

    #[test]
    fn clean_synthetic_lines_decode_exactly(text in "[a-zA-Z0-9 .,']{0,30}", fpc in 2usize..5, seed in any::<u64>()) {
        let alphabet = Arc::new(Alphabet::htrts());
        let m = generate_synthetic(&text, &alphabet, fpc, 0.0, seed).unwrap();
        prop_assert_eq!(decode_best_path(&m).text, text.clone());
        // every character is followed by one NaC frame
        let expected = text.chars().count().max(1);
        prop_assert_eq!(detect_boundaries(&m, 0.5).unwrap().len(), expected);
    }
}
