//! Brute-force reference implementations shared by the integration tests.
#![allow(dead_code)]

use std::collections::HashMap;
use std::sync::Arc;

use ctcdec::{Alphabet, ConfidenceMatrix};
use rand::Rng;

/// Small alphabet with `printable` characters from "abc" plus NaC last.
pub fn small_alphabet(printable: usize) -> Arc<Alphabet> {
    Arc::new(Alphabet::from_chars(&"abc"[..printable]).unwrap())
}

/// Random rows; `zero_chance` of each entry being exactly 0 (at least one
/// entry per row stays positive).
pub fn random_matrix<R: Rng>(rng: &mut R, alphabet: &Arc<Alphabet>, frames: usize, zero_chance: f64) -> ConfidenceMatrix {
    let width = alphabet.len();
    let rows = (0..frames)
        .map(|_| {
            let keep = rng.random_range(0..width);
            let mut row: Vec<f64> = (0..width)
                .map(|j| {
                    if j != keep && rng.random::<f64>() < zero_chance {
                        0.0
                    } else {
                        rng.random::<f64>() + 1e-3
                    }
                })
                .collect();
            let sum: f64 = row.iter().sum();
            row.iter_mut().for_each(|v| *v /= sum);
            row
        })
        .collect();
    ConfidenceMatrix::new(alphabet.clone(), rows).unwrap()
}

/// Calls `f` with every length-`frames` path over `width` symbols.
pub fn for_each_path(width: usize, frames: usize, mut f: impl FnMut(&[usize])) {
    let mut path = vec![0usize; frames];
    loop {
        f(&path);
        let mut i = 0;
        loop {
            if i == frames {
                return;
            }
            path[i] += 1;
            if path[i] < width {
                break;
            }
            path[i] = 0;
            i += 1;
        }
    }
}

/// Merge runs in one pass, drop NaC in a second.
pub fn reference_collapse(path: &[usize], nac: usize) -> Vec<usize> {
    let mut merged: Vec<usize> = Vec::new();
    for &s in path {
        if merged.last() != Some(&s) {
            merged.push(s);
        }
    }
    merged.into_iter().filter(|&s| s != nac).collect()
}

pub fn path_prob(matrix: &ConfidenceMatrix, path: &[usize]) -> f64 {
    path.iter().enumerate().map(|(t, &s)| matrix.prob(t, s)).product()
}

/// Probability mass of every string reachable in the matrix, by full path
/// enumeration.
pub fn string_marginals(matrix: &ConfidenceMatrix) -> HashMap<Vec<usize>, f64> {
    let nac = matrix.alphabet().nac_index();
    let mut out: HashMap<Vec<usize>, f64> = HashMap::new();
    for_each_path(matrix.width(), matrix.frames(), |p| {
        let prob = path_prob(matrix, p);
        if prob > 0.0 {
            *out.entry(reference_collapse(p, nac)).or_default() += prob;
        }
    });
    out
}

pub fn text_of(alphabet: &Alphabet, labels: &[usize]) -> String {
    labels.iter().map(|&s| alphabet.char_at(s).unwrap()).collect()
}

/// Highest-mass string among those `accept` admits, with the runner-up mass.
pub fn best_string<F: Fn(&[usize]) -> bool>(
    marginals: &HashMap<Vec<usize>, f64>,
    accept: F,
) -> Option<(Vec<usize>, f64, f64)> {
    let mut ranked: Vec<(&Vec<usize>, f64)> = marginals
        .iter()
        .filter(|(s, _)| accept(s))
        .map(|(s, &p)| (s, p))
        .collect();
    ranked.sort_by(|a, b| b.1.total_cmp(&a.1));
    let (best, p) = ranked.first()?;
    let runner_up = ranked.get(1).map_or(0.0, |r| r.1);
    Some(((*best).clone(), *p, runner_up))
}

/// Plain recursive Levenshtein distance.
pub fn levenshtein<T: PartialEq>(a: &[T], b: &[T]) -> usize {
    match (a.split_first(), b.split_first()) {
        (None, _) => b.len(),
        (_, None) => a.len(),
        (Some((x, ra)), Some((y, rb))) => {
            let sub = levenshtein(ra, rb) + usize::from(x != y);
            let del = levenshtein(ra, b) + 1;
            let ins = levenshtein(a, rb) + 1;
            sub.min(del).min(ins)
        }
    }
}

/// Transition table over printable symbols: `next[state][symbol]`.
pub struct TableDfa {
    pub next: Vec<Vec<Option<usize>>>,
    pub accepting: Vec<bool>,
}

impl TableDfa {
    pub fn random<R: Rng>(rng: &mut R, states: usize, symbols: usize) -> Self {
        let next = (0..states)
            .map(|_| {
                (0..symbols)
                    .map(|_| (rng.random::<f64>() < 0.7).then(|| rng.random_range(0..states)))
                    .collect()
            })
            .collect();
        let mut accepting: Vec<bool> = (0..states).map(|_| rng.random::<f64>() < 0.4).collect();
        if !accepting.iter().any(|&a| a) {
            accepting[rng.random_range(0..states)] = true;
        }
        Self { next, accepting }
    }

    pub fn accepts(&self, labels: &[usize]) -> bool {
        let mut state = 0;
        for &s in labels {
            match self.next[state].get(s).copied().flatten() {
                Some(n) => state = n,
                None => return false,
            }
        }
        self.accepting[state]
    }

    pub fn edges(&self, alphabet: &Alphabet) -> Vec<(usize, char, usize)> {
        let mut out = Vec::new();
        for (from, row) in self.next.iter().enumerate() {
            for (s, to) in row.iter().enumerate() {
                if let Some(to) = to {
                    out.push((from, alphabet.char_at(s).unwrap(), *to));
                }
            }
        }
        out
    }

    pub fn accepting_states(&self) -> Vec<usize> {
        (0..self.accepting.len()).filter(|&i| self.accepting[i]).collect()
    }
}

/// Number of distinct minimal-cost alignments of `words` against the slots
/// of `wtn`: pairing costs 0 when the slot already holds the word, skipping
/// costs 0 when it already holds NULL, everything else costs 1.
pub fn optimal_alignments(wtn: &ctcdec::WordTransitionNetwork, words: &[&str]) -> usize {
    let slots = wtn.slots();
    let holds = |i: usize, w: Option<&str>| slots[i].entries.iter().any(|e| e.word.as_deref() == w);
    let (n, m) = (slots.len(), words.len());
    let mut cost = vec![vec![usize::MAX; m + 1]; n + 1];
    let mut count = vec![vec![0usize; m + 1]; n + 1];
    cost[0][0] = 0;
    count[0][0] = 1;
    for i in 0..=n {
        for j in 0..=m {
            if i == 0 && j == 0 {
                continue;
            }
            let mut options = Vec::new();
            if i > 0 && j > 0 {
                options.push((i - 1, j - 1, usize::from(!holds(i - 1, Some(words[j - 1])))));
            }
            if i > 0 {
                options.push((i - 1, j, usize::from(!holds(i - 1, None))));
            }
            if j > 0 {
                options.push((i, j - 1, 1));
            }
            let best = options.iter().map(|&(a, b, c)| cost[a][b] + c).min().unwrap();
            cost[i][j] = best;
            count[i][j] = options
                .iter()
                .filter(|&&(a, b, c)| cost[a][b] + c == best)
                .map(|&(a, b, _)| count[a][b])
                .sum();
        }
    }
    count[n][m]
}
