//! CTC prefix beam search under a prefix constraint.
//!
//! Every beam entry is a distinct prefix string. For each prefix the search
//! keeps the probability of all path prefixes that collapse to it, split by
//! whether the last frame was NaC, so without pruning the final per-prefix
//! totals are exact string marginals. A [`PrefixConstraint`] decides which
//! symbols may extend a prefix and adds a score on top of the CTC term.

use std::fmt;
use std::str::FromStr;

use crate::ctc::log_add;
use crate::error::Error;
use crate::matrix::ConfidenceMatrix;

pub const DEFAULT_BEAM_WIDTH: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BeamWidth {
    Finite(usize),
    Unbounded,
}

impl BeamWidth {
    pub fn limit(self) -> Option<usize> {
        match self {
            BeamWidth::Finite(n) => Some(n),
            BeamWidth::Unbounded => None,
        }
    }

    pub fn validate(self) -> Result<Self, Error> {
        match self {
            BeamWidth::Finite(0) => Err(Error::InvalidParameter("beam width must be at least 1".into())),
            other => Ok(other),
        }
    }
}

impl Default for BeamWidth {
    fn default() -> Self {
        BeamWidth::Finite(DEFAULT_BEAM_WIDTH)
    }
}

impl fmt::Display for BeamWidth {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BeamWidth::Finite(n) => write!(f, "{n}"),
            BeamWidth::Unbounded => f.write_str("inf"),
        }
    }
}

impl FromStr for BeamWidth {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        match s.trim() {
            "inf" | "infinite" | "unbounded" => Ok(BeamWidth::Unbounded),
            other => other
                .parse::<usize>()
                .map_err(|e| Error::InvalidParameter(format!("beam width {other:?}: {e}")))
                .and_then(|n| BeamWidth::Finite(n).validate()),
        }
    }
}

/// A deterministic restriction on which strings the search may produce.
pub trait PrefixConstraint {
    type State: Clone;

    fn initial(&self) -> Self::State;

    /// Calls `emit` once per printable symbol that may follow a prefix in
    /// `state`, in ascending symbol order, with the successor state.
    fn successors(&self, state: &Self::State, emit: &mut dyn FnMut(usize, Self::State));

    /// Score already earned by the prefix, added to its CTC log
    /// probability for beam ranking.
    fn prefix_score(&self, _state: &Self::State) -> f64 {
        0.0
    }

    /// Score for ending the line in `state`, or `None` when the prefix is
    /// not a complete string of the language.
    fn final_score(&self, state: &Self::State) -> Option<f64>;
}

#[derive(Debug, Clone, PartialEq)]
pub struct SearchResult {
    pub labels: Vec<usize>,
    /// Log probability of all explored paths collapsing to `labels`.
    pub ctc_log_prob: f64,
    /// `ctc_log_prob` plus the constraint's final score.
    pub objective: f64,
}

const ROOT: u32 = 0;
const NO_SYMBOL: u32 = u32::MAX;

struct Node<S> {
    parent: u32,
    symbol: u32,
    state: S,
    children: Option<Vec<u32>>,
}

struct Arena<S> {
    nodes: Vec<Node<S>>,
    blank: Vec<f64>,
    label: Vec<f64>,
    stamp: Vec<u32>,
}

impl<S: Clone> Arena<S> {
    fn push(&mut self, node: Node<S>) -> u32 {
        self.nodes.push(node);
        self.blank.push(f64::NEG_INFINITY);
        self.label.push(f64::NEG_INFINITY);
        self.stamp.push(u32::MAX);
        (self.nodes.len() - 1) as u32
    }

    fn children<C: PrefixConstraint<State = S>>(&mut self, id: u32, constraint: &C) -> Vec<u32> {
        if let Some(children) = &self.nodes[id as usize].children {
            return children.clone();
        }
        let mut found = Vec::new();
        let state = self.nodes[id as usize].state.clone();
        constraint.successors(&state, &mut |symbol, state| found.push((symbol, state)));
        let ids: Vec<u32> = found
            .into_iter()
            .map(|(symbol, state)| {
                self.push(Node {
                    parent: id,
                    symbol: symbol as u32,
                    state,
                    children: None,
                })
            })
            .collect();
        self.nodes[id as usize].children = Some(ids.clone());
        ids
    }

    fn labels(&self, mut id: u32) -> Vec<usize> {
        let mut out = Vec::new();
        while id != ROOT {
            let node = &self.nodes[id as usize];
            out.push(node.symbol as usize);
            id = node.parent;
        }
        out.reverse();
        out
    }
}

#[derive(Clone, Copy)]
struct Entry {
    node: u32,
    blank: f64,
    label: f64,
}

impl Entry {
    fn total(&self) -> f64 {
        log_add(self.blank, self.label)
    }
}

/// Runs the constrained prefix search and returns the best complete string,
/// or `None` when no accepted prefix survives.
pub fn prefix_search<C: PrefixConstraint>(
    matrix: &ConfidenceMatrix,
    constraint: &C,
    beam: BeamWidth,
) -> Option<SearchResult> {
    let nac = matrix.alphabet().nac_index();
    let mut arena = Arena {
        nodes: Vec::new(),
        blank: Vec::new(),
        label: Vec::new(),
        stamp: Vec::new(),
    };
    arena.push(Node {
        parent: ROOT,
        symbol: NO_SYMBOL,
        state: constraint.initial(),
        children: None,
    });
    let mut beam_entries = vec![Entry {
        node: ROOT,
        blank: 0.0,
        label: f64::NEG_INFINITY,
    }];
    let mut touched: Vec<u32> = Vec::new();
    let frames = matrix.frames();

    for t in 0..frames {
        let row = matrix.log_row(t);
        touched.clear();
        let stamp = t as u32;
        let mut add = |arena: &mut Arena<C::State>, id: u32, blank: f64, label: f64| {
            let i = id as usize;
            if arena.stamp[i] != stamp {
                arena.stamp[i] = stamp;
                arena.blank[i] = f64::NEG_INFINITY;
                arena.label[i] = f64::NEG_INFINITY;
                touched.push(id);
            }
            arena.blank[i] = log_add(arena.blank[i], blank);
            arena.label[i] = log_add(arena.label[i], label);
        };

        for entry in &beam_entries {
            let total = entry.total();
            let id = entry.node;
            add(&mut arena, id, total + row[nac], f64::NEG_INFINITY);
            let last = arena.nodes[id as usize].symbol;
            if id != ROOT {
                add(
                    &mut arena,
                    id,
                    f64::NEG_INFINITY,
                    entry.label + row[last as usize],
                );
            }
            for child in arena.children(id, constraint) {
                let symbol = arena.nodes[child as usize].symbol;
                let p = row[symbol as usize];
                if p == f64::NEG_INFINITY {
                    continue;
                }
                let from = if symbol == last { entry.blank } else { total };
                add(&mut arena, child, f64::NEG_INFINITY, from + p);
            }
        }

        let mut next: Vec<(f64, Entry)> = touched
            .iter()
            .map(|&id| {
                let i = id as usize;
                Entry {
                    node: id,
                    blank: arena.blank[i],
                    label: arena.label[i],
                }
            })
            .filter(|e| e.total() > f64::NEG_INFINITY)
            .map(|e| {
                let rank = e.total() + constraint.prefix_score(&arena.nodes[e.node as usize].state);
                (rank, e)
            })
            .collect();

        if t + 1 < frames {
            let limit = beam.limit().unwrap_or(usize::MAX);
            if next.len() > limit {
                next.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.node.cmp(&b.1.node)));
            }
            // Prefixes that can neither end nor grow would only crowd out
            // live ones.
            let mut kept = 0;
            next.retain(|(_, e)| {
                if kept >= limit {
                    return false;
                }
                let live = !arena.children(e.node, constraint).is_empty()
                    || constraint.final_score(&arena.nodes[e.node as usize].state).is_some();
                kept += usize::from(live);
                live
            });
        }
        next.sort_by_key(|(_, e)| e.node);
        beam_entries = next.into_iter().map(|(_, e)| e).collect();
        if beam_entries.is_empty() {
            return None;
        }
    }

    let mut best: Option<(f64, f64, u32)> = None;
    for entry in &beam_entries {
        let state = &arena.nodes[entry.node as usize].state;
        let Some(bonus) = constraint.final_score(state) else {
            continue;
        };
        let ctc = entry.total();
        let objective = ctc + bonus;
        if objective == f64::NEG_INFINITY {
            continue;
        }
        let better = match best {
            None => true,
            Some((o, _, id)) => objective > o || (objective == o && entry.node < id),
        };
        if better {
            best = Some((objective, ctc, entry.node));
        }
    }
    best.map(|(objective, ctc_log_prob, node)| SearchResult {
        labels: arena.labels(node),
        ctc_log_prob,
        objective,
    })
}

/// Accepts every string over the printable symbols.
#[derive(Debug, Clone, Copy)]
pub struct Unconstrained {
    pub width: usize,
    pub nac: usize,
}

impl Unconstrained {
    pub fn for_matrix(matrix: &ConfidenceMatrix) -> Self {
        Self {
            width: matrix.width(),
            nac: matrix.alphabet().nac_index(),
        }
    }
}

impl PrefixConstraint for Unconstrained {
    type State = ();

    fn initial(&self) {}

    fn successors(&self, _state: &(), emit: &mut dyn FnMut(usize, ())) {
        for s in (0..self.width).filter(|&s| s != self.nac) {
            emit(s, ());
        }
    }

    fn final_score(&self, _state: &()) -> Option<f64> {
        Some(0.0)
    }
}

impl<T: PrefixConstraint> PrefixConstraint for &T {
    type State = T::State;

    fn initial(&self) -> Self::State {
        (**self).initial()
    }

    fn successors(&self, state: &Self::State, emit: &mut dyn FnMut(usize, Self::State)) {
        (**self).successors(state, emit)
    }

    fn prefix_score(&self, state: &Self::State) -> f64 {
        (**self).prefix_score(state)
    }

    fn final_score(&self, state: &Self::State) -> Option<f64> {
        (**self).final_score(state)
    }
}

/// Intersection of two constraints; scores add.
#[derive(Debug, Clone)]
pub struct Both<A, B>(pub A, pub B);

impl<A: PrefixConstraint, B: PrefixConstraint> PrefixConstraint for Both<A, B> {
    type State = (A::State, B::State);

    fn initial(&self) -> Self::State {
        (self.0.initial(), self.1.initial())
    }

    fn successors(&self, state: &Self::State, emit: &mut dyn FnMut(usize, Self::State)) {
        let mut right = Vec::new();
        self.1.successors(&state.1, &mut |s, st| right.push((s, st)));
        if right.is_empty() {
            return;
        }
        self.0.successors(&state.0, &mut |s, left| {
            if let Ok(i) = right.binary_search_by_key(&s, |(sym, _)| *sym) {
                emit(s, (left, right[i].1.clone()));
            }
        });
    }

    fn prefix_score(&self, state: &Self::State) -> f64 {
        self.0.prefix_score(&state.0) + self.1.prefix_score(&state.1)
    }

    fn final_score(&self, state: &Self::State) -> Option<f64> {
        Some(self.0.final_score(&state.0)? + self.1.final_score(&state.1)?)
    }
}
