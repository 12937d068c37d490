use std::collections::VecDeque;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use crate::alphabet::Alphabet;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ClassKind {
    Uppercase,
    Lowercase,
    Digit,
    /// Punctuation that sticks to the expression before or after it.
    Attaching,
    /// Punctuation that forms an expression of its own.
    Standalone,
    Separator,
}

impl ClassKind {
    /// Natural kind of a character, used when no rule file says otherwise.
    pub fn of_char(c: char) -> Self {
        if c.is_uppercase() {
            ClassKind::Uppercase
        } else if c.is_alphabetic() {
            ClassKind::Lowercase
        } else if c.is_numeric() {
            ClassKind::Digit
        } else if c.is_whitespace() {
            ClassKind::Separator
        } else {
            ClassKind::Standalone
        }
    }

    pub fn is_letter(self) -> bool {
        matches!(self, ClassKind::Uppercase | ClassKind::Lowercase)
    }
}

impl fmt::Display for ClassKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ClassKind::Uppercase => "uppercase",
            ClassKind::Lowercase => "lowercase",
            ClassKind::Digit => "digit",
            ClassKind::Attaching => "attaching",
            ClassKind::Standalone => "standalone",
            ClassKind::Separator => "separator",
        })
    }
}

impl FromStr for ClassKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        Ok(match s {
            "uppercase" => ClassKind::Uppercase,
            "lowercase" => ClassKind::Lowercase,
            "digit" => ClassKind::Digit,
            "attaching" => ClassKind::Attaching,
            "standalone" => ClassKind::Standalone,
            "separator" => ClassKind::Separator,
            other => return Err(format!("unknown class kind {other:?}")),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SymbolClass {
    pub name: String,
    pub kind: ClassKind,
    pub symbols: Vec<char>,
}

/// Deterministic automaton over symbol classes that decides which strings
/// count as well-formed lines.
#[derive(Debug, Clone)]
pub struct ExpressionModel {
    alphabet: Arc<Alphabet>,
    classes: Vec<SymbolClass>,
    class_of: Vec<Option<usize>>,
    start: usize,
    transitions: Vec<Vec<Option<usize>>>,
    accepting: Vec<bool>,
    live: Vec<bool>,
}

impl ExpressionModel {
    /// `transitions[state][class]` is the successor state, if any. Every
    /// printable symbol of `alphabet` must be in exactly one class.
    pub fn new(
        alphabet: Arc<Alphabet>,
        classes: Vec<SymbolClass>,
        start: usize,
        transitions: Vec<Vec<Option<usize>>>,
        accepting: Vec<bool>,
    ) -> Result<Self> {
        let states = transitions.len();
        if states == 0 || start >= states || accepting.len() != states {
            return Err(Error::InvalidRule(format!(
                "automaton shape: {states} states, start {start}, {} accepting flags",
                accepting.len()
            )));
        }
        let mut class_of = vec![None; alphabet.len()];
        for (ci, class) in classes.iter().enumerate() {
            for &c in &class.symbols {
                let idx = alphabet.index_of(c).ok_or_else(|| {
                    Error::InvalidRule(format!(
                        "class {:?} lists {c:?}, which is not in the alphabet",
                        class.name
                    ))
                })?;
                if let Some(prev) = class_of[idx].replace(ci) {
                    return Err(Error::InvalidRule(format!(
                        "symbol {c:?} is in both {:?} and {:?}",
                        classes[prev].name, class.name
                    )));
                }
            }
        }
        for (idx, class) in class_of.iter().enumerate() {
            if let (None, Some(c)) = (class, alphabet.char_at(idx)) {
                return Err(Error::InvalidRule(format!("symbol {c:?} belongs to no class")));
            }
        }
        for (s, row) in transitions.iter().enumerate() {
            if row.len() != classes.len() {
                return Err(Error::InvalidRule(format!(
                    "state {s} has {} transitions for {} classes",
                    row.len(),
                    classes.len()
                )));
            }
            if let Some(bad) = row.iter().flatten().find(|&&to| to >= states) {
                return Err(Error::InvalidRule(format!("state {s} jumps to missing state {bad}")));
            }
        }
        let live = live_states(&transitions, &accepting, &classes);
        if !live[start] {
            return Err(Error::EmptyLanguage);
        }
        Ok(Self {
            alphabet,
            classes,
            class_of,
            start,
            transitions,
            accepting,
            live,
        })
    }

    /// One class per printable symbol; `edges` are `(from, symbol, to)`.
    pub fn from_symbol_edges(
        alphabet: Arc<Alphabet>,
        states: usize,
        start: usize,
        accepting: &[usize],
        edges: &[(usize, char, usize)],
    ) -> Result<Self> {
        let classes: Vec<SymbolClass> = alphabet
            .printable()
            .map(|c| SymbolClass {
                name: c.to_string(),
                kind: ClassKind::of_char(c),
                symbols: vec![c],
            })
            .collect();
        let mut transitions = vec![vec![None; classes.len()]; states];
        for &(from, c, to) in edges {
            let ci = classes
                .iter()
                .position(|cl| cl.symbols[0] == c)
                .ok_or(Error::InvalidSymbol(c))?;
            let slot = transitions
                .get_mut(from)
                .ok_or_else(|| Error::InvalidRule(format!("edge from missing state {from}")))?;
            if slot[ci].replace(to).is_some_and(|prev| prev != to) {
                return Err(Error::InvalidRule(format!(
                    "state {from} has two transitions on {c:?}"
                )));
            }
        }
        let mut flags = vec![false; states];
        for &a in accepting {
            *flags
                .get_mut(a)
                .ok_or_else(|| Error::InvalidRule(format!("accepting state {a} does not exist")))? = true;
        }
        Self::new(alphabet, classes, start, transitions, flags)
    }

    /// Single-state automaton accepting every string.
    pub fn accept_all(alphabet: Arc<Alphabet>) -> Self {
        let edges: Vec<(usize, char, usize)> = alphabet.printable().map(|c| (0, c, 0)).collect();
        Self::from_symbol_edges(alphabet, 1, 0, &[0], &edges).expect("accept-all automaton is valid")
    }

    pub fn alphabet(&self) -> &Arc<Alphabet> {
        &self.alphabet
    }

    pub fn classes(&self) -> &[SymbolClass] {
        &self.classes
    }

    pub fn start(&self) -> usize {
        self.start
    }

    pub fn state_count(&self) -> usize {
        self.transitions.len()
    }

    pub fn is_accepting(&self, state: usize) -> bool {
        self.accepting[state]
    }

    /// Whether some accepting state is reachable from `state`.
    pub fn is_live(&self, state: usize) -> bool {
        self.live[state]
    }

    pub fn class_of_symbol(&self, symbol: usize) -> Option<usize> {
        self.class_of.get(symbol).copied().flatten()
    }

    /// Successor after reading alphabet column `symbol`; `None` for NaC,
    /// missing transitions and dead ends.
    pub fn step(&self, state: usize, symbol: usize) -> Option<usize> {
        let class = self.class_of_symbol(symbol)?;
        self.transitions[state][class].filter(|&to| self.live[to])
    }

    /// Runs the automaton on `text`. Characters outside the alphabet are
    /// rejected.
    pub fn accepts(&self, text: &str) -> bool {
        let mut state = self.start;
        for c in text.chars() {
            let Some(idx) = self.alphabet.index_of(c) else {
                return false;
            };
            match self.step(state, idx) {
                Some(next) => state = next,
                None => return false,
            }
        }
        self.accepting[state]
    }
}

fn live_states(transitions: &[Vec<Option<usize>>], accepting: &[bool], classes: &[SymbolClass]) -> Vec<bool> {
    let states = transitions.len();
    let mut reverse: Vec<Vec<usize>> = vec![Vec::new(); states];
    for (from, row) in transitions.iter().enumerate() {
        for (ci, to) in row.iter().enumerate() {
            if let Some(to) = *to {
                if !classes[ci].symbols.is_empty() {
                    reverse[to].push(from);
                }
            }
        }
    }
    let mut live = accepting.to_vec();
    let mut queue: VecDeque<usize> = (0..states).filter(|&s| accepting[s]).collect();
    while let Some(s) = queue.pop_front() {
        for &p in &reverse[s] {
            if !live[p] {
                live[p] = true;
                queue.push_back(p);
            }
        }
    }
    live
}
