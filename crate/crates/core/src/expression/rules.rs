//! Declarative expression rules and their compilation into an automaton.
//!
//! A rule file has one directive per line; blank lines and lines starting
//! with `#` are ignored.
//!
//! ```text
//! class <name> <kind> <symbols...>
//! rule words
//! rule numbers
//! rule attach
//! rule join <class>
//! rule capitalize <class> [lenient|strict]
//! ```
//!
//! `<kind>` is one of `uppercase`, `lowercase`, `digit`, `attaching`,
//! `standalone`, `separator`. Symbols are listed as characters; whitespace
//! between them is ignored and `\s`, `\t`, `\\` escape a space, a tab and a
//! backslash.
//!
//! A line is a sequence of expressions joined by exactly one separator,
//! with no separator at either end; the empty line is always accepted.
//! Expressions are a core optionally wrapped in attaching punctuation.
//! Cores are letter runs, digit runs or runs of standalone symbols.
//!
//! * `words`: a letter run is lowercase, capitalized or all capitals.
//! * `numbers`: digit runs are cores of their own and never mix with
//!   letters. Without it digits may appear anywhere in a word.
//! * `attach`: attaching punctuation only occurs next to a core (leading
//!   or trailing). Without it such symbols behave as standalone ones.
//! * `join`: symbols of the class may join two letter runs into one word
//!   (`don't`, `O'Brien`).
//! * `capitalize`: after a symbol of the class the next word must start
//!   with a capital. `strict` also demands it at line start; `lenient`
//!   (default) does not, since a line may begin mid-sentence.

use std::collections::{HashMap, VecDeque};
use std::str::FromStr;
use std::sync::Arc;

use crate::alphabet::{Alphabet, DEFAULT_SEPARATOR};
use crate::error::{Error, Result};
use crate::expression::model::{ClassKind, ExpressionModel, SymbolClass};

const HTRTS_RULES: &str = r#"# Expression syntax for the HTRtS alphabet.
class upper uppercase ABCDEFGHIJKLMNOPQRSTUVWXYZ
class lower lowercase abcdefghijklmnopqrstuvwxyz
class digit digit 0123456789
class ender attaching .!?
class attach attaching ,:;"()[]£$
class apostrophe attaching '
class symbol standalone /&+-_=
rule words
rule numbers
rule attach
rule join apostrophe
rule capitalize ender lenient
"#;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CapitalMode {
    #[default]
    Lenient,
    Strict,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Rule {
    Words,
    Numbers,
    Attach,
    Join(String),
    Capitalize { class: String, mode: CapitalMode },
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct RuleConfig {
    pub classes: Vec<SymbolClass>,
    pub rules: Vec<Rule>,
}

impl RuleConfig {
    /// Shipped rule set for the HTRtS preset alphabet with a space
    /// separator.
    pub fn htrts() -> Self {
        Self::htrts_with_separator(DEFAULT_SEPARATOR)
    }

    pub fn htrts_with_separator(separator: char) -> Self {
        let mut config: RuleConfig = HTRTS_RULES.parse().expect("shipped rules parse");
        config.classes.push(SymbolClass {
            name: "space".into(),
            kind: ClassKind::Separator,
            symbols: vec![separator],
        });
        config
    }

    /// Switches every capitalization rule to `mode`.
    pub fn with_capital_mode(mut self, mode: CapitalMode) -> Self {
        for rule in &mut self.rules {
            if let Rule::Capitalize { mode: m, .. } = rule {
                *m = mode;
            }
        }
        self
    }

    fn has(&self, rule: &Rule) -> bool {
        self.rules.contains(rule)
    }
}

impl FromStr for RuleConfig {
    type Err = Error;

    fn from_str(text: &str) -> Result<Self> {
        let mut config = RuleConfig::default();
        for (i, raw) in text.lines().enumerate() {
            let line_no = i + 1;
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let parse_err = |reason: String| Error::Parse { line: line_no, reason };
            let mut tokens = line.split_whitespace();
            match tokens.next() {
                Some("class") => {
                    let name = tokens.next().ok_or_else(|| parse_err("class without name".into()))?;
                    let kind: ClassKind = tokens
                        .next()
                        .ok_or_else(|| parse_err("class without kind".into()))?
                        .parse()
                        .map_err(parse_err)?;
                    let symbols = unescape_symbols(&tokens.collect::<String>()).map_err(parse_err)?;
                    config.classes.push(SymbolClass {
                        name: name.to_string(),
                        kind,
                        symbols,
                    });
                }
                Some("rule") => {
                    let args: Vec<&str> = tokens.collect();
                    let rule = match args.as_slice() {
                        ["words"] => Rule::Words,
                        ["numbers"] => Rule::Numbers,
                        ["attach"] => Rule::Attach,
                        ["join", class] => Rule::Join(class.to_string()),
                        ["capitalize", class] => Rule::Capitalize {
                            class: class.to_string(),
                            mode: CapitalMode::Lenient,
                        },
                        ["capitalize", class, mode] => Rule::Capitalize {
                            class: class.to_string(),
                            mode: match *mode {
                                "lenient" => CapitalMode::Lenient,
                                "strict" => CapitalMode::Strict,
                                other => return Err(parse_err(format!("unknown capitalization mode {other:?}"))),
                            },
                        },
                        _ => return Err(Error::InvalidRule(format!("line {line_no}: unknown rule {:?}", args.join(" ")))),
                    };
                    config.rules.push(rule);
                }
                Some(other) => return Err(parse_err(format!("unknown directive {other:?}"))),
                None => unreachable!("blank lines are skipped"),
            }
        }
        Ok(config)
    }
}

fn unescape_symbols(raw: &str) -> std::result::Result<Vec<char>, String> {
    let mut out = Vec::new();
    let mut chars = raw.chars();
    while let Some(c) = chars.next() {
        if c != '\\' {
            out.push(c);
            continue;
        }
        match chars.next() {
            Some('s') => out.push(' '),
            Some('t') => out.push('\t'),
            Some('\\') => out.push('\\'),
            Some(other) => return Err(format!("unknown escape \\{other}")),
            None => return Err("dangling backslash".into()),
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
enum Shape {
    /// Word core that has no letter yet.
    Bare,
    OneUpper,
    Capitalized,
    AllCaps,
    Lower,
    /// Case shape not checked.
    Free,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
enum Phase {
    LineStart,
    AfterSeparator,
    Lead,
    Word(Shape),
    Number,
    Standalone,
    Trail,
    /// Join symbol after a word that is either trailing punctuation or the
    /// middle of a joined word.
    JoinOrTrail,
    /// Join symbol that must be followed by a letter.
    Joining,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
struct RuleState {
    phase: Phase,
    capital_pending: bool,
}

struct ClassInfo {
    kind: ClassKind,
    join: bool,
    ender: bool,
}

struct Grammar {
    words: bool,
    numbers: bool,
    attach: bool,
    classes: Vec<ClassInfo>,
}

impl Grammar {
    fn first_letter(&self, upper: bool) -> Shape {
        match (self.words, upper) {
            (false, _) => Shape::Free,
            (true, true) => Shape::OneUpper,
            (true, false) => Shape::Lower,
        }
    }

    fn next_letter(&self, shape: Shape, upper: bool) -> Option<Shape> {
        use Shape::*;
        match (shape, upper) {
            (Free, _) => Some(Free),
            (Bare, true) => Some(OneUpper),
            (Bare, false) => Some(Lower),
            (OneUpper, true) | (AllCaps, true) => Some(AllCaps),
            (OneUpper, false) | (Capitalized, false) => Some(Capitalized),
            (Lower, false) => Some(Lower),
            _ => None,
        }
    }

    fn step(&self, state: RuleState, class: usize) -> Option<RuleState> {
        let info = &self.classes[class];
        let RuleState { phase, capital_pending: pending } = state;
        let core_start = matches!(phase, Phase::LineStart | Phase::AfterSeparator | Phase::Lead);
        let core_done = matches!(
            phase,
            Phase::Word(_) | Phase::Number | Phase::Standalone | Phase::Trail | Phase::JoinOrTrail
        );
        let to = |phase, capital_pending| Some(RuleState { phase, capital_pending });
        match info.kind {
            ClassKind::Separator => core_done.then_some(RuleState {
                phase: Phase::AfterSeparator,
                capital_pending: pending,
            }),
            ClassKind::Uppercase | ClassKind::Lowercase => {
                let upper = info.kind == ClassKind::Uppercase;
                match phase {
                    _ if core_start => {
                        if pending && !upper {
                            None
                        } else {
                            to(Phase::Word(self.first_letter(upper)), false)
                        }
                    }
                    Phase::JoinOrTrail | Phase::Joining => to(Phase::Word(self.first_letter(upper)), false),
                    Phase::Word(shape) => to(Phase::Word(self.next_letter(shape, upper)?), false),
                    _ => None,
                }
            }
            ClassKind::Digit if self.numbers => match phase {
                _ if core_start => to(Phase::Number, false),
                Phase::Number => to(Phase::Number, false),
                _ => None,
            },
            ClassKind::Digit => {
                let bare = if self.words { Shape::Bare } else { Shape::Free };
                match phase {
                    _ if core_start => to(Phase::Word(bare), false),
                    Phase::JoinOrTrail | Phase::Joining => to(Phase::Word(bare), false),
                    Phase::Word(shape) => to(Phase::Word(shape), false),
                    _ => None,
                }
            }
            ClassKind::Attaching if self.attach => match phase {
                _ if core_start => to(Phase::Lead, pending),
                Phase::Word(_) if info.join => to(Phase::JoinOrTrail, info.ender),
                _ if core_done => to(Phase::Trail, pending || info.ender),
                _ => None,
            },
            ClassKind::Attaching | ClassKind::Standalone => match phase {
                Phase::Word(_) if info.join => to(Phase::Joining, false),
                _ if core_start => to(Phase::Standalone, pending || info.ender),
                Phase::Standalone => to(Phase::Standalone, pending || info.ender),
                _ => None,
            },
        }
    }

    fn accepting(state: RuleState) -> bool {
        !matches!(state.phase, Phase::AfterSeparator | Phase::Lead | Phase::Joining)
    }
}

/// Compiles `config` into a deterministic automaton over `alphabet`.
pub fn compile_rules(config: &RuleConfig, alphabet: Arc<Alphabet>) -> Result<ExpressionModel> {
    let by_name: HashMap<&str, usize> = config
        .classes
        .iter()
        .enumerate()
        .map(|(i, c)| (c.name.as_str(), i))
        .collect();
    if by_name.len() != config.classes.len() {
        return Err(Error::InvalidRule("duplicate class name".into()));
    }
    let lookup = |name: &str| {
        by_name
            .get(name)
            .copied()
            .ok_or_else(|| Error::InvalidRule(format!("rule references unknown class {name:?}")))
    };
    let mut classes: Vec<ClassInfo> = config
        .classes
        .iter()
        .map(|c| ClassInfo {
            kind: c.kind,
            join: false,
            ender: false,
        })
        .collect();
    let mut strict = false;
    for rule in &config.rules {
        match rule {
            Rule::Join(name) => {
                let i = lookup(name)?;
                if !matches!(classes[i].kind, ClassKind::Attaching | ClassKind::Standalone) {
                    return Err(Error::InvalidRule(format!("join class {name:?} must be punctuation")));
                }
                classes[i].join = true;
            }
            Rule::Capitalize { class, mode } => {
                let i = lookup(class)?;
                if !matches!(classes[i].kind, ClassKind::Attaching | ClassKind::Standalone) {
                    return Err(Error::InvalidRule(format!(
                        "sentence-end class {class:?} must be punctuation"
                    )));
                }
                classes[i].ender = true;
                strict |= *mode == CapitalMode::Strict;
            }
            Rule::Words | Rule::Numbers | Rule::Attach => {}
        }
    }
    let grammar = Grammar {
        words: config.has(&Rule::Words),
        numbers: config.has(&Rule::Numbers),
        attach: config.has(&Rule::Attach),
        classes,
    };

    let start = RuleState {
        phase: Phase::LineStart,
        capital_pending: strict,
    };
    let mut ids: HashMap<RuleState, usize> = HashMap::from([(start, 0)]);
    let mut states = vec![start];
    let mut transitions: Vec<Vec<Option<usize>>> = Vec::new();
    let mut queue = VecDeque::from([0usize]);
    while let Some(id) = queue.pop_front() {
        let state = states[id];
        let row: Vec<Option<usize>> = (0..grammar.classes.len())
            .map(|ci| {
                grammar.step(state, ci).map(|next| {
                    *ids.entry(next).or_insert_with(|| {
                        states.push(next);
                        queue.push_back(states.len() - 1);
                        states.len() - 1
                    })
                })
            })
            .collect();
        if transitions.len() <= id {
            transitions.resize(id + 1, Vec::new());
        }
        transitions[id] = row;
    }
    let accepting = states.iter().map(|&s| Grammar::accepting(s)).collect();
    ExpressionModel::new(alphabet, config.classes.clone(), 0, transitions, accepting)
}
