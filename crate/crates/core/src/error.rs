use std::io;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("character {ch:?} at position {position} has no canonical alphabet symbol")]
    UnmappableCharacter { position: usize, ch: char },

    #[error("symbol {0:?} is not a printable symbol of the alphabet")]
    InvalidSymbol(char),

    #[error("invalid alphabet: {0}")]
    InvalidAlphabet(String),

    #[error("length mismatch: expected {expected}, found {found}")]
    LengthMismatch { expected: usize, found: usize },

    #[error("row {row}: {reason}")]
    InvariantViolation { row: usize, reason: String },

    #[error("parse error at line {line}: {reason}")]
    Parse { line: usize, reason: String },

    #[error("invalid rule: {0}")]
    InvalidRule(String),

    #[error("expression model accepts no string")]
    EmptyLanguage,

    #[error("no accepted string survived the search")]
    NoAcceptedString,

    #[error("lexicon contains no words")]
    EmptyLexicon,

    #[error("matrix alphabet does not match the model alphabet")]
    AlphabetMismatch,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid manifest: {0}")]
    InvalidManifest(String),

    #[error(transparent)]
    Io(#[from] io::Error),
}

impl Error {
    /// Short stable identifier used in batch output (`ERROR:<code>`).
    pub fn code(&self) -> &'static str {
        match self {
            Error::UnmappableCharacter { .. } => "UnmappableCharacter",
            Error::InvalidSymbol(_) => "InvalidSymbol",
            Error::InvalidAlphabet(_) => "InvalidAlphabet",
            Error::LengthMismatch { .. } => "LengthMismatch",
            Error::InvariantViolation { .. } => "InvariantViolation",
            Error::Parse { .. } => "ParseError",
            Error::InvalidRule(_) => "InvalidRule",
            Error::EmptyLanguage => "EmptyLanguage",
            Error::NoAcceptedString => "NoAcceptedString",
            Error::EmptyLexicon => "EmptyLexicon",
            Error::AlphabetMismatch => "AlphabetMismatch",
            Error::InvalidParameter(_) => "InvalidParameter",
            Error::InvalidManifest(_) => "InvalidManifest",
            Error::Io(_) => "Io",
        }
    }
}
