//! Manifest-driven batch decoding.
//!
//! A manifest lists one text line per record:
//!
//! ```text
//! # id    expert matrices, best ranked first    optional reference
//! line-01<TAB>e1/line-01.ctc<TAB>e2/line-01.ctc<TAB>ref=gt/line-01.txt
//! ```
//!
//! Fields are tab-separated, blank lines and `#` comments are skipped, and
//! relative paths resolve against the manifest's directory.

use std::collections::HashSet;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use crate::best_path::decode_best_path;
use crate::committee::{committee_decode, CommitteeConfig};
use crate::dictionary::{decode_dictionary, decode_dictionary_with_expression, DecodeParams, Lexicon};
use crate::error::{Error, Result};
use crate::expression::{decode_expression, ExpressionModel};
use crate::hypothesis::Hypothesis;
use crate::io::load_matrix;
use crate::matrix::ConfidenceMatrix;
use crate::search::BeamWidth;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ManifestRecord {
    pub id: String,
    pub matrices: Vec<PathBuf>,
    pub reference: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Manifest {
    pub records: Vec<ManifestRecord>,
}

impl Manifest {
    pub fn parse(text: &str, base_dir: &Path) -> Result<Self> {
        let mut records: Vec<ManifestRecord> = Vec::new();
        let mut seen = HashSet::new();
        for (i, raw) in text.lines().enumerate() {
            let line_no = i + 1;
            let line = raw.trim_end_matches('\r');
            if line.trim().is_empty() || line.trim_start().starts_with('#') {
                continue;
            }
            let mut fields = line.split('\t');
            let id = fields.next().unwrap_or_default().trim().to_string();
            if id.is_empty() {
                return Err(Error::Parse {
                    line: line_no,
                    reason: "empty line id".into(),
                });
            }
            let mut matrices = Vec::new();
            let mut reference = None;
            for field in fields.map(str::trim).filter(|f| !f.is_empty()) {
                if let Some(r) = field.strip_prefix("ref=") {
                    if reference.replace(base_dir.join(r)).is_some() {
                        return Err(Error::Parse {
                            line: line_no,
                            reason: "more than one reference".into(),
                        });
                    }
                } else {
                    matrices.push(base_dir.join(field));
                }
            }
            if matrices.is_empty() {
                return Err(Error::Parse {
                    line: line_no,
                    reason: format!("record {id:?} lists no matrix"),
                });
            }
            if let Some(first) = records.first() {
                if first.matrices.len() != matrices.len() {
                    return Err(Error::InvalidManifest(format!(
                        "record {id:?} has {} experts, expected {}",
                        matrices.len(),
                        first.matrices.len()
                    )));
                }
            }
            if !seen.insert(id.clone()) {
                return Err(Error::InvalidManifest(format!("duplicate line id {id:?}")));
            }
            records.push(ManifestRecord {
                id,
                matrices,
                reference,
            });
        }
        Ok(Self { records })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path)?;
        Self::parse(&text, path.parent().unwrap_or_else(|| Path::new("")))
    }

    /// Experts per record, 0 for an empty manifest.
    pub fn experts(&self) -> usize {
        self.records.first().map_or(0, |r| r.matrices.len())
    }
}

/// A decoding scheme with its parameters. Single-expert schemes decode the
/// first matrix of each record.
#[derive(Debug, Clone)]
pub enum Scheme {
    BestPath,
    Expression {
        model: ExpressionModel,
        beam: BeamWidth,
    },
    Dictionary {
        lexicon: Lexicon,
        params: DecodeParams,
        model: Option<ExpressionModel>,
    },
    Committee {
        lexicon: Lexicon,
        params: DecodeParams,
        config: CommitteeConfig,
    },
}

impl Scheme {
    pub fn decode(&self, matrices: &[ConfidenceMatrix]) -> Result<Hypothesis> {
        let first = matrices.first().ok_or(Error::LengthMismatch {
            expected: 1,
            found: 0,
        })?;
        match self {
            Scheme::BestPath => Ok(decode_best_path(first)),
            Scheme::Expression { model, beam } => decode_expression(first, model, *beam),
            Scheme::Dictionary {
                lexicon,
                params,
                model: None,
            } => decode_dictionary(first, lexicon, params),
            Scheme::Dictionary {
                lexicon,
                params,
                model: Some(model),
            } => decode_dictionary_with_expression(first, lexicon, params, model),
            Scheme::Committee {
                lexicon,
                params,
                config,
            } => committee_decode(matrices, lexicon, params, config),
        }
    }

    /// Matrices each record must provide.
    fn experts_needed(&self) -> usize {
        match self {
            Scheme::Committee { config, .. } => config.experts,
            _ => 1,
        }
    }
}

#[derive(Debug)]
pub struct BatchLine {
    pub id: String,
    pub result: Result<Hypothesis>,
}

impl BatchLine {
    /// `<id>\t<text>` or `<id>\tERROR:<code>`.
    pub fn to_line(&self) -> String {
        match &self.result {
            Ok(h) => format!("{}\t{}", self.id, h.text),
            Err(e) => format!("{}\tERROR:{}", self.id, e.code()),
        }
    }
}

/// Decodes every record in parallel. Failures stay attached to their line;
/// the output order is the manifest order.
pub fn run_batch(manifest: &Manifest, scheme: &Scheme) -> Result<Vec<BatchLine>> {
    let needed = scheme.experts_needed();
    if !manifest.records.is_empty() && manifest.experts() < needed {
        return Err(Error::InvalidManifest(format!(
            "scheme needs {needed} experts per record, manifest has {}",
            manifest.experts()
        )));
    }
    Ok(manifest
        .records
        .par_iter()
        .map(|record| {
            let result = record.matrices[..needed]
                .iter()
                .map(load_matrix)
                .collect::<Result<Vec<_>>>()
                .and_then(|ms| scheme.decode(&ms));
            if let Err(e) = &result {
                log::warn!("{}: {e}", record.id);
            }
            BatchLine {
                id: record.id.clone(),
                result,
            }
        })
        .collect())
}

pub fn write_batch<W: Write>(lines: &[BatchLine], mut writer: W) -> Result<()> {
    for line in lines {
        writeln!(writer, "{}", line.to_line())?;
    }
    writer.flush()?;
    Ok(())
}

/// Reads `<id>\t<text>` lines back, e.g. for evaluation joins.
pub fn parse_hypothesis_file(text: &str) -> Result<Vec<(String, String)>> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.is_empty())
        .map(|(i, l)| {
            let (id, body) = l.split_once('\t').ok_or_else(|| Error::Parse {
                line: i + 1,
                reason: "expected <id>\\t<text>".into(),
            })?;
            Ok((id.to_string(), body.to_string()))
        })
        .collect()
}
