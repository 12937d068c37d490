//! Confidence-matrix files.
//!
//! Both variants start with three text lines: a magic line (`CTCMAT v1` for
//! text, `CTCMAT b1` for binary), the tab-separated column symbols with NaC
//! written as `<NaC>`, and `T=<frames>`. The text variant follows with one
//! line of tab-separated decimals per frame; the binary variant with
//! `T * S` little-endian `f32` values in row-major order.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;
use std::sync::Arc;

use crate::alphabet::{Alphabet, Symbol, NAC_TOKEN};
use crate::error::{Error, Result};
use crate::matrix::ConfidenceMatrix;

pub const TEXT_MAGIC: &str = "CTCMAT v1";
pub const BINARY_MAGIC: &str = "CTCMAT b1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum MatrixFormat {
    #[default]
    Text,
    Binary,
}

fn parse_err(line: usize, reason: impl Into<String>) -> Error {
    Error::Parse {
        line,
        reason: reason.into(),
    }
}

/// Serializes the column symbols as the header's alphabet line.
pub fn alphabet_line(alphabet: &Alphabet) -> String {
    alphabet
        .symbols()
        .iter()
        .map(|s| s.to_string())
        .collect::<Vec<_>>()
        .join("\t")
}

/// Parses a tab-separated alphabet line.
pub fn parse_alphabet_line(line: &str) -> Result<Alphabet> {
    let symbols = line
        .split('\t')
        .map(|token| {
            if token == NAC_TOKEN {
                return Ok(Symbol::NaC);
            }
            let mut chars = token.chars();
            match (chars.next(), chars.next()) {
                (Some(c), None) => Ok(Symbol::Char(c)),
                _ => Err(parse_err(2, format!("symbol {token:?} is not a single character"))),
            }
        })
        .collect::<Result<Vec<_>>>()?;
    Alphabet::new(symbols, Default::default()).map_err(|e| parse_err(2, e.to_string()))
}

fn read_line<R: BufRead>(reader: &mut R, line_no: usize) -> Result<String> {
    let mut buf = Vec::new();
    if reader.read_until(b'\n', &mut buf)? == 0 {
        return Err(parse_err(line_no, "unexpected end of file"));
    }
    if buf.last() == Some(&b'\n') {
        buf.pop();
    }
    if buf.last() == Some(&b'\r') {
        buf.pop();
    }
    String::from_utf8(buf).map_err(|_| parse_err(line_no, "invalid UTF-8"))
}

pub fn read_matrix<R: BufRead>(mut reader: R) -> Result<ConfidenceMatrix> {
    let magic = read_line(&mut reader, 1)?;
    let format = match magic.trim_start_matches('\u{feff}') {
        TEXT_MAGIC => MatrixFormat::Text,
        BINARY_MAGIC => MatrixFormat::Binary,
        other => return Err(parse_err(1, format!("unknown header {other:?}"))),
    };
    let alphabet = Arc::new(parse_alphabet_line(&read_line(&mut reader, 2)?)?);
    let frames_line = read_line(&mut reader, 3)?;
    let frames: usize = frames_line
        .strip_prefix("T=")
        .ok_or_else(|| parse_err(3, format!("expected T=<frames>, found {frames_line:?}")))?
        .trim()
        .parse()
        .map_err(|e| parse_err(3, format!("bad frame count: {e}")))?;
    let width = alphabet.len();
    let mut values = Vec::with_capacity(frames * width);
    match format {
        MatrixFormat::Text => {
            for t in 0..frames {
                let line_no = 4 + t;
                let line = read_line(&mut reader, line_no)?;
                let before = values.len();
                for token in line.split('\t') {
                    let v: f64 = token
                        .trim()
                        .parse()
                        .map_err(|_| parse_err(line_no, format!("bad number {token:?}")))?;
                    values.push(v);
                }
                if values.len() - before != width {
                    return Err(parse_err(
                        line_no,
                        format!("expected {width} values, found {}", values.len() - before),
                    ));
                }
            }
            let mut rest = String::new();
            reader.read_to_string(&mut rest)?;
            if !rest.trim().is_empty() {
                return Err(parse_err(4 + frames, "trailing data after the last frame"));
            }
        }
        MatrixFormat::Binary => {
            let mut bytes = Vec::new();
            reader.read_to_end(&mut bytes)?;
            if bytes.len() != frames * width * 4 {
                return Err(parse_err(
                    4,
                    format!("expected {} payload bytes, found {}", frames * width * 4, bytes.len()),
                ));
            }
            values.extend(
                bytes
                    .chunks_exact(4)
                    .map(|b| f32::from_le_bytes([b[0], b[1], b[2], b[3]]) as f64),
            );
        }
    }
    ConfidenceMatrix::from_flat(alphabet, frames, values)
}

pub fn write_matrix<W: Write>(matrix: &ConfidenceMatrix, format: MatrixFormat, mut writer: W) -> Result<()> {
    let magic = match format {
        MatrixFormat::Text => TEXT_MAGIC,
        MatrixFormat::Binary => BINARY_MAGIC,
    };
    writeln!(writer, "{magic}")?;
    writeln!(writer, "{}", alphabet_line(matrix.alphabet()))?;
    writeln!(writer, "T={}", matrix.frames())?;
    match format {
        MatrixFormat::Text => {
            for row in matrix.rows() {
                let line: Vec<String> = row.iter().map(|v| v.to_string()).collect();
                writeln!(writer, "{}", line.join("\t"))?;
            }
        }
        MatrixFormat::Binary => {
            for &v in matrix.as_flat() {
                writer.write_all(&(v as f32).to_le_bytes())?;
            }
        }
    }
    writer.flush()?;
    Ok(())
}

pub fn load_matrix(path: impl AsRef<Path>) -> Result<ConfidenceMatrix> {
    read_matrix(BufReader::new(File::open(path)?))
}

pub fn store_matrix(matrix: &ConfidenceMatrix, path: impl AsRef<Path>, format: MatrixFormat) -> Result<()> {
    write_matrix(matrix, format, BufWriter::new(File::create(path)?))
}
