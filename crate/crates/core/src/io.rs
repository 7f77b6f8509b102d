//! Plain-text instance and solution files.
//!
//! Instance layout, whitespace separated, `#` starting a comment line:
//!
//! ```text
//! n m p alpha
//! y_1 ... y_n
//! h_11 ... h_1m
//! ...
//! h_n1 ... h_nm
//! ```
//!
//! Floats are written in shortest round-trip form, so parsing a written
//! instance reproduces it bit for bit.

use std::fmt::Write as _;
use std::path::Path;

use thiserror::Error;

use crate::model::{Instance, Norm, Support};

#[derive(Debug, Error, PartialEq)]
pub enum ParseError {
    #[error("line {line}, column {column}: {message}")]
    At { line: usize, column: usize, message: String },
    #[error("unexpected end of input: {0}")]
    Eof(String),
    #[error("cannot read {path}: {message}")]
    Io { path: String, message: String },
}

struct Token<'a> {
    text: &'a str,
    line: usize,
    column: usize,
}

impl Token<'_> {
    fn error(&self, message: impl Into<String>) -> ParseError {
        ParseError::At {
            line: self.line,
            column: self.column,
            message: message.into(),
        }
    }

    fn real(&self) -> Result<f64, ParseError> {
        let v: f64 = self
            .text
            .parse()
            .map_err(|_| self.error(format!("expected a real number, found `{}`", self.text)))?;
        if !v.is_finite() {
            return Err(self.error(format!("non-finite value `{}`", self.text)));
        }
        Ok(v)
    }

    fn count(&self, what: &str) -> Result<usize, ParseError> {
        self.text
            .parse()
            .map_err(|_| self.error(format!("expected {what} as a non-negative integer, found `{}`", self.text)))
    }
}

/// Non-comment lines, each split into tokens with 1-based positions.
fn lines(text: &str) -> impl Iterator<Item = Vec<Token<'_>>> {
    text.lines().enumerate().filter_map(|(k, line)| {
        if line.trim_start().starts_with('#') || line.trim().is_empty() {
            return None;
        }
        let tokens = line
            .split_whitespace()
            .map(|t| Token {
                text: t,
                line: k + 1,
                // Byte offset of the token inside the line.
                column: t.as_ptr() as usize - line.as_ptr() as usize + 1,
            })
            .collect();
        Some(tokens)
    })
}

fn expect_len(tokens: &[Token<'_>], want: usize, what: &str) -> Result<(), ParseError> {
    if tokens.len() != want {
        let t = &tokens[0];
        return Err(ParseError::At {
            line: t.line,
            column: 1,
            message: format!("{what} needs {want} values, found {}", tokens.len()),
        });
    }
    Ok(())
}

pub fn parse_instance(text: &str) -> Result<Instance, ParseError> {
    let mut it = lines(text);
    let header = it.next().ok_or_else(|| ParseError::Eof("missing header `n m p alpha`".into()))?;
    expect_len(&header, 4, "header `n m p alpha`")?;
    let n = header[0].count("n")?;
    let m = header[1].count("m")?;
    if n == 0 || m == 0 {
        return Err(header[0].error("n and m must be at least 1"));
    }
    let norm: Norm = header[2].text.parse().map_err(|e: String| header[2].error(e))?;
    let alpha = header[3].real()?;
    if alpha < 0.0 {
        return Err(header[3].error(format!("alpha must be non-negative, found {alpha}")));
    }

    let y_line = it.next().ok_or_else(|| ParseError::Eof("missing observation line".into()))?;
    expect_len(&y_line, n, "observation line")?;
    let y = y_line.iter().map(Token::real).collect::<Result<Vec<_>, _>>()?;

    let mut h = Vec::with_capacity(n * m);
    for i in 0..n {
        let row = it
            .next()
            .ok_or_else(|| ParseError::Eof(format!("missing dictionary row {} of {n}", i + 1)))?;
        expect_len(&row, m, "dictionary row")?;
        for t in &row {
            h.push(t.real()?);
        }
    }
    if let Some(extra) = it.next() {
        return Err(extra[0].error("trailing data after the last dictionary row"));
    }
    Instance::new(n, m, h, y, norm, alpha).map_err(|e| ParseError::Eof(e.to_string()))
}

pub fn read_instance(path: &Path) -> Result<Instance, ParseError> {
    parse_instance(&read(path)?)
}

fn read(path: &Path) -> Result<String, ParseError> {
    std::fs::read_to_string(path).map_err(|e| ParseError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })
}

fn join(values: impl IntoIterator<Item = f64>) -> String {
    let mut out = String::new();
    for (k, v) in values.into_iter().enumerate() {
        if k > 0 {
            out.push(' ');
        }
        write!(out, "{v:?}").unwrap();
    }
    out
}

pub fn write_instance(inst: &Instance) -> String {
    let mut out = format!("{} {} {} {:?}\n", inst.n(), inst.m(), inst.norm(), inst.alpha());
    out.push_str(&join(inst.y().iter().copied()));
    out.push('\n');
    for i in 0..inst.n() {
        out.push_str(&join(inst.row(i).iter().copied()));
        out.push('\n');
    }
    out
}

/// Solution file: `m` on the first line, the `m` coefficients on the second.
pub fn parse_solution(text: &str) -> Result<Vec<f64>, ParseError> {
    let mut it = lines(text);
    let header = it.next().ok_or_else(|| ParseError::Eof("missing length line".into()))?;
    expect_len(&header, 1, "length line")?;
    let m = header[0].count("m")?;
    let values = match it.next() {
        Some(line) => {
            expect_len(&line, m, "coefficient line")?;
            line.iter().map(Token::real).collect::<Result<Vec<_>, _>>()?
        }
        None if m == 0 => Vec::new(),
        None => return Err(ParseError::Eof("missing coefficient line".into())),
    };
    if let Some(extra) = it.next() {
        return Err(extra[0].error("trailing data after the coefficients"));
    }
    Ok(values)
}

pub fn read_solution(path: &Path) -> Result<Vec<f64>, ParseError> {
    parse_solution(&read(path)?)
}

pub fn write_solution(x: &[f64]) -> String {
    format!("{}\n{}\n", x.len(), join(x.iter().copied()))
}

/// One line of 1-based indices, `-` for the empty support.
pub fn write_support(support: &Support) -> String {
    format!("{support}\n")
}

pub fn parse_support(text: &str) -> Result<Support, ParseError> {
    let mut indices = Vec::new();
    for line in lines(text) {
        for t in line {
            if t.text == "-" {
                continue;
            }
            let j = t.count("column index")?;
            if j == 0 {
                return Err(t.error("column indices are 1-based"));
            }
            indices.push(j - 1);
        }
    }
    Ok(Support::new(indices))
}
