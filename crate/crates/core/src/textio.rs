//! Line-oriented helpers shared by the model file readers.

use crate::{Error, Result};

pub(crate) struct Lines<'a> {
    inner: std::iter::Enumerate<std::str::Lines<'a>>,
    last: usize,
}

impl<'a> Lines<'a> {
    pub(crate) fn new(text: &'a str) -> Self {
        Lines {
            inner: text.lines().enumerate(),
            last: 0,
        }
    }

    pub(crate) fn next_line(&mut self) -> Result<&'a str> {
        match self.inner.next() {
            Some((i, line)) => {
                self.last = i + 1;
                Ok(line)
            }
            None => Err(Error::format(format!(
                "unexpected end of file after line {}",
                self.last
            ))),
        }
    }

    /// Reads a `key value` line and returns the value part.
    pub(crate) fn keyed(&mut self, key: &str) -> Result<&'a str> {
        let line = self.next_line()?;
        match line.split_once(' ') {
            Some((k, v)) if k == key => Ok(v),
            _ if line == key => Ok(""),
            _ => Err(Error::format(format!(
                "line {}: expected `{key}`, found `{line}`",
                self.last
            ))),
        }
    }

    pub(crate) fn keyed_parse<T: std::str::FromStr>(&mut self, key: &str) -> Result<T> {
        let v = self.keyed(key)?;
        v.parse()
            .map_err(|_| Error::format(format!("line {}: bad value `{v}` for `{key}`", self.last)))
    }

    pub(crate) fn bad(&self, what: &str) -> Error {
        Error::format(format!("line {}: {what}", self.last))
    }
}

pub(crate) fn parse_f64s(s: &str, expected: usize, lines: &Lines<'_>) -> Result<Vec<f64>> {
    let v: Vec<f64> = s
        .split(' ')
        .filter(|t| !t.is_empty())
        .map(|t| t.parse::<f64>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|_| lines.bad("malformed number"))?;
    if v.len() != expected {
        return Err(lines.bad(&format!("expected {expected} values, found {}", v.len())));
    }
    Ok(v)
}

/// Shortest round-trip representation, so a reloaded model scores bit-identically.
pub(crate) fn fmt_f64(x: f64) -> String {
    format!("{x:e}")
}
