//! Shared helpers for the plain-text artifact formats.

use std::fs;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use crate::error::{Error, Result};

/// 17 significant digits: lossless for `f64`.
pub fn fmt_exact(x: f64) -> String {
    format!("{x:.16e}")
}

/// 15 significant digits, the CSV precision.
pub fn fmt_csv(x: f64) -> String {
    format!("{x:.14e}")
}

pub fn parse_f64(token: &str, context: &str) -> Result<f64> {
    token
        .trim()
        .parse::<f64>()
        .map_err(|e| Error::parse(context, format!("'{token}': {e}")))
}

pub fn parse_usize(token: &str, context: &str) -> Result<usize> {
    token
        .trim()
        .parse::<usize>()
        .map_err(|e| Error::parse(context, format!("'{token}': {e}")))
}

pub fn create(path: &Path) -> Result<BufWriter<fs::File>> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    fs::File::create(path)
        .map(BufWriter::new)
        .map_err(|e| Error::io(path, e))
}

pub fn open(path: &Path) -> Result<BufReader<fs::File>> {
    fs::File::open(path)
        .map(BufReader::new)
        .map_err(|e| Error::io(path, e))
}

/// Runs `body` against a buffered file writer and flushes it.
pub fn write_file(path: &Path, body: impl FnOnce(&mut dyn Write) -> std::io::Result<()>) -> Result<()> {
    let mut w = create(path)?;
    body(&mut w).map_err(|e| Error::io(path, e))?;
    w.flush().map_err(|e| Error::io(path, e))
}

/// Ordered `key = value` header lines terminated by a line equal to `end`.
/// Blank lines and `#` comments are skipped.
pub fn read_header(
    lines: &mut impl Iterator<Item = std::io::Result<String>>,
    end: &str,
    context: &str,
) -> Result<Vec<(String, String)>> {
    let mut out = Vec::new();
    for line in lines {
        let line = line.map_err(|e| Error::parse(context, e.to_string()))?;
        let t = line.trim();
        if t.is_empty() || t.starts_with('#') {
            continue;
        }
        if t == end {
            return Ok(out);
        }
        let (k, v) = t
            .split_once('=')
            .ok_or_else(|| Error::parse(context, format!("malformed header line '{t}'")))?;
        out.push((k.trim().to_string(), v.trim().to_string()));
    }
    Err(Error::parse(context, format!("missing '{end}' marker")))
}

/// Looks up a required header key.
pub fn header_value<'a>(header: &'a [(String, String)], key: &str, context: &str) -> Result<&'a str> {
    header
        .iter()
        .find(|(k, _)| k == key)
        .map(|(_, v)| v.as_str())
        .ok_or_else(|| Error::parse(context, format!("missing header key '{key}'")))
}

pub fn lines_of<R: BufRead>(r: R) -> impl Iterator<Item = std::io::Result<String>> {
    r.lines()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_format_round_trips() {
        for x in [0.1, std::f64::consts::PI * 0.2, -1.0e-300, 6.02214076e23, 0.0] {
            assert_eq!(parse_f64(&fmt_exact(x), "t").unwrap(), x);
        }
        assert_eq!(fmt_csv(0.5), "5.00000000000000e-1");
    }

    #[test]
    fn header_parsing() {
        let text = "# c\na = 1\n\nb=two\n---\nrest";
        let mut it = text.lines().map(|l| Ok(l.to_string()));
        let h = read_header(&mut it, "---", "t").unwrap();
        assert_eq!(header_value(&h, "b", "t").unwrap(), "two");
        assert!(header_value(&h, "c", "t").is_err());
        assert_eq!(it.next().unwrap().unwrap(), "rest");
        let mut it = "a = 1".lines().map(|l| Ok(l.to_string()));
        assert!(read_header(&mut it, "---", "t").is_err());
    }
}
