//! Deterministic number and table formatting: CSV with comma separators,
//! dot decimals, nine significant digits, plus a markdown mirror.

use std::path::{Path, PathBuf};

use crate::error::{Error, Result};

/// Formats with nine significant digits; plain notation where it fits,
/// scientific for very large or very small magnitudes.
pub fn fmt_sig(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    if x.is_nan() {
        return "nan".to_string();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf" } else { "-inf" }.to_string();
    }
    let exponent = x.abs().log10().floor() as i32;
    if (-4..9).contains(&exponent) {
        let decimals = (8 - exponent).max(0) as usize;
        format!("{x:.decimals$}")
    } else {
        format!("{x:.8e}")
    }
}

pub fn write_csv(path: &Path, header: &[String], rows: &[Vec<String>]) -> Result<()> {
    let mut text = String::new();
    text.push_str(&header.join(","));
    text.push('\n');
    for row in rows {
        text.push_str(&row.join(","));
        text.push('\n');
    }
    write_text(path, &text)
}

pub fn write_markdown_table(path: &Path, header: &[String], rows: &[Vec<String>]) -> Result<()> {
    let mut text = String::new();
    text.push_str("| ");
    text.push_str(&header.join(" | "));
    text.push_str(" |\n|");
    for _ in header {
        text.push_str(" --- |");
    }
    text.push('\n');
    for row in rows {
        text.push_str("| ");
        text.push_str(&row.join(" | "));
        text.push_str(" |\n");
    }
    write_text(path, &text)
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent).map_err(|source| Error::Io {
                path: PathBuf::from(parent),
                source,
            })?;
        }
    }
    std::fs::write(path, text).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nine_significant_digits() {
        assert_eq!(fmt_sig(13.2696765846609), "13.2696766");
        assert_eq!(fmt_sig(154860.0), "154860.000");
        assert_eq!(fmt_sig(0.5), "0.500000000");
        assert_eq!(fmt_sig(-0.00144391161), "-0.00144391161");
        assert_eq!(fmt_sig(0.0), "0");
        assert_eq!(fmt_sig(f64::INFINITY), "inf");
        assert_eq!(fmt_sig(1.23e12), "1.23000000e12");
        assert_eq!(fmt_sig(1e-7), "1.00000000e-7");
    }
}
