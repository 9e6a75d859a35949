//! Deterministic numeric formatting and CSV assembly.
//!
//! Derived outputs use fixed notation with nine significant digits so that
//! repeated runs are byte-identical and the files diff cleanly.

use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};

/// Fixed-notation formatting with nine significant digits.
pub fn sig9(x: f64) -> String {
    if x == 0.0 {
        return "0.00000000".to_string();
    }
    let exponent = x.abs().log10().floor() as i32;
    let decimals = (8 - exponent).clamp(0, 40) as usize;
    format!("{x:.decimals$}")
}

/// Shortest round-trip representation; used for file name slugs.
pub fn slug(x: f64) -> String {
    format!("{x}")
}

/// Write newline-terminated CSV with one header line.
pub fn write_csv(path: &Path, header: &str, rows: &[String]) -> Result<()> {
    let io_err = |source| Error::Io {
        path: path.display().to_string(),
        source,
    };
    let file = std::fs::File::create(path).map_err(io_err)?;
    let mut out = std::io::BufWriter::new(file);
    let mut run = || -> std::io::Result<()> {
        writeln!(out, "{header}")?;
        for row in rows {
            writeln!(out, "{row}")?;
        }
        out.flush()
    };
    run().map_err(io_err)
}

/// Write arbitrary text to a file.
pub fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nine_significant_digits_fixed_notation() {
        assert_eq!(sig9(0.25), "0.250000000");
        assert_eq!(sig9(1.0), "1.00000000");
        assert_eq!(sig9(826.0), "826.000000");
        assert_eq!(sig9(0.0001234567891), "0.000123456789");
        assert_eq!(sig9(-0.5), "-0.500000000");
        assert_eq!(sig9(0.0), "0.00000000");
        assert_eq!(sig9(123456789.0), "123456789");
    }

    #[test]
    fn slug_is_shortest() {
        assert_eq!(slug(1.4), "1.4");
        assert_eq!(slug(6.5), "6.5");
        assert_eq!(slug(0.0), "0");
    }
}
