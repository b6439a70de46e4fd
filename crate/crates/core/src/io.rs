//! CSV exchange of coefficient sets and time samples.

use std::io::{Read, Write};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Serialize, Deserialize)]
struct CoefficientRow {
    k: i64,
    re: f64,
    im: f64,
}

/// Reads `k,re,im` rows.
pub fn read_coefficients<R: Read>(reader: R) -> Result<Vec<(i64, Complex64)>> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let headers = rdr.headers()?.clone();
    if headers.iter().collect::<Vec<_>>() != ["k", "re", "im"] {
        return Err(Error::InvalidInput(format!("expected header k,re,im, found {}", headers.iter().collect::<Vec<_>>().join(","))));
    }
    rdr.deserialize::<CoefficientRow>()
        .map(|row| {
            let row = row?;
            Ok((row.k, Complex64::new(row.re, row.im)))
        })
        .collect()
}

/// Writes `k,re,im` rows with 17 significant digits.
pub fn write_coefficients<W: Write>(mut writer: W, rows: &[(i64, Complex64)]) -> Result<()> {
    writeln!(writer, "k,re,im")?;
    for (k, c) in rows {
        writeln!(writer, "{k},{:.16e},{:.16e}", c.re, c.im)?;
    }
    Ok(())
}

/// Writes `t,re,im,abs` rows with 17 significant digits.
pub fn write_samples<W: Write>(mut writer: W, rows: &[(f64, Complex64)]) -> Result<()> {
    writeln!(writer, "t,re,im,abs")?;
    for (t, y) in rows {
        writeln!(writer, "{t:.16e},{:.16e},{:.16e},{:.16e}", y.re, y.im, y.norm())?;
    }
    Ok(())
}

/// Reads one integer per line (blank lines and `#` comments ignored).
pub fn read_indices<R: Read>(mut reader: R) -> Result<Vec<i64>> {
    let mut text = String::new();
    reader.read_to_string(&mut text)?;
    text.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(|l| l.parse().map_err(|_| Error::InvalidInput(format!("bad index {l:?}"))))
        .collect()
}
