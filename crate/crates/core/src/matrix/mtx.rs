//! Matrix Market exchange format: coordinate and array layouts, real /
//! integer / complex fields, all four symmetry qualifiers.

use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use num_complex::Complex64;

use super::{SparseMatrix, Symmetry};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MmFormat {
    Coordinate,
    Array,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MmField {
    Real,
    Integer,
    Complex,
}

struct Header {
    format: MmFormat,
    field: MmField,
    symmetry: Symmetry,
}

fn parse_err(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse { line, msg: msg.into() }
}

fn parse_header(line: &str, lineno: usize) -> Result<Header> {
    let tokens: Vec<String> = line.split_whitespace().map(str::to_ascii_lowercase).collect();
    if tokens.len() != 5 || tokens[0] != "%%matrixmarket" || tokens[1] != "matrix" {
        return Err(parse_err(
            lineno,
            "expected `%%MatrixMarket matrix <format> <field> <symmetry>`",
        ));
    }
    let format = match tokens[2].as_str() {
        "coordinate" => MmFormat::Coordinate,
        "array" => MmFormat::Array,
        other => return Err(parse_err(lineno, format!("unknown format `{other}`"))),
    };
    let field = match tokens[3].as_str() {
        "real" | "double" => MmField::Real,
        "integer" => MmField::Integer,
        "complex" => MmField::Complex,
        other => return Err(Error::UnsupportedField(other.to_string())),
    };
    let symmetry = match tokens[4].as_str() {
        "general" => Symmetry::General,
        "symmetric" => Symmetry::Symmetric,
        "skew-symmetric" => Symmetry::SkewSymmetric,
        "hermitian" => Symmetry::Hermitian,
        other => return Err(parse_err(lineno, format!("unknown symmetry `{other}`"))),
    };
    if symmetry == Symmetry::Hermitian && field != MmField::Complex {
        return Err(parse_err(lineno, "hermitian symmetry requires the complex field"));
    }
    Ok(Header {
        format,
        field,
        symmetry,
    })
}

fn parse_usize(tok: Option<&str>, lineno: usize, what: &str) -> Result<usize> {
    tok.ok_or_else(|| parse_err(lineno, format!("missing {what}")))?
        .parse()
        .map_err(|_| parse_err(lineno, format!("cannot parse {what}")))
}

fn parse_value<'a>(it: &mut impl Iterator<Item = &'a str>, field: MmField, lineno: usize) -> Result<Complex64> {
    let mut num = |what: &str| -> Result<f64> {
        let tok = it.next().ok_or_else(|| parse_err(lineno, format!("missing {what}")))?;
        // Fortran-style exponents (1.0D+03) appear in older collection files
        let v: f64 = tok
            .replace(['D', 'd'], "e")
            .parse()
            .map_err(|_| parse_err(lineno, format!("cannot parse {what} `{tok}`")))?;
        if !v.is_finite() {
            return Err(parse_err(lineno, format!("non-finite {what}")));
        }
        Ok(v)
    };
    match field {
        MmField::Real | MmField::Integer => Ok(Complex64::new(num("value")?, 0.0)),
        MmField::Complex => {
            let re = num("real part")?;
            let im = num("imaginary part")?;
            Ok(Complex64::new(re, im))
        }
    }
}

fn mirror(sym: Symmetry, v: Complex64) -> Complex64 {
    match sym {
        Symmetry::General | Symmetry::Symmetric => v,
        Symmetry::SkewSymmetric => -v,
        Symmetry::Hermitian => v.conj(),
    }
}

/// Parses Matrix Market text from any buffered reader.
pub fn parse_matrix_market<R: BufRead>(reader: R) -> Result<SparseMatrix> {
    let mut lines = reader.lines().enumerate().map(|(i, l)| (i + 1, l));
    let (hline, header) = match lines.next() {
        Some((n, line)) => {
            let line = line.map_err(|e| parse_err(n, e.to_string()))?;
            (n, parse_header(&line, n)?)
        }
        None => return Err(parse_err(1, "empty file")),
    };

    let mut size: Option<(usize, usize, usize)> = None;
    let mut triplets: Vec<(usize, usize, Complex64)> = Vec::new();
    let mut seen = 0usize;
    let mut last_line = hline;

    for (lineno, line) in lines {
        let line = line.map_err(|e| parse_err(lineno, e.to_string()))?;
        last_line = lineno;
        let t = line.trim();
        if t.is_empty() || t.starts_with('%') {
            continue;
        }
        let mut it = t.split_whitespace();
        let Some((m, n, expected)) = size else {
            let m = parse_usize(it.next(), lineno, "row count")?;
            let n = parse_usize(it.next(), lineno, "column count")?;
            if m == 0 || n == 0 {
                return Err(parse_err(lineno, "dimensions must be positive"));
            }
            if header.symmetry != Symmetry::General && m != n {
                return Err(Error::DimensionMismatch(format!(
                    "{m}x{n} matrix cannot carry a symmetry qualifier"
                )));
            }
            let expected = match header.format {
                MmFormat::Coordinate => parse_usize(it.next(), lineno, "entry count")?,
                MmFormat::Array => match header.symmetry {
                    Symmetry::General => m * n,
                    Symmetry::SkewSymmetric => n * (n - 1) / 2,
                    _ => n * (n + 1) / 2,
                },
            };
            if it.next().is_some() {
                return Err(parse_err(lineno, "trailing tokens on size line"));
            }
            size = Some((m, n, expected));
            continue;
        };

        if seen == expected {
            return Err(Error::DimensionMismatch(format!(
                "line {lineno}: more entries than the {expected} declared"
            )));
        }
        let (i, j) = match header.format {
            MmFormat::Coordinate => {
                let i = parse_usize(it.next(), lineno, "row index")?;
                let j = parse_usize(it.next(), lineno, "column index")?;
                if i == 0 || j == 0 || i > m || j > n {
                    return Err(Error::DimensionMismatch(format!(
                        "line {lineno}: index ({i}, {j}) outside {m}x{n}"
                    )));
                }
                (i - 1, j - 1)
            }
            MmFormat::Array => array_position(seen, m, header.symmetry),
        };
        let v = parse_value(&mut it, header.field, lineno)?;
        if it.next().is_some() {
            return Err(parse_err(lineno, "trailing tokens on entry line"));
        }
        seen += 1;

        if header.symmetry != Symmetry::General && i < j {
            return Err(parse_err(lineno, "symmetric storage must use the lower triangle"));
        }
        if header.symmetry == Symmetry::SkewSymmetric && i == j {
            return Err(parse_err(lineno, "skew-symmetric storage cannot hold diagonal entries"));
        }
        if header.format == MmFormat::Array && v == Complex64::new(0.0, 0.0) {
            continue;
        }
        triplets.push((i, j, v));
        if header.symmetry != Symmetry::General && i != j {
            triplets.push((j, i, mirror(header.symmetry, v)));
        }
    }

    let Some((m, n, expected)) = size else {
        return Err(parse_err(last_line, "missing size line"));
    };
    if seen != expected {
        return Err(Error::DimensionMismatch(format!(
            "declared {expected} entries but found {seen}"
        )));
    }
    check_no_duplicates(&mut triplets)?;
    SparseMatrix::from_triplets(m, n, triplets, header.symmetry)
}

/// Array layout is column-major; symmetric variants store only the lower
/// triangle (skew-symmetric without the diagonal).
fn array_position(k: usize, m: usize, sym: Symmetry) -> (usize, usize) {
    match sym {
        Symmetry::General => (k % m, k / m),
        _ => {
            let skip = usize::from(sym == Symmetry::SkewSymmetric);
            let mut rem = k;
            let mut j = 0;
            loop {
                let len = m - j - skip;
                if rem < len {
                    return (j + skip + rem, j);
                }
                rem -= len;
                j += 1;
            }
        }
    }
}

fn check_no_duplicates(t: &mut [(usize, usize, Complex64)]) -> Result<()> {
    t.sort_by_key(|&(i, j, _)| (j, i));
    if let Some(w) = t.windows(2).find(|w| w[0].0 == w[1].0 && w[0].1 == w[1].1) {
        return Err(Error::DimensionMismatch(format!(
            "duplicate entry ({}, {})",
            w[0].0 + 1,
            w[0].1 + 1
        )));
    }
    Ok(())
}

pub fn read_matrix_market(path: impl AsRef<Path>) -> Result<SparseMatrix> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_matrix_market(BufReader::new(file))
}

/// Writes `m` as a general coordinate file. Values use shortest round-trip
/// formatting, so reading the file back reproduces every entry exactly.
pub fn write_matrix_market<W: Write>(mut w: W, m: &SparseMatrix) -> std::io::Result<()> {
    let complex = !m.is_real();
    writeln!(
        w,
        "%%MatrixMarket matrix coordinate {} general",
        if complex { "complex" } else { "real" }
    )?;
    writeln!(w, "{} {} {}", m.n_rows(), m.n_cols(), m.nnz())?;
    for &(i, j, v) in m.entries() {
        if complex {
            writeln!(w, "{} {} {:e} {:e}", i + 1, j + 1, v.re, v.im)?;
        } else {
            writeln!(w, "{} {} {:e}", i + 1, j + 1, v.re)?;
        }
    }
    Ok(())
}
