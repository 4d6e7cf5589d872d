//! Matrix Market and plain-text vector I/O.
//!
//! The sparse format is the coordinate Matrix Market profile
//! (`%%MatrixMarket matrix coordinate real general`); vectors are plain text
//! with one value per line (`%` and `#` start comment lines). Values are
//! written with 17 significant digits so that write → read round-trips are
//! bit-exact for finite `f64`.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use crate::{SparseCoreError, SparseMatrix};

const HEADER: &str = "%%MatrixMarket matrix coordinate real general";

/// Writes `a` to `path` in Matrix Market coordinate format.
///
/// # Errors
/// Propagates file-system failures.
pub fn write_matrix_market(
    path: &Path,
    a: &SparseMatrix,
) -> Result<(), SparseCoreError> {
    let mut out = BufWriter::new(File::create(path)?);
    writeln!(out, "{HEADER}")?;
    writeln!(out, "{} {} {}", a.n_rows(), a.n_cols(), a.nnz())?;
    for i in 0..a.n_rows() {
        let (cols, vals) = a.row(i);
        for (&c, &v) in cols.iter().zip(vals) {
            writeln!(out, "{} {} {:.17e}", i + 1, c + 1, v)?;
        }
    }
    out.flush()?;
    Ok(())
}

/// Reads a Matrix Market coordinate file written by [`write_matrix_market`]
/// (or any `matrix coordinate real general` file). Duplicate coordinates are
/// summed.
///
/// # Errors
/// [`SparseCoreError::Parse`] with a 1-based line number on malformed input;
/// [`SparseCoreError::Io`] on file-system failures.
pub fn read_matrix_market(path: &Path) -> Result<SparseMatrix, SparseCoreError> {
    let reader = BufReader::new(File::open(path)?);
    let mut lines = reader.lines().enumerate();

    // Header line.
    let (line_no, header) = match lines.next() {
        Some((i, l)) => (i + 1, l?),
        None => {
            return Err(parse_err(1, "empty file, expected Matrix Market header"))
        }
    };
    let tokens: Vec<String> = header
        .split_whitespace()
        .map(|t| t.to_ascii_lowercase())
        .collect();
    let banner_ok = tokens.len() == 5
        && tokens[0] == "%%matrixmarket"
        && tokens[1] == "matrix"
        && tokens[2] == "coordinate"
        && tokens[3] == "real"
        && tokens[4] == "general";
    if !banner_ok {
        return Err(parse_err(
            line_no,
            &format!("unsupported Matrix Market header: {header:?}"),
        ));
    }

    // Size line (first non-comment line).
    let mut size: Option<(usize, usize, usize)> = None;
    let mut triplets: Vec<(usize, usize, f64)> = Vec::new();
    for (idx, line) in lines {
        let line_no = idx + 1;
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('%') {
            continue;
        }
        let fields: Vec<&str> = trimmed.split_whitespace().collect();
        match size {
            None => {
                if fields.len() != 3 {
                    return Err(parse_err(
                        line_no,
                        "size line must contain `rows cols nnz`",
                    ));
                }
                let n_rows = parse_usize(fields[0], line_no)?;
                let n_cols = parse_usize(fields[1], line_no)?;
                let nnz = parse_usize(fields[2], line_no)?;
                triplets.reserve(nnz);
                size = Some((n_rows, n_cols, nnz));
            }
            Some((n_rows, n_cols, _)) => {
                if fields.len() != 3 {
                    return Err(parse_err(
                        line_no,
                        "entry line must contain `row col value`",
                    ));
                }
                let r = parse_usize(fields[0], line_no)?;
                let c = parse_usize(fields[1], line_no)?;
                let v = parse_f64(fields[2], line_no)?;
                if r == 0 || c == 0 || r > n_rows || c > n_cols {
                    return Err(parse_err(
                        line_no,
                        &format!(
                            "coordinate ({r}, {c}) outside 1..={n_rows} x 1..={n_cols}"
                        ),
                    ));
                }
                triplets.push((r - 1, c - 1, v));
            }
        }
    }
    let Some((n_rows, n_cols, nnz)) = size else {
        return Err(parse_err(2, "missing size line"));
    };
    if triplets.len() != nnz {
        return Err(parse_err(
            2,
            &format!("size line promised {nnz} entries, found {}", triplets.len()),
        ));
    }
    SparseMatrix::from_triplets(n_rows, n_cols, &triplets)
}

/// Writes a vector as plain text, one value per line.
///
/// # Errors
/// Propagates file-system failures.
pub fn write_vector(path: &Path, v: &[f64]) -> Result<(), SparseCoreError> {
    let mut out = BufWriter::new(File::create(path)?);
    for x in v {
        writeln!(out, "{x:.17e}")?;
    }
    out.flush()?;
    Ok(())
}

/// Reads a plain-text vector: one value per line, `%`/`#` comments and blank
/// lines ignored.
///
/// # Errors
/// [`SparseCoreError::Parse`] with a 1-based line number on malformed input.
pub fn read_vector(path: &Path) -> Result<Vec<f64>, SparseCoreError> {
    let reader = BufReader::new(File::open(path)?);
    let mut out = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('%') || trimmed.starts_with('#') {
            continue;
        }
        out.push(parse_f64(trimmed, idx + 1)?);
    }
    Ok(out)
}

fn parse_err(line: usize, message: &str) -> SparseCoreError {
    SparseCoreError::Parse {
        line,
        message: message.to_string(),
    }
}

fn parse_usize(tok: &str, line: usize) -> Result<usize, SparseCoreError> {
    tok.parse::<usize>()
        .map_err(|e| parse_err(line, &format!("bad integer {tok:?}: {e}")))
}

fn parse_f64(tok: &str, line: usize) -> Result<f64, SparseCoreError> {
    tok.parse::<f64>()
        .map_err(|e| parse_err(line, &format!("bad number {tok:?}: {e}")))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::SeededRng;

    fn random_matrix(rng: &mut SeededRng, n: usize, m: usize) -> SparseMatrix {
        let mut triplets = Vec::new();
        for i in 0..n {
            for j in 0..m {
                if rng.bernoulli(0.4) {
                    // Mix magnitudes to stress the formatter.
                    let v = rng.standard_normal() * 10f64.powi(rng.index(20) as i32 - 10);
                    triplets.push((i, j, v));
                }
            }
        }
        SparseMatrix::from_triplets(n, m, &triplets).unwrap()
    }

    #[test]
    fn matrix_round_trip_is_bit_exact() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("a.mtx");
        let mut rng = SeededRng::new(99, 0);
        let a = random_matrix(&mut rng, 17, 9);
        write_matrix_market(&path, &a).unwrap();
        let b = read_matrix_market(&path).unwrap();
        assert_eq!(a, b, "matrix changed across a write/read round trip");
    }

    #[test]
    fn vector_round_trip_is_bit_exact() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("v.txt");
        let mut rng = SeededRng::new(5, 1);
        let v: Vec<f64> = (0..64)
            .map(|_| rng.standard_normal() * 10f64.powi(rng.index(40) as i32 - 20))
            .collect();
        write_vector(&path, &v).unwrap();
        let w = read_vector(&path).unwrap();
        assert_eq!(v.len(), w.len());
        for (a, b) in v.iter().zip(&w) {
            assert_eq!(a.to_bits(), b.to_bits(), "value {a} changed to {b}");
        }
    }

    #[test]
    fn parse_error_reports_line_number() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.mtx");
        std::fs::write(
            &path,
            "%%MatrixMarket matrix coordinate real general\n2 2 2\n1 1 1.0\n2 oops 2.0\n",
        )
        .unwrap();
        match read_matrix_market(&path) {
            Err(SparseCoreError::Parse { line, .. }) => assert_eq!(line, 4),
            other => panic!("expected a parse error, got {other:?}"),
        }
    }

    #[test]
    fn wrong_header_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("hdr.mtx");
        std::fs::write(&path, "%%MatrixMarket matrix array real general\n2 2\n").unwrap();
        match read_matrix_market(&path) {
            Err(SparseCoreError::Parse { line, .. }) => assert_eq!(line, 1),
            other => panic!("expected a parse error, got {other:?}"),
        }
    }

    #[test]
    fn out_of_range_coordinate_is_rejected_with_line() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("oob.mtx");
        std::fs::write(
            &path,
            "%%MatrixMarket matrix coordinate real general\n2 2 1\n3 1 1.0\n",
        )
        .unwrap();
        match read_matrix_market(&path) {
            Err(SparseCoreError::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("expected a parse error, got {other:?}"),
        }
    }

    #[test]
    fn vector_comments_and_blanks_are_skipped() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("v.txt");
        std::fs::write(&path, "% header\n\n1.5\n# note\n-2.5\n").unwrap();
        assert_eq!(read_vector(&path).unwrap(), vec![1.5, -2.5]);
    }
}
