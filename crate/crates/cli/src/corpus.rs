//! Sparse corpus text format: one data point per line,
//! `label idx:val idx:val ...` with 1-based, strictly increasing indices.
//! Anything after `#` is a comment.

use std::fs::File;
use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use ridgesketch_core::dataset::{LabeledDataset, Provenance};
use ridgesketch_core::linalg::{DataMatrix, SparseMatrix, Storage};

#[derive(Debug, thiserror::Error)]
pub enum CorpusError {
    #[error("cannot access {path}")]
    Io { path: String, source: io::Error },
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("corpus contains no data points")]
    Empty,
}

fn parse_err(line: usize, message: impl Into<String>) -> CorpusError {
    CorpusError::Parse {
        line,
        message: message.into(),
    }
}

type Record = (f64, Vec<(usize, f64)>);

/// Parses one line. `Ok(None)` for blank and comment-only lines.
fn parse_line(text: &str, line: usize) -> Result<Option<Record>, CorpusError> {
    let body = text.split('#').next().unwrap_or("");
    let mut tokens = body.split_whitespace();
    let Some(label) = tokens.next() else {
        return Ok(None);
    };
    let label: f64 = label
        .parse()
        .map_err(|_| parse_err(line, format!("invalid label {label:?}")))?;
    if !label.is_finite() {
        return Err(parse_err(line, "label is not finite"));
    }
    let mut features = Vec::new();
    let mut previous = 0usize;
    for token in tokens {
        let (idx, val) = token
            .split_once(':')
            .ok_or_else(|| parse_err(line, format!("expected idx:val, found {token:?}")))?;
        let idx: usize = idx
            .parse()
            .map_err(|_| parse_err(line, format!("invalid feature index {idx:?}")))?;
        if idx == 0 {
            return Err(parse_err(line, "feature indices are 1-based"));
        }
        if idx <= previous {
            return Err(parse_err(
                line,
                format!("feature index {idx} does not increase (previous {previous})"),
            ));
        }
        previous = idx;
        let val: f64 = val
            .parse()
            .map_err(|_| parse_err(line, format!("invalid feature value {val:?}")))?;
        if !val.is_finite() {
            return Err(parse_err(line, format!("feature {idx} is not finite")));
        }
        if val != 0.0 {
            features.push((idx - 1, val));
        }
    }
    Ok(Some((label, features)))
}

/// Reads a corpus; the dimension is the largest index seen, or `min_dim` if
/// that is larger.
pub fn parse_corpus<R: BufRead>(
    reader: R,
    min_dim: usize,
) -> Result<(SparseMatrix, Vec<f64>), CorpusError> {
    let mut labels = Vec::new();
    let mut columns = Vec::new();
    let mut dim = min_dim;
    for (i, line) in reader.lines().enumerate() {
        let line_no = i + 1;
        let text = line.map_err(|e| parse_err(line_no, e.to_string()))?;
        if let Some((label, features)) = parse_line(&text, line_no)? {
            if let Some(&(last, _)) = features.last() {
                dim = dim.max(last + 1);
            }
            labels.push(label);
            columns.push(features);
        }
    }
    if labels.is_empty() {
        return Err(CorpusError::Empty);
    }
    let matrix =
        SparseMatrix::from_columns(dim, &columns).map_err(|e| parse_err(0, e.to_string()))?;
    Ok((matrix, labels))
}

pub fn read_sparse_corpus(path: &Path) -> Result<LabeledDataset, CorpusError> {
    let file = File::open(path).map_err(|source| CorpusError::Io {
        path: path.display().to_string(),
        source,
    })?;
    let (matrix, labels) = parse_corpus(BufReader::new(file), 0)?;
    let provenance = Provenance::File(path.display().to_string());
    LabeledDataset::new(DataMatrix::sparse(matrix), labels, provenance)
        .map_err(|e| parse_err(0, e.to_string()))
}

/// Writes the logical (scaled) matrix, skipping zero entries. Values use the
/// shortest representation that reads back exactly.
pub fn write_corpus<W: Write>(mut out: W, data: &DataMatrix, labels: &[f64]) -> io::Result<()> {
    let scale = data.scale();
    for (j, label) in labels.iter().enumerate() {
        write!(out, "{label}")?;
        match data.storage() {
            Storage::Dense(m) => {
                for (i, &x) in m.col(j).iter().enumerate() {
                    if x != 0.0 {
                        write!(out, " {}:{}", i + 1, scale * x)?;
                    }
                }
            }
            Storage::Sparse(m) => {
                let (idx, val) = m.column(j);
                for (&i, &x) in idx.iter().zip(val) {
                    write!(out, " {}:{}", i + 1, scale * x)?;
                }
            }
        }
        writeln!(out)?;
    }
    out.flush()
}

pub fn write_corpus_file(path: &Path, ds: &LabeledDataset) -> Result<(), CorpusError> {
    let io_err = |source| CorpusError::Io {
        path: path.display().to_string(),
        source,
    };
    let file = File::create(path).map_err(io_err)?;
    write_corpus(BufWriter::new(file), &ds.data, &ds.labels).map_err(io_err)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_line() {
        let (m, y) = parse_corpus("+1 3:0.5 7:1.2\n".as_bytes(), 0).unwrap();
        assert_eq!(y, vec![1.0]);
        assert_eq!(m.rows(), 7);
        assert_eq!(m.column(0), (&[2usize, 6][..], &[0.5, 1.2][..]));
    }

    #[test]
    fn empty_feature_list() {
        let (m, y) = parse_corpus("-1\n2 1:1\n".as_bytes(), 0).unwrap();
        assert_eq!(y, vec![-1.0, 2.0]);
        assert_eq!(m.column(0).0.len(), 0);
    }

    #[test]
    fn comments_and_blank_lines() {
        let text = "# header\n\n1 2:3 # trailing\n";
        let (m, y) = parse_corpus(text.as_bytes(), 0).unwrap();
        assert_eq!(y, vec![1.0]);
        assert_eq!(m.nnz(), 1);
    }

    #[test]
    fn errors_carry_line_numbers() {
        for (text, line) in [
            ("1 1:1\n1 2:1 2:3\n", 2),
            ("1 3:1 1:2\n", 1),
            ("1 1:1\n\nx 1:1\n", 3),
            ("1 0:1\n", 1),
            ("1 1-2\n", 1),
            ("1 1:abc\n", 1),
        ] {
            match parse_corpus(text.as_bytes(), 0) {
                Err(CorpusError::Parse { line: l, .. }) => assert_eq!(l, line, "{text:?}"),
                other => panic!("{text:?}: {other:?}"),
            }
        }
    }

    #[test]
    fn empty_input() {
        assert!(matches!(
            parse_corpus("# nothing\n".as_bytes(), 0),
            Err(CorpusError::Empty)
        ));
    }
}
