use std::fmt::Write as _;
use std::path::Path;

use crate::dense::Matrix;

use super::{DataSource, Dataset, ProblemError};

/// Parses `label idx:val …` lines into a dense dataset.
///
/// `#` starts a comment, blank lines are skipped, indices are 1-based and
/// must increase strictly within a line. The feature count is the largest
/// index seen; missing entries are zero.
pub fn parse_libsvm(text: &str) -> Result<Dataset, ProblemError> {
    let mut labels = Vec::new();
    let mut rows: Vec<Vec<(usize, f64)>> = Vec::new();
    let mut width = 0;
    for (no, raw) in text.lines().enumerate() {
        let line = no + 1;
        let err = |message: String| ProblemError::Parse { line, message };
        let body = raw.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let mut tokens = body.split_whitespace();
        let label_tok = tokens.next().expect("non-empty line has a token");
        let label: f64 = label_tok.parse().map_err(|_| err(format!("bad label {label_tok:?}")))?;
        if !label.is_finite() {
            return Err(err(format!("label {label_tok:?} is not finite")));
        }
        let mut entries = Vec::new();
        let mut last = 0;
        for tok in tokens {
            let (idx, val) = tok.split_once(':').ok_or_else(|| err(format!("expected idx:val, got {tok:?}")))?;
            let idx: usize = idx.parse().map_err(|_| err(format!("bad index in {tok:?}")))?;
            if idx == 0 {
                return Err(err(format!("indices are 1-based, got 0 in {tok:?}")));
            }
            if idx <= last {
                return Err(err(format!("index {idx} does not increase (previous {last})")));
            }
            let val: f64 = val.parse().map_err(|_| err(format!("bad value in {tok:?}")))?;
            if !val.is_finite() {
                return Err(err(format!("value in {tok:?} is not finite")));
            }
            last = idx;
            entries.push((idx, val));
        }
        width = width.max(last);
        labels.push(label);
        rows.push(entries);
    }
    let mut features = Matrix::zeros(rows.len(), width);
    for (i, entries) in rows.iter().enumerate() {
        for &(j, v) in entries {
            features[(i, j - 1)] = v;
        }
    }
    Dataset::new(features, labels, DataSource::Text)
}

pub fn read_libsvm(path: &Path) -> Result<Dataset, ProblemError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| ProblemError::Io { path: path.to_path_buf(), message: e.to_string() })?;
    let mut data = parse_libsvm(&text)?;
    data.source = DataSource::File(path.to_path_buf());
    Ok(data)
}

/// Writes nonzero entries with shortest round-trip formatting. When the last
/// column is entirely zero it is written explicitly on the first line so the
/// feature count survives a re-parse.
pub fn write_libsvm(data: &Dataset) -> String {
    let (m, n) = data.features.shape();
    let last_col_empty = n > 0 && (0..m).all(|i| data.features[(i, n - 1)] == 0.0);
    let mut out = String::new();
    for i in 0..m {
        write!(out, "{}", data.labels[i]).expect("writing to a String");
        for j in 0..n {
            let v = data.features[(i, j)];
            if v != 0.0 || (i == 0 && j == n - 1 && last_col_empty) {
                write!(out, " {}:{}", j + 1, v).expect("writing to a String");
            }
        }
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_line() {
        let d = parse_libsvm("1 1:0.5 3:2.0\n").unwrap();
        assert_eq!(d.labels, vec![1.0]);
        assert_eq!(d.features.as_slice(), &[0.5, 0.0, 2.0]);
    }

    #[test]
    fn label_only_line() {
        let d = parse_libsvm("-1\n").unwrap();
        assert_eq!(d.labels, vec![-1.0]);
        assert_eq!(d.features.shape(), (1, 0));
    }

    #[test]
    fn zero_fill_across_lines() {
        let d = parse_libsvm("1 1:1 2:2\n-1 2:3 3:4\n").unwrap();
        assert_eq!(d.features.shape(), (2, 3));
        assert_eq!(d.features.as_slice(), &[1.0, 2.0, 0.0, 0.0, 3.0, 4.0]);
    }

    #[test]
    fn comments_and_blank_lines() {
        let d = parse_libsvm("# header\n\n+1 2:1 # trailing\n").unwrap();
        assert_eq!(d.labels, vec![1.0]);
        assert_eq!(d.features.as_slice(), &[0.0, 1.0]);
    }

    #[test]
    fn errors_carry_line_numbers() {
        let e = parse_libsvm("1 1:1\n1 2:1 1:3\n").unwrap_err();
        assert!(matches!(e, ProblemError::Parse { line: 2, .. }), "{e}");
        let e = parse_libsvm("\n\n1 x:1\n").unwrap_err();
        assert!(matches!(e, ProblemError::Parse { line: 3, .. }), "{e}");
        assert!(matches!(parse_libsvm("abc 1:1\n"), Err(ProblemError::Parse { line: 1, .. })));
        assert!(matches!(parse_libsvm("1 0:1\n"), Err(ProblemError::Parse { line: 1, .. })));
        assert!(matches!(parse_libsvm("1 3\n"), Err(ProblemError::Parse { line: 1, .. })));
    }

    #[test]
    fn explicit_zero_column_survives() {
        let d = parse_libsvm("1 1:1 3:0\n").unwrap();
        let text = write_libsvm(&d);
        assert_eq!(text, "1 1:1 3:0\n");
        assert_eq!(parse_libsvm(&text).unwrap().features, d.features);
    }
}
