//! LIBSVM / SVMlight text format: `<label> <index>:<value> ...` with 1-based,
//! whitespace-separated feature indices.

use std::fmt::Write as _;
use std::path::Path;

use super::logistic::{Dataset, SparseRow};
use crate::error::{Error, Result};

fn parse_error(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse {
        line,
        msg: msg.into(),
    }
}

fn parse_label(token: &str, line: usize) -> Result<f64> {
    let value: f64 = token
        .parse()
        .map_err(|_| parse_error(line, format!("label {token:?} is not numeric")))?;
    if value == 1.0 {
        Ok(1.0)
    } else if value == -1.0 || value == 0.0 {
        Ok(-1.0)
    } else {
        Err(parse_error(
            line,
            format!("label {token:?} is not binary (+1/1 or -1/0)"),
        ))
    }
}

/// Parses a LIBSVM text buffer.
///
/// Labels `+1`/`1` map to `+1` and `-1`/`0` to `-1`. Blank lines and lines
/// starting with `#` are skipped. The dimension is the largest index seen,
/// unless `n` is given, in which case larger indices are an error.
pub fn parse_libsvm(text: &str, n: Option<usize>) -> Result<Dataset> {
    let mut rows = Vec::new();
    let mut labels = Vec::new();
    let mut max_index = 0usize;

    for (lineno, raw) in text.lines().enumerate() {
        let line_no = lineno + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut tokens = line.split_whitespace();
        let label = parse_label(tokens.next().unwrap_or_default(), line_no)?;
        let mut row = SparseRow::default();
        for token in tokens {
            let (idx, val) = token
                .split_once(':')
                .ok_or_else(|| parse_error(line_no, format!("malformed feature {token:?}")))?;
            let idx: usize = idx
                .parse()
                .map_err(|_| parse_error(line_no, format!("bad feature index {idx:?}")))?;
            if idx == 0 {
                return Err(parse_error(line_no, "feature indices start at 1"));
            }
            let val: f64 = val
                .parse()
                .map_err(|_| parse_error(line_no, format!("bad feature value {val:?}")))?;
            if !val.is_finite() {
                return Err(parse_error(line_no, format!("non-finite value {val}")));
            }
            if let Some(limit) = n {
                if idx > limit {
                    return Err(parse_error(
                        line_no,
                        format!("feature index {idx} exceeds dimension {limit}"),
                    ));
                }
            }
            max_index = max_index.max(idx);
            row.indices.push(idx - 1);
            row.values.push(val);
        }
        rows.push(row);
        labels.push(label);
    }

    Ok(Dataset {
        n: n.unwrap_or(max_index),
        rows,
        labels,
    })
}

pub fn read_libsvm(path: &Path, n: Option<usize>) -> Result<Dataset> {
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_libsvm(&text, n)
}

/// Serializes a dataset; values use the shortest round-tripping representation.
pub fn write_libsvm(data: &Dataset) -> String {
    let mut out = String::new();
    for (row, &b) in data.rows.iter().zip(&data.labels) {
        out.push_str(if b > 0.0 { "+1" } else { "-1" });
        for (i, v) in row.indices.iter().zip(&row.values) {
            let _ = write!(out, " {}:{}", i + 1, v);
        }
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn basic_line() {
        let d = parse_libsvm("+1 1:0.5 3:-2\n", None).unwrap();
        assert_eq!(d.len(), 1);
        assert_eq!(d.n, 3);
        assert_eq!(d.labels, vec![1.0]);
        assert_eq!(d.rows[0].indices, vec![0, 2]);
        assert_eq!(d.rows[0].values, vec![0.5, -2.0]);
    }

    #[test]
    fn empty_feature_list() {
        let d = parse_libsvm("-1\n", None).unwrap();
        assert_eq!(d.len(), 1);
        assert_eq!(d.labels, vec![-1.0]);
        assert!(d.rows[0].indices.is_empty());
        assert_eq!(d.n, 0);
    }

    #[test]
    fn zero_index_is_rejected() {
        match parse_libsvm("1 0:1\n", None) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 1),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn errors_carry_line_numbers() {
        let text = "# header\n+1 1:1\n\n-1 2:x\n";
        match parse_libsvm(text, None) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 4),
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(
            parse_libsvm("1 2\n", None),
            Err(Error::Parse { line: 1, .. })
        ));
        assert!(matches!(
            parse_libsvm("3 1:1\n", None),
            Err(Error::Parse { line: 1, .. })
        ));
        assert!(matches!(
            parse_libsvm("1 5:1\n", Some(4)),
            Err(Error::Parse { line: 1, .. })
        ));
    }

    #[test]
    fn label_aliases_and_override() {
        let d = parse_libsvm("1 1:1\n0 2:1\n+1 1:2\n-1\n", Some(10)).unwrap();
        assert_eq!(d.labels, vec![1.0, -1.0, 1.0, -1.0]);
        assert_eq!(d.n, 10);
    }

    // a few lines in the layout of the fourclass_scale / liver-disorders files
    const FIXTURE: &str = "\
+1 1:0.0862069 2:0.0862069
-1 1:-0.2413793 2:-0.7793103
+1 1:0.1724138 2:0.1034483
1 1:-0.6 2:0.5 3:-0.1 4:0.2 5:1
0 3:0.75 5:-0.333333
";

    #[test]
    fn fixture_lines() {
        let d = parse_libsvm(FIXTURE, None).unwrap();
        assert_eq!(d.len(), 5);
        assert_eq!(d.n, 5);
        assert_eq!(d.labels, vec![1.0, -1.0, 1.0, 1.0, -1.0]);
        assert_eq!(d.rows[4].indices, vec![2, 4]);
        d.validate().unwrap();
    }

    fn datasets() -> impl Strategy<Value = Dataset> {
        let row = (
            prop::bool::ANY,
            prop::collection::btree_map(0usize..20, -1e3..1e3f64, 0..6),
        );
        prop::collection::vec(row, 1..10).prop_map(|rows| {
            let mut d = Dataset::default();
            for (positive, feats) in rows {
                d.labels.push(if positive { 1.0 } else { -1.0 });
                d.rows.push(SparseRow {
                    indices: feats.keys().copied().collect(),
                    values: feats.values().copied().collect(),
                });
            }
            d.n = d
                .rows
                .iter()
                .flat_map(|r| r.indices.iter().map(|i| i + 1))
                .max()
                .unwrap_or(0);
            d
        })
    }

    proptest! {
        #[test]
        fn serialize_parse_round_trip(d in datasets()) {
            let text = write_libsvm(&d);
            let back = parse_libsvm(&text, None).unwrap();
            prop_assert_eq!(&back, &d);
            prop_assert_eq!(write_libsvm(&back), text);
        }
    }
}
