//! UCR-archive style text datasets: one series per line, class label first.
//!
//! Tokens may be separated by commas, tabs or spaces (mixed within a file is
//! fine). Labels written as reals (`2.0000`) are truncated toward zero.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct LabeledRecord {
    pub label: i64,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub records: Vec<LabeledRecord>,
    pub series_length: usize,
}

impl Dataset {
    /// Builds a dataset, checking that it is non-empty and rectangular.
    pub fn new(records: Vec<LabeledRecord>) -> Result<Self> {
        let first = records.first().ok_or(Error::EmptySelection)?;
        let series_length = first.values.len();
        for (i, r) in records.iter().enumerate() {
            if r.values.len() != series_length {
                return Err(Error::RaggedLengths {
                    record: i + 1,
                    expected: series_length,
                    found: r.values.len(),
                });
            }
        }
        Ok(Self {
            records,
            series_length,
        })
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// The raw series, in file order.
    pub fn series(&self) -> Vec<Vec<f64>> {
        self.records.iter().map(|r| r.values.clone()).collect()
    }
}

fn tokens(line: &str) -> impl Iterator<Item = &str> {
    line.split(|c: char| c == ',' || c.is_whitespace())
        .filter(|t| !t.is_empty())
}

fn parse_value(token: &str) -> Option<f64> {
    token.parse::<f64>().ok().filter(|v| v.is_finite())
}

/// Parses one non-blank line. The returned error carries line number 0; the
/// file loader fills in the real one.
pub fn parse_record(line: &str) -> Result<LabeledRecord> {
    let malformed = |reason: String| Error::MalformedLine { line: 0, reason };
    let mut it = tokens(line);
    let label_tok = it.next().ok_or_else(|| malformed("blank line".into()))?;
    let label = parse_value(label_tok)
        .ok_or_else(|| malformed(format!("label {label_tok:?} is not a number")))?
        .trunc();
    let values = it
        .map(|t| {
            parse_value(t).ok_or_else(|| malformed(format!("value {t:?} is not a finite number")))
        })
        .collect::<Result<Vec<_>>>()?;
    if values.is_empty() {
        return Err(malformed(
            "expected a label followed by at least one value".into(),
        ));
    }
    Ok(LabeledRecord {
        label: label as i64,
        values,
    })
}

/// Writes a record back in comma-separated form using the shortest
/// representation that round-trips each value.
pub fn render_record(record: &LabeledRecord) -> String {
    let mut out = record.label.to_string();
    for v in &record.values {
        let _ = write!(out, ",{v:?}");
    }
    out
}

/// Parses an in-memory dataset. See [`load_dataset`].
pub fn parse_dataset(text: &str, class_filter: Option<i64>) -> Result<Dataset> {
    let mut records = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let record = parse_record(line).map_err(|e| match e {
            Error::MalformedLine { reason, .. } => Error::MalformedLine {
                line: idx + 1,
                reason,
            },
            other => other,
        })?;
        if class_filter.is_none_or(|c| c == record.label) {
            records.push(record);
        }
    }
    Dataset::new(records)
}

/// Loads a dataset file, keeping only records of `class_filter` when given.
/// Record order matches file order.
pub fn load_dataset(path: impl AsRef<Path>, class_filter: Option<i64>) -> Result<Dataset> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io {
        path: path.to_path_buf(),
        message: e.to_string(),
    })?;
    parse_dataset(&text, class_filter)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn parses_comma_separated() {
        let r = parse_record("2,0.13,0.15").unwrap();
        assert_eq!(r.label, 2);
        assert_eq!(r.values, vec![0.13, 0.15]);
    }

    #[test]
    fn parses_whitespace_and_real_labels() {
        let r = parse_record("2.0 0.5 0.5 0.5").unwrap();
        assert_eq!(r.label, 2);
        assert_eq!(r.values, vec![0.5, 0.5, 0.5]);
        let r = parse_record("  -1.9e0\t3,\t4 ").unwrap();
        assert_eq!(r.label, -1);
        assert_eq!(r.values, vec![3.0, 4.0]);
    }

    #[test]
    fn rejects_bad_lines() {
        assert!(matches!(
            parse_record("abc 1 2"),
            Err(Error::MalformedLine { .. })
        ));
        assert!(matches!(
            parse_record("1"),
            Err(Error::MalformedLine { .. })
        ));
        assert!(matches!(
            parse_record("1 2 NaN"),
            Err(Error::MalformedLine { .. })
        ));
        assert!(matches!(
            parse_record("1 2 x"),
            Err(Error::MalformedLine { .. })
        ));
    }

    #[test]
    fn filter_order_and_blank_lines() {
        let text = "1,1,2\n\n2,3,4\n2 5 6\n1,7,8\n\n";
        let all = parse_dataset(text, None).unwrap();
        assert_eq!(all.len(), 4);
        assert_eq!(all.series_length, 2);
        let two = parse_dataset(text, Some(2)).unwrap();
        assert_eq!(two.series(), vec![vec![3.0, 4.0], vec![5.0, 6.0]]);
        assert_eq!(parse_dataset(text, Some(9)), Err(Error::EmptySelection));
    }

    #[test]
    fn ragged_and_malformed_are_reported_with_position() {
        assert_eq!(
            parse_dataset("1,1,2\n1,1,2,3\n", None),
            Err(Error::RaggedLengths {
                record: 2,
                expected: 2,
                found: 3
            })
        );
        match parse_dataset("1,1,2\n\n1,x,2\n", None) {
            Err(Error::MalformedLine { line, .. }) => assert_eq!(line, 3),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn load_from_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("d.txt");
        std::fs::write(&path, "2.0000  1.5  2.5\n1.0000  0  0\n").unwrap();
        let ds = load_dataset(&path, Some(2)).unwrap();
        assert_eq!(
            ds.records,
            vec![LabeledRecord {
                label: 2,
                values: vec![1.5, 2.5]
            }]
        );
        assert!(matches!(
            load_dataset(dir.path().join("missing"), None),
            Err(Error::Io { .. })
        ));
    }

    proptest! {
        #[test]
        fn render_parse_round_trip(
            label in -1000i64..1000,
            values in prop::collection::vec(-1e12f64..1e12, 1..40),
        ) {
            let rec = LabeledRecord { label, values };
            prop_assert_eq!(parse_record(&render_record(&rec)).unwrap(), rec);
        }
    }
}
