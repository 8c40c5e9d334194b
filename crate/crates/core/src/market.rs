//! Matrix Market coordinate-format reader.
//!
//! Accepts `%%MatrixMarket matrix coordinate real|integer general|symmetric`
//! headers with 1-based indices. Symmetric inputs are expanded to both
//! triangles; duplicate coordinates are kept and summed later by
//! [`extract_lower`](crate::matrix::extract_lower).

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::matrix::CooEntry;

/// Raw parse result: 0-based entries plus the declared dimensions.
#[derive(Debug, Clone)]
pub struct MarketMatrix {
    pub rows: usize,
    pub cols: usize,
    pub entries: Vec<CooEntry>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Symmetry {
    General,
    Symmetric,
}

fn parse_header(line: &str) -> Result<Symmetry> {
    let err = |msg: &str| Error::Parse {
        line: 1,
        msg: msg.to_string(),
    };
    let mut words = line.split_whitespace();
    if words.next() != Some("%%MatrixMarket") {
        return Err(err("missing %%MatrixMarket banner"));
    }
    if words.next() != Some("matrix") {
        return Err(err("object must be \"matrix\""));
    }
    if words.next() != Some("coordinate") {
        return Err(err("format must be \"coordinate\""));
    }
    match words.next() {
        Some("real") | Some("integer") => {}
        Some(other) => return Err(err(&format!("unsupported field {other:?}"))),
        None => return Err(err("missing field declaration")),
    }
    match words.next() {
        Some("general") => Ok(Symmetry::General),
        Some("symmetric") => Ok(Symmetry::Symmetric),
        Some(other) => Err(err(&format!("unsupported symmetry {other:?}"))),
        None => Err(err("missing symmetry declaration")),
    }
}

/// Parses Matrix Market coordinate text into 0-based entries.
pub fn parse_matrix_market(text: &str) -> Result<MarketMatrix> {
    let mut lines = text.lines().enumerate();

    let symmetry = match lines.next() {
        Some((_, first)) => parse_header(first)?,
        None => {
            return Err(Error::Parse {
                line: 1,
                msg: "empty input".into(),
            })
        }
    };

    // size line: first non-comment, non-blank line after the banner
    let (mut rows, mut cols, mut declared_nnz) = (0usize, 0usize, 0usize);
    let mut have_size = false;
    for (idx, raw) in &mut lines {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('%') {
            continue;
        }
        let mut words = line.split_whitespace();
        let mut next_dim = |name: &str| -> Result<usize> {
            words
                .next()
                .ok_or_else(|| Error::Parse {
                    line: idx + 1,
                    msg: format!("size line missing {name}"),
                })?
                .parse()
                .map_err(|_| Error::Parse {
                    line: idx + 1,
                    msg: format!("cannot parse {name}"),
                })
        };
        rows = next_dim("row count")?;
        cols = next_dim("column count")?;
        declared_nnz = next_dim("nonzero count")?;
        have_size = true;
        break;
    }
    if !have_size {
        return Err(Error::Parse {
            line: 1,
            msg: "missing size line".into(),
        });
    }

    let mut entries = Vec::with_capacity(declared_nnz * 2);
    let mut seen = 0usize;
    for (idx, raw) in lines {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('%') {
            continue;
        }
        let lineno = idx + 1;
        if seen == declared_nnz {
            return Err(Error::Parse {
                line: lineno,
                msg: format!("more than the declared {declared_nnz} entries"),
            });
        }
        let mut words = line.split_whitespace();
        let r: usize = words
            .next()
            .and_then(|w| w.parse().ok())
            .ok_or_else(|| Error::Parse {
                line: lineno,
                msg: "cannot parse row index".into(),
            })?;
        let c: usize = words
            .next()
            .and_then(|w| w.parse().ok())
            .ok_or_else(|| Error::Parse {
                line: lineno,
                msg: "cannot parse column index".into(),
            })?;
        let v: f64 = words
            .next()
            .and_then(|w| w.parse().ok())
            .ok_or_else(|| Error::Parse {
                line: lineno,
                msg: "cannot parse value".into(),
            })?;
        if words.next().is_some() {
            return Err(Error::Parse {
                line: lineno,
                msg: "trailing tokens after value".into(),
            });
        }
        if r < 1 || r > rows || c < 1 || c > cols {
            return Err(Error::IndexOutOfBounds {
                line: lineno,
                row: r,
                col: c,
                rows,
                cols,
            });
        }
        let (row, col) = (r - 1, c - 1);
        entries.push(CooEntry { row, col, value: v });
        if symmetry == Symmetry::Symmetric && row != col {
            entries.push(CooEntry {
                row: col,
                col: row,
                value: v,
            });
        }
        seen += 1;
    }
    if seen != declared_nnz {
        return Err(Error::Parse {
            line: 0,
            msg: format!("expected {declared_nnz} entries, found {seen}"),
        });
    }

    Ok(MarketMatrix {
        rows,
        cols,
        entries,
    })
}

/// Reads and parses a `.mtx` file.
pub fn read_matrix_market(path: &Path) -> Result<MarketMatrix> {
    let text = fs::read_to_string(path)?;
    parse_matrix_market(&text)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn general_header_and_entries() {
        let text = "%%MatrixMarket matrix coordinate real general\n\
                    % a comment\n\
                    3 3 3\n\
                    1 1 2.0\n\
                    2 1 -1.0\n\
                    2 2 2.0\n";
        let m = parse_matrix_market(text).unwrap();
        assert_eq!((m.rows, m.cols), (3, 3));
        assert_eq!(m.entries.len(), 3);
        assert_eq!(m.entries[0], CooEntry { row: 0, col: 0, value: 2.0 });
        assert_eq!(m.entries[1], CooEntry { row: 1, col: 0, value: -1.0 });
    }

    #[test]
    fn symmetric_expands_both_triangles() {
        let text = "%%MatrixMarket matrix coordinate real symmetric\n\
                    2 2 2\n\
                    1 1 4.0\n\
                    2 1 7.5\n";
        let m = parse_matrix_market(text).unwrap();
        assert_eq!(m.entries.len(), 3);
        assert!(m.entries.contains(&CooEntry { row: 1, col: 0, value: 7.5 }));
        assert!(m.entries.contains(&CooEntry { row: 0, col: 1, value: 7.5 }));
    }

    #[test]
    fn integer_field_parses_as_real() {
        let text = "%%MatrixMarket matrix coordinate integer general\n1 1 1\n1 1 3\n";
        let m = parse_matrix_market(text).unwrap();
        assert_eq!(m.entries[0].value, 3.0);
    }

    #[test]
    fn rejects_pattern_and_complex() {
        for field in ["pattern", "complex"] {
            let text = format!("%%MatrixMarket matrix coordinate {field} general\n1 1 1\n1 1 1\n");
            match parse_matrix_market(&text) {
                Err(Error::Parse { line: 1, msg }) => assert!(msg.contains(field)),
                other => panic!("expected header rejection, got {other:?}"),
            }
        }
    }

    #[test]
    fn rejects_malformed_header() {
        assert!(matches!(
            parse_matrix_market("%%MatrixMarket matrix array real general\n"),
            Err(Error::Parse { line: 1, .. })
        ));
        assert!(matches!(
            parse_matrix_market("1 1 1\n1 1 1\n"),
            Err(Error::Parse { line: 1, .. })
        ));
    }

    #[test]
    fn rejects_out_of_bounds_with_line_number() {
        let text = "%%MatrixMarket matrix coordinate real general\n2 2 1\n3 1 1.0\n";
        match parse_matrix_market(text) {
            Err(Error::IndexOutOfBounds { line, row, .. }) => {
                assert_eq!(line, 3);
                assert_eq!(row, 3);
            }
            other => panic!("expected bounds error, got {other:?}"),
        }
    }

    #[test]
    fn entry_count_must_match_declaration() {
        let short = "%%MatrixMarket matrix coordinate real general\n2 2 2\n1 1 1.0\n";
        assert!(matches!(parse_matrix_market(short), Err(Error::Parse { .. })));
        let long = "%%MatrixMarket matrix coordinate real general\n2 2 1\n1 1 1.0\n2 2 1.0\n";
        assert!(matches!(parse_matrix_market(long), Err(Error::Parse { .. })));
    }
}
