//! The DELONE v1 text format.
//!
//! ```text
//! DELONE v1 dim=<N>
//! window <min_1> ... <min_N> <max_1> ... <max_N>
//! # comment
//! <x_1> ... <x_N>
//! ```
//!
//! One point per line, whitespace separated. Floats are written in shortest
//! round-trip form, so re-parsing reproduces the values exactly (well within
//! the 1e-12 contract).

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::geom::{BoxRegion, Point};
use crate::sample::PointSample;
use crate::{Error, Result};

pub fn load_sample(path: impl AsRef<Path>) -> Result<PointSample> {
    let path = path.as_ref();
    let label = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "sample".to_string());
    let file = File::open(path)?;
    read_sample(BufReader::new(file), label)
}

pub fn read_sample(reader: impl Read, label: impl Into<String>) -> Result<PointSample> {
    let reader = BufReader::new(reader);
    let mut dim: Option<usize> = None;
    let mut window: Option<BoxRegion> = None;
    let mut points: Vec<Point> = Vec::new();
    let mut point_rows: Vec<usize> = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line_no = idx + 1;
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        if dim.is_none() {
            let rest = trimmed.strip_prefix("DELONE v1").ok_or_else(|| Error::Parse {
                line: line_no,
                msg: format!("expected 'DELONE v1 dim=<N>' header, found '{trimmed}'"),
            })?;
            let d = rest
                .trim()
                .strip_prefix("dim=")
                .and_then(|v| v.parse::<usize>().ok())
                .filter(|&d| d >= 1)
                .ok_or_else(|| Error::Parse {
                    line: line_no,
                    msg: "header must carry dim=<positive integer>".into(),
                })?;
            dim = Some(d);
            continue;
        }
        let d = dim.unwrap();
        if window.is_none() {
            let rest = trimmed.strip_prefix("window").ok_or_else(|| Error::Parse {
                line: line_no,
                msg: format!("expected 'window <mins> <maxs>' line, found '{trimmed}'"),
            })?;
            let values = parse_floats(rest, line_no)?;
            if values.len() != 2 * d {
                return Err(Error::Parse {
                    line: line_no,
                    msg: format!("window line needs {} values, found {}", 2 * d, values.len()),
                });
            }
            window = Some(BoxRegion::new(
                values[..d].to_vec(),
                values[d..].to_vec(),
            )?);
            continue;
        }
        let values = parse_floats(trimmed, line_no)?;
        if values.len() != d {
            return Err(Error::RowDimension {
                line: line_no,
                expected: d,
                found: values.len(),
            });
        }
        points.push(Point(values));
        point_rows.push(line_no);
    }
    let dim = dim.ok_or_else(|| Error::Parse {
        line: 0,
        msg: "missing DELONE v1 header".into(),
    })?;
    let window = window.ok_or_else(|| Error::Parse {
        line: 0,
        msg: "missing window line".into(),
    })?;
    PointSample::new(dim, window, points, label).map_err(|e| match e {
        // Surface file rows instead of point indices.
        Error::DuplicatePoint { first, second, tol } => Error::DuplicatePoint {
            first: point_rows[first],
            second: point_rows[second],
            tol,
        },
        Error::RowDimension {
            line,
            expected,
            found,
        } => Error::RowDimension {
            line: point_rows[line],
            expected,
            found,
        },
        other => other,
    })
}

fn parse_floats(text: &str, line_no: usize) -> Result<Vec<f64>> {
    text.split_whitespace()
        .map(|tok| {
            tok.parse::<f64>().map_err(|_| Error::Parse {
                line: line_no,
                msg: format!("'{tok}' is not a number"),
            })
        })
        .collect()
}

pub fn write_sample(s: &PointSample, path: impl AsRef<Path>) -> Result<()> {
    let file = File::create(path)?;
    let mut w = BufWriter::new(file);
    write_sample_to(s, &mut w)?;
    w.flush()?;
    Ok(())
}

pub fn write_sample_to(s: &PointSample, w: &mut impl Write) -> Result<()> {
    writeln!(w, "DELONE v1 dim={}", s.dim())?;
    let mins: Vec<String> = s.window().min().iter().map(|c| c.to_string()).collect();
    let maxs: Vec<String> = s.window().max().iter().map(|c| c.to_string()).collect();
    writeln!(w, "window {} {}", mins.join(" "), maxs.join(" "))?;
    writeln!(w, "# {}", s.label())?;
    for p in s.points() {
        let row: Vec<String> = p.coords().iter().map(|c| c.to_string()).collect();
        writeln!(w, "{}", row.join(" "))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_minimal_file() {
        let text = "DELONE v1 dim=2\nwindow 0 0 10 10\n# four points\n0 0\n1 0\n0 1\n1 1\n";
        let s = read_sample(text.as_bytes(), "t").unwrap();
        assert_eq!(s.dim(), 2);
        assert_eq!(s.len(), 4);
        assert_eq!(s.window().max(), &[10.0, 10.0]);
    }

    #[test]
    fn row_dimension_error_names_the_row() {
        let text = "DELONE v1 dim=2\nwindow 0 0 10 10\n0 0\n1 0 3\n";
        match read_sample(text.as_bytes(), "t") {
            Err(Error::RowDimension { line, expected, found }) => {
                assert_eq!((line, expected, found), (4, 2, 3));
            }
            other => panic!("expected row-dimension error, got {other:?}"),
        }
    }

    #[test]
    fn duplicate_rows_are_rejected_with_row_numbers() {
        let text = "DELONE v1 dim=1\nwindow 0 10\n1\n5\n5\n";
        match read_sample(text.as_bytes(), "t") {
            Err(Error::DuplicatePoint { first, second, .. }) => {
                assert_eq!((first, second), (4, 5));
            }
            other => panic!("expected duplicate error, got {other:?}"),
        }
    }

    #[test]
    fn malformed_header_is_rejected() {
        assert!(matches!(
            read_sample("DELONE v2 dim=1\nwindow 0 1\n0.5\n".as_bytes(), "t"),
            Err(Error::Parse { line: 1, .. })
        ));
        assert!(matches!(
            read_sample("DELONE v1 dim=0\nwindow 0 1\n0.5\n".as_bytes(), "t"),
            Err(Error::Parse { line: 1, .. })
        ));
    }

    #[test]
    fn round_trip_preserves_values_exactly() {
        let s = crate::generators::fibonacci_chain(9, 0.25).unwrap();
        let mut buf = Vec::new();
        write_sample_to(&s, &mut buf).unwrap();
        let back = read_sample(buf.as_slice(), s.label().to_string()).unwrap();
        assert_eq!(s.points(), back.points());
        assert_eq!(s.window(), back.window());
    }
}
