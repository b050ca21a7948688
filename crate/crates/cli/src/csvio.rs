//! Numeric CSV with one channel per row and one sample per column.

use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::Path;

use anyhow::{bail, Context, Result};

/// Parses a `p × T` matrix. With `header`, the first line is skipped.
pub fn parse_matrix(text: &str, header: bool) -> Result<Vec<Vec<f64>>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(header)
        .flexible(true)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(text.as_bytes());
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for record in reader.records() {
        let record = record.context("malformed CSV")?;
        let line = record.position().map_or(0, |p| p.line());
        if record.iter().all(str::is_empty) {
            continue;
        }
        let row = record
            .iter()
            .enumerate()
            .map(|(col, cell)| {
                cell.parse::<f64>()
                    .ok()
                    .filter(|x| x.is_finite())
                    .with_context(|| format!("line {line}, column {}: `{cell}` is not a finite number", col + 1))
            })
            .collect::<Result<Vec<f64>>>()?;
        if let Some(first) = rows.first() {
            if first.len() != row.len() {
                bail!(
                    "line {line}: row has {} values but the first row has {}",
                    row.len(),
                    first.len()
                );
            }
        }
        rows.push(row);
    }
    if rows.is_empty() {
        bail!("no data rows");
    }
    Ok(rows)
}

pub fn read_matrix(path: &Path, header: bool) -> Result<Vec<Vec<f64>>> {
    let mut text = String::new();
    File::open(path)
        .and_then(|mut f| f.read_to_string(&mut text))
        .with_context(|| format!("reading {}", path.display()))?;
    parse_matrix(&text, header).with_context(|| format!("parsing {}", path.display()))
}

/// Shortest round-trip decimal representation of every value.
pub fn format_matrix(rows: &[Vec<f64>]) -> String {
    let mut out = String::new();
    for row in rows {
        let line: Vec<String> = row.iter().map(|x| x.to_string()).collect();
        out.push_str(&line.join(","));
        out.push('\n');
    }
    out
}

pub fn write_matrix(path: &Path, rows: &[Vec<f64>]) -> Result<()> {
    write_text(path, &format_matrix(rows))
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    let f = File::create(path).with_context(|| format!("creating {}", path.display()))?;
    let mut w = BufWriter::new(f);
    w.write_all(text.as_bytes())
        .and_then(|_| w.flush())
        .with_context(|| format!("writing {}", path.display()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_rows_and_header() {
        let m = parse_matrix("1, 2,3\n4,5,6\n", false).unwrap();
        assert_eq!(m, vec![vec![1.0, 2.0, 3.0], vec![4.0, 5.0, 6.0]]);
        let h = parse_matrix("a,b,c\n1,2,3\n", true).unwrap();
        assert_eq!(h, vec![vec![1.0, 2.0, 3.0]]);
    }

    #[test]
    fn reports_bad_cells_with_position() {
        let err = parse_matrix("1,2,3\n4,x,6\n", false).unwrap_err();
        let msg = format!("{err:#}");
        assert!(msg.contains("line 2") && msg.contains("column 2"), "{msg}");
        let err = parse_matrix("1,2,3\n4,5\n", false).unwrap_err();
        assert!(format!("{err:#}").contains("line 2"));
        assert!(parse_matrix("1,NaN\n", false).is_err());
    }

    #[test]
    fn round_trip_is_exact() {
        let rows = vec![vec![0.1, -1.0 / 3.0, 1e-300], vec![std::f64::consts::PI, 2.5e10, -0.0]];
        let back = parse_matrix(&format_matrix(&rows), false).unwrap();
        for (a, b) in rows.iter().flatten().zip(back.iter().flatten()) {
            assert_eq!(a.to_bits(), b.to_bits());
        }
    }
}
