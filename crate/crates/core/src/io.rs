//! Reading model inputs and writing edge lists.
//!
//! Edge files come in two formats:
//!
//! * TSV: one `src\tdst\n` line per edge, 0-indexed.
//! * Matrix Market: `%%MatrixMarket matrix coordinate pattern general`, a
//!   `rows cols nnz` size line, then 1-indexed `row col` lines.
//!
//! Edges are written in list order.

use std::io::Write;
use std::str::FromStr;

use crate::block::DegreeSequence;
use crate::{EdgeList, Error, ProbabilityMatrix, Result};

pub const MATRIX_MARKET_HEADER: &str = "%%MatrixMarket matrix coordinate pattern general";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EdgeFileFormat {
    Tsv,
    MatrixMarket,
}

impl FromStr for EdgeFileFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "tsv" => Ok(EdgeFileFormat::Tsv),
            "mm" | "mtx" => Ok(EdgeFileFormat::MatrixMarket),
            other => Err(Error::Domain(format!("unknown edge format {other:?}"))),
        }
    }
}

/// Counts bytes passed through to the inner writer.
struct Counting<W> {
    inner: W,
    bytes: usize,
}

impl<W: Write> Write for Counting<W> {
    fn write(&mut self, buf: &[u8]) -> std::io::Result<usize> {
        let n = self.inner.write(buf)?;
        self.bytes += n;
        Ok(n)
    }

    fn flush(&mut self) -> std::io::Result<()> {
        self.inner.flush()
    }
}

/// Writes `edges` to `sink`, returning the number of bytes written.
pub fn write_edges<W: Write>(edges: &EdgeList, format: EdgeFileFormat, sink: W) -> Result<usize> {
    let mut out = Counting {
        inner: std::io::BufWriter::new(sink),
        bytes: 0,
    };
    match format {
        EdgeFileFormat::Tsv => {
            for &(s, d) in edges {
                writeln!(out, "{s}\t{d}")?;
            }
        }
        EdgeFileFormat::MatrixMarket => {
            writeln!(out, "{MATRIX_MARKET_HEADER}")?;
            writeln!(
                out,
                "{} {} {}",
                edges.num_rows(),
                edges.num_cols(),
                edges.len()
            )?;
            for &(s, d) in edges {
                writeln!(out, "{} {}", s + 1, d + 1)?;
            }
        }
    }
    out.flush()?;
    Ok(out.bytes)
}

fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        message: message.into(),
    }
}

/// Non-blank, non-comment lines with their 1-based line numbers.
fn content_lines(source: &str, comment: char) -> impl Iterator<Item = (usize, &str)> {
    source
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(move |(_, l)| !l.is_empty() && !l.starts_with(comment))
}

fn parse_u64(token: &str, line: usize) -> Result<u64> {
    token
        .parse()
        .map_err(|_| parse_err(line, format!("{token:?} is not a nonnegative integer")))
}

/// Reads a TSV edge list over a `num_rows × num_cols` node space.
pub fn read_tsv(source: &str, num_rows: u64, num_cols: u64) -> Result<EdgeList> {
    let mut edges = Vec::new();
    for (line, text) in content_lines(source, '#') {
        let mut fields = text.split('\t');
        let (Some(s), Some(d), None) = (fields.next(), fields.next(), fields.next()) else {
            return Err(parse_err(line, "expected two tab-separated fields"));
        };
        edges.push((parse_u64(s, line)?, parse_u64(d, line)?));
    }
    EdgeList::from_edges(num_rows, num_cols, edges)
}

/// Reads a coordinate-pattern Matrix Market file.
pub fn read_matrix_market(source: &str) -> Result<EdgeList> {
    let mut lines = source.lines().enumerate().map(|(i, l)| (i + 1, l.trim()));
    match lines.next() {
        Some((_, header)) if header.eq_ignore_ascii_case(MATRIX_MARKET_HEADER) => {}
        _ => {
            return Err(parse_err(
                1,
                format!("expected header {MATRIX_MARKET_HEADER:?}"),
            ))
        }
    }
    let mut body = lines.filter(|(_, l)| !l.is_empty() && !l.starts_with('%'));
    let (line, size) = body
        .next()
        .ok_or_else(|| parse_err(2, "missing size line"))?;
    let dims: Vec<u64> = size
        .split_whitespace()
        .map(|t| parse_u64(t, line))
        .collect::<Result<_>>()?;
    let [rows, cols, nnz] = dims[..] else {
        return Err(parse_err(line, "size line must be `rows cols nnz`"));
    };
    let mut edges = Vec::with_capacity(nnz as usize);
    for (line, text) in body {
        let coords: Vec<u64> = text
            .split_whitespace()
            .map(|t| parse_u64(t, line))
            .collect::<Result<_>>()?;
        let [r, c] = coords[..] else {
            return Err(parse_err(line, "expected `row col`"));
        };
        if r == 0 || c == 0 || r > rows || c > cols {
            return Err(parse_err(
                line,
                format!("entry ({r}, {c}) outside {rows}x{cols}"),
            ));
        }
        edges.push((r - 1, c - 1));
    }
    if edges.len() as u64 != nnz {
        return Err(parse_err(
            line,
            format!("size line declares {nnz} entries, found {}", edges.len()),
        ));
    }
    EdgeList::from_edges(rows, cols, edges)
}

/// Reads a matrix of probabilities: one row per line, entries separated by
/// whitespace or commas. Blank lines and `#` comments are skipped.
pub fn read_matrix(source: &str) -> Result<ProbabilityMatrix> {
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (line, text) in content_lines(source, '#') {
        let row = text
            .split(|c: char| c == ',' || c.is_whitespace())
            .filter(|t| !t.is_empty())
            .map(|t| {
                let x: f64 = t
                    .parse()
                    .map_err(|_| parse_err(line, format!("{t:?} is not a number")))?;
                if !(0.0..=1.0).contains(&x) {
                    return Err(parse_err(line, format!("{x} is not a probability")));
                }
                Ok(x)
            })
            .collect::<Result<Vec<f64>>>()?;
        if let Some(first) = rows.first() {
            if row.len() != first.len() {
                return Err(parse_err(
                    line,
                    format!("row has {} entries, expected {}", row.len(), first.len()),
                ));
            }
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(parse_err(1, "matrix is empty"));
    }
    ProbabilityMatrix::from_rows(&rows)
}

/// Reads one nonnegative integer degree per line. Blank lines and `#`
/// comments are skipped.
pub fn read_degrees(source: &str) -> Result<DegreeSequence> {
    content_lines(source, '#')
        .map(|(line, text)| parse_u64(text, line))
        .collect::<Result<Vec<u64>>>()
        .map(DegreeSequence::new)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn render(edges: &EdgeList, format: EdgeFileFormat) -> String {
        let mut buf = Vec::new();
        let n = write_edges(edges, format, &mut buf).unwrap();
        assert_eq!(n, buf.len());
        String::from_utf8(buf).unwrap()
    }

    #[test]
    fn tsv_bytes() {
        let e = EdgeList::from_edges(2, 2, vec![(0, 1)]).unwrap();
        assert_eq!(render(&e, EdgeFileFormat::Tsv), "0\t1\n");
        assert_eq!(render(&EdgeList::new(3, 3), EdgeFileFormat::Tsv), "");
    }

    #[test]
    fn matrix_market_empty() {
        assert_eq!(
            render(&EdgeList::new(4, 4), EdgeFileFormat::MatrixMarket),
            "%%MatrixMarket matrix coordinate pattern general\n4 4 0\n"
        );
    }

    #[test]
    fn matrix_market_rejects_bad_input() {
        assert!(read_matrix_market("%%MatrixMarket matrix array real general\n1 1\n").is_err());
        let text = format!("{MATRIX_MARKET_HEADER}\n2 2 1\n3 1\n");
        assert!(matches!(
            read_matrix_market(&text),
            Err(Error::Parse { line: 3, .. })
        ));
        let text = format!("{MATRIX_MARKET_HEADER}\n2 2 2\n1 1\n");
        assert!(read_matrix_market(&text).is_err());
    }

    #[test]
    fn reads_initiator() {
        let m = read_matrix("0.99 0.5\n0.5 0.2\n").unwrap();
        assert_eq!(
            m,
            ProbabilityMatrix::from_rows(&[vec![0.99, 0.5], vec![0.5, 0.2]]).unwrap()
        );
        let m = read_matrix("# initiator\n0.99, 0.5\n\n0.5,0.2\n").unwrap();
        assert_eq!(m.get(1, 1), 0.2);
        assert_eq!(read_matrix("1\n").unwrap().data(), &[1.0]);
    }

    #[test]
    fn matrix_errors_carry_line_numbers() {
        assert!(matches!(
            read_matrix("0.5, 0.5\n0.5\n"),
            Err(Error::Parse { line: 2, .. })
        ));
        assert!(matches!(
            read_matrix("0.5 x\n"),
            Err(Error::Parse { line: 1, .. })
        ));
        assert!(matches!(
            read_matrix("0.5\n1.5\n"),
            Err(Error::Parse { line: 2, .. })
        ));
        assert!(read_matrix("").is_err());
    }

    #[test]
    fn reads_degrees() {
        let d = read_degrees("4\n3\n2\n2\n2\n1\n1\n1\n").unwrap();
        assert_eq!(d.degrees(), &[4, 3, 2, 2, 2, 1, 1, 1]);
        assert!(read_degrees("").unwrap().is_empty());
        assert!(matches!(
            read_degrees("-1\n"),
            Err(Error::Parse { line: 1, .. })
        ));
        assert!(matches!(
            read_degrees("2\n1.5\n"),
            Err(Error::Parse { line: 2, .. })
        ));
        assert_eq!(read_degrees("# d\n\n3\n").unwrap().degrees(), &[3]);
    }

    #[test]
    fn format_names() {
        assert_eq!(
            "tsv".parse::<EdgeFileFormat>().unwrap(),
            EdgeFileFormat::Tsv
        );
        assert_eq!(
            "mm".parse::<EdgeFileFormat>().unwrap(),
            EdgeFileFormat::MatrixMarket
        );
        assert!("csv".parse::<EdgeFileFormat>().is_err());
    }
}
