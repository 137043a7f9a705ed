//! Text formats for problem data.
//!
//! * Sparse classification: one example per line, `label idx:val idx:val …`
//!   with 1-based ascending indices. Labels `+1`/`1` and `-1` are binary;
//!   other label sets need a [`LabelPartition`].
//! * Scenario CSV: comma-separated numeric rows, optional single header row,
//!   last column is the benchmark return.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::problems::np::NpClassificationData;
use crate::problems::ssd::SsdPortfolioData;

/// Assigns multi-class labels to the positive class; all other labels are
/// negative.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct LabelPartition {
    pub positive: Vec<String>,
}

impl LabelPartition {
    pub fn new<S: Into<String>>(positive: impl IntoIterator<Item = S>) -> Self {
        LabelPartition {
            positive: positive.into_iter().map(Into::into).collect(),
        }
    }

    fn is_positive(&self, label: &str) -> bool {
        self.positive.iter().any(|p| p == label)
    }
}

fn parse_err(line: usize, column: Option<usize>, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        column,
        message: message.into(),
    }
}

pub fn parse_sparse_classification<R: Read>(
    reader: R,
    partition: Option<&LabelPartition>,
) -> Result<NpClassificationData> {
    let mut rows: Vec<(bool, Vec<(usize, f64)>)> = Vec::new();
    let mut dim = 0usize;
    for (idx, line) in BufReader::new(reader).lines().enumerate() {
        let lineno = idx + 1;
        let line = line?;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let mut tokens = line.split_whitespace();
        let label = tokens.next().unwrap_or_default();
        let positive = match partition {
            Some(p) => p.is_positive(label),
            None => match label {
                "+1" | "1" => true,
                "-1" => false,
                other => {
                    return Err(parse_err(
                        lineno,
                        Some(1),
                        format!("label {other:?} is not binary; supply a label partition"),
                    ))
                }
            },
        };
        let mut feats = Vec::new();
        let mut last = 0usize;
        for (t, tok) in tokens.enumerate() {
            let col = Some(t + 2);
            let (i, v) = tok
                .split_once(':')
                .ok_or_else(|| parse_err(lineno, col, format!("expected idx:val, got {tok:?}")))?;
            let i: usize = i
                .parse()
                .map_err(|_| parse_err(lineno, col, format!("bad feature index {i:?}")))?;
            let v: f64 = v
                .parse()
                .map_err(|_| parse_err(lineno, col, format!("bad feature value {v:?}")))?;
            if i == 0 || i <= last {
                return Err(parse_err(
                    lineno,
                    col,
                    "feature indices must be 1-based and ascending",
                ));
            }
            if !v.is_finite() {
                return Err(parse_err(lineno, col, "feature value is not finite"));
            }
            last = i;
            feats.push((i, v));
        }
        dim = dim.max(last);
        rows.push((positive, feats));
    }
    if rows.is_empty() {
        return Err(parse_err(0, None, "no examples found"));
    }
    let (mut positive, mut negative) = (Vec::new(), Vec::new());
    for (is_pos, feats) in rows {
        let mut dense = vec![0.0; dim];
        for (i, v) in feats {
            dense[i - 1] = v;
        }
        if is_pos {
            positive.push(dense);
        } else {
            negative.push(dense);
        }
    }
    NpClassificationData::new(positive, negative)
}

pub fn load_sparse_classification(
    path: impl AsRef<Path>,
    partition: Option<&LabelPartition>,
) -> Result<NpClassificationData> {
    parse_sparse_classification(File::open(path)?, partition)
}

/// Writes positives as `+1` and negatives as `-1`, omitting zero entries.
pub fn write_sparse_classification<W: Write>(mut w: W, data: &NpClassificationData) -> Result<()> {
    for (label, class) in [("+1", &data.positive), ("-1", &data.negative)] {
        for a in class {
            write!(w, "{label}")?;
            for (i, v) in a.iter().enumerate() {
                if *v != 0.0 {
                    write!(w, " {}:{}", i + 1, v)?;
                }
            }
            writeln!(w)?;
        }
    }
    Ok(())
}

pub fn save_sparse_classification(
    path: impl AsRef<Path>,
    data: &NpClassificationData,
) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    write_sparse_classification(&mut w, data)?;
    w.flush()?;
    Ok(())
}

/// Reads `M × (n+1)` returns; the last column is the benchmark.
pub fn parse_scenarios_csv<R: Read>(reader: R) -> Result<SsdPortfolioData> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let mut returns = Vec::new();
    let mut benchmark = Vec::new();
    let mut width = None;
    for (idx, record) in rdr.records().enumerate() {
        let lineno = idx + 1;
        let record = record.map_err(|e| parse_err(lineno, None, e.to_string()))?;
        let parsed: Vec<std::result::Result<f64, usize>> = record
            .iter()
            .enumerate()
            .map(|(c, cell)| {
                cell.parse::<f64>()
                    .ok()
                    .filter(|v| v.is_finite())
                    .ok_or(c + 1)
            })
            .collect();
        if idx == 0 && parsed.iter().any(|r| r.is_err()) {
            // header
            width = Some(record.len());
            continue;
        }
        let expected = *width.get_or_insert(record.len());
        if record.len() != expected {
            return Err(parse_err(
                lineno,
                Some(record.len().min(expected) + 1),
                format!("row has {} columns, expected {expected}", record.len()),
            ));
        }
        if expected < 2 {
            return Err(parse_err(
                lineno,
                None,
                "need at least one asset column plus the benchmark",
            ));
        }
        let mut row = Vec::with_capacity(expected);
        for (c, cell) in parsed.into_iter().enumerate() {
            row.push(cell.map_err(|col| {
                parse_err(
                    lineno,
                    Some(col),
                    format!("non-numeric cell {:?}", &record[c]),
                )
            })?);
        }
        benchmark.push(row.pop().expect("width ≥ 2"));
        returns.push(row);
    }
    if returns.is_empty() {
        return Err(parse_err(0, None, "no scenario rows found"));
    }
    SsdPortfolioData::new(returns, benchmark)
}

pub fn load_scenarios_csv(path: impl AsRef<Path>) -> Result<SsdPortfolioData> {
    parse_scenarios_csv(File::open(path)?)
}

/// Writes `returns | benchmark` rows with an optional header.
pub fn write_scenarios_csv<W: Write>(
    w: W,
    returns: &[Vec<f64>],
    benchmark: &[f64],
    header: bool,
) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(w);
    let to_io = |e: csv::Error| Error::Io(e.into());
    if header {
        let n = returns.first().map_or(0, Vec::len);
        let mut names: Vec<String> = (1..=n).map(|k| format!("asset{k}")).collect();
        names.push("benchmark".into());
        wtr.write_record(&names).map_err(to_io)?;
    }
    for (row, y) in returns.iter().zip(benchmark) {
        let cells: Vec<String> = row
            .iter()
            .chain(std::iter::once(y))
            .map(|v| v.to_string())
            .collect();
        wtr.write_record(&cells).map_err(to_io)?;
    }
    wtr.flush()?;
    Ok(())
}

pub fn save_scenarios_csv(
    path: impl AsRef<Path>,
    returns: &[Vec<f64>],
    benchmark: &[f64],
    header: bool,
) -> Result<()> {
    write_scenarios_csv(File::create(path)?, returns, benchmark, header)
}
