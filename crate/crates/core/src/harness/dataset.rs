use std::fs::File;
use std::io::{BufRead, BufReader, Read};
use std::path::Path;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Ordered regression examples.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Dataset {
    pub inputs: Vec<Vec<f64>>,
    pub labels: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DataFormat {
    Csv,
    Libsvm,
}

impl FromStr for DataFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(Self::Csv),
            "libsvm" => Ok(Self::Libsvm),
            other => Err(Error::input(format!("unknown data format {other:?}"))),
        }
    }
}

impl Dataset {
    pub fn new(inputs: Vec<Vec<f64>>, labels: Vec<f64>) -> Result<Self> {
        if inputs.len() != labels.len() {
            return Err(Error::input(format!(
                "{} inputs but {} labels",
                inputs.len(),
                labels.len()
            )));
        }
        if let Some(first) = inputs.first() {
            if inputs.iter().any(|x| x.len() != first.len()) {
                return Err(Error::input("inputs have inconsistent dimensions"));
            }
        }
        Ok(Self { inputs, labels })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.inputs.first().map_or(0, Vec::len)
    }

    /// Largest Euclidean norm among the inputs.
    pub fn radius(&self) -> f64 {
        self.inputs
            .iter()
            .map(|x| x.iter().map(|v| v * v).sum::<f64>().sqrt())
            .fold(0.0, f64::max)
    }

    /// First `n` examples.
    pub fn head(&self, n: usize) -> Dataset {
        let n = n.min(self.len());
        Dataset {
            inputs: self.inputs[..n].to_vec(),
            labels: self.labels[..n].to_vec(),
        }
    }
}

pub fn ingest(path: impl AsRef<Path>, format: DataFormat, label_column: Option<usize>) -> Result<Dataset> {
    let file = File::open(path.as_ref())?;
    match format {
        DataFormat::Csv => parse_csv(file, label_column),
        DataFormat::Libsvm => parse_libsvm(BufReader::new(file)),
    }
}

/// Comma-separated numeric rows; the label sits in `label_column`
/// (default: last). A non-numeric first row is treated as a header.
pub fn parse_csv<R: Read>(reader: R, label_column: Option<usize>) -> Result<Dataset> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let mut inputs = Vec::new();
    let mut labels = Vec::new();
    let mut width: Option<usize> = None;
    for (i, rec) in rdr.records().enumerate() {
        let line = i + 1;
        let rec = rec.map_err(|e| Error::Parse {
            line,
            msg: e.to_string(),
        })?;
        if rec.iter().all(|f| f.is_empty()) {
            continue;
        }
        let parsed: std::result::Result<Vec<f64>, _> = rec.iter().map(str::parse::<f64>).collect();
        let values = match parsed {
            Ok(v) => v,
            Err(_) if i == 0 => continue,
            Err(e) => {
                return Err(Error::Parse {
                    line,
                    msg: format!("row {line}: {e}"),
                })
            }
        };
        match width {
            None => width = Some(values.len()),
            Some(w) if w != values.len() => {
                return Err(Error::Parse {
                    line,
                    msg: format!("row {line} has {} fields, expected {w}", values.len()),
                })
            }
            _ => {}
        }
        if values.len() < 2 {
            return Err(Error::Parse {
                line,
                msg: format!("row {line} needs at least one feature and a label"),
            });
        }
        let col = label_column.unwrap_or(values.len() - 1);
        if col >= values.len() {
            return Err(Error::Parse {
                line,
                msg: format!("label column {col} out of range"),
            });
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Parse {
                line,
                msg: format!("row {line} contains non-finite values"),
            });
        }
        let mut x = values;
        labels.push(x.remove(col));
        inputs.push(x);
    }
    Ok(Dataset { inputs, labels })
}

/// Sparse `label index:value ...` rows with 1-based indices, densified to
/// the largest index seen in the file.
pub fn parse_libsvm<R: BufRead>(reader: R) -> Result<Dataset> {
    let mut rows: Vec<Vec<(usize, f64)>> = Vec::new();
    let mut labels = Vec::new();
    let mut dim = 0usize;
    for (i, line) in reader.lines().enumerate() {
        let lineno = i + 1;
        let line = line?;
        let content = line.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let bad = |msg: String| Error::Parse { line: lineno, msg };
        let mut tokens = content.split_whitespace();
        let label: f64 = tokens
            .next()
            .unwrap()
            .parse()
            .map_err(|e| bad(format!("row {lineno}: bad label: {e}")))?;
        let mut entries = Vec::new();
        for tok in tokens {
            let (idx, val) = tok
                .split_once(':')
                .ok_or_else(|| bad(format!("row {lineno}: expected index:value, got {tok:?}")))?;
            let idx: usize = idx
                .parse()
                .map_err(|e| bad(format!("row {lineno}: bad index {idx:?}: {e}")))?;
            if idx == 0 {
                return Err(bad(format!("row {lineno}: indices are 1-based")));
            }
            let val: f64 = val
                .parse()
                .map_err(|e| bad(format!("row {lineno}: bad value {val:?}: {e}")))?;
            if !val.is_finite() || !label.is_finite() {
                return Err(bad(format!("row {lineno}: non-finite value")));
            }
            dim = dim.max(idx);
            entries.push((idx - 1, val));
        }
        rows.push(entries);
        labels.push(label);
    }
    let inputs = rows
        .into_iter()
        .map(|entries| {
            let mut x = vec![0.0; dim];
            for (j, v) in entries {
                x[j] = v;
            }
            x
        })
        .collect();
    Ok(Dataset { inputs, labels })
}

fn rescale(values: impl Iterator<Item = f64> + Clone) -> impl Fn(f64) -> f64 {
    let (lo, hi) = values.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
        (lo.min(v), hi.max(v))
    });
    move |v| {
        if hi > lo {
            2.0 * (v - lo) / (hi - lo) - 1.0
        } else {
            0.0
        }
    }
}

/// Maps every input coordinate and the labels affinely onto `[-1, 1]`;
/// constant columns map to 0.
pub fn scale(data: &Dataset) -> Dataset {
    let d = data.dim();
    let maps: Vec<_> = (0..d)
        .map(|j| rescale(data.inputs.iter().map(move |x| x[j])))
        .collect();
    let ymap = rescale(data.labels.iter().copied());
    Dataset {
        inputs: data
            .inputs
            .iter()
            .map(|x| x.iter().zip(&maps).map(|(&v, f)| f(v)).collect())
            .collect(),
        labels: data.labels.iter().map(|&y| ymap(y)).collect(),
    }
}
