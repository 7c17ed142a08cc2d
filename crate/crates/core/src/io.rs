//! Dataset CSV: a header row, one row per sample, feature columns plus one
//! integer label column. Written as `f1,…,fn,label`.

use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LabelColumn {
    /// Header name.
    Name(String),
    /// Zero-based column position.
    Index(usize),
}

impl LabelColumn {
    /// A purely numeric argument is an index, anything else a header name.
    pub fn parse(arg: &str) -> Self {
        match arg.parse() {
            Ok(i) => Self::Index(i),
            Err(_) => Self::Name(arg.to_string()),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReadOptions {
    /// Defaults to the column headed `label`, else the last column.
    pub label_column: Option<LabelColumn>,
    /// Map the distinct label values, in increasing order, onto `1..=l`.
    pub relabel: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LoadedDataset {
    pub dataset: Dataset,
    pub feature_names: Vec<String>,
}

pub fn read_dataset(path: &Path, options: &ReadOptions) -> Result<LoadedDataset> {
    let file = File::open(path).map_err(|e| Error::Parse {
        path: path.display().to_string(),
        line: 0,
        column: 0,
        message: format!("cannot open: {e}"),
    })?;
    read_dataset_from(file, &path.display().to_string(), options)
}

/// Reads a header row and numeric rows. Fields are separated by commas, or by
/// semicolons when the header line has a semicolon and no comma.
pub fn read_dataset_from<R: Read>(
    mut input: R,
    source: &str,
    options: &ReadOptions,
) -> Result<LoadedDataset> {
    let err = |line: u64, column: usize, message: String| Error::Parse {
        path: source.to_string(),
        line,
        column,
        message,
    };
    let mut text = Vec::new();
    input
        .read_to_end(&mut text)
        .map_err(|e| err(0, 0, format!("cannot read: {e}")))?;
    let first_line = text.split(|&b| b == b'\n').next().unwrap_or_default();
    let delimiter = if first_line.contains(&b';') && !first_line.contains(&b',') {
        b';'
    } else {
        b','
    };
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .delimiter(delimiter)
        .from_reader(text.as_slice());
    let header: Vec<String> = reader
        .headers()
        .map_err(|e| err(1, 0, e.to_string()))?
        .iter()
        .map(|h| h.trim().to_string())
        .collect();
    if header.len() < 2 {
        return Err(err(1, 0, "need at least one feature column and a label column".into()));
    }
    let label_col = match &options.label_column {
        Some(LabelColumn::Index(i)) if *i < header.len() => *i,
        Some(LabelColumn::Index(i)) => {
            return Err(err(1, 0, format!("label column {i} out of range ({} columns)", header.len())))
        }
        Some(LabelColumn::Name(name)) => header
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| err(1, 0, format!("no column named {name:?}")))?,
        None => header.iter().position(|h| h == "label").unwrap_or(header.len() - 1),
    };
    let feature_names: Vec<String> = header
        .iter()
        .enumerate()
        .filter(|&(j, _)| j != label_col)
        .map(|(_, h)| h.clone())
        .collect();

    let mut features = Vec::new();
    let mut raw_labels = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            err(line, 0, e.to_string())
        })?;
        let line = record.position().map_or(0, |p| p.line());
        if record.len() != header.len() {
            return Err(err(
                line,
                record.len().min(header.len()) + 1,
                format!("expected {} fields, found {}", header.len(), record.len()),
            ));
        }
        for (j, field) in record.iter().enumerate() {
            let field = field.trim();
            if j == label_col {
                raw_labels.push(parse_label(field).ok_or_else(|| {
                    err(line, j + 1, format!("label {field:?} is not an integer"))
                })?);
            } else {
                let v: f64 = field
                    .parse()
                    .map_err(|_| err(line, j + 1, format!("{field:?} is not a number")))?;
                if !v.is_finite() {
                    return Err(err(line, j + 1, format!("{field:?} is not finite")));
                }
                features.push(v);
            }
        }
    }
    if raw_labels.is_empty() {
        return Err(err(2, 0, "no data rows".into()));
    }

    let labels: Vec<usize> = if options.relabel {
        let mut distinct = raw_labels.clone();
        distinct.sort_unstable();
        distinct.dedup();
        raw_labels
            .iter()
            .map(|l| distinct.binary_search(l).unwrap() + 1)
            .collect()
    } else {
        raw_labels
            .iter()
            .enumerate()
            .map(|(i, &l)| {
                usize::try_from(l).ok().filter(|&l| l >= 1).ok_or_else(|| {
                    err(
                        i as u64 + 2,
                        label_col + 1,
                        format!("label {l} is outside 1..l (try relabeling)"),
                    )
                })
            })
            .collect::<Result<_>>()?
    };
    let dataset = Dataset::from_flat(feature_names.len(), features, labels, None)?;
    Ok(LoadedDataset {
        dataset,
        feature_names,
    })
}

fn parse_label(field: &str) -> Option<i64> {
    if let Ok(v) = field.parse::<i64>() {
        return Some(v);
    }
    let v: f64 = field.parse().ok()?;
    (v.fract() == 0.0 && v.abs() < 1e15).then_some(v as i64)
}

pub fn write_dataset(path: &Path, dataset: &Dataset) -> Result<()> {
    let file = File::create(path)?;
    write_dataset_to(std::io::BufWriter::new(file), dataset)
}

/// Writes `f1..fn,label` with every value at 17 significant digits, which
/// reads back bit-identically.
pub fn write_dataset_to<W: Write>(out: W, dataset: &Dataset) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header: Vec<String> = (1..=dataset.n_features()).map(|j| format!("f{j}")).collect();
    header.push("label".into());
    w.write_record(&header)?;
    for (row, label) in dataset.rows().zip(dataset.labels()) {
        let mut rec: Vec<String> = row.iter().map(|v| format!("{v:.16e}")).collect();
        rec.push(label.to_string());
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn read(text: &str, options: &ReadOptions) -> Result<LoadedDataset> {
        read_dataset_from(text.as_bytes(), "mem", options)
    }

    #[test]
    fn round_trip_is_lossless() {
        let rows = vec![
            vec![0.1 + 0.2, -1e-300, std::f64::consts::PI],
            vec![1.0 / 3.0, 123456789.123456789, -0.0],
        ];
        let d = Dataset::new(rows, vec![1, 2], None).unwrap();
        let mut buf = Vec::new();
        write_dataset_to(&mut buf, &d).unwrap();
        let back = read(std::str::from_utf8(&buf).unwrap(), &ReadOptions::default()).unwrap();
        assert_eq!(back.dataset, d);
        assert_eq!(back.feature_names, vec!["f1", "f2", "f3"]);
    }

    #[test]
    fn semicolon_separated_files_are_detected() {
        let d = read("\"a\";\"b\";\"quality\"\n0.5;1;5\n0.1;2;6\n", &ReadOptions { label_column: None, relabel: true }).unwrap();
        assert_eq!(d.feature_names, vec!["a", "b"]);
        assert_eq!(d.dataset.labels(), &[1, 2]);
        assert_eq!(d.dataset.row(1), &[0.1, 2.0]);
    }

    #[test]
    fn label_column_by_name_and_index() {
        let text = "quality,a,b\n2,0.5,1\n1,0.1,2\n";
        let opts = ReadOptions {
            label_column: Some(LabelColumn::parse("quality")),
            relabel: false,
        };
        let d = read(text, &opts).unwrap();
        assert_eq!(d.dataset.labels(), &[2, 1]);
        assert_eq!(d.dataset.row(0), &[0.5, 1.0]);
        let opts = ReadOptions {
            label_column: Some(LabelColumn::parse("0")),
            relabel: false,
        };
        assert_eq!(read(text, &opts).unwrap(), d);
    }

    #[test]
    fn relabel_maps_distinct_values() {
        let text = "x,label\n1,3\n2,8\n3,5\n4,3\n";
        let opts = ReadOptions {
            label_column: None,
            relabel: true,
        };
        assert_eq!(read(text, &opts).unwrap().dataset.labels(), &[1, 3, 2, 1]);
        assert!(read(text, &ReadOptions::default()).is_err());
    }

    #[test]
    fn diagnostics_name_row_and_column() {
        match read("f1,f2,label\n1,2,1\n3,oops,2\n", &ReadOptions::default()) {
            Err(Error::Parse { line, column, .. }) => assert_eq!((line, column), (3, 2)),
            other => panic!("{other:?}"),
        }
        match read("f1,label\n1,1\n2,x\n", &ReadOptions::default()) {
            Err(Error::Parse { line, column, .. }) => assert_eq!((line, column), (3, 2)),
            other => panic!("{other:?}"),
        }
        assert!(matches!(
            read("f1,label\n1,1,3\n", &ReadOptions::default()),
            Err(Error::Parse { line: 2, .. })
        ));
        assert!(read("f1,label\n", &ReadOptions::default()).is_err());
    }

    #[test]
    fn integral_float_labels_accepted() {
        let d = read("f1,label\n1,1.0\n2,2\n", &ReadOptions::default()).unwrap();
        assert_eq!(d.dataset.labels(), &[1, 2]);
    }
}
