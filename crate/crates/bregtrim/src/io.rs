//! CSV datasets, label columns, matrix files and atomic writes.
//!
//! Dataset files hold one point per row. An optional header names the
//! columns; a column named `label` holds ground-truth labels (`0` for noise)
//! and every other column is a coordinate. Files without a header are all
//! coordinates. Numbers use `.` as decimal separator whatever the locale.

use std::fs;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use bregtrim_core::divergence::SpdMatrix;
use bregtrim_core::{Dataset, Divergence};

use crate::error::{Error, Result};

/// A dataset read from disk, remembering where its rows came from.
#[derive(Debug, Clone)]
pub struct CsvDataset {
    pub data: Dataset,
    pub path: PathBuf,
    pub has_header: bool,
    /// Header text of each coordinate column.
    pub columns: Vec<String>,
}

impl CsvDataset {
    /// 1-based file line of data row `row`.
    pub fn line_of(&self, row: usize) -> u64 {
        row as u64 + 1 + u64::from(self.has_header)
    }

    /// Checks every point against the divergence domain, reporting the file
    /// line and column of the first violation.
    pub fn check_domain(&self, div: &Divergence) -> Result<()> {
        div.check_dim(self.data.dim())?;
        for (i, row) in self.data.rows().enumerate() {
            if let Err(bregtrim_core::Error::Domain {
                coord,
                value,
                expected,
                ..
            }) = div.check_point(row)
            {
                return Err(Error::Input {
                    path: self.path.clone(),
                    line: self.line_of(i),
                    column: self.columns[coord].clone(),
                    message: format!("value {value} is outside the {div} domain {expected}"),
                });
            }
        }
        Ok(())
    }
}

fn csv_position(e: &csv::Error) -> u64 {
    e.position().map_or(0, |p| p.line())
}

fn parse_number(text: &str) -> Option<f64> {
    text.parse::<f64>().ok()
}

fn parse_label(text: &str) -> Option<usize> {
    text.parse::<usize>().ok().or_else(|| {
        let v = text.parse::<f64>().ok()?;
        (v >= 0.0 && v.fract() == 0.0 && v < usize::MAX as f64).then_some(v as usize)
    })
}

fn reader_for<R: Read>(input: R) -> csv::Reader<R> {
    csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(input)
}

/// Reads a dataset CSV from any reader; `path` only labels messages.
pub fn parse_dataset<R: Read>(input: R, path: &Path) -> Result<CsvDataset> {
    let mut reader = reader_for(input);
    let mut records = reader.records();
    let input_err = |line: u64, column: String, message: String| Error::Input {
        path: path.to_path_buf(),
        line,
        column,
        message,
    };
    let first = match records.next() {
        None => return Err(input_err(1, "-".into(), "file holds no rows".into())),
        Some(r) => r.map_err(|e| input_err(csv_position(&e), "-".into(), e.to_string()))?,
    };
    let has_header = first.iter().any(|f| parse_number(f).is_none());
    let width = first.len();
    let (columns, label_col): (Vec<String>, Option<usize>) = if has_header {
        let label_col = first.iter().position(|f| f.eq_ignore_ascii_case("label"));
        let names = first
            .iter()
            .enumerate()
            .filter(|(i, _)| Some(*i) != label_col)
            .map(|(_, f)| f.to_string())
            .collect();
        (names, label_col)
    } else {
        ((1..=width).map(|i| format!("x{i}")).collect(), None)
    };
    if columns.is_empty() {
        return Err(input_err(1, "-".into(), "no coordinate columns".into()));
    }
    let mut points = Vec::new();
    let mut labels = Vec::new();
    let mut push_row = |record: &csv::StringRecord, line: u64| -> Result<()> {
        if record.len() != width {
            return Err(input_err(
                line,
                "-".into(),
                format!("expected {width} fields, found {}", record.len()),
            ));
        }
        for (i, field) in record.iter().enumerate() {
            let name = || {
                if has_header {
                    first[i].to_string()
                } else {
                    format!("{}", i + 1)
                }
            };
            if Some(i) == label_col {
                let l = parse_label(field).ok_or_else(|| {
                    input_err(line, name(), format!("`{field}` is not a non-negative integer label"))
                })?;
                labels.push(l);
            } else {
                let v = parse_number(field)
                    .ok_or_else(|| input_err(line, name(), format!("`{field}` is not a number")))?;
                points.push(v);
            }
        }
        Ok(())
    };
    if !has_header {
        push_row(&first, 1)?;
    }
    for record in records {
        let record = record.map_err(|e| input_err(csv_position(&e), "-".into(), e.to_string()))?;
        let line = record.position().map_or(0, |p| p.line());
        push_row(&record, line)?;
    }
    if points.is_empty() {
        return Err(input_err(2, "-".into(), "file holds a header but no data rows".into()));
    }
    let mut data = Dataset::new(points, columns.len())?;
    if label_col.is_some() {
        data = data.with_labels(labels)?;
    }
    Ok(CsvDataset {
        data,
        path: path.to_path_buf(),
        has_header,
        columns,
    })
}

pub fn read_dataset(path: &Path) -> Result<CsvDataset> {
    let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    parse_dataset(file, path)
}

/// CSV text with header `x1,...,xd[,label]`.
pub fn dataset_csv(data: &Dataset) -> Vec<u8> {
    let mut out = Vec::new();
    let mut header: Vec<String> = (1..=data.dim()).map(|i| format!("x{i}")).collect();
    if data.labels().is_some() {
        header.push("label".into());
    }
    writeln!(out, "{}", header.join(",")).expect("writing to memory");
    for (i, row) in data.rows().enumerate() {
        let mut fields: Vec<String> = row.iter().map(|v| v.to_string()).collect();
        if let Some(l) = data.labels() {
            fields.push(l[i].to_string());
        }
        writeln!(out, "{}", fields.join(",")).expect("writing to memory");
    }
    out
}

pub fn write_dataset(path: &Path, data: &Dataset) -> Result<()> {
    write_atomic(path, &dataset_csv(data))
}

/// Writes through a temporary file in the target directory and renames it
/// into place, so readers never see a partial file.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| Error::io(path, e))?;
    tmp.write_all(bytes).map_err(|e| Error::io(path, e))?;
    tmp.as_file().sync_all().map_err(|e| Error::io(path, e))?;
    tmp.persist(path).map_err(|e| Error::io(path, e.error))?;
    Ok(())
}

/// Square matrix from a CSV file of numbers, one row per line, no header.
pub fn read_matrix(path: &Path) -> Result<SpdMatrix> {
    let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut entries = Vec::new();
    let mut rows = 0;
    for record in reader_for(file).records() {
        let record = record.map_err(|e| Error::Input {
            path: path.to_path_buf(),
            line: csv_position(&e),
            column: "-".into(),
            message: e.to_string(),
        })?;
        let line = record.position().map_or(0, |p| p.line());
        for (i, field) in record.iter().enumerate() {
            let v = parse_number(field).ok_or_else(|| Error::Input {
                path: path.to_path_buf(),
                line,
                column: (i + 1).to_string(),
                message: format!("`{field}` is not a number"),
            })?;
            entries.push(v);
        }
        rows += 1;
    }
    if rows == 0 || entries.len() != rows * rows {
        return Err(Error::Input {
            path: path.to_path_buf(),
            line: 1,
            column: "-".into(),
            message: format!("expected a square matrix, read {} values on {rows} rows", entries.len()),
        });
    }
    Ok(SpdMatrix::new(entries, rows)?)
}

/// Parses a divergence string, loading `mahalanobis:<path>` matrices from
/// disk.
pub fn parse_divergence(text: &str) -> Result<Divergence> {
    let mut load_error = None;
    let parsed = Divergence::parse_with(text, |path| {
        read_matrix(Path::new(path)).map_err(|e| {
            let msg = e.to_string();
            load_error = Some(e);
            bregtrim_core::Error::Parse(msg)
        })
    });
    match (parsed, load_error) {
        (_, Some(e)) => Err(e),
        (Ok(d), None) => Ok(d),
        (Err(e), None) => Err(e.into()),
    }
}

/// Reads a label vector from `file[:column]`.
///
/// JSON files may be a fit result (its `labels` field) or a bare array. For
/// CSV files `column` is a header name or a 1-based index; without it the
/// `label` column is used, or the only column of a single-column file.
pub fn read_labels(selector: &str) -> Result<Vec<usize>> {
    let (path, column) = if Path::new(selector).exists() {
        (selector, None)
    } else {
        match selector.rsplit_once(':') {
            Some((p, c)) if !c.is_empty() => (p, Some(c)),
            _ => (selector, None),
        }
    };
    let path = Path::new(path);
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let is_json = path.extension().is_some_and(|e| e.eq_ignore_ascii_case("json"));
    if is_json {
        return labels_from_json(&text, path);
    }
    labels_from_csv(&text, path, column)
}

fn labels_from_json(text: &str, path: &Path) -> Result<Vec<usize>> {
    #[derive(serde::Deserialize)]
    #[serde(untagged)]
    enum LabelsJson {
        Bare(Vec<usize>),
        Fit { labels: Vec<usize> },
    }
    let parsed: LabelsJson = serde_json::from_str(text).map_err(|e| Error::Input {
        path: path.to_path_buf(),
        line: e.line() as u64,
        column: e.column().to_string(),
        message: "expected a fit result or an array of non-negative integers".into(),
    })?;
    Ok(match parsed {
        LabelsJson::Bare(l) | LabelsJson::Fit { labels: l } => l,
    })
}

fn labels_from_csv(text: &str, path: &Path, column: Option<&str>) -> Result<Vec<usize>> {
    let mut reader = reader_for(text.as_bytes());
    let rows: Vec<csv::StringRecord> = reader
        .records()
        .collect::<std::result::Result<_, _>>()
        .map_err(|e| Error::Input {
            path: path.to_path_buf(),
            line: csv_position(&e),
            column: "-".into(),
            message: e.to_string(),
        })?;
    let Some(first) = rows.first() else {
        return Ok(Vec::new());
    };
    let has_header = first.iter().any(|f| parse_label(f).is_none() && parse_number(f).is_none());
    let usage = |msg: String| Error::Usage(format!("{}: {msg}", path.display()));
    let index = match column {
        Some(c) => match c.parse::<usize>() {
            Ok(i) if i >= 1 && i <= first.len() => i - 1,
            Ok(i) => return Err(usage(format!("column {i} does not exist"))),
            Err(_) if has_header => first
                .iter()
                .position(|f| f == c)
                .ok_or_else(|| usage(format!("no column named `{c}`")))?,
            Err(_) => return Err(usage(format!("no header, so column `{c}` must be an index"))),
        },
        None => {
            let by_name = has_header
                .then(|| first.iter().position(|f| f.eq_ignore_ascii_case("label")))
                .flatten();
            match by_name {
                Some(i) => i,
                None if first.len() == 1 => 0,
                None => return Err(usage("no `label` column; append `:<column>` to choose one".into())),
            }
        }
    };
    let skip = usize::from(has_header);
    rows.iter()
        .skip(skip)
        .map(|r| {
            let line = r.position().map_or(0, |p| p.line());
            let field = r.get(index).unwrap_or("");
            parse_label(field).ok_or_else(|| Error::Input {
                path: path.to_path_buf(),
                line,
                column: (index + 1).to_string(),
                message: format!("`{field}` is not a non-negative integer label"),
            })
        })
        .collect()
}
