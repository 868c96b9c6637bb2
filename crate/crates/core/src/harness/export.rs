use std::path::Path;

use serde::{Deserialize, Serialize};

use super::metrics::{AggregateRecord, RunRecord};
use super::HarnessError;

pub const CSV_HEADER: [&str; 5] = ["step", "series", "value", "seed_count", "std"];

/// One exported value. An absent value is written as an empty field.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Row {
    pub step: u64,
    pub series: String,
    pub value: Option<f64>,
    pub seed_count: usize,
    pub std: Option<f64>,
}

/// Long-format view of a run or an aggregate, ordered by series then step.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SeriesTable {
    pub rows: Vec<Row>,
}

impl From<&RunRecord> for SeriesTable {
    fn from(r: &RunRecord) -> Self {
        let rows = r
            .series
            .iter()
            .flat_map(|(name, values)| {
                r.steps.iter().zip(values).map(move |(&step, &value)| Row {
                    step,
                    series: name.clone(),
                    value,
                    seed_count: usize::from(value.is_some()),
                    std: None,
                })
            })
            .collect();
        SeriesTable { rows }
    }
}

impl From<&AggregateRecord> for SeriesTable {
    fn from(r: &AggregateRecord) -> Self {
        let rows = r
            .series
            .iter()
            .flat_map(|(name, points)| {
                r.steps.iter().zip(points).map(move |(&step, p)| Row {
                    step,
                    series: name.clone(),
                    value: p.mean,
                    seed_count: p.count,
                    std: p.std,
                })
            })
            .collect();
        SeriesTable { rows }
    }
}

impl SeriesTable {
    /// Distinct series names in first-appearance order.
    pub fn series_names(&self) -> Vec<&str> {
        let mut names: Vec<&str> = Vec::new();
        for r in &self.rows {
            if !names.contains(&r.series.as_str()) {
                names.push(&r.series);
            }
        }
        names
    }

    pub fn rows_of<'a>(&'a self, series: &'a str) -> impl Iterator<Item = &'a Row> + 'a {
        self.rows.iter().filter(move |r| r.series == series)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ExportFormat {
    Csv,
    /// JSON with the same rows.
    Json,
}

impl ExportFormat {
    /// `.json` means JSON, anything else CSV.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some(e) if e.eq_ignore_ascii_case("json") => ExportFormat::Json,
            _ => ExportFormat::Csv,
        }
    }
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

pub fn to_csv_string(table: &SeriesTable) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(CSV_HEADER).expect("in-memory write");
    for r in &table.rows {
        w.write_record([r.step.to_string(), r.series.clone(), fmt_opt(r.value), r.seed_count.to_string(), fmt_opt(r.std)])
            .expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("csv output is UTF-8")
}

pub fn from_csv_str(text: &str) -> Result<SeriesTable, HarnessError> {
    let mut reader = csv::ReaderBuilder::new().has_headers(true).from_reader(text.as_bytes());
    let header = reader.headers().map_err(|e| HarnessError::Csv { line: 1, message: e.to_string() })?;
    if header.iter().ne(CSV_HEADER) {
        return Err(HarnessError::Csv { line: 1, message: format!("expected header {}", CSV_HEADER.join(",")) });
    }
    let mut rows = Vec::new();
    for rec in reader.records() {
        let rec = rec.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            HarnessError::Csv { line, message: e.to_string() }
        })?;
        let line = rec.position().map_or(0, |p| p.line());
        let bad = |m: String| HarnessError::Csv { line, message: m };
        let opt = |s: &str| -> Result<Option<f64>, HarnessError> {
            if s.is_empty() {
                Ok(None)
            } else {
                s.parse().map(Some).map_err(|_| bad(format!("not a number: {s:?}")))
            }
        };
        rows.push(Row {
            step: rec[0].parse().map_err(|_| bad(format!("bad step {:?}", &rec[0])))?,
            series: rec[1].to_string(),
            value: opt(&rec[2])?,
            seed_count: rec[3].parse().map_err(|_| bad(format!("bad seed_count {:?}", &rec[3])))?,
            std: opt(&rec[4])?,
        });
    }
    Ok(SeriesTable { rows })
}

pub fn export(table: &SeriesTable, path: &Path, format: ExportFormat) -> Result<(), HarnessError> {
    let text = match format {
        ExportFormat::Csv => to_csv_string(table),
        ExportFormat::Json => serde_json::to_string_pretty(table).expect("rows always serialise"),
    };
    std::fs::write(path, text).map_err(|e| HarnessError::io(path, e))
}

pub fn import(path: &Path) -> Result<SeriesTable, HarnessError> {
    let text = std::fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
    match ExportFormat::from_path(path) {
        ExportFormat::Csv => from_csv_str(&text),
        ExportFormat::Json => {
            serde_json::from_str(&text).map_err(|e| HarnessError::Csv { line: e.line() as u64, message: e.to_string() })
        }
    }
}
