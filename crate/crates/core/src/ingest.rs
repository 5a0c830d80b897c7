//! CSV loading and preprocessing: drop rows without a target label, impute
//! missing concentrations with per-attribute medians, flag unit outliers.

use std::collections::BTreeMap;
use std::io::Read;
use std::path::Path;

use serde::Serialize;
use thiserror::Error;

use crate::it2::{Category, It2Error, ParameterTable, Pollutant, Variable};

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error("missing mandatory column {0:?}")]
    MissingColumn(String),
    #[error("no records to preprocess")]
    EmptyInput,
    #[error("no labeled rows remain after dropping records without an AQI bucket")]
    NoLabeledRows,
    #[error("attribute {0} is missing in every labeled row; median is undefined")]
    MedianUndefined(Pollutant),
    #[error(transparent)]
    It2(#[from] It2Error),
}

/// One CSV row as loaded, before preprocessing.
#[derive(Debug, Clone, PartialEq)]
pub struct RawRecord {
    pub station: String,
    pub date: String,
    /// Concentrations by [`Pollutant::index`]; `None` is a missing cell.
    pub concentrations: [Option<f64>; 7],
    pub aqi: Option<f64>,
    pub bucket: Option<Category>,
}

/// A record after preprocessing: every concentration present and finite.
#[derive(Debug, Clone, PartialEq)]
pub struct CleanRecord {
    pub station: String,
    pub date: String,
    pub concentrations: [f64; 7],
    pub aqi: Option<f64>,
    pub bucket: Category,
}

impl CleanRecord {
    pub fn get(&self, p: Pollutant) -> f64 {
        self.concentrations[p.index()]
    }
}

/// How recognized and unrecognized header columns were mapped.
#[derive(Debug, Clone, Default, Serialize)]
pub struct ColumnReport {
    pub mapped: Vec<(String, String)>,
    pub ignored: Vec<String>,
}

/// A non-fatal problem with one cell, collected during loading.
#[derive(Debug, Clone, Serialize)]
pub struct RowIssue {
    pub line: usize,
    pub column: String,
    pub message: String,
}

#[derive(Debug)]
pub struct LoadResult {
    pub records: Vec<RawRecord>,
    pub report: ColumnReport,
    pub issues: Vec<RowIssue>,
}

/// Preprocessing summary. `rows_in = rows_dropped + rows_kept` always holds.
#[derive(Debug, Clone, Serialize)]
pub struct DatasetStats {
    pub rows_in: usize,
    pub rows_dropped_missing_label: usize,
    pub rows_kept: usize,
    pub medians: BTreeMap<String, f64>,
    pub missing_before: BTreeMap<String, usize>,
    pub missing_after: BTreeMap<String, usize>,
}

impl DatasetStats {
    pub fn render_text(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!(
            "rows in: {}\nrows dropped (missing label): {}\nrows kept: {}\n",
            self.rows_in, self.rows_dropped_missing_label, self.rows_kept
        ));
        out.push_str("attribute  median  missing before -> after\n");
        for p in Pollutant::ALL {
            let name = p.name();
            out.push_str(&format!(
                "{:9} {:>8.3} {:>6} -> {}\n",
                name,
                self.medians.get(name).copied().unwrap_or(f64::NAN),
                self.missing_before.get(name).copied().unwrap_or(0),
                self.missing_after.get(name).copied().unwrap_or(0),
            ));
        }
        out
    }
}

/// Median imputation scope: one global median per attribute, or one per
/// station with a global fallback for stations that never report the
/// attribute.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ImputeScope {
    #[default]
    Global,
    Station,
}

const STATION_COLUMNS: [&str; 3] = ["StationId", "City", "Station"];
const KNOWN_IGNORED: [&str; 5] = ["NO", "NOx", "Benzene", "Toluene", "Xylene"];

pub fn load_csv(path: &Path) -> Result<LoadResult, IngestError> {
    let file = std::fs::File::open(path)?;
    load_csv_reader(file)
}

pub fn load_csv_str(text: &str) -> Result<LoadResult, IngestError> {
    load_csv_reader(text.as_bytes())
}

pub fn load_csv_reader<R: Read>(reader: R) -> Result<LoadResult, IngestError> {
    let mut rdr = csv::ReaderBuilder::new().flexible(true).from_reader(reader);
    let headers = rdr.headers()?.clone();

    let find = |name: &str| headers.iter().position(|h| h.eq_ignore_ascii_case(name));
    let station_col = STATION_COLUMNS
        .iter()
        .find_map(|c| find(c))
        .ok_or_else(|| IngestError::MissingColumn("StationId/City".into()))?;
    let date_col = find("Date").ok_or_else(|| IngestError::MissingColumn("Date".into()))?;
    let mut pollutant_cols = [0usize; 7];
    for p in Pollutant::ALL {
        pollutant_cols[p.index()] =
            find(p.name()).ok_or_else(|| IngestError::MissingColumn(p.name().into()))?;
    }
    let aqi_col = find("AQI");
    let bucket_col = find("AQI_Bucket");

    let mut report = ColumnReport::default();
    report.mapped.push((headers[station_col].to_string(), "station".into()));
    report.mapped.push((headers[date_col].to_string(), "date".into()));
    for p in Pollutant::ALL {
        report.mapped.push((headers[pollutant_cols[p.index()]].to_string(), p.name().into()));
    }
    if let Some(i) = aqi_col {
        report.mapped.push((headers[i].to_string(), "AQI".into()));
    }
    if let Some(i) = bucket_col {
        report.mapped.push((headers[i].to_string(), "AQI_Bucket".into()));
    }
    let mapped_idx: Vec<usize> = {
        let mut v = vec![station_col, date_col];
        v.extend(pollutant_cols);
        v.extend(aqi_col);
        v.extend(bucket_col);
        v
    };
    for (i, h) in headers.iter().enumerate() {
        if !mapped_idx.contains(&i) {
            report.ignored.push(h.to_string());
        }
    }
    let _ = KNOWN_IGNORED; // documented export columns; anything unmapped is reported

    let mut records = Vec::new();
    let mut issues = Vec::new();
    for (row_idx, row) in rdr.records().enumerate() {
        let line = row_idx + 2; // header is line 1
        let row = row?;
        let cell = |i: usize| row.get(i).unwrap_or("").trim();
        let mut concentrations = [None; 7];
        for p in Pollutant::ALL {
            let text = cell(pollutant_cols[p.index()]);
            concentrations[p.index()] = parse_cell(text, p.name(), line, &mut issues);
        }
        let aqi = aqi_col.and_then(|i| parse_cell(cell(i), "AQI", line, &mut issues));
        let bucket = bucket_col.and_then(|i| {
            let text = cell(i);
            if text.is_empty() {
                None
            } else {
                match text.parse::<Category>() {
                    Ok(b) => Some(b),
                    Err(_) => {
                        issues.push(RowIssue {
                            line,
                            column: "AQI_Bucket".into(),
                            message: format!("unknown bucket {text:?}, treated as missing"),
                        });
                        None
                    }
                }
            }
        });
        records.push(RawRecord {
            station: cell(station_col).to_string(),
            date: cell(date_col).to_string(),
            concentrations,
            aqi,
            bucket,
        });
    }
    Ok(LoadResult { records, report, issues })
}

fn parse_cell(text: &str, column: &str, line: usize, issues: &mut Vec<RowIssue>) -> Option<f64> {
    if text.is_empty() || text.eq_ignore_ascii_case("na") || text.eq_ignore_ascii_case("nan") || text.eq_ignore_ascii_case("null") {
        return None;
    }
    match text.parse::<f64>() {
        Ok(v) if v.is_finite() && v >= 0.0 => Some(v),
        Ok(v) => {
            issues.push(RowIssue {
                line,
                column: column.into(),
                message: format!("value {v} out of domain, treated as missing"),
            });
            None
        }
        Err(_) => {
            issues.push(RowIssue {
                line,
                column: column.into(),
                message: format!("cannot parse {text:?} as a number, treated as missing"),
            });
            None
        }
    }
}

/// Median of a non-empty, unsorted sample; even counts average the two
/// central values.
pub fn median(values: &mut [f64]) -> f64 {
    values.sort_by(|a, b| a.partial_cmp(b).expect("finite values"));
    let n = values.len();
    if n % 2 == 1 {
        values[n / 2]
    } else {
        (values[n / 2 - 1] + values[n / 2]) / 2.0
    }
}

/// Drop rows without a target label, then fill missing concentrations with
/// medians computed over the remaining rows.
///
/// The order is fixed: medians are computed only after the drop, so unlabeled
/// rows never influence imputation.
pub fn preprocess(
    records: &[RawRecord],
    scope: ImputeScope,
) -> Result<(Vec<CleanRecord>, DatasetStats), IngestError> {
    if records.is_empty() {
        return Err(IngestError::EmptyInput);
    }
    let labeled: Vec<&RawRecord> = records.iter().filter(|r| r.bucket.is_some()).collect();
    let dropped = records.len() - labeled.len();
    if labeled.is_empty() {
        return Err(IngestError::NoLabeledRows);
    }

    let mut medians = BTreeMap::new();
    let mut missing_before = BTreeMap::new();
    let mut global = [0.0f64; 7];
    for p in Pollutant::ALL {
        let mut values: Vec<f64> =
            labeled.iter().filter_map(|r| r.concentrations[p.index()]).collect();
        missing_before.insert(p.name().to_string(), labeled.len() - values.len());
        if values.is_empty() {
            return Err(IngestError::MedianUndefined(p));
        }
        let m = median(&mut values);
        global[p.index()] = m;
        medians.insert(p.name().to_string(), m);
    }

    let mut per_station: BTreeMap<&str, [f64; 7]> = BTreeMap::new();
    if scope == ImputeScope::Station {
        let mut stations: BTreeMap<&str, Vec<&RawRecord>> = BTreeMap::new();
        for r in &labeled {
            stations.entry(r.station.as_str()).or_default().push(r);
        }
        for (station, rows) in stations {
            let mut meds = global;
            for p in Pollutant::ALL {
                let mut values: Vec<f64> =
                    rows.iter().filter_map(|r| r.concentrations[p.index()]).collect();
                if !values.is_empty() {
                    meds[p.index()] = median(&mut values);
                }
            }
            per_station.insert(station, meds);
        }
    }

    let mut clean = Vec::with_capacity(labeled.len());
    for r in &labeled {
        let meds = match scope {
            ImputeScope::Global => &global,
            ImputeScope::Station => per_station.get(r.station.as_str()).unwrap_or(&global),
        };
        let mut filled = [0.0; 7];
        for p in Pollutant::ALL {
            filled[p.index()] = r.concentrations[p.index()].unwrap_or(meds[p.index()]);
        }
        clean.push(CleanRecord {
            station: r.station.clone(),
            date: r.date.clone(),
            concentrations: filled,
            aqi: r.aqi,
            bucket: r.bucket.expect("labeled"),
        });
    }

    let missing_after = Pollutant::ALL.iter().map(|p| (p.name().to_string(), 0usize)).collect();
    let stats = DatasetStats {
        rows_in: records.len(),
        rows_dropped_missing_label: dropped,
        rows_kept: clean.len(),
        medians,
        missing_before,
        missing_after,
    };
    Ok((clean, stats))
}

/// A value flagged as implausibly large for its pollutant.
#[derive(Debug, Clone, Serialize)]
pub struct UnitWarning {
    pub station: String,
    pub date: String,
    pub pollutant: String,
    pub value: f64,
    pub bound: f64,
}

/// Flag concentrations above 1.5x the end of the most severe term's upper
/// support. Purely advisory; records are never mutated.
pub fn validate_units(records: &[CleanRecord], table: &ParameterTable) -> Vec<UnitWarning> {
    let mut bounds = [f64::INFINITY; 7];
    for p in Pollutant::ALL {
        if let Some(top) = table.top_term(Variable::Pollutant(p)) {
            if let Ok(set) = table.get(Variable::Pollutant(p), top) {
                bounds[p.index()] = 1.5 * set.umf.d;
            }
        }
    }
    let mut warnings = Vec::new();
    for r in records {
        for p in Pollutant::ALL {
            let v = r.get(p);
            let bound = bounds[p.index()];
            if v > bound {
                warnings.push(UnitWarning {
                    station: r.station.clone(),
                    date: r.date.clone(),
                    pollutant: p.name().to_string(),
                    value: v,
                    bound,
                });
            }
        }
    }
    warnings
}

/// Serialize cleaned records back to CSV (recognized columns only).
pub fn write_clean_csv<W: std::io::Write>(
    records: &[CleanRecord],
    out: W,
) -> Result<(), IngestError> {
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["StationId".to_string(), "Date".to_string()];
    header.extend(Pollutant::ALL.iter().map(|p| p.name().to_string()));
    header.push("AQI".into());
    header.push("AQI_Bucket".into());
    w.write_record(&header)?;
    for r in records {
        let mut row = vec![r.station.clone(), r.date.clone()];
        row.extend(r.concentrations.iter().map(|v| format!("{v}")));
        row.push(r.aqi.map(|v| format!("{v}")).unwrap_or_default());
        row.push(r.bucket.to_string());
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

/// Observed min/max per pollutant over clean records.
pub fn observed_ranges(records: &[CleanRecord]) -> Option<crate::rulebase::ObservedRanges> {
    if records.is_empty() {
        return None;
    }
    let mut ranges = [(f64::INFINITY, f64::NEG_INFINITY); 7];
    for r in records {
        for p in Pollutant::ALL {
            let v = r.get(p);
            let (min, max) = &mut ranges[p.index()];
            *min = min.min(v);
            *max = max.max(v);
        }
    }
    Some(ranges)
}

pub const DEMO_SAMPLE_CSV: &str = include_str!("../fixtures/demo_sample.csv");
