//! CSV ingestion for SCADA exports.

use std::collections::btree_map::BTreeMap;
use std::io::Write;
use std::path::Path;

use chrono::NaiveDateTime;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scada::{ScadaRecord, ScadaSeries};

/// Maps the canonical column names onto the header names of a concrete
/// export, so foreign SCADA dumps can be ingested without rewriting them.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct ColumnSchema {
    pub timestamp: String,
    pub wind_speed: String,
    pub wind_direction: String,
    pub power: String,
    pub ambient_temp: String,
    pub nacelle_temp: String,
    pub hydraulic_oil_temp: String,
    pub hydraulic_oil_pressure: String,
}

impl Default for ColumnSchema {
    fn default() -> Self {
        Self {
            timestamp: "timestamp".into(),
            wind_speed: "wind_speed".into(),
            wind_direction: "wind_direction".into(),
            power: "power".into(),
            ambient_temp: "ambient_temp".into(),
            nacelle_temp: "nacelle_temp".into(),
            hydraulic_oil_temp: "hydraulic_oil_temp".into(),
            hydraulic_oil_pressure: "hydraulic_oil_pressure".into(),
        }
    }
}

impl ColumnSchema {
    fn required(&self) -> [(&str, &str); 8] {
        [
            ("timestamp", &self.timestamp),
            ("wind_speed", &self.wind_speed),
            ("wind_direction", &self.wind_direction),
            ("power", &self.power),
            ("ambient_temp", &self.ambient_temp),
            ("nacelle_temp", &self.nacelle_temp),
            ("hydraulic_oil_temp", &self.hydraulic_oil_temp),
            ("hydraulic_oil_pressure", &self.hydraulic_oil_pressure),
        ]
    }
}

/// What happened while parsing a file. Skips are counted, never silent.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParseReport {
    pub rows_read: usize,
    pub rows_valid: usize,
    pub rows_skipped: usize,
    pub duplicates_dropped: usize,
    /// True when the file's rows were not in timestamp order and were
    /// re-sorted ascending.
    pub resorted: bool,
    /// Inferred cadence in seconds (modal delta between consecutive rows).
    pub cadence: i64,
    pub gap_count: usize,
}

/// Accepts epoch seconds, RFC 3339, or `YYYY-MM-DD[T ]HH:MM:SS` (taken as UTC).
pub(crate) fn parse_timestamp(s: &str) -> Option<i64> {
    let s = s.trim();
    if let Ok(epoch) = s.parse::<i64>() {
        return Some(epoch);
    }
    if let Ok(dt) = chrono::DateTime::parse_from_rfc3339(s) {
        return Some(dt.timestamp());
    }
    for fmt in ["%Y-%m-%dT%H:%M:%S", "%Y-%m-%d %H:%M:%S"] {
        if let Ok(naive) = NaiveDateTime::parse_from_str(s, fmt) {
            return Some(naive.and_utc().timestamp());
        }
    }
    None
}

/// Parses a SCADA CSV into an ordered series.
///
/// Rows with unparsable or invalid fields are counted and skipped. Unsorted
/// files are re-sorted ascending with the `resorted` flag set; rows sharing
/// a timestamp keep the first occurrence.
pub fn parse_csv(path: &Path, schema: &ColumnSchema) -> Result<(ScadaSeries, ParseReport)> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)?;

    let headers = reader.headers()?.clone();
    let mut col_idx: BTreeMap<&str, usize> = BTreeMap::new();
    for (canonical, header_name) in schema.required() {
        let idx = headers
            .iter()
            .position(|h| h == header_name)
            .ok_or_else(|| Error::MissingColumn(header_name.to_string()))?;
        col_idx.insert(canonical, idx);
    }

    let f = |record: &csv::StringRecord, name: &str| -> Option<f64> {
        record
            .get(col_idx[name])
            .and_then(|s| s.trim().parse::<f64>().ok())
    };

    let mut rows_read = 0usize;
    let mut rows_skipped = 0usize;
    let mut records: Vec<ScadaRecord> = Vec::new();
    for row in reader.records() {
        let row = row?;
        rows_read += 1;
        let parsed = (|| {
            let rec = ScadaRecord {
                timestamp: parse_timestamp(row.get(col_idx["timestamp"])?)?,
                wind_speed: f(&row, "wind_speed")?,
                wind_direction: f(&row, "wind_direction")?,
                power: f(&row, "power")?,
                ambient_temp: f(&row, "ambient_temp")?,
                nacelle_temp: f(&row, "nacelle_temp")?,
                hydraulic_oil_temp: f(&row, "hydraulic_oil_temp")?,
                hydraulic_oil_pressure: f(&row, "hydraulic_oil_pressure")?,
            };
            rec.is_valid().then_some(rec)
        })();
        match parsed {
            Some(rec) => records.push(rec),
            None => rows_skipped += 1,
        }
    }

    if records.is_empty() {
        return Err(Error::EmptyData(path.display().to_string()));
    }

    let resorted = records.windows(2).any(|p| p[1].timestamp < p[0].timestamp);
    if resorted {
        records.sort_by_key(|r| r.timestamp);
    }
    let before_dedup = records.len();
    records.dedup_by_key(|r| r.timestamp);
    let duplicates_dropped = before_dedup - records.len();

    let cadence = infer_cadence(&records);
    let series = ScadaSeries::new(records, cadence)?;
    let report = ParseReport {
        rows_read,
        rows_valid: series.len(),
        rows_skipped: rows_skipped + duplicates_dropped,
        duplicates_dropped,
        resorted,
        cadence,
        gap_count: series.gaps().len(),
    };
    Ok((series, report))
}

/// Modal positive delta between consecutive timestamps; 600 for a
/// single-record series.
fn infer_cadence(records: &[ScadaRecord]) -> i64 {
    let mut counts: BTreeMap<i64, usize> = BTreeMap::new();
    for pair in records.windows(2) {
        let delta = pair[1].timestamp - pair[0].timestamp;
        if delta > 0 {
            *counts.entry(delta).or_insert(0) += 1;
        }
    }
    counts
        .into_iter()
        .max_by_key(|&(delta, count)| (count, std::cmp::Reverse(delta)))
        .map_or(600, |(delta, _)| delta)
}

/// Writes a series back out in the ingest schema. When `cluster_ids` is
/// given (one per record), a trailing `cluster_id` column is appended.
pub fn write_csv(series: &ScadaSeries, path: &Path, cluster_ids: Option<&[usize]>) -> Result<()> {
    if let Some(ids) = cluster_ids {
        if ids.len() != series.len() {
            return Err(Error::DimensionMismatch {
                expected: series.len(),
                got: ids.len(),
                context: "cluster_id column",
            });
        }
    }
    let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
    write!(
        out,
        "timestamp,wind_speed,wind_direction,power,ambient_temp,nacelle_temp,hydraulic_oil_temp,hydraulic_oil_pressure"
    )?;
    writeln!(out, "{}", if cluster_ids.is_some() { ",cluster_id" } else { "" })?;
    for (i, r) in series.records().iter().enumerate() {
        write!(
            out,
            "{},{},{},{},{},{},{},{}",
            r.timestamp,
            r.wind_speed,
            r.wind_direction,
            r.power,
            r.ambient_temp,
            r.nacelle_temp,
            r.hydraulic_oil_temp,
            r.hydraulic_oil_pressure
        )?;
        match cluster_ids {
            Some(ids) => writeln!(out, ",{}", ids[i])?,
            None => writeln!(out)?,
        }
    }
    out.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write as _;

    const HEADER: &str = "timestamp,wind_speed,wind_direction,power,ambient_temp,nacelle_temp,hydraulic_oil_temp,hydraulic_oil_pressure";

    fn write_file(lines: &[&str]) -> tempfile::NamedTempFile {
        let mut file = tempfile::NamedTempFile::new().unwrap();
        for line in lines {
            writeln!(file, "{line}").unwrap();
        }
        file
    }

    #[test]
    fn well_formed_rows_parse_identically() {
        let file = write_file(&[
            HEADER,
            "0,5.0,180.0,100.0,10,20,40,160",
            "600,6.0,190.0,150.0,10,20,40,160",
            "1200,7.0,200.0,200.0,10,20,40,160",
        ]);
        let (series, report) = parse_csv(file.path(), &ColumnSchema::default()).unwrap();
        assert_eq!(series.len(), 3);
        assert_eq!(report.rows_valid, 3);
        assert_eq!(report.rows_skipped, 0);
        assert!(!report.resorted);
        assert_eq!(report.cadence, 600);
    }

    #[test]
    fn malformed_cell_is_skipped_and_counted() {
        let file = write_file(&[
            HEADER,
            "0,5.0,180.0,100.0,10,20,40,160",
            "600,not_a_number,190.0,150.0,10,20,40,160",
            "1200,7.0,200.0,200.0,10,20,40,160",
        ]);
        let (series, report) = parse_csv(file.path(), &ColumnSchema::default()).unwrap();
        assert_eq!(series.len(), 2);
        assert_eq!(report.rows_skipped, 1);
    }

    #[test]
    fn unsorted_rows_are_resorted_with_flag() {
        let file = write_file(&[
            HEADER,
            "1200,7.0,200.0,200.0,10,20,40,160",
            "0,5.0,180.0,100.0,10,20,40,160",
            "600,6.0,190.0,150.0,10,20,40,160",
        ]);
        let (series, report) = parse_csv(file.path(), &ColumnSchema::default()).unwrap();
        assert!(report.resorted);
        // Sort oracle: collect, sort by timestamp, compare.
        let mut expected: Vec<i64> = vec![1200, 0, 600];
        expected.sort_unstable();
        let got: Vec<i64> = series.records().iter().map(|r| r.timestamp).collect();
        assert_eq!(got, expected);
    }

    #[test]
    fn missing_column_is_a_schema_error() {
        let file = write_file(&[
            "timestamp,wind_speed,wind_direction,power,ambient_temp,nacelle_temp,hydraulic_oil_temp",
            "0,5.0,180.0,100.0,10,20,40",
        ]);
        let err = parse_csv(file.path(), &ColumnSchema::default()).unwrap_err();
        assert!(
            matches!(err, Error::MissingColumn(ref c) if c == "hydraulic_oil_pressure"),
            "got {err:?}"
        );
    }

    #[test]
    fn zero_valid_rows_is_empty_data() {
        let file = write_file(&[HEADER, "bad,row,entirely,,,,,"]);
        let err = parse_csv(file.path(), &ColumnSchema::default()).unwrap_err();
        assert!(matches!(err, Error::EmptyData(_)));
    }

    #[test]
    fn iso_timestamps_are_accepted() {
        assert_eq!(parse_timestamp("1970-01-01T00:10:00"), Some(600));
        assert_eq!(parse_timestamp("1970-01-01 00:10:00"), Some(600));
        assert_eq!(parse_timestamp("1970-01-01T00:10:00+00:00"), Some(600));
        assert_eq!(parse_timestamp("600"), Some(600));
        assert_eq!(parse_timestamp("junk"), None);
    }

    #[test]
    fn csv_round_trip_preserves_records() {
        let file = write_file(&[
            HEADER,
            "0,5.0,180.0,100.0,10,20,40,160",
            "600,6.0,190.0,150.0,10,20,40,160",
        ]);
        let (series, _) = parse_csv(file.path(), &ColumnSchema::default()).unwrap();
        let out = tempfile::NamedTempFile::new().unwrap();
        write_csv(&series, out.path(), None).unwrap();
        let (reparsed, _) = parse_csv(out.path(), &ColumnSchema::default()).unwrap();
        assert_eq!(series, reparsed);
    }
}
