//! Dataset ingestion and export.

use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::data::SubjectRecord;
use crate::error::{GmiError, Result};

/// Column names of the input CSV. Covariate columns are the headers made of
/// a prefix followed by a positive integer (`z1`, `z2`, `v1`, …), taken in
/// numeric order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ColumnMap {
    pub t0: String,
    pub time1: String,
    pub status1: String,
    pub continuous_prefix: String,
    pub categorical_prefix: String,
}

impl Default for ColumnMap {
    fn default() -> Self {
        Self {
            t0: "t0".into(),
            time1: "time1".into(),
            status1: "status1".into(),
            continuous_prefix: "z".into(),
            categorical_prefix: "v".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub records: Vec<SubjectRecord>,
    pub source: PathBuf,
    pub column_map: ColumnMap,
}

impl Dataset {
    pub fn events(&self) -> usize {
        self.records.iter().filter(|r| r.delta1).count()
    }

    pub fn censored(&self) -> usize {
        self.records.len() - self.events()
    }

    pub fn censoring_rate(&self) -> f64 {
        crate::data::censoring_fraction(&self.records)
    }
}

fn numbered_columns(headers: &csv::StringRecord, prefix: &str) -> Vec<usize> {
    let mut cols: Vec<(u32, usize)> = headers
        .iter()
        .enumerate()
        .filter_map(|(i, h)| {
            let rest = h.trim().strip_prefix(prefix)?;
            (!rest.is_empty() && rest.bytes().all(|b| b.is_ascii_digit()))
                .then(|| rest.parse().ok().map(|k| (k, i)))
                .flatten()
        })
        .collect();
    cols.sort();
    cols.into_iter().map(|(_, i)| i).collect()
}

pub fn parse_csv(path: &Path, map: &ColumnMap) -> Result<Dataset> {
    let file = std::fs::File::open(path)?;
    parse_csv_reader(file, path, map)
}

/// Parses a dataset from any reader; `source` is used in error messages.
pub fn parse_csv_reader<R: Read>(reader: R, source: &Path, map: &ColumnMap) -> Result<Dataset> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(reader);
    let data_err = |message: String| GmiError::Data {
        path: source.to_path_buf(),
        message,
    };
    let headers = rdr.headers()?.clone();
    if headers.is_empty() || headers.iter().all(str::is_empty) {
        return Err(data_err("empty file: no header row".into()));
    }
    let col = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| data_err(format!("missing required column '{name}'")))
    };
    let (c_t0, c_y1, c_d1) = (col(&map.t0)?, col(&map.time1)?, col(&map.status1)?);
    let z_cols = numbered_columns(&headers, &map.continuous_prefix);
    let v_cols = numbered_columns(&headers, &map.categorical_prefix);

    let mut records = Vec::new();
    for row in rdr.records() {
        let row = row?;
        let line = row.position().map_or(0, |p| p.line());
        let perr = |message: String| GmiError::Parse {
            path: source.to_path_buf(),
            line,
            message,
        };
        let field = |c: usize, name: &str| -> Result<&str> {
            match row.get(c) {
                Some(s) if !s.is_empty() => Ok(s),
                _ => Err(perr(format!("missing value for '{name}'"))),
            }
        };
        let time = |c: usize, name: &str| -> Result<f64> {
            let s = field(c, name)?;
            let v: f64 = s
                .parse()
                .map_err(|_| perr(format!("'{name}' is not a number: '{s}'")))?;
            if !(v.is_finite() && v > 0.0) {
                return Err(perr(format!("'{name}' must be positive, got {s}")));
            }
            Ok(v)
        };
        let t0 = time(c_t0, &map.t0)?;
        let y1 = time(c_y1, &map.time1)?;
        let delta1 = match field(c_d1, &map.status1)? {
            "1" => true,
            "0" => false,
            other => return Err(perr(format!("unknown status code '{other}' (expected 0 or 1)"))),
        };
        let z = z_cols
            .iter()
            .map(|&c| {
                let s = field(c, &headers[c])?;
                s.parse::<f64>()
                    .ok()
                    .filter(|v| v.is_finite())
                    .ok_or_else(|| perr(format!("covariate '{}' is not a finite number: '{s}'", &headers[c])))
            })
            .collect::<Result<Vec<f64>>>()?;
        let v = v_cols
            .iter()
            .map(|&c| field(c, &headers[c]).map(str::to_string))
            .collect::<Result<Vec<String>>>()?;
        records.push(SubjectRecord::new(t0, y1, delta1).with_covariates(z, v));
    }
    if records.is_empty() {
        return Err(data_err("empty file: no data rows".into()));
    }
    Ok(Dataset {
        records,
        source: source.to_path_buf(),
        column_map: map.clone(),
    })
}

/// Writes the dataset in the input format. Times are written with
/// round-trip precision.
pub fn write_csv<W: Write>(ds: &Dataset, out: W) -> Result<()> {
    let map = &ds.column_map;
    let mut w = csv::Writer::from_writer(out);
    let (q, p) = ds.records.first().map_or((0, 0), |r| (r.z.len(), r.v.len()));
    let mut header = vec![map.t0.clone(), map.time1.clone(), map.status1.clone()];
    header.extend((1..=q).map(|k| format!("{}{k}", map.continuous_prefix)));
    header.extend((1..=p).map(|k| format!("{}{k}", map.categorical_prefix)));
    w.write_record(&header)?;
    for r in &ds.records {
        let mut row = vec![r.t0.to_string(), r.y1.to_string(), (r.delta1 as u8).to_string()];
        row.extend(r.z.iter().map(f64::to_string));
        row.extend(r.v.iter().cloned());
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

/// Administrative censoring at `cap` months of follow-up: records with
/// `y1 > cap` become `(cap, censored)`. `t0` is never changed.
pub fn restrict_followup(ds: &Dataset, cap: f64) -> Result<Dataset> {
    if !(cap.is_finite() && cap > 0.0) {
        return Err(GmiError::InvalidParameter(format!(
            "follow-up cap must be positive, got {cap}"
        )));
    }
    let records = ds
        .records
        .iter()
        .map(|r| {
            let mut r = r.clone();
            if r.y1 > cap {
                r.y1 = cap;
                r.delta1 = false;
            }
            r
        })
        .collect();
    Ok(Dataset {
        records,
        source: ds.source.clone(),
        column_map: ds.column_map.clone(),
    })
}
