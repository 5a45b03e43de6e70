//! CSV reading and writing.
//!
//! Numbers are written with Rust's shortest round-trip formatting, so a
//! written configuration reads back bit for bit. Missing cells are written
//! as empty fields.

use std::fs;
use std::path::Path;

use drqa_core::agreement::{expected_agreement, item_agreement_matrix};
use drqa_core::{AgreementProfile, CoRankingMatrix, Configuration, KRange, RankMovementTally};
use serde::Serialize;

use crate::error::{CliError, Result};

/// A parsed CSV table: the configuration plus its column names.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub config: Configuration,
    pub columns: Vec<String>,
}

/// Header names that mark the first column as row labels.
const ID_HEADERS: [&str; 3] = ["id", "label", ""];

/// Reads a numeric CSV file. Empty cells and cells equal to `missing_token`
/// are missing. With a header whose first name is `id` (or `label`, or
/// empty), the first column holds row labels.
pub fn ingest_csv(path: &Path, has_header: bool, missing_token: &str) -> Result<Configuration> {
    read_table(path, has_header, missing_token).map(|t| t.config)
}

pub fn read_table(path: &Path, has_header: bool, missing_token: &str) -> Result<Table> {
    let bytes = fs::read(path).map_err(|e| CliError::io(path, e))?;
    parse_table(&bytes, has_header, missing_token).map_err(|m| CliError::csv(path, m))
}

pub(crate) fn parse_table(bytes: &[u8], has_header: bool, missing_token: &str) -> std::result::Result<Table, String> {
    let mut reader = csv::ReaderBuilder::new().has_headers(false).flexible(true).from_reader(bytes);
    let mut records = reader.records();
    let mut header: Option<Vec<String>> = None;
    if has_header {
        match records.next() {
            Some(r) => header = Some(r.map_err(|e| e.to_string())?.iter().map(|f| f.trim().to_string()).collect()),
            None => return Err("empty file".into()),
        }
    }
    let has_ids = header.as_ref().is_some_and(|h| h.len() > 1 && ID_HEADERS.contains(&h[0].to_ascii_lowercase().as_str()));
    let mut width: Option<(usize, u64)> = header.as_ref().map(|h| (h.len(), 1));
    let mut values = Vec::new();
    let mut mask = Vec::new();
    let mut labels = Vec::new();
    let mut rows = 0;
    for record in records {
        let record = record.map_err(|e| e.to_string())?;
        let line = record.position().map_or(0, |p| p.line());
        if record.len() == 1 && record[0].trim().is_empty() {
            continue;
        }
        match width {
            None => width = Some((record.len(), line)),
            Some((w, first)) if w != record.len() => {
                return Err(format!("row {} has {} fields, line {first} has {w}", line, record.len()));
            }
            _ => {}
        }
        let mut fields = record.iter();
        if has_ids {
            labels.push(fields.next().unwrap_or("").trim().to_string());
        }
        let offset = usize::from(has_ids);
        for (c, field) in fields.enumerate() {
            let f = field.trim();
            if f.is_empty() || f == missing_token {
                values.push(f64::NAN);
                mask.push(false);
                continue;
            }
            match f.parse::<f64>() {
                Ok(v) if v.is_finite() => {
                    values.push(v);
                    mask.push(true);
                }
                _ => return Err(format!("non-numeric cell `{f}` at row {line}, column {}", c + offset + 1)),
            }
        }
        rows += 1;
    }
    let m = width.map_or(0, |w| w.0) - usize::from(has_ids);
    if rows == 0 || m == 0 {
        return Err("no data rows".into());
    }
    let columns = match header {
        Some(h) => h.into_iter().skip(usize::from(has_ids)).collect(),
        None => numbered_columns("x", m),
    };
    let config = Configuration::with_missing(rows, m, values, mask).map_err(|e| e.to_string())?;
    let config = if has_ids { config.with_labels(labels).map_err(|e| e.to_string())? } else { config };
    Ok(Table { config, columns })
}

/// What [`impute_column_mean`] changed.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct Imputation {
    pub method: &'static str,
    pub cells: usize,
    /// Zero-based indices of the columns that had missing cells.
    pub columns: Vec<usize>,
}

/// Replaces missing cells by the mean of the observed cells in their column.
pub fn impute_column_mean(config: &Configuration, names: Option<&[String]>) -> Result<(Configuration, Imputation)> {
    let (n, m) = (config.n(), config.dim());
    let mut record = Imputation { method: "column_mean", ..Default::default() };
    if config.is_complete() {
        return Ok((config.clone(), record));
    }
    let mut values = config.values().to_vec();
    for l in 0..m {
        let observed: Vec<f64> = (0..n).filter(|&i| config.is_observed(i, l)).map(|i| config.get(i, l)).collect();
        if observed.len() == n {
            continue;
        }
        if observed.is_empty() {
            let column = names.and_then(|c| c.get(l).cloned()).unwrap_or_else(|| (l + 1).to_string());
            return Err(CliError::EmptyColumn { column });
        }
        let mean = observed.iter().sum::<f64>() / observed.len() as f64;
        for i in (0..n).filter(|&i| !config.is_observed(i, l)) {
            values[i * m + l] = mean;
            record.cells += 1;
        }
        record.columns.push(l);
    }
    let mut out = Configuration::from_flat(n, m, values)?;
    if let Some(labels) = config.labels() {
        out = out.with_labels(labels.to_vec())?;
    }
    Ok((out, record))
}

fn finish(w: csv::Writer<Vec<u8>>) -> Vec<u8> {
    w.into_inner().expect("writing to memory cannot fail")
}

fn cell(v: f64) -> String {
    if v.is_nan() {
        String::new()
    } else {
        v.to_string()
    }
}

/// `prefix1, ..., prefixm`.
pub fn numbered_columns(prefix: &str, m: usize) -> Vec<String> {
    (1..=m).map(|l| format!("{prefix}{l}")).collect()
}

/// `id,<columns>`, one row per item.
pub fn configuration_csv(config: &Configuration, columns: &[String]) -> Vec<u8> {
    assert_eq!(columns.len(), config.dim(), "one name per column");
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["id".to_string()];
    header.extend(columns.iter().cloned());
    w.write_record(&header).expect("in-memory write");
    for i in 0..config.n() {
        let mut row = vec![config.label(i)];
        row.extend(config.row(i).iter().map(|&v| cell(v)));
        w.write_record(&row).expect("in-memory write");
    }
    finish(w)
}

/// One row per `k`. `partial` adds the partial agreement of the adjusted
/// rates given a third configuration.
pub fn profile_csv(profile: &AgreementProfile, partial: Option<&[f64]>) -> Vec<u8> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["k", "ar", "ar_adjusted", "expected", "shared"];
    if partial.is_some() {
        header.push("partial_adjusted");
    }
    w.write_record(&header).expect("in-memory write");
    let n = profile.n();
    for k in 1..n {
        let mut row = vec![
            k.to_string(),
            cell(profile.ar_at(k)),
            cell(profile.ar_adjusted_at(k)),
            cell(expected_agreement(k, n)),
            profile.shared_counts()[k - 1].to_string(),
        ];
        if let Some(p) = partial {
            row.push(cell(p[k - 1]));
        }
        w.write_record(&row).expect("in-memory write");
    }
    finish(w)
}

/// Several profiles against one reference, stacked: one row per
/// `(embedding, k)`.
pub fn profiles_csv(profiles: &[(&str, &AgreementProfile, Option<&[f64]>)]) -> Vec<u8> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let with_partial = profiles.iter().any(|p| p.2.is_some());
    let mut header = vec!["embedding", "k", "ar", "ar_adjusted", "expected", "shared"];
    if with_partial {
        header.push("partial_adjusted");
    }
    w.write_record(&header).expect("in-memory write");
    for (name, profile, partial) in profiles {
        let n = profile.n();
        for k in 1..n {
            let mut row = vec![
                name.to_string(),
                k.to_string(),
                cell(profile.ar_at(k)),
                cell(profile.ar_adjusted_at(k)),
                cell(expected_agreement(k, n)),
                profile.shared_counts()[k - 1].to_string(),
            ];
            if with_partial {
                row.push(partial.map_or(String::new(), |p| cell(p[k - 1])));
            }
            w.write_record(&row).expect("in-memory write");
        }
    }
    finish(w)
}

/// Per-item agreement `a_ik / k`: `id,k1,...,k(n-1)`.
pub fn item_csv(profile: &AgreementProfile, labels: &Configuration) -> Result<Vec<u8>> {
    let n = profile.n();
    let ks = KRange::All.resolve(n)?;
    let matrix = item_agreement_matrix(profile, &ks, false)?;
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["id".to_string()];
    header.extend(ks.iter().map(|k| format!("k{k}")));
    w.write_record(&header).expect("in-memory write");
    for (i, row) in matrix.chunks(ks.len()).enumerate() {
        let mut rec = vec![labels.label(i)];
        rec.extend(row.iter().map(|&v| cell(v)));
        w.write_record(&rec).expect("in-memory write");
    }
    Ok(finish(w))
}

/// Rows are ranks in the first configuration, columns ranks in the second.
pub fn co_ranking_csv(omega: &CoRankingMatrix) -> Vec<u8> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let n = omega.n();
    let mut header = vec!["rank".to_string()];
    header.extend((1..n).map(|s| format!("r{s}")));
    w.write_record(&header).expect("in-memory write");
    for r in 1..n {
        let mut rec = vec![r.to_string()];
        rec.extend(omega.row(r).iter().map(u32::to_string));
        w.write_record(&rec).expect("in-memory write");
    }
    finish(w)
}

pub fn movements_csv(tallies: &[RankMovementTally]) -> Vec<u8> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for t in tallies {
        w.serialize(t).expect("in-memory write");
    }
    finish(w)
}

pub(crate) fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    }
    fs::write(path, bytes).map_err(|e| CliError::io(path, e))
}
