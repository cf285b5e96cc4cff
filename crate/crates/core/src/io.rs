//! File formats: score CSVs, model JSON, and the tabulated reference data.
//!
//! CSV files may open with `# key: value` metadata lines; the header follows
//! them and no further comments are allowed. Numbers are written in Rust's
//! shortest round-trip form, so `parse(print(x)) == x` for every finite value.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::data::{ScoreDataset, ScoreRecord};
use crate::dist::{LogisticComponent, MixtureModel, Origin};
use crate::error::{Error, Result};
use crate::experiments::{ThresholdRow, ThresholdTable};

/// Leading `# key: value` lines of a CSV file, in file order.
pub type Metadata = Vec<(String, String)>;

pub const SCORE_COLUMNS: [&str; 5] = ["score", "origin", "feature_count", "pair_id", "source_id"];

fn parse_err(line: u64, message: impl Into<String>) -> Error {
    Error::Parse { line, message: message.into() }
}

/// Splits leading metadata from the CSV body; returns the number of lines
/// consumed so body line numbers can be mapped back to the file.
fn split_metadata(text: &str) -> Result<(Metadata, &str, u64)> {
    let mut meta = Vec::new();
    let mut rest = text;
    let mut consumed = 0u64;
    while let Some(line) = rest.strip_prefix('#') {
        let (head, tail) = line.split_once('\n').unwrap_or((line, ""));
        consumed += 1;
        let head = head.trim_end_matches('\r').trim();
        if !head.is_empty() {
            let (k, v) = head
                .split_once(':')
                .ok_or_else(|| parse_err(consumed, "metadata lines must read `# key: value`"))?;
            meta.push((k.trim().to_string(), v.trim().to_string()));
        }
        rest = tail;
    }
    Ok((meta, rest, consumed))
}

fn write_metadata(out: &mut String, meta: &[(String, String)]) {
    for (k, v) in meta {
        out.push_str(&format!("# {k}: {v}\n"));
    }
}

struct CsvBody<'a> {
    headers: Vec<String>,
    reader: csv::Reader<&'a [u8]>,
    offset: u64,
}

impl<'a> CsvBody<'a> {
    fn rows(&mut self) -> impl Iterator<Item = Result<(u64, csv::StringRecord)>> + use<'_, 'a> {
        let offset = self.offset;
        self.reader.records().map(move |r| match r {
            Ok(rec) => {
                let line = rec.position().map_or(0, |p| p.line()) + offset;
                Ok((line, rec))
            }
            Err(e) => {
                let line = e.position().map_or(0, |p| p.line()) + offset;
                Err(parse_err(line, e.to_string()))
            }
        })
    }
}

fn open_csv(text: &str) -> Result<(Metadata, CsvBody<'_>)> {
    let (meta, body, offset) = split_metadata(text)?;
    let mut reader = csv::ReaderBuilder::new().has_headers(true).from_reader(body.as_bytes());
    let headers: Vec<String> = reader
        .headers()
        .map_err(|e| parse_err(offset + 1, e.to_string()))?
        .iter()
        .map(|h| h.trim().to_string())
        .collect();
    if headers.iter().all(|h| h.is_empty()) {
        return Err(parse_err(offset + 1, "missing header line"));
    }
    Ok((meta, CsvBody { headers, reader, offset }))
}

fn field<T: std::str::FromStr>(rec: &csv::StringRecord, i: usize, name: &str, line: u64) -> Result<T>
where
    T::Err: std::fmt::Display,
{
    let raw = rec.get(i).ok_or_else(|| parse_err(line, format!("missing column {name}")))?.trim();
    raw.parse().map_err(|e| parse_err(line, format!("column {name}: cannot parse {raw:?}: {e}")))
}

/// Parses a score CSV from text.
pub fn parse_scores(text: &str) -> Result<(Metadata, ScoreDataset)> {
    let (meta, mut body) = open_csv(text)?;
    let with_source = match body.headers.as_slice() {
        h if h == &SCORE_COLUMNS[..4] => false,
        h if h == &SCORE_COLUMNS[..] => true,
        h => {
            return Err(parse_err(
                body.offset + 1,
                format!("expected header `{}[,source_id]`, got `{}`", SCORE_COLUMNS[..4].join(","), h.join(",")),
            ))
        }
    };
    let width = if with_source { 5 } else { 4 };
    let mut records = Vec::new();
    for row in body.rows() {
        let (line, rec) = row?;
        if rec.len() != width {
            return Err(parse_err(line, format!("expected {width} fields, found {}", rec.len())));
        }
        let r = ScoreRecord {
            score: field(&rec, 0, "score", line)?,
            origin: field::<Origin>(&rec, 1, "origin", line)?,
            feature_count: field(&rec, 2, "feature_count", line)?,
            pair_id: rec[3].trim().to_string(),
            source_id: with_source.then(|| rec[4].trim().to_string()).filter(|s| !s.is_empty()),
        };
        r.validate().map_err(|e| parse_err(line, e.to_string()))?;
        records.push(r);
    }
    Ok((meta, ScoreDataset::new(records)?))
}

pub fn load_scores(path: impl AsRef<Path>) -> Result<(Metadata, ScoreDataset)> {
    parse_scores(&fs::read_to_string(path)?)
}

/// Renders a score CSV; the `source_id` column is written only when some
/// record has one.
pub fn format_scores(meta: &[(String, String)], data: &ScoreDataset) -> Result<String> {
    let with_source = data.records().iter().any(|r| r.source_id.is_some());
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
    let cols = if with_source { &SCORE_COLUMNS[..] } else { &SCORE_COLUMNS[..4] };
    w.write_record(cols)?;
    for r in data.records() {
        let mut row = vec![r.score.to_string(), r.origin.to_string(), r.feature_count.to_string(), r.pair_id.clone()];
        if with_source {
            row.push(r.source_id.clone().unwrap_or_default());
        }
        w.write_record(&row)?;
    }
    let body = String::from_utf8(w.into_inner().map_err(|e| Error::Io(e.into_error()))?)
        .expect("csv output is UTF-8");
    let mut out = String::new();
    write_metadata(&mut out, meta);
    out.push_str(&body);
    Ok(out)
}

pub fn save_scores(path: impl AsRef<Path>, meta: &[(String, String)], data: &ScoreDataset) -> Result<()> {
    fs::write(path, format_scores(meta, data)?)?;
    Ok(())
}

pub const MODEL_FORMAT_VERSION: u32 = 1;

/// On-disk form of a mixture model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelFile {
    pub version: u32,
    pub origin: Option<Origin>,
    pub feature_count: Option<u8>,
    pub components: Vec<LogisticComponent>,
    #[serde(default)]
    pub provenance: String,
}

impl ModelFile {
    pub fn from_model(model: &MixtureModel, provenance: impl Into<String>) -> Self {
        Self {
            version: MODEL_FORMAT_VERSION,
            origin: model.origin(),
            feature_count: model.feature_count(),
            components: model.components().to_vec(),
            provenance: provenance.into(),
        }
    }

    pub fn to_model(&self) -> Result<MixtureModel> {
        if self.version != MODEL_FORMAT_VERSION {
            return Err(Error::model(format!("unsupported model format version {}", self.version)));
        }
        let mut m = MixtureModel::new(self.components.clone())?;
        if let Some(o) = self.origin {
            m = m.with_origin(o);
        }
        if let Some(fc) = self.feature_count {
            m = m.with_feature_count(fc)?;
        }
        Ok(m)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)? + "\n")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let f: ModelFile = serde_json::from_str(text)?;
        f.to_model()?;
        Ok(f)
    }
}

pub fn save_model(path: impl AsRef<Path>, model: &MixtureModel, provenance: &str) -> Result<()> {
    fs::write(path, ModelFile::from_model(model, provenance).to_json()?)?;
    Ok(())
}

pub fn load_model_file(path: impl AsRef<Path>) -> Result<ModelFile> {
    ModelFile::from_json(&fs::read_to_string(path)?)
}

pub fn load_model(path: impl AsRef<Path>) -> Result<MixtureModel> {
    load_model_file(path)?.to_model()
}

/// One row of the tail-frequency comparison table, as printed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TailFixtureRow {
    pub cutpoint: f64,
    pub model_per_100k: f64,
    pub observed_count: u64,
    pub observed_total: u64,
    pub observed_per_100k: f64,
}

pub const TAIL_FIXTURE_COLUMNS: [&str; 5] =
    ["cutpoint", "model_per_100k", "observed_count", "observed_total", "observed_per_100k"];

pub fn parse_tail_fixture(text: &str) -> Result<(Metadata, Vec<TailFixtureRow>)> {
    let (meta, mut body) = open_csv(text)?;
    expect_header(&body, &TAIL_FIXTURE_COLUMNS)?;
    let mut rows = Vec::new();
    for row in body.rows() {
        let (line, rec) = row?;
        rows.push(TailFixtureRow {
            cutpoint: field(&rec, 0, "cutpoint", line)?,
            model_per_100k: field(&rec, 1, "model_per_100k", line)?,
            observed_count: field(&rec, 2, "observed_count", line)?,
            observed_total: field(&rec, 3, "observed_total", line)?,
            observed_per_100k: field(&rec, 4, "observed_per_100k", line)?,
        });
    }
    Ok((meta, rows))
}

pub fn load_tail_fixture(path: impl AsRef<Path>) -> Result<Vec<TailFixtureRow>> {
    Ok(parse_tail_fixture(&fs::read_to_string(path)?)?.1)
}

fn expect_header(body: &CsvBody<'_>, cols: &[&str]) -> Result<()> {
    if body.headers != cols {
        return Err(parse_err(
            body.offset + 1,
            format!("expected header `{}`, got `{}`", cols.join(","), body.headers.join(",")),
        ));
    }
    Ok(())
}

fn meta_value<'a>(meta: &'a Metadata, key: &str) -> Option<&'a str> {
    meta.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
}

/// Parses a threshold table with header `feature_count,pairs,<T1>,<T2>,...`.
/// A `# unit: percent` metadata line scales cells to fractions; the default
/// unit is `fraction`.
pub fn parse_threshold_table(text: &str) -> Result<ThresholdTable> {
    let (meta, mut body) = open_csv(text)?;
    let scale = match meta_value(&meta, "unit").unwrap_or("fraction") {
        "fraction" => 1.0,
        "percent" => 0.01,
        other => return Err(parse_err(1, format!("unknown unit {other:?}"))),
    };
    let header_line = body.offset + 1;
    if body.headers.len() < 3 || body.headers[0] != "feature_count" || body.headers[1] != "pairs" {
        return Err(parse_err(header_line, "expected header `feature_count,pairs,<thresholds...>`"));
    }
    let thresholds: Vec<f64> = body.headers[2..]
        .iter()
        .map(|h| h.parse::<f64>().map_err(|_| parse_err(header_line, format!("bad threshold {h:?}"))))
        .collect::<Result<_>>()?;
    let width = body.headers.len();
    let mut rows: BTreeMap<u8, ThresholdRow> = BTreeMap::new();
    for row in body.rows() {
        let (line, rec) = row?;
        if rec.len() != width {
            return Err(parse_err(line, format!("expected {width} fields, found {}", rec.len())));
        }
        let feature_count: u8 = field(&rec, 0, "feature_count", line)?;
        crate::dist::check_feature_count(feature_count).map_err(|e| parse_err(line, e.to_string()))?;
        let pairs: usize = field(&rec, 1, "pairs", line)?;
        let rates = (2..width)
            .map(|i| {
                let v: f64 = field(&rec, i, "rate", line)?;
                let v = v * scale;
                if !(0.0..=1.0).contains(&v) {
                    return Err(parse_err(line, format!("rate {v} outside [0, 1]")));
                }
                Ok(v)
            })
            .collect::<Result<Vec<_>>>()?;
        if rows.insert(feature_count, ThresholdRow { feature_count, pairs, rates }).is_some() {
            return Err(parse_err(line, format!("duplicate feature count {feature_count}")));
        }
    }
    Ok(ThresholdTable { thresholds, rows: rows.into_values().collect() })
}

pub fn load_threshold_table(path: impl AsRef<Path>) -> Result<ThresholdTable> {
    parse_threshold_table(&fs::read_to_string(path)?)
}

/// Aggregate correct-exclusion rate for one feature count and threshold.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExclusionSummary {
    pub feature_count: u8,
    pub comparisons: u64,
    pub threshold: f64,
    pub correct_exclusion_rate: f64,
}

impl ExclusionSummary {
    /// Comparisons at or above the threshold implied by the printed rate.
    pub fn erroneous_count(&self) -> f64 {
        (1.0 - self.correct_exclusion_rate) * self.comparisons as f64
    }
}

pub fn parse_exclusion_summary(text: &str) -> Result<Vec<ExclusionSummary>> {
    let (_, mut body) = open_csv(text)?;
    expect_header(&body, &["feature_count", "comparisons", "threshold", "correct_exclusion_rate"])?;
    let mut out = Vec::new();
    for row in body.rows() {
        let (line, rec) = row?;
        out.push(ExclusionSummary {
            feature_count: field(&rec, 0, "feature_count", line)?,
            comparisons: field(&rec, 1, "comparisons", line)?,
            threshold: field(&rec, 2, "threshold", line)?,
            correct_exclusion_rate: field(&rec, 3, "correct_exclusion_rate", line)?,
        });
    }
    Ok(out)
}

pub fn load_exclusion_summary(path: impl AsRef<Path>) -> Result<Vec<ExclusionSummary>> {
    parse_exclusion_summary(&fs::read_to_string(path)?)
}
