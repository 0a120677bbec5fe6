//! Output documents: JSON `{config, version, data}` and CSV with `#` metadata.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};

/// Fully resolved run configuration, embedded in every output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub command: String,
    pub q: Vec<u64>,
    /// As given on the command line: a residue or `auto`.
    pub delta_requested: String,
    /// Resolved non-square per entry of `q`.
    pub delta: Vec<u64>,
    /// As given: a radius or `all-regular`.
    pub r_s_requested: String,
    pub r_s: Vec<u64>,
    pub t_grid: Vec<f64>,
    pub format: String,
    pub mode: Option<String>,
    pub include_lift: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Document<T> {
    pub config: RunConfig,
    pub version: String,
    pub data: T,
}

pub fn to_json<T: Serialize>(doc: &Document<T>) -> Result<String> {
    let mut s = serde_json::to_string_pretty(doc)?;
    s.push('\n');
    Ok(s)
}

pub fn parse_json(text: &str) -> Result<Document<serde_json::Value>> {
    serde_json::from_str(text).context("malformed JSON document")
}

/// CSV float format: 17 significant digits.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// A CSV table preceded by `# key=value` metadata lines.
#[derive(Debug, Clone, PartialEq)]
pub struct CsvTable {
    pub meta: BTreeMap<String, String>,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl CsvTable {
    pub fn new<S: Into<String>>(header: impl IntoIterator<Item = S>) -> Self {
        CsvTable {
            meta: BTreeMap::new(),
            header: header.into_iter().map(Into::into).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    /// Embed the configuration as metadata, one top-level key per line.
    pub fn with_config(mut self, config: &RunConfig, version: &str) -> Result<Self> {
        let value = serde_json::to_value(config)?;
        if let serde_json::Value::Object(map) = value {
            for (k, v) in map {
                self.meta.insert(format!("config.{k}"), v.to_string());
            }
        }
        self.meta.insert("version".into(), version.into());
        Ok(self)
    }

    pub fn to_csv_string(&self) -> Result<String> {
        let mut out = String::new();
        for (k, v) in &self.meta {
            writeln!(out, "# {k}={v}")?;
        }
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.header)?;
        for row in &self.rows {
            w.write_record(row)?;
        }
        out.push_str(std::str::from_utf8(&w.into_inner()?)?);
        Ok(out)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut meta = BTreeMap::new();
        for line in text.lines().take_while(|l| l.starts_with('#')) {
            let body = line.trim_start_matches('#').trim_start();
            let (k, v) = body
                .split_once('=')
                .with_context(|| format!("bad metadata line `{line}`"))?;
            meta.insert(k.to_string(), v.to_string());
        }
        let mut r = csv::ReaderBuilder::new()
            .comment(Some(b'#'))
            .from_reader(text.as_bytes());
        let header = r.headers()?.iter().map(String::from).collect();
        let mut rows = Vec::new();
        for rec in r.records() {
            rows.push(rec?.iter().map(String::from).collect());
        }
        Ok(CsvTable { meta, header, rows })
    }

    pub fn column(&self, name: &str) -> Result<Vec<&str>> {
        let Some(k) = self.header.iter().position(|h| h == name) else {
            bail!("no column `{name}`");
        };
        Ok(self.rows.iter().map(|r| r[k].as_str()).collect())
    }

    pub fn f64_column(&self, name: &str) -> Result<Vec<f64>> {
        self.column(name)?
            .into_iter()
            .map(|s| {
                s.parse::<f64>()
                    .with_context(|| format!("`{s}` is not a number"))
            })
            .collect()
    }

    pub fn config(&self) -> Result<RunConfig> {
        let mut map = serde_json::Map::new();
        for (k, v) in &self.meta {
            if let Some(key) = k.strip_prefix("config.") {
                map.insert(key.to_string(), serde_json::from_str(v)?);
            }
        }
        Ok(serde_json::from_value(serde_json::Value::Object(map))?)
    }
}
