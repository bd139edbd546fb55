use std::io::Write;
use std::path::PathBuf;

use anyhow::{Context, Result};
use clap::ValueEnum;
use serde_json::{json, Value};

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Table,
}

impl Format {
    fn name(self) -> &'static str {
        match self {
            Format::Json => "json",
            Format::Csv => "csv",
            Format::Table => "table",
        }
    }
}

/// Everything that can change an output; echoed into every artifact.
#[derive(Clone, Debug)]
pub struct RunConfig {
    pub precision: u32,
    pub trunc: Option<usize>,
    pub format: Format,
    pub seed: u64,
    pub parallel: Option<usize>,
    pub out: Option<PathBuf>,
}

impl RunConfig {
    pub fn header(&self) -> Value {
        json!({
            "precision_bits": self.precision,
            "truncation": self.trunc.map_or(Value::from("auto"), Value::from),
            "format": self.format.name(),
            "seed": self.seed,
            "parallel": self.parallel.map_or(Value::from("auto"), Value::from),
        })
    }

    fn header_line(&self) -> String {
        format!(
            "precision_bits={} truncation={} format={} seed={} parallel={}",
            self.precision,
            self.trunc.map_or("auto".into(), |n| n.to_string()),
            self.format.name(),
            self.seed,
            self.parallel.map_or("auto".into(), |n| n.to_string()),
        )
    }

    /// Significant decimal digits worth printing at this precision.
    pub fn digits(&self) -> usize {
        ((self.precision as usize * 3) / 10).saturating_sub(2).clamp(6, 60)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Status {
    Ok,
    Inconclusive,
}

impl Status {
    pub fn name(self) -> &'static str {
        match self {
            Status::Ok => "ok",
            Status::Inconclusive => "inconclusive",
        }
    }

    pub fn exit_code(self) -> i32 {
        match self {
            Status::Ok => 0,
            Status::Inconclusive => 2,
        }
    }
}

#[derive(Clone, Debug, Default)]
pub struct Table {
    pub headers: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new<S: Into<String>>(headers: impl IntoIterator<Item = S>) -> Self {
        Table {
            headers: headers.into_iter().map(Into::into).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push<S: ToString>(&mut self, row: impl IntoIterator<Item = S>) {
        self.rows.push(row.into_iter().map(|c| c.to_string()).collect());
    }

    /// Two-column view of the scalar fields of a JSON object.
    pub fn key_values(v: &Value) -> Self {
        let mut t = Table::new(["key", "value"]);
        flatten("", v, &mut t);
        t
    }
}

fn flatten(prefix: &str, v: &Value, t: &mut Table) {
    match v {
        Value::Object(map) => {
            for (k, x) in map {
                let key = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
                flatten(&key, x, t);
            }
        }
        Value::Array(items) if items.iter().all(|x| !x.is_object() && !x.is_array()) => {
            let joined: Vec<String> = items.iter().map(scalar).collect();
            t.push([prefix.to_string(), joined.join(" ")]);
        }
        Value::Array(items) => {
            for (i, x) in items.iter().enumerate() {
                flatten(&format!("{prefix}[{i}]"), x, t);
            }
        }
        other => t.push([prefix.to_string(), scalar(other)]),
    }
}

fn scalar(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        Value::Null => "-".into(),
        other => other.to_string(),
    }
}

pub struct Report {
    pub command: &'static str,
    pub status: Status,
    pub result: Value,
    /// Tabular view for csv/table output; defaults to key/value rows.
    pub table: Option<Table>,
}

impl Report {
    pub fn ok(command: &'static str, result: Value) -> Self {
        Report {
            command,
            status: Status::Ok,
            result,
            table: None,
        }
    }

    pub fn with_table(mut self, t: Table) -> Self {
        self.table = Some(t);
        self
    }

    pub fn with_status(mut self, s: Status) -> Self {
        self.status = s;
        self
    }

    pub fn render(&self, cfg: &RunConfig) -> Result<String> {
        Ok(match cfg.format {
            Format::Json => {
                let doc = json!({
                    "tool": "bseries",
                    "version": env!("CARGO_PKG_VERSION"),
                    "library_version": bounded_series::VERSION,
                    "command": self.command,
                    "config": cfg.header(),
                    "status": self.status.name(),
                    "result": self.result,
                });
                let mut s = serde_json::to_string_pretty(&doc)?;
                s.push('\n');
                s
            }
            Format::Csv | Format::Table => {
                let table = self.table.clone().unwrap_or_else(|| Table::key_values(&self.result));
                let mut s = format!(
                    "# bseries {} command={} status={}\n# config {}\n",
                    env!("CARGO_PKG_VERSION"),
                    self.command,
                    self.status.name(),
                    cfg.header_line()
                );
                if cfg.format == Format::Csv {
                    s.push_str(&to_csv(&table)?);
                } else {
                    s.push_str(&to_aligned(&table));
                }
                s
            }
        })
    }

    pub fn emit(&self, cfg: &RunConfig) -> Result<()> {
        let text = self.render(cfg)?;
        match &cfg.out {
            Some(path) => std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))?,
            None => std::io::stdout().lock().write_all(text.as_bytes())?,
        }
        Ok(())
    }
}

fn to_csv(t: &Table) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(&t.headers)?;
    for r in &t.rows {
        w.write_record(r)?;
    }
    Ok(String::from_utf8(w.into_inner()?)?)
}

fn to_aligned(t: &Table) -> String {
    let mut widths: Vec<usize> = t.headers.iter().map(|h| h.chars().count()).collect();
    for r in &t.rows {
        for (i, c) in r.iter().enumerate() {
            if i < widths.len() {
                widths[i] = widths[i].max(c.chars().count());
            }
        }
    }
    let line = |cells: &[String]| -> String {
        let parts: Vec<String> = cells
            .iter()
            .enumerate()
            .map(|(i, c)| format!("{c:<w$}", w = widths.get(i).copied().unwrap_or(0)))
            .collect();
        parts.join("  ").trim_end().to_string() + "\n"
    };
    let mut s = line(&t.headers);
    let rule: Vec<String> = widths.iter().map(|w| "-".repeat(*w)).collect();
    s.push_str(&line(&rule));
    for r in &t.rows {
        s.push_str(&line(r));
    }
    s
}
