//! Report emission shared by every subcommand. A report is a small table
//! plus the context needed to reproduce it: the subcommand, the tool
//! version, and the full configuration including the seed. CSV keeps that
//! context in `#` comment lines above the header; JSON keeps it as fields.

use std::path::PathBuf;

use anyhow::{Context, Result};
use serde_json::Value;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Clone, Copy, PartialEq, Eq, Debug, clap::ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

/// Where and how a report is written. Every subcommand flattens this in.
#[derive(clap::Args, Debug, Clone)]
pub struct OutputArgs {
    /// Write the report to this file instead of stdout
    #[arg(long)]
    pub out: Option<PathBuf>,

    /// Directory that relative --out paths are resolved against
    #[arg(long, env = "BSA_OUT_DIR")]
    pub out_dir: Option<PathBuf>,

    /// Report format
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
}

/// Joins a relative path onto the configured output directory, if any.
pub fn resolve_out(out_dir: &Option<PathBuf>, path: &PathBuf) -> PathBuf {
    match out_dir {
        Some(dir) if path.is_relative() => dir.join(path),
        _ => path.clone(),
    }
}

impl OutputArgs {
    pub fn write(&self, report: &Report) -> Result<()> {
        let text = report.render(self.format);
        match &self.out {
            Some(out) => {
                let path = resolve_out(&self.out_dir, out);
                if let Some(parent) = path.parent() {
                    if !parent.as_os_str().is_empty() {
                        std::fs::create_dir_all(parent).with_context(|| {
                            format!("creating output directory {}", parent.display())
                        })?;
                    }
                }
                std::fs::write(&path, &text)
                    .with_context(|| format!("writing report to {}", path.display()))?;
                eprintln!("wrote {}", path.display());
            }
            None => print!("{text}"),
        }
        Ok(())
    }
}

pub struct Report {
    command: &'static str,
    config: Value,
    columns: Vec<&'static str>,
    rows: Vec<Vec<Value>>,
}

impl Report {
    pub fn new(command: &'static str, config: Value, columns: &[&'static str]) -> Self {
        Self {
            command,
            config,
            columns: columns.to_vec(),
            rows: Vec::new(),
        }
    }

    pub fn row(&mut self, cells: Vec<Value>) {
        assert_eq!(cells.len(), self.columns.len(), "report row arity");
        self.rows.push(cells);
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Csv => self.render_csv(),
            Format::Json => self.render_json(),
        }
    }

    fn render_csv(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("# command: bsa {}\n", self.command));
        out.push_str(&format!("# version: {VERSION}\n"));
        out.push_str(&format!("# config: {}\n", self.config));
        out.push_str(&self.columns.join(","));
        out.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(csv_cell).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }

    fn render_json(&self) -> String {
        let rows: Vec<Value> = self
            .rows
            .iter()
            .map(|row| {
                let obj: serde_json::Map<String, Value> = self
                    .columns
                    .iter()
                    .zip(row)
                    .map(|(c, v)| (c.to_string(), v.clone()))
                    .collect();
                Value::Object(obj)
            })
            .collect();
        let doc = serde_json::json!({
            "command": format!("bsa {}", self.command),
            "version": VERSION,
            "config": self.config,
            "rows": rows,
        });
        let mut text = serde_json::to_string_pretty(&doc).expect("report serialization");
        text.push('\n');
        text
    }
}

fn csv_cell(v: &Value) -> String {
    let raw = match v {
        Value::Null => String::new(),
        Value::String(s) => s.clone(),
        other => other.to_string(),
    };
    if raw.contains([',', '"', '\n']) {
        format!("\"{}\"", raw.replace('"', "\"\""))
    } else {
        raw
    }
}
