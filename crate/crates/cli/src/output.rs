//! Result records. JSON records carry the schema number, the version, the
//! resolved config, the result and the hypothesis gates. CSV output starts
//! with `#` comment lines holding the same metadata.

use std::io::Write;
use std::path::Path;

use serde::Serialize;
use serde_json::Value;

use crate::config::{Format, RunConfig};
use crate::error::CliError;
use crate::run::{Gate, Outcome};

pub const SCHEMA: u32 = 1;
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Serialize)]
struct Record<'a> {
    schema: u32,
    version: &'static str,
    command: Value,
    config: &'a RunConfig,
    result: &'a Value,
    gates: &'a [Gate],
}

fn internal(e: impl std::fmt::Display) -> CliError {
    CliError::Internal(e.to_string())
}

pub fn render(cfg: &RunConfig, outcome: &Outcome, format: Format) -> Result<Vec<u8>, CliError> {
    let command = serde_json::to_value(cfg.command).map_err(internal)?;
    match format {
        Format::Json => {
            let rec = Record {
                schema: SCHEMA,
                version: VERSION,
                command,
                config: cfg,
                result: &outcome.result,
                gates: &outcome.gates,
            };
            let mut bytes = serde_json::to_vec_pretty(&rec).map_err(internal)?;
            bytes.push(b'\n');
            Ok(bytes)
        }
        Format::Csv => {
            let mut buf = Vec::new();
            let config = serde_json::to_string(cfg).map_err(internal)?;
            let gates = serde_json::to_string(&outcome.gates).map_err(internal)?;
            writeln!(buf, "# schema: {SCHEMA}").map_err(internal)?;
            writeln!(buf, "# version: {VERSION}").map_err(internal)?;
            writeln!(buf, "# command: {command}").map_err(internal)?;
            writeln!(buf, "# config: {config}").map_err(internal)?;
            writeln!(buf, "# gates: {gates}").map_err(internal)?;
            {
                let mut w = csv::Writer::from_writer(&mut buf);
                w.write_record(&outcome.header).map_err(internal)?;
                for row in &outcome.rows {
                    w.write_record(row).map_err(internal)?;
                }
                w.flush().map_err(internal)?;
            }
            Ok(buf)
        }
    }
}

pub fn write(cfg: &RunConfig, outcome: &Outcome, path: Option<&Path>, format: Format) -> Result<(), CliError> {
    let bytes = render(cfg, outcome, format)?;
    match path {
        Some(p) => std::fs::write(p, bytes).map_err(|e| CliError::Internal(format!("cannot write {}: {e}", p.display()))),
        None => std::io::stdout().write_all(&bytes).map_err(internal),
    }
}
