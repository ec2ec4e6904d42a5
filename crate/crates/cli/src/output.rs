//! CSV emission. Every file starts with the run manifest as `#` comments;
//! everything after it depends only on the manifest.

use anyhow::{Context, Result};
use std::io::Write;
use std::path::Path;

pub struct Manifest {
    pub subcommand: &'static str,
    pub seed: Option<u64>,
    /// Resolved `key=value` pairs in a fixed order.
    pub config: Vec<(String, String)>,
    pub output: String,
}

impl Manifest {
    pub fn new(subcommand: &'static str, seed: Option<u64>, out: Option<&Path>) -> Self {
        let output = out.map_or_else(|| "stdout".to_string(), |p| p.display().to_string());
        Self { subcommand, seed, config: Vec::new(), output }
    }

    pub fn set(&mut self, key: &str, value: impl ToString) -> &mut Self {
        self.config.push((key.to_string(), value.to_string()));
        self
    }

    fn header(&self) -> String {
        let config: Vec<String> = self.config.iter().map(|(k, v)| format!("{k}={v}")).collect();
        let seed = self.seed.map_or_else(|| "none".to_string(), |s| s.to_string());
        format!(
            "# tool: vbreceiver {}\n# subcommand: {}\n# seed: {seed}\n# config: {}\n# output: {}\n",
            env!("CARGO_PKG_VERSION"),
            self.subcommand,
            config.join(" "),
            self.output,
        )
    }
}

/// Manifest, header row, then records.
pub fn render(manifest: &Manifest, header: &[&str], rows: &[Vec<String>]) -> Result<Vec<u8>> {
    let mut buf = manifest.header().into_bytes();
    {
        let mut w = csv::Writer::from_writer(&mut buf);
        w.write_record(header)?;
        for r in rows {
            w.write_record(r)?;
        }
        w.flush()?;
    }
    Ok(buf)
}

pub fn emit(bytes: &[u8], path: Option<&Path>) -> Result<()> {
    match path {
        Some(p) => std::fs::write(p, bytes).with_context(|| format!("writing {}", p.display())),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(bytes)?;
            out.flush()?;
            Ok(())
        }
    }
}

pub fn num(v: f64) -> String {
    v.to_string()
}

pub fn opt(v: Option<f64>) -> String {
    v.map_or_else(|| "NA".to_string(), num)
}
