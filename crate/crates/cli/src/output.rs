//! Artifact writers. Every file embeds the resolved configuration (command,
//! seed, parallelism, parameters) so an artifact is self-describing; nothing
//! time- or path-dependent is written, keeping repeated runs byte-identical.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde_json::{json, Value};

use crate::CliError;

/// The configuration a command actually ran with, after file/flag merging.
pub struct ResolvedConfig {
    pub command: &'static str,
    pub seed: u64,
    pub parallelism: usize,
    pub params: BTreeMap<String, Value>,
}

impl ResolvedConfig {
    pub fn to_value(&self) -> Value {
        json!({
            "command": self.command,
            "seed": self.seed,
            "parallelism": self.parallelism,
            "params": self.params,
        })
    }
}

/// Builds the parameter map from `("name", value)` pairs.
#[macro_export]
macro_rules! params {
    ($($key:literal : $val:expr),* $(,)?) => {{
        let mut map = std::collections::BTreeMap::new();
        $(map.insert($key.to_string(), serde_json::json!($val));)*
        map
    }};
}

/// Writes a CSV artifact: one `#`-prefixed line holding the resolved config
/// as compact JSON, the header, then the rows.
pub fn write_csv<I>(
    path: &Path,
    config: &ResolvedConfig,
    header: &str,
    rows: I,
) -> Result<(), CliError>
where
    I: IntoIterator<Item = String>,
{
    let file = File::create(path)
        .map_err(|e| CliError::Config(format!("cannot create {}: {e}", path.display())))?;
    let mut w = BufWriter::new(file);
    writeln!(w, "# {}", serde_json::to_string(&config.to_value()).expect("serializable"))?;
    writeln!(w, "{header}")?;
    for row in rows {
        writeln!(w, "{row}")?;
    }
    w.flush()?;
    println!("wrote {}", path.display());
    Ok(())
}

/// Writes a JSON report: resolved config plus results, and for verification
/// commands the overall verdict and the named failures.
pub fn write_report(
    path: &Path,
    config: &ResolvedConfig,
    results: Value,
    verdict: Option<(bool, &[String])>,
) -> Result<(), CliError> {
    let mut doc = match config.to_value() {
        Value::Object(map) => map,
        _ => unreachable!("config serializes to an object"),
    };
    doc.insert("results".into(), results);
    if let Some((pass, failures)) = verdict {
        doc.insert("pass".into(), json!(pass));
        doc.insert("failures".into(), json!(failures));
    }
    let file = File::create(path)
        .map_err(|e| CliError::Config(format!("cannot create {}: {e}", path.display())))?;
    let mut w = BufWriter::new(file);
    serde_json::to_writer_pretty(&mut w, &Value::Object(doc)).expect("serializable");
    writeln!(w)?;
    w.flush()?;
    println!("wrote {}", path.display());
    Ok(())
}

/// Joins the artifact directory with a file name.
pub fn artifact_path(dir: &Path, name: &str) -> PathBuf {
    dir.join(name)
}
