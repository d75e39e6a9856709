//! Output manifests: every file starts with the config, seed and version.

use std::fs::File;
use std::io::{self, Write};
use std::path::Path;

use anyhow::Context;
use serde::Serialize;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Clone, Debug, Serialize)]
pub struct Manifest {
    pub command: String,
    pub version: &'static str,
    pub master_seed: u64,
    pub threads: usize,
    pub config: serde_json::Value,
}

impl Manifest {
    pub fn new(command: &str, master_seed: u64, config: impl Serialize) -> anyhow::Result<Self> {
        Ok(Self {
            command: command.to_owned(),
            version: VERSION,
            master_seed,
            threads: rayon::current_num_threads(),
            config: serde_json::to_value(config)?,
        })
    }
}

fn sink(out: Option<&Path>) -> anyhow::Result<Box<dyn Write>> {
    Ok(match out {
        Some(p) => {
            if let Some(dir) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
                std::fs::create_dir_all(dir)?;
            }
            Box::new(io::BufWriter::new(
                File::create(p).with_context(|| format!("creating {}", p.display()))?,
            ))
        }
        None => Box::new(io::stdout().lock()),
    })
}

/// CSV with a leading `# manifest: {json}` comment line.
pub fn write_csv<S: Serialize>(
    out: Option<&Path>,
    manifest: &Manifest,
    rows: &[S],
) -> anyhow::Result<()> {
    let mut w = sink(out)?;
    writeln!(w, "# manifest: {}", serde_json::to_string(manifest)?)?;
    let mut csv = csv::Writer::from_writer(w);
    for row in rows {
        csv.serialize(row)?;
    }
    csv.flush()?;
    Ok(())
}

/// `{"manifest": ..., "result": ...}`.
pub fn write_json<S: Serialize>(
    out: Option<&Path>,
    manifest: &Manifest,
    result: &S,
) -> anyhow::Result<()> {
    let mut w = sink(out)?;
    #[derive(Serialize)]
    struct Doc<'a, S> {
        manifest: &'a Manifest,
        result: &'a S,
    }
    serde_json::to_writer_pretty(&mut w, &Doc { manifest, result })?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}

/// Reads back the manifest line of a CSV written by [`write_csv`].
pub fn read_csv_manifest(text: &str) -> Option<serde_json::Value> {
    let line = text.lines().next()?.strip_prefix("# manifest: ")?;
    serde_json::from_str(line).ok()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_carries_manifest() {
        #[derive(Serialize)]
        struct Row {
            a: u32,
            b: f64,
        }
        let path =
            std::env::temp_dir().join(format!("randqls-manifest-{}.csv", std::process::id()));
        let m = Manifest::new("test", 42, serde_json::json!({"x": 1})).unwrap();
        write_csv(Some(&path), &m, &[Row { a: 1, b: 0.5 }]).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        std::fs::remove_file(&path).ok();
        let echo = read_csv_manifest(&text).unwrap();
        assert_eq!(echo["master_seed"], 42);
        assert_eq!(echo["config"]["x"], 1);
        assert_eq!(text.lines().nth(1), Some("a,b"));
        assert_eq!(text.lines().nth(2), Some("1,0.5"));
    }
}
