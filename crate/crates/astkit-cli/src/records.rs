//! Input record schemas (JSONL, one object per line) and line-oriented IO
//! with atomic output writes.

use std::fs;
use std::io::Write;
use std::path::Path;

use anyhow::{Context, Result};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

/// One corpus sample.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CorpusRecord {
    pub id: String,
    pub code: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub summary: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub query: Option<String>,
}

/// A pair of corpus ids (clone-pair style).
#[derive(Debug, Clone, Deserialize)]
pub struct PairRecord {
    pub id: String,
    pub a: String,
    pub b: String,
    #[serde(default)]
    pub label: Option<u8>,
}

#[derive(Debug, Clone, Deserialize)]
pub struct ClassifierRecord {
    pub id: String,
    pub score: f64,
    pub label: u8,
}

#[derive(Debug, Clone, Deserialize)]
pub struct RankRecord {
    pub id: String,
    pub rank: u64,
}

#[derive(Debug, Clone, Deserialize)]
pub struct GenerationRecord {
    pub id: String,
    pub candidate: String,
    pub reference: String,
}

/// Outcome record for run comparison; `value` may be a bool or a number.
#[derive(Debug, Clone, Deserialize)]
pub struct OutcomeRecord {
    pub id: String,
    pub value: serde_json::Value,
}

pub fn read_jsonl<T: DeserializeOwned>(path: &Path) -> Result<Vec<T>> {
    let text = fs::read_to_string(path)
        .with_context(|| format!("cannot read input file {}", path.display()))?;
    let mut out = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let record: T = serde_json::from_str(line)
            .with_context(|| format!("{}:{}: malformed record", path.display(), lineno + 1))?;
        out.push(record);
    }
    Ok(out)
}

/// Writes content to `path` atomically (temp file + rename), or to stdout
/// when no path is given.
pub fn write_output(path: Option<&Path>, content: &str) -> Result<()> {
    match path {
        None => {
            print!("{content}");
            Ok(())
        }
        Some(path) => {
            let dir = path.parent().filter(|p| !p.as_os_str().is_empty());
            let mut tmp = match dir {
                Some(d) => tempfile::NamedTempFile::new_in(d),
                None => tempfile::NamedTempFile::new_in("."),
            }
            .context("cannot create temporary output file")?;
            tmp.write_all(content.as_bytes())?;
            tmp.persist(path)
                .with_context(|| format!("cannot write output file {}", path.display()))?;
            Ok(())
        }
    }
}

#[derive(Debug, Serialize)]
struct ErrorRecord<'a> {
    id: &'a str,
    error: &'a str,
}

/// Outcome collector: per-record lines sorted by id, failures to a
/// sidecar, a one-line summary on stderr. Returns the failure count.
pub fn emit_sorted(
    output: Option<&Path>,
    mut results: Vec<(String, Result<String, String>)>,
) -> Result<usize> {
    results.sort_by(|a, b| a.0.cmp(&b.0));
    let mut body = String::new();
    let mut errors = String::new();
    let mut failed = 0usize;
    for (id, result) in &results {
        match result {
            Ok(chunk) => {
                body.push_str(chunk);
                body.push('\n');
            }
            Err(message) => {
                failed += 1;
                let record = ErrorRecord {
                    id,
                    error: message,
                };
                errors.push_str(&serde_json::to_string(&record).expect("serializable"));
                errors.push('\n');
            }
        }
    }
    write_output(output, &body)?;
    if failed > 0 {
        match output {
            Some(path) => {
                let sidecar = sidecar_path(path);
                fs::write(&sidecar, &errors)
                    .with_context(|| format!("cannot write {}", sidecar.display()))?;
                eprintln!(
                    "processed {} records: {} ok, {} failed (see {})",
                    results.len(),
                    results.len() - failed,
                    failed,
                    sidecar.display()
                );
            }
            None => {
                eprint!("{errors}");
                eprintln!(
                    "processed {} records: {} ok, {} failed",
                    results.len(),
                    results.len() - failed,
                    failed
                );
            }
        }
    } else {
        eprintln!("processed {} records: all ok", results.len());
    }
    Ok(failed)
}

pub fn sidecar_path(output: &Path) -> std::path::PathBuf {
    let mut name = output.as_os_str().to_os_string();
    name.push(".errors.jsonl");
    std::path::PathBuf::from(name)
}

/// Rejects duplicate ids up front: later duplicates become error records.
pub fn split_duplicates(records: Vec<CorpusRecord>) -> (Vec<CorpusRecord>, Vec<(String, Result<String, String>)>) {
    let mut seen = std::collections::BTreeSet::new();
    let mut keep = Vec::with_capacity(records.len());
    let mut dups = Vec::new();
    for r in records {
        if seen.insert(r.id.clone()) {
            keep.push(r);
        } else {
            dups.push((r.id.clone(), Err("duplicate id in corpus".to_string())));
        }
    }
    (keep, dups)
}
