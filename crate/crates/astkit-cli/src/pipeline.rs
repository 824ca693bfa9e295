//! Per-record corpus commands: parse, stats, transform, relmat. Records
//! are processed independently (in parallel when enabled), each worker
//! owning its parser instance; output is assembled in id order so runs are
//! byte-identical regardless of worker count.

use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::Serialize;

use astkit_core::ast::AstTree;
use astkit_core::binary::to_binary;
use astkit_core::exec::map_records;
use astkit_core::metrics::{aggregate_stats, tree_stats, StatsConfig, TreeStats};
use astkit_core::paths::{extract_path_contexts, PathConfig};
use astkit_core::relmat::compute_relations;
use astkit_core::sbt::{percent_escape, render_sbt_line, sbt_encode};
use astkit_core::sexpr::to_sexpr;
use astkit_parser::{Frontend, FrontendFactory, Language, ParserConfig, SourceSnippet};

use crate::records::{
    emit_sorted, read_jsonl, sidecar_path, split_duplicates, write_output, CorpusRecord,
};

pub struct CorpusOpts {
    pub input: PathBuf,
    pub output: Option<PathBuf>,
    pub language: Language,
    pub keep_punctuation: bool,
}

impl CorpusOpts {
    fn factory(&self) -> Result<FrontendFactory> {
        let config = ParserConfig {
            language: self.language,
            drop_punctuation: !self.keep_punctuation,
        };
        Ok(FrontendFactory::new(config)?)
    }

    fn load(&self) -> Result<(Vec<CorpusRecord>, Vec<(String, Result<String, String>)>)> {
        let records: Vec<CorpusRecord> = read_jsonl(&self.input)?;
        Ok(split_duplicates(records))
    }
}

fn parse_record(
    frontend: &mut Frontend,
    language: Language,
    record: &CorpusRecord,
) -> Result<astkit_parser::ParseOutcome, String> {
    let snippet = SourceSnippet {
        id: record.id.clone(),
        language,
        code: record.code.clone(),
    };
    frontend.parse_method(&snippet).map_err(|e| e.to_string())
}

/// Runs a per-record job over the corpus and emits sorted output lines.
fn run_corpus_job(
    opts: &CorpusOpts,
    job: impl Fn(&mut Frontend, &CorpusRecord) -> Result<String, String> + Sync + Send,
) -> Result<usize> {
    let factory = opts.factory()?;
    let (records, mut results) = opts.load()?;
    let processed = map_records(
        records,
        || factory.create(),
        |frontend, record| {
            let outcome = job(frontend, &record);
            (record.id, outcome)
        },
    );
    results.extend(processed);
    emit_sorted(opts.output.as_deref(), results)
}

#[derive(Serialize)]
struct ParseLine<'a> {
    id: &'a str,
    tree: String,
    errors: usize,
}

pub fn cmd_parse(opts: &CorpusOpts) -> Result<usize> {
    let language = opts.language;
    run_corpus_job(opts, |frontend, record| {
        let outcome = parse_record(frontend, language, record)?;
        let line = ParseLine {
            id: &record.id,
            tree: to_sexpr(&outcome.tree),
            errors: outcome.error_node_count,
        };
        Ok(serde_json::to_string(&line).expect("serializable"))
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum TransformMethod {
    Raw,
    Bfs,
    Sbt,
    #[value(name = "sbt-notok")]
    SbtNotok,
    Path,
    Binary,
    Split,
}

#[derive(Serialize)]
struct TreeLine<'a> {
    id: &'a str,
    tree: String,
}

#[derive(Serialize)]
struct TokensLine<'a> {
    id: &'a str,
    tokens: String,
}

#[derive(Serialize)]
struct SplitLine<'a> {
    id: &'a str,
    blocks: Vec<String>,
    skipped_blocks: usize,
}

fn bfs_line(tree: &AstTree) -> String {
    tree.bfs_sequence()
        .iter()
        .map(|l| percent_escape(l))
        .collect::<Vec<_>>()
        .join(" ")
}

pub fn cmd_transform(
    opts: &CorpusOpts,
    method: TransformMethod,
    path_config: &PathConfig,
) -> Result<usize> {
    let language = opts.language;
    let path_config = *path_config;
    run_corpus_job(opts, move |frontend, record| {
        let id = record.id.as_str();
        match method {
            TransformMethod::Split => {
                let snippet = SourceSnippet {
                    id: record.id.clone(),
                    language,
                    code: record.code.clone(),
                };
                let split =
                    astkit_parser::split_asts(&snippet, frontend).map_err(|e| e.to_string())?;
                let line = SplitLine {
                    id,
                    blocks: split.blocks.iter().map(to_sexpr).collect(),
                    skipped_blocks: split.skipped_blocks,
                };
                Ok(serde_json::to_string(&line).expect("serializable"))
            }
            _ => {
                let outcome = parse_record(frontend, language, record)?;
                let tree = outcome.tree;
                let line = match method {
                    TransformMethod::Raw => serde_json::to_string(&TreeLine {
                        id,
                        tree: to_sexpr(&tree),
                    })
                    .expect("serializable"),
                    TransformMethod::Binary => serde_json::to_string(&TreeLine {
                        id,
                        tree: to_sexpr(&to_binary(&tree)),
                    })
                    .expect("serializable"),
                    TransformMethod::Bfs => serde_json::to_string(&TokensLine {
                        id,
                        tokens: bfs_line(&tree),
                    })
                    .expect("serializable"),
                    TransformMethod::Sbt => serde_json::to_string(&TokensLine {
                        id,
                        tokens: render_sbt_line(&sbt_encode(&tree), false),
                    })
                    .expect("serializable"),
                    TransformMethod::SbtNotok => serde_json::to_string(&TokensLine {
                        id,
                        tokens: render_sbt_line(&sbt_encode(&tree.mask_leaves()), true),
                    })
                    .expect("serializable"),
                    TransformMethod::Path => {
                        let contexts = extract_path_contexts(&tree, &path_config);
                        let mut chunk = format!("# id={}", percent_escape(id));
                        for c in &contexts {
                            chunk.push('\n');
                            chunk.push_str(&c.render_tsv());
                        }
                        chunk
                    }
                    TransformMethod::Split => unreachable!(),
                };
                Ok(line)
            }
        }
    })
}

pub fn cmd_relmat(opts: &CorpusOpts, max_distance: u32) -> Result<usize> {
    let language = opts.language;
    run_corpus_job(opts, move |frontend, record| {
        let outcome = parse_record(frontend, language, record)?;
        let rel = compute_relations(&outcome.tree, max_distance);
        Ok(format!(
            "# id={}\n{}",
            percent_escape(&record.id),
            rel.render_coo().trim_end()
        ))
    })
}

#[derive(Serialize)]
struct StatsRow<'a> {
    id: &'a str,
    size: usize,
    depth: usize,
    branching: f64,
    unique_types: usize,
    unique_tokens: usize,
}

pub fn cmd_stats(
    opts: &CorpusOpts,
    exclude_value_children: bool,
    summary_path: Option<&Path>,
) -> Result<usize> {
    let factory = opts.factory()?;
    let (records, dups) = opts.load()?;
    let language = opts.language;
    let stats_config = StatsConfig {
        exclude_value_children,
    };
    let mut processed: Vec<(String, Result<TreeStats, String>)> = map_records(
        records,
        || factory.create(),
        move |frontend, record| {
            let outcome = parse_record(frontend, language, &record);
            let stats = outcome.map(|o| tree_stats(&o.tree, &stats_config));
            (record.id, stats)
        },
    );
    processed.extend(dups.into_iter().map(|(id, r)| (id, Err(r.unwrap_err()))));
    processed.sort_by(|a, b| a.0.cmp(&b.0));

    let mut writer = csv::Writer::from_writer(Vec::new());
    let mut errors = String::new();
    let mut ok_stats = Vec::new();
    let mut failed = 0usize;
    for (id, result) in &processed {
        match result {
            Ok(s) => {
                writer
                    .serialize(StatsRow {
                        id,
                        size: s.size,
                        depth: s.depth,
                        branching: s.branching_factor,
                        unique_types: s.unique_types,
                        unique_tokens: s.unique_tokens,
                    })
                    .context("csv row")?;
                ok_stats.push(*s);
            }
            Err(e) => {
                failed += 1;
                #[derive(Serialize)]
                struct ErrorRecord<'a> {
                    id: &'a str,
                    error: &'a str,
                }
                errors.push_str(
                    &serde_json::to_string(&ErrorRecord { id, error: e }).expect("serializable"),
                );
                errors.push('\n');
            }
        }
    }
    let csv_bytes = writer.into_inner().context("csv flush")?;
    write_output(
        opts.output.as_deref(),
        std::str::from_utf8(&csv_bytes).expect("csv is utf-8"),
    )?;
    if failed > 0 {
        if let Some(out) = opts.output.as_deref() {
            std::fs::write(sidecar_path(out), &errors)?;
        } else {
            eprint!("{errors}");
        }
    }
    if !ok_stats.is_empty() {
        let summary = aggregate_stats(&ok_stats).expect("nonempty");
        let json = serde_json::to_string_pretty(&summary).expect("serializable");
        match summary_path {
            Some(p) => write_output(Some(p), &format!("{json}\n"))?,
            None => println!("{json}"),
        }
    }
    eprintln!(
        "processed {} records: {} ok, {} failed",
        processed.len(),
        processed.len() - failed,
        failed
    );
    Ok(failed)
}
