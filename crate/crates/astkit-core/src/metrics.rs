//! Per-tree statistics (size, depth, branching factor, unique types,
//! unique tokens) and their corpus-level aggregation.

use std::collections::BTreeSet;

use serde::Serialize;
use thiserror::Error;

use crate::ast::{AstTree, NodeKind};
use crate::tokenize::subtokens;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TreeStats {
    /// Total node count, value leaves included.
    pub size: usize,
    /// Node count on the longest root-to-node path; a single node has depth 1.
    pub depth: usize,
    /// Mean child count over non-leaf nodes; 0 for a leaf-only tree.
    pub branching_factor: f64,
    /// Distinct labels over non-leaf nodes.
    pub unique_types: usize,
    /// Distinct sub-tokens over value-node labels.
    pub unique_tokens: usize,
}

#[derive(Debug, Clone, Copy, Default)]
pub struct StatsConfig {
    /// When set, value children of terminals are not counted as children,
    /// so terminals drop out of the branching-factor denominator.
    pub exclude_value_children: bool,
}

pub fn tree_stats(tree: &AstTree, config: &StatsConfig) -> TreeStats {
    tree_stats_with(tree, config, subtokens)
}

/// Like [`tree_stats`] but with a caller-supplied sub-tokenizer for the
/// unique-tokens metric.
pub fn tree_stats_with<F>(tree: &AstTree, config: &StatsConfig, subtok: F) -> TreeStats
where
    F: Fn(&str) -> Vec<String>,
{
    let size = tree.len();
    let depth = tree.depths().into_iter().max().unwrap_or(0) as usize;

    let mut child_sum = 0usize;
    let mut nonleaf_count = 0usize;
    let mut types = BTreeSet::new();
    let mut tokens = BTreeSet::new();
    for node in tree.nodes() {
        let child_count = if config.exclude_value_children {
            node.children
                .iter()
                .filter(|&&c| tree.kind(c) != NodeKind::Value)
                .count()
        } else {
            node.children.len()
        };
        if child_count > 0 {
            child_sum += child_count;
            nonleaf_count += 1;
        }
        // Unique types count every non-leaf node label; terminals carry
        // their value leaves, so they are non-leaf under the default config.
        if !node.children.is_empty() {
            types.insert(node.label.as_str());
        }
        if node.kind == NodeKind::Value {
            tokens.extend(subtok(&node.label));
        }
    }
    let branching_factor = if nonleaf_count == 0 {
        0.0
    } else {
        child_sum as f64 / nonleaf_count as f64
    };
    TreeStats {
        size,
        depth,
        branching_factor,
        unique_types: types.len(),
        unique_tokens: tokens.len(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MetricSummary {
    pub mean: f64,
    pub median: f64,
}

/// Mean and median of every tree metric over a corpus.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CorpusStats {
    pub trees: usize,
    pub size: MetricSummary,
    pub depth: MetricSummary,
    pub branching_factor: MetricSummary,
    pub unique_types: MetricSummary,
    pub unique_tokens: MetricSummary,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum MetricsError {
    #[error("cannot aggregate an empty list of tree stats")]
    EmptyCorpus,
}

fn summarize(values: &mut Vec<f64>) -> MetricSummary {
    let mean = values.iter().sum::<f64>() / values.len() as f64;
    values.sort_by(|a, b| a.partial_cmp(b).expect("metric values are finite"));
    let n = values.len();
    let median = if n % 2 == 1 {
        values[n / 2]
    } else {
        (values[n / 2 - 1] + values[n / 2]) / 2.0
    };
    MetricSummary { mean, median }
}

pub fn aggregate_stats(stats: &[TreeStats]) -> Result<CorpusStats, MetricsError> {
    if stats.is_empty() {
        return Err(MetricsError::EmptyCorpus);
    }
    let column = |f: &dyn Fn(&TreeStats) -> f64| {
        let mut values: Vec<f64> = stats.iter().map(f).collect();
        summarize(&mut values)
    };
    Ok(CorpusStats {
        trees: stats.len(),
        size: column(&|s| s.size as f64),
        depth: column(&|s| s.depth as f64),
        branching_factor: column(&|s| s.branching_factor),
        unique_types: column(&|s| s.unique_types as f64),
        unique_tokens: column(&|s| s.unique_tokens as f64),
    })
}
