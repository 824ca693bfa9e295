//! Dominator-tree AST splitting: build the statement CFG, partition its
//! dominator tree into blocks, emit each block as split code (declaration
//! header + block statements + balancing braces) and re-parse each piece
//! with the error-tolerant frontend. Split code may contain grammatical
//! errors by construction; catch and finally clause statements never
//! appear in any block.

use thiserror::Error;

use astkit_core::ast::{AstTree, NodeId};
use astkit_core::cfg::{build_cfg, CfgError};
use astkit_core::dominator::{build_dominator_tree, partition_blocks, DomError};

use crate::frontend::{brace_debt, Frontend, ParseError, ParsedMethod, SourceSnippet};

/// Statement kinds whose text is emitted header-only: everything up to and
/// including the opening brace of their body, with nested statements
/// emitted by their own CFG nodes.
const COMPOUND_KINDS: [&str; 9] = [
    "if_statement",
    "while_statement",
    "for_statement",
    "enhanced_for_statement",
    "do_statement",
    "switch_expression",
    "switch_statement",
    "try_statement",
    "try_with_resources_statement",
];

const BODY_KINDS: [&str; 3] = ["block", "switch_block", "constructor_body"];

#[derive(Debug, Error)]
pub enum SplitError {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error(transparent)]
    Cfg(#[from] CfgError),
    #[error(transparent)]
    Dominators(#[from] DomError),
    #[error("snippet {0:?} did not parse to a method declaration")]
    NoMethod(String),
}

/// Ordered per-block split trees.
#[derive(Debug, Clone)]
pub struct SplitAstSet {
    /// One tree per successfully re-parsed block, in block order.
    pub blocks: Vec<AstTree>,
    /// The statement nodes (ids into the original method tree) that formed
    /// each emitted block, entry excluded.
    pub statements: Vec<Vec<NodeId>>,
    /// The split code emitted per block, for diagnostics.
    pub split_code: Vec<String>,
    /// Blocks whose split code the frontend failed to parse entirely.
    pub skipped_blocks: usize,
}

fn span_text<'a>(parsed: &'a ParsedMethod, id: NodeId) -> &'a str {
    let (lo, hi) = parsed.spans[id.index()];
    &parsed.source[lo as usize..hi as usize]
}

/// Declaration header: method start through the opening brace of its body.
fn declaration_header<'a>(parsed: &'a ParsedMethod, tree: &AstTree) -> &'a str {
    let root = tree.root();
    let (root_lo, root_hi) = parsed.spans[root.index()];
    let body = tree
        .children(root)
        .iter()
        .copied()
        .find(|&c| BODY_KINDS.contains(&tree.label(c)));
    match body {
        Some(b) => {
            let (body_lo, _) = parsed.spans[b.index()];
            let end = (body_lo as usize + 1).min(parsed.source.len());
            &parsed.source[root_lo as usize..end]
        }
        None => &parsed.source[root_lo as usize..root_hi as usize],
    }
}

/// Statement text for split code: full text for simple statements, header
/// through the opening brace for compound ones.
fn statement_text<'a>(parsed: &'a ParsedMethod, tree: &AstTree, id: NodeId) -> &'a str {
    let label = tree.label(id);
    let (lo, _) = parsed.spans[id.index()];
    if COMPOUND_KINDS.contains(&label) {
        if let Some(&body) = tree
            .children(id)
            .iter()
            .find(|&&c| BODY_KINDS.contains(&tree.label(c)))
        {
            let (body_lo, _) = parsed.spans[body.index()];
            let end = (body_lo as usize + 1).min(parsed.source.len());
            return parsed.source[lo as usize..end].trim_end();
        }
        // Braceless body: emit up to the first nested statement.
        if let Some(&first) = tree.children(id).iter().find(|&&c| {
            parsed.spans[c.index()].0 > lo && is_branch_statement(tree.label(c))
        }) {
            let (stmt_lo, _) = parsed.spans[first.index()];
            return parsed.source[lo as usize..stmt_lo as usize].trim_end();
        }
    }
    span_text(parsed, id).trim_end()
}

fn is_branch_statement(label: &str) -> bool {
    label.ends_with("_statement")
        || label == "block"
        || label == "local_variable_declaration"
        || label == "switch_expression"
}

/// Splits one method into per-block ASTs.
///
/// A block whose split code the frontend cannot parse at all is skipped
/// and counted, never a crash.
pub fn split_asts(
    snippet: &SourceSnippet,
    frontend: &mut Frontend,
) -> Result<SplitAstSet, SplitError> {
    let parsed = frontend.parse_method_detailed(snippet)?;
    let tree = &parsed.outcome.tree;
    let cfg = build_cfg(tree).map_err(|e| match e {
        CfgError::NotAMethod(_) => SplitError::NoMethod(snippet.id.clone()),
    })?;
    let dom = build_dominator_tree(&cfg)?;
    let block_indices = partition_blocks(&dom, &cfg);
    let header = declaration_header(&parsed, tree);

    let mut out = SplitAstSet {
        blocks: Vec::new(),
        statements: Vec::new(),
        split_code: Vec::new(),
        skipped_blocks: 0,
    };
    for block in block_indices {
        let stmt_ids: Vec<NodeId> = block
            .iter()
            .filter(|&&i| i != cfg.entry())
            .map(|&i| cfg.stmts[i])
            .collect();
        let mut code = String::from(header);
        for &sid in &stmt_ids {
            code.push('\n');
            code.push_str(statement_text(&parsed, tree, sid));
        }
        let debt = brace_debt(&code);
        for _ in 0..debt {
            code.push_str("\n}");
        }
        let piece = SourceSnippet {
            id: format!("{}#b{}", snippet.id, out.split_code.len()),
            language: snippet.language,
            code: code.clone(),
        };
        match frontend.parse_method(&piece) {
            Ok(outcome) => {
                out.blocks.push(outcome.tree);
                out.statements.push(stmt_ids);
                out.split_code.push(code);
            }
            Err(_) => {
                out.skipped_blocks += 1;
            }
        }
    }
    Ok(out)
}

/// Convenience for checks: whether a block tree starts with the same
/// declaration as the original method (same signature subtrees before the
/// body).
pub fn begins_with_declaration(block: &AstTree, original: &AstTree) -> bool {
    if block.label(block.root()) != original.label(original.root()) {
        return false;
    }
    let sig = |t: &AstTree| -> Vec<NodeId> {
        t.children(t.root())
            .iter()
            .copied()
            .take_while(|&c| !BODY_KINDS.contains(&t.label(c)))
            .collect()
    };
    let (bs, os) = (sig(block), sig(original));
    if bs.len() != os.len() {
        return false;
    }
    bs.iter().zip(os.iter()).all(|(&b, &o)| {
        subtree_eq(block, b, original, o)
    })
}

fn subtree_eq(a: &AstTree, ai: NodeId, b: &AstTree, bi: NodeId) -> bool {
    if a.label(ai) != b.label(bi) || a.children(ai).len() != b.children(bi).len() {
        return false;
    }
    a.children(ai)
        .iter()
        .zip(b.children(bi))
        .all(|(&ca, &cb)| subtree_eq(a, ca, b, cb))
}
