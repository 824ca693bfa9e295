//! Maps a grammar backend tree onto the canonical node taxonomy.
//!
//! Named grammar nodes become non-terminals; token leaves (named leaves
//! and kept anonymous tokens) become a terminal labeled with the token
//! type holding one value leaf with the token text. Pure punctuation is
//! dropped when configured, comments always. Ids are assigned in preorder
//! so the output satisfies every tree invariant by construction.

use astkit_core::ast::{AstNode, AstTree, NodeId, NodeKind};

use crate::frontend::ParserConfig;

const PUNCTUATION: [&str; 7] = ["{", "}", "(", ")", ";", ",", "."];

#[derive(Debug, Clone)]
pub(crate) struct Normalized {
    pub nodes: Vec<AstNode>,
    pub spans: Vec<(u32, u32)>,
    pub errors: usize,
}

struct Builder<'s> {
    source: &'s str,
    drop_punctuation: bool,
    nodes: Vec<AstNode>,
    spans: Vec<(u32, u32)>,
    errors: usize,
}

impl<'s> Builder<'s> {
    fn push(&mut self, label: &str, kind: NodeKind, range: std::ops::Range<usize>) -> NodeId {
        let id = NodeId::new(self.nodes.len());
        self.nodes.push(AstNode {
            id,
            label: label.to_string(),
            kind,
            children: Vec::new(),
        });
        self.spans.push((range.start as u32, range.end as u32));
        id
    }

    /// A token becomes a terminal labeled with its type plus a value leaf
    /// with its text.
    fn token(&mut self, kind: &str, node: tree_sitter::Node) -> NodeId {
        let range = node.byte_range();
        let text = &self.source[range.clone()];
        let terminal = self.push(kind, NodeKind::Terminal, range.clone());
        let value = self.push(text, NodeKind::Value, range);
        self.nodes[terminal.index()].children.push(value);
        terminal
    }

    fn walk(&mut self, node: tree_sitter::Node) -> Option<NodeId> {
        if node.is_missing() {
            self.errors += 1;
            return None;
        }
        let kind = node.kind();
        if kind == "line_comment" || kind == "block_comment" {
            return None;
        }
        if node.is_error() {
            self.errors += 1;
        }
        if !node.is_named() {
            let text = &self.source[node.byte_range()];
            if self.drop_punctuation && PUNCTUATION.contains(&text) {
                return None;
            }
            return Some(self.token(kind, node));
        }
        if node.child_count() == 0 {
            return Some(self.token(kind, node));
        }
        let id = self.push(kind, NodeKind::NonTerminal, node.byte_range());
        let mut cursor = node.walk();
        let children: Vec<NodeId> = node
            .children(&mut cursor)
            .filter_map(|c| self.walk(c))
            .collect();
        self.nodes[id.index()].children = children;
        Some(id)
    }
}

pub(crate) fn normalize(
    root: tree_sitter::Node,
    source: &str,
    drop_punctuation: bool,
) -> Normalized {
    let mut b = Builder {
        source,
        drop_punctuation,
        nodes: Vec::new(),
        spans: Vec::new(),
        errors: 0,
    };
    b.walk(root);
    Normalized {
        nodes: b.nodes,
        spans: b.spans,
        errors: b.errors,
    }
}

/// Normalizes a backend subtree into a canonical tree.
pub fn normalize_tree(root: tree_sitter::Node, source: &str, config: &ParserConfig) -> AstTree {
    let n = normalize(root, source, config.drop_punctuation);
    AstTree::from_parts(n.nodes).expect("normalizer emits valid trees")
}
