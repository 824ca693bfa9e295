//! Statement-level control flow graph over a method tree.
//!
//! One node per statement at every nesting level plus a synthetic entry
//! that stands for the method declaration itself. Statements inside catch
//! and finally clauses are not part of the graph. Unreachable statements
//! (dead code after a return) are pruned so every node is reachable from
//! the entry.

use std::collections::BTreeSet;

use thiserror::Error;

use crate::ast::{AstTree, NodeId};

pub const METHOD_KINDS: [&str; 2] = ["method_declaration", "constructor_declaration"];

const BLOCK_KINDS: [&str; 2] = ["block", "constructor_body"];

const LOOP_KINDS: [&str; 4] = [
    "while_statement",
    "for_statement",
    "enhanced_for_statement",
    "do_statement",
];

/// Statement kinds that become opaque single nodes: their inner structure
/// (lambdas, anonymous classes, expressions) does not contribute flow.
const SIMPLE_KINDS: [&str; 7] = [
    "expression_statement",
    "local_variable_declaration",
    "assert_statement",
    "yield_statement",
    "class_declaration",
    "interface_declaration",
    "enum_declaration",
];

fn is_statementish(label: &str) -> bool {
    SIMPLE_KINDS.contains(&label)
        || LOOP_KINDS.contains(&label)
        || BLOCK_KINDS.contains(&label)
        || matches!(
            label,
            "if_statement"
                | "switch_expression"
                | "switch_statement"
                | "try_statement"
                | "try_with_resources_statement"
                | "synchronized_statement"
                | "labeled_statement"
                | "return_statement"
                | "break_statement"
                | "continue_statement"
                | "throw_statement"
                | "ERROR"
        )
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Cfg {
    /// AST node backing each CFG node; index 0 is the entry (method root).
    pub stmts: Vec<NodeId>,
    /// Successor lists, deduplicated and sorted.
    pub succs: Vec<Vec<usize>>,
}

impl Cfg {
    pub fn entry(&self) -> usize {
        0
    }

    pub fn len(&self) -> usize {
        self.stmts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.stmts.is_empty()
    }

    pub fn preds(&self) -> Vec<Vec<usize>> {
        let mut preds = vec![Vec::new(); self.len()];
        for (u, succs) in self.succs.iter().enumerate() {
            for &v in succs {
                preds[v].push(u);
            }
        }
        preds
    }

    pub fn out_degree(&self, u: usize) -> usize {
        self.succs[u].len()
    }

    /// Builds a graph directly from an edge list, for tests and synthetic
    /// graphs; node `i` is backed by a placeholder AST id `i`.
    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Cfg {
        let mut sets: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); n];
        for &(u, v) in edges {
            sets[u].insert(v);
        }
        Cfg {
            stmts: (0..n).map(NodeId::new).collect(),
            succs: sets.into_iter().map(|s| s.into_iter().collect()).collect(),
        }
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum CfgError {
    #[error("tree is rooted at {0:?}, not a method declaration")]
    NotAMethod(String),
}

enum CtxKind {
    Loop { head: usize },
    Switch,
    Labeled,
}

struct Ctx {
    kind: CtxKind,
    label: Option<String>,
    breaks: Vec<usize>,
}

struct Builder<'t> {
    tree: &'t AstTree,
    stmts: Vec<NodeId>,
    succs: Vec<BTreeSet<usize>>,
    contexts: Vec<Ctx>,
}

impl<'t> Builder<'t> {
    fn alloc(&mut self, ast: NodeId, preds: &[usize]) -> usize {
        let idx = self.stmts.len();
        self.stmts.push(ast);
        self.succs.push(BTreeSet::new());
        for &p in preds {
            self.succs[p].insert(idx);
        }
        idx
    }

    fn edge(&mut self, from: usize, to: usize) {
        self.succs[from].insert(to);
    }

    fn statement_children(&self, id: NodeId) -> Vec<NodeId> {
        self.tree
            .children(id)
            .iter()
            .copied()
            .filter(|&c| is_statementish(self.tree.label(c)))
            .collect()
    }

    /// First identifier value under a node, used for break/continue labels
    /// and the label of a labeled statement.
    fn identifier_value(&self, id: NodeId) -> Option<String> {
        for &c in self.tree.children(id) {
            if self.tree.label(c) == "identifier" {
                if let Some(&v) = self.tree.children(c).first() {
                    return Some(self.tree.label(v).to_string());
                }
            }
        }
        None
    }

    fn seq(&mut self, stmts: &[NodeId], mut preds: Vec<usize>) -> Vec<usize> {
        for &s in stmts {
            preds = self.stmt(s, preds, None);
        }
        preds
    }

    /// Wires one statement into the graph and returns its dangling exits.
    fn stmt(&mut self, id: NodeId, preds: Vec<usize>, pending_label: Option<String>) -> Vec<usize> {
        let label = self.tree.label(id).to_string();
        match label.as_str() {
            "block" | "constructor_body" => {
                let inner = self.statement_children(id);
                self.seq(&inner, preds)
            }
            "labeled_statement" => {
                let name = self.identifier_value(id);
                let inner = self.statement_children(id);
                let Some(&target) = inner.last() else {
                    return preds;
                };
                if LOOP_KINDS.contains(&self.tree.label(target)) {
                    // The loop context owns the label so both labeled break
                    // and labeled continue resolve to it.
                    self.stmt(target, preds, name)
                } else {
                    self.contexts.push(Ctx {
                        kind: CtxKind::Labeled,
                        label: name,
                        breaks: Vec::new(),
                    });
                    let mut exits = self.stmt(target, preds, None);
                    let ctx = self.contexts.pop().expect("pushed above");
                    exits.extend(ctx.breaks);
                    exits
                }
            }
            "if_statement" => {
                let head = self.alloc(id, &preds);
                let branches = self.statement_children(id);
                let mut exits = Vec::new();
                match branches.as_slice() {
                    [] => exits.push(head),
                    [cons] => {
                        exits.extend(self.stmt(*cons, vec![head], None));
                        exits.push(head);
                    }
                    [cons, alt, ..] => {
                        exits.extend(self.stmt(*cons, vec![head], None));
                        exits.extend(self.stmt(*alt, vec![head], None));
                    }
                }
                exits
            }
            "while_statement" | "for_statement" | "enhanced_for_statement" | "do_statement" => {
                let head = self.alloc(id, &preds);
                self.contexts.push(Ctx {
                    kind: CtxKind::Loop { head },
                    label: pending_label,
                    breaks: Vec::new(),
                });
                let body = self.statement_children(id);
                let body_exits = match body.last() {
                    Some(&b) => self.stmt(b, vec![head], None),
                    None => vec![head],
                };
                for e in body_exits {
                    self.edge(e, head);
                }
                let ctx = self.contexts.pop().expect("pushed above");
                let mut exits = vec![head];
                exits.extend(ctx.breaks);
                exits
            }
            "switch_expression" | "switch_statement" => {
                let head = self.alloc(id, &preds);
                self.contexts.push(Ctx {
                    kind: CtxKind::Switch,
                    label: pending_label,
                    breaks: Vec::new(),
                });
                let mut has_default = false;
                let mut carried: Vec<usize> = Vec::new();
                let mut arrow_exits: Vec<usize> = Vec::new();
                let body = self
                    .tree
                    .children(id)
                    .iter()
                    .copied()
                    .find(|&c| self.tree.label(c) == "switch_block");
                if let Some(body) = body {
                    for &group in self.tree.children(body) {
                        match self.tree.label(group) {
                            "switch_block_statement_group" => {
                                if self.group_has_default(group) {
                                    has_default = true;
                                }
                                let stmts = self.statement_children(group);
                                let mut group_preds = vec![head];
                                group_preds.append(&mut carried);
                                carried = self.seq(&stmts, group_preds);
                            }
                            "switch_rule" => {
                                // Arrow rules do not fall through.
                                if self.group_has_default(group) {
                                    has_default = true;
                                }
                                let stmts = self.statement_children(group);
                                arrow_exits.extend(self.seq(&stmts, vec![head]));
                            }
                            _ => {}
                        }
                    }
                }
                let ctx = self.contexts.pop().expect("pushed above");
                let mut exits = carried;
                exits.extend(arrow_exits);
                exits.extend(ctx.breaks);
                if !has_default {
                    exits.push(head);
                }
                exits
            }
            "try_statement" | "try_with_resources_statement" => {
                let head = self.alloc(id, &preds);
                let body = self
                    .tree
                    .children(id)
                    .iter()
                    .copied()
                    .find(|&c| BLOCK_KINDS.contains(&self.tree.label(c)));
                match body {
                    Some(b) => self.stmt(b, vec![head], None),
                    None => vec![head],
                }
            }
            "synchronized_statement" => {
                let head = self.alloc(id, &preds);
                let body = self
                    .tree
                    .children(id)
                    .iter()
                    .copied()
                    .find(|&c| self.tree.label(c) == "block");
                match body {
                    Some(b) => self.stmt(b, vec![head], None),
                    None => vec![head],
                }
            }
            "return_statement" | "throw_statement" => {
                self.alloc(id, &preds);
                Vec::new()
            }
            "break_statement" => {
                let node = self.alloc(id, &preds);
                let wanted = self.identifier_value(id);
                let target = self.contexts.iter_mut().rev().find(|c| match &wanted {
                    Some(l) => c.label.as_deref() == Some(l),
                    None => matches!(c.kind, CtxKind::Loop { .. } | CtxKind::Switch),
                });
                if let Some(ctx) = target {
                    ctx.breaks.push(node);
                }
                Vec::new()
            }
            "continue_statement" => {
                let node = self.alloc(id, &preds);
                let wanted = self.identifier_value(id);
                let target = self
                    .contexts
                    .iter()
                    .rev()
                    .filter(|c| matches!(c.kind, CtxKind::Loop { .. }))
                    .find(|c| match &wanted {
                        Some(l) => c.label.as_deref() == Some(l),
                        None => true,
                    });
                if let Some(Ctx {
                    kind: CtxKind::Loop { head },
                    ..
                }) = target
                {
                    let head = *head;
                    self.edge(node, head);
                }
                Vec::new()
            }
            // Plain statements and anything unrecognized (ERROR recovery
            // output included) are opaque single nodes.
            _ => {
                let node = self.alloc(id, &preds);
                vec![node]
            }
        }
    }

    fn group_has_default(&self, group: NodeId) -> bool {
        self.tree.children(group).iter().any(|&c| {
            self.tree.label(c) == "switch_label"
                && self
                    .tree
                    .children(c)
                    .iter()
                    .any(|&l| self.tree.label(l) == "default")
        })
    }
}

/// Builds the control flow graph of a method tree.
pub fn build_cfg(tree: &AstTree) -> Result<Cfg, CfgError> {
    let root_label = tree.label(tree.root());
    if !METHOD_KINDS.contains(&root_label) {
        return Err(CfgError::NotAMethod(root_label.to_string()));
    }
    let mut b = Builder {
        tree,
        stmts: Vec::new(),
        succs: Vec::new(),
        contexts: Vec::new(),
    };
    let entry = b.alloc(tree.root(), &[]);
    let body = tree
        .children(tree.root())
        .iter()
        .copied()
        .find(|&c| BLOCK_KINDS.contains(&tree.label(c)));
    if let Some(body) = body {
        let stmts = b.statement_children(body);
        b.seq(&stmts, vec![entry]);
    }

    // Prune statements no path reaches (dead code after return/throw).
    let n = b.stmts.len();
    let mut reachable = vec![false; n];
    let mut queue = vec![0usize];
    reachable[0] = true;
    while let Some(u) = queue.pop() {
        for &v in &b.succs[u] {
            if !reachable[v] {
                reachable[v] = true;
                queue.push(v);
            }
        }
    }
    let mut remap = vec![usize::MAX; n];
    let mut stmts = Vec::new();
    let mut kept = 0usize;
    for i in 0..n {
        if reachable[i] {
            remap[i] = kept;
            stmts.push(b.stmts[i]);
            kept += 1;
        }
    }
    let succs = (0..n)
        .filter(|&i| reachable[i])
        .map(|i| {
            b.succs[i]
                .iter()
                .filter(|&&v| reachable[v])
                .map(|&v| remap[v])
                .collect()
        })
        .collect();
    Ok(Cfg { stmts, succs })
}
