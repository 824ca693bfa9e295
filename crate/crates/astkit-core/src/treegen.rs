//! Seeded random trees and graphs for property tests and benchmarks.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::ast::{AstTree, Fragment, NodeKind};
use crate::cfg::Cfg;

const NT_LABELS: [&str; 10] = [
    "method_declaration",
    "block",
    "expr",
    "stmt",
    "call",
    "A",
    "B",
    "C",
    "has space",
    "(",
];

const VALUE_TOKENS: [&str; 12] = [
    "x",
    "y",
    "compare",
    "getMax2",
    "i",
    "result",
    "a b",
    "<mask>",
    "100%",
    "s\\n",
    "λx",
    "",
];

fn value(rng: &mut ChaCha8Rng) -> Fragment {
    Fragment::value(VALUE_TOKENS[rng.gen_range(0..VALUE_TOKENS.len())])
}

fn terminal(rng: &mut ChaCha8Rng, budget: &mut usize) -> Fragment {
    let values = rng.gen_range(1..=2usize).min((*budget).max(1));
    *budget = budget.saturating_sub(values);
    Fragment {
        label: format!("t{}", rng.gen_range(0..6)),
        kind: NodeKind::Terminal,
        children: (0..values).map(|_| value(rng)).collect(),
    }
}

fn nonterminal(rng: &mut ChaCha8Rng, budget: &mut usize, depth: usize) -> Fragment {
    let label = NT_LABELS[rng.gen_range(0..NT_LABELS.len())];
    let mut children = Vec::new();
    while *budget > 0 && children.len() < 5 && rng.gen_bool(0.72) {
        *budget -= 1;
        if depth > 24 || (*budget > 0 && rng.gen_bool(0.45)) {
            children.push(terminal(rng, budget));
        } else {
            children.push(nonterminal(rng, budget, depth + 1));
        }
    }
    Fragment::branch(label, children)
}

/// Deterministic random tree with at most `max_nodes` nodes, exercising
/// every node kind and label escaping edge cases.
pub fn random_tree(seed: u64, max_nodes: usize) -> AstTree {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let target = rng.gen_range(1..=max_nodes.max(1));
    let tree = match target {
        1 if rng.gen_bool(0.5) => AstTree::from_fragment(&value(&mut rng)),
        _ => {
            let mut budget = target - 1;
            AstTree::from_fragment(&nonterminal(&mut rng, &mut budget, 0))
        }
    };
    debug_assert!(tree.validate().is_ok());
    tree
}

/// Deterministic random CFG: a random spanning arborescence from node 0
/// plus extra edges (self loops and back edges included), so every node is
/// reachable from the entry.
pub fn random_cfg(seed: u64, max_nodes: usize) -> Cfg {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.gen_range(1..=max_nodes.max(1));
    let mut edges = Vec::new();
    for v in 1..n {
        edges.push((rng.gen_range(0..v), v));
    }
    let extra = rng.gen_range(0..=n);
    for _ in 0..extra {
        edges.push((rng.gen_range(0..n), rng.gen_range(0..n)));
    }
    Cfg::from_edges(n, &edges)
}
