//! Binary-tree conversion: nodes with more than two children are split
//! with synthetic `<grp>` right children until arity is at most two, then
//! every single-child node is merged with its child under a `:`-joined
//! label, leaving only nodes with zero or two children.

use crate::ast::{AstTree, Fragment, NodeKind};

/// Label of the synthetic group nodes introduced by splitting.
pub const GROUP_LABEL: &str = "<grp>";

/// Separator for merged parent/child labels.
pub const MERGE_SEPARATOR: &str = ":";

fn binarize(label: &str, children: &[Fragment]) -> Fragment {
    match children {
        [] => Fragment {
            label: label.to_string(),
            kind: NodeKind::Value,
            children: Vec::new(),
        },
        [only] => {
            let inner = binarize(&only.label, &only.children);
            Fragment {
                label: format!("{label}{MERGE_SEPARATOR}{}", inner.label),
                kind: inner.kind,
                children: inner.children,
            }
        }
        [left, right] => Fragment {
            label: label.to_string(),
            kind: NodeKind::NonTerminal,
            children: vec![
                binarize(&left.label, &left.children),
                binarize(&right.label, &right.children),
            ],
        },
        [left, rest @ ..] => {
            let group = Fragment::branch(GROUP_LABEL, rest.to_vec());
            let pair = [left.clone(), group];
            binarize(label, &pair)
        }
    }
}

/// Converts a tree into its binary form; every node of the result has
/// exactly zero or two children, and the conversion is idempotent.
pub fn to_binary(tree: &AstTree) -> AstTree {
    let f = tree.to_fragment();
    AstTree::from_fragment(&binarize(&f.label, &f.children))
}
