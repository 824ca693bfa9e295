//! Sparse ancestor-descendant and sibling relationship matrices over the
//! preorder node sequence, plus the relative-position index mapping used
//! by tree-structured attention.
//!
//! Only pairs within the distance threshold `P` are stored, with the
//! positive orientation (ancestor first, left sibling first); consumers
//! derive the negative mirror entries from antisymmetry.

use crate::ast::{AstTree, NodeId};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct RelEntry {
    pub i: NodeId,
    pub j: NodeId,
    /// Distance, always in `1..=P`: tree distance for ancestor pairs,
    /// child-index gap for sibling pairs.
    pub d: u32,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RelationMatrices {
    pub node_count: usize,
    pub threshold: u32,
    /// Ancestor-descendant pairs `(ancestor, descendant, distance)`; the
    /// ancestor always precedes the descendant in preorder.
    pub ancestor: Vec<RelEntry>,
    /// Same-parent sibling pairs `(left, right, index gap)`.
    pub sibling: Vec<RelEntry>,
}

/// Default distance threshold.
pub const DEFAULT_THRESHOLD: u32 = 7;

/// Computes both relationship matrices for a tree.
///
/// Ancestor entries come from the running ancestor stack of a preorder
/// walk; sibling entries from each node's child array. Self-pairs are not
/// stored.
pub fn compute_relations(tree: &AstTree, threshold: u32) -> RelationMatrices {
    assert!(threshold >= 1, "threshold must be at least 1");
    let mut ancestor = Vec::new();
    let mut sibling = Vec::new();

    // Ancestor stack plus a child-cursor walk stack.
    let mut stack: Vec<NodeId> = Vec::new();
    let mut walk: Vec<(NodeId, usize)> = vec![(tree.root(), 0)];
    while let Some(&(id, cursor)) = walk.last() {
        if cursor == 0 {
            for d in 1..=stack.len().min(threshold as usize) {
                ancestor.push(RelEntry {
                    i: stack[stack.len() - d],
                    j: id,
                    d: d as u32,
                });
            }
            let children = tree.children(id);
            for (a, &ca) in children.iter().enumerate() {
                for (b, &cb) in children.iter().enumerate().skip(a + 1) {
                    let gap = (b - a) as u32;
                    if gap > threshold {
                        break;
                    }
                    sibling.push(RelEntry { i: ca, j: cb, d: gap });
                }
            }
        }
        let children = tree.children(id);
        if cursor < children.len() {
            walk.last_mut().expect("nonempty").1 = cursor + 1;
            stack.push(id);
            walk.push((children[cursor], 0));
        } else {
            walk.pop();
            stack.pop();
        }
    }

    ancestor.sort_unstable();
    sibling.sort_unstable();
    RelationMatrices {
        node_count: tree.len(),
        threshold,
        ancestor,
        sibling,
    }
}

/// Relative-position bucket for a signed distance: `d + P + 1` when
/// `d` is finite and within `[-P, P]`, otherwise 0. Maps `[-P, P]`
/// bijectively onto `[1, 2P+1]`.
pub fn delta_index(distance: Option<i64>, threshold: u32) -> u32 {
    let p = i64::from(threshold);
    match distance {
        Some(d) if (-p..=p).contains(&d) => (d + p + 1) as u32,
        _ => 0,
    }
}

impl RelationMatrices {
    /// Text rendering in coordinate format: a header line followed by one
    /// entry per line, ancestor entries before sibling entries.
    pub fn render_coo(&self) -> String {
        let mut out = format!(
            "# nodes={} P={} order=preorder\n",
            self.node_count, self.threshold
        );
        for e in &self.ancestor {
            out.push_str(&format!("A {} {} {}\n", e.i, e.j, e.d));
        }
        for e in &self.sibling {
            out.push_str(&format!("S {} {} {}\n", e.i, e.j, e.d));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ast::{Fragment, NodeKind};

    fn example_tree() -> AstTree {
        AstTree::from_fragment(&Fragment::branch(
            "A",
            vec![
                Fragment::terminal("B", "x"),
                Fragment {
                    label: "C".into(),
                    kind: NodeKind::Terminal,
                    children: vec![Fragment::value("y"), Fragment::value("z")],
                },
            ],
        ))
    }

    fn entry(i: u32, j: u32, d: u32) -> RelEntry {
        RelEntry {
            i: NodeId::new(i as usize),
            j: NodeId::new(j as usize),
            d,
        }
    }

    #[test]
    fn example_matrices() {
        let rel = compute_relations(&example_tree(), 7);
        assert_eq!(
            rel.ancestor,
            vec![
                entry(0, 1, 1),
                entry(0, 2, 2),
                entry(0, 3, 1),
                entry(0, 4, 2),
                entry(0, 5, 2),
                entry(1, 2, 1),
                entry(3, 4, 1),
                entry(3, 5, 1),
            ]
        );
        assert_eq!(rel.sibling, vec![entry(1, 3, 1), entry(4, 5, 1)]);
    }

    #[test]
    fn deep_chain_is_cut_at_threshold() {
        let mut f = Fragment::branch("n9", vec![]);
        for i in (0..9).rev() {
            f = Fragment::branch(format!("n{i}"), vec![f]);
        }
        let t = AstTree::from_fragment(&f);
        assert_eq!(t.len(), 10);
        let rel = compute_relations(&t, 7);
        let root = NodeId::new(0);
        let deepest = NodeId::new(9);
        assert!(!rel
            .ancestor
            .iter()
            .any(|e| e.i == root && e.j == deepest));
        assert!(rel.ancestor.iter().all(|e| e.d >= 1 && e.d <= 7));
    }

    #[test]
    fn single_node_is_empty() {
        let t = AstTree::from_fragment(&Fragment::value("x"));
        let rel = compute_relations(&t, 7);
        assert!(rel.ancestor.is_empty());
        assert!(rel.sibling.is_empty());
    }

    #[test]
    fn delta_index_fixtures() {
        assert_eq!(delta_index(Some(1), 7), 9);
        assert_eq!(delta_index(Some(-7), 7), 1);
        assert_eq!(delta_index(None, 7), 0);
        assert_eq!(delta_index(Some(8), 7), 0);
    }

    #[test]
    fn delta_index_is_bijective_on_the_window() {
        for p in [1u32, 3, 7] {
            let imgs: Vec<u32> = (-(p as i64)..=p as i64)
                .map(|d| delta_index(Some(d), p))
                .collect();
            let expected: Vec<u32> = (1..=2 * p + 1).collect();
            assert_eq!(imgs, expected);
        }
    }

    #[test]
    fn coo_rendering() {
        let rel = compute_relations(&example_tree(), 7);
        let text = rel.render_coo();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("# nodes=6 P=7 order=preorder"));
        assert_eq!(lines.next(), Some("A 0 1 1"));
        assert!(text.lines().count() == 1 + 8 + 2);
        assert!(text.contains("S 1 3 1"));
    }
}
