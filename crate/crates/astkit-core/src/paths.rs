//! Leaf-to-leaf path contexts: a start value, an alternating sequence of
//! node labels and up/down movements through the lowest common ancestor,
//! and an end value, bounded by maximum length and width.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::ast::{AstTree, NodeId, NodeKind};
use crate::sbt::percent_escape;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Up,
    Down,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PathContext {
    pub start_node: NodeId,
    pub end_node: NodeId,
    pub start_value: String,
    pub end_value: String,
    /// Labels n1..n_{k+1}, endpoints included.
    pub labels: Vec<String>,
    /// The k movement directions: a run of ups followed by a run of downs.
    pub directions: Vec<Direction>,
    /// Child-index gap between the two branches at the lowest common ancestor.
    pub width: usize,
}

impl PathContext {
    pub fn length(&self) -> usize {
        self.directions.len()
    }

    /// Path field of the TSV form: labels joined by `^` (up) and `_` (down).
    pub fn render_path(&self) -> String {
        let mut out = String::new();
        for (i, label) in self.labels.iter().enumerate() {
            if i > 0 {
                out.push_str(match self.directions[i - 1] {
                    Direction::Up => " ^ ",
                    Direction::Down => " _ ",
                });
            }
            out.push_str(&percent_escape(label));
        }
        out
    }

    /// One TSV line: `x_start<TAB>path<TAB>x_end`.
    pub fn render_tsv(&self) -> String {
        format!(
            "{}\t{}\t{}",
            percent_escape(&self.start_value),
            self.render_path(),
            percent_escape(&self.end_value)
        )
    }
}

#[derive(Debug, Clone, Copy)]
pub struct PathConfig {
    pub max_length: usize,
    pub max_width: usize,
    /// Upper bound on emitted contexts; `None` means unlimited.
    pub max_contexts: Option<usize>,
    pub sample_seed: u64,
}

impl Default for PathConfig {
    fn default() -> Self {
        PathConfig {
            max_length: 8,
            max_width: 2,
            max_contexts: Some(200),
            sample_seed: 0,
        }
    }
}

/// A leaf candidate propagated upward: the leaf and its edge distance from
/// the current subtree root.
#[derive(Clone, Copy)]
struct LeafEntry {
    leaf: NodeId,
    dist: usize,
}

/// Extracts every path context within the configured bounds.
///
/// Pairs are found bottom-up: at each node, leaves from distinct child
/// subtrees pair up with that node as their lowest common ancestor. Leaf
/// lists are pruned to `max_length - 2` edges below the child root, since a
/// usable pair still needs one edge up into the ancestor on each side. If
/// more than `max_contexts` survive, a uniform sample is drawn with the
/// configured seed; output is ordered by endpoint document order either way.
pub fn extract_path_contexts(tree: &AstTree, config: &PathConfig) -> Vec<PathContext> {
    if config.max_length < 2 {
        return Vec::new();
    }
    let parent = tree.parent_map();
    // Pairs of (left leaf, right leaf, lca).
    let mut pairs: Vec<(NodeId, NodeId, NodeId)> = Vec::new();
    // Per-node surviving leaf entries, indexed by node id.
    let mut lists: Vec<Vec<LeafEntry>> = vec![Vec::new(); tree.len()];

    for &id in tree.preorder_nodes().iter().rev() {
        if tree.kind(id) == NodeKind::Value {
            lists[id.index()].push(LeafEntry { leaf: id, dist: 0 });
            continue;
        }
        let children = tree.children(id);
        for (i, &ci) in children.iter().enumerate() {
            for (j, &cj) in children.iter().enumerate().skip(i + 1) {
                if j - i > config.max_width {
                    break;
                }
                for a in &lists[ci.index()] {
                    for b in &lists[cj.index()] {
                        if a.dist + b.dist + 2 <= config.max_length {
                            pairs.push((a.leaf, b.leaf, id));
                        }
                    }
                }
            }
        }
        let mut merged = Vec::new();
        for &c in children {
            for entry in &lists[c.index()] {
                if entry.dist + 1 + 2 <= config.max_length {
                    merged.push(LeafEntry {
                        leaf: entry.leaf,
                        dist: entry.dist + 1,
                    });
                }
            }
            lists[c.index()] = Vec::new();
        }
        lists[id.index()] = merged;
    }

    // Document order: preorder ids of the endpoints.
    pairs.sort_by_key(|&(a, b, _)| (a, b));

    if let Some(limit) = config.max_contexts {
        if pairs.len() > limit {
            let mut rng = ChaCha8Rng::seed_from_u64(config.sample_seed);
            let mut picked = rand::seq::index::sample(&mut rng, pairs.len(), limit).into_vec();
            picked.sort_unstable();
            pairs = picked.into_iter().map(|i| pairs[i]).collect();
        }
    }

    pairs
        .into_iter()
        .map(|(a, b, lca)| materialize(tree, &parent, a, b, lca))
        .collect()
}

fn materialize(
    tree: &AstTree,
    parent: &[Option<NodeId>],
    start: NodeId,
    end: NodeId,
    lca: NodeId,
) -> PathContext {
    let mut up_chain = vec![start];
    let mut cur = start;
    while cur != lca {
        cur = parent[cur.index()].expect("lca is an ancestor");
        up_chain.push(cur);
    }
    let mut down_chain = vec![end];
    cur = end;
    while cur != lca {
        cur = parent[cur.index()].expect("lca is an ancestor");
        down_chain.push(cur);
    }
    down_chain.pop(); // drop the lca, already on the up chain
    down_chain.reverse();

    let ups = up_chain.len() - 1;
    let downs = down_chain.len();
    let mut directions = Vec::with_capacity(ups + downs);
    directions.extend(std::iter::repeat(Direction::Up).take(ups));
    directions.extend(std::iter::repeat(Direction::Down).take(downs));

    let branch_left = up_chain[up_chain.len() - 2];
    let branch_right = down_chain[0];
    let idx = |needle: NodeId| {
        tree.children(lca)
            .iter()
            .position(|&c| c == needle)
            .expect("branch child under lca")
    };
    let width = idx(branch_right) - idx(branch_left);

    let labels: Vec<String> = up_chain
        .iter()
        .chain(down_chain.iter())
        .map(|&id| tree.label(id).to_string())
        .collect();

    PathContext {
        start_node: start,
        end_node: end,
        start_value: tree.label(start).to_string(),
        end_value: tree.label(end).to_string(),
        labels,
        directions,
        width,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ast::Fragment;

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

    fn unlimited(max_length: usize, max_width: usize) -> PathConfig {
        PathConfig {
            max_length,
            max_width,
            max_contexts: None,
            sample_seed: 0,
        }
    }

    #[test]
    fn example_yields_three_contexts() {
        let contexts = extract_path_contexts(&example_tree(), &unlimited(8, 8));
        let rendered: Vec<String> = contexts.iter().map(|c| c.render_tsv()).collect();
        assert_eq!(
            rendered,
            vec![
                "x\tx ^ B ^ A _ C _ y\ty",
                "x\tx ^ B ^ A _ C _ z\tz",
                "y\ty ^ C _ z\tz",
            ]
        );
        assert_eq!(contexts[0].length(), 4);
        assert_eq!(contexts[2].length(), 2);
        assert!(contexts.iter().all(|c| c.width == 1));
    }

    #[test]
    fn max_length_filters() {
        let contexts = extract_path_contexts(&example_tree(), &unlimited(2, 8));
        assert_eq!(contexts.len(), 1);
        assert_eq!(contexts[0].start_value, "y");
        assert_eq!(contexts[0].end_value, "z");
    }

    #[test]
    fn single_leaf_tree_has_no_contexts() {
        let t = AstTree::from_fragment(&Fragment::terminal("T", "only"));
        assert!(extract_path_contexts(&t, &PathConfig::default()).is_empty());
    }

    #[test]
    fn width_filters_distant_branches() {
        // Root with three terminals; outermost pair has width 2.
        let t = AstTree::from_fragment(&Fragment::branch(
            "R",
            vec![
                Fragment::terminal("T", "a"),
                Fragment::terminal("T", "b"),
                Fragment::terminal("T", "c"),
            ],
        ));
        let wide = extract_path_contexts(&t, &unlimited(8, 2));
        assert_eq!(wide.len(), 3);
        let narrow = extract_path_contexts(&t, &unlimited(8, 1));
        assert_eq!(narrow.len(), 2);
        assert!(narrow.iter().all(|c| c.width == 1));
    }

    #[test]
    fn up_run_precedes_down_run() {
        let contexts = extract_path_contexts(&example_tree(), &unlimited(8, 8));
        for c in &contexts {
            let first_down = c
                .directions
                .iter()
                .position(|&d| d == Direction::Down)
                .unwrap_or(c.directions.len());
            assert!(c.directions[..first_down]
                .iter()
                .all(|&d| d == Direction::Up));
            assert!(c.directions[first_down..]
                .iter()
                .all(|&d| d == Direction::Down));
        }
    }

    #[test]
    fn sampling_is_reproducible_and_ordered() {
        let t = AstTree::from_fragment(&Fragment::branch(
            "R",
            (0..12)
                .map(|i| Fragment::terminal("T", format!("v{i}")))
                .collect(),
        ));
        let config = PathConfig {
            max_length: 8,
            max_width: 12,
            max_contexts: Some(10),
            sample_seed: 7,
        };
        let a = extract_path_contexts(&t, &config);
        let b = extract_path_contexts(&t, &config);
        assert_eq!(a, b);
        assert_eq!(a.len(), 10);
        let mut keys: Vec<(NodeId, NodeId)> =
            a.iter().map(|c| (c.start_node, c.end_node)).collect();
        let sorted = {
            let mut s = keys.clone();
            s.sort();
            s
        };
        assert_eq!(keys, sorted);
        keys.dedup();
        assert_eq!(keys.len(), 10);

        let other_seed = extract_path_contexts(
            &t,
            &PathConfig {
                sample_seed: 8,
                ..config
            },
        );
        assert_ne!(a, other_seed);
    }
}
