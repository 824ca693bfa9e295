//! Canonical rooted ordered labeled tree for method-level ASTs.
//!
//! Non-terminal nodes carry grammar type names, terminal nodes carry the
//! grammar type of a token, and value nodes carry the token text itself.
//! Values are the leaves of the tree; a terminal's children are always
//! value nodes. Node ids are dense preorder indices, which is the canonical
//! node order used by the relation matrices and every serialized form.

use std::collections::VecDeque;

use thiserror::Error;

/// Reserved label substituted for value leaves by [`AstTree::mask_leaves`].
pub const MASK_TOKEN: &str = "<mask>";

/// Dense index of a node within its tree, assigned in preorder.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NodeId(u32);

impl NodeId {
    pub fn new(index: usize) -> Self {
        NodeId(u32::try_from(index).expect("tree too large"))
    }

    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl std::fmt::Display for NodeId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum NodeKind {
    NonTerminal,
    Terminal,
    Value,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AstNode {
    pub id: NodeId,
    pub label: String,
    pub kind: NodeKind,
    pub children: Vec<NodeId>,
}

/// Recursive tree description used to assemble an [`AstTree`].
///
/// Fragments carry no ids; [`AstTree::from_fragment`] assigns dense
/// preorder ids during flattening, so trees built this way always satisfy
/// the id-order invariant.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Fragment {
    pub label: String,
    pub kind: NodeKind,
    pub children: Vec<Fragment>,
}

impl Fragment {
    pub fn branch(label: impl Into<String>, children: Vec<Fragment>) -> Self {
        Fragment {
            label: label.into(),
            kind: NodeKind::NonTerminal,
            children,
        }
    }

    /// Terminal node holding a single value leaf.
    pub fn terminal(label: impl Into<String>, value: impl Into<String>) -> Self {
        Fragment {
            label: label.into(),
            kind: NodeKind::Terminal,
            children: vec![Fragment::value(value)],
        }
    }

    pub fn value(text: impl Into<String>) -> Self {
        Fragment {
            label: text.into(),
            kind: NodeKind::Value,
            children: Vec::new(),
        }
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum TreeError {
    #[error("tree has no nodes")]
    Empty,
    #[error("node {0} appears in more than one child list")]
    MultipleParents(NodeId),
    #[error("node id {0} out of range")]
    IdOutOfRange(NodeId),
    #[error("node {0} is not reachable from the root")]
    Unreachable(NodeId),
    #[error("ids are not in preorder at node {0}")]
    NotPreorder(NodeId),
    #[error("value node {0} has children")]
    ValueWithChildren(NodeId),
    #[error("terminal node {0} must have value children only")]
    TerminalChild(NodeId),
}

/// Rooted ordered labeled tree with dense preorder node ids.
///
/// Immutable after construction; all operations are pure and take `&self`,
/// so trees can be shared freely across worker threads.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AstTree {
    nodes: Vec<AstNode>,
    root: NodeId,
}

impl AstTree {
    /// Builds a tree from parallel arrays produced by a traversal that
    /// already assigned preorder ids. Validates before returning.
    pub fn from_parts(nodes: Vec<AstNode>) -> Result<Self, TreeError> {
        if nodes.is_empty() {
            return Err(TreeError::Empty);
        }
        let tree = AstTree {
            nodes,
            root: NodeId(0),
        };
        tree.validate()?;
        Ok(tree)
    }

    pub fn from_fragment(fragment: &Fragment) -> Self {
        fn flatten(f: &Fragment, nodes: &mut Vec<AstNode>) -> NodeId {
            let id = NodeId::new(nodes.len());
            nodes.push(AstNode {
                id,
                label: f.label.clone(),
                kind: f.kind,
                children: Vec::new(),
            });
            let children: Vec<NodeId> = f.children.iter().map(|c| flatten(c, nodes)).collect();
            nodes[id.index()].children = children;
            id
        }
        let mut nodes = Vec::new();
        flatten(fragment, &mut nodes);
        AstTree {
            nodes,
            root: NodeId(0),
        }
    }

    pub fn root(&self) -> NodeId {
        self.root
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn node(&self, id: NodeId) -> &AstNode {
        &self.nodes[id.index()]
    }

    pub fn nodes(&self) -> impl Iterator<Item = &AstNode> {
        self.nodes.iter()
    }

    pub fn label(&self, id: NodeId) -> &str {
        &self.nodes[id.index()].label
    }

    pub fn kind(&self, id: NodeId) -> NodeKind {
        self.nodes[id.index()].kind
    }

    pub fn children(&self, id: NodeId) -> &[NodeId] {
        &self.nodes[id.index()].children
    }

    pub fn is_leaf(&self, id: NodeId) -> bool {
        self.children(id).is_empty()
    }

    /// Checks every structural invariant: single root, unique parents,
    /// connectivity, preorder ids, and the kind discipline (values are
    /// childless, terminals hold only value children).
    pub fn validate(&self) -> Result<(), TreeError> {
        if self.nodes.is_empty() {
            return Err(TreeError::Empty);
        }
        let n = self.nodes.len();
        let mut parent = vec![None; n];
        for node in &self.nodes {
            for &child in &node.children {
                if child.index() >= n {
                    return Err(TreeError::IdOutOfRange(child));
                }
                if parent[child.index()].is_some() || child == self.root {
                    return Err(TreeError::MultipleParents(child));
                }
                parent[child.index()] = Some(node.id);
            }
        }
        // Preorder walk doubles as the connectivity check.
        let mut next = 0u32;
        let mut stack = vec![self.root];
        let mut visited = 0usize;
        while let Some(id) = stack.pop() {
            if id.0 != next {
                return Err(TreeError::NotPreorder(id));
            }
            next += 1;
            visited += 1;
            for &child in self.children(id).iter().rev() {
                stack.push(child);
            }
        }
        if visited != n {
            let missing = parent
                .iter()
                .position(|p| p.is_none())
                .map(NodeId::new)
                .unwrap_or(self.root);
            return Err(TreeError::Unreachable(missing));
        }
        for node in &self.nodes {
            match node.kind {
                NodeKind::Value => {
                    if !node.children.is_empty() {
                        return Err(TreeError::ValueWithChildren(node.id));
                    }
                }
                NodeKind::Terminal => {
                    if node.children.is_empty()
                        || node
                            .children
                            .iter()
                            .any(|&c| self.kind(c) != NodeKind::Value)
                    {
                        return Err(TreeError::TerminalChild(node.id));
                    }
                }
                NodeKind::NonTerminal => {
                    if node
                        .children
                        .iter()
                        .any(|&c| self.kind(c) == NodeKind::Value)
                    {
                        return Err(TreeError::TerminalChild(node.id));
                    }
                }
            }
        }
        Ok(())
    }

    /// Depth-first left-to-right visitation order; the first element is the
    /// root and the length equals the node count.
    pub fn preorder_nodes(&self) -> Vec<NodeId> {
        let mut order = Vec::with_capacity(self.nodes.len());
        let mut stack = vec![self.root];
        while let Some(id) = stack.pop() {
            order.push(id);
            for &child in self.children(id).iter().rev() {
                stack.push(child);
            }
        }
        order
    }

    /// Level-order labels: all nodes at one depth before the next, children
    /// kept in their original order within a level.
    pub fn bfs_sequence(&self) -> Vec<&str> {
        let mut out = Vec::with_capacity(self.nodes.len());
        let mut queue = VecDeque::new();
        queue.push_back(self.root);
        while let Some(id) = queue.pop_front() {
            out.push(self.label(id));
            queue.extend(self.children(id).iter().copied());
        }
        out
    }

    /// Parent of each node; `None` for the root.
    pub fn parent_map(&self) -> Vec<Option<NodeId>> {
        let mut parent = vec![None; self.nodes.len()];
        for node in &self.nodes {
            for &child in &node.children {
                parent[child.index()] = Some(node.id);
            }
        }
        parent
    }

    /// Number of nodes on the root-to-node path, so the root has depth 1.
    pub fn depths(&self) -> Vec<u32> {
        let mut depth = vec![0u32; self.nodes.len()];
        depth[self.root.index()] = 1;
        for id in self.preorder_nodes() {
            let d = depth[id.index()];
            for &child in self.children(id) {
                depth[child.index()] = d + 1;
            }
        }
        depth
    }

    /// New tree of identical shape with every value leaf relabeled to
    /// [`MASK_TOKEN`]. Non-value labels are untouched.
    pub fn mask_leaves(&self) -> AstTree {
        let nodes = self
            .nodes
            .iter()
            .map(|n| AstNode {
                id: n.id,
                label: if n.kind == NodeKind::Value {
                    MASK_TOKEN.to_string()
                } else {
                    n.label.clone()
                },
                kind: n.kind,
                children: n.children.clone(),
            })
            .collect();
        AstTree {
            nodes,
            root: self.root,
        }
    }

    /// Recursive fragment view of the tree, for transforms that rebuild.
    pub fn to_fragment(&self) -> Fragment {
        fn build(tree: &AstTree, id: NodeId) -> Fragment {
            Fragment {
                label: tree.label(id).to_string(),
                kind: tree.kind(id),
                children: tree.children(id).iter().map(|&c| build(tree, c)).collect(),
            }
        }
        build(self, self.root)
    }

    /// Structural identity: same labels and same child order everywhere.
    /// Node kinds are deliberately ignored so that kind-inferring decoders
    /// (SBT) can be compared against their inputs.
    pub fn structurally_eq(&self, other: &AstTree) -> bool {
        if self.nodes.len() != other.nodes.len() {
            return false;
        }
        let mut stack = vec![(self.root, other.root)];
        while let Some((a, b)) = stack.pop() {
            let (na, nb) = (self.node(a), other.node(b));
            if na.label != nb.label || na.children.len() != nb.children.len() {
                return false;
            }
            stack.extend(na.children.iter().copied().zip(nb.children.iter().copied()));
        }
        true
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// `E1 = A(B(x), C(y, z))` with terminals holding the value leaves.
    pub(crate) fn example_tree() -> AstTree {
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

    #[test]
    fn preorder_of_example() {
        let t = example_tree();
        let labels: Vec<&str> = t.preorder_nodes().iter().map(|&id| t.label(id)).collect();
        assert_eq!(labels, ["A", "B", "x", "C", "y", "z"]);
        assert_eq!(t.preorder_nodes()[0], t.root());
        assert_eq!(t.preorder_nodes().len(), t.len());
    }

    #[test]
    fn preorder_single_node() {
        let t = AstTree::from_fragment(&Fragment::value("A"));
        assert_eq!(t.preorder_nodes(), vec![t.root()]);
    }

    #[test]
    fn preorder_chain() {
        let t = AstTree::from_fragment(&Fragment::branch(
            "A",
            vec![Fragment::terminal("B", "c")],
        ));
        let labels: Vec<&str> = t.preorder_nodes().iter().map(|&id| t.label(id)).collect();
        assert_eq!(labels, ["A", "B", "c"]);
    }

    #[test]
    fn bfs_of_example() {
        assert_eq!(example_tree().bfs_sequence(), ["A", "B", "C", "x", "y", "z"]);
    }

    #[test]
    fn bfs_single_and_chain() {
        let single = AstTree::from_fragment(&Fragment::value("A"));
        assert_eq!(single.bfs_sequence(), ["A"]);
        let chain = AstTree::from_fragment(&Fragment::branch(
            "A",
            vec![Fragment::terminal("B", "c")],
        ));
        assert_eq!(chain.bfs_sequence(), ["A", "B", "c"]);
    }

    #[test]
    fn bfs_is_permutation_of_preorder_labels() {
        let t = example_tree();
        let mut bfs: Vec<String> = t.bfs_sequence().iter().map(|s| s.to_string()).collect();
        let mut pre: Vec<String> = t
            .preorder_nodes()
            .iter()
            .map(|&id| t.label(id).to_string())
            .collect();
        bfs.sort();
        pre.sort();
        assert_eq!(bfs, pre);
    }

    #[test]
    fn mask_replaces_value_leaves_only() {
        let masked = example_tree().mask_leaves();
        let labels: Vec<&str> = masked
            .preorder_nodes()
            .iter()
            .map(|&id| masked.label(id))
            .collect();
        assert_eq!(labels, ["A", "B", MASK_TOKEN, "C", MASK_TOKEN, MASK_TOKEN]);
        assert!(masked.structurally_eq(&example_tree()) == false);
        assert_eq!(masked.len(), example_tree().len());
    }

    #[test]
    fn mask_without_values_is_identity() {
        let t = AstTree::from_fragment(&Fragment::branch(
            "A",
            vec![Fragment::branch("B", vec![])],
        ));
        assert_eq!(t.mask_leaves(), t);
    }

    #[test]
    fn mask_single_value_node() {
        let t = AstTree::from_fragment(&Fragment::value("x"));
        let masked = t.mask_leaves();
        assert_eq!(masked.label(masked.root()), MASK_TOKEN);
        assert_eq!(masked.len(), 1);
    }

    #[test]
    fn validate_rejects_value_with_children() {
        let mut bad = Fragment::value("x");
        bad.children.push(Fragment::value("y"));
        let t = AstTree::from_fragment(&bad);
        assert_eq!(t.validate(), Err(TreeError::ValueWithChildren(NodeId(0))));
    }

    #[test]
    fn validate_rejects_terminal_with_nonvalue_child() {
        let t = AstTree::from_fragment(&Fragment {
            label: "T".into(),
            kind: NodeKind::Terminal,
            children: vec![Fragment::branch("B", vec![])],
        });
        assert!(matches!(t.validate(), Err(TreeError::TerminalChild(_))));
    }

    #[test]
    fn validate_rejects_shared_child() {
        let shared = NodeId(2);
        let nodes = vec![
            AstNode {
                id: NodeId(0),
                label: "A".into(),
                kind: NodeKind::NonTerminal,
                children: vec![NodeId(1), shared],
            },
            AstNode {
                id: NodeId(1),
                label: "B".into(),
                kind: NodeKind::NonTerminal,
                children: vec![shared],
            },
            AstNode {
                id: shared,
                label: "C".into(),
                kind: NodeKind::NonTerminal,
                children: vec![],
            },
        ];
        assert_eq!(
            AstTree::from_parts(nodes).unwrap_err(),
            TreeError::MultipleParents(shared)
        );
    }

    #[test]
    fn validate_accepts_example() {
        assert_eq!(example_tree().validate(), Ok(()));
    }

    #[test]
    fn depths_of_example() {
        let t = example_tree();
        assert_eq!(t.depths(), vec![1, 2, 3, 2, 3, 3]);
    }
}
