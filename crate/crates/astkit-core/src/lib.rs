//! Method-level AST feature engineering: a canonical tree model with exact
//! serialization, the standard preprocessing transforms (BFS, SBT, path
//! contexts, binary trees, dominator-based splitting, relation matrices),
//! sample-characterization metrics, and reference implementations of the
//! clone-detection, retrieval and summarization evaluation metrics.

pub mod ast;
pub mod binary;
pub mod cfg;
pub mod dominator;
pub mod eval;
pub mod exec;
pub mod metrics;
pub mod paths;
pub mod relmat;
pub mod sample;
pub mod sbt;
pub mod sexpr;
pub mod tokenize;
pub mod treegen;

pub use ast::{AstNode, AstTree, Fragment, NodeId, NodeKind, TreeError, MASK_TOKEN};
pub use sexpr::{parse_sexpr, to_sexpr};
