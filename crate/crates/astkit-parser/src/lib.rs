//! Grammar-backed parser frontend: turns raw method-level source snippets
//! into canonical trees, tolerating syntax errors, plus the source-aware
//! dominator-tree AST splitter.

pub mod frontend;
pub mod normalize;
pub mod split;

pub use frontend::{
    Frontend, FrontendFactory, Language, ParseError, ParseOutcome, ParsedMethod, ParserConfig,
    SourceSnippet, GRAMMAR_DIR_ENV,
};
pub use normalize::normalize_tree;
pub use split::{split_asts, SplitAstSet, SplitError};
