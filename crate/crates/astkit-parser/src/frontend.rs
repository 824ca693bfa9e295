//! Error-tolerant parsing of method-level snippets into canonical trees.
//!
//! A snippet is parsed as-is first; when the grammar needs a compilation
//! unit the snippet is re-parsed inside a synthetic `class __W { ... }`
//! wrapper and the wrapper is stripped from the result. Inputs with syntax
//! errors still produce a tree, with the number of error nodes reported.
//! Comments are stripped before parsing; annotations stay in the tree.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use thiserror::Error;

use astkit_core::ast::AstTree;

use crate::normalize::{normalize, Normalized};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Language {
    Java,
}

impl Language {
    pub fn name(self) -> &'static str {
        match self {
            Language::Java => "java",
        }
    }
}

impl FromStr for Language {
    type Err = ParseError;

    fn from_str(s: &str) -> Result<Self, ParseError> {
        match s.to_ascii_lowercase().as_str() {
            "java" => Ok(Language::Java),
            other => Err(ParseError::UnsupportedLanguage(other.to_string())),
        }
    }
}

impl fmt::Display for Language {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone)]
pub struct SourceSnippet {
    pub id: String,
    pub language: Language,
    pub code: String,
}

impl SourceSnippet {
    pub fn java(id: impl Into<String>, code: impl Into<String>) -> Self {
        SourceSnippet {
            id: id.into(),
            language: Language::Java,
            code: code.into(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct ParserConfig {
    pub language: Language,
    /// Drop anonymous pure-punctuation tokens (`{ } ( ) ; , .`).
    pub drop_punctuation: bool,
}

impl Default for ParserConfig {
    fn default() -> Self {
        ParserConfig {
            language: Language::Java,
            drop_punctuation: true,
        }
    }
}

#[derive(Debug, Error)]
pub enum ParseError {
    #[error("unsupported language {0:?}")]
    UnsupportedLanguage(String),
    #[error("input code is empty")]
    EmptyInput,
    #[error("language mismatch: frontend is configured for {expected}, snippet is {found}")]
    LanguageMismatch { expected: Language, found: Language },
    #[error("no method node and no parseable fragment in snippet {0:?}")]
    ParseFailure(String),
    #[error("grammar backend error: {0}")]
    Backend(String),
    #[error("failed to load grammar from {path}: {message}")]
    GrammarLoad { path: PathBuf, message: String },
}

/// Result of parsing one snippet.
#[derive(Debug, Clone)]
pub struct ParseOutcome {
    pub tree: AstTree,
    /// ERROR and missing nodes encountered while normalizing; 0 means the
    /// grammar accepted the input.
    pub error_node_count: usize,
    /// Whether the synthetic class wrapper was needed.
    pub wrapped: bool,
}

/// A parse plus the byte spans backing every node, for transforms that
/// need to slice source text (AST splitting). Spans index into `source`,
/// which is the exact text handed to the grammar (comments stripped,
/// wrapper included when one was added).
#[derive(Debug, Clone)]
pub struct ParsedMethod {
    pub outcome: ParseOutcome,
    pub spans: Vec<(u32, u32)>,
    pub source: String,
}

/// Name of the environment variable pointing at a directory of compiled
/// grammar libraries (`libtree-sitter-<language>.so`). When set and a
/// matching library exists there, it overrides the built-in grammar.
pub const GRAMMAR_DIR_ENV: &str = "ASTKIT_GRAMMAR_DIR";

fn resolve_language(language: Language) -> Result<tree_sitter::Language, ParseError> {
    if let Ok(dir) = std::env::var(GRAMMAR_DIR_ENV) {
        let path = PathBuf::from(dir).join(format!("libtree-sitter-{}.so", language.name()));
        if path.exists() {
            return load_dynamic_grammar(&path, language);
        }
    }
    match language {
        Language::Java => Ok(tree_sitter_java::LANGUAGE.into()),
    }
}

fn load_dynamic_grammar(
    path: &std::path::Path,
    language: Language,
) -> Result<tree_sitter::Language, ParseError> {
    let symbol_name = format!("tree_sitter_{}", language.name());
    unsafe {
        let lib = libloading::Library::new(path).map_err(|e| ParseError::GrammarLoad {
            path: path.to_path_buf(),
            message: e.to_string(),
        })?;
        let constructor: libloading::Symbol<unsafe extern "C" fn() -> *const ()> = lib
            .get(symbol_name.as_bytes())
            .map_err(|e| ParseError::GrammarLoad {
                path: path.to_path_buf(),
                message: e.to_string(),
            })?;
        let raw = constructor();
        // The library must stay loaded for as long as the language is used.
        std::mem::forget(lib);
        Ok(tree_sitter::Language::from_raw(raw as *const _))
    }
}

/// Hands out per-worker frontend instances; the grammar itself is shared.
#[derive(Clone)]
pub struct FrontendFactory {
    config: ParserConfig,
    language: tree_sitter::Language,
}

impl FrontendFactory {
    pub fn new(config: ParserConfig) -> Result<Self, ParseError> {
        let language = resolve_language(config.language)?;
        Ok(FrontendFactory { config, language })
    }

    pub fn create(&self) -> Frontend {
        let mut parser = tree_sitter::Parser::new();
        parser
            .set_language(&self.language)
            .expect("grammar version checked at load");
        Frontend {
            parser,
            config: self.config.clone(),
        }
    }
}

/// One parser instance; confine each to a single worker.
pub struct Frontend {
    parser: tree_sitter::Parser,
    config: ParserConfig,
}

const METHOD_KINDS: [&str; 2] = ["method_declaration", "constructor_declaration"];

fn find_method(node: tree_sitter::Node) -> Option<tree_sitter::Node> {
    if METHOD_KINDS.contains(&node.kind()) {
        return Some(node);
    }
    let mut cursor = node.walk();
    for child in node.children(&mut cursor) {
        if let Some(found) = find_method(child) {
            return Some(found);
        }
    }
    None
}

impl Frontend {
    pub fn config(&self) -> &ParserConfig {
        &self.config
    }

    pub fn parse_method(&mut self, snippet: &SourceSnippet) -> Result<ParseOutcome, ParseError> {
        self.parse_method_detailed(snippet).map(|d| d.outcome)
    }

    /// Parses and also returns node byte spans and the parsed source text.
    pub fn parse_method_detailed(
        &mut self,
        snippet: &SourceSnippet,
    ) -> Result<ParsedMethod, ParseError> {
        if snippet.language != self.config.language {
            return Err(ParseError::LanguageMismatch {
                expected: self.config.language,
                found: snippet.language,
            });
        }
        let stripped = strip_comments(&snippet.code);
        if stripped.trim().is_empty() {
            return Err(ParseError::EmptyInput);
        }

        let bare_tree = self
            .parser
            .parse(&stripped, None)
            .ok_or_else(|| ParseError::Backend("parser returned no tree".into()))?;
        let bare = find_method(bare_tree.root_node())
            .map(|m| normalize(m, &stripped, self.config.drop_punctuation));

        if let Some(n) = &bare {
            if n.errors == 0 {
                return Ok(assemble(n.clone(), &stripped, false));
            }
        }

        let wrapped_source = format!("class __W {{\n{stripped}\n}}");
        let wrapped_tree = self
            .parser
            .parse(&wrapped_source, None)
            .ok_or_else(|| ParseError::Backend("parser returned no tree".into()))?;
        let wrapped = find_method(wrapped_tree.root_node())
            .map(|m| normalize(m, &wrapped_source, self.config.drop_punctuation));

        match (bare, wrapped) {
            (Some(b), Some(w)) => {
                if w.errors < b.errors {
                    Ok(assemble(w, &wrapped_source, true))
                } else {
                    Ok(assemble(b, &stripped, false))
                }
            }
            (Some(b), None) => Ok(assemble(b, &stripped, false)),
            (None, Some(w)) => Ok(assemble(w, &wrapped_source, true)),
            (None, None) => {
                // No method anywhere; fall back to whatever fragments the
                // grammar recovered from the bare input.
                let fallback = normalize(
                    bare_tree.root_node(),
                    &stripped,
                    self.config.drop_punctuation,
                );
                if fallback.nodes.len() <= 1 {
                    return Err(ParseError::ParseFailure(snippet.id.clone()));
                }
                Ok(assemble(fallback, &stripped, false))
            }
        }
    }
}

fn assemble(normalized: Normalized, source: &str, wrapped: bool) -> ParsedMethod {
    let Normalized {
        nodes,
        spans,
        errors,
    } = normalized;
    let tree = AstTree::from_parts(nodes).expect("normalizer emits valid trees");
    ParsedMethod {
        outcome: ParseOutcome {
            tree,
            error_node_count: errors,
            wrapped,
        },
        spans,
        source: source.to_string(),
    }
}

/// Removes `//` and `/* */` comments outside string, character and text
/// block literals. Block comments become a single space so adjacent tokens
/// stay separated; line comments keep their newline.
pub fn strip_comments(code: &str) -> String {
    let bytes = code.as_bytes();
    let mut out = String::with_capacity(code.len());
    let mut i = 0;
    while i < bytes.len() {
        match bytes[i] {
            b'/' if i + 1 < bytes.len() && bytes[i + 1] == b'/' => {
                while i < bytes.len() && bytes[i] != b'\n' {
                    i += 1;
                }
            }
            b'/' if i + 1 < bytes.len() && bytes[i + 1] == b'*' => {
                i += 2;
                while i + 1 < bytes.len() && !(bytes[i] == b'*' && bytes[i + 1] == b'/') {
                    i += 1;
                }
                i = (i + 2).min(bytes.len());
                out.push(' ');
            }
            b'"' => {
                if bytes[i..].starts_with(b"\"\"\"") {
                    out.push_str("\"\"\"");
                    i += 3;
                    while i < bytes.len() && !bytes[i..].starts_with(b"\"\"\"") {
                        out.push(bytes[i] as char);
                        i += 1;
                    }
                    if i < bytes.len() {
                        out.push_str("\"\"\"");
                        i += 3;
                    }
                } else {
                    out.push('"');
                    i += 1;
                    while i < bytes.len() && bytes[i] != b'"' {
                        if bytes[i] == b'\\' && i + 1 < bytes.len() {
                            out.push(bytes[i] as char);
                            i += 1;
                        }
                        out.push(bytes[i] as char);
                        i += 1;
                    }
                    if i < bytes.len() {
                        out.push('"');
                        i += 1;
                    }
                }
            }
            b'\'' => {
                out.push('\'');
                i += 1;
                while i < bytes.len() && bytes[i] != b'\'' {
                    if bytes[i] == b'\\' && i + 1 < bytes.len() {
                        out.push(bytes[i] as char);
                        i += 1;
                    }
                    out.push(bytes[i] as char);
                    i += 1;
                }
                if i < bytes.len() {
                    out.push('\'');
                    i += 1;
                }
            }
            b => {
                // Multibyte characters pass through unchanged.
                let ch_len = utf8_len(b);
                out.push_str(&code[i..i + ch_len]);
                i += ch_len;
            }
        }
    }
    out
}

fn utf8_len(first_byte: u8) -> usize {
    match first_byte {
        0x00..=0x7f => 1,
        0xc0..=0xdf => 2,
        0xe0..=0xef => 3,
        _ => 4,
    }
}

/// Counts unbalanced opening braces outside string and character literals,
/// for closing off emitted split code.
pub fn brace_debt(text: &str) -> usize {
    let bytes = text.as_bytes();
    let mut depth: i64 = 0;
    let mut i = 0;
    while i < bytes.len() {
        match bytes[i] {
            b'{' => depth += 1,
            b'}' => depth -= 1,
            b'"' => {
                if bytes[i..].starts_with(b"\"\"\"") {
                    i += 3;
                    while i < bytes.len() && !bytes[i..].starts_with(b"\"\"\"") {
                        i += 1;
                    }
                    i += 2;
                } else {
                    i += 1;
                    while i < bytes.len() && bytes[i] != b'"' {
                        if bytes[i] == b'\\' {
                            i += 1;
                        }
                        i += 1;
                    }
                }
            }
            b'\'' => {
                i += 1;
                while i < bytes.len() && bytes[i] != b'\'' {
                    if bytes[i] == b'\\' {
                        i += 1;
                    }
                    i += 1;
                }
            }
            _ => {}
        }
        i += 1;
    }
    depth.max(0) as usize
}

#[cfg(test)]
mod tests {
    use super::*;
    use astkit_core::ast::NodeKind;

    fn frontend() -> Frontend {
        FrontendFactory::new(ParserConfig::default())
            .unwrap()
            .create()
    }

    #[test]
    fn well_formed_method_parses_clean() {
        let mut fe = frontend();
        let out = fe
            .parse_method(&SourceSnippet::java("m1", "int id(int a){return a;}"))
            .unwrap();
        assert_eq!(out.error_node_count, 0);
        assert_eq!(out.tree.label(out.tree.root()), "method_declaration");
        assert!(!out.wrapped);
    }

    #[test]
    fn broken_method_yields_tree_with_errors() {
        let mut fe = frontend();
        let out = fe
            .parse_method(&SourceSnippet::java("m2", "int f( {"))
            .unwrap();
        assert!(out.error_node_count >= 1);
        assert!(out.tree.len() > 1);
    }

    #[test]
    fn empty_input_is_an_error() {
        let mut fe = frontend();
        assert!(matches!(
            fe.parse_method(&SourceSnippet::java("m3", "   ")),
            Err(ParseError::EmptyInput)
        ));
        assert!(matches!(
            fe.parse_method(&SourceSnippet::java("m4", "// just a comment")),
            Err(ParseError::EmptyInput)
        ));
    }

    #[test]
    fn wrapping_is_invisible() {
        let mut fe = frontend();
        let code = "public <T> void copy(java.util.List<T> xs) { xs.clear(); }";
        let bare = fe.parse_method(&SourceSnippet::java("a", code)).unwrap();
        let pre_wrapped = fe
            .parse_method(&SourceSnippet::java(
                "b",
                format!("class __W {{ {code} }}"),
            ))
            .unwrap();
        assert!(bare.tree.structurally_eq(&pre_wrapped.tree));
    }

    #[test]
    fn parse_is_deterministic() {
        let mut fe = frontend();
        let snip = SourceSnippet::java("d", "void go() { int i = compare(1, 2); }");
        let a = fe.parse_method(&snip).unwrap();
        let b = fe.parse_method(&snip).unwrap();
        assert_eq!(a.tree, b.tree);
        assert_eq!(a.wrapped, b.wrapped);
    }

    #[test]
    fn identifier_becomes_terminal_with_value() {
        let mut fe = frontend();
        let out = fe
            .parse_method(&SourceSnippet::java("m5", "int compare(){return 0;}"))
            .unwrap();
        let t = &out.tree;
        let hit = t
            .nodes()
            .find(|n| n.label == "identifier" && n.kind == NodeKind::Terminal)
            .expect("identifier terminal");
        assert_eq!(t.label(hit.children[0]), "compare");
        assert_eq!(t.kind(hit.children[0]), NodeKind::Value);
    }

    #[test]
    fn punctuation_flag_controls_node_count() {
        let code = "void m() { f(1, 2); }";
        let dropped = frontend()
            .parse_method(&SourceSnippet::java("p", code))
            .unwrap();
        let kept = FrontendFactory::new(ParserConfig {
            drop_punctuation: false,
            ..ParserConfig::default()
        })
        .unwrap()
        .create()
        .parse_method(&SourceSnippet::java("p", code))
        .unwrap();
        assert!(kept.tree.len() > dropped.tree.len());
        assert!(!dropped.tree.nodes().any(|n| n.label == ";"));
        assert!(kept.tree.nodes().any(|n| n.label == ";"));
    }

    #[test]
    fn comments_are_stripped_annotations_kept() {
        let mut fe = frontend();
        let code = "/** javadoc */\n@Override // note\npublic int f() { return 1; /* x */ }";
        let out = fe.parse_method(&SourceSnippet::java("c", code)).unwrap();
        assert_eq!(out.error_node_count, 0);
        assert!(!out.tree.nodes().any(|n| n.label.contains("comment")));
        assert!(out.tree.nodes().any(|n| n.label == "marker_annotation"));
    }

    #[test]
    fn strip_comments_respects_strings() {
        assert_eq!(
            strip_comments("String s = \"a//b\"; // tail"),
            "String s = \"a//b\"; "
        );
        assert_eq!(strip_comments("a/*x*/b"), "a b");
        assert_eq!(strip_comments("char c = '\"'; // q"), "char c = '\"'; ");
    }

    #[test]
    fn brace_debt_ignores_literals() {
        assert_eq!(brace_debt("void m() {"), 1);
        assert_eq!(brace_debt("if (x) { y(\"{{{\");"), 1);
        assert_eq!(brace_debt("int[] a = {1, 2};"), 0);
        assert_eq!(brace_debt("char c = '{';"), 0);
    }

    #[test]
    fn class_snippet_without_method_falls_back() {
        let mut fe = frontend();
        let out = fe
            .parse_method(&SourceSnippet::java("k", "class A { int x; }"))
            .unwrap();
        assert_eq!(out.error_node_count, 0);
        assert_eq!(out.tree.label(out.tree.root()), "program");
    }

    #[test]
    fn spans_slice_the_parsed_source() {
        let mut fe = frontend();
        let detailed = fe
            .parse_method_detailed(&SourceSnippet::java("s", "int f() { return 42; }"))
            .unwrap();
        let t = &detailed.outcome.tree;
        let ret = t
            .nodes()
            .find(|n| n.label == "return_statement")
            .expect("return statement");
        let (lo, hi) = detailed.spans[ret.id.index()];
        assert_eq!(&detailed.source[lo as usize..hi as usize], "return 42;");
    }
}
