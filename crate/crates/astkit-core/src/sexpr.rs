//! Line-oriented s-expression interchange format for trees.
//!
//! One tree per line: internal nodes render as `(LABEL child child ...)`,
//! value leaves as double-quoted strings with backslash escapes for `"`,
//! `\` and newline, and a terminal with its value as `(LABEL "value")`.
//! Labels render bare unless they contain whitespace, brackets, quotes or
//! backslashes, in which case they are quoted like values. Node kinds are
//! recovered from the syntax: quoted leaves are values, internal nodes
//! whose children are all values are terminals, everything else is a
//! non-terminal — exact for every tree that passes validation.

use thiserror::Error;

use crate::ast::{AstTree, Fragment, NodeId, NodeKind};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SexprError {
    #[error("unexpected end of input at byte {0}")]
    UnexpectedEnd(usize),
    #[error("unexpected character {0:?} at byte {1}")]
    UnexpectedChar(char, usize),
    #[error("invalid escape sequence at byte {0}")]
    BadEscape(usize),
    #[error("trailing content at byte {0}")]
    TrailingContent(usize),
    #[error("empty input")]
    Empty,
}

fn label_needs_quoting(label: &str) -> bool {
    label.is_empty()
        || label
            .chars()
            .any(|c| c.is_whitespace() || matches!(c, '(' | ')' | '"' | '\\'))
}

fn push_quoted(out: &mut String, text: &str) {
    out.push('"');
    for c in text.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            _ => out.push(c),
        }
    }
    out.push('"');
}

/// Renders a tree as a single-line s-expression.
pub fn to_sexpr(tree: &AstTree) -> String {
    enum Step {
        Open(NodeId),
        Close,
    }
    let mut out = String::new();
    let mut stack = vec![Step::Open(tree.root())];
    while let Some(step) = stack.pop() {
        match step {
            Step::Open(id) => {
                if !out.is_empty() && !out.ends_with('(') {
                    out.push(' ');
                }
                let node = tree.node(id);
                if node.kind == NodeKind::Value {
                    push_quoted(&mut out, &node.label);
                } else {
                    out.push('(');
                    if label_needs_quoting(&node.label) {
                        push_quoted(&mut out, &node.label);
                    } else {
                        out.push_str(&node.label);
                    }
                    stack.push(Step::Close);
                    for &child in node.children.iter().rev() {
                        stack.push(Step::Open(child));
                    }
                }
            }
            Step::Close => out.push(')'),
        }
    }
    out
}

/// Parses one s-expression line back into a tree, inferring node kinds.
pub fn parse_sexpr(input: &str) -> Result<AstTree, SexprError> {
    let bytes = input.as_bytes();
    let mut pos = 0usize;

    fn skip_ws(bytes: &[u8], pos: &mut usize) {
        while *pos < bytes.len() && (bytes[*pos] as char).is_whitespace() {
            *pos += 1;
        }
    }

    fn parse_quoted(input: &str, pos: &mut usize) -> Result<String, SexprError> {
        let bytes = input.as_bytes();
        debug_assert_eq!(bytes[*pos], b'"');
        *pos += 1;
        let mut text = String::new();
        loop {
            let rest = &input[*pos..];
            let mut chars = rest.char_indices();
            match chars.next() {
                None => return Err(SexprError::UnexpectedEnd(*pos)),
                Some((_, '"')) => {
                    *pos += 1;
                    return Ok(text);
                }
                Some((_, '\\')) => match chars.next() {
                    Some((i, '"')) => {
                        text.push('"');
                        *pos += i + 1;
                    }
                    Some((i, '\\')) => {
                        text.push('\\');
                        *pos += i + 1;
                    }
                    Some((i, 'n')) => {
                        text.push('\n');
                        *pos += i + 1;
                    }
                    _ => return Err(SexprError::BadEscape(*pos)),
                },
                Some((i, c)) => {
                    text.push(c);
                    *pos += i + c.len_utf8();
                }
            }
        }
    }

    fn parse_bare(input: &str, pos: &mut usize) -> String {
        let start = *pos;
        for (i, c) in input[start..].char_indices() {
            if c.is_whitespace() || matches!(c, '(' | ')' | '"' | '\\') {
                *pos = start + i;
                return input[start..*pos].to_string();
            }
        }
        *pos = input.len();
        input[start..].to_string()
    }

    // Stack of open internal nodes: (label, children built so far).
    let mut open: Vec<(String, Vec<Fragment>)> = Vec::new();
    let finished: Fragment;

    skip_ws(bytes, &mut pos);
    if pos >= bytes.len() {
        return Err(SexprError::Empty);
    }
    loop {
        skip_ws(bytes, &mut pos);
        if pos >= bytes.len() {
            return Err(SexprError::UnexpectedEnd(pos));
        }
        match bytes[pos] {
            b'(' => {
                pos += 1;
                skip_ws(bytes, &mut pos);
                if pos >= bytes.len() {
                    return Err(SexprError::UnexpectedEnd(pos));
                }
                let label = if bytes[pos] == b'"' {
                    parse_quoted(input, &mut pos)?
                } else if bytes[pos] == b'(' || bytes[pos] == b')' {
                    return Err(SexprError::UnexpectedChar(bytes[pos] as char, pos));
                } else {
                    parse_bare(input, &mut pos)
                };
                open.push((label, Vec::new()));
            }
            b')' => {
                pos += 1;
                let (label, children) = match open.pop() {
                    Some(top) => top,
                    None => return Err(SexprError::UnexpectedChar(')', pos - 1)),
                };
                let kind = if !children.is_empty()
                    && children.iter().all(|c| c.kind == NodeKind::Value)
                {
                    NodeKind::Terminal
                } else {
                    NodeKind::NonTerminal
                };
                let node = Fragment {
                    label,
                    kind,
                    children,
                };
                match open.last_mut() {
                    Some((_, siblings)) => siblings.push(node),
                    None => {
                        finished = node;
                        break;
                    }
                }
            }
            b'"' => {
                let text = parse_quoted(input, &mut pos)?;
                let leaf = Fragment::value(text);
                match open.last_mut() {
                    Some((_, siblings)) => siblings.push(leaf),
                    None => {
                        // A bare quoted string is a single value-node tree.
                        finished = leaf;
                        break;
                    }
                }
            }
            c => return Err(SexprError::UnexpectedChar(c as char, pos)),
        }
    }
    skip_ws(bytes, &mut pos);
    if pos < bytes.len() {
        return Err(SexprError::TrailingContent(pos));
    }
    Ok(AstTree::from_fragment(&finished))
}

#[cfg(test)]
mod tests {
    use super::*;

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

    #[test]
    fn renders_example() {
        assert_eq!(to_sexpr(&example_tree()), r#"(A (B "x") (C "y" "z"))"#);
    }

    #[test]
    fn round_trips_exactly_with_kinds() {
        let t = example_tree();
        assert_eq!(parse_sexpr(&to_sexpr(&t)).unwrap(), t);
    }

    #[test]
    fn single_value_node() {
        let t = AstTree::from_fragment(&Fragment::value("x y\n\"z\\"));
        let line = to_sexpr(&t);
        assert_eq!(line, r#""x y\n\"z\\""#);
        assert_eq!(parse_sexpr(&line).unwrap(), t);
    }

    #[test]
    fn quoted_label_round_trip() {
        let t = AstTree::from_fragment(&Fragment::branch(
            "has space(",
            vec![Fragment::branch("plain", vec![])],
        ));
        let line = to_sexpr(&t);
        assert_eq!(parse_sexpr(&line).unwrap(), t);
    }

    #[test]
    fn childless_nonterminal_keeps_kind() {
        let t = AstTree::from_fragment(&Fragment::branch("block", vec![]));
        let parsed = parse_sexpr("(block)").unwrap();
        assert_eq!(parsed, t);
        assert_eq!(parsed.kind(parsed.root()), NodeKind::NonTerminal);
    }

    #[test]
    fn rejects_malformed() {
        assert!(matches!(parse_sexpr("(A (B)"), Err(SexprError::UnexpectedEnd(_))));
        assert!(matches!(parse_sexpr("(A))"), Err(SexprError::TrailingContent(_))));
        assert!(matches!(parse_sexpr(""), Err(SexprError::Empty)));
        assert!(matches!(parse_sexpr(r#"(A "x)"#), Err(SexprError::UnexpectedEnd(_))));
        assert!(matches!(parse_sexpr(r#""a\q""#), Err(SexprError::BadEscape(_))));
    }
}
