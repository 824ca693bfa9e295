//! Structure-based traversal: the bracketed preorder linearization
//! `( label children... ) label` from which the tree is exactly
//! recoverable. Every node contributes one opening bracket, one closing
//! bracket and two label tokens, so the sequence has length `4n`.

use thiserror::Error;

use crate::ast::{AstTree, Fragment, NodeId, NodeKind, MASK_TOKEN};

pub const OPEN: &str = "(";
pub const CLOSE: &str = ")";

const ESCAPED_MASK: &str = "\\<mask>";

/// Encodes a tree as its SBT token sequence.
pub fn sbt_encode(tree: &AstTree) -> Vec<String> {
    enum Step {
        Open(NodeId),
        Close(NodeId),
    }
    let mut tokens = Vec::with_capacity(tree.len() * 4);
    let mut stack = vec![Step::Open(tree.root())];
    while let Some(step) = stack.pop() {
        match step {
            Step::Open(id) => {
                tokens.push(OPEN.to_string());
                tokens.push(tree.label(id).to_string());
                stack.push(Step::Close(id));
                for &child in tree.children(id).iter().rev() {
                    stack.push(Step::Open(child));
                }
            }
            Step::Close(id) => {
                tokens.push(CLOSE.to_string());
                tokens.push(tree.label(id).to_string());
            }
        }
    }
    tokens
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SbtError {
    #[error("empty token sequence")]
    Empty,
    #[error("expected '(' at token {0}")]
    ExpectedOpen(usize),
    #[error("unexpected end of sequence at token {0}")]
    UnexpectedEnd(usize),
    #[error("closing label {found:?} at token {position} does not match {expected:?}")]
    LabelMismatch {
        position: usize,
        expected: String,
        found: String,
    },
    #[error("trailing tokens at token {0}")]
    TrailingTokens(usize),
}

/// Decodes an SBT token sequence back into a tree.
///
/// Node kinds are inferred: leaves become values and internal nodes whose
/// children are all values become terminals, so decode(encode(t)) is
/// structurally identical to t for every valid tree.
pub fn sbt_decode<S: AsRef<str>>(tokens: &[S]) -> Result<AstTree, SbtError> {
    if tokens.is_empty() {
        return Err(SbtError::Empty);
    }
    let tok = |i: usize| -> Option<&str> { tokens.get(i).map(|s| s.as_ref()) };
    let mut pos = 0usize;
    // Open frames: (label, children).
    let mut open: Vec<(String, Vec<Fragment>)> = Vec::new();
    let root: Fragment;
    loop {
        match tok(pos) {
            None => return Err(SbtError::UnexpectedEnd(pos)),
            Some(OPEN) => {
                let label = tok(pos + 1).ok_or(SbtError::UnexpectedEnd(pos + 1))?;
                open.push((label.to_string(), Vec::new()));
                pos += 2;
            }
            Some(CLOSE) => {
                let (label, children) = open.pop().ok_or(SbtError::ExpectedOpen(pos))?;
                let closing = tok(pos + 1).ok_or(SbtError::UnexpectedEnd(pos + 1))?;
                if closing != label {
                    return Err(SbtError::LabelMismatch {
                        position: pos + 1,
                        expected: label,
                        found: closing.to_string(),
                    });
                }
                let kind = if children.is_empty() {
                    NodeKind::Value
                } else if children.iter().all(|c| c.kind == NodeKind::Value) {
                    NodeKind::Terminal
                } else {
                    NodeKind::NonTerminal
                };
                let node = Fragment {
                    label,
                    kind,
                    children,
                };
                pos += 2;
                match open.last_mut() {
                    Some((_, siblings)) => siblings.push(node),
                    None => {
                        root = node;
                        break;
                    }
                }
            }
            Some(_) => return Err(SbtError::ExpectedOpen(pos)),
        }
    }
    if pos < tokens.len() {
        return Err(SbtError::TrailingTokens(pos));
    }
    Ok(AstTree::from_fragment(&root))
}

fn needs_escape(c: char) -> bool {
    c.is_whitespace() || matches!(c, '%' | '(' | ')' | '\\')
}

fn hex_val(b: u8) -> u8 {
    match b {
        b'0'..=b'9' => b - b'0',
        b'a'..=b'f' => b - b'a' + 10,
        _ => b - b'A' + 10,
    }
}

/// Percent-escapes whitespace, brackets, percent signs and backslashes so
/// escaped tokens never collide with structural brackets or separators.
pub fn percent_escape(token: &str) -> String {
    if !token.is_empty() && !token.chars().any(needs_escape) {
        return token.to_string();
    }
    let mut out = String::with_capacity(token.len());
    for c in token.chars() {
        if needs_escape(c) {
            let mut buf = [0u8; 4];
            for b in c.encode_utf8(&mut buf).bytes() {
                out.push_str(&format!("%{b:02X}"));
            }
        } else {
            out.push(c);
        }
    }
    if out.is_empty() {
        // Empty labels still need a visible token.
        out.push_str("%00");
    }
    out
}

/// Undoes [`percent_escape`]; `%00` stands for the empty label.
pub fn percent_unescape(token: &str) -> String {
    let bytes = token.as_bytes();
    let mut out = Vec::with_capacity(bytes.len());
    let mut i = 0;
    while i < bytes.len() {
        if bytes[i] == b'%' && i + 2 < bytes.len() {
            let (hi, lo) = (bytes[i + 1], bytes[i + 2]);
            if hi.is_ascii_hexdigit() && lo.is_ascii_hexdigit() {
                let byte = (hex_val(hi) << 4) | hex_val(lo);
                if byte != 0 {
                    out.push(byte);
                }
                i += 3;
                continue;
            }
        }
        out.push(bytes[i]);
        i += 1;
    }
    String::from_utf8_lossy(&out).into_owned()
}

/// Joins SBT tokens into one serialized line, escaping label tokens so the
/// structural brackets stay unambiguous.
///
/// When `masked` is false, a label literally equal to the reserved
/// [`MASK_TOKEN`] renders as `\<mask>` so consumers can tell a corpus token
/// from a masking artifact; masked renderings emit `<mask>` untouched.
pub fn render_sbt_line(tokens: &[String], masked: bool) -> String {
    // Every node renders as "( label ... ) label", so a bracket token is
    // structural exactly when it does not directly follow a structural
    // bracket. Label tokens equal to a bare bracket get escaped.
    let mut parts = Vec::with_capacity(tokens.len());
    let mut at_label = false;
    for t in tokens {
        if !at_label && (t == OPEN || t == CLOSE) {
            parts.push(t.clone());
            at_label = true;
        } else {
            if !masked && t == MASK_TOKEN {
                parts.push(format!("\\{MASK_TOKEN}"));
            } else {
                parts.push(percent_escape(t));
            }
            at_label = false;
        }
    }
    parts.join(" ")
}

/// Splits a serialized SBT line back into tokens, undoing escapes.
pub fn parse_sbt_line(line: &str) -> Vec<String> {
    line.split(' ')
        .filter(|t| !t.is_empty())
        .map(|t| {
            if t == OPEN || t == CLOSE {
                t.to_string()
            } else if t == ESCAPED_MASK {
                MASK_TOKEN.to_string()
            } else {
                percent_unescape(t)
            }
        })
        .collect()
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

    #[test]
    fn encodes_single_node() {
        let t = AstTree::from_fragment(&Fragment::value("A"));
        assert_eq!(sbt_encode(&t), ["(", "A", ")", "A"]);
    }

    #[test]
    fn encodes_example() {
        let expected: Vec<&str> = "( A ( B ( x ) x ) B ( C ( y ) y ( z ) z ) C ) A"
            .split(' ')
            .collect();
        assert_eq!(sbt_encode(&example_tree()), expected);
    }

    #[test]
    fn encodes_chain() {
        let t = AstTree::from_fragment(&Fragment::branch(
            "A",
            vec![Fragment::branch("B", vec![])],
        ));
        assert_eq!(sbt_encode(&t), ["(", "A", "(", "B", ")", "B", ")", "A"]);
    }

    #[test]
    fn sequence_length_is_four_per_node() {
        let t = example_tree();
        assert_eq!(sbt_encode(&t).len(), 4 * t.len());
    }

    #[test]
    fn decodes_single_node() {
        let t = sbt_decode(&["(", "A", ")", "A"]).unwrap();
        assert_eq!(t.len(), 1);
        assert_eq!(t.label(t.root()), "A");
        assert_eq!(t.kind(t.root()), NodeKind::Value);
    }

    #[test]
    fn round_trips_example() {
        let t = example_tree();
        let decoded = sbt_decode(&sbt_encode(&t)).unwrap();
        assert!(decoded.structurally_eq(&t));
    }

    #[test]
    fn mismatched_close_label_is_an_error() {
        let err = sbt_decode(&["(", "A", "(", "B", ")", "C", ")", "A"]).unwrap_err();
        assert_eq!(
            err,
            SbtError::LabelMismatch {
                position: 5,
                expected: "B".into(),
                found: "C".into(),
            }
        );
    }

    #[test]
    fn unbalanced_input_is_an_error() {
        assert!(matches!(
            sbt_decode(&["(", "A", "(", "B", ")", "B"]),
            Err(SbtError::UnexpectedEnd(_))
        ));
        assert!(matches!(
            sbt_decode(&["(", "A", ")", "A", ")"]),
            Err(SbtError::TrailingTokens(4))
        ));
        assert!(matches!(sbt_decode::<&str>(&[]), Err(SbtError::Empty)));
    }

    #[test]
    fn line_round_trip_with_awkward_labels() {
        let t = AstTree::from_fragment(&Fragment::branch(
            "has space",
            vec![
                Fragment::terminal("(", "100% sure"),
                Fragment::terminal("id", MASK_TOKEN),
            ],
        ));
        let tokens = sbt_encode(&t);
        let line = render_sbt_line(&tokens, false);
        assert!(line.contains("\\<mask>"));
        assert_eq!(parse_sbt_line(&line), tokens);
        let decoded = sbt_decode(&parse_sbt_line(&line)).unwrap();
        assert!(decoded.structurally_eq(&t));
    }

    #[test]
    fn masked_line_keeps_mask_token_raw() {
        let masked = example_tree().mask_leaves();
        let line = render_sbt_line(&sbt_encode(&masked), true);
        assert!(line.contains(MASK_TOKEN));
        assert!(!line.contains("\\<mask>"));
    }
}
