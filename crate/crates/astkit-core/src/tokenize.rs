//! Identifier sub-tokenization and text tokenizers.
//!
//! The simple tokenizer splits on non-alphanumeric characters, camelCase
//! boundaries and letter/digit boundaries, then lowercases — deterministic
//! and dependency-free. An external tokenizer command can be plugged in for
//! studies that need a learned subword vocabulary; it receives the text on
//! stdin and must print whitespace-separated tokens on stdout.

use std::collections::BTreeMap;
use std::io::Write;
use std::process::{Command, Stdio};

use thiserror::Error;

/// Splits one alphanumeric run at case and letter/digit boundaries.
fn split_run(run: &str, out: &mut Vec<String>) {
    let chars: Vec<char> = run.chars().collect();
    let mut start = 0;
    for i in 1..chars.len() {
        let (prev, cur) = (chars[i - 1], chars[i]);
        let boundary = (prev.is_lowercase() && cur.is_uppercase())
            || (prev.is_alphabetic() && cur.is_numeric())
            || (prev.is_numeric() && cur.is_alphabetic())
            // End of an acronym: "HTTPServer" splits before "Server".
            || (prev.is_uppercase()
                && cur.is_uppercase()
                && chars.get(i + 1).is_some_and(|c| c.is_lowercase()));
        if boundary {
            out.push(chars[start..i].iter().collect::<String>().to_lowercase());
            start = i;
        }
    }
    out.push(chars[start..].iter().collect::<String>().to_lowercase());
}

/// Lowercased sub-tokens of arbitrary text; empty tokens are dropped.
pub fn subtokens(text: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut run = String::new();
    for c in text.chars() {
        if c.is_alphanumeric() {
            run.push(c);
        } else if !run.is_empty() {
            split_run(&run, &mut out);
            run.clear();
        }
    }
    if !run.is_empty() {
        split_run(&run, &mut out);
    }
    out
}

/// Token multiset with a set view, as produced by [`tokenize`].
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TokenBag {
    counts: BTreeMap<String, usize>,
    total: usize,
}

impl TokenBag {
    pub fn from_tokens<I: IntoIterator<Item = String>>(tokens: I) -> Self {
        let mut counts = BTreeMap::new();
        let mut total = 0;
        for t in tokens {
            *counts.entry(t).or_insert(0) += 1;
            total += 1;
        }
        TokenBag { counts, total }
    }

    /// Distinct tokens in sorted order.
    pub fn set(&self) -> impl Iterator<Item = &str> {
        self.counts.keys().map(|s| s.as_str())
    }

    pub fn count(&self, token: &str) -> usize {
        self.counts.get(token).copied().unwrap_or(0)
    }

    pub fn distinct(&self) -> usize {
        self.counts.len()
    }

    pub fn total(&self) -> usize {
        self.total
    }

    pub fn is_empty(&self) -> bool {
        self.total == 0
    }

    pub fn contains(&self, token: &str) -> bool {
        self.counts.contains_key(token)
    }

    pub fn intersection_size(&self, other: &TokenBag) -> usize {
        self.counts
            .keys()
            .filter(|t| other.contains(t))
            .count()
    }

    pub fn union_size(&self, other: &TokenBag) -> usize {
        self.distinct() + other.distinct() - self.intersection_size(other)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TokenizerConfig {
    /// Built-in rule-based sub-tokenizer.
    Simple,
    /// External command invoked per text; argv[0] plus arguments.
    External { command: Vec<String> },
}

impl Default for TokenizerConfig {
    fn default() -> Self {
        TokenizerConfig::Simple
    }
}

#[derive(Debug, Error)]
pub enum TokenizeError {
    #[error("external tokenizer command is empty")]
    EmptyCommand,
    #[error("external tokenizer failed to run: {0}")]
    Spawn(#[from] std::io::Error),
    #[error("external tokenizer exited with status {0}")]
    Failed(String),
}

/// Tokenizes text under the given configuration.
pub fn tokenize(text: &str, config: &TokenizerConfig) -> Result<TokenBag, TokenizeError> {
    match config {
        TokenizerConfig::Simple => Ok(TokenBag::from_tokens(subtokens(text))),
        TokenizerConfig::External { command } => {
            let (prog, args) = command.split_first().ok_or(TokenizeError::EmptyCommand)?;
            let mut child = Command::new(prog)
                .args(args)
                .stdin(Stdio::piped())
                .stdout(Stdio::piped())
                .stderr(Stdio::null())
                .spawn()?;
            child
                .stdin
                .take()
                .expect("stdin piped")
                .write_all(text.as_bytes())?;
            let output = child.wait_with_output()?;
            if !output.status.success() {
                return Err(TokenizeError::Failed(output.status.to_string()));
            }
            let stdout = String::from_utf8_lossy(&output.stdout);
            Ok(TokenBag::from_tokens(
                stdout.split_whitespace().map(|s| s.to_string()),
            ))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn splits_camel_case_and_digits() {
        assert_eq!(subtokens("getMaxValue2"), ["get", "max", "value", "2"]);
    }

    #[test]
    fn empty_text_gives_no_tokens() {
        assert!(subtokens("").is_empty());
        assert!(subtokens("  \t!@#").is_empty());
    }

    #[test]
    fn separators_and_counts() {
        let bag = tokenize("a_b a-b", &TokenizerConfig::Simple).unwrap();
        assert_eq!(bag.set().collect::<Vec<_>>(), ["a", "b"]);
        assert_eq!(bag.count("a"), 2);
        assert_eq!(bag.count("b"), 2);
        assert_eq!(bag.total(), 4);
    }

    #[test]
    fn acronym_boundary() {
        assert_eq!(subtokens("HTTPServer"), ["http", "server"]);
        assert_eq!(subtokens("parseXMLDoc42"), ["parse", "xml", "doc", "42"]);
    }

    #[test]
    fn external_command_tokenizes() {
        let config = TokenizerConfig::External {
            command: vec!["cat".into()],
        };
        let bag = tokenize("alpha beta beta", &config).unwrap();
        assert_eq!(bag.count("beta"), 2);
        assert_eq!(bag.distinct(), 2);
    }

    #[test]
    fn unresolvable_external_command_errors() {
        let config = TokenizerConfig::External {
            command: vec!["/nonexistent/tokenizer-binary".into()],
        };
        assert!(tokenize("x", &config).is_err());
    }
}
