//! Pairwise sample-characterization metrics: token Jaccard similarity
//! between two code snippets, the overlap ratio behind summarization ease
//! and search relevance, and interval binning for the result tables.

use serde::Serialize;
use thiserror::Error;

use crate::tokenize::{tokenize, TokenizeError, TokenizerConfig};

#[derive(Debug, Error)]
pub enum SampleError {
    #[error("both token sets are empty; similarity is undefined")]
    BothEmpty,
    #[error("text tokenizes to an empty set")]
    EmptyText,
    #[error("bin edges must be strictly ascending")]
    UnsortedEdges,
    #[error(transparent)]
    Tokenize(#[from] TokenizeError),
}

/// Token-set Jaccard similarity between two code snippets.
///
/// Errors when both token sets are empty; a single empty side yields 0.
pub fn jaccard(
    code1: &str,
    code2: &str,
    config: &TokenizerConfig,
) -> Result<f64, SampleError> {
    let a = tokenize(code1, config)?;
    let b = tokenize(code2, config)?;
    if a.is_empty() && b.is_empty() {
        return Err(SampleError::BothEmpty);
    }
    if a.is_empty() || b.is_empty() {
        return Ok(0.0);
    }
    Ok(a.intersection_size(&b) as f64 / a.union_size(&b) as f64)
}

/// Fraction of the text's tokens that appear in the code: the ease of
/// summarization when `text` is a summary, the relevance of a search
/// result when `text` is a query.
pub fn overlap_ratio(
    text: &str,
    code: &str,
    config: &TokenizerConfig,
) -> Result<f64, SampleError> {
    let t = tokenize(text, config)?;
    if t.is_empty() {
        return Err(SampleError::EmptyText);
    }
    let c = tokenize(code, config)?;
    Ok(t.intersection_size(&c) as f64 / t.distinct() as f64)
}

/// Where a value lands relative to the bin edges.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinSlot {
    Under,
    In(usize),
    Over,
}

/// Bins are `(lo, hi]` except the first, which is `[e0, e1]`; a value on
/// an interior edge falls in the lower bin.
pub fn bin_slot(value: f64, edges: &[f64]) -> BinSlot {
    if value < edges[0] {
        return BinSlot::Under;
    }
    if value > edges[edges.len() - 1] {
        return BinSlot::Over;
    }
    for i in 1..edges.len() {
        if value <= edges[i] {
            return BinSlot::In(i - 1);
        }
    }
    BinSlot::Over
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Bin {
    pub lo: f64,
    pub hi: f64,
    pub count: usize,
    /// Mean of the contained values; absent when the bin is empty.
    pub mean: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Histogram {
    pub bins: Vec<Bin>,
    pub underflow: usize,
    pub overflow: usize,
}

/// Histograms values into the bins defined by `edges`.
pub fn bin_counts(values: &[f64], edges: &[f64]) -> Result<Histogram, SampleError> {
    if edges.len() < 2 || edges.windows(2).any(|w| w[0] >= w[1]) {
        return Err(SampleError::UnsortedEdges);
    }
    let nbins = edges.len() - 1;
    let mut counts = vec![0usize; nbins];
    let mut sums = vec![0.0f64; nbins];
    let mut underflow = 0usize;
    let mut overflow = 0usize;
    for &v in values {
        match bin_slot(v, edges) {
            BinSlot::Under => underflow += 1,
            BinSlot::Over => overflow += 1,
            BinSlot::In(i) => {
                counts[i] += 1;
                sums[i] += v;
            }
        }
    }
    let bins = (0..nbins)
        .map(|i| Bin {
            lo: edges[i],
            hi: edges[i + 1],
            count: counts[i],
            mean: (counts[i] > 0).then(|| sums[i] / counts[i] as f64),
        })
        .collect();
    Ok(Histogram {
        bins,
        underflow,
        overflow,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn simple() -> TokenizerConfig {
        TokenizerConfig::Simple
    }

    #[test]
    fn jaccard_half_overlap() {
        // {a,b,c} vs {b,c,d}: 2 shared of 4 total.
        let s = jaccard("a b c", "b c d", &simple()).unwrap();
        assert_eq!(s, 0.5);
    }

    #[test]
    fn jaccard_identical_and_disjoint() {
        assert_eq!(jaccard("foo bar", "bar foo", &simple()).unwrap(), 1.0);
        assert_eq!(jaccard("foo", "bar", &simple()).unwrap(), 0.0);
    }

    #[test]
    fn jaccard_empty_sides() {
        assert!(matches!(
            jaccard("", "", &simple()),
            Err(SampleError::BothEmpty)
        ));
        assert_eq!(jaccard("", "code", &simple()).unwrap(), 0.0);
    }

    #[test]
    fn jaccard_is_symmetric() {
        let a = "computeSum of values";
        let b = "int sum = computeSum(xs);";
        assert_eq!(
            jaccard(a, b, &simple()).unwrap(),
            jaccard(b, a, &simple()).unwrap()
        );
    }

    #[test]
    fn overlap_half() {
        let e = overlap_ratio("compute sum", "int sum = 0;", &simple()).unwrap();
        assert_eq!(e, 0.5);
    }

    #[test]
    fn overlap_full_containment_is_one() {
        let e = overlap_ratio("get value", "int getValue() { return value; }", &simple()).unwrap();
        assert_eq!(e, 1.0);
    }

    #[test]
    fn overlap_empty_text_is_an_error() {
        assert!(matches!(
            overlap_ratio("", "code", &simple()),
            Err(SampleError::EmptyText)
        ));
    }

    #[test]
    fn bin_counts_basic() {
        let h = bin_counts(&[0.1, 0.2, 0.2], &[0.0, 0.15, 0.3]).unwrap();
        assert_eq!(h.bins[0].count, 1);
        assert_eq!(h.bins[0].mean, Some(0.1));
        assert_eq!(h.bins[1].count, 2);
        assert!((h.bins[1].mean.unwrap() - 0.2).abs() < 1e-12);
        assert_eq!((h.underflow, h.overflow), (0, 0));
    }

    #[test]
    fn empty_values_all_zero() {
        let h = bin_counts(&[], &[0.0, 1.0]).unwrap();
        assert_eq!(h.bins[0].count, 0);
        assert_eq!(h.bins[0].mean, None);
    }

    #[test]
    fn interior_edge_falls_in_lower_bin() {
        let h = bin_counts(&[0.15], &[0.0, 0.15, 0.3]).unwrap();
        assert_eq!(h.bins[0].count, 1);
        assert_eq!(h.bins[1].count, 0);
    }

    #[test]
    fn out_of_range_values_counted_separately() {
        let h = bin_counts(&[-0.5, 0.5, 1.5], &[0.0, 1.0]).unwrap();
        assert_eq!(h.underflow, 1);
        assert_eq!(h.overflow, 1);
        assert_eq!(h.bins[0].count, 1);
    }

    #[test]
    fn unsorted_edges_rejected() {
        assert!(matches!(
            bin_counts(&[0.1], &[0.3, 0.2]),
            Err(SampleError::UnsortedEdges)
        ));
        assert!(matches!(
            bin_counts(&[0.1], &[0.3]),
            Err(SampleError::UnsortedEdges)
        ));
    }
}
