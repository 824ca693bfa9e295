//! Reference implementations of the task metrics: precision/recall/F1 and
//! the decision-threshold sweep for clone detection, SR@k and MRR for
//! retrieval, BLEU-4, METEOR and ROUGE-L for generated summaries, and the
//! run comparison machinery (Venn counts, winner counts, interval tables).
//!
//! Zero-denominator cases return 0 by convention so every oracle is
//! deterministic. Aggregations sum in id-sorted order.

use std::collections::{BTreeMap, HashMap};

use serde::Serialize;
use thiserror::Error;

use crate::sample::{bin_slot, BinSlot, SampleError};

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("run is empty")]
    EmptyRun,
    #[error("prediction and label lists have different lengths")]
    LengthMismatch,
    #[error("duplicate id {0:?}")]
    DuplicateId(String),
    #[error("score {1} for id {0:?} is outside [0,1]")]
    ScoreOutOfRange(String, f64),
    #[error("rank for id {0:?} must be at least 1")]
    RankZero(String),
    #[error("runs do not cover the same ids (first difference: {0:?})")]
    IdMismatch(String),
    #[error("k must be at least 1")]
    ZeroK,
    #[error(transparent)]
    Bins(#[from] SampleError),
}

// ---------------------------------------------------------------------------
// Clone detection
// ---------------------------------------------------------------------------

/// Per-pair classifier scores with gold labels; sorted by id.
#[derive(Debug, Clone)]
pub struct ClassifierRun {
    records: Vec<(String, f64, bool)>,
}

impl ClassifierRun {
    pub fn new(mut records: Vec<(String, f64, bool)>) -> Result<Self, EvalError> {
        if records.is_empty() {
            return Err(EvalError::EmptyRun);
        }
        records.sort_by(|a, b| a.0.cmp(&b.0));
        for w in records.windows(2) {
            if w[0].0 == w[1].0 {
                return Err(EvalError::DuplicateId(w[0].0.clone()));
            }
        }
        for (id, score, _) in &records {
            if !(0.0..=1.0).contains(score) {
                return Err(EvalError::ScoreOutOfRange(id.clone(), *score));
            }
        }
        Ok(ClassifierRun { records })
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn labels(&self) -> Vec<bool> {
        self.records.iter().map(|r| r.2).collect()
    }

    /// Predictions at grid threshold `k`, i.e. `score > k/100` compared in
    /// exact arithmetic.
    pub fn predictions_at_grid(&self, k: u32) -> Vec<bool> {
        self.records
            .iter()
            .map(|r| score_exceeds_grid(r.1, k))
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Prf {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

/// Confusion-matrix precision, recall and F1; zero denominators give 0.
pub fn precision_recall_f1(predictions: &[bool], labels: &[bool]) -> Result<Prf, EvalError> {
    if predictions.len() != labels.len() {
        return Err(EvalError::LengthMismatch);
    }
    let mut tp = 0usize;
    let mut fp = 0usize;
    let mut fne = 0usize;
    for (&p, &l) in predictions.iter().zip(labels) {
        match (p, l) {
            (true, true) => tp += 1,
            (true, false) => fp += 1,
            (false, true) => fne += 1,
            (false, false) => {}
        }
    }
    let precision = ratio_or_zero(tp, tp + fp);
    let recall = ratio_or_zero(tp, tp + fne);
    let f1 = if precision + recall == 0.0 {
        0.0
    } else {
        2.0 * precision * recall / (precision + recall)
    };
    Ok(Prf {
        precision,
        recall,
        f1,
    })
}

fn ratio_or_zero(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

/// Exact comparison of a score against the grid threshold `k/100`.
///
/// The grid point is an exact hundredth while the score is an exact binary
/// value; comparing their rounded f64 forms misclassifies scores that sit
/// on a grid point (the double nearest to 0.2 is above 2/10 exactly, so it
/// must count as exceeding the 0.20 threshold). Decomposing the score into
/// mantissa and exponent makes the comparison exact.
fn score_exceeds_grid(score: f64, k: u32) -> bool {
    debug_assert!((1..=99).contains(&k));
    if score <= 0.0 {
        return false;
    }
    if score >= 1.0 {
        return true;
    }
    // score < 0.0078125 is below every grid point.
    if score < 0.0078125 {
        return false;
    }
    let bits = score.to_bits();
    let exp = ((bits >> 52) & 0x7ff) as i64 - 1075;
    let mantissa = (bits & ((1u64 << 52) - 1)) | (1u64 << 52);
    // score = mantissa * 2^exp with exp in [-60, -52] here.
    let lhs = 100i128 * i128::from(mantissa);
    let rhs = i128::from(k) << u32::try_from(-exp).expect("negative exponent");
    lhs > rhs
}

/// Sweeps the decision threshold over 0.01..=0.99 in hundredths and
/// returns the threshold with the best F1, ties broken by the smallest
/// threshold.
pub fn sweep_threshold(run: &ClassifierRun) -> (f64, f64) {
    let labels = run.labels();
    let mut best_k = 1u32;
    let mut best_f1 = f64::NEG_INFINITY;
    for k in 1..=99u32 {
        let preds = run.predictions_at_grid(k);
        let prf = precision_recall_f1(&preds, &labels).expect("same lengths");
        if prf.f1 > best_f1 {
            best_f1 = prf.f1;
            best_k = k;
        }
    }
    (f64::from(best_k) / 100.0, best_f1)
}

// ---------------------------------------------------------------------------
// Retrieval
// ---------------------------------------------------------------------------

/// Rank of the ground-truth result per query; sorted by id.
#[derive(Debug, Clone)]
pub struct RankedRun {
    records: Vec<(String, u64)>,
}

impl RankedRun {
    pub fn new(mut records: Vec<(String, u64)>) -> Result<Self, EvalError> {
        if records.is_empty() {
            return Err(EvalError::EmptyRun);
        }
        records.sort_by(|a, b| a.0.cmp(&b.0));
        for w in records.windows(2) {
            if w[0].0 == w[1].0 {
                return Err(EvalError::DuplicateId(w[0].0.clone()));
            }
        }
        for (id, rank) in &records {
            if *rank == 0 {
                return Err(EvalError::RankZero(id.clone()));
            }
        }
        Ok(RankedRun { records })
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn ranks(&self) -> impl Iterator<Item = u64> + '_ {
        self.records.iter().map(|r| r.1)
    }
}

/// Fraction of queries whose ground truth ranks within the top `k`.
pub fn success_rate_at_k(run: &RankedRun, k: u64) -> Result<f64, EvalError> {
    if k == 0 {
        return Err(EvalError::ZeroK);
    }
    let hits = run.ranks().filter(|&r| r <= k).count();
    Ok(hits as f64 / run.len() as f64)
}

/// Mean reciprocal rank.
pub fn mrr(run: &RankedRun) -> Result<f64, EvalError> {
    let sum: f64 = run.ranks().map(|r| 1.0 / r as f64).sum();
    Ok(sum / run.len() as f64)
}

// ---------------------------------------------------------------------------
// Summarization
// ---------------------------------------------------------------------------

const MAX_NGRAM: usize = 4;

fn ngram_counts<'a>(tokens: &'a [&'a str], n: usize) -> HashMap<&'a [&'a str], usize> {
    let mut counts = HashMap::new();
    if tokens.len() >= n {
        for w in tokens.windows(n) {
            *counts.entry(w).or_insert(0) += 1;
        }
    }
    counts
}

/// Clipped n-gram matches and candidate n-gram total for one pair.
fn ngram_overlap(candidate: &[&str], reference: &[&str], n: usize) -> (usize, usize) {
    let cand = ngram_counts(candidate, n);
    let refs = ngram_counts(reference, n);
    let matches = cand
        .iter()
        .map(|(gram, &c)| c.min(refs.get(gram).copied().unwrap_or(0)))
        .sum();
    let total = candidate.len().saturating_sub(n - 1);
    (matches, total)
}

fn bleu_from_counts(
    matches: &[usize; MAX_NGRAM],
    totals: &[usize; MAX_NGRAM],
    cand_len: usize,
    ref_len: usize,
    smooth: bool,
) -> f64 {
    if cand_len == 0 {
        return 0.0;
    }
    let mut log_sum = 0.0;
    for n in 0..MAX_NGRAM {
        let (mut m, mut t) = (matches[n] as f64, totals[n] as f64);
        if smooth && n > 0 {
            m += 1.0;
            t += 1.0;
        }
        if m == 0.0 || t == 0.0 {
            return 0.0;
        }
        log_sum += (m / t).ln() / MAX_NGRAM as f64;
    }
    let bp = if cand_len > ref_len {
        1.0
    } else {
        (1.0 - ref_len as f64 / cand_len as f64).exp()
    };
    bp * log_sum.exp()
}

/// Sentence-level BLEU-4 with uniform weights and brevity penalty.
///
/// With smoothing off, any zero n-gram precision zeroes the score; with
/// smoothing on, add-one smoothing applies to the n >= 2 precisions.
pub fn sentence_bleu(candidate: &[&str], reference: &[&str], smooth: bool) -> f64 {
    let mut matches = [0usize; MAX_NGRAM];
    let mut totals = [0usize; MAX_NGRAM];
    for n in 1..=MAX_NGRAM {
        let (m, t) = ngram_overlap(candidate, reference, n);
        matches[n - 1] = m;
        totals[n - 1] = t;
    }
    bleu_from_counts(&matches, &totals, candidate.len(), reference.len(), smooth)
}

/// Corpus-level BLEU-4: n-gram matches, totals and lengths are pooled over
/// all pairs before the geometric mean.
pub fn corpus_bleu(pairs: &[(Vec<&str>, Vec<&str>)], smooth: bool) -> f64 {
    let mut matches = [0usize; MAX_NGRAM];
    let mut totals = [0usize; MAX_NGRAM];
    let mut cand_len = 0usize;
    let mut ref_len = 0usize;
    for (candidate, reference) in pairs {
        for n in 1..=MAX_NGRAM {
            let (m, t) = ngram_overlap(candidate, reference, n);
            matches[n - 1] += m;
            totals[n - 1] += t;
        }
        cand_len += candidate.len();
        ref_len += reference.len();
    }
    bleu_from_counts(&matches, &totals, cand_len, ref_len, smooth)
}

#[derive(Debug, Clone, Copy)]
pub struct MeteorParams {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
}

impl Default for MeteorParams {
    fn default() -> Self {
        MeteorParams {
            alpha: 0.9,
            beta: 3.0,
            gamma: 0.5,
        }
    }
}

/// Exact-match unigram alignment: maximizes matches, then minimizes the
/// number of chunks. Branch-and-bound over reference assignments with a
/// node budget; extension-first ordering makes the first descent greedy,
/// so exhausting the budget degrades to a near-official approximation.
fn min_chunks(candidate: &[&str], reference: &[&str], m: usize) -> usize {
    struct Search<'a> {
        candidate: &'a [&'a str],
        ref_by_token: HashMap<&'a str, Vec<usize>>,
        // Remaining matches still required per token.
        needed: HashMap<&'a str, usize>,
        // Candidate occurrences of each token at or after the cursor.
        cand_remaining: HashMap<&'a str, usize>,
        target: usize,
        best: usize,
        budget: usize,
    }

    impl<'a> Search<'a> {
        fn dfs(
            &mut self,
            pos: usize,
            used: u128,
            matched: usize,
            chunks: usize,
            last: Option<(usize, usize)>,
        ) {
            if chunks >= self.best || self.budget == 0 {
                return;
            }
            if matched == self.target {
                self.best = chunks;
                return;
            }
            if pos >= self.candidate.len() {
                return;
            }
            self.budget -= 1;
            let token = self.candidate[pos];
            let needed = self.needed.get(token).copied().unwrap_or(0);
            if needed > 0 {
                // Try reference occurrences, chunk extensions first.
                let occurrences = self.ref_by_token[token].clone();
                let extend_r = match last {
                    Some((c, r)) if c + 1 == pos => Some(r + 1),
                    _ => None,
                };
                let extend_r = extend_r.filter(|er| occurrences.contains(er));
                let mut ordered: Vec<usize> = Vec::with_capacity(occurrences.len());
                if let Some(er) = extend_r {
                    ordered.push(er);
                }
                for &r in &occurrences {
                    if Some(r) != extend_r {
                        ordered.push(r);
                    }
                }
                for r in ordered {
                    if used & (1u128 << r) != 0 {
                        continue;
                    }
                    let extends = matches!(last, Some((c, lr)) if c + 1 == pos && lr + 1 == r);
                    let new_chunks = if extends { chunks } else { chunks + 1 };
                    *self.needed.get_mut(token).expect("needed > 0") -= 1;
                    *self.cand_remaining.get_mut(token).expect("present") -= 1;
                    self.dfs(
                        pos + 1,
                        used | (1u128 << r),
                        matched + 1,
                        new_chunks,
                        Some((pos, r)),
                    );
                    *self.needed.get_mut(token).expect("needed > 0") += 1;
                    *self.cand_remaining.get_mut(token).expect("present") += 1;
                }
            }
            // Skipping this occurrence is allowed only if enough later
            // candidate occurrences remain to satisfy the token's quota.
            let remaining_after = self
                .cand_remaining
                .get(token)
                .copied()
                .unwrap_or(0)
                .saturating_sub(1);
            if remaining_after >= needed {
                if needed > 0 {
                    *self.cand_remaining.get_mut(token).expect("present") -= 1;
                    self.dfs(pos + 1, used, matched, chunks, last);
                    *self.cand_remaining.get_mut(token).expect("present") += 1;
                } else {
                    self.dfs(pos + 1, used, matched, chunks, last);
                }
            }
        }
    }

    let mut ref_by_token: HashMap<&str, Vec<usize>> = HashMap::new();
    for (i, &t) in reference.iter().enumerate() {
        ref_by_token.entry(t).or_default().push(i);
    }
    let mut cand_counts: HashMap<&str, usize> = HashMap::new();
    for &t in candidate {
        *cand_counts.entry(t).or_insert(0) += 1;
    }
    let needed: HashMap<&str, usize> = cand_counts
        .iter()
        .filter_map(|(&t, &c)| {
            let r = ref_by_token.get(t).map_or(0, |v| v.len());
            (r > 0).then_some((t, c.min(r)))
        })
        .collect();

    let mut search = Search {
        candidate,
        ref_by_token,
        needed,
        cand_remaining: cand_counts,
        target: m,
        best: m + 1,
        budget: 300_000,
    };
    search.dfs(0, 0, 0, 0, None);
    search.best.min(m)
}

/// METEOR with exact-match unigram alignment.
pub fn meteor(candidate: &[&str], reference: &[&str], params: &MeteorParams) -> f64 {
    if candidate.is_empty() || reference.is_empty() {
        return 0.0;
    }
    if reference.len() > 128 {
        // Chunk search tracks reference positions in a 128-bit mask; longer
        // references are truncated, which no summarization corpus reaches.
        return meteor(candidate, &reference[..128], params);
    }
    let mut ref_counts: HashMap<&str, usize> = HashMap::new();
    for &t in reference {
        *ref_counts.entry(t).or_insert(0) += 1;
    }
    let mut cand_counts: HashMap<&str, usize> = HashMap::new();
    for &t in candidate {
        *cand_counts.entry(t).or_insert(0) += 1;
    }
    let m: usize = cand_counts
        .iter()
        .map(|(t, &c)| c.min(ref_counts.get(t).copied().unwrap_or(0)))
        .sum();
    if m == 0 {
        return 0.0;
    }
    let chunks = min_chunks(candidate, reference, m);
    let p = m as f64 / candidate.len() as f64;
    let r = m as f64 / reference.len() as f64;
    let f = p * r / (params.alpha * p + (1.0 - params.alpha) * r);
    let frag = chunks as f64 / m as f64;
    (1.0 - params.gamma * frag.powf(params.beta)) * f
}

/// ROUGE-L: LCS-based F-measure with recall weight `beta`.
pub fn rouge_l(candidate: &[&str], reference: &[&str], beta: f64) -> f64 {
    if candidate.is_empty() || reference.is_empty() {
        return 0.0;
    }
    let lcs = lcs_length(candidate, reference);
    if lcs == 0 {
        return 0.0;
    }
    let p = lcs as f64 / candidate.len() as f64;
    let r = lcs as f64 / reference.len() as f64;
    let b2 = beta * beta;
    (1.0 + b2) * p * r / (r + b2 * p)
}

pub const ROUGE_BETA: f64 = 1.2;

fn lcs_length(a: &[&str], b: &[&str]) -> usize {
    let mut prev = vec![0usize; b.len() + 1];
    let mut cur = vec![0usize; b.len() + 1];
    for &ta in a {
        for (j, &tb) in b.iter().enumerate() {
            cur[j + 1] = if ta == tb {
                prev[j] + 1
            } else {
                prev[j + 1].max(cur[j])
            };
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[b.len()]
}

// ---------------------------------------------------------------------------
// Run comparison
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct VennCounts {
    pub both: usize,
    pub only_a: usize,
    pub only_b: usize,
    pub neither: usize,
}

fn check_same_ids<V>(
    a: &BTreeMap<String, V>,
    b: &BTreeMap<String, V>,
) -> Result<(), EvalError> {
    if a.len() != b.len() {
        let diff = a
            .keys()
            .find(|k| !b.contains_key(*k))
            .or_else(|| b.keys().find(|k| !a.contains_key(*k)))
            .cloned()
            .unwrap_or_default();
        return Err(EvalError::IdMismatch(diff));
    }
    for k in a.keys() {
        if !b.contains_key(k) {
            return Err(EvalError::IdMismatch(k.clone()));
        }
    }
    Ok(())
}

/// Venn counts over two binary outcome runs with identical id sets.
pub fn venn_compare(
    a: &BTreeMap<String, bool>,
    b: &BTreeMap<String, bool>,
) -> Result<VennCounts, EvalError> {
    if a.is_empty() {
        return Err(EvalError::EmptyRun);
    }
    check_same_ids(a, b)?;
    let mut counts = VennCounts {
        both: 0,
        only_a: 0,
        only_b: 0,
        neither: 0,
    };
    for (id, &oa) in a {
        let ob = b[id];
        match (oa, ob) {
            (true, true) => counts.both += 1,
            (true, false) => counts.only_a += 1,
            (false, true) => counts.only_b += 1,
            (false, false) => counts.neither += 1,
        }
    }
    Ok(counts)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IntervalRow {
    pub lo: f64,
    pub hi: f64,
    /// Samples in this interval where run A scored strictly higher.
    pub count_a: usize,
    /// Samples in this interval where run B scored strictly higher.
    pub count_b: usize,
    pub ties: usize,
    /// Mean characterization value of all samples in the interval.
    pub mean: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WinnerReport {
    pub a_better: usize,
    pub b_better: usize,
    pub ties: usize,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub intervals: Vec<IntervalRow>,
}

/// Per-sample winner counts over two real-valued runs, with optional
/// interval breakdown by a characterization value (the s/e/r tables).
pub fn winner_compare(
    a: &BTreeMap<String, f64>,
    b: &BTreeMap<String, f64>,
    characterization: Option<(&BTreeMap<String, f64>, &[f64])>,
) -> Result<WinnerReport, EvalError> {
    if a.is_empty() {
        return Err(EvalError::EmptyRun);
    }
    check_same_ids(a, b)?;
    let mut report = WinnerReport {
        a_better: 0,
        b_better: 0,
        ties: 0,
        intervals: Vec::new(),
    };
    let mut rows: Vec<(usize, usize, usize, f64, usize)> = Vec::new(); // a, b, tie, sum, n
    if let Some((chars, edges)) = characterization {
        check_same_ids_real(a, chars)?;
        if edges.len() < 2 || edges.windows(2).any(|w| w[0] >= w[1]) {
            return Err(EvalError::Bins(SampleError::UnsortedEdges));
        }
        rows = vec![(0, 0, 0, 0.0, 0); edges.len() - 1];
    }
    for (id, &va) in a {
        let vb = b[id];
        let winner = match va.partial_cmp(&vb) {
            Some(std::cmp::Ordering::Greater) => {
                report.a_better += 1;
                0
            }
            Some(std::cmp::Ordering::Less) => {
                report.b_better += 1;
                1
            }
            _ => {
                report.ties += 1;
                2
            }
        };
        if let Some((chars, edges)) = characterization {
            let c = chars[id];
            if let BinSlot::In(i) = bin_slot(c, edges) {
                match winner {
                    0 => rows[i].0 += 1,
                    1 => rows[i].1 += 1,
                    _ => rows[i].2 += 1,
                }
                rows[i].3 += c;
                rows[i].4 += 1;
            }
        }
    }
    if let Some((_, edges)) = characterization {
        report.intervals = rows
            .into_iter()
            .enumerate()
            .map(|(i, (ca, cb, t, sum, n))| IntervalRow {
                lo: edges[i],
                hi: edges[i + 1],
                count_a: ca,
                count_b: cb,
                ties: t,
                mean: (n > 0).then(|| sum / n as f64),
            })
            .collect();
    }
    Ok(report)
}

fn check_same_ids_real(
    a: &BTreeMap<String, f64>,
    b: &BTreeMap<String, f64>,
) -> Result<(), EvalError> {
    for k in a.keys() {
        if !b.contains_key(k) {
            return Err(EvalError::IdMismatch(k.clone()));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn toks(s: &str) -> Vec<&str> {
        s.split_whitespace().collect()
    }

    #[test]
    fn prf_mixed_fixture() {
        let prf = precision_recall_f1(
            &[true, true, false, false],
            &[true, false, true, false],
        )
        .unwrap();
        assert_eq!((prf.precision, prf.recall, prf.f1), (0.5, 0.5, 0.5));
    }

    #[test]
    fn prf_perfect_and_degenerate() {
        let ones = [true; 4];
        let prf = precision_recall_f1(&ones, &ones).unwrap();
        assert_eq!((prf.precision, prf.recall, prf.f1), (1.0, 1.0, 1.0));
        let none = precision_recall_f1(&[false; 3], &[true, false, true]).unwrap();
        assert_eq!((none.precision, none.recall, none.f1), (0.0, 0.0, 0.0));
    }

    #[test]
    fn prf_length_mismatch() {
        assert!(matches!(
            precision_recall_f1(&[true], &[true, false]),
            Err(EvalError::LengthMismatch)
        ));
    }

    fn run(scores: &[f64], labels: &[u8]) -> ClassifierRun {
        let records = scores
            .iter()
            .zip(labels)
            .enumerate()
            .map(|(i, (&s, &l))| (format!("p{i:03}"), s, l == 1))
            .collect();
        ClassifierRun::new(records).unwrap()
    }

    #[test]
    fn sweep_separable_fixture() {
        let r = run(&[0.9, 0.8, 0.2, 0.1], &[1, 1, 0, 0]);
        let (delta, f1) = sweep_threshold(&r);
        assert_abs_diff_eq!(delta, 0.21, epsilon = 1e-12);
        assert_eq!(f1, 1.0);
    }

    #[test]
    fn sweep_all_positive_at_half() {
        let r = run(&[0.5, 0.5, 0.5], &[1, 1, 1]);
        let (delta, f1) = sweep_threshold(&r);
        assert_abs_diff_eq!(delta, 0.01, epsilon = 1e-12);
        assert_eq!(f1, 1.0);
    }

    #[test]
    fn sweep_no_positives() {
        let r = run(&[0.4, 0.6], &[0, 0]);
        let (delta, f1) = sweep_threshold(&r);
        assert_abs_diff_eq!(delta, 0.01, epsilon = 1e-12);
        assert_eq!(f1, 0.0);
    }

    #[test]
    fn sweep_f1_matches_reevaluation() {
        let r = run(&[0.35, 0.62, 0.62, 0.1, 0.88], &[0, 1, 0, 0, 1]);
        let (delta, f1) = sweep_threshold(&r);
        let k = (delta * 100.0).round() as u32;
        let prf = precision_recall_f1(&r.predictions_at_grid(k), &r.labels()).unwrap();
        assert_eq!(prf.f1, f1);
    }

    #[test]
    fn exact_grid_comparison_on_boundary() {
        assert!(!score_exceeds_grid(0.25, 25), "exact quarter is not above");
        assert!(score_exceeds_grid(0.2, 20), "f64 0.2 sits above 2/10");
        assert!(!score_exceeds_grid(0.2, 21));
    }

    fn ranked(ranks: &[u64]) -> RankedRun {
        RankedRun::new(
            ranks
                .iter()
                .enumerate()
                .map(|(i, &r)| (format!("q{i}"), r))
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn retrieval_fixtures() {
        let r = ranked(&[1, 2, 4]);
        assert_abs_diff_eq!(success_rate_at_k(&r, 1).unwrap(), 1.0 / 3.0, epsilon = 1e-12);
        assert_eq!(success_rate_at_k(&r, 5).unwrap(), 1.0);
        assert_abs_diff_eq!(mrr(&r).unwrap(), 7.0 / 12.0, epsilon = 1e-12);
    }

    #[test]
    fn retrieval_edges() {
        assert_eq!(mrr(&ranked(&[1, 1])).unwrap(), 1.0);
        assert_eq!(mrr(&ranked(&[10])).unwrap(), 0.1);
        assert_eq!(success_rate_at_k(&ranked(&[7, 9]), 5).unwrap(), 0.0);
        assert!(RankedRun::new(vec![]).is_err());
        assert!(RankedRun::new(vec![("q".into(), 0)]).is_err());
    }

    #[test]
    fn mrr_bounds_sr_at_one() {
        let r = ranked(&[1, 3, 2, 8, 1]);
        assert!(mrr(&r).unwrap() >= success_rate_at_k(&r, 1).unwrap());
    }

    #[test]
    fn bleu_identical_and_disjoint() {
        let c = toks("the quick brown fox jumps");
        assert_eq!(sentence_bleu(&c, &c, false), 1.0);
        assert_eq!(sentence_bleu(&toks("a b c d"), &toks("w x y z"), false), 0.0);
        assert_eq!(sentence_bleu(&[], &toks("a"), false), 0.0);
    }

    #[test]
    fn bleu_short_candidate_zero_without_smoothing() {
        // p4 has no 4-grams: zero unsmoothed.
        let c = toks("a b c");
        let r = toks("a b c d");
        assert_eq!(sentence_bleu(&c, &r, false), 0.0);
        // Add-one smoothing lifts every n>=2 precision to 1 here, so the
        // smoothed score is exactly the brevity penalty.
        let smoothed = sentence_bleu(&c, &r, true);
        let bp = (1.0f64 - 4.0 / 3.0).exp();
        assert_abs_diff_eq!(smoothed, bp, epsilon = 1e-12);
        assert_abs_diff_eq!(bp, 0.716531, epsilon = 1e-6);
    }

    #[test]
    fn corpus_bleu_pools_counts() {
        let pairs = vec![
            (toks("a b c d"), toks("a b c d")),
            (toks("x y z w"), toks("x y z w")),
        ];
        assert_eq!(corpus_bleu(&pairs, false), 1.0);
        let mixed = vec![
            (toks("a b c d"), toks("a b c d")),
            (toks("p q r s"), toks("w x y z")),
        ];
        let pooled = corpus_bleu(&mixed, false);
        assert!(pooled > 0.0 && pooled < 1.0);
    }

    #[test]
    fn meteor_identical_three_tokens() {
        let c = toks("a b c");
        let expected = 1.0 - 0.5 * (1.0f64 / 3.0).powi(3);
        assert_abs_diff_eq!(meteor(&c, &c, &MeteorParams::default()), expected, epsilon = 1e-9);
        assert_abs_diff_eq!(
            meteor(&c, &c, &MeteorParams::default()),
            0.981481,
            epsilon = 1e-6
        );
    }

    #[test]
    fn meteor_rotated_has_two_chunks() {
        let score = meteor(&toks("c a b"), &toks("a b c"), &MeteorParams::default());
        let expected = 1.0 - 0.5 * (2.0f64 / 3.0).powi(3);
        assert_abs_diff_eq!(score, expected, epsilon = 1e-9);
        assert_abs_diff_eq!(score, 0.851852, epsilon = 1e-6);
    }

    #[test]
    fn meteor_no_overlap_is_zero() {
        assert_eq!(meteor(&toks("a b"), &toks("x y"), &MeteorParams::default()), 0.0);
    }

    #[test]
    fn meteor_chunk_minimization_beats_greedy() {
        // Leftmost-first matching would give three chunks; the optimum is two.
        let score = meteor(&toks("a b a"), &toks("a a b"), &MeteorParams::default());
        let expected = 1.0 - 0.5 * (2.0f64 / 3.0).powi(3);
        assert_abs_diff_eq!(score, expected, epsilon = 1e-9);
    }

    #[test]
    fn rouge_fixture() {
        let f = rouge_l(&toks("a c d"), &toks("a b c d"), ROUGE_BETA);
        let expected = 2.44 * 0.75 / (0.75 + 1.44);
        assert_abs_diff_eq!(f, expected, epsilon = 1e-12);
        assert_abs_diff_eq!(f, 0.835616, epsilon = 1e-6);
    }

    #[test]
    fn rouge_identical_and_disjoint() {
        let c = toks("x y z");
        assert_eq!(rouge_l(&c, &c, ROUGE_BETA), 1.0);
        assert_eq!(rouge_l(&c, &toks("p q"), ROUGE_BETA), 0.0);
    }

    fn binmap(pairs: &[(&str, bool)]) -> BTreeMap<String, bool> {
        pairs.iter().map(|(k, v)| (k.to_string(), *v)).collect()
    }

    #[test]
    fn venn_fixture() {
        let a = binmap(&[("1", true), ("2", true), ("3", false)]);
        let b = binmap(&[("1", true), ("2", false), ("3", true)]);
        let v = venn_compare(&a, &b).unwrap();
        assert_eq!(
            v,
            VennCounts {
                both: 1,
                only_a: 1,
                only_b: 1,
                neither: 0
            }
        );
    }

    #[test]
    fn venn_identical_runs() {
        let a = binmap(&[("1", true), ("2", false)]);
        let v = venn_compare(&a, &a.clone()).unwrap();
        assert_eq!(v.only_a, 0);
        assert_eq!(v.only_b, 0);
    }

    #[test]
    fn venn_id_mismatch() {
        let a = binmap(&[("1", true)]);
        let b = binmap(&[("2", true)]);
        assert!(matches!(venn_compare(&a, &b), Err(EvalError::IdMismatch(_))));
    }

    #[test]
    fn winner_compare_with_intervals() {
        let a: BTreeMap<String, f64> = [("x", 0.9), ("y", 0.1), ("z", 0.5)]
            .iter()
            .map(|(k, v)| (k.to_string(), *v))
            .collect();
        let b: BTreeMap<String, f64> = [("x", 0.2), ("y", 0.7), ("z", 0.5)]
            .iter()
            .map(|(k, v)| (k.to_string(), *v))
            .collect();
        let chars: BTreeMap<String, f64> = [("x", 0.05), ("y", 0.25), ("z", 0.25)]
            .iter()
            .map(|(k, v)| (k.to_string(), *v))
            .collect();
        let report = winner_compare(&a, &b, Some((&chars, &[0.0, 0.1, 0.3]))).unwrap();
        assert_eq!((report.a_better, report.b_better, report.ties), (1, 1, 1));
        assert_eq!(report.intervals[0].count_a, 1);
        assert_eq!(report.intervals[1].count_b, 1);
        assert_eq!(report.intervals[1].ties, 1);
        assert_abs_diff_eq!(report.intervals[1].mean.unwrap(), 0.25, epsilon = 1e-12);
    }
}
