//! Per-record map execution: data-parallel over a worker pool by default,
//! with a sequential path that is always available (and is the only path
//! when the `parallel` feature is disabled). Each worker owns its own
//! state instance, so stateful backends like parsers are never shared.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Sequential map with one state instance for the whole run.
pub fn map_records_seq<R, S, T>(
    records: Vec<R>,
    init: impl Fn() -> S,
    f: impl Fn(&mut S, R) -> T,
) -> Vec<T> {
    let mut state = init();
    records.into_iter().map(|r| f(&mut state, r)).collect()
}

/// Parallel map preserving input order; `init` runs once per worker split.
#[cfg(feature = "parallel")]
pub fn map_records<R, S, T>(
    records: Vec<R>,
    init: impl Fn() -> S + Sync + Send,
    f: impl Fn(&mut S, R) -> T + Sync + Send,
) -> Vec<T>
where
    R: Send,
    S: Send,
    T: Send,
{
    records
        .into_par_iter()
        .map_init(&init, |state, r| f(state, r))
        .collect()
}

#[cfg(not(feature = "parallel"))]
pub fn map_records<R, S, T>(
    records: Vec<R>,
    init: impl Fn() -> S,
    f: impl Fn(&mut S, R) -> T,
) -> Vec<T> {
    map_records_seq(records, init, f)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parallel_and_sequential_agree() {
        let records: Vec<u64> = (0..500).collect();
        let seq = map_records_seq(records.clone(), || 0u64, |_, r| r * r);
        let par = map_records(records, || 0u64, |_, r| r * r);
        assert_eq!(seq, par);
    }

    #[test]
    fn order_is_preserved() {
        let out = map_records((0..100).collect::<Vec<_>>(), || (), |_, r| r);
        assert_eq!(out, (0..100).collect::<Vec<_>>());
    }
}
