//! Trial-level parallelism with deterministic assembly.
//!
//! Workers take strided trial indices and results are merged back in index
//! order, so output never depends on scheduling. `BIPARAM_SPARSE_THREADS`
//! caps the worker count.

use std::sync::Mutex;

pub fn thread_cap() -> usize {
    std::env::var("BIPARAM_SPARSE_THREADS")
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
        .filter(|&n| n > 0)
        .unwrap_or_else(|| {
            std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1)
        })
}

/// Run `f` for each index in 0..n on up to `thread_cap()` workers and return
/// the results ordered by index.
pub fn parallel_map<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync,
{
    let workers = thread_cap().min(n.max(1));
    if workers <= 1 || n <= 1 {
        return (0..n).map(f).collect();
    }
    let results: Mutex<Vec<Option<T>>> = Mutex::new((0..n).map(|_| None).collect());
    std::thread::scope(|scope| {
        for w in 0..workers {
            let f = &f;
            let results = &results;
            scope.spawn(move || {
                let mut local: Vec<(usize, T)> = Vec::new();
                let mut idx = w;
                while idx < n {
                    local.push((idx, f(idx)));
                    idx += workers;
                }
                let mut guard = results.lock().expect("result mutex");
                for (i, v) in local {
                    guard[i] = Some(v);
                }
            });
        }
    });
    results
        .into_inner()
        .expect("result mutex")
        .into_iter()
        .map(|v| v.expect("every index computed"))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn results_ordered_by_index() {
        let out = parallel_map(100, |i| i * i);
        assert_eq!(out, (0..100).map(|i| i * i).collect::<Vec<_>>());
    }
}
