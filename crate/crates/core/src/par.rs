//! Index-parallel mapping with a sequential fallback.

use serde::{Deserialize, Serialize};

/// How independent work items (replications, oracle evaluations) are run.
///
/// `Parallel` uses the rayon pool when the `parallel` feature is enabled and
/// silently runs in order otherwise. Results are always returned in index
/// order, so both modes produce identical output.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Execution {
    #[default]
    Parallel,
    Sequential,
}

pub(crate) fn map_indices<T, F>(n: usize, execution: Execution, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    match execution {
        #[cfg(feature = "parallel")]
        Execution::Parallel => {
            use rayon::prelude::*;
            (0..n).into_par_iter().map(f).collect()
        }
        _ => (0..n).map(f).collect(),
    }
}
