//! Order-preserving map with a rayon path and a sequential fallback.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Exec {
    Sequential,
    #[default]
    Parallel,
}

impl Exec {
    /// Results come back in input order regardless of mode.
    pub fn map<T, U, F>(self, items: &[T], f: F) -> Vec<U>
    where
        T: Sync,
        U: Send,
        F: Fn(&T) -> U + Sync + Send,
    {
        match self {
            #[cfg(feature = "parallel")]
            Exec::Parallel => {
                use rayon::prelude::*;
                items.par_iter().map(f).collect()
            }
            _ => items.iter().map(f).collect(),
        }
    }

    /// Like `map`, with at most `limit` items in flight at once.
    pub fn map_bounded<T, U, F>(self, items: &[T], limit: usize, f: F) -> Vec<U>
    where
        T: Sync,
        U: Send,
        F: Fn(&T) -> U + Sync + Send,
    {
        match self {
            #[cfg(feature = "parallel")]
            Exec::Parallel => match rayon::ThreadPoolBuilder::new().num_threads(limit.max(1)).build() {
                Ok(pool) => pool.install(|| self.map(items, f)),
                Err(e) => {
                    log::warn!("thread pool unavailable ({e}); running sequentially");
                    Exec::Sequential.map(items, f)
                }
            },
            _ => {
                // one item at a time is always within the limit
                let _ = limit;
                Exec::Sequential.map(items, f)
            }
        }
    }
}
