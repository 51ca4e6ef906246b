//! Data-parallel helpers.
//!
//! With the `parallel` feature (default) independent checks run on the rayon
//! pool; without it, or after `set_strategy(Strategy::Sequential)`, they run
//! in order on the calling thread. Results are always returned in input
//! order, so reports do not depend on the strategy.

use std::sync::atomic::{AtomicU8, Ordering};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Strategy {
    Sequential,
    Parallel,
}

static STRATEGY: AtomicU8 = AtomicU8::new(1);

pub fn set_strategy(s: Strategy) {
    STRATEGY.store(matches!(s, Strategy::Parallel) as u8, Ordering::Relaxed);
}

pub fn strategy() -> Strategy {
    if cfg!(feature = "parallel") && STRATEGY.load(Ordering::Relaxed) == 1 {
        Strategy::Parallel
    } else {
        Strategy::Sequential
    }
}

pub fn map<T, R, F>(items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    map_with(strategy(), items, f)
}

pub fn map_with<T, R, F>(s: Strategy, items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    match s {
        #[cfg(feature = "parallel")]
        Strategy::Parallel => {
            use rayon::prelude::*;
            items.par_iter().map(f).collect()
        }
        _ => items.iter().map(f).collect(),
    }
}
