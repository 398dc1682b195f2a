//! Element-loop execution: data-parallel (rayon) or sequential.

/// How element loops are executed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ExecMode {
    /// Rayon work-stealing over elements (sequential when the `parallel`
    /// feature is disabled).
    #[default]
    Parallel,
    Sequential,
}

impl ExecMode {
    pub fn is_parallel_available() -> bool {
        cfg!(feature = "parallel")
    }
}

/// Map `f` over `items`, results in input order regardless of mode.
pub fn map_ordered<I, T, F>(mode: ExecMode, items: &[I], f: F) -> Vec<T>
where
    I: Sync,
    T: Send,
    F: Fn(&I) -> T + Sync + Send,
{
    match mode {
        #[cfg(feature = "parallel")]
        ExecMode::Parallel => {
            use rayon::prelude::*;
            items.par_iter().map(f).collect()
        }
        _ => items.iter().map(f).collect(),
    }
}

/// Fallible variant of [`map_ordered`]; the first error in input order wins.
pub fn try_map_ordered<I, T, E, F>(mode: ExecMode, items: &[I], f: F) -> Result<Vec<T>, E>
where
    I: Sync,
    T: Send,
    E: Send,
    F: Fn(&I) -> Result<T, E> + Sync + Send,
{
    map_ordered(mode, items, f).into_iter().collect()
}
