//! Slice helpers that fan out over rayon when asked to and when the
//! `parallel` feature is on, and run sequentially otherwise. Output order
//! always matches input order.

pub(crate) fn map<T, R, F>(parallel: bool, items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if parallel {
        use rayon::prelude::*;
        return items.par_iter().map(f).collect();
    }
    let _ = parallel;
    items.iter().map(f).collect()
}

pub(crate) fn filter<T, F>(parallel: bool, items: &[T], keep: F) -> Vec<T>
where
    T: Copy + Send + Sync,
    F: Fn(&T) -> bool + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if parallel {
        use rayon::prelude::*;
        return items.par_iter().filter(|t| keep(t)).copied().collect();
    }
    let _ = parallel;
    items.iter().filter(|t| keep(t)).copied().collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn order_is_preserved_either_way() {
        let items: Vec<u32> = (0..10_000).collect();
        for parallel in [false, true] {
            assert_eq!(map(parallel, &items, |x| x * 2), items.iter().map(|x| x * 2).collect::<Vec<_>>());
            assert_eq!(
                filter(parallel, &items, |x| x % 3 == 0),
                items.iter().copied().filter(|x| x % 3 == 0).collect::<Vec<_>>()
            );
        }
    }
}
