//! Order-preserving batch evaluation, data-parallel with the `parallel`
//! feature and sequential otherwise.

/// How a batch of independent jobs is evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Exec {
    /// Rayon's current pool; falls back to sequential without the `parallel` feature.
    #[default]
    Parallel,
    Sequential,
}

impl Exec {
    /// Maps `f` over `items`, returning results in input order.
    pub fn map<T, R, F>(self, items: &[T], f: F) -> Vec<R>
    where
        T: Sync,
        R: Send,
        F: Fn(&T) -> R + Sync + Send,
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

    /// Maps `f` over `0..n` in order.
    pub fn map_range<R, F>(self, n: usize, f: F) -> Vec<R>
    where
        R: Send,
        F: Fn(usize) -> R + Sync + Send,
    {
        match self {
            #[cfg(feature = "parallel")]
            Exec::Parallel => {
                use rayon::prelude::*;
                (0..n).into_par_iter().map(f).collect()
            }
            _ => (0..n).map(f).collect(),
        }
    }

    pub fn is_parallel(self) -> bool {
        cfg!(feature = "parallel") && self == Exec::Parallel
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn both_modes_agree_and_keep_order() {
        let xs: Vec<u64> = (0..1000).collect();
        let a = Exec::Parallel.map(&xs, |x| x * x);
        let b = Exec::Sequential.map(&xs, |x| x * x);
        assert_eq!(a, b);
        assert_eq!(Exec::Parallel.map_range(5, |i| i), vec![0, 1, 2, 3, 4]);
    }
}
