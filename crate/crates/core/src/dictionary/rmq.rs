//! Range-minimum over the suffix array, used to pick the smallest dictionary
//! offset among equally long matches.
//!
//! Minima of 64-entry blocks feed a sparse table; partial blocks at the ends
//! of a query are scanned directly.

const BLOCK: usize = 64;

#[derive(Debug, Default)]
pub(crate) struct RangeMin {
    // levels[j][i] = min of blocks i .. i + 2^j
    levels: Vec<Vec<u32>>,
}

impl RangeMin {
    pub(crate) fn new(values: &[u32]) -> Self {
        let base: Vec<u32> = values
            .chunks(BLOCK)
            .map(|c| *c.iter().min().expect("chunks are non-empty"))
            .collect();
        let mut levels = vec![base];
        let blocks = levels[0].len();
        let mut width = 1;
        while width * 2 <= blocks {
            let prev = levels.last().unwrap();
            let next: Vec<u32> = (0..prev.len() - width)
                .map(|i| prev[i].min(prev[i + width]))
                .collect();
            levels.push(next);
            width *= 2;
        }
        RangeMin { levels }
    }

    /// Minimum of `values[a..b]`; `values` must be the slice given to `new`.
    pub(crate) fn min(&self, values: &[u32], a: usize, b: usize) -> u32 {
        debug_assert!(a < b && b <= values.len());
        if b - a <= 2 * BLOCK {
            return scan(&values[a..b]);
        }
        let first_full = a.div_ceil(BLOCK);
        let last_full = b / BLOCK;
        let mut best = scan(&values[a..first_full * BLOCK]);
        if b > last_full * BLOCK {
            best = best.min(scan(&values[last_full * BLOCK..b]));
        }
        if last_full > first_full {
            let span = last_full - first_full;
            let level = (usize::BITS - 1 - span.leading_zeros()) as usize;
            let row = &self.levels[level];
            best = best
                .min(row[first_full])
                .min(row[last_full - (1 << level)]);
        }
        best
    }

    pub(crate) fn heap_bytes(&self) -> usize {
        self.levels.iter().map(|l| l.len() * 4).sum()
    }
}

fn scan(values: &[u32]) -> u32 {
    values.iter().copied().min().unwrap_or(u32::MAX)
}

#[cfg(test)]
mod tests {
    use proptest::prelude::*;

    use super::*;

    proptest! {
        #[test]
        fn agrees_with_scan(values in prop::collection::vec(any::<u32>(), 1..2000), a in 0usize..2000, len in 1usize..2000) {
            let a = a % values.len();
            let b = (a + len).min(values.len());
            let rmq = RangeMin::new(&values);
            prop_assert_eq!(rmq.min(&values, a, b), *values[a..b].iter().min().unwrap());
        }
    }
}
