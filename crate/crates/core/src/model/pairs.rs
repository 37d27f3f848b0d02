use rand::Rng;

/// Enumeration of the unordered pairs `i <= j` (or `i < j`) on `n` sites in
/// row-major order.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PairSpace {
    n: usize,
    loops: bool,
}

impl PairSpace {
    pub fn with_loops(n: usize) -> Self {
        Self { n, loops: true }
    }

    pub fn without_loops(n: usize) -> Self {
        Self { n, loops: false }
    }

    pub fn len(&self) -> usize {
        if self.loops {
            self.n * (self.n + 1) / 2
        } else {
            self.n * self.n.saturating_sub(1) / 2
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn row_len(&self, i: usize) -> usize {
        if self.loops {
            self.n - i
        } else {
            self.n - i - 1
        }
    }

    fn row_offset(&self, i: usize) -> usize {
        let width = if self.loops { self.n } else { self.n - 1 };
        i * width - i * i.saturating_sub(1) / 2
    }

    pub fn index(&self, i: usize, j: usize) -> usize {
        debug_assert!(i <= j && j < self.n && (self.loops || i < j));
        let first = if self.loops { i } else { i + 1 };
        self.row_offset(i) + (j - first)
    }

    pub fn pair(&self, mut k: usize) -> (usize, usize) {
        debug_assert!(k < self.len());
        let mut i = 0;
        while k >= self.row_len(i) {
            k -= self.row_len(i);
            i += 1;
        }
        let first = if self.loops { i } else { i + 1 };
        (i, first + k)
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> (usize, usize) {
        self.pair(rng.gen_range(0..self.len()))
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.len()).map(|k| self.pair(k))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn index_and_pair_are_inverse() {
        for n in 1..8 {
            for space in [PairSpace::with_loops(n), PairSpace::without_loops(n)] {
                let mut expected = Vec::new();
                for i in 0..n {
                    let start = if space.loops { i } else { i + 1 };
                    for j in start..n {
                        expected.push((i, j));
                    }
                }
                assert_eq!(space.len(), expected.len());
                for (k, &(i, j)) in expected.iter().enumerate() {
                    assert_eq!(space.pair(k), (i, j));
                    assert_eq!(space.index(i, j), k);
                }
            }
        }
    }
}
