/// Strict upper triangle of an `m × m` matrix, stored row by row.
///
/// Entry `(j, k)` with `j < k` lives at `j*m - j*(j+1)/2 + (k - j - 1)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UpperTriangular<T> {
    size: usize,
    data: Vec<T>,
}

impl<T: Copy> UpperTriangular<T> {
    pub fn filled(size: usize, value: T) -> Self {
        UpperTriangular {
            size,
            data: vec![value; pair_count(size)],
        }
    }

    /// Assembles the matrix from per-row segments; row `j` must hold the
    /// `size - j - 1` entries `(j, j+1) ..= (j, size-1)`.
    pub fn from_rows(size: usize, rows: Vec<Vec<T>>) -> Self {
        debug_assert_eq!(rows.len(), size.saturating_sub(1));
        let mut data = Vec::with_capacity(pair_count(size));
        for (j, row) in rows.into_iter().enumerate() {
            debug_assert_eq!(row.len(), size - j - 1);
            data.extend(row);
        }
        UpperTriangular { size, data }
    }

    pub fn size(&self) -> usize {
        self.size
    }

    /// Symmetric lookup; panics on the diagonal.
    pub fn get(&self, j: usize, k: usize) -> T {
        self.data[self.offset(j, k)]
    }

    pub fn set(&mut self, j: usize, k: usize, value: T) {
        let at = self.offset(j, k);
        self.data[at] = value;
    }

    /// Entries of row `j` right of the diagonal.
    pub fn row(&self, j: usize) -> &[T] {
        let start = self.offset_ordered(j, j + 1);
        &self.data[start..start + (self.size - j - 1)]
    }

    fn offset(&self, j: usize, k: usize) -> usize {
        assert!(j != k, "diagonal entry ({j}, {j}) is not stored");
        let (lo, hi) = if j < k { (j, k) } else { (k, j) };
        assert!(
            hi < self.size,
            "index {hi} out of range for size {}",
            self.size
        );
        self.offset_ordered(lo, hi)
    }

    fn offset_ordered(&self, j: usize, k: usize) -> usize {
        j * self.size - j * (j + 1) / 2 + (k - j - 1)
    }
}

pub fn pair_count(size: usize) -> usize {
    size * size.saturating_sub(1) / 2
}
