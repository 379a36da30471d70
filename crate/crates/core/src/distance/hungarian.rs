//! Minimum-cost perfect assignment (Kuhn-Munkres) on square matrices.

/// Square cost matrix, zero-padded from a possibly rectangular original.
#[derive(Clone, Debug, PartialEq)]
pub struct CostMatrix {
    size: usize,
    rows: usize,
    cols: usize,
    entries: Vec<f64>,
}

impl CostMatrix {
    /// Builds a `max(rows, cols)` square matrix with `cost(i, j)` in the
    /// original block and zeros elsewhere.
    pub fn padded(rows: usize, cols: usize, mut cost: impl FnMut(usize, usize) -> f64) -> Self {
        let size = rows.max(cols);
        let mut entries = vec![0.0; size * size];
        for i in 0..rows {
            for j in 0..cols {
                entries[i * size + j] = cost(i, j);
            }
        }
        CostMatrix {
            size,
            rows,
            cols,
            entries,
        }
    }

    /// # Panics
    /// If `rows` is not square.
    pub fn from_rows(rows: &[Vec<f64>]) -> Self {
        let n = rows.len();
        assert!(
            rows.iter().all(|r| r.len() == n),
            "cost matrix must be square"
        );
        CostMatrix::padded(n, n, |i, j| rows[i][j])
    }

    pub fn size(&self) -> usize {
        self.size
    }

    /// Dimensions before padding.
    pub fn original_dims(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.entries[row * self.size + col]
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Assignment {
    /// `(row, column)` pairs, one per row, in row order.
    pub mapping: Vec<(usize, usize)>,
    /// Sum of the assigned entries, accumulated in row order.
    pub total_cost: f64,
}

/// Shortest-augmenting-path Hungarian method with row/column potentials,
/// O(n³).
pub fn hungarian(c: &CostMatrix) -> Assignment {
    let n = c.size();
    if n == 0 {
        return Assignment {
            mapping: Vec::new(),
            total_cost: 0.0,
        };
    }
    // 1-based: index 0 is the virtual source column.
    let mut u = vec![0.0f64; n + 1];
    let mut v = vec![0.0f64; n + 1];
    let mut owner = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];
    let mut min_to = vec![0.0f64; n + 1];
    let mut used = vec![false; n + 1];

    for row in 1..=n {
        owner[0] = row;
        let mut col0 = 0;
        min_to.iter_mut().for_each(|m| *m = f64::INFINITY);
        used.iter_mut().for_each(|b| *b = false);
        loop {
            used[col0] = true;
            let i0 = owner[col0];
            let mut delta = f64::INFINITY;
            let mut col1 = 0;
            for j in 1..=n {
                if used[j] {
                    continue;
                }
                let reduced = c.get(i0 - 1, j - 1) - u[i0] - v[j];
                if reduced < min_to[j] {
                    min_to[j] = reduced;
                    way[j] = col0;
                }
                if min_to[j] < delta {
                    delta = min_to[j];
                    col1 = j;
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[owner[j]] += delta;
                    v[j] -= delta;
                } else {
                    min_to[j] -= delta;
                }
            }
            col0 = col1;
            if owner[col0] == 0 {
                break;
            }
        }
        loop {
            let prev = way[col0];
            owner[col0] = owner[prev];
            col0 = prev;
            if col0 == 0 {
                break;
            }
        }
    }

    let mut row_to_col = vec![0usize; n];
    for j in 1..=n {
        row_to_col[owner[j] - 1] = j - 1;
    }
    let mapping: Vec<(usize, usize)> = row_to_col.into_iter().enumerate().collect();
    let total_cost = mapping.iter().map(|&(i, j)| c.get(i, j)).sum();
    Assignment {
        mapping,
        total_cost,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_cell() {
        let a = hungarian(&CostMatrix::from_rows(&[vec![0.0]]));
        assert_eq!(a.mapping, vec![(0, 0)]);
        assert_eq!(a.total_cost, 0.0);
    }

    #[test]
    fn permutation_matrix_takes_the_zeros() {
        let a = hungarian(&CostMatrix::from_rows(&[vec![1.0, 0.0], vec![0.0, 1.0]]));
        assert_eq!(a.mapping, vec![(0, 1), (1, 0)]);
        assert_eq!(a.total_cost, 0.0);
    }

    #[test]
    fn classic_three_by_three() {
        let a = hungarian(&CostMatrix::from_rows(&[
            vec![4.0, 3.0, 5.0],
            vec![3.0, 5.0, 9.0],
            vec![4.0, 1.0, 4.0],
        ]));
        assert_eq!(a.total_cost, 9.0);
        assert_eq!(a.mapping, vec![(0, 2), (1, 0), (2, 1)]);
    }

    #[test]
    fn padding_is_zero() {
        let c = CostMatrix::padded(1, 3, |_, j| j as f64 + 0.5);
        assert_eq!(c.size(), 3);
        assert_eq!(c.original_dims(), (1, 3));
        assert_eq!(c.get(1, 0), 0.0);
        assert_eq!(c.get(2, 2), 0.0);
        let a = hungarian(&c);
        assert_eq!(a.total_cost, 0.5);
    }

    #[test]
    fn empty_matrix() {
        let a = hungarian(&CostMatrix::padded(0, 0, |_, _| 0.0));
        assert!(a.mapping.is_empty());
        assert_eq!(a.total_cost, 0.0);
    }
}
