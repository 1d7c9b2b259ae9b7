use std::collections::BTreeMap;
use std::fmt;

/// Column-major sparse integer matrix. Each column holds `(row, value)`
/// pairs sorted by row with no zero values.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct SparseMatrix {
    rows: usize,
    cols: usize,
    columns: Vec<Vec<(u32, i64)>>,
}

impl fmt::Debug for SparseMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "SparseMatrix {}x{} ", self.rows, self.cols)?;
        f.debug_list().entries(self.triplets()).finish()
    }
}

impl SparseMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            columns: vec![Vec::new(); cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        Self {
            rows: n,
            cols: n,
            columns: (0..n).map(|i| vec![(i as u32, 1)]).collect(),
        }
    }

    /// Duplicate positions are summed.
    pub fn from_triplets(rows: usize, cols: usize, entries: impl IntoIterator<Item = (usize, usize, i64)>) -> Self {
        let mut columns: Vec<BTreeMap<u32, i64>> = vec![BTreeMap::new(); cols];
        for (r, c, v) in entries {
            assert!(r < rows && c < cols, "entry ({r},{c}) outside {rows}x{cols}");
            *columns[c].entry(r as u32).or_insert(0) += v;
        }
        Self {
            rows,
            cols,
            columns: columns
                .into_iter()
                .map(|col| col.into_iter().filter(|&(_, v)| v != 0).collect())
                .collect(),
        }
    }

    /// Builds from already sorted, zero-free columns.
    pub(crate) fn from_columns(rows: usize, columns: Vec<Vec<(u32, i64)>>) -> Self {
        debug_assert!(columns
            .iter()
            .all(|c| c.windows(2).all(|w| w[0].0 < w[1].0) && c.iter().all(|&(r, v)| v != 0 && (r as usize) < rows)));
        Self {
            rows,
            cols: columns.len(),
            columns,
        }
    }

    pub fn from_dense(rows: &[Vec<i64>]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        Self::from_triplets(
            r,
            c,
            rows.iter()
                .enumerate()
                .flat_map(|(i, row)| row.iter().enumerate().map(move |(j, &v)| (i, j, v))),
        )
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn nnz(&self) -> usize {
        self.columns.iter().map(Vec::len).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.columns.iter().all(Vec::is_empty)
    }

    pub fn column(&self, c: usize) -> &[(u32, i64)] {
        &self.columns[c]
    }

    pub fn get(&self, r: usize, c: usize) -> i64 {
        let col = &self.columns[c];
        col.binary_search_by_key(&(r as u32), |&(row, _)| row)
            .map(|i| col[i].1)
            .unwrap_or(0)
    }

    /// `(row, col, value)` in column-major order.
    pub fn triplets(&self) -> impl Iterator<Item = (usize, usize, i64)> + '_ {
        self.columns
            .iter()
            .enumerate()
            .flat_map(|(c, col)| col.iter().map(move |&(r, v)| (r as usize, c, v)))
    }

    pub fn to_dense(&self) -> Vec<Vec<i64>> {
        let mut out = vec![vec![0; self.cols]; self.rows];
        for (r, c, v) in self.triplets() {
            out[r][c] = v;
        }
        out
    }

    /// Row-major copy: one sorted `(col, value)` list per row.
    pub fn row_lists(&self) -> Vec<Vec<(u32, i64)>> {
        let mut out = vec![Vec::new(); self.rows];
        for (c, col) in self.columns.iter().enumerate() {
            for &(r, v) in col {
                out[r as usize].push((c as u32, v));
            }
        }
        out
    }

    pub fn transpose(&self) -> Self {
        Self::from_columns(self.cols, self.row_lists())
    }

    pub fn scaled(&self, k: i64) -> Self {
        if k == 0 {
            return Self::zeros(self.rows, self.cols);
        }
        Self {
            rows: self.rows,
            cols: self.cols,
            columns: self
                .columns
                .iter()
                .map(|col| col.iter().map(|&(r, v)| (r, v * k)).collect())
                .collect(),
        }
    }

    /// `self * rhs`
    pub fn mul(&self, rhs: &SparseMatrix) -> SparseMatrix {
        assert_eq!(self.cols, rhs.rows, "dimension mismatch in product");
        let mut acc = vec![0i64; self.rows];
        let mut touched = Vec::new();
        let columns = rhs
            .columns
            .iter()
            .map(|bcol| {
                for &(k, b) in bcol {
                    for &(r, a) in &self.columns[k as usize] {
                        let slot = &mut acc[r as usize];
                        if *slot == 0 {
                            touched.push(r);
                        }
                        *slot += a * b;
                    }
                }
                touched.sort_unstable();
                let col: Vec<(u32, i64)> = touched
                    .drain(..)
                    .filter_map(|r| {
                        let v = std::mem::take(&mut acc[r as usize]);
                        (v != 0).then_some((r, v))
                    })
                    .collect();
                col
            })
            .collect();
        // a row touched twice (cancelled to zero, then refilled) is taken on
        // its first occurrence; the second reads zero and is dropped
        SparseMatrix::from_columns(self.rows, columns)
    }

    pub fn add(&self, rhs: &SparseMatrix) -> SparseMatrix {
        assert_eq!(
            (self.rows, self.cols),
            (rhs.rows, rhs.cols),
            "dimension mismatch in sum"
        );
        SparseMatrix::from_triplets(self.rows, self.cols, self.triplets().chain(rhs.triplets()))
    }

    pub fn sub(&self, rhs: &SparseMatrix) -> SparseMatrix {
        self.add(&rhs.scaled(-1))
    }

    /// `[a 0; 0 b]`
    pub fn block_diag(a: &SparseMatrix, b: &SparseMatrix) -> SparseMatrix {
        let mut columns = a.columns.clone();
        let off = a.rows as u32;
        columns.extend(
            b.columns
                .iter()
                .map(|col| col.iter().map(|&(r, v)| (r + off, v)).collect()),
        );
        SparseMatrix::from_columns(a.rows + b.rows, columns)
    }

    /// `[a b; c d]` for conformable blocks.
    pub fn blocks(a: &SparseMatrix, b: &SparseMatrix, c: &SparseMatrix, d: &SparseMatrix) -> SparseMatrix {
        assert_eq!(a.rows, b.rows);
        assert_eq!(c.rows, d.rows);
        assert_eq!(a.cols, c.cols);
        assert_eq!(b.cols, d.cols);
        let off = a.rows as u32;
        let stack = |top: &SparseMatrix, bottom: &SparseMatrix| -> Vec<Vec<(u32, i64)>> {
            top.columns
                .iter()
                .zip(&bottom.columns)
                .map(|(t, u)| t.iter().copied().chain(u.iter().map(|&(r, v)| (r + off, v))).collect())
                .collect()
        };
        let mut columns = stack(a, c);
        columns.extend(stack(b, d));
        SparseMatrix::from_columns(a.rows + c.rows, columns)
    }

    /// Reduces entries mod 2 (keeping 1 for odd values).
    pub fn mod2(&self) -> SparseMatrix {
        Self {
            rows: self.rows,
            cols: self.cols,
            columns: self
                .columns
                .iter()
                .map(|col| col.iter().filter(|&&(_, v)| v % 2 != 0).map(|&(r, _)| (r, 1)).collect())
                .collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn product_matches_dense() {
        let a = SparseMatrix::from_dense(&[vec![1, 2, 0], vec![0, -1, 3]]);
        let b = SparseMatrix::from_dense(&[vec![1, 0], vec![1, 1], vec![0, 2]]);
        assert_eq!(a.mul(&b).to_dense(), vec![vec![3, 2], vec![-1, 5]]);
    }

    #[test]
    fn product_cancellation_leaves_no_zeros() {
        let a = SparseMatrix::from_dense(&[vec![1, -1]]);
        let b = SparseMatrix::from_dense(&[vec![1], vec![1]]);
        let p = a.mul(&b);
        assert!(p.is_zero());
        assert_eq!(p.nnz(), 0);
    }

    #[test]
    fn blocks_and_transpose() {
        let a = SparseMatrix::identity(1);
        let z = SparseMatrix::zeros(1, 1);
        let b = SparseMatrix::from_dense(&[vec![5]]);
        let m = SparseMatrix::blocks(&a, &z, &b, &a);
        assert_eq!(m.to_dense(), vec![vec![1, 0], vec![5, 1]]);
        assert_eq!(m.transpose().to_dense(), vec![vec![1, 5], vec![0, 1]]);
        assert_eq!(
            SparseMatrix::block_diag(&a, &b).to_dense(),
            vec![vec![1, 0], vec![0, 5]]
        );
    }
}
