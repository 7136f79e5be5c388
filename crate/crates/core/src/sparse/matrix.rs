use rayon::prelude::*;

use crate::error::{Error, Result};

/// Compressed sparse row matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseMatrix {
    n_rows: usize,
    n_cols: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
}

/// Collects `(row, col, value)` contributions; duplicates are summed.
#[derive(Debug, Clone, Default)]
pub struct TripletBuilder {
    entries: Vec<(u64, f64)>,
}

impl TripletBuilder {
    pub fn with_capacity(n: usize) -> Self {
        TripletBuilder {
            entries: Vec::with_capacity(n),
        }
    }

    #[inline]
    pub fn push(&mut self, row: usize, col: usize, value: f64) {
        self.entries.push((((row as u64) << 32) | col as u64, value));
    }

    /// Builds the matrix. Duplicates are summed in a canonical order, so the
    /// result does not depend on the order of the contributions.
    pub fn build(mut self, n_rows: usize, n_cols: usize) -> SparseMatrix {
        assert!(n_rows < (1 << 32) && n_cols < (1 << 32));
        self.entries
            .par_sort_unstable_by(|a, b| a.0.cmp(&b.0).then(a.1.total_cmp(&b.1)));
        let mut row_ptr = vec![0usize; n_rows + 1];
        let mut col_idx = Vec::with_capacity(self.entries.len() / 4);
        let mut values: Vec<f64> = Vec::with_capacity(self.entries.len() / 4);
        let mut last = u64::MAX;
        for &(key, v) in &self.entries {
            if key == last {
                *values.last_mut().unwrap() += v;
            } else {
                let row = (key >> 32) as usize;
                let col = (key & 0xffff_ffff) as usize;
                assert!(row < n_rows && col < n_cols, "entry ({row}, {col}) out of bounds");
                row_ptr[row + 1] += 1;
                col_idx.push(col);
                values.push(v);
                last = key;
            }
        }
        for i in 0..n_rows {
            row_ptr[i + 1] += row_ptr[i];
        }
        SparseMatrix {
            n_rows,
            n_cols,
            row_ptr,
            col_idx,
            values,
        }
    }
}

impl SparseMatrix {
    pub fn from_triplets(n_rows: usize, n_cols: usize, triplets: &[(usize, usize, f64)]) -> Self {
        let mut b = TripletBuilder::with_capacity(triplets.len());
        for &(i, j, v) in triplets {
            b.push(i, j, v);
        }
        b.build(n_rows, n_cols)
    }

    pub fn identity(n: usize) -> Self {
        SparseMatrix {
            n_rows: n,
            n_cols: n,
            row_ptr: (0..=n).collect(),
            col_idx: (0..n).collect(),
            values: vec![1.0; n],
        }
    }

    pub fn zeros(n_rows: usize, n_cols: usize) -> Self {
        SparseMatrix {
            n_rows,
            n_cols,
            row_ptr: vec![0; n_rows + 1],
            col_idx: Vec::new(),
            values: Vec::new(),
        }
    }

    pub fn from_dense(a: &[Vec<f64>]) -> Self {
        let mut b = TripletBuilder::default();
        for (i, row) in a.iter().enumerate() {
            for (j, &v) in row.iter().enumerate() {
                if v != 0.0 {
                    b.push(i, j, v);
                }
            }
        }
        b.build(a.len(), a.first().map_or(0, |r| r.len()))
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row_ptr(&self) -> &[usize] {
        &self.row_ptr
    }

    pub fn col_idx(&self) -> &[usize] {
        &self.col_idx
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        self.col_idx[r.clone()].iter().copied().zip(self.values[r].iter().copied())
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        match self.col_idx[r.clone()].binary_search(&j) {
            Ok(k) => self.values[r.start + k],
            Err(_) => 0.0,
        }
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.n_rows.min(self.n_cols)).map(|i| self.get(i, i)).collect()
    }

    /// `y = A x`.
    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.n_rows];
        self.mul_vec_into(x, &mut y);
        y
    }

    pub fn mul_vec_into(&self, x: &[f64], y: &mut [f64]) {
        assert_eq!(x.len(), self.n_cols);
        assert_eq!(y.len(), self.n_rows);
        for (i, yi) in y.iter_mut().enumerate() {
            let mut s = 0.0;
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                s += self.values[k] * x[self.col_idx[k]];
            }
            *yi = s;
        }
    }

    /// `y += alpha A x`.
    pub fn mul_vec_add(&self, alpha: f64, x: &[f64], y: &mut [f64]) {
        for (i, yi) in y.iter_mut().enumerate() {
            let mut s = 0.0;
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                s += self.values[k] * x[self.col_idx[k]];
            }
            *yi += alpha * s;
        }
    }

    /// Bilinear form `x^T A y`.
    pub fn quad_form(&self, x: &[f64], y: &[f64]) -> f64 {
        (0..self.n_rows)
            .map(|i| x[i] * self.row(i).map(|(j, v)| v * y[j]).sum::<f64>())
            .sum()
    }

    /// Extracts the block with the given rows and columns. `row_map[i]` is the
    /// position of original row `i` in the block or `usize::MAX` if dropped.
    pub fn submatrix(&self, row_map: &[usize], n_rows: usize, col_map: &[usize], n_cols: usize) -> SparseMatrix {
        let mut row_ptr = vec![0usize; n_rows + 1];
        let mut col_idx = Vec::new();
        let mut values = Vec::new();
        let mut order: Vec<usize> = (0..self.n_rows).filter(|&i| row_map[i] != usize::MAX).collect();
        order.sort_by_key(|&i| row_map[i]);
        let mut scratch: Vec<(usize, f64)> = Vec::new();
        for i in order {
            scratch.clear();
            scratch.extend(self.row(i).filter_map(|(j, v)| (col_map[j] != usize::MAX).then(|| (col_map[j], v))));
            scratch.sort_by_key(|e| e.0);
            for &(j, v) in &scratch {
                col_idx.push(j);
                values.push(v);
            }
            row_ptr[row_map[i] + 1] = scratch.len();
        }
        for i in 0..n_rows {
            row_ptr[i + 1] += row_ptr[i];
        }
        SparseMatrix {
            n_rows,
            n_cols,
            row_ptr,
            col_idx,
            values,
        }
    }

    /// `self + alpha * other`, both with the same shape.
    pub fn add_scaled(&self, alpha: f64, other: &SparseMatrix) -> Result<SparseMatrix> {
        if self.n_rows != other.n_rows || self.n_cols != other.n_cols {
            return Err(Error::DimensionMismatch {
                expected: self.n_rows,
                got: other.n_rows,
            });
        }
        let mut b = TripletBuilder::with_capacity(self.nnz() + other.nnz());
        for i in 0..self.n_rows {
            for (j, v) in self.row(i) {
                b.push(i, j, v);
            }
            for (j, v) in other.row(i) {
                b.push(i, j, alpha * v);
            }
        }
        Ok(b.build(self.n_rows, self.n_cols))
    }

    pub fn scaled(&self, alpha: f64) -> SparseMatrix {
        let mut m = self.clone();
        m.values.iter_mut().for_each(|v| *v *= alpha);
        m
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let mut a = vec![vec![0.0; self.n_cols]; self.n_rows];
        for (i, row) in a.iter_mut().enumerate() {
            for (j, v) in self.row(i) {
                row[j] = v;
            }
        }
        a
    }

    /// Largest `|a_ij - a_ji|` relative to the largest entry.
    pub fn symmetry_defect(&self) -> f64 {
        let scale = self.values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if scale == 0.0 {
            return 0.0;
        }
        let mut d = 0.0f64;
        for i in 0..self.n_rows {
            for (j, v) in self.row(i) {
                d = d.max((v - self.get(j, i)).abs());
            }
        }
        d / scale
    }

    /// Largest absolute entry.
    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn duplicates_are_summed_in_canonical_order() {
        let t = [(0, 1, 0.1), (0, 1, 0.2), (1, 0, 3.0), (0, 1, 0.3), (1, 1, 1.0)];
        let mut rev = t;
        rev.reverse();
        let a = SparseMatrix::from_triplets(2, 2, &t);
        let b = SparseMatrix::from_triplets(2, 2, &rev);
        assert_eq!(a, b);
        assert_eq!(a.nnz(), 3);
        assert_eq!(a.mul_vec(&[1.0, 2.0]), vec![a.get(0, 1) * 2.0, 5.0]);
    }

    #[test]
    fn submatrix_selects_block() {
        let a = SparseMatrix::from_dense(&[vec![1.0, 2.0, 3.0], vec![4.0, 5.0, 6.0], vec![7.0, 8.0, 9.0]]);
        let map = [1, usize::MAX, 0];
        let s = a.submatrix(&map, 2, &map, 2);
        assert_eq!(s.to_dense(), vec![vec![9.0, 7.0], vec![3.0, 1.0]]);
        assert_eq!(s.symmetry_defect(), 4.0 / 9.0);
    }
}
