//! Compressed sparse row storage for symmetric, zero-diagonal matrices.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};

/// A symmetric `n x n` matrix with an empty diagonal, stored in CSR form.
///
/// Both `(i, j)` and `(j, i)` are stored so row scans see every neighbor.
/// Columns inside a row are strictly ascending.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SparseSymmetric {
    n: usize,
    row_ptr: Vec<usize>,
    cols: Vec<u32>,
    vals: Vec<f64>,
}

impl SparseSymmetric {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            row_ptr: vec![0; n + 1],
            cols: Vec::new(),
            vals: Vec::new(),
        }
    }

    /// Builds a matrix from undirected weighted edges. Parallel edges sum,
    /// self loops are dropped.
    pub fn from_edges<I>(n: usize, edges: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize, f64)>,
    {
        let mut entries: Vec<(u32, u32, f64)> = Vec::new();
        for (i, j, w) in edges {
            if i >= n || j >= n {
                return Err(Error::Dimension {
                    expected: n,
                    actual: i.max(j) + 1,
                    context: "edge endpoint outside matrix",
                });
            }
            if i == j || w == 0.0 {
                continue;
            }
            entries.push((i as u32, j as u32, w));
            entries.push((j as u32, i as u32, w));
        }
        Ok(Self::from_sorted_entries(n, entries, |a, b| a + b))
    }

    /// Builds a 0/1 adjacency matrix. Repeated edges (in either orientation)
    /// collapse to a single 1.
    pub fn from_unit_edges<I>(n: usize, edges: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize)>,
    {
        let mut entries: Vec<(u32, u32, f64)> = Vec::new();
        for (i, j) in edges {
            if i >= n || j >= n {
                return Err(Error::Dimension {
                    expected: n,
                    actual: i.max(j) + 1,
                    context: "edge endpoint outside matrix",
                });
            }
            if i == j {
                continue;
            }
            entries.push((i as u32, j as u32, 1.0));
            entries.push((j as u32, i as u32, 1.0));
        }
        Ok(Self::from_sorted_entries(n, entries, |a, _| a))
    }

    fn from_sorted_entries(
        n: usize,
        mut entries: Vec<(u32, u32, f64)>,
        merge: impl Fn(f64, f64) -> f64,
    ) -> Self {
        entries.sort_unstable_by_key(|e| (e.0, e.1));
        let mut row_ptr = vec![0usize; n + 1];
        let mut cols: Vec<u32> = Vec::with_capacity(entries.len());
        let mut vals: Vec<f64> = Vec::with_capacity(entries.len());
        let mut last: Option<(u32, u32)> = None;
        for (r, c, v) in entries {
            if last == Some((r, c)) {
                let slot = vals.last_mut().expect("entry exists");
                *slot = merge(*slot, v);
                continue;
            }
            last = Some((r, c));
            row_ptr[r as usize + 1] += 1;
            cols.push(c);
            vals.push(v);
        }
        for i in 0..n {
            row_ptr[i + 1] += row_ptr[i];
        }
        Self {
            n,
            row_ptr,
            cols,
            vals,
        }
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.n
    }

    /// Number of stored entries (each undirected edge counts twice).
    pub fn nnz(&self) -> usize {
        self.cols.len()
    }

    pub fn is_zero(&self) -> bool {
        self.vals.iter().all(|v| *v == 0.0)
    }

    /// Neighbors of `i` with their weights, ascending by column.
    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let (lo, hi) = (self.row_ptr[i], self.row_ptr[i + 1]);
        self.cols[lo..hi]
            .iter()
            .zip(&self.vals[lo..hi])
            .map(|(&c, &v)| (c as usize, v))
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        if i >= self.n || j >= self.n {
            return 0.0;
        }
        let (lo, hi) = (self.row_ptr[i], self.row_ptr[i + 1]);
        match self.cols[lo..hi].binary_search(&(j as u32)) {
            Ok(pos) => self.vals[lo + pos],
            Err(_) => 0.0,
        }
    }

    /// Upper-triangle edges `(i, j, w)` with `i < j`.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.n).flat_map(move |i| {
            self.row(i)
                .filter(move |(j, _)| *j > i)
                .map(move |(j, w)| (i, j, w))
        })
    }

    /// Row vector times matrix: `y[j] = sum_i x[i] * M[i][j]`.
    pub fn left_mul(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.n {
            return Err(Error::Dimension {
                expected: self.n,
                actual: x.len(),
                context: "activation row length",
            });
        }
        let mut y = vec![0.0; self.n];
        for (i, &xi) in x.iter().enumerate() {
            if xi == 0.0 {
                continue;
            }
            for (j, w) in self.row(i) {
                y[j] += xi * w;
            }
        }
        Ok(y)
    }

    /// `sum_i weights[i] * mats[i]`, skipping zero weights.
    pub fn weighted_sum(n: usize, mats: &[&SparseSymmetric], weights: &[f64]) -> Result<Self> {
        if mats.len() != weights.len() {
            return Err(Error::Dimension {
                expected: mats.len(),
                actual: weights.len(),
                context: "property weights vs slices",
            });
        }
        let mut entries: Vec<(u32, u32, f64)> = Vec::new();
        for (m, &w) in mats.iter().zip(weights) {
            if m.n != n {
                return Err(Error::Dimension {
                    expected: n,
                    actual: m.n,
                    context: "slice dimension",
                });
            }
            if w == 0.0 {
                continue;
            }
            for i in 0..n {
                for (j, v) in m.row(i) {
                    entries.push((i as u32, j as u32, w * v));
                }
            }
        }
        Ok(Self::from_sorted_entries(n, entries, |a, b| a + b))
    }

    /// Dense copy, for tests and small debugging output.
    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let mut out = vec![vec![0.0; self.n]; self.n];
        for (i, row) in out.iter_mut().enumerate() {
            for (j, v) in self.row(i) {
                row[j] = v;
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parallel_edges_sum_and_self_loops_vanish() {
        let m = SparseSymmetric::from_edges(3, [(0, 1, 0.5), (1, 0, 0.25), (2, 2, 1.0)]).unwrap();
        assert_eq!(m.get(0, 1), 0.75);
        assert_eq!(m.get(1, 0), 0.75);
        assert_eq!(m.get(2, 2), 0.0);
        assert_eq!(m.nnz(), 2);
    }

    #[test]
    fn unit_edges_dedup_both_orientations() {
        let m = SparseSymmetric::from_unit_edges(2, [(0, 1), (1, 0), (0, 1)]).unwrap();
        assert_eq!(m.to_dense(), vec![vec![0.0, 1.0], vec![1.0, 0.0]]);
    }

    #[test]
    fn left_mul_matches_dense() {
        let m = SparseSymmetric::from_edges(3, [(0, 2, 2.0), (1, 2, 3.0)]).unwrap();
        let y = m.left_mul(&[1.0, 0.5, 0.0]).unwrap();
        assert_eq!(y, vec![0.0, 0.0, 3.5]);
        assert!(m.left_mul(&[1.0]).is_err());
    }

    #[test]
    fn out_of_range_edge_is_rejected() {
        assert!(SparseSymmetric::from_unit_edges(2, [(0, 2)]).is_err());
    }
}
