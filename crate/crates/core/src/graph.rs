use std::collections::HashSet;
use std::fmt;

use crate::{Error, Result};

/// A directed edge `(src, dst)`.
pub type Edge = (u64, u64);

/// Edges of a sampled graph over a `num_rows × num_cols` node space.
///
/// Edges are kept in emission order. Every edge is in range and no pair
/// appears twice.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EdgeList {
    num_rows: u64,
    num_cols: u64,
    edges: Vec<Edge>,
}

impl EdgeList {
    pub fn new(num_rows: u64, num_cols: u64) -> Self {
        EdgeList {
            num_rows,
            num_cols,
            edges: Vec::new(),
        }
    }

    /// Builds a list from arbitrary edges, checking ranges and duplicates.
    pub fn from_edges(num_rows: u64, num_cols: u64, edges: Vec<Edge>) -> Result<Self> {
        let mut seen = HashSet::with_capacity(edges.len());
        for &(s, d) in &edges {
            if s >= num_rows || d >= num_cols {
                return Err(Error::Range(format!(
                    "edge ({s}, {d}) outside {num_rows}x{num_cols} node space"
                )));
            }
            if !seen.insert((s, d)) {
                return Err(Error::Domain(format!("duplicate edge ({s}, {d})")));
            }
        }
        Ok(EdgeList {
            num_rows,
            num_cols,
            edges,
        })
    }

    /// Appends an edge the caller already knows is in range and new.
    pub(crate) fn push_unchecked(&mut self, edge: Edge) {
        debug_assert!(edge.0 < self.num_rows && edge.1 < self.num_cols);
        self.edges.push(edge);
    }

    pub(crate) fn reserve(&mut self, additional: usize) {
        self.edges.reserve(additional);
    }

    pub fn num_rows(&self) -> u64 {
        self.num_rows
    }

    pub fn num_cols(&self) -> u64 {
        self.num_cols
    }

    pub fn is_square(&self) -> bool {
        self.num_rows == self.num_cols
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Edge> {
        self.edges.iter()
    }

    pub fn into_edges(self) -> Vec<Edge> {
        self.edges
    }

    /// Sorts edges lexicographically by `(src, dst)`.
    pub fn sort(&mut self) {
        self.edges.sort_unstable();
    }

    /// Dense 0/1 adjacency in row-major order. Small graphs only.
    pub fn to_dense(&self) -> Vec<bool> {
        let cols = self.num_cols as usize;
        let mut dense = vec![false; self.num_rows as usize * cols];
        for &(s, d) in &self.edges {
            dense[s as usize * cols + d as usize] = true;
        }
        dense
    }
}

impl<'a> IntoIterator for &'a EdgeList {
    type Item = &'a Edge;
    type IntoIter = std::slice::Iter<'a, Edge>;

    fn into_iter(self) -> Self::IntoIter {
        self.edges.iter()
    }
}

/// Dense matrix of edge probabilities, stored row-major.
///
/// Meant for oracle-scale models (initiators, block matrices, small
/// Kronecker powers), never for the graphs the fast samplers produce.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbabilityMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl ProbabilityMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::Shape(format!(
                "{} entries for a {rows}x{cols} matrix",
                data.len()
            )));
        }
        if let Some((idx, &bad)) = data
            .iter()
            .enumerate()
            .find(|(_, x)| !(0.0..=1.0).contains(*x))
        {
            return Err(Error::Domain(format!(
                "entry ({}, {}) = {bad} is not a probability",
                idx / cols.max(1),
                idx % cols.max(1)
            )));
        }
        Ok(ProbabilityMatrix { rows, cols, data })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if let Some(r) = rows.iter().position(|r| r.len() != cols) {
            return Err(Error::Shape(format!(
                "row {r} has {} entries, expected {cols}",
                rows[r].len()
            )));
        }
        Self::new(rows.len(), cols, rows.concat())
    }

    pub fn constant(rows: usize, cols: usize, value: f64) -> Result<Self> {
        Self::new(rows, cols, vec![value; rows * cols])
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.data[row * self.cols + col]
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    /// Kronecker product `self ⊗ rhs`.
    ///
    /// Entry `(i, j)` is `self[i / r, j / c] * rhs[i % r, j % c]`, with the
    /// left factor multiplied first.
    pub fn kron(&self, rhs: &ProbabilityMatrix) -> ProbabilityMatrix {
        let rows = self.rows * rhs.rows;
        let cols = self.cols * rhs.cols;
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(
                    self.get(i / rhs.rows, j / rhs.cols) * rhs.get(i % rhs.rows, j % rhs.cols),
                );
            }
        }
        ProbabilityMatrix { rows, cols, data }
    }
}

impl fmt::Display for ProbabilityMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.rows {
            let row: Vec<String> = (0..self.cols)
                .map(|j| format!("{:.4}", self.get(i, j)))
                .collect();
            writeln!(f, "{}", row.join(" "))?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn from_edges_rejects_duplicates_and_out_of_range() {
        assert!(EdgeList::from_edges(2, 2, vec![(0, 1), (0, 1)]).is_err());
        assert!(EdgeList::from_edges(2, 2, vec![(2, 0)]).is_err());
        assert!(EdgeList::from_edges(2, 3, vec![(1, 2)]).is_ok());
    }

    #[test]
    fn matrix_rejects_non_probabilities() {
        assert!(matches!(
            ProbabilityMatrix::new(1, 2, vec![0.5, 1.5]),
            Err(Error::Domain(_))
        ));
        assert!(matches!(
            ProbabilityMatrix::new(1, 2, vec![0.5]),
            Err(Error::Shape(_))
        ));
        assert!(ProbabilityMatrix::new(1, 1, vec![f64::NAN]).is_err());
    }

    #[test]
    fn kron_of_two_by_two() {
        let k = ProbabilityMatrix::from_rows(&[vec![0.99, 0.5], vec![0.5, 0.2]]).unwrap();
        let k2 = k.kron(&k);
        assert_eq!(k2.rows(), 4);
        assert_eq!(k2.get(0, 0), 0.99 * 0.99);
        assert_eq!(k2.get(0, 3), 0.25);
        assert_eq!(k2.get(3, 3), 0.2 * 0.2);
    }
}
