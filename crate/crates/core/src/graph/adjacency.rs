use crate::error::{Error, Result};
use crate::linalg::Matrix;

use super::Graph;

/// `D̃^{-1/2} (A + I) D̃^{-1/2}` in compressed sparse row form.
///
/// Column indices within a row are strictly increasing. The matrix is
/// symmetric, so it doubles as its own transpose in the backward pass.
#[derive(Debug, Clone, PartialEq)]
pub struct NormalizedAdjacency {
    n: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
}

/// Symmetric normalization with self-loops added.
pub fn normalize_adjacency(graph: &Graph) -> NormalizedAdjacency {
    let n = graph.num_nodes();
    let mut neighbors: Vec<Vec<usize>> = (0..n).map(|i| vec![i]).collect();
    for &(u, v) in graph.edges() {
        neighbors[u].push(v);
        neighbors[v].push(u);
    }
    for list in &mut neighbors {
        list.sort_unstable();
    }
    // every node has its self-loop, so degree >= 1
    let degree: Vec<usize> = neighbors.iter().map(Vec::len).collect();

    let mut row_ptr = Vec::with_capacity(n + 1);
    let mut col_idx = Vec::with_capacity(n + 2 * graph.num_edges());
    let mut values = Vec::with_capacity(n + 2 * graph.num_edges());
    row_ptr.push(0);
    for (i, list) in neighbors.iter().enumerate() {
        for &j in list {
            col_idx.push(j);
            // integer product keeps regular cases exact, e.g. 1/√(2·2) = 0.5
            values.push(1.0 / ((degree[i] * degree[j]) as f64).sqrt());
        }
        row_ptr.push(col_idx.len());
    }
    NormalizedAdjacency {
        n,
        row_ptr,
        col_idx,
        values,
    }
}

impl NormalizedAdjacency {
    pub fn identity(n: usize) -> Self {
        Self {
            n,
            row_ptr: (0..=n).collect(),
            col_idx: (0..n).collect(),
            values: vec![1.0; n],
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    /// Entry `(i, j)`, zero when not stored.
    pub fn get(&self, i: usize, j: usize) -> f64 {
        let row = &self.col_idx[self.row_ptr[i]..self.row_ptr[i + 1]];
        match row.binary_search(&j) {
            Ok(pos) => self.values[self.row_ptr[i] + pos],
            Err(_) => 0.0,
        }
    }

    /// `(column, value)` pairs of row `i`.
    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let range = self.row_ptr[i]..self.row_ptr[i + 1];
        self.col_idx[range.clone()]
            .iter()
            .copied()
            .zip(self.values[range].iter().copied())
    }

    pub fn to_dense(&self) -> Matrix {
        let mut out = Matrix::zeros(self.n, self.n);
        for i in 0..self.n {
            for (j, v) in self.row(i) {
                out[(i, j)] = v;
            }
        }
        out
    }

    /// Sparse-times-dense product `Â · m`.
    pub fn matmul(&self, m: &Matrix) -> Result<Matrix> {
        if m.nrows() != self.n {
            return Err(Error::Shape(format!(
                "adjacency is {0}x{0} but right operand has {1} rows",
                self.n,
                m.nrows()
            )));
        }
        let mut out = Matrix::zeros(self.n, m.ncols());
        // storage is column-major: walk one dense column at a time
        for c in 0..m.ncols() {
            let src = m.column(c);
            let mut dst = out.column_mut(c);
            for i in 0..self.n {
                let mut acc = 0.0;
                for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                    acc += self.values[k] * src[self.col_idx[k]];
                }
                dst[i] = acc;
            }
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{fixtures, Split};
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Dense O(N²) reference: build A+I, degrees, then scale every entry.
    fn dense_oracle(n: usize, edges: &[(usize, usize)]) -> Matrix {
        let mut a = Matrix::identity(n, n);
        for &(u, v) in edges {
            if u != v {
                a[(u, v)] = 1.0;
                a[(v, u)] = 1.0;
            }
        }
        let deg: Vec<f64> = (0..n).map(|i| a.row(i).sum()).collect();
        Matrix::from_fn(n, n, |i, j| a[(i, j)] / (deg[i].sqrt() * deg[j].sqrt()))
    }

    fn graph_from(n: usize, edges: Vec<(usize, usize)>) -> Graph {
        Graph::new(
            n,
            edges,
            Matrix::zeros(n, 1),
            vec![0; n],
            1,
            vec![Split::Train; n],
        )
        .unwrap()
    }

    fn random_edges(n: usize, p: f64, seed: u64) -> Vec<(usize, usize)> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut edges = Vec::new();
        for u in 0..n {
            for v in (u + 1)..n {
                if rng.random::<f64>() < p {
                    edges.push((u, v));
                }
            }
        }
        edges
    }

    #[test]
    fn single_node() {
        let adj = normalize_adjacency(&graph_from(1, vec![]));
        assert_eq!(adj.to_dense(), Matrix::from_row_slice(1, 1, &[1.0]));
    }

    #[test]
    fn two_nodes_one_edge() {
        let adj = normalize_adjacency(&graph_from(2, vec![(0, 1)]));
        assert_eq!(
            adj.to_dense(),
            Matrix::from_row_slice(2, 2, &[0.5, 0.5, 0.5, 0.5])
        );
    }

    #[test]
    fn eight_node_matches_dense_oracle() {
        let g = fixtures::eight_node();
        let adj = normalize_adjacency(&g).to_dense();
        let oracle = dense_oracle(8, g.edges());
        for i in 0..8 {
            for j in 0..8 {
                assert!((adj[(i, j)] - oracle[(i, j)]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn spectrum_in_half_open_unit_interval() {
        let n = 30;
        let g = graph_from(n, random_edges(n, 0.2, 3));
        let dense = normalize_adjacency(&g).to_dense();
        let eig = nalgebra::SymmetricEigen::new(dense.clone());
        for &l in eig.eigenvalues.iter() {
            assert!(l > -1.0 + 1e-12 && l <= 1.0 + 1e-12, "eigenvalue {l}");
        }
        for i in 0..n {
            assert!(dense[(i, i)] > 0.0);
            for j in 0..n {
                assert!(dense[(i, j)] >= 0.0);
            }
        }
    }

    #[test]
    fn matmul_matches_dense() {
        let g = graph_from(12, random_edges(12, 0.3, 9));
        let adj = normalize_adjacency(&g);
        let m = Matrix::from_fn(12, 4, |i, j| ((i * 7 + j * 3) % 5) as f64 - 2.0);
        let sparse = adj.matmul(&m).unwrap();
        let dense = adj.to_dense() * &m;
        assert!((sparse - dense).norm() < 1e-12);
        assert!(adj.matmul(&Matrix::zeros(3, 1)).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn symmetric_and_matches_oracle(n in 1usize..=50, p in 0.0f64..0.5, seed in any::<u64>()) {
            let edges = random_edges(n, p, seed);
            let g = graph_from(n, edges.clone());
            let adj = normalize_adjacency(&g).to_dense();
            let oracle = dense_oracle(n, &edges);
            for i in 0..n {
                for j in 0..n {
                    prop_assert!((adj[(i, j)] - adj[(j, i)]).abs() <= 1e-12);
                    prop_assert!((adj[(i, j)] - oracle[(i, j)]).abs() <= 1e-12);
                }
            }
        }

        #[test]
        fn relabeling_permutes_rows_and_columns(n in 2usize..=20, seed in any::<u64>()) {
            let edges = random_edges(n, 0.3, seed);
            let mut perm: Vec<usize> = (0..n).collect();
            let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xabcdef);
            for i in (1..n).rev() {
                let j = rng.random_range(0..=i);
                perm.swap(i, j);
            }
            // node u becomes perm[u]
            let permuted: Vec<(usize, usize)> = edges.iter().map(|&(u, v)| (perm[u], perm[v])).collect();
            let a = normalize_adjacency(&graph_from(n, edges)).to_dense();
            let b = normalize_adjacency(&graph_from(n, permuted)).to_dense();
            for u in 0..n {
                for v in 0..n {
                    prop_assert!((b[(perm[u], perm[v])] - a[(u, v)]).abs() <= 1e-12);
                }
            }
        }
    }
}
