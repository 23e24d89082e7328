use rand::Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::rng::stream_rng;

/// Simple undirected graph: symmetric 0/1 matrix with zero diagonal.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AdjacencyMatrix {
    n: usize,
    entries: Vec<bool>,
}

impl AdjacencyMatrix {
    pub fn empty(n: usize) -> Self {
        Self {
            n,
            entries: vec![false; n * n],
        }
    }

    /// Edges as 0-based pairs; order within a pair is ignored.
    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Result<Self> {
        let mut a = Self::empty(n);
        for &(i, j) in edges {
            if i >= n || j >= n {
                return Err(Error::invalid(format!(
                    "edge ({i}, {j}) out of range for n = {n}"
                )));
            }
            if i == j {
                return Err(Error::invalid(format!("self-loop at node {i}")));
            }
            a.set(i, j, true);
        }
        Ok(a)
    }

    /// Row-major dense 0/1 rows; must be symmetric with zero diagonal.
    pub fn from_dense(rows: &[Vec<u8>]) -> Result<Self> {
        let n = rows.len();
        let mut a = Self::empty(n);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(Error::shape(n, format!("{} entries in row {i}", row.len())));
            }
            for (j, &v) in row.iter().enumerate() {
                if v > 1 {
                    return Err(Error::invalid(format!("entry ({i}, {j}) is not 0/1")));
                }
                if i == j && v == 1 {
                    return Err(Error::invalid(format!("self-loop at node {i}")));
                }
                if v != rows[j][i] {
                    return Err(Error::invalid(format!("asymmetric entry ({i}, {j})")));
                }
                a.entries[i * n + j] = v == 1;
            }
        }
        Ok(a)
    }

    /// Independent `Bernoulli(prob(i, j))` over `i < j`. Row `i` draws from
    /// its own stream of `seed`, so the result does not depend on scheduling.
    pub fn sample<F>(n: usize, seed: u64, prob: F) -> Self
    where
        F: Fn(usize, usize) -> f64 + Sync,
    {
        let rows: Vec<Vec<bool>> = (0..n)
            .into_par_iter()
            .map(|i| {
                let mut rng = stream_rng(seed, i as u64);
                ((i + 1)..n).map(|j| rng.random::<f64>() < prob(i, j)).collect()
            })
            .collect();
        let mut a = Self::empty(n);
        for (i, row) in rows.into_iter().enumerate() {
            for (off, e) in row.into_iter().enumerate() {
                a.set(i, i + 1 + off, e);
            }
        }
        a
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> bool {
        self.entries[i * self.n + j]
    }

    fn set(&mut self, i: usize, j: usize, v: bool) {
        self.entries[i * self.n + j] = v;
        self.entries[j * self.n + i] = v;
    }

    pub fn edge_count(&self) -> usize {
        self.entries.iter().filter(|&&e| e).count() / 2
    }

    /// Edges over `n(n−1)/2`; zero for `n < 2`.
    pub fn density(&self) -> f64 {
        if self.n < 2 {
            return 0.0;
        }
        self.edge_count() as f64 / (self.n * (self.n - 1) / 2) as f64
    }

    /// Pairs `i < j` in row-major order.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        (0..self.n)
            .flat_map(|i| ((i + 1)..self.n).map(move |j| (i, j)))
            .filter(|&(i, j)| self.get(i, j))
            .collect()
    }

    pub fn neighbors(&self, i: usize) -> impl Iterator<Item = usize> + '_ {
        (0..self.n).filter(move |&j| self.get(i, j))
    }

    pub fn degree(&self, i: usize) -> usize {
        self.neighbors(i).count()
    }

    /// Hop counts by breadth-first search; `None` when unreachable.
    pub fn shortest_paths(&self) -> Vec<Vec<Option<usize>>> {
        (0..self.n)
            .map(|s| {
                let mut dist = vec![None; self.n];
                dist[s] = Some(0);
                let mut queue = std::collections::VecDeque::from([s]);
                while let Some(u) = queue.pop_front() {
                    let du = dist[u].unwrap_or(0);
                    for v in self.neighbors(u) {
                        if dist[v].is_none() {
                            dist[v] = Some(du + 1);
                            queue.push_back(v);
                        }
                    }
                }
                dist
            })
            .collect()
    }

    pub fn is_valid(&self) -> bool {
        (0..self.n).all(|i| !self.get(i, i) && (0..self.n).all(|j| self.get(i, j) == self.get(j, i)))
    }
}
