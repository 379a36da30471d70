//! Similarity graph over vertices and its sparsification.

use std::fmt;
use std::io::{self, Write};
use std::str::FromStr;

use rayon::prelude::*;

use crate::distance::similarity;
use crate::partition::Vertex;

/// Symmetric, zero-diagonal weight matrix. Rows `0..labelled` hold the
/// labelled vertices, the remaining rows the unlabelled ones.
#[derive(Clone, Debug, PartialEq)]
pub struct WeightMatrix {
    n: usize,
    labelled: usize,
    entries: Vec<f64>,
}

impl WeightMatrix {
    /// # Panics
    /// If `rows` is not square, not symmetric, has a nonzero diagonal or
    /// `labelled > n`.
    pub fn from_rows(rows: &[Vec<f64>], labelled: usize) -> Self {
        let n = rows.len();
        assert!(labelled <= n);
        let mut entries = vec![0.0; n * n];
        for (i, row) in rows.iter().enumerate() {
            assert_eq!(row.len(), n, "weight matrix must be square");
            for (j, &w) in row.iter().enumerate() {
                assert_eq!(w, rows[j][i], "weight matrix must be symmetric");
                entries[i * n + j] = w;
            }
            assert_eq!(row[i], 0.0, "weight matrix diagonal must be zero");
        }
        WeightMatrix {
            n,
            labelled,
            entries,
        }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn labelled(&self) -> usize {
        self.labelled
    }

    pub fn unlabelled(&self) -> usize {
        self.n - self.labelled
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.n + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.entries[i * self.n..(i + 1) * self.n]
    }

    pub fn degree(&self, i: usize) -> f64 {
        self.row(i).iter().sum()
    }

    /// Number of undirected edges with nonzero weight.
    pub fn edge_count(&self) -> usize {
        (0..self.n)
            .map(|i| self.row(i)[i + 1..].iter().filter(|&&w| w != 0.0).count())
            .sum()
    }

    fn keep(&self, mut keep: impl FnMut(usize, usize) -> bool) -> WeightMatrix {
        let mut entries = vec![0.0; self.n * self.n];
        for i in 0..self.n {
            for j in i + 1..self.n {
                if keep(i, j) {
                    let w = self.get(i, j);
                    entries[i * self.n + j] = w;
                    entries[j * self.n + i] = w;
                }
            }
        }
        WeightMatrix {
            n: self.n,
            labelled: self.labelled,
            entries,
        }
    }

    /// Writes one row per line, space separated.
    pub fn write_dense(&self, mut out: impl Write) -> io::Result<()> {
        for i in 0..self.n {
            let line: Vec<String> = self.row(i).iter().map(|w| w.to_string()).collect();
            writeln!(out, "{}", line.join(" "))?;
        }
        Ok(())
    }
}

/// Pairwise similarities; `labelled` vertices come first.
pub fn build_weights(labelled: &[Vertex], unlabelled: &[Vertex]) -> WeightMatrix {
    let vertices: Vec<&Vertex> = labelled.iter().chain(unlabelled).collect();
    let n = vertices.len();
    let upper: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|i| {
            (i + 1..n)
                .map(|j| similarity(vertices[i], vertices[j]))
                .collect()
        })
        .collect();
    let mut entries = vec![0.0; n * n];
    for (i, row) in upper.iter().enumerate() {
        for (offset, &w) in row.iter().enumerate() {
            let j = i + 1 + offset;
            entries[i * n + j] = w;
            entries[j * n + i] = w;
        }
    }
    WeightMatrix {
        n,
        labelled: labelled.len(),
        entries,
    }
}

/// Keeps edges with weight at least `epsilon`.
pub fn connect_enn(w: &WeightMatrix, epsilon: f64) -> WeightMatrix {
    w.keep(|i, j| w.get(i, j) >= epsilon)
}

/// Each vertex selects every neighbour whose weight is among its `k` largest
/// distinct nonzero weights; an edge survives if either endpoint selects it.
pub fn connect_knn(w: &WeightMatrix, k: usize) -> WeightMatrix {
    let cutoffs: Vec<f64> = (0..w.n)
        .map(|i| {
            let mut distinct: Vec<f64> = w.row(i).iter().copied().filter(|&x| x > 0.0).collect();
            distinct.sort_by(|a, b| b.total_cmp(a));
            distinct.dedup();
            match distinct.get(k.max(1) - 1).or(distinct.last()) {
                Some(&c) => c,
                None => f64::INFINITY,
            }
        })
        .collect();
    w.keep(|i, j| {
        let x = w.get(i, j);
        x > 0.0 && (x >= cutoffs[i] || x >= cutoffs[j])
    })
}

/// Connection heuristic turning `W` into the sparse `W'`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Connector {
    Knn(usize),
    Enn(f64),
}

impl Connector {
    pub const DEFAULT_K: usize = 2;
    pub const DEFAULT_EPSILON: f64 = 0.75;

    pub fn apply(&self, w: &WeightMatrix) -> WeightMatrix {
        match *self {
            Connector::Knn(k) => connect_knn(w, k),
            Connector::Enn(e) => connect_enn(w, e),
        }
    }

    pub fn validate(&self) -> Result<(), String> {
        match *self {
            Connector::Knn(0) => Err("k must be at least 1".into()),
            Connector::Enn(e) if !(0.0..=1.0).contains(&e) => {
                Err(format!("epsilon must lie in [0, 1], got {e}"))
            }
            _ => Ok(()),
        }
    }
}

impl Default for Connector {
    fn default() -> Self {
        Connector::Knn(Self::DEFAULT_K)
    }
}

impl fmt::Display for Connector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Connector::Knn(k) => write!(f, "knn({k})"),
            Connector::Enn(e) => write!(f, "enn({e})"),
        }
    }
}

impl FromStr for Connector {
    type Err = String;

    /// Accepts `knn(2)`, `knn:2`, `enn(0.75)` or `enn:0.75`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        let (name, value) = s
            .split_once(['(', ':', '='])
            .map(|(n, v)| (n.trim(), v.trim_end_matches(')').trim()))
            .ok_or_else(|| format!("invalid connector `{s}`"))?;
        let c = match name {
            "knn" => Connector::Knn(value.parse().map_err(|_| format!("invalid k `{value}`"))?),
            "enn" => Connector::Enn(
                value
                    .parse()
                    .map_err(|_| format!("invalid epsilon `{value}`"))?,
            ),
            _ => return Err(format!("unknown connector `{name}`")),
        };
        c.validate()?;
        Ok(c)
    }
}
