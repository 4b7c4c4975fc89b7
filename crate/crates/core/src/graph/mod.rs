//! Directed interference networks.
//!
//! A unit `i` interferes with unit `j` when the edge `(i, j)` is present.
//! Undirected inputs are stored symmetrically (both directions), so every
//! downstream algorithm has a single directed code path.

mod generate;
mod pmf;
mod spectral;

pub use generate::{generate, NetworkModel};
pub use pmf::{degree_pmf, l2_pmf_distance_sq, DegreePmf};
pub use spectral::{
    laplacian_homophily_vector, principal_eigenvector, LaplacianResult, SpectralResult,
    EIGEN_MAX_ITER, EIGEN_TOL,
};

use std::io::BufRead;

use crate::error::{Error, Result};

/// Immutable adjacency structure with out-lists, in-lists, and in-degrees.
///
/// Invariants established at construction: no self-loops, no duplicate
/// edges, `out_adj` and `in_adj` are transposes of each other, and
/// `in_degree[i] == in_adj[i].len()`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DirectedGraph {
    n: usize,
    out_adj: Vec<Vec<usize>>,
    in_adj: Vec<Vec<usize>>,
    in_degree: Vec<usize>,
}

impl DirectedGraph {
    /// Builds a graph from an edge iterator. With `directed = false` every
    /// edge is mirrored. Duplicate edges collapse; self-loops are errors.
    pub fn from_edges<I>(n: usize, edges: I, directed: bool) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize)>,
    {
        let mut out_adj = vec![Vec::new(); n];
        for (a, b) in edges {
            if a == b {
                return Err(Error::SelfLoop { unit: a });
            }
            if a >= n || b >= n {
                return Err(Error::InvalidParameter(format!(
                    "edge ({a},{b}) out of range for n={n}"
                )));
            }
            out_adj[a].push(b);
            if !directed {
                out_adj[b].push(a);
            }
        }
        Ok(Self::from_out_lists(out_adj))
    }

    /// Builds from per-unit out-neighbor lists; sorts, dedups, and derives
    /// in-lists. Callers guarantee entries are in range and loop-free.
    fn from_out_lists(mut out_adj: Vec<Vec<usize>>) -> Self {
        let n = out_adj.len();
        for list in &mut out_adj {
            list.sort_unstable();
            list.dedup();
        }
        let mut in_adj = vec![Vec::new(); n];
        for (i, list) in out_adj.iter().enumerate() {
            for &j in list {
                in_adj[j].push(i);
            }
        }
        for list in &mut in_adj {
            list.sort_unstable();
        }
        let in_degree = in_adj.iter().map(Vec::len).collect();
        Self {
            n,
            out_adj,
            in_adj,
            in_degree,
        }
    }

    /// Number of units.
    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of directed edges (an undirected edge counts twice).
    pub fn num_directed_edges(&self) -> usize {
        self.out_adj.iter().map(Vec::len).sum()
    }

    /// Number of edges when the graph is symmetric.
    pub fn num_undirected_edges(&self) -> usize {
        debug_assert!(self.is_symmetric());
        self.num_directed_edges() / 2
    }

    /// In-degree `d_i`. Panics if `unit >= n`.
    pub fn in_degree(&self, unit: usize) -> usize {
        self.in_degree[unit]
    }

    /// Per-unit in-degree vector.
    pub fn in_degrees(&self) -> &[usize] {
        &self.in_degree
    }

    /// Maximum in-degree over all units (0 for an edgeless graph).
    pub fn max_in_degree(&self) -> usize {
        self.in_degree.iter().copied().max().unwrap_or(0)
    }

    /// Mean in-degree.
    pub fn mean_in_degree(&self) -> f64 {
        if self.n == 0 {
            0.0
        } else {
            self.in_degree.iter().sum::<usize>() as f64 / self.n as f64
        }
    }

    /// Units that interfere with `unit` (sorted). Panics if `unit >= n`.
    pub fn in_neighbors(&self, unit: usize) -> &[usize] {
        &self.in_adj[unit]
    }

    /// Units that `unit` interferes with (sorted). Panics if `unit >= n`.
    pub fn out_neighbors(&self, unit: usize) -> &[usize] {
        &self.out_adj[unit]
    }

    /// Closed in-neighborhood: in-neighbors of `unit` plus `unit` itself.
    pub fn closed_in_neighborhood(&self, unit: usize) -> Vec<usize> {
        let mut v = self.in_adj[unit].clone();
        let pos = v.partition_point(|&j| j < unit);
        v.insert(pos, unit);
        v
    }

    /// Closed out-neighborhood: out-neighbors of `unit` plus `unit` itself.
    pub fn closed_out_neighborhood(&self, unit: usize) -> Vec<usize> {
        let mut v = self.out_adj[unit].clone();
        let pos = v.partition_point(|&j| j < unit);
        v.insert(pos, unit);
        v
    }

    /// Units whose exposure could be disturbed by treating `unit`: the union
    /// of closed out-neighborhoods over the closed in-neighborhood of `unit`.
    /// Always contains the closed in-neighborhood itself. Sorted, deduped.
    pub fn removal_set(&self, unit: usize) -> Vec<usize> {
        let mut out = Vec::new();
        for l in self.closed_in_neighborhood(unit) {
            out.push(l);
            out.extend_from_slice(&self.out_adj[l]);
        }
        out.sort_unstable();
        out.dedup();
        out
    }

    /// True when every edge has its reverse present.
    pub fn is_symmetric(&self) -> bool {
        self.out_adj == self.in_adj
    }

    /// Boolean square: edge `(i, j)` iff a two-step path `i -> l -> j`
    /// exists. Self-loops arising from `i -> l -> i` are dropped so the
    /// result satisfies the `DirectedGraph` invariants.
    pub fn squared_graph(&self) -> DirectedGraph {
        let mut out_adj = vec![Vec::new(); self.n];
        for i in 0..self.n {
            let row = &mut out_adj[i];
            for &l in &self.out_adj[i] {
                for &j in &self.out_adj[l] {
                    if j != i {
                        row.push(j);
                    }
                }
            }
        }
        DirectedGraph::from_out_lists(out_adj)
    }
}

/// Parses an edge-list stream: one `i j` pair per whitespace-separated line,
/// `#` comment lines, and an optional `# n=<count>` header. Directedness is
/// the caller's flag; with `directed = false` each listed edge is mirrored.
pub fn load_edge_list<R: BufRead>(reader: R, directed: bool) -> Result<DirectedGraph> {
    let mut declared_n: Option<usize> = None;
    let mut edges: Vec<(usize, usize)> = Vec::new();
    let mut max_id: Option<usize> = None;

    for (idx, line) in reader.lines().enumerate() {
        let line_no = idx + 1;
        let line = line?;
        let text = line.trim();
        if text.is_empty() {
            continue;
        }
        if let Some(comment) = text.strip_prefix('#') {
            let comment = comment.trim();
            if let Some(value) = comment.strip_prefix("n=") {
                let n: usize = value.trim().parse().map_err(|_| Error::EdgeListParse {
                    line: line_no,
                    msg: format!("bad unit count `{value}`"),
                })?;
                declared_n = Some(n);
            }
            continue;
        }
        let mut parts = text.split_whitespace();
        let (a, b) = match (parts.next(), parts.next(), parts.next()) {
            (Some(a), Some(b), None) => (a, b),
            _ => {
                return Err(Error::EdgeListParse {
                    line: line_no,
                    msg: format!("expected two unit ids, got `{text}`"),
                })
            }
        };
        let parse = |s: &str| -> Result<usize> {
            s.parse().map_err(|_| Error::EdgeListParse {
                line: line_no,
                msg: format!("bad unit id `{s}`"),
            })
        };
        let (a, b) = (parse(a)?, parse(b)?);
        if a == b {
            return Err(Error::EdgeListParse {
                line: line_no,
                msg: format!("self-loop at unit {a}"),
            });
        }
        if let Some(n) = declared_n {
            if a >= n || b >= n {
                return Err(Error::EdgeListParse {
                    line: line_no,
                    msg: format!("unit id out of range for declared n={n}"),
                });
            }
        }
        max_id = Some(max_id.unwrap_or(0).max(a).max(b));
        edges.push((a, b));
    }

    let n = declared_n.unwrap_or_else(|| max_id.map_or(0, |m| m + 1));
    DirectedGraph::from_edges(n, edges, directed)
}

/// Writes an edge list with a `# n=<count>` header. With `undirected = true`
/// (requires a symmetric graph) each edge is written once as `i j`, `i < j`;
/// otherwise every directed edge is written.
pub fn write_edge_list(g: &DirectedGraph, undirected: bool) -> String {
    let mut out = format!("# n={}\n", g.n());
    for i in 0..g.n() {
        for &j in g.out_neighbors(i) {
            if !undirected || i < j {
                out.push_str(&format!("{i} {j}\n"));
            }
        }
    }
    out
}
