//! Growing multigraph with constant-time degree-proportional sampling.
//!
//! Loops and parallel edges are first-class citizens: a loop contributes 2
//! to the degree of its endpoint and appears twice in the endpoint pool, so
//! drawing a uniform pool entry is exactly a degree-proportional draw. The
//! graph time equals the edge count; every construction step appends one
//! edge, and the initial graph (one vertex with a loop) sits at time 1.

use std::collections::HashMap;
use std::io::{BufRead, Write};

use rand::Rng;

use crate::error::Error;
use crate::Result;

/// Mutable multigraph of the growth process.
#[derive(Debug, Clone)]
pub struct MultiGraph {
    edges: Vec<(u32, u32)>,
    degrees: Vec<u32>,
    /// Each edge contributes both endpoints; a loop contributes its endpoint
    /// twice. Uniform over this pool = degree proportional over vertices.
    endpoint_pool: Vec<u32>,
    /// Time (edge count immediately after insertion) at which each vertex
    /// appeared; the initial vertex has birth time 1.
    birth_time: Vec<u64>,
    /// Edge multiplicities keyed by unordered endpoint pair.
    multiplicity: HashMap<(u32, u32), u32>,
}

fn pair_key(a: u32, b: u32) -> (u32, u32) {
    if a <= b {
        (a, b)
    } else {
        (b, a)
    }
}

impl MultiGraph {
    /// The time-1 graph: a single vertex carrying a loop.
    pub fn new_initial() -> Self {
        let mut graph = MultiGraph {
            edges: Vec::new(),
            degrees: vec![0],
            endpoint_pool: Vec::new(),
            birth_time: vec![1],
            multiplicity: HashMap::new(),
        };
        graph.add_edge(0, 0);
        graph
    }

    /// Builds a graph with `n` vertices and the given edge list. Intended
    /// for fixtures and parsed dumps; birth times default to `1..=n`.
    pub fn from_edges(n: u32, edges: &[(u32, u32)]) -> Result<Self> {
        let mut graph = MultiGraph {
            edges: Vec::with_capacity(edges.len()),
            degrees: vec![0; n as usize],
            endpoint_pool: Vec::with_capacity(2 * edges.len()),
            birth_time: (1..=n as u64).collect(),
            multiplicity: HashMap::new(),
        };
        for &(a, b) in edges {
            if a >= n || b >= n {
                return Err(Error::domain(format!(
                    "edge ({a}, {b}) references a vertex outside 0..{n}"
                )));
            }
            graph.add_edge(a, b);
        }
        Ok(graph)
    }

    fn add_edge(&mut self, a: u32, b: u32) {
        self.edges.push((a, b));
        self.degrees[a as usize] += 1;
        self.degrees[b as usize] += 1;
        self.endpoint_pool.push(a);
        self.endpoint_pool.push(b);
        *self.multiplicity.entry(pair_key(a, b)).or_insert(0) += 1;
    }

    /// Graph time: the number of edges.
    pub fn time(&self) -> u64 {
        self.edges.len() as u64
    }

    pub fn vertex_count(&self) -> u32 {
        self.degrees.len() as u32
    }

    pub fn edge_count(&self) -> u64 {
        self.edges.len() as u64
    }

    pub fn edges(&self) -> &[(u32, u32)] {
        &self.edges
    }

    pub fn degree(&self, v: u32) -> u64 {
        self.degrees[v as usize] as u64
    }

    pub fn max_degree(&self) -> u64 {
        self.degrees.iter().copied().max().unwrap_or(0) as u64
    }

    pub fn total_degree(&self) -> u64 {
        self.degrees.iter().map(|&d| d as u64).sum()
    }

    /// Time at which vertex `v` entered the graph.
    pub fn birth_time(&self, v: u32) -> u64 {
        self.birth_time[v as usize]
    }

    pub fn birth_times(&self) -> &[u64] {
        &self.birth_time
    }

    /// One degree-proportional draw over the current vertices.
    pub fn sample_pa<R: Rng + ?Sized>(&self, rng: &mut R) -> u32 {
        let idx = rng.random_range(0..self.endpoint_pool.len());
        self.endpoint_pool[idx]
    }

    /// Adds a new vertex attached to `target`; returns the new vertex id.
    pub fn vertex_step(&mut self, target: u32) -> u32 {
        assert!(target < self.vertex_count(), "vertex step target out of range");
        assert!(self.degrees.len() < u32::MAX as usize, "vertex ids exhausted");
        let new = self.degrees.len() as u32;
        self.degrees.push(0);
        self.birth_time.push(self.time() + 1);
        self.add_edge(target, new);
        new
    }

    /// Adds an edge between two existing vertices (possibly equal).
    pub fn edge_step(&mut self, u: u32, v: u32) {
        assert!(u < self.vertex_count() && v < self.vertex_count(), "edge step out of range");
        self.add_edge(u, v);
    }

    /// Number of parallel edges between `a` and `b` (loop count when equal).
    pub fn multiplicity(&self, a: u32, b: u32) -> u32 {
        self.multiplicity.get(&pair_key(a, b)).copied().unwrap_or(0)
    }

    /// Drops loops and collapses parallel edges into simple adjacencies.
    pub fn simplify(&self) -> SimpleGraph {
        let n = self.vertex_count() as usize;
        let mut adjacency: Vec<Vec<u32>> = vec![Vec::new(); n];
        for &(a, b) in &self.edges {
            if a == b {
                continue;
            }
            adjacency[a as usize].push(b);
            adjacency[b as usize].push(a);
        }
        let mut edge_count = 0u64;
        for (v, list) in adjacency.iter_mut().enumerate() {
            list.sort_unstable();
            list.dedup();
            edge_count += list.iter().filter(|&&u| (u as usize) > v).count() as u64;
        }
        SimpleGraph { adjacency, edge_count }
    }

    /// Recomputes degrees, pool and multiplicities from the edge list and
    /// checks them against the incrementally maintained state.
    pub fn self_check(&self) -> Result<()> {
        let n = self.vertex_count() as usize;
        let mut degrees = vec![0u32; n];
        let mut mult: HashMap<(u32, u32), u32> = HashMap::new();
        for &(a, b) in &self.edges {
            degrees[a as usize] += 1;
            degrees[b as usize] += 1;
            *mult.entry(pair_key(a, b)).or_insert(0) += 1;
        }
        if degrees != self.degrees {
            return Err(Error::state("degree table out of sync with edges".to_string()));
        }
        if mult != self.multiplicity {
            return Err(Error::state("multiplicity table out of sync with edges".to_string()));
        }
        if self.endpoint_pool.len() != 2 * self.edges.len() {
            return Err(Error::state("endpoint pool length is not twice the edge count".to_string()));
        }
        let mut pool_counts = vec![0u32; n];
        for &v in &self.endpoint_pool {
            pool_counts[v as usize] += 1;
        }
        if pool_counts != self.degrees {
            return Err(Error::state("endpoint pool does not mirror the degrees".to_string()));
        }
        if self.birth_time.len() != n || self.birth_time.windows(2).any(|w| w[0] > w[1]) {
            return Err(Error::state("birth times are not sorted per vertex id".to_string()));
        }
        Ok(())
    }

    /// Writes the plain-text dump: a `t vertex_count edge_count` header, one
    /// `a b` line per edge, then one `v birth` line per vertex (1-based ids).
    pub fn write_dump(&self, out: &mut impl Write) -> Result<()> {
        writeln!(out, "{} {} {}", self.time(), self.vertex_count(), self.edge_count())?;
        for &(a, b) in &self.edges {
            writeln!(out, "{} {}", a + 1, b + 1)?;
        }
        for (v, &birth) in self.birth_time.iter().enumerate() {
            writeln!(out, "{} {birth}", v + 1)?;
        }
        Ok(())
    }

    /// Parses the dump format produced by [`MultiGraph::write_dump`].
    pub fn parse_dump(input: impl BufRead) -> Result<Self> {
        let mut lines = input.lines().enumerate();
        let (_, header) = lines
            .next()
            .ok_or_else(|| Error::parse(1, "empty dump".to_string()))?;
        let header = header?;
        let fields: Vec<u64> = header
            .split_whitespace()
            .map(|f| f.parse().map_err(|_| Error::parse(1, format!("bad header field {f:?}"))))
            .collect::<Result<_>>()?;
        let [t, n, m] = fields[..] else {
            return Err(Error::parse(1, "header needs `t vertex_count edge_count`".to_string()));
        };
        if t != m {
            return Err(Error::parse(1, format!("time {t} does not equal edge count {m}")));
        }
        let mut edges = Vec::with_capacity(m as usize);
        let mut birth = vec![0u64; n as usize];
        for i in 0..(m + n) {
            let (idx, line) = lines
                .next()
                .ok_or_else(|| Error::parse((i + 2) as usize, "dump ends early".to_string()))?;
            let line = line?;
            let line_no = idx + 1;
            let parts: Vec<u64> = line
                .split_whitespace()
                .map(|f| {
                    f.parse().map_err(|_| Error::parse(line_no, format!("bad field {f:?}")))
                })
                .collect::<Result<_>>()?;
            let [x, y] = parts[..] else {
                return Err(Error::parse(line_no, "expected two fields".to_string()));
            };
            if i < m {
                if x < 1 || x > n || y < 1 || y > n {
                    return Err(Error::parse(line_no, format!("endpoint outside 1..={n}")));
                }
                edges.push(((x - 1) as u32, (y - 1) as u32));
            } else {
                let v = i - m;
                if x != v + 1 {
                    return Err(Error::parse(line_no, format!("expected vertex {}", v + 1)));
                }
                birth[v as usize] = y;
            }
        }
        let mut graph = Self::from_edges(n as u32, &edges)?;
        graph.birth_time = birth;
        Ok(graph)
    }
}

/// Loop-free simple graph with sorted adjacency lists.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SimpleGraph {
    adjacency: Vec<Vec<u32>>,
    edge_count: u64,
}

impl SimpleGraph {
    pub fn vertex_count(&self) -> u32 {
        self.adjacency.len() as u32
    }

    pub fn edge_count(&self) -> u64 {
        self.edge_count
    }

    /// Sorted distinct neighbors of `v`, never including `v` itself.
    pub fn neighbors(&self, v: u32) -> &[u32] {
        &self.adjacency[v as usize]
    }

    /// Number of distinct neighbors of `v`.
    pub fn neighbor_count(&self, v: u32) -> u64 {
        self.adjacency[v as usize].len() as u64
    }

    pub fn has_edge(&self, a: u32, b: u32) -> bool {
        self.adjacency[a as usize].binary_search(&b).is_ok()
    }

    /// Edges as `(a, b)` pairs with `a < b`.
    pub fn edge_pairs(&self) -> Vec<(u32, u32)> {
        let mut pairs = Vec::with_capacity(self.edge_count as usize);
        for (v, list) in self.adjacency.iter().enumerate() {
            for &u in list {
                if (v as u32) < u {
                    pairs.push((v as u32, u));
                }
            }
        }
        pairs
    }
}
