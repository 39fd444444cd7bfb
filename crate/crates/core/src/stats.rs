//! Snapshot statistics.
//!
//! Everything here works on the loop-free simplification of a snapshot:
//! triangle and cherry counts, the global clustering ratio, a certified
//! clique lower bound found among the oldest vertices, and exact or
//! double-sweep diameters. [`full_report`] bundles the enabled statistics
//! into one serializable record.

use std::time::{Duration, Instant};

use serde::Serialize;

use crate::error::Error;
use crate::multigraph::{MultiGraph, SimpleGraph};
use crate::Result;

/// Counts triangles by orienting every edge from lower to higher
/// (degree, id) rank and intersecting forward adjacency lists, which keeps
/// the work within `O(E^{3/2})`.
pub fn triangles(g: &SimpleGraph) -> u64 {
    let n = g.vertex_count() as usize;
    let mut order: Vec<u32> = (0..n as u32).collect();
    order.sort_unstable_by_key(|&v| (g.neighbor_count(v), v));
    let mut pos = vec![0u32; n];
    for (i, &v) in order.iter().enumerate() {
        pos[v as usize] = i as u32;
    }
    // Forward lists hold rank positions, sorted for merge intersection.
    let mut forward: Vec<Vec<u32>> = vec![Vec::new(); n];
    for v in 0..n {
        let rank_v = pos[v];
        forward[v] = g
            .neighbors(v as u32)
            .iter()
            .map(|&u| pos[u as usize])
            .filter(|&rank_u| rank_u > rank_v)
            .collect();
        forward[v].sort_unstable();
    }
    let mut count = 0u64;
    for v in 0..n {
        for &rank_u in &forward[v] {
            let u = order[rank_u as usize] as usize;
            count += sorted_intersection_count(&forward[v], &forward[u]);
        }
    }
    count
}

fn sorted_intersection_count(a: &[u32], b: &[u32]) -> u64 {
    let (mut i, mut j, mut count) = (0, 0, 0u64);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                count += 1;
                i += 1;
                j += 1;
            }
        }
    }
    count
}

/// Number of paths of length two: `sum_v C(neighbor_count(v), 2)`.
pub fn cherries(g: &SimpleGraph) -> u64 {
    (0..g.vertex_count())
        .map(|v| {
            let d = g.neighbor_count(v);
            d * d.saturating_sub(1) / 2
        })
        .sum()
}

/// Global clustering `3 * triangles / cherries`; undefined without cherries.
pub fn clustering_from_counts(triangles: u64, cherries: u64) -> Option<f64> {
    (cherries > 0).then(|| 3.0 * triangles as f64 / cherries as f64)
}

/// Convenience wrapper computing both counts.
pub fn global_clustering(g: &SimpleGraph) -> Option<f64> {
    clustering_from_counts(triangles(g), cherries(g))
}

/// Fixed-capacity bitset over vertex indices `0..n`.
#[derive(Clone)]
struct BitSet {
    words: Vec<u64>,
}

impl BitSet {
    fn empty(n: usize) -> Self {
        BitSet { words: vec![0; n.div_ceil(64)] }
    }

    fn full(n: usize) -> Self {
        let mut set = Self::empty(n);
        for i in 0..n {
            set.insert(i);
        }
        set
    }

    fn insert(&mut self, i: usize) {
        self.words[i / 64] |= 1 << (i % 64);
    }

    fn remove(&mut self, i: usize) {
        self.words[i / 64] &= !(1 << (i % 64));
    }

    fn contains(&self, i: usize) -> bool {
        self.words[i / 64] & (1 << (i % 64)) != 0
    }

    fn count(&self) -> u32 {
        self.words.iter().map(|w| w.count_ones()).sum()
    }

    fn is_empty(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    fn and(&self, other: &BitSet) -> BitSet {
        BitSet {
            words: self.words.iter().zip(&other.words).map(|(a, b)| a & b).collect(),
        }
    }

    fn and_count(&self, other: &BitSet) -> u32 {
        self.words
            .iter()
            .zip(&other.words)
            .map(|(a, b)| (a & b).count_ones())
            .sum()
    }

    fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(w, &word)| {
            let mut bits = word;
            std::iter::from_fn(move || {
                if bits == 0 {
                    return None;
                }
                let b = bits.trailing_zeros() as usize;
                bits &= bits - 1;
                Some(w * 64 + b)
            })
        })
    }
}

/// Clique search configuration.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct CliqueOptions {
    /// Search only among the `prefix` oldest vertices.
    pub prefix: u32,
    /// Branch node budget before falling back to the best clique found.
    pub budget: u64,
}

/// Default branch node budget for the clique search.
pub const DEFAULT_CLIQUE_BUDGET: u64 = 2_000_000;

impl CliqueOptions {
    /// Prefix rule `ceil(4 * t^{(1 - decay_index) / 2})`: wide enough to
    /// contain the old dense core where the large cliques live.
    pub fn scaled(decay_index: f64, t: u64) -> Self {
        let prefix = (4.0 * (t as f64).powf((1.0 - decay_index) / 2.0)).ceil();
        CliqueOptions { prefix: prefix as u32, budget: DEFAULT_CLIQUE_BUDGET }
    }
}

/// A clique found in the prefix subgraph. `exact` means the branch and
/// bound search finished within budget, so the size is the true maximum
/// over the prefix; otherwise it is still a certified lower bound.
#[derive(Debug, Clone, Serialize)]
pub struct CliqueBound {
    pub size: u32,
    /// Vertices of the clique (0-based, ascending).
    pub witness: Vec<u32>,
    pub exact: bool,
}

/// Maximum clique among the `prefix` oldest vertices, by branch and bound
/// with pivoting, seeded with a greedy clique and capped by `budget` branch
/// nodes.
pub fn clique_lower_bound(g: &SimpleGraph, prefix: u32, budget: u64) -> CliqueBound {
    let k = prefix.min(g.vertex_count()) as usize;
    if k == 0 {
        return CliqueBound { size: 0, witness: Vec::new(), exact: true };
    }
    let adjacency: Vec<BitSet> = (0..k)
        .map(|v| {
            let mut row = BitSet::empty(k);
            for &u in g.neighbors(v as u32) {
                if (u as usize) < k {
                    row.insert(u as usize);
                }
            }
            row
        })
        .collect();

    // Greedy seed: highest induced degree first.
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_unstable_by_key(|&v| (std::cmp::Reverse(adjacency[v].count()), v));
    let mut best: Vec<u32> = Vec::new();
    for &v in &order {
        if best.iter().all(|&u| adjacency[v].contains(u as usize)) {
            best.push(v as u32);
        }
    }

    let mut search = CliqueSearch { adjacency: &adjacency, best, nodes: 0, budget, truncated: false };
    let mut partial = Vec::new();
    search.expand(&mut partial, BitSet::full(k));

    let mut witness = search.best;
    witness.sort_unstable();
    debug_assert!(is_clique(g, &witness));
    CliqueBound { size: witness.len() as u32, witness, exact: !search.truncated }
}

fn is_clique(g: &SimpleGraph, vertices: &[u32]) -> bool {
    vertices
        .iter()
        .enumerate()
        .all(|(i, &a)| vertices[i + 1..].iter().all(|&b| g.has_edge(a, b)))
}

struct CliqueSearch<'a> {
    adjacency: &'a [BitSet],
    best: Vec<u32>,
    nodes: u64,
    budget: u64,
    truncated: bool,
}

impl CliqueSearch<'_> {
    fn expand(&mut self, partial: &mut Vec<u32>, mut candidates: BitSet) {
        self.nodes += 1;
        if self.nodes > self.budget {
            self.truncated = true;
            return;
        }
        if partial.len() as u32 + candidates.count() <= self.best.len() as u32 {
            return;
        }
        if candidates.is_empty() {
            if partial.len() > self.best.len() {
                self.best = partial.clone();
            }
            return;
        }
        let pivot = candidates
            .iter()
            .max_by_key(|&u| self.adjacency[u].and_count(&candidates))
            .expect("candidates are nonempty");
        let outside_pivot: Vec<usize> =
            candidates.iter().filter(|&v| !self.adjacency[pivot].contains(v)).collect();
        for v in outside_pivot {
            partial.push(v as u32);
            self.expand(partial, candidates.and(&self.adjacency[v]));
            partial.pop();
            if self.truncated {
                return;
            }
            candidates.remove(v);
            if partial.len() as u32 + candidates.count() <= self.best.len() as u32 {
                return;
            }
        }
    }
}

/// How to compute the diameter.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum DiameterMode {
    /// Eccentricity of every vertex; value is exact.
    Exact,
    /// Farthest vertex from a far vertex: a lower bound, cheap on big graphs.
    DoubleSweep,
    /// Exact up to [`AUTO_EXACT_LIMIT`] vertices, double sweep beyond.
    Auto,
}

/// Vertex count up to which [`DiameterMode::Auto`] stays exact.
pub const AUTO_EXACT_LIMIT: u32 = 5000;

#[derive(Debug, Clone, Copy, Serialize)]
pub struct DiameterResult {
    pub value: u64,
    pub exact: bool,
}

/// Diameter of a connected graph; a single vertex has diameter 0.
/// Disconnected input is a state error reporting the component count.
pub fn diameter(g: &SimpleGraph, mode: DiameterMode) -> Result<DiameterResult> {
    let n = g.vertex_count();
    if n == 0 {
        return Err(Error::domain("diameter of the empty graph".to_string()));
    }
    let mut bfs = Bfs::new(n as usize);
    let reached = bfs.run(g, 0);
    if reached < n as usize {
        let mut components = 1;
        let mut seen = bfs.visited();
        while let Some(next) = seen.iter().position(|&v| !v) {
            components += 1;
            bfs.run(g, next as u32);
            for (slot, was) in seen.iter_mut().zip(bfs.visited()) {
                *slot |= was;
            }
        }
        return Err(Error::state(format!("graph is disconnected ({components} components)")));
    }
    let exact = match mode {
        DiameterMode::Exact => true,
        DiameterMode::DoubleSweep => false,
        DiameterMode::Auto => n <= AUTO_EXACT_LIMIT,
    };
    if exact {
        let mut value = 0u64;
        for source in 0..n {
            bfs.run(g, source);
            value = value.max(bfs.max_distance());
        }
        Ok(DiameterResult { value, exact: true })
    } else {
        bfs.run(g, 0);
        let far = bfs.farthest_vertex();
        bfs.run(g, far);
        Ok(DiameterResult { value: bfs.max_distance(), exact: false })
    }
}

/// Breadth-first searcher with reusable buffers.
struct Bfs {
    distance: Vec<u32>,
    queue: Vec<u32>,
}

const UNSEEN: u32 = u32::MAX;

impl Bfs {
    fn new(n: usize) -> Self {
        Bfs { distance: vec![UNSEEN; n], queue: Vec::with_capacity(n) }
    }

    /// Runs from `source`, returns the number of reached vertices.
    fn run(&mut self, g: &SimpleGraph, source: u32) -> usize {
        self.distance.fill(UNSEEN);
        self.queue.clear();
        self.distance[source as usize] = 0;
        self.queue.push(source);
        let mut head = 0;
        while head < self.queue.len() {
            let v = self.queue[head];
            head += 1;
            let next = self.distance[v as usize] + 1;
            for &u in g.neighbors(v) {
                if self.distance[u as usize] == UNSEEN {
                    self.distance[u as usize] = next;
                    self.queue.push(u);
                }
            }
        }
        self.queue.len()
    }

    fn visited(&self) -> Vec<bool> {
        self.distance.iter().map(|&d| d != UNSEEN).collect()
    }

    fn max_distance(&self) -> u64 {
        self.distance.iter().filter(|&&d| d != UNSEEN).map(|&d| d as u64).max().unwrap_or(0)
    }

    /// Smallest id among vertices at maximum distance.
    fn farthest_vertex(&self) -> u32 {
        let max = self.max_distance() as u32;
        self.distance
            .iter()
            .position(|&d| d == max)
            .expect("bfs reached at least the source") as u32
    }
}

/// Which statistics [`full_report`] computes.
#[derive(Debug, Clone)]
pub struct StatsOptions {
    /// Triangles, cherries and the clustering ratio.
    pub triangle_census: bool,
    pub clique: Option<CliqueOptions>,
    pub diameter: Option<DiameterMode>,
    /// Vertices (0-based) whose distinct neighbor counts to record.
    pub neighbor_vertices: Vec<u32>,
}

impl Default for StatsOptions {
    fn default() -> Self {
        StatsOptions {
            triangle_census: true,
            clique: None,
            diameter: None,
            neighbor_vertices: Vec::new(),
        }
    }
}

/// Distinct neighbor count of one requested vertex; ids are 1-based here,
/// matching the dump file convention.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct NeighborCount {
    pub vertex: u64,
    pub count: u64,
}

/// One snapshot's statistics. Disabled or undefined entries serialize as
/// null; `clustering_defined` distinguishes an undefined ratio (no cherries)
/// from a skipped census.
#[derive(Debug, Clone, Serialize)]
pub struct StatsReport {
    pub time: u64,
    pub vertex_count: u32,
    pub edge_count: u64,
    pub simple_edge_count: u64,
    pub max_degree: u64,
    pub triangles: Option<u64>,
    pub cherries: Option<u64>,
    pub global_clustering: Option<f64>,
    pub clustering_defined: bool,
    pub clique: Option<CliqueBound>,
    pub diameter: Option<DiameterResult>,
    pub neighbor_counts: Vec<NeighborCount>,
    #[serde(skip)]
    pub elapsed: Duration,
}

impl StatsReport {
    /// Stable CSV header matching [`StatsReport::csv_row`]. The clique
    /// witness stays JSON-only; neighbor columns derive from the requested
    /// vertices, so rows from runs with equal options line up.
    pub fn csv_header(&self) -> String {
        let mut header = String::from(
            "time,vertex_count,edge_count,simple_edge_count,max_degree,\
             triangles,cherries,global_clustering,clique_size,clique_exact,\
             diameter,diameter_exact",
        );
        for nc in &self.neighbor_counts {
            header.push_str(&format!(",neighbors_{}", nc.vertex));
        }
        header
    }

    pub fn csv_row(&self) -> String {
        fn opt<T: ToString>(value: Option<T>) -> String {
            value.map(|v| v.to_string()).unwrap_or_default()
        }
        let mut row = format!(
            "{},{},{},{},{},{},{},{},{},{},{},{}",
            self.time,
            self.vertex_count,
            self.edge_count,
            self.simple_edge_count,
            self.max_degree,
            opt(self.triangles),
            opt(self.cherries),
            opt(self.global_clustering),
            opt(self.clique.as_ref().map(|c| c.size)),
            opt(self.clique.as_ref().map(|c| c.exact)),
            opt(self.diameter.map(|d| d.value)),
            opt(self.diameter.map(|d| d.exact)),
        );
        for nc in &self.neighbor_counts {
            row.push_str(&format!(",{}", nc.count));
        }
        row
    }
}

/// Computes the enabled statistics of one snapshot.
pub fn full_report(g: &MultiGraph, options: &StatsOptions) -> Result<StatsReport> {
    let started = Instant::now();
    let simple = g.simplify();
    let simple_edge_count = simple.edge_count();

    let (tri, che, clustering) = if options.triangle_census {
        let tri = triangles(&simple);
        let che = cherries(&simple);
        // Deterministic bound: a simple graph with E edges cannot hold more
        // than E^{3/2} triangles.
        assert!(
            tri as f64 <= (simple_edge_count as f64).powf(1.5) + 1e-9,
            "triangle count {tri} breaks the E^(3/2) ceiling"
        );
        let clustering = clustering_from_counts(tri, che);
        if let Some(c) = clustering {
            assert!((0.0..=1.0 + 1e-12).contains(&c), "clustering {c} outside [0,1]");
        }
        (Some(tri), Some(che), clustering)
    } else {
        (None, None, None)
    };

    let clique = options.clique.map(|opts| {
        let bound = clique_lower_bound(&simple, opts.prefix, opts.budget);
        assert!(is_clique(&simple, &bound.witness), "clique witness is not complete");
        assert_eq!(bound.witness.len() as u32, bound.size);
        bound
    });

    let diameter = match options.diameter {
        Some(mode) => Some(diameter(&simple, mode)?),
        None => None,
    };

    for &v in &options.neighbor_vertices {
        if v >= g.vertex_count() {
            return Err(Error::domain(format!(
                "neighbor count requested for vertex {v} of a {} vertex graph",
                g.vertex_count()
            )));
        }
    }
    let neighbor_counts = options
        .neighbor_vertices
        .iter()
        .map(|&v| NeighborCount { vertex: v as u64 + 1, count: simple.neighbor_count(v) })
        .collect();

    Ok(StatsReport {
        time: g.time(),
        vertex_count: g.vertex_count(),
        edge_count: g.edge_count(),
        simple_edge_count,
        max_degree: g.max_degree(),
        triangles: tri,
        cherries: che,
        global_clustering: clustering,
        clustering_defined: clustering.is_some(),
        clique,
        diameter,
        neighbor_counts,
        elapsed: started.elapsed(),
    })
}
