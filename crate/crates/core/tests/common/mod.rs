//! Brute-force oracles for the acceptance suite. Everything here is
//! deliberately naive; the point is independence from the library's
//! algorithms.

use edgestep_core::SimpleGraph;

pub fn oracle_triangles(g: &SimpleGraph) -> u64 {
    let n = g.vertex_count();
    let mut count = 0;
    for a in 0..n {
        for b in (a + 1)..n {
            for c in (b + 1)..n {
                if g.has_edge(a, b) && g.has_edge(b, c) && g.has_edge(a, c) {
                    count += 1;
                }
            }
        }
    }
    count
}

pub fn oracle_cherries(g: &SimpleGraph) -> u64 {
    let n = g.vertex_count();
    let mut count = 0;
    for mid in 0..n {
        for a in 0..n {
            for b in (a + 1)..n {
                if a != mid && b != mid && g.has_edge(mid, a) && g.has_edge(mid, b) {
                    count += 1;
                }
            }
        }
    }
    count
}

/// Maximum clique size by enumerating every clique.
pub fn oracle_max_clique(g: &SimpleGraph) -> u32 {
    fn extend(g: &SimpleGraph, clique: &mut Vec<u32>, from: u32, best: &mut u32) {
        *best = (*best).max(clique.len() as u32);
        for v in from..g.vertex_count() {
            if clique.iter().all(|&u| g.has_edge(u, v)) {
                clique.push(v);
                extend(g, clique, v + 1, best);
                clique.pop();
            }
        }
    }
    let mut best = 0;
    extend(g, &mut Vec::new(), 0, &mut best);
    best
}

/// Diameter by Floyd-Warshall; `None` when the graph is disconnected.
pub fn oracle_diameter(g: &SimpleGraph) -> Option<u64> {
    let n = g.vertex_count() as usize;
    let inf = u64::MAX / 4;
    let mut dist = vec![vec![inf; n]; n];
    for v in 0..n {
        dist[v][v] = 0;
        for &u in g.neighbors(v as u32) {
            dist[v][u as usize] = 1;
        }
    }
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                let through = dist[i][k] + dist[k][j];
                if through < dist[i][j] {
                    dist[i][j] = through;
                }
            }
        }
    }
    let mut max = 0;
    for row in &dist {
        for &d in row {
            if d >= inf {
                return None;
            }
            max = max.max(d);
        }
    }
    Some(max)
}

/// Multiplicity of the unordered pair `{a, b}` by scanning an edge list.
pub fn oracle_multiplicity(edges: &[(u32, u32)], a: u32, b: u32) -> u32 {
    edges
        .iter()
        .filter(|&&(x, y)| (x, y) == (a, b) || (x, y) == (b, a))
        .count() as u32
}

/// Distinct neighbors of `v` other than itself, scanned from an edge list.
pub fn oracle_distinct_neighbors(edges: &[(u32, u32)], v: u32) -> u64 {
    let mut seen = std::collections::BTreeSet::new();
    for &(a, b) in edges {
        if a == v && b != v {
            seen.insert(b);
        }
        if b == v && a != v {
            seen.insert(a);
        }
    }
    seen.len() as u64
}
