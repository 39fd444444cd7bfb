//! One source of randomness for every edge-step function.
//!
//! A doubly labeled tree carries everything the growth process would ever
//! draw: for each vertex `j >= 2` (1-based times) a tree edge target and an
//! independent ghost label, both degree-proportional over the previous tree,
//! plus one uniform survival coin per vertex. Collapsing the tree under a
//! function `f` keeps vertex `j` when its coin is at most `f(j)` and merges
//! it into its ghost label's class otherwise; surviving classes become the
//! vertices of the output graph and every tree edge maps to an edge between
//! class representatives. The collapsed graph has the same law as direct
//! generation under `f`, and collapsing the same tree under several
//! functions yields coupled samples.

use std::io::{BufRead, Write};

use rand::Rng;

use crate::dsu::DisjointSet;
use crate::error::Error;
use crate::multigraph::MultiGraph;
use crate::stats::{full_report, StatsOptions, StatsReport};
use crate::step_function::EdgeStepFunction;
use crate::Result;

/// The grand source: a random recursive tree with ghost labels and coins.
///
/// Vertices are 0-based; tree vertex `j` corresponds to time `j + 1`, so its
/// survival coin is compared against `f(j + 1)`. Vertex 0 carries the
/// initial loop; its coin is drawn for alignment but never used.
#[derive(Debug, Clone)]
pub struct DoublyLabeledTree {
    /// `edge_target[j] < j` is the tree neighbor of `j`; slot 0 is unused.
    edge_target: Vec<u32>,
    /// `ghost_label[j] < j` is the independent collapse tag; slot 0 unused.
    ghost_label: Vec<u32>,
    /// `uniforms[j]` is the survival coin of vertex `j`.
    uniforms: Vec<f64>,
}

impl DoublyLabeledTree {
    /// Grows a tree with `t` vertices.
    ///
    /// Per vertex the ghost label is drawn first, then the edge target, then
    /// the coin; only real tree edges feed the degree-proportional pool.
    pub fn grow<R: Rng + ?Sized>(t: u64, rng: &mut R) -> Result<Self> {
        if t < 1 {
            return Err(Error::domain("trees start with one vertex at time 1".to_string()));
        }
        let n = t as usize;
        let mut edge_target = Vec::with_capacity(n);
        let mut ghost_label = Vec::with_capacity(n);
        let mut uniforms = Vec::with_capacity(n);
        edge_target.push(0);
        ghost_label.push(0);
        uniforms.push(rng.random());
        // The initial loop puts vertex 0 in the pool twice.
        let mut pool: Vec<u32> = Vec::with_capacity(2 * n);
        pool.push(0);
        pool.push(0);
        for j in 1..n as u32 {
            let ghost = pool[rng.random_range(0..pool.len())];
            let target = pool[rng.random_range(0..pool.len())];
            ghost_label.push(ghost);
            edge_target.push(target);
            uniforms.push(rng.random());
            pool.push(target);
            pool.push(j);
        }
        Ok(DoublyLabeledTree { edge_target, ghost_label, uniforms })
    }

    /// Assembles a tree from explicit parts (fixtures, replayed dumps).
    pub fn from_parts(
        edge_target: Vec<u32>,
        ghost_label: Vec<u32>,
        uniforms: Vec<f64>,
    ) -> Result<Self> {
        let n = uniforms.len();
        if n == 0 {
            return Err(Error::domain("trees have at least one vertex".to_string()));
        }
        if edge_target.len() != n || ghost_label.len() != n {
            return Err(Error::domain("label arrays must have one entry per vertex".to_string()));
        }
        for j in 1..n {
            if edge_target[j] as usize >= j || ghost_label[j] as usize >= j {
                return Err(Error::domain(format!(
                    "labels of vertex {j} must point to earlier vertices"
                )));
            }
        }
        if uniforms.iter().any(|u| !(0.0..=1.0).contains(u)) {
            return Err(Error::domain("coins must lie in [0,1]".to_string()));
        }
        Ok(DoublyLabeledTree { edge_target, ghost_label, uniforms })
    }

    /// Number of tree vertices (= the time horizon).
    pub fn size(&self) -> u64 {
        self.uniforms.len() as u64
    }

    pub fn edge_target(&self, j: u32) -> u32 {
        assert!(j >= 1, "vertex 0 has no tree edge target");
        self.edge_target[j as usize]
    }

    pub fn ghost_label(&self, j: u32) -> u32 {
        assert!(j >= 1, "vertex 0 has no ghost label");
        self.ghost_label[j as usize]
    }

    pub fn coin(&self, j: u32) -> f64 {
        self.uniforms[j as usize]
    }

    /// Whether vertex `j` survives collapse under `f`. A coin exactly equal
    /// to `f` counts as survival; vertex 0 always survives.
    pub fn survives(&self, j: u32, f: &EdgeStepFunction) -> bool {
        j == 0 || self.uniforms[j as usize] <= f.eval(j as u64 + 1)
    }

    /// Whether collapsing under `f` and under `h` keeps exactly the same
    /// vertices, which makes the collapsed graphs identical.
    pub fn trajectory_equal(&self, f: &EdgeStepFunction, h: &EdgeStepFunction) -> bool {
        (1..self.size() as u32).all(|j| self.survives(j, f) == self.survives(j, h))
    }

    /// Collapses the tree under `f`.
    pub fn collapse(&self, f: &EdgeStepFunction) -> CollapseResult {
        let order: Vec<u32> = (1..self.size() as u32).collect();
        self.collapse_merging_in(f, &order)
    }

    /// Collapse with an explicit merge order; the partition and the output
    /// graph do not depend on it.
    fn collapse_merging_in(&self, f: &EdgeStepFunction, order: &[u32]) -> CollapseResult {
        let n = self.uniforms.len();
        let mut dsu = DisjointSet::new(n);
        for &j in order {
            if !self.survives(j, f) {
                dsu.union_min(j, self.ghost_label[j as usize]);
            }
        }
        let representative: Vec<u32> = (0..n as u32).map(|j| dsu.find(j)).collect();

        // Replay the tree in time order; each vertex contributes one edge.
        let mut rank = vec![u32::MAX; n];
        rank[0] = 0;
        let mut graph = MultiGraph::new_initial();
        for j in 1..n {
            let target = rank[representative[self.edge_target[j] as usize] as usize];
            if representative[j] == j as u32 {
                rank[j] = graph.vertex_step(target);
            } else {
                graph.edge_step(rank[representative[j] as usize] as u32, target);
            }
        }
        CollapseResult { representative, survivor_rank: rank, graph }
    }

    /// Collapses under several functions and reports statistics for each,
    /// all on this one tree.
    pub fn coupled_stats(
        &self,
        functions: &[EdgeStepFunction],
        options: &StatsOptions,
    ) -> Result<Vec<StatsReport>> {
        functions
            .iter()
            .map(|f| full_report(&self.collapse(f).graph, options))
            .collect()
    }

    /// Writes the tree as CSV rows `j,edge_target,ghost_label,coin` with
    /// 1-based ids (0 marks the missing labels of vertex 1) and coins at
    /// full round-trip precision.
    pub fn write_csv(&self, out: &mut impl Write) -> Result<()> {
        writeln!(out, "j,edge_target,ghost_label,coin")?;
        for j in 0..self.uniforms.len() {
            let (target, ghost) = if j == 0 {
                (0, 0)
            } else {
                (self.edge_target[j] + 1, self.ghost_label[j] + 1)
            };
            writeln!(out, "{},{target},{ghost},{}", j + 1, self.uniforms[j])?;
        }
        Ok(())
    }

    /// Parses the CSV written by [`DoublyLabeledTree::write_csv`].
    pub fn parse_csv(input: impl BufRead) -> Result<Self> {
        let mut edge_target = Vec::new();
        let mut ghost_label = Vec::new();
        let mut uniforms = Vec::new();
        for (idx, line) in input.lines().enumerate() {
            let line = line?;
            let line_no = idx + 1;
            if idx == 0 {
                if line.trim() != "j,edge_target,ghost_label,coin" {
                    return Err(Error::parse(line_no, "unexpected header".to_string()));
                }
                continue;
            }
            let fields: Vec<&str> = line.trim().split(',').collect();
            let [j, target, ghost, coin] = fields[..] else {
                return Err(Error::parse(line_no, "expected four fields".to_string()));
            };
            let j: usize = j
                .parse()
                .map_err(|_| Error::parse(line_no, format!("bad vertex id {j:?}")))?;
            if j != idx {
                return Err(Error::parse(line_no, format!("expected vertex {idx}, got {j}")));
            }
            let parse_u32 = |field: &str| -> Result<u32> {
                field
                    .parse()
                    .map_err(|_| Error::parse(line_no, format!("bad label {field:?}")))
            };
            let target = parse_u32(target)?;
            let ghost = parse_u32(ghost)?;
            if idx == 1 {
                if target != 0 || ghost != 0 {
                    return Err(Error::parse(line_no, "vertex 1 has no labels".to_string()));
                }
                edge_target.push(0);
                ghost_label.push(0);
            } else {
                if target == 0 || ghost == 0 {
                    return Err(Error::parse(line_no, "missing label".to_string()));
                }
                edge_target.push(target - 1);
                ghost_label.push(ghost - 1);
            }
            uniforms.push(
                coin.parse()
                    .map_err(|_| Error::parse(line_no, format!("bad coin {coin:?}")))?,
            );
        }
        Self::from_parts(edge_target, ghost_label, uniforms)
    }
}

/// Outcome of collapsing a tree under one function.
#[derive(Debug, Clone)]
pub struct CollapseResult {
    /// Surviving tree vertex representing each tree vertex's class.
    pub representative: Vec<u32>,
    /// Graph vertex id of each surviving tree vertex (`u32::MAX` otherwise).
    survivor_rank: Vec<u32>,
    /// The collapsed multigraph; its birth times are tree times.
    pub graph: MultiGraph,
}

impl CollapseResult {
    pub fn survivor_count(&self) -> u32 {
        self.graph.vertex_count()
    }

    /// Graph vertex id of tree vertex `j`, if it survived.
    pub fn survivor_rank(&self, j: u32) -> Option<u32> {
        let rank = self.survivor_rank[j as usize];
        (rank != u32::MAX).then_some(rank)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::step_function::TableTail;
    use crate::streams::{rng, Purpose};
    use rand::seq::SliceRandom;

    fn hand_tree() -> DoublyLabeledTree {
        // Five vertices; labels chosen by hand.
        DoublyLabeledTree::from_parts(
            vec![0, 0, 0, 2, 1],
            vec![0, 0, 1, 0, 3],
            vec![0.5, 0.2, 0.9, 0.8, 0.3],
        )
        .unwrap()
    }

    fn hand_function() -> EdgeStepFunction {
        EdgeStepFunction::table(vec![1.0, 0.3, 0.95, 0.5, 0.4], TableTail::Hold).unwrap()
    }

    #[test]
    fn hand_traced_collapse() {
        let tree = hand_tree();
        let f = hand_function();
        // Coins: vertex 1 (0.2 <= 0.3) and 2 (0.9 <= 0.95) and 4 (0.3 <= 0.4)
        // survive; vertex 3 (0.8 > 0.5) merges into its ghost label 0.
        let collapsed = tree.collapse(&f);
        assert_eq!(collapsed.representative, vec![0, 1, 2, 0, 4]);
        assert_eq!(collapsed.survivor_count(), 4);
        assert_eq!(collapsed.survivor_rank(3), None);
        assert_eq!(collapsed.survivor_rank(4), Some(3));
        let g = &collapsed.graph;
        assert_eq!(g.edges(), &[(0, 0), (0, 1), (0, 2), (0, 2), (1, 3)]);
        assert_eq!(g.degree(0), 5);
        assert_eq!(g.multiplicity(0, 2), 2);
        assert_eq!(g.birth_times(), &[1, 2, 3, 5]);
        g.self_check().unwrap();
    }

    #[test]
    fn ties_count_as_survival() {
        let tree = DoublyLabeledTree::from_parts(
            vec![0, 0],
            vec![0, 0],
            vec![0.9, 0.3],
        )
        .unwrap();
        let f = EdgeStepFunction::table(vec![1.0, 0.3], TableTail::Hold).unwrap();
        let collapsed = tree.collapse(&f);
        assert_eq!(collapsed.survivor_count(), 2);
        assert_eq!(collapsed.graph.edges(), &[(0, 0), (0, 1)]);
    }

    #[test]
    fn collapsing_under_all_heads_returns_the_tree() {
        let mut r = rng(31, Purpose::Tree, 0);
        let tree = DoublyLabeledTree::grow(400, &mut r).unwrap();
        let f = EdgeStepFunction::constant(1.0).unwrap();
        let collapsed = tree.collapse(&f);
        assert_eq!(collapsed.survivor_count(), 400);
        for (j, &(a, b)) in collapsed.graph.edges().iter().enumerate().skip(1) {
            assert_eq!(a, tree.edge_target(j as u32));
            assert_eq!(b, j as u32);
        }
    }

    #[test]
    fn collapsing_everything_piles_loops_on_the_root() {
        let mut r = rng(32, Purpose::Tree, 0);
        let t = 50;
        let tree = DoublyLabeledTree::grow(t, &mut r).unwrap();
        // Coins are almost surely positive, so a zero tail collapses all.
        let f = EdgeStepFunction::table(vec![1.0, 0.0], TableTail::Hold).unwrap();
        let collapsed = tree.collapse(&f);
        assert_eq!(collapsed.survivor_count(), 1);
        assert_eq!(collapsed.graph.edge_count(), t);
        assert!(collapsed.graph.edges().iter().all(|&(a, b)| a == 0 && b == 0));
    }

    #[test]
    fn merge_order_does_not_matter() {
        let mut r = rng(33, Purpose::Tree, 7);
        let tree = DoublyLabeledTree::grow(300, &mut r).unwrap();
        let f = EdgeStepFunction::power_law(0.5, 1.0, 0.0).unwrap();
        let forward = tree.collapse(&f);
        let mut order: Vec<u32> = (1..300).collect();
        order.reverse();
        let backward = tree.collapse_merging_in(&f, &order);
        order.shuffle(&mut r);
        let shuffled = tree.collapse_merging_in(&f, &order);
        for other in [&backward, &shuffled] {
            assert_eq!(forward.representative, other.representative);
            assert_eq!(forward.graph.edges(), other.graph.edges());
            assert_eq!(forward.graph.birth_times(), other.graph.birth_times());
        }
    }

    #[test]
    fn collapse_has_one_edge_per_time_step() {
        let mut r = rng(34, Purpose::Tree, 0);
        let t = 700u64;
        let tree = DoublyLabeledTree::grow(t, &mut r).unwrap();
        for f in [
            EdgeStepFunction::constant(0.6).unwrap(),
            EdgeStepFunction::power_law(0.5, 1.0, 0.0).unwrap(),
        ] {
            let collapsed = tree.collapse(&f);
            assert_eq!(collapsed.graph.edge_count(), t);
            assert_eq!(collapsed.graph.total_degree(), 2 * t);
            collapsed.graph.self_check().unwrap();
            // Survivor count matches the coin record.
            let survivors =
                1 + (1..t as u32).filter(|&j| tree.survives(j, &f)).count() as u32;
            assert_eq!(collapsed.survivor_count(), survivors);
        }
    }

    #[test]
    fn early_tree_attachment_is_degree_proportional() {
        // In a three-vertex tree the second edge points at vertex 0 with
        // probability 3/4 (degrees 3 and 1 after the first attachment).
        let mut hits = 0u64;
        let trials = 100_000u64;
        for rep in 0..trials {
            let mut r = rng(35, Purpose::Tree, rep);
            let tree = DoublyLabeledTree::grow(3, &mut r).unwrap();
            assert_eq!(tree.edge_target(1), 0);
            if tree.edge_target(2) == 0 {
                hits += 1;
            }
        }
        let freq = hits as f64 / trials as f64;
        assert!((freq - 0.75).abs() < 0.01, "frequency {freq}");
    }

    #[test]
    fn equal_trajectories_mean_equal_graphs() {
        let mut r = rng(36, Purpose::Tree, 1);
        let tree = DoublyLabeledTree::grow(200, &mut r).unwrap();
        let f = EdgeStepFunction::power_law(0.5, 1.0, 0.0).unwrap();
        assert!(tree.trajectory_equal(&f, &f));

        let h = EdgeStepFunction::power_law(0.4, 1.0, 0.0).unwrap();
        if tree.trajectory_equal(&f, &h) {
            let gf = tree.collapse(&f);
            let gh = tree.collapse(&h);
            assert_eq!(gf.graph.edges(), gh.graph.edges());
        }

        // A forced example: the gap between f and h misses every coin.
        let tiny = DoublyLabeledTree::from_parts(
            vec![0, 0, 1],
            vec![0, 0, 0],
            vec![0.5, 0.1, 0.9],
        )
        .unwrap();
        let low = EdgeStepFunction::constant(0.2).unwrap();
        let high = EdgeStepFunction::constant(0.3).unwrap();
        assert!(tiny.trajectory_equal(&low, &high));
        let differs = EdgeStepFunction::constant(0.05).unwrap();
        assert!(!tiny.trajectory_equal(&low, &differs));
    }

    #[test]
    fn csv_round_trips_at_full_precision() {
        let mut r = rng(37, Purpose::Tree, 0);
        let tree = DoublyLabeledTree::grow(150, &mut r).unwrap();
        let mut buffer = Vec::new();
        tree.write_csv(&mut buffer).unwrap();
        let parsed = DoublyLabeledTree::parse_csv(&buffer[..]).unwrap();
        assert_eq!(parsed.edge_target, tree.edge_target);
        assert_eq!(parsed.ghost_label, tree.ghost_label);
        assert_eq!(parsed.uniforms, tree.uniforms);
    }

    #[test]
    fn from_parts_rejects_forward_labels() {
        assert!(DoublyLabeledTree::from_parts(vec![0, 1], vec![0, 0], vec![0.1, 0.2]).is_err());
        assert!(DoublyLabeledTree::from_parts(vec![0, 0], vec![0, 2], vec![0.1, 0.2]).is_err());
        assert!(DoublyLabeledTree::from_parts(vec![0, 0], vec![0, 0], vec![0.1, 1.5]).is_err());
        assert!(DoublyLabeledTree::from_parts(vec![], vec![], vec![]).is_err());
    }
}
