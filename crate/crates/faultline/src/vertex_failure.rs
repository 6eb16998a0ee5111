//! Vertex-failure connectivity: vertex-resilient components and maximal
//! 2-vertex-connected subgraphs, maintained under edge deletions.
//!
//! Two vertices are vertex-resilient when no single other vertex separates
//! them. The maximal resilient sets may overlap in one vertex, so they are
//! kept as explicit sets; whenever a component of some `G \ {v}` breaks, any
//! set straddling the fragments is refined into its per-fragment pieces,
//! with `v` itself joining every piece of a set it belonged to.
//!
//! The maximal 2-vertex-connected subgraphs ride on a derived copy of the
//! graph from which every edge joining different components of some
//! `G \ {v}` has been purged; the resilient sets of that residue (of size
//! at least three, pairs behind a flag) are the answer.

use crate::graph::{Digraph, Vertex};
use crate::joint::{Break, ColumnBreak, Joint};
use std::collections::{BTreeSet, HashSet, VecDeque};

/// Maximal sets of pairwise vertex-resilient vertices, refined as the
/// underlying per-vertex-failure components break.
pub struct VrcState {
    blocks: Vec<BTreeSet<Vertex>>,
    alive: Vec<bool>,
    /// block indices per vertex (live blocks only, lazily cleaned).
    of: Vec<Vec<usize>>,
}

impl VrcState {
    /// Refinement fixpoint over all columns, starting from the SCC classes.
    pub fn new(joint: &Joint) -> VrcState {
        let n = joint.graph().n();
        let mut st = VrcState { blocks: Vec::new(), alive: Vec::new(), of: vec![Vec::new(); n] };
        for class in joint.scc_partition().classes() {
            st.push_block(class.into_iter().collect());
        }
        loop {
            let mut changed = false;
            for &v in joint.scope() {
                for b in 0..st.blocks.len() {
                    if st.alive[b] {
                        changed |= st.refine_block(joint, b, v);
                    }
                }
            }
            if !changed {
                break;
            }
        }
        st
    }

    fn push_block(&mut self, members: BTreeSet<Vertex>) -> usize {
        let idx = self.blocks.len();
        for &x in &members {
            self.of[x].push(idx);
        }
        self.blocks.push(members);
        self.alive.push(true);
        idx
    }

    fn retire_block(&mut self, b: usize) {
        self.alive[b] = false;
    }

    /// Splits block `b` by the components of `G \ {v}`; `v` itself joins
    /// every piece of a block it belonged to. Returns true when a split
    /// happened.
    fn refine_block(&mut self, joint: &Joint, b: usize, v: Vertex) -> bool {
        let had_v = self.blocks[b].contains(&v);
        let mut groups: std::collections::BTreeMap<u32, BTreeSet<Vertex>> = Default::default();
        for &x in &self.blocks[b] {
            if x == v {
                continue;
            }
            match joint.unit(x, v) {
                Some(id) => {
                    groups.entry(id).or_default().insert(x);
                }
                None => return false, // x out of scope, nothing to learn
            }
        }
        if groups.len() < 2 {
            return false;
        }
        self.retire_block(b);
        for (_, mut grp) in groups {
            if had_v {
                grp.insert(v);
            }
            self.push_block(grp);
        }
        true
    }

    /// Feeds the fragments of one `G \ {column}` break: any block straddling
    /// a fragment boundary is refined by that column.
    pub fn on_column_break(&mut self, joint: &Joint, cb: &ColumnBreak) {
        let mut todo: Vec<usize> = Vec::new();
        for (_, members) in &cb.b.fragments {
            for &x in members {
                for &b in &self.of[x] {
                    if self.alive[b] && !todo.contains(&b) {
                        todo.push(b);
                    }
                }
            }
        }
        for b in todo {
            if self.alive[b] {
                self.refine_block(joint, b, cb.column);
            }
        }
    }

    /// Feeds an SCC break of the graph itself: separated pairs cannot stay
    /// in one block.
    pub fn on_scc_break(&mut self, joint: &Joint, brk: &Break) {
        let mut todo: Vec<usize> = Vec::new();
        for (_, members) in &brk.fragments {
            for &x in members {
                for &b in &self.of[x] {
                    if self.alive[b] && !todo.contains(&b) {
                        todo.push(b);
                    }
                }
            }
        }
        let scc = joint.scc_partition();
        for b in todo {
            if !self.alive[b] {
                continue;
            }
            let mut groups: std::collections::BTreeMap<u32, BTreeSet<Vertex>> = Default::default();
            for &x in &self.blocks[b] {
                groups.entry(scc.id[x]).or_default().insert(x);
            }
            if groups.len() >= 2 {
                self.retire_block(b);
                for (_, grp) in groups {
                    self.push_block(grp);
                }
            }
        }
    }

    /// The maximal resilient sets: live blocks with duplicates and strict
    /// subsets dropped, plus singletons for uncovered vertices.
    pub fn blocks(&self, scope: &[Vertex]) -> Vec<Vec<Vertex>> {
        let mut live: Vec<&BTreeSet<Vertex>> = self
            .blocks
            .iter()
            .zip(&self.alive)
            .filter(|&(_, &a)| a)
            .map(|(b, _)| b)
            .collect();
        live.sort();
        live.dedup();
        let mut keep: Vec<Vec<Vertex>> = Vec::new();
        for (i, b) in live.iter().enumerate() {
            let dominated = live
                .iter()
                .enumerate()
                .any(|(j, other)| j != i && other.len() > b.len() && b.is_subset(other))
                || live
                    .iter()
                    .enumerate()
                    .any(|(j, other)| j < i && other.len() == b.len() && *other == *b);
            if !dominated {
                keep.push(b.iter().copied().collect());
            }
        }
        let covered: HashSet<Vertex> = keep.iter().flatten().copied().collect();
        for &v in scope {
            if !covered.contains(&v) {
                keep.push(vec![v]);
            }
        }
        keep.sort();
        keep
    }
}

/// Derived graph for maximal 2-vertex-connected subgraphs: a copy of the
/// host graph with every edge joining different components of some
/// `G \ {v}` purged, plus the resilient sets of the residue.
pub struct TwoVcsState {
    pub joint: Joint,
    pub vrc: Option<VrcState>,
    pending: VecDeque<(Vertex, Vertex)>,
    enqueued: HashSet<(Vertex, Vertex)>,
}

impl TwoVcsState {
    pub fn new(g: &Digraph) -> TwoVcsState {
        let scope: Vec<Vertex> = (0..g.n()).collect();
        let joint = Joint::build(g.clone(), scope.clone(), scope);
        let mut st = TwoVcsState {
            joint,
            vrc: None,
            pending: VecDeque::new(),
            enqueued: HashSet::new(),
        };
        // First purge round: edges whose endpoints already sit in different
        // components of some G minus v.
        for (a, b) in st.joint.graph().distinct_edges() {
            if a == b {
                continue;
            }
            let crossing = st.joint.scope().iter().any(|&v| {
                v != a && v != b && st.joint.unit(a, v) != st.joint.unit(b, v)
            });
            if crossing {
                st.enqueue((a, b));
            }
        }
        st.drain();
        st.vrc = Some(VrcState::new(&st.joint));
        st
    }

    fn enqueue(&mut self, e: (Vertex, Vertex)) {
        if self.enqueued.insert(e) {
            self.pending.push_back(e);
        }
    }

    fn drain(&mut self) {
        while let Some((a, b)) = self.pending.pop_front() {
            // Purged edges cross a component boundary: every copy goes.
            while self.joint.graph().has_edge(a, b) {
                self.delete_one(a, b);
            }
        }
    }

    fn delete_one(&mut self, a: Vertex, b: Vertex) {
        let report = self.joint.delete_edge(a, b).expect("edge present");
        // Refinement rides the same break reports.
        if let Some(vrc) = self.vrc.as_mut() {
            for brk in &report.scc_breaks {
                vrc.on_scc_break(&self.joint, brk);
            }
            for cb in &report.column_breaks {
                vrc.on_column_break(&self.joint, cb);
            }
        }
        // Newly crossing edges appear only around broken fragments.
        let mut found: Vec<(Vertex, Vertex)> = Vec::new();
        for cb in &report.column_breaks {
            let col = cb.column;
            for (_, members) in &cb.b.fragments {
                for &z in members {
                    for &(t, _) in self.joint.graph().out(z) {
                        if t != z
                            && t != col
                            && self.joint.unit(z, col) != self.joint.unit(t, col)
                        {
                            found.push((z, t));
                        }
                    }
                    for &(t, _) in self.joint.graph().inn(z) {
                        if t != z
                            && t != col
                            && self.joint.unit(z, col) != self.joint.unit(t, col)
                        {
                            found.push((t, z));
                        }
                    }
                }
            }
        }
        for e in found {
            self.enqueue(e);
        }
    }

    /// Mirrors a host-graph deletion: exactly one copy leaves, then the
    /// purge queue drains.
    pub fn delete_edge(&mut self, x: Vertex, y: Vertex) {
        if self.joint.graph().has_edge(x, y) {
            self.delete_one(x, y);
            self.drain();
        }
    }

    /// Maximal 2-vertex-connected subgraphs: residue resilient sets of size
    /// at least three; `include_pairs` adds degenerate mutually adjacent
    /// pairs.
    pub fn subgraphs(&self, include_pairs: bool) -> Vec<Vec<Vertex>> {
        let scope: Vec<Vertex> = self.joint.scope().to_vec();
        let g = self.joint.graph();
        self.vrc
            .as_ref()
            .expect("resilient sets exist after construction")
            .blocks(&scope)
            .into_iter()
            .filter(|b| {
                b.len() >= 3
                    || (include_pairs
                        && b.len() == 2
                        && g.has_edge(b[0], b[1])
                        && g.has_edge(b[1], b[0]))
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle;

    fn g(n: usize, edges: &[(usize, usize)]) -> Digraph {
        let mut g = Digraph::new(n);
        for &(u, v) in edges {
            g.add_edge(u, v);
        }
        g
    }

    fn joint_of(graph: &Digraph) -> Joint {
        let scope: Vec<Vertex> = (0..graph.n()).collect();
        Joint::build(graph.clone(), scope.clone(), scope)
    }

    #[test]
    fn vrc_examples() {
        let tri = g(3, &[(0, 1), (1, 0), (1, 2), (2, 1), (0, 2), (2, 0)]);
        let st = VrcState::new(&joint_of(&tri));
        assert_eq!(st.blocks(&[0, 1, 2]), vec![vec![0, 1, 2]]);

        let c3 = g(3, &[(0, 1), (1, 2), (2, 0)]);
        let st = VrcState::new(&joint_of(&c3));
        assert_eq!(st.blocks(&[0, 1, 2]), oracle::oracle_vrc(&c3));

        // Bidirected path: blocks overlap at the middle vertex.
        let p = g(3, &[(0, 1), (1, 0), (1, 2), (2, 1)]);
        let st = VrcState::new(&joint_of(&p));
        assert_eq!(st.blocks(&[0, 1, 2]), vec![vec![0, 1], vec![1, 2]]);
    }

    #[test]
    fn vrc_decremental_matches_oracle() {
        let mut seed = 0x5151_2222u64;
        let mut xr = move || {
            seed ^= seed << 13;
            seed ^= seed >> 7;
            seed ^= seed << 17;
            seed
        };
        for trial in 0..12 {
            let n = 3 + (xr() % 4) as usize;
            let m = (xr() % 16) as usize;
            let mut graph = Digraph::new(n);
            for _ in 0..m {
                let u = (xr() % n as u64) as usize;
                let v = (xr() % n as u64) as usize;
                if u != v {
                    graph.add_edge(u, v);
                }
            }
            let mut joint = joint_of(&graph);
            let mut st = VrcState::new(&joint);
            let scope: Vec<Vertex> = (0..n).collect();
            assert_eq!(st.blocks(&scope), oracle::oracle_vrc(&graph), "init {trial}");
            while graph.m() > 0 {
                let edges = graph.edges();
                let (u, v) = edges[(xr() % edges.len() as u64) as usize];
                let report = joint.delete_edge(u, v).unwrap();
                graph.remove_edge(u, v).unwrap();
                for brk in &report.scc_breaks {
                    st.on_scc_break(&joint, brk);
                }
                for cb in &report.column_breaks {
                    st.on_column_break(&joint, cb);
                }
                assert_eq!(st.blocks(&scope), oracle::oracle_vrc(&graph), "trial {trial}");
            }
        }
    }

    #[test]
    fn two_vcs_examples() {
        let tri = g(3, &[(0, 1), (1, 0), (1, 2), (2, 1), (0, 2), (2, 0)]);
        let st = TwoVcsState::new(&tri);
        assert_eq!(st.subgraphs(false), vec![vec![0, 1, 2]]);

        let c3 = g(3, &[(0, 1), (1, 2), (2, 0)]);
        let st = TwoVcsState::new(&c3);
        assert!(st.subgraphs(false).is_empty());

        // Two bidirected triangles sharing vertex 2.
        let two = g(
            5,
            &[
                (0, 1), (1, 0), (1, 2), (2, 1), (0, 2), (2, 0),
                (2, 3), (3, 2), (3, 4), (4, 3), (2, 4), (4, 2),
            ],
        );
        let st = TwoVcsState::new(&two);
        assert_eq!(st.subgraphs(false), vec![vec![0, 1, 2], vec![2, 3, 4]]);
    }

    #[test]
    fn two_vcs_decremental_matches_oracle() {
        let mut seed = 0x9911_aaaau64;
        let mut xr = move || {
            seed ^= seed << 13;
            seed ^= seed >> 7;
            seed ^= seed << 17;
            seed
        };
        for trial in 0..10 {
            let n = 3 + (xr() % 4) as usize;
            let m = (xr() % 16) as usize;
            let mut graph = Digraph::new(n);
            for _ in 0..m {
                let u = (xr() % n as u64) as usize;
                let v = (xr() % n as u64) as usize;
                if u != v {
                    graph.add_edge(u, v);
                }
            }
            let mut st = TwoVcsState::new(&graph);
            assert_eq!(
                st.subgraphs(false),
                oracle::oracle_max_2vcs(&graph, false),
                "init {trial}"
            );
            while graph.m() > 0 {
                let edges = graph.edges();
                let (u, v) = edges[(xr() % edges.len() as u64) as usize];
                st.delete_edge(u, v);
                graph.remove_edge(u, v).unwrap();
                assert_eq!(
                    st.subgraphs(false),
                    oracle::oracle_max_2vcs(&graph, false),
                    "trial {trial}"
                );
            }
        }
    }
}
