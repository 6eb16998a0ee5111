//! Decremental dominator tree from a fixed start vertex.
//!
//! The graph is augmented with an edge from every vertex back to the start
//! `s`, which makes "reachable from `s`" coincide with "strongly connected
//! to `s`" and turns dominance into a column query: `x` dominates `v` iff
//! `s` and `v` fall apart in the augmented graph minus `x`. A shared
//! decomposition family over the augmented graph reports, per deletion and
//! per column `x`, the components that split away from `s`'s component —
//! exactly the vertices newly dominated by `x`. Two passes over those sets
//! (a depth pass, then a deepest-new-ancestor pass) rebuild the tree.

use crate::dom::DominatorTree;
use crate::graph::{Digraph, Vertex};
use crate::joint::{Break, DeletionReport, Joint, JointError, Partition};
use std::collections::BTreeMap;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum DomStateError {
    #[error(transparent)]
    Joint(#[from] JointError),
    #[error("({0}, {1}) is an augmentation edge, not a graph edge")]
    Augmentation(usize, usize),
    #[error("vertex {0} is unreachable from the start vertex")]
    Unreachable(usize),
}

/// Dominator tree of a digraph from `s`, maintained under edge deletions.
pub struct DomState {
    s: Vertex,
    /// Joint family over the augmented graph.
    joint: Joint,
    /// Augmentation copies (v, s) added on top of the input, never deletable.
    aug_mult: Vec<u32>,
    pub parent: Vec<Option<Vertex>>,
    pub depth: Vec<u32>,
    pub reachable: Vec<bool>,
    /// Vertices whose parent changed in the last deletion.
    pub last_affected: Vec<Vertex>,
    /// Cumulative volume of the newly-dominated sets (bounded by n^2).
    pub nset_volume: u64,
    /// Process the newly-dominated sets in descending column order instead
    /// of ascending; the result must not depend on it.
    pub process_descending: bool,
}

/// Follows a split chain: given the pre-event id of a tracked vertex's
/// component and the breaks in order, returns the tracked ids that departed
/// from it (closed under further splits) and the final id.
fn follow_splits<'a>(
    start_id: u32,
    breaks: impl Iterator<Item = &'a Break>,
    tracked: Vertex,
) -> (Vec<u32>, u32) {
    let mut cur = start_id;
    let mut departed: Vec<u32> = Vec::new();
    for b in breaks {
        if b.old_id == cur {
            // The tracked vertex's component broke; find its new fragment.
            let mut new_id = None;
            for (id, members) in &b.fragments {
                if members.binary_search(&tracked).is_ok() {
                    new_id = Some(*id);
                    break;
                }
            }
            let new_id = new_id.unwrap_or(b.largest);
            for (id, _) in &b.fragments {
                if *id != new_id {
                    departed.push(*id);
                }
            }
            if b.largest != new_id {
                departed.push(b.largest);
            }
            cur = new_id;
        } else if departed.contains(&b.old_id) {
            // A departed component split further; keep the closure tight so
            // final member walks cover everything.
            for (id, _) in &b.fragments {
                if !departed.contains(id) {
                    departed.push(*id);
                }
            }
            if !departed.contains(&b.largest) {
                departed.push(b.largest);
            }
        }
    }
    (departed, cur)
}

fn members_of(part: &Partition, ids: &[u32]) -> Vec<Vertex> {
    let mut out = Vec::new();
    for &id in ids {
        out.extend(part.members(id));
    }
    out.sort_unstable();
    out.dedup();
    out
}

impl DomState {
    /// Builds the state over the subgraph induced by `scope`; `s` must be in
    /// scope. `order` picks the split order of the internal family.
    pub fn new(g: &Digraph, scope: &[Vertex], order: &[Vertex], s: Vertex) -> DomState {
        debug_assert!(scope.contains(&s));
        let n = g.n();
        let mut aug = g.clone();
        let mut aug_mult = vec![0u32; n];
        for &v in scope {
            if v != s {
                aug.add_edge(v, s);
                aug_mult[v] = 1;
            }
        }
        let joint = Joint::build(aug, scope.to_vec(), order.to_vec());
        let mut st = DomState {
            s,
            joint,
            aug_mult,
            parent: vec![None; n],
            depth: vec![0; n],
            reachable: vec![false; n],
            last_affected: Vec::new(),
            nset_volume: 0,
            process_descending: false,
        };
        let t = crate::dom::static_dominators(g, s);
        st.parent = t.parent;
        st.depth = t.depth;
        st.reachable = t.reachable;
        st
    }

    pub fn start(&self) -> Vertex {
        self.s
    }

    pub fn graph_edge_present(&self, x: Vertex, y: Vertex) -> bool {
        if !self.joint.in_scope(x) || !self.joint.in_scope(y) {
            return false;
        }
        let m = self.joint.graph().multiplicity(x, y);
        let aug = if y == self.s { self.aug_mult[x] } else { 0 };
        m > aug
    }

    /// Deletes the (non-augmentation) edge `(x, y)` and updates the tree.
    pub fn delete_edge(&mut self, x: Vertex, y: Vertex) -> Result<DeletionReport, DomStateError> {
        if !self.graph_edge_present(x, y) {
            if self.joint.in_scope(x) && y == self.s && self.aug_mult[x] > 0 {
                return Err(DomStateError::Augmentation(x + 1, y + 1));
            }
            return Err(DomStateError::Joint(JointError::EdgeMissing(x + 1, y + 1)));
        }
        // Pre-deletion snapshots of s's component ids.
        let pre_scc = self.joint.scc_partition().id[self.s];
        let n = self.joint.graph().n();
        let pre_col: Vec<u32> = (0..n)
            .map(|w| self.joint.unit(self.s, w).unwrap_or(crate::joint::NO_ID))
            .collect();

        let report = self.joint.delete_edge(x, y)?;
        self.last_affected.clear();

        if !self.reachable[x] {
            // A deletion with an unreachable tail cannot change reachability
            // or dominance.
            return Ok(report);
        }

        // Vertices that left s's strongly connected set in the augmented
        // graph became unreachable.
        let (departed, _) = follow_splits(pre_scc, report.scc_breaks.iter(), self.s);
        for v in members_of(self.joint.scc_partition(), &departed) {
            if self.reachable[v] {
                self.reachable[v] = false;
                self.parent[v] = None;
                self.depth[v] = 0;
            }
        }

        // Newly dominated sets per column.
        let mut nsets: BTreeMap<Vertex, Vec<Vertex>> = BTreeMap::new();
        let mut by_col: BTreeMap<Vertex, Vec<&Break>> = BTreeMap::new();
        for cb in &report.column_breaks {
            by_col.entry(cb.column).or_default().push(&cb.b);
        }
        for (&col, breaks) in &by_col {
            if col == self.s || !self.reachable[col] || pre_col[col] == crate::joint::NO_ID {
                continue;
            }
            let (departed, _) = follow_splits(pre_col[col], breaks.iter().copied(), self.s);
            if departed.is_empty() {
                continue;
            }
            let part = self.joint.column(col).unwrap();
            let ws: Vec<Vertex> = members_of(part, &departed)
                .into_iter()
                .filter(|&w| self.reachable[w])
                .collect();
            if !ws.is_empty() {
                nsets.insert(col, ws);
            }
        }

        let ordered: Vec<(Vertex, Vec<Vertex>)> = if self.process_descending {
            nsets.into_iter().rev().collect()
        } else {
            nsets.into_iter().collect()
        };
        // Pass 1: every newly dominating column adds one tree level.
        for (_, ws) in &ordered {
            for &w in ws {
                self.nset_volume += 1;
                self.depth[w] += 1;
            }
        }
        // Pass 2: the parent becomes the deepest newly dominating vertex,
        // starting from the old parent.
        let mut new_parent: BTreeMap<Vertex, Vertex> = BTreeMap::new();
        for (col, ws) in &ordered {
            for &w in ws {
                let cur = new_parent.get(&w).copied().or(self.parent[w]);
                let better = match cur {
                    None => true,
                    Some(p) => self.depth[*col] > self.depth[p],
                };
                if better {
                    new_parent.insert(w, *col);
                }
            }
        }
        for (w, p) in new_parent {
            if self.parent[w] != Some(p) {
                self.parent[w] = Some(p);
                self.last_affected.push(w);
            }
        }
        Ok(report)
    }

    /// Does `x` dominate `v`? O(1) through the column family; `s` and `v`
    /// dominate `v` by convention.
    pub fn dominates(&self, x: Vertex, v: Vertex) -> Result<bool, DomStateError> {
        if !self.reachable[v] && v != self.s {
            return Err(DomStateError::Unreachable(v + 1));
        }
        if x == self.s || x == v {
            return Ok(true);
        }
        if !self.reachable[x] {
            return Ok(false);
        }
        Ok(!self.joint.same_without(self.s, v, x)?)
    }

    /// Snapshot of the maintained tree (O(n)), with preorder/size/children.
    pub fn tree(&self) -> DominatorTree {
        DominatorTree::from_parents(
            self.parent.len(),
            self.s,
            self.parent.clone(),
            self.reachable.clone(),
        )
    }

    pub fn joint(&self) -> &Joint {
        &self.joint
    }

    /// The current graph without the augmentation edges.
    pub fn plain_graph(&self) -> Digraph {
        let g = self.joint.graph();
        let mut out = Digraph::new(g.n());
        for u in 0..g.n() {
            for &(v, c) in g.out(u) {
                let c = if v == self.s { c - self.aug_mult[u] } else { c };
                for _ in 0..c {
                    out.add_edge(u, v);
                }
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dom::static_dominators;

    fn g(n: usize, edges: &[(usize, usize)]) -> Digraph {
        let mut g = Digraph::new(n);
        for &(u, v) in edges {
            g.add_edge(u, v);
        }
        g
    }

    fn new_state(graph: &Digraph, s: Vertex) -> DomState {
        let scope: Vec<Vertex> = (0..graph.n()).collect();
        DomState::new(graph, &scope, &scope, s)
    }

    fn check_against_static(st: &DomState, graph: &Digraph) {
        let want = static_dominators(graph, st.start());
        assert_eq!(st.reachable, want.reachable, "reachable sets differ");
        assert_eq!(st.parent, want.parent, "parents differ");
        for v in 0..graph.n() {
            if st.reachable[v] {
                assert_eq!(st.depth[v], want.depth[v], "depth of {v} differs");
            }
        }
    }

    #[test]
    fn diamond_then_delete() {
        let mut graph = g(4, &[(0, 1), (0, 2), (1, 3), (2, 3)]);
        let mut st = new_state(&graph, 0);
        check_against_static(&st, &graph);
        st.delete_edge(1, 3).unwrap();
        graph.remove_edge(1, 3).unwrap();
        check_against_static(&st, &graph);
        assert_eq!(st.parent[3], Some(2));
    }

    #[test]
    fn dominance_queries() {
        let chain = g(3, &[(0, 1), (1, 2)]);
        let st = new_state(&chain, 0);
        assert_eq!(st.dominates(1, 2), Ok(true));
        let diamond = g(4, &[(0, 1), (0, 2), (1, 3), (2, 3)]);
        let st = new_state(&diamond, 0);
        assert_eq!(st.dominates(1, 3), Ok(false));
        assert_eq!(st.dominates(0, 3), Ok(true));
        assert_eq!(st.dominates(3, 3), Ok(true));
    }

    #[test]
    fn unreachability_is_detected() {
        let mut graph = g(3, &[(0, 1), (1, 2)]);
        let mut st = new_state(&graph, 0);
        st.delete_edge(1, 2).unwrap();
        graph.remove_edge(1, 2).unwrap();
        assert!(!st.reachable[2]);
        check_against_static(&st, &graph);
        assert_eq!(st.dominates(1, 2), Err(DomStateError::Unreachable(3)));
    }

    #[test]
    fn augmentation_edges_are_protected() {
        let graph = g(2, &[(0, 1)]);
        let mut st = new_state(&graph, 0);
        assert_eq!(st.delete_edge(1, 0), Err(DomStateError::Augmentation(2, 1)));
    }

    #[test]
    fn real_edge_into_start_is_deletable() {
        let mut graph = g(2, &[(0, 1), (1, 0)]);
        let mut st = new_state(&graph, 0);
        st.delete_edge(1, 0).unwrap();
        graph.remove_edge(1, 0).unwrap();
        check_against_static(&st, &graph);
        assert_eq!(st.delete_edge(1, 0), Err(DomStateError::Augmentation(2, 1)));
    }

    fn random_sequences(descending: bool) {
        let mut seed = 0xdead_beef_1234u64;
        let mut rng = move || {
            seed ^= seed << 13;
            seed ^= seed >> 7;
            seed ^= seed << 17;
            seed
        };
        for _ in 0..20 {
            let n = 3 + (rng() % 5) as usize;
            let m = (rng() % 18) as usize;
            let mut graph = Digraph::new(n);
            for _ in 0..m {
                let u = (rng() % n as u64) as usize;
                let v = (rng() % n as u64) as usize;
                if u != v {
                    graph.add_edge(u, v);
                }
            }
            let mut st = new_state(&graph, 0);
            st.process_descending = descending;
            check_against_static(&st, &graph);
            while graph.m() > 0 {
                let edges = graph.edges();
                let (u, v) = edges[(rng() % edges.len() as u64) as usize];
                st.delete_edge(u, v).unwrap();
                graph.remove_edge(u, v).unwrap();
                check_against_static(&st, &graph);
            }
            assert!(st.nset_volume <= (n * n) as u64);
        }
    }

    #[test]
    fn random_full_sequences_match_static() {
        random_sequences(false);
    }

    #[test]
    fn column_processing_order_is_irrelevant() {
        random_sequences(true);
    }
}
