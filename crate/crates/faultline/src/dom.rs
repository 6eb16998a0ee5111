//! Dominator trees: static computation and constant-time ancestry tests.

use crate::graph::{Digraph, Vertex};
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum DomError {
    #[error("vertex {0} is unreachable from the root")]
    Unreachable(usize),
}

/// A dominator tree rooted at `root`.
///
/// `parent[v]` is the immediate dominator for every reachable `v != root`.
/// `preorder`/`size` support the O(1) ancestor test; `depth` supports nca by
/// parent walking. Unreachable vertices are flagged and excluded.
#[derive(Debug, Clone)]
pub struct DominatorTree {
    pub root: Vertex,
    pub parent: Vec<Option<Vertex>>,
    pub children: Vec<Vec<Vertex>>,
    pub depth: Vec<u32>,
    pub preorder: Vec<u32>,
    pub size: Vec<u32>,
    pub reachable: Vec<bool>,
}

impl DominatorTree {
    /// Builds the index arrays (children, depth, preorder, size) from a
    /// parent assignment. Children are visited in ascending order, so the
    /// preorder is deterministic.
    pub fn from_parents(n: usize, root: Vertex, parent: Vec<Option<Vertex>>, reachable: Vec<bool>) -> Self {
        let mut t = DominatorTree {
            root,
            parent,
            children: vec![Vec::new(); n],
            depth: vec![0; n],
            preorder: vec![0; n],
            size: vec![0; n],
            reachable,
        };
        t.reindex();
        t
    }

    /// Recomputes children lists, depth, preorder and subtree sizes from the
    /// current parents. One DFS, O(n).
    pub fn reindex(&mut self) {
        let n = self.parent.len();
        for c in &mut self.children {
            c.clear();
        }
        for v in 0..n {
            if v != self.root && self.reachable[v] {
                if let Some(p) = self.parent[v] {
                    self.children[p].push(v);
                }
            }
        }
        for c in &mut self.children {
            c.sort_unstable();
        }
        // Iterative DFS assigning preorder and sizes.
        let mut counter = 0u32;
        let mut stack: Vec<(Vertex, usize)> = Vec::new();
        if !self.reachable[self.root] {
            return;
        }
        self.depth[self.root] = 0;
        self.preorder[self.root] = counter;
        counter += 1;
        stack.push((self.root, 0));
        let mut order: Vec<Vertex> = vec![self.root];
        while let Some(&mut (v, ref mut ci)) = stack.last_mut() {
            if *ci < self.children[v].len() {
                let c = self.children[v][*ci];
                *ci += 1;
                self.depth[c] = self.depth[v] + 1;
                self.preorder[c] = counter;
                counter += 1;
                order.push(c);
                stack.push((c, 0));
            } else {
                stack.pop();
            }
        }
        for &v in order.iter().rev() {
            self.size[v] = 1 + self.children[v].iter().map(|&c| self.size[c]).sum::<u32>();
        }
    }

    /// True iff `u` is an ancestor of `v` (reflexive).
    pub fn is_ancestor(&self, u: Vertex, v: Vertex) -> Result<bool, DomError> {
        for x in [u, v] {
            if !self.reachable[x] {
                return Err(DomError::Unreachable(x + 1));
            }
        }
        Ok(self.preorder[u] <= self.preorder[v]
            && self.preorder[v] < self.preorder[u] + self.size[u])
    }

    /// Nearest common ancestor by depth-aligned parent walking.
    pub fn nca(&self, u: Vertex, v: Vertex) -> Result<Vertex, DomError> {
        for x in [u, v] {
            if !self.reachable[x] {
                return Err(DomError::Unreachable(x + 1));
            }
        }
        let (mut a, mut b) = (u, v);
        while self.depth[a] > self.depth[b] {
            a = self.parent[a].expect("non-root without parent");
        }
        while self.depth[b] > self.depth[a] {
            b = self.parent[b].expect("non-root without parent");
        }
        while a != b {
            a = self.parent[a].expect("non-root without parent");
            b = self.parent[b].expect("non-root without parent");
        }
        Ok(a)
    }
}

/// Vertices reachable from `s`, optionally treating one vertex as removed.
pub fn reachable_set(g: &Digraph, s: Vertex, removed: Option<Vertex>) -> Vec<bool> {
    let mut seen = vec![false; g.n()];
    if Some(s) == removed {
        return seen;
    }
    let mut stack = vec![s];
    seen[s] = true;
    while let Some(v) = stack.pop() {
        for &(w, _) in g.out(v) {
            if !seen[w] && Some(w) != removed {
                seen[w] = true;
                stack.push(w);
            }
        }
    }
    seen
}

/// Static dominator tree by iterative data-flow over reverse postorder.
///
/// Correctness is the contract here, not linear time; the result is checked
/// against the parent and sibling properties in tests.
pub fn static_dominators(g: &Digraph, s: Vertex) -> DominatorTree {
    let n = g.n();
    let reachable = reachable_set(g, s, None);

    // DFS postorder from s.
    let mut post: Vec<Vertex> = Vec::new();
    let mut state = vec![0u8; n]; // 0 unvisited, 1 open, 2 done
    let mut stack: Vec<(Vertex, usize)> = vec![(s, 0)];
    state[s] = 1;
    while let Some(&mut (v, ref mut ei)) = stack.last_mut() {
        let out = g.out(v);
        if *ei < out.len() {
            let (w, _) = out[*ei];
            *ei += 1;
            if state[w] == 0 {
                state[w] = 1;
                stack.push((w, 0));
            }
        } else {
            state[v] = 2;
            post.push(v);
            stack.pop();
        }
    }
    let mut rpo_num = vec![usize::MAX; n];
    let rpo: Vec<Vertex> = post.iter().rev().copied().collect();
    for (i, &v) in rpo.iter().enumerate() {
        rpo_num[v] = i;
    }

    let mut idom: Vec<Option<Vertex>> = vec![None; n];
    idom[s] = Some(s);
    let mut changed = true;
    while changed {
        changed = false;
        for &v in &rpo {
            if v == s {
                continue;
            }
            let mut new_idom: Option<Vertex> = None;
            for &(u, _) in g.inn(v) {
                if !reachable[u] || idom[u].is_none() {
                    continue;
                }
                new_idom = Some(match new_idom {
                    None => u,
                    Some(cur) => intersect(&idom, &rpo_num, cur, u),
                });
            }
            if new_idom.is_some() && idom[v] != new_idom {
                idom[v] = new_idom;
                changed = true;
            }
        }
    }

    let mut parent: Vec<Option<Vertex>> = vec![None; n];
    for v in 0..n {
        if v != s && reachable[v] {
            parent[v] = idom[v];
        }
    }
    DominatorTree::from_parents(n, s, parent, reachable)
}

fn intersect(idom: &[Option<Vertex>], rpo_num: &[usize], mut a: Vertex, mut b: Vertex) -> Vertex {
    while a != b {
        while rpo_num[a] > rpo_num[b] {
            a = idom[a].expect("intersect hit unprocessed vertex");
        }
        while rpo_num[b] > rpo_num[a] {
            b = idom[b].expect("intersect hit unprocessed vertex");
        }
    }
    a
}

#[cfg(test)]
mod tests {
    use super::*;

    fn g(n: usize, edges: &[(usize, usize)]) -> Digraph {
        let mut g = Digraph::new(n);
        for &(u, v) in edges {
            g.add_edge(u, v);
        }
        g
    }

    #[test]
    fn diamond_is_flat() {
        let t = static_dominators(&g(4, &[(0, 1), (0, 2), (1, 3), (2, 3)]), 0);
        assert_eq!(t.parent[1], Some(0));
        assert_eq!(t.parent[2], Some(0));
        assert_eq!(t.parent[3], Some(0));
    }

    #[test]
    fn chain_parents() {
        let t = static_dominators(&g(3, &[(0, 1), (1, 2)]), 0);
        assert_eq!(t.parent[1], Some(0));
        assert_eq!(t.parent[2], Some(1));
    }

    #[test]
    fn cycle_with_chord() {
        // 1->2->3->4->1 with chord 2->4 (0-based: 0->1->2->3->0, 1->3).
        let t = static_dominators(&g(4, &[(0, 1), (1, 2), (2, 3), (3, 0), (1, 3)]), 0);
        assert_eq!(t.parent[1], Some(0));
        assert_eq!(t.parent[2], Some(1));
        assert_eq!(t.parent[3], Some(1));
    }

    #[test]
    fn ancestor_and_nca() {
        let t = static_dominators(&g(4, &[(0, 1), (0, 2), (1, 3), (2, 3)]), 0);
        assert!(t.is_ancestor(0, 3).unwrap());
        assert!(!t.is_ancestor(1, 2).unwrap());
        assert!(t.is_ancestor(2, 2).unwrap());
        assert_eq!(t.nca(1, 2).unwrap(), 0);
        let chain = static_dominators(&g(3, &[(0, 1), (1, 2)]), 0);
        assert_eq!(chain.nca(1, 2).unwrap(), 1);
    }

    #[test]
    fn unreachable_is_flagged() {
        let t = static_dominators(&g(3, &[(0, 1)]), 0);
        assert!(!t.reachable[2]);
        assert_eq!(t.is_ancestor(0, 2), Err(DomError::Unreachable(3)));
    }
}
