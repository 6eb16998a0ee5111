//! Brute-force reference implementations.
//!
//! Every quantity the maintained structures produce has an independent
//! recompute-from-scratch counterpart here. The oracles share only the graph
//! type and Tarjan with the fast paths; none of the incremental bookkeeping
//! is reused, so a disagreement always means a real bug on one side.

use crate::dom::{reachable_set, DominatorTree};
use crate::graph::{Digraph, Vertex};
use crate::scc::{tarjan_scc, tarjan_scc_scoped, SccLabeling};
use std::collections::BTreeSet;

/// One verification outcome, printed by the CLI under `--verify`.
#[derive(Debug, Clone)]
pub struct OracleReport {
    pub check: String,
    pub expected: String,
    pub actual: String,
    pub pass: bool,
}

impl OracleReport {
    pub fn render(&self) -> String {
        format!(
            "ORACLE check={} pass={} expected={} actual={}",
            self.check, self.pass, self.expected, self.actual
        )
    }
}

/// SCCs of `g` with one vertex removed.
pub fn oracle_scc_without_vertex(g: &Digraph, w: Vertex) -> SccLabeling {
    let scope: Vec<Vertex> = (0..g.n()).collect();
    tarjan_scc_scoped(g, &scope, Some(w))
}

/// SCCs of `g` with one copy of `(u, v)` removed.
pub fn oracle_scc_without_edge(g: &Digraph, u: Vertex, v: Vertex) -> SccLabeling {
    let mut h = g.clone();
    h.remove_edge(u, v).expect("oracle: edge not present");
    tarjan_scc(&h)
}

/// Dominator tree by definition: `x` dominates `v` iff `v` is unreachable
/// from `s` once `x` is removed. The immediate dominator is the deepest
/// proper dominator (the one with the largest dominator set).
pub fn oracle_dominators(g: &Digraph, s: Vertex) -> DominatorTree {
    let n = g.n();
    let reachable = reachable_set(g, s, None);
    // doms[v] = proper dominators of v (excluding v itself, including s).
    let mut doms: Vec<BTreeSet<Vertex>> = vec![BTreeSet::new(); n];
    for x in 0..n {
        if !reachable[x] {
            continue;
        }
        let r = reachable_set(g, s, Some(x));
        for v in 0..n {
            if v != x && reachable[v] && !r[v] {
                doms[v].insert(x);
            }
        }
    }
    let mut parent: Vec<Option<Vertex>> = vec![None; n];
    for v in 0..n {
        if v == s || !reachable[v] {
            continue;
        }
        // Immediate dominator: the proper dominator with the most dominators.
        let idom = doms[v]
            .iter()
            .copied()
            .max_by_key(|&x| (doms[x].len(), x))
            .expect("reachable non-root vertex without dominators");
        parent[v] = Some(idom);
    }
    DominatorTree::from_parents(n, s, parent, reachable)
}

/// Edges whose removal increases the number of SCCs.
pub fn oracle_strong_bridges(g: &Digraph) -> BTreeSet<(Vertex, Vertex)> {
    let base = tarjan_scc(g).component_count;
    let mut out = BTreeSet::new();
    for (u, v) in g.distinct_edges() {
        if u == v || g.multiplicity(u, v) > 1 {
            continue;
        }
        if oracle_scc_without_edge(g, u, v).component_count > base {
            out.insert((u, v));
        }
    }
    out
}

/// Vertices whose removal increases the number of SCCs.
pub fn oracle_strong_articulation_points(g: &Digraph) -> BTreeSet<Vertex> {
    let base = tarjan_scc(g).component_count;
    (0..g.n())
        .filter(|&w| oracle_scc_without_vertex(g, w).component_count > base)
        .collect()
}

/// True iff `u` and `w` stay strongly connected under removal of any single
/// other vertex (and are strongly connected to begin with).
pub fn oracle_vertex_resilient(g: &Digraph, u: Vertex, w: Vertex) -> bool {
    if u == w {
        return true;
    }
    if !tarjan_scc(g).same(u, w) {
        return false;
    }
    (0..g.n()).all(|v| v == u || v == w || oracle_scc_without_vertex(g, v).same(u, w))
}

fn resilience_relation(g: &Digraph) -> Vec<Vec<bool>> {
    let n = g.n();
    let base = tarjan_scc(g);
    let labs: Vec<SccLabeling> = (0..n).map(|v| oracle_scc_without_vertex(g, v)).collect();
    let mut rel = vec![vec![false; n]; n];
    for u in 0..n {
        rel[u][u] = true;
        for w in u + 1..n {
            let r = base.same(u, w)
                && (0..n).all(|v| v == u || v == w || labs[v].component_id[u] == labs[v].component_id[w]);
            rel[u][w] = r;
            rel[w][u] = r;
        }
    }
    rel
}

/// Maximal sets of pairwise vertex-resilient vertices. Sets may overlap in a
/// single vertex; vertices resilient with nobody appear as singletons.
/// Distinct resilient pairs lie in a unique maximal set, so greedy growth
/// from any uncovered pair is order-independent.
pub fn oracle_vrc(g: &Digraph) -> Vec<Vec<Vertex>> {
    let n = g.n();
    let rel = resilience_relation(g);
    let mut blocks: Vec<Vec<Vertex>> = Vec::new();
    let mut covered = vec![vec![false; n]; n];
    for u in 0..n {
        for w in u + 1..n {
            if !rel[u][w] || covered[u][w] {
                continue;
            }
            let mut b = vec![u, w];
            loop {
                let mut grew = false;
                for x in 0..n {
                    if !b.contains(&x) && b.iter().all(|&y| rel[x][y]) {
                        b.push(x);
                        grew = true;
                    }
                }
                if !grew {
                    break;
                }
            }
            b.sort_unstable();
            for i in 0..b.len() {
                for j in i + 1..b.len() {
                    covered[b[i]][b[j]] = true;
                }
            }
            blocks.push(b);
        }
    }
    let mut in_block = vec![false; n];
    for b in &blocks {
        for &v in b {
            in_block[v] = true;
        }
    }
    for v in 0..n {
        if !in_block[v] {
            blocks.push(vec![v]);
        }
    }
    blocks.sort();
    blocks
}

/// 2-edge-connected components: the partition refinement of the SCCs by the
/// SCCs of `G \ e` over every single-copy edge `e`.
pub fn oracle_2ecc(g: &Digraph) -> Vec<Vec<Vertex>> {
    let n = g.n();
    let mut label: Vec<usize> = tarjan_scc(g).component_id.clone();
    for (u, v) in g.distinct_edges() {
        if u == v || g.multiplicity(u, v) > 1 {
            continue;
        }
        let lab = oracle_scc_without_edge(g, u, v);
        // Refine: two vertices stay together only if they agree here too.
        let mut key: Vec<(usize, usize)> = (0..n).map(|x| (label[x], lab.component_id[x])).collect();
        let mut sorted = key.clone();
        sorted.sort_unstable();
        sorted.dedup();
        for x in 0..n {
            label[x] = sorted.binary_search(&key[x]).unwrap();
        }
        let _ = &mut key;
    }
    classes(&label)
}

/// Static fixpoint for maximal 2-vertex-connected subgraphs: repeatedly
/// remove, for each vertex `v`, all edges joining different SCCs of
/// `G \ {v}`; the resilient sets of the residue (size > 2, plus degenerate
/// mutually adjacent pairs behind the flag) are the answer.
pub fn oracle_max_2vcs(g: &Digraph, include_pairs: bool) -> Vec<Vec<Vertex>> {
    let n = g.n();
    let mut h = g.clone();
    loop {
        let mut removed = false;
        for v in 0..n {
            let lab = oracle_scc_without_vertex(&h, v);
            for (a, b) in h.distinct_edges() {
                if a == v || b == v || a == b {
                    continue;
                }
                if lab.component_id[a] != lab.component_id[b] {
                    while h.remove_edge(a, b).is_ok() {}
                    removed = true;
                }
            }
        }
        if !removed {
            break;
        }
    }
    let blocks = oracle_vrc(&h);
    let mut out: Vec<Vec<Vertex>> = Vec::new();
    for b in blocks {
        if b.len() > 2 {
            out.push(b);
        } else if include_pairs && b.len() == 2 && h.has_edge(b[0], b[1]) && h.has_edge(b[1], b[0]) {
            out.push(b);
        }
    }
    out.sort();
    out
}

/// Static fixpoint for maximal 2-edge-connected subgraphs: remove strong
/// bridges until none remain; the SCCs of size >= 2 of the residue are the
/// answer.
pub fn oracle_max_2ecs(g: &Digraph) -> Vec<Vec<Vertex>> {
    let mut h = g.clone();
    loop {
        let bridges = oracle_strong_bridges(&h);
        if bridges.is_empty() {
            break;
        }
        for (u, v) in bridges {
            h.remove_edge(u, v).unwrap();
        }
    }
    let lab = tarjan_scc(&h);
    let mut out: Vec<Vec<Vertex>> = lab.members.into_iter().filter(|c| c.len() >= 2).collect();
    out.sort();
    out
}

/// All vertices whose removal separates the strongly connected pair `u, w`.
pub fn oracle_separating_vertices(g: &Digraph, u: Vertex, w: Vertex) -> Vec<Vertex> {
    (0..g.n())
        .filter(|&v| v != u && v != w && !oracle_scc_without_vertex(g, v).same(u, w))
        .collect()
}

/// All edges whose removal separates the strongly connected pair `u, w`.
pub fn oracle_separating_edges(g: &Digraph, u: Vertex, w: Vertex) -> Vec<(Vertex, Vertex)> {
    g.distinct_edges()
        .into_iter()
        .filter(|&(a, b)| {
            a != b && g.multiplicity(a, b) == 1 && !oracle_scc_without_edge(g, a, b).same(u, w)
        })
        .collect()
}

/// Checks the parent property (every edge tail descends from the head's tree
/// parent) and the sibling property (no sibling dominates a sibling). A tree
/// over the reachable set passes both iff it is the dominator tree.
pub fn verify_dominator_tree(g: &Digraph, s: Vertex, t: &DominatorTree) -> bool {
    let n = g.n();
    let reachable = reachable_set(g, s, None);
    if t.root != s || t.reachable != reachable {
        return false;
    }
    for v in 0..n {
        if !reachable[v] || v == s {
            continue;
        }
        match t.parent[v] {
            Some(p) if reachable[p] => {}
            _ => return false,
        }
    }
    // Parent property.
    for (v, w) in g.distinct_edges() {
        if v == w || !reachable[v] || !reachable[w] || w == s {
            continue;
        }
        let tw = t.parent[w].unwrap();
        if t.is_ancestor(tw, v) != Ok(true) {
            return false;
        }
    }
    // Sibling property, via dominance by definition.
    let mut unreach_without: Vec<Option<Vec<bool>>> = vec![None; n];
    for p in 0..n {
        let kids = &t.children[p];
        for &v in kids {
            for &w in kids {
                if v == w {
                    continue;
                }
                let r = unreach_without[v]
                    .get_or_insert_with(|| reachable_set(g, s, Some(v)));
                if !r[w] {
                    // v dominates its sibling w.
                    return false;
                }
            }
        }
    }
    true
}

/// Groups a dense labeling into member lists, sorted by minimum member.
pub fn classes(label: &[usize]) -> Vec<Vec<Vertex>> {
    let mut map: std::collections::BTreeMap<usize, Vec<Vertex>> = Default::default();
    for (v, &l) in label.iter().enumerate() {
        map.entry(l).or_default().push(v);
    }
    let mut out: Vec<Vec<Vertex>> = map.into_values().collect();
    out.sort();
    out
}

/// Canonical class view of an id assignment over an arbitrary vertex subset;
/// used to compare partitions up to renaming.
pub fn canonical_classes<I: IntoIterator<Item = (Vertex, u32)>>(pairs: I) -> Vec<Vec<Vertex>> {
    let mut map: std::collections::BTreeMap<u32, Vec<Vertex>> = Default::default();
    for (v, id) in pairs {
        map.entry(id).or_default().push(v);
    }
    let mut out: Vec<Vec<Vertex>> = map
        .into_values()
        .map(|mut c| {
            c.sort_unstable();
            c
        })
        .collect();
    out.sort();
    out
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

    fn bidi_triangle() -> Digraph {
        g(3, &[(0, 1), (1, 0), (1, 2), (2, 1), (0, 2), (2, 0)])
    }

    fn cycle_chord() -> Digraph {
        // K: 1->2->3->4->1 plus 2->4, 0-based.
        g(4, &[(0, 1), (1, 2), (2, 3), (3, 0), (1, 3)])
    }

    #[test]
    fn scc_without_vertex_examples() {
        let c3 = g(3, &[(0, 1), (1, 2), (2, 0)]);
        let lab = oracle_scc_without_vertex(&c3, 1);
        assert_eq!(lab.component_count, 2);
        let k = cycle_chord();
        let lab = oracle_scc_without_vertex(&k, 2);
        // 1,2,4 survive as {1,2,4} via 1->2->4->1.
        assert!(lab.same(0, 1) && lab.same(1, 3));
    }

    #[test]
    fn dominator_oracle_matches_static() {
        let k = cycle_chord();
        let a = oracle_dominators(&k, 0);
        let b = static_dominators(&k, 0);
        assert_eq!(a.parent, b.parent);
        assert!(verify_dominator_tree(&k, 0, &a));
    }

    #[test]
    fn perturbed_tree_fails_verification() {
        let k = cycle_chord();
        let mut t = static_dominators(&k, 0);
        assert!(verify_dominator_tree(&k, 0, &t));
        t.parent[3] = Some(2); // 3 is not dominated by 2 (chord 2->4).
        t.reindex();
        assert!(!verify_dominator_tree(&k, 0, &t));
    }

    #[test]
    fn bridges_and_articulation_points() {
        let c2 = g(2, &[(0, 1), (1, 0)]);
        assert_eq!(oracle_strong_bridges(&c2).len(), 2);
        assert!(oracle_strong_bridges(&bidi_triangle()).is_empty());
        let k = cycle_chord();
        let b = oracle_strong_bridges(&k);
        assert_eq!(
            b.into_iter().collect::<Vec<_>>(),
            vec![(0, 1), (1, 2), (2, 3), (3, 0)]
        );
        assert!(oracle_strong_articulation_points(&bidi_triangle()).is_empty());
        let c3 = g(3, &[(0, 1), (1, 2), (2, 0)]);
        assert_eq!(oracle_strong_articulation_points(&c3).len(), 3);
    }

    #[test]
    fn vrc_examples() {
        assert_eq!(oracle_vrc(&bidi_triangle()), vec![vec![0, 1, 2]]);
        let c3 = g(3, &[(0, 1), (1, 2), (2, 0)]);
        assert_eq!(oracle_vrc(&c3), vec![vec![0], vec![1], vec![2]]);
        // Bidirected path 1-2-3: blocks {1,2} and {2,3} overlap at 2.
        let p = g(3, &[(0, 1), (1, 0), (1, 2), (2, 1)]);
        assert_eq!(oracle_vrc(&p), vec![vec![0, 1], vec![1, 2]]);
    }

    #[test]
    fn two_ecc_examples() {
        assert_eq!(oracle_2ecc(&bidi_triangle()), vec![vec![0, 1, 2]]);
        let c2 = g(2, &[(0, 1), (1, 0)]);
        assert_eq!(oracle_2ecc(&c2), vec![vec![0], vec![1]]);
    }

    #[test]
    fn max_2vcs_examples() {
        assert_eq!(oracle_max_2vcs(&bidi_triangle(), false), vec![vec![0, 1, 2]]);
        let c3 = g(3, &[(0, 1), (1, 2), (2, 0)]);
        assert!(oracle_max_2vcs(&c3, false).is_empty());
        // Two bidirected triangles sharing vertex 2.
        let two = g(
            5,
            &[
                (0, 1), (1, 0), (1, 2), (2, 1), (0, 2), (2, 0),
                (2, 3), (3, 2), (3, 4), (4, 3), (2, 4), (4, 2),
            ],
        );
        assert_eq!(oracle_max_2vcs(&two, false), vec![vec![0, 1, 2], vec![2, 3, 4]]);
    }

    #[test]
    fn max_2ecs_examples() {
        assert_eq!(oracle_max_2ecs(&bidi_triangle()), vec![vec![0, 1, 2]]);
        let c3 = g(3, &[(0, 1), (1, 2), (2, 0)]);
        assert!(oracle_max_2ecs(&c3).is_empty());
        // Two bidirected triangles joined by a directed 2-cycle between 2 and 3.
        let two = g(
            6,
            &[
                (0, 1), (1, 0), (1, 2), (2, 1), (0, 2), (2, 0),
                (3, 4), (4, 3), (4, 5), (5, 4), (3, 5), (5, 3),
                (2, 3), (3, 2),
            ],
        );
        assert_eq!(oracle_max_2ecs(&two), vec![vec![0, 1, 2], vec![3, 4, 5]]);
    }

    #[test]
    fn separators_examples() {
        let c3 = g(3, &[(0, 1), (1, 2), (2, 0)]);
        assert_eq!(oracle_separating_vertices(&c3, 0, 2), vec![1]);
        assert_eq!(oracle_separating_vertices(&bidi_triangle(), 0, 1), Vec::<usize>::new());
        assert_eq!(
            oracle_separating_edges(&c3, 0, 2),
            vec![(0, 1), (1, 2), (2, 0)]
        );
        assert!(oracle_separating_edges(&bidi_triangle(), 0, 1).is_empty());
    }
}
