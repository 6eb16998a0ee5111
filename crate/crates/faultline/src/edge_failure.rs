//! Strong bridges and edge-failure connectivity under deletions.
//!
//! Every SCC carries a pair of dominator trees (forward and reverse) rooted
//! at a uniformly sampled vertex; an edge into `w` from outside `w`'s
//! subtree is counted in `c(w)`, and the tree edge `(d(w), w)` is a strong
//! bridge exactly when that count is one. When an SCC breaks, the root's
//! fragment keeps its instances (cross-fragment edges are fed in as extra
//! deletions and the counters are recomputed); the other fragments get fresh
//! instances with fresh random roots.
//!
//! The SCC partition of `G \ e` for a strong bridge `e = (u, v)` is pieced
//! together from the vertex-failure columns `u` and `v`: two vertices stay
//! connected in `G \ e` iff they stay connected with `u` or with `v`
//! removed, and every piece other than the components of `u` and `v` is a
//! component of both columns.

use crate::dom::DominatorTree;
use crate::dominators::{DomState, DomStateError};
use crate::graph::{Digraph, Vertex};
use crate::joint::{split_partition, Break, Joint, Partition};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet, VecDeque};
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum EdgeFailureError {
    #[error(transparent)]
    Dom(#[from] DomStateError),
    #[error("edge ({0}, {1}) not present")]
    EdgeMissing(usize, usize),
    #[error("vertices {0} and {1} are not strongly connected")]
    NotStronglyConnected(usize, usize),
}

// ---------------------------------------------------------------------------
// One SCC's in-out dominator pair with bridge counters.
// ---------------------------------------------------------------------------

pub struct InOutPair {
    pub scope: Vec<Vertex>,
    pub root: Vertex,
    /// Intra-component subgraph, kept in sync with the host graph.
    pub graph: Digraph,
    fwd: DomState,
    rev: DomState,
    /// Incoming edges (z, w) with z outside w's subtree, per direction.
    pub c_fwd: Vec<u64>,
    pub c_rev: Vec<u64>,
    pub tree_fwd: DominatorTree,
    pub tree_rev: DominatorTree,
    /// Deepest strong bridge on the root path per vertex and direction,
    /// stored as real-graph edges.
    pub ell_fwd: Vec<Option<(Vertex, Vertex)>>,
    pub ell_rev: Vec<Option<(Vertex, Vertex)>>,
    pub bridges: BTreeSet<(Vertex, Vertex)>,
}

fn induced(g: &Digraph, members: &[Vertex]) -> Digraph {
    let mut sub = Digraph::new(g.n());
    let inside: HashSet<Vertex> = members.iter().copied().collect();
    for &u in members {
        for &(v, c) in g.out(u) {
            if u != v && inside.contains(&v) {
                for _ in 0..c {
                    sub.add_edge(u, v);
                }
            }
        }
    }
    sub
}

impl InOutPair {
    fn new(host: &Digraph, members: &[Vertex], root: Vertex) -> InOutPair {
        let graph = induced(host, members);
        let rev_graph = graph.reverse();
        let fwd = DomState::new(&graph, members, members, root);
        let rev = DomState::new(&rev_graph, members, members, root);
        let n = host.n();
        let mut pair = InOutPair {
            scope: members.to_vec(),
            root,
            graph,
            fwd,
            rev,
            c_fwd: vec![0; n],
            c_rev: vec![0; n],
            tree_fwd: DominatorTree::from_parents(n, root, vec![None; n], vec![false; n]),
            tree_rev: DominatorTree::from_parents(n, root, vec![None; n], vec![false; n]),
            ell_fwd: vec![None; n],
            ell_rev: vec![None; n],
            bridges: BTreeSet::new(),
        };
        pair.refresh_trees();
        pair.recompute_counters();
        pair.refresh_bridges_and_ell();
        pair
    }

    fn refresh_trees(&mut self) {
        self.tree_fwd = self.fwd.tree();
        self.tree_rev = self.rev.tree();
    }

    /// Full counter recomputation over the current scope.
    fn recompute_counters(&mut self) {
        for &w in &self.scope {
            self.c_fwd[w] = 0;
            self.c_rev[w] = 0;
        }
        for &w in &self.scope {
            if !self.tree_fwd.reachable[w] {
                continue;
            }
            for &(z, c) in self.graph.inn(w) {
                if z != w
                    && self.tree_fwd.reachable[z]
                    && !self.tree_fwd.is_ancestor(w, z).unwrap_or(false)
                {
                    self.c_fwd[w] += c as u64;
                }
            }
            for &(z, c) in self.graph.out(w) {
                if z != w
                    && self.tree_rev.reachable[z]
                    && !self.tree_rev.is_ancestor(w, z).unwrap_or(false)
                {
                    self.c_rev[w] += c as u64;
                }
            }
        }
    }

    /// Incremental two-pass counter update after a deletion that kept the
    /// component strongly connected. `old_fwd`/`old_rev` are the trees from
    /// before the deletion.
    fn incremental_counters(
        &mut self,
        old_fwd: &DominatorTree,
        old_rev: &DominatorTree,
        deleted: (Vertex, Vertex),
    ) {
        let (x, y) = deleted;
        // The deleted edge's own contribution disappears outright.
        if !old_fwd.is_ancestor(y, x).unwrap() {
            self.c_fwd[y] -= 1;
        }
        if !old_rev.is_ancestor(x, y).unwrap() {
            self.c_rev[x] -= 1;
        }
        let aff_fwd = self.fwd.last_affected.clone();
        let aff_rev = self.rev.last_affected.clone();
        self.two_pass(old_fwd, &aff_fwd, true);
        self.two_pass(old_rev, &aff_rev, false);
    }

    fn two_pass(&mut self, old: &DominatorTree, affected: &[Vertex], forward: bool) {
        if affected.is_empty() {
            return;
        }
        let new = if forward { self.fwd.tree() } else { self.rev.tree() };
        // S: affected vertices plus all their old descendants.
        let mut s_mark: HashSet<Vertex> = HashSet::new();
        for &a in affected {
            let mut stack = vec![a];
            while let Some(v) = stack.pop() {
                if s_mark.insert(v) {
                    stack.extend(old.children[v].iter().copied());
                }
            }
        }
        // Contributions of edges leaving S under the old tree vanish, those
        // under the new tree come back; vertices inside S are recomputed.
        for &z in &s_mark {
            let out: Vec<(Vertex, u32)> = if forward {
                self.graph.out(z).to_vec()
            } else {
                self.graph.inn(z).to_vec()
            };
            for (w, c) in out {
                if w == z || s_mark.contains(&w) {
                    continue;
                }
                let cnt = if forward { &mut self.c_fwd } else { &mut self.c_rev };
                if !old.is_ancestor(w, z).unwrap_or(true) {
                    cnt[w] -= c as u64;
                }
                if !new.is_ancestor(w, z).unwrap_or(true) {
                    cnt[w] += c as u64;
                }
            }
        }
        for &w in &s_mark {
            if !new.reachable[w] {
                let cnt = if forward { &mut self.c_fwd } else { &mut self.c_rev };
                cnt[w] = 0;
                continue;
            }
            let inn: Vec<(Vertex, u32)> = if forward {
                self.graph.inn(w).to_vec()
            } else {
                self.graph.out(w).to_vec()
            };
            let mut total = 0u64;
            for (z, c) in inn {
                if z != w && new.reachable[z] && !new.is_ancestor(w, z).unwrap() {
                    total += c as u64;
                }
            }
            let cnt = if forward { &mut self.c_fwd } else { &mut self.c_rev };
            cnt[w] = total;
        }
    }

    /// Recomputes the bridge set and the deepest-bridge pointers in O(scope).
    fn refresh_bridges_and_ell(&mut self) {
        self.bridges.clear();
        for &w in &self.scope {
            self.ell_fwd[w] = None;
            self.ell_rev[w] = None;
        }
        let mut order: Vec<Vertex> = self
            .scope
            .iter()
            .copied()
            .filter(|&w| self.tree_fwd.reachable[w])
            .collect();
        order.sort_by_key(|&w| self.tree_fwd.preorder[w]);
        for &w in &order {
            if let Some(p) = self.tree_fwd.parent[w] {
                if self.c_fwd[w] == 1 {
                    self.bridges.insert((p, w));
                    self.ell_fwd[w] = Some((p, w));
                } else {
                    self.ell_fwd[w] = self.ell_fwd[p];
                }
            }
        }
        let mut order: Vec<Vertex> = self
            .scope
            .iter()
            .copied()
            .filter(|&w| self.tree_rev.reachable[w])
            .collect();
        order.sort_by_key(|&w| self.tree_rev.preorder[w]);
        for &w in &order {
            if let Some(p) = self.tree_rev.parent[w] {
                if self.c_rev[w] == 1 {
                    // Reverse tree edge (p, w) is the real edge (w, p).
                    self.bridges.insert((w, p));
                    self.ell_rev[w] = Some((w, p));
                } else {
                    self.ell_rev[w] = self.ell_rev[p];
                }
            }
        }
    }

    /// Applies the deletion to both directions; the caller decides between
    /// incremental and full counter maintenance afterwards.
    fn apply_deletion(&mut self, x: Vertex, y: Vertex) -> Result<(), DomStateError> {
        self.fwd.delete_edge(x, y)?;
        self.rev.delete_edge(y, x)?;
        self.graph.remove_edge(x, y).expect("pair graph out of sync");
        Ok(())
    }

    pub fn verify_counters(&self) -> Result<(), String> {
        for &w in &self.scope {
            if !self.tree_fwd.reachable[w] {
                continue;
            }
            let mut want = 0u64;
            for &(z, c) in self.graph.inn(w) {
                if z != w && self.tree_fwd.reachable[z] && !self.tree_fwd.is_ancestor(w, z).unwrap()
                {
                    want += c as u64;
                }
            }
            if want != self.c_fwd[w] {
                return Err(format!("c({}) drifted: have {}, want {}", w + 1, self.c_fwd[w], want));
            }
            let mut want = 0u64;
            for &(z, c) in self.graph.out(w) {
                if z != w && self.tree_rev.reachable[z] && !self.tree_rev.is_ancestor(w, z).unwrap()
                {
                    want += c as u64;
                }
            }
            if want != self.c_rev[w] {
                return Err(format!("c_rev({}) drifted", w + 1));
            }
        }
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// All SCCs: partition maintenance, pair lifecycle, bridge lifetime.
// ---------------------------------------------------------------------------

/// Everything that changed in one host deletion.
#[derive(Debug, Default, Clone)]
pub struct BridgeEvents {
    pub births: Vec<(Vertex, Vertex)>,
    pub deaths: Vec<(Vertex, Vertex)>,
    pub scc_breaks: Vec<Break>,
}

pub struct BridgeTracker {
    pub g: Digraph,
    dec: crate::decomp::Decomposition,
    tracker_inst: crate::decomp::InstId,
    pub scc: Partition,
    /// Pair per SCC id (only components of two or more vertices).
    pairs: HashMap<u32, InOutPair>,
    rng: ChaCha8Rng,
    pub bridges: BTreeSet<(Vertex, Vertex)>,
    pub ever_bridges: BTreeSet<(Vertex, Vertex)>,
    retired: BTreeSet<(Vertex, Vertex)>,
}

impl BridgeTracker {
    pub fn new(g: &Digraph, rng: ChaCha8Rng) -> BridgeTracker {
        let scope: Vec<Vertex> = (0..g.n()).collect();
        let mut dec = crate::decomp::Decomposition::new();
        let tracker_inst = dec.build_instance(g, &scope, &scope);
        let mut scc = Partition::new(g.n());
        let mut roots: Vec<Vec<Vertex>> =
            dec.roots(tracker_inst).iter().map(|&r| dec.span(r)).collect();
        roots.sort();
        scc.init_classes(&roots);
        let mut t = BridgeTracker {
            g: g.clone(),
            dec,
            tracker_inst,
            scc,
            pairs: HashMap::new(),
            rng,
            bridges: BTreeSet::new(),
            ever_bridges: BTreeSet::new(),
            retired: BTreeSet::new(),
        };
        for id in t.scc.live_ids() {
            let members = t.scc.members(id);
            if members.len() >= 2 {
                let root = members[t.rng.gen_range(0..members.len())];
                let pair = InOutPair::new(&t.g, &members, root);
                t.pairs.insert(id, pair);
            }
        }
        t.sync_bridges(&mut BridgeEvents::default());
        t
    }

    fn sync_bridges(&mut self, ev: &mut BridgeEvents) {
        let mut now: BTreeSet<(Vertex, Vertex)> = BTreeSet::new();
        for pair in self.pairs.values() {
            now.extend(pair.bridges.iter().copied());
        }
        for &e in now.difference(&self.bridges) {
            debug_assert!(!self.retired.contains(&e), "bridge reborn after retirement");
            self.ever_bridges.insert(e);
            ev.births.push(e);
        }
        for &e in self.bridges.difference(&now) {
            self.retired.insert(e);
            ev.deaths.push(e);
        }
        ev.births.sort_unstable();
        ev.deaths.sort_unstable();
        self.bridges = now;
        debug_assert!(
            self.ever_bridges.len() <= 2 * self.g.n().saturating_sub(1),
            "strong bridge lifetime bound exceeded"
        );
    }

    /// Deletes `(x, y)` from the host graph, reorganizing pairs as SCCs
    /// break. Cross-component edges only touch the graph itself.
    pub fn delete_edge(&mut self, x: Vertex, y: Vertex) -> Result<BridgeEvents, EdgeFailureError> {
        if !self.g.has_edge(x, y) {
            return Err(EdgeFailureError::EdgeMissing(x + 1, y + 1));
        }
        let mut ev = BridgeEvents::default();
        let same_scc = x != y && self.scc.id[x] == self.scc.id[y];
        let old_id = self.scc.id[x];
        self.g.remove_edge(x, y).unwrap();
        let g2 = self.g.clone();
        if let Some(brk) = self.dec.delete_edge(&g2, self.tracker_inst, x, y) {
            let pieces: Vec<Vec<Vertex>> =
                brk.pieces.iter().map(|&p| self.dec.span(p)).collect();
            let b = split_partition(&mut self.scc, old_id, &pieces);
            ev.scc_breaks.push(b);
        }
        if !same_scc {
            self.sync_bridges(&mut ev);
            return Ok(ev);
        }

        // Apply the deletion to the component's pair.
        {
            let pair = self.pairs.get_mut(&old_id).expect("pair for a 2+ component");
            let old_fwd = pair.tree_fwd.clone();
            let old_rev = pair.tree_rev.clone();
            pair.apply_deletion(x, y)?;
            if ev.scc_breaks.is_empty() {
                pair.incremental_counters(&old_fwd, &old_rev, (x, y));
                pair.refresh_trees();
                pair.refresh_bridges_and_ell();
                self.sync_bridges(&mut ev);
                return Ok(ev);
            }
        }

        // The component broke: the root's fragment keeps its pair, pruned by
        // the cross-fragment edges; the rest get fresh pairs.
        let brk = ev.scc_breaks.last().unwrap().clone();
        let root = self.pairs[&old_id].root;
        let root_frag = self.scc.id[root];
        let mut fragment_ids: Vec<u32> = brk.fragments.iter().map(|(id, _)| *id).collect();
        for extra in [brk.largest, brk.old_id] {
            if !fragment_ids.contains(&extra) {
                fragment_ids.push(extra);
            }
        }
        fragment_ids.sort_unstable();

        let mut pair = self.pairs.remove(&old_id).unwrap();
        // Cross-fragment edges still inside the pair's graph get deleted;
        // scanning the non-root fragments finds every one of them.
        let mut cross: Vec<(Vertex, Vertex)> = Vec::new();
        for &fid in &fragment_ids {
            if fid == root_frag {
                continue;
            }
            for z in self.scc.members(fid) {
                for &(w, c) in pair.graph.out(z) {
                    if self.scc.id[w] != self.scc.id[z] {
                        for _ in 0..c {
                            cross.push((z, w));
                        }
                    }
                }
                for &(w, c) in pair.graph.inn(z) {
                    if self.scc.id[w] == root_frag {
                        for _ in 0..c {
                            cross.push((w, z));
                        }
                    }
                }
            }
        }
        cross.sort_unstable();
        for (a, b) in cross {
            pair.apply_deletion(a, b)?;
        }
        pair.scope = self.scc.members(root_frag);
        pair.refresh_trees();
        pair.recompute_counters();
        pair.refresh_bridges_and_ell();
        if pair.scope.len() >= 2 {
            self.pairs.insert(root_frag, pair);
        }
        for &fid in &fragment_ids {
            if fid == root_frag {
                continue;
            }
            let members = self.scc.members(fid);
            if members.len() >= 2 {
                let root = members[self.rng.gen_range(0..members.len())];
                let fresh = InOutPair::new(&self.g, &members, root);
                self.pairs.insert(fid, fresh);
            }
        }
        self.sync_bridges(&mut ev);
        Ok(ev)
    }

    pub fn pair_of(&self, v: Vertex) -> Option<&InOutPair> {
        self.pairs.get(&self.scc.id[v])
    }

    pub fn is_bridge(&self, x: Vertex, y: Vertex) -> bool {
        self.bridges.contains(&(x, y))
    }

    pub fn verify(&self) -> Result<(), String> {
        // Bridge set against the definitional oracle.
        let want = crate::oracle::oracle_strong_bridges(&self.g);
        if want != self.bridges {
            return Err(format!(
                "bridge set drifted: have {:?}, want {:?}",
                self.bridges, want
            ));
        }
        for pair in self.pairs.values() {
            pair.verify_counters()?;
            let want = crate::dom::static_dominators(&pair.graph, pair.root);
            if want.parent != pair.tree_fwd.parent {
                return Err("pair forward tree drifted".into());
            }
            let wantr = crate::dom::static_dominators(&pair.graph.reverse(), pair.root);
            if wantr.parent != pair.tree_rev.parent {
                return Err("pair reverse tree drifted".into());
            }
            // Deepest-bridge pointers against a root-to-leaf scan.
            for &w in &pair.scope {
                let mut expect = None;
                let mut chain = Vec::new();
                let mut cur = w;
                while let Some(p) = pair.tree_fwd.parent[cur] {
                    chain.push((p, cur));
                    cur = p;
                }
                for &(p, q) in chain.iter().rev() {
                    if pair.c_fwd[q] == 1 {
                        expect = Some((p, q));
                    }
                }
                if pair.ell_fwd[w] != expect {
                    return Err(format!("ell pointer of {} drifted", w + 1));
                }
            }
        }
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// Per-bridge partitions of G \ e.
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum PbKey {
    /// Component of `u` in `G \ e` (the unit of `u` in column `v`).
    Cu,
    /// Component of `v` in `G \ e` (the unit of `v` in column `u`).
    Cv,
    /// Any other component, identified by its column-`u` unit id.
    Col(u32),
}

/// Partition of the bridge's SCC in `G \ e`, keyed as in `PbKey`, with unit
/// count and size multiset for O(1) count/min/max queries.
#[derive(Debug, Clone)]
pub struct PerBridge {
    pub u: Vertex,
    pub v: Vertex,
    pub scc_id: u32,
    pub count: u32,
    sizes: BTreeMap<u32, u32>,
    size_of: HashMap<PbKey, u32>,
    cv_unit: u32,
    cu_unit: u32,
}

impl PerBridge {
    pub fn key_of(&self, joint: &Joint, w: Vertex) -> PbKey {
        if w == self.u {
            return PbKey::Cu;
        }
        if w == self.v {
            return PbKey::Cv;
        }
        let au = joint.unit(w, self.u).expect("w shares the bridge's component");
        if au == self.cv_unit {
            return PbKey::Cv;
        }
        if joint.unit(w, self.v).unwrap() == self.cu_unit {
            return PbKey::Cu;
        }
        PbKey::Col(au)
    }

    pub fn build(joint: &Joint, u: Vertex, v: Vertex) -> PerBridge {
        let scc_id = joint.scc_partition().id[u];
        debug_assert_eq!(scc_id, joint.scc_partition().id[v]);
        let mut pb = PerBridge {
            u,
            v,
            scc_id,
            count: 0,
            sizes: BTreeMap::new(),
            size_of: HashMap::new(),
            cv_unit: joint.unit(v, u).unwrap(),
            cu_unit: joint.unit(u, v).unwrap(),
        };
        let mut acc: HashMap<PbKey, u32> = HashMap::new();
        for w in joint.scc_partition().members(scc_id) {
            *acc.entry(pb.key_of(joint, w)).or_insert(0) += 1;
        }
        for (k, s) in acc {
            pb.size_of.insert(k, s);
            *pb.sizes.entry(s).or_insert(0) += 1;
            pb.count += 1;
        }
        pb
    }

    fn bump(&mut self, key: PbKey, new_size: u32) {
        let old = self.size_of.get(&key).copied().unwrap_or(0);
        if old > 0 {
            let e = self.sizes.get_mut(&old).unwrap();
            *e -= 1;
            if *e == 0 {
                self.sizes.remove(&old);
            }
            if new_size == 0 {
                self.count -= 1;
            }
        } else if new_size > 0 {
            self.count += 1;
        }
        if new_size > 0 {
            *self.sizes.entry(new_size).or_insert(0) += 1;
            self.size_of.insert(key, new_size);
        } else {
            self.size_of.remove(&key);
        }
    }

    /// Fragment lists of a break, including the unlisted largest piece.
    fn all_pieces(joint: &Joint, column: Vertex, b: &Break) -> Vec<(u32, Vec<Vertex>)> {
        let mut pieces: Vec<(u32, Vec<Vertex>)> = b.fragments.clone();
        if !pieces.iter().any(|(id, _)| *id == b.largest) {
            pieces.push((b.largest, joint.column_members(column, b.largest).unwrap()));
        }
        pieces
    }

    /// Feeds one break of column `u` or `v`. Returns the member lists of
    /// units newly split off `G \ e`'s partition (for downstream refinement).
    pub fn apply_column_break(
        &mut self,
        joint: &Joint,
        column: Vertex,
        b: &Break,
    ) -> Vec<Vec<Vertex>> {
        let mut out = Vec::new();
        if column == self.u {
            if b.old_id == self.cv_unit {
                // v's component split: pieces without v become their own
                // components of G minus e.
                let v_post = joint.unit(self.v, self.u).unwrap();
                let mut v_frag_size = self.size_of[&PbKey::Cv];
                for (id, members) in Self::all_pieces(joint, column, b) {
                    if id == v_post {
                        continue;
                    }
                    v_frag_size -= members.len() as u32;
                    self.bump(PbKey::Col(id), members.len() as u32);
                    out.push(members);
                }
                self.cv_unit = v_post;
                self.bump(PbKey::Cv, v_frag_size);
            } else if self.size_of.contains_key(&PbKey::Col(b.old_id)) {
                // An outside component split; identical in G \ e.
                let mut rem = self.size_of[&PbKey::Col(b.old_id)];
                for (id, members) in Self::all_pieces(joint, column, b) {
                    if id == b.old_id {
                        continue;
                    }
                    rem -= members.len() as u32;
                    self.bump(PbKey::Col(id), members.len() as u32);
                    out.push(members);
                }
                self.bump(PbKey::Col(b.old_id), rem);
            }
        } else if column == self.v && b.old_id == self.cu_unit {
            // u's component split; pieces without u leave as new components,
            // keyed by their column-u unit (one unit per piece).
            let u_post = joint.unit(self.u, self.v).unwrap();
            let mut u_frag_size = self.size_of[&PbKey::Cu];
            for (id, members) in Self::all_pieces(joint, column, b) {
                if id == u_post {
                    continue;
                }
                u_frag_size -= members.len() as u32;
                let rep = members[0];
                let key = PbKey::Col(joint.unit(rep, self.u).unwrap());
                self.bump(key, members.len() as u32);
                out.push(members);
            }
            self.cu_unit = u_post;
            self.bump(PbKey::Cu, u_frag_size);
        }
        out
    }

    pub fn min_max(&self) -> (u32, u32) {
        (
            *self.sizes.keys().next().unwrap(),
            *self.sizes.keys().next_back().unwrap(),
        )
    }

    /// All sizes ascending (for verification).
    pub fn all_sizes(&self) -> Vec<u32> {
        let mut out = Vec::new();
        for (&s, &k) in &self.sizes {
            for _ in 0..k {
                out.push(s);
            }
        }
        out
    }

    /// The partition of the bridge's component in `G \ e`, O(component).
    pub fn classes(&self, joint: &Joint) -> Vec<Vec<Vertex>> {
        let mut map: BTreeMap<PbKey, Vec<Vertex>> = BTreeMap::new();
        for w in joint.scc_partition().members(self.scc_id) {
            map.entry(self.key_of(joint, w)).or_default().push(w);
        }
        let mut out: Vec<Vec<Vertex>> = map.into_values().collect();
        for c in &mut out {
            c.sort_unstable();
        }
        out.sort();
        out
    }
}

// ---------------------------------------------------------------------------
// Derived graph for maximal 2-edge-connected subgraphs.
// ---------------------------------------------------------------------------

/// Maintains the residue of iteratively removing strong bridges (plus edges
/// that fall between components); its SCCs of size >= 2 are the maximal
/// 2-edge-connected subgraphs of the host graph.
pub struct TwoEcsState {
    pub tracker: BridgeTracker,
    pending: VecDeque<(Vertex, Vertex)>,
    enqueued: HashSet<(Vertex, Vertex)>,
}

impl TwoEcsState {
    pub fn new(g: &Digraph, rng: ChaCha8Rng) -> TwoEcsState {
        let tracker = BridgeTracker::new(g, rng);
        let mut st = TwoEcsState {
            tracker,
            pending: VecDeque::new(),
            enqueued: HashSet::new(),
        };
        // Seed: current bridges plus edges already between components.
        for e in st.tracker.bridges.clone() {
            st.enqueue(e);
        }
        for (a, b) in st.tracker.g.distinct_edges() {
            if a != b && st.tracker.scc.id[a] != st.tracker.scc.id[b] {
                st.enqueue((a, b));
            }
        }
        st.drain();
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
            while self.tracker.g.has_edge(a, b) {
                let ev = self.tracker.delete_edge(a, b).expect("queued edge present");
                self.absorb(&ev);
            }
        }
    }

    fn absorb(&mut self, ev: &BridgeEvents) {
        for &e in &ev.births {
            self.enqueue(e);
        }
        let mut found: Vec<(Vertex, Vertex)> = Vec::new();
        for brk in &ev.scc_breaks {
            // Scan the split-off fragments for edges now joining different
            // components; every cross edge has an endpoint in one of them.
            for (_, members) in &brk.fragments {
                for &z in members {
                    for &(w, _) in self.tracker.g.out(z) {
                        if w != z && self.tracker.scc.id[w] != self.tracker.scc.id[z] {
                            found.push((z, w));
                        }
                    }
                    for &(w, _) in self.tracker.g.inn(z) {
                        if w != z && self.tracker.scc.id[w] != self.tracker.scc.id[z] {
                            found.push((w, z));
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
        if self.tracker.g.has_edge(x, y) {
            let ev = self.tracker.delete_edge(x, y).expect("present");
            self.absorb(&ev);
            self.drain();
        }
    }

    /// The maximal 2-edge-connected subgraphs: residue SCCs of size >= 2.
    pub fn subgraphs(&self) -> Vec<Vec<Vertex>> {
        self.tracker
            .scc
            .classes()
            .into_iter()
            .filter(|c| c.len() >= 2)
            .collect()
    }
}

// ---------------------------------------------------------------------------
// 2-edge-connected components via refinement.
// ---------------------------------------------------------------------------

/// Labels such that two vertices share one iff no single edge deletion
/// separates them; labels only refine.
pub struct TwoEccState {
    pub label: Vec<u32>,
    next: u32,
}

impl TwoEccState {
    pub fn new(joint: &Joint, pbs: &BTreeMap<(Vertex, Vertex), PerBridge>) -> TwoEccState {
        let n = joint.graph().n();
        let mut st = TwoEccState { label: vec![0; n], next: 0 };
        let scc = joint.scc_partition();
        let mut map: HashMap<u32, u32> = HashMap::new();
        for v in 0..n {
            let id = scc.id[v];
            let next = &mut st.next;
            let l = *map.entry(id).or_insert_with(|| {
                let l = *next;
                *next += 1;
                l
            });
            st.label[v] = l;
        }
        for pb in pbs.values() {
            let members = joint.scc_partition().members(pb.scc_id);
            st.refine_members(&members, |w| pb.key_of(joint, w));
        }
        st
    }

    /// Splits every label class that straddles the key function.
    fn refine_members<K: Ord, F: Fn(Vertex) -> K>(&mut self, members: &[Vertex], key: F) {
        let mut groups: BTreeMap<(u32, K), Vec<Vertex>> = BTreeMap::new();
        for &w in members {
            groups.entry((self.label[w], key(w))).or_default().push(w);
        }
        let mut per_label: HashMap<u32, u32> = HashMap::new();
        for ((l, _), grp) in groups {
            let seen = per_label.entry(l).or_insert(0);
            *seen += 1;
            if *seen > 1 {
                // Later groups of a straddling label move to fresh labels.
                let nl = self.next;
                self.next += 1;
                for w in grp {
                    self.label[w] = nl;
                }
            }
        }
    }

    /// Handles the fragments reported by a per-bridge split.
    pub fn on_bridge_fragments(
        &mut self,
        joint: &Joint,
        pb: &PerBridge,
        fragments: &[Vec<Vertex>],
    ) {
        let members = joint.scc_partition().members(pb.scc_id);
        let mut straddles = false;
        'outer: for frag in fragments {
            let inside: HashSet<Vertex> = frag.iter().copied().collect();
            let labels: HashSet<u32> = frag.iter().map(|&w| self.label[w]).collect();
            for &z in &members {
                if labels.contains(&self.label[z]) && !inside.contains(&z) {
                    straddles = true;
                    break 'outer;
                }
            }
        }
        if straddles {
            self.refine_members(&members, |w| pb.key_of(joint, w));
        }
    }

    /// Handles SCC breaks of the graph itself.
    pub fn on_scc_break(&mut self, joint: &Joint, b: &Break) {
        let mut touched: Vec<Vertex> = Vec::new();
        for (_, members) in &b.fragments {
            touched.extend(members.iter().copied());
        }
        touched.extend(joint.scc_partition().members(b.largest));
        if b.largest != b.old_id {
            touched.extend(joint.scc_partition().members(b.old_id));
        }
        touched.sort_unstable();
        touched.dedup();
        let scc = joint.scc_partition();
        self.refine_members(&touched, |w| scc.id[w]);
    }

    pub fn classes(&self, n: usize) -> Vec<Vec<Vertex>> {
        crate::oracle::canonical_classes((0..n).map(|v| (v, self.label[v])))
    }
}

// ---------------------------------------------------------------------------
// Separator walks (used by both vertex- and edge-failure queries).
// ---------------------------------------------------------------------------

/// All vertices separating the strongly connected pair `(u, w)`, via the
/// component's dominator tree pair: the interiors of the tree paths down
/// from the nearest common ancestor are separators outright; the run above
/// the ancestor is probed top-down and stops at the first non-separator.
pub fn separating_vertices<F: Fn(Vertex) -> bool>(
    pair: &InOutPair,
    u: Vertex,
    w: Vertex,
    separates: F,
) -> Vec<Vertex> {
    let mut out: BTreeSet<Vertex> = BTreeSet::new();
    for tree in [&pair.tree_fwd, &pair.tree_rev] {
        let nca = tree.nca(u, w).expect("pair members are reachable");
        for leafward in [u, w] {
            let mut cur = leafward;
            while let Some(p) = tree.parent[cur] {
                if p == nca {
                    break;
                }
                out.insert(p);
                cur = p;
            }
            if tree.is_ancestor(nca, leafward) != Ok(true) {
                unreachable!("nca must be an ancestor");
            }
        }
        let mut cand = Some(nca);
        while let Some(c) = cand {
            if c != u && c != w {
                if separates(c) {
                    out.insert(c);
                } else {
                    break;
                }
            }
            cand = tree.parent[c];
        }
    }
    out.into_iter().collect()
}

/// All edges separating the strongly connected pair `(w, z)`, following the
/// deepest-bridge pointers of both trees.
pub fn separating_edges<F: Fn((Vertex, Vertex)) -> bool>(
    pair: &InOutPair,
    w: Vertex,
    z: Vertex,
    separates: F,
) -> Vec<(Vertex, Vertex)> {
    let mut out: BTreeSet<(Vertex, Vertex)> = BTreeSet::new();
    // Forward tree: a bridge (t, q) sits below the ancestor iff q is deeper.
    let tree = &pair.tree_fwd;
    let nca = tree.nca(w, z).expect("pair members are reachable");
    for leafward in [w, z] {
        let mut e = pair.ell_fwd[leafward];
        while let Some((t, q)) = e {
            if tree.depth[q] <= tree.depth[nca] {
                break;
            }
            out.insert((t, q));
            e = pair.ell_fwd[t];
        }
    }
    let mut e = pair.ell_fwd[nca];
    while let Some((t, q)) = e {
        if separates((t, q)) {
            out.insert((t, q));
            e = pair.ell_fwd[t];
        } else {
            break;
        }
    }
    // Reverse tree: pointers store real edges (q, t) with t the rev-parent.
    let tree = &pair.tree_rev;
    let nca = tree.nca(w, z).expect("pair members are reachable");
    for leafward in [w, z] {
        let mut e = pair.ell_rev[leafward];
        while let Some((q, t)) = e {
            if tree.depth[q] <= tree.depth[nca] {
                break;
            }
            out.insert((q, t));
            e = pair.ell_rev[t];
        }
    }
    let mut e = pair.ell_rev[nca];
    while let Some((q, t)) = e {
        if separates((q, t)) {
            out.insert((q, t));
            e = pair.ell_rev[t];
        } else {
            break;
        }
    }
    out.into_iter().collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle;
    use rand::SeedableRng;

    fn g(n: usize, edges: &[(usize, usize)]) -> Digraph {
        let mut g = Digraph::new(n);
        for &(u, v) in edges {
            g.add_edge(u, v);
        }
        g
    }

    fn rng() -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(12345)
    }

    #[test]
    fn c2_both_edges_are_bridges() {
        let t = BridgeTracker::new(&g(2, &[(0, 1), (1, 0)]), rng());
        assert_eq!(
            t.bridges.iter().copied().collect::<Vec<_>>(),
            vec![(0, 1), (1, 0)]
        );
        t.verify().unwrap();
    }

    #[test]
    fn bidirected_triangle_has_none() {
        let t = BridgeTracker::new(
            &g(3, &[(0, 1), (1, 0), (1, 2), (2, 1), (0, 2), (2, 0)]),
            rng(),
        );
        assert!(t.bridges.is_empty());
        t.verify().unwrap();
    }

    #[test]
    fn cycle_with_chord_bridges() {
        let t = BridgeTracker::new(&g(4, &[(0, 1), (1, 2), (2, 3), (3, 0), (1, 3)]), rng());
        assert_eq!(
            t.bridges.iter().copied().collect::<Vec<_>>(),
            vec![(0, 1), (1, 2), (2, 3), (3, 0)]
        );
        t.verify().unwrap();
    }

    #[test]
    fn deleting_a_bridge_splits_and_retires() {
        let mut t = BridgeTracker::new(&g(2, &[(0, 1), (1, 0)]), rng());
        let ev = t.delete_edge(0, 1).unwrap();
        assert_eq!(ev.scc_breaks.len(), 1);
        assert!(t.bridges.is_empty());
        assert_eq!(ev.deaths, vec![(0, 1), (1, 0)]);
        t.verify().unwrap();
    }

    #[test]
    fn random_sequences_bridge_set_matches_oracle() {
        let mut seed = 0x0bad_cafeu64;
        let mut xr = move || {
            seed ^= seed << 13;
            seed ^= seed >> 7;
            seed ^= seed << 17;
            seed
        };
        for trial in 0..15 {
            let n = 3 + (xr() % 5) as usize;
            let m = (xr() % 20) as usize;
            let mut graph = Digraph::new(n);
            for _ in 0..m {
                let u = (xr() % n as u64) as usize;
                let v = (xr() % n as u64) as usize;
                if u != v {
                    graph.add_edge(u, v);
                }
            }
            let mut t = BridgeTracker::new(&graph, ChaCha8Rng::seed_from_u64(trial));
            t.verify().unwrap();
            while graph.m() > 0 {
                let edges = graph.edges();
                let (u, v) = edges[(xr() % edges.len() as u64) as usize];
                t.delete_edge(u, v).unwrap();
                graph.remove_edge(u, v).unwrap();
                t.verify().map_err(|e| format!("trial {trial}: {e}")).unwrap();
            }
            assert!(t.ever_bridges.len() <= 2 * (n - 1));
        }
    }

    #[test]
    fn two_ecs_examples() {
        let tri = g(3, &[(0, 1), (1, 0), (1, 2), (2, 1), (0, 2), (2, 0)]);
        let st = TwoEcsState::new(&tri, rng());
        assert_eq!(st.subgraphs(), vec![vec![0, 1, 2]]);

        let c3 = g(3, &[(0, 1), (1, 2), (2, 0)]);
        let st = TwoEcsState::new(&c3, rng());
        assert!(st.subgraphs().is_empty());

        // Two bidirected triangles joined by a 2-cycle.
        let two = g(
            6,
            &[
                (0, 1), (1, 0), (1, 2), (2, 1), (0, 2), (2, 0),
                (3, 4), (4, 3), (4, 5), (5, 4), (3, 5), (5, 3),
                (2, 3), (3, 2),
            ],
        );
        let st = TwoEcsState::new(&two, rng());
        assert_eq!(st.subgraphs(), oracle::oracle_max_2ecs(&two));
    }

    #[test]
    fn two_ecs_random_decremental() {
        let mut seed = 0x7777_1111u64;
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
            let mut st = TwoEcsState::new(&graph, ChaCha8Rng::seed_from_u64(trial));
            assert_eq!(st.subgraphs(), oracle::oracle_max_2ecs(&graph), "init {trial}");
            while graph.m() > 0 {
                let edges = graph.edges();
                let (u, v) = edges[(xr() % edges.len() as u64) as usize];
                st.delete_edge(u, v);
                graph.remove_edge(u, v).unwrap();
                assert_eq!(st.subgraphs(), oracle::oracle_max_2ecs(&graph), "trial {trial}");
            }
        }
    }

    #[test]
    fn separating_walks_match_brute_force() {
        let c3 = g(3, &[(0, 1), (1, 2), (2, 0)]);
        let t = BridgeTracker::new(&c3, rng());
        let pair = t.pair_of(0).unwrap();
        let seps = separating_vertices(pair, 0, 2, |c| {
            !oracle::oracle_scc_without_vertex(&c3, c).same(0, 2)
        });
        assert_eq!(seps, vec![1]);
        let seps = separating_edges(pair, 0, 2, |(a, b)| {
            !oracle::oracle_scc_without_edge(&c3, a, b).same(0, 2)
        });
        assert_eq!(seps, vec![(0, 1), (1, 2), (2, 0)]);

        let tri = g(3, &[(0, 1), (1, 0), (1, 2), (2, 1), (0, 2), (2, 0)]);
        let t = BridgeTracker::new(&tri, rng());
        let pair = t.pair_of(0).unwrap();
        assert!(separating_vertices(pair, 0, 1, |c| {
            !oracle::oracle_scc_without_vertex(&tri, c).same(0, 1)
        })
        .is_empty());
        assert!(separating_edges(pair, 0, 1, |(a, b)| {
            !oracle::oracle_scc_without_edge(&tri, a, b).same(0, 1)
        })
        .is_empty());
    }
}
