//! A balanced family of SCC-decompositions answering, in O(1), whether two
//! vertices are strongly connected in `G \ {w}` for *any* `w`, while `G`
//! undergoes edge deletions.
//!
//! The vertex order is split recursively into halves (padded conceptually to
//! a power of two; all-padding branches collapse away). For every split, each
//! half's leftover SCCs get an extension decomposition whose internal
//! vertices come from the other half, and the two halves share the resulting
//! finer frontier. At the bottom, each vertex `w` roots a one-internal-node
//! decomposition of the whole graph whose leaves are exactly the SCCs of
//! `G \ {w}`; those leaves drive the id matrix `A`, the per-column member
//! lists, and the size multisets.
//!
//! Deletions descend the hierarchy: at the topmost level where both
//! endpoints still share a frontier set, the edge is visible in exactly that
//! set's extension tree; leaf splits propagate downward to every structure
//! sharing the broken set and finally into the id matrix.

use crate::decomp::{Decomposition, InstId, NodeId};
use crate::graph::{Digraph, Vertex};
use crate::oracle::canonical_classes;
use crate::scc::tarjan_scc_scoped;
use std::collections::{BTreeMap, HashMap};
use thiserror::Error;

pub const NO_ID: u32 = u32::MAX;
const NO_VERTEX: u32 = u32::MAX;

pub type FrontId = usize;
pub type SegId = usize;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum JointError {
    #[error("edge ({0}, {1}) not present")]
    EdgeMissing(usize, usize),
    #[error("query arguments must be distinct")]
    NotDistinct,
    #[error("vertex {0} outside this structure's scope")]
    OutOfScope(usize),
    #[error("unknown component id {0}")]
    UnknownId(u32),
}

// ---------------------------------------------------------------------------
// Partition: dense labeling plus intrusive member lists and a size multiset.
// ---------------------------------------------------------------------------

/// A labeling of a vertex subset into components with O(1) id lookup,
/// O(size) member reporting via linked lists, O(1) component count, and a
/// size multiset for min/max queries. Ids are never reused.
#[derive(Debug, Clone)]
pub struct Partition {
    pub id: Vec<u32>,
    next: Vec<u32>,
    prev: Vec<u32>,
    head: HashMap<u32, u32>,
    size: HashMap<u32, u32>,
    pub count: u32,
    multiset: BTreeMap<u32, u32>,
    next_id: u32,
    pub rewrites: u64,
}

impl Partition {
    pub fn new(n: usize) -> Self {
        Partition {
            id: vec![NO_ID; n],
            next: vec![NO_VERTEX; n],
            prev: vec![NO_VERTEX; n],
            head: HashMap::new(),
            size: HashMap::new(),
            count: 0,
            multiset: BTreeMap::new(),
            next_id: 0,
            rewrites: 0,
        }
    }

    pub fn init_classes(&mut self, classes: &[Vec<Vertex>]) {
        for class in classes {
            let id = self.next_id;
            self.next_id += 1;
            self.head.insert(id, NO_VERTEX);
            self.size.insert(id, 0);
            for &v in class {
                self.link(v, id);
            }
            self.count += 1;
            *self.multiset.entry(class.len() as u32).or_insert(0) += 1;
        }
    }

    fn link(&mut self, v: Vertex, id: u32) {
        self.id[v] = id;
        self.rewrites += 1;
        let h = self.head[&id];
        self.next[v] = h;
        self.prev[v] = NO_VERTEX;
        if h != NO_VERTEX {
            self.prev[h as usize] = v as u32;
        }
        self.head.insert(id, v as u32);
        *self.size.get_mut(&id).unwrap() += 1;
    }

    fn unlink(&mut self, v: Vertex) {
        let id = self.id[v];
        let (p, n) = (self.prev[v], self.next[v]);
        if p != NO_VERTEX {
            self.next[p as usize] = n;
        } else {
            self.head.insert(id, n);
        }
        if n != NO_VERTEX {
            self.prev[n as usize] = p;
        }
        *self.size.get_mut(&id).unwrap() -= 1;
    }

    fn bump_size(&mut self, from: u32, to: u32) {
        if from == to {
            return;
        }
        if from > 0 {
            let e = self.multiset.get_mut(&from).unwrap();
            *e -= 1;
            if *e == 0 {
                self.multiset.remove(&from);
            }
        }
        if to > 0 {
            *self.multiset.entry(to).or_insert(0) += 1;
        }
    }

    /// Splits `old` by moving each piece into a fresh id; the remainder
    /// keeps `old`. Returns the fresh ids aligned with `pieces`.
    pub fn split(&mut self, old: u32, pieces: &[Vec<Vertex>]) -> Vec<u32> {
        let before = self.size[&old];
        let mut ids = Vec::with_capacity(pieces.len());
        for piece in pieces {
            let id = self.next_id;
            self.next_id += 1;
            self.head.insert(id, NO_VERTEX);
            self.size.insert(id, 0);
            for &v in piece {
                debug_assert_eq!(self.id[v], old, "piece member not in the split set");
                self.unlink(v);
                self.link(v, id);
            }
            self.bump_size(0, piece.len() as u32);
            self.count += 1;
            ids.push(id);
        }
        let after = self.size[&old];
        debug_assert!(after > 0, "remainder of a split must be nonempty");
        self.bump_size(before, after);
        ids
    }

    pub fn members(&self, id: u32) -> Vec<Vertex> {
        let mut out = Vec::new();
        let mut v = *self.head.get(&id).unwrap_or(&NO_VERTEX);
        while v != NO_VERTEX {
            out.push(v as usize);
            v = self.next[v as usize];
        }
        out.sort_unstable();
        out
    }

    pub fn size_of(&self, id: u32) -> Option<u32> {
        self.size.get(&id).copied().filter(|&s| s > 0)
    }

    pub fn live_ids(&self) -> Vec<u32> {
        let mut ids: Vec<u32> = self
            .size
            .iter()
            .filter(|&(_, &s)| s > 0)
            .map(|(&id, _)| id)
            .collect();
        ids.sort_unstable();
        ids
    }

    pub fn min_size(&self) -> Option<u32> {
        self.multiset.keys().next().copied()
    }

    pub fn max_size(&self) -> Option<u32> {
        self.multiset.keys().next_back().copied()
    }

    /// Live sizes, ascending, with repetition.
    pub fn sizes(&self) -> Vec<u32> {
        let mut out = Vec::new();
        for (&s, &k) in &self.multiset {
            for _ in 0..k {
                out.push(s);
            }
        }
        out
    }

    pub fn classes(&self) -> Vec<Vec<Vertex>> {
        canonical_classes(
            self.id
                .iter()
                .enumerate()
                .filter(|&(_, &id)| id != NO_ID)
                .map(|(v, &id)| (v, id)),
        )
    }
}

// ---------------------------------------------------------------------------
// Events
// ---------------------------------------------------------------------------

/// One component split. `fragments` lists every fragment except the largest
/// (with its members); the largest fragment's id is in `largest`. The
/// remainder of the split keeps `old_id`, so `old_id` reappears either as
/// `largest` or among the fragments.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Break {
    pub old_id: u32,
    pub largest: u32,
    pub fragments: Vec<(u32, Vec<Vertex>)>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ColumnBreak {
    pub column: Vertex,
    pub b: Break,
}

/// Everything that changed during one edge deletion.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct DeletionReport {
    /// Splits of the graph's own SCC partition.
    pub scc_breaks: Vec<Break>,
    /// Splits of the `G \ {column}` partitions.
    pub column_breaks: Vec<ColumnBreak>,
}

// ---------------------------------------------------------------------------
// The joint structure
// ---------------------------------------------------------------------------

#[derive(Debug, Clone)]
enum Seg {
    Leaf { w: Vertex },
    Internal { left: SegId, right: SegId },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Appearance {
    /// External leaf of a decomposition tree homed at this object's level.
    Leaf(NodeId),
    /// Same vertex set one level down (the covering half-object coincides).
    Chain(FrontId),
    None,
}

#[derive(Debug, Clone)]
struct FrontObj {
    level: SegId,
    /// Extension forest instance this object's tree lives in, when the
    /// sibling half contributes internal vertices.
    ext: Option<InstId>,
    appear: [Appearance; 2],
    /// `(column, unit id)` when the object sits at a single-vertex level.
    unit: Option<(Vertex, u32)>,
    size: u32,
}

#[derive(Debug, Clone, Default)]
pub struct JointStats {
    pub nodes: u64,
    pub decompositions: u64,
    pub instances: u64,
    pub adjacency_scans: u64,
    pub vertex_moves: u64,
    pub max_moves_per_vertex: u32,
    pub a_rewrites: u64,
}

pub struct Joint {
    g: Digraph,
    scope: Vec<Vertex>,
    in_scope: Vec<bool>,
    order: Vec<Vertex>,
    seg: Vec<Seg>,
    top: SegId,
    dec: Decomposition,
    base_inst: Vec<Option<InstId>>,
    fronts: Vec<FrontObj>,
    /// Per segment node: vertex -> frontier object at that level.
    col: Vec<Vec<u32>>,
    /// Per column `w`: the partition of `G \ {w}` (the matrix `A` is the
    /// collection of its id arrays).
    cols: Vec<Option<Partition>>,
    /// The SCC partition of the current graph.
    scc: Partition,
    tracker_inst: InstId,
    base_count: u64,
    ext_pair_count: u64,
    chain_links: u64,
    report: DeletionReport,
}

impl Joint {
    /// Builds the structure over the subgraph induced by `scope`, splitting
    /// on `order` (a permutation of `scope`).
    pub fn build(g: Digraph, scope: Vec<Vertex>, order: Vec<Vertex>) -> Joint {
        assert_eq!(scope.len(), order.len());
        assert!(!scope.is_empty());
        let n = g.n();
        let mut in_scope = vec![false; n];
        for &v in &scope {
            in_scope[v] = true;
        }
        let mut j = Joint {
            g,
            scope,
            in_scope,
            order,
            seg: Vec::new(),
            top: 0,
            dec: Decomposition::new(),
            base_inst: vec![None; n],
            fronts: Vec::new(),
            col: Vec::new(),
            cols: (0..n).map(|_| None).collect(),
            scc: Partition::new(n),
            tracker_inst: 0,
            base_count: 0,
            ext_pair_count: 0,
            chain_links: 0,
            report: DeletionReport::default(),
        };
        let padded = j.order.len().next_power_of_two();
        j.top = j.build_seg(0, padded);
        j.col = vec![vec![NO_ID; n]; j.seg.len()];
        let g2 = j.g.clone();
        let phi_top = j.build_level(j.top, &g2);
        assert!(
            phi_top.is_empty(),
            "top-level frontier must be empty: every scope vertex is internal somewhere"
        );
        // Full decomposition tracking the SCC partition of the graph itself.
        let scope2 = j.scope.clone();
        let order2 = j.order.clone();
        j.chain_links = j
            .fronts
            .iter()
            .flat_map(|f| f.appear.iter())
            .filter(|a| matches!(a, Appearance::Chain(_)))
            .count() as u64;
        j.tracker_inst = j.dec.build_instance(&g2, &scope2, &order2);
        let mut roots: Vec<Vec<Vertex>> = j
            .dec
            .roots(j.tracker_inst)
            .iter()
            .map(|&r| j.dec.span(r))
            .collect();
        roots.sort();
        j.scc.init_classes(&roots);
        j
    }

    /// Segment hierarchy over positions `lo..hi` of the padded order; parts
    /// that fall entirely into the padding collapse away.
    fn build_seg(&mut self, lo: usize, hi: usize) -> SegId {
        let real_hi = hi.min(self.order.len());
        debug_assert!(lo < real_hi);
        if real_hi - lo == 1 {
            self.seg.push(Seg::Leaf { w: self.order[lo] });
            return self.seg.len() - 1;
        }
        let mid = lo + (hi - lo) / 2;
        if mid >= real_hi {
            return self.build_seg(lo, mid);
        }
        let left = self.build_seg(lo, mid);
        let right = self.build_seg(mid, hi);
        self.seg.push(Seg::Internal { left, right });
        self.seg.len() - 1
    }

    fn seg_vertices(&self, seg: SegId) -> Vec<Vertex> {
        match &self.seg[seg] {
            Seg::Leaf { w } => vec![*w],
            Seg::Internal { left, right } => {
                let mut v = self.seg_vertices(*left);
                v.extend(self.seg_vertices(*right));
                v
            }
        }
    }

    /// Builds one level bottom-up and returns its frontier objects with
    /// their member sets.
    fn build_level(&mut self, seg: SegId, g: &Digraph) -> Vec<(FrontId, Vec<Vertex>)> {
        match self.seg[seg].clone() {
            Seg::Leaf { w } => {
                let scope = self.scope.clone();
                let inst = self.dec.build_instance(g, &scope, &[w]);
                self.base_inst[w] = Some(inst);
                self.base_count += 1;
                // Units of column w: the external leaves of the base forest.
                let mut classes: Vec<(Vec<Vertex>, NodeId)> = Vec::new();
                for root in self.dec.roots(inst) {
                    if self.dec.is_internal(root) {
                        for child in self.dec.children_of(root) {
                            classes.push((self.dec.leaf_members(child), child));
                        }
                    } else {
                        classes.push((self.dec.leaf_members(root), root));
                    }
                }
                classes.sort();
                let mut part = Partition::new(g.n());
                part.init_classes(&classes.iter().map(|(m, _)| m.clone()).collect::<Vec<_>>());
                self.cols[w] = Some(part);
                let mut out = Vec::new();
                for (idx, (members, node)) in classes.into_iter().enumerate() {
                    let f = self.fronts.len();
                    self.fronts.push(FrontObj {
                        level: seg,
                        ext: None,
                        appear: [Appearance::Leaf(node), Appearance::None],
                        unit: Some((w, idx as u32)),
                        size: members.len() as u32,
                    });
                    for &x in &members {
                        self.col[seg][x] = f as u32;
                    }
                    out.push((f, members));
                }
                out
            }
            Seg::Internal { left, right } => {
                let phi_l = self.build_level(left, g);
                let phi_r = self.build_level(right, g);
                let s_left = self.seg_vertices(left);
                let s_right = self.seg_vertices(right);
                self.ext_pair_count += 1;

                // key (minimum member) -> contribution per side
                let mut merged: BTreeMap<Vertex, [Option<(Appearance, Vec<Vertex>)>; 2]> =
                    BTreeMap::new();
                for (side, (phi, others)) in
                    [(0usize, (&phi_l, &s_right)), (1usize, (&phi_r, &s_left))]
                {
                    let mut forest_scope: Vec<Vertex> = Vec::new();
                    let mut with_internals: Vec<FrontId> = Vec::new();
                    for &(f, ref members) in phi.iter() {
                        let has_internal =
                            others.iter().any(|w| members.binary_search(w).is_ok());
                        if has_internal {
                            forest_scope.extend(members.iter().copied());
                            with_internals.push(f);
                        } else {
                            // The set passes through unchanged: chain link.
                            merged.entry(members[0]).or_default()[side] =
                                Some((Appearance::Chain(f), members.clone()));
                        }
                    }
                    if !with_internals.is_empty() {
                        forest_scope.sort_unstable();
                        let internal_order: Vec<Vertex> = others
                            .iter()
                            .copied()
                            .filter(|w| forest_scope.binary_search(w).is_ok())
                            .collect();
                        let inst = self.dec.build_instance(g, &forest_scope, &internal_order);
                        self.dec.insts[inst].owner = Some(if side == 0 { left } else { right });
                        for f in &with_internals {
                            self.fronts[*f].ext = Some(inst);
                        }
                        // Each tree's external leaves feed the shared frontier.
                        for root in self.dec.roots(inst) {
                            for node in self.leaves_under(root) {
                                let members = self.dec.leaf_members(node);
                                let key = members[0];
                                merged.entry(key).or_default()[side] =
                                    Some((Appearance::Leaf(node), members));
                            }
                        }
                    }
                }

                let mut out = Vec::new();
                for (_, sides) in merged {
                    let [l, r] = sides;
                    let (al, ml) = l.expect("frontier set produced by only one half");
                    let (ar, mr) = r.expect("frontier set produced by only one half");
                    assert_eq!(ml, mr, "halves disagree on a shared frontier set");
                    let f = self.fronts.len();
                    self.fronts.push(FrontObj {
                        level: seg,
                        ext: None,
                        appear: [al, ar],
                        unit: None,
                        size: ml.len() as u32,
                    });
                    for &x in &ml {
                        self.col[seg][x] = f as u32;
                    }
                    out.push((f, ml));
                }
                out
            }
        }
    }

    fn leaves_under(&self, root: NodeId) -> Vec<NodeId> {
        let mut out = Vec::new();
        let mut stack = vec![root];
        while let Some(x) = stack.pop() {
            if self.dec.is_internal(x) {
                stack.extend(self.dec.children_of(x));
            } else {
                out.push(x);
            }
        }
        out.sort_unstable();
        out
    }

    // ----- deletion ---------------------------------------------------------

    /// Deletes one copy of `(u, v)` from the graph and updates every
    /// structure; the report lists all component splits.
    pub fn delete_edge(&mut self, u: Vertex, v: Vertex) -> Result<DeletionReport, JointError> {
        if u >= self.g.n() || v >= self.g.n() || !self.in_scope[u] || !self.in_scope[v] {
            return Err(JointError::OutOfScope(u.max(v) + 1));
        }
        self.g
            .remove_edge(u, v)
            .map_err(|_| JointError::EdgeMissing(u + 1, v + 1))?;
        self.report = DeletionReport::default();
        if u == v {
            return Ok(std::mem::take(&mut self.report));
        }
        let g = self.g.clone();
        // SCC partition of the graph itself.
        if let Some(brk) = self.dec.delete_edge(&g, self.tracker_inst, u, v) {
            let pieces: Vec<Vec<Vertex>> =
                brk.pieces.iter().map(|&p| self.dec.span(p)).collect();
            let old_id = self.scc.id[pieces[0][0]];
            let b = split_partition(&mut self.scc, old_id, &pieces);
            self.report.scc_breaks.push(b);
        }
        self.descend(self.top, u, v, &g);
        Ok(std::mem::take(&mut self.report))
    }

    fn descend(&mut self, seg: SegId, u: Vertex, v: Vertex, g: &Digraph) {
        match self.seg[seg].clone() {
            Seg::Leaf { w } => {
                let inst = self.base_inst[w].unwrap();
                // Root splits of a base forest do not change the units of
                // column w (the SCCs of G minus w are the leaves, and leaves
                // only move); unit changes arrive via leaf splits instead.
                let _ = self.dec.delete_edge(g, inst, u, v);
            }
            Seg::Internal { left, right } => {
                for child in [left, right] {
                    let (cu, cv) = (self.col[child][u], self.col[child][v]);
                    if cu != NO_ID && cu == cv {
                        let f = cu as FrontId;
                        let inst = self.fronts[f]
                            .ext
                            .expect("frontier object hit by a descent owns a tree");
                        if let Some(brk) = self.dec.delete_edge(g, inst, u, v) {
                            let pieces: Vec<(Vec<Vertex>, Option<InstId>)> = brk
                                .pieces
                                .iter()
                                .map(|&p| (self.dec.span(p), Some(inst)))
                                .collect();
                            let remainder =
                                self.remainder_if_reported(f, &pieces, self.dec.span(brk.kept));
                            self.split_front(f, &pieces, remainder, g);
                        }
                    } else {
                        self.descend(child, u, v, g);
                    }
                }
            }
        }
    }

    /// Members of the remainder, kept only when the remainder is not the
    /// largest part (the only case where it must be moved or reported).
    fn remainder_if_reported(
        &self,
        f: FrontId,
        pieces: &[(Vec<Vertex>, Option<InstId>)],
        kept_span: Vec<Vertex>,
    ) -> Option<Vec<Vertex>> {
        let piece_max = pieces.iter().map(|(p, _)| p.len() as u32).max().unwrap_or(0);
        let piece_total: u32 = pieces.iter().map(|(p, _)| p.len() as u32).sum();
        let rem = self.fronts[f].size - piece_total;
        debug_assert!(rem > 0);
        if rem >= piece_max {
            None
        } else {
            debug_assert_eq!(kept_span.len() as u32, rem);
            Some(kept_span)
        }
    }

    /// Splits the frontier object `f`: the pieces break off (the remainder
    /// keeps the object), every structure sharing the set is updated, and at
    /// single-vertex levels the column partition records the break.
    fn split_front(
        &mut self,
        f: FrontId,
        pieces: &[(Vec<Vertex>, Option<InstId>)],
        remainder: Option<Vec<Vertex>>,
        g: &Digraph,
    ) -> Vec<FrontId> {
        let level = self.fronts[f].level;
        let piece_total: u32 = pieces.iter().map(|(p, _)| p.len() as u32).sum();
        let piece_sizes: Vec<u32> = pieces.iter().map(|(p, _)| p.len() as u32).collect();
        let rem_size = self.fronts[f].size - piece_total;
        let rem_is_largest = rem_size >= piece_sizes.iter().copied().max().unwrap();
        debug_assert_eq!(remainder.is_some(), !rem_is_largest);

        // Piece objects.
        let mut piece_fids: Vec<FrontId> = Vec::with_capacity(pieces.len());
        for (span, ext) in pieces {
            let id = self.fronts.len();
            self.fronts.push(FrontObj {
                level,
                ext: *ext,
                appear: [Appearance::None, Appearance::None],
                unit: None,
                size: span.len() as u32,
            });
            for &x in span {
                self.col[level][x] = id as u32;
            }
            piece_fids.push(id);
        }
        self.fronts[f].size = rem_size;

        // Column bookkeeping at single-vertex levels.
        if let Seg::Leaf { w } = self.seg[level] {
            let (col_w, old_unit) = self.fronts[f].unit.expect("leaf-level object carries a unit");
            debug_assert_eq!(col_w, w);
            let part = self.cols[col_w].as_mut().unwrap();
            let spans: Vec<Vec<Vertex>> = pieces.iter().map(|(p, _)| p.clone()).collect();
            let ids = part.split(old_unit, &spans);
            for (i, &pid) in ids.iter().enumerate() {
                self.fronts[piece_fids[i]].unit = Some((col_w, pid));
            }
            let b = assemble_break(part, old_unit, &ids, &spans, remainder.clone());
            self.report.column_breaks.push(ColumnBreak { column: col_w, b });
        }

        // The largest part inherits the kept tree leaf; everything else is
        // physically moved.
        let largest_piece_idx = (0..pieces.len())
            .max_by_key(|&i| (piece_sizes[i], std::cmp::Reverse(pieces[i].0[0])))
            .unwrap();
        let mut moved: Vec<Vec<Vertex>> = Vec::new();
        // moved_map[i] = index into `moved` for piece i, or usize::MAX when
        // piece i is the largest part (keeps the old leaf).
        let mut moved_map: Vec<usize> = Vec::with_capacity(pieces.len());
        for (i, (span, _)) in pieces.iter().enumerate() {
            if !rem_is_largest && i == largest_piece_idx {
                moved_map.push(usize::MAX);
            } else {
                moved_map.push(moved.len());
                moved.push(span.clone());
            }
        }
        let rem_moved_idx = if rem_is_largest {
            usize::MAX
        } else {
            moved.push(remainder.clone().unwrap());
            moved.len() - 1
        };

        // Update both appearances.
        let old_appear = self.fronts[f].appear;
        for (side, ap) in old_appear.into_iter().enumerate() {
            match ap {
                Appearance::None => {}
                Appearance::Chain(child) => {
                    let child_pieces: Vec<(Vec<Vertex>, Option<InstId>)> =
                        pieces.iter().map(|(p, _)| (p.clone(), None)).collect();
                    let child_fids =
                        self.split_front(child, &child_pieces, remainder.clone(), g);
                    self.chain_links += child_fids.len() as u64;
                    for (i, &cf) in child_fids.iter().enumerate() {
                        self.fronts[piece_fids[i]].appear[side] = Appearance::Chain(cf);
                    }
                    // f keeps Chain(child): the child object is its own
                    // remainder.
                }
                Appearance::Leaf(node) => {
                    let (part_nodes, brk) = self.dec.replace_leaf(g, node, &moved);
                    for (i, &pf) in piece_fids.iter().enumerate() {
                        self.fronts[pf].appear[side] = if moved_map[i] == usize::MAX {
                            Appearance::Leaf(node)
                        } else {
                            Appearance::Leaf(part_nodes[moved_map[i]])
                        };
                    }
                    if !rem_is_largest {
                        self.fronts[f].appear[side] =
                            Appearance::Leaf(part_nodes[rem_moved_idx]);
                    }
                    if let Some(brk) = brk {
                        let inst = self.dec.inst_of(node);
                        if let Some(owner_level) = self.dec.insts[inst].owner {
                            // The host tree's own component broke: split its
                            // owner object one level down.
                            let any = self.dec.span(brk.pieces[0])[0];
                            let owner = self.col[owner_level][any] as FrontId;
                            let owner_pieces: Vec<(Vec<Vertex>, Option<InstId>)> = brk
                                .pieces
                                .iter()
                                .map(|&p| (self.dec.span(p), Some(inst)))
                                .collect();
                            let owner_rem = self.remainder_if_reported(
                                owner,
                                &owner_pieces,
                                self.dec.span(brk.kept),
                            );
                            self.split_front(owner, &owner_pieces, owner_rem, g);
                        }
                    }
                }
            }
        }
        piece_fids
    }

    // ----- queries ----------------------------------------------------------

    pub fn graph(&self) -> &Digraph {
        &self.g
    }

    pub fn scope(&self) -> &[Vertex] {
        &self.scope
    }

    pub fn in_scope(&self, v: Vertex) -> bool {
        v < self.in_scope.len() && self.in_scope[v]
    }

    /// Id of the SCC of `G \ {w}` containing `u` (the matrix entry `A[u,w]`).
    pub fn unit(&self, u: Vertex, w: Vertex) -> Option<u32> {
        if u == w || !self.in_scope(u) || !self.in_scope(w) {
            return None;
        }
        let id = self.cols[w].as_ref()?.id[u];
        (id != NO_ID).then_some(id)
    }

    /// Are `u` and `v` strongly connected in `G \ {w}`?
    pub fn same_without(&self, u: Vertex, v: Vertex, w: Vertex) -> Result<bool, JointError> {
        if u == v || u == w || v == w {
            return Err(JointError::NotDistinct);
        }
        for x in [u, v, w] {
            if !self.in_scope(x) {
                return Err(JointError::OutOfScope(x + 1));
            }
        }
        let part = self.cols[w].as_ref().unwrap();
        Ok(part.id[u] == part.id[v])
    }

    pub fn column(&self, w: Vertex) -> Option<&Partition> {
        self.cols.get(w).and_then(|c| c.as_ref())
    }

    /// Members of one SCC of `G \ {w}`, in time proportional to its size.
    pub fn column_members(&self, w: Vertex, id: u32) -> Result<Vec<Vertex>, JointError> {
        let part = self
            .cols
            .get(w)
            .and_then(|c| c.as_ref())
            .ok_or(JointError::OutOfScope(w + 1))?;
        if part.size_of(id).is_none() {
            return Err(JointError::UnknownId(id));
        }
        Ok(part.members(id))
    }

    /// The SCC partition of the current graph.
    pub fn scc_partition(&self) -> &Partition {
        &self.scc
    }

    pub fn stats(&self) -> JointStats {
        let mut internal = 0u64;
        let mut instances = 0u64;
        for (i, inst) in self.dec.insts.iter().enumerate() {
            if i != self.tracker_inst {
                internal += inst.internal_count;
                instances += 1;
            }
        }
        // External sets are shared between trees and across levels (chained
        // same-set objects coincide), so each distinct set counts once.
        let distinct_external = self.fronts.len() as u64 - self.chain_links;
        JointStats {
            nodes: internal + distinct_external,
            // Collection view: one decomposition per start vertex plus one
            // shared extension per split level.
            decompositions: self.base_count + self.ext_pair_count,
            instances,
            adjacency_scans: self.dec.stats.adjacency_scans,
            vertex_moves: self.dec.stats.vertex_moves,
            max_moves_per_vertex: self
                .dec
                .stats
                .moves_per
                .values()
                .copied()
                .max()
                .unwrap_or(0),
            a_rewrites: self.cols.iter().flatten().map(|p| p.rewrites).sum(),
        }
    }

    /// Statistics dump as `key=value` lines.
    pub fn stats_dump(&self) -> String {
        let s = self.stats();
        format!(
            "nodes={}\ndecompositions={}\ninstances={}\nadjacency_scans={}\nvertex_moves={}\nmax_moves_per_vertex={}\na_rewrites={}\n",
            s.nodes,
            s.decompositions,
            s.instances,
            s.adjacency_scans,
            s.vertex_moves,
            s.max_moves_per_vertex,
            s.a_rewrites
        )
    }

    /// Full cross-check of every column and the SCC partition against
    /// recomputation, plus the structural invariants of every instance.
    pub fn verify(&self) -> Result<(), String> {
        for &w in &self.scope {
            let part = self.cols[w].as_ref().unwrap();
            let have = part.classes();
            let lab = tarjan_scc_scoped(&self.g, &self.scope, Some(w));
            let want = canonical_classes(
                self.scope
                    .iter()
                    .filter(|&&u| u != w)
                    .map(|&u| (u, lab.component_id[u] as u32)),
            );
            if have != want {
                return Err(format!("column {} disagrees with recomputation", w + 1));
            }
            if part.count as usize != want.len() {
                return Err(format!("column {} count drifted", w + 1));
            }
            let mut sizes: Vec<u32> = want.iter().map(|c| c.len() as u32).collect();
            sizes.sort_unstable();
            if part.sizes() != sizes {
                return Err(format!("column {} size multiset drifted", w + 1));
            }
        }
        let lab = tarjan_scc_scoped(&self.g, &self.scope, None);
        let want =
            canonical_classes(self.scope.iter().map(|&u| (u, lab.component_id[u] as u32)));
        if self.scc.classes() != want {
            return Err("scc partition disagrees with recomputation".into());
        }
        for inst in 0..self.dec.insts.len() {
            self.dec.verify_instance(&self.g, inst)?;
        }
        // Frontier partitions per level.
        for (seg, col) in self.col.iter().enumerate() {
            let removed: std::collections::HashSet<Vertex> =
                self.seg_vertices(seg).into_iter().collect();
            let keep: Vec<Vertex> = self
                .scope
                .iter()
                .copied()
                .filter(|v| !removed.contains(v))
                .collect();
            let lab = tarjan_scc_scoped(&self.g, &keep, None);
            let want =
                canonical_classes(keep.iter().map(|&u| (u, lab.component_id[u] as u32)));
            let have = canonical_classes(
                col.iter()
                    .enumerate()
                    .filter(|&(u, &f)| {
                        f != NO_ID && self.in_scope(u) && !removed.contains(&u)
                    })
                    .map(|(u, &f)| (u, f)),
            );
            if have != want {
                return Err(format!("frontier partition at level {seg} drifted"));
            }
        }
        Ok(())
    }
}

/// Applies a split to a partition and assembles the break report; the
/// remainder keeps `old_id`.
pub fn split_partition(part: &mut Partition, old_id: u32, pieces: &[Vec<Vertex>]) -> Break {
    let ids = part.split(old_id, pieces);
    let remainder = {
        let rem_size = part.size_of(old_id).unwrap();
        let max_piece = pieces.iter().map(|p| p.len() as u32).max().unwrap();
        if rem_size >= max_piece {
            None
        } else {
            Some(part.members(old_id))
        }
    };
    assemble_break(part, old_id, &ids, pieces, remainder)
}

fn assemble_break(
    part: &Partition,
    old_id: u32,
    piece_ids: &[u32],
    spans: &[Vec<Vertex>],
    remainder: Option<Vec<Vertex>>,
) -> Break {
    let rem_size = part.size_of(old_id).unwrap();
    let max_piece = spans.iter().map(|p| p.len() as u32).max().unwrap();
    let mut fragments: Vec<(u32, Vec<Vertex>)> = Vec::new();
    if rem_size >= max_piece {
        for (i, span) in spans.iter().enumerate() {
            fragments.push((piece_ids[i], span.clone()));
        }
        Break { old_id, largest: old_id, fragments }
    } else {
        let largest_idx = (0..spans.len())
            .max_by_key(|&i| (spans[i].len(), std::cmp::Reverse(spans[i][0])))
            .unwrap();
        for (i, span) in spans.iter().enumerate() {
            if i != largest_idx {
                fragments.push((piece_ids[i], span.clone()));
            }
        }
        let rem = remainder.expect("non-largest remainder must be enumerated");
        debug_assert_eq!(rem.len() as u32, rem_size);
        fragments.push((old_id, rem));
        Break { old_id, largest: piece_ids[largest_idx], fragments }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::oracle_scc_without_vertex;

    fn g(n: usize, edges: &[(usize, usize)]) -> Digraph {
        let mut g = Digraph::new(n);
        for &(u, v) in edges {
            g.add_edge(u, v);
        }
        g
    }

    fn build(graph: &Digraph) -> Joint {
        let scope: Vec<Vertex> = (0..graph.n()).collect();
        Joint::build(graph.clone(), scope.clone(), scope)
    }

    fn check_columns(j: &Joint, graph: &Digraph) {
        let n = graph.n();
        for w in 0..n {
            let lab = oracle_scc_without_vertex(graph, w);
            let want = canonical_classes(
                (0..n).filter(|&u| u != w).map(|u| (u, lab.component_id[u] as u32)),
            );
            let have = j.column(w).unwrap().classes();
            assert_eq!(have, want, "column {w} wrong");
        }
    }

    #[test]
    fn build_c2() {
        let graph = g(2, &[(0, 1), (1, 0)]);
        let j = build(&graph);
        j.verify().unwrap();
        assert_eq!(j.unit(1, 0), Some(0));
        assert_eq!(j.unit(0, 1), Some(0));
        check_columns(&j, &graph);
    }

    #[test]
    fn build_single_vertex() {
        let graph = g(1, &[]);
        let j = build(&graph);
        j.verify().unwrap();
        assert_eq!(j.unit(0, 0), None);
    }

    #[test]
    fn c3_delete_all() {
        let mut graph = g(3, &[(0, 1), (1, 2), (2, 0)]);
        let mut j = build(&graph);
        j.verify().unwrap();
        check_columns(&j, &graph);
        for (u, v) in [(2, 0), (0, 1), (1, 2)] {
            j.delete_edge(u, v).unwrap();
            graph.remove_edge(u, v).unwrap();
            j.verify().unwrap();
            check_columns(&j, &graph);
        }
    }

    #[test]
    fn chord_deletion_keeps_graph_strongly_connected() {
        let mut graph = g(4, &[(0, 1), (1, 2), (2, 3), (3, 0), (1, 3)]);
        let mut j = build(&graph);
        let rep = j.delete_edge(1, 3).unwrap();
        graph.remove_edge(1, 3).unwrap();
        // The cycle survives, so the SCC partition of G is untouched; the
        // G-minus-one-vertex columns still shift (the chord was load-bearing
        // for the cycle 1->2->4->1 once 3 is removed) and must match the
        // recomputation.
        assert!(rep.scc_breaks.is_empty());
        check_columns(&j, &graph);
        j.verify().unwrap();
    }

    #[test]
    fn query_examples() {
        // 1->2->3->4->1 with chord 2->4 (0-based).
        let graph = g(4, &[(0, 1), (1, 2), (2, 3), (3, 0), (1, 3)]);
        let j = build(&graph);
        // Removing vertex 3 (0-based 2) leaves the cycle 1->2->4->1.
        assert_eq!(j.same_without(0, 3, 2), Ok(true));
        // C3: removing the middle of the only path separates.
        let c3 = build(&g(3, &[(0, 1), (1, 2), (2, 0)]));
        assert_eq!(c3.same_without(0, 2, 1), Ok(false));
        assert_eq!(c3.same_without(0, 0, 1), Err(JointError::NotDistinct));
    }

    #[test]
    fn deleting_missing_edge_fails() {
        let mut j = build(&g(2, &[(0, 1)]));
        assert_eq!(j.delete_edge(1, 0).unwrap_err(), JointError::EdgeMissing(2, 1));
    }

    #[test]
    fn exhaustive_n3_all_graphs_all_orders() {
        // All 64 labeled digraphs on 3 vertices, all edge deletion orders;
        // after every deletion every column must match recomputation.
        let pairs: Vec<(usize, usize)> = (0..3)
            .flat_map(|u| (0..3).map(move |v| (u, v)))
            .filter(|&(u, v)| u != v)
            .collect();
        for mask in 0u32..64 {
            let edges: Vec<(usize, usize)> = pairs
                .iter()
                .enumerate()
                .filter(|&(i, _)| mask >> i & 1 == 1)
                .map(|(_, &e)| e)
                .collect();
            let base = g(3, &edges);
            let mut orders: Vec<Vec<usize>> = vec![vec![]];
            for _ in 0..edges.len() {
                let mut next = Vec::new();
                for o in &orders {
                    for i in 0..edges.len() {
                        if !o.contains(&i) {
                            let mut o2 = o.clone();
                            o2.push(i);
                            next.push(o2);
                        }
                    }
                }
                orders = next;
            }
            for order in orders {
                let mut graph = base.clone();
                let mut j = build(&graph);
                check_columns(&j, &graph);
                for &i in &order {
                    let (u, v) = edges[i];
                    j.delete_edge(u, v).unwrap();
                    graph.remove_edge(u, v).unwrap();
                    check_columns(&j, &graph);
                }
            }
        }
    }

    #[test]
    fn random_sequences_with_full_verify() {
        let mut seed = 0x51aa_f00du64;
        let mut rng = move || {
            seed ^= seed << 13;
            seed ^= seed >> 7;
            seed ^= seed << 17;
            seed
        };
        for _ in 0..25 {
            let n = 4 + (rng() % 4) as usize;
            let m = (rng() % 22) as usize;
            let mut graph = Digraph::new(n);
            for _ in 0..m {
                let u = (rng() % n as u64) as usize;
                let v = (rng() % n as u64) as usize;
                if u != v {
                    graph.add_edge(u, v);
                }
            }
            let mut j = build(&graph);
            j.verify().unwrap();
            while graph.m() > 0 {
                let edges = graph.edges();
                let (u, v) = edges[(rng() % edges.len() as u64) as usize];
                j.delete_edge(u, v).unwrap();
                graph.remove_edge(u, v).unwrap();
                j.verify().unwrap();
                check_columns(&j, &graph);
            }
        }
    }
}
