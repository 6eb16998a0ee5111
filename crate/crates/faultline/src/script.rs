//! Batch driver: deletion/query scripts over a graph, three execution modes
//! (maintained structures, naive recomputation, reducible-specialized), the
//! oracle verification wiring, and the benchmark harness.

use crate::dominators::DomState;
use crate::edge_failure::{
    separating_edges, separating_vertices, BridgeTracker, PerBridge, TwoEccState, TwoEcsState,
};
use crate::graph::{Digraph, Vertex};
use crate::joint::Joint;
use crate::naive::NaiveState;
use crate::oracle::{self, OracleReport};
use crate::reducible::ReducibleState;
use crate::vertex_failure::{TwoVcsState, VrcState};
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeMap;
use std::fmt::Write as _;
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Joint,
    Naive,
    Reducible,
}

impl std::str::FromStr for Mode {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "joint" => Ok(Mode::Joint),
            "naive" => Ok(Mode::Naive),
            "reducible" => Ok(Mode::Reducible),
            other => Err(format!("unknown mode {other:?}")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Cmd {
    Del(Vertex, Vertex),
    QConn(Vertex, Vertex, Vertex),
    QNscc(Vertex),
    QSizes(Vertex),
    QReport(Vertex),
    QSeps(Vertex, Vertex),
    Dom(Vertex, Vertex),
    Parent(Vertex),
    Bridges,
    QConnE(Vertex, Vertex, Vertex, Vertex),
    QNsccE(Vertex, Vertex),
    QSizesE(Vertex, Vertex),
    QReportE(Vertex, Vertex),
    QSepsE(Vertex, Vertex),
    Vrc,
    TwoVcs,
    TwoEcc,
    TwoEcs,
}

#[derive(Debug, Clone)]
pub struct Script {
    pub source: Option<Vertex>,
    pub cmds: Vec<(usize, Cmd)>,
}

#[derive(Debug, Error)]
pub enum RunError {
    #[error("line {0}: {1}")]
    Parse(usize, String),
    #[error("line {0}: {1}")]
    Command(usize, String),
    #[error("{0}")]
    Usage(String),
    #[error("verification failed after {0} steps")]
    Verification(usize),
}

impl RunError {
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Usage(_) => 1,
            RunError::Parse(..) | RunError::Command(..) => 2,
            RunError::Verification(_) => 3,
        }
    }
}

/// Parses the line-oriented script format; `source s` may appear once at the
/// top and selects the flow-graph root.
pub fn parse_script(text: &str, n: usize) -> Result<Script, RunError> {
    let mut script = Script { source: None, cmds: Vec::new() };
    let vx = |tok: Option<&str>, line: usize| -> Result<Vertex, RunError> {
        let t = tok.ok_or_else(|| RunError::Parse(line, "missing vertex argument".into()))?;
        let v: usize = t
            .parse()
            .map_err(|_| RunError::Parse(line, format!("bad vertex {t:?}")))?;
        if v == 0 || v > n {
            return Err(RunError::Parse(line, format!("vertex {v} out of range 1..={n}")));
        }
        Ok(v - 1)
    };
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let t = raw.trim();
        if t.is_empty() || t.starts_with('#') {
            continue;
        }
        let mut it = t.split_whitespace();
        let head = it.next().unwrap();
        let cmd = match head {
            "source" => {
                if script.source.is_some() || !script.cmds.is_empty() {
                    return Err(RunError::Parse(line, "source line must come first".into()));
                }
                script.source = Some(vx(it.next(), line)?);
                None
            }
            "del" => Some(Cmd::Del(vx(it.next(), line)?, vx(it.next(), line)?)),
            "q-conn" => Some(Cmd::QConn(vx(it.next(), line)?, vx(it.next(), line)?, vx(it.next(), line)?)),
            "q-nscc" => Some(Cmd::QNscc(vx(it.next(), line)?)),
            "q-sizes" => Some(Cmd::QSizes(vx(it.next(), line)?)),
            "q-report" => Some(Cmd::QReport(vx(it.next(), line)?)),
            "q-seps" => Some(Cmd::QSeps(vx(it.next(), line)?, vx(it.next(), line)?)),
            "dom" => Some(Cmd::Dom(vx(it.next(), line)?, vx(it.next(), line)?)),
            "parent" => Some(Cmd::Parent(vx(it.next(), line)?)),
            "bridges" => Some(Cmd::Bridges),
            "q-conn-e" => Some(Cmd::QConnE(
                vx(it.next(), line)?,
                vx(it.next(), line)?,
                vx(it.next(), line)?,
                vx(it.next(), line)?,
            )),
            "q-nscc-e" => Some(Cmd::QNsccE(vx(it.next(), line)?, vx(it.next(), line)?)),
            "q-sizes-e" => Some(Cmd::QSizesE(vx(it.next(), line)?, vx(it.next(), line)?)),
            "q-report-e" => Some(Cmd::QReportE(vx(it.next(), line)?, vx(it.next(), line)?)),
            "q-seps-e" => Some(Cmd::QSepsE(vx(it.next(), line)?, vx(it.next(), line)?)),
            "vrc" => Some(Cmd::Vrc),
            "2vcs" => Some(Cmd::TwoVcs),
            "2ecc" => Some(Cmd::TwoEcc),
            "2ecs" => Some(Cmd::TwoEcs),
            other => return Err(RunError::Parse(line, format!("unknown command {other:?}"))),
        };
        if let Some(c) = cmd {
            if it.next().is_some() {
                return Err(RunError::Parse(line, "trailing tokens".into()));
            }
            script.cmds.push((line, c));
        }
    }
    Ok(script)
}

// ----- output formatting ----------------------------------------------------

pub fn fmt_bool(b: bool) -> String {
    if b { "true".into() } else { "false".into() }
}

pub fn fmt_vertex_set(vs: &[Vertex]) -> String {
    vs.iter().map(|v| (v + 1).to_string()).collect::<Vec<_>>().join(",")
}

pub fn fmt_edge_set(es: &[(Vertex, Vertex)]) -> String {
    es.iter()
        .map(|(u, v)| format!("{} {}", u + 1, v + 1))
        .collect::<Vec<_>>()
        .join(",")
}

/// One component per line, components sorted by minimum member.
pub fn fmt_partition(classes: &[Vec<Vertex>]) -> String {
    classes.iter().map(|c| fmt_vertex_set(c)).collect::<Vec<_>>().join("\n")
}

// ----- maintained-structure engine -------------------------------------------

/// Which subsystems a script needs (derived stacks are costly to build).
#[derive(Debug, Clone, Copy, Default)]
pub struct Needs {
    pub dominators: bool,
    pub edge_failure: bool,
    pub vrc: bool,
    pub two_vcs: bool,
    pub two_ecc: bool,
    pub two_ecs: bool,
}

impl Needs {
    pub fn all() -> Needs {
        Needs {
            dominators: true,
            edge_failure: true,
            vrc: true,
            two_vcs: true,
            two_ecc: true,
            two_ecs: true,
        }
    }

    pub fn of_script(script: &Script) -> Needs {
        let mut n = Needs::default();
        for (_, c) in &script.cmds {
            match c {
                Cmd::Dom(..) | Cmd::Parent(_) => n.dominators = true,
                Cmd::QSeps(..)
                | Cmd::Bridges
                | Cmd::QConnE(..)
                | Cmd::QNsccE(..)
                | Cmd::QSizesE(..)
                | Cmd::QReportE(..)
                | Cmd::QSepsE(..) => n.edge_failure = true,
                Cmd::Vrc => n.vrc = true,
                Cmd::TwoVcs => n.two_vcs = true,
                Cmd::TwoEcc => {
                    n.two_ecc = true;
                    n.edge_failure = true;
                }
                Cmd::TwoEcs => n.two_ecs = true,
                _ => {}
            }
        }
        n
    }
}

/// The full maintained stack over one graph.
pub struct Engine {
    pub joint: Joint,
    pub dom: Option<DomState>,
    pub tracker: Option<BridgeTracker>,
    pub pbs: BTreeMap<(Vertex, Vertex), PerBridge>,
    pub vrc: Option<VrcState>,
    pub vcs: Option<TwoVcsState>,
    pub ecc: Option<TwoEccState>,
    pub ecs: Option<TwoEcsState>,
    pub source: Vertex,
}

impl Engine {
    pub fn new(g: &Digraph, source: Vertex, order: Vec<Vertex>, rng: ChaCha8Rng, needs: Needs) -> Engine {
        let scope: Vec<Vertex> = (0..g.n()).collect();
        let joint = Joint::build(g.clone(), scope.clone(), order.clone());
        let dom = needs
            .dominators
            .then(|| DomState::new(g, &scope, &order, source));
        let tracker = needs.edge_failure.then(|| BridgeTracker::new(g, rng.clone()));
        let mut pbs = BTreeMap::new();
        if let Some(t) = &tracker {
            for &(u, v) in &t.bridges {
                pbs.insert((u, v), PerBridge::build(&joint, u, v));
            }
        }
        let vrc = needs.vrc.then(|| VrcState::new(&joint));
        let vcs = needs.two_vcs.then(|| TwoVcsState::new(g));
        let ecc = needs.two_ecc.then(|| TwoEccState::new(&joint, &pbs));
        let ecs = needs.two_ecs.then(|| TwoEcsState::new(g, rng));
        Engine { joint, dom, tracker, pbs, vrc, vcs, ecc, ecs, source }
    }

    pub fn graph(&self) -> &Digraph {
        self.joint.graph()
    }

    pub fn delete_edge(&mut self, x: Vertex, y: Vertex) -> Result<(), String> {
        if !self.graph().has_edge(x, y) {
            return Err(format!("edge ({}, {}) not present", x + 1, y + 1));
        }
        let report = self.joint.delete_edge(x, y).map_err(|e| e.to_string())?;
        if let Some(dom) = self.dom.as_mut() {
            dom.delete_edge(x, y).map_err(|e| e.to_string())?;
        }
        let events = match self.tracker.as_mut() {
            Some(t) => Some(t.delete_edge(x, y).map_err(|e| e.to_string())?),
            None => None,
        };
        if let Some(ev) = &events {
            for e in &ev.deaths {
                self.pbs.remove(e);
            }
            // Survivors whose component changed are rebuilt wholesale.
            let mut rebuilt: Vec<(Vertex, Vertex)> = Vec::new();
            let keys: Vec<(Vertex, Vertex)> = self.pbs.keys().copied().collect();
            for (u, v) in keys {
                let pb = self.pbs.get_mut(&(u, v)).unwrap();
                let cur = self.joint.scc_partition().id[u];
                if cur != pb.scc_id {
                    *pb = PerBridge::build(&self.joint, u, v);
                    rebuilt.push((u, v));
                }
            }
            // Column breaks feed the surviving partitions and the
            // 2-edge-connectivity refinement.
            for cb in &report.column_breaks {
                let keys: Vec<(Vertex, Vertex)> = self
                    .pbs
                    .keys()
                    .copied()
                    .filter(|&(u, v)| (u == cb.column || v == cb.column) && !rebuilt.contains(&(u, v)))
                    .collect();
                for k in keys {
                    let pb = self.pbs.get_mut(&k).unwrap();
                    let fragments = pb.apply_column_break(&self.joint, cb.column, &cb.b);
                    if let Some(ecc) = self.ecc.as_mut() {
                        let pb = &self.pbs[&k];
                        ecc.on_bridge_fragments(&self.joint, pb, &fragments);
                    }
                }
            }
            if let Some(ecc) = self.ecc.as_mut() {
                for brk in &report.scc_breaks {
                    ecc.on_scc_break(&self.joint, brk);
                }
                for k in &rebuilt {
                    let pb = &self.pbs[k];
                    let members = self.joint.scc_partition().members(pb.scc_id);
                    let fragments = vec![members];
                    ecc.on_bridge_fragments(&self.joint, pb, &fragments);
                }
            }
            for &(u, v) in &ev.births {
                let pb = PerBridge::build(&self.joint, u, v);
                if let Some(ecc) = self.ecc.as_mut() {
                    let members = self.joint.scc_partition().members(pb.scc_id);
                    ecc.on_bridge_fragments(&self.joint, &pb, &[members]);
                }
                self.pbs.insert((u, v), pb);
            }
        }
        if let Some(vrc) = self.vrc.as_mut() {
            for brk in &report.scc_breaks {
                vrc.on_scc_break(&self.joint, brk);
            }
            for cb in &report.column_breaks {
                vrc.on_column_break(&self.joint, cb);
            }
        }
        if let Some(vcs) = self.vcs.as_mut() {
            vcs.delete_edge(x, y);
        }
        if let Some(ecs) = self.ecs.as_mut() {
            ecs.delete_edge(x, y);
        }
        Ok(())
    }

    // --- vertex-failure queries ---

    pub fn count_sccs_without(&self, v: Vertex) -> u32 {
        self.joint.column(v).map(|p| p.count).unwrap_or(0)
    }

    pub fn minmax_without(&self, v: Vertex) -> Option<(u32, u32)> {
        let p = self.joint.column(v)?;
        Some((p.min_size()?, p.max_size()?))
    }

    pub fn report_without(&self, v: Vertex) -> Vec<Vec<Vertex>> {
        self.joint.column(v).map(|p| p.classes()).unwrap_or_default()
    }

    pub fn same_without(&self, u: Vertex, w: Vertex, v: Vertex) -> Result<bool, String> {
        self.joint.same_without(u, w, v).map_err(|e| e.to_string())
    }

    pub fn separating_vertices(&self, u: Vertex, w: Vertex) -> Result<Vec<Vertex>, String> {
        if u == w {
            return Err("arguments must be distinct".into());
        }
        if self.joint.scc_partition().id[u] != self.joint.scc_partition().id[w] {
            return Err(format!("{} and {} are not strongly connected", u + 1, w + 1));
        }
        let pair = self
            .tracker
            .as_ref()
            .expect("edge-failure subsystem built")
            .pair_of(u)
            .expect("strongly connected pair lives in a component");
        Ok(separating_vertices(pair, u, w, |c| {
            !self.joint.same_without(u, w, c).unwrap()
        }))
    }

    // --- edge-failure queries ---

    pub fn bridges(&self) -> Vec<(Vertex, Vertex)> {
        self.tracker
            .as_ref()
            .map(|t| t.bridges.iter().copied().collect())
            .unwrap_or_default()
    }

    fn check_edge(&self, x: Vertex, y: Vertex) -> Result<(), String> {
        if !self.graph().has_edge(x, y) {
            return Err(format!("edge ({}, {}) not present", x + 1, y + 1));
        }
        Ok(())
    }

    pub fn same_without_edge(
        &self,
        w: Vertex,
        z: Vertex,
        x: Vertex,
        y: Vertex,
    ) -> Result<bool, String> {
        self.check_edge(x, y)?;
        let scc = self.joint.scc_partition();
        if w == z {
            return Ok(true);
        }
        let tracker = self.tracker.as_ref().expect("edge-failure subsystem built");
        if !tracker.is_bridge(x, y) {
            return Ok(scc.id[w] == scc.id[z]);
        }
        // A bridge separates its endpoints outright.
        if (w == x && z == y) || (w == y && z == x) {
            return Ok(false);
        }
        let same = |a: Vertex, b: Vertex, c: Vertex| self.joint.same_without(a, b, c).unwrap();
        if w == x || z == x {
            let other = if w == x { z } else { w };
            return Ok(other != y && same(x, other, y));
        }
        if w == y || z == y {
            let other = if w == y { z } else { w };
            return Ok(other != x && same(y, other, x));
        }
        Ok(same(w, z, x) || same(w, z, y))
    }

    pub fn count_sccs_without_edge(&self, x: Vertex, y: Vertex) -> Result<u32, String> {
        self.check_edge(x, y)?;
        let scc = self.joint.scc_partition();
        let tracker = self.tracker.as_ref().expect("edge-failure subsystem built");
        if !tracker.is_bridge(x, y) {
            return Ok(scc.count);
        }
        let pb = &self.pbs[&(x, y)];
        Ok(scc.count - 1 + pb.count)
    }

    pub fn minmax_without_edge(&self, x: Vertex, y: Vertex) -> Result<(u32, u32), String> {
        self.check_edge(x, y)?;
        let scc = self.joint.scc_partition();
        let tracker = self.tracker.as_ref().expect("edge-failure subsystem built");
        if !tracker.is_bridge(x, y) {
            return Ok((scc.min_size().unwrap(), scc.max_size().unwrap()));
        }
        let pb = &self.pbs[&(x, y)];
        let (mut lo, mut hi) = pb.min_max();
        let c_size = scc.size_of(pb.scc_id).unwrap();
        let mut sizes = scc.sizes();
        if let Some(pos) = sizes.iter().position(|&s| s == c_size) {
            sizes.remove(pos);
        }
        if let Some(&s) = sizes.first() {
            lo = lo.min(s);
        }
        if let Some(&s) = sizes.last() {
            hi = hi.max(s);
        }
        Ok((lo, hi))
    }

    pub fn report_without_edge(&self, x: Vertex, y: Vertex) -> Result<Vec<Vec<Vertex>>, String> {
        self.check_edge(x, y)?;
        let scc = self.joint.scc_partition();
        let tracker = self.tracker.as_ref().expect("edge-failure subsystem built");
        if !tracker.is_bridge(x, y) {
            return Ok(scc.classes());
        }
        let pb = &self.pbs[&(x, y)];
        let mut out: Vec<Vec<Vertex>> = scc
            .classes()
            .into_iter()
            .filter(|c| scc.id[c[0]] != pb.scc_id)
            .collect();
        out.extend(pb.classes(&self.joint));
        out.sort();
        Ok(out)
    }

    pub fn separating_edges(&self, w: Vertex, z: Vertex) -> Result<Vec<(Vertex, Vertex)>, String> {
        if w == z {
            return Err("arguments must be distinct".into());
        }
        if self.joint.scc_partition().id[w] != self.joint.scc_partition().id[z] {
            return Err(format!("{} and {} are not strongly connected", w + 1, z + 1));
        }
        let pair = self
            .tracker
            .as_ref()
            .expect("edge-failure subsystem built")
            .pair_of(w)
            .expect("strongly connected pair lives in a component");
        Ok(separating_edges(pair, w, z, |(a, b)| {
            !self.same_without_edge(w, z, a, b).unwrap()
        }))
    }

    // --- dominators ---

    pub fn dominates(&self, x: Vertex, v: Vertex) -> Result<Option<bool>, String> {
        let dom = self.dom.as_ref().expect("dominator subsystem built");
        if !dom.reachable[v] && v != dom.start() {
            return Ok(None); // reported as unreachable
        }
        dom.dominates(x, v).map(Some).map_err(|e| e.to_string())
    }

    // --- connectivity partitions ---

    pub fn vrc_blocks(&self) -> Vec<Vec<Vertex>> {
        self.vrc
            .as_ref()
            .expect("resilient-component subsystem built")
            .blocks(self.joint.scope())
    }

    pub fn two_vcs(&self, include_pairs: bool) -> Vec<Vec<Vertex>> {
        self.vcs
            .as_ref()
            .expect("2-vertex-connected subsystem built")
            .subgraphs(include_pairs)
    }

    pub fn two_ecc(&self) -> Vec<Vec<Vertex>> {
        self.ecc
            .as_ref()
            .expect("2-edge-connected-component subsystem built")
            .classes(self.graph().n())
    }

    pub fn two_ecs(&self) -> Vec<Vec<Vertex>> {
        self.ecs
            .as_ref()
            .expect("2-edge-connected-subgraph subsystem built")
            .subgraphs()
    }

    /// Oracle cross-checks for everything currently maintained.
    pub fn verify_all(&self) -> Vec<OracleReport> {
        let mut out = Vec::new();
        let g = self.graph();
        let mut push = |check: &str, expected: String, actual: String| {
            let pass = expected == actual;
            out.push(OracleReport { check: check.into(), expected, actual, pass });
        };
        push("columns", "ok".into(), match self.joint.verify() {
            Ok(()) => "ok".into(),
            Err(e) => e,
        });
        if let Some(dom) = &self.dom {
            let want = crate::dom::static_dominators(&dom.plain_graph(), dom.start());
            push(
                "dominator-parents",
                format!("{:?}", want.parent),
                format!("{:?}", dom.parent),
            );
            push(
                "dominator-certificate",
                "true".into(),
                fmt_bool(oracle::verify_dominator_tree(&dom.plain_graph(), dom.start(), &dom.tree())),
            );
        }
        if let Some(t) = &self.tracker {
            push("bridges", "ok".into(), match t.verify() {
                Ok(()) => "ok".into(),
                Err(e) => e,
            });
            for ((u, v), pb) in &self.pbs {
                let lab = oracle::oracle_scc_without_edge(g, *u, *v);
                let comp = self.joint.scc_partition().members(pb.scc_id);
                let want = oracle::canonical_classes(
                    comp.iter().map(|&w| (w, lab.component_id[w] as u32)),
                );
                push(
                    &format!("partition-without-edge-{}-{}", u + 1, v + 1),
                    format!("{want:?}"),
                    format!("{:?}", pb.classes(&self.joint)),
                );
                let mut sizes: Vec<u32> = want.iter().map(|c| c.len() as u32).collect();
                sizes.sort_unstable();
                push(
                    &format!("sizes-without-edge-{}-{}", u + 1, v + 1),
                    format!("{sizes:?}"),
                    format!("{:?}", pb.all_sizes()),
                );
            }
        }
        if let Some(vrc) = &self.vrc {
            push(
                "vertex-resilient-components",
                format!("{:?}", oracle::oracle_vrc(g)),
                format!("{:?}", vrc.blocks(self.joint.scope())),
            );
        }
        if let Some(vcs) = &self.vcs {
            push(
                "max-2vc-subgraphs",
                format!("{:?}", oracle::oracle_max_2vcs(g, false)),
                format!("{:?}", vcs.subgraphs(false)),
            );
        }
        if let Some(ecc) = &self.ecc {
            push(
                "2ec-components",
                format!("{:?}", oracle::oracle_2ecc(g)),
                format!("{:?}", ecc.classes(g.n())),
            );
        }
        if let Some(ecs) = &self.ecs {
            push(
                "max-2ec-subgraphs",
                format!("{:?}", oracle::oracle_max_2ecs(g)),
                format!("{:?}", ecs.subgraphs()),
            );
        }
        out
    }
}

// ----- the runner -------------------------------------------------------------

pub struct RunOutcome {
    pub output: String,
    pub verify_reports: Vec<OracleReport>,
    pub stats: Option<String>,
    pub deletions: u64,
}

pub struct RunConfig {
    pub mode: Mode,
    pub seed: u64,
    pub verify: bool,
    pub stats: bool,
    pub shuffle_order: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig { mode: Mode::Joint, seed: 0, verify: false, stats: false, shuffle_order: false }
    }
}

pub fn run(g: &Digraph, script: &Script, cfg: &RunConfig) -> Result<RunOutcome, RunError> {
    match cfg.mode {
        Mode::Joint => run_joint(g, script, cfg),
        Mode::Naive => run_naive(g, script, cfg),
        Mode::Reducible => run_reducible(g, script, cfg),
    }
}

fn pick_order(n: usize, shuffle: bool, seed: u64) -> Vec<Vertex> {
    use rand::Rng;
    use rand::SeedableRng;
    let mut order: Vec<Vertex> = (0..n).collect();
    if shuffle {
        let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(0x517));
        for i in (1..n).rev() {
            let j = rng.gen_range(0..=i);
            order.swap(i, j);
        }
    }
    order
}

fn run_joint(g: &Digraph, script: &Script, cfg: &RunConfig) -> Result<RunOutcome, RunError> {
    use rand::SeedableRng;
    let source = script.source.unwrap_or(0);
    let mut needs = Needs::of_script(script);
    needs.dominators |= script.source.is_some();
    if cfg.verify {
        needs = Needs::all();
    }
    let order = pick_order(g.n(), cfg.shuffle_order, cfg.seed);
    let rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut eng = Engine::new(g, source, order, rng, needs);
    let mut out = String::new();
    let mut reports = Vec::new();
    let mut deletions = 0u64;
    if cfg.verify {
        reports.extend(eng.verify_all());
    }
    for &(line, cmd) in &script.cmds {
        let err = |e: String| RunError::Command(line, e);
        match cmd {
            Cmd::Del(u, v) => {
                eng.delete_edge(u, v).map_err(err)?;
                deletions += 1;
                if cfg.verify {
                    reports.extend(eng.verify_all());
                }
            }
            Cmd::QConn(u, v, w) => {
                let _ = writeln!(out, "{}", fmt_bool(eng.same_without(u, v, w).map_err(err)?));
            }
            Cmd::QNscc(v) => {
                let _ = writeln!(out, "{}", eng.count_sccs_without(v));
            }
            Cmd::QSizes(v) => {
                let (lo, hi) = eng.minmax_without(v).ok_or_else(|| err("empty graph".into()))?;
                let _ = writeln!(out, "{lo} {hi}");
            }
            Cmd::QReport(v) => {
                let _ = writeln!(out, "{}", fmt_partition(&eng.report_without(v)));
            }
            Cmd::QSeps(u, w) => {
                let _ = writeln!(out, "{}", fmt_vertex_set(&eng.separating_vertices(u, w).map_err(err)?));
            }
            Cmd::Dom(x, v) => {
                let _ = match eng.dominates(x, v).map_err(err)? {
                    Some(b) => writeln!(out, "{}", fmt_bool(b)),
                    None => writeln!(out, "unreachable"),
                };
            }
            Cmd::Parent(_) => {
                return Err(err("parent queries belong to reducible mode".into()));
            }
            Cmd::Bridges => {
                let _ = writeln!(out, "{}", fmt_edge_set(&eng.bridges()));
            }
            Cmd::QConnE(u, v, x, y) => {
                let _ = writeln!(out, "{}", fmt_bool(eng.same_without_edge(u, v, x, y).map_err(err)?));
            }
            Cmd::QNsccE(x, y) => {
                let _ = writeln!(out, "{}", eng.count_sccs_without_edge(x, y).map_err(err)?);
            }
            Cmd::QSizesE(x, y) => {
                let (lo, hi) = eng.minmax_without_edge(x, y).map_err(err)?;
                let _ = writeln!(out, "{lo} {hi}");
            }
            Cmd::QReportE(x, y) => {
                let _ = writeln!(out, "{}", fmt_partition(&eng.report_without_edge(x, y).map_err(err)?));
            }
            Cmd::QSepsE(w, z) => {
                let _ = writeln!(out, "{}", fmt_edge_set(&eng.separating_edges(w, z).map_err(err)?));
            }
            Cmd::Vrc => {
                let _ = writeln!(out, "{}", fmt_partition(&eng.vrc_blocks()));
            }
            Cmd::TwoVcs => {
                let _ = writeln!(out, "{}", fmt_partition(&eng.two_vcs(false)));
            }
            Cmd::TwoEcc => {
                let _ = writeln!(out, "{}", fmt_partition(&eng.two_ecc()));
            }
            Cmd::TwoEcs => {
                let _ = writeln!(out, "{}", fmt_partition(&eng.two_ecs()));
            }
        }
    }
    let stats = cfg.stats.then(|| {
        let mut s = eng.joint.stats_dump();
        if let Some(dom) = &eng.dom {
            let _ = writeln!(s, "nset_volume={}", dom.nset_volume);
        }
        if let Some(t) = &eng.tracker {
            let _ = writeln!(s, "bridges_ever={}", t.ever_bridges.len());
        }
        s
    });
    Ok(RunOutcome { output: out, verify_reports: reports, stats, deletions })
}

fn run_naive(g: &Digraph, script: &Script, cfg: &RunConfig) -> Result<RunOutcome, RunError> {
    let mut st = NaiveState::new(g);
    let mut out = String::new();
    let mut deletions = 0u64;
    for &(line, cmd) in &script.cmds {
        let err = |e: String| RunError::Command(line, e);
        let g = &st.g;
        match cmd {
            Cmd::Del(u, v) => {
                st.delete_edge(u, v).map_err(err)?;
                deletions += 1;
            }
            Cmd::QConn(u, v, w) => {
                if u == v || u == w || v == w {
                    return Err(err("query arguments must be distinct".into()));
                }
                let _ = writeln!(out, "{}", fmt_bool(st.same_without(u, v, w)));
            }
            Cmd::QNscc(v) => {
                let _ = writeln!(out, "{}", st.columns[v].component_count);
            }
            Cmd::QSizes(v) => {
                let sizes: Vec<usize> = st.columns[v].members.iter().map(|c| c.len()).collect();
                let lo = sizes.iter().min().ok_or_else(|| err("empty graph".into()))?;
                let hi = sizes.iter().max().unwrap();
                let _ = writeln!(out, "{lo} {hi}");
            }
            Cmd::QReport(v) => {
                let _ = writeln!(out, "{}", fmt_partition(&st.column_classes(v)));
            }
            Cmd::QSeps(u, w) => {
                if u == w || !st.scc.same(u, w) {
                    return Err(err(format!("{} and {} are not strongly connected", u + 1, w + 1)));
                }
                let _ = writeln!(out, "{}", fmt_vertex_set(&oracle::oracle_separating_vertices(g, u, w)));
            }
            Cmd::Dom(x, v) => {
                let source = script.source.unwrap_or(0);
                let reach = crate::dom::reachable_set(g, source, None);
                if !reach[v] && v != source {
                    let _ = writeln!(out, "unreachable");
                } else if x == source || x == v {
                    let _ = writeln!(out, "true");
                } else if !reach[x] {
                    let _ = writeln!(out, "false");
                } else {
                    let without = crate::dom::reachable_set(g, source, Some(x));
                    let _ = writeln!(out, "{}", fmt_bool(!without[v]));
                }
            }
            Cmd::Parent(_) => return Err(err("parent queries belong to reducible mode".into())),
            Cmd::Bridges => {
                let bs: Vec<(Vertex, Vertex)> = oracle::oracle_strong_bridges(g).into_iter().collect();
                let _ = writeln!(out, "{}", fmt_edge_set(&bs));
            }
            Cmd::QConnE(u, v, x, y) => {
                if !g.has_edge(x, y) {
                    return Err(err(format!("edge ({}, {}) not present", x + 1, y + 1)));
                }
                if u == v {
                    let _ = writeln!(out, "true");
                } else {
                    let _ = writeln!(out, "{}", fmt_bool(oracle::oracle_scc_without_edge(g, x, y).same(u, v)));
                }
            }
            Cmd::QNsccE(x, y) => {
                if !g.has_edge(x, y) {
                    return Err(err(format!("edge ({}, {}) not present", x + 1, y + 1)));
                }
                let _ = writeln!(out, "{}", oracle::oracle_scc_without_edge(g, x, y).component_count);
            }
            Cmd::QSizesE(x, y) => {
                if !g.has_edge(x, y) {
                    return Err(err(format!("edge ({}, {}) not present", x + 1, y + 1)));
                }
                let lab = oracle::oracle_scc_without_edge(g, x, y);
                let sizes: Vec<usize> = lab.members.iter().map(|c| c.len()).collect();
                let _ = writeln!(out, "{} {}", sizes.iter().min().unwrap(), sizes.iter().max().unwrap());
            }
            Cmd::QReportE(x, y) => {
                if !g.has_edge(x, y) {
                    return Err(err(format!("edge ({}, {}) not present", x + 1, y + 1)));
                }
                let lab = oracle::oracle_scc_without_edge(g, x, y);
                let mut classes = lab.members.clone();
                classes.sort();
                let _ = writeln!(out, "{}", fmt_partition(&classes));
            }
            Cmd::QSepsE(w, z) => {
                if w == z || !st.scc.same(w, z) {
                    return Err(err(format!("{} and {} are not strongly connected", w + 1, z + 1)));
                }
                let _ = writeln!(out, "{}", fmt_edge_set(&oracle::oracle_separating_edges(g, w, z)));
            }
            Cmd::Vrc => {
                let _ = writeln!(out, "{}", fmt_partition(&oracle::oracle_vrc(g)));
            }
            Cmd::TwoVcs => {
                let _ = writeln!(out, "{}", fmt_partition(&oracle::oracle_max_2vcs(g, false)));
            }
            Cmd::TwoEcc => {
                let _ = writeln!(out, "{}", fmt_partition(&oracle::oracle_2ecc(g)));
            }
            Cmd::TwoEcs => {
                let _ = writeln!(out, "{}", fmt_partition(&oracle::oracle_max_2ecs(g)));
            }
        }
    }
    let stats = cfg.stats.then(|| format!("adjacency_scans={}\n", st.scans));
    Ok(RunOutcome { output: out, verify_reports: Vec::new(), stats, deletions })
}

fn run_reducible(g: &Digraph, script: &Script, cfg: &RunConfig) -> Result<RunOutcome, RunError> {
    let source = script
        .source
        .ok_or_else(|| RunError::Usage("reducible mode needs a `source s` script header".into()))?;
    let mut st = ReducibleState::new(g, source)
        .map_err(|e| RunError::Usage(e.to_string()))?;
    let mut out = String::new();
    let mut reports = Vec::new();
    let mut deletions = 0u64;
    for &(line, cmd) in &script.cmds {
        let err = |e: String| RunError::Command(line, e);
        match cmd {
            Cmd::Del(u, v) => {
                st.delete_edge(u, v).map_err(|e| err(e.to_string()))?;
                deletions += 1;
                if cfg.verify {
                    let pass = st.verify();
                    reports.push(OracleReport {
                        check: "reducible-dominators".into(),
                        expected: "ok".into(),
                        actual: pass.clone().err().unwrap_or_else(|| "ok".into()),
                        pass: pass.is_ok(),
                    });
                }
            }
            Cmd::Parent(v) => {
                let _ = match st.parent(v) {
                    Some(p) => writeln!(out, "{}", p + 1),
                    None if st.is_reachable(v) => writeln!(out, "none"),
                    None => writeln!(out, "unreachable"),
                };
            }
            _ => return Err(err("reducible mode supports only del and parent".into())),
        }
    }
    let stats = cfg.stats.then(|| format!("work_units={}\nreinits={}\n", st.work_units, st.reinits));
    Ok(RunOutcome { output: out, verify_reports: reports, stats, deletions })
}

/// Runs the script under each mode, measuring wall time and work counters.
pub fn bench(g: &Digraph, script: &Script, modes: &[Mode], seed: u64) -> String {
    let mut table = String::from("mode time_ms scans deletions\n");
    for &mode in modes {
        let cfg = RunConfig { mode, seed, verify: false, stats: true, shuffle_order: false };
        let t0 = std::time::Instant::now();
        match run(g, script, &cfg) {
            Ok(outcome) => {
                let scans = outcome
                    .stats
                    .as_deref()
                    .and_then(|s| {
                        s.lines()
                            .find(|l| l.starts_with("adjacency_scans=") || l.starts_with("work_units="))
                            .and_then(|l| l.split('=').nth(1))
                            .and_then(|v| v.parse::<u64>().ok())
                    })
                    .unwrap_or(0);
                let _ = writeln!(
                    table,
                    "{:?} {} {} {}",
                    mode,
                    t0.elapsed().as_millis(),
                    scans,
                    outcome.deletions
                );
            }
            Err(e) => {
                let _ = writeln!(table, "{mode:?} error: {e}");
            }
        }
    }
    table
}
