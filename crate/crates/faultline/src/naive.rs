//! Baseline that recomputes every per-vertex-failure component labeling from
//! scratch after each deletion. It answers the same queries as the
//! maintained structures (byte-identical through the shared formatting) and
//! its edge-touch counter is the yardstick the incremental structure is
//! measured against.

use crate::graph::{Digraph, Vertex};
use crate::oracle;
use crate::scc::{tarjan_scc, SccLabeling};

pub struct NaiveState {
    pub g: Digraph,
    /// Labeling of `G \ {w}` per w, recomputed after every deletion.
    pub columns: Vec<SccLabeling>,
    pub scc: SccLabeling,
    /// Edge touches spent on recomputation.
    pub scans: u64,
}

impl NaiveState {
    pub fn new(g: &Digraph) -> NaiveState {
        let mut st = NaiveState {
            g: g.clone(),
            columns: Vec::new(),
            scc: tarjan_scc(g),
            scans: 0,
        };
        st.recompute();
        st
    }

    fn recompute(&mut self) {
        let n = self.g.n();
        self.columns = (0..n)
            .map(|w| oracle::oracle_scc_without_vertex(&self.g, w))
            .collect();
        self.scc = tarjan_scc(&self.g);
        self.scans += (n as u64 + 1) * (self.g.m() + n as u64);
    }

    pub fn delete_edge(&mut self, u: Vertex, v: Vertex) -> Result<(), String> {
        self.g
            .remove_edge(u, v)
            .map_err(|e| e.to_string())?;
        self.recompute();
        Ok(())
    }

    pub fn same_without(&self, u: Vertex, v: Vertex, w: Vertex) -> bool {
        self.columns[w].same(u, v)
    }

    pub fn column_classes(&self, w: Vertex) -> Vec<Vec<Vertex>> {
        let n = self.g.n();
        crate::oracle::canonical_classes(
            (0..n)
                .filter(|&u| u != w)
                .map(|u| (u, self.columns[w].component_id[u] as u32)),
        )
    }
}
