//! Mutable directed multigraph with stable vertex ids.
//!
//! Vertices are dense `0..n` internally; the text format is 1-based and the
//! conversion happens once at parse/print time. Parallel edges carry a
//! multiplicity count and deleting an edge removes one copy.

use std::fmt::Write as _;
use thiserror::Error;

/// Internal vertex id, `0..n`.
pub type Vertex = usize;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GraphError {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("edge ({0}, {1}) not present")]
    EdgeMissing(usize, usize),
    #[error("vertex {0} out of range")]
    VertexRange(usize),
}

/// Directed multigraph. Adjacency lists store `(neighbor, multiplicity)`
/// pairs; an edge is never listed with multiplicity zero.
#[derive(Debug, Clone, Default)]
pub struct Digraph {
    n: usize,
    out_adj: Vec<Vec<(Vertex, u32)>>,
    in_adj: Vec<Vec<(Vertex, u32)>>,
    m: u64,
}

impl Digraph {
    pub fn new(n: usize) -> Self {
        Digraph {
            n,
            out_adj: vec![Vec::new(); n],
            in_adj: vec![Vec::new(); n],
            m: 0,
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Total edge count, counting multiplicity.
    pub fn m(&self) -> u64 {
        self.m
    }

    pub fn add_edge(&mut self, u: Vertex, v: Vertex) {
        assert!(u < self.n && v < self.n, "vertex out of range");
        bump(&mut self.out_adj[u], v, 1);
        bump(&mut self.in_adj[v], u, 1);
        self.m += 1;
    }

    /// Removes one copy of `(u, v)`.
    pub fn remove_edge(&mut self, u: Vertex, v: Vertex) -> Result<(), GraphError> {
        if u >= self.n || v >= self.n || !drop_one(&mut self.out_adj[u], v) {
            return Err(GraphError::EdgeMissing(u + 1, v + 1));
        }
        let ok = drop_one(&mut self.in_adj[v], u);
        debug_assert!(ok, "in/out adjacency out of sync");
        self.m -= 1;
        Ok(())
    }

    pub fn multiplicity(&self, u: Vertex, v: Vertex) -> u32 {
        self.out_adj[u]
            .iter()
            .find(|&&(w, _)| w == v)
            .map_or(0, |&(_, c)| c)
    }

    pub fn has_edge(&self, u: Vertex, v: Vertex) -> bool {
        self.multiplicity(u, v) > 0
    }

    /// Out-neighbors of `v` with multiplicities.
    pub fn out(&self, v: Vertex) -> &[(Vertex, u32)] {
        &self.out_adj[v]
    }

    /// In-neighbors of `v` with multiplicities.
    pub fn inn(&self, v: Vertex) -> &[(Vertex, u32)] {
        &self.in_adj[v]
    }

    pub fn out_degree(&self, v: Vertex) -> u64 {
        self.out_adj[v].iter().map(|&(_, c)| c as u64).sum()
    }

    pub fn in_degree(&self, v: Vertex) -> u64 {
        self.in_adj[v].iter().map(|&(_, c)| c as u64).sum()
    }

    /// All edges expanded by multiplicity, sorted by `(u, v)`.
    pub fn edges(&self) -> Vec<(Vertex, Vertex)> {
        let mut es = Vec::with_capacity(self.m as usize);
        for u in 0..self.n {
            for &(v, c) in &self.out_adj[u] {
                for _ in 0..c {
                    es.push((u, v));
                }
            }
        }
        es.sort_unstable();
        es
    }

    /// Distinct edges (no multiplicity expansion), sorted.
    pub fn distinct_edges(&self) -> Vec<(Vertex, Vertex)> {
        let mut es = Vec::new();
        for u in 0..self.n {
            for &(v, _) in &self.out_adj[u] {
                es.push((u, v));
            }
        }
        es.sort_unstable();
        es
    }

    /// Graph with every edge reversed.
    pub fn reverse(&self) -> Digraph {
        Digraph {
            n: self.n,
            out_adj: self.in_adj.clone(),
            in_adj: self.out_adj.clone(),
            m: self.m,
        }
    }

    /// Parses the text format: first line `n m`, then `m` lines `u v`
    /// (1-based). Duplicate lines accumulate multiplicity.
    pub fn parse(text: &str) -> Result<Digraph, GraphError> {
        let mut lines = text.lines().enumerate().filter(|(_, l)| {
            let t = l.trim();
            !t.is_empty() && !t.starts_with('#')
        });
        let (lno, header) = lines
            .next()
            .ok_or_else(|| GraphError::Parse { line: 1, msg: "empty input".into() })?;
        let mut it = header.split_whitespace();
        let n: usize = next_int(&mut it, lno + 1, "vertex count")?;
        let m: u64 = next_int(&mut it, lno + 1, "edge count")?;
        if it.next().is_some() {
            return Err(GraphError::Parse { line: lno + 1, msg: "trailing tokens in header".into() });
        }
        let mut g = Digraph::new(n);
        let mut read = 0u64;
        for (lno, line) in lines {
            if read == m {
                return Err(GraphError::Parse { line: lno + 1, msg: "more edges than declared".into() });
            }
            let mut it = line.split_whitespace();
            let u: usize = next_int(&mut it, lno + 1, "edge tail")?;
            let v: usize = next_int(&mut it, lno + 1, "edge head")?;
            if it.next().is_some() {
                return Err(GraphError::Parse { line: lno + 1, msg: "trailing tokens on edge line".into() });
            }
            for (name, x) in [("tail", u), ("head", v)] {
                if x == 0 || x > n {
                    return Err(GraphError::Parse {
                        line: lno + 1,
                        msg: format!("{name} {x} out of range 1..={n}"),
                    });
                }
            }
            g.add_edge(u - 1, v - 1);
            read += 1;
        }
        if read != m {
            return Err(GraphError::Parse {
                line: 0,
                msg: format!("declared {m} edges, found {read}"),
            });
        }
        Ok(g)
    }

    /// Deterministic serialization: edges sorted by `(u, v)`, 1-based.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "{} {}", self.n, self.m);
        for (u, v) in self.edges() {
            let _ = writeln!(s, "{} {}", u + 1, v + 1);
        }
        s
    }
}

fn bump(adj: &mut Vec<(Vertex, u32)>, v: Vertex, by: u32) {
    if let Some(e) = adj.iter_mut().find(|e| e.0 == v) {
        e.1 += by;
    } else {
        adj.push((v, by));
    }
}

fn drop_one(adj: &mut Vec<(Vertex, u32)>, v: Vertex) -> bool {
    if let Some(i) = adj.iter().position(|e| e.0 == v) {
        if adj[i].1 > 1 {
            adj[i].1 -= 1;
        } else {
            adj.swap_remove(i);
        }
        true
    } else {
        false
    }
}

fn next_int<T: std::str::FromStr>(
    it: &mut std::str::SplitWhitespace,
    line: usize,
    what: &str,
) -> Result<T, GraphError> {
    let tok = it
        .next()
        .ok_or_else(|| GraphError::Parse { line, msg: format!("missing {what}") })?;
    tok.parse()
        .map_err(|_| GraphError::Parse { line, msg: format!("bad {what}: {tok:?}") })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_roundtrip() {
        let g = Digraph::parse("2 2\n1 2\n2 1\n").unwrap();
        assert_eq!(g.n(), 2);
        assert_eq!(g.m(), 2);
        assert_eq!(g.edges(), vec![(0, 1), (1, 0)]);
        assert_eq!(g.to_text(), "2 2\n1 2\n2 1\n");
    }

    #[test]
    fn parse_empty_graph() {
        let g = Digraph::parse("1 0\n").unwrap();
        assert_eq!(g.n(), 1);
        assert_eq!(g.m(), 0);
    }

    #[test]
    fn multiplicity_accumulates() {
        let g = Digraph::parse("2 2\n1 2\n1 2\n").unwrap();
        assert_eq!(g.multiplicity(0, 1), 2);
        assert_eq!(g.m(), 2);
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        let e = Digraph::parse("2 1\n1 3\n").unwrap_err();
        assert_eq!(e, GraphError::Parse { line: 2, msg: "head 3 out of range 1..=2".into() });
        let e = Digraph::parse("2 1\n1 x\n").unwrap_err();
        assert!(matches!(e, GraphError::Parse { line: 2, .. }));
    }

    #[test]
    fn remove_edge_one_copy() {
        let mut g = Digraph::parse("2 2\n1 2\n1 2\n").unwrap();
        g.remove_edge(0, 1).unwrap();
        assert_eq!(g.multiplicity(0, 1), 1);
        g.remove_edge(0, 1).unwrap();
        assert_eq!(g.remove_edge(0, 1), Err(GraphError::EdgeMissing(1, 2)));
        assert_eq!(g.m(), 0);
    }

    #[test]
    fn reverse_is_involution() {
        let g = Digraph::parse("3 3\n1 2\n2 3\n3 1\n").unwrap();
        let r = g.reverse();
        assert_eq!(r.edges(), vec![(0, 2), (1, 0), (2, 1)]);
        assert_eq!(r.reverse().edges(), g.edges());
    }
}
