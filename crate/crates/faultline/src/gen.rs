//! Instance generators: random digraphs, strongly connected digraphs,
//! reducible flow graphs, and a layered worst-case-style benchmark family
//! with its deletion/query script.

use crate::graph::{Digraph, Vertex};
use crate::reducible::strip_back_edges;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use std::fmt::Write;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GraphClass {
    Digraph,
    StronglyConnected,
    ReducibleFlowGraph,
}

impl std::str::FromStr for GraphClass {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "digraph" => Ok(GraphClass::Digraph),
            "strongly-connected" => Ok(GraphClass::StronglyConnected),
            "reducible-flowgraph" => Ok(GraphClass::ReducibleFlowGraph),
            other => Err(format!("unknown graph class {other:?}")),
        }
    }
}

/// Random instance with `n` vertices and `m` edges (multiplicities allowed).
/// Strongly connected graphs start from a random Hamiltonian cycle;
/// reducible flow graphs are a random dag over a random topological order
/// rooted at vertex 1, plus back edges into dominators only.
pub fn gen_random(n: usize, m: u64, seed: u64, class: GraphClass) -> Result<Digraph, String> {
    use rand::SeedableRng;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    if n == 0 {
        return Err("need at least one vertex".into());
    }
    let mut g = Digraph::new(n);
    match class {
        GraphClass::Digraph => {
            let mut left = m;
            while left > 0 && n > 1 {
                let u = rng.gen_range(0..n);
                let v = rng.gen_range(0..n);
                if u != v {
                    g.add_edge(u, v);
                    left -= 1;
                }
            }
        }
        GraphClass::StronglyConnected => {
            if n > 1 && m < n as u64 {
                return Err(format!("a strongly connected graph on {n} vertices needs at least {n} edges"));
            }
            let mut perm: Vec<Vertex> = (0..n).collect();
            for i in (1..n).rev() {
                let j = rng.gen_range(0..=i);
                perm.swap(i, j);
            }
            if n > 1 {
                for i in 0..n {
                    g.add_edge(perm[i], perm[(i + 1) % n]);
                }
            }
            while g.m() < m && n > 1 {
                let u = rng.gen_range(0..n);
                let v = rng.gen_range(0..n);
                if u != v {
                    g.add_edge(u, v);
                }
            }
        }
        GraphClass::ReducibleFlowGraph => {
            // Topological order with the source first.
            let mut order: Vec<Vertex> = (0..n).collect();
            for i in (2..n).rev() {
                let j = rng.gen_range(1..=i);
                order.swap(i, j);
            }
            // A spanning in-edge from an earlier vertex keeps everything
            // reachable; extra forward edges up to roughly three quarters
            // of the budget, the rest become back edges into dominators.
            for i in 1..n {
                let j = rng.gen_range(0..i);
                g.add_edge(order[j], order[i]);
            }
            let forward_budget = m.saturating_sub(n as u64 - 1) * 3 / 4;
            let mut added = 0;
            let mut tries = 0;
            while added < forward_budget && n > 2 && tries < 20 * m {
                tries += 1;
                let i = rng.gen_range(0..n - 1);
                let j = rng.gen_range(i + 1..n);
                g.add_edge(order[i], order[j]);
                added += 1;
            }
            let tree = crate::dom::static_dominators(&g, 0);
            let mut tries = 0;
            while g.m() < m && tries < 20 * m {
                tries += 1;
                let v = rng.gen_range(1..n);
                if !tree.reachable[v] {
                    continue;
                }
                // Random proper dominator of v.
                let mut doms = Vec::new();
                let mut cur = v;
                while let Some(p) = tree.parent[cur] {
                    doms.push(p);
                    cur = p;
                }
                let w = doms[rng.gen_range(0..doms.len())];
                g.add_edge(v, w);
            }
            debug_assert!(strip_back_edges(&g, 0).is_ok());
        }
    }
    Ok(g)
}

/// Layered hard instance: a path `s, x_1 .. x_{n3+1}`, a complete bipartite
/// layer from the path to `y_1 .. y_{n1}`, and a random 0/1 matrix layer
/// from the `y`s to `z_1 .. z_{n2}`; plus a script that walks the path,
/// thinning the x-to-y edges and asking parent queries on the `z`s.
pub fn gen_omv(
    n1: usize,
    n2: usize,
    n3: usize,
    density: f64,
    seed: u64,
) -> Result<(Digraph, String), String> {
    use rand::SeedableRng;
    if n1 == 0 || n2 == 0 || n3 == 0 {
        return Err("all three layer sizes must be positive".into());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = 1 + (n3 + 1) + n1 + n2;
    let s = 0;
    let x = |t: usize| t; // x_1 .. x_{n3+1} at 1..=n3+1
    let y = |i: usize| n3 + 1 + i; // y_1 .. y_n1
    let z = |j: usize| n3 + 1 + n1 + j; // z_1 .. z_n2
    let mut g = Digraph::new(n);
    g.add_edge(s, x(1));
    for t in 1..=n3 {
        g.add_edge(x(t), x(t + 1));
    }
    for j in 1..=n2 {
        g.add_edge(x(n3 + 1), z(j));
    }
    for t in 1..=n3 {
        for i in 1..=n1 {
            g.add_edge(x(t), y(i));
        }
    }
    let mut matrix = vec![vec![false; n2 + 1]; n1 + 1];
    for i in 1..=n1 {
        for j in 1..=n2 {
            if rng.gen_bool(density) {
                matrix[i][j] = true;
                g.add_edge(y(i), z(j));
            }
        }
    }
    // The deletion/query script of one full round sequence.
    let mut script = String::new();
    let _ = writeln!(script, "source 1");
    let mut alive = vec![vec![true; n1 + 1]; n3 + 1];
    for t in 1..=n3 {
        if t >= 2 {
            for i in 1..=n1 {
                if alive[t - 1][i] {
                    let _ = writeln!(script, "del {} {}", x(t - 1) + 1, y(i) + 1);
                    alive[t - 1][i] = false;
                }
            }
        }
        for i in 1..=n1 {
            if rng.gen_bool(0.5) {
                let _ = writeln!(script, "del {} {}", x(t) + 1, y(i) + 1);
                alive[t][i] = false;
            }
        }
        for j in 1..=n2 {
            if rng.gen_bool(0.5) {
                let _ = writeln!(script, "parent {}", z(j) + 1);
            }
        }
    }
    Ok((g, script))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trivial_graph() {
        let g = gen_random(1, 0, 7, GraphClass::Digraph).unwrap();
        assert_eq!(g.to_text(), "1 0\n");
    }

    #[test]
    fn fixed_seed_reproducible() {
        let a = gen_random(20, 60, 42, GraphClass::Digraph).unwrap();
        let b = gen_random(20, 60, 42, GraphClass::Digraph).unwrap();
        assert_eq!(a.to_text(), b.to_text());
    }

    #[test]
    fn strongly_connected_is_one_scc() {
        let g = gen_random(12, 30, 3, GraphClass::StronglyConnected).unwrap();
        assert_eq!(crate::scc::tarjan_scc(&g).component_count, 1);
    }

    #[test]
    fn reducible_instances_pass_the_checker() {
        for seed in 0..10 {
            let g = gen_random(15, 40, seed, GraphClass::ReducibleFlowGraph).unwrap();
            assert!(crate::reducible::ReducibleState::new(&g, 0).is_ok(), "seed {seed}");
        }
    }

    #[test]
    fn omv_layout() {
        let (g, script) = gen_omv(1, 1, 1, 1.0, 1).unwrap();
        // s, x1, x2, y1, z1 with the stated edges.
        assert_eq!(g.n(), 5);
        assert!(g.has_edge(0, 1)); // s -> x1
        assert!(g.has_edge(1, 2)); // x1 -> x2
        assert!(g.has_edge(2, 4)); // x2 -> z1
        assert!(g.has_edge(1, 3)); // x1 -> y1
        assert!(g.has_edge(3, 4)); // y1 -> z1 (all-ones matrix)
        assert!(script.starts_with("source 1"));

        let (g, _) = gen_omv(2, 2, 1, 0.0, 1).unwrap();
        // Zero matrix: no y -> z edges.
        for i in 0..2 {
            for j in 0..2 {
                assert!(!g.has_edge(2 + 1 + i, 2 + 1 + 2 + j));
            }
        }
    }
}
