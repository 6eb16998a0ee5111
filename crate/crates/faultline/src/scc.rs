//! Strongly connected components (iterative Tarjan).

use crate::graph::{Digraph, Vertex};

/// A labeling of vertices into strongly connected components.
///
/// Ids are dense `0..count` and deterministic for a fixed vertex iteration
/// order. `members[id]` lists the component's vertices in ascending order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SccLabeling {
    pub component_id: Vec<usize>,
    pub component_count: usize,
    pub members: Vec<Vec<Vertex>>,
}

impl SccLabeling {
    pub fn same(&self, u: Vertex, v: Vertex) -> bool {
        self.component_id[u] == self.component_id[v]
    }
}

/// SCCs of the whole graph.
pub fn tarjan_scc(g: &Digraph) -> SccLabeling {
    let scope: Vec<Vertex> = (0..g.n()).collect();
    tarjan_scc_scoped(g, &scope, None)
}

/// SCCs of the subgraph induced by `scope`, optionally with one vertex
/// removed. Vertices outside `scope` get id `usize::MAX` in `component_id`.
pub fn tarjan_scc_scoped(g: &Digraph, scope: &[Vertex], removed: Option<Vertex>) -> SccLabeling {
    const UNSET: usize = usize::MAX;
    let n = g.n();
    let mut in_scope = vec![false; n];
    for &v in scope {
        in_scope[v] = true;
    }
    if let Some(r) = removed {
        in_scope[r] = false;
    }

    let mut index = vec![UNSET; n];
    let mut lowlink = vec![0usize; n];
    let mut on_stack = vec![false; n];
    let mut stack: Vec<Vertex> = Vec::new();
    let mut next_index = 0usize;
    let mut component_id = vec![UNSET; n];
    let mut members: Vec<Vec<Vertex>> = Vec::new();

    // Explicit DFS stack: (vertex, next out-edge position).
    let mut call: Vec<(Vertex, usize)> = Vec::new();
    for &start in scope {
        if !in_scope[start] || index[start] != UNSET {
            continue;
        }
        call.push((start, 0));
        index[start] = next_index;
        lowlink[start] = next_index;
        next_index += 1;
        stack.push(start);
        on_stack[start] = true;

        while let Some(&mut (v, ref mut ei)) = call.last_mut() {
            let out = g.out(v);
            if *ei < out.len() {
                let (w, _) = out[*ei];
                *ei += 1;
                if !in_scope[w] || w == v {
                    continue;
                }
                if index[w] == UNSET {
                    index[w] = next_index;
                    lowlink[w] = next_index;
                    next_index += 1;
                    stack.push(w);
                    on_stack[w] = true;
                    call.push((w, 0));
                } else if on_stack[w] {
                    lowlink[v] = lowlink[v].min(index[w]);
                }
            } else {
                call.pop();
                if let Some(&(parent, _)) = call.last() {
                    lowlink[parent] = lowlink[parent].min(lowlink[v]);
                }
                if lowlink[v] == index[v] {
                    let id = members.len();
                    let mut comp = Vec::new();
                    loop {
                        let w = stack.pop().expect("tarjan stack underflow");
                        on_stack[w] = false;
                        component_id[w] = id;
                        comp.push(w);
                        if w == v {
                            break;
                        }
                    }
                    comp.sort_unstable();
                    members.push(comp);
                }
            }
        }
    }

    SccLabeling { component_id, component_count: members.len(), members }
}
