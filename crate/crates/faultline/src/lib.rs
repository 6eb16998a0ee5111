//! Decremental strong-connectivity toolkit for directed graphs.
//!
//! The crate maintains, while a digraph loses edges one at a time:
//!
//! - the strongly connected components of `G \ {v}` for *every* vertex `v`
//!   at once (a shared family of SCC-decompositions plus an id matrix),
//!   answering "are `u`, `w` strongly connected in `G \ {v}`?" in O(1);
//! - a dominator tree from a fixed start vertex, with O(1) dominance tests;
//! - per-SCC in/out dominator tree pairs with randomized roots, the strong
//!   bridges, and the SCC partition of `G \ e` for every strong bridge `e`;
//! - vertex-resilient components, 2-edge-connected components, and maximal
//!   2-vertex-/2-edge-connected subgraphs;
//! - a specialized O(mn)-time, O(m+n)-space dominator maintenance algorithm
//!   for reducible flow graphs.
//!
//! Everything is verifiable against the brute-force reference implementations
//! in [`oracle`], and the `examples/` directory has one runnable program per
//! capability. A thin batch CLI (`faultline`) drives graph + script files.

pub mod graph;
pub mod scc;
pub mod dom;
pub mod oracle;
pub mod decomp;
pub mod joint;
pub mod dominators;
pub mod vertex_failure;
pub mod edge_failure;
pub mod two_conn;
pub mod reducible;
pub mod naive;
pub mod gen;
pub mod script;

pub use graph::{Digraph, Vertex};
pub use scc::{tarjan_scc, SccLabeling};
pub use dom::DominatorTree;
