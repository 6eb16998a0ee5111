//! Acceptance suite: one test per criterion, each printing a PASS/FAIL line
//! (run with `--nocapture` to see them). Hard criteria assert; the
//! work-scaling trend is measured and reported without failing the build.

use faultline::dom::static_dominators;
use faultline::dominators::DomState;
use faultline::edge_failure::BridgeTracker;
use faultline::gen::{gen_random, GraphClass};
use faultline::graph::{Digraph, Vertex};
use faultline::joint::Joint;
use faultline::oracle::{self, canonical_classes};
use faultline::reducible::ReducibleState;
use faultline::scc::tarjan_scc;
use faultline::script::{Engine, Needs};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::time::Instant;

fn build_joint(g: &Digraph) -> Joint {
    let scope: Vec<Vertex> = (0..g.n()).collect();
    Joint::build(g.clone(), scope.clone(), scope)
}

fn columns_match(j: &Joint, g: &Digraph) -> bool {
    let n = g.n();
    (0..n).all(|w| {
        let lab = oracle::oracle_scc_without_vertex(g, w);
        let want = canonical_classes(
            (0..n).filter(|&u| u != w).map(|u| (u, lab.component_id[u] as u32)),
        );
        j.column(w).map(|p| p.classes()) == Some(want)
    })
}

fn random_graph(rng: &mut ChaCha8Rng, n: usize, m: usize) -> Digraph {
    let mut g = Digraph::new(n);
    let mut left = m;
    while left > 0 {
        let u = rng.gen_range(0..n);
        let v = rng.gen_range(0..n);
        if u != v {
            g.add_edge(u, v);
            left -= 1;
        }
    }
    g
}

#[test]
fn criterion_1_exhaustive_small_columns() {
    let t0 = Instant::now();
    // All 64 labeled digraphs on 3 vertices, all edge-deletion orders.
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
        let mut base = Digraph::new(3);
        for &(u, v) in &edges {
            base.add_edge(u, v);
        }
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
            let mut g = base.clone();
            let mut j = build_joint(&g);
            assert!(columns_match(&j, &g), "initial columns for mask {mask}");
            for &i in &order {
                let (u, v) = edges[i];
                j.delete_edge(u, v).unwrap();
                g.remove_edge(u, v).unwrap();
                assert!(columns_match(&j, &g), "mask {mask}, deletion {i}");
            }
        }
    }
    // 1000 random (graph, deletion order) pairs on 4 vertices.
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for trial in 0..1000 {
        let m = rng.gen_range(0..=12);
        let mut g = random_graph(&mut rng, 4, m);
        let mut j = build_joint(&g);
        assert!(columns_match(&j, &g), "trial {trial} initial");
        while g.m() > 0 {
            let edges = g.edges();
            let (u, v) = edges[rng.gen_range(0..edges.len())];
            j.delete_edge(u, v).unwrap();
            g.remove_edge(u, v).unwrap();
            assert!(columns_match(&j, &g), "trial {trial}");
        }
    }
    println!(
        "criterion 1: PASS (exhaustive n=3 all orders + 1000 random n=4 pairs, {:.1?})",
        t0.elapsed()
    );
    assert!(t0.elapsed().as_secs() < 120, "criterion 1 exceeded its 2 minute budget");
}

#[test]
fn criterion_2_randomized_at_scale() {
    let t0 = Instant::now();
    let (n, m) = (50usize, 300usize);
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut g = random_graph(&mut rng, n, m);
    let order: Vec<Vertex> = (0..n).collect();
    let mut eng = Engine::new(&g, 0, order, ChaCha8Rng::seed_from_u64(99), Needs::all());
    let mut steps = 0u32;
    loop {
        // Full oracle battery.
        for r in eng.verify_all() {
            assert!(r.pass, "step {steps}: {}", r.render());
        }
        // Twenty sampled queries across all ten kinds.
        sample_queries(&eng, &g, &mut rng, 20);
        if g.m() == 0 {
            break;
        }
        let edges = g.edges();
        let (u, v) = edges[rng.gen_range(0..edges.len())];
        eng.delete_edge(u, v).unwrap();
        g.remove_edge(u, v).unwrap();
        steps += 1;
    }
    println!(
        "criterion 2: PASS (n=50 m=300 full deletion sequence, {} steps verified, {:.1?})",
        steps,
        t0.elapsed()
    );
    assert!(t0.elapsed().as_secs() < 600, "criterion 2 exceeded its 10 minute budget");
}

fn sample_queries(eng: &Engine, g: &Digraph, rng: &mut ChaCha8Rng, k: usize) {
    let n = g.n();
    let scc = tarjan_scc(g);
    let edges = g.distinct_edges();
    for i in 0..k {
        match i % 10 {
            0 => {
                let v = rng.gen_range(0..n);
                assert_eq!(
                    eng.count_sccs_without(v),
                    oracle::oracle_scc_without_vertex(g, v).component_count as u32
                );
            }
            1 => {
                let v = rng.gen_range(0..n);
                let lab = oracle::oracle_scc_without_vertex(g, v);
                let sizes: Vec<usize> = lab.members.iter().map(|c| c.len()).collect();
                let want = (
                    *sizes.iter().min().unwrap() as u32,
                    *sizes.iter().max().unwrap() as u32,
                );
                assert_eq!(eng.minmax_without(v), Some(want));
            }
            2 => {
                let v = rng.gen_range(0..n);
                let lab = oracle::oracle_scc_without_vertex(g, v);
                let want = canonical_classes(
                    (0..n).filter(|&u| u != v).map(|u| (u, lab.component_id[u] as u32)),
                );
                assert_eq!(eng.report_without(v), want);
            }
            3 => {
                let (u, w, v) = (rng.gen_range(0..n), rng.gen_range(0..n), rng.gen_range(0..n));
                if u != w && u != v && w != v {
                    assert_eq!(
                        eng.same_without(u, w, v).unwrap(),
                        oracle::oracle_scc_without_vertex(g, v).same(u, w)
                    );
                }
            }
            4 => {
                if let Some((u, w)) = random_sc_pair(&scc, rng) {
                    assert_eq!(
                        eng.separating_vertices(u, w).unwrap(),
                        oracle::oracle_separating_vertices(g, u, w)
                    );
                }
            }
            5 => {
                if let Some(&(x, y)) = pick(&edges, rng) {
                    assert_eq!(
                        eng.count_sccs_without_edge(x, y).unwrap(),
                        oracle::oracle_scc_without_edge(g, x, y).component_count as u32
                    );
                }
            }
            6 => {
                if let Some(&(x, y)) = pick(&edges, rng) {
                    let lab = oracle::oracle_scc_without_edge(g, x, y);
                    let sizes: Vec<usize> = lab.members.iter().map(|c| c.len()).collect();
                    let want = (
                        *sizes.iter().min().unwrap() as u32,
                        *sizes.iter().max().unwrap() as u32,
                    );
                    assert_eq!(eng.minmax_without_edge(x, y).unwrap(), want);
                }
            }
            7 => {
                if let Some(&(x, y)) = pick(&edges, rng) {
                    let lab = oracle::oracle_scc_without_edge(g, x, y);
                    let mut want = lab.members.clone();
                    want.sort();
                    assert_eq!(eng.report_without_edge(x, y).unwrap(), want);
                }
            }
            8 => {
                if let Some(&(x, y)) = pick(&edges, rng) {
                    let (u, w) = (rng.gen_range(0..n), rng.gen_range(0..n));
                    assert_eq!(
                        eng.same_without_edge(u, w, x, y).unwrap(),
                        u == w || oracle::oracle_scc_without_edge(g, x, y).same(u, w)
                    );
                }
            }
            _ => {
                if let Some((u, w)) = random_sc_pair(&scc, rng) {
                    assert_eq!(
                        eng.separating_edges(u, w).unwrap(),
                        oracle::oracle_separating_edges(g, u, w)
                    );
                }
            }
        }
    }
}

fn pick<'a, T>(xs: &'a [T], rng: &mut ChaCha8Rng) -> Option<&'a T> {
    if xs.is_empty() {
        None
    } else {
        Some(&xs[rng.gen_range(0..xs.len())])
    }
}

fn random_sc_pair(scc: &faultline::scc::SccLabeling, rng: &mut ChaCha8Rng) -> Option<(Vertex, Vertex)> {
    let comps: Vec<&Vec<Vertex>> = scc.members.iter().filter(|c| c.len() >= 2).collect();
    let c = pick(&comps, rng)?;
    let u = c[rng.gen_range(0..c.len())];
    loop {
        let w = c[rng.gen_range(0..c.len())];
        if w != u {
            return Some((u, w));
        }
    }
}

#[test]
fn criterion_3_and_4_and_8_structure_envelopes() {
    let t0 = Instant::now();
    for &n in &[64usize, 128, 256] {
        let g = gen_random(n, 3 * n as u64, n as u64, GraphClass::StronglyConnected).unwrap();
        let mut g_probe = g.clone();
        let mut j = build_joint(&g);
        let node_bound = (4.0 * n as f64 * (n as f64).log2()) as u64;
        let tree_bound = 2 * n as u64;
        let move_bound = (n as f64).log2().ceil() as u32;
        let check = |j: &Joint, when: &str| {
            let s = j.stats();
            assert!(
                s.nodes <= node_bound,
                "{when}: node count {} exceeds 4 n log2 n = {node_bound}",
                s.nodes
            );
            assert!(
                s.decompositions <= tree_bound,
                "{when}: {} decompositions exceed 2n = {tree_bound}",
                s.decompositions
            );
            assert!(
                s.max_moves_per_vertex <= move_bound,
                "{when}: vertex moved {} times, bound {move_bound}",
                s.max_moves_per_vertex
            );
        };
        check(&j, "after build");
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        while g_probe.m() > 0 {
            let edges = g_probe.edges();
            let (u, v) = edges[rng.gen_range(0..edges.len())];
            j.delete_edge(u, v).unwrap();
            g_probe.remove_edge(u, v).unwrap();
            check(&j, "after deletion");
        }
    }
    println!(
        "criterion 3: PASS (total nodes <= 4 n log2 n at all times, n in {{64,128,256}}, {:.1?})",
        t0.elapsed()
    );
    println!("criterion 4: PASS (decomposition count <= 2n at all times)");
    println!("criterion 8: PASS (per-tree vertex moves into non-largest parts <= log2 n)");
}

#[test]
fn criterion_5_bridge_lifetime_bound() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for trial in 0..5 {
        let n = 40;
        let mut g = random_graph(&mut rng, n, 200);
        let mut t = BridgeTracker::new(&g, ChaCha8Rng::seed_from_u64(trial));
        while g.m() > 0 {
            let edges = g.edges();
            let (u, v) = edges[rng.gen_range(0..edges.len())];
            t.delete_edge(u, v).unwrap();
            g.remove_edge(u, v).unwrap();
            assert!(
                t.ever_bridges.len() <= 2 * (n - 1),
                "trial {trial}: {} distinct bridges instantiated",
                t.ever_bridges.len()
            );
        }
    }
    println!("criterion 5: PASS (distinct strong bridges <= 2(n-1) over full deletion sequences)");
}

#[test]
fn criterion_6_newly_dominated_volume_bound() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for _ in 0..5 {
        let n = 40;
        let mut g = random_graph(&mut rng, n, 200);
        let scope: Vec<Vertex> = (0..n).collect();
        let mut st = DomState::new(&g, &scope, &scope, 0);
        while g.m() > 0 {
            let edges = g.edges();
            let (u, v) = edges[rng.gen_range(0..edges.len())];
            st.delete_edge(u, v).unwrap();
            g.remove_edge(u, v).unwrap();
        }
        assert!(
            st.nset_volume <= (n * n) as u64,
            "newly-dominated volume {} exceeds n^2",
            st.nset_volume
        );
    }
    println!("criterion 6: PASS (cumulative newly-dominated set volume <= n^2)");
}

#[test]
fn criterion_7_reducible_correctness() {
    let t0 = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for trial in 0..200 {
        let n = rng.gen_range(5..=60);
        let m = rng.gen_range(n as u64..=3 * n as u64);
        let g = gen_random(n, m, trial, GraphClass::ReducibleFlowGraph).unwrap();
        let mut st = ReducibleState::new(&g, 0).unwrap();
        st.verify().unwrap();
        while st.g.m() > 0 {
            let edges = st.g.edges();
            let (u, v) = edges[rng.gen_range(0..edges.len())];
            st.delete_edge(u, v).unwrap();
            st.verify()
                .map_err(|e| format!("trial {trial}: {e}"))
                .unwrap();
        }
    }
    println!(
        "criterion 7: PASS (200 random reducible flow graphs, maintained tree == static + certificate each step, {:.1?})",
        t0.elapsed()
    );
    assert!(t0.elapsed().as_secs() < 300, "criterion 7 exceeded its 5 minute budget");
}

#[test]
fn criterion_9_work_scaling_trend_soft() {
    // Soft criterion: measured, reported, deviations flagged as warnings.
    let t0 = Instant::now();
    let ns = [64usize, 128, 256, 512];
    let mut joint_scans = Vec::new();
    let mut reducible_work = Vec::new();
    let mut naive_scans = Vec::new();
    for &n in &ns {
        let m = 4 * n as u64;
        let g = gen_random(n, m, n as u64, GraphClass::StronglyConnected).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        // Joint structure, full deletion sequence.
        let mut j = build_joint(&g);
        let mut probe = g.clone();
        while probe.m() > 0 {
            let edges = probe.edges();
            let (u, v) = edges[rng.gen_range(0..edges.len())];
            j.delete_edge(u, v).unwrap();
            probe.remove_edge(u, v).unwrap();
        }
        joint_scans.push(j.stats().adjacency_scans as f64);
        // Naive recomputation counter on the same sequence (arithmetic model
        // of n+1 labelings per deletion, executed for the sizes we time).
        if n >= 256 {
            let mut st = faultline::naive::NaiveState::new(&g);
            let mut probe = g.clone();
            let mut rng = ChaCha8Rng::seed_from_u64(9);
            while probe.m() > 0 {
                let edges = probe.edges();
                let (u, v) = edges[rng.gen_range(0..edges.len())];
                st.delete_edge(u, v).unwrap();
                probe.remove_edge(u, v).unwrap();
            }
            naive_scans.push((n, st.scans as f64, j.stats().adjacency_scans as f64));
        }
        // Reducible mode on a reducible instance of the same size.
        let g = gen_random(n, m, n as u64, GraphClass::ReducibleFlowGraph).unwrap();
        let mut st = ReducibleState::new(&g, 0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(19);
        while st.g.m() > 0 {
            let edges = st.g.edges();
            let (u, v) = edges[rng.gen_range(0..edges.len())];
            st.delete_edge(u, v).unwrap();
        }
        reducible_work.push(st.work_units as f64);
    }
    let fit = |ys: &[f64]| -> f64 {
        // Least-squares slope of log y against log n.
        let xs: Vec<f64> = ns.iter().map(|&n| (n as f64).ln()).collect();
        let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
        let mx = xs.iter().sum::<f64>() / xs.len() as f64;
        let my = ly.iter().sum::<f64>() / ly.len() as f64;
        let num: f64 = xs.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
        let den: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
        num / den
    };
    let model_joint: Vec<f64> = ns
        .iter()
        .map(|&n| 4.0 * n as f64 * n as f64 * (n as f64).log2())
        .collect();
    let model_reducible: Vec<f64> = ns.iter().map(|&n| 4.0 * n as f64 * n as f64).collect();
    let (pj, pj_model) = (fit(&joint_scans), fit(&model_joint));
    let (pr, pr_model) = (fit(&reducible_work), fit(&model_reducible));
    println!(
        "criterion 9 (soft): joint scan exponent {pj:.2} vs model {pj_model:.2}; reducible {pr:.2} vs model {pr_model:.2} ({:.1?})",
        t0.elapsed()
    );
    if (pj - pj_model).abs() > 0.35 {
        println!("criterion 9: WARN joint exponent off by {:.2} (> 0.35): flag for investigation", (pj - pj_model).abs());
    }
    if (pr - pr_model).abs() > 0.35 {
        println!("criterion 9: WARN reducible exponent off by {:.2} (> 0.35): flag for investigation", (pr - pr_model).abs());
    }
    for (n, naive, joint) in naive_scans {
        println!("criterion 9: n={n}: joint scans {joint:.0} vs naive scans {naive:.0}");
        if joint > naive {
            println!("criterion 9: WARN joint counter above naive at n={n}: flag for investigation");
        }
    }
    println!("criterion 9: PASS (logged; deviations warn, not fail)");
}

#[test]
fn criterion_10_differential_determinism() {
    use faultline::script::{parse_script, run, Mode, RunConfig};
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    for trial in 0..100 {
        let n = rng.gen_range(3..=8);
        let m = rng.gen_range(0..=20);
        let g = random_graph(&mut rng, n, m);
        // Build a valid random script against a simulated copy.
        let mut sim = g.clone();
        let mut text = String::from("source 1\n");
        for _ in 0..rng.gen_range(5..25) {
            let kind = rng.gen_range(0..12);
            let scc = tarjan_scc(&sim);
            match kind {
                0 if sim.m() > 0 => {
                    let edges = sim.edges();
                    let (u, v) = edges[rng.gen_range(0..edges.len())];
                    text += &format!("del {} {}\n", u + 1, v + 1);
                    sim.remove_edge(u, v).unwrap();
                }
                1 => text += &format!("q-nscc {}\n", rng.gen_range(0..n) + 1),
                2 if n >= 2 => text += &format!("q-sizes {}\n", rng.gen_range(0..n) + 1),
                3 => text += &format!("q-report {}\n", rng.gen_range(0..n) + 1),
                4 if n >= 3 => {
                    let (u, v, w) = (rng.gen_range(0..n), rng.gen_range(0..n), rng.gen_range(0..n));
                    if u != v && v != w && u != w {
                        text += &format!("q-conn {} {} {}\n", u + 1, v + 1, w + 1);
                    }
                }
                5 => {
                    if let Some((u, w)) = random_sc_pair(&scc, &mut rng) {
                        text += &format!("q-seps {} {}\n", u + 1, w + 1);
                    }
                }
                6 => text += "bridges\n",
                7 => {
                    if let Some(&(x, y)) = pick(&sim.distinct_edges(), &mut rng) {
                        let (u, v) = (rng.gen_range(0..n), rng.gen_range(0..n));
                        text += &format!("q-conn-e {} {} {} {}\n", u + 1, v + 1, x + 1, y + 1);
                    }
                }
                8 => {
                    if let Some(&(x, y)) = pick(&sim.distinct_edges(), &mut rng) {
                        text += &format!("q-nscc-e {} {}\nq-sizes-e {} {}\nq-report-e {} {}\n",
                            x + 1, y + 1, x + 1, y + 1, x + 1, y + 1);
                    }
                }
                9 => {
                    if let Some((u, w)) = random_sc_pair(&scc, &mut rng) {
                        text += &format!("q-seps-e {} {}\n", u + 1, w + 1);
                    }
                }
                10 => {
                    let (x, v) = (rng.gen_range(0..n), rng.gen_range(0..n));
                    text += &format!("dom {} {}\n", x + 1, v + 1);
                }
                _ => {
                    text += ["vrc\n", "2vcs\n", "2ecc\n", "2ecs\n"][rng.gen_range(0..4)];
                }
            }
        }
        let script = parse_script(&text, n).unwrap();
        let joint = run(&g, &script, &RunConfig { mode: Mode::Joint, seed: trial, ..Default::default() }).unwrap();
        let naive = run(&g, &script, &RunConfig { mode: Mode::Naive, seed: trial, ..Default::default() }).unwrap();
        assert_eq!(
            joint.output, naive.output,
            "trial {trial}: modes disagree\nscript:\n{text}"
        );
    }
    println!("criterion 10: PASS (joint and naive modes byte-identical on 100 random pairs)");
}

#[test]
fn dominator_maintenance_matches_static_oracle() {
    // Supporting check referenced by several criteria: maintained dominator
    // trees equal the static computation after every deletion, including the
    // parent/sibling certificate.
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    for _ in 0..10 {
        let n = rng.gen_range(3..=12);
        let m = rng.gen_range(0..=3 * n);
        let mut g = random_graph(&mut rng, n, m);
        let scope: Vec<Vertex> = (0..n).collect();
        let mut st = DomState::new(&g, &scope, &scope, 0);
        while g.m() > 0 {
            let edges = g.edges();
            let (u, v) = edges[rng.gen_range(0..edges.len())];
            st.delete_edge(u, v).unwrap();
            g.remove_edge(u, v).unwrap();
            let want = static_dominators(&g, 0);
            assert_eq!(st.parent, want.parent);
            assert!(oracle::verify_dominator_tree(&g, 0, &st.tree()));
        }
    }
    println!("supporting: PASS (decremental dominator tree equals the static oracle per step)");
}
