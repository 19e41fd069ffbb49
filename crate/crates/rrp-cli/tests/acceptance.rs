//! Acceptance suite: one test per criterion, each printing a pass line.
//! Expected values are either computed by independent oracles inside this
//! file (path enumeration, Pascal-triangle binomials, formula
//! substitution) or asserted as exact rationals.
//!
//! Run with `cargo test -p rrp-cli --test acceptance -- --nocapture`.

use std::fs;
use std::process::Command;
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use rrp_core::exact::{enumerate_switch_matchings, solve_exact, ExactOptions};
use rrp_core::families::{attach_uniform_switch, generate, Family};
use rrp_core::fileio::{parse_instance, serialize_instance};
use rrp_core::forge::{
    evaluate_components, matching_on_w, oracle_exact_cover, reduce_bisection,
    reduce_rxc3_hypercube, reduce_rxc3_tree, witness_bisection, witness_rxc3_hypercube,
    witness_rxc3_tree, BisectionInstance, Rxc3Instance,
};
use rrp_core::net::{dynamic_links, Bound, Demand, NodeIx, RRPInstance, RoutingPolicy, Workload};
use rrp_core::rational::{frac, rat_u, Rat};
use rrp_core::routing::{Route, Router};
use rrp_core::testkit::{
    min_simple_path_cost, random_configuration, random_instance, telephone, RandomInstanceOptions,
};
use rrp_core::tractable::{dispatch, SolverTag};

fn pass(criterion: u32, name: &str, started: Instant) {
    println!("ACCEPTANCE {criterion} ({name}): PASS [{:.2}s]", started.elapsed().as_secs_f64());
}

// Shared deterministic corpora, regenerated identically by criterion 7.

const SEED_ROUTING: u64 = 0x0AC1_0001;
const SEED_TRACTABLE: u64 = 0x0AC1_0002;
const SEED_CLIQUE: u64 = 0x0AC1_0003;

fn routing_corpus() -> Vec<RRPInstance> {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED_ROUTING);
    let opts = RandomInstanceOptions::default();
    (0..50).map(|_| random_instance(&mut rng, &opts)).collect()
}

fn tractable_corpus() -> Vec<RRPInstance> {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED_TRACTABLE);
    let opts = RandomInstanceOptions::segregated();
    let mut out = Vec::new();
    while out.len() < 100 {
        let inst = random_instance(&mut rng, &opts);
        if !inst.network.switches.is_empty() {
            out.push(inst);
        }
    }
    out
}

fn clique_corpus() -> Vec<RRPInstance> {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED_CLIQUE);
    let mut out = Vec::new();
    for clique_index in [3u32, 4] {
        // K_4 and K_5, every node wired exactly once
        for _set in 0..10 {
            let n = clique_index as u64 + 1;
            let net = attach_uniform_switch(generate(Family::Complete, clique_index), 1);
            let mut demands: Vec<Demand> = Vec::new();
            use rand::Rng;
            let want = rng.gen_range(1..=5usize);
            while demands.len() < want {
                let src = rng.gen_range(0..n);
                let dst = rng.gen_range(0..n);
                if src == dst || demands.iter().any(|d| d.src == src && d.dst == dst) {
                    continue;
                }
                demands.push(Demand { src, dst, amount: rat_u(rng.gen_range(1..=4)) });
            }
            let mu = [frac(1, 4), frac(1, 2), frac(3, 2)][rng.gen_range(0..3)].clone();
            for sigma in [Bound::Finite(0), Bound::Infinite] {
                out.push(RRPInstance {
                    network: net.clone(),
                    mu: mu.clone(),
                    workload: Workload::new(demands.clone()),
                    kappa: rat_u(1000),
                    policy: RoutingPolicy {
                        sigma,
                        delta: Bound::Infinite,
                        lambda: Bound::Infinite,
                    },
                });
            }
        }
    }
    out
}

/// Pascal's triangle: an independent source of binomial coefficients.
fn pascal_row(n: usize) -> Vec<u64> {
    let mut row = vec![1u64];
    for _ in 0..n {
        let mut next = vec![1u64];
        for w in row.windows(2) {
            next.push(w[0] + w[1]);
        }
        next.push(1);
        let mut with_edge = vec![row[0]];
        with_edge.extend(row.windows(2).map(|w| w[0] + w[1]));
        with_edge.push(1);
        row = with_edge;
    }
    row
}

#[test]
fn acceptance_1_routing_oracle_equivalence() {
    let started = Instant::now();
    let corpus = routing_corpus();
    assert_eq!(corpus.len(), 50);
    let mut rng = ChaCha8Rng::seed_from_u64(SEED_ROUTING ^ 0xFF);
    let mut pairs_checked = 0u64;
    for inst in &corpus {
        let cfg = random_configuration(&mut rng, &inst.network);
        let links: Vec<(NodeIx, NodeIx)> =
            dynamic_links(&inst.network, &cfg, false).unwrap().iter().map(|l| (l.u, l.v)).collect();
        let router = Router::with_links(&inst.network, links.iter().copied());
        let n = inst.network.node_count();
        for src in 0..n {
            for dst in 0..n {
                let oracle =
                    min_simple_path_cost(&inst.network, &links, &inst.policy, &inst.mu, src, dst);
                match (oracle, router.shortest(&inst.policy, &inst.mu, src, dst)) {
                    (Some(c), Route::Reached { cost, .. }) => assert_eq!(cost, c),
                    (None, Route::Unreachable) => {}
                    (o, r) => panic!("oracle {o:?} vs router {r:?}"),
                }
                pairs_checked += 1;
            }
        }
    }
    assert!(pairs_checked >= 50 * 4);
    assert!(started.elapsed().as_secs() < 60, "criterion 1 over time budget");
    pass(1, "routing oracle equivalence", started);
}

#[test]
fn acceptance_2_tractable_equals_exact() {
    let started = Instant::now();
    let corpus = tractable_corpus();
    assert_eq!(corpus.len(), 100);
    for (i, inst) in corpus.iter().enumerate() {
        let (tag, poly) = dispatch(inst, &ExactOptions::default()).unwrap();
        assert_eq!(tag, SolverTag::SegregatedSingleSwitch, "instance {i}");
        let exact = solve_exact(inst, &ExactOptions::default()).unwrap();
        assert_eq!(poly.optimal_cost(), exact.optimal_cost(), "instance {i}");
    }
    assert!(started.elapsed().as_secs() < 120, "criterion 2 over time budget");
    pass(2, "tractable = exact on 100 segregated instances", started);
}

#[test]
fn acceptance_3_uniform_complete_graphs() {
    let started = Instant::now();
    let corpus = clique_corpus();
    assert_eq!(corpus.len(), 40); // {K4, K5} x 10 demand sets x sigma in {0, inf}
    for (i, inst) in corpus.iter().enumerate() {
        let (tag, poly) = dispatch(inst, &ExactOptions::default()).unwrap();
        assert!(
            matches!(tag, SolverTag::UniformCompleteGraph | SolverTag::SegregatedSingleSwitch),
            "instance {i} dispatched to {tag:?}"
        );
        let exact = solve_exact(inst, &ExactOptions::default()).unwrap();
        assert_eq!(poly.optimal_cost(), exact.optimal_cost(), "instance {i}");
    }
    pass(3, "uniform complete graphs match exact", started);
}

#[test]
fn acceptance_4_bisection_reduction() {
    let started = Instant::now();
    // independent formula substitution for n = 4, k = 4:
    //   mu      = 1 / (6 n^2)                       = 1/96
    //   alpha   = kappa_alpha = 24 n^6              = 98304
    //   beta    = 6 n^3                             = 384
    //   kappa_beta = 3 n^4 + n^3 / 2 + n^2          = 816
    //   kappa_unit = k/2 + 1/8 - 1/(4n) + k/(3 n^2) = 103/48
    let n: i64 = 4;
    let k: i64 = 4;
    let mu = Rat::new(1.into(), (6 * n * n).into());
    let kappa_alpha = rat_u(24) * rat_u((n as u64).pow(6));
    let kappa_beta = rat_u(3) * rat_u((n as u64).pow(4))
        + Rat::new((n * n * n).into(), 2.into())
        + rat_u((n * n) as u64);
    let kappa_unit = Rat::new(k.into(), 2.into()) + frac(1, 8) - Rat::new(1.into(), (4 * n).into())
        + Rat::new(k.into(), (3 * n * n).into());
    assert_eq!(mu, frac(1, 96));
    assert_eq!(kappa_alpha, rat_u(98304));
    assert_eq!(kappa_beta, rat_u(816));
    assert_eq!(kappa_unit, frac(103, 48));

    let art = reduce_bisection(&BisectionInstance::k4(4), Family::Hypercube).unwrap();
    assert_eq!(art.artifact.instance.mu, mu);
    assert_eq!(art.artifact.instance.kappa, &kappa_alpha + &kappa_beta + &kappa_unit);
    assert_eq!(art.artifact.params["kappa_alpha"], "98304");
    assert_eq!(art.artifact.params["kappa_beta"], "816");
    assert_eq!(art.artifact.params["kappa_unit"], "103/48");

    let (cfg, asg) =
        witness_bisection(&art, &["1".into(), "2".into()], &["3".into(), "4".into()]).unwrap();
    let costs = evaluate_components(&art.artifact, &cfg, &asg).unwrap();
    assert_eq!(costs.alpha, kappa_alpha, "forced chain component");
    assert_eq!(costs.beta, kappa_beta, "forced star component");
    assert!(costs.total <= art.artifact.instance.kappa);

    // the binary agrees: reduce writes the witness, evaluate confirms yes
    let dir = tempfile::tempdir().unwrap();
    fs::write(
        dir.path().join("k4.json"),
        r#"{"edges": [["1","2"],["1","3"],["1","4"],["2","3"],["2","4"],["3","4"]], "k": 4}"#,
    )
    .unwrap();
    fs::write(dir.path().join("cert.json"), r#"{"a": ["1","2"], "b": ["3","4"]}"#).unwrap();
    let outdir = dir.path().join("artifact");
    let out = Command::new(env!("CARGO_BIN_EXE_rrp"))
        .args([
            "reduce",
            "bisection",
            "--source",
            dir.path().join("k4.json").to_str().unwrap(),
            "--out",
            outdir.to_str().unwrap(),
            "--certificate",
            dir.path().join("cert.json").to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let eval = Command::new(env!("CARGO_BIN_EXE_rrp"))
        .args([
            "evaluate",
            outdir.join("instance.json").to_str().unwrap(),
            outdir.join("witness.config.json").to_str().unwrap(),
            outdir.join("witness.flows.json").to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert_eq!(eval.status.code(), Some(0), "cmd_evaluate must confirm yes");
    let eval_json: serde_json::Value = serde_json::from_slice(&eval.stdout).unwrap();
    assert_eq!(eval_json["decision"], "yes");

    assert!(started.elapsed().as_secs() < 10, "criterion 4 over time budget");
    pass(4, "bisection reduction budgets and witness", started);
}

#[test]
fn acceptance_5_tree_reduction() {
    let started = Instant::now();
    let src = Rxc3Instance::small_yes();
    let art = reduce_rxc3_tree(&src, Family::Hypercube).unwrap();

    // closed forms at n = 2, d = 1: N = 6*2^d + 28n + 4 = 72 nodes and
    // 9*2^d + 43n + 6 = 110 demand-graph edges
    assert_eq!(art.artifact.params["demand_graph_nodes"], "72");
    assert_eq!(art.artifact.params["demand_graph_edges"], "110");
    assert_eq!(art.artifact.instance.workload.demands.len(), 110);

    // witness from the cover {c_1, c_2} costs exactly kappa = 428
    let cover = oracle_exact_cover(&src).unwrap().expect("yes-instance");
    assert_eq!(cover, vec![0, 1]);
    let (cfg, asg) = witness_rxc3_tree(&art, &cover).unwrap();
    let costs = evaluate_components(&art.artifact, &cfg, &asg).unwrap();
    assert_eq!(costs.total, rat_u(428));
    assert_eq!(art.artifact.instance.kappa, rat_u(428));

    // degree profile of the core demand graph: 3 everywhere except the
    // grey leaves and the clause middle nodes, which have degree 2
    let mut degree: std::collections::BTreeMap<NodeIx, u64> = Default::default();
    for i in art.artifact.classes.alpha.clone() {
        let d = &art.artifact.instance.workload.demands[i];
        *degree.entry(d.src).or_insert(0) += 1;
        *degree.entry(d.dst).or_insert(0) += 1;
    }
    let n = src.n();
    for (node, deg) in degree {
        let role = &art.artifact.roles[&node];
        let exceptional =
            (1..=n).any(|i| role == &format!("leaf_grey[{i}]")) || role.starts_with("clause_v[");
        assert_eq!(deg, if exceptional { 2 } else { 3 }, "role {role}");
    }

    assert!(started.elapsed().as_secs() < 5, "criterion 5 over time budget");
    pass(5, "tree reduction closed forms and witness = 428", started);
}

#[test]
fn acceptance_6_hypercube_reduction() {
    let started = Instant::now();
    let src = Rxc3Instance::small_yes();
    let mu = frac(1, 2);
    let art = reduce_rxc3_hypercube(&src, &mu).unwrap();
    let (n, m, dim) = (art.params.n, art.params.m, art.params.dim);
    assert_eq!((n, m, dim), (2, 3, 24));

    // beta and alpha are the smallest integers strictly over their bounds
    let unit_weight = rat_u(m as u64 + 1) + rat_u(2) * &mu;
    let base = rat_u(3 * n) * &unit_weight;
    let beta_bound = (&base / &mu).max(&base / (rat_u(1) - &mu));
    assert_eq!(art.params.beta, rat_u(61));
    assert!(art.params.beta > beta_bound);
    assert!(&art.params.beta - rat_u(1) <= beta_bound);
    let alpha_bound = rat_u(15 * n) * &art.params.beta + rat_u(9 * n * n) + rat_u(9 * n);
    assert_eq!(art.params.alpha, rat_u(1885));
    assert!(art.params.alpha > alpha_bound);
    assert_eq!(art.params.kappa_beta, rat_u(1281));
    assert_eq!(art.params.kappa_unit, rat_u(30));

    // pairwise distances of the planted nodes
    for (i, &a) in art.clauses.iter().enumerate() {
        for &b in &art.clauses[i + 1..] {
            assert!((a ^ b).count_ones() >= 6, "clause nodes too close");
        }
    }
    for (i, &a) in art.elements.iter().enumerate() {
        for &b in &art.elements[i + 1..] {
            assert!((a ^ b).count_ones() >= 8, "element nodes too close");
        }
    }

    // the matching over the middle levels is perfect on its domain and
    // never pairs static neighbors; counted against Pascal binomials
    let row = pascal_row(dim as usize);
    let w_size: u64 = (9..=15).map(|l| row[l]).sum();
    let excluded = art.excluded_w.len() as u64;
    assert_eq!(excluded, 21 * n, "element and clause machinery inside W");
    let mut matched = std::collections::HashSet::new();
    let mut pair_count = 0u64;
    for (u, v) in matching_on_w(m, &art.excluded_w) {
        assert!((u ^ v).count_ones() >= 2, "adjacent pair in matching");
        for w in [u, v] {
            let level = dim - w.count_ones();
            assert!((9..=15).contains(&level), "pair outside the middle levels");
            assert!(!art.excluded_w.contains(&w));
            assert!(matched.insert(w), "node matched twice");
        }
        pair_count += 1;
    }
    assert_eq!(2 * pair_count, w_size - excluded, "matching not perfect");
    assert_eq!(pair_count, art.params.alpha_w_count);

    // independent count of the heavy demands: all nodes within m+5 of the
    // root except the ports, plus the matching
    let near_root: u64 = (0..=(m as usize + 5)).map(|l| row[l]).sum();
    let expected_alpha = (near_root - n) + pair_count;
    assert_eq!(art.params.alpha_count(), expected_alpha);
    assert_eq!(expected_alpha, 8_388_585);

    // streamed witness evaluation: exact components, sigma and Delta_S
    let cover = oracle_exact_cover(&src).unwrap().expect("yes-instance");
    let witness = witness_rxc3_hypercube(&art, &cover).unwrap();
    let eval = witness.evaluate().unwrap();
    assert_eq!(eval.alpha_links, expected_alpha);
    assert_eq!(eval.alpha_component, art.params.kappa_alpha);
    assert_eq!(eval.beta_component, art.params.kappa_beta);
    assert_eq!(eval.unit_component, art.params.kappa_unit);
    assert_eq!(eval.total, art.params.kappa);
    assert!(eval.max_alternations <= 3);
    assert_eq!(eval.max_links_per_node, 1);

    assert!(started.elapsed().as_secs() < 300, "criterion 6 over time budget");
    pass(6, "hypercube reduction, streamed witness = kappa", started);
}

#[test]
fn acceptance_7_structural_properties() {
    let started = Instant::now();

    // matching enumeration: T(4) = 10
    assert_eq!(enumerate_switch_matchings(4).count(), 10);
    assert_eq!(telephone(4), 10);

    // optimum is nondecreasing in mu on a fixed 4-node instance
    let mut net = rrp_core::net::HybridNetwork::explicit(
        ["a", "b", "c", "d"].iter().map(|s| s.to_string()).collect(),
    );
    for (u, v) in [(0, 1), (1, 2), (2, 3)] {
        net.static_links.push(rrp_core::net::StaticLink { u, v, weight: rat_u(1) });
    }
    net.switches.push(rrp_core::net::Switch { id: "s".into(), ports: 4 });
    net.wiring = rrp_core::net::Wiring::Links(
        (0..4)
            .map(|i| rrp_core::net::SwitchLink { node: i, ext_port: 0, switch: 0, sw_port: i })
            .collect(),
    );
    let base = RRPInstance {
        network: net,
        mu: rat_u(0),
        workload: Workload::new(vec![
            Demand { src: 0, dst: 3, amount: rat_u(2) },
            Demand { src: 2, dst: 0, amount: rat_u(3) },
        ]),
        kappa: rat_u(100),
        policy: RoutingPolicy::unrestricted(),
    };
    let mut last: Option<Rat> = None;
    for mu in [rat_u(0), frac(1, 4), frac(1, 2), rat_u(1)] {
        let mut inst = base.clone();
        inst.mu = mu;
        let cost = solve_exact(&inst, &ExactOptions::default())
            .unwrap()
            .optimal_cost()
            .cloned()
            .expect("feasible");
        if let Some(prev) = &last {
            assert!(cost >= *prev, "optimum decreased in mu");
        }
        last = Some(cost);
    }

    // serialization round-trip identity over every instance the other
    // criteria generate (the hypercube instance as its sampled export)
    let mut corpus: Vec<RRPInstance> = Vec::new();
    corpus.extend(routing_corpus());
    corpus.extend(tractable_corpus());
    corpus.extend(clique_corpus());
    corpus.push(
        reduce_bisection(&BisectionInstance::k4(4), Family::Hypercube).unwrap().artifact.instance,
    );
    corpus.push(
        reduce_rxc3_tree(&Rxc3Instance::small_yes(), Family::Hypercube).unwrap().artifact.instance,
    );
    for inst in &corpus {
        let text = serialize_instance(inst);
        let back = parse_instance(&text).unwrap();
        assert_eq!(&back, inst, "round trip changed an instance");
    }

    let art = reduce_rxc3_hypercube(&Rxc3Instance::small_yes(), &frac(1, 2)).unwrap();
    let mut sample = Vec::new();
    art.write_instance_json(&mut sample, Some(50_000)).unwrap();
    let text = String::from_utf8(sample).unwrap();
    let parsed = parse_instance(&text).unwrap();
    assert_eq!(parsed.workload.demands.len(), 12 * 2 + 50_000);
    let back = parse_instance(&serialize_instance(&parsed)).unwrap();
    assert_eq!(back, parsed, "hypercube sample round trip");

    pass(7, "matching counts, mu-monotonicity, round-trips", started);
}
