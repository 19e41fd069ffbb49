//! Polynomial-time solvers for the tractable restrictions: single-switch
//! routing with segregated flows and at most one dynamic link per path
//! (sigma = 0, delta = 1), the same with every node wired at most once
//! (where delta = 1 is implied), and uniform-weight complete graphs with
//! every node wired exactly once (where sigma = 0 is implied).
//!
//! The engine is a maximum-weight b-matching over a savings graph: pairing
//! two wired nodes saves (demand both ways) x (static distance - mu) when
//! positive, and a pair with no static route at all must be paired or the
//! instance is infeasible.

use std::collections::BTreeMap;

use num::Zero;
use thiserror::Error;

use crate::blossom::max_weight_matching;
use crate::exact::{solve_exact, ExactOptions, SolveError, SolveOutcome, SolveResult};
use crate::net::{
    Bound, Configuration, FlowAssignment, FlowPath, HybridNetwork, LinkRef, NodeIx, RRPInstance,
    Wiring,
};
use crate::rational::Rat;
use crate::routing::{evaluate_assignment, Route, Router};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TractableError {
    #[error("precondition violated: not single-switch \u{3c3}=0 \u{3b4}=1")]
    PreconditionViolated,
    #[error("internal: matching solution failed routing re-evaluation")]
    VerificationFailed,
}

/// Which solver served (or would serve) an instance.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SolverTag {
    /// Single switch, segregated flows, one dynamic link per path (given
    /// literally, or implied by every node having at most one wired port).
    SegregatedSingleSwitch,
    /// Uniform-weight complete graph, every node wired exactly once:
    /// optimal paths are single links, so segregation is implied.
    UniformCompleteGraph,
    Exact,
}

fn max_wired_ports(net: &HybridNetwork) -> u64 {
    match &net.wiring {
        Wiring::UniformSingleSwitch { ports_per_node } => *ports_per_node,
        Wiring::Links(links) => {
            let mut per_node: BTreeMap<NodeIx, u64> = BTreeMap::new();
            for l in links {
                *per_node.entry(l.node).or_insert(0) += 1;
            }
            per_node.values().copied().max().unwrap_or(0)
        }
    }
}

fn every_node_wired_once(net: &HybridNetwork) -> bool {
    match &net.wiring {
        Wiring::UniformSingleSwitch { ports_per_node } => *ports_per_node == 1,
        Wiring::Links(links) => {
            let mut per_node: BTreeMap<NodeIx, u64> = BTreeMap::new();
            for l in links {
                *per_node.entry(l.node).or_insert(0) += 1;
            }
            per_node.len() as u64 == net.node_count() && per_node.values().all(|&c| c == 1)
        }
    }
}

fn delta_at_least(b: Bound, k: u64) -> bool {
    match b {
        Bound::Finite(d) => d >= k,
        Bound::Infinite => true,
    }
}

/// The matching solver is exact for these cases and only these cases; the
/// length bound must be absent because segregated static routes may use
/// arbitrarily many links (single-link optima tolerate any lambda >= 1).
pub fn tractable_case(inst: &RRPInstance) -> Option<SolverTag> {
    if inst.network.switches.len() != 1 {
        return None;
    }
    let p = &inst.policy;
    let seg = p.sigma == Bound::Finite(0) && p.lambda.is_infinite();
    if seg && p.delta == Bound::Finite(1) {
        return Some(SolverTag::SegregatedSingleSwitch);
    }
    if seg && max_wired_ports(&inst.network) <= 1 && delta_at_least(p.delta, 1) {
        return Some(SolverTag::SegregatedSingleSwitch);
    }
    if every_node_wired_once(&inst.network)
        && inst.network.is_uniform_complete()
        && delta_at_least(p.delta, 1)
        && delta_at_least(p.lambda, 1)
    {
        return Some(SolverTag::UniformCompleteGraph);
    }
    None
}

/// Static shortest-path weight per demand, `None` for pairs with no static
/// route at all.
pub fn static_baseline(inst: &RRPInstance) -> Vec<Option<Rat>> {
    baseline_routes(inst).into_iter().map(|r| r.map(|(c, _)| c)).collect()
}

fn baseline_routes(inst: &RRPInstance) -> Vec<Option<(Rat, FlowPath)>> {
    let router = Router::with_links(&inst.network, std::iter::empty());
    let policy = crate::net::RoutingPolicy::unrestricted();
    inst.workload
        .demands
        .iter()
        .map(|d| match router.shortest(&policy, &inst.mu, d.src, d.dst) {
            Route::Reached { cost, path } => Some((cost, path)),
            Route::Unreachable => None,
        })
        .collect()
}

/// Savings graph over the wired nodes: vertex capacities are the wired
/// port counts, one simple edge per node pair worth pairing.
#[derive(Clone, Debug)]
pub struct SavingsGraph {
    /// Graph vertex i is network node `nodes[i]`.
    pub nodes: Vec<NodeIx>,
    pub capacities: Vec<u64>,
    pub edges: Vec<SavingsEdge>,
}

#[derive(Clone, Debug)]
pub struct SavingsEdge {
    pub a: usize,
    pub b: usize,
    pub saving: Rat,
    /// No static route exists between the endpoints: this pair must carry a
    /// dynamic link or the instance is infeasible.
    pub mandatory: bool,
}

/// Maximum-total-weight simple subgraph with deg(v) <= capacity(v), by the
/// standard reduction to maximum-weight matching: each vertex becomes
/// capacity-many copies, each edge (u,v,w) becomes a two-node gadget e_u,
/// e_v with copy-to-gadget edges of weight w on both sides and the internal
/// edge (e_u, e_v) also of weight w. Selecting the edge in the subgraph
/// corresponds to matching both gadget nodes outward (gaining 2w); leaving
/// it out keeps the internal edge (gaining w), so matchings of maximum
/// weight select exactly a maximum-weight degree-feasible subgraph.
///
/// Returns the indices of the chosen edges. Weights must be nonnegative.
pub fn max_weight_b_matching(capacities: &[u64], edges: &[(usize, usize, Rat)]) -> Vec<usize> {
    let mut degree = vec![0u64; capacities.len()];
    for (a, b, w) in edges {
        assert!(*w >= Rat::zero(), "savings must be nonnegative");
        degree[*a] += 1;
        degree[*b] += 1;
    }
    // capping copies at the vertex degree keeps the gadget graph small
    let mut copy_start = Vec::with_capacity(capacities.len());
    let mut next = 0usize;
    for (v, cap) in capacities.iter().enumerate() {
        copy_start.push(next);
        next += (*cap).min(degree[v]) as usize;
    }
    let copy_count = |v: usize| -> usize {
        let end = if v + 1 < copy_start.len() { copy_start[v + 1] } else { next };
        end - copy_start[v]
    };
    let gadget_base = next;
    let total_vertices = gadget_base + 2 * edges.len();

    let mut medges = Vec::new();
    for (k, (a, b, w)) in edges.iter().enumerate() {
        let e_a = gadget_base + 2 * k;
        let e_b = gadget_base + 2 * k + 1;
        for t in 0..copy_count(*a) {
            medges.push((copy_start[*a] + t, e_a, w.clone()));
        }
        for t in 0..copy_count(*b) {
            medges.push((copy_start[*b] + t, e_b, w.clone()));
        }
        medges.push((e_a, e_b, w.clone()));
    }
    let mate = max_weight_matching(total_vertices, &medges);

    let is_copy_of = |m: Option<usize>, v: usize| -> bool {
        m.is_some_and(|x| x >= copy_start[v] && x < copy_start[v] + copy_count(v))
    };
    (0..edges.len())
        .filter(|&k| {
            let e_a = gadget_base + 2 * k;
            let e_b = gadget_base + 2 * k + 1;
            is_copy_of(mate[e_a], edges[k].0) && is_copy_of(mate[e_b], edges[k].1)
        })
        .collect()
}

/// Build the savings graph for a single-switch segregated instance.
/// Baselines must align with the instance's demand list.
pub fn build_savings_graph(inst: &RRPInstance, baseline: &[Option<Rat>]) -> SavingsGraph {
    let net = &inst.network;
    let mut nodes: Vec<NodeIx> = Vec::new();
    let mut vertex_of: BTreeMap<NodeIx, usize> = BTreeMap::new();
    let mut capacities = Vec::new();
    let mut register = |v: NodeIx, nodes: &mut Vec<NodeIx>, caps: &mut Vec<u64>| {
        *vertex_of.entry(v).or_insert_with(|| {
            nodes.push(v);
            caps.push(net.wired_ports(v));
            nodes.len() - 1
        })
    };

    // combined demand per unordered pair
    let mut combined: BTreeMap<(NodeIx, NodeIx), (Rat, Option<Rat>)> = BTreeMap::new();
    for (d, base) in inst.workload.demands.iter().zip(baseline) {
        let key = (d.src.min(d.dst), d.src.max(d.dst));
        let entry = combined.entry(key).or_insert_with(|| (Rat::zero(), base.clone()));
        entry.0 += &d.amount;
    }

    let mut edges = Vec::new();
    for ((u, v), (amount, base)) in combined {
        if net.wired_ports(u) == 0 || net.wired_ports(v) == 0 {
            // no dynamic link can ever serve this pair; a missing static
            // route is caught by the solver's feasibility check
            continue;
        }
        match base {
            None => {
                let a = register(u, &mut nodes, &mut capacities);
                let b = register(v, &mut nodes, &mut capacities);
                edges.push(SavingsEdge { a, b, saving: Rat::zero(), mandatory: true });
            }
            Some(w) => {
                let gain = &w - &inst.mu;
                if gain > Rat::zero() {
                    let a = register(u, &mut nodes, &mut capacities);
                    let b = register(v, &mut nodes, &mut capacities);
                    edges.push(SavingsEdge { a, b, saving: amount * gain, mandatory: false });
                }
            }
        }
    }
    SavingsGraph { nodes, capacities, edges }
}

/// Exact polynomial solver for the segregated single-switch cases.
///
/// The optimum is the static baseline minus the best total saving of a
/// degree-feasible dynamic-link set; the result is rebuilt as a concrete
/// configuration and flow assignment and re-evaluated through the routing
/// engine before being returned.
pub fn solve_segregated_single_switch(inst: &RRPInstance) -> Result<SolveResult, TractableError> {
    if tractable_case(inst).is_none() {
        return Err(TractableError::PreconditionViolated);
    }
    let net = &inst.network;
    let routes = baseline_routes(inst);

    // demands that cannot be served statically nor by any dynamic link
    for (d, r) in inst.workload.demands.iter().zip(&routes) {
        if r.is_none() && (net.wired_ports(d.src) == 0 || net.wired_ports(d.dst) == 0) {
            return Ok(SolveResult {
                outcome: SolveOutcome::Infeasible,
                configurations_examined: 0,
            });
        }
    }

    let baseline: Vec<Option<Rat>> =
        routes.iter().map(|r| r.as_ref().map(|(c, _)| c.clone())).collect();
    let graph = build_savings_graph(inst, &baseline);

    // lift mandatory edges above the sum of all finite savings so the
    // matching covers as many of them as possible; coverage is then checked
    let lift: Rat = graph
        .edges
        .iter()
        .filter(|e| !e.mandatory)
        .map(|e| e.saving.clone())
        .fold(Rat::zero(), |acc, s| acc + s)
        + Rat::from_integer(1.into());
    let weighted: Vec<(usize, usize, Rat)> = graph
        .edges
        .iter()
        .map(|e| (e.a, e.b, if e.mandatory { lift.clone() } else { e.saving.clone() }))
        .collect();
    let chosen = max_weight_b_matching(&graph.capacities, &weighted);

    let chosen_pairs: std::collections::BTreeSet<(NodeIx, NodeIx)> = chosen
        .iter()
        .map(|&k| {
            let e = &graph.edges[k];
            let (u, v) = (graph.nodes[e.a], graph.nodes[e.b]);
            (u.min(v), u.max(v))
        })
        .collect();
    for (k, e) in graph.edges.iter().enumerate() {
        if e.mandatory && !chosen.contains(&k) {
            return Ok(SolveResult {
                outcome: SolveOutcome::Infeasible,
                configurations_examined: 0,
            });
        }
    }

    // realize each chosen pair as a port pairing of the single switch
    let mut free_ports: BTreeMap<NodeIx, Vec<u64>> = BTreeMap::new();
    let mut matching = Vec::new();
    for &(u, v) in &chosen_pairs {
        let up = free_ports
            .entry(u)
            .or_insert_with(|| net.ports_of_node(u).into_iter().map(|(_, p)| p).collect());
        let pu = up.remove(0);
        let vp = free_ports
            .entry(v)
            .or_insert_with(|| net.ports_of_node(v).into_iter().map(|(_, p)| p).collect());
        let pv = vp.remove(0);
        matching.push((pu, pv));
    }
    let configuration = Configuration::normalized(vec![matching]);

    // per-demand optimum: its own dynamic link, or the static baseline
    let mut total = Rat::zero();
    let mut paths = Vec::with_capacity(inst.workload.demands.len());
    for (d, route) in inst.workload.demands.iter().zip(&routes) {
        let key = (d.src.min(d.dst), d.src.max(d.dst));
        let dynamic_cost = if chosen_pairs.contains(&key) { Some(inst.mu.clone()) } else { None };
        let static_cost = route.as_ref().map(|(c, _)| c.clone());
        let (cost, path) = match (dynamic_cost, static_cost) {
            (Some(dc), Some(sc)) if sc <= dc => {
                (sc, route.as_ref().expect("static route").1.clone())
            }
            (Some(dc), _) => (
                dc,
                FlowPath { src: d.src, dst: d.dst, links: vec![LinkRef::dynamic(d.src, d.dst)] },
            ),
            (None, Some(sc)) => (sc, route.as_ref().expect("static route").1.clone()),
            (None, None) => {
                return Ok(SolveResult {
                    outcome: SolveOutcome::Infeasible,
                    configurations_examined: 0,
                })
            }
        };
        total += &d.amount * cost;
        paths.push(path);
    }
    let assignment = FlowAssignment { paths, total_cost: total.clone() };

    // independent re-evaluation through the routing engine
    match evaluate_assignment(inst, &configuration, &assignment) {
        Ok(check) if check == total => {}
        _ => return Err(TractableError::VerificationFailed),
    }

    Ok(SolveResult {
        outcome: SolveOutcome::Optimal { cost: total, configuration, assignment },
        configurations_examined: 0,
    })
}

#[derive(Debug, Error)]
pub enum DispatchError {
    #[error(transparent)]
    Exact(#[from] SolveError),
    #[error(transparent)]
    Tractable(#[from] TractableError),
}

/// Route to the matching solver when a tractable case applies, otherwise
/// fall back to exhaustive search under its size guard.
pub fn dispatch(
    inst: &RRPInstance,
    exact_opts: &ExactOptions,
) -> Result<(SolverTag, SolveResult), DispatchError> {
    match tractable_case(inst) {
        Some(tag) => Ok((tag, solve_segregated_single_switch(inst)?)),
        None => Ok((SolverTag::Exact, solve_exact(inst, exact_opts)?)),
    }
}
