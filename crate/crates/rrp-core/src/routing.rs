//! Policy-constrained shortest paths over the augmented network and exact
//! cost evaluation of flow paths.
//!
//! The search is a label-setting shortest-path over states
//! (node, last link kind, alternations, dynamic links, total links) with the
//! counter dimensions dropped for infinite bounds. Ties are broken by fewest
//! links, then fewest dynamic links, then lexicographically smallest node
//! sequence, so results are fully deterministic.

use std::cmp::Ordering;
use std::collections::{BTreeSet, BinaryHeap, HashMap, HashSet};
use std::fmt;

use num::Zero;
use thiserror::Error;

use crate::net::{
    dynamic_links, CfgError, Configuration, FlowAssignment, FlowPath, HybridNetwork, LinkKind,
    LinkRef, NodeIx, RRPInstance, RoutingPolicy,
};
use crate::rational::Rat;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PolicyParam {
    Sigma,
    Delta,
    Lambda,
}

impl fmt::Display for PolicyParam {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PolicyParam::Sigma => write!(f, "\u{3c3}"),
            PolicyParam::Delta => write!(f, "\u{3b4}"),
            PolicyParam::Lambda => write!(f, "\u{3bb}"),
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PathError {
    #[error("link not present at links[{index}]")]
    LinkNotPresent { index: usize },
    #[error("policy violated: {param} at links[{index}]")]
    PolicyViolated { param: PolicyParam, index: usize },
    #[error("discontinuous path at links[{index}]")]
    Discontinuous { index: usize },
}

/// Outcome of a single-demand search.
#[derive(Clone, Debug, PartialEq)]
pub enum Route {
    Reached { cost: Rat, path: FlowPath },
    Unreachable,
}

impl Route {
    pub fn cost(&self) -> Option<&Rat> {
        match self {
            Route::Reached { cost, .. } => Some(cost),
            Route::Unreachable => None,
        }
    }
}

/// Outcome of routing a whole workload under a fixed configuration.
#[derive(Clone, Debug, PartialEq)]
pub enum ConfigCost {
    Feasible { cost: Rat, assignment: FlowAssignment },
    Infeasible { demand_index: usize },
}

/// Precomputed search structure for one (network, configuration) pair.
/// Pure and immutable once built; safe to share across threads.
pub struct Router<'n> {
    net: &'n HybridNetwork,
    /// Deduplicated static adjacency (cheapest parallel link), explicit nets only.
    static_adj: Option<Vec<Vec<(NodeIx, Rat)>>>,
    dyn_adj: HashMap<NodeIx, Vec<NodeIx>>,
    dyn_set: BTreeSet<(NodeIx, NodeIx)>,
}

impl<'n> Router<'n> {
    pub fn new(
        net: &'n HybridNetwork,
        cfg: &Configuration,
        allow_self_loops: bool,
    ) -> Result<Self, CfgError> {
        let links = dynamic_links(net, cfg, allow_self_loops)?;
        Ok(Self::with_links(net, links.iter().map(|l| (l.u, l.v))))
    }

    /// Build from an explicit edge list of dynamic links.
    pub fn with_links(
        net: &'n HybridNetwork,
        links: impl IntoIterator<Item = (NodeIx, NodeIx)>,
    ) -> Self {
        let mut dyn_set = BTreeSet::new();
        let mut dyn_adj: HashMap<NodeIx, Vec<NodeIx>> = HashMap::new();
        for (u, v) in links {
            if dyn_set.insert((u.min(v), u.max(v))) {
                dyn_adj.entry(u).or_default().push(v);
                if u != v {
                    dyn_adj.entry(v).or_default().push(u);
                }
            }
        }
        for nbrs in dyn_adj.values_mut() {
            nbrs.sort_unstable();
            nbrs.dedup();
        }
        let static_adj = match &net.nodes {
            crate::net::NodeSet::Explicit(_) => {
                let n = net.node_count() as usize;
                let mut adj = vec![Vec::new(); n];
                for (v, row) in adj.iter_mut().enumerate() {
                    *row = net.static_neighbors(v as NodeIx);
                }
                Some(adj)
            }
            crate::net::NodeSet::Hypercube { .. } => None,
        };
        Router { net, static_adj, dyn_adj, dyn_set }
    }

    fn static_neighbors(&self, v: NodeIx) -> Vec<(NodeIx, Rat)> {
        match &self.static_adj {
            Some(adj) => adj[v as usize].clone(),
            None => self.net.static_neighbors(v),
        }
    }

    pub fn has_dynamic(&self, u: NodeIx, v: NodeIx) -> bool {
        self.dyn_set.contains(&(u.min(v), u.max(v)))
    }

    /// Minimum-weight policy-feasible path from `src` to `dst`, or
    /// `Unreachable` when no feasible path exists. `src == dst` yields the
    /// empty path at cost zero.
    pub fn shortest(&self, policy: &RoutingPolicy, mu: &Rat, src: NodeIx, dst: NodeIx) -> Route {
        if src == dst {
            return Route::Reached { cost: Rat::zero(), path: FlowPath::empty(src) };
        }

        #[derive(Clone, PartialEq, Eq)]
        struct Label {
            cost: Rat,
            len: u64,
            dynamic: u64,
            nodes: Vec<NodeIx>,
            links: Vec<LinkRef>,
            last: Option<LinkKind>,
            alt: u64,
        }
        // Min-first ordering on (cost, len, dynamic, node sequence); the
        // sequence only decides ties between equal-length labels.
        impl Ord for Label {
            fn cmp(&self, other: &Self) -> Ordering {
                self.cost
                    .cmp(&other.cost)
                    .then_with(|| self.len.cmp(&other.len))
                    .then_with(|| self.dynamic.cmp(&other.dynamic))
                    .then_with(|| self.nodes.cmp(&other.nodes))
            }
        }
        impl PartialOrd for Label {
            fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
                Some(self.cmp(other))
            }
        }

        // State key: counters only enter the key for finite bounds; an
        // unconstrained counter is irrelevant for future feasibility.
        let key = |node: NodeIx, last: Option<LinkKind>, alt: u64, dy: u64, len: u64| {
            (
                node,
                match last {
                    None => 0u8,
                    Some(LinkKind::Static) => 1,
                    Some(LinkKind::Dynamic) => 2,
                },
                if policy.sigma.is_infinite() { 0 } else { alt },
                if policy.delta.is_infinite() { 0 } else { dy },
                if policy.lambda.is_infinite() { 0 } else { len },
            )
        };

        let mut heap: BinaryHeap<std::cmp::Reverse<Label>> = BinaryHeap::new();
        let mut settled: HashSet<(NodeIx, u8, u64, u64, u64)> = HashSet::new();
        heap.push(std::cmp::Reverse(Label {
            cost: Rat::zero(),
            len: 0,
            dynamic: 0,
            nodes: vec![src],
            links: Vec::new(),
            last: None,
            alt: 0,
        }));

        while let Some(std::cmp::Reverse(label)) = heap.pop() {
            let at = *label.nodes.last().expect("non-empty node sequence");
            if !settled.insert(key(at, label.last, label.alt, label.dynamic, label.len)) {
                continue;
            }
            if at == dst {
                return Route::Reached {
                    cost: label.cost,
                    path: FlowPath { src, dst, links: label.links },
                };
            }

            let mut push = |to: NodeIx, kind: LinkKind, weight: Rat| {
                let alt = label.alt
                    + match label.last {
                        Some(last) if last != kind => 1,
                        _ => 0,
                    };
                let dynamic = label.dynamic + u64::from(kind == LinkKind::Dynamic);
                let len = label.len + 1;
                if !policy.sigma.allows(alt)
                    || !policy.delta.allows(dynamic)
                    || !policy.lambda.allows(len)
                {
                    return;
                }
                if settled.contains(&key(to, Some(kind), alt, dynamic, len)) {
                    return;
                }
                let mut nodes = label.nodes.clone();
                nodes.push(to);
                let mut links = label.links.clone();
                links.push(LinkRef { kind, u: at, v: to });
                heap.push(std::cmp::Reverse(Label {
                    cost: &label.cost + weight,
                    len,
                    dynamic,
                    nodes,
                    links,
                    last: Some(kind),
                    alt,
                }));
            };

            for (to, w) in self.static_neighbors(at) {
                push(to, LinkKind::Static, w);
            }
            if let Some(nbrs) = self.dyn_adj.get(&at) {
                for &to in nbrs {
                    push(to, LinkKind::Dynamic, mu.clone());
                }
            }
        }
        Route::Unreachable
    }

    /// Exact cost of a flow path: validates continuity, link existence and
    /// the sigma/delta/lambda policy, pricing every dynamic link at `mu`.
    pub fn evaluate(
        &self,
        policy: &RoutingPolicy,
        mu: &Rat,
        path: &FlowPath,
    ) -> Result<Rat, PathError> {
        let mut at = path.src;
        let mut cost = Rat::zero();
        let mut last: Option<LinkKind> = None;
        let mut alt = 0u64;
        let mut dynamic = 0u64;
        for (i, link) in path.links.iter().enumerate() {
            let next = link.other(at).ok_or(PathError::Discontinuous { index: i })?;
            let weight = match link.kind {
                LinkKind::Static => self
                    .net
                    .static_weight(link.u, link.v)
                    .ok_or(PathError::LinkNotPresent { index: i })?,
                LinkKind::Dynamic => {
                    if !self.has_dynamic(link.u, link.v) {
                        return Err(PathError::LinkNotPresent { index: i });
                    }
                    mu.clone()
                }
            };
            if let Some(l) = last {
                if l != link.kind {
                    alt += 1;
                }
            }
            if link.kind == LinkKind::Dynamic {
                dynamic += 1;
            }
            if !policy.sigma.allows(alt) {
                return Err(PathError::PolicyViolated { param: PolicyParam::Sigma, index: i });
            }
            if !policy.delta.allows(dynamic) {
                return Err(PathError::PolicyViolated { param: PolicyParam::Delta, index: i });
            }
            if !policy.lambda.allows(i as u64 + 1) {
                return Err(PathError::PolicyViolated { param: PolicyParam::Lambda, index: i });
            }
            cost += weight;
            last = Some(link.kind);
            at = next;
        }
        if at != path.dst {
            return Err(PathError::Discontinuous { index: path.links.len() });
        }
        Ok(cost)
    }

    /// Route every demand independently (flow paths do not interact: there
    /// are no capacities) and sum the exact workload cost.
    pub fn total_cost(&self, inst: &RRPInstance) -> ConfigCost {
        let mut total = Rat::zero();
        let mut paths = Vec::with_capacity(inst.workload.demands.len());
        for (i, d) in inst.workload.demands.iter().enumerate() {
            match self.shortest(&inst.policy, &inst.mu, d.src, d.dst) {
                Route::Reached { cost, path } => {
                    total += &d.amount * cost;
                    paths.push(path);
                }
                Route::Unreachable => return ConfigCost::Infeasible { demand_index: i },
            }
        }
        ConfigCost::Feasible {
            cost: total.clone(),
            assignment: FlowAssignment { paths, total_cost: total },
        }
    }
}

/// Convenience wrapper around [`Router::shortest`] for one-shot queries.
pub fn constrained_shortest_path(
    net: &HybridNetwork,
    cfg: &Configuration,
    policy: &RoutingPolicy,
    mu: &Rat,
    src: NodeIx,
    dst: NodeIx,
) -> Result<Route, CfgError> {
    Ok(Router::new(net, cfg, false)?.shortest(policy, mu, src, dst))
}

/// Convenience wrapper around [`Router::evaluate`].
pub fn evaluate_flow_path(
    inst: &RRPInstance,
    cfg: &Configuration,
    path: &FlowPath,
) -> Result<Rat, EvalError> {
    let router = Router::new(&inst.network, cfg, false).map_err(EvalError::Config)?;
    router.evaluate(&inst.policy, &inst.mu, path).map_err(EvalError::Path)
}

/// Convenience wrapper around [`Router::total_cost`].
pub fn min_total_cost_for_configuration(
    inst: &RRPInstance,
    cfg: &Configuration,
) -> Result<ConfigCost, CfgError> {
    Ok(Router::new(&inst.network, cfg, false)?.total_cost(inst))
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EvalError {
    #[error(transparent)]
    Config(CfgError),
    #[error(transparent)]
    Path(PathError),
}

/// Re-evaluate a full assignment against a workload; checks that every
/// demand has a path with matching endpoints and returns the exact total.
pub fn evaluate_assignment(
    inst: &RRPInstance,
    cfg: &Configuration,
    assignment: &FlowAssignment,
) -> Result<Rat, AssignmentError> {
    if assignment.paths.len() != inst.workload.demands.len() {
        return Err(AssignmentError::DemandCount {
            got: assignment.paths.len(),
            want: inst.workload.demands.len(),
        });
    }
    let router = Router::new(&inst.network, cfg, false)
        .map_err(|e| AssignmentError::Eval { demand_index: 0, source: EvalError::Config(e) })?;
    let mut total = Rat::zero();
    for (i, (d, p)) in inst.workload.demands.iter().zip(&assignment.paths).enumerate() {
        if p.src != d.src || p.dst != d.dst {
            return Err(AssignmentError::EndpointMismatch { demand_index: i });
        }
        let cost = router
            .evaluate(&inst.policy, &inst.mu, p)
            .map_err(|e| AssignmentError::Eval { demand_index: i, source: EvalError::Path(e) })?;
        total += &d.amount * cost;
    }
    Ok(total)
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AssignmentError {
    #[error("assignment has {got} paths for {want} demands")]
    DemandCount { got: usize, want: usize },
    #[error("path endpoints do not match demand {demand_index}")]
    EndpointMismatch { demand_index: usize },
    #[error("demand {demand_index}: {source}")]
    Eval { demand_index: usize, source: EvalError },
}
