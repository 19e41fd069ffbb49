//! Test-only oracles and generators, compiled behind the `testkit`
//! feature. Everything here is deliberately independent of the solver
//! code paths it is used to check: shortest paths by exhaustive simple-path
//! enumeration, optima by double brute force, matchings by naive recursion.

use num::Zero;
use rand::prelude::*;

use crate::net::{
    dynamic_links, Bound, CfgError, Configuration, Demand, HybridNetwork, LinkKind, NodeIx,
    NodeSet, RRPInstance, RoutingPolicy, StaticLink, Switch, SwitchLink, Wiring, Workload,
};
use crate::rational::{frac, rat_u, Rat};

/// Minimum cost over all policy-feasible simple paths from `src` to `dst`,
/// by depth-first enumeration. `None` when no feasible path exists.
pub fn min_simple_path_cost(
    net: &HybridNetwork,
    links: &[(NodeIx, NodeIx)],
    policy: &RoutingPolicy,
    mu: &Rat,
    src: NodeIx,
    dst: NodeIx,
) -> Option<Rat> {
    if src == dst {
        return Some(Rat::zero());
    }
    // candidate moves from a node: raw static links plus deduplicated
    // dynamic pairs
    let moves = |at: NodeIx| -> Vec<(NodeIx, LinkKind, Rat)> {
        let mut out = Vec::new();
        match &net.nodes {
            NodeSet::Explicit(_) => {
                for l in &net.static_links {
                    if l.u == at {
                        out.push((l.v, LinkKind::Static, l.weight.clone()));
                    } else if l.v == at {
                        out.push((l.u, LinkKind::Static, l.weight.clone()));
                    }
                }
            }
            NodeSet::Hypercube { .. } => {
                for (n, w) in net.static_neighbors(at) {
                    out.push((n, LinkKind::Static, w));
                }
            }
        }
        for &(u, v) in links {
            if u == at && v != at {
                out.push((v, LinkKind::Dynamic, mu.clone()));
            } else if v == at && u != at {
                out.push((u, LinkKind::Dynamic, mu.clone()));
            }
        }
        out
    };

    struct Dfs<'a, F: Fn(NodeIx) -> Vec<(NodeIx, LinkKind, Rat)>> {
        moves: F,
        policy: &'a RoutingPolicy,
        dst: NodeIx,
        best: Option<Rat>,
    }
    impl<F: Fn(NodeIx) -> Vec<(NodeIx, LinkKind, Rat)>> Dfs<'_, F> {
        #[allow(clippy::too_many_arguments)]
        fn go(
            &mut self,
            at: NodeIx,
            visited: &mut Vec<NodeIx>,
            cost: Rat,
            last: Option<LinkKind>,
            alt: u64,
            dynamic: u64,
            len: u64,
        ) {
            if at == self.dst {
                if self.best.as_ref().is_none_or(|b| cost < *b) {
                    self.best = Some(cost);
                }
                return;
            }
            for (to, kind, w) in (self.moves)(at) {
                if visited.contains(&to) {
                    continue;
                }
                let nalt = alt
                    + match last {
                        Some(l) if l != kind => 1,
                        _ => 0,
                    };
                let ndyn = dynamic + u64::from(kind == LinkKind::Dynamic);
                let nlen = len + 1;
                if !self.policy.sigma.allows(nalt)
                    || !self.policy.delta.allows(ndyn)
                    || !self.policy.lambda.allows(nlen)
                {
                    continue;
                }
                visited.push(to);
                self.go(to, visited, &cost + w, Some(kind), nalt, ndyn, nlen);
                visited.pop();
            }
        }
    }

    let mut dfs = Dfs { moves, policy, dst, best: None };
    let mut visited = vec![src];
    dfs.go(src, &mut visited, Rat::zero(), None, 0, 0, 0);
    dfs.best
}

/// All matchings of the port set 0..ports, by naive recursion on the
/// smallest unmatched port. Order differs from the solver's enumerator.
pub fn naive_matchings(ports: u64) -> Vec<Vec<(u64, u64)>> {
    fn rec(free: &[u64]) -> Vec<Vec<(u64, u64)>> {
        let Some((&first, rest)) = free.split_first() else {
            return vec![Vec::new()];
        };
        let mut out = Vec::new();
        // first port stays unmatched
        out.extend(rec(rest));
        // or pairs with any later port
        for (i, &other) in rest.iter().enumerate() {
            let mut remaining: Vec<u64> = rest.to_vec();
            remaining.remove(i);
            for mut matching in rec(&remaining) {
                matching.push((first, other));
                out.push(matching);
            }
        }
        out
    }
    rec(&(0..ports).collect::<Vec<_>>())
}

/// Double brute force: enumerate every configuration (product of naive
/// per-switch matchings, skipping self-loop pairs) and price each demand by
/// simple-path enumeration. `None` means infeasible.
pub fn brute_force_optimum(inst: &RRPInstance) -> Option<Rat> {
    let net = &inst.network;
    let per_switch: Vec<Vec<Vec<(u64, u64)>>> =
        net.switches.iter().map(|s| naive_matchings(s.ports)).collect();
    let mut best: Option<Rat> = None;
    let mut stack: Vec<usize> = vec![0; per_switch.len()];
    loop {
        let cfg = Configuration::normalized(
            stack.iter().zip(&per_switch).map(|(&i, m)| m[i].clone()).collect(),
        );
        match dynamic_links(net, &cfg, false) {
            Ok(links) => {
                let pairs: Vec<(u64, u64)> = links.iter().map(|l| (l.u, l.v)).collect();
                let mut total = Some(Rat::zero());
                for d in &inst.workload.demands {
                    match min_simple_path_cost(net, &pairs, &inst.policy, &inst.mu, d.src, d.dst) {
                        Some(c) => {
                            total = total.map(|t| t + &d.amount * c);
                        }
                        None => {
                            total = None;
                            break;
                        }
                    }
                }
                if let Some(t) = total {
                    if best.as_ref().is_none_or(|b| t < *b) {
                        best = Some(t);
                    }
                }
            }
            Err(CfgError::SelfLoop { .. }) => {}
            Err(e) => panic!("unexpected configuration error: {e}"),
        }
        // odometer
        let mut pos = per_switch.len();
        loop {
            if pos == 0 {
                return best;
            }
            pos -= 1;
            stack[pos] += 1;
            if stack[pos] < per_switch[pos].len() {
                break;
            }
            stack[pos] = 0;
        }
    }
}

/// Bisection width by an enumeration ordered differently from the oracle
/// in the forge (descending masks keyed on the complement side).
pub fn bisection_width_alt(num_nodes: usize, edges: &[(usize, usize)]) -> u64 {
    assert!(num_nodes.is_multiple_of(2) && num_nodes <= 16);
    if num_nodes == 0 {
        return 0;
    }
    let half = (num_nodes / 2) as u32;
    let mut best = u64::MAX;
    for mask in (0u32..(1 << num_nodes)).rev() {
        // node 0 on the complement side
        if mask & 1 != 0 || mask.count_ones() != half {
            continue;
        }
        let cut =
            edges.iter().rev().filter(|(u, v)| (mask >> u & 1) != (mask >> v & 1)).count() as u64;
        best = best.min(cut);
    }
    best
}

/// Telephone numbers T(n): how many matchings a set of n ports admits.
pub fn telephone(n: u64) -> u64 {
    let (mut a, mut b) = (1u64, 1u64);
    for k in 2..=n {
        let next = b + (k - 1) * a;
        a = b;
        b = next;
    }
    if n == 0 {
        1
    } else {
        b
    }
}

// --------------------------------------------------------------------------
// Randomized generators (seeded by the caller)
// --------------------------------------------------------------------------

pub struct RandomInstanceOptions {
    pub max_nodes: u64,
    pub max_wired_ports: u64,
    pub sigmas: Vec<Bound>,
    pub deltas: Vec<Bound>,
    pub lambdas: Vec<Bound>,
    pub mus: Vec<Rat>,
}

impl Default for RandomInstanceOptions {
    fn default() -> Self {
        RandomInstanceOptions {
            max_nodes: 6,
            max_wired_ports: 6,
            sigmas: vec![Bound::Finite(0), Bound::Finite(1), Bound::Finite(3), Bound::Infinite],
            deltas: vec![Bound::Finite(0), Bound::Finite(1), Bound::Infinite],
            lambdas: vec![Bound::Finite(1), Bound::Finite(3), Bound::Infinite],
            mus: vec![Rat::zero(), frac(1, 4), frac(1, 2)],
        }
    }
}

impl RandomInstanceOptions {
    /// The profile of the tractable restriction: one switch, segregated
    /// flows, one dynamic link per path.
    pub fn segregated() -> Self {
        RandomInstanceOptions {
            sigmas: vec![Bound::Finite(0)],
            deltas: vec![Bound::Finite(1)],
            lambdas: vec![Bound::Infinite],
            mus: vec![frac(1, 4), frac(1, 2)],
            ..Default::default()
        }
    }
}

/// Random explicit network with at most one switch, plus workload and
/// policy drawn from the option lists.
pub fn random_instance(rng: &mut impl Rng, opts: &RandomInstanceOptions) -> RRPInstance {
    let n = rng.gen_range(2..=opts.max_nodes);
    let names: Vec<String> = (0..n).map(|i| format!("n{i}")).collect();
    let mut net = HybridNetwork::explicit(names);
    for u in 0..n {
        for v in u + 1..n {
            if rng.gen_bool(0.5) {
                let weight = if rng.gen_bool(0.5) { rat_u(1) } else { rat_u(2) };
                net.static_links.push(StaticLink { u, v, weight });
            }
        }
    }
    // wire up to max_wired_ports external ports, at most 3 per node
    let mut wires: Vec<NodeIx> = Vec::new();
    for v in 0..n {
        for _ in 0..rng.gen_range(0..=3u32) {
            wires.push(v);
        }
    }
    wires.shuffle(rng);
    wires.truncate(opts.max_wired_ports as usize);
    if wires.len() >= 2 && rng.gen_bool(0.85) {
        net.switches.push(Switch { id: "s".into(), ports: wires.len() as u64 });
        let mut ext_count = vec![0u64; n as usize];
        net.wiring = Wiring::Links(
            wires
                .iter()
                .enumerate()
                .map(|(p, &v)| {
                    let ext_port = ext_count[v as usize];
                    ext_count[v as usize] += 1;
                    SwitchLink { node: v, ext_port, switch: 0, sw_port: p as u64 }
                })
                .collect(),
        );
    }

    let mut demands = Vec::new();
    let want = rng.gen_range(1..=5usize);
    let mut tries = 0;
    while demands.len() < want && tries < 50 {
        tries += 1;
        let src = rng.gen_range(0..n);
        let dst = rng.gen_range(0..n);
        if src == dst || demands.iter().any(|d: &Demand| d.src == src && d.dst == dst) {
            continue;
        }
        demands.push(Demand { src, dst, amount: rat_u(rng.gen_range(1..=4)) });
    }

    RRPInstance {
        network: net,
        mu: opts.mus.choose(rng).expect("mu list").clone(),
        workload: Workload::new(demands),
        kappa: rat_u(1000),
        policy: RoutingPolicy {
            sigma: *opts.sigmas.choose(rng).expect("sigma list"),
            delta: *opts.deltas.choose(rng).expect("delta list"),
            lambda: *opts.lambdas.choose(rng).expect("lambda list"),
        },
    }
}

/// A uniformly-random valid configuration (no self-loop pairs).
pub fn random_configuration(rng: &mut impl Rng, net: &HybridNetwork) -> Configuration {
    let mut matchings = Vec::new();
    for (s, sw) in net.switches.iter().enumerate() {
        let mut ports: Vec<u64> = (0..sw.ports).collect();
        ports.shuffle(rng);
        let mut matching = Vec::new();
        while ports.len() >= 2 {
            let a = ports.pop().expect("nonempty");
            if !rng.gen_bool(0.7) {
                continue;
            }
            let owner_a = net.port_owner(s, a).map(|(v, _)| v);
            if let Some(pos) =
                ports.iter().position(|&b| net.port_owner(s, b).map(|(v, _)| v) != owner_a)
            {
                let b = ports.remove(pos);
                matching.push((a, b));
            }
        }
        matchings.push(matching);
    }
    Configuration::normalized(matchings)
}

/// Random simple 3-regular graph on `n` nodes (n even), by the pairing
/// model with rejection.
pub fn random_cubic_graph(rng: &mut impl Rng, n: usize) -> Vec<(usize, usize)> {
    assert!(n >= 4 && n.is_multiple_of(2));
    'retry: loop {
        let mut stubs: Vec<usize> = (0..n).flat_map(|v| [v, v, v]).collect();
        stubs.shuffle(rng);
        let mut seen = std::collections::BTreeSet::new();
        let mut edges = Vec::with_capacity(3 * n / 2);
        for pair in stubs.chunks(2) {
            let (u, v) = (pair[0].min(pair[1]), pair[0].max(pair[1]));
            if u == v || !seen.insert((u, v)) {
                continue 'retry;
            }
            edges.push((u, v));
        }
        return edges;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn naive_matching_counts() {
        for p in 0..=6u64 {
            assert_eq!(naive_matchings(p).len() as u64, telephone(p));
        }
    }

    #[test]
    fn random_instances_are_valid() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..50 {
            let inst = random_instance(&mut rng, &RandomInstanceOptions::default());
            let report = crate::net::validate_instance(&inst);
            assert!(report.ok(), "{report}");
            let cfg = random_configuration(&mut rng, &inst.network);
            assert!(dynamic_links(&inst.network, &cfg, false).is_ok());
        }
    }

    #[test]
    fn cubic_graphs_are_cubic() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for n in [4usize, 6, 8, 10] {
            let edges = random_cubic_graph(&mut rng, n);
            let mut deg = vec![0u64; n];
            for (u, v) in edges {
                deg[u] += 1;
                deg[v] += 1;
            }
            assert!(deg.iter().all(|&d| d == 3));
        }
    }
}
