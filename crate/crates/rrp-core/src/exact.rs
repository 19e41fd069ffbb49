//! Exhaustive optimization over all configurations for small instances:
//! the ground truth for every other solver and for reduction spot checks.
//!
//! Configurations are the Cartesian product of per-switch port matchings,
//! enumerated in lexicographic order so ties resolve deterministically.
//! A sound lower bound (every demand priced in the network augmented with
//! every dynamic link that could possibly exist) prunes the search.

use std::collections::BTreeSet;

use num::Zero;
use thiserror::Error;

use crate::net::{
    dynamic_links, CfgError, Configuration, FlowAssignment, FlowPath, HybridNetwork, NodeIx,
    RRPInstance,
};
use crate::rational::Rat;
use crate::routing::{AssignmentError, ConfigCost, EvalError, Route, Router};

/// Lexicographic stream of all matchings (including the empty and the
/// non-perfect ones) of the port set `0..ports`. The number of matchings
/// yielded is the involution number T(ports).
pub struct Matchings {
    ports: u64,
    stack: Vec<(u64, u64)>,
    used: Vec<bool>,
    started: bool,
    done: bool,
}

impl Matchings {
    pub fn new(ports: u64) -> Self {
        Matchings {
            ports,
            stack: Vec::new(),
            used: vec![false; ports as usize],
            started: false,
            done: false,
        }
    }

    fn first_free_pair(&self, min_a: u64) -> Option<(u64, u64)> {
        let mut a = min_a;
        while a < self.ports {
            if !self.used[a as usize] {
                let mut b = a + 1;
                while b < self.ports {
                    if !self.used[b as usize] {
                        return Some((a, b));
                    }
                    b += 1;
                }
            }
            a += 1;
        }
        None
    }
}

impl Iterator for Matchings {
    type Item = Vec<(u64, u64)>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.done {
            return None;
        }
        if !self.started {
            self.started = true;
            return Some(Vec::new());
        }
        // extend with the smallest pair whose first port exceeds the last
        // pair's first port
        let min_a = self.stack.last().map_or(0, |&(a, _)| a + 1);
        if let Some((a, b)) = self.first_free_pair(min_a) {
            self.used[a as usize] = true;
            self.used[b as usize] = true;
            self.stack.push((a, b));
            return Some(self.stack.clone());
        }
        // backtrack: advance the deepest pair that still has a successor
        while let Some((a, b)) = self.stack.pop() {
            self.used[a as usize] = false;
            self.used[b as usize] = false;
            // same first port, later second port
            let mut nb = b + 1;
            while nb < self.ports {
                if !self.used[nb as usize] && nb != a {
                    self.used[a as usize] = true;
                    self.used[nb as usize] = true;
                    self.stack.push((a, nb));
                    return Some(self.stack.clone());
                }
                nb += 1;
            }
            // later first port
            if let Some((na, nb)) = self.first_free_pair(a + 1) {
                self.used[na as usize] = true;
                self.used[nb as usize] = true;
                self.stack.push((na, nb));
                return Some(self.stack.clone());
            }
        }
        self.done = true;
        None
    }
}

/// Stream of all matchings of a switch's port set, in lexicographic order.
pub fn enumerate_switch_matchings(port_count: u64) -> Matchings {
    Matchings::new(port_count)
}

#[derive(Clone, Debug)]
pub struct ExactOptions {
    /// Refuse instances with more wired switch ports than this unless
    /// `force` is set. T(12) = 140,152 matchings keeps runtime desk-scale.
    pub port_budget: u64,
    pub force: bool,
    /// Worker threads for configuration enumeration. Results are identical
    /// for any value: ties are merged back in lexicographic order.
    pub jobs: usize,
}

impl Default for ExactOptions {
    fn default() -> Self {
        ExactOptions { port_budget: 12, force: false, jobs: 1 }
    }
}

#[derive(Debug, Error)]
pub enum SolveError {
    #[error("instance too large for exact solver: {ports} wired ports exceeds budget {budget}")]
    TooLarge { ports: u64, budget: u64 },
    #[error("invalid configuration: {0}")]
    Config(#[from] CfgError),
    #[error("certificate does not cover demand {demand_index}")]
    MissingFlow { demand_index: usize },
    #[error(transparent)]
    Certificate(#[from] AssignmentError),
}

#[derive(Clone, Debug, PartialEq)]
pub enum SolveOutcome {
    Optimal { cost: Rat, configuration: Configuration, assignment: FlowAssignment },
    Infeasible,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SolveResult {
    pub outcome: SolveOutcome,
    pub configurations_examined: u64,
}

impl SolveResult {
    pub fn optimal_cost(&self) -> Option<&Rat> {
        match &self.outcome {
            SolveOutcome::Optimal { cost, .. } => Some(cost),
            SolveOutcome::Infeasible => None,
        }
    }
}

fn total_wired_ports(net: &HybridNetwork) -> u64 {
    net.switches.iter().map(|s| s.ports).sum()
}

/// Every dynamic link that could exist under some configuration of the
/// given switches: all pairs of distinct nodes sharing a switch. Self-loop
/// links are excluded; they can never shorten a route.
fn all_possible_links(net: &HybridNetwork, switches: &[usize]) -> Vec<(NodeIx, NodeIx)> {
    let mut pairs: BTreeSet<(NodeIx, NodeIx)> = BTreeSet::new();
    for &s in switches {
        let mut nodes: Vec<NodeIx> = (0..net.switches[s].ports)
            .filter_map(|p| net.port_owner(s, p).map(|(v, _)| v))
            .collect();
        nodes.sort_unstable();
        nodes.dedup();
        for (i, &u) in nodes.iter().enumerate() {
            for &v in &nodes[i + 1..] {
                pairs.insert((u, v));
            }
        }
    }
    pairs.into_iter().collect()
}

fn lower_bound(inst: &RRPInstance, links: Vec<(NodeIx, NodeIx)>) -> Option<Rat> {
    let router = Router::with_links(&inst.network, links);
    let mut total = Rat::zero();
    for d in &inst.workload.demands {
        match router.shortest(&inst.policy, &inst.mu, d.src, d.dst) {
            Route::Reached { cost, .. } => total += &d.amount * cost,
            Route::Unreachable => return None,
        }
    }
    Some(total)
}

struct Incumbent {
    cost: Rat,
    index: u64,
    configuration: Configuration,
    assignment: FlowAssignment,
}

/// Evaluate one configuration; configurations inducing self-loop dynamic
/// links are skipped (an equivalent configuration without the loop is
/// enumerated separately and can only cost less).
fn evaluate_config(
    inst: &RRPInstance,
    cfg: &Configuration,
) -> Result<Option<ConfigCost>, SolveError> {
    match dynamic_links(&inst.network, cfg, false) {
        Ok(links) => {
            let router = Router::with_links(&inst.network, links.iter().map(|l| (l.u, l.v)));
            Ok(Some(router.total_cost(inst)))
        }
        Err(CfgError::SelfLoop { .. }) => Ok(None),
        Err(e) => Err(SolveError::Config(e)),
    }
}

/// Brute-force optimum over the whole configuration space.
///
/// Deterministic: the winner is the lexicographically first configuration
/// achieving the optimal cost, regardless of `jobs`.
pub fn solve_exact(inst: &RRPInstance, opts: &ExactOptions) -> Result<SolveResult, SolveError> {
    let ports = total_wired_ports(&inst.network);
    if ports > opts.port_budget && !opts.force {
        return Err(SolveError::TooLarge { ports, budget: opts.port_budget });
    }

    if inst.workload.demands.is_empty() {
        return Ok(SolveResult {
            outcome: SolveOutcome::Optimal {
                cost: Rat::zero(),
                configuration: Configuration::empty(inst.network.switches.len()),
                assignment: FlowAssignment { paths: Vec::new(), total_cost: Rat::zero() },
            },
            configurations_examined: 1,
        });
    }

    let all_switches: Vec<usize> = (0..inst.network.switches.len()).collect();
    let bound = match lower_bound(inst, all_possible_links(&inst.network, &all_switches)) {
        Some(b) => b,
        // unreachable even with every possible link: no configuration helps
        None => {
            return Ok(SolveResult {
                outcome: SolveOutcome::Infeasible,
                configurations_examined: 0,
            })
        }
    };

    let per_switch: Vec<Vec<Vec<(u64, u64)>>> = inst
        .network
        .switches
        .iter()
        .map(|s| enumerate_switch_matchings(s.ports).collect())
        .collect();
    let total: u64 = per_switch.iter().map(|m| m.len() as u64).product();

    let decode = |index: u64| -> Configuration {
        let mut rest = index;
        // switch 0 varies slowest
        let mut matchings = Vec::with_capacity(per_switch.len());
        let mut radix: u64 = total;
        for options in &per_switch {
            radix /= options.len() as u64;
            let pick = rest / radix;
            rest %= radix;
            matchings.push(options[pick as usize].clone());
        }
        Configuration { matchings }
    };

    let jobs = opts.jobs.max(1).min(total.max(1) as usize);
    let scan = |from: u64, to: u64| -> Result<(Option<Incumbent>, u64), SolveError> {
        let mut best: Option<Incumbent> = None;
        let mut examined = 0u64;
        for index in from..to {
            let cfg = decode(index);
            let Some(outcome) = evaluate_config(inst, &cfg)? else { continue };
            examined += 1;
            if let ConfigCost::Feasible { cost, assignment } = outcome {
                let better = match &best {
                    Some(b) => cost < b.cost,
                    None => true,
                };
                if better {
                    let at_bound = cost == bound;
                    best = Some(Incumbent { cost, index, configuration: cfg, assignment });
                    if at_bound {
                        break;
                    }
                }
            }
        }
        Ok((best, examined))
    };

    let (best, examined) = if jobs <= 1 {
        scan(0, total)?
    } else {
        let chunk = total.div_ceil(jobs as u64);
        let results: Vec<Result<(Option<Incumbent>, u64), SolveError>> =
            std::thread::scope(|scope| {
                let mut handles = Vec::new();
                for w in 0..jobs as u64 {
                    let from = w * chunk;
                    let to = ((w + 1) * chunk).min(total);
                    let scan = &scan;
                    handles.push(scope.spawn(move || scan(from, to.max(from))));
                }
                handles.into_iter().map(|h| h.join().expect("worker panicked")).collect()
            });
        let mut best: Option<Incumbent> = None;
        let mut examined = 0u64;
        for r in results {
            let (b, e) = r?;
            examined += e;
            if let Some(cand) = b {
                let replace = match &best {
                    Some(cur) => (cand.cost.clone(), cand.index) < (cur.cost.clone(), cur.index),
                    None => true,
                };
                if replace {
                    best = Some(cand);
                }
            }
        }
        (best, examined)
    };

    Ok(match best {
        Some(inc) => SolveResult {
            outcome: SolveOutcome::Optimal {
                cost: inc.cost,
                configuration: inc.configuration,
                assignment: inc.assignment,
            },
            configurations_examined: examined,
        },
        None => {
            SolveResult { outcome: SolveOutcome::Infeasible, configurations_examined: examined }
        }
    })
}

/// Decide whether some configuration serves the workload within `kappa`.
pub fn decide(inst: &RRPInstance, opts: &ExactOptions) -> Result<bool, SolveError> {
    let result = solve_exact(inst, opts)?;
    Ok(match result.outcome {
        SolveOutcome::Optimal { cost, .. } => cost <= inst.kappa,
        SolveOutcome::Infeasible => false,
    })
}

/// Evaluator-only decision: check a supplied (configuration, flows)
/// certificate against `kappa` without any search.
pub fn decide_with_certificate(
    inst: &RRPInstance,
    cfg: &Configuration,
    flows: &[((NodeIx, NodeIx), FlowPath)],
) -> Result<bool, SolveError> {
    let (total, _) = evaluate_keyed_flows(inst, cfg, flows)?;
    Ok(total <= inst.kappa)
}

/// Match keyed flow paths to the instance's demands and price them.
/// Returns the exact total and the per-demand costs (amount times weight).
pub fn evaluate_keyed_flows(
    inst: &RRPInstance,
    cfg: &Configuration,
    flows: &[((NodeIx, NodeIx), FlowPath)],
) -> Result<(Rat, Vec<Rat>), SolveError> {
    let router = Router::new(&inst.network, cfg, false)?;
    let mut total = Rat::zero();
    let mut per_demand = Vec::with_capacity(inst.workload.demands.len());
    for (i, d) in inst.workload.demands.iter().enumerate() {
        let path = flows
            .iter()
            .find(|((s, t), _)| *s == d.src && *t == d.dst)
            .map(|(_, p)| p)
            .ok_or(SolveError::MissingFlow { demand_index: i })?;
        let weight = router.evaluate(&inst.policy, &inst.mu, path).map_err(|e| {
            SolveError::Certificate(AssignmentError::Eval {
                demand_index: i,
                source: EvalError::Path(e),
            })
        })?;
        let cost = &d.amount * weight;
        total += &cost;
        per_demand.push(cost);
    }
    Ok((total, per_demand))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::net::{Demand, RoutingPolicy, StaticLink, Switch, SwitchLink, Wiring, Workload};
    use crate::rational::{frac, rat_u};

    fn telephone(n: u64) -> u64 {
        // T(n) = T(n-1) + (n-1) T(n-2)
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

    #[test]
    fn matching_counts_are_involution_numbers() {
        for p in 0..=8u64 {
            let got = enumerate_switch_matchings(p).count() as u64;
            assert_eq!(got, telephone(p), "T({p})");
        }
        assert_eq!(enumerate_switch_matchings(0).count(), 1);
        assert_eq!(enumerate_switch_matchings(2).count(), 2);
        assert_eq!(enumerate_switch_matchings(4).count(), 10);
    }

    #[test]
    fn matchings_unique_and_lexicographic() {
        let all: Vec<_> = enumerate_switch_matchings(6).collect();
        let mut sorted = all.clone();
        sorted.sort();
        sorted.dedup();
        assert_eq!(all.len(), sorted.len(), "no duplicates");
        assert_eq!(all, sorted, "already in lexicographic order");
    }

    fn path_abc_instance() -> RRPInstance {
        let mut net = HybridNetwork::explicit(vec!["a".into(), "b".into(), "c".into()]);
        net.static_links.push(StaticLink { u: 0, v: 1, weight: rat_u(1) });
        net.static_links.push(StaticLink { u: 1, v: 2, weight: rat_u(1) });
        net.switches.push(Switch { id: "s".into(), ports: 2 });
        net.wiring = Wiring::Links(vec![
            SwitchLink { node: 0, ext_port: 0, switch: 0, sw_port: 0 },
            SwitchLink { node: 2, ext_port: 0, switch: 0, sw_port: 1 },
        ]);
        RRPInstance {
            network: net,
            mu: frac(1, 2),
            workload: Workload::new(vec![Demand { src: 0, dst: 2, amount: rat_u(2) }]),
            kappa: rat_u(1),
            policy: RoutingPolicy::unrestricted(),
        }
    }

    #[test]
    fn two_configuration_instance() {
        let inst = path_abc_instance();
        let result = solve_exact(&inst, &ExactOptions::default()).unwrap();
        match &result.outcome {
            SolveOutcome::Optimal { cost, configuration, .. } => {
                assert_eq!(*cost, rat_u(1));
                assert_eq!(configuration.matchings, vec![vec![(0, 1)]]);
            }
            SolveOutcome::Infeasible => panic!("solvable"),
        }
        assert!(decide(&inst, &ExactOptions::default()).unwrap());
        let mut no = inst.clone();
        no.kappa = frac(99, 100);
        assert!(!decide(&no, &ExactOptions::default()).unwrap());
    }

    #[test]
    fn empty_workload_is_free() {
        let mut inst = path_abc_instance();
        inst.workload = Workload::default();
        let result = solve_exact(&inst, &ExactOptions::default()).unwrap();
        assert_eq!(result.optimal_cost(), Some(&Rat::zero()));
    }

    #[test]
    fn isolated_pair_is_infeasible() {
        let net = HybridNetwork::explicit(vec!["u".into(), "v".into()]);
        let inst = RRPInstance {
            network: net,
            mu: rat_u(1),
            workload: Workload::new(vec![Demand { src: 0, dst: 1, amount: rat_u(1) }]),
            kappa: rat_u(100),
            policy: RoutingPolicy::unrestricted(),
        };
        let result = solve_exact(&inst, &ExactOptions::default()).unwrap();
        assert_eq!(result.outcome, SolveOutcome::Infeasible);
        assert!(!decide(&inst, &ExactOptions::default()).unwrap());
    }

    #[test]
    fn budget_guard_trips() {
        let mut inst = path_abc_instance();
        inst.network.switches[0].ports = 14;
        if let Wiring::Links(links) = &mut inst.network.wiring {
            for p in 2..14 {
                links.push(SwitchLink { node: (p % 3), ext_port: p, switch: 0, sw_port: p });
            }
        }
        assert!(matches!(
            solve_exact(&inst, &ExactOptions::default()),
            Err(SolveError::TooLarge { ports: 14, budget: 12 })
        ));
        let forced = ExactOptions { force: true, ..Default::default() };
        assert!(solve_exact(&inst, &forced).is_ok());
    }

    #[test]
    fn ties_resolve_to_the_lexicographically_first_configuration() {
        // demand a -> b costs 1 statically; the dynamic link (a,c) cannot
        // help, so the empty matching ties with {(0,1)} and wins
        let mut inst = path_abc_instance();
        inst.mu = rat_u(1);
        inst.workload = Workload::new(vec![Demand { src: 0, dst: 1, amount: rat_u(1) }]);
        let result = solve_exact(&inst, &ExactOptions::default()).unwrap();
        match &result.outcome {
            SolveOutcome::Optimal { cost, configuration, .. } => {
                assert_eq!(*cost, rat_u(1));
                assert_eq!(configuration.matchings, vec![Vec::<(u64, u64)>::new()]);
            }
            SolveOutcome::Infeasible => panic!("solvable"),
        }
    }

    #[test]
    fn jobs_do_not_change_the_answer() {
        let inst = path_abc_instance();
        let lone = solve_exact(&inst, &ExactOptions::default()).unwrap();
        let par = solve_exact(&inst, &ExactOptions { jobs: 4, ..Default::default() }).unwrap();
        assert_eq!(lone.outcome, par.outcome);
    }

    #[test]
    fn certificate_decision_without_search() {
        let inst = path_abc_instance();
        let cfg = Configuration::normalized(vec![vec![(0, 1)]]);
        let flows = vec![(
            (0u64, 2u64),
            FlowPath { src: 0, dst: 2, links: vec![crate::net::LinkRef::dynamic(0, 2)] },
        )];
        assert!(decide_with_certificate(&inst, &cfg, &flows).unwrap());
        let mut tight = inst.clone();
        tight.kappa = frac(99, 100);
        assert!(!decide_with_certificate(&tight, &cfg, &flows).unwrap());
    }
}
