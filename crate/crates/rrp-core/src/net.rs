//! Domain model: hybrid networks, switch configurations, workloads, routing
//! policies, flow paths and problem instances, plus structural validation.
//!
//! A hybrid network is a static weighted graph whose nodes own external
//! ports wired to ports of circuit switches. Pairing two switch ports
//! creates a dynamic link between the owning nodes with uniform weight `mu`.

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use num::{One, Signed};
use thiserror::Error;

use crate::rational::Rat;

/// Node index. Explicit networks index into the node-name table; implicit
/// hypercubes use the rank whose little-endian bits spell the node name.
pub type NodeIx = u64;

/// Static topology of the network.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum NodeSet {
    /// Named nodes, edges listed explicitly.
    Explicit(Vec<String>),
    /// Hypercube of the given dimension: nodes are all bit-strings of that
    /// length, adjacency is Hamming distance one, every link has weight 1.
    /// The node and link sets are never materialized.
    Hypercube { dim: u32 },
}

impl NodeSet {
    /// Resolve a node name; explicit lookup is linear.
    pub fn node_ix(&self, name: &str) -> Option<NodeIx> {
        match self {
            NodeSet::Explicit(names) => names.iter().position(|n| n == name).map(|p| p as NodeIx),
            NodeSet::Hypercube { dim } => {
                if name.len() != *dim as usize {
                    return None;
                }
                let mut ix = 0u64;
                for (b, ch) in name.chars().enumerate() {
                    match ch {
                        '1' => ix |= 1 << b,
                        '0' => {}
                        _ => return None,
                    }
                }
                Some(ix)
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct StaticLink {
    pub u: NodeIx,
    pub v: NodeIx,
    pub weight: Rat,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Switch {
    pub id: String,
    pub ports: u64,
}

/// One wire from an external port of a node to a port of a switch.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SwitchLink {
    pub node: NodeIx,
    pub ext_port: u64,
    pub switch: usize,
    pub sw_port: u64,
}

/// Port wiring. The uniform form wires node `v` to switch ports
/// `k*v .. k*v+k-1` of a single switch and is what keeps hypercube-scale
/// instances representable.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Wiring {
    Links(Vec<SwitchLink>),
    UniformSingleSwitch { ports_per_node: u64 },
}

#[derive(Clone, Debug, PartialEq)]
pub struct HybridNetwork {
    pub nodes: NodeSet,
    pub static_links: Vec<StaticLink>,
    pub switches: Vec<Switch>,
    pub wiring: Wiring,
}

impl HybridNetwork {
    pub fn explicit(names: Vec<String>) -> Self {
        HybridNetwork {
            nodes: NodeSet::Explicit(names),
            static_links: Vec::new(),
            switches: Vec::new(),
            wiring: Wiring::Links(Vec::new()),
        }
    }

    pub fn hypercube(dim: u32) -> Self {
        HybridNetwork {
            nodes: NodeSet::Hypercube { dim },
            static_links: Vec::new(),
            switches: Vec::new(),
            wiring: Wiring::Links(Vec::new()),
        }
    }

    pub fn node_count(&self) -> u64 {
        match &self.nodes {
            NodeSet::Explicit(names) => names.len() as u64,
            NodeSet::Hypercube { dim } => 1u64 << dim,
        }
    }

    pub fn node_name(&self, ix: NodeIx) -> String {
        match &self.nodes {
            NodeSet::Explicit(names) => names[ix as usize].clone(),
            NodeSet::Hypercube { dim } => {
                (0..*dim).map(|b| if ix >> b & 1 == 1 { '1' } else { '0' }).collect()
            }
        }
    }

    /// Resolve a node name. Explicit lookup is linear; batch callers should
    /// use [`HybridNetwork::name_index`].
    pub fn node_ix(&self, name: &str) -> Option<NodeIx> {
        self.nodes.node_ix(name)
    }

    pub fn name_index(&self) -> HashMap<String, NodeIx> {
        match &self.nodes {
            NodeSet::Explicit(names) => {
                names.iter().enumerate().map(|(i, n)| (n.clone(), i as NodeIx)).collect()
            }
            NodeSet::Hypercube { .. } => HashMap::new(),
        }
    }

    /// Static neighbors of `v` with the cheapest parallel link per pair.
    pub fn static_neighbors(&self, v: NodeIx) -> Vec<(NodeIx, Rat)> {
        match &self.nodes {
            NodeSet::Explicit(_) => {
                let mut best: HashMap<NodeIx, Rat> = HashMap::new();
                for l in &self.static_links {
                    let other = if l.u == v {
                        l.v
                    } else if l.v == v {
                        l.u
                    } else {
                        continue;
                    };
                    match best.get(&other) {
                        Some(w) if *w <= l.weight => {}
                        _ => {
                            best.insert(other, l.weight.clone());
                        }
                    }
                }
                let mut out: Vec<_> = best.into_iter().collect();
                out.sort_by_key(|(n, _)| *n);
                out
            }
            NodeSet::Hypercube { dim } => (0..*dim).map(|b| (v ^ (1 << b), Rat::one())).collect(),
        }
    }

    /// Cheapest static link joining `u` and `v`, if any.
    pub fn static_weight(&self, u: NodeIx, v: NodeIx) -> Option<Rat> {
        match &self.nodes {
            NodeSet::Explicit(_) => self
                .static_links
                .iter()
                .filter(|l| (l.u == u && l.v == v) || (l.u == v && l.v == u))
                .map(|l| l.weight.clone())
                .min(),
            NodeSet::Hypercube { .. } => {
                if u != v && (u ^ v).count_ones() == 1 {
                    Some(Rat::one())
                } else {
                    None
                }
            }
        }
    }

    /// Number of wired external ports of `v` (the per-node dynamic degree
    /// bound, written Delta_S when uniform over all nodes).
    pub fn wired_ports(&self, v: NodeIx) -> u64 {
        match &self.wiring {
            Wiring::Links(links) => links.iter().filter(|l| l.node == v).count() as u64,
            Wiring::UniformSingleSwitch { ports_per_node } => {
                if self.switches.is_empty() {
                    0
                } else {
                    *ports_per_node
                }
            }
        }
    }

    /// Node and external port wired to a switch port.
    pub fn port_owner(&self, switch: usize, sw_port: u64) -> Option<(NodeIx, u64)> {
        match &self.wiring {
            Wiring::Links(links) => links
                .iter()
                .find(|l| l.switch == switch && l.sw_port == sw_port)
                .map(|l| (l.node, l.ext_port)),
            Wiring::UniformSingleSwitch { ports_per_node } => {
                if switch != 0 || *ports_per_node == 0 {
                    return None;
                }
                let node = sw_port / ports_per_node;
                if node < self.node_count() {
                    Some((node, sw_port % ports_per_node))
                } else {
                    None
                }
            }
        }
    }

    /// Switch ports wired to `v`, as (switch index, switch port), sorted.
    pub fn ports_of_node(&self, v: NodeIx) -> Vec<(usize, u64)> {
        match &self.wiring {
            Wiring::Links(links) => {
                let mut out: Vec<_> =
                    links.iter().filter(|l| l.node == v).map(|l| (l.switch, l.sw_port)).collect();
                out.sort_unstable();
                out
            }
            Wiring::UniformSingleSwitch { ports_per_node } => {
                if self.switches.is_empty() {
                    return Vec::new();
                }
                (0..*ports_per_node).map(|t| (0usize, v * ports_per_node + t)).collect()
            }
        }
    }

    /// True when every unordered pair of distinct nodes is joined by a
    /// static link and all static weights are equal.
    pub fn is_uniform_complete(&self) -> bool {
        let n = self.node_count();
        match &self.nodes {
            NodeSet::Hypercube { dim } => *dim <= 1,
            NodeSet::Explicit(_) => {
                if n < 2 {
                    return true;
                }
                let w0 = match self.static_links.first() {
                    Some(l) => l.weight.clone(),
                    None => return false,
                };
                if self.static_links.iter().any(|l| l.weight != w0) {
                    return false;
                }
                let mut pairs: BTreeSet<(NodeIx, NodeIx)> = BTreeSet::new();
                for l in &self.static_links {
                    if l.u == l.v {
                        return false;
                    }
                    pairs.insert((l.u.min(l.v), l.u.max(l.v)));
                }
                pairs.len() as u64 == n * (n - 1) / 2
            }
        }
    }
}

/// Per-switch port matchings; index-aligned with the network's switch list.
/// Pairs are normalized to `(lo, hi)` and kept sorted.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct Configuration {
    pub matchings: Vec<Vec<(u64, u64)>>,
}

impl Configuration {
    pub fn empty(num_switches: usize) -> Self {
        Configuration { matchings: vec![Vec::new(); num_switches] }
    }

    pub fn normalized(mut matchings: Vec<Vec<(u64, u64)>>) -> Self {
        for m in &mut matchings {
            for p in m.iter_mut() {
                if p.0 > p.1 {
                    *p = (p.1, p.0);
                }
            }
            m.sort_unstable();
        }
        Configuration { matchings }
    }

    pub fn total_pairs(&self) -> usize {
        self.matchings.iter().map(|m| m.len()).sum()
    }
}

/// A dynamic link induced by one matched port pair.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DynamicLink {
    pub u: NodeIx,
    pub v: NodeIx,
    pub switch: usize,
    pub ports: (u64, u64),
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CfgError {
    #[error("configuration covers {got} switches, network has {want}")]
    SwitchCountMismatch { got: usize, want: usize },
    #[error("switch {switch}: port {port} matched more than once")]
    PortReused { switch: usize, port: u64 },
    #[error("switch {switch}: unwired port {port} in matching")]
    UnwiredPort { switch: usize, port: u64 },
    #[error("switch {switch}: ports {a},{b} form a self-loop dynamic link on node {node}")]
    SelfLoop { switch: usize, a: u64, b: u64, node: NodeIx },
}

/// Translate a configuration's port pairs into dynamic links, in
/// deterministic (switch, port pair) order.
///
/// Self-loop dynamic links (two ports of the same node matched) are
/// rejected unless `allow_self_loops` is set: they can never lower any
/// demand's cost, so the safe default refuses them loudly.
pub fn dynamic_links(
    net: &HybridNetwork,
    cfg: &Configuration,
    allow_self_loops: bool,
) -> Result<Vec<DynamicLink>, CfgError> {
    if cfg.matchings.len() != net.switches.len() {
        return Err(CfgError::SwitchCountMismatch {
            got: cfg.matchings.len(),
            want: net.switches.len(),
        });
    }
    let mut out = Vec::new();
    for (s, matching) in cfg.matchings.iter().enumerate() {
        let mut seen: BTreeSet<u64> = BTreeSet::new();
        for &(a, b) in matching {
            for p in [a, b] {
                if !seen.insert(p) {
                    return Err(CfgError::PortReused { switch: s, port: p });
                }
            }
            if a == b {
                return Err(CfgError::PortReused { switch: s, port: a });
            }
            let (u, _) =
                net.port_owner(s, a).ok_or(CfgError::UnwiredPort { switch: s, port: a })?;
            let (v, _) =
                net.port_owner(s, b).ok_or(CfgError::UnwiredPort { switch: s, port: b })?;
            if u == v && !allow_self_loops {
                return Err(CfgError::SelfLoop { switch: s, a, b, node: u });
            }
            out.push(DynamicLink { u, v, switch: s, ports: (a.min(b), a.max(b)) });
        }
    }
    out.sort_by_key(|l| (l.switch, l.ports));
    Ok(out)
}

/// Sparse workload: one entry per ordered (src, dst) pair with positive
/// demand.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct Workload {
    pub demands: Vec<Demand>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Demand {
    pub src: NodeIx,
    pub dst: NodeIx,
    pub amount: Rat,
}

impl Workload {
    pub fn new(demands: Vec<Demand>) -> Self {
        Workload { demands }
    }
}

/// Flow-path policy bounds: sigma caps alternations between static and
/// dynamic links, delta caps dynamic links used, lambda caps total links.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Bound {
    Finite(u64),
    Infinite,
}

impl Bound {
    pub fn allows(&self, used: u64) -> bool {
        match self {
            Bound::Finite(b) => used <= *b,
            Bound::Infinite => true,
        }
    }

    pub fn is_infinite(&self) -> bool {
        matches!(self, Bound::Infinite)
    }
}

impl fmt::Display for Bound {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Bound::Finite(b) => write!(f, "{b}"),
            Bound::Infinite => write!(f, "inf"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RoutingPolicy {
    pub sigma: Bound,
    pub delta: Bound,
    pub lambda: Bound,
}

impl RoutingPolicy {
    pub fn unrestricted() -> Self {
        RoutingPolicy { sigma: Bound::Infinite, delta: Bound::Infinite, lambda: Bound::Infinite }
    }

    pub fn segregated_single_dynamic() -> Self {
        RoutingPolicy { sigma: Bound::Finite(0), delta: Bound::Finite(1), lambda: Bound::Infinite }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RRPInstance {
    pub network: HybridNetwork,
    pub mu: Rat,
    pub workload: Workload,
    pub kappa: Rat,
    pub policy: RoutingPolicy,
}

/// One link reference along a flow path. Parallel static and dynamic links
/// between the same node pair are told apart by the kind tag.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LinkKind {
    Static,
    Dynamic,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LinkRef {
    pub kind: LinkKind,
    pub u: NodeIx,
    pub v: NodeIx,
}

impl LinkRef {
    pub fn stat(u: NodeIx, v: NodeIx) -> Self {
        LinkRef { kind: LinkKind::Static, u, v }
    }

    pub fn dynamic(u: NodeIx, v: NodeIx) -> Self {
        LinkRef { kind: LinkKind::Dynamic, u, v }
    }

    /// Endpoint other than `at`, if the link touches `at`.
    pub fn other(&self, at: NodeIx) -> Option<NodeIx> {
        if self.u == at {
            Some(self.v)
        } else if self.v == at {
            Some(self.u)
        } else {
            None
        }
    }
}

/// A walk from `src` to `dst`. The routing engine only emits simple paths;
/// the evaluator accepts any walk.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FlowPath {
    pub src: NodeIx,
    pub dst: NodeIx,
    pub links: Vec<LinkRef>,
}

impl FlowPath {
    pub fn empty(at: NodeIx) -> Self {
        FlowPath { src: at, dst: at, links: Vec::new() }
    }
}

/// A flow path per demand plus the exact total workload cost.
#[derive(Clone, Debug, PartialEq)]
pub struct FlowAssignment {
    /// Aligned with the instance's demand list.
    pub paths: Vec<FlowPath>,
    pub total_cost: Rat,
}

// ---------------------------------------------------------------------------
// Validation
// ---------------------------------------------------------------------------

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Violation {
    SelfLoopStaticLink { index: usize },
    UnknownNodeInStaticLink { index: usize },
    NegativeStaticWeight { index: usize },
    StaticLinksInHypercubeMode,
    SwitchTooFewPorts { switch: usize },
    DuplicateSwitchId { switch: usize },
    UnknownNodeInSwitchLink { index: usize },
    UnknownSwitchInSwitchLink { index: usize },
    SwitchPortOutOfRange { index: usize },
    NodePortReused { node: NodeIx, ext_port: u64 },
    SwitchPortReused { switch: usize, sw_port: u64 },
    SwitchPortUnwired { switch: usize, sw_port: u64 },
    UniformWiringSwitchCount,
    UniformWiringPortMismatch { switch: usize },
    NegativeMu,
    NegativeKappa,
    SelfDemand { index: usize },
    NonPositiveDemand { index: usize },
    DuplicateDemand { index: usize },
    UnknownNodeInDemand { index: usize },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use Violation::*;
        match self {
            SelfLoopStaticLink { index } => {
                write!(f, "self-loop static link at static_links[{index}]")
            }
            UnknownNodeInStaticLink { index } => write!(f, "unknown node in static_links[{index}]"),
            NegativeStaticWeight { index } => write!(f, "negative weight at static_links[{index}]"),
            StaticLinksInHypercubeMode => {
                write!(f, "explicit static links listed in hypercube mode")
            }
            SwitchTooFewPorts { switch } => write!(f, "switch {switch} has fewer than 2 ports"),
            DuplicateSwitchId { switch } => write!(f, "duplicate switch id at switches[{switch}]"),
            UnknownNodeInSwitchLink { index } => write!(f, "unknown node in switch_links[{index}]"),
            UnknownSwitchInSwitchLink { index } => {
                write!(f, "unknown switch in switch_links[{index}]")
            }
            SwitchPortOutOfRange { index } => {
                write!(f, "switch port out of range in switch_links[{index}]")
            }
            NodePortReused { node, ext_port } => {
                write!(f, "node port reused: node {node} external port {ext_port}")
            }
            SwitchPortReused { switch, sw_port } => {
                write!(f, "switch port reused: switch {switch} port {sw_port}")
            }
            SwitchPortUnwired { switch, sw_port } => {
                write!(f, "switch port unwired: switch {switch} port {sw_port}")
            }
            UniformWiringSwitchCount => write!(f, "uniform wiring requires exactly one switch"),
            UniformWiringPortMismatch { switch } => {
                write!(f, "switch {switch} port count does not match uniform wiring")
            }
            NegativeMu => write!(f, "mu is negative"),
            NegativeKappa => write!(f, "kappa is negative"),
            SelfDemand { index } => write!(f, "self-demand at demands[{index}]"),
            NonPositiveDemand { index } => write!(f, "non-positive demand at demands[{index}]"),
            DuplicateDemand { index } => write!(f, "duplicate demand pair at demands[{index}]"),
            UnknownNodeInDemand { index } => write!(f, "unknown node in demands[{index}]"),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn ok(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.ok() {
            write!(f, "ok")
        } else {
            for v in &self.violations {
                writeln!(f, "{v}")?;
            }
            Ok(())
        }
    }
}

/// Structural validation of a hybrid network. Report-style: collects every
/// violation instead of failing fast.
pub fn validate_network(net: &HybridNetwork) -> ValidationReport {
    let mut report = ValidationReport::default();
    let n = net.node_count();

    match &net.nodes {
        NodeSet::Explicit(_) => {
            for (i, l) in net.static_links.iter().enumerate() {
                if l.u >= n || l.v >= n {
                    report.violations.push(Violation::UnknownNodeInStaticLink { index: i });
                } else if l.u == l.v {
                    report.violations.push(Violation::SelfLoopStaticLink { index: i });
                }
                if l.weight.is_negative() {
                    report.violations.push(Violation::NegativeStaticWeight { index: i });
                }
            }
        }
        NodeSet::Hypercube { .. } => {
            if !net.static_links.is_empty() {
                report.violations.push(Violation::StaticLinksInHypercubeMode);
            }
        }
    }

    let mut ids: BTreeSet<&str> = BTreeSet::new();
    for (s, sw) in net.switches.iter().enumerate() {
        if sw.ports < 2 {
            report.violations.push(Violation::SwitchTooFewPorts { switch: s });
        }
        if !ids.insert(&sw.id) {
            report.violations.push(Violation::DuplicateSwitchId { switch: s });
        }
    }

    match &net.wiring {
        Wiring::Links(links) => {
            let mut node_ports: BTreeSet<(NodeIx, u64)> = BTreeSet::new();
            let mut sw_ports: BTreeSet<(usize, u64)> = BTreeSet::new();
            for (i, l) in links.iter().enumerate() {
                if l.node >= n {
                    report.violations.push(Violation::UnknownNodeInSwitchLink { index: i });
                    continue;
                }
                if l.switch >= net.switches.len() {
                    report.violations.push(Violation::UnknownSwitchInSwitchLink { index: i });
                    continue;
                }
                if l.sw_port >= net.switches[l.switch].ports {
                    report.violations.push(Violation::SwitchPortOutOfRange { index: i });
                    continue;
                }
                if !node_ports.insert((l.node, l.ext_port)) {
                    report
                        .violations
                        .push(Violation::NodePortReused { node: l.node, ext_port: l.ext_port });
                }
                if !sw_ports.insert((l.switch, l.sw_port)) {
                    report
                        .violations
                        .push(Violation::SwitchPortReused { switch: l.switch, sw_port: l.sw_port });
                }
            }
            for (s, sw) in net.switches.iter().enumerate() {
                for p in 0..sw.ports {
                    if !sw_ports.contains(&(s, p)) {
                        report
                            .violations
                            .push(Violation::SwitchPortUnwired { switch: s, sw_port: p });
                    }
                }
            }
        }
        Wiring::UniformSingleSwitch { ports_per_node } => {
            if net.switches.len() != 1 {
                report.violations.push(Violation::UniformWiringSwitchCount);
            } else if net.switches[0].ports != ports_per_node * n {
                report.violations.push(Violation::UniformWiringPortMismatch { switch: 0 });
            }
        }
    }

    report
}

/// Validate a full instance: network structure plus workload, mu and kappa.
pub fn validate_instance(inst: &RRPInstance) -> ValidationReport {
    let mut report = validate_network(&inst.network);
    let n = inst.network.node_count();
    if inst.mu.is_negative() {
        report.violations.push(Violation::NegativeMu);
    }
    if inst.kappa.is_negative() {
        report.violations.push(Violation::NegativeKappa);
    }
    let mut seen: BTreeSet<(NodeIx, NodeIx)> = BTreeSet::new();
    for (i, d) in inst.workload.demands.iter().enumerate() {
        if d.src >= n || d.dst >= n {
            report.violations.push(Violation::UnknownNodeInDemand { index: i });
            continue;
        }
        if d.src == d.dst {
            report.violations.push(Violation::SelfDemand { index: i });
        }
        if !d.amount.is_positive() {
            report.violations.push(Violation::NonPositiveDemand { index: i });
        }
        if !seen.insert((d.src, d.dst)) {
            report.violations.push(Violation::DuplicateDemand { index: i });
        }
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::rat_u;

    fn path_abc() -> HybridNetwork {
        let mut net = HybridNetwork::explicit(vec!["a".into(), "b".into(), "c".into()]);
        net.static_links.push(StaticLink { u: 0, v: 1, weight: rat_u(1) });
        net.static_links.push(StaticLink { u: 1, v: 2, weight: rat_u(1) });
        net.switches.push(Switch { id: "s".into(), ports: 3 });
        net.wiring = Wiring::Links(vec![
            SwitchLink { node: 0, ext_port: 0, switch: 0, sw_port: 0 },
            SwitchLink { node: 1, ext_port: 0, switch: 0, sw_port: 1 },
            SwitchLink { node: 2, ext_port: 0, switch: 0, sw_port: 2 },
        ]);
        net
    }

    #[test]
    fn well_formed_network_validates() {
        assert!(validate_network(&path_abc()).ok());
    }

    #[test]
    fn self_loop_static_link_reported() {
        let mut net = path_abc();
        net.static_links.push(StaticLink { u: 0, v: 0, weight: rat_u(1) });
        let report = validate_network(&net);
        assert!(report.violations.contains(&Violation::SelfLoopStaticLink { index: 2 }));
    }

    #[test]
    fn switch_port_reuse_reported() {
        let mut net = path_abc();
        if let Wiring::Links(links) = &mut net.wiring {
            links.push(SwitchLink { node: 2, ext_port: 1, switch: 0, sw_port: 0 });
        }
        let report = validate_network(&net);
        assert!(report.violations.contains(&Violation::SwitchPortReused { switch: 0, sw_port: 0 }));
    }

    #[test]
    fn unwired_switch_port_reported() {
        let mut net = path_abc();
        net.switches[0].ports = 4;
        let report = validate_network(&net);
        assert!(report
            .violations
            .contains(&Violation::SwitchPortUnwired { switch: 0, sw_port: 3 }));
    }

    #[test]
    fn dynamic_links_translate_ports() {
        // 4-port switch, nodes a,b,c,d on ports 0..3, matching {(0,3)} -> (a,d)
        let mut net = HybridNetwork::explicit(vec!["a".into(), "b".into(), "c".into(), "d".into()]);
        net.switches.push(Switch { id: "s".into(), ports: 4 });
        net.wiring = Wiring::Links(
            (0..4).map(|i| SwitchLink { node: i, ext_port: 0, switch: 0, sw_port: i }).collect(),
        );
        let cfg = Configuration::normalized(vec![vec![(0, 3)]]);
        let links = dynamic_links(&net, &cfg, false).unwrap();
        assert_eq!(links.len(), 1);
        assert_eq!((links[0].u, links[0].v), (0, 3));

        let empty = Configuration::empty(1);
        assert!(dynamic_links(&net, &empty, false).unwrap().is_empty());
    }

    #[test]
    fn self_loop_dynamic_link_policy() {
        // node a wired twice; matching its two ports is rejected by default
        let mut net = HybridNetwork::explicit(vec!["a".into(), "b".into()]);
        net.switches.push(Switch { id: "s".into(), ports: 4 });
        net.wiring = Wiring::Links(vec![
            SwitchLink { node: 0, ext_port: 0, switch: 0, sw_port: 0 },
            SwitchLink { node: 0, ext_port: 1, switch: 0, sw_port: 1 },
            SwitchLink { node: 1, ext_port: 0, switch: 0, sw_port: 2 },
            SwitchLink { node: 1, ext_port: 1, switch: 0, sw_port: 3 },
        ]);
        let cfg = Configuration::normalized(vec![vec![(0, 1), (2, 3)]]);
        assert!(matches!(
            dynamic_links(&net, &cfg, false),
            Err(CfgError::SelfLoop { node: 0, .. })
        ));
        let links = dynamic_links(&net, &cfg, true).unwrap();
        assert_eq!(links.len(), 2);
        assert_eq!((links[0].u, links[0].v), (0, 0));
    }

    #[test]
    fn dynamic_link_count_matches_matching_sizes() {
        let net = path_abc();
        let cfg = Configuration::normalized(vec![vec![(2, 0)]]);
        let links = dynamic_links(&net, &cfg, false).unwrap();
        assert_eq!(links.len(), cfg.total_pairs());
        assert_eq!((links[0].u, links[0].v), (0, 2));
    }

    #[test]
    fn hypercube_names_round_trip() {
        let net = HybridNetwork::hypercube(4);
        assert_eq!(net.node_count(), 16);
        for ix in 0..16 {
            let name = net.node_name(ix);
            assert_eq!(net.node_ix(&name), Some(ix));
        }
        assert_eq!(net.node_name(1), "1000");
        assert_eq!(net.static_neighbors(0).len(), 4);
        assert_eq!(net.static_weight(0, 1), Some(rat_u(1)));
        assert_eq!(net.static_weight(0, 3), None);
    }

    #[test]
    fn uniform_wiring_lookup() {
        let mut net = HybridNetwork::hypercube(3);
        net.switches.push(Switch { id: "s".into(), ports: 16 });
        net.wiring = Wiring::UniformSingleSwitch { ports_per_node: 2 };
        assert!(validate_network(&net).ok());
        assert_eq!(net.wired_ports(5), 2);
        assert_eq!(net.port_owner(0, 11), Some((5, 1)));
        assert_eq!(net.ports_of_node(5), vec![(0, 10), (0, 11)]);
    }
}
