//! Instance, configuration and flow file formats (UTF-8 JSON).
//!
//! Instance files carry `nodes`, `static_links` (`[u, v, "p/q"]`),
//! `switches`, `switch_links` (`[node, ext_port, switch_id, sw_port]` rows,
//! or the compact `{"uniform_per_node": k}` form used for uniform wiring),
//! `adjacency` (`"explicit"` or `{"hypercube": d}`), `mu`, `demands`,
//! `kappa` and `policy`. Rationals are strings `"p/q"` or `"p"` and
//! round-trip exactly. Parsing then serializing (or vice versa) is the
//! identity on structured values.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::net::{
    Bound, Configuration, Demand, FlowPath, HybridNetwork, LinkKind, LinkRef, NodeIx, NodeSet,
    RRPInstance, RoutingPolicy, StaticLink, Switch, SwitchLink, Wiring, Workload,
};
use crate::rational::{fmt_rat, parse_rat, RatParseError};

#[derive(Debug, Error)]
pub enum ParseError {
    #[error("invalid JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Rational(#[from] RatParseError),
    #[error("unknown node `{0}`")]
    UnknownNode(String),
    #[error("unknown switch `{0}`")]
    UnknownSwitch(String),
    #[error("duplicate switch id `{0}`")]
    DuplicateSwitchId(String),
    #[error("self-demand `{0}`")]
    SelfDemand(String),
    #[error("duplicate demand pair `{0}` -> `{1}`")]
    DuplicateDemand(String, String),
    #[error("node name `{0}` is invalid (allowed: [A-Za-z0-9_.+-])")]
    BadNodeName(String),
    #[error("duplicate node name `{0}`")]
    DuplicateNodeName(String),
    #[error("hypercube mode takes an empty `nodes` array")]
    HypercubeWithNodeList,
    #[error("bad flow key `{0}`: expected `src|dst`")]
    BadFlowKey(String),
    #[error("bad link kind `{0}`")]
    BadLinkKind(String),
}

fn check_name(name: &str) -> Result<(), ParseError> {
    let ok = !name.is_empty()
        && name.chars().all(|c| c.is_ascii_alphanumeric() || matches!(c, '_' | '.' | '+' | '-'));
    if ok {
        Ok(())
    } else {
        Err(ParseError::BadNodeName(name.to_string()))
    }
}

// --------------------------------------------------------------------------
// Raw serde mirror of the file format
// --------------------------------------------------------------------------

#[derive(Serialize, Deserialize)]
struct RawInstance {
    nodes: Vec<String>,
    static_links: Vec<(String, String, String)>,
    switches: Vec<RawSwitch>,
    switch_links: RawWiring,
    adjacency: RawAdjacency,
    mu: String,
    demands: Vec<(String, String, String)>,
    kappa: String,
    policy: RawPolicy,
}

#[derive(Serialize, Deserialize)]
struct RawSwitch {
    id: String,
    ports: u64,
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum RawWiring {
    Links(Vec<(String, u64, String, u64)>),
    Uniform { uniform_per_node: u64 },
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum RawAdjacency {
    Explicit(String),
    Hypercube { hypercube: u32 },
}

#[derive(Serialize, Deserialize)]
struct RawPolicy {
    sigma: RawBound,
    delta: RawBound,
    lambda: RawBound,
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum RawBound {
    Finite(u64),
    Word(String),
}

fn bound_from_raw(raw: &RawBound) -> Result<Bound, ParseError> {
    match raw {
        RawBound::Finite(n) => Ok(Bound::Finite(*n)),
        RawBound::Word(w) if w == "inf" => Ok(Bound::Infinite),
        RawBound::Word(w) => Err(ParseError::BadLinkKind(w.clone())),
    }
}

fn bound_to_raw(b: &Bound) -> RawBound {
    match b {
        Bound::Finite(n) => RawBound::Finite(*n),
        Bound::Infinite => RawBound::Word("inf".into()),
    }
}

// --------------------------------------------------------------------------
// Instance files
// --------------------------------------------------------------------------

pub fn parse_instance(text: &str) -> Result<RRPInstance, ParseError> {
    let raw: RawInstance = serde_json::from_str(text)?;

    let nodes = match raw.adjacency {
        RawAdjacency::Explicit(ref s) if s == "explicit" => {
            let mut seen = std::collections::HashSet::new();
            for n in &raw.nodes {
                check_name(n)?;
                if !seen.insert(n.clone()) {
                    return Err(ParseError::DuplicateNodeName(n.clone()));
                }
            }
            NodeSet::Explicit(raw.nodes.clone())
        }
        RawAdjacency::Explicit(ref s) => return Err(ParseError::BadLinkKind(s.clone())),
        RawAdjacency::Hypercube { hypercube } => {
            if !raw.nodes.is_empty() {
                return Err(ParseError::HypercubeWithNodeList);
            }
            NodeSet::Hypercube { dim: hypercube }
        }
    };

    let name_ix: std::collections::HashMap<String, NodeIx> = match &nodes {
        NodeSet::Explicit(names) => {
            names.iter().enumerate().map(|(i, n)| (n.clone(), i as NodeIx)).collect()
        }
        NodeSet::Hypercube { .. } => Default::default(),
    };
    let resolve = |name: &str| -> Result<NodeIx, ParseError> {
        match &nodes {
            NodeSet::Explicit(_) => {
                name_ix.get(name).copied().ok_or_else(|| ParseError::UnknownNode(name.to_string()))
            }
            NodeSet::Hypercube { .. } => {
                nodes.node_ix(name).ok_or_else(|| ParseError::UnknownNode(name.to_string()))
            }
        }
    };
    let mut net = HybridNetwork {
        nodes: nodes.clone(),
        static_links: Vec::new(),
        switches: Vec::new(),
        wiring: Wiring::Links(Vec::new()),
    };

    for (u, v, w) in &raw.static_links {
        net.static_links.push(StaticLink { u: resolve(u)?, v: resolve(v)?, weight: parse_rat(w)? });
    }

    let mut switch_ix: BTreeMap<String, usize> = BTreeMap::new();
    for (i, s) in raw.switches.iter().enumerate() {
        if switch_ix.insert(s.id.clone(), i).is_some() {
            return Err(ParseError::DuplicateSwitchId(s.id.clone()));
        }
        net.switches.push(Switch { id: s.id.clone(), ports: s.ports });
    }

    net.wiring = match &raw.switch_links {
        RawWiring::Links(rows) => {
            let mut links = Vec::with_capacity(rows.len());
            for (node, ext_port, sw, sw_port) in rows {
                let switch =
                    *switch_ix.get(sw).ok_or_else(|| ParseError::UnknownSwitch(sw.clone()))?;
                links.push(SwitchLink {
                    node: resolve(node)?,
                    ext_port: *ext_port,
                    switch,
                    sw_port: *sw_port,
                });
            }
            Wiring::Links(links)
        }
        RawWiring::Uniform { uniform_per_node } => {
            Wiring::UniformSingleSwitch { ports_per_node: *uniform_per_node }
        }
    };

    let mut demands = Vec::with_capacity(raw.demands.len());
    let mut seen = std::collections::HashSet::new();
    for (src, dst, amount) in &raw.demands {
        if src == dst {
            return Err(ParseError::SelfDemand(src.clone()));
        }
        let s = resolve(src)?;
        let d = resolve(dst)?;
        if !seen.insert((s, d)) {
            return Err(ParseError::DuplicateDemand(src.clone(), dst.clone()));
        }
        demands.push(Demand { src: s, dst: d, amount: parse_rat(amount)? });
    }

    Ok(RRPInstance {
        mu: parse_rat(&raw.mu)?,
        kappa: parse_rat(&raw.kappa)?,
        policy: RoutingPolicy {
            sigma: bound_from_raw(&raw.policy.sigma)?,
            delta: bound_from_raw(&raw.policy.delta)?,
            lambda: bound_from_raw(&raw.policy.lambda)?,
        },
        workload: Workload::new(demands),
        network: net,
    })
}

pub fn serialize_instance(inst: &RRPInstance) -> String {
    let net = &inst.network;
    let name = |ix: NodeIx| net.node_name(ix);
    let raw = RawInstance {
        nodes: match &net.nodes {
            NodeSet::Explicit(names) => names.clone(),
            NodeSet::Hypercube { .. } => Vec::new(),
        },
        static_links: net
            .static_links
            .iter()
            .map(|l| (name(l.u), name(l.v), fmt_rat(&l.weight)))
            .collect(),
        switches: net
            .switches
            .iter()
            .map(|s| RawSwitch { id: s.id.clone(), ports: s.ports })
            .collect(),
        switch_links: match &net.wiring {
            Wiring::Links(links) => RawWiring::Links(
                links
                    .iter()
                    .map(|l| {
                        (name(l.node), l.ext_port, net.switches[l.switch].id.clone(), l.sw_port)
                    })
                    .collect(),
            ),
            Wiring::UniformSingleSwitch { ports_per_node } => {
                RawWiring::Uniform { uniform_per_node: *ports_per_node }
            }
        },
        adjacency: match &net.nodes {
            NodeSet::Explicit(_) => RawAdjacency::Explicit("explicit".into()),
            NodeSet::Hypercube { dim } => RawAdjacency::Hypercube { hypercube: *dim },
        },
        mu: fmt_rat(&inst.mu),
        demands: inst
            .workload
            .demands
            .iter()
            .map(|d| (name(d.src), name(d.dst), fmt_rat(&d.amount)))
            .collect(),
        kappa: fmt_rat(&inst.kappa),
        policy: RawPolicy {
            sigma: bound_to_raw(&inst.policy.sigma),
            delta: bound_to_raw(&inst.policy.delta),
            lambda: bound_to_raw(&inst.policy.lambda),
        },
    };
    serde_json::to_string_pretty(&raw).expect("instance serialization cannot fail")
}

// --------------------------------------------------------------------------
// Configuration files: { switch id -> [[port, port], ...] }
// --------------------------------------------------------------------------

pub fn parse_configuration(text: &str, net: &HybridNetwork) -> Result<Configuration, ParseError> {
    let raw: BTreeMap<String, Vec<(u64, u64)>> = serde_json::from_str(text)?;
    let mut matchings = vec![Vec::new(); net.switches.len()];
    for (id, pairs) in raw {
        let ix =
            net.switches.iter().position(|s| s.id == id).ok_or(ParseError::UnknownSwitch(id))?;
        matchings[ix] = pairs;
    }
    Ok(Configuration::normalized(matchings))
}

pub fn serialize_configuration(cfg: &Configuration, net: &HybridNetwork) -> String {
    let map: BTreeMap<String, &Vec<(u64, u64)>> =
        net.switches.iter().enumerate().map(|(i, s)| (s.id.clone(), &cfg.matchings[i])).collect();
    serde_json::to_string_pretty(&map).expect("configuration serialization cannot fail")
}

// --------------------------------------------------------------------------
// Flow files: { "src|dst" -> [{"kind": ..., "u": ..., "v": ...}, ...] }
// --------------------------------------------------------------------------

#[derive(Serialize, Deserialize)]
struct RawFlowLink {
    kind: String,
    u: String,
    v: String,
}

/// Flow paths keyed by their demand's (src, dst) pair.
pub type KeyedFlows = Vec<((NodeIx, NodeIx), FlowPath)>;

pub fn parse_flows(text: &str, net: &HybridNetwork) -> Result<KeyedFlows, ParseError> {
    let raw: BTreeMap<String, Vec<RawFlowLink>> = serde_json::from_str(text)?;
    let name_ix = net.name_index();
    let resolve = |name: &str| -> Result<NodeIx, ParseError> {
        match &net.nodes {
            NodeSet::Explicit(_) => {
                name_ix.get(name).copied().ok_or_else(|| ParseError::UnknownNode(name.to_string()))
            }
            NodeSet::Hypercube { .. } => {
                net.node_ix(name).ok_or_else(|| ParseError::UnknownNode(name.to_string()))
            }
        }
    };
    let mut out = Vec::with_capacity(raw.len());
    for (key, links) in raw {
        let (src_s, dst_s) =
            key.split_once('|').ok_or_else(|| ParseError::BadFlowKey(key.clone()))?;
        let src = resolve(src_s)?;
        let dst = resolve(dst_s)?;
        let mut path = FlowPath { src, dst, links: Vec::with_capacity(links.len()) };
        for l in links {
            let kind = match l.kind.as_str() {
                "static" => LinkKind::Static,
                "dynamic" => LinkKind::Dynamic,
                other => return Err(ParseError::BadLinkKind(other.to_string())),
            };
            path.links.push(LinkRef { kind, u: resolve(&l.u)?, v: resolve(&l.v)? });
        }
        out.push(((src, dst), path));
    }
    Ok(out)
}

pub fn serialize_flows(flows: &[((NodeIx, NodeIx), FlowPath)], net: &HybridNetwork) -> String {
    let map: BTreeMap<String, Vec<RawFlowLink>> = flows
        .iter()
        .map(|((src, dst), path)| {
            let key = format!("{}|{}", net.node_name(*src), net.node_name(*dst));
            let links = path
                .links
                .iter()
                .map(|l| RawFlowLink {
                    kind: match l.kind {
                        LinkKind::Static => "static".into(),
                        LinkKind::Dynamic => "dynamic".into(),
                    },
                    u: net.node_name(l.u),
                    v: net.node_name(l.v),
                })
                .collect();
            (key, links)
        })
        .collect();
    serde_json::to_string_pretty(&map).expect("flow serialization cannot fail")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::net::validate_instance;
    use crate::rational::{frac, rat_u};

    fn path_instance() -> RRPInstance {
        let mut net = HybridNetwork::explicit(vec!["a".into(), "b".into(), "c".into()]);
        net.static_links.push(StaticLink { u: 0, v: 1, weight: rat_u(1) });
        net.static_links.push(StaticLink { u: 1, v: 2, weight: frac(1, 3) });
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
            policy: RoutingPolicy {
                sigma: Bound::Finite(0),
                delta: Bound::Finite(1),
                lambda: Bound::Infinite,
            },
        }
    }

    #[test]
    fn instance_round_trip() {
        let inst = path_instance();
        let text = serialize_instance(&inst);
        let back = parse_instance(&text).unwrap();
        assert_eq!(back, inst);
        assert!(validate_instance(&back).ok());
    }

    #[test]
    fn thirds_survive_round_trip() {
        let inst = path_instance();
        let back = parse_instance(&serialize_instance(&inst)).unwrap();
        assert_eq!(back.network.static_links[1].weight, frac(1, 3));
    }

    #[test]
    fn self_demand_rejected() {
        let mut inst = path_instance();
        inst.workload.demands.push(Demand { src: 1, dst: 1, amount: rat_u(1) });
        let text = serialize_instance(&inst);
        assert!(matches!(parse_instance(&text), Err(ParseError::SelfDemand(_))));
    }

    #[test]
    fn duplicate_demand_rejected() {
        let mut inst = path_instance();
        inst.workload.demands.push(Demand { src: 0, dst: 2, amount: rat_u(3) });
        let text = serialize_instance(&inst);
        assert!(matches!(parse_instance(&text), Err(ParseError::DuplicateDemand(_, _))));
    }

    #[test]
    fn unknown_node_rejected() {
        let text = r#"{
            "nodes": ["a", "b"],
            "static_links": [["a", "b", "1"]],
            "switches": [],
            "switch_links": [],
            "adjacency": "explicit",
            "mu": "1",
            "demands": [["a", "zz", "1"]],
            "kappa": "0",
            "policy": {"sigma": "inf", "delta": "inf", "lambda": "inf"}
        }"#;
        assert!(matches!(parse_instance(text), Err(ParseError::UnknownNode(n)) if n == "zz"));
    }

    #[test]
    fn hypercube_instance_round_trip() {
        let mut net = HybridNetwork::hypercube(3);
        net.switches.push(Switch { id: "s".into(), ports: 8 });
        net.wiring = Wiring::UniformSingleSwitch { ports_per_node: 1 };
        let inst = RRPInstance {
            network: net,
            mu: frac(1, 2),
            workload: Workload::new(vec![Demand { src: 0, dst: 7, amount: rat_u(1) }]),
            kappa: rat_u(1),
            policy: RoutingPolicy::unrestricted(),
        };
        let text = serialize_instance(&inst);
        let back = parse_instance(&text).unwrap();
        assert_eq!(back, inst);
    }

    #[test]
    fn configuration_and_flow_round_trip() {
        let inst = path_instance();
        let cfg = Configuration::normalized(vec![vec![(1, 0)]]);
        let text = serialize_configuration(&cfg, &inst.network);
        assert_eq!(parse_configuration(&text, &inst.network).unwrap(), cfg);

        let flows =
            vec![((0, 2), FlowPath { src: 0, dst: 2, links: vec![LinkRef::dynamic(0, 2)] })];
        let text = serialize_flows(&flows, &inst.network);
        assert_eq!(parse_flows(&text, &inst.network).unwrap(), flows);
    }
}
