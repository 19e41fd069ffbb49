//! Generators for polynomial families of static networks and the
//! "smallest member of size >= n" lookup used by the reduction forges.
//!
//! Size sequences (index i >= 0):
//!   hypercube            2^i
//!   complete             i + 1          (K_1, K_2, ...)
//!   cycle                i + 3          (C_3, C_4, ...)
//!   complete-binary-tree 2^(i+1) - 1
//!   square-grid          (i + 1)^2
//!   independent-set      i + 1

use std::fmt;
use std::str::FromStr;

use num::One;

use crate::net::{HybridNetwork, StaticLink, Switch, Wiring};
use crate::rational::Rat;

/// Explicit graphs are materialized up to this many nodes; larger hypercubes
/// switch to the implicit neighbor oracle.
pub const EXPLICIT_NODE_LIMIT: u64 = 1 << 16;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Family {
    Hypercube,
    Complete,
    Cycle,
    CompleteBinaryTree,
    SquareGrid,
    IndependentSet,
}

impl Family {
    pub const ALL: [Family; 6] = [
        Family::Hypercube,
        Family::Complete,
        Family::Cycle,
        Family::CompleteBinaryTree,
        Family::SquareGrid,
        Family::IndependentSet,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Family::Hypercube => "hypercube",
            Family::Complete => "complete",
            Family::Cycle => "cycle",
            Family::CompleteBinaryTree => "complete-binary-tree",
            Family::SquareGrid => "square-grid",
            Family::IndependentSet => "independent-set",
        }
    }

    /// Number of nodes of the family member at `index`.
    pub fn size(&self, index: u32) -> u64 {
        match self {
            Family::Hypercube => 1u64 << index,
            Family::Complete | Family::IndependentSet => index as u64 + 1,
            Family::Cycle => index as u64 + 3,
            Family::CompleteBinaryTree => (1u64 << (index + 1)) - 1,
            Family::SquareGrid => {
                let side = index as u64 + 1;
                side * side
            }
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.name())
    }
}

impl FromStr for Family {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Family::ALL
            .iter()
            .copied()
            .find(|f| f.name() == s)
            .ok_or_else(|| format!("unknown family `{s}`"))
    }
}

/// Smallest index i with |H_i| >= n, together with that size.
pub fn smallest_member_at_least(family: Family, n: u64) -> (u32, u64) {
    assert!(n >= 1, "n must be at least 1");
    let mut i = 0u32;
    loop {
        let size = family.size(i);
        if size >= n {
            return (i, size);
        }
        i += 1;
    }
}

fn grid_links(side: u64) -> Vec<(u64, u64)> {
    let mut links = Vec::new();
    for r in 0..side {
        for c in 0..side {
            let v = r * side + c;
            if c + 1 < side {
                links.push((v, v + 1));
            }
            if r + 1 < side {
                links.push((v, v + side));
            }
        }
    }
    links
}

/// Static part of the family member at `index`: uniform weight 1, no
/// switches attached. Hypercubes beyond [`EXPLICIT_NODE_LIMIT`] come back in
/// implicit mode so the edge set is never materialized.
pub fn generate(family: Family, index: u32) -> HybridNetwork {
    let n = family.size(index);
    if family == Family::Hypercube && n > EXPLICIT_NODE_LIMIT {
        return HybridNetwork::hypercube(index);
    }
    let names: Vec<String> = match family {
        Family::Hypercube => {
            let net = HybridNetwork::hypercube(index);
            (0..n).map(|v| net.node_name(v)).collect()
        }
        _ => (0..n).map(|v| v.to_string()).collect(),
    };
    let pairs: Vec<(u64, u64)> = match family {
        Family::Hypercube => {
            let mut links = Vec::new();
            for v in 0..n {
                for b in 0..index {
                    let w = v ^ (1 << b);
                    if v < w {
                        links.push((v, w));
                    }
                }
            }
            links
        }
        Family::Complete => {
            let mut links = Vec::new();
            for u in 0..n {
                for v in u + 1..n {
                    links.push((u, v));
                }
            }
            links
        }
        Family::Cycle => (0..n).map(|v| (v, (v + 1) % n)).collect(),
        Family::CompleteBinaryTree => {
            // heap numbering: children of v (1-based) are 2v and 2v+1
            (2..=n).map(|v| (v / 2 - 1, v - 1)).collect()
        }
        Family::SquareGrid => {
            let side = index as u64 + 1;
            grid_links(side)
        }
        Family::IndependentSet => Vec::new(),
    };
    let mut net = HybridNetwork::explicit(names);
    net.static_links =
        pairs.into_iter().map(|(u, v)| StaticLink { u, v, weight: Rat::one() }).collect();
    net
}

/// Attach one switch wired uniformly: node `v` gets ports
/// `k*v .. k*v+k-1`. With `k == 0` the network stays switchless.
pub fn attach_uniform_switch(mut net: HybridNetwork, ports_per_node: u64) -> HybridNetwork {
    if ports_per_node == 0 {
        return net;
    }
    let ports = ports_per_node * net.node_count();
    net.switches = vec![Switch { id: "s".into(), ports }];
    net.wiring = Wiring::UniformSingleSwitch { ports_per_node };
    net
}
