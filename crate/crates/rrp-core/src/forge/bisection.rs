//! Reduction from minimum bisection of 3-regular graphs to routing with
//! two wired ports per node.
//!
//! The demand graph plants two long chains of heavy demands (weight alpha)
//! whose links any cheap solution is forced to realize verbatim, stars of
//! medium demands (weight beta) from the chain centers to every source
//! node, and one unit demand per source edge. A configuration within
//! budget must close the chains into a single cycle through the source
//! nodes, splitting them into the two halves of a bisection; the unit
//! budget then counts the cut.

use std::collections::{BTreeMap, HashMap};

use num::BigInt;

use crate::families::{self, Family};
use crate::net::{
    Configuration, Demand, FlowAssignment, FlowPath, LinkRef, NodeIx, RRPInstance, RoutingPolicy,
    Workload,
};
use crate::rational::{fmt_rat, frac, rat_u, Rat};

use super::{BisectionInstance, DemandClasses, ForgeError, ReductionArtifact};

/// Bisection artifact: the generic artifact plus the node-placement tables
/// the witness builder needs.
#[derive(Clone, Debug)]
pub struct BisectionArtifact {
    pub artifact: ReductionArtifact,
    pub source: BisectionInstance,
    /// Effective budget after clamping to floor(n/3) + 46.
    pub k: u64,
    /// Chain half-length: chain indices run -half ..= half.
    pub half: i64,
}

impl BisectionArtifact {
    pub fn chain_x(&self, i: i64) -> NodeIx {
        debug_assert!(i.unsigned_abs() <= self.half as u64);
        (i + self.half) as NodeIx
    }

    pub fn chain_y(&self, i: i64) -> NodeIx {
        (2 * self.half + 1) as NodeIx + self.chain_x(i)
    }

    /// Network node carrying source node `pos` (position in sorted order).
    pub fn source_node(&self, pos: usize) -> NodeIx {
        2 * (2 * self.half as NodeIx + 1) + pos as NodeIx
    }
}

fn big(n: u64) -> BigInt {
    BigInt::from(n)
}

/// Build the routing instance for a bisection source over the given
/// network family. Budgets above the provable width bound floor(n/3) + 46
/// are clamped (such instances are trivially yes).
pub fn reduce_bisection(
    src: &BisectionInstance,
    family: Family,
) -> Result<BisectionArtifact, ForgeError> {
    src.validate()?;
    let n = src.nodes.len() as u64;
    let k_bound = n / 3 + 46;
    let (k, clamped_k) = if src.k > k_bound { (k_bound, Some(src.k)) } else { (src.k, None) };

    let chain_len = 3 * n * n; // L
    let half = (chain_len / 2) as i64;
    let needed = n + 6 * n * n + 2;
    let (family_index, network_size) = families::smallest_member_at_least(family, needed);
    let network = families::attach_uniform_switch(families::generate(family, family_index), 2);

    let alpha = Rat::from_integer(big(24) * big(n).pow(6));
    let beta = Rat::from_integer(big(6) * big(n).pow(3));
    let mu = Rat::new(big(1), big(6) * big(n) * big(n));
    let kappa_alpha = alpha.clone();
    let kappa_beta = Rat::from_integer(big(3) * big(n).pow(4))
        + Rat::new(big(n).pow(3), big(2))
        + Rat::from_integer(big(n) * big(n));
    let kappa_unit = Rat::new(big(k), big(2))
        + frac(1, 8)
        + Rat::new(BigInt::from(-1), big(4) * big(n))
        + Rat::new(big(k), big(3) * big(n) * big(n));
    let kappa = &kappa_alpha + &kappa_beta + &kappa_unit;

    // node placement: x-chain, y-chain, source nodes (sorted), fillers
    let probe = BisectionArtifact {
        artifact: ReductionArtifact {
            instance: RRPInstance {
                network: network.clone(),
                mu: mu.clone(),
                workload: Workload::default(),
                kappa: kappa.clone(),
                policy: RoutingPolicy::unrestricted(),
            },
            roles: BTreeMap::new(),
            params: BTreeMap::new(),
            classes: DemandClasses { alpha: 0..0, beta: 0..0, unit: 0..0 },
            clamped_k,
        },
        source: src.clone(),
        k,
        half,
    };

    let mut demands = Vec::new();
    // chain demands, oriented outward from the centers
    for i in 0..half {
        demands.push(Demand {
            src: probe.chain_x(i),
            dst: probe.chain_x(i + 1),
            amount: alpha.clone(),
        });
    }
    for i in 0..half {
        demands.push(Demand {
            src: probe.chain_x(-i),
            dst: probe.chain_x(-i - 1),
            amount: alpha.clone(),
        });
    }
    for i in 0..half {
        demands.push(Demand {
            src: probe.chain_y(i),
            dst: probe.chain_y(i + 1),
            amount: alpha.clone(),
        });
    }
    for i in 0..half {
        demands.push(Demand {
            src: probe.chain_y(-i),
            dst: probe.chain_y(-i - 1),
            amount: alpha.clone(),
        });
    }
    let alpha_range = 0..demands.len();

    // star demands from both centers to every source node
    for pos in 0..src.nodes.len() {
        demands.push(Demand {
            src: probe.chain_x(0),
            dst: probe.source_node(pos),
            amount: beta.clone(),
        });
    }
    for pos in 0..src.nodes.len() {
        demands.push(Demand {
            src: probe.chain_y(0),
            dst: probe.source_node(pos),
            amount: beta.clone(),
        });
    }
    let beta_range = alpha_range.end..demands.len();

    // one unit demand per source edge, low endpoint to high
    let mut edges = src.edges.clone();
    edges.sort_unstable();
    for (u, v) in edges {
        demands.push(Demand {
            src: probe.source_node(u),
            dst: probe.source_node(v),
            amount: rat_u(1),
        });
    }
    let unit_range = beta_range.end..demands.len();

    let mut roles: BTreeMap<NodeIx, String> = BTreeMap::new();
    for i in -half..=half {
        roles.insert(probe.chain_x(i), format!("chain_x[{i}]"));
        roles.insert(probe.chain_y(i), format!("chain_y[{i}]"));
    }
    for (pos, name) in src.nodes.iter().enumerate() {
        roles.insert(probe.source_node(pos), format!("source[{name}]"));
    }
    let first_filler = probe.source_node(src.nodes.len());
    for (t, v) in (first_filler..network_size).enumerate() {
        roles.insert(v, format!("filler[{t}]"));
    }

    let mut params: BTreeMap<String, String> = BTreeMap::new();
    params.insert("n".into(), n.to_string());
    params.insert("k_requested".into(), src.k.to_string());
    params.insert("k".into(), k.to_string());
    params.insert("chain_length".into(), chain_len.to_string());
    params.insert("alpha".into(), fmt_rat(&alpha));
    params.insert("beta".into(), fmt_rat(&beta));
    params.insert("mu".into(), fmt_rat(&mu));
    params.insert("kappa_alpha".into(), fmt_rat(&kappa_alpha));
    params.insert("kappa_beta".into(), fmt_rat(&kappa_beta));
    params.insert("kappa_unit".into(), fmt_rat(&kappa_unit));
    params.insert("kappa".into(), fmt_rat(&kappa));
    params.insert("family".into(), family.name().into());
    params.insert("family_index".into(), family_index.to_string());
    params.insert("network_size".into(), network_size.to_string());
    params.insert("chain_nodes".into(), (2 * (chain_len + 1)).to_string());
    params.insert("filler_nodes".into(), (network_size - needed).to_string());
    params.insert("alpha_demands".into(), alpha_range.len().to_string());
    params.insert("beta_demands".into(), beta_range.len().to_string());
    params.insert("unit_demands".into(), unit_range.len().to_string());

    let mut artifact = probe;
    artifact.artifact.instance.workload = Workload::new(demands);
    artifact.artifact.roles = roles;
    artifact.artifact.params = params;
    artifact.artifact.classes =
        DemandClasses { alpha: alpha_range, beta: beta_range, unit: unit_range };
    Ok(artifact)
}

/// Turn a balanced partition of cut width at most k into a configuration
/// and flow assignment: the chains become dynamic links, closed into a
/// cycle through side A between the chain tops and side B between the
/// bottoms; stars and unit demands ride the shorter cycle arc.
pub fn witness_bisection(
    art: &BisectionArtifact,
    side_a: &[String],
    side_b: &[String],
) -> Result<(Configuration, FlowAssignment), ForgeError> {
    let src = &art.source;
    let n = src.nodes.len();
    let pos_of = |name: &String| -> Result<usize, ForgeError> {
        src.nodes
            .binary_search(name)
            .map_err(|_| ForgeError::CertificateInvalid(format!("unknown node `{name}`")))
    };
    let mut a: Vec<usize> = side_a.iter().map(pos_of).collect::<Result<_, _>>()?;
    let mut b: Vec<usize> = side_b.iter().map(pos_of).collect::<Result<_, _>>()?;
    a.sort_unstable();
    a.dedup();
    b.sort_unstable();
    b.dedup();
    if a.len() != n / 2 || b.len() != n / 2 {
        return Err(ForgeError::CertificateInvalid("unbalanced partition".into()));
    }
    let mut all: Vec<usize> = a.iter().chain(&b).copied().collect();
    all.sort_unstable();
    if all != (0..n).collect::<Vec<_>>() {
        return Err(ForgeError::CertificateInvalid("not a partition of the node set".into()));
    }
    let in_a = |v: usize| a.binary_search(&v).is_ok();
    let cut = src.edges.iter().filter(|&&(u, v)| in_a(u) != in_a(v)).count() as u64;
    if cut > art.k {
        return Err(ForgeError::CertificateInvalid(format!(
            "unbalanced or cut > k: cut {cut} exceeds budget {}",
            art.k
        )));
    }

    // cycle: x-chain left to right, side A, y-chain right to left, side B
    let half = art.half;
    let mut cycle: Vec<NodeIx> = Vec::new();
    for i in -half..=half {
        cycle.push(art.chain_x(i));
    }
    for &v in &a {
        cycle.push(art.source_node(v));
    }
    for i in (-half..=half).rev() {
        cycle.push(art.chain_y(i));
    }
    for &v in &b {
        cycle.push(art.source_node(v));
    }
    let len = cycle.len();
    let pos: HashMap<NodeIx, usize> = cycle.iter().enumerate().map(|(t, &v)| (v, t)).collect();

    // each node carries exactly the two cycle links; ports 2v and 2v+1
    let mut used: HashMap<NodeIx, u64> = HashMap::new();
    let mut matching = Vec::with_capacity(len);
    for t in 0..len {
        let (u, v) = (cycle[t], cycle[(t + 1) % len]);
        let pu = 2 * u + {
            let c = used.entry(u).or_insert(0);
            let p = *c;
            *c += 1;
            p
        };
        let pv = 2 * v + {
            let c = used.entry(v).or_insert(0);
            let p = *c;
            *c += 1;
            p
        };
        matching.push((pu, pv));
    }
    let configuration = Configuration::normalized(vec![matching]);

    // flow paths: the shorter cycle arc, forward on ties
    let arc = |s: NodeIx, d: NodeIx| -> FlowPath {
        let (ps, pd) = (pos[&s], pos[&d]);
        let fwd = (pd + len - ps) % len;
        let bwd = len - fwd;
        let mut links = Vec::new();
        let mut at = ps;
        if fwd <= bwd {
            for _ in 0..fwd {
                let next = (at + 1) % len;
                links.push(LinkRef::dynamic(cycle[at], cycle[next]));
                at = next;
            }
        } else {
            for _ in 0..bwd {
                let next = (at + len - 1) % len;
                links.push(LinkRef::dynamic(cycle[at], cycle[next]));
                at = next;
            }
        }
        FlowPath { src: s, dst: d, links }
    };

    let inst = &art.artifact.instance;
    let mut paths = Vec::with_capacity(inst.workload.demands.len());
    let mut total = Rat::from_integer(0.into());
    for d in &inst.workload.demands {
        let path = arc(d.src, d.dst);
        total += &d.amount * Rat::from_integer(BigInt::from(path.links.len() as u64)) * &inst.mu;
        paths.push(path);
    }
    Ok((configuration, FlowAssignment { paths, total_cost: total }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forge::evaluate_components;
    use crate::net::{validate_instance, Bound};
    use crate::rational::parse_rat;

    fn k4_artifact() -> BisectionArtifact {
        reduce_bisection(&BisectionInstance::k4(4), Family::Hypercube).unwrap()
    }

    #[test]
    fn k4_parameter_values() {
        let art = k4_artifact();
        let p = &art.artifact.params;
        assert_eq!(p["network_size"], "128");
        assert_eq!(p["chain_length"], "48");
        assert_eq!(p["alpha"], "98304");
        assert_eq!(p["beta"], "384");
        assert_eq!(p["mu"], "1/96");
        assert_eq!(p["kappa_alpha"], "98304");
        assert_eq!(p["kappa_beta"], "816");
        assert_eq!(p["kappa_unit"], "103/48");
        assert_eq!(
            art.artifact.instance.kappa,
            parse_rat("99120").unwrap() + parse_rat("103/48").unwrap()
        );
        assert_eq!(p["chain_nodes"], "98");
        assert_eq!(p["filler_nodes"], "26");
        assert_eq!(p["alpha_demands"], "96");
        assert_eq!(p["beta_demands"], "8");
        assert_eq!(p["unit_demands"], "6");
        assert_eq!(art.artifact.instance.workload.demands.len(), 110);
    }

    #[test]
    fn generated_instance_is_valid() {
        let art = k4_artifact();
        let report = validate_instance(&art.artifact.instance);
        assert!(report.ok(), "{report}");
        for d in &art.artifact.instance.workload.demands {
            assert_ne!(d.src, d.dst);
            assert!(art.artifact.roles.contains_key(&d.src));
            assert!(art.artifact.roles.contains_key(&d.dst));
        }
        assert_eq!(art.artifact.instance.policy.sigma, Bound::Infinite);
    }

    #[test]
    fn k4_witness_meets_budget() {
        let art = k4_artifact();
        let (cfg, asg) =
            witness_bisection(&art, &["1".into(), "2".into()], &["3".into(), "4".into()]).unwrap();
        let costs = evaluate_components(&art.artifact, &cfg, &asg).unwrap();
        assert_eq!(costs.alpha, parse_rat("98304").unwrap());
        assert_eq!(costs.beta, parse_rat("816").unwrap());
        assert!(costs.total <= art.artifact.instance.kappa);
        assert_eq!(costs.total, asg.total_cost);
    }

    #[test]
    fn unbalanced_certificate_rejected() {
        let art = k4_artifact();
        let err = witness_bisection(&art, &["1".into()], &["2".into(), "3".into(), "4".into()]);
        assert!(matches!(err, Err(ForgeError::CertificateInvalid(_))));
    }

    #[test]
    fn high_cut_certificate_rejected() {
        // prism graph: two triangles joined by a perfect matching; the
        // split {0,1,3} vs {2,4,5} cuts 5 > k = 3
        let prism = BisectionInstance {
            nodes: (0..6).map(|i| i.to_string()).collect(),
            edges: vec![(0, 1), (0, 2), (1, 2), (3, 4), (3, 5), (4, 5), (0, 3), (1, 4), (2, 5)],
            k: 3,
        };
        let art = reduce_bisection(&prism, Family::Hypercube).unwrap();
        let good = witness_bisection(
            &art,
            &["0".into(), "1".into(), "2".into()],
            &["3".into(), "4".into(), "5".into()],
        );
        assert!(good.is_ok());
        let bad = witness_bisection(
            &art,
            &["0".into(), "1".into(), "3".into()],
            &["2".into(), "4".into(), "5".into()],
        );
        assert!(matches!(bad, Err(ForgeError::CertificateInvalid(_))));
    }

    #[test]
    fn oversized_budget_is_clamped() {
        // k at the feasible maximum for K_4 sits under floor(n/3) + 46
        let mut src = BisectionInstance::k4(4);
        src.k = 16;
        let art = reduce_bisection(&src, Family::Hypercube).unwrap();
        assert_eq!(art.k, 16);
        assert!(art.artifact.clamped_k.is_none());

        // 3-cube on 8 nodes: budgets above floor(8/3) + 46 = 48 clamp down
        let mut edges = Vec::new();
        for v in 0..8usize {
            for b in 0..3 {
                let w = v ^ (1 << b);
                if v < w {
                    edges.push((v, w));
                }
            }
        }
        let src =
            BisectionInstance { nodes: (0..8).map(|i| i.to_string()).collect(), edges, k: 60 };
        let art = reduce_bisection(&src, Family::Hypercube).unwrap();
        assert_eq!(art.k, 48);
        assert_eq!(art.artifact.clamped_k, Some(60));
    }
}
