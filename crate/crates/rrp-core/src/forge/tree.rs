//! Reduction from restricted exact cover by 3-sets to routing with three
//! wired ports per node.
//!
//! The demand graph is a complete binary tree with a clique gadget hung on
//! the root, the first n leaves and every clause entry node, a 2-path per
//! clause, and one node per element wired to the clauses containing it;
//! all these edges carry heavy demands (weight alpha) that force matching
//! dynamic links. One unit demand runs from the root to every element
//! node; serving all of them at the forced length requires dynamic links
//! from n leaves onto the 2-paths of an exact cover.

use std::collections::BTreeMap;

use num::BigInt;

use crate::families::{self, Family};
use crate::net::{
    Configuration, Demand, FlowAssignment, FlowPath, LinkRef, NodeIx, RRPInstance, RoutingPolicy,
    Workload,
};
use crate::rational::{fmt_rat, rat_u, Rat};

use super::{ceil_log2, DemandClasses, ForgeError, ReductionArtifact, Rxc3Instance};

/// Tree artifact: generic artifact plus the node tables for the witness.
#[derive(Clone, Debug)]
pub struct TreeArtifact {
    pub artifact: ReductionArtifact,
    pub source: Rxc3Instance,
    pub depth: u32,
    /// Heap-indexed tree nodes (1-based heap, position 0 unused).
    tree: Vec<NodeIx>,
    /// Per clause j (0-based): the nodes (u_j, v_j, w_j).
    clause_paths: Vec<(NodeIx, NodeIx, NodeIx)>,
    elements: Vec<NodeIx>,
    /// Demand-graph edges without the root edges, in demand order.
    core_edges: Vec<(NodeIx, NodeIx)>,
}

impl TreeArtifact {
    pub fn root(&self) -> NodeIx {
        self.tree[1]
    }

    /// Leaf l_i, 1-based, i in 1..=2^depth.
    pub fn leaf(&self, i: u64) -> NodeIx {
        self.tree[(1usize << self.depth) + i as usize - 1]
    }

    pub fn element(&self, i: usize) -> NodeIx {
        self.elements[i]
    }

    pub fn clause_path(&self, j: usize) -> (NodeIx, NodeIx, NodeIx) {
        self.clause_paths[j]
    }
}

/// Build the routing instance for an exact-cover source over the given
/// network family. Needs n >= 2: a single-triple source degenerates the
/// tree.
pub fn reduce_rxc3_tree(src: &Rxc3Instance, family: Family) -> Result<TreeArtifact, ForgeError> {
    src.validate()?;
    let n = src.n();
    if n < 2 {
        return Err(ForgeError::DegenerateTree);
    }
    let d = ceil_log2(n);
    let leaves = 1u64 << d;

    // allocate demand-graph nodes in construction order
    struct Builder {
        next: NodeIx,
        roles: BTreeMap<NodeIx, String>,
        edges: Vec<(NodeIx, NodeIx)>,
    }
    impl Builder {
        fn node(&mut self, role: String) -> NodeIx {
            let v = self.next;
            self.roles.insert(v, role);
            self.next += 1;
            v
        }
        // gadget: a 4-clique with one edge subdivided by z; grey owners get
        // a fresh z joined to them, white leaves are identified with z
        fn hang_grey(&mut self, owner: NodeIx, tag: &str) {
            let z = self.node(format!("gadget_z[{tag}]"));
            self.edges.push((owner, z));
            self.hang_white(z, tag);
        }
        fn hang_white(&mut self, z: NodeIx, tag: &str) {
            let k: Vec<NodeIx> =
                (1..=4).map(|t| self.node(format!("gadget_k[{tag},{t}]"))).collect();
            self.edges.push((z, k[0]));
            self.edges.push((z, k[1]));
            self.edges.push((k[0], k[2]));
            self.edges.push((k[0], k[3]));
            self.edges.push((k[1], k[2]));
            self.edges.push((k[1], k[3]));
            self.edges.push((k[2], k[3]));
        }
    }
    let mut b = Builder { next: 0, roles: BTreeMap::new(), edges: Vec::new() };

    // tree in heap order: node h has children 2h and 2h+1
    let mut tree = vec![NodeIx::MAX; (2 * leaves) as usize];
    for h in 1..2 * leaves {
        let role = if h == 1 {
            "tree_root".to_string()
        } else if h >= leaves {
            let i = h - leaves + 1;
            if i <= n {
                format!("leaf_grey[{i}]")
            } else {
                format!("leaf_white[{i}]")
            }
        } else {
            format!("tree[{h}]")
        };
        tree[h as usize] = b.node(role);
    }
    for h in 2..2 * leaves {
        b.edges.push((tree[(h / 2) as usize], tree[h as usize]));
    }

    b.hang_grey(tree[1], "tree_root");
    for i in 1..=leaves {
        let leaf = tree[(leaves + i - 1) as usize];
        if i <= n {
            b.hang_grey(leaf, &format!("leaf_grey[{i}]"));
        } else {
            b.hang_white(leaf, &format!("leaf_white[{i}]"));
        }
    }

    // clause 2-paths, oriented down: v -> u and v -> w
    let mut clause_paths = Vec::with_capacity(src.clauses.len());
    for j in 1..=src.clauses.len() {
        let u = b.node(format!("clause_u[{j}]"));
        let v = b.node(format!("clause_v[{j}]"));
        let w = b.node(format!("clause_w[{j}]"));
        b.edges.push((v, u));
        b.edges.push((v, w));
        clause_paths.push((u, v, w));
    }
    for (j, &(u, _, _)) in clause_paths.iter().enumerate() {
        b.hang_grey(u, &format!("clause_u[{}]", j + 1));
    }

    let elements: Vec<NodeIx> =
        (1..=src.elements.len()).map(|i| b.node(format!("element[{i}]"))).collect();
    for (j, c) in src.clauses.iter().enumerate() {
        let (u, _, w) = clause_paths[j];
        b.edges.push((u, elements[c[0]]));
        b.edges.push((w, elements[c[1]]));
        b.edges.push((w, elements[c[2]]));
    }

    let Builder { next: node_count, mut roles, edges: core_edges } = b;
    debug_assert_eq!(node_count, 6 * leaves + 28 * n + 4);
    debug_assert_eq!(core_edges.len() as u64, 9 * leaves + 40 * n + 6);

    let (family_index, network_size) = families::smallest_member_at_least(family, node_count);
    let network = families::attach_uniform_switch(families::generate(family, family_index), 3);
    for v in node_count..network_size {
        roles.insert(v, format!("filler[{}]", v - node_count));
    }

    let alpha = rat_u(4 * n * d as u64);
    let mu = Rat::new(BigInt::from(1), BigInt::from(2 * d as u64));
    let kappa = &mu * &alpha * rat_u(core_edges.len() as u64)
        + rat_u(3) * &mu * rat_u(n) * rat_u(d as u64 + 3);

    let mut demands: Vec<Demand> =
        core_edges.iter().map(|&(u, v)| Demand { src: u, dst: v, amount: alpha.clone() }).collect();
    let alpha_range = 0..demands.len();
    for &x in &elements {
        demands.push(Demand { src: tree[1], dst: x, amount: rat_u(1) });
    }
    let unit_range = alpha_range.end..demands.len();

    let mut params: BTreeMap<String, String> = BTreeMap::new();
    params.insert("n".into(), n.to_string());
    params.insert("depth".into(), d.to_string());
    params.insert("demand_graph_nodes".into(), node_count.to_string());
    params.insert("demand_graph_edges".into(), (core_edges.len() + elements.len()).to_string());
    params.insert("core_edges".into(), core_edges.len().to_string());
    params.insert("alpha".into(), fmt_rat(&alpha));
    params.insert("mu".into(), fmt_rat(&mu));
    params.insert("kappa".into(), fmt_rat(&kappa));
    params.insert("family".into(), family.name().into());
    params.insert("family_index".into(), family_index.to_string());
    params.insert("network_size".into(), network_size.to_string());

    Ok(TreeArtifact {
        artifact: ReductionArtifact {
            instance: RRPInstance {
                network,
                mu,
                workload: Workload::new(demands),
                kappa,
                policy: RoutingPolicy::unrestricted(),
            },
            roles,
            params,
            classes: DemandClasses { alpha: alpha_range, beta: 0..0, unit: unit_range },
            clamped_k: None,
        },
        source: src.clone(),
        depth: d,
        tree,
        clause_paths,
        elements,
        core_edges,
    })
}

/// Turn an exact cover (0-based clause indices) into a configuration and
/// assignment of total cost exactly kappa: every core edge becomes a
/// dynamic link served by itself, the cover clauses' middle nodes are
/// linked to the grey leaves, and each root demand runs all-dynamic down
/// the tree and through its cover clause, length depth + 3.
pub fn witness_rxc3_tree(
    art: &TreeArtifact,
    cover: &[usize],
) -> Result<(Configuration, FlowAssignment), ForgeError> {
    let src = &art.source;
    let n = src.n() as usize;
    let mut cover: Vec<usize> = cover.to_vec();
    cover.sort_unstable();
    cover.dedup();
    if cover.len() != n || cover.iter().any(|&j| j >= src.clauses.len()) {
        return Err(ForgeError::CertificateInvalid("not an exact cover".into()));
    }
    let mut covered_by = vec![usize::MAX; src.elements.len()];
    for &j in &cover {
        for &x in &src.clauses[j] {
            if covered_by[x] != usize::MAX {
                return Err(ForgeError::CertificateInvalid("not an exact cover".into()));
            }
            covered_by[x] = j;
        }
    }
    if covered_by.contains(&usize::MAX) {
        return Err(ForgeError::CertificateInvalid("not an exact cover".into()));
    }

    // dynamic links: all core edges, plus leaf i <-> v of the i-th cover clause
    let mut links: Vec<(NodeIx, NodeIx)> = art.core_edges.clone();
    let mut leaf_of_clause: BTreeMap<usize, u64> = BTreeMap::new();
    for (t, &j) in cover.iter().enumerate() {
        let leaf = (t + 1) as u64;
        leaf_of_clause.insert(j, leaf);
        links.push((art.leaf(leaf), art.clause_path(j).1));
    }

    // ports: three per node, handed out in link order
    let mut used: BTreeMap<NodeIx, u64> = BTreeMap::new();
    let mut matching = Vec::with_capacity(links.len());
    for &(u, v) in &links {
        let pu = 3 * u + {
            let c = used.entry(u).or_insert(0);
            let p = *c;
            *c += 1;
            p
        };
        let pv = 3 * v + {
            let c = used.entry(v).or_insert(0);
            let p = *c;
            *c += 1;
            p
        };
        if *used.get(&u).unwrap() > 3 || *used.get(&v).unwrap() > 3 {
            return Err(ForgeError::CertificateInvalid("node needs more than 3 links".into()));
        }
        matching.push((pu, pv));
    }
    let configuration = Configuration::normalized(vec![matching]);

    let inst = &art.artifact.instance;
    let mut paths = Vec::with_capacity(inst.workload.demands.len());
    let mut total = Rat::from_integer(0.into());
    for (i, d) in inst.workload.demands.iter().enumerate() {
        let path = if art.artifact.classes.alpha.contains(&i) {
            FlowPath { src: d.src, dst: d.dst, links: vec![LinkRef::dynamic(d.src, d.dst)] }
        } else {
            // root demand: down the tree to the cover leaf, across to the
            // clause 2-path, and out to the element
            let x = inst.workload.demands[i].dst;
            let elem_pos = art
                .elements
                .iter()
                .position(|&e| e == x)
                .expect("unit demand targets an element node");
            let j = covered_by[elem_pos];
            let leaf_i = leaf_of_clause[&j];
            let mut links = Vec::new();
            // heap walk root -> leaf
            let heap = (1u64 << art.depth) + leaf_i - 1;
            let mut descent = Vec::new();
            let mut h = heap;
            while h > 1 {
                descent.push(h);
                h /= 2;
            }
            let mut at = art.root();
            for h in descent.into_iter().rev() {
                let next = art.tree[h as usize];
                links.push(LinkRef::dynamic(at, next));
                at = next;
            }
            let (u, v, w) = art.clause_path(j);
            links.push(LinkRef::dynamic(at, v));
            let via = if src.clauses[j][0] == elem_pos { u } else { w };
            links.push(LinkRef::dynamic(v, via));
            links.push(LinkRef::dynamic(via, x));
            FlowPath { src: d.src, dst: d.dst, links }
        };
        total += &d.amount * Rat::from_integer(BigInt::from(path.links.len() as u64)) * &inst.mu;
        paths.push(path);
    }
    Ok((configuration, FlowAssignment { paths, total_cost: total }))
}
