//! Reduction from restricted exact cover by 3-sets to routing on a
//! hypercube with one wired port per node and at most three alternations
//! per flow path.
//!
//! Nodes of the cube Q_{8m} (m = ceil(log2(3n))) are addressed as
//! bit-strings; `level` means distance from the all-ones root, i.e. the
//! number of zero bits. The construction plants:
//!   * port nodes P (n of them) at level m,
//!   * clause nodes C at level 3m with three associate neighbors each,
//!   * element nodes X at level 4m with two associate neighbors each,
//!   * heavy demands (weight alpha) pairing every node near the root with
//!     its complement and perfectly matching the seven middle levels W,
//!   * medium demands (weight beta) from clause associates to the elements
//!     of their clause,
//!   * one unit demand from the root to every element.
//!
//! Everything level-shaped is streamed: neither the node set, the middle
//! levels, nor the roughly `C(8m, 4m)`-sized demand blocks are ever held
//! in memory.
//!
//! When m <= 4 the clause nodes and/or their associates fall inside the
//! middle levels W; they are excised from the matching domain (exactly
//! like the element machinery) so the witness can keep every node on at
//! most one dynamic link. For m >= 5 the excision is vacuous and the
//! matching domain is W minus the element machinery alone.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::io::{self, Write};

use num::{BigInt, One, Signed, Zero};

use crate::net::{
    Demand, FlowPath, HybridNetwork, LinkKind, LinkRef, RoutingPolicy, Switch, Wiring,
};
use crate::rational::{choose, fmt_rat, rat_u, Rat};

use super::{ForgeError, Rxc3Instance};

// --------------------------------------------------------------------------
// Bit-string helpers
// --------------------------------------------------------------------------

/// Ascending stream of all `bits`-wide values with exactly `ones` set bits
/// (Gosper's hack).
pub struct LevelIter {
    next: Option<u64>,
    limit: u64,
}

impl LevelIter {
    pub fn new(bits: u32, ones: u32) -> Self {
        assert!(bits < 64 && ones <= bits);
        let first = if ones == 0 { 0 } else { (1u64 << ones) - 1 };
        LevelIter { next: Some(first), limit: 1u64 << bits }
    }
}

impl Iterator for LevelIter {
    type Item = u64;

    fn next(&mut self) -> Option<u64> {
        let v = self.next?;
        self.next = if v == 0 {
            None
        } else {
            let c = v & v.wrapping_neg();
            match v.checked_add(c) {
                Some(r) if r < self.limit => Some((((r ^ v) >> 2) / c) | r),
                _ => None,
            }
        };
        if v < self.limit {
            Some(v)
        } else {
            None
        }
    }
}

/// Bits of the m-wide big-endian representation of `value`, laid out at
/// string positions 0..m (string position c is rank bit c).
fn msb_block(value: u64, m: u32) -> u64 {
    let mut out = 0u64;
    for c in 0..m {
        if value >> (m - 1 - c) & 1 == 1 {
            out |= 1 << c;
        }
    }
    out
}

// --------------------------------------------------------------------------
// The matching over the middle levels
// --------------------------------------------------------------------------

enum Phase<'a> {
    /// Zip two levels of equal binomial size, skipping excluded nodes; the
    /// excess tail of either side is paired within its own level (same-level
    /// nodes are never adjacent: their distance is even).
    Cross {
        lo: LevelIter,
        hi: LevelIter,
        excluded: &'a BTreeSet<u64>,
        tail: Vec<u64>,
    },
    /// Pair every free node of the central level with its bitwise
    /// complement; nodes whose complement is excluded are collected and
    /// paired among themselves afterwards.
    Complement {
        it: LevelIter,
        excluded: &'a BTreeSet<u64>,
        mask: u64,
        orphans: Vec<u64>,
    },
    Drain(std::vec::IntoIter<(u64, u64)>),
}

/// Deterministic perfect pairing of the levels `4m-3 ..= 4m+3` minus
/// `excluded`, in which no pair is joined by a static link. Streams in
/// O(1) memory apart from the (small) excluded-induced tails.
pub fn matching_on_w(m: u32, excluded: &BTreeSet<u64>) -> WMatching<'_> {
    let dim = 8 * m;
    let mut phases = Vec::new();
    for i in (1..=3).rev() {
        // level 4m+i has popcount 4m-i and vice versa
        phases.push(Phase::Cross {
            lo: LevelIter::new(dim, 4 * m + i), // level 4m-i
            hi: LevelIter::new(dim, 4 * m - i), // level 4m+i
            excluded,
            tail: Vec::new(),
        });
    }
    phases.push(Phase::Complement {
        it: LevelIter::new(dim, 4 * m),
        excluded,
        mask: (1u64 << dim) - 1,
        orphans: Vec::new(),
    });
    phases.reverse(); // consumed by pop()
    WMatching { phases }
}

pub struct WMatching<'a> {
    phases: Vec<Phase<'a>>,
}

impl Iterator for WMatching<'_> {
    type Item = (u64, u64);

    fn next(&mut self) -> Option<(u64, u64)> {
        enum Act {
            Pop,
            /// Replace the finished phase by draining these leftover pairs.
            Finish(Vec<(u64, u64)>),
        }
        loop {
            let act = {
                let phase = self.phases.last_mut()?;
                match phase {
                    Phase::Cross { lo, hi, excluded, tail } => {
                        let a = lo.find(|v| !excluded.contains(v));
                        let b = hi.find(|v| !excluded.contains(v));
                        match (a, b) {
                            (Some(a), Some(b)) => return Some((a, b)),
                            (None, None) => Act::Pop,
                            (a, b) => {
                                let mut rest = Vec::new();
                                if let Some(a) = a {
                                    rest.push(a);
                                    rest.extend(lo.filter(|v| !excluded.contains(v)));
                                } else if let Some(b) = b {
                                    rest.push(b);
                                    rest.extend(hi.filter(|v| !excluded.contains(v)));
                                }
                                tail.append(&mut rest);
                                let tail = std::mem::take(tail);
                                assert!(tail.len() % 2 == 0, "odd cross-level tail");
                                Act::Finish(tail.chunks(2).map(|c| (c[0], c[1])).collect())
                            }
                        }
                    }
                    Phase::Complement { it, excluded, mask, orphans } => {
                        let mask = *mask;
                        let mut done = false;
                        let mut found = None;
                        while !done && found.is_none() {
                            match it.next() {
                                Some(v) => {
                                    if excluded.contains(&v) {
                                        continue;
                                    }
                                    let w = !v & mask;
                                    if excluded.contains(&w) {
                                        orphans.push(v);
                                    } else if v < w {
                                        found = Some((v, w));
                                    }
                                }
                                None => done = true,
                            }
                        }
                        if let Some(p) = found {
                            return Some(p);
                        }
                        let orphans = std::mem::take(orphans);
                        assert!(orphans.len() % 2 == 0, "odd orphan count");
                        Act::Finish(orphans.chunks(2).map(|c| (c[0], c[1])).collect())
                    }
                    Phase::Drain(it) => match it.next() {
                        Some(p) => return Some(p),
                        None => Act::Pop,
                    },
                }
            };
            match act {
                Act::Pop => {
                    self.phases.pop();
                }
                Act::Finish(pairs) => {
                    self.phases.pop();
                    self.phases.push(Phase::Drain(pairs.into_iter()));
                }
            }
        }
    }
}

// --------------------------------------------------------------------------
// The reduction
// --------------------------------------------------------------------------

#[derive(Clone, Debug)]
pub struct CubeParams {
    pub n: u64,
    pub m: u32,
    pub dim: u32,
    pub mu: Rat,
    pub beta: Rat,
    pub alpha: Rat,
    pub kappa_alpha: Rat,
    pub kappa_beta: Rat,
    pub kappa_unit: Rat,
    pub kappa: Rat,
    pub alpha_p_count: u64,
    pub alpha_w_count: u64,
}

impl CubeParams {
    pub fn alpha_count(&self) -> u64 {
        self.alpha_p_count + self.alpha_w_count
    }

    pub fn manifest(&self) -> BTreeMap<String, String> {
        let mut p = BTreeMap::new();
        p.insert("n".into(), self.n.to_string());
        p.insert("m".into(), self.m.to_string());
        p.insert("dimension".into(), self.dim.to_string());
        p.insert("mu".into(), fmt_rat(&self.mu));
        p.insert("beta".into(), fmt_rat(&self.beta));
        p.insert("alpha".into(), fmt_rat(&self.alpha));
        p.insert("kappa_alpha".into(), fmt_rat(&self.kappa_alpha));
        p.insert("kappa_beta".into(), fmt_rat(&self.kappa_beta));
        p.insert("kappa_unit".into(), fmt_rat(&self.kappa_unit));
        p.insert("kappa".into(), fmt_rat(&self.kappa));
        p.insert("alpha_p_demands".into(), self.alpha_p_count.to_string());
        p.insert("alpha_w_demands".into(), self.alpha_w_count.to_string());
        p.insert("beta_demands".into(), (9 * self.n).to_string());
        p.insert("unit_demands".into(), (3 * self.n).to_string());
        p
    }
}

#[derive(Clone, Debug)]
pub struct CubeArtifact {
    pub source: Rxc3Instance,
    pub params: CubeParams,
    /// Implicit hypercube with one wired port per node.
    pub network: HybridNetwork,
    pub policy: RoutingPolicy,
    pub root: u64,
    pub ports: Vec<u64>,
    pub clauses: Vec<u64>,
    /// Per clause: neighbors with the last, second-last, third-last bit
    /// flipped (membership positions 1, 2, 3).
    pub clause_assoc: Vec<[u64; 3]>,
    pub elements: Vec<u64>,
    /// Per element: neighbors with the last resp. second-last bit flipped.
    pub element_assoc: Vec<[u64; 2]>,
    /// Nodes excised from the matching domain over the middle levels.
    pub excluded_w: BTreeSet<u64>,
}

fn level(v: u64, dim: u32) -> u32 {
    dim - v.count_ones()
}

pub fn reduce_rxc3_hypercube(src: &Rxc3Instance, mu: &Rat) -> Result<CubeArtifact, ForgeError> {
    src.validate()?;
    let n = src.n();
    if !n.is_multiple_of(2) {
        return Err(ForgeError::OddN);
    }
    if !mu.is_positive() || *mu >= Rat::one() {
        return Err(ForgeError::MuOutOfRange);
    }
    let m = super::ceil_log2(3 * n);
    let dim = 8 * m;
    let mask_m = (1u64 << m) - 1;
    let root = (1u64 << dim) - 1;

    let double_block = |z: u64| -> u64 { msb_block(z, m) | (msb_block(!z & mask_m, m) << m) };
    let flip_last = |v: u64, back: u32| v ^ (1u64 << (dim - back));

    let all_ones_from = |start: u32| -> u64 { (((1u128 << (dim - start)) - 1) as u64) << start };

    let ports: Vec<u64> = (0..n).map(|i| double_block(i) | all_ones_from(2 * m)).collect();
    let clauses: Vec<u64> = (0..3 * n)
        .map(|j| {
            let b = double_block(j);
            b | b << (2 * m) | b << (4 * m) | all_ones_from(6 * m)
        })
        .collect();
    let clause_assoc: Vec<[u64; 3]> =
        clauses.iter().map(|&c| [flip_last(c, 1), flip_last(c, 2), flip_last(c, 3)]).collect();
    let elements: Vec<u64> = (0..3 * n)
        .map(|i| {
            let b = double_block(i);
            b | b << (2 * m) | b << (4 * m) | b << (6 * m)
        })
        .collect();
    let element_assoc: Vec<[u64; 2]> =
        elements.iter().map(|&x| [flip_last(x, 1), flip_last(x, 2)]).collect();

    debug_assert!(ports.iter().all(|&p| level(p, dim) == m));
    debug_assert!(clauses.iter().all(|&c| level(c, dim) == 3 * m));
    debug_assert!(elements.iter().all(|&x| level(x, dim) == 4 * m));

    // matching domain: W minus the element machinery, minus whatever clause
    // machinery happens to fall inside W (only for m <= 4)
    let w_range = (4 * m - 3)..=(4 * m + 3);
    let mut excluded_w: BTreeSet<u64> = BTreeSet::new();
    excluded_w.extend(&elements);
    for a in &element_assoc {
        excluded_w.extend(a);
    }
    for &c in clauses.iter() {
        if w_range.contains(&level(c, dim)) {
            excluded_w.insert(c);
        }
    }
    for a in &clause_assoc {
        for &c in a {
            if w_range.contains(&level(c, dim)) {
                excluded_w.insert(c);
            }
        }
    }

    let alpha_p_count: u64 = (0..=m + 5).map(|l| choose(dim as u64, l as u64)).sum::<u64>() - n;
    let w_size: u64 = (0..=3)
        .map(|i| {
            if i == 0 {
                choose(dim as u64, (4 * m) as u64)
            } else {
                2 * choose(dim as u64, (4 * m + i) as u64)
            }
        })
        .sum();
    let alpha_w_count = (w_size - excluded_w.len() as u64) / 2;

    // beta exceeds both 3n(m+1+2mu)/mu and 3n(m+1+2mu)/(1-mu) strictly
    let unit_weight = rat_u(m as u64 + 1) + rat_u(2) * mu;
    let bound_base = rat_u(3 * n) * &unit_weight;
    let bound = (&bound_base / mu).max(&bound_base / (Rat::one() - mu));
    let beta = Rat::from_integer(bound.floor().to_integer() + BigInt::one());
    let alpha = rat_u(15 * n) * &beta + rat_u(9 * n * n) + rat_u(9 * n) + Rat::one();

    let kappa_alpha = rat_u(alpha_p_count + alpha_w_count) * mu * &alpha;
    let kappa_beta = rat_u(3 * n) * mu * &beta + rat_u(6 * n) * (mu + Rat::one()) * &beta;
    let kappa_unit = rat_u(3 * n) * &unit_weight;
    let kappa = &kappa_alpha + &kappa_beta + &kappa_unit;

    let mut network = HybridNetwork::hypercube(dim);
    network.switches.push(Switch { id: "s".into(), ports: 1u64 << dim });
    network.wiring = Wiring::UniformSingleSwitch { ports_per_node: 1 };

    Ok(CubeArtifact {
        source: src.clone(),
        params: CubeParams {
            n,
            m,
            dim,
            mu: mu.clone(),
            beta,
            alpha,
            kappa_alpha,
            kappa_beta,
            kappa_unit,
            kappa,
            alpha_p_count,
            alpha_w_count,
        },
        network,
        policy: RoutingPolicy {
            sigma: crate::net::Bound::Finite(3),
            delta: crate::net::Bound::Infinite,
            lambda: crate::net::Bound::Infinite,
        },
        root,
        ports,
        clauses,
        clause_assoc,
        elements,
        element_assoc,
        excluded_w,
    })
}

impl CubeArtifact {
    /// Demand stream, in blocks: beta, unit, alpha (complement pairs near
    /// the root, then the middle-level matching).
    pub fn demands(&self) -> impl Iterator<Item = Demand> + '_ {
        let beta = (0..self.clauses.len()).flat_map(move |j| {
            (0..3).map(move |pos| Demand {
                src: self.clause_assoc[j][pos],
                dst: self.elements[self.source.clauses[j][pos]],
                amount: self.params.beta.clone(),
            })
        });
        let unit =
            self.elements.iter().map(move |&x| Demand { src: self.root, dst: x, amount: rat_u(1) });
        let alpha = self.alpha_links().map(move |(u, v)| Demand {
            src: u,
            dst: v,
            amount: self.params.alpha.clone(),
        });
        beta.chain(unit).chain(alpha)
    }

    /// The heavy-demand pairs: every pair is also a dynamic link of any
    /// witness configuration.
    pub fn alpha_links(&self) -> impl Iterator<Item = (u64, u64)> + '_ {
        let dim = self.params.dim;
        let m = self.params.m;
        let mask = (1u64 << dim) - 1;
        let port_set: BTreeSet<u64> = self.ports.iter().copied().collect();
        let near_root = (0..=m + 5).flat_map(move |l| LevelIter::new(dim, dim - l));
        let complements =
            near_root.filter(move |v| !port_set.contains(v)).map(move |v| (v, !v & mask));
        let middle = matching_on_w(m, &self.excluded_w).map(|(u, v)| (u.min(v), u.max(v)));
        complements.chain(middle)
    }

    /// Role of a node in the construction; every demand endpoint has one.
    pub fn role_of(&self, v: u64) -> String {
        if v == self.root {
            return "root".into();
        }
        if let Some(i) = self.ports.iter().position(|&p| p == v) {
            return format!("port[{}]", i + 1);
        }
        if let Some(j) = self.clauses.iter().position(|&c| c == v) {
            return format!("clause[{}]", j + 1);
        }
        if let Some(i) = self.elements.iter().position(|&x| x == v) {
            return format!("element[{}]", i + 1);
        }
        for (j, a) in self.clause_assoc.iter().enumerate() {
            if let Some(pos) = a.iter().position(|&c| c == v) {
                return format!("clause_assoc[{},{}]", j + 1, pos + 1);
            }
        }
        for (i, a) in self.element_assoc.iter().enumerate() {
            if let Some(which) = a.iter().position(|&c| c == v) {
                return format!("element_assoc[{},{}]", i + 1, which + 1);
            }
        }
        let l = level(v, self.params.dim);
        if l <= self.params.m + 5 {
            format!("alpha_source[level={l}]")
        } else if l >= 7 * self.params.m - 5 {
            format!("alpha_target[level={l}]")
        } else if ((4 * self.params.m - 3)..=(4 * self.params.m + 3)).contains(&l) {
            format!("matched_w[level={l}]")
        } else {
            format!("bulk[level={l}]")
        }
    }

    /// Streamed instance-file export. `alpha_limit` truncates the heavy
    /// demand block (used for sampled round-trips); `None` writes all of it.
    pub fn write_instance_json(
        &self,
        out: &mut impl Write,
        alpha_limit: Option<u64>,
    ) -> io::Result<()> {
        let name = |v: u64| self.network.node_name(v);
        writeln!(out, "{{")?;
        writeln!(out, "  \"nodes\": [],")?;
        writeln!(out, "  \"static_links\": [],")?;
        writeln!(
            out,
            "  \"switches\": [{{\"id\": \"s\", \"ports\": {}}}],",
            1u64 << self.params.dim
        )?;
        writeln!(out, "  \"switch_links\": {{\"uniform_per_node\": 1}},")?;
        writeln!(out, "  \"adjacency\": {{\"hypercube\": {}}},", self.params.dim)?;
        writeln!(out, "  \"mu\": \"{}\",", fmt_rat(&self.params.mu))?;
        writeln!(out, "  \"demands\": [")?;
        let small = 12 * self.params.n;
        let cap = alpha_limit.map(|a| small + a);
        let mut first = true;
        for (t, d) in self.demands().enumerate() {
            if let Some(cap) = cap {
                if t as u64 >= cap {
                    break;
                }
            }
            if !first {
                writeln!(out, ",")?;
            }
            first = false;
            write!(
                out,
                "    [\"{}\", \"{}\", \"{}\"]",
                name(d.src),
                name(d.dst),
                fmt_rat(&d.amount)
            )?;
        }
        writeln!(out)?;
        writeln!(out, "  ],")?;
        writeln!(out, "  \"kappa\": \"{}\",", fmt_rat(&self.params.kappa))?;
        writeln!(out, "  \"policy\": {{\"sigma\": 3, \"delta\": \"inf\", \"lambda\": \"inf\"}}")?;
        writeln!(out, "}}")
    }
}

// --------------------------------------------------------------------------
// Witness
// --------------------------------------------------------------------------

#[derive(Clone, Debug)]
pub struct CubeWitness<'a> {
    artifact: &'a CubeArtifact,
    /// Port node -> cover clause node, one link per cover triple.
    pub port_links: Vec<(u64, u64)>,
    /// Clause associate -> element (covered) or element associate
    /// (uncovered), aligned with the beta demand order.
    pub beta_links: Vec<(u64, u64)>,
    beta_paths: Vec<FlowPath>,
    unit_paths: Vec<FlowPath>,
}

/// Evaluation report of a streamed witness; all quantities exact.
#[derive(Clone, Debug, PartialEq)]
pub struct CubeEvaluation {
    pub alpha_links: u64,
    pub alpha_component: Rat,
    pub beta_component: Rat,
    pub unit_component: Rat,
    pub total: Rat,
    pub max_alternations: u64,
    pub max_links_per_node: u64,
}

/// Turn an exact cover (0-based clause indices) into a witness whose total
/// workload cost is exactly kappa.
pub fn witness_rxc3_hypercube<'a>(
    art: &'a CubeArtifact,
    cover: &[usize],
) -> Result<CubeWitness<'a>, ForgeError> {
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

    let port_links: Vec<(u64, u64)> =
        cover.iter().enumerate().map(|(t, &j)| (art.ports[t], art.clauses[j])).collect();

    // each element sits in one cover clause and two others; the two other
    // occurrences are wired to its two associate neighbors, in clause order
    let mut assoc_slot: BTreeMap<(usize, usize), u64> = BTreeMap::new();
    for (i, _) in src.elements.iter().enumerate() {
        let mut uncovered: Vec<(usize, usize)> = Vec::new();
        for (j, c) in src.clauses.iter().enumerate() {
            if cover.binary_search(&j).is_ok() {
                continue;
            }
            if let Some(pos) = c.iter().position(|&x| x == i) {
                uncovered.push((j, pos));
            }
        }
        debug_assert_eq!(uncovered.len(), 2);
        for (slot, &(j, pos)) in uncovered.iter().enumerate() {
            assoc_slot.insert((j, pos), art.element_assoc[i][slot]);
        }
    }

    let in_cover = |j: usize| cover.binary_search(&j).is_ok();
    let mut beta_links = Vec::with_capacity(9 * n);
    let mut beta_paths = Vec::with_capacity(9 * n);
    for j in 0..src.clauses.len() {
        for pos in 0..3 {
            let from = art.clause_assoc[j][pos];
            let element = art.elements[src.clauses[j][pos]];
            if in_cover(j) {
                beta_links.push((from, element));
                beta_paths.push(FlowPath {
                    src: from,
                    dst: element,
                    links: vec![LinkRef::dynamic(from, element)],
                });
            } else {
                let assoc = assoc_slot[&(j, pos)];
                beta_links.push((from, assoc));
                beta_paths.push(FlowPath {
                    src: from,
                    dst: element,
                    links: vec![LinkRef::dynamic(from, assoc), LinkRef::stat(assoc, element)],
                });
            }
        }
    }

    // unit demands: static descent to the port, hop to the cover clause,
    // step to the right associate, hop to the element
    let dim = art.params.dim;
    let mut unit_paths = Vec::with_capacity(3 * n);
    for (i, &x) in art.elements.iter().enumerate() {
        let j = covered_by[i];
        let t = cover.binary_search(&j).expect("cover clause");
        let port = art.ports[t];
        let clause = art.clauses[j];
        let pos = src.clauses[j].iter().position(|&e| e == i).expect("membership");
        let assoc = art.clause_assoc[j][pos];
        let mut links = Vec::new();
        let mut at = art.root;
        for bit in 0..dim {
            if port >> bit & 1 == 0 {
                let next = at ^ (1u64 << bit);
                links.push(LinkRef::stat(at, next));
                at = next;
            }
        }
        debug_assert_eq!(at, port);
        links.push(LinkRef::dynamic(port, clause));
        links.push(LinkRef::stat(clause, assoc));
        links.push(LinkRef::dynamic(assoc, x));
        unit_paths.push(FlowPath { src: art.root, dst: x, links });
    }

    Ok(CubeWitness { artifact: art, port_links, beta_links, beta_paths, unit_paths })
}

enum SeenNodes {
    Bits(Vec<u64>),
    Set(HashSet<u64>),
}

impl SeenNodes {
    fn new(dim: u32) -> Self {
        if dim <= 28 {
            SeenNodes::Bits(vec![0u64; 1 << (dim.saturating_sub(6))])
        } else {
            SeenNodes::Set(HashSet::new())
        }
    }

    /// Marks the node; false if it was already marked.
    fn mark(&mut self, v: u64) -> bool {
        match self {
            SeenNodes::Bits(words) => {
                let (w, b) = ((v >> 6) as usize, v & 63);
                let fresh = words[w] >> b & 1 == 0;
                words[w] |= 1 << b;
                fresh
            }
            SeenNodes::Set(set) => set.insert(v),
        }
    }
}

impl CubeWitness<'_> {
    /// Every dynamic link of the witness configuration, heavy block first.
    pub fn links(&self) -> impl Iterator<Item = (u64, u64)> + '_ {
        self.artifact
            .alpha_links()
            .chain(self.port_links.iter().copied())
            .chain(self.beta_links.iter().copied())
    }

    /// Streamed evaluation: prices every demand, checks that the dynamic
    /// links form a partial matching (at most one per node), that every
    /// flow path is connected, uses links of the configuration, and stays
    /// within the alternation bound.
    pub fn evaluate(&self) -> Result<CubeEvaluation, ForgeError> {
        let art = self.artifact;
        let dim = art.params.dim;
        let bad = |msg: String| ForgeError::CertificateInvalid(msg);

        // Delta_S = 1: every node at most one incident dynamic link
        let mut seen = SeenNodes::new(dim);
        let mut alpha_links = 0u64;
        for (u, v) in art.alpha_links() {
            if u == v {
                return Err(bad("self-loop link".into()));
            }
            if (u ^ v).count_ones() < 2 {
                return Err(bad(format!("matching pair {u:b},{v:b} is static-adjacent")));
            }
            if !seen.mark(u) || !seen.mark(v) {
                return Err(bad("node carries two dynamic links".into()));
            }
            alpha_links += 1;
        }
        if alpha_links != art.params.alpha_count() {
            return Err(bad(format!(
                "alpha stream yielded {alpha_links} links, closed form says {}",
                art.params.alpha_count()
            )));
        }
        let mut small: BTreeSet<(u64, u64)> = BTreeSet::new();
        for &(u, v) in self.port_links.iter().chain(&self.beta_links) {
            if !seen.mark(u) || !seen.mark(v) {
                return Err(bad("node carries two dynamic links".into()));
            }
            small.insert((u.min(v), u.max(v)));
        }

        // price the explicit paths
        let mut max_alt = 0u64;
        let mut eval_path = |path: &FlowPath| -> Result<Rat, ForgeError> {
            let mut at = path.src;
            let mut cost = Rat::zero();
            let mut last: Option<LinkKind> = None;
            let mut alt = 0u64;
            for link in &path.links {
                let next =
                    link.other(at).ok_or_else(|| bad("discontinuous witness path".into()))?;
                match link.kind {
                    LinkKind::Static => {
                        if (link.u ^ link.v).count_ones() != 1 {
                            return Err(bad("static link between non-neighbors".into()));
                        }
                        cost += Rat::one();
                    }
                    LinkKind::Dynamic => {
                        let key = (link.u.min(link.v), link.u.max(link.v));
                        if !small.contains(&key) {
                            return Err(bad("dynamic link not in configuration".into()));
                        }
                        cost += &art.params.mu;
                    }
                }
                if let Some(l) = last {
                    if l != link.kind {
                        alt += 1;
                    }
                }
                last = Some(link.kind);
                at = next;
            }
            if at != path.dst {
                return Err(bad("witness path misses its destination".into()));
            }
            if alt > 3 {
                return Err(bad(format!("path uses {alt} alternations")));
            }
            max_alt = max_alt.max(alt);
            Ok(cost)
        };

        let mut beta_component = Rat::zero();
        for path in &self.beta_paths {
            beta_component += eval_path(path)? * &art.params.beta;
        }
        let mut unit_component = Rat::zero();
        for path in &self.unit_paths {
            unit_component += eval_path(path)?;
        }
        let alpha_component = rat_u(alpha_links) * &art.params.mu * &art.params.alpha;
        let total = &alpha_component + &beta_component + &unit_component;
        Ok(CubeEvaluation {
            alpha_links,
            alpha_component,
            beta_component,
            unit_component,
            total,
            max_alternations: max_alt,
            max_links_per_node: 1,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forge::oracle_exact_cover;
    use crate::rational::frac;

    #[test]
    fn level_iter_counts() {
        assert_eq!(LevelIter::new(8, 4).count() as u64, choose(8, 4));
        assert_eq!(LevelIter::new(8, 0).collect::<Vec<_>>(), vec![0]);
        assert_eq!(LevelIter::new(8, 8).collect::<Vec<_>>(), vec![255]);
        let vals: Vec<u64> = LevelIter::new(4, 2).collect();
        assert_eq!(vals, vec![3, 5, 6, 9, 10, 12]);
    }

    #[test]
    fn small_artifact_parameters() {
        // n = 2, mu = 1/2: m = 3, dimension 24
        let art = reduce_rxc3_hypercube(&Rxc3Instance::small_yes(), &frac(1, 2)).unwrap();
        assert_eq!(art.params.m, 3);
        assert_eq!(art.params.dim, 24);
        assert_eq!(art.params.beta, rat_u(61));
        assert_eq!(art.params.alpha, rat_u(1885));
        assert_eq!(art.params.kappa_unit, rat_u(30));
        assert_eq!(art.params.kappa_beta, rat_u(1281));
        let expected_p: u64 = (0..=8).map(|l| choose(24, l)).sum::<u64>() - 2;
        assert_eq!(art.params.alpha_p_count, expected_p);
    }

    #[test]
    fn odd_n_and_bad_mu_rejected() {
        // 9 elements => n = 3 (odd)
        let elements: Vec<String> = (0..9).map(|i| format!("e{i}")).collect();
        let mut clauses = Vec::new();
        for _ in 0..3 {
            clauses.push([0usize, 1, 2]);
            clauses.push([3, 4, 5]);
            clauses.push([6, 7, 8]);
        }
        let src = Rxc3Instance { elements, clauses };
        assert!(matches!(reduce_rxc3_hypercube(&src, &frac(1, 2)), Err(ForgeError::OddN)));
        assert!(matches!(
            reduce_rxc3_hypercube(&Rxc3Instance::small_yes(), &rat_u(1)),
            Err(ForgeError::MuOutOfRange)
        ));
        assert!(matches!(
            reduce_rxc3_hypercube(&Rxc3Instance::small_yes(), &rat_u(0)),
            Err(ForgeError::MuOutOfRange)
        ));
    }

    #[test]
    fn special_nodes_have_stated_distances() {
        let art = reduce_rxc3_hypercube(&Rxc3Instance::small_yes(), &frac(1, 2)).unwrap();
        let dim = art.params.dim;
        let dist = |a: u64, b: u64| (a ^ b).count_ones();
        // clause nodes pairwise at distance >= 6
        for (i, &a) in art.clauses.iter().enumerate() {
            for &b in &art.clauses[i + 1..] {
                assert!(dist(a, b) >= 6);
            }
        }
        // element nodes pairwise at distance >= 8
        for (i, &a) in art.elements.iter().enumerate() {
            for &b in &art.elements[i + 1..] {
                assert!(dist(a, b) >= 8);
            }
        }
        // root distances: 3m to clause nodes, 4m to element nodes
        for &c in &art.clauses {
            assert_eq!(dist(art.root, c), 3 * art.params.m);
        }
        for &x in &art.elements {
            assert_eq!(dist(art.root, x), 4 * art.params.m);
        }
        for &p in &art.ports {
            assert_eq!(dist(art.root, p), art.params.m);
        }
        assert_eq!(level(art.root, dim), 0);
    }

    #[test]
    fn matching_smoke_dimension_eight() {
        // m = 1: levels 1..=7 around the middle level 4; exclude a synthetic
        // element-like set and check the pairing is perfect and non-adjacent
        let m = 1u32;
        let dim = 8 * m;
        let x: Vec<u64> = vec![0b01010101, 0b10101010];
        let mut excluded = BTreeSet::new();
        for &v in &x {
            excluded.insert(v);
            excluded.insert(v ^ (1 << (dim - 1)));
            excluded.insert(v ^ (1 << (dim - 2)));
        }
        let mut seen = BTreeSet::new();
        let mut count = 0u64;
        for (u, v) in matching_on_w(m, &excluded) {
            assert!((u ^ v).count_ones() >= 2, "pair must not be static-adjacent");
            for w in [u, v] {
                let l = level(w, dim);
                assert!((1..=7).contains(&l));
                assert!(!excluded.contains(&w));
                assert!(seen.insert(w), "node matched twice");
            }
            count += 1;
        }
        let w_size: u64 = (1..=7).map(|l| choose(8, l)).sum();
        assert_eq!(2 * count, w_size - excluded.len() as u64);
    }

    #[test]
    fn witness_costs_exactly_kappa() {
        let src = Rxc3Instance::small_yes();
        let art = reduce_rxc3_hypercube(&src, &frac(1, 2)).unwrap();
        let cover = oracle_exact_cover(&src).unwrap().unwrap();
        let witness = witness_rxc3_hypercube(&art, &cover).unwrap();
        let eval = witness.evaluate().unwrap();
        assert_eq!(eval.alpha_component, art.params.kappa_alpha);
        assert_eq!(eval.beta_component, art.params.kappa_beta);
        assert_eq!(eval.unit_component, art.params.kappa_unit);
        assert_eq!(eval.total, art.params.kappa);
        assert!(eval.max_alternations <= 3);
    }

    #[test]
    fn bad_cover_rejected() {
        let src = Rxc3Instance::small_yes();
        let art = reduce_rxc3_hypercube(&src, &frac(1, 2)).unwrap();
        assert!(matches!(
            witness_rxc3_hypercube(&art, &[0]),
            Err(ForgeError::CertificateInvalid(_))
        ));
        assert!(matches!(
            witness_rxc3_hypercube(&art, &[0, 2]),
            Err(ForgeError::CertificateInvalid(_))
        ));
    }

    #[test]
    fn roles_cover_demand_endpoints() {
        let art = reduce_rxc3_hypercube(&Rxc3Instance::small_yes(), &frac(1, 2)).unwrap();
        assert_eq!(art.role_of(art.root), "root");
        assert_eq!(art.role_of(art.ports[0]), "port[1]");
        assert_eq!(art.role_of(art.elements[5]), "element[6]");
        // endpoints of the small blocks plus a prefix of the heavy block
        for d in art.demands().take(5000) {
            assert!(!art.role_of(d.src).starts_with("bulk"));
            assert!(!art.role_of(d.dst).starts_with("bulk"));
        }
    }
}
