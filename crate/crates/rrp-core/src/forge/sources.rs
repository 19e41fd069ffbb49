//! Source-problem instances: minimum bisection of 3-regular graphs, and
//! restricted exact cover by 3-sets (every element in exactly three
//! clauses).

use std::collections::{BTreeMap, BTreeSet};

use serde::Deserialize;

use super::ForgeError;

/// A 3-regular graph with a bisection budget `k`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BisectionInstance {
    /// Sorted node names; edges index into this list.
    pub nodes: Vec<String>,
    pub edges: Vec<(usize, usize)>,
    pub k: u64,
}

#[derive(Deserialize)]
struct RawBisection {
    #[serde(default)]
    nodes: Vec<String>,
    edges: Vec<(String, String)>,
    k: u64,
}

impl BisectionInstance {
    /// `{"nodes": [...], "edges": [["a","b"], ...], "k": 4}`; `nodes` may be
    /// omitted and is then inferred from the edge list.
    pub fn parse(text: &str) -> Result<Self, ForgeError> {
        let raw: RawBisection =
            serde_json::from_str(text).map_err(|e| ForgeError::MalformedSource(e.to_string()))?;
        let mut nodes: Vec<String> = if raw.nodes.is_empty() {
            let mut set: BTreeSet<String> = BTreeSet::new();
            for (a, b) in &raw.edges {
                set.insert(a.clone());
                set.insert(b.clone());
            }
            set.into_iter().collect()
        } else {
            raw.nodes.clone()
        };
        nodes.sort();
        nodes.dedup();
        let ix: BTreeMap<&str, usize> =
            nodes.iter().enumerate().map(|(i, n)| (n.as_str(), i)).collect();
        let mut edges = Vec::with_capacity(raw.edges.len());
        for (a, b) in &raw.edges {
            let u = *ix
                .get(a.as_str())
                .ok_or_else(|| ForgeError::MalformedSource(format!("unknown node `{a}`")))?;
            let v = *ix
                .get(b.as_str())
                .ok_or_else(|| ForgeError::MalformedSource(format!("unknown node `{b}`")))?;
            edges.push((u.min(v), u.max(v)));
        }
        let inst = BisectionInstance { nodes, edges, k: raw.k };
        inst.validate()?;
        Ok(inst)
    }

    pub fn validate(&self) -> Result<(), ForgeError> {
        let n = self.nodes.len();
        let mut seen = BTreeSet::new();
        let mut degree = vec![0u64; n];
        for &(u, v) in &self.edges {
            if u == v {
                return Err(ForgeError::MalformedSource("self-loop edge".into()));
            }
            if u >= n || v >= n {
                return Err(ForgeError::MalformedSource("edge references unknown node".into()));
            }
            if !seen.insert((u, v)) {
                return Err(ForgeError::MalformedSource("duplicate edge".into()));
            }
            degree[u] += 1;
            degree[v] += 1;
        }
        if degree.iter().any(|&d| d != 3) {
            return Err(ForgeError::MalformedSource("graph is not 3-regular".into()));
        }
        if !n.is_multiple_of(2) {
            return Err(ForgeError::MalformedSource("odd number of nodes".into()));
        }
        if self.k > (n as u64) * (n as u64) {
            return Err(ForgeError::MalformedSource("k exceeds n^2".into()));
        }
        Ok(())
    }

    /// Complete graph on four nodes named 1..4 with the given budget.
    pub fn k4(k: u64) -> Self {
        BisectionInstance {
            nodes: (1..=4).map(|i| i.to_string()).collect(),
            edges: vec![(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)],
            k,
        }
    }
}

/// Exact cover by 3-sets, restricted: every element appears in exactly
/// three clauses (so there are as many clauses as elements).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Rxc3Instance {
    pub elements: Vec<String>,
    /// Each clause holds three distinct element positions.
    pub clauses: Vec<[usize; 3]>,
}

#[derive(Deserialize)]
struct RawRxc3 {
    elements: Vec<String>,
    clauses: Vec<(String, String, String)>,
}

impl Rxc3Instance {
    /// `{"elements": [...], "clauses": [["a","b","c"], ...]}`.
    pub fn parse(text: &str) -> Result<Self, ForgeError> {
        let raw: RawRxc3 =
            serde_json::from_str(text).map_err(|e| ForgeError::MalformedSource(e.to_string()))?;
        let ix: BTreeMap<&str, usize> =
            raw.elements.iter().enumerate().map(|(i, n)| (n.as_str(), i)).collect();
        if ix.len() != raw.elements.len() {
            return Err(ForgeError::MalformedSource("duplicate element".into()));
        }
        let mut clauses = Vec::with_capacity(raw.clauses.len());
        for (a, b, c) in &raw.clauses {
            let mut members = [0usize; 3];
            for (slot, name) in members.iter_mut().zip([a, b, c]) {
                *slot = *ix.get(name.as_str()).ok_or_else(|| {
                    ForgeError::MalformedSource(format!("unknown element `{name}`"))
                })?;
            }
            clauses.push(members);
        }
        let inst = Rxc3Instance { elements: raw.elements, clauses };
        inst.validate()?;
        Ok(inst)
    }

    pub fn validate(&self) -> Result<(), ForgeError> {
        if !self.elements.len().is_multiple_of(3) || self.elements.is_empty() {
            return Err(ForgeError::MalformedSource(
                "element count must be a positive multiple of 3".into(),
            ));
        }
        if self.clauses.len() != self.elements.len() {
            return Err(ForgeError::MalformedSource(
                "clause count must equal element count".into(),
            ));
        }
        let mut occurrences = vec![0u64; self.elements.len()];
        for c in &self.clauses {
            if c[0] == c[1] || c[0] == c[2] || c[1] == c[2] {
                return Err(ForgeError::MalformedSource("clause with repeated element".into()));
            }
            for &x in c {
                if x >= self.elements.len() {
                    return Err(ForgeError::MalformedSource(
                        "clause references unknown element".into(),
                    ));
                }
                occurrences[x] += 1;
            }
        }
        if occurrences.iter().any(|&c| c != 3) {
            return Err(ForgeError::MalformedSource(
                "every element must appear in exactly three clauses".into(),
            ));
        }
        Ok(())
    }

    /// Number of cover triples: |elements| / 3.
    pub fn n(&self) -> u64 {
        self.elements.len() as u64 / 3
    }

    /// The 6-element yes-instance with clauses {1,2,3} and {4,5,6} repeated
    /// three times each (duplicate clauses are allowed).
    pub fn small_yes() -> Self {
        Rxc3Instance {
            elements: (1..=6).map(|i| i.to_string()).collect(),
            clauses: vec![[0, 1, 2], [3, 4, 5], [0, 1, 2], [3, 4, 5], [0, 1, 2], [3, 4, 5]],
        }
    }
}
