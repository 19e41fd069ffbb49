//! Instance generators for three hardness constructions, with witness
//! builders that turn a certificate of the source problem into a
//! (configuration, flow assignment) pair meeting the target budget, plus
//! brute-force oracles for the source problems themselves.
//!
//! Each generator emits a [`ReductionArtifact`]: the problem instance, a
//! role map naming what part every node plays in the construction, and a
//! manifest with every derived parameter as an exact rational.

mod bisection;
mod cube;
mod oracles;
mod sources;
mod tree;

pub use bisection::{reduce_bisection, witness_bisection};
pub use cube::{
    matching_on_w, reduce_rxc3_hypercube, witness_rxc3_hypercube, CubeArtifact, CubeEvaluation,
    CubeParams, CubeWitness, LevelIter,
};
pub use oracles::{oracle_bisection, oracle_exact_cover};
pub use sources::{BisectionInstance, Rxc3Instance};
pub use tree::{reduce_rxc3_tree, witness_rxc3_tree};

use std::collections::BTreeMap;
use std::ops::Range;

use num::Zero;
use thiserror::Error;

use crate::net::{Configuration, FlowAssignment, NodeIx, RRPInstance};
use crate::rational::Rat;
use crate::routing::Router;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ForgeError {
    #[error("malformed source: {0}")]
    MalformedSource(String),
    #[error("too large for oracle: {0}")]
    OracleTooLarge(String),
    #[error("certificate invalid: {0}")]
    CertificateInvalid(String),
    #[error("unsupported: odd n (the constructions require an even number of cover triples)")]
    OddN,
    #[error("degenerate tree: need n >= 2")]
    DegenerateTree,
    #[error("mu must lie strictly between 0 and 1")]
    MuOutOfRange,
    #[error("demand stream too large to materialize; use streamed access or force the export")]
    TooLargeToMaterialize,
}

/// Index ranges of the demand blocks in an artifact's workload, in workload
/// order. Empty ranges mean the construction has no such block.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DemandClasses {
    pub alpha: Range<usize>,
    pub beta: Range<usize>,
    pub unit: Range<usize>,
}

/// A generated instance together with construction metadata.
#[derive(Clone, Debug)]
pub struct ReductionArtifact {
    pub instance: RRPInstance,
    /// Role of every node that plays one; fillers are mapped too.
    pub roles: BTreeMap<NodeIx, String>,
    /// Every derived parameter of the construction, exact, as text.
    pub params: BTreeMap<String, String>,
    pub classes: DemandClasses,
    /// Set when the requested budget was clamped down to the provable bound.
    pub clamped_k: Option<u64>,
}

/// Exact per-class costs of an assignment against an artifact's instance.
#[derive(Clone, Debug, PartialEq)]
pub struct ComponentCosts {
    pub alpha: Rat,
    pub beta: Rat,
    pub unit: Rat,
    pub total: Rat,
}

/// Price an assignment through the routing engine and bucket the exact
/// costs by demand class.
pub fn evaluate_components(
    artifact: &ReductionArtifact,
    cfg: &Configuration,
    assignment: &FlowAssignment,
) -> Result<ComponentCosts, ForgeError> {
    let inst = &artifact.instance;
    if assignment.paths.len() != inst.workload.demands.len() {
        return Err(ForgeError::CertificateInvalid(
            "assignment does not cover the workload".into(),
        ));
    }
    let router = Router::new(&inst.network, cfg, false)
        .map_err(|e| ForgeError::CertificateInvalid(e.to_string()))?;
    let mut costs = ComponentCosts {
        alpha: Rat::zero(),
        beta: Rat::zero(),
        unit: Rat::zero(),
        total: Rat::zero(),
    };
    for (i, (d, p)) in inst.workload.demands.iter().zip(&assignment.paths).enumerate() {
        if p.src != d.src || p.dst != d.dst {
            return Err(ForgeError::CertificateInvalid(format!(
                "path endpoints do not match demand {i}"
            )));
        }
        let weight = router
            .evaluate(&inst.policy, &inst.mu, p)
            .map_err(|e| ForgeError::CertificateInvalid(format!("demand {i}: {e}")))?;
        let cost = &d.amount * weight;
        if artifact.classes.alpha.contains(&i) {
            costs.alpha += &cost;
        } else if artifact.classes.beta.contains(&i) {
            costs.beta += &cost;
        } else {
            costs.unit += &cost;
        }
        costs.total += &cost;
    }
    Ok(costs)
}

pub(crate) fn ceil_log2(n: u64) -> u32 {
    assert!(n >= 1);
    if n == 1 {
        0
    } else {
        64 - (n - 1).leading_zeros()
    }
}
