//! Core library for the reconfigurable routing problem (RRP) in hybrid
//! networks: a static weighted network augmented with circuit switches whose
//! port matchings induce dynamic links of uniform weight `mu`.
//!
//! The library provides the domain model ([`net`]), policy-constrained
//! routing ([`routing`]), an exhaustive optimizer ([`exact`]), polynomial
//! solvers for the tractable restrictions ([`tractable`]), generators for
//! structured topology families ([`families`]), and generators plus witness
//! builders for three hardness-reduction constructions ([`forge`]).
//!
//! All weights, budgets and costs are exact arbitrary-precision rationals;
//! there is no floating point anywhere in the solve paths.

pub mod exact;
pub mod families;
pub mod fileio;
pub mod forge;
pub mod net;
pub mod rational;
pub mod routing;
pub mod tractable;

#[cfg(feature = "testkit")]
pub mod testkit;

mod blossom;

pub use net::{Configuration, HybridNetwork, RRPInstance, RoutingPolicy, Workload};
pub use rational::Rat;
