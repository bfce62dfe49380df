//! Hierarchical task network planning over HDDL inputs.
//!
//! The pipeline is: [`hddl`] parses domain and problem text into lifted
//! syntax trees, [`lifted`] interns every symbol into dense integer ids and
//! restricts parameter domains using static predicates, [`ground`] builds a
//! compact propositional problem with bitset-encoded operators, and
//! [`search`] runs forward decomposition over it, either totally ordered
//! ([`search::tfd`]) or partially ordered ([`search::pfd`]). [`plan`] writes
//! and independently validates the resulting hierarchical plans.

pub mod bitset;
pub mod ground;
pub mod hddl;
pub mod lifted;
pub mod plan;
pub mod search;

pub use bitset::BitSet;

#[cfg(test)]
pub(crate) mod testutil;
