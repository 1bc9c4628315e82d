//! Bounds and codes for secure network coding against arbitrary wiretap sets.
//!
//! A [`network::WiretapNetwork`] is a directed acyclic multigraph with a
//! source, a set of users and a collection of edge sets an eavesdropper may
//! observe. [`bounds`] computes the largest securely deliverable message and
//! the smallest key-to-message ratio; [`code`] builds codes that reach the key
//! bound when every edge joins the source to one user.

pub mod bounds;
pub mod cli;
pub mod code;
pub mod field;
pub mod lp;
pub mod network;
pub mod rational;
