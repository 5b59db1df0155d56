//! Funnel recognition, the reduction rules and kernelizer for funnel arc
//! deletion, exact solvers and seeded instance generators.
//!
//! The crate is `no_std` and only needs `alloc`.

#![no_std]

extern crate alloc;

pub mod digraph;
pub mod generator;
pub mod funnel;

pub mod instance;
pub mod kernelizer;

pub mod rules;
pub mod solver;


pub use digraph::{Arc, Digraph, Direction, GraphError, VertexId};
pub use funnel::{
    find_forbidden_witness, has_labeling_extension, is_funnel, is_funnel_labeling, is_local_funnel,
    ForbiddenWitness, FunnelError, Label, Labeling,
};
pub use instance::{
    check_solution, from_fads, to_fads, verify_solution, FadlInstance, FadsInstance, InstanceError,
    Rejection, Solution,
};
pub use rules::{RuleError, RuleId, RuleOutcome, Trace};
