//! Exclusivity-graph bounds on Bell correlations and a mechanized derivation
//! of the Tsirelson bound for CHSH.

pub mod bounds;
pub mod events;
pub mod graph;
pub mod proof;
pub mod scenario;
pub mod solvers;

pub use bounds::{
    fractional_packing, independence_number, lovasz_theta, BoundMethod, BoundReport, BoundsError,
};
pub use events::{
    are_equivalent, are_exclusive, close_event, exclusivity_witness, Event, EventError, Outcome,
    Registry,
};
pub use graph::{build_graph, chsh_graph, ExclusivityGraph, GraphError};
pub use proof::{
    build_table1, enumerate_nine_sets, general_bound, sum_identity_residual, symmetric_bound,
    verify_set, NineEventSet, ProofError, ProofReport,
};
pub use scenario::{chsh_functional, validate_behavior, Behavior, ScenarioError};
pub use solvers::{SolveStatus, SolverError};
