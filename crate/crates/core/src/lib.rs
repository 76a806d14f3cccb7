//! Monotone stochastic constraint optimization over ordered binary decision
//! diagrams.
//!
//! Queries over a probabilistic network are compiled into reduced OBDDs
//! ([`obdd`]), evaluated by weighted model counting ([`evaluate`]) and
//! constrained inside a depth-first search ([`solver`]). The search prunes
//! with a derivative-based propagator that is domain consistent and linear in
//! the diagram size ([`propagate`]). A naive propagator and a per-node
//! interval decomposition ([`baseline`]) are kept for comparison.

pub mod baseline;
pub mod domain;
pub mod error;
pub mod evaluate;
pub mod generate;
pub mod model_io;
pub mod obdd;
pub mod propagate;
pub mod solver;
pub mod vars;

pub use domain::{Domain, DomainConflict, DomainState};
pub use error::{Error, Result};
pub use evaluate::{evaluate, model_probability};
pub use obdd::{BoolOp, Cube, Node, NodeId, Obdd, ObddBuilder};
pub use propagate::{
    dc_propagate, naive_propagate, ConstraintTerm, PropagationResult, PropagationScratch, Status,
    EPSILON,
};
pub use solver::{solve_opt, solve_sat, Problem, SearchStats, StochasticConstraint, Strategy};
pub use vars::{VarId, VarInfo, VarKind, VarTable};
