//! Shared inputs for the propagator benchmarks.

use std::sync::Arc;

use scop_core::generate::{random_network, rng};
use scop_core::model_io::{build_problem, Mode, ProblemSpec, Query};
use scop_core::{ConstraintTerm, Obdd};

/// Compiled connectivity query `n0 -> n{n-1}` over a seeded random network.
pub fn network_term(nodes: usize, edges: usize, seed: u64) -> ConstraintTerm {
    let network = random_network(&mut rng(seed), nodes, edges);
    let target = network.nodes()[nodes - 1].clone();
    let spec = ProblemSpec {
        network,
        queries: vec![Query {
            source: "n0".into(),
            target,
            reward: 1.0,
        }],
        cardinality: None,
        mode: Mode::Maximize,
        order: None,
    };
    let built = build_problem(&spec).expect("generated networks are small");
    let obdd: Arc<Obdd> = built.obdds[0].clone();
    ConstraintTerm::unit(obdd)
}
