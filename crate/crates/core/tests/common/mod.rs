#![allow(dead_code)]

use std::sync::Arc;

use rand::Rng;
use scop_core::generate::random_instance;
use scop_core::model_io::{build_problem, parse_problem, BuiltProblem};
use scop_core::obdd::load_obdd;
use scop_core::solver::Problem;
use scop_core::{ConstraintTerm, Cube, DomainState, NodeId, Obdd, ObddBuilder, VarId, VarTable};

pub fn fixture(name: &str) -> String {
    let path = format!("{}/../../fixtures/{name}", env!("CARGO_MANIFEST_DIR"));
    std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{path}: {e}"))
}

/// Two-decision diagram: r -> (x ? y2 : y1), shared leaves s and t.
pub fn xy() -> Arc<Obdd> {
    Arc::new(load_obdd(&fixture("xy.obdd")).unwrap())
}

pub fn compression() -> BuiltProblem {
    build_problem(&parse_problem(&fixture("compression.problem")).unwrap()).unwrap()
}

pub fn ac_order() -> Vec<String> {
    fixture("ac.order")
        .split_whitespace()
        .map(str::to_string)
        .collect()
}

/// The a->c connectivity diagram of the four-node network under the order
/// listed in `ac.order`.
pub fn ac_obdd() -> Arc<Obdd> {
    let mut spec = parse_problem(&fixture("compression.problem")).unwrap();
    spec.order = Some(ac_order());
    build_problem(&spec).unwrap().obdds[0].clone()
}

pub fn var(obdd: &Obdd, name: &str) -> VarId {
    obdd.vars()
        .lookup(name)
        .unwrap_or_else(|| panic!("no variable {name}"))
}

/// Plain walk from the root; no arithmetic.
pub fn truth(obdd: &Obdd, assignment: &[bool]) -> bool {
    let mut id = obdd.root();
    while !id.is_terminal() {
        let n = obdd.node(id);
        id = if assignment[n.var.index()] {
            n.hi
        } else {
            n.lo
        };
    }
    id == NodeId::TRUE
}

/// Sum of model weights over every stochastic assignment, decisions given
/// by `decide`.
pub fn brute_wmc(obdd: &Obdd, decide: impl Fn(VarId) -> bool) -> f64 {
    let vars = obdd.vars();
    let sto: Vec<VarId> = vars.stochastic().collect();
    let mut assignment: Vec<bool> = (0..vars.len()).map(|i| decide(VarId(i as u32))).collect();
    let mut total = 0.0;
    for mask in 0u64..(1 << sto.len()) {
        let mut w = 1.0;
        for (k, &v) in sto.iter().enumerate() {
            let b = mask >> k & 1 == 1;
            assignment[v.index()] = b;
            let p = vars.get(v).prob().unwrap();
            w *= if b { p } else { 1.0 - p };
        }
        if truth(obdd, &assignment) {
            total += w;
        }
    }
    total
}

/// Free decisions count as true.
pub fn brute_wmc_doms(obdd: &Obdd, doms: &DomainState) -> f64 {
    brute_wmc(obdd, |v| doms.takes_hi(v))
}

/// Every completion of `doms` together with its weighted constraint value.
pub fn completions(terms: &[ConstraintTerm], doms: &DomainState) -> Vec<(DomainState, f64)> {
    let free: Vec<VarId> = doms.free_vars().collect();
    (0u64..(1 << free.len()))
        .map(|mask| {
            let mut d = doms.clone();
            for (k, &v) in free.iter().enumerate() {
                d.fix(v, mask >> k & 1 == 1).unwrap();
            }
            let value = terms
                .iter()
                .map(|t| t.reward * scop_core::evaluate(&t.obdd, &d))
                .sum();
            (d, value)
        })
        .collect()
}

/// Random instance: table, terms with rewards in [0.5, 2], and a threshold
/// spread around the reachable range.
pub fn random_terms(
    rng: &mut impl Rng,
    max_terms: usize,
) -> (Arc<VarTable>, Vec<ConstraintTerm>, f64) {
    let n_terms = rng.gen_range(1..=max_terms);
    let (vars, obdds) = random_instance(rng, 10, 10, n_terms);
    let terms: Vec<ConstraintTerm> = obdds
        .into_iter()
        .map(|o| {
            let r = if rng.gen_bool(0.5) {
                1.0
            } else {
                rng.gen_range(0.5..2.0)
            };
            ConstraintTerm::new(o, r).unwrap()
        })
        .collect();
    let top: f64 = terms
        .iter()
        .map(|t| t.reward * scop_core::evaluate(&t.obdd, &DomainState::new(&vars)))
        .sum();
    let theta = rng.gen_range(0.0..1.1) * top;
    (vars, terms, theta)
}

/// Exhaustive solver: best feasible strategy value (or feasibility when
/// there is no objective).
pub struct BruteForce {
    pub feasible: usize,
    pub best: Option<f64>,
}

pub fn brute_solve(problem: &Problem) -> BruteForce {
    let vars = problem.vars();
    let decs: Vec<VarId> = vars.decisions().collect();
    let mut feasible = 0;
    let mut best: Option<f64> = None;
    for mask in 0u64..(1 << decs.len()) {
        let mut d = DomainState::new(vars);
        for (k, &v) in decs.iter().enumerate() {
            d.fix(v, mask >> k & 1 == 1).unwrap();
        }
        if problem.cardinality().is_some_and(|n| d.count_true() > n) {
            continue;
        }
        let ok = problem.constraints().iter().all(|c| {
            let v: f64 = c
                .terms
                .iter()
                .map(|t| t.reward * brute_wmc_doms(&t.obdd, &d))
                .sum();
            v >= c.theta - scop_core::EPSILON
        });
        if !ok {
            continue;
        }
        feasible += 1;
        if let Some(obj) = problem.objective() {
            let v: f64 = obj
                .iter()
                .map(|t| t.reward * brute_wmc_doms(&t.obdd, &d))
                .sum();
            best = Some(best.map_or(v, |b: f64| b.max(v)));
        }
    }
    BruteForce { feasible, best }
}

/// Single term built from cubes given as variable names.
pub fn dnf(vars: &Arc<VarTable>, cubes: &[&[&str]]) -> Arc<Obdd> {
    let cubes: Vec<Cube> = cubes
        .iter()
        .map(|c| Cube::positive(c.iter().map(|n| vars.lookup(n).unwrap())).unwrap())
        .collect();
    let mut b = ObddBuilder::new(vars.clone());
    let root = b.from_dnf(&cubes).unwrap();
    Arc::new(b.extract(root))
}
