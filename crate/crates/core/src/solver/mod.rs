//! Depth-first search with propagation for stochastic constraint problems.
//!
//! Satisfaction runs one search; maximization repeats it with the objective
//! recast as a constraint whose threshold is raised past each solution found
//! until the search proves that no better strategy exists.

mod search;

use std::sync::Arc;
use std::time::{Duration, Instant};

use serde::Serialize;

use crate::domain::DomainState;
use crate::error::{Error, Result};
use crate::evaluate::evaluate;
use crate::propagate::{dc_propagate, ConstraintTerm, PropagationResult, EPSILON};
use crate::vars::{VarId, VarTable};

use search::Search;

/// `sum_i r_i * P(phi_i | sigma) >= theta`.
#[derive(Clone, Debug)]
pub struct StochasticConstraint {
    pub terms: Vec<ConstraintTerm>,
    pub theta: f64,
}

impl StochasticConstraint {
    pub fn new(terms: Vec<ConstraintTerm>, theta: f64) -> Self {
        StochasticConstraint { terms, theta }
    }

    pub fn value(&self, domains: &DomainState) -> f64 {
        weighted_value(&self.terms, domains)
    }
}

pub fn weighted_value(terms: &[ConstraintTerm], domains: &DomainState) -> f64 {
    terms
        .iter()
        .map(|t| t.reward * evaluate(&t.obdd, domains))
        .sum()
}

#[derive(Clone, Debug)]
pub struct Problem {
    vars: Arc<VarTable>,
    constraints: Vec<StochasticConstraint>,
    cardinality: Option<usize>,
    objective: Option<Vec<ConstraintTerm>>,
}

impl Problem {
    pub fn new(
        vars: Arc<VarTable>,
        constraints: Vec<StochasticConstraint>,
        cardinality: Option<usize>,
        objective: Option<Vec<ConstraintTerm>>,
    ) -> Result<Self> {
        if constraints.is_empty() && objective.is_none() && cardinality.is_none() {
            return Err(Error::Argument(
                "problem has no constraint and no objective".into(),
            ));
        }
        let all_terms = constraints
            .iter()
            .flat_map(|c| c.terms.iter())
            .chain(objective.iter().flatten());
        for t in all_terms {
            if !Arc::ptr_eq(t.obdd.vars(), &vars) && **t.obdd.vars() != *vars {
                return Err(Error::Argument(
                    "term is built over a different variable table".into(),
                ));
            }
            if t.reward.is_nan() || t.reward < 0.0 {
                return Err(Error::Argument("rewards must be >= 0".into()));
            }
        }
        Ok(Problem {
            vars,
            constraints,
            cardinality,
            objective,
        })
    }

    pub fn vars(&self) -> &Arc<VarTable> {
        &self.vars
    }

    pub fn constraints(&self) -> &[StochasticConstraint] {
        &self.constraints
    }

    pub fn cardinality(&self) -> Option<usize> {
        self.cardinality
    }

    pub fn objective(&self) -> Option<&[ConstraintTerm]> {
        self.objective.as_deref()
    }

    /// Checks a strategy by direct evaluation, independent of propagation.
    pub fn is_feasible(&self, strategy: &Strategy) -> bool {
        let doms = strategy.to_domains(&self.vars);
        let card_ok = self.cardinality.is_none_or(|n| strategy.count_true() <= n);
        card_ok
            && self
                .constraints
                .iter()
                .all(|c| c.value(&doms) >= c.theta - EPSILON)
    }

    pub fn objective_value(&self, strategy: &Strategy) -> Option<f64> {
        let doms = strategy.to_domains(&self.vars);
        self.objective.as_ref().map(|o| weighted_value(o, &doms))
    }
}

/// Complete assignment to the decision variables, in variable order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Strategy {
    values: Vec<(VarId, bool)>,
}

impl Strategy {
    pub fn new(mut values: Vec<(VarId, bool)>) -> Self {
        values.sort_by_key(|v| v.0);
        Strategy { values }
    }

    pub(crate) fn from_domains(domains: &DomainState) -> Self {
        Strategy::new(
            domains
                .decisions()
                .map(|(v, d)| (v, d.value().expect("complete assignment")))
                .collect(),
        )
    }

    pub fn get(&self, var: VarId) -> Option<bool> {
        self.values
            .binary_search_by_key(&var, |v| v.0)
            .ok()
            .map(|i| self.values[i].1)
    }

    pub fn values(&self) -> &[(VarId, bool)] {
        &self.values
    }

    pub fn count_true(&self) -> usize {
        self.values.iter().filter(|v| v.1).count()
    }

    pub fn to_domains(&self, vars: &VarTable) -> DomainState {
        DomainState::with_fixed(vars, &self.values).expect("strategy fixes decision variables once")
    }

    pub fn named<'a>(&self, vars: &'a VarTable) -> Vec<(&'a str, bool)> {
        self.values
            .iter()
            .map(|&(v, b)| (vars.name(v), b))
            .collect()
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct SearchStats {
    /// Root plus every branching decision tried.
    pub nodes: u64,
    /// Branching decisions that led to failure.
    pub backtracks: u64,
    pub propagator_calls: u64,
    pub node_visits: u64,
    #[serde(serialize_with = "as_secs")]
    pub wall_time: Duration,
}

fn as_secs<S: serde::Serializer>(d: &Duration, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_f64(d.as_secs_f64())
}

impl SearchStats {
    fn absorb(&mut self, other: &SearchStats) {
        self.nodes += other.nodes;
        self.backtracks += other.backtracks;
        self.propagator_calls += other.propagator_calls;
        self.node_visits += other.node_visits;
    }
}

/// How the stochastic constraints are propagated during search.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum PropagatorKind {
    /// Derivative propagation over scratches repaired after each fix.
    #[default]
    Incremental,
    /// Derivative propagation recomputed from scratch at every call.
    Full,
    Naive,
}

#[derive(Clone, Copy, Debug)]
pub struct SolverOptions {
    pub propagator: PropagatorKind,
    /// Minimum improvement demanded between successive solutions when
    /// maximizing.
    pub delta: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            propagator: PropagatorKind::Incremental,
            delta: 1e-9,
        }
    }
}

#[derive(Clone, Debug)]
pub struct SatOutcome {
    pub strategy: Option<Strategy>,
    pub stats: SearchStats,
}

#[derive(Clone, Debug)]
pub struct OptOutcome {
    /// Best strategy and its objective value; `None` when infeasible.
    pub best: Option<(Strategy, f64)>,
    pub stats: SearchStats,
    /// Number of satisfaction searches run.
    pub rounds: usize,
}

/// At most `bound` decision variables may be true.
pub fn cardinality_propagate(domains: &DomainState, bound: usize) -> PropagationResult {
    let count = domains.count_true();
    let visits = domains.len() as u64;
    if count > bound {
        return PropagationResult::failed(count as f64, visits);
    }
    let fixed = if count == bound {
        domains.free_vars().map(|v| (v, false)).collect()
    } else {
        Vec::new()
    };
    PropagationResult::ok(fixed, count as f64, visits)
}

/// Alternates the cardinality propagator and one derivative propagator per
/// constraint, cardinality first, until nothing changes. Fixes are applied to
/// `domains` and listed in the result; `bound` is the optimistic value of
/// the first constraint, or 0 without constraints.
pub fn propagation_loop(
    constraints: &[StochasticConstraint],
    cardinality: Option<usize>,
    domains: &mut DomainState,
) -> PropagationResult {
    let mut all = Vec::new();
    let mut visits = 0;
    let mut bound = 0.0;
    loop {
        let mut changed = false;
        if let Some(n) = cardinality {
            let r = cardinality_propagate(domains, n);
            visits += r.visits;
            if r.is_failed() {
                return PropagationResult::failed(bound, visits);
            }
            for (v, b) in r.fixed {
                domains.fix(v, b).expect("free variable");
                all.push((v, b));
                changed = true;
            }
        }
        for (i, c) in constraints.iter().enumerate() {
            let r = dc_propagate(&c.terms, domains, c.theta);
            visits += r.visits;
            if i == 0 {
                bound = r.bound;
            }
            if r.is_failed() {
                return PropagationResult::failed(r.bound, visits);
            }
            for (v, b) in r.fixed {
                if domains.fix(v, b).expect("free variable") {
                    all.push((v, b));
                    changed = true;
                }
            }
        }
        if !changed {
            return PropagationResult::ok(all, bound, visits);
        }
    }
}

pub fn solve_sat(problem: &Problem) -> SatOutcome {
    solve_sat_with(problem, &SolverOptions::default())
}

/// Returns the first strategy met by the search, or `None` when the search
/// space is exhausted.
pub fn solve_sat_with(problem: &Problem, opts: &SolverOptions) -> SatOutcome {
    let start = Instant::now();
    let constraints: Vec<(&[ConstraintTerm], f64)> = problem
        .constraints
        .iter()
        .map(|c| (c.terms.as_slice(), c.theta))
        .collect();
    let mut search = Search::new(
        &problem.vars,
        constraints,
        problem.cardinality,
        opts.propagator,
    );
    let strategy = search.run();
    let mut stats = search.stats;
    stats.wall_time = start.elapsed();
    SatOutcome { strategy, stats }
}

pub fn solve_opt(problem: &Problem) -> OptOutcome {
    solve_opt_with(problem, &SolverOptions::default())
}

/// Maximizes the objective by threshold ramping. After a solution of value
/// `F` the next search demands at least `F + delta`, so the result is optimal
/// up to `delta`.
pub fn solve_opt_with(problem: &Problem, opts: &SolverOptions) -> OptOutcome {
    let start = Instant::now();
    let objective: &[ConstraintTerm] = problem.objective().unwrap_or(&[]);
    let mut stats = SearchStats::default();
    let mut best: Option<(Strategy, f64)> = None;
    let mut rounds = 0;
    let mut theta = 0.0;
    loop {
        rounds += 1;
        let mut constraints: Vec<(&[ConstraintTerm], f64)> = problem
            .constraints
            .iter()
            .map(|c| (c.terms.as_slice(), c.theta))
            .collect();
        constraints.push((objective, theta));
        let mut search = Search::new(
            &problem.vars,
            constraints,
            problem.cardinality,
            opts.propagator,
        );
        let found = search.run();
        stats.absorb(&search.stats);
        match found {
            Some(s) => {
                let value = weighted_value(objective, &s.to_domains(&problem.vars));
                // the propagators accept values down to theta - EPSILON
                theta = value + opts.delta + EPSILON;
                best = Some((s, value));
            }
            None => break,
        }
    }
    stats.wall_time = start.elapsed();
    OptOutcome {
        best,
        stats,
        rounds,
    }
}
